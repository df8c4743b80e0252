#![no_main]

use biaslens::sentiment::parse_adapter_reply;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: (u8, &str)| {
    let (expected, text) = data;
    if let Ok(v) = parse_adapter_reply(text, expected as usize) {
        assert_eq!(v.len(), expected as usize);
    }
});
