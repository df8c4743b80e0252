#![no_main]

use biaslens::corpus::parse_timestamp;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let _ = parse_timestamp(text);
});
