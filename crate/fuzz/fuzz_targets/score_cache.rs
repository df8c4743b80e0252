#![no_main]

use biaslens::sentiment::parse_cache;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let (entries, bad) = parse_cache(text);
    assert!(entries.len() + bad <= text.lines().count());
});
