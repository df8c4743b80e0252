#![no_main]

use biaslens::extract::{parse_sentences, parse_statements};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let _ = parse_statements(text);
    let _ = parse_sentences(text);
});
