#![no_main]

use biaslens::corpus::{segment, tokenize};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    for s in segment(text) {
        let tokens = tokenize(s);
        assert_eq!(tokenize(&tokens.join(" ")), tokens);
    }
});
