#![no_main]

use biaslens::corpus::{parse_plaintext, IngestOptions};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let strict = parse_plaintext(data, "f", IngestOptions { lenient: false });
    let lenient = parse_plaintext(data, "f", IngestOptions { lenient: true }).unwrap();
    if let Ok(strict) = strict {
        assert_eq!(strict.corpus, lenient.corpus);
    }
    for s in &lenient.corpus {
        assert!(!s.tokens.is_empty());
    }
});
