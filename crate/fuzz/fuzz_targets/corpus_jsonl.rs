#![no_main]

use biaslens::corpus::{parse_jsonl, to_jsonl, IngestOptions};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let _ = parse_jsonl(data, "f", IngestOptions { lenient: false });
    let got = parse_jsonl(data, "f", IngestOptions { lenient: true }).unwrap();
    let back = parse_jsonl(
        to_jsonl(&got.corpus).as_bytes(),
        "f",
        IngestOptions::default(),
    )
    .unwrap();
    assert_eq!(back.corpus.total_count(), got.corpus.total_count());
});
