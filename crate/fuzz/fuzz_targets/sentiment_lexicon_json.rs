#![no_main]

use biaslens::sentiment::SentimentLexicon;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let _ = SentimentLexicon::from_json_str(text);
});
