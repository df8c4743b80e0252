#![no_main]

use biaslens::report::parse_bias_report;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    let _ = parse_bias_report(text, "fuzz");
});
