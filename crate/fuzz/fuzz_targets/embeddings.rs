#![no_main]

use biaslens::weat::parse_embeddings;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok((table, _)) = parse_embeddings(text) {
        let (again, _) = parse_embeddings(&table.to_text()).unwrap();
        assert_eq!(again, table);
    }
});
