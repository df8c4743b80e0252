#![no_main]

use biaslens::lexicon::BiasLexicon;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|text: &str| {
    if let Ok(lex) = BiasLexicon::from_json_str(text) {
        // accepted lexicons survive their own serialization
        let again = BiasLexicon::from_json_str(&lex.to_json_string()).unwrap();
        assert_eq!(again, lex);
    }
});
