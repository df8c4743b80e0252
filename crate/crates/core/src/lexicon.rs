//! Concept, exemplar and attribute word sets.
//!
//! A [`BiasLexicon`] holds one concept pair (with concept words and exemplar
//! words for each side) and one attribute pair. Entries are lowercase token
//! sequences of one to five tokens, matched at token boundaries.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::tokenize;

/// Longest supported entry, in tokens.
pub const MAX_ENTRY_TOKENS: usize = 5;

#[derive(Debug, thiserror::Error)]
pub enum LexiconError {
    #[error("cannot read lexicon {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("lexicon schema violation: {0}")]
    Schema(String),
    #[error("{field} empty")]
    EmptySet { field: String },
    #[error("{field}[{index}] is empty after normalization")]
    EmptyEntry { field: String, index: usize },
    #[error("{field}: entry \"{word}\" has more than {MAX_ENTRY_TOKENS} tokens")]
    EntryTooLong { field: String, word: String },
    #[error("{field}: duplicate entry \"{word}\"")]
    Duplicate { field: String, word: String },
    #[error("\"{word}\" appears in both {field_a} and {field_b}")]
    Overlap {
        field_a: String,
        field_b: String,
        word: String,
    },
}

impl LexiconError {
    pub fn code(&self) -> &'static str {
        match self {
            LexiconError::Io { .. } => "lexicon.io",
            LexiconError::Schema(_) => "lexicon.schema",
            LexiconError::EmptySet { .. } => "lexicon.empty_set",
            LexiconError::EmptyEntry { .. } => "lexicon.empty_entry",
            LexiconError::EntryTooLong { .. } => "lexicon.entry_too_long",
            LexiconError::Duplicate { .. } => "lexicon.duplicate",
            LexiconError::Overlap { .. } => "lexicon.overlap",
        }
    }
}

/// A labelled, ordered set of normalized entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordSet {
    label: String,
    entries: Vec<String>,
    // first token -> (entry tokens, entry index), longest first
    index: HashMap<String, Vec<(Vec<String>, usize)>>,
}

impl WordSet {
    /// Normalizes and validates `words`. `label` doubles as the field name in
    /// error messages.
    pub fn new<I, S>(label: &str, words: I) -> Result<Self, LexiconError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut entries = Vec::new();
        let mut seen = BTreeSet::new();
        for (index, raw) in words.into_iter().enumerate() {
            let tokens = tokenize(raw.as_ref());
            if tokens.is_empty() {
                return Err(LexiconError::EmptyEntry {
                    field: label.to_string(),
                    index,
                });
            }
            let word = tokens.join(" ");
            if tokens.len() > MAX_ENTRY_TOKENS {
                return Err(LexiconError::EntryTooLong {
                    field: label.to_string(),
                    word,
                });
            }
            if !seen.insert(word.clone()) {
                return Err(LexiconError::Duplicate {
                    field: label.to_string(),
                    word,
                });
            }
            entries.push(word);
        }
        if entries.is_empty() {
            return Err(LexiconError::EmptySet {
                field: label.to_string(),
            });
        }
        Ok(Self::from_normalized(label.to_string(), entries))
    }

    fn from_normalized(label: String, entries: Vec<String>) -> Self {
        let mut index: HashMap<String, Vec<(Vec<String>, usize)>> = HashMap::new();
        for (i, entry) in entries.iter().enumerate() {
            let tokens: Vec<String> = entry.split(' ').map(str::to_string).collect();
            index
                .entry(tokens[0].clone())
                .or_default()
                .push((tokens, i));
        }
        for candidates in index.values_mut() {
            candidates.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then(a.1.cmp(&b.1)));
        }
        WordSet {
            label,
            entries,
            index,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, entry: &str) -> bool {
        self.entries.iter().any(|e| e == entry)
    }

    /// Longest entry starting at `tokens[start]`, as (entry index, length).
    pub(crate) fn longest_match_at(
        &self,
        tokens: &[String],
        start: usize,
    ) -> Option<(usize, usize)> {
        let candidates = self.index.get(&tokens[start])?;
        candidates.iter().find_map(|(entry_tokens, idx)| {
            let end = start + entry_tokens.len();
            (end <= tokens.len() && tokens[start..end] == entry_tokens[..])
                .then_some((*idx, entry_tokens.len()))
        })
    }

    /// A copy restricted to the given entries, keeping this set's order.
    /// Entries not present are ignored.
    pub fn restricted_to(&self, keep: &BTreeSet<&str>) -> Option<WordSet> {
        let entries: Vec<String> = self
            .entries
            .iter()
            .filter(|e| keep.contains(e.as_str()))
            .cloned()
            .collect();
        (!entries.is_empty()).then(|| Self::from_normalized(self.label.clone(), entries))
    }

    /// Same entries under a different label.
    pub fn relabeled(&self, label: &str) -> WordSet {
        Self::from_normalized(label.to_string(), self.entries.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConceptPair {
    pub name_i: String,
    pub name_j: String,
    pub concept_words_i: WordSet,
    pub concept_words_j: WordSet,
    pub exemplar_words_i: WordSet,
    pub exemplar_words_j: WordSet,
    pub allow_overlap: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributePair {
    pub name_p: String,
    pub name_q: String,
    pub attribute_words_p: WordSet,
    pub attribute_words_q: WordSet,
}

/// One concept pair and one attribute pair. Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiasLexicon {
    pub id: String,
    pub concept_pair: ConceptPair,
    pub attribute_pair: AttributePair,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LexiconDoc {
    pub id: String,
    pub concept_pair: ConceptPairDoc,
    pub attribute_pair: AttributePairDoc,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConceptPairDoc {
    pub name_i: String,
    pub name_j: String,
    pub concept_words_i: Vec<String>,
    pub concept_words_j: Vec<String>,
    pub exemplar_words_i: Vec<String>,
    pub exemplar_words_j: Vec<String>,
    #[serde(default)]
    pub allow_overlap: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AttributePairDoc {
    pub name_p: String,
    pub name_q: String,
    pub attribute_words_p: Vec<String>,
    pub attribute_words_q: Vec<String>,
}

fn check_disjoint(a: &WordSet, b: &WordSet) -> Result<(), LexiconError> {
    match a.entries().iter().find(|w| b.contains(w)) {
        Some(word) => Err(LexiconError::Overlap {
            field_a: a.label().to_string(),
            field_b: b.label().to_string(),
            word: word.clone(),
        }),
        None => Ok(()),
    }
}

impl BiasLexicon {
    pub fn from_doc(doc: LexiconDoc) -> Result<Self, LexiconError> {
        let cp = doc.concept_pair;
        let ap = doc.attribute_pair;
        let concept_pair = ConceptPair {
            concept_words_i: WordSet::new("concept_words_i", &cp.concept_words_i)?,
            concept_words_j: WordSet::new("concept_words_j", &cp.concept_words_j)?,
            exemplar_words_i: WordSet::new("exemplar_words_i", &cp.exemplar_words_i)?,
            exemplar_words_j: WordSet::new("exemplar_words_j", &cp.exemplar_words_j)?,
            name_i: cp.name_i,
            name_j: cp.name_j,
            allow_overlap: cp.allow_overlap,
        };
        let attribute_pair = AttributePair {
            attribute_words_p: WordSet::new("attribute_words_p", &ap.attribute_words_p)?,
            attribute_words_q: WordSet::new("attribute_words_q", &ap.attribute_words_q)?,
            name_p: ap.name_p,
            name_q: ap.name_q,
        };
        let lexicon = BiasLexicon {
            id: doc.id,
            concept_pair,
            attribute_pair,
        };
        lexicon.validate()?;
        Ok(lexicon)
    }

    pub fn from_json_str(text: &str) -> Result<Self, LexiconError> {
        let doc: LexiconDoc =
            serde_json::from_str(text).map_err(|e| LexiconError::Schema(e.to_string()))?;
        Self::from_doc(doc)
    }

    pub fn validate(&self) -> Result<(), LexiconError> {
        let cp = &self.concept_pair;
        let ap = &self.attribute_pair;
        check_disjoint(&cp.concept_words_i, &cp.concept_words_j)?;
        check_disjoint(&cp.exemplar_words_i, &cp.exemplar_words_j)?;
        // a word may not stimulate both sides through different set kinds
        check_disjoint(&cp.concept_words_i, &cp.exemplar_words_j)?;
        check_disjoint(&cp.exemplar_words_i, &cp.concept_words_j)?;
        if !cp.allow_overlap {
            check_disjoint(&cp.concept_words_i, &cp.exemplar_words_i)?;
            check_disjoint(&cp.concept_words_j, &cp.exemplar_words_j)?;
        }
        check_disjoint(&ap.attribute_words_p, &ap.attribute_words_q)?;
        for target in self.target_sets() {
            check_disjoint(target, &ap.attribute_words_p)?;
            check_disjoint(target, &ap.attribute_words_q)?;
        }
        Ok(())
    }

    fn target_sets(&self) -> [&WordSet; 4] {
        let cp = &self.concept_pair;
        [
            &cp.concept_words_i,
            &cp.concept_words_j,
            &cp.exemplar_words_i,
            &cp.exemplar_words_j,
        ]
    }

    fn all_sets(&self) -> [&WordSet; 6] {
        let [a, b, c, d] = self.target_sets();
        [
            a,
            b,
            c,
            d,
            &self.attribute_pair.attribute_words_p,
            &self.attribute_pair.attribute_words_q,
        ]
    }

    pub fn to_doc(&self) -> LexiconDoc {
        let cp = &self.concept_pair;
        let ap = &self.attribute_pair;
        LexiconDoc {
            id: self.id.clone(),
            concept_pair: ConceptPairDoc {
                name_i: cp.name_i.clone(),
                name_j: cp.name_j.clone(),
                concept_words_i: cp.concept_words_i.entries().to_vec(),
                concept_words_j: cp.concept_words_j.entries().to_vec(),
                exemplar_words_i: cp.exemplar_words_i.entries().to_vec(),
                exemplar_words_j: cp.exemplar_words_j.entries().to_vec(),
                allow_overlap: cp.allow_overlap,
            },
            attribute_pair: AttributePairDoc {
                name_p: ap.name_p.clone(),
                name_q: ap.name_q.clone(),
                attribute_words_p: ap.attribute_words_p.entries().to_vec(),
                attribute_words_q: ap.attribute_words_q.entries().to_vec(),
            },
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("lexicon doc serializes")
    }

    /// The same lexicon with the i and j roles exchanged.
    pub fn swap_sides(&self) -> BiasLexicon {
        let cp = &self.concept_pair;
        BiasLexicon {
            id: self.id.clone(),
            concept_pair: ConceptPair {
                name_i: cp.name_j.clone(),
                name_j: cp.name_i.clone(),
                concept_words_i: cp.concept_words_j.relabeled("concept_words_i"),
                concept_words_j: cp.concept_words_i.relabeled("concept_words_j"),
                exemplar_words_i: cp.exemplar_words_j.relabeled("exemplar_words_i"),
                exemplar_words_j: cp.exemplar_words_i.relabeled("exemplar_words_j"),
                allow_overlap: cp.allow_overlap,
            },
            attribute_pair: self.attribute_pair.clone(),
        }
    }

    /// The same lexicon with the p and q attribute roles exchanged.
    pub fn swap_attributes(&self) -> BiasLexicon {
        let ap = &self.attribute_pair;
        BiasLexicon {
            id: self.id.clone(),
            concept_pair: self.concept_pair.clone(),
            attribute_pair: AttributePair {
                name_p: ap.name_q.clone(),
                name_q: ap.name_p.clone(),
                attribute_words_p: ap.attribute_words_q.relabeled("attribute_words_p"),
                attribute_words_q: ap.attribute_words_p.relabeled("attribute_words_q"),
            },
        }
    }

    /// Replaces the exemplar sets, e.g. with random subsets. The result is
    /// not re-validated; subsets of valid sets stay valid.
    pub fn with_exemplars(&self, ew_i: WordSet, ew_j: WordSet) -> BiasLexicon {
        let mut out = self.clone();
        out.concept_pair.exemplar_words_i = ew_i;
        out.concept_pair.exemplar_words_j = ew_j;
        out
    }
}

pub fn load_lexicon(path: impl AsRef<Path>) -> Result<BiasLexicon, LexiconError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
        path: path.display().to_string(),
        source,
    })?;
    BiasLexicon::from_json_str(&text)
}

/// Words shared between two lexicons. Reuse is legal but worth auditing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrossLexiconWarning {
    pub lexicon_a: String,
    pub lexicon_b: String,
    pub shared_words: Vec<String>,
}

impl std::fmt::Display for CrossLexiconWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "lexicons {} and {} share {} word(s): {}",
            self.lexicon_a,
            self.lexicon_b,
            self.shared_words.len(),
            self.shared_words.join(", ")
        )
    }
}

pub fn validate_cross_lexicon(lexicons: &[BiasLexicon]) -> Vec<CrossLexiconWarning> {
    let word_sets: Vec<BTreeSet<&str>> = lexicons
        .iter()
        .map(|lex| {
            lex.all_sets()
                .iter()
                .flat_map(|s| s.entries().iter().map(String::as_str))
                .collect()
        })
        .collect();
    let mut warnings = Vec::new();
    for a in 0..lexicons.len() {
        for b in a + 1..lexicons.len() {
            let shared: Vec<String> = word_sets[a]
                .intersection(&word_sets[b])
                .map(|w| w.to_string())
                .collect();
            if !shared.is_empty() {
                warnings.push(CrossLexiconWarning {
                    lexicon_a: lexicons[a].id.clone(),
                    lexicon_b: lexicons[b].id.clone(),
                    shared_words: shared,
                });
            }
        }
    }
    warnings
}

/// Which of the six sets each entry belongs to, for audit output.
pub fn membership(lexicon: &BiasLexicon) -> BTreeMap<String, Vec<String>> {
    let mut out: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for set in lexicon.all_sets() {
        for word in set.entries() {
            out.entry(word.clone())
                .or_default()
                .push(set.label().to_string());
        }
    }
    out
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use serde_json::json;

    pub(crate) fn insect_flower_doc() -> serde_json::Value {
        json!({
            "id": "insect-flower",
            "concept_pair": {
                "name_i": "Insect", "name_j": "Flower",
                "concept_words_i": ["insect", "insects"],
                "concept_words_j": ["flower", "flowers"],
                "exemplar_words_i": ["ant", "spider"],
                "exemplar_words_j": ["rose", "tulip"]
            },
            "attribute_pair": {
                "name_p": "Pleasant", "name_q": "Unpleasant",
                "attribute_words_p": ["beautiful", "pleasant"],
                "attribute_words_q": ["ugly", "nasty"]
            }
        })
    }

    #[test]
    fn loads_insect_flower() {
        let lex = BiasLexicon::from_json_str(&insect_flower_doc().to_string()).unwrap();
        assert_eq!(lex.concept_pair.name_i, "Insect");
        assert_eq!(
            lex.concept_pair.exemplar_words_j.entries(),
            ["rose", "tulip"]
        );
        assert!(!lex.concept_pair.allow_overlap);
    }

    #[test]
    fn rose_on_both_sides_is_rejected() {
        let mut doc = insect_flower_doc();
        doc["concept_pair"]["exemplar_words_i"] = json!(["ant", "rose"]);
        let err = BiasLexicon::from_json_str(&doc.to_string()).unwrap_err();
        assert!(matches!(err, LexiconError::Overlap { ref word, .. } if word == "rose"));
        assert!(err.to_string().contains("rose"));
    }

    #[test]
    fn empty_attribute_set_is_named() {
        let mut doc = insect_flower_doc();
        doc["attribute_pair"]["attribute_words_q"] = json!([]);
        let err = BiasLexicon::from_json_str(&doc.to_string()).unwrap_err();
        assert_eq!(err.to_string(), "attribute_words_q empty");
    }

    #[test]
    fn concept_exemplar_overlap_needs_flag() {
        let mut doc = insect_flower_doc();
        doc["concept_pair"]["exemplar_words_j"] = json!(["rose", "flower"]);
        assert!(BiasLexicon::from_json_str(&doc.to_string()).is_err());
        doc["concept_pair"]["allow_overlap"] = json!(true);
        assert!(BiasLexicon::from_json_str(&doc.to_string()).is_ok());
    }

    #[test]
    fn target_attribute_overlap_rejected() {
        let mut doc = insect_flower_doc();
        doc["attribute_pair"]["attribute_words_p"] = json!(["beautiful", "rose"]);
        let err = BiasLexicon::from_json_str(&doc.to_string()).unwrap_err();
        assert_eq!(err.code(), "lexicon.overlap");
    }

    #[test]
    fn duplicates_and_long_entries() {
        let err = WordSet::new("w", ["a", "A"]).unwrap_err();
        assert!(matches!(err, LexiconError::Duplicate { .. }));
        let err = WordSet::new("w", ["a b c d e f"]).unwrap_err();
        assert!(matches!(err, LexiconError::EntryTooLong { .. }));
        let err = WordSet::new("w", ["  ", "x"]).unwrap_err();
        assert!(matches!(err, LexiconError::EmptyEntry { index: 0, .. }));
        let set = WordSet::new("w", ["Latonya   Jones"]).unwrap();
        assert_eq!(set.entries(), ["latonya jones"]);
    }

    #[test]
    fn unknown_field_is_schema_error() {
        let mut doc = insect_flower_doc();
        doc["extra"] = json!(1);
        let err = BiasLexicon::from_json_str(&doc.to_string()).unwrap_err();
        assert_eq!(err.code(), "lexicon.schema");
    }

    #[test]
    fn round_trip_and_case_normalization() {
        let lex = BiasLexicon::from_json_str(&insect_flower_doc().to_string()).unwrap();
        let again = BiasLexicon::from_json_str(&lex.to_json_string()).unwrap();
        assert_eq!(lex, again);

        let upper = insect_flower_doc().to_string().replace("rose", "ROSE");
        let upper = BiasLexicon::from_json_str(&upper).unwrap();
        assert_eq!(upper, lex);
    }

    #[test]
    fn cross_lexicon_warnings() {
        let a = BiasLexicon::from_json_str(&insect_flower_doc().to_string()).unwrap();
        assert!(validate_cross_lexicon(std::slice::from_ref(&a)).is_empty());

        let mut doc = insect_flower_doc();
        doc["id"] = json!("other");
        doc["concept_pair"] = json!({
            "name_i": "Weapon", "name_j": "Instrument",
            "concept_words_i": ["weapon"], "concept_words_j": ["instrument"],
            "exemplar_words_i": ["gun"], "exemplar_words_j": ["guitar"]
        });
        let b = BiasLexicon::from_doc(serde_json::from_value(doc.clone()).unwrap()).unwrap();
        let warnings = validate_cross_lexicon(&[a.clone(), b]);
        assert_eq!(warnings.len(), 1);
        assert_eq!(
            warnings[0].shared_words,
            ["beautiful", "nasty", "pleasant", "ugly"]
        );

        doc["attribute_pair"] = json!({
            "name_p": "Good", "name_q": "Bad",
            "attribute_words_p": ["good"], "attribute_words_q": ["bad"]
        });
        let c = BiasLexicon::from_doc(serde_json::from_value(doc).unwrap()).unwrap();
        assert!(validate_cross_lexicon(&[a, c]).is_empty());
    }

    #[test]
    fn swaps_are_involutions() {
        let lex = BiasLexicon::from_json_str(&insect_flower_doc().to_string()).unwrap();
        assert_eq!(lex.swap_sides().swap_sides(), lex);
        assert_eq!(lex.swap_attributes().swap_attributes(), lex);
    }
}
