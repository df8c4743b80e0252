use crate::biasmeter::BiasError;
use crate::corpus::CorpusError;
use crate::lexicon::LexiconError;
use crate::report::ReportError;
use crate::robustness::RobustnessError;
use crate::sentiment::SentimentError;
use crate::temporal::TemporalError;
use crate::weat::WeatError;

/// Any module error, tagged with the module it came from.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("lexicon: {0}")]
    Lexicon(#[from] LexiconError),
    #[error("corpus: {0}")]
    Corpus(#[from] CorpusError),
    #[error("sentiment: {0}")]
    Sentiment(#[from] SentimentError),
    #[error("biasmeter: {0}")]
    Bias(#[from] BiasError),
    #[error("weat: {0}")]
    Weat(#[from] WeatError),
    #[error("temporal: {0}")]
    Temporal(#[from] TemporalError),
    #[error("robustness: {0}")]
    Robustness(#[from] RobustnessError),
    #[error("report: {0}")]
    Report(#[from] ReportError),
}

impl Error {
    /// Stable dotted error code, e.g. `lexicon.overlap`.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Lexicon(e) => e.code(),
            Error::Corpus(e) => e.code(),
            Error::Sentiment(e) => e.code(),
            Error::Bias(e) => e.code(),
            Error::Weat(e) => e.code(),
            Error::Temporal(e) => e.code(),
            Error::Robustness(e) => e.code(),
            Error::Report(e) => e.code(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
