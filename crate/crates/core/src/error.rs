use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON on line {line}: {source}")]
    MalformedLine {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("duplicate comment id {id:?} on line {line}")]
    DuplicateId { id: String, line: usize },
    #[error("empty comment id on line {line}")]
    EmptyId { line: usize },
    #[error("bad lexicon entry on line {line}: {reason}")]
    Lexicon { line: usize, reason: String },
    #[error("invalid percentage {0}, expected one of 25, 50, 75, 100")]
    InvalidPercentage(u8),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("target vocab size {target} not above required character set size {charset}")]
    VocabTooSmall { target: usize, charset: usize },
    #[error("corpus too small to fill {target} vocabulary entries ({available} candidates)")]
    VocabTooLarge { target: usize, available: usize },
    #[error("bad vocab file: {0}")]
    VocabFormat(String),
    #[error("token id {0} out of range for vocabulary")]
    IdOutOfRange(u32),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("emoji {emoji:?} has an empty expansion in the lexicon")]
    EmptyExpansion { emoji: String },
    #[error("need at least 2 paired observations, got {0}")]
    TooFewSamples(usize),
    #[error("paired differences have zero variance")]
    ZeroVariance,
    #[error("invalid span tag {0:?}")]
    BadTag(String),
}

impl Error {
    /// CLI exit code: 1 for user errors (bad flags, missing files),
    /// 2 for data errors (schema/content violations).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::InvalidConfig(_) | Error::InvalidPercentage(_) => 1,
            _ => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
