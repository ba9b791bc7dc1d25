use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("angle must be a finite number of degrees, got {0}")]
    NonFiniteAngle(f64),

    #[error("pair count must be at least 1")]
    ZeroPairs,

    #[error("visibility must lie in [0, 1], got {0}")]
    InvalidVisibility(f64),

    #[error("setting menu must not be empty")]
    EmptyMenu,

    #[error("setting menu has {0} entries, at most {max} are supported", max = crate::lhv::MAX_MENU_SIZE)]
    MenuTooLarge(usize),

    #[error("setting {0}° appears more than once in the menu")]
    DuplicateSetting(f64),

    #[error("setting {0}° is not in the census menu")]
    UnknownSetting(f64),

    #[error("invalid strategy key {key:?}: {reason}")]
    InvalidStrategyKey { key: String, reason: String },

    #[error("census contains no pairs")]
    EmptyCensus,

    #[error("settings of a triple must be pairwise distinct")]
    DegenerateTriple,

    #[error("experiment needs at least one setting pair")]
    NoSettingPairs,

    #[error("mismatched pair allocations: {0}")]
    MismatchedAllocation(String),

    #[error("no-signaling test needs at least 2 distinct remote settings, got {0}")]
    TooFewGroups(usize),

    #[error("no-signaling groups use different local settings")]
    MixedLocalSettings,

    #[error("log has no time-like trials measured in a common basis")]
    NoSameBasisTrials,

    #[error("expected a log with exactly one setting pair, got {0}")]
    NotSingleSettingPair(usize),

    #[error("angle {0}° is outside the open interval (0°, 90°)")]
    AngleOutOfRange(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0}")]
    Io(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
