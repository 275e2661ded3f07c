use std::fmt;

/// Failure of a CLI run, carrying its exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, unreadable or inconsistent configuration.
    Config(String),
    /// Elimination judged invalid while running with `--strict`.
    Validity(String),
    /// A numerical routine failed on otherwise valid input.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 1,
            Self::Validity(_) => 2,
            Self::Numerical(_) => 3,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self::Config(format!("{}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "config error: {m}"),
            Self::Validity(m) => write!(f, "validity failure: {m}"),
            Self::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<cavelim::Error> for CliError {
    fn from(e: cavelim::Error) -> Self {
        use cavelim::Error as E;
        match e {
            E::InvalidParameter(_)
            | E::SingularGeometry(_)
            | E::NotSymmetric(_)
            | E::Unphysical(_)
            | E::Unsupported(_)
            | E::DimensionCap { .. }
            | E::DimensionMismatch { .. }
            | E::NotPositiveSemidefinite(_) => Self::Config(e.to_string()),
            E::DecompositionUnreliable { .. }
            | E::EliminationSingular { .. }
            | E::DegenerateEnsemble
            | E::ResonanceSingular
            | E::Integration(_) => Self::Numerical(e.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
