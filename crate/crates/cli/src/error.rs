use std::fmt;
use std::process::ExitCode;

/// Failure of a single command, mapped onto the process exit status.
#[derive(Debug)]
pub enum CliError {
    Io(String),
    Core(reflow::Error),
    /// A check ran to completion and answered "no".
    Rejected(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub mod code {
    pub const OTHER: u8 = 1;
    pub const IO: u8 = 3;
    pub const DECODE: u8 = 4;
    pub const PROOF: u8 = 5;
    pub const DUPLICATE: u8 = 6;
    pub const VERIFICATION: u8 = 7;
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        use reflow::Error as E;
        ExitCode::from(match self {
            CliError::Io(_) => code::IO,
            CliError::Rejected(_) => code::VERIFICATION,
            CliError::Core(e) => match e {
                E::Decode(_) => code::DECODE,
                E::RequestProofRejected | E::CredentialRejected => code::PROOF,
                E::DuplicateFingerprint => code::DUPLICATE,
                E::SealNotVerified | E::VerificationFailed(_) => code::VERIFICATION,
                E::InvalidInput(_) | E::SealClosed => code::OTHER,
            },
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Rejected(msg) => write!(f, "verification failed: {msg}"),
        }
    }
}

impl From<reflow::Error> for CliError {
    fn from(e: reflow::Error) -> Self {
        CliError::Core(e)
    }
}
