use thiserror::Error;

/// Everything that can go wrong in the protocol layer.
///
/// Decoding and input problems are kept apart from cryptographic rejections so
/// callers can tell "this is not a valid object" from "this object does not verify".
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("credential request proof rejected")]
    RequestProofRejected,
    #[error("signature credential rejected")]
    CredentialRejected,
    #[error("signature fingerprint already present in seal")]
    DuplicateFingerprint,
    #[error("seal is closed")]
    SealClosed,
    #[error("seal does not verify")]
    SealNotVerified,
    #[error("{0}")]
    VerificationFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn decode(msg: impl Into<String>) -> Self {
        Error::Decode(msg.into())
    }
}
