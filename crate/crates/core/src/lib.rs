//! Credential-gated BLS multi-party signatures.
//!
//! Participants hold a BLS key and an issuer-signed anonymous credential. Anyone
//! can open a signing session ([`seal::Seal`]) over a document for a set of
//! public keys; each participant contributes a signature bound to an unlinkable
//! credential showing and a per-session fingerprint that stops double signing.
//! The aggregate stays two group elements regardless of the number of signers.
//! Passports ([`passport`]) chain seals into authenticated provenance graphs.
//!
//! Curve: BLS12-381. Signatures, session identities, credentials and
//! fingerprints live in G1; public keys, verifiers and issuer keys in G2.

pub mod bench;
pub mod bls;
pub mod credential;
pub mod document;
pub mod error;
pub mod group;
pub mod passport;
pub mod seal;
pub mod wire;

pub use error::{Error, Result};
pub use group::{GtElement, PointG1, PointG2, Scalar};
