//! Signing sessions ("seals").
//!
//! A seal starts as `SM = r·U` with verifier `P = r·G2 + sum(pk_i)` for a fresh,
//! discarded nonce `r`. Each accepted participant signature adds `sk_i·U` to `SM`;
//! once every key summed into `P` has contributed exactly once,
//! `e(P, U) == e(G2, SM)`.
//!
//! Seals are values: [`add_signature`] and [`close_seal`] return a new seal and
//! leave their input untouched.

use rand_core::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::credential::{
    prove_cred_uid, verify_credential, Credential, CredentialProof, CredentialSecret, Fingerprint,
    IssuerPublicKey,
};
use crate::document::CanonicalDocument;
use crate::error::{Error, Result};
use crate::group::{hash_to_point_g1, pairings_equal, PointG1, PointG2, Scalar};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SealRecord", into = "SealRecord")]
pub struct Seal {
    pub sm: PointG1,
    pub identity: PointG1,
    pub verifier: PointG2,
    pub fingerprints: Vec<Fingerprint>,
    pub closed: bool,
}

/// Wire shape. A closed seal drops its fingerprint array.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SealRecord {
    #[serde(rename = "SM")]
    sm: PointG1,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fingerprints: Option<Vec<Fingerprint>>,
    identity: PointG1,
    verifier: PointG2,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    closed: bool,
}

impl TryFrom<SealRecord> for Seal {
    type Error = Error;

    fn try_from(r: SealRecord) -> Result<Seal> {
        if r.identity.is_identity() {
            return Err(Error::decode("seal identity is the point at infinity"));
        }
        if r.verifier.is_identity() {
            return Err(Error::decode("seal verifier is the point at infinity"));
        }
        let fingerprints = r.fingerprints.unwrap_or_default();
        if r.closed && !fingerprints.is_empty() {
            return Err(Error::decode("closed seal still carries fingerprints"));
        }
        for (i, f) in fingerprints.iter().enumerate() {
            if fingerprints[..i].contains(f) {
                return Err(Error::decode("seal carries a duplicate fingerprint"));
            }
        }
        Ok(Seal {
            sm: r.sm,
            identity: r.identity,
            verifier: r.verifier,
            fingerprints,
            closed: r.closed,
        })
    }
}

impl From<Seal> for SealRecord {
    fn from(s: Seal) -> SealRecord {
        SealRecord {
            sm: s.sm,
            fingerprints: (!s.closed).then_some(s.fingerprints),
            identity: s.identity,
            verifier: s.verifier,
            closed: s.closed,
        }
    }
}

/// A participant's contribution to a seal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflowSignature {
    #[serde(rename = "sigma")]
    pub sigma_i: PointG1,
    pub proof: CredentialProof,
    pub zeta: Fingerprint,
}

/// Sum of participant public keys.
pub fn aggregate_public_keys(pubkeys: &[PointG2]) -> Result<PointG2> {
    if pubkeys.is_empty() {
        return Err(Error::invalid("no participant public keys"));
    }
    Ok(pubkeys.iter().sum())
}

pub fn create_seal<R: RngCore + CryptoRng>(
    pubkeys: &[PointG2],
    message: &[u8],
    rng: &mut R,
) -> Result<Seal> {
    let identity = hash_to_point_g1(message)?;
    create_seal_with_identity(pubkeys, identity, rng)
}

/// Opens a session over an already computed identity point.
pub fn create_seal_with_identity<R: RngCore + CryptoRng>(
    pubkeys: &[PointG2],
    identity: PointG1,
    rng: &mut R,
) -> Result<Seal> {
    create_seal_with_nonce(pubkeys, identity, Scalar::random(rng))
}

/// Deterministic seal construction with a caller-chosen session nonce `r`.
pub fn create_seal_with_nonce(pubkeys: &[PointG2], identity: PointG1, r: Scalar) -> Result<Seal> {
    if identity.is_identity() {
        return Err(Error::invalid("session identity is the point at infinity"));
    }
    let verifier = PointG2::generator() * r + aggregate_public_keys(pubkeys)?;
    if verifier.is_identity() {
        return Err(Error::invalid("session verifier collapsed to the point at infinity"));
    }
    Ok(Seal {
        sm: identity * r,
        identity,
        verifier,
        fingerprints: Vec::new(),
        closed: false,
    })
}

pub fn sign_seal<R: RngCore + CryptoRng>(
    sk: &Scalar,
    cred: &Credential,
    cs: &CredentialSecret,
    vk: &IssuerPublicKey,
    seal: &Seal,
    rng: &mut R,
) -> Result<ReflowSignature> {
    if seal.closed {
        return Err(Error::SealClosed);
    }
    let (proof, zeta) = prove_cred_uid(cred, cs, vk, &seal.identity, rng)?;
    Ok(ReflowSignature {
        sigma_i: seal.identity * *sk,
        proof,
        zeta,
    })
}

/// Verifies the signer's credential against the session identity, checks the
/// fingerprint is new (when `enforce_fingerprints`), and folds the signature in.
pub fn add_signature(
    seal: &Seal,
    vk: &IssuerPublicKey,
    sig: &ReflowSignature,
    enforce_fingerprints: bool,
) -> Result<Seal> {
    if seal.closed {
        return Err(Error::SealClosed);
    }
    if !verify_credential(vk, &sig.proof, &sig.zeta, &seal.identity) {
        return Err(Error::CredentialRejected);
    }
    let known = seal.fingerprints.contains(&sig.zeta);
    if enforce_fingerprints && known {
        return Err(Error::DuplicateFingerprint);
    }
    let mut next = seal.clone();
    next.sm += sig.sigma_i;
    if !known {
        next.fingerprints.push(sig.zeta);
    }
    Ok(next)
}

/// `e(P, U) == e(G2, SM)`.
pub fn verify_seal(seal: &Seal) -> bool {
    pairings_equal(&seal.verifier, &seal.identity, &PointG2::generator(), &seal.sm)
}

pub fn close_seal(seal: &Seal) -> Result<Seal> {
    if !verify_seal(seal) {
        return Err(Error::SealNotVerified);
    }
    Ok(Seal {
        fingerprints: Vec::new(),
        closed: true,
        ..seal.clone()
    })
}

pub fn compare_identity(seal: &Seal, document: &CanonicalDocument) -> bool {
    document.identity() == seal.identity
}
