//! Single-signer BLS: keys in G2, signatures in G1.

use rand_core::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{hash_to_point_g1, pairings_equal, PointG1, PointG2, Scalar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigningKeypair {
    pub sk: Scalar,
    pub pk: PointG2,
}

impl SigningKeypair {
    pub fn generate<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        Self::from_secret(Scalar::random(rng))
    }

    pub fn from_secret(sk: Scalar) -> Self {
        SigningKeypair {
            sk,
            pk: public_key(&sk),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BlsSignature {
    pub sigma: PointG1,
}

pub fn public_key(sk: &Scalar) -> PointG2 {
    PointG2::generator() * *sk
}

pub fn bls_keygen<R: RngCore + CryptoRng>(rng: &mut R) -> SigningKeypair {
    SigningKeypair::generate(rng)
}

pub fn bls_sign(sk: &Scalar, message: &[u8]) -> Result<BlsSignature> {
    let u = hash_to_point_g1(message)?;
    Ok(BlsSignature { sigma: u * *sk })
}

/// `e(pk, H(m)) == e(G2, sigma)`.
pub fn bls_verify(pk: &PointG2, message: &[u8], sig: &BlsSignature) -> Result<bool> {
    if message.is_empty() {
        return Err(Error::invalid("cannot verify a signature over an empty message"));
    }
    let u = hash_to_point_g1(message)?;
    Ok(pairings_equal(pk, &u, &PointG2::generator(), &sig.sigma))
}
