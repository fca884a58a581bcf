//! Pairing-group layer.
//!
//! Everything above this module is written against the newtypes defined here,
//! never against the curve library directly. The selected curve is BLS12-381:
//!
//! | type        | group                     | encoded size |
//! |-------------|---------------------------|--------------|
//! | [`Scalar`]  | F_n, n = group order      | 32 bytes, big-endian |
//! | [`PointG1`] | E(F_p), signatures, ids   | 48 bytes, compressed |
//! | [`PointG2`] | E'(F_p2), keys, verifiers | 96 bytes, compressed |
//!
//! Compressed encodings carry the standard compression, infinity and sign flags
//! in the three most significant bits of the first byte.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use bls12_381::hash_to_curve::{ExpandMsgXmd, HashToCurve};
use bls12_381::{G1Affine, G1Projective, G2Affine, G2Prepared, G2Projective, Gt};
use ff::Field;
use group::{Curve, Group};
use rand_chacha::ChaCha20Rng;
use rand_core::{CryptoRng, OsRng, RngCore, SeedableRng};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha512};

use crate::error::{Error, Result};

pub const SCALAR_BYTES: usize = 32;
pub const G1_BYTES: usize = 48;
pub const G2_BYTES: usize = 96;

/// Domain separation tag for hashing messages onto G1 (RFC 9380 suite BLS12381G1_XMD:SHA-256_SSWU_RO_).
pub const HASH_TO_G1_DST: &[u8] = b"REFLOW-V01-CS01-with-BLS12381G1_XMD:SHA-256_SSWU_RO_";
/// Domain separation tag for hashing messages onto G2.
pub const HASH_TO_G2_DST: &[u8] = b"REFLOW-V01-CS01-with-BLS12381G2_XMD:SHA-256_SSWU_RO_";

const HS_SEED: &[u8] = b"reflow/v1/HS: fixed second commitment base for credential requests";

/// Element of the scalar field F_n.
#[derive(Clone, Copy, PartialEq, Eq, Default)]
pub struct Scalar(pub(crate) bls12_381::Scalar);

impl Scalar {
    pub const ZERO: Scalar = Scalar(bls12_381::Scalar::zero());
    pub const ONE: Scalar = Scalar(bls12_381::Scalar::one());

    pub fn from_u64(v: u64) -> Self {
        Scalar(bls12_381::Scalar::from(v))
    }

    /// Uniform nonzero scalar.
    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        loop {
            let s = bls12_381::Scalar::random(&mut *rng);
            if !bool::from(s.is_zero()) {
                return Scalar(s);
            }
        }
    }

    /// Reduces 64 uniformly random bytes modulo n.
    pub fn from_bytes_wide(bytes: &[u8; 64]) -> Self {
        Scalar(bls12_381::Scalar::from_bytes_wide(bytes))
    }

    pub fn is_zero(&self) -> bool {
        bool::from(self.0.is_zero())
    }

    pub fn invert(&self) -> Option<Scalar> {
        Option::from(self.0.invert()).map(Scalar)
    }

    pub fn square(&self) -> Scalar {
        Scalar(self.0.square())
    }

    /// Fixed-width big-endian encoding.
    pub fn to_bytes(&self) -> [u8; SCALAR_BYTES] {
        let mut out = self.0.to_bytes();
        out.reverse();
        out
    }

    /// Parses a big-endian encoding, rejecting values that are not below n.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut le: [u8; SCALAR_BYTES] = bytes.try_into().map_err(|_| {
            Error::decode(format!(
                "scalar must be {SCALAR_BYTES} bytes, got {}",
                bytes.len()
            ))
        })?;
        le.reverse();
        Option::from(bls12_381::Scalar::from_bytes(&le))
            .map(Scalar)
            .ok_or_else(|| Error::decode("scalar is not reduced modulo the group order"))
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar(")?;
        for b in self.to_bytes() {
            write!(f, "{b:02x}")?;
        }
        write!(f, ")")
    }
}

impl From<u64> for Scalar {
    fn from(v: u64) -> Self {
        Scalar::from_u64(v)
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 + rhs.0)
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 - rhs.0)
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 * rhs.0)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::ZERO, |acc, s| acc + s)
    }
}

macro_rules! point_type {
    ($(#[$meta:meta])* $name:ident, $proj:ty, $affine:ty, $len:expr, $label:literal) => {
        $(#[$meta])*
        #[derive(Clone, Copy, PartialEq, Eq)]
        pub struct $name(pub(crate) $proj);

        impl $name {
            pub fn identity() -> Self {
                $name(<$proj>::identity())
            }

            pub fn generator() -> Self {
                $name(<$proj>::generator())
            }

            pub fn is_identity(&self) -> bool {
                bool::from(self.0.is_identity())
            }

            pub fn double(&self) -> Self {
                $name(self.0.double())
            }

            /// Compressed encoding.
            pub fn to_bytes(&self) -> [u8; $len] {
                self.0.to_affine().to_compressed()
            }

            /// Parses a compressed encoding; the point must be on the curve and in
            /// the prime-order subgroup.
            pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
                let arr: [u8; $len] = bytes.try_into().map_err(|_| {
                    Error::decode(format!(
                        concat!($label, " point must be {} bytes, got {}"),
                        $len,
                        bytes.len()
                    ))
                })?;
                Option::<$affine>::from(<$affine>::from_compressed(&arr))
                    .map(|p| $name(p.into()))
                    .ok_or_else(|| Error::decode(concat!("invalid ", $label, " point encoding")))
            }

            pub(crate) fn affine(&self) -> $affine {
                self.0.to_affine()
            }
        }

        impl Default for $name {
            fn default() -> Self {
                $name::identity()
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!(stringify!($name), "({})"), encode_b64(&self.to_bytes()))
            }
        }

        impl Add for $name {
            type Output = $name;
            fn add(self, rhs: $name) -> $name {
                $name(self.0 + rhs.0)
            }
        }

        impl AddAssign for $name {
            fn add_assign(&mut self, rhs: $name) {
                self.0 += rhs.0;
            }
        }

        impl Sub for $name {
            type Output = $name;
            fn sub(self, rhs: $name) -> $name {
                $name(self.0 - rhs.0)
            }
        }

        impl SubAssign for $name {
            fn sub_assign(&mut self, rhs: $name) {
                self.0 -= rhs.0;
            }
        }

        impl Neg for $name {
            type Output = $name;
            fn neg(self) -> $name {
                $name(-self.0)
            }
        }

        impl Mul<Scalar> for $name {
            type Output = $name;
            fn mul(self, rhs: Scalar) -> $name {
                $name(self.0 * rhs.0)
            }
        }

        impl Mul<$name> for Scalar {
            type Output = $name;
            fn mul(self, rhs: $name) -> $name {
                $name(rhs.0 * self.0)
            }
        }

        impl Sum for $name {
            fn sum<I: Iterator<Item = $name>>(iter: I) -> $name {
                iter.fold($name::identity(), |acc, p| acc + p)
            }
        }

        impl<'a> Sum<&'a $name> for $name {
            fn sum<I: Iterator<Item = &'a $name>>(iter: I) -> $name {
                iter.fold($name::identity(), |acc, p| acc + *p)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(&encode_b64(&self.to_bytes()))
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                let text = String::deserialize(d)?;
                let bytes = decode_b64(&text).map_err(serde::de::Error::custom)?;
                $name::from_bytes(&bytes).map_err(serde::de::Error::custom)
            }
        }
    };
}

point_type!(
    /// Point of E, the G1 group: signatures, identities, commitments, fingerprints.
    PointG1, G1Projective, G1Affine, G1_BYTES, "G1"
);
point_type!(
    /// Point of the twisted curve E', the G2 group: public keys, verifiers, issuer keys.
    PointG2, G2Projective, G2Affine, G2_BYTES, "G2"
);

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&encode_b64(&self.to_bytes()))
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        let bytes = decode_b64(&text).map_err(serde::de::Error::custom)?;
        Scalar::from_bytes(&bytes).map_err(serde::de::Error::custom)
    }
}

/// Element of the order-n subgroup of F_{p^12}, written multiplicatively.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct GtElement(pub(crate) Gt);

impl GtElement {
    pub fn identity() -> Self {
        GtElement(Gt::identity())
    }

    pub fn is_identity(&self) -> bool {
        bool::from(self.0.is_identity())
    }

    pub fn pow(&self, exp: Scalar) -> Self {
        GtElement(self.0 * exp.0)
    }
}

// the curve library writes G_T additively
impl Mul for GtElement {
    type Output = GtElement;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, rhs: GtElement) -> GtElement {
        GtElement(self.0 + rhs.0)
    }
}

/// Base64url (no padding) text form used in every JSON record.
pub fn encode_b64(bytes: &[u8]) -> String {
    URL_SAFE_NO_PAD.encode(bytes)
}

pub fn decode_b64(text: &str) -> Result<Vec<u8>> {
    URL_SAFE_NO_PAD
        .decode(text)
        .map_err(|e| Error::decode(format!("bad base64url: {e}")))
}

/// Uniform nonzero scalar from the operating system entropy source.
pub fn random_scalar() -> Scalar {
    Scalar::random(&mut OsRng)
}

/// ChaCha20 generator seeded from the operating system entropy source.
pub fn entropy_rng() -> ChaCha20Rng {
    ChaCha20Rng::from_entropy()
}

/// Reproducible generator for tests and `--seed` runs. Never use for real keys.
pub fn deterministic_rng(seed: u64) -> ChaCha20Rng {
    ChaCha20Rng::seed_from_u64(seed)
}

/// Hashes a non-empty message to a point of G1 (hash_to_curve, random-oracle variant).
pub fn hash_to_point_g1(message: &[u8]) -> Result<PointG1> {
    if message.is_empty() {
        return Err(Error::invalid("cannot hash an empty message to a point"));
    }
    Ok(PointG1(
        <G1Projective as HashToCurve<ExpandMsgXmd<sha2::Sha256>>>::hash_to_curve(
            message,
            HASH_TO_G1_DST,
        ),
    ))
}

/// Hashes a non-empty message to a point of G2.
pub fn hash_to_point_g2(message: &[u8]) -> Result<PointG2> {
    if message.is_empty() {
        return Err(Error::invalid("cannot hash an empty message to a point"));
    }
    Ok(PointG2(
        <G2Projective as HashToCurve<ExpandMsgXmd<sha2::Sha256>>>::hash_to_curve(
            message,
            HASH_TO_G2_DST,
        ),
    ))
}

/// The fixed commitment base HS, a hash of a public seed string.
pub fn generator_hs() -> PointG1 {
    static HS: OnceLock<PointG1> = OnceLock::new();
    *HS.get_or_init(|| hash_to_point_g1(HS_SEED).expect("seed is non-empty"))
}

/// Optimal ate pairing e: E' x E -> G_T.
pub fn pairing(p: &PointG2, q: &PointG1) -> GtElement {
    GtElement(bls12_381::pairing(&q.affine(), &p.affine()))
}

/// Checks `prod e(p_i, q_i) == 1` with a single shared final exponentiation.
pub fn pairing_product_is_identity(terms: &[(PointG2, PointG1)]) -> bool {
    let prepared: Vec<(G1Affine, G2Prepared)> = terms
        .iter()
        .map(|(p, q)| (q.affine(), G2Prepared::from(p.affine())))
        .collect();
    let refs: Vec<(&G1Affine, &G2Prepared)> = prepared.iter().map(|(a, b)| (a, b)).collect();
    bool::from(
        bls12_381::multi_miller_loop(&refs)
            .final_exponentiation()
            .is_identity(),
    )
}

/// Checks `e(p1, q1) == e(p2, q2)`.
pub fn pairings_equal(p1: &PointG2, q1: &PointG1, p2: &PointG2, q2: &PointG1) -> bool {
    pairing_product_is_identity(&[(*p1, *q1), (*p2, -*q2)])
}

/// Fiat-Shamir challenge: SHA-512 over the length-prefixed domain tag and
/// length-prefixed elements, in order, reduced modulo n.
pub fn challenge_hash(domain_tag: &[u8], elements: &[&[u8]]) -> Result<Scalar> {
    if elements.is_empty() {
        return Err(Error::invalid("challenge needs at least one element"));
    }
    let mut hasher = Sha512::new();
    hasher.update((domain_tag.len() as u64).to_be_bytes());
    hasher.update(domain_tag);
    for el in elements {
        hasher.update((el.len() as u64).to_be_bytes());
        hasher.update(el);
    }
    let mut wide = [0u8; 64];
    wide.copy_from_slice(&hasher.finalize());
    Ok(Scalar::from_bytes_wide(&wide))
}
