//! Blind credential issuance and unlinkable showing.
//!
//! The flow, for one participant and one or more issuers:
//!
//! 1. [`issuer_keygen`] gives the issuer `(x, y)` and the public `(alpha, beta) = (x·G2, y·G2)`.
//! 2. The participant picks a credential key `ck` ([`credential_keygen`]) and sends a
//!    [`CredentialRequest`] built by [`prepare_blind_sign`]: a commitment
//!    `c = r·G1 + h·HS` to the attribute digest `h`, an El-Gamal style pair
//!    `(k·G1, k·gamma + h·c)` and the proof `pi_s`.
//! 3. The issuer checks `pi_s` and answers with `(c, y·a, x·c + y·b)` ([`blind_sign`]).
//! 4. The participant strips the blinding with `ck` ([`unblind`]) which leaves
//!    `s = (x + y·h)·c`.
//! 5. For every session identity `U`, [`prove_cred_uid`] re-randomizes the
//!    credential and emits the showing `theta` plus the fingerprint `zeta = h·U`;
//!    [`verify_credential`] checks both against the issuer key.
//!
//! Credentials from several issuers over the same request aggregate by summing
//! `s`, and verify against the summed issuer keys.

use rand_core::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{
    challenge_hash, generator_hs, hash_to_point_g2, pairings_equal, PointG1, PointG2, Scalar,
};

pub const PI_S_DOMAIN: &[u8] = b"reflow/v1/pi_s";
pub const PI_V_DOMAIN: &[u8] = b"reflow/v1/pi_v";
pub const ATTRIBUTE_DOMAIN: &[u8] = b"reflow/v1/attribute-digest";

/// Issuer signing key `(x, y)` together with its verification key.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "IssuerSecretRecord", into = "IssuerSecretRecord")]
pub struct IssuerKeypair {
    pub x: Scalar,
    pub y: Scalar,
    pub alpha: PointG2,
    pub beta: PointG2,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IssuerSecretRecord {
    x: Scalar,
    y: Scalar,
}

impl From<IssuerSecretRecord> for IssuerKeypair {
    fn from(r: IssuerSecretRecord) -> Self {
        IssuerKeypair::from_secrets(r.x, r.y)
    }
}

impl From<IssuerKeypair> for IssuerSecretRecord {
    fn from(k: IssuerKeypair) -> Self {
        IssuerSecretRecord { x: k.x, y: k.y }
    }
}

impl IssuerKeypair {
    pub fn from_secrets(x: Scalar, y: Scalar) -> Self {
        IssuerKeypair {
            x,
            y,
            alpha: PointG2::generator() * x,
            beta: PointG2::generator() * y,
        }
    }

    pub fn public_key(&self) -> IssuerPublicKey {
        IssuerPublicKey {
            alpha: self.alpha,
            beta: self.beta,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IssuerPublicKey {
    pub alpha: PointG2,
    pub beta: PointG2,
}

/// The participant's secret attribute `ck` with its derived values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Scalar", into = "Scalar")]
pub struct CredentialSecret {
    pub ck: Scalar,
    pub gamma: PointG1,
    pub h: Scalar,
}

impl From<Scalar> for CredentialSecret {
    fn from(ck: Scalar) -> Self {
        CredentialSecret::from_key(ck)
    }
}

impl From<CredentialSecret> for Scalar {
    fn from(cs: CredentialSecret) -> Self {
        cs.ck
    }
}

impl CredentialSecret {
    pub fn from_key(ck: Scalar) -> Self {
        CredentialSecret {
            ck,
            gamma: PointG1::generator() * ck,
            h: attribute_digest(&ck),
        }
    }
}

/// Hash digest `h` of the secret attribute.
pub fn attribute_digest(ck: &Scalar) -> Scalar {
    challenge_hash(ATTRIBUTE_DOMAIN, &[&ck.to_bytes()]).expect("one element")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElGamalPair {
    pub a: PointG1,
    pub b: PointG1,
}

/// Proof that the request commitment and El-Gamal pair are well formed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProofPiS {
    #[serde(rename = "c")]
    pub c_h: Scalar,
    #[serde(rename = "rm")]
    pub r_h: Scalar,
    #[serde(rename = "rk")]
    pub r_k: Scalar,
    #[serde(rename = "rr")]
    pub r_r: Scalar,
}

/// The request `lambda`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CredentialRequest {
    pub c: PointG1,
    pub s_h: ElGamalPair,
    pub gamma: PointG1,
    pub pi_s: ProofPiS,
}

/// Every random value consumed while building a request. Exposed so that a
/// request can be rebuilt from known values in tests and vectors.
#[derive(Clone, Copy, Debug)]
pub struct RequestNonces {
    pub r: Scalar,
    pub k: Scalar,
    pub w_h: Scalar,
    pub w_k: Scalar,
    pub w_r: Scalar,
}

impl RequestNonces {
    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        RequestNonces {
            r: Scalar::random(rng),
            k: Scalar::random(rng),
            w_h: Scalar::random(rng),
            w_k: Scalar::random(rng),
            w_r: Scalar::random(rng),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlindedCredential {
    pub c: PointG1,
    pub a_tilde: PointG1,
    pub b_tilde: PointG1,
}

/// Unblinded credential `(c, s)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Credential {
    pub c: PointG1,
    pub s: PointG1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProofPiV {
    #[serde(rename = "c")]
    pub c_h: Scalar,
    #[serde(rename = "rm")]
    pub r_h: Scalar,
    #[serde(rename = "rr")]
    pub r_r: Scalar,
}

/// Re-randomized credential `(c', s')`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomizedCredential {
    #[serde(rename = "h_prime")]
    pub c_prime: PointG1,
    pub s_prime: PointG1,
}

/// The showing `theta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CredentialProof {
    pub kappa: PointG2,
    pub nu: PointG1,
    pub pi_v: ProofPiV,
    pub sigma_prime: RandomizedCredential,
}

/// Per-session fingerprint `zeta = h·U`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fingerprint {
    pub zeta: PointG1,
}

#[derive(Clone, Copy, Debug)]
pub struct ShowingNonces {
    pub r: Scalar,
    pub r_prime: Scalar,
    pub w_h: Scalar,
    pub w_r: Scalar,
}

impl ShowingNonces {
    pub fn random<R: RngCore + CryptoRng>(rng: &mut R) -> Self {
        ShowingNonces {
            r: Scalar::random(rng),
            r_prime: Scalar::random(rng),
            w_h: Scalar::random(rng),
            w_r: Scalar::random(rng),
        }
    }
}

pub fn issuer_keygen<R: RngCore + CryptoRng>(rng: &mut R) -> IssuerKeypair {
    let x = Scalar::random(rng);
    let y = Scalar::random(rng);
    IssuerKeypair::from_secrets(x, y)
}

pub fn credential_keygen<R: RngCore + CryptoRng>(rng: &mut R) -> CredentialSecret {
    CredentialSecret::from_key(Scalar::random(rng))
}

fn pi_s_challenge(c: &PointG1, a_w: &PointG1, b_w: &PointG1, c_w: &PointG1) -> Scalar {
    challenge_hash(
        PI_S_DOMAIN,
        &[&c.to_bytes(), &a_w.to_bytes(), &b_w.to_bytes(), &c_w.to_bytes()],
    )
    .expect("non-empty element list")
}

fn pi_v_challenge(
    alpha: &PointG2,
    beta: &PointG2,
    a_w: &PointG2,
    b_w: &PointG1,
    c_w: &PointG1,
) -> Scalar {
    challenge_hash(
        PI_V_DOMAIN,
        &[
            &alpha.to_bytes(),
            &beta.to_bytes(),
            &a_w.to_bytes(),
            &b_w.to_bytes(),
            &c_w.to_bytes(),
        ],
    )
    .expect("non-empty element list")
}

pub fn prepare_blind_sign<R: RngCore + CryptoRng>(
    cs: &CredentialSecret,
    rng: &mut R,
) -> CredentialRequest {
    prepare_blind_sign_with(cs, &RequestNonces::random(rng))
}

/// Deterministic request construction from explicit nonces.
pub fn prepare_blind_sign_with(cs: &CredentialSecret, n: &RequestNonces) -> CredentialRequest {
    let g1 = PointG1::generator();
    let hs = generator_hs();
    let h = cs.h;

    let c = g1 * n.r + hs * h;
    let a = g1 * n.k;
    let b = cs.gamma * n.k + c * h;

    let a_w = g1 * n.w_k;
    let b_w = cs.gamma * n.w_k + c * n.w_h;
    let c_w = g1 * n.w_r + hs * n.w_h;
    let c_h = pi_s_challenge(&c, &a_w, &b_w, &c_w);

    CredentialRequest {
        c,
        s_h: ElGamalPair { a, b },
        gamma: cs.gamma,
        pi_s: ProofPiS {
            c_h,
            r_h: n.w_h - c_h * h,
            r_k: n.w_k - c_h * n.k,
            r_r: n.w_r - c_h * n.r,
        },
    }
}

/// Rebuilds the three commitments of `pi_s` and checks that they hash back to
/// the challenge.
pub fn verify_pi_s(req: &CredentialRequest) -> bool {
    let g1 = PointG1::generator();
    let hs = generator_hs();
    let p = &req.pi_s;
    let ElGamalPair { a, b } = req.s_h;

    let a_w = a * p.c_h + g1 * p.r_k;
    let b_w = b * p.c_h + req.gamma * p.r_k + req.c * p.r_h;
    let c_w = req.c * p.c_h + g1 * p.r_r + hs * p.r_h;
    pi_s_challenge(&req.c, &a_w, &b_w, &c_w) == p.c_h
}

pub fn blind_sign(ik: &IssuerKeypair, req: &CredentialRequest) -> Result<BlindedCredential> {
    if !verify_pi_s(req) {
        return Err(Error::RequestProofRejected);
    }
    Ok(BlindedCredential {
        c: req.c,
        a_tilde: req.s_h.a * ik.y,
        b_tilde: req.c * ik.x + req.s_h.b * ik.y,
    })
}

/// `s = b_tilde - ck·a_tilde`.
pub fn unblind(bc: &BlindedCredential, cs: &CredentialSecret) -> Credential {
    Credential {
        c: bc.c,
        s: bc.b_tilde - bc.a_tilde * cs.ck,
    }
}

pub fn aggregate_issuer_keys(keys: &[IssuerPublicKey]) -> Result<IssuerPublicKey> {
    if keys.is_empty() {
        return Err(Error::invalid("no issuer keys to aggregate"));
    }
    Ok(IssuerPublicKey {
        alpha: keys.iter().map(|k| k.alpha).sum(),
        beta: keys.iter().map(|k| k.beta).sum(),
    })
}

pub fn aggregate_credentials(creds: &[Credential]) -> Result<Credential> {
    let first = creds
        .first()
        .ok_or_else(|| Error::invalid("no credentials to aggregate"))?;
    if creds.iter().any(|cr| cr.c != first.c) {
        return Err(Error::invalid(
            "credentials were issued over different commitments",
        ));
    }
    Ok(Credential {
        c: first.c,
        s: creds.iter().map(|cr| cr.s).sum(),
    })
}

pub fn prove_cred_uid<R: RngCore + CryptoRng>(
    cred: &Credential,
    cs: &CredentialSecret,
    vk: &IssuerPublicKey,
    uid: &PointG1,
    rng: &mut R,
) -> Result<(CredentialProof, Fingerprint)> {
    prove_cred_uid_with(cred, cs, vk, uid, &ShowingNonces::random(rng))
}

/// Deterministic showing from explicit nonces.
pub fn prove_cred_uid_with(
    cred: &Credential,
    cs: &CredentialSecret,
    vk: &IssuerPublicKey,
    uid: &PointG1,
    n: &ShowingNonces,
) -> Result<(CredentialProof, Fingerprint)> {
    if uid.is_identity() {
        return Err(Error::invalid("session identity is the point at infinity"));
    }
    let g2 = PointG2::generator();
    let h = cs.h;

    let c_prime = cred.c * n.r_prime;
    let s_prime = cred.s * n.r_prime;
    let kappa = vk.alpha + vk.beta * h + g2 * n.r;
    let nu = c_prime * n.r;

    let a_w = vk.alpha + vk.beta * n.w_h + g2 * n.w_r;
    let b_w = c_prime * n.w_r;
    let c_w = *uid * n.w_h;
    let c_h = pi_v_challenge(&vk.alpha, &vk.beta, &a_w, &b_w, &c_w);

    let proof = CredentialProof {
        kappa,
        nu,
        pi_v: ProofPiV {
            c_h,
            r_h: n.w_h - h * c_h,
            r_r: n.w_r - n.r * c_h,
        },
        sigma_prime: RandomizedCredential { c_prime, s_prime },
    };
    Ok((proof, Fingerprint { zeta: *uid * h }))
}

/// Checks a showing: the `pi_v` challenge rebuilds, `c'` is not the point at
/// infinity, and `e(kappa, c') == e(G2, s' + nu)`.
pub fn verify_credential(
    vk: &IssuerPublicKey,
    theta: &CredentialProof,
    zeta: &Fingerprint,
    uid: &PointG1,
) -> bool {
    let c_prime = theta.sigma_prime.c_prime;
    if c_prime.is_identity() || uid.is_identity() {
        return false;
    }
    let g2 = PointG2::generator();
    let p = &theta.pi_v;

    let a_w = theta.kappa * p.c_h + g2 * p.r_r + vk.alpha * (Scalar::ONE - p.c_h) + vk.beta * p.r_h;
    let b_w = c_prime * p.r_r + theta.nu * p.c_h;
    let c_w = *uid * p.r_h + zeta.zeta * p.c_h;
    if pi_v_challenge(&vk.alpha, &vk.beta, &a_w, &b_w, &c_w) != p.c_h {
        return false;
    }
    pairings_equal(
        &theta.kappa,
        &c_prime,
        &g2,
        &(theta.sigma_prime.s_prime + theta.nu),
    )
}

/// Proof-of-possession side channel: signs an issuer-chosen nonce with the
/// credential key. The signature lives in G2 since `gamma` lives in G1.
pub fn pop_sign(cs: &CredentialSecret, nonce: &[u8]) -> Result<PointG2> {
    Ok(hash_to_point_g2(nonce)? * cs.ck)
}

pub fn pop_verify(gamma: &PointG1, nonce: &[u8], signature: &PointG2) -> Result<bool> {
    let h = hash_to_point_g2(nonce)?;
    Ok(pairings_equal(signature, &PointG1::generator(), &h, gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{deterministic_rng, hash_to_point_g1};

    fn issue(seed: u64) -> (IssuerKeypair, CredentialSecret, CredentialRequest, Credential) {
        let mut rng = deterministic_rng(seed);
        let ik = issuer_keygen(&mut rng);
        let cs = credential_keygen(&mut rng);
        let req = prepare_blind_sign(&cs, &mut rng);
        let cred = unblind(&blind_sign(&ik, &req).unwrap(), &cs);
        (ik, cs, req, cred)
    }

    #[test]
    fn honest_request_verifies() {
        let (_, _, req, _) = issue(10);
        assert!(verify_pi_s(&req));
    }

    #[test]
    fn tampered_response_is_rejected() {
        let (ik, _, req, _) = issue(11);
        let mut bad = req;
        bad.pi_s.r_k = bad.pi_s.r_k + Scalar::ONE;
        assert!(!verify_pi_s(&bad));
        assert_eq!(blind_sign(&ik, &bad), Err(Error::RequestProofRejected));
    }

    #[test]
    fn swapped_pair_is_rejected() {
        let (_, _, req, _) = issue(12);
        let mut bad = req;
        std::mem::swap(&mut bad.s_h.a, &mut bad.s_h.b);
        assert!(!verify_pi_s(&bad));
    }

    #[test]
    fn unblinded_credential_matches_issuer_secrets() {
        let (ik, cs, _, cred) = issue(13);
        assert_eq!(cred.s, cred.c * (ik.x + ik.y * cs.h));
    }

    #[test]
    fn showing_verifies_and_fingerprint_is_stable() {
        let (ik, cs, _, cred) = issue(14);
        let mut rng = deterministic_rng(99);
        let uid = hash_to_point_g1(b"session").unwrap();
        let vk = ik.public_key();
        let (t1, z1) = prove_cred_uid(&cred, &cs, &vk, &uid, &mut rng).unwrap();
        let (t2, z2) = prove_cred_uid(&cred, &cs, &vk, &uid, &mut rng).unwrap();
        assert!(verify_credential(&vk, &t1, &z1, &uid));
        assert!(verify_credential(&vk, &t2, &z2, &uid));
        assert_eq!(z1, z2);
        assert_ne!(t1, t2);
    }

    #[test]
    fn showing_rejects_point_at_infinity() {
        let (ik, cs, _, cred) = issue(15);
        let vk = ik.public_key();
        let uid = hash_to_point_g1(b"s").unwrap();
        let mut rng = deterministic_rng(3);
        let (mut theta, zeta) = prove_cred_uid(&cred, &cs, &vk, &uid, &mut rng).unwrap();
        theta.sigma_prime.c_prime = PointG1::identity();
        assert!(!verify_credential(&vk, &theta, &zeta, &uid));
        assert!(prove_cred_uid(&cred, &cs, &vk, &PointG1::identity(), &mut rng).is_err());
    }

    #[test]
    fn wrong_ck_unblinds_to_useless_credential() {
        let (ik, cs, req, _) = issue(16);
        let mut rng = deterministic_rng(4);
        let other = credential_keygen(&mut rng);
        let bc = blind_sign(&ik, &req).unwrap();
        let bad = unblind(&bc, &other);
        let uid = hash_to_point_g1(b"s").unwrap();
        let (theta, zeta) = prove_cred_uid(&bad, &cs, &ik.public_key(), &uid, &mut rng).unwrap();
        assert!(!verify_credential(&ik.public_key(), &theta, &zeta, &uid));
    }

    #[test]
    fn aggregation_preconditions() {
        assert!(aggregate_issuer_keys(&[]).is_err());
        assert!(aggregate_credentials(&[]).is_err());
        let (_, _, _, c1) = issue(17);
        let (_, _, _, c2) = issue(18);
        assert!(matches!(
            aggregate_credentials(&[c1, c2]),
            Err(Error::InvalidInput(_))
        ));
        assert_eq!(aggregate_credentials(&[c1]).unwrap(), c1);
    }

    #[test]
    fn proof_of_possession_hook() {
        let mut rng = deterministic_rng(5);
        let cs = credential_keygen(&mut rng);
        let sig = pop_sign(&cs, b"nonce-1").unwrap();
        assert!(pop_verify(&cs.gamma, b"nonce-1", &sig).unwrap());
        assert!(!pop_verify(&cs.gamma, b"nonce-2", &sig).unwrap());
        let other = credential_keygen(&mut rng);
        assert!(!pop_verify(&other.gamma, b"nonce-1", &sig).unwrap());
    }

    #[test]
    fn secret_records_carry_only_scalars() {
        let (ik, cs, _, _) = issue(19);
        let ik_json = serde_json::to_value(&ik).unwrap();
        assert_eq!(ik_json.as_object().unwrap().len(), 2);
        let back: IssuerKeypair = serde_json::from_value(ik_json).unwrap();
        assert_eq!(back, ik);
        let cs_json = serde_json::to_value(&cs).unwrap();
        assert!(cs_json.is_string());
        assert_eq!(serde_json::from_value::<CredentialSecret>(cs_json).unwrap(), cs);
    }
}
