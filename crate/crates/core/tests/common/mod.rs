#![allow(dead_code)]

use rand_chacha::ChaCha20Rng;
use reflow::bls::SigningKeypair;
use reflow::credential::{
    blind_sign, credential_keygen, issuer_keygen, prepare_blind_sign, unblind, Credential,
    CredentialSecret, IssuerKeypair,
};
use reflow::document::CanonicalDocument;
use reflow::group::{deterministic_rng, PointG1, PointG2};
use reflow::passport::{
    create_material_passport, create_material_passport_for_identity, derive_child_identity,
    Genealogy, TraceNode,
};
use reflow::seal::{add_signature, create_seal, sign_seal, Seal};

/// Group order n, big-endian hex.
pub const ORDER_HEX: &str = "73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001";

pub fn rng(seed: u64) -> ChaCha20Rng {
    deterministic_rng(seed)
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn unhex(s: &str) -> Vec<u8> {
    (0..s.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap())
        .collect()
}

/// Bits of n, most significant first.
pub fn order_bits() -> Vec<bool> {
    unhex(ORDER_HEX)
        .iter()
        .flat_map(|b| (0..8).rev().map(move |i| (b >> i) & 1 == 1))
        .collect()
}

/// Double-and-add driven only by the group law, independent of the library's
/// scalar multiplication.
pub fn mul_by_bits<T: Copy>(p: T, identity: T, add: impl Fn(T, T) -> T, bits: &[bool]) -> T {
    let mut acc = identity;
    for &bit in bits {
        acc = add(acc, acc);
        if bit {
            acc = add(acc, p);
        }
    }
    acc
}

pub fn repeat_g1(p: PointG1, k: u64) -> PointG1 {
    (0..k).fold(PointG1::identity(), |acc, _| acc + p)
}

pub fn repeat_g2(p: PointG2, k: u64) -> PointG2 {
    (0..k).fold(PointG2::identity(), |acc, _| acc + p)
}

pub struct Participant {
    pub kp: SigningKeypair,
    pub cs: CredentialSecret,
    pub cred: Credential,
}

pub fn issue(ik: &IssuerKeypair, rng: &mut ChaCha20Rng) -> Participant {
    let kp = SigningKeypair::generate(rng);
    let cs = credential_keygen(rng);
    let req = prepare_blind_sign(&cs, rng);
    let cred = unblind(&blind_sign(ik, &req).unwrap(), &cs);
    Participant { kp, cs, cred }
}

pub fn setup(n: usize, seed: u64) -> (IssuerKeypair, Vec<Participant>, ChaCha20Rng) {
    let mut rng = rng(seed);
    let ik = issuer_keygen(&mut rng);
    let people = (0..n).map(|_| issue(&ik, &mut rng)).collect();
    (ik, people, rng)
}

/// Fresh seal for all participants plus one signature from each.
pub fn session(
    ik: &IssuerKeypair,
    people: &[Participant],
    message: &[u8],
    rng: &mut ChaCha20Rng,
) -> (Seal, Vec<reflow::seal::ReflowSignature>) {
    let vk = ik.public_key();
    let pks: Vec<PointG2> = people.iter().map(|p| p.kp.pk).collect();
    let seal = create_seal(&pks, message, rng).unwrap();
    let sigs = people
        .iter()
        .map(|p| sign_seal(&p.kp.sk, &p.cred, &p.cs, &vk, &seal, rng).unwrap())
        .collect();
    (seal, sigs)
}

pub fn fold(seal: &Seal, ik: &IssuerKeypair, sigs: &[&reflow::seal::ReflowSignature]) -> Seal {
    let vk = ik.public_key();
    sigs.iter()
        .fold(seal.clone(), |s, sig| add_signature(&s, &vk, sig, true).unwrap())
}

pub fn doc(pairs: &[(&str, &str)]) -> CanonicalDocument {
    CanonicalDocument::from_pairs(pairs.iter().map(|(k, v)| (*k, *v))).unwrap()
}

/// Node ids of the 7-node fixture, leaves first.
pub const GRAPH_NODES: [&str; 7] = ["L1", "L2", "L3", "L4", "M1", "M2", "R"];

pub fn graph_parents(id: &str) -> &'static [&'static str] {
    match id {
        "M1" => &["L1", "L2"],
        "M2" => &["L3", "L4"],
        "R" => &["M1", "M2"],
        _ => &[],
    }
}

/// The node itself and everything derived from it.
pub fn graph_downstream(id: &str) -> Vec<&'static str> {
    GRAPH_NODES
        .iter()
        .copied()
        .filter(|n| *n == id || is_ancestor(id, n))
        .collect()
}

fn is_ancestor(a: &str, n: &str) -> bool {
    graph_parents(n).iter().any(|p| *p == a || is_ancestor(a, p))
}

/// Three-level provenance graph: four leaf passports, two processes with two
/// parents each, one resource combining both processes. Each node is signed by
/// a different agent of the same issuer.
pub fn build_graph(ik: &IssuerKeypair, agents: &[Participant], rng: &mut ChaCha20Rng) -> Genealogy {
    let vk = ik.public_key();
    let mut g = Genealogy::new();
    for (i, id) in GRAPH_NODES.iter().enumerate() {
        let agent = &agents[i % agents.len()];
        let parents = graph_parents(id);
        let document = doc(&[("node", id), ("kind", if parents.is_empty() { "event" } else { "process" })]);
        let passport = if parents.is_empty() {
            create_material_passport(&agent.kp.sk, &agent.cred, &agent.cs, &vk, &document, rng).unwrap()
        } else {
            let seals: Vec<Seal> = parents
                .iter()
                .map(|p| g.get(p).unwrap().passport.seal.clone())
                .collect();
            let identity = derive_child_identity(&seals, &document).unwrap();
            create_material_passport_for_identity(
                &agent.kp.sk,
                &agent.cred,
                &agent.cs,
                &vk,
                identity,
                rng,
            )
            .unwrap()
        };
        g.insert(
            *id,
            TraceNode {
                document,
                parents: parents.iter().map(|p| p.to_string()).collect(),
                passport,
            },
        )
        .unwrap();
    }
    g
}
