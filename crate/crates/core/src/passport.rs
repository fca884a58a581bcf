//! Material passports and identity-sum track and trace.
//!
//! A passport is a signed seal over an object's identity, together with the
//! agent's credential showing. A node derived from earlier nodes takes as its
//! identity the sum of its parents' seal identities plus the identity of its own
//! content document, so recomputing that sum one level up is enough to detect a
//! wrong or missing parent. [`Genealogy`] repeats the check down to a chosen depth.

use std::collections::BTreeMap;

use rand_core::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};

use crate::bls::public_key;
use crate::credential::{
    verify_credential, Credential, CredentialProof, CredentialSecret, Fingerprint, IssuerPublicKey,
};
use crate::document::CanonicalDocument;
use crate::error::{Error, Result};
use crate::group::{PointG1, Scalar};
use crate::seal::{add_signature, create_seal_with_identity, sign_seal, verify_seal, Seal};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialPassport {
    pub proof: CredentialProof,
    pub seal: Seal,
    pub zeta: Fingerprint,
}

pub fn reflow_identity(doc: &CanonicalDocument) -> PointG1 {
    doc.identity()
}

pub fn create_material_passport<R: RngCore + CryptoRng>(
    sk: &Scalar,
    cred: &Credential,
    cs: &CredentialSecret,
    vk: &IssuerPublicKey,
    doc: &CanonicalDocument,
    rng: &mut R,
) -> Result<MaterialPassport> {
    create_material_passport_for_identity(sk, cred, cs, vk, reflow_identity(doc), rng)
}

/// Single-agent passport over an explicit identity point, e.g. one produced by
/// [`derive_child_identity`].
pub fn create_material_passport_for_identity<R: RngCore + CryptoRng>(
    sk: &Scalar,
    cred: &Credential,
    cs: &CredentialSecret,
    vk: &IssuerPublicKey,
    identity: PointG1,
    rng: &mut R,
) -> Result<MaterialPassport> {
    let seal = create_seal_with_identity(&[public_key(sk)], identity, rng)?;
    let sig = sign_seal(sk, cred, cs, vk, &seal, rng)?;
    let seal = add_signature(&seal, vk, &sig, true)?;
    if !verify_seal(&seal) {
        return Err(Error::SealNotVerified);
    }
    Ok(MaterialPassport {
        proof: sig.proof,
        seal,
        zeta: sig.zeta,
    })
}

/// Signature and credential checks against an expected identity.
fn passport_signs(identity: &PointG1, vk: &IssuerPublicKey, mp: &MaterialPassport) -> bool {
    mp.seal.identity == *identity
        && verify_seal(&mp.seal)
        && verify_credential(vk, &mp.proof, &mp.zeta, &mp.seal.identity)
}

pub fn verify_material_passport(
    doc: &CanonicalDocument,
    vk: &IssuerPublicKey,
    mp: &MaterialPassport,
) -> bool {
    passport_signs(&reflow_identity(doc), vk, mp)
}

pub fn aggregate_seal_identities(seals: &[Seal]) -> Result<PointG1> {
    if seals.is_empty() {
        return Err(Error::invalid("no seals to aggregate"));
    }
    Ok(seals.iter().map(|s| s.identity).sum())
}

/// Identity of a node with the given parents and own content.
pub fn derive_child_identity(parents: &[Seal], own: &CanonicalDocument) -> Result<PointG1> {
    Ok(aggregate_seal_identities(parents)? + reflow_identity(own))
}

/// One-level check: the child's identity is the parent sum plus its own content
/// identity, and the child passport is validly signed over it.
pub fn verify_track_and_trace(
    parent_seals: &[Seal],
    child: &MaterialPassport,
    child_doc_extra: &CanonicalDocument,
    vk: &IssuerPublicKey,
) -> Result<bool> {
    let expected = derive_child_identity(parent_seals, child_doc_extra)?;
    Ok(passport_signs(&expected, vk, child))
}

#[derive(Clone, Debug)]
pub struct TraceNode {
    pub document: CanonicalDocument,
    pub parents: Vec<String>,
    pub passport: MaterialPassport,
}

/// A provenance graph of passports. Parents must be inserted before children,
/// which keeps the graph acyclic.
#[derive(Clone, Debug, Default)]
pub struct Genealogy {
    nodes: BTreeMap<String, TraceNode>,
}

impl Genealogy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, node: TraceNode) -> Result<()> {
        let id = id.into();
        if self.nodes.contains_key(&id) {
            return Err(Error::invalid(format!("node {id} already present")));
        }
        if let Some(missing) = node.parents.iter().find(|p| !self.nodes.contains_key(*p)) {
            return Err(Error::invalid(format!("unknown parent {missing}")));
        }
        self.nodes.insert(id, node);
        Ok(())
    }

    pub fn get(&self, id: &str) -> Option<&TraceNode> {
        self.nodes.get(id)
    }

    pub fn get_mut(&mut self, id: &str) -> Option<&mut TraceNode> {
        self.nodes.get_mut(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.nodes.keys().map(String::as_str)
    }

    pub fn parent_seals(&self, id: &str) -> Result<Vec<Seal>> {
        let node = self.node(id)?;
        node.parents
            .iter()
            .map(|p| self.node(p).map(|n| n.passport.seal.clone()))
            .collect()
    }

    fn node(&self, id: &str) -> Result<&TraceNode> {
        self.nodes
            .get(id)
            .ok_or_else(|| Error::invalid(format!("unknown node {id}")))
    }

    /// Verifies `id` one level deep, then its ancestors for `depth` further levels.
    pub fn verify_node(&self, id: &str, vk: &IssuerPublicKey, depth: usize) -> Result<bool> {
        let node = self.node(id)?;
        let local = if node.parents.is_empty() {
            verify_material_passport(&node.document, vk, &node.passport)
        } else {
            verify_track_and_trace(&self.parent_seals(id)?, &node.passport, &node.document, vk)?
        };
        if !local {
            return Ok(false);
        }
        if depth == 0 {
            return Ok(true);
        }
        for parent in &node.parents {
            if !self.verify_node(parent, vk, depth - 1)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
