//! JSON envelopes for files exchanged between participants.
//!
//! Every file is a JSON object holding one named record, e.g.
//! `{"reflow_seal": {...}}`, optionally labelled with an `actor` name and, for
//! files that hold secret scalars, `"secret": true`. Points and scalars inside
//! records are base64url strings of their canonical encodings.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::credential::{CredentialSecret, IssuerKeypair};
use crate::error::{Error, Result};
use crate::group::{PointG1, PointG2, Scalar};

pub const KEYS: &str = "keys";
pub const ISSUER_PUBLIC_KEY: &str = "issuer_public_key";
pub const REFLOW_PUBLIC_KEY: &str = "reflow_public_key";
pub const REFLOW_PUBLIC_KEY_ARRAY: &str = "reflow_public_key_array";
pub const CREDENTIAL_REQUEST: &str = "credential_request";
pub const CREDENTIAL_SIGNATURE: &str = "credential_signature";
pub const CREDENTIALS: &str = "credentials";
pub const REFLOW_SEAL: &str = "reflow_seal";
pub const REFLOW_SEAL_ARRAY: &str = "reflow_seal_array";
pub const REFLOW_SIGNATURE: &str = "reflow_signature";
pub const REFLOW_IDENTITY: &str = "reflow_identity";
pub const MATERIAL_PASSPORT: &str = "material_passport";
pub const SUM_VALUE: &str = "sum_value";
pub const POP_SIGNATURE: &str = "pop_signature";

pub const ACTOR: &str = "actor";
pub const SECRET: &str = "secret";

/// Issuer secret file payload: `{"issuer": {"x": .., "y": ..}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IssuerKeys {
    pub issuer: IssuerKeypair,
}

/// Participant secret file payload: the BLS signing key and the credential key.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParticipantKeys {
    pub reflow: Scalar,
    pub credential: CredentialSecret,
}

/// Answer to a proof-of-possession challenge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopSignature {
    pub nonce: String,
    pub gamma: PointG1,
    pub signature: PointG2,
}

pub fn render_record<T: Serialize>(
    name: &str,
    value: &T,
    actor: Option<&str>,
    secret: bool,
) -> Result<String> {
    let payload =
        serde_json::to_value(value).map_err(|e| Error::decode(format!("{name}: {e}")))?;
    let mut map = Map::new();
    map.insert(name.to_owned(), payload);
    if let Some(actor) = actor {
        map.insert(ACTOR.to_owned(), Value::String(actor.to_owned()));
    }
    if secret {
        map.insert(SECRET.to_owned(), Value::Bool(true));
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(map)).expect("values serialize");
    text.push('\n');
    Ok(text)
}

pub fn parse_record<T: DeserializeOwned>(text: &str, name: &str) -> Result<T> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| Error::decode(format!("not JSON: {e}")))?;
    let mut map = match value {
        Value::Object(map) => map,
        _ => return Err(Error::decode("envelope must be a JSON object")),
    };
    let payload = map
        .remove(name)
        .ok_or_else(|| Error::decode(format!("missing record '{name}'")))?;
    serde_json::from_value(payload).map_err(|e| Error::decode(format!("{name}: {e}")))
}

/// Whether an envelope is labelled as holding secret material.
pub fn is_secret(text: &str) -> bool {
    serde_json::from_str::<Value>(text)
        .ok()
        .and_then(|v| v.get(SECRET).and_then(Value::as_bool))
        .unwrap_or(false)
}

pub fn actor(text: &str) -> Option<String> {
    serde_json::from_str::<Value>(text)
        .ok()
        .and_then(|v| v.get(ACTOR).and_then(Value::as_str).map(str::to_owned))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::credential::issuer_keygen;
    use crate::group::deterministic_rng;

    #[test]
    fn envelope_round_trip_with_labels() {
        let mut rng = deterministic_rng(1);
        let keys = IssuerKeys {
            issuer: issuer_keygen(&mut rng),
        };
        let text = render_record(KEYS, &keys, Some("The Issuer"), true).unwrap();
        assert!(is_secret(&text));
        assert_eq!(actor(&text).as_deref(), Some("The Issuer"));
        let back: IssuerKeys = parse_record(&text, KEYS).unwrap();
        assert_eq!(back, keys);
    }

    #[test]
    fn wrong_record_name_is_a_decode_error() {
        let text = render_record(SUM_VALUE, &PointG1::generator(), None, false).unwrap();
        assert!(!is_secret(&text));
        assert!(matches!(
            parse_record::<PointG1>(&text, REFLOW_IDENTITY),
            Err(Error::Decode(_))
        ));
        assert!(parse_record::<PointG1>("[]", SUM_VALUE).is_err());
        assert!(parse_record::<PointG2>(&text, SUM_VALUE).is_err());
    }

    #[test]
    fn participant_keys_refuse_issuer_shape() {
        let mut rng = deterministic_rng(2);
        let keys = IssuerKeys {
            issuer: issuer_keygen(&mut rng),
        };
        let text = render_record(KEYS, &keys, None, true).unwrap();
        assert!(parse_record::<ParticipantKeys>(&text, KEYS).is_err());
    }
}
