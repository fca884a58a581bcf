//! Canonical byte form of JSON "string dictionaries".
//!
//! Keys are sorted by their UTF-8 bytes at every nesting level, no whitespace is
//! emitted, strings use JSON escaping and numbers keep the textual form they were
//! parsed with. Two documents that differ only in key order or formatting share
//! one canonical form, and therefore one identity point.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::group::{hash_to_point_g1, PointG1};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Map<String, Value>", into = "Map<String, Value>")]
pub struct CanonicalDocument(Map<String, Value>);

impl CanonicalDocument {
    pub fn new(map: Map<String, Value>) -> Result<Self> {
        if map.is_empty() {
            return Err(Error::invalid("document is empty"));
        }
        Ok(CanonicalDocument(map))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::decode(format!("document: {e}")))?;
        match value {
            Value::Object(map) => CanonicalDocument::new(map),
            _ => Err(Error::decode("document must be a JSON object")),
        }
    }

    /// Builds a flat string dictionary.
    pub fn from_pairs<K: Into<String>, V: Into<String>>(
        pairs: impl IntoIterator<Item = (K, V)>,
    ) -> Result<Self> {
        let map = pairs
            .into_iter()
            .map(|(k, v)| (k.into(), Value::String(v.into())))
            .collect();
        CanonicalDocument::new(map)
    }

    pub fn as_map(&self) -> &Map<String, Value> {
        &self.0
    }

    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        write_object(&self.0, &mut out);
        out
    }

    /// Hash-to-point of the canonical bytes.
    pub fn identity(&self) -> PointG1 {
        hash_to_point_g1(&self.canonical_bytes()).expect("canonical form of a non-empty object")
    }
}

impl TryFrom<Map<String, Value>> for CanonicalDocument {
    type Error = Error;
    fn try_from(map: Map<String, Value>) -> Result<Self> {
        CanonicalDocument::new(map)
    }
}

impl From<CanonicalDocument> for Map<String, Value> {
    fn from(doc: CanonicalDocument) -> Self {
        doc.0
    }
}

fn write_object(map: &Map<String, Value>, out: &mut Vec<u8>) {
    let mut keys: Vec<&String> = map.keys().collect();
    keys.sort_unstable_by(|a, b| a.as_bytes().cmp(b.as_bytes()));
    out.push(b'{');
    for (i, key) in keys.into_iter().enumerate() {
        if i > 0 {
            out.push(b',');
        }
        write_string(key, out);
        out.push(b':');
        write_value(&map[key], out);
    }
    out.push(b'}');
}

fn write_string(s: &str, out: &mut Vec<u8>) {
    out.extend_from_slice(serde_json::to_string(s).expect("strings serialize").as_bytes());
}

fn write_value(value: &Value, out: &mut Vec<u8>) {
    match value {
        Value::Null => out.extend_from_slice(b"null"),
        Value::Bool(b) => out.extend_from_slice(if *b { b"true" } else { b"false" }),
        Value::Number(n) => out.extend_from_slice(n.to_string().as_bytes()),
        Value::String(s) => write_string(s, out),
        Value::Array(items) => {
            out.push(b'[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(b',');
                }
                write_value(item, out);
            }
            out.push(b']');
        }
        Value::Object(map) => write_object(map, out),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_order_and_whitespace_do_not_matter() {
        let a = CanonicalDocument::from_json_str(r#"{"b": 1, "a": {"y": "2", "x": [1, 2]}}"#).unwrap();
        let b = CanonicalDocument::from_json_str(r#"{"a":{"x":[1,2],"y":"2"},"b":1}"#).unwrap();
        assert_eq!(a.canonical_bytes(), b.canonical_bytes());
        assert_eq!(
            String::from_utf8(a.canonical_bytes()).unwrap(),
            r#"{"a":{"x":[1,2],"y":"2"},"b":1}"#
        );
        assert_eq!(a.identity(), b.identity());
    }

    #[test]
    fn value_change_changes_identity() {
        let a = CanonicalDocument::from_pairs([("a", "1")]).unwrap();
        let b = CanonicalDocument::from_pairs([("a", "2")]).unwrap();
        assert_ne!(a.identity(), b.identity());
    }

    #[test]
    fn rejects_empty_and_non_objects() {
        assert!(matches!(
            CanonicalDocument::from_json_str("{}"),
            Err(Error::InvalidInput(_))
        ));
        assert!(CanonicalDocument::from_json_str("[1]").is_err());
        assert!(CanonicalDocument::from_json_str("{").is_err());
    }

    #[test]
    fn escapes_strings() {
        let doc = CanonicalDocument::from_pairs([("q\"k", "line\nbreak")]).unwrap();
        assert_eq!(
            String::from_utf8(doc.canonical_bytes()).unwrap(),
            r#"{"q\"k":"line\nbreak"}"#
        );
    }
}
