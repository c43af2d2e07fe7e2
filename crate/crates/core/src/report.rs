//! Canonical serialization helpers shared by every result document.

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Code version embedded in result documents.
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Pretty JSON with object keys sorted, newline-terminated.
///
/// Routing through `serde_json::Value` sorts keys because the default map
/// type is a `BTreeMap`.
pub fn to_sorted_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("value serializes to JSON");
    let mut s = serde_json::to_string_pretty(&v).expect("JSON value prints");
    s.push('\n');
    s
}

/// Hex SHA-256 of the compact sorted-key JSON of `value`.
pub fn hash_of<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("value serializes to JSON");
    let bytes = serde_json::to_vec(&v).expect("JSON value prints");
    hex::encode(Sha256::digest(&bytes))
}

/// Formats a float with 17 significant digits, enough to round-trip.
pub fn full_precision(x: f64) -> String {
    format!("{x:.16e}")
}
