//! Canonical JSON: object keys sorted by byte order, no insignificant
//! whitespace, UTF-8. This is the byte form that gets hashed, signed into
//! request ids, and served by the slicing API.

use serde::Serialize;
use serde_json::Value;

/// Serialize any value to canonical JSON bytes.
///
/// `serde_json::Value` objects are `BTreeMap`-backed, so going through
/// `Value` sorts every nested object.
pub fn to_canonical_bytes<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let v = serde_json::to_value(value).expect("canonical: value is not JSON-representable");
    serde_json::to_vec(&v).expect("canonical: serialization of Value cannot fail")
}

pub fn to_canonical_string<T: Serialize + ?Sized>(value: &T) -> String {
    String::from_utf8(to_canonical_bytes(value)).expect("serde_json emits UTF-8")
}

/// Re-encode a JSON document canonically. Returns `None` when `raw` is not JSON.
pub fn canonicalize(raw: &[u8]) -> Option<Vec<u8>> {
    let v: Value = serde_json::from_slice(raw).ok()?;
    Some(to_canonical_bytes(&v))
}

/// Canonical bytes when `raw` parses as JSON, otherwise the raw bytes as-is.
pub fn canonical_or_raw(raw: &[u8]) -> Vec<u8> {
    canonicalize(raw).unwrap_or_else(|| raw.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use serde_json::json;

    #[test]
    fn keys_are_sorted_recursively() {
        let v = json!({"b": 1, "a": {"z": true, "y": [3, {"d": 0, "c": null}]}});
        assert_eq!(
            to_canonical_string(&v),
            r#"{"a":{"y":[3,{"c":null,"d":0}],"z":true},"b":1}"#
        );
    }

    #[test]
    fn whitespace_is_dropped() {
        let raw = b"{ \"quantum_ms\" : 100,\n  \"slice_id\":\"0x00\" }";
        assert_eq!(
            canonicalize(raw).unwrap(),
            br#"{"quantum_ms":100,"slice_id":"0x00"}"#.to_vec()
        );
    }

    #[test]
    fn non_json_passes_through() {
        assert_eq!(canonical_or_raw(b"not json{"), b"not json{".to_vec());
    }

    fn arb_json() -> impl Strategy<Value = Value> {
        let leaf = prop_oneof![
            Just(Value::Null),
            any::<bool>().prop_map(Value::Bool),
            any::<i64>().prop_map(|n| json!(n)),
            "[a-z0-9 ]{0,8}".prop_map(Value::String),
        ];
        leaf.prop_recursive(3, 24, 4, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 0..4).prop_map(Value::Array),
                prop::collection::btree_map("[a-z]{1,4}", inner, 0..4)
                    .prop_map(|m| Value::Object(m.into_iter().collect())),
            ]
        })
    }

    proptest! {
        #[test]
        fn canonical_is_a_fixed_point(v in arb_json()) {
            let once = to_canonical_bytes(&v);
            let twice = canonicalize(&once).unwrap();
            prop_assert_eq!(&once, &twice);
            let pretty = serde_json::to_vec_pretty(&v).unwrap();
            prop_assert_eq!(canonicalize(&pretty).unwrap(), once);
        }
    }
}
