//! Deterministic JSON output: floats rounded to 12 significant digits,
//! object keys in sorted order.

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

fn canon(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => n.as_f64().map(|x| Value::from(round_sig(x, 12))).unwrap_or(Value::Null),
        Value::Array(a) => Value::Array(a.into_iter().map(canon).collect()),
        Value::Object(m) => Value::Object(m.into_iter().map(|(k, v)| (k, canon(v))).collect()),
        v => v,
    }
}

/// Canonical form of any serializable value.
pub fn canonical(value: &impl Serialize) -> Result<Value> {
    Ok(canon(serde_json::to_value(value).map_err(|e| Error::Config(e.to_string()))?))
}

/// Pretty-printed canonical JSON, newline-terminated.
pub fn to_canonical_string(value: &impl Serialize) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&canonical(value)?).map_err(|e| Error::Config(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(round_sig(0.1 + 0.2, 12), 0.3);
        assert_eq!(round_sig(1.234567890123456e-7, 12), 1.23456789012e-7);
        let s = to_canonical_string(&serde_json::json!({"b": [0.30000000000000004], "a": f64::NAN})).unwrap();
        assert_eq!(s, "{\n  \"a\": null,\n  \"b\": [\n    0.3\n  ]\n}\n");
    }
}
