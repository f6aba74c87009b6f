//! Output formatting: every float leaves the program with 9 significant digits.

use serde::Serialize;
use serde_json::Value;

/// Rounds to 9 significant digits; non-finite values pass through.
pub fn round9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

/// CSV cell text for a float, shortest form of the rounded value.
pub fn csv_float(x: f64) -> String {
    let r = round9(x);
    let a = r.abs();
    if r == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// Rounds every number in a JSON tree in place.
pub fn round_json(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if n.is_f64() {
                if let Some(f) = n.as_f64().map(round9).and_then(serde_json::Number::from_f64) {
                    *n = f;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// Serializes and rounds in one step.
pub fn to_rounded_json<T: Serialize>(value: &T) -> Value {
    let mut v = serde_json::to_value(value).unwrap_or(Value::Null);
    round_json(&mut v);
    v
}

pub fn pretty(value: &Value) -> String {
    serde_json::to_string_pretty(value).unwrap_or_else(|_| "null".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_digits() {
        assert_eq!(round9(0.1 + 0.2), 0.3);
        assert_eq!(round9(1.234567891234), 1.23456789);
        assert_eq!(round9(-2.27e-26 * 1e4), -2.27e-22);
        assert_eq!(csv_float(227.00000000001), "227");
        assert_eq!(csv_float(1.5e-7), "1.5e-7");
        assert!(round9(f64::NAN).is_nan());
    }

    #[test]
    fn json_tree() {
        let mut v = serde_json::json!({"a": [0.30000000000000004, 1], "b": {"c": 3.14159265358979}});
        round_json(&mut v);
        assert_eq!(v.to_string(), r#"{"a":[0.3,1],"b":{"c":3.14159265}}"#);
    }
}
