//! Byte-stable JSON output: sorted object keys and floats rounded to nine
//! significant digits.

use serde::Serialize;
use serde_json::Value;

pub const SIGNIFICANT_DIGITS: usize = 9;

/// Rounds `v` to [`SIGNIFICANT_DIGITS`] significant digits.
pub fn round_sig(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v)
        .parse()
        .unwrap_or(v)
}

/// Text form of [`round_sig`]: plain decimals for ordinary magnitudes,
/// exponent notation for very small or large ones.
pub fn format_sig(v: f64) -> String {
    let r = round_sig(v);
    if r == 0.0 || (1e-4..1e15).contains(&r.abs()) || !r.is_finite() {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// Rewrites every float in `value` with [`round_sig`]. Integers are kept.
pub fn round_floats(value: &mut Value) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let r = round_sig(n.as_f64().unwrap_or(0.0));
            if let Some(m) = serde_json::Number::from_f64(r) {
                *n = m;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

pub fn stable_value<T: Serialize + ?Sized>(data: &T) -> Value {
    let mut v = serde_json::to_value(data).expect("serializable report");
    round_floats(&mut v);
    v
}

/// Pretty-printed stable JSON, without a trailing newline.
pub fn to_stable_json<T: Serialize + ?Sized>(data: &T) -> String {
    serde_json::to_string_pretty(&stable_value(data)).expect("serializable report")
}

/// Single-line stable JSON.
pub fn to_stable_line<T: Serialize + ?Sized>(data: &T) -> String {
    stable_value(data).to_string()
}
