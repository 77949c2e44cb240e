//! Fixed-point number formatting shared by every writer.
//!
//! Reals are written with at most 6 fractional digits, trailing zeros
//! trimmed, never in exponent notation. Integers stay integers.

use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

pub const FRACTION_DIGITS: usize = 6;

/// `v` rounded to 6 fractional digits, trailing zeros trimmed.
pub fn fixed(v: f64) -> String {
    let mut s = format!("{:.*}", FRACTION_DIGITS, v);
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

/// Rounds `v` to the value `fixed` would write.
pub fn quantize(v: f64) -> f64 {
    fixed(v).parse().unwrap_or(v)
}

pub fn ser_f64<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if !v.is_finite() {
        return Err(serde::ser::Error::custom(format!("non-finite number {v}")));
    }
    let raw = RawValue::from_string(fixed(*v)).map_err(serde::ser::Error::custom)?;
    raw.serialize(s)
}

pub fn ser_opt_f64<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(v) => ser_f64(v, s),
        None => s.serialize_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(fixed(10.0), "10");
        assert_eq!(fixed(10.5), "10.5");
        assert_eq!(fixed(1.0 / 3.0), "0.333333");
        assert_eq!(fixed(2.0 / 3.0), "0.666667");
        assert_eq!(fixed(1e-7), "0");
        assert_eq!(fixed(-1e-9), "0");
        assert_eq!(fixed(1234567.0), "1234567");
        assert_eq!(quantize(0.1234567), 0.123457);
    }
}
