//! Report serialization helpers.
//!
//! Every numeric value that crosses the JSON boundary is written as a decimal
//! string with 17 significant digits. This round-trips `f64` exactly and keeps
//! reports byte-identical across platforms, which the CLI relies on for
//! regression baselines.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An `f64` that serializes as a 17-significant-digit decimal string.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct F17(pub f64);

impl F17 {
    pub fn get(self) -> f64 {
        self.0
    }
}

impl From<f64> for F17 {
    fn from(x: f64) -> Self {
        F17(x)
    }
}

impl fmt::Display for F17 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", format_f17(self.0))
    }
}

/// Format with 17 significant digits in scientific notation.
pub fn format_f17(x: f64) -> String {
    format!("{:.16e}", x)
}

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format_f17(self.0))
    }
}

impl<'de> Deserialize<'de> for F17 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct Visitor;
        impl serde::de::Visitor<'_> for Visitor {
            type Value = F17;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a decimal string")
            }

            fn visit_f64<E: serde::de::Error>(self, v: f64) -> Result<F17, E> {
                Ok(F17(v))
            }

            fn visit_i64<E: serde::de::Error>(self, v: i64) -> Result<F17, E> {
                Ok(F17(v as f64))
            }

            fn visit_u64<E: serde::de::Error>(self, v: u64) -> Result<F17, E> {
                Ok(F17(v as f64))
            }

            fn visit_str<E: serde::de::Error>(self, v: &str) -> Result<F17, E> {
                v.parse::<f64>().map(F17).map_err(E::custom)
            }
        }
        deserializer.deserialize_any(Visitor)
    }
}

/// Convert a slice of floats into report form.
pub fn f17_vec(values: &[f64]) -> Vec<F17> {
    values.iter().copied().map(F17).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f17_round_trips_exactly() {
        for &x in &[
            1.0,
            std::f64::consts::PI,
            2.0 / 63.0,
            1e-300,
            -3.5e17,
            0.1 + 0.2,
        ] {
            let s = format_f17(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn f17_serde_accepts_numbers_and_strings() {
        let a: F17 = serde_json::from_str("0.25").unwrap();
        assert_eq!(a.0, 0.25);
        let b: F17 = serde_json::from_str("\"2.5000000000000000e-1\"").unwrap();
        assert_eq!(b.0, 0.25);
    }
}
