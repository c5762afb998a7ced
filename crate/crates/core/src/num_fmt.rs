//! Full-precision float formatting shared by JSON reports and CSV files.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Formats with 17 significant digits, enough to reproduce the exact bit
/// pattern on parse and byte-stable across runs.
pub fn full_precision(x: f64) -> String {
    format!("{x:.16e}")
}

/// An `f64` that serializes as a JSON number carrying all 17 significant
/// digits. Relies on `serde_json`'s arbitrary-precision numbers, so it must
/// be serialized with `serde_json`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct F17(pub f64);

impl From<f64> for F17 {
    fn from(x: f64) -> Self {
        F17(x)
    }
}

impl std::str::FromStr for F17 {
    type Err = std::num::ParseFloatError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.parse::<f64>().map(F17)
    }
}

impl std::fmt::Display for F17 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&full_precision(self.0))
    }
}

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom("cannot serialize a non-finite value"));
        }
        serde_json::Number::from_string_unchecked(full_precision(self.0)).serialize(s)
    }
}

impl<'de> Deserialize<'de> for F17 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        f64::deserialize(d).map(F17)
    }
}
