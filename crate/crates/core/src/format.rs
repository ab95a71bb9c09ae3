//! Round-trip-safe decimal output: every `f64` is written with 17 significant
//! digits so that parsing it back yields the same bits.

use std::str::FromStr;

use serde::{Serialize, Serializer};

pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serializes as a JSON number with 17 significant digits (`null` if not finite).
#[derive(Clone, Copy, Debug)]
pub struct Sig17(pub f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            serde_json::Number::from_str(&sig17(self.0))
                .expect("formatted float is a valid JSON number")
                .serialize(s)
        } else {
            s.serialize_none()
        }
    }
}

pub(crate) fn ser_f64<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    Sig17(*x).serialize(s)
}

pub(crate) fn ser_vec<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|&x| Sig17(x)))
}

pub(crate) fn ser_opt<S: Serializer>(v: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => Sig17(*x).serialize(s),
        None => s.serialize_none(),
    }
}
