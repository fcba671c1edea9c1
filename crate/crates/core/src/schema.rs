//! Decimal-string number encoding used by every file the library reads or
//! writes. Each `f64` is written with 17 significant digits so that a parse
//! of the text restores the exact bit pattern.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Current version stamped into every theory, strategy and report document.
pub const SCHEMA_VERSION: u32 = 1;

pub fn format_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{:.16e}", x)
    }
}

pub fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    match s.trim() {
        "NaN" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t
            .parse::<f64>()
            .map_err(|e| format!("bad decimal {:?}: {}", s, e)),
    }
}

/// Accepts either a decimal string or a bare JSON number on input.
#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrString {
    Num(f64),
    Str(String),
}

impl NumOrString {
    fn value<E: serde::de::Error>(self) -> std::result::Result<f64, E> {
        match self {
            NumOrString::Num(x) => Ok(x),
            NumOrString::Str(s) => parse_f64(&s).map_err(E::custom),
        }
    }
}

pub mod decimal {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        format_f64(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        NumOrString::deserialize(d)?.value()
    }
}

pub mod decimal_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|x| format_f64(*x))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<NumOrString>::deserialize(d)?
            .into_iter()
            .map(|n| n.value())
            .collect()
    }
}

pub mod decimal_vecs {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|row| row.iter().map(|x| format_f64(*x)).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<f64>>, D::Error> {
        Vec::<Vec<NumOrString>>::deserialize(d)?
            .into_iter()
            .map(|row| row.into_iter().map(|n| n.value()).collect())
            .collect()
    }
}

pub mod decimal_opt {
    use super::*;

    pub fn serialize<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
        x.map(format_f64).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<f64>, D::Error> {
        Option::<NumOrString>::deserialize(d)?
            .map(|n| n.value())
            .transpose()
    }
}

pub mod decimal_opt_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &Option<Vec<f64>>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref()
            .map(|v| v.iter().map(|x| format_f64(*x)).collect::<Vec<_>>())
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
        Option::<Vec<NumOrString>>::deserialize(d)?
            .map(|v| v.into_iter().map(|n| n.value()).collect())
            .transpose()
    }
}

/// Reads a `schema_version` field and rejects documents from a newer schema.
pub fn check_version(v: u32) -> crate::Result<()> {
    if v == 0 || v > SCHEMA_VERSION {
        Err(crate::Error::Invalid(format!(
            "unsupported schema_version {} (this build reads 1..={})",
            v, SCHEMA_VERSION
        )))
    } else {
        Ok(())
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn decimal_text_restores_exact_bits(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let back = parse_f64(&format_f64(x)).unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn at_least_seventeen_significant_digits() {
        let s = format_f64(0.1);
        let mantissa: String = s.split('e').next().unwrap().chars().filter(|c| c.is_ascii_digit()).collect();
        assert!(mantissa.len() >= 17, "{}", s);
    }
}
