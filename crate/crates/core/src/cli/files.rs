//! The JSON document format shared by theory, strategy and config files.
//!
//! One document may carry any of the top-level keys `theory`, `strategy`,
//! `states` and `config`, next to a mandatory `schema_version`. Numbers are
//! written as decimal strings; bare JSON numbers are accepted on input.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::money::{BankStrategy, MoneyConfig, StrategyItem};
use crate::schema::{check_version, SCHEMA_VERSION};
use crate::theories::{bb84_states, wiesner_strategy, Theory};
use crate::RealVector;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TheoryEntry {
    /// `"quantum:2"` and friends.
    Named(String),
    Full(Box<Theory>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyEntry {
    pub items: Vec<StrategyItem>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theory: Option<TheoryEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<StrategyEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_vecs")]
    pub states: Option<Vec<RealVector>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<MoneyConfig>,
}

mod opt_vecs {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Wrap(#[serde(with = "crate::schema::decimal_vecs")] Vec<Vec<f64>>);

    pub fn serialize<S: Serializer>(v: &Option<Vec<Vec<f64>>>, s: S) -> std::result::Result<S::Ok, S::Error> {
        v.as_ref().map(|v| Wrap(v.clone())).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Vec<Vec<f64>>>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

impl Document {
    pub fn empty() -> Self {
        Document {
            schema_version: SCHEMA_VERSION,
            theory: None,
            strategy: None,
            states: None,
            config: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Document> {
        let doc: Document = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("malformed document: {}", e)))?;
        check_version(doc.schema_version)?;
        Ok(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents always serialise")
    }
}

/// Where an input came from, with the SHA-256 of its bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    pub source: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{:02x}", b)).collect()
}

fn digest(role: &str, source: &str, bytes: &[u8]) -> InputDigest {
    InputDigest {
        role: role.into(),
        source: source.into(),
        sha256: sha256_hex(bytes),
    }
}

fn read_document(path: &str) -> Result<(Document, Vec<u8>)> {
    let bytes = std::fs::read(Path::new(path)).map_err(|e| Error::Invalid(format!("cannot read {}: {}", path, e)))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Invalid(format!("{} is not UTF-8: {}", path, e)))?;
    Ok((Document::from_json(text)?, bytes))
}

pub fn resolve_theory_entry(entry: &TheoryEntry) -> Result<Theory> {
    match entry {
        TheoryEntry::Named(name) => Theory::parse(name),
        TheoryEntry::Full(t) => {
            // Re-run the system checks on whatever the file claims.
            let sys = &t.system;
            let checked = crate::gpt::System::new(
                sys.label.clone(),
                sys.kind.clone(),
                sys.state_cone.clone(),
                sys.effect_cone.clone(),
                sys.unit_effect.clone(),
            )?;
            let mut t = (**t).clone();
            t.system = checked;
            Ok(t)
        }
    }
}

/// A theory name such as `quantum:2`, or a path to a document with a
/// `theory` key.
pub fn load_theory(reference: &str) -> Result<(Theory, InputDigest)> {
    if Path::new(reference).is_file() {
        let (doc, bytes) = read_document(reference)?;
        let entry = doc
            .theory
            .ok_or_else(|| Error::Invalid(format!("{} has no `theory` key", reference)))?;
        Ok((resolve_theory_entry(&entry)?, digest("theory", reference, &bytes)))
    } else {
        Ok((Theory::parse(reference)?, digest("theory", reference, reference.as_bytes())))
    }
}

/// `builtin:wiesner`, or a path to a document with a `strategy` key
/// (and optionally its own `theory`, which then overrides `theory`).
pub fn load_strategy(reference: &str, theory: &Theory, tol: f64) -> Result<(BankStrategy, Option<Theory>, InputDigest)> {
    if reference == "builtin:wiesner" {
        return Ok((wiesner_strategy(theory)?, None, digest("strategy", reference, reference.as_bytes())));
    }
    if !Path::new(reference).is_file() {
        return Err(Error::Invalid(format!(
            "strategy {:?} is neither builtin:wiesner nor a readable file",
            reference
        )));
    }
    let (doc, bytes) = read_document(reference)?;
    let own_theory = doc.theory.as_ref().map(resolve_theory_entry).transpose()?;
    let entry = doc
        .strategy
        .ok_or_else(|| Error::Invalid(format!("{} has no `strategy` key", reference)))?;
    let sys = own_theory.as_ref().unwrap_or(theory).system.clone();
    let s = BankStrategy::new(sys, entry.items, tol)?;
    Ok((s, own_theory, digest("strategy", reference, &bytes)))
}

/// `bb84`, `vertices`, `builtin:wiesner`, or a path to a document with a
/// `states` key.
pub fn load_states(reference: &str, theory: &Theory) -> Result<(Vec<RealVector>, InputDigest)> {
    let named = |v: Vec<RealVector>| Ok((v, digest("states", reference, reference.as_bytes())));
    match reference {
        "bb84" => named(bb84_states()),
        "vertices" if !theory.vertices.is_empty() => named(theory.vertices.clone()),
        "vertices" => Err(Error::Invalid(format!("{} lists no vertices", theory.name))),
        "builtin:wiesner" => named(wiesner_strategy(theory)?.states()),
        path => {
            let (doc, bytes) = read_document(path)?;
            let states = doc
                .states
                .or_else(|| doc.strategy.map(|s| s.items.into_iter().map(|i| i.state).collect()))
                .ok_or_else(|| Error::Invalid(format!("{} has neither `states` nor `strategy`", path)))?;
            Ok((states, digest("states", path, &bytes)))
        }
    }
}

pub fn load_config(path: &str) -> Result<(MoneyConfig, InputDigest)> {
    let (doc, bytes) = read_document(path)?;
    let cfg = doc
        .config
        .ok_or_else(|| Error::Invalid(format!("{} has no `config` key", path)))?;
    Ok((cfg, digest("config", path, &bytes)))
}

/// A document holding `s` and its theory.
pub fn strategy_document(theory: &Theory, s: &BankStrategy) -> Document {
    Document {
        theory: Some(match theory.name {
            crate::theories::TheoryName::Custom => TheoryEntry::Full(Box::new(theory.clone())),
            _ => TheoryEntry::Named(theory.name.to_string()),
        }),
        strategy: Some(StrategyEntry { items: s.items.clone() }),
        ..Document::empty()
    }
}
