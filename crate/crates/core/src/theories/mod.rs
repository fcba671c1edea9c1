//! Concrete theories and their canonical bank strategies.
//!
//! * `classical(n)` — probability vectors, simplex states.
//! * `quantum(d)` — density operators in the Hermitian basis.
//! * `gbit()` — the square state space.
//! * `polygon(n, restricted)` — the regular `n`-gon; with `restricted` the
//!   effect cone keeps only the exposing effects and their complements, so
//!   effects form a strict subcone of the dual of the states.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cone::{hermitian, Cone};
use crate::error::{Error, Result};
use crate::gpt::{compose_systems, CompositeRule, CompositeSystem, ProcessCone, System, SystemKind};
use crate::linalg::{dot, RealVector};
use crate::money::{BankStrategy, StrategyItem};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum TheoryName {
    Classical { n: usize },
    Quantum { d: usize },
    Gbit,
    Polygon { n: usize, restricted: bool },
    Custom,
}

impl std::fmt::Display for TheoryName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TheoryName::Classical { n } => write!(f, "classical:{}", n),
            TheoryName::Quantum { d } => write!(f, "quantum:{}", d),
            TheoryName::Gbit => write!(f, "gbit"),
            TheoryName::Polygon { n, restricted: false } => write!(f, "polygon:{}", n),
            TheoryName::Polygon { n, restricted: true } => write!(f, "polygon:{}:restricted", n),
            TheoryName::Custom => write!(f, "custom"),
        }
    }
}

/// A single system together with how it composes and which maps count as
/// physical counterfeiters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theory {
    pub name: TheoryName,
    pub system: System,
    #[serde(default)]
    pub rule: CompositeRule,
    /// Overrides the default cone of processes `A → AA`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cloning_cone: Option<Cone>,
    /// Extremal causal states, when the theory has finitely many.
    #[serde(default, skip_serializing_if = "Vec::is_empty", with = "crate::schema::decimal_vecs")]
    pub vertices: Vec<RealVector>,
    /// `exposing[i]` accepts `vertices[i]` with certainty and every other
    /// normalised state with probability below one.
    #[serde(default, skip_serializing_if = "Vec::is_empty", with = "crate::schema::decimal_vecs")]
    pub exposing: Vec<RealVector>,
}

impl Theory {
    pub fn classical(n: usize) -> Result<Theory> {
        if n < 2 {
            return Err(Error::Invalid(format!("classical(n) needs n ≥ 2, got {}", n)));
        }
        let system = System::new(
            format!("classical{}", n),
            SystemKind::Classical { n },
            Cone::orthant(n),
            Cone::orthant(n),
            vec![1.0; n],
        )?;
        let vertices: Vec<RealVector> = (0..n).map(|i| crate::linalg::unit_vector(n, i)).collect();
        Ok(Theory {
            name: TheoryName::Classical { n },
            system,
            rule: CompositeRule::Native,
            cloning_cone: None,
            exposing: vertices.clone(),
            vertices,
        })
    }

    pub fn quantum(d: usize) -> Result<Theory> {
        if d < 2 {
            return Err(Error::Invalid(format!("quantum(d) needs d ≥ 2, got {}", d)));
        }
        let system = System::new(
            format!("quantum{}", d),
            SystemKind::Quantum { factors: vec![d] },
            Cone::psd(d),
            Cone::psd(d),
            hermitian::identity_coords(&[d]),
        )?;
        Ok(Theory {
            name: TheoryName::Quantum { d },
            system,
            rule: CompositeRule::Native,
            cloning_cone: None,
            vertices: Vec::new(),
            exposing: Vec::new(),
        })
    }

    /// The square: extremal states `(±1, ±1, 1)`.
    pub fn gbit() -> Result<Theory> {
        let square = [[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]];
        let pts: Vec<[f64; 2]> = square.to_vec();
        from_polygon(TheoryName::Gbit, "gbit", &pts, false)
    }

    /// The regular `n`-gon with vertices at radius `√sec(π/n)`.
    pub fn polygon(n: usize, restricted: bool) -> Result<Theory> {
        if n < 3 {
            return Err(Error::Invalid(format!("polygon(n) needs n ≥ 3, got {}", n)));
        }
        let r = (1.0 / (std::f64::consts::PI / n as f64).cos()).sqrt();
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                [r * t.cos(), r * t.sin()]
            })
            .collect();
        let label = if restricted {
            format!("polygon{}r", n)
        } else {
            format!("polygon{}", n)
        };
        from_polygon(TheoryName::Polygon { n, restricted }, &label, &pts, restricted)
    }

    /// Regular `n`-gon states whose effect cone is generated by `effects`
    /// and their complements `u − e` only. Every listed effect must lie
    /// between zero and `u` on the polygon. Counterfeiters are the maps
    /// sending everything the effects judge nonnegative to states of `AA`.
    pub fn polygon_with_effects(n: usize, effects: &[RealVector]) -> Result<Theory> {
        let base = Theory::polygon(n, false)?;
        let u = base.system.unit_effect.clone();
        let mut gens = Vec::with_capacity(2 * effects.len());
        for e in effects {
            crate::error::check_dim(3, e.len())?;
            for v in &base.vertices {
                let x = dot(e, v);
                if !(-1e-12..=1.0 + 1e-12).contains(&x) {
                    return Err(Error::validation(
                        "effect bounds",
                        format!("effect {:?} takes value {} on a vertex", e, x),
                    ));
                }
            }
            gens.push(e.clone());
            gens.push(u.iter().zip(e).map(|(a, b)| a - b).collect());
        }
        let effect_cone = Cone::polyhedral_v(3, gens)?;
        let system = System::new(
            format!("polygon{}e", n),
            SystemKind::Polyhedral,
            base.system.state_cone.clone(),
            effect_cone.clone(),
            u,
        )?;
        let aa = compose_systems(&[system.clone(), system.clone()], CompositeRule::Native)?;
        Ok(Theory {
            name: TheoryName::Custom,
            cloning_cone: Some(Cone::tensor_max(aa.system.state_cone.clone(), effect_cone)),
            system,
            rule: CompositeRule::Native,
            vertices: base.vertices,
            exposing: Vec::new(),
        })
    }

    /// A user-supplied system.
    pub fn custom(system: System, rule: CompositeRule, cloning_cone: Option<Cone>) -> Result<Theory> {
        if let Some(c) = &cloning_cone {
            crate::error::check_dim(system.dim().pow(3), c.dim())?;
        }
        Ok(Theory {
            name: TheoryName::Custom,
            system,
            rule,
            cloning_cone,
            vertices: Vec::new(),
            exposing: Vec::new(),
        })
    }

    /// `classical:3`, `quantum:2`, `gbit`, `polygon:5`, `polygon:6:restricted`.
    pub fn parse(spec: &str) -> Result<Theory> {
        let parts: Vec<&str> = spec.trim().split(':').collect();
        let num = |i: usize| -> Result<usize> {
            parts
                .get(i)
                .ok_or_else(|| Error::Invalid(format!("theory {:?} needs a size parameter", spec)))?
                .parse::<usize>()
                .map_err(|e| Error::Invalid(format!("theory {:?}: {}", spec, e)))
        };
        match parts.as_slice() {
            ["classical", _] => Theory::classical(num(1)?),
            ["quantum", _] => Theory::quantum(num(1)?),
            ["gbit"] => Theory::gbit(),
            ["polygon", _] => Theory::polygon(num(1)?, false),
            ["polygon", _, "restricted"] => Theory::polygon(num(1)?, true),
            _ => Err(Error::Invalid(format!(
                "unknown theory {:?}; expected classical:N, quantum:D, gbit, polygon:N or polygon:N:restricted",
                spec
            ))),
        }
    }

    /// The composite `AA` under the theory's rule.
    pub fn doubled(&self) -> Result<CompositeSystem> {
        compose_systems(&[self.system.clone(), self.system.clone()], self.rule.clone())
    }

    /// The cone of counterfeiting maps `A → AA`.
    pub fn cloning_process_cone(&self) -> Result<ProcessCone> {
        let aa = self.doubled()?;
        match &self.cloning_cone {
            Some(c) => ProcessCone::custom(&self.system, &aa.system, c.clone()),
            None => ProcessCone::default_for(&self.system, &aa.system),
        }
    }
}

/// Builds a polyhedral theory from the vertices of a convex polygon given
/// in counter-clockwise order around the origin, embedded at height one.
fn from_polygon(name: TheoryName, label: &str, pts: &[[f64; 2]], restricted: bool) -> Result<Theory> {
    let n = pts.len();
    let vertices: Vec<RealVector> = pts.iter().map(|p| vec![p[0], p[1], 1.0]).collect();
    let u = vec![0.0, 0.0, 1.0];
    // Facet functional through consecutive vertices, positive inside,
    // scaled to peak at one on the polygon.
    let facets: Vec<RealVector> = (0..n)
        .map(|k| {
            let (a, b) = (&vertices[k], &vertices[(k + 1) % n]);
            let mut g = vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]];
            if dot(&g, &u) < 0.0 {
                g.iter_mut().for_each(|x| *x = -*x);
            }
            let peak = vertices.iter().map(|v| dot(&g, v)).fold(f64::MIN, f64::max);
            g.iter().map(|x| x / peak).collect()
        })
        .collect();
    let complement = |g: &RealVector| -> RealVector { u.iter().zip(g).map(|(a, b)| a - b).collect() };
    // The effect `½(h_{i−1} + h_i)`, `h_k = u − g_k`, equals one on vertex
    // `i` (where both `g_{i−1}` and `g_i` vanish) and nowhere else.
    let exposing: Vec<RealVector> = (0..n)
        .map(|i| {
            let h0 = complement(&facets[(i + n - 1) % n]);
            let h1 = complement(&facets[i]);
            h0.iter().zip(&h1).map(|(a, b)| (a + b) / 2.0).collect()
        })
        .collect();
    let effect_cone = if restricted {
        let mut gens = exposing.clone();
        gens.extend(exposing.iter().map(complement));
        Cone::polyhedral_v(3, gens)?
    } else {
        Cone::polyhedral_v(3, facets)?
    };
    let system = System::new(
        label,
        SystemKind::Polyhedral,
        Cone::polyhedral_v(3, vertices.clone())?,
        effect_cone,
        u,
    )?;
    // With restricted effects, counterfeiters must send every vector the
    // effects judge nonnegative to a state of `AA`. The positivity-preserving
    // cone would admit measure-and-prepare maps built from any functional
    // in `(K^A)*`, which makes the relaxation trivial.
    let cloning_cone = if restricted {
        let aa = compose_systems(&[system.clone(), system.clone()], CompositeRule::Native)?;
        Some(Cone::tensor_max(aa.system.state_cone.clone(), system.effect_cone.clone()))
    } else {
        None
    };
    Ok(Theory {
        name,
        system,
        rule: CompositeRule::Native,
        cloning_cone,
        vertices,
        exposing,
    })
}

fn ket(v: &[Complex64]) -> RealVector {
    hermitian::rank_one(&[v.len()], v)
}

/// `|0⟩, |1⟩, |+⟩, |−⟩` as qubit coordinates.
pub fn bb84_states() -> Vec<RealVector> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let c = |x: f64| Complex64::new(x, 0.0);
    vec![
        ket(&[c(1.0), c(0.0)]),
        ket(&[c(0.0), c(1.0)]),
        ket(&[c(r), c(r)]),
        ket(&[c(r), c(-r)]),
    ]
}

/// The canonical single-note strategy: BB84 with projector effects on a
/// qubit, and uniformly chosen vertices with their exposing effects on
/// classical, gbit and polygon theories.
pub fn wiesner_strategy(theory: &Theory) -> Result<BankStrategy> {
    let items: Vec<StrategyItem> = match &theory.name {
        TheoryName::Quantum { d: 2 } => bb84_states()
            .into_iter()
            .map(|s| StrategyItem::new(0.25, s.clone(), s))
            .collect(),
        TheoryName::Quantum { d } => {
            return Err(Error::Unsupported(format!(
                "no canonical Wiesner strategy for quantum({}); supply a strategy file",
                d
            )))
        }
        _ if !theory.vertices.is_empty() && theory.vertices.len() == theory.exposing.len() => {
            let p = 1.0 / theory.vertices.len() as f64;
            theory
                .vertices
                .iter()
                .zip(&theory.exposing)
                .map(|(s, e)| StrategyItem::new(p, s.clone(), e.clone()))
                .collect()
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "{} has no listed extremal states with exposing effects",
                theory.name
            )))
        }
    };
    BankStrategy::new(theory.system.clone(), items, 1e-9)
}

/// Random sharp strategy with `k` items: distinct vertices with their
/// exposing effects, or random pure qubit states with their projectors.
/// Probabilities are uniform on the simplex.
pub fn random_sharp_strategy(theory: &Theory, k: usize, rng: &mut impl Rng) -> Result<BankStrategy> {
    if k == 0 {
        return Err(Error::Invalid("a strategy needs at least one item".into()));
    }
    let weights: Vec<f64> = (0..k).map(|_| -rng.gen_range(f64::EPSILON..1.0f64).ln()).collect();
    let total: f64 = weights.iter().sum();
    let mut p: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let rest: f64 = p[1..].iter().sum();
    p[0] = 1.0 - rest;
    let pairs: Vec<(RealVector, RealVector)> = match &theory.name {
        TheoryName::Quantum { d } => {
            let d = *d;
            (0..k)
                .map(|_| {
                    let v: Vec<Complex64> = (0..d)
                        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                        .collect();
                    let nrm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    let v: Vec<Complex64> = v.iter().map(|z| z / nrm).collect();
                    let s = ket(&v);
                    (s.clone(), s)
                })
                .collect()
        }
        _ => {
            let m = theory.vertices.len();
            if m == 0 || theory.exposing.len() != m {
                return Err(Error::Unsupported(format!("{} has no listed extremal states", theory.name)));
            }
            if k > m {
                return Err(Error::Invalid(format!("{} has only {} extremal states", theory.name, m)));
            }
            rand::seq::index::sample(rng, m, k)
                .into_iter()
                .map(|i| (theory.vertices[i].clone(), theory.exposing[i].clone()))
                .collect()
        }
    };
    let items = pairs
        .into_iter()
        .zip(p)
        .map(|((s, e), p)| StrategyItem::new(p, s, e))
        .collect();
    BankStrategy::new(theory.system.clone(), items, 1e-9)
}
