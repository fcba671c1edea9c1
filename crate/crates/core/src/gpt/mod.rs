//! Systems, composites and processes of a generalised probabilistic theory.
//!
//! A system is a pair of cones in a common real coordinate space — states
//! `K^A` and effects `K_A` — plus the discarding effect `u_A`. Pairing is
//! the Euclidean inner product of coordinates.

mod composite;
mod process;

pub use composite::{compose_systems, marginalise, CompositeRule, CompositeSystem};
pub(crate) use composite::marginalise_dims;
pub use process::{compose_processes, is_causal_process, is_subcausal_process, Ordering, ProcessCone};

use serde::{Deserialize, Serialize};

use crate::cone::{hermitian, Cone};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, kron, normalized, norm, RealVector};

/// How a system's coordinates were built, which decides its native
/// composites and default process cones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SystemKind {
    /// Probability vectors over `n` outcomes.
    Classical { n: usize },
    /// Hermitian operators on `⊗ C^{d_i}` in the product Hermitian basis.
    Quantum { factors: Vec<usize> },
    /// Any system whose cones are polyhedral and given explicitly.
    Polyhedral,
    /// `classical(n) ⊗ inner`, a direct sum of `n` copies of `inner`.
    Hybrid { classical: usize, inner: Box<SystemKind> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct System {
    pub label: String,
    pub kind: SystemKind,
    pub state_cone: Cone,
    pub effect_cone: Cone,
    #[serde(with = "crate::schema::decimal_vec")]
    pub unit_effect: RealVector,
    /// Interior clearance of the normalised unit effect in the effect cone.
    #[serde(with = "crate::schema::decimal")]
    pub unit_margin: f64,
}

/// Smallest accepted interior clearance of the unit effect.
pub const MIN_UNIT_MARGIN: f64 = 1e-9;

impl System {
    /// Validates the system: the unit effect must be interior to the effect
    /// cone, states and effects must pair nonnegatively (checked on
    /// spanning elements), and some state must be causal.
    pub fn new(
        label: impl Into<String>,
        kind: SystemKind,
        state_cone: Cone,
        effect_cone: Cone,
        unit_effect: RealVector,
    ) -> Result<Self> {
        let label = label.into();
        let dim = state_cone.dim();
        check_dim(dim, effect_cone.dim())?;
        check_dim(dim, unit_effect.len())?;
        if let SystemKind::Quantum { factors } = &kind {
            check_dim(hermitian::real_dim(factors), dim)?;
        }
        if norm(&unit_effect) == 0.0 {
            return Err(Error::validation("discarding effect interior", "unit effect is zero"));
        }
        let unit_margin = effect_cone.clearance(&normalized(&unit_effect))?;
        if unit_margin < MIN_UNIT_MARGIN {
            return Err(Error::validation(
                "discarding effect interior",
                format!("{}: unit effect is not interior to the effect cone (clearance {:e})", label, unit_margin),
            ));
        }
        let sys = System {
            label,
            kind,
            state_cone,
            effect_cone,
            unit_effect,
            unit_margin,
        };
        sys.check_pairing()?;
        if dot(&sys.unit_effect, &sys.state_cone.interior_point()?) <= 0.0 {
            return Err(Error::validation("causal state exists", format!("{}: no state has ⟨u, s⟩ = 1", sys.label)));
        }
        Ok(sys)
    }

    fn check_pairing(&self) -> Result<()> {
        // Self-dual cones in the same coordinates need no sampling.
        if let (Cone::PsdHermitian { factors: a }, Cone::PsdHermitian { factors: b }) = (&self.state_cone, &self.effect_cone) {
            if a == b {
                return Ok(());
            }
        }
        let states = self.state_cone.spanning_elements()?;
        let effects = self.effect_cone.spanning_elements()?;
        for e in &effects {
            for s in &states {
                let v = dot(e, s);
                if v < -1e-9 * norm(e) * norm(s) {
                    return Err(Error::validation(
                        "effects lie in the dual of the state cone",
                        format!("{}: an effect takes value {:e} on a state", self.label, v),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.unit_effect.len()
    }

    /// Signs `σ_a` with `B_aᵀ = σ_a B_a` for the coordinate basis; all `+1`
    /// outside quantum systems.
    pub fn transpose_signs(&self) -> Vec<f64> {
        signs_of(&self.kind, self.dim())
    }

    /// Whether `K_A = (K^A)*`, checked on spanning elements of both cones.
    pub fn satisfies_no_restriction(&self, tol: f64) -> Result<bool> {
        let dual_states = self.state_cone.dual();
        for g in dual_states.spanning_elements()? {
            if !self.effect_cone.contains(&g, tol * norm(&g).max(1.0))? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// A causal state in the interior of the state cone.
    pub fn interior_causal_state(&self) -> Result<RealVector> {
        let s = self.state_cone.interior_point()?;
        let w = dot(&self.unit_effect, &s);
        Ok(s.iter().map(|v| v / w).collect())
    }

    pub fn is_polyhedral(&self) -> bool {
        self.state_cone.is_polyhedral() && self.effect_cone.is_polyhedral()
    }
}

fn signs_of(kind: &SystemKind, dim: usize) -> Vec<f64> {
    match kind {
        SystemKind::Quantum { factors } => hermitian::basis(factors).transpose_signs.clone(),
        SystemKind::Hybrid { classical, inner } => kron(&vec![1.0; *classical], &signs_of(inner, dim / classical)),
        _ => vec![1.0; dim],
    }
}

fn require_state(sys: &System, s: &[f64], tol: f64) -> Result<()> {
    check_dim(sys.dim(), s.len())?;
    if !sys.state_cone.contains(s, tol)? {
        return Err(Error::validation("state in the state cone", format!("{}: vector is not a state", sys.label)));
    }
    Ok(())
}

/// `⟨u, s⟩ = 1` within `tol`. Errors if `s` is not in the state cone.
pub fn is_causal_state(sys: &System, s: &[f64], tol: f64) -> Result<bool> {
    require_state(sys, s, tol)?;
    Ok((dot(&sys.unit_effect, s) - 1.0).abs() <= tol)
}

/// `⟨u, s⟩ ≤ 1` within `tol`. Errors if `s` is not in the state cone.
pub fn is_subcausal_state(sys: &System, s: &[f64], tol: f64) -> Result<bool> {
    require_state(sys, s, tol)?;
    Ok(dot(&sys.unit_effect, s) <= 1.0 + tol)
}

/// `e ∈ K_A` and `u − e ∈ K_A` within `tol`.
pub fn is_subcausal_effect(sys: &System, e: &[f64], tol: f64) -> Result<bool> {
    check_dim(sys.dim(), e.len())?;
    let rest: RealVector = sys.unit_effect.iter().zip(e).map(|(u, x)| u - x).collect();
    Ok(sys.effect_cone.contains(e, tol)? && sys.effect_cone.contains(&rest, tol)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn qubit() -> System {
        System::new(
            "qubit",
            SystemKind::Quantum { factors: vec![2] },
            Cone::psd(2),
            Cone::psd(2),
            hermitian::identity_coords(&[2]),
        )
        .unwrap()
    }

    pub(crate) fn bit() -> System {
        System::new("bit", SystemKind::Classical { n: 2 }, Cone::orthant(2), Cone::orthant(2), vec![1.0, 1.0]).unwrap()
    }

    #[test]
    fn state_predicates() {
        let q = qubit();
        let mixed: Vec<f64> = hermitian::identity_coords(&[2]).iter().map(|v| v / 2.0).collect();
        assert!(is_causal_state(&q, &mixed, 1e-9).unwrap());
        let half_zero = vec![0.5, 0.0, 0.0, 0.0];
        assert!(is_subcausal_state(&q, &half_zero, 1e-9).unwrap());
        assert!(!is_causal_state(&q, &half_zero, 1e-9).unwrap());
        let b = bit();
        let s = vec![0.3, 0.3];
        assert!(is_subcausal_state(&b, &s, 1e-9).unwrap());
        assert!((dot(&b.unit_effect, &s) - 0.6).abs() < 1e-15);
        assert!(is_causal_state(&b, &[-1.0, 2.0], 1e-9).is_err());
    }

    #[test]
    fn unit_must_be_interior() {
        let r = System::new("bad", SystemKind::Classical { n: 2 }, Cone::orthant(2), Cone::orthant(2), vec![1.0, 0.0]);
        assert!(matches!(r, Err(Error::Validation { .. })));
    }

    #[test]
    fn pairing_violation_is_rejected() {
        let effects = Cone::polyhedral_v(2, vec![vec![1.0, -0.5], vec![0.0, 1.0]]).unwrap();
        let r = System::new("bad", SystemKind::Polyhedral, Cone::orthant(2), effects, vec![1.0, 1.0]);
        assert!(matches!(r, Err(Error::Validation { .. })));
    }

    #[test]
    fn transpose_signs_of_qubit() {
        assert_eq!(qubit().transpose_signs(), vec![1.0, 1.0, 1.0, -1.0]);
        assert_eq!(bit().transpose_signs(), vec![1.0, 1.0]);
    }

    #[test]
    fn no_restriction_for_native_theories() {
        assert!(qubit().satisfies_no_restriction(1e-9).unwrap());
        assert!(bit().satisfies_no_restriction(1e-9).unwrap());
    }
}
