//! Bank strategies and the security quantities built on them.
//!
//! A counterfeiter is a process `χ: A → AA`; its success probability
//! against a strategy `{(p_i, s_i, e_i)}` is `Σ_i p_i ⟨e_i ⊗ e_i, χ(s_i)⟩`,
//! which is linear in the process vector of `χ`.

mod analysis;
mod broadcast;
mod product;

pub use analysis::{
    alpha, alpha_tilde, analyse, build_verification_functional, counterfeit_program, normalised_y,
    trivial_lower_bound, CounterfeitOptimum, SecurityReport,
};
pub use broadcast::{check_broadcastable, check_vs, wnc_broadcast_equivalence, BroadcastReport, EquivalenceReport};
pub use product::{
    check_spanning_bound, make_spanning, product_strategy, repetition_count, repetition_security,
    verify_product_bound, MixingReport, PluggedProcess, ProductReport, RepetitionReport,
};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::gpt::{is_subcausal_effect, System};
use crate::linalg::{dot, RealVector};
use crate::solver::SolverConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyItem {
    #[serde(with = "crate::schema::decimal")]
    pub p: f64,
    #[serde(with = "crate::schema::decimal_vec")]
    pub state: RealVector,
    #[serde(with = "crate::schema::decimal_vec")]
    pub effect: RealVector,
}

impl StrategyItem {
    pub fn new(p: f64, state: RealVector, effect: RealVector) -> Self {
        StrategyItem { p, state, effect }
    }
}

/// A validated ensemble `{(p_i, s_i, e_i)}` on one system.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BankStrategy {
    pub system: System,
    pub items: Vec<StrategyItem>,
}

/// Tolerance on `Σ p_i = 1`.
pub const PROBABILITY_SUM_TOL: f64 = 1e-12;

impl BankStrategy {
    pub fn new(system: System, items: Vec<StrategyItem>, tol: f64) -> Result<Self> {
        let s = BankStrategy { system, items };
        s.validate(tol)?;
        Ok(s)
    }

    /// Checks probabilities, causality of the states, subcausality of the
    /// effects and perfect acceptance of honest notes.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if self.items.is_empty() {
            return Err(Error::validation("p_1, …, p_n > 0", "strategy has no items"));
        }
        let sys = &self.system;
        let mut total = 0.0;
        for (i, it) in self.items.iter().enumerate() {
            check_dim(sys.dim(), it.state.len())?;
            check_dim(sys.dim(), it.effect.len())?;
            if !(it.p > 0.0) || !it.p.is_finite() {
                return Err(Error::validation("p_1, …, p_n > 0", format!("p_{} = {}", i + 1, it.p)));
            }
            total += it.p;
            if !sys.state_cone.contains(&it.state, tol)? {
                return Err(Error::validation("s_i is a state", format!("s_{} is outside the state cone", i + 1)));
            }
            let w = dot(&sys.unit_effect, &it.state);
            if (w - 1.0).abs() > tol {
                return Err(Error::validation("causal states ⟨u, s_i⟩ = 1", format!("⟨u, s_{}⟩ = {}", i + 1, w)));
            }
            if !is_subcausal_effect(sys, &it.effect, tol)? {
                return Err(Error::validation(
                    "subcausal effects e_i, u − e_i ∈ K_A",
                    format!("e_{} is not a subcausal effect", i + 1),
                ));
            }
            let acc = dot(&it.effect, &it.state);
            if (acc - 1.0).abs() > tol {
                return Err(Error::validation(
                    "perfect acceptance ⟨e_i, s_i⟩ = 1",
                    format!("⟨e_{0}, s_{0}⟩ = {1}", i + 1, acc),
                ));
            }
        }
        if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(Error::validation(
                "p_1, …, p_n > 0 with Σ p_i = 1",
                format!("probabilities sum to {}", total),
            ));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn states(&self) -> Vec<RealVector> {
        self.items.iter().map(|i| i.state.clone()).collect()
    }

    /// Whether the states span the whole state space.
    pub fn is_spanning(&self) -> bool {
        crate::linalg::rank_of_rows(&self.states(), self.system.dim(), 1e-9) == self.system.dim()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MoneyConfig {
    pub solver: SolverConfig,
    /// Tolerance for certificate re-checks and validation.
    #[serde(with = "crate::schema::decimal")]
    pub tol: f64,
    /// Interior margin for the Slater check.
    #[serde(with = "crate::schema::decimal")]
    pub slater_margin: f64,
    /// Largest process-vector dimension a program may have.
    pub max_program_dim: usize,
    /// Random samples for the dual-certificate inequality check.
    pub samples: usize,
}

impl Default for MoneyConfig {
    fn default() -> Self {
        MoneyConfig {
            solver: SolverConfig::default(),
            tol: 1e-6,
            slater_margin: 1e-6,
            max_program_dim: 8192,
            samples: 100,
        }
    }
}

impl MoneyConfig {
    /// A value counts as `< 1` only below `1 − 10·(solver gap tolerance)`.
    pub fn strictly_below_one(&self, v: f64) -> bool {
        v < 1.0 - 10.0 * self.solver.threshold(1.0)
    }
}
