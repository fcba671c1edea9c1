//! Cone programs in the standard form
//!
//! ```text
//! primal:  sup { ⟨C, X⟩ : b − φ(X) ∈ K1*, X ∈ K2 }
//! dual:    inf { ⟨b, y⟩ : φ*(y) − C ∈ K2*, y ∈ K1 }
//! ```
//!
//! Programs whose cones are all polyhedral go through a dense simplex
//! method; everything else through operator splitting on the homogeneous
//! self-dual embedding, which only needs the projection oracles of
//! [`crate::cone`].

mod brute;
mod lp;
pub(crate) mod simplex;
mod slater;
mod splitting;

pub use brute::{brute_force_polyhedral, BRUTE_FORCE_MAX_DIM};
pub use slater::{check_slater, check_slater_with, SlaterReport};

use serde::{Deserialize, Serialize};

use crate::cone::Cone;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, sub, LinearOperator, RealVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConicProgram {
    /// Objective `C`.
    #[serde(with = "crate::schema::decimal_vec")]
    pub objective: RealVector,
    /// Right-hand side `b`.
    #[serde(with = "crate::schema::decimal_vec")]
    pub rhs: RealVector,
    /// The linear map `φ`.
    pub operator: LinearOperator,
    /// `K1`; the slack `b − φ(X)` lives in its dual.
    pub k1: Cone,
    /// `K2`, the cone of the variable `X`.
    pub k2: Cone,
}

impl ConicProgram {
    pub fn new(
        objective: RealVector,
        rhs: RealVector,
        operator: LinearOperator,
        k1: Cone,
        k2: Cone,
    ) -> Result<Self> {
        let p = Self {
            objective,
            rhs,
            operator,
            k1,
            k2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_dim(self.operator.cols(), self.objective.len())?;
        check_dim(self.k2.dim(), self.objective.len())?;
        check_dim(self.operator.rows(), self.rhs.len())?;
        check_dim(self.k1.dim(), self.rhs.len())?;
        if !crate::linalg::is_finite(&self.objective) || !crate::linalg::is_finite(&self.rhs) {
            return Err(Error::Invalid("program data must be finite".into()));
        }
        Ok(())
    }

    pub fn primal_dim(&self) -> usize {
        self.objective.len()
    }

    pub fn dual_dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_polyhedral(&self) -> bool {
        self.k1.is_polyhedral() && self.k2.is_polyhedral()
    }

    /// The dual written again in primal form:
    /// `sup {⟨−b, y⟩ : −C − (−φ*)(y) ∈ K2*, y ∈ K1}`, whose value is the
    /// negated dual value.
    pub fn dual_as_primal(&self) -> ConicProgram {
        ConicProgram {
            objective: self.rhs.iter().map(|v| -v).collect(),
            rhs: self.objective.iter().map(|v| -v).collect(),
            operator: self.operator.transpose().scaled(-1.0),
            k1: self.k2.clone(),
            k2: self.k1.clone(),
        }
    }

    /// Primal slack `b − φ(X)`.
    pub fn primal_slack(&self, x: &[f64]) -> Result<RealVector> {
        Ok(sub(&self.rhs, &self.operator.apply(x)?))
    }

    /// Dual slack `φ*(y) − C`.
    pub fn dual_slack(&self, y: &[f64]) -> Result<RealVector> {
        Ok(sub(&self.operator.apply_adjoint(y)?, &self.objective))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    /// `y` holds a Farkas ray: `y ∈ K1`, `φ*(y) ∈ K2*`, `⟨b, y⟩ = −1`.
    PrimalInfeasible,
    /// `X` holds an improving ray: `X ∈ K2`, `−φ(X) ∈ K1*`, `⟨C, X⟩ = 1`.
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Pick simplex for all-polyhedral programs, splitting otherwise.
    Auto,
    Splitting,
    Simplex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    #[serde(with = "crate::schema::decimal")]
    pub eps_abs: f64,
    #[serde(with = "crate::schema::decimal")]
    pub eps_rel: f64,
    /// Threshold for accepting an infeasibility or unboundedness ray.
    #[serde(with = "crate::schema::decimal")]
    pub eps_infeas: f64,
    pub max_iter: usize,
    /// Ruiz equilibration of `φ` before splitting.
    pub scaling: bool,
    /// Seed for the randomised checks layered on top of the solver. The
    /// solver itself is deterministic.
    pub seed: u64,
    pub method: Method,
    /// Record an iterate sample every this many iterations (0 = off).
    pub trace_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            eps_abs: 1e-8,
            eps_rel: 1e-8,
            eps_infeas: 1e-7,
            max_iter: 200_000,
            scaling: true,
            seed: 0,
            method: Method::Auto,
            trace_every: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eps_abs > 0.0 && self.eps_rel > 0.0 && self.eps_infeas > 0.0) {
            return Err(Error::Invalid("solver tolerances must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::Invalid("max_iter must be at least 1".into()));
        }
        Ok(())
    }

    /// Tolerance used when deciding optimality of a value `v`.
    pub fn threshold(&self, v: f64) -> f64 {
        self.eps_abs + self.eps_rel * (1.0 + v.abs())
    }
}

/// A sampled iterate of the splitting method, unscaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterateSample {
    pub iteration: usize,
    #[serde(with = "crate::schema::decimal")]
    pub primal_value: f64,
    #[serde(with = "crate::schema::decimal")]
    pub dual_value: f64,
    #[serde(with = "crate::schema::decimal")]
    pub primal_residual: f64,
    #[serde(with = "crate::schema::decimal")]
    pub dual_residual: f64,
    /// `‖X‖` and `‖y‖`, which bound how far weak duality may be off for an
    /// approximately feasible pair.
    #[serde(with = "crate::schema::decimal")]
    pub x_norm: f64,
    #[serde(with = "crate::schema::decimal")]
    pub y_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    #[serde(with = "crate::schema::decimal_vec")]
    pub x: RealVector,
    #[serde(with = "crate::schema::decimal_vec")]
    pub y: RealVector,
    #[serde(with = "crate::schema::decimal")]
    pub primal_value: f64,
    #[serde(with = "crate::schema::decimal")]
    pub dual_value: f64,
    #[serde(with = "crate::schema::decimal")]
    pub gap: f64,
    pub status: Status,
    pub iterations: usize,
    #[serde(with = "crate::schema::decimal")]
    pub primal_residual: f64,
    #[serde(with = "crate::schema::decimal")]
    pub dual_residual: f64,
    pub method: Method,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<IterateSample>,
}

impl Solution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

/// Solve the program and its dual.
pub fn solve(p: &ConicProgram, cfg: &SolverConfig) -> Result<Solution> {
    p.validate()?;
    cfg.validate()?;
    let method = match cfg.method {
        Method::Auto if p.is_polyhedral() => Method::Simplex,
        Method::Auto => Method::Splitting,
        m => m,
    };
    match method {
        Method::Simplex => lp::solve_polyhedral(p, cfg),
        _ => splitting::solve(p, cfg),
    }
}

/// Independent re-check of an optimal solution: all four cone residuals,
/// the gap, and weak duality.
pub fn verify_solution(p: &ConicProgram, s: &Solution, tol: f64) -> Result<bool> {
    check_dim(p.primal_dim(), s.x.len())?;
    check_dim(p.dual_dim(), s.y.len())?;
    if s.status != Status::Optimal {
        return Ok(false);
    }
    Ok(optimality_defects(p, &s.x, &s.y, tol)?.is_empty())
}

/// Lists the optimality conditions that fail at tolerance `tol`.
pub fn optimality_defects(p: &ConicProgram, x: &[f64], y: &[f64], tol: f64) -> Result<Vec<String>> {
    let mut defects = Vec::new();
    if !p.k2.contains(x, tol)? {
        defects.push("X outside K2".to_string());
    }
    if !p.k1.dual().contains(&p.primal_slack(x)?, tol)? {
        defects.push("b − φ(X) outside K1*".to_string());
    }
    if !p.k1.contains(y, tol)? {
        defects.push("y outside K1".to_string());
    }
    if !p.k2.dual().contains(&p.dual_slack(y)?, tol)? {
        defects.push("φ*(y) − C outside K2*".to_string());
    }
    let pv = dot(&p.objective, x);
    let dv = dot(&p.rhs, y);
    let scale = 1.0 + pv.abs().max(dv.abs());
    if pv > dv + tol * scale {
        defects.push(format!("weak duality violated: {} > {}", pv, dv));
    }
    if (pv - dv).abs() > tol * scale {
        defects.push(format!("duality gap {} exceeds tolerance", (pv - dv).abs()));
    }
    Ok(defects)
}

/// Checks a primal infeasibility certificate `y`: `y ∈ K1`, `φ*(y) ∈ K2*`
/// and `⟨b, y⟩ < 0`, all at tolerance `tol` relative to `|⟨b, y⟩|`.
pub fn verify_infeasibility(p: &ConicProgram, y: &[f64], tol: f64) -> Result<bool> {
    check_dim(p.dual_dim(), y.len())?;
    let by = dot(&p.rhs, y);
    if by >= 0.0 || !by.is_finite() {
        return Ok(false);
    }
    let y: RealVector = y.iter().map(|v| v / -by).collect();
    Ok(p.k1.contains(&y, tol)? && p.k2.dual().contains(&p.operator.apply_adjoint(&y)?, tol)?)
}

/// Checks an unboundedness ray `X`: `X ∈ K2`, `−φ(X) ∈ K1*`, `⟨C, X⟩ > 0`.
pub fn verify_unbounded_ray(p: &ConicProgram, x: &[f64], tol: f64) -> Result<bool> {
    check_dim(p.primal_dim(), x.len())?;
    let cx = dot(&p.objective, x);
    if cx <= 0.0 || !cx.is_finite() {
        return Ok(false);
    }
    let x: RealVector = x.iter().map(|v| v / cx).collect();
    let phix: RealVector = p.operator.apply(&x)?.iter().map(|v| -v).collect();
    Ok(p.k2.contains(&x, tol)? && p.k1.dual().contains(&phix, tol)?)
}

pub(crate) fn finish(
    p: &ConicProgram,
    x: RealVector,
    y: RealVector,
    status: Status,
    iterations: usize,
    method: Method,
    trace: Vec<IterateSample>,
) -> Result<Solution> {
    let primal_value = dot(&p.objective, &x);
    let dual_value = dot(&p.rhs, &y);
    let (pres, dres) = if status == Status::Optimal {
        (
            p.k1.dual().distance(&p.primal_slack(&x)?)?,
            p.k2.dual().distance(&p.dual_slack(&y)?)?,
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(Solution {
        gap: (primal_value - dual_value).abs(),
        x,
        y,
        primal_value,
        dual_value,
        status,
        iterations,
        primal_residual: pres,
        dual_residual: dres,
        method,
        trace,
    })
}

pub(crate) fn infinity_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn one_d_lp() -> ConicProgram {
        // maximise x  s.t.  1 − x ≥ 0, x ≥ 0
        ConicProgram::new(
            vec![1.0],
            vec![1.0],
            LinearOperator::identity(1),
            Cone::orthant(1),
            Cone::orthant(1),
        )
        .unwrap()
    }

    fn trace_program(d: usize) -> ConicProgram {
        // maximise tr X  s.t.  I − X ⪰ 0, X ⪰ 0
        let n = d * d;
        let id = crate::cone::hermitian::identity_coords(&[d]);
        ConicProgram::new(id.clone(), id, LinearOperator::identity(n), Cone::psd(d), Cone::psd(d))
            .unwrap()
    }

    #[test]
    fn one_d_lp_both_methods() {
        for method in [Method::Simplex, Method::Splitting] {
            let cfg = SolverConfig {
                method,
                ..Default::default()
            };
            let s = solve(&one_d_lp(), &cfg).unwrap();
            assert_eq!(s.status, Status::Optimal, "{:?}", method);
            assert!((s.primal_value - 1.0).abs() < 1e-6);
            assert!((s.y[0] - 1.0).abs() < 1e-6);
            assert!(verify_solution(&one_d_lp(), &s, 1e-6).unwrap());
        }
    }

    #[test]
    fn max_trace_under_identity() {
        let s = solve(&trace_program(2), &SolverConfig::default()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.primal_value - 2.0).abs() < 1e-6, "{}", s.primal_value);
        assert!(verify_solution(&trace_program(2), &s, 1e-6).unwrap());
    }

    #[test]
    fn infeasible_x_is_rejected() {
        let p = one_d_lp();
        let mut s = solve(&p, &SolverConfig::default()).unwrap();
        s.x = vec![2.0];
        assert!(!verify_solution(&p, &s, 1e-6).unwrap());
    }

    #[test]
    fn perturbation_by_ten_tol_is_caught() {
        let p = trace_program(2);
        let tol = 1e-6;
        let s = solve(&p, &SolverConfig::default()).unwrap();
        // X = I is on the boundary of I − X ⪰ 0; pushing further along I violates it.
        let mut bad = s.clone();
        let id = crate::cone::hermitian::identity_coords(&[2]);
        for (xi, di) in bad.x.iter_mut().zip(&id) {
            *xi += 10.0 * tol * di;
        }
        assert!(!verify_solution(&p, &bad, tol).unwrap());
    }

    #[test]
    fn dual_as_primal_negates_value() {
        let p = one_d_lp();
        let d = p.dual_as_primal();
        let s = solve(&d, &SolverConfig::default()).unwrap();
        assert!((s.primal_value + 1.0).abs() < 1e-9);
    }

    #[test]
    fn infeasible_program_yields_certificate() {
        // x ≤ −1 with x ≥ 0.
        let p = ConicProgram::new(
            vec![0.0],
            vec![-1.0],
            LinearOperator::identity(1),
            Cone::orthant(1),
            Cone::orthant(1),
        )
        .unwrap();
        for method in [Method::Simplex, Method::Splitting] {
            let cfg = SolverConfig {
                method,
                ..Default::default()
            };
            let s = solve(&p, &cfg).unwrap();
            assert_eq!(s.status, Status::PrimalInfeasible, "{:?}", method);
            assert!(verify_infeasibility(&p, &s.y, 1e-6).unwrap());
        }
    }

    #[test]
    fn unbounded_program_yields_ray() {
        // maximise x with only x ≥ 0 and a vacuous constraint.
        let p = ConicProgram::new(
            vec![1.0],
            vec![1.0],
            LinearOperator::zeros(1, 1),
            Cone::orthant(1),
            Cone::orthant(1),
        )
        .unwrap();
        for method in [Method::Simplex, Method::Splitting] {
            let cfg = SolverConfig {
                method,
                ..Default::default()
            };
            let s = solve(&p, &cfg).unwrap();
            assert_eq!(s.status, Status::Unbounded, "{:?}", method);
            assert!(verify_unbounded_ray(&p, &s.x, 1e-6).unwrap());
        }
    }

    #[test]
    fn malformed_program_rejected_before_iterating() {
        let r = ConicProgram::new(
            vec![1.0, 2.0],
            vec![1.0],
            LinearOperator::identity(1),
            Cone::orthant(1),
            Cone::orthant(1),
        );
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn splitting_is_deterministic() {
        let cfg = SolverConfig {
            trace_every: 1,
            method: Method::Splitting,
            ..Default::default()
        };
        let a = solve(&trace_program(2), &cfg).unwrap();
        let b = solve(&trace_program(2), &cfg).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                   b.x.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }
}
