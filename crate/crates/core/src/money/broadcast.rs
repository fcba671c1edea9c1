use serde::{Deserialize, Serialize};

use super::{alpha, BankStrategy, MoneyConfig};
use crate::cone::{hermitian, Cone};
use crate::error::{check_dim, Error, Result};
use crate::gpt::{marginalise_dims, ProcessCone};
use crate::linalg::{dot, LinearOperator, RealVector};
use crate::solver::{solve, verify_infeasibility, ConicProgram, Status};

/// Verification sharpness per effect: whether `e_i` accepts `s_i` and no
/// other normalised state with certainty.
///
/// For each `i`, every coordinate is maximised and minimised over the face
/// `{s ∈ K^A : ⟨u, s⟩ ≤ 1, ⟨e_i, s⟩ ≥ 1}`; the face is the single point
/// `s_i` iff all optima agree with `s_i`.
pub fn check_vs(s: &BankStrategy, cfg: &MoneyConfig) -> Result<Vec<bool>> {
    let sys = &s.system;
    let n = sys.dim();
    if let Cone::PsdHermitian { factors } = &sys.state_cone {
        let id = hermitian::identity_coords(factors);
        if id.iter().zip(&sys.unit_effect).all(|(a, b)| (a - b).abs() <= cfg.tol) {
            return check_vs_spectral(s, factors, cfg);
        }
    }
    let mut out = Vec::with_capacity(s.len());
    for (i, it) in s.items.iter().enumerate() {
        let neg_e: RealVector = it.effect.iter().map(|v| -v).collect();
        let op = LinearOperator::from_rows(&[sys.unit_effect.clone(), neg_e], n)?;
        let mut sharp = true;
        'coords: for j in 0..n {
            for sign in [1.0, -1.0] {
                let mut c = vec![0.0; n];
                c[j] = sign;
                let p = ConicProgram::new(c, vec![1.0, -1.0], op.clone(), Cone::orthant(2), sys.state_cone.clone())?;
                let sol = solve(&p, &cfg.solver)?;
                match sol.status {
                    Status::Optimal => {}
                    Status::PrimalInfeasible => {
                        return Err(Error::validation(
                            "perfect acceptance ⟨e_i, s_i⟩ = 1",
                            format!("no normalised state is accepted with certainty by e_{}", i + 1),
                        ))
                    }
                    other => {
                        return Err(Error::Solver(format!("sharpness program ended with status {:?}", other)))
                    }
                }
                if (sol.primal_value - sign * it.state[j]).abs() > cfg.tol.sqrt() {
                    sharp = false;
                    break 'coords;
                }
            }
        }
        out.push(sharp);
    }
    Ok(out)
}

/// On density operators the accepted face is the set of states supported
/// on the eigenvalue-one eigenspace of `e_i`, a single point iff that
/// eigenspace is a line. The coordinate programs above have no strictly
/// feasible point there, which splitting handles badly.
fn check_vs_spectral(s: &BankStrategy, factors: &[usize], cfg: &MoneyConfig) -> Result<Vec<bool>> {
    let fuzz = cfg.tol.sqrt();
    s.items
        .iter()
        .enumerate()
        .map(|(i, it)| {
            let top = hermitian::eigenvalues(factors, &it.effect)
                .into_iter()
                .filter(|&l| l >= 1.0 - fuzz)
                .count();
            if top == 0 {
                return Err(Error::validation(
                    "perfect acceptance ⟨e_i, s_i⟩ = 1",
                    format!("no normalised state is accepted with certainty by e_{}", i + 1),
                ));
            }
            Ok(top == 1)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BroadcastReport {
    pub feasible: bool,
    /// A broadcasting map, when one exists.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::schema::decimal_opt_vec")]
    pub map: Option<RealVector>,
    /// A dual functional proving that none exists.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::schema::decimal_opt_vec")]
    pub certificate: Option<RealVector>,
    pub iterations: usize,
}

/// Rows of the linear map `χ ↦ marginal_k(χ(s))` for `k ∈ {0, 1}`.
fn marginal_rows(pc: &ProcessCone, s: &[f64], keep: usize) -> Vec<RealVector> {
    let na = pc.input.dim();
    let u = &pc.input.unit_effect;
    let sig = pc.input.transpose_signs();
    let mut rows = vec![vec![0.0; pc.dim()]; na];
    for (c, row) in rows.iter_mut().enumerate() {
        for other in 0..na {
            let b = if keep == 0 { c * na + other } else { other * na + c };
            for a in 0..na {
                row[b * na + a] = u[other] * sig[a] * s[a];
            }
        }
    }
    rows
}

/// Looks for a subcausal `B ∈ K_A^{AA}` whose two marginals reproduce
/// every listed state.
pub fn check_broadcastable(states: &[RealVector], pc: &ProcessCone, cfg: &MoneyConfig) -> Result<BroadcastReport> {
    let sys = &pc.input;
    let na = sys.dim();
    check_dim(na * na, pc.output.dim())?;
    for (i, s) in states.iter().enumerate() {
        check_dim(na, s.len())?;
        if !crate::gpt::is_causal_state(sys, s, cfg.tol)? {
            return Err(Error::validation("causal states ⟨u, s_i⟩ = 1", format!("state {} is not causal", i + 1)));
        }
    }
    // Subcausality rows: χ*(u_AA).
    let u_out = &pc.output.unit_effect;
    let sig = sys.transpose_signs();
    let mut rows: Vec<RealVector> = (0..na)
        .map(|a| {
            let mut r = vec![0.0; pc.dim()];
            for (b, ub) in u_out.iter().enumerate() {
                r[b * na + a] = sig[a] * ub;
            }
            r
        })
        .collect();
    let mut rhs = sys.unit_effect.clone();
    for s in states {
        for keep in 0..2 {
            rows.extend(marginal_rows(pc, s, keep));
            rhs.extend_from_slice(s);
        }
    }
    let n_eq = rhs.len() - na;
    let op = LinearOperator::from_rows(&rows, pc.dim())?;
    let k1 = Cone::product(vec![sys.effect_cone.dual(), Cone::free(n_eq)]);
    let p = ConicProgram::new(vec![0.0; pc.dim()], rhs, op, k1, pc.cone.clone())?;
    let sol = solve(&p, &cfg.solver)?;
    match sol.status {
        Status::Optimal => Ok(BroadcastReport {
            feasible: true,
            map: Some(sol.x),
            certificate: None,
            iterations: sol.iterations,
        }),
        Status::PrimalInfeasible => {
            if !verify_infeasibility(&p, &sol.y, cfg.tol)? {
                return Err(Error::Certificate("broadcast infeasibility certificate failed to verify".into()));
            }
            Ok(BroadcastReport {
                feasible: false,
                map: None,
                certificate: Some(sol.y),
                iterations: sol.iterations,
            })
        }
        other => Err(Error::Solver(format!("broadcast program ended with status {:?}", other))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    #[serde(with = "crate::schema::decimal")]
    pub alpha: f64,
    /// `α ≥ 1 − tol`.
    pub perfect_counterfeiting: bool,
    pub broadcastable: bool,
    /// Whether the two verdicts agree.
    pub consistent: bool,
    /// `max_i ⟨u − e_i, marginal of B(s_i)⟩` for the broadcasting map, when
    /// one exists.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::schema::decimal_opt")]
    pub rejection_mass: Option<f64>,
}

/// Perfect counterfeiting versus broadcastability for a sharp strategy.
pub fn wnc_broadcast_equivalence(s: &BankStrategy, pc: &ProcessCone, cfg: &MoneyConfig) -> Result<EquivalenceReport> {
    let vs = check_vs(s, cfg)?;
    if let Some(i) = vs.iter().position(|v| !v) {
        return Err(Error::validation(
            "verification sharpness",
            format!("effect e_{} does not single out its state", i + 1),
        ));
    }
    let a = alpha(s, pc, cfg)?;
    let b = check_broadcastable(&s.states(), pc, cfg)?;
    let perfect = !cfg.strictly_below_one(a.value) || a.value >= 1.0 - cfg.tol;
    let rejection_mass = match &b.map {
        Some(map) => {
            let mut worst = f64::NEG_INFINITY;
            for it in &s.items {
                let out = pc.apply(map, &it.state)?;
                let u = &s.system.unit_effect;
                let m = marginalise_dims(&[u.len(), u.len()], &[u, u], &out, 0)?;
                let rest: RealVector = s.system.unit_effect.iter().zip(&it.effect).map(|(u, e)| u - e).collect();
                worst = worst.max(dot(&rest, &m));
            }
            Some(worst)
        }
        None => None,
    };
    Ok(EquivalenceReport {
        alpha: a.value,
        perfect_counterfeiting: perfect,
        broadcastable: b.feasible,
        consistent: perfect == b.feasible,
        rejection_mass,
    })
}
