use serde::{Deserialize, Serialize};

use super::{alpha, alpha_tilde, build_verification_functional, BankStrategy, MoneyConfig, StrategyItem};
use crate::error::{Error, Result};
use crate::gpt::{compose_systems, is_causal_state, is_subcausal_process, CompositeRule, Ordering, ProcessCone};
use crate::linalg::{dot, kron, rank_of_rows, RealVector};

/// Half `s`, half the basis states each paired with the discarding effect.
pub fn make_spanning(s: &BankStrategy, basis: &[RealVector], tol: f64) -> Result<BankStrategy> {
    let sys = &s.system;
    let n = sys.dim();
    for (i, b) in basis.iter().enumerate() {
        crate::error::check_dim(n, b.len())?;
        if !is_causal_state(sys, b, tol)? {
            return Err(Error::validation("causal states ⟨u, s_i⟩ = 1", format!("basis state {} is not causal", i + 1)));
        }
    }
    if rank_of_rows(basis, n, 1e-9) < n {
        return Err(Error::Invalid(format!(
            "basis has rank {} but the state space has dimension {}",
            rank_of_rows(basis, n, 1e-9),
            n
        )));
    }
    let m = basis.len() as f64;
    let mut items: Vec<StrategyItem> = s
        .items
        .iter()
        .map(|it| StrategyItem::new(it.p / 2.0, it.state.clone(), it.effect.clone()))
        .collect();
    items.extend(basis.iter().map(|b| StrategyItem::new(0.5 / m, b.clone(), sys.unit_effect.clone())));
    let mixed = BankStrategy::new(sys.clone(), items, tol)?;
    debug_assert!(mixed.is_spanning());
    Ok(mixed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    #[serde(with = "crate::schema::decimal")]
    pub alpha_original: f64,
    #[serde(with = "crate::schema::decimal")]
    pub alpha_mixed: f64,
    /// `(α_original + 1) / 2`.
    #[serde(with = "crate::schema::decimal")]
    pub bound: f64,
    pub spanning: bool,
    pub holds: bool,
}

/// Mixes `s` with `basis` and checks `α(mixed) ≤ (α(s) + 1)/2`.
pub fn check_spanning_bound(s: &BankStrategy, basis: &[RealVector], pc: &ProcessCone, cfg: &MoneyConfig) -> Result<MixingReport> {
    let mixed = make_spanning(s, basis, cfg.tol)?;
    let a = alpha(s, pc, cfg)?.value;
    let am = alpha(&mixed, pc, cfg)?.value;
    let bound = (a + 1.0) / 2.0;
    Ok(MixingReport {
        alpha_original: a,
        alpha_mixed: am,
        bound,
        spanning: mixed.is_spanning(),
        holds: am <= bound + cfg.tol,
    })
}

/// Independent sampling from both strategies: items `(p_i q_j, s_i ⊗ t_j,
/// e_i ⊗ f_j)` on the composite system.
pub fn product_strategy(sa: &BankStrategy, sb: &BankStrategy, rule: CompositeRule, tol: f64) -> Result<BankStrategy> {
    let ab = compose_systems(&[sa.system.clone(), sb.system.clone()], rule)?;
    BankStrategy::new(ab.system, product_items(sa, sb), tol)
}

fn product_items(sa: &BankStrategy, sb: &BankStrategy) -> Vec<StrategyItem> {
    let mut items = Vec::with_capacity(sa.len() * sb.len());
    for a in &sa.items {
        for b in &sb.items {
            items.push(StrategyItem::new(a.p * b.p, kron(&a.state, &b.state), kron(&a.effect, &b.effect)));
        }
    }
    // The product of two normalised distributions may drift by an ulp.
    let total: f64 = items.iter().map(|i| i.p).sum();
    for it in &mut items {
        it.p /= total;
    }
    items
}

/// One plug-in of the composition argument: `χ_AB` with a map `D` fed into
/// and read out of the `B` wires.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PluggedProcess {
    /// `"C_B"` or `"Y_B"`.
    pub name: String,
    /// `⟨C_A, χ_A^D⟩`.
    #[serde(with = "crate::schema::decimal")]
    pub value: f64,
    pub in_process_cone: bool,
    pub subcausal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductReport {
    #[serde(with = "crate::schema::decimal")]
    pub alpha_ab: f64,
    /// Certified upper bound on `α_AB`.
    #[serde(with = "crate::schema::decimal")]
    pub alpha_ab_bound: f64,
    #[serde(with = "crate::schema::decimal")]
    pub alpha_tilde_a: f64,
    #[serde(with = "crate::schema::decimal")]
    pub alpha_tilde_b: f64,
    /// `α̃_A · α̃_B`.
    #[serde(with = "crate::schema::decimal")]
    pub product_bound: f64,
    pub holds: bool,
    pub plugged: Vec<PluggedProcess>,
    pub iterations: usize,
}

/// `χ_A^D(s) = Σ_j w_j (id ⊗ g_j ⊗ id ⊗ g_j) χ_AB(s ⊗ t_j)`.
fn plug_b(
    pc_ab: &ProcessCone,
    chi_ab: &[f64],
    pc_a: &ProcessCone,
    na: usize,
    nb: usize,
    terms: &[(f64, &[f64], &[f64])],
) -> Result<RealVector> {
    let m = pc_ab.to_matrix(chi_ab)?;
    let mut md = nalgebra::DMatrix::zeros(na * na, na);
    for &(w, t, g) in terms {
        for a1 in 0..na {
            for a2 in 0..na {
                for a in 0..na {
                    let mut acc = 0.0;
                    for b1 in 0..nb {
                        for b2 in 0..nb {
                            let row = ((a1 * nb + b1) * na + a2) * nb + b2;
                            let gg = g[b1] * g[b2];
                            if gg == 0.0 {
                                continue;
                            }
                            for (b, tb) in t.iter().enumerate() {
                                acc += gg * tb * m[(row, a * nb + b)];
                            }
                        }
                    }
                    md[(a1 * na + a2, a)] += w * acc;
                }
            }
        }
    }
    pc_a.from_matrix(&md)
}

/// Solves `α_AB` for the product strategy, compares it with `α̃_A α̃_B`,
/// and plugs `C_B` and `Y_B` into the optimal `χ_AB` to check that each
/// yields a physical counterfeiter on `A`.
pub fn verify_product_bound(
    sa: &BankStrategy,
    pc_a: &ProcessCone,
    sb: &BankStrategy,
    pc_b: &ProcessCone,
    pc_ab: &ProcessCone,
    cfg: &MoneyConfig,
) -> Result<ProductReport> {
    let (na, nb) = (sa.system.dim(), sb.system.dim());
    let sab = BankStrategy::new(pc_ab.input.clone(), product_items(sa, sb), cfg.tol)?;
    let at_a = alpha_tilde(sa, pc_a, cfg)?;
    let at_b = alpha_tilde(sb, pc_b, cfg)?;
    let ab = alpha(&sab, pc_ab, cfg)?;
    let product_bound = at_a.upper_bound * at_b.upper_bound;

    let c_a = build_verification_functional(sa, pc_a)?;
    let mut plugged = Vec::new();
    let c_terms: Vec<(f64, &[f64], &[f64])> = sb
        .items
        .iter()
        .map(|it| (it.p, it.state.as_slice(), it.effect.as_slice()))
        .collect();
    let y_state: RealVector = at_b.y.iter().map(|v| v / at_b.value).collect();
    let u_b = sb.system.unit_effect.clone();
    let y_terms: Vec<(f64, &[f64], &[f64])> = vec![(1.0, y_state.as_slice(), u_b.as_slice())];
    for (name, terms) in [("C_B", &c_terms), ("Y_B", &y_terms)] {
        let v = plug_b(pc_ab, &ab.chi, pc_a, na, nb, terms)?;
        let scale = 1.0 + v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        plugged.push(PluggedProcess {
            name: name.into(),
            value: dot(&c_a, &v),
            in_process_cone: pc_a.contains(&v, cfg.tol * scale)?,
            subcausal: is_subcausal_process(pc_a, &v, Ordering::EffectCone, cfg.tol * scale)?,
        });
    }
    Ok(ProductReport {
        alpha_ab: ab.value,
        alpha_ab_bound: ab.upper_bound,
        alpha_tilde_a: at_a.value,
        alpha_tilde_b: at_b.value,
        product_bound,
        holds: ab.value <= product_bound + cfg.tol,
        plugged,
        iterations: ab.solution.iterations,
    })
}

/// Smallest `n` with `α̃ⁿ ≤ δ`.
pub fn repetition_count(alpha_tilde: f64, delta: f64) -> Result<usize> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Invalid(format!("δ must lie in (0, 1), got {}", delta)));
    }
    if !(alpha_tilde > 0.0) {
        return Err(Error::Invalid(format!("α̃ must be positive, got {}", alpha_tilde)));
    }
    if alpha_tilde >= 1.0 {
        return Err(Error::Invalid(
            "no security amplification possible: α̃ = 1, so perfect counterfeiting is possible".into(),
        ));
    }
    let mut n = (delta.ln() / alpha_tilde.ln()).ceil().max(1.0) as usize;
    // Guard against rounding in the logarithms.
    while n > 1 && alpha_tilde.powi(n as i32 - 1) <= delta {
        n -= 1;
    }
    while alpha_tilde.powi(n as i32) > delta {
        n += 1;
    }
    Ok(n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionReport {
    #[serde(with = "crate::schema::decimal")]
    pub alpha_tilde: f64,
    /// Certified upper bound on `α̃` used for the count.
    #[serde(with = "crate::schema::decimal")]
    pub alpha_tilde_bound: f64,
    #[serde(with = "crate::schema::decimal")]
    pub delta: f64,
    pub n: usize,
    /// `(α̃ bound)ⁿ`, an upper bound on forging `n` notes at once.
    #[serde(with = "crate::schema::decimal")]
    pub certified_bound: f64,
}

/// Number of independent notes needed so that forging succeeds with
/// probability at most `δ`.
pub fn repetition_security(s: &BankStrategy, pc: &ProcessCone, delta: f64, cfg: &MoneyConfig) -> Result<RepetitionReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Invalid(format!("δ must lie in (0, 1), got {}", delta)));
    }
    let at = alpha_tilde(s, pc, cfg)?;
    let bound = at.upper_bound.max(at.value);
    if !cfg.strictly_below_one(bound) {
        return Err(Error::Invalid(format!(
            "no security amplification possible: α̃ = {:.9} is not below 1, so perfect counterfeiting is possible",
            at.value
        )));
    }
    let n = repetition_count(bound, delta)?;
    Ok(RepetitionReport {
        alpha_tilde: at.value,
        alpha_tilde_bound: bound,
        delta,
        n,
        certified_bound: bound.powi(n as i32),
    })
}
