use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BankStrategy, MoneyConfig};
use crate::cone::Cone;
use crate::error::{check_dim, Error, Result};
use crate::gpt::{Ordering, ProcessCone};
use crate::linalg::{dot, kron, normalized, norm, LinearOperator, RealVector};
use crate::solver::{check_slater, solve, verify_solution, ConicProgram, SlaterReport, Solution, Status};

/// `C` with `⟨C, χ⟩ = Σ_i p_i ⟨e_i ⊗ e_i, χ(s_i)⟩` for every process vector.
pub fn build_verification_functional(s: &BankStrategy, pc: &ProcessCone) -> Result<RealVector> {
    check_cone(s, pc)?;
    let mut c = vec![0.0; pc.dim()];
    for it in &s.items {
        let w = pc.evaluation_functional(&it.state, &kron(&it.effect, &it.effect))?;
        crate::linalg::axpy(it.p, &w, &mut c);
    }
    Ok(c)
}

fn check_cone(s: &BankStrategy, pc: &ProcessCone) -> Result<()> {
    let n = s.system.dim();
    check_dim(n, pc.input.dim())?;
    check_dim(n * n, pc.output.dim())
}

/// `sup ⟨C, χ⟩` over `χ ∈ K_A^{AA}` with `u_A − χ*(u_AA)` in the ordering
/// cone, as `b − φ(X) ∈ K1*` with `b = u_A`, `φ(χ) = χ*(u_AA)`.
pub fn counterfeit_program(s: &BankStrategy, pc: &ProcessCone, ordering: Ordering) -> Result<ConicProgram> {
    let c = build_verification_functional(s, pc)?;
    let (na, naa) = (pc.input.dim(), pc.output.dim());
    let sig = pc.input.transpose_signs();
    let u = &pc.output.unit_effect;
    let mut op = LinearOperator::zeros(na, na * naa);
    for a in 0..na {
        for b in 0..naa {
            op.set(a, b * na + a, sig[a] * u[b]);
        }
    }
    let k1 = match ordering {
        Ordering::EffectCone => pc.input.effect_cone.dual(),
        Ordering::DualStateCone => pc.input.state_cone.clone(),
    };
    ConicProgram::new(c, pc.input.unit_effect.clone(), op, k1, pc.cone.clone())
}

/// Optimum of a counterfeiting program with its dual certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterfeitOptimum {
    /// Primal value `⟨C, χ⟩`.
    #[serde(with = "crate::schema::decimal")]
    pub value: f64,
    /// Certified upper bound `⟨u_A, y⟩`.
    #[serde(with = "crate::schema::decimal")]
    pub upper_bound: f64,
    #[serde(with = "crate::schema::decimal_vec")]
    pub chi: RealVector,
    #[serde(with = "crate::schema::decimal_vec")]
    pub y: RealVector,
    pub solution: Solution,
}

fn optimise(s: &BankStrategy, pc: &ProcessCone, ordering: Ordering, cfg: &MoneyConfig) -> Result<CounterfeitOptimum> {
    if pc.dim() > cfg.max_program_dim {
        return Err(Error::Invalid(format!(
            "counterfeiting program has dimension {} (cap {})",
            pc.dim(),
            cfg.max_program_dim
        )));
    }
    let p = counterfeit_program(s, pc, ordering)?;
    let sol = solve(&p, &cfg.solver)?;
    if sol.status != Status::Optimal {
        return Err(Error::Solver(format!(
            "counterfeiting program ended with status {:?} after {} iterations",
            sol.status, sol.iterations
        )));
    }
    if !verify_solution(&p, &sol, cfg.tol)? {
        let defects = crate::solver::optimality_defects(&p, &sol.x, &sol.y, cfg.tol)?;
        return Err(Error::Certificate(defects.join("; ")));
    }
    Ok(CounterfeitOptimum {
        value: sol.primal_value,
        upper_bound: sol.dual_value,
        chi: sol.x.clone(),
        y: sol.y.clone(),
        solution: sol,
    })
}

/// `α_A`: the best physical (subcausal) counterfeiter.
pub fn alpha(s: &BankStrategy, pc: &ProcessCone, cfg: &MoneyConfig) -> Result<CounterfeitOptimum> {
    optimise(s, pc, Ordering::EffectCone, cfg)
}

/// `α̃_A`: subcausality relaxed to the dual of the state cone. The dual
/// optimum `y` lies in the state cone with `⟨u_A, y⟩ = α̃_A`.
pub fn alpha_tilde(s: &BankStrategy, pc: &ProcessCone, cfg: &MoneyConfig) -> Result<CounterfeitOptimum> {
    optimise(s, pc, Ordering::DualStateCone, cfg)
}

/// Draws unit elements of a cone: Gaussian vectors projected onto it where
/// projection is a closed form, and random conic combinations of a few
/// spanning elements otherwise (projection onto tensor cones runs a
/// least-squares solve per sample).
pub(crate) struct ConeSampler<'a> {
    cone: &'a Cone,
    elements: Option<Vec<RealVector>>,
}

impl<'a> ConeSampler<'a> {
    pub(crate) fn new(cone: &'a Cone) -> Result<Self> {
        let cheap = |c: &Cone| matches!(c, Cone::Orthant { .. } | Cone::PsdHermitian { .. });
        let elements = match cone {
            c if cheap(c) => None,
            Cone::Product { parts } if parts.iter().all(cheap) => None,
            c => Some(c.spanning_elements()?.into_iter().filter(|g| norm(g) > 0.0).collect::<Vec<_>>()),
        };
        Ok(ConeSampler { cone, elements })
    }

    pub(crate) fn sample(&self, rng: &mut ChaCha8Rng) -> Result<RealVector> {
        match &self.elements {
            Some(gens) if !gens.is_empty() => {
                let k = rng.gen_range(1..=gens.len().min(4));
                let mut x = vec![0.0; self.cone.dim()];
                for _ in 0..k {
                    let g = &gens[rng.gen_range(0..gens.len())];
                    let w = -rng.gen_range(f64::EPSILON..1.0f64).ln();
                    x.iter_mut().zip(g).for_each(|(xi, gi)| *xi += w * gi / norm(g));
                }
                if norm(&x) > 1e-12 {
                    return Ok(normalized(&x));
                }
                Ok(normalized(&self.cone.interior_point()?))
            }
            _ => {
                for _ in 0..16 {
                    let g: RealVector = (0..self.cone.dim()).map(|_| rng.sample(StandardNormal)).collect();
                    let p = self.cone.project(&g)?;
                    if norm(&p) > 1e-12 {
                        return Ok(normalized(&p));
                    }
                }
                Ok(normalized(&self.cone.interior_point()?))
            }
        }
    }
}

/// The normalised dual functional `Y = χ ↦ ⟨u_AA, χ(y)⟩ / α̃`.
///
/// Checks that `y / α̃` is a causal state and that `α̃⟨Y, ξ⟩ ≥ ⟨C, ξ⟩`
/// on `cfg.samples` random unit elements `ξ` of the process cone.
pub fn normalised_y(
    s: &BankStrategy,
    pc: &ProcessCone,
    y: &[f64],
    alpha_tilde: f64,
    cfg: &MoneyConfig,
) -> Result<RealVector> {
    if !(alpha_tilde > 0.0) {
        return Err(Error::Invalid("α̃ must be positive".into()));
    }
    check_dim(pc.input.dim(), y.len())?;
    let sys = &pc.input;
    if !sys.state_cone.contains(y, cfg.tol)? {
        return Err(Error::Certificate("dual point is not in the state cone".into()));
    }
    let w = dot(&sys.unit_effect, y) / alpha_tilde;
    if (w - 1.0).abs() > cfg.tol {
        return Err(Error::Certificate(format!("y/α̃ is not causal: ⟨u, y⟩/α̃ = {}", w)));
    }
    let yf: RealVector = pc
        .evaluation_functional(y, &pc.output.unit_effect)?
        .iter()
        .map(|v| v / alpha_tilde)
        .collect();
    let c = build_verification_functional(s, pc)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.solver.seed);
    let sampler = ConeSampler::new(&pc.cone)?;
    for _ in 0..cfg.samples {
        let xi = sampler.sample(&mut rng)?;
        let slack = alpha_tilde * dot(&yf, &xi) - dot(&c, &xi);
        if slack < -cfg.tol {
            return Err(Error::Certificate(format!("α̃⟨Y, ξ⟩ − ⟨C, ξ⟩ = {:e} on a sampled process", slack)));
        }
    }
    Ok(yf)
}

/// `max_i p_i` (lowest index on ties) and the counterfeiter that discards
/// the note and prepares `s_i ⊗ s_i`.
pub fn trivial_lower_bound(s: &BankStrategy, pc: &ProcessCone, tol: f64) -> Result<(f64, RealVector)> {
    let mut best = 0;
    for (i, it) in s.items.iter().enumerate() {
        if it.p > s.items[best].p {
            best = i;
        }
    }
    let si = &s.items[best].state;
    let chi = pc.prepare_and_discard(&kron(si, si))?;
    let value = dot(&build_verification_functional(s, pc)?, &chi);
    let pmax = s.items[best].p;
    if value < pmax - tol {
        return Err(Error::Certificate(format!(
            "trivial counterfeiter achieves {} < max p_i = {}",
            value, pmax
        )));
    }
    Ok((pmax, chi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecurityReport {
    #[serde(with = "crate::schema::decimal")]
    pub alpha: f64,
    #[serde(with = "crate::schema::decimal")]
    pub alpha_tilde: f64,
    /// Certified upper bound on `α̃` (dual value).
    #[serde(with = "crate::schema::decimal")]
    pub alpha_tilde_bound: f64,
    #[serde(with = "crate::schema::decimal_vec")]
    pub chi_opt: RealVector,
    #[serde(with = "crate::schema::decimal_vec")]
    pub chi_tilde: RealVector,
    #[serde(with = "crate::schema::decimal_vec")]
    pub y_cert: RealVector,
    /// Largest duality gap of the two programs.
    #[serde(with = "crate::schema::decimal")]
    pub gap: f64,
    pub slater: SlaterReport,
    #[serde(with = "crate::schema::decimal")]
    pub lower_bound: f64,
    pub alpha_iterations: usize,
    pub alpha_tilde_iterations: usize,
}

impl SecurityReport {
    /// `lower ≤ α + tol ≤ α̃ + 2tol ≤ 1 + 3tol`.
    pub fn sandwich_holds(&self, tol: f64) -> bool {
        self.lower_bound <= self.alpha + tol
            && self.alpha <= self.alpha_tilde + tol
            && self.alpha_tilde <= 1.0 + tol
    }
}

/// α, α̃, the normalised dual certificate, the trivial lower bound and the
/// Slater status of the α̃ program.
pub fn analyse(s: &BankStrategy, pc: &ProcessCone, cfg: &MoneyConfig) -> Result<SecurityReport> {
    let a = alpha(s, pc, cfg)?;
    let at = alpha_tilde(s, pc, cfg)?;
    normalised_y(s, pc, &at.y, at.value, cfg)?;
    let (lower, _) = trivial_lower_bound(s, pc, cfg.tol)?;
    let slater = check_slater(&counterfeit_program(s, pc, Ordering::DualStateCone)?, cfg.slater_margin)?;
    let report = SecurityReport {
        alpha: a.value,
        alpha_tilde: at.value,
        alpha_tilde_bound: at.upper_bound,
        chi_opt: a.chi,
        chi_tilde: at.chi,
        y_cert: at.y,
        gap: a.solution.gap.max(at.solution.gap),
        slater,
        lower_bound: lower,
        alpha_iterations: a.solution.iterations,
        alpha_tilde_iterations: at.solution.iterations,
    };
    if !report.sandwich_holds(cfg.tol) {
        return Err(Error::Certificate(format!(
            "bounds out of order: lower {} α {} α̃ {}",
            report.lower_bound, report.alpha, report.alpha_tilde
        )));
    }
    Ok(report)
}
