//! Operator splitting on the homogeneous self-dual embedding.
//!
//! The program is rewritten as `min cᵀx  s.t.  A x + s = b̂, s ∈ K1* × K2`
//! with `A = [φ; −I]`, `b̂ = [b; 0]`, `c = −C` and `x` free, so that
//! `s2 = x` carries the cone constraint on `X` and the dual multiplier
//! `y = (y1, y2) ∈ K1 × K2*` carries `y1 = y` and `y2 = φ*(y) − C`.

use nalgebra::{DMatrix, DVector};

use super::{finish, infinity_norm, ConicProgram, IterateSample, Method, Solution, SolverConfig, Status};
use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, RealVector};

const RELAXATION: f64 = 1.5;
const RUIZ_PASSES: usize = 25;
const SCALE_MIN: f64 = 1e-4;
const SCALE_MAX: f64 = 1e4;

/// Row blocks of a cone: `(length, uniform)`. Orthant blocks may be scaled
/// per coordinate; every other block only by a single positive factor.
fn blocks(c: &Cone, out: &mut Vec<(usize, bool)>) {
    match c {
        Cone::Product { parts } => parts.iter().for_each(|p| blocks(p, out)),
        Cone::Orthant { dim } => out.push((*dim, false)),
        other => out.push((other.dim(), true)),
    }
}

fn uniformise(v: &mut [f64], layout: &[(usize, bool)]) {
    let mut off = 0;
    for &(len, uniform) in layout {
        if uniform && len > 0 {
            let m = v[off..off + len].iter().copied().fold(0.0f64, f64::max);
            v[off..off + len].iter_mut().for_each(|x| *x = m);
        }
        off += len;
    }
}

/// Scaled data `φ' = D1 φ E`, with `d2` scaling the `−I` block.
struct Scaled {
    phi: DMatrix<f64>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    e: Vec<f64>,
}

impl Scaled {
    fn new(p: &ConicProgram, equilibrate: bool) -> Self {
        let (m1, n) = (p.dual_dim(), p.primal_dim());
        let phi0 = p.operator.to_dmatrix();
        let mut s = Scaled {
            phi: phi0.clone(),
            d1: vec![1.0; m1],
            d2: vec![1.0; n],
            e: vec![1.0; n],
        };
        if !equilibrate {
            return s;
        }
        let mut l1 = Vec::new();
        blocks(&p.k1.dual(), &mut l1);
        let mut l2 = Vec::new();
        blocks(&p.k2, &mut l2);
        for _ in 0..RUIZ_PASSES {
            let mut r1: Vec<f64> = (0..m1)
                .map(|i| s.phi.row(i).iter().fold(0.0f64, |m, v| m.max(v.abs())))
                .collect();
            let mut r2: Vec<f64> = (0..n).map(|j| s.d2[j] * s.e[j]).collect();
            uniformise(&mut r1, &l1);
            uniformise(&mut r2, &l2);
            let c: Vec<f64> = (0..n)
                .map(|j| {
                    s.phi
                        .column(j)
                        .iter()
                        .fold(s.d2[j] * s.e[j], |m, v| m.max(v.abs()))
                })
                .collect();
            let upd = |x: &mut f64, norm: f64| {
                if norm > 0.0 {
                    *x = (*x / norm.sqrt()).clamp(SCALE_MIN, SCALE_MAX);
                }
            };
            for i in 0..m1 {
                upd(&mut s.d1[i], r1[i]);
            }
            for j in 0..n {
                upd(&mut s.d2[j], r2[j]);
                upd(&mut s.e[j], c[j]);
            }
            for i in 0..m1 {
                for j in 0..n {
                    s.phi[(i, j)] = s.d1[i] * phi0[(i, j)] * s.e[j];
                }
            }
        }
        s
    }

    fn m(&self) -> usize {
        self.d1.len() + self.d2.len()
    }

    fn n(&self) -> usize {
        self.e.len()
    }

    fn diag2(&self, j: usize) -> f64 {
        self.d2[j] * self.e[j]
    }

    /// `A x` in scaled coordinates.
    fn apply(&self, x: &[f64]) -> RealVector {
        let mut out = Vec::with_capacity(self.m());
        let top = &self.phi * DVector::from_column_slice(x);
        out.extend(top.iter());
        out.extend((0..self.n()).map(|j| -self.diag2(j) * x[j]));
        out
    }

    /// `Aᵀ y` in scaled coordinates.
    fn apply_t(&self, y: &[f64]) -> RealVector {
        let m1 = self.d1.len();
        let top = self.phi.tr_mul(&DVector::from_column_slice(&y[..m1]));
        (0..self.n())
            .map(|j| top[j] - self.diag2(j) * y[m1 + j])
            .collect()
    }
}

/// Factorised solves with `I + AᵀA = diag(1 + d2²e²) + φ'ᵀφ'`.
enum Normal {
    Woodbury {
        dg_inv: Vec<f64>,
        inner: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    },
    Dense(nalgebra::Cholesky<f64, nalgebra::Dyn>),
}

impl Normal {
    fn new(s: &Scaled) -> Result<Self> {
        let (m1, n) = (s.d1.len(), s.n());
        let dg: Vec<f64> = (0..n).map(|j| 1.0 + s.diag2(j).powi(2)).collect();
        let fail = || Error::Solver("normal-equation factorisation failed".into());
        if m1 <= n {
            let dg_inv: Vec<f64> = dg.iter().map(|d| 1.0 / d).collect();
            let mut scaled_t = s.phi.transpose();
            for j in 0..n {
                scaled_t.row_mut(j).scale_mut(dg_inv[j]);
            }
            let inner = DMatrix::identity(m1, m1) + &s.phi * scaled_t;
            Ok(Normal::Woodbury {
                dg_inv,
                inner: inner.cholesky().ok_or_else(fail)?,
            })
        } else {
            let mut g = s.phi.tr_mul(&s.phi);
            for j in 0..n {
                g[(j, j)] += dg[j];
            }
            Ok(Normal::Dense(g.cholesky().ok_or_else(fail)?))
        }
    }

    fn solve(&self, s: &Scaled, r: &[f64]) -> RealVector {
        match self {
            Normal::Dense(ch) => ch.solve(&DVector::from_column_slice(r)).iter().copied().collect(),
            Normal::Woodbury { dg_inv, inner } => {
                let t: Vec<f64> = r.iter().zip(dg_inv).map(|(a, b)| a * b).collect();
                let w = inner.solve(&(&s.phi * DVector::from_column_slice(&t)));
                let back = s.phi.tr_mul(&w);
                t.iter()
                    .zip(back.iter())
                    .zip(dg_inv)
                    .map(|((ti, bi), di)| ti - di * bi)
                    .collect()
            }
        }
    }
}

/// `M⁻¹ z` for `M = [[I, Aᵀ], [−A, I]]`.
fn solve_m(s: &Scaled, nm: &Normal, z: &[f64]) -> RealVector {
    let n = s.n();
    let (z1, z2) = z.split_at(n);
    let atz2 = s.apply_t(z2);
    let rhs: Vec<f64> = z1.iter().zip(&atz2).map(|(a, b)| a - b).collect();
    let a = nm.solve(s, &rhs);
    let aa = s.apply(&a);
    let mut out = a;
    out.extend(z2.iter().zip(&aa).map(|(x, y)| x + y));
    out
}

struct Unscaled {
    x: RealVector,
    s1: RealVector,
    s2: RealVector,
    y1: RealVector,
    y2: RealVector,
}

fn unscale(s: &Scaled, u: &[f64], v: &[f64], div: f64) -> Unscaled {
    let (n, m1) = (s.n(), s.d1.len());
    Unscaled {
        x: (0..n).map(|j| s.e[j] * u[j] / div).collect(),
        y1: (0..m1).map(|i| s.d1[i] * u[n + i] / div).collect(),
        y2: (0..n).map(|j| s.d2[j] * u[n + m1 + j] / div).collect(),
        s1: (0..m1).map(|i| v[n + i] / s.d1[i] / div).collect(),
        s2: (0..n).map(|j| v[n + m1 + j] / s.d2[j] / div).collect(),
    }
}

pub(super) fn solve(p: &ConicProgram, cfg: &SolverConfig) -> Result<Solution> {
    let (n, m1) = (p.primal_dim(), p.dual_dim());
    let sc = Scaled::new(p, cfg.scaling);
    let m = sc.m();
    let nm = Normal::new(&sc)?;

    // h = (ĉ, b̂) and g = M⁻¹ h.
    let mut h: Vec<f64> = (0..n).map(|j| -sc.e[j] * p.objective[j]).collect();
    h.extend((0..m1).map(|i| sc.d1[i] * p.rhs[i]));
    h.extend(std::iter::repeat(0.0).take(n));
    let g = solve_m(&sc, &nm, &h);
    let hg = 1.0 + dot(&h, &g);

    let k1 = &p.k1;
    let k2d = p.k2.dual();
    let len = n + m + 1;
    let mut u = vec![0.0; len];
    let mut v = vec![0.0; len];
    u[len - 1] = 1.0;
    v[len - 1] = 1.0;
    let mut trace = Vec::new();
    let phi_t = p.operator.transpose();

    for it in 1..=cfg.max_iter {
        // Linear step.
        let z: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let pz = solve_m(&sc, &nm, &z[..len - 1]);
        let t = (z[len - 1] + dot(&h, &pz)) / hg;
        let mut ut: Vec<f64> = pz.iter().zip(&g).map(|(a, b)| a - t * b).collect();
        ut.push(t);
        for (a, b) in ut.iter_mut().zip(&u) {
            *a = RELAXATION * *a + (1.0 - RELAXATION) * b;
        }
        // Projection step.
        let w: Vec<f64> = ut.iter().zip(&v).map(|(a, b)| a - b).collect();
        let mut un = w.clone();
        let y1 = k1.project(&w[n..n + m1])?;
        let y2 = k2d.project(&w[n + m1..n + m])?;
        un[n..n + m1].copy_from_slice(&y1);
        un[n + m1..n + m].copy_from_slice(&y2);
        un[len - 1] = w[len - 1].max(0.0);
        for i in 0..len {
            v[i] += un[i] - ut[i];
        }
        u = un;

        let tau = u[len - 1];
        let kappa = v[len - 1];

        // Certificates of infeasibility or unboundedness.
        let ray = unscale(&sc, &u, &v, 1.0);
        let by = dot(&p.rhs, &ray.y1);
        if by < 0.0 {
            let aty = sub_vec(&phi_t.apply(&ray.y1)?, &ray.y2);
            if infinity_norm(&aty) <= cfg.eps_infeas * -by {
                let y: RealVector = ray.y1.iter().map(|v| v / -by).collect();
                let x = vec![0.0; n];
                log::debug!("primal infeasibility certificate after {} iterations", it);
                return finish(p, x, y, Status::PrimalInfeasible, it, Method::Splitting, trace);
            }
        }
        let cx = dot(&p.objective, &ray.x);
        if cx > 0.0 {
            let mut ax = p.operator.apply(&ray.x)?;
            for (a, b) in ax.iter_mut().zip(&ray.s1) {
                *a += b;
            }
            let r2 = sub_vec(&ray.s2, &ray.x);
            if infinity_norm(&ax).max(infinity_norm(&r2)) <= cfg.eps_infeas * cx {
                let x: RealVector = ray.s2.iter().map(|v| v / cx).collect();
                log::debug!("unboundedness ray after {} iterations", it);
                return finish(p, x, vec![0.0; m1], Status::Unbounded, it, Method::Splitting, trace);
            }
        }

        if tau <= 0.0 || tau < 1e-7 * kappa {
            continue;
        }
        let cur = unscale(&sc, &u, &v, tau);
        let pv = dot(&p.objective, &cur.x);
        let dv = dot(&p.rhs, &cur.y1);
        if cfg.trace_every > 0 && it % cfg.trace_every == 0 {
            trace.push(sample(p, &phi_t, &cur, it)?);
        }
        let thr = cfg.threshold(pv);
        if (pv - dv).abs() > thr {
            continue;
        }
        let mut pres = p.operator.apply(&cur.x)?;
        for i in 0..m1 {
            pres[i] += cur.s1[i] - p.rhs[i];
        }
        let pres2 = sub_vec(&cur.s2, &cur.x);
        let dres: RealVector = phi_t
            .apply(&cur.y1)?
            .iter()
            .zip(&cur.y2)
            .zip(&p.objective)
            .map(|((a, b), c)| a - b - c)
            .collect();
        if infinity_norm(&pres).max(infinity_norm(&pres2)) <= thr && infinity_norm(&dres) <= thr {
            log::debug!("splitting converged after {} iterations", it);
            return finish(p, cur.s2, cur.y1, Status::Optimal, it, Method::Splitting, trace);
        }
    }

    let tau = u[len - 1];
    let div = if tau > 0.0 { tau } else { 1.0 };
    let cur = unscale(&sc, &u, &v, div);
    log::warn!("splitting hit the iteration limit ({})", cfg.max_iter);
    let mut sol = finish(p, cur.s2, cur.y1, Status::IterationLimit, cfg.max_iter, Method::Splitting, trace)?;
    sol.primal_residual = p.k1.dual().distance(&p.primal_slack(&sol.x)?)?;
    sol.dual_residual = p.k2.dual().distance(&p.dual_slack(&sol.y)?)?;
    Ok(sol)
}

fn sub_vec(a: &[f64], b: &[f64]) -> RealVector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn sample(
    p: &ConicProgram,
    phi_t: &crate::linalg::LinearOperator,
    cur: &Unscaled,
    it: usize,
) -> Result<IterateSample> {
    let x = &cur.s2;
    let y = &cur.y1;
    let slack = p.primal_slack(x)?;
    let dslack = sub_vec(&phi_t.apply(y)?, &p.objective);
    Ok(IterateSample {
        iteration: it,
        primal_value: dot(&p.objective, x),
        dual_value: dot(&p.rhs, y),
        primal_residual: p.k1.dual().distance(&slack)?,
        dual_residual: p.k2.dual().distance(&dslack)?,
        x_norm: norm(x),
        y_norm: norm(y),
    })
}
