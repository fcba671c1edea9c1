//! Polyhedral programs as linear programs.
//!
//! Every cone constraint `e(z) ∈ K` on an affine expression is unrolled
//! into linear rows: facet inequalities for H-cones, auxiliary nonnegative
//! weights for V-cones, and contraction against the other factor's dual
//! generators for maximal tensor products.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::simplex::{solve_standard, LpOutcome};
use super::{finish, ConicProgram, Method, Solution, SolverConfig, Status};
use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::linalg::RealVector;

/// Affine expression `Σ coeff·z_var + constant`.
#[derive(Debug, Clone, Default)]
struct Expr {
    terms: BTreeMap<usize, f64>,
    constant: f64,
}

impl Expr {
    fn var(i: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(i, 1.0);
        Expr { terms, constant: 0.0 }
    }

    fn add_scaled(&mut self, other: &Expr, w: f64) {
        if w == 0.0 {
            return;
        }
        for (&k, &v) in &other.terms {
            *self.terms.entry(k).or_insert(0.0) += w * v;
        }
        self.constant += w * other.constant;
    }

    fn combine(exprs: &[Expr], weights: &[f64]) -> Expr {
        let mut out = Expr::default();
        for (e, &w) in exprs.iter().zip(weights) {
            out.add_scaled(e, w);
        }
        out
    }
}

#[derive(Debug, Default)]
struct Model {
    nonneg: Vec<bool>,
    eqs: Vec<Expr>,
    ges: Vec<Expr>,
}

impl Model {
    fn with_free(n: usize) -> Self {
        Model {
            nonneg: vec![false; n],
            ..Default::default()
        }
    }

    fn new_nonneg(&mut self) -> usize {
        self.nonneg.push(true);
        self.nonneg.len() - 1
    }

    /// Constrain `exprs ∈ cone`.
    fn emit(&mut self, cone: &Cone, exprs: &[Expr]) -> Result<()> {
        crate::error::check_dim(cone.dim(), exprs.len())?;
        match cone {
            Cone::Orthant { .. } => self.ges.extend(exprs.iter().cloned()),
            Cone::PsdHermitian { .. } if cone.is_polyhedral() => self.ges.extend(exprs.iter().cloned()),
            Cone::PsdHermitian { .. } => {
                return Err(Error::Unsupported("PSD cone in a linear program".into()))
            }
            Cone::PolyhedralH { normals, .. } => {
                for n in normals {
                    self.ges.push(Expr::combine(exprs, n));
                }
            }
            Cone::PolyhedralV { generators, .. } => self.emit_generated(generators, exprs),
            Cone::Product { parts } => {
                let mut off = 0;
                for p in parts {
                    let d = p.dim();
                    self.emit(p, &exprs[off..off + d])?;
                    off += d;
                }
            }
            Cone::TensorMin { .. } => {
                let gens = cone.polyhedral_generators()?;
                self.emit_generated(&gens, exprs);
            }
            Cone::TensorMax { left, right } => {
                let (dl, dr) = (left.dim(), right.dim());
                if let Ok(gs) = right.dual().generators() {
                    for g in &gs {
                        let sub: Vec<Expr> = (0..dl)
                            .map(|p| Expr::combine(&exprs[p * dr..(p + 1) * dr], g))
                            .collect();
                        self.emit(left, &sub)?;
                    }
                } else if let Ok(hs) = left.dual().generators() {
                    for h in &hs {
                        let sub: Vec<Expr> = (0..dr)
                            .map(|q| {
                                let mut e = Expr::default();
                                for p in 0..dl {
                                    e.add_scaled(&exprs[p * dr + q], h[p]);
                                }
                                e
                            })
                            .collect();
                        self.emit(right, &sub)?;
                    }
                } else {
                    for g in &right.dual().polyhedral_generators()? {
                        let sub: Vec<Expr> = (0..dl)
                            .map(|p| Expr::combine(&exprs[p * dr..(p + 1) * dr], g))
                            .collect();
                        self.emit(left, &sub)?;
                    }
                }
            }
            Cone::DualOf { inner } => self.emit(&inner.dual(), exprs)?,
        }
        Ok(())
    }

    fn emit_generated(&mut self, generators: &[RealVector], exprs: &[Expr]) {
        let lambdas: Vec<usize> = generators.iter().map(|_| self.new_nonneg()).collect();
        for (k, e) in exprs.iter().enumerate() {
            let mut row = e.clone();
            for (g, &l) in generators.iter().zip(&lambdas) {
                if g[k] != 0.0 {
                    *row.terms.entry(l).or_insert(0.0) -= g[k];
                }
            }
            self.eqs.push(row);
        }
    }

    /// Maximise `Σ obj_i z_i`; an optimal outcome carries the model variables.
    fn solve(&self, obj: &[f64]) -> Result<(LpOutcome, usize)> {
        // Column layout: nonnegative vars get one column, free vars two.
        let mut col = Vec::with_capacity(self.nonneg.len());
        let mut ncols = 0;
        for &nn in &self.nonneg {
            col.push(ncols);
            ncols += if nn { 1 } else { 2 };
        }
        let nslack = self.ges.len();
        let rows = self.eqs.len() + self.ges.len();
        let total = ncols + nslack;
        let mut a = DMatrix::zeros(rows, total);
        let mut b = vec![0.0; rows];
        for (r, e) in self.eqs.iter().chain(&self.ges).enumerate() {
            for (&v, &c) in &e.terms {
                a[(r, col[v])] += c;
                if !self.nonneg[v] {
                    a[(r, col[v] + 1)] -= c;
                }
            }
            b[r] = -e.constant;
            if r >= self.eqs.len() {
                a[(r, ncols + r - self.eqs.len())] = -1.0;
            }
        }
        let mut c = vec![0.0; total];
        for (v, &o) in obj.iter().enumerate() {
            c[col[v]] = o;
            if !self.nonneg[v] {
                c[col[v] + 1] = -o;
            }
        }
        let (out, pivots) = solve_standard(&a, &b, &c)?;
        Ok((
            match out {
                LpOutcome::Optimal(w) => LpOutcome::Optimal(
                    self.nonneg
                        .iter()
                        .enumerate()
                        .map(|(v, &nn)| if nn { w[col[v]] } else { w[col[v]] - w[col[v] + 1] })
                        .collect(),
                ),
                other => other,
            },
            pivots,
        ))
    }
}

fn identity_exprs(n: usize) -> Vec<Expr> {
    (0..n).map(Expr::var).collect()
}

/// Rows of `sign·(M z) + constant` for a dense operator.
fn affine(op: &crate::linalg::LinearOperator, sign: f64, constant: &[f64]) -> Vec<Expr> {
    (0..op.rows())
        .map(|i| {
            let mut e = Expr {
                terms: BTreeMap::new(),
                constant: constant[i],
            };
            for (j, &v) in op.row(i).iter().enumerate() {
                if v != 0.0 {
                    e.terms.insert(j, sign * v);
                }
            }
            e
        })
        .collect()
}

/// Feasible region of `p` over variables `0..n`: `X ∈ K2`,
/// `rhs_scale·b − φ(X) ∈ K1*`.
fn primal_model(p: &ConicProgram, rhs_scale: f64) -> Result<Model> {
    let n = p.primal_dim();
    let mut m = Model::with_free(n);
    m.emit(&p.k2, &identity_exprs(n))?;
    let b: Vec<f64> = p.rhs.iter().map(|v| rhs_scale * v).collect();
    m.emit(&p.k1.dual(), &affine(&p.operator, -1.0, &b))?;
    Ok(m)
}

fn first(z: &[f64], n: usize) -> RealVector {
    z[..n].to_vec()
}

pub(super) fn solve_polyhedral(p: &ConicProgram, _cfg: &SolverConfig) -> Result<Solution> {
    let n = p.primal_dim();
    let m1 = p.dual_dim();
    let (out, mut pivots) = primal_model(p, 1.0)?.solve(&p.objective)?;
    match out {
        LpOutcome::Optimal(z) => {
            let x = first(&z, n);
            let d = p.dual_as_primal();
            let (dout, dp) = primal_model(&d, 1.0)?.solve(&d.objective)?;
            pivots += dp;
            let LpOutcome::Optimal(w) = dout else {
                return Err(Error::Solver(format!(
                    "dual linear program ended {:?} although the primal is optimal",
                    dout
                )));
            };
            finish(p, x, first(&w, m1), Status::Optimal, pivots, Method::Simplex, Vec::new())
        }
        LpOutcome::Infeasible => {
            // y ∈ K1, φ*(y) ∈ K2*, ⟨b, y⟩ = −1.
            let mut m = Model::with_free(m1);
            m.emit(&p.k1, &identity_exprs(m1))?;
            m.emit(&p.k2.dual(), &affine(&p.operator.transpose(), 1.0, &vec![0.0; n]))?;
            let by = affine(
                &crate::linalg::LinearOperator::from_rows(&[p.rhs.clone()], m1)?,
                1.0,
                &[1.0],
            );
            m.emit(&Cone::zero(1), &by)?;
            let (cout, cp) = m.solve(&vec![0.0; m1])?;
            let LpOutcome::Optimal(w) = cout else {
                return Err(Error::Certificate("no Farkas certificate found for an infeasible program".into()));
            };
            finish(p, vec![0.0; n], first(&w, m1), Status::PrimalInfeasible, pivots + cp, Method::Simplex, Vec::new())
        }
        LpOutcome::Unbounded => {
            // X ∈ K2, −φ(X) ∈ K1*, ⟨C, X⟩ = 1.
            let mut m = primal_model(p, 0.0)?;
            let cx = affine(
                &crate::linalg::LinearOperator::from_rows(&[p.objective.clone()], n)?,
                1.0,
                &[-1.0],
            );
            m.emit(&Cone::zero(1), &cx)?;
            let (rout, rp) = m.solve(&vec![0.0; n])?;
            let LpOutcome::Optimal(w) = rout else {
                return Err(Error::Certificate("no improving ray found for an unbounded program".into()));
            };
            finish(p, first(&w, n), vec![0.0; m1], Status::Unbounded, pivots + rp, Method::Simplex, Vec::new())
        }
    }
}
