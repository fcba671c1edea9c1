//! Dense two-phase tableau simplex for `max cᵀw  s.t.  A w = b, w ≥ 0`.
//!
//! Rows and columns are equilibrated first. Each phase perturbs the basic
//! solution slightly to break degeneracy, pivots with Dantzig's rule and a
//! Harris ratio test (falling back to Bland's rule if progress stalls),
//! then removes the perturbation and repairs primal feasibility with dual
//! simplex pivots. The tableau is periodically rebuilt from an LU
//! factorisation of the basis to stop rounding error from accumulating.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
/// Primal feasibility slack allowed by the Harris ratio test.
const HARRIS_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;
const PERTURBATION: f64 = 1e-7;
/// Consecutive degenerate pivots before switching from Dantzig's rule to
/// Bland's rule for the rest of the pass.
const BLAND_AFTER: usize = 50;
const REINVERT_EVERY: usize = 50;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// Rows `0..m` constraints, row `m` reduced costs; columns `0..n`
    /// structural, `n..n+m` artificial, last the right-hand side.
    t: DMatrix<f64>,
    /// `[A | I]` after scaling, for rebuilding the tableau.
    body: DMatrix<f64>,
    /// Right-hand side the current tableau represents.
    rhs_work: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    n: usize,
    m: usize,
    pivots: usize,
    since_reinvert: usize,
}

enum Pass {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self) -> usize {
        self.n + self.m
    }

    fn obj(&self) -> usize {
        self.m
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let p = self.t[(r, col)];
        let w = self.t.ncols();
        for j in 0..w {
            self.t[(r, j)] /= p;
        }
        for i in 0..=self.m {
            if i == r {
                continue;
            }
            let f = self.t[(i, col)];
            if f != 0.0 {
                for j in 0..w {
                    let v = self.t[(r, j)];
                    if v != 0.0 {
                        self.t[(i, j)] -= f * v;
                    }
                }
                self.t[(i, col)] = 0.0;
            }
        }
        self.basis[r] = col;
        self.pivots += 1;
        self.since_reinvert += 1;
        if self.since_reinvert >= REINVERT_EVERY {
            self.reinvert();
        }
    }

    /// Rebuilds the tableau as `B⁻¹[A | I | b]` from the basis columns.
    fn reinvert(&mut self) {
        self.since_reinvert = 0;
        let m = self.m;
        let bm = DMatrix::from_fn(m, m, |i, k| self.body[(i, self.basis[k])]);
        let lu = bm.lu();
        let Some(inv_body) = lu.solve(&self.body) else { return };
        let Some(x) = lu.solve(&DVector::from_column_slice(&self.rhs_work)) else { return };
        if inv_body.iter().chain(x.iter()).any(|v| !v.is_finite()) {
            return;
        }
        let rhs = self.rhs();
        for i in 0..m {
            for j in 0..rhs {
                self.t[(i, j)] = inv_body[(i, j)];
            }
            self.t[(i, rhs)] = x[i];
        }
        let cost = self.cost.clone();
        self.set_objective(&cost);
    }

    fn set_objective(&mut self, cost: &[f64]) {
        self.cost = cost.to_vec();
        let obj = self.obj();
        let w = self.t.ncols();
        for j in 0..w {
            let mut d = if j < cost.len() { -cost[j] } else { 0.0 };
            for i in 0..self.m {
                let cb = cost.get(self.basis[i]).copied().unwrap_or(0.0);
                if cb != 0.0 {
                    d += cb * self.t[(i, j)];
                }
            }
            self.t[(obj, j)] = d;
        }
    }

    /// Shifts the basic solution by a small positive amount, changing the
    /// represented right-hand side accordingly.
    fn perturb(&mut self) {
        let rhs = self.rhs();
        let scale = 1.0 + (0..self.m).fold(0.0f64, |s, i| s.max(self.t[(i, rhs)].abs()));
        let mut shift = vec![0.0; self.m];
        for (i, s) in shift.iter_mut().enumerate() {
            // Deterministic spread in [1, 2) so no two rows tie.
            let frac = ((i as f64 + 1.0) * 0.618_033_988_749_895).fract();
            *s = PERTURBATION * scale * (1.0 + frac);
            self.t[(i, rhs)] += *s;
        }
        for (k, s) in shift.iter().enumerate() {
            let col = self.basis[k];
            for i in 0..self.m {
                self.rhs_work[i] += self.body[(i, col)] * s;
            }
        }
    }

    /// Primal simplex over columns `0..allowed`.
    fn primal(&mut self, allowed: usize) -> Result<Pass> {
        let mut degenerate = 0;
        let rhs = self.rhs();
        let obj = self.obj();
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::NonConvergence("simplex pivot limit reached".into()));
            }
            let bland = degenerate >= BLAND_AFTER;
            let mut enter = None;
            let mut best = -PIVOT_TOL;
            for j in 0..allowed {
                let d = self.t[(obj, j)];
                if d < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = d;
                }
            }
            let Some(col) = enter else { return Ok(Pass::Optimal) };
            // Harris: bound the step with a small feasibility allowance,
            // then take the largest pivot element within that bound.
            let mut bound = f64::INFINITY;
            for i in 0..self.m {
                let a = self.t[(i, col)];
                if a > PIVOT_TOL {
                    bound = bound.min((self.t[(i, rhs)].max(0.0) + HARRIS_TOL) / a);
                }
            }
            if bound == f64::INFINITY {
                return Ok(Pass::Unbounded);
            }
            let mut leave: Option<usize> = None;
            for i in 0..self.m {
                let a = self.t[(i, col)];
                if a > PIVOT_TOL && self.t[(i, rhs)].max(0.0) / a <= bound {
                    leave = match leave {
                        None => Some(i),
                        Some(k) if bland => Some(if self.basis[i] < self.basis[k] { i } else { k }),
                        Some(k) => Some(if a > self.t[(k, col)] { i } else { k }),
                    };
                }
            }
            let r = leave.expect("the bound is attained by some row");
            let step = self.t[(r, rhs)].max(0.0) / self.t[(r, col)];
            if step <= 1e-12 {
                degenerate += 1;
            } else if !bland {
                degenerate = 0;
            }
            self.pivot(r, col);
        }
    }

    /// Dual simplex over columns `0..allowed` until the basic solution is
    /// nonnegative. Returns false when some row proves infeasibility.
    fn dual(&mut self, allowed: usize) -> Result<bool> {
        let rhs = self.rhs();
        let obj = self.obj();
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::NonConvergence("simplex pivot limit reached".into()));
            }
            let mut row = None;
            let mut worst = -FEAS_TOL;
            for i in 0..self.m {
                let v = self.t[(i, rhs)];
                if v < worst {
                    worst = v;
                    row = Some(i);
                }
            }
            let Some(r) = row else { return Ok(true) };
            let mut enter: Option<(usize, f64)> = None;
            for j in 0..allowed {
                let a = self.t[(r, j)];
                if a < -PIVOT_TOL {
                    let ratio = self.t[(obj, j)].max(0.0) / -a;
                    let better = match enter {
                        None => true,
                        Some((k, best)) => ratio < best - 1e-12 || (ratio <= best + 1e-12 && -a > -self.t[(r, k)]),
                    };
                    if better {
                        enter = Some((j, ratio));
                    }
                }
            }
            let Some((col, _)) = enter else { return Ok(false) };
            self.pivot(r, col);
        }
    }

    /// One phase: perturbed primal pass, exact right-hand side restored,
    /// dual repair, final primal pass.
    fn phase(&mut self, b: &[f64], allowed: usize) -> Result<Option<Pass>> {
        self.perturb();
        if let Pass::Unbounded = self.primal(allowed)? {
            return Ok(Some(Pass::Unbounded));
        }
        self.rhs_work = b.to_vec();
        self.reinvert();
        if !self.dual(allowed)? {
            return Ok(None);
        }
        self.primal(allowed).map(Some)
    }
}

/// Iterative row/column max-norm equilibration; returns the scaled matrix
/// with its row and column factors.
fn equilibrate(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, Vec<f64>) {
    let (m, n) = (a.nrows(), a.ncols());
    let mut r = vec![1.0; m];
    let mut c = vec![1.0; n];
    let mut s = a.clone();
    for _ in 0..8 {
        for i in 0..m {
            let mx = (0..n).fold(0.0f64, |x, j| x.max(s[(i, j)].abs()));
            if mx > 0.0 {
                let f = 1.0 / mx.sqrt();
                r[i] *= f;
                for j in 0..n {
                    s[(i, j)] *= f;
                }
            }
        }
        for j in 0..n {
            let mx = (0..m).fold(0.0f64, |x, i| x.max(s[(i, j)].abs()));
            if mx > 0.0 {
                let f = 1.0 / mx.sqrt();
                c[j] *= f;
                for i in 0..m {
                    s[(i, j)] *= f;
                }
            }
        }
    }
    (s, r, c)
}

/// Returns the outcome and the number of pivots taken.
pub(crate) fn solve_standard(a: &DMatrix<f64>, b: &[f64], c: &[f64]) -> Result<(LpOutcome, usize)> {
    let (m, n) = (a.nrows(), a.ncols());
    // Scaled problem: A' = R A S, b' = R b, c' = S c, w = S w'.
    let (sa, rs, cs) = equilibrate(a);
    let mut body = DMatrix::zeros(m, n + m);
    let mut bb = vec![0.0; m];
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            body[(i, j)] = sign * sa[(i, j)];
        }
        body[(i, n + i)] = 1.0;
        bb[i] = sign * rs[i] * b[i];
    }
    let mut t = DMatrix::zeros(m + 1, n + m + 1);
    for i in 0..m {
        for j in 0..n + m {
            t[(i, j)] = body[(i, j)];
        }
        t[(i, n + m)] = bb[i];
    }
    let mut tab = Tableau {
        t,
        body,
        rhs_work: bb.clone(),
        cost: Vec::new(),
        basis: (n..n + m).collect(),
        n,
        m,
        pivots: 0,
        since_reinvert: 0,
    };

    // Phase one: maximise −Σ artificials.
    let mut phase1 = vec![0.0; n + m];
    phase1[n..].iter_mut().for_each(|v| *v = -1.0);
    tab.set_objective(&phase1);
    if tab.phase(&bb, n + m)?.is_none() {
        return Ok((LpOutcome::Infeasible, tab.pivots));
    }
    let infeas = -tab.t[(m, n + m)];
    let scale = 1.0 + bb.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    if infeas > 1e-9 * scale {
        return Ok((LpOutcome::Infeasible, tab.pivots));
    }
    // Drive artificials out of the basis where possible; rows where that is
    // impossible are redundant and stay pinned at zero.
    for i in 0..m {
        if tab.basis[i] >= n {
            let col = (0..n)
                .filter(|&j| tab.t[(i, j)].abs() > 1e-7)
                .max_by(|&x, &y| tab.t[(i, x)].abs().total_cmp(&tab.t[(i, y)].abs()));
            if let Some(col) = col {
                tab.pivot(i, col);
            }
        }
    }
    tab.reinvert();

    let scaled_c: Vec<f64> = (0..n).map(|j| c[j] * cs[j]).collect();
    tab.set_objective(&scaled_c);
    match tab.phase(&bb, n)? {
        None => return Ok((LpOutcome::Infeasible, tab.pivots)),
        Some(Pass::Unbounded) => return Ok((LpOutcome::Unbounded, tab.pivots)),
        Some(Pass::Optimal) => {}
    }
    let mut w = vec![0.0; n];
    for i in 0..m {
        if tab.basis[i] < n {
            w[tab.basis[i]] = tab.t[(i, n + m)].max(0.0) * cs[tab.basis[i]];
        }
    }
    refine(a, b, &tab.basis, n, &mut w);
    Ok((LpOutcome::Optimal(w), tab.pivots))
}

/// Re-solve the final basis on the unscaled data to remove pivoting error.
fn refine(a: &DMatrix<f64>, b: &[f64], basis: &[usize], n: usize, w: &mut [f64]) {
    let cols: Vec<usize> = basis.iter().copied().filter(|&j| j < n).collect();
    if cols.is_empty() {
        return;
    }
    // Least squares on the structural basis columns; redundant rows are
    // consistent so the residual vanishes.
    let bm = DMatrix::from_fn(a.nrows(), cols.len(), |i, k| a[(i, cols[k])]);
    let rhs = DVector::from_column_slice(b);
    let Ok(sol) = bm.clone().svd(true, true).solve(&rhs, 1e-12) else { return };
    if sol.iter().any(|v| !v.is_finite() || *v < -1e-9) {
        return;
    }
    let resid = (&bm * &sol - &rhs).amax();
    if resid > 1e-9 * (1.0 + rhs.amax()) {
        return;
    }
    for (k, &j) in cols.iter().enumerate() {
        w[j] = sol[k].max(0.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // max x + y, x + y + s = 1
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let (out, _) = solve_standard(&a, &[1.0], &[1.0, 1.0, 0.0]).unwrap();
        match out {
            LpOutcome::Optimal(w) => assert!((w[0] + w[1] - 1.0).abs() < 1e-12),
            o => panic!("{:?}", o),
        }
    }

    #[test]
    fn infeasible_and_unbounded() {
        let a = DMatrix::from_row_slice(1, 1, &[1.0]);
        assert_eq!(solve_standard(&a, &[-1.0], &[0.0]).unwrap().0, LpOutcome::Infeasible);
        let a = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        assert_eq!(solve_standard(&a, &[0.0], &[1.0, 0.0]).unwrap().0, LpOutcome::Unbounded);
    }

    #[test]
    fn redundant_rows() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let (out, _) = solve_standard(&a, &[1.0, 2.0], &[1.0, 2.0]).unwrap();
        match out {
            LpOutcome::Optimal(w) => {
                assert!(w[0].abs() < 1e-12 && (w[1] - 1.0).abs() < 1e-12, "{:?}", w)
            }
            o => panic!("{:?}", o),
        }
    }

    #[test]
    fn degenerate_equalities_stay_feasible() {
        // x1 − x2 = 0, x1 + x2 = 0 pins x = 0; max x1.
        let a = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 1.0, 1.0]);
        let (out, _) = solve_standard(&a, &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_eq!(out, LpOutcome::Optimal(vec![0.0, 0.0]));
    }
}
