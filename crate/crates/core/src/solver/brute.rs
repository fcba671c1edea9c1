//! Vertex and ray enumeration for small polyhedral programs. Deliberately
//! naive: it shares nothing with the simplex path beyond reading generators.

use nalgebra::{DMatrix, DVector};

use super::ConicProgram;
use crate::error::{Error, Result};
use crate::linalg::{dot, null_space, RealVector};

/// Largest primal dimension accepted by [`brute_force_polyhedral`].
pub const BRUTE_FORCE_MAX_DIM: usize = 8;

const FEAS_TOL: f64 = 1e-9;

/// Optimal value by enumeration: `+∞` when unbounded, `−∞` when infeasible.
///
/// The feasible set is written as `{X : a_i·X ≤ c_i}` using generators of
/// `K2*` and of `K1`, then every basis of active constraints is tried.
pub fn brute_force_polyhedral(p: &ConicProgram) -> Result<f64> {
    p.validate()?;
    let n = p.primal_dim();
    if n > BRUTE_FORCE_MAX_DIM {
        return Err(Error::Invalid(format!(
            "brute force is limited to dimension {}, got {}",
            BRUTE_FORCE_MAX_DIM, n
        )));
    }
    if !p.is_polyhedral() {
        return Err(Error::Unsupported("brute force needs polyhedral cones".into()));
    }
    let mut a: Vec<RealVector> = Vec::new();
    let mut c: Vec<f64> = Vec::new();
    for g in p.k2.dual().polyhedral_generators()? {
        a.push(g.iter().map(|v| -v).collect());
        c.push(0.0);
    }
    for h in p.k1.polyhedral_generators()? {
        a.push(p.operator.apply_adjoint(&h)?);
        c.push(dot(&h, &p.rhs));
    }

    // Directions along which every constraint is constant.
    let lineality = null_space(&a, n, 1e-10);
    let feasible = |x: &[f64]| {
        a.iter()
            .zip(&c)
            .all(|(ai, ci)| dot(ai, x) <= ci + FEAS_TOL * (1.0 + ci.abs()))
    };
    let k = n - lineality.len();

    let mut best: Option<f64> = None;
    let mut any_vertex = false;
    for subset in Combinations::new(a.len(), k) {
        let mut rows: Vec<&RealVector> = subset.iter().map(|&i| &a[i]).collect();
        rows.extend(lineality.iter());
        let mut rhs: Vec<f64> = subset.iter().map(|&i| c[i]).collect();
        rhs.extend(std::iter::repeat(0.0).take(lineality.len()));
        let Some(x) = solve_rows(&rows, &rhs, n) else { continue };
        if feasible(&x) {
            any_vertex = true;
            let v = dot(&p.objective, &x);
            best = Some(best.map_or(v, |b: f64| b.max(v)));
        }
    }
    if !any_vertex {
        return Ok(f64::NEG_INFINITY);
    }
    // Unbounded if the objective moves along the lineality space or along an
    // extreme ray of the recession cone.
    if lineality.iter().any(|l| dot(l, &p.objective).abs() > 1e-10) {
        return Ok(f64::INFINITY);
    }
    if k > 0 {
        for subset in Combinations::new(a.len(), k - 1) {
            let mut rows: Vec<RealVector> = subset.iter().map(|&i| a[i].clone()).collect();
            rows.extend(lineality.iter().cloned());
            let dirs = null_space(&rows, n, 1e-10);
            if dirs.len() != 1 {
                continue;
            }
            for sign in [1.0, -1.0] {
                let d: RealVector = dirs[0].iter().map(|v| sign * v).collect();
                if a.iter().all(|ai| dot(ai, &d) <= 1e-10) && dot(&p.objective, &d) > 1e-10 {
                    return Ok(f64::INFINITY);
                }
            }
        }
    }
    Ok(best.unwrap_or(f64::NEG_INFINITY))
}

fn solve_rows(rows: &[&RealVector], rhs: &[f64], n: usize) -> Option<RealVector> {
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    if svd.singular_values.min() <= 1e-10 * smax.max(1.0) {
        return None;
    }
    m.lu()
        .solve(&DVector::from_column_slice(rhs))
        .map(|v| v.iter().copied().collect())
}

/// Lexicographic `k`-subsets of `0..n`.
struct Combinations {
    n: usize,
    idx: Vec<usize>,
    done: bool,
}

impl Combinations {
    fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            idx: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.idx.clone();
        let k = self.idx.len();
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.idx[i] < self.n - k + i {
                self.idx[i] += 1;
                for j in i + 1..k {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}
