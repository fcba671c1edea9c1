//! Small dense linear-algebra helpers shared by the cone, solver and model
//! layers. Vectors are plain `Vec<f64>` coordinates in a fixed orthonormal
//! basis, so the Euclidean dot product is the inner product everywhere.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result};

/// Coordinates of an element of a finite-dimensional real inner-product space.
pub type RealVector = Vec<f64>;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> RealVector {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn add(a: &[f64], b: &[f64]) -> RealVector {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn scale(a: &[f64], s: f64) -> RealVector {
    a.iter().map(|x| x * s).collect()
}

pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn normalized(a: &[f64]) -> RealVector {
    let n = norm(a);
    if n > 0.0 {
        scale(a, 1.0 / n)
    } else {
        a.to_vec()
    }
}

/// Kronecker product of coordinate vectors (`a` is the slow index).
pub fn kron(a: &[f64], b: &[f64]) -> RealVector {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

pub fn kron_all(parts: &[&[f64]]) -> RealVector {
    parts
        .iter()
        .fold(vec![1.0], |acc, part| kron(&acc, part))
}

pub fn unit_vector(dim: usize, i: usize) -> RealVector {
    let mut v = vec![0.0; dim];
    v[i] = 1.0;
    v
}

pub fn is_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}

/// Numerical rank of the matrix whose rows are `rows`.
pub fn rank_of_rows(rows: &[RealVector], dim: usize, tol: f64) -> usize {
    if rows.is_empty() || dim == 0 {
        return 0;
    }
    let m = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
    let svd = m.svd(false, false);
    let smax = svd.singular_values.max();
    if smax <= 0.0 {
        return 0;
    }
    svd.singular_values
        .iter()
        .filter(|&&s| s > tol * smax.max(1.0))
        .count()
}

/// Orthonormal basis (as rows) of the null space of the matrix whose rows
/// are `rows`.
pub fn null_space(rows: &[RealVector], dim: usize, tol: f64) -> Vec<RealVector> {
    if rows.is_empty() {
        return (0..dim).map(|i| unit_vector(dim, i)).collect();
    }
    // Pad with zero rows so the SVD returns a full set of right singular vectors.
    let m = DMatrix::from_fn(rows.len().max(dim), dim, |i, j| {
        if i < rows.len() {
            rows[i][j]
        } else {
            0.0
        }
    });
    let svd = m.svd(false, true);
    let scale = svd.singular_values.max().max(1.0);
    let v_t = svd.v_t.expect("right singular vectors were requested");
    (0..dim)
        .filter(|&k| svd.singular_values[k] <= tol * scale)
        .map(|k| v_t.row(k).iter().copied().collect())
        .collect()
}

/// Solve the square system `a x = b`; `None` when numerically singular.
pub fn solve_square(a: &DMatrix<f64>, b: &[f64]) -> Option<RealVector> {
    let lu = a.clone().lu();
    let x = lu.solve(&DVector::from_column_slice(b))?;
    if x.iter().all(|v| v.is_finite()) {
        Some(x.iter().copied().collect())
    } else {
        None
    }
}

/// A dense linear map between coordinate spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearOperator {
    rows: usize,
    cols: usize,
    /// Row-major entries.
    #[serde(with = "crate::schema::decimal_vec")]
    data: Vec<f64>,
}

impl LinearOperator {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[RealVector], cols: usize) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            check_dim(cols, r.len())?;
            data.extend_from_slice(r);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn apply(&self, x: &[f64]) -> Result<RealVector> {
        check_dim(self.cols, x.len())?;
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    pub fn apply_adjoint(&self, y: &[f64]) -> Result<RealVector> {
        check_dim(self.rows, y.len())?;
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                axpy(yi, self.row(i), &mut out);
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Stack operators with equal column count on top of each other.
    pub fn vstack(blocks: &[LinearOperator]) -> Result<Self> {
        let cols = blocks.first().map(|b| b.cols).unwrap_or(0);
        let mut data = Vec::new();
        let mut rows = 0;
        for b in blocks {
            check_dim(cols, b.cols)?;
            data.extend_from_slice(&b.data);
            rows += b.rows;
        }
        Ok(Self { rows, cols, data })
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_dmatrix(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn adjoint_matches_inner_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let op = LinearOperator::from_fn(5, 7, |_, _| rng.gen_range(-1.0..1.0));
        for _ in 0..20 {
            let x: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lhs = dot(&y, &op.apply(&x).unwrap());
            let rhs = dot(&op.apply_adjoint(&y).unwrap(), &x);
            assert!((lhs - rhs).abs() < 1e-10);
        }
    }

    #[test]
    fn kron_orders_first_factor_slowest() {
        assert_eq!(kron(&[1.0, 2.0], &[3.0, 4.0]), vec![3.0, 4.0, 6.0, 8.0]);
    }

    #[test]
    fn null_space_of_rank_deficient_rows() {
        let rows = vec![vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0]];
        let ns = null_space(&rows, 3, 1e-9);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(dot(v, &rows[0]).abs() < 1e-9);
        }
        assert_eq!(rank_of_rows(&rows, 3, 1e-9), 1);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let op = LinearOperator::identity(2);
        assert!(op.apply(&[1.0]).is_err());
    }
}
