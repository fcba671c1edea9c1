//! Real coordinates for Hermitian operators.
//!
//! A single factor of dimension `d` uses the orthonormal basis (under the
//! trace inner product) made of the diagonal units `E_jj`, then the symmetric
//! pairs `(E_jk + E_kj)/√2` for `j < k`, then the antisymmetric pairs
//! `i(E_jk - E_kj)/√2` for `j < k`. Composite spaces use tensor products of
//! the factor bases, so the coordinates of `A ⊗ B` are the Kronecker product
//! of the coordinates of `A` and `B`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::linalg::RealVector;

/// Sparse entries `(row, col, value)` of one basis operator.
type Entries = Vec<(usize, usize, Complex64)>;

#[derive(Debug)]
pub struct ProductBasis {
    pub matrix_dim: usize,
    pub elements: Vec<Entries>,
    /// `+1` when the basis element is symmetric, `-1` when transposition
    /// flips its sign.
    pub transpose_signs: Vec<f64>,
}

fn single_factor(d: usize) -> (Vec<Entries>, Vec<f64>) {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut elems = Vec::with_capacity(d * d);
    let mut signs = Vec::with_capacity(d * d);
    for j in 0..d {
        elems.push(vec![(j, j, Complex64::new(1.0, 0.0))]);
        signs.push(1.0);
    }
    for j in 0..d {
        for k in (j + 1)..d {
            elems.push(vec![
                (j, k, Complex64::new(r, 0.0)),
                (k, j, Complex64::new(r, 0.0)),
            ]);
            signs.push(1.0);
        }
    }
    for j in 0..d {
        for k in (j + 1)..d {
            elems.push(vec![
                (j, k, Complex64::new(0.0, r)),
                (k, j, Complex64::new(0.0, -r)),
            ]);
            signs.push(-1.0);
        }
    }
    (elems, signs)
}

fn build(factors: &[usize]) -> ProductBasis {
    let mut elements: Vec<Entries> = vec![vec![(0, 0, Complex64::new(1.0, 0.0))]];
    let mut signs = vec![1.0];
    let mut mdim = 1usize;
    for &d in factors {
        let (f_elems, f_signs) = single_factor(d);
        let mut next = Vec::with_capacity(elements.len() * f_elems.len());
        let mut next_signs = Vec::with_capacity(next.capacity());
        for (a, sa) in elements.iter().zip(&signs) {
            for (b, sb) in f_elems.iter().zip(&f_signs) {
                let mut e = Vec::with_capacity(a.len() * b.len());
                for &(ra, ca, va) in a {
                    for &(rb, cb, vb) in b {
                        e.push((ra * d + rb, ca * d + cb, va * vb));
                    }
                }
                next.push(e);
                next_signs.push(sa * sb);
            }
        }
        elements = next;
        signs = next_signs;
        mdim *= d;
    }
    ProductBasis {
        matrix_dim: mdim,
        elements,
        transpose_signs: signs,
    }
}

/// Shared, lazily built basis for a factor list.
pub fn basis(factors: &[usize]) -> Arc<ProductBasis> {
    static CACHE: OnceLock<Mutex<HashMap<Vec<usize>, Arc<ProductBasis>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("basis cache poisoned");
    guard
        .entry(factors.to_vec())
        .or_insert_with(|| Arc::new(build(factors)))
        .clone()
}

pub fn matrix_dim(factors: &[usize]) -> usize {
    factors.iter().product()
}

pub fn real_dim(factors: &[usize]) -> usize {
    factors.iter().map(|d| d * d).product()
}

pub fn to_matrix(factors: &[usize], x: &[f64]) -> DMatrix<Complex64> {
    let b = basis(factors);
    let n = b.matrix_dim;
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for (coef, entries) in x.iter().zip(&b.elements) {
        if *coef == 0.0 {
            continue;
        }
        for &(r, c, v) in entries {
            m[(r, c)] += v * *coef;
        }
    }
    m
}

/// Coordinates `tr(B_a M)` of a (Hermitian) matrix.
pub fn from_matrix(factors: &[usize], m: &DMatrix<Complex64>) -> RealVector {
    let b = basis(factors);
    b.elements
        .iter()
        .map(|entries| {
            entries
                .iter()
                .map(|&(r, c, v)| (v * m[(c, r)]).re)
                .sum()
        })
        .collect()
}

pub fn identity_coords(factors: &[usize]) -> RealVector {
    let n = matrix_dim(factors);
    from_matrix(factors, &DMatrix::<Complex64>::identity(n, n))
}

/// Coordinates of the rank-one operator `|v><v|`.
pub fn rank_one(factors: &[usize], v: &[Complex64]) -> RealVector {
    let n = v.len();
    let col = DVector::from_column_slice(v);
    let m = &col * col.adjoint();
    debug_assert_eq!(n, matrix_dim(factors));
    from_matrix(factors, &m)
}

fn is_real(m: &DMatrix<Complex64>) -> bool {
    m.iter().all(|z| z.im.abs() <= 1e-300)
}

/// Eigenvalues in ascending order.
pub fn eigenvalues(factors: &[usize], x: &[f64]) -> Vec<f64> {
    let m = to_matrix(factors, x);
    let mut ev: Vec<f64> = if is_real(&m) {
        let re = m.map(|z| z.re);
        re.symmetric_eigenvalues().iter().copied().collect()
    } else {
        m.symmetric_eigenvalues().iter().copied().collect()
    };
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

pub fn min_eigenvalue(factors: &[usize], x: &[f64]) -> f64 {
    eigenvalues(factors, x).first().copied().unwrap_or(0.0)
}

/// Euclidean projection onto the PSD cone: clamp negative eigenvalues.
pub fn project_psd(factors: &[usize], x: &[f64]) -> RealVector {
    let m = to_matrix(factors, x);
    let n = m.nrows();
    let projected: DMatrix<Complex64> = if is_real(&m) {
        let re = m.map(|z| z.re);
        let eig = re.symmetric_eigen();
        if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
            return x.to_vec();
        }
        let mut out = DMatrix::<f64>::zeros(n, n);
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            if l > 0.0 {
                let v = eig.eigenvectors.column(k);
                out += l * &v * v.transpose();
            }
        }
        out.map(|r| Complex64::new(r, 0.0))
    } else {
        let eig = m.symmetric_eigen();
        if eig.eigenvalues.iter().all(|&l| l >= 0.0) {
            return x.to_vec();
        }
        let mut out = DMatrix::<Complex64>::zeros(n, n);
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            if l > 0.0 {
                let v = eig.eigenvectors.column(k);
                out += &v * v.adjoint() * Complex64::new(l, 0.0);
            }
        }
        out
    };
    from_matrix(factors, &projected)
}

/// Rank-one elements `|v><v|` for `v` in `{e_i, (e_i+e_j)/√2, (e_i+i e_j)/√2}`.
/// They span the Hermitian space; their conic hull is a proper subcone of
/// the PSD cone.
pub fn spanning_rank_ones(factors: &[usize]) -> Vec<RealVector> {
    let n = matrix_dim(factors);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[i] = Complex64::new(1.0, 0.0);
        out.push(rank_one(factors, &v));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            v[i] = Complex64::new(r, 0.0);
            v[j] = Complex64::new(r, 0.0);
            out.push(rank_one(factors, &v));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            v[i] = Complex64::new(r, 0.0);
            v[j] = Complex64::new(0.0, r);
            out.push(rank_one(factors, &v));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dot, kron};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basis_is_orthonormal_under_trace() {
        for factors in [vec![2], vec![3], vec![2, 2]] {
            let b = basis(&factors);
            let n = real_dim(&factors);
            for a in 0..n {
                let ma = to_matrix(&factors, &crate::linalg::unit_vector(n, a));
                let back = from_matrix(&factors, &ma);
                for (k, v) in back.iter().enumerate() {
                    let expect = if k == a { 1.0 } else { 0.0 };
                    assert!((v - expect).abs() < 1e-12);
                }
                // Hermitian
                assert!((ma.adjoint() - &ma).norm() < 1e-12);
            }
            assert_eq!(b.elements.len(), n);
        }
    }

    #[test]
    fn vector_inner_product_is_trace_inner_product() {
        let f = [2usize];
        let x = vec![0.3, 0.7, 0.1, -0.2];
        let y = vec![1.0, -0.5, 0.4, 0.9];
        let tr = (to_matrix(&f, &x) * to_matrix(&f, &y)).trace().re;
        assert!((tr - dot(&x, &y)).abs() < 1e-12);
    }

    #[test]
    fn tensor_coordinates_are_kronecker() {
        let a = rank_one(&[2], &[c(0.6, 0.0), c(0.0, 0.8)]);
        let b = rank_one(&[2], &[c(1.0, 0.0), c(0.0, 0.0)]);
        let ma = to_matrix(&[2], &a);
        let mb = to_matrix(&[2], &b);
        let joint = from_matrix(&[2, 2], &ma.kronecker(&mb));
        let k = kron(&a, &b);
        for (u, v) in joint.iter().zip(&k) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn projection_clamps_negative_eigenvalue() {
        // diag(1, -1)
        let x = vec![1.0, -1.0, 0.0, 0.0];
        let p = project_psd(&[2], &x);
        assert!((p[0] - 1.0).abs() < 1e-12 && p[1].abs() < 1e-12);
    }

    #[test]
    fn transpose_signs_flag_antisymmetric_elements() {
        let b = basis(&[2]);
        assert_eq!(b.transpose_signs, vec![1.0, 1.0, 1.0, -1.0]);
    }
}
