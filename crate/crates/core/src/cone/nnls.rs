//! Lawson–Hanson active-set solver for nonnegative least squares,
//! `min ‖G λ − x‖` subject to `λ ≥ 0`, where the columns of `G` are the
//! generators of a polyhedral cone. Used for projection onto V-cones.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::RealVector;

pub struct NnlsSolution {
    pub weights: RealVector,
    /// `G λ`, the nearest point of the cone.
    pub point: RealVector,
}

fn residual(g: &DMatrix<f64>, lambda: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
    x - g * lambda
}

fn lstsq(g: &DMatrix<f64>, cols: &[usize], x: &DVector<f64>) -> DVector<f64> {
    let sub = g.select_columns(cols);
    let svd = sub.svd(true, true);
    let tol = 1e-13 * svd.singular_values.max().max(1.0);
    svd.solve(x, tol)
        .unwrap_or_else(|_| DVector::zeros(cols.len()))
}

pub fn nnls(generators: &[RealVector], x: &[f64]) -> Result<NnlsSolution> {
    let n = x.len();
    let k = generators.len();
    if k == 0 {
        return Ok(NnlsSolution {
            weights: vec![],
            point: vec![0.0; n],
        });
    }
    let g = DMatrix::from_fn(n, k, |i, j| generators[j][i]);
    let xv = DVector::from_column_slice(x);
    let scale = g.norm().max(1.0) * xv.norm().max(1.0);
    let tol = 1e-12 * scale;

    let mut lambda = DVector::<f64>::zeros(k);
    let mut passive = vec![false; k];
    // Columns that re-entered and were dropped again without moving λ. On
    // degenerate faces this is what makes plain Lawson–Hanson cycle.
    let mut blocked = vec![false; k];
    let max_outer = 3 * k + 50;
    let mut outer = 0;
    loop {
        let w = g.transpose() * residual(&g, &lambda, &xv);
        let candidate = (0..k)
            .filter(|&j| !passive[j] && !blocked[j])
            .max_by(|&a, &b| w[a].partial_cmp(&w[b]).unwrap_or(std::cmp::Ordering::Equal));
        let j = match candidate {
            Some(j) if w[j] > tol => j,
            _ => break,
        };
        outer += 1;
        if outer > max_outer {
            return Err(Error::NonConvergence(format!(
                "active-set projection did not settle after {} outer iterations (ill-conditioned generators?)",
                max_outer
            )));
        }
        passive[j] = true;
        let before = lambda.clone();
        let mut inner = 0;
        loop {
            inner += 1;
            if inner > max_outer {
                return Err(Error::NonConvergence(
                    "active-set inner loop exceeded its iteration cap".into(),
                ));
            }
            let cols: Vec<usize> = (0..k).filter(|&i| passive[i]).collect();
            let z_sub = lstsq(&g, &cols, &xv);
            let mut z = DVector::<f64>::zeros(k);
            for (idx, &c) in cols.iter().enumerate() {
                z[c] = z_sub[idx];
            }
            if cols.iter().all(|&c| z[c] > 0.0) {
                lambda = z;
                break;
            }
            // Step back towards the previous iterate until a weight hits zero.
            let mut step = 1.0f64;
            for &c in &cols {
                if z[c] <= 0.0 {
                    let denom = lambda[c] - z[c];
                    if denom > 0.0 {
                        step = step.min(lambda[c] / denom);
                    } else {
                        step = 0.0;
                    }
                }
            }
            lambda = &lambda + (&z - &lambda) * step;
            let mut moved = false;
            for &c in &cols {
                if lambda[c] <= 1e-15 * scale {
                    lambda[c] = 0.0;
                    passive[c] = false;
                    moved = true;
                }
            }
            if !moved {
                // Guard against stalling on a zero step with no removal.
                if let Some(&c) = cols.iter().find(|&&c| z[c] <= 0.0) {
                    lambda[c] = 0.0;
                    passive[c] = false;
                }
            }
        }
        if passive[j] || lambda != before {
            blocked.iter_mut().for_each(|b| *b = false);
        } else {
            blocked[j] = true;
        }
    }
    let point = &g * &lambda;
    Ok(NnlsSolution {
        weights: lambda.iter().copied().collect(),
        point: point.iter().copied().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projects_onto_wedge_face() {
        let gens = vec![vec![1.0, 0.0], vec![1.0, 1.0]];
        let s = nnls(&gens, &[0.0, 1.0]).unwrap();
        assert!((s.point[0] - 0.5).abs() < 1e-12);
        assert!((s.point[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn interior_point_is_reproduced() {
        let gens = vec![vec![1.0, 0.0], vec![1.0, 1.0]];
        let s = nnls(&gens, &[2.0, 1.0]).unwrap();
        assert!((s.weights[0] - 1.0).abs() < 1e-12);
        assert!((s.weights[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn polar_point_goes_to_origin() {
        let gens = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let s = nnls(&gens, &[-1.0, -3.0]).unwrap();
        assert!(s.point.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn duplicate_generators_are_tolerated() {
        let gens = vec![vec![1.0, 1.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        let s = nnls(&gens, &[1.0, 3.0]).unwrap();
        assert!((s.point[0] - 2.0).abs() < 1e-10 && (s.point[1] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn reprojecting_a_degenerate_face_point_terminates() {
        // Products of square-cone rays: 16 generators in dimension 9.
        let sq = [[1.0, 1.0, 1.0], [-1.0, 1.0, 1.0], [-1.0, -1.0, 1.0], [1.0, -1.0, 1.0]];
        let mut gens = Vec::new();
        for a in &sq {
            for b in &sq {
                gens.push(a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect::<Vec<_>>());
            }
        }
        let x = [-2.5089, 0.7398, -0.7953, -0.3593, -0.6312, -0.4652, 0.0371, 0.0191, 0.5035];
        let p = nnls(&gens, &x).unwrap().point;
        let pp = nnls(&gens, &p).unwrap().point;
        let moved: f64 = p.iter().zip(&pp).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(moved < 1e-10, "moved by {}", moved);
    }
}
