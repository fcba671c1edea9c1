//! Double description: generators of `{x : ⟨n_k, x⟩ ≥ 0 for all k}`.
//!
//! The lineality space is split off first; the pointed remainder is handled
//! by incremental insertion of constraints with a combinatorial adjacency
//! test. Only meant for the small composite cones that appear in money
//! programs (ambient dimension in the tens).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{dot, normalized, null_space, RealVector};

const EPS: f64 = 1e-9;

struct Ray {
    z: RealVector,
    zeros: Vec<bool>,
}

/// Returns a generating set: extreme rays of the pointed part plus `±` a
/// basis of the lineality space.
pub fn h_to_v(dim: usize, normals: &[RealVector]) -> Result<Vec<RealVector>> {
    let normals: Vec<RealVector> = normals
        .iter()
        .filter(|n| n.iter().any(|v| v.abs() > 0.0))
        .map(|n| normalized(n))
        .collect();
    let lineality = null_space(&normals, dim, 1e-10);
    // Orthonormal basis of the complement of the lineality space.
    let complement = null_space(&lineality, dim, 1e-10);
    let r = complement.len();
    let mut out: Vec<RealVector> = Vec::new();
    for l in &lineality {
        out.push(l.clone());
        out.push(l.iter().map(|v| -v).collect());
    }
    if r == 0 {
        return Ok(out);
    }
    let reduced: Vec<RealVector> = normals
        .iter()
        .map(|n| complement.iter().map(|q| dot(q, n)).collect())
        .collect();

    // Initial simplicial cone from r independent constraints.
    let mut chosen: Vec<usize> = Vec::new();
    let mut basis_rows: Vec<RealVector> = Vec::new();
    for (i, row) in reduced.iter().enumerate() {
        let mut trial = basis_rows.clone();
        trial.push(row.clone());
        if crate::linalg::rank_of_rows(&trial, r, 1e-9) == trial.len() {
            basis_rows = trial;
            chosen.push(i);
            if chosen.len() == r {
                break;
            }
        }
    }
    if chosen.len() < r {
        return Err(Error::Invalid(
            "double description: constraint rows do not span the reduced space".into(),
        ));
    }
    let a0 = DMatrix::from_fn(r, r, |i, j| basis_rows[i][j]);
    let inv = a0
        .try_inverse()
        .ok_or_else(|| Error::NonConvergence("double description: singular start basis".into()))?;
    let m = reduced.len();
    let mut processed = vec![false; m];
    for &c in &chosen {
        processed[c] = true;
    }
    let mut rays: Vec<Ray> = (0..r)
        .map(|j| {
            let z = normalized(&inv.column(j).iter().copied().collect::<Vec<_>>());
            let zeros = (0..m)
                .map(|k| processed[k] && dot(&reduced[k], &z).abs() <= EPS)
                .collect();
            Ray { z, zeros }
        })
        .collect();

    for k in 0..m {
        if processed[k] {
            continue;
        }
        let a = &reduced[k];
        let vals: Vec<f64> = rays.iter().map(|ray| dot(a, &ray.z)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] > EPS).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i] < -EPS).collect();
        let mut next: Vec<Ray> = Vec::new();
        for (i, ray) in rays.iter().enumerate() {
            if vals[i] >= -EPS {
                let mut zeros = ray.zeros.clone();
                zeros[k] = vals[i].abs() <= EPS;
                next.push(Ray {
                    z: ray.z.clone(),
                    zeros,
                });
            }
        }
        for &p in &pos {
            for &q in &neg {
                let common: Vec<bool> = rays[p]
                    .zeros
                    .iter()
                    .zip(&rays[q].zeros)
                    .map(|(x, y)| *x && *y)
                    .collect();
                let count = common.iter().filter(|&&b| b).count();
                if r >= 2 && count + 2 < r {
                    continue;
                }
                let adjacent = rays.iter().enumerate().all(|(t, other)| {
                    t == p
                        || t == q
                        || !common
                            .iter()
                            .zip(&other.zeros)
                            .all(|(c, o)| !*c || *o)
                });
                if !adjacent {
                    continue;
                }
                let z: RealVector = rays[q]
                    .z
                    .iter()
                    .zip(&rays[p].z)
                    .map(|(zq, zp)| vals[p] * zq - vals[q] * zp)
                    .collect();
                let z = normalized(&z);
                let mut zeros = common;
                zeros[k] = true;
                next.push(Ray { z, zeros });
            }
        }
        processed[k] = true;
        rays = next;
    }

    for ray in rays {
        let x: RealVector = (0..dim)
            .map(|i| complement.iter().zip(&ray.z).map(|(q, zi)| q[i] * zi).sum())
            .collect();
        out.push(normalized(&x));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn contains_dir(set: &[RealVector], v: &[f64]) -> bool {
        let v = normalized(v);
        set.iter()
            .any(|s| s.iter().zip(&v).all(|(a, b)| (a - b).abs() < 1e-8))
    }

    #[test]
    fn orthant_rays_are_unit_vectors() {
        let normals = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let rays = h_to_v(3, &normals).unwrap();
        assert_eq!(rays.len(), 3);
        assert!(contains_dir(&rays, &[1.0, 0.0, 0.0]));
    }

    #[test]
    fn square_cone_has_four_rays() {
        // Cone over the square |x|,|y| <= z.
        let normals = vec![
            vec![1.0, 0.0, 1.0],
            vec![-1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
            vec![0.0, -1.0, 1.0],
        ];
        let rays = h_to_v(3, &normals).unwrap();
        assert_eq!(rays.len(), 4);
        for (x, y) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            assert!(contains_dir(&rays, &[x, y, 1.0]));
        }
    }

    #[test]
    fn half_plane_reports_lineality() {
        let rays = h_to_v(2, &[vec![1.0, 0.0]]).unwrap();
        assert!(contains_dir(&rays, &[0.0, 1.0]));
        assert!(contains_dir(&rays, &[0.0, -1.0]));
        assert!(contains_dir(&rays, &[1.0, 0.0]));
        assert_eq!(rays.len(), 3);
    }

    #[test]
    fn whole_space_without_constraints() {
        let rays = h_to_v(2, &[]).unwrap();
        assert_eq!(rays.len(), 4);
    }

    #[test]
    fn opposite_constraints_leave_only_origin_direction_set() {
        let rays = h_to_v(1, &[vec![1.0], vec![-1.0]]).unwrap();
        assert!(rays.is_empty());
    }
}
