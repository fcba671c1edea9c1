//! Linear maps between systems, stored as vectors.
//!
//! A map `f: A → B` with matrix `M` (so `f(s) = M s` in coordinates) is
//! stored as `v[b·dim A + a] = σ_a M[b][a]`, where `σ` are the input
//! system's transpose signs. For quantum systems `v` is then exactly the
//! Choi operator `Σ_ab v_ba B_b ⊗ B_a` (output factors first), and the
//! Euclidean inner product of two such vectors equals the Frobenius inner
//! product of their matrices.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{System, SystemKind};
use crate::cone::Cone;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{dot, RealVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessCone {
    pub input: System,
    pub output: System,
    pub cone: Cone,
}

/// Which cone orders `u_in − f*(u_out)` when testing subcausality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ordering {
    /// The effect cone `K_A`: physical subcausal processes.
    EffectCone,
    /// The dual state cone `(K^A)*`: the relaxed ordering.
    DualStateCone,
}

impl ProcessCone {
    /// Completely positive maps between quantum systems, nonnegative
    /// matrices between classical ones, positivity-preserving maps
    /// (`TensorMax(K^out, (K^in)*)`) between polyhedral ones.
    pub fn default_for(input: &System, output: &System) -> Result<Self> {
        let cone = match (&input.kind, &output.kind) {
            (SystemKind::Quantum { factors: fi }, SystemKind::Quantum { factors: fo }) => {
                Cone::psd_factors(fo.iter().chain(fi).copied().collect())
            }
            (SystemKind::Classical { n }, SystemKind::Classical { n: m }) => Cone::orthant(n * m),
            (SystemKind::Quantum { factors }, SystemKind::Classical { n }) => {
                Cone::product(vec![Cone::psd_factors(factors.clone()); *n])
            }
            _ if input.is_polyhedral() && output.is_polyhedral() => {
                Cone::tensor_max(output.state_cone.clone(), input.state_cone.dual())
            }
            _ => {
                return Err(Error::Unsupported(format!(
                    "no default process cone from {} to {}; supply a custom cone",
                    input.label, output.label
                )))
            }
        };
        Ok(ProcessCone {
            input: input.clone(),
            output: output.clone(),
            cone,
        })
    }

    pub fn custom(input: &System, output: &System, cone: Cone) -> Result<Self> {
        check_dim(input.dim() * output.dim(), cone.dim())?;
        Ok(ProcessCone {
            input: input.clone(),
            output: output.clone(),
            cone,
        })
    }

    pub fn dim(&self) -> usize {
        self.input.dim() * self.output.dim()
    }

    pub fn contains(&self, v: &[f64], tol: f64) -> Result<bool> {
        self.cone.contains(v, tol)
    }

    /// The matrix `M` of the map (`dim out × dim in`).
    pub fn to_matrix(&self, v: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.dim(), v.len())?;
        let (ni, no) = (self.input.dim(), self.output.dim());
        let sig = self.input.transpose_signs();
        Ok(DMatrix::from_fn(no, ni, |b, a| sig[a] * v[b * ni + a]))
    }

    pub fn from_matrix(&self, m: &DMatrix<f64>) -> Result<RealVector> {
        let (ni, no) = (self.input.dim(), self.output.dim());
        if m.nrows() != no || m.ncols() != ni {
            return Err(Error::DimensionMismatch {
                expected: no * ni,
                found: m.nrows() * m.ncols(),
            });
        }
        let sig = self.input.transpose_signs();
        let mut v = vec![0.0; ni * no];
        for b in 0..no {
            for a in 0..ni {
                v[b * ni + a] = sig[a] * m[(b, a)];
            }
        }
        Ok(v)
    }

    /// `f(s)`.
    pub fn apply(&self, v: &[f64], s: &[f64]) -> Result<RealVector> {
        check_dim(self.input.dim(), s.len())?;
        let m = self.to_matrix(v)?;
        Ok((m * nalgebra::DVector::from_column_slice(s)).iter().copied().collect())
    }

    /// `f*(e)`, the effect `e ∘ f` on the input.
    pub fn pullback(&self, v: &[f64], e: &[f64]) -> Result<RealVector> {
        check_dim(self.output.dim(), e.len())?;
        let m = self.to_matrix(v)?;
        Ok(m.tr_mul(&nalgebra::DVector::from_column_slice(e)).iter().copied().collect())
    }

    /// The vector `w` with `⟨w, v⟩ = ⟨e, f_v(s)⟩` for every process `v`.
    pub fn evaluation_functional(&self, s: &[f64], e: &[f64]) -> Result<RealVector> {
        check_dim(self.input.dim(), s.len())?;
        check_dim(self.output.dim(), e.len())?;
        let sig = self.input.transpose_signs();
        let ss: Vec<f64> = s.iter().zip(&sig).map(|(a, b)| a * b).collect();
        Ok(crate::linalg::kron(e, &ss))
    }

    pub fn identity(&self) -> Result<RealVector> {
        if self.input.dim() != self.output.dim() {
            return Err(Error::Invalid("identity needs equal input and output".into()));
        }
        self.from_matrix(&DMatrix::identity(self.input.dim(), self.input.dim()))
    }

    /// Discard the input and prepare `s` on the output: `M = s u_inᵀ`.
    pub fn prepare_and_discard(&self, s: &[f64]) -> Result<RealVector> {
        check_dim(self.output.dim(), s.len())?;
        let u = &self.input.unit_effect;
        self.from_matrix(&DMatrix::from_fn(s.len(), u.len(), |b, a| s[b] * u[a]))
    }

    /// Sanity check that `v` sends spanning states of the input to vectors
    /// on which every spanning effect of the output is nonnegative.
    pub fn preserves_positivity(&self, v: &[f64], tol: f64) -> Result<bool> {
        let effects = self.output.effect_cone.spanning_elements()?;
        for s in self.input.state_cone.spanning_elements()? {
            let out = self.apply(v, &s)?;
            if effects.iter().any(|e| dot(e, &out) < -tol) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Rank of the evaluation map `v ↦ (⟨e, f_v(s)⟩)` over spanning states
    /// of the input and spanning effects of the output; full rank
    /// (`dim`) means processes are determined by these statistics.
    pub fn tomography_rank(&self) -> Result<usize> {
        let states = self.input.state_cone.spanning_elements()?;
        let effects = self.output.effect_cone.spanning_elements()?;
        let rs = crate::linalg::rank_of_rows(&states, self.input.dim(), 1e-10);
        let re = crate::linalg::rank_of_rows(&effects, self.output.dim(), 1e-10);
        // The evaluation rows are Kronecker products, so the rank factorises.
        Ok(rs * re)
    }

    fn require_member(&self, v: &[f64], tol: f64) -> Result<()> {
        if !self.cone.contains(v, tol)? {
            return Err(Error::validation(
                "process in the process cone",
                format!("{} → {}: vector is not in the process cone", self.input.label, self.output.label),
            ));
        }
        Ok(())
    }

    /// `u_in − f*(u_out)`.
    pub fn causality_defect(&self, v: &[f64]) -> Result<RealVector> {
        let pulled = self.pullback(v, &self.output.unit_effect)?;
        Ok(self.input.unit_effect.iter().zip(&pulled).map(|(a, b)| a - b).collect())
    }
}

/// `‖f*(u_out) − u_in‖ ≤ tol`. Errors if `v` is outside the process cone.
pub fn is_causal_process(pc: &ProcessCone, v: &[f64], tol: f64) -> Result<bool> {
    pc.require_member(v, tol)?;
    Ok(crate::linalg::norm(&pc.causality_defect(v)?) <= tol)
}

/// `u_in − f*(u_out)` in the chosen ordering cone within `tol`.
pub fn is_subcausal_process(pc: &ProcessCone, v: &[f64], ordering: Ordering, tol: f64) -> Result<bool> {
    pc.require_member(v, tol)?;
    let d = pc.causality_defect(v)?;
    match ordering {
        Ordering::EffectCone => pc.input.effect_cone.contains(&d, tol),
        Ordering::DualStateCone => pc.input.state_cone.dual().contains(&d, tol),
    }
}

/// `g ∘ f` for `f` in `first` and `g` in `second`, as a process vector of
/// `first.input → second.output`.
pub fn compose_processes(first: &ProcessCone, f: &[f64], second: &ProcessCone, g: &[f64]) -> Result<(ProcessCone, RealVector)> {
    check_dim(first.output.dim(), second.input.dim())?;
    let m = second.to_matrix(g)? * first.to_matrix(f)?;
    let pc = ProcessCone::default_for(&first.input, &second.output)?;
    let v = pc.from_matrix(&m)?;
    Ok((pc, v))
}

#[cfg(test)]
mod tests {
    use super::super::tests::{bit, qubit};
    use super::*;
    use crate::cone::hermitian;
    use crate::linalg::scale;

    #[test]
    fn identity_is_causal_and_half_identity_subcausal() {
        for sys in [qubit(), bit()] {
            let pc = ProcessCone::default_for(&sys, &sys).unwrap();
            let id = pc.identity().unwrap();
            assert!(pc.contains(&id, 1e-9).unwrap());
            assert!(is_causal_process(&pc, &id, 1e-9).unwrap());
            let half = scale(&id, 0.5);
            assert!(!is_causal_process(&pc, &half, 1e-9).unwrap());
            assert!(is_subcausal_process(&pc, &half, Ordering::EffectCone, 1e-9).unwrap());
            assert!(is_subcausal_process(&pc, &half, Ordering::DualStateCone, 1e-9).unwrap());
            let s = sys.interior_causal_state().unwrap();
            let out = pc.apply(&id, &s).unwrap();
            for (a, b) in out.iter().zip(&s) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn qubit_identity_choi_is_unnormalised_bell() {
        let q = qubit();
        let pc = ProcessCone::default_for(&q, &q).unwrap();
        let id = pc.identity().unwrap();
        let eig = hermitian::eigenvalues(&[2, 2], &id);
        let mut e = eig.clone();
        e.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip([0.0, 0.0, 0.0, 2.0]) {
            assert!((a - b).abs() < 1e-12, "{:?}", eig);
        }
    }

    #[test]
    fn depolarising_channel_is_causal() {
        let q = qubit();
        let pc = ProcessCone::default_for(&q, &q).unwrap();
        let mixed = scale(&hermitian::identity_coords(&[2]), 0.5);
        let dep = pc.prepare_and_discard(&mixed).unwrap();
        assert!(pc.contains(&dep, 1e-12).unwrap());
        assert!(is_causal_process(&pc, &dep, 1e-12).unwrap());
        // It sends every Hermitian basis state to tr(ρ)·I/2.
        for a in 0..4 {
            let e = crate::linalg::unit_vector(4, a);
            let out = pc.apply(&dep, &e).unwrap();
            let tr = dot(&q.unit_effect, &e);
            for (x, y) in out.iter().zip(&mixed) {
                assert!((x - tr * y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn transpose_is_positive_but_not_completely_positive() {
        let q = qubit();
        let pc = ProcessCone::default_for(&q, &q).unwrap();
        let signs = q.transpose_signs();
        let t = pc.from_matrix(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(signs))).unwrap();
        assert!(pc.preserves_positivity(&t, 1e-9).unwrap());
        assert!(!pc.contains(&t, 1e-6).unwrap());
    }

    #[test]
    fn evaluation_functional_matches_apply() {
        let q = qubit();
        let pc = ProcessCone::default_for(&q, &q).unwrap();
        let v: Vec<f64> = (0..16).map(|i| (i as f64 * 0.37).sin()).collect();
        let s = vec![0.3, -0.2, 0.5, 0.7];
        let e = vec![1.0, 0.4, -0.3, 0.2];
        let w = pc.evaluation_functional(&s, &e).unwrap();
        assert!((dot(&w, &v) - dot(&e, &pc.apply(&v, &s).unwrap())).abs() < 1e-12);
        assert_eq!(pc.tomography_rank().unwrap(), 16);
    }

    #[test]
    fn composition_multiplies_matrices() {
        let b = bit();
        let pc = ProcessCone::default_for(&b, &b).unwrap();
        let flip = pc.from_matrix(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let (_, ff) = compose_processes(&pc, &flip, &pc, &flip).unwrap();
        assert_eq!(ff, pc.identity().unwrap());
    }
}
