//! Closed convex cones in coordinate spaces, with membership, strict
//! interior, dual and Euclidean projection oracles.

pub mod dd;
pub mod hermitian;
pub mod nnls;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{add, dot, kron, norm, normalized, scale, sub, RealVector};

/// Library-wide default tolerance for geometric predicates.
pub const DEFAULT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Cone {
    /// Nonnegative orthant of `R^dim`.
    Orthant { dim: usize },
    /// PSD Hermitian operators on `⊗ C^{d_k}`, in the tensor-product
    /// Hermitian basis of [`hermitian`]. A single factor is the plain
    /// `d × d` PSD cone embedded in `R^{d²}`.
    PsdHermitian { factors: Vec<usize> },
    /// Conic hull of the generators.
    PolyhedralV {
        dim: usize,
        #[serde(with = "crate::schema::decimal_vecs")]
        generators: Vec<RealVector>,
    },
    /// `{x : ⟨n, x⟩ ≥ 0}` for each normal `n`.
    PolyhedralH {
        dim: usize,
        #[serde(with = "crate::schema::decimal_vecs")]
        normals: Vec<RealVector>,
    },
    /// Cartesian product; coordinates are concatenated in order.
    Product { parts: Vec<Cone> },
    /// Conic hull of `a ⊗ b` for generators `a`, `b` of the factors.
    TensorMin { left: Box<Cone>, right: Box<Cone> },
    /// Dual of the minimal tensor product of the duals.
    TensorMax { left: Box<Cone>, right: Box<Cone> },
    DualOf { inner: Box<Cone> },
}

impl Cone {
    pub fn orthant(dim: usize) -> Self {
        Cone::Orthant { dim }
    }

    pub fn psd(d: usize) -> Self {
        Cone::PsdHermitian { factors: vec![d] }
    }

    pub fn psd_factors(factors: Vec<usize>) -> Self {
        Cone::PsdHermitian { factors }
    }

    pub fn polyhedral_v(dim: usize, generators: Vec<RealVector>) -> Result<Self> {
        for g in &generators {
            check_dim(dim, g.len())?;
        }
        Ok(Cone::PolyhedralV { dim, generators })
    }

    pub fn polyhedral_h(dim: usize, normals: Vec<RealVector>) -> Result<Self> {
        for n in &normals {
            check_dim(dim, n.len())?;
        }
        Ok(Cone::PolyhedralH { dim, normals })
    }

    /// `{0} ⊂ R^dim`.
    pub fn zero(dim: usize) -> Self {
        Cone::PolyhedralV {
            dim,
            generators: vec![],
        }
    }

    /// All of `R^dim`.
    pub fn free(dim: usize) -> Self {
        Cone::PolyhedralH {
            dim,
            normals: vec![],
        }
    }

    pub fn product(parts: Vec<Cone>) -> Self {
        Cone::Product { parts }
    }

    pub fn tensor_min(left: Cone, right: Cone) -> Self {
        Cone::TensorMin {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn tensor_max(left: Cone, right: Cone) -> Self {
        Cone::TensorMax {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    pub fn dual_of(inner: Cone) -> Self {
        Cone::DualOf {
            inner: Box::new(inner),
        }
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        match self {
            Cone::Orthant { dim } => *dim,
            Cone::PsdHermitian { factors } => hermitian::real_dim(factors),
            Cone::PolyhedralV { dim, .. } | Cone::PolyhedralH { dim, .. } => *dim,
            Cone::Product { parts } => parts.iter().map(Cone::dim).sum(),
            Cone::TensorMin { left, right } | Cone::TensorMax { left, right } => {
                left.dim() * right.dim()
            }
            Cone::DualOf { inner } => inner.dim(),
        }
    }

    pub fn is_polyhedral(&self) -> bool {
        match self {
            Cone::Orthant { .. } | Cone::PolyhedralV { .. } | Cone::PolyhedralH { .. } => true,
            Cone::PsdHermitian { factors } => factors.iter().all(|&d| d <= 1),
            Cone::Product { parts } => parts.iter().all(Cone::is_polyhedral),
            Cone::TensorMin { left, right } | Cone::TensorMax { left, right } => {
                left.is_polyhedral() && right.is_polyhedral()
            }
            Cone::DualOf { inner } => inner.is_polyhedral(),
        }
    }

    fn require_polyhedral_factors(left: &Cone, right: &Cone) -> Result<()> {
        if left.is_polyhedral() && right.is_polyhedral() {
            Ok(())
        } else {
            Err(Error::Unsupported(
                "tensor composites are restricted to polyhedral factors".into(),
            ))
        }
    }

    /// The dual cone `K* = {v : ⟨v, s⟩ ≥ 0 ∀ s ∈ K}`.
    pub fn dual(&self) -> Cone {
        match self {
            Cone::Orthant { dim } => Cone::Orthant { dim: *dim },
            Cone::PsdHermitian { factors } => Cone::PsdHermitian {
                factors: factors.clone(),
            },
            Cone::PolyhedralV { dim, generators } => Cone::PolyhedralH {
                dim: *dim,
                normals: generators.clone(),
            },
            Cone::PolyhedralH { dim, normals } => Cone::PolyhedralV {
                dim: *dim,
                generators: normals.clone(),
            },
            Cone::Product { parts } => Cone::Product {
                parts: parts.iter().map(Cone::dual).collect(),
            },
            Cone::TensorMin { left, right } => Cone::tensor_max(left.dual(), right.dual()),
            Cone::TensorMax { left, right } => Cone::tensor_min(left.dual(), right.dual()),
            Cone::DualOf { inner } => (**inner).clone(),
        }
    }

    /// Finite generators of the cone (spanning, with conic hull inside the
    /// cone). Unsupported for H-represented and dual-wrapped cones.
    pub fn generators(&self) -> Result<Vec<RealVector>> {
        match self {
            Cone::Orthant { dim } => Ok((0..*dim).map(|i| crate::linalg::unit_vector(*dim, i)).collect()),
            Cone::PsdHermitian { factors } => Ok(hermitian::spanning_rank_ones(factors)),
            Cone::PolyhedralV { generators, .. } => Ok(generators.clone()),
            Cone::Product { parts } => {
                let total = self.dim();
                let mut out = Vec::new();
                let mut offset = 0;
                for p in parts {
                    for g in p.generators()? {
                        let mut v = vec![0.0; total];
                        v[offset..offset + g.len()].copy_from_slice(&g);
                        out.push(v);
                    }
                    offset += p.dim();
                }
                Ok(out)
            }
            Cone::TensorMin { left, right } => {
                Self::require_polyhedral_factors(left, right)?;
                let a = left.generators()?;
                let b = right.generators()?;
                Ok(a.iter().flat_map(|x| b.iter().map(move |y| kron(x, y))).collect())
            }
            Cone::PolyhedralH { .. } | Cone::TensorMax { .. } | Cone::DualOf { .. } => {
                Err(Error::Unsupported(
                    "generators are not available for this representation; dualise first".into(),
                ))
            }
        }
    }

    /// Complete finite generating set of a polyhedral cone, running a
    /// double-description conversion where the representation is by
    /// inequalities.
    pub fn polyhedral_generators(&self) -> Result<Vec<RealVector>> {
        match self {
            Cone::Orthant { .. } | Cone::PolyhedralV { .. } => self.generators(),
            Cone::PsdHermitian { factors } if self.is_polyhedral() => {
                // Trivial 1x1 factors: the cone is a half line.
                let _ = factors;
                self.generators()
            }
            Cone::PsdHermitian { .. } => Err(Error::Unsupported(
                "PSD cone has no finite generating set".into(),
            )),
            Cone::PolyhedralH { dim, normals } => dd::h_to_v(*dim, normals),
            Cone::Product { parts } => {
                let total = self.dim();
                let mut out = Vec::new();
                let mut offset = 0;
                for p in parts {
                    for g in p.polyhedral_generators()? {
                        let mut v = vec![0.0; total];
                        v[offset..offset + g.len()].copy_from_slice(&g);
                        out.push(v);
                    }
                    offset += p.dim();
                }
                Ok(out)
            }
            Cone::TensorMin { left, right } => {
                Self::require_polyhedral_factors(left, right)?;
                let a = left.polyhedral_generators()?;
                let b = right.polyhedral_generators()?;
                Ok(a.iter().flat_map(|x| b.iter().map(move |y| kron(x, y))).collect())
            }
            Cone::TensorMax { left, right } => {
                Self::require_polyhedral_factors(left, right)?;
                dd::h_to_v(self.dim(), &self.dual().polyhedral_generators()?)
            }
            Cone::DualOf { inner } => dd::h_to_v(self.dim(), &inner.polyhedral_generators()?),
        }
    }

    /// A finite set whose conic hull lies in the cone and spans its linear
    /// span. Unlike [`Cone::generators`] this works for every variant (it
    /// may run a double-description conversion).
    pub fn spanning_elements(&self) -> Result<Vec<RealVector>> {
        match self {
            Cone::TensorMax { left, right } => {
                // The minimal tensor product sits inside and spans the same space.
                Self::require_polyhedral_factors(left, right)?;
                let a = left.spanning_elements()?;
                let b = right.spanning_elements()?;
                Ok(a.iter().flat_map(|x| b.iter().map(move |y| kron(x, y))).collect())
            }
            Cone::PsdHermitian { .. } => self.generators(),
            Cone::DualOf { inner } => inner.dual().spanning_elements(),
            Cone::Product { parts } => {
                let total = self.dim();
                let mut out = Vec::new();
                let mut offset = 0;
                for p in parts {
                    for g in p.spanning_elements()? {
                        let mut v = vec![0.0; total];
                        v[offset..offset + g.len()].copy_from_slice(&g);
                        out.push(v);
                    }
                    offset += p.dim();
                }
                Ok(out)
            }
            Cone::TensorMin { left, right } => {
                Self::require_polyhedral_factors(left, right)?;
                let a = left.spanning_elements()?;
                let b = right.spanning_elements()?;
                Ok(a.iter().flat_map(|x| b.iter().map(move |y| kron(x, y))).collect())
            }
            _ => self.polyhedral_generators(),
        }
    }

    /// Membership up to `tol`: true iff the distance from `x` to the cone is
    /// at most `tol` (for H-represented cones, each violated inequality is
    /// measured separately).
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        check_dim(self.dim(), x.len())?;
        if tol < 0.0 {
            return Err(Error::Invalid("tolerance must be nonnegative".into()));
        }
        Ok(match self {
            Cone::Orthant { .. } => x.iter().all(|&v| v >= -tol),
            Cone::PsdHermitian { factors } => hermitian::min_eigenvalue(factors, x) >= -tol,
            Cone::PolyhedralV { generators, .. } => {
                let p = nnls::nnls(generators, x)?;
                norm(&sub(x, &p.point)) <= tol
            }
            Cone::PolyhedralH { normals, .. } => normals
                .iter()
                .filter(|n| norm(n) > 0.0)
                .all(|n| dot(&normalized(n), x) >= -tol),
            Cone::Product { parts } => {
                let mut offset = 0;
                for p in parts {
                    let d = p.dim();
                    if !p.contains(&x[offset..offset + d], tol)? {
                        return Ok(false);
                    }
                    offset += d;
                }
                true
            }
            Cone::TensorMin { left, right } => {
                Self::require_polyhedral_factors(left, right)?;
                let gens = self.polyhedral_generators()?;
                let p = nnls::nnls(&gens, x)?;
                norm(&sub(x, &p.point)) <= tol
            }
            Cone::TensorMax { left, right } => {
                Self::require_polyhedral_factors(left, right)?;
                tensor_max_contains(left, right, x, tol)?
            }
            Cone::DualOf { inner } => inner.dual().contains(x, tol)?,
        })
    }

    /// Interior clearance of `x`; `strictly_contains(x, m)` is
    /// `clearance(x) ≥ m`. Inequality-type representations report the
    /// smallest normalised slack relative to `‖x‖`; the PSD cone reports its
    /// smallest eigenvalue; `DualOf(K)` reports `min ⟨x, g⟩` over unit
    /// generators `g` of `K`. Generated cones above
    /// [`FACET_CLEARANCE_MAX_DIM`] report how far `x/‖x‖` can move against
    /// the unit interior direction before leaving the cone.
    pub fn clearance(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        let nx = norm(x);
        let rel = |normals: &[RealVector]| -> f64 {
            if nx == 0.0 {
                return if normals.is_empty() { f64::INFINITY } else { 0.0 };
            }
            normals
                .iter()
                .filter(|n| norm(n) > 0.0)
                .map(|n| dot(&normalized(n), x) / nx)
                .fold(f64::INFINITY, f64::min)
        };
        Ok(match self {
            Cone::Orthant { .. } => {
                if nx == 0.0 {
                    0.0
                } else {
                    x.iter().copied().fold(f64::INFINITY, f64::min) / nx
                }
            }
            Cone::PsdHermitian { factors } => hermitian::min_eigenvalue(factors, x),
            Cone::PolyhedralH { normals, .. } => rel(normals),
            Cone::PolyhedralV { .. } | Cone::TensorMin { .. } if self.dim() > FACET_CLEARANCE_MAX_DIM => {
                generated_clearance(&self.polyhedral_generators()?, &self.interior_point()?, x)?
            }
            Cone::PolyhedralV { .. } | Cone::TensorMin { .. } | Cone::TensorMax { .. } => {
                let facets = self.dual().polyhedral_generators()?;
                rel(&facets)
            }
            Cone::Product { parts } => {
                let mut offset = 0;
                let mut best = f64::INFINITY;
                for p in parts {
                    let d = p.dim();
                    best = best.min(p.clearance(&x[offset..offset + d])?);
                    offset += d;
                }
                best
            }
            Cone::DualOf { inner } => {
                if inner.is_polyhedral() {
                    inner
                        .polyhedral_generators()?
                        .iter()
                        .filter(|g| norm(g) > 0.0)
                        .map(|g| dot(x, &normalized(g)))
                        .fold(f64::INFINITY, f64::min)
                } else {
                    inner.dual().clearance(x)?
                }
            }
        })
    }

    pub fn strictly_contains(&self, x: &[f64], margin: f64) -> Result<bool> {
        if margin <= 0.0 {
            return Err(Error::Invalid("margin must be positive".into()));
        }
        Ok(self.clearance(x)? >= margin)
    }

    /// Euclidean projection onto the cone.
    pub fn project(&self, x: &[f64]) -> Result<RealVector> {
        check_dim(self.dim(), x.len())?;
        match self {
            Cone::Orthant { .. } => Ok(x.iter().map(|v| v.max(0.0)).collect()),
            Cone::PsdHermitian { factors } => Ok(hermitian::project_psd(factors, x)),
            Cone::PolyhedralV { generators, .. } => Ok(nnls::nnls(generators, x)?.point),
            Cone::PolyhedralH { .. } | Cone::TensorMax { .. } => {
                // Moreau: Π_K(x) = x + Π_{K*}(−x).
                let neg: RealVector = x.iter().map(|v| -v).collect();
                Ok(add(x, &self.dual().project(&neg)?))
            }
            Cone::Product { parts } => {
                let mut out = Vec::with_capacity(x.len());
                let mut offset = 0;
                for p in parts {
                    let d = p.dim();
                    out.extend(p.project(&x[offset..offset + d])?);
                    offset += d;
                }
                Ok(out)
            }
            Cone::TensorMin { left, right } => {
                Self::require_polyhedral_factors(left, right)?;
                Ok(nnls::nnls(&self.polyhedral_generators()?, x)?.point)
            }
            Cone::DualOf { inner } => inner.dual().project(x),
        }
    }

    /// Distance from `x` to the cone.
    pub fn distance(&self, x: &[f64]) -> Result<f64> {
        Ok(norm(&sub(x, &self.project(x)?)))
    }

    /// A point in the relative interior (the interior when the cone is
    /// full-dimensional).
    pub fn interior_point(&self) -> Result<RealVector> {
        match self {
            Cone::Orthant { dim } => Ok(vec![1.0; *dim]),
            Cone::PsdHermitian { factors } => Ok(hermitian::identity_coords(factors)),
            Cone::PolyhedralV { dim, generators } => {
                let mut acc = vec![0.0; *dim];
                for g in generators {
                    if norm(g) > 0.0 {
                        crate::linalg::axpy(1.0, &normalized(g), &mut acc);
                    }
                }
                Ok(acc)
            }
            Cone::PolyhedralH { dim, .. } => {
                let gens = self.polyhedral_generators()?;
                let mut acc = vec![0.0; *dim];
                for g in &gens {
                    crate::linalg::axpy(1.0, g, &mut acc);
                }
                Ok(acc)
            }
            Cone::Product { parts } => {
                let mut out = Vec::new();
                for p in parts {
                    out.extend(p.interior_point()?);
                }
                Ok(out)
            }
            Cone::TensorMin { left, right } | Cone::TensorMax { left, right } => {
                Ok(kron(&left.interior_point()?, &right.interior_point()?))
            }
            Cone::DualOf { inner } => inner.dual().interior_point(),
        }
    }
}

/// Largest dimension in which the clearance of a generated cone is
/// measured against its facets; enumerating facets beyond this is too
/// costly.
pub const FACET_CLEARANCE_MAX_DIM: usize = 12;

/// `max {t : x/‖x‖ − t·ĉ ∈ cone(gens)}` with `ĉ` the unit interior
/// direction `c`. Positive exactly on the interior.
fn generated_clearance(gens: &[RealVector], c: &[f64], x: &[f64]) -> Result<f64> {
    use crate::solver::simplex::{solve_standard, LpOutcome};
    let nx = norm(x);
    if nx == 0.0 {
        return Ok(0.0);
    }
    let (xh, ch) = (scale(x, 1.0 / nx), normalized(c));
    let (d, k) = (x.len(), gens.len());
    // Columns: λ (k), t⁺, t⁻; rows: Σ λ_g g + t ĉ = x̂.
    let a = nalgebra::DMatrix::from_fn(d, k + 2, |i, j| {
        if j < k {
            gens[j][i]
        } else if j == k {
            ch[i]
        } else {
            -ch[i]
        }
    });
    let mut obj = vec![0.0; k + 2];
    obj[k] = 1.0;
    obj[k + 1] = -1.0;
    Ok(match solve_standard(&a, &xh, &obj)?.0 {
        LpOutcome::Optimal(w) => w[k] - w[k + 1],
        LpOutcome::Unbounded => f64::INFINITY,
        LpOutcome::Infeasible => f64::NEG_INFINITY,
    })
}

/// Contract the right tensor factor of `x ∈ R^{dl·dr}` against `g ∈ R^{dr}`.
pub fn contract_right(x: &[f64], dl: usize, dr: usize, g: &[f64]) -> RealVector {
    (0..dl)
        .map(|p| dot(&x[p * dr..(p + 1) * dr], g))
        .collect()
}

/// Contract the left tensor factor of `x ∈ R^{dl·dr}` against `h ∈ R^{dl}`.
pub fn contract_left(x: &[f64], dl: usize, dr: usize, h: &[f64]) -> RealVector {
    let mut out = vec![0.0; dr];
    for p in 0..dl {
        if h[p] != 0.0 {
            crate::linalg::axpy(h[p], &x[p * dr..(p + 1) * dr], &mut out);
        }
    }
    out
}

/// `x ∈ TensorMax(A, B)` iff contracting either factor with each generator
/// of that factor's dual lands in the other factor.
fn tensor_max_contains(left: &Cone, right: &Cone, x: &[f64], tol: f64) -> Result<bool> {
    let (dl, dr) = (left.dim(), right.dim());
    let right_dual = right.dual();
    let left_dual = left.dual();
    let right_dual_gens = right_dual.generators().or_else(|_| right_dual.polyhedral_generators());
    if let Ok(gens) = right_dual_gens {
        for g in gens.iter().filter(|g| norm(g) > 0.0) {
            if !left.contains(&contract_right(x, dl, dr, &normalized(g)), tol)? {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    let gens = left_dual.polyhedral_generators()?;
    for h in gens.iter().filter(|h| norm(h) > 0.0) {
        if !right.contains(&contract_left(x, dl, dr, &normalized(h)), tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Moreau decomposition `x = Π_K(x) + Π_{K°}(x)` with the polar part
/// computed as `−Π_{K*}(−x)`. Returns both parts.
pub fn moreau_split(cone: &Cone, x: &[f64]) -> Result<(RealVector, RealVector)> {
    let p = cone.project(x)?;
    let neg: RealVector = x.iter().map(|v| -v).collect();
    let q = scale(&cone.dual().project(&neg)?, -1.0);
    Ok((p, q))
}
