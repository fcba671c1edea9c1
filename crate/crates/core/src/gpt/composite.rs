use serde::{Deserialize, Serialize};

use super::{System, SystemKind};
use crate::cone::Cone;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{kron, RealVector};

/// How the cones of a composite are formed from its factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum CompositeRule {
    /// Quantum and classical factors use their own composites; other
    /// polyhedral factors use [`CompositeRule::MinTensor`].
    #[default]
    Native,
    /// States: minimal tensor product; effects: maximal tensor product.
    MinTensor,
    /// States: maximal tensor product (relative to the effects); effects:
    /// minimal tensor product.
    MaxTensor,
    Custom { state_cone: Cone, effect_cone: Cone },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeSystem {
    pub factors: Vec<System>,
    pub rule: CompositeRule,
    /// The composite as a system in its own right; coordinates are
    /// Kronecker products of factor coordinates.
    pub system: System,
}

impl std::ops::Deref for CompositeSystem {
    type Target = System;

    fn deref(&self) -> &System {
        &self.system
    }
}

impl CompositeSystem {
    pub fn factor_dims(&self) -> Vec<usize> {
        self.factors.iter().map(System::dim).collect()
    }
}

fn label_of(a: &System, b: &System) -> String {
    format!("{}⊗{}", a.label, b.label)
}

fn repeat_cone(n: usize, c: &Cone) -> Cone {
    Cone::product(vec![c.clone(); n])
}

fn pair(a: &System, b: &System, rule: &CompositeRule) -> Result<System> {
    let unit = kron(&a.unit_effect, &b.unit_effect);
    let label = label_of(a, b);
    let polyhedral = a.is_polyhedral() && b.is_polyhedral();
    match rule {
        CompositeRule::Custom { state_cone, effect_cone } => {
            System::new(label, SystemKind::Polyhedral, state_cone.clone(), effect_cone.clone(), unit)
        }
        CompositeRule::MinTensor | CompositeRule::MaxTensor if !polyhedral => Err(Error::Unsupported(
            "minimal/maximal tensor rules need polyhedral factors; use the native rule".into(),
        )),
        CompositeRule::MinTensor => System::new(
            label,
            SystemKind::Polyhedral,
            Cone::tensor_min(a.state_cone.clone(), b.state_cone.clone()),
            Cone::tensor_max(a.effect_cone.clone(), b.effect_cone.clone()),
            unit,
        ),
        CompositeRule::MaxTensor => System::new(
            label,
            SystemKind::Polyhedral,
            Cone::tensor_max(a.effect_cone.dual(), b.effect_cone.dual()),
            Cone::tensor_min(a.effect_cone.clone(), b.effect_cone.clone()),
            unit,
        ),
        CompositeRule::Native => match (&a.kind, &b.kind) {
            (SystemKind::Classical { n }, SystemKind::Classical { n: m }) => {
                let d = n * m;
                System::new(label, SystemKind::Classical { n: d }, Cone::orthant(d), Cone::orthant(d), unit)
            }
            (SystemKind::Quantum { factors: fa }, SystemKind::Quantum { factors: fb }) => {
                let factors: Vec<usize> = fa.iter().chain(fb).copied().collect();
                System::new(
                    label,
                    SystemKind::Quantum { factors: factors.clone() },
                    Cone::psd_factors(factors.clone()),
                    Cone::psd_factors(factors),
                    unit,
                )
            }
            (SystemKind::Classical { n }, inner) => System::new(
                label,
                SystemKind::Hybrid {
                    classical: *n,
                    inner: Box::new(inner.clone()),
                },
                repeat_cone(*n, &b.state_cone),
                repeat_cone(*n, &b.effect_cone),
                unit,
            ),
            _ if polyhedral => pair(a, b, &CompositeRule::MinTensor),
            _ => Err(Error::Unsupported(format!(
                "no native composite for {} ⊗ {}; a classical factor must come first",
                a.label, b.label
            ))),
        },
    }
}

/// Composite of the listed systems, grouped from the left.
pub fn compose_systems(systems: &[System], rule: CompositeRule) -> Result<CompositeSystem> {
    let (first, rest) = systems
        .split_first()
        .ok_or_else(|| Error::Invalid("composite of no systems".into()))?;
    let mut acc = first.clone();
    for s in rest {
        acc = pair(&acc, s, &rule)?;
    }
    Ok(CompositeSystem {
        factors: systems.to_vec(),
        rule,
        system: acc,
    })
}

/// Discards every factor except `keep` by applying its unit effect.
pub fn marginalise(composite: &CompositeSystem, s: &[f64], keep: usize) -> Result<RealVector> {
    check_dim(composite.dim(), s.len())?;
    let dims = composite.factor_dims();
    if keep >= dims.len() {
        return Err(Error::Invalid(format!("factor {} out of range", keep)));
    }
    let units: Vec<&RealVector> = composite.factors.iter().map(|f| &f.unit_effect).collect();
    marginalise_dims(&dims, &units, s, keep)
}

pub(crate) fn marginalise_dims(dims: &[usize], units: &[&RealVector], s: &[f64], keep: usize) -> Result<RealVector> {
    check_dim(dims.iter().product(), s.len())?;
    let mut out = vec![0.0; dims[keep]];
    let mut idx = vec![0usize; dims.len()];
    for &v in s {
        if v != 0.0 {
            let mut w = v;
            for (f, &i) in idx.iter().enumerate() {
                if f != keep {
                    w *= units[f][i];
                }
            }
            out[idx[keep]] += w;
        }
        // Advance the mixed-radix index, last factor fastest.
        for f in (0..dims.len()).rev() {
            idx[f] += 1;
            if idx[f] < dims[f] {
                break;
            }
            idx[f] = 0;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::tests::{bit, qubit};
    use super::*;
    use crate::cone::hermitian;
    use num_complex::Complex64;

    #[test]
    fn product_marginals() {
        let ab = compose_systems(&[bit(), bit()], CompositeRule::Native).unwrap();
        let sa = vec![0.25, 0.75];
        let sb = vec![1.0, 0.0];
        let s = kron(&sa, &sb);
        assert_eq!(marginalise(&ab, &s, 0).unwrap(), sa);
        assert_eq!(marginalise(&ab, &s, 1).unwrap(), sb);
        assert_eq!(ab.unit_effect, vec![1.0; 4]);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let qq = compose_systems(&[qubit(), qubit()], CompositeRule::Native).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let z = Complex64::new(0.0, 0.0);
        let bell = hermitian::rank_one(&[2, 2], &[Complex64::new(r, 0.0), z, z, Complex64::new(r, 0.0)]);
        let m = marginalise(&qq, &bell, 0).unwrap();
        let half: Vec<f64> = hermitian::identity_coords(&[2]).iter().map(|v| v / 2.0).collect();
        for (a, b) in m.iter().zip(&half) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rules_for_quantum() {
        assert!(compose_systems(&[qubit(), qubit()], CompositeRule::MinTensor).is_err());
        let h = compose_systems(&[bit(), qubit()], CompositeRule::Native).unwrap();
        assert_eq!(h.dim(), 8);
        assert!(compose_systems(&[qubit(), bit()], CompositeRule::Native).is_err());
    }
}
