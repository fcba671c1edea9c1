use serde::{Deserialize, Serialize};

use super::ConicProgram;
use crate::error::{Error, Result};
use crate::linalg::{normalized, norm, scale, RealVector};

/// Number of halvings (primal) or doublings (dual) tried when pulling a
/// candidate into the interior.
const SCALING_STEPS: i32 = 60;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlaterReport {
    pub primal_strict: bool,
    pub dual_strict: bool,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::schema::decimal_opt_vec")]
    pub primal_witness: Option<RealVector>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "crate::schema::decimal_opt_vec")]
    pub dual_witness: Option<RealVector>,
}

/// Slater check from the cones' own interior points.
pub fn check_slater(p: &ConicProgram, margin: f64) -> Result<SlaterReport> {
    check_slater_with(p, margin, None, None)
}

/// Looks for `X ∈ int K2` with `b − φ(X) ∈ int K1*` among `λ·X0`,
/// `λ = 1, 1/2, 1/4, …`, and for `y ∈ int K1` with `φ*(y) − C ∈ int K2*`
/// among `μ·y0`, `μ = 1, 2, 4, …`. Interior tests are applied to
/// unit-normalised vectors with clearance `margin`.
pub fn check_slater_with(
    p: &ConicProgram,
    margin: f64,
    x0: Option<&[f64]>,
    y0: Option<&[f64]>,
) -> Result<SlaterReport> {
    if margin <= 0.0 {
        return Err(Error::Invalid("margin must be positive".into()));
    }
    p.validate()?;
    let x0 = match x0 {
        Some(x) => x.to_vec(),
        None => p.k2.interior_point()?,
    };
    let y0 = match y0 {
        Some(y) => y.to_vec(),
        None => p.k1.interior_point()?,
    };
    let k1d = p.k1.dual();
    let k2d = p.k2.dual();
    let strict = |cone: &crate::cone::Cone, v: &[f64]| -> Result<bool> {
        if norm(v) == 0.0 {
            // The zero vector is interior only to the whole space.
            return Ok(cone.dim() == 0 || cone.clearance(v)? >= margin);
        }
        Ok(cone.clearance(&normalized(v))? >= margin)
    };

    let mut primal_witness = None;
    for k in 0..SCALING_STEPS {
        let x = scale(&x0, 0.5f64.powi(k));
        if strict(&p.k2, &x)? && strict(&k1d, &p.primal_slack(&x)?)? {
            primal_witness = Some(x);
            break;
        }
    }
    let mut dual_witness = None;
    for k in 0..SCALING_STEPS {
        let y = scale(&y0, 2f64.powi(k));
        if strict(&p.k1, &y)? && strict(&k2d, &p.dual_slack(&y)?)? {
            dual_witness = Some(y);
            break;
        }
    }
    Ok(SlaterReport {
        primal_strict: primal_witness.is_some(),
        dual_strict: dual_witness.is_some(),
        primal_witness,
        dual_witness,
    })
}
