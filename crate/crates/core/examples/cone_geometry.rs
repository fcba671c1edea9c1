// Membership, strict interior, duals and projections on the cones that
// model states and effects.

use gptmint::cone::{hermitian, moreau_split};
use gptmint::linalg::{dot, norm, sub};
use gptmint::{Cone, Result};

pub fn run_example() -> Result<()> {
    // A square-based cone in R^3 and its dual.
    let square = Cone::polyhedral_v(
        3,
        vec![vec![1.0, 1.0, 1.0], vec![-1.0, 1.0, 1.0], vec![-1.0, -1.0, 1.0], vec![1.0, -1.0, 1.0]],
    )?;
    let dual = square.dual();
    println!("(0,0,1) in K: {}", square.contains(&[0.0, 0.0, 1.0], 1e-9)?);
    println!("(2,0,1) in K: {}", square.contains(&[2.0, 0.0, 1.0], 1e-9)?);
    println!("(1,0,1) in K*: {}", dual.contains(&[1.0, 0.0, 1.0], 1e-9)?);
    println!("clearance of (0,0,1): {:.6}", square.clearance(&[0.0, 0.0, 1.0])?);

    // Moreau: x = Π_K(x) + Π_K°(x) with orthogonal parts.
    let x = [2.0, -0.5, 0.3];
    let (p, q) = moreau_split(&square, &x)?;
    let residual = norm(&sub(&x, &gptmint::linalg::add(&p, &q)));
    println!("Π_K(x) = {:?}", p);
    println!("Moreau residual {:.1e}, ⟨Π_K, Π_K°⟩ = {:.1e}", residual, dot(&p, &q));

    // Qubit density operators: the PSD cone in the Hermitian basis.
    let psd = Cone::psd(2);
    let mixed = hermitian::identity_coords(&[2]);
    println!("I is strictly inside PSD(2): {}", psd.strictly_contains(&mixed, 1e-3)?);
    let clipped = psd.project(&[1.0, -0.5, 0.0, 0.0])?;
    println!("eigenvalues after projection: {:?}", hermitian::eigenvalues(&[2], &clipped));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
