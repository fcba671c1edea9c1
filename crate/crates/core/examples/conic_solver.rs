// Solving cone programs `max ⟨C,X⟩ s.t. b − φ(X) ∈ K1*, X ∈ K2` with a
// certified dual, and cross-checking against vertex enumeration.

use gptmint::cone::hermitian;
use gptmint::solver::{brute_force_polyhedral, check_slater, solve, verify_solution, ConicProgram, SolverConfig};
use gptmint::{Cone, LinearOperator, Result};

pub fn run_example() -> Result<()> {
    let cfg = SolverConfig::default();

    // max x s.t. 1 − x ≥ 0, x ≥ 0.
    let lp = ConicProgram::new(vec![1.0], vec![1.0], LinearOperator::identity(1), Cone::orthant(1), Cone::orthant(1))?;
    let s = solve(&lp, &cfg)?;
    println!("LP: primal {:.6} dual {:.6} via {:?}", s.primal_value, s.dual_value, s.method);
    println!("LP oracle: {:.6}", brute_force_polyhedral(&lp)?);
    println!("LP certificate verified: {}", verify_solution(&lp, &s, 1e-7)?);

    // max tr X s.t. I − X ⪰ 0, X ⪰ 0 on qubits.
    let id = hermitian::identity_coords(&[2]);
    let sdp = ConicProgram::new(id.clone(), id, LinearOperator::identity(4), Cone::psd(2), Cone::psd(2))?;
    let slater = check_slater(&sdp, 1e-6)?;
    let s = solve(&sdp, &cfg)?;
    println!(
        "SDP: value {:.6} after {} iterations, gap {:.1e}, Slater {}/{}",
        s.primal_value, s.iterations, s.gap, slater.primal_strict, slater.dual_strict
    );
    println!("SDP certificate verified: {}", verify_solution(&sdp, &s, 1e-6)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
