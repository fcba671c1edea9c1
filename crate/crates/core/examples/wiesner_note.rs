// Counterfeiting a single BB84 note: α, α̃, the dual certificate and the
// trivial counterfeiter.

use gptmint::money::{analyse, normalised_y, MoneyConfig};
use gptmint::theories::{wiesner_strategy, Theory};
use gptmint::Result;

pub fn run_example() -> Result<()> {
    let theory = Theory::quantum(2)?;
    let strategy = wiesner_strategy(&theory)?;
    let pc = theory.cloning_process_cone()?;
    let cfg = MoneyConfig::default();
    let r = analyse(&strategy, &pc, &cfg)?;
    println!("alpha       {:.6}", r.alpha);
    println!("alpha_tilde {:.6} (certified ≤ {:.6})", r.alpha_tilde, r.alpha_tilde_bound);
    println!("lower bound {:.6}", r.lower_bound);
    println!("Slater      {}/{}", r.slater.primal_strict, r.slater.dual_strict);
    // The dual point y is a state with trace α̃; here it is (3/8)·I.
    println!("y_cert      {:?}", r.y_cert);
    let y = normalised_y(&strategy, &pc, &r.y_cert, r.alpha_tilde, &cfg)?;
    println!("Y has {} coordinates", y.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
