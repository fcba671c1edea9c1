// Perfect counterfeiting through broadcasting, and the sharpness test
// that rules out trivial verification.

use gptmint::money::{check_broadcastable, check_vs, wnc_broadcast_equivalence, MoneyConfig};
use gptmint::theories::{bb84_states, wiesner_strategy, Theory};
use gptmint::Result;

pub fn run_example() -> Result<()> {
    let cfg = MoneyConfig::default();

    let bit = Theory::classical(2)?;
    let r = check_broadcastable(&bit.vertices, &bit.cloning_process_cone()?, &cfg)?;
    println!("classical bit states broadcastable: {}", r.feasible);

    let qubit = Theory::quantum(2)?;
    let r = check_broadcastable(&bb84_states(), &qubit.cloning_process_cone()?, &cfg)?;
    println!("BB84 states broadcastable: {} (certificate: {})", r.feasible, r.certificate.is_some());
    println!("BB84 effects sharp: {:?}", check_vs(&wiesner_strategy(&qubit)?, &cfg)?);

    for theory in [Theory::gbit()?, Theory::polygon(5, false)?] {
        let s = wiesner_strategy(&theory)?;
        let e = wnc_broadcast_equivalence(&s, &theory.cloning_process_cone()?, &cfg)?;
        println!(
            "{}: alpha {:.6}, broadcastable {}, consistent {}",
            theory.name, e.alpha, e.broadcastable, e.consistent
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
