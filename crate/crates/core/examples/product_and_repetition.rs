// Two notes at once: α of the product strategy against α̃², and how many
// notes a target forging probability needs.

use gptmint::gpt::{compose_systems, ProcessCone};
use gptmint::money::{repetition_security, verify_product_bound, MoneyConfig};
use gptmint::theories::{wiesner_strategy, Theory};
use gptmint::Result;

pub fn run_example() -> Result<()> {
    let cfg = MoneyConfig::default();
    let theory = Theory::quantum(2)?;
    let s = wiesner_strategy(&theory)?;
    let pc = theory.cloning_process_cone()?;

    let ab = compose_systems(&[theory.system.clone(), theory.system.clone()], theory.rule.clone())?;
    let abab = compose_systems(&[ab.system.clone(), ab.system.clone()], theory.rule.clone())?;
    let pc_ab = ProcessCone::default_for(&ab.system, &abab.system)?;
    let r = verify_product_bound(&s, &pc, &s, &pc, &pc_ab, &cfg)?;
    println!("alpha_AB {:.6} ≤ {:.6}: {}", r.alpha_ab, r.product_bound, r.holds);
    for d in &r.plugged {
        println!("plug {}: value {:.6}, physical {}", d.name, d.value, d.in_process_cone && d.subcausal);
    }

    let rep = repetition_security(&s, &pc, 1e-6, &cfg)?;
    println!("n = {} notes, certified forging bound {:.3e}", rep.n, rep.certified_bound);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
