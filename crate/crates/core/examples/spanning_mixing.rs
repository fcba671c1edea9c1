// Mixing a strategy with a causal basis makes it spanning at the price of
// at most halving the distance of α from one.

use gptmint::money::{check_spanning_bound, MoneyConfig};
use gptmint::theories::{random_sharp_strategy, Theory};
use gptmint::Result;
use rand::SeedableRng;

pub fn run_example() -> Result<()> {
    let cfg = MoneyConfig::default();
    let theory = Theory::gbit()?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let s = random_sharp_strategy(&theory, 2, &mut rng)?;
    // Three vertices of the square span its three-dimensional space.
    let basis = theory.vertices[..3].to_vec();
    let r = check_spanning_bound(&s, &basis, &theory.cloning_process_cone()?, &cfg)?;
    println!(
        "alpha {:.6} → mixed {:.6} (bound {:.6}), spanning {}, holds {}",
        r.alpha_original, r.alpha_mixed, r.bound, r.spanning, r.holds
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
