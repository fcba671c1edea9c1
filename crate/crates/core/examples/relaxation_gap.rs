// A triangle whose effects are restricted to two verification effects and
// their complements. Relaxed counterfeiters may use measurements that
// leave an unphysical remainder, and clone perfectly; physical ones
// cannot.

use gptmint::linalg::RealVector;
use gptmint::money::{alpha, alpha_tilde, BankStrategy, MoneyConfig, StrategyItem};
use gptmint::theories::Theory;
use gptmint::Result;
use nalgebra::{DMatrix, DVector};

/// The effect taking `values[j]` on vertex `j` of the triangle.
fn effect_from_values(vertices: &[RealVector], values: [f64; 3]) -> RealVector {
    let m = DMatrix::from_fn(3, 3, |i, j| vertices[i][j]);
    let e = m.lu().solve(&DVector::from_row_slice(&values)).expect("triangle vertices are independent");
    e.iter().copied().collect()
}

pub fn run_example() -> Result<()> {
    let v = Theory::polygon(3, false)?.vertices;
    let e0 = effect_from_values(&v, [1.0, 0.5, 0.8]);
    let e1 = effect_from_values(&v, [0.5, 1.0, 0.8]);
    let theory = Theory::polygon_with_effects(3, &[e0.clone(), e1.clone()])?;
    let s = BankStrategy::new(
        theory.system.clone(),
        vec![StrategyItem::new(0.5, v[0].clone(), e0), StrategyItem::new(0.5, v[1].clone(), e1)],
        1e-9,
    )?;
    let pc = theory.cloning_process_cone()?;
    let cfg = MoneyConfig::default();
    let a = alpha(&s, &pc, &cfg)?;
    let at = alpha_tilde(&s, &pc, &cfg)?;
    // Measure {e0, u − e0}, prepare the guessed state twice: 13/16.
    println!("alpha       {:.9}", a.value);
    println!("alpha_tilde {:.9}", at.value);
    println!("gap         {:.3e}", at.value - a.value);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
