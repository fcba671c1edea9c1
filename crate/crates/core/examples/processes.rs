// Systems, composites and processes: causality and subcausality of maps
// stored as vectors.

use gptmint::gpt::{compose_systems, is_causal_process, is_subcausal_process, marginalise, CompositeRule, Ordering, ProcessCone};
use gptmint::linalg::kron;
use gptmint::theories::{bb84_states, Theory};
use gptmint::Result;

pub fn run_example() -> Result<()> {
    let q = Theory::quantum(2)?;
    let qq = compose_systems(&[q.system.clone(), q.system.clone()], CompositeRule::Native)?;
    let ket0 = &bb84_states()[0];
    let plus = &bb84_states()[2];
    let joint = kron(ket0, plus);
    println!("second marginal of |0⟩⊗|+⟩ = {:?}", marginalise(&qq, &joint, 1)?);

    let pc = ProcessCone::default_for(&q.system, &q.system)?;
    let id = pc.identity()?;
    let half: Vec<f64> = id.iter().map(|v| v / 2.0).collect();
    println!("identity causal: {}", is_causal_process(&pc, &id, 1e-9)?);
    println!("identity/2 causal: {}", is_causal_process(&pc, &half, 1e-9)?);
    println!("identity/2 subcausal: {}", is_subcausal_process(&pc, &half, Ordering::EffectCone, 1e-9)?);
    println!("identity applied to |+⟩ = {:?}", pc.apply(&id, plus)?);

    // The same questions for the cloning cone of a polygon theory.
    let p5 = Theory::polygon(5, false)?;
    let clone = p5.cloning_process_cone()?;
    let discard_and_prepare = clone.prepare_and_discard(&kron(&p5.vertices[0], &p5.vertices[0]))?;
    println!(
        "pentagon prepare-and-discard: in cone {}, causal {}",
        clone.contains(&discard_and_prepare, 1e-9)?,
        is_causal_process(&clone, &discard_and_prepare, 1e-9)?
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example()
}
