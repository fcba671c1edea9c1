//! Random cone programs shared by the oracle suites.

#![allow(dead_code)]

use gptmint::solver::ConicProgram;
use gptmint::{Cone, LinearOperator};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn random_cone(rng: &mut ChaCha8Rng, n: usize, v_form: bool) -> Cone {
    if rng.gen_bool(0.3) {
        return Cone::orthant(n);
    }
    let k = rng.gen_range(n..=10.max(n));
    let vs: Vec<Vec<f64>> = (0..k).map(|_| random_vec(rng, n)).collect();
    if v_form {
        Cone::polyhedral_v(n, vs).unwrap()
    } else {
        Cone::polyhedral_h(n, vs).unwrap()
    }
}

/// Random program whose oracle data (generators of K2* and K1) is given
/// explicitly, so neither side needs a representation conversion.
pub fn random_program(rng: &mut ChaCha8Rng) -> ConicProgram {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=6);
    let k2 = random_cone(rng, n, false);
    let k1 = random_cone(rng, m, true);
    let op = LinearOperator::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
    ConicProgram::new(random_vec(rng, n), random_vec(rng, m), op, k1, k2).unwrap()
}

/// Random program that is feasible (`X0 ∈ K2`, `b − φ(X0) ∈ K1*`) and
/// bounded (`y0 ∈ K1`, `φ*(y0) − C ∈ K2*`) by construction; the cone data is
/// sign-flipped around the planted points.
pub fn random_bounded_program(rng: &mut ChaCha8Rng) -> ConicProgram {
    let n = rng.gen_range(1..=6);
    let m = rng.gen_range(1..=6);
    let x0 = random_vec(rng, n);
    let s0 = random_vec(rng, m);
    let flip = |v: Vec<f64>, anchor: &[f64]| {
        let d: f64 = v.iter().zip(anchor).map(|(a, b)| a * b).sum();
        if d < 0.0 { v.iter().map(|x| -x).collect() } else { v }
    };
    let normals: Vec<Vec<f64>> = (0..rng.gen_range(n..=8)).map(|_| flip(random_vec(rng, n), &x0)).collect();
    let gens: Vec<Vec<f64>> = (0..rng.gen_range(1..=8)).map(|_| flip(random_vec(rng, m), &s0)).collect();
    let op = LinearOperator::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0));
    let y0 = gens.iter().fold(vec![0.0; m], |acc, g| {
        let w = rng.gen_range(0.0..1.0);
        acc.iter().zip(g).map(|(a, b)| a + w * b).collect()
    });
    let w = normals.iter().fold(vec![0.0; n], |acc, g| {
        let t = rng.gen_range(0.0..1.0);
        acc.iter().zip(g).map(|(a, b)| a + t * b).collect()
    });
    let c: Vec<f64> = op.apply_adjoint(&y0).unwrap().iter().zip(&w).map(|(a, b)| a - b).collect();
    let scale = rng.gen_range(0.0..1.0);
    let b: Vec<f64> = op.apply(&x0).unwrap().iter().zip(&s0).map(|(a, s)| a + scale * s).collect();
    ConicProgram::new(
        c,
        b,
        op,
        Cone::polyhedral_v(m, gens).unwrap(),
        Cone::polyhedral_h(n, normals).unwrap(),
    )
    .unwrap()
}
