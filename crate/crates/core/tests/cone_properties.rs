use gptmint::cone::moreau_split;
use gptmint::linalg::{dot, norm, sub};
use gptmint::Cone;
use proptest::prelude::*;

fn square() -> Cone {
    Cone::polyhedral_v(
        3,
        vec![vec![1.0, 1.0, 1.0], vec![-1.0, 1.0, 1.0], vec![-1.0, -1.0, 1.0], vec![1.0, -1.0, 1.0]],
    )
    .unwrap()
}

fn cones() -> Vec<Cone> {
    let pentagon: Vec<Vec<f64>> = (0..5)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 5.0;
            vec![t.cos(), t.sin(), 1.0]
        })
        .collect();
    vec![
        Cone::orthant(3),
        Cone::psd(2),
        Cone::polyhedral_v(3, pentagon.clone()).unwrap(),
        Cone::polyhedral_h(3, pentagon.clone()).unwrap(),
        Cone::product(vec![Cone::orthant(1), Cone::psd(2)]),
        Cone::tensor_min(square(), square()),
        Cone::tensor_max(square(), square()),
        Cone::dual_of(Cone::polyhedral_v(3, pentagon).unwrap()),
    ]
}

fn cone_and_point() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (0..cones().len()).prop_flat_map(|i| {
        let d = cones()[i].dim();
        (Just(i), proptest::collection::vec(-10.0f64..10.0, d))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn moreau_decomposition((i, x) in cone_and_point()) {
        let k = &cones()[i];
        let (p, q) = moreau_split(k, &x).unwrap();
        let scale = norm(&x).max(1.0);
        prop_assert!(norm(&sub(&sub(&x, &p), &q)) <= 1e-8 * scale);
        prop_assert!(dot(&p, &q).abs() <= 1e-8 * scale * scale);
        prop_assert!(k.contains(&p, 1e-8 * scale).unwrap());
        let neg_q: Vec<f64> = q.iter().map(|v| -v).collect();
        prop_assert!(k.dual().contains(&neg_q, 1e-8 * scale).unwrap());
    }

    #[test]
    fn projection_is_idempotent((i, x) in cone_and_point()) {
        let k = &cones()[i];
        let p = k.project(&x).unwrap();
        let pp = k.project(&p).unwrap();
        prop_assert!(norm(&sub(&p, &pp)) <= 1e-8 * norm(&x).max(1.0));
    }

    #[test]
    fn double_dual_has_the_same_members((i, x) in cone_and_point()) {
        let k = &cones()[i];
        let kdd = k.dual().dual();
        let p = k.project(&x).unwrap();
        prop_assert!(kdd.contains(&p, 1e-8).unwrap());
        prop_assert_eq!(k.contains(&x, 1e-8).unwrap(), kdd.contains(&x, 1e-8).unwrap());
    }
}
