use std::f64::consts::PI;

use holder_core::affine::{scale_function, transform_density, transform_density_onto, AffineMap};
use holder_core::density::{Grid, GridDensity};
use holder_core::score::{divergence, expected_score, kappa_link, phi_kappa, CompositeScore};
use proptest::prelude::*;

fn normal(m: f64, s: f64) -> impl Fn(&[f64]) -> f64 {
    move |x: &[f64]| (-0.5 * ((x[0] - m) / s).powi(2)).exp() / ((2.0 * PI).sqrt() * s)
}

fn grid() -> Grid {
    Grid::uniform(vec![-12.0], vec![12.0], 1201).unwrap()
}

fn density(m: f64, s: f64) -> GridDensity {
    GridDensity::from_fn(grid(), normal(m, s)).unwrap()
}

fn family(idx: usize, gamma: f64, kappa: f64) -> CompositeScore {
    match idx {
        0 => CompositeScore::Kl,
        1 => CompositeScore::density_power(gamma).unwrap(),
        2 => CompositeScore::pseudospherical(gamma).unwrap(),
        3 => CompositeScore::gamma_score(gamma).unwrap(),
        4 => CompositeScore::holder(phi_kappa(gamma, kappa).unwrap()),
        _ => CompositeScore::bregman_holder(gamma, kappa).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn divergence_is_nonnegative_and_vanishes_on_the_diagonal(
        idx in 0usize..6,
        gamma in 0.05f64..2.5,
        kappa in 1.0f64..3.0,
        m1 in -2.0f64..2.0, s1 in 0.5f64..2.0,
        m2 in -2.0f64..2.0, s2 in 0.5f64..2.0,
    ) {
        let s = family(idx, gamma, kappa);
        let p = density(m1, s1);
        let q = density(m2, s2);
        prop_assert!(divergence(&s, &p, &q).unwrap().divergence >= -1e-9);
        prop_assert!(divergence(&s, &p, &p).unwrap().divergence.abs() <= 1e-12);
    }

    #[test]
    fn scale_function_is_multiplicative(
        gamma in 0.05f64..3.0,
        a in 0.2f64..4.0, b in 0.2f64..4.0,
        ma in -3.0f64..3.0, mb in -3.0f64..3.0,
    ) {
        let f = AffineMap::diagonal(&[a], vec![ma]).unwrap();
        let g = AffineMap::diagonal(&[-b], vec![mb]).unwrap();
        let fg = f.compose(&g).unwrap();
        let lhs = scale_function(gamma, &fg);
        let rhs = scale_function(gamma, &f) * scale_function(gamma, &g);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs);
    }

    #[test]
    fn transform_then_inverse_restores_the_density(
        k in prop::sample::select(vec![0.5f64, 2.0, -1.0, 0.25, -4.0]),
        shift in -20i32..20,
        m in -1.0f64..1.0, s in 0.6f64..1.5,
    ) {
        // μ on the node lattice keeps every mapped node on a source node.
        let mu = shift as f64 * grid().step(0);
        let map = AffineMap::diagonal(&[k], vec![mu]).unwrap();
        let p = density(m, s);
        let forward = transform_density(&p, &map).unwrap();
        let back = transform_density_onto(&forward, &map.inverse().unwrap(), p.grid()).unwrap();
        let worst = p.values().iter().zip(back.values()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(worst <= 1e-14, "max deviation {worst}");
    }

    #[test]
    fn kappa_link_is_strictly_increasing(
        gamma in 0.05f64..3.0,
        kappa in 1.0f64..4.0,
        a in -5.0f64..5.0, d in 1e-6f64..5.0,
    ) {
        prop_assert!(kappa_link(gamma, kappa, a) < kappa_link(gamma, kappa, a + d));
    }

    #[test]
    fn gamma_and_pseudospherical_pick_the_same_candidate(
        gamma in 0.1f64..2.0,
        m0 in -1.0f64..1.0,
        ms in prop::collection::vec((-2.0f64..2.0, 0.5f64..2.0), 2..8),
    ) {
        let p = density(m0, 1.0);
        let gs = CompositeScore::gamma_score(gamma).unwrap();
        let ps = CompositeScore::pseudospherical(gamma).unwrap();
        let pick = |s: &CompositeScore| {
            ms.iter()
                .map(|&(m, sd)| expected_score(s, &p, &density(m, sd)).unwrap())
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap()
                .0
        };
        prop_assert_eq!(pick(&gs), pick(&ps));
    }
}

#[test]
fn holder_divergence_scales_with_the_determinant() {
    let p = normal(0.3, 1.0);
    let q = normal(-0.4, 1.3);
    let g = Grid::uniform(vec![-15.0], vec![15.0], 3001).unwrap();
    for gamma in [0.2, 1.0, 1.7] {
        let s = CompositeScore::holder(phi_kappa(gamma, 1.4).unwrap());
        let map = AffineMap::diagonal(&[2.5], vec![0.7]).unwrap();
        let rep = holder_core::affine::verify_invariance_fn(&s, &p, &q, &g, &map).unwrap();
        // independent: D(p_A, q_A) computed from the closed-form pushed-forward Gaussians
        let sigma_inv = 1.0 / 2.5;
        let pa = GridDensity::from_fn(g.clone(), normal((0.3 - 0.7) * sigma_inv, sigma_inv)).unwrap();
        let qa = GridDensity::from_fn(g.clone(), normal((-0.4 - 0.7) * sigma_inv, 1.3 * sigma_inv)).unwrap();
        let pg = GridDensity::from_fn(g.clone(), &p).unwrap();
        let qg = GridDensity::from_fn(g.clone(), &q).unwrap();
        let d = divergence(&s, &pg, &qg).unwrap().divergence;
        let da = divergence(&s, &pa, &qa).unwrap().divergence;
        assert!((2.5f64.powf(-gamma) * da - d).abs() <= 1e-8 * d, "γ={gamma}");
        assert!(rep.residual < 1e-8);
    }
}
