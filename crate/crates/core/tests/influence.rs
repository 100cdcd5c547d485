use holder_core::density::{make_parametric, ModelHyper, ModelKind, ParametricModel};
use holder_core::robust::{
    check_matched_phi, default_z_grid, gross_error_sensitivity, influence_function, redescend_check, Verdict,
};
use holder_core::score::{phi_cubic, phi_density_power, phi_gamma_score, phi_kappa, phi_quadratic};

fn location() -> std::sync::Arc<dyn ParametricModel> {
    make_parametric(ModelKind::GaussianMean, &ModelHyper::default()).unwrap()
}

/// Location estimators from the Hölder family on N(θ, 1) share
/// IF(z) = (z − θ) exp(−γ(z − θ)²/2) (1 + γ)^{3/2}.
fn location_if(gamma: f64, z: f64) -> f64 {
    z * (-gamma * z * z / 2.0).exp() * (1.0 + gamma).powf(1.5)
}

#[test]
fn location_influence_matches_closed_form() {
    let m = location();
    for (gamma, phi) in [
        (0.5, phi_kappa(0.5, 1.0).unwrap()),
        (0.5, phi_kappa(0.5, 1.5).unwrap()),
        (1.0, phi_density_power(1.0).unwrap()),
        (0.3, phi_gamma_score(0.3).unwrap()),
    ] {
        for z in [-3.0, -0.7, 0.2, 1.0, 2.5, 6.0] {
            let r = influence_function(&phi, m.as_ref(), &[0.0], &[z]).unwrap();
            let want = location_if(gamma, z);
            assert!((r.if_vector[0] - want).abs() <= 1e-4 * want.abs().max(1e-3), "{} z={z}: {:?} vs {want}", phi.label(), r.if_vector);
        }
    }
}

#[test]
fn gross_error_sensitivity_converges_under_grid_refinement() {
    let m = location();
    let gamma = 0.5;
    let phi = phi_kappa(gamma, 1.0).unwrap();
    let exact = (1.0 + gamma).powf(1.5) / gamma.sqrt() * (-0.5f64).exp();
    let errs: Vec<f64> = [25, 201, 1601]
        .iter()
        .map(|&n| (gross_error_sensitivity(&phi, m.as_ref(), &[0.0], &default_z_grid(m.as_ref(), &[0.0], n)).unwrap() - exact).abs())
        .collect();
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!(errs[2] / exact < 1e-4, "{errs:?}");
}

#[test]
fn redescend_verdicts_on_mean_scale() {
    let m = make_parametric(ModelKind::GaussianMeanScale, &ModelHyper::default()).unwrap();
    let grid = default_z_grid(m.as_ref(), &[0.0, 1.0], 41);
    let pass = redescend_check(&phi_kappa(0.5, 1.0).unwrap(), m.as_ref(), &[0.0, 1.0], &grid).unwrap();
    assert_eq!(pass.verdict, Verdict::Pass, "{pass:?}");
    assert!(pass.analytic_limit < 1e-12);
    let fail = redescend_check(&phi_kappa(0.5, 1.5).unwrap(), m.as_ref(), &[0.0, 1.0], &grid).unwrap();
    assert_eq!(fail.verdict, Verdict::Fail, "{fail:?}");
    assert!((fail.limit_estimate - fail.analytic_limit).abs() < 1e-3 * fail.analytic_limit, "{fail:?}");
}

#[test]
fn location_models_give_no_verdict() {
    let m = location();
    let grid = default_z_grid(m.as_ref(), &[0.0], 41);
    let r = redescend_check(&phi_kappa(0.5, 1.5).unwrap(), m.as_ref(), &[0.0], &grid).unwrap();
    assert_eq!(r.verdict, Verdict::Inconclusive);
    assert!(!r.weighted_score_nonzero && !r.warnings.is_empty());
}

#[test]
fn matched_phi_check() {
    assert!(check_matched_phi(&phi_cubic(0.5, 5.0).unwrap()).is_ok());
    assert!(check_matched_phi(&phi_gamma_score(0.5).unwrap()).is_ok());
    assert!(check_matched_phi(&phi_quadratic(0.5, 1.0).unwrap()).is_err());
    assert!(check_matched_phi(&phi_kappa(0.5, 1.5).unwrap()).is_err());
}
