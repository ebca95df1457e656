mod common;

use maxstable::mle::{
    default_init, fisher_information, fit, fit_params, mean_loglik, wald_interval, FisherMethod, FitOptions,
};
use maxstable::likelihood::{score_at, ScoreMethod};
use maxstable::numerics::diff::finite_diff_gradient;
use maxstable::simulate::simulate;
use maxstable::{Dataset, Error, ModelId, ParamVector, Parameterization};

#[test]
fn logistic_recovery_example() {
    let truth = ParamVector::logistic(2, 0.6).unwrap();
    let data = simulate(&truth, 1000, 2024).unwrap();
    let init = default_init(ModelId::Logistic, 2).unwrap();
    let fit = fit_params(&init, &data, &FitOptions::default()).unwrap();
    assert!(fit.converged);
    let th = fit.estimate[0];
    assert!(th > 0.55 && th < 0.65, "theta_hat {th}");
    let ci = &fit.wald_intervals.as_ref().unwrap()[0];
    assert!(ci.lower < 0.6 && 0.6 < ci.upper, "{ci:?}");
    assert!(ci.lower > 0.0 && ci.upper < 1.0);
    assert!(!fit.starts_disagree);
    let obs = fit.observed_info_matrix();
    assert!(obs[(0, 0)] > 0.0);
}

#[test]
fn start_at_truth_is_stationary() {
    let truth = ParamVector::logistic(2, 0.6).unwrap();
    let data = simulate(&truth, 1000, 2024).unwrap();
    let opts = FitOptions { n_starts: 1, ..FitOptions::default() };
    let fit = fit_params(&truth, &data, &opts).unwrap();
    assert!(fit.converged);
    let param = Parameterization::for_params(&truth);
    let g = finite_diff_gradient(|v| mean_loglik(&param, v, &data), &fit.unconstrained, None).unwrap();
    let norm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(norm < 1e-5, "gradient norm {norm}");
}

#[test]
fn fit_is_row_order_invariant() {
    let truth = ParamVector::logistic(3, 0.5).unwrap();
    let data = simulate(&truth, 300, 5).unwrap();
    let mut rows = data.to_rows();
    rows.reverse();
    rows.rotate_left(17);
    let permuted = Dataset::from_rows(&rows).unwrap();
    let opts = FitOptions { n_starts: 1, ..FitOptions::default() };
    let a = fit_params(&truth, &data, &opts).unwrap();
    let b = fit_params(&truth, &permuted, &opts).unwrap();
    assert_eq!(a.unconstrained, b.unconstrained);
    assert_eq!(a.loglik.to_bits(), b.loglik.to_bits());
}

#[test]
fn random_starts_agree() {
    let truth = ParamVector::logistic(2, 0.45).unwrap();
    let data = simulate(&truth, 500, 77).unwrap();
    let opts = FitOptions { n_starts: 5, start_spread: 1.0, seed: 3, ..FitOptions::default() };
    let fit = fit_params(&default_init(ModelId::Logistic, 2).unwrap(), &data, &opts).unwrap();
    let lls: Vec<f64> = fit.starts.iter().map(|s| s.loglik.unwrap()).collect();
    let hi = lls.iter().cloned().fold(f64::MIN, f64::max);
    let lo = lls.iter().cloned().fold(f64::MAX, f64::min);
    assert!(hi - lo < 1e-6, "{lls:?}");
    assert!(fit.starts.iter().all(|s| s.converged));
}

#[test]
fn bartlett_identity_logistic() {
    let truth = ParamVector::logistic(2, 0.6).unwrap();
    let param = Parameterization::for_params(&truth);
    let v = param.encode(&truth).unwrap();
    let opg = fisher_information(&param, &v, FisherMethod::OpgMonteCarlo { draws: 200_000, seed: 1 }).unwrap();
    let data = simulate(&truth, 10_000, 99).unwrap();
    let obs = fisher_information(&param, &v, FisherMethod::Observed { data: &data, step: 1e-4 }).unwrap();
    let i_opg = opg.matrix()[(0, 0)];
    let se_opg = opg.std_error_matrix().unwrap()[(0, 0)];
    // per-row −∂² log f from differenced analytic scores gives the sampling
    // error of the observed information
    let h = 1e-4;
    let curv: Vec<f64> = data
        .rows()
        .map(|z| {
            let up = score_at(&param, &[v[0] + h], z, ScoreMethod::Analytic).unwrap()[0];
            let dn = score_at(&param, &[v[0] - h], z, ScoreMethod::Analytic).unwrap()[0];
            -(up - dn) / (2.0 * h)
        })
        .collect();
    let m = curv.iter().sum::<f64>() / curv.len() as f64;
    let sd = (curv.iter().map(|c| (c - m).powi(2)).sum::<f64>() / (curv.len() - 1) as f64).sqrt();
    let se_obs = sd / (curv.len() as f64).sqrt();
    let i_obs = obs.matrix()[(0, 0)];
    assert!(i_opg > 0.0);
    assert!(
        (i_opg - i_obs).abs() < 3.0 * (se_opg.powi(2) + se_obs.powi(2)).sqrt(),
        "opg {i_opg} ± {se_opg}, observed {i_obs} ± {se_obs}"
    );
}

#[test]
fn huesler_reiss_information_positive() {
    let p = ParamVector::huesler_reiss_pair(1.0).unwrap();
    let param = Parameterization::for_params(&p);
    let v = param.encode(&p).unwrap();
    let info = fisher_information(&param, &v, FisherMethod::OpgMonteCarlo { draws: 20_000, seed: 4 }).unwrap();
    assert_eq!(info.matrix.len(), 1);
    assert!(info.matrix[0][0] > 0.0);
}

#[test]
fn independence_edge_is_flagged() {
    let p = ParamVector::logistic(2, 1.0 - 1e-8).unwrap();
    let param = Parameterization::for_params(&p);
    let v = param.encode(&p).unwrap();
    match fisher_information(&param, &v, FisherMethod::OpgMonteCarlo { draws: 2_000, seed: 4 }) {
        Err(Error::Singular { .. }) => {}
        Ok(info) => assert!(info.condition_number > 1e8 || info.min_eigenvalue < 1e-6, "{info:?}"),
        Err(e) => panic!("unexpected {e}"),
    }
}

#[test]
fn intervals_nest_with_level() {
    let truth = ParamVector::dirichlet(vec![2.0, 1.0]).unwrap();
    let data = simulate(&truth, 300, 8).unwrap();
    let opts = FitOptions { n_starts: 1, ..FitOptions::default() };
    let fit = fit_params(&default_init(ModelId::Dirichlet, 2).unwrap(), &data, &opts).unwrap();
    assert!(fit.converged, "{:?}", fit.starts);
    let mut prev: Option<Vec<(f64, f64)>> = None;
    for level in [0.5, 0.9, 0.99] {
        let iv: Vec<(f64, f64)> = wald_interval(&fit, level).unwrap().iter().map(|w| (w.lower, w.upper)).collect();
        for (lo, hi) in &iv {
            assert!(*lo > 0.0 && lo < hi);
        }
        if let Some(p) = prev {
            for (a, b) in p.iter().zip(&iv) {
                assert!(b.0 < a.0 && b.1 > a.1);
            }
        }
        prev = Some(iv);
    }
    for (w, t) in fit.wald_intervals.unwrap().iter().zip([2.0, 1.0]) {
        assert!(w.lower < t && t < w.upper, "{w:?}");
    }
}

#[test]
fn huesler_reiss_trivariate_fit() {
    let truth = common::hr_params(3);
    let data = simulate(&truth, 400, 12).unwrap();
    let opts = FitOptions { n_starts: 1, ..FitOptions::default() };
    let fit = fit_params(&default_init(ModelId::HueslerReiss, 3).unwrap(), &data, &opts).unwrap();
    assert!(fit.converged);
    let ivs = fit.wald_intervals.as_ref().unwrap();
    assert_eq!(ivs.len(), 3);
    assert!(ivs.iter().all(|w| w.method == "delta"));
    let min_eig = fit.observed_info_matrix().symmetric_eigen().eigenvalues.min();
    assert!(min_eig > 0.0);
    let truth_vals = truth.natural_values();
    let covered = ivs.iter().zip(&truth_vals).filter(|(w, t)| w.lower < **t && **t < w.upper).count();
    assert!(covered >= 2, "{ivs:?} vs {truth_vals:?}");
}

#[test]
fn invalid_fits_rejected() {
    let p = ParamVector::logistic(2, 0.5).unwrap();
    let param = Parameterization::for_params(&p);
    let data = Dataset::from_rows(&[vec![1.0, 2.0, 3.0]]).unwrap();
    assert!(matches!(fit(&param, &data, &[0.0], &FitOptions::default()), Err(Error::ShapeMismatch(_))));
    assert!(matches!(default_init(ModelId::ExtremalT, 2), Err(Error::UnsupportedModel(_))));
}
