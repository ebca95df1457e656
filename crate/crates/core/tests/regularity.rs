use maxstable::models::Model;
use maxstable::regularity::{
    check_a3, check_b3, check_exponent_structure, check_structure, fit_envelope_a3, fit_then_verify, simplex_grid,
    sphere_grid, Envelope, EnvelopeKind, RegularityReport, StructureTolerances, GRID_MIN,
};
use maxstable::{Error, ParamVector};
use nalgebra::DMatrix;

fn ext_t(rho: f64, nu: f64) -> ParamVector {
    ParamVector::extremal_t(DMatrix::from_row_slice(2, 2, &[1.0, rho, rho, 1.0]), nu).unwrap()
}

#[test]
fn logistic_a3_example() {
    let p = ParamVector::logistic(2, 0.5).unwrap();
    let grid = sphere_grid(2, 500).unwrap();
    assert!(grid.len() >= 999);
    let entry = check_a3(&p, 50.0, 0.25, &grid).unwrap();
    assert!(entry.pass, "{entry:?}");
    assert!(entry.witness.iter().all(|x| *x >= GRID_MIN));
}

#[test]
fn a3_rejects_large_alpha() {
    let p = ParamVector::logistic(2, 0.5).unwrap();
    let grid = sphere_grid(2, 10).unwrap();
    assert!(matches!(check_a3(&p, 50.0, 0.6, &grid), Err(Error::OutOfDomain(_))));
    assert!(matches!(fit_envelope_a3(&p, 0.25, &[]), Err(Error::InvalidConfig(_))));
}

#[test]
fn fit_then_verify_a3() {
    for (p, alpha) in [
        (ParamVector::logistic(2, 0.5).unwrap(), 0.25),
        (ParamVector::huesler_reiss_pair(1.0).unwrap(), 0.0),
    ] {
        let report = fit_then_verify(&p, EnvelopeKind::A3, alpha, 200).unwrap();
        assert!(report.all_pass(), "{report:?}");
        assert_eq!(report.grid_sensitive, Some(false), "{report:?}");
        let Some(Envelope::A3 { a, .. }) = report.envelope else { panic!() };
        assert!(a.is_finite() && a > 0.0);
        assert_eq!(report.norm, "infinity");
    }
}

#[test]
fn dirichlet_b3_lower_example() {
    let p = ParamVector::dirichlet(vec![1.0, 1.0]).unwrap();
    let grid = simplex_grid(2, 1000).unwrap();
    assert!(grid.len() >= 999);
    let env = Envelope::B3 { b_minus: 0.5, b_plus: 1e6, beta_minus: vec![1.0, 1.0], beta_plus: vec![0.9, 0.9], eps: 0.2 };
    let entries = check_b3(&p, &env, &grid).unwrap();
    assert!(entries[0].pass, "{entries:?}");
}

#[test]
fn b3_rejects_bad_eps() {
    let p = ParamVector::dirichlet(vec![1.0, 1.0]).unwrap();
    let grid = simplex_grid(2, 10).unwrap();
    let env = Envelope::B3 { b_minus: 0.5, b_plus: 1.0, beta_minus: vec![1.0, 1.0], beta_plus: vec![0.9, 0.9], eps: 0.3 };
    assert!(matches!(check_b3(&p, &env, &grid), Err(Error::OutOfDomain(_))));
    let env = Envelope::B3 { b_minus: 0.5, b_plus: 1.0, beta_minus: vec![1.0, 1.0], beta_plus: vec![1.1, 0.9], eps: 0.2 };
    assert!(matches!(check_b3(&p, &env, &grid), Err(Error::OutOfDomain(_))));
}

#[test]
fn fit_then_verify_b3() {
    for p in [
        ParamVector::dirichlet(vec![2.0, 1.0]).unwrap(),
        ParamVector::dirichlet(vec![0.7, 1.5, 3.0]).unwrap(),
        ext_t(0.5, 1.0),
        ext_t(0.3, 2.5),
    ] {
        let per_axis = if p.dim() == 2 { 200 } else { 30 };
        let report = fit_then_verify(&p, EnvelopeKind::B3, 0.0, per_axis).unwrap();
        assert!(report.all_pass(), "{report:?}");
        assert_eq!(report.grid_sensitive, Some(false), "{:?} {report:?}", p.model_id());
    }
}

#[test]
fn structure_passes_for_defaults() {
    let hr3 = DMatrix::from_row_slice(3, 3, &[0.0, 0.25, 0.75, 0.25, 0.0, 0.5, 0.75, 0.5, 0.0]);
    for p in [
        ParamVector::logistic(3, 0.3).unwrap(),
        ParamVector::huesler_reiss_pair(2.0).unwrap(),
        ParamVector::huesler_reiss(hr3).unwrap(),
        ParamVector::dirichlet(vec![2.0, 1.0]).unwrap(),
        ParamVector::dirichlet(vec![0.7, 1.5, 3.0]).unwrap(),
        ext_t(0.5, 1.0),
    ] {
        let report = check_structure(&p).unwrap();
        assert!(report.all_pass(), "{report:#?}");
    }
}

#[test]
fn corrupted_exponent_fails_normalization_only() {
    let m = Model::new(&ParamVector::logistic(3, 0.3).unwrap()).unwrap();
    let tol = StructureTolerances::for_model(&m);
    let checks = check_exponent_structure(|z| Ok(2.0 * m.exponent(z)?), 3, &tol).unwrap();
    let by_name = |n: &str| checks.iter().find(|c| c.name == n).unwrap().pass;
    assert!(by_name("homogeneity"));
    assert!(!by_name("normalization"));
}

#[test]
fn report_round_trips_through_json() {
    let p = ParamVector::logistic(2, 0.5).unwrap();
    let report = fit_then_verify(&p, EnvelopeKind::A3, 0.25, 50).unwrap();
    let json = serde_json::to_string(&report).unwrap();
    let back: RegularityReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, report);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    for key in ["model", "theta", "norm", "checks", "envelope"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    for key in ["name", "grid_size", "worst_ratio", "pass", "witness"] {
        assert!(v["checks"][0].get(key).is_some(), "missing {key}");
    }
}
