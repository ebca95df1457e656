//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use maxstable::likelihood::{score, score_at, ScoreMethod};
use maxstable::mle::{fisher_information, fit, FisherMethod, FitOptions};
use maxstable::models::{map_spatial_params, Model, SpatialConfig, SpatialFamily};
use maxstable::numerics::quadrature::{integrate_1d, integrate_box, Tolerance};
use maxstable::numerics::RngStream;
use maxstable::partitions::{bell_number, naive_partition_sum, sum_partition_products};
use maxstable::regularity::{check_structure, fit_then_verify, EnvelopeKind};
use maxstable::simulate::{simulate, simulate_streams, SimulationMethod};
use maxstable::study::{run_study, StudyConfig};
use maxstable::{validate_params, Dataset, Error, ModelId, ParamVector, Parameterization, RawParams};
use serde_json::Value;

type Outcome = Result<String, String>;

/// Master seed for every seeded criterion; independent samples use
/// separate streams.
const SEED: u64 = 7;

struct Criterion {
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn params(json: &str) -> ParamVector {
    let raw: RawParams = serde_json::from_str(json).expect("parameter literal");
    validate_params(raw).expect("valid parameter literal")
}

fn e<T>(r: maxstable::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn partitions() -> Outcome {
    let bell = [1u64, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975];
    // Bell triangle
    let mut row = vec![1u64];
    for (k, &want) in bell.iter().enumerate() {
        let last = *row.last().unwrap();
        ensure!(last == want, "Bell triangle gives {last} for k={}", k + 1);
        let mut next = vec![last];
        for x in &row {
            next.push(next.last().unwrap() + x);
        }
        ensure!(e(bell_number(k + 1))? == want, "bell_number({}) = {:?}", k + 1, bell_number(k + 1));
        row = next;
    }
    let mut rng = RngStream::new(SEED, 0);
    let mut worst = 0f64;
    for i in 0..100 {
        let k = 1 + i % 6;
        let vals: Vec<f64> = (0..1usize << k).map(|_| 0.01 + 10.0 * rng.uniform_open()).collect();
        let dp = e(sum_partition_products(&vals, k))?;
        let naive = e(naive_partition_sum(&vals, k))?;
        worst = worst.max(((dp - naive) / naive).abs());
    }
    ensure!(worst < 1e-12, "max rel err {worst:.2e}");
    Ok(format!("max rel err {worst:.1e}"))
}

fn structure_points() -> Vec<ParamVector> {
    vec![
        params(r#"{"model":"logistic","dim":2,"theta":0.3}"#),
        params(r#"{"model":"logistic","dim":3,"theta":0.6}"#),
        params(r#"{"model":"logistic","dim":4,"theta":0.9}"#),
        params(r#"{"model":"huesler_reiss","lambda2":[[0,0.5],[0.5,0]]}"#),
        params(r#"{"model":"huesler_reiss","lambda2":[[0,2],[2,0]]}"#),
        params(r#"{"model":"huesler_reiss","lambda2":[[0,0.25,0.75],[0.25,0,0.5],[0.75,0.5,0]]}"#),
        params(r#"{"model":"dirichlet","alpha":[2,1]}"#),
        params(r#"{"model":"dirichlet","alpha":[0.5,0.5]}"#),
        params(r#"{"model":"dirichlet","alpha":[0.7,1.5,3]}"#),
        params(r#"{"model":"extremal_t","sigma":[[1,0.5],[0.5,1]],"nu":1}"#),
        params(r#"{"model":"extremal_t","sigma":[[1,-0.3],[-0.3,1]],"nu":3}"#),
        params(r#"{"model":"extremal_t","sigma":[[1,0.5,0.2],[0.5,1,-0.3],[0.2,-0.3,1]],"nu":2}"#),
    ]
}

fn structure() -> Outcome {
    let mut checks = 0;
    for p in structure_points() {
        let report = e(check_structure(&p))?;
        for c in &report.checks {
            ensure!(c.pass, "{} k={} {}: ratio {:.3} at {:?}", p.model_id(), p.dim(), c.name, c.worst_ratio, c.witness);
            checks += 1;
        }
        let names: Vec<&str> = report.checks.iter().map(|c| c.name.as_str()).collect();
        ensure!(names.contains(&"homogeneity") && names.contains(&"normalization"), "{names:?}");
        if matches!(p.model_id(), ModelId::Dirichlet | ModelId::ExtremalT) {
            ensure!(names.iter().any(|n| *n == "angular_moment"), "{} lacks moment checks", p.model_id());
        }
    }
    Ok(format!("{checks} checks on 12 parameter points"))
}

fn bivariate() -> Vec<Model> {
    vec![
        Model::new(&ParamVector::logistic(2, 0.3).unwrap()).unwrap(),
        Model::new(&ParamVector::logistic(2, 0.8).unwrap()).unwrap(),
        Model::new(&ParamVector::huesler_reiss_pair(0.5).unwrap()).unwrap(),
        Model::new(&ParamVector::huesler_reiss_pair(2.0).unwrap()).unwrap(),
    ]
}

fn density() -> Outcome {
    let mut rng = RngStream::new(SEED, 1);
    let mut worst_fd = 0f64;
    for m in bivariate() {
        let cdf = |a: f64, b: f64| (-m.exponent(&[a, b]).unwrap()).exp();
        for _ in 0..50 {
            let z = [0.2 * 25f64.powf(rng.uniform_open()), 0.2 * 25f64.powf(rng.uniform_open())];
            let (h1, h2) = (1e-4 * z[0], 1e-4 * z[1]);
            let fd = (cdf(z[0] + h1, z[1] + h2) - cdf(z[0] + h1, z[1] - h2) - cdf(z[0] - h1, z[1] + h2)
                + cdf(z[0] - h1, z[1] - h2))
                / (4.0 * h1 * h2);
            let f = e(m.log_density(&z))?.log_density.exp();
            worst_fd = worst_fd.max(((f - fd) / fd).abs());
        }
    }
    ensure!(worst_fd < 1e-4, "density vs mixed partial: rel err {worst_fd:.2e}");

    let mut worst_int = 0f64;
    let mut worst_marg = 0f64;
    for m in bivariate() {
        // u = exp(−1/z) maps (0,∞) onto (0,1)
        let g = |u: &[f64]| -> f64 {
            let z: Vec<f64> = u.iter().map(|x| -1.0 / x.ln()).collect();
            let jac: f64 = u.iter().zip(&z).map(|(x, zi)| zi * zi / x).product();
            let v = m.log_density(&z).map(|d| d.log_density.exp() * jac).unwrap_or(0.0);
            if v.is_finite() { v } else { 0.0 }
        };
        let tol = Tolerance { max_evals: 4_000_000, ..Tolerance::new(1e-7, 1e-7) };
        let total = match integrate_box(g, &[0.0, 0.0], &[1.0, 1.0], tol) {
            Ok(q) => q.value,
            Err(Error::MaxSubdivisions { estimate, .. }) => estimate,
            Err(err) => return Err(err.to_string()),
        };
        worst_int = worst_int.max((total - 1.0).abs());
        for z1 in [0.4, 1.0, 3.0] {
            let q = e(integrate_1d(
                |u| {
                    let z2 = -1.0 / u.ln();
                    let v = m.log_density(&[z1, z2]).map(|d| d.log_density.exp()).unwrap_or(0.0) * z2 * z2 / u;
                    if v.is_finite() { v } else { 0.0 }
                },
                0.0,
                1.0,
                Tolerance::new(1e-12, 1e-10),
            ))?;
            let exact = (-1.0 / z1).exp() / (z1 * z1);
            worst_marg = worst_marg.max(((q.value - exact) / exact).abs());
        }
    }
    ensure!(worst_int < 1e-4, "|∫f − 1| = {worst_int:.2e}");
    ensure!(worst_marg < 1e-4, "marginal rel err {worst_marg:.2e}");
    Ok(format!("fd {worst_fd:.1e}, |∫f−1| {worst_int:.1e}, margin {worst_marg:.1e}"))
}

fn score_information() -> Outcome {
    let mut rng = RngStream::new(SEED, 2);
    let mut worst = 0f64;
    for k in 2..=5 {
        for th in [0.2, 0.5, 0.8] {
            let p = ParamVector::logistic(k, th).unwrap();
            for _ in 0..10 {
                let z: Vec<f64> = (0..k).map(|_| 0.1 * 100f64.powf(rng.uniform_open())).collect();
                let a = e(score(&p, &z, ScoreMethod::Analytic))?[0];
                let f = e(score(&p, &z, ScoreMethod::FiniteDiff))?[0];
                worst = worst.max(((a - f) / a).abs());
            }
        }
    }
    ensure!(worst < 1e-6, "analytic vs fd score: rel err {worst:.2e}");

    let n = 100_000;
    let mut z_scores = Vec::new();
    for (p, method) in [
        (ParamVector::logistic(2, 0.6).unwrap(), ScoreMethod::Analytic),
        (ParamVector::huesler_reiss_pair(1.0).unwrap(), ScoreMethod::FiniteDiff),
    ] {
        let data = e(simulate(&p, n, SEED))?;
        let s = data.rows().map(|z| score(&p, z, method).map(|g| g[0])).collect::<maxstable::Result<Vec<_>>>();
        let s = e(s)?;
        let (mean, sd) = mean_sd(&s);
        let zs = mean / (sd / (n as f64).sqrt());
        ensure!(zs.abs() < 3.0, "{} score mean {mean:.3e} is {zs:.2} SE from 0", p.model_id());
        z_scores.push(zs);
    }

    // Bartlett: E[s sᵀ] against E[−∂² log f]
    let truth = ParamVector::logistic(2, 0.6).unwrap();
    let param = Parameterization::for_params(&truth);
    let v = e(param.encode(&truth))?;
    let opg = e(fisher_information(&param, &v, FisherMethod::OpgMonteCarlo { draws: 200_000, seed: SEED }))?;
    let data = e(simulate_streams(&e(Model::new(&truth))?, 10_000, SEED, 1 << 32, SimulationMethod::Auto))?;
    let obs = e(fisher_information(&param, &v, FisherMethod::Observed { data: &data, step: 1e-4 }))?;
    let h = 1e-4;
    let curv = data
        .rows()
        .map(|z| {
            let up = score_at(&param, &[v[0] + h], z, ScoreMethod::Analytic)?[0];
            let dn = score_at(&param, &[v[0] - h], z, ScoreMethod::Analytic)?[0];
            Ok(-(up - dn) / (2.0 * h))
        })
        .collect::<maxstable::Result<Vec<f64>>>();
    let (_, sd) = mean_sd(&e(curv)?);
    let se_obs = sd / (data.len() as f64).sqrt();
    let i_opg = opg.matrix[0][0];
    let se_opg = opg.std_errors.as_ref().ok_or("opg information has no standard errors")?[0][0];
    let i_obs = obs.matrix[0][0];
    let gap = (i_opg - i_obs).abs() / (se_opg.powi(2) + se_obs.powi(2)).sqrt();
    ensure!(gap < 3.0, "opg {i_opg:.4} vs observed {i_obs:.4}: {gap:.2} combined SE");
    Ok(format!(
        "score rel err {worst:.1e}; mean z {:.2}, {:.2}; Bartlett gap {gap:.2} SE",
        z_scores[0], z_scores[1]
    ))
}

fn mean_sd(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (mut i, mut j, mut d) = (0usize, 0usize, 0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

/// First stream of sample `part` for case `case`.
fn stream(case: usize, part: u64) -> u64 {
    ((case as u64) << 40) | (part << 32)
}

fn simulation() -> Outcome {
    let n = 100_000;
    let cases = [
        ParamVector::logistic(2, 0.3).unwrap(),
        ParamVector::logistic(2, 0.7).unwrap(),
        ParamVector::huesler_reiss_pair(1.0).unwrap(),
        ParamVector::dirichlet(vec![2.0, 1.0]).unwrap(),
    ];
    let mut worst = 0f64;
    let mut worst_ks = 0f64;
    let m_small = 10_000;
    // 1% critical value of the two-sample statistic, equal sizes
    let crit = 1.628 * (2.0 / m_small as f64).sqrt();
    for (s, p) in cases.iter().enumerate() {
        let m = e(Model::new(p))?;
        let data = e(simulate_streams(&m, n, SEED, stream(s, 0), SimulationMethod::Auto))?;
        let mut targets: Vec<(Vec<f64>, f64)> = Vec::new();
        for z in [[1.0, 1.0], [0.5, 2.0], [2.0, 2.0]] {
            targets.push((z.to_vec(), (-e(m.exponent(&z))?).exp()));
        }
        for i in 0..2 {
            for x in [0.5f64, 1.0, 2.0, 5.0] {
                let mut z = vec![f64::INFINITY; 2];
                z[i] = x;
                targets.push((z, (-1.0 / x).exp()));
            }
        }
        for (z, prob) in &targets {
            let hits = data.rows().filter(|r| r.iter().zip(z).all(|(a, b)| a <= b)).count();
            let emp = hits as f64 / n as f64;
            let se = (prob * (1.0 - prob) / n as f64).sqrt();
            let ratio = (emp - prob).abs() / se;
            ensure!(ratio < 3.0, "{} at {z:?}: {emp:.5} vs {prob:.5} ({ratio:.2} SE)", p.model_id());
            worst = worst.max(ratio);
        }

        let single = e(simulate_streams(&m, m_small, SEED, stream(s, 1), SimulationMethod::Auto))?;
        let pool = e(simulate_streams(&m, 5 * m_small, SEED, stream(s, 2), SimulationMethod::Auto))?;
        let maxima: Vec<[f64; 2]> = (0..m_small)
            .map(|r| {
                let mx = |i: usize| (0..5).map(|t| pool.row(5 * r + t)[i]).fold(0.0, f64::max) / 5.0;
                [mx(0), mx(1)]
            })
            .collect();
        let summaries: [fn(&[f64]) -> f64; 3] = [|r| r[0], |r| r[1], |r| r[0].min(r[1])];
        for f in summaries {
            let d = ks_two_sample(single.rows().map(f).collect(), maxima.iter().map(|r| f(r)).collect());
            ensure!(d < crit, "{} max-stability KS {d:.4} ≥ {crit:.4}", p.model_id());
            worst_ks = worst_ks.max(d);
        }
    }
    Ok(format!("worst cdf gap {worst:.2} SE, worst KS {worst_ks:.4} < {crit:.4}"))
}

fn normality_case(theta0: ParamVector) -> Result<String, String> {
    let cfg = StudyConfig {
        model: theta0.model_id(),
        theta0,
        n: 200,
        replications: 400,
        master_seed: SEED,
        ci_level: 0.95,
        fisher_draws: 100_000,
        n_starts: 1,
    };
    let res = e(run_study(&cfg))?;
    let s = &res.summary;
    let cov = s.coverage.proportion;
    let ratio = s.sd_ratio[0];
    let line = format!("{} coverage {cov:.4}, sd ratio {ratio:.3}", cfg.model);
    ensure!((0.915..=0.975).contains(&cov), "{line}: coverage outside [0.915, 0.975]");
    ensure!((ratio - 1.0).abs() <= 0.15, "{line}: sd off by more than 15%");
    Ok(line)
}

fn normality() -> Outcome {
    let a = normality_case(ParamVector::logistic(2, 0.6).unwrap())?;
    let b = normality_case(ParamVector::huesler_reiss_pair(1.0).unwrap())?;
    Ok(format!("{a}; {b}"))
}

fn spatial() -> Outcome {
    let line = vec![vec![0.0], vec![1.0], vec![3.0]];
    let cfg = SpatialConfig { family: SpatialFamily::BrownResnickVariogram, locations: line.clone(), scale: 1.0, smoothness: 1.0 };
    let p = e(map_spatial_params(&cfg))?;
    let got = p.natural_values();
    ensure!(got == vec![0.25, 0.75, 0.5], "λ² = {got:?}");

    let tri = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]];
    for family in [SpatialFamily::BrownResnickVariogram, SpatialFamily::SchlatherPowexp] {
        let cfg = SpatialConfig { family, locations: tri.clone(), scale: 1.0, smoothness: 1.0 };
        ensure!(map_spatial_params(&cfg) == Err(Error::NotIdentifiable), "{family:?} on a triangle was accepted");
    }

    let param = Parameterization::Spatial { family: SpatialFamily::BrownResnickVariogram, locations: line };
    let truth = [1.0, 1.0];
    let data: Dataset = e(simulate(&p, 500, SEED))?;
    let init = e(param.unconstrained_from_natural(&[1.5, 0.6]))?;
    let res = e(fit(&param, &data, &init, &FitOptions::default()))?;
    ensure!(res.converged, "spatial fit did not converge");
    let cis = res.wald_intervals.ok_or("no Wald intervals")?;
    let mut parts = Vec::new();
    for (ci, t) in cis.iter().zip(truth) {
        ensure!(ci.lower < t && t < ci.upper, "{} = {t} outside [{:.3}, {:.3}]", ci.name, ci.lower, ci.upper);
        parts.push(format!("{} {:.3} [{:.3}, {:.3}]", ci.name, ci.estimate, ci.lower, ci.upper));
    }
    Ok(parts.join(", "))
}

fn golden(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    serde_json::from_str(&fs::read_to_string(path).expect("golden file")).expect("golden JSON")
}

fn sorted_keys(v: &Value) -> Vec<String> {
    let mut k: Vec<String> = v.as_object().map(|o| o.keys().cloned().collect()).unwrap_or_default();
    k.sort();
    k
}

fn regularity() -> Outcome {
    let keys = golden("check_report_keys.json");
    let want = |k: &str| -> Vec<String> { serde_json::from_value(keys[k].clone()).unwrap() };
    let cases = [
        (ParamVector::logistic(2, 0.5).unwrap(), EnvelopeKind::A3, 0.25, 200),
        (ParamVector::logistic(3, 0.4).unwrap(), EnvelopeKind::A3, 0.25, 30),
        (ParamVector::huesler_reiss_pair(1.0).unwrap(), EnvelopeKind::A3, 0.0, 200),
        (params(r#"{"model":"dirichlet","alpha":[2,1]}"#), EnvelopeKind::B3, 0.0, 200),
        (params(r#"{"model":"dirichlet","alpha":[0.7,1.5,3]}"#), EnvelopeKind::B3, 0.0, 30),
        (params(r#"{"model":"extremal_t","sigma":[[1,0.5],[0.5,1]],"nu":1}"#), EnvelopeKind::B3, 0.0, 200),
        (params(r#"{"model":"extremal_t","sigma":[[1,0.3],[0.3,1]],"nu":2.5}"#), EnvelopeKind::B3, 0.0, 200),
    ];
    let mut worst = 0f64;
    for (p, kind, alpha, per_axis) in cases {
        let r = e(fit_then_verify(&p, kind, alpha, per_axis))?;
        let tag = format!("{} k={}", p.model_id(), p.dim());
        ensure!(r.all_pass(), "{tag}: {:?}", r.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
        let ratio = r.refined_ratio.ok_or(format!("{tag}: no refined ratio"))?;
        ensure!(ratio <= 1.1 && r.grid_sensitive == Some(false), "{tag}: refined ratio {ratio:.3}");
        worst = worst.max(ratio);
        let v = serde_json::to_value(&r).map_err(|e| e.to_string())?;
        ensure!(sorted_keys(&v) == want("report"), "{tag}: report keys {:?}", sorted_keys(&v));
        for c in v["checks"].as_array().ok_or("checks is not an array")? {
            ensure!(sorted_keys(c) == want("check"), "{tag}: check keys {:?}", sorted_keys(c));
        }
    }
    Ok(format!("7 audits, worst refined ratio {worst:.3}"))
}

fn maxstab(args: &[&str], dir: &Path) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_maxstab"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "maxstab {args:?}: {}", String::from_utf8_lossy(&out.stderr));
    Ok(out.stdout)
}

fn reproducibility() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let many = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).max(4).to_string();
    fs::write(d.join("hr.json"), r#"{"model":"huesler_reiss","lambda2":[[0,0.25,0.75],[0.25,0,0.5],[0.75,0.5,0]]}"#)
        .map_err(|e| e.to_string())?;
    fs::write(
        d.join("study.json"),
        r#"{"model":"logistic","theta0":{"model":"logistic","dim":2,"theta":0.6},
            "n":50,"replications":40,"master_seed":7,"ci_level":0.95,"fisher_draws":5000}"#,
    )
    .map_err(|e| e.to_string())?;

    let sim = ["simulate", "--params", "hr.json", "--n", "5000", "--seed", "7"];
    let base = maxstab(&sim, d)?;
    ensure!(maxstab(&sim, d)? == base, "simulate differs between runs");
    for t in ["1", many.as_str()] {
        let mut args = sim.to_vec();
        args.extend(["--threads", t]);
        ensure!(maxstab(&args, d)? == base, "simulate differs with --threads {t}");
    }

    let mut outputs = Vec::new();
    for (t, tag) in [("1", "a"), ("1", "b"), (many.as_str(), "c")] {
        let (json, csv) = (format!("{tag}.json"), format!("{tag}.csv"));
        maxstab(&["study", "--params", "study.json", "--threads", t, "--out", &json, "--csv", &csv], d)?;
        let read = |f: &str| fs::read(d.join(f)).map_err(|e| e.to_string());
        outputs.push((read(&json)?, read(&csv)?));
    }
    ensure!(outputs.windows(2).all(|w| w[0] == w[1]), "study output differs across runs or thread counts");
    Ok(format!("simulate and study identical for --threads 1 and {many}"))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { name: "partition engine", budget: Duration::from_secs(1), run: partitions },
        Criterion { name: "structural identities", budget: Duration::from_secs(60), run: structure },
        Criterion { name: "density correctness", budget: Duration::from_secs(60), run: density },
        Criterion { name: "score and information", budget: Duration::from_secs(120), run: score_information },
        Criterion { name: "simulation exactness", budget: Duration::from_secs(180), run: simulation },
        Criterion { name: "asymptotic normality", budget: Duration::from_secs(600), run: normality },
        Criterion { name: "spatial maps", budget: Duration::from_secs(300), run: spatial },
        Criterion { name: "regularity audit", budget: Duration::from_secs(120), run: regularity },
        Criterion { name: "reproducibility", budget: Duration::from_secs(600), run: reproducibility },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(c.run).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > c.budget => {
                Err(format!("{detail}; took {:.1}s, budget {}s", elapsed.as_secs_f64(), c.budget.as_secs()))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS  {:<22} {:>7.2}s  {detail}", c.name, elapsed.as_secs_f64()),
            Err(why) => {
                failed += 1;
                println!("FAIL  {:<22} {:>7.2}s  {why}", c.name, elapsed.as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
