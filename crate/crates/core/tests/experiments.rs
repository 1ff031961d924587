//! Monte Carlo experiments: examples, config handling and output files.

use ihtlab::experiments::{
    run, run_and_write, ExperimentConfig, ExperimentKind, ResultBody, DistributionResult, ErrorBoundResult,
    TransitionMap,
};
use ihtlab::{Error, SolverConfig};

fn distribution(trials: usize, sigma: f64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(ExperimentKind::McDistribution, trials);
    c.n = Some(100);
    c.k = Some(10);
    c.overlap = Some(5);
    c.sigma = sigma;
    c.master_seed = 2024;
    c
}

fn as_distribution(body: &ResultBody) -> &DistributionResult {
    match body {
        ResultBody::Distribution(d) => d,
        other => panic!("unexpected body {other:?}"),
    }
}

fn as_transition(body: &ResultBody) -> &TransitionMap {
    match body {
        ResultBody::Transition(t) => t,
        other => panic!("unexpected body {other:?}"),
    }
}

fn as_error(body: &ResultBody) -> &ErrorBoundResult {
    match body {
        ResultBody::ErrorBound(e) => e,
        other => panic!("unexpected body {other:?}"),
    }
}

#[test]
fn squared_ratio_follows_the_scaled_f_law() {
    let r = run(&distribution(10_000, 0.2)).unwrap();
    let d = as_distribution(&r.result);
    let f = d.check("lhs_signal_f_law").unwrap();
    assert!(f.passed, "{f:?}");
    let expected = 10.0 / 89.0;
    assert!((f.mean - expected).abs() < 4.0 * f.std_error, "{} vs {expected}", f.mean);
    for check in &d.checks {
        assert!(check.passed, "{check:?}");
    }
}

#[test]
fn noiseless_bounds_hold_trivially() {
    let r = run(&distribution(500, 0.0)).unwrap();
    let d = as_distribution(&r.result);
    for name in ["lhs_noise_bound", "rhs_noise_bound"] {
        let c = d.check(name).unwrap();
        assert_eq!(c.violations, Some(0));
        assert_eq!(c.mean, 0.0);
    }
    assert!(d.check("lhs_noise_f_law").is_none());
}

#[test]
fn rayleigh_quadratic_mean_is_normalised() {
    let r = run(&distribution(4_000, 0.0)).unwrap();
    let c = as_distribution(&r.result).check("rayleigh_quadratic").unwrap().clone();
    let n = 100.0;
    assert!((c.mean / n - 1.0).abs() <= 3.0 * c.std_error / n, "{c:?}");
}

#[test]
fn equal_supports_are_rejected() {
    let mut c = distribution(10, 0.0);
    c.overlap = Some(0);
    assert!(matches!(run(&c), Err(Error::Config(_))));
}

#[test]
fn recovery_far_below_the_bound_always_succeeds() {
    let mut c = ExperimentConfig::new(ExperimentKind::McTransition, 200);
    c.n = Some(400);
    c.deltas = vec![0.5];
    c.rhos = vec![0.0025];
    c.solver = Some(SolverConfig::iht(0.65));
    let r = run(&c).unwrap();
    let t = as_transition(&r.result);
    assert_eq!(t.cells[0].k, 1);
    assert_eq!(t.cells[0].success.rate, 1.0);
    assert!(t.cells[0].success.wilson_lo > 0.95);
    assert!(t.contour[0].rho_hat.unwrap() > 0.0025);
}

#[test]
fn recovery_near_one_half_fails() {
    let mut c = ExperimentConfig::new(ExperimentKind::McTransition, 100);
    c.n = Some(50);
    c.deltas = vec![0.5];
    c.rhos = vec![0.5];
    c.solver = Some(SolverConfig::niht(1.1, 0.05).with_max_iters(1000));
    let r = run(&c).unwrap();
    let rate = as_transition(&r.result).cells[0].success.rate;
    assert!(rate <= 0.05, "rate {rate}");
}

#[test]
fn empirical_contour_lies_above_the_bound() {
    let mut c = ExperimentConfig::new(ExperimentKind::McTransition, 20);
    c.n = Some(100);
    c.deltas = vec![0.25, 0.5, 1.0];
    c.rhos = vec![0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5];
    c.solver = Some(SolverConfig::iht(0.65).with_max_iters(3000));
    let r = run(&c).unwrap();
    for p in &as_transition(&r.result).contour {
        let rho_hat = p.rho_hat.unwrap();
        match p.rho_50 {
            Some(r50) => assert!(r50 > rho_hat, "delta {}: {r50} vs {rho_hat}", p.delta),
            None => panic!("no contour at delta {}: {:?}", p.delta, p.status),
        }
    }
}

fn error_config(sigma: f64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(ExperimentKind::McErrorVsXi, 60);
    c.n = Some(200);
    c.deltas = vec![0.5];
    c.rho_fraction = Some(0.25);
    c.sigma = sigma;
    c.master_seed = 99;
    c.solver = Some(SolverConfig {
        alpha: None,
        ..SolverConfig::iht(1.0)
    });
    c
}

#[test]
fn noiseless_runs_recover_exactly() {
    let r = run(&error_config(0.0)).unwrap();
    let e = as_error(&r.result);
    assert_eq!(e.stable_verified, 60);
    assert!(e.errors.max <= 1e-6, "{:?}", e.errors);
    assert_eq!(e.compliance.successes, 60);
}

#[test]
fn errors_scale_linearly_with_sigma() {
    let one = run(&error_config(0.05)).unwrap();
    let two = run(&error_config(0.1)).unwrap();
    let (a, b) = (as_error(&one.result), as_error(&two.result));
    assert_eq!(b.bound, 2.0 * a.bound);
    let ratio = b.errors.median / a.errors.median;
    assert!((1.5..=2.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn undefined_stability_is_a_config_error() {
    let mut c = error_config(0.1);
    c.rho_fraction = None;
    c.rhos = vec![0.3];
    assert!(matches!(run(&c), Err(Error::Config(_))));
    let mut c = error_config(0.1);
    c.solver = Some(SolverConfig::iht(5.0));
    assert!(matches!(run(&c), Err(Error::Config(_))));
}

#[test]
fn rip_scan_reports_constants() {
    let mut c = ExperimentConfig::new(ExperimentKind::RipScan, 8);
    c.n = Some(12);
    c.big_n = Some(24);
    c.s = Some(2);
    let r = run(&c).unwrap();
    match &r.result {
        ResultBody::RipScan(s) => {
            assert_eq!(s.lower.count, 8);
            assert!(s.upper.min > 0.0 && s.lower.max < 1.0);
            assert!(s.table_upper.is_some());
        }
        other => panic!("unexpected body {other:?}"),
    }
    assert_eq!(r.per_trial.rows(), 8);
}

#[test]
fn output_files_embed_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = distribution(50, 0.1);
    c.output_path = Some(dir.path().join("dist.json"));
    c.per_trial_path = Some(dir.path().join("dist.csv"));
    run_and_write(&c).unwrap();
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("dist.json")).unwrap()).unwrap();
    assert_eq!(json["version"], ihtlab::VERSION);
    assert_eq!(json["kind"], "mc_distribution");
    let echoed: ExperimentConfig = serde_json::from_value(json["config"].clone()).unwrap();
    assert_eq!(echoed, c);
    let csv = std::fs::read_to_string(dir.path().join("dist.csv")).unwrap();
    assert_eq!(csv.lines().count(), 51);
}

#[test]
fn missing_output_directory_is_a_config_error() {
    let mut c = distribution(5, 0.0);
    c.output_path = Some("/nonexistent/dir/out.json".into());
    assert!(matches!(run(&c), Err(Error::Config(_))));
}

#[test]
fn config_text_round_trips_and_rejects_unknown_keys() {
    let text = r#"{
        "kind": "mc_transition",
        "n": 50,
        "deltas": [0.5],
        "rhos": [0.1],
        "trials": 3,
        "solver": {"variant": "niht", "kappa": 1.2}
    }"#;
    let c = ExperimentConfig::from_json(text).unwrap();
    assert_eq!(c.solver.as_ref().unwrap().kappa, 1.2);
    assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    let bad = text.replace("\"trials\"", "\"trails\"");
    assert!(ExperimentConfig::from_json(&bad).unwrap_err().is_config());
}
