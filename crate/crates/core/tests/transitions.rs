//! Phase-transition bounds, stepsize intervals and stability factors.

use approx::assert_relative_eq;
use ihtlab::asymptotics::UnionExponent::{self, Unscaled, PerDelta};
use ihtlab::rip::RipBoundProvider;
use ihtlab::transitions::{
    curve_csv, default_delta_grid, lhs_stable, rho_hat_curve, rho_hat_iht, rho_hat_niht, stability_factor_iht,
    stability_factor_niht, stepsize_interval_iht, surface, surface_csv, CurveSpec, SurfaceSpec, XiVariant,
};
use ihtlab::Error;

fn table() -> RipBoundProvider {
    RipBoundProvider::default_gaussian()
}

#[test]
fn lhs_anchor_and_small_rho_limit() {
    // 30-digit reference from an independent root-finding oracle.
    assert_relative_eq!(lhs_stable(0.5, 0.01, Unscaled).unwrap(), 0.468_485_665_783_161_338, max_relative = 1e-13);
    let mut last = f64::INFINITY;
    for rho in [1e-2, 1e-4, 1e-6, 1e-8] {
        let v = lhs_stable(0.5, rho, Unscaled).unwrap();
        assert!(v > 0.0 && v < last);
        last = v;
    }
    assert!(last < 1e-3);
}

#[test]
fn degenerate_provider_crosses_one() {
    let p = RipBoundProvider::constant(0.0, 0.0).unwrap();
    let r = rho_hat_iht(0.5, &p, Unscaled).unwrap();
    assert!(!r.saturated);
    assert_relative_eq!(lhs_stable(0.5, r.rho_hat, Unscaled).unwrap(), 1.0, epsilon = 1e-10);
    assert!(r.residual.abs() < 1e-10);
}

#[test]
fn unit_kappa_reproduces_iht() {
    for delta in [0.01, 0.3, 1.0] {
        let a = rho_hat_iht(delta, &table(), PerDelta).unwrap();
        let b = rho_hat_niht(delta, 1.0, &table(), PerDelta).unwrap();
        assert_eq!(a.rho_hat, b.rho_hat);
    }
}

#[test]
fn missing_crossing_names_the_provider() {
    let p = RipBoundProvider::constant(0.0, 1e12).unwrap();
    match rho_hat_iht(0.5, &p, Unscaled) {
        Err(Error::Domain(msg)) => assert!(msg.contains("constant(L=0,U=1000000000000)"), "{msg}"),
        other => panic!("expected a domain error, got {other:?}"),
    }
}

#[test]
fn iht_stability_anchor() {
    let s = stability_factor_iht(0.5, 0.002, 0.5, None, Unscaled).unwrap();
    assert_relative_eq!(s.a, 0.884_948_818_943_867_167_12, max_relative = 1e-12);
    assert_relative_eq!(s.xi, 0.929_884_636_845_574_171_25, max_relative = 1e-12);
}

#[test]
fn niht_stability_anchor() {
    let p = RipBoundProvider::constant(0.0, 0.5).unwrap();
    let s = stability_factor_niht(0.5, 0.002, 1.1, &p, Unscaled, XiVariant::PlainA).unwrap();
    assert_relative_eq!(s.alpha, 1.0 / 1.65, max_relative = 1e-15);
    assert_relative_eq!(s.a, 0.712_840_489_552_501_503_13, max_relative = 1e-12);
    assert_relative_eq!(s.xi, 0.720_974_819_959_161_000_15, max_relative = 1e-12);
    let w = stability_factor_niht(0.5, 0.002, 1.1, &p, Unscaled, XiVariant::WithOnePlusA).unwrap();
    assert_relative_eq!(w.xi, 0.758_604_095_023_607_874_33, max_relative = 1e-12);
}

#[test]
fn xi_blows_up_at_the_interval_end() {
    let (lo, hi) = stepsize_interval_iht(0.5, 0.002, &table(), Unscaled).unwrap().unwrap();
    let mut last = 0.0;
    for eps in [1e-1, 1e-3, 1e-6, 1e-9] {
        let xi = stability_factor_iht(0.5, 0.002, lo * (1.0 + eps), None, Unscaled).unwrap().xi;
        assert!(xi > last);
        last = xi;
    }
    assert!(last > 1e6);
    assert!(matches!(
        stability_factor_iht(0.5, 0.002, lo * 0.99, None, Unscaled),
        Err(Error::StabilityUndefined(_))
    ));
    let mid = stability_factor_iht(0.5, 0.002, 0.5 * (lo + hi), Some(&table()), Unscaled).unwrap();
    assert!(mid.xi.is_finite() && mid.xi > 0.0);
    assert_eq!(mid.alpha_interval, Some((lo, hi)));
}

#[test]
fn niht_xi_grows_towards_the_transition() {
    let t = rho_hat_niht(0.5, 1.1, &table(), Unscaled).unwrap();
    let half = stability_factor_niht(0.5, t.rho_hat / 2.0, 1.1, &table(), Unscaled, XiVariant::PlainA).unwrap();
    assert!(half.xi.is_finite());
    let mut last = half.xi;
    for frac in [0.9, 0.99, 0.999, 0.99999] {
        let xi = stability_factor_niht(0.5, frac * t.rho_hat, 1.1, &table(), Unscaled, XiVariant::PlainA)
            .unwrap()
            .xi;
        assert!(xi > last, "frac {frac}");
        last = xi;
    }
    assert!(last > 1e3);
    assert!(matches!(
        stability_factor_niht(0.5, 1.01 * t.rho_hat, 1.1, &table(), Unscaled, XiVariant::PlainA),
        Err(Error::StabilityUndefined(_))
    ));
}

#[test]
fn niht_bound_lies_below_iht_bound() {
    for exponent in [Unscaled, PerDelta] {
        let iht = rho_hat_curve(&default_delta_grid(), CurveSpec::Iht, &table(), exponent).unwrap();
        let niht = rho_hat_curve(&default_delta_grid(), CurveSpec::Niht { kappa: 1.1 }, &table(), exponent).unwrap();
        for (a, b) in iht.iter().zip(&niht) {
            assert!(b.rho_hat < a.rho_hat, "delta {}", a.delta);
        }
    }
}

#[test]
fn curve_csv_shape_and_determinism() {
    let deltas = [0.1, 0.5, 1.0];
    let rows = rho_hat_curve(&deltas, CurveSpec::Iht, &table(), Unscaled).unwrap();
    let csv = curve_csv(&rows, false);
    assert_eq!(csv.lines().count(), 4);
    assert_eq!(csv.lines().next().unwrap(), "delta,rho_hat,residual");
    let again = curve_csv(&rho_hat_curve(&deltas, CurveSpec::Iht, &table(), Unscaled).unwrap(), false);
    assert_eq!(csv, again);
    let ext = curve_csv(&rows, true);
    assert!(ext.lines().next().unwrap().ends_with("saturated,monotone"));
}

#[test]
fn surfaces_mark_undefined_cells_empty() {
    let spec = SurfaceSpec::XiIhtMidpoint;
    let pts = surface(&[0.5], &[0.001, 0.3], spec, &table(), Unscaled).unwrap();
    assert!(pts[0].values[0].is_some());
    assert!(pts[1].values[0].is_none());
    let csv = surface_csv(&pts, spec);
    assert!(csv.lines().nth(2).unwrap().ends_with(','));
    let pts = surface(&[0.5], &[0.001], SurfaceSpec::StepsizeInterval, &table(), Unscaled).unwrap();
    assert_eq!(surface_csv(&pts, SurfaceSpec::StepsizeInterval).lines().next().unwrap(), "delta,rho,alpha_lo,alpha_hi");
}

#[test]
fn exponents_agree_at_full_sampling() {
    let a = rho_hat_iht(1.0, &table(), Unscaled).unwrap();
    let b = rho_hat_iht(1.0, &table(), UnionExponent::PerDelta).unwrap();
    assert_eq!(a.rho_hat, b.rho_hat);
}
