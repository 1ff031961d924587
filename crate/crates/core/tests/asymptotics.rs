//! Special functions, tail roots, Temme terms and rates.

use approx::assert_relative_eq;
use ihtlab::asymptotics::special::{beta_reg, erf, erfc, gamma_p, gamma_q, ln_gamma};
use ihtlab::asymptotics::{
    binom_entropy_limit, bisect, chi2_cdf, chi2_rate, chi2_sf, f_cdf, f_rate, f_sf, shannon_entropy,
    solve_il_target, solve_iu_target, tail_if, tail_il, tail_iu, temme_beta_eta, temme_gamma_eta, GammaBranch,
    TailBranch, TailInputs, UnionExponent,
};
use ihtlab::experiments::stats::ks_one_sample;
use ihtlab::RngSpec;
use rand_distr::{ChiSquared, Distribution, FisherF};
use statrs::distribution::{ChiSquared as SChi2, ContinuousCDF, FisherSnedecor};

#[test]
fn special_functions_agree_with_statrs() {
    for &x in &[0.01, 0.3, 1.0, 2.5, 7.0, 40.0, 170.5] {
        assert_relative_eq!(ln_gamma(x), statrs::function::gamma::ln_gamma(x), max_relative = 1e-13, epsilon = 1e-14);
    }
    // statrs' erf is only good to about 5e-11, so erf/erfc use 30-digit references.
    let reference = [
        (-3.0, -0.999_977_909_503_001_414_56, 1.999_977_909_503_001_414_6),
        (-0.5, -0.520_499_877_813_046_537_68, 1.520_499_877_813_046_537_7),
        (0.2, 0.222_702_589_210_478_466_18, 0.777_297_410_789_521_533_82),
        (1.0, 0.842_700_792_949_714_869_34, 0.157_299_207_050_285_130_66),
        (2.0, 0.995_322_265_018_952_734_16, 0.004_677_734_981_047_265_837_9),
        (4.5, 0.999_999_999_803_383_955_85, 1.966_160_441_542_887_476_3e-10),
    ];
    for (x, e, ec) in reference {
        assert_relative_eq!(erf(x), e, max_relative = 1e-15);
        assert_relative_eq!(erfc(x), ec, max_relative = 1e-14);
    }
    for &(a, x) in &[(0.5, 0.1), (1.0, 1.0), (3.0, 2.0), (10.0, 12.0), (50.0, 45.0), (200.0, 230.0)] {
        assert_relative_eq!(gamma_p(a, x), statrs::function::gamma::gamma_lr(a, x), max_relative = 1e-11);
        assert_relative_eq!(gamma_q(a, x), statrs::function::gamma::gamma_ur(a, x), max_relative = 1e-10);
    }
    for &(a, b, x) in &[(0.5, 0.5, 0.3), (2.0, 3.0, 0.4), (20.0, 10.0, 0.8), (5.0, 45.0, 0.05), (100.0, 200.0, 0.35)] {
        assert_relative_eq!(beta_reg(a, b, x), statrs::function::beta::beta_reg(a, b, x), max_relative = 1e-10);
    }
}

#[test]
fn chi2_and_f_agree_with_statrs() {
    for &dof in &[1.0, 4.0, 17.0, 90.0, 400.0] {
        let d = SChi2::new(dof).unwrap();
        for &q in &[0.3, 0.8, 1.0, 1.4, 2.0] {
            let x = q * dof;
            assert_relative_eq!(chi2_cdf(x, dof).unwrap(), d.cdf(x), max_relative = 1e-10, epsilon = 1e-300);
            assert_relative_eq!(chi2_sf(x, dof).unwrap(), d.sf(x), max_relative = 1e-9, epsilon = 1e-300);
        }
    }
    for &(d1, d2) in &[(1.0, 5.0), (10.0, 91.0), (50.0, 350.0)] {
        let d = FisherSnedecor::new(d1, d2).unwrap();
        for &x in &[0.1, 0.5, 1.0, 2.0, 5.0] {
            assert_relative_eq!(f_cdf(x, d1, d2).unwrap(), d.cdf(x), max_relative = 1e-9, epsilon = 1e-300);
            assert_relative_eq!(f_sf(x, d1, d2).unwrap(), d.sf(x), max_relative = 1e-8, epsilon = 1e-300);
        }
    }
    assert!(chi2_cdf(1.0, 0.0).is_err());
}

#[test]
fn sampled_laws_match_the_cdfs() {
    // Dvoretzky–Kiefer–Wolfowitz: P(sup|F_m − F| > ε) ≤ 2e^{−2mε²}; ε at 1e-6.
    let m = 20_000;
    let eps = ((2.0f64 / 1e-6).ln() / (2.0 * m as f64)).sqrt();
    let mut rng = RngSpec::new(1, 0).rng();
    let chi = ChiSquared::new(13.0).unwrap();
    let xs: Vec<f64> = (0..m).map(|_| chi.sample(&mut rng)).collect();
    assert!(ks_one_sample(&xs, |x| chi2_cdf(x, 13.0).unwrap()) < eps);
    let f = FisherF::new(7.0, 40.0).unwrap();
    let xs: Vec<f64> = (0..m).map(|_| f.sample(&mut rng)).collect();
    assert!(ks_one_sample(&xs, |x| f_cdf(x, 7.0, 40.0).unwrap()) < eps);
}

#[test]
fn entropy_examples() {
    assert_relative_eq!(shannon_entropy(0.5).unwrap(), std::f64::consts::LN_2, epsilon = 1e-16);
    assert_eq!(shannon_entropy(0.0).unwrap(), 0.0);
    assert!(shannon_entropy(-0.1).is_err());
}

#[test]
fn tail_roots_vanish_with_their_target() {
    for t in [1e-2, 1e-4, 1e-8] {
        let u = solve_iu_target(t).unwrap().value;
        let l = solve_il_target(t).unwrap().value;
        // Both sides behave like ν²/2 near zero.
        assert_relative_eq!(u, (2.0 * t).sqrt(), max_relative = (2.0 * t).sqrt());
        assert_relative_eq!(l, (2.0 * t).sqrt(), max_relative = (2.0 * t).sqrt());
    }
    let inputs = TailInputs::new(1e-9, 1e-9, 1.0).unwrap();
    assert!(tail_iu(inputs, UnionExponent::Unscaled).unwrap().value < 1e-3);
    assert!(tail_il(inputs, UnionExponent::Unscaled).unwrap().value < 1e-3);
}

#[test]
fn unit_target_roots_match_a_plain_bisection() {
    let u = bisect(|v| v - v.ln_1p() - 1.0, 0.0, 10.0).unwrap().value;
    let l = bisect(|v| -v - (-v).ln_1p() - 1.0, 0.0, 1.0 - 1e-15).unwrap().value;
    assert!((solve_iu_target(1.0).unwrap().value - u).abs() < 1e-4);
    assert!((solve_il_target(1.0).unwrap().value - l).abs() < 1e-4);
    assert_relative_eq!(u, 2.146_193_220_620_582_585, epsilon = 1e-12);
    assert_relative_eq!(l, 0.841_405_660_436_960_638, epsilon = 1e-12);
}

#[test]
fn f_root_approaches_its_lower_end_as_delta_vanishes() {
    for rho in [0.05, 0.2, 0.4] {
        let lo = rho / (1.0 - rho);
        let f = tail_if(1e-9, rho, UnionExponent::Unscaled).unwrap().value;
        assert!(f >= lo && f - lo < 1e-3, "rho {rho}: {f} vs {lo}");
    }
}

#[test]
fn gamma_eta_examples() {
    let t = temme_gamma_eta(10.0, 20.0, GammaBranch::Q).unwrap();
    assert_relative_eq!(t.eta, 0.783_393_667_883_59, epsilon = 1e-13);
    assert!(temme_gamma_eta(10.0, 5.0, GammaBranch::Q).is_err());
    let p = temme_gamma_eta(10.0, 5.0, GammaBranch::P).unwrap();
    assert!(p.eta < 0.0);
}

#[test]
fn beta_eta_vanishes_at_the_mean_point() {
    let t = temme_beta_eta(20.0, 10.0, 20.0 / 30.0).unwrap();
    assert!(t.eta.abs() < 1e-7);
    assert_relative_eq!(t.leading, 0.5, epsilon = 1e-7);
    let t = temme_beta_eta(20.0, 10.0, 0.8).unwrap();
    assert!(t.eta > 0.0);
    // Leading term against the exact value I_0.8(20, 10) = 0.950736482695787499.
    let exact = 0.950_736_482_695_787_499;
    assert!((t.leading - exact).abs() < 0.05, "{} vs {exact}", t.leading);
}

#[test]
fn rate_examples() {
    assert!(chi2_rate(1e-8, 1.0, TailBranch::Upper).unwrap().abs() < 1e-15);
    assert_relative_eq!(chi2_rate(2.146_193_220_620_582_585, 1.0, TailBranch::Upper).unwrap(), -0.5, epsilon = 1e-14);
    let rho: f64 = 0.25;
    let h = -(rho * rho.ln() + (1.0 - rho) * (1.0 - rho).ln());
    assert_relative_eq!(f_rate(1.0, rho).unwrap(), -0.5 * (2.0f64.ln() - h), epsilon = 1e-15);
    let boundary = rho / (1.0 - rho) * (1.0 + 1e-12);
    assert!(f_rate(boundary, rho).unwrap().abs() < 1e-12);
    assert_relative_eq!(binom_entropy_limit(1.0, 0.5).unwrap(), std::f64::consts::LN_2, epsilon = 1e-16);
    assert!(binom_entropy_limit(0.5, 1e-12).unwrap() < 1e-9);
}
