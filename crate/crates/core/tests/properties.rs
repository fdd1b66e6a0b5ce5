use proptest::prelude::*;

use gamma_moments::diagnostics::{carleman, classify, prop5_equivalence, FamilyInput, Verdict};
use gamma_moments::idlab::{default_kp16_grid, hankel_psd, kp16_check, levy_identity_check_tol, LevyIdentity};
use gamma_moments::momentseq::{
    beta_power, explicit_log, factorial_power, gamma_order1, growth_profile, product, GammaRatioSpec,
    LogMomentSequence,
};
use gamma_moments::specfun::gamma::ln_gamma;
use gamma_moments::specfun::hypergeometric::gauss_2f1_ext;

fn geometric(c: f64, n: u64) -> LogMomentSequence {
    explicit_log((0..=n).map(|k| k as f64 * c.ln()).collect()).unwrap()
}

fn rank(v: Verdict) -> u8 {
    match v {
        Verdict::Md => 0,
        Verdict::Inconclusive => 1,
        Verdict::Mi => 2,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hankel_rescaling(a in 0.2f64..3.0, b in 0.2f64..3.0, s in 0.2f64..1.5, big in any::<bool>()) {
        let c = if big { 1e3 } else { 1e-3 };
        let seq = beta_power(a, b, s).unwrap();
        for shift in [0u8, 1] {
            let plain = hankel_psd(&seq, 6, shift, 1e-9).unwrap();
            let scaled = hankel_psd(&product(&seq, &geometric(c, 20)), 6, shift, 1e-9).unwrap();
            prop_assert_eq!(plain.psd, scaled.psd);
        }
    }

    #[test]
    fn classify_monotone_in_t(t1 in 0.5f64..4.0, dt in 0.0f64..2.0) {
        let t2 = t1 + dt;
        let v1 = classify(&FamilyInput::Factorial { t: t1 }).unwrap().verdict;
        let v2 = classify(&FamilyInput::Factorial { t: t2 }).unwrap().verdict;
        prop_assert!(rank(v1) <= rank(v2), "t {} -> {:?}, t {} -> {:?}", t1, v1, t2, v2);

        let g1 = classify(&FamilyInput::Gamma1 { a: 1.0, s: 1.0, t: t1 }).unwrap().verdict;
        let g2 = classify(&FamilyInput::Gamma1 { a: 1.0, s: 1.0, t: t2 }).unwrap().verdict;
        prop_assert!(rank(g1) <= rank(g2));
    }

    #[test]
    fn carleman_rescaling(t in 0.3f64..4.0, up in any::<bool>()) {
        let c = if up { 10.0 } else { 0.1 };
        let seq = factorial_power(t).unwrap();
        let plain = carleman(&seq, 256).unwrap();
        let scaled = carleman(&product(&seq, &geometric(c, 300)), 256).unwrap();
        prop_assert_eq!(plain.satisfied, scaled.satisfied);
        prop_assert_eq!(plain.numbers["series_class"], scaled.numbers["series_class"]);
    }

    #[test]
    fn kp16_beta_pairs(a in 0.1f64..5.0, b in 0.1f64..5.0) {
        // Beta(a, b) moments Γ(a+n)Γ(a+b)/(Γ(a)Γ(a+b+n)) are ID on [0, 1]
        let spec = GammaRatioSpec::new(vec![(a, 1.0)], vec![(a + b, 1.0)]).unwrap();
        let report = kp16_check(&spec, &default_kp16_grid()).unwrap();
        prop_assert!(report.verdict);
        prop_assert!((report.support_sup - 1.0).abs() < 1e-12);
    }

    #[test]
    fn levy_residual_tightens(s in -0.9f64..8.0) {
        let loose = levy_identity_check_tol(&LevyIdentity::MalmstenGamma, s, 1e-6).unwrap();
        let tight = levy_identity_check_tol(&LevyIdentity::MalmstenGamma, s, 1e-12).unwrap();
        prop_assert!(tight <= loose.max(1e-13), "loose {:e}, tight {:e}", loose, tight);
        prop_assert!(tight <= 1e-9);
    }

    #[test]
    fn prop5_classes_agree(t in 0.5f64..3.0, a in 0.5f64..3.0, s in 0.3f64..2.0) {
        let seq = gamma_order1(a, s).unwrap();
        let ev = prop5_equivalence(&seq, t, 256).unwrap();
        // classes are coded 1, 0, -1; opposite signs would be a contradiction
        prop_assert!(ev.numbers["class_direct"] * ev.numbers["class_subsampled"] >= 0.0);
        // log μ_n^t grows like s t n log n; near s t = 2 finite fits may abstain
        if (s * t - 2.0).abs() > 0.15 {
            prop_assert!(ev.satisfied, "{}", ev.note);
        }
    }

    #[test]
    fn gamma_recurrence(x in 0.01f64..150.0) {
        let lhs = ln_gamma(x + 1.0);
        let rhs = ln_gamma(x) + x.ln();
        prop_assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1.0));
    }

    #[test]
    fn euler_transformation(a in -2.0f64..3.0, b in -2.0f64..3.0, c in 0.3f64..4.0, z in 0.0f64..0.95) {
        let direct = gauss_2f1_ext(a, b, c, z).unwrap();
        let euler = (1.0 - z).powf(c - a - b) * gauss_2f1_ext(c - a, c - b, c, z).unwrap();
        prop_assert!((direct - euler).abs() <= 1e-10 * direct.abs().max(1.0), "{} vs {}", direct, euler);
    }

    #[test]
    fn factorial_growth(t in 0.5f64..4.0) {
        let g = growth_profile(&factorial_power(t).unwrap(), 256).unwrap();
        prop_assert!(g.is_stable());
        prop_assert!((g.g() - t).abs() <= 0.02);
    }
}
