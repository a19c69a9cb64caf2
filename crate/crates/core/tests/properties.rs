use fadekit::approx::ExpSumApprox;
use fadekit::fading::{map_special_case, FadingParams, MrcChannel, SpecialCase};
use fadekit::metrics::{aber_closed_form, aber_hypergeometric, Modulation, ModulationSpec};
use fadekit::noise::NoiseModel;
use fadekit::specfun::{kummer_1f1, lower_gamma_reg, upper_gamma_reg};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = FadingParams> {
    (0.0..8.0f64, 0.3..4.0f64, 0.3..12.0f64, 0.1..500.0f64)
        .prop_map(|(k, mu, m, snr)| FadingParams::new(k, mu, m, snr).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn mgf_is_multiplicative_in_branches(p in params(), l in 1u32..6, t in -50.0..0.9f64) {
        let one = MrcChannel::new(p, 1).unwrap();
        let many = MrcChannel::new(p, l).unwrap();
        let s = t * one.pole();
        let a = many.ln_mgf(s).unwrap();
        let b = l as f64 * one.ln_mgf(s).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300));
    }

    #[test]
    fn cdf_is_a_distribution_function(p in params(), l in 1u32..4, xs in prop::collection::vec(0.0..6.0f64, 2..6)) {
        let ch = MrcChannel::new(p, l).unwrap();
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let mut prev = 0.0;
        for x in xs {
            let v = ch.cdf(x * ch.mean()).unwrap();
            prop_assert!((0.0..=1.0).contains(&v));
            prop_assert!(v >= prev - 1e-10);
            prev = v;
        }
    }

    #[test]
    fn both_closed_forms_agree(p in params(), l in 1u32..4, a_idx in 0usize..5, m in 1u32..7) {
        let shapes = [0.5, 1.0, 1.5, 2.0, 2.5];
        let ch = MrcChannel::new(p, l).unwrap();
        let q = ExpSumApprox::preset_unit_variance(shapes[a_idx]).unwrap();
        let md = ModulationSpec::new(Modulation::Psk(1 << m)).unwrap();
        let x = aber_closed_form(&md, &q, &ch).unwrap().value;
        let y = aber_hypergeometric(&md, &q, &ch).unwrap();
        prop_assert!(((x - y) / x).abs() < 1e-12, "{} vs {}", x, y);
    }

    #[test]
    fn kummer_transformation(a in 0.1..8.0f64, b in 0.2..8.0f64, z in 0.0..30.0f64) {
        let lhs = kummer_1f1(a, b, -z).unwrap();
        let rhs = (-z).exp() * kummer_1f1(b - a, b, z).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * lhs.abs().max(rhs.abs()).max(1e-300) + 1e-14);
    }

    #[test]
    fn incomplete_gamma_complements(s in 0.05..50.0f64, x in 0.0..100.0f64) {
        let sum = lower_gamma_reg(s, x).unwrap() + upper_gamma_reg(s, x).unwrap();
        prop_assert!((sum - 1.0).abs() < 1e-13);
    }

    #[test]
    fn q_function_symmetry_and_range(a in 0.3..5.0f64, x in -8.0..8.0f64) {
        let n = NoiseModel::new(a).unwrap();
        let q = n.q(x);
        prop_assert!((0.0..=1.0).contains(&q));
        prop_assert!((q + n.q(-x) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn special_cases_map_to_valid_channels(eta in 0.01..1.0f64, mu in 0.2..5.0f64, k in 0.0..20.0f64, snr in 0.01..1e3f64) {
        for sc in [
            SpecialCase::EtaMu { eta, mu },
            SpecialCase::Hoyt { q: eta },
            SpecialCase::KappaMu { kappa: k, mu },
            SpecialCase::Rician { k },
            SpecialCase::RicianShadowed { k, m: mu },
            SpecialCase::NakagamiM { m: mu },
        ] {
            let p = map_special_case(sc, snr).unwrap().params;
            let ch = MrcChannel::new(p, 2).unwrap();
            prop_assert!(ch.pdf(ch.mean()).unwrap().is_finite());
        }
    }
}
