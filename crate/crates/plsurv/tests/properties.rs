//! Property-based invariants for the distribution layer and its
//! neighbors, checked against independent oracles (composite Simpson
//! quadrature, direct power-function arithmetic) rather than against the
//! crate's own internals.

mod common;

use common::{normalization_gap, simpson};
use plsurv::{
    km_fit, loglik, welch_test, GroupedTimes, LongTermModel, MixtureWeibull, PiecewisePowerLaw,
    SurvivalSample, WeibullComponent,
};
use proptest::prelude::*;

fn model_strategy() -> impl Strategy<Value = PiecewisePowerLaw> {
    (1usize..=4).prop_flat_map(|k| {
        (
            0.2f64..10.0,
            prop::collection::vec(1.3f64..8.0, k - 1),
            prop::collection::vec(1.1f64..9.0, k),
        )
            .prop_map(|(x_min, ratios, alphas)| {
                let mut breaks = Vec::with_capacity(ratios.len());
                let mut edge = x_min;
                for r in ratios {
                    edge *= r;
                    breaks.push(edge);
                }
                PiecewisePowerLaw::new(x_min, breaks, alphas).expect("valid by construction")
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn survival_quantile_round_trip(model in model_strategy(), u in 0.0005f64..0.9995) {
        let x = model.quantile(u).unwrap();
        let back = 1.0 - model.survival(x).unwrap();
        prop_assert!((back - u).abs() < 1e-10, "u {u} came back as {back}");
    }

    #[test]
    fn survival_is_continuous_at_breaks(model in model_strategy()) {
        for &b in model.breaks() {
            let just_left = b * (1.0 - 1e-13);
            let s_left = model.survival(just_left).unwrap();
            let s_at = model.survival(b).unwrap();
            prop_assert!(
                (s_left - s_at).abs() <= 1e-11 * s_at.max(1e-300),
                "survival jumps at break {b}: {s_left} vs {s_at}"
            );
        }
    }

    #[test]
    fn hazard_is_pdf_over_survival(model in model_strategy(), t in 0.01f64..0.99) {
        // Probe a quantile so every segment gets exercised across cases.
        let x = model.quantile(t).unwrap();
        let direct = model.pdf(x).unwrap() / model.survival(x).unwrap();
        let h = model.hazard(x).unwrap();
        prop_assert!(
            (h - direct).abs() <= 1e-10 * direct.max(1e-300),
            "hazard {h} vs pdf/survival {direct} at {x}"
        );
    }

    #[test]
    fn equal_exponents_collapse_to_one_segment(
        x_min in 0.3f64..5.0,
        ratio in 1.5f64..6.0,
        alpha in 1.2f64..8.0,
        t in 0.01f64..0.99,
    ) {
        let two = PiecewisePowerLaw::new(x_min, vec![x_min * ratio], vec![alpha, alpha]).unwrap();
        let one = PiecewisePowerLaw::new(x_min, vec![], vec![alpha]).unwrap();
        let x = one.quantile(t).unwrap();
        let (s2, s1) = (two.survival(x).unwrap(), one.survival(x).unwrap());
        prop_assert!((s2 - s1).abs() <= 1e-12 * s1.max(1e-300));
        let (f2, f1) = (two.pdf(x).unwrap(), one.pdf(x).unwrap());
        prop_assert!((f2 - f1).abs() <= 1e-12 * f1.max(1e-300));
    }

    #[test]
    fn high_order_moments_diverge(model in model_strategy()) {
        // Generated tail exponents stay at or below 9, so order 8 always
        // sits at or past the finiteness boundary r < alpha_k - 1.
        prop_assert!(model.moment(8).is_err());
    }

    #[test]
    fn cure_survival_decomposes(model in model_strategy(), pi in 0.0f64..0.95, t in 0.01f64..0.99) {
        let cure = LongTermModel::new(pi, model.clone()).unwrap();
        let x = model.quantile(t).unwrap();
        let direct = pi + (1.0 - pi) * model.survival(x).unwrap();
        let s = cure.survival_pop(x).unwrap();
        prop_assert!((s - direct).abs() < 1e-12);
        let f_direct = (1.0 - pi) * model.pdf(x).unwrap();
        let f = cure.pdf_pop(x).unwrap();
        prop_assert!((f - f_direct).abs() <= 1e-12 * f_direct.max(1e-300));
    }

    #[test]
    fn km_is_invariant_under_input_order(
        mut raw in prop::collection::vec((0.1f64..100.0, prop::bool::ANY), 3..40)
    ) {
        let forward: Vec<SurvivalSample> = raw
            .iter()
            .map(|&(time, event)| SurvivalSample { time, event })
            .collect();
        let a = km_fit(&forward).unwrap();
        raw.reverse();
        let third = raw.len() / 3;
        raw.rotate_left(third);
        let shuffled: Vec<SurvivalSample> = raw
            .iter()
            .map(|&(time, event)| SurvivalSample { time, event })
            .collect();
        let b = km_fit(&shuffled).unwrap();
        prop_assert_eq!(a.times, b.times);
        prop_assert_eq!(a.survival, b.survival);
        prop_assert_eq!(a.variance, b.variance);
    }

    #[test]
    fn uncensored_km_equals_empirical_survival(
        times in prop::collection::vec(0.1f64..100.0, 2..50)
    ) {
        let samples: Vec<SurvivalSample> = times
            .iter()
            .map(|&t| SurvivalSample { time: t, event: true })
            .collect();
        let km = km_fit(&samples).unwrap();
        let n = times.len() as f64;
        for (i, &t) in km.times.iter().enumerate() {
            let exceed = times.iter().filter(|&&x| x > t).count() as f64;
            // Exact equality, not approximate: both sides are the same
            // integer ratio.
            prop_assert_eq!(km.survival[i], exceed / n);
        }
    }

    #[test]
    fn loglik_matches_direct_power_arithmetic(
        model in model_strategy(),
        pi in 0.0f64..0.9,
        picks in prop::collection::vec((0.01f64..0.99, prop::bool::ANY), 1..25),
    ) {
        // Reference evaluation from first principles: continuity constants
        // by plain products, densities by powf, no log-space tricks.
        let k = model.alphas().len();
        let mut constants = vec![1.0f64];
        for j in 1..k {
            let lower = if j == 1 { model.x_min() } else { model.breaks()[j - 2] };
            let c = constants[j - 1]
                * (model.breaks()[j - 1] / lower).powf(1.0 - model.alphas()[j - 1]);
            constants.push(c);
        }
        let seg = |x: f64| model.breaks().iter().filter(|&&b| b <= x).count();
        let surv0 = |x: f64| {
            let i = seg(x);
            let lower = if i == 0 { model.x_min() } else { model.breaks()[i - 1] };
            constants[i] * (x / lower).powf(1.0 - model.alphas()[i])
        };
        let dens0 = |x: f64| {
            let i = seg(x);
            let lower = if i == 0 { model.x_min() } else { model.breaks()[i - 1] };
            constants[i] * (model.alphas()[i] - 1.0) / lower
                * (x / lower).powf(-model.alphas()[i])
        };

        let samples: Vec<SurvivalSample> = picks
            .iter()
            .map(|&(u, event)| SurvivalSample { time: model.quantile(u).unwrap(), event })
            .collect();
        let mut reference = 0.0;
        for s in &samples {
            reference += if s.event {
                ((1.0 - pi) * dens0(s.time)).ln()
            } else {
                (pi + (1.0 - pi) * surv0(s.time)).ln()
            };
        }
        let cure = LongTermModel::new(pi, model.clone()).unwrap();
        let ll = loglik(&cure, &samples).unwrap();
        prop_assert!(
            (ll - reference).abs() <= 1e-12 * reference.abs().max(1.0),
            "loglik {ll} vs direct {reference}"
        );
    }

    #[test]
    fn welch_symmetry_and_shift_invariance(
        a in prop::collection::vec(0.0f64..50.0, 3..20),
        b in prop::collection::vec(0.0f64..50.0, 3..20),
        shift in -100.0f64..100.0,
    ) {
        let g = GroupedTimes::new("a", a.clone(), "b", b.clone()).unwrap();
        let swapped = GroupedTimes::new("b", b.clone(), "a", a.clone()).unwrap();
        match (welch_test(&g), welch_test(&swapped)) {
            (Ok(w), Ok(ws)) => {
                prop_assert!((w.t + ws.t).abs() < 1e-10);
                prop_assert!((w.p - ws.p).abs() < 1e-12);
                let sa: Vec<f64> = a.iter().map(|x| x + shift).collect();
                let sb: Vec<f64> = b.iter().map(|x| x + shift).collect();
                let shifted = GroupedTimes::new("a", sa, "b", sb).unwrap();
                let wsh = welch_test(&shifted).unwrap();
                prop_assert!((w.p - wsh.p).abs() < 1e-9);
            }
            // Zero-variance draws are legitimately rejected.
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "swap changed the error behavior"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn pdf_mass_reaches_one(model in model_strategy()) {
        prop_assert!(normalization_gap(&model, 8000) < 1e-8);
    }

    #[test]
    fn cure_density_mass_is_one_minus_pi(model in model_strategy(), pi in 0.0f64..0.9) {
        let cure = LongTermModel::new(pi, model.clone()).unwrap();
        let hi = model.quantile(1.0 - 1e-9).unwrap();
        let mut cuts = vec![model.x_min()];
        for &b in model.breaks() {
            if b < hi {
                cuts.push(b);
            }
        }
        cuts.push(hi);
        let mut mass = 0.0;
        for w in cuts.windows(2) {
            let g = |t: f64| {
                let x = t.exp().clamp(w[0], w[1].next_down());
                cure.pdf_pop(x).unwrap() * x
            };
            mass += simpson(&g, w[0].ln(), w[1].ln(), 8000);
        }
        let expected = (1.0 - pi) * (1.0 - model.survival(hi).unwrap());
        prop_assert!((mass - expected).abs() < 1e-7, "mass {mass} vs {expected}");
    }
}

#[test]
fn moments_match_quadrature() {
    // Moment orders are only compared when the tail exponent leaves enough
    // margin for the truncated integral to capture the mass: the integral
    // runs to the (1 - 1e-13) quantile, whose neglected remainder scales
    // like quantile^r * 1e-13 and must stay below the 1e-6 relative budget.
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(20240817);
    let mut checked = [0usize; 2];
    for _ in 0..60 {
        let model = common::random_model(&mut rng);
        let tail_alpha = *model.alphas().last().unwrap();
        let hi = model.quantile(1.0 - 1e-13).unwrap();
        for (slot, r) in [(0usize, 1u32), (1, 2)] {
            let margin_ok = tail_alpha > 1.0 + 2.5 * r as f64;
            if !margin_ok {
                continue;
            }
            let closed = model.moment(r).unwrap();
            let numeric = common::integrate_moment(&model, r, model.x_min(), hi, 12000);
            let rel = (closed - numeric).abs() / closed.abs();
            assert!(
                rel < 1e-6,
                "order {r}: closed {closed} vs quadrature {numeric} (rel {rel:.2e})"
            );
            checked[slot] += 1;
        }
        let _ = rng.random::<f64>();
    }
    assert!(checked[0] >= 10 && checked[1] >= 5, "draws starved the check: {checked:?}");
}

#[test]
fn mixture_weibull_pdf_is_negative_survival_slope() {
    let m = plsurv::saleh_model();
    // Quadrature identity: the pdf integrated over [a, b] recovers the
    // survival drop. Integrate in t = ln x; the shape-below-one component
    // has unbounded pdf derivatives at small x, but f(e^t) e^t is smooth.
    let drop = simpson(
        &|t: f64| {
            let x = t.exp();
            m.pdf(x).unwrap() * x
        },
        0.01f64.ln(),
        200.0f64.ln(),
        40000,
    );
    let expected = m.survival(0.01).unwrap() - m.survival(200.0).unwrap();
    assert!((drop - expected).abs() < 1e-8, "drop {drop} vs {expected}");

    // Central differences at spread-out probes.
    for &x in &[0.5, 2.0, 8.0, 12.0, 14.0, 16.0, 40.0] {
        let h = 1e-6 * x;
        let slope =
            -(m.survival(x + h).unwrap() - m.survival(x - h).unwrap()) / (2.0 * h);
        let f = m.pdf(x).unwrap();
        assert!(
            (f - slope).abs() <= 1e-6 * f.abs().max(1e-12),
            "pdf {f} vs -dS/dx {slope} at {x}"
        );
    }
}

#[test]
fn serde_round_trips_preserve_parameters() {
    let model = PiecewisePowerLaw::new(0.5, vec![13.0], vec![1.382, 8.5]).unwrap();
    let json = serde_json::to_string(&model).unwrap();
    let back: PiecewisePowerLaw = serde_json::from_str(&json).unwrap();
    assert_eq!(model.x_min(), back.x_min());
    assert_eq!(model.breaks(), back.breaks());
    assert_eq!(model.alphas(), back.alphas());
    assert_eq!(model.survival(5.0).unwrap(), back.survival(5.0).unwrap());

    let cure = LongTermModel::new(0.248, model).unwrap();
    let json = serde_json::to_string(&cure).unwrap();
    let back: LongTermModel = serde_json::from_str(&json).unwrap();
    assert_eq!(cure.pi(), back.pi());
    assert_eq!(
        cure.survival_pop(30.0).unwrap(),
        back.survival_pop(30.0).unwrap()
    );

    let mw = MixtureWeibull::new(vec![
        WeibullComponent { weight: 0.3, scale: 2.0, shape: 1.0 },
        WeibullComponent { weight: 0.7, scale: 5.0, shape: 2.0 },
    ])
    .unwrap();
    let json = serde_json::to_string(&mw).unwrap();
    let back: MixtureWeibull = serde_json::from_str(&json).unwrap();
    assert_eq!(mw.survival(3.0).unwrap(), back.survival(3.0).unwrap());
}

#[test]
fn serde_rejects_invalid_payloads() {
    // Deserialization runs the same validation as construction.
    let bad_alpha = r#"{"x_min":1.0,"breaks":[],"alphas":[0.9]}"#;
    assert!(serde_json::from_str::<PiecewisePowerLaw>(bad_alpha).is_err());
    let bad_break = r#"{"x_min":1.0,"breaks":[0.5],"alphas":[2.0,3.0]}"#;
    assert!(serde_json::from_str::<PiecewisePowerLaw>(bad_break).is_err());
    let bad_pi = r#"{"pi":1.0,"base":{"x_min":1.0,"breaks":[],"alphas":[2.0]}}"#;
    assert!(serde_json::from_str::<LongTermModel>(bad_pi).is_err());
    let bad_weights =
        r#"{"components":[{"weight":0.5,"scale":1.0,"shape":1.0}]}"#;
    assert!(serde_json::from_str::<MixtureWeibull>(bad_weights).is_err());
}
