//! Release gate. Each test checks one shipping criterion and prints a
//! single verdict line; run the target with `--nocapture --test-threads=1`
//! for the readable report. Criteria that need the bundled reference
//! datasets skip with a notice when the files are absent (see
//! data/README.md for how to supply them).

mod common;

use std::path::{Path, PathBuf};
use std::time::Instant;

use plsurv::{
    apply_censoring, calibrate_ymax, censoring_rate, estimate_changepoints, km_fit, mc_study,
    mle_closed_form, mle_cure, mle_fit, saleh_model, sample, sample_cure, welch_test, FitOptions,
    GroupedTimes, LongTermModel, McConfig, PiecewisePowerLaw, SearchOptions, SurvivalSample,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(id: usize, name: &str, pass: bool, details: &str) -> bool {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {id:2} [{tag}] {name}: {details}");
    pass
}

fn skip(id: usize, name: &str, reason: &str) {
    println!("criterion {id:2} [SKIP] {name}: {reason}");
}

fn no_cure() -> FitOptions {
    FitOptions { cure: false, ..FitOptions::default() }
}

fn half_year_grid() -> Vec<f64> {
    (2..=60).map(|i| i as f64 * 0.5).collect()
}

#[test]
fn criterion_01_distribution_correctness() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let probs = [1e-4, 1e-3, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999, 0.9999];
    let mut worst_mass = 0.0f64;
    let mut worst_round = 0.0f64;
    let mut worst_moment = 0.0f64;
    let mut moment_checks = 0usize;
    for _ in 0..100 {
        let model = common::random_model(&mut rng);
        worst_mass = worst_mass.max(common::normalization_gap(&model, 8000));
        for &p in &probs {
            let x = model.quantile(p).unwrap();
            worst_round = worst_round.max((model.survival(x).unwrap() - (1.0 - p)).abs());
        }
        // Quadrature truncated at the far quantile only captures a moment
        // when the tail exponent leaves margin over the order.
        let tail_alpha = *model.alphas().last().unwrap();
        let hi = model.quantile(1.0 - 1e-13).unwrap();
        for r in [1u32, 2] {
            if tail_alpha <= 1.0 + 2.5 * r as f64 {
                continue;
            }
            let closed = model.moment(r).unwrap();
            let numeric = common::integrate_moment(&model, r, model.x_min(), hi, 12000);
            worst_moment = worst_moment.max((closed - numeric).abs() / closed);
            moment_checks += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst_mass < 1e-8 && worst_round < 1e-10 && worst_moment < 1e-6 && secs < 30.0;
    let details = format!(
        "100 models: pdf mass gap {worst_mass:.1e} (< 1e-8), quantile round trip {worst_round:.1e} \
         (< 1e-10), moment vs quadrature {worst_moment:.1e} rel over {moment_checks} checks \
         (< 1e-6), {secs:.1}s (< 30s)"
    );
    assert!(verdict(1, "distribution correctness", pass, &details), "{details}");
}

#[test]
fn criterion_02_estimator_formulas() {
    let samples = vec![
        SurvivalSample::event(2.0).unwrap(),
        SurvivalSample::censored(5.0).unwrap(),
        SurvivalSample::event(20.0).unwrap(),
        SurvivalSample::censored(50.0).unwrap(),
    ];
    let ln10 = 10.0f64.ln();
    let want = [1.0 + 1.0 / (3.0 * ln10), 1.0 + 1.0 / ln10];
    let (a1, a2, _) = mle_closed_form(&samples, 1.0, 10.0).unwrap();
    let closed_gap = (a1 - want[0]).abs().max((a2 - want[1]).abs());
    let fit = mle_fit(&samples, 1.0, &[10.0], &no_cure()).unwrap();
    let num = fit.model.base().alphas();
    let numeric_gap = (num[0] - want[0]).abs().max((num[1] - want[1]).abs());
    let pass = closed_gap < 1e-12 && numeric_gap < 1e-6;
    let details = format!(
        "four-point example: closed form off by {closed_gap:.1e} (< 1e-12), \
         numerical maximizer off by {numeric_gap:.1e} (< 1e-6)"
    );
    assert!(verdict(2, "closed-form and numerical estimators", pass, &details), "{details}");
}

#[test]
fn criterion_03_small_sample_bias_and_coverage() {
    let start = Instant::now();
    let config = McConfig {
        x_min: 0.5,
        breaks: vec![13.0],
        alphas: vec![1.3, 6.0],
        pi: None,
        n: vec![20, 60, 100, 140, 180, 220, 260, 300],
        replications: 2000,
        censoring: 0.37,
        seed: 1234,
        level: 0.95,
    };
    let report = mc_study(&config).unwrap();
    let cell = |p: &str, n: usize| {
        report
            .cells
            .iter()
            .find(|c| c.parameter == p && c.n == n)
            .unwrap_or_else(|| panic!("missing cell {p}/{n}"))
    };
    let bias1 = cell("alpha_1", 300).bias.abs();
    let bias2 = cell("alpha_2", 300).bias.abs();
    let cov1 = cell("alpha_1", 300).coverage;
    let cov2 = cell("alpha_2", 300).coverage;
    let mut monotone = true;
    for p in ["alpha_1", "alpha_2"] {
        let rows: Vec<_> = config.n.iter().map(|&n| cell(p, n)).collect();
        for w in rows.windows(2) {
            let slack = 3.0 * (w[0].rmse_mc_se.powi(2) + w[1].rmse_mc_se.powi(2)).sqrt();
            if w[1].rmse > w[0].rmse + slack {
                monotone = false;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let band = 0.93..=0.97;
    let pass = bias1 < 0.02
        && bias2 < 0.5
        && band.contains(&cov1)
        && band.contains(&cov2)
        && monotone
        && secs < 120.0;
    let details = format!(
        "2000 replications over n = 20..300: |bias| at n=300 {bias1:.4}/{bias2:.3} \
         (< 0.02 / < 0.5), coverage {cov1:.3}/{cov2:.3} (in [0.93, 0.97]), \
         rmse non-increasing: {monotone}, {secs:.1}s (< 120s)"
    );
    assert!(verdict(3, "small-sample bias, rmse, and coverage", pass, &details), "{details}");
}

#[test]
fn criterion_04_change_point_recovery() {
    let start = Instant::now();
    let truth = PiecewisePowerLaw::new(0.5, vec![13.0], vec![1.3, 6.0]).unwrap();
    let y_max = calibrate_ymax(&truth, 0.37).unwrap();
    let grid = half_year_grid();
    let options = SearchOptions { fit: no_cure(), refine: false };
    let mut hits = 0usize;
    for rep in 0..100u64 {
        let times = sample(&truth, 1000, 40_000 + rep).unwrap();
        let samples = apply_censoring(&times, y_max, 41_000 + rep).unwrap();
        if let Ok(fit) = estimate_changepoints(&samples, 0.5, 2, &grid, &options) {
            if (12.0..=14.0).contains(&fit.model.base().breaks()[0]) {
                hits += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = hits >= 80 && secs < 120.0;
    let details = format!(
        "break within [12, 14] in {hits}/100 replications (need >= 80), n=1000, \
         grid 1..30 step 0.5, {secs:.1}s (< 120s)"
    );
    assert!(verdict(4, "change-point recovery", pass, &details), "{details}");
}

#[test]
fn criterion_05_aic_model_selection() {
    let truth = PiecewisePowerLaw::new(0.5, vec![13.0], vec![1.3, 6.0]).unwrap();
    let y_max = calibrate_ymax(&truth, 0.37).unwrap();
    let options = no_cure();
    let mut preferred = 0usize;
    for rep in 0..200u64 {
        let times = sample(&truth, 500, 50_000 + rep).unwrap();
        let samples = apply_censoring(&times, y_max, 51_000 + rep).unwrap();
        let two = mle_fit(&samples, 0.5, &[13.0], &options);
        let one = mle_fit(&samples, 0.5, &[], &options);
        if let (Ok(two), Ok(one)) = (two, one) {
            if two.aic < one.aic {
                preferred += 1;
            }
        }
    }
    let pass = preferred >= 180;
    let details = format!(
        "two segments preferred in {preferred}/200 replications (need >= 180), n=500, \
         fixed break, 2 vs 1 parameters"
    );
    assert!(verdict(5, "AIC model selection", pass, &details), "{details}");
}

#[test]
fn criterion_06_cure_model_recovery() {
    let base = PiecewisePowerLaw::new(0.5, vec![13.0], vec![1.4, 6.0]).unwrap();
    let truth = LongTermModel::new(0.25, base).unwrap();
    // An observation horizon of 15 censors about 35% of draws: the cured
    // quarter plus susceptibles outliving the horizon.
    let mut hits = 0usize;
    let mut no_interval = 0usize;
    for rep in 0..100u64 {
        let samples = sample_cure(&truth, 2000, 15.0, 60_000 + rep).unwrap();
        let Ok(fit) = mle_cure(&samples, 0.5, &[13.0], None) else {
            continue;
        };
        let Some(pi_se) = fit.pi_std_error else {
            no_interval += 1;
            continue;
        };
        let alphas = fit.model.base().alphas();
        if (alphas[0] - 1.4).abs() < 3.0 * fit.std_errors[0]
            && (alphas[1] - 6.0).abs() < 3.0 * fit.std_errors[1]
            && (fit.model.pi() - 0.25).abs() < 3.0 * pi_se
        {
            hits += 1;
        }
    }
    let pass = hits >= 90;
    let details = format!(
        "all of alpha_1, alpha_2, pi within 3 reported SEs in {hits}/100 replications \
         (need >= 90; {no_interval} without a pi interval), n=2000"
    );
    assert!(verdict(6, "cure-model recovery", pass, &details), "{details}");
}

fn fixture(name: &str) -> Option<PathBuf> {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name);
    p.exists().then_some(p)
}

fn column(header: &[&str], name: &str) -> Option<usize> {
    header.iter().position(|h| h.trim().eq_ignore_ascii_case(name))
}

fn read_dataset(path: &Path) -> Vec<SurvivalSample> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().expect("header row").split(',').collect();
    let t = column(&header, "time_years").expect("time_years column");
    let e = column(&header, "event").expect("event column");
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let fields: Vec<&str> = l.split(',').collect();
            let time: f64 = fields[t].trim().parse().expect("numeric time_years");
            let event = match fields[e].trim() {
                "1" => true,
                "0" => false,
                v => panic!("event flag must be 0 or 1, got {v}"),
            };
            SurvivalSample::new(time, event).unwrap()
        })
        .collect()
}

#[test]
fn criterion_07_reference_dataset_fits() {
    let name = "reference dataset fits";
    let (Some(p69), Some(p175)) = (fixture("emperors_69.csv"), fixture("emperors_175.csv"))
    else {
        skip(7, name, "data/emperors_69.csv and data/emperors_175.csv are not bundled");
        return;
    };
    let west = read_dataset(&p69);
    let all = read_dataset(&p175);

    let fit = mle_cure(&west, 0.5, &[13.0], None).unwrap();
    let a = fit.model.base().alphas();
    let west_ok = west.len() == 69
        && (a[0] - 1.41).abs() <= 0.05
        && (a[1] - 5.12).abs() <= 0.5
        && (fit.model.pi() - 0.22).abs() <= 0.05;

    let rate = censoring_rate(&all).unwrap();
    let grid = half_year_grid();
    let search = SearchOptions::default();
    let k5 = estimate_changepoints(&all, 0.5, 5, &grid, &search).unwrap();
    let k4 = estimate_changepoints(&all, 0.5, 4, &grid, &search).unwrap();
    let all_ok =
        (rate - 0.566).abs() < 0.005 && (k5.model.pi() - 0.404).abs() <= 0.05 && k5.aic < k4.aic;

    let pass = west_ok && all_ok;
    let details = format!(
        "69-record fit alpha {:.3}/{:.3} pi {:.3}; 175-record censoring {rate:.3}, \
         five-segment pi {:.3}, AIC {:.2} vs four-segment {:.2} (searched breaks counted \
         as parameters)",
        a[0],
        a[1],
        fit.model.pi(),
        k5.model.pi(),
        k5.aic,
        k4.aic
    );
    assert!(verdict(7, name, pass, &details), "{details}");
}

#[test]
fn criterion_08_baseline_contrast() {
    let s_mixture = saleh_model().survival(40.0).unwrap();
    // Two-segment cure fit of the western series (x_min 0.5, change point
    // 13, exponents 1.382 and 8.5, cure fraction 0.248): its survival
    // plateaus at the cure fraction instead of decaying to zero.
    let cure = LongTermModel::new(
        0.248,
        PiecewisePowerLaw::new(0.5, vec![13.0], vec![1.382, 8.5]).unwrap(),
    )
    .unwrap();
    let s_cure = cure.survival_pop(40.0).unwrap();
    let pass = s_mixture < 0.05 && s_cure > 0.2;
    let details = format!(
        "mixture-Weibull S(40) = {s_mixture:.4} (required < 0.05), \
         cure-model S(40) = {s_cure:.4} (required > 0.2)"
    );
    assert!(verdict(8, "baseline contrast at 40 years", pass, &details), "{details}");
}

#[test]
fn criterion_09_product_limit_exactness() {
    let to = |rows: &[(f64, bool)]| -> Vec<SurvivalSample> {
        rows.iter().map(|&(t, e)| SurvivalSample::new(t, e).unwrap()).collect()
    };
    // Three events at 1 < 2 < 3.
    let ka = km_fit(&to(&[(1.0, true), (2.0, true), (3.0, true)])).unwrap();
    let mut pass =
        ka.times == vec![1.0, 2.0, 3.0] && ka.survival == vec![2.0 / 3.0, 1.0 / 3.0, 0.0];
    // Event, censored, event: the censoring shrinks the last risk set.
    let kb = km_fit(&to(&[(1.0, true), (2.0, false), (3.0, true)])).unwrap();
    pass &= kb.times == vec![1.0, 3.0] && kb.survival == vec![2.0 / 3.0, 0.0];
    // Death and censoring tied at 2; deaths leave the risk set first.
    let kc = km_fit(&to(&[(2.0, true), (2.0, false)])).unwrap();
    pass &= kc.times == vec![2.0] && kc.survival == vec![0.5] && kc.at_risk == vec![2];

    // Without censoring the product-limit estimate equals the empirical
    // survival fraction bit for bit.
    let m = PiecewisePowerLaw::new(0.5, vec![13.0], vec![1.3, 6.0]).unwrap();
    let mut times = sample(&m, 250, 33).unwrap();
    let samples: Vec<SurvivalSample> =
        times.iter().map(|&t| SurvivalSample::event(t).unwrap()).collect();
    let km = km_fit(&samples).unwrap();
    times.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let n = times.len();
    let exact = times
        .iter()
        .enumerate()
        .all(|(i, &t)| km.eval(t) == (n - (i + 1)) as f64 / n as f64);
    pass &= exact;
    let details = format!("hand-computed step tables exact, uncensored curve empirical: {exact}");
    assert!(verdict(9, "product-limit exactness", pass, &details), "{details}");
}

fn read_attribute_rows(path: &Path) -> Option<Vec<(f64, String, String)>> {
    let text = std::fs::read_to_string(path).ok()?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next()?.split(',').collect();
    let t = column(&header, "time_years")?;
    let acc = column(&header, "accession")?;
    let era = column(&header, "era")?;
    let mut rows = Vec::new();
    for l in lines.filter(|l| !l.trim().is_empty()) {
        let fields: Vec<&str> = l.split(',').collect();
        rows.push((
            fields[t].trim().parse().ok()?,
            fields[acc].trim().to_ascii_lowercase(),
            fields[era].trim().to_ascii_lowercase(),
        ));
    }
    Some(rows)
}

#[test]
fn criterion_10_attribute_comparisons() {
    // Null calibration runs unconditionally: two groups drawn from the
    // same distribution should reject near the nominal rate.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let sims = 500;
    let mut rejections = 0usize;
    for _ in 0..sims {
        let a: Vec<f64> = (0..50).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..50).map(|_| rng.random::<f64>()).collect();
        let g = GroupedTimes::new("a", a, "b", b).unwrap();
        if welch_test(&g).unwrap().p < 0.05 {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / sims as f64;
    let mut pass = (rate - 0.05).abs() <= 0.03;
    let mut details = format!("null rejection rate {rate:.3} (want 0.05 +/- 0.03)");

    match fixture("emperors_175.csv").and_then(|p| read_attribute_rows(&p)) {
        Some(rows) => {
            let (birthright, other): (Vec<_>, Vec<_>) =
                rows.iter().partition(|r| r.1 == "birthright");
            let g = GroupedTimes::new(
                "birthright",
                birthright.iter().map(|r| r.0).collect(),
                "other",
                other.iter().map(|r| r.0).collect(),
            )
            .unwrap();
            let p = welch_test(&g).unwrap().p;
            let mean = |era: &str| {
                let v: Vec<f64> =
                    rows.iter().filter(|r| r.2 == era).map(|r| r.0).collect();
                v.iter().sum::<f64>() / v.len() as f64
            };
            let (dominate, principate) = (mean("dominate"), mean("principate"));
            pass &= p < 1e-3 && (dominate - 11.0).abs() < 1.0 && (principate - 7.0).abs() < 1.0;
            details.push_str(&format!(
                "; accession p = {p:.2e} (< 1e-3), era means {dominate:.1}/{principate:.1} \
                 (near 11/7)"
            ));
        }
        None => details.push_str("; group contrasts SKIP: attribute columns not bundled"),
    }
    assert!(verdict(10, "attribute comparisons", pass, &details), "{details}");
}
