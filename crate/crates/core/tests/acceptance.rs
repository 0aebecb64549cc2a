//! Acceptance criteria. Each test prints one `criterion N ...: PASS|FAIL`
//! line with the measured numbers before asserting.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture` to see
//! the report. The full-scale operating-point check is `#[ignore]`d; run it
//! with `--ignored`.

use lmimo_mbm::analysis::{
    binomial_tail, mutual_information_mc, pairwise_error_closed_form, q_function, qam_constellation,
    random_gaussian_points, ErrorModelParams,
};
use lmimo_mbm::detect::{
    all_permutations, detect_exhaustive, detect_layered, detect_layered_traced, random_permutations, results_agree,
    DetectorConfig,
};
use lmimo_mbm::engine::{
    crossing_db, run_coded_sweep, run_uncoded_sweep, wilson_interval, ConstellationMode, ConstellationSpec,
    CurvePoint, DetectorKind, FecSpec, StoppingRule, SweepSpec,
};
use lmimo_mbm::fec::{GaloisField, RsCode};
use lmimo_mbm::model::{eb_n0_to_n0, transmit_with_rng, ChannelParams, LayeredConstellation, MessageVector};
use lmimo_mbm::rng;
use proptest::prelude::*;
use rand::Rng;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!("criterion {criterion}: {} ({detail})", if pass { "PASS" } else { "FAIL" });
}

/// Adaptive Gauss-Kronrod (7, 15) quadrature on `[a, b]`.
fn gauss_kronrod(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    const XK: [f64; 8] = [
        0.991_455_371_120_812_6,
        0.949_107_912_342_758_5,
        0.864_864_423_359_769_1,
        0.741_531_185_599_394_4,
        0.586_087_235_467_691_1,
        0.405_845_151_377_397_2,
        0.207_784_955_007_898_5,
        0.0,
    ];
    const WK: [f64; 8] = [
        0.022_935_322_010_529_22,
        0.063_092_092_629_978_55,
        0.104_790_010_322_250_2,
        0.140_653_259_715_525_9,
        0.169_004_726_639_267_9,
        0.190_350_578_064_785_4,
        0.204_432_940_075_298_9,
        0.209_482_141_084_727_8,
    ];
    const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kronrod = WK[7] * f(c);
    let mut gauss = WG[3] * f(c);
    for i in 0..7 {
        let fx = f(c - h * XK[i]) + f(c + h * XK[i]);
        kronrod += WK[i] * fx;
        if i % 2 == 1 {
            gauss += WG[i / 2] * fx;
        }
    }
    let (kronrod, gauss) = (kronrod * h, gauss * h);
    if (kronrod - gauss).abs() <= tol || depth == 0 {
        kronrod
    } else {
        gauss_kronrod(f, a, c, tol / 2.0, depth - 1) + gauss_kronrod(f, c, b, tol / 2.0, depth - 1)
    }
}

/// Single-position pairwise error by direct integration over the norm of
/// the point difference (chi density with `2K` degrees of freedom, scale
/// `Es = 1`) against the Gaussian tail.
fn pairwise_by_quadrature(snr: f64, k: usize) -> f64 {
    let n0 = 1.0 / snr;
    let log_fact = libm::lgamma(k as f64);
    let density = move |rho: f64| {
        if rho <= 0.0 {
            return 0.0;
        }
        let u = rho * rho / 2.0;
        rho * ((k as f64 - 1.0) * u.ln() - u - log_fact).exp()
    };
    let integrand = move |rho: f64| density(rho) * q_function(rho / (2.0 * n0).sqrt());
    // Density mass beyond the cut-off is below 1e-30.
    let upper = (2.0 * (k as f64 + 80.0 + 12.0 * (k as f64).sqrt())).sqrt();
    gauss_kronrod(&integrand, 0.0, upper, 1e-14, 40)
}

#[test]
fn criterion_1_closed_form_matches_quadrature() {
    let mut worst: f64 = 0.0;
    for k in [1usize, 2, 4, 8, 16] {
        for snr in [0.1, 1.0, 10.0, 100.0] {
            let single = pairwise_by_quadrature(snr, k);
            for delta in 1..=3u32 {
                let closed = pairwise_error_closed_form(&ErrorModelParams::new(snr, k, delta, 0));
                worst = worst.max((closed - single.powi(delta as i32)).abs());
            }
        }
    }
    let pass = worst <= 1e-8;
    report("1 [closed form vs quadrature]", pass, &format!("max abs error {worst:.3e}, limit 1e-8"));
    assert!(pass);
}

#[test]
fn criterion_2_asymptotic_slope() {
    let mut details = Vec::new();
    let mut pass = true;
    for delta in 1..=3u32 {
        let p = |snr: f64| pairwise_error_closed_form(&ErrorModelParams::new(snr, 1, delta, 0));
        let slope = (p(1e5).log10() - p(1e3).log10()) / 2.0;
        let ok = (slope + delta as f64).abs() <= 0.02 * delta as f64;
        pass &= ok;
        details.push(format!("delta {delta}: slope {slope:.5}"));
    }
    report("2 [asymptotic slope]", pass, &details.join(", "));
    assert!(pass);
}

#[test]
fn criterion_3_layered_matches_exhaustive() {
    let (units, bits, dims) = (2usize, 4u32, 8usize);
    let trials = 10_000u64;
    let cfg = DetectorConfig::standard(units, 2, 16, 0).with_permutations(all_permutations(units));
    assert_eq!(cfg.permutations.len(), 2);
    let params = ChannelParams::new(eb_n0_to_n0(0.0, units, 1.0, units as u32 * bits), 1.0);
    let seed = 3;
    let mut agree = 0u64;
    let mut worse_than_ml = 0u64;
    let mut constellation = None;
    for i in 0..trials {
        if i % 1000 == 0 {
            let s = rng::derive_seed(seed, &[rng::domain::CONSTELLATION, i / 1000]);
            constellation = Some(LayeredConstellation::generate(units, bits, dims, s).unwrap());
        }
        let c = constellation.as_ref().unwrap();
        let mut g = rng::stream(seed, &[rng::domain::TRIAL, i]);
        let m = c.random_message(&mut g);
        let r = transmit_with_rng(&c.point(&m).unwrap(), &params, &mut g);
        let ml = detect_exhaustive(&r, c).unwrap();
        let layered = detect_layered(&r, c, &cfg).unwrap();
        if layered.distance_squared < ml.distance_squared - 1e-9 {
            worse_than_ml += 1;
        }
        agree += results_agree(&layered, &ml) as u64;
    }
    let rate = agree as f64 / trials as f64;
    let pass = worse_than_ml == 0 && rate >= 0.99;
    report(
        "3 [layered vs exhaustive]",
        pass,
        &format!("agreement {rate:.4} over {trials} trials (limit 0.99), {worse_than_ml} results closer than ML"),
    );
    assert!(pass);
}

fn ser_spec(units: usize, bits: u32, grid: Vec<f64>, min_errors: u64, max_trials: u64, seed: u64) -> SweepSpec {
    SweepSpec {
        constellation: ConstellationSpec::new(units, bits, 8),
        detector: DetectorKind::Exhaustive,
        eb_n0_grid: grid,
        stopping: StoppingRule { max_trials, min_errors, max_wall_seconds_per_point: f64::INFINITY },
        mode: ConstellationMode::RedrawPerBatch { batch: 1000 },
        fec: None,
        training: None,
        energy: 1.0,
        seed,
    }
}

fn describe(curve: &[CurvePoint]) -> String {
    curve.iter().map(|p| format!("{}dB:{:.2e}", p.eb_n0_db, p.ser)).collect::<Vec<_>>().join(" ")
}

#[test]
fn criterion_4_layered_vs_single_unit_gap() {
    let grid: Vec<f64> = (0..6).map(|i| -2.0 + 0.5 * i as f64).collect();
    let layered = run_uncoded_sweep(&ser_spec(2, 8, grid.clone(), 50, 150_000, 4)).unwrap();
    let single = run_uncoded_sweep(&ser_spec(1, 16, grid, 50, 150_000, 5)).unwrap();
    let a = crossing_db(&layered, 1e-3, |p| p.ser);
    let b = crossing_db(&single, 1e-3, |p| p.ser);
    let detail = format!("2x8 layered [{}], 1x8 single [{}]", describe(&layered), describe(&single));
    let (pass, summary) = match (a, b) {
        (Some(a), Some(b)) => ((a - b).abs() <= 1.0, format!("SER 1e-3 at {a:.2} dB vs {b:.2} dB, gap {:.2} dB", (a - b).abs())),
        _ => (false, "a curve does not cross 1e-3 on the grid".into()),
    };
    report("4 [layered vs single-unit gap]", pass, &format!("{summary}; {detail}"));
    assert!(pass);
}

fn operating_point(beam: usize, permutations: Vec<Vec<usize>>, db: f64, min_errors: u64, max_trials: u64) -> CurvePoint {
    let cfg = DetectorConfig::standard(4, 2, beam, 0).with_permutations(permutations);
    let spec = SweepSpec {
        constellation: ConstellationSpec::new(4, 8, 16),
        detector: DetectorKind::Layered(cfg),
        eb_n0_grid: vec![db],
        stopping: StoppingRule { max_trials, min_errors, max_wall_seconds_per_point: f64::INFINITY },
        mode: ConstellationMode::RedrawPerBatch { batch: 1000 },
        fec: None,
        training: None,
        energy: 1.0,
        seed: 45,
    };
    run_uncoded_sweep(&spec).unwrap().remove(0)
}

#[test]
fn criterion_5_operating_point_reduced() {
    let p = operating_point(32, random_permutations(4, 6, 7), -4.0, 1_000_000, 20_000);
    let pass = p.ser <= 1e-3;
    report(
        "5 [4x16 operating point, reduced: P=32, 6 orderings, -4.0 dB]",
        pass,
        &format!("SER {:.3e} ({} / {}), 95% CI [{:.2e}, {:.2e}], limit 1e-3", p.ser, p.symbol_errors, p.trials, p.ci95_lo, p.ci95_hi),
    );
    assert!(pass);
}

#[test]
#[ignore = "hours on one core; run with --ignored"]
fn criterion_5_operating_point_full() {
    let p = operating_point(128, all_permutations(4), -4.5, 30, 10_000_000);
    let pass = p.ser >= 1e-4 / 3.0 && p.ser <= 3e-4;
    report(
        "5 [4x16 operating point, full: P=128, 24 orderings, -4.5 dB]",
        pass,
        &format!("SER {:.3e} ({} / {}), target 1e-4 within a factor of 3", p.ser, p.symbol_errors, p.trials),
    );
    assert!(pass);
}

/// Least-squares slope of `log10 y` against `log10 x`.
fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Uncoded symbol error range over which both slopes are fitted.
const SLOPE_WINDOW: (f64, f64) = (0.004, 0.03);

#[test]
fn criterion_6_coded_slope_law() {
    let mut pass = true;
    let mut details = Vec::new();
    for t in [1usize, 2] {
        let spec = SweepSpec {
            constellation: ConstellationSpec::new(1, 4, 4),
            detector: DetectorKind::Exhaustive,
            eb_n0_grid: CODED_GRID.to_vec(),
            stopping: StoppingRule { max_trials: 3_000_000, min_errors: 100, max_wall_seconds_per_point: f64::INFINITY },
            mode: ConstellationMode::FixedSingle,
            fec: Some(FecSpec { field_bits: 4, length: 15, dimension: 15 - 2 * t }),
            training: None,
            energy: 1.0,
            seed: 6,
        };
        let curve = run_coded_sweep(&spec).unwrap();
        let window: Vec<&CurvePoint> =
            curve.iter().filter(|p| p.ser >= SLOPE_WINDOW.0 && p.ser <= SLOPE_WINDOW.1 && p.frame_errors > 0).collect();
        let snr = |p: &CurvePoint| 10f64.powf(p.eb_n0_db / 10.0);
        let fer_slope = log_log_slope(&window.iter().map(|p| (snr(p), p.fer)).collect::<Vec<_>>());
        let ser_slope = log_log_slope(&window.iter().map(|p| (snr(p), p.ser)).collect::<Vec<_>>());
        let ratio = fer_slope / ser_slope;
        let target = (t + 1) as f64;
        let ok = window.len() >= 3 && (ratio - target).abs() <= 0.2 * target;
        // With a fixed constellation, symbol errors are independent across a
        // frame, so the measured FER must also follow the binomial tail.
        let tail_ok = window.iter().all(|p| {
            let predicted = binomial_tail(15, t, p.ser);
            p.fer <= 2.0 * predicted && p.fer >= 0.5 * predicted
        });
        pass &= ok && tail_ok;
        details.push(format!(
            "t={t}: {} points, FER slope {fer_slope:.3}, SER slope {ser_slope:.3}, ratio {ratio:.3} (target {target} +/-20%), binomial tail within 2x: {tail_ok}",
            window.len()
        ));
    }
    report("6 [coded slope law]", pass, &details.join("; "));
    assert!(pass);
}

/// Spans the slope window for both codes with the constellation drawn from seed 6.
const CODED_GRID: [f64; 13] = [-3.0, -2.5, -2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0];

#[test]
fn criterion_7_reed_solomon_roundtrips() {
    let mut failures = 0u64;
    let mut runs = 0u64;
    let mut g = rng::stream(7, &[rng::domain::TRIAL]);
    for (w, n, k) in [(4u32, 15usize, 11usize), (4, 15, 9), (8, 255, 223), (8, 240, 225), (8, 60, 30)] {
        let code = RsCode::new(w, n, k).unwrap();
        let q = 1u32 << w;
        for _ in 0..10_000 / 5 {
            let msg: Vec<u16> = (0..k).map(|_| g.random_range(0..q) as u16).collect();
            let mut word = code.encode(&msg).unwrap();
            let errors = g.random_range(0..=code.t());
            let mut positions: Vec<usize> = (0..n).collect();
            for i in 0..errors {
                let j = g.random_range(i..n);
                positions.swap(i, j);
                word[positions[i]] ^= g.random_range(1..q) as u16;
            }
            let out = code.decode(&word).unwrap();
            runs += 1;
            if out.is_failure() || out.message != msg {
                failures += 1;
            }
        }
    }
    // Reference parity from an independent implementation
    // (primitive polynomial x^4 + x + 1, first root alpha^1).
    let code = RsCode::new(4, 15, 11).unwrap();
    let msg: Vec<u16> = (1..=11).collect();
    let word = code.encode(&msg).unwrap();
    let fixture_ok = word[..11] == msg[..] && word[11..] == [11, 10, 14, 6];
    let field_ok = GaloisField::new(4).unwrap().polynomial() == 0x13;
    let pass = failures == 0 && fixture_ok && field_ok;
    report(
        "7 [Reed-Solomon codec]",
        pass,
        &format!("{failures} failures in {runs} roundtrips with <= t errors, RS(15,11) fixture match: {fixture_ok}"),
    );
    assert!(pass);
}

#[test]
fn criterion_8_capacity_spread() {
    let samples = 4000;
    let seed = 8;
    let qam = qam_constellation(256);
    let qam_mi = |db: f64| mutual_information_mc(&qam, 10f64.powf(db / 10.0), samples * 4, seed).bits;
    // Same noise samples at every SNR, so the estimate is monotone enough
    // for bisection.
    let (mut lo, mut hi) = (10.0, 30.0);
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if qam_mi(mid) < 7.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let snr_db = 0.5 * (lo + hi);
    let slope = (qam_mi(snr_db + 0.5) - qam_mi(snr_db - 0.5)) / 1.0;
    let snr = 10f64.powf(snr_db / 10.0);
    let mut rates: Vec<f64> = (0..100u64)
        .map(|r| {
            let mut g = rng::stream(seed, &[rng::domain::CONSTELLATION, r]);
            let points = random_gaussian_points(&mut g, 256, 1);
            mutual_information_mc(&points, snr, samples, rng::derive_seed(seed, &[rng::domain::CAPACITY, r])).bits
        })
        .collect();
    rates.sort_by(f64::total_cmp);
    let p5 = rates[4];
    let extra_db = (7.0 - p5) / slope;
    let pass = extra_db <= 1.5;
    report(
        "8 [capacity spread]",
        pass,
        &format!(
            "256-QAM reaches 7 bits at {snr_db:.2} dB (slope {slope:.3} bit/dB); random 5th percentile {p5:.3} bits, median {:.3}; extra {extra_db:.2} dB, limit 1.5",
            rates[50]
        ),
    );
    assert!(pass);
}

fn instance(seed: u64, units: usize, bits: u32, dims: usize, n0: f64) -> (LayeredConstellation, MessageVector, lmimo_mbm::ComplexVector) {
    let c = LayeredConstellation::generate(units, bits, dims, seed).unwrap();
    let mut g = rng::stream(seed, &[rng::domain::TRIAL]);
    let m = c.random_message(&mut g);
    let r = transmit_with_rng(&c.point(&m).unwrap(), &ChannelParams::new(n0, 1.0), &mut g);
    (c, m, r)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn criterion_9_monotone_descent(seed in any::<u64>(), units in 2usize..5, bits in 1u32..4, beam in 1usize..6, n0 in 0.01f64..2.0) {
        let (c, _, r) = instance(seed, units, bits, 3, n0);
        let cfg = DetectorConfig::standard(units, 3, beam, seed);
        let (_, trace) = detect_layered_traced(&r, &c, &cfg).unwrap();
        for steps in &trace {
            // From the second pass on every unit has an incumbent, so a step
            // can only keep or improve the best distance.
            for w in steps[units - 1..].windows(2) {
                prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-12, "{:?}", steps);
            }
        }
    }

    #[test]
    fn criterion_9_superposition_linearity(seed in any::<u64>(), units in 1usize..5, bits in 1u32..4) {
        let c = LayeredConstellation::generate(units, bits, 3, seed).unwrap();
        let mut g = rng::stream(seed, &[rng::domain::TRIAL]);
        let a = c.random_message(&mut g);
        let b = c.random_message(&mut g);
        // Changing one unit moves the point by exactly the constituent difference.
        let unit = g.random_range(0..units);
        let mut mixed = a.clone();
        mixed.0[unit] = b.0[unit];
        let delta = &c.point(&mixed).unwrap() - &c.point(&a).unwrap();
        let expected = &c.constituent_vector(unit, b.0[unit] as usize) - &c.constituent_vector(unit, a.0[unit] as usize);
        prop_assert!(delta.distance_squared(&expected) < 1e-24);
    }

    #[test]
    fn criterion_9_field_axioms(w in 2u32..=12, a in any::<u16>(), b in any::<u16>(), c in any::<u16>()) {
        let f = GaloisField::new(w).unwrap();
        let mask = (f.size() - 1) as u16;
        let (a, b, c) = (a & mask, b & mask, c & mask);
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.mul(a, f.mul(b, c)), f.mul(f.mul(a, b), c));
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a)), 1);
        }
    }

    #[test]
    fn criterion_9_wilson_bounds(trials in 1u64..100_000, frac in 0.0f64..=1.0) {
        let errors = ((trials as f64) * frac).floor() as u64;
        let (lo, hi) = wilson_interval(errors, trials);
        let p = errors as f64 / trials as f64;
        prop_assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0);
    }
}

#[test]
fn criterion_9_beam_dominance() {
    // A wider beam is not guaranteed to win on every instance; check that
    // it never loses on average and rarely on single instances.
    let (mut wins, mut losses, mut total) = (0u32, 0u32, 0u32);
    let mut sum_narrow = 0.0;
    let mut sum_wide = 0.0;
    for seed in 0..2000u64 {
        let (c, _, r) = instance(seed, 3, 3, 2, 0.5);
        let narrow = detect_layered(&r, &c, &DetectorConfig::standard(3, 2, 2, seed)).unwrap();
        let wide = detect_layered(&r, &c, &DetectorConfig::standard(3, 2, 8, seed)).unwrap();
        total += 1;
        sum_narrow += narrow.distance_squared;
        sum_wide += wide.distance_squared;
        if wide.distance_squared < narrow.distance_squared - 1e-12 {
            wins += 1;
        } else if wide.distance_squared > narrow.distance_squared + 1e-12 {
            losses += 1;
        }
    }
    let pass = sum_wide <= sum_narrow && (losses as f64) <= 0.01 * total as f64;
    report(
        "9 [beam dominance]",
        pass,
        &format!("P=8 vs P=2 over {total} instances: {wins} better, {losses} worse"),
    );
    assert!(pass);
}

#[test]
fn criterion_9_reproducible_across_worker_counts() {
    let spec = SweepSpec {
        constellation: ConstellationSpec::new(3, 3, 2),
        detector: DetectorKind::Layered(DetectorConfig::standard(3, 2, 4, 1)),
        eb_n0_grid: vec![0.0, 3.0],
        stopping: StoppingRule { max_trials: 3000, min_errors: 200, max_wall_seconds_per_point: f64::INFINITY },
        mode: ConstellationMode::RedrawPerBatch { batch: 700 },
        fec: None,
        training: None,
        energy: 2.0,
        seed: 99,
    };
    let counts = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| run_uncoded_sweep(&spec).unwrap())
            .into_iter()
            .map(|p| (p.trials, p.symbol_errors))
            .collect::<Vec<_>>()
    };
    let reference = counts(1);
    let pass = [2, 3, 5].iter().all(|&t| counts(t) == reference);
    report("9 [reproducible across worker counts]", pass, &format!("counts {reference:?} for 1, 2, 3, 5 workers"));
    assert!(pass);
}
