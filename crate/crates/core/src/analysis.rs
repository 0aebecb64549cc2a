//! Closed-form error probabilities for random constellations and a Monte
//! Carlo estimator of the mutual information of a finite constellation.
//!
//! Conventions: `snr = Es / N0` in linear units, noise has total variance
//! `N0` per complex dimension, and the difference of two independent points
//! is complex Gaussian with variance `2 Es` per dimension.

use crate::model::complex_gaussian;
use crate::rng;
use crate::vector::ComplexVector;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Gaussian tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorModelParams {
    /// Linear `Es / N0`.
    pub snr: f64,
    /// Receive dimensions `K`.
    pub dims: usize,
    /// Number of erroneous positions `Delta`.
    pub delta: u32,
    /// Decoder correction capability.
    pub t: u32,
}

impl ErrorModelParams {
    pub fn new(snr: f64, dims: usize, delta: u32, t: u32) -> Self {
        ErrorModelParams { snr, dims, delta, t }
    }
}

/// Probability that one position is detected in favour of a random competing
/// point, averaged over the Gaussian point difference.
///
/// Evaluated in the cancellation-free form
/// `((1-mu)/2)^K sum_{k<K} C(K-1+k, k) ((1+mu)/2)^k`, `mu = sqrt(snr/(2+snr))`,
/// which is algebraically equal to [`pairwise_error_binomial_sum`] but keeps
/// full relative precision at high SNR.
fn pairwise_error_single(snr: f64, dims: usize) -> f64 {
    assert!(dims >= 1, "need at least one receive dimension");
    if snr <= 0.0 {
        return 0.5;
    }
    let mu = (snr / (2.0 + snr)).sqrt();
    // 1 - mu computed without cancellation.
    let one_minus_mu = (2.0 / (2.0 + snr)) / (1.0 + mu);
    let half_plus = 0.5 * (1.0 + mu);
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..dims {
        term *= (dims - 1 + k) as f64 / k as f64 * half_plus;
        sum += term;
    }
    (0.5 * one_minus_mu).powi(dims as i32) * sum
}

/// `P(E_Delta)`: the single-position pairwise error raised to `Delta`.
pub fn pairwise_error_closed_form(p: &ErrorModelParams) -> f64 {
    pairwise_error_single(p.snr, p.dims).powi(p.delta as i32)
}

/// The single-position pairwise error in its central-binomial form
/// `1/2 [1 - sqrt(snr/(2+snr)) sum_{k<K} C(2k,k) ((1 - snr/(2+snr))/4)^k]`.
///
/// Suffers cancellation once the result drops below about `1e-12`; use
/// [`pairwise_error_closed_form`] for values.
pub fn pairwise_error_binomial_sum(snr: f64, dims: usize) -> f64 {
    let ratio = snr / (2.0 + snr);
    let q = (1.0 - ratio) / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..dims {
        let k = k as f64;
        term *= (2.0 * k) * (2.0 * k - 1.0) / (k * k) * q;
        sum += term;
    }
    0.5 * (1.0 - ratio.sqrt() * sum)
}

/// High-SNR asymptote `(1/(2 snr))^Delta`. Not clamped: at `snr <= 0.5` it
/// exceeds one.
pub fn pairwise_error_asymptotic(p: &ErrorModelParams) -> f64 {
    (0.5 / p.snr).powi(p.delta as i32)
}

/// Coded error asymptote `(1/(2 snr))^(t+1)`.
pub fn coded_error_approx(p: &ErrorModelParams) -> f64 {
    (0.5 / p.snr).powi(p.t as i32 + 1)
}

/// `sum_{Delta=t+1}^{dimension} P(E_Delta)` for a code of the given dimension.
pub fn coded_error_finite_sum(p: &ErrorModelParams, dimension: u32) -> f64 {
    let single = pairwise_error_single(p.snr, p.dims);
    (p.t + 1..=dimension).map(|d| single.powi(d as i32)).sum()
}

/// Frame error probability of a bounded-distance decoder when each of the
/// `length` symbols is wrong independently with probability `p`:
/// `sum_{j>t} C(L,j) p^j (1-p)^(L-j)`.
pub fn binomial_tail(length: usize, t: usize, p: f64) -> f64 {
    if t >= length {
        return 0.0;
    }
    // Sum the complement for small t to avoid cancellation only when p is large.
    let mut coeff = 1.0f64;
    let mut head = 0.0;
    for j in 0..=t {
        if j > 0 {
            coeff *= (length - j + 1) as f64 / j as f64;
        }
        head += coeff * p.powi(j as i32) * (1.0 - p).powi((length - j) as i32);
    }
    if head < 0.5 {
        return 1.0 - head;
    }
    let mut tail = 0.0;
    let mut coeff = (1..=t + 1).fold(1.0f64, |c, j| c * (length - j + 1) as f64 / j as f64);
    for j in t + 1..=length {
        if j > t + 1 {
            coeff *= (length - j + 1) as f64 / j as f64;
        }
        tail += coeff * p.powi(j as i32) * (1.0 - p).powi((length - j) as i32);
    }
    tail
}

/// Square QAM with unit average energy. `order` must be an even power of two.
pub fn qam_constellation(order: usize) -> Vec<ComplexVector> {
    let side = (order as f64).sqrt().round() as usize;
    assert_eq!(side * side, order, "QAM order must be a perfect square");
    let energy = 2.0 * (order as f64 - 1.0) / 3.0;
    let scale = 1.0 / energy.sqrt();
    let mut points = Vec::with_capacity(order);
    for i in 0..side {
        for q in 0..side {
            let re = (2.0 * i as f64 - (side - 1) as f64) * scale;
            let im = (2.0 * q as f64 - (side - 1) as f64) * scale;
            points.push(ComplexVector(vec![Complex64::new(re, im)]));
        }
    }
    points
}

/// `M` i.i.d. unit-variance complex Gaussian points in `dims` dimensions.
pub fn random_gaussian_points<R: Rng + ?Sized>(rng: &mut R, count: usize, dims: usize) -> Vec<ComplexVector> {
    (0..count)
        .map(|_| ComplexVector((0..dims).map(|_| complex_gaussian(rng, 1.0)).collect()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiEstimate {
    /// Bits per channel use.
    pub bits: f64,
    pub stderr: f64,
}

/// Terms this far below the largest exponent contribute less than `1e-17`
/// relative and are skipped.
const LOG_SUM_CUTOFF: f64 = -40.0;

/// Monte Carlo estimate of `I(X;Y)` for equiprobable `points` over AWGN:
///
/// `log2 M - E[ log2 sum_x' exp((|z|^2 - |x - x' + z|^2) / N0) ]`
///
/// with `N0 = 1/snr`, so `snr` is `Es/N0` when the points have unit average
/// energy. The inner sum is evaluated in log-sum-exp form.
pub fn mutual_information_mc(points: &[ComplexVector], snr: f64, samples: usize, seed: u64) -> MiEstimate {
    assert!(points.len() >= 2, "need at least two points");
    assert!(samples >= 2, "need at least two samples");
    let dims = points[0].len();
    let n0 = 1.0 / snr;
    let mut rng = rng::stream(seed, &[rng::domain::CAPACITY]);
    let mut mean = 0.0;
    let mut m2 = 0.0;
    let mut y = vec![Complex64::new(0.0, 0.0); dims];
    let mut exponents = vec![0.0f64; points.len()];
    for s in 0..samples {
        let x = &points[rng.random_range(0..points.len())];
        let mut noise_energy = 0.0;
        for (yk, xk) in y.iter_mut().zip(x.as_slice()) {
            let z = complex_gaussian(&mut rng, n0);
            noise_energy += z.norm_sqr();
            *yk = xk + z;
        }
        let mut max = f64::NEG_INFINITY;
        for (e, p) in exponents.iter_mut().zip(points) {
            let d: f64 = y.iter().zip(p.as_slice()).map(|(a, b)| (a - b).norm_sqr()).sum();
            *e = (noise_energy - d) / n0;
            max = max.max(*e);
        }
        let sum: f64 = exponents
            .iter()
            .filter(|&&e| e - max > LOG_SUM_CUTOFF)
            .map(|&e| (e - max).exp())
            .sum();
        let value = (max + sum.ln()) / std::f64::consts::LN_2;
        assert!(value.is_finite(), "non-finite log-sum-exp at sample {s}");
        // Welford update.
        let delta = value - mean;
        mean += delta / (s + 1) as f64;
        m2 += delta * (value - mean);
    }
    let variance = m2 / (samples - 1) as f64;
    MiEstimate { bits: (points.len() as f64).log2() - mean, stderr: (variance / samples as f64).sqrt() }
}
