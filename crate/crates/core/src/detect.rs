//! Minimum-distance detection for layered constellations.
//!
//! [`detect_exhaustive`] is the maximum-likelihood reference: it scans all
//! `M` points. [`detect_layered`] is the greedy iterative search that only
//! ever looks at one unit's `2^R_n` constituents at a time, keeping a beam of
//! the `P` best candidates and restarting over several unit orderings.

use crate::error::{Error, Result};
use crate::model::{ChannelParams, LayeredConstellation, MessageVector};
use crate::rng::{self, SimRng};
use crate::vector::{distance_squared, distance_squared_bounded, ComplexVector};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::HashSet;

/// Default limit on `log2 M` for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_CAP_BITS: u32 = 24;

/// Distances within this of each other are treated as a tie when comparing
/// two detectors.
pub const TIE_TOLERANCE: f64 = 1e-9;

const UNSET: u32 = u32::MAX;

/// How equal-distance candidates are ordered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Smallest message in unit order (unit 1 most significant) wins, which
    /// also makes the lowest constituent index win inside a single step.
    #[default]
    LowestIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    /// Number of full passes `T` over the units.
    pub iterations: usize,
    /// Beam width `P`.
    pub beam_width: usize,
    /// Unit orderings, each a permutation of `0..N`. Each ordering is a
    /// separate restart from the zero vector.
    pub permutations: Vec<Vec<usize>>,
    #[serde(default)]
    pub tie_break: TieBreak,
    /// Stop restarting once a candidate is closer than this. `0` disables.
    #[serde(default)]
    pub early_exit_below: f64,
}

impl DetectorConfig {
    /// Plain greedy search: one identity ordering, `P = 1`.
    pub fn greedy(num_units: usize, iterations: usize) -> Self {
        DetectorConfig {
            iterations,
            beam_width: 1,
            permutations: vec![(0..num_units).collect()],
            tie_break: TieBreak::LowestIndex,
            early_exit_below: 0.0,
        }
    }

    /// All `N!` orderings for `N <= 4`, otherwise 24 seeded random ones.
    pub fn standard(num_units: usize, iterations: usize, beam_width: usize, seed: u64) -> Self {
        let permutations = if num_units <= 4 {
            all_permutations(num_units)
        } else {
            random_permutations(num_units, 24, seed)
        };
        DetectorConfig { iterations, beam_width, permutations, tie_break: TieBreak::LowestIndex, early_exit_below: 0.0 }
    }

    pub fn with_permutations(mut self, permutations: Vec<Vec<usize>>) -> Self {
        self.permutations = permutations;
        self
    }

    pub fn validate(&self, num_units: usize) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("detector needs at least one iteration".into()));
        }
        if self.beam_width == 0 {
            return Err(Error::InvalidParameter("beam width must be positive".into()));
        }
        if self.permutations.is_empty() {
            return Err(Error::InvalidParameter("at least one unit ordering is required".into()));
        }
        for p in &self.permutations {
            let mut seen = vec![false; num_units];
            if p.len() != num_units || !p.iter().all(|&u| u < num_units && !std::mem::replace(&mut seen[u], true)) {
                return Err(Error::InvalidParameter(format!("{p:?} is not an ordering of {num_units} units")));
            }
        }
        Ok(())
    }
}

/// Every ordering of `0..n` in lexicographic order (identity first).
pub fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for u in 0..used.len() {
            if !used[u] {
                used[u] = true;
                prefix.push(u);
                rec(prefix, used, out);
                prefix.pop();
                used[u] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// The identity ordering followed by distinct seeded random orderings.
/// Returns at most `n!` orderings.
pub fn random_permutations(n: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let max = (1..=n).try_fold(1usize, |acc, k| acc.checked_mul(k)).unwrap_or(usize::MAX);
    let count = count.min(max).max(1);
    let mut rng: SimRng = rng::stream(seed, &[rng::domain::PERMUTATION]);
    let identity: Vec<usize> = (0..n).collect();
    let mut seen = HashSet::from([identity.clone()]);
    let mut out = vec![identity];
    while out.len() < count {
        let mut p: Vec<usize> = (0..n).collect();
        p.shuffle(&mut rng);
        if seen.insert(p.clone()) {
            out.push(p);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub message: MessageVector,
    /// `||r - c(message)||^2` with the point summed in unit order.
    pub distance_squared: f64,
    /// Number of candidate distance evaluations performed.
    pub candidates_examined: u64,
}

/// Canonical squared distance between `r` and the all-ones point of `m`.
pub fn point_distance(r: &ComplexVector, c: &LayeredConstellation, m: &MessageVector) -> Result<f64> {
    Ok(r.distance_squared(&c.point(m)?))
}

fn check_received(r: &ComplexVector, c: &LayeredConstellation) -> Result<()> {
    if r.len() != c.dims() {
        return Err(Error::DimensionMismatch { expected: c.dims(), actual: r.len() });
    }
    Ok(())
}

/// Maximum-likelihood detection by full enumeration, capped at `2^24` points.
pub fn detect_exhaustive(r: &ComplexVector, c: &LayeredConstellation) -> Result<DetectionResult> {
    detect_exhaustive_with_cap(r, c, DEFAULT_ENUMERATION_CAP_BITS)
}

/// Full enumeration with an explicit cap on `log2 M`. Ties resolve to the
/// smallest message index.
pub fn detect_exhaustive_with_cap(r: &ComplexVector, c: &LayeredConstellation, cap_bits: u32) -> Result<DetectionResult> {
    check_received(r, c)?;
    if c.rate_bits() > cap_bits {
        return Err(Error::EnumerationCap { bits: c.rate_bits(), cap_bits });
    }
    let n = c.num_units();
    let bits = c.bits_per_unit();

    // Seed the bound with a cheap greedy guess so the scan can prune early.
    // The guess's distance is computed along the same residual path as the
    // scan, so tie-breaking is unchanged.
    let mut best_index = u64::MAX;
    let mut best = f64::INFINITY;
    if n > 1 {
        let guess = greedy_guess(r, c);
        best = nested_distance(r, c, &guess);
        best_index = guess.to_index(bits);
    }

    let mut residuals: Vec<Vec<Complex64>> = vec![r.as_slice().to_vec(); n];
    let mut prefix = vec![0u32; n];
    scan(c, 0, &mut residuals, &mut prefix, &mut best, &mut best_index);

    let message = MessageVector::from_index(best_index, n, bits);
    Ok(DetectionResult {
        distance_squared: point_distance(r, c, &message)?,
        message,
        candidates_examined: c.cardinality(),
    })
}

fn scan(
    c: &LayeredConstellation,
    unit: usize,
    residuals: &mut [Vec<Complex64>],
    prefix: &mut [u32],
    best: &mut f64,
    best_index: &mut u64,
) {
    let n = c.num_units();
    let bits = c.bits_per_unit();
    let size = c.table_size();
    if unit + 1 == n {
        let res = &residuals[unit];
        let base = prefix[..unit].iter().fold(0u64, |acc, &m| (acc << bits) | m as u64) << bits;
        for j in 0..size {
            if let Some(d) = distance_squared_bounded(res, c.constituent(unit, j), *best) {
                let idx = base | j as u64;
                // `d <= best` here; equal distances go to the smaller index.
                if d < *best || (d == *best && idx < *best_index) {
                    *best = d;
                    *best_index = idx;
                }
            }
        }
        return;
    }
    for j in 0..size {
        prefix[unit] = j as u32;
        let (head, tail) = residuals.split_at_mut(unit + 1);
        for ((out, res), h) in tail[0].iter_mut().zip(&head[unit]).zip(c.constituent(unit, j)) {
            *out = res - h;
        }
        scan(c, unit + 1, residuals, prefix, best, best_index);
    }
}

/// Distance along the subtract-one-unit-at-a-time path used by the scan.
fn nested_distance(r: &ComplexVector, c: &LayeredConstellation, m: &MessageVector) -> f64 {
    let n = c.num_units();
    let mut res = r.as_slice().to_vec();
    for (unit, &j) in m.indices().iter().enumerate().take(n - 1) {
        for (x, h) in res.iter_mut().zip(c.constituent(unit, j as usize)) {
            *x -= h;
        }
    }
    distance_squared(&res, c.constituent(n - 1, m.indices()[n - 1] as usize))
}

fn greedy_guess(r: &ComplexVector, c: &LayeredConstellation) -> MessageVector {
    let cfg = DetectorConfig::greedy(c.num_units(), 1);
    run_layered(r, c, &cfg, None).0
}

#[derive(Clone)]
struct Candidate {
    indices: Vec<u32>,
    residual: Vec<Complex64>,
    distance: f64,
}

fn compare_keys(a: &[u32], b: &[u32]) -> Ordering {
    a.cmp(b)
}

/// Key of `rep` with `unit` set to `j`, compared without allocating.
fn compare_expanded(a: (&[u32], u32), b: (&[u32], u32), unit: usize) -> Ordering {
    for n in 0..a.0.len() {
        let x = if n == unit { a.1 } else { a.0[n] };
        let y = if n == unit { b.1 } else { b.0[n] };
        match x.cmp(&y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    Ordering::Equal
}

struct Entry {
    distance: f64,
    rep: usize,
    index: u32,
}

/// One greedy step on `unit` for the whole beam.
fn expand_step(
    c: &LayeredConstellation,
    beam: &[Candidate],
    unit: usize,
    width: usize,
    examined: &mut u64,
) -> Vec<Candidate> {
    // Members that differ only in `unit` expand to identical candidate sets;
    // keep the first (best) of each group.
    let mut seen = HashSet::with_capacity(beam.len());
    let mut reps: Vec<&Candidate> = Vec::with_capacity(beam.len());
    for cand in beam {
        let mut key = cand.indices.clone();
        key[unit] = UNSET;
        if seen.insert(key) {
            reps.push(cand);
        }
    }
    let bases: Vec<Vec<Complex64>> = reps
        .iter()
        .map(|cand| {
            let mut base = cand.residual.clone();
            let old = cand.indices[unit];
            if old != UNSET {
                for (b, h) in base.iter_mut().zip(c.constituent(unit, old as usize)) {
                    *b += h;
                }
            }
            base
        })
        .collect();

    let mut top: Vec<Entry> = Vec::with_capacity(width + 1);
    let size = c.table_size();
    for (rep, base) in bases.iter().enumerate() {
        for j in 0..size {
            *examined += 1;
            let bound = if top.len() == width { top[width - 1].distance } else { f64::INFINITY };
            let Some(d) = distance_squared_bounded(base, c.constituent(unit, j), bound) else {
                continue;
            };
            let key = (reps[rep].indices.as_slice(), j as u32);
            let pos = top.partition_point(|e| match e.distance.total_cmp(&d) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => {
                    compare_expanded((reps[e.rep].indices.as_slice(), e.index), key, unit) == Ordering::Less
                }
            });
            if pos < width {
                top.insert(pos, Entry { distance: d, rep, index: j as u32 });
                top.truncate(width);
            }
        }
    }

    top.into_iter()
        .map(|e| {
            let mut indices = reps[e.rep].indices.clone();
            indices[unit] = e.index;
            let residual = bases[e.rep]
                .iter()
                .zip(c.constituent(unit, e.index as usize))
                .map(|(b, h)| b - h)
                .collect();
            Candidate { indices, residual, distance: e.distance }
        })
        .collect()
}

/// Runs every ordering; returns the winner and the number of evaluations.
/// When `trace` is given, the best beam distance after each step is recorded
/// per ordering.
fn run_layered(
    r: &ComplexVector,
    c: &LayeredConstellation,
    cfg: &DetectorConfig,
    mut trace: Option<&mut Vec<Vec<f64>>>,
) -> (MessageVector, u64) {
    let n = c.num_units();
    let mut examined = 0u64;
    let mut best: Option<Candidate> = None;
    for order in &cfg.permutations {
        let mut beam = vec![Candidate {
            indices: vec![UNSET; n],
            residual: r.as_slice().to_vec(),
            distance: r.squared_norm(),
        }];
        let mut steps = Vec::with_capacity(cfg.iterations * n);
        for _ in 0..cfg.iterations {
            for &unit in order {
                beam = expand_step(c, &beam, unit, cfg.beam_width, &mut examined);
                steps.push(beam[0].distance);
            }
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(steps);
        }
        let leader = beam.swap_remove(0);
        let better = match &best {
            None => true,
            Some(b) => match leader.distance.total_cmp(&b.distance) {
                Ordering::Less => true,
                Ordering::Equal => compare_keys(&leader.indices, &b.indices) == Ordering::Less,
                Ordering::Greater => false,
            },
        };
        if better {
            best = Some(leader);
        }
        if cfg.early_exit_below > 0.0 && best.as_ref().is_some_and(|b| b.distance < cfg.early_exit_below) {
            break;
        }
    }
    let best = best.expect("at least one ordering");
    (MessageVector(best.indices), examined)
}

/// Greedy iterative layered detection with beam and ordering restarts.
///
/// Each ordering starts from the zero vector. A step on unit `i` replaces
/// that unit's constituent in every beam member by each of the `2^R_n`
/// alternatives and keeps the `P` closest distinct candidates; the beam
/// carries over between iterations. The answer is the closest survivor over
/// all orderings.
pub fn detect_layered(r: &ComplexVector, c: &LayeredConstellation, cfg: &DetectorConfig) -> Result<DetectionResult> {
    check_received(r, c)?;
    cfg.validate(c.num_units())?;
    let (message, candidates_examined) = run_layered(r, c, cfg, None);
    Ok(DetectionResult { distance_squared: point_distance(r, c, &message)?, message, candidates_examined })
}

/// Like [`detect_layered`], also returning the best beam distance after every
/// step, one list per ordering.
pub fn detect_layered_traced(
    r: &ComplexVector,
    c: &LayeredConstellation,
    cfg: &DetectorConfig,
) -> Result<(DetectionResult, Vec<Vec<f64>>)> {
    check_received(r, c)?;
    cfg.validate(c.num_units())?;
    let mut trace = Vec::new();
    let (message, candidates_examined) = run_layered(r, c, cfg, Some(&mut trace));
    let result = DetectionResult { distance_squared: point_distance(r, c, &message)?, message, candidates_examined };
    Ok((result, trace))
}

/// Whether two results agree, counting exact-distance ties as agreement.
pub fn results_agree(a: &DetectionResult, b: &DetectionResult) -> bool {
    a.message == b.message || (a.distance_squared - b.distance_squared).abs() <= TIE_TOLERANCE
}

/// Fraction of noisy trials on which the layered detector matches the
/// exhaustive one. Trial `i` draws its message and noise from
/// `(seed, i)`, so the result is deterministic.
pub fn agreement_rate(
    c: &LayeredConstellation,
    params: &ChannelParams,
    cfg: &DetectorConfig,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidParameter("agreement study needs at least one trial".into()));
    }
    cfg.validate(c.num_units())?;
    if c.rate_bits() > DEFAULT_ENUMERATION_CAP_BITS {
        return Err(Error::EnumerationCap { bits: c.rate_bits(), cap_bits: DEFAULT_ENUMERATION_CAP_BITS });
    }
    let scale = params.energy.sqrt();
    let mut agree = 0usize;
    for i in 0..trials {
        let mut rng = rng::stream(seed, &[rng::domain::TRIAL, i as u64]);
        let m = c.random_message(&mut rng);
        let y = crate::model::transmit_with_rng(&c.point(&m)?, params, &mut rng);
        // Detection is against the unscaled constellation.
        let r = y.scale_real(1.0 / scale);
        let exhaustive = detect_exhaustive(&r, c)?;
        let layered = detect_layered(&r, c, cfg)?;
        if results_agree(&layered, &exhaustive) {
            agree += 1;
        }
    }
    Ok(agree as f64 / trials as f64)
}
