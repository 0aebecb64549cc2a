//! Receiver training from noisy pilots.
//!
//! The receiver learns each unit's constituents separately, then rebuilds
//! the whole constellation by superposition, so the pilot budget is
//! `N * 2^R_n` scans instead of `2^(N R_n)`. Two ways to isolate a unit are
//! modelled: switching the other units off ("bypass"), or letting them send
//! their index-0 default constituent and subtracting those defaults, which
//! are themselves learned through a ±1 Hadamard pilot pattern.

use crate::error::{Error, Result};
use crate::model::{complex_gaussian, LayeredConstellation};
use crate::rng::{self, SimRng};
use crate::vector::ComplexVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrainingScheme {
    /// Other units transmit their default constituent; defaults learned via
    /// a Hadamard pilot pattern.
    #[default]
    Hadamard,
    /// Other units are switched off while one unit is scanned.
    Bypass,
}

/// An estimated constellation and the pilot transmissions spent on it.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedConstellation {
    pub constellation: LayeredConstellation,
    pub pilots: usize,
}

/// Sylvester Hadamard matrix of the given power-of-two order, entries ±1.
pub fn hadamard(order: usize) -> Vec<Vec<i8>> {
    assert!(order.is_power_of_two(), "Hadamard order must be a power of two");
    let mut h = vec![vec![1i8]];
    while h.len() < order {
        let n = h.len();
        let mut next = vec![vec![0i8; 2 * n]; 2 * n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = h[i][j];
                next[i][j + n] = h[i][j];
                next[i + n][j] = h[i][j];
                next[i + n][j + n] = -h[i][j];
            }
        }
        h = next;
    }
    h
}

/// Pilot slots used by one round of default estimation: `N` rounded up to a
/// power of two (extra rows belong to null units).
pub fn hadamard_slots(num_units: usize) -> usize {
    num_units.next_power_of_two()
}

/// Total pilot transmissions for Hadamard-default training.
pub fn pilot_count(num_units: usize, bits_per_unit: u32, reps: usize) -> usize {
    num_units * (1usize << bits_per_unit) * reps + hadamard_slots(num_units) * reps
}

fn noisy(rng: &mut SimRng, clean: &[Complex64], n0: f64) -> Vec<Complex64> {
    clean
        .iter()
        .map(|&x| if n0 > 0.0 { x + complex_gaussian(rng, n0) } else { x })
        .collect()
}

/// Recovers every unit's default (index-0) constituent from `N'` pilot slots
/// in which unit `n` sends its default multiplied by `H[slot][n]`.
pub fn estimate_defaults_hadamard(truth: &LayeredConstellation, pilot_n0: f64, seed: u64) -> Vec<ComplexVector> {
    let mut rng = rng::stream(seed, &[rng::domain::PILOT]);
    estimate_defaults_hadamard_with_rng(truth, pilot_n0, &mut rng)
}

pub fn estimate_defaults_hadamard_with_rng(
    truth: &LayeredConstellation,
    pilot_n0: f64,
    rng: &mut SimRng,
) -> Vec<ComplexVector> {
    let n = truth.num_units();
    let k = truth.dims();
    let order = hadamard_slots(n);
    let h = hadamard(order);
    let observations: Vec<Vec<Complex64>> = h
        .iter()
        .map(|row| {
            let mut clean = vec![Complex64::new(0.0, 0.0); k];
            for (unit, &sign) in row.iter().take(n).enumerate() {
                for (c, d) in clean.iter_mut().zip(truth.constituent(unit, 0)) {
                    *c += d * sign as f64;
                }
            }
            noisy(rng, &clean, pilot_n0)
        })
        .collect();
    (0..n)
        .map(|unit| {
            let mut est = vec![Complex64::new(0.0, 0.0); k];
            for (slot, obs) in observations.iter().enumerate() {
                let sign = h[slot][unit] as f64;
                for (e, y) in est.iter_mut().zip(obs) {
                    *e += y * sign;
                }
            }
            ComplexVector(est.into_iter().map(|e| e / order as f64).collect())
        })
        .collect()
}

/// Per-unit training with the other units parked on their defaults.
///
/// Each constituent `h^n(m)` is observed `reps` times together with the
/// other units' defaults; the average minus the estimated default sum of the
/// other units is the estimate. Defaults are re-estimated in every repetition
/// and averaged.
pub fn train_per_unit(truth: &LayeredConstellation, pilot_n0: f64, reps: usize, seed: u64) -> Result<TrainedConstellation> {
    if reps == 0 {
        return Err(Error::InvalidParameter("training needs at least one repetition".into()));
    }
    let mut rng = rng::stream(seed, &[rng::domain::PILOT]);
    let n = truth.num_units();
    let k = truth.dims();
    let size = truth.table_size();

    let mut defaults = vec![vec![Complex64::new(0.0, 0.0); k]; n];
    for _ in 0..reps {
        for (acc, est) in defaults.iter_mut().zip(estimate_defaults_hadamard_with_rng(truth, pilot_n0, &mut rng)) {
            for (a, e) in acc.iter_mut().zip(est.as_slice()) {
                *a += e / reps as f64;
            }
        }
    }

    let mut estimate = truth.clone();
    for unit in 0..n {
        let mut others_true = vec![Complex64::new(0.0, 0.0); k];
        let mut others_est = vec![Complex64::new(0.0, 0.0); k];
        for other in (0..n).filter(|&o| o != unit) {
            for (acc, d) in others_true.iter_mut().zip(truth.constituent(other, 0)) {
                *acc += d;
            }
            for (acc, d) in others_est.iter_mut().zip(&defaults[other]) {
                *acc += d;
            }
        }
        let mut table = Vec::with_capacity(size * k);
        for m in 0..size {
            let clean: Vec<Complex64> =
                truth.constituent(unit, m).iter().zip(&others_true).map(|(h, d)| h + d).collect();
            let mut mean = vec![Complex64::new(0.0, 0.0); k];
            for _ in 0..reps {
                for (a, y) in mean.iter_mut().zip(noisy(&mut rng, &clean, pilot_n0)) {
                    *a += y / reps as f64;
                }
            }
            table.extend(mean.iter().zip(&others_est).map(|(y, d)| y - d));
        }
        estimate.table_mut(unit).copy_from_slice(&table);
    }
    Ok(TrainedConstellation { constellation: estimate, pilots: pilot_count(n, truth.bits_per_unit(), reps) })
}

/// Per-unit training with the other units switched off.
pub fn train_bypass(truth: &LayeredConstellation, pilot_n0: f64, reps: usize, seed: u64) -> Result<TrainedConstellation> {
    if reps == 0 {
        return Err(Error::InvalidParameter("training needs at least one repetition".into()));
    }
    let mut rng = rng::stream(seed, &[rng::domain::PILOT]);
    let mut estimate = truth.clone();
    for unit in 0..truth.num_units() {
        let table: Vec<Complex64> = truth
            .table(unit)
            .chunks(truth.dims())
            .flat_map(|h| {
                let mut mean = vec![Complex64::new(0.0, 0.0); h.len()];
                for _ in 0..reps {
                    for (a, y) in mean.iter_mut().zip(noisy(&mut rng, h, pilot_n0)) {
                        *a += y / reps as f64;
                    }
                }
                mean
            })
            .collect();
        estimate.table_mut(unit).copy_from_slice(&table);
    }
    Ok(TrainedConstellation {
        pilots: truth.num_units() * truth.table_size() * reps,
        constellation: estimate,
    })
}

/// Trains with the chosen scheme.
pub fn train(
    truth: &LayeredConstellation,
    scheme: TrainingScheme,
    pilot_n0: f64,
    reps: usize,
    seed: u64,
) -> Result<TrainedConstellation> {
    match scheme {
        TrainingScheme::Hadamard => train_per_unit(truth, pilot_n0, reps, seed),
        TrainingScheme::Bypass => train_bypass(truth, pilot_n0, reps, seed),
    }
}
