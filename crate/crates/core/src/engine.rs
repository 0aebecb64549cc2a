//! Monte Carlo error-rate sweeps.
//!
//! Trials are processed in fixed-size chunks. Trial `i` at grid point `p`
//! draws its message and noise from the stream `(seed, p, i)`, and the
//! constellation for batch `b` from `(seed, b)`, so error counts do not
//! depend on how many worker threads run the chunk. Stopping is checked
//! only at chunk boundaries for the same reason.

use crate::detect::{detect_exhaustive, detect_layered, DetectorConfig};
use crate::error::{Error, Result};
use crate::fec::{RsCode, SymbolMapping};
use crate::model::{transmit_with_rng, ChannelParams, LayeredConstellation};
use crate::rng::{self, SimRng};
use crate::train::{self, TrainingScheme};
use crate::vector::ComplexVector;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use std::time::Instant;

/// Trials per scheduling chunk.
pub const CHUNK_TRIALS: u64 = 250;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstellationSpec {
    pub num_units: usize,
    pub bits_per_unit: u32,
    pub receive_dims: usize,
    #[serde(default = "one")]
    pub time_slots: usize,
}

fn one() -> usize {
    1
}

impl ConstellationSpec {
    pub fn new(num_units: usize, bits_per_unit: u32, receive_dims: usize) -> Self {
        ConstellationSpec { num_units, bits_per_unit, receive_dims, time_slots: 1 }
    }

    /// Receive dimensions after silent-slot expansion.
    pub fn effective_dims(&self) -> usize {
        self.receive_dims * self.time_slots
    }

    pub fn rate_bits(&self) -> u32 {
        self.num_units as u32 * self.bits_per_unit
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DetectorKind {
    Exhaustive,
    Layered(DetectorConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    /// Symbols for uncoded sweeps, frames for coded sweeps.
    pub max_trials: u64,
    /// Symbol errors (uncoded) or frame errors (coded) to collect.
    pub min_errors: u64,
    pub max_wall_seconds_per_point: f64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule { max_trials: 10_000_000, min_errors: 100, max_wall_seconds_per_point: f64::INFINITY }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ConstellationMode {
    /// One realization for the whole sweep.
    FixedSingle,
    /// A fresh realization every `batch` trials.
    RedrawPerBatch { batch: u64 },
}

impl Default for ConstellationMode {
    fn default() -> Self {
        ConstellationMode::RedrawPerBatch { batch: 1000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FecSpec {
    pub field_bits: u32,
    pub length: usize,
    pub dimension: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingSpec {
    pub pilot_n0: f64,
    pub reps: usize,
    #[serde(default)]
    pub scheme: TrainingScheme,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub constellation: ConstellationSpec,
    pub detector: DetectorKind,
    /// Grid in dB; `inf` is allowed and means a noiseless channel.
    pub eb_n0_grid: Vec<f64>,
    #[serde(default)]
    pub stopping: StoppingRule,
    #[serde(default)]
    pub mode: ConstellationMode,
    #[serde(default)]
    pub fec: Option<FecSpec>,
    /// Detect with a trained estimate instead of the true constellation.
    #[serde(default)]
    pub training: Option<TrainingSpec>,
    #[serde(default = "unit_energy")]
    pub energy: f64,
    pub seed: u64,
}

fn unit_energy() -> f64 {
    1.0
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let c = &self.constellation;
        if c.num_units == 0 || c.bits_per_unit == 0 || c.receive_dims == 0 || c.time_slots == 0 {
            return Err(Error::InvalidParameter("constellation parameters must be positive".into()));
        }
        if self.eb_n0_grid.is_empty() {
            return Err(Error::InvalidParameter("Eb/N0 grid is empty".into()));
        }
        if self.eb_n0_grid.windows(2).any(|w| !(w[1] > w[0])) || self.eb_n0_grid.iter().any(|x| x.is_nan()) {
            return Err(Error::InvalidParameter("Eb/N0 grid must be strictly increasing".into()));
        }
        if self.stopping.min_errors < 1 || self.stopping.max_trials < 1 {
            return Err(Error::InvalidParameter("min_errors and max_trials must be at least 1".into()));
        }
        if !(self.stopping.max_wall_seconds_per_point > 0.0) {
            return Err(Error::InvalidParameter("wall-clock cap must be positive".into()));
        }
        if let ConstellationMode::RedrawPerBatch { batch: 0 } = self.mode {
            return Err(Error::InvalidParameter("batch size must be positive".into()));
        }
        if !(self.energy > 0.0) {
            return Err(Error::InvalidParameter("energy must be positive".into()));
        }
        if let DetectorKind::Layered(cfg) = &self.detector {
            cfg.validate(c.num_units)?;
        }
        if let Some(t) = &self.training {
            if t.reps == 0 || !(t.pilot_n0 >= 0.0) {
                return Err(Error::InvalidParameter("training needs reps >= 1 and pilot_n0 >= 0".into()));
            }
        }
        if let Some(fec) = &self.fec {
            let code = RsCode::new(fec.field_bits, fec.length, fec.dimension)?;
            let mapping = SymbolMapping::new(fec.field_bits, c.num_units, c.bits_per_unit)?;
            mapping.channel_uses(code.length())?;
        }
        Ok(())
    }

    /// Information bits per channel use: `R` uncoded, `R D / L` coded.
    pub fn information_rate(&self) -> f64 {
        let raw = self.constellation.rate_bits() as f64;
        match &self.fec {
            Some(f) => raw * f.dimension as f64 / f.length as f64,
            None => raw,
        }
    }

    /// Noise level for a grid value, `N0 = N E / (R_info 10^(dB/10))`.
    pub fn n0_for(&self, eb_n0_db: f64) -> f64 {
        if eb_n0_db == f64::INFINITY {
            return 0.0;
        }
        self.constellation.num_units as f64 * self.energy / (self.information_rate() * 10f64.powf(eb_n0_db / 10.0))
    }
}

/// One point of an error-rate curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub eb_n0_db: f64,
    /// Channel uses simulated.
    pub trials: u64,
    /// Channel uses whose detected message differed from the sent one.
    pub symbol_errors: u64,
    /// Frames simulated (zero for uncoded sweeps).
    pub frames: u64,
    pub frame_errors: u64,
    /// Wrong information symbols after decoding.
    pub decoded_symbol_errors: u64,
    pub ser: f64,
    pub fer: f64,
    /// Wilson 95% bounds for the primary rate (FER if coded, else SER).
    pub ci95_lo: f64,
    pub ci95_hi: f64,
    pub seconds: f64,
    pub throughput_symbols_per_sec: f64,
    /// The wall-clock cap ended the point before the error target was met.
    pub censored: bool,
}

impl CurvePoint {
    pub fn ci95_half_width(&self) -> f64 {
        0.5 * (self.ci95_hi - self.ci95_lo)
    }

    pub fn is_coded(&self) -> bool {
        self.frames > 0
    }
}

/// 95% Wilson score interval for `errors` out of `trials`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    assert!(trials >= 1 && errors <= trials, "need 0 <= errors <= trials, trials >= 1");
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if errors == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if errors == trials { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

/// True and receiver-side constellations for one batch.
struct BatchContext {
    truth: LayeredConstellation,
    receiver: LayeredConstellation,
}

struct Runner<'a> {
    spec: &'a SweepSpec,
    code: Option<(RsCode, SymbolMapping)>,
    cache: Vec<(u64, Arc<BatchContext>)>,
}

#[derive(Debug, Default, Clone, Copy)]
struct Counts {
    trials: u64,
    symbol_errors: u64,
    frames: u64,
    frame_errors: u64,
    decoded_symbol_errors: u64,
}

impl std::ops::Add for Counts {
    type Output = Counts;
    fn add(self, o: Counts) -> Counts {
        Counts {
            trials: self.trials + o.trials,
            symbol_errors: self.symbol_errors + o.symbol_errors,
            frames: self.frames + o.frames,
            frame_errors: self.frame_errors + o.frame_errors,
            decoded_symbol_errors: self.decoded_symbol_errors + o.decoded_symbol_errors,
        }
    }
}

impl<'a> Runner<'a> {
    fn new(spec: &'a SweepSpec) -> Result<Self> {
        spec.validate()?;
        let code = match &spec.fec {
            Some(f) => Some((
                RsCode::new(f.field_bits, f.length, f.dimension)?,
                SymbolMapping::new(f.field_bits, spec.constellation.num_units, spec.constellation.bits_per_unit)?,
            )),
            None => None,
        };
        Ok(Runner { spec, code, cache: Vec::new() })
    }

    fn batch_of(&self, trial: u64) -> u64 {
        match self.spec.mode {
            ConstellationMode::FixedSingle => 0,
            ConstellationMode::RedrawPerBatch { batch } => trial / batch,
        }
    }

    fn build_context(&self, batch: u64) -> Result<BatchContext> {
        let c = &self.spec.constellation;
        let seed = rng::derive_seed(self.spec.seed, &[rng::domain::CONSTELLATION, batch]);
        let truth = LayeredConstellation::generate(c.num_units, c.bits_per_unit, c.effective_dims(), seed)?;
        let receiver = match &self.spec.training {
            None => truth.clone(),
            Some(t) => {
                let pilot_seed = rng::derive_seed(self.spec.seed, &[rng::domain::PILOT, batch]);
                train::train(&truth, t.scheme, t.pilot_n0, t.reps, pilot_seed)?.constellation
            }
        };
        Ok(BatchContext { truth, receiver })
    }

    /// Contexts for every batch touched by `start..end`, reusing the cache.
    fn contexts(&mut self, start: u64, end: u64) -> Result<Vec<(u64, Arc<BatchContext>)>> {
        let first = self.batch_of(start);
        let last = self.batch_of(end - 1);
        let mut out = Vec::new();
        for b in first..=last {
            let ctx = match self.cache.iter().find(|(id, _)| *id == b) {
                Some((_, ctx)) => ctx.clone(),
                None => Arc::new(self.build_context(b)?),
            };
            out.push((b, ctx));
        }
        self.cache = out.clone();
        Ok(out)
    }

    fn detect(&self, r: &ComplexVector, c: &LayeredConstellation) -> Result<crate::model::MessageVector> {
        Ok(match &self.spec.detector {
            DetectorKind::Exhaustive => detect_exhaustive(r, c)?.message,
            DetectorKind::Layered(cfg) => detect_layered(r, c, cfg)?.message,
        })
    }

    /// One channel use: send `m`, return the detected message.
    fn channel_use(
        &self,
        ctx: &BatchContext,
        m: &crate::model::MessageVector,
        params: &ChannelParams,
        rng: &mut SimRng,
    ) -> Result<crate::model::MessageVector> {
        let y = transmit_with_rng(&ctx.truth.point(m)?, params, rng);
        let r = y.scale_real(1.0 / params.energy.sqrt());
        self.detect(&r, &ctx.receiver)
    }

    fn uncoded_trial(&self, ctx: &BatchContext, params: &ChannelParams, point: u64, trial: u64) -> Result<Counts> {
        let mut rng = rng::stream(self.spec.seed, &[rng::domain::TRIAL, point, trial]);
        let m = ctx.truth.random_message(&mut rng);
        let detected = self.channel_use(ctx, &m, params, &mut rng)?;
        Ok(Counts { trials: 1, symbol_errors: (detected != m) as u64, ..Counts::default() })
    }

    fn coded_trial(&self, ctx: &BatchContext, params: &ChannelParams, point: u64, frame: u64) -> Result<Counts> {
        let (code, mapping) = self.code.as_ref().expect("coded sweep without code");
        let mut rng = rng::stream(self.spec.seed, &[rng::domain::TRIAL, point, frame]);
        let q = code.field().size() as u32;
        let info: Vec<u16> = (0..code.dimension()).map(|_| rng.random_range(0..q) as u16).collect();
        let sent = mapping.codeword_to_messages(&code.encode(&info)?)?;
        let mut received = Vec::with_capacity(sent.len());
        let mut symbol_errors = 0;
        for m in &sent {
            let detected = self.channel_use(ctx, m, params, &mut rng)?;
            symbol_errors += (detected != *m) as u64;
            received.push(detected);
        }
        let outcome = code.decode(&mapping.messages_to_codeword(&received))?;
        let wrong = outcome.message.iter().zip(&info).filter(|(a, b)| a != b).count() as u64;
        Ok(Counts {
            trials: sent.len() as u64,
            symbol_errors,
            frames: 1,
            frame_errors: (outcome.is_failure() || wrong > 0) as u64,
            decoded_symbol_errors: wrong,
        })
    }

    fn run(&mut self) -> Result<Vec<CurvePoint>> {
        let coded = self.code.is_some();
        let spec = self.spec;
        let mut curve = Vec::with_capacity(spec.eb_n0_grid.len());
        for (point, &db) in spec.eb_n0_grid.iter().enumerate() {
            let mut params = ChannelParams::new(spec.n0_for(db), spec.energy);
            params.time_slots = spec.constellation.time_slots;
            let started = Instant::now();
            let mut total = Counts::default();
            let mut done = 0u64;
            let mut censored = false;
            loop {
                let errors = if coded { total.frame_errors } else { total.symbol_errors };
                if errors >= spec.stopping.min_errors || done >= spec.stopping.max_trials {
                    break;
                }
                if started.elapsed().as_secs_f64() > spec.stopping.max_wall_seconds_per_point {
                    censored = true;
                    break;
                }
                let end = (done + CHUNK_TRIALS).min(spec.stopping.max_trials);
                let contexts = self.contexts(done, end)?;
                let this = &*self;
                let chunk = (done..end)
                    .into_par_iter()
                    .map(|i| {
                        let b = this.batch_of(i);
                        let ctx = &contexts.iter().find(|(id, _)| *id == b).expect("context").1;
                        if coded {
                            this.coded_trial(ctx, &params, point as u64, i)
                        } else {
                            this.uncoded_trial(ctx, &params, point as u64, i)
                        }
                    })
                    .try_reduce(Counts::default, |a, b| Ok(a + b))?;
                total = total + chunk;
                done = end;
            }
            let seconds = started.elapsed().as_secs_f64();
            let ser = total.symbol_errors as f64 / total.trials.max(1) as f64;
            let fer = if total.frames > 0 { total.frame_errors as f64 / total.frames as f64 } else { 0.0 };
            let (ci95_lo, ci95_hi) = if coded {
                wilson_interval(total.frame_errors, total.frames.max(1))
            } else {
                wilson_interval(total.symbol_errors, total.trials.max(1))
            };
            curve.push(CurvePoint {
                eb_n0_db: db,
                trials: total.trials,
                symbol_errors: total.symbol_errors,
                frames: total.frames,
                frame_errors: total.frame_errors,
                decoded_symbol_errors: total.decoded_symbol_errors,
                ser,
                fer,
                ci95_lo,
                ci95_hi,
                seconds,
                throughput_symbols_per_sec: if seconds > 0.0 { total.trials as f64 / seconds } else { 0.0 },
                censored,
            });
        }
        Ok(curve)
    }
}

/// Uncoded symbol-error-rate sweep over `spec.eb_n0_grid`.
pub fn run_uncoded_sweep(spec: &SweepSpec) -> Result<Vec<CurvePoint>> {
    if spec.fec.is_some() {
        return Err(Error::InvalidParameter("uncoded sweep given an FEC spec".into()));
    }
    Runner::new(spec)?.run()
}

/// Reed-Solomon coded frame-error-rate sweep.
pub fn run_coded_sweep(spec: &SweepSpec) -> Result<Vec<CurvePoint>> {
    if spec.fec.is_none() {
        return Err(Error::InvalidParameter("coded sweep needs an FEC spec".into()));
    }
    Runner::new(spec)?.run()
}

/// One uncoded curve per pilot noise level, detecting with trained
/// estimates. `None` entries use perfect knowledge.
pub fn run_training_sweep(
    spec: &SweepSpec,
    pilot_levels: &[Option<f64>],
    reps: usize,
    scheme: TrainingScheme,
) -> Result<Vec<(Option<f64>, Vec<CurvePoint>)>> {
    pilot_levels
        .iter()
        .map(|&level| {
            let mut s = spec.clone();
            s.training = level.map(|pilot_n0| TrainingSpec { pilot_n0, reps, scheme });
            Ok((level, run_uncoded_sweep(&s)?))
        })
        .collect()
}

/// `log10 rate` linearly interpolated in dB; returns the grid value where the
/// curve crosses `target`, if it does.
pub fn crossing_db(curve: &[CurvePoint], target: f64, rate: impl Fn(&CurvePoint) -> f64) -> Option<f64> {
    curve.windows(2).find_map(|w| {
        let (a, b) = (rate(&w[0]), rate(&w[1]));
        if a >= target && b <= target && a > 0.0 && b > 0.0 {
            let (la, lb, lt) = (a.log10(), b.log10(), target.log10());
            let frac = if la == lb { 0.0 } else { (la - lt) / (la - lb) };
            Some(w[0].eb_n0_db + frac * (w[1].eb_n0_db - w[0].eb_n0_db))
        } else {
            None
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec() -> SweepSpec {
        SweepSpec {
            constellation: ConstellationSpec::new(2, 3, 2),
            detector: DetectorKind::Exhaustive,
            eb_n0_grid: vec![0.0, 4.0],
            stopping: StoppingRule { max_trials: 2000, min_errors: 50, max_wall_seconds_per_point: f64::INFINITY },
            mode: ConstellationMode::RedrawPerBatch { batch: 300 },
            fec: None,
            training: None,
            energy: 1.0,
            seed: 42,
        }
    }

    #[test]
    fn wilson_reference_values() {
        let (lo, hi) = wilson_interval(0, 100);
        assert_eq!(lo, 0.0);
        // z^2 / (n + z^2) for zero errors.
        assert!((hi - 0.036_993_498_206_985_68).abs() < 1e-12);
        let (lo, hi) = wilson_interval(50, 100);
        assert!((0.5 - lo - (hi - 0.5)).abs() < 1e-12);
        assert_eq!(wilson_interval(100, 100).1, 1.0);
    }

    #[test]
    fn validation() {
        let mut s = small_spec();
        assert!(s.validate().is_ok());
        s.eb_n0_grid = vec![1.0, 1.0];
        assert!(s.validate().is_err());
        s.eb_n0_grid = vec![];
        assert!(s.validate().is_err());
        let mut s = small_spec();
        s.stopping.min_errors = 0;
        assert!(s.validate().is_err());
        let mut s = small_spec();
        s.fec = Some(FecSpec { field_bits: 4, length: 15, dimension: 11 });
        assert!(s.validate().is_err(), "6-bit symbols cannot carry 4-bit field elements");
        assert!(run_coded_sweep(&small_spec()).is_err());
    }

    #[test]
    fn noiseless_point_has_no_errors() {
        let mut s = small_spec();
        s.eb_n0_grid = vec![f64::INFINITY];
        s.stopping.max_trials = 500;
        let curve = run_uncoded_sweep(&s).unwrap();
        assert_eq!(curve[0].symbol_errors, 0);
        assert_eq!(curve[0].trials, 500);
        assert_eq!(curve[0].ser, 0.0);
    }

    #[test]
    fn stops_at_error_target_on_chunk_boundary() {
        let mut s = small_spec();
        s.eb_n0_grid = vec![-5.0];
        s.stopping.max_trials = 100_000;
        let p = &run_uncoded_sweep(&s).unwrap()[0];
        assert!(p.symbol_errors >= 50);
        assert_eq!(p.trials % CHUNK_TRIALS, 0);
        assert!(p.trials < 100_000);
        assert_eq!(p.ser, p.symbol_errors as f64 / p.trials as f64);
        assert!(p.ci95_lo <= p.ser && p.ser <= p.ci95_hi);
    }

    #[test]
    fn censored_when_wall_clock_runs_out() {
        let mut s = small_spec();
        s.eb_n0_grid = vec![30.0];
        s.stopping = StoppingRule { max_trials: u64::MAX, min_errors: 1, max_wall_seconds_per_point: 0.05 };
        let p = &run_uncoded_sweep(&s).unwrap()[0];
        assert!(p.censored);
        assert!(p.trials > 0);
    }

    #[test]
    fn noiseless_coded_sweep() {
        let s = SweepSpec {
            constellation: ConstellationSpec::new(1, 4, 2),
            fec: Some(FecSpec { field_bits: 4, length: 15, dimension: 11 }),
            eb_n0_grid: vec![f64::INFINITY],
            stopping: StoppingRule { max_trials: 300, ..StoppingRule::default() },
            ..small_spec()
        };
        let p = &run_coded_sweep(&s).unwrap()[0];
        assert_eq!(p.frames, 300);
        assert_eq!(p.trials, 300 * 15);
        assert_eq!(p.frame_errors, 0);
        assert_eq!(p.fer, 0.0);
    }

    #[test]
    fn eb_n0_uses_information_rate() {
        let mut s = small_spec();
        assert_eq!(s.information_rate(), 6.0);
        s.constellation = ConstellationSpec::new(4, 8, 16);
        s.fec = Some(FecSpec { field_bits: 8, length: 240, dimension: 225 });
        assert_eq!(s.information_rate(), 30.0);
        assert!((s.n0_for(0.0) - 4.0 / 30.0).abs() < 1e-15);
    }

    #[test]
    fn crossing_interpolates_in_log_domain() {
        let mk = |db: f64, ser: f64| CurvePoint {
            eb_n0_db: db,
            trials: 1,
            symbol_errors: 0,
            frames: 0,
            frame_errors: 0,
            decoded_symbol_errors: 0,
            ser,
            fer: 0.0,
            ci95_lo: 0.0,
            ci95_hi: 0.0,
            seconds: 0.0,
            throughput_symbols_per_sec: 0.0,
            censored: false,
        };
        let curve = vec![mk(0.0, 1e-2), mk(1.0, 1e-4)];
        let x = crossing_db(&curve, 1e-3, |p| p.ser).unwrap();
        assert!((x - 0.5).abs() < 1e-12);
        assert!(crossing_db(&curve, 1e-5, |p| p.ser).is_none());
    }
}
