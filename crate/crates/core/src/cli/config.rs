//! Config files, presets and value syntax shared by the subcommands.
//!
//! A config file is TOML with one table per subcommand; every key inside a
//! table is a flat scalar or array:
//!
//! ```toml
//! [ser]
//! units = 4
//! bits_per_unit = 8
//! dims = 16
//! detector = "layered"
//! beam_width = 128
//! iterations = 2
//! ebn0 = "-6..-3:0.5"
//! ```
//!
//! Layering is preset, then file, then command-line flags.

use crate::detect::{random_permutations, DetectorConfig};
use crate::engine::{ConstellationMode, ConstellationSpec, DetectorKind, FecSpec, StoppingRule, SweepSpec};
use crate::train::TrainingScheme;
use serde::{Deserialize, Serialize};
use std::fmt;

/// A configuration problem, anchored to a line when it came from a file.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub source: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        ConfigError { source: None, line: None, message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.source, self.line) {
            (Some(s), Some(l)) => write!(f, "{s}:{l}: {}", self.message),
            (Some(s), None) => write!(f, "{s}: {}", self.message),
            (None, _) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Built-in presets, keyed by name.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig2a", include_str!("../../presets/fig2a.toml")),
    ("fig2b", include_str!("../../presets/fig2b.toml")),
    ("fig4", include_str!("../../presets/fig4.toml")),
    ("fig5-rs", include_str!("../../presets/fig5-rs.toml")),
];

pub fn preset(name: &str) -> Result<&'static str, ConfigError> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t).ok_or_else(|| {
        let names: Vec<_> = PRESETS.iter().map(|(n, _)| *n).collect();
        ConfigError::new(format!("unknown preset `{name}` (available: {})", names.join(", ")))
    })
}

/// Parses `a..b` (step 1), `a..b:step`, a comma list or a single value.
/// Ranges include both ends. `inf` is accepted in lists.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let text = text.trim();
    let num = |s: &str| -> Result<f64, String> {
        s.trim().parse::<f64>().map_err(|_| format!("`{}` is not a number", s.trim()))
    };
    if let Some((lo, rest)) = text.split_once("..") {
        let (hi, step) = match rest.split_once(':') {
            Some((hi, step)) => (num(hi)?, num(step)?),
            None => (num(rest)?, 1.0),
        };
        let lo = num(lo)?;
        if !(step > 0.0) || !lo.is_finite() || !hi.is_finite() {
            return Err(format!("bad range `{text}`"));
        }
        if hi < lo {
            return Err(format!("range `{text}` is empty"));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        // Multiply rather than accumulate so grid values stay exact.
        return Ok((0..count).map(|i| lo + i as f64 * step).collect());
    }
    text.split(',').map(num).collect()
}

/// Parses an unsigned range like `0..3` or a list like `1,2,3`.
pub fn parse_int_grid(text: &str) -> Result<Vec<u32>, String> {
    parse_grid(text)?
        .into_iter()
        .map(|x| {
            if x >= 0.0 && x.fract() == 0.0 && x <= u32::MAX as f64 {
                Ok(x as u32)
            } else {
                Err(format!("`{x}` is not a non-negative integer"))
            }
        })
        .collect()
}

/// A grid given either as range text or as a TOML array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridValue {
    Text(String),
    List(Vec<f64>),
}

impl GridValue {
    pub fn values(&self) -> Result<Vec<f64>, String> {
        match self {
            GridValue::Text(t) => parse_grid(t),
            GridValue::List(v) => Ok(v.clone()),
        }
    }
}

/// Unit orderings: `"all"` or a count of seeded random orderings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PermutationChoice {
    Named(String),
    Count(usize),
}

/// Settings of the simulation subcommands (`ser`, `fer`, `agree`,
/// `train-sweep`). Every field is optional so layers can be merged.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub units: Option<usize>,
    pub bits_per_unit: Option<u32>,
    pub dims: Option<usize>,
    pub time_slots: Option<usize>,
    /// `exhaustive` or `layered`.
    pub detector: Option<String>,
    pub beam_width: Option<usize>,
    pub iterations: Option<usize>,
    pub permutations: Option<PermutationChoice>,
    pub ebn0: Option<GridValue>,
    pub min_errors: Option<u64>,
    pub max_trials: Option<u64>,
    pub max_seconds: Option<f64>,
    /// `fixed` or `redraw`.
    pub mode: Option<String>,
    pub batch: Option<u64>,
    pub energy: Option<f64>,
    pub seed: Option<u64>,
    pub field_bits: Option<u32>,
    pub code_length: Option<usize>,
    pub code_dimension: Option<usize>,
    /// Trials per point for `agree`.
    pub trials: Option<usize>,
    /// Pilot noise levels for `train-sweep`.
    pub pilot_n0: Option<Vec<f64>>,
    pub reps: Option<usize>,
    pub scheme: Option<TrainingScheme>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl SimSection {
    /// Fields set in `other` replace those in `self`.
    pub fn merge(&mut self, other: &SimSection) {
        overlay!(self, other; units, bits_per_unit, dims, time_slots, detector, beam_width, iterations,
            permutations, ebn0, min_errors, max_trials, max_seconds, mode, batch, energy, seed,
            field_bits, code_length, code_dimension, trials, pilot_n0, reps, scheme);
    }

    /// A copy with every default the resolver would apply written out, so
    /// the result does not depend on future changes to defaults.
    pub fn filled(&self) -> SimSection {
        let stop = StoppingRule::default();
        let mut s = self.clone();
        s.units.get_or_insert(2);
        s.bits_per_unit.get_or_insert(4);
        s.dims.get_or_insert(8);
        s.time_slots.get_or_insert(1);
        s.seed.get_or_insert(1);
        s.energy.get_or_insert(1.0);
        s.min_errors.get_or_insert(stop.min_errors);
        s.max_trials.get_or_insert(stop.max_trials);
        s.max_seconds.get_or_insert(stop.max_wall_seconds_per_point);
        s.mode.get_or_insert_with(|| "redraw".into());
        if s.mode.as_deref() == Some("redraw") {
            s.batch.get_or_insert(1000);
        }
        if s.detector.get_or_insert_with(|| "layered".into()) == "layered" {
            s.iterations.get_or_insert(2);
            s.beam_width.get_or_insert(16);
            let units = s.units.unwrap();
            s.permutations.get_or_insert(if units <= 4 {
                PermutationChoice::Named("all".into())
            } else {
                PermutationChoice::Count(24)
            });
        }
        s
    }

    /// Resolves into a sweep spec. `coded` requires the code fields.
    pub fn to_sweep_spec(&self, coded: bool) -> Result<SweepSpec, (&'static str, String)> {
        let s = self.filled();
        let units = s.units.unwrap();
        let seed = s.seed.unwrap();
        let constellation = ConstellationSpec {
            num_units: units,
            bits_per_unit: s.bits_per_unit.unwrap(),
            receive_dims: s.dims.unwrap(),
            time_slots: s.time_slots.unwrap(),
        };
        let detector = match s.detector.as_deref().unwrap_or("layered") {
            "exhaustive" => DetectorKind::Exhaustive,
            "layered" => {
                let iterations = s.iterations.unwrap_or(2);
                let beam = s.beam_width.unwrap_or(16);
                let mut cfg = DetectorConfig::standard(units, iterations, beam, seed);
                match &s.permutations {
                    None => {}
                    Some(PermutationChoice::Named(n)) if n == "all" => {
                        if units > 8 {
                            return Err(("permutations", "`all` is limited to 8 units".into()));
                        }
                        cfg.permutations = crate::detect::all_permutations(units);
                    }
                    Some(PermutationChoice::Named(n)) => {
                        return Err(("permutations", format!("expected `all` or a count, got `{n}`")));
                    }
                    Some(PermutationChoice::Count(0)) => {
                        return Err(("permutations", "need at least one ordering".into()));
                    }
                    Some(PermutationChoice::Count(k)) => cfg.permutations = random_permutations(units, *k, seed),
                }
                DetectorKind::Layered(cfg)
            }
            other => return Err(("detector", format!("unknown detector `{other}`"))),
        };
        let eb_n0_grid = match &s.ebn0 {
            Some(g) => g.values().map_err(|e| ("ebn0", e))?,
            None => return Err(("ebn0", "an Eb/N0 grid is required".into())),
        };
        let stopping = StoppingRule {
            max_trials: s.max_trials.unwrap(),
            min_errors: s.min_errors.unwrap(),
            max_wall_seconds_per_point: s.max_seconds.unwrap(),
        };
        let mode = match s.mode.as_deref().unwrap_or("redraw") {
            "fixed" => ConstellationMode::FixedSingle,
            "redraw" => ConstellationMode::RedrawPerBatch { batch: s.batch.unwrap_or(1000) },
            other => return Err(("mode", format!("unknown mode `{other}`, expected `fixed` or `redraw`"))),
        };
        let fec = if coded {
            match (s.field_bits, s.code_length, s.code_dimension) {
                (Some(field_bits), Some(length), Some(dimension)) => Some(FecSpec { field_bits, length, dimension }),
                _ => return Err(("field_bits", "coded runs need field_bits, code_length and code_dimension".into())),
            }
        } else {
            None
        };
        let spec = SweepSpec {
            constellation,
            detector,
            eb_n0_grid,
            stopping,
            mode,
            fec,
            training: None,
            energy: s.energy.unwrap(),
            seed,
        };
        spec.validate().map_err(|e| (key_for_error(&e.to_string()), e.to_string()))?;
        Ok(spec)
    }
}

/// Best guess at the key responsible for a validation message.
fn key_for_error(message: &str) -> &'static str {
    let m = message.to_ascii_lowercase();
    if m.contains("grid") {
        "ebn0"
    } else if m.contains("min_errors") || m.contains("max_trials") {
        "min_errors"
    } else if m.contains("batch") {
        "batch"
    } else if m.contains("beam") {
        "beam_width"
    } else if m.contains("iteration") {
        "iterations"
    } else if m.contains("field") || m.contains("code") || m.contains("divide") {
        "field_bits"
    } else if m.contains("energy") {
        "energy"
    } else {
        "units"
    }
}

/// Settings of `analytic`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticSection {
    pub k: Option<usize>,
    /// Correction capabilities; the curve uses `Delta = t + 1`.
    pub t: Option<String>,
    /// Error positions, used when `t` is not given.
    pub delta: Option<String>,
    pub snr_db: Option<GridValue>,
}

impl AnalyticSection {
    pub fn merge(&mut self, other: &AnalyticSection) {
        overlay!(self, other; k, t, delta, snr_db);
    }
}

/// Settings of `capacity`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacitySection {
    pub points: Option<usize>,
    pub realizations: Option<usize>,
    pub k: Option<usize>,
    pub snr_db: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

impl CapacitySection {
    pub fn merge(&mut self, other: &CapacitySection) {
        overlay!(self, other; points, realizations, k, snr_db, samples, seed);
    }
}

/// A whole config file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub ser: Option<SimSection>,
    pub fer: Option<SimSection>,
    pub agree: Option<SimSection>,
    #[serde(rename = "train-sweep")]
    pub train_sweep: Option<SimSection>,
    pub analytic: Option<AnalyticSection>,
    pub capacity: Option<CapacitySection>,
}

/// 1-based line of byte `offset` in `text`.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

impl ConfigFile {
    /// Parses `text`; `source` names it in error messages.
    pub fn parse(text: &str, source: &str) -> Result<ConfigFile, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError {
            source: Some(source.to_string()),
            line: e.span().map(|s| line_of(text, s.start)),
            message: e.message().trim().to_string(),
        })
    }
}

/// Line of `key = ...` inside table `[section]`, if present.
pub fn locate_key(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if let Some(name) = trimmed.strip_prefix('[').and_then(|s| s.split(']').next()) {
            current = name.trim().trim_matches('"').to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = trimmed.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}
