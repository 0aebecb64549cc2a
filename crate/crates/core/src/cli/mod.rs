//! The `lmbm` command-line tool.
//!
//! Each subcommand reads an optional preset and config file, applies flag
//! overrides, writes a CSV and a JSON run manifest next to it, and exits
//! with 0 on success, 1 on a configuration error and 2 on a runtime
//! failure. The output directory defaults to `$LMBM_OUT_DIR`, then `.`.

pub mod config;
pub mod csv;

use crate::analysis::{
    mutual_information_mc, pairwise_error_asymptotic, pairwise_error_closed_form, qam_constellation,
    random_gaussian_points, ErrorModelParams,
};
use crate::detect::agreement_rate;
use crate::engine::{self, wilson_interval, DetectorKind, TrainingSpec};
use crate::model::{ChannelParams, LayeredConstellation};
use crate::rng;
use crate::train::TrainingScheme;
use clap::{Args, Parser, Subcommand};
use config::{AnalyticSection, CapacitySection, ConfigError, ConfigFile, GridValue, PermutationChoice, SimSection};
use rayon::prelude::*;
use serde_json::json;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const OUT_DIR_ENV: &str = "LMBM_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "lmbm", version, about = "Layered media-based modulation link simulator")]
pub struct Cli {
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Uncoded symbol error rate sweep.
    Ser(SimArgs),
    /// Reed-Solomon coded frame error rate sweep.
    Fer(SimArgs),
    /// Agreement of the layered detector with exhaustive search.
    Agree(SimArgs),
    /// Symbol error rate with trained constellation estimates.
    TrainSweep(SimArgs),
    /// Closed-form pairwise and coded error curves.
    Analytic(AnalyticArgs),
    /// Mutual information of random scalar or vector constellations.
    Capacity(CapacityArgs),
}

#[derive(Debug, Clone, Args)]
pub struct IoArgs {
    /// TOML config file with one table per subcommand.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in preset: fig2a, fig2b, fig4, fig5-rs.
    #[arg(long)]
    pub preset: Option<String>,
    /// Output directory (default: $LMBM_OUT_DIR or `.`).
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// CSV file name inside the output directory.
    #[arg(long)]
    pub output: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long)]
    pub units: Option<usize>,
    #[arg(long)]
    pub bits_per_unit: Option<u32>,
    /// Receive dimensions K.
    #[arg(long)]
    pub dims: Option<usize>,
    #[arg(long)]
    pub time_slots: Option<usize>,
    /// `exhaustive` or `layered`.
    #[arg(long)]
    pub detector: Option<String>,
    #[arg(long, alias = "beam")]
    pub beam_width: Option<usize>,
    #[arg(long)]
    pub iterations: Option<usize>,
    /// `all` or a number of seeded random orderings.
    #[arg(long)]
    pub permutations: Option<String>,
    /// Eb/N0 grid in dB: `a..b`, `a..b:step` or `a,b,c`.
    #[arg(long, allow_hyphen_values = true)]
    pub ebn0: Option<String>,
    #[arg(long)]
    pub min_errors: Option<u64>,
    #[arg(long)]
    pub max_trials: Option<u64>,
    /// Wall-clock cap per grid point in seconds.
    #[arg(long)]
    pub max_seconds: Option<f64>,
    /// `fixed` or `redraw`.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub batch: Option<u64>,
    #[arg(long)]
    pub energy: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub field_bits: Option<u32>,
    #[arg(long)]
    pub code_length: Option<usize>,
    #[arg(long)]
    pub code_dimension: Option<usize>,
    /// Trials per point (agree).
    #[arg(long)]
    pub trials: Option<usize>,
    /// Pilot noise levels (train-sweep), e.g. `0,0.01,0.1`.
    #[arg(long)]
    pub pilot_n0: Option<String>,
    #[arg(long)]
    pub reps: Option<usize>,
    /// `hadamard` or `bypass`.
    #[arg(long)]
    pub scheme: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyticArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Receive dimensions K.
    #[arg(long)]
    pub k: Option<usize>,
    /// Correction capabilities; curves use `t + 1` error positions.
    #[arg(long)]
    pub t: Option<String>,
    /// Error positions, when `--t` is not given.
    #[arg(long)]
    pub delta: Option<String>,
    /// SNR grid in dB.
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct CapacityArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Points per constellation.
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub realizations: Option<usize>,
    /// Dimensions per point.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub snr_db: Option<f64>,
    /// Noise samples per realization.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Runtime(e) => write!(f, "runtime error: {e}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(ConfigError::new(msg))
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Files written by one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub csv: PathBuf,
    pub manifest: PathBuf,
}

/// Parses `argv` (including the program name), runs, and returns the exit
/// code. Diagnostics go to stderr.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let printable: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match run(&cli, &printable) {
        Ok(out) => {
            eprintln!("wrote {} and {}", out.csv.display(), out.manifest.display());
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command. `argv` is recorded in the manifest.
pub fn run(cli: &Cli, argv: &[String]) -> Result<RunOutput, CliError> {
    match cli.threads {
        Some(n) if n >= 1 => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(runtime)?;
            pool.install(|| dispatch(&cli.command, argv))
        }
        Some(_) => Err(config_err("--threads must be at least 1")),
        None => dispatch(&cli.command, argv),
    }
}

fn dispatch(command: &Command, argv: &[String]) -> Result<RunOutput, CliError> {
    match command {
        Command::Ser(a) => run_sweep(a, "ser", argv),
        Command::Fer(a) => run_sweep(a, "fer", argv),
        Command::Agree(a) => run_agree(a, argv),
        Command::TrainSweep(a) => run_train_sweep(a, argv),
        Command::Analytic(a) => run_analytic(a, argv),
        Command::Capacity(a) => run_capacity(a, argv),
    }
}

/// Text and display name of each config layer below the flags.
struct Layers {
    docs: Vec<(String, String, ConfigFile)>,
}

impl Layers {
    fn load(io: &IoArgs) -> Result<Layers, CliError> {
        let mut docs = Vec::new();
        if let Some(name) = &io.preset {
            let text = config::preset(name)?.to_string();
            let label = format!("preset {name}");
            let parsed = ConfigFile::parse(&text, &label)?;
            docs.push((text, label, parsed));
        }
        if let Some(path) = &io.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
            let label = path.display().to_string();
            let parsed = ConfigFile::parse(&text, &label)?;
            docs.push((text, label, parsed));
        }
        Ok(Layers { docs })
    }

    /// Anchors an error on `key` to the last layer that sets it.
    fn anchor(&self, section: &str, key: &str, message: String, flags_set_key: bool) -> ConfigError {
        if !flags_set_key {
            for (text, label, _) in self.docs.iter().rev() {
                if let Some(line) = config::locate_key(text, section, key) {
                    return ConfigError { source: Some(label.clone()), line: Some(line), message };
                }
            }
        }
        ConfigError::new(format!("{key}: {message}"))
    }
}

impl SimArgs {
    fn section(&self) -> Result<SimSection, CliError> {
        let grid = |s: &Option<String>, key: &str| -> Result<Option<Vec<f64>>, CliError> {
            s.as_deref()
                .map(config::parse_grid)
                .transpose()
                .map_err(|e| config_err(format!("--{key}: {e}")))
        };
        let permutations = match self.permutations.as_deref() {
            None => None,
            Some("all") => Some(PermutationChoice::Named("all".into())),
            Some(s) => Some(PermutationChoice::Count(
                s.parse().map_err(|_| config_err(format!("--permutations: expected `all` or a count, got `{s}`")))?,
            )),
        };
        let scheme = match self.scheme.as_deref() {
            None => None,
            Some("hadamard") => Some(TrainingScheme::Hadamard),
            Some("bypass") => Some(TrainingScheme::Bypass),
            Some(s) => return Err(config_err(format!("--scheme: unknown scheme `{s}`"))),
        };
        Ok(SimSection {
            units: self.units,
            bits_per_unit: self.bits_per_unit,
            dims: self.dims,
            time_slots: self.time_slots,
            detector: self.detector.clone(),
            beam_width: self.beam_width,
            iterations: self.iterations,
            permutations,
            ebn0: grid(&self.ebn0, "ebn0")?.map(GridValue::List),
            min_errors: self.min_errors,
            max_trials: self.max_trials,
            max_seconds: self.max_seconds,
            mode: self.mode.clone(),
            batch: self.batch,
            energy: self.energy,
            seed: self.seed,
            field_bits: self.field_bits,
            code_length: self.code_length,
            code_dimension: self.code_dimension,
            trials: self.trials,
            pilot_n0: grid(&self.pilot_n0, "pilot-n0")?,
            reps: self.reps,
            scheme,
        })
    }
}

fn sim_table<'a>(cfg: &'a ConfigFile, name: &str) -> Option<&'a SimSection> {
    match name {
        "ser" => cfg.ser.as_ref(),
        "fer" => cfg.fer.as_ref(),
        "agree" => cfg.agree.as_ref(),
        "train-sweep" => cfg.train_sweep.as_ref(),
        _ => None,
    }
}

/// Merged section for `name` plus the resolved sweep spec.
fn resolve_sim(args: &SimArgs, name: &str, coded: bool) -> Result<(SimSection, engine::SweepSpec), CliError> {
    let layers = Layers::load(&args.io)?;
    let flags = args.section()?;
    let mut merged = SimSection::default();
    let mut found = false;
    for (_, _, doc) in &layers.docs {
        if let Some(s) = sim_table(doc, name) {
            merged.merge(s);
            found = true;
        }
    }
    if !found && !layers.docs.is_empty() {
        return Err(config_err(format!("no [{name}] table in the given preset or config")));
    }
    merged.merge(&flags);
    let spec = merged.to_sweep_spec(coded).map_err(|(key, msg)| {
        let set_by_flags = serde_json::to_value(&flags).ok().and_then(|v| v.get(key).cloned()).is_some_and(|v| !v.is_null());
        CliError::Config(layers.anchor(name, key, msg, set_by_flags))
    })?;
    Ok((merged.filled(), spec))
}

fn out_dir(io: &IoArgs) -> PathBuf {
    io.out_dir
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn write_outputs(
    io: &IoArgs,
    default_name: &str,
    csv_text: &str,
    schema: &str,
    resolved_toml: String,
    extra: serde_json::Value,
    argv: &[String],
) -> Result<RunOutput, CliError> {
    let dir = out_dir(io);
    std::fs::create_dir_all(&dir).map_err(|e| runtime(format!("cannot create {}: {e}", dir.display())))?;
    let csv_path = dir.join(io.output.clone().unwrap_or_else(|| format!("{default_name}.csv")));
    let manifest_path = csv_path.with_extension("manifest.json");
    std::fs::write(&csv_path, csv_text).map_err(|e| runtime(format!("cannot write {}: {e}", csv_path.display())))?;
    let manifest = json!({
        "tool": "lmbm",
        "version": env!("CARGO_PKG_VERSION"),
        "csv": csv_path.file_name().map(|s| s.to_string_lossy().into_owned()),
        "csv_schema": schema,
        "argv": argv,
        "config": resolved_toml,
        "details": extra,
    });
    std::fs::write(&manifest_path, serde_json::to_string_pretty(&manifest).unwrap() + "\n")
        .map_err(|e| runtime(format!("cannot write {}: {e}", manifest_path.display())))?;
    Ok(RunOutput { csv: csv_path, manifest: manifest_path })
}

/// The resolved settings as a config file that reproduces the run.
fn section_toml<T: serde::Serialize>(name: &str, section: &T) -> String {
    let mut table = toml::Table::new();
    table.insert(name.to_string(), toml::Value::try_from(section).expect("section serializes"));
    toml::to_string(&table).expect("table serializes")
}

fn report(p: &engine::CurvePoint) {
    eprintln!(
        "ebn0 {:>7} dB: {} trials, {} symbol errors, {} frame errors, ser {}, fer {}, {:.1}s{}",
        csv::sig10(p.eb_n0_db),
        p.trials,
        p.symbol_errors,
        p.frame_errors,
        csv::sig10(p.ser),
        csv::sig10(p.fer),
        p.seconds,
        if p.censored { " (censored)" } else { "" }
    );
}

fn run_sweep(args: &SimArgs, name: &str, argv: &[String]) -> Result<RunOutput, CliError> {
    let coded = name == "fer";
    let (section, spec) = resolve_sim(args, name, coded)?;
    let curve = if coded { engine::run_coded_sweep(&spec) } else { engine::run_uncoded_sweep(&spec) }.map_err(runtime)?;
    curve.iter().for_each(report);
    let details = json!({ "seed": spec.seed, "information_rate_bits": spec.information_rate(), "spec": spec });
    write_outputs(&args.io, name, &csv::write_curve_csv(&curve), csv::CURVE_SCHEMA, section_toml(name, &section), details, argv)
}

fn run_agree(args: &SimArgs, argv: &[String]) -> Result<RunOutput, CliError> {
    let (section, spec) = resolve_sim(args, "agree", false)?;
    let cfg = match &spec.detector {
        DetectorKind::Layered(cfg) => cfg.clone(),
        DetectorKind::Exhaustive => return Err(config_err("agree compares the layered detector; set detector = \"layered\"")),
    };
    let trials = section.trials.unwrap_or(1000);
    if trials == 0 {
        return Err(config_err("trials must be at least 1"));
    }
    let c = &spec.constellation;
    let mut out = String::from("ebn0_db,trials,agreements,agreement_rate,ci95_lo,ci95_hi\n");
    for (i, &db) in spec.eb_n0_grid.iter().enumerate() {
        let seed = rng::derive_seed(spec.seed, &[rng::domain::CONSTELLATION, i as u64]);
        let constellation =
            LayeredConstellation::generate(c.num_units, c.bits_per_unit, c.effective_dims(), seed).map_err(runtime)?;
        let mut params = ChannelParams::new(spec.n0_for(db), spec.energy);
        params.time_slots = c.time_slots;
        let trial_seed = rng::derive_seed(spec.seed, &[rng::domain::TRIAL, i as u64]);
        let rate = agreement_rate(&constellation, &params, &cfg, trials, trial_seed).map_err(runtime)?;
        let agreements = (rate * trials as f64).round() as u64;
        let (lo, hi) = wilson_interval(agreements, trials as u64);
        eprintln!("ebn0 {db} dB: agreement {}", csv::sig10(rate));
        writeln!(out, "{},{trials},{agreements},{},{},{}", csv::sig10(db), csv::sig10(rate), csv::sig10(lo), csv::sig10(hi))
            .unwrap();
    }
    let mut filled = section.clone();
    filled.trials = Some(trials);
    let details = json!({ "seed": spec.seed, "spec": spec });
    write_outputs(&args.io, "agree", &out, "lmbm-agree/1", section_toml("agree", &filled), details, argv)
}

fn run_train_sweep(args: &SimArgs, argv: &[String]) -> Result<RunOutput, CliError> {
    let (mut section, spec) = resolve_sim(args, "train-sweep", false)?;
    let levels = section.pilot_n0.clone().ok_or_else(|| config_err("train-sweep needs pilot_n0 levels"))?;
    if levels.is_empty() || levels.iter().any(|&l| !(l >= 0.0)) {
        return Err(config_err("pilot_n0 levels must be non-negative"));
    }
    let reps = *section.reps.get_or_insert(1);
    let scheme = *section.scheme.get_or_insert(TrainingScheme::Hadamard);
    if reps == 0 {
        return Err(config_err("reps must be at least 1"));
    }
    let mut out = format!("pilot_n0,{}\n", csv::CURVE_COLUMNS.join(","));
    for &level in &levels {
        let mut s = spec.clone();
        s.training = Some(TrainingSpec { pilot_n0: level, reps, scheme });
        eprintln!("pilot_n0 {level}");
        for p in engine::run_uncoded_sweep(&s).map_err(runtime)? {
            report(&p);
            writeln!(out, "{},{}", csv::sig10(level), csv::curve_row(&p)).unwrap();
        }
    }
    let details = json!({ "seed": spec.seed, "spec": spec });
    write_outputs(&args.io, "train-sweep", &out, "lmbm-train-sweep/1", section_toml("train-sweep", &section), details, argv)
}

fn merged_table<T: Default + Clone>(
    layers: &Layers,
    pick: impl Fn(&ConfigFile) -> Option<&T>,
    merge: impl Fn(&mut T, &T),
) -> T {
    let mut merged = T::default();
    for (_, _, doc) in &layers.docs {
        if let Some(s) = pick(doc) {
            merge(&mut merged, s);
        }
    }
    merged
}

fn run_analytic(args: &AnalyticArgs, argv: &[String]) -> Result<RunOutput, CliError> {
    let layers = Layers::load(&args.io)?;
    let mut s = merged_table(&layers, |d| d.analytic.as_ref(), AnalyticSection::merge);
    s.merge(&AnalyticSection {
        k: args.k,
        t: args.t.clone(),
        delta: args.delta.clone(),
        snr_db: args.snr_db.clone().map(GridValue::Text),
    });
    let k = *s.k.get_or_insert(16);
    if k == 0 {
        return Err(config_err("k must be at least 1"));
    }
    let snr_grid = s.snr_db.get_or_insert(GridValue::Text("-10..20".into())).values().map_err(|e| config_err(format!("snr_db: {e}")))?;
    let (values, use_t) = match (&s.t, &s.delta) {
        (Some(t), _) => (config::parse_int_grid(t).map_err(|e| config_err(format!("t: {e}")))?, true),
        (None, Some(d)) => (config::parse_int_grid(d).map_err(|e| config_err(format!("delta: {e}")))?, false),
        (None, None) => {
            s.t = Some("0..3".into());
            (vec![0, 1, 2, 3], true)
        }
    };
    if !use_t && values.contains(&0) {
        return Err(config_err("delta must be at least 1"));
    }
    let mut out = String::from("snr_db,delta_or_t,p_closed,p_asymptotic\n");
    for &v in &values {
        let delta = if use_t { v + 1 } else { v };
        for &db in &snr_grid {
            let p = ErrorModelParams::new(10f64.powf(db / 10.0), k, delta, delta - 1);
            writeln!(
                out,
                "{},{v},{},{}",
                csv::sig10(db),
                csv::sig10(pairwise_error_closed_form(&p)),
                csv::sig10(pairwise_error_asymptotic(&p))
            )
            .unwrap();
        }
    }
    let details = json!({ "column_delta_or_t": if use_t { "t" } else { "delta" } });
    write_outputs(&args.io, "analytic", &out, "lmbm-analytic/1", section_toml("analytic", &s), details, argv)
}

fn run_capacity(args: &CapacityArgs, argv: &[String]) -> Result<RunOutput, CliError> {
    let layers = Layers::load(&args.io)?;
    let mut s = merged_table(&layers, |d| d.capacity.as_ref(), CapacitySection::merge);
    s.merge(&CapacitySection {
        points: args.points,
        realizations: args.realizations,
        k: args.k,
        snr_db: args.snr_db,
        samples: args.samples,
        seed: args.seed,
    });
    let points = *s.points.get_or_insert(256);
    let realizations = *s.realizations.get_or_insert(1000);
    let k = *s.k.get_or_insert(1);
    let snr_db = *s.snr_db.get_or_insert(21.0);
    let samples = *s.samples.get_or_insert(2000);
    let seed = *s.seed.get_or_insert(1);
    if points < 2 || realizations == 0 || k == 0 || samples < 2 || !snr_db.is_finite() {
        return Err(config_err("capacity needs points >= 2, realizations >= 1, k >= 1, samples >= 2, finite snr_db"));
    }
    let snr = 10f64.powf(snr_db / 10.0);
    let rates: Vec<_> = (0..realizations as u64)
        .into_par_iter()
        .map(|r| {
            let mut g = rng::stream(seed, &[rng::domain::CONSTELLATION, r]);
            let pts = random_gaussian_points(&mut g, points, k);
            mutual_information_mc(&pts, snr, samples, rng::derive_seed(seed, &[rng::domain::CAPACITY, r]))
        })
        .collect();
    let mut out = String::from("realization,mi_bits,stderr\n");
    for (r, est) in rates.iter().enumerate() {
        writeln!(out, "{r},{},{}", csv::sig10(est.bits), csv::sig10(est.stderr)).unwrap();
    }
    let side = (points as f64).sqrt().round() as usize;
    let qam = (k == 1 && side * side == points).then(|| {
        let est = mutual_information_mc(&qam_constellation(points), snr, samples * 4, seed);
        json!({ "bits": est.bits, "stderr": est.stderr })
    });
    let details = json!({ "qam_reference": qam });
    write_outputs(&args.io, "capacity", &out, "lmbm-capacity/1", section_toml("capacity", &s), details, argv)
}

/// Reads a manifest's embedded config back into a config file.
pub fn config_from_manifest(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let cfg = v.get("config").and_then(|c| c.as_str()).ok_or_else(|| config_err("manifest has no config"))?;
    Ok(ConfigFile::parse(cfg, &path.display().to_string())?)
}
