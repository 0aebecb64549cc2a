//! Curve CSV files.
//!
//! Schema `lmbm-curve/1`: the header row below, then one row per curve
//! point. Reals are written with 10 significant digits. In coded runs
//! `trials` counts channel uses and `frames` counts codewords.

use crate::engine::CurvePoint;
use std::fmt::Write;

pub const CURVE_SCHEMA: &str = "lmbm-curve/1";

pub const CURVE_COLUMNS: [&str; 12] = [
    "ebn0_db",
    "trials",
    "sym_errors",
    "frame_errors",
    "ser",
    "fer",
    "ci95_lo",
    "ci95_hi",
    "seconds",
    "frames",
    "decoded_sym_errors",
    "censored",
];

/// `x` with 10 significant digits, positional when that stays short.
pub fn sig10(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.9e}");
    let exp: i32 = sci.split_once('e').map(|(_, e)| e.parse().unwrap()).unwrap();
    if (-5..10).contains(&exp) {
        let decimals = (9 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let (mantissa, e) = sci.split_once('e').unwrap();
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{e}")
    }
}

pub fn curve_row(p: &CurvePoint) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        sig10(p.eb_n0_db),
        p.trials,
        p.symbol_errors,
        p.frame_errors,
        sig10(p.ser),
        sig10(p.fer),
        sig10(p.ci95_lo),
        sig10(p.ci95_hi),
        sig10(p.seconds),
        p.frames,
        p.decoded_symbol_errors,
        p.censored as u8,
    )
}

pub fn write_curve_csv(points: &[CurvePoint]) -> String {
    let mut out = CURVE_COLUMNS.join(",");
    out.push('\n');
    for p in points {
        writeln!(out, "{}", curve_row(p)).unwrap();
    }
    out
}

/// Reads a curve back. Throughput is recomputed from `trials / seconds`.
pub fn parse_curve_csv(text: &str) -> Result<Vec<CurvePoint>, String> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or("empty file")?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns != CURVE_COLUMNS {
        return Err(format!("line 1: expected header `{}`", CURVE_COLUMNS.join(",")));
    }
    lines
        .map(|(i, line)| {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != CURVE_COLUMNS.len() {
                return Err(format!("line {}: expected {} fields, found {}", i + 1, CURVE_COLUMNS.len(), f.len()));
            }
            let real = |k: usize| f[k].parse::<f64>().map_err(|_| format!("line {}: bad {}", i + 1, CURVE_COLUMNS[k]));
            let int = |k: usize| f[k].parse::<u64>().map_err(|_| format!("line {}: bad {}", i + 1, CURVE_COLUMNS[k]));
            let trials = int(1)?;
            let seconds = real(8)?;
            Ok(CurvePoint {
                eb_n0_db: real(0)?,
                trials,
                symbol_errors: int(2)?,
                frame_errors: int(3)?,
                ser: real(4)?,
                fer: real(5)?,
                ci95_lo: real(6)?,
                ci95_hi: real(7)?,
                seconds,
                frames: int(9)?,
                decoded_symbol_errors: int(10)?,
                censored: match f[11] {
                    "0" => false,
                    "1" => true,
                    _ => return Err(format!("line {}: bad censored flag", i + 1)),
                },
                throughput_symbols_per_sec: if seconds > 0.0 { trials as f64 / seconds } else { 0.0 },
            })
        })
        .collect()
}
