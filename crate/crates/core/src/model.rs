//! Layered constellations, the AWGN channel and energy bookkeeping.
//!
//! A layered constellation stores `N` tables of `2^R_n` constituent vectors.
//! Constellation points are never materialised: the point for message
//! `(m_1, ..., m_N)` is the sum of one constituent from each table, added in
//! unit order `1..N` starting from the zero vector.

use crate::error::{Error, Result};
use crate::rng::{self, SimRng};
use crate::vector::ComplexVector;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::fmt::Write as _;
use std::str::FromStr;

/// Largest supported total rate `N * R_n`, so message indices fit in a `u64`.
pub const MAX_RATE_BITS: u32 = 63;

/// Immutable table of per-unit constituent vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LayeredConstellation {
    num_units: usize,
    bits_per_unit: u32,
    dims: usize,
    // One flat row-major table per unit: index-major, then component.
    tables: Vec<Vec<Complex64>>,
}

impl LayeredConstellation {
    /// Draws every constituent component i.i.d. circularly-symmetric complex
    /// Gaussian with unit variance. Deterministic in `seed`.
    pub fn generate(num_units: usize, bits_per_unit: u32, dims: usize, seed: u64) -> Result<Self> {
        let mut rng = rng::stream(seed, &[rng::domain::CONSTELLATION]);
        Self::generate_with_rng(num_units, bits_per_unit, dims, &mut rng)
    }

    pub fn generate_with_rng(
        num_units: usize,
        bits_per_unit: u32,
        dims: usize,
        rng: &mut SimRng,
    ) -> Result<Self> {
        if num_units == 0 || bits_per_unit == 0 || dims == 0 {
            return Err(Error::InvalidParameter(format!(
                "constellation needs N >= 1, R_n >= 1, K >= 1 (got N={num_units}, R_n={bits_per_unit}, K={dims})"
            )));
        }
        check_rate(num_units, bits_per_unit)?;
        let size = 1usize << bits_per_unit;
        let tables = (0..num_units)
            .map(|_| (0..size * dims).map(|_| complex_gaussian(rng, 1.0)).collect())
            .collect();
        Ok(LayeredConstellation { num_units, bits_per_unit, dims, tables })
    }

    /// Wraps explicit constituent tables, one table per unit.
    ///
    /// Every table must hold the same power-of-two number of vectors (a single
    /// vector is allowed), and every vector must have the same length.
    pub fn from_tables(tables: Vec<Vec<ComplexVector>>) -> Result<Self> {
        if tables.is_empty() {
            return Err(Error::InvalidParameter("no constituent tables".into()));
        }
        let size = tables[0].len();
        if size == 0 || !size.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("table size {size} is not a power of two")));
        }
        let dims = tables[0][0].len();
        if dims == 0 {
            return Err(Error::InvalidParameter("constituent vectors must be non-empty".into()));
        }
        let mut flat = Vec::with_capacity(tables.len());
        for (unit, table) in tables.iter().enumerate() {
            if table.len() != size {
                return Err(Error::InvalidParameter(format!(
                    "unit {unit} has {} constituents, expected {size}",
                    table.len()
                )));
            }
            let mut row = Vec::with_capacity(size * dims);
            for v in table {
                if v.len() != dims {
                    return Err(Error::DimensionMismatch { expected: dims, actual: v.len() });
                }
                row.extend_from_slice(v.as_slice());
            }
            flat.push(row);
        }
        let bits_per_unit = size.trailing_zeros();
        check_rate(tables.len(), bits_per_unit)?;
        Ok(LayeredConstellation { num_units: tables.len(), bits_per_unit, dims, tables: flat })
    }

    /// Convenience constructor for real scalar tables (`K = 1`).
    pub fn from_real_tables(tables: &[&[f64]]) -> Result<Self> {
        Self::from_tables(
            tables
                .iter()
                .map(|t| t.iter().map(|&x| ComplexVector::real_scalar(x)).collect())
                .collect(),
        )
    }

    pub fn num_units(&self) -> usize {
        self.num_units
    }

    pub fn bits_per_unit(&self) -> u32 {
        self.bits_per_unit
    }

    /// Receive dimensionality `K`.
    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Constituents per unit, `2^R_n`.
    pub fn table_size(&self) -> usize {
        1 << self.bits_per_unit
    }

    /// Total rate `R = N * R_n` in bits per channel use.
    pub fn rate_bits(&self) -> u32 {
        self.num_units as u32 * self.bits_per_unit
    }

    /// Number of implicit constellation points `M = 2^R`.
    pub fn cardinality(&self) -> u64 {
        1u64 << self.rate_bits()
    }

    /// Number of stored constituent vectors, `N * 2^R_n`.
    pub fn stored_vectors(&self) -> usize {
        self.num_units * self.table_size()
    }

    #[inline]
    pub fn constituent(&self, unit: usize, index: usize) -> &[Complex64] {
        let start = index * self.dims;
        &self.tables[unit][start..start + self.dims]
    }

    pub fn constituent_vector(&self, unit: usize, index: usize) -> ComplexVector {
        ComplexVector::from_slice(self.constituent(unit, index))
    }

    pub(crate) fn table(&self, unit: usize) -> &[Complex64] {
        &self.tables[unit]
    }

    pub(crate) fn table_mut(&mut self, unit: usize) -> &mut [Complex64] {
        &mut self.tables[unit]
    }

    fn check_message(&self, m: &MessageVector) -> Result<()> {
        if m.len() != self.num_units {
            return Err(Error::DimensionMismatch { expected: self.num_units, actual: m.len() });
        }
        let size = self.table_size();
        for (unit, &index) in m.indices().iter().enumerate() {
            if index as usize >= size {
                return Err(Error::IndexOutOfRange { unit, index, size });
            }
        }
        Ok(())
    }

    /// `sum_n s_n * h^n(m_n)`, accumulated in unit order.
    pub fn map_to_point(&self, m: &MessageVector, s: &SbmSymbolVector) -> Result<ComplexVector> {
        self.check_message(m)?;
        if s.len() != self.num_units {
            return Err(Error::DimensionMismatch { expected: self.num_units, actual: s.len() });
        }
        let mut acc = ComplexVector::zeros(self.dims);
        for (unit, (&index, &weight)) in m.indices().iter().zip(s.weights()).enumerate() {
            for (a, h) in acc.0.iter_mut().zip(self.constituent(unit, index as usize)) {
                *a += weight * h;
            }
        }
        Ok(acc)
    }

    /// Constellation point with all-ones source weights.
    pub fn point(&self, m: &MessageVector) -> Result<ComplexVector> {
        self.check_message(m)?;
        let mut acc = ComplexVector::zeros(self.dims);
        for (unit, &index) in m.indices().iter().enumerate() {
            acc.add_assign_slice(self.constituent(unit, index as usize));
        }
        Ok(acc)
    }

    /// Uniformly random message for this constellation.
    pub fn random_message<R: Rng + ?Sized>(&self, rng: &mut R) -> MessageVector {
        let size = self.table_size() as u32;
        MessageVector((0..self.num_units).map(|_| rng.random_range(0..size)).collect())
    }

    /// Serialises to the plain-text table format:
    ///
    /// ```text
    /// # lmbm-constellation v1
    /// N R_n K
    /// re im re im ...      (one line per constituent; unit-major, then index)
    /// ```
    pub fn to_table_text(&self) -> String {
        let mut out = String::new();
        out.push_str("# lmbm-constellation v1\n");
        let _ = writeln!(out, "{} {} {}", self.num_units, self.bits_per_unit, self.dims);
        for unit in 0..self.num_units {
            for index in 0..self.table_size() {
                let row: Vec<String> = self
                    .constituent(unit, index)
                    .iter()
                    .map(|c| format!("{:?} {:?}", c.re, c.im))
                    .collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
        out
    }

    pub fn from_table_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Format("missing header".into()))?;
        let fields: Vec<usize> = header
            .split_whitespace()
            .map(|x| x.parse().map_err(|_| Error::Format(format!("bad header field {x:?}"))))
            .collect::<Result<_>>()?;
        let [num_units, bits, dims] = fields[..] else {
            return Err(Error::Format("header must be `N R_n K`".into()));
        };
        if bits > 32 {
            return Err(Error::Format(format!("R_n = {bits} is too large")));
        }
        let size = 1usize << bits;
        let mut tables = Vec::with_capacity(num_units);
        for _ in 0..num_units {
            let mut table = Vec::with_capacity(size);
            for _ in 0..size {
                let line = lines.next().ok_or_else(|| Error::Format("truncated table".into()))?;
                let nums: Vec<f64> = line
                    .split_whitespace()
                    .map(|x| f64::from_str(x).map_err(|_| Error::Format(format!("bad number {x:?}"))))
                    .collect::<Result<_>>()?;
                if nums.len() != 2 * dims {
                    return Err(Error::Format(format!("expected {} numbers, got {}", 2 * dims, nums.len())));
                }
                table.push(ComplexVector(
                    nums.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect(),
                ));
            }
            tables.push(table);
        }
        if lines.next().is_some() {
            return Err(Error::Format("trailing rows after table".into()));
        }
        Self::from_tables(tables)
    }
}

fn check_rate(num_units: usize, bits_per_unit: u32) -> Result<()> {
    if (num_units as u64) * (bits_per_unit as u64) > MAX_RATE_BITS as u64 {
        return Err(Error::InvalidParameter(format!(
            "total rate N*R_n = {} exceeds {MAX_RATE_BITS} bits",
            num_units as u64 * bits_per_unit as u64
        )));
    }
    Ok(())
}

/// Circularly-symmetric complex Gaussian with `E|x|^2 = variance`.
#[inline]
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let sigma = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(sigma * re, sigma * im)
}

/// Per-unit constituent indices `(m_1, ..., m_N)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MessageVector(pub Vec<u32>);

impl MessageVector {
    pub fn new(indices: Vec<u32>) -> Self {
        MessageVector(indices)
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Splits an integer in `[0, 2^(N R_n))` into unit indices. Unit 1 takes
    /// the most significant bits.
    pub fn from_index(index: u64, num_units: usize, bits_per_unit: u32) -> Self {
        let mask = (1u64 << bits_per_unit) - 1;
        MessageVector(
            (0..num_units)
                .map(|n| {
                    let shift = bits_per_unit as usize * (num_units - 1 - n);
                    ((index >> shift) & mask) as u32
                })
                .collect(),
        )
    }

    /// Inverse of [`MessageVector::from_index`].
    pub fn to_index(&self, bits_per_unit: u32) -> u64 {
        self.0.iter().fold(0u64, |acc, &m| (acc << bits_per_unit) | m as u64)
    }
}

/// Unit-modulus source-modulation weights, one per transmit unit.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmSymbolVector(Vec<Complex64>);

impl SbmSymbolVector {
    pub fn new(weights: Vec<Complex64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| (w.norm() - 1.0).abs() > 1e-12) {
            return Err(Error::InvalidParameter(format!("weight {w} is not unit-modulus")));
        }
        Ok(SbmSymbolVector(weights))
    }

    pub fn all_ones(num_units: usize) -> Self {
        SbmSymbolVector(vec![Complex64::new(1.0, 0.0); num_units])
    }

    /// Weights drawn from `alphabet` by per-unit symbol index.
    pub fn from_symbols(alphabet: SbmAlphabet, symbols: &[u32]) -> Result<Self> {
        symbols.iter().map(|&s| alphabet.symbol(s)).collect::<Result<Vec<_>>>().map(SbmSymbolVector)
    }

    pub fn weights(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Linear phase modulation applied on top of the channel-state selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SbmAlphabet {
    /// Pure media-based modulation, weight always `+1`.
    None,
    Bpsk,
    Qpsk,
}

impl SbmAlphabet {
    pub fn size(self) -> u32 {
        match self {
            SbmAlphabet::None => 1,
            SbmAlphabet::Bpsk => 2,
            SbmAlphabet::Qpsk => 4,
        }
    }

    /// Extra bits per unit carried by the phase.
    pub fn bits(self) -> u32 {
        self.size().trailing_zeros()
    }

    pub fn symbol(self, index: u32) -> Result<Complex64> {
        if index >= self.size() {
            return Err(Error::InvalidParameter(format!("symbol {index} outside {self:?} alphabet")));
        }
        Ok(match index {
            0 => Complex64::new(1.0, 0.0),
            1 if self == SbmAlphabet::Bpsk => Complex64::new(-1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        })
    }

    /// Total bits per channel use for `c` with this alphabet on every unit.
    pub fn total_rate_bits(self, c: &LayeredConstellation) -> u32 {
        c.num_units() as u32 * (c.bits_per_unit() + self.bits())
    }
}

/// Noise level, per-unit transmit energy and time-slot multiplier.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChannelParams {
    /// Noise energy per complex receive dimension.
    pub n0: f64,
    /// Energy per transmit unit.
    pub energy: f64,
    /// Silent-slot multiplier on the receive dimensionality.
    pub time_slots: usize,
}

impl ChannelParams {
    pub fn new(n0: f64, energy: f64) -> Self {
        ChannelParams { n0, energy, time_slots: 1 }
    }

    /// Total symbol energy `Es = N * E`.
    pub fn symbol_energy(&self, num_units: usize) -> f64 {
        num_units as f64 * self.energy
    }

    /// Effective receive dimensionality `Q = D_slots * K`.
    pub fn effective_dims(&self, receive_dims: usize) -> usize {
        self.time_slots * receive_dims
    }
}

/// `sqrt(E) * point + z` with `E|z_k|^2 = N0`.
pub fn transmit(point: &ComplexVector, params: &ChannelParams, seed: u64) -> ComplexVector {
    let mut rng = rng::stream(seed, &[rng::domain::TRIAL]);
    transmit_with_rng(point, params, &mut rng)
}

pub fn transmit_with_rng<R: Rng + ?Sized>(point: &ComplexVector, params: &ChannelParams, rng: &mut R) -> ComplexVector {
    let amplitude = params.energy.sqrt();
    ComplexVector(
        point
            .as_slice()
            .iter()
            .map(|&c| {
                let noise = if params.n0 > 0.0 { complex_gaussian(rng, params.n0) } else { Complex64::new(0.0, 0.0) };
                c * amplitude + noise
            })
            .collect(),
    )
}

/// Noise level for a target `Eb/N0` (dB), from `Eb/N0 = N E / (R N0)`.
pub fn eb_n0_to_n0(eb_n0_db: f64, num_units: usize, energy: f64, rate_bits: u32) -> f64 {
    num_units as f64 * energy / (rate_bits as f64 * db_to_linear(eb_n0_db))
}

/// Inverse of [`eb_n0_to_n0`].
pub fn n0_to_eb_n0_db(n0: f64, num_units: usize, energy: f64, rate_bits: u32) -> f64 {
    linear_to_db(num_units as f64 * energy / (rate_bits as f64 * n0))
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(LayeredConstellation::generate(0, 2, 2, 1).is_err());
        assert!(LayeredConstellation::generate(2, 0, 2, 1).is_err());
        assert!(LayeredConstellation::generate(2, 2, 0, 1).is_err());
        assert!(LayeredConstellation::generate(8, 8, 1, 1).is_err());
    }

    #[test]
    fn rejects_ragged_or_non_power_of_two_tables() {
        assert!(LayeredConstellation::from_real_tables(&[&[1.0, 2.0, 3.0]]).is_err());
        assert!(LayeredConstellation::from_real_tables(&[&[1.0, 2.0], &[1.0]]).is_err());
        let ragged = vec![vec![ComplexVector(vec![c(1.0), c(2.0)]), ComplexVector(vec![c(1.0)])]];
        assert!(LayeredConstellation::from_tables(ragged).is_err());
        assert!(LayeredConstellation::from_tables(vec![]).is_err());
    }

    #[test]
    fn generate_is_seeded() {
        let a = LayeredConstellation::generate(2, 3, 4, 99).unwrap();
        let b = LayeredConstellation::generate(2, 3, 4, 99).unwrap();
        let d = LayeredConstellation::generate(2, 3, 4, 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, d);
    }

    #[test]
    fn unit_variance_convention() {
        let c = LayeredConstellation::generate(1, 8, 1, 5).unwrap();
        let powers: Vec<f64> = (0..256).map(|i| c.constituent(0, i)[0].norm_sqr()).collect();
        let mean = powers.iter().sum::<f64>() / 256.0;
        let var = powers.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / 255.0;
        let se = (var / 256.0).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn large_layered_constellation_is_stored_compactly() {
        let c = LayeredConstellation::generate(4, 8, 16, 3).unwrap();
        assert_eq!(c.cardinality(), 1u64 << 32);
        assert_eq!(c.stored_vectors(), 1024);
        assert_eq!(c.rate_bits(), 32);
    }

    #[test]
    fn two_state_channel_with_bpsk() {
        let table = LayeredConstellation::from_real_tables(&[&[0.5, 1.5]]).unwrap();
        assert_eq!(table.num_units(), 1);
        assert_eq!(table.bits_per_unit(), 1);
        let mut points = Vec::new();
        for m in 0..2 {
            for s in 0..2 {
                let weights = SbmSymbolVector::from_symbols(SbmAlphabet::Bpsk, &[s]).unwrap();
                let p = table.map_to_point(&MessageVector(vec![m]), &weights).unwrap();
                points.push(p[0].re);
            }
        }
        points.sort_by(f64::total_cmp);
        assert_eq!(points, vec![-1.5, -0.5, 0.5, 1.5]);
        let dmin = points.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        assert_eq!(dmin, 1.0);
        // One unit of energy per transmission: |s|^2 = 1.
        assert_eq!(SbmAlphabet::Bpsk.total_rate_bits(&table), 2);

        let minus = SbmSymbolVector::from_symbols(SbmAlphabet::Bpsk, &[1]).unwrap();
        let p = table.map_to_point(&MessageVector(vec![0]), &minus).unwrap();
        assert_eq!(p[0], c(-0.5));
    }

    #[test]
    fn degenerate_single_point() {
        let table = LayeredConstellation::from_real_tables(&[&[0.0]]).unwrap();
        assert_eq!(table.cardinality(), 1);
        assert_eq!(table.point(&MessageVector(vec![0])).unwrap()[0], c(0.0));
    }

    #[test]
    fn direct_summation() {
        let table = LayeredConstellation::from_real_tables(&[&[1.0, -1.0], &[2.0, -2.0]]).unwrap();
        let pts: Vec<f64> = (0..4)
            .map(|i| table.point(&MessageVector::from_index(i, 2, 1)).unwrap()[0].re)
            .collect();
        assert_eq!(pts, vec![3.0, -1.0, 1.0, -3.0]);
    }

    #[test]
    fn single_unit_point_is_the_constituent() {
        let c = LayeredConstellation::generate(1, 4, 3, 8).unwrap();
        for m in 0..16 {
            let p = c.map_to_point(&MessageVector(vec![m]), &SbmSymbolVector::all_ones(1)).unwrap();
            assert_eq!(p.as_slice(), c.constituent(0, m as usize));
        }
    }

    #[test]
    fn map_rejects_out_of_range() {
        let c = LayeredConstellation::generate(2, 2, 2, 8).unwrap();
        assert!(matches!(c.point(&MessageVector(vec![0, 4])), Err(Error::IndexOutOfRange { .. })));
        assert!(c.point(&MessageVector(vec![0])).is_err());
        assert!(c.map_to_point(&MessageVector(vec![0, 0]), &SbmSymbolVector::all_ones(3)).is_err());
    }

    #[test]
    fn sbm_weights_must_be_unit_modulus() {
        assert!(SbmSymbolVector::new(vec![Complex64::new(0.5, 0.0)]).is_err());
        assert!(SbmSymbolVector::new(vec![Complex64::new(0.0, -1.0)]).is_ok());
        for s in 0..4 {
            assert!((SbmAlphabet::Qpsk.symbol(s).unwrap().norm() - 1.0).abs() < 1e-15);
        }
        assert!(SbmAlphabet::Bpsk.symbol(2).is_err());
    }

    #[test]
    fn message_index_roundtrip() {
        let m = MessageVector::from_index(0xdead_beef, 4, 8);
        assert_eq!(m.indices(), &[0xde, 0xad, 0xbe, 0xef]);
        assert_eq!(m.to_index(8), 0xdead_beef);
    }

    #[test]
    fn noiseless_transmit_is_scaled_point() {
        let point = ComplexVector(vec![Complex64::new(1.0, -2.0), Complex64::new(0.25, 0.0)]);
        let out = transmit(&point, &ChannelParams::new(0.0, 4.0), 1);
        assert_eq!(out, point.scale_real(2.0));
    }

    #[test]
    fn transmit_is_deterministic() {
        let point = ComplexVector::zeros(4);
        let p = ChannelParams::new(1.0, 1.0);
        assert_eq!(transmit(&point, &p, 77), transmit(&point, &p, 77));
        assert_ne!(transmit(&point, &p, 77), transmit(&point, &p, 78));
    }

    #[test]
    fn noise_power_convention() {
        let mut rng = SimRng::seed_from_u64(11);
        let p = ChannelParams::new(1.0, 1.0);
        let zero = ComplexVector::zeros(1);
        let n = 100_000;
        let samples: Vec<f64> = (0..n).map(|_| transmit_with_rng(&zero, &p, &mut rng)[0].norm_sqr()).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn eb_n0_conversion() {
        assert!((eb_n0_to_n0(0.0, 1, 1.0, 1) - 1.0).abs() < 1e-15);
        // Eb/N0 = 1/8 linear with N = 4, E = 1, R = 32 gives N0 = 1.
        let db = linear_to_db(1.0 / 8.0);
        assert!((eb_n0_to_n0(db, 4, 1.0, 32) - 1.0).abs() < 1e-12);
        // Reference value from 40-digit arithmetic.
        let n0 = eb_n0_to_n0(-4.5, 4, 1.0, 32);
        assert!((n0 - 0.352_297_866_408_056_7).abs() < 1e-14);
        // Second path: Eb/N0 = Es / (R N0).
        let es_over_n0 = 4.0 / n0;
        assert!((es_over_n0 / 32.0 - 10f64.powf(-0.45)).abs() < 1e-14);
    }

    #[test]
    fn table_text_roundtrip_is_exact() {
        let c = LayeredConstellation::generate(3, 2, 2, 21).unwrap();
        let text = c.to_table_text();
        assert!(text.lines().nth(1).unwrap() == "3 2 2");
        assert_eq!(LayeredConstellation::from_table_text(&text).unwrap(), c);
    }

    #[test]
    fn table_text_rejects_garbage() {
        assert!(LayeredConstellation::from_table_text("").is_err());
        assert!(LayeredConstellation::from_table_text("1 1 1\n0 0\n").is_err());
        assert!(LayeredConstellation::from_table_text("1 1 1\n0 0\n1 x\n").is_err());
        assert!(LayeredConstellation::from_table_text("1 0 1\n0 0\n1 1\n").is_err());
    }
}
