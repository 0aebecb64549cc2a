use super::gf::GaloisField;
use crate::error::{Error, Result};
use std::sync::Arc;

/// Systematic Reed-Solomon code of length `L` and dimension `D` over
/// GF(2^w), punctured from the narrow-sense mother code of length `2^w - 1`.
///
/// The mother code has generator `prod_{i=1}^{2^w-1-D} (x - alpha^i)`.
/// Codewords are laid out highest degree first: `D` message symbols followed
/// by parity. Puncturing drops the trailing parity symbols, and the decoder
/// treats them as erasures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RsCode {
    field: Arc<GaloisField>,
    length: usize,
    dimension: usize,
    /// Generator coefficients, lowest degree first, monic.
    generator: Vec<u16>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecodeStatus {
    /// Decoding succeeded after changing this many received symbols.
    Corrected(usize),
    /// No codeword within the correction radius.
    Failure,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutcome {
    /// Decoded information symbols; on failure, the uncorrected systematic
    /// part of the received word.
    pub message: Vec<u16>,
    pub status: DecodeStatus,
}

impl DecodeOutcome {
    pub fn is_failure(&self) -> bool {
        self.status == DecodeStatus::Failure
    }
}

impl RsCode {
    pub fn new(field_bits: u32, length: usize, dimension: usize) -> Result<Self> {
        Self::with_field(Arc::new(GaloisField::new(field_bits)?), length, dimension)
    }

    pub fn with_field(field: Arc<GaloisField>, length: usize, dimension: usize) -> Result<Self> {
        if length > field.order() {
            return Err(Error::InvalidParameter(format!(
                "length {length} exceeds 2^{} - 1",
                field.bits()
            )));
        }
        if dimension == 0 || dimension >= length {
            return Err(Error::InvalidParameter(format!("need 0 < D < L (got L={length}, D={dimension})")));
        }
        let mother_parity = field.order() - dimension;
        let mut generator = vec![1u16];
        for i in 1..=mother_parity {
            let root = field.alpha_pow(i as i64);
            let mut next = vec![0u16; generator.len() + 1];
            for (k, &g) in generator.iter().enumerate() {
                next[k + 1] ^= g;
                next[k] ^= field.mul(g, root);
            }
            generator = next;
        }
        Ok(RsCode { field, length, dimension, generator })
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    pub fn field_bits(&self) -> u32 {
        self.field.bits()
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Singleton bound, met with equality.
    pub fn min_distance(&self) -> usize {
        self.length - self.dimension + 1
    }

    /// Guaranteed correction radius `floor((d_min - 1) / 2)`.
    pub fn t(&self) -> usize {
        (self.min_distance() - 1) / 2
    }

    fn mother_length(&self) -> usize {
        self.field.order()
    }

    fn mother_parity(&self) -> usize {
        self.mother_length() - self.dimension
    }

    fn check_symbols(&self, symbols: &[u16]) -> Result<()> {
        if let Some(&s) = symbols.iter().find(|&&s| !self.field.contains(s as u32)) {
            return Err(Error::OutOfField { symbol: s as u32, bits: self.field.bits() });
        }
        Ok(())
    }

    /// Systematic encoding; the first `D` output symbols are the message.
    pub fn encode(&self, message: &[u16]) -> Result<Vec<u16>> {
        if message.len() != self.dimension {
            return Err(Error::DimensionMismatch { expected: self.dimension, actual: message.len() });
        }
        self.check_symbols(message)?;
        let f = &self.field;
        let parity_len = self.mother_parity();
        // Long division of m(x) x^(n-D) by g(x) with an LFSR; `reg[0]` holds
        // the highest-degree remainder coefficient.
        let mut reg = vec![0u16; parity_len];
        for &m in message {
            let feedback = m ^ reg[0];
            reg.rotate_left(1);
            reg[parity_len - 1] = 0;
            if feedback != 0 {
                for (k, r) in reg.iter_mut().enumerate() {
                    // coefficient of x^(parity_len - 1 - k) in g, excluding the monic term
                    *r ^= f.mul(feedback, self.generator[parity_len - 1 - k]);
                }
            }
        }
        let mut codeword = Vec::with_capacity(self.length);
        codeword.extend_from_slice(message);
        codeword.extend_from_slice(&reg[..self.length - self.dimension]);
        Ok(codeword)
    }

    /// Bounded-distance hard-decision decoding (errors-and-erasures
    /// Berlekamp-Massey, Chien search, Forney).
    pub fn decode(&self, received: &[u16]) -> Result<DecodeOutcome> {
        if received.len() != self.length {
            return Err(Error::DimensionMismatch { expected: self.length, actual: received.len() });
        }
        self.check_symbols(received)?;
        let f = &self.field;
        let n = self.mother_length();
        let two_t = self.mother_parity();
        let failure = || DecodeOutcome { message: received[..self.dimension].to_vec(), status: DecodeStatus::Failure };

        let mut word = received.to_vec();
        word.resize(n, 0);
        // Position j carries the coefficient of x^(n-1-j); its locator is
        // alpha^(n-1-j).
        let locator = |j: usize| f.alpha_pow((n - 1 - j) as i64);
        let erasures: Vec<usize> = (self.length..n).collect();

        let syndromes: Vec<u16> = (1..=two_t).map(|i| f.eval_desc(&word, f.alpha_pow(i as i64))).collect();
        if erasures.is_empty() && syndromes.iter().all(|&s| s == 0) {
            return Ok(DecodeOutcome { message: received[..self.dimension].to_vec(), status: DecodeStatus::Corrected(0) });
        }

        // Erasure locator Gamma(x) = prod (1 - X_j x), lowest degree first.
        let mut lambda = vec![1u16];
        for &j in &erasures {
            let x = locator(j);
            let mut next = vec![0u16; lambda.len() + 1];
            for (k, &c) in lambda.iter().enumerate() {
                next[k] ^= c;
                next[k + 1] ^= f.mul(c, x);
            }
            lambda = next;
        }
        let s = erasures.len();
        let mut prev = lambda.clone();
        let mut degree = s;
        for r in (s + 1)..=two_t {
            let discrepancy = (0..lambda.len().min(r))
                .fold(0u16, |acc, i| acc ^ f.mul(lambda[i], syndromes[r - 1 - i]));
            // prev <- x * prev happens in every branch.
            prev.insert(0, 0);
            if discrepancy == 0 {
                continue;
            }
            let mut next = lambda.clone();
            if next.len() < prev.len() {
                next.resize(prev.len(), 0);
            }
            for (k, &b) in prev.iter().enumerate() {
                next[k] ^= f.mul(discrepancy, b);
            }
            if 2 * degree < r + s {
                let inv = f.inv(discrepancy);
                prev = lambda.iter().map(|&c| f.mul(c, inv)).collect();
                degree = r + s - degree;
            }
            lambda = next;
        }
        while lambda.len() > 1 && *lambda.last().unwrap() == 0 {
            lambda.pop();
        }
        let lambda_degree = lambda.len() - 1;
        if lambda_degree != degree || lambda_degree < s || 2 * (lambda_degree - s) + s > two_t {
            return Ok(failure());
        }

        let roots: Vec<usize> = (0..n)
            .filter(|&j| f.eval_asc(&lambda, f.inv(locator(j))) == 0)
            .collect();
        if roots.len() != lambda_degree {
            return Ok(failure());
        }

        // Omega(x) = S(x) Lambda(x) mod x^(2t), S(x) = sum S_(i+1) x^i.
        let mut omega = vec![0u16; two_t];
        for (i, &l) in lambda.iter().enumerate() {
            for (k, &syn) in syndromes.iter().enumerate() {
                if i + k < two_t {
                    omega[i + k] ^= f.mul(l, syn);
                }
            }
        }
        // Formal derivative: only odd-degree terms survive in characteristic 2.
        let derivative: Vec<u16> =
            lambda.iter().enumerate().skip(1).map(|(i, &c)| if i % 2 == 1 { c } else { 0 }).collect();

        let mut corrected = 0usize;
        for &j in &roots {
            let x_inv = f.inv(locator(j));
            let denom = f.eval_asc(&derivative, x_inv);
            if denom == 0 {
                return Ok(failure());
            }
            let magnitude = f.div(f.eval_asc(&omega, x_inv), denom);
            if magnitude != 0 {
                word[j] ^= magnitude;
                if j < self.length {
                    corrected += 1;
                }
            }
        }
        if (1..=two_t).any(|i| f.eval_desc(&word, f.alpha_pow(i as i64)) != 0) || corrected > self.t() {
            return Ok(failure());
        }
        Ok(DecodeOutcome { message: word[..self.dimension].to_vec(), status: DecodeStatus::Corrected(corrected) })
    }
}
