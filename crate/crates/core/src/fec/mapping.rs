use crate::error::{Error, Result};
use crate::model::MessageVector;
use serde::{Deserialize, Serialize};

/// Packs GF(2^w) symbols into channel uses of `R = N * R_n` bits.
///
/// `R / w` consecutive field symbols form one `R`-bit integer (first symbol
/// most significant), which is then split into per-unit indices with unit 1
/// taking the most significant `R_n` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolMapping {
    pub field_bits: u32,
    pub num_units: usize,
    pub bits_per_unit: u32,
}

impl SymbolMapping {
    pub fn new(field_bits: u32, num_units: usize, bits_per_unit: u32) -> Result<Self> {
        let rate = num_units as u32 * bits_per_unit;
        if field_bits == 0 || rate == 0 || rate % field_bits != 0 || rate > 63 {
            return Err(Error::InvalidParameter(format!(
                "field width {field_bits} must divide the channel rate {rate}"
            )));
        }
        Ok(SymbolMapping { field_bits, num_units, bits_per_unit })
    }

    /// Bits per channel use, `R`.
    pub fn rate_bits(&self) -> u32 {
        self.num_units as u32 * self.bits_per_unit
    }

    pub fn symbols_per_channel_use(&self) -> usize {
        (self.rate_bits() / self.field_bits) as usize
    }

    /// Channel uses needed for a codeword of `length` symbols.
    pub fn channel_uses(&self, length: usize) -> Result<usize> {
        let per = self.symbols_per_channel_use();
        if length % per != 0 {
            return Err(Error::InvalidParameter(format!(
                "codeword length {length} is not a multiple of {per} symbols per channel use"
            )));
        }
        Ok(length / per)
    }

    pub fn codeword_to_messages(&self, codeword: &[u16]) -> Result<Vec<MessageVector>> {
        self.channel_uses(codeword.len())?;
        let w = self.field_bits;
        Ok(codeword
            .chunks(self.symbols_per_channel_use())
            .map(|chunk| {
                let value = chunk.iter().fold(0u64, |acc, &s| (acc << w) | s as u64);
                MessageVector::from_index(value, self.num_units, self.bits_per_unit)
            })
            .collect())
    }

    /// Inverse of [`SymbolMapping::codeword_to_messages`].
    pub fn messages_to_codeword(&self, messages: &[MessageVector]) -> Vec<u16> {
        let per = self.symbols_per_channel_use();
        let w = self.field_bits;
        let mask = (1u64 << w) - 1;
        let mut out = Vec::with_capacity(messages.len() * per);
        for m in messages {
            let value = m.to_index(self.bits_per_unit);
            for k in (0..per).rev() {
                out.push(((value >> (k as u32 * w)) & mask) as u16);
            }
        }
        out
    }
}
