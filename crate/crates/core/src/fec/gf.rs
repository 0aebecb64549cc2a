use crate::error::{Error, Result};

/// Conventional primitive polynomials for GF(2^w), `w = 2..=16`, with the
/// `x^w` term included.
pub fn default_primitive_polynomial(bits: u32) -> Option<u32> {
    Some(match bits {
        2 => 0x7,
        3 => 0xb,
        4 => 0x13,
        5 => 0x25,
        6 => 0x43,
        7 => 0x89,
        8 => 0x11d,
        9 => 0x211,
        10 => 0x409,
        11 => 0x805,
        12 => 0x1053,
        13 => 0x201b,
        14 => 0x4443,
        15 => 0x8003,
        16 => 0x1100b,
        _ => return None,
    })
}

/// Log/antilog tables for GF(2^w) with generator `alpha = x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaloisField {
    bits: u32,
    polynomial: u32,
    exp: Vec<u16>,
    log: Vec<u16>,
}

impl GaloisField {
    pub fn new(bits: u32) -> Result<Self> {
        let poly = default_primitive_polynomial(bits)
            .ok_or_else(|| Error::InvalidParameter(format!("field size 2^{bits} not supported (w in 2..=16)")))?;
        Self::with_polynomial(bits, poly)
    }

    /// Builds the tables, rejecting polynomials that are not primitive.
    pub fn with_polynomial(bits: u32, polynomial: u32) -> Result<Self> {
        if !(2..=16).contains(&bits) || polynomial >> bits != 1 {
            return Err(Error::InvalidParameter(format!("bad field polynomial {polynomial:#x} for w = {bits}")));
        }
        let order = (1usize << bits) - 1;
        let mut exp = vec![0u16; 2 * order];
        let mut log = vec![0u16; order + 1];
        let mut x = 1u32;
        for i in 0..order {
            if i > 0 && x == 1 {
                return Err(Error::InvalidParameter(format!("{polynomial:#x} is not primitive")));
            }
            exp[i] = x as u16;
            log[x as usize] = i as u16;
            x <<= 1;
            if x >> bits != 0 {
                x ^= polynomial;
            }
        }
        if x != 1 {
            return Err(Error::InvalidParameter(format!("{polynomial:#x} is not primitive")));
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(GaloisField { bits, polynomial, exp, log })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn polynomial(&self) -> u32 {
        self.polynomial
    }

    /// Number of field elements, `2^w`.
    pub fn size(&self) -> usize {
        1 << self.bits
    }

    /// Multiplicative order, `2^w - 1`.
    pub fn order(&self) -> usize {
        self.size() - 1
    }

    pub fn contains(&self, a: u32) -> bool {
        (a as usize) < self.size()
    }

    #[inline]
    pub fn add(&self, a: u16, b: u16) -> u16 {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: u16, b: u16) -> u16 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
        }
    }

    /// Multiplicative inverse. Panics on zero.
    #[inline]
    pub fn inv(&self, a: u16) -> u16 {
        assert!(a != 0, "zero has no inverse");
        self.exp[(self.order() - self.log[a as usize] as usize) % self.order()]
    }

    #[inline]
    pub fn div(&self, a: u16, b: u16) -> u16 {
        self.mul(a, self.inv(b))
    }

    /// `alpha^i` for any integer `i`.
    #[inline]
    pub fn alpha_pow(&self, i: i64) -> u16 {
        self.exp[i.rem_euclid(self.order() as i64) as usize]
    }

    pub fn pow(&self, a: u16, e: u64) -> u16 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let l = self.log[a as usize] as u64 * e % self.order() as u64;
        self.exp[l as usize]
    }

    /// Evaluates a polynomial given highest-degree coefficient first.
    pub fn eval_desc(&self, coeffs: &[u16], x: u16) -> u16 {
        coeffs.iter().fold(0, |acc, &c| self.mul(acc, x) ^ c)
    }

    /// Evaluates a polynomial given lowest-degree coefficient first.
    pub fn eval_asc(&self, coeffs: &[u16], x: u16) -> u16 {
        coeffs.iter().rev().fold(0, |acc, &c| self.mul(acc, x) ^ c)
    }
}
