//! Complex receive-space vectors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Index, Sub};

/// A `K`-dimensional complex vector. Constituent vectors, constellation
/// points, noise and received signals all live in this type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexVector(pub Vec<Complex64>);

impl ComplexVector {
    pub fn zeros(len: usize) -> Self {
        ComplexVector(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn from_slice(values: &[Complex64]) -> Self {
        ComplexVector(values.to_vec())
    }

    /// Real scalars embedded as a 1-dimensional vector.
    pub fn real_scalar(value: f64) -> Self {
        ComplexVector(vec![Complex64::new(value, 0.0)])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn squared_norm(&self) -> f64 {
        squared_norm(&self.0)
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        ComplexVector(self.0.iter().map(|x| x * factor).collect())
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        ComplexVector(self.0.iter().map(|x| x * factor).collect())
    }

    /// Squared Euclidean distance to `other`.
    pub fn distance_squared(&self, other: &ComplexVector) -> f64 {
        distance_squared(&self.0, &other.0)
    }

    pub fn add_assign_slice(&mut self, other: &[Complex64]) {
        debug_assert_eq!(self.len(), other.len());
        for (a, b) in self.0.iter_mut().zip(other) {
            *a += b;
        }
    }

    pub fn sub_assign_slice(&mut self, other: &[Complex64]) {
        debug_assert_eq!(self.len(), other.len());
        for (a, b) in self.0.iter_mut().zip(other) {
            *a -= b;
        }
    }
}

impl Index<usize> for ComplexVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.0[i]
    }
}

impl Add for &ComplexVector {
    type Output = ComplexVector;
    fn add(self, rhs: &ComplexVector) -> ComplexVector {
        assert_eq!(self.len(), rhs.len(), "vector length mismatch");
        ComplexVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &ComplexVector {
    type Output = ComplexVector;
    fn sub(self, rhs: &ComplexVector) -> ComplexVector {
        assert_eq!(self.len(), rhs.len(), "vector length mismatch");
        ComplexVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl From<Vec<Complex64>> for ComplexVector {
    fn from(v: Vec<Complex64>) -> Self {
        ComplexVector(v)
    }
}

#[inline]
pub(crate) fn squared_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum()
}

#[inline]
pub(crate) fn distance_squared(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum()
}

/// Squared distance with early abort: returns `None` as soon as the partial
/// sum exceeds `bound`. Terms are accumulated in the same order as
/// [`distance_squared`], so a completed result is bit-identical to it.
#[inline]
pub(crate) fn distance_squared_bounded(a: &[Complex64], b: &[Complex64], bound: f64) -> Option<f64> {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += (x - y).norm_sqr();
        if acc > bound {
            return None;
        }
    }
    Some(acc)
}
