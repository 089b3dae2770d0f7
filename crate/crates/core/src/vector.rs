//! Flat `f64` vectors: the universal carrier for inputs, perturbations, and gradients.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Index;

/// A fixed-dimension vector of finite 64-bit floats.
///
/// Every constructor and arithmetic operation upholds the invariant that all
/// entries are finite; feeding a NaN or infinity in panics immediately rather
/// than letting it propagate through an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    /// Wraps raw data. Panics if any entry is NaN or infinite.
    pub fn new(data: Vec<f64>) -> Self {
        assert!(
            data.iter().all(|v| v.is_finite()),
            "vector entries must be finite"
        );
        Self { data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { data: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn iter(&self) -> core::slice::Iter<'_, f64> {
        self.data.iter()
    }

    /// Builds a vector by mapping each coordinate.
    pub fn map(&self, f: impl FnMut(f64) -> f64) -> Self {
        Self::new(self.data.iter().copied().map(f).collect())
    }

    /// Coordinatewise sum. Panics on dimension mismatch.
    pub fn add(&self, other: &Vector) -> Vector {
        self.zip_with(other, |a, b| a + b)
    }

    /// Coordinatewise difference. Panics on dimension mismatch.
    pub fn sub(&self, other: &Vector) -> Vector {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Vector {
        self.map(|v| v * factor)
    }

    /// `self + factor * other`.
    pub fn add_scaled(&self, factor: f64, other: &Vector) -> Vector {
        self.zip_with(other, |a, b| a + factor * b)
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.dim(), other.dim(), "vector dimension mismatch");
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a * b)
            .sum()
    }

    /// Index of the largest entry, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for i in 1..self.data.len() {
            if self.data[i] > self.data[best] {
                best = i;
            }
        }
        best
    }

    fn zip_with(&self, other: &Vector, mut f: impl FnMut(f64, f64) -> f64) -> Vector {
        assert_eq!(self.dim(), other.dim(), "vector dimension mismatch");
        Vector::new(
            self.data
                .iter()
                .zip(other.data.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }
}

impl Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.data[i]
    }
}

impl From<Vec<f64>> for Vector {
    fn from(data: Vec<f64>) -> Self {
        Vector::new(data)
    }
}

impl<'a> IntoIterator for &'a Vector {
    type Item = &'a f64;
    type IntoIter = core::slice::Iter<'a, f64>;

    fn into_iter(self) -> Self::IntoIter {
        self.data.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic() {
        let a = Vector::new(vec![1.0, 2.0]);
        let b = Vector::new(vec![3.0, -4.0]);
        assert_eq!(a.add(&b).as_slice(), &[4.0, -2.0]);
        assert_eq!(a.sub(&b).as_slice(), &[-2.0, 6.0]);
        assert_eq!(a.scale(2.0).as_slice(), &[2.0, 4.0]);
        assert_eq!(a.add_scaled(0.5, &b).as_slice(), &[2.5, 0.0]);
        assert_eq!(a.dot(&b), -5.0);
    }

    #[test]
    fn argmax_breaks_ties_low() {
        let v = Vector::new(vec![1.0, 3.0, 3.0, 0.0]);
        assert_eq!(v.argmax(), 1);
    }

    #[test]
    #[should_panic(expected = "finite")]
    fn rejects_nan() {
        Vector::new(vec![0.0, f64::NAN]);
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn rejects_dim_mismatch() {
        Vector::new(vec![0.0]).add(&Vector::zeros(2));
    }
}
