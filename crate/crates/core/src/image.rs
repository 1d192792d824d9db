//! Single-channel images of arbitrary dimension, stored as a flat row-major
//! array. Every sample carries unit measure, so `|Ω|` is the sample count.

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    data: Vec<T>,
    shape: Vec<usize>,
}

impl<T: Scalar> Image<T> {
    /// Wraps `data` with the given `shape`. The data length must equal the
    /// product of the extents and every sample must be finite.
    pub fn new(data: Vec<T>, shape: Vec<usize>) -> Result<Self> {
        if shape.is_empty() {
            return invalid("image shape must have at least one extent");
        }
        if shape.contains(&0) {
            return invalid(format!("image extents must be positive, got {shape:?}"));
        }
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return invalid(format!(
                "data length {} does not match shape {:?} ({} samples)",
                data.len(),
                shape,
                expected
            ));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return invalid(format!("sample {i} is not finite"));
        }
        Ok(Self { data, shape })
    }

    /// 2-d image from `rows` (all rows must have the same length).
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return invalid("ragged rows");
        }
        Self::new(rows.concat(), vec![height, width])
    }

    pub fn filled(shape: Vec<usize>, value: T) -> Result<Self> {
        let n = shape.iter().product();
        Self::new(vec![value; n], shape)
    }

    /// Same shape, new samples. Used by filters whose output is a pure
    /// per-pixel map of valid input.
    pub(crate) fn with_data(&self, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), self.data.len());
        Self {
            data,
            shape: self.shape.clone(),
        }
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    /// Number of samples, i.e. the measure `|Ω|`.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// `(height, width)` of a 2-d image.
    pub fn dims2(&self) -> Result<(usize, usize)> {
        match self.shape.as_slice() {
            &[h, w] => Ok((h, w)),
            s => Err(Error::UnsupportedDimension {
                expected: 2,
                found: s.len(),
            }),
        }
    }

    pub fn min(&self) -> T {
        self.data.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.data.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// `max − min`.
    pub fn dynamic_range(&self) -> T {
        self.max() - self.min()
    }

    pub fn sup_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn mean(&self) -> T {
        self.data.iter().copied().sum::<T>() / T::from_count(self.len())
    }

    /// Empirical (population) standard deviation.
    pub fn std_dev(&self) -> T {
        let mean = self.mean();
        let ss: T = self.data.iter().map(|&v| (v - mean) * (v - mean)).sum();
        (ss / T::from_count(self.len())).sqrt()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        Self::new(self.data.iter().map(|&v| f(v)).collect(), self.shape.clone())
    }

    pub(crate) fn check_same_shape<U>(&self, other: &Image<U>) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                left: self.shape.clone(),
                right: other.shape.clone(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_construction() {
        assert!(Image::<f64>::new(vec![1.0; 5], vec![2, 2]).is_err());
        assert!(Image::<f64>::new(vec![], vec![0]).is_err());
        assert!(Image::<f64>::new(vec![1.0], vec![]).is_err());
        assert!(Image::new(vec![1.0, f64::NAN], vec![2]).is_err());
        assert!(Image::new(vec![1.0, f64::INFINITY], vec![2]).is_err());
    }

    #[test]
    fn summary_statistics() {
        let img = Image::from_rows(&[vec![255.0, 170.0], vec![85.0, 0.0]]).unwrap();
        assert_eq!(img.shape(), &[2, 2]);
        assert_eq!(img.max(), 255.0);
        assert_eq!(img.min(), 0.0);
        assert_eq!(img.mean(), 127.5);
        let expected = ((127.5f64.powi(2) + 42.5f64.powi(2)) / 2.0).sqrt();
        assert!((img.std_dev() - expected).abs() < 1e-12);
        assert_eq!(img.dims2().unwrap(), (2, 2));
    }

    #[test]
    fn dims2_rejects_3d() {
        let img = Image::filled(vec![2, 2, 2], 1.0f32).unwrap();
        assert_eq!(img.dims2(), Err(Error::UnsupportedDimension { expected: 2, found: 3 }));
    }
}
