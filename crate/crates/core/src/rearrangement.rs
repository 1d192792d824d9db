//! Distribution functions, decreasing rearrangements and level structures.
//!
//! With unit pixel measure the decreasing rearrangement of an image is a
//! right-continuous step function on `[0, N]`. Samples sharing an intensity
//! are grouped into one entry whose mass is their multiplicity, so a
//! rearrangement of an image quantized on `Q` levels has exactly `Q`
//! entries regardless of `N`.

use std::cmp::Ordering;

use crate::error::{invalid, Result};
use crate::image::Image;
use crate::scalar::Scalar;

/// Level sets of an image: distinct intensities (strictly descending), their
/// pixel counts, and the level index of every pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelStructure<T> {
    values: Vec<T>,
    masses: Vec<usize>,
    pixel_level: Vec<usize>,
    shape: Vec<usize>,
}

impl<T: Scalar> LevelStructure<T> {
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn masses(&self) -> &[usize] {
        &self.masses
    }

    pub fn pixel_level(&self) -> &[usize] {
        &self.pixel_level
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    /// Number of distinct levels `Q`.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total measure `|Ω|`.
    pub fn total_mass(&self) -> usize {
        self.pixel_level.len()
    }

    /// Pixel indices of level `level`, in increasing order.
    pub fn level_pixels(&self, level: usize) -> Vec<usize> {
        self.pixel_level
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| (l == level).then_some(i))
            .collect()
    }

    /// The grouped step function `u_*` of these levels.
    pub fn rearrangement(&self) -> Rearrangement<T> {
        Rearrangement {
            values: self.values.clone(),
            masses: self.masses.iter().map(|&m| T::from_count(m)).collect(),
        }
    }
}

/// Piecewise-constant function on `[0, |Ω|]`: entry `i` holds `values[i]`
/// on `[S_i, S_i + masses[i])` where `S_i` is the cumulative mass before it.
#[derive(Debug, Clone, PartialEq)]
pub struct Rearrangement<T> {
    values: Vec<T>,
    masses: Vec<T>,
}

impl<T: Scalar> Rearrangement<T> {
    /// Validated constructor: values finite and non-increasing, masses
    /// positive and finite, lengths equal and nonzero.
    pub fn new(values: Vec<T>, masses: Vec<T>) -> Result<Self> {
        let r = Self::from_profile(values, masses)?;
        if !r.is_non_increasing() {
            return invalid("rearrangement values must be non-increasing");
        }
        Ok(r)
    }

    /// Like [`Rearrangement::new`] without the monotonicity requirement.
    /// Filtered profiles live on a fixed mass partition and are only
    /// guaranteed monotone for kernels meeting the decay condition.
    pub fn from_profile(values: Vec<T>, masses: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return invalid("rearrangement must have at least one entry");
        }
        if values.len() != masses.len() {
            return invalid(format!("{} values but {} masses", values.len(), masses.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return invalid("rearrangement values must be finite");
        }
        if masses.iter().any(|m| !(m.is_finite() && *m > T::zero())) {
            return invalid("rearrangement masses must be positive and finite");
        }
        Ok(Self { values, masses })
    }

    /// Single entry `(c, mass)`.
    pub fn constant(value: T, mass: T) -> Result<Self> {
        Self::new(vec![value], vec![mass])
    }

    pub(crate) fn with_values(&self, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), self.masses.len());
        Self {
            values,
            masses: self.masses.clone(),
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn masses(&self) -> &[T] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn total_mass(&self) -> T {
        self.masses.iter().copied().sum()
    }

    /// Left endpoints `S_i` of each entry.
    pub fn cumulative_starts(&self) -> Vec<T> {
        self.masses
            .iter()
            .scan(T::zero(), |acc, &m| {
                let start = *acc;
                *acc = *acc + m;
                Some(start)
            })
            .collect()
    }

    pub fn is_non_increasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] >= w[1])
    }

    /// True when both profiles share the exact same mass list.
    pub fn same_partition(&self, other: &Self) -> bool {
        self.masses == other.masses
    }

    /// Evaluates the step function at `s`, right-continuous. Points outside
    /// `(0, |Ω|)` clamp to the first/last entry (ess sup / ess inf).
    pub fn eval(&self, s: T) -> T {
        let mut end = T::zero();
        for (&v, &m) in self.values.iter().zip(&self.masses) {
            end = end + m;
            if s < end {
                return v;
            }
        }
        *self.values.last().expect("nonempty")
    }

    /// `Σ mass_i · F(value_i)`, the rearranged side of equi-measurability.
    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        self.values.iter().zip(&self.masses).map(|(&v, &m)| m * f(v)).sum()
    }

    /// `L^p` norm for finite `p ≥ 1`.
    pub fn lp_norm(&self, p: T) -> T {
        self.integrate(|v| v.abs().powf(p)).powf(p.recip())
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// Mass-weighted mean value.
    pub fn mean(&self) -> T {
        self.integrate(|v| v) / self.total_mass()
    }

    pub fn max_value(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min_value(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }
}

/// `m_u(q) = |{x : u(x) > q}|`.
pub fn distribution_function<T: Scalar>(img: &Image<T>, q: T) -> usize {
    img.data().iter().filter(|&&v| v > q).count()
}

fn descending<T: Scalar>(a: T, b: T) -> Ordering {
    b.partial_cmp(&a).expect("finite samples")
}

/// Groups the image samples into distinct levels sorted descending.
pub fn decreasing_rearrangement<T: Scalar>(img: &Image<T>) -> (Rearrangement<T>, LevelStructure<T>) {
    let data = img.data();
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&i, &j| descending(data[i], data[j]));

    let mut values: Vec<T> = Vec::new();
    let mut masses: Vec<usize> = Vec::new();
    let mut pixel_level = vec![0usize; data.len()];
    for &i in &order {
        let v = data[i];
        if values.last() != Some(&v) {
            values.push(v);
            masses.push(0);
        }
        *masses.last_mut().expect("pushed above") += 1;
        pixel_level[i] = values.len() - 1;
    }

    let levels = LevelStructure {
        values,
        masses,
        pixel_level,
        shape: img.shape().to_vec(),
    };
    (levels.rearrangement(), levels)
}

/// Builds the image whose pixels in level `l` take `new_values[l]`.
pub fn reconstruct<T: Scalar>(levels: &LevelStructure<T>, new_values: &[T]) -> Result<Image<T>> {
    if new_values.len() != levels.len() {
        return invalid(format!(
            "expected {} level values, got {}",
            levels.len(),
            new_values.len()
        ));
    }
    let data = levels.pixel_level.iter().map(|&l| new_values[l]).collect();
    Image::new(data, levels.shape.clone())
}

/// `(value, count)` bins in ascending value order.
pub fn histogram<T: Scalar>(img: &Image<T>) -> Vec<(T, usize)> {
    let (_, levels) = decreasing_rearrangement(img);
    levels
        .values
        .iter()
        .copied()
        .zip(levels.masses.iter().copied())
        .rev()
        .collect()
}

/// Rounds every sample to the nearest of `bins` equally spaced levels
/// spanning `[min, max]`. Constant images are returned unchanged.
pub fn quantize<T: Scalar>(img: &Image<T>, bins: usize) -> Result<Image<T>> {
    if bins < 2 {
        return invalid("quantization needs at least two bins");
    }
    let lo = img.min();
    let range = img.dynamic_range();
    if range == T::zero() {
        return Ok(img.clone());
    }
    let step = range / T::from_count(bins - 1);
    img.map(|v| lo + ((v - lo) / step).round() * step)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn squares2() -> Image<f64> {
        Image::from_rows(&[vec![255.0, 170.0], vec![85.0, 0.0]]).unwrap()
    }

    /// Tiny deterministic generator so these unit tests need no RNG crate.
    fn lcg_image(seed: u64, side: usize, levels: u64) -> Image<f64> {
        let mut s = seed;
        let data = (0..side * side)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 33) % levels) as f64 * (255.0 / (levels - 1) as f64)
            })
            .collect();
        Image::new(data, vec![side, side]).unwrap()
    }

    #[test]
    fn distribution_function_examples() {
        let img = squares2();
        assert_eq!(distribution_function(&img, 100.0), 2);
        assert_eq!(distribution_function(&img, img.max()), 0);
        assert_eq!(distribution_function(&img, img.min() - 1.0), 4);

        let rnd = lcg_image(7, 8, 17);
        for q in [-1.0, 0.0, 15.9, 16.0, 100.0, 254.0, 255.0] {
            let brute = rnd.data().iter().filter(|&&v| v > q).count();
            assert_eq!(distribution_function(&rnd, q), brute);
        }
    }

    #[test]
    fn rearrangement_of_constant_and_distinct() {
        let c = Image::filled(vec![3, 5], 42.0).unwrap();
        let (r, l) = decreasing_rearrangement(&c);
        assert_eq!(r.values(), &[42.0]);
        assert_eq!(r.masses(), &[15.0]);
        assert_eq!(l.masses(), &[15]);

        let (r, l) = decreasing_rearrangement(&squares2());
        assert_eq!(r.values(), &[255.0, 170.0, 85.0, 0.0]);
        assert_eq!(r.masses(), &[1.0; 4]);
        assert_eq!(l.pixel_level(), &[0, 1, 2, 3]);
    }

    #[test]
    fn rearrangement_matches_full_sort() {
        let img = lcg_image(11, 16, 32);
        let (r, levels) = decreasing_rearrangement(&img);
        let mut sorted = img.data().to_vec();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let expanded: Vec<f64> = r
            .values()
            .iter()
            .zip(levels.masses())
            .flat_map(|(&v, &m)| std::iter::repeat_n(v, m))
            .collect();
        assert_eq!(expanded, sorted);
        assert!(r.values().windows(2).all(|w| w[0] > w[1]));
        assert_eq!(levels.masses().iter().sum::<usize>(), img.len());
        for (i, &l) in levels.pixel_level().iter().enumerate() {
            assert_eq!(img.data()[i], levels.values()[l]);
        }
    }

    #[test]
    fn eval_is_generalized_inverse() {
        let img = lcg_image(3, 8, 9);
        let (r, _) = decreasing_rearrangement(&img);
        let n = img.len() as f64;
        // inf {q : m_u(q) <= s} is attained at a sample value
        let brute = |s: f64| {
            img.data()
                .iter()
                .copied()
                .filter(|&q| distribution_function(&img, q) as f64 <= s)
                .fold(f64::INFINITY, f64::min)
        };
        let mut s = 0.25;
        while s < n {
            assert_eq!(r.eval(s), brute(s), "s = {s}");
            s += 0.5;
        }
        // at integer breakpoints the step is right-continuous
        for s in 1..img.len() {
            assert_eq!(r.eval(s as f64), brute(s as f64), "s = {s}");
        }
        assert_eq!(r.eval(0.0), img.max());
        assert_eq!(r.eval(n), img.min());
    }

    #[test]
    fn reconstruct_examples() {
        let img = squares2();
        let (_, levels) = decreasing_rearrangement(&img);
        assert_eq!(reconstruct(&levels, levels.values()).unwrap(), img);
        let flat = reconstruct(&levels, &[7.0; 4]).unwrap();
        assert!(flat.data().iter().all(|&v| v == 7.0));

        let two = reconstruct(&levels, &[200.0, 200.0, 50.0, 50.0]).unwrap();
        let high: Vec<bool> = two.data().iter().map(|&v| v == 200.0).collect();
        let union: Vec<bool> = img.data().iter().map(|&v| v == 255.0 || v == 170.0).collect();
        assert_eq!(high, union);
        assert_eq!(two.shape(), img.shape());

        assert!(reconstruct(&levels, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn histogram_examples() {
        let c = Image::filled(vec![4, 4], 9.0).unwrap();
        assert_eq!(histogram(&c), vec![(9.0, 16)]);

        let img = lcg_image(5, 12, 6);
        let h = histogram(&img);
        assert!(h.windows(2).all(|w| w[0].0 < w[1].0));
        assert_eq!(h.iter().map(|b| b.1).sum::<usize>(), img.len());
        for (v, m) in h {
            assert_eq!(img.data().iter().filter(|&&x| x == v).count(), m);
        }
    }

    #[test]
    fn rearrangement_validation() {
        assert!(Rearrangement::new(vec![1.0, 2.0], vec![1.0, 1.0]).is_err());
        assert!(Rearrangement::new(vec![2.0, 1.0], vec![1.0, 0.0]).is_err());
        assert!(Rearrangement::new(vec![2.0], vec![1.0, 1.0]).is_err());
        assert!(Rearrangement::<f64>::new(vec![], vec![]).is_err());
        assert!(Rearrangement::from_profile(vec![1.0, 2.0], vec![1.0, 1.0]).is_ok());
        let r = Rearrangement::new(vec![3.0, 1.0], vec![2.0, 0.5]).unwrap();
        assert_eq!(r.cumulative_starts(), vec![0.0, 2.0]);
        assert_eq!(r.total_mass(), 2.5);
    }

    #[test]
    fn quantize_rounds_to_grid() {
        let img = Image::new(vec![0.0, 0.4, 0.6, 1.0, 2.0], vec![5]).unwrap();
        let q = quantize(&img, 3).unwrap();
        assert_eq!(q.data(), &[0.0, 0.0, 1.0, 1.0, 2.0]);
        assert!(quantize(&img, 1).is_err());
    }
}
