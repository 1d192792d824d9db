//! Segmentation from the flat regions of the filter's fixed point.
//!
//! After iterating, nearby level values collapse onto a few plateaus. Levels
//! whose converged values lie within `merge_tol · (max − min)` of their
//! neighbor (in value order) form one region. Since regions are unions of
//! input level sets, a region can never split a level set.

use crate::error::{invalid, Error, Result};
use crate::filter1d::{iterate, FilterConfig, FilterTrace};
use crate::image::Image;
use crate::kernels::Profile;
use crate::rearrangement::{decreasing_rearrangement, Rearrangement};
use crate::scalar::Scalar;

/// Default merge tolerance, relative to the input dynamic range.
pub const DEFAULT_MERGE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mask {
    data: Vec<bool>,
    shape: Vec<usize>,
}

impl Mask {
    pub fn new(data: Vec<bool>, shape: Vec<usize>) -> Result<Self> {
        if data.len() != shape.iter().product::<usize>() {
            return invalid("mask length does not match shape");
        }
        Ok(Self { data, shape })
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation<T> {
    labels: Vec<usize>,
    region_values: Vec<T>,
    region_masses: Vec<usize>,
    shape: Vec<usize>,
}

impl<T: Scalar> Segmentation<T> {
    /// Region index of every pixel; region 0 is the brightest.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Representative value per region, strictly descending.
    pub fn region_values(&self) -> &[T] {
        &self.region_values
    }

    pub fn region_masses(&self) -> &[usize] {
        &self.region_masses
    }

    pub fn region_count(&self) -> usize {
        self.region_values.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn mask(&self, region: usize) -> Mask {
        Mask {
            data: self.labels.iter().map(|&l| l == region).collect(),
            shape: self.shape.clone(),
        }
    }

    /// The piecewise-constant image of region values.
    pub fn to_image(&self) -> Image<T> {
        Image::new(
            self.labels.iter().map(|&l| self.region_values[l]).collect(),
            self.shape.clone(),
        )
        .expect("labels index valid regions")
    }
}

/// Filters `img` to convergence and groups its levels into flat regions.
pub fn segment<T: Scalar, P: Profile<T>>(
    img: &Image<T>,
    cfg: &FilterConfig<T, P>,
    merge_tol: T,
) -> Result<Segmentation<T>> {
    segment_traced(img, cfg, merge_tol).map(|(s, _)| s)
}

/// [`segment`] that also returns the filter trace.
pub fn segment_traced<T: Scalar, P: Profile<T>>(
    img: &Image<T>,
    cfg: &FilterConfig<T, P>,
    merge_tol: T,
) -> Result<(Segmentation<T>, FilterTrace<T>)> {
    if !(merge_tol.is_finite() && merge_tol >= T::zero()) {
        return invalid(format!("merge tolerance must be nonnegative, got {merge_tol}"));
    }
    let (v0, levels) = decreasing_rearrangement(img);
    let trace = iterate(&v0, cfg)?;
    let converged = trace.last().values();
    let threshold = merge_tol * img.dynamic_range();

    // level indices in descending converged value (stable on ties)
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by(|&a, &b| converged[b].partial_cmp(&converged[a]).expect("finite"));

    let mut level_region = vec![0usize; levels.len()];
    let mut sums: Vec<(T, usize)> = Vec::new();
    let mut prev: Option<T> = None;
    for &l in &order {
        let v = converged[l];
        let start_new = match prev {
            None => true,
            Some(p) => p - v > threshold,
        };
        if start_new {
            sums.push((T::zero(), 0));
        }
        let region = sums.len() - 1;
        level_region[l] = region;
        let mass = levels.masses()[l];
        sums[region].0 = sums[region].0 + T::from_count(mass) * v;
        sums[region].1 += mass;
        prev = Some(v);
    }

    let segmentation = Segmentation {
        labels: levels.pixel_level().iter().map(|&l| level_region[l]).collect(),
        region_values: sums.iter().map(|&(s, m)| s / T::from_count(m)).collect(),
        region_masses: sums.iter().map(|&(_, m)| m).collect(),
        shape: img.shape().to_vec(),
    };
    Ok((segmentation, trace))
}

/// Dice overlap `2|A∩B| / (|A| + |B|)`; two empty masks score 1.
pub fn dice(a: &Mask, b: &Mask) -> Result<f64> {
    if a.shape != b.shape {
        return Err(Error::ShapeMismatch {
            left: a.shape.clone(),
            right: b.shape.clone(),
        });
    }
    let both = a.data.iter().zip(&b.data).filter(|(x, y)| **x && **y).count();
    let total = a.count() + b.count();
    if total == 0 {
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / total as f64)
}

/// Positions where the discrete second difference of the rearrangement
/// changes sign.
///
/// Each entry sits at the center of its mass interval; slopes are taken
/// between consecutive centers and their differences give the curvature
/// sign at interior entries. A sign change between entries `i` and `i+1`
/// is reported at the cumulative-mass boundary between them. Zero
/// curvature is skipped. Fewer than three entries yield no points.
pub fn inflexion_points<T: Scalar>(v: &Rearrangement<T>) -> Vec<T> {
    let n = v.len();
    if n < 3 {
        return Vec::new();
    }
    let starts = v.cumulative_starts();
    let half = T::lit(0.5);
    let centers: Vec<T> = starts.iter().zip(v.masses()).map(|(&s, &m)| s + half * m).collect();
    let x = v.values();
    let slopes: Vec<T> = (0..n - 1)
        .map(|i| (x[i + 1] - x[i]) / (centers[i + 1] - centers[i]))
        .collect();

    let mut points = Vec::new();
    let mut last_sign: Option<bool> = None;
    for i in 1..n - 1 {
        let curvature = slopes[i] - slopes[i - 1];
        if curvature == T::zero() {
            continue;
        }
        let positive = curvature > T::zero();
        if let Some(prev) = last_sign {
            if prev != positive {
                // boundary just before entry i
                points.push(starts[i]);
            }
        }
        last_sign = Some(positive);
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Kernel;

    fn mask(bits: &[u8]) -> Mask {
        Mask::new(bits.iter().map(|&b| b == 1).collect(), vec![bits.len()]).unwrap()
    }

    #[test]
    fn dice_examples() {
        let a = mask(&[1, 1, 0, 0]);
        assert_eq!(dice(&a, &a).unwrap(), 1.0);
        assert_eq!(dice(&a, &mask(&[0, 0, 1, 1])).unwrap(), 0.0);
        let four = mask(&[1, 1, 1, 1, 0, 0]);
        let other = mask(&[0, 0, 1, 1, 1, 1]);
        assert_eq!(dice(&four, &other).unwrap(), 0.5);
        assert_eq!(dice(&other, &four).unwrap(), 0.5);
        assert_eq!(dice(&mask(&[0, 0]), &mask(&[0, 0])).unwrap(), 1.0);
        assert!(dice(&mask(&[1]), &mask(&[1, 0])).is_err());
        assert!(Mask::new(vec![true], vec![2]).is_err());
    }

    #[test]
    fn inflexion_examples() {
        let convex = Rearrangement::new(vec![10.0, 5.0, 2.0, 1.0, 0.5], vec![1.0; 5]).unwrap();
        assert!(inflexion_points(&convex).is_empty());

        let two = Rearrangement::new(vec![3.0, 1.0], vec![1.0, 1.0]).unwrap();
        assert!(inflexion_points(&two).is_empty());

        // slopes −1, −4, −1, −4 → curvature −3, +3, −3 at entries 1, 2, 3
        let zigzag = Rearrangement::new(vec![10.0, 9.0, 5.0, 4.0, 0.0], vec![1.0; 5]).unwrap();
        assert_eq!(inflexion_points(&zigzag), vec![2.0, 3.0]);

        // concave then convex: one inflexion between the steep and shallow halves
        let s = Rearrangement::new(vec![10.0, 9.5, 8.0, 2.0, 0.5, 0.0], vec![1.0; 6]).unwrap();
        assert_eq!(inflexion_points(&s), vec![3.0]);
    }

    #[test]
    fn constant_image_single_region() {
        let img = Image::filled(vec![5, 5], 12.0).unwrap();
        let cfg = FilterConfig::new(Kernel::gaussian(10.0).unwrap());
        let seg = segment(&img, &cfg, 1e-3).unwrap();
        assert_eq!(seg.region_count(), 1);
        assert_eq!(seg.region_values(), &[12.0]);
        assert!(seg.labels().iter().all(|&l| l == 0));
        assert!(segment(&img, &cfg, -1.0).is_err());
    }

    #[test]
    fn merges_close_levels() {
        // two tight clusters far apart
        let img = Image::new(vec![200.0, 201.0, 202.0, 10.0, 11.0, 12.0], vec![6]).unwrap();
        let cfg = FilterConfig::new(Kernel::gaussian(8.0).unwrap());
        let seg = segment(&img, &cfg, 1e-3).unwrap();
        assert_eq!(seg.region_count(), 2);
        assert_eq!(seg.labels(), &[0, 0, 0, 1, 1, 1]);
        assert!(seg.region_values()[0] > seg.region_values()[1]);
        assert_eq!(seg.region_masses(), &[3, 3]);
        assert_eq!(seg.mask(1).count(), 3);
        assert_eq!(seg.to_image().data()[0], seg.region_values()[0]);
    }
}
