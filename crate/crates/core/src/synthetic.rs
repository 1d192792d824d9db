//! Synthetic test images with known ground truth.

use crate::image::Image;
use crate::noise_metrics::{add_gaussian_noise, NoiseSpec};
use crate::rng::SeededStream;
use crate::scalar::Scalar;

/// Gray levels of the Squares image, brightest first.
pub const SQUARES_LEVELS: [f64; 4] = [255.0, 170.0, 85.0, 0.0];

/// `side × side` image split into four equal quadrants: 255 top-left,
/// 170 top-right, 85 bottom-left, 0 bottom-right. `side` must be even for
/// the four level sets to have the same measure.
pub fn squares<T: Scalar>(side: usize) -> Image<T> {
    let half = side / 2;
    let data = (0..side * side)
        .map(|i| {
            let (r, c) = (i / side, i % side);
            let q = 2 * usize::from(r >= half) + usize::from(c >= half);
            T::lit(SQUARES_LEVELS[q])
        })
        .collect();
    Image::new(data, vec![side, side]).expect("valid squares image")
}

/// Squares plus seeded Gaussian noise at `snr`, rounded to integers (not
/// clamped), as an 8-bit pipeline would quantize it.
pub fn noisy_squares<T: Scalar>(side: usize, snr: f64, seed: u64) -> Image<T> {
    quantized_noise(&squares::<T>(side), snr, seed).expect("squares has σ > 0")
}

/// `img` plus seeded Gaussian noise at `snr`, rounded to integers.
pub fn quantized_noise<T: Scalar>(img: &Image<T>, snr: f64, seed: u64) -> crate::error::Result<Image<T>> {
    add_gaussian_noise(img, &NoiseSpec::new(snr, seed)?)?.map(|v| v.round())
}

/// Smooth ramp modulated vertically, spanning `[0, 255]`.
pub fn smooth_ramp<T: Scalar>(side: usize) -> Image<T> {
    let data = (0..side * side)
        .map(|i| {
            let y = (i / side) as f64 / (side - 1) as f64;
            let x = (i % side) as f64 / (side - 1) as f64;
            T::lit((255.0 * (std::f64::consts::PI * y).sin().powi(2) * x).round())
        })
        .collect();
    Image::new(data, vec![side, side]).expect("valid ramp")
}

/// Concentric rings, a periodic texture spanning `[0, 255]`.
pub fn rings<T: Scalar>(side: usize) -> Image<T> {
    let data = (0..side * side)
        .map(|i| {
            let y = (i / side) as f64 / (side - 1) as f64 - 0.5;
            let x = (i % side) as f64 / (side - 1) as f64 - 0.5;
            T::lit((127.5 + 127.5 * (20.0 * x.hypot(y)).sin()).round())
        })
        .collect();
    Image::new(data, vec![side, side]).expect("valid rings")
}

/// Uniformly random image with at most `levels` distinct integer values
/// spread over `[0, 255]`.
pub fn random_levels<T: Scalar>(shape: &[usize], levels: usize, seed: u64) -> Image<T> {
    let n: usize = shape.iter().product();
    let denom = levels.saturating_sub(1).max(1) as f64;
    let mut rng = SeededStream::new(seed);
    let data = (0..n)
        .map(|_| T::lit((rng.below(levels as u64) as f64 * 255.0 / denom).round()))
        .collect();
    Image::new(data, shape.to_vec()).expect("valid random image")
}

/// Random image in which each of `levels` values (`0..levels`) occurs,
/// pixel `i` taking level `i mod levels` before a seeded shuffle.
pub fn all_levels<T: Scalar>(shape: &[usize], levels: usize, seed: u64) -> Image<T> {
    let n: usize = shape.iter().product();
    let mut data: Vec<T> = (0..n).map(|i| T::from_count(i % levels)).collect();
    let mut rng = SeededStream::new(seed);
    for i in (1..n).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        data.swap(i, j);
    }
    Image::new(data, shape.to_vec()).expect("valid image")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rearrangement::histogram;

    #[test]
    fn squares_has_four_equal_levels() {
        let img = squares::<f64>(8);
        let h = histogram(&img);
        assert_eq!(h, vec![(0.0, 16), (85.0, 16), (170.0, 16), (255.0, 16)]);
        assert_eq!(img.data()[0], 255.0);
        assert_eq!(img.data()[7], 170.0);
        assert_eq!(img.data()[56], 85.0);
        assert_eq!(img.data()[63], 0.0);
    }

    #[test]
    fn generators_in_range() {
        for img in [
            smooth_ramp::<f64>(32),
            rings::<f64>(32),
            random_levels::<f64>(&[16, 16], 32, 1),
        ] {
            assert!(img.min() >= 0.0 && img.max() <= 255.0, "{} {}", img.min(), img.max());
        }
        assert!(histogram(&random_levels::<f64>(&[16, 16], 32, 1)).len() <= 32);
        assert_eq!(histogram(&all_levels::<f64>(&[64, 64], 256, 3)).len(), 256);
    }
}
