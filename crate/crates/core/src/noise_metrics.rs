//! Seeded additive Gaussian noise at a prescribed SNR, and image metrics.
//!
//! SNR follows the convention `σ(u) / σ(ν)` with `σ` the empirical
//! (population) standard deviation of the clean image `u` and the noise `ν`.

use crate::error::{invalid, Result};
use crate::image::Image;
use crate::rng::SeededStream;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub snr: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(snr: f64, seed: u64) -> Result<Self> {
        if !(snr.is_finite() && snr > 0.0) {
            return invalid(format!("snr must be positive, got {snr}"));
        }
        Ok(Self { snr, seed })
    }
}

/// Adds i.i.d. `N(0, (σ(img)/snr)²)` noise drawn from the seeded stream in
/// pixel order. Output is neither clamped nor re-quantized.
pub fn add_gaussian_noise<T: Scalar>(img: &Image<T>, spec: &NoiseSpec) -> Result<Image<T>> {
    NoiseSpec::new(spec.snr, spec.seed)?;
    let sigma = img.std_dev().as_f64();
    if sigma == 0.0 {
        return invalid("constant image: SNR is undefined when σ(u) = 0");
    }
    let noise_std = sigma / spec.snr;
    let mut stream = SeededStream::new(spec.seed);
    let data = img
        .data()
        .iter()
        .map(|&v| v + T::lit(noise_std * stream.normal()))
        .collect();
    Image::new(data, img.shape().to_vec())
}

/// Root-mean-square difference.
pub fn rmse<T: Scalar>(a: &Image<T>, b: &Image<T>) -> Result<T> {
    a.check_same_shape(b)?;
    let ss: T = a.data().iter().zip(b.data()).map(|(&x, &y)| (x - y) * (x - y)).sum();
    Ok((ss / T::from_count(a.len())).sqrt())
}

/// `σ(clean) / σ(noisy − clean)`.
pub fn snr_measure<T: Scalar>(clean: &Image<T>, noisy: &Image<T>) -> Result<T> {
    clean.check_same_shape(noisy)?;
    let residual = Image::new(
        noisy.data().iter().zip(clean.data()).map(|(&n, &c)| n - c).collect(),
        clean.shape().to_vec(),
    )?;
    Ok(clean.std_dev() / residual.std_dev())
}
