//! Neighborhood filter computed on the decreasing rearrangement of an image.
//!
//! The filter averages every pixel with all pixels of similar intensity. It
//! never splits a level set, so all the work can be done on the image's
//! decreasing rearrangement, a one-dimensional step function with one entry
//! per distinct intensity. A filter step then costs `Q²` kernel evaluations
//! for `Q` levels, independent of image size and dimension.
//!
//! ```
//! use nfr_core::{decreasing_rearrangement, iterate, reconstruct, FilterConfig, Image64, Kernel};
//!
//! let img = Image64::from_rows(&[vec![250.0, 240.0], vec![20.0, 10.0]]).unwrap();
//! let (v0, levels) = decreasing_rearrangement(&img);
//! let cfg = FilterConfig::new(Kernel::gaussian(30.0).unwrap());
//! let trace = iterate(&v0, &cfg).unwrap();
//! let out = reconstruct(&levels, trace.last().values()).unwrap();
//! assert!(out.data()[0] == out.data()[1]);
//! ```

pub mod error;
pub mod filter1d;
pub mod image;
pub mod kernels;
pub mod noise_metrics;
pub mod rearrangement;
pub mod reference_filters;
pub mod rng;
pub mod scalar;
pub mod segmentation;
pub mod synthetic;

pub use error::{Error, Result};
pub use filter1d::{
    expansion_residual, functional_j, iterate, iterate_counted, nf_step, nf_step_counted, ExpansionResidual,
    FilterConfig, FilterTrace, Scheme, StopReason,
};
pub use image::Image;
pub use kernels::{check_decay_condition, Builtin, EvalCounter, Kernel, Profile};
pub use noise_metrics::{add_gaussian_noise, rmse, snr_measure, NoiseSpec};
pub use rearrangement::{
    decreasing_rearrangement, distribution_function, histogram, quantize, reconstruct, LevelStructure, Rearrangement,
};
pub use reference_filters::{bilateral, direct_nf, nlm, SpatialConfig};
pub use scalar::Scalar;
pub use segmentation::{dice, inflexion_points, segment, Mask, Segmentation};

pub type Image64 = Image<f64>;
pub type Image32 = Image<f32>;
pub type Rearrangement64 = Rearrangement<f64>;
pub type Rearrangement32 = Rearrangement<f32>;
pub type LevelStructure64 = LevelStructure<f64>;
pub type Kernel64 = Kernel<f64>;
pub type Kernel32 = Kernel<f32>;
pub type FilterConfig64 = FilterConfig<f64>;
pub type FilterConfig32 = FilterConfig<f32>;
pub type FilterTrace64 = FilterTrace<f64>;
pub type Segmentation64 = Segmentation<f64>;
