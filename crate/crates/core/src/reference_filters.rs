//! Pixel-domain filters: the direct Neighborhood filter (the oracle the
//! rearranged engine is checked against), the Bilateral filter and
//! Nonlocal Means. These favor clarity over speed.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::filter1d::{FilterConfig, Scheme, StopReason};
use crate::image::Image;
use crate::kernels::{EvalCounter, Kernel, Profile};
use crate::scalar::Scalar;

/// Spatial parameters of the Bilateral and NLM filters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialConfig<T> {
    /// Spatial scale (Bilateral) or patch Gaussian standard deviation (NLM).
    pub rho: T,
    /// NLM patch half-width.
    pub patch_radius: usize,
    /// Spatial / search window half-width.
    pub window_radius: usize,
}

impl<T: Scalar> SpatialConfig<T> {
    /// Bilateral defaults: window radius `⌈3ρ⌉` (at least 1).
    pub fn bilateral(rho: T) -> Self {
        let w = (T::lit(3.0) * rho).ceil().to_usize().unwrap_or(1).max(1);
        Self {
            rho,
            patch_radius: 0,
            window_radius: w,
        }
    }

    /// NLM defaults: search window radius 10.
    pub fn nlm(rho: T, patch_radius: usize) -> Self {
        Self {
            rho,
            patch_radius,
            window_radius: 10,
        }
    }

    pub fn window(mut self, radius: usize) -> Self {
        self.window_radius = radius;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.rho > T::zero()) {
            return invalid(format!("rho must be positive, got {}", self.rho));
        }
        if self.window_radius == 0 {
            return invalid("window radius must be at least 1");
        }
        Ok(())
    }
}

fn par_map<T: Scalar>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

fn clamp_to<T: Scalar>(x: T, lo: T, hi: T) -> T {
    x.max(lo).min(hi)
}

/// One direct step: every pixel averages ALL pixels `y` with weights
/// `K_h(w(x) − w(y))`. Costs `N²` kernel evaluations.
pub fn direct_nf_step_counted<T: Scalar, P: Profile<T>>(
    weights: &Image<T>,
    values: &Image<T>,
    k: &Kernel<T, P>,
    counter: &EvalCounter,
) -> Result<Image<T>> {
    weights.check_same_shape(values)?;
    let w = weights.data();
    let x = values.data();
    let (lo, hi) = (values.min(), values.max());
    let out = par_map(w.len(), |i| {
        let mut num = T::zero();
        let mut den = T::zero();
        for j in 0..w.len() {
            let kw = k.eval_scaled(w[i] - w[j]);
            num = num + kw * x[j];
            den = den + kw;
        }
        clamp_to(num / den, lo, hi)
    });
    counter.add((w.len() * w.len()) as u64);
    Ok(values.with_data(out))
}

/// Iterated direct Neighborhood filter, `iterations` steps of `scheme`.
pub fn direct_nf<T: Scalar, P: Profile<T>>(
    img: &Image<T>,
    k: &Kernel<T, P>,
    iterations: usize,
    scheme: Scheme,
) -> Result<Image<T>> {
    direct_nf_counted(img, k, iterations, scheme, &EvalCounter::new())
}

pub fn direct_nf_counted<T: Scalar, P: Profile<T>>(
    img: &Image<T>,
    k: &Kernel<T, P>,
    iterations: usize,
    scheme: Scheme,
    counter: &EvalCounter,
) -> Result<Image<T>> {
    let mut current = img.clone();
    for _ in 0..iterations {
        let weights = match scheme {
            Scheme::Varying => &current,
            Scheme::Fixed => img,
        };
        current = direct_nf_step_counted(weights, &current, k, counter)?;
    }
    Ok(current)
}

/// Direct step with the pixels grouped by weight value first: each pixel
/// sums over the `G` distinct weight values, `N·G` evaluations.
pub fn grouped_nf_step_counted<T: Scalar, P: Profile<T>>(
    weights: &Image<T>,
    values: &Image<T>,
    k: &Kernel<T, P>,
    counter: &EvalCounter,
) -> Result<Image<T>> {
    weights.check_same_shape(values)?;
    let w = weights.data();
    let x = values.data();
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w[a].partial_cmp(&w[b]).expect("finite"));
    // (weight value, mass, Σ values)
    let mut groups: Vec<(T, T, T)> = Vec::new();
    for &i in &order {
        match groups.last_mut() {
            Some(g) if g.0 == w[i] => {
                g.1 = g.1 + T::one();
                g.2 = g.2 + x[i];
            }
            _ => groups.push((w[i], T::one(), x[i])),
        }
    }
    let (lo, hi) = (values.min(), values.max());
    let out = par_map(w.len(), |i| {
        let mut num = T::zero();
        let mut den = T::zero();
        for &(gw, mass, sum) in &groups {
            let kw = k.eval_scaled(w[i] - gw);
            num = num + kw * sum;
            den = den + kw * mass;
        }
        clamp_to(num / den, lo, hi)
    });
    counter.add((w.len() * groups.len()) as u64);
    Ok(values.with_data(out))
}

/// Kindermann functional on pixels, `Σ_x Σ_y g((u(x) − u(y))²)`.
pub fn pixel_functional_j<T: Scalar, P: Profile<T>>(img: &Image<T>, k: &Kernel<T, P>) -> T {
    let u = img.data();
    par_map(u.len(), |i| {
        u.iter()
            .map(|&v| {
                let d = u[i] - v;
                k.g_primitive(d * d).expect("nonnegative")
            })
            .sum::<T>()
    })
    .into_iter()
    .sum()
}

/// Result of [`direct_nf_until`].
#[derive(Debug, Clone)]
pub struct DirectRun<T> {
    pub image: Image<T>,
    pub j_values: Vec<T>,
    pub stop_reason: StopReason,
}

impl<T> DirectRun<T> {
    pub fn steps(&self) -> usize {
        self.j_values.len() - 1
    }
}

/// Direct filter with the same stopping rule as [`crate::filter1d::iterate`],
/// evaluating `J` over pixel pairs.
pub fn direct_nf_until<T: Scalar, P: Profile<T>>(
    img: &Image<T>,
    cfg: &FilterConfig<T, P>,
    counter: &EvalCounter,
) -> Result<DirectRun<T>> {
    cfg.validate()?;
    let k = &cfg.kernel;
    let mut run = DirectRun {
        image: img.clone(),
        j_values: vec![pixel_functional_j(img, k)],
        stop_reason: StopReason::Tolerance,
    };
    if run.j_values[0] == T::zero() {
        return Ok(run);
    }
    for step in 1..=cfg.max_iterations {
        let weights = match cfg.scheme {
            Scheme::Varying => &run.image,
            Scheme::Fixed => img,
        };
        let next = direct_nf_step_counted(weights, &run.image, k, counter)?;
        let j_prev = *run.j_values.last().expect("nonempty");
        let j_next = pixel_functional_j(&next, k);
        run.image = next;
        run.j_values.push(j_next);
        if j_next == T::zero() || (j_next - j_prev).abs() / j_prev.abs() < cfg.stop_tolerance {
            run.stop_reason = StopReason::Tolerance;
            break;
        }
        if step == cfg.max_iterations {
            run.stop_reason = StopReason::MaxIterations;
        }
    }
    Ok(run)
}

/// Bilateral filter, applied once. Spatial weights `exp(−|x−y|²/ρ²)` are
/// truncated to a square window of radius `window_radius` and normalized
/// over the pixels of that window lying inside the image.
pub fn bilateral<T: Scalar, P: Profile<T>>(
    img: &Image<T>,
    k: &Kernel<T, P>,
    sp: &SpatialConfig<T>,
) -> Result<Image<T>> {
    let (height, width) = img.dims2()?;
    sp.validate()?;
    let u = img.data();
    let win = sp.window_radius as isize;
    let rho2 = sp.rho * sp.rho;
    let (lo, hi) = (img.min(), img.max());
    let out = par_map(u.len(), |i| {
        let (r, c) = ((i / width) as isize, (i % width) as isize);
        let mut num = T::zero();
        let mut den = T::zero();
        for dr in -win..=win {
            let rr = r + dr;
            if rr < 0 || rr >= height as isize {
                continue;
            }
            for dc in -win..=win {
                let cc = c + dc;
                if cc < 0 || cc >= width as isize {
                    continue;
                }
                let y = rr as usize * width + cc as usize;
                let dist2 = T::lit((dr * dr + dc * dc) as f64);
                let wgt = k.eval_scaled(u[i] - u[y]) * (-(dist2 / rho2)).exp();
                num = num + wgt * u[y];
                den = den + wgt;
            }
        }
        clamp_to(num / den, lo, hi)
    });
    Ok(img.with_data(out))
}

/// Half-sample symmetric reflection of `i` into `0..n`.
fn reflect(mut i: isize, n: usize) -> usize {
    let n = n as isize;
    loop {
        if i < 0 {
            i = -i - 1;
        } else if i >= n {
            i = 2 * n - i - 1;
        } else {
            return i as usize;
        }
    }
}

/// Nonlocal Means, applied once. The patch distance is the
/// Gaussian-weighted (std `ρ`, normalized over the patch) sum of squared
/// differences, patches extended by mirror symmetry; weights are
/// `K_h(√d²)`, which is `exp(−d²/h²)` for the Gaussian kernel.
pub fn nlm<T: Scalar, P: Profile<T>>(img: &Image<T>, k: &Kernel<T, P>, sp: &SpatialConfig<T>) -> Result<Image<T>> {
    let (height, width) = img.dims2()?;
    sp.validate()?;
    let u = img.data();
    let p = sp.patch_radius as isize;
    let win = sp.window_radius as isize;

    let mut offsets: Vec<(isize, isize, T)> = Vec::new();
    let two_rho2 = T::lit(2.0) * sp.rho * sp.rho;
    for dr in -p..=p {
        for dc in -p..=p {
            let g = (-(T::lit((dr * dr + dc * dc) as f64) / two_rho2)).exp();
            offsets.push((dr, dc, g));
        }
    }
    let total: T = offsets.iter().map(|o| o.2).sum();
    for o in &mut offsets {
        o.2 = o.2 / total;
    }

    let (lo, hi) = (img.min(), img.max());
    let at = |r: isize, c: isize| u[reflect(r, height) * width + reflect(c, width)];
    let out = par_map(u.len(), |i| {
        let (r, c) = ((i / width) as isize, (i % width) as isize);
        let mut num = T::zero();
        let mut den = T::zero();
        for rr in (r - win).max(0)..=(r + win).min(height as isize - 1) {
            for cc in (c - win).max(0)..=(c + win).min(width as isize - 1) {
                let d2: T = offsets
                    .iter()
                    .map(|&(dr, dc, g)| {
                        let diff = at(r + dr, c + dc) - at(rr + dr, cc + dc);
                        g * diff * diff
                    })
                    .sum();
                let wgt = k.eval_scaled(d2.sqrt());
                num = num + wgt * at(rr, cc);
                den = den + wgt;
            }
        }
        clamp_to(num / den, lo, hi)
    });
    Ok(img.with_data(out))
}
