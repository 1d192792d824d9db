//! The Neighborhood filter iterated on decreasing rearrangements.
//!
//! Because the filter never splits a level set, every iterate lives on the
//! mass partition of the initial rearrangement `v₀`. One step is
//!
//! ```text
//! v_{n+1}[i] = Σ_j K_h(w_i − w_j)·m_j·v_n[j] / Σ_j K_h(w_i − w_j)·m_j
//! ```
//!
//! with weights `w = v_n` (varying kernel) or `w = v₀` (fixed kernel). The
//! integrals over `[0, |Ω|]` are exact mass-weighted sums over the grouped
//! levels, so a step costs `Q²` kernel evaluations whatever the image size.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::kernels::{Builtin, EvalCounter, Kernel, Profile};
use crate::rearrangement::Rearrangement;
use crate::scalar::Scalar;

/// Rows below this many entries are filtered sequentially.
const PAR_THRESHOLD: usize = 128;

/// Which iterate supplies the kernel weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    /// `m = n`: weights follow the current iterate (nonlinear).
    #[default]
    Varying,
    /// `m = 0`: weights frozen at the initial rearrangement (linear).
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig<T, P = Builtin<T>> {
    pub scheme: Scheme,
    pub kernel: Kernel<T, P>,
    /// Relative `J_*` decrement below which iteration stops.
    pub stop_tolerance: T,
    pub max_iterations: usize,
}

impl<T: Scalar, P: Profile<T>> FilterConfig<T, P> {
    /// Varying-kernel scheme, tolerance `1e-5`, at most 100 steps.
    pub fn new(kernel: Kernel<T, P>) -> Self {
        Self {
            scheme: Scheme::Varying,
            kernel,
            stop_tolerance: T::lit(1e-5),
            max_iterations: 100,
        }
    }

    pub fn scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn stop_tolerance(mut self, tol: T) -> Self {
        self.stop_tolerance = tol;
        self
    }

    pub fn max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.stop_tolerance.is_finite() && self.stop_tolerance > T::zero()) {
            return invalid(format!("stop tolerance must be positive, got {}", self.stop_tolerance));
        }
        if self.max_iterations == 0 {
            return invalid("max_iterations must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Tolerance,
    MaxIterations,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::Tolerance => "tolerance",
            StopReason::MaxIterations => "max_iterations",
        }
    }
}

/// Every iterate `v₀ … v_n` with its `J_*` value and sup norm.
#[derive(Debug, Clone)]
pub struct FilterTrace<T> {
    pub iterates: Vec<Rearrangement<T>>,
    pub j_values: Vec<T>,
    pub sup_norms: Vec<T>,
    pub stop_reason: StopReason,
}

impl<T: Scalar> FilterTrace<T> {
    pub fn last(&self) -> &Rearrangement<T> {
        self.iterates.last().expect("trace holds v0")
    }

    /// Number of filter steps taken (iterates minus one).
    pub fn steps(&self) -> usize {
        self.iterates.len() - 1
    }
}

/// One Neighborhood filter step on a rearrangement.
///
/// `weights` supplies the kernel arguments and `values` the averaged
/// quantity; both must share the same mass list.
pub fn nf_step<T: Scalar, P: Profile<T>>(
    weights: &Rearrangement<T>,
    values: &Rearrangement<T>,
    k: &Kernel<T, P>,
) -> Result<Rearrangement<T>> {
    nf_step_counted(weights, values, k, &EvalCounter::new())
}

/// [`nf_step`] that adds the number of kernel evaluations to `counter`.
pub fn nf_step_counted<T: Scalar, P: Profile<T>>(
    weights: &Rearrangement<T>,
    values: &Rearrangement<T>,
    k: &Kernel<T, P>,
    counter: &EvalCounter,
) -> Result<Rearrangement<T>> {
    if !weights.same_partition(values) {
        return invalid("weights and values must share the same mass partition");
    }
    let w = weights.values();
    let x = values.values();
    let m = values.masses();
    let lo = values.min_value();
    let hi = values.max_value();

    let row = |i: usize| -> (T, u64) {
        let wi = w[i];
        let mut num = T::zero();
        let mut den = T::zero();
        for j in 0..w.len() {
            let kw = k.eval_scaled(wi - w[j]) * m[j];
            num = num + kw * x[j];
            den = den + kw;
        }
        // a convex combination of x; the clamp only removes rounding excursions
        ((num / den).max(lo).min(hi), w.len() as u64)
    };

    let rows: Vec<(T, u64)> = if w.len() >= PAR_THRESHOLD {
        (0..w.len()).into_par_iter().map(row).collect()
    } else {
        (0..w.len()).map(row).collect()
    };
    counter.add(rows.iter().map(|r| r.1).sum());
    let mut out: Vec<T> = rows.into_iter().map(|r| r.0).collect();
    if weights.is_non_increasing() && values.is_non_increasing() {
        restore_order(&mut out, hi.abs().max(lo.abs()));
    }
    Ok(values.with_values(out))
}

/// Running minimum over a row the exact step keeps non-increasing.
///
/// Nearly collapsed levels can come out a few ulps out of order; only those
/// rounding inversions are removed.
fn restore_order<T: Scalar>(out: &mut [T], scale: T) {
    let slack = T::lit(64.0) * T::epsilon() * scale.max(T::one());
    for i in 1..out.len() {
        if out[i] > out[i - 1] {
            debug_assert!(out[i] - out[i - 1] <= slack, "order inversion beyond rounding");
            out[i] = out[i - 1];
        }
    }
}

/// Rearranged Kindermann functional
/// `J_*(v) = Σ_i Σ_j m_i m_j g((v_i − v_j)²)` with `g = ∫_0^s K_h(√t) dt`.
///
/// Up to the constant factor `h²` this is `∫∫ g₁((v(s) − v(t))²/h²) ds dt`
/// for the unit-scale primitive `g₁`, whose descent direction is exactly
/// the varying-kernel filter step.
pub fn functional_j<T: Scalar, P: Profile<T>>(v: &Rearrangement<T>, k: &Kernel<T, P>) -> T {
    let x = v.values();
    let m = v.masses();
    let row = |i: usize| -> T {
        let mut acc = T::zero();
        for j in (i + 1)..x.len() {
            let d = x[i] - x[j];
            let g = k.g_primitive(d * d).expect("squared gap is nonnegative");
            acc = acc + m[j] * g;
        }
        m[i] * acc
    };
    let rows: Vec<T> = if x.len() >= PAR_THRESHOLD {
        (0..x.len()).into_par_iter().map(row).collect()
    } else {
        (0..x.len()).map(row).collect()
    };
    // g(0) = 0, so the diagonal vanishes and the double sum is twice the upper triangle
    T::lit(2.0) * rows.into_iter().sum::<T>()
}

/// Iterates the filter from `v0` until the relative `J_*` decrement drops
/// below the configured tolerance or the step budget runs out.
pub fn iterate<T: Scalar, P: Profile<T>>(v0: &Rearrangement<T>, cfg: &FilterConfig<T, P>) -> Result<FilterTrace<T>> {
    iterate_counted(v0, cfg, &EvalCounter::new())
}

pub fn iterate_counted<T: Scalar, P: Profile<T>>(
    v0: &Rearrangement<T>,
    cfg: &FilterConfig<T, P>,
    counter: &EvalCounter,
) -> Result<FilterTrace<T>> {
    cfg.validate()?;
    let k = &cfg.kernel;
    let j0 = functional_j(v0, k);
    let mut trace = FilterTrace {
        iterates: vec![v0.clone()],
        j_values: vec![j0],
        sup_norms: vec![v0.sup_norm()],
        stop_reason: StopReason::Tolerance,
    };
    // J_* = 0 only for constants, the filter's fixed points
    if j0 == T::zero() {
        return Ok(trace);
    }

    for step in 1..=cfg.max_iterations {
        let current = trace.last();
        let weights = match cfg.scheme {
            Scheme::Varying => current,
            Scheme::Fixed => v0,
        };
        let next = nf_step_counted(weights, current, k, counter)?;
        let j_prev = *trace.j_values.last().expect("nonempty");
        let j_next = functional_j(&next, k);
        trace.sup_norms.push(next.sup_norm());
        trace.j_values.push(j_next);
        trace.iterates.push(next);

        if j_next == T::zero() || ((j_next - j_prev).abs() / j_prev.abs()) < cfg.stop_tolerance {
            trace.stop_reason = StopReason::Tolerance;
            break;
        }
        if step == cfg.max_iterations {
            trace.stop_reason = StopReason::MaxIterations;
        }
    }
    Ok(trace)
}

/// Second-order expansion check of one varying-kernel step.
#[derive(Debug, Clone)]
pub struct ExpansionResidual<T> {
    /// Sample positions `t` of the interior points.
    pub positions: Vec<T>,
    /// `v₁(t) − [v₀ + α₁ k̃_h v₀′ h − α₂ (v₀″/v₀′²) h²]`.
    pub residual: Vec<T>,
    /// Border function `k̃_h(t)` at the same points.
    pub k_tilde: Vec<T>,
}

impl<T: Scalar> ExpansionResidual<T> {
    pub fn max_abs_residual(&self) -> T {
        self.residual.iter().fold(T::zero(), |acc, r| acc.max(r.abs()))
    }
}

/// `α₁` of the expansion.
pub fn alpha1<T: Scalar>() -> T {
    T::lit(1.0 / std::f64::consts::PI.sqrt())
}

/// `α₂` of the expansion.
pub fn alpha2<T: Scalar>() -> T {
    T::one()
}

/// Compares one filter step on a smooth decreasing profile with its
/// small-`h` expansion
///
/// ```text
/// v₁ ≈ v₀ + α₁ k̃_h v₀′ h − α₂ (v₀″ / v₀′²) h²,
/// k̃_h(t) = K_h(v₀(t) − v₀(|Ω|)) / v₀′(|Ω|) − K_h(v₀(t) − v₀(0)) / v₀′(0).
/// ```
///
/// `samples` are midpoint samples of `v₀` on a uniform grid of
/// `domain_length`; each carries mass `domain_length / M`. Derivatives are
/// second-order finite differences. Only the middle half of the domain is
/// reported.
pub fn expansion_residual<T: Scalar>(samples: &[T], domain_length: T, k: &Kernel<T>) -> Result<ExpansionResidual<T>> {
    let n = samples.len();
    if n < 256 {
        return invalid(format!("expansion check needs at least 256 samples, got {n}"));
    }
    if !k.is_gaussian() {
        return invalid("expansion check is defined for the Gaussian kernel");
    }
    if !(domain_length.is_finite() && domain_length > T::zero()) {
        return invalid("domain length must be positive");
    }
    if samples
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Greater))
    {
        return invalid("sampled profile must be strictly decreasing");
    }

    let dt = domain_length / T::from_count(n);
    let two = T::lit(2.0);
    let v = samples;

    let mut d1 = vec![T::zero(); n];
    let mut d2 = vec![T::zero(); n];
    d1[0] = (T::lit(-3.0) * v[0] + T::lit(4.0) * v[1] - v[2]) / (two * dt);
    d1[n - 1] = (T::lit(3.0) * v[n - 1] - T::lit(4.0) * v[n - 2] + v[n - 3]) / (two * dt);
    d2[0] = (two * v[0] - T::lit(5.0) * v[1] + T::lit(4.0) * v[2] - v[3]) / (dt * dt);
    d2[n - 1] = (two * v[n - 1] - T::lit(5.0) * v[n - 2] + T::lit(4.0) * v[n - 3] - v[n - 4]) / (dt * dt);
    for i in 1..n - 1 {
        d1[i] = (v[i + 1] - v[i - 1]) / (two * dt);
        d2[i] = (v[i + 1] - two * v[i] + v[i - 1]) / (dt * dt);
    }
    if d1.iter().any(|d| d.abs() < T::lit(1e-8)) {
        return invalid("slope too small: |v'| < 1e-8 makes v''/v'^2 unstable");
    }

    let v0 = Rearrangement::new(v.to_vec(), vec![dt; n])?;
    let v1 = nf_step(&v0, &v0, k)?;

    let h = k.h();
    let (first, last) = (v[0], v[n - 1]);
    let (slope_first, slope_last) = (d1[0], d1[n - 1]);
    let (a1, a2) = (alpha1::<T>(), alpha2::<T>());

    let interior = n / 4..(3 * n) / 4;
    let mut out = ExpansionResidual {
        positions: Vec::with_capacity(interior.len()),
        residual: Vec::with_capacity(interior.len()),
        k_tilde: Vec::with_capacity(interior.len()),
    };
    for i in interior {
        let kt = k.eval_scaled(v[i] - last) / slope_last - k.eval_scaled(v[i] - first) / slope_first;
        let predicted = v[i] + a1 * kt * d1[i] * h - a2 * d2[i] / (d1[i] * d1[i]) * h * h;
        out.positions.push((T::from_count(i) + T::lit(0.5)) * dt);
        out.residual.push(v1.values()[i] - predicted);
        out.k_tilde.push(kt);
    }
    Ok(out)
}
