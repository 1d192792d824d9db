//! Intensity kernels `K_h(ξ) = K(ξ/h)`.
//!
//! Two profiles ship: the Gaussian `K(s) = exp(−s²)` and the power-decay
//! family `K(s) = 1/(1 + |s|^p)`, `p > 1`. Any other nonnegative profile can
//! be plugged in through [`Profile`]; the monotonicity guarantees of the
//! iterated filter only hold for profiles passing the decay condition
//! (see [`check_decay_condition`]).

use std::fmt::Debug;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{invalid, Result};
use crate::rng::SeededStream;
use crate::scalar::Scalar;

/// Unit-scale kernel profile `K`.
pub trait Profile<T: Scalar>: Debug + Send + Sync {
    fn value(&self, s: T) -> T;

    /// `K'(s)`.
    fn derivative(&self, s: T) -> T;

    /// Closed form of `∫_0^x K(√τ) dτ`, if one is known.
    fn sqrt_primitive(&self, _x: T) -> Option<T> {
        None
    }
}

/// Built-in kernel profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin<T> {
    Gaussian,
    PowerDecay { p: T },
}

impl<T: Scalar> Profile<T> for Builtin<T> {
    #[inline]
    fn value(&self, s: T) -> T {
        match *self {
            Builtin::Gaussian => (-(s * s)).exp(),
            Builtin::PowerDecay { p } => (T::one() + s.abs().powf(p)).recip(),
        }
    }

    fn derivative(&self, s: T) -> T {
        match *self {
            Builtin::Gaussian => T::lit(-2.0) * s * (-(s * s)).exp(),
            Builtin::PowerDecay { p } => {
                let a = s.abs();
                let denom = T::one() + a.powf(p);
                -p * a.powf(p - T::one()) * s.signum() / (denom * denom)
            }
        }
    }

    fn sqrt_primitive(&self, x: T) -> Option<T> {
        match *self {
            // ∫_0^x e^{-τ} dτ
            Builtin::Gaussian => Some(-(-x).exp_m1()),
            Builtin::PowerDecay { .. } => None,
        }
    }
}

/// A profile together with its scale `h > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel<T, P = Builtin<T>> {
    profile: P,
    h: T,
}

impl<T: Scalar> Kernel<T> {
    pub fn gaussian(h: T) -> Result<Self> {
        Self::with_profile(Builtin::Gaussian, h)
    }

    /// Power decay `1/(1 + |s|^p)`; requires `p > 1`.
    pub fn power_decay(p: T, h: T) -> Result<Self> {
        if !(p.is_finite() && p > T::one()) {
            return invalid(format!("power-decay exponent must exceed 1, got {p}"));
        }
        Self::with_profile(Builtin::PowerDecay { p }, h)
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.profile, Builtin::Gaussian)
    }
}

impl<T: Scalar, P: Profile<T>> Kernel<T, P> {
    pub fn with_profile(profile: P, h: T) -> Result<Self> {
        if !(h.is_finite() && h > T::zero()) {
            return invalid(format!("kernel scale h must be positive, got {h}"));
        }
        let k0 = profile.value(T::zero());
        if !(k0.is_finite() && k0 > T::zero()) {
            return invalid("kernel profile must be positive and finite at zero");
        }
        Ok(Self { profile, h })
    }

    pub fn h(&self) -> T {
        self.h
    }

    pub fn profile(&self) -> &P {
        &self.profile
    }

    /// Same profile at another scale.
    pub fn rescaled(&self, h: T) -> Result<Self>
    where
        P: Clone,
    {
        Self::with_profile(self.profile.clone(), h)
    }

    /// `K_h(ξ) = K(ξ/h)`.
    #[inline]
    pub fn eval_scaled(&self, xi: T) -> T {
        self.profile.value(xi / self.h)
    }

    /// `d/dξ K_h(ξ) = K'(ξ/h)/h`.
    pub fn derivative_scaled(&self, xi: T) -> T {
        self.profile.derivative(xi / self.h) / self.h
    }

    /// `g(s) = ∫_0^s K_h(√t) dt`.
    ///
    /// Uses the profile's closed form when it has one. Otherwise `t = h²u²`
    /// turns this into `h² ∫_0^{√s/h} 2u K(u) du`, a smooth integrand, which
    /// adaptive Gauss–Kronrod evaluates to a relative tolerance of `1e-13`.
    pub fn g_primitive(&self, s: T) -> Result<T> {
        if !s.is_finite() || s < T::zero() {
            return invalid(format!("g_primitive needs a finite s >= 0, got {s}"));
        }
        if s == T::zero() {
            return Ok(T::zero());
        }
        let h2 = self.h * self.h;
        if let Some(unit) = self.profile.sqrt_primitive(s / h2) {
            return Ok(h2 * unit);
        }
        let x = (s.sqrt() / self.h).as_f64();
        let f = |u: f64| 2.0 * u * self.profile.value(T::lit(u)).as_f64();
        Ok(h2 * T::lit(gauss_kronrod(f, 0.0, x, 1e-13)))
    }
}

#[allow(clippy::excessive_precision)]
const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
#[allow(clippy::excessive_precision)]
const KRONROD_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7)
#[allow(clippy::excessive_precision)]
const GAUSS_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// 15-point Kronrod estimate and its difference from the embedded 7-point
/// Gauss rule.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = KRONROD_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_WEIGHTS[3] * fc;
    for i in 0..7 {
        let pair = f(c - r * GK_NODES[i]) + f(c + r * GK_NODES[i]);
        kronrod += KRONROD_WEIGHTS[i] * pair;
        if i % 2 == 1 {
            gauss += GAUSS_WEIGHTS[i / 2] * pair;
        }
    }
    (kronrod * r, (kronrod - gauss).abs() * r)
}

/// Globally adaptive Gauss–Kronrod quadrature of `f` over `[a, b]`,
/// bisecting the interval with the largest error estimate.
pub(crate) fn gauss_kronrod(f: impl Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    const MAX_INTERVALS: usize = 500;
    let (value, error) = gk15(&f, a, b);
    let mut parts = vec![(a, b, value, error)];
    let (mut total, mut total_err) = (value, error);
    while total_err > rel_tol * total.abs() && parts.len() < MAX_INTERVALS {
        let worst = (0..parts.len())
            .max_by(|&i, &j| parts[i].3.total_cmp(&parts[j].3))
            .expect("nonempty");
        let (lo, hi, v, e) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let left = gk15(&f, lo, mid);
        let right = gk15(&f, mid, hi);
        total += left.0 + right.0 - v;
        total_err += left.1 + right.1 - e;
        parts.push((lo, mid, left.0, left.1));
        parts.push((mid, hi, right.0, right.1));
    }
    // re-sum to shed the drift of the running updates
    parts.iter().map(|p| p.2).sum()
}

/// `R₁ = (ξ₁−ξ₂)(K′(ξ−ξ₁)K(ξ−ξ₂) − K′(ξ−ξ₂)K(ξ−ξ₁))` for the scaled kernel.
pub fn decay_condition_r1<T: Scalar, P: Profile<T>>(k: &Kernel<T, P>, xi: T, xi1: T, xi2: T) -> T {
    let a = xi - xi1;
    let b = xi - xi2;
    (xi1 - xi2) * (k.derivative_scaled(a) * k.eval_scaled(b) - k.derivative_scaled(b) * k.eval_scaled(a))
}

/// Monte-Carlo check of `R₁ ≥ 0` over `samples` seeded triples drawn
/// uniformly from `[−4h, 4h]³`.
///
/// The admissible slack is `−1e-12`, widened to `−16·ε` for scalars whose
/// epsilon makes `1e-12` unreachable.
pub fn check_decay_condition<T: Scalar, P: Profile<T>>(k: &Kernel<T, P>, samples: usize, seed: u64) -> Result<bool> {
    if samples == 0 {
        return invalid("decay check needs at least one sample");
    }
    let slack = T::lit(1e-12).max(T::lit(16.0) * T::epsilon());
    let span = 4.0 * k.h().as_f64();
    let mut rng = SeededStream::new(seed);
    for _ in 0..samples {
        let xi = T::lit(rng.uniform_in(-span, span));
        let xi1 = T::lit(rng.uniform_in(-span, span));
        let xi2 = T::lit(rng.uniform_in(-span, span));
        if decay_condition_r1(k, xi, xi1, xi2) < -slack {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Thread-safe tally of kernel evaluations.
#[derive(Debug, Default)]
pub struct EvalCounter(AtomicU64);

impl EvalCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&self, n: u64) {
        self.0.fetch_add(n, Ordering::Relaxed);
    }

    pub fn get(&self) -> u64 {
        self.0.load(Ordering::Relaxed)
    }

    /// Returns the current count and resets it to zero.
    pub fn take(&self) -> u64 {
        self.0.swap(0, Ordering::Relaxed)
    }
}
