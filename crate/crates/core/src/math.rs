//! Scalar math helpers shared across the crate.
//!
//! Under `std` these forward to the intrinsics; under `no_std` + `libm`
//! they forward to libm. Everything downstream goes through these shims so
//! the rest of the crate stays target-agnostic.

#[cfg(feature = "std")]
mod imp {
    #[inline(always)]
    pub fn exp(x: f64) -> f64 {
        x.exp()
    }
    #[inline(always)]
    pub fn ln(x: f64) -> f64 {
        x.ln()
    }
    #[inline(always)]
    pub fn sqrt(x: f64) -> f64 {
        x.sqrt()
    }
}

#[cfg(all(not(feature = "std"), feature = "libm"))]
mod imp {
    #[inline(always)]
    pub fn exp(x: f64) -> f64 {
        libm::exp(x)
    }
    #[inline(always)]
    pub fn ln(x: f64) -> f64 {
        libm::log(x)
    }
    #[inline(always)]
    pub fn sqrt(x: f64) -> f64 {
        libm::sqrt(x)
    }
}

pub use imp::{exp, ln, sqrt};

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

/// Inverse of [`sigmoid`]; `p` must lie in (0, 1).
#[inline]
pub fn logit(p: f64) -> f64 {
    ln(p / (1.0 - p))
}

/// `log(sum(exp(xs)))` with max-subtraction; `-inf` entries are skipped.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let mut m = f64::NEG_INFINITY;
    for &x in xs {
        if x > m {
            m = x;
        }
    }
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let mut acc = 0.0;
    for &x in xs {
        if x > f64::NEG_INFINITY {
            acc += exp(x - m);
        }
    }
    m + ln(acc)
}

/// Derives an independent sub-seed from a master seed and a stream index
/// (splitmix64 over their combination). All randomness in training and
/// inference flows from one 64-bit seed through this function: stream 0,
/// 1, 2, ... for epochs, chains, or replicate runs.
pub fn subseed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Standard normal draw via the Marsaglia polar method.
pub fn standard_normal<R: rand::Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen::<f64>() * 2.0 - 1.0;
        let v: f64 = rng.gen::<f64>() * 2.0 - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * sqrt(-2.0 * ln(s) / s);
        }
    }
}

/// Forward-mode dual number: carries a value and one directional derivative.
///
/// The pairwise-marginal construction is written generically over [`Scalar`]
/// so its exact parameter Jacobian can be read off by re-running it with a
/// seeded dual, one direction at a time. The per-pair constructions are tiny
/// (`k <=` a few), so this costs next to nothing next to the `O(n^3)`
/// determinant work per likelihood evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual {
    pub val: f64,
    pub dot: f64,
}

impl Dual {
    #[inline]
    pub fn new(val: f64, dot: f64) -> Self {
        Dual { val, dot }
    }
}

/// The scalar interface needed by the marginal-realization code.
pub trait Scalar:
    Copy
    + core::ops::Add<Output = Self>
    + core::ops::Sub<Output = Self>
    + core::ops::Mul<Output = Self>
    + core::ops::Div<Output = Self>
{
    fn constant(x: f64) -> Self;
    fn value(self) -> f64;
    fn sigmoid(self) -> Self;
    fn exp(self) -> Self;
}

impl Scalar for f64 {
    #[inline]
    fn constant(x: f64) -> Self {
        x
    }
    #[inline]
    fn value(self) -> f64 {
        self
    }
    #[inline]
    fn sigmoid(self) -> Self {
        sigmoid(self)
    }
    #[inline]
    fn exp(self) -> Self {
        exp(self)
    }
}

impl core::ops::Add for Dual {
    type Output = Dual;
    #[inline]
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.val + o.val, self.dot + o.dot)
    }
}

impl core::ops::Sub for Dual {
    type Output = Dual;
    #[inline]
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.val - o.val, self.dot - o.dot)
    }
}

impl core::ops::Mul for Dual {
    type Output = Dual;
    #[inline]
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.val * o.val, self.dot * o.val + self.val * o.dot)
    }
}

impl core::ops::Div for Dual {
    type Output = Dual;
    #[inline]
    fn div(self, o: Dual) -> Dual {
        Dual::new(
            self.val / o.val,
            (self.dot * o.val - self.val * o.dot) / (o.val * o.val),
        )
    }
}

impl Scalar for Dual {
    #[inline]
    fn constant(x: f64) -> Self {
        Dual::new(x, 0.0)
    }
    #[inline]
    fn value(self) -> f64 {
        self.val
    }
    #[inline]
    fn sigmoid(self) -> Self {
        let s = sigmoid(self.val);
        Dual::new(s, s * (1.0 - s) * self.dot)
    }
    #[inline]
    fn exp(self) -> Self {
        let e = exp(self.val);
        Dual::new(e, e * self.dot)
    }
}

/// Max by primal value. An exact tie returns the average: the value is
/// unchanged and the derivative is the symmetric subgradient, which keeps
/// gradients permutation-invariant on symmetric models and matches what a
/// central finite difference measures across the kink.
#[inline]
pub fn smax<T: Scalar>(a: T, b: T) -> T {
    if a.value() > b.value() {
        a
    } else if a.value() < b.value() {
        b
    } else {
        (a + b) * T::constant(0.5)
    }
}

/// Min by primal value; ties as in [`smax`].
#[inline]
pub fn smin<T: Scalar>(a: T, b: T) -> T {
    if a.value() < b.value() {
        a
    } else if a.value() > b.value() {
        b
    } else {
        (a + b) * T::constant(0.5)
    }
}

/// Division that treats 0/0 as 0, for mass-conditioning on empty prefixes.
#[inline]
pub fn safe_div<T: Scalar>(num: T, den: T) -> T {
    if den.value() == 0.0 {
        T::constant(0.0)
    } else {
        num / den
    }
}
