//! Scalar abstraction: every numeric routine in this crate is generic over a
//! real field so the same code runs at f32 or f64 precision. The concrete
//! aliases at the crate root fix f64, which is what the tolerances in the
//! acceptance suite are calibrated for.

use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar: f32 or f64.
pub trait Scalar:
    nalgebra::RealField
    + Copy
    + Default
    + FromPrimitive
    + ToPrimitive
    + std::iter::Sum<Self>
    + std::fmt::Display
    + std::fmt::LowerExp
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion to f64 (exact for f32/f64), for reporting and export.
    #[inline]
    fn f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Shorthand for lifting an f64 constant into the working scalar type.
#[inline]
pub fn sc<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 constant must convert")
}

/// log(sum(exp(v))) evaluated stably; empty input yields -inf.
pub fn log_sum_exp<T: Scalar>(v: &[T]) -> T {
    let mut mx = sc::<T>(f64::NEG_INFINITY);
    for &x in v {
        if x > mx {
            mx = x;
        }
    }
    if mx == sc::<T>(f64::NEG_INFINITY) {
        return mx;
    }
    let sum: T = v.iter().map(|&x| (x - mx).exp()).sum();
    mx + sum.ln()
}

/// Table of log k! for k = 0..=n, built by direct summation of logs.
/// Exact to a few ulps for the system sizes this crate targets.
pub fn log_factorials<T: Scalar>(n: usize) -> Vec<T> {
    let mut t = Vec::with_capacity(n + 1);
    let mut acc = T::zero();
    t.push(acc);
    for k in 1..=n {
        acc += sc::<T>(k as f64).ln();
        t.push(acc);
    }
    t
}

/// x * ln(x) with the boundary convention 0 * ln(0) = 0.
#[inline]
pub fn xlogx<T: Scalar>(x: T) -> T {
    if x <= T::zero() {
        T::zero()
    } else {
        x * x.ln()
    }
}

/// Least-squares line fit; returns (slope, intercept, r_squared).
pub fn linear_fit<T: Scalar>(xs: &[T], ys: &[T]) -> (T, T, T) {
    assert!(xs.len() == ys.len() && xs.len() >= 2, "need at least two points");
    let n = sc::<T>(xs.len() as f64);
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: T = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let r2 = if syy > T::zero() { T::one() - ss_res / syy } else { T::one() };
    (slope, intercept, r2)
}
