//! Scalar abstraction shared by the numeric modules.

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type the measures, optimizer and ACE engine are written against.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Tolerance used when checking that a probability vector sums to one.
    fn normalization_tol() -> Self;

    /// IEEE total order, so NaN-free sorts are deterministic.
    fn total_order(&self, other: &Self) -> Ordering;

    /// Converts an `f64` literal. Only used with constants that fit the type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn total_order(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }

    fn normalization_tol() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn total_order(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }

    fn normalization_tol() -> Self {
        1e-5
    }
}

/// Population mean. Returns zero for an empty slice.
pub(crate) fn mean<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::zero();
    }
    xs.iter().copied().sum::<T>() / T::from_usize(xs.len()).unwrap()
}

/// Population standard deviation.
pub(crate) fn std_dev<T: Real>(xs: &[T]) -> T {
    let m = mean(xs);
    let var = mean(&xs.iter().map(|&x| (x - m) * (x - m)).collect::<Vec<_>>());
    var.sqrt()
}

/// Pearson correlation; zero when either side has no spread.
pub(crate) fn pearson<T: Real>(a: &[T], b: &[T]) -> T {
    let ma = mean(a);
    let mb = mean(b);
    let mut sab = T::zero();
    let mut saa = T::zero();
    let mut sbb = T::zero();
    for (&x, &y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab = sab + dx * dy;
        saa = saa + dx * dx;
        sbb = sbb + dy * dy;
    }
    if saa <= T::zero() || sbb <= T::zero() {
        return T::zero();
    }
    let r = sab / (saa.sqrt() * sbb.sqrt());
    r.max(-T::one()).min(T::one())
}
