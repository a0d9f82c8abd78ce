//! Equal-frequency binned means as a conditional-expectation estimator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A transformation stored as a knot table. Evaluates by linear interpolation
/// between knots and holds the end values constant outside them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformationCurve<T> {
    knots: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> TransformationCurve<T> {
    pub fn new(knots: Vec<T>, values: Vec<T>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::InvalidParameter(
                "curve needs at least one knot".into(),
            ));
        }
        if knots.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: knots.len(),
                found: values.len(),
            });
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "curve contains non-finite entries".into(),
            ));
        }
        if knots.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(
                "curve knots must be strictly increasing".into(),
            ));
        }
        Ok(Self { knots, values })
    }

    pub fn knots(&self) -> &[T] {
        &self.knots
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    /// First and last knot.
    pub fn domain(&self) -> (T, T) {
        (self.knots[0], self.knots[self.knots.len() - 1])
    }

    pub fn evaluate(&self, x: T) -> T {
        let last = self.knots.len() - 1;
        if x <= self.knots[0] {
            return self.values[0];
        }
        if x >= self.knots[last] {
            return self.values[last];
        }
        let hi = self.knots.partition_point(|&k| k <= x);
        let lo = hi - 1;
        let w = (x - self.knots[lo]) / (self.knots[hi] - self.knots[lo]);
        self.values[lo] + w * (self.values[hi] - self.values[lo])
    }

    /// Applies `v ↦ scale·v + shift` to every value.
    pub fn affine(&self, scale: T, shift: T) -> Self {
        Self {
            knots: self.knots.clone(),
            values: self.values.iter().map(|&v| scale * v + shift).collect(),
        }
    }

    /// Evaluates at `points` evenly spaced points spanning `[lo, hi]`.
    pub fn sample_grid(&self, lo: T, hi: T, points: usize) -> Vec<T> {
        grid(lo, hi, points)
            .into_iter()
            .map(|x| self.evaluate(x))
            .collect()
    }
}

pub(crate) fn grid<T: Real>(lo: T, hi: T, points: usize) -> Vec<T> {
    if points == 1 {
        return vec![lo];
    }
    let step = (hi - lo) / T::from_usize(points - 1).unwrap();
    (0..points)
        .map(|i| {
            if i + 1 == points {
                hi
            } else {
                lo + step * T::from_usize(i).unwrap()
            }
        })
        .collect()
}

/// Output of [`conditional_expectation`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinnedFit<T> {
    pub curve: TransformationCurve<T>,
    pub bins_used: usize,
    /// Set when there were fewer samples than requested bins.
    pub reduced: bool,
}

/// Bin count actually used for `n` samples when `requested` were asked for.
pub fn effective_bins(n: usize, requested: usize) -> (usize, bool) {
    if n < requested {
        ((n / 5).max(2).min(n.max(1)), true)
    } else {
        (requested, false)
    }
}

/// Binning of one variable, reusable across many responses.
///
/// Samples are ordered by value with ties broken by index, cut into groups of
/// near-equal size, and group boundaries are pushed forward so tied values never
/// straddle two bins. That keeps the knots (bin means) strictly increasing.
#[derive(Clone, Debug)]
pub(crate) struct BinnedSmoother<T> {
    order: Vec<usize>,
    bounds: Vec<usize>,
    knots: Vec<T>,
    lower: Vec<usize>,
    weight: Vec<T>,
    reduced: bool,
}

impl<T: Real> BinnedSmoother<T> {
    pub(crate) fn new(x: &[T], bins: usize) -> Result<Self> {
        let n = x.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "cannot smooth an empty sample".into(),
            ));
        }
        if bins == 0 {
            return Err(Error::InvalidParameter("bin count must be positive".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "smoother input contains non-finite values".into(),
            ));
        }
        let (bins, reduced) = effective_bins(n, bins);

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| x[a].total_order(&x[b]).then(a.cmp(&b)));

        let mut bounds = vec![0usize];
        let mut start = 0usize;
        for i in 1..bins {
            let mut end = (i * n / bins).max(start + 1);
            while end < n && x[order[end]] == x[order[end - 1]] {
                end += 1;
            }
            if end >= n {
                break;
            }
            bounds.push(end);
            start = end;
        }
        bounds.push(n);

        let knots: Vec<T> = bounds
            .windows(2)
            .map(|w| {
                let s: T = order[w[0]..w[1]].iter().map(|&i| x[i]).sum();
                s / T::from_usize(w[1] - w[0]).unwrap()
            })
            .collect();

        let last = knots.len() - 1;
        let mut lower = vec![0usize; n];
        let mut weight = vec![T::zero(); n];
        let mut j = 0usize;
        for &i in &order {
            let xi = x[i];
            while j < last && knots[j + 1] <= xi {
                j += 1;
            }
            lower[i] = j;
            weight[i] = if j == last || xi <= knots[j] {
                T::zero()
            } else {
                (xi - knots[j]) / (knots[j + 1] - knots[j])
            };
        }

        Ok(Self {
            order,
            bounds,
            knots,
            lower,
            weight,
            reduced,
        })
    }

    pub(crate) fn knots(&self) -> &[T] {
        &self.knots
    }

    pub(crate) fn bins(&self) -> usize {
        self.knots.len()
    }

    pub(crate) fn reduced(&self) -> bool {
        self.reduced
    }

    /// Mean of `z` within each bin.
    pub(crate) fn bin_means(&self, z: &[T]) -> Vec<T> {
        self.bounds
            .windows(2)
            .map(|w| {
                let s: T = self.order[w[0]..w[1]].iter().map(|&i| z[i]).sum();
                s / T::from_usize(w[1] - w[0]).unwrap()
            })
            .collect()
    }

    /// Interpolates knot `values` back onto every sample.
    pub(crate) fn evaluate_samples(&self, values: &[T]) -> Vec<T> {
        self.lower
            .iter()
            .zip(&self.weight)
            .map(|(&j, &w)| {
                if w == T::zero() {
                    values[j]
                } else {
                    values[j] + w * (values[j + 1] - values[j])
                }
            })
            .collect()
    }
}

/// Estimates `E[z | x]` by equal-frequency binned means of `z`, knots at the
/// within-bin means of `x`.
pub fn conditional_expectation<T: Real>(x: &[T], z: &[T], bins: usize) -> Result<BinnedFit<T>> {
    if x.len() != z.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            found: z.len(),
        });
    }
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(
            "smoother target contains non-finite values".into(),
        ));
    }
    let smoother = BinnedSmoother::new(x, bins)?;
    let values = smoother.bin_means(z);
    Ok(BinnedFit {
        bins_used: smoother.bins(),
        reduced: smoother.reduced(),
        curve: TransformationCurve::new(smoother.knots.clone(), values)?,
    })
}
