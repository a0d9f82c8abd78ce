//! Golden-section minimization on a closed interval.
//!
//! Both endpoints are evaluated explicitly so a minimum sitting on the boundary
//! is returned exactly at `a` or `b` instead of a point within `tol` of it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarMinResult<T> {
    pub argmin: T,
    pub value: T,
    pub evaluations: usize,
}

/// Minimizes a unimodal `f` on `[a, b]` until the bracket is narrower than `tol`.
pub fn minimize_scalar<T, F>(mut f: F, a: T, b: T, tol: T) -> Result<ScalarMinResult<T>>
where
    T: Real,
    F: FnMut(T) -> T,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "interval [{a}, {b}] is empty"
        )));
    }
    if !(tol > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "tolerance {tol} must be positive"
        )));
    }

    let mut evaluations = 0usize;
    let mut eval = |x: T| -> Result<T> {
        evaluations += 1;
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::NonFiniteObjective { at: x.as_f64() })
        }
    };

    let fa = eval(a)?;
    let fb = eval(b)?;

    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut lo, mut hi) = (a, b);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = eval(c)?;
    let mut fd = eval(d)?;

    while hi - lo > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = eval(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = eval(d)?;
        }
    }

    let (mut argmin, mut value) = if fc <= fd { (c, fc) } else { (d, fd) };
    if fa <= value {
        argmin = a;
        value = fa;
    }
    if fb < value {
        argmin = b;
        value = fb;
    }
    Ok(ScalarMinResult {
        argmin,
        value,
        evaluations,
    })
}
