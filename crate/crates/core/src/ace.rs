//! Alternating conditional expectations.
//!
//! Finds a unit-variance `θ(Y)` and zero-mean `φ₁(X₁)..φ_p(X_p)` minimizing
//!
//! ```text
//! e² = E[(θ(Y) − Σ φᵢ(Xᵢ))²] / E[θ²(Y)]
//! ```
//!
//! `θ` starts as standardized `Y` with every `φᵢ = 0`. The inner loop backfits
//! each `φ_k` to the partial residual `θ − Σ_{i≠k} φᵢ`; the outer loop then
//! replaces `θ` with the standardized `E[Σ φᵢ | Y]`. Both loops stop once `e²`
//! improves by less than `tol`. A pass that raises `e²` is undone, so the
//! recorded trace never increases.
//!
//! Rows are put in a canonical order and predictors are swept in name order, so
//! the fit does not depend on how the input table happens to be arranged.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{mean, pearson, std_dev, Real};
use crate::smoother::{BinnedSmoother, TransformationCurve};

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    predictor_names: Vec<String>,
    response_name: String,
    predictors: Vec<Vec<T>>,
    response: Vec<T>,
}

impl<T: Real> Dataset<T> {
    /// `predictors` holds one column per predictor.
    pub fn new(
        predictor_names: Vec<String>,
        predictors: Vec<Vec<T>>,
        response_name: impl Into<String>,
        response: Vec<T>,
    ) -> Result<Self> {
        let response_name = response_name.into();
        let n = response.len();
        let p = predictors.len();
        if p == 0 {
            return Err(Error::InvalidDataset(
                "at least one predictor is required".into(),
            ));
        }
        if predictor_names.len() != p {
            return Err(Error::InvalidDataset(format!(
                "{} predictor names for {p} predictor columns",
                predictor_names.len()
            )));
        }
        let mut names: Vec<&str> = predictor_names.iter().map(String::as_str).collect();
        names.push(&response_name);
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidDataset("column names must be unique".into()));
        }
        if let Some(col) = predictors.iter().position(|c| c.len() != n) {
            return Err(Error::InvalidDataset(format!(
                "predictor `{}` has {} rows, response has {n}",
                predictor_names[col],
                predictors[col].len()
            )));
        }
        if n < 10 * p {
            return Err(Error::InvalidDataset(format!(
                "{n} samples is fewer than 10 per predictor ({p} predictors)"
            )));
        }
        if predictors
            .iter()
            .flatten()
            .chain(&response)
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidDataset("non-finite entry".into()));
        }
        Ok(Self {
            predictor_names,
            response_name,
            predictors,
            response,
        })
    }

    pub fn n(&self) -> usize {
        self.response.len()
    }

    pub fn p(&self) -> usize {
        self.predictors.len()
    }

    pub fn predictor_names(&self) -> &[String] {
        &self.predictor_names
    }

    pub fn response_name(&self) -> &str {
        &self.response_name
    }

    /// Predictor names followed by the response name.
    pub fn column_names(&self) -> Vec<String> {
        let mut v = self.predictor_names.clone();
        v.push(self.response_name.clone());
        v
    }

    pub fn predictor(&self, k: usize) -> &[T] {
        &self.predictors[k]
    }

    pub fn response(&self) -> &[T] {
        &self.response
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AceConfig {
    pub bins: usize,
    /// Absolute e² improvement below which a loop stops.
    pub tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
}

impl AceConfig {
    pub const DEFAULT_TOL: f64 = 1e-6;
    pub const DEFAULT_MAX_OUTER: usize = 50;
    pub const DEFAULT_MAX_INNER: usize = 20;

    /// Defaults for a sample of `n` rows: `max(20, n / 200)` bins.
    pub fn for_sample_size(n: usize) -> Self {
        Self {
            bins: (n / 200).max(20),
            tol: Self::DEFAULT_TOL,
            max_outer: Self::DEFAULT_MAX_OUTER,
            max_inner: Self::DEFAULT_MAX_INNER,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bins < 5 {
            return Err(Error::InvalidParameter(format!("bins = {} < 5", self.bins)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tol = {} must be positive",
                self.tol
            )));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return Err(Error::InvalidParameter(
                "iteration caps must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AceResult<T> {
    pub response_name: String,
    pub predictor_names: Vec<String>,
    pub theta: TransformationCurve<T>,
    pub phis: Vec<TransformationCurve<T>>,
    pub e2: T,
    /// Pearson correlation between θ(yᵢ) and Σ φ(xᵢ) over the training rows.
    pub correlation: T,
    pub outer_iterations: usize,
    pub e2_trace: Vec<T>,
    pub bins_used: usize,
}

impl<T: Real> AceResult<T> {
    pub fn phi(&self, name: &str) -> Option<&TransformationCurve<T>> {
        self.predictor_names
            .iter()
            .position(|n| n == name)
            .map(|k| &self.phis[k])
    }

    pub fn curve_set(&self) -> CurveSet<T> {
        CurveSet {
            theta: self.theta.clone(),
            phis: self
                .predictor_names
                .iter()
                .cloned()
                .zip(self.phis.iter().cloned())
                .collect(),
        }
    }
}

/// θ and the named φ curves of one decomposition, as stored in a curves CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSet<T> {
    pub theta: TransformationCurve<T>,
    pub phis: Vec<(String, TransformationCurve<T>)>,
}

pub const THETA_CURVE: &str = "theta";
const PHI_PREFIX: &str = "phi_";

impl<T: Real> CurveSet<T> {
    pub fn phi(&self, name: &str) -> Option<&TransformationCurve<T>> {
        self.phis.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }

    /// Writes `curve_name,knot,value` rows sorted by curve name, then knot.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut curves: Vec<(String, &TransformationCurve<T>)> = self
            .phis
            .iter()
            .map(|(n, c)| (format!("{PHI_PREFIX}{n}"), c))
            .collect();
        curves.push((THETA_CURVE.to_string(), &self.theta));
        curves.sort_by(|a, b| a.0.cmp(&b.0));

        let mut w = csv::Writer::from_writer(out);
        w.write_record(["curve_name", "knot", "value"])?;
        for (name, curve) in curves {
            for (k, v) in curve.knots().iter().zip(curve.values()) {
                w.write_record([
                    name.as_str(),
                    &fmt_sig17(k.as_f64()),
                    &fmt_sig17(v.as_f64()),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["curve_name", "knot", "value"] {
            return Err(Error::Malformed(
                "curves CSV header must be curve_name,knot,value".into(),
            ));
        }
        let mut order: Vec<String> = Vec::new();
        let mut tables: Vec<(Vec<T>, Vec<T>)> = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let name = rec[0].to_string();
            let knot = parse_num::<T>(&rec[1])?;
            let value = parse_num::<T>(&rec[2])?;
            let slot = match order.iter().position(|n| *n == name) {
                Some(i) => i,
                None => {
                    order.push(name);
                    tables.push((Vec::new(), Vec::new()));
                    tables.len() - 1
                }
            };
            tables[slot].0.push(knot);
            tables[slot].1.push(value);
        }
        let mut theta = None;
        let mut phis = Vec::new();
        for (name, (k, v)) in order.into_iter().zip(tables) {
            let curve = TransformationCurve::new(k, v)?;
            if name == THETA_CURVE {
                theta = Some(curve);
            } else if let Some(stripped) = name.strip_prefix(PHI_PREFIX) {
                phis.push((stripped.to_string(), curve));
            } else {
                return Err(Error::Malformed(format!("unexpected curve `{name}`")));
            }
        }
        let theta =
            theta.ok_or_else(|| Error::Malformed("curves CSV has no theta curve".into()))?;
        Ok(Self { theta, phis })
    }
}

fn parse_num<T: Real>(s: &str) -> Result<T> {
    s.trim()
        .parse::<f64>()
        .ok()
        .and_then(T::from_f64)
        .ok_or_else(|| Error::Malformed(format!("not a number: `{s}`")))
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_sig17(x: f64) -> String {
    format!("{x:.16e}")
}

fn residual_e2<T: Real>(theta: &[T], fitted: &[T]) -> T {
    let num: T = theta
        .iter()
        .zip(fitted)
        .map(|(&t, &f)| (t - f) * (t - f))
        .sum();
    let den: T = theta.iter().map(|&t| t * t).sum();
    num / den
}

fn column_sum<T: Real>(phi: &[Vec<T>], n: usize) -> Vec<T> {
    let mut s = vec![T::zero(); n];
    for col in phi {
        for (acc, &v) in s.iter_mut().zip(col) {
            *acc = *acc + v;
        }
    }
    s
}

/// Snapshot of the fit at the last accepted step.
#[derive(Clone)]
struct FitState<T> {
    theta: Vec<T>,
    theta_knot_values: Vec<T>,
    phi: Vec<Vec<T>>,
    phi_knot_values: Vec<Vec<T>>,
}

pub fn ace_fit<T: Real>(data: &Dataset<T>, config: &AceConfig) -> Result<AceResult<T>> {
    config.validate()?;
    let n = data.n();
    let p = data.p();
    let tol = T::lit(config.tol);

    let mut rows: Vec<usize> = (0..n).collect();
    rows.sort_by(|&a, &b| {
        let y = data.response();
        let mut ord = y[a].total_order(&y[b]);
        for k in 0..p {
            ord = ord.then_with(|| data.predictor(k)[a].total_order(&data.predictor(k)[b]));
        }
        ord
    });
    let y: Vec<T> = rows.iter().map(|&i| data.response()[i]).collect();
    let xs: Vec<Vec<T>> = (0..p)
        .map(|k| rows.iter().map(|&i| data.predictor(k)[i]).collect())
        .collect();

    let y_mean = mean(&y);
    let y_sd = std_dev(&y);
    if !(y_sd > T::zero()) {
        return Err(Error::DegenerateInput(format!(
            "response `{}` has zero variance",
            data.response_name()
        )));
    }

    let mut sweep: Vec<usize> = (0..p).collect();
    sweep.sort_by(|&a, &b| data.predictor_names()[a].cmp(&data.predictor_names()[b]));

    let y_smoother = BinnedSmoother::new(&y, config.bins)?;
    let x_smoothers: Vec<BinnedSmoother<T>> = xs
        .iter()
        .map(|x| BinnedSmoother::new(x, config.bins))
        .collect::<Result<_>>()?;

    let theta: Vec<T> = y.iter().map(|&v| (v - y_mean) / y_sd).collect();
    let mut state = FitState {
        theta_knot_values: y_smoother.bin_means(&theta),
        theta,
        phi: vec![vec![T::zero(); n]; p],
        phi_knot_values: x_smoothers
            .iter()
            .map(|s| vec![T::zero(); s.bins()])
            .collect(),
    };
    let mut accepted = state.clone();
    let mut current_e2 = T::one();
    let mut trace = Vec::new();

    for _ in 0..config.max_outer {
        let mut sum = column_sum(&state.phi, n);
        let mut inner_e2 = residual_e2(&state.theta, &sum);
        for _ in 0..config.max_inner {
            let saved = (state.phi.clone(), state.phi_knot_values.clone());
            for &k in &sweep {
                let partial: Vec<T> = state
                    .theta
                    .iter()
                    .zip(&sum)
                    .zip(&state.phi[k])
                    .map(|((&t, &s), &f)| t - s + f)
                    .collect();
                let smoother = &x_smoothers[k];
                let mut values = smoother.bin_means(&partial);
                let mut fitted = smoother.evaluate_samples(&values);
                let centre = mean(&fitted);
                values.iter_mut().for_each(|v| *v = *v - centre);
                fitted.iter_mut().for_each(|v| *v = *v - centre);
                for ((acc, &new), &old) in sum.iter_mut().zip(&fitted).zip(&state.phi[k]) {
                    *acc = *acc + new - old;
                }
                state.phi[k] = fitted;
                state.phi_knot_values[k] = values;
            }
            sum = column_sum(&state.phi, n);
            let e2 = residual_e2(&state.theta, &sum);
            if e2 > inner_e2 {
                (state.phi, state.phi_knot_values) = saved;
                sum = column_sum(&state.phi, n);
                break;
            }
            let gain = inner_e2 - e2;
            inner_e2 = e2;
            if gain < tol {
                break;
            }
        }

        let values = y_smoother.bin_means(&sum);
        let fitted = y_smoother.evaluate_samples(&values);
        let centre = mean(&fitted);
        let scale = std_dev(&fitted);
        if !(scale > T::zero()) {
            break;
        }
        state.theta = fitted.iter().map(|&v| (v - centre) / scale).collect();
        state.theta_knot_values = values.iter().map(|&v| (v - centre) / scale).collect();

        let e2 = residual_e2(&state.theta, &sum);
        if e2 > current_e2 {
            break;
        }
        trace.push(e2);
        accepted = state.clone();
        let gain = current_e2 - e2;
        current_e2 = e2;
        if gain < tol {
            break;
        }
    }
    let mut state = accepted;

    if pearson(&state.theta, &y) < T::zero() {
        let flip = |v: &mut Vec<T>| v.iter_mut().for_each(|x| *x = -*x);
        flip(&mut state.theta);
        flip(&mut state.theta_knot_values);
        state.phi.iter_mut().for_each(flip);
        state.phi_knot_values.iter_mut().for_each(flip);
    }

    let sum = column_sum(&state.phi, n);
    let e2 = residual_e2(&state.theta, &sum);
    let correlation = pearson(&state.theta, &sum);

    let theta = TransformationCurve::new(y_smoother.knots().to_vec(), state.theta_knot_values)?;
    let phis = x_smoothers
        .iter()
        .zip(state.phi_knot_values)
        .map(|(s, v)| TransformationCurve::new(s.knots().to_vec(), v))
        .collect::<Result<Vec<_>>>()?;

    Ok(AceResult {
        response_name: data.response_name().to_string(),
        predictor_names: data.predictor_names().to_vec(),
        theta,
        phis,
        e2,
        correlation,
        outer_iterations: trace.len(),
        e2_trace: trace,
        bins_used: y_smoother.bins(),
    })
}

/// ACE estimate of the maximal correlation between `x` and `y`.
pub fn maximal_correlation<T: Real>(x: &[T], y: &[T], config: &AceConfig) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    let data = Dataset::new(vec!["x".into()], vec![x.to_vec()], "y", y.to_vec())?;
    Ok(ace_fit(&data, config)?.correlation)
}
