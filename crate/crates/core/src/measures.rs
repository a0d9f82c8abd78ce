//! Relative entropy, entropy, Shannon and Chernoff mutual information, and the
//! closed-form BSC variants.
//!
//! Everything is computed in nats. Cells carrying zero mass contribute nothing:
//! `0 log 0 = 0` for the divergence sums, and a cell where either distribution is
//! zero is dropped from the Chernoff sum for every α in `[0, 1]`.
//!
//! The two `*_paper_bsc` measures evaluate the per-row divergence
//! `D(P(Y | X = x₁) ‖ P(Y))` of a binary symmetric channel (and its Chernoff
//! analogue). They coincide with [`shannon_mi`] / [`chernoff_mi`] only at λ = ½.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channels::{
    bsc_joint, msc_joint, BscParams, DiscreteDistribution, JointDistribution, MscParams,
};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::scalar_opt::minimize_scalar;

/// Default bracket width for the α search.
pub const DEFAULT_ALPHA_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    Nats,
    Bits,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureValue<T> {
    pub value: T,
    pub log_base: LogBase,
    /// Minimizing exponent, present only for Chernoff-type measures.
    pub alpha_star: Option<T>,
}

impl<T: Real> MeasureValue<T> {
    pub fn nats(value: T) -> Self {
        Self {
            value,
            log_base: LogBase::Nats,
            alpha_star: None,
        }
    }

    fn chernoff(value: T, alpha_star: T) -> Self {
        Self {
            value,
            log_base: LogBase::Nats,
            alpha_star: Some(alpha_star),
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }

    pub fn in_base(self, base: LogBase) -> Self {
        let value = match (self.log_base, base) {
            (LogBase::Nats, LogBase::Bits) => self.value / T::lit(std::f64::consts::LN_2),
            (LogBase::Bits, LogBase::Nats) => self.value * T::lit(std::f64::consts::LN_2),
            _ => self.value,
        };
        Self {
            value,
            log_base: base,
            alpha_star: self.alpha_star,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    ShannonMi,
    ChernoffMi,
    ShannonPaperBsc,
    ChernoffPaperBsc,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 4] = [
        MeasureKind::ShannonMi,
        MeasureKind::ChernoffMi,
        MeasureKind::ShannonPaperBsc,
        MeasureKind::ChernoffPaperBsc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::ShannonMi => "shannon_mi",
            MeasureKind::ChernoffMi => "chernoff_mi",
            MeasureKind::ShannonPaperBsc => "shannon_paper_bsc",
            MeasureKind::ChernoffPaperBsc => "chernoff_paper_bsc",
        }
    }

    pub fn is_paper_variant(self) -> bool {
        matches!(
            self,
            MeasureKind::ShannonPaperBsc | MeasureKind::ChernoffPaperBsc
        )
    }

    pub fn is_shannon(self) -> bool {
        matches!(self, MeasureKind::ShannonMi | MeasureKind::ShannonPaperBsc)
    }

    /// The BSC closed form standing in for a definitional measure.
    pub fn paper_variant(self) -> Self {
        match self {
            MeasureKind::ShannonMi => MeasureKind::ShannonPaperBsc,
            MeasureKind::ChernoffMi => MeasureKind::ChernoffPaperBsc,
            other => other,
        }
    }

    /// The measure of the other family under the same reading.
    pub fn counterpart(self) -> Self {
        match self {
            MeasureKind::ShannonMi => MeasureKind::ChernoffMi,
            MeasureKind::ChernoffMi => MeasureKind::ShannonMi,
            MeasureKind::ShannonPaperBsc => MeasureKind::ChernoffPaperBsc,
            MeasureKind::ChernoffPaperBsc => MeasureKind::ShannonPaperBsc,
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MeasureKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown measure `{s}`")))
    }
}

/// `x log(x / y)` with the `0 log 0 = 0` convention.
fn xlog_ratio<T: Real>(x: T, y: T) -> T {
    if x == T::zero() {
        T::zero()
    } else if y == T::zero() {
        T::infinity()
    } else {
        x * (x / y).ln()
    }
}

fn divergence<T: Real>(p: &[T], q: &[T]) -> T {
    let d: T = p.iter().zip(q).map(|(&a, &b)| xlog_ratio(a, b)).sum();
    d.max(T::zero())
}

pub fn kl_divergence<T: Real>(
    p: &DiscreteDistribution<T>,
    q: &DiscreteDistribution<T>,
) -> Result<MeasureValue<T>> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            expected: p.len(),
            found: q.len(),
        });
    }
    Ok(MeasureValue::nats(divergence(p.probs(), q.probs())))
}

pub fn entropy<T: Real>(p: &DiscreteDistribution<T>) -> MeasureValue<T> {
    let h: T = p
        .probs()
        .iter()
        .filter(|&&x| x > T::zero())
        .map(|&x| -x * x.ln())
        .sum();
    MeasureValue::nats(h.max(T::zero()))
}

/// `D(p(x,y) ‖ p(x)p(y))`.
pub fn shannon_mi<T: Real>(joint: &JointDistribution<T>) -> MeasureValue<T> {
    MeasureValue::nats(divergence(joint.mass(), &joint.product_of_marginals()))
}

/// Log-domain view of a distribution pair restricted to their common support.
struct ChernoffPair<T> {
    log_p1: Vec<T>,
    log_p2: Vec<T>,
}

impl<T: Real> ChernoffPair<T> {
    fn new(p1: &[T], p2: &[T]) -> Self {
        let (log_p1, log_p2) = p1
            .iter()
            .zip(p2)
            .filter(|(&a, &b)| a > T::zero() && b > T::zero())
            .map(|(&a, &b)| (a.ln(), b.ln()))
            .unzip();
        Self { log_p1, log_p2 }
    }

    fn objective(&self, alpha: T) -> T {
        let beta = T::one() - alpha;
        self.log_p1
            .iter()
            .zip(&self.log_p2)
            .map(|(&a, &b)| (alpha * a + beta * b).exp())
            .sum::<T>()
            .ln()
    }
}

/// `log Σ p1^α p2^(1−α)` over the common support.
pub fn chernoff_objective<T: Real>(p1: &[T], p2: &[T], alpha: T) -> T {
    ChernoffPair::new(p1, p2).objective(alpha)
}

fn chernoff_raw<T: Real>(p1: &[T], p2: &[T], tol: T) -> Result<MeasureValue<T>> {
    if p1.len() != p2.len() {
        return Err(Error::LengthMismatch {
            expected: p1.len(),
            found: p2.len(),
        });
    }
    let pair = ChernoffPair::new(p1, p2);
    if pair.log_p1.is_empty() {
        return Ok(MeasureValue::nats(T::infinity()));
    }
    let half = T::lit(0.5);
    if p1 == p2 {
        return Ok(MeasureValue::chernoff(T::zero(), half));
    }
    let best = minimize_scalar(|a| pair.objective(a), T::zero(), T::one(), tol)?;
    let value = -best.value;
    if value <= T::zero() {
        // The objective never dips below zero: any α is optimal.
        Ok(MeasureValue::chernoff(T::zero(), half))
    } else {
        Ok(MeasureValue::chernoff(value, best.argmin))
    }
}

/// `−min_{α∈[0,1]} log Σ p1^α p2^(1−α)`. Disjoint supports give `+∞`.
pub fn chernoff_information<T: Real>(
    p1: &DiscreteDistribution<T>,
    p2: &DiscreteDistribution<T>,
    tol: T,
) -> Result<MeasureValue<T>> {
    chernoff_raw(p1.probs(), p2.probs(), tol)
}

/// Chernoff information between the joint and the product of its marginals.
pub fn chernoff_mi<T: Real>(joint: &JointDistribution<T>, tol: T) -> Result<MeasureValue<T>> {
    chernoff_raw(joint.mass(), &joint.product_of_marginals(), tol)
}

/// Output probabilities (q, r) with q = λ(1−ε) + (1−λ)ε and r = λε + (1−λ)(1−ε).
fn bsc_output<T: Real>(p: &BscParams<T>) -> (T, T) {
    let (l, e) = (p.lambda, p.epsilon);
    let one = T::one();
    (l * (one - e) + (one - l) * e, l * e + (one - l) * (one - e))
}

/// `(1−ε) log((1−ε)/q) + ε log(ε/r)`.
pub fn shannon_paper_bsc<T: Real>(params: &BscParams<T>) -> MeasureValue<T> {
    let (q, r) = bsc_output(params);
    let e = params.epsilon;
    let v = xlog_ratio(T::one() - e, q) + xlog_ratio(e, r);
    MeasureValue::nats(v.max(T::zero()))
}

/// `−min_α log[(1−ε)^α q^(1−α) + ε^α r^(1−α)]`.
pub fn chernoff_paper_bsc<T: Real>(params: &BscParams<T>, tol: T) -> Result<MeasureValue<T>> {
    let (q, r) = bsc_output(params);
    let e = params.epsilon;
    chernoff_raw(&[T::one() - e, e], &[q, r], tol)
}

/// Evaluates any measure kind on BSC parameters.
pub fn evaluate_bsc<T: Real>(
    kind: MeasureKind,
    params: &BscParams<T>,
    tol: T,
) -> Result<MeasureValue<T>> {
    match kind {
        MeasureKind::ShannonMi => Ok(shannon_mi(&bsc_joint(params)?)),
        MeasureKind::ChernoffMi => chernoff_mi(&bsc_joint(params)?, tol),
        MeasureKind::ShannonPaperBsc => Ok(shannon_paper_bsc(params)),
        MeasureKind::ChernoffPaperBsc => chernoff_paper_bsc(params, tol),
    }
}

/// Evaluates a measure on MSC parameters. The BSC closed forms need `m = 2`.
pub fn evaluate_msc<T: Real>(
    kind: MeasureKind,
    params: &MscParams<T>,
    tol: T,
) -> Result<MeasureValue<T>> {
    match kind {
        MeasureKind::ShannonMi => Ok(shannon_mi(&msc_joint(params)?)),
        MeasureKind::ChernoffMi => chernoff_mi(&msc_joint(params)?, tol),
        paper if params.m() == 2 => {
            let bsc = BscParams::new(params.lambdas()[0], params.epsilon())?;
            evaluate_bsc(paper, &bsc, tol)
        }
        paper => Err(Error::InvalidParameter(format!(
            "{paper} is defined only for binary channels, got m = {}",
            params.m()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = DEFAULT_ALPHA_TOL;

    fn dist(p: &[f64]) -> DiscreteDistribution<f64> {
        DiscreteDistribution::new(p.to_vec()).unwrap()
    }

    fn bsc(l: f64, e: f64) -> BscParams<f64> {
        BscParams::new(l, e).unwrap()
    }

    /// Dense grid search over α, independent of the golden-section path.
    fn grid_oracle(p1: &[f64], p2: &[f64]) -> (f64, f64) {
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=10_000 {
            let a = i as f64 / 10_000.0;
            let s: f64 = p1
                .iter()
                .zip(p2)
                .filter(|(&x, &y)| x > 0.0 && y > 0.0)
                .map(|(&x, &y)| x.powf(a) * y.powf(1.0 - a))
                .sum();
            if s.ln() < best.0 {
                best = (s.ln(), a);
            }
        }
        (-best.0, best.1)
    }

    #[test]
    fn kl_examples() {
        assert_eq!(
            kl_divergence(&dist(&[0.3, 0.7]), &dist(&[0.3, 0.7]))
                .unwrap()
                .value,
            0.0
        );
        let v = kl_divergence(&dist(&[1.0, 0.0]), &dist(&[0.5, 0.5]))
            .unwrap()
            .value;
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(kl_divergence(&dist(&[0.5, 0.5]), &dist(&[1.0, 0.0]))
            .unwrap()
            .is_infinite());
        assert!(kl_divergence(&dist(&[0.5, 0.5]), &dist(&[0.2, 0.3, 0.5])).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(&dist(&[0.5, 0.5])).value - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(entropy(&dist(&[1.0, 0.0])).value, 0.0);
        let h = -(0.1_f64 * 0.1_f64.ln() + 0.9 * 0.9_f64.ln());
        assert!((entropy(&dist(&[0.1, 0.9])).value - h).abs() < 1e-15);
        assert!((entropy(&dist(&[0.1, 0.9])).value - 0.3251).abs() < 5e-5);
    }

    #[test]
    fn shannon_mi_examples() {
        assert!(shannon_mi(&bsc_joint(&bsc(0.5, 0.5)).unwrap()).value.abs() < 1e-15);
        let v = shannon_mi(&bsc_joint(&bsc(0.5, 0.0)).unwrap()).value;
        assert!((v - std::f64::consts::LN_2).abs() < 1e-15);

        // Four-term direct sum with hand-written marginals.
        let (px, py) = ([0.3, 0.7], [0.34, 0.66]);
        let cells = [[0.27, 0.03], [0.07, 0.63]];
        let mut oracle = 0.0;
        for r in 0..2 {
            for c in 0..2 {
                let p: f64 = cells[r][c];
                oracle += p * (p / (px[r] * py[c])).ln();
            }
        }
        let v = shannon_mi(&bsc_joint(&bsc(0.3, 0.1)).unwrap()).value;
        assert!((v - oracle).abs() < 1e-14);
        assert!((v - 0.3159).abs() < 1e-4);
    }

    #[test]
    fn chernoff_information_examples() {
        let same = chernoff_information(&dist(&[0.3, 0.7]), &dist(&[0.3, 0.7]), TOL).unwrap();
        assert_eq!(same.value, 0.0);
        assert_eq!(same.alpha_star, Some(0.5));

        let b = chernoff_information(&dist(&[1.0, 0.0]), &dist(&[0.5, 0.5]), TOL).unwrap();
        assert!((b.value - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(b.alpha_star, Some(0.0));

        let c = chernoff_information(&dist(&[0.9, 0.1]), &dist(&[0.5, 0.5]), TOL).unwrap();
        let (gv, ga) = grid_oracle(&[0.9, 0.1], &[0.5, 0.5]);
        assert!((c.value - gv).abs() < 1e-6);
        assert!((c.alpha_star.unwrap() - ga).abs() < 1e-3);
        assert!((c.value - 0.112).abs() < 5e-4);

        let disjoint = chernoff_information(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0]), TOL).unwrap();
        assert!(disjoint.is_infinite());
        assert_eq!(disjoint.alpha_star, None);
    }

    #[test]
    fn chernoff_mi_examples() {
        let indep = JointDistribution::independent(&dist(&[0.2, 0.8]), &dist(&[0.6, 0.4])).unwrap();
        assert!(chernoff_mi(&indep, TOL).unwrap().value.abs() < 1e-8);

        let noiseless = chernoff_mi(&bsc_joint(&bsc(0.5, 0.0)).unwrap(), TOL).unwrap();
        assert!((noiseless.value - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(noiseless.alpha_star, Some(0.0));

        let j = bsc_joint(&bsc(0.5, 0.1)).unwrap();
        let v = chernoff_mi(&j, TOL).unwrap();
        let (gv, ga) = grid_oracle(j.mass(), &j.product_of_marginals());
        assert!((v.value - gv).abs() < 1e-6);
        assert!((v.alpha_star.unwrap() - ga).abs() < 1e-3);
        assert!((v.value - 0.1123).abs() < 1e-4);
        assert!((v.alpha_star.unwrap() - 0.458).abs() < 1e-3);
        assert!((v.value + 0.8938_f64.ln()).abs() < 2e-4);
    }

    #[test]
    fn shannon_paper_examples() {
        let h01 = -(0.1_f64 * 0.1_f64.ln() + 0.9 * 0.9_f64.ln());
        let v = shannon_paper_bsc(&bsc(0.5, 0.1)).value;
        assert!((v - (std::f64::consts::LN_2 - h01)).abs() < 1e-14);
        assert!((v - 0.3680).abs() < 1e-4);

        assert!(shannon_paper_bsc(&bsc(1.0, 0.3)).value.abs() < 1e-15);
        assert!(shannon_paper_bsc(&bsc(1.0 - 1e-12, 0.3)).value < 1e-9);

        let v = shannon_paper_bsc(&bsc(0.3, 0.1)).value;
        assert!((v - 0.6874).abs() < 1e-4);
        let definitional = shannon_mi(&bsc_joint(&bsc(0.3, 0.1)).unwrap()).value;
        assert!((v - definitional).abs() > 0.3);
    }

    #[test]
    fn shannon_paper_matches_per_term_transcription() {
        for &(l, e) in &[
            (0.1, 0.2),
            (0.3, 0.1),
            (0.77, 0.64),
            (0.5, 0.5),
            (0.95, 0.01),
        ] {
            let (l, e): (f64, f64) = (l, e);
            let t1 = (1.0 - e) * ((1.0 - e) / (l * (1.0 - e) + (1.0 - l) * e)).ln();
            let t2 = e * (e / (l * e + (1.0 - l) * (1.0 - e))).ln();
            assert!((shannon_paper_bsc(&bsc(l, e)).value - (t1 + t2)).abs() < 1e-12);
        }
    }

    #[test]
    fn chernoff_paper_examples() {
        assert_eq!(chernoff_paper_bsc(&bsc(0.5, 0.5), TOL).unwrap().value, 0.0);
        let v = chernoff_paper_bsc(&bsc(0.5, 0.1), TOL).unwrap();
        let two_point = chernoff_information(&dist(&[0.9, 0.1]), &dist(&[0.5, 0.5]), TOL).unwrap();
        assert!((v.value - two_point.value).abs() < 1e-12);

        for &(l, e) in &[(0.2, 0.3), (0.7, 0.05), (0.45, 0.9)] {
            let (l, e): (f64, f64) = (l, e);
            let q = l * (1.0 - e) + (1.0 - l) * e;
            let v = chernoff_paper_bsc(&bsc(l, e), TOL).unwrap();
            let (_, ga) = grid_oracle(&[1.0 - e, e], &[q, 1.0 - q]);
            assert!((v.alpha_star.unwrap() - ga).abs() < 1e-4);
        }
    }

    #[test]
    fn chernoff_is_symmetric_under_swap() {
        let p = dist(&[0.1, 0.6, 0.3]);
        let q = dist(&[0.5, 0.25, 0.25]);
        let a = chernoff_information(&p, &q, TOL).unwrap();
        let b = chernoff_information(&q, &p, TOL).unwrap();
        assert!((a.value - b.value).abs() < 1e-8);
        assert!((a.alpha_star.unwrap() - (1.0 - b.alpha_star.unwrap())).abs() < 1e-4);
    }

    #[test]
    fn bits_conversion() {
        let v = MeasureValue::nats(std::f64::consts::LN_2).in_base(LogBase::Bits);
        assert!((v.value - 1.0).abs() < 1e-15);
        assert_eq!(v.in_base(LogBase::Nats).log_base, LogBase::Nats);
    }

    #[test]
    fn measure_kind_names_round_trip() {
        for k in MeasureKind::ALL {
            assert_eq!(k.name().parse::<MeasureKind>().unwrap(), k);
            assert_eq!(k.counterpart().counterpart(), k);
        }
        assert!("renyi".parse::<MeasureKind>().is_err());
    }

    #[test]
    fn msc_rejects_paper_variants_beyond_binary() {
        let p = MscParams::new(vec![0.2, 0.3, 0.5], 0.1).unwrap();
        assert!(evaluate_msc(MeasureKind::ShannonPaperBsc, &p, TOL).is_err());
        let p2 = MscParams::new(vec![0.5, 0.5], 0.1).unwrap();
        let v = evaluate_msc(MeasureKind::ShannonPaperBsc, &p2, TOL).unwrap();
        assert!((v.value - 0.3680).abs() < 1e-4);
    }

    #[test]
    fn single_precision_measures() {
        let j = bsc_joint(&BscParams::new(0.5_f32, 0.1).unwrap()).unwrap();
        assert!((shannon_mi(&j).value - 0.368).abs() < 1e-3);
        let c = chernoff_mi(&j, 1e-6).unwrap();
        assert!((c.value - 0.1123).abs() < 1e-3);
    }
}
