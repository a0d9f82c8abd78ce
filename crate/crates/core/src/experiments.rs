//! Monte Carlo harness: draw channel parameters, evaluate measures, decompose
//! each measure with ACE and compare the resulting transformations.

use std::io::{Read, Write};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ace::{ace_fit, fmt_sig17, AceConfig, AceResult, CurveSet, Dataset};
use crate::channels::{draw_bsc, BscParams, MscParams, MscSampler, SimplexSampling, RNG_ALGORITHM};
use crate::error::{Error, Result};
use crate::measures::{evaluate_bsc, evaluate_msc, MeasureKind, DEFAULT_ALPHA_TOL};
use crate::scalar::{mean, pearson, std_dev};
use crate::smoother::{grid, TransformationCurve};

/// Points on the common grid used for curve comparisons and shape statistics.
pub const COMPARISON_GRID_POINTS: usize = 200;

const RESAMPLE_STREAM: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Bsc,
    Msc,
}

impl ChannelKind {
    pub fn name(self) -> &'static str {
        match self {
            ChannelKind::Bsc => "bsc",
            ChannelKind::Msc => "msc",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub channel: ChannelKind,
    pub n: usize,
    pub seed: u64,
    pub measures: Vec<MeasureKind>,
    pub ace: AceConfig,
    /// Alphabet size; always 2 for the BSC.
    pub m: usize,
    pub simplex_sampling: SimplexSampling,
    pub alpha_tol: f64,
}

impl ExperimentConfig {
    pub fn bsc(seed: u64) -> Self {
        Self::new(ChannelKind::Bsc, 20_000, seed, 2)
    }

    /// Four-symbol channel with 60 000 draws.
    pub fn msc(seed: u64) -> Self {
        Self::new(ChannelKind::Msc, 60_000, seed, 4)
    }

    fn new(channel: ChannelKind, n: usize, seed: u64, m: usize) -> Self {
        Self {
            channel,
            n,
            seed,
            measures: vec![MeasureKind::ShannonMi, MeasureKind::ChernoffMi],
            ace: AceConfig::for_sample_size(n),
            m,
            simplex_sampling: SimplexSampling::Rejection,
            alpha_tol: DEFAULT_ALPHA_TOL,
        }
    }

    /// Swaps each definitional measure for its BSC closed form.
    pub fn with_paper_variant(mut self) -> Self {
        self.measures = self.measures.iter().map(|k| k.paper_variant()).collect();
        self
    }

    pub fn with_measures(mut self, measures: Vec<MeasureKind>) -> Self {
        self.measures = measures;
        self
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self.ace = AceConfig::for_sample_size(n);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1000 {
            return Err(Error::InvalidParameter(format!("n = {} < 1000", self.n)));
        }
        if self.measures.is_empty() {
            return Err(Error::InvalidParameter("no measures selected".into()));
        }
        let mut seen = self.measures.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.measures.len() {
            return Err(Error::InvalidParameter("measures must be distinct".into()));
        }
        match self.channel {
            ChannelKind::Bsc if self.m != 2 => {
                return Err(Error::InvalidParameter(format!(
                    "bsc requires m = 2, got {}",
                    self.m
                )))
            }
            ChannelKind::Msc if self.m < 2 => {
                return Err(Error::InvalidParameter(format!("m = {} < 2", self.m)))
            }
            ChannelKind::Msc if self.m > 2 => {
                if let Some(k) = self.measures.iter().find(|k| k.is_paper_variant()) {
                    return Err(Error::InvalidParameter(format!(
                        "{k} needs a binary channel"
                    )));
                }
            }
            _ => {}
        }
        if !(self.alpha_tol > 0.0) {
            return Err(Error::InvalidParameter("alpha_tol must be positive".into()));
        }
        self.ace.validate()
    }

    /// `lambda, lambda2, .., lambda{m-1}, epsilon`.
    pub fn predictor_names(&self) -> Vec<String> {
        let mut names = vec!["lambda".to_string()];
        names.extend((2..self.m).map(|i| format!("lambda{i}")));
        names.push("epsilon".to_string());
        names
    }
}

pub fn response_column(kind: MeasureKind) -> String {
    format!("y_{kind}")
}

#[derive(Clone, Debug, PartialEq)]
enum ChannelDraw {
    Bsc(BscParams<f64>),
    Msc(MscParams<f64>),
}

impl ChannelDraw {
    fn predictors(&self) -> Vec<f64> {
        match self {
            ChannelDraw::Bsc(p) => vec![p.lambda, p.epsilon],
            ChannelDraw::Msc(p) => {
                let l = p.lambdas();
                let mut v = l[..l.len() - 1].to_vec();
                v.push(p.epsilon());
                v
            }
        }
    }

    fn evaluate(&self, kind: MeasureKind, tol: f64) -> Result<f64> {
        Ok(match self {
            ChannelDraw::Bsc(p) => evaluate_bsc(kind, p, tol)?.value,
            ChannelDraw::Msc(p) => evaluate_msc(kind, p, tol)?.value,
        })
    }
}

struct DrawSource {
    bsc: Option<ChaCha20Rng>,
    msc: Option<MscSampler>,
}

impl DrawSource {
    fn new(config: &ExperimentConfig, stream: u64) -> Result<Self> {
        let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
        rng.set_stream(stream);
        Ok(match config.channel {
            ChannelKind::Bsc => Self {
                bsc: Some(rng),
                msc: None,
            },
            ChannelKind::Msc => Self {
                bsc: None,
                msc: Some(MscSampler::from_rng(
                    rng,
                    config.m,
                    config.simplex_sampling,
                )?),
            },
        })
    }

    fn draw(&mut self) -> ChannelDraw {
        match (&mut self.bsc, &mut self.msc) {
            (Some(rng), _) => ChannelDraw::Bsc(draw_bsc(rng)),
            (_, Some(s)) => ChannelDraw::Msc(s.draw()),
            _ => unreachable!("draw source has a generator"),
        }
    }
}

/// Parameter draws with every selected measure evaluated on the same rows.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationTable {
    pub predictor_names: Vec<String>,
    /// One column per predictor.
    pub predictors: Vec<Vec<f64>>,
    pub measures: Vec<MeasureKind>,
    /// One column per measure, aligned with `measures`.
    pub responses: Vec<Vec<f64>>,
    /// Rows redrawn because some measure was not finite.
    pub rejections: usize,
}

impl SimulationTable {
    pub fn n(&self) -> usize {
        self.responses.first().map_or(0, Vec::len)
    }

    pub fn response(&self, kind: MeasureKind) -> Option<&[f64]> {
        self.measures
            .iter()
            .position(|&k| k == kind)
            .map(|i| self.responses[i].as_slice())
    }

    pub fn dataset(&self, kind: MeasureKind) -> Result<Dataset<f64>> {
        let y = self
            .response(kind)
            .ok_or_else(|| Error::InvalidParameter(format!("{kind} was not simulated")))?;
        Dataset::new(
            self.predictor_names.clone(),
            self.predictors.clone(),
            response_column(kind),
            y.to_vec(),
        )
    }

    /// Header `lambda[,lambda2,..],epsilon,y_<measure>..`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = self.predictor_names.clone();
        header.extend(self.measures.iter().map(|&k| response_column(k)));
        w.write_record(&header)?;
        for i in 0..self.n() {
            let row = self
                .predictors
                .iter()
                .chain(&self.responses)
                .map(|col| fmt_sig17(col[i]));
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Draws `config.n` parameter sets and evaluates every selected measure on each.
///
/// Draws come from the seeded stream first and are evaluated afterwards, so
/// the parallel evaluation cannot change the result. A row whose response is
/// not finite for any measure is replaced from a second, independent stream.
pub fn simulate(config: &ExperimentConfig) -> Result<SimulationTable> {
    config.validate()?;
    let mut source = DrawSource::new(config, 0)?;
    let mut draws: Vec<ChannelDraw> = (0..config.n).map(|_| source.draw()).collect();

    let evaluate_row = |d: &ChannelDraw| -> Result<Vec<f64>> {
        config
            .measures
            .iter()
            .map(|&k| d.evaluate(k, config.alpha_tol))
            .collect()
    };
    let mut rows: Vec<Vec<f64>> = draws.par_iter().map(evaluate_row).collect::<Result<_>>()?;

    let mut rejections = 0usize;
    let mut resample: Option<DrawSource> = None;
    for i in 0..rows.len() {
        while rows[i].iter().any(|v| !v.is_finite()) {
            rejections += 1;
            if rejections > config.n {
                return Err(Error::DegenerateInput(
                    "too many non-finite responses".into(),
                ));
            }
            let src = match &mut resample {
                Some(s) => s,
                None => resample.insert(DrawSource::new(config, RESAMPLE_STREAM)?),
            };
            draws[i] = src.draw();
            rows[i] = evaluate_row(&draws[i])?;
        }
    }

    let predictor_rows: Vec<Vec<f64>> = draws.iter().map(ChannelDraw::predictors).collect();
    let p = predictor_rows.first().map_or(0, Vec::len);
    let predictors = (0..p)
        .map(|k| predictor_rows.iter().map(|r| r[k]).collect())
        .collect();
    let responses = (0..config.measures.len())
        .map(|k| rows.iter().map(|r| r[k]).collect())
        .collect();
    Ok(SimulationTable {
        predictor_names: config.predictor_names(),
        predictors,
        measures: config.measures.clone(),
        responses,
        rejections,
    })
}

/// Dataset of a single measure under `config`'s channel and seed.
pub fn build_dataset(config: &ExperimentConfig, kind: MeasureKind) -> Result<Dataset<f64>> {
    simulate(&config.clone().with_measures(vec![kind]))?.dataset(kind)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveComparison {
    pub curve: String,
    pub rms_difference: f64,
    pub curve_correlation: f64,
    /// False when the second curve had to be negated to match the first.
    pub sign_aligned: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderingSummary {
    pub shannon: MeasureKind,
    pub chernoff: MeasureKind,
    pub samples: usize,
    pub shannon_smaller: usize,
    pub equal: usize,
    pub shannon_larger: usize,
    pub fraction_shannon_smaller: f64,
    /// Whether every sample had the Shannon value strictly below the Chernoff one.
    pub shannon_invariably_smaller: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub curves: Vec<CurveComparison>,
    /// Share of grid steps on which both θ curves move in the same direction.
    pub theta_monotone_fraction: f64,
    pub orderings: Option<OrderingSummary>,
}

fn standardize(v: &mut [f64]) {
    let m = mean(v);
    let s = std_dev(v);
    for x in v.iter_mut() {
        *x = if s > 0.0 { (*x - m) / s } else { 0.0 };
    }
}

fn compare_curves(
    name: &str,
    a: &TransformationCurve<f64>,
    b: &TransformationCurve<f64>,
) -> Result<CurveComparison> {
    let lo = a.domain().0.max(b.domain().0);
    let hi = a.domain().1.min(b.domain().1);
    if !(lo < hi) {
        return Err(Error::CurveMismatch(format!(
            "curves for `{name}` do not overlap"
        )));
    }
    let mut va = a.sample_grid(lo, hi, COMPARISON_GRID_POINTS);
    let mut vb = b.sample_grid(lo, hi, COMPARISON_GRID_POINTS);
    standardize(&mut va);
    standardize(&mut vb);
    let r = pearson(&va, &vb);
    let sign = if r < 0.0 { -1.0 } else { 1.0 };
    let mse = mean(
        &va.iter()
            .zip(&vb)
            .map(|(x, y)| (x - sign * y).powi(2))
            .collect::<Vec<_>>(),
    );
    Ok(CurveComparison {
        curve: name.to_string(),
        rms_difference: mse.sqrt(),
        curve_correlation: r.abs(),
        sign_aligned: r >= 0.0,
    })
}

fn steps(c: &TransformationCurve<f64>) -> Vec<f64> {
    let (lo, hi) = c.domain();
    c.sample_grid(lo, hi, COMPARISON_GRID_POINTS)
        .windows(2)
        .map(|w| w[1] - w[0])
        .collect()
}

/// Compares φ curves by name after standardizing each on the common grid. θ
/// curves are only checked for agreeing direction, since the outer function
/// legitimately differs between measures.
pub fn compare_curve_sets(a: &CurveSet<f64>, b: &CurveSet<f64>) -> Result<ComparisonReport> {
    if a.phis.len() != b.phis.len() {
        return Err(Error::CurveMismatch(format!(
            "{} vs {} predictor curves",
            a.phis.len(),
            b.phis.len()
        )));
    }
    let curves = a
        .phis
        .iter()
        .map(|(name, ca)| {
            let cb = b.phi(name).ok_or_else(|| {
                Error::CurveMismatch(format!("no curve for `{name}` in second set"))
            })?;
            compare_curves(name, ca, cb)
        })
        .collect::<Result<Vec<_>>>()?;

    let (sa, sb) = (steps(&a.theta), steps(&b.theta));
    let agree = sa
        .iter()
        .zip(&sb)
        .filter(|(x, y)| x.signum() == y.signum())
        .count();
    Ok(ComparisonReport {
        curves,
        theta_monotone_fraction: agree as f64 / sa.len().max(1) as f64,
        orderings: None,
    })
}

pub fn compare_decompositions(a: &AceResult<f64>, b: &AceResult<f64>) -> Result<ComparisonReport> {
    compare_curve_sets(&a.curve_set(), &b.curve_set())
}

pub fn ordering_summary(
    shannon: MeasureKind,
    shannon_values: &[f64],
    chernoff: MeasureKind,
    chernoff_values: &[f64],
) -> OrderingSummary {
    let (mut smaller, mut equal, mut larger) = (0, 0, 0);
    for (s, c) in shannon_values.iter().zip(chernoff_values) {
        match s.partial_cmp(c) {
            Some(std::cmp::Ordering::Less) => smaller += 1,
            Some(std::cmp::Ordering::Greater) => larger += 1,
            _ => equal += 1,
        }
    }
    let samples = smaller + equal + larger;
    OrderingSummary {
        shannon,
        chernoff,
        samples,
        shannon_smaller: smaller,
        equal,
        shannon_larger: larger,
        fraction_shannon_smaller: smaller as f64 / samples.max(1) as f64,
        shannon_invariably_smaller: samples > 0 && smaller == samples,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatnessStat {
    pub predictor: String,
    /// Spread of φ over knots below 0.7, relative to the spread of the whole curve.
    pub relative_spread_below_0_7: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShapeChecks {
    pub theta_increasing_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_epsilon_asymmetry: Option<f64>,
    /// Same statistic with grid points within one mean knot spacing of 1/2
    /// left out, where the smoother cannot resolve the cusp of φ_ε.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_epsilon_asymmetry_off_center: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_lambda_decreasing_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_epsilon_argmin: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub lambda_flatness: Vec<FlatnessStat>,
}

fn step_fraction(values: &[f64], pred: impl Fn(f64, f64) -> bool) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let hits = values.windows(2).filter(|w| pred(w[0], w[1])).count();
    hits as f64 / (values.len() - 1) as f64
}

fn grid_spread(c: &TransformationCurve<f64>) -> f64 {
    let (lo, hi) = c.domain();
    std_dev(&c.sample_grid(lo, hi, COMPARISON_GRID_POINTS))
}

fn phi_or_err<'a>(r: &'a AceResult<f64>, name: &str) -> Result<&'a TransformationCurve<f64>> {
    r.phi(name)
        .ok_or_else(|| Error::CurveMismatch(format!("decomposition has no `{name}` curve")))
}

/// Shape statistics for a decomposition.
///
/// BSC: largest |φ_ε(e) − φ_ε(1−e)| over a grid on `[·, 0.5]` in standardized
/// units, and the share of decreasing knot steps of φ_λ. MSC: the knot where
/// φ_ε is smallest, and how flat each φ_λ is below 0.7.
pub fn shape_checks(result: &AceResult<f64>, channel: ChannelKind) -> Result<ShapeChecks> {
    let mut out = ShapeChecks {
        theta_increasing_fraction: step_fraction(result.theta.values(), |a, b| b > a),
        ..Default::default()
    };
    let phi_eps = phi_or_err(result, "epsilon")?;
    match channel {
        ChannelKind::Bsc => {
            let (k0, k1) = phi_eps.domain();
            let lo = k0.max(1.0 - k1);
            let scale = grid_spread(phi_eps);
            let spacing = (k1 - k0) / (phi_eps.len().max(2) - 1) as f64;
            let gaps: Vec<(f64, f64)> = if lo < 0.5 && scale > 0.0 {
                grid(lo, 0.5, COMPARISON_GRID_POINTS)
                    .into_iter()
                    .map(|e| {
                        (
                            e,
                            (phi_eps.evaluate(e) - phi_eps.evaluate(1.0 - e)).abs() / scale,
                        )
                    })
                    .collect()
            } else {
                Vec::new()
            };
            let max_gap =
                |it: &mut dyn Iterator<Item = &(f64, f64)>| it.map(|g| g.1).fold(0.0, f64::max);
            out.phi_epsilon_asymmetry = Some(max_gap(&mut gaps.iter()));
            out.phi_epsilon_asymmetry_off_center =
                Some(max_gap(&mut gaps.iter().filter(|g| g.0 < 0.5 - spacing)));
            let phi_lambda = phi_or_err(result, "lambda")?;
            out.phi_lambda_decreasing_fraction =
                Some(step_fraction(phi_lambda.values(), |a, b| b < a));
        }
        ChannelKind::Msc => {
            let (argmin, _) = phi_eps.knots().iter().zip(phi_eps.values()).fold(
                (f64::NAN, f64::INFINITY),
                |best, (&k, &v)| if v < best.1 { (k, v) } else { best },
            );
            out.phi_epsilon_argmin = Some(argmin);
            for (name, phi) in result.predictor_names.iter().zip(&result.phis) {
                if !name.starts_with("lambda") {
                    continue;
                }
                let below: Vec<f64> = phi
                    .knots()
                    .iter()
                    .zip(phi.values())
                    .filter(|(&k, _)| k < 0.7)
                    .map(|(_, &v)| v)
                    .collect();
                let spread = grid_spread(phi);
                out.lambda_flatness.push(FlatnessStat {
                    predictor: name.clone(),
                    relative_spread_below_0_7: if spread > 0.0 {
                        std_dev(&below) / spread
                    } else {
                        0.0
                    },
                });
            }
        }
    }
    Ok(out)
}

/// ACE invariants re-measured on the training rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AceInvariantCheck {
    pub e2_trace_non_increasing: bool,
    /// |correlation² + e² − 1|.
    pub identity_gap: f64,
    pub theta_mean: f64,
    pub theta_std: f64,
    pub max_abs_phi_mean: f64,
}

impl AceInvariantCheck {
    pub fn measure(result: &AceResult<f64>, data: &Dataset<f64>) -> Self {
        let theta: Vec<f64> = data
            .response()
            .iter()
            .map(|&y| result.theta.evaluate(y))
            .collect();
        let max_abs_phi_mean = result
            .phis
            .iter()
            .enumerate()
            .map(|(k, phi)| {
                let v: Vec<f64> = data.predictor(k).iter().map(|&x| phi.evaluate(x)).collect();
                mean(&v).abs()
            })
            .fold(0.0, f64::max);
        Self {
            e2_trace_non_increasing: result.e2_trace.windows(2).all(|w| w[1] <= w[0]),
            identity_gap: (result.correlation.powi(2) + result.e2 - 1.0).abs(),
            theta_mean: mean(&theta),
            theta_std: std_dev(&theta),
            max_abs_phi_mean,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub measure: MeasureKind,
    pub response: String,
    pub correlation: f64,
    pub e2: f64,
    pub outer_iterations: usize,
    pub e2_trace: Vec<f64>,
    pub bins_used: usize,
    pub response_min: f64,
    pub response_max: f64,
    pub invariants: AceInvariantCheck,
    pub shape: ShapeChecks,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairComparison {
    pub a: MeasureKind,
    pub b: MeasureKind,
    pub report: ComparisonReport,
}

/// Correlations between θ(y) and Σφ published for the two reproduced figures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaperTargets {
    pub bsc_shannon_correlation: f64,
    pub bsc_chernoff_correlation: f64,
    pub msc_shannon_correlation: f64,
    pub msc_chernoff_correlation: f64,
}

impl Default for PaperTargets {
    fn default() -> Self {
        Self {
            bsc_shannon_correlation: 0.9994,
            bsc_chernoff_correlation: 0.9991,
            msc_shannon_correlation: 0.9999,
            msc_chernoff_correlation: 0.9999,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceValue {
    pub measure: MeasureKind,
    pub value: f64,
}

/// Measures evaluated at one fixed BSC point, λ = 0.5 and ε = 0.1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoint {
    pub lambda: f64,
    pub epsilon: f64,
    pub values: Vec<ReferenceValue>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub rng_algorithm: String,
    pub predictor_names: Vec<String>,
    pub rejections: usize,
    pub fits: Vec<FitSummary>,
    pub comparisons: Vec<PairComparison>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference_point: Option<ReferencePoint>,
    pub paper_targets: PaperTargets,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_clock_seconds: Option<f64>,
}

impl ExperimentReport {
    pub fn fit(&self, kind: MeasureKind) -> Option<&FitSummary> {
        self.fits.iter().find(|f| f.measure == kind)
    }

    /// Pretty JSON. Only deterministic fields are written; wall-clock time is left out.
    pub fn to_deterministic_json(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.wall_clock_seconds = None;
        Ok(serde_json::to_string_pretty(&copy)? + "\n")
    }
}

/// Everything produced by one run.
pub struct ExperimentRun {
    pub report: ExperimentReport,
    pub table: SimulationTable,
    pub fits: Vec<AceResult<f64>>,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentRun> {
    let started = Instant::now();
    let table = simulate(config)?;
    let datasets: Vec<Dataset<f64>> = config
        .measures
        .iter()
        .map(|&k| table.dataset(k))
        .collect::<Result<_>>()?;
    let fits: Vec<AceResult<f64>> = datasets
        .par_iter()
        .map(|d| ace_fit(d, &config.ace))
        .collect::<Result<_>>()?;

    let mut summaries = Vec::with_capacity(fits.len());
    for ((&kind, fit), data) in config.measures.iter().zip(&fits).zip(&datasets) {
        let y = data.response();
        summaries.push(FitSummary {
            measure: kind,
            response: fit.response_name.clone(),
            correlation: fit.correlation,
            e2: fit.e2,
            outer_iterations: fit.outer_iterations,
            e2_trace: fit.e2_trace.clone(),
            bins_used: fit.bins_used,
            response_min: y.iter().copied().fold(f64::INFINITY, f64::min),
            response_max: y.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            invariants: AceInvariantCheck::measure(fit, data),
            shape: shape_checks(fit, config.channel)?,
        });
    }

    let mut comparisons = Vec::new();
    for i in 0..fits.len() {
        for j in i + 1..fits.len() {
            let (a, b) = (config.measures[i], config.measures[j]);
            let mut report = compare_decompositions(&fits[i], &fits[j])?;
            if a.counterpart() == b {
                let (s, c) = if a.is_shannon() { (a, b) } else { (b, a) };
                report.orderings = Some(ordering_summary(
                    s,
                    table.response(s).unwrap_or_default(),
                    c,
                    table.response(c).unwrap_or_default(),
                ));
            }
            comparisons.push(PairComparison { a, b, report });
        }
    }

    let reference_point = match config.channel {
        ChannelKind::Bsc => {
            let p = BscParams::new(0.5, 0.1)?;
            let values = config
                .measures
                .iter()
                .map(|&measure| {
                    Ok(ReferenceValue {
                        measure,
                        value: evaluate_bsc(measure, &p, config.alpha_tol)?.value,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Some(ReferencePoint {
                lambda: 0.5,
                epsilon: 0.1,
                values,
            })
        }
        ChannelKind::Msc => None,
    };

    let mut notes = Vec::new();
    if config.channel == ChannelKind::Msc {
        notes.push(format!(
            "alphabet size m = {} is an assumption; phi_epsilon is expected to bottom out near (m-1)/m = {:.4}",
            config.m,
            (config.m - 1) as f64 / config.m as f64
        ));
    }
    if config.measures.iter().any(|k| k.is_paper_variant()) {
        notes.push(
            "closed-form BSC variants evaluate D(P(Y|x1) || P(Y)), not the mutual information"
                .into(),
        );
    }

    let report = ExperimentReport {
        config: config.clone(),
        rng_algorithm: RNG_ALGORITHM.to_string(),
        predictor_names: table.predictor_names.clone(),
        rejections: table.rejections,
        fits: summaries,
        comparisons,
        reference_point,
        paper_targets: PaperTargets::default(),
        notes,
        wall_clock_seconds: Some(started.elapsed().as_secs_f64()),
    };
    Ok(ExperimentRun {
        report,
        table,
        fits,
    })
}

/// A numeric CSV loaded column by column.
#[derive(Clone, Debug, PartialEq)]
pub struct NumericTable {
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl NumericTable {
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut columns = vec![Vec::new(); headers.len()];
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            for (col, field) in columns.iter_mut().zip(rec.iter()) {
                let v = field.trim().parse::<f64>().map_err(|_| {
                    Error::Malformed(format!("row {}: not a number: `{field}`", line + 2))
                })?;
                col.push(v);
            }
        }
        Ok(Self { headers, columns })
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.headers
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::UnknownColumn(name.to_string()))
    }
}
