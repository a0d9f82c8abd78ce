//! Joint input/output distributions for the binary and M-ary symmetric channels,
//! plus seeded samplers for their parameters.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Generator used for every parameter draw. Recorded in report metadata.
pub const RNG_ALGORITHM: &str = "ChaCha20Rng (rand_chacha 0.9, seed_from_u64, Open01 uniforms)";

fn check_mass<T: Real>(probs: &[T]) -> Result<()> {
    for (index, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < T::zero() {
            return Err(Error::InvalidMass {
                index,
                value: p.as_f64(),
            });
        }
    }
    let sum: T = probs.iter().copied().sum();
    if (sum - T::one()).abs() > T::normalization_tol() {
        return Err(Error::NotNormalized { sum: sum.as_f64() });
    }
    Ok(())
}

fn check_unit<T: Real>(name: &str, x: T) -> Result<()> {
    if !(x >= T::zero() && x <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "{name} = {x} outside [0, 1]"
        )));
    }
    Ok(())
}

/// A probability vector: non-negative entries summing to one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteDistribution<T> {
    probs: Vec<T>,
}

impl<T: Real> DiscreteDistribution<T> {
    pub fn new(probs: Vec<T>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter("empty distribution".into()));
        }
        check_mass(&probs)?;
        Ok(Self { probs })
    }

    pub fn uniform(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::InvalidParameter("empty distribution".into()));
        }
        let p = T::one() / T::from_usize(len).unwrap();
        Ok(Self {
            probs: vec![p; len],
        })
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

/// Binary symmetric channel: input distribution (λ, 1−λ), crossover ε.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BscParams<T> {
    pub lambda: T,
    pub epsilon: T,
}

impl<T: Real> BscParams<T> {
    pub fn new(lambda: T, epsilon: T) -> Result<Self> {
        check_unit("lambda", lambda)?;
        check_unit("epsilon", epsilon)?;
        Ok(Self { lambda, epsilon })
    }
}

/// M-ary symmetric channel: input distribution λ₁..λ_M, total crossover mass ε
/// spread evenly over the M−1 wrong symbols.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MscParams<T> {
    lambdas: Vec<T>,
    epsilon: T,
}

impl<T: Real> MscParams<T> {
    pub fn new(lambdas: Vec<T>, epsilon: T) -> Result<Self> {
        if lambdas.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "alphabet size {} < 2",
                lambdas.len()
            )));
        }
        check_mass(&lambdas).map_err(|e| Error::InvalidParameter(format!("lambdas: {e}")))?;
        check_unit("epsilon", epsilon)?;
        Ok(Self { lambdas, epsilon })
    }

    pub fn m(&self) -> usize {
        self.lambdas.len()
    }

    pub fn lambdas(&self) -> &[T] {
        &self.lambdas
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    /// Probability of landing on one particular wrong symbol.
    pub fn per_symbol_error(&self) -> T {
        self.epsilon / T::from_usize(self.m() - 1).unwrap()
    }
}

/// Joint mass p(x, y) over input rows and output columns, with cached marginals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointDistribution<T> {
    rows: usize,
    cols: usize,
    mass: Vec<T>,
    row_marginal: DiscreteDistribution<T>,
    col_marginal: DiscreteDistribution<T>,
}

impl<T: Real> JointDistribution<T> {
    /// Builds a joint from row-major mass.
    pub fn from_row_major(rows: usize, cols: usize, mass: Vec<T>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(
                "joint needs at least one row and column".into(),
            ));
        }
        if mass.len() != rows * cols {
            return Err(Error::LengthMismatch {
                expected: rows * cols,
                found: mass.len(),
            });
        }
        check_mass(&mass)?;
        let row_sums: Vec<T> = mass.chunks(cols).map(|r| r.iter().copied().sum()).collect();
        let col_sums: Vec<T> = (0..cols)
            .map(|c| (0..rows).map(|r| mass[r * cols + c]).sum())
            .collect();
        Ok(Self {
            rows,
            cols,
            mass,
            row_marginal: DiscreteDistribution::new(row_sums)?,
            col_marginal: DiscreteDistribution::new(col_sums)?,
        })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidParameter("ragged joint matrix".into()));
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    /// Outer product p(x)p(y) of two marginals.
    pub fn independent(
        rows: &DiscreteDistribution<T>,
        cols: &DiscreteDistribution<T>,
    ) -> Result<Self> {
        let mass = rows
            .probs()
            .iter()
            .flat_map(|&px| cols.probs().iter().map(move |&py| px * py))
            .collect();
        Self::from_row_major(rows.len(), cols.len(), mass)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.mass[row * self.cols + col]
    }

    /// Row-major cell masses.
    pub fn mass(&self) -> &[T] {
        &self.mass
    }

    pub fn row_marginal(&self) -> &DiscreteDistribution<T> {
        &self.row_marginal
    }

    pub fn col_marginal(&self) -> &DiscreteDistribution<T> {
        &self.col_marginal
    }

    /// Row-major p(x)p(y), aligned cell for cell with [`Self::mass`].
    pub fn product_of_marginals(&self) -> Vec<T> {
        let py = self.col_marginal.probs();
        self.row_marginal
            .probs()
            .iter()
            .flat_map(|&px| py.iter().map(move |&q| px * q))
            .collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.mass.chunks(self.cols).map(<[T]>::to_vec).collect()
    }
}

pub fn bsc_joint<T: Real>(params: &BscParams<T>) -> Result<JointDistribution<T>> {
    let BscParams { lambda, epsilon } = *params;
    check_unit("lambda", lambda)?;
    check_unit("epsilon", epsilon)?;
    let (keep, flip) = (T::one() - epsilon, epsilon);
    let other = T::one() - lambda;
    JointDistribution::from_row_major(
        2,
        2,
        vec![lambda * keep, lambda * flip, other * flip, other * keep],
    )
}

pub fn msc_joint<T: Real>(params: &MscParams<T>) -> Result<JointDistribution<T>> {
    let m = params.m();
    let keep = T::one() - params.epsilon();
    let wrong = params.per_symbol_error();
    let mut mass = Vec::with_capacity(m * m);
    for (i, &lambda) in params.lambdas().iter().enumerate() {
        for j in 0..m {
            mass.push(lambda * if i == j { keep } else { wrong });
        }
    }
    JointDistribution::from_row_major(m, m, mass)
}

/// Draws `count` BSC parameter pairs, λ then ε per draw, i.i.d. uniform on (0, 1).
pub fn sample_bsc_params(rng_seed: u64, count: usize) -> Vec<BscParams<f64>> {
    let mut rng = ChaCha20Rng::seed_from_u64(rng_seed);
    (0..count).map(|_| draw_bsc(&mut rng)).collect()
}

pub(crate) fn draw_bsc(rng: &mut impl Rng) -> BscParams<f64> {
    let lambda: f64 = rng.sample(Open01);
    let epsilon: f64 = rng.sample(Open01);
    BscParams { lambda, epsilon }
}

/// How the M−1 free input probabilities are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimplexSampling {
    /// λ₁..λ_{M−1} i.i.d. uniform, redrawn until their sum is below one.
    #[default]
    Rejection,
    /// M uniforms divided by their sum.
    Normalized,
}

/// Seeded MSC parameter sampler. Tracks how many simplex proposals were made.
pub struct MscSampler {
    rng: ChaCha20Rng,
    m: usize,
    scheme: SimplexSampling,
    proposals: u64,
}

impl MscSampler {
    pub fn new(rng_seed: u64, m: usize, scheme: SimplexSampling) -> Result<Self> {
        Self::from_rng(ChaCha20Rng::seed_from_u64(rng_seed), m, scheme)
    }

    pub(crate) fn from_rng(rng: ChaCha20Rng, m: usize, scheme: SimplexSampling) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidParameter(format!("alphabet size {m} < 2")));
        }
        Ok(Self {
            rng,
            m,
            scheme,
            proposals: 0,
        })
    }

    pub fn draw(&mut self) -> MscParams<f64> {
        let lambdas = match self.scheme {
            SimplexSampling::Rejection => loop {
                self.proposals += 1;
                let free: Vec<f64> = (0..self.m - 1).map(|_| self.rng.sample(Open01)).collect();
                let sum: f64 = free.iter().sum();
                if sum < 1.0 {
                    let mut l = free;
                    l.push(1.0 - sum);
                    break l;
                }
            },
            SimplexSampling::Normalized => {
                self.proposals += 1;
                let raw: Vec<f64> = (0..self.m).map(|_| self.rng.sample(Open01)).collect();
                let sum: f64 = raw.iter().sum();
                raw.into_iter().map(|x| x / sum).collect()
            }
        };
        let epsilon: f64 = self.rng.sample(Open01);
        MscParams { lambdas, epsilon }
    }

    /// Simplex proposals made so far, accepted or not.
    pub fn proposals(&self) -> u64 {
        self.proposals
    }
}

pub fn sample_msc_params(rng_seed: u64, count: usize, m: usize) -> Result<Vec<MscParams<f64>>> {
    let mut sampler = MscSampler::new(rng_seed, m, SimplexSampling::Rejection)?;
    Ok((0..count).map(|_| sampler.draw()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_rows(j: &JointDistribution<f64>, want: &[[f64; 2]; 2]) {
        for (r, row) in want.iter().enumerate() {
            for (c, &w) in row.iter().enumerate() {
                assert!((j.get(r, c) - w).abs() < 1e-15, "cell ({r},{c})");
            }
        }
    }

    #[test]
    fn bsc_examples() {
        assert_rows(
            &bsc_joint(&BscParams::new(0.5, 0.0).unwrap()).unwrap(),
            &[[0.5, 0.0], [0.0, 0.5]],
        );
        assert_rows(
            &bsc_joint(&BscParams::new(0.5, 0.5).unwrap()).unwrap(),
            &[[0.25, 0.25], [0.25, 0.25]],
        );
        assert_rows(
            &bsc_joint(&BscParams::new(0.3, 0.1).unwrap()).unwrap(),
            &[[0.27, 0.03], [0.07, 0.63]],
        );
    }

    #[test]
    fn bsc_rejects_out_of_range() {
        assert!(BscParams::new(1.2, 0.1).is_err());
        assert!(BscParams::new(0.2, -0.1).is_err());
        assert!(BscParams::new(f64::NAN, 0.1).is_err());
        assert!(bsc_joint(&BscParams {
            lambda: 0.5,
            epsilon: 2.0
        })
        .is_err());
    }

    #[test]
    fn msc_reduces_to_bsc() {
        let m = msc_joint(&MscParams::new(vec![0.5_f64, 0.5], 0.2).unwrap()).unwrap();
        let b = bsc_joint(&BscParams::new(0.5, 0.2).unwrap()).unwrap();
        for (x, y) in m.mass().iter().zip(b.mass()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn msc_uniform_rows_at_independence_point() {
        let j = msc_joint(&MscParams::new(vec![0.25_f64; 4], 0.75).unwrap()).unwrap();
        assert!(j.mass().iter().all(|&p| (p - 1.0 / 16.0).abs() < 1e-15));
    }

    #[test]
    fn msc_noiseless_is_diagonal() {
        let j = msc_joint(&MscParams::new(vec![0.2, 0.3, 0.5], 0.0).unwrap()).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let want = if r == c { [0.2, 0.3, 0.5][r] } else { 0.0 };
                assert_eq!(j.get(r, c), want);
            }
        }
    }

    #[test]
    fn msc_rejects_bad_simplex() {
        assert!(MscParams::new(vec![1.0], 0.1).is_err());
        assert!(MscParams::new(vec![0.6, 0.6], 0.1).is_err());
        assert!(MscParams::new(vec![1.1, -0.1], 0.1).is_err());
    }

    #[test]
    fn joint_validation() {
        assert!(JointDistribution::from_row_major(2, 2, vec![0.5, 0.5, 0.5, 0.5]).is_err());
        assert!(JointDistribution::from_row_major(2, 2, vec![0.5, 0.5, 0.5]).is_err());
        assert!(JointDistribution::from_rows(&[vec![0.5, 0.0], vec![0.5]]).is_err());
        let j = JointDistribution::from_rows(&[vec![0.1, 0.2], vec![0.3, 0.4]]).unwrap();
        assert_eq!(j.to_rows(), vec![vec![0.1, 0.2], vec![0.3, 0.4]]);
    }

    #[test]
    fn generic_over_f32() {
        let j = bsc_joint(&BscParams::new(0.3_f32, 0.1).unwrap()).unwrap();
        assert!((j.get(1, 1) - 0.63).abs() < 1e-6);
        assert!((j.row_marginal().probs()[0] - 0.3).abs() < 1e-6);
    }

    #[test]
    fn bsc_sampling_is_deterministic() {
        let a = sample_bsc_params(7, 20_000);
        assert_eq!(a, sample_bsc_params(7, 20_000));
        assert_ne!(a, sample_bsc_params(8, 20_000));
        let mean = a.iter().map(|p| p.lambda).sum::<f64>() / a.len() as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean lambda {mean}");
        assert!(a.iter().all(|p| p.lambda > 0.0 && p.lambda < 1.0));
        assert!(sample_bsc_params(7, 0).is_empty());
    }

    #[test]
    fn msc_sampling_respects_simplex() {
        let draws = sample_msc_params(3, 5_000, 4).unwrap();
        assert_eq!(draws, sample_msc_params(3, 5_000, 4).unwrap());
        for d in &draws {
            MscParams::new(d.lambdas().to_vec(), d.epsilon()).unwrap();
            assert!(d.lambdas().iter().all(|&l| l > 0.0));
        }
    }

    #[test]
    fn rejection_rate_is_one_sixth_for_four_symbols() {
        let mut s = MscSampler::new(11, 4, SimplexSampling::Rejection).unwrap();
        let n = 30_000;
        for _ in 0..n {
            s.draw();
        }
        let rate = n as f64 / s.proposals() as f64;
        assert!((rate - 1.0 / 6.0).abs() < 0.005, "acceptance {rate}");
    }

    #[test]
    fn normalized_scheme_is_valid() {
        let mut s = MscSampler::new(5, 4, SimplexSampling::Normalized).unwrap();
        for _ in 0..100 {
            let d = s.draw();
            assert!(MscParams::new(d.lambdas().to_vec(), d.epsilon()).is_ok());
        }
        assert_eq!(s.proposals(), 100);
    }
}
