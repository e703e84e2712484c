//! Synthetic heteroscedastic design and evaluation metrics.
//!
//! Covariates: X̃ ~ N(0, Σ) with Σᵢⱼ = ρ^|i−j|, X₁ = Φ(X̃₁), Xₖ = X̃ₖ otherwise.
//! Response: y = X₅ + X₆ + X₁₁ + X₁₂ + X₁ε with ε ~ N(0, 1), so the conditional
//! τ-quantile is linear with coefficient Φ⁻¹(τ) on X₁ (1-based indices).

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::problem::{PenaltySpec, Problem};

/// 1-based indices of the nonzero true coefficients (slot 1 may be zero at τ = 0.5).
pub const SIGNAL: [usize; 5] = [1, 5, 6, 11, 12];
/// Test-set size used by the replication studies.
pub const TEST_SIZE: usize = 2000;
/// |β̂ⱼ| above this counts as selected.
pub const NZ_TOL: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorDist {
    StandardNormal,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioSpec {
    pub n: usize,
    pub p: usize,
    pub tau: f64,
    pub error_dist: ErrorDist,
    pub rho: f64,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn new(n: usize, p: usize, tau: f64, seed: u64) -> Self {
        Self { n, p, tau, error_dist: ErrorDist::StandardNormal, rho: 0.5, seed }
    }

    fn validate(&self) -> Result<()> {
        if self.p < 15 {
            return Err(Error::InvalidConfig(format!("design needs p >= 15, got {}", self.p)));
        }
        if self.n == 0 {
            return Err(Error::InvalidConfig("design needs n >= 1".into()));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::TauOutOfRange(self.tau));
        }
        if !(self.rho.abs() < 1.0) {
            return Err(Error::InvalidConfig(format!("|rho| must be < 1, got {}", self.rho)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub beta_true: DVector<f64>,
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

/// Φ⁻¹(τ) in slot 1, ones in slots 5, 6, 11, 12.
pub fn true_beta(p: usize, tau: f64) -> DVector<f64> {
    let mut beta = DVector::zeros(p);
    beta[0] = std_normal().inverse_cdf(tau);
    for j in [5, 6, 11, 12] {
        beta[j - 1] = 1.0;
    }
    beta
}

/// Draw `n` rows of the AR(1) latent design (before the Φ transform).
pub fn latent_design(n: usize, p: usize, rho: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let innov = (1.0 - rho * rho).sqrt();
    let mut xt = DMatrix::zeros(n, p);
    for i in 0..n {
        let mut prev: f64 = StandardNormal.sample(rng);
        xt[(i, 0)] = prev;
        for k in 1..p {
            let e: f64 = StandardNormal.sample(rng);
            prev = rho * prev + innov * e;
            xt[(i, k)] = prev;
        }
    }
    xt
}

fn draw(n: usize, spec: &ScenarioSpec, rng: &mut ChaCha8Rng) -> (DMatrix<f64>, DVector<f64>) {
    let mut x = latent_design(n, spec.p, spec.rho, rng);
    let phi = std_normal();
    for i in 0..n {
        x[(i, 0)] = phi.cdf(x[(i, 0)]);
    }
    let y = DVector::from_fn(n, |i, _| {
        let eps: f64 = match spec.error_dist {
            ErrorDist::StandardNormal => StandardNormal.sample(rng),
        };
        x[(i, 4)] + x[(i, 5)] + x[(i, 10)] + x[(i, 11)] + x[(i, 0)] * eps
    });
    (x, y)
}

/// Training data for `spec`; identical seeds give bit-identical output.
pub fn gen_scenario(spec: &ScenarioSpec) -> Result<Scenario> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (x, y) = draw(spec.n, spec, &mut rng);
    Ok(Scenario { x, y, beta_true: true_beta(spec.p, spec.tau) })
}

/// Independent test sample of size `n_test` drawn from a separate stream.
pub fn gen_test_set(spec: &ScenarioSpec, n_test: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(1);
    Ok(draw(n_test, spec, &mut rng))
}

/// Which reading of the design's equality constraint to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ConstraintVariant {
    /// −3β₅ + β₁₀ + β₁₂ + β₁₅ = −1. The true coefficients give −2.
    #[default]
    Verbatim,
    /// −3β₅ + β₁₁ + β₁₂ + β₁₅ = −1, which the true coefficients satisfy.
    Consistent,
}

/// Identity stacked on first differences: (2p − 1) × p.
pub fn fused_lasso_matrix(p: usize) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(2 * p - 1, p);
    for j in 0..p {
        d[(j, j)] = 1.0;
    }
    for j in 1..p {
        d[(p + j - 1, j)] = 1.0;
        d[(p + j - 1, j - 1)] = -1.0;
    }
    d
}

/// Rows selecting the given 1-based coefficients.
pub fn selector_rows(p: usize, indices: &[usize]) -> DMatrix<f64> {
    let mut c = DMatrix::zeros(indices.len(), p);
    for (row, &j) in indices.iter().enumerate() {
        c[(row, j - 1)] = 1.0;
    }
    c
}

/// Fused-lasso problem with β₅, β₆, β₁₁, β₁₂ ≥ 0 and one equality row.
pub fn build_constraint_problem(
    x: DMatrix<f64>,
    y: DVector<f64>,
    tau: f64,
    lambda: f64,
    variant: ConstraintVariant,
) -> Result<(Problem, PenaltySpec)> {
    let p = x.ncols();
    if p < 15 {
        return Err(Error::InvalidConfig(format!("design needs p >= 15, got {p}")));
    }
    let d = fused_lasso_matrix(p);
    let c = selector_rows(p, &[5, 6, 11, 12]);
    let mut e = DMatrix::zeros(1, p);
    let second = match variant {
        ConstraintVariant::Verbatim => 10,
        ConstraintVariant::Consistent => 11,
    };
    e[(0, 4)] = -3.0;
    e[(0, second - 1)] = 1.0;
    e[(0, 11)] = 1.0;
    e[(0, 14)] = 1.0;
    let prob = Problem::new(y, x, d, c, DVector::zeros(4), e, DVector::from_element(1, -1.0), tau)?;
    Ok((prob, PenaltySpec::lasso(lambda)?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    /// Selected coefficients among the true-signal set {1, 5, 6, 11, 12}.
    pub size: usize,
    /// 1 if X₁ is selected.
    pub p1: f64,
    /// 1 if all of X₅, X₆, X₁₁, X₁₂ are selected.
    pub p2: f64,
    pub ae: f64,
    pub mad: f64,
    pub mape: f64,
    /// Selected coefficients outside the true-signal set.
    pub false_positives: usize,
}

pub fn evaluate(
    beta_hat: &DVector<f64>,
    beta_true: &DVector<f64>,
    x_test: &DMatrix<f64>,
    y_test: &DVector<f64>,
    nz_tol: f64,
) -> Result<MetricsReport> {
    let p = beta_true.len();
    if beta_hat.len() != p || x_test.ncols() != p || x_test.nrows() != y_test.len() {
        return Err(Error::DimensionMismatch(format!(
            "beta_hat {}, beta_true {}, X_test {}x{}, y_test {}",
            beta_hat.len(),
            p,
            x_test.nrows(),
            x_test.ncols(),
            y_test.len()
        )));
    }
    if p < 12 {
        return Err(Error::DimensionMismatch(format!("need p >= 12 for the signal set, got {p}")));
    }
    let selected = |j: usize| beta_hat[j - 1].abs() > nz_tol;
    let size = SIGNAL.iter().filter(|&&j| selected(j)).count();
    let false_positives = (1..=p).filter(|j| !SIGNAL.contains(j) && selected(*j)).count();
    let p1 = if selected(1) { 1.0 } else { 0.0 };
    let p2 = if [5, 6, 11, 12].iter().all(|&j| selected(j)) { 1.0 } else { 0.0 };
    let ae = (beta_hat - beta_true).abs().sum();
    let n_t = y_test.len().max(1) as f64;
    let fit = x_test * beta_hat;
    let mad = (x_test * beta_true - &fit).abs().sum() / n_t;
    let mape = (y_test - &fit).abs().sum() / n_t;
    Ok(MetricsReport { size, p1, p2, ae, mad, mape, false_positives })
}

/// Shape of a random constrained instance with a fused-lasso penalty.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RandomInstanceSpec {
    pub n: usize,
    pub p: usize,
    /// Inequality rows.
    pub q: usize,
    /// Equality rows.
    pub s: usize,
    pub tau: f64,
    pub seed: u64,
}

/// Gaussian design and coefficients, `y = Xβ + ε`, and constraints built
/// around a random point `β_f` so that `Cβ_f ≥ d` and `Eβ_f = f` hold.
pub fn random_instance(spec: &RandomInstanceSpec) -> Result<Problem> {
    let RandomInstanceSpec { n, p, q, s, tau, seed } = *spec;
    if n == 0 || p < 2 {
        return Err(Error::InvalidConfig(format!("need n >= 1 and p >= 2, got n={n}, p={p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(&mut rng));
    let x = draw(n, p);
    let beta = draw(p, 1).column(0).into_owned();
    let noise = draw(n, 1).column(0).into_owned();
    let y = &x * &beta + noise;
    let beta_f = draw(p, 1).column(0).into_owned();
    let c = draw(q, p);
    let slack = draw(q, 1).column(0).abs();
    let d = &c * &beta_f - slack;
    let e = draw(s, p);
    let f = &e * &beta_f;
    Problem::new(y, x, fused_lasso_matrix(p), c, d, e, f, tau)
}
