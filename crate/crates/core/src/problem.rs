//! Problem instance, penalty specification and solver configuration.
//!
//! A [`Problem`] holds the data of
//!
//! ```text
//! minimize   Σᵢ ρτ(yᵢ − xᵢᵀβ) + Σⱼ pλ((Dβ)ⱼ)
//! subject to Cβ ≥ d,  Eβ = f
//! ```
//!
//! Empty constraint blocks are 0-row matrices, so constrained and unconstrained
//! problems share one code path.

use nalgebra::{DMatrix, DVector, DVectorView};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    /// Response, length n.
    pub y: DVector<f64>,
    /// Design matrix, n × p.
    pub x: DMatrix<f64>,
    /// Penalty matrix D, m × p.
    pub penalty: DMatrix<f64>,
    /// Inequality matrix C, q × p.
    pub ineq: DMatrix<f64>,
    /// Inequality bound d, length q.
    pub ineq_rhs: DVector<f64>,
    /// Equality matrix E, s × p.
    pub eq: DMatrix<f64>,
    /// Equality target f, length s.
    pub eq_rhs: DVector<f64>,
    /// Quantile level in (0, 1).
    pub tau: f64,
}

impl Problem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        y: DVector<f64>,
        x: DMatrix<f64>,
        penalty: DMatrix<f64>,
        ineq: DMatrix<f64>,
        ineq_rhs: DVector<f64>,
        eq: DMatrix<f64>,
        eq_rhs: DVector<f64>,
        tau: f64,
    ) -> Result<Self> {
        validate_problem(Problem { y, x, penalty, ineq, ineq_rhs, eq, eq_rhs, tau })
    }

    /// No inequality or equality constraints.
    pub fn unconstrained(
        y: DVector<f64>,
        x: DMatrix<f64>,
        penalty: DMatrix<f64>,
        tau: f64,
    ) -> Result<Self> {
        let p = x.ncols();
        Self::new(
            y,
            x,
            penalty,
            DMatrix::zeros(0, p),
            DVector::zeros(0),
            DMatrix::zeros(0, p),
            DVector::zeros(0),
            tau,
        )
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }
    pub fn p(&self) -> usize {
        self.x.ncols()
    }
    pub fn m(&self) -> usize {
        self.penalty.nrows()
    }
    pub fn q(&self) -> usize {
        self.ineq.nrows()
    }
    pub fn s(&self) -> usize {
        self.eq.nrows()
    }

    /// ‖Eβ − f‖₁
    pub fn eq_violation(&self, beta: &DVector<f64>) -> f64 {
        if self.s() == 0 {
            return 0.0;
        }
        (&self.eq * beta - &self.eq_rhs).iter().map(|v| v.abs()).sum()
    }

    /// max over rows of (d − Cβ)₊
    pub fn ineq_violation(&self, beta: &DVector<f64>) -> f64 {
        if self.q() == 0 {
            return 0.0;
        }
        (&self.ineq_rhs - &self.ineq * beta)
            .iter()
            .fold(0.0_f64, |a, &b| a.max(b))
    }

    /// Same constraints and penalty on a different sample.
    pub fn with_data(&self, y: DVector<f64>, x: DMatrix<f64>) -> Result<Self> {
        Self::new(
            y,
            x,
            self.penalty.clone(),
            self.ineq.clone(),
            self.ineq_rhs.clone(),
            self.eq.clone(),
            self.eq_rhs.clone(),
            self.tau,
        )
    }
}

/// Check that all dimensions agree, every entry is finite and τ ∈ (0, 1).
pub fn validate_problem(prob: Problem) -> Result<Problem> {
    let n = prob.x.nrows();
    let p = prob.x.ncols();
    let mismatch = |what: &str, got: usize, want: usize| {
        Err(Error::DimensionMismatch(format!("{what} = {got} but expected {want}")))
    };
    if prob.y.len() != n {
        return mismatch("y.len (n)", prob.y.len(), n);
    }
    if prob.penalty.ncols() != p {
        return mismatch("D.cols", prob.penalty.ncols(), p);
    }
    if prob.ineq.ncols() != p {
        return mismatch("C.cols", prob.ineq.ncols(), p);
    }
    if prob.eq.ncols() != p {
        return mismatch("E.cols", prob.eq.ncols(), p);
    }
    if prob.ineq_rhs.len() != prob.ineq.nrows() {
        return mismatch("d.len", prob.ineq_rhs.len(), prob.ineq.nrows());
    }
    if prob.eq_rhs.len() != prob.eq.nrows() {
        return mismatch("f.len", prob.eq_rhs.len(), prob.eq.nrows());
    }
    let finite = |name: &str, mut it: Box<dyn Iterator<Item = &f64> + '_>| {
        if it.all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFiniteEntry(name.to_string()))
        }
    };
    finite("y", Box::new(prob.y.iter()))?;
    finite("X", Box::new(prob.x.iter()))?;
    finite("D", Box::new(prob.penalty.iter()))?;
    finite("C", Box::new(prob.ineq.iter()))?;
    finite("d", Box::new(prob.ineq_rhs.iter()))?;
    finite("E", Box::new(prob.eq.iter()))?;
    finite("f", Box::new(prob.eq_rhs.iter()))?;
    if !(prob.tau > 0.0 && prob.tau < 1.0) {
        return Err(Error::TauOutOfRange(prob.tau));
    }
    Ok(prob)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PenaltyFamily {
    Lasso,
    Scad,
    Mcp,
}

impl PenaltyFamily {
    pub fn name(self) -> &'static str {
        match self {
            PenaltyFamily::Lasso => "lasso",
            PenaltyFamily::Scad => "scad",
            PenaltyFamily::Mcp => "mcp",
        }
    }
}

impl std::str::FromStr for PenaltyFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lasso" => Ok(PenaltyFamily::Lasso),
            "scad" => Ok(PenaltyFamily::Scad),
            "mcp" => Ok(PenaltyFamily::Mcp),
            other => Err(Error::InvalidConfig(format!("unknown penalty family `{other}`"))),
        }
    }
}

/// Componentwise penalty pλ applied to each entry of Dβ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltySpec {
    pub family: PenaltyFamily,
    pub lambda: f64,
    /// Concavity parameter; ignored for the lasso.
    pub xi: f64,
}

impl PenaltySpec {
    pub fn new(family: PenaltyFamily, lambda: f64, xi: f64) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidConfig(format!("lambda must be >= 0, got {lambda}")));
        }
        if family != PenaltyFamily::Lasso && !(xi.is_finite() && xi > 0.0) {
            return Err(Error::InvalidConfig(format!("xi must be positive, got {xi}")));
        }
        Ok(Self { family, lambda, xi })
    }

    pub fn lasso(lambda: f64) -> Result<Self> {
        Self::new(PenaltyFamily::Lasso, lambda, 0.0)
    }

    pub fn scad(lambda: f64, xi: f64) -> Result<Self> {
        Self::new(PenaltyFamily::Scad, lambda, xi)
    }

    pub fn mcp(lambda: f64, xi: f64) -> Result<Self> {
        Self::new(PenaltyFamily::Mcp, lambda, xi)
    }

    pub fn with_lambda(self, lambda: f64) -> Result<Self> {
        Self::new(self.family, lambda, self.xi)
    }

    /// Penalty value at a single coordinate t.
    ///
    /// SCAD: λ|t| up to λ, quadratic blend up to ξλ, constant λ²(ξ+1)/2 beyond.
    /// MCP: λ|t| − t²/(2ξ) up to ξλ, constant ξλ²/2 beyond.
    pub fn value(&self, t: f64) -> f64 {
        let a = t.abs();
        let lam = self.lambda;
        match self.family {
            PenaltyFamily::Lasso => lam * a,
            PenaltyFamily::Scad => {
                let xi = self.xi;
                if a <= lam {
                    lam * a
                } else if a <= xi * lam {
                    (2.0 * xi * lam * a - a * a - lam * lam) / (2.0 * (xi - 1.0))
                } else {
                    lam * lam * (xi + 1.0) / 2.0
                }
            }
            PenaltyFamily::Mcp => {
                let xi = self.xi;
                if a <= xi * lam {
                    lam * a - a * a / (2.0 * xi)
                } else {
                    xi * lam * lam / 2.0
                }
            }
        }
    }

    /// Σⱼ pλ(vⱼ)
    pub fn total(&self, v: &DVector<f64>) -> f64 {
        v.iter().map(|&t| self.value(t)).sum()
    }

    /// Check that the scalar prox objective pλ(z) + (γ/2)(δ − z)² is convex.
    pub fn check_concavity(&self, gamma: f64) -> Result<()> {
        let bound = match self.family {
            PenaltyFamily::Lasso => return Ok(()),
            PenaltyFamily::Scad => (1.0 / gamma + 1.0).max(2.0),
            PenaltyFamily::Mcp => 1.0 / gamma,
        };
        if self.xi > bound {
            Ok(())
        } else {
            Err(Error::ConcavityTooLarge { xi: self.xi, gamma, bound })
        }
    }
}

/// ρτ(z) = τz for z > 0 and (τ − 1)z otherwise.
#[inline]
pub fn check_loss(z: f64, tau: f64) -> f64 {
    if z > 0.0 {
        tau * z
    } else {
        (tau - 1.0) * z
    }
}

pub fn check_loss_sum(residual: &DVector<f64>, tau: f64) -> f64 {
    residual.iter().map(|&z| check_loss(z, tau)).sum()
}

/// ρτ(y − Xβ) + Σⱼ pλ((Dβ)ⱼ)
pub fn check_objective(prob: &Problem, pen: &PenaltySpec, beta: &DVector<f64>) -> Result<f64> {
    if beta.len() != prob.p() {
        return Err(Error::DimensionMismatch(format!(
            "beta.len = {} but p = {}",
            beta.len(),
            prob.p()
        )));
    }
    Ok(objective_with_fit(prob, pen, (&prob.x * beta).as_view(), beta))
}

/// Same as [`check_objective`] with `Xβ` already available.
pub(crate) fn objective_with_fit(prob: &Problem, pen: &PenaltySpec, fit: DVectorView<'_, f64>, beta: &DVector<f64>) -> f64 {
    let loss = prob.y.iter().zip(fit.iter()).map(|(y, f)| check_loss(y - f, prob.tau)).sum::<f64>();
    let pen_val = if pen.lambda == 0.0 || prob.m() == 0 {
        0.0
    } else {
        pen.total(&(&prob.penalty * beta))
    };
    loss + pen_val
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Augmented-Lagrangian parameter γ.
    pub gamma: f64,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iters: usize,
    /// Iteration cap for nested subproblems (generalized-lasso β-update, projections).
    pub inner_max_iters: usize,
    pub inner_tol: f64,
    /// Run the extended scheme even when no block partition passes the
    /// orthogonality check.
    pub allow_unverified_partition: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            eps_abs: 1e-3,
            eps_rel: 1e-3,
            max_iters: 10_000,
            inner_max_iters: 500,
            inner_tol: 1e-8,
            allow_unverified_partition: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")))
            }
        };
        positive("gamma", self.gamma)?;
        positive("eps_abs", self.eps_abs)?;
        positive("eps_rel", self.eps_rel)?;
        positive("inner_tol", self.inner_tol)?;
        if self.max_iters == 0 || self.inner_max_iters == 0 {
            return Err(Error::InvalidConfig("iteration caps must be >= 1".into()));
        }
        Ok(())
    }

    pub fn with_tolerance(mut self, eps: f64) -> Self {
        self.eps_abs = eps;
        self.eps_rel = eps;
        self
    }
}
