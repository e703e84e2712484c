//! λ selection by the high-dimensional BIC
//! `HBIC(λ) = log(Σ ρτ(yᵢ − xᵢᵀβ̂)) + df · log(log n)/n · C_n`,
//! where df counts observations the fit interpolates.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{median_abs, norm_inf};
use crate::problem::{check_loss_sum, PenaltyFamily, PenaltySpec, Problem, SolverConfig};
use crate::report::SolveReport;
use crate::solvers::{solve_from, SolverKind, SolverState};

/// Default number of grid points.
pub const GRID_SIZE: usize = 30;
/// Smallest grid value relative to λ_max.
pub const GRID_RATIO: f64 = 1e-3;
/// df tolerance relative to median |y|.
pub const DF_TOL_SCALE: f64 = 1e-4;
/// HBIC values closer than this count as tied. It is a 0.01% change in the
/// loss, below what the solvers resolve at their default tolerances.
pub const HBIC_TIE_TOL: f64 = 1e-4;
/// Pilot doublings allowed while searching for λ_max.
const MAX_PILOT_DOUBLINGS: usize = 8;

#[derive(Clone, Debug, PartialEq)]
pub struct TuningGrid {
    lambdas: Vec<f64>,
    cn: f64,
    df_tol: f64,
}

impl TuningGrid {
    pub fn new(lambdas: Vec<f64>, cn: f64, df_tol: f64) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidGrid("empty grid".into()));
        }
        if lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidGrid("lambdas must be positive and finite".into()));
        }
        if lambdas.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidGrid("lambdas must be strictly descending".into()));
        }
        if !(cn > 0.0 && cn.is_finite()) {
            return Err(Error::InvalidGrid(format!("Cn must be positive, got {cn}")));
        }
        if !(df_tol >= 0.0 && df_tol.is_finite()) {
            return Err(Error::InvalidGrid(format!("df_tol must be >= 0, got {df_tol}")));
        }
        Ok(Self { lambdas, cn, df_tol })
    }

    /// `count` log-spaced values from `lambda_max` down to `ratio · lambda_max`.
    pub fn log_spaced(lambda_max: f64, ratio: f64, count: usize, cn: f64, df_tol: f64) -> Result<Self> {
        if count == 0 || !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidGrid(format!("bad grid shape: count {count}, ratio {ratio}")));
        }
        let lambdas = if count == 1 {
            vec![lambda_max]
        } else {
            let step = ratio.ln() / (count - 1) as f64;
            (0..count).map(|k| lambda_max * (step * k as f64).exp()).collect()
        };
        Self::new(lambdas, cn, df_tol)
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn cn(&self) -> f64 {
        self.cn
    }

    pub fn df_tol(&self) -> f64 {
        self.df_tol
    }
}

/// Default C_n = log p.
pub fn default_cn(prob: &Problem) -> f64 {
    (prob.p().max(2) as f64).ln()
}

/// Default df tolerance: 1e−4 · median |y|.
pub fn default_df_tol(prob: &Problem) -> f64 {
    DF_TOL_SCALE * median_abs(&prob.y)
}

/// Observations with |yᵢ − xᵢᵀβ̂| ≤ df_tol.
pub fn degrees_of_freedom(prob: &Problem, beta_hat: &DVector<f64>, df_tol: f64) -> usize {
    let resid = &prob.y - &prob.x * beta_hat;
    resid.iter().filter(|r| r.abs() <= df_tol).count()
}

pub fn hbic(prob: &Problem, beta_hat: &DVector<f64>, cn: f64, df_tol: f64) -> Result<f64> {
    let n = prob.n();
    if n < 3 {
        return Err(Error::InvalidConfig(format!("HBIC needs n >= 3, got {n}")));
    }
    if beta_hat.len() != prob.p() {
        return Err(Error::DimensionMismatch(format!(
            "beta_hat.len = {} but p = {}",
            beta_hat.len(),
            prob.p()
        )));
    }
    let loss = check_loss_sum(&(&prob.y - &prob.x * beta_hat), prob.tau);
    if !(loss > 0.0) {
        return Err(Error::DegenerateLoss);
    }
    let df = degrees_of_freedom(prob, beta_hat, df_tol) as f64;
    let nf = n as f64;
    Ok(loss.ln() + df * nf.ln().ln() / nf * cn)
}

/// Starting λ: ‖Xᵀψτ(y)‖∞ with ψτ(u) = τ − 1{u < 0}, the smallest λ for
/// which β = 0 is optimal when D = I and there are no constraints.
pub fn lambda_start(prob: &Problem) -> f64 {
    let psi = prob.y.map(|v| if v < 0.0 { prob.tau - 1.0 } else { prob.tau });
    norm_inf(&prob.x.tr_mul(&psi))
}

/// λ_max by pilot solves: the smallest λ at which ‖Dβ̂‖₁ has reached its floor.
///
/// Starting at [`lambda_start`], λ doubles until ‖Dβ̂‖∞ ≤ `zero_tol` or a
/// doubling moves ‖Dβ̂‖₁ by less than 5% (constraints can keep Dβ̂ away from
/// zero at any λ). It then halves while ‖Dβ̂‖₁ stays within 5% of the floor.
/// Pilots run with a fifth of `cfg.max_iters`.
pub fn lambda_max(
    prob: &Problem,
    family: PenaltyFamily,
    xi: f64,
    kind: SolverKind,
    cfg: &SolverConfig,
    zero_tol: f64,
) -> Result<f64> {
    let pilot_cfg = SolverConfig { max_iters: (cfg.max_iters / 5).max(1), ..cfg.clone() };
    let pilot = |lambda: f64, warm: Option<&SolverState>| -> Result<(f64, f64, SolverState)> {
        let pen = PenaltySpec::new(family, lambda, xi)?;
        let out = solve_from(kind, prob, &pen, &pilot_cfg, warm)?;
        let db = &prob.penalty * &out.report.beta_hat;
        Ok((norm_inf(&db), db.abs().sum(), out.state))
    };

    let mut lambda = lambda_start(prob).max(f64::MIN_POSITIVE);
    let (mut sup, mut floor, mut state) = pilot(lambda, None)?;
    let mut doublings = 0;
    while sup > zero_tol && doublings < MAX_PILOT_DOUBLINGS {
        let (s2, l2, st2) = pilot(2.0 * lambda, Some(&state))?;
        doublings += 1;
        if l2 > 0.95 * floor {
            floor = floor.min(l2);
            break;
        }
        (lambda, sup, floor, state) = (2.0 * lambda, s2, l2, st2);
    }
    for _ in 0..MAX_PILOT_DOUBLINGS {
        let (s2, l2, st2) = pilot(lambda / 2.0, Some(&state))?;
        let saturated = if sup <= zero_tol { s2 <= zero_tol } else { l2 <= 1.05 * floor };
        if !saturated {
            break;
        }
        (lambda, sup, state) = (lambda / 2.0, s2, st2);
    }
    Ok(lambda)
}

/// The default grid: 30 log-spaced values from λ_max to 1e−3 · λ_max,
/// C_n = log p, df_tol = 1e−4 · median |y|.
pub fn default_grid(
    prob: &Problem,
    family: PenaltyFamily,
    xi: f64,
    kind: SolverKind,
    cfg: &SolverConfig,
) -> Result<TuningGrid> {
    let lmax = lambda_max(prob, family, xi, kind, cfg, 1e-3)?;
    TuningGrid::log_spaced(lmax, GRID_RATIO, GRID_SIZE, default_cn(prob), default_df_tol(prob))
}

#[derive(Clone, Debug)]
pub struct GridPoint {
    pub lambda: f64,
    /// `None` when the solve failed or the loss was degenerate.
    pub hbic: Option<f64>,
    pub df: usize,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct Selection {
    pub lambda: f64,
    pub report: SolveReport,
    pub path: Vec<GridPoint>,
}

/// Fit every λ in descending order and return the HBIC minimizer. With
/// `warm_start` each solve starts from the previous λ's final state. Ties, up to
/// [`HBIC_TIE_TOL`], go to the larger λ. A λ whose solve fails is skipped with a
/// warning.
pub fn select_lambda(
    prob: &Problem,
    family: PenaltyFamily,
    xi: f64,
    grid: &TuningGrid,
    cfg: &SolverConfig,
    kind: SolverKind,
    warm_start: bool,
) -> Result<Selection> {
    let mut path = Vec::with_capacity(grid.lambdas.len());
    let mut reports = Vec::with_capacity(grid.lambdas.len());
    let mut prev: Option<SolverState> = None;
    let mut last_err = None;
    for &lambda in &grid.lambdas {
        let pen = PenaltySpec::new(family, lambda, xi)?;
        let warm = if warm_start { prev.as_ref() } else { None };
        let out = match solve_from(kind, prob, &pen, cfg, warm) {
            Ok(o) => o,
            Err(e) => {
                log::warn!("lambda {lambda}: solve failed ({e}); excluded");
                path.push(GridPoint { lambda, hbic: None, df: 0, iterations: 0, converged: false });
                reports.push(None);
                last_err = Some(e);
                continue;
            }
        };
        let beta = &out.report.beta_hat;
        path.push(GridPoint {
            lambda,
            hbic: hbic(prob, beta, grid.cn, grid.df_tol).ok(),
            df: degrees_of_freedom(prob, beta, grid.df_tol),
            iterations: out.report.iterations,
            converged: out.report.converged,
        });
        reports.push(Some(out.report));
        prev = Some(out.state);
    }
    let Some(min) = path.iter().filter_map(|g| g.hbic).reduce(f64::min) else {
        return Err(last_err.unwrap_or(Error::DegenerateLoss));
    };
    let k = path
        .iter()
        .position(|g| g.hbic.is_some_and(|h| h <= min + HBIC_TIE_TOL))
        .expect("the minimum is on the path");
    let report = reports[k].take().expect("scored points have reports");
    Ok(Selection { lambda: path[k].lambda, report, path })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dvector, DMatrix};

    fn line_problem(n: usize) -> Problem {
        let x = DMatrix::from_fn(n, 1, |i, _| i as f64 + 1.0);
        let y = DVector::from_fn(n, |i, _| (i as f64 + 1.0) * 2.0 + if i % 2 == 0 { 0.5 } else { -0.25 });
        Problem::unconstrained(y, x, DMatrix::identity(1, 1), 0.5).unwrap()
    }

    #[test]
    fn no_interpolation_means_log_loss() {
        let prob = line_problem(10);
        let beta = dvector![0.0];
        let loss = check_loss_sum(&prob.y, 0.5);
        assert_eq!(hbic(&prob, &beta, 2.0, 1e-9).unwrap(), loss.ln());
    }

    #[test]
    fn penalty_term_formula() {
        // Loss 10 from ten residuals of 2 at τ = 0.5; five more interpolated rows.
        let n = 100;
        let x = DMatrix::from_element(n, 1, 1.0);
        let y = DVector::from_fn(n, |i, _| if i < 10 { 3.0 } else if i < 15 { 1.0 } else { 1.0 + 1e-12 });
        let prob = Problem::unconstrained(y, x, DMatrix::identity(1, 1), 0.5).unwrap();
        let beta = dvector![1.0];
        let cn = 50f64.ln();
        let h = hbic(&prob, &beta, cn, 0.0).unwrap();
        let expected = 10f64.ln() + 5.0 * (100f64.ln()).ln() * cn / 100.0;
        assert!((h - expected).abs() < 1e-9, "{h} vs {expected}");
    }

    #[test]
    fn perfect_fit_is_degenerate() {
        let x = DMatrix::from_element(4, 1, 1.0);
        let prob = Problem::unconstrained(DVector::from_element(4, 2.0), x, DMatrix::identity(1, 1), 0.5).unwrap();
        assert_eq!(hbic(&prob, &dvector![2.0], 1.0, 1e-6).unwrap_err(), Error::DegenerateLoss);
    }

    #[test]
    fn tiny_n_rejected() {
        let x = DMatrix::from_element(2, 1, 1.0);
        let prob = Problem::unconstrained(dvector![1.0, 2.0], x, DMatrix::identity(1, 1), 0.5).unwrap();
        assert!(hbic(&prob, &dvector![0.0], 1.0, 0.0).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(TuningGrid::new(vec![], 1.0, 0.0).is_err());
        assert!(TuningGrid::new(vec![1.0, 2.0], 1.0, 0.0).is_err());
        assert!(TuningGrid::new(vec![2.0, 1.0], 0.0, 0.0).is_err());
        assert!(TuningGrid::new(vec![2.0, 1.0], 1.0, -1.0).is_err());
        let g = TuningGrid::log_spaced(10.0, 1e-3, 30, 1.0, 0.0).unwrap();
        assert_eq!(g.lambdas().len(), 30);
        assert!((g.lambdas()[29] - 0.01).abs() < 1e-12);
    }

    #[test]
    fn single_point_grid_returns_it() {
        let prob = line_problem(20);
        let grid = TuningGrid::new(vec![0.3], 1.0, 1e-6).unwrap();
        let sel = select_lambda(
            &prob,
            PenaltyFamily::Lasso,
            0.0,
            &grid,
            &SolverConfig::default(),
            SolverKind::Admm4Constr,
            true,
        )
        .unwrap();
        assert_eq!(sel.lambda, 0.3);
        assert_eq!(sel.path.len(), 1);
    }

    #[test]
    fn lambda_start_for_median() {
        let x = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
        let y = dvector![1.0, -1.0, 1.0];
        let prob = Problem::unconstrained(y, x, DMatrix::identity(1, 1), 0.5).unwrap();
        assert_eq!(lambda_start(&prob), 1.0);
    }
}
