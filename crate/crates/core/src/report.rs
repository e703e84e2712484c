use std::time::Duration;

use nalgebra::DVector;

/// Outcome of one solve: the estimate plus per-iteration monitoring traces.
///
/// All traces have one entry per iteration.
#[derive(Clone, Debug)]
pub struct SolveReport {
    pub solver: String,
    pub beta_hat: DVector<f64>,
    pub objective_trace: Vec<f64>,
    pub r_pri_trace: Vec<f64>,
    pub s_trace: Vec<f64>,
    /// ‖Eβ − f‖₁ per iteration.
    pub eq_violation_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub wall_time: Duration,
    pub final_eps_pri: f64,
    pub final_eps_dual: f64,
    /// Largest relative gap between the cached β-factorization and a fresh solve,
    /// sampled every 100 β-updates (None when never sampled).
    pub factor_refresh_deviation: Option<f64>,
}

impl SolveReport {
    pub(crate) fn empty(solver: &str, p: usize) -> Self {
        Self {
            solver: solver.to_string(),
            beta_hat: DVector::zeros(p),
            objective_trace: Vec::new(),
            r_pri_trace: Vec::new(),
            s_trace: Vec::new(),
            eq_violation_trace: Vec::new(),
            iterations: 0,
            converged: false,
            wall_time: Duration::ZERO,
            final_eps_pri: f64::NAN,
            final_eps_dual: f64::NAN,
            factor_refresh_deviation: None,
        }
    }

    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_eq_violation(&self) -> f64 {
        self.eq_violation_trace.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_r_pri(&self) -> f64 {
        self.r_pri_trace.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_s(&self) -> f64 {
        self.s_trace.last().copied().unwrap_or(f64::NAN)
    }

    /// First iteration (1-based) whose ‖Eβ − f‖₁ is below `tol`, if any.
    pub fn first_feasible_iteration(&self, tol: f64) -> Option<usize> {
        self.eq_violation_trace.iter().position(|&v| v < tol).map(|i| i + 1)
    }
}
