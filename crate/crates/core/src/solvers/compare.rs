use std::time::Duration;

use crate::error::{Error, Result};
use crate::problem::{PenaltySpec, Problem, SolverConfig};
use crate::report::SolveReport;

use super::{solve, SolverKind};

/// Relative objective gap allowed between a solver and the best of the four.
pub const MATCH_TOL: f64 = 1e-3;
/// How many times a lagging solver's tolerance is tightened tenfold.
const MAX_TIGHTENINGS: usize = 4;

#[derive(Clone, Debug)]
pub struct ComparisonRow {
    pub solver: SolverKind,
    /// The last report, or the error text when the solve failed.
    pub outcome: std::result::Result<SolveReport, Error>,
    /// Tolerance (ε_abs = ε_rel) of the reported run.
    pub tolerance: f64,
}

impl ComparisonRow {
    pub fn objective(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|r| r.final_objective())
    }

    pub fn iterations(&self) -> Option<usize> {
        self.outcome.as_ref().ok().map(|r| r.iterations)
    }

    pub fn wall_time(&self) -> Option<Duration> {
        self.outcome.as_ref().ok().map(|r| r.wall_time)
    }

    pub fn eq_violation(&self) -> Option<f64> {
        self.outcome.as_ref().ok().map(|r| r.final_eq_violation())
    }
}

#[derive(Clone, Debug)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    /// Largest relative gap to the best objective over successful rows.
    pub max_gap: f64,
}

impl ComparisonTable {
    pub fn row(&self, kind: SolverKind) -> &ComparisonRow {
        self.rows.iter().find(|r| r.solver == kind).expect("every solver has a row")
    }

    pub fn matched(&self) -> bool {
        self.rows.iter().all(|r| r.outcome.is_ok()) && self.max_gap <= MATCH_TOL
    }

    /// Err(MatchedAccuracyUnreachable) unless all four matched.
    pub fn require_matched(self) -> Result<Self> {
        if self.matched() {
            Ok(self)
        } else {
            Err(Error::MatchedAccuracyUnreachable { gap: self.max_gap })
        }
    }
}

fn relative_gap(obj: f64, best: f64) -> f64 {
    if obj.is_nan() {
        return f64::INFINITY;
    }
    (obj - best).abs() / best.abs().max(1.0)
}

/// Run all four solvers to matched objective accuracy.
///
/// Solvers run one at a time so wall times are not skewed by contention. A
/// solver whose objective is more than [`MATCH_TOL`] (relative) above the best
/// is rerun with a tenfold tighter tolerance, up to a few times.
pub fn compare_solvers(prob: &Problem, pen: &PenaltySpec, cfg: &SolverConfig) -> ComparisonTable {
    let mut rows: Vec<ComparisonRow> = SolverKind::ALL
        .iter()
        .map(|&kind| ComparisonRow {
            solver: kind,
            outcome: solve(kind, prob, pen, cfg),
            tolerance: cfg.eps_abs.max(cfg.eps_rel),
        })
        .collect();

    for _ in 0..MAX_TIGHTENINGS {
        let best = match best_objective(&rows) {
            Some(b) => b,
            None => break,
        };
        let mut changed = false;
        for row in rows.iter_mut() {
            let lagging = matches!(row.objective(), Some(o) if relative_gap(o, best) > MATCH_TOL);
            if lagging {
                let tol = row.tolerance * 0.1;
                let tight = SolverConfig { max_iters: cfg.max_iters * 2, ..cfg.clone() }.with_tolerance(tol);
                row.outcome = solve(row.solver, prob, pen, &tight);
                row.tolerance = tol;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let max_gap = match best_objective(&rows) {
        Some(best) => rows
            .iter()
            .filter_map(|r| r.objective())
            .map(|o| relative_gap(o, best))
            .fold(0.0, f64::max),
        None => f64::INFINITY,
    };
    ComparisonTable { rows, max_gap }
}

fn best_objective(rows: &[ComparisonRow]) -> Option<f64> {
    rows.iter().filter_map(|r| r.objective()).filter(|o| o.is_finite()).reduce(f64::min)
}
