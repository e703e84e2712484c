//! The four LCG-QR formulations over the multiblock engine.
//!
//! | solver        | blocks          | constraint handling                   |
//! |---------------|-----------------|---------------------------------------|
//! | ADMM4.Constr  | β, r, z, w      | `Cβ − w = d`, `w ≥ 0`, `Eβ = f` in `c` |
//! | ADMM4.Proj    | β, r, z, w      | `β = w`, `w ∈ 𝒞` by projection         |
//! | ADMM3.Constr  | β, r, w         | as ADMM4.Constr, no `z = Dβ` split     |
//! | ADMM3.Proj    | β, r, w         | as ADMM4.Proj, no `z = Dβ` split       |
//!
//! The three-block variants solve a generalized-lasso β-subproblem iteratively.

mod blocks;
mod compare;

use std::cell::Cell;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::SpdFactor;
use crate::multiblock::{
    run_extended_admm_with, AdmmIterate, BlockMatrix, BlockPart, BlockSpec, MultiBlockProblem,
    TracePoint,
};
use crate::problem::{objective_with_fit, PenaltySpec, Problem, SolverConfig};
use crate::prox::PolyhedronProjector;
use crate::report::SolveReport;

pub use blocks::{FactorAudit, REFRESH_EVERY};
pub use compare::{compare_solvers, ComparisonRow, ComparisonTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Admm4Constr,
    Admm4Proj,
    Admm3Constr,
    Admm3Proj,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] =
        [Self::Admm4Constr, Self::Admm4Proj, Self::Admm3Constr, Self::Admm3Proj];

    pub fn name(self) -> &'static str {
        match self {
            Self::Admm4Constr => "ADMM4.Constr",
            Self::Admm4Proj => "ADMM4.Proj",
            Self::Admm3Constr => "ADMM3.Constr",
            Self::Admm3Proj => "ADMM3.Proj",
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            Self::Admm4Constr => "admm4c",
            Self::Admm4Proj => "admm4p",
            Self::Admm3Constr => "admm3c",
            Self::Admm3Proj => "admm3p",
        }
    }

    pub fn has_z_block(self) -> bool {
        matches!(self, Self::Admm4Constr | Self::Admm4Proj)
    }

    pub fn projects(self) -> bool {
        matches!(self, Self::Admm4Proj | Self::Admm3Proj)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['.', '_', '-'], "");
        match key.as_str() {
            "admm4c" | "admm4constr" => Ok(Self::Admm4Constr),
            "admm4p" | "admm4proj" => Ok(Self::Admm4Proj),
            "admm3c" | "admm3constr" => Ok(Self::Admm3Constr),
            "admm3p" | "admm3proj" => Ok(Self::Admm3Proj),
            _ => Err(Error::InvalidConfig(format!("unknown solver `{s}`"))),
        }
    }
}

/// Primal and dual variables of one formulation. `z` is empty for the
/// three-block variants; `w` has length q for `.Constr` and p for `.Proj`.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub kind: SolverKind,
    pub beta: DVector<f64>,
    pub r: DVector<f64>,
    pub z: DVector<f64>,
    pub w: DVector<f64>,
    pub u: DVector<f64>,
}

impl SolverState {
    fn to_iterate(&self) -> AdmmIterate {
        let mut x = vec![self.beta.clone(), self.r.clone()];
        if self.kind.has_z_block() {
            x.push(self.z.clone());
        }
        x.push(self.w.clone());
        AdmmIterate { x, u: self.u.clone() }
    }

    fn from_iterate(kind: SolverKind, it: AdmmIterate) -> Self {
        let mut x = it.x.into_iter();
        let beta = x.next().expect("beta block");
        let r = x.next().expect("r block");
        let z = if kind.has_z_block() { x.next().expect("z block") } else { DVector::zeros(0) };
        let w = x.next().expect("w block");
        Self { kind, beta, r, z, w, u: it.u }
    }

    /// Segment of the stacked dual belonging to constraint row group `k`.
    pub fn dual_segment(&self, prob: &Problem, k: usize) -> DVector<f64> {
        let seg = segments(self.kind, prob);
        let offset: usize = seg[..k].iter().sum();
        self.u.rows(offset, seg[k]).into_owned()
    }
}

/// Row segments of the stacked constraint `Σ A_l x_l = c`.
pub fn segments(kind: SolverKind, prob: &Problem) -> Vec<usize> {
    let (n, m, p, q, s) = (prob.n(), prob.m(), prob.p(), prob.q(), prob.s());
    match kind {
        SolverKind::Admm4Constr => vec![n, m, q, s],
        SolverKind::Admm4Proj => vec![n, m, p],
        SolverKind::Admm3Constr => vec![n, q, s],
        SolverKind::Admm3Proj => vec![n, p],
    }
}

/// Least-squares fit of y on X, jittered when XᵀX is singular.
pub fn least_squares_start(prob: &Problem) -> Result<DVector<f64>> {
    let factor = SpdFactor::new(prob.x.tr_mul(&prob.x))?;
    Ok(factor.solve(&prob.x.tr_mul(&prob.y)))
}

/// Starting point: β⁰ by least squares, r⁰ = y − Xβ⁰, z⁰ = Dβ⁰,
/// w⁰ = Cβ⁰ − d (or β⁰ for the projection variants), u⁰ = 0.
pub fn initial_state(kind: SolverKind, prob: &Problem) -> Result<SolverState> {
    let beta = least_squares_start(prob)?;
    let r = &prob.y - &prob.x * &beta;
    let z = if kind.has_z_block() { &prob.penalty * &beta } else { DVector::zeros(0) };
    let w = if kind.projects() { beta.clone() } else { &prob.ineq * &beta - &prob.ineq_rhs };
    let h: usize = segments(kind, prob).iter().sum();
    Ok(SolverState { kind, beta, r, z, w, u: DVector::zeros(h) })
}

/// A finished solve: the report plus the final state for warm starts.
#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub report: SolveReport,
    pub state: SolverState,
    /// Projections that stopped at the inner iteration cap.
    pub unconverged_projections: usize,
    /// Total inner iterations of the generalized-lasso β-updates.
    pub inner_iterations: usize,
}

pub fn solve_admm4_constr(prob: &Problem, pen: &PenaltySpec, cfg: &SolverConfig) -> Result<SolveReport> {
    solve(SolverKind::Admm4Constr, prob, pen, cfg)
}

pub fn solve_admm4_proj(prob: &Problem, pen: &PenaltySpec, cfg: &SolverConfig) -> Result<SolveReport> {
    solve(SolverKind::Admm4Proj, prob, pen, cfg)
}

pub fn solve_admm3_constr(prob: &Problem, pen: &PenaltySpec, cfg: &SolverConfig) -> Result<SolveReport> {
    solve(SolverKind::Admm3Constr, prob, pen, cfg)
}

pub fn solve_admm3_proj(prob: &Problem, pen: &PenaltySpec, cfg: &SolverConfig) -> Result<SolveReport> {
    solve(SolverKind::Admm3Proj, prob, pen, cfg)
}

pub fn solve(kind: SolverKind, prob: &Problem, pen: &PenaltySpec, cfg: &SolverConfig) -> Result<SolveReport> {
    Ok(solve_from(kind, prob, pen, cfg, None)?.report)
}

/// Solve, optionally warm-starting from a previous state of the same formulation.
pub fn solve_from(
    kind: SolverKind,
    prob: &Problem,
    pen: &PenaltySpec,
    cfg: &SolverConfig,
    warm: Option<&SolverState>,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    pen.check_concavity(cfg.gamma)?;
    let init = match warm {
        Some(st) => {
            if st.kind != kind {
                return Err(Error::InvalidConfig(format!(
                    "warm start from {} given to {}",
                    st.kind, kind
                )));
            }
            st.clone()
        }
        None => initial_state(kind, prob)?,
    };
    let audit = FactorAudit::default();
    let unconverged = Rc::new(Cell::new(0));
    let (blocks, inner) = build_blocks(kind, prob, pen, cfg, &init, &audit, &unconverged)?;
    let c = stacked_rhs(kind, prob);
    let mut mp = MultiBlockProblem::new(blocks, c, cfg.gamma)?;
    let n = prob.n();
    // Every formulation puts X on the first row segment of the β block.
    let mut monitor = |_: &MultiBlockProblem<'_>, st: &AdmmIterate, ax: &[DVector<f64>]| {
        let beta = &st.x[0];
        TracePoint {
            objective: objective_with_fit(prob, pen, ax[0].rows(0, n), beta),
            eq_violation: prob.eq_violation(beta),
        }
    };
    let run = run_extended_admm_with(&mut mp, cfg, Some(init.to_iterate()), kind.name(), &mut monitor)?;
    let mut report = run.report;
    report.factor_refresh_deviation = audit.get();
    if !report.converged {
        log::warn!("{kind}: stopped at the iteration cap ({}) without converging", cfg.max_iters);
    }
    Ok(SolveOutcome {
        report,
        state: SolverState::from_iterate(kind, run.state),
        unconverged_projections: unconverged.get(),
        inner_iterations: inner.map_or(0, |c| c.get()),
    })
}

fn stacked_rhs(kind: SolverKind, prob: &Problem) -> DVector<f64> {
    let zeros = |k: usize| DVector::zeros(k);
    let parts: Vec<DVector<f64>> = match kind {
        SolverKind::Admm4Constr => {
            vec![prob.y.clone(), zeros(prob.m()), prob.ineq_rhs.clone(), prob.eq_rhs.clone()]
        }
        SolverKind::Admm4Proj => vec![prob.y.clone(), zeros(prob.m()), zeros(prob.p())],
        SolverKind::Admm3Constr => vec![prob.y.clone(), prob.ineq_rhs.clone(), prob.eq_rhs.clone()],
        SolverKind::Admm3Proj => vec![prob.y.clone(), zeros(prob.p())],
    };
    let h = parts.iter().map(|v| v.len()).sum();
    let mut c = DVector::zeros(h);
    let mut offset = 0;
    for part in parts {
        c.rows_mut(offset, part.len()).copy_from(&part);
        offset += part.len();
    }
    c
}

/// The β coefficient matrix and its Gram matrix `A₁ᵀA₁`.
fn beta_matrix(kind: SolverKind, prob: &Problem) -> Result<(BlockMatrix, DMatrix<f64>)> {
    let dense = |m: &DMatrix<f64>| BlockPart::Dense(Arc::new(m.clone()));
    let p = prob.p();
    let parts = match kind {
        SolverKind::Admm4Constr => {
            vec![dense(&prob.x), dense(&prob.penalty), dense(&prob.ineq), dense(&prob.eq)]
        }
        SolverKind::Admm4Proj => vec![dense(&prob.x), dense(&prob.penalty), BlockPart::Identity(1.0)],
        SolverKind::Admm3Constr => vec![dense(&prob.x), dense(&prob.ineq), dense(&prob.eq)],
        SolverKind::Admm3Proj => vec![dense(&prob.x), BlockPart::Identity(1.0)],
    };
    let a = BlockMatrix::new(&segments(kind, prob), parts, p)?;
    let gram = a.cross_gram(&a).unwrap_or_else(|| DMatrix::zeros(p, p));
    Ok((a, gram))
}

/// `scale · I` on segment `k`, zero elsewhere.
fn selector(seg: &[usize], k: usize, scale: f64) -> Result<BlockMatrix> {
    let parts = (0..seg.len())
        .map(|j| if j == k { BlockPart::Identity(scale) } else { BlockPart::Zero })
        .collect();
    BlockMatrix::new(seg, parts, seg[k])
}

#[allow(clippy::too_many_arguments)]
fn build_blocks<'a>(
    kind: SolverKind,
    prob: &Problem,
    pen: &PenaltySpec,
    cfg: &SolverConfig,
    init: &SolverState,
    audit: &FactorAudit,
    unconverged: &Rc<Cell<usize>>,
) -> Result<(Vec<BlockSpec<'a>>, Option<Rc<Cell<usize>>>)> {
    let seg = segments(kind, prob);
    let (a1, gram) = beta_matrix(kind, prob)?;
    let mut inner = None;
    let beta_block = if kind.has_z_block() {
        let ls = blocks::LeastSquaresBlock::new(a1.clone(), gram, audit.clone())?;
        BlockSpec::new("beta", a1, ls)
    } else {
        let glb = blocks::GeneralizedLassoBlock::new(
            a1.clone(),
            gram,
            prob.penalty.clone(),
            *pen,
            &init.beta,
            cfg.inner_tol,
            cfg.inner_max_iters,
            audit.clone(),
        )?;
        inner = Some(glb.inner_iterations.clone());
        BlockSpec::new("beta", a1, glb)
    };
    let mut specs = vec![
        beta_block,
        BlockSpec::new(
            "r",
            selector(&seg, 0, 1.0)?,
            blocks::CheckBlock { tau: prob.tau, offset: 0, len: prob.n() },
        ),
    ];
    if kind.has_z_block() {
        specs.push(BlockSpec::new(
            "z",
            selector(&seg, 1, -1.0)?,
            blocks::PenaltyBlock { pen: *pen, offset: prob.n(), len: prob.m() },
        ));
    }
    let w_seg = if kind.has_z_block() { 2 } else { 1 };
    let w_offset: usize = seg[..w_seg].iter().sum();
    if kind.projects() {
        let mut projector = PolyhedronProjector::new(
            prob.ineq.clone(),
            prob.ineq_rhs.clone(),
            prob.eq.clone(),
            prob.eq_rhs.clone(),
        )?;
        projector.warm_start(&init.w);
        specs.push(BlockSpec::new(
            "w",
            selector(&seg, w_seg, -1.0)?,
            blocks::ProjectionBlock {
                projector,
                offset: w_offset,
                tol: cfg.inner_tol,
                max_iters: cfg.inner_max_iters,
                unconverged: unconverged.clone(),
            },
        ));
    } else {
        specs.push(BlockSpec::new(
            "w",
            selector(&seg, w_seg, -1.0)?,
            blocks::NonnegBlock { offset: w_offset, len: prob.q() },
        ));
    }
    Ok((specs, inner))
}
