//! Direct N-block extension of ADMM.
//!
//! Solves `min Σ f_l(x_l)  s.t.  Σ A_l x_l = c` by a Gauss–Seidel sweep over the
//! blocks in the order given, followed by the scaled dual step
//! `u ← u + (Σ A_l x_l − c)`. Convergence is guaranteed when the blocks split
//! into two groups whose coefficient matrices are mutually orthogonal within
//! each group; [`verify_partition`] and [`find_valid_partition`] check that.
//!
//! Coefficient matrices are stored as a stack of row segments so that the
//! identity/zero blocks of the solver formulations cost nothing to apply.

use std::sync::Arc;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::problem::SolverConfig;
use crate::report::SolveReport;

/// Entries of `AᵢᵀAⱼ` at or below this magnitude count as zero.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub enum BlockPart {
    Zero,
    /// `scale · I` (segment rows must equal the block's column count).
    Identity(f64),
    Dense(Arc<DMatrix<f64>>),
}

/// A block coefficient matrix `A_l`, stored segment by segment.
#[derive(Clone, Debug)]
pub struct BlockMatrix {
    seg_rows: Vec<usize>,
    parts: Vec<BlockPart>,
    cols: usize,
}

impl BlockMatrix {
    pub fn new(seg_rows: &[usize], parts: Vec<BlockPart>, cols: usize) -> Result<Self> {
        if seg_rows.len() != parts.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} segments but {} parts",
                seg_rows.len(),
                parts.len()
            )));
        }
        for (k, (part, &rows)) in parts.iter().zip(seg_rows).enumerate() {
            match part {
                BlockPart::Zero => {}
                BlockPart::Identity(_) if rows != cols => {
                    return Err(Error::DimensionMismatch(format!(
                        "identity part in segment {k} has {rows} rows but block has {cols} columns"
                    )))
                }
                BlockPart::Identity(_) => {}
                BlockPart::Dense(m) if m.nrows() != rows || m.ncols() != cols => {
                    return Err(Error::DimensionMismatch(format!(
                        "dense part in segment {k} is {}x{}, expected {rows}x{cols}",
                        m.nrows(),
                        m.ncols()
                    )))
                }
                BlockPart::Dense(_) => {}
            }
        }
        Ok(Self { seg_rows: seg_rows.to_vec(), parts, cols })
    }

    /// A plain dense matrix (one segment).
    pub fn dense(m: DMatrix<f64>) -> Self {
        let rows = m.nrows();
        let cols = m.ncols();
        Self { seg_rows: vec![rows], parts: vec![BlockPart::Dense(Arc::new(m))], cols }
    }

    pub fn rows(&self) -> usize {
        self.seg_rows.iter().sum()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn segments(&self) -> &[usize] {
        &self.seg_rows
    }

    /// `A x`
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        debug_assert_eq!(x.len(), self.cols);
        let mut out = DVector::zeros(self.rows());
        let mut offset = 0;
        for (part, &rows) in self.parts.iter().zip(&self.seg_rows) {
            let mut seg = out.rows_mut(offset, rows);
            match part {
                BlockPart::Zero => {}
                BlockPart::Identity(s) => {
                    seg.copy_from(x);
                    seg *= *s;
                }
                BlockPart::Dense(m) => seg.gemv(1.0, m.as_ref(), x, 0.0),
            }
            offset += rows;
        }
        out
    }

    /// `Aᵀ v`
    pub fn apply_t(&self, v: &DVector<f64>) -> DVector<f64> {
        debug_assert_eq!(v.len(), self.rows());
        let mut out = DVector::zeros(self.cols);
        let mut offset = 0;
        for (part, &rows) in self.parts.iter().zip(&self.seg_rows) {
            let seg = v.rows(offset, rows);
            match part {
                BlockPart::Zero => {}
                BlockPart::Identity(s) => out.axpy(*s, &seg, 1.0),
                BlockPart::Dense(m) => out.gemv_tr(1.0, m.as_ref(), &seg, 1.0),
            }
            offset += rows;
        }
        out
    }

    /// `selfᵀ other`, or `None` when no segment pairs two nonzero parts.
    pub fn cross_gram(&self, other: &BlockMatrix) -> Option<DMatrix<f64>> {
        assert_eq!(self.seg_rows, other.seg_rows, "blocks must share the row partition");
        let mut acc: Option<DMatrix<f64>> = None;
        for (a, b) in self.parts.iter().zip(&other.parts) {
            let contrib = match (a, b) {
                (BlockPart::Zero, _) | (_, BlockPart::Zero) => continue,
                (BlockPart::Identity(s), BlockPart::Identity(t)) => {
                    DMatrix::identity(self.cols, other.cols) * (s * t)
                }
                (BlockPart::Identity(s), BlockPart::Dense(m)) => m.as_ref() * *s,
                (BlockPart::Dense(m), BlockPart::Identity(t)) => m.transpose() * *t,
                (BlockPart::Dense(m), BlockPart::Dense(n)) => m.tr_mul(n),
            };
            acc = Some(match acc {
                None => contrib,
                Some(sum) => sum + contrib,
            });
        }
        acc
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.rows(), self.cols);
        let mut offset = 0;
        for (part, &rows) in self.parts.iter().zip(&self.seg_rows) {
            let mut seg = out.rows_mut(offset, rows);
            match part {
                BlockPart::Zero => {}
                BlockPart::Identity(s) => seg.fill_diagonal(*s),
                BlockPart::Dense(m) => seg.copy_from(m.as_ref()),
            }
            offset += rows;
        }
        out
    }
}

/// Subproblem solver of one block: returns `argmin_x f(x) + (γ/2)‖A x − v‖²`
/// for the anchor `v = c − Σ_{j≠l} A_j x_j − u`.
pub trait BlockProx {
    fn prox(&mut self, anchor: &DVector<f64>, gamma: f64) -> Result<DVector<f64>>;

    /// `f(x)`, when the block can report it.
    fn value(&self, _x: &DVector<f64>) -> Option<f64> {
        None
    }

    /// Whether [`prox_normal`](Self::prox_normal) is available, i.e. the
    /// subproblem depends on the anchor only through `Aᵀv`.
    fn takes_normal_rhs(&self) -> bool {
        false
    }

    /// The same minimizer as [`prox`](Self::prox), given `Aᵀv` instead of `v`.
    fn prox_normal(&mut self, _atv: &DVector<f64>, _gamma: f64) -> Result<DVector<f64>> {
        Err(Error::InvalidConfig("block does not accept a normal-equation right-hand side".into()))
    }
}

/// Adapts a closure into a [`BlockProx`].
pub struct FnProx<F>(pub F);

impl<F> BlockProx for FnProx<F>
where
    F: FnMut(&DVector<f64>, f64) -> DVector<f64>,
{
    fn prox(&mut self, anchor: &DVector<f64>, gamma: f64) -> Result<DVector<f64>> {
        Ok((self.0)(anchor, gamma))
    }
}

pub struct BlockSpec<'a> {
    pub a: BlockMatrix,
    pub prox: Box<dyn BlockProx + 'a>,
    pub label: String,
}

impl<'a> BlockSpec<'a> {
    pub fn new(label: &str, a: BlockMatrix, prox: impl BlockProx + 'a) -> Self {
        Self { a, prox: Box::new(prox), label: label.to_string() }
    }
}

pub struct MultiBlockProblem<'a> {
    pub blocks: Vec<BlockSpec<'a>>,
    pub c: DVector<f64>,
    pub gamma: f64,
}

impl<'a> MultiBlockProblem<'a> {
    pub fn new(blocks: Vec<BlockSpec<'a>>, c: DVector<f64>, gamma: f64) -> Result<Self> {
        if blocks.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 blocks, got {}",
                blocks.len()
            )));
        }
        if !(gamma > 0.0) {
            return Err(Error::InvalidConfig(format!("gamma must be positive, got {gamma}")));
        }
        let segs = blocks[0].a.segments().to_vec();
        for b in &blocks {
            if b.a.segments() != segs.as_slice() {
                return Err(Error::DimensionMismatch(format!(
                    "block `{}` row partition {:?} differs from {:?}",
                    b.label,
                    b.a.segments(),
                    segs
                )));
            }
        }
        if c.len() != blocks[0].a.rows() {
            return Err(Error::DimensionMismatch(format!(
                "c.len = {} but blocks have {} rows",
                c.len(),
                blocks[0].a.rows()
            )));
        }
        Ok(Self { blocks, c, gamma })
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn coefficient_matrices(&self) -> Vec<BlockMatrix> {
        self.blocks.iter().map(|b| b.a.clone()).collect()
    }

    pub fn zero_state(&self) -> AdmmIterate {
        AdmmIterate {
            x: self.blocks.iter().map(|b| DVector::zeros(b.a.cols())).collect(),
            u: DVector::zeros(self.c.len()),
        }
    }
}

/// Live variables of one iteration: block values and the stacked scaled dual.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmmIterate {
    pub x: Vec<DVector<f64>>,
    pub u: DVector<f64>,
}

#[derive(Clone, Debug)]
pub struct ResidualReport {
    /// `Σ A_l x_l − c`
    pub r_pri: DVector<f64>,
    /// `s_k = γ A_iᵀ Σ_{j>i} A_j (x_j⁺ − x_j)` with `i = N − k` (1-based), so
    /// `s_1` belongs to block N−1 and `s_{N−1}` to block 1.
    pub s_list: Vec<DVector<f64>>,
    pub eps_pri: f64,
    pub eps_dual_list: Vec<f64>,
}

impl ResidualReport {
    pub fn r_norm(&self) -> f64 {
        self.r_pri.norm()
    }

    pub fn s_norms(&self) -> Vec<f64> {
        self.s_list.iter().map(|s| s.norm()).collect()
    }

    /// Root-sum-of-squares of all dual residuals.
    pub fn s_combined(&self) -> f64 {
        self.s_list.iter().map(|s| s.norm_squared()).sum::<f64>().sqrt()
    }

    pub fn eps_dual_combined(&self) -> f64 {
        self.eps_dual_list.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn converged(&self) -> bool {
        self.r_norm() <= self.eps_pri
            && self
                .s_list
                .iter()
                .zip(&self.eps_dual_list)
                .all(|(s, &eps)| s.norm() <= eps)
    }
}

/// True iff blocks `1..=split` are mutually orthogonal and so are `split+1..=N`.
pub fn verify_partition(blocks: &[BlockMatrix], split: usize) -> bool {
    let n = blocks.len();
    if split < 1 || split >= n {
        return false;
    }
    let groups = [(0, split), (split, n)];
    groups.iter().all(|&(lo, hi)| {
        (lo..hi).all(|i| ((i + 1)..hi).all(|j| orthogonal(&blocks[i], &blocks[j])))
    })
}

/// Smallest split `M ∈ 1..N` passing [`verify_partition`].
pub fn find_valid_partition(blocks: &[BlockMatrix]) -> Option<usize> {
    let n = blocks.len();
    let mut cache: Vec<Vec<Option<bool>>> = vec![vec![None; n]; n];
    let mut orth = |i: usize, j: usize| -> bool {
        let (i, j) = (i.min(j), i.max(j));
        *cache[i][j].get_or_insert_with(|| orthogonal(&blocks[i], &blocks[j]))
    };
    (1..n).find(|&split| {
        [(0, split), (split, n)]
            .iter()
            .all(|&(lo, hi)| (lo..hi).all(|i| ((i + 1)..hi).all(|j| orth(i, j))))
    })
}

fn orthogonal(a: &BlockMatrix, b: &BlockMatrix) -> bool {
    match a.cross_gram(b) {
        None => true,
        Some(g) => g.iter().all(|v| v.abs() <= ORTHOGONALITY_TOL),
    }
}

/// Primal/dual residuals and their tolerances for two consecutive iterates.
pub fn residuals(
    mp: &MultiBlockProblem<'_>,
    state: &AdmmIterate,
    prev: &AdmmIterate,
    eps_abs: f64,
    eps_rel: f64,
) -> ResidualReport {
    let ax: Vec<_> = mp.blocks.iter().zip(&state.x).map(|(b, x)| b.a.apply(x)).collect();
    let ax_prev: Vec<_> = mp.blocks.iter().zip(&prev.x).map(|(b, x)| b.a.apply(x)).collect();
    residuals_from_products(mp, &ax, &ax_prev, &state.u, eps_abs, eps_rel)
}

/// [`residuals`] restricted to the four-block case.
pub fn residuals_4block(
    state: &AdmmIterate,
    prev: &AdmmIterate,
    mp: &MultiBlockProblem<'_>,
    cfg: &SolverConfig,
) -> Result<ResidualReport> {
    if mp.n_blocks() != 4 || state.x.len() != 4 || prev.x.len() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "expected 4 blocks, got {}",
            mp.n_blocks()
        )));
    }
    Ok(residuals(mp, state, prev, cfg.eps_abs, cfg.eps_rel))
}

fn residuals_from_products(
    mp: &MultiBlockProblem<'_>,
    ax: &[DVector<f64>],
    ax_prev: &[DVector<f64>],
    u: &DVector<f64>,
    eps_abs: f64,
    eps_rel: f64,
) -> ResidualReport {
    residual_terms(mp, ax, ax_prev, u, eps_abs, eps_rel).0
}

/// The residual report plus `A₁ᵀ Σ_{j>1} A_j Δx_j` and `A₁ᵀ u` for the first
/// block, which the engine reuses in the next sweep.
fn residual_terms(
    mp: &MultiBlockProblem<'_>,
    ax: &[DVector<f64>],
    ax_prev: &[DVector<f64>],
    u: &DVector<f64>,
    eps_abs: f64,
    eps_rel: f64,
) -> (ResidualReport, Option<(DVector<f64>, DVector<f64>)>) {
    let n = mp.n_blocks();
    let gamma = mp.gamma;
    let h = mp.c.len();

    let mut r_pri = ax[0].clone();
    for a in &ax[1..] {
        r_pri += a;
    }
    r_pri -= &mp.c;

    let scale = ax.iter().map(|a| a.norm()).fold(mp.c.norm(), f64::max);
    let eps_pri = (h as f64).sqrt() * eps_abs + eps_rel * scale;

    // Suffix sums of A_j Δx_j, walking from the last block backwards.
    let mut s_list = Vec::with_capacity(n.saturating_sub(1));
    let mut eps_dual_list = Vec::with_capacity(n.saturating_sub(1));
    let mut tail = DVector::zeros(h);
    let mut first = None;
    for i in (0..n.saturating_sub(1)).rev() {
        tail += &ax[i + 1];
        tail -= &ax_prev[i + 1];
        let block = &mp.blocks[i].a;
        let (at_tail, at_u) = (block.apply_t(&tail), block.apply_t(u));
        s_list.push(&at_tail * gamma);
        let a_i = block.cols() as f64;
        eps_dual_list.push(a_i.sqrt() * eps_abs + gamma * eps_rel * at_u.norm());
        if i == 0 {
            first = Some((at_tail, at_u));
        }
    }
    (ResidualReport { r_pri, s_list, eps_pri, eps_dual_list }, first)
}

/// Monitored quantities recorded for every iteration.
#[derive(Clone, Copy, Debug, Default)]
pub struct TracePoint {
    pub objective: f64,
    pub eq_violation: f64,
}

/// Step-wise driver for the extended scheme.
pub struct ExtendedAdmm<'p, 'a> {
    mp: &'p mut MultiBlockProblem<'a>,
    state: AdmmIterate,
    ax: Vec<DVector<f64>>,
    normal: Option<NormalCache>,
    iterations: usize,
}

/// Sweeps between exact recomputations of [`NormalCache::at_rest`].
const NORMAL_REFRESH_EVERY: usize = 50;

/// `A₁ᵀ` applied to the pieces of the first block's anchor
/// `c − Σ_{j>1} A_j x_j − u`, kept current from the residual computation so
/// the first block needs no product with `A₁ᵀ` of its own.
struct NormalCache {
    at_c: DVector<f64>,
    at_rest: DVector<f64>,
    at_u: DVector<f64>,
    sweeps: usize,
}

fn rest_product(mp: &MultiBlockProblem<'_>, ax: &[DVector<f64>]) -> DVector<f64> {
    let mut rest = DVector::zeros(mp.c.len());
    for a in &ax[1..] {
        rest += a;
    }
    mp.blocks[0].a.apply_t(&rest)
}

impl<'p, 'a> ExtendedAdmm<'p, 'a> {
    pub fn new(mp: &'p mut MultiBlockProblem<'a>, init: Option<AdmmIterate>) -> Result<Self> {
        let state = init.unwrap_or_else(|| mp.zero_state());
        if state.x.len() != mp.n_blocks() || state.u.len() != mp.c.len() {
            return Err(Error::DimensionMismatch("initial iterate does not match blocks".into()));
        }
        for (b, x) in mp.blocks.iter().zip(&state.x) {
            if x.len() != b.a.cols() {
                return Err(Error::DimensionMismatch(format!(
                    "initial block `{}` has length {}, expected {}",
                    b.label,
                    x.len(),
                    b.a.cols()
                )));
            }
        }
        let ax: Vec<_> = mp.blocks.iter().zip(&state.x).map(|(b, x)| b.a.apply(x)).collect();
        let normal = (mp.n_blocks() >= 2 && mp.blocks[0].prox.takes_normal_rhs()).then(|| NormalCache {
            at_c: mp.blocks[0].a.apply_t(&mp.c),
            at_rest: rest_product(mp, &ax),
            at_u: mp.blocks[0].a.apply_t(&state.u),
            sweeps: 0,
        });
        Ok(Self { mp, state, ax, normal, iterations: 0 })
    }

    pub fn state(&self) -> &AdmmIterate {
        &self.state
    }

    pub fn into_state(self) -> AdmmIterate {
        self.state
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn problem(&self) -> &MultiBlockProblem<'a> {
        self.mp
    }

    /// `A_l x_l` for every block at the current iterate.
    pub fn products(&self) -> &[DVector<f64>] {
        &self.ax
    }

    /// One Gauss–Seidel sweep plus dual update.
    pub fn step(&mut self, eps_abs: f64, eps_rel: f64) -> Result<ResidualReport> {
        let n = self.mp.n_blocks();
        let gamma = self.mp.gamma;
        let ax_prev = self.ax.clone();
        for l in 0..n {
            let block = &mut self.mp.blocks[l];
            let x = match (&self.normal, l) {
                (Some(cache), 0) => block.prox.prox_normal(&(&cache.at_c - &cache.at_rest - &cache.at_u), gamma)?,
                _ => {
                    let mut anchor = self.mp.c.clone();
                    for (j, a) in self.ax.iter().enumerate() {
                        if j != l {
                            anchor -= a;
                        }
                    }
                    anchor -= &self.state.u;
                    block.prox.prox(&anchor, gamma)?
                }
            };
            if x.len() != block.a.cols() {
                return Err(Error::DimensionMismatch(format!(
                    "block `{}` prox returned length {}, expected {}",
                    block.label,
                    x.len(),
                    block.a.cols()
                )));
            }
            self.ax[l] = block.a.apply(&x);
            self.state.x[l] = x;
        }
        let report = {
            let mut r = self.ax[0].clone();
            for a in &self.ax[1..] {
                r += a;
            }
            r -= &self.mp.c;
            self.state.u += &r;
            let (report, first) = residual_terms(self.mp, &self.ax, &ax_prev, &self.state.u, eps_abs, eps_rel);
            if let (Some(cache), Some((at_tail, at_u))) = (self.normal.as_mut(), first) {
                cache.at_u = at_u;
                cache.sweeps += 1;
                if cache.sweeps % NORMAL_REFRESH_EVERY == 0 {
                    cache.at_rest = rest_product(self.mp, &self.ax);
                } else {
                    cache.at_rest += at_tail;
                }
            }
            report
        };
        self.iterations += 1;
        Ok(report)
    }
}

/// Result of [`run_extended_admm_with`]: the report plus the final iterate, which
/// can warm-start a later solve.
pub struct EngineRun {
    pub report: SolveReport,
    pub state: AdmmIterate,
    pub last: Option<ResidualReport>,
}

/// Run the extended scheme to convergence from zero, recording Σ f_l(x_l) (over
/// blocks that report a value) as the objective trace.
pub fn run_extended_admm(mp: &mut MultiBlockProblem<'_>, cfg: &SolverConfig) -> Result<SolveReport> {
    let mut monitor = |mp: &MultiBlockProblem<'_>, st: &AdmmIterate, _: &[DVector<f64>]| TracePoint {
        objective: mp
            .blocks
            .iter()
            .zip(&st.x)
            .filter_map(|(b, x)| b.prox.value(x))
            .sum(),
        eq_violation: 0.0,
    };
    Ok(run_extended_admm_with(mp, cfg, None, "extended-admm", &mut monitor)?.report)
}

/// Run the extended scheme with a caller-supplied start and monitor.
///
/// Refuses to run when no valid block partition exists unless
/// `cfg.allow_unverified_partition` is set. Besides the residual test, a run
/// stops only once the monitored equality violation is within `ε_pri`. A run
/// that hits `max_iters` returns a report with `converged = false` rather than
/// an error.
pub fn run_extended_admm_with(
    mp: &mut MultiBlockProblem<'_>,
    cfg: &SolverConfig,
    init: Option<AdmmIterate>,
    label: &str,
    monitor: &mut dyn FnMut(&MultiBlockProblem<'_>, &AdmmIterate, &[DVector<f64>]) -> TracePoint,
) -> Result<EngineRun> {
    cfg.validate()?;
    let start = Instant::now();
    if find_valid_partition(&mp.coefficient_matrices()).is_none() {
        if cfg.allow_unverified_partition {
            log::warn!("{label}: no orthogonal block partition; convergence is not guaranteed");
        } else {
            return Err(Error::InvalidPartition);
        }
    }
    let p = mp.blocks[0].a.cols();
    let mut report = SolveReport::empty(label, p);
    let mut engine = ExtendedAdmm::new(mp, init)?;
    let mut last = None;
    for _ in 0..cfg.max_iters {
        let res = engine.step(cfg.eps_abs, cfg.eps_rel)?;
        let tp = monitor(engine.problem(), engine.state(), engine.products());
        report.objective_trace.push(tp.objective);
        report.eq_violation_trace.push(tp.eq_violation);
        report.r_pri_trace.push(res.r_norm());
        report.s_trace.push(res.s_combined());
        report.final_eps_pri = res.eps_pri;
        report.final_eps_dual = res.eps_dual_combined();
        let done = res.converged() && tp.eq_violation <= res.eps_pri;
        last = Some(res);
        if done {
            report.converged = true;
            break;
        }
    }
    report.iterations = engine.iterations();
    let state = engine.into_state();
    report.beta_hat = state.x[0].clone();
    report.wall_time = start.elapsed();
    Ok(EngineRun { report, state, last })
}

/// Per-iteration record of the classic two-block scheme.
#[derive(Clone, Debug)]
pub struct ClassicIterate {
    pub x1: DVector<f64>,
    pub x2: DVector<f64>,
    pub u: DVector<f64>,
}

/// Classic two-block ADMM for `min f(x₁) + g(x₂)  s.t.  A x₁ + B x₂ = c`.
///
/// `prox_f(v, γ)` must return `argmin f(x) + (γ/2)‖A x − v‖²`, likewise `prox_g`
/// with `B`. Stops when `‖A x₁ + B x₂ − c‖ ≤ ε_pri` and
/// `‖γ AᵀB (x₂⁺ − x₂)‖ ≤ ε_dual`. Returns every iterate.
#[allow(clippy::too_many_arguments)]
pub fn run_classic_admm(
    mut prox_f: impl FnMut(&DVector<f64>, f64) -> DVector<f64>,
    mut prox_g: impl FnMut(&DVector<f64>, f64) -> DVector<f64>,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DVector<f64>,
    x2_init: DVector<f64>,
    gamma: f64,
    cfg: &SolverConfig,
) -> (Vec<ClassicIterate>, bool) {
    let mut x2 = x2_init;
    let mut u = DVector::zeros(c.len());
    let mut trace = Vec::new();
    let atb = a.tr_mul(b);
    for _ in 0..cfg.max_iters {
        let x1 = prox_f(&(c - b * &x2 - &u), gamma);
        let x2_new = prox_g(&(c - a * &x1 - &u), gamma);
        let ax1 = a * &x1;
        let bx2 = b * &x2_new;
        let r = &ax1 + &bx2 - c;
        u += &r;
        let s = &atb * (&x2_new - &x2) * gamma;
        let eps_pri = (c.len() as f64).sqrt() * cfg.eps_abs
            + cfg.eps_rel * ax1.norm().max(bx2.norm()).max(c.norm());
        let eps_dual =
            (a.ncols() as f64).sqrt() * cfg.eps_abs + gamma * cfg.eps_rel * a.tr_mul(&u).norm();
        x2 = x2_new;
        trace.push(ClassicIterate { x1, x2: x2.clone(), u: u.clone() });
        if r.norm() <= eps_pri && s.norm() <= eps_dual {
            return (trace, true);
        }
    }
    (trace, false)
}
