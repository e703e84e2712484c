//! Consensus ADMM over row partitions of the data.
//!
//! Each shard keeps a local copy β_m tied to the global β by β_m = β. One
//! iteration is a local phase (β_m, r_m on every shard), a barrier, the global
//! phase (z, w, β from shard averages), a second barrier, and the local dual
//! updates. Shard results are always combined in shard-index order, so a run is
//! bit-reproducible for a fixed partition regardless of the thread count.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{pairwise_sum, SpdFactor};
use crate::problem::{check_objective, PenaltyFamily, PenaltySpec, Problem, SolverConfig};
use crate::prox::{project_nonneg, prox_check, soft_threshold};
use crate::report::SolveReport;

#[derive(Clone, Debug)]
pub struct Shard {
    pub y: DVector<f64>,
    pub x: DMatrix<f64>,
    /// Original row indices, in shard order.
    pub rows: Vec<usize>,
}

/// Row shards of one problem plus the shared penalty and constraint matrices.
#[derive(Clone, Debug)]
pub struct PartitionedDataset {
    pub shards: Vec<Shard>,
    pub penalty: DMatrix<f64>,
    pub ineq: DMatrix<f64>,
    pub ineq_rhs: DVector<f64>,
    pub eq: DMatrix<f64>,
    pub eq_rhs: DVector<f64>,
    pub tau: f64,
}

impl PartitionedDataset {
    pub fn parts(&self) -> usize {
        self.shards.len()
    }

    pub fn p(&self) -> usize {
        self.penalty.ncols()
    }

    pub fn n(&self) -> usize {
        self.shards.iter().map(|s| s.y.len()).sum()
    }

    pub fn shard_sizes(&self) -> Vec<usize> {
        self.shards.iter().map(|s| s.y.len()).collect()
    }

    /// The undivided problem, rows in shard order.
    pub fn pooled(&self) -> Result<Problem> {
        let n = self.n();
        let p = self.p();
        let mut y = DVector::zeros(n);
        let mut x = DMatrix::zeros(n, p);
        let mut offset = 0;
        for s in &self.shards {
            y.rows_mut(offset, s.y.len()).copy_from(&s.y);
            x.rows_mut(offset, s.y.len()).copy_from(&s.x);
            offset += s.y.len();
        }
        Problem::new(
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

/// Shuffle rows with `seed` and cut them into `parts` shards: the first
/// `parts − 1` get ⌊n/parts⌋ rows and the last takes the remainder.
pub fn partition(prob: &Problem, parts: usize, seed: u64) -> Result<PartitionedDataset> {
    let n = prob.n();
    if parts == 0 || parts > n {
        return Err(Error::TooManyPartitions { n, parts });
    }
    let mut order: Vec<usize> = (0..n).collect();
    if parts > 1 {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let base = n / parts;
    let shards = (0..parts)
        .map(|k| {
            let lo = k * base;
            let hi = if k + 1 == parts { n } else { lo + base };
            let rows = order[lo..hi].to_vec();
            let y = DVector::from_iterator(rows.len(), rows.iter().map(|&i| prob.y[i]));
            let x = prob.x.select_rows(rows.iter());
            Shard { y, x, rows }
        })
        .collect();
    Ok(PartitionedDataset {
        shards,
        penalty: prob.penalty.clone(),
        ineq: prob.ineq.clone(),
        ineq_rhs: prob.ineq_rhs.clone(),
        eq: prob.eq.clone(),
        eq_rhs: prob.eq_rhs.clone(),
        tau: prob.tau,
    })
}

/// Local variables of one shard.
#[derive(Clone, Debug, PartialEq)]
pub struct WorkerState {
    pub beta_m: DVector<f64>,
    pub r_m: DVector<f64>,
    pub u1: DVector<f64>,
    pub u2: DVector<f64>,
    pub u3: DVector<f64>,
    pub u4: DVector<f64>,
    pub u5: DVector<f64>,
}

/// Consensus variables, written only between barriers.
#[derive(Clone, Debug, PartialEq)]
pub struct GlobalState {
    pub z: DVector<f64>,
    pub w: DVector<f64>,
    pub beta: DVector<f64>,
}

/// Squared norms one shard contributes to the aggregated stopping rule.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WorkerResidual {
    /// ‖r_pri,m‖²
    pub r_pri_sq: f64,
    /// ‖s_m‖²
    pub s_sq: f64,
    /// ‖A₁,ₘ β_m‖²
    pub a1_beta_sq: f64,
    /// ‖r_m‖²
    pub r_block_sq: f64,
    /// ‖b_m‖²
    pub b_sq: f64,
    /// ‖γ A₁,ₘᵀ u_m‖²
    pub dual_sq: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualDims {
    pub n: usize,
    pub m: usize,
    pub q: usize,
    pub s: usize,
    pub p: usize,
    pub parts: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AggregateResiduals {
    pub r_pri: f64,
    pub s: f64,
    pub eps_pri: f64,
    pub eps_dual: f64,
}

impl AggregateResiduals {
    pub fn passed(&self) -> bool {
        self.r_pri <= self.eps_pri && self.s <= self.eps_dual
    }
}

/// Root-sum-of-squares aggregation over shards (in index order) and the
/// matching tolerances. `global` holds ‖z‖, ‖w‖, ‖β‖.
pub fn aggregate_residuals(
    workers: &[WorkerResidual],
    global: (f64, f64, f64),
    dims: ResidualDims,
    eps_abs: f64,
    eps_rel: f64,
) -> AggregateResiduals {
    let total = |f: fn(&WorkerResidual) -> f64| {
        let v: Vec<f64> = workers.iter().map(f).collect();
        pairwise_sum(&v).sqrt()
    };
    let r_pri = total(|w| w.r_pri_sq);
    let s = total(|w| w.s_sq);
    let sqrt_m = (dims.parts as f64).sqrt();
    let (z, w, beta) = global;
    let scale = [
        total(|w| w.a1_beta_sq),
        total(|w| w.r_block_sq),
        sqrt_m * z,
        sqrt_m * w,
        sqrt_m * beta,
        total(|w| w.b_sq),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let rows = dims.n + dims.parts * (dims.m + dims.q + dims.s + dims.p);
    let eps_pri = (rows as f64).sqrt() * eps_abs + eps_rel * scale;
    let eps_dual =
        ((dims.parts * dims.p) as f64).sqrt() * eps_abs + eps_rel * total(|w| w.dual_sq);
    AggregateResiduals { r_pri, s, eps_pri, eps_dual }
}

struct Worker<'d> {
    shard: &'d Shard,
    factor: SpdFactor,
    state: WorkerState,
    refresh_gap: Option<f64>,
}

/// Inputs shared read-only by every worker.
struct Shared<'d> {
    ds: &'d PartitionedDataset,
    gamma: f64,
}

impl Worker<'_> {
    /// β_m and r_m updates from the previous global state.
    fn local_primal(&mut self, sh: &Shared<'_>, g: &GlobalState, audit: bool) {
        let ds = sh.ds;
        let st = &mut self.state;
        let x = &self.shard.x;
        let mut rhs = x.tr_mul(&(&self.shard.y - &st.r_m - &st.u1));
        rhs += ds.penalty.tr_mul(&(&g.z - &st.u2));
        rhs += ds.ineq.tr_mul(&(&g.w + &ds.ineq_rhs - &st.u3));
        rhs += ds.eq.tr_mul(&(&ds.eq_rhs - &st.u4));
        rhs += &g.beta - &st.u5;
        st.beta_m = self.factor.solve(&rhs);
        if audit {
            if let Some(fresh) = self.factor.fresh_solve(&rhs) {
                let gap = (&st.beta_m - &fresh).norm() / fresh.norm().max(f64::MIN_POSITIVE);
                self.refresh_gap = Some(self.refresh_gap.map_or(gap, |g: f64| g.max(gap)));
            }
        }
        let anchor = &self.shard.y - x * &st.beta_m - &st.u1;
        st.r_m = prox_check(&anchor, ds.tau, sh.gamma);
    }

    /// Dual updates after the global phase, returning this shard's residual terms.
    fn local_dual(
        &mut self,
        sh: &Shared<'_>,
        g_new: &GlobalState,
        g_old: &GlobalState,
        r_old: &DVector<f64>,
    ) -> WorkerResidual {
        let ds = sh.ds;
        let gamma = sh.gamma;
        let st = &mut self.state;
        let x = &self.shard.x;
        let xb = x * &st.beta_m;
        let db = &ds.penalty * &st.beta_m;
        let cb = &ds.ineq * &st.beta_m;
        let eb = &ds.eq * &st.beta_m;

        let p1 = &xb + &st.r_m - &self.shard.y;
        let p2 = &db - &g_new.z;
        let p3 = &cb - &g_new.w - &ds.ineq_rhs;
        let p4 = &eb - &ds.eq_rhs;
        let p5 = &st.beta_m - &g_new.beta;
        st.u1 += &p1;
        st.u2 += &p2;
        st.u3 += &p3;
        st.u4 += &p4;
        st.u5 += &p5;

        let s = (x.tr_mul(&(&st.r_m - r_old))
            - ds.penalty.tr_mul(&(&g_new.z - &g_old.z))
            - ds.ineq.tr_mul(&(&g_new.w - &g_old.w))
            - (&g_new.beta - &g_old.beta))
            * gamma;
        let a1tu = (x.tr_mul(&st.u1)
            + ds.penalty.tr_mul(&st.u2)
            + ds.ineq.tr_mul(&st.u3)
            + ds.eq.tr_mul(&st.u4)
            + &st.u5)
            * gamma;
        WorkerResidual {
            r_pri_sq: p1.norm_squared()
                + p2.norm_squared()
                + p3.norm_squared()
                + p4.norm_squared()
                + p5.norm_squared(),
            s_sq: s.norm_squared(),
            a1_beta_sq: xb.norm_squared()
                + db.norm_squared()
                + cb.norm_squared()
                + eb.norm_squared()
                + st.beta_m.norm_squared(),
            r_block_sq: st.r_m.norm_squared(),
            b_sq: self.shard.y.norm_squared()
                + ds.ineq_rhs.norm_squared()
                + ds.eq_rhs.norm_squared(),
            dual_sq: a1tu.norm_squared(),
        }
    }
}

/// Componentwise mean of per-shard vectors, summed pairwise in shard order.
pub fn consensus_mean(parts: &[DVector<f64>], len: usize) -> DVector<f64> {
    let mut out = DVector::zeros(len);
    let mut column = vec![0.0; parts.len()];
    for j in 0..len {
        for (slot, v) in column.iter_mut().zip(parts) {
            *slot = v[j];
        }
        out[j] = pairwise_sum(&column) / parts.len() as f64;
    }
    out
}

/// `argmin_z λ‖z‖₁ + (γ/2) Σ_m ‖t_m − z‖²` for targets `t_m = Dβ_m + u₂,ₘ`.
pub fn global_z_update(targets: &[DVector<f64>], len: usize, lambda: f64, gamma: f64) -> DVector<f64> {
    let threshold = lambda / (gamma * targets.len() as f64);
    consensus_mean(targets, len).map(|v| soft_threshold(v, threshold))
}

/// `argmin_{w ≥ 0} Σ_m ‖t_m − w‖²` for targets `t_m = Cβ_m − d + u₃,ₘ`.
pub fn global_w_update(targets: &[DVector<f64>], len: usize) -> DVector<f64> {
    project_nonneg(&consensus_mean(targets, len))
}

fn shard_targets(workers: &[Worker<'_>], f: impl Fn(&Worker<'_>) -> DVector<f64>) -> Vec<DVector<f64>> {
    workers.iter().map(f).collect()
}

/// Outcome of [`solve_parallel_with`].
#[derive(Clone, Debug)]
pub struct ParallelRun {
    pub report: SolveReport,
    pub global: GlobalState,
    pub workers: Vec<WorkerState>,
    /// β trace, one entry per iteration, for determinism checks.
    pub beta_trace: Vec<DVector<f64>>,
}

/// Consensus ADMM with a Lasso penalty on Dβ.
pub fn solve_parallel(ds: &PartitionedDataset, pen: &PenaltySpec, cfg: &SolverConfig) -> Result<SolveReport> {
    Ok(solve_parallel_with(ds, pen, cfg, None, false)?.report)
}

/// As [`solve_parallel`], on a pool of `threads` workers (default: one per
/// shard). `keep_trace` records β after every iteration.
pub fn solve_parallel_with(
    ds: &PartitionedDataset,
    pen: &PenaltySpec,
    cfg: &SolverConfig,
    threads: Option<usize>,
    keep_trace: bool,
) -> Result<ParallelRun> {
    cfg.validate()?;
    if pen.family != PenaltyFamily::Lasso {
        return Err(Error::UnsupportedPenalty(format!(
            "consensus updates are available for Lasso only, got {}",
            pen.family.name()
        )));
    }
    if ds.shards.is_empty() || ds.shards.iter().any(|s| s.y.is_empty()) {
        return Err(Error::InvalidConfig("every shard must hold at least one row".into()));
    }
    let p = ds.p();
    if ds.shards.iter().any(|s| s.x.ncols() != p || s.x.nrows() != s.y.len()) {
        return Err(Error::DimensionMismatch("shard shapes disagree with the penalty matrix".into()));
    }
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(ds.parts()).max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let parts = ds.parts();
    let gamma = cfg.gamma;
    let shared = Shared { ds, gamma };
    let (m, q, s) = (ds.penalty.nrows(), ds.ineq.nrows(), ds.eq.nrows());
    let dims = ResidualDims { n: ds.n(), m, q, s, p, parts };

    let common = ds.penalty.tr_mul(&ds.penalty) + ds.ineq.tr_mul(&ds.ineq) + ds.eq.tr_mul(&ds.eq);
    let mut workers: Vec<Worker<'_>> = pool.install(|| {
        ds.shards
            .par_iter()
            .map(|shard| -> Result<Worker<'_>> {
                let mut normal = shard.x.tr_mul(&shard.x) + &common;
                for i in 0..p {
                    normal[(i, i)] += 1.0;
                }
                let factor = SpdFactor::new(normal)?;
                let beta0 = SpdFactor::new(shard.x.tr_mul(&shard.x) + DMatrix::identity(p, p) * 1e-8)
                    .map(|f| f.solve(&shard.x.tr_mul(&shard.y)))
                    .unwrap_or_else(|_| DVector::zeros(p));
                let r0 = &shard.y - &shard.x * &beta0;
                let state = WorkerState {
                    beta_m: beta0,
                    r_m: r0,
                    u1: DVector::zeros(shard.y.len()),
                    u2: DVector::zeros(m),
                    u3: DVector::zeros(q),
                    u4: DVector::zeros(s),
                    u5: DVector::zeros(p),
                };
                Ok(Worker { shard, factor, state, refresh_gap: None })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let beta0 = consensus_mean(&shard_targets(&workers, |w| w.state.beta_m.clone()), p);
    let mut global = GlobalState {
        z: &ds.penalty * &beta0,
        w: project_nonneg(&(&ds.ineq * &beta0 - &ds.ineq_rhs)),
        beta: beta0,
    };
    let pooled = ds.pooled()?;
    let mut report = SolveReport::empty("ADMM4.Constr (consensus)", p);
    let mut beta_trace = Vec::new();

    for k in 1..=cfg.max_iters {
        let audit = k % 100 == 0;
        let r_old: Vec<DVector<f64>> = workers.iter().map(|w| w.state.r_m.clone()).collect();
        pool.install(|| workers.par_iter_mut().for_each(|w| w.local_primal(&shared, &global, audit)));

        // Barrier: global phase from the new β_m and the old duals.
        let z_t = shard_targets(&workers, |w| &ds.penalty * &w.state.beta_m + &w.state.u2);
        let w_t = shard_targets(&workers, |w| &ds.ineq * &w.state.beta_m - &ds.ineq_rhs + &w.state.u3);
        let b_t = shard_targets(&workers, |w| &w.state.beta_m + &w.state.u5);
        let new_global = GlobalState {
            z: global_z_update(&z_t, m, pen.lambda, gamma),
            w: global_w_update(&w_t, q),
            beta: consensus_mean(&b_t, p),
        };

        let contribs: Vec<WorkerResidual> = pool.install(|| {
            workers
                .par_iter_mut()
                .zip(r_old.par_iter())
                .map(|(w, r_prev)| w.local_dual(&shared, &new_global, &global, r_prev))
                .collect()
        });
        global = new_global;
        let agg = aggregate_residuals(
            &contribs,
            (global.z.norm(), global.w.norm(), global.beta.norm()),
            dims,
            cfg.eps_abs,
            cfg.eps_rel,
        );

        report.objective_trace.push(check_objective(&pooled, pen, &global.beta).unwrap_or(f64::NAN));
        report.eq_violation_trace.push(pooled.eq_violation(&global.beta));
        report.r_pri_trace.push(agg.r_pri);
        report.s_trace.push(agg.s);
        report.final_eps_pri = agg.eps_pri;
        report.final_eps_dual = agg.eps_dual;
        report.iterations = k;
        if keep_trace {
            beta_trace.push(global.beta.clone());
        }
        if agg.passed() {
            report.converged = true;
            break;
        }
    }
    if !report.converged {
        log::warn!("consensus ADMM stopped at the iteration cap ({})", cfg.max_iters);
    }
    report.beta_hat = global.beta.clone();
    report.factor_refresh_deviation =
        workers.iter().filter_map(|w| w.refresh_gap).reduce(f64::max);
    report.wall_time = start.elapsed();
    Ok(ParallelRun {
        report,
        global,
        workers: workers.into_iter().map(|w| w.state).collect(),
        beta_trace,
    })
}
