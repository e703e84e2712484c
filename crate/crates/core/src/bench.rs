//! Seeded reproduction harness: HBIC-tuned simulation tables, matched-accuracy
//! solver timings, and the partition-count sweep for consensus ADMM.

use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::consensus::{partition, solve_parallel_with};
use crate::error::{Error, Result};
use crate::problem::{PenaltyFamily, SolverConfig};
use crate::simulate::{
    build_constraint_problem, evaluate, gen_scenario, gen_test_set, ConstraintVariant, MetricsReport, ScenarioSpec,
    NZ_TOL, TEST_SIZE,
};
use crate::solvers::{compare_solvers, SolverKind};
use crate::tuning::{default_grid, select_lambda};

/// Desk-scale design sizes.
pub const DESK_SIZES: [(usize, usize); 2] = [(500, 50), (1000, 50)];
/// Full-scale sizes, run only on request.
pub const FULL_SIZES: [(usize, usize); 2] = [(1000, 100), (2000, 100)];
pub const TAUS: [f64; 3] = [0.25, 0.5, 0.75];

/// SplitMix64 finalizer, used to derive per-replication seeds.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    let mut z = seed;
    for &p in parts {
        z = z.wrapping_add(p.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self { mean: f64::NAN, std: f64::NAN };
        }
        let k = values.len() as f64;
        let mean = values.iter().sum::<f64>() / k;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
        };
        Self { mean, std }
    }
}

impl std::fmt::Display for MeanStd {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.4} ({:.4})", self.mean, self.std)
    }
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let k = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / k, ry.iter().sum::<f64>() / k);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = avg;
        }
        i = j + 1;
    }
    out
}

#[derive(Clone, Debug)]
pub struct Table2Config {
    pub reps: usize,
    pub sizes: Vec<(usize, usize)>,
    pub taus: Vec<f64>,
    pub seed: u64,
    pub variant: ConstraintVariant,
    pub solver: SolverKind,
    pub solver_cfg: SolverConfig,
    pub warm_start: bool,
    /// Worker threads for replications; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for Table2Config {
    fn default() -> Self {
        Self {
            reps: 30,
            sizes: vec![(1000, 50)],
            taus: vec![0.25, 0.5],
            seed: 2024,
            variant: ConstraintVariant::default(),
            solver: SolverKind::Admm4Constr,
            solver_cfg: SolverConfig::default(),
            warm_start: true,
            threads: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Table2Row {
    pub n: usize,
    pub p: usize,
    pub tau: f64,
    /// Replications that produced metrics.
    pub used: usize,
    /// Replications dropped after a solver or tuning failure.
    pub excluded: usize,
    pub size: MeanStd,
    pub p1: MeanStd,
    pub p2: MeanStd,
    pub ae: MeanStd,
    pub mad: MeanStd,
    pub mape: MeanStd,
    pub false_positives: MeanStd,
    pub lambda: MeanStd,
    pub wall_time: Duration,
}

/// Mean (std) of every metric over the replications that produced one; each
/// entry pairs the metrics with the selected λ.
pub fn aggregate_metrics(
    n: usize,
    p: usize,
    tau: f64,
    ok: &[(MetricsReport, f64)],
    excluded: usize,
    wall_time: Duration,
) -> Table2Row {
    let col = |f: &dyn Fn(&MetricsReport) -> f64| MeanStd::of(&ok.iter().map(|(m, _)| f(m)).collect::<Vec<_>>());
    Table2Row {
        n,
        p,
        tau,
        used: ok.len(),
        excluded,
        size: col(&|m| m.size as f64),
        p1: col(&|m| m.p1),
        p2: col(&|m| m.p2),
        ae: col(&|m| m.ae),
        mad: col(&|m| m.mad),
        mape: col(&|m| m.mape),
        false_positives: col(&|m| m.false_positives as f64),
        lambda: MeanStd::of(&ok.iter().map(|(_, l)| *l).collect::<Vec<_>>()),
        wall_time,
    }
}

/// One HBIC-tuned fit on a fresh replication.
pub fn table2_replication(
    n: usize,
    p: usize,
    tau: f64,
    seed: u64,
    cfg: &Table2Config,
) -> Result<(MetricsReport, f64)> {
    let spec = ScenarioSpec::new(n, p, tau, seed);
    let sc = gen_scenario(&spec)?;
    let (x_test, y_test) = gen_test_set(&spec, TEST_SIZE)?;
    let (prob, _) = build_constraint_problem(sc.x, sc.y, tau, 1.0, cfg.variant)?;
    let grid = default_grid(&prob, PenaltyFamily::Lasso, 0.0, cfg.solver, &cfg.solver_cfg)?;
    let sel = select_lambda(&prob, PenaltyFamily::Lasso, 0.0, &grid, &cfg.solver_cfg, cfg.solver, cfg.warm_start)?;
    let metrics = evaluate(&sel.report.beta_hat, &sc.beta_true, &x_test, &y_test, NZ_TOL)?;
    Ok((metrics, sel.lambda))
}

pub fn run_table2(cfg: &Table2Config) -> Result<Vec<Table2Row>> {
    if cfg.reps == 0 {
        return Err(Error::InvalidConfig("reps must be >= 1".into()));
    }
    cfg.solver_cfg.validate()?;
    let pool = match cfg.threads {
        Some(t) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(t.max(1))
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?,
        ),
        None => None,
    };
    let mut rows = Vec::new();
    for (si, &(n, p)) in cfg.sizes.iter().enumerate() {
        for (ti, &tau) in cfg.taus.iter().enumerate() {
            let start = Instant::now();
            let job = || -> Vec<Result<(MetricsReport, f64)>> {
                (0..cfg.reps)
                    .into_par_iter()
                    .map(|r| {
                        let seed = derive_seed(cfg.seed, &[si as u64, ti as u64, r as u64]);
                        table2_replication(n, p, tau, seed, cfg)
                    })
                    .collect()
            };
            let results = match &pool {
                Some(pool) => pool.install(job),
                None => job(),
            };
            let mut ok = Vec::new();
            let mut excluded = 0;
            for (r, res) in results.into_iter().enumerate() {
                match res {
                    Ok(v) => ok.push(v),
                    Err(e) => {
                        log::warn!("({n},{p}) tau {tau} replication {r} excluded: {e}");
                        excluded += 1;
                    }
                }
            }
            rows.push(aggregate_metrics(n, p, tau, &ok, excluded, start.elapsed()));
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug)]
pub struct Table1Config {
    pub sizes: Vec<(usize, usize)>,
    pub taus: Vec<f64>,
    /// Instances averaged per cell.
    pub reps: usize,
    pub seed: u64,
    pub lambda: f64,
    pub variant: ConstraintVariant,
    pub solver_cfg: SolverConfig,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            sizes: DESK_SIZES.to_vec(),
            taus: TAUS.to_vec(),
            reps: 3,
            seed: 2024,
            lambda: 0.5,
            variant: ConstraintVariant::default(),
            solver_cfg: SolverConfig::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Table1Row {
    pub n: usize,
    pub p: usize,
    pub tau: f64,
    /// Mean wall time per solver, in [`SolverKind::ALL`] order.
    pub mean_time: [Duration; 4],
    pub mean_iterations: [f64; 4],
    /// Largest objective gap seen across the cell's instances.
    pub max_gap: f64,
}

impl Table1Row {
    pub fn time(&self, kind: SolverKind) -> Duration {
        self.mean_time[SolverKind::ALL.iter().position(|k| *k == kind).expect("known solver")]
    }

    /// ADMM4.Constr < {ADMM4.Proj, ADMM3.Constr} < ADMM3.Proj.
    pub fn ordering_holds(&self) -> bool {
        let t = |k| self.time(k);
        let first = t(SolverKind::Admm4Constr);
        let last = t(SolverKind::Admm3Proj);
        [SolverKind::Admm4Proj, SolverKind::Admm3Constr].iter().all(|&k| first < t(k) && t(k) < last)
    }
}

/// Mean wall time of each solver at matched objective accuracy. Cells run one
/// at a time; any cell whose solvers cannot be matched fails the whole table.
pub fn run_table1(cfg: &Table1Config) -> Result<Vec<Table1Row>> {
    if cfg.reps == 0 {
        return Err(Error::InvalidConfig("reps must be >= 1".into()));
    }
    let mut rows = Vec::new();
    for (si, &(n, p)) in cfg.sizes.iter().enumerate() {
        for (ti, &tau) in cfg.taus.iter().enumerate() {
            let mut total = [Duration::ZERO; 4];
            let mut iters = [0.0; 4];
            let mut max_gap: f64 = 0.0;
            for r in 0..cfg.reps {
                let seed = derive_seed(cfg.seed, &[si as u64, ti as u64, r as u64]);
                let sc = gen_scenario(&ScenarioSpec::new(n, p, tau, seed))?;
                let (prob, pen) = build_constraint_problem(sc.x, sc.y, tau, cfg.lambda, cfg.variant)?;
                let table = compare_solvers(&prob, &pen, &cfg.solver_cfg).require_matched()?;
                max_gap = max_gap.max(table.max_gap);
                for (k, kind) in SolverKind::ALL.iter().enumerate() {
                    let row = table.row(*kind);
                    total[k] += row.wall_time().unwrap_or_default();
                    iters[k] += row.iterations().unwrap_or_default() as f64;
                }
            }
            let reps = cfg.reps as u32;
            rows.push(Table1Row {
                n,
                p,
                tau,
                mean_time: total.map(|t| t / reps),
                mean_iterations: iters.map(|i| i / cfg.reps as f64),
                max_gap,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug)]
pub struct Fig4Config {
    pub n: usize,
    pub p: usize,
    pub ms: Vec<usize>,
    pub tau: f64,
    pub seed: u64,
    pub lambda: f64,
    pub variant: ConstraintVariant,
    pub solver_cfg: SolverConfig,
    pub threads: Option<usize>,
}

impl Default for Fig4Config {
    fn default() -> Self {
        Self {
            n: 20_000,
            p: 50,
            ms: vec![2, 5, 10, 20],
            tau: 0.75,
            seed: 7,
            lambda: 10.0,
            variant: ConstraintVariant::default(),
            solver_cfg: SolverConfig { max_iters: 20_000, ..SolverConfig::default().with_tolerance(1e-2) },
            threads: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Fig4Point {
    pub m: usize,
    pub ae: f64,
    pub wall_time: Duration,
    pub iterations: usize,
    pub converged: bool,
    pub objective: f64,
}

#[derive(Clone, Debug)]
pub struct Fig4Result {
    pub points: Vec<Fig4Point>,
    /// Spearman ρ of AE against M.
    pub ae_trend: Option<f64>,
    /// Spearman ρ of wall time against M.
    pub time_trend: Option<f64>,
}

/// Consensus fits of one dataset split into each `M` of `cfg.ms`.
pub fn run_fig4(cfg: &Fig4Config) -> Result<Fig4Result> {
    let max_m = cfg.ms.iter().copied().max().unwrap_or(0);
    if cfg.ms.is_empty() || cfg.n < max_m {
        return Err(Error::TooManyPartitions { n: cfg.n, parts: max_m });
    }
    let sc = gen_scenario(&ScenarioSpec::new(cfg.n, cfg.p, cfg.tau, cfg.seed))?;
    let (prob, pen) = build_constraint_problem(sc.x, sc.y, cfg.tau, cfg.lambda, cfg.variant)?;
    let mut points = Vec::with_capacity(cfg.ms.len());
    for &m in &cfg.ms {
        let ds = partition(&prob, m, derive_seed(cfg.seed, &[m as u64]))?;
        let run = solve_parallel_with(&ds, &pen, &cfg.solver_cfg, cfg.threads, false)?;
        let r = &run.report;
        points.push(Fig4Point {
            m,
            ae: (&r.beta_hat - &sc.beta_true).abs().sum(),
            wall_time: r.wall_time,
            iterations: r.iterations,
            converged: r.converged,
            objective: r.final_objective(),
        });
    }
    let ms: Vec<f64> = points.iter().map(|q| q.m as f64).collect();
    let ae: Vec<f64> = points.iter().map(|q| q.ae).collect();
    let time: Vec<f64> = points.iter().map(|q| q.wall_time.as_secs_f64()).collect();
    Ok(Fig4Result { ae_trend: spearman(&ms, &ae), time_trend: spearman(&ms, &time), points })
}
