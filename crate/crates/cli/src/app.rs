//! Argument definitions and command dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lcgqr::bench::{derive_seed, run_table2, Table2Config};
use lcgqr::consensus::{partition, solve_parallel_with};
use lcgqr::simulate::{gen_scenario, ConstraintVariant, ScenarioSpec};
use lcgqr::solvers::{compare_solvers, solve, SolverKind};
use lcgqr::tuning::{default_cn, default_df_tol, lambda_max, select_lambda, TuningGrid, GRID_RATIO, GRID_SIZE};
use lcgqr::{PenaltyFamily, PenaltySpec, Problem, SolveReport, SolverConfig};

use crate::constraints::{read_constraints, ConstraintSet};
use crate::data::{ingest_csv, write_csv, CsvOptions};
use crate::error::{exit, CliError, Result};
use crate::report::{emit_report, write_trace, Report};

#[derive(Debug, Parser)]
#[command(name = "lcgqr", version, about = "Constrained generalized-lasso quantile regression by multi-block ADMM")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Leave wall-clock times out of the report.
    #[arg(long, global = true)]
    pub no_timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit at a single lambda.
    Fit(FitArgs),
    /// Pick lambda by HBIC over a descending log-spaced grid.
    Tune(TuneArgs),
    /// Replicated simulation on the built-in constrained design.
    Simulate(SimulateArgs),
    /// Run all four solvers to matched objective accuracy.
    Compare(FitArgs),
    /// Consensus ADMM over row partitions of the data.
    ParallelFit(ParallelArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV with the response and predictors.
    #[arg(long)]
    pub data: PathBuf,
    /// The first CSV row holds column names.
    #[arg(long)]
    pub header: bool,
    /// 1-based column of the response.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub response_col: u64,
    /// Constraint and penalty-matrix spec; plain lasso without constraints if absent.
    #[arg(long)]
    pub constraints: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Penalty {
    Lasso,
    Scad,
    Mcp,
}

impl Penalty {
    pub fn family(self) -> PenaltyFamily {
        match self {
            Self::Lasso => PenaltyFamily::Lasso,
            Self::Scad => PenaltyFamily::Scad,
            Self::Mcp => PenaltyFamily::Mcp,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Admm4c,
    Admm4p,
    Admm3c,
    Admm3p,
}

impl Solver {
    pub fn kind(self) -> SolverKind {
        match self {
            Self::Admm4c => SolverKind::Admm4Constr,
            Self::Admm4p => SolverKind::Admm4Proj,
            Self::Admm3c => SolverKind::Admm3Constr,
            Self::Admm3p => SolverKind::Admm3Proj,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Variant {
    /// Equality row on beta_10; the true coefficients violate it.
    Verbatim,
    /// Equality row the true coefficients satisfy.
    Consistent,
}

impl Variant {
    fn constraint_variant(self) -> ConstraintVariant {
        match self {
            Self::Verbatim => ConstraintVariant::Verbatim,
            Self::Consistent => ConstraintVariant::Consistent,
        }
    }
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    #[arg(long, value_enum, default_value_t = Penalty::Lasso)]
    pub penalty: Penalty,
    /// Concavity parameter; defaults to 3.7 for SCAD and 3 for MCP.
    #[arg(long)]
    pub xi: Option<f64>,
}

impl ModelArgs {
    pub fn xi(&self) -> f64 {
        self.xi.unwrap_or(match self.penalty {
            Penalty::Lasso => 0.0,
            Penalty::Scad => 3.7,
            Penalty::Mcp => 3.0,
        })
    }

    fn spec(&self, lambda: f64) -> Result<PenaltySpec> {
        Ok(PenaltySpec::new(self.penalty.family(), lambda, self.xi())?)
    }

    fn describe(&self, rep: &mut Report) {
        rep.push("tau", self.tau);
        rep.push("penalty", self.penalty.family().name());
        if self.penalty != Penalty::Lasso {
            rep.push("xi", self.xi());
        }
    }
}

/// Overrides of the solver defaults.
#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// Augmented-Lagrangian parameter.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub eps_abs: Option<f64>,
    #[arg(long)]
    pub eps_rel: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
}

impl ConfigArgs {
    pub fn build(&self) -> Result<SolverConfig> {
        let d = SolverConfig::default();
        let cfg = SolverConfig {
            gamma: self.gamma.unwrap_or(d.gamma),
            eps_abs: self.eps_abs.unwrap_or(d.eps_abs),
            eps_rel: self.eps_rel.unwrap_or(d.eps_rel),
            max_iters: self.max_iters.unwrap_or(d.max_iters),
            ..d
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Report file; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-iteration trace CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = Solver::Admm4c)]
    pub solver: Solver,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, value_enum, default_value_t = Solver::Admm4c)]
    pub solver: Solver,
    #[arg(long, default_value_t = GRID_SIZE)]
    pub grid_size: usize,
    /// Smallest grid value as a fraction of lambda_max.
    #[arg(long, default_value_t = GRID_RATIO)]
    pub lambda_ratio: f64,
    /// HBIC constant C_n; log p if absent.
    #[arg(long)]
    pub cn: Option<f64>,
    /// Start every grid point from the least-squares state.
    #[arg(long)]
    pub cold_start: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub p: usize,
    #[arg(long, default_value_t = 0.5)]
    pub tau: f64,
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Variant::Verbatim)]
    pub variant: Variant,
    #[arg(long, value_enum, default_value_t = Solver::Admm4c)]
    pub solver: Solver,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Worker threads for replications.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    #[arg(long)]
    pub cold_start: bool,
    /// Directory for the training samples, one CSV per replication.
    #[arg(long)]
    pub data_out: Option<PathBuf>,
    /// Write the samples and stop without fitting.
    #[arg(long, requires = "data_out")]
    pub generate_only: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParallelArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long)]
    pub lambda: f64,
    /// Number of row partitions M.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub partitions: u64,
    /// Worker threads; one per partition if absent.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,
    /// Seed of the row shuffle before partitioning.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Run a parsed command and return the process exit code.
pub fn run(cli: &Cli) -> Result<u8> {
    let timing = !cli.no_timing;
    match &cli.command {
        Command::Fit(a) => fit(a, timing),
        Command::Tune(a) => tune(a, timing),
        Command::Simulate(a) => simulate(a, timing),
        Command::Compare(a) => compare(a, timing),
        Command::ParallelFit(a) => parallel_fit(a, timing),
    }
}

fn load_problem(data: &DataArgs, tau: f64) -> Result<Problem> {
    let opts = CsvOptions { header: data.header, response_col: data.response_col as usize };
    let ds = ingest_csv(&data.data, opts)?;
    let p = ds.x.ncols();
    let cons = match &data.constraints {
        Some(path) => read_constraints(path, p)?,
        None => ConstraintSet::lasso(p),
    };
    Ok(cons.into_problem(ds.y, ds.x, tau)?)
}

fn converged_code(r: &SolveReport) -> u8 {
    if r.converged {
        exit::OK
    } else {
        exit::NOT_CONVERGED
    }
}

fn finish(rep: &Report, output: &OutputArgs, r: &SolveReport) -> Result<u8> {
    if let Some(t) = &output.trace {
        write_trace(t, r)?;
    }
    emit_report(rep, output.out.as_deref())?;
    Ok(converged_code(r))
}

fn describe_problem(rep: &mut Report, prob: &Problem) {
    rep.push("n", prob.n());
    rep.push("p", prob.p());
    rep.push("penalty_rows", prob.m());
    rep.push("inequalities", prob.q());
    rep.push("equalities", prob.s());
}

fn fit(a: &FitArgs, timing: bool) -> Result<u8> {
    let prob = load_problem(&a.data, a.model.tau)?;
    let pen = a.model.spec(a.lambda)?;
    let r = solve(a.solver.kind(), &prob, &pen, &a.config.build()?)?;
    let mut rep = Report::new("fit", timing);
    describe_problem(&mut rep, &prob);
    a.model.describe(&mut rep);
    rep.push("lambda", a.lambda);
    rep.push_solve(None, &r);
    finish(&rep, &a.output, &r)
}

fn tune(a: &TuneArgs, timing: bool) -> Result<u8> {
    let prob = load_problem(&a.data, a.model.tau)?;
    let cfg = a.config.build()?;
    let (family, xi, kind) = (a.model.penalty.family(), a.model.xi(), a.solver.kind());
    a.model.spec(0.0)?;
    let lmax = lambda_max(&prob, family, xi, kind, &cfg, 1e-3)?;
    let cn = a.cn.unwrap_or_else(|| default_cn(&prob));
    let grid = TuningGrid::log_spaced(lmax, a.lambda_ratio, a.grid_size, cn, default_df_tol(&prob))?;
    let sel = select_lambda(&prob, family, xi, &grid, &cfg, kind, !a.cold_start)?;

    let mut rep = Report::new("tune", timing);
    describe_problem(&mut rep, &prob);
    a.model.describe(&mut rep);
    rep.push("lambda_max", lmax);
    rep.push("cn", grid.cn());
    rep.push("df_tol", grid.df_tol());
    rep.push("warm_start", !a.cold_start);
    rep.push("path_columns", "lambda,hbic,df,iterations,converged");
    for (i, g) in sel.path.iter().enumerate() {
        let hbic = g.hbic.map_or_else(|| "none".to_string(), |h| h.to_string());
        rep.push(format!("path.{}", i + 1), format!("{},{},{},{},{}", g.lambda, hbic, g.df, g.iterations, g.converged));
    }
    rep.push("lambda", sel.lambda);
    rep.push_solve(None, &sel.report);
    finish(&rep, &a.output, &sel.report)
}

/// Seed of replication `r` of a single-cell study, as the study itself derives it.
pub fn replication_seed(seed: u64, r: u64) -> u64 {
    derive_seed(seed, &[0, 0, r])
}

fn simulate(a: &SimulateArgs, timing: bool) -> Result<u8> {
    let mut rep = Report::new("simulate", timing);
    rep.push("seed", a.seed);
    rep.push("reps", a.reps);
    rep.push("variant", format!("{:?}", a.variant).to_lowercase());

    if let Some(dir) = &a.data_out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let mut names = vec!["y".to_string()];
        names.extend((1..=a.p).map(|j| format!("x{j}")));
        for r in 0..a.reps {
            let sc = gen_scenario(&ScenarioSpec::new(a.n, a.p, a.tau, replication_seed(a.seed, r)))?;
            write_csv(&dir.join(format!("rep_{r:03}.csv")), &sc.y, &sc.x, Some(&names))?;
        }
        rep.push("data_out", dir.display());
    }
    if a.generate_only {
        rep.push("n", a.n);
        rep.push("p", a.p);
        rep.push("tau", a.tau);
        emit_report(&rep, a.out.as_deref())?;
        return Ok(exit::OK);
    }

    let cfg = Table2Config {
        reps: a.reps as usize,
        sizes: vec![(a.n, a.p)],
        taus: vec![a.tau],
        seed: a.seed,
        variant: a.variant.constraint_variant(),
        solver: a.solver.kind(),
        solver_cfg: a.config.build()?,
        warm_start: !a.cold_start,
        threads: a.threads.map(|t| t as usize),
    };
    let rows = run_table2(&cfg)?;
    rep.push("solver", a.solver.kind().short_name());
    rep.push_table2(&rows[0]);
    emit_report(&rep, a.out.as_deref())?;
    Ok(if rows[0].used == 0 { exit::SOLVER } else { exit::OK })
}

fn compare(a: &FitArgs, timing: bool) -> Result<u8> {
    let prob = load_problem(&a.data, a.model.tau)?;
    let pen = a.model.spec(a.lambda)?;
    let table = compare_solvers(&prob, &pen, &a.config.build()?);
    let mut rep = Report::new("compare", timing);
    describe_problem(&mut rep, &prob);
    a.model.describe(&mut rep);
    rep.push("lambda", a.lambda);
    rep.push("matched", table.matched());
    rep.push("max_gap", table.max_gap);
    for row in &table.rows {
        let name = row.solver.short_name();
        match &row.outcome {
            Ok(r) => {
                rep.push(format!("{name}.tolerance"), row.tolerance);
                rep.push_solve(Some(name), r);
            }
            Err(e) => rep.push(format!("{name}.error"), e),
        }
    }
    emit_report(&rep, a.output.out.as_deref())?;
    Ok(if table.rows.iter().any(|r| r.outcome.is_ok()) { exit::OK } else { exit::SOLVER })
}

fn parallel_fit(a: &ParallelArgs, timing: bool) -> Result<u8> {
    let prob = load_problem(&a.data, a.model.tau)?;
    let pen = a.model.spec(a.lambda)?;
    let cfg = a.config.build()?;
    let ds = partition(&prob, a.partitions as usize, a.seed)?;
    let run = solve_parallel_with(&ds, &pen, &cfg, a.threads.map(|t| t as usize), false)?;
    let mut rep = Report::new("parallel-fit", timing);
    describe_problem(&mut rep, &prob);
    a.model.describe(&mut rep);
    rep.push("lambda", a.lambda);
    rep.push("partitions", ds.parts());
    rep.push("shard_sizes", ds.shard_sizes().iter().map(usize::to_string).collect::<Vec<_>>().join(","));
    rep.push("seed", a.seed);
    rep.push_solve(None, &run.report);
    finish(&rep, &a.output, &run.report)
}
