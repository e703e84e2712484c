//! Key-value run reports and per-iteration trace CSVs.
//!
//! A report is a header line followed by `key=value` lines in a fixed order.
//! Vectors are comma-separated; aggregated metrics read `mean (std)`. Keys
//! ending in `wall_time_s` are measurements and the only entries that differ
//! between identical runs.

use std::fmt::Display;
use std::io::Write;
use std::path::Path;
use std::time::Duration;

use lcgqr::bench::{MeanStd, Table2Row};
use lcgqr::SolveReport;
use nalgebra::DVector;

use crate::error::{CliError, Result};

pub const REPORT_HEADER: &str = "# lcgqr-report v1";
pub const TRACE_HEADER: &str = "# lcgqr-trace v1";
pub const TRACE_COLUMNS: [&str; 5] = ["iteration", "objective", "r_pri", "s", "eq_violation"];

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    entries: Vec<(String, String)>,
    timing: bool,
}

impl Report {
    /// `timing = false` leaves out every wall-time entry.
    pub fn new(command: &str, timing: bool) -> Self {
        let mut r = Self { entries: Vec::new(), timing };
        r.push("command", command);
        r
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl Display) {
        self.entries.push((key.into(), value.to_string()));
    }

    pub fn push_time(&mut self, key: impl Into<String>, d: Duration) {
        if self.timing {
            self.push(key, d.as_secs_f64());
        }
    }

    /// Solver outcome; `prefix` namespaces the keys (`admm4c.objective`).
    pub fn push_solve(&mut self, prefix: Option<&str>, r: &SolveReport) {
        let key = |k: &str| match prefix {
            Some(p) => format!("{p}.{k}"),
            None => k.to_string(),
        };
        self.push(key("solver"), &r.solver);
        self.push(key("converged"), r.converged);
        self.push(key("iterations"), r.iterations);
        self.push(key("objective"), r.final_objective());
        self.push(key("eq_violation"), r.final_eq_violation());
        self.push(key("r_pri"), r.final_r_pri());
        self.push(key("s"), r.final_s());
        self.push(key("eps_pri"), r.final_eps_pri);
        self.push(key("eps_dual"), r.final_eps_dual);
        self.push_time(key("wall_time_s"), r.wall_time);
        self.push(key("beta"), join(&r.beta_hat));
    }

    pub fn push_table2(&mut self, row: &Table2Row) {
        self.push("n", row.n);
        self.push("p", row.p);
        self.push("tau", row.tau);
        self.push("used", row.used);
        self.push("excluded", row.excluded);
        let ms = |m: &MeanStd| format!("{} ({})", m.mean, m.std);
        self.push("size", ms(&row.size));
        self.push("p1", ms(&row.p1));
        self.push("p2", ms(&row.p2));
        self.push("ae", ms(&row.ae));
        self.push("mad", ms(&row.mad));
        self.push("mape", ms(&row.mape));
        self.push("false_positives", ms(&row.false_positives));
        self.push("lambda", ms(&row.lambda));
        self.push_time("wall_time_s", row.wall_time);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn render(&self) -> String {
        let mut out = String::from(REPORT_HEADER);
        out.push('\n');
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    /// Read back a rendered report.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(REPORT_HEADER) {
            return Err(CliError::Input(format!("report does not start with `{REPORT_HEADER}`")));
        }
        let mut entries = Vec::new();
        let mut timing = false;
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.is_empty()) {
            let (k, v) =
                line.split_once('=').ok_or_else(|| CliError::Input(format!("report line {}: no `=`", i + 2)))?;
            timing |= k.ends_with("wall_time_s");
            entries.push((k.to_string(), v.to_string()));
        }
        Ok(Self { entries, timing })
    }
}

fn join(v: &DVector<f64>) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

/// Write the report to `out`, or to stdout when `None`.
pub fn emit_report(report: &Report, out: Option<&Path>) -> Result<()> {
    let text = report.render();
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => std::io::stdout().lock().write_all(text.as_bytes()).map_err(|e| CliError::io("<stdout>", e)),
    }
}

/// Per-iteration trace: header line, column names, one row per iteration.
pub fn write_trace(path: &Path, r: &SolveReport) -> Result<()> {
    let io = |e| CliError::io(path, e);
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(f, "{TRACE_HEADER}").map_err(io)?;
    writeln!(f, "{}", TRACE_COLUMNS.join(",")).map_err(io)?;
    let len = r.objective_trace.len().min(r.r_pri_trace.len()).min(r.s_trace.len()).min(r.eq_violation_trace.len());
    for k in 0..len {
        writeln!(
            f,
            "{},{},{},{},{}",
            k + 1,
            r.objective_trace[k],
            r.r_pri_trace[k],
            r.s_trace[k],
            r.eq_violation_trace[k]
        )
        .map_err(io)?;
    }
    f.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lcgqr::bench::aggregate_metrics;
    use lcgqr::simulate::MetricsReport;

    fn fake_report() -> SolveReport {
        SolveReport {
            solver: "ADMM4.Constr".into(),
            beta_hat: DVector::from_vec(vec![0.5, -1.25, 0.0]),
            objective_trace: vec![3.0, 2.0],
            r_pri_trace: vec![1.0, 0.1],
            s_trace: vec![0.5, 0.05],
            eq_violation_trace: vec![0.2, 0.0],
            iterations: 2,
            converged: true,
            wall_time: Duration::from_millis(5),
            final_eps_pri: 0.2,
            final_eps_dual: 0.1,
            factor_refresh_deviation: None,
        }
    }

    #[test]
    fn converged_run_report() {
        let mut r = Report::new("fit", true);
        r.push_solve(None, &fake_report());
        let text = r.render();
        assert!(text.starts_with(REPORT_HEADER));
        assert!(text.contains("\nconverged=true\n"));
        assert!(text.contains("\niterations=2\n"));
        assert!(text.contains("\nbeta=0.5,-1.25,0\n"));
        assert_eq!(Report::parse(&text).unwrap(), r);
    }

    #[test]
    fn timing_can_be_left_out() {
        let mut r = Report::new("fit", false);
        r.push_solve(Some("admm4c"), &fake_report());
        assert!(r.get("admm4c.objective").is_some());
        assert!(r.entries().iter().all(|(k, _)| !k.ends_with("wall_time_s")));
    }

    #[test]
    fn aggregation_of_three_fake_replications() {
        let m = |size, p1, p2, ae| MetricsReport { size, p1, p2, ae, mad: 0.5, mape: 1.0, false_positives: 0 };
        let reps = [(m(5, 1.0, 1.0, 0.25), 2.0), (m(4, 0.0, 1.0, 0.5), 4.0), (m(3, 1.0, 0.0, 0.75), 6.0)];
        let row = aggregate_metrics(100, 20, 0.5, &reps, 0, Duration::ZERO);
        let mut r = Report::new("simulate", false);
        r.push_table2(&row);
        // size 5,4,3: mean 4, sample std 1; p1 1,0,1: mean 2/3, std sqrt(1/3).
        assert_eq!(r.get("size"), Some("4 (1)"));
        let split = |k: &str| -> (f64, f64) {
            let (m, s) = r.get(k).unwrap().split_once(" (").unwrap();
            (m.parse().unwrap(), s.trim_end_matches(')').parse().unwrap())
        };
        for k in ["p1", "p2"] {
            let (mean, std) = split(k);
            assert!((mean - 2.0 / 3.0).abs() < 1e-15 && (std - (1.0f64 / 3.0).sqrt()).abs() < 1e-15, "{k}");
        }
        assert_eq!(r.get("ae"), Some("0.5 (0.25)"));
        assert_eq!(r.get("lambda"), Some("4 (2)"));
        assert_eq!(r.get("used"), Some("3"));
    }

    #[test]
    fn trace_schema() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_trace(&path, &fake_report()).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines, vec![TRACE_HEADER, "iteration,objective,r_pri,s,eq_violation", "1,3,1,0.5,0.2", "2,2,0.1,0.05,0"]);
    }
}
