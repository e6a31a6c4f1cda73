//! `qet` command-line front end.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 numeric failure,
//! 1 I/O or protocol error. An audit verdict is data, never a failure.

use std::ffi::OsString;
use std::f64::consts::FRAC_PI_4;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::audit::{audit_ion, audit_minimal, scan_alpha, AlphaGrid, IonParams, PUBLISHED_F_MAX};
use crate::error::{QetError, Result};
use crate::export::{fmt_sig, round_sig};
use crate::linalg::{expectation, C64};
use crate::locc::{run_once, sweep_latency, traces_to_csv, wire_mode, Policy, ProtocolTrace, Role};
use crate::model::{
    build_hamiltonians, e_a_closed, e_b_closed, ground_state_closed_form, ground_state_numeric, hb_expected,
    ModelParams,
};
use crate::protocol::{evolve_branches, infused_energy, measure_alice, optimize_bob, OptimizerConfig, SearchMode};
use crate::tolerances::TOLERANCES;

#[derive(Debug, Parser)]
#[command(name = "qet", version, about = "Minimal quantum energy teleportation laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectrum, ground state and protocol energies, closed form vs numeric.
    Model {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Tabulate f(alpha) = E_B/k and locate its maximum.
    ScanAlpha {
        #[arg(long, default_value_t = 10_000)]
        points: usize,
        /// Exclusive lower end of the grid.
        #[arg(long, default_value_t = 0.01)]
        min_alpha: f64,
        #[arg(long, default_value_t = 20.0)]
        max_alpha: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// One protocol round at a given classical-channel latency.
    Run {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        latency: f64,
        #[arg(long, value_enum, default_value_t = PolicyArg::Optimize)]
        policy: PolicyArg,
        /// Play one side of the protocol over TCP.
        #[arg(long, value_enum, requires = "endpoint")]
        wire: Option<WireRole>,
        #[arg(long, group = "endpoint", conflicts_with = "connect")]
        listen: Option<String>,
        #[arg(long, group = "endpoint")]
        connect: Option<String>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// One protocol round per latency, Bob re-optimised at each.
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        /// `start:stop:step` (inclusive) or a comma-separated list.
        #[arg(long)]
        latencies: String,
        #[arg(long, value_enum, default_value_t = PolicyArg::Optimize)]
        policy: PolicyArg,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Energy-time audit of one protocol.
    Audit {
        #[command(subcommand)]
        protocol: AuditCommand,
    },
}

#[derive(Debug, Subcommand)]
pub enum AuditCommand {
    /// Optimal extraction of the two-qubit model against time `t`.
    Minimal {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        time: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Trapped-ion output at phonon-scale input against time `t`.
    Ion {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        zeta: f64,
        #[arg(long)]
        nu: f64,
        #[arg(long, default_value_t = FRAC_PI_4)]
        phi: f64,
        #[arg(long)]
        time: f64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Either `--h H --k K` or `--alpha A` (with `k` defaulting to 1).
#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long, requires = "k", conflicts_with = "alpha")]
    pub h: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

impl ParamArgs {
    pub fn resolve(&self) -> Result<ModelParams> {
        match (self.h, self.k, self.alpha) {
            (Some(h), Some(k), None) => ModelParams::new(h, k),
            (None, k, Some(alpha)) => ModelParams::from_alpha(alpha, k.unwrap_or(1.0)),
            _ => Err(QetError::invalid("supply either --h and --k, or --alpha")),
        }
    }
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Optimize,
    OptimizeFull,
    ClosedFormAngle,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Optimize => Policy::Optimize,
            PolicyArg::OptimizeFull => Policy::OptimizeFull,
            PolicyArg::ClosedFormAngle => Policy::ClosedFormAngle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum WireRole {
    Alice,
    Bob,
}

/// Parse, execute and map the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match execute(&cli, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Run a parsed command, writing its primary output to `out` unless the
/// command names an output file.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Model { params, output } => {
            let p = params.resolve()?;
            let report = model_report(&p)?;
            let text = match output.format.unwrap_or(Format::Table) {
                Format::Json => report.to_json(),
                Format::Table | Format::Csv => report.to_table(),
            };
            emit(out, output.output.as_ref(), &text)?;
            report.ensure_within_tolerance()
        }
        Command::ScanAlpha {
            points,
            min_alpha,
            max_alpha,
            output,
        } => {
            let grid = AlphaGrid {
                lower_exclusive: *min_alpha,
                upper: *max_alpha,
                points: *points,
            };
            emit(out, output.as_ref(), &scan_csv(&grid)?)
        }
        Command::Run {
            params,
            latency,
            policy,
            wire,
            listen,
            connect,
            output,
        } => {
            let p = params.resolve()?;
            let policy = Policy::from(*policy);
            let trace = match wire {
                None => run_once(&p, *latency, policy)?,
                Some(role) => {
                    let (role, endpoint) = match role {
                        WireRole::Alice => (Role::Alice, listen.as_deref()),
                        WireRole::Bob => (Role::Bob, connect.as_deref()),
                    };
                    let endpoint = endpoint.ok_or_else(|| {
                        QetError::invalid("--wire alice needs --listen, --wire bob needs --connect")
                    })?;
                    wire_mode(role, endpoint, &p, *latency, policy, Duration::from_secs(10))?
                }
            };
            let text = render_traces(&[trace], output.format.unwrap_or(Format::Csv), wire.is_some());
            emit(out, output.output.as_ref(), &text)
        }
        Command::Sweep {
            params,
            latencies,
            policy,
            output,
        } => {
            let p = params.resolve()?;
            let grid = parse_latencies(latencies)?;
            let traces = sweep_latency(&p, &grid, Policy::from(*policy))?;
            let text = render_traces(&traces, output.format.unwrap_or(Format::Csv), false);
            emit(out, output.output.as_ref(), &text)
        }
        Command::Audit { protocol } => match protocol {
            AuditCommand::Minimal { params, time, output } => {
                let p = params.resolve()?;
                let report = audit_minimal(&p, *time)?;
                emit(out, output.as_ref(), &format!("{}\n", report.to_json()))
            }
            AuditCommand::Ion {
                gamma,
                zeta,
                nu,
                phi,
                time,
                output,
            } => {
                let ip = IonParams::new(*gamma, *zeta, *nu, *phi)?;
                let report = audit_ion(&ip, *time)?;
                emit(out, output.as_ref(), &format!("{}\n", report.to_json()))
            }
        },
    }
}

fn emit(out: &mut dyn Write, path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(path) => std::fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// `start:stop:step` with the stop included, or `a,b,c`.
pub fn parse_latencies(text: &str) -> Result<Vec<f64>> {
    let bad = || QetError::invalid(format!("cannot parse latency grid {text:?}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
                return Err(bad());
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + step * i as f64).collect())
        }
        [list] => list.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}

/// `alpha,f_alpha` rows plus a trailing `#` summary row.
pub fn scan_csv(grid: &AlphaGrid) -> Result<String> {
    let scan = scan_alpha(grid)?;
    let mut s = String::from("alpha,f_alpha\n");
    for (a, f) in scan.grid.iter().zip(scan.values.iter()) {
        let _ = writeln!(s, "{},{}", fmt_sig(*a), fmt_sig(*f));
    }
    let _ = writeln!(
        s,
        "# argmax_alpha={},max_f_alpha={},published_max={},difference={},all_below_one={}",
        fmt_sig(scan.argmax_alpha),
        fmt_sig(scan.max_value),
        fmt_sig(PUBLISHED_F_MAX),
        fmt_sig(scan.deviation_from_published()),
        scan.all_below_one()
    );
    Ok(s)
}

fn render_traces(traces: &[ProtocolTrace], format: Format, with_digest: bool) -> String {
    match format {
        Format::Csv => {
            let mut s = traces_to_csv(traces);
            if with_digest {
                for t in traces {
                    let _ = writeln!(s, "# digest={}", t.digest());
                }
            }
            s
        }
        Format::Json => traces
            .iter()
            .map(|t| {
                let mut line = serde_json::to_string(t).expect("traces serialise");
                line.push('\n');
                line
            })
            .collect(),
        Format::Table => {
            let mut s = String::new();
            for t in traces {
                let _ = writeln!(
                    s,
                    "h={} k={} t_c={}  E_A={}  E_B={}  E_B*t_c={}  {}",
                    fmt_sig(t.params.h()),
                    fmt_sig(t.params.k()),
                    fmt_sig(t.latency),
                    fmt_sig(t.e_a),
                    fmt_sig(t.e_b_extracted),
                    fmt_sig(t.uncertainty_product),
                    t.verdict.as_str()
                );
                for e in &t.events {
                    let mu = e.mu.map(|m| format!(" mu={m}")).unwrap_or_default();
                    let _ = writeln!(s, "  t={} {:?} {:?}{}", fmt_sig(e.time), e.actor, e.action, mu);
                }
                if with_digest {
                    let _ = writeln!(s, "  digest={}", t.digest());
                }
            }
            s
        }
    }
}

/// One closed-form vs numeric comparison.
#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub name: String,
    pub closed_form: f64,
    pub numeric: f64,
    pub residual: f64,
    pub tolerance: f64,
}

impl CheckItem {
    fn new(name: &str, closed_form: f64, numeric: f64, tolerance: f64) -> Self {
        CheckItem {
            name: name.to_string(),
            closed_form,
            numeric,
            residual: (numeric - closed_form).abs(),
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

#[derive(Debug, Clone)]
pub struct ModelReport {
    pub params: ModelParams,
    pub checks: Vec<CheckItem>,
    pub closed_amplitudes: [f64; 4],
    /// Numeric ground vector with its global phase aligned to the closed form.
    pub numeric_amplitudes: [C64; 4],
    pub diffusion_period: f64,
}

/// Cross-check every closed-form quantity of the model against simulation.
pub fn model_report(p: &ModelParams) -> Result<ModelReport> {
    let tol = TOLERANCES;
    let hs = build_hamiltonians(p);
    let closed = ground_state_closed_form(p);
    let (numeric, spectrum) = ground_state_numeric(&hs)?;
    let mut checks = Vec::new();

    let expected = p.spectrum_closed_form();
    for (i, (c, n)) in expected.iter().zip(spectrum.eigenvalues.iter()).enumerate() {
        checks.push(CheckItem::new(&format!("eigenvalue[{i}]"), *c, *n, 1e-9));
    }
    let fidelity = closed.state.fidelity(&numeric.state);
    checks.push(CheckItem::new("ground fidelity", 1.0, fidelity, tol.structural));
    for (name, op) in [("<g|H_A|g>", &hs.h_a), ("<g|H_B|g>", &hs.h_b), ("<g|V|g>", &hs.v)] {
        checks.push(CheckItem::new(name, 0.0, expectation(&closed.state, op)?, tol.derived));
    }

    let branches = measure_alice(&closed)?;
    let e_a = e_a_closed(p);
    checks.push(CheckItem::new(
        "E_A",
        e_a,
        infused_energy(&branches, &hs)?,
        tol.derived * e_a.max(1.0),
    ));

    let peak_time = std::f64::consts::PI / (4.0 * p.k());
    let evolved = evolve_branches(&branches, &hs, peak_time)?;
    checks.push(CheckItem::new(
        "<H_B> at t = pi/(4k)",
        hb_expected(p, peak_time)?,
        crate::protocol::average_expectation(&evolved, &hs.h_b)?,
        tol.diffusion,
    ));

    let e_b = e_b_closed(p);
    let optimum = optimize_bob(&branches, &hs, &OptimizerConfig::default(), SearchMode::Family)?;
    checks.push(CheckItem::new(
        "E_B",
        e_b,
        optimum.extracted_energy,
        tol.optimizer_relative * e_b,
    ));

    let amps = closed.state.amplitudes();
    let overlap = closed.state.inner(&numeric.state);
    let phase = if overlap.norm() > 0.0 {
        (overlap / overlap.norm()).conj()
    } else {
        C64::new(1.0, 0.0)
    };
    let aligned = numeric.state.scale(phase);

    Ok(ModelReport {
        params: *p,
        checks,
        closed_amplitudes: [amps[0].re, amps[1].re, amps[2].re, amps[3].re],
        numeric_amplitudes: *aligned.amplitudes(),
        diffusion_period: p.diffusion_period(),
    })
}

impl ModelReport {
    pub fn ensure_within_tolerance(&self) -> Result<()> {
        let failed: Vec<&str> = self
            .checks
            .iter()
            .filter(|c| !c.passed())
            .map(|c| c.name.as_str())
            .collect();
        if failed.is_empty() {
            Ok(())
        } else {
            Err(QetError::numeric(format!("residual above tolerance: {}", failed.join(", "))))
        }
    }

    pub fn to_table(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "minimal QET model: h = {}, k = {}, alpha = h/k = {}",
            fmt_sig(p.h()),
            fmt_sig(p.k()),
            fmt_sig(p.alpha())
        );
        let _ = writeln!(s, "{}", crate::audit::HA_NORMALIZATION_NOTE);
        let _ = writeln!(s);
        let _ = writeln!(s, "ground state amplitudes |++>, |+->, |-+>, |-->");
        let closed: Vec<String> = self.closed_amplitudes.iter().map(|a| fmt_sig(*a)).collect();
        let _ = writeln!(s, "  closed form: {}", closed.join(", "));
        let numeric: Vec<String> = self
            .numeric_amplitudes
            .iter()
            .map(|a| fmt_sig(round_small(a.re)))
            .collect();
        let _ = writeln!(s, "  numeric:     {}", numeric.join(", "));
        let _ = writeln!(s);
        let _ = writeln!(
            s,
            "{:<24} {:>20} {:>20} {:>10} {:>8}",
            "quantity", "closed form", "numeric", "residual", "status"
        );
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<24} {:>20} {:>20} {:>10} {:>8}",
                c.name,
                fmt_sig(c.closed_form),
                fmt_sig(round_small(c.numeric)),
                residual_bucket(c.residual),
                if c.passed() { "ok" } else { "FAIL" }
            );
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "diffusion period pi/(2k) = {}", fmt_sig(self.diffusion_period));
        let _ = writeln!(s, "E_B/k = {}", fmt_sig(e_b_closed(p) / p.k()));
        s
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Check<'a> {
            name: &'a str,
            closed_form: f64,
            numeric: f64,
            residual: f64,
            tolerance: f64,
            passed: bool,
        }
        #[derive(Serialize)]
        struct Json<'a> {
            h: f64,
            k: f64,
            alpha: f64,
            ground_state: [f64; 4],
            diffusion_period: f64,
            e_b_over_k: f64,
            checks: Vec<Check<'a>>,
        }
        let p = &self.params;
        let json = Json {
            h: p.h(),
            k: p.k(),
            alpha: round_sig(p.alpha()),
            ground_state: self.closed_amplitudes.map(round_sig),
            diffusion_period: round_sig(self.diffusion_period),
            e_b_over_k: round_sig(e_b_closed(p) / p.k()),
            checks: self
                .checks
                .iter()
                .map(|c| Check {
                    name: &c.name,
                    closed_form: round_sig(c.closed_form),
                    numeric: round_sig(round_small(c.numeric)),
                    residual: residual_upper_bound(c.residual),
                    tolerance: c.tolerance,
                    passed: c.passed(),
                })
                .collect(),
        };
        let mut s = serde_json::to_string(&json).expect("model report serialises");
        s.push('\n');
        s
    }
}

// Rounding-level noise (|x| < 1e-13) prints as zero so fixtures do not
// depend on the last bits of the eigensolver.
fn round_small(x: f64) -> f64 {
    if x.abs() < 1e-13 {
        0.0
    } else {
        round_sig(x)
    }
}

/// Residuals are shown as the decade they fall under.
fn residual_upper_bound(r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let decade = r.log10().ceil() as i32;
    if decade <= -13 {
        1e-13
    } else {
        10f64.powi(decade)
    }
}

fn residual_bucket(r: f64) -> String {
    let b = residual_upper_bound(r);
    if b == 0.0 {
        "0".into()
    } else {
        format!("<={}", fmt_sig(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (Result<()>, String) {
        let cli = Cli::try_parse_from(std::iter::once("qet").chain(args.iter().copied())).unwrap();
        let mut buf = Vec::new();
        let r = execute(&cli, &mut buf);
        (r, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn latency_grids() {
        let g = parse_latencies("0:1:0.1").unwrap();
        assert_eq!(g.len(), 11);
        assert!((g[10] - 1.0).abs() < 1e-12);
        assert_eq!(parse_latencies("0,0.5,2").unwrap(), vec![0.0, 0.5, 2.0]);
        assert!(parse_latencies("0:1").is_err());
        assert!(parse_latencies("1:0:0.1").is_err());
        assert!(parse_latencies("0:1:0").is_err());
        assert!(parse_latencies("a,b").is_err());
    }

    #[test]
    fn param_resolution() {
        let a = ParamArgs {
            h: None,
            k: None,
            alpha: Some(2.0),
        };
        assert_eq!(a.resolve().unwrap(), ModelParams::new(2.0, 1.0).unwrap());
        let none = ParamArgs {
            h: None,
            k: None,
            alpha: None,
        };
        assert!(matches!(none.resolve(), Err(QetError::InvalidInput(_))));
    }

    #[test]
    fn model_command() {
        let (r, out) = run(&["model", "--h", "3", "--k", "4"]);
        r.unwrap();
        assert!(out.contains("E_A"));
        assert!(!out.contains("FAIL"));
        let (r, out) = run(&["model", "--alpha", "1", "--format", "json"]);
        r.unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!((v["e_b_over_k"].as_f64().unwrap() - 0.114748).abs() < 1e-6);
    }

    #[test]
    fn scan_rows() {
        let (r, out) = run(&["scan-alpha", "--points", "1000", "--max-alpha", "20"]);
        r.unwrap();
        let rows = out.lines().filter(|l| !l.starts_with('#') && *l != "alpha,f_alpha").count();
        assert_eq!(rows, 1000);
        assert!(out.lines().last().unwrap().starts_with("# argmax_alpha="));
    }

    #[test]
    fn run_and_sweep() {
        let (r, out) = run(&["run", "--h", "3", "--k", "4", "--latency", "0"]);
        r.unwrap();
        assert!(out.lines().nth(1).unwrap().contains(",0.344003745"));
        assert!(out.trim_end().ends_with("unobservable"));
        let (r, out) = run(&["sweep", "--alpha", "2", "--latencies", "0:1:0.1"]);
        r.unwrap();
        assert_eq!(out.lines().count(), 12);
    }

    #[test]
    fn audits() {
        let (r, out) = run(&["audit", "minimal", "--alpha", "2", "--time", "0.25"]);
        r.unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!((v["product"].as_f64().unwrap() - 0.0363).abs() < 1e-4);
        assert_eq!(v["verdict"], "unobservable");
        let (r, out) = run(&["audit", "minimal", "--alpha", "2", "--time", "100"]);
        r.unwrap();
        assert!(out.contains("\"verdict\":\"observable\""));
        let (r, out) = run(&["audit", "ion", "--gamma", "0.5", "--zeta", "2", "--nu", "1", "--time", "1"]);
        r.unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert!((v["product"].as_f64().unwrap() - 0.0677).abs() < 1e-4);
        let (r, _) = run(&["audit", "ion", "--gamma", "2", "--zeta", "2", "--nu", "1", "--time", "1"]);
        assert_eq!(r.unwrap_err().exit_code(), 2);
    }

    #[test]
    fn residual_buckets() {
        assert_eq!(residual_bucket(0.0), "0");
        assert_eq!(residual_bucket(3e-16), "<=1e-13");
        assert_eq!(residual_bucket(2e-9), "<=1e-8");
    }
}
