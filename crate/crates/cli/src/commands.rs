//! Subcommands, their validation and dispatch.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use iqht_core::cylinder::{
    green_max_relative_error, green_numeric, tree_conductance_analytic, tree_conductance_numeric, ConvergenceReport,
    CylinderGrid,
};
use iqht_core::flow::{classify_stability, closed_form, integrate, CouplingState, FlowTrajectory, IntegratorConfig};
use iqht_core::observables::{
    g_star, g_star_series, kt_energetics, sigma_xx_star, ConductanceQuery, SeriesForm, DEFAULT_TOL,
};
use iqht_core::ope::{
    angular_average, beta_system, connected_part, delta_q, ope, Expansion, Operator, ParamMatrix, Point,
};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::acceptance::{self, reference_flows};
use crate::format::{cell, num, report, to_json, Csv};

const SCHEMAS: &str = "\
CSV schemas:
  flow              t,gamma,re_delta,im_delta
  flow --portrait   trajectory,gamma0,re_delta0,im_delta0,t,gamma,re_delta,im_delta
  conductance       tau,g_half,g_dual,abs_diff
  mfspectrum        q,delta_q
  laplacian-check   size,green_error,tree_error
  laplacian-check --field N   one row per x node, one column per y node

Exit status: 0 success, 1 acceptance failure, 2 invalid input.";

#[derive(Debug, Parser)]
#[command(name = "iqht", version, about = "Beta functions, RG flow and critical observables of the deformed gl(r|r) WZW model", after_help = SCHEMAS)]
pub struct Cli {
    /// Output format; each subcommand has its own default.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Default directory for outputs (file name `<subcommand>.<ext>`).
    #[arg(long, env = "IQHT_OUT_DIR", global = true)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "txt",
        }
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Symbolic beta functions, checked against the reference forms.
    Beta {
        /// Substitute this level into the symbolic result.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: Option<u32>,
    },
    /// Operator product of two vocabulary operators, `first(z) second(0)`.
    ///
    /// Operators: J, Jb, J(A), Jb(A), M(B), Mi(B), OA, OI, O, T, Tb.
    /// Matrix names: 1, I, Ii or any alphanumeric name.
    Ope {
        first: String,
        second: String,
        #[arg(long, value_enum, default_value_t = Part::All)]
        part: Part,
    },
    /// RK4 trajectory of (gamma, delta), or a phase-portrait sweep.
    Flow(FlowArgs),
    /// Mean conductance G*(tau) at one point or along a log-spaced curve.
    Conductance(ConductanceArgs),
    /// Multifractal exponents Delta_q.
    Mfspectrum(SpectrumArgs),
    /// Free energy of an isolated vortex.
    Kt {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        /// Ratio a_IR / a_UV of the cutoffs (> 1).
        #[arg(long, value_parser = finite)]
        ratio: f64,
    },
    /// Finite-difference checks of the cylinder Green's function and the
    /// tree-level conductance.
    LaplacianCheck(LaplacianArgs),
    /// Run the acceptance criteria; nonzero exit if any fails.
    VerifyAll {
        /// Restrict to these criteria (comma separated, 1..=10).
        #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(1..=10))]
        only: Vec<u8>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Part {
    All,
    Singular,
    Finite,
    Connected,
    Averaged,
}

#[derive(Debug, Clone, Args)]
pub struct FlowArgs {
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    pub n: u32,
    #[arg(long, default_value_t = 0.0, value_parser = finite, allow_negative_numbers = true)]
    pub gamma: f64,
    #[arg(long, default_value_t = 0.0, value_parser = finite, allow_negative_numbers = true)]
    pub delta_re: f64,
    #[arg(long, default_value_t = 0.0, value_parser = finite, allow_negative_numbers = true)]
    pub delta_im: f64,
    #[arg(long, default_value_t = 100.0, value_parser = finite)]
    pub t_end: f64,
    #[arg(long, default_value_t = 0.01, value_parser = finite)]
    pub dt: f64,
    /// Keep every k-th sample in the output.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub every: u64,
    /// Sweep gamma0 in {0, 0.5, 0.9, 0.95} and |delta0| in {0.05, 0.1, 0.2}
    /// on both axes; each run stops at min(t_end, 0.855 t_blowup).
    #[arg(long)]
    pub portrait: bool,
}

#[derive(Debug, Clone, Args)]
pub struct ConductanceArgs {
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    pub n: u32,
    /// Aspect parameter tau = pi L / W.
    #[arg(long, value_parser = finite, conflicts_with_all = ["l", "w", "tau_min"])]
    pub tau: Option<f64>,
    #[arg(long, value_parser = finite, requires = "w")]
    pub l: Option<f64>,
    #[arg(long, value_parser = finite, requires = "l")]
    pub w: Option<f64>,
    /// Relative truncation tolerance of the series.
    #[arg(long, default_value_t = DEFAULT_TOL, value_parser = finite)]
    pub tol: f64,
    #[arg(long, value_parser = finite, requires = "tau_max")]
    pub tau_min: Option<f64>,
    #[arg(long, value_parser = finite, requires = "tau_min")]
    pub tau_max: Option<f64>,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u32).range(2..))]
    pub points: u32,
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    pub n: u32,
    #[arg(long, value_parser = finite, allow_negative_numbers = true, conflicts_with_all = ["q_min", "q_max"])]
    pub q: Option<f64>,
    #[arg(long, default_value_t = -3.0, value_parser = finite, allow_negative_numbers = true)]
    pub q_min: f64,
    #[arg(long, default_value_t = 4.0, value_parser = finite, allow_negative_numbers = true)]
    pub q_max: f64,
    #[arg(long, default_value_t = 71, value_parser = clap::value_parser!(u32).range(2..))]
    pub steps: u32,
}

#[derive(Debug, Clone, Args)]
pub struct LaplacianArgs {
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
    pub n: u32,
    /// Square grid sizes, each ≥ 8 and divisible by 4.
    #[arg(long, value_delimiter = ',', default_values_t = [32usize, 64, 128])]
    pub sizes: Vec<usize>,
    /// Minimum node distance from the source for the Green's function error.
    #[arg(long, default_value_t = 4)]
    pub min_cells: usize,
    /// Mode cutoff of the analytic sum.
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
    pub kmax: u64,
    /// Emit the Green's function of an N x N grid (source at the centre)
    /// as a CSV matrix instead of the convergence report.
    #[arg(long)]
    pub field: Option<usize>,
}

fn finite(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        Ok(_) => Err("must be finite".into()),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

fn invalid(e: impl ToString) -> CliError {
    CliError::Validation(e.to_string())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Destination {
    Stdout,
    File(PathBuf),
}

/// Validated request.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub format: Format,
    pub destination: Destination,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    AcceptanceFailure,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::AcceptanceFailure => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Emitted {
    pub body: String,
    pub status: Status,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Beta { .. } => "beta",
            Command::Ope { .. } => "ope",
            Command::Flow(_) => "flow",
            Command::Conductance(_) => "conductance",
            Command::Mfspectrum(_) => "mfspectrum",
            Command::Kt { .. } => "kt",
            Command::LaplacianCheck(_) => "laplacian-check",
            Command::VerifyAll { .. } => "verify-all",
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Ope { .. } => Format::Text,
            Command::Flow(_) => Format::Csv,
            Command::Conductance(a) if a.tau_min.is_some() => Format::Csv,
            Command::LaplacianCheck(a) if a.field.is_some() => Format::Csv,
            _ => Format::Json,
        }
    }

    fn formats(&self) -> &'static [Format] {
        match self {
            Command::Beta { .. } | Command::VerifyAll { .. } => &[Format::Json, Format::Text],
            Command::Ope { .. } => &[Format::Json, Format::Text],
            Command::Kt { .. } => &[Format::Json],
            Command::LaplacianCheck(a) if a.field.is_some() => &[Format::Csv],
            _ => &[Format::Json, Format::Csv],
        }
    }
}

impl Cli {
    /// Check every numeric parameter against the core preconditions.
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let format = self.format.unwrap_or_else(|| self.command.default_format());
        if !self.command.formats().contains(&format) {
            return Err(invalid(format!("{} cannot emit {}", self.command.name(), format.extension())));
        }
        validate(&self.command)?;
        let destination = match (self.output, self.out_dir) {
            (Some(p), _) => Destination::File(p),
            (None, Some(dir)) => Destination::File(dir.join(format!("{}.{}", self.command.name(), format.extension()))),
            (None, None) => Destination::Stdout,
        };
        Ok(RunConfig { command: self.command, format, destination })
    }
}

fn validate(c: &Command) -> Result<(), CliError> {
    match c {
        Command::Ope { first, second, .. } => {
            parse_operator(first).map_err(invalid)?;
            parse_operator(second).map_err(invalid)?;
        }
        Command::Flow(a) => {
            initial_state(a)?;
            if !(a.dt > 0.0) || a.t_end < 0.0 {
                return Err(invalid("dt must be positive and t_end non-negative"));
            }
        }
        Command::Conductance(a) => {
            if a.tau.is_none() && a.l.is_none() && a.tau_min.is_none() {
                return Err(invalid("give --tau, --l/--w or --tau-min/--tau-max"));
            }
            if !(a.tol > 0.0 && a.tol < 1.0) {
                return Err(invalid("tol must lie in (0, 1)"));
            }
            if let (Some(lo), Some(hi)) = (a.tau_min, a.tau_max) {
                if !(lo > 0.0 && hi > lo) {
                    return Err(invalid("need 0 < tau-min < tau-max"));
                }
            }
            if let Some(q) = point_query(a) {
                q.map_err(invalid)?;
            }
        }
        Command::Mfspectrum(a) => {
            if a.q.is_none() && !(a.q_max > a.q_min) {
                return Err(invalid("need q-min < q-max"));
            }
        }
        Command::Kt { n, ratio } => {
            kt_energetics(*n, *ratio).map_err(invalid)?;
        }
        Command::LaplacianCheck(a) => {
            let sizes = a.field.map_or_else(|| a.sizes.clone(), |f| vec![f]);
            if sizes.is_empty() {
                return Err(invalid("no grid sizes"));
            }
            for &s in &sizes {
                if s < 8 || s % 4 != 0 || s > 1024 {
                    return Err(invalid(format!("grid size {s} must be a multiple of 4 in 8..=1024")));
                }
                if 2 * a.min_cells >= s {
                    return Err(invalid(format!("min-cells {} leaves no interior nodes on {s}", a.min_cells)));
                }
            }
        }
        Command::Beta { .. } | Command::VerifyAll { .. } => {}
    }
    Ok(())
}

/// Parse `J`, `J(A)`, `Jb(A)`, `M(B)`, `Mi(B)`, `OA`, `OI`, `O`, `T`, `Tb`.
pub fn parse_operator(s: &str) -> Result<Operator, String> {
    let s = s.trim();
    let (head, arg) = match s.split_once('(') {
        Some((h, rest)) => match rest.strip_suffix(')') {
            Some(a) => (h, Some(a.trim())),
            None => return Err(format!("unbalanced parenthesis in `{s}`")),
        },
        None => (s, None),
    };
    let matrix = |a: Option<&str>, default: Option<ParamMatrix>| -> Result<ParamMatrix, String> {
        match (a, default) {
            (None, Some(d)) => Ok(d),
            (None, None) => Err(format!("`{head}` needs a matrix argument")),
            (Some("1"), _) => Ok(ParamMatrix::Identity),
            (Some("I"), _) => Ok(ParamMatrix::I),
            (Some("Ii"), _) => Ok(ParamMatrix::IInverse),
            (Some(n), _) if !n.is_empty() && n.chars().all(|c| c.is_alphanumeric() || c == '_') => {
                Ok(ParamMatrix::named(n))
            }
            (Some(n), _) => Err(format!("bad matrix name `{n}`")),
        }
    };
    let bare = |op: Operator| match arg {
        None => Ok(op),
        Some(_) => Err(format!("`{head}` takes no argument")),
    };
    match head {
        "J" => Ok(Operator::Current(matrix(arg, Some(ParamMatrix::Identity))?)),
        "Jb" => Ok(Operator::AntiCurrent(matrix(arg, Some(ParamMatrix::Identity))?)),
        "M" => Ok(Operator::Fundamental(matrix(arg, None)?)),
        "Mi" => Ok(Operator::InverseFundamental(matrix(arg, None)?)),
        "OA" => bare(Operator::OA),
        "OI" => bare(Operator::OI),
        "O" => bare(Operator::O),
        "T" => bare(Operator::T),
        "Tb" => bare(Operator::TBar),
        _ => Err(format!("unknown operator `{s}`")),
    }
}

fn initial_state(a: &FlowArgs) -> Result<CouplingState, CliError> {
    CouplingState::new(a.gamma, Complex64::new(a.delta_re, a.delta_im), a.n).map_err(invalid)
}

fn point_query(a: &ConductanceArgs) -> Option<Result<ConductanceQuery, String>> {
    let q = match (a.tau, a.l, a.w) {
        (Some(t), _, _) => ConductanceQuery::from_tau(t, a.n),
        (None, Some(l), Some(w)) => ConductanceQuery::new(l, w, a.n),
        _ => return None,
    };
    Some(q.map(|q| q.with_tol(a.tol)).map_err(|e| e.to_string()))
}

pub fn dispatch(config: &RunConfig) -> Result<Emitted, CliError> {
    let f = config.format;
    let ok = |body: String| Ok(Emitted { body, status: Status::Success });
    match &config.command {
        Command::Beta { n } => beta(*n, f),
        Command::Ope { first, second, part } => ok(ope_cmd(first, second, *part, f)?),
        Command::Flow(a) => ok(flow(a, f)?),
        Command::Conductance(a) => ok(conductance(a, f)?),
        Command::Mfspectrum(a) => ok(spectrum(a, f)),
        Command::Kt { n, ratio } => ok(kt(*n, *ratio)?),
        Command::LaplacianCheck(a) => ok(laplacian(a, f)?),
        Command::VerifyAll { only } => Ok(verify_all(only, f)),
    }
}

fn beta(n: Option<u32>, f: Format) -> Result<Emitted, CliError> {
    let sys = beta_system().map_err(invalid)?;
    let (g, d, l) = reference_flows();
    let matches = sys.gamma_flow == g && sys.delta_flow == d && sys.gamma_flow_lambda == l;
    let (gf, df, lf) = match n {
        Some(n) => {
            let n = n as i128;
            (sys.gamma_flow.at_level(n), sys.delta_flow.at_level(n), sys.gamma_flow_lambda.at_level(n))
        }
        None => (sys.gamma_flow, sys.delta_flow, sys.gamma_flow_lambda),
    };
    let body = match f {
        Format::Text => format!(
            "dgamma/dln a = {gf}\nddelta/dln a = {df}\ndgamma/dln a (lambda sector) = {lf}\nmatches reference: {matches}\n"
        ),
        _ => {
            let mut r = report("one-loop flow of gamma and delta; lambda sector");
            r.insert("n".into(), n.map_or(Value::Null, Value::from));
            r.insert("gamma_flow".into(), gf.to_string().into());
            r.insert("delta_flow".into(), df.to_string().into());
            r.insert("lambda_flow".into(), lf.to_string().into());
            r.insert("matches_reference".into(), matches.into());
            to_json(&r)
        }
    };
    let status = if matches { Status::Success } else { Status::AcceptanceFailure };
    Ok(Emitted { body, status })
}

fn ope_cmd(first: &str, second: &str, part: Part, f: Format) -> Result<String, CliError> {
    let a = parse_operator(first).map_err(invalid)?.at(Point('z'));
    let b = parse_operator(second).map_err(invalid)?.at(Point::ORIGIN);
    let e = ope(&a, &b).map_err(invalid)?;
    let e: Expansion = match part {
        Part::All => e,
        Part::Singular => e.singular_part(),
        Part::Finite => e.finite_part(),
        Part::Connected => connected_part(&e),
        Part::Averaged => angular_average(&connected_part(&e)),
    }
    .canonical();
    Ok(match f {
        Format::Text => e.to_string(),
        _ => {
            let mut r = report("operator product expansion");
            r.insert("first".into(), first.into());
            r.insert("second".into(), second.into());
            r.insert("expansion".into(), serde_json::to_value(&e).expect("expansions serialize"));
            r.insert("text".into(), e.to_string().into());
            to_json(&r)
        }
    })
}

fn state_json(s: &CouplingState) -> Value {
    json!({ "gamma": num(s.gamma), "re_delta": num(s.delta.re), "im_delta": num(s.delta.im) })
}

fn flow(a: &FlowArgs, f: Format) -> Result<String, CliError> {
    if a.portrait {
        return portrait(a, f);
    }
    let s0 = initial_state(a)?;
    let traj = integrate(&s0, a.t_end, a.dt).map_err(invalid)?;
    Ok(match f {
        Format::Csv => {
            let mut csv = Csv::new(&["t", "gamma", "re_delta", "im_delta"]);
            for (t, s) in thinned(&traj, a.every) {
                csv.row(&[cell(t), cell(s.gamma), cell(s.delta.re), cell(s.delta.im)]);
            }
            csv.finish()
        }
        _ => {
            let exact = closed_form(&s0, a.t_end).map_err(invalid)?;
            let end = traj.endpoint();
            let mut r = report("one-loop flow of gamma and delta; closed-form solution");
            r.insert("n".into(), a.n.into());
            r.insert("initial".into(), state_json(&s0));
            r.insert("t_end".into(), num(a.t_end));
            r.insert("dt".into(), num(a.dt));
            r.insert("integrator".into(), traj.integrator.into());
            r.insert("t_blowup".into(), s0.t_blowup().map_or(Value::Null, num));
            r.insert("endpoint".into(), state_json(end));
            r.insert("closed_form".into(), state_json(&exact));
            let diff = ((end.gamma - exact.gamma).powi(2) + (end.delta - exact.delta).norm_sqr()).sqrt();
            let scale = (exact.gamma.powi(2) + exact.delta.norm_sqr()).sqrt();
            r.insert("endpoint_error".into(), num(diff / scale));
            to_json(&r)
        }
    })
}

fn thinned(traj: &FlowTrajectory, every: u64) -> impl Iterator<Item = (f64, CouplingState)> + '_ {
    let last = traj.samples.len() - 1;
    traj.samples
        .iter()
        .enumerate()
        .filter(move |(i, _)| *i as u64 % every == 0 || *i == last)
        .map(|(_, &(t, s))| (t, s))
}

fn portrait(a: &FlowArgs, f: Format) -> Result<String, CliError> {
    let guard = 0.9 * IntegratorConfig::default().blowup_fraction;
    let mut csv = Csv::new(&["trajectory", "gamma0", "re_delta0", "im_delta0", "t", "gamma", "re_delta", "im_delta"]);
    let mut runs = Vec::new();
    let mut id = 0usize;
    for g0 in [0.0, 0.5, 0.9, 0.95] {
        for d in [0.05, 0.1, 0.2] {
            for axis in [Complex64::new(d, 0.0), Complex64::new(0.0, d)] {
                let s0 = CouplingState::new(g0, axis, a.n).map_err(invalid)?;
                let t_end = s0.t_blowup().map_or(a.t_end, |tb| a.t_end.min(guard * tb));
                let traj = integrate(&s0, t_end, a.dt.min(t_end.max(f64::MIN_POSITIVE))).map_err(invalid)?;
                for (t, s) in thinned(&traj, a.every) {
                    csv.row(&[
                        id.to_string(),
                        cell(g0),
                        cell(axis.re),
                        cell(axis.im),
                        cell(t),
                        cell(s.gamma),
                        cell(s.delta.re),
                        cell(s.delta.im),
                    ]);
                }
                let stability = classify_stability(&s0, t_end.max(a.dt)).map_err(invalid)?;
                runs.push(json!({
                    "trajectory": id,
                    "initial": state_json(&s0),
                    "t_end": num(t_end),
                    "endpoint": state_json(traj.endpoint()),
                    "stability": format!("{stability:?}"),
                }));
                id += 1;
            }
        }
    }
    Ok(match f {
        Format::Csv => csv.finish(),
        _ => {
            let mut r = report("phase portrait of the one-loop flow");
            r.insert("n".into(), a.n.into());
            r.insert("trajectories".into(), runs.into());
            to_json(&r)
        }
    })
}

fn log_spaced(lo: f64, hi: f64, points: u32) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points).map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp()).collect()
}

fn series_point(q: &ConductanceQuery) -> Result<(f64, usize, f64, usize), CliError> {
    let (h, nh) = g_star_series(q, SeriesForm::HalfInteger).map_err(invalid)?;
    let (d, nd) = g_star_series(q, SeriesForm::Dual).map_err(invalid)?;
    Ok((h, nh, d, nd))
}

fn conductance(a: &ConductanceArgs, f: Format) -> Result<String, CliError> {
    let queries: Vec<ConductanceQuery> = match (point_query(a), a.tau_min, a.tau_max) {
        (Some(q), _, _) => vec![q.map_err(invalid)?],
        (None, Some(lo), Some(hi)) => log_spaced(lo, hi, a.points)
            .into_iter()
            .map(|t| ConductanceQuery::from_tau(t, a.n).map(|q| q.with_tol(a.tol)).map_err(invalid))
            .collect::<Result<_, _>>()?,
        _ => return Err(invalid("give --tau, --l/--w or --tau-min/--tau-max")),
    };
    let mut csv = Csv::new(&["tau", "g_half", "g_dual", "abs_diff"]);
    let mut points = Vec::new();
    for q in &queries {
        let (h, nh, d, nd) = series_point(q)?;
        csv.row(&[cell(q.tau), cell(h), cell(d), cell((h - d).abs())]);
        points.push(json!({
            "tau": num(q.tau),
            "l": num(q.l),
            "w": num(q.w),
            "g_half": num(h),
            "g_dual": num(d),
            "g_star": num(g_star(q).map_err(invalid)?),
            "duality_residual": num((h - d).abs()),
            "terms_half": nh,
            "terms_dual": nd,
        }));
    }
    Ok(match f {
        Format::Csv => csv.finish(),
        _ => {
            let mut r = report("conductance theta series and its Poisson dual");
            r.insert("n".into(), a.n.into());
            r.insert("tol".into(), num(a.tol));
            r.insert("sigma_xx_star".into(), num(sigma_xx_star(a.n)));
            if points.len() == 1 {
                if let Value::Object(p) = points.remove(0) {
                    r.extend(p);
                }
            } else {
                r.insert("points".into(), points.into());
            }
            to_json(&r)
        }
    })
}

fn spectrum(a: &SpectrumArgs, f: Format) -> String {
    let qs: Vec<f64> = match a.q {
        Some(q) => vec![q],
        None => (0..a.steps).map(|k| a.q_min + (a.q_max - a.q_min) * k as f64 / (a.steps - 1) as f64).collect(),
    };
    match f {
        Format::Csv => {
            let mut csv = Csv::new(&["q", "delta_q"]);
            for &q in &qs {
                csv.row(&[cell(q), cell(delta_q(q, a.n))]);
            }
            csv.finish()
        }
        _ => {
            let mut r = report("multifractal parabola q(1-q)/n");
            r.insert("n".into(), a.n.into());
            if let [q] = qs[..] {
                r.insert("q".into(), num(q));
                r.insert("delta_q".into(), num(delta_q(q, a.n)));
            } else {
                let table: Vec<Value> = qs.iter().map(|&q| json!({ "q": num(q), "delta_q": num(delta_q(q, a.n)) })).collect();
                r.insert("table".into(), table.into());
            }
            to_json(&r)
        }
    }
}

fn kt(n: u32, ratio: f64) -> Result<String, CliError> {
    let e = kt_energetics(n, ratio).map_err(invalid)?;
    let mut r = report("isolated vortex free energy");
    r.insert("n".into(), n.into());
    r.insert("ratio".into(), num(ratio));
    r.insert("free_energy".into(), num(e.free_energy));
    r.insert("energy".into(), num(e.energy));
    r.insert("entropy".into(), num(e.entropy));
    let sign = if e.free_energy > 0.0 {
        "positive"
    } else if e.free_energy < 0.0 {
        "negative"
    } else {
        "zero"
    };
    r.insert("sign".into(), sign.into());
    Ok(to_json(&r))
}

fn square(size: usize) -> Result<CylinderGrid, CliError> {
    CylinderGrid::new(size, size, 1.0, 1.0).map_err(invalid)
}

fn laplacian(a: &LaplacianArgs, f: Format) -> Result<String, CliError> {
    if let Some(size) = a.field {
        let grid = square(size)?;
        let g = green_numeric(&grid, (size / 2, size / 2)).map_err(invalid)?;
        let mut out = String::new();
        for i in 0..=grid.nx {
            let row: Vec<String> = (0..grid.ny).map(|j| cell(g.at(i, j))).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        return Ok(out);
    }
    let exact = tree_conductance_analytic(1.0, 1.0, a.n);
    let (mut green, mut tree) = (Vec::new(), Vec::new());
    for &s in &a.sizes {
        let grid = square(s)?;
        green.push(green_max_relative_error(&grid, a.min_cells, a.kmax as usize).map_err(invalid)?);
        tree.push((tree_conductance_numeric(&grid, a.n).map_err(invalid)? / exact - 1.0).abs());
    }
    Ok(match f {
        Format::Csv => {
            let mut csv = Csv::new(&["size", "green_error", "tree_error"]);
            for (k, &s) in a.sizes.iter().enumerate() {
                csv.row(&[s.to_string(), cell(green[k]), cell(tree[k])]);
            }
            csv.finish()
        }
        _ => {
            let rep = |errors: Vec<f64>| {
                let c = ConvergenceReport::new(a.sizes.clone(), errors);
                json!({
                    "sizes": c.sizes,
                    "errors": c.errors.iter().map(|&e| num(e)).collect::<Vec<_>>(),
                    "observed_orders": c.observed_orders.iter().map(|&e| num(e)).collect::<Vec<_>>(),
                    "decreasing": c.decreasing(),
                })
            };
            let mut r = report("inverse Laplacian on the cylinder; tree-level conductance");
            r.insert("n".into(), a.n.into());
            r.insert("min_cells".into(), a.min_cells.into());
            r.insert("kmax".into(), a.kmax.into());
            r.insert("tree_conductance_analytic".into(), num(exact));
            r.insert("green".into(), rep(green));
            r.insert("tree".into(), rep(tree));
            to_json(&r)
        }
    })
}

fn verify_all(only: &[u8], f: Format) -> Emitted {
    let ids: Vec<u8> = if only.is_empty() { (1..=10).collect() } else { only.to_vec() };
    let results: Vec<_> = ids.iter().map(|&i| acceptance::run(i)).collect();
    let pass = results.iter().all(|c| c.pass);
    let body = match f {
        Format::Text => results.iter().map(|c| c.line() + "\n").collect(),
        _ => {
            let mut r = report("acceptance suite");
            r.insert("pass".into(), pass.into());
            r.insert("criteria".into(), serde_json::to_value(&results).expect("criteria serialize"));
            to_json(&r)
        }
    };
    Emitted { body, status: if pass { Status::Success } else { Status::AcceptanceFailure } }
}
