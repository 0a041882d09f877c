//! Command-line driver: argument grammar, subcommands and exit codes.
//!
//! Exit codes: 0 success, 1 verification failure, 2 argument error,
//! 3 numerical failure.

pub mod table;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;

use asep_core::distribution::{
    cdf_contour, cdf_residue, cdf_series_partial, finite_trace, limit_cdf, limit_trace, CdfOptions, SeriesOptions,
};
use asep_core::engine::{k0_eigensystem, nystrom_k0, Precision};
use asep_core::identities::{engine_suite, identity_suite, IdentityReport};
use asep_core::model::scaled_site;
use asep_core::simulator::{empirical_cdf, SimConfig};
use asep_core::{Error, ModelParams, ScalingQuery};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub use table::{emit_table, Cell, Format, RunManifest, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_ARGS: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Overrides `--precision` when set.
pub const PRECISION_ENV: &str = "ASEP_FREDHOLM_PRECISION";

#[derive(Debug, Parser)]
#[command(name = "asep", version, about = "Exact ASEP distributions via Fredholm determinants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// P(x_m(t) ≤ x) by the λ-contour, with the residue sum as a cross-check.
    Cdf(CdfArgs),
    /// Monte Carlo estimate of P(x_m(t) ≤ x).
    Simulate(SimulateArgs),
    /// Partial sums of the multiple-integral series.
    Series(SeriesArgs),
    /// Finite-t CDF at the scaled site against the t → ∞ limit.
    Scaling(ScalingArgs),
    /// tr Kⁿ at the scaled site against tr (K₀χ)ⁿ.
    Traces(TracesArgs),
    /// Spectrum of the Mehler kernel K₀.
    Eigen(EigenArgs),
    /// Identity and engine-invariant suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Right-jump probability, 0 < p < 1.
    #[arg(long)]
    p: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct Numeric {
    /// ξ-circle nodes.
    #[arg(long, default_value_t = 128)]
    n_xi: usize,
    /// ξ-circle radius; defaults to a t-dependent multiple of the critical radius.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, value_enum, default_value_t = PrecisionArg::Double)]
    precision: PrecisionArg,
    /// Report the formula's own failure instead of the support bound x_m ≤ m.
    #[arg(long)]
    no_support_bound: bool,
    /// Do not recompute in double-double when binary64 loses accuracy.
    #[arg(long)]
    no_auto_extend: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PrecisionArg {
    Double,
    Extended,
}

#[derive(Debug, Args)]
struct CdfArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    numeric: Numeric,
    #[arg(long, default_value_t = 1)]
    m: usize,
    /// Sites: `a:b` (inclusive), `a,b,c`, or a mix.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_int_grid)]
    x: IntGrid,
    /// Times: `t` or `t1,t2,…`.
    #[arg(long, value_parser = parse_float_list)]
    t: FloatList,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_int_grid)]
    x: IntGrid,
    #[arg(long)]
    t: f64,
    #[arg(long, default_value_t = 200_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Simulated particles; defaults to m + ⌈3t⌉ + 20.
    #[arg(long)]
    particles: Option<usize>,
    #[arg(long, default_value_t = 0.9999)]
    confidence: f64,
    /// Add the exact contour value and a containment column.
    #[arg(long)]
    compare: bool,
}

#[derive(Debug, Args)]
struct SeriesArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_int_grid)]
    x: IntGrid,
    #[arg(long)]
    t: f64,
    /// Largest k in the partial sum (at most 4).
    #[arg(long, default_value_t = 3)]
    k_max: usize,
    /// Nodes per dimension of the tensor rule.
    #[arg(long)]
    nodes: Option<usize>,
}

#[derive(Debug, Args)]
struct ScalingArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    numeric: Numeric,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_float_list)]
    y: FloatList,
    #[arg(long, value_parser = parse_float_list)]
    t: FloatList,
    #[arg(long, default_value_t = 200)]
    k0_nodes: usize,
}

#[derive(Debug, Args)]
struct TracesArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    numeric: Numeric,
    /// Powers: `1:3` or a list.
    #[arg(long, value_parser = parse_int_grid, default_value = "1:3")]
    n: IntGrid,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_float_list)]
    y: FloatList,
    #[arg(long, value_parser = parse_float_list)]
    t: FloatList,
    #[arg(long, default_value_t = 200)]
    k0_nodes: usize,
}

#[derive(Debug, Args)]
struct EigenArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 8)]
    count: usize,
    #[arg(long, default_value_t = 200)]
    nodes: usize,
    /// Restrict K₀ to (−y, ∞).
    #[arg(long, allow_hyphen_values = true)]
    y: Option<f64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = Suite::All)]
    suite: Suite,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Identities,
    Engine,
    All,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntGrid(pub Vec<i64>);

#[derive(Debug, Clone, PartialEq)]
pub struct FloatList(pub Vec<f64>);

/// `a:b` is the inclusive range; items may be comma-separated.
pub fn parse_int_grid(s: &str) -> Result<IntGrid, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim) {
        // A leading sign belongs to the first bound.
        match item.get(1..).and_then(|rest| rest.find(':')).map(|i| i + 1) {
            Some(i) => {
                let a: i64 = item[..i].trim().parse().map_err(|e| format!("bad range start in {item:?}: {e}"))?;
                let b: i64 = item[i + 1..].trim().parse().map_err(|e| format!("bad range end in {item:?}: {e}"))?;
                if b < a {
                    return Err(format!("empty range {item:?}"));
                }
                out.extend(a..=b);
            }
            None => out.push(item.parse().map_err(|e| format!("bad integer {item:?}: {e}"))?),
        }
    }
    Ok(IntGrid(out))
}

pub fn parse_float_list(s: &str) -> Result<FloatList, String> {
    s.split(',')
        .map(|item| {
            let v: f64 = item.trim().parse().map_err(|e| format!("bad number {item:?}: {e}"))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(format!("non-finite value {item:?}"))
            }
        })
        .collect::<Result<_, _>>()
        .map(FloatList)
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_numerical() { EXIT_NUMERIC } else { EXIT_ARGS },
            message: e.to_string(),
        }
    }
}

fn arg_failure(message: String) -> Failure {
    Failure { code: EXIT_ARGS, message }
}

/// Output bytes plus the exit code to report after writing them.
struct Output {
    bytes: Vec<u8>,
    code: i32,
}

fn success(bytes: Vec<u8>) -> Output {
    Output { bytes, code: EXIT_OK }
}

/// Parses `argv` (program name first), runs the subcommand, writes its table
/// to stdout, and returns the exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ARGS } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(&out.bytes).and_then(|_| stdout.flush()).is_err() {
                return EXIT_ARGS;
            }
            out.code
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn run(command: Command) -> Result<Output, Failure> {
    match command {
        Command::Cdf(a) => cmd_cdf(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Series(a) => cmd_series(a),
        Command::Scaling(a) => cmd_scaling(a),
        Command::Traces(a) => cmd_traces(a),
        Command::Eigen(a) => cmd_eigen(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn precision(arg: PrecisionArg) -> Result<Precision, Failure> {
    match std::env::var(PRECISION_ENV) {
        Ok(v) if !v.is_empty() => v
            .parse::<Precision>()
            .map_err(|_| arg_failure(format!("{PRECISION_ENV} must be \"double\" or \"extended\", got {v:?}"))),
        _ => Ok(match arg {
            PrecisionArg::Double => Precision::Double,
            PrecisionArg::Extended => Precision::Extended,
        }),
    }
}

fn cdf_options(n: &Numeric) -> Result<CdfOptions, Failure> {
    Ok(CdfOptions {
        n_xi: n.n_xi,
        radius: n.radius,
        precision: precision(n.precision)?,
        support_bound: !n.no_support_bound,
        auto_extend: !n.no_auto_extend,
        ..CdfOptions::default()
    })
}

fn numeric_params(params: &mut BTreeMap<String, String>, n: &Numeric, opts: &CdfOptions) {
    params.insert("n_xi".into(), n.n_xi.to_string());
    params.insert("radius".into(), n.radius.map_or("auto".into(), |r| r.to_string()));
    params.insert("precision".into(), opts.precision.to_string());
    params.insert("support_bound".into(), opts.support_bound.to_string());
    params.insert("auto_extend".into(), opts.auto_extend.to_string());
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

macro_rules! params {
    ($($k:literal => $v:expr),* $(,)?) => {{
        let mut m = BTreeMap::new();
        $(m.insert($k.to_string(), $v.to_string());)*
        m
    }};
}

fn cmd_cdf(a: CdfArgs) -> Result<Output, Failure> {
    let model = ModelParams::new(a.common.p)?;
    let opts = cdf_options(&a.numeric)?;
    let mut params = params!("p" => a.common.p, "m" => a.m, "x" => join(&a.x.0), "t" => join(&a.t.0));
    numeric_params(&mut params, &a.numeric, &opts);
    let mut table = Table::new(vec![
        "x", "value", "method", "err_estimate", "t", "m", "presentation", "residue_value", "cross_check", "support_bound",
        "escalated",
    ]);
    for &t in &a.t.0 {
        for &x in &a.x.0 {
            let r = cdf_contour(&model, a.m, x, t, &opts)?;
            let residue = match cdf_residue(&model, a.m, x, t, &opts) {
                Ok(v) => Some(v.value),
                Err(Error::DegenerateTau(_)) => None,
                Err(e) => return Err(e.into()),
            };
            let flag = |k: &str| r.diagnostics.get(k).is_some_and(|v| *v != 0.0);
            table.push(vec![
                x.into(),
                r.value.into(),
                r.method.as_str().into(),
                r.err_estimate.into(),
                t.into(),
                a.m.into(),
                r.presentation.into(),
                residue.into(),
                residue.map(|v| (v - r.value).abs()).into(),
                flag("support_bound").into(),
                flag("escalated").into(),
            ]);
        }
    }
    let manifest = RunManifest::new("cdf", params, None);
    Ok(success(emit_table(&manifest, &table, a.common.format)))
}

fn cmd_simulate(a: SimulateArgs) -> Result<Output, Failure> {
    let model = ModelParams::new(a.common.p)?;
    let mut cfg = SimConfig::new(model, a.m, a.t, a.trials, a.seed)?.with_confidence(a.confidence)?;
    if let Some(n) = a.particles {
        cfg = cfg.with_particles(n)?;
    }
    let mut xs = a.x.0.clone();
    xs.sort_unstable();
    xs.dedup();
    let emp = empirical_cdf(&cfg, &xs)?;
    let params = params!(
        "p" => a.common.p, "m" => a.m, "t" => a.t, "x" => join(&xs), "trials" => a.trials,
        "particles" => cfg.particle_count(), "confidence" => a.confidence, "compare" => a.compare,
    );
    let mut columns = vec!["x", "p_hat", "halfwidth", "wilson_lower", "wilson_upper", "trials"];
    if a.compare {
        columns.extend(["exact", "inside_ci"]);
    }
    let mut table = Table::new(columns);
    let opts = CdfOptions::default();
    for (i, &x) in xs.iter().enumerate() {
        let mut row: Vec<Cell> = vec![
            x.into(),
            emp.p_hat[i].into(),
            emp.halfwidth[i].into(),
            emp.wilson_lower[i].into(),
            emp.wilson_upper[i].into(),
            emp.trials.into(),
        ];
        if a.compare {
            let exact = cdf_contour(&model, a.m, x, a.t, &opts)?;
            let inside = emp.wilson_lower[i] - exact.err_estimate <= exact.value
                && exact.value <= emp.wilson_upper[i] + exact.err_estimate;
            row.extend([exact.value.into(), inside.into()]);
        }
        table.push(row);
    }
    let manifest = RunManifest::new("simulate", params, Some(a.seed));
    Ok(success(emit_table(&manifest, &table, a.common.format)))
}

fn cmd_series(a: SeriesArgs) -> Result<Output, Failure> {
    let model = ModelParams::new(a.common.p)?;
    if a.k_max < a.m {
        return Err(Error::EmptySum { m: a.m, k_max: a.k_max }.into());
    }
    let sopts = SeriesOptions { nodes_per_dim: a.nodes, radius: None };
    let params = params!(
        "p" => a.common.p, "m" => a.m, "x" => join(&a.x.0), "t" => a.t, "k_max" => a.k_max,
        "nodes" => a.nodes.map_or("auto".into(), |n| n.to_string()),
    );
    let mut table = Table::new(vec!["x", "k_max", "value", "err_estimate", "contour_value", "abs_error"]);
    for &x in &a.x.0 {
        let exact = cdf_contour(&model, a.m, x, a.t, &CdfOptions::default())?.value;
        for k in a.m..=a.k_max {
            let r = cdf_series_partial(&model, a.m, x, a.t, k, &sopts)?;
            table.push(vec![
                x.into(),
                k.into(),
                r.value.into(),
                r.err_estimate.into(),
                exact.into(),
                (r.value - exact).abs().into(),
            ]);
        }
    }
    let manifest = RunManifest::new("series", params, None);
    Ok(success(emit_table(&manifest, &table, a.common.format)))
}

fn cmd_scaling(a: ScalingArgs) -> Result<Output, Failure> {
    let model = ModelParams::new(a.common.p)?;
    model.require_left_drift()?;
    let opts = CdfOptions { k0_nodes: a.k0_nodes, ..cdf_options(&a.numeric)? };
    let mut params = params!(
        "p" => a.common.p, "m" => a.m, "y" => join(&a.y.0), "t" => join(&a.t.0), "k0_nodes" => a.k0_nodes,
    );
    numeric_params(&mut params, &a.numeric, &opts);
    let mut table = Table::new(vec!["y", "t", "x", "finite_value", "limit_value", "deviation"]);
    for &y in &a.y.0 {
        let limit = limit_cdf(&model, a.m, y, &opts)?.value;
        for &t in &a.t.0 {
            let x = scaled_site(&model, &ScalingQuery::new(y, t)?);
            let finite = cdf_contour(&model, a.m, x, t, &opts)?.value;
            table.push(vec![y.into(), t.into(), x.into(), finite.into(), limit.into(), (finite - limit).abs().into()]);
        }
    }
    let manifest = RunManifest::new("scaling", params, None);
    Ok(success(emit_table(&manifest, &table, a.common.format)))
}

fn cmd_traces(a: TracesArgs) -> Result<Output, Failure> {
    let model = ModelParams::new(a.common.p)?;
    model.require_left_drift()?;
    let opts = cdf_options(&a.numeric)?;
    let mut params = params!(
        "p" => a.common.p, "n" => join(&a.n.0), "y" => join(&a.y.0), "t" => join(&a.t.0), "k0_nodes" => a.k0_nodes,
    );
    numeric_params(&mut params, &a.numeric, &opts);
    let mut table = Table::new(vec!["n", "y", "t", "x", "finite_trace", "limit_trace", "deviation"]);
    for &n in &a.n.0 {
        if n < 1 {
            return Err(arg_failure(format!("trace power must be at least 1, got {n}")));
        }
        let n = n as usize;
        for &y in &a.y.0 {
            let limit = limit_trace(&model, n, y, a.k0_nodes)?;
            for &t in &a.t.0 {
                let x = scaled_site(&model, &ScalingQuery::new(y, t)?);
                let finite = finite_trace(&model, n, x, t, &opts)?;
                table.push(vec![
                    n.into(),
                    y.into(),
                    t.into(),
                    x.into(),
                    finite.into(),
                    limit.into(),
                    (finite - limit).abs().into(),
                ]);
            }
        }
    }
    let manifest = RunManifest::new("traces", params, None);
    Ok(success(emit_table(&manifest, &table, a.common.format)))
}

fn cmd_eigen(a: EigenArgs) -> Result<Output, Failure> {
    let model = ModelParams::new(a.common.p)?;
    let spectrum = k0_eigensystem(&nystrom_k0(&model, a.y, a.nodes)?)?;
    let params = params!(
        "p" => a.common.p, "count" => a.count, "nodes" => a.nodes, "y" => a.y.map_or("none".into(), |y| y.to_string()),
    );
    let mut table = Table::new(vec!["i", "eigenvalue", "expected", "rel_err"]);
    for (i, &v) in spectrum.values.iter().take(a.count).enumerate() {
        let expected = model.tau().powi(i as i32) / model.q();
        table.push(vec![i.into(), v.into(), expected.into(), ((v - expected).abs() / expected).into()]);
    }
    let manifest = RunManifest::new("eigen", params, None);
    Ok(success(emit_table(&manifest, &table, a.common.format)))
}

fn cmd_verify(a: VerifyArgs) -> Result<Output, Failure> {
    let mut reports: Vec<(&str, IdentityReport)> = Vec::new();
    if matches!(a.suite, Suite::Identities | Suite::All) {
        reports.extend(identity_suite(a.seed)?.into_iter().map(|r| ("identities", r)));
    }
    if matches!(a.suite, Suite::Engine | Suite::All) {
        reports.extend(engine_suite()?.into_iter().map(|r| ("engine", r)));
    }
    let suite = match a.suite {
        Suite::Identities => "identities",
        Suite::Engine => "engine",
        Suite::All => "all",
    };
    let mut table = Table::new(vec![
        "suite", "identity_name", "sample_count", "max_relative_error", "tolerance", "pass", "worst_case_input",
    ]);
    let mut failed = 0;
    for (s, r) in reports {
        failed += usize::from(!r.pass);
        table.push(vec![
            s.into(),
            r.identity_name.into(),
            r.sample_count.into(),
            r.max_relative_error.into(),
            r.tolerance.into(),
            r.pass.into(),
            r.worst_case_input.into(),
        ]);
    }
    if failed > 0 {
        eprintln!("verification failed: {failed} check(s) out of tolerance");
    }
    let manifest = RunManifest::new("verify", params!("suite" => suite), Some(a.seed));
    Ok(Output {
        bytes: emit_table(&manifest, &table, a.format),
        code: if failed > 0 { EXIT_VERIFY } else { EXIT_OK },
    })
}
