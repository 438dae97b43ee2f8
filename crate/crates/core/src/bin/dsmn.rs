//! Command-line surface for the dsmn library: trinomial assertion curves,
//! linkage-model reports, the validator suite, the independence test, and
//! the runtime benchmark, all as machine-readable CSV or JSON.
//!
//! Every output embeds the fully-resolved run configuration, the seed, and
//! the library version, so a run can be reproduced byte-for-byte from its
//! own header. Option precedence is flags > config file > built-in
//! defaults; the config file is a flat JSON object with any of the keys
//! `seed`, `threads`, `format`, `n_draws`.
//!
//! Exit codes: 0 success, 1 usage error, 2 numeric/degenerate error,
//! 3 resource cap exceeded.

use std::fs;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dsmn::dsm::{
    aggregate_counts, pqr_cell_leq, pqr_cell_leq_mc, pqr_cell_point, pqr_conditional_ratio,
    theorem1_empirical_check, CountVector, Partition,
};
use dsmn::error::{Error, Result};
use dsmn::idm::{idm_cell_leq_bounds, jeffreys_prob};
use dsmn::independence::{
    discretize, read_pairs_csv, runtime_benchmark, uniformity_plausibility, BenchMethod,
    PairedSample,
};
use dsmn::linkage::{acceptance_rate, phi_cdf_envelope, pqr_phi_leq, pqr_phi_point};
use dsmn::lp::{feasible, solve, Direction, LinearConstraint, LpProblem, LpResult};
use dsmn::rng::{Seed, Stream};
use dsmn::simplex_dsm::{
    cell_extremes, commonality_analytic, commonality_vacuous_mass, neutrality_lower_bound_check,
    pqr_cell_leq_simplex, pqr_conditional_ratio_simplex, ObservationList,
};
use dsmn::stats::{sample_dirichlet, ShapeVector, SimplexPoint};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser, Debug)]
#[command(name = "dsmn", version, about = "Dempster-Shafer multinomial inference")]
struct Cli {
    /// Optional JSON config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// RNG seed (default 17).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker thread count (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Output path (default: stdout).
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trinomial (p, q, r) curves for the three assertion families across
    /// methods (columns: method, assertion, x, p, p_plus_r, q, r, SEs).
    TrinomialCurves(TrinomialArgs),
    /// Linkage-model report: acceptance rate (in the metadata header) plus
    /// CDF envelope and (p, q, r) curves over a phi grid.
    LinkageReport(LinkageArgs),
    /// Run the validator suites (theorem1, theorem2, theorem3, rip, qmap,
    /// lp); prints one PASS/FAIL line per check.
    Validate(ValidateArgs),
    /// Plausibility test of independence for paired data on the unit
    /// square.
    Independence(IndependenceArgs),
    /// Wall-clock benchmark of the independence test across granularities.
    Benchmark(BenchmarkArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Method {
    /// Closed-form Dirichlet-DSM.
    Ddsm,
    /// Monte-Carlo Dirichlet-DSM cross-check.
    DdsmMc,
    /// Simplex-DSM via LP extremes (slow; off by default).
    Simplex,
    /// Imprecise Dirichlet Model bounds.
    Idm,
    /// Jeffreys-prior Bayesian posterior probability.
    Jeffreys,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum AssertionKind {
    /// {theta_k <= theta0}, swept over theta0.
    Leq,
    /// {theta_k = theta0}, swept over theta0.
    Point,
    /// {theta_2/theta_3 <= r0 | theta_1 = 0.5}, swept over r0.
    Ratio,
}

#[derive(Args, Debug, Serialize)]
struct TrinomialArgs {
    /// Cell counts, e.g. 2,1,1 (K = 3 required by the ratio assertion).
    #[arg(long, value_delimiter = ',', default_values_t = vec![2u64, 1, 1])]
    counts: Vec<u64>,

    /// Assertion families to sweep.
    #[arg(long, value_delimiter = ',', value_enum,
          default_values_t = vec![AssertionKind::Leq, AssertionKind::Point, AssertionKind::Ratio])]
    assertions: Vec<AssertionKind>,

    /// Methods to tabulate.
    #[arg(long, value_delimiter = ',', value_enum,
          default_values_t = vec![Method::Ddsm, Method::DdsmMc, Method::Idm, Method::Jeffreys])]
    methods: Vec<Method>,

    /// Assertion cell (1-based) for the leq/point families.
    #[arg(long, default_value_t = 1)]
    cell: usize,

    /// Number of interior theta0 grid points (grid i/(g+1), i = 1..g).
    #[arg(long, default_value_t = 99)]
    grid_points: usize,

    /// Number of r0 grid points (geometric between 1/16 and 16).
    #[arg(long, default_value_t = 21)]
    r0_points: usize,

    /// Monte-Carlo draws per sampled point.
    #[arg(long)]
    n_draws: Option<u64>,

    /// Accepted draws per point for the simplex method.
    #[arg(long, default_value_t = 2000)]
    n_accepted: u64,
}

#[derive(Args, Debug, Serialize)]
struct LinkageArgs {
    /// The four phenotype counts, e.g. 25,3,4,7.
    #[arg(long, value_delimiter = ',', default_values_t = vec![25u64, 3, 4, 7])]
    counts: Vec<u64>,

    /// Proposals for the acceptance-rate estimate.
    #[arg(long, default_value_t = 1_000_000)]
    proposals: u64,

    /// Accepted intervals for the CDF / pqr curves.
    #[arg(long, default_value_t = 5000)]
    n_accepted: u64,

    /// Number of interior phi grid points.
    #[arg(long, default_value_t = 99)]
    grid_points: usize,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Suite {
    Theorem1,
    Theorem2,
    Theorem3,
    Rip,
    Qmap,
    Lp,
}

#[derive(Args, Debug, Serialize)]
struct ValidateArgs {
    /// Run every suite.
    #[arg(long)]
    all: bool,

    /// Suites to run (ignored with --all).
    #[arg(long, value_delimiter = ',', value_enum)]
    suites: Vec<Suite>,

    /// Monte-Carlo budget per check.
    #[arg(long)]
    n_draws: Option<u64>,
}

#[derive(Args, Debug, Serialize)]
struct IndependenceArgs {
    /// Two-column CSV of pairs in [0,1]^2 (header optional).
    #[arg(long)]
    input: Option<PathBuf>,

    /// Instead of --input: draw this many i.i.d. uniform pairs.
    #[arg(long)]
    synthetic: Option<u64>,

    /// Bins per axis.
    #[arg(long, default_value_t = 2)]
    granularity: usize,

    /// Posterior draws for the plausibility estimate.
    #[arg(long)]
    n_draws: Option<u64>,

    /// Rejection level.
    #[arg(long, default_value_t = 0.05)]
    level: f64,
}

#[derive(Args, Debug, Serialize)]
struct BenchmarkArgs {
    /// Methods to time.
    #[arg(long, value_delimiter = ',', default_values_t = vec!["ddsm".to_string()])]
    methods: Vec<String>,

    /// Granularities to sweep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![2usize, 4, 8])]
    granularities: Vec<usize>,

    /// Synthetic sample size per repetition.
    #[arg(long, default_value_t = 400)]
    n: u64,

    /// Posterior draws per test.
    #[arg(long)]
    n_draws: Option<u64>,

    /// Repetitions per (method, granularity) cell.
    #[arg(long, default_value_t = 3)]
    repetitions: u32,
}

/// Values accepted from the optional JSON config file.
#[derive(Debug, Default, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    threads: Option<usize>,
    format: Option<String>,
    n_draws: Option<u64>,
}

/// Globals after applying flags > file > defaults.
#[derive(Debug, Serialize)]
struct Resolved {
    seed: u64,
    threads: Option<usize>,
    format: Format,
    n_draws_default: u64,
}

#[derive(Serialize)]
struct OutputDoc<T: Serialize> {
    version: &'static str,
    config: serde_json::Value,
    metadata: serde_json::Value,
    rows: Vec<T>,
}

#[derive(Serialize)]
struct CurveRow {
    method: Method,
    assertion: AssertionKind,
    x: f64,
    p: f64,
    p_plus_r: f64,
    q: f64,
    r: f64,
    se_p: Option<f64>,
    se_q: Option<f64>,
    se_r: Option<f64>,
}

#[derive(Serialize)]
struct LinkageRow {
    kind: &'static str,
    phi0: f64,
    lower_cdf: Option<f64>,
    upper_cdf: Option<f64>,
    p: Option<f64>,
    q: Option<f64>,
    r: Option<f64>,
    se_r: Option<f64>,
}

#[derive(Serialize)]
struct ValidateRow {
    suite: Suite,
    check: String,
    metric: String,
    value: f64,
    threshold: f64,
    pass: bool,
}

#[derive(Serialize)]
struct IndependenceRow {
    granularity: usize,
    n: u64,
    n_draws: u64,
    r: f64,
    standard_error: f64,
    level: f64,
    reject: bool,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let file: FileConfig = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| Error::Usage(format!("bad config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let format = match (cli.format, file.format.as_deref()) {
        (Some(f), _) => f,
        (None, Some("csv")) => Format::Csv,
        (None, Some("json")) => Format::Json,
        (None, Some(other)) => {
            return Err(Error::Usage(format!("unknown format {other:?} in config file")))
        }
        (None, None) => Format::Csv,
    };
    let resolved = Resolved {
        seed: cli.seed.or(file.seed).unwrap_or(17),
        threads: cli.threads.or(file.threads),
        format,
        n_draws_default: file.n_draws.unwrap_or(100_000),
    };
    if let Some(t) = resolved.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Resource(format!("could not build thread pool: {e}")))?;
    }
    let seed = Seed(resolved.seed);
    match &cli.command {
        Command::TrinomialCurves(args) => {
            let n_draws = args.n_draws.unwrap_or(resolved.n_draws_default);
            let rows = trinomial_rows(args, n_draws, seed)?;
            emit(&cli, &resolved, config_json("trinomial-curves", args, n_draws), serde_json::Value::Null, rows)
        }
        Command::LinkageReport(args) => {
            let (meta, rows) = linkage_rows(args, seed)?;
            emit(&cli, &resolved, config_json("linkage-report", args, args.proposals), meta, rows)
        }
        Command::Validate(args) => {
            let n_draws = args.n_draws.unwrap_or(resolved.n_draws_default);
            let rows = validate_rows(args, n_draws, seed)?;
            let failed = rows.iter().filter(|r| !r.pass).count();
            emit(&cli, &resolved, config_json("validate", args, n_draws), serde_json::Value::Null, rows)?;
            if failed > 0 {
                return Err(Error::Domain(format!("{failed} validation checks failed")));
            }
            Ok(())
        }
        Command::Independence(args) => {
            let n_draws = args.n_draws.unwrap_or(resolved.n_draws_default);
            let rows = independence_rows(args, n_draws, seed)?;
            emit(&cli, &resolved, config_json("independence", args, n_draws), serde_json::Value::Null, rows)
        }
        Command::Benchmark(args) => {
            let n_draws = args.n_draws.unwrap_or(10_000);
            let methods = args
                .methods
                .iter()
                .map(|m| match m.as_str() {
                    "ddsm" => Ok(BenchMethod::Ddsm),
                    "simplex" => Ok(BenchMethod::Simplex),
                    other => Err(Error::Usage(format!("unknown method {other:?}"))),
                })
                .collect::<Result<Vec<_>>>()?;
            let rows = runtime_benchmark(
                &methods,
                &args.granularities,
                args.n,
                n_draws,
                args.repetitions,
                seed,
            )?;
            emit(&cli, &resolved, config_json("benchmark", args, n_draws), serde_json::Value::Null, rows)
        }
    }
}

fn config_json<A: Serialize>(subcommand: &str, args: &A, n_draws: u64) -> serde_json::Value {
    serde_json::json!({
        "subcommand": subcommand,
        "args": args,
        "n_draws_resolved": n_draws,
    })
}

fn emit<T: Serialize>(
    cli: &Cli,
    resolved: &Resolved,
    mut config: serde_json::Value,
    metadata: serde_json::Value,
    rows: Vec<T>,
) -> Result<()> {
    config["seed"] = serde_json::json!(resolved.seed);
    config["threads"] = serde_json::json!(resolved.threads);
    let doc = OutputDoc { version: VERSION, config, metadata, rows };
    let text = match resolved.format {
        Format::Json => serde_json::to_string_pretty(&doc)
            .map_err(|e| Error::Resource(format!("JSON serialization failed: {e}")))?,
        Format::Csv => {
            let mut head = String::new();
            head.push_str(&format!("# version: {}\n", doc.version));
            head.push_str(&format!("# config: {}\n", doc.config));
            if !doc.metadata.is_null() {
                head.push_str(&format!("# metadata: {}\n", doc.metadata));
            }
            let mut wtr = csv::Writer::from_writer(Vec::new());
            for row in &doc.rows {
                wtr.serialize(row)
                    .map_err(|e| Error::Resource(format!("CSV serialization failed: {e}")))?;
            }
            let body = wtr
                .into_inner()
                .map_err(|e| Error::Resource(format!("CSV flush failed: {e}")))?;
            head + &String::from_utf8(body).expect("csv output is UTF-8")
        }
    };
    match &cli.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Error::Resource(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|e| Error::Resource(format!("cannot write stdout: {e}")))
        }
    }
}

fn theta0_grid(points: usize) -> Vec<f64> {
    (1..=points).map(|i| i as f64 / (points as f64 + 1.0)).collect()
}

fn r0_grid(points: usize) -> Vec<f64> {
    // geometric sweep 1/16 .. 16
    if points == 1 {
        return vec![1.0];
    }
    (0..points)
        .map(|i| 16f64.powf(2.0 * i as f64 / (points as f64 - 1.0) - 1.0))
        .collect()
}

fn expand_observations(counts: &CountVector) -> Result<ObservationList> {
    let mut obs = Vec::new();
    for (cat, &n) in counts.counts().iter().enumerate() {
        obs.extend(std::iter::repeat_n(cat, n as usize));
    }
    ObservationList::new(obs, counts.k())
}

fn trinomial_rows(args: &TrinomialArgs, n_draws: u64, seed: Seed) -> Result<Vec<CurveRow>> {
    let counts = CountVector::new(args.counts.clone())?;
    if args.cell == 0 || args.cell > counts.k() {
        return Err(Error::Usage(format!(
            "cell {} out of range 1..{}",
            args.cell,
            counts.k()
        )));
    }
    let k = args.cell - 1;
    let thetas = theta0_grid(args.grid_points);
    let r0s = r0_grid(args.r0_points);
    let mut rows = Vec::new();
    let mut sub = 0u64;
    let mut next_seed = || {
        sub += 1;
        Seed(seed.0.wrapping_add(sub.wrapping_mul(0x9e3779b97f4a7c15)))
    };
    for &assertion in &args.assertions {
        for &method in &args.methods {
            match (assertion, method) {
                (AssertionKind::Leq, Method::Ddsm) => {
                    for &t in &thetas {
                        let pqr = pqr_cell_leq(&counts, k, t)?;
                        rows.push(exact_row(method, assertion, t, pqr.p, pqr.q));
                    }
                }
                (AssertionKind::Leq, Method::DdsmMc) => {
                    for &t in &thetas {
                        let s = pqr_cell_leq_mc(&counts, k, t, n_draws, next_seed())?;
                        rows.push(sampled_row(method, assertion, t, &s));
                    }
                }
                (AssertionKind::Leq, Method::Idm) => {
                    for &t in &thetas {
                        let b = idm_cell_leq_bounds(&counts, k, t, 1.0)?;
                        rows.push(exact_row(method, assertion, t, b.lower, 1.0 - b.upper));
                    }
                }
                (AssertionKind::Leq, Method::Jeffreys) => {
                    for &t in &thetas {
                        let p = jeffreys_prob(&counts, k, t)?;
                        rows.push(exact_row(method, assertion, t, p, 1.0 - p));
                    }
                }
                (AssertionKind::Leq, Method::Simplex) => {
                    let obs = expand_observations(&counts)?;
                    for &t in &thetas {
                        let s = pqr_cell_leq_simplex(&obs, k, t, args.n_accepted, next_seed())?;
                        rows.push(sampled_row(method, assertion, t, &s));
                    }
                }
                (AssertionKind::Point, Method::Ddsm | Method::DdsmMc) => {
                    for &t in &thetas {
                        let s = pqr_cell_point(&counts, k, t, n_draws, next_seed())?;
                        rows.push(sampled_row(method, assertion, t, &s));
                    }
                }
                (AssertionKind::Point, Method::Idm | Method::Jeffreys) => {
                    // a continuous posterior puts no mass on a point: the
                    // IDM triple for a point assertion is (0, 1, 0)
                    for &t in &thetas {
                        rows.push(exact_row(method, assertion, t, 0.0, 1.0));
                    }
                }
                (AssertionKind::Point, Method::Simplex) => {
                    let obs = expand_observations(&counts)?;
                    let extremes = cell_extremes(&obs, k, args.n_accepted, next_seed())?;
                    for &t in &thetas {
                        let contain = extremes
                            .iter()
                            .filter(|(a, b)| *a - 1e-9 <= t && t <= *b + 1e-9)
                            .count() as u64;
                        let s = dsmn::dsm::SampledPqr::from_counts(
                            0,
                            args.n_accepted - contain,
                            args.n_accepted,
                            args.n_accepted,
                        );
                        rows.push(sampled_row(method, assertion, t, &s));
                    }
                }
                (AssertionKind::Ratio, Method::Ddsm | Method::DdsmMc) => {
                    for &r0 in &r0s {
                        let s = pqr_conditional_ratio(&counts, r0, n_draws, next_seed())?;
                        rows.push(sampled_row(method, assertion, r0, &s));
                    }
                }
                (AssertionKind::Ratio, Method::Simplex) => {
                    let obs = expand_observations(&counts)?;
                    for &r0 in &r0s {
                        let s =
                            pqr_conditional_ratio_simplex(&obs, r0, args.n_accepted, next_seed())?;
                        rows.push(sampled_row(method, assertion, r0, &s));
                    }
                }
                (AssertionKind::Ratio, Method::Idm | Method::Jeffreys) => {
                    // no conditional-ratio analogue is defined for these
                    // methods; skip silently so --methods stays composable
                }
            }
        }
    }
    Ok(rows)
}

fn exact_row(method: Method, assertion: AssertionKind, x: f64, p: f64, q: f64) -> CurveRow {
    CurveRow {
        method,
        assertion,
        x,
        p,
        p_plus_r: 1.0 - q,
        q,
        r: 1.0 - p - q,
        se_p: None,
        se_q: None,
        se_r: None,
    }
}

fn sampled_row(
    method: Method,
    assertion: AssertionKind,
    x: f64,
    s: &dsmn::dsm::SampledPqr,
) -> CurveRow {
    CurveRow {
        method,
        assertion,
        x,
        p: s.pqr.p,
        p_plus_r: s.pqr.p + s.pqr.r,
        q: s.pqr.q,
        r: s.pqr.r,
        se_p: Some(s.se_p),
        se_q: Some(s.se_q),
        se_r: Some(s.se_r),
    }
}

fn linkage_rows(args: &LinkageArgs, seed: Seed) -> Result<(serde_json::Value, Vec<LinkageRow>)> {
    let counts = CountVector::new(args.counts.clone())?;
    let report = acceptance_rate(&counts, args.proposals, seed)?;
    let grid = theta0_grid(args.grid_points);
    let curve_seed = Seed(seed.0.wrapping_add(1));
    let (lower, upper) = phi_cdf_envelope(&counts, &grid, args.n_accepted, curve_seed)?;
    let mut rows = Vec::new();
    for ((&phi0, &lo), &up) in grid.iter().zip(&lower).zip(&upper) {
        rows.push(LinkageRow {
            kind: "cdf",
            phi0,
            lower_cdf: Some(lo),
            upper_cdf: Some(up),
            p: None,
            q: None,
            r: None,
            se_r: None,
        });
    }
    for &phi0 in &grid {
        let s = pqr_phi_leq(&counts, phi0, args.n_accepted, curve_seed)?;
        rows.push(LinkageRow {
            kind: "pqr_leq",
            phi0,
            lower_cdf: None,
            upper_cdf: None,
            p: Some(s.pqr.p),
            q: Some(s.pqr.q),
            r: Some(s.pqr.r),
            se_r: Some(s.se_r),
        });
        let s = pqr_phi_point(&counts, phi0, args.n_accepted, curve_seed)?;
        rows.push(LinkageRow {
            kind: "pqr_point",
            phi0,
            lower_cdf: None,
            upper_cdf: None,
            p: Some(s.pqr.p),
            q: Some(s.pqr.q),
            r: Some(s.pqr.r),
            se_r: Some(s.se_r),
        });
    }
    let meta = serde_json::json!({ "acceptance": report });
    Ok((meta, rows))
}

fn independence_rows(
    args: &IndependenceArgs,
    n_draws: u64,
    seed: Seed,
) -> Result<Vec<IndependenceRow>> {
    let sample = match (&args.input, args.synthetic) {
        (Some(_), Some(_)) => {
            return Err(Error::Usage("--input and --synthetic are mutually exclusive".into()))
        }
        (Some(path), None) => {
            let file = fs::File::open(path)
                .map_err(|e| Error::Usage(format!("cannot open {}: {e}", path.display())))?;
            read_pairs_csv(file)?
        }
        (None, Some(n)) => {
            let mut stream = Stream::new(Seed(seed.0.wrapping_add(0xA5A5)));
            PairedSample::new((0..n).map(|_| (stream.uniform(), stream.uniform())).collect())?
        }
        (None, None) => {
            return Err(Error::Usage("provide --input FILE or --synthetic N".into()))
        }
    };
    let table = discretize(&sample, args.granularity)?;
    let res = uniformity_plausibility(&table, n_draws, args.level, seed)?;
    Ok(vec![IndependenceRow {
        granularity: args.granularity,
        n: table.n(),
        n_draws: res.n_draws,
        r: res.r,
        standard_error: res.standard_error,
        level: res.level,
        reject: res.reject,
    }])
}

// ---------------------------------------------------------------------------
// validator suites

struct Checker {
    rows: Vec<ValidateRow>,
}

impl Checker {
    fn push(&mut self, suite: Suite, check: &str, metric: &str, value: f64, threshold: f64, pass: bool) {
        let label = if pass { "PASS" } else { "FAIL" };
        eprintln!("{label} [{suite:?}] {check}: {metric} = {value:.6} (threshold {threshold})");
        self.rows.push(ValidateRow {
            suite,
            check: check.to_string(),
            metric: metric.to_string(),
            value,
            threshold,
            pass,
        });
    }

    fn below(&mut self, suite: Suite, check: &str, metric: &str, value: f64, threshold: f64) {
        self.push(suite, check, metric, value, threshold, value < threshold);
    }
}

fn validate_rows(args: &ValidateArgs, n_draws: u64, seed: Seed) -> Result<Vec<ValidateRow>> {
    let suites: Vec<Suite> = if args.all {
        vec![Suite::Theorem1, Suite::Theorem2, Suite::Theorem3, Suite::Rip, Suite::Qmap, Suite::Lp]
    } else if args.suites.is_empty() {
        return Err(Error::Usage("select suites with --suites or run --all".into()));
    } else {
        args.suites.clone()
    };
    let mut c = Checker { rows: Vec::new() };
    for suite in suites {
        match suite {
            Suite::Theorem1 => suite_theorem1(&mut c, n_draws, seed)?,
            Suite::Theorem2 => suite_theorem2(&mut c, n_draws, seed)?,
            Suite::Theorem3 => suite_theorem3(&mut c, n_draws, seed)?,
            Suite::Rip => suite_rip(&mut c, seed)?,
            Suite::Qmap => suite_qmap(&mut c, n_draws, seed)?,
            Suite::Lp => suite_lp(&mut c)?,
        }
    }
    Ok(c.rows)
}

fn suite_theorem1(c: &mut Checker, n_draws: u64, seed: Seed) -> Result<()> {
    for (i, counts) in [vec![1u64, 0, 0], vec![2, 1, 1], vec![25, 3, 4, 7]].iter().enumerate() {
        let cv = CountVector::new(counts.clone())?;
        let report = theorem1_empirical_check(&cv, n_draws, Seed(seed.0 + 1 + i as u64))?;
        let worst = report.ks.iter().cloned().fold(0.0, f64::max);
        c.below(Suite::Theorem1, &format!("counts {counts:?}"), "max KS", worst, 0.01);
    }
    Ok(())
}

fn suite_theorem2(c: &mut Checker, n_draws: u64, seed: Seed) -> Result<()> {
    let mut stream = Stream::new(Seed(seed.0 ^ 0x7431));
    for k in [2usize, 4, 6] {
        for rep in 0..5 {
            let theta_rest = if k == 2 {
                SimplexPoint::new(vec![1.0])?
            } else {
                let alphas = ShapeVector::new(vec![1.0; k - 1])?;
                sample_dirichlet(&alphas, &mut stream)?
            };
            let ks_seed = Seed(seed.0.wrapping_add(100 + (k as u64) * 10 + rep));
            let ks = neutrality_lower_bound_check(&theta_rest, n_draws, ks_seed)?;
            c.below(Suite::Theorem2, &format!("K={k} config {rep}"), "KS", ks, 0.01);
        }
    }
    Ok(())
}

fn suite_theorem3(c: &mut Checker, n_draws: u64, seed: Seed) -> Result<()> {
    for (i, k) in [3usize, 4, 5].iter().enumerate() {
        for (j, p1) in [0.1f64, 0.5, 0.9].iter().enumerate() {
            let s = Seed(seed.0.wrapping_add(200 + (i as u64) * 3 + j as u64));
            let rep = commonality_vacuous_mass(*k, *p1, n_draws, s)?;
            let err = (rep.empirical - rep.analytic).abs();
            let tol = 3.0 * rep.standard_error;
            c.push(
                Suite::Theorem3,
                &format!("K={k} p1={p1}"),
                "|empirical - analytic|",
                err,
                tol,
                err <= tol,
            );
        }
    }
    let four_ninths = (commonality_analytic(3, 0.5)? - 4.0 / 9.0).abs();
    c.below(Suite::Theorem3, "analytic K=3 p1=0.5", "|value - 4/9|", four_ninths, 1e-12);
    // small-p1 trend: analytic -> (K-1)^(-2)
    for k in [3usize, 6, 10] {
        let limit = ((k as f64 - 1.0).powi(2) * commonality_analytic(k, 1e-7)? - 1.0).abs();
        c.below(Suite::Theorem3, &format!("K={k} p1->0 trend"), "relative gap", limit, 1e-3);
    }
    Ok(())
}

fn suite_rip(c: &mut Checker, seed: Seed) -> Result<()> {
    let mut stream = Stream::new(Seed(seed.0 ^ 0x52495));
    for rep in 0..20 {
        let k = 4 + (stream.uniform() * 5.0) as usize; // 4..=8
        let counts: Vec<u64> = (0..k).map(|_| (stream.uniform() * 21.0) as u64).collect();
        let cv = CountVector::new(counts.clone())?;
        let theta0 = 0.2 + 0.6 * stream.uniform();
        // partition keeping category 0 alone and merging the rest into two
        // random groups (falling back to singletons when a group is empty)
        let mut rest: Vec<usize> = (1..k).collect();
        // Fisher-Yates with the stream's uniforms
        for i in (1..rest.len()).rev() {
            let j = (stream.uniform() * (i + 1) as f64) as usize;
            rest.swap(i, j.min(i));
        }
        let cut = 1 + (stream.uniform() * (rest.len() - 1) as f64) as usize;
        let groups = vec![
            vec![0usize],
            rest[..cut].to_vec(),
            rest[cut..].to_vec(),
        ]
        .into_iter()
        .filter(|g| !g.is_empty())
        .collect::<Vec<_>>();
        let partition = Partition::new(groups, k)?;
        let merged = aggregate_counts(&cv, &partition)?;
        let original = pqr_cell_leq(&cv, 0, theta0)?;
        let aggregated = pqr_cell_leq(&merged, 0, theta0)?;
        let gap = (original.p - aggregated.p)
            .abs()
            .max((original.q - aggregated.q).abs())
            .max((original.r - aggregated.r).abs());
        c.below(
            Suite::Rip,
            &format!("merger {rep} counts {counts:?}"),
            "max |pqr gap|",
            gap,
            1e-9,
        );
    }
    Ok(())
}

fn suite_qmap(c: &mut Checker, n_draws: u64, seed: Seed) -> Result<()> {
    let mut stream = Stream::new(Seed(seed.0 ^ 0x514D4150));
    let k = 4;
    let alphas = ShapeVector::new(vec![1.0; k])?;
    let mut pushed = Vec::with_capacity(n_draws as usize);
    for _ in 0..n_draws {
        let theta = sample_dirichlet(&alphas, &mut stream)?;
        let x = (stream.uniform() * k as f64) as usize % k;
        let mut pi: Vec<usize> = (0..k).filter(|&j| j != x).collect();
        for i in (1..pi.len()).rev() {
            let j = (stream.uniform() * (i + 1) as f64) as usize;
            pi.swap(i, j.min(i));
        }
        pi.insert(0, x);
        let u = stream.uniform();
        pushed.push(dsmn::dsm::permutation_pushforward(&theta, &pi, x, u)?);
    }
    let ks = dsmn::ks::ks_distance(&pushed, |x| x.clamp(0.0, 1.0))?;
    c.below(Suite::Qmap, "pushforward uniformity", "KS", ks, 0.006);
    Ok(())
}

fn suite_lp(c: &mut Checker) -> Result<()> {
    // vertex maximum
    let res = solve(&LpProblem {
        dimension: 3,
        constraints: vec![],
        objective: vec![1.0, 0.0, 0.0],
        direction: Direction::Max,
    })?;
    let v = match res {
        LpResult::Optimal { value, .. } => value,
        LpResult::Infeasible => f64::NAN,
    };
    c.below(Suite::Lp, "max theta_1 on bare simplex", "|value - 1|", (v - 1.0).abs(), 1e-9);

    // forced minimum through upper bounds on the other cells
    let res = solve(&LpProblem {
        dimension: 3,
        constraints: vec![
            LinearConstraint::le(vec![1.0, 0.0, 0.0], 0.2),
            LinearConstraint::le(vec![0.0, 1.0, 0.0], 0.2),
        ],
        objective: vec![0.0, 0.0, 1.0],
        direction: Direction::Min,
    })?;
    let v = match res {
        LpResult::Optimal { value, .. } => value,
        LpResult::Infeasible => f64::NAN,
    };
    c.below(Suite::Lp, "forced min theta_3", "|value - 0.6|", (v - 0.6).abs(), 1e-9);

    // infeasible lower bounds
    let infeasible = !feasible(
        &[
            LinearConstraint::le(vec![-1.0, 0.0, 0.0], -0.7),
            LinearConstraint::le(vec![0.0, -1.0, 0.0], -0.7),
        ],
        3,
    )?;
    c.push(
        Suite::Lp,
        "conflicting lower bounds",
        "detected infeasible",
        if infeasible { 1.0 } else { 0.0 },
        0.5,
        infeasible,
    );

    // min f = -max(-f) duality on a pinned problem
    let cons = vec![
        LinearConstraint::le(vec![0.3, -1.0, 0.2], 0.05),
        LinearConstraint::le(vec![-0.5, 0.1, 0.4], 0.1),
    ];
    let objective = vec![0.7, -0.2, 0.4];
    let direct = solve(&LpProblem {
        dimension: 3,
        constraints: cons.clone(),
        objective: objective.clone(),
        direction: Direction::Min,
    })?;
    let negated = solve(&LpProblem {
        dimension: 3,
        constraints: cons,
        objective: objective.iter().map(|c| -c).collect(),
        direction: Direction::Max,
    })?;
    let gap = match (direct, negated) {
        (LpResult::Optimal { value: a, .. }, LpResult::Optimal { value: b, .. }) => (a + b).abs(),
        _ => f64::NAN,
    };
    c.below(Suite::Lp, "min/max duality", "|min f + max -f|", gap, 1e-9);
    Ok(())
}
