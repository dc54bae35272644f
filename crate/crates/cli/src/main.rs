use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use boxcalc::arrangement::Arrangement;
use boxcalc::bernoulli::{w_eval, w_quotient, w_series};
use boxcalc::boxspline::{box_eval, BoxPlan};
use boxcalc::dm::dm_basis;
use boxcalc::exact::{fmt_rat, parse_rat, Rat, RatVec};
use boxcalc::identity::{
    continuous_conv_poly, dm_corollary_check, random_regular_points, semidiscrete_eval, theorem1_check,
    theorem2_check_1d, toric_vertices, twisted_corollary_check, x_of_g, CharacterG, Theorem1,
    VerificationReport,
};
use boxcalc::poly::Poly;

use boxcalc_cli::config::{load_config, LoadedConfig};
use boxcalc_cli::grid::{evaluate, grid_points};

/// `println!` that stays quiet when stdout is a closed pipe.
macro_rules! outln {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

const DEFAULT_SEED: u64 = 1009;

#[derive(Parser)]
#[command(name = "boxcalc", version, about = "Exact box-spline calculus on integer lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Summarize the arrangement of a configuration.
    Describe {
        config: PathBuf,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate B(Y) at a point; Y defaults to the whole list.
    EvalBox {
        config: PathBuf,
        #[arg(long)]
        point: String,
        /// Comma-separated 0-based indices of Y.
        #[arg(long)]
        subset: Option<String>,
    },
    /// Evaluate W(X), or W(X/s) with --span, at a point or print its closed form.
    EvalW {
        config: PathBuf,
        #[arg(long)]
        point: Option<String>,
        #[arg(long)]
        closed_form: bool,
        /// Comma-separated 0-based indices of vectors spanning s.
        #[arg(long)]
        span: Option<String>,
    },
    /// Print a basis of the Dahmen-Micchelli space D(X).
    DmBasis { config: PathBuf },
    /// List the toric vertices g and the sublists X(g).
    ToricVertices { config: PathBuf },
    /// Check an identity exactly at seeded random regular points.
    Verify {
        #[arg(value_enum)]
        kind: VerifyKind,
        config: PathBuf,
        #[arg(long)]
        poly: Option<String>,
        #[arg(long, default_value_t = 20)]
        points: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Explicit points instead of random ones, separated by ';'.
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
        /// Character as comma-separated rationals, e.g. 1/2,1/2.
        #[arg(long)]
        g: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample a function on a rectangular grid and write CSV.
    Grid {
        #[arg(value_enum)]
        function: GridFunction,
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        lo: String,
        #[arg(long, allow_hyphen_values = true)]
        hi: String,
        #[arg(long)]
        step: String,
        #[arg(long)]
        poly: Option<String>,
        #[arg(long)]
        span: Option<String>,
        /// Add an exact p/q column.
        #[arg(long)]
        exact: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyKind {
    Theorem1,
    DmCorollary,
    TwistedCorollary,
    #[value(name = "theorem2-1d")]
    Theorem2_1d,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridFunction {
    Box,
    W,
    WQuotient,
    Semidiscrete,
    Theorem1Diff,
    Theorem1Rhs,
}

/// Failure modes mapped to exit codes.
enum Failure {
    /// Verification ran and found a mismatch.
    Check,
    /// Bad input or a computation refused to run.
    Usage(String),
}

impl From<String> for Failure {
    fn from(s: String) -> Self {
        Failure::Usage(s)
    }
}

impl From<boxcalc::Error> for Failure {
    fn from(e: boxcalc::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn parse_point(s: &str, dim: usize) -> Result<RatVec, String> {
    let v = s.split(',').map(parse_rat).collect::<boxcalc::Result<RatVec>>().map_err(|e| e.to_string())?;
    if v.len() != dim {
        return Err(format!("point {s:?} has {} coordinates, expected {dim}", v.len()));
    }
    Ok(v)
}

fn parse_indices(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<usize>().map_err(|e| format!("index {x:?}: {e}")))
        .collect()
}

fn parse_poly(s: Option<&str>, dim: usize, default: Option<&str>) -> Result<Poly, String> {
    let text = s.or(default).ok_or_else(|| "--poly is required".to_string())?;
    Poly::parse(text, dim).map_err(|e| format!("--poly: {e}"))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct HyperplaneOut {
    normal: Vec<String>,
    generators: Vec<String>,
}

#[derive(Serialize)]
struct DescribeOut {
    vectors: usize,
    dim: usize,
    hyperplanes: Vec<HyperplaneOut>,
    admissible_subspaces: usize,
    cocircuits: Vec<Vec<String>>,
    zonotope_volume: String,
    bases: usize,
    dm_dim: usize,
}

fn describe(loaded: &LoadedConfig, json: bool) -> CmdResult {
    let c = &loaded.config;
    let arr = Arrangement::new(c);
    let names = |ix: &[usize]| -> Vec<String> { ix.iter().map(|&i| loaded.labels[i].clone()).collect() };
    let out = DescribeOut {
        vectors: c.len(),
        dim: c.dim(),
        hyperplanes: arr
            .hyperplanes()
            .iter()
            .map(|h| HyperplaneOut {
                normal: h.normal.iter().map(|x| x.to_string()).collect(),
                generators: names(&h.generators),
            })
            .collect(),
        admissible_subspaces: arr.subspaces().len(),
        cocircuits: arr.cocircuits().iter().map(|y| names(y)).collect(),
        zonotope_volume: fmt_rat(&c.zonotope_volume()),
        bases: c.bases().len(),
        dm_dim: dm_basis(&arr).dim(),
    };
    if json {
        outln!("{}", serde_json::to_string_pretty(&out).map_err(|e| e.to_string())?);
        return Ok(());
    }
    outln!("N = {}, n = {}", out.vectors, out.dim);
    outln!("admissible hyperplanes: {}", out.hyperplanes.len());
    for h in &out.hyperplanes {
        outln!("  normal ({})  contains {}", h.normal.join(","), h.generators.join(" "));
    }
    outln!("admissible subspaces: {}", out.admissible_subspaces);
    let cocircuits: Vec<String> = out.cocircuits.iter().map(|y| format!("{{{}}}", y.join(","))).collect();
    outln!("cocircuits: {}", cocircuits.join(" "));
    outln!("zonotope volume: {}", out.zonotope_volume);
    outln!("bases: {}", out.bases);
    outln!("dim D(X): {}", out.dm_dim);
    Ok(())
}

fn eval_box(loaded: &LoadedConfig, point: &str, subset: Option<&str>) -> CmdResult {
    let c = &loaded.config;
    let arr = Arrangement::new(c);
    let v = parse_point(point, c.dim())?;
    let y = match subset {
        Some(s) => parse_indices(s)?,
        None => (0..c.len()).collect(),
    };
    outln!("{}", fmt_rat(&box_eval(&arr, &y, &v)?));
    Ok(())
}

fn eval_w(loaded: &LoadedConfig, point: Option<&str>, closed_form: bool, span: Option<&str>) -> CmdResult {
    let c = &loaded.config;
    let arr = Arrangement::new(c);
    let expr = match span {
        Some(s) => {
            let ix = parse_indices(s)?;
            c.check_indices(&ix)?;
            w_quotient(&arr, arr.subspace_spanned_by(&ix)?)?
        }
        None => w_series(c),
    };
    if !closed_form && point.is_none() {
        return Err(Failure::Usage("give --point, --closed-form or both".into()));
    }
    if closed_form {
        outln!("{}", expr.to_text("v"));
    }
    if let Some(p) = point {
        let v = parse_point(p, c.dim())?;
        arr.require_regular(&v)?;
        outln!("{}", fmt_rat(&w_eval(&expr, &v)?));
    }
    Ok(())
}

fn print_dm_basis(loaded: &LoadedConfig) -> CmdResult {
    for p in dm_basis(&Arrangement::new(&loaded.config)).basis {
        outln!("{p}");
    }
    Ok(())
}

fn print_toric_vertices(loaded: &LoadedConfig) -> CmdResult {
    let c = &loaded.config;
    for g in toric_vertices(c) {
        let xg: Vec<&str> = x_of_g(c, &g).into_iter().map(|i| loaded.labels[i].as_str()).collect();
        outln!("g = ({g})  X(g) = {{{}}}", xg.join(","));
    }
    Ok(())
}

struct VerifyArgs<'a> {
    poly: Option<&'a str>,
    points: usize,
    seed: u64,
    at: Option<&'a str>,
    g: Option<&'a str>,
    out: Option<&'a Path>,
}

fn verify(kind: VerifyKind, loaded: &LoadedConfig, args: VerifyArgs<'_>) -> CmdResult {
    let c = &loaded.config;
    let arr = Arrangement::new(c);
    let n = c.dim();
    let points = match args.at {
        Some(list) => list
            .split(';')
            .map(|p| parse_point(p.trim(), n))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| format!("--at: {e}"))?,
        None => {
            eprintln!("seed: {}", args.seed);
            random_regular_points(&arr, args.points, args.seed)
        }
    };
    let character = || -> Result<CharacterG, String> {
        let g = CharacterG::parse(args.g.ok_or("--g is required")?).map_err(|e| format!("--g: {e}"))?;
        if g.dim() != n {
            return Err(format!("--g has {} coordinates, expected {n}", g.dim()));
        }
        Ok(g)
    };
    let report: VerificationReport = match kind {
        VerifyKind::Theorem1 => theorem1_check(&arr, &parse_poly(args.poly, n, None)?, &points)?,
        VerifyKind::DmCorollary => dm_corollary_check(&arr, &points)?,
        VerifyKind::TwistedCorollary => {
            twisted_corollary_check(&arr, &character()?, &parse_poly(args.poly, n, Some("1"))?, &points)?
        }
        VerifyKind::Theorem2_1d => theorem2_check_1d(&arr, &character()?, &parse_poly(args.poly, n, None)?, &points)?,
    };
    let mut text = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
    text.push('\n');
    write_output(args.out, &text)?;
    let failures = report.points.iter().filter(|p| !p.pass).count();
    eprintln!(
        "{}: {} of {} checks passed",
        report.kind,
        report.points.len() - failures,
        report.points.len()
    );
    if report.pass {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

struct GridArgs<'a> {
    lo: &'a str,
    hi: &'a str,
    step: &'a str,
    poly: Option<&'a str>,
    span: Option<&'a str>,
    exact: bool,
    out: Option<&'a Path>,
}

fn run_grid(function: GridFunction, loaded: &LoadedConfig, args: GridArgs<'_>) -> CmdResult {
    let c = &loaded.config;
    let n = c.dim();
    let arr = Arrangement::new(c);
    let lo = parse_point(args.lo, n).map_err(|e| format!("--lo: {e}"))?;
    let hi = parse_point(args.hi, n).map_err(|e| format!("--hi: {e}"))?;
    let step = parse_rat(args.step).map_err(|e| format!("--step: {e}"))?;
    let points = grid_points(&lo, &hi, &step)?;
    let regular = |v: &[Rat]| arr.is_regular(v);
    let table = match function {
        GridFunction::Box => {
            let all: Vec<usize> = (0..c.len()).collect();
            let plan = BoxPlan::new(&arr, &all)?.without_cache();
            evaluate(&points, regular, |v| plan.eval(v), args.exact)?
        }
        GridFunction::W => {
            let w = w_series(c);
            evaluate(&points, regular, |v| w_eval(&w, v), args.exact)?
        }
        GridFunction::WQuotient => {
            let ix = parse_indices(args.span.ok_or_else(|| "--span is required".to_string())?)?;
            c.check_indices(&ix)?;
            let w = w_quotient(&arr, arr.subspace_spanned_by(&ix)?)?;
            evaluate(&points, regular, |v| w_eval(&w, v), args.exact)?
        }
        GridFunction::Semidiscrete => {
            let f = parse_poly(args.poly, n, None)?;
            evaluate(&points, regular, |v| semidiscrete_eval(&arr, &f, v), args.exact)?
        }
        GridFunction::Theorem1Diff => {
            let f = parse_poly(args.poly, n, None)?;
            let todd = continuous_conv_poly(c, &f)?;
            evaluate(
                &points,
                regular,
                |v| Ok(semidiscrete_eval(&arr, &f, v)? - todd.eval(v)?),
                args.exact,
            )?
        }
        GridFunction::Theorem1Rhs => {
            let thm = Theorem1::new(&arr, &parse_poly(args.poly, n, None)?)?;
            evaluate(&points, regular, |v| Ok(thm.rhs(v)?.0), args.exact)?
        }
    };
    write_output(args.out, &table.to_csv())?;
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Describe { config, json } => describe(&load_config(&config)?, json),
        Command::EvalBox { config, point, subset } => eval_box(&load_config(&config)?, &point, subset.as_deref()),
        Command::EvalW {
            config,
            point,
            closed_form,
            span,
        } => eval_w(&load_config(&config)?, point.as_deref(), closed_form, span.as_deref()),
        Command::DmBasis { config } => print_dm_basis(&load_config(&config)?),
        Command::ToricVertices { config } => print_toric_vertices(&load_config(&config)?),
        Command::Verify {
            kind,
            config,
            poly,
            points,
            seed,
            at,
            g,
            out,
        } => verify(
            kind,
            &load_config(&config)?,
            VerifyArgs {
                poly: poly.as_deref(),
                points,
                seed,
                at: at.as_deref(),
                g: g.as_deref(),
                out: out.as_deref(),
            },
        ),
        Command::Grid {
            function,
            config,
            lo,
            hi,
            step,
            poly,
            span,
            exact,
            out,
        } => run_grid(
            function,
            &load_config(&config)?,
            GridArgs {
                lo: &lo,
                hi: &hi,
                step: &step,
                poly: poly.as_deref(),
                span: span.as_deref(),
                exact,
                out: out.as_deref(),
            },
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
