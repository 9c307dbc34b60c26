use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;

use lattice_mass::mass::{solve_masses, verify_total, MassError, MassTable, SolveOptions};
use lattice_mass::reduce::{class_bound_even, class_lower_bound, reduce_masses, BoundReport, ReduceError};
use lattice_mass::scalar::parse_rational;
use lattice_mass::siegel::{a_average, a_average_gram, f_p_eval, f_p_polynomial, SiegelError};
use lattice_mass::table::{self, Format};
use lattice_mass::{rep_count, Filters, HalfIntegralMatrix, RootSystem};

#[derive(Parser)]
#[command(name = "lattice-mass", version, about = "Exact masses of unimodular lattices by root system")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// Output format (tables default to json; single values print bare).
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for cached tables and checkpoints.
    #[arg(long, global = true, env = "LATTICE_MASS_CACHE")]
    cache: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
    Tsv,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
            OutFormat::Tsv => Format::Tsv,
        }
    }
}

#[derive(Args, Clone)]
struct SolveArgs {
    /// Lattice dimension: 8, 16, 24 or 32.
    #[arg(long)]
    dim: u32,
    /// Enumerate root systems only up to this rank (masses need full rank).
    #[arg(long)]
    max_rank: Option<usize>,
    /// Keep systems the congruence and square-determinant filters would drop.
    #[arg(long)]
    no_filters: bool,
    /// Persist solver progress every N root systems.
    #[arg(long, value_name = "N")]
    checkpoint_every: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Mass of even unimodular lattices for every root system.
    Mass {
        #[command(flatten)]
        solve: SolveArgs,
        /// Include zero masses.
        #[arg(long)]
        all: bool,
        /// Check the mass sum and signs before printing.
        #[arg(long)]
        verify: bool,
    },
    /// Genus-average representation number a(N).
    Coeff {
        /// Root system, Gram-matrix file, or inline Gram matrix.
        input: String,
        #[arg(long)]
        dim: u32,
    },
    /// Masses of odd lattices of minimal norm 2 derived from an even table.
    Reduce {
        /// Even dimension to reduce from.
        #[arg(long, default_value_t = 24)]
        base: u32,
        /// Only report this odd dimension.
        #[arg(long)]
        dim: Option<usize>,
        /// Read the even table from a JSON file instead of solving.
        #[arg(long)]
        from_table: Option<PathBuf>,
    },
    /// Class-number lower bounds.
    Bounds {
        #[arg(long, default_value_t = 24)]
        base: u32,
        /// Only report this dimension (default: all).
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Number of embeddings of one root system into another.
    Emb { source: String, target: String },
    /// Local polynomial F_p(B; X) of the Siegel series.
    Siegel {
        #[arg(long)]
        p: u64,
        /// Entries of the half-integral matrix B, e.g. "(4)" or "1 1/2; 1/2 1".
        #[arg(long)]
        gram: String,
        /// Evaluate at X (default: print the coefficients).
        #[arg(long)]
        x: Option<String>,
    },
    /// Check a mass table: sum equals the genus mass, no negative entries.
    Verify {
        #[arg(long, conflicts_with = "from_table")]
        dim: Option<u32>,
        #[arg(long)]
        from_table: Option<PathBuf>,
    },
}

enum Failure {
    Config(String),
    Consistency(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Consistency(_) => 3,
            Failure::Other(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Consistency(m) | Failure::Other(m) => m,
        }
    }
}

impl From<MassError> for Failure {
    fn from(e: MassError) -> Self {
        match e {
            MassError::BadDimension(_) | MassError::BadMaxRank { .. } => Failure::Config(e.to_string()),
            MassError::NegativeMass { .. } => Failure::Consistency(e.to_string()),
            MassError::Siegel(s) => s.into(),
            MassError::Checkpoint { .. } => Failure::Other(e.to_string()),
        }
    }
}

impl From<SiegelError> for Failure {
    fn from(e: SiegelError) -> Self {
        match e {
            SiegelError::Impure(_) => Failure::Consistency(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<ReduceError> for Failure {
    fn from(e: ReduceError) -> Self {
        match e {
            ReduceError::Negative { .. } | ReduceError::ClosedForm { .. } => Failure::Consistency(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn config<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Config(e.to_string())
}

fn check_dim(dim: u32) -> Result<(), Failure> {
    if ![8, 16, 24, 32].contains(&dim) {
        return Err(Failure::Config(format!("dimension must be 8, 16, 24 or 32, not {dim}")));
    }
    Ok(())
}

fn filters(no_filters: bool) -> Filters {
    if no_filters {
        Filters::NONE
    } else {
        Filters::ALL
    }
}

fn cache_file(cache: Option<&Path>, stem: &str, dim: u32, f: Filters) -> Option<PathBuf> {
    let tag = if f == Filters::ALL { "" } else { "-unfiltered" };
    cache.map(|d| d.join(format!("{stem}-{dim}{tag}.json")))
}

/// Solves (or loads from the cache) the even table for `args`.
fn even_table(args: &SolveArgs, cache: Option<&Path>) -> Result<MassTable, Failure> {
    check_dim(args.dim)?;
    let f = filters(args.no_filters);
    let max_rank = args.max_rank.unwrap_or(args.dim as usize);
    if max_rank > args.dim as usize {
        return Err(Failure::Config(format!("--max-rank {max_rank} exceeds --dim {}", args.dim)));
    }
    let full = max_rank == args.dim as usize;
    let cached = if full { cache_file(cache, "mass", args.dim, f) } else { None };
    if let Some(path) = &cached {
        if let Ok(text) = fs::read_to_string(path) {
            match table::mass_table_from_json(&text) {
                Ok(t) if t.dim == args.dim && t.filters == f && t.is_complete() => return Ok(t),
                _ => eprintln!("ignoring stale cache {}", path.display()),
            }
        }
    }
    let checkpoint = match (cache_file(cache, "checkpoint", args.dim, f), args.checkpoint_every) {
        (Some(p), _) => Some(p),
        (None, Some(_)) => Some(PathBuf::from(format!("lattice-mass-checkpoint-{}.json", args.dim))),
        (None, None) => None,
    };
    let opts = SolveOptions {
        max_rank: Some(max_rank),
        filters: f,
        checkpoint: if full { checkpoint } else { None },
        checkpoint_every: args.checkpoint_every.unwrap_or(0),
        ..SolveOptions::default()
    };
    let t = solve_masses(args.dim, &opts)?;
    if let Some(path) = &cached {
        let written = path.parent().map_or(Ok(()), fs::create_dir_all).and_then(|_| fs::write(path, table::mass_table_to_json(&t, true)));
        if let Err(e) = written {
            eprintln!("could not write cache {}: {e}", path.display());
        }
    }
    Ok(t)
}

fn simple_solve(dim: u32) -> SolveArgs {
    SolveArgs { dim, max_rank: None, no_filters: false, checkpoint_every: None }
}

/// Parses "(4)", "1 1/2; 1/2 1", "[[2,-1],[-1,2]]" or one row per line.
fn parse_matrix(text: &str) -> Result<Vec<Vec<BigRational>>, Failure> {
    let flat = text.replace("],", ";").replace('\n', ";");
    let cleaned: String = flat.chars().filter(|c| !"()[]".contains(*c)).collect();
    let rows: Vec<Vec<BigRational>> = cleaned
        .split(';')
        .map(|r| {
            r.split(|c: char| c.is_whitespace() || c == ',')
                .filter(|t| !t.is_empty())
                .map(|t| parse_rational(t).ok_or_else(|| Failure::Config(format!("bad matrix entry {t:?}"))))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .filter(|r| !r.is_empty())
        .collect();
    if rows.iter().any(|r| r.len() != rows.len()) {
        return Err(Failure::Config("matrix must be square".into()));
    }
    Ok(rows)
}

fn integral(rows: Vec<Vec<BigRational>>) -> Result<Vec<Vec<BigInt>>, Failure> {
    rows.into_iter()
        .map(|r| {
            r.into_iter()
                .map(|x| if x.is_integer() { Ok(x.to_integer()) } else { Err(Failure::Config("Gram matrix must be integral".into())) })
                .collect()
        })
        .collect()
}

fn parse_system(s: &str) -> Result<RootSystem, Failure> {
    s.parse().map_err(config)
}

fn run(cli: Cli) -> Result<String, Failure> {
    if let Some(n) = cli.common.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(config)?;
    }
    let cache = cli.common.cache.as_deref();
    let fmt = cli.common.format.map(Format::from);
    let table_fmt = fmt.unwrap_or(Format::Json);
    match cli.cmd {
        Cmd::Mass { solve, all, verify } => {
            let t = even_table(&solve, cache)?;
            if verify {
                let bad = verify_total(&t);
                if !bad.is_empty() {
                    return Err(Failure::Consistency(bad.join("\n")));
                }
            }
            Ok(table::emit_mass_table(&t, all, table_fmt))
        }
        Cmd::Coeff { input, dim } => {
            check_dim(dim)?;
            let value = if let Ok(r) = input.parse::<RootSystem>() {
                a_average(&r, dim)?
            } else {
                let text = if Path::new(&input).is_file() {
                    fs::read_to_string(&input).map_err(|e| Failure::Other(e.to_string()))?
                } else {
                    input.clone()
                };
                let gram = HalfIntegralMatrix::from_gram(integral(parse_matrix(&text)?)?).map_err(config)?;
                a_average_gram(&gram, dim)?
            };
            Ok(table::emit_value("coefficient", &value, fmt))
        }
        Cmd::Reduce { base, dim, from_table } => {
            let even = match from_table {
                Some(path) => {
                    let text = fs::read_to_string(&path).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))?;
                    table::mass_table_from_json(&text).map_err(config)?
                }
                None => even_table(&simple_solve(base), cache)?,
            };
            let mut odd = reduce_masses(&even)?;
            if let Some(n) = dim {
                odd.entries.retain(|(m, _), _| *m == n);
            }
            Ok(table::emit_odd_table(&odd, table_fmt))
        }
        Cmd::Bounds { base, dim } => {
            check_dim(base)?;
            let even = even_table(&simple_solve(base), cache)?;
            let lower = (1..(base / 8).saturating_sub(1)).map(|j| even_table(&simple_solve(8 * j), cache)).collect::<Result<Vec<_>, _>>()?;
            let refs: Vec<&MassTable> = lower.iter().collect();
            let odd = reduce_masses(&even)?;
            let dims: Vec<usize> = match dim {
                Some(n) => vec![n],
                None => (1..=base as usize - 2).chain([base as usize]).collect(),
            };
            let mut reports = Vec::new();
            for n in dims {
                if n == base as usize {
                    let nz = even.nonzero().count();
                    reports.push(BoundReport { n, beta: class_bound_even(&even), root_systems: nz, mass: even.total.clone() });
                } else {
                    reports.push(class_lower_bound(&odd, n, &refs)?);
                }
            }
            if dim.is_some() && fmt.is_none() {
                return Ok(reports[0].beta.to_string());
            }
            Ok(table::emit_bounds(base, &reports, table_fmt))
        }
        Cmd::Emb { source, target } => {
            let n = rep_count(&parse_system(&source)?, &parse_system(&target)?);
            Ok(table::emit_integer("count", &BigInt::from(n), fmt))
        }
        Cmd::Siegel { p, gram, x } => {
            let b = HalfIntegralMatrix::from_entries(&parse_matrix(&gram)?).map_err(config)?;
            match x {
                Some(x) => {
                    let x = parse_rational(&x).ok_or_else(|| Failure::Config(format!("bad rational {x:?}")))?;
                    Ok(table::emit_value("value", &f_p_eval(&b, p, &x)?, fmt))
                }
                None => {
                    let coeffs = f_p_polynomial(&b, p)?;
                    Ok(coeffs.iter().map(lattice_mass::scalar::format_rational).collect::<Vec<_>>().join(" "))
                }
            }
        }
        Cmd::Verify { dim, from_table } => {
            let t = match (dim, from_table) {
                (_, Some(path)) => {
                    let text = fs::read_to_string(&path).map_err(|e| Failure::Other(format!("{}: {e}", path.display())))?;
                    table::mass_table_from_json(&text).map_err(config)?
                }
                (Some(d), None) => even_table(&simple_solve(d), cache)?,
                (None, None) => return Err(Failure::Config("verify needs --dim or --from-table".into())),
            };
            let bad = verify_total(&t);
            if bad.is_empty() {
                Ok(format!("ok: {} nonzero masses sum to the genus mass", t.nonzero().count()))
            } else {
                Err(Failure::Consistency(bad.join("\n")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(out) => {
            if out.ends_with('\n') {
                print!("{out}");
            } else {
                println!("{out}");
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
