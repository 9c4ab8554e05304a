//! `posetlab`: batch driver for the posetlab-core library.
//!
//! Exit codes: 0 on success, 2 when a checked (non-advisory) bound or
//! identity is violated, 1 on usage, parse, or I/O errors.

mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use posetlab_core::{
    bad_superset_census, build_construction, count_copies_fast, edges_via_rank, extremal,
    hamming_edges, improved_lym_sum, isoperi_check, max_p_free, min_copies, sigma, stability_rhs,
    BoundReport, CensusMode, Error, MinCopiesOptions, Poset, PosetSpec, SearchOptions, SetFamily,
    StabilityBound, Strategy, Verdict,
};

use output::{csv_field, Table};

#[derive(Parser, Debug)]
#[command(
    name = "posetlab",
    version,
    about = "Forbidden-subposet workbench for the Boolean lattice"
)]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for data-parallel reductions.
    #[arg(long, global = true, env = "POSETLAB_THREADS")]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Report destination; standard output when absent.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count copies of a poset in a family.
    ///
    /// CSV columns: n,size,poset,copies
    Count {
        #[arg(long)]
        family: PathBuf,
        /// butterfly | chain:K | vee | wedge
        #[arg(long, default_value = "butterfly")]
        poset: String,
    },
    /// Build the middle-layers-plus-code-layer family with E extra sets.
    ///
    /// Writes the family JSON as the report; with --output, also writes
    /// OUTPUT.report.json holding sigma, f, E and butterfly_count.
    /// Exits 2 if the butterfly count differs from E·f(n).
    Construct {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        extra: usize,
        #[arg(long, default_value = "residue")]
        strategy: String,
    },
    /// Evaluate bounds on x(l,m) and g(l,m), or a stability right-hand side.
    ///
    /// CSV columns: name,n,m,lhs,rhs,verdict (n holds l for grid rows).
    Bounds(BoundsArgs),
    /// Edge counts, the isoperimetric check, and bad-superset censuses.
    ///
    /// CSV columns: op,n,k,param,lhs,rhs,verdict
    Iso(IsoArgs),
    /// Exhaustive searches over 2^[n].
    ///
    /// CSV columns: search,n,size,poset,objective,heuristic,family
    Oracle(OracleArgs),
    /// Lubell sum, or the weighted sum over middle sets with --improved.
    ///
    /// CSV columns: n,size,measure,value,verdict (value as p/q).
    Lym {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        improved: bool,
    },
    /// Randomized audits of lower bounds.
    Audit {
        #[command(subcommand)]
        which: AuditCommand,
    },
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// l_min:l_max
    #[arg(long, conflicts_with = "stability")]
    grid: Option<String>,
    /// Log-spaced m values per l.
    #[arg(long, default_value_t = 24)]
    points: usize,
    /// weakstab | spernerstab | butterflystab_4 | butterflystab_6 | cor_butt
    #[arg(long, requires_all = ["n", "m"])]
    stability: Option<String>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    m: Option<u128>,
    /// Measured family size compared against the right-hand side.
    #[arg(long, requires = "stability")]
    size: Option<f64>,
}

#[derive(Args, Debug)]
struct IsoArgs {
    #[arg(long)]
    family: PathBuf,
    #[arg(long)]
    k: u32,
    #[arg(long, group = "mode")]
    delta: Option<f64>,
    #[arg(long, group = "mode")]
    epsilon: Option<f64>,
    #[arg(long, group = "mode")]
    sqrt: bool,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(value_enum)]
    search: OracleSearch,
    #[arg(long)]
    n: u32,
    /// Family size (min-copies only).
    #[arg(long)]
    size: Option<usize>,
    #[arg(long, default_value = "butterfly")]
    poset: String,
    /// Permit the n = 5 exhaustive min-copies search.
    #[arg(long)]
    allow_large: bool,
    /// Directory for per-interval checkpoint files (min-copies only).
    #[arg(long)]
    checkpoint_dir: Option<PathBuf>,
    /// Number of rank intervals (min-copies only).
    #[arg(long)]
    chunks: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OracleSearch {
    MaxFree,
    MinCopies,
}

#[derive(Subcommand, Debug)]
enum AuditCommand {
    /// Random supersets of extremal families against E·f(n).
    ///
    /// CSV columns: name,n,m,lhs,rhs,verdict (m holds E).
    Prop1 {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        e_max: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
}

/// What a subcommand produced: the report and whether a check failed.
struct Outcome {
    table: Table,
    failed: bool,
    sidecar: Option<serde_json::Value>,
}

impl Outcome {
    fn new(table: Table) -> Self {
        Outcome {
            table,
            failed: false,
            sidecar: None,
        }
    }

    fn from_reports(reports: &[BoundReport]) -> Self {
        Outcome {
            failed: reports.iter().any(BoundReport::is_failure),
            table: Table::from_reports(reports),
            sidecar: None,
        }
    }
}

fn read_family(path: &Path) -> Result<SetFamily, Error> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    SetFamily::from_json_str(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn parse_poset(spec: &str) -> Result<Poset, Error> {
    Poset::make(&spec.parse::<PosetSpec>()?)
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    match &cli.command {
        Command::Count { family, poset } => {
            let fam = read_family(family)?;
            let p = parse_poset(poset)?;
            let copies = count_copies_fast(&fam, &p);
            let mut t = Table::new(&["n", "size", "poset", "copies"]);
            t.push(vec![
                fam.n().to_string(),
                fam.len().to_string(),
                p.to_string(),
                copies.to_string(),
            ]);
            Ok(Outcome::new(t))
        }
        Command::Construct { n, extra, strategy } => {
            let strategy: Strategy = strategy.parse()?;
            let fam = build_construction(*n, *extra, strategy)?;
            let count = posetlab_core::count_butterflies(&fam);
            let expected = *extra as u128 * extremal::f(*n);
            let report = serde_json::json!({
                "n": n,
                "strategy": strategy.to_string(),
                "sigma": sigma(*n, 2)?.to_string(),
                "f": extremal::f(*n).to_string(),
                "E": extra,
                "butterfly_count": count.to_string(),
            });
            Ok(Outcome {
                table: Table::raw_json(serde_json::to_value(fam.to_json()).expect("plain data")),
                failed: count.to_u128() != Some(expected),
                sidecar: Some(report),
            })
        }
        Command::Bounds(args) => run_bounds(args),
        Command::Iso(args) => run_iso(args),
        Command::Oracle(args) => run_oracle(args),
        Command::Lym { family, improved } => {
            let fam = read_family(family)?;
            let (measure, value, applies) = if *improved {
                let free = posetlab_core::count_butterflies(&fam).to_u128() == Some(0);
                ("improved-lym", improved_lym_sum(&fam)?, free)
            } else {
                ("lubell", fam.lubell_sum(), fam.is_k_sperner(2))
            };
            let within = value <= posetlab_core::ExactRational::integer(2);
            let verdict = match (applies, within) {
                (false, _) => Verdict::HypothesisNotMet,
                (true, true) => Verdict::Holds,
                (true, false) => Verdict::Violated,
            };
            let mut t = Table::new(&["n", "size", "measure", "value", "verdict"]);
            t.push(vec![
                fam.n().to_string(),
                fam.len().to_string(),
                measure.into(),
                value.to_string(),
                verdict.to_string(),
            ]);
            Ok(Outcome {
                table: t,
                failed: verdict == Verdict::Violated,
                sidecar: None,
            })
        }
        Command::Audit {
            which: AuditCommand::Prop1 { n, e_max, trials },
        } => Ok(Outcome::from_reports(&posetlab_core::audit_prop1(
            *n, *e_max, *trials, cli.seed,
        )?)),
    }
}

fn run_bounds(args: &BoundsArgs) -> Result<Outcome, Error> {
    if let Some(grid) = &args.grid {
        let (lo, hi) = grid
            .split_once(':')
            .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
            .ok_or_else(|| Error::Parse(format!("--grid expects l_min:l_max, got '{grid}'")))?;
        return Ok(Outcome::from_reports(&posetlab_core::bounds::prop_grid(
            lo,
            hi,
            args.points,
        )?));
    }
    let (Some(name), Some(n), Some(m)) = (&args.stability, args.n, args.m) else {
        return Err(Error::Argument(
            "bounds needs --grid or --stability with --n and --m".into(),
        ));
    };
    let bound: StabilityBound = name.parse()?;
    let mut report = stability_rhs(bound, n, m)?;
    if let Some(size) = args.size {
        report = report.measured(size, 0.0, 1.0);
    }
    Ok(Outcome::from_reports(&[report]))
}

fn run_iso(args: &IsoArgs) -> Result<Outcome, Error> {
    let fam = read_family(&args.family)?;
    let k = args.k;
    let mut t = Table::new(&["op", "n", "k", "param", "lhs", "rhs", "verdict"]);
    let mut failed = false;
    let row = |op: &str, param: String, lhs: String, rhs: String, verdict: String| {
        vec![
            op.to_string(),
            fam.n().to_string(),
            k.to_string(),
            param,
            lhs,
            rhs,
            verdict,
        ]
    };
    let edges = hamming_edges(&fam, k)?;
    if fam.is_left_shifted() {
        let via_rank = edges_via_rank(&fam, k)?;
        let verdict = if via_rank == edges {
            Verdict::Holds
        } else {
            Verdict::Violated
        };
        failed |= verdict == Verdict::Violated;
        t.push(row(
            "edges-via-rank",
            String::new(),
            via_rank.to_string(),
            edges.to_string(),
            verdict.to_string(),
        ));
    } else {
        t.push(row(
            "edges",
            String::new(),
            edges.to_string(),
            String::new(),
            Verdict::NotEvaluated.to_string(),
        ));
    }
    if let Some(delta) = args.delta {
        let r = isoperi_check(&fam, k, delta)?;
        failed |= r.is_failure();
        t.push(row(
            "isoperimetry",
            format!("delta={delta}"),
            r.lhs
                .map(posetlab_core::report::format_real)
                .unwrap_or_default(),
            posetlab_core::report::format_real(r.rhs),
            r.verdict.to_string(),
        ));
    }
    let mode = match (args.epsilon, args.sqrt) {
        (Some(e), _) => Some(CensusMode::Epsilon(e)),
        (None, true) => Some(CensusMode::Sqrt),
        _ => None,
    };
    if let Some(mode) = mode {
        let census = bad_superset_census(&fam, k, mode)?;
        for r in census.bound_reports() {
            failed |= r.is_failure();
            t.push(row(
                &r.name,
                mode.to_string(),
                r.lhs
                    .map(posetlab_core::report::format_real)
                    .unwrap_or_default(),
                posetlab_core::report::format_real(r.rhs),
                r.verdict.to_string(),
            ));
        }
    }
    Ok(Outcome {
        table: t,
        failed,
        sidecar: None,
    })
}

fn run_oracle(args: &OracleArgs) -> Result<Outcome, Error> {
    let poset = parse_poset(&args.poset)?;
    let search = SearchOptions {
        allow_large: args.allow_large,
    };
    let (label, witness) = match args.search {
        OracleSearch::MaxFree => ("max-free", max_p_free(args.n, &poset)?),
        OracleSearch::MinCopies => {
            let size = args
                .size
                .ok_or_else(|| Error::Argument("min-copies needs --size".into()))?;
            let opts = MinCopiesOptions {
                search,
                chunks: args.chunks,
                checkpoint_dir: args.checkpoint_dir.clone(),
            };
            ("min-copies", min_copies(args.n, size, &poset, &opts)?)
        }
    };
    let failed = witness.reevaluate(&poset) != witness.objective;
    let mut t = Table::new(&[
        "search",
        "n",
        "size",
        "poset",
        "objective",
        "heuristic",
        "family",
    ]);
    t.push(vec![
        label.into(),
        args.n.to_string(),
        witness.family.len().to_string(),
        poset.to_string(),
        witness.objective.to_string(),
        witness.heuristic.to_string(),
        csv_field(&serde_json::to_string(&witness.family.to_json().sets).expect("plain data")),
    ]);
    t.json = Some(serde_json::to_value(witness.to_json()).expect("plain data"));
    Ok(Outcome {
        table: t,
        failed,
        sidecar: None,
    })
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let text = outcome.table.render(cli.format == Format::Json);
    let mut written = write_text(cli.output.as_deref(), &text);
    if let (Ok(()), Some(side)) = (&written, &outcome.sidecar) {
        let body = serde_json::to_string_pretty(side).expect("plain data") + "\n";
        written = match &cli.output {
            Some(p) => {
                let mut name = p.as_os_str().to_owned();
                name.push(".report.json");
                write_text(Some(Path::new(&name)), &body)
            }
            None => {
                eprint!("{body}");
                Ok(())
            }
        };
    }
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if outcome.failed {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}
