//! `revca`: generate, verify and catalogue reversible cellular automaton rules.
//!
//! Exit codes: 0 success (or injective, for `verify`), 1 not injective,
//! 2 usage error, 3 pattern validation failure, 4 internal invariant breach.

use std::fs;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use revca::catalog::{self, CatalogEntry, Sweep, DEFAULT_VERIFY_PERIOD};
use revca::engine::{self, Configuration};
use revca::oracle::{self, ExhaustiveOptions, InjectivityVerdict};
use revca::patterns::{self, PatternString};
use revca::rules::{self, RuleTable, WolframNumber};

#[derive(Parser)]
#[command(name = "revca", version, about = "Reversible 1-D cellular automata from injective patterns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List injective patterns of a diameter, or of fixed left/right radii.
    GenPatterns(GenPatterns),
    /// List extended patterns of a diameter.
    GenExtended {
        #[arg(short, long)]
        diameter: usize,
    },
    /// Pattern and extended-pattern counts per diameter.
    Counts {
        #[arg(short, long, default_value_t = 10)]
        max_diameter: usize,
        #[arg(long)]
        json: bool,
    },
    /// Induce a rule from a pattern mixture.
    Induce(Induce),
    /// Decide injectivity of a rule given by its Wolfram number.
    Verify {
        #[arg(short, long)]
        diameter: usize,
        #[arg(short, long)]
        wolfram: String,
        #[arg(long, default_value_t = DEFAULT_VERIFY_PERIOD)]
        max_period: usize,
    },
    /// Exhaustively list injective tables of a small diameter as JSONL.
    Enumerate(Enumerate),
    /// Run a rule on a periodic configuration.
    Simulate(Simulate),
}

#[derive(Args)]
struct GenPatterns {
    #[arg(short, long)]
    diameter: Option<usize>,
    #[arg(short, long)]
    left: Option<usize>,
    #[arg(short, long)]
    right: Option<usize>,
}

#[derive(Args)]
struct Induce {
    /// Patterns forming one mixture, e.g. `0X011` or `a0X011aa`.
    patterns: Vec<String>,
    /// File with one pattern per line, forming one mixture.
    #[arg(long, conflicts_with_all = ["patterns", "batch"])]
    mixture: Option<PathBuf>,
    /// File (or `-` for stdin) with one mixture per line; each line is
    /// induced separately.
    #[arg(long, conflicts_with = "patterns")]
    batch: Option<PathBuf>,
    /// Run the injectivity oracle and periodic checks.
    #[arg(long)]
    verify: bool,
    #[arg(long, default_value_t = DEFAULT_VERIFY_PERIOD)]
    max_period: usize,
    /// Append the resulting entries to this JSONL catalog.
    #[arg(long)]
    catalog: Option<PathBuf>,
}

#[derive(Args)]
struct Enumerate {
    #[arg(short, long)]
    diameter: usize,
    #[arg(long)]
    exclude_trivial: bool,
    /// Allow the diameter-5 sweep (hours of CPU time).
    #[arg(long)]
    allow_long: bool,
    /// Progress file for a resumable sweep; requires --results.
    #[arg(long, requires = "results")]
    progress: Option<PathBuf>,
    /// Append-only results catalog for a resumable sweep.
    #[arg(long, requires = "progress")]
    results: Option<PathBuf>,
}

#[derive(Args)]
struct Simulate {
    #[arg(short, long)]
    diameter: Option<usize>,
    /// Rule from a mixture of patterns.
    #[arg(short, long = "pattern", conflicts_with = "wolfram")]
    patterns: Vec<String>,
    /// Rule from a Wolfram number (requires --diameter).
    #[arg(short, long)]
    wolfram: Option<String>,
    /// Output cell position for a rule given by number; defaults to the centre.
    #[arg(long)]
    anchor: Option<usize>,
    #[arg(long)]
    init: String,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    /// Write a plain PBM raster instead of printing rows.
    #[arg(long)]
    pbm: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    NotInjective,
    Usage(String),
    Validation(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::NotInjective => 1,
            Failure::Usage(_) => 2,
            Failure::Validation(_) => 3,
            Failure::Internal(_) => 4,
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("REVCA_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: REVCA_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let result = match cli.command {
        Command::GenPatterns(args) => gen_patterns(&mut out, args),
        Command::GenExtended { diameter } => gen_extended(&mut out, diameter),
        Command::Counts { max_diameter, json } => counts(&mut out, max_diameter, json),
        Command::Induce(args) => induce(&mut out, args),
        Command::Verify {
            diameter,
            wolfram,
            max_period,
        } => verify(&mut out, diameter, &wolfram, max_period),
        Command::Enumerate(args) => enumerate(&mut out, args),
        Command::Simulate(args) => simulate(&mut out, args),
    };
    let flushed = out.flush();
    match result.and(flushed.map_err(Failure::from)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::NotInjective => {}
                Failure::Usage(m) | Failure::Validation(m) => eprintln!("error: {m}"),
                Failure::Internal(m) => eprintln!("INTERNAL ERROR (implementation bug): {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn print_patterns(out: &mut impl Write, list: &[PatternString]) -> CliResult {
    for p in list {
        writeln!(out, "{p}")?;
    }
    writeln!(out, "# count: {}", list.len())?;
    Ok(())
}

fn gen_patterns(out: &mut impl Write, args: GenPatterns) -> CliResult {
    let list = match (args.diameter, args.left, args.right) {
        (d, Some(l), Some(r)) => {
            if d.is_some_and(|d| d != l + r + 1) {
                return Err(usage("--diameter must equal left + right + 1"));
            }
            patterns::generate_injective_patterns(l, r)
        }
        (Some(d), None, None) if d >= 1 => patterns::generate_all_patterns(d),
        (Some(_), None, None) => return Err(usage("diameter must be at least 1")),
        _ => return Err(usage("give --diameter, or both --left and --right")),
    };
    print_patterns(out, &list)
}

fn gen_extended(out: &mut impl Write, diameter: usize) -> CliResult {
    if diameter == 0 {
        return Err(usage("diameter must be at least 1"));
    }
    print_patterns(out, &patterns::enumerate_extended(diameter))
}

fn counts(out: &mut impl Write, max_diameter: usize, json: bool) -> CliResult {
    if !(3..=12).contains(&max_diameter) {
        return Err(usage("--max-diameter must be within 3..=12"));
    }
    let rows: Vec<(usize, usize, usize)> = (3..=max_diameter)
        .map(|n| {
            (
                n,
                patterns::generate_all_patterns(n).len(),
                patterns::enumerate_extended(n).len(),
            )
        })
        .collect();
    if json {
        let value: Vec<serde_json::Value> = rows
            .iter()
            .map(|&(n, p, e)| {
                serde_json::json!({
                    "diameter": n,
                    "injective_patterns": p,
                    "extended_patterns": e,
                })
            })
            .collect();
        writeln!(out, "{}", serde_json::Value::Array(value))?;
    } else {
        writeln!(out, "{:>2} {:>10} {:>10}", "N", "injective", "extended")?;
        for (n, p, e) in rows {
            writeln!(out, "{n:>2} {p:>10} {e:>10}")?;
        }
    }
    Ok(())
}

fn parse_patterns<S: AsRef<str>>(texts: &[S]) -> Result<Vec<PatternString>, Failure> {
    texts
        .iter()
        .map(|t| {
            let t = t.as_ref();
            t.parse::<PatternString>()
                .map_err(|e| usage(format!("pattern {t:?}: {e}")))
        })
        .collect()
}

fn read_lines(path: &Path) -> Result<Vec<String>, Failure> {
    let lines: Vec<String> = if path == Path::new("-") {
        io::stdin().lock().lines().collect::<Result<_, _>>()?
    } else {
        fs::read_to_string(path)
            .map_err(|e| usage(format!("{}: {e}", path.display())))?
            .lines()
            .map(str::to_string)
            .collect()
    };
    Ok(lines
        .into_iter()
        .map(|l| l.split('#').next().unwrap_or("").trim().to_string())
        .filter(|l| !l.is_empty())
        .collect())
}

fn induce(out: &mut impl Write, args: Induce) -> CliResult {
    let mixtures: Vec<Vec<String>> = if let Some(path) = &args.mixture {
        vec![read_lines(path)?
            .iter()
            .flat_map(|l| l.split_whitespace().map(str::to_string))
            .collect()]
    } else if let Some(path) = &args.batch {
        read_lines(path)?
            .iter()
            .map(|l| l.split_whitespace().map(str::to_string).collect())
            .collect()
    } else {
        vec![args.patterns.clone()]
    };
    if mixtures.iter().any(Vec::is_empty) {
        return Err(usage("no patterns given"));
    }

    let mut entries = Vec::with_capacity(mixtures.len());
    for texts in &mixtures {
        let candidates = parse_patterns(texts)?;
        let mixture = patterns::build_mixture(&candidates).map_err(|e| Failure::Validation(e.to_string()))?;
        let rule = rules::induce(&mixture).map_err(|e| Failure::Internal(e.to_string()))?;
        let provenance = mixture.members().iter().map(|p| p.to_string()).collect();
        let mut entry = CatalogEntry::new(&rule, provenance);
        if args.verify {
            let v = catalog::verify_entry(&mut entry, args.max_period)
                .map_err(|e| Failure::Internal(e.to_string()))?;
            let involution = catalog::involution_up_to(&rule, v.checked_to);
            if !v.passed() || !involution {
                return Err(Failure::Internal(format!(
                    "rule induced by {} failed verification (pair graph: {}, bijective up to n = {}, involution: {involution})",
                    texts.join(" "),
                    v.debruijn,
                    v.periodic_to
                )));
            }
        }
        serde_json::to_writer(&mut *out, &entry).map_err(usage)?;
        writeln!(out)?;
        entries.push(entry);
    }
    if let Some(path) = &args.catalog {
        let stamp = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
        let stamped: Vec<CatalogEntry> = entries.into_iter().map(|e| e.with_timestamp(stamp.clone())).collect();
        catalog::append_entries(path, &stamped).map_err(usage)?;
    }
    Ok(())
}

fn rule_from_number(diameter: usize, text: &str) -> Result<RuleTable, Failure> {
    let w: WolframNumber = text.parse().map_err(usage)?;
    rules::from_wolfram(diameter, &w).map_err(usage)
}

fn verify(out: &mut impl Write, diameter: usize, wolfram: &str, max_period: usize) -> CliResult {
    let rule = rule_from_number(diameter, wolfram)?;
    let record = rules::RuleRecord::new(&rule, Vec::new());
    writeln!(out, "rule: {} (hex {}, diameter {diameter})", record.wolfram_decimal, record.table_hex)?;
    let verdict = oracle::debruijn_injective(&rule);
    let v = catalog::verify(&rule, max_period);
    match &verdict {
        InjectivityVerdict::Injective => writeln!(out, "verdict: injective")?,
        InjectivityVerdict::NotInjective { witness: (a, b) } => {
            writeln!(out, "verdict: not injective")?;
            writeln!(out, "witness: {a} {b} -> {}", engine::step(&rule, a))?;
        }
    }
    writeln!(out, "classification: {}", v.triviality)?;
    writeln!(out, "balanced: {}", v.balanced)?;
    if v.periodic_to == v.checked_to {
        writeln!(out, "periodic: bijective for n = 1..={}", v.checked_to)?;
    } else {
        writeln!(out, "periodic: not bijective at n = {}", v.periodic_to + 1)?;
    }
    if verdict.is_injective() && v.periodic_to != v.checked_to {
        return Err(Failure::Internal("pair-graph verdict contradicts periodic check".into()));
    }
    if verdict.is_injective() {
        Ok(())
    } else {
        Err(Failure::NotInjective)
    }
}

fn enumerate(out: &mut impl Write, args: Enumerate) -> CliResult {
    let opts = ExhaustiveOptions {
        exclude_trivial: args.exclude_trivial,
        allow_long: args.allow_long,
    };
    match args.diameter {
        1..=4 => {}
        5 if args.allow_long => {}
        5 => return Err(usage("diameter 5 sweeps take hours; pass --allow-long")),
        d => return Err(usage(format!("exhaustive sweep at diameter {d} is infeasible"))),
    }
    if let (Some(progress), Some(results)) = (&args.progress, &args.results) {
        let sweep = Sweep {
            progress_path: progress,
            results_path: results,
            chunk: 1 << 20,
        };
        let mut failed = None;
        sweep
            .run(args.diameter, args.exclude_trivial, None, |e| {
                if failed.is_none() {
                    failed = write_entry(out, e).err();
                }
            })
            .map_err(usage)?;
        return failed.map_or(Ok(()), Err);
    }
    let tables = oracle::exhaustive_injective(args.diameter, opts).map_err(usage)?;
    for t in tables {
        let mut e = CatalogEntry::new(&t, Vec::new());
        e.verified_debruijn = true;
        write_entry(out, &e)?;
    }
    Ok(())
}

fn write_entry(out: &mut impl Write, e: &CatalogEntry) -> CliResult {
    serde_json::to_writer(&mut *out, e).map_err(usage)?;
    writeln!(out)?;
    Ok(())
}

fn simulate(out: &mut impl Write, args: Simulate) -> CliResult {
    let init: Configuration = args.init.parse().map_err(usage)?;
    let rule = if let Some(w) = &args.wolfram {
        let d = args.diameter.ok_or_else(|| usage("--wolfram requires --diameter"))?;
        let rule = rule_from_number(d, w)?;
        match args.anchor {
            Some(a) => rule.with_anchor(a).map_err(usage)?,
            None => rule,
        }
    } else if !args.patterns.is_empty() {
        let candidates = parse_patterns(&args.patterns)?;
        let mixture = patterns::build_mixture(&candidates).map_err(|e| Failure::Validation(e.to_string()))?;
        if args.diameter.is_some_and(|d| d != mixture.diameter()) {
            return Err(usage("--diameter does not match the pattern length"));
        }
        rules::induce(&mixture).map_err(|e| Failure::Internal(e.to_string()))?
    } else {
        return Err(usage("give --pattern or --wolfram"));
    };
    let rows = engine::run(&rule, &init, args.steps);
    match &args.pbm {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            engine::write_pbm(BufWriter::new(file), &rows)?;
        }
        None => {
            for row in &rows {
                writeln!(out, "{row}")?;
            }
        }
    }
    Ok(())
}
