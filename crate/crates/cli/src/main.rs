use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use zpcm_core::survey::{
    compare_tables, fixtures, parse_family, run_survey, verify_scan, Bounds, FrequencyTable, PolyCache, Profile,
    SurveyConfig, TableFormat, REPRESENTS_BOUND,
};
use zpcm_core::Error;

const EXIT_VIOLATION: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_DIFFERENT: u8 = 1;

#[derive(Parser)]
#[command(name = "cmsurvey", version, about = "Reductions of ring class polynomials at inert primes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tally factor reductions per family and write a frequency table
    Run(RunArgs),
    /// Check linear factor counts, root sides, alpha-perp witnesses and pairings
    Verify(VerifyArgs),
    /// Compare two frequency tables cell by cell
    Compare { a: PathBuf, b: PathBuf },
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long = "p")]
    p: u64,
    #[arg(long, default_value = "desk")]
    profile: String,
    /// Override the profile's class number bound (inclusive)
    #[arg(long)]
    max_h: Option<u64>,
    /// Override the profile's bound on |disc K|
    #[arg(long)]
    max_disc: Option<u64>,
    /// Override the profile's conductor bound
    #[arg(long)]
    max_conductor: Option<u64>,
    /// Class polynomial cache file, created if missing
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

impl ScanArgs {
    fn bounds(&self) -> zpcm_core::Result<Bounds> {
        let mut b = self.profile.parse::<Profile>()?.bounds();
        if let Some(h) = self.max_h {
            b.max_class_number = h;
        }
        if let Some(d) = self.max_disc {
            b.max_fundamental_disc = d;
        }
        if let Some(f) = self.max_conductor {
            b.max_conductor = f;
        }
        Ok(b)
    }

    fn cache(&self) -> zpcm_core::Result<PolyCache> {
        match &self.cache {
            Some(path) => {
                let cache = PolyCache::open(path)?;
                if cache.skipped_lines() > 0 {
                    eprintln!("cache: skipped {} bad lines in {}", cache.skipped_lines(), path.display());
                }
                Ok(cache)
            }
            None => Ok(PolyCache::in_memory()),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scan: ScanArgs,
    /// Column as `name=spec` or a bare spec, e.g. "4||D,2!|f"; repeatable
    #[arg(long = "family")]
    families: Vec<String>,
    /// Take the columns of a reference table (p71-parity, p71-maximal, p71-orders, p59-orders, p41-orders)
    #[arg(long)]
    columns_from: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    scan: ScanArgs,
    /// Restrict the scan to one family
    #[arg(long)]
    family: Option<String>,
    /// Coordinate bound for the first alpha-perp witness search
    #[arg(long, default_value_t = REPRESENTS_BOUND)]
    represents_bound: u64,
    /// Skip the alpha-perp witness search
    #[arg(long)]
    no_represents: bool,
}

fn run(args: RunArgs) -> zpcm_core::Result<u8> {
    let format: TableFormat = args.format.parse()?;
    let mut config = SurveyConfig::new(args.scan.p, args.scan.bounds()?).workers(args.scan.workers);
    if let Some(name) = &args.columns_from {
        for c in fixtures::fixture(name)?.columns() {
            config = config.column(c)?;
        }
    }
    for f in &args.families {
        config = config.column(f)?;
    }
    config.validate()?;
    let cache = args.scan.cache()?;
    let report = run_survey(&config, &cache)?;
    let text = report.table.emit(format);
    match &args.out {
        Some(path) => fs::write(path, &text)?,
        None => print!("{text}"),
    }
    eprintln!("{} orders surveyed", report.orders_surveyed);
    for v in &report.violations {
        eprintln!("VIOLATION {v}");
    }
    Ok(if report.violations.is_empty() { 0 } else { EXIT_VIOLATION })
}

fn verify(args: VerifyArgs) -> zpcm_core::Result<u8> {
    let b = args.scan.bounds()?;
    let filter = match &args.family {
        Some(spec) => parse_family(spec)?.filter(b.max_class_number, b.max_fundamental_disc, b.max_conductor),
        None => b.filter(),
    };
    let cache = args.scan.cache()?;
    let bound = (!args.no_represents).then_some(args.represents_bound);
    if bound == Some(0) {
        return Err(Error::Config("represents bound must be positive".into()));
    }
    let report = verify_scan(args.scan.p, &filter, &cache, args.scan.workers, bound)?;
    print!("{}", report.summary());
    Ok(if report.passed() { 0 } else { EXIT_VIOLATION })
}

fn read_table(path: &Path) -> zpcm_core::Result<FrequencyTable> {
    FrequencyTable::parse(&fs::read_to_string(path)?)
}

fn compare(a: &Path, b: &Path) -> zpcm_core::Result<u8> {
    let diffs = compare_tables(&read_table(a)?, &read_table(b)?)?;
    for d in &diffs {
        println!("{d}");
    }
    if diffs.is_empty() {
        println!("tables agree");
        Ok(0)
    } else {
        println!("{} cells differ", diffs.len());
        Ok(EXIT_DIFFERENT)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Inconsistent(_) => EXIT_VIOLATION,
        _ => EXIT_CONFIG,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Verify(args) => verify(args),
        Command::Compare { a, b } => compare(&a, &b),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
