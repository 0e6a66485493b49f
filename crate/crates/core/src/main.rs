use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rct::bench::{self, Workload};
use rct::gen::{self, GenConfig};
use rct::index::{IndexConfig, DEFAULT_PERIOD};
use rct::reference::{ReferenceConfig, DEFAULT_BLOCK_LEN};
use rct::{codec, dataset, Error, Query, RawStore, RctIndex, Region};

#[derive(Parser)]
#[command(name = "rct", version, about = "Compressed trajectory index")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an index file from a CSV of `object_id,timestamp,x,y` rows.
    Build(BuildArgs),
    /// Run one query against an index file (or the raw CSV with --oracle).
    Query(QueryArgs),
    /// Write a synthetic fleet dataset as CSV to standard output.
    Gen(GenArgs),
    /// Measure query latency on a seeded random workload.
    Bench(BenchArgs),
    /// Print size statistics of an index file.
    Stats { index: PathBuf },
}

#[derive(Args)]
struct BuildArgs {
    input: PathBuf,
    output: PathBuf,
    /// Distance between snapshots, in timestamps.
    #[arg(long, default_value_t = DEFAULT_PERIOD)]
    period: u64,
    /// k2-tree arity.
    #[arg(long, default_value_t = 2)]
    k: u32,
    /// Target reference length relative to all movements, `0.1` or `1/10`.
    #[arg(long, default_value = "0.1")]
    ref_fraction: String,
    /// Block length used to assemble the reference.
    #[arg(long, default_value_t = DEFAULT_BLOCK_LEN)]
    block: usize,
}

#[derive(Args)]
struct QueryArgs {
    /// Index file, or a CSV dataset when --oracle is given.
    source: PathBuf,
    /// Answer by brute force over the raw CSV instead of the index.
    #[arg(long)]
    oracle: bool,
    #[command(subcommand)]
    kind: QueryKind,
}

#[derive(Subcommand)]
enum QueryKind {
    SearchObject {
        #[arg(long)]
        id: u64,
        #[arg(long)]
        t: u64,
    },
    Trajectory {
        #[arg(long)]
        id: u64,
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
    },
    TimeSlice {
        /// x1,y1,x2,y2 (inclusive)
        #[arg(long, allow_hyphen_values = true)]
        region: String,
        #[arg(long)]
        t: u64,
    },
    TimeInterval {
        /// x1,y1,x2,y2 (inclusive)
        #[arg(long, allow_hyphen_values = true)]
        region: String,
        #[arg(long)]
        from: u64,
        #[arg(long)]
        to: u64,
    },
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 50)]
    objects: usize,
    /// Movements per object.
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    /// Grid side length.
    #[arg(long, default_value_t = 1024)]
    grid: i64,
    #[arg(long, default_value_t = 4)]
    routes: usize,
    #[arg(long, default_value_t = 0.01)]
    mutation_rate: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    index: PathBuf,
    #[arg(long, default_value_t = 1000)]
    queries: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// One of object, slice, interval; all three when omitted.
    #[arg(long)]
    workload: Option<String>,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::MalformedRegion { .. } | Error::InvalidInterval { .. } => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Data(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match command {
        Command::Build(args) => build(args, &mut out),
        Command::Query(args) => query(args, &mut out),
        Command::Gen(args) => {
            let cfg = GenConfig {
                objects: args.objects,
                steps: args.steps,
                grid: args.grid,
                routes: args.routes,
                mutation_rate: args.mutation_rate,
                seed: args.seed,
            };
            let trajs = gen::generate(&cfg)?;
            dataset::write_csv(&trajs, &mut out)?;
            Ok(())
        }
        Command::Bench(args) => {
            let index = codec::load(&args.index)?;
            let workloads = match &args.workload {
                Some(w) => vec![w.parse::<Workload>()?],
                None => Workload::ALL.to_vec(),
            };
            for w in workloads {
                let report = bench::run(&index, w, args.queries, args.seed)?;
                writeln!(out, "{report}")?;
            }
            Ok(())
        }
        Command::Stats { index } => {
            let bytes = std::fs::metadata(&index)?.len();
            let idx = codec::load(&index)?;
            let s = idx.stats();
            writeln!(
                out,
                "objects={} movements={} reference={} phrases={} snapshots={} speed_max={} index_bytes={}",
                s.objects,
                s.movements,
                s.reference_len,
                s.phrases,
                s.snapshots,
                idx.speed_max(),
                bytes
            )?;
            Ok(())
        }
    }
}

/// Accepts `num/den` or a decimal such as `0.125`.
fn parse_fraction(s: &str) -> Result<(u32, u32), Failure> {
    let bad = || Failure::Usage(format!("invalid --ref-fraction `{s}`"));
    if let Some((n, d)) = s.split_once('/') {
        let n = n.trim().parse().map_err(|_| bad())?;
        let d: u32 = d.trim().parse().map_err(|_| bad())?;
        return if d == 0 { Err(bad()) } else { Ok((n, d)) };
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if int.is_empty() && frac.is_empty() || frac.len() > 9 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let den = 10u64.pow(frac.len() as u32);
    let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let num = int.checked_mul(den).and_then(|v| v.checked_add(frac)).ok_or_else(bad)?;
    let g = gcd(num, den);
    let (num, den) = (num / g, den / g);
    Ok((u32::try_from(num).map_err(|_| bad())?, den as u32))
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a.max(1)
    } else {
        gcd(b, a % b)
    }
}

fn read_dataset(path: &Path) -> Result<(Vec<rct::RawTrajectory>, usize), Failure> {
    let file = File::open(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    Ok(dataset::read_csv(BufReader::new(file))?)
}

fn build(args: BuildArgs, out: &mut impl Write) -> Result<(), Failure> {
    let config = IndexConfig {
        period: args.period,
        arity: args.k,
        reference: ReferenceConfig {
            block_len: args.block,
            ref_fraction: parse_fraction(&args.ref_fraction)?,
        },
        grid: None,
    };
    config.validate()?;
    let (trajs, rows) = read_dataset(&args.input)?;
    let index = RctIndex::build(&trajs, config)?;
    let index_bytes = codec::save(&index, &args.output)?;
    let s = index.stats();
    let input_bytes = 16 * rows;
    writeln!(
        out,
        "objects={} movements={} reference={} phrases={} index_bytes={} input_bytes={} ratio={:.4}",
        s.objects,
        s.movements,
        s.reference_len,
        s.phrases,
        index_bytes,
        input_bytes,
        index_bytes as f64 / input_bytes as f64
    )?;
    Ok(())
}

fn query(args: QueryArgs, out: &mut impl Write) -> Result<(), Failure> {
    let q = match args.kind {
        QueryKind::SearchObject { id, t } => Query::SearchObject { id, t },
        QueryKind::Trajectory { id, from, to } => Query::Trajectory { id, from, to },
        QueryKind::TimeSlice { region, t } => Query::TimeSlice {
            region: region.parse::<Region>()?,
            t,
        },
        QueryKind::TimeInterval { region, from, to } => Query::TimeInterval {
            region: region.parse::<Region>()?,
            from,
            to,
        },
    };
    let result = if args.oracle {
        let (trajs, _) = read_dataset(&args.source)?;
        RawStore::new(trajs).run(&q)?
    } else {
        codec::load(&args.source)?.run(&q)?
    };
    out.write_all(result.render(&q).as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions() {
        assert!(matches!(parse_fraction("0.1"), Ok((1, 10))));
        assert!(matches!(parse_fraction("1/10"), Ok((1, 10))));
        assert!(matches!(parse_fraction("0.125"), Ok((1, 8))));
        assert!(matches!(parse_fraction("1"), Ok((1, 1))));
        assert!(matches!(parse_fraction(".5"), Ok((1, 2))));
        for bad in ["x", "1/0", "0.1.2", "-0.1", ""] {
            assert!(parse_fraction(bad).is_err(), "{bad}");
        }
    }
}
