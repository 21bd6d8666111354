//! `decluster`: generate, verify and evaluate declustering schemes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use decluster::discrepancy::{tiled_box_counts, witness_pipeline};
use decluster::schemegen::{
    append_sweep_csv, build_net, export_map, read_scheme, run_sweep, verify_scheme, write_scheme, SweepConfig,
};
use decluster::{disc_report, generate_scheme, verify_net, Budget, Error, GridBox, Mode, Scheme};

#[derive(Parser)]
#[command(name = "decluster", version, about = "Declustering schemes for grid data on M parallel disks")]
struct Cli {
    /// Bound on N^d * M for exact evaluation (overrides DECLUSTER_MAX_CELLS).
    #[arg(long, global = true)]
    max_cells: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a scheme and write scheme.json.
    Generate {
        #[arg(long)]
        disks: u32,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        mode: Mode,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the latin property and re-verify the recorded net (exit 0 pass, 1 fail).
    Verify {
        #[arg(long)]
        scheme: PathBuf,
    },
    /// Construct a (0,m,d)-net in base b and verify it.
    Net {
        #[arg(long)]
        base: u32,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact disc and disc+ over all boxes of [N]^d.
    Evaluate {
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long)]
        extent: u64,
        #[arg(long)]
        positive_only: bool,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Response time and per-disk counts of one range query.
    Query {
        #[arg(long)]
        scheme: PathBuf,
        /// Inclusive ranges, e.g. "1:4,2:7".
        #[arg(long = "box")]
        query: GridBox,
    },
    /// Write the block-to-disk map of [N]^d as CSV.
    ExportMap {
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long)]
        extent: u64,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Certify a box with positive deviation.
    Witness {
        #[arg(long)]
        scheme: PathBuf,
    },
    /// Evaluate many (M, d, mode) cells at N = k M and append rows to a CSV.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',')]
    dims: Vec<usize>,
    /// Inclusive range "lo..hi" or a single value.
    #[arg(long)]
    disks: String,
    #[arg(long, value_delimiter = ',')]
    modes: Vec<Mode>,
    #[arg(long)]
    extent_multiplier: u64,
    #[arg(long)]
    csv: PathBuf,
    /// Seed for random-mode cells.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn budget(cli_value: Option<u64>) -> Result<Budget, Error> {
    match cli_value {
        Some(max_cells) => Ok(Budget { max_cells }),
        None => Budget::from_env(),
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let budget = budget(cli.max_cells)?;
    match cli.command {
        Command::Generate { disks, dim, mode, seed, out } => {
            let s = generate_scheme(disks, dim, mode, seed)?;
            write_scheme(&s, &out)?;
            for w in &s.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {} (M={disks} d={dim} mode={})", out.display(), s.mode);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { scheme } => {
            let s = read_scheme(&scheme)?;
            let check = verify_scheme(&s);
            println!("latin: {} ({} rows checked)", verdict(check.latin.passed()), check.latin.rows_checked);
            if let Some(v) = &check.latin.violation {
                println!("  axis-{} row at {:?} has colors {:?}", v.axis, v.start, v.colors);
            }
            match &check.net {
                Some(Ok(())) => println!("net: PASS"),
                Some(Err(msg)) => println!("net: FAIL ({msg})"),
                None => println!("net: none recorded"),
            }
            if let Some(r) = check.reproducible {
                println!("regenerated from provenance: {}", verdict(r));
            }
            Ok(exit(check.passed()))
        }
        Command::Net { base, m, dim, out } => match build_net(base, m, dim) {
            Ok(net) => {
                let report = verify_net(&net, 0)?;
                println!(
                    "(0,{m},{dim})-net in base {base}: {} ({} intervals checked)",
                    verdict(report.passed()),
                    report.intervals_checked
                );
                if let Some(v) = &report.violation {
                    println!("first violation: {} holds {} points, expected {}", v.interval, v.count, v.expected);
                }
                if let Some(path) = out {
                    std::fs::write(&path, serde_json::to_string(&net.to_file())? + "\n")?;
                }
                Ok(exit(report.passed()))
            }
            Err(Error::ConstructionInvalid { interval, count, .. }) => {
                println!("(0,{m},{dim})-net in base {base}: FAIL");
                println!("first violation: {interval} holds {count} points, expected 1");
                Ok(exit(false))
            }
            Err(e) => Err(e),
        },
        Command::Evaluate { scheme, extent, positive_only, report } => {
            let s = read_scheme(&scheme)?;
            let r = disc_report(&s, extent, positive_only, &budget)?;
            println!("M={} d={} N={extent} mode={}", s.disks(), s.dim(), s.mode);
            if let (Some(disc), Some(w)) = (r.disc, &r.disc_witness) {
                println!("disc  = {disc} (num {} / {}) at {} color {}", disc.num, disc.den, w.grid_box(), w.color);
            }
            let w = &r.disc_plus_witness;
            println!(
                "disc+ = {} (num {} / {}) at {} color {}",
                r.disc_plus,
                r.disc_plus.num,
                r.disc_plus.den,
                w.grid_box(),
                w.color
            );
            println!("elapsed: {} ms", r.elapsed_ms);
            if let Err(msg) = r.check_invariants() {
                eprintln!("invariant violated: {msg}");
                return Ok(exit(false));
            }
            if let Some(path) = report {
                std::fs::write(&path, serde_json::to_string_pretty(&r.to_file())? + "\n")?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Query { scheme, query } => {
            let s = read_scheme(&scheme)?;
            let counts = tiled_box_counts(&s, &query)?;
            print_query(&s, &query, &counts);
            Ok(ExitCode::SUCCESS)
        }
        Command::ExportMap { scheme, extent, csv } => {
            let s = read_scheme(&scheme)?;
            let file = BufWriter::new(File::create(&csv)?);
            export_map(&s, extent, &budget, file)?;
            println!("wrote {} ({}^{} rows)", csv.display(), extent, s.dim());
            Ok(ExitCode::SUCCESS)
        }
        Command::Witness { scheme } => {
            let s = read_scheme(&scheme)?;
            let w = witness_pipeline(&s.coloring)?;
            println!("subgrid [{}]^{}", w.subgrid, s.dim());
            println!(
                "box {} color {} deviation {} (num {} / {})",
                w.grid_box, w.color, w.value, w.value.num, w.value.den
            );
            if w.complemented {
                println!("taken from the complement of {} (deviation {})", w.extremal_box, w.extremal_value);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep(args) => {
            let disks = parse_range(&args.disks)?;
            let cfg = SweepConfig {
                dims: args.dims,
                disks,
                modes: args.modes,
                extent_multiplier: args.extent_multiplier,
                seed: args.seed,
            };
            let (rows, skipped) = run_sweep(&cfg, &budget)?;
            for s in &skipped {
                eprintln!("skipped M={} d={} {}: {}", s.m, s.d, s.mode, s.reason);
            }
            append_sweep_csv(&args.csv, &rows)?;
            let mut out = std::io::stdout().lock();
            for r in &rows {
                writeln!(
                    out,
                    "M={} d={} N={} {}: disc {}/{} disc+ {}/{} ({} ms)",
                    r.m, r.d, r.n, r.mode, r.disc_num, r.m, r.disc_plus_num, r.m, r.runtime_ms
                )?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn print_query(s: &Scheme, b: &GridBox, counts: &[u64]) {
    let m = s.disks() as u128;
    let size = b.cardinality();
    let response = counts.iter().copied().max().unwrap_or(0);
    println!("box {b}: {size} blocks on {m} disks");
    println!("response time {response} (ideal {})", size.div_ceil(m));
    let per_disk: Vec<String> = counts.iter().enumerate().map(|(i, c)| format!("{}:{c}", i + 1)).collect();
    println!("per disk {}", per_disk.join(" "));
}

fn parse_range(text: &str) -> Result<std::ops::RangeInclusive<u32>, Error> {
    let bad = || Error::InvalidParameter(format!("disk range {text:?} is not lo..hi"));
    let (lo, hi) = match text.split_once("..") {
        Some((lo, hi)) => (lo, hi.trim_start_matches('=')),
        None => (text, text),
    };
    let lo: u32 = lo.trim().parse().map_err(|_| bad())?;
    let hi: u32 = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi || lo < 1 {
        return Err(bad());
    }
    Ok(lo..=hi)
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn exit(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
