//! `ranlat`: samplers, the sieve battery, and the verification suites
//! behind one binary with documented exit codes.
//!
//! Exit codes: 0 success, 1 gated verdict failure, 2 usage or configuration
//! error, 3 numeric abort (determinant drift, enumeration cap).

use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Deserialize;

use ranlat::estimators::SuiteReport;
use ranlat::lattice::haar::{ChainParams, LatticeChain};
use ranlat::lattice::UnimodularLattice;
use ranlat::plan::{run_suite_with, SuiteConfig};
use ranlat::poisson::sample_poisson;
use ranlat::region::RegionSpec;
use ranlat::seeding::stream_rng;
use ranlat::sieve::{run_sieve_battery, BatteryParams};
use ranlat::Error;

const EXIT_OK: i32 = 0;
const EXIT_GATED_FAIL: i32 = 1;
const EXIT_CONFIG: i32 = 2;
const EXIT_NUMERIC: i32 = 3;

#[derive(Parser)]
#[command(name = "ranlat", version, about = "Random lattice vs. Poisson process toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample Haar-random covolume-one lattices, one JSON basis per line.
    SampleLattice {
        /// Lattice dimension.
        #[arg(long)]
        n: usize,
        /// Number of lattices to emit.
        #[arg(long)]
        count: u64,
        /// Seed for the sampling chain (required: no wall-clock default).
        #[arg(long)]
        seed: u64,
        /// Markov chain burn-in steps.
        #[arg(long, default_value_t = 5000)]
        burnin: u64,
        /// Markov chain steps between samples.
        #[arg(long, default_value_t = 50)]
        thin: u64,
        /// Output path; `-` writes to standard output.
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Sample Poisson configurations on a region, one JSON line each.
    SamplePoisson {
        /// Region description file (TOML: `n` plus a `region` table).
        #[arg(long)]
        region: PathBuf,
        /// Number of configurations to emit.
        #[arg(long)]
        count: u64,
        /// Seed for the per-configuration streams.
        #[arg(long)]
        seed: u64,
        /// Output path; `-` writes to standard output.
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Enumerate lattice points in a centered ball for each input basis.
    Enumerate {
        /// Lattice dimension of the input bases.
        #[arg(long)]
        n: usize,
        /// Enumeration radius.
        #[arg(long)]
        radius: f64,
        /// Basis file (JSON lines as emitted by sample-lattice); `-` or
        /// absent reads standard input.
        #[arg(long, default_value = "-")]
        r#in: String,
        /// Cap on points per basis.
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
        /// Output path; `-` writes to standard output.
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Run the exact sieve property battery.
    SieveCheck {
        /// Instances per randomized check family.
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Largest ambient dimension generated.
        #[arg(long, default_value_t = 6)]
        dim_max: usize,
        /// Largest family size generated.
        #[arg(long, default_value_t = 10)]
        set_max: usize,
        #[arg(long)]
        seed: u64,
        /// Write the JSON battery report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run a plan of Monte Carlo experiments and write a suite report.
    Verify {
        /// Plan file (TOML).
        #[arg(long)]
        plan: PathBuf,
        /// JSON report path; also flushed after every finished experiment
        /// with `complete = false` until the suite ends.
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV report path.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Worker threads (overrides the plan's `workers`).
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Summarize an existing JSON suite report.
    Report {
        /// JSON report produced by `verify`.
        #[arg(long)]
        r#in: PathBuf,
        /// Re-emit the fixed-column CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            exit_code_for(&err)
        }
    });
}

fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::DeterminantDrift { .. } | Error::EnumerationCap { .. } => EXIT_NUMERIC,
        _ => EXIT_CONFIG,
    }
}

/// Writer for `--out`: `-` means stdout, anything else a file.
fn open_out(path: &str) -> io::Result<Box<dyn Write>> {
    if path == "-" {
        Ok(Box::new(io::stdout().lock()))
    } else {
        Ok(Box::new(io::BufWriter::new(fs::File::create(path)?)))
    }
}

/// 17 significant digits: enough to round-trip any f64 exactly.
fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_vec(vs: &[f64]) -> String {
    let inner: Vec<String> = vs.iter().map(|&v| fmt_f64(v)).collect();
    format!("[{}]", inner.join(","))
}

fn run(command: Command) -> Result<i32, Error> {
    match command {
        Command::SampleLattice { n, count, seed, burnin, thin, out } => {
            let mut chain =
                LatticeChain::new(n, seed, ChainParams { burnin, thin })?;
            let mut w = open_out(&out)?;
            for _ in 0..count {
                let lat = chain.next_lattice()?;
                let rows: Vec<String> = (0..n)
                    .map(|i| fmt_vec(&(0..n).map(|j| lat.basis()[(i, j)]).collect::<Vec<_>>()))
                    .collect();
                writeln!(w, "{{\"n\":{},\"basis\":[{}]}}", n, rows.join(","))?;
            }
            w.flush()?;
            Ok(EXIT_OK)
        }
        Command::SamplePoisson { region, count, seed, out } => {
            let spec = read_region_file(&region)?;
            let reg = spec.region.build(spec.n)?;
            let mut w = open_out(&out)?;
            for idx in 0..count {
                let mut rng = stream_rng(seed, "sample-poisson", idx);
                let cfg = sample_poisson(&reg, &mut rng)?;
                let pts: Vec<String> = cfg.points().iter().map(|p| fmt_vec(p)).collect();
                writeln!(w, "{{\"count\":{},\"points\":[{}]}}", cfg.len(), pts.join(","))?;
            }
            w.flush()?;
            Ok(EXIT_OK)
        }
        Command::Enumerate { n, radius, r#in, cap, out } => {
            let mut w = open_out(&out)?;
            let lines: Box<dyn Iterator<Item = io::Result<String>>> = if r#in == "-" {
                Box::new(io::stdin().lock().lines())
            } else {
                Box::new(io::BufReader::new(fs::File::open(&r#in)?).lines())
            };
            for (idx, line) in lines.enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let basis = parse_basis_line(&line, n)?;
                let lat = UnimodularLattice::from_basis(basis)?;
                for p in lat.enumerate_in_ball(radius, cap)? {
                    let coeffs: Vec<String> =
                        p.coeffs.iter().map(|c| c.to_string()).collect();
                    writeln!(
                        w,
                        "{{\"basis\":{},\"coeffs\":[{}],\"coords\":{}}}",
                        idx,
                        coeffs.join(","),
                        fmt_vec(&p.coords)
                    )?;
                }
            }
            w.flush()?;
            Ok(EXIT_OK)
        }
        Command::SieveCheck { trials, dim_max, set_max, seed, report } => {
            let params = BatteryParams {
                lemma_trials: trials,
                weighted_trials: trials,
                dim_max,
                set_max,
                seed,
                ..BatteryParams::default()
            };
            let battery = run_sieve_battery(&params);
            let json = serde_json::to_string_pretty(&battery)
                .map_err(|e| Error::Config(format!("battery serialize: {e}")))?;
            if let Some(path) = report {
                fs::write(&path, format!("{json}\n"))?;
            } else {
                println!("{json}");
            }
            eprintln!(
                "sieve battery: {} lemma + {} weighted instances, {} failures, {:.1}s",
                battery.lemma_instances,
                battery.weighted_instances,
                battery.total_failures(),
                battery.elapsed_secs
            );
            Ok(if battery.total_failures() == 0 { EXIT_OK } else { EXIT_GATED_FAIL })
        }
        Command::Verify { plan, out, csv, workers } => {
            let text = fs::read_to_string(&plan)
                .map_err(|e| Error::Config(format!("{}: {e}", plan.display())))?;
            let config = SuiteConfig::from_toml_str(&text)?;
            let out_ref = out.as_deref();
            let report = run_suite_with(&config, workers, |partial| {
                flush_json(out_ref, partial)
            })?;
            flush_json(out_ref, &report)?;
            if let Some(path) = &csv {
                fs::write(path, report.to_csv())?;
            }
            print!("{}", render_table(&report));
            Ok(report.exit_code())
        }
        Command::Report { r#in, csv } => {
            let text = fs::read_to_string(&r#in)
                .map_err(|e| Error::Config(format!("{}: {e}", r#in.display())))?;
            let report: SuiteReport = serde_json::from_str(&text)
                .map_err(|e| Error::Config(format!("report parse: {e}")))?;
            if let Some(path) = &csv {
                fs::write(path, report.to_csv())?;
            }
            print!("{}", render_table(&report));
            if !report.complete {
                eprintln!("note: report is marked incomplete (interrupted run)");
            }
            Ok(report.exit_code())
        }
    }
}

#[derive(Deserialize)]
struct RegionFile {
    n: usize,
    region: RegionSpec,
}

fn read_region_file(path: &Path) -> Result<RegionFile, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("region file: {e}")))
}

#[derive(Deserialize)]
struct BasisLine {
    n: usize,
    basis: Vec<Vec<f64>>,
}

fn parse_basis_line(line: &str, n: usize) -> Result<nalgebra::DMatrix<f64>, Error> {
    let parsed: BasisLine = serde_json::from_str(line)
        .map_err(|e| Error::Config(format!("basis line: {e}")))?;
    if parsed.n != n || parsed.basis.len() != n || parsed.basis.iter().any(|r| r.len() != n) {
        return Err(Error::Config(format!("basis line is not {n}x{n}")));
    }
    Ok(nalgebra::DMatrix::from_fn(n, n, |i, j| parsed.basis[i][j]))
}

fn flush_json(path: Option<&Path>, report: &SuiteReport) -> Result<(), Error> {
    if let Some(path) = path {
        fs::write(path, report.to_json())?;
    }
    Ok(())
}

fn render_table(report: &SuiteReport) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "suite seed {} ({} reports{})\n",
        report.seed,
        report.reports.len(),
        if report.complete { "" } else { ", INCOMPLETE" }
    ));
    for r in &report.reports {
        let target = r.target.map_or("-".to_string(), |t| format!("{t:.6}"));
        let z = r.zscore.map_or("-".to_string(), |z| format!("{z:+.2}"));
        s.push_str(&format!(
            "{:<30} n={} lambda={:.4} trials={} mean={:.6} se={:.2e} target={} z={} {}\n",
            r.label,
            r.n,
            r.lambda,
            r.trials,
            r.mean,
            r.stderr,
            target,
            z,
            r.verdict.as_str().to_uppercase()
        ));
    }
    s
}
