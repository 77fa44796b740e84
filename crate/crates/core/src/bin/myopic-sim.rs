use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use myopic_core::harness::{
    self, capacity_table, compatible_count_experiment, emit_results, parse_powers, parse_range,
    CompatConfig, ExperimentConfig, Observed, OutputFormat,
};
use myopic_core::Result;

#[derive(Parser)]
#[command(
    name = "myopic-sim",
    version,
    about = "Network error-correction against myopic adversaries"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObservedArg {
    Independent,
    FromCodebook,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Draw one codebook from the master seed instead of one per trial.
        #[arg(long)]
        fixed_codebook: bool,
    },
    /// Print capacities for a range of min-cuts and adversary powers as CSV.
    Capacity {
        /// e.g. `1..=8` or `2-6`
        #[arg(long, default_value = "1..=6")]
        c_range: String,
        /// `z_ro,z_wo,z_rw` tuples separated by `;`
        #[arg(long, default_value = "0,1,0;0,0,1;1,1,0;1,0,1")]
        powers: String,
    },
    /// Compare compatible-codeword counts against the exact enumeration value.
    Compat {
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long = "c", default_value_t = 3)]
        c: usize,
        #[arg(long, default_value_t = 1)]
        z_r: usize,
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long, default_value_t = 256)]
        m: usize,
        #[arg(long, default_value_t = 1000)]
        codebooks: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "independent")]
        observed: ObservedArg,
    },
    /// Run the enumeration-oracle checks.
    Selftest,
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Run {
            config,
            seed,
            trials,
            out,
            format,
            fixed_codebook,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            cfg.fixed_codebook |= fixed_codebook;
            let result = harness::run_trials(&cfg)?;
            let format = match format {
                Format::Csv => OutputFormat::Csv,
                Format::Json => OutputFormat::Json,
            };
            match out.or(cfg.output.clone()) {
                Some(path) => {
                    for p in emit_results(&result, &path, format)? {
                        eprintln!("wrote {}", p.display());
                    }
                }
                None => println!(
                    "{}",
                    serde_json::to_string_pretty(&result.report).expect("report serializes")
                ),
            }
            for c in &result.report.cases {
                eprintln!(
                    "case {} {:<22} error {:.4} [{:.4}, {:.4}] {:?}",
                    c.case,
                    c.strategy.name(),
                    c.summary.error_probability,
                    c.summary.wilson_low,
                    c.summary.wilson_high,
                    c.assignment
                );
            }
            let w = &result.report.worst_case;
            eprintln!("{}: {:.4} (case {})", w.label, w.error_probability, w.case);
            Ok(true)
        }
        Command::Capacity { c_range, powers } => {
            let rows = capacity_table(parse_range(&c_range)?, &parse_powers(&powers)?);
            let mut w = csv::Writer::from_writer(std::io::stdout());
            for r in rows {
                w.serialize(r).map_err(|source| myopic_core::Error::Csv {
                    path: "<stdout>".into(),
                    source,
                })?;
            }
            w.flush().map_err(|e| myopic_core::Error::Io {
                path: "<stdout>".into(),
                source: e,
            })?;
            Ok(true)
        }
        Command::Compat {
            n,
            c,
            z_r,
            q,
            m,
            codebooks,
            seed,
            observed,
        } => {
            let report = compatible_count_experiment(&CompatConfig {
                q,
                n,
                c,
                z_r,
                m,
                codebooks,
                seed,
                observed: match observed {
                    ObservedArg::Independent => Observed::Independent,
                    ObservedArg::FromCodebook => Observed::FromCodebook,
                },
            })?;
            println!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            Ok(report.within_3_sigma)
        }
        Command::Selftest => {
            let mut all = true;
            for (name, ok) in harness::selftest() {
                println!("{} {name}", if ok { "PASS" } else { "FAIL" });
                all &= ok;
            }
            Ok(all)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("myopic-sim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
