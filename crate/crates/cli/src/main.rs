use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use pi_cli::cache::Cache;
use pi_cli::suite::{all_passed, run_suite, summary, SuiteOptions};
use pi_cli::{cmd_certify, cmd_check, cmd_codim, cmd_define, cmd_exponent, parse_degrees, parse_method, resolve};
use pi_core::codim::CodimConfig;

#[derive(Parser)]
#[command(name = "piwb", version, about = "Polynomial identity workbench for superalgebras and their Grassmann envelopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// User definition document; its algebra is found by name before the catalog.
    #[arg(long, global = true)]
    define: Option<PathBuf>,
    /// Report cache directory (falls back to $PIWB_CACHE_DIR).
    #[arg(long, global = true)]
    cache: Option<PathBuf>,
    /// Also write the report to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value = "auto")]
    mode: String,
    /// Independent primes for modular runs.
    #[arg(long, global = true, default_value_t = 2)]
    primes: usize,
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Maximum degree of library witnesses.
    #[arg(long, global = true, default_value_t = 8)]
    degree_cap: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a polynomial as identity, proper central or non-central.
    Check { polynomial: String, algebra: Option<String> },
    /// Codimension records c_n, c_n^z, c_n^δ.
    Codim {
        algebra: Option<String>,
        /// Degrees such as `1..6`, `4,5` or `3`.
        #[arg(long = "n", alias = "degree", default_value = "1..5")]
        n: String,
    },
    /// PI exponent and proper central exponent interval.
    Exponent {
        algebra: Option<String>,
        /// Extra witness polynomials.
        #[arg(long)]
        witness: Vec<String>,
    },
    /// Certify exp^δ > 2 through a minimal algebra contained in the variety.
    #[command(alias = "witness")]
    Certify { algebra: Option<String> },
    /// Re-derive the table of stated results.
    Verify {
        /// Restrict to checks involving these algebras.
        #[arg(long)]
        algebra: Vec<String>,
        #[arg(long)]
        with_degree7: bool,
    },
    /// Build and describe the algebra of a definition document.
    Define { file: PathBuf },
}

fn config(cli: &Cli) -> Result<CodimConfig> {
    anyhow::ensure!(cli.primes >= 1, "--primes must be at least 1");
    Ok(CodimConfig { method: parse_method(&cli.mode)?, primes: cli.primes, ..Default::default() })
}

fn run(cli: &Cli) -> Result<(String, bool)> {
    let cache = Cache::new(cli.cache.clone());
    let define = cli.define.as_deref();
    let cfg = config(cli)?;
    let params = format!("mode={} primes={} cap={}", cli.mode, cli.primes, cli.degree_cap);
    Ok(match &cli.command {
        Command::Check { polynomial, algebra } => {
            let r = resolve(algebra.as_deref(), define)?;
            let (s, _) = cache.get_or_compute(&["check", &r.source, polynomial, &params], || cmd_check(&r, polynomial, &cfg))?;
            (s, true)
        }
        Command::Codim { algebra, n } => {
            let r = resolve(algebra.as_deref(), define)?;
            let mut s = String::new();
            for d in parse_degrees(n)? {
                let (rec, _) = cache.get_or_compute(&["codim", &r.source, &d.to_string(), &params], || cmd_codim(&r, &[d], &cfg))?;
                s += &rec;
            }
            (s, true)
        }
        Command::Exponent { algebra, witness } => {
            let r = resolve(algebra.as_deref(), define)?;
            let key = witness.join("\n");
            let (s, _) = cache.get_or_compute(&["exponent", &r.source, &key, &params], || cmd_exponent(&r, witness, cli.degree_cap))?;
            (s, true)
        }
        Command::Certify { algebra } => {
            let r = resolve(algebra.as_deref(), define)?;
            let (s, _) = cache.get_or_compute(&["certify", &r.source, &params], || cmd_certify(&r, cli.degree_cap.min(6)))?;
            (s, true)
        }
        Command::Verify { algebra, with_degree7 } => {
            let opts = SuiteOptions { with_degree7: *with_degree7, algebras: algebra.clone(), jobs: cli.jobs };
            let outcomes = run_suite(&opts)?;
            let mut s: String = outcomes.iter().map(|o| o.line() + "\n").collect();
            s += &summary(&outcomes);
            let ok = all_passed(&outcomes);
            s += if ok { "result: all executed checks passed\n" } else { "result: FAILURES\n" };
            (s, ok)
        }
        Command::Define { file } => {
            let r = resolve(None, Some(file))?;
            (cmd_define(&r)?, true)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((report, ok)) => {
            print!("{report}");
            if let Some(p) = &cli.out {
                if let Err(e) = std::fs::write(p, &report).with_context(|| format!("writing {}", p.display())) {
                    eprintln!("error: {e:#}");
                    return ExitCode::FAILURE;
                }
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
