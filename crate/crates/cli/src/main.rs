use std::fmt::Write as _;
use std::io::Write as _;
use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::atomic::AtomicBool;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use qtoken_core::adversary::{
    eval_all_correct_bound, eval_forgery_bound, eval_forgery_bound_claim, TokenSource,
};
use qtoken_core::bank::{serve, Bank};
use qtoken_core::harness::{run_scenario, Scenario, ScenarioSpec};
use qtoken_core::scheme::{ClassicalParams, SchemeParams, SeriesId};
use rand::SeedableRng;

#[derive(Parser)]
#[command(name = "qtoken", version, about = "Repetitive quantum token simulator and bank service")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo scenario and emit its CSV summary.
    Run {
        /// honest-flow, adversarial-history, forgery, tracking-audit,
        /// otp-roundtrip, voting or inequality-suite
        scenario: String,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Forger or tracking-bank strategy; all of them when omitted.
        #[arg(long)]
        strategy: Option<String>,
        /// Number of valid pairs pre-spent by the adversary (adversarial-history).
        #[arg(long)]
        history_len: Option<u64>,
        /// Simulate token states or sample their report distribution.
        #[arg(long, value_enum)]
        tokens: Option<Tokens>,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print scheme parameters and reference bounds for `k` as CSV.
    Bounds {
        #[arg(long)]
        k: u32,
        /// Largest number of samples in the all-correct curves.
        #[arg(long, default_value_t = 4)]
        q_max: u64,
        /// Largest number of extra repetitions beyond `q` in the curves.
        #[arg(long, default_value_t = 4)]
        extra_max: u64,
    },
    /// Start the bank service.
    Serve {
        /// Append-only decision log; replayed on start.
        #[arg(long)]
        log: PathBuf,
        /// Listen address, e.g. 127.0.0.1:7878 (port 0 picks a free port).
        #[arg(long)]
        socket: String,
        /// Create a series `<id>:<k>` unless the log already has it. Repeatable.
        #[arg(long)]
        mint: Vec<String>,
        /// Seed for minting; fresh entropy when omitted.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Tokens {
    Quantum,
    Emulated,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            scenario,
            k,
            trials,
            seed,
            strategy,
            history_len,
            tokens,
            out,
        } => {
            let scenario: Scenario = scenario.parse()?;
            let mut spec = ScenarioSpec::new(scenario, seed);
            spec.k = k.unwrap_or(spec.k);
            spec.trials = trials.unwrap_or(spec.trials);
            spec.strategy = strategy;
            spec.history_len = history_len;
            spec.token_source = tokens.map(|t| match t {
                Tokens::Quantum => TokenSource::Quantum,
                Tokens::Emulated => TokenSource::Emulated,
            });
            spec.out = out;
            let result = run_scenario(&spec)?;
            if spec.out.is_none() {
                print!("{}", result.to_csv());
            }
            let failed: Vec<_> = result.failures().map(|r| r.metric.as_str()).collect();
            eprintln!("{}: {} rows, {} failed", scenario, result.rows.len(), failed.len());
            if failed.is_empty() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("failed: {}", failed.join(", "));
                Ok(ExitCode::from(1))
            }
        }
        Command::Bounds { k, q_max, extra_max } => {
            print!("{}", bounds_csv(k, q_max, extra_max)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Serve {
            log,
            socket,
            mint,
            seed,
        } => {
            let bank = Bank::open(&log).with_context(|| format!("opening log {}", log.display()))?;
            let mut rng = match seed {
                Some(s) => rand::rngs::StdRng::seed_from_u64(s),
                None => rand::rngs::StdRng::from_os_rng(),
            };
            let existing = bank.series_ids();
            for entry in &mint {
                let (id, k) = entry
                    .split_once(':')
                    .with_context(|| format!("--mint expects <id>:<k>, got {entry:?}"))?;
                let id = SeriesId::new(id)?;
                let k: u32 = k.parse().with_context(|| format!("bad k in {entry:?}"))?;
                if existing.contains(&id) {
                    continue;
                }
                bank.mint_series(id.clone(), k, &mut rng)?;
                println!("minted {id} k={k}");
            }
            let listener = TcpListener::bind(&socket).with_context(|| format!("binding {socket}"))?;
            println!("listening on {}", listener.local_addr()?);
            std::io::stdout().flush()?;
            serve(Arc::new(bank), listener, Arc::new(AtomicBool::new(false)))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Long-form CSV: `quantity,k,q,r,y_size,value`, unused columns empty.
fn bounds_csv(k: u32, q_max: u64, extra_max: u64) -> Result<String> {
    let p = SchemeParams::new(k)?;
    let c = ClassicalParams::new(k)?;
    if q_max > 64 || extra_max == 0 || extra_max > 64 {
        bail!("curve ranges must satisfy q_max <= 64 and 1 <= extra_max <= 64");
    }
    let y = p.num_indices();
    let mut out = String::from("quantity,k,q,r,y_size,value\n");
    let mut row = |name: &str, q: Option<u64>, r: Option<u64>, y: Option<u64>, value: f64| {
        let opt = |v: Option<u64>| v.map(|v| v.to_string()).unwrap_or_default();
        writeln!(out, "{name},{k},{},{},{},{value}", opt(q), opt(r), opt(y)).expect("string write");
    };
    row("qubits_per_token", None, None, None, f64::from(p.n));
    row("secret_bits", None, None, None, p.m as f64);
    row("report_bits", None, None, None, f64::from(p.t));
    row("n_m", None, None, None, p.cap_mint as f64);
    row("n_t", None, None, None, p.cap_test as f64);
    row("eps_l", None, None, None, p.eps_l);
    row("eps_f", None, None, None, p.eps_f);
    row("forgery_bound_5", Some(p.cap_mint), None, Some(y), eval_forgery_bound(p.cap_test, p.cap_mint, y));
    row(
        "forgery_bound_6",
        Some(p.cap_mint),
        None,
        Some(y),
        eval_forgery_bound_claim(p.cap_test, p.cap_mint, y),
    );
    row("classical_n_m", None, None, None, c.cap_mint as f64);
    row("classical_n_t", None, None, None, c.cap_test as f64);
    row("classical_secret_bits", None, None, None, c.m as f64);
    row("classical_eps_l", None, None, None, c.eps_l);
    row("classical_eps_f", None, None, None, c.eps_f);
    for q in 0..=q_max {
        for r in q + 1..=q + extra_max {
            row("all_correct", Some(q), Some(r), Some(y), eval_all_correct_bound(q, r, y)?);
        }
    }
    Ok(out)
}
