//! `qconf`: run conferences, validate codebooks and print analytics.

mod attack;

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use qconf_core::adversary::{
    information_bob, information_eve, intercept_error_rate, is_secure, solve_threshold,
};
use qconf_core::codebook::{format_tuple, preset_info, PRESETS};
use qconf_core::metrics::{efficiency_p1, efficiency_p2, percent, EfficiencyInput};
use qconf_core::protocol::EventKind;
use qconf_core::{
    build_codebook, run_conference, validate_orthogonality, CodebookDescriptor, ConfigFile,
    Interceptor, Protocol,
};

use attack::Scenario;

#[derive(Parser)]
#[command(
    name = "qconf",
    version,
    about = "Multiparty quantum conference simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one conference from a TOML config and write its transcript.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Transcript path; defaults to `<config>.transcript.jsonl`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a preset (both protocols) or a codebook TOML file.
    Validate { target: String },
    /// Intercept-resend analytics as CSV, followed by the security threshold.
    Curve {
        #[arg(long, default_value_t = 0.0)]
        fmin: f64,
        #[arg(long, default_value_t = 1.0)]
        fmax: f64,
        #[arg(long, default_value_t = 20)]
        steps: usize,
    },
    /// Qubit efficiency of both protocols as CSV.
    Efficiency {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        protocol: u8,
        /// Number of parties.
        #[arg(long = "N")]
        parties: u64,
        /// Bits per party.
        #[arg(long)]
        k: u64,
        /// Qubits in the shared state.
        #[arg(long)]
        n: u64,
        /// Travel qubits.
        #[arg(long)]
        m: u64,
    },
    /// Monte-Carlo attack scenarios, reported as JSON.
    Attack {
        #[arg(long, value_enum)]
        scenario: Scenario,
        #[arg(long)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// List the built-in codebooks as CSV.
    Presets,
}

/// Maps to the process exit code: checks that ran and failed give 1,
/// anything wrong with the invocation or its inputs gives 2.
enum Failure {
    Check(String),
    Usage(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<qconf_core::Error> for Failure {
    fn from(e: qconf_core::Error) -> Self {
        Failure::Usage(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn usage(msg: impl Display) -> Failure {
    Failure::Usage(anyhow::anyhow!("{msg}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, seed, out } => cmd_run(&config, seed, out),
        Command::Validate { target } => cmd_validate(&target),
        Command::Curve { fmin, fmax, steps } => cmd_curve(fmin, fmax, steps),
        Command::Efficiency {
            protocol,
            parties,
            k,
            n,
            m,
        } => cmd_efficiency(protocol, parties, k, n, m),
        Command::Attack {
            scenario,
            trials,
            seed,
        } => attack::cmd_attack(scenario, trials, seed),
        Command::Presets => cmd_presets(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("qconf: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("qconf: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn default_transcript_path(config: &Path) -> PathBuf {
    let mut name = config.as_os_str().to_owned();
    name.push(".transcript.jsonl");
    PathBuf::from(name)
}

fn cmd_run(config: &Path, seed: Option<u64>, out: Option<PathBuf>) -> Outcome {
    let text =
        fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let file = ConfigFile::from_toml(&text)?;
    let (cfg, adversary) = file.resolve(seed)?;
    let mut eve = adversary.map(|spec| spec.build()).transpose()?;
    let adversary: Option<&mut dyn Interceptor> = match eve.as_mut() {
        Some(boxed) => Some(boxed.as_mut()),
        None => None,
    };
    let transcript =
        run_conference(&cfg, adversary).map_err(|e| Failure::Check(format!("run failed: {e}")))?;

    let out = out.unwrap_or_else(|| default_transcript_path(config));
    fs::write(&out, transcript.to_jsonl()).with_context(|| format!("writing {}", out.display()))?;
    println!("seed: {}", cfg.seed);
    println!(
        "transcript: {} ({} events)",
        out.display(),
        transcript.events.len()
    );

    for (party, (tuple, correct)) in transcript.decodes() {
        let verdict = if correct { "correct" } else { "WRONG" };
        println!("{party}: decoded ({}) {verdict}", format_tuple(tuple));
    }
    let mut problems = Vec::new();
    if let Some(event) = transcript.abort() {
        if let EventKind::Abort {
            hop,
            error_rate,
            reason,
        } = &event.kind
        {
            println!("status: aborted at hop {hop} (error rate {error_rate:.4}): {reason}");
            problems.push(format!("aborted at hop {hop}"));
        }
    }
    for reason in transcript.integrity_failures() {
        println!("integrity: {reason}");
        problems.push(format!("integrity failure: {reason}"));
    }
    for cheater in transcript.cheaters() {
        println!("cheater: {cheater}");
        problems.push(format!("{cheater} failed its commitment"));
    }
    if problems.is_empty() && !transcript.succeeded() {
        problems.push("decoded messages differ from those sent".into());
    }
    if problems.is_empty() {
        println!("status: ok");
        Ok(())
    } else {
        Err(Failure::Check(problems.join("; ")))
    }
}

fn validate_descriptor(label: &str, desc: &CodebookDescriptor) -> bool {
    let report = match validate_orthogonality(desc) {
        Ok(r) => r,
        Err(e) => {
            println!("{label}: FAIL {e}");
            return false;
        }
    };
    println!("{label}: {report}");
    if !report.passed {
        return false;
    }
    match build_codebook(desc) {
        Ok(_) => true,
        Err(e) => {
            println!("{label}: FAIL {e}");
            false
        }
    }
}

fn cmd_validate(target: &str) -> Outcome {
    let path = Path::new(target);
    let passed = if path.is_file() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {target}"))?;
        let desc = CodebookDescriptor::from_toml(&text)?;
        validate_descriptor(target, &desc)
    } else {
        preset_info(target)
            .map_err(|_| usage(format!("{target} is neither a file nor a preset")))?;
        let mut all = true;
        for protocol in [Protocol::One, Protocol::Two] {
            let desc = qconf_core::preset(target, protocol)?;
            all &= validate_descriptor(target, &desc);
        }
        all
    };
    if passed {
        Ok(())
    } else {
        Err(Failure::Check(format!("{target} failed validation")))
    }
}

fn cmd_curve(fmin: f64, fmax: f64, steps: usize) -> Outcome {
    if !(0.0 <= fmin && fmin < fmax && fmax <= 1.0) {
        return Err(usage("need 0 <= fmin < fmax <= 1"));
    }
    if steps == 0 {
        return Err(usage("steps must be at least 1"));
    }
    println!("kind,f,e,i_ae,i_ab,secure");
    let row = |kind: &str, f: f64| {
        let (e, eve, bob) = (
            intercept_error_rate(f),
            information_eve(f),
            information_bob(f),
        );
        println!("{kind},{f},{e},{eve},{bob},{}", is_secure(f));
    };
    for i in 0..=steps {
        row("point", fmin + (fmax - fmin) * i as f64 / steps as f64);
    }
    row("threshold", solve_threshold());
    Ok(())
}

fn cmd_efficiency(protocol: u8, parties: u64, k: u64, n: u64, m: u64) -> Outcome {
    let inp = EfficiencyInput::new(parties, k, n, m)?;
    let (e1, e2) = (efficiency_p1(&inp)?, efficiency_p2(&inp)?);
    let selected = if protocol == 1 { e1 } else { e2 };
    println!("N,k,n,m,eta1,eta2,protocol,exact");
    println!(
        "{parties},{k},{n},{m},{},{},{protocol},{selected}",
        percent(e1),
        percent(e2)
    );
    Ok(())
}

fn cmd_presets() -> Outcome {
    println!("name,parties,bits,state,travel");
    for p in PRESETS {
        let travel: Vec<String> = p.travel.iter().map(|q| q.to_string()).collect();
        println!(
            "{},{},{},{},{}",
            p.name,
            p.parties,
            p.bits,
            p.state,
            travel.join(" ")
        );
    }
    Ok(())
}
