use std::collections::BTreeSet;

use clap::ValueEnum;
use qconf_core::adversary::{
    collusion_exposure, escape_frequency, escape_probability, simulate_attack,
};
use qconf_core::codebook::Message;
use qconf_core::protocol::{partition_subcircles, InitiatorPolicy};
use qconf_core::{
    build_codebook, preset, run_conference, ConferenceConfig, InterceptorSpec, Protocol,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::{usage, Failure, Outcome};

const ESCAPE_DECOYS: [u32; 3] = [1, 5, 50];
const COLLUSION_MAX_PARTIES: usize = 12;

#[derive(Copy, Clone, Debug, ValueEnum)]
pub enum Scenario {
    /// Full intercept-resend; `trials` matched decoys.
    InterceptResend,
    /// Entangling probe with beta^2 = 1/2; `trials` matched decoys.
    EntangleMeasure,
    /// Escape frequency over m = 1, 5, 50 attacked decoys.
    Escape,
    /// Initiator rewrites its announcement, with and without commitments.
    DishonestAnnouncer,
    /// Exposure of honest parties to random colluder sets as circles split.
    Collusion,
}

pub fn cmd_attack(scenario: Scenario, trials: u64, seed: u64) -> Outcome {
    if trials == 0 {
        return Err(usage("trials must be at least 1"));
    }
    let report = match scenario {
        Scenario::InterceptResend => monte_carlo(
            InterceptorSpec::InterceptResend {
                fraction: 1.0,
                seed,
            },
            trials,
            seed,
        )?,
        Scenario::EntangleMeasure => monte_carlo(
            InterceptorSpec::EntangleMeasure { beta_sq: 0.5, seed },
            trials,
            seed,
        )?,
        Scenario::Escape => escape(trials, seed)?,
        Scenario::DishonestAnnouncer => dishonest_announcer(trials, seed)?,
        Scenario::Collusion => collusion(trials, seed)?,
    };
    let text = serde_json::to_string_pretty(&report).map_err(|e| Failure::Usage(e.into()))?;
    println!("{text}");
    Ok(())
}

fn monte_carlo(spec: InterceptorSpec, trials: u64, seed: u64) -> Result<Value, Failure> {
    let report = simulate_attack(&spec, trials, seed.wrapping_add(1))?;
    let sigma = report.sigma();
    let observed = report.observed_error_rate.unwrap_or(f64::NAN);
    let within = (observed - report.analytic_error_rate).abs() <= 3.0 * sigma;
    let mut value = serde_json::to_value(&report).map_err(|e| Failure::Usage(e.into()))?;
    value["seed"] = json!(seed);
    value["sigma"] = json!(sigma);
    value["within_3_sigma"] = json!(within);
    Ok(value)
}

fn escape(trials: u64, seed: u64) -> Result<Value, Failure> {
    let mut rows = Vec::new();
    for m in ESCAPE_DECOYS {
        let p = escape_probability(m);
        let observed = escape_frequency(m, trials, seed.wrapping_add(m as u64))?;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        rows.push(json!({
            "decoys": m,
            "analytic": p,
            "observed": observed,
            "sigma": sigma,
            "within_3_sigma": (observed - p).abs() <= 3.0 * sigma,
        }));
    }
    Ok(json!({ "scenario": "escape", "trials": trials, "seed": seed, "results": rows }))
}

fn dishonest_announcer(trials: u64, seed: u64) -> Result<Value, Failure> {
    let cb = build_codebook(&preset("table2-3p-1b", Protocol::Two)?)?;
    let tuples = cb.message_tuples();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut flagged, mut misled_silently) = (0u64, 0u64);
    for trial in 0..trials {
        let tuple = tuples[rng.random_range(0..tuples.len())].clone();
        let real = *tuple.last().expect("initiator message");
        let fake = Message::new(real.value() ^ 1, real.bits())?;
        let mut cfg = ConferenceConfig::new(cb.clone(), tuple).with_seed(seed.wrapping_add(trial));
        cfg.initiator = InitiatorPolicy::RewriteAnnouncement { message: fake };

        let open = run_conference(&cfg, None)?;
        if open.cheaters().is_empty() && !open.succeeded() {
            misled_silently += 1;
        }
        cfg.commitment = true;
        let committed = run_conference(&cfg, None)?;
        if committed.cheaters() == [cb.receiver_id()] {
            flagged += 1;
        }
    }
    Ok(json!({
        "scenario": "dishonest-announcer",
        "preset": "table2-3p-1b",
        "trials": trials,
        "seed": seed,
        "misled_without_commitment": misled_silently,
        "flagged_with_commitment": flagged,
    }))
}

fn collusion(trials: u64, seed: u64) -> Result<Value, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0u64;
    let mut samples = Vec::new();
    for _ in 0..trials {
        let n = rng.random_range(2..=COLLUSION_MAX_PARTIES);
        let colluders: BTreeSet<usize> = (0..n).filter(|_| rng.random_bool(0.5)).collect();
        let mut exposed = Vec::with_capacity(n);
        for l in 1..=n {
            let parts = partition_subcircles(n, l)?;
            exposed.push(collusion_exposure(n, &colluders, &parts)?.len());
        }
        if exposed.windows(2).any(|w| w[1] > w[0]) {
            violations += 1;
        }
        if samples.len() < 5 {
            samples.push(
                json!({ "parties": n, "colluders": colluders, "exposed_by_subcircles": exposed }),
            );
        }
    }
    Ok(json!({
        "scenario": "collusion",
        "trials": trials,
        "seed": seed,
        "monotone_violations": violations,
        "samples": samples,
    }))
}
