//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use num_rational::Ratio;
use qconf_core::adversary::{
    collusion_exposure, compute_leakage, escape_frequency, escape_probability,
    intercept_error_rate, simulate_attack, solve_threshold, AnnouncementModel, InterceptorSpec,
};
use qconf_core::codebook::{
    build_codebook, decode_p1, decode_p2, preset, validate_orthogonality, Message, Protocol,
};
use qconf_core::metrics::{efficiency_p1, efficiency_p2, percent, EfficiencyInput};
use qconf_core::pauli::{are_disjoint, derive_receiver_ops, enumerate_subgroups, PauliWord};
use qconf_core::protocol::{
    exhaustive_runs, partition_subcircles, run_conference, ConferenceConfig, InitiatorPolicy,
};
use qconf_core::state::{prepare_state, StateDescriptor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const TABLE_PRESETS: [&str; 4] = [
    "table2-3p-1b",
    "table2-3p-2b-cluster",
    "table2-4p-1b-ghz",
    "table2-4p-1b-cluster",
];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn w(s: &str) -> PauliWord {
    s.parse().expect("valid word")
}

fn ws(list: &[&str]) -> Vec<PauliWord> {
    list.iter().map(|s| w(s)).collect()
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Within `k` binomial standard deviations of `p` over `n` samples.
fn within_sigma(observed: f64, p: f64, n: f64, k: f64) -> (bool, f64) {
    let sigma = (p * (1.0 - p) / n).sqrt();
    ((observed - p).abs() <= k * sigma, sigma)
}

fn group_algebra() -> Outcome {
    let mut pairs = 0;
    for len in 1..=2 {
        let all = PauliWord::all(len).map_err(err)?;
        let set: BTreeSet<PauliWord> = all.iter().copied().collect();
        let id = PauliWord::identity(len).map_err(err)?;
        for a in &all {
            ensure(a.mul(a).map_err(err)? == id, || {
                format!("{a} is not self-inverse")
            })?;
            for b in &all {
                let ab = a.mul(b).map_err(err)?;
                ensure(set.contains(&ab), || format!("{a}·{b} not closed"))?;
                ensure(ab == b.mul(a).map_err(err)?, || {
                    format!("{a}, {b} do not commute")
                })?;
                let oracle = common::matmul(
                    &common::word_matrix(&a.to_string()),
                    &common::word_matrix(&b.to_string()),
                );
                ensure(
                    common::equal_up_to_phase(&oracle, &common::word_matrix(&ab.to_string())),
                    || format!("{a}·{b} = {ab} disagrees with the matrix product"),
                )?;
                pairs += 1;
                for c in &all {
                    ensure(
                        ab.mul(c).map_err(err)? == a.mul(&b.mul(c).map_err(err)?).map_err(err)?,
                        || format!("associativity fails at {a}, {b}, {c}"),
                    )?;
                }
            }
        }
    }
    Ok(format!(
        "G_1 and G_2 elementary abelian; {pairs} products match the matrix oracle"
    ))
}

fn disjoint_subgroups() -> Outcome {
    let groups = enumerate_subgroups(1, 2).map_err(err)?;
    let shown: BTreeSet<String> = groups.iter().map(|g| g.to_string()).collect();
    let want: BTreeSet<String> = ["{I, X}", "{I, iY}", "{I, Z}"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    ensure(shown == want, || format!("got {shown:?}"))?;
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            ensure(are_disjoint(&groups[i], &groups[j]).map_err(err)?, || {
                format!("{} and {} intersect", groups[i], groups[j])
            })?;
        }
    }
    Ok("{I, X}, {I, iY}, {I, Z}, pairwise disjoint".into())
}

fn receiver_construction() -> Outcome {
    let n = derive_receiver_ops(&[ws(&["I", "X"]), ws(&["I", "iY"])]).map_err(err)?;
    ensure(n == ws(&["I", "Z"]), || format!("three-party column {n:?}"))?;
    let n = derive_receiver_ops(&[
        ws(&["I.I", "X.I"]),
        ws(&["I.I", "X.X"]),
        ws(&["I.I", "iY.X"]),
    ])
    .map_err(err)?;
    ensure(n == ws(&["I.I", "iY.I"]), || {
        format!("four-party column {n:?}")
    })?;
    let alice = ws(&["I", "X", "iY", "Z"]);
    let n = derive_receiver_ops(std::slice::from_ref(&alice)).map_err(err)?;
    ensure(n == alice, || format!("two-party limit {n:?}"))?;
    Ok("{I, Z}; {I.I, iY.I}; two-party limit equals the sender list".into())
}

fn codebook_validity() -> Outcome {
    let mut checks = 0usize;
    for name in TABLE_PRESETS {
        for protocol in [Protocol::One, Protocol::Two] {
            let desc = preset(name, protocol).map_err(err)?;
            let report = validate_orthogonality(&desc).map_err(err)?;
            ensure(report.passed, || {
                format!("{name} protocol {protocol}: {report}")
            })?;
            let cb = build_codebook(&desc).map_err(err)?;
            match protocol {
                Protocol::One => {
                    for tuple in cb.message_tuples() {
                        let label = cb.encode(&tuple).map_err(err)?;
                        ensure(decode_p1(&cb, &label).map_err(err)? == tuple, || {
                            format!("{name}: {tuple:?}")
                        })?;
                        checks += 1;
                    }
                }
                Protocol::Two => {
                    for initial in cb.basis().labels() {
                        for tuple in cb.message_tuples() {
                            let final_label =
                                cb.encode(&tuple).map_err(err)?.mul(initial).map_err(err)?;
                            for (party, own) in cb.parties().iter().zip(&tuple) {
                                let got = decode_p2(&cb, &party.id, *own, initial, &final_label)
                                    .map_err(err)?;
                                ensure(got == tuple, || {
                                    format!("{name}: {} decodes {got:?}", party.id)
                                })?;
                                checks += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(format!(
        "4 presets x 2 protocols orthogonal; {checks} decodes round-trip"
    ))
}

fn end_to_end() -> Outcome {
    let mut runs = 0;
    for name in ["table2-3p-1b", "table2-4p-1b-ghz"] {
        for protocol in [Protocol::One, Protocol::Two] {
            let cb = build_codebook(&preset(name, protocol).map_err(err)?).map_err(err)?;
            let zeros = cb
                .parties()
                .iter()
                .map(|p| Message::zero(p.bits))
                .collect::<Result<Vec<_>, _>>()
                .map_err(err)?;
            let cfg = ConferenceConfig::new(cb, zeros).with_seed(2024);
            let first = exhaustive_runs(&cfg).map_err(err)?;
            let second = exhaustive_runs(&cfg).map_err(err)?;
            for ((tuple, a), (_, b)) in first.iter().zip(&second) {
                ensure(a.abort().is_none(), || {
                    format!("{name} p{protocol} {tuple:?} aborted")
                })?;
                ensure(a.succeeded(), || {
                    format!("{name} p{protocol} {tuple:?} decoded wrongly")
                })?;
                ensure(a.to_jsonl() == b.to_jsonl(), || {
                    format!("{name} p{protocol} {tuple:?} not reproducible")
                })?;
                runs += 1;
            }
        }
    }
    Ok(format!(
        "{runs} exhaustive runs decode correctly, 0 aborts, byte-identical replays"
    ))
}

fn worked_example() -> Outcome {
    let bell = prepare_state(&StateDescriptor::preset("bell")).map_err(err)?;
    let mut state = bell.clone();
    for op in ["X", "iY", "Z"] {
        state = state.apply_word(&w(op), &[0]).map_err(err)?;
    }
    ensure(state.equals_up_to_phase(&bell, 1e-12), || {
        "Z·iY·X|ψ+⟩ is not |ψ+⟩".into()
    })?;

    let cb = build_codebook(&preset("table2-3p-1b", Protocol::Two).map_err(err)?).map_err(err)?;
    let i = w("I");
    let branches: Vec<Vec<Message>> = cb
        .message_tuples()
        .into_iter()
        .filter(|t| cb.encode(t).map(|c| c == i).unwrap_or(false))
        .collect();
    let zero: Vec<Message> = vec!["0".parse().map_err(err)?; 3];
    let one: Vec<Message> = vec!["1".parse().map_err(err)?; 3];
    ensure(branches == vec![zero.clone(), one.clone()], || {
        format!("branches {branches:?}")
    })?;
    for (bit, expected) in [("0", &zero), ("1", &one)] {
        for party in cb.parties() {
            let got = decode_p2(&cb, &party.id, bit.parse().map_err(err)?, &i, &i).map_err(err)?;
            ensure(got == *expected, || {
                format!("{} with {bit} decodes {got:?}", party.id)
            })?;
        }
    }
    let t = run_conference(&ConferenceConfig::new(cb, one.clone()), None).map_err(err)?;
    ensure(t.announcements() == [(Some(i), i)] && t.succeeded(), || {
        "run did not announce I -> I".into()
    })?;
    Ok("|ψ+⟩ returns to |ψ+⟩; announcement I -> I leaves exactly (000) and (111)".into())
}

fn entangle_measure() -> Outcome {
    let spec = InterceptorSpec::EntangleMeasure {
        beta_sq: 0.5,
        seed: 11,
    };
    let n = 100_000u64;
    let report = simulate_attack(&spec, n, 12).map_err(err)?;
    let observed = report.observed_error_rate.unwrap_or(f64::NAN);
    let (ok, sigma) = within_sigma(observed, 0.25, n as f64, 3.0);
    ensure(ok, || {
        format!("detection frequency {observed:.5} vs 0.25 (σ = {sigma:.5})")
    })?;
    Ok(format!(
        "detection frequency {observed:.5} over {n} decoys, |Δ| <= 3σ (σ = {sigma:.5})"
    ))
}

fn intercept_resend() -> Outcome {
    let e = intercept_error_rate(0.68);
    ensure((e - 0.17).abs() <= 0.001, || format!("e(0.68) = {e}"))?;
    let f = solve_threshold();
    ensure((0.67..=0.69).contains(&f), || format!("threshold {f}"))?;

    let n = 100_000u64;
    let spec = InterceptorSpec::InterceptResend {
        fraction: 1.0,
        seed: 21,
    };
    let report = simulate_attack(&spec, n, 22).map_err(err)?;
    let observed = report.observed_error_rate.unwrap_or(f64::NAN);
    let (ok, sigma) = within_sigma(observed, 0.25, n as f64, 3.0);
    ensure(ok, || {
        format!("matched-basis error {observed:.5} vs 0.25 (σ = {sigma:.5})")
    })?;

    let trials = 1_000_000u64;
    let mut escapes = Vec::new();
    for m in [1u32, 5, 50] {
        let p = escape_probability(m);
        let freq = escape_frequency(m, trials, 100 + m as u64).map_err(err)?;
        let (ok, sigma) = within_sigma(freq, p, trials as f64, 3.0);
        ensure(ok, || {
            format!("escape at m = {m}: {freq:.3e} vs {p:.3e} (σ = {sigma:.2e})")
        })?;
        escapes.push(format!("m={m}: {freq:.3e}"));
    }
    Ok(format!(
        "e(0.68) = {e:.4}, f* = {f:.6}, MC error {observed:.5}, escape {}",
        escapes.join(", ")
    ))
}

fn leakage() -> Outcome {
    let cb = build_codebook(&preset("table2-3p-1b", Protocol::Two).map_err(err)?).map_err(err)?;
    let public = compute_leakage(&cb, AnnouncementModel::PublicFixedInitial).map_err(err)?;
    let secret = compute_leakage(&cb, AnnouncementModel::SecretRandomInitial).map_err(err)?;
    ensure((public - 2.0).abs() < 1e-12, || {
        format!("public model {public}")
    })?;
    ensure(secret.abs() < 1e-12, || format!("secret model {secret}"))?;
    Ok(format!(
        "public fixed initial {public:.1} bits, secret random initial {secret:.1} bits"
    ))
}

fn efficiency() -> Outcome {
    let a = efficiency_p2(&EfficiencyInput::new(2, 2, 2, 1).map_err(err)?).map_err(err)?;
    let b = efficiency_p2(&EfficiencyInput::new(3, 1, 2, 1).map_err(err)?).map_err(err)?;
    ensure(a == Ratio::new(2, 3) && percent(a) == 67, || {
        format!("η2(2,2,2,1) = {a}")
    })?;
    ensure(b == Ratio::new(3, 7) && percent(b) == 43, || {
        format!("η2(3,1,2,1) = {b}")
    })?;
    let mut grid = 0;
    for n_parties in 2..=8 {
        for k in 1..=8 {
            for n in 1..=8 {
                for m in 1..=n {
                    let inp = EfficiencyInput::new(n_parties, k, n, m).map_err(err)?;
                    let (e1, e2) = (
                        efficiency_p1(&inp).map_err(err)?,
                        efficiency_p2(&inp).map_err(err)?,
                    );
                    ensure(e2 > e1, || format!("η2 <= η1 at {inp:?}"))?;
                    grid += 1;
                }
            }
        }
    }
    Ok(format!(
        "2/3 = 67%, 3/7 = 43%; η2 > η1 at all {grid} grid points"
    ))
}

fn insider_mitigations() -> Outcome {
    let cb = build_codebook(&preset("table2-3p-1b", Protocol::Two).map_err(err)?).map_err(err)?;
    let tuples = cb.message_tuples();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let trials = 1000;
    let mut flagged = 0;
    for seed in 0..trials {
        let tuple = tuples[rng.random_range(0..tuples.len())].clone();
        let real = *tuple.last().expect("initiator message");
        let fake = Message::new(real.value() ^ 1, real.bits()).map_err(err)?;
        let mut cfg = ConferenceConfig::new(cb.clone(), tuple).with_seed(seed);
        cfg.commitment = true;
        cfg.initiator = InitiatorPolicy::RewriteAnnouncement { message: fake };
        let t = run_conference(&cfg, None).map_err(err)?;
        if t.cheaters() == [cb.receiver_id()] {
            flagged += 1;
        }
    }
    ensure(flagged == trials, || {
        format!("initiator flagged in {flagged}/{trials} trials")
    })?;

    let mut placements = 0;
    for n in 1..=8usize {
        for mask in 0u32..1 << n {
            let colluders: BTreeSet<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            let mut previous = usize::MAX;
            for l in 1..=n {
                let parts = partition_subcircles(n, l).map_err(err)?;
                let exposed = collusion_exposure(n, &colluders, &parts)
                    .map_err(err)?
                    .len();
                ensure(exposed <= previous, || {
                    format!("N = {n}, colluders {colluders:?}: grows at l = {l}")
                })?;
                previous = exposed;
            }
            placements += 1;
        }
    }
    Ok(format!(
        "initiator flagged in {flagged}/{trials}; exposure monotone over {placements} placements"
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("group algebra", group_algebra),
        ("disjoint subgroups", disjoint_subgroups),
        ("receiver operator construction", receiver_construction),
        ("codebook validity", codebook_validity),
        ("end-to-end protocol", end_to_end),
        ("worked three-party example", worked_example),
        ("entangle-and-measure", entangle_measure),
        ("intercept-and-resend", intercept_resend),
        ("announcement leakage", leakage),
        ("qubit efficiency", efficiency),
        ("insider mitigations", insider_mitigations),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
