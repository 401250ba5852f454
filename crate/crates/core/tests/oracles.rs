//! Checks against independent reference computations: dense complex
//! matrices, brute-force subset enumeration and exact binomial sums.

use std::collections::BTreeSet;

mod common;

use common::{apply, embedded, equal_up_to_phase, matmul, word_matrix};
use num_complex::Complex64;
use qconf_core::adversary::InterceptResend;
use qconf_core::codebook::{build_codebook, preset, Protocol, PRESETS};
use qconf_core::pauli::{enumerate_subgroups, PauliWord};
use qconf_core::protocol::{run_conference, ConferenceConfig, EventKind};
use qconf_core::state::{prepare_state, StateDescriptor};

fn words(len: usize) -> Vec<PauliWord> {
    PauliWord::all(len).unwrap()
}

#[test]
fn products_match_matrix_products_up_to_phase() {
    for len in 1..=2 {
        for a in words(len) {
            for b in words(len) {
                let product = a.mul(&b).unwrap();
                let oracle = matmul(&word_matrix(&a.to_string()), &word_matrix(&b.to_string()));
                assert!(
                    equal_up_to_phase(&oracle, &word_matrix(&product.to_string())),
                    "{a} * {b} = {product}"
                );
            }
        }
    }
}

#[test]
fn word_application_matches_dense_operator() {
    let ghz = prepare_state(&StateDescriptor::preset("ghz3")).unwrap();
    let cluster = prepare_state(&StateDescriptor::preset("cluster4")).unwrap();
    for (state, targets) in [
        (&ghz, vec![0, 1]),
        (&cluster, vec![0, 2]),
        (&cluster, vec![3, 1]),
    ] {
        for w in words(targets.len()) {
            let got = state.apply_word(&w, &targets).unwrap();
            let want = apply(
                &embedded(&w.to_string(), &targets, state.qubit_count()),
                state.amplitudes(),
            );
            for (g, e) in got.amplitudes().iter().zip(&want) {
                assert!((g - e).norm() < 1e-12, "{w} on {targets:?}");
            }
        }
    }
}

fn closed(set: &BTreeSet<PauliWord>) -> bool {
    set.iter()
        .all(|a| set.iter().all(|b| set.contains(&a.mul(b).unwrap())))
}

/// Every subset of the given size containing the identity, filtered by closure.
fn brute_force_subgroups(len: usize, order: usize) -> BTreeSet<BTreeSet<PauliWord>> {
    let all = words(len);
    let identity = all[0];
    let rest: Vec<PauliWord> = all[1..].to_vec();
    let mut found = BTreeSet::new();
    for mask in 0u32..1 << rest.len() {
        if mask.count_ones() as usize != order - 1 {
            continue;
        }
        let mut set: BTreeSet<PauliWord> = (0..rest.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| rest[i])
            .collect();
        set.insert(identity);
        if closed(&set) {
            found.insert(set);
        }
    }
    found
}

#[test]
fn subgroup_enumeration_matches_brute_force() {
    for (len, order) in [(1, 1), (1, 2), (1, 4), (2, 2), (2, 4), (2, 8), (2, 16)] {
        let fast: BTreeSet<BTreeSet<PauliWord>> = enumerate_subgroups(len, order)
            .unwrap()
            .into_iter()
            .map(|g| g.elements().iter().copied().collect())
            .collect();
        assert_eq!(
            fast,
            brute_force_subgroups(len, order),
            "G_{len}, order {order}"
        );
    }
}

#[test]
fn preset_gram_matrices_are_identity() {
    for info in PRESETS {
        let cb = build_codebook(&preset(info.name, Protocol::One).unwrap()).unwrap();
        let seed = cb.seed_state();
        let states: Vec<Vec<Complex64>> = cb
            .message_tuples()
            .iter()
            .map(|t| {
                let w = cb.encode(t).unwrap();
                apply(
                    &embedded(&w.to_string(), cb.travel_qubits(), seed.qubit_count()),
                    seed.amplitudes(),
                )
            })
            .collect();
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate() {
                let ip: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip.norm() - want).abs() < 1e-9, "{} ({i},{j})", info.name);
            }
        }
    }
}

fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    let mut pmf = vec![0.0; n as usize + 1];
    let mut coeff = 1.0_f64;
    for k in 0..=n {
        if k > 0 {
            coeff *= (n - k + 1) as f64 / k as f64;
        }
        pmf[k as usize] = coeff * p.powi(k as i32) * (1.0 - p).powi((n - k) as i32);
    }
    pmf
}

/// Probability that a fully intercepted hop with `d` decoys aborts at the
/// given threshold, conditioned on at least one matched basis.
fn hop_abort_probability(d: u64, threshold: f64) -> f64 {
    let matched = binomial_pmf(d, 0.5);
    let mut abort = 0.0;
    for m in 1..=d {
        let errors = binomial_pmf(m, 0.25);
        let tail: f64 = (0..=m)
            .filter(|&e| e as f64 / m as f64 > threshold)
            .map(|e| errors[e as usize])
            .sum();
        abort += matched[m as usize] * tail;
    }
    abort / (1.0 - matched[0])
}

#[test]
fn intercepted_hop_abort_rate_matches_binomial_oracle() {
    let cb = build_codebook(&preset("dialogue-2p-2b", Protocol::Two).unwrap()).unwrap();
    let messages = vec!["01".parse().unwrap(), "10".parse().unwrap()];
    let trials = 2000u64;
    let mut aborted_first_hop = 0u64;
    for seed in 0..trials {
        let mut cfg = ConferenceConfig::new(cb.clone(), messages.clone()).with_seed(seed);
        cfg.decoys_per_hop = 50;
        let mut eve = InterceptResend::new(1.0, seed + 1_000_000);
        let t = run_conference(&cfg, Some(&mut eve)).unwrap();
        if let Some(EventKind::Abort { hop: 0, .. }) = t.abort().map(|e| &e.kind) {
            aborted_first_hop += 1;
        }
    }
    let p = hop_abort_probability(50, 0.17);
    let observed = aborted_first_hop as f64 / trials as f64;
    let sigma = (p * (1.0 - p) / trials as f64).sqrt();
    assert!(
        (observed - p).abs() < 3.0 * sigma,
        "observed {observed}, oracle {p}"
    );
    // One hop alone aborts well below 99% of the time.
    assert!(p > 0.75 && p < 0.85);
}

#[test]
fn undisturbed_hops_have_zero_error() {
    let cb = build_codebook(&preset("table2-3p-1b", Protocol::One).unwrap()).unwrap();
    for d in [1, 2, 7, 40] {
        let mut cfg =
            ConferenceConfig::new(cb.clone(), vec!["1".parse().unwrap(), "0".parse().unwrap()]);
        cfg.decoys_per_hop = d;
        let t = run_conference(&cfg, None).unwrap();
        for e in &t.events {
            if let EventKind::DecoyCheck {
                errors, error_rate, ..
            } = e.kind
            {
                assert_eq!((errors, error_rate), (0, 0.0));
            }
        }
        assert!(t.abort().is_none());
    }
}
