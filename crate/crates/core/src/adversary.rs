//! Eavesdroppers on the quantum channel, the closed-form attack analytics,
//! announcement leakage and the insider collusion model.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codebook::{Codebook, Protocol};
use crate::error::{Error, Result};
use crate::metrics::binary_entropy;
use crate::pauli::PauliWord;
use crate::protocol::Subcircle;
use crate::state::{measure_decoy, Basis, DecoyQubit, StateVector};

/// One element of a transmitted qubit stream.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transit {
    Decoy(DecoyQubit),
    /// Index of a channel qubit in the joint state.
    Travel(usize),
}

/// A channel attacker. It sees every transmitted stream after the sender
/// has interleaved decoys and before the receiver acknowledges.
pub trait Interceptor {
    /// `channel` is the joint channel state; it is `None` for decoy-only
    /// streams.
    fn intercept(
        &mut self,
        hop: usize,
        stream: &mut [Transit],
        channel: Option<&mut StateVector>,
    ) -> Result<()>;

    /// Decoys attacked so far.
    fn decoys_attacked(&self) -> u64;

    /// Travel qubits attacked so far.
    fn travel_attacked(&self) -> u64;
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InterceptorSpec {
    InterceptResend {
        fraction: f64,
        #[serde(default)]
        seed: u64,
    },
    EntangleMeasure {
        beta_sq: f64,
        #[serde(default)]
        seed: u64,
    },
}

impl InterceptorSpec {
    pub fn validate(&self) -> Result<()> {
        let (name, p) = match self {
            InterceptorSpec::InterceptResend { fraction, .. } => ("fraction", *fraction),
            InterceptorSpec::EntangleMeasure { beta_sq, .. } => ("beta_sq", *beta_sq),
        };
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Box<dyn Interceptor>> {
        self.validate()?;
        Ok(match *self {
            InterceptorSpec::InterceptResend { fraction, seed } => {
                Box::new(InterceptResend::new(fraction, seed))
            }
            InterceptorSpec::EntangleMeasure { beta_sq, seed } => {
                Box::new(EntangleMeasure::new(beta_sq, seed))
            }
        })
    }
}

/// Measures each qubit with probability `fraction` in a random basis and
/// resends the eigenstate it observed.
pub struct InterceptResend {
    fraction: f64,
    rng: ChaCha8Rng,
    decoys: u64,
    travel: u64,
}

impl InterceptResend {
    pub fn new(fraction: f64, seed: u64) -> Self {
        InterceptResend {
            fraction,
            rng: ChaCha8Rng::seed_from_u64(seed),
            decoys: 0,
            travel: 0,
        }
    }
}

impl Interceptor for InterceptResend {
    fn intercept(
        &mut self,
        _hop: usize,
        stream: &mut [Transit],
        mut channel: Option<&mut StateVector>,
    ) -> Result<()> {
        for item in stream.iter_mut() {
            if !self.rng.random_bool(self.fraction) {
                continue;
            }
            let basis = Basis::random(&mut self.rng);
            match item {
                Transit::Decoy(d) => {
                    let bit = measure_decoy(*d, basis, &mut self.rng);
                    *d = DecoyQubit { basis, bit };
                    self.decoys += 1;
                }
                Transit::Travel(q) => {
                    let state = channel
                        .as_deref_mut()
                        .ok_or_else(|| Error::invalid("travel qubit without a channel state"))?;
                    state.measure_qubit(*q, basis, &mut self.rng)?;
                    self.travel += 1;
                }
            }
        }
        Ok(())
    }

    fn decoys_attacked(&self) -> u64 {
        self.decoys
    }

    fn travel_attacked(&self) -> u64 {
        self.travel
    }
}

/// Couples an ancilla `α|0⟩ + β|1⟩` to every passing qubit with a CNOT
/// (ancilla as control) and measures the ancilla in the Z basis.
pub struct EntangleMeasure {
    ancilla: StateVector,
    rng: ChaCha8Rng,
    decoys: u64,
    travel: u64,
}

impl EntangleMeasure {
    pub fn new(beta_sq: f64, seed: u64) -> Self {
        let ancilla = StateVector::from_real(&[(1.0 - beta_sq).sqrt(), beta_sq.sqrt()])
            .expect("amplitudes are normalized");
        EntangleMeasure {
            ancilla,
            rng: ChaCha8Rng::seed_from_u64(seed),
            decoys: 0,
            travel: 0,
        }
    }

    fn attack(&mut self, state: &StateVector, qubit: usize) -> Result<StateVector> {
        let mut joint = self.ancilla.tensor(state)?;
        joint.apply_cnot(0, qubit + 1)?;
        let bit = joint.measure_qubit(0, Basis::Z, &mut self.rng)?;
        joint.discard_qubit(0, bit)
    }
}

impl Interceptor for EntangleMeasure {
    fn intercept(
        &mut self,
        _hop: usize,
        stream: &mut [Transit],
        mut channel: Option<&mut StateVector>,
    ) -> Result<()> {
        for item in stream.iter_mut() {
            match item {
                Transit::Decoy(d) => {
                    let out = self.attack(&d.to_state(), 0)?;
                    *d = DecoyQubit::from_state(&out)
                        .ok_or_else(|| Error::Integrity("decoy left the BB84 set".into()))?;
                    self.decoys += 1;
                }
                Transit::Travel(q) => {
                    let state = channel
                        .as_deref_mut()
                        .ok_or_else(|| Error::invalid("travel qubit without a channel state"))?;
                    *state = self.attack(state, *q)?;
                    self.travel += 1;
                }
            }
        }
        Ok(())
    }

    fn decoys_attacked(&self) -> u64 {
        self.decoys
    }

    fn travel_attacked(&self) -> u64 {
        self.travel
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub scenario: String,
    pub decoys_attacked: u64,
    pub matched_comparisons: u64,
    pub observed_error_rate: Option<f64>,
    pub analytic_error_rate: f64,
    pub i_ae: Option<f64>,
    pub i_ab: Option<f64>,
    pub detection_probability: f64,
    pub escape_probability: f64,
}

impl AttackReport {
    /// Sample standard deviation of the observed rate around the analytic one.
    pub fn sigma(&self) -> f64 {
        let p = self.analytic_error_rate;
        (p * (1.0 - p) / self.matched_comparisons.max(1) as f64).sqrt()
    }
}

/// Error rate `e = f/4` seen on matched-basis decoys.
pub fn intercept_error_rate(f: f64) -> f64 {
    f / 4.0
}

/// Eve's information `I(A:E) = f/2`.
pub fn information_eve(f: f64) -> f64 {
    f / 2.0
}

/// Legitimate information `I(A:B) = 1 − H(f/4)`.
pub fn information_bob(f: f64) -> f64 {
    1.0 - binary_entropy(f / 4.0).expect("f/4 lies in [0, 1/4]")
}

pub fn intercept_resend_analytics(f: f64) -> Result<AttackReport> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::invalid(format!("fraction {f} outside [0, 1]")));
    }
    Ok(AttackReport {
        scenario: "intercept-resend".into(),
        decoys_attacked: 0,
        matched_comparisons: 0,
        observed_error_rate: None,
        analytic_error_rate: intercept_error_rate(f),
        i_ae: Some(information_eve(f)),
        i_ab: Some(information_bob(f)),
        detection_probability: intercept_error_rate(f),
        escape_probability: 1.0 - intercept_error_rate(f),
    })
}

/// `I(A:B) ≥ I(A:E)`.
pub fn is_secure(f: f64) -> bool {
    information_bob(f) >= information_eve(f)
}

/// Root of `1 − H(f/4) = f/2` on (0, 1), by bisection to 1e-6.
pub fn solve_threshold() -> f64 {
    let g = |f: f64| information_bob(f) - information_eve(f);
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Probability that a full intercept-resend attack on `m` matched decoys
/// goes unnoticed, `(3/4)^m`.
pub fn escape_probability(decoys_attacked: u32) -> f64 {
    0.75_f64.powi(decoys_attacked as i32)
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DecoyStatistics {
    pub sent: u64,
    pub attacked: u64,
    pub matched: u64,
    pub errors: u64,
}

impl DecoyStatistics {
    pub fn error_rate(&self) -> f64 {
        if self.matched == 0 {
            0.0
        } else {
            self.errors as f64 / self.matched as f64
        }
    }
}

/// Sends uniformly random decoys one at a time through `interceptor` until
/// `matched` of them were measured by the receiver in their preparation
/// basis.
pub fn decoy_statistics<R: Rng + ?Sized>(
    interceptor: &mut dyn Interceptor,
    matched: u64,
    rng: &mut R,
) -> Result<DecoyStatistics> {
    let mut stats = DecoyStatistics::default();
    let before = interceptor.decoys_attacked();
    while stats.matched < matched {
        let prepared = DecoyQubit::random(rng);
        let mut stream = [Transit::Decoy(prepared)];
        interceptor.intercept(0, &mut stream, None)?;
        let Transit::Decoy(received) = stream[0] else {
            return Err(Error::Integrity("interceptor replaced a decoy".into()));
        };
        stats.sent += 1;
        let basis = Basis::random(rng);
        let bit = measure_decoy(received, basis, rng);
        if basis == prepared.basis {
            stats.matched += 1;
            if bit != prepared.bit {
                stats.errors += 1;
            }
        }
    }
    stats.attacked = interceptor.decoys_attacked() - before;
    Ok(stats)
}

/// Fraction of `trials` in which a full intercept-resend attack on `m`
/// matched decoys raises no error.
pub fn escape_frequency(m: u32, trials: u64, seed: u64) -> Result<f64> {
    let mut eve = InterceptResend::new(1.0, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut escaped = 0u64;
    for _ in 0..trials {
        let mut caught = false;
        for _ in 0..m {
            let prepared = DecoyQubit::random(&mut rng);
            let mut stream = [Transit::Decoy(prepared)];
            eve.intercept(0, &mut stream, None)?;
            if let Transit::Decoy(received) = stream[0] {
                if measure_decoy(received, prepared.basis, &mut rng) != prepared.bit {
                    caught = true;
                    break;
                }
            }
        }
        if !caught {
            escaped += 1;
        }
    }
    Ok(escaped as f64 / trials.max(1) as f64)
}

/// Monte-Carlo attack report over `matched` matched-basis decoys.
pub fn simulate_attack(spec: &InterceptorSpec, matched: u64, seed: u64) -> Result<AttackReport> {
    let mut eve = spec.build()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stats = decoy_statistics(eve.as_mut(), matched, &mut rng)?;
    let mut report = match *spec {
        InterceptorSpec::InterceptResend { fraction, .. } => intercept_resend_analytics(fraction)?,
        InterceptorSpec::EntangleMeasure { beta_sq, .. } => AttackReport {
            scenario: "entangle-measure".into(),
            decoys_attacked: 0,
            matched_comparisons: 0,
            observed_error_rate: None,
            analytic_error_rate: beta_sq / 2.0,
            i_ae: None,
            i_ab: None,
            detection_probability: beta_sq / 2.0,
            escape_probability: 1.0 - beta_sq / 2.0,
        },
    };
    report.decoys_attacked = stats.attacked;
    report.matched_comparisons = stats.matched;
    report.observed_error_rate = Some(stats.error_rate());
    Ok(report)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnouncementModel {
    /// The initial state is the public seed; both labels are announced.
    PublicFixedInitial,
    /// The initial basis state is chosen uniformly and kept secret; only the
    /// final label is public.
    SecretRandomInitial,
}

fn entropy_of_counts<'a>(counts: impl Iterator<Item = &'a u64>) -> f64 {
    let counts: Vec<u64> = counts.copied().collect();
    let total: u64 = counts.iter().sum();
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.log2()
        })
        .sum()
}

/// Average information an outsider gains from the public announcement,
/// `H_apriori − H_aposteriori`, for uniformly distributed messages.
pub fn compute_leakage(cb: &Codebook, model: AnnouncementModel) -> Result<f64> {
    if cb.protocol() == Protocol::One {
        // Nothing is announced.
        return Ok(0.0);
    }
    let tuples = cb.message_tuples();
    let h_apriori: f64 = cb.bits_per_party().iter().sum::<usize>() as f64;
    let initials: Vec<PauliWord> = match model {
        AnnouncementModel::PublicFixedInitial => vec![PauliWord::identity(cb.word_len())?],
        AnnouncementModel::SecretRandomInitial => cb.basis().labels().to_vec(),
    };

    // announcement -> (tuple index -> count)
    let mut groups: HashMap<(Option<PauliWord>, PauliWord), HashMap<usize, u64>> = HashMap::new();
    for (t, tuple) in tuples.iter().enumerate() {
        let composite = cb.encode(tuple)?;
        for initial in &initials {
            let final_label = composite.mul(initial)?;
            let public_initial = match model {
                AnnouncementModel::PublicFixedInitial => Some(*initial),
                AnnouncementModel::SecretRandomInitial => None,
            };
            *groups
                .entry((public_initial, final_label))
                .or_default()
                .entry(t)
                .or_default() += 1;
        }
    }
    let total = (tuples.len() * initials.len()) as f64;
    let h_aposteriori: f64 = groups
        .values()
        .map(|g| {
            let weight = g.values().sum::<u64>() as f64 / total;
            weight * entropy_of_counts(g.values())
        })
        .sum();
    Ok((h_apriori - h_aposteriori).max(0.0))
}

/// Parties whose encodings a set of colluding insiders can read.
///
/// Each sub-circle closes on itself. Within a sub-circle holding two or more
/// colluders, every party strictly between cyclically consecutive colluders
/// is exposed.
pub fn collusion_exposure(
    n: usize,
    colluders: &BTreeSet<usize>,
    subcircles: &[Subcircle],
) -> Result<BTreeSet<usize>> {
    if let Some(&bad) = colluders.iter().find(|&&c| c >= n) {
        return Err(Error::invalid(format!(
            "colluder position {bad} outside a circle of {n}"
        )));
    }
    crate::protocol::check_partition(n, subcircles)?;
    let mut exposed = BTreeSet::new();
    for seg in subcircles {
        let members = seg.members(n);
        let marks: Vec<usize> = (0..members.len())
            .filter(|&i| colluders.contains(&members[i]))
            .collect();
        if marks.len() < 2 {
            continue;
        }
        for (j, &a) in marks.iter().enumerate() {
            let b = marks[(j + 1) % marks.len()];
            let gap = (b + members.len() - a) % members.len();
            let gap = if gap == 0 { members.len() } else { gap };
            exposed.extend((1..gap).map(|s| members[(a + s) % members.len()]));
        }
    }
    Ok(exposed)
}
