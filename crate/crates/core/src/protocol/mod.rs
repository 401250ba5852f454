//! Circular execution of both conference protocols.
//!
//! Position 0 on the circle is the initiator, which prepares and finally
//! measures the channel; positions `1..N` are the senders in codebook order.
//! Hop `h` carries the travel qubits from position `h` to `h + 1 (mod N)`,
//! each accompanied by freshly prepared decoys.

mod commitment;
mod config;
mod subcircle;
mod transcript;

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use commitment::{commit_message, verify_commitment, CommitmentToken, Opening};
pub use config::{
    ConferenceConfig, ConfigFile, InitialState, InitiatorPolicy, DEFAULT_ABORT_THRESHOLD,
    DEFAULT_INCONCLUSIVE_RETRIES,
};
pub use subcircle::{check_partition, partition_from_boundaries, partition_subcircles, Subcircle};
pub use transcript::{Event, EventKind, Transcript};

use crate::adversary::{Interceptor, Transit};
use crate::codebook::{decode_p1, decode_p2, Message, Protocol};
use crate::error::{Error, Result};
use crate::pauli::PauliWord;
use crate::state::{
    measure_decoy, measure_in_basis, Basis, DecoyQubit, StateDescriptor, StateVector,
};

/// Counts calls into the wrapped generator.
#[derive(Clone, Debug)]
pub struct CountingRng<R> {
    inner: R,
    draws: u64,
}

impl<R> CountingRng<R> {
    pub fn new(inner: R) -> Self {
        CountingRng { inner, draws: 0 }
    }

    pub fn draws(&self) -> u64 {
        self.draws
    }
}

impl<R: RngCore> RngCore for CountingRng<R> {
    fn next_u32(&mut self) -> u32 {
        self.draws += 1;
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.draws += 1;
        self.inner.fill_bytes(dst)
    }
}

/// Result of one decoy-checked transmission.
#[derive(Clone, Debug, PartialEq)]
pub enum HopOutcome {
    Delivered { error_rate: f64 },
    Aborted { error_rate: f64 },
}

struct Run<'a, 'b> {
    cfg: &'a ConferenceConfig,
    rng: CountingRng<ChaCha8Rng>,
    adversary: Option<&'b mut dyn Interceptor>,
    events: Vec<Event>,
    names: Vec<String>,
}

/// Simulates one complete pass around the circle.
pub fn run_conference(
    cfg: &ConferenceConfig,
    adversary: Option<&mut dyn Interceptor>,
) -> Result<Transcript> {
    cfg.validate()?;
    let cb = &cfg.codebook;
    let names = std::iter::once(cb.receiver_id().to_string())
        .chain(cb.senders().iter().map(|p| p.id.clone()))
        .collect();
    let mut run = Run {
        cfg,
        rng: CountingRng::new(ChaCha8Rng::seed_from_u64(cfg.seed)),
        adversary,
        events: Vec::new(),
        names,
    };
    run.execute()?;
    Ok(Transcript { events: run.events })
}

fn describe(state: &StateDescriptor) -> String {
    match state {
        StateDescriptor::Preset(name) => name.clone(),
        StateDescriptor::Amplitudes(a) => format!("custom({} amplitudes)", a.len()),
    }
}

impl Run<'_, '_> {
    fn protocol_digit(&self) -> u8 {
        self.cfg.codebook.protocol().into()
    }

    fn step(&self, step: u8) -> String {
        format!("{}.{}", self.protocol_digit(), step)
    }

    /// Hops 0 and 1 are the first two transmissions; everything after is
    /// "the same strategy" step.
    fn hop_step(&self, hop: usize) -> String {
        self.step(3 + hop.min(2) as u8)
    }

    fn emit(&mut self, step_ref: String, actor: &str, kind: EventKind) {
        self.events.push(Event {
            seq: self.events.len() as u64,
            step_ref,
            actor: actor.to_string(),
            kind,
            rng_draws: self.rng.draws(),
        });
    }

    fn execute(&mut self) -> Result<()> {
        let cb = &self.cfg.codebook;
        let travel = cb.travel_qubits().to_vec();
        let initiator = self.names[0].clone();
        let n = cb.party_count();
        let initiator_index = cb.parties().len() - 1;

        let mut commitment = None;
        if self.cfg.commitment {
            let message = self.cfg.messages[initiator_index];
            let (token, opening) = commit_message(&initiator, message, &mut self.rng);
            self.emit(
                self.step(2),
                &initiator,
                EventKind::Commit {
                    digest: token.digest.clone(),
                },
            );
            commitment = Some((token, opening));
        }

        let initial_label = match self.cfg.initial_state {
            InitialState::Fixed => PauliWord::identity(cb.word_len())?,
            InitialState::Random => {
                let labels = cb.basis().labels();
                labels[self.rng.random_range(0..labels.len())]
            }
        };
        let mut state = cb.seed_state().apply_word(&initial_label, &travel)?;
        self.emit(
            self.step(2),
            &initiator,
            EventKind::Prepare {
                state: describe(cb.state_descriptor()),
                initial_label,
                initial_secret: self.cfg.initial_state == InitialState::Random,
                travel: travel.clone(),
            },
        );

        let segments = partition_subcircles(n, self.cfg.subcircles)?;
        for hop in 0..n {
            let to = (hop + 1) % n;
            if let HopOutcome::Aborted { .. } = self.transmit(hop, hop, to, Some(&mut state))? {
                return Ok(());
            }
            if to != 0 {
                let party = &cb.senders()[to - 1];
                let message = self.cfg.messages[to - 1];
                let op = party.operator(message)?;
                state = state.apply_word(&op, &travel)?;
                self.emit(
                    self.hop_step(hop),
                    &party.id,
                    EventKind::Encode {
                        message,
                        operator: op,
                    },
                );
            }
            if segments.len() > 1 {
                if let Some(i) = segments.iter().position(|s| s.last_hop(n) == hop) {
                    let from = segments[i].start;
                    let outcome = self.transmit(hop, from, to, None)?;
                    let passed = matches!(outcome, HopOutcome::Delivered { .. });
                    let actor = self.names[to].clone();
                    self.emit(
                        self.hop_step(hop),
                        &actor,
                        EventKind::SegmentCheck { segment: i, passed },
                    );
                    if !passed {
                        return Ok(());
                    }
                }
            }
        }

        let protocol = cb.protocol();
        let mut true_initiator_op = None;
        if protocol == Protocol::Two {
            let message = self.cfg.messages[initiator_index];
            let op = cb.parties()[initiator_index].operator(message)?;
            state = state.apply_word(&op, &travel)?;
            self.emit(
                self.step(6),
                &initiator,
                EventKind::Encode {
                    message,
                    operator: op,
                },
            );
            true_initiator_op = Some(op);
        }

        let final_step = self.step(if protocol == Protocol::One { 6 } else { 7 });
        let measured = match measure_in_basis(&state, cb.basis(), &mut self.rng) {
            Ok((label, _)) => label,
            Err(Error::OutsideSpan { residual }) => {
                self.emit(
                    final_step,
                    &initiator,
                    EventKind::Integrity {
                        reason: format!(
                            "channel state left the measurement basis (residual {residual:.3e})"
                        ),
                    },
                );
                return Ok(());
            }
            Err(e) => return Err(e),
        };
        self.emit(
            final_step.clone(),
            &initiator,
            EventKind::Measure { label: measured },
        );

        match protocol {
            Protocol::One => {
                let truth = &self.cfg.messages;
                match decode_p1(cb, &measured) {
                    Ok(tuple) => {
                        let correct = tuple == *truth;
                        self.emit(final_step, &initiator, EventKind::Decode { tuple, correct });
                    }
                    Err(e) => self.emit(
                        final_step,
                        &initiator,
                        EventKind::Integrity {
                            reason: e.to_string(),
                        },
                    ),
                }
            }
            Protocol::Two => {
                let (announced, revealed) = match &self.cfg.initiator {
                    InitiatorPolicy::Honest => (measured, self.cfg.messages[initiator_index]),
                    InitiatorPolicy::RewriteAnnouncement { message } => {
                        let fake = cb.parties()[initiator_index].operator(*message)?;
                        let real = true_initiator_op.expect("protocol 2 initiator encoded");
                        (measured.mul(&real)?.mul(&fake)?, *message)
                    }
                };
                let public_initial = match self.cfg.initial_state {
                    InitialState::Fixed => Some(initial_label),
                    InitialState::Random => None,
                };
                self.emit(
                    final_step.clone(),
                    &initiator,
                    EventKind::Announce {
                        initial_label: public_initial,
                        final_label: announced,
                    },
                );
                let truth = self.cfg.messages.clone();
                for (i, party) in cb.parties().iter().enumerate() {
                    let own = if i == initiator_index {
                        revealed
                    } else {
                        truth[i]
                    };
                    match decode_p2(cb, &party.id, own, &initial_label, &announced) {
                        Ok(tuple) => {
                            let correct = tuple == truth;
                            self.emit(
                                final_step.clone(),
                                &party.id,
                                EventKind::Decode { tuple, correct },
                            );
                        }
                        Err(e) => self.emit(
                            final_step.clone(),
                            &party.id,
                            EventKind::Integrity {
                                reason: e.to_string(),
                            },
                        ),
                    }
                }
                if let Some((token, opening)) = commitment {
                    let shown = Opening {
                        message: revealed,
                        salt: opening.salt,
                    };
                    self.emit(
                        final_step.clone(),
                        &initiator,
                        EventKind::Reveal {
                            message: shown.message,
                            salt: shown.salt.clone(),
                        },
                    );
                    let valid = verify_commitment(&token, &shown);
                    self.emit(
                        final_step.clone(),
                        &initiator,
                        EventKind::CommitmentCheck {
                            party: initiator.clone(),
                            valid,
                        },
                    );
                    if !valid {
                        self.emit(
                            final_step,
                            &initiator,
                            EventKind::CheaterIdentified {
                                party: initiator.clone(),
                                reason: "revealed message does not open the commitment".into(),
                            },
                        );
                    }
                }
            }
        }
        Ok(())
    }

    /// Decoy-checked transmission from position `from` to `to`. Without a
    /// payload only decoys travel (segment re-verification).
    fn transmit(
        &mut self,
        hop: usize,
        from: usize,
        to: usize,
        mut payload: Option<&mut StateVector>,
    ) -> Result<HopOutcome> {
        let travel: Vec<usize> = if payload.is_some() {
            self.cfg.codebook.travel_qubits().to_vec()
        } else {
            Vec::new()
        };
        let d = self.cfg.decoys_per_hop;
        let step = self.hop_step(hop);
        let (sender, receiver) = (self.names[from].clone(), self.names[to].clone());

        for attempt in 0..=self.cfg.inconclusive_retries {
            let prepared: Vec<DecoyQubit> =
                (0..d).map(|_| DecoyQubit::random(&mut self.rng)).collect();
            let mut positions = index::sample(&mut self.rng, travel.len() + d, d).into_vec();
            positions.sort_unstable();
            let mut stream = Vec::with_capacity(travel.len() + d);
            let (mut next_decoy, mut next_travel) = (0, 0);
            for slot in 0..travel.len() + d {
                if positions.get(next_decoy) == Some(&slot) {
                    stream.push(Transit::Decoy(prepared[next_decoy]));
                    next_decoy += 1;
                } else {
                    stream.push(Transit::Travel(travel[next_travel]));
                    next_travel += 1;
                }
            }
            self.emit(
                step.clone(),
                &sender,
                EventKind::Transmit {
                    hop,
                    to: receiver.clone(),
                    payload: travel.len(),
                    decoys: d,
                    attempt,
                },
            );
            if let Some(eve) = self.adversary.as_deref_mut() {
                eve.intercept(hop, &mut stream, payload.as_deref_mut())?;
            }
            self.emit(
                step.clone(),
                &receiver,
                EventKind::Acknowledge {
                    hop,
                    from: sender.clone(),
                },
            );
            self.emit(
                step.clone(),
                &sender,
                EventKind::Disclose {
                    hop,
                    positions: positions.clone(),
                },
            );

            let (mut matched, mut errors) = (0, 0);
            for (k, &pos) in positions.iter().enumerate() {
                let Transit::Decoy(received) = stream[pos] else {
                    return Err(Error::Integrity(
                        "disclosed position holds a travel qubit".into(),
                    ));
                };
                let basis = Basis::random(&mut self.rng);
                let bit = measure_decoy(received, basis, &mut self.rng);
                if basis == prepared[k].basis {
                    matched += 1;
                    if bit != prepared[k].bit {
                        errors += 1;
                    }
                }
            }
            if matched == 0 {
                self.emit(
                    step.clone(),
                    &receiver,
                    EventKind::Inconclusive { hop, attempt },
                );
                continue;
            }
            let error_rate = errors as f64 / matched as f64;
            let passed = error_rate <= self.cfg.abort_threshold;
            self.emit(
                step.clone(),
                &receiver,
                EventKind::DecoyCheck {
                    hop,
                    matched,
                    errors,
                    error_rate,
                    passed,
                },
            );
            if !passed {
                self.emit(
                    step,
                    &receiver,
                    EventKind::Abort {
                        hop,
                        error_rate,
                        reason: "decoy error rate above threshold".into(),
                    },
                );
                return Ok(HopOutcome::Aborted { error_rate });
            }
            return Ok(HopOutcome::Delivered { error_rate });
        }
        self.emit(
            step,
            &receiver,
            EventKind::Abort {
                hop,
                error_rate: 0.0,
                reason: "no matched-basis decoys after retries".into(),
            },
        );
        Ok(HopOutcome::Aborted { error_rate: 0.0 })
    }
}

/// Runs every message tuple of a codebook once without an adversary.
pub fn exhaustive_runs(cfg: &ConferenceConfig) -> Result<Vec<(Vec<Message>, Transcript)>> {
    cfg.codebook
        .message_tuples()
        .into_iter()
        .map(|tuple| {
            let mut c = cfg.clone();
            c.messages = tuple.clone();
            run_conference(&c, None).map(|t| (tuple, t))
        })
        .collect()
}
