use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::codebook::Message;
use crate::error::{Error, Result};
use crate::pauli::PauliWord;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event_type", content = "payload", rename_all = "snake_case")]
pub enum EventKind {
    Prepare {
        state: String,
        initial_label: PauliWord,
        initial_secret: bool,
        travel: Vec<usize>,
    },
    Commit {
        digest: String,
    },
    Transmit {
        hop: usize,
        to: String,
        payload: usize,
        decoys: usize,
        attempt: u32,
    },
    Acknowledge {
        hop: usize,
        from: String,
    },
    Disclose {
        hop: usize,
        positions: Vec<usize>,
    },
    DecoyCheck {
        hop: usize,
        matched: usize,
        errors: usize,
        error_rate: f64,
        passed: bool,
    },
    Inconclusive {
        hop: usize,
        attempt: u32,
    },
    SegmentCheck {
        segment: usize,
        passed: bool,
    },
    Encode {
        message: Message,
        operator: PauliWord,
    },
    Measure {
        label: PauliWord,
    },
    Announce {
        initial_label: Option<PauliWord>,
        final_label: PauliWord,
    },
    Decode {
        tuple: Vec<Message>,
        correct: bool,
    },
    Reveal {
        message: Message,
        salt: String,
    },
    CommitmentCheck {
        party: String,
        valid: bool,
    },
    CheaterIdentified {
        party: String,
        reason: String,
    },
    Integrity {
        reason: String,
    },
    Abort {
        hop: usize,
        error_rate: f64,
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub step_ref: String,
    pub actor: String,
    #[serde(flatten)]
    pub kind: EventKind,
    /// Engine random draws consumed up to and including this event.
    pub rng_draws: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub events: Vec<Event>,
}

impl Transcript {
    /// One JSON object per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("events serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        let events = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                serde_json::from_str(l)
                    .map_err(|e| Error::Config(format!("bad transcript line: {e}")))
            })
            .collect::<Result<_>>()?;
        Ok(Transcript { events })
    }

    pub fn abort(&self) -> Option<&Event> {
        self.events
            .iter()
            .find(|e| matches!(e.kind, EventKind::Abort { .. }))
    }

    pub fn integrity_failures(&self) -> Vec<&str> {
        self.events
            .iter()
            .filter_map(|e| match &e.kind {
                EventKind::Integrity { reason } => Some(reason.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Decoded tuples by party, with their correctness flags.
    pub fn decodes(&self) -> BTreeMap<&str, (&[Message], bool)> {
        self.events
            .iter()
            .filter_map(|e| match &e.kind {
                EventKind::Decode { tuple, correct } => {
                    Some((e.actor.as_str(), (tuple.as_slice(), *correct)))
                }
                _ => None,
            })
            .collect()
    }

    pub fn announcements(&self) -> Vec<(Option<PauliWord>, PauliWord)> {
        self.events
            .iter()
            .filter_map(|e| match e.kind {
                EventKind::Announce {
                    initial_label,
                    final_label,
                } => Some((initial_label, final_label)),
                _ => None,
            })
            .collect()
    }

    pub fn cheaters(&self) -> Vec<&str> {
        self.events
            .iter()
            .filter_map(|e| match &e.kind {
                EventKind::CheaterIdentified { party, .. } => Some(party.as_str()),
                _ => None,
            })
            .collect()
    }

    /// Number of encode events per party.
    pub fn encode_counts(&self) -> BTreeMap<&str, usize> {
        let mut counts = BTreeMap::new();
        for e in &self.events {
            if let EventKind::Encode { .. } = e.kind {
                *counts.entry(e.actor.as_str()).or_default() += 1;
            }
        }
        counts
    }

    /// True when the run finished without abort or integrity failure and
    /// every party that decoded got the true messages.
    pub fn succeeded(&self) -> bool {
        let decodes = self.decodes();
        self.abort().is_none()
            && self.integrity_failures().is_empty()
            && !decodes.is_empty()
            && decodes.values().all(|(_, ok)| *ok)
    }
}
