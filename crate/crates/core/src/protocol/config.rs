use serde::{Deserialize, Serialize};

use crate::adversary::InterceptorSpec;
use crate::codebook::{self, build_codebook, Codebook, CodebookDescriptor, Message, Protocol};
use crate::error::{Error, Result};

pub const DEFAULT_ABORT_THRESHOLD: f64 = 0.17;
/// Retries after a decoy check with no matched bases. At one decoy per hop
/// each attempt is inconclusive with probability 1/2.
pub const DEFAULT_INCONCLUSIVE_RETRIES: u32 = 64;

/// How the protocol-2 initiator picks the state it sends out.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// The seed state; the announcement reveals it.
    #[default]
    Fixed,
    /// A uniformly random basis state, kept secret.
    Random,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitiatorPolicy {
    Honest,
    /// Encode the real message but announce the outcome that `message`
    /// would have produced.
    RewriteAnnouncement {
        message: Message,
    },
}

#[derive(Clone, Debug)]
pub struct ConferenceConfig {
    pub codebook: Codebook,
    /// One message per encoding party, in codebook order.
    pub messages: Vec<Message>,
    pub decoys_per_hop: usize,
    pub abort_threshold: f64,
    pub inconclusive_retries: u32,
    pub commitment: bool,
    /// Number of sub-circles; 1 runs the plain circle.
    pub subcircles: usize,
    pub initial_state: InitialState,
    pub initiator: InitiatorPolicy,
    pub seed: u64,
}

impl ConferenceConfig {
    /// Defaults: one decoy per travel qubit on every hop, 17% abort
    /// threshold, no commitment, a single circle.
    pub fn new(codebook: Codebook, messages: Vec<Message>) -> Self {
        ConferenceConfig {
            decoys_per_hop: codebook.travel_qubits().len(),
            codebook,
            messages,
            abort_threshold: DEFAULT_ABORT_THRESHOLD,
            inconclusive_retries: DEFAULT_INCONCLUSIVE_RETRIES,
            commitment: false,
            subcircles: 1,
            initial_state: InitialState::Fixed,
            initiator: InitiatorPolicy::Honest,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let parties = self.codebook.parties();
        if self.messages.len() != parties.len() {
            return Err(Error::Config(format!(
                "{} encoding parties but {} messages",
                parties.len(),
                self.messages.len()
            )));
        }
        for (p, m) in parties.iter().zip(&self.messages) {
            if m.bits() != p.bits {
                return Err(Error::Config(format!(
                    "party {} sends {} bits, got {m}",
                    p.id, p.bits
                )));
            }
        }
        if self.decoys_per_hop == 0 {
            return Err(Error::Config("decoys_per_hop must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.abort_threshold) {
            return Err(Error::Config("abort_threshold must lie in [0, 1]".into()));
        }
        let n = self.codebook.party_count();
        if self.subcircles == 0 || self.subcircles > n {
            return Err(Error::Config(format!("subcircles must lie in 1..={n}")));
        }
        let two = self.codebook.protocol() == Protocol::Two;
        if !two && (self.initial_state == InitialState::Random || self.commitment) {
            return Err(Error::Config(
                "random initial states and commitments apply to protocol 2 only".into(),
            ));
        }
        if let InitiatorPolicy::RewriteAnnouncement { message } = &self.initiator {
            let bits = parties.last().expect("parties").bits;
            if !two || message.bits() != bits {
                return Err(Error::Config(format!(
                    "a rewritten announcement needs protocol 2 and a {bits}-bit message"
                )));
            }
        }
        Ok(())
    }
}

/// A run description as stored on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub protocol: Protocol,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codebook: Option<CodebookDescriptor>,
    pub messages: Vec<Message>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoys_per_hop: Option<usize>,
    #[serde(default = "default_threshold")]
    pub abort_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inconclusive_retries: Option<u32>,
    #[serde(default)]
    pub commitment: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subcircles: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub initial_state: InitialState,
    /// Makes the initiator announce as if it had sent this message.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub announce_as: Option<Message>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adversary: Option<InterceptorSpec>,
}

fn default_threshold() -> f64 {
    DEFAULT_ABORT_THRESHOLD
}

impl ConfigFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn descriptor(&self) -> Result<CodebookDescriptor> {
        match (&self.preset, &self.codebook) {
            (Some(name), None) => codebook::preset(name, self.protocol),
            (None, Some(desc)) if desc.protocol == self.protocol => Ok(desc.clone()),
            (None, Some(_)) => Err(Error::Config(
                "codebook protocol differs from the run protocol".into(),
            )),
            _ => Err(Error::Config(
                "give exactly one of `preset` and `[codebook]`".into(),
            )),
        }
    }

    /// Builds the run; `seed` overrides the file's seed.
    pub fn resolve(
        &self,
        seed: Option<u64>,
    ) -> Result<(ConferenceConfig, Option<InterceptorSpec>)> {
        let cb = build_codebook(&self.descriptor()?)?;
        let mut cfg = ConferenceConfig::new(cb, self.messages.clone());
        if let Some(d) = self.decoys_per_hop {
            cfg.decoys_per_hop = d;
        }
        cfg.abort_threshold = self.abort_threshold;
        if let Some(r) = self.inconclusive_retries {
            cfg.inconclusive_retries = r;
        }
        cfg.commitment = self.commitment;
        cfg.subcircles = self.subcircles.unwrap_or(1);
        cfg.initial_state = self.initial_state;
        if let Some(message) = self.announce_as {
            cfg.initiator = InitiatorPolicy::RewriteAnnouncement { message };
        }
        cfg.seed = seed.unwrap_or(self.seed);
        cfg.validate()?;
        if let Some(spec) = &self.adversary {
            spec.validate()?;
        }
        Ok((cfg, self.adversary.clone()))
    }
}
