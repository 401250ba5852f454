//! Encoding assignments: which operators each party uses, on which channel,
//! and how final measurement labels decode back into messages.
//!
//! A party encoding the integer `x` applies the operator at index `x` of its
//! list, so index 0 (the all-zeros message) is always the identity.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::pauli::{self, PauliWord, Subgroup};
use crate::state::{self, MeasurementBasis, StateDescriptor, StateVector, ORTHOGONALITY_TOLERANCE};

/// Upper bound on the number of message tuples enumerated during validation.
pub const MAX_ENUMERATED_TUPLES: usize = 1 << 16;
const MAX_LISTED_COLLISIONS: usize = 32;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Protocol {
    /// Many senders to one receiver; only the initiator decodes.
    One,
    /// Every party encodes once; the final outcome is announced and everyone decodes.
    Two,
}

impl TryFrom<u8> for Protocol {
    type Error = Error;

    fn try_from(value: u8) -> Result<Self> {
        match value {
            1 => Ok(Protocol::One),
            2 => Ok(Protocol::Two),
            other => Err(Error::Config(format!(
                "protocol must be 1 or 2, got {other}"
            ))),
        }
    }
}

impl From<Protocol> for u8 {
    fn from(value: Protocol) -> Self {
        match value {
            Protocol::One => 1,
            Protocol::Two => 2,
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", u8::from(*self))
    }
}

/// A `bits`-wide classical message, written most significant bit first.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Message {
    value: u32,
    bits: u8,
}

impl Message {
    pub fn new(value: u32, bits: usize) -> Result<Self> {
        if bits == 0 || bits > 16 || value >> bits != 0 {
            return Err(Error::invalid(format!(
                "{value} does not fit a {bits}-bit message"
            )));
        }
        Ok(Message {
            value,
            bits: bits as u8,
        })
    }

    pub fn zero(bits: usize) -> Result<Self> {
        Self::new(0, bits)
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn bits(&self) -> usize {
        self.bits as usize
    }
}

impl fmt::Display for Message {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:0width$b}", self.value, width = self.bits as usize)
    }
}

impl FromStr for Message {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || !s.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::Parse {
                what: "message",
                input: s.to_string(),
                reason: "expected a non-empty string of 0 and 1".into(),
            });
        }
        let value = u32::from_str_radix(s, 2).map_err(|e| Error::Parse {
            what: "message",
            input: s.to_string(),
            reason: e.to_string(),
        })?;
        Message::new(value, s.len())
    }
}

impl Serialize for Message {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Message {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(deserializer)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

pub fn format_tuple(tuple: &[Message]) -> String {
    tuple
        .iter()
        .map(|m| m.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartyOps {
    pub id: String,
    pub ops: Vec<PauliWord>,
}

impl PartyOps {
    pub fn new(id: &str, ops: &[&str]) -> Result<Self> {
        Ok(PartyOps {
            id: id.to_string(),
            ops: ops.iter().map(|s| s.parse()).collect::<Result<_>>()?,
        })
    }
}

/// The initiator prepares and measures the channel. Under protocol 2 it also
/// encodes; leave `ops` empty to derive them from the senders.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReceiverSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ops: Option<Vec<PauliWord>>,
}

/// Unvalidated codebook, as read from or written to a file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodebookDescriptor {
    pub protocol: Protocol,
    pub state: StateDescriptor,
    pub travel: Vec<usize>,
    pub receiver: ReceiverSpec,
    /// Senders in circular order, starting with the party that first
    /// receives the travel qubits.
    pub parties: Vec<PartyOps>,
}

impl CodebookDescriptor {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Switches between protocols. Going to protocol 1 drops the initiator's
    /// operators.
    pub fn with_protocol(mut self, protocol: Protocol) -> Self {
        self.protocol = protocol;
        if protocol == Protocol::One {
            self.receiver.ops = None;
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresetInfo {
    pub name: &'static str,
    pub parties: usize,
    pub bits: usize,
    pub state: &'static str,
    pub travel: &'static [usize],
    pub ops: &'static [&'static [&'static str]],
}

/// Registered encoding tables. The last list of each entry belongs to the
/// initiator and is only used under protocol 2.
pub const PRESETS: &[PresetInfo] = &[
    PresetInfo {
        name: "table2-3p-1b",
        parties: 3,
        bits: 1,
        state: "bell",
        travel: &[0],
        ops: &[&["I", "X"], &["I", "iY"], &["I", "Z"]],
    },
    PresetInfo {
        name: "table2-3p-2b-cluster",
        parties: 3,
        bits: 2,
        state: "cluster4",
        travel: &[0, 2],
        ops: &[
            &["I.I", "I.X", "X.I", "X.X"],
            &["I.I", "I.iY", "iY.I", "iY.iY"],
            &["I.I", "I.Z", "Z.I", "Z.Z"],
        ],
    },
    PresetInfo {
        name: "table2-4p-1b-ghz",
        parties: 4,
        bits: 1,
        state: "ghz3",
        travel: &[0, 1],
        ops: &[
            &["I.I", "X.I"],
            &["I.I", "X.X"],
            &["I.I", "iY.X"],
            &["I.I", "iY.I"],
        ],
    },
    PresetInfo {
        name: "table2-4p-1b-cluster",
        parties: 4,
        bits: 1,
        state: "cluster4",
        travel: &[0, 2],
        ops: &[
            &["I.I", "X.iY"],
            &["I.I", "X.Z"],
            &["I.I", "iY.Z"],
            &["I.I", "iY.iY"],
        ],
    },
    PresetInfo {
        name: "dialogue-2p-2b",
        parties: 2,
        bits: 2,
        state: "bell",
        travel: &[0],
        ops: &[&["I", "X", "iY", "Z"], &["I", "X", "iY", "Z"]],
    },
];

pub fn preset_info(name: &str) -> Result<&'static PresetInfo> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}

/// Descriptor for a registered table under the given protocol.
pub fn preset(name: &str, protocol: Protocol) -> Result<CodebookDescriptor> {
    let info = preset_info(name)?;
    let (receiver_ops, sender_ops) = info
        .ops
        .split_last()
        .expect("presets list at least two parties");
    let parties = sender_ops
        .iter()
        .enumerate()
        .map(|(i, ops)| PartyOps::new(&format!("P{}", i + 1), ops))
        .collect::<Result<_>>()?;
    let receiver = ReceiverSpec {
        id: format!("P{}", info.parties),
        ops: Some(
            receiver_ops
                .iter()
                .map(|s| s.parse())
                .collect::<Result<_>>()?,
        ),
    };
    Ok(CodebookDescriptor {
        protocol: Protocol::Two,
        state: StateDescriptor::preset(info.state),
        travel: info.travel.to_vec(),
        receiver,
        parties,
    }
    .with_protocol(protocol))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Party {
    pub id: String,
    pub ops: Vec<PauliWord>,
    pub bits: usize,
}

impl Party {
    pub fn operator(&self, message: Message) -> Result<PauliWord> {
        if message.bits() != self.bits {
            return Err(Error::invalid(format!(
                "party {} encodes {} bits, got message {message}",
                self.id, self.bits
            )));
        }
        Ok(self.ops[message.value() as usize])
    }
}

/// Structurally checked parties and channel, before any orthogonality check.
#[derive(Clone, Debug)]
struct Layout {
    protocol: Protocol,
    state: StateDescriptor,
    seed: StateVector,
    travel: Vec<usize>,
    receiver_id: String,
    /// Every encoding party in circular order; under protocol 2 the
    /// initiator is last.
    parties: Vec<Party>,
    word_len: usize,
}

impl Layout {
    fn senders(&self) -> &[Party] {
        match self.protocol {
            Protocol::One => &self.parties,
            Protocol::Two => &self.parties[..self.parties.len() - 1],
        }
    }

    fn all_tuples(parties: &[Party]) -> Result<Vec<Vec<Message>>> {
        let total_bits: usize = parties.iter().map(|p| p.bits).sum();
        if total_bits > MAX_ENUMERATED_TUPLES.trailing_zeros() as usize {
            return Err(Error::InvalidCodebook(format!(
                "{total_bits} message bits exceed the enumeration limit"
            )));
        }
        let mut tuples = vec![Vec::new()];
        for p in parties {
            tuples = tuples
                .into_iter()
                .flat_map(|prefix| {
                    (0..1u32 << p.bits).map(move |v| {
                        let mut t = prefix.clone();
                        t.push(Message::new(v, p.bits).expect("value fits"));
                        t
                    })
                })
                .collect();
        }
        Ok(tuples)
    }

    fn composite(&self, parties: &[Party], tuple: &[Message]) -> Result<PauliWord> {
        if tuple.len() != parties.len() {
            return Err(Error::invalid(format!(
                "expected {} messages, got {}",
                parties.len(),
                tuple.len()
            )));
        }
        let mut acc = PauliWord::identity(self.word_len)?;
        for (p, &m) in parties.iter().zip(tuple) {
            acc = acc.mul(&p.operator(m)?)?;
        }
        Ok(acc)
    }
}

fn assemble(desc: &CodebookDescriptor) -> Result<Layout> {
    let seed = state::prepare_state(&desc.state)?;
    if desc.parties.is_empty() {
        return Err(Error::InvalidCodebook("no sending parties".into()));
    }
    if desc.travel.is_empty() {
        return Err(Error::InvalidCodebook("no travel qubits".into()));
    }
    let mut seen = HashSet::new();
    for &q in &desc.travel {
        if q >= seed.qubit_count() || !seen.insert(q) {
            return Err(Error::InvalidCodebook(format!(
                "travel qubit {q} is repeated or outside the {}-qubit channel",
                seed.qubit_count()
            )));
        }
    }
    let word_len = desc.travel.len();

    let mut ids = HashSet::new();
    for id in desc
        .parties
        .iter()
        .map(|p| &p.id)
        .chain([&desc.receiver.id])
    {
        if !ids.insert(id) {
            return Err(Error::InvalidCodebook(format!(
                "party id {id:?} used twice"
            )));
        }
    }

    let to_party = |id: &str, ops: &[PauliWord]| -> Result<Party> {
        if ops.len() < 2 || !ops.len().is_power_of_two() {
            return Err(Error::InvalidCodebook(format!(
                "party {id} needs 2^k operators with k >= 1, got {}",
                ops.len()
            )));
        }
        if let Some(bad) = ops.iter().find(|w| w.len() != word_len) {
            return Err(Error::InvalidCodebook(format!(
                "operator {bad} of party {id} has length {} but there are {word_len} travel qubits",
                bad.len()
            )));
        }
        if !ops[0].is_identity() {
            return Err(Error::InvalidCodebook(format!(
                "party {id} must encode all-zeros with the identity"
            )));
        }
        if ops.iter().collect::<HashSet<_>>().len() != ops.len() || !pauli::is_subgroup(ops)? {
            return Err(Error::InvalidCodebook(format!(
                "operators of party {id} do not form a subgroup"
            )));
        }
        Ok(Party {
            id: id.to_string(),
            ops: ops.to_vec(),
            bits: ops.len().trailing_zeros() as usize,
        })
    };

    let mut parties: Vec<Party> = desc
        .parties
        .iter()
        .map(|p| to_party(&p.id, &p.ops))
        .collect::<Result<_>>()?;

    let groups: Vec<Subgroup> = parties
        .iter()
        .map(|p| Subgroup::new(p.ops.iter().copied()))
        .collect::<Result<_>>()?;
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            if let Some(shared) = pauli::shared_element(&groups[i], &groups[j]) {
                return Err(Error::NotDisjoint {
                    first: parties[i].id.clone(),
                    second: parties[j].id.clone(),
                    shared,
                });
            }
        }
    }

    match desc.protocol {
        Protocol::One => {
            if desc.receiver.ops.is_some() {
                return Err(Error::InvalidCodebook(
                    "the protocol-1 initiator does not encode; remove its operators".into(),
                ));
            }
        }
        Protocol::Two => {
            let symmetric = parties.iter().all(|p| p.bits == parties[0].bits);
            let sender_lists: Vec<Vec<PauliWord>> = parties.iter().map(|p| p.ops.clone()).collect();
            let receiver_ops = match (&desc.receiver.ops, symmetric) {
                (None, true) => pauli::derive_receiver_ops(&sender_lists)?,
                (None, false) => return Err(Error::InvalidCodebook(
                    "senders encode different amounts; give the initiator's operators explicitly"
                        .into(),
                )),
                (Some(ops), true) if ops.len() == sender_lists[0].len() => {
                    let derived = pauli::derive_receiver_ops(&sender_lists)?;
                    if *ops != derived {
                        return Err(Error::InvalidCodebook(format!(
                            "initiator operators must multiply each column to the identity; expected [{}]",
                            derived.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(", ")
                        )));
                    }
                    derived
                }
                (Some(ops), _) => ops.clone(),
            };
            parties.push(to_party(&desc.receiver.id, &receiver_ops)?);
        }
    }

    let lists: Vec<Vec<PauliWord>> = parties.iter().map(|p| p.ops.clone()).collect();
    if !pauli::validate_ordering(&lists)? {
        return Err(Error::OrderingViolation);
    }

    Ok(Layout {
        protocol: desc.protocol,
        state: desc.state.clone(),
        seed,
        travel: desc.travel.clone(),
        receiver_id: desc.receiver.id.clone(),
        parties,
        word_len,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Collision {
    pub first: Vec<Message>,
    pub second: Vec<Message>,
    pub overlap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrthogonalityReport {
    pub protocol: Protocol,
    /// Sender message tuples checked for pairwise orthogonality.
    pub sender_encodings: usize,
    /// Full tuples (senders and initiator) mapped into the basis; protocol 2 only.
    pub full_encodings: Option<usize>,
    /// Distinct final states, up to global phase.
    pub distinct_states: usize,
    pub collision_count: usize,
    /// First few colliding pairs.
    pub collisions: Vec<Collision>,
    /// Full tuples whose final state left the sender basis.
    pub outside_basis: Vec<Vec<Message>>,
    pub passed: bool,
}

impl fmt::Display for OrthogonalityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "protocol {}: {} sender encodings",
            self.protocol, self.sender_encodings
        )?;
        if let Some(full) = self.full_encodings {
            write!(f, ", {full} full encodings")?;
        }
        write!(
            f,
            " -> {} distinct states; {}",
            self.distinct_states,
            if self.passed { "PASS" } else { "FAIL" }
        )?;
        for c in &self.collisions {
            write!(
                f,
                "\n  collision ({}) vs ({}): |<a|b>|^2 = {:.6}",
                format_tuple(&c.first),
                format_tuple(&c.second),
                c.overlap
            )?;
        }
        if self.collision_count > self.collisions.len() {
            write!(f, "\n  ... {} collisions in total", self.collision_count)?;
        }
        for t in &self.outside_basis {
            write!(f, "\n  ({}) leaves the measurement basis", format_tuple(t))?;
        }
        Ok(())
    }
}

fn count_distinct(states: &[StateVector]) -> Result<usize> {
    let mut reps: Vec<&StateVector> = Vec::new();
    for s in states {
        let mut found = false;
        for r in &reps {
            if r.inner(s)?.norm_sqr() > 1.0 - ORTHOGONALITY_TOLERANCE {
                found = true;
                break;
            }
        }
        if !found {
            reps.push(s);
        }
    }
    Ok(reps.len())
}

fn orthogonality(layout: &Layout) -> Result<OrthogonalityReport> {
    let senders = layout.senders();
    let sender_tuples = Layout::all_tuples(senders)?;
    let sender_states: Vec<StateVector> = sender_tuples
        .iter()
        .map(|t| {
            let w = layout.composite(senders, t)?;
            layout.seed.apply_word(&w, &layout.travel)
        })
        .collect::<Result<_>>()?;

    let mut collisions = Vec::new();
    let mut collision_count = 0;
    for i in 0..sender_states.len() {
        for j in i + 1..sender_states.len() {
            let overlap = sender_states[i].inner(&sender_states[j])?.norm_sqr();
            if overlap > ORTHOGONALITY_TOLERANCE {
                collision_count += 1;
                if collisions.len() < MAX_LISTED_COLLISIONS {
                    collisions.push(Collision {
                        first: sender_tuples[i].clone(),
                        second: sender_tuples[j].clone(),
                        overlap,
                    });
                }
            }
        }
    }

    let (full_encodings, distinct_states, outside_basis) = match layout.protocol {
        Protocol::One => (None, count_distinct(&sender_states)?, Vec::new()),
        Protocol::Two => {
            let full_tuples = Layout::all_tuples(&layout.parties)?;
            let mut finals = Vec::with_capacity(full_tuples.len());
            let mut outside = Vec::new();
            for t in &full_tuples {
                let w = layout.composite(&layout.parties, t)?;
                let s = layout.seed.apply_word(&w, &layout.travel)?;
                let weight: f64 = sender_states
                    .iter()
                    .map(|b| b.inner(&s).map(|ip| ip.norm_sqr()))
                    .collect::<Result<Vec<_>>>()?
                    .into_iter()
                    .fold(0.0, f64::max);
                if weight < 1.0 - ORTHOGONALITY_TOLERANCE {
                    outside.push(t.clone());
                }
                finals.push(s);
            }
            (Some(full_tuples.len()), count_distinct(&finals)?, outside)
        }
    };

    Ok(OrthogonalityReport {
        protocol: layout.protocol,
        sender_encodings: sender_tuples.len(),
        full_encodings,
        distinct_states,
        passed: collision_count == 0 && outside_basis.is_empty(),
        collision_count,
        collisions,
        outside_basis,
    })
}

/// Brute-force orthogonality check of every encoding on the seed state.
///
/// Structural problems (word lengths, subgroup closure, disjointness,
/// ordering) are returned as errors; orthogonality failures are reported.
pub fn validate_orthogonality(desc: &CodebookDescriptor) -> Result<OrthogonalityReport> {
    orthogonality(&assemble(desc)?)
}

type DialogueKey = (usize, u32, PauliWord);

/// A validated encoding assignment with its decode tables.
#[derive(Clone, Debug)]
pub struct Codebook {
    layout: Layout,
    basis: MeasurementBasis,
    report: OrthogonalityReport,
    /// Composite word -> sender tuple.
    qsdc_map: HashMap<PauliWord, Vec<Message>>,
    /// (party, own message, composite word) -> full tuple.
    dialogue_map: HashMap<DialogueKey, Vec<Message>>,
}

/// Validates a descriptor and builds its decode tables. Fails unless every
/// structural and orthogonality check passes.
pub fn build_codebook(desc: &CodebookDescriptor) -> Result<Codebook> {
    let layout = assemble(desc)?;
    let report = orthogonality(&layout)?;
    if !report.passed {
        return Err(Error::InvalidCodebook(report.to_string()));
    }

    let senders = layout.senders();
    let mut qsdc_map = HashMap::new();
    for t in Layout::all_tuples(senders)? {
        let w = layout.composite(senders, &t)?;
        if qsdc_map.insert(w, t).is_some() {
            return Err(Error::InvalidCodebook(format!(
                "two sender tuples share composite {w}"
            )));
        }
    }
    let mut labels: Vec<PauliWord> = qsdc_map.keys().copied().collect();
    labels.sort();
    let basis = state::generate_basis(&layout.seed, &layout.travel, &labels)?;

    let mut dialogue_map = HashMap::new();
    if layout.protocol == Protocol::Two {
        for t in Layout::all_tuples(&layout.parties)? {
            let w = layout.composite(&layout.parties, &t)?;
            for (i, m) in t.iter().enumerate() {
                if let Some(previous) = dialogue_map.insert((i, m.value(), w), t.clone()) {
                    return Err(Error::InvalidCodebook(format!(
                        "party {} cannot tell ({}) from ({})",
                        layout.parties[i].id,
                        format_tuple(&previous),
                        format_tuple(&t)
                    )));
                }
            }
        }
    }

    Ok(Codebook {
        layout,
        basis,
        report,
        qsdc_map,
        dialogue_map,
    })
}

impl Codebook {
    pub fn protocol(&self) -> Protocol {
        self.layout.protocol
    }

    /// Encoding parties in circular order (protocol 2: initiator last).
    pub fn parties(&self) -> &[Party] {
        &self.layout.parties
    }

    pub fn senders(&self) -> &[Party] {
        self.layout.senders()
    }

    pub fn receiver_id(&self) -> &str {
        &self.layout.receiver_id
    }

    /// Number of conference participants, including the initiator.
    pub fn party_count(&self) -> usize {
        self.senders().len() + 1
    }

    pub fn bits_per_party(&self) -> Vec<usize> {
        self.layout.parties.iter().map(|p| p.bits).collect()
    }

    pub fn travel_qubits(&self) -> &[usize] {
        &self.layout.travel
    }

    pub fn state_descriptor(&self) -> &StateDescriptor {
        &self.layout.state
    }

    pub fn seed_state(&self) -> &StateVector {
        &self.layout.seed
    }

    pub fn word_len(&self) -> usize {
        self.layout.word_len
    }

    pub fn basis(&self) -> &MeasurementBasis {
        &self.basis
    }

    pub fn report(&self) -> &OrthogonalityReport {
        &self.report
    }

    pub fn party_index(&self, id: &str) -> Result<usize> {
        self.layout
            .parties
            .iter()
            .position(|p| p.id == id)
            .ok_or_else(|| Error::invalid(format!("no encoding party {id:?}")))
    }

    /// All message tuples for the encoding parties, in lexicographic order.
    pub fn message_tuples(&self) -> Vec<Vec<Message>> {
        Layout::all_tuples(&self.layout.parties).expect("bounded when the codebook was built")
    }

    /// Product of every encoding party's operator for `tuple`.
    pub fn encode(&self, tuple: &[Message]) -> Result<PauliWord> {
        self.layout.composite(&self.layout.parties, tuple)
    }

    /// Export with the initiator's operators written out.
    pub fn to_descriptor(&self) -> CodebookDescriptor {
        let senders = self.senders();
        let receiver_ops = match self.protocol() {
            Protocol::One => None,
            Protocol::Two => Some(self.layout.parties.last().expect("initiator").ops.clone()),
        };
        CodebookDescriptor {
            protocol: self.protocol(),
            state: self.layout.state.clone(),
            travel: self.layout.travel.clone(),
            receiver: ReceiverSpec {
                id: self.layout.receiver_id.clone(),
                ops: receiver_ops,
            },
            parties: senders
                .iter()
                .map(|p| PartyOps {
                    id: p.id.clone(),
                    ops: p.ops.clone(),
                })
                .collect(),
        }
    }

    /// Distinct basis labels reached per sender tuple; a bijection under
    /// protocol 1.
    pub fn qsdc_table(&self) -> BTreeMap<PauliWord, Vec<Message>> {
        self.qsdc_map.iter().map(|(k, v)| (*k, v.clone())).collect()
    }
}

/// Protocol-1 decode: the unique sender tuple whose composite equals the
/// measured label (the initial state is the seed, label `I`).
pub fn decode_p1(cb: &Codebook, final_label: &PauliWord) -> Result<Vec<Message>> {
    cb.qsdc_map
        .get(final_label)
        .cloned()
        .ok_or(Error::UnknownLabel(*final_label))
}

/// Protocol-2 decode from one party's point of view: its own message plus
/// the announced initial and final labels determine every other message.
pub fn decode_p2(
    cb: &Codebook,
    party: &str,
    own_message: Message,
    initial_label: &PauliWord,
    final_label: &PauliWord,
) -> Result<Vec<Message>> {
    if cb.protocol() != Protocol::Two {
        return Err(Error::invalid("codebook is not a protocol-2 codebook"));
    }
    for label in [initial_label, final_label] {
        if cb.basis.state_for(label).is_none() {
            return Err(Error::UnknownLabel(*label));
        }
    }
    let index = cb.party_index(party)?;
    let bits = cb.layout.parties[index].bits;
    if own_message.bits() != bits {
        return Err(Error::invalid(format!("party {party} encodes {bits} bits")));
    }
    let composite = final_label.mul(initial_label)?;
    cb.dialogue_map
        .get(&(index, own_message.value(), composite))
        .cloned()
        .ok_or_else(|| {
            Error::Integrity(format!(
                "announcement {initial_label} -> {final_label} is inconsistent with {party} having sent {own_message}"
            ))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> PauliWord {
        s.parse().unwrap()
    }

    fn m(s: &str) -> Message {
        s.parse().unwrap()
    }

    fn ms(list: &[&str]) -> Vec<Message> {
        list.iter().map(|s| m(s)).collect()
    }

    #[test]
    fn message_text() {
        assert_eq!(m("01").to_string(), "01");
        assert_eq!(m("01").value(), 1);
        assert_eq!(m("10").bits(), 2);
        assert!("2".parse::<Message>().is_err());
        assert!("".parse::<Message>().is_err());
        assert!(Message::new(4, 2).is_err());
    }

    #[test]
    fn preset_row_one() {
        let d = preset("table2-3p-1b", Protocol::Two).unwrap();
        let cb = build_codebook(&d).unwrap();
        let ops: Vec<Vec<String>> = cb
            .parties()
            .iter()
            .map(|p| p.ops.iter().map(|o| o.to_string()).collect())
            .collect();
        assert_eq!(ops, [["I", "X"], ["I", "iY"], ["I", "Z"]]);
        assert_eq!(cb.party_count(), 3);
        assert_eq!(cb.report().distinct_states, 4);
        assert_eq!(cb.report().full_encodings, Some(8));
    }

    #[test]
    fn dialogue_limit_derives_same_list() {
        let d = CodebookDescriptor {
            protocol: Protocol::Two,
            state: StateDescriptor::preset("bell"),
            travel: vec![0],
            receiver: ReceiverSpec {
                id: "Bob".into(),
                ops: None,
            },
            parties: vec![PartyOps::new("Alice", &["I", "X", "iY", "Z"]).unwrap()],
        };
        let cb = build_codebook(&d).unwrap();
        assert_eq!(cb.parties()[1].ops, cb.parties()[0].ops);
    }

    #[test]
    fn rejects_shared_operators() {
        let d = CodebookDescriptor {
            protocol: Protocol::One,
            state: StateDescriptor::preset("bell"),
            travel: vec![0],
            receiver: ReceiverSpec {
                id: "N".into(),
                ops: None,
            },
            parties: vec![
                PartyOps::new("A", &["I", "X"]).unwrap(),
                PartyOps::new("B", &["I", "X"]).unwrap(),
            ],
        };
        assert!(matches!(build_codebook(&d), Err(Error::NotDisjoint { .. })));
    }

    #[test]
    fn rejects_wrong_word_length_and_bad_receiver() {
        let mut d = preset("table2-4p-1b-ghz", Protocol::Two).unwrap();
        d.travel = vec![0];
        assert!(matches!(build_codebook(&d), Err(Error::InvalidCodebook(_))));

        let mut d = preset("table2-3p-1b", Protocol::Two).unwrap();
        d.receiver.ops = Some(vec![w("I"), w("X")]);
        assert!(matches!(build_codebook(&d), Err(Error::InvalidCodebook(_))));

        let mut d = preset("table2-3p-1b", Protocol::One).unwrap();
        d.receiver.ops = Some(vec![w("I"), w("Z")]);
        assert!(build_codebook(&d).is_err());
    }

    #[test]
    fn wrong_channel_reports_collisions() {
        let mut d = preset("table2-4p-1b-ghz", Protocol::Two).unwrap();
        d.state = StateDescriptor::preset("bell");
        let report = validate_orthogonality(&d).unwrap();
        assert!(!report.passed);
        assert!(report.collision_count > 0);
        assert!(build_codebook(&d).is_err());
    }

    #[test]
    fn protocol_one_decoding() {
        let d = CodebookDescriptor {
            protocol: Protocol::One,
            state: StateDescriptor::preset("bell"),
            travel: vec![0],
            receiver: ReceiverSpec {
                id: "N".into(),
                ops: None,
            },
            parties: vec![
                PartyOps::new("A", &["I", "X"]).unwrap(),
                PartyOps::new("B", &["I", "iY"]).unwrap(),
            ],
        };
        let cb = build_codebook(&d).unwrap();
        assert_eq!(decode_p1(&cb, &w("I")).unwrap(), ms(&["0", "0"]));
        assert_eq!(decode_p1(&cb, &w("Z")).unwrap(), ms(&["1", "1"]));
        assert_eq!(decode_p1(&cb, &w("X")).unwrap(), ms(&["1", "0"]));
        assert!(matches!(
            decode_p1(&cb, &w("X.X")),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn protocol_two_example_branches() {
        let cb = build_codebook(&preset("table2-3p-1b", Protocol::Two).unwrap()).unwrap();
        let i = w("I");
        assert_eq!(
            decode_p2(&cb, "P1", m("1"), &i, &i).unwrap(),
            ms(&["1", "1", "1"])
        );
        assert_eq!(
            decode_p2(&cb, "P1", m("0"), &i, &i).unwrap(),
            ms(&["0", "0", "0"])
        );
        // composite X = I·iY·Z seen by P2 who sent iY.
        assert_eq!(
            decode_p2(&cb, "P2", m("1"), &i, &w("X")).unwrap(),
            ms(&["0", "1", "1"])
        );
        assert!(decode_p2(&cb, "P9", m("1"), &i, &i).is_err());
        assert!(matches!(
            decode_p2(&cb, "P1", m("1"), &i, &w("X.X")),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn descriptor_toml_round_trip() {
        let d = preset("table2-3p-2b-cluster", Protocol::Two).unwrap();
        let text = d.to_toml().unwrap();
        assert_eq!(CodebookDescriptor::from_toml(&text).unwrap(), d);
        let cb = build_codebook(&d).unwrap();
        assert_eq!(
            build_codebook(&cb.to_descriptor()).unwrap().parties(),
            cb.parties()
        );
    }
}
