//! Dense state-vector simulation for the entangled channel states, plus
//! single decoy qubits.
//!
//! Qubit 0 is the leftmost factor in ket notation, i.e. the most significant
//! bit of the amplitude index: `|q0 q1 ... q_{n-1}⟩`.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{PauliSymbol, PauliWord};

pub const MAX_QUBITS: usize = 12;
/// Tolerance on `Σ|a|² = 1` for states built by this module.
pub const NORM_TOLERANCE: f64 = 1e-12;
/// Tolerance for user-supplied amplitudes, pairwise overlaps and span residuals.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-9;

/// Names accepted by [`prepare_state`].
pub const STATE_PRESETS: [&str; 3] = ["bell", "ghz3", "cluster4"];

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    qubits: usize,
}

impl StateVector {
    /// Wraps amplitudes that must already be normalized within
    /// [`ORTHOGONALITY_TOLERANCE`]. No renormalization is done.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::invalid(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let qubits = len.trailing_zeros() as usize;
        if qubits > MAX_QUBITS {
            return Err(Error::invalid(format!(
                "{qubits} qubits exceeds the limit of {MAX_QUBITS}"
            )));
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > ORTHOGONALITY_TOLERANCE {
            return Err(Error::NotNormalized { norm_sq });
        }
        Ok(StateVector { amplitudes, qubits })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::from_amplitudes(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Computational basis state `|index⟩` on `qubits` qubits.
    pub fn basis_state(qubits: usize, index: usize) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS || index >= 1 << qubits {
            return Err(Error::invalid(format!(
                "no basis state {index} on {qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { amplitudes, qubits })
    }

    pub fn qubit_count(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.qubits != other.qubits {
            return Err(Error::invalid(
                "inner product of states with different qubit counts",
            ));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Equality up to a global phase: `|⟨a|b⟩|² ≈ 1`.
    pub fn equals_up_to_phase(&self, other: &StateVector, tolerance: f64) -> bool {
        self.inner(other)
            .map(|ip| (ip.norm_sqr() - 1.0).abs() <= tolerance)
            .unwrap_or(false)
    }

    fn mask(&self, qubit: usize) -> usize {
        1 << (self.qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.qubits {
            return Err(Error::invalid(format!(
                "qubit index {qubit} out of range for a {}-qubit state",
                self.qubits
            )));
        }
        Ok(())
    }

    fn apply_symbol(&mut self, symbol: PauliSymbol, qubit: usize) {
        let mask = self.mask(qubit);
        let (x, z) = symbol.bits();
        if x {
            for i in 0..self.amplitudes.len() {
                if i & mask == 0 {
                    self.amplitudes.swap(i, i | mask);
                }
            }
        }
        // Z after X gives ZX = iY = [[0, 1], [-1, 0]].
        if z {
            for (i, a) in self.amplitudes.iter_mut().enumerate() {
                if i & mask != 0 {
                    *a = -*a;
                }
            }
        }
    }

    /// Applies `word` with symbol `i` acting on qubit `targets[i]`.
    pub fn apply_word(&self, word: &PauliWord, targets: &[usize]) -> Result<StateVector> {
        if word.len() != targets.len() {
            return Err(Error::invalid(format!(
                "word of length {} applied to {} target qubits",
                word.len(),
                targets.len()
            )));
        }
        for (i, &t) in targets.iter().enumerate() {
            self.check_qubit(t)?;
            if targets[..i].contains(&t) {
                return Err(Error::invalid(format!("target qubit {t} listed twice")));
            }
        }
        let mut out = self.clone();
        for (symbol, &t) in word.symbols().zip(targets) {
            out.apply_symbol(symbol, t);
        }
        Ok(out)
    }

    pub fn apply_hadamard(&mut self, qubit: usize) -> Result<()> {
        self.check_qubit(qubit)?;
        let mask = self.mask(qubit);
        for i in 0..self.amplitudes.len() {
            if i & mask == 0 {
                let (a, b) = (self.amplitudes[i], self.amplitudes[i | mask]);
                self.amplitudes[i] = (a + b) * FRAC_1_SQRT_2;
                self.amplitudes[i | mask] = (a - b) * FRAC_1_SQRT_2;
            }
        }
        Ok(())
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::invalid("CNOT control and target coincide"));
        }
        let (cm, tm) = (self.mask(control), self.mask(target));
        for i in 0..self.amplitudes.len() {
            if i & cm != 0 && i & tm == 0 {
                self.amplitudes.swap(i, i | tm);
            }
        }
        Ok(())
    }

    /// `self ⊗ other`; the qubits of `other` follow those of `self`.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let qubits = self.qubits + other.qubits;
        if qubits > MAX_QUBITS {
            return Err(Error::invalid(format!(
                "{qubits} qubits exceeds the limit of {MAX_QUBITS}"
            )));
        }
        let amplitudes = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Ok(StateVector { amplitudes, qubits })
    }

    /// Probability that a Z-basis measurement of `qubit` yields 1.
    pub fn prob_one(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = self.mask(qubit);
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Projective measurement of one qubit in `basis`. The state collapses in
    /// place onto the observed eigenstate.
    pub fn measure_qubit<R: Rng + ?Sized>(
        &mut self,
        qubit: usize,
        basis: Basis,
        rng: &mut R,
    ) -> Result<bool> {
        if basis == Basis::X {
            self.apply_hadamard(qubit)?;
        }
        let p1 = self.prob_one(qubit)?;
        let outcome = rng.random::<f64>() < p1;
        let keep = if outcome { p1 } else { 1.0 - p1 };
        let mask = self.mask(qubit);
        let scale = 1.0 / keep.sqrt();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if (i & mask != 0) == outcome {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        if basis == Basis::X {
            self.apply_hadamard(qubit)?;
        }
        Ok(outcome)
    }

    /// Removes a qubit known to be in the Z eigenstate `|bit⟩`, leaving the
    /// state of the others.
    pub fn discard_qubit(&self, qubit: usize, bit: bool) -> Result<StateVector> {
        self.check_qubit(qubit)?;
        if self.qubits == 1 {
            return Err(Error::invalid("cannot discard the only qubit"));
        }
        let mask = self.mask(qubit);
        let low = mask - 1;
        let amplitudes: Vec<Complex64> = (0..self.amplitudes.len() / 2)
            .map(|j| {
                let i = ((j & !low) << 1) | (j & low) | if bit { mask } else { 0 };
                self.amplitudes[i]
            })
            .collect();
        StateVector::from_amplitudes(amplitudes)
    }
}

/// A state in configuration files: a preset name or explicit amplitudes as
/// `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateDescriptor {
    Preset(String),
    Amplitudes(Vec<[f64; 2]>),
}

impl StateDescriptor {
    pub fn preset(name: &str) -> Self {
        StateDescriptor::Preset(name.to_string())
    }
}

/// Builds the named channel state or validates explicit amplitudes.
///
/// * `bell` = (|00⟩ + |11⟩)/√2
/// * `ghz3` = (|000⟩ + |111⟩)/√2
/// * `cluster4` = (|0000⟩ + |0011⟩ + |1100⟩ − |1111⟩)/2
pub fn prepare_state(descriptor: &StateDescriptor) -> Result<StateVector> {
    match descriptor {
        StateDescriptor::Preset(name) => {
            let mut amps = match name.as_str() {
                "bell" => vec![0.0; 4],
                "ghz3" => vec![0.0; 8],
                "cluster4" => vec![0.0; 16],
                other => return Err(Error::UnknownState(other.to_string())),
            };
            match name.as_str() {
                "bell" => {
                    amps[0b00] = FRAC_1_SQRT_2;
                    amps[0b11] = FRAC_1_SQRT_2;
                }
                "ghz3" => {
                    amps[0b000] = FRAC_1_SQRT_2;
                    amps[0b111] = FRAC_1_SQRT_2;
                }
                _ => {
                    amps[0b0000] = 0.5;
                    amps[0b0011] = 0.5;
                    amps[0b1100] = 0.5;
                    amps[0b1111] = -0.5;
                }
            }
            StateVector::from_real(&amps)
        }
        StateDescriptor::Amplitudes(pairs) => StateVector::from_amplitudes(
            pairs
                .iter()
                .map(|&[re, im]| Complex64::new(re, im))
                .collect(),
        ),
    }
}

/// An orthonormal family `{W|seed⟩}` labelled by the generating words.
#[derive(Clone, Debug)]
pub struct MeasurementBasis {
    states: Vec<StateVector>,
    labels: Vec<PauliWord>,
}

impl MeasurementBasis {
    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    pub fn labels(&self) -> &[PauliWord] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state_for(&self, label: &PauliWord) -> Option<&StateVector> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| &self.states[i])
    }

    /// Born probabilities of each basis outcome for `state`.
    pub fn probabilities(&self, state: &StateVector) -> Result<Vec<f64>> {
        self.states
            .iter()
            .map(|b| b.inner(state).map(|ip| ip.norm_sqr()))
            .collect()
    }
}

/// Applies each word to the travel qubits of `seed` and checks that the
/// results are pairwise orthogonal.
pub fn generate_basis(
    seed: &StateVector,
    travel: &[usize],
    words: &[PauliWord],
) -> Result<MeasurementBasis> {
    if words.is_empty() {
        return Err(Error::invalid("basis needs at least one word"));
    }
    if words.len() > seed.amplitudes.len() {
        return Err(Error::invalid(format!(
            "{} words cannot give orthogonal states in dimension {}",
            words.len(),
            seed.amplitudes.len()
        )));
    }
    let states: Vec<StateVector> = words
        .iter()
        .map(|w| seed.apply_word(w, travel))
        .collect::<Result<_>>()?;
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            let overlap = states[i].inner(&states[j])?.norm_sqr();
            if overlap > ORTHOGONALITY_TOLERANCE {
                return Err(Error::BasisDegeneracy {
                    first: words[i],
                    second: words[j],
                    overlap,
                });
            }
        }
    }
    Ok(MeasurementBasis {
        states,
        labels: words.to_vec(),
    })
}

/// Projective measurement in `basis`; returns the outcome label and the
/// collapsed state. Fails if `state` has weight outside the span of the basis.
pub fn measure_in_basis<R: Rng + ?Sized>(
    state: &StateVector,
    basis: &MeasurementBasis,
    rng: &mut R,
) -> Result<(PauliWord, StateVector)> {
    let mut probs = basis.probabilities(state)?;
    let total: f64 = probs.iter().sum();
    let residual = (state.norm_sqr() - total).max(0.0);
    if residual > ORTHOGONALITY_TOLERANCE {
        return Err(Error::OutsideSpan { residual });
    }
    // Round-off sized weights must never be sampled.
    for p in probs.iter_mut() {
        if *p < ORTHOGONALITY_TOLERANCE {
            *p = 0.0;
        }
    }
    let total: f64 = probs.iter().sum();
    let index = match probs.iter().filter(|&&p| p > 0.0).count() {
        1 => probs
            .iter()
            .position(|&p| p > 0.0)
            .expect("one positive weight"),
        _ => {
            let u = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = probs.len() - 1;
            for (i, &p) in probs.iter().enumerate() {
                acc += p;
                if p > 0.0 && u < acc {
                    chosen = i;
                    break;
                }
            }
            chosen
        }
    };
    Ok((basis.labels[index], basis.states[index].clone()))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random::<bool>() {
            Basis::X
        } else {
            Basis::Z
        }
    }
}

/// One of the four BB84 states: `|0⟩, |1⟩` (Z basis) or `|+⟩, |−⟩` (X basis).
/// Bit 0 is `|0⟩` or `|+⟩`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DecoyQubit {
    pub basis: Basis,
    pub bit: bool,
}

impl DecoyQubit {
    pub const ALL: [DecoyQubit; 4] = [
        DecoyQubit {
            basis: Basis::Z,
            bit: false,
        },
        DecoyQubit {
            basis: Basis::Z,
            bit: true,
        },
        DecoyQubit {
            basis: Basis::X,
            bit: false,
        },
        DecoyQubit {
            basis: Basis::X,
            bit: true,
        },
    ];

    /// Uniform over the four preparations.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        DecoyQubit::ALL[rng.random_range(0..4)]
    }

    pub fn to_state(self) -> StateVector {
        let s = FRAC_1_SQRT_2;
        let amps = match (self.basis, self.bit) {
            (Basis::Z, false) => [1.0, 0.0],
            (Basis::Z, true) => [0.0, 1.0],
            (Basis::X, false) => [s, s],
            (Basis::X, true) => [s, -s],
        };
        StateVector::from_real(&amps).expect("BB84 states are normalized")
    }

    /// Identifies a single-qubit state as one of the BB84 states, up to a
    /// global phase.
    pub fn from_state(state: &StateVector) -> Option<DecoyQubit> {
        if state.qubit_count() != 1 {
            return None;
        }
        DecoyQubit::ALL.into_iter().find(|d| {
            d.to_state()
                .equals_up_to_phase(state, ORTHOGONALITY_TOLERANCE)
        })
    }
}

/// Measures a decoy in `basis`: the prepared bit when the bases match, a fair
/// coin otherwise.
pub fn measure_decoy<R: Rng + ?Sized>(decoy: DecoyQubit, basis: Basis, rng: &mut R) -> bool {
    if decoy.basis == basis {
        decoy.bit
    } else {
        rng.random::<bool>()
    }
}
