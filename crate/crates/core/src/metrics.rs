//! Binary entropy and qubit efficiency `η = c/(q + b)`.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `H(u) = −u log₂ u − (1−u) log₂(1−u)`, with `0 log 0 = 0`.
pub fn binary_entropy(u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::invalid(format!(
            "entropy argument {u} outside [0, 1]"
        )));
    }
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    Ok(term(u) + term(1.0 - u))
}

/// `parties` = N, `bits` = k per party, `channel_qubits` = n, `travel_qubits` = m
/// (also the decoys sent per hop).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EfficiencyInput {
    pub parties: u64,
    pub bits: u64,
    pub channel_qubits: u64,
    pub travel_qubits: u64,
}

impl EfficiencyInput {
    pub fn new(parties: u64, bits: u64, channel_qubits: u64, travel_qubits: u64) -> Result<Self> {
        let inp = EfficiencyInput {
            parties,
            bits,
            channel_qubits,
            travel_qubits,
        };
        inp.validate()?;
        Ok(inp)
    }

    pub fn validate(&self) -> Result<()> {
        if [
            self.parties,
            self.bits,
            self.channel_qubits,
            self.travel_qubits,
        ]
        .contains(&0)
        {
            return Err(Error::invalid("efficiency inputs must be positive"));
        }
        if self.travel_qubits > self.channel_qubits {
            return Err(Error::invalid("travel qubits cannot exceed channel qubits"));
        }
        Ok(())
    }
}

/// `k / (mN + n)`.
pub fn efficiency_p1(inp: &EfficiencyInput) -> Result<Ratio<u64>> {
    inp.validate()?;
    Ok(Ratio::new(
        inp.bits,
        inp.travel_qubits * inp.parties + inp.channel_qubits,
    ))
}

/// `k / (m + 2n/N)`, kept exact as `kN / (mN + 2n)`.
pub fn efficiency_p2(inp: &EfficiencyInput) -> Result<Ratio<u64>> {
    inp.validate()?;
    Ok(Ratio::new(
        inp.bits * inp.parties,
        inp.travel_qubits * inp.parties + 2 * inp.channel_qubits,
    ))
}

/// Whole percent, rounded half up.
pub fn percent(eta: Ratio<u64>) -> u64 {
    (eta.numer() * 200 + eta.denom()) / (2 * eta.denom())
}

pub fn to_f64(eta: Ratio<u64>) -> f64 {
    *eta.numer() as f64 / *eta.denom() as f64
}
