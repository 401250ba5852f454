use thiserror::Error;

use crate::pauli::PauliWord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid operand: {0}")]
    InvalidOperand(String),

    #[error("cannot parse {what} from {input:?}: {reason}")]
    Parse {
        what: &'static str,
        input: String,
        reason: String,
    },

    /// Two encodings produced overlapping states, so the measurement cannot
    /// tell them apart.
    #[error("basis degeneracy: states labelled {first} and {second} overlap (|<a|b>|^2 = {overlap:.3e})")]
    BasisDegeneracy {
        first: PauliWord,
        second: PauliWord,
        overlap: f64,
    },

    /// The measured state has weight outside the subspace spanned by the basis.
    /// In a protocol run this means the channel was corrupted.
    #[error("state lies outside the measurement basis span (residual weight {residual:.3e})")]
    OutsideSpan { residual: f64 },

    #[error("state is not normalized (norm^2 = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("unknown state preset {0:?}")]
    UnknownState(String),

    #[error("unknown codebook preset {0:?}")]
    UnknownPreset(String),

    #[error("subgroups of {first} and {second} share the non-identity element {shared}")]
    NotDisjoint {
        first: String,
        second: String,
        shared: PauliWord,
    },

    #[error("operator lists do not share a common index ordering")]
    OrderingViolation,

    #[error("codebook rejected: {0}")]
    InvalidCodebook(String),

    #[error("label {0} is not produced by any encoding")]
    UnknownLabel(PauliWord),

    /// Announced data that no honest execution could have produced.
    #[error("integrity failure: {0}")]
    Integrity(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidOperand(msg.into())
    }
}
