//! The modified Pauli group `G_n = {I, X, iY, Z}^{⊗n}` with products taken
//! modulo global phase.
//!
//! Each single-qubit symbol is stored as a pair of bits `(x, z)`:
//! `I = (0,0)`, `X = (1,0)`, `Z = (0,1)`, `iY = (1,1)`. The phase-free product
//! is then a bitwise XOR, which makes `G_n` exactly the elementary abelian
//! group `(Z_2 × Z_2)^n`. Words pack the `x` and `z` bits of every position
//! into two machine words.
//!
//! Text form joins symbols with `.`: `"iY.X"` is `iY ⊗ X`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Longest supported word. Two bits per symbol must fit the 64-bit encoding.
pub const MAX_WORD_LEN: usize = 32;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum PauliSymbol {
    I,
    X,
    /// `iY = [[0, 1], [-1, 0]]`, the real antisymmetric member of `G_1`.
    IY,
    Z,
}

impl PauliSymbol {
    pub const ALL: [PauliSymbol; 4] = [
        PauliSymbol::I,
        PauliSymbol::X,
        PauliSymbol::IY,
        PauliSymbol::Z,
    ];

    pub const fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => PauliSymbol::I,
            (true, false) => PauliSymbol::X,
            (false, true) => PauliSymbol::Z,
            (true, true) => PauliSymbol::IY,
        }
    }

    /// `(x, z)` bit pair.
    pub const fn bits(self) -> (bool, bool) {
        match self {
            PauliSymbol::I => (false, false),
            PauliSymbol::X => (true, false),
            PauliSymbol::Z => (false, true),
            PauliSymbol::IY => (true, true),
        }
    }

    /// Two-bit code `x | z << 1`, used for canonical ordering.
    pub const fn code(self) -> u8 {
        let (x, z) = self.bits();
        (x as u8) | ((z as u8) << 1)
    }

    pub const fn from_code(code: u8) -> Self {
        Self::from_bits(code & 1 == 1, code & 2 == 2)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            PauliSymbol::I => "I",
            PauliSymbol::X => "X",
            PauliSymbol::IY => "iY",
            PauliSymbol::Z => "Z",
        }
    }
}

/// Product up to global phase.
impl Mul for PauliSymbol {
    type Output = PauliSymbol;

    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, other: Self) -> Self {
        Self::from_code(self.code() ^ other.code())
    }
}

impl fmt::Display for PauliSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PauliSymbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "I" => Ok(PauliSymbol::I),
            "X" => Ok(PauliSymbol::X),
            "iY" => Ok(PauliSymbol::IY),
            "Z" => Ok(PauliSymbol::Z),
            other => Err(Error::Parse {
                what: "Pauli symbol",
                input: other.to_string(),
                reason: "expected one of I, X, iY, Z".into(),
            }),
        }
    }
}

/// An element of `G_w`: an ordered tensor product of `w` symbols.
///
/// Position 0 is the leftmost factor and acts on the first targeted qubit.
#[derive(Copy, Clone, PartialEq, Eq, Hash)]
pub struct PauliWord {
    len: u8,
    x: u32,
    z: u32,
}

impl PauliWord {
    pub fn identity(len: usize) -> Result<Self> {
        check_len(len)?;
        Ok(PauliWord {
            len: len as u8,
            x: 0,
            z: 0,
        })
    }

    pub fn from_symbols(symbols: &[PauliSymbol]) -> Result<Self> {
        check_len(symbols.len())?;
        let mut word = PauliWord {
            len: symbols.len() as u8,
            x: 0,
            z: 0,
        };
        for (i, s) in symbols.iter().enumerate() {
            let (x, z) = s.bits();
            word.x |= (x as u32) << i;
            word.z |= (z as u32) << i;
        }
        Ok(word)
    }

    pub fn single(symbol: PauliSymbol) -> Self {
        Self::from_symbols(&[symbol]).expect("length 1 is always valid")
    }

    /// Rebuilds a word from its canonical encoding (see [`PauliWord::encoding`]).
    pub fn from_encoding(len: usize, encoding: u64) -> Result<Self> {
        check_len(len)?;
        if len < 32 && encoding >> (2 * len) != 0 {
            return Err(Error::invalid(format!(
                "encoding {encoding:#x} does not fit a word of length {len}"
            )));
        }
        let symbols: Vec<_> = (0..len)
            .map(|i| PauliSymbol::from_code(((encoding >> (2 * (len - 1 - i))) & 3) as u8))
            .collect();
        Self::from_symbols(&symbols)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn symbol(&self, pos: usize) -> PauliSymbol {
        assert!(
            pos < self.len(),
            "position {pos} out of range for word of length {}",
            self.len
        );
        PauliSymbol::from_bits((self.x >> pos) & 1 == 1, (self.z >> pos) & 1 == 1)
    }

    pub fn symbols(&self) -> impl Iterator<Item = PauliSymbol> + '_ {
        (0..self.len()).map(move |i| self.symbol(i))
    }

    /// Big-endian concatenation of the two-bit symbol codes. This is the
    /// canonical sort key and a group isomorphism onto `GF(2)^{2w}`.
    pub fn encoding(&self) -> u64 {
        self.symbols()
            .fold(0u64, |acc, s| (acc << 2) | s.code() as u64)
    }

    /// Phase-free product. Commutative, and every word is its own inverse.
    pub fn mul(&self, other: &PauliWord) -> Result<PauliWord> {
        if self.len != other.len {
            return Err(Error::invalid(format!(
                "cannot multiply words of lengths {} and {}",
                self.len, other.len
            )));
        }
        Ok(PauliWord {
            len: self.len,
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        })
    }

    /// Product of a non-empty sequence of equal-length words.
    pub fn product<'a>(words: impl IntoIterator<Item = &'a PauliWord>) -> Result<PauliWord> {
        let mut iter = words.into_iter();
        let first = *iter
            .next()
            .ok_or_else(|| Error::invalid("product of an empty sequence"))?;
        iter.try_fold(first, |acc, w| acc.mul(w))
    }

    /// All `4^len` words in canonical order.
    pub fn all(len: usize) -> Result<Vec<PauliWord>> {
        check_len(len)?;
        if len > 12 {
            return Err(Error::invalid("refusing to list more than 4^12 words"));
        }
        (0..1u64 << (2 * len))
            .map(|e| Self::from_encoding(len, e))
            .collect()
    }
}

fn check_len(len: usize) -> Result<()> {
    if len == 0 || len > MAX_WORD_LEN {
        return Err(Error::invalid(format!(
            "word length must be in 1..={MAX_WORD_LEN}, got {len}"
        )));
    }
    Ok(())
}

impl Ord for PauliWord {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.len
            .cmp(&other.len)
            .then(self.encoding().cmp(&other.encoding()))
    }
}

impl PartialOrd for PauliWord {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.symbols().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            f.write_str(s.as_str())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliWord({self})")
    }
}

impl FromStr for PauliWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let symbols = s
            .split('.')
            .map(str::parse)
            .collect::<Result<Vec<PauliSymbol>>>()
            .map_err(|e| match e {
                Error::Parse { reason, .. } => Error::Parse {
                    what: "Pauli word",
                    input: s.to_string(),
                    reason,
                },
                other => other,
            })?;
        Self::from_symbols(&symbols)
    }
}

impl Serialize for PauliWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for PauliWord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Returns true iff `set` contains the identity and is closed under the
/// modified product. Duplicates are ignored.
pub fn is_subgroup(set: &[PauliWord]) -> Result<bool> {
    let first = set.first().ok_or_else(|| Error::invalid("empty set"))?;
    let len = first.len();
    if set.iter().any(|w| w.len() != len) {
        return Err(Error::invalid("words of unequal length"));
    }
    let elements: BTreeSet<PauliWord> = set.iter().copied().collect();
    if !elements.contains(&PauliWord::identity(len)?) {
        return Ok(false);
    }
    for a in &elements {
        for b in &elements {
            if !elements.contains(&a.mul(b)?) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A subgroup of `G_w`. Elements are kept in canonical order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<PauliWord>", into = "Vec<PauliWord>")]
pub struct Subgroup {
    elements: Vec<PauliWord>,
}

impl Subgroup {
    pub fn new(elements: impl IntoIterator<Item = PauliWord>) -> Result<Self> {
        let elements: Vec<PauliWord> = elements
            .into_iter()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if !is_subgroup(&elements)? {
            return Err(Error::invalid(
                "set is not closed under the product or lacks the identity",
            ));
        }
        Ok(Subgroup { elements })
    }

    /// The subgroup generated by `generators` inside `G_len`.
    pub fn generated_by(len: usize, generators: &[PauliWord]) -> Result<Self> {
        let mut elements = BTreeSet::from([PauliWord::identity(len)?]);
        for g in generators {
            if g.len() != len {
                return Err(Error::invalid(
                    "generator length differs from group word length",
                ));
            }
            if elements.contains(g) {
                continue;
            }
            let shifted: Vec<PauliWord> =
                elements.iter().map(|e| e.mul(g)).collect::<Result<_>>()?;
            elements.extend(shifted);
        }
        Ok(Subgroup {
            elements: elements.into_iter().collect(),
        })
    }

    pub fn elements(&self) -> &[PauliWord] {
        &self.elements
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn word_len(&self) -> usize {
        self.elements[0].len()
    }

    pub fn contains(&self, word: &PauliWord) -> bool {
        self.elements.binary_search(word).is_ok()
    }
}

impl TryFrom<Vec<PauliWord>> for Subgroup {
    type Error = Error;

    fn try_from(value: Vec<PauliWord>) -> Result<Self> {
        Subgroup::new(value)
    }
}

impl From<Subgroup> for Vec<PauliWord> {
    fn from(value: Subgroup) -> Self {
        value.elements
    }
}

impl fmt::Display for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subgroup{self}")
    }
}

/// True iff the two subgroups intersect only in the identity.
pub fn are_disjoint(first: &Subgroup, second: &Subgroup) -> Result<bool> {
    if first.word_len() != second.word_len() {
        return Err(Error::invalid(
            "subgroups live in groups of different word length",
        ));
    }
    Ok(shared_element(first, second).is_none())
}

/// First non-identity element common to both subgroups, if any.
pub(crate) fn shared_element(first: &Subgroup, second: &Subgroup) -> Option<PauliWord> {
    first
        .elements()
        .iter()
        .find(|w| !w.is_identity() && second.contains(w))
        .copied()
}

/// All subgroups of `G_word_len` with the given order, in canonical order.
///
/// Subgroups are the `GF(2)`-subspaces of the `2·word_len`-bit encodings, so
/// each one is produced exactly once from its reduced row-echelon basis.
pub fn enumerate_subgroups(word_len: usize, order: usize) -> Result<Vec<Subgroup>> {
    check_len(word_len)?;
    if order == 0 || !order.is_power_of_two() {
        return Err(Error::invalid(format!(
            "order {order} is not a power of two"
        )));
    }
    let dim = 2 * word_len;
    let rank = order.trailing_zeros() as usize;
    if rank > dim {
        return Err(Error::invalid(format!(
            "order {order} exceeds |G_{word_len}| = 4^{word_len}"
        )));
    }

    let mut out = Vec::new();
    let mut pivots = Vec::with_capacity(rank);
    choose_pivots(rank, dim, &mut pivots, &mut |pivots| {
        for basis in echelon_bases(pivots) {
            out.push(span(word_len, &basis));
        }
    });
    let mut out: Vec<Subgroup> = out.into_iter().collect::<Result<_>>()?;
    out.sort();
    Ok(out)
}

// Pivots are chosen as strictly decreasing bit positions below `bound`.
fn choose_pivots(
    remaining: usize,
    bound: usize,
    acc: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if remaining == 0 {
        visit(acc);
        return;
    }
    for p in (remaining - 1..bound).rev() {
        acc.push(p);
        choose_pivots(remaining - 1, p, acc, visit);
        acc.pop();
    }
}

// Every reduced row-echelon basis with the given pivot columns: row `i` has
// its leading bit at `pivots[i]`, zeros in every other pivot column, and
// free bits in the non-pivot columns below its pivot.
fn echelon_bases(pivots: &[usize]) -> Vec<Vec<u64>> {
    let pivot_mask: u64 = pivots.iter().fold(0, |m, &p| m | (1u64 << p));
    let mut bases: Vec<Vec<u64>> = vec![Vec::new()];
    for &p in pivots {
        let free: Vec<usize> = (0..p).filter(|b| pivot_mask & (1u64 << b) == 0).collect();
        let mut next = Vec::with_capacity(bases.len() << free.len());
        for base in &bases {
            for fill in 0..(1u64 << free.len()) {
                let mut row = 1u64 << p;
                for (i, &b) in free.iter().enumerate() {
                    if fill >> i & 1 == 1 {
                        row |= 1u64 << b;
                    }
                }
                let mut extended = base.clone();
                extended.push(row);
                next.push(extended);
            }
        }
        bases = next;
    }
    bases
}

fn span(word_len: usize, basis: &[u64]) -> Result<Subgroup> {
    let generators: Vec<PauliWord> = basis
        .iter()
        .map(|&e| PauliWord::from_encoding(word_len, e))
        .collect::<Result<_>>()?;
    Subgroup::generated_by(word_len, &generators)
}

fn check_operator_lists(lists: &[Vec<PauliWord>]) -> Result<usize> {
    let first = lists
        .first()
        .ok_or_else(|| Error::invalid("no operator lists"))?;
    let word_len = first
        .first()
        .ok_or_else(|| Error::invalid("empty operator list"))?
        .len();
    for list in lists {
        if list.is_empty() {
            return Err(Error::invalid("empty operator list"));
        }
        if list.iter().any(|w| w.len() != word_len) {
            return Err(Error::invalid("operator words have unequal lengths"));
        }
        if !list[0].is_identity() {
            return Err(Error::invalid(
                "first operator of every list must be the identity",
            ));
        }
    }
    Ok(word_len)
}

/// Receiver operators for the dialogue-type protocol: the `i`-th receiver
/// operator is the product of every sender's `i`-th operator, so each column
/// multiplies to the identity.
pub fn derive_receiver_ops(sender_ops: &[Vec<PauliWord>]) -> Result<Vec<PauliWord>> {
    check_operator_lists(sender_ops)?;
    let len = sender_ops[0].len();
    if sender_ops.iter().any(|l| l.len() != len) {
        return Err(Error::invalid("ragged operator lists"));
    }
    if !len.is_power_of_two() {
        return Err(Error::invalid(format!(
            "list length {len} is not a power of two"
        )));
    }
    let derived: Vec<PauliWord> = (0..len)
        .map(|i| PauliWord::product(sender_ops.iter().map(|l| &l[i])))
        .collect::<Result<_>>()?;
    let distinct: BTreeSet<PauliWord> = derived.iter().copied().collect();
    if distinct.len() != derived.len() || !is_subgroup(&derived)? {
        return Err(Error::OrderingViolation);
    }
    Ok(derived)
}

/// Multiplication table of a list in index form: `table[i][j] = k` when
/// `list[i]·list[j] = list[k]`. `None` if the list is not closed.
fn index_table(list: &[PauliWord]) -> Option<Vec<Vec<usize>>> {
    let position: HashMap<PauliWord, usize> =
        list.iter().enumerate().map(|(i, w)| (*w, i)).collect();
    if position.len() != list.len() {
        return None;
    }
    list.iter()
        .map(|a| {
            list.iter()
                .map(|b| a.mul(b).ok().and_then(|p| position.get(&p).copied()))
                .collect()
        })
        .collect()
}

/// True iff one index map `(i, j) -> k` with `X_i X_j = X_k` is realized by
/// every party's list at once. Lists of different lengths are compared on
/// the indices they share.
pub fn validate_ordering(party_ops: &[Vec<PauliWord>]) -> Result<bool> {
    check_operator_lists(party_ops)?;
    let Some(tables) = party_ops
        .iter()
        .map(|l| index_table(l))
        .collect::<Option<Vec<_>>>()
    else {
        return Ok(false);
    };
    for (a, ta) in tables.iter().enumerate() {
        for tb in &tables[a + 1..] {
            let shared = ta.len().min(tb.len());
            for i in 0..shared {
                for j in 0..shared {
                    if ta[i][j] != tb[i][j] {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}
