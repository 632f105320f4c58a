//! Bit-packed n-qubit Pauli operators.
//!
//! An operator is stored as `i^phase * L_0 ⊗ L_1 ⊗ ... ⊗ L_{n-1}` where each letter
//! `L_j` is one of I, X, Y, Z selected by the bit pair `(x_j, z_j)` with `(1, 1) = Y`.
//! Letters are Hermitian, so the operator is Hermitian exactly when `phase` is even.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::{smallvec, SmallVec};

use crate::error::{check_dim, Result, TwirlError};

pub(crate) type Words = SmallVec<[u64; 2]>;

#[inline]
pub(crate) fn word_count(n: usize) -> usize {
    n.div_ceil(64)
}

/// Mask of the valid bits in the last word.
#[inline]
fn tail_mask(n: usize) -> u64 {
    match n % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// Single-qubit letter.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::I, Letter::X, Letter::Y, Letter::Z];

    #[inline]
    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Letter {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

/// Global phase `i^k`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Phase {
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    pub fn from_exponent(k: u8) -> Phase {
        match k & 3 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn exponent(self) -> u8 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct PauliOp {
    n: usize,
    x: Words,
    z: Words,
    phase: u8,
}

/// Phase exponent picked up by multiplying the letter strings `a` and `b` word by word.
#[inline]
pub(crate) fn product_phase(ax: &[u64], az: &[u64], bx: &[u64], bz: &[u64]) -> u8 {
    let mut plus = 0u32;
    let mut minus = 0u32;
    for i in 0..ax.len() {
        let (a_x, a_z, b_x, b_z) = (ax[i], az[i], bx[i], bz[i]);
        let a_xo = a_x & !a_z;
        let a_y = a_x & a_z;
        let a_zo = !a_x & a_z;
        let b_xo = b_x & !b_z;
        let b_y = b_x & b_z;
        let b_zo = !b_x & b_z;
        plus += ((a_xo & b_y) | (a_y & b_zo) | (a_zo & b_xo)).count_ones();
        minus += ((a_y & b_xo) | (a_zo & b_y) | (a_xo & b_zo)).count_ones();
    }
    ((plus + 4 * minus - minus) % 4) as u8
}

impl PauliOp {
    pub fn identity(n: usize) -> PauliOp {
        let w = word_count(n);
        PauliOp {
            n,
            x: smallvec![0; w],
            z: smallvec![0; w],
            phase: 0,
        }
    }

    /// Single letter on qubit `q`, identity elsewhere.
    pub fn single(n: usize, q: usize, letter: Letter) -> PauliOp {
        let mut p = PauliOp::identity(n);
        p.set_letter(q, letter);
        p
    }

    pub fn from_letters(letters: &[Letter]) -> PauliOp {
        let mut p = PauliOp::identity(letters.len());
        for (q, &l) in letters.iter().enumerate() {
            p.set_letter(q, l);
        }
        p
    }

    /// Builds from explicit bit slices (one bool per qubit) and a phase exponent.
    pub fn from_bits(x: &[bool], z: &[bool], phase: u8) -> Result<PauliOp> {
        check_dim(x.len(), z.len())?;
        let mut p = PauliOp::identity(x.len());
        for q in 0..x.len() {
            p.set_letter(q, Letter::from_bits(x[q], z[q]));
        }
        p.phase = phase & 3;
        Ok(p)
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    #[inline]
    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    #[inline]
    pub(crate) fn words_mut(&mut self) -> (&mut [u64], &mut [u64]) {
        (&mut self.x, &mut self.z)
    }

    #[inline]
    pub fn x_bit(&self, q: usize) -> bool {
        (self.x[q / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    pub fn z_bit(&self, q: usize) -> bool {
        (self.z[q / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    pub fn letter(&self, q: usize) -> Letter {
        Letter::from_bits(self.x_bit(q), self.z_bit(q))
    }

    #[inline]
    pub fn set_x_bit(&mut self, q: usize, v: bool) {
        let m = 1u64 << (q % 64);
        if v {
            self.x[q / 64] |= m;
        } else {
            self.x[q / 64] &= !m;
        }
    }

    #[inline]
    pub fn set_z_bit(&mut self, q: usize, v: bool) {
        let m = 1u64 << (q % 64);
        if v {
            self.z[q / 64] |= m;
        } else {
            self.z[q / 64] &= !m;
        }
    }

    /// Replaces the letter on qubit `q`; the phase exponent is kept as is.
    pub fn set_letter(&mut self, q: usize, l: Letter) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
        let (xb, zb) = l.bits();
        self.set_x_bit(q, xb);
        self.set_z_bit(q, zb);
    }

    #[inline]
    pub fn phase_exponent(&self) -> u8 {
        self.phase
    }

    pub fn phase(&self) -> Phase {
        Phase::from_exponent(self.phase)
    }

    pub fn set_phase_exponent(&mut self, k: u8) {
        self.phase = k & 3;
    }

    pub fn with_phase_exponent(mut self, k: u8) -> PauliOp {
        self.phase = k & 3;
        self
    }

    /// Same letters with phase +1.
    pub fn unsigned(&self) -> PauliOp {
        let mut p = self.clone();
        p.phase = 0;
        p
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase.is_multiple_of(2)
    }

    /// True for the identity letter pattern regardless of phase.
    #[inline]
    pub fn has_identity_bits(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    /// Identity letters with phase +1.
    pub fn is_identity(&self) -> bool {
        self.phase == 0 && self.has_identity_bits()
    }

    pub fn weight(&self) -> usize {
        self.x
            .iter()
            .zip(self.z.iter())
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    /// Qubits carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n)
            .filter(|&q| self.x_bit(q) || self.z_bit(q))
            .collect()
    }

    #[inline]
    pub(crate) fn anticommutes_unchecked(&self, other: &PauliOp) -> bool {
        let mut acc = 0u64;
        for i in 0..self.x.len() {
            acc ^= (self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i]);
        }
        acc.count_ones() % 2 == 1
    }

    pub fn commutes(&self, other: &PauliOp) -> Result<bool> {
        check_dim(self.n, other.n)?;
        Ok(!self.anticommutes_unchecked(other))
    }

    /// `self <- self * other`, sizes assumed equal.
    #[inline]
    pub(crate) fn mul_assign_unchecked(&mut self, other: &PauliOp) {
        let g = product_phase(&self.x, &self.z, &other.x, &other.z);
        self.phase = (self.phase + other.phase + g) & 3;
        for i in 0..self.x.len() {
            self.x[i] ^= other.x[i];
            self.z[i] ^= other.z[i];
        }
    }

    /// Letters-only product, ignoring every phase.
    #[inline]
    pub(crate) fn xor_assign(&mut self, other: &PauliOp) {
        for i in 0..self.x.len() {
            self.x[i] ^= other.x[i];
            self.z[i] ^= other.z[i];
        }
    }

    pub fn mul(&self, other: &PauliOp) -> Result<PauliOp> {
        check_dim(self.n, other.n)?;
        let mut out = self.clone();
        out.mul_assign_unchecked(other);
        Ok(out)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, exclude_identity: bool, rng: &mut R) -> PauliOp {
        let w = word_count(n);
        let mask = tail_mask(n);
        loop {
            let mut x: Words = (0..w).map(|_| rng.random::<u64>()).collect();
            let mut z: Words = (0..w).map(|_| rng.random::<u64>()).collect();
            if w > 0 {
                x[w - 1] &= mask;
                z[w - 1] &= mask;
            }
            let p = PauliOp { n, x, z, phase: 0 };
            if !exclude_identity || !p.has_identity_bits() {
                return p;
            }
        }
    }

    /// Concatenates `self` (first qubits) with `other`.
    pub fn tensor(&self, other: &PauliOp) -> PauliOp {
        let mut out = PauliOp::identity(self.n + other.n);
        for q in 0..self.n {
            out.set_letter(q, self.letter(q));
        }
        for q in 0..other.n {
            out.set_letter(self.n + q, other.letter(q));
        }
        out.phase = (self.phase + other.phase) & 3;
        out
    }

    pub fn parse(s: &str) -> Result<PauliOp> {
        let (phase, rest, offset) = split_phase_prefix(s);
        if rest.is_empty() {
            return Err(TwirlError::Parse {
                position: offset,
                message: "expected at least one of I, X, Y, Z".into(),
            });
        }
        let mut letters = Vec::with_capacity(rest.len());
        for (i, c) in rest.chars().enumerate() {
            let l = match c {
                'I' => Letter::I,
                'X' => Letter::X,
                'Y' => Letter::Y,
                'Z' => Letter::Z,
                other => {
                    return Err(TwirlError::Parse {
                        position: offset + i,
                        message: format!("invalid character {other:?}"),
                    })
                }
            };
            letters.push(l);
        }
        Ok(PauliOp::from_letters(&letters).with_phase_exponent(phase))
    }
}

/// Returns (phase exponent, letter part, char offset of the letter part).
fn split_phase_prefix(s: &str) -> (u8, &str, usize) {
    for (prefix, k) in [("+i", 1u8), ("-i", 3), ("i", 1), ("+", 0), ("-", 2)] {
        if let Some(rest) = s.strip_prefix(prefix) {
            return (k, rest, prefix.len());
        }
    }
    (0, s, 0)
}

impl fmt::Display for PauliOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for q in 0..self.n {
            write!(f, "{}", self.letter(q).to_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliOp {
    type Err = TwirlError;
    fn from_str(s: &str) -> Result<PauliOp> {
        PauliOp::parse(s)
    }
}

impl Serialize for PauliOp {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliOp {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<PauliOp, D::Error> {
        let s = String::deserialize(d)?;
        PauliOp::parse(&s).map_err(serde::de::Error::custom)
    }
}

pub fn pauli_mul(a: &PauliOp, b: &PauliOp) -> Result<PauliOp> {
    a.mul(b)
}

pub fn commutes(a: &PauliOp, b: &PauliOp) -> Result<bool> {
    a.commutes(b)
}

pub fn weight(p: &PauliOp) -> usize {
    p.weight()
}

pub fn random_pauli<R: Rng + ?Sized>(n: usize, exclude_identity: bool, rng: &mut R) -> PauliOp {
    PauliOp::random(n, exclude_identity, rng)
}

pub fn parse_pauli(s: &str) -> Result<PauliOp> {
    PauliOp::parse(s)
}

pub fn format_pauli(p: &PauliOp) -> String {
    p.to_string()
}
