//! Structured sets of Pauli operators: tensor products of primitive factors over
//! disjoint registers, optionally conjugated by a Clifford frame.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;

use crate::clifford::{CliffordOp, GateSpec};
use crate::error::{check_dim, Result, TwirlError};
use crate::pauli::{word_count, Letter, PauliOp};

/// Clifford frame `V`: the ensemble's members are `V E V†`.
#[derive(Clone, Debug)]
pub struct Frame {
    gates: Vec<GateSpec>,
    op: CliffordOp,
    inverse: CliffordOp,
}

impl PartialEq for Frame {
    fn eq(&self, other: &Frame) -> bool {
        self.op == other.op
    }
}

impl Frame {
    pub fn from_gates(n: usize, gates: Vec<GateSpec>) -> Result<Frame> {
        let op = CliffordOp::from_gates(n, &gates)?;
        let inverse = op.inverse();
        Ok(Frame { gates, op, inverse })
    }

    pub fn gates(&self) -> &[GateSpec] {
        &self.gates
    }

    pub fn op(&self) -> &CliffordOp {
        &self.op
    }

    pub fn inverse(&self) -> &CliffordOp {
        &self.inverse
    }

    pub fn num_qubits(&self) -> usize {
        self.op.num_qubits()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FactorKind {
    /// A single Pauli; stored full width, identity outside the register, phase +1.
    Point(PauliOp),
    FullGroup,
    FullGroupMinusIdentity,
    /// `shift · {I, Z}^m`: X bits fixed by `shift` (full width, X letters only), Z bits free.
    DiagonalIZ { shift: PauliOp },
    /// `{X, Y}` on a single qubit.
    XYSet,
    /// Uniform over Paulis of weight at most `max_weight` on the register.
    WeightAtMost { max_weight: usize },
}

#[derive(Clone, Debug)]
pub struct Factor {
    register: Vec<usize>,
    mask: Vec<u64>,
    kind: FactorKind,
    /// Mean sign indexed by the query's weight on the register (WeightAtMost only).
    wam_table: Option<Arc<Vec<f64>>>,
}

impl PartialEq for Factor {
    fn eq(&self, other: &Factor) -> bool {
        self.register == other.register && self.kind == other.kind
    }
}

fn register_mask(n: usize, register: &[usize]) -> Vec<u64> {
    let mut m = vec![0u64; word_count(n)];
    for &q in register {
        m[q / 64] |= 1 << (q % 64);
    }
    m
}

#[inline]
fn masked_any(words: &[u64], mask: &[u64]) -> bool {
    words.iter().zip(mask).any(|(w, m)| w & m != 0)
}

#[inline]
fn masked_popcount(a: &[u64], b: &[u64], mask: &[u64]) -> u32 {
    a.iter()
        .zip(b)
        .zip(mask)
        .map(|((x, z), m)| ((x | z) & m).count_ones())
        .sum()
}

pub(crate) fn binomial(m: usize, j: usize) -> BigUint {
    if j > m {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 0..j {
        acc = acc * BigUint::from(m - i) / BigUint::from(i + 1);
    }
    acc
}

/// `Σ_{j ≤ w} 3^j C(m, j)`.
pub(crate) fn weight_ball_size(m: usize, w: usize) -> BigUint {
    (0..=w.min(m))
        .map(|j| BigUint::from(3u32).pow(j as u32) * binomial(m, j))
        .sum()
}

/// For each restricted query weight `a`, the mean commutation sign over all Paulis of
/// weight `≤ w` on `m` qubits: coefficients of `(1 - t)^a (1 + 3t)^(m - a)` up to `t^w`,
/// summed and divided by the ball size.
pub(crate) fn weight_at_most_table(m: usize, w: usize) -> Arc<Vec<f64>> {
    type Tables = HashMap<(usize, usize), Arc<Vec<f64>>>;
    static CACHE: OnceLock<Mutex<Tables>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(t) = cache.lock().expect("cache lock").get(&(m, w)) {
        return t.clone();
    }
    let w = w.min(m);
    let card = BigInt::from(weight_ball_size(m, w));
    let table: Vec<f64> = (0..=m)
        .map(|a| {
            let mut poly = vec![BigInt::zero(); w + 1];
            poly[0] = BigInt::one();
            let mut mul = |c1: i64| {
                // poly <- poly * (1 + c1 t), truncated at degree w
                for d in (1..=w).rev() {
                    let prev = poly[d - 1].clone();
                    poly[d] += prev * c1;
                }
            };
            for _ in 0..a {
                mul(-1);
            }
            for _ in a..m {
                mul(3);
            }
            let total: BigInt = poly.into_iter().sum();
            BigRational::new(total, card.clone())
                .to_f64()
                .expect("finite ratio")
        })
        .collect();
    let t = Arc::new(table);
    cache.lock().expect("cache lock").insert((m, w), t.clone());
    t
}

fn uniform_below<R: Rng + ?Sized>(bound: &BigUint, rng: &mut R) -> BigUint {
    debug_assert!(!bound.is_zero());
    let bits = bound.bits() as usize;
    loop {
        let mut digits = vec![0u32; bits.div_ceil(32)];
        for d in digits.iter_mut() {
            *d = rng.random::<u32>();
        }
        let excess = digits.len() * 32 - bits;
        if let Some(last) = digits.last_mut() {
            if excess > 0 {
                *last &= u32::MAX >> excess;
            }
        }
        let v = BigUint::new(digits);
        if &v < bound {
            return v;
        }
    }
}

/// Draws `j` with probability `weights[j] / Σ weights`, exactly.
pub(crate) fn sample_index_by_weights<R: Rng + ?Sized>(weights: &[BigUint], rng: &mut R) -> usize {
    let total: BigUint = weights.iter().sum();
    let mut r = uniform_below(&total, rng);
    for (j, w) in weights.iter().enumerate() {
        if &r < w {
            return j;
        }
        r -= w;
    }
    unreachable!("uniform draw below the total")
}

impl Factor {
    fn new(n: usize, mut register: Vec<usize>, kind: FactorKind) -> Result<Factor> {
        register.sort_unstable();
        if register.is_empty() {
            return Err(TwirlError::validation("factor register is empty"));
        }
        if register.windows(2).any(|w| w[0] == w[1]) {
            return Err(TwirlError::validation("factor register repeats a qubit"));
        }
        if let Some(&q) = register.iter().find(|&&q| q >= n) {
            return Err(TwirlError::validation(format!(
                "factor register uses qubit {q} but the ensemble has {n} qubits"
            )));
        }
        let mask = register_mask(n, &register);
        let inside = |p: &PauliOp| {
            !p.x_words()
                .iter()
                .zip(p.z_words())
                .zip(&mask)
                .any(|((x, z), m)| (x | z) & !m != 0)
        };
        match &kind {
            FactorKind::Point(p) | FactorKind::DiagonalIZ { shift: p } => {
                check_dim(n, p.num_qubits())?;
                if !inside(p) {
                    return Err(TwirlError::validation(format!(
                        "factor Pauli {p} acts outside its register"
                    )));
                }
                if matches!(kind, FactorKind::DiagonalIZ { .. }) && p.z_words().iter().any(|&w| w != 0)
                {
                    return Err(TwirlError::validation("DiagonalIZ shift must use X letters only"));
                }
            }
            FactorKind::XYSet if register.len() != 1 => {
                return Err(TwirlError::validation("XYSet acts on exactly one qubit"));
            }
            _ => {}
        }
        let wam_table = match kind {
            FactorKind::WeightAtMost { max_weight } => {
                Some(weight_at_most_table(register.len(), max_weight))
            }
            _ => None,
        };
        let kind = match kind {
            FactorKind::Point(p) => FactorKind::Point(p.unsigned()),
            k => k,
        };
        Ok(Factor {
            register,
            mask,
            kind,
            wam_table,
        })
    }

    /// Point factor from a Pauli given on the register only (letter `j` acts on `register[j]`).
    pub fn point(n: usize, register: Vec<usize>, local: &PauliOp) -> Result<Factor> {
        check_dim(register.len(), local.num_qubits())?;
        let mut p = PauliOp::identity(n);
        for (j, &q) in register.iter().enumerate() {
            if q < n {
                p.set_letter(q, local.letter(j));
            }
        }
        Factor::new(n, register, FactorKind::Point(p))
    }

    /// Point factor from a full-width Pauli, on the given register.
    pub fn point_embedded(register: Vec<usize>, p: &PauliOp) -> Result<Factor> {
        Factor::new(p.num_qubits(), register, FactorKind::Point(p.unsigned()))
    }

    pub fn full_group(n: usize, register: Vec<usize>) -> Result<Factor> {
        Factor::new(n, register, FactorKind::FullGroup)
    }

    pub fn full_group_minus_identity(n: usize, register: Vec<usize>) -> Result<Factor> {
        Factor::new(n, register, FactorKind::FullGroupMinusIdentity)
    }

    /// `{I, Z}^m`.
    pub fn diagonal_iz(n: usize, register: Vec<usize>) -> Result<Factor> {
        Factor::new(
            n,
            register,
            FactorKind::DiagonalIZ {
                shift: PauliOp::identity(n),
            },
        )
    }

    /// `shift · {I, Z}^m` where `shift` carries X letters on a subset of the register.
    pub fn diagonal_iz_shifted(register: Vec<usize>, shift: &PauliOp) -> Result<Factor> {
        Factor::new(
            shift.num_qubits(),
            register,
            FactorKind::DiagonalIZ {
                shift: shift.unsigned(),
            },
        )
    }

    pub fn xy_set(n: usize, qubit: usize) -> Result<Factor> {
        Factor::new(n, vec![qubit], FactorKind::XYSet)
    }

    pub fn weight_at_most(n: usize, register: Vec<usize>, max_weight: usize) -> Result<Factor> {
        Factor::new(n, register, FactorKind::WeightAtMost { max_weight })
    }

    pub fn register(&self) -> &[usize] {
        &self.register
    }

    pub fn kind(&self) -> &FactorKind {
        &self.kind
    }

    pub fn size(&self) -> usize {
        self.register.len()
    }

    pub fn cardinality(&self) -> BigUint {
        let m = self.size() as u32;
        match &self.kind {
            FactorKind::Point(_) => BigUint::one(),
            FactorKind::FullGroup => BigUint::from(4u32).pow(m),
            FactorKind::FullGroupMinusIdentity => BigUint::from(4u32).pow(m) - 1u32,
            FactorKind::DiagonalIZ { .. } => BigUint::from(2u32).pow(m),
            FactorKind::XYSet => BigUint::from(2u32),
            FactorKind::WeightAtMost { max_weight } => weight_ball_size(self.size(), *max_weight),
        }
    }

    pub fn contains_identity(&self) -> bool {
        match &self.kind {
            FactorKind::Point(p) => p.has_identity_bits(),
            FactorKind::FullGroup | FactorKind::WeightAtMost { .. } => true,
            FactorKind::FullGroupMinusIdentity | FactorKind::XYSet => false,
            FactorKind::DiagonalIZ { shift } => shift.has_identity_bits(),
        }
    }

    /// Mean of the commutation sign between a uniform member and `q` (already in the frame).
    pub(crate) fn mean_chi(&self, q: &PauliOp) -> f64 {
        let (qx, qz) = (q.x_words(), q.z_words());
        match &self.kind {
            FactorKind::Point(p) => {
                if p.anticommutes_unchecked(q) {
                    -1.0
                } else {
                    1.0
                }
            }
            FactorKind::FullGroup => {
                if masked_any(qx, &self.mask) || masked_any(qz, &self.mask) {
                    0.0
                } else {
                    1.0
                }
            }
            FactorKind::FullGroupMinusIdentity => {
                if masked_any(qx, &self.mask) || masked_any(qz, &self.mask) {
                    let m = self.size() as i32;
                    -1.0 / (4f64.powi(m) - 1.0)
                } else {
                    1.0
                }
            }
            FactorKind::DiagonalIZ { shift } => diagonal_chi(shift, qx, qz, &self.mask),
            FactorKind::XYSet => {
                let q0 = self.register[0];
                if q.x_bit(q0) {
                    0.0
                } else if q.z_bit(q0) {
                    -1.0
                } else {
                    1.0
                }
            }
            FactorKind::WeightAtMost { .. } => {
                let a = masked_popcount(qx, qz, &self.mask) as usize;
                self.wam_table.as_ref().expect("table built at construction")[a]
            }
        }
    }

    /// Writes a uniform member into `out` (bits on the register only).
    pub(crate) fn sample_into<R: Rng + ?Sized>(&self, out: &mut PauliOp, rng: &mut R) {
        match &self.kind {
            FactorKind::Point(p) => {
                for &q in &self.register {
                    out.set_letter(q, p.letter(q));
                }
            }
            FactorKind::FullGroup => {
                for &q in &self.register {
                    out.set_letter(q, Letter::ALL[rng.random_range(0..4)]);
                }
            }
            FactorKind::FullGroupMinusIdentity => loop {
                let mut any = false;
                for &q in &self.register {
                    let l = Letter::ALL[rng.random_range(0..4)];
                    any |= l != Letter::I;
                    out.set_letter(q, l);
                }
                if any {
                    break;
                }
            },
            FactorKind::DiagonalIZ { shift } => {
                for &q in &self.register {
                    out.set_x_bit(q, shift.x_bit(q));
                    out.set_z_bit(q, rng.random::<bool>());
                }
            }
            FactorKind::XYSet => {
                let q = self.register[0];
                out.set_x_bit(q, true);
                out.set_z_bit(q, rng.random::<bool>());
            }
            FactorKind::WeightAtMost { max_weight } => {
                let m = self.size();
                let weights: Vec<BigUint> = (0..=(*max_weight).min(m))
                    .map(|j| BigUint::from(3u32).pow(j as u32) * binomial(m, j))
                    .collect();
                let j = sample_index_by_weights(&weights, rng);
                for &q in &self.register {
                    out.set_letter(q, Letter::I);
                }
                for idx in rand::seq::index::sample(rng, m, j).iter() {
                    let l = [Letter::X, Letter::Y, Letter::Z][rng.random_range(0..3)];
                    out.set_letter(self.register[idx], l);
                }
            }
        }
    }

    /// Every member as a full-width Pauli (identity off the register).
    pub(crate) fn members(&self, n: usize) -> Vec<PauliOp> {
        let m = self.size();
        let mut out = Vec::new();
        let total = 4usize.pow(m as u32);
        for code in 0..total {
            let mut p = PauliOp::identity(n);
            let mut w = 0;
            for (j, &q) in self.register.iter().enumerate() {
                let l = Letter::ALL[(code >> (2 * j)) & 3];
                if l != Letter::I {
                    w += 1;
                }
                p.set_letter(q, l);
            }
            let keep = match &self.kind {
                FactorKind::Point(pt) => self.register.iter().all(|&q| p.letter(q) == pt.letter(q)),
                FactorKind::FullGroup => true,
                FactorKind::FullGroupMinusIdentity => w > 0,
                FactorKind::DiagonalIZ { shift } => {
                    self.register.iter().all(|&q| p.x_bit(q) == shift.x_bit(q))
                }
                FactorKind::XYSet => p.x_bit(self.register[0]),
                FactorKind::WeightAtMost { max_weight } => w <= *max_weight,
            };
            if keep {
                out.push(p);
            }
        }
        out
    }

    /// Letters allowed on qubit `q` of the register, as a 4-bit set indexed by `Letter as usize`.
    pub(crate) fn allowed_letters(&self, q: usize) -> u8 {
        match &self.kind {
            FactorKind::Point(p) => 1 << (p.letter(q) as usize),
            FactorKind::FullGroup
            | FactorKind::FullGroupMinusIdentity
            | FactorKind::WeightAtMost { .. } => 0b1111,
            FactorKind::DiagonalIZ { shift } => {
                if shift.x_bit(q) {
                    (1 << Letter::X as usize) | (1 << Letter::Y as usize)
                } else {
                    (1 << Letter::I as usize) | (1 << Letter::Z as usize)
                }
            }
            FactorKind::XYSet => (1 << Letter::X as usize) | (1 << Letter::Y as usize),
        }
    }
}

#[inline]
fn diagonal_chi(shift: &PauliOp, qx: &[u64], qz: &[u64], mask: &[u64]) -> f64 {
    if masked_any(qx, mask) {
        return 0.0;
    }
    let parity: u32 = shift
        .x_words()
        .iter()
        .zip(qz)
        .zip(mask)
        .map(|((s, z), m)| (s & z & m).count_ones())
        .sum();
    if parity.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Tensor product of factors over a partition of the qubits, with an optional frame.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliEnsemble {
    n: usize,
    factors: Vec<Factor>,
    frame: Option<Frame>,
}

impl PauliEnsemble {
    pub fn new(n: usize, mut factors: Vec<Factor>, frame: Option<Frame>) -> Result<PauliEnsemble> {
        factors.sort_by_key(|f| f.register[0]);
        let mut covered = vec![false; n];
        for f in &factors {
            if f.mask.len() != word_count(n) {
                return Err(TwirlError::Dimension {
                    expected: n,
                    found: f.mask.len() * 64,
                });
            }
            for &q in &f.register {
                if q >= n || covered[q] {
                    return Err(TwirlError::validation(format!(
                        "factor registers must partition the {n} qubits (qubit {q})"
                    )));
                }
                covered[q] = true;
            }
        }
        if let Some(q) = covered.iter().position(|&c| !c) {
            return Err(TwirlError::validation(format!(
                "qubit {q} is not covered by any factor register"
            )));
        }
        if let Some(fr) = &frame {
            check_dim(n, fr.num_qubits())?;
        }
        let frame = frame.filter(|f| !f.op.is_identity());
        Ok(PauliEnsemble { n, factors, frame })
    }

    /// The single Pauli `p` as an ensemble.
    pub fn point(p: &PauliOp) -> PauliEnsemble {
        let n = p.num_qubits();
        PauliEnsemble {
            n,
            factors: vec![Factor::point_embedded((0..n).collect(), p).expect("full register")],
            frame: None,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn frame(&self) -> Option<&Frame> {
        self.frame.as_ref()
    }

    pub fn cardinality(&self) -> BigUint {
        self.factors.iter().map(|f| f.cardinality()).product()
    }

    pub fn contains_identity(&self) -> bool {
        self.factors.iter().all(|f| f.contains_identity())
    }

    pub fn is_point(&self) -> bool {
        self.factors
            .iter()
            .all(|f| matches!(f.kind, FactorKind::Point(_)))
    }

    /// The Pauli of a point ensemble in the actual frame (phase dropped).
    pub fn as_point(&self) -> Option<PauliOp> {
        if !self.is_point() {
            return None;
        }
        let mut p = PauliOp::identity(self.n);
        for f in &self.factors {
            if let FactorKind::Point(pt) = &f.kind {
                p.xor_assign(pt);
            }
        }
        Some(match &self.frame {
            Some(fr) => fr.op.conjugate_unchecked(&p).unsigned(),
            None => p,
        })
    }

    /// Mean commutation sign of a uniform member with `p`.
    pub fn mean_chi(&self, p: &PauliOp) -> Result<f64> {
        check_dim(self.n, p.num_qubits())?;
        Ok(self.mean_chi_unchecked(p))
    }

    pub(crate) fn mean_chi_unchecked(&self, p: &PauliOp) -> f64 {
        match &self.frame {
            Some(fr) => {
                let mut q = PauliOp::identity(self.n);
                fr.inverse.conjugate_unsigned_into(p, &mut q);
                self.mean_chi_in_frame(&q)
            }
            None => self.mean_chi_in_frame(p),
        }
    }

    #[inline]
    fn mean_chi_in_frame(&self, q: &PauliOp) -> f64 {
        let mut acc = 1.0;
        for f in &self.factors {
            acc *= f.mean_chi(q);
            if acc == 0.0 {
                break;
            }
        }
        acc
    }

    /// Uniform member in the actual frame, phase dropped.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PauliOp {
        let mut p = PauliOp::identity(self.n);
        for f in &self.factors {
            f.sample_into(&mut p, rng);
        }
        match &self.frame {
            Some(fr) => fr.op.conjugate_unchecked(&p).unsigned(),
            None => p,
        }
    }

    /// All members in the actual frame, phase dropped.
    pub fn members(&self) -> Vec<PauliOp> {
        let mut acc = vec![PauliOp::identity(self.n)];
        for f in &self.factors {
            let fm = f.members(self.n);
            let mut next = Vec::with_capacity(acc.len() * fm.len());
            for a in &acc {
                for b in &fm {
                    let mut c = a.clone();
                    c.xor_assign(b);
                    next.push(c);
                }
            }
            acc = next;
        }
        match &self.frame {
            Some(fr) => acc
                .into_iter()
                .map(|p| fr.op.conjugate_unchecked(&p).unsigned())
                .collect(),
            None => acc,
        }
    }
}

pub fn ensemble_mean_chi(e: &PauliEnsemble, p: &PauliOp) -> Result<f64> {
    e.mean_chi(p)
}
