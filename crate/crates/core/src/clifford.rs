//! Clifford operators as signed tableaus, acting on [`PauliOp`] by conjugation.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Result, TwirlError};
use crate::pauli::{Letter, PauliOp};

/// Elementary gate. Serialized as `{"kind": "...", "qubits": [...]}`; for
/// `MultiCNOT` the first qubit is the control.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GateRecord", into = "GateRecord")]
pub enum GateSpec {
    H(usize),
    S(usize),
    /// Inverse phase gate.
    Sdg(usize),
    X(usize),
    Y(usize),
    Z(usize),
    Cnot { control: usize, target: usize },
    Cz(usize, usize),
    Swap(usize, usize),
    MultiCnot { control: usize, targets: Vec<usize> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GateRecord {
    kind: String,
    qubits: Vec<usize>,
}

impl TryFrom<GateRecord> for GateSpec {
    type Error = String;
    fn try_from(r: GateRecord) -> std::result::Result<GateSpec, String> {
        let q = &r.qubits;
        let need = |k: usize| -> std::result::Result<(), String> {
            if q.len() == k {
                Ok(())
            } else {
                Err(format!("gate {} takes {k} qubits, got {}", r.kind, q.len()))
            }
        };
        let g = match r.kind.as_str() {
            "H" => {
                need(1)?;
                GateSpec::H(q[0])
            }
            "S" => {
                need(1)?;
                GateSpec::S(q[0])
            }
            "SDG" => {
                need(1)?;
                GateSpec::Sdg(q[0])
            }
            "X" => {
                need(1)?;
                GateSpec::X(q[0])
            }
            "Y" => {
                need(1)?;
                GateSpec::Y(q[0])
            }
            "Z" => {
                need(1)?;
                GateSpec::Z(q[0])
            }
            "CNOT" => {
                need(2)?;
                GateSpec::Cnot {
                    control: q[0],
                    target: q[1],
                }
            }
            "CZ" => {
                need(2)?;
                GateSpec::Cz(q[0], q[1])
            }
            "SWAP" => {
                need(2)?;
                GateSpec::Swap(q[0], q[1])
            }
            "MultiCNOT" => {
                if q.is_empty() {
                    return Err("MultiCNOT needs a control qubit".into());
                }
                GateSpec::MultiCnot {
                    control: q[0],
                    targets: q[1..].to_vec(),
                }
            }
            other => return Err(format!("unknown gate kind {other:?}")),
        };
        Ok(g)
    }
}

impl From<GateSpec> for GateRecord {
    fn from(g: GateSpec) -> GateRecord {
        let (kind, qubits) = match g {
            GateSpec::H(q) => ("H", vec![q]),
            GateSpec::S(q) => ("S", vec![q]),
            GateSpec::Sdg(q) => ("SDG", vec![q]),
            GateSpec::X(q) => ("X", vec![q]),
            GateSpec::Y(q) => ("Y", vec![q]),
            GateSpec::Z(q) => ("Z", vec![q]),
            GateSpec::Cnot { control, target } => ("CNOT", vec![control, target]),
            GateSpec::Cz(a, b) => ("CZ", vec![a, b]),
            GateSpec::Swap(a, b) => ("SWAP", vec![a, b]),
            GateSpec::MultiCnot { control, targets } => {
                let mut v = vec![control];
                v.extend(targets);
                ("MultiCNOT", v)
            }
        };
        GateRecord {
            kind: kind.to_string(),
            qubits,
        }
    }
}

#[inline]
fn bit(w: &[u64], q: usize) -> u64 {
    (w[q / 64] >> (q % 64)) & 1
}

#[inline]
fn flip(w: &mut [u64], q: usize, v: u64) {
    w[q / 64] ^= v << (q % 64);
}

#[inline]
fn cnot_bits(x: &mut [u64], z: &mut [u64], c: usize, t: usize) -> u64 {
    let (xc, zc, xt, zt) = (bit(x, c), bit(z, c), bit(x, t), bit(z, t));
    flip(x, t, xc);
    flip(z, c, zt);
    xc & zt & (xt ^ zc ^ 1)
}

impl GateSpec {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            GateSpec::H(q)
            | GateSpec::S(q)
            | GateSpec::Sdg(q)
            | GateSpec::X(q)
            | GateSpec::Y(q)
            | GateSpec::Z(q) => vec![*q],
            GateSpec::Cnot { control, target } => vec![*control, *target],
            GateSpec::Cz(a, b) | GateSpec::Swap(a, b) => vec![*a, *b],
            GateSpec::MultiCnot { control, targets } => {
                let mut v = vec![*control];
                v.extend(targets.iter().copied());
                v
            }
        }
    }

    /// Checks indices and distinctness against an `n`-qubit register.
    pub fn validate(&self, n: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= n {
                return Err(TwirlError::validation(format!(
                    "gate {self} uses qubit {q} but the register has {n} qubits"
                )));
            }
        }
        let mut sorted = qs.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != qs.len() {
            return Err(TwirlError::validation(format!(
                "gate {self} repeats a qubit"
            )));
        }
        Ok(())
    }

    /// Gate whose conjugation undoes this one.
    pub fn inverse(&self) -> GateSpec {
        match self {
            GateSpec::S(q) => GateSpec::Sdg(*q),
            GateSpec::Sdg(q) => GateSpec::S(*q),
            g => g.clone(),
        }
    }

    /// `p <- g p g†` with exact phase.
    pub fn conjugate_in_place(&self, p: &mut PauliOp) {
        let mut flipped = 0u64;
        {
            let (x, z) = p.words_mut();
            match *self {
                GateSpec::H(q) => {
                    let (xq, zq) = (bit(x, q), bit(z, q));
                    flipped = xq & zq;
                    flip(x, q, xq ^ zq);
                    flip(z, q, xq ^ zq);
                }
                GateSpec::S(q) => {
                    let (xq, zq) = (bit(x, q), bit(z, q));
                    flipped = xq & zq;
                    flip(z, q, xq);
                }
                GateSpec::Sdg(q) => {
                    let (xq, zq) = (bit(x, q), bit(z, q));
                    flipped = xq & (zq ^ 1);
                    flip(z, q, xq);
                }
                GateSpec::X(q) => flipped = bit(z, q),
                GateSpec::Z(q) => flipped = bit(x, q),
                GateSpec::Y(q) => flipped = bit(x, q) ^ bit(z, q),
                GateSpec::Cnot { control, target } => {
                    flipped = cnot_bits(x, z, control, target);
                }
                GateSpec::Cz(a, b) => {
                    let (xa, za, xb, zb) = (bit(x, a), bit(z, a), bit(x, b), bit(z, b));
                    flipped = xa & xb & (za ^ zb);
                    flip(z, a, xb);
                    flip(z, b, xa);
                }
                GateSpec::Swap(a, b) => {
                    let (xa, za, xb, zb) = (bit(x, a), bit(z, a), bit(x, b), bit(z, b));
                    flip(x, a, xa ^ xb);
                    flip(x, b, xa ^ xb);
                    flip(z, a, za ^ zb);
                    flip(z, b, za ^ zb);
                }
                GateSpec::MultiCnot {
                    control,
                    ref targets,
                } => {
                    for &t in targets {
                        flipped ^= cnot_bits(x, z, control, t);
                    }
                }
            }
        }
        if flipped == 1 {
            p.set_phase_exponent(p.phase_exponent() + 2);
        }
    }

    /// Letter-only update. Every gate here is an involution on letters, so the
    /// same call also implements the inverse conjugation.
    #[inline]
    pub fn conjugate_unsigned(&self, p: &mut PauliOp) {
        let (x, z) = p.words_mut();
        match *self {
            GateSpec::H(q) => {
                let d = bit(x, q) ^ bit(z, q);
                flip(x, q, d);
                flip(z, q, d);
            }
            GateSpec::S(q) | GateSpec::Sdg(q) => {
                let xq = bit(x, q);
                flip(z, q, xq);
            }
            GateSpec::X(_) | GateSpec::Y(_) | GateSpec::Z(_) => {}
            GateSpec::Cnot { control, target } => {
                cnot_bits(x, z, control, target);
            }
            GateSpec::Cz(a, b) => {
                let (xa, xb) = (bit(x, a), bit(x, b));
                flip(z, a, xb);
                flip(z, b, xa);
            }
            GateSpec::Swap(a, b) => {
                let (xa, za, xb, zb) = (bit(x, a), bit(z, a), bit(x, b), bit(z, b));
                flip(x, a, xa ^ xb);
                flip(x, b, xa ^ xb);
                flip(z, a, za ^ zb);
                flip(z, b, za ^ zb);
            }
            GateSpec::MultiCnot {
                control,
                ref targets,
            } => {
                for &t in targets {
                    cnot_bits(x, z, control, t);
                }
            }
        }
    }
}

impl fmt::Display for GateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r: GateRecord = self.clone().into();
        write!(f, "{}{:?}", r.kind, r.qubits)
    }
}

/// Inverse of a gate list, as a gate list.
pub fn inverse_gates(gates: &[GateSpec]) -> Vec<GateSpec> {
    gates.iter().rev().map(GateSpec::inverse).collect()
}

/// Tableau: `image_x[i] = C X_i C†`, `image_z[i] = C Z_i C†`. Global phase is quotiented out.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CliffordOp {
    n: usize,
    image_x: Vec<PauliOp>,
    image_z: Vec<PauliOp>,
}

impl CliffordOp {
    pub fn identity(n: usize) -> CliffordOp {
        CliffordOp {
            n,
            image_x: (0..n).map(|q| PauliOp::single(n, q, Letter::X)).collect(),
            image_z: (0..n).map(|q| PauliOp::single(n, q, Letter::Z)).collect(),
        }
    }

    /// Builds from explicit generator images and checks the symplectic conditions.
    pub fn from_images(image_x: Vec<PauliOp>, image_z: Vec<PauliOp>) -> Result<CliffordOp> {
        let n = image_x.len();
        check_dim(n, image_z.len())?;
        for p in image_x.iter().chain(image_z.iter()) {
            check_dim(n, p.num_qubits())?;
            if !p.is_hermitian() {
                return Err(TwirlError::validation(format!(
                    "generator image {p} is not Hermitian"
                )));
            }
        }
        let c = CliffordOp {
            n,
            image_x,
            image_z,
        };
        if !c.is_symplectic() {
            return Err(TwirlError::validation(
                "generator images violate the commutation relations",
            ));
        }
        Ok(c)
    }

    pub fn from_gates(n: usize, gates: &[GateSpec]) -> Result<CliffordOp> {
        let mut c = CliffordOp::identity(n);
        for g in gates {
            g.validate(n)?;
            c.apply_gate(g);
        }
        Ok(c)
    }

    /// Left-multiplies by a gate: the result applies `self` first, then `g`.
    pub fn apply_gate(&mut self, g: &GateSpec) {
        for p in self.image_x.iter_mut().chain(self.image_z.iter_mut()) {
            g.conjugate_in_place(p);
        }
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn image_x(&self) -> &[PauliOp] {
        &self.image_x
    }

    pub fn image_z(&self) -> &[PauliOp] {
        &self.image_z
    }

    pub fn is_identity(&self) -> bool {
        *self == CliffordOp::identity(self.n)
    }

    /// Checks the canonical commutation relations of the images.
    pub fn is_symplectic(&self) -> bool {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                let xx = self.image_x[i].anticommutes_unchecked(&self.image_x[j]);
                let zz = self.image_z[i].anticommutes_unchecked(&self.image_z[j]);
                let xz = self.image_x[i].anticommutes_unchecked(&self.image_z[j]);
                if xx || zz || xz != (i == j) {
                    return false;
                }
            }
        }
        true
    }

    /// `C p C†` with exact phase.
    pub fn conjugate(&self, p: &PauliOp) -> Result<PauliOp> {
        check_dim(self.n, p.num_qubits())?;
        Ok(self.conjugate_unchecked(p))
    }

    pub(crate) fn conjugate_unchecked(&self, p: &PauliOp) -> PauliOp {
        // Y = i X Z on each qubit, so p = i^(phase + #Y) prod_j X_j^x Z_j^z.
        let mut ys = 0u32;
        for (a, b) in p.x_words().iter().zip(p.z_words()) {
            ys += (a & b).count_ones();
        }
        let mut out = PauliOp::identity(self.n);
        out.set_phase_exponent(p.phase_exponent() + (ys % 4) as u8);
        for q in 0..self.n {
            if p.x_bit(q) {
                out.mul_assign_unchecked(&self.image_x[q]);
            }
            if p.z_bit(q) {
                out.mul_assign_unchecked(&self.image_z[q]);
            }
        }
        out
    }

    /// Letters of `C p C†`, phase dropped.
    pub(crate) fn conjugate_unsigned_into(&self, p: &PauliOp, out: &mut PauliOp) {
        *out = PauliOp::identity(self.n);
        for (wi, (&xw, &zw)) in p.x_words().iter().zip(p.z_words()).enumerate() {
            let mut bits = xw | zw;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let q = wi * 64 + b;
                if (xw >> b) & 1 == 1 {
                    out.xor_assign(&self.image_x[q]);
                }
                if (zw >> b) & 1 == 1 {
                    out.xor_assign(&self.image_z[q]);
                }
            }
        }
    }

    /// Applies `b` first, then `a`.
    pub fn compose(a: &CliffordOp, b: &CliffordOp) -> Result<CliffordOp> {
        check_dim(a.n, b.n)?;
        Ok(CliffordOp {
            n: a.n,
            image_x: b.image_x.iter().map(|p| a.conjugate_unchecked(p)).collect(),
            image_z: b.image_z.iter().map(|p| a.conjugate_unchecked(p)).collect(),
        })
    }

    pub fn inverse(&self) -> CliffordOp {
        let n = self.n;
        // Bits of C† G C follow from commutation with the images:
        // x_k = 1 iff G anticommutes with image_z[k], z_k = 1 iff G anticommutes with image_x[k].
        let preimage = |g: &PauliOp| -> PauliOp {
            let mut q = PauliOp::identity(n);
            for k in 0..n {
                q.set_x_bit(k, g.anticommutes_unchecked(&self.image_z[k]));
                q.set_z_bit(k, g.anticommutes_unchecked(&self.image_x[k]));
            }
            let img = self.conjugate_unchecked(&q);
            debug_assert_eq!(img.unsigned(), *g);
            // img = i^k g with k even; undo it.
            q.set_phase_exponent(4 - img.phase_exponent());
            q
        };
        let image_x = (0..n)
            .map(|k| preimage(&PauliOp::single(n, k, Letter::X)))
            .collect();
        let image_z = (0..n)
            .map(|k| preimage(&PauliOp::single(n, k, Letter::Z)))
            .collect();
        CliffordOp {
            n,
            image_x,
            image_z,
        }
    }

    /// Uniform over the single-qubit Clifford group modulo phase (24 elements).
    pub fn random_single_qubit<R: Rng + ?Sized>(rng: &mut R) -> CliffordOp {
        let table = single_qubit_cliffords();
        table[rng.random_range(0..table.len())].op.clone()
    }

    /// Uniform over the n-qubit Clifford group modulo phase.
    ///
    /// Picks the images of (X_j, Z_j) one symplectic pair at a time: `v` uniform over
    /// the nonzero vectors of the remaining symplectic subspace, then `w` uniform over
    /// the vectors with ⟨v, w⟩ = 1, then restricts to the symplectic complement of
    /// span(v, w). Each group element is produced by exactly one sequence of choices.
    /// Signs of the 2n images are then uniform and independent.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CliffordOp {
        let mut basis: Vec<(PauliOp, PauliOp)> = (0..n)
            .map(|q| {
                (
                    PauliOp::single(n, q, Letter::X),
                    PauliOp::single(n, q, Letter::Z),
                )
            })
            .collect();
        let mut image_x = Vec::with_capacity(n);
        let mut image_z = Vec::with_capacity(n);
        while !basis.is_empty() {
            let m = basis.len();
            let coeffs = random_nonzero_bits(2 * m, rng);
            let mut v = PauliOp::identity(n);
            let mut w0 = None;
            for (i, (e, f)) in basis.iter().enumerate() {
                if coeffs[2 * i] {
                    v.xor_assign(e);
                    w0.get_or_insert_with(|| f.clone());
                }
                if coeffs[2 * i + 1] {
                    v.xor_assign(f);
                    w0.get_or_insert_with(|| e.clone());
                }
            }
            let w0 = w0.expect("nonzero coefficient vector");
            let mut w = PauliOp::identity(n);
            for (e, f) in &basis {
                if rng.random::<bool>() {
                    w.xor_assign(e);
                }
                if rng.random::<bool>() {
                    w.xor_assign(f);
                }
            }
            if !v.anticommutes_unchecked(&w) {
                w.xor_assign(&w0);
            }
            let mut rest: Vec<PauliOp> = Vec::with_capacity(2 * m);
            for (e, f) in &basis {
                for b in [e, f] {
                    let mut b = b.clone();
                    let bw = b.anticommutes_unchecked(&w);
                    let bv = b.anticommutes_unchecked(&v);
                    if bw {
                        b.xor_assign(&v);
                    }
                    if bv {
                        b.xor_assign(&w);
                    }
                    rest.push(b);
                }
            }
            basis = symplectic_gram_schmidt(rest);
            debug_assert_eq!(basis.len(), m - 1);
            image_x.push(v);
            image_z.push(w);
        }
        for p in image_x.iter_mut().chain(image_z.iter_mut()) {
            if rng.random::<bool>() {
                p.set_phase_exponent(2);
            }
        }
        CliffordOp {
            n,
            image_x,
            image_z,
        }
    }

    /// Bits of every image, for hashing distinct tableaus modulo sign.
    pub fn symplectic_key(&self) -> Vec<u64> {
        let mut key = Vec::new();
        for p in self.image_x.iter().chain(self.image_z.iter()) {
            key.extend_from_slice(p.x_words());
            key.extend_from_slice(p.z_words());
        }
        key
    }
}

fn random_nonzero_bits<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Vec<bool> {
    if len < 64 {
        let v: u64 = rng.random_range(1..(1u64 << len));
        return (0..len).map(|i| (v >> i) & 1 == 1).collect();
    }
    loop {
        let bits: Vec<bool> = (0..len).map(|_| rng.random::<bool>()).collect();
        if bits.iter().any(|&b| b) {
            return bits;
        }
    }
}

/// Symplectic basis of the span of `vectors` (assumed nondegenerate).
fn symplectic_gram_schmidt(mut vectors: Vec<PauliOp>) -> Vec<(PauliOp, PauliOp)> {
    let mut pairs = Vec::new();
    vectors.retain(|v| !v.has_identity_bits());
    while let Some(a) = vectors.pop() {
        let Some(pos) = vectors.iter().position(|b| a.anticommutes_unchecked(b)) else {
            // Only possible for a degenerate span; the callers never produce one.
            debug_assert!(false, "degenerate span in symplectic Gram-Schmidt");
            continue;
        };
        let b = vectors.swap_remove(pos);
        for x in vectors.iter_mut() {
            let xb = x.anticommutes_unchecked(&b);
            let xa = x.anticommutes_unchecked(&a);
            if xb {
                x.xor_assign(&a);
            }
            if xa {
                x.xor_assign(&b);
            }
        }
        vectors.retain(|v| !v.has_identity_bits());
        pairs.push((a, b));
    }
    pairs
}

/// One element of the single-qubit Clifford group.
#[derive(Clone, Debug)]
pub struct SingleQubitClifford {
    /// Shortest H/S word acting on qubit 0 (applied left to right).
    pub gates: Vec<GateSpec>,
    pub op: CliffordOp,
    /// Letter image under conjugation, indexed by `Letter as usize`.
    pub forward: [Letter; 4],
    /// Letter image under the inverse conjugation.
    pub backward: [Letter; 4],
}

impl SingleQubitClifford {
    /// Same element acting on qubit `q` of a larger register.
    pub fn gates_on(&self, q: usize) -> Vec<GateSpec> {
        self.gates
            .iter()
            .map(|g| match g {
                GateSpec::H(_) => GateSpec::H(q),
                GateSpec::S(_) => GateSpec::S(q),
                _ => unreachable!("table words use H and S only"),
            })
            .collect()
    }
}

/// The 24 single-qubit Cliffords in breadth-first order over H/S words; index 0 is the identity.
pub fn single_qubit_cliffords() -> &'static [SingleQubitClifford] {
    static TABLE: OnceLock<Vec<SingleQubitClifford>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut seen: HashMap<CliffordOp, Vec<GateSpec>> = HashMap::new();
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        let id = CliffordOp::identity(1);
        seen.insert(id.clone(), vec![]);
        order.push(id.clone());
        queue.push_back(id);
        while let Some(c) = queue.pop_front() {
            for g in [GateSpec::H(0), GateSpec::S(0)] {
                let mut next = c.clone();
                next.apply_gate(&g);
                if !seen.contains_key(&next) {
                    let mut word = seen[&c].clone();
                    word.push(g.clone());
                    seen.insert(next.clone(), word);
                    order.push(next.clone());
                    queue.push_back(next);
                }
            }
        }
        assert_eq!(order.len(), 24);
        order
            .into_iter()
            .map(|op| {
                let inv = op.inverse();
                let map = |c: &CliffordOp| {
                    let mut out = [Letter::I; 4];
                    for l in Letter::ALL {
                        out[l as usize] = c.conjugate_unchecked(&PauliOp::from_letters(&[l])).letter(0);
                    }
                    out
                };
                SingleQubitClifford {
                    gates: seen[&op].clone(),
                    forward: map(&op),
                    backward: map(&inv),
                    op,
                }
            })
            .collect()
    })
}

pub fn conjugate(c: &CliffordOp, p: &PauliOp) -> Result<PauliOp> {
    c.conjugate(p)
}

pub fn compose(a: &CliffordOp, b: &CliffordOp) -> Result<CliffordOp> {
    CliffordOp::compose(a, b)
}

pub fn inverse(c: &CliffordOp) -> CliffordOp {
    c.inverse()
}

pub fn from_gates(n: usize, gates: &[GateSpec]) -> Result<CliffordOp> {
    CliffordOp::from_gates(n, gates)
}

pub fn random_single_qubit_clifford<R: Rng + ?Sized>(rng: &mut R) -> CliffordOp {
    CliffordOp::random_single_qubit(rng)
}

pub fn random_clifford<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CliffordOp {
    CliffordOp::random(n, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn p(s: &str) -> PauliOp {
        PauliOp::parse(s).unwrap()
    }

    #[test]
    fn single_gate_rules() {
        let h = CliffordOp::from_gates(1, &[GateSpec::H(0)]).unwrap();
        assert_eq!(h.conjugate(&p("X")).unwrap(), p("Z"));
        assert_eq!(h.conjugate(&p("Y")).unwrap(), p("-Y"));
        let s = CliffordOp::from_gates(1, &[GateSpec::S(0)]).unwrap();
        assert_eq!(s.conjugate(&p("X")).unwrap(), p("Y"));
        assert_eq!(s.conjugate(&p("Y")).unwrap(), p("-X"));
        let cx = CliffordOp::from_gates(
            2,
            &[GateSpec::Cnot {
                control: 0,
                target: 1,
            }],
        )
        .unwrap();
        assert_eq!(cx.conjugate(&p("XI")).unwrap(), p("XX"));
        assert_eq!(cx.conjugate(&p("IZ")).unwrap(), p("ZZ"));
        assert_eq!(cx.image_x()[0], p("XX"));
    }

    #[test]
    fn compose_examples() {
        let h = CliffordOp::from_gates(1, &[GateSpec::H(0)]).unwrap();
        assert!(CliffordOp::compose(&h, &h).unwrap().is_identity());
        let s = CliffordOp::from_gates(1, &[GateSpec::S(0)]).unwrap();
        let z = CliffordOp::from_gates(1, &[GateSpec::Z(0)]).unwrap();
        assert_eq!(CliffordOp::compose(&s, &s).unwrap(), z);
    }

    #[test]
    fn inverse_examples() {
        let h = CliffordOp::from_gates(1, &[GateSpec::H(0)]).unwrap();
        assert_eq!(h.inverse(), h);
        let s = CliffordOp::from_gates(1, &[GateSpec::S(0)]).unwrap();
        assert_eq!(s.inverse().conjugate(&p("X")).unwrap(), p("-Y"));
        let sdg = CliffordOp::from_gates(1, &[GateSpec::Sdg(0)]).unwrap();
        assert_eq!(s.inverse(), sdg);
    }

    #[test]
    fn multicnot_images() {
        let c = CliffordOp::from_gates(
            3,
            &[GateSpec::MultiCnot {
                control: 0,
                targets: vec![1, 2],
            }],
        )
        .unwrap();
        assert_eq!(c.image_x()[0], p("XXX"));
        assert_eq!(c.image_z()[1], p("ZZI"));
    }

    #[test]
    fn bad_index_rejected() {
        assert!(CliffordOp::from_gates(2, &[GateSpec::H(2)]).is_err());
        assert!(CliffordOp::from_gates(
            3,
            &[GateSpec::MultiCnot {
                control: 0,
                targets: vec![1, 1]
            }]
        )
        .is_err());
        assert!(CliffordOp::from_gates(
            2,
            &[GateSpec::Cnot {
                control: 1,
                target: 1
            }]
        )
        .is_err());
    }

    #[test]
    fn gate_json_round_trip() {
        let gates = vec![
            GateSpec::H(0),
            GateSpec::Sdg(1),
            GateSpec::Cnot {
                control: 0,
                target: 2,
            },
            GateSpec::MultiCnot {
                control: 1,
                targets: vec![0, 2],
            },
        ];
        let s = serde_json::to_string(&gates).unwrap();
        assert!(s.contains(r#"{"kind":"CNOT","qubits":[0,2]}"#));
        let back: Vec<GateSpec> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, gates);
        assert!(serde_json::from_str::<GateSpec>(r#"{"kind":"T","qubits":[0]}"#).is_err());
        assert!(serde_json::from_str::<GateSpec>(r#"{"kind":"H","qubits":[0,1]}"#).is_err());
    }

    #[test]
    fn single_qubit_table() {
        let t = single_qubit_cliffords();
        assert_eq!(t.len(), 24);
        assert!(t[0].op.is_identity());
        for c in t {
            let rebuilt = CliffordOp::from_gates(1, &c.gates).unwrap();
            assert_eq!(rebuilt, c.op);
            for l in Letter::ALL {
                assert_eq!(c.backward[c.forward[l as usize] as usize], l);
            }
        }
    }

    #[test]
    fn random_single_qubit_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut counts: HashMap<CliffordOp, usize> = HashMap::new();
        let draws = 100_000;
        for _ in 0..draws {
            *counts.entry(CliffordOp::random_single_qubit(&mut rng)).or_default() += 1;
        }
        assert_eq!(counts.len(), 24);
        let e = draws as f64 / 24.0;
        let sigma = (draws as f64 * (1.0 / 24.0) * (23.0 / 24.0)).sqrt();
        let id = counts[&CliffordOp::identity(1)] as f64;
        assert!((id - e).abs() < 3.0 * sigma, "identity count {id}");
    }

    #[test]
    fn random_clifford_is_symplectic_and_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=6 {
            for _ in 0..20 {
                let c = CliffordOp::random(n, &mut rng);
                assert!(c.is_symplectic());
                let inv = c.inverse();
                assert!(CliffordOp::compose(&c, &inv).unwrap().is_identity());
                assert!(CliffordOp::compose(&inv, &c).unwrap().is_identity());
            }
        }
    }

    #[test]
    fn random_two_qubit_covers_group() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut seen = HashSet::new();
        for _ in 0..200_000 {
            seen.insert(CliffordOp::random(2, &mut rng));
        }
        assert_eq!(seen.len(), 11520);
    }
}
