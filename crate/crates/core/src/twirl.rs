//! Symmetric Clifford twirling: analytic twirled channels, the two gadget samplers
//! and exact enumeration of the sampler distributions.
//!
//! Orientation: a gadget `D` acts on a noise Pauli as `P -> D P D†`, so the twirled
//! channel is the average of `D ∘ N ∘ D†` and its Pauli fidelity is `λ_N(D† P D)`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{
    binomial, sample_index_by_weights, weight_ball_size, Atom, Factor, Frame, PauliChannel,
    PauliEnsemble,
};
use crate::clifford::{inverse_gates, single_qubit_cliffords, CliffordOp, GateSpec};
use crate::error::{check_dim, Result, TwirlError};
use crate::pauli::{Letter, PauliOp};

/// Where a [`SymmetrySpec`] came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Preset {
    RzFirstQubit,
    TGate,
    Toffoli,
    PauliRotation(PauliOp),
    Custom,
}

/// `Q_U = W† (P_{n1} ⊗ {I,Z}^{n2} ⊗ I^{n3}) W` up to phase.
#[derive(Clone, Debug)]
pub struct SymmetrySpec {
    n: usize,
    n1: usize,
    n2: usize,
    n3: usize,
    w_gates: Vec<GateSpec>,
    w: CliffordOp,
    preset: Preset,
}

/// Gates `W` with `W axis W† = +Z_0`: basis change on the support, a CNOT ladder
/// into the lowest support qubit, a swap to qubit 0 and an X fix for the sign.
pub fn frame_gates_for_axis(axis: &PauliOp) -> Result<Vec<GateSpec>> {
    let n = axis.num_qubits();
    if axis.has_identity_bits() {
        return Err(TwirlError::validation("rotation axis must not be the identity"));
    }
    if !axis.is_hermitian() {
        return Err(TwirlError::validation(format!(
            "rotation axis {axis} is not Hermitian"
        )));
    }
    let support = axis.support();
    let mut gates = Vec::new();
    for &q in &support {
        match axis.letter(q) {
            Letter::X => gates.push(GateSpec::H(q)),
            Letter::Y => {
                gates.push(GateSpec::Sdg(q));
                gates.push(GateSpec::H(q));
            }
            _ => {}
        }
    }
    let head = support[0];
    for &q in &support[1..] {
        gates.push(GateSpec::Cnot {
            control: q,
            target: head,
        });
    }
    if head != 0 {
        gates.push(GateSpec::Swap(0, head));
    }
    let image = CliffordOp::from_gates(n, &gates)?.conjugate_unchecked(axis);
    debug_assert_eq!(image.unsigned(), PauliOp::single(n, 0, Letter::Z));
    if image.phase_exponent() == 2 {
        gates.push(GateSpec::X(0));
    }
    Ok(gates)
}

impl SymmetrySpec {
    pub fn new(
        n: usize,
        n1: usize,
        n2: usize,
        n3: usize,
        w_gates: Vec<GateSpec>,
        preset: Preset,
    ) -> Result<SymmetrySpec> {
        if n1 + n2 + n3 != n {
            return Err(TwirlError::validation(format!(
                "register sizes {n1} + {n2} + {n3} must add up to {n}"
            )));
        }
        let w = CliffordOp::from_gates(n, &w_gates)?;
        Ok(SymmetrySpec {
            n,
            n1,
            n2,
            n3,
            w_gates,
            w,
            preset,
        })
    }

    pub fn rz_first_qubit(n: usize) -> Result<SymmetrySpec> {
        SymmetrySpec::single_z(n, Preset::RzFirstQubit)
    }

    pub fn t_gate(n: usize) -> Result<SymmetrySpec> {
        SymmetrySpec::single_z(n, Preset::TGate)
    }

    fn single_z(n: usize, preset: Preset) -> Result<SymmetrySpec> {
        if n == 0 {
            return Err(TwirlError::validation("need at least one qubit"));
        }
        SymmetrySpec::new(n, 0, 1, n - 1, vec![], preset)
    }

    /// Toffoli on qubits 0, 1 (controls) and 2 (target).
    pub fn toffoli(n: usize) -> Result<SymmetrySpec> {
        if n < 3 {
            return Err(TwirlError::validation("Toffoli needs at least three qubits"));
        }
        SymmetrySpec::new(n, 0, 3, n - 3, vec![GateSpec::H(2)], Preset::Toffoli)
    }

    pub fn pauli_rotation(axis: &PauliOp) -> Result<SymmetrySpec> {
        let n = axis.num_qubits();
        let gates = frame_gates_for_axis(axis)?;
        SymmetrySpec::new(n, 0, 1, n - 1, gates, Preset::PauliRotation(axis.unsigned()))
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.n1, self.n2, self.n3)
    }

    pub fn w(&self) -> &CliffordOp {
        &self.w
    }

    pub fn w_gates(&self) -> &[GateSpec] {
        &self.w_gates
    }

    pub fn preset(&self) -> &Preset {
        &self.preset
    }

    /// `n1 = 0, n2 = 1` and trivial `W`: the symmetry of a Z rotation on qubit 0.
    pub fn is_rz_type(&self) -> bool {
        self.n1 == 0 && self.n2 == 1 && self.w.is_identity()
    }

    /// Independent generators of `Q_U` (phase dropped).
    pub fn subgroup_generators(&self) -> Vec<PauliOp> {
        let winv = self.w.inverse();
        let mut gens = Vec::new();
        for q in 0..self.n1 {
            gens.push(PauliOp::single(self.n, q, Letter::X));
            gens.push(PauliOp::single(self.n, q, Letter::Z));
        }
        for q in self.n1..self.n1 + self.n2 {
            gens.push(PauliOp::single(self.n, q, Letter::Z));
        }
        gens.into_iter()
            .map(|g| winv.conjugate_unchecked(&g).unsigned())
            .collect()
    }

    fn output_frame(&self) -> Result<Option<Frame>> {
        if self.w.is_identity() {
            Ok(None)
        } else {
            Ok(Some(Frame::from_gates(self.n, inverse_gates(&self.w_gates))?))
        }
    }
}

/// Paulis with `|tr[P U]| > tol 2^m`, closed into a group and returned as independent generators.
pub fn pauli_subgroup_of_unitary(u: &DMatrix<Complex64>, tol: f64) -> Result<Vec<PauliOp>> {
    let dim = u.nrows();
    if dim != u.ncols() || !dim.is_power_of_two() || dim < 2 {
        return Err(TwirlError::validation(format!(
            "expected a square 2^m matrix, got {}x{}",
            u.nrows(),
            u.ncols()
        )));
    }
    let m = dim.trailing_zeros() as usize;
    let cap = crate::dense::DENSE_SUBGROUP_CAP;
    if m > cap {
        return Err(TwirlError::CapExceeded {
            what: "Pauli subgroup scan",
            requested: m,
            cap,
        });
    }
    let gram = u.adjoint() * u;
    let err = (gram - DMatrix::<Complex64>::identity(dim, dim))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if err > tol.max(1e-12) {
        return Err(TwirlError::validation(format!(
            "matrix is not unitary (max |U†U - I| = {err:.3e})"
        )));
    }
    let mut found = Vec::new();
    for code in 0..(1usize << (2 * m)) {
        let p = crate::dense::pauli_from_index(m, code);
        let t = crate::dense::trace_pauli_times(&p, u);
        if t.norm() > tol * dim as f64 {
            found.push(p);
        }
    }
    Ok(independent_subset(&found))
}

/// Greedy GF(2)-independent subset of the letter patterns.
pub(crate) fn independent_subset(paulis: &[PauliOp]) -> Vec<PauliOp> {
    let mut basis: Vec<(Vec<u64>, usize)> = Vec::new();
    let mut out = Vec::new();
    for p in paulis {
        let mut v: Vec<u64> = p.x_words().iter().chain(p.z_words()).copied().collect();
        for (b, pivot) in &basis {
            if v[pivot / 64] >> (pivot % 64) & 1 == 1 {
                for (a, c) in v.iter_mut().zip(b) {
                    *a ^= c;
                }
            }
        }
        if let Some(pivot) = (0..v.len() * 64).find(|&i| v[i / 64] >> (i % 64) & 1 == 1) {
            basis.push((v, pivot));
            out.push(p.unsigned());
        }
    }
    out
}

/// Splits `P`'s letters (in the W frame) into the three registers.
struct FrameParts {
    p: PauliOp,
    p2_has_x: bool,
    p3_trivial: bool,
}

fn frame_parts(spec: &SymmetrySpec, p: &PauliOp) -> FrameParts {
    let q = spec.w.conjugate_unchecked(p).unsigned();
    let r2 = spec.n1..spec.n1 + spec.n2;
    let p2_has_x = r2.clone().any(|j| q.x_bit(j));
    let p3_trivial = (spec.n1 + spec.n2..spec.n).all(|j| q.letter(j) == Letter::I);
    FrameParts {
        p: q,
        p2_has_x,
        p3_trivial,
    }
}

/// Exact twirl of a channel whose atoms are all single Paulis.
pub fn twirl_channel(ch: &PauliChannel, spec: &SymmetrySpec) -> Result<PauliChannel> {
    let n = spec.n;
    check_dim(n, ch.num_qubits())?;
    let frame = spec.output_frame()?;
    let r1: Vec<usize> = (0..spec.n1).collect();
    let r2: Vec<usize> = (spec.n1..spec.n1 + spec.n2).collect();
    let r3: Vec<usize> = (spec.n1 + spec.n2..n).collect();
    let mut atoms = Vec::with_capacity(ch.atoms().len());
    for a in ch.atoms() {
        let p = a.ensemble.as_point().ok_or_else(|| {
            TwirlError::unsupported("twirl_channel accepts only single-Pauli atoms")
        })?;
        let parts = frame_parts(spec, &p);
        if !parts.p2_has_x && parts.p3_trivial {
            atoms.push(Atom {
                prob: a.prob,
                ensemble: PauliEnsemble::point(&p),
            });
            continue;
        }
        let mut factors = Vec::with_capacity(3);
        if !r1.is_empty() {
            factors.push(Factor::point_embedded(r1.clone(), &restrict(&parts.p, &r1))?);
        }
        if parts.p2_has_x {
            let mut shift = PauliOp::identity(n);
            for &j in &r2 {
                shift.set_x_bit(j, parts.p.x_bit(j));
            }
            if r2.len() == 1 {
                factors.push(Factor::xy_set(n, r2[0])?);
            } else {
                factors.push(Factor::diagonal_iz_shifted(r2.clone(), &shift)?);
            }
            if !r3.is_empty() {
                factors.push(Factor::full_group(n, r3.clone())?);
            }
        } else {
            if !r2.is_empty() {
                factors.push(Factor::diagonal_iz(n, r2.clone())?);
            }
            factors.push(Factor::full_group_minus_identity(n, r3.clone())?);
        }
        atoms.push(Atom {
            prob: a.prob,
            ensemble: PauliEnsemble::new(n, factors, frame.clone())?,
        });
    }
    Ok(PauliChannel::new(n, atoms)?.merged())
}

fn restrict(p: &PauliOp, register: &[usize]) -> PauliOp {
    let mut out = PauliOp::identity(p.num_qubits());
    for &q in register {
        out.set_letter(q, p.letter(q));
    }
    out
}

/// Exact twirl by the k-sparse gadget sampler (Z-rotation symmetry only).
pub fn twirl_channel_ksparse(ch: &PauliChannel, spec: &SymmetrySpec, k: usize) -> Result<PauliChannel> {
    let n = spec.n;
    check_dim(n, ch.num_qubits())?;
    if !spec.is_rz_type() {
        return Err(TwirlError::unsupported(
            "k-sparse twirling is defined for the Z-rotation symmetry on qubit 0 only",
        ));
    }
    if k < 1 || k > n {
        return Err(TwirlError::validation(format!(
            "k = {k} must lie in 1..={n}"
        )));
    }
    let rest: Vec<usize> = (1..n).collect();
    let mut atoms = Vec::with_capacity(ch.atoms().len());
    for a in ch.atoms() {
        let p = a.ensemble.as_point().ok_or_else(|| {
            TwirlError::unsupported("twirl_channel_ksparse accepts only single-Pauli atoms")
        })?;
        if rest.iter().any(|&q| p.letter(q) != Letter::I) {
            return Err(TwirlError::unsupported(format!(
                "k-sparse twirl is defined for noise on qubit 0 only, got {p}"
            )));
        }
        if !p.x_bit(0) {
            atoms.push(Atom {
                prob: a.prob,
                ensemble: PauliEnsemble::point(&p),
            });
            continue;
        }
        let mut factors = vec![Factor::xy_set(n, 0)?];
        if !rest.is_empty() {
            let w = k - 1;
            factors.push(if w == 0 {
                Factor::point_embedded(rest.clone(), &PauliOp::identity(n))?
            } else if w >= rest.len() {
                Factor::full_group(n, rest.clone())?
            } else {
                Factor::weight_at_most(n, rest.clone(), w)?
            });
        }
        atoms.push(Atom {
            prob: a.prob,
            ensemble: PauliEnsemble::new(n, factors, None)?,
        });
    }
    Ok(PauliChannel::new(n, atoms)?.merged())
}

/// Pauli part is twirled; a coherent Z over-rotation commutes with every gadget and passes through.
pub fn twirl_general_noise(
    pauli_part: &PauliChannel,
    coherent_angle: f64,
    spec: &SymmetrySpec,
) -> Result<(PauliChannel, f64)> {
    if !spec.is_rz_type() {
        return Err(TwirlError::unsupported(
            "coherent pass-through needs the Z-rotation symmetry on qubit 0",
        ));
    }
    Ok((twirl_channel(pauli_part, spec)?, coherent_angle))
}

/// One draw of a twirl gadget: `MultiCNOT(0 -> targets)`, then a single-qubit
/// Clifford on each target, then optionally S on qubit 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GadgetDraw {
    pub n: usize,
    pub targets: Vec<usize>,
    /// Index into [`single_qubit_cliffords`] per target.
    pub locals: Vec<u8>,
    pub s_gate: bool,
}

impl GadgetDraw {
    pub fn gates(&self) -> Vec<GateSpec> {
        let mut g = Vec::new();
        if !self.targets.is_empty() {
            g.push(GateSpec::MultiCnot {
                control: 0,
                targets: self.targets.clone(),
            });
        }
        let table = single_qubit_cliffords();
        for (&t, &c) in self.targets.iter().zip(&self.locals) {
            g.extend(table[c as usize].gates_on(t));
        }
        if self.s_gate {
            g.push(GateSpec::S(0));
        }
        g
    }

    /// Qubits the gadget acts on: the targets, plus qubit 0 when any gate touches it.
    pub fn support(&self) -> Vec<usize> {
        let mut s = Vec::with_capacity(self.targets.len() + 1);
        if self.s_gate || !self.targets.is_empty() {
            s.push(0);
        }
        s.extend(self.targets.iter().copied());
        s
    }

    pub fn to_gadget(&self) -> TwirlGadget {
        let gates = self.gates();
        TwirlGadget {
            gate: CliffordOp::from_gates(self.n, &gates).expect("valid gadget gates"),
            support: self.support(),
            gates,
        }
    }

    /// Letters of `D p D†`.
    pub(crate) fn conjugate_unsigned(&self, p: &mut PauliOp) {
        let x0 = p.x_bit(0);
        let mut z0 = p.z_bit(0);
        for &t in &self.targets {
            if x0 {
                p.set_x_bit(t, !p.x_bit(t));
            }
            z0 ^= p.z_bit(t);
        }
        p.set_z_bit(0, z0);
        let table = single_qubit_cliffords();
        for (&t, &c) in self.targets.iter().zip(&self.locals) {
            p.set_letter(t, table[c as usize].forward[p.letter(t) as usize]);
        }
        if self.s_gate && p.x_bit(0) {
            p.set_z_bit(0, !p.z_bit(0));
        }
    }

    /// Letters of `D† p D`.
    pub(crate) fn conjugate_inverse_unsigned(&self, p: &mut PauliOp) {
        if self.s_gate && p.x_bit(0) {
            p.set_z_bit(0, !p.z_bit(0));
        }
        let table = single_qubit_cliffords();
        for (&t, &c) in self.targets.iter().zip(&self.locals) {
            p.set_letter(t, table[c as usize].backward[p.letter(t) as usize]);
        }
        let x0 = p.x_bit(0);
        let mut z0 = p.z_bit(0);
        for &t in &self.targets {
            if x0 {
                p.set_x_bit(t, !p.x_bit(t));
            }
            z0 ^= p.z_bit(t);
        }
        p.set_z_bit(0, z0);
    }

    /// Number of support qubits where `p` is not the identity.
    pub(crate) fn support_overlap(&self, p: &PauliOp) -> i32 {
        let mut c = 0;
        if (self.s_gate || !self.targets.is_empty()) && p.letter(0) != Letter::I {
            c += 1;
        }
        for &t in &self.targets {
            if p.letter(t) != Letter::I {
                c += 1;
            }
        }
        c
    }
}

/// A sampled symmetric Clifford with the qubits it touches.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwirlGadget {
    pub gates: Vec<GateSpec>,
    #[serde(skip)]
    pub gate: CliffordOp,
    pub support: Vec<usize>,
}

fn random_locals<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<u8> {
    (0..count).map(|_| rng.random_range(0..24u8)).collect()
}

pub fn draw_full_twirl<R: Rng + ?Sized>(n: usize, rng: &mut R) -> GadgetDraw {
    let targets: Vec<usize> = (1..n).filter(|_| rng.random_range(0..4u8) != 0).collect();
    let locals = random_locals(targets.len(), rng);
    let s_gate = rng.random::<bool>();
    GadgetDraw {
        n,
        targets,
        locals,
        s_gate,
    }
}

/// Weights `3^j C(n-1, j)` for `j < k`.
fn ksparse_weights(n: usize, k: usize) -> Vec<BigUint> {
    (0..k.min(n))
        .map(|j| BigUint::from(3u32).pow(j as u32) * binomial(n - 1, j))
        .collect()
}

pub fn draw_ksparse_twirl<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> GadgetDraw {
    let weights = ksparse_weights(n, k);
    let kp = sample_index_by_weights(&weights, rng);
    let mut targets: Vec<usize> = rand::seq::index::sample(rng, n - 1, kp)
        .iter()
        .map(|i| i + 1)
        .collect();
    targets.sort_unstable();
    let locals = random_locals(targets.len(), rng);
    let s_gate = rng.random::<bool>();
    GadgetDraw {
        n,
        targets,
        locals,
        s_gate,
    }
}

pub fn sample_full_twirl_gate<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<TwirlGadget> {
    if n == 0 {
        return Err(TwirlError::validation("need at least one qubit"));
    }
    Ok(draw_full_twirl(n, rng).to_gadget())
}

pub fn sample_ksparse_twirl_gate<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<TwirlGadget> {
    if k < 1 || k > n {
        return Err(TwirlError::validation(format!("k = {k} must lie in 1..={n}")));
    }
    Ok(draw_ksparse_twirl(n, k, rng).to_gadget())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerMode {
    Full,
    Ksparse(usize),
}

/// Largest outcome count `enumerate_sampler_distribution` will build.
pub const ENUMERATION_CAP: usize = 1_000_000;

/// Exact finite outcome distribution of a sampler.
pub fn enumerate_sampler_distribution(n: usize, mode: SamplerMode) -> Result<Vec<(BigRational, GadgetDraw)>> {
    if n == 0 {
        return Err(TwirlError::validation("need at least one qubit"));
    }
    if n > 4 {
        return Err(TwirlError::CapExceeded {
            what: "sampler enumeration",
            requested: n,
            cap: 4,
        });
    }
    if let SamplerMode::Ksparse(k) = mode {
        if k < 1 || k > n {
            return Err(TwirlError::validation(format!("k = {k} must lie in 1..={n}")));
        }
    }
    let idle: Vec<usize> = (1..n).collect();
    let r = |a: u64, b: u64| BigRational::new(BigInt::from(a), BigInt::from(b));
    let mut subsets: Vec<(BigRational, Vec<usize>)> = Vec::new();
    for bits in 0u32..(1 << idle.len()) {
        let t: Vec<usize> = idle
            .iter()
            .enumerate()
            .filter(|(i, _)| bits >> i & 1 == 1)
            .map(|(_, &q)| q)
            .collect();
        let w = match mode {
            SamplerMode::Full => {
                let k = t.len() as i32;
                num_traits::pow(r(3, 4), k as usize) * num_traits::pow(r(1, 4), idle.len() - k as usize)
            }
            SamplerMode::Ksparse(k) => {
                if t.len() >= k {
                    continue;
                }
                let weights = ksparse_weights(n, k);
                let total: BigUint = weights.iter().sum();
                BigRational::new(
                    BigInt::from(weights[t.len()].clone()),
                    BigInt::from(total * binomial(n - 1, t.len())),
                )
            }
        };
        subsets.push((w, t));
    }
    let count: usize = subsets.iter().map(|(_, t)| 2 * 24usize.pow(t.len() as u32)).sum();
    if count > ENUMERATION_CAP {
        return Err(TwirlError::CapExceeded {
            what: "sampler enumeration outcomes",
            requested: count,
            cap: ENUMERATION_CAP,
        });
    }
    let mut out = Vec::with_capacity(count);
    for (w, t) in subsets {
        let combos = 24usize.pow(t.len() as u32);
        let each = &w / BigRational::from_integer(BigInt::from(2 * combos));
        for code in 0..combos {
            let locals: Vec<u8> = (0..t.len()).map(|i| ((code / 24usize.pow(i as u32)) % 24) as u8).collect();
            for s_gate in [false, true] {
                out.push((
                    each.clone(),
                    GadgetDraw {
                        n,
                        targets: t.clone(),
                        locals: locals.clone(),
                        s_gate,
                    },
                ));
            }
        }
    }
    Ok(out)
}

/// Distribution of `D P D†` (phase dropped) under an enumerated sampler.
pub fn sampler_average_of_pauli(
    dist: &[(BigRational, GadgetDraw)],
    p: &PauliOp,
) -> HashMap<PauliOp, BigRational> {
    let mut map: HashMap<PauliOp, BigRational> = HashMap::new();
    for (w, d) in dist {
        let mut q = p.unsigned();
        d.conjugate_unsigned(&mut q);
        *map.entry(q).or_insert_with(BigRational::zero) += w;
    }
    map
}

/// Largest entry-wise difference between two explicit distributions.
pub fn max_discrepancy(
    a: &HashMap<PauliOp, BigRational>,
    b: &HashMap<PauliOp, BigRational>,
) -> BigRational {
    let mut worst = BigRational::zero();
    for (k, va) in a {
        let vb = b.get(k).cloned().unwrap_or_else(BigRational::zero);
        let d = (va - vb).abs();
        if d > worst {
            worst = d;
        }
    }
    for (k, vb) in b {
        if !a.contains_key(k) && vb.abs() > worst {
            worst = vb.abs();
        }
    }
    worst
}

/// Point channel `P` with probability one, for verification.
pub fn unit_point_channel(p: &PauliOp) -> Result<PauliChannel> {
    PauliChannel::new(
        p.num_qubits(),
        vec![Atom {
            prob: 1.0,
            ensemble: PauliEnsemble::point(p),
        }],
    )
}

/// Cardinality of the X-noise ensemble produced by the k-sparse twirl.
pub fn ksparse_ensemble_size(n: usize, k: usize) -> BigUint {
    BigUint::from(2u32) * weight_ball_size(n - 1, k - 1)
}

/// Outcome of comparing a sampler's exact average with the analytic twirl.
#[derive(Clone, Debug, Serialize)]
pub struct TwirlVerification {
    pub n: usize,
    pub mode: SamplerMode,
    pub noise: PauliOp,
    pub outcomes: usize,
    pub max_discrepancy: String,
    pub exact_match: bool,
}

/// Enumerates the sampler, averages `D P D†` and compares with the analytic channel.
pub fn verify_sampler(n: usize, mode: SamplerMode, noise: &PauliOp) -> Result<TwirlVerification> {
    check_dim(n, noise.num_qubits())?;
    let dist = enumerate_sampler_distribution(n, mode)?;
    let total: BigRational = dist.iter().map(|(w, _)| w.clone()).sum();
    if !total.is_one() {
        return Err(TwirlError::validation(format!(
            "sampler weights sum to {total}, not 1"
        )));
    }
    let sampled = sampler_average_of_pauli(&dist, noise);
    let spec = SymmetrySpec::rz_first_qubit(n)?;
    let ch = unit_point_channel(noise)?;
    let analytic = match mode {
        SamplerMode::Full => twirl_channel(&ch, &spec)?,
        SamplerMode::Ksparse(k) => twirl_channel_ksparse(&ch, &spec, k)?,
    };
    let mut expected = analytic.expand_exact()?;
    expected.retain(|_, v| !v.is_zero());
    let d = max_discrepancy(&sampled, &expected);
    Ok(TwirlVerification {
        n,
        mode,
        noise: noise.clone(),
        outcomes: dist.len(),
        exact_match: d.is_zero(),
        max_discrepancy: d.to_string(),
    })
}
