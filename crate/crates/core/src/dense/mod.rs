//! Small-n dense reference simulator.
//!
//! Two representations are kept on purpose. [`DensityMatrix`] holds the full complex
//! matrix and applies gates and channels literally. [`PauliVector`] holds the real
//! coefficients `r_P = tr[ρ P]` and applies rotations as pairwise mixes and Pauli
//! channels as diagonal multipliers, which is what makes long circuits affordable.
//! Each is used to check the other in the tests.
//!
//! Basis convention for matrices: qubit `j` is bit `n-1-j` of the basis index, so
//! qubit 0 is the leftmost tensor factor. Coefficient vectors are indexed by
//! `x | z << n` with bit `j` of each mask belonging to qubit `j`.

mod sim;

pub use sim::*;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::channel::PauliChannel;
use crate::clifford::CliffordOp;
use crate::error::{check_dim, Result, TwirlError};
use crate::pauli::{product_phase, PauliOp};

/// Largest `m` accepted by the Pauli subgroup scan.
pub const DENSE_SUBGROUP_CAP: usize = 6;
pub const DEFAULT_DENSE_CAP: usize = 10;
/// Hard ceiling even when the environment asks for more.
const MAX_DENSE_CAP: usize = 13;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = -1e-9;

/// Qubit cap for dense simulation, overridable through `TWIRLKIT_DENSE_CAP`.
pub fn dense_cap() -> usize {
    std::env::var("TWIRLKIT_DENSE_CAP")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .map(|v| v.min(MAX_DENSE_CAP))
        .unwrap_or(DEFAULT_DENSE_CAP)
}

pub(crate) fn check_cap(n: usize) -> Result<()> {
    let cap = dense_cap();
    if n > cap {
        return Err(TwirlError::CapExceeded {
            what: "dense simulation qubits",
            requested: n,
            cap,
        });
    }
    if n == 0 {
        return Err(TwirlError::validation("dense simulation needs at least one qubit"));
    }
    Ok(())
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn i_pow(k: u8) -> Complex64 {
    match k & 3 {
        0 => c(1.0, 0.0),
        1 => c(0.0, 1.0),
        2 => c(-1.0, 0.0),
        _ => c(0.0, -1.0),
    }
}

/// The Pauli with `x = code & (2^n-1)` and `z = code >> n`.
pub fn pauli_from_index(n: usize, code: usize) -> PauliOp {
    let mut p = PauliOp::identity(n);
    for q in 0..n {
        p.set_x_bit(q, code >> q & 1 == 1);
        p.set_z_bit(q, code >> (n + q) & 1 == 1);
    }
    p
}

/// Inverse of [`pauli_from_index`]; the phase is ignored.
pub fn pauli_index(p: &PauliOp) -> usize {
    let n = p.num_qubits();
    let mut code = 0usize;
    for q in 0..n {
        code |= (p.x_bit(q) as usize) << q;
        code |= (p.z_bit(q) as usize) << (n + q);
    }
    code
}

/// Basis-index masks `(x, z)` of `p` in the matrix convention.
fn basis_masks(p: &PauliOp) -> (usize, usize) {
    let n = p.num_qubits();
    let mut xm = 0usize;
    let mut zm = 0usize;
    for q in 0..n {
        let t = n - 1 - q;
        xm |= (p.x_bit(q) as usize) << t;
        zm |= (p.z_bit(q) as usize) << t;
    }
    (xm, zm)
}

/// `P|b> = coef(b) |b ^ x>`.
fn column_coefs(p: &PauliOp) -> (usize, Vec<Complex64>) {
    let n = p.num_qubits();
    let (xm, zm) = basis_masks(p);
    let ys = (xm & zm).count_ones() as u8;
    let base = i_pow(p.phase_exponent() + ys);
    let coefs = (0..1usize << n)
        .map(|b| {
            if (zm & b).count_ones() % 2 == 1 {
                -base
            } else {
                base
            }
        })
        .collect();
    (xm, coefs)
}

pub fn pauli_matrix(p: &PauliOp) -> DMatrix<Complex64> {
    let dim = 1usize << p.num_qubits();
    let (xm, coefs) = column_coefs(p);
    let mut m = DMatrix::zeros(dim, dim);
    for (b, &v) in coefs.iter().enumerate() {
        m[(b ^ xm, b)] = v;
    }
    m
}

/// `tr[P U]` without forming `P`.
pub(crate) fn trace_pauli_times(p: &PauliOp, u: &DMatrix<Complex64>) -> Complex64 {
    let (xm, coefs) = column_coefs(p);
    coefs
        .iter()
        .enumerate()
        .map(|(b, &v)| v * u[(b, b ^ xm)])
        .sum()
}

/// `P M`.
fn pauli_left(p: &PauliOp, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (xm, coefs) = column_coefs(p);
    let dim = m.nrows();
    DMatrix::from_fn(dim, m.ncols(), |r, col| coefs[r ^ xm] * m[(r ^ xm, col)])
}

/// `M P`.
fn pauli_right(m: &DMatrix<Complex64>, p: &PauliOp) -> DMatrix<Complex64> {
    let (xm, coefs) = column_coefs(p);
    DMatrix::from_fn(m.nrows(), m.ncols(), |r, col| m[(r, col ^ xm)] * coefs[col])
}

/// `exp(iθ A)` for a Hermitian Pauli `A`.
pub fn rotation_matrix(axis: &PauliOp, theta: f64) -> Result<DMatrix<Complex64>> {
    if !axis.is_hermitian() {
        return Err(TwirlError::validation("rotation axis must be Hermitian"));
    }
    let dim = 1usize << axis.num_qubits();
    Ok(DMatrix::<Complex64>::identity(dim, dim) * c(theta.cos(), 0.0)
        + pauli_matrix(axis) * c(0.0, theta.sin()))
}

/// How measurement bases are drawn for total-variation averages.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisEnsemble {
    #[default]
    Clifford,
    Haar,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    m: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Validated construction.
    pub fn new(m: DMatrix<Complex64>) -> Result<DensityMatrix> {
        let dim = m.nrows();
        if dim != m.ncols() || !dim.is_power_of_two() || dim < 2 {
            return Err(TwirlError::validation(format!(
                "density matrix must be 2^n x 2^n, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = dim.trailing_zeros() as usize;
        check_cap(n)?;
        let rho = DensityMatrix { n, m };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(n: usize, m: DMatrix<Complex64>) -> DensityMatrix {
        DensityMatrix { n, m }
    }

    pub fn zero_state(n: usize) -> Result<DensityMatrix> {
        DensityMatrix::computational(n, 0)
    }

    pub fn computational(n: usize, index: usize) -> Result<DensityMatrix> {
        check_cap(n)?;
        let dim = 1usize << n;
        if index >= dim {
            return Err(TwirlError::validation(format!("basis index {index} out of range")));
        }
        let mut m = DMatrix::zeros(dim, dim);
        m[(index, index)] = c(1.0, 0.0);
        Ok(DensityMatrix { n, m })
    }

    pub fn maximally_mixed(n: usize) -> Result<DensityMatrix> {
        check_cap(n)?;
        let dim = 1usize << n;
        Ok(DensityMatrix {
            n,
            m: DMatrix::identity(dim, dim) * c(1.0 / dim as f64, 0.0),
        })
    }

    pub fn pure(psi: &DVector<Complex64>) -> Result<DensityMatrix> {
        let norm = psi.norm();
        if norm == 0.0 {
            return Err(TwirlError::validation("zero state vector"));
        }
        let v = psi / c(norm, 0.0);
        DensityMatrix::new(&v * v.adjoint())
    }

    /// Haar-random pure state from a normalized complex Gaussian vector.
    pub fn haar_random_pure<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DensityMatrix> {
        check_cap(n)?;
        let dim = 1usize << n;
        let psi = DVector::from_fn(dim, |_, _| {
            c(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        DensityMatrix::pure(&psi)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    pub fn validate(&self) -> Result<()> {
        let herm = (&self.m - self.m.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if herm > HERMITIAN_TOL {
            return Err(TwirlError::validation(format!(
                "matrix is not Hermitian (deviation {herm:.3e})"
            )));
        }
        let tr = self.m.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(TwirlError::validation(format!("trace is {tr}, not 1")));
        }
        let min = self
            .m
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        if min < PSD_TOL {
            return Err(TwirlError::validation(format!(
                "matrix has negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    pub fn apply_unitary(&self, u: &DMatrix<Complex64>) -> Result<DensityMatrix> {
        let dim = self.m.nrows();
        if u.nrows() != dim || u.ncols() != dim {
            return Err(TwirlError::Dimension {
                expected: dim,
                found: u.nrows(),
            });
        }
        Ok(DensityMatrix {
            n: self.n,
            m: u * &self.m * u.adjoint(),
        })
    }

    /// `U ρ U†` with `U = cos θ I + i sin θ A`, using Pauli products only.
    pub fn apply_rotation(&self, axis: &PauliOp, theta: f64) -> Result<DensityMatrix> {
        check_dim(self.n, axis.num_qubits())?;
        if !axis.is_hermitian() {
            return Err(TwirlError::validation("rotation axis must be Hermitian"));
        }
        let (s, co) = theta.sin_cos();
        let ar = pauli_left(axis, &self.m);
        let ra = pauli_right(&self.m, axis);
        let ara = pauli_right(&ar, axis);
        let m = &self.m * c(co * co, 0.0) + (ar - ra) * c(0.0, s * co) + ara * c(s * s, 0.0);
        Ok(DensityMatrix { n: self.n, m })
    }

    /// `Σ q_E E ρ E` over the explicit expansion, identity included.
    pub fn apply_channel(&self, ch: &PauliChannel) -> Result<DensityMatrix> {
        check_dim(self.n, ch.num_qubits())?;
        let probs = ch.expand()?;
        let dim = self.m.nrows();
        let mut out = DMatrix::zeros(dim, dim);
        let mut terms: Vec<_> = probs.into_iter().collect();
        terms.sort_by(|a, b| a.0.cmp(&b.0));
        for (e, q) in terms {
            if q != 0.0 {
                out += pauli_right(&pauli_left(&e, &self.m), &e) * c(q, 0.0);
            }
        }
        Ok(DensityMatrix { n: self.n, m: out })
    }

    pub fn apply_clifford(&self, cl: &CliffordOp) -> Result<DensityMatrix> {
        check_dim(self.n, cl.num_qubits())?;
        Ok(PauliVector::from_density(self).apply_clifford(cl).to_density())
    }

    pub fn expectation(&self, p: &PauliOp) -> Result<f64> {
        check_dim(self.n, p.num_qubits())?;
        Ok(trace_pauli_times(p, &self.m).re)
    }

    /// Computational-basis outcome probabilities.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.m.nrows()).map(|i| self.m[(i, i)].re.max(0.0)).collect()
    }
}

/// `(1/2) Σ |eig(ρ - σ)|`.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    check_dim(a.n, b.n)?;
    let d = &a.m - &b.m;
    Ok(0.5 * d.symmetric_eigenvalues().iter().map(|e| e.abs()).sum::<f64>())
}

pub fn tv_distance(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Haar unitary from the QR decomposition of a complex Gaussian matrix.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DMatrix<Complex64>> {
    check_cap(n)?;
    let dim = 1usize << n;
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        for i in 0..dim {
            q[(i, j)] *= ph;
        }
    }
    Ok(q)
}

/// Mean and standard error of the total-variation distance over random measurement bases.
pub fn tv_distance_random_bases<R: Rng + ?Sized>(
    a: &DensityMatrix,
    b: &DensityMatrix,
    num_bases: usize,
    basis: BasisEnsemble,
    rng: &mut R,
) -> Result<(f64, f64)> {
    check_dim(a.n, b.n)?;
    if num_bases == 0 {
        return Err(TwirlError::validation("num_bases must be positive"));
    }
    let (va, vb) = (PauliVector::from_density(a), PauliVector::from_density(b));
    let samples: Vec<f64> = (0..num_bases)
        .map(|_| match basis {
            BasisEnsemble::Clifford => {
                let cl = CliffordOp::random(a.n, rng);
                Ok(tv_distance(&va.probabilities_after(&cl), &vb.probabilities_after(&cl)))
            }
            BasisEnsemble::Haar => {
                let u = haar_unitary(a.n, rng)?;
                Ok(tv_distance(
                    &a.apply_unitary(&u)?.probabilities(),
                    &b.apply_unitary(&u)?.probabilities(),
                ))
            }
        })
        .collect::<Result<_>>()?;
    Ok(mean_stderr(&samples))
}

pub(crate) fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn bit_reverse_table(n: usize) -> Vec<usize> {
    (0..1usize << n)
        .map(|v| (0..n).fold(0, |acc, q| acc | ((v >> (n - 1 - q) & 1) << q)))
        .collect()
}

/// Real Pauli coefficients `r_P = tr[ρ P]`, so `ρ = 2^{-n} Σ r_P P`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliVector {
    n: usize,
    coeffs: Vec<f64>,
}

impl PauliVector {
    pub fn zeros(n: usize) -> Result<PauliVector> {
        check_cap(n)?;
        Ok(PauliVector {
            n,
            coeffs: vec![0.0; 1usize << (2 * n)],
        })
    }

    /// Coefficients of `|0...0><0...0|`: every Z-type Pauli has coefficient one.
    pub fn zero_state(n: usize) -> Result<PauliVector> {
        let mut v = PauliVector::zeros(n)?;
        for z in 0..1usize << n {
            v.coeffs[z << n] = 1.0;
        }
        Ok(v)
    }

    /// A single Pauli operator `P` (coefficient `2^n`, so that `tr[P P] / 2^n = 2^n`).
    pub fn from_pauli(p: &PauliOp) -> Result<PauliVector> {
        let mut v = PauliVector::zeros(p.num_qubits())?;
        let sign = match p.phase_exponent() {
            0 => 1.0,
            2 => -1.0,
            _ => return Err(TwirlError::validation("Pauli operator must be Hermitian")),
        };
        v.coeffs[pauli_index(p)] = sign * (1u64 << p.num_qubits()) as f64;
        Ok(v)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn get(&self, p: &PauliOp) -> f64 {
        let s = if p.phase_exponent() == 2 { -1.0 } else { 1.0 };
        s * self.coeffs[pauli_index(p)]
    }

    pub fn dot(&self, other: &PauliVector) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum()
    }

    /// Fast per-qubit butterfly from the matrix.
    pub fn from_density(rho: &DensityMatrix) -> PauliVector {
        let n = rho.n;
        let dim = 1usize << n;
        let mut buf: Vec<Complex64> = (0..dim * dim).map(|k| rho.m[(k / dim, k % dim)]).collect();
        for t in 0..n {
            let bit = 1usize << t;
            for r in (0..dim).filter(|r| r & bit == 0) {
                for col in (0..dim).filter(|col| col & bit == 0) {
                    let i00 = r * dim + col;
                    let i01 = r * dim + (col | bit);
                    let i10 = (r | bit) * dim + col;
                    let i11 = (r | bit) * dim + (col | bit);
                    let (a, b, cc, d) = (buf[i00], buf[i01], buf[i10], buf[i11]);
                    buf[i00] = a + d;
                    buf[i01] = b + cc;
                    buf[i10] = c(0.0, 1.0) * (b - cc);
                    buf[i11] = a - d;
                }
            }
        }
        let rev = bit_reverse_table(n);
        let mut coeffs = vec![0.0; dim * dim];
        for r in 0..dim {
            for col in 0..dim {
                let code = rev[r ^ col] | rev[r] << n;
                coeffs[code] = buf[r * dim + col].re;
            }
        }
        PauliVector { n, coeffs }
    }

    pub fn to_density(&self) -> DensityMatrix {
        let n = self.n;
        let dim = 1usize << n;
        let rev = bit_reverse_table(n);
        let mut buf = vec![c(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for col in 0..dim {
                buf[r * dim + col] = c(self.coeffs[rev[r ^ col] | rev[r] << n], 0.0);
            }
        }
        for t in 0..n {
            let bit = 1usize << t;
            for r in (0..dim).filter(|r| r & bit == 0) {
                for col in (0..dim).filter(|col| col & bit == 0) {
                    let i00 = r * dim + col;
                    let i01 = r * dim + (col | bit);
                    let i10 = (r | bit) * dim + col;
                    let i11 = (r | bit) * dim + (col | bit);
                    let (ci, cx, cy, cz) = (buf[i00], buf[i01], buf[i10], buf[i11]);
                    buf[i00] = (ci + cz) * 0.5;
                    buf[i11] = (ci - cz) * 0.5;
                    buf[i01] = (cx - c(0.0, 1.0) * cy) * 0.5;
                    buf[i10] = (cx + c(0.0, 1.0) * cy) * 0.5;
                }
            }
        }
        DensityMatrix::from_matrix_unchecked(n, DMatrix::from_row_slice(dim, dim, &buf))
    }

    /// `U ρ U†` for `U = exp(iθ A)`: anticommuting pairs `(P, PA)` rotate by `2θ`.
    pub fn apply_rotation(&mut self, axis: &PauliOp, theta: f64) -> Result<()> {
        check_dim(self.n, axis.num_qubits())?;
        let sign_exp = match axis.phase_exponent() {
            0 => 0u8,
            2 => 2u8,
            _ => return Err(TwirlError::validation("rotation axis must be Hermitian")),
        };
        let n = self.n;
        let mask = (1usize << n) - 1;
        let a = pauli_index(axis);
        let (ax, az) = ((a & mask) as u64, (a >> n) as u64);
        let (s2, c2) = (2.0 * theta).sin_cos();
        // Coefficient of Q in UPU† is i^{e+3} sin 2θ where P A = i^e Q.
        let sigma = |code: usize| -> f64 {
            let (px, pz) = ((code & mask) as u64, (code >> n) as u64);
            let e = product_phase(&[px], &[pz], &[ax], &[az]) + sign_exp + 3;
            if e.is_multiple_of(4) {
                1.0
            } else {
                -1.0
            }
        };
        for p in 0..self.coeffs.len() {
            let q = p ^ a;
            if q < p {
                continue;
            }
            let (px, pz) = ((p & mask) as u64, (p >> n) as u64);
            if ((px & az) ^ (pz & ax)).count_ones() % 2 == 0 {
                continue;
            }
            let (rp, rq) = (self.coeffs[p], self.coeffs[q]);
            self.coeffs[p] = c2 * rp + sigma(q) * s2 * rq;
            self.coeffs[q] = c2 * rq + sigma(p) * s2 * rp;
        }
        Ok(())
    }

    /// `self += w * other`.
    pub fn add_scaled(&mut self, other: &PauliVector, w: f64) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += w * b;
        }
    }

    /// Multiplies every coefficient by `f(code)`.
    pub fn scale_by<F: Fn(usize) -> f64>(&mut self, f: F) {
        for (code, v) in self.coeffs.iter_mut().enumerate() {
            if *v != 0.0 {
                *v *= f(code);
            }
        }
    }

    /// Applies a Pauli channel as the diagonal map `r_P -> λ(P) r_P`.
    pub fn apply_channel(&mut self, ch: &PauliChannel) -> Result<()> {
        check_dim(self.n, ch.num_qubits())?;
        let lambda = fidelity_table(ch);
        for (v, l) in self.coeffs.iter_mut().zip(lambda.iter()) {
            *v *= l;
        }
        Ok(())
    }

    /// `C ρ C†` as a signed permutation of coefficients.
    pub fn apply_clifford(&self, cl: &CliffordOp) -> PauliVector {
        let mut out = vec![0.0; self.coeffs.len()];
        for (code, &v) in self.coeffs.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let img = cl.conjugate_unchecked(&pauli_from_index(self.n, code));
            let s = if img.phase_exponent() == 2 { -1.0 } else { 1.0 };
            out[pauli_index(&img)] += s * v;
        }
        PauliVector {
            n: self.n,
            coeffs: out,
        }
    }

    /// Outcome probabilities after the basis change `C`: only Paulis mapped to Z-type
    /// operators contribute, followed by a Walsh-Hadamard transform.
    pub fn probabilities_after(&self, cl: &CliffordOp) -> Vec<f64> {
        let n = self.n;
        let dim = 1usize << n;
        let inv = cl.inverse();
        let mut f: Vec<f64> = (0..dim)
            .map(|z| {
                let pre = inv.conjugate_unchecked(&pauli_from_index(n, z << n));
                let s = if pre.phase_exponent() == 2 { -1.0 } else { 1.0 };
                s * self.coeffs[pauli_index(&pre)]
            })
            .collect();
        walsh_hadamard(&mut f);
        // Transform index bit j belongs to qubit j; matrix basis bit j to qubit n-1-j.
        let rev = bit_reverse_table(n);
        (0..dim).map(|b| (f[rev[b]] / dim as f64).max(0.0)).collect()
    }

    /// Probabilities in the computational basis.
    pub fn probabilities(&self) -> Vec<f64> {
        self.probabilities_after(&CliffordOp::identity(self.n))
    }

    /// Replaces `ρ` by `R ρ + (1 - R) I / 2^n`.
    pub fn rescale_towards_identity(&mut self, r: f64) {
        for (code, v) in self.coeffs.iter_mut().enumerate() {
            if code != 0 {
                *v *= r;
            }
        }
    }
}

fn walsh_hadamard(f: &mut [f64]) {
    let mut h = 1;
    while h < f.len() {
        for i in (0..f.len()).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (f[j], f[j + h]);
                f[j] = a + b;
                f[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// `λ(P)` for every coefficient index. Point-only channels take a popcount fast path.
pub(crate) fn fidelity_table(ch: &PauliChannel) -> Vec<f64> {
    let n = ch.num_qubits();
    let size = 1usize << (2 * n);
    if ch.is_point_only() {
        let mask = (1usize << n) - 1;
        let pts: Vec<(usize, usize, f64)> = ch
            .atoms()
            .iter()
            .map(|a| {
                let code = pauli_index(&a.ensemble.as_point().expect("point atom"));
                (code & mask, code >> n, a.prob)
            })
            .collect();
        (0..size)
            .map(|code| {
                let (px, pz) = (code & mask, code >> n);
                1.0 - 2.0
                    * pts
                        .iter()
                        .filter(|(ex, ez, _)| ((px & ez) ^ (pz & ex)).count_ones() % 2 == 1)
                        .map(|t| t.2)
                        .sum::<f64>()
            })
            .collect()
    } else {
        (0..size)
            .map(|code| ch.pauli_fidelity_unchecked(&pauli_from_index(n, code)))
            .collect()
    }
}
