//! Pauli channels as probability mixtures of structured Pauli ensembles.

mod ensemble;
mod regions;
mod repr;

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use ensemble::{ensemble_mean_chi, Factor, FactorKind, Frame, PauliEnsemble};
pub(crate) use ensemble::{binomial, sample_index_by_weights, weight_ball_size};

use crate::error::{check_dim, Result, TwirlError};
use crate::pauli::{Letter, PauliOp};

/// Largest register `expand` will materialize by default.
pub const EXPAND_CAP: usize = 6;

/// Slack allowed when checking that probabilities sum to at most one.
const PROB_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub prob: f64,
    pub ensemble: PauliEnsemble,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "repr::ChannelRepr", into = "repr::ChannelRepr")]
pub struct PauliChannel {
    n: usize,
    atoms: Vec<Atom>,
}

/// Exact sums over the nonidentity Paulis.
struct RegionStats {
    p_err: BigRational,
    sum_sq: BigRational,
    /// `(Σ (p_i/p − 1/N)^2, Σ |p_i/p − 1/N|)`, absent when `p = 0`.
    distances: Option<(BigRational, BigRational)>,
}

fn rat(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite probability")
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(0.0)
}

/// `4^n / (4^n − 1)`.
pub(crate) fn white_factor(n: usize) -> f64 {
    1.0 / (1.0 - 0.25f64.powi(n as i32))
}

impl PauliChannel {
    pub fn new(n: usize, atoms: Vec<Atom>) -> Result<PauliChannel> {
        let mut kept = Vec::with_capacity(atoms.len());
        let mut total = 0.0;
        for a in atoms {
            if !a.prob.is_finite() || a.prob < 0.0 || a.prob > 1.0 {
                return Err(TwirlError::validation(format!(
                    "atom probability {} outside [0, 1]",
                    a.prob
                )));
            }
            check_dim(n, a.ensemble.num_qubits())?;
            if a.prob == 0.0 {
                continue;
            }
            if a.ensemble.contains_identity() {
                return Err(TwirlError::validation(
                    "atom ensembles must not contain the identity; fold it into identity_prob",
                ));
            }
            total += a.prob;
            kept.push(a);
        }
        if total > 1.0 + PROB_SLACK {
            return Err(TwirlError::validation(format!(
                "atom probabilities sum to {total} > 1"
            )));
        }
        if kept.len() > 64 {
            return Err(TwirlError::validation("at most 64 atoms are supported"));
        }
        Ok(PauliChannel { n, atoms: kept })
    }

    pub fn identity(n: usize) -> PauliChannel {
        PauliChannel { n, atoms: vec![] }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn p_err(&self) -> f64 {
        self.atoms.iter().map(|a| a.prob).sum()
    }

    pub fn identity_prob(&self) -> f64 {
        (1.0 - self.p_err()).max(0.0)
    }

    pub fn is_point_only(&self) -> bool {
        self.atoms.iter().all(|a| a.ensemble.is_point())
    }

    /// Merges atoms whose ensembles are equal.
    pub fn merged(self) -> PauliChannel {
        let mut out: Vec<Atom> = Vec::with_capacity(self.atoms.len());
        for a in self.atoms {
            if let Some(b) = out.iter_mut().find(|b| b.ensemble == a.ensemble) {
                b.prob += a.prob;
            } else {
                out.push(a);
            }
        }
        PauliChannel {
            n: self.n,
            atoms: out,
        }
    }

    /// `2^-n tr[P N(P)]`.
    pub fn pauli_fidelity(&self, p: &PauliOp) -> Result<f64> {
        check_dim(self.n, p.num_qubits())?;
        Ok(self.pauli_fidelity_unchecked(p))
    }

    #[inline]
    pub(crate) fn pauli_fidelity_unchecked(&self, p: &PauliOp) -> f64 {
        let mut f = 1.0;
        for a in &self.atoms {
            f -= a.prob * (1.0 - a.ensemble.mean_chi_unchecked(p));
        }
        f
    }

    fn region_stats(&self) -> Result<RegionStats> {
        let n = self.n;
        let atoms: Vec<&PauliEnsemble> = self.atoms.iter().map(|a| &a.ensemble).collect();
        let p_err: BigRational = self.atoms.iter().map(|a| rat(a.prob)).sum();
        let big_n = BigRational::from_integer(BigInt::from(BigUint::from(4u32).pow(n as u32) - 1u32));
        let inv_n = big_n.recip();

        // (value, multiplicity) over nonidentity Paulis, grouped by region.
        let mut groups: Vec<(BigRational, BigRational)> = Vec::new();
        match regions::region_counts(n, &atoms) {
            Some(counts) => {
                let weights: Vec<BigRational> = self
                    .atoms
                    .iter()
                    .map(|a| {
                        rat(a.prob) / BigRational::from_integer(BigInt::from(a.ensemble.cardinality()))
                    })
                    .collect();
                let mut total = BigUint::zero();
                for (mask, count) in counts {
                    total += &count;
                    let mut c = BigRational::from_integer(BigInt::from(count));
                    if mask == 0 {
                        // The identity Pauli lives in the empty region.
                        c -= BigRational::one();
                    }
                    let mut v = BigRational::zero();
                    for (ai, w) in weights.iter().enumerate() {
                        if mask >> ai & 1 == 1 {
                            v += w;
                        }
                    }
                    groups.push((v, c));
                }
                debug_assert_eq!(total, BigUint::from(4u32).pow(n as u32));
            }
            None => {
                if n > EXPAND_CAP {
                    return Err(TwirlError::unsupported(format!(
                        "atoms use different frames and n = {n} is above the expansion cap {EXPAND_CAP}"
                    )));
                }
                let map = self.expand_exact()?;
                let mut listed = BigRational::zero();
                for (p, v) in map {
                    if p.has_identity_bits() {
                        continue;
                    }
                    listed += BigRational::one();
                    groups.push((v, BigRational::one()));
                }
                let rest = big_n.clone() - listed;
                groups.push((BigRational::zero(), rest));
            }
        }

        let mut sum_sq = BigRational::zero();
        for (v, c) in &groups {
            sum_sq += c * v * v;
        }
        let distances = if p_err.is_zero() {
            None
        } else {
            let mut l2 = BigRational::zero();
            let mut l1 = BigRational::zero();
            for (v, c) in &groups {
                let d = v / &p_err - &inv_n;
                l2 += c * &d * &d;
                l1 += c * d.abs();
            }
            Some((l2, l1))
        };
        Ok(RegionStats {
            p_err,
            sum_sq,
            distances,
        })
    }

    /// 2-norm distance of the normalized error distribution from uniform.
    pub fn distance_v(&self) -> Result<f64> {
        let st = self.region_stats()?;
        let (l2, _) = st.distances.ok_or(TwirlError::UndefinedDistance)?;
        Ok(to_f64(&l2).sqrt())
    }

    /// 1-norm analogue of [`PauliChannel::distance_v`].
    pub fn diamond_distance_normalized(&self) -> Result<f64> {
        let st = self.region_stats()?;
        let (_, l1) = st.distances.ok_or(TwirlError::UndefinedDistance)?;
        Ok(to_f64(&l1))
    }

    /// `Σ p_i^2` over the nonidentity Paulis.
    pub fn sum_squared_probs(&self) -> Result<f64> {
        if self.atoms.is_empty() {
            return Ok(0.0);
        }
        Ok(to_f64(&self.region_stats()?.sum_sq))
    }

    pub fn unitarity(&self) -> Result<f64> {
        if self.atoms.is_empty() {
            return Ok(1.0);
        }
        let st = self.region_stats()?;
        let p = to_f64(&st.p_err);
        let c = white_factor(self.n);
        Ok(1.0 - c * 2.0 * p + c * (p * p + to_f64(&st.sum_sq)))
    }

    pub fn avg_noise_strength(&self) -> f64 {
        1.0 - white_factor(self.n) * self.p_err()
    }

    /// `None` stands for the identity.
    pub fn sample_error<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<PauliOp> {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.prob;
            if u < acc {
                return Some(a.ensemble.sample(rng));
            }
        }
        None
    }

    pub fn expand(&self) -> Result<HashMap<PauliOp, f64>> {
        self.expand_with_cap(EXPAND_CAP)
    }

    /// Explicit distribution over all Paulis with nonzero probability, identity included.
    pub fn expand_with_cap(&self, cap: usize) -> Result<HashMap<PauliOp, f64>> {
        if self.n > cap {
            return Err(TwirlError::CapExceeded {
                what: "channel expansion",
                requested: self.n,
                cap,
            });
        }
        let mut map: HashMap<PauliOp, f64> = HashMap::new();
        map.insert(PauliOp::identity(self.n), self.identity_prob());
        for a in &self.atoms {
            let members = a.ensemble.members();
            let q = a.prob / members.len() as f64;
            for m in members {
                *map.entry(m).or_insert(0.0) += q;
            }
        }
        Ok(map)
    }

    /// Rational version of [`PauliChannel::expand`]; probabilities are the exact
    /// values of the stored floats.
    pub fn expand_exact(&self) -> Result<HashMap<PauliOp, BigRational>> {
        if self.n > EXPAND_CAP {
            return Err(TwirlError::CapExceeded {
                what: "channel expansion",
                requested: self.n,
                cap: EXPAND_CAP,
            });
        }
        let mut map: HashMap<PauliOp, BigRational> = HashMap::new();
        let mut id = BigRational::one();
        for a in &self.atoms {
            let pr = rat(a.prob);
            id -= &pr;
            let members = a.ensemble.members();
            let q = pr / BigRational::from_integer(BigInt::from(members.len()));
            for m in members {
                *map.entry(m).or_insert_with(BigRational::zero) += &q;
            }
        }
        *map.entry(PauliOp::identity(self.n))
            .or_insert_with(BigRational::zero) += id;
        Ok(map)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("channel serializes")
    }

    pub fn from_json(s: &str) -> Result<PauliChannel> {
        crate::config::from_json_str(s)
    }
}

pub fn make_single_qubit_pauli_noise(
    n: usize,
    target_qubit: usize,
    px: f64,
    py: f64,
    pz: f64,
) -> Result<PauliChannel> {
    if target_qubit >= n {
        return Err(TwirlError::validation(format!(
            "target qubit {target_qubit} out of range for {n} qubits"
        )));
    }
    for (name, v) in [("px", px), ("py", py), ("pz", pz)] {
        if !v.is_finite() || v < 0.0 {
            return Err(TwirlError::validation(format!("{name} = {v} must be >= 0")));
        }
    }
    if px + py + pz > 1.0 + PROB_SLACK {
        return Err(TwirlError::validation(format!(
            "px + py + pz = {} exceeds 1",
            px + py + pz
        )));
    }
    let atoms = [(px, Letter::X), (py, Letter::Y), (pz, Letter::Z)]
        .into_iter()
        .filter(|(p, _)| *p > 0.0)
        .map(|(prob, l)| Atom {
            prob,
            ensemble: PauliEnsemble::point(&PauliOp::single(n, target_qubit, l)),
        })
        .collect();
    PauliChannel::new(n, atoms)
}

pub fn make_white_noise(n: usize, p_err: f64) -> Result<PauliChannel> {
    if !(0.0..=1.0).contains(&p_err) {
        return Err(TwirlError::validation(format!(
            "p_err = {p_err} outside [0, 1]"
        )));
    }
    if p_err == 0.0 {
        return Ok(PauliChannel::identity(n));
    }
    let e = PauliEnsemble::new(
        n,
        vec![Factor::full_group_minus_identity(n, (0..n).collect())?],
        None,
    )?;
    PauliChannel::new(n, vec![Atom { prob: p_err, ensemble: e }])
}

pub fn pauli_fidelity(ch: &PauliChannel, p: &PauliOp) -> Result<f64> {
    ch.pauli_fidelity(p)
}

pub fn distance_v(ch: &PauliChannel) -> Result<f64> {
    ch.distance_v()
}

pub fn diamond_distance_normalized(ch: &PauliChannel) -> Result<f64> {
    ch.diamond_distance_normalized()
}

pub fn unitarity(ch: &PauliChannel) -> Result<f64> {
    ch.unitarity()
}

pub fn avg_noise_strength(ch: &PauliChannel) -> f64 {
    ch.avg_noise_strength()
}

pub fn sample_error<R: Rng + ?Sized>(ch: &PauliChannel, rng: &mut R) -> Option<PauliOp> {
    ch.sample_error(rng)
}

pub fn expand(ch: &PauliChannel) -> Result<HashMap<PauliOp, f64>> {
    ch.expand()
}
