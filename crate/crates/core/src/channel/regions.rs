//! Exact counts of the Venn regions cut out by a list of ensembles.
//!
//! The per-Pauli error probability of a channel is constant on each region, so sums
//! over all `4^n` Paulis reduce to a sum over at most `2^atoms` regions. Counts come
//! from a dynamic program over qubits that tracks, per atom, whether the partial
//! letter string is still compatible and how many non-identity letters its weighted
//! factors have seen.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::Zero;

use super::ensemble::{FactorKind, Frame, PauliEnsemble};
use crate::pauli::PauliOp;

#[derive(Clone, Copy)]
enum Counter {
    /// FullGroupMinusIdentity: at least one non-identity letter.
    NonZero,
    /// WeightAtMost: at most `w` non-identity letters.
    AtMost(u16),
}

impl Counter {
    fn cap(self) -> u16 {
        match self {
            Counter::NonZero => 1,
            Counter::AtMost(w) => w + 1,
        }
    }

    fn accepts(self, c: u16) -> bool {
        match self {
            Counter::NonZero => c >= 1,
            Counter::AtMost(w) => c <= w,
        }
    }
}

struct AtomShape {
    /// Allowed-letter set per qubit.
    allowed: Vec<u8>,
    /// Counter slot per qubit, if the qubit sits in a weighted factor.
    slot: Vec<Option<usize>>,
}

/// Region counts keyed by atom-membership bitmask; `None` when the atoms use
/// different frames (the caller then falls back to explicit expansion).
pub(crate) fn region_counts(n: usize, atoms: &[&PauliEnsemble]) -> Option<Vec<(u64, BigUint)>> {
    assert!(atoms.len() <= 64, "at most 64 atoms supported");
    let mut common: Option<Option<&Frame>> = None;
    for e in atoms.iter().filter(|e| !e.is_point()) {
        match common {
            None => common = Some(e.frame()),
            Some(f) if f == e.frame() => {}
            Some(_) => return None,
        }
    }
    let frame = common.flatten();

    let mut counters: Vec<Counter> = Vec::new();
    let mut owner: Vec<usize> = Vec::new();
    let mut shapes: Vec<AtomShape> = Vec::with_capacity(atoms.len());
    for (ai, e) in atoms.iter().enumerate() {
        let mut shape = AtomShape {
            allowed: vec![0b1111; n],
            slot: vec![None; n],
        };
        if e.is_point() {
            let p = e.as_point().expect("point ensemble");
            let p = match frame {
                Some(fr) => {
                    let mut q = PauliOp::identity(n);
                    fr.inverse().conjugate_unsigned_into(&p, &mut q);
                    q
                }
                None => p,
            };
            for q in 0..n {
                shape.allowed[q] = 1 << (p.letter(q) as usize);
            }
        } else {
            for f in e.factors() {
                let counter = match f.kind() {
                    FactorKind::FullGroupMinusIdentity => Some(Counter::NonZero),
                    FactorKind::WeightAtMost { max_weight } if *max_weight < f.size() => {
                        Some(Counter::AtMost(*max_weight as u16))
                    }
                    _ => None,
                };
                let slot = counter.map(|c| {
                    counters.push(c);
                    owner.push(ai);
                    counters.len() - 1
                });
                for &q in f.register() {
                    shape.allowed[q] = f.allowed_letters(q);
                    shape.slot[q] = slot;
                }
            }
        }
        shapes.push(shape);
    }

    let na = atoms.len();
    let mut start = vec![1u16; na];
    start.extend(std::iter::repeat_n(0u16, counters.len()));
    let mut states: HashMap<Vec<u16>, BigUint> = HashMap::new();
    states.insert(start, BigUint::from(1u32));
    for q in 0..n {
        let mut next: HashMap<Vec<u16>, BigUint> = HashMap::with_capacity(states.len() * 2);
        for (st, cnt) in &states {
            for letter in 0..4u8 {
                let mut ns = st.clone();
                for (ai, shape) in shapes.iter().enumerate() {
                    if ns[ai] == 0 {
                        continue;
                    }
                    if shape.allowed[q] & (1 << letter) == 0 {
                        ns[ai] = 0;
                        for (s, &o) in owner.iter().enumerate() {
                            if o == ai {
                                ns[na + s] = 0;
                            }
                        }
                    } else if letter != 0 {
                        if let Some(s) = shape.slot[q] {
                            ns[na + s] = (ns[na + s] + 1).min(counters[s].cap());
                        }
                    }
                }
                *next.entry(ns).or_insert_with(BigUint::zero) += cnt;
            }
        }
        states = next;
    }

    let mut by_mask: HashMap<u64, BigUint> = HashMap::new();
    for (st, cnt) in states {
        let mut mask = 0u64;
        for ai in 0..na {
            if st[ai] == 0 {
                continue;
            }
            let ok = owner
                .iter()
                .enumerate()
                .filter(|(_, &o)| o == ai)
                .all(|(s, _)| counters[s].accepts(st[na + s]));
            if ok {
                mask |= 1 << ai;
            }
        }
        *by_mask.entry(mask).or_insert_with(BigUint::zero) += cnt;
    }
    let mut out: Vec<(u64, BigUint)> = by_mask.into_iter().collect();
    out.sort_by_key(|(m, _)| *m);
    Some(out)
}
