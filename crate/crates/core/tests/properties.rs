//! Randomized invariants, each checked against an independent dense or brute-force
//! computation. The proptest seed is fixed so runs are reproducible.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use twirlkit::channel::{make_single_qubit_pauli_noise, make_white_noise};
use twirlkit::circuit::{
    average_bias, build_trotter_circuit, overhead_rescaling, HamiltonianModel, effective_fidelity, effective_fidelity_exact, optimal_rescale_coefficient, CliffordLayer,
    GadgetAveraging, Layer, LayerNoise, LogicalCircuit, RotationLayer, TwirlMode,
};
use twirlkit::dense::{haar_unitary, pauli_from_index, pauli_index, pauli_matrix, DensityMatrix};
use twirlkit::twirl::{
    draw_full_twirl, draw_ksparse_twirl, twirl_channel, twirl_channel_ksparse, unit_point_channel, Preset,
    SymmetrySpec,
};
use twirlkit::{Atom, CliffordOp, Factor, Frame, GateSpec, Letter, PauliChannel, PauliEnsemble, PauliOp};

type M = DMatrix<Complex64>;

fn cfg(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x5eed_7a1c),
        failure_persistence: None,
        ..Config::default()
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn max_diff(a: &M, b: &M) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

// ---- dense reference matrices, qubit 0 is the most significant tensor factor ----

fn letter_matrix(l: Letter) -> M {
    let (o, i1) = (c(0.0, 0.0), c(1.0, 0.0));
    let v = match l.bits() {
        (false, false) => [i1, o, o, i1],
        (true, false) => [o, i1, i1, o],
        (true, true) => [o, c(0.0, -1.0), c(0.0, 1.0), o],
        (false, true) => [i1, o, o, -i1],
    };
    M::from_row_slice(2, 2, &v)
}

fn kron_all(ms: impl Iterator<Item = M>) -> M {
    ms.fold(M::identity(1, 1), |acc, m| acc.kronecker(&m))
}

fn dense_pauli(p: &PauliOp) -> M {
    let phase = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)][p.phase_exponent() as usize];
    kron_all((0..p.num_qubits()).map(|q| letter_matrix(p.letter(q)))) * phase
}

fn embed1(n: usize, q: usize, g: &M) -> M {
    kron_all((0..n).map(|j| if j == q { g.clone() } else { M::identity(2, 2) }))
}

/// Permutation-with-phase gate: column `b` maps to `f(b)`.
fn perm(n: usize, f: impl Fn(usize) -> (usize, Complex64)) -> M {
    let dim = 1 << n;
    let mut m = M::zeros(dim, dim);
    for b in 0..dim {
        let (to, ph) = f(b);
        m[(to, b)] = ph;
    }
    m
}

fn gate_matrix(n: usize, g: &GateSpec) -> M {
    let bit = |q: usize| 1usize << (n - 1 - q);
    let one = c(1.0, 0.0);
    let diag = |d: Complex64| M::from_row_slice(2, 2, &[one, c(0.0, 0.0), c(0.0, 0.0), d]);
    match g {
        GateSpec::H(q) => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            embed1(n, *q, &M::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]))
        }
        GateSpec::S(q) => embed1(n, *q, &diag(c(0.0, 1.0))),
        GateSpec::Sdg(q) => embed1(n, *q, &diag(c(0.0, -1.0))),
        GateSpec::X(q) => embed1(n, *q, &letter_matrix(Letter::X)),
        GateSpec::Y(q) => embed1(n, *q, &letter_matrix(Letter::Y)),
        GateSpec::Z(q) => embed1(n, *q, &letter_matrix(Letter::Z)),
        GateSpec::Cnot { control, target } => perm(n, |b| {
            (if b & bit(*control) != 0 { b ^ bit(*target) } else { b }, one)
        }),
        GateSpec::Cz(a, t) => perm(n, |b| {
            let both = b & bit(*a) != 0 && b & bit(*t) != 0;
            (b, if both { -one } else { one })
        }),
        GateSpec::Swap(a, t) => perm(n, |b| {
            let (ba, bt) = (b & bit(*a) != 0, b & bit(*t) != 0);
            let mut o = b & !bit(*a) & !bit(*t);
            if ba {
                o |= bit(*t);
            }
            if bt {
                o |= bit(*a);
            }
            (o, one)
        }),
        GateSpec::MultiCnot { control, targets } => perm(n, |b| {
            let flip: usize = targets.iter().map(|&t| bit(t)).sum();
            (if b & bit(*control) != 0 { b ^ flip } else { b }, one)
        }),
    }
}

fn gates_unitary(n: usize, gates: &[GateSpec]) -> M {
    gates.iter().fold(M::identity(1 << n, 1 << n), |u, g| gate_matrix(n, g) * u)
}

/// The unsigned Pauli proportional to `m`, which must be a phase times a Pauli.
fn identify_pauli(n: usize, m: &M) -> PauliOp {
    let dim = (1usize << n) as f64;
    for code in 0..1usize << (2 * n) {
        let q = pauli_from_index(n, code);
        let overlap = (dense_pauli(&q).adjoint() * m).trace() / dim;
        if (overlap.norm() - 1.0).abs() < 1e-9 {
            return q;
        }
    }
    panic!("matrix is not proportional to a Pauli");
}

// ---- generators ----

fn letter_from_code(code: u8) -> Letter {
    Letter::from_bits(code & 1 == 1, code & 2 == 2)
}

fn pauli_from_codes(codes: &[u8], phase: u8) -> PauliOp {
    let letters: Vec<Letter> = codes.iter().map(|&k| letter_from_code(k)).collect();
    PauliOp::from_letters(&letters).with_phase_exponent(phase)
}

fn arb_pauli(n: usize) -> impl Strategy<Value = PauliOp> {
    (prop::collection::vec(0..4u8, n), 0..4u8).prop_map(|(codes, ph)| pauli_from_codes(&codes, ph))
}

fn build_gate(n: usize, kind: u8, a: usize, b: usize, mask: usize) -> GateSpec {
    let other = if n > 1 { (a + 1 + b % (n - 1)) % n } else { a };
    let kind = if n == 1 { kind % 6 } else { kind % 10 };
    match kind {
        0 => GateSpec::H(a),
        1 => GateSpec::S(a),
        2 => GateSpec::Sdg(a),
        3 => GateSpec::X(a),
        4 => GateSpec::Y(a),
        5 => GateSpec::Z(a),
        6 => GateSpec::Cnot { control: a, target: other },
        7 => GateSpec::Cz(a, other),
        8 => GateSpec::Swap(a, other),
        _ => {
            let mut targets: Vec<usize> = (0..n).filter(|&q| q != a && mask >> q & 1 == 1).collect();
            if targets.is_empty() {
                targets.push(other);
            }
            GateSpec::MultiCnot { control: a, targets }
        }
    }
}

fn arb_gates(n: usize, max_len: usize) -> impl Strategy<Value = Vec<GateSpec>> {
    prop::collection::vec(
        (any::<u8>(), 0..n, any::<usize>(), any::<usize>()).prop_map(move |(k, a, b, m)| build_gate(n, k, a, b, m)),
        0..max_len,
    )
}

fn random_gates(n: usize, len: usize, rng: &mut ChaCha8Rng) -> Vec<GateSpec> {
    (0..len)
        .map(|_| {
            build_gate(n, rng.random(), rng.random_range(0..n), rng.random::<u32>() as usize, rng.random::<u32>() as usize)
        })
        .collect()
}

fn random_pauli_letters(n: usize, rng: &mut ChaCha8Rng) -> PauliOp {
    let codes: Vec<u8> = (0..n).map(|_| rng.random_range(0..4u8)).collect();
    pauli_from_codes(&codes, 0)
}

/// Random factorized ensemble without the identity: a random partition of the qubits,
/// a random factor kind per register and an optional random frame.
fn random_ensemble(n: usize, rng: &mut ChaCha8Rng) -> PauliEnsemble {
    loop {
        let e = random_ensemble_any(n, rng);
        if !e.contains_identity() {
            return e;
        }
    }
}

fn random_ensemble_any(n: usize, rng: &mut ChaCha8Rng) -> PauliEnsemble {
    let mut qubits: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        qubits.swap(i, rng.random_range(0..=i));
    }
    let mut factors = Vec::new();
    let mut rest = &qubits[..];
    while !rest.is_empty() {
        let size = rng.random_range(1..=rest.len().min(3));
        let reg = rest[..size].to_vec();
        rest = &rest[size..];
        let f = match rng.random_range(0..6) {
            0 => Factor::point(n, reg.clone(), &random_pauli_letters(size, rng)),
            1 => Factor::full_group(n, reg),
            2 => Factor::full_group_minus_identity(n, reg),
            3 => Factor::diagonal_iz(n, reg),
            4 if size == 1 => Factor::xy_set(n, reg[0]),
            4 => Factor::point(n, reg.clone(), &random_pauli_letters(size, rng)),
            _ => Factor::weight_at_most(n, reg, rng.random_range(0..=size)),
        };
        factors.push(f.unwrap());
    }
    let frame = rng
        .random_bool(0.5)
        .then(|| Frame::from_gates(n, random_gates(n, rng.random_range(0..6), rng)).unwrap());
    PauliEnsemble::new(n, factors, frame).unwrap()
}

fn random_probs(count: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let w: Vec<f64> = (0..count).map(|_| rng.random::<f64>()).collect();
    let sum: f64 = w.iter().sum();
    let total = match rng.random_range(0..10) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.random::<f64>(),
    };
    w.iter().map(|x| x / sum * total).collect()
}

fn random_channel(n: usize, rng: &mut ChaCha8Rng) -> PauliChannel {
    let count = rng.random_range(1..=3);
    let atoms = random_probs(count, rng)
        .into_iter()
        .map(|prob| Atom {
            prob,
            ensemble: random_ensemble(n, rng),
        })
        .collect();
    PauliChannel::new(n, atoms).unwrap()
}

fn random_point_channel(n: usize, rng: &mut ChaCha8Rng) -> PauliChannel {
    let count = rng.random_range(1..=4);
    let atoms = random_probs(count, rng)
        .into_iter()
        .map(|prob| Atom {
            prob,
            ensemble: PauliEnsemble::point(&PauliOp::random(n, true, rng)),
        })
        .collect();
    PauliChannel::new(n, atoms).unwrap()
}

fn random_spec(n: usize, rng: &mut ChaCha8Rng) -> SymmetrySpec {
    match rng.random_range(0..5) {
        0 => SymmetrySpec::rz_first_qubit(n).unwrap(),
        1 => SymmetrySpec::t_gate(n).unwrap(),
        2 if n >= 3 => SymmetrySpec::toffoli(n).unwrap(),
        3 => SymmetrySpec::pauli_rotation(&PauliOp::random(n, true, rng)).unwrap(),
        _ => {
            let n1 = rng.random_range(0..=n);
            let n2 = rng.random_range(0..=n - n1);
            let gates = random_gates(n, rng.random_range(0..8), rng);
            SymmetrySpec::new(n, n1, n2, n - n1 - n2, gates, Preset::Custom).unwrap()
        }
    }
}

/// Probabilities of every Pauli, identity included.
fn full_distribution(ch: &PauliChannel) -> Vec<f64> {
    let n = ch.num_qubits();
    let mut q = vec![0.0; 1 << (2 * n)];
    for (p, v) in ch.expand().unwrap() {
        q[pauli_index(&p)] += v;
    }
    q[0] = 1.0 - q[1..].iter().sum::<f64>();
    q
}

fn chi_square_p(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    1.0 - ChiSquared::new((counts.len() - 1) as f64).unwrap().cdf(stat)
}

// ---- pauli algebra ----

proptest! {
    #![proptest_config(cfg(256))]

    #[test]
    fn commutation_matches_product_order((a, b) in (1..=70usize).prop_flat_map(|n| (arb_pauli(n), arb_pauli(n)))) {
        let ab = a.mul(&b).unwrap();
        let ba = b.mul(&a).unwrap();
        prop_assert_eq!(a.commutes(&b).unwrap(), ab == ba);
        prop_assert_eq!(ab.unsigned(), ba.unsigned());
        prop_assert!(ab.weight() <= a.weight() + b.weight());
        prop_assert!(a.mul(&a).unwrap().has_identity_bits());
    }

    #[test]
    fn products_are_associative_and_match_matrices(
        (a, b, d) in (1..=4usize).prop_flat_map(|n| (arb_pauli(n), arb_pauli(n), arb_pauli(n)))
    ) {
        let ab = a.mul(&b).unwrap();
        prop_assert_eq!(ab.mul(&d).unwrap(), a.mul(&b.mul(&d).unwrap()).unwrap());
        prop_assert!(max_diff(&dense_pauli(&ab), &(dense_pauli(&a) * dense_pauli(&b))) < 1e-12);
        prop_assert!(max_diff(&pauli_matrix(&a), &dense_pauli(&a)) < 1e-12);
    }
}

#[test]
fn random_paulis_are_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in 1..=3 {
        for exclude in [false, true] {
            let bins = 1usize << (2 * n);
            let mut counts = vec![0u64; bins];
            for _ in 0..400 * bins {
                counts[pauli_index(&PauliOp::random(n, exclude, &mut rng))] += 1;
            }
            if exclude {
                assert_eq!(counts[0], 0);
                counts.remove(0);
            }
            let p = chi_square_p(&counts);
            assert!(p > 1e-3, "n = {n}, exclude = {exclude}: p = {p}");
        }
    }
}

// ---- tableaus ----

proptest! {
    #![proptest_config(cfg(128))]

    #[test]
    fn tableaus_stay_symplectic(
        (n, g1, g2, p) in (1..=9usize).prop_flat_map(|n| (Just(n), arb_gates(n, 30), arb_gates(n, 30), arb_pauli(n)))
    ) {
        let a = CliffordOp::from_gates(n, &g1).unwrap();
        let b = CliffordOp::from_gates(n, &g2).unwrap();
        let ab = CliffordOp::compose(&a, &b).unwrap();
        prop_assert!(a.is_symplectic() && b.is_symplectic());
        prop_assert!(ab.is_symplectic());
        prop_assert!(a.inverse().is_symplectic());
        prop_assert!(CliffordOp::compose(&a, &a.inverse()).unwrap().is_identity());
        prop_assert_eq!(ab.conjugate(&p).unwrap(), a.conjugate(&b.conjugate(&p).unwrap()).unwrap());
    }

    #[test]
    fn conjugation_matches_dense_matrices(
        (n, gates, p) in (1..=4usize).prop_flat_map(|n| (Just(n), arb_gates(n, 16), arb_pauli(n)))
    ) {
        let cl = CliffordOp::from_gates(n, &gates).unwrap();
        let u = gates_unitary(n, &gates);
        let want = &u * dense_pauli(&p) * u.adjoint();
        let got = cl.conjugate(&p).unwrap();
        prop_assert!(max_diff(&dense_pauli(&got), &want) < 1e-10, "{} -> {}", p, got);
        prop_assert_eq!(cl.conjugate(&cl.inverse().conjugate(&p).unwrap()).unwrap(), p);
    }

    #[test]
    fn random_cliffords_are_symplectic(n in 1..=40usize, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cl = CliffordOp::random(n, &mut rng);
        prop_assert!(cl.is_symplectic());
        prop_assert!(CliffordOp::compose(&cl.inverse(), &cl).unwrap().is_identity());
    }
}

#[test]
fn random_clifford_images_are_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=3 {
        for p in [PauliOp::single(n, 0, Letter::Z), PauliOp::single(n, n - 1, Letter::Y)] {
            let bins = (1usize << (2 * n)) - 1;
            let mut counts = vec![0u64; bins];
            for _ in 0..300 * bins {
                let img = CliffordOp::random(n, &mut rng).conjugate(&p).unwrap();
                counts[pauli_index(&img) - 1] += 1;
            }
            let pv = chi_square_p(&counts);
            assert!(pv > 1e-3, "n = {n}, P = {p}: p = {pv}");
        }
    }
}

// ---- channels ----

proptest! {
    #![proptest_config(cfg(96))]

    #[test]
    fn fidelities_match_the_expansion(n in 1..=5usize, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = random_channel(n, &mut rng);
        let q = full_distribution(&ch);
        prop_assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for _ in 0..16 {
            let p = PauliOp::random(n, false, &mut rng);
            let want: f64 = q
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(code, &v)| if pauli_from_index(n, code).commutes(&p).unwrap() { v } else { -v })
                .sum();
            prop_assert!((ch.pauli_fidelity(&p).unwrap() - want).abs() < 1e-12);
        }
    }

    #[test]
    fn distances_match_brute_force(n in 1..=4usize, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = random_channel(n, &mut rng);
        let q = full_distribution(&ch);
        let p: f64 = q[1..].iter().sum();
        if p < 1e-14 {
            prop_assert!(ch.distance_v().is_err());
            return Ok(());
        }
        let uniform = 1.0 / (q.len() - 1) as f64;
        let l2: f64 = q[1..].iter().map(|v| (v / p - uniform).powi(2)).sum::<f64>().sqrt();
        let l1: f64 = q[1..].iter().map(|v| (v / p - uniform).abs()).sum();
        prop_assert!((ch.distance_v().unwrap() - l2).abs() < 1e-9);
        prop_assert!((ch.diamond_distance_normalized().unwrap() - l1).abs() < 1e-9);
    }

    #[test]
    fn moments_match_kraus_definitions(n in 1..=3usize, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = random_channel(n, &mut rng);
        let kraus: Vec<M> = full_distribution(&ch)
            .iter()
            .enumerate()
            .filter(|(_, &v)| v > 0.0)
            .map(|(code, &v)| pauli_matrix(&pauli_from_index(n, code)) * c(v.sqrt(), 0.0))
            .collect();
        let d2 = 4f64.powi(n as i32);
        let s_sum: f64 = kraus.iter().map(|k| k.trace().norm_sqr()).sum();
        let mut u_sum = 0.0;
        for a in &kraus {
            for b in &kraus {
                u_sum += (a.adjoint() * b).trace().norm_sqr();
            }
        }
        prop_assert!((ch.avg_noise_strength() - (s_sum - 1.0) / (d2 - 1.0)).abs() < 1e-10);
        prop_assert!((ch.unitarity().unwrap() - (u_sum - 1.0) / (d2 - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn moments_are_at_most_one(n in 1..=6usize, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = random_channel(n, &mut rng);
        let s = ch.avg_noise_strength();
        let u = ch.unitarity().unwrap();
        prop_assert!(s <= 1.0 + 1e-12 && u <= 1.0 + 1e-12);
        let clean = ch.p_err() == 0.0;
        prop_assert_eq!(clean, s >= 1.0 - 1e-12 && u >= 1.0 - 1e-12, "p_err {} s {} u {}", ch.p_err(), s, u);
    }

    #[test]
    fn white_noise_is_at_distance_zero(n in 1..=12usize, p in 1e-6..=1.0f64) {
        prop_assert_eq!(make_white_noise(n, p).unwrap().distance_v().unwrap(), 0.0);
    }
}

// ---- twirls ----

proptest! {
    #![proptest_config(cfg(96))]

    #[test]
    fn twirls_preserve_error_mass_and_scramble(n in 1..=5usize, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ch = random_point_channel(n, &mut rng);
        let spec = random_spec(n, &mut rng);
        let tw = twirl_channel(&ch, &spec).unwrap();
        prop_assert!((tw.p_err() - ch.p_err()).abs() < 1e-12);
        prop_assert!((tw.identity_prob() - ch.identity_prob()).abs() < 1e-12);
        if ch.p_err() > 1e-12 {
            prop_assert!(tw.distance_v().unwrap() <= ch.distance_v().unwrap() + 1e-12);
        }
        // the k-sparse sampler targets noise on the rotated qubit
        let [px, py, pz] = [0, 1, 2].map(|_| rng.random_range(0.0..0.3));
        let local = make_single_qubit_pauli_noise(n, 0, px, py, pz).unwrap();
        let k = rng.random_range(1..=n);
        let sparse = twirl_channel_ksparse(&local, &SymmetrySpec::rz_first_qubit(n).unwrap(), k).unwrap();
        prop_assert!((sparse.p_err() - local.p_err()).abs() < 1e-12);
        prop_assert!((sparse.identity_prob() - local.identity_prob()).abs() < 1e-12);
    }

    #[test]
    fn wider_sparse_twirls_scramble_more(n in 2..=6usize, px in 0.0..0.3f64, py in 0.0..0.3f64) {
        prop_assume!(px + py > 1e-6);
        let ch = make_single_qubit_pauli_noise(n, 0, px, py, 0.0).unwrap();
        let spec = SymmetrySpec::rz_first_qubit(n).unwrap();
        let v: Vec<f64> = (1..=n)
            .map(|k| twirl_channel_ksparse(&ch, &spec, k).unwrap().distance_v().unwrap())
            .collect();
        for w in v.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "{:?}", v);
        }
    }

    #[test]
    fn symmetric_paulis_are_fixed(n in 1..=4usize, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = random_spec(n, &mut rng);
        let mut p = PauliOp::identity(n);
        for g in spec.subgroup_generators() {
            if rng.random_bool(0.5) {
                p = p.mul(&g).unwrap();
            }
        }
        prop_assume!(!p.has_identity_bits());
        let p = p.unsigned();
        let tw = twirl_channel(&unit_point_channel(&p).unwrap(), &spec).unwrap();
        let mut got: Vec<(PauliOp, f64)> = tw.expand().unwrap().into_iter().filter(|(_, v)| *v != 0.0).collect();
        prop_assert_eq!(got.len(), 1);
        let (q, v) = got.pop().unwrap();
        prop_assert_eq!(q, p);
        prop_assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gadgets_fix_z_on_the_rotated_qubit(n in 1..=8usize, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let z0 = PauliOp::single(n, 0, Letter::Z);
        for _ in 0..100 {
            let k = rng.random_range(1..=n);
            for draw in [draw_full_twirl(n, &mut rng), draw_ksparse_twirl(n, k, &mut rng)] {
                prop_assert_eq!(draw.to_gadget().gate.conjugate(&z0).unwrap(), z0.clone());
            }
        }
    }
}

// ---- circuits ----

const MODES: [TwirlMode; 5] = [
    TwirlMode::None,
    TwirlMode::AnalyticFull,
    TwirlMode::AnalyticKsparse(1),
    TwirlMode::Full,
    TwirlMode::Ksparse(1),
];

fn random_noise(n: usize, rng: &mut ChaCha8Rng) -> Arc<LayerNoise> {
    let mode = match MODES[rng.random_range(0..MODES.len())] {
        TwirlMode::AnalyticKsparse(_) => TwirlMode::AnalyticKsparse(rng.random_range(1..=n)),
        TwirlMode::Ksparse(_) => TwirlMode::Ksparse(rng.random_range(1..=n)),
        m => m,
    };
    let [px, py, pz]: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..0.05));
    Arc::new(LayerNoise::uniform(n, px, py, pz, mode, 0.0).unwrap())
}

fn random_layers(n: usize, len: usize, rng: &mut ChaCha8Rng, noise: &mut dyn FnMut(&mut ChaCha8Rng) -> Arc<LayerNoise>) -> Vec<Layer> {
    (0..len)
        .map(|_| {
            if rng.random_bool(0.3) {
                Layer::Clifford(CliffordLayer::new(CliffordOp::random(n, rng)))
            } else {
                let axis = PauliOp::random(n, true, rng);
                let angle = FRAC_PI_4 * rng.random_range(1..8) as f64;
                Layer::Rotation(RotationLayer::new(axis, angle, noise(rng)).unwrap())
            }
        })
        .collect()
}

/// Ideal Heisenberg image of `p` through `layers`, letters only.
fn back_propagate(n: usize, layers: &[Layer], p: &PauliOp) -> PauliOp {
    let mut o = p.unsigned();
    for layer in layers.iter().rev() {
        o = match layer {
            Layer::Clifford(cl) => cl.op().inverse().conjugate(&o).unwrap().unsigned(),
            Layer::Rotation(r) => {
                let (s, co) = r.angle().sin_cos();
                let u = M::identity(1 << n, 1 << n) * c(co, 0.0) + dense_pauli(r.axis()) * c(0.0, s);
                identify_pauli(n, &(u.adjoint() * dense_pauli(&o) * u))
            }
        };
    }
    o
}

/// Mean of `|R |f(P)| - 1|` over every non-identity Pauli.
fn exhaustive_bias(c: &LogicalCircuit) -> f64 {
    let n = c.num_qubits();
    let r = optimal_rescale_coefficient(c).unwrap();
    let total = (1usize << (2 * n)) - 1;
    (1..=total)
        .map(|code| (r * effective_fidelity_exact(c, &pauli_from_index(n, code)).unwrap().abs() - 1.0).abs())
        .sum::<f64>()
        / total as f64
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn fidelity_is_multiplicative_over_segments(n in 1..=4usize, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let first = random_layers(n, rng.random_range(0..6), &mut rng, &mut |r| random_noise(n, r));
        let second = random_layers(n, rng.random_range(0..6), &mut rng, &mut |r| random_noise(n, r));
        let p = PauliOp::random(n, true, &mut rng);
        let whole = LogicalCircuit::new(n, [first.clone(), second.clone()].concat()).unwrap();
        let f2 = effective_fidelity_exact(&LogicalCircuit::new(n, second.clone()).unwrap(), &p).unwrap();
        let moved = back_propagate(n, &second, &p);
        let f1 = effective_fidelity_exact(&LogicalCircuit::new(n, first).unwrap(), &moved).unwrap();
        prop_assert!((effective_fidelity_exact(&whole, &p).unwrap() - f1 * f2).abs() < 1e-12);
    }

    #[test]
    fn clifford_frames_do_not_change_the_bias(n in 1..=3usize, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = random_layers(n, rng.random_range(1..8), &mut rng, &mut |r| random_noise(n, r));
        let cl = CliffordOp::random(n, &mut rng);
        let pair = [Layer::Clifford(CliffordLayer::new(cl.clone())), Layer::Clifford(CliffordLayer::new(cl.inverse()))];
        let at = rng.random_range(0..=layers.len());
        let base = LogicalCircuit::new(n, layers.clone()).unwrap();
        let framed = LogicalCircuit::new(n, [&layers[..at], &pair[..], &layers[at..]].concat()).unwrap();
        let seed2 = rng.random();
        prop_assert_eq!(
            average_bias(&base, 64, GadgetAveraging::Exact, seed2).unwrap(),
            average_bias(&framed, 64, GadgetAveraging::Exact, seed2).unwrap()
        );
        // a noiseless tail wrapped in C ... C† only relabels the observables
        let quiet = Arc::new(LayerNoise::noiseless(n));
        let tail = random_layers(n, rng.random_range(0..4), &mut rng, &mut |_| quiet.clone());
        let wrapped = [&layers[..], &pair[..1], &tail[..], &pair[1..]].concat();
        let a = exhaustive_bias(&LogicalCircuit::new(n, [&layers[..], &tail[..]].concat()).unwrap());
        let b = exhaustive_bias(&LogicalCircuit::new(n, wrapped).unwrap());
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((a - exhaustive_bias(&base)).abs() < 1e-12);
    }

    #[test]
    fn full_twirl_never_increases_bias(n in 2..=4usize, seed in any::<u64>(), px in 0.0..1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let quiet = Arc::new(LayerNoise::noiseless(n));
        let ideal = if rng.random_bool(0.5) {
            build_trotter_circuit(&HamiltonianModel::heisenberg_chain(n), rng.random_range(1..4), 0.1, true).unwrap()
        } else {
            LogicalCircuit::new(n, random_layers(n, rng.random_range(1..10), &mut rng, &mut |_| quiet.clone())).unwrap()
        };
        prop_assume!(ideal.num_rotations() > 0);
        let p_tot = rng.random_range(0.05..1.0);
        let ratio = (px, 1.0 - px, 0.0);
        let none = ideal.with_total_error(p_tot, ratio, TwirlMode::None, 0.0).unwrap();
        let full = ideal.with_total_error(p_tot, ratio, TwirlMode::AnalyticFull, 0.0).unwrap();
        let (b_none, b_full) = (exhaustive_bias(&none), exhaustive_bias(&full));
        prop_assert!(b_full <= b_none + 1e-12, "full {} none {}", b_full, b_none);
    }
}

proptest! {
    #![proptest_config(cfg(12))]

    #[test]
    fn sampled_full_twirl_converges_to_analytic(n in 2..=4usize, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let [px, py, pz]: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..0.05));
        let sampled = Arc::new(LayerNoise::uniform(n, px, py, pz, TwirlMode::Full, 0.0).unwrap());
        let layers = random_layers(n, rng.random_range(2..7), &mut rng, &mut |_| sampled.clone());
        let c_sampled = LogicalCircuit::new(n, layers).unwrap();
        let analytic = Arc::new(LayerNoise::uniform(n, px, py, pz, TwirlMode::AnalyticFull, 0.0).unwrap());
        let c_analytic = c_sampled.with_noise(analytic).unwrap();
        for _ in 0..4 {
            let p = PauliOp::random(n, true, &mut rng);
            let (mean, se) = effective_fidelity(&c_sampled, &p, 2000, &mut rng).unwrap();
            let exact = effective_fidelity_exact(&c_analytic, &p).unwrap();
            prop_assert!((mean - exact).abs() <= 3.0 * se + 1e-12, "{} vs {} (se {})", mean, exact, se);
        }
    }
}

proptest! {
    #![proptest_config(cfg(256))]

    #[test]
    fn rescaling_overhead_is_monotone(p in 1e-6..0.1f64, l in 1..500usize, n in 1..40usize) {
        let r = overhead_rescaling(p, l, n).unwrap();
        prop_assert!(overhead_rescaling(p, l + 1, n).unwrap() > r);
        prop_assert!(overhead_rescaling(p * 1.5, l, n).unwrap() > r);
        prop_assert!((overhead_rescaling(1e-13, l, n).unwrap() - 1.0).abs() < 1e-8);
    }
}

// ---- dense oracle ----

proptest! {
    #![proptest_config(cfg(48))]

    #[test]
    fn dense_states_stay_valid(n in 1..=4usize, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rho = DensityMatrix::haar_random_pure(n, &mut rng).unwrap();
        prop_assert!(rho.validate().is_ok());
        for _ in 0..8 {
            rho = match rng.random_range(0..4) {
                0 => rho.apply_rotation(&PauliOp::random(n, true, &mut rng), rng.random_range(-3.2..3.2)).unwrap(),
                1 => rho.apply_channel(&random_channel(n, &mut rng)).unwrap(),
                2 => rho.apply_clifford(&CliffordOp::random(n, &mut rng)).unwrap(),
                _ => rho.apply_unitary(&haar_unitary(n, &mut rng).unwrap()).unwrap(),
            };
            prop_assert!(rho.validate().is_ok());
        }
    }

    #[test]
    fn white_noise_commutes_with_unitaries(n in 1..=4usize, seed in any::<u64>(), p in 0.0..=1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = DensityMatrix::haar_random_pure(n, &mut rng).unwrap();
        let u = haar_unitary(n, &mut rng).unwrap();
        let wn = make_white_noise(n, p).unwrap();
        let a = rho.apply_channel(&wn).unwrap().apply_unitary(&u).unwrap();
        let b = rho.apply_unitary(&u).unwrap().apply_channel(&wn).unwrap();
        prop_assert!(max_diff(a.matrix(), b.matrix()) < 1e-12);
    }
}

#[test]
fn generators_cover_every_factor_kind() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut kinds: HashMap<String, usize> = HashMap::new();
    for _ in 0..200 {
        for f in random_ensemble(4, &mut rng).factors() {
            let name = format!("{:?}", f.kind());
            *kinds.entry(name.split([' ', '(', '{']).next().unwrap().to_string()).or_default() += 1;
        }
    }
    assert_eq!(kinds.len(), 6, "{kinds:?}");
}
