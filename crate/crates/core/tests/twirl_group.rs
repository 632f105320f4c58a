//! Brute-force check of the exact twirled channels: enumerate every symplectic map that
//! fixes the generators of the symmetry subgroup and average the image of each Pauli.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use twirlkit::twirl::{twirl_channel, unit_point_channel, Preset, SymmetrySpec};
use twirlkit::{GateSpec, Letter, PauliOp};

/// Paulis as `x | z << n` bit-vectors.
fn symp(a: u32, b: u32, n: usize) -> u32 {
    let mask = (1u32 << n) - 1;
    let (ax, az) = (a & mask, a >> n);
    let (bx, bz) = (b & mask, b >> n);
    ((ax & bz).count_ones() + (az & bx).count_ones()) & 1
}

fn to_bits(p: &PauliOp) -> u32 {
    let n = p.num_qubits();
    let mut v = 0;
    for q in 0..n {
        let (x, z) = p.letter(q).bits();
        v |= (x as u32) << q | (z as u32) << (n + q);
    }
    v
}

fn from_bits(v: u32, n: usize) -> PauliOp {
    let mut p = PauliOp::identity(n);
    for q in 0..n {
        p.set_letter(q, Letter::from_bits(v >> q & 1 == 1, v >> (n + q) & 1 == 1));
    }
    p
}

/// Basis vector `k`: X_q for `k = 2q`, Z_q for `k = 2q + 1`.
fn basis(k: usize, n: usize) -> u32 {
    if k.is_multiple_of(2) {
        1 << (k / 2)
    } else {
        1 << (n + k / 2)
    }
}

fn image(images: &[u32], v: u32, n: usize) -> u32 {
    (0..2 * n).filter(|&k| v & basis(k, n) != 0).fold(0, |acc, k| acc ^ images[k])
}

/// Calls `visit` once per symplectic map fixing every vector in `fixed`.
fn enumerate(n: usize, fixed: &[u32], visit: &mut dyn FnMut(&[u32])) {
    fn rec(n: usize, k: usize, images: &mut Vec<u32>, fixed: &[(u32, usize)], visit: &mut dyn FnMut(&[u32])) {
        if k == 2 * n {
            visit(images);
            return;
        }
        for cand in 1..(1u32 << (2 * n)) {
            // <image(e_a), image(e_b)> must equal <e_a, e_b>
            if (0..k).any(|j| symp(images[j], cand, n) != symp(basis(j, n), basis(k, n), n)) {
                continue;
            }
            images.push(cand);
            let ok = fixed
                .iter()
                .filter(|&&(_, last)| last == k)
                .all(|&(g, _)| image(images, g, n) == g);
            if ok {
                rec(n, k + 1, images, fixed, visit);
            }
            images.pop();
        }
    }
    let fixed: Vec<(u32, usize)> = fixed
        .iter()
        .map(|&g| (g, (0..2 * n).filter(|&k| g & basis(k, n) != 0).max().unwrap()))
        .collect();
    rec(n, 0, &mut Vec::new(), &fixed, visit);
}

fn check(spec: &SymmetrySpec, expected_order: u64) {
    let n = spec.num_qubits();
    let fixed: Vec<u32> = spec.subgroup_generators().iter().map(to_bits).collect();
    let dim = 1u32 << (2 * n);
    let mut counts = vec![vec![0u64; dim as usize]; dim as usize];
    let mut order = 0u64;
    enumerate(n, &fixed, &mut |images| {
        order += 1;
        for p in 1..dim {
            counts[p as usize][image(images, p, n) as usize] += 1;
        }
    });
    assert_eq!(order, expected_order);
    for p in 1..dim {
        let op = from_bits(p, n);
        let tw = twirl_channel(&unit_point_channel(&op).unwrap(), spec).unwrap();
        let mut got: HashMap<PauliOp, BigRational> = tw.expand_exact().unwrap();
        got.retain(|_, v| *v != BigRational::from_integer(BigInt::from(0)));
        let mut want: HashMap<PauliOp, BigRational> = HashMap::new();
        for (q, &c) in counts[p as usize].iter().enumerate() {
            if c > 0 {
                want.insert(from_bits(q as u32, n), BigRational::new(BigInt::from(c), BigInt::from(order)));
            }
        }
        assert_eq!(got, want, "twirl of {op}");
    }
}

// Group orders follow from Witt's theorem: |Sp(6,2)| = 1451520, and each fixed
// vector divides by the size of its orbit under the previous stabilizer.

#[test]
fn rz_on_three_qubits() {
    check(&SymmetrySpec::rz_first_qubit(3).unwrap(), 1_451_520 / 63);
}

#[test]
fn two_z_symmetries_with_one_free_qubit() {
    let spec = SymmetrySpec::new(3, 0, 2, 1, vec![], Preset::Custom).unwrap();
    check(&spec, 1_451_520 / 63 / 30);
}

#[test]
fn toffoli_on_three_qubits() {
    check(&SymmetrySpec::toffoli(3).unwrap(), 1_451_520 / 63 / 30 / 12);
}

#[test]
fn zz_rotation_frame() {
    let spec = SymmetrySpec::pauli_rotation(&PauliOp::parse("ZZ").unwrap()).unwrap();
    // |Sp(4,2)| = 720, one fixed vector
    check(&spec, 720 / 15);
}

#[test]
fn full_symplectic_register() {
    let spec = SymmetrySpec::new(2, 1, 0, 1, vec![GateSpec::H(1)], Preset::Custom).unwrap();
    // fixing X_0 and Z_0 leaves Sp(2,2) on the other qubit
    check(&spec, 6);
}
