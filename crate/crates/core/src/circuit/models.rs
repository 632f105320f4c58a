//! Hamiltonian models and first-order Trotter circuits.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Layer, LayerNoise, LogicalCircuit, RotationLayer};
use crate::error::{Result, TwirlError};
use crate::pauli::{Letter, PauliOp};
use crate::twirl::frame_gates_for_axis;

/// Open-boundary lattice models. Qubits of 2D lattices are numbered row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", deny_unknown_fields)]
pub enum HamiltonianModel {
    Heisenberg1D {
        l: usize,
        #[serde(default = "one")]
        j: f64,
        #[serde(default)]
        order: TermOrder,
    },
    Heisenberg2D {
        lx: usize,
        ly: usize,
        #[serde(default = "one")]
        j: f64,
        #[serde(default)]
        order: TermOrder,
    },
    #[serde(rename = "TFIM2D")]
    Tfim2D {
        lx: usize,
        ly: usize,
        #[serde(default = "one")]
        j: f64,
        h: f64,
    },
    FermiHubbard2D {
        lx: usize,
        ly: usize,
        t: f64,
        u_int: f64,
    },
}

fn one() -> f64 {
    1.0
}

/// Order of the Heisenberg terms within one Trotter step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermOrder {
    /// XX, YY, ZZ on one bond before moving to the next bond.
    #[default]
    ByBond,
    /// Every XX bond, then every YY bond, then every ZZ bond.
    ByLetter,
}

fn heisenberg_terms(n: usize, bonds: &[(usize, usize)], j: f64, order: TermOrder, out: &mut Vec<HamiltonianTerm>) {
    let letters = [Letter::X, Letter::Y, Letter::Z];
    let pairs: Vec<(Letter, (usize, usize))> = match order {
        TermOrder::ByBond => bonds.iter().flat_map(|&b| letters.map(|l| (l, b))).collect(),
        TermOrder::ByLetter => letters.iter().flat_map(|&l| bonds.iter().map(move |&b| (l, b))).collect(),
    };
    for (l, (a, b)) in pairs {
        out.push(HamiltonianTerm {
            pauli: two_site(n, a, b, l),
            coeff: j,
        });
    }
}

/// One Pauli term `coeff * P` of a Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianTerm {
    pub pauli: PauliOp,
    pub coeff: f64,
}

fn grid_bonds(lx: usize, ly: usize) -> Vec<(usize, usize)> {
    let mut b = Vec::new();
    for y in 0..ly {
        for x in 0..lx {
            let q = y * lx + x;
            if x + 1 < lx {
                b.push((q, q + 1));
            }
            if y + 1 < ly {
                b.push((q, q + lx));
            }
        }
    }
    b
}

fn two_site(n: usize, a: usize, b: usize, l: Letter) -> PauliOp {
    let mut p = PauliOp::identity(n);
    p.set_letter(a, l);
    p.set_letter(b, l);
    p
}

/// Jordan-Wigner string `L_a Z ... Z L_b` for `a < b`.
fn jw_string(n: usize, a: usize, b: usize, l: Letter) -> PauliOp {
    let (a, b) = (a.min(b), a.max(b));
    let mut p = PauliOp::identity(n);
    p.set_letter(a, l);
    for q in a + 1..b {
        p.set_letter(q, Letter::Z);
    }
    p.set_letter(b, l);
    p
}

impl HamiltonianModel {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            HamiltonianModel::Heisenberg1D { l, .. } => *l >= 2,
            HamiltonianModel::Heisenberg2D { lx, ly, .. }
            | HamiltonianModel::Tfim2D { lx, ly, .. }
            | HamiltonianModel::FermiHubbard2D { lx, ly, .. } => *lx >= 1 && *ly >= 1 && lx * ly >= 2,
        };
        if ok {
            Ok(())
        } else {
            Err(TwirlError::validation(format!("lattice too small: {self:?}")))
        }
    }

    pub fn num_qubits(&self) -> usize {
        match self {
            HamiltonianModel::Heisenberg1D { l, .. } => *l,
            HamiltonianModel::Heisenberg2D { lx, ly, .. } | HamiltonianModel::Tfim2D { lx, ly, .. } => lx * ly,
            HamiltonianModel::FermiHubbard2D { lx, ly, .. } => 2 * lx * ly,
        }
    }

    pub fn heisenberg_chain(l: usize) -> HamiltonianModel {
        HamiltonianModel::Heisenberg1D {
            l,
            j: 1.0,
            order: TermOrder::ByBond,
        }
    }

    /// Square 2D Heisenberg model with `side * side` qubits.
    pub fn heisenberg_square(side: usize) -> HamiltonianModel {
        HamiltonianModel::Heisenberg2D {
            lx: side,
            ly: side,
            j: 1.0,
            order: TermOrder::ByBond,
        }
    }

    /// Terms in Trotter order. Heisenberg: see [`TermOrder`].
    /// TFIM: ZZ bonds, then X fields. Fermi-Hubbard: XZ..ZX hops, YZ..ZY hops,
    /// ZZ interactions, then Z singles.
    pub fn terms(&self) -> Result<Vec<HamiltonianTerm>> {
        self.validate()?;
        let n = self.num_qubits();
        let mut out = Vec::new();
        match self {
            HamiltonianModel::Heisenberg1D { l, j, order } => {
                let bonds: Vec<_> = (0..l - 1).map(|i| (i, i + 1)).collect();
                heisenberg_terms(n, &bonds, *j, *order, &mut out);
            }
            HamiltonianModel::Heisenberg2D { lx, ly, j, order } => {
                heisenberg_terms(n, &grid_bonds(*lx, *ly), *j, *order, &mut out);
            }
            HamiltonianModel::Tfim2D { lx, ly, j, h } => {
                for (a, b) in grid_bonds(*lx, *ly) {
                    out.push(HamiltonianTerm {
                        pauli: two_site(n, a, b, Letter::Z),
                        coeff: *j,
                    });
                }
                for q in 0..n {
                    out.push(HamiltonianTerm {
                        pauli: PauliOp::single(n, q, Letter::X),
                        coeff: *h,
                    });
                }
            }
            HamiltonianModel::FermiHubbard2D { lx, ly, t, u_int } => {
                let sites = lx * ly;
                // Snake order keeps horizontal neighbours adjacent in the fermion ordering.
                let snake = |x: usize, y: usize| {
                    if y.is_multiple_of(2) {
                        y * lx + x
                    } else {
                        y * lx + (lx - 1 - x)
                    }
                };
                let mut hops = Vec::new();
                for spin in 0..2 {
                    for (a, b) in grid_bonds(*lx, *ly) {
                        let (ax, ay) = (a % lx, a / lx);
                        let (bx, by) = (b % lx, b / lx);
                        hops.push((spin * sites + snake(ax, ay), spin * sites + snake(bx, by)));
                    }
                }
                for letter in [Letter::X, Letter::Y] {
                    for &(a, b) in &hops {
                        out.push(HamiltonianTerm {
                            pauli: jw_string(n, a, b, letter),
                            coeff: -t / 2.0,
                        });
                    }
                }
                for s in 0..sites {
                    out.push(HamiltonianTerm {
                        pauli: two_site(n, s, s + sites, Letter::Z),
                        coeff: u_int / 4.0,
                    });
                }
                for q in 0..n {
                    out.push(HamiltonianTerm {
                        pauli: PauliOp::single(n, q, Letter::Z),
                        coeff: -u_int / 4.0,
                    });
                }
            }
        }
        Ok(out)
    }
}

/// One rotation layer per term per step; every angle is π/4 when `clifford_sim`.
pub fn build_trotter_circuit(
    model: &HamiltonianModel,
    steps: usize,
    dt: f64,
    clifford_sim: bool,
) -> Result<LogicalCircuit> {
    if steps == 0 {
        return Err(TwirlError::validation("need at least one Trotter step"));
    }
    let n = model.num_qubits();
    let terms = model.terms()?;
    let noise = Arc::new(LayerNoise::noiseless(n));
    let mut frames: HashMap<PauliOp, Arc<[crate::GateSpec]>> = HashMap::new();
    let mut layers = Vec::with_capacity(terms.len() * steps);
    for _ in 0..steps {
        for term in &terms {
            let frame = match frames.get(&term.pauli) {
                Some(f) => f.clone(),
                None => {
                    let f: Arc<[crate::GateSpec]> = frame_gates_for_axis(&term.pauli)?.into();
                    frames.insert(term.pauli.clone(), f.clone());
                    f
                }
            };
            let angle = if clifford_sim { FRAC_PI_4 } else { term.coeff * dt };
            layers.push(Layer::Rotation(RotationLayer::with_frame(
                term.pauli.clone(),
                angle,
                frame,
                noise.clone(),
            )));
        }
    }
    LogicalCircuit::new(n, layers)
}
