//! JSON shape of channels and ensembles.

use serde::{Deserialize, Serialize};

use super::{Atom, Factor, FactorKind, Frame, PauliChannel, PauliEnsemble};
use crate::clifford::GateSpec;
use crate::pauli::PauliOp;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct ChannelRepr {
    n: usize,
    #[serde(default)]
    identity_prob: Option<f64>,
    atoms: Vec<AtomRepr>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomRepr {
    prob: f64,
    ensemble: EnsembleRepr,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleRepr {
    factors: Vec<FactorRepr>,
    #[serde(default)]
    frame: Option<Vec<GateSpec>>,
}

/// Paulis inside factors are written over the register only, letter `j` on `register[j]`.
#[derive(Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
enum FactorRepr {
    Point {
        register: Vec<usize>,
        pauli: PauliOp,
    },
    FullGroup {
        register: Vec<usize>,
    },
    FullGroupMinusIdentity {
        register: Vec<usize>,
    },
    DiagonalIZ {
        register: Vec<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shift: Option<PauliOp>,
    },
    XYSet {
        register: Vec<usize>,
    },
    WeightAtMost {
        register: Vec<usize>,
        max_weight: usize,
    },
}

fn local(p: &PauliOp, register: &[usize]) -> PauliOp {
    PauliOp::from_letters(&register.iter().map(|&q| p.letter(q)).collect::<Vec<_>>())
}

fn embed(n: usize, register: &[usize], local: &PauliOp) -> Result<PauliOp, String> {
    if local.num_qubits() != register.len() {
        return Err(format!(
            "Pauli {local} has {} letters but the register has {}",
            local.num_qubits(),
            register.len()
        ));
    }
    let mut p = PauliOp::identity(n);
    for (j, &q) in register.iter().enumerate() {
        if q >= n {
            return Err(format!("qubit {q} out of range for {n} qubits"));
        }
        p.set_letter(q, local.letter(j));
    }
    Ok(p)
}

impl From<&Factor> for FactorRepr {
    fn from(f: &Factor) -> FactorRepr {
        let register = f.register().to_vec();
        match f.kind() {
            FactorKind::Point(p) => FactorRepr::Point {
                pauli: local(p, &register),
                register,
            },
            FactorKind::FullGroup => FactorRepr::FullGroup { register },
            FactorKind::FullGroupMinusIdentity => FactorRepr::FullGroupMinusIdentity { register },
            FactorKind::DiagonalIZ { shift } => FactorRepr::DiagonalIZ {
                shift: (!shift.has_identity_bits()).then(|| local(shift, &register)),
                register,
            },
            FactorKind::XYSet => FactorRepr::XYSet { register },
            FactorKind::WeightAtMost { max_weight } => FactorRepr::WeightAtMost {
                register,
                max_weight: *max_weight,
            },
        }
    }
}

impl FactorRepr {
    fn build(self, n: usize) -> Result<Factor, String> {
        let r = match self {
            FactorRepr::Point { register, pauli } => {
                let p = embed(n, &register, &pauli)?;
                Factor::point_embedded(register, &p)
            }
            FactorRepr::FullGroup { register } => Factor::full_group(n, register),
            FactorRepr::FullGroupMinusIdentity { register } => {
                Factor::full_group_minus_identity(n, register)
            }
            FactorRepr::DiagonalIZ { register, shift } => match shift {
                Some(s) => {
                    let p = embed(n, &register, &s)?;
                    Factor::diagonal_iz_shifted(register, &p)
                }
                None => Factor::diagonal_iz(n, register),
            },
            FactorRepr::XYSet { register } => {
                if register.len() != 1 {
                    return Err("XYSet register must hold exactly one qubit".into());
                }
                Factor::xy_set(n, register[0])
            }
            FactorRepr::WeightAtMost {
                register,
                max_weight,
            } => Factor::weight_at_most(n, register, max_weight),
        };
        r.map_err(|e| e.to_string())
    }
}

impl From<&PauliEnsemble> for EnsembleRepr {
    fn from(e: &PauliEnsemble) -> EnsembleRepr {
        EnsembleRepr {
            factors: e.factors().iter().map(FactorRepr::from).collect(),
            frame: e.frame().map(|f| f.gates().to_vec()),
        }
    }
}

impl EnsembleRepr {
    fn build(self, n: usize) -> Result<PauliEnsemble, String> {
        let factors = self
            .factors
            .into_iter()
            .map(|f| f.build(n))
            .collect::<Result<Vec<_>, _>>()?;
        let frame = match self.frame {
            Some(g) => Some(Frame::from_gates(n, g).map_err(|e| e.to_string())?),
            None => None,
        };
        PauliEnsemble::new(n, factors, frame).map_err(|e| e.to_string())
    }
}

impl From<PauliChannel> for ChannelRepr {
    fn from(ch: PauliChannel) -> ChannelRepr {
        ChannelRepr {
            n: ch.n,
            identity_prob: Some(ch.identity_prob()),
            atoms: ch
                .atoms
                .iter()
                .map(|a| AtomRepr {
                    prob: a.prob,
                    ensemble: EnsembleRepr::from(&a.ensemble),
                })
                .collect(),
        }
    }
}

impl TryFrom<ChannelRepr> for PauliChannel {
    type Error = String;
    fn try_from(r: ChannelRepr) -> Result<PauliChannel, String> {
        let n = r.n;
        let atoms = r
            .atoms
            .into_iter()
            .map(|a| {
                Ok(Atom {
                    prob: a.prob,
                    ensemble: a.ensemble.build(n)?,
                })
            })
            .collect::<Result<Vec<_>, String>>()?;
        let ch = PauliChannel::new(n, atoms).map_err(|e| e.to_string())?;
        if let Some(ip) = r.identity_prob {
            if (ip - ch.identity_prob()).abs() > 1e-9 {
                return Err(format!(
                    "identity_prob {ip} disagrees with 1 - Σ atom probabilities = {}",
                    ch.identity_prob()
                ));
            }
        }
        Ok(ch)
    }
}
