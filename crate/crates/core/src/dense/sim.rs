//! Circuit-level dense simulation: noisy/ideal state pairs, dense effective
//! fidelities, the white-noise-approximation experiments.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_cap, mean_stderr, pauli_from_index, trace_distance, tv_distance, BasisEnsemble, DensityMatrix, PauliVector};
use crate::channel::{make_single_qubit_pauli_noise, PauliChannel};
use crate::circuit::{
    build_trotter_circuit, corollary_bound, optimal_rescale_coefficient, stream_rng, whitenoise_bias_bound,
    HamiltonianModel, Layer, LayerNoise, LogicalCircuit, RotationLayer, TwirlMode,
};
use crate::clifford::CliffordOp;
use crate::error::{check_dim, Result, TwirlError};
use crate::pauli::{Letter, PauliOp};
use crate::twirl::GadgetDraw;

fn symplectic(a: usize, b: usize, n: usize) -> bool {
    let mask = (1usize << n) - 1;
    (((a & mask) & (b >> n)) ^ ((a >> n) & (b & mask))).count_ones() % 2 == 1
}

/// `λ(P)` for every coefficient index, summed from the channel's explicit expansion.
fn expanded_fidelity_table(ch: &PauliChannel) -> Result<Vec<f64>> {
    let n = ch.num_qubits();
    let terms: Vec<(usize, f64)> = ch
        .expand()?
        .into_iter()
        .map(|(e, q)| (super::pauli_index(&e), q))
        .collect();
    Ok((0..1usize << (2 * n))
        .map(|code| {
            terms
                .iter()
                .map(|&(e, q)| if symplectic(code, e, n) { -q } else { q })
                .sum()
        })
        .collect())
}

/// Expanded tables are only built while the expansion stays small.
const EXPANDED_TABLE_CAP: usize = 6;

/// Expanded fidelity tables keyed by layer-noise identity.
#[derive(Default)]
struct TableCache(HashMap<*const LayerNoise, Arc<Vec<f64>>>);

impl TableCache {
    fn get(&mut self, noise: &Arc<LayerNoise>, ch: &PauliChannel) -> Result<Arc<Vec<f64>>> {
        let key = Arc::as_ptr(noise);
        if let Some(t) = self.0.get(&key) {
            return Ok(t.clone());
        }
        let t = Arc::new(expanded_fidelity_table(ch)?);
        self.0.insert(key, t.clone());
        Ok(t)
    }
}

/// Per-coefficient noise multipliers of one rotation layer.
enum LayerMultiplier<'a> {
    /// Untwirled noise only sees the frame letter on qubit 0, which is read off
    /// from commutation with `V† Z_0 V` and `V† X_0 V`.
    Local { a: usize, b: usize, lambda: [f64; 4] },
    /// Analytic twirl: expanded table indexed by the frame Pauli from the signed tableau.
    Table { frame: CliffordOp, lambda: Arc<Vec<f64>> },
    Average(&'a RotationLayer),
    Drawn(&'a RotationLayer, GadgetDraw),
}

impl LayerMultiplier<'_> {
    fn for_layer<'a, R: Rng + ?Sized>(
        r: &'a RotationLayer,
        rng: Option<&mut R>,
        cache: &mut TableCache,
    ) -> Result<LayerMultiplier<'a>> {
        let noise = r.noise();
        let n = noise.num_qubits();
        if noise.mode() == TwirlMode::None {
            let mut a = PauliOp::single(n, 0, Letter::Z);
            let mut b = PauliOp::single(n, 0, Letter::X);
            r.leave_frame(&mut a);
            r.leave_frame(&mut b);
            return Ok(LayerMultiplier::Local {
                a: super::pauli_index(&a),
                b: super::pauli_index(&b),
                lambda: noise.lambda0(),
            });
        }
        if !noise.mode().is_sampled() && n <= EXPANDED_TABLE_CAP {
            let ch = noise.twirled().expect("analytic modes carry a twirled channel");
            return Ok(LayerMultiplier::Table {
                frame: CliffordOp::from_gates(n, r.frame())?,
                lambda: cache.get(noise, ch)?,
            });
        }
        Ok(match rng.and_then(|g| noise.draw(g)) {
            Some(d) => LayerMultiplier::Drawn(r, d),
            None => LayerMultiplier::Average(r),
        })
    }

    fn apply(&self, v: &mut PauliVector) {
        let n = v.num_qubits();
        match self {
            LayerMultiplier::Local { a, b, lambda } => {
                v.scale_by(|code| lambda[Letter::from_bits(symplectic(code, *a, n), symplectic(code, *b, n)) as usize]);
            }
            LayerMultiplier::Table { frame, lambda } => v.scale_by(|code| {
                let o = frame.conjugate_unchecked(&pauli_from_index(n, code));
                lambda[super::pauli_index(&o)]
            }),
            LayerMultiplier::Average(r) => v.scale_by(|code| {
                let mut o = pauli_from_index(n, code);
                r.enter_frame(&mut o);
                r.noise().fidelity(&o)
            }),
            LayerMultiplier::Drawn(r, d) => v.scale_by(|code| {
                let mut o = pauli_from_index(n, code);
                r.enter_frame(&mut o);
                let mut scratch = PauliOp::identity(n);
                r.noise().drawn_fidelity(&o, d, &mut scratch)
            }),
        }
    }
}

/// Schrödinger-picture evolution of coefficients. `noise` is `None` for the ideal run;
/// `Some(None)` applies gadget-averaged layer channels; `Some(Some(rng))` draws gadgets.
fn evolve<R: Rng + ?Sized>(
    c: &LogicalCircuit,
    v: &mut PauliVector,
    noise: Option<Option<&mut R>>,
    cache: &mut TableCache,
) -> Result<()> {
    let mut rng = noise;
    for layer in c.layers() {
        match layer {
            Layer::Clifford(cl) => *v = v.apply_clifford(cl.op()),
            Layer::Rotation(r) => {
                v.apply_rotation(r.axis(), r.angle())?;
                if let Some(g) = rng.as_mut() {
                    if r.noise().is_noiseless() {
                        continue;
                    }
                    LayerMultiplier::for_layer(r, g.as_deref_mut(), cache)?.apply(v);
                }
            }
        }
    }
    Ok(())
}

/// Ideal and noisy output states. Sampled twirl modes average `shots` gadget sequences.
pub fn simulate_pair<R: Rng + ?Sized>(
    c: &LogicalCircuit,
    input: &DensityMatrix,
    shots: usize,
    rng: &mut R,
) -> Result<(DensityMatrix, DensityMatrix)> {
    check_dim(c.num_qubits(), input.num_qubits())?;
    check_cap(c.num_qubits())?;
    let start = PauliVector::from_density(input);
    let mut cache = TableCache::default();
    let mut ideal = start.clone();
    evolve::<R>(c, &mut ideal, None, &mut cache)?;
    let noisy = if c.has_sampled_layers() {
        if shots == 0 {
            return Err(TwirlError::validation("shots must be positive for sampled twirl modes"));
        }
        let mut acc = PauliVector::zeros(c.num_qubits())?;
        for _ in 0..shots {
            let mut v = start.clone();
            evolve(c, &mut v, Some(Some(&mut *rng)), &mut cache)?;
            acc.add_scaled(&v, 1.0 / shots as f64);
        }
        acc
    } else {
        let mut v = start;
        evolve::<R>(c, &mut v, Some(None), &mut cache)?;
        v
    };
    Ok((ideal.to_density(), noisy.to_density()))
}

/// `2^{-n} tr[N_eff(P) P]` by dense Heisenberg propagation of `P` through the noisy
/// and the ideal circuit. Sampled twirl layers use their exact gadget average.
/// Works for any rotation angle.
pub fn effective_fidelity_dense(c: &LogicalCircuit, p: &PauliOp) -> Result<f64> {
    let n = c.num_qubits();
    check_dim(n, p.num_qubits())?;
    check_cap(n)?;
    let start = PauliVector::from_pauli(&p.unsigned())?;
    let mut ideal = start.clone();
    let mut noisy = start;
    let mut cache = TableCache::default();
    for layer in c.layers().iter().rev() {
        match layer {
            Layer::Clifford(cl) => {
                ideal = ideal.apply_clifford(cl.inverse());
                noisy = noisy.apply_clifford(cl.inverse());
            }
            Layer::Rotation(r) => {
                if !r.noise().is_noiseless() {
                    LayerMultiplier::for_layer::<rand_chacha::ChaCha8Rng>(r, None, &mut cache)?.apply(&mut noisy);
                }
                ideal.apply_rotation(r.axis(), -r.angle())?;
                noisy.apply_rotation(r.axis(), -r.angle())?;
            }
        }
    }
    Ok(ideal.dot(&noisy) / 4f64.powi(n as i32))
}

/// Settings for the Trotterized 1D Heisenberg white-noise-approximation scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FigS2Config {
    pub n_list: Vec<usize>,
    pub t_list: Vec<usize>,
    /// Rotation angle of every Trotter layer.
    pub theta: f64,
    pub p_tot: f64,
    pub num_inputs: usize,
    pub num_bases: usize,
    #[serde(default)]
    pub basis: BasisEnsemble,
}

impl Default for FigS2Config {
    fn default() -> Self {
        FigS2Config {
            n_list: vec![3, 4, 5, 6],
            t_list: vec![10, 50, 200],
            theta: PI / 256.0,
            p_tot: 1.0,
            num_inputs: 8,
            num_bases: 20,
            basis: BasisEnsemble::Clifford,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FigS2Row {
    pub n: usize,
    pub t: usize,
    pub theta: f64,
    pub l: usize,
    pub r: f64,
    pub trace_distance: f64,
    pub trace_distance_stderr: f64,
    pub tv_distance: f64,
    pub tv_distance_stderr: f64,
    /// Basis-averaged TV distance for each input state.
    #[serde(skip)]
    pub tv_per_input: Vec<f64>,
    #[serde(skip)]
    pub trace_per_input: Vec<f64>,
}

/// Compares `ρ_ideal` with `R ρ_noisy + (1 - R) I / 2^n` for Haar-random pure inputs,
/// with single-qubit depolarizing noise `p_tot / L` after every rotation.
pub fn run_figs2(cfg: &FigS2Config, seed: u64) -> Result<Vec<FigS2Row>> {
    if cfg.num_inputs == 0 || cfg.num_bases == 0 {
        return Err(TwirlError::validation("num_inputs and num_bases must be positive"));
    }
    if !(0.0..=1.0).contains(&cfg.p_tot) {
        return Err(TwirlError::validation("p_tot must lie in [0, 1]"));
    }
    for &n in &cfg.n_list {
        check_cap(n)?;
    }
    let mut jobs = Vec::new();
    for &n in &cfg.n_list {
        for &t in &cfg.t_list {
            for i in 0..cfg.num_inputs {
                jobs.push((n, t, i));
            }
        }
    }
    let results: Vec<(f64, f64, f64, usize)> = jobs
        .par_iter()
        .enumerate()
        .map(|(job, &(n, t, _))| {
            let mut rng = stream_rng(seed, job as u64);
            let base = build_trotter_circuit(&HamiltonianModel::heisenberg_chain(n), t, cfg.theta, false)?;
            let l = base.num_rotations();
            let pe = cfg.p_tot / l as f64;
            let noise = LayerNoise::uniform(n, pe / 3.0, pe / 3.0, pe / 3.0, TwirlMode::None, 0.0)?;
            let c = base.with_noise(Arc::new(noise))?;
            let r = optimal_rescale_coefficient(&c)?;
            let input = DensityMatrix::haar_random_pure(n, &mut rng)?;
            let start = PauliVector::from_density(&input);
            let mut ideal = start.clone();
            let mut noisy = start;
            let mut cache = TableCache::default();
            evolve::<rand_chacha::ChaCha8Rng>(&c, &mut ideal, None, &mut cache)?;
            evolve::<rand_chacha::ChaCha8Rng>(&c, &mut noisy, Some(None), &mut cache)?;
            noisy.rescale_towards_identity(r);
            let td = trace_distance(&ideal.to_density(), &noisy.to_density())?;
            let tv: Vec<f64> = match cfg.basis {
                BasisEnsemble::Clifford => (0..cfg.num_bases)
                    .map(|_| {
                        let cl = CliffordOp::random(n, &mut rng);
                        tv_distance(&ideal.probabilities_after(&cl), &noisy.probabilities_after(&cl))
                    })
                    .collect(),
                BasisEnsemble::Haar => {
                    let (a, b) = (ideal.to_density(), noisy.to_density());
                    (0..cfg.num_bases)
                        .map(|_| {
                            let u = super::haar_unitary(n, &mut rng)?;
                            Ok(tv_distance(&a.apply_unitary(&u)?.probabilities(), &b.apply_unitary(&u)?.probabilities()))
                        })
                        .collect::<Result<_>>()?
                }
            };
            Ok((td, mean_stderr(&tv).0, r, l))
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (chunk, pair) in results.chunks(cfg.num_inputs).zip(jobs.chunks(cfg.num_inputs)) {
        let (n, t, _) = pair[0];
        let trace: Vec<f64> = chunk.iter().map(|x| x.0).collect();
        let tv: Vec<f64> = chunk.iter().map(|x| x.1).collect();
        let (tdm, tds) = mean_stderr(&trace);
        let (tvm, tvs) = mean_stderr(&tv);
        rows.push(FigS2Row {
            n,
            t,
            theta: cfg.theta,
            l: chunk[0].3,
            r: chunk[0].2,
            trace_distance: tdm,
            trace_distance_stderr: tds,
            tv_distance: tvm,
            tv_distance_stderr: tvs,
            tv_per_input: tv,
            trace_per_input: trace,
        });
    }
    Ok(rows)
}

/// Settings for the random-Clifford rescaling experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WnBoundConfig {
    pub n: usize,
    pub l_list: Vec<usize>,
    pub p_tot: f64,
    /// Angle of the `exp(iθ Z_0)` layer.
    #[serde(default = "default_wn_angle")]
    pub angle: f64,
    pub num_circuits: usize,
}

fn default_wn_angle() -> f64 {
    PI / 8.0
}

impl Default for WnBoundConfig {
    fn default() -> Self {
        WnBoundConfig {
            n: 4,
            l_list: vec![10, 50, 200],
            p_tot: 1.0,
            angle: default_wn_angle(),
            num_circuits: 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WnBoundRow {
    pub n: usize,
    pub l: usize,
    pub p_err: f64,
    pub s: f64,
    pub u: f64,
    pub r: f64,
    pub v: f64,
    pub mean_bias: f64,
    pub stderr: f64,
    pub rms_bias: f64,
    /// Bias of the traceless ±1 diagonal observable chosen per circuit to maximize it.
    pub adapted_mean_bias: f64,
    pub adapted_stderr: f64,
    /// `|R f(P) - 1|` for a random non-identity `P`, averaged over circuits.
    pub pauli_mean_bias: f64,
    pub pauli_stderr: f64,
    pub pauli_rms_bias: f64,
    pub theorem_bound: f64,
    pub corollary_bound: f64,
}

/// Circuits `C_{L+1} N U C_L ... N U C_1` on `|0><0|` with uniformly random Clifford
/// layers, `U = exp(iθ Z_0)` and single-qubit depolarizing noise `p_tot / L` on qubit 0.
/// The observable is a diagonal ±1 reflection with balanced signs, drawn once per `L`.
/// Each circuit also reports the bias of the worst balanced diagonal observable, which
/// equals half the l1 norm of the rescaled deviation vector after centering, and the
/// rescaled fidelity error of one random Pauli.
pub fn run_wn_bound(cfg: &WnBoundConfig, seed: u64) -> Result<Vec<WnBoundRow>> {
    let n = cfg.n;
    check_cap(n)?;
    if cfg.num_circuits == 0 {
        return Err(TwirlError::validation("num_circuits must be positive"));
    }
    let dim = 1usize << n;
    let mut rows = Vec::new();
    for (li, &l) in cfg.l_list.iter().enumerate() {
        if l == 0 {
            return Err(TwirlError::validation("L must be positive"));
        }
        let pe = cfg.p_tot / l as f64;
        let ch = make_single_qubit_pauli_noise(n, 0, pe / 3.0, pe / 3.0, pe / 3.0)?;
        let s = ch.avg_noise_strength();
        let u = ch.unitarity()?;
        let v = ch.distance_v()?;
        let r = (l as f64 * (s / u).ln()).exp();
        let dep = 1.0 - 4.0 * pe / 3.0;
        let axis = PauliOp::single(n, 0, Letter::Z);
        let layer_noise = Arc::new(LayerNoise::uniform(n, pe / 3.0, pe / 3.0, pe / 3.0, TwirlMode::None, 0.0)?);
        let mut obs_rng = stream_rng(seed, (li as u64) << 32);
        let mut signs: Vec<f64> = (0..dim).map(|b| if b < dim / 2 { 1.0 } else { -1.0 }).collect();
        signs.shuffle(&mut obs_rng);
        let per_circuit: Vec<[f64; 3]> = (0..cfg.num_circuits)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream_rng(seed, ((li as u64) << 32) | (k as u64 + 1));
                let mut ideal = PauliVector::zero_state(n)?;
                let mut noisy = ideal.clone();
                let mut circuit = LogicalCircuit::new(n, vec![])?;
                for _ in 0..l {
                    let cl = CliffordOp::random(n, &mut rng);
                    circuit.push_clifford(cl.clone())?;
                    circuit.push_rotation(RotationLayer::new(axis.clone(), cfg.angle, layer_noise.clone())?)?;
                    ideal = ideal.apply_clifford(&cl);
                    noisy = noisy.apply_clifford(&cl);
                    ideal.apply_rotation(&axis, cfg.angle)?;
                    noisy.apply_rotation(&axis, cfg.angle)?;
                    noisy.scale_by(|code| if code & 1 == 1 || code >> n & 1 == 1 { dep } else { 1.0 });
                }
                let cl = CliffordOp::random(n, &mut rng);
                let (pi, pn) = (ideal.probabilities_after(&cl), noisy.probabilities_after(&cl));
                let ei: f64 = pi.iter().zip(&signs).map(|(p, s)| p * s).sum();
                let en: f64 = pn.iter().zip(&signs).map(|(p, s)| p * s).sum();
                let mut delta: Vec<f64> = pn.iter().zip(&pi).map(|(a, b)| r * a - b).collect();
                delta.sort_by(f64::total_cmp);
                let adapted = delta[dim / 2..].iter().sum::<f64>() - delta[..dim / 2].iter().sum::<f64>();
                let pauli = PauliOp::random(n, true, &mut rng);
                let f = effective_fidelity_dense(&circuit, &pauli)?;
                Ok([(r * en - ei).abs(), adapted, (r * f - 1.0).abs()])
            })
            .collect::<Result<_>>()?;
        let rms = |b: &[f64]| (b.iter().map(|b| b * b).sum::<f64>() / b.len() as f64).sqrt();
        let column = |i: usize| per_circuit.iter().map(|b| b[i]).collect::<Vec<f64>>();
        let (biases, adapted, pauli_biases) = (column(0), column(1), column(2));
        let (mean_bias, stderr) = mean_stderr(&biases);
        let (adapted_mean_bias, adapted_stderr) = mean_stderr(&adapted);
        let (pauli_mean_bias, pauli_stderr) = mean_stderr(&pauli_biases);
        rows.push(WnBoundRow {
            n,
            l,
            p_err: pe,
            s,
            u,
            r,
            v,
            mean_bias,
            stderr,
            rms_bias: rms(&biases),
            adapted_mean_bias,
            adapted_stderr,
            pauli_mean_bias,
            pauli_stderr,
            pauli_rms_bias: rms(&pauli_biases),
            theorem_bound: whitenoise_bias_bound(s, u, l, n)?,
            corollary_bound: corollary_bound(v, cfg.p_tot, l)?,
        });
    }
    Ok(rows)
}
