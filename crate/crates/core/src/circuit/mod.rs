//! Logical circuits of Clifford layers and noisy Pauli rotations, evaluated by
//! Heisenberg back-propagation of Pauli observables.
//!
//! A rotation layer about axis `A` is implemented as `V† Rz(θ) V` with `V A V† = Z_0`.
//! Its noise lives in that rotated frame on qubit 0, after the rotation. Twirl gadgets
//! act in the same frame, so they commute with `Rz` and never change which Pauli the
//! observable becomes; only the fidelity factors depend on the draw.

mod bounds;
mod models;

pub use bounds::*;
pub use models::*;

use std::f64::consts::FRAC_PI_4;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{make_single_qubit_pauli_noise, PauliChannel};
use crate::clifford::{CliffordOp, GateSpec};
use crate::error::{check_dim, Result, TwirlError};
use crate::pauli::{Letter, PauliOp};
use crate::twirl::{
    draw_full_twirl, draw_ksparse_twirl, frame_gates_for_axis, twirl_channel, twirl_channel_ksparse,
    GadgetDraw, SamplerMode, SymmetrySpec,
};

/// How a rotation layer's noise is twirled.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwirlMode {
    None,
    /// Gadgets drawn per layer from the full sampler.
    Full,
    /// Gadgets drawn per layer from the k-sparse sampler.
    Ksparse(usize),
    AnalyticFull,
    AnalyticKsparse(usize),
}

impl TwirlMode {
    /// Parses `none | full | ksparse | analytic_full | analytic_ksparse`; `k` is required for the sparse ones.
    pub fn parse(name: &str, k: Option<usize>) -> Result<TwirlMode> {
        let need_k = || k.ok_or_else(|| TwirlError::validation(format!("mode {name} needs k")));
        Ok(match name {
            "none" => TwirlMode::None,
            "full" => TwirlMode::Full,
            "ksparse" => TwirlMode::Ksparse(need_k()?),
            "analytic_full" => TwirlMode::AnalyticFull,
            "analytic_ksparse" => TwirlMode::AnalyticKsparse(need_k()?),
            other => return Err(TwirlError::validation(format!("unknown twirl mode {other:?}"))),
        })
    }

    pub fn label(&self) -> String {
        match self {
            TwirlMode::None => "none".into(),
            TwirlMode::Full => "full".into(),
            TwirlMode::Ksparse(k) => format!("ksparse{k}"),
            TwirlMode::AnalyticFull => "analytic_full".into(),
            TwirlMode::AnalyticKsparse(k) => format!("analytic_ksparse{k}"),
        }
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self, TwirlMode::Full | TwirlMode::Ksparse(_))
    }

    fn sampler(&self) -> Option<SamplerMode> {
        match self {
            TwirlMode::Full => Some(SamplerMode::Full),
            TwirlMode::Ksparse(k) => Some(SamplerMode::Ksparse(*k)),
            _ => None,
        }
    }
}

/// How sampled twirl layers are averaged over gadget draws.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GadgetAveraging {
    /// Closed-form average over the sampler distribution, layer by layer.
    #[default]
    Exact,
    /// Monte-Carlo over independent per-layer draws.
    Sampled { shots: usize },
}

/// Noise attached to rotation layers: a single-qubit Pauli channel on qubit 0 of the
/// rotation frame, its twirl, optional gadget noise, and the derived `s` and `u`.
#[derive(Debug)]
pub struct LayerNoise {
    n: usize,
    base: PauliChannel,
    mode: TwirlMode,
    gadget_noise: f64,
    lambda0: [f64; 4],
    twirled: Option<PauliChannel>,
    gadget_table: Option<Vec<[f64; 4]>>,
    s: f64,
    u: f64,
}

impl LayerNoise {
    pub fn noiseless(n: usize) -> LayerNoise {
        LayerNoise {
            n,
            base: PauliChannel::identity(n),
            mode: TwirlMode::None,
            gadget_noise: 0.0,
            lambda0: [1.0; 4],
            twirled: None,
            gadget_table: None,
            s: 1.0,
            u: 1.0,
        }
    }

    /// `base` must consist of single-Pauli atoms supported on qubit 0.
    pub fn new(base: PauliChannel, mode: TwirlMode, gadget_noise: f64) -> Result<LayerNoise> {
        let n = base.num_qubits();
        if !(0.0..=1.0).contains(&gadget_noise) {
            return Err(TwirlError::validation(format!(
                "gadget noise rate {gadget_noise} outside [0, 1]"
            )));
        }
        if gadget_noise > 0.0 && !mode.is_sampled() {
            return Err(TwirlError::validation(
                "gadget noise only applies to sampled twirl modes",
            ));
        }
        let mut probs = [0.0; 4];
        for a in base.atoms() {
            let p = a.ensemble.as_point().ok_or_else(|| {
                TwirlError::validation("layer noise must consist of single-Pauli atoms")
            })?;
            if p.support().iter().any(|&q| q != 0) {
                return Err(TwirlError::validation(format!(
                    "layer noise must act on qubit 0 of the rotation frame, got {p}"
                )));
            }
            probs[p.letter(0) as usize] += a.prob;
        }
        let (px, py, pz) = (probs[1], probs[2], probs[3]);
        let lambda0 = [
            1.0,
            1.0 - 2.0 * (py + pz),
            1.0 - 2.0 * (px + pz),
            1.0 - 2.0 * (px + py),
        ];
        let spec = SymmetrySpec::rz_first_qubit(n)?;
        let twirled = match mode {
            TwirlMode::None => None,
            TwirlMode::Full | TwirlMode::AnalyticFull => Some(twirl_channel(&base, &spec)?),
            TwirlMode::Ksparse(k) | TwirlMode::AnalyticKsparse(k) => {
                Some(twirl_channel_ksparse(&base, &spec, k)?)
            }
        };
        let gadget_table = mode
            .sampler()
            .map(|m| gadget_average_table(n, m, lambda0, gadget_noise));
        let (s, u) = match (&gadget_table, &twirled) {
            (Some(t), _) => table_moments(n, t),
            (None, Some(ch)) => (ch.avg_noise_strength(), ch.unitarity()?),
            (None, None) => (base.avg_noise_strength(), base.unitarity()?),
        };
        Ok(LayerNoise {
            n,
            base,
            mode,
            gadget_noise,
            lambda0,
            twirled,
            gadget_table,
            s,
            u,
        })
    }

    /// Single-qubit Pauli noise `(px, py, pz)` on qubit 0 of the rotation frame.
    pub fn uniform(n: usize, px: f64, py: f64, pz: f64, mode: TwirlMode, gadget_noise: f64) -> Result<LayerNoise> {
        LayerNoise::new(make_single_qubit_pauli_noise(n, 0, px, py, pz)?, mode, gadget_noise)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> &PauliChannel {
        &self.base
    }

    pub fn mode(&self) -> TwirlMode {
        self.mode
    }

    pub fn gadget_noise(&self) -> f64 {
        self.gadget_noise
    }

    /// The analytic twirled channel, when the mode twirls.
    pub fn twirled(&self) -> Option<&PauliChannel> {
        self.twirled.as_ref()
    }

    /// Average noise strength of the layer's average channel.
    pub fn s(&self) -> f64 {
        self.s
    }

    /// Unitarity of the layer's average channel.
    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn is_noiseless(&self) -> bool {
        self.base.atoms().is_empty() && self.gadget_noise == 0.0
    }

    /// Fidelity of the layer's average channel on `o` (given in the rotation frame).
    pub fn fidelity(&self, o: &PauliOp) -> f64 {
        if let Some(t) = &self.gadget_table {
            let o0 = o.letter(0);
            let w = o.weight() - (o0 != Letter::I) as usize;
            return t[w][o0 as usize];
        }
        match &self.twirled {
            Some(ch) => ch.pauli_fidelity_unchecked(o),
            None => self.lambda0[o.letter(0) as usize],
        }
    }

    /// Fidelity factor for one gadget draw, including gadget noise after `D` and after `D†`.
    pub(crate) fn drawn_fidelity(&self, o: &PauliOp, draw: &GadgetDraw, scratch: &mut PauliOp) -> f64 {
        let d = 1.0 - 4.0 * self.gadget_noise / 3.0;
        scratch.clone_from(o);
        draw.conjugate_inverse_unsigned(scratch);
        let mut f = self.lambda0[scratch.letter(0) as usize];
        if self.gadget_noise > 0.0 {
            f *= d.powi(draw.support_overlap(o) + draw.support_overlap(scratch));
        }
        f
    }

    pub(crate) fn lambda0(&self) -> [f64; 4] {
        self.lambda0
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<GadgetDraw> {
        match self.mode {
            TwirlMode::Full => Some(draw_full_twirl(self.n, rng)),
            TwirlMode::Ksparse(k) => Some(draw_ksparse_twirl(self.n, k, rng)),
            _ => None,
        }
    }
}

fn binom_f64(m: usize, j: usize) -> f64 {
    if j > m {
        return 0.0;
    }
    let j = j.min(m - j);
    (0..j).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

/// Exact gadget-averaged fidelity `E_D[d^{ov(O)} λ_0(D† O D) d^{ov(D† O D)}]`, indexed
/// by `[weight of O off qubit 0][letter of O on qubit 0]`.
///
/// Under `D† · D` a non-identity letter on a target becomes uniform over X, Y, Z before
/// the multi-target CNOT. Its Z bit (probability 2/3) feeds the parity that lands on
/// qubit 0; when qubit 0 carries an X bit, the CNOT also XORs an X into every target.
pub fn gadget_average_table(n: usize, mode: SamplerMode, lambda0: [f64; 4], gadget_noise: f64) -> Vec<[f64; 4]> {
    let d = 1.0 - 4.0 * gadget_noise / 3.0;
    let m = n - 1;
    let mut table = vec![[0.0; 4]; m + 1];
    for (w, row) in table.iter_mut().enumerate() {
        // (probability, nontrivial targets i, trivial targets r)
        let mut outcomes: Vec<(f64, usize, usize)> = Vec::new();
        match mode {
            SamplerMode::Full => {
                for i in 0..=w {
                    let pi = binom_f64(w, i) * 0.75f64.powi(i as i32) * 0.25f64.powi((w - i) as i32);
                    for r in 0..=m - w {
                        let pr = binom_f64(m - w, r)
                            * 0.75f64.powi(r as i32)
                            * 0.25f64.powi((m - w - r) as i32);
                        outcomes.push((pi * pr, i, r));
                    }
                }
            }
            SamplerMode::Ksparse(k) => {
                let weights: Vec<f64> = (0..k.min(m + 1))
                    .map(|kp| 3f64.powi(kp as i32) * binom_f64(m, kp))
                    .collect();
                let total: f64 = weights.iter().sum();
                for (kp, wk) in weights.iter().enumerate() {
                    for i in kp.saturating_sub(m - w)..=kp.min(w) {
                        let h = binom_f64(w, i) * binom_f64(m - w, kp - i) / binom_f64(m, kp);
                        outcomes.push((wk / total * h, i, kp - i));
                    }
                }
            }
        }
        for letter in Letter::ALL {
            let (x0, z0) = letter.bits();
            let o_nontrivial = letter != Letter::I;
            let mut acc = 0.0;
            for &(prob, i, r) in &outcomes {
                if prob == 0.0 {
                    continue;
                }
                let (sum, diff, triv) = if x0 {
                    (
                        (d / 3.0 + 2.0 * d * d / 3.0).powi(i as i32),
                        (d / 3.0 - 2.0 * d * d / 3.0).powi(i as i32),
                        d.powi(r as i32),
                    )
                } else {
                    let dd = (d * d).powi(i as i32);
                    (dd, dd * (-1.0f64 / 3.0).powi(i as i32), 1.0)
                };
                let parity_weight = [(sum + diff) / 2.0 * triv, (sum - diff) / 2.0 * triv];
                let empty = i + r == 0;
                for s in [false, true] {
                    let touch0 = s || !empty;
                    for (par, pw) in parity_weight.iter().enumerate() {
                        if *pw == 0.0 {
                            continue;
                        }
                        let z = z0 ^ (s && x0) ^ (par == 1);
                        let a0 = Letter::from_bits(x0, z);
                        let mut f = pw * lambda0[a0 as usize];
                        if touch0 {
                            f *= d.powi(o_nontrivial as i32 + (a0 != Letter::I) as i32);
                        }
                        acc += 0.5 * prob * f;
                    }
                }
            }
            row[letter as usize] = acc;
        }
    }
    table
}

/// `(s, u)` from a fidelity table: means of `λ` and `λ²` over non-identity Paulis.
fn table_moments(n: usize, table: &[[f64; 4]]) -> (f64, f64) {
    let m = n - 1;
    let denom = 4f64.powi(n as i32) - 1.0;
    let mut ds = 0.0;
    let mut du = 0.0;
    for (w, row) in table.iter().enumerate() {
        let rest = binom_f64(m, w) * 3f64.powi(w as i32);
        for letter in Letter::ALL {
            if w == 0 && letter == Letter::I {
                continue;
            }
            let l = row[letter as usize];
            ds += rest * (l - 1.0);
            du += rest * (l * l - 1.0);
        }
    }
    (1.0 + ds / denom, 1.0 + du / denom)
}

#[derive(Clone, Debug)]
pub struct RotationLayer {
    axis: PauliOp,
    angle: f64,
    frame: Arc<[GateSpec]>,
    noise: Arc<LayerNoise>,
}

impl RotationLayer {
    pub fn new(axis: PauliOp, angle: f64, noise: Arc<LayerNoise>) -> Result<RotationLayer> {
        check_dim(axis.num_qubits(), noise.num_qubits())?;
        let frame: Arc<[GateSpec]> = frame_gates_for_axis(&axis)?.into();
        Ok(RotationLayer::with_frame(axis, angle, frame, noise))
    }

    pub(crate) fn with_frame(axis: PauliOp, angle: f64, frame: Arc<[GateSpec]>, noise: Arc<LayerNoise>) -> RotationLayer {
        RotationLayer {
            axis,
            angle,
            frame,
            noise,
        }
    }

    pub fn axis(&self) -> &PauliOp {
        &self.axis
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// Gates of `V` with `V axis V† = Z_0`.
    pub fn frame(&self) -> &[GateSpec] {
        &self.frame
    }

    pub fn noise(&self) -> &Arc<LayerNoise> {
        &self.noise
    }

    /// `V o V†` on letters.
    pub(crate) fn enter_frame(&self, o: &mut PauliOp) {
        for g in self.frame.iter() {
            g.conjugate_unsigned(o);
        }
    }

    /// `V† o V` on letters.
    pub(crate) fn leave_frame(&self, o: &mut PauliOp) {
        for g in self.frame.iter().rev() {
            g.conjugate_unsigned(o);
        }
    }

    /// Multiple of π/4 the angle equals, if any.
    pub fn clifford_quarter_turns(&self) -> Option<i64> {
        let k = self.angle / FRAC_PI_4;
        let r = k.round();
        ((k - r).abs() < 1e-9).then_some(r as i64)
    }
}

#[derive(Clone, Debug)]
pub struct CliffordLayer {
    op: CliffordOp,
    inverse: CliffordOp,
}

impl CliffordLayer {
    pub fn new(op: CliffordOp) -> CliffordLayer {
        let inverse = op.inverse();
        CliffordLayer { op, inverse }
    }

    pub fn op(&self) -> &CliffordOp {
        &self.op
    }

    pub fn inverse(&self) -> &CliffordOp {
        &self.inverse
    }
}

#[derive(Clone, Debug)]
pub enum Layer {
    Clifford(CliffordLayer),
    Rotation(RotationLayer),
}

/// Layers in time order.
#[derive(Clone, Debug)]
pub struct LogicalCircuit {
    n: usize,
    layers: Vec<Layer>,
}

impl LogicalCircuit {
    pub fn new(n: usize, layers: Vec<Layer>) -> Result<LogicalCircuit> {
        for l in &layers {
            match l {
                Layer::Clifford(c) => check_dim(n, c.op.num_qubits())?,
                Layer::Rotation(r) => {
                    check_dim(n, r.axis.num_qubits())?;
                    check_dim(n, r.noise.num_qubits())?;
                }
            }
        }
        Ok(LogicalCircuit { n, layers })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn rotations(&self) -> impl Iterator<Item = &RotationLayer> {
        self.layers.iter().filter_map(|l| match l {
            Layer::Rotation(r) => Some(r),
            _ => None,
        })
    }

    /// L, the number of rotation layers.
    pub fn num_rotations(&self) -> usize {
        self.rotations().count()
    }

    pub fn push_clifford(&mut self, op: CliffordOp) -> Result<()> {
        check_dim(self.n, op.num_qubits())?;
        self.layers.push(Layer::Clifford(CliffordLayer::new(op)));
        Ok(())
    }

    pub fn push_rotation(&mut self, layer: RotationLayer) -> Result<()> {
        check_dim(self.n, layer.axis.num_qubits())?;
        self.layers.push(Layer::Rotation(layer));
        Ok(())
    }

    /// Same circuit with `noise` on every rotation layer.
    pub fn with_noise(&self, noise: Arc<LayerNoise>) -> Result<LogicalCircuit> {
        check_dim(self.n, noise.num_qubits())?;
        let layers = self
            .layers
            .iter()
            .map(|l| match l {
                Layer::Rotation(r) => Layer::Rotation(RotationLayer {
                    noise: noise.clone(),
                    ..r.clone()
                }),
                other => other.clone(),
            })
            .collect();
        Ok(LogicalCircuit { n: self.n, layers })
    }

    /// Single-qubit Pauli noise with total rate `p_tot / L` split in the ratio `(wx, wy, wz)`,
    /// and gadget noise `gadget_ratio * p_err`.
    pub fn with_total_error(
        &self,
        p_tot: f64,
        ratio: (f64, f64, f64),
        mode: TwirlMode,
        gadget_ratio: f64,
    ) -> Result<LogicalCircuit> {
        let l = self.num_rotations();
        if l == 0 {
            return Err(TwirlError::validation("circuit has no rotation layers"));
        }
        let norm = ratio.0 + ratio.1 + ratio.2;
        if norm <= 0.0 {
            return Err(TwirlError::validation("noise ratio must have positive sum"));
        }
        let pe = p_tot / l as f64;
        let noise = LayerNoise::uniform(
            self.n,
            pe * ratio.0 / norm,
            pe * ratio.1 / norm,
            pe * ratio.2 / norm,
            mode,
            gadget_ratio * pe,
        )?;
        self.with_noise(Arc::new(noise))
    }

    pub(crate) fn has_sampled_layers(&self) -> bool {
        self.rotations().any(|r| r.noise.mode.is_sampled())
    }

    fn require_clifford_angles(&self) -> Result<()> {
        for r in self.rotations() {
            if r.clifford_quarter_turns().is_none() {
                return Err(TwirlError::unsupported(format!(
                    "rotation angle {} is not a multiple of π/4; use the dense simulator",
                    r.angle
                )));
            }
        }
        Ok(())
    }

    /// Heisenberg back-propagation. `factor` sees each rotation layer with the
    /// observable in that layer's frame, just after the rotation.
    fn propagate<F>(&self, p: &PauliOp, mut factor: F) -> f64
    where
        F: FnMut(&RotationLayer, &PauliOp) -> f64,
    {
        let mut o = p.unsigned();
        let mut tmp = PauliOp::identity(self.n);
        let mut f = 1.0;
        for layer in self.layers.iter().rev() {
            match layer {
                Layer::Clifford(c) => {
                    c.inverse.conjugate_unsigned_into(&o, &mut tmp);
                    std::mem::swap(&mut o, &mut tmp);
                }
                Layer::Rotation(r) => {
                    r.enter_frame(&mut o);
                    f *= factor(r, &o);
                    let turns = r.clifford_quarter_turns().expect("checked by caller");
                    if turns.rem_euclid(2) == 1 && o.x_bit(0) {
                        let z = o.z_bit(0);
                        o.set_z_bit(0, !z);
                    }
                    r.leave_frame(&mut o);
                }
            }
        }
        f
    }
}

/// `2^{-n} tr[N_eff(P) P]` with sampled layers replaced by their exact gadget average.
pub fn effective_fidelity_exact(c: &LogicalCircuit, p: &PauliOp) -> Result<f64> {
    check_dim(c.n, p.num_qubits())?;
    c.require_clifford_angles()?;
    Ok(c.propagate(p, |r, o| r.noise.fidelity(o)))
}

/// Monte-Carlo estimate over `shots` independent gadget sequences. Deterministic
/// circuits return the exact value with zero standard error.
pub fn effective_fidelity<R: Rng + ?Sized>(
    c: &LogicalCircuit,
    p: &PauliOp,
    shots: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if !c.has_sampled_layers() {
        return Ok((effective_fidelity_exact(c, p)?, 0.0));
    }
    check_dim(c.n, p.num_qubits())?;
    c.require_clifford_angles()?;
    if shots == 0 {
        return Err(TwirlError::validation("shots must be positive"));
    }
    let mut scratch = PauliOp::identity(c.n);
    let samples: Vec<f64> = (0..shots)
        .map(|_| {
            c.propagate(p, |r, o| match r.noise.draw(rng) {
                Some(draw) => r.noise.drawn_fidelity(o, &draw, &mut scratch),
                None => r.noise.fidelity(o),
            })
        })
        .collect();
    Ok(crate::dense::mean_stderr(&samples))
}

/// `Π_l s_l / u_l` over rotation layers.
pub fn optimal_rescale_coefficient(c: &LogicalCircuit) -> Result<f64> {
    let mut log_r = 0.0;
    for r in c.rotations() {
        let (s, u) = (r.noise.s, r.noise.u);
        if u <= 0.0 {
            return Err(TwirlError::Degenerate(format!(
                "layer channel has unitarity {u}"
            )));
        }
        log_r += (s / u).ln();
    }
    Ok(log_r.exp())
}

/// Per-observable RNG stream derived from the master seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mean over random non-identity `P` of `|R |f(P)| - 1|`, with its standard error.
/// Each observable owns RNG stream `i`, so results do not depend on the thread count.
pub fn average_bias(
    c: &LogicalCircuit,
    num_paulis: usize,
    averaging: GadgetAveraging,
    seed: u64,
) -> Result<(f64, f64)> {
    if num_paulis == 0 {
        return Err(TwirlError::validation("num_paulis must be positive"));
    }
    c.require_clifford_angles()?;
    let r = optimal_rescale_coefficient(c)?;
    let biases: Vec<f64> = (0..num_paulis)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let p = PauliOp::random(c.n, true, &mut rng);
            let f = match averaging {
                GadgetAveraging::Exact => effective_fidelity_exact(c, &p)?,
                GadgetAveraging::Sampled { shots } => effective_fidelity(c, &p, shots, &mut rng)?.0,
            };
            Ok((r * f.abs() - 1.0).abs())
        })
        .collect::<Result<_>>()?;
    Ok(crate::dense::mean_stderr(&biases))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::make_white_noise;
    use rand::SeedableRng;

    fn p(s: &str) -> PauliOp {
        PauliOp::parse(s).unwrap()
    }

    fn heis(side: usize, steps: usize) -> LogicalCircuit {
        build_trotter_circuit(&HamiltonianModel::heisenberg_square(side), steps, 0.1, true).unwrap()
    }

    #[test]
    fn single_layer_untwirled() {
        let n = 3;
        let noise = Arc::new(LayerNoise::uniform(n, 0.01, 0.02, 0.03, TwirlMode::None, 0.0).unwrap());
        let layer = RotationLayer::new(p("XXI"), FRAC_PI_4, noise.clone()).unwrap();
        let c = LogicalCircuit::new(n, vec![Layer::Rotation(layer.clone())]).unwrap();
        let obs = p("ZIZ");
        let mut o = obs.clone();
        layer.enter_frame(&mut o);
        let expect = noise.base().pauli_fidelity(&o).unwrap();
        assert!((effective_fidelity_exact(&c, &obs).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn noiseless_has_zero_bias() {
        let c = heis(2, 3);
        assert_eq!(optimal_rescale_coefficient(&c).unwrap(), 1.0);
        let (b, _) = average_bias(&c, 50, GadgetAveraging::Exact, 1).unwrap();
        assert_eq!(b, 0.0);
    }

    #[test]
    fn white_noise_layers() {
        let n = 3;
        let pe = 0.01;
        let l = 5;
        // White noise is invariant under every frame, so build layers directly.
        let wn = make_white_noise(n, pe).unwrap();
        let s = wn.avg_noise_strength();
        let u = wn.unitarity().unwrap();
        let lam = 1.0 - pe * 64.0 / 63.0;
        assert!((s - lam).abs() < 1e-15);
        assert!((u - lam * lam).abs() < 1e-15);
        assert!(((s / u).powi(l) - lam.powi(-l)).abs() < 1e-12);
    }

    #[test]
    fn gadget_table_matches_analytic_twirl_without_gadget_noise() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1usize, 2, 5, 9] {
            for mode in [TwirlMode::AnalyticFull, TwirlMode::AnalyticKsparse(2.min(n)), TwirlMode::AnalyticKsparse(n)] {
                let analytic = LayerNoise::uniform(n, 0.01, 0.02, 0.005, mode, 0.0).unwrap();
                let sampler = match mode {
                    TwirlMode::AnalyticFull => SamplerMode::Full,
                    TwirlMode::AnalyticKsparse(k) => SamplerMode::Ksparse(k),
                    _ => unreachable!(),
                };
                let table = gadget_average_table(n, sampler, [1.0, 0.97, 0.95, 0.94], 0.0);
                let _ = table;
                let sampled_mode = match mode {
                    TwirlMode::AnalyticFull => TwirlMode::Full,
                    TwirlMode::AnalyticKsparse(k) => TwirlMode::Ksparse(k),
                    _ => unreachable!(),
                };
                let sampled = LayerNoise::uniform(n, 0.01, 0.02, 0.005, sampled_mode, 0.0).unwrap();
                for _ in 0..40 {
                    let o = PauliOp::random(n, false, &mut rng);
                    assert!((analytic.fidelity(&o) - sampled.fidelity(&o)).abs() < 1e-14, "{n} {mode:?} {o}");
                }
                assert!((analytic.s() - sampled.s()).abs() < 1e-13);
                assert!((analytic.u() - sampled.u()).abs() < 1e-12, "{} {}", analytic.u(), sampled.u());
            }
        }
    }

    #[test]
    fn gadget_table_matches_enumeration_with_gadget_noise() {
        let n = 3;
        let pd = 0.05;
        let d = 1.0 - 4.0 * pd / 3.0;
        let noise = LayerNoise::uniform(n, 0.02, 0.03, 0.01, TwirlMode::Full, pd).unwrap();
        for mode in [SamplerMode::Full, SamplerMode::Ksparse(2)] {
            let dist = crate::twirl::enumerate_sampler_distribution(n, mode).unwrap();
            let table = gadget_average_table(n, mode, noise.lambda0, pd);
            for code in 0..64 {
                let o = crate::dense::pauli_from_index(n, code);
                let mut scratch = PauliOp::identity(n);
                let exact: f64 = dist
                    .iter()
                    .map(|(w, g)| {
                        use num_traits::ToPrimitive;
                        w.to_f64().unwrap() * noise.drawn_fidelity(&o, g, &mut scratch)
                    })
                    .sum();
                let w = o.weight() - (o.letter(0) != Letter::I) as usize;
                assert!((table[w][o.letter(0) as usize] - exact).abs() < 1e-12, "{o} {mode:?}");
            }
        }
        assert!(d < 1.0);
    }

    #[test]
    fn sampled_converges_to_exact() {
        let c = heis(2, 2).with_total_error(0.5, (1.0, 1.0, 0.0), TwirlMode::Full, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let obs = PauliOp::random(4, true, &mut rng);
            let exact = effective_fidelity_exact(&c, &obs).unwrap();
            let (m, se) = effective_fidelity(&c, &obs, 2000, &mut rng).unwrap();
            assert!((m - exact).abs() <= 3.0 * se.max(1e-12), "{m} {exact} {se}");
        }
    }

    #[test]
    fn non_clifford_angle_refused() {
        let c = build_trotter_circuit(&HamiltonianModel::heisenberg_chain(3), 1, 0.1, false).unwrap();
        assert!(matches!(
            effective_fidelity_exact(&c, &p("XII")),
            Err(TwirlError::Unsupported(_))
        ));
    }

    #[test]
    fn twirl_reduces_bias() {
        let base = heis(3, 4);
        let none = base.with_total_error(1.0, (1.0, 1.0, 0.0), TwirlMode::None, 0.0).unwrap();
        let full = base.with_total_error(1.0, (1.0, 1.0, 0.0), TwirlMode::AnalyticFull, 0.0).unwrap();
        let (bn, _) = average_bias(&none, 200, GadgetAveraging::Exact, 9).unwrap();
        let (bf, _) = average_bias(&full, 200, GadgetAveraging::Exact, 9).unwrap();
        assert!(bf < bn, "{bf} {bn}");
    }

    #[test]
    fn bias_is_deterministic_across_thread_counts() {
        let c = heis(2, 3).with_total_error(1.0, (1.0, 1.0, 0.0), TwirlMode::Ksparse(2), 0.01).unwrap();
        let a = average_bias(&c, 64, GadgetAveraging::Sampled { shots: 3 }, 11).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let b = pool.install(|| average_bias(&c, 64, GadgetAveraging::Sampled { shots: 3 }, 11).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!(TwirlMode::parse("ksparse", Some(2)).unwrap(), TwirlMode::Ksparse(2));
        assert!(TwirlMode::parse("ksparse", None).is_err());
        assert!(TwirlMode::parse("bogus", None).is_err());
        assert!(LayerNoise::uniform(3, 0.1, 0.0, 0.0, TwirlMode::None, 0.1).is_err());
    }
}
