//! Experiment drivers behind the command-line subcommands: typed JSON configs,
//! deterministic CSV tables and run manifests.

use std::time::Instant;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::budget::{error_budget, BudgetInput};
use crate::circuit::{
    average_bias, build_trotter_circuit, optimal_rescale_coefficient, overhead_lower_bound, overhead_pec,
    overhead_rescaling, GadgetAveraging, HamiltonianModel, LogicalCircuit, TwirlMode,
};
use crate::config::json_pointer;
use crate::dense::{run_figs2, run_wn_bound, FigS2Config, WnBoundConfig};
use crate::error::{Result, TwirlError};
use crate::pauli::{Letter, PauliOp};
use crate::twirl::{verify_sampler, SamplerMode};

/// Tool version in `git describe` style, fixed at build time.
pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "-", env!("TWIRLKIT_GIT_DESCRIBE"));

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    TwirlVerify,
    BiasScan,
    GadgetScan,
    Overhead,
    WnBound,
    Figs2,
    Budget,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::TwirlVerify,
        Command::BiasScan,
        Command::GadgetScan,
        Command::Overhead,
        Command::WnBound,
        Command::Figs2,
        Command::Budget,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::TwirlVerify => "twirl-verify",
            Command::BiasScan => "bias-scan",
            Command::GadgetScan => "gadget-scan",
            Command::Overhead => "overhead",
            Command::WnBound => "wn-bound",
            Command::Figs2 => "figs2",
            Command::Budget => "budget",
        }
    }

    /// JSON schema of the subcommand's config file.
    pub fn schema(self) -> &'static str {
        match self {
            Command::TwirlVerify => include_str!("../schemas/twirl-verify.schema.json"),
            Command::BiasScan => include_str!("../schemas/bias-scan.schema.json"),
            Command::GadgetScan => include_str!("../schemas/gadget-scan.schema.json"),
            Command::Overhead => include_str!("../schemas/overhead.schema.json"),
            Command::WnBound => include_str!("../schemas/wn-bound.schema.json"),
            Command::Figs2 => include_str!("../schemas/figs2.schema.json"),
            Command::Budget => include_str!("../schemas/budget.schema.json"),
        }
    }
}

/// Schema every manifest satisfies.
pub const MANIFEST_SCHEMA: &str = include_str!("../schemas/manifest.schema.json");

/// Relative Pauli error weights; scaled so the whole circuit carries `p_tot`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseWeights {
    pub px: f64,
    pub py: f64,
    pub pz: f64,
}

fn default_steps() -> usize {
    100
}

fn default_dt() -> f64 {
    0.1
}

fn default_num_paulis() -> usize {
    1000
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwirlVerifyConfig {
    pub n: usize,
    pub mode: SamplerMode,
    /// Noise Paulis to push through the sampler; defaults to X, Y and Z on qubit 0.
    #[serde(default)]
    pub noise: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BiasScanConfig {
    pub models: Vec<HamiltonianModel>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Replace every rotation by a quarter turn so stabilizer propagation applies.
    #[serde(default = "default_true")]
    pub clifford_sim: bool,
    pub noise: NoiseWeights,
    pub p_tot: f64,
    pub modes: Vec<TwirlMode>,
    /// Gadget noise rate relative to the per-layer error rate.
    #[serde(default)]
    pub gadget_ratio: f64,
    #[serde(default = "default_num_paulis")]
    pub num_paulis: usize,
    #[serde(default)]
    pub averaging: GadgetAveraging,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GadgetScanConfig {
    pub model: HamiltonianModel,
    #[serde(default = "default_steps")]
    pub steps: usize,
    pub noise: NoiseWeights,
    pub p_tot: f64,
    /// Non-sampled modes contribute one row without gadget noise.
    pub modes: Vec<TwirlMode>,
    pub gadget_ratios: Vec<f64>,
    #[serde(default = "default_num_paulis")]
    pub num_paulis: usize,
    #[serde(default)]
    pub averaging: GadgetAveraging,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverheadConfig {
    pub p_err: f64,
    pub n: usize,
    pub l_list: Vec<usize>,
}

/// One row of `bias-scan` or `gadget-scan`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BiasRow {
    pub config_hash: String,
    pub n: usize,
    pub mode: String,
    pub gadget_ratio: f64,
    pub mean_bias: f64,
    pub stderr: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub v: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwirlVerifyRow {
    pub config_hash: String,
    pub n: usize,
    pub mode: String,
    pub noise: String,
    pub outcomes: usize,
    pub max_discrepancy: String,
    pub exact_match: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverheadRow {
    pub config_hash: String,
    pub n: usize,
    pub l: usize,
    pub p_err: f64,
    pub rescaling: f64,
    pub pec: f64,
    pub lower_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WnBoundCsvRow {
    pub config_hash: String,
    pub n: usize,
    pub l: usize,
    pub p_err: f64,
    pub s: f64,
    pub u: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub v: f64,
    pub mean_bias: f64,
    pub stderr: f64,
    pub adapted_mean_bias: f64,
    pub adapted_stderr: f64,
    pub pauli_mean_bias: f64,
    pub pauli_stderr: f64,
    pub theorem_bound: f64,
    pub corollary_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Figs2CsvRow {
    pub config_hash: String,
    pub n: usize,
    pub t: usize,
    pub theta: f64,
    pub l: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub trace_distance: f64,
    pub trace_distance_stderr: f64,
    pub tv_distance: f64,
    pub tv_distance_stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BudgetRow {
    pub config_hash: String,
    pub p_dec: f64,
    pub n_dec: f64,
    pub n_dis: f64,
    pub n_syn: f64,
    pub n_err: f64,
}

/// Provenance written next to every CSV table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub seed: u64,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub csv_file: String,
    pub rows: usize,
    pub threads: usize,
    pub started_unix_ms: u64,
    pub wall_time_ms: u64,
    /// Compute time of each CSV row, kept out of the table so it stays reproducible.
    pub row_runtime_ms: Vec<u64>,
}

/// A finished run: the CSV text and its manifest.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub csv: String,
    pub manifest: Manifest,
}

/// Parsed config with the optional top-level `seed` split off.
struct Parsed<T> {
    config: T,
    seed: Option<u64>,
    canonical: serde_json::Value,
    hash: String,
}

fn config_error(pointer: &str, message: impl Into<String>) -> TwirlError {
    TwirlError::Config {
        pointer: pointer.into(),
        message: message.into(),
    }
}

fn parse_config<T: DeserializeOwned + Serialize>(text: &str) -> Result<Parsed<T>> {
    let mut value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| config_error("/", e.to_string()))?;
    let seed = match value.as_object_mut().and_then(|m| m.remove("seed")) {
        None => None,
        Some(s) => Some(s.as_u64().ok_or_else(|| config_error("/seed", "seed must be a nonnegative integer"))?),
    };
    let config: T = serde_path_to_error::deserialize(value).map_err(|e| TwirlError::Config {
        pointer: json_pointer(e.path()),
        message: e.inner().to_string(),
    })?;
    let canonical = serde_json::to_value(&config).map_err(|e| config_error("/", e.to_string()))?;
    let bytes = serde_json::to_vec(&canonical).expect("values serialize");
    let hash = hex::encode(Sha256::digest(&bytes));
    Ok(Parsed {
        config,
        seed,
        canonical,
        hash,
    })
}

fn write_csv<R: Serialize>(rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| TwirlError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| TwirlError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn ms_since(t: Instant) -> u64 {
    t.elapsed().as_millis() as u64
}

fn check_positive(pointer: &str, v: usize) -> Result<()> {
    if v == 0 {
        Err(config_error(pointer, "must be positive"))
    } else {
        Ok(())
    }
}

fn check_nonempty<T>(pointer: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        Err(config_error(pointer, "must not be empty"))
    } else {
        Ok(())
    }
}

/// Runs one subcommand on config text.
///
/// `seed` overrides the config's `seed`; `threads` sizes a private rayon pool. Results
/// depend only on the config and seed, never on the thread count.
pub fn execute(cmd: Command, config_text: &str, seed: Option<u64>, threads: Option<usize>) -> Result<RunOutput> {
    let started = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0);
    let wall = Instant::now();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(TwirlError::validation("--threads must be positive"));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| TwirlError::Io(e.to_string()))?;
    let nthreads = pool.current_num_threads();
    let (csv, config_seed, canonical, hash, row_ms) = pool.install(|| dispatch(cmd, config_text, seed))?;
    let rows = csv.lines().count().saturating_sub(1);
    Ok(RunOutput {
        csv,
        manifest: Manifest {
            tool: "twirlkit".into(),
            version: VERSION.into(),
            subcommand: cmd.name().into(),
            seed: config_seed,
            config_hash: hash,
            config: canonical,
            csv_file: format!("{}.csv", cmd.name()),
            rows,
            threads: nthreads,
            started_unix_ms: started,
            wall_time_ms: ms_since(wall),
            row_runtime_ms: row_ms,
        },
    })
}

type Dispatched = (String, u64, serde_json::Value, String, Vec<u64>);

fn dispatch(cmd: Command, text: &str, seed_override: Option<u64>) -> Result<Dispatched> {
    macro_rules! finish {
        ($parsed:expr, $rows:expr, $ms:expr) => {{
            let p = $parsed;
            Ok((write_csv(&$rows)?, seed_override.or(p.seed).unwrap_or(0), p.canonical, p.hash, $ms))
        }};
    }
    match cmd {
        Command::TwirlVerify => {
            let p: Parsed<TwirlVerifyConfig> = parse_config(text)?;
            let (rows, ms) = twirl_verify(&p.config, &p.hash)?;
            finish!(p, rows, ms)
        }
        Command::BiasScan => {
            let p: Parsed<BiasScanConfig> = parse_config(text)?;
            let seed = seed_override.or(p.seed).unwrap_or(0);
            let (rows, ms) = bias_scan(&p.config, seed, &p.hash)?;
            finish!(p, rows, ms)
        }
        Command::GadgetScan => {
            let p: Parsed<GadgetScanConfig> = parse_config(text)?;
            let seed = seed_override.or(p.seed).unwrap_or(0);
            let (rows, ms) = gadget_scan(&p.config, seed, &p.hash)?;
            finish!(p, rows, ms)
        }
        Command::Overhead => {
            let p: Parsed<OverheadConfig> = parse_config(text)?;
            let (rows, ms) = overhead(&p.config, &p.hash)?;
            finish!(p, rows, ms)
        }
        Command::WnBound => {
            let p: Parsed<WnBoundConfig> = parse_config(text)?;
            let seed = seed_override.or(p.seed).unwrap_or(0);
            check_positive("/n", p.config.n)?;
            check_nonempty("/l_list", &p.config.l_list)?;
            let t = Instant::now();
            let rows: Vec<WnBoundCsvRow> = run_wn_bound(&p.config, seed)?
                .into_iter()
                .map(|r| WnBoundCsvRow {
                    config_hash: p.hash.clone(),
                    n: r.n,
                    l: r.l,
                    p_err: r.p_err,
                    s: r.s,
                    u: r.u,
                    r: r.r,
                    v: r.v,
                    mean_bias: r.mean_bias,
                    stderr: r.stderr,
                    adapted_mean_bias: r.adapted_mean_bias,
                    adapted_stderr: r.adapted_stderr,
                    pauli_mean_bias: r.pauli_mean_bias,
                    pauli_stderr: r.pauli_stderr,
                    theorem_bound: r.theorem_bound,
                    corollary_bound: r.corollary_bound,
                })
                .collect();
            let ms = even_split(ms_since(t), rows.len());
            finish!(p, rows, ms)
        }
        Command::Figs2 => {
            let p: Parsed<FigS2Config> = parse_config(text)?;
            let seed = seed_override.or(p.seed).unwrap_or(0);
            check_nonempty("/n_list", &p.config.n_list)?;
            check_nonempty("/t_list", &p.config.t_list)?;
            let t = Instant::now();
            let rows: Vec<Figs2CsvRow> = run_figs2(&p.config, seed)?
                .into_iter()
                .map(|r| Figs2CsvRow {
                    config_hash: p.hash.clone(),
                    n: r.n,
                    t: r.t,
                    theta: r.theta,
                    l: r.l,
                    r: r.r,
                    trace_distance: r.trace_distance,
                    trace_distance_stderr: r.trace_distance_stderr,
                    tv_distance: r.tv_distance,
                    tv_distance_stderr: r.tv_distance_stderr,
                })
                .collect();
            let ms = even_split(ms_since(t), rows.len());
            finish!(p, rows, ms)
        }
        Command::Budget => {
            let p: Parsed<BudgetInput> = parse_config(text)?;
            let t = Instant::now();
            let out = error_budget(&p.config)?;
            let rows = [BudgetRow {
                config_hash: p.hash.clone(),
                p_dec: out.p_dec,
                n_dec: out.n_dec,
                n_dis: out.n_dis,
                n_syn: out.n_syn,
                n_err: out.n_err,
            }];
            let ms = vec![ms_since(t)];
            finish!(p, rows, ms)
        }
    }
}

/// Rows computed in one batch share its runtime evenly.
fn even_split(total: u64, rows: usize) -> Vec<u64> {
    vec![total / rows.max(1) as u64; rows]
}

fn twirl_verify(cfg: &TwirlVerifyConfig, hash: &str) -> Result<(Vec<TwirlVerifyRow>, Vec<u64>)> {
    check_positive("/n", cfg.n)?;
    let noise: Vec<PauliOp> = if cfg.noise.is_empty() {
        [Letter::X, Letter::Y, Letter::Z]
            .into_iter()
            .map(|l| PauliOp::single(cfg.n, 0, l))
            .collect()
    } else {
        cfg.noise
            .iter()
            .enumerate()
            .map(|(i, s)| {
                PauliOp::parse(s).map_err(|e| config_error(&format!("/noise/{i}"), e.to_string()))
            })
            .collect::<Result<_>>()?
    };
    let mode = match cfg.mode {
        SamplerMode::Full => "full".to_string(),
        SamplerMode::Ksparse(k) => format!("ksparse{k}"),
    };
    let mut rows = Vec::new();
    let mut ms = Vec::new();
    for p in &noise {
        let t = Instant::now();
        let v = verify_sampler(cfg.n, cfg.mode, p)?;
        rows.push(TwirlVerifyRow {
            config_hash: hash.into(),
            n: v.n,
            mode: mode.clone(),
            noise: p.to_string(),
            outcomes: v.outcomes,
            max_discrepancy: v.max_discrepancy,
            exact_match: v.exact_match,
        });
        ms.push(ms_since(t));
    }
    Ok((rows, ms))
}

fn layer_v(c: &LogicalCircuit) -> Result<f64> {
    let Some(r) = c.rotations().next() else {
        return Ok(0.0);
    };
    let noise = r.noise();
    if noise.base().p_err() == 0.0 {
        return Ok(0.0);
    }
    match noise.twirled() {
        Some(ch) => ch.distance_v(),
        None => noise.base().distance_v(),
    }
}

#[allow(clippy::too_many_arguments)]
fn bias_row(
    base: &LogicalCircuit,
    noise: NoiseWeights,
    p_tot: f64,
    mode: TwirlMode,
    gadget_ratio: f64,
    num_paulis: usize,
    averaging: GadgetAveraging,
    seed: u64,
    hash: &str,
) -> Result<BiasRow> {
    let ratio = if p_tot == 0.0 { 0.0 } else { gadget_ratio };
    let weights = if noise.px + noise.py + noise.pz > 0.0 {
        (noise.px, noise.py, noise.pz)
    } else {
        (1.0, 0.0, 0.0)
    };
    let c = base.with_total_error(p_tot, weights, mode, ratio)?;
    let (mean_bias, stderr) = average_bias(&c, num_paulis, averaging, seed)?;
    Ok(BiasRow {
        config_hash: hash.into(),
        n: c.num_qubits(),
        mode: mode.label(),
        gadget_ratio: ratio,
        mean_bias,
        stderr,
        r: optimal_rescale_coefficient(&c)?,
        v: layer_v(&c)?,
    })
}

fn check_noise(noise: &NoiseWeights, p_tot: f64) -> Result<()> {
    for (name, v) in [("px", noise.px), ("py", noise.py), ("pz", noise.pz)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(config_error(&format!("/noise/{name}"), "must be a finite nonnegative weight"));
        }
    }
    if !(p_tot >= 0.0 && p_tot.is_finite()) {
        return Err(config_error("/p_tot", "must be a finite nonnegative number"));
    }
    if p_tot > 0.0 && noise.px + noise.py + noise.pz == 0.0 {
        return Err(config_error("/noise", "weights must not all vanish when p_tot > 0"));
    }
    Ok(())
}

fn bias_scan(cfg: &BiasScanConfig, seed: u64, hash: &str) -> Result<(Vec<BiasRow>, Vec<u64>)> {
    check_nonempty("/models", &cfg.models)?;
    check_nonempty("/modes", &cfg.modes)?;
    check_positive("/num_paulis", cfg.num_paulis)?;
    check_noise(&cfg.noise, cfg.p_tot)?;
    let mut rows = Vec::new();
    let mut ms = Vec::new();
    for (i, model) in cfg.models.iter().enumerate() {
        let base = build_trotter_circuit(model, cfg.steps, cfg.dt, cfg.clifford_sim)
            .map_err(|e| config_error(&format!("/models/{i}"), e.to_string()))?;
        for &mode in &cfg.modes {
            let t = Instant::now();
            let ratio = if mode.is_sampled() { cfg.gadget_ratio } else { 0.0 };
            rows.push(bias_row(&base, cfg.noise, cfg.p_tot, mode, ratio, cfg.num_paulis, cfg.averaging, seed, hash)?);
            ms.push(ms_since(t));
        }
    }
    Ok((rows, ms))
}

fn gadget_scan(cfg: &GadgetScanConfig, seed: u64, hash: &str) -> Result<(Vec<BiasRow>, Vec<u64>)> {
    check_nonempty("/modes", &cfg.modes)?;
    check_positive("/num_paulis", cfg.num_paulis)?;
    check_noise(&cfg.noise, cfg.p_tot)?;
    for (i, &g) in cfg.gadget_ratios.iter().enumerate() {
        if !(g >= 0.0 && g.is_finite()) {
            return Err(config_error(&format!("/gadget_ratios/{i}"), "must be a finite nonnegative ratio"));
        }
    }
    let base = build_trotter_circuit(&cfg.model, cfg.steps, 0.1, true)
        .map_err(|e| config_error("/model", e.to_string()))?;
    let mut rows = Vec::new();
    let mut ms = Vec::new();
    for &mode in &cfg.modes {
        let ratios: &[f64] = if mode.is_sampled() { &cfg.gadget_ratios } else { &[0.0] };
        for &g in ratios {
            let t = Instant::now();
            rows.push(bias_row(&base, cfg.noise, cfg.p_tot, mode, g, cfg.num_paulis, cfg.averaging, seed, hash)?);
            ms.push(ms_since(t));
        }
    }
    Ok((rows, ms))
}

fn overhead(cfg: &OverheadConfig, hash: &str) -> Result<(Vec<OverheadRow>, Vec<u64>)> {
    check_positive("/n", cfg.n)?;
    check_nonempty("/l_list", &cfg.l_list)?;
    let mut rows = Vec::new();
    let mut ms = Vec::new();
    for &l in &cfg.l_list {
        let t = Instant::now();
        rows.push(OverheadRow {
            config_hash: hash.into(),
            n: cfg.n,
            l,
            p_err: cfg.p_err,
            rescaling: overhead_rescaling(cfg.p_err, l, cfg.n)?,
            pec: overhead_pec(cfg.p_err, l)?,
            lower_bound: overhead_lower_bound(cfg.p_err, l, cfg.n)?,
        });
        ms.push(ms_since(t));
    }
    Ok((rows, ms))
}

/// Process exit code for an error: 2 for bad configs, 3 for exceeded caps, 1 otherwise.
pub fn exit_code(e: &TwirlError) -> i32 {
    match e {
        TwirlError::Config { .. } | TwirlError::Validation(_) | TwirlError::Parse { .. } => 2,
        TwirlError::CapExceeded { .. } => 3,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_is_split_off_and_hash_ignores_it() {
        let a: Parsed<OverheadConfig> = parse_config(r#"{"p_err":0.001,"n":4,"l_list":[10],"seed":7}"#).unwrap();
        let b: Parsed<OverheadConfig> = parse_config(r#"{"l_list":[10],"n":4,"p_err":0.001}"#).unwrap();
        assert_eq!(a.seed, Some(7));
        assert_eq!(b.seed, None);
        assert_eq!(a.hash, b.hash);
        assert_eq!(a.hash.len(), 64);
    }

    #[test]
    fn config_errors_carry_pointers() {
        let e = execute(Command::Overhead, r#"{"p_err":0.001,"n":4,"l_list":[10, "x"]}"#, None, Some(1)).unwrap_err();
        match &e {
            TwirlError::Config { pointer, .. } => assert_eq!(pointer, "/l_list/1"),
            other => panic!("{other:?}"),
        }
        assert_eq!(exit_code(&e), 2);
        let e = execute(Command::Budget, r#"{"p_phys":1e-3,"p_th":1e-2,"d":13,"volume":0,"p_dis":0,"n_t":0,"p_rot":0,"n_rot":0,"extra":1}"#, None, None).unwrap_err();
        assert_eq!(exit_code(&e), 2);
        let e = execute(Command::TwirlVerify, r#"{"n":5,"mode":"full"}"#, None, None).unwrap_err();
        assert_eq!(exit_code(&e), 3);
    }

    #[test]
    fn budget_table() {
        let out = execute(
            Command::Budget,
            r#"{"p_phys":1e-3,"p_th":1e-2,"d":13,"volume":0,"p_dis":0,"n_t":0,"p_rot":0,"n_rot":0}"#,
            Some(3),
            Some(1),
        )
        .unwrap();
        let mut lines = out.csv.lines();
        assert_eq!(lines.next(), Some("config_hash,p_dec,n_dec,n_dis,n_syn,n_err"));
        assert!(lines.next().unwrap().ends_with(",1e-8,0.0,0.0,0.0,0.0"));
        assert_eq!(out.manifest.seed, 3);
        assert_eq!(out.manifest.rows, 1);
    }

    #[test]
    fn noiseless_bias_scan_is_zero() {
        let cfg = r#"{"models":[{"kind":"Heisenberg1D","l":3}],"steps":2,"noise":{"px":1,"py":1,"pz":0},
                      "p_tot":0,"modes":["none","analytic_full"],"num_paulis":20}"#;
        let out = execute(Command::BiasScan, cfg, Some(1), Some(1)).unwrap();
        let mut rdr = csv::Reader::from_reader(out.csv.as_bytes());
        let mut count = 0;
        for rec in rdr.records() {
            let rec = rec.unwrap();
            assert_eq!(&rec[4], "0.0");
            count += 1;
        }
        assert_eq!(count, 2);
    }
}
