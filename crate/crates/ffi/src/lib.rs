//! C ABI for twirlkit.
//!
//! Objects cross the boundary as opaque handles. Constructors write a new handle
//! through an `out` pointer and the matching `tk_*_free` releases it. Every fallible
//! function returns a [`TkStatus`]; on failure the message is available from
//! [`tk_last_error_message`] on the same thread. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::OnceLock;

use twirlkit::channel::{make_single_qubit_pauli_noise, make_white_noise};
use twirlkit::circuit::{
    average_bias, build_trotter_circuit, effective_fidelity_exact, optimal_rescale_coefficient, overhead_lower_bound,
    overhead_pec, overhead_rescaling, GadgetAveraging, HamiltonianModel, LogicalCircuit, TwirlMode,
};
use twirlkit::config::from_json_str;
use twirlkit::reports::{execute, Command};
use twirlkit::twirl::{twirl_channel, twirl_channel_ksparse, SymmetrySpec};
use twirlkit::{PauliChannel, PauliOp, TwirlError};

/// Status code returned by every fallible call. Zero means success.
#[repr(i32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Validation = 4,
    Dimension = 5,
    Unsupported = 6,
    CapExceeded = 7,
    Degenerate = 8,
    Config = 9,
    Io = 10,
    UndefinedDistance = 11,
    Panic = 12,
}

/// How rotation-layer noise is twirled. Passed to C functions as `int32_t`.
#[repr(i32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TkTwirlMode {
    None = 0,
    Full = 1,
    Ksparse = 2,
    AnalyticFull = 3,
    AnalyticKsparse = 4,
}

/// Report kinds accepted by `tk_run_report`, passed as `int32_t`.
#[repr(i32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TkReport {
    TwirlVerify = 0,
    BiasScan = 1,
    GadgetScan = 2,
    Overhead = 3,
    WnBound = 4,
    Figs2 = 5,
    Budget = 6,
}

pub struct TkPauli(PauliOp);
pub struct TkChannel(PauliChannel);
pub struct TkCircuit(LogicalCircuit);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Failure {
    Null(&'static str),
    Utf8(&'static str),
    Twirl(TwirlError),
}

impl From<TwirlError> for Failure {
    fn from(e: TwirlError) -> Self {
        Failure::Twirl(e)
    }
}

impl Failure {
    fn status(&self) -> TkStatus {
        match self {
            Failure::Null(_) => TkStatus::NullPointer,
            Failure::Utf8(_) => TkStatus::InvalidUtf8,
            Failure::Twirl(e) => match e {
                TwirlError::Dimension { .. } => TkStatus::Dimension,
                TwirlError::Parse { .. } => TkStatus::Parse,
                TwirlError::Validation(_) => TkStatus::Validation,
                TwirlError::UndefinedDistance => TkStatus::UndefinedDistance,
                TwirlError::CapExceeded { .. } => TkStatus::CapExceeded,
                TwirlError::Unsupported(_) => TkStatus::Unsupported,
                TwirlError::Degenerate(_) => TkStatus::Degenerate,
                TwirlError::Config { .. } => TkStatus::Config,
                TwirlError::Io(_) => TkStatus::Io,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Null(what) => format!("null pointer passed for {what}"),
            Failure::Utf8(what) => format!("{what} is not valid UTF-8"),
            Failure::Twirl(e) => e.to_string(),
        }
    }
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, converting errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> TkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TkStatus::Ok,
        Ok(Err(e)) => {
            set_last_error(e.message());
            e.status()
        }
        Err(payload) => {
            let what = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {what}"));
            TkStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::Utf8(what))
}

unsafe fn write<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_handle<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    write(out, Box::into_raw(Box::new(value)), "out")
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let c = CString::new(s).map_err(|_| Failure::Utf8("output string"))?;
    write(out, c.into_raw(), "out")
}

unsafe fn free_handle<T>(p: *mut T) {
    if !p.is_null() {
        let _ = catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(p))));
    }
}

fn invalid(what: &str, v: i32) -> Failure {
    Failure::Twirl(TwirlError::Validation(format!("unknown {what} code {v}")))
}

fn twirl_mode(mode: i32, k: usize) -> Result<TwirlMode, Failure> {
    Ok(match mode {
        x if x == TkTwirlMode::None as i32 => TwirlMode::None,
        x if x == TkTwirlMode::Full as i32 => TwirlMode::Full,
        x if x == TkTwirlMode::Ksparse as i32 => TwirlMode::Ksparse(k),
        x if x == TkTwirlMode::AnalyticFull as i32 => TwirlMode::AnalyticFull,
        x if x == TkTwirlMode::AnalyticKsparse as i32 => TwirlMode::AnalyticKsparse(k),
        other => return Err(invalid("twirl mode", other)),
    })
}

fn report_command(report: i32) -> Result<Command, Failure> {
    Ok(match report {
        x if x == TkReport::TwirlVerify as i32 => Command::TwirlVerify,
        x if x == TkReport::BiasScan as i32 => Command::BiasScan,
        x if x == TkReport::GadgetScan as i32 => Command::GadgetScan,
        x if x == TkReport::Overhead as i32 => Command::Overhead,
        x if x == TkReport::WnBound as i32 => Command::WnBound,
        x if x == TkReport::Figs2 as i32 => Command::Figs2,
        x if x == TkReport::Budget as i32 => Command::Budget,
        other => return Err(invalid("report", other)),
    })
}

// ---- library-wide ----

/// Library version; a static string owned by the library.
#[no_mangle]
pub extern "C" fn tk_version() -> *const c_char {
    static V: OnceLock<CString> = OnceLock::new();
    V.get_or_init(|| CString::new(twirlkit::reports::VERSION).expect("no NUL in version"))
        .as_ptr()
}

/// Message of the last failed call on this thread, or NULL. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn tk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned through an `out` parameter. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn tk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// ---- Pauli operators ----

/// Parses a Pauli string such as `"-iXYZ"`.
///
/// # Safety
/// `s` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tk_pauli_parse(s: *const c_char, out: *mut *mut TkPauli) -> TkStatus {
    guard(|| {
        let p = PauliOp::parse(text(s, "text")?)?;
        write_handle(out, TkPauli(p))
    })
}

/// # Safety
/// `p` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tk_pauli_free(p: *mut TkPauli) {
    free_handle(p)
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_pauli_num_qubits(p: *const TkPauli, out: *mut usize) -> TkStatus {
    guard(|| write(out, borrow(p, "pauli")?.0.num_qubits(), "out"))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_pauli_weight(p: *const TkPauli, out: *mut usize) -> TkStatus {
    guard(|| write(out, borrow(p, "pauli")?.0.weight(), "out"))
}

/// Canonical string form; free the result with `tk_string_free`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_pauli_to_string(p: *const TkPauli, out: *mut *mut c_char) -> TkStatus {
    guard(|| write_string(out, borrow(p, "pauli")?.0.to_string()))
}

/// Product `a b` with exact phase.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_pauli_mul(a: *const TkPauli, b: *const TkPauli, out: *mut *mut TkPauli) -> TkStatus {
    guard(|| {
        let p = borrow(a, "a")?.0.mul(&borrow(b, "b")?.0)?;
        write_handle(out, TkPauli(p))
    })
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_pauli_commutes(a: *const TkPauli, b: *const TkPauli, out: *mut bool) -> TkStatus {
    guard(|| {
        let c = borrow(a, "a")?.0.commutes(&borrow(b, "b")?.0)?;
        write(out, c, "out")
    })
}

// ---- Pauli channels ----

/// Pauli noise `(px, py, pz)` on one qubit of an `n`-qubit register.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tk_channel_single_qubit(
    n: usize,
    qubit: usize,
    px: f64,
    py: f64,
    pz: f64,
    out: *mut *mut TkChannel,
) -> TkStatus {
    guard(|| write_handle(out, TkChannel(make_single_qubit_pauli_noise(n, qubit, px, py, pz)?)))
}

/// Global white noise with error probability `p_err`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tk_channel_white_noise(n: usize, p_err: f64, out: *mut *mut TkChannel) -> TkStatus {
    guard(|| write_handle(out, TkChannel(make_white_noise(n, p_err)?)))
}

/// # Safety
/// `json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tk_channel_from_json(json: *const c_char, out: *mut *mut TkChannel) -> TkStatus {
    guard(|| write_handle(out, TkChannel(PauliChannel::from_json(text(json, "json")?)?)))
}

/// Free the result with `tk_string_free`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_channel_to_json(ch: *const TkChannel, out: *mut *mut c_char) -> TkStatus {
    guard(|| write_string(out, borrow(ch, "channel")?.0.to_json()))
}

/// # Safety
/// `ch` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tk_channel_free(ch: *mut TkChannel) {
    free_handle(ch)
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_channel_num_qubits(ch: *const TkChannel, out: *mut usize) -> TkStatus {
    guard(|| write(out, borrow(ch, "channel")?.0.num_qubits(), "out"))
}

/// Total probability of a non-identity error.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_channel_p_err(ch: *const TkChannel, out: *mut f64) -> TkStatus {
    guard(|| write(out, borrow(ch, "channel")?.0.p_err(), "out"))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_channel_pauli_fidelity(ch: *const TkChannel, p: *const TkPauli, out: *mut f64) -> TkStatus {
    guard(|| {
        let f = borrow(ch, "channel")?.0.pauli_fidelity(&borrow(p, "pauli")?.0)?;
        write(out, f, "out")
    })
}

/// 2-norm distance of the normalized error distribution from uniform.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_channel_distance_v(ch: *const TkChannel, out: *mut f64) -> TkStatus {
    guard(|| write(out, borrow(ch, "channel")?.0.distance_v()?, "out"))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_channel_unitarity(ch: *const TkChannel, out: *mut f64) -> TkStatus {
    guard(|| write(out, borrow(ch, "channel")?.0.unitarity()?, "out"))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_channel_avg_noise_strength(ch: *const TkChannel, out: *mut f64) -> TkStatus {
    guard(|| write(out, borrow(ch, "channel")?.0.avg_noise_strength(), "out"))
}

/// Exact twirl over the Cliffords that commute with Z on qubit 0.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_channel_twirl_rz(ch: *const TkChannel, out: *mut *mut TkChannel) -> TkStatus {
    guard(|| {
        let ch = &borrow(ch, "channel")?.0;
        let spec = SymmetrySpec::rz_first_qubit(ch.num_qubits())?;
        write_handle(out, TkChannel(twirl_channel(ch, &spec)?))
    })
}

/// Exact twirl by the k-sparse gadget sampler; the noise must act on qubit 0.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_channel_twirl_ksparse(ch: *const TkChannel, k: usize, out: *mut *mut TkChannel) -> TkStatus {
    guard(|| {
        let ch = &borrow(ch, "channel")?.0;
        let spec = SymmetrySpec::rz_first_qubit(ch.num_qubits())?;
        write_handle(out, TkChannel(twirl_channel_ksparse(ch, &spec, k)?))
    })
}

// ---- circuits ----

/// Noiseless Trotter circuit for a Hamiltonian model given as JSON,
/// e.g. `{"kind":"Heisenberg1D","l":6}`.
///
/// # Safety
/// `model_json` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tk_circuit_trotter(
    model_json: *const c_char,
    steps: usize,
    dt: f64,
    clifford_sim: bool,
    out: *mut *mut TkCircuit,
) -> TkStatus {
    guard(|| {
        let model: HamiltonianModel = from_json_str(text(model_json, "model_json")?)?;
        model.validate()?;
        write_handle(out, TkCircuit(build_trotter_circuit(&model, steps, dt, clifford_sim)?))
    })
}

/// Copy of `c` with single-qubit noise of total rate `p_tot / L` on every rotation,
/// split in the ratio `(wx, wy, wz)`. `k` is read only by the sparse modes.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_circuit_with_total_error(
    c: *const TkCircuit,
    p_tot: f64,
    wx: f64,
    wy: f64,
    wz: f64,
    mode: i32,
    k: usize,
    gadget_ratio: f64,
    out: *mut *mut TkCircuit,
) -> TkStatus {
    guard(|| {
        let noisy = borrow(c, "circuit")?
            .0
            .with_total_error(p_tot, (wx, wy, wz), twirl_mode(mode, k)?, gadget_ratio)?;
        write_handle(out, TkCircuit(noisy))
    })
}

/// # Safety
/// `c` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tk_circuit_free(c: *mut TkCircuit) {
    free_handle(c)
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_circuit_num_qubits(c: *const TkCircuit, out: *mut usize) -> TkStatus {
    guard(|| write(out, borrow(c, "circuit")?.0.num_qubits(), "out"))
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_circuit_num_rotations(c: *const TkCircuit, out: *mut usize) -> TkStatus {
    guard(|| write(out, borrow(c, "circuit")?.0.num_rotations(), "out"))
}

/// Optimal rescaling coefficient `R`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_circuit_rescale_coefficient(c: *const TkCircuit, out: *mut f64) -> TkStatus {
    guard(|| write(out, optimal_rescale_coefficient(&borrow(c, "circuit")?.0)?, "out"))
}

/// Effective Pauli fidelity of observable `p`, with sampled twirl layers averaged exactly.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_circuit_effective_fidelity(
    c: *const TkCircuit,
    p: *const TkPauli,
    out: *mut f64,
) -> TkStatus {
    guard(|| {
        let f = effective_fidelity_exact(&borrow(c, "circuit")?.0, &borrow(p, "pauli")?.0)?;
        write(out, f, "out")
    })
}

/// Mean rescaled bias over `num_paulis` random observables, and its standard error.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn tk_circuit_average_bias(
    c: *const TkCircuit,
    num_paulis: usize,
    seed: u64,
    mean: *mut f64,
    stderr: *mut f64,
) -> TkStatus {
    guard(|| {
        let (m, s) = average_bias(&borrow(c, "circuit")?.0, num_paulis, GadgetAveraging::Exact, seed)?;
        write(mean, m, "mean")?;
        write(stderr, s, "stderr")
    })
}

// ---- closed forms ----

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tk_overhead_rescaling(p_err: f64, l: usize, n: usize, out: *mut f64) -> TkStatus {
    guard(|| write(out, overhead_rescaling(p_err, l, n)?, "out"))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tk_overhead_pec(p_err: f64, l: usize, out: *mut f64) -> TkStatus {
    guard(|| write(out, overhead_pec(p_err, l)?, "out"))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tk_overhead_lower_bound(p_err: f64, l: usize, n: usize, out: *mut f64) -> TkStatus {
    guard(|| write(out, overhead_lower_bound(p_err, l, n)?, "out"))
}

// ---- reports ----

/// Runs a report from its JSON config, like the command-line tool. `seed` may be NULL
/// to use the config's seed; `threads == 0` picks the default. Both outputs must be
/// freed with `tk_string_free`.
///
/// # Safety
/// `config_json` must be NUL-terminated; `csv_out` and `manifest_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tk_run_report(
    report: i32,
    config_json: *const c_char,
    seed: *const u64,
    threads: usize,
    csv_out: *mut *mut c_char,
    manifest_out: *mut *mut c_char,
) -> TkStatus {
    guard(|| {
        if csv_out.is_null() || manifest_out.is_null() {
            return Err(Failure::Null("outputs"));
        }
        let cmd = report_command(report)?;
        let seed = seed.as_ref().copied();
        let threads = (threads > 0).then_some(threads);
        let run = execute(cmd, text(config_json, "config_json")?, seed, threads)?;
        let manifest = serde_json::to_string_pretty(&run.manifest).expect("manifest serializes");
        write_string(csv_out, run.csv)?;
        write_string(manifest_out, manifest)
    })
}
