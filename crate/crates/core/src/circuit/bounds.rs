//! Closed-form sampling overheads and bias bounds.

use crate::error::{Result, TwirlError};

fn check_rate(p_err: f64) -> Result<()> {
    if (0.0..1.0).contains(&p_err) {
        Ok(())
    } else {
        Err(TwirlError::validation(format!("p_err = {p_err} outside [0, 1)")))
    }
}

fn white_factor(n: usize) -> f64 {
    let d2 = 4f64.powi(n as i32);
    d2 / (d2 - 1.0)
}

/// Rescaling overhead `(1 - 4^n/(4^n-1) p)^{-2L}`.
pub fn overhead_rescaling(p_err: f64, l: usize, n: usize) -> Result<f64> {
    check_rate(p_err)?;
    let base = 1.0 - white_factor(n) * p_err;
    if base <= 0.0 {
        return Err(TwirlError::Degenerate(format!(
            "p_err = {p_err} leaves no signal at n = {n}"
        )));
    }
    Ok((-2.0 * l as f64 * base.ln()).exp())
}

/// Probabilistic error cancellation overhead `(1 + 2p)^{2L}`.
pub fn overhead_pec(p_err: f64, l: usize) -> Result<f64> {
    check_rate(p_err)?;
    Ok((2.0 * l as f64 * (2.0 * p_err).ln_1p()).exp())
}

/// Lower bound `(1 + 2 p 4^n/(4^n-1))^L - (2^n - 2)/(4^n - 1)` on any unbiased mitigation.
pub fn overhead_lower_bound(p_err: f64, l: usize, n: usize) -> Result<f64> {
    check_rate(p_err)?;
    let d2 = 4f64.powi(n as i32);
    let d = 2f64.powi(n as i32);
    Ok((l as f64 * (2.0 * p_err * white_factor(n)).ln_1p()).exp() - (d - 2.0) / (d2 - 1.0))
}

/// Expected bias bound `sqrt((2^n-1)/(2^n+1) (1 - (s^2/u)^L))` for random Clifford layers.
pub fn whitenoise_bias_bound(s: f64, u: f64, l: usize, n: usize) -> Result<f64> {
    if !(u > 0.0 && u <= 1.0 + 1e-12) || !(0.0..=1.0 + 1e-12).contains(&s) {
        return Err(TwirlError::validation(format!("need 0 < u <= 1 and 0 <= s <= 1, got s = {s}, u = {u}")));
    }
    let d = 2f64.powi(n as i32);
    let decay = (l as f64 * (s * s / u).ln()).exp();
    Ok(((d - 1.0) / (d + 1.0) * (1.0 - decay).max(0.0)).sqrt())
}

/// Large-L bias estimate `v p_tot / sqrt(L)`.
pub fn corollary_bound(v: f64, p_tot: f64, l: usize) -> Result<f64> {
    if l == 0 {
        return Err(TwirlError::validation("L must be positive"));
    }
    Ok(v * p_tot / (l as f64).sqrt())
}
