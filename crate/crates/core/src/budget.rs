//! Logical error budget of an early fault-tolerant computation.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TwirlError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetInput {
    /// Physical error rate.
    pub p_phys: f64,
    /// Code threshold.
    pub p_th: f64,
    /// Code distance, odd.
    pub d: u32,
    /// Circuit volume in logical qubit-rounds.
    pub volume: f64,
    /// Error per distilled magic state.
    pub p_dis: f64,
    pub n_t: f64,
    /// Synthesis error per rotation.
    pub p_rot: f64,
    pub n_rot: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BudgetOutput {
    pub p_dec: f64,
    pub n_dec: f64,
    pub n_dis: f64,
    pub n_syn: f64,
    pub n_err: f64,
}

/// `p_dec = 0.1 (p/p_th)^{(d+1)/2}`, `N_dec = d p_dec V`, `N_dis = p_dis n_T`,
/// `N_syn = p_rot N_rot`, and their sum.
pub fn error_budget(b: &BudgetInput) -> Result<BudgetOutput> {
    if b.p_th <= 0.0 {
        return Err(TwirlError::validation("p_th must be positive"));
    }
    if b.d.is_multiple_of(2) {
        return Err(TwirlError::validation(format!("code distance {} must be odd", b.d)));
    }
    for (name, v) in [
        ("p_phys", b.p_phys),
        ("volume", b.volume),
        ("p_dis", b.p_dis),
        ("n_t", b.n_t),
        ("p_rot", b.p_rot),
        ("n_rot", b.n_rot),
    ] {
        if !(v >= 0.0 && v.is_finite()) || !b.p_th.is_finite() {
            return Err(TwirlError::validation(format!("{name} must be a finite nonnegative number")));
        }
    }
    // Exact rational power of the float inputs, rounded once.
    let ratio = BigRational::from_float(b.p_phys).expect("finite")
        / BigRational::from_float(b.p_th).expect("finite");
    let p_dec = (num_traits::pow(ratio, b.d.div_ceil(2) as usize) / BigRational::from_integer(10.into()))
        .to_f64()
        .unwrap_or(f64::INFINITY);
    let n_dec = b.d as f64 * p_dec * b.volume;
    let n_dis = b.p_dis * b.n_t;
    let n_syn = b.p_rot * b.n_rot;
    Ok(BudgetOutput {
        p_dec,
        n_dec,
        n_dis,
        n_syn,
        n_err: n_dec + n_dis + n_syn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn input() -> BudgetInput {
        BudgetInput {
            p_phys: 1e-3,
            p_th: 1e-2,
            d: 13,
            volume: 0.0,
            p_dis: 0.0,
            n_t: 0.0,
            p_rot: 0.0,
            n_rot: 0.0,
        }
    }

    #[test]
    fn worked_value() {
        let out = error_budget(&input()).unwrap();
        assert_eq!(out.p_dec, 1e-8);
        assert_eq!((out.n_dec, out.n_dis, out.n_syn, out.n_err), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn components_add_up() {
        let b = BudgetInput {
            volume: 1e6,
            p_dis: 1e-9,
            n_t: 1e4,
            p_rot: 1e-8,
            n_rot: 3e3,
            ..input()
        };
        let out = error_budget(&b).unwrap();
        assert_eq!(out.n_err, out.n_dec + out.n_dis + out.n_syn);
        assert!(error_budget(&BudgetInput { d: 12, ..input() }).is_err());
        assert!(error_budget(&BudgetInput { p_th: 0.0, ..input() }).is_err());
        assert!(error_budget(&BudgetInput { n_t: -1.0, ..input() }).is_err());
    }
}
