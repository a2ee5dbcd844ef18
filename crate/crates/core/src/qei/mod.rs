//! The state-independent lower bound E ≥ −(K₀ + K_V + K_H) and its verification against the
//! truncated perturbative energy density.

pub mod decomposition;
pub mod free;
pub mod majorants;

pub use decomposition::{decomposition_check, DecompositionReport};
pub use free::{delta_diag, delta_limit, delta_offdiag, h0_integral, h_delta_diag, k0, H0Result};
pub use majorants::{c_k, kh_majorant, kv_majorant, vertex_growth, BoundOptions, Majorant};

use crate::error::{Error, Result};
use crate::geometry::Worldline;
use crate::series::{majorant, order_value, McConfig, ModelParams, TermEstimate, TimeWeight};
use crate::smearing::SmearingFunction;
use crate::states::StateW;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Satisfied,
    /// E + K lies more than 3σ below zero.
    ViolatedWithinError,
    /// A term estimate is flagged or K is not finite.
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Satisfied => "satisfied",
            Verdict::ViolatedWithinError => "violated_within_error",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QeiReport {
    pub k0_straight: f64,
    pub k0_accel: f64,
    pub kv: Majorant,
    pub kh: Majorant,
    pub e_truncated: Vec<TermEstimate>,
    pub verdict: Verdict,
}

impl QeiReport {
    pub fn k0(&self) -> f64 {
        self.k0_straight + self.k0_accel
    }

    pub fn k_total(&self) -> f64 {
        self.k0() + self.kv.value + self.kh.value
    }

    pub fn energy(&self) -> f64 {
        self.e_truncated.iter().map(|t| t.value).sum()
    }

    pub fn sigma(&self) -> f64 {
        self.e_truncated.iter().map(|t| t.std_error.powi(2)).sum::<f64>().sqrt()
    }

    /// Verdict recomputed from the other fields.
    pub fn derive_verdict(&self) -> Verdict {
        if self.e_truncated.iter().any(|t| t.flagged) || !self.k_total().is_finite() {
            Verdict::Inconclusive
        } else if self.energy() + self.k_total() >= -3.0 * self.sigma() {
            Verdict::Satisfied
        } else {
            Verdict::ViolatedWithinError
        }
    }
}

/// E_truncated over orders ≤ max_order with f² smearing, K = K₀ + K_V + K_H, and the verdict.
pub fn qei_verify(
    state: &StateW,
    wl: &Worldline,
    f: &SmearingFunction,
    params: &ModelParams,
    max_order: usize,
    mc: &McConfig,
    opts: &BoundOptions,
) -> Result<QeiReport> {
    let weight = TimeWeight::Squared(*f);
    let (k0_straight, k0_accel) = k0(wl, f)?;
    let cfg = McConfig { max_order: max_order.max(mc.max_order), ..mc.clone() };
    let e_truncated = (0..=max_order).map(|n| order_value(n, state, params, wl, &weight, &cfg)).collect::<Result<Vec<_>>>()?;
    let kv = kv_majorant(params, wl, &weight, max_order, state, opts)?;
    let kh = kh_majorant(params, wl, &weight, max_order, state, opts)?;
    let mut r = QeiReport { k0_straight, k0_accel, kv, kh, e_truncated, verdict: Verdict::Inconclusive };
    r.verdict = r.derive_verdict();
    Ok(r)
}

/// Ĉ, K̂ of the factorial majorant Ĉ(n+1)²(2K̂)^{2n}/(n!)^{1−β²/4π}: (2K̂)² is the per-order
/// growth of the vertex chain, Ĉ matches |E₁| + 3σ₁ at n = 1.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorialFit {
    pub c_hat: f64,
    pub k_hat: f64,
    /// (order, |E_n|, σ_n, majorant(n), |E_n| ≤ majorant(n) + 3σ_n)
    pub rows: Vec<(usize, f64, f64, f64, bool)>,
}

impl FactorialFit {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.4)
    }
}

pub fn fit_factorial_majorant(estimates: &[TermEstimate], growth: f64, beta_sq: f64) -> Result<FactorialFit> {
    let e1 = estimates.iter().find(|t| t.order == 1).ok_or_else(|| Error::Input("the fit needs the order-1 estimate".into()))?;
    if !(growth > 0.0 && growth.is_finite()) {
        return Err(Error::Input(format!("growth constant must be positive and finite, got {growth}")));
    }
    let k_hat = 0.5 * growth.sqrt();
    let c_hat = (e1.value.abs() + 3.0 * e1.std_error) / (4.0 * growth);
    let rows = estimates
        .iter()
        .filter(|t| t.order >= 1)
        .map(|t| {
            let m = majorant(t.order, c_hat, k_hat, beta_sq);
            (t.order, t.value.abs(), t.std_error, m, t.value.abs() <= m + 3.0 * t.std_error)
        })
        .collect();
    Ok(FactorialFit { c_hat, k_hat, rows })
}
