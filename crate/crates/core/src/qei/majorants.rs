//! Explicit upper bounds K_V (vertex sectors s = ±1) and K_H (s = 0 parametrix products beyond
//! the free term), summed over all orders.
//!
//! Both follow the same chain. The pair factors of ℰ are bounded by the Cauchy determinant,
//! |ℰ| ≤ Π_{c∈{u,v}} [Σ_π Π_i |μ(c_i − c'_{π(i)})|^{−1}]^γ, the W factors by 1, and each |g(x)| by
//! Ĝ P(u_x)P(v_x) with P(s) = (1+μ²s²)^{−ρ}, ρ = 8π/(4π+β²). Raising the permutation sum to the
//! power t = ργ < 1 and applying Hölder with exponent ρ leaves one-dimensional pair integrals
//!
//!   ∫ P(b)|μ(a−b)|^{−t} db ≤ B/μ,  B = 8π/(4π−ρβ²) + √π Γ(ρ−½)/Γ(ρ),
//!
//! and the mass M_P = ∫P = √π Γ(ρ−½)/(Γ(ρ)μ). A configuration of K positive and K negative
//! charges then contributes (K!)^{2/ρ} times powers of these constants, which gives the
//! (n!)^{1+γ} growth against the 1/n!² of the coefficients.
//!
//! The scale μ is free; every μ > 0 gives a valid bound and the smallest over a log grid is kept.

use crate::error::{Error, Result};
use crate::geometry::{SpacetimePoint, Worldline};
use crate::quad::{integrate_breaks, integrate_semi, QuadOpts};
use crate::series::{ModelParams, TimeWeight};
use crate::states::StateW;
use statrs::function::gamma::{gamma, ln_gamma};
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Suprema found on grids are inflated by this factor.
const SUP_INFLATE: f64 = 1.01;

#[derive(Clone, Debug, PartialEq)]
pub struct BoundOptions {
    pub v1_cap: f64,
    /// Fixed μ, or None to minimise over [`BoundOptions::mu_grid`].
    pub mu: Option<f64>,
    pub mu_grid: Vec<f64>,
}

impl Default for BoundOptions {
    fn default() -> Self {
        BoundOptions { v1_cap: super::free::DEFAULT_V1_CAP, mu: None, mu_grid: (0..=40).map(|i| 10f64.powf(-2.0 + 3.5 * i as f64 / 40.0)).collect() }
    }
}

/// A majorant with its per-order summands.
#[derive(Clone, Debug, PartialEq)]
pub struct Majorant {
    /// Upper bound on the sum over all orders; +∞ if it overflows.
    pub value: f64,
    /// ln of the bound.
    pub ln_value: f64,
    pub mu: f64,
    /// (order, summand) for orders up to the requested maximum.
    pub terms: Vec<(usize, f64)>,
    /// Orders summed before the geometric remainder bound took over.
    pub orders_summed: usize,
}

/// c_k = sup_a [½∫|ln|s−a||^k /(1+s²) ds] / ln^k(2+|a|), maximised on a log grid in a and
/// inflated by 10%.
pub fn c_k(k: u32) -> f64 {
    static C1: OnceLock<f64> = OnceLock::new();
    if k == 1 {
        return *C1.get_or_init(|| c_k_compute(1));
    }
    c_k_compute(k)
}

fn log_moment(a: f64, k: u32) -> f64 {
    let f = |s: f64| {
        let l = (s - a).abs().ln().abs();
        l.powi(k as i32) / (1.0 + s * s)
    };
    let t = 10.0 * (a.abs() + 100.0);
    let mut pts = vec![-t, -100.0, -10.0, -1.0, 0.0, 1.0, 10.0, 100.0, a - 10.0, a - 1.0, a, a + 1.0, a + 10.0, t];
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let opts = QuadOpts { abs_tol: 1e-13, rel_tol: 1e-10, max_intervals: 4000 };
    let mid = integrate_breaks(f, &pts, opts).value;
    let right = integrate_semi(f, t, opts).value;
    let left = integrate_semi(|x| f(-x), t, opts).value;
    0.5 * (mid + right + left)
}

fn c_k_compute(k: u32) -> f64 {
    let mut best = log_moment(0.0, k) / 2f64.ln().powi(k as i32);
    for i in 0..=110 {
        let a = 10f64.powf(-3.0 + 11.0 * i as f64 / 110.0);
        best = best.max(log_moment(a, k) / (2.0 + a).ln().powi(k as i32));
    }
    1.1 * best
}

/// Supremum of a nonnegative function on [lo, hi]: grid, three refinements, inflation.
fn sup1d(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let n = 4000;
    let mut h = (hi - lo) / n as f64;
    let mut best = (lo, f(lo));
    for i in 0..=n {
        let x = lo + h * i as f64;
        let v = f(x);
        if v > best.1 {
            best = (x, v);
        }
    }
    for _ in 0..3 {
        let c = best.0;
        let m = 200;
        let step = 4.0 * h / m as f64;
        for i in 0..=m {
            let x = (c - 2.0 * h + step * i as f64).clamp(lo, hi);
            let v = f(x);
            if v > best.1 {
                best = (x, v);
            }
        }
        h = step;
    }
    SUP_INFLATE * best.1
}

/// Supremum over light-cone coordinates (u, v) in a square around (uc, vc).
fn sup2d(f: impl Fn(f64, f64) -> f64, uc: f64, vc: f64, r: f64) -> f64 {
    let n = 400;
    let mut h = 2.0 * r / n as f64;
    let mut best = (uc, vc, f(uc, vc));
    for i in 0..=n {
        for j in 0..=n {
            let (u, v) = (uc - r + h * i as f64, vc - r + h * j as f64);
            let x = f(u, v);
            if x > best.2 {
                best = (u, v, x);
            }
        }
    }
    for _ in 0..3 {
        let (cu, cv) = (best.0, best.1);
        let m = 40;
        let step = 4.0 * h / m as f64;
        for i in 0..=m {
            for j in 0..=m {
                let (u, v) = (cu - 2.0 * h + step * i as f64, cv - 2.0 * h + step * j as f64);
                let x = f(u, v);
                if x > best.2 {
                    best = (u, v, x);
                }
            }
        }
        h = step;
    }
    SUP_INFLATE * best.2
}

/// μ-independent ingredients.
struct Setup {
    rho: f64,
    /// √π Γ(ρ−½)/Γ(ρ)
    mass: f64,
    /// 8π/(4π−ρβ²) + mass
    b: f64,
    beta_sq: f64,
    f_l1: f64,
    g_on_line: f64,
}

fn setup(params: &ModelParams, wl: &Worldline, weight: &TimeWeight, state: &StateW) -> Result<Setup> {
    params.validate()?;
    state.validate()?;
    let beta_sq = params.beta_sq;
    let rho = 8.0 * PI / (4.0 * PI + beta_sq);
    let gap = 4.0 * PI - rho * beta_sq;
    if gap <= 1e-3 {
        return Err(Error::Domain(format!("4π − ρβ² = {gap:e} too small for the vertex bound")));
    }
    let mass = PI.sqrt() * gamma(rho - 0.5) / gamma(rho);
    let (lo, hi) = weight.support();
    let pts = crate::series::mc::sorted(weight.grid());
    let f_l1 = integrate_breaks(|t| weight.derivs(t)[0].abs(), &pts, QuadOpts::tol(1e-14, 1e-12)).value;
    let g_on_line = sup1d(|t| if wl.in_domain(t) { params.g.eval(wl.position(t)).abs() } else { 0.0 }, lo, hi);
    Ok(Setup { rho, mass, b: 8.0 * PI / gap + mass, beta_sq, f_l1, g_on_line })
}

/// Region of the weight above 1e−30 of its peak, where the near-null guard applies.
fn check_cap(wl: &Worldline, weight: &TimeWeight, cap: f64) -> Result<()> {
    let (lo, hi) = weight.support();
    let n = 4000;
    let env = |t: f64| {
        let d = weight.derivs(t);
        d[0].abs() + d[1].abs() + d[2].abs()
    };
    let peak = (0..=n).map(|i| env(lo + (hi - lo) * i as f64 / n as f64)).fold(0.0, f64::max);
    for i in 0..=n {
        let t = lo + (hi - lo) * i as f64 / n as f64;
        if wl.in_domain(t) && env(t) > 1e-30 * peak {
            let v1 = wl.v1(t).abs();
            if !(v1 <= cap) {
                return Err(Error::NearNull { v1, cap });
            }
        }
    }
    Ok(())
}

/// sup_x |g(x)| (1 + ln(2+μ|u|) + ln(2+μ|v|))^log / (P(u)P(v)), with `log` ∈ {0, 1}.
fn g_hat(params: &ModelParams, rho: f64, mu: f64, with_log: bool) -> f64 {
    let (c, sd) = params.g.proposal();
    let (uc, vc) = (c[0] - c[1], c[0] + c[1]);
    let r = 14.0 * std::f64::consts::SQRT_2 * sd[0].max(sd[1]);
    sup2d(
        |u, v| {
            let g = params.g.eval(SpacetimePoint::from_uv(u, v)).abs();
            if g == 0.0 {
                return 0.0;
            }
            let p = ((1.0 + mu * mu * u * u) * (1.0 + mu * mu * v * v)).powf(rho);
            let l = if with_log { 1.0 + (2.0 + mu * u.abs()).ln() + (2.0 + mu * v.abs()).ln() } else { 1.0 };
            g * p * l
        },
        uc,
        vc,
        r,
    )
}

/// ln of the integral of |ℰ| Π|g| over a configuration of k positive and k negative charges,
/// `m` of them integrated (m = 2k, or 2k−1 when one positive charge sits on the worldline).
fn ln_config(s: &Setup, mu: f64, ln_half_ghat: f64, k: usize, on_line: bool) -> f64 {
    let ln_mass = (s.mass / mu).ln();
    let ln_pair = ln_mass + (s.b / mu).ln();
    let ln_z = (s.b / mu).ln();
    let m = if on_line { 2 * k - 1 } else { 2 * k } as f64;
    let ln_perm = ln_gamma(k as f64 + 1.0) + if on_line { (k - 1) as f64 * ln_pair + ln_z } else { k as f64 * ln_pair };
    m * ln_half_ghat + 2.0 / s.rho * ln_perm + 2.0 * m * (1.0 - 1.0 / s.rho) * ln_mass
}

fn ln_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Sum of exp(ln_term(j)) for j = 1, 2, …; returns (ln sum, listed terms, count).
fn sum_series(ln_term: impl Fn(usize) -> f64, listed: usize) -> Result<(f64, Vec<f64>, usize)> {
    let mut total = f64::NEG_INFINITY;
    let mut list = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    for j in 1..=5_000_000usize {
        let t = ln_term(j);
        if !t.is_finite() && t != f64::NEG_INFINITY {
            return Err(Error::Numerical(format!("non-finite majorant summand at j = {j}")));
        }
        if j <= listed {
            list.push(t);
        }
        total = ln_add(total, t);
        if total > 745.0 && j >= listed {
            // Beyond f64 range: the bound is +∞, which is still valid.
            return Ok((f64::INFINITY, list, j));
        }
        let ln_ratio = t - prev;
        prev = t;
        // Ratios decrease from here on, so the remainder is below t·r/(1−r).
        if j > listed && j > 2 && ln_ratio < (0.5f64).ln() && t < total + (1e-17f64).ln() {
            let r = ln_ratio.exp();
            total = ln_add(total, t + (r / (1.0 - r)).ln());
            return Ok((total, list, j));
        }
    }
    Err(Error::Numerical("majorant series did not settle within 5·10⁶ orders".into()))
}

fn finish(ln_value: f64, mu: f64, terms: Vec<(usize, f64)>, orders_summed: usize) -> Majorant {
    let value = if ln_value == f64::NEG_INFINITY { 0.0 } else { ln_value.exp() };
    let terms = terms.into_iter().map(|(n, t)| (n, if t.is_finite() { t } else { f64::INFINITY })).collect();
    Majorant { value, ln_value, mu, terms, orders_summed }
}

fn mus(opts: &BoundOptions) -> Vec<f64> {
    opts.mu.map_or_else(|| opts.mu_grid.clone(), |m| vec![m])
}

/// Per-order growth factor 2·(½Ĝ)·(M_P B/μ)^{1/ρ}·M_P^{2(1−1/ρ)} of the vertex chain at scale μ.
pub fn vertex_growth(params: &ModelParams, mu: f64) -> f64 {
    let rho = 8.0 * PI / (4.0 * PI + params.beta_sq);
    let mass = PI.sqrt() * gamma(rho - 0.5) / gamma(rho);
    let b = 8.0 * PI / (4.0 * PI - rho * params.beta_sq) + mass;
    let gh = g_hat(params, rho, mu, false);
    gh * (mass / mu * b / mu).powf(1.0 / rho) * (mass / mu).powf(2.0 * (1.0 - 1.0 / rho))
}

/// K_V: bound on Σ over odd orders n and sectors s = ±1 of |∫F⟨Θ⟩_n,s|, listing the summands of
/// orders ≤ `max_order`. State-independent; `state` is only validated.
pub fn kv_majorant(params: &ModelParams, wl: &Worldline, weight: &TimeWeight, max_order: usize, state: &StateW, opts: &BoundOptions) -> Result<Majorant> {
    let s = setup(params, wl, weight, state)?;
    check_cap(wl, weight, opts.v1_cap)?;
    let vf = (1.0 - s.beta_sq / (8.0 * PI)).abs();
    if s.g_on_line == 0.0 || s.f_l1 == 0.0 || vf == 0.0 {
        return Ok(finish(f64::NEG_INFINITY, mus(opts)[0], (0..=max_order).filter(|n| n % 2 == 1).map(|n| (n, 0.0)).collect(), 0));
    }
    let pre = (2.0 * vf * s.g_on_line * s.f_l1).ln();
    let mut best: Option<Majorant> = None;
    for mu in mus(opts) {
        let gh = g_hat(params, s.rho, mu, false);
        if gh == 0.0 {
            return Ok(finish(f64::NEG_INFINITY, mu, vec![], 0));
        }
        let lh = (0.5 * gh).ln();
        // Order n = 2k+1 has k+1 charges of each sign, one of them at z; Σ|c| = 2ⁿ/(k!(k+1)!).
        let term = |j: usize| {
            let k = j - 1;
            let n = 2 * k + 1;
            let ln_c = n as f64 * 2f64.ln() - ln_gamma(k as f64 + 1.0) - ln_gamma(k as f64 + 2.0);
            pre + ln_c + ln_config(&s, mu, lh, k + 1, true)
        };
        let listed = max_order.div_ceil(2);
        let (ln_total, list, count) = sum_series(term, listed)?;
        let terms = list.into_iter().enumerate().map(|(i, t)| (2 * i + 1, t.exp())).collect();
        let m = finish(ln_total, mu, terms, 2 * count - 1);
        if best.as_ref().is_none_or(|b| m.ln_value < b.ln_value) {
            best = Some(m);
        }
    }
    best.ok_or_else(|| Error::Input("empty μ grid".into()))
}

/// sup_τ (1+μ²c(τ)²)|D_c(τ)|, D_c = a⁻¹[F'' + ∂_τ(F ∂_τ ln a)] with a = v⁰ ∓ v¹ and c = u, v.
pub fn ddf_suprema(wl: &Worldline, weight: &TimeWeight, mu: f64) -> [f64; 2] {
    let (lo, hi) = weight.support();
    let d = |t: f64, which: usize| -> f64 {
        if !wl.in_domain(t) {
            return 0.0;
        }
        let [f, f1, f2] = weight.derivs(t);
        if f == 0.0 && f1 == 0.0 && f2 == 0.0 {
            return 0.0;
        }
        let (a, c) = if which == 0 { (wl.vu(t), wl.u_of(t)) } else { (wl.vv(t), wl.v_of(t)) };
        let (d1, d2) = wl.dvu_dvv(t);
        let (a1, a2) = (d1[which] / a, d2[which] / a);
        let inner = f2 + f1 * a1 + f * (a2 - a1 * a1);
        ((1.0 + mu * mu * c * c) * inner / a).abs()
    };
    [sup1d(|t| d(t, 0), lo, hi), sup1d(|t| d(t, 1), lo, hi)]
}

/// K_H: bound on Σ over even orders 2n ≥ 2 of the s = 0 content beyond the free term: the
/// β²∂(Σ G_ret)·∂𝒢_H products (8n² per index, each by the logarithmic-moment estimate) and the
/// 2n contact terms per index. The W-derivative terms cancel in the symmetrized sum and carry 0.
pub fn kh_majorant(params: &ModelParams, wl: &Worldline, weight: &TimeWeight, max_order: usize, state: &StateW, opts: &BoundOptions) -> Result<Majorant> {
    let s = setup(params, wl, weight, state)?;
    check_cap(wl, weight, opts.v1_cap)?;
    let c1 = c_k(1);
    let mut best: Option<Majorant> = None;
    for mu in mus(opts) {
        let gh = g_hat(params, s.rho, mu, false);
        let ghl = g_hat(params, s.rho, mu, true);
        if gh == 0.0 {
            return Ok(finish(f64::NEG_INFINITY, mu, vec![], 0));
        }
        let sd = ddf_suprema(wl, weight, mu);
        let kappa = (sd[0] + sd[1]) * c1.max(PI * PI / 8.0) / (4.0 * PI * PI * mu);
        let (lh, lhl) = ((0.5 * gh).ln(), (0.5 * ghl).ln());
        let contact_pre = (s.g_on_line * s.f_l1).ln();
        let term = |n: usize| {
            let nf = n as f64;
            let ln_c = 2.0 * nf * 2f64.ln() - 2.0 * ln_gamma(nf + 1.0);
            // One of the two log-carrying points uses Ĝ with the log factor, the rest plain Ĝ.
            let prod = (8.0 * nf * nf * kappa).ln() + ln_config(&s, mu, lh, n, false) + (lhl - lh);
            let contact = (2.0 * nf / (8.0 * PI)).ln() + contact_pre + ln_config(&s, mu, lh, n, true);
            s.beta_sq.ln() + ln_c + ln_add(prod, contact)
        };
        let (ln_total, list, count) = sum_series(term, max_order / 2)?;
        let terms = list.into_iter().enumerate().map(|(i, t)| (2 * (i + 1), t.exp())).collect();
        let m = finish(ln_total, mu, terms, 2 * count);
        if best.as_ref().is_none_or(|b| m.ln_value < b.ln_value) {
            best = Some(m);
        }
    }
    best.ok_or_else(|| Error::Input("empty μ grid".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smearing::{AdiabaticCutoff, SmearingFunction};

    fn params(g0: f64) -> ModelParams {
        ModelParams::new(PI, AdiabaticCutoff::gaussian(g0, 2.0, 2.0)).unwrap()
    }

    fn weight() -> TimeWeight {
        TimeWeight::Squared(SmearingFunction::gaussian(1.0))
    }

    #[test]
    fn c1_value() {
        // At a = 0 the ratio is 2G/ln 2 with G Catalan's constant.
        let c = c_k(1);
        let at0 = 2.0 * 0.915_965_594_177_219 / 2f64.ln();
        assert!(c >= 1.1 * at0 * (1.0 - 1e-9), "{c}");
        assert!(c < 1.1 * 3.0);
    }

    #[test]
    fn kv_finite_and_small_coupling() {
        let o = BoundOptions::default();
        let wl = Worldline::static_line();
        let a = kv_majorant(&params(0.01), &wl, &weight(), 5, &StateW::Vacuum, &o).unwrap();
        let b = kv_majorant(&params(0.005), &wl, &weight(), 5, &StateW::Vacuum, &o).unwrap();
        assert!(a.value.is_finite() && a.value > 0.0);
        assert!(b.value < 0.5 * a.value);
        let h = kh_majorant(&params(0.01), &wl, &weight(), 4, &StateW::Vacuum, &o).unwrap();
        assert!(h.value.is_finite() && h.value > 0.0);
    }

    #[test]
    fn kh_static_reduces_to_f_second_derivative() {
        let wl = Worldline::static_line();
        let w = weight();
        let sd = ddf_suprema(&wl, &w, 1.0);
        let direct = sup1d(|t| (1.0 + t * t) * w.derivs(t)[2].abs(), -10.0, 10.0);
        assert!((sd[0] - direct).abs() < 1e-3 * direct && (sd[1] - direct).abs() < 1e-3 * direct);
    }
}
