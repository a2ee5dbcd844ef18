//! Monte Carlo evaluation of the order-n terms of the smeared energy density.
//!
//! Every sample draws its own generator from (seed, stream, index), samples are evaluated in
//! parallel and reduced sequentially in index order, so results do not depend on the thread
//! count. Each sample is evaluated on the whole ε-ladder with the same random numbers and
//! extrapolated to ε → 0 before averaging.

use super::kernels::PointSet;
use super::{enumerate_sector, ModelParams};
use crate::error::{Error, Result};
use crate::geometry::{SpacetimePoint, Worldline};
use crate::propagators::{hadamard_plus, link_jet, Link, Regulators, I};
use crate::quad::{integrate_breaks, QuadOpts, QuadValue};
use crate::rng::sample_rng;
use crate::smearing::{CompactTruncation, SmearingFunction};
use crate::states::StateW;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::f64::consts::PI;

const CHUNK: usize = 1 << 14;

#[derive(Clone, Debug, PartialEq)]
pub struct McConfig {
    pub samples: usize,
    pub seed: u64,
    /// Regulator values, largest first, each half the previous one.
    pub ladder: Vec<f64>,
    pub max_order: usize,
    /// Worker threads; 0 lets rayon decide.
    pub threads: usize,
    pub mu: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { samples: 20_000, seed: 1, ladder: vec![1e-2, 5e-3, 2.5e-3], max_order: 3, threads: 0, mu: 1.0 }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 2 {
            return Err(Error::Config("at least two samples are needed for an error estimate".into()));
        }
        if self.ladder.is_empty() || self.ladder.len() > 3 || self.ladder.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(Error::Config(format!("ε-ladder must hold 1 to 3 positive values, got {:?}", self.ladder)));
        }
        if self.ladder.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Config("ε-ladder must be strictly decreasing".into()));
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::Config(format!("μ must be positive, got {}", self.mu)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TermEstimate {
    pub order: usize,
    /// Sector s, or None for the sum over the sectors of this order.
    pub sector: Option<i32>,
    pub value: f64,
    pub std_error: f64,
    pub imag: f64,
    pub imag_std_error: f64,
    pub samples: usize,
    pub seed: u64,
    pub epsilon_ladder: Vec<f64>,
    /// Plain sample means (real part) at each ladder value, before extrapolation.
    pub per_epsilon: Vec<f64>,
    /// Set when the error bar exceeds the magnitude of the value.
    pub flagged: bool,
}

impl TermEstimate {
    fn exact(order: usize, sector: Option<i32>, value: f64, err: f64, cfg: &McConfig) -> Self {
        TermEstimate {
            order,
            sector,
            value,
            std_error: err,
            imag: 0.0,
            imag_std_error: 0.0,
            samples: 0,
            seed: cfg.seed,
            epsilon_ladder: cfg.ladder.clone(),
            per_epsilon: vec![value; cfg.ladder.len()],
            flagged: false,
        }
    }

    /// Sum of independent estimates, errors added in quadrature.
    pub fn combine(parts: &[TermEstimate], sector: Option<i32>) -> TermEstimate {
        let first = &parts[0];
        let mut out = TermEstimate { sector, ..first.clone() };
        out.value = parts.iter().map(|p| p.value).sum();
        out.imag = parts.iter().map(|p| p.imag).sum();
        out.std_error = parts.iter().map(|p| p.std_error.powi(2)).sum::<f64>().sqrt();
        out.imag_std_error = parts.iter().map(|p| p.imag_std_error.powi(2)).sum::<f64>().sqrt();
        out.samples = parts.iter().map(|p| p.samples).max().unwrap_or(0);
        out.per_epsilon = (0..first.per_epsilon.len()).map(|i| parts.iter().map(|p| p.per_epsilon[i]).sum()).collect();
        out.flagged = out.std_error > out.value.abs() && out.std_error > 0.0;
        out
    }
}

/// The τ-weight F: either f or f² for a smearing function, or the compact truncation f_N².
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeWeight {
    Plain(SmearingFunction),
    Squared(SmearingFunction),
    TruncatedSquared(CompactTruncation),
}

impl TimeWeight {
    pub(crate) fn base(&self) -> SmearingFunction {
        match self {
            TimeWeight::Plain(f) | TimeWeight::Squared(f) => *f,
            TimeWeight::TruncatedSquared(t) => t.base,
        }
    }

    /// F, F', F''.
    pub fn derivs(&self, tau: f64) -> [f64; 3] {
        let sq = |[f, d1, d2]: [f64; 3]| [f * f, 2.0 * f * d1, 2.0 * (d1 * d1 + f * d2)];
        match self {
            TimeWeight::Plain(f) => f.derivs(tau),
            TimeWeight::Squared(f) => sq(f.derivs(tau)),
            TimeWeight::TruncatedSquared(t) => sq(t.derivs(tau)),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            TimeWeight::TruncatedSquared(t) => t.support(),
            _ => self.base().support(),
        }
    }

    pub(crate) fn scale(&self) -> f64 {
        self.base().scale()
    }

    /// Draw τ from a proposal dominating |F|; returns (τ, density).
    pub(crate) fn sample(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let base = self.base();
        match (self, base.family) {
            (TimeWeight::TruncatedSquared(_), _) | (_, crate::smearing::Family::Bump { .. }) => {
                let (a, b) = self.support();
                (a + (b - a) * rng.random::<f64>(), 1.0 / (b - a))
            }
            _ => {
                let sd = 1.25 * base.scale();
                let z: f64 = rng.sample(StandardNormal);
                (base.center + sd * z, (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt()))
            }
        }
    }

    /// Quadrature breakpoints spreading the bulk of F.
    pub(crate) fn grid(&self) -> Vec<f64> {
        let (a, b) = self.support();
        let c = self.base().center;
        let s = self.scale();
        let mut pts = vec![a, b];
        for k in -8..=8 {
            let t = c + k as f64 * s;
            if t > a && t < b {
                pts.push(t);
            }
        }
        pts
    }
}

pub(crate) fn sample_point(rng: &mut ChaCha8Rng, p: &ModelParams) -> (SpacetimePoint, f64) {
    let (c, sd) = p.g.proposal();
    let z0: f64 = rng.sample(StandardNormal);
    let z1: f64 = rng.sample(StandardNormal);
    let dens = (-0.5 * (z0 * z0 + z1 * z1)).exp() / (2.0 * PI * sd[0] * sd[1]);
    (SpacetimePoint::new(c[0] + sd[0] * z0, c[1] + sd[1] * z1), dens)
}

/// Weights w with Σ w_i = 1 and Σ w_i ε_i^{p_j} = 0 for the leading exponents p_j.
pub fn extrapolation_weights(ladder: &[f64], exponents: &[f64]) -> Result<Vec<f64>> {
    let n = ladder.len();
    if n == 0 || exponents.len() + 1 < n {
        return Err(Error::Input("not enough exponents for the ε-ladder".into()));
    }
    let mut a = vec![vec![0.0; n + 1]; n];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, e) in ladder.iter().enumerate() {
            row[j] = if i == 0 { 1.0 } else { e.powf(exponents[i - 1]) };
        }
        row[n] = if i == 0 { 1.0 } else { 0.0 };
    }
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap_or(col);
        a.swap(col, piv);
        let d = a[col][col];
        if d.abs() < 1e-300 {
            return Err(Error::Numerical("degenerate ε-ladder".into()));
        }
        for j in col..=n {
            a[col][j] /= d;
        }
        for i in 0..n {
            if i != col {
                let f = a[i][col];
                for j in col..=n {
                    a[i][j] -= f * a[col][j];
                }
            }
        }
    }
    Ok(a.iter().map(|r| r[n]).collect())
}

pub(crate) struct Moments {
    pub(crate) n: usize,
    pub(crate) mean: Complex64,
    pub(crate) var_re: f64,
    pub(crate) var_im: f64,
    pub(crate) per_eps: Vec<f64>,
}

/// Evaluate `f` on `samples` generators of `stream`; each call returns one value per ladder entry.
pub(crate) fn run<F>(cfg: &McConfig, stream: u64, weights: &[f64], f: F) -> Result<Moments>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Vec<Complex64>> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let l = weights.len();
    let (mut s, mut s2re, mut s2im) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
    let mut per = vec![0.0; l];
    let mut start = 0;
    while start < cfg.samples {
        let end = (start + CHUNK).min(cfg.samples);
        let vals: Vec<Result<Vec<Complex64>>> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|i| {
                    let mut rng = sample_rng(cfg.seed, stream, i as u64);
                    f(&mut rng)
                })
                .collect()
        });
        for v in vals {
            let v = v?;
            let c: Complex64 = v.iter().zip(weights).map(|(x, w)| x * w).sum();
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::Numerical("non-finite Monte Carlo sample".into()));
            }
            s += c;
            s2re += c.re * c.re;
            s2im += c.im * c.im;
            for (p, x) in per.iter_mut().zip(&v) {
                *p += x.re;
            }
        }
        start = end;
    }
    let n = cfg.samples as f64;
    let mean = s / n;
    Ok(Moments {
        n: cfg.samples,
        mean,
        var_re: ((s2re / n - mean.re * mean.re) * n / (n - 1.0)).max(0.0),
        var_im: ((s2im / n - mean.im * mean.im) * n / (n - 1.0)).max(0.0),
        per_eps: per.into_iter().map(|p| p / n).collect(),
    })
}

fn estimate(order: usize, sector: Option<i32>, m: Moments, cfg: &McConfig) -> TermEstimate {
    let n = m.n as f64;
    let std_error = (m.var_re / n).sqrt();
    TermEstimate {
        order,
        sector,
        value: m.mean.re,
        std_error,
        imag: m.mean.im,
        imag_std_error: (m.var_im / n).sqrt(),
        samples: m.n,
        seed: cfg.seed,
        epsilon_ladder: cfg.ladder.clone(),
        per_epsilon: m.per_eps,
        flagged: std_error > m.mean.re.abs(),
    }
}

fn stream(tag: &str, n: usize, s: i32) -> u64 {
    crate::rng::stream_id(tag, n as i64, s as i64)
}

/// Order-n, sector-s term of the smeared energy density ∫F(τ) ⟨Θ⟩(τ) dτ.
pub fn term_value(
    n: usize,
    s: i32,
    state: &StateW,
    params: &ModelParams,
    wl: &Worldline,
    weight: &TimeWeight,
    cfg: &McConfig,
) -> Result<TermEstimate> {
    cfg.validate()?;
    params.validate()?;
    state.validate()?;
    if n > cfg.max_order {
        return Err(Error::Domain(format!("order {n} exceeds max_order {}", cfg.max_order)));
    }
    if enumerate_sector(n, s).is_empty() {
        return Ok(TermEstimate::exact(n, Some(s), 0.0, 0.0, cfg));
    }
    if n >= 1 && params.beta_sq > params.mc_default_beta_sq_cap {
        return Err(Error::Domain(format!(
            "β² = {} above the plain-sampling cap {}; pair-centred importance sampling is not available",
            params.beta_sq, params.mc_default_beta_sq_cap
        )));
    }
    let gamma = params.gamma();
    let weights = extrapolation_weights(&cfg.ladder, &[1.0 - gamma, 1.0])?;
    match n {
        0 => order_zero(state, wl, weight, cfg),
        2 => {
            let bulk = run(cfg, stream("neutral-bulk", n, s), &weights, |rng| neutral_bulk_sample(rng, state, params, wl, weight, cfg))?;
            let contact = run(cfg, stream("neutral-contact", n, s), &weights, |rng| neutral_contact_sample(rng, state, params, wl, weight, cfg))?;
            let parts = [estimate(n, Some(s), bulk, cfg), estimate(n, Some(s), contact, cfg)];
            Ok(TermEstimate::combine(&parts, Some(s)))
        }
        _ if n % 2 == 1 => {
            let m = run(cfg, stream("vertex", n, s), &weights, |rng| vertex_sample(rng, n, s, state, params, wl, weight, cfg))?;
            Ok(estimate(n, Some(s), m, cfg))
        }
        _ => Err(Error::Domain(format!("order {n} neutral terms are not implemented (orders 0 and 2 only)"))),
    }
}

/// Sum over the sectors of order n.
pub fn order_value(
    n: usize,
    state: &StateW,
    params: &ModelParams,
    wl: &Worldline,
    weight: &TimeWeight,
    cfg: &McConfig,
) -> Result<TermEstimate> {
    let parts: Vec<TermEstimate> = (-1..=1)
        .filter(|s| !enumerate_sector(n, *s).is_empty())
        .map(|s| term_value(n, s, state, params, wl, weight, cfg))
        .collect::<Result<_>>()?;
    Ok(TermEstimate::combine(&parts, None))
}

fn order_zero(state: &StateW, wl: &Worldline, weight: &TimeWeight, cfg: &McConfig) -> Result<TermEstimate> {
    let m2 = state.coincident_hessian()?[0][0];
    if m2 == 0.0 {
        return Ok(TermEstimate::exact(0, Some(0), 0.0, 0.0, cfg));
    }
    let r = integrate_breaks(
        |t| {
            let (a, b) = (wl.vu(t), wl.vv(t));
            weight.derivs(t)[0] * (a * a + b * b)
        },
        &sorted(weight.grid()),
        QuadOpts::tol(1e-14, 1e-11),
    );
    Ok(TermEstimate::exact(0, Some(0), m2 * r.value, m2 * r.error, cfg))
}

#[allow(clippy::too_many_arguments)]
fn vertex_sample(
    rng: &mut ChaCha8Rng,
    n: usize,
    s: i32,
    state: &StateW,
    params: &ModelParams,
    wl: &Worldline,
    weight: &TimeWeight,
    cfg: &McConfig,
) -> Result<Vec<Complex64>> {
    let (tau, qt) = weight.sample(rng);
    let mut pts = Vec::with_capacity(n);
    let mut w = weight.derivs(tau)[0] / qt;
    for _ in 0..n {
        let (p, q) = sample_point(rng, params);
        w *= params.g.eval(p) / q;
        pts.push(p);
    }
    let zero = vec![Complex64::new(0.0, 0.0); cfg.ladder.len()];
    if w == 0.0 {
        return Ok(zero);
    }
    let nx = (n as i32 + s) as usize / 2;
    let z = wl.position(tau);
    let idxs = enumerate_sector(n, s);
    cfg.ladder
        .iter()
        .map(|&eps| {
            let r = Regulators::new(eps, cfg.mu)?;
            let set = PointSet::new(&pts[..nx], &pts[nx..], &r, state)?;
            let lk = set.links(z, &r, state)?;
            let mut acc = Complex64::new(0.0, 0.0);
            for idx in &idxs {
                let g = set.cal_g(idx, &lk);
                let th = -super::kernels::vertex_factor(s, g.jet.val, z, params, state)?;
                acc += idx.coefficient() * set.cal_e(idx, params.beta_sq) * th;
            }
            Ok(acc * w)
        })
        .collect()
}

/// Δ = H^F(x,z) − H⁺(x,z) with its z-derivatives (val, ∂u, ∂v, ∂u², ∂v²).
#[cfg(test)]
#[derive(Clone, Copy, Debug)]
pub(crate) struct DeltaJet {
    pub val: f64,
    pub du: f64,
    pub dv: f64,
    pub duu: f64,
    pub dvv: f64,
}

#[cfg(test)]
pub(crate) fn delta_jet(x: SpacetimePoint, z: SpacetimePoint, eps: f64) -> DeltaJet {
    let th = crate::propagators::step(z.x0 - x.x0);
    if th == 0.0 {
        return DeltaJet { val: 0.0, du: 0.0, dv: 0.0, duu: 0.0, dvv: 0.0 };
    }
    let (u, v) = (x.u() - z.u(), x.v() - z.v());
    let (du2, dv2) = (u * u + eps * eps, v * v + eps * eps);
    DeltaJet {
        val: th * ((u / eps).atan() + (v / eps).atan()) / (2.0 * PI),
        du: -th * eps / (2.0 * PI * du2),
        dv: -th * eps / (2.0 * PI * dv2),
        duu: -th * u * eps / (PI * du2 * du2),
        dvv: -th * v * eps / (PI * dv2 * dv2),
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct C4(pub [Complex64; 4]);

impl std::ops::Add for C4 {
    type Output = C4;
    fn add(self, o: C4) -> C4 {
        C4([0, 1, 2, 3].map(|i| self.0[i] + o.0[i]))
    }
}
impl std::ops::Sub for C4 {
    type Output = C4;
    fn sub(self, o: C4) -> C4 {
        C4([0, 1, 2, 3].map(|i| self.0[i] - o.0[i]))
    }
}
impl std::ops::Mul<f64> for C4 {
    type Output = C4;
    fn mul(self, a: f64) -> C4 {
        C4(self.0.map(|c| c * a))
    }
}
impl QuadValue for C4 {
    fn zero() -> Self {
        C4([Complex64::new(0.0, 0.0); 4])
    }
    fn norm(self) -> f64 {
        self.0.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

pub(crate) fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.retain(|t| t.is_finite());
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// τ with z⁰(τ) = t, by bisection.
#[cfg(test)]
pub(crate) fn tau_of_time(wl: &Worldline, t: f64) -> Option<f64> {
    let f = |tau: f64| wl.position(tau).x0;
    let (mut lo, mut hi) = wl.domain;
    if !lo.is_finite() {
        lo = -1.0;
        while f(lo) > t {
            lo *= 2.0;
            if lo < -1e9 {
                return None;
            }
        }
    }
    if !hi.is_finite() {
        hi = 1.0;
        while f(hi) < t {
            hi *= 2.0;
            if hi > 1e9 {
                return None;
            }
        }
    }
    if f(lo) > t || f(hi) < t {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// [∫D₀-integrand, Ω, X₊, X_F] for the later point x and earlier point y at finite ε.
#[cfg(test)]
#[allow(clippy::too_many_arguments)]
fn neutral_tau_integrals(
    x: SpacetimePoint,
    y: SpacetimePoint,
    eps: f64,
    mu: f64,
    state: &StateW,
    wl: &Worldline,
    weight: &TimeWeight,
) -> Result<[Complex64; 4]> {
    let (a, b) = weight.support();
    let lo = match tau_of_time(wl, x.x0) {
        Some(t) => t.max(a),
        None if wl.position(a).x0 > x.x0 => a,
        None => return Ok([Complex64::new(0.0, 0.0); 4]),
    };
    let hi = b.min(wl.domain.1);
    if !(lo < hi) {
        return Ok([Complex64::new(0.0, 0.0); 4]);
    }
    let r = Regulators::new(eps, mu)?;
    let mut pts = vec![lo, hi];
    pts.extend(weight.grid());
    for p in [x, y] {
        for (tc, speed) in [(wl.tau_of_u(p.u()), 0usize), (wl.tau_of_v(p.v()), 1)] {
            if let Ok(tc) = tc {
                let sp = if speed == 0 { wl.vu(tc) } else { wl.vv(tc) };
                pts.push(tc);
                for k in [1.0, 4.0, 16.0, 64.0] {
                    pts.push(tc - k * eps / sp);
                    pts.push(tc + k * eps / sp);
                }
            }
        }
    }
    pts.retain(|t| *t >= lo && *t <= hi);
    let pts = sorted(pts);
    let thermal = !state.is_vacuum();
    let err = std::cell::Cell::new(None);
    let integrand = |tau: f64| -> C4 {
        let z = wl.position(tau);
        let [f, _, f2] = weight.derivs(tau);
        if f == 0.0 && f2 == 0.0 {
            return C4::zero();
        }
        let (qu, qv) = (wl.vu(tau), wl.vv(tau));
        let (dq, _) = wl.dvu_dvv(tau);
        let d = delta_jet(x, z, eps);
        let dpart = f2 * d.val - f * (dq[0] * d.du + dq[1] * d.dv);
        let omega = if thermal {
            match (state.jet(x, z), state.jet(y, z)) {
                (Ok(wx), Ok(wy)) => {
                    let (ou, ov) = (-I * wx.du + I * wy.du, -I * wx.dv + I * wy.dv);
                    (ou * d.du * (qu * qu) + ov * d.dv * (qv * qv)) * f
                }
                (Err(e), _) | (_, Err(e)) => {
                    err.set(Some(e));
                    Complex64::new(0.0, 0.0)
                }
            }
        } else {
            Complex64::new(0.0, 0.0)
        };
        let bp = link_jet(Link::PlusPz, y, z, &r);
        let bf = link_jet(Link::Feynman, y, z, &r);
        let xp = (bp.du * d.du * (qu * qu) + bp.dv * d.dv * (qv * qv)) * f;
        let xf = (bf.du * d.du * (qu * qu) + bf.dv * d.dv * (qv * qv)) * f;
        C4([Complex64::new(dpart, 0.0), omega, xp, xf])
    };
    let res = integrate_breaks(integrand, &pts, QuadOpts { abs_tol: 1e-13, rel_tol: 1e-8, max_intervals: 4000 });
    if let Some(e) = err.take() {
        return Err(e);
    }
    Ok(res.value.0)
}

fn wfac(state: &StateW, x: SpacetimePoint, y: SpacetimePoint, beta_sq: f64) -> Result<f64> {
    if state.is_vacuum() {
        return Ok(0.0);
    }
    Ok(beta_sq * state.eval(x, y)? - 0.5 * beta_sq * (state.eval(x, x)? + state.eval(y, y)?))
}

/// β² e^{W} [(ℰ_yx − ℰ_xy)(D₀ + 2Ω) − 2(ℰ_yx X₊ − ℰ_xy X_F)] for x later than y, where
/// D₀ = −(i/4π) ∫[F''Δ − F v̇·∂Δ] is the self-term after integration by parts in τ.
#[cfg(test)]
#[allow(clippy::too_many_arguments)]
pub(crate) fn neutral_pair_value(
    x: SpacetimePoint,
    y: SpacetimePoint,
    eps: f64,
    mu: f64,
    state: &StateW,
    params: &ModelParams,
    wl: &Worldline,
    weight: &TimeWeight,
) -> Result<Complex64> {
    let r = Regulators::new(eps, mu)?;
    let b2 = params.beta_sq;
    let e_xy = (I * b2 * hadamard_plus(x, y, &r)).exp();
    let e_yx = (I * b2 * hadamard_plus(y, x, &r)).exp();
    let [dp, om, xp, xf] = neutral_tau_integrals(x, y, eps, mu, state, wl, weight)?;
    let d0 = -I / (4.0 * PI) * dp;
    let body = (e_yx - e_xy) * (d0 + om * 2.0) - (e_yx * xp - e_xy * xf) * 2.0;
    Ok(body * (b2 * wfac(state, x, y, b2)?.exp()))
}

enum Crossing {
    At(f64),
    Never,
    Always,
}

fn crossing(wl: &Worldline, target: f64, coord: usize) -> Crossing {
    let r = if coord == 0 { wl.tau_of_u(target) } else { wl.tau_of_v(target) };
    match r {
        Ok(t) => Crossing::At(t),
        Err(_) => {
            let hi = if wl.domain.1.is_finite() { wl.domain.1 } else { 1e6 };
            let top = if coord == 0 { wl.u_of(hi) } else { wl.v_of(hi) };
            if top < target {
                Crossing::Never
            } else {
                Crossing::Always
            }
        }
    }
}

/// Where the worldline enters the causal future of x, in the ε → 0 limit of Δ.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Entry {
    /// 0 if the u-crossing is the later one, 1 for v.
    pub coord: usize,
    pub z: SpacetimePoint,
    /// F(T) v^c(T).
    pub fv: f64,
    /// D₀ = −(i/8π)[F'(T) + F(T) v̇^c/v^c].
    pub d0: Complex64,
}

pub(crate) fn future_entry(wl: &Worldline, weight: &TimeWeight, x: SpacetimePoint) -> Option<Entry> {
    let (tu, tv) = (crossing(wl, x.u(), 0), crossing(wl, x.v(), 1));
    let (tau, coord) = match (tu, tv) {
        (Crossing::Never, _) | (_, Crossing::Never) | (Crossing::Always, Crossing::Always) => return None,
        (Crossing::At(a), Crossing::Always) => (a, 0),
        (Crossing::Always, Crossing::At(b)) => (b, 1),
        (Crossing::At(a), Crossing::At(b)) => {
            if a >= b {
                (a, 0)
            } else {
                (b, 1)
            }
        }
    };
    let [f, f1, _] = weight.derivs(tau);
    if f == 0.0 && f1 == 0.0 {
        return None;
    }
    let speed = if coord == 0 { wl.vu(tau) } else { wl.vv(tau) };
    let accel = wl.dvu_dvv(tau).0[coord];
    Some(Entry {
        coord,
        z: wl.position(tau),
        fv: f * speed,
        d0: -I / (8.0 * PI) * (f1 + f * accel / speed),
    })
}

/// β² e^{W} [(ℰ_yx − ℰ_xy)(D₀ + 2Ω) − 2(ℰ_yx X₊ − ℰ_xy X_F)] for x later than y, with
/// Ω = −½ F v^c ∂_c ω and X_b = −½ F v^c ∂_c B_b taken at the entry point, one value per ε.
#[allow(clippy::too_many_arguments)]
pub(crate) fn neutral_pair_limit(
    x: SpacetimePoint,
    y: SpacetimePoint,
    entry: &Entry,
    wx: Option<f64>,
    state: &StateW,
    params: &ModelParams,
    cfg: &McConfig,
) -> Result<C4> {
    let b2 = params.beta_sq;
    let c = entry.coord;
    let pick = |du: Complex64, dv: Complex64| if c == 0 { du } else { dv };
    let (om, wf) = match wx {
        None => (Complex64::new(0.0, 0.0), 0.0),
        Some(dwx) => {
            let wy = state.jet(y, entry.z)?;
            let dwy = if c == 0 { wy.du } else { wy.dv };
            let w0 = state.eval(x, x)?;
            (-0.5 * entry.fv * (-I * dwx + I * dwy), b2 * state.eval(x, y)? - b2 * w0)
        }
    };
    let mut out = C4::zero();
    for (k, &eps) in cfg.ladder.iter().enumerate() {
        let r = Regulators::new(eps, cfg.mu)?;
        let e_xy = (I * b2 * hadamard_plus(x, y, &r)).exp();
        let e_yx = (I * b2 * hadamard_plus(y, x, &r)).exp();
        let bp = link_jet(Link::PlusPz, y, entry.z, &r);
        let bf = link_jet(Link::Feynman, y, entry.z, &r);
        let xp = pick(bp.du, bp.dv) * (-0.5 * entry.fv);
        let xf = pick(bf.du, bf.dv) * (-0.5 * entry.fv);
        let body = (e_yx - e_xy) * (entry.d0 + om * 2.0) - (e_yx * xp - e_xy * xf) * 2.0;
        out.0[k] = body * (b2 * wf.exp());
    }
    Ok(out)
}

/// x from the g-proposal, the non-singular light-cone coordinate of y from its marginal, and
/// the singular one (along the entry direction) integrated by quadrature over y⁰ < x⁰.
fn neutral_bulk_sample(
    rng: &mut ChaCha8Rng,
    state: &StateW,
    params: &ModelParams,
    wl: &Worldline,
    weight: &TimeWeight,
    cfg: &McConfig,
) -> Result<Vec<Complex64>> {
    let l = cfg.ladder.len();
    let (x, qx) = sample_point(rng, params);
    let zval: f64 = rng.sample(StandardNormal);
    let gx = params.g.eval(x);
    let entry = match future_entry(wl, weight, x) {
        Some(e) if gx > 0.0 => e,
        _ => return Ok(vec![Complex64::new(0.0, 0.0); l]),
    };
    let c = entry.coord;
    let (gc, gsd) = params.g.proposal();
    let sd_l = (gsd[0] * gsd[0] + gsd[1] * gsd[1]).sqrt();
    let centre = [gc[0] - gc[1], gc[0] + gc[1]];
    // The other coordinate of y.
    let other = centre[1 - c] + sd_l * zval;
    let q_other = (-0.5 * zval * zval).exp() / (sd_l * (2.0 * PI).sqrt());
    let xc = [x.u(), x.v()];
    let lo = -(xc[1 - c] - other);
    let hi = xc[c] - (centre[c] - 12.0 * sd_l);
    if !(lo < hi) {
        return Ok(vec![Complex64::new(0.0, 0.0); l]);
    }
    let y_at = |s: f64| if c == 0 { SpacetimePoint::from_uv(x.u() - s, other) } else { SpacetimePoint::from_uv(other, x.v() - s) };
    let wx = if state.is_vacuum() {
        None
    } else {
        let j = state.jet(x, entry.z)?;
        Some(if c == 0 { j.du } else { j.dv })
    };
    let mut pts = vec![lo, hi];
    for k in -12..=12 {
        pts.push(k as f64 * sd_l / 3.0);
    }
    for e in &cfg.ladder {
        for m in [0.0, 1.0, 4.0, 16.0, 64.0, 256.0] {
            pts.push(m * e);
            pts.push(-m * e);
        }
    }
    pts.retain(|t| *t >= lo && *t <= hi);
    let pts = sorted(pts);
    let err = std::cell::Cell::new(None);
    let res = integrate_breaks(
        |s| {
            let y = y_at(s);
            let gy = params.g.eval(y);
            if gy == 0.0 {
                return C4::zero();
            }
            match neutral_pair_limit(x, y, &entry, wx, state, params, cfg) {
                Ok(v) => v * gy,
                Err(e) => {
                    err.set(Some(e));
                    C4::zero()
                }
            }
        },
        &pts,
        QuadOpts { abs_tol: 1e-12, rel_tol: 1e-8, max_intervals: 4000 },
    );
    if let Some(e) = err.take() {
        return Err(e);
    }
    let w = gx / (qx * q_other);
    Ok(res.value.0[..l].iter().map(|v| v * w).collect())
}

/// Collapsed term −(iβ²/4π) ∫dτ F g(z) ∫_{y⁰<z⁰} g(y) e^{W} (ℰ_yz − ℰ_zy).
fn neutral_contact_sample(
    rng: &mut ChaCha8Rng,
    state: &StateW,
    params: &ModelParams,
    wl: &Worldline,
    weight: &TimeWeight,
    cfg: &McConfig,
) -> Result<Vec<Complex64>> {
    let (tau, qt) = weight.sample(rng);
    let (y, qy) = sample_point(rng, params);
    let z = wl.position(tau);
    let w = weight.derivs(tau)[0] / qt * params.g.eval(z) * params.g.eval(y) / qy;
    if w == 0.0 || y.x0 >= z.x0 {
        return Ok(vec![Complex64::new(0.0, 0.0); cfg.ladder.len()]);
    }
    let b2 = params.beta_sq;
    let pref = -I * b2 / (4.0 * PI) * w * wfac(state, z, y, b2)?.exp();
    cfg.ladder
        .iter()
        .map(|&e| {
            let r = Regulators::new(e, cfg.mu)?;
            let d = (I * b2 * hadamard_plus(y, z, &r)).exp() - (I * b2 * hadamard_plus(z, y, &r)).exp();
            Ok(pref * d)
        })
        .collect()
}

/// Deterministic order-1 value for W ≡ 0 in the ε → 0 limit:
/// −4(1−β²/8π) sin(β²/4) ∫dτ F g(z) ∫_{J⁻(z)} g(y) (μ²u'v')^{−β²/4π} d²y,
/// with u' = u_z − u_y and v' = v_z − v_y. The substitution u' = s^{1/(1−γ)} removes the edge singularity.
pub fn order_one_vacuum_oracle(params: &ModelParams, wl: &Worldline, weight: &TimeWeight, mu: f64) -> Result<f64> {
    params.validate()?;
    let gam = params.gamma();
    let (c, sd) = params.g.proposal();
    let sd_l = (sd[0] * sd[0] + sd[1] * sd[1]).sqrt();
    let (cu, cv) = (c[0] - c[1], c[0] + c[1]);
    let inv = 1.0 / (1.0 - gam);
    let opts = QuadOpts { abs_tol: 1e-15, rel_tol: 1e-10, max_intervals: 2000 };
    let inner = |z: SpacetimePoint| -> f64 {
        let umax = z.u() - cu + 12.0 * sd_l;
        let vmax = z.v() - cv + 12.0 * sd_l;
        if umax <= 0.0 || vmax <= 0.0 {
            return 0.0;
        }
        let (smax, tmax) = (umax.powf(1.0 - gam), vmax.powf(1.0 - gam));
        let grid = |m: f64| (0..=16).map(|k| m * k as f64 / 16.0).collect::<Vec<_>>();
        integrate_breaks(
            |s| {
                let up = s.powf(inv);
                integrate_breaks(|t| params.g.eval(SpacetimePoint::from_uv(z.u() - up, z.v() - t.powf(inv))), &grid(tmax), opts).value
            },
            &grid(smax),
            opts,
        )
        .value
            * 0.5
            * inv
            * inv
            * mu.powf(-2.0 * gam)
    };
    let outer = integrate_breaks(
        |tau| {
            let f = weight.derivs(tau)[0];
            if f == 0.0 {
                return 0.0;
            }
            let z = wl.position(tau);
            f * params.g.eval(z) * inner(z)
        },
        &sorted(weight.grid()),
        QuadOpts { abs_tol: 1e-14, rel_tol: 1e-8, max_intervals: 500 },
    );
    Ok(-4.0 * params.vertex_factor() * (params.beta_sq / 4.0).sin() * outer.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{kernels, SeriesIndex};
    use crate::smearing::AdiabaticCutoff;

    fn params() -> ModelParams {
        ModelParams::new(PI, AdiabaticCutoff::gaussian(1.0, 2.0, 2.0)).unwrap()
    }

    #[test]
    fn extrapolation_weights_cancel_powers() {
        let l = [1e-2, 5e-3, 2.5e-3];
        let w = extrapolation_weights(&l, &[0.75, 1.0]).unwrap();
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for p in [0.75, 1.0] {
            let s: f64 = w.iter().zip(&l).map(|(w, e)| w * e.powf(p)).sum();
            assert!(s.abs() < 1e-14);
        }
        assert_eq!(extrapolation_weights(&[1e-2], &[]).unwrap(), vec![1.0]);
    }

    #[test]
    fn neutral_pointwise_matches_kernels() {
        let p = params();
        let wl = Worldline::accelerated(0.5).unwrap();
        let eps = 0.05;
        let r = Regulators::new(eps, 1.0).unwrap();
        for s in [StateW::Vacuum, StateW::thermal_window(0.5, 2.0, 1.0).unwrap()] {
            let x = SpacetimePoint::new(-0.3, 0.4);
            let y = SpacetimePoint::new(-1.1, -0.2);
            for tau in [0.2, 0.7, 1.9] {
                let z = wl.position(tau);
                let mut direct = Complex64::new(0.0, 0.0);
                for idx in enumerate_sector(2, 0) {
                    let (xs, ys) = ([x], [y]);
                    let th = kernels::theta_worldline(&idx, &xs, &ys, tau, &wl, &r, &p, &s).unwrap().value;
                    direct += idx.coefficient() * kernels::cal_e(&idx, &xs, &ys, &r, &p, &s).unwrap() * th;
                }
                let d = delta_jet(x, z, eps);
                let (qu, qv) = (wl.vu(tau), wl.vv(tau));
                let (wx, wy) = (s.jet(x, z).unwrap(), s.jet(y, z).unwrap());
                let (ou, ov) = (-I * wx.du + I * wy.du, -I * wx.dv + I * wy.dv);
                let bp = link_jet(Link::PlusPz, y, z, &r);
                let bf = link_jet(Link::Feynman, y, z, &r);
                let e_xy = (I * p.beta_sq * hadamard_plus(x, y, &r)).exp();
                let e_yx = (I * p.beta_sq * hadamard_plus(y, x, &r)).exp();
                let selfp = -I / (4.0 * PI) * (d.duu * qu * qu + d.dvv * qv * qv);
                let om = ou * d.du * qu * qu + ov * d.dv * qv * qv;
                let xp = bp.du * d.du * qu * qu + bp.dv * d.dv * qv * qv;
                let xf = bf.du * d.du * qu * qu + bf.dv * d.dv * qv * qv;
                let ours = ((e_yx - e_xy) * (selfp + om * 2.0) - (e_yx * xp - e_xy * xf) * 2.0)
                    * (p.beta_sq * wfac(&s, x, y, p.beta_sq).unwrap().exp());
                assert!((ours - direct).norm() < 1e-10 * (1.0 + direct.norm()), "τ={tau}: {ours} vs {direct}");
            }
        }
    }

    #[test]
    fn tau_integration_by_parts() {
        let wl = Worldline::boosted(0.4);
        let wt = TimeWeight::Squared(SmearingFunction::gaussian(1.0));
        let x = SpacetimePoint::new(-0.5, 0.3);
        let eps = 0.02;
        let pts = {
            let mut v = wt.grid();
            let t0 = tau_of_time(&wl, x.x0).unwrap();
            v.push(t0);
            for t in [wl.tau_of_u(x.u()).unwrap(), wl.tau_of_v(x.v()).unwrap()] {
                for k in [-16.0, -4.0, -1.0, 0.0, 1.0, 4.0, 16.0] {
                    v.push(t + k * eps);
                }
            }
            sorted(v)
        };
        let opts = QuadOpts { abs_tol: 1e-13, rel_tol: 1e-11, max_intervals: 4000 };
        let lhs = integrate_breaks(
            |t| {
                let d = delta_jet(x, wl.position(t), eps);
                let (a, b) = (wl.vu(t), wl.vv(t));
                wt.derivs(t)[0] * (a * a * d.duu + b * b * d.dvv)
            },
            &pts,
            opts,
        )
        .value;
        let rhs_bulk = integrate_breaks(
            |t| {
                let z = wl.position(t);
                let d = delta_jet(x, z, eps);
                let [f, _, f2] = wt.derivs(t);
                let (dq, _) = wl.dvu_dvv(t);
                f2 * d.val - f * (dq[0] * d.du + dq[1] * d.dv)
            },
            &pts,
            opts,
        )
        .value;
        // Δ is continuous where z⁰ = x⁰ but its τ-derivative jumps; the jump is the equal-time
        // contact that is collapsed separately.
        let t0 = tau_of_time(&wl, x.x0).unwrap();
        let d = delta_jet(x, wl.position(t0 + 1e-13), eps);
        let jump = wl.vu(t0) * d.du + wl.vv(t0) * d.dv;
        let rhs = rhs_bulk - wt.derivs(t0)[0] * jump;
        assert!((lhs - rhs).abs() < 1e-7 * (1.0 + lhs.abs()), "{lhs} vs {rhs}");
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let p = params();
        let wl = Worldline::static_line();
        let wt = TimeWeight::Plain(SmearingFunction::gaussian(1.0));
        let mut cfg = McConfig { samples: 300, seed: 9, threads: 1, ..Default::default() };
        let a = term_value(1, -1, &StateW::Vacuum, &p, &wl, &wt, &cfg).unwrap();
        let a2 = term_value(2, 0, &StateW::Vacuum, &p, &wl, &wt, &McConfig { samples: 40, ..cfg.clone() }).unwrap();
        cfg.threads = 4;
        let b = term_value(1, -1, &StateW::Vacuum, &p, &wl, &wt, &cfg).unwrap();
        let b2 = term_value(2, 0, &StateW::Vacuum, &p, &wl, &wt, &McConfig { samples: 40, ..cfg.clone() }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a2, b2);
    }

    #[test]
    fn parity_and_limits() {
        let p = params();
        let wl = Worldline::static_line();
        let wt = TimeWeight::Plain(SmearingFunction::gaussian(1.0));
        let cfg = McConfig { samples: 10, ..Default::default() };
        assert_eq!(term_value(1, 0, &StateW::Vacuum, &p, &wl, &wt, &cfg).unwrap().value, 0.0);
        assert_eq!(term_value(2, 1, &StateW::Vacuum, &p, &wl, &wt, &cfg).unwrap().value, 0.0);
        assert_eq!(term_value(0, 0, &StateW::Vacuum, &p, &wl, &wt, &cfg).unwrap().value, 0.0);
        assert!(matches!(term_value(4, 0, &StateW::Vacuum, &p, &wl, &wt, &cfg), Err(Error::Domain(_))));
        let hot = ModelParams::new(2.0 * PI, p.g).unwrap();
        assert!(matches!(term_value(1, 1, &StateW::Vacuum, &hot, &wl, &wt, &cfg), Err(Error::Domain(_))));
        let _ = SeriesIndex::new(0, 0, 0, 0).unwrap();
    }

    #[test]
    fn order_zero_thermal_static() {
        // F = f for a unit Gaussian: ∫F [(v^u)² + (v^v)²] = 2√(2π).
        let s = StateW::thermal_window(0.5, 2.0, 1.0).unwrap();
        let wl = Worldline::static_line();
        let wt = TimeWeight::Plain(SmearingFunction::gaussian(1.0));
        let e = term_value(0, 0, &s, &params(), &wl, &wt, &McConfig::default()).unwrap();
        let m2 = s.coincident_hessian().unwrap()[0][0];
        assert!((e.value - m2 * 2.0 * (2.0 * PI).sqrt()).abs() < 1e-9 * e.value.abs());
    }

    #[test]
    fn charge_conjugate_sectors_agree() {
        let p = params();
        let wl = Worldline::static_line();
        let wt = TimeWeight::Plain(SmearingFunction::gaussian(1.0));
        let cfg = McConfig { samples: 4000, seed: 3, ..Default::default() };
        let a = term_value(1, -1, &StateW::Vacuum, &p, &wl, &wt, &cfg).unwrap();
        let b = term_value(1, 1, &StateW::Vacuum, &p, &wl, &wt, &cfg).unwrap();
        assert!((a.value - b.value).abs() < 4.0 * (a.std_error.powi(2) + b.std_error.powi(2)).sqrt());
        assert!(a.value < 0.0);
    }

    #[test]
    fn entry_limit_matches_finite_regulator() {
        let p = params();
        let wt = TimeWeight::Squared(SmearingFunction::gaussian(1.0));
        for wl in [Worldline::static_line(), Worldline::accelerated(1.0).unwrap()] {
            for s in [StateW::Vacuum, StateW::thermal_window(0.5, 2.0, 1.0).unwrap()] {
                for (x, y) in [
                    (SpacetimePoint::new(0.3, 0.1), SpacetimePoint::new(-1.5, 0.2)),
                    (SpacetimePoint::new(-0.2, -0.4), SpacetimePoint::new(-0.9, 1.6)),
                ] {
                    let eps = 2e-4;
                    let cfg = McConfig { ladder: vec![eps], ..Default::default() };
                    let e = future_entry(&wl, &wt, x).unwrap();
                    let wx = if s.is_vacuum() {
                        None
                    } else {
                        let j = s.jet(x, e.z).unwrap();
                        Some(if e.coord == 0 { j.du } else { j.dv })
                    };
                    let lim = neutral_pair_limit(x, y, &e, wx, &s, &p, &cfg).unwrap().0[0];
                    let fin = neutral_pair_value(x, y, eps, 1.0, &s, &p, &wl, &wt).unwrap();
                    assert!((lim - fin).norm() < 2e-3 * (1.0 + fin.norm()), "{lim} vs {fin}");
                }
            }
        }
    }
}
