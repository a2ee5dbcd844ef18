//! Smeared divergence ∫d²z ∂^μf ⟨Θ_μc⟩ for a light-cone component c, with g constant on supp f.
//!
//! In light-cone components the divergence pairs ∂_{c̄}f with Θ_cc and ∂_cf with Θ_{cc̄}
//! (c̄ the other coordinate). At order g⁰ only the constant W Hessian enters. At order g² the
//! neutral two-point term feeds Θ_cc and the one-point vertex term feeds Θ_{cc̄} = −½(…).
//! The Δ = H^F − H⁺ factors are taken at ε → 0, where the z-integrals close:
//!   ∫d²z ∂_{c̄}f ∂_c²Δ(x,z) = −¼ ∂_cf(x),   ∫d²z ∂_{c̄}f ∂_cΔ(x,z) φ(c_z) = ¼ f(x) φ(c_x).

use super::kernels::{vertex_factor, PointSet};
use super::mc::{extrapolation_weights, McConfig};
use super::{enumerate_sector, ModelParams};
use crate::error::{Error, Result};
use crate::geometry::SpacetimePoint;
use crate::propagators::{hadamard_plus, link_jet, Link, Regulators, I};
use crate::quad::{integrate_breaks, QuadOpts};
use crate::rng::{sample_rng, stream_id};
use crate::smearing::TestFunction2D;
use crate::states::StateW;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    U,
    V,
}

impl Component {
    fn index(self) -> usize {
        match self {
            Component::U => 0,
            Component::V => 1,
        }
    }
}

/// One divergence estimate with its standard error; `parts` holds the individual pieces.
#[derive(Clone, Debug, PartialEq)]
pub struct DivergenceEstimate {
    pub value: f64,
    pub std_error: f64,
    pub parts: Vec<(String, f64, f64)>,
}

impl DivergenceEstimate {
    pub fn consistent_with_zero(&self, k: f64) -> bool {
        self.value.abs() <= k * self.std_error
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConservationReport {
    pub component: Component,
    pub order0: DivergenceEstimate,
    pub order1: DivergenceEstimate,
}

fn check_plateau(p: &ModelParams, f: &TestFunction2D) -> Result<()> {
    let pl = p.g.plateau.ok_or_else(|| Error::Input("conservation needs a cutoff g with a plateau".into()))?;
    let ((a0, b0), (a1, b1)) = f.support();
    let inside = |lo: f64, hi: f64, i: usize| lo >= p.g.center[i] - pl.half_width[i] && hi <= p.g.center[i] + pl.half_width[i];
    if inside(a0, b0, 0) && inside(a1, b1, 1) {
        Ok(())
    } else {
        Err(Error::Input("supp f is not inside the plateau of g".into()))
    }
}

fn jet_c(f: &TestFunction2D, x: SpacetimePoint, c: usize) -> (f64, f64, f64) {
    let j = f.jet(x);
    if c == 0 {
        (j.val, j.du, j.dv)
    } else {
        (j.val, j.dv, j.du)
    }
}

/// Divergence of the smeared stress tensor at orders g⁰ and g².
pub fn conservation_check(
    state: &StateW,
    params: &ModelParams,
    f: &TestFunction2D,
    component: Component,
    cfg: &McConfig,
) -> Result<ConservationReport> {
    cfg.validate()?;
    params.validate()?;
    state.validate()?;
    check_plateau(params, f)?;
    if params.beta_sq > params.mc_default_beta_sq_cap {
        return Err(Error::Domain(format!("β² = {} above the plain-sampling cap", params.beta_sq)));
    }
    let c = component.index();
    let ((a0, b0), (a1, b1)) = f.support();
    let area = (b0 - a0) * (b1 - a1);

    // Order g⁰: m₂ ∫ ∂_{c̄}f.
    let m2 = state.coincident_hessian()?[0][0];
    let grid = |a: f64, b: f64| (0..=8).map(|k| a + (b - a) * k as f64 / 8.0).collect::<Vec<_>>();
    let opts = QuadOpts::tol(1e-15, 1e-12);
    let r0 = integrate_breaks(
        |t| integrate_breaks(|s| jet_c(f, SpacetimePoint::new(t, s), c).2, &grid(a1, b1), opts).value,
        &grid(a0, b0),
        opts,
    );
    let scale = m2.abs() * area * f_max(f);
    let order0 = DivergenceEstimate {
        value: m2 * r0.value,
        std_error: (m2.abs() * r0.error).max(1e-13 * scale),
        parts: vec![],
    };

    let weights = extrapolation_weights(&cfg.ladder, &[1.0 - params.gamma(), 1.0])?;
    let (vtx, vtx_err) = run(cfg, stream_id("cons-vertex", c as i64, 0), &weights, |rng| vertex_sample(rng, state, params, f, c, cfg))?;
    let (pair, pair_err) = run(cfg, stream_id("cons-pair", c as i64, 0), &weights, |rng| pair_sample(rng, state, params, f, c, cfg))?;
    let order1 = DivergenceEstimate {
        value: vtx + pair,
        std_error: (vtx_err * vtx_err + pair_err * pair_err).sqrt(),
        parts: vec![("vertex".into(), vtx, vtx_err), ("neutral".into(), pair, pair_err)],
    };
    Ok(ConservationReport { component, order0, order1 })
}

fn f_max(f: &TestFunction2D) -> f64 {
    let ((a0, b0), (a1, b1)) = f.support();
    f.eval(SpacetimePoint::new(0.5 * (a0 + b0), 0.5 * (a1 + b1))).abs().max(1e-300)
}

fn run<F>(cfg: &McConfig, stream: u64, weights: &[f64], f: F) -> Result<(f64, f64)>
where
    F: Fn(&mut ChaCha8Rng) -> Result<Vec<Complex64>> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let vals: Vec<Result<f64>> = pool.install(|| {
        (0..cfg.samples)
            .into_par_iter()
            .map(|i| {
                let v = f(&mut sample_rng(cfg.seed, stream, i as u64))?;
                Ok(v.iter().zip(weights).map(|(x, w)| x.re * w).sum())
            })
            .collect()
    });
    let (mut s, mut s2) = (0.0, 0.0);
    for v in vals {
        let v = v?;
        s += v;
        s2 += v * v;
    }
    let n = cfg.samples as f64;
    let mean = s / n;
    let var = ((s2 / n - mean * mean) * n / (n - 1.0)).max(0.0);
    Ok((mean, (var / n).sqrt()))
}

fn uniform_in(rng: &mut ChaCha8Rng, f: &TestFunction2D) -> (SpacetimePoint, f64) {
    let ((a0, b0), (a1, b1)) = f.support();
    let p = SpacetimePoint::new(a0 + (b0 - a0) * rng.random::<f64>(), a1 + (b1 - a1) * rng.random::<f64>());
    (p, 1.0 / ((b0 - a0) * (b1 - a1)))
}

/// ∂_cf(z) ⟨Θ_{cc̄}⟩ at order g²: y from the g-proposal, the c̄-coordinate of z uniform over
/// supp f and the c-coordinate integrated by quadrature along the line through supp f.
fn vertex_sample(
    rng: &mut ChaCha8Rng,
    state: &StateW,
    params: &ModelParams,
    f: &TestFunction2D,
    c: usize,
    cfg: &McConfig,
) -> Result<Vec<Complex64>> {
    let l = cfg.ladder.len();
    let ((a0, b0), (a1, b1)) = f.support();
    // c̄ = t ± x ranges over [a0 ± …]; for c = u the fixed coordinate is v = t + x.
    let (olo, ohi) = if c == 0 { (a0 + a1, b0 + b1) } else { (a0 - b1, b0 - a1) };
    let other = olo + (ohi - olo) * rng.random::<f64>();
    let (gcen, sd) = params.g.proposal();
    let n0: f64 = rng.sample(StandardNormal);
    let n1: f64 = rng.sample(StandardNormal);
    let y = SpacetimePoint::new(gcen[0] + sd[0] * n0, gcen[1] + sd[1] * n1);
    let qy = (-0.5 * (n0 * n0 + n1 * n1)).exp() / (2.0 * PI * sd[0] * sd[1]);
    let gy = params.g.eval(y);
    // Segment of the line {c̄ = other} inside the box: t = (c + other)/2, x = ±(other − c)/2.
    let (lo, hi) = if c == 0 {
        ((2.0 * a0 - other).max(other - 2.0 * b1), (2.0 * b0 - other).min(other - 2.0 * a1))
    } else {
        ((2.0 * a0 - other).max(other + 2.0 * a1), (2.0 * b0 - other).min(other + 2.0 * b1))
    };
    if gy == 0.0 || !(lo < hi) {
        return Ok(vec![Complex64::new(0.0, 0.0); l]);
    }
    let z_at = |t: f64| if c == 0 { SpacetimePoint::from_uv(t, other) } else { SpacetimePoint::from_uv(other, t) };
    let yc = if c == 0 { y.u() } else { y.v() };
    let mut pts: Vec<f64> = (0..=16).map(|k| lo + (hi - lo) * k as f64 / 16.0).collect();
    for e in &cfg.ladder {
        for m in [0.0, 1.0, 4.0, 16.0, 64.0] {
            pts.push(yc + m * e);
            pts.push(yc - m * e);
        }
    }
    pts.retain(|t| *t >= lo && *t <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let err = std::cell::Cell::new(None);
    let res = integrate_breaks(
        |t| {
            let z = z_at(t);
            let (_, fc, _) = jet_c(f, z, c);
            let mut out = super::mc::C4([Complex64::new(0.0, 0.0); 4]);
            if fc == 0.0 {
                return out;
            }
            for (k, &eps) in cfg.ladder.iter().enumerate() {
                let v = Regulators::new(eps, cfg.mu).and_then(|r| vertex_kernel(state, params, y, z, &r));
                match v {
                    Ok(v) => out.0[k] = v * fc,
                    Err(e) => err.set(Some(e)),
                }
            }
            out
        },
        &pts,
        QuadOpts { abs_tol: 1e-12, rel_tol: 1e-8, max_intervals: 2000 },
    );
    if let Some(e) = err.take() {
        return Err(e);
    }
    // d²z = ½ dc dc̄, c̄ sampled uniformly.
    let w = 0.5 * (ohi - olo) * gy / qy * -0.5;
    Ok(res.value.0[..l].iter().map(|v| v * w).collect())
}

/// Σ_s Σ_idx c ℰ (1−β²/8π) g(z) exp[∓iβ²𝒢 − (β²/2)W(z,z)] for one insertion at y.
fn vertex_kernel(state: &StateW, params: &ModelParams, y: SpacetimePoint, z: SpacetimePoint, r: &Regulators) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for s in [-1, 1] {
        let (xs, ys): (Vec<_>, Vec<_>) = if s < 0 { (vec![], vec![y]) } else { (vec![y], vec![]) };
        let set = PointSet::new(&xs, &ys, r, state)?;
        let lk = set.links(z, r, state)?;
        for idx in enumerate_sector(1, s) {
            let g = set.cal_g(&idx, &lk);
            acc += idx.coefficient() * set.cal_e(&idx, params.beta_sq) * vertex_factor(s, g.jet.val, z, params, state)?;
        }
    }
    Ok(acc)
}

/// ∂_{c̄}f ⟨Θ_cc⟩ at order g²: x uniform on supp f, the c̄-coordinate of y from its marginal,
/// and the separation along c integrated by quadrature over y⁰ < x⁰.
fn pair_sample(
    rng: &mut ChaCha8Rng,
    state: &StateW,
    params: &ModelParams,
    f: &TestFunction2D,
    c: usize,
    cfg: &McConfig,
) -> Result<Vec<Complex64>> {
    let l = cfg.ladder.len();
    let (x, qx) = uniform_in(rng, f);
    let nz: f64 = rng.sample(StandardNormal);
    let (fx, fcx, _) = jet_c(f, x, c);
    if fx == 0.0 && fcx == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); l]);
    }
    let (gcen, gsd) = params.g.proposal();
    let sd_l = (gsd[0] * gsd[0] + gsd[1] * gsd[1]).sqrt();
    let centre = [gcen[0] - gcen[1], gcen[0] + gcen[1]];
    let other = centre[1 - c] + sd_l * nz;
    let q_other = (-0.5 * nz * nz).exp() / (sd_l * (2.0 * PI).sqrt());
    let xc = [x.u(), x.v()];
    let lo = -(xc[1 - c] - other);
    let hi = xc[c] - (centre[c] - 14.0 * sd_l);
    if !(lo < hi) {
        return Ok(vec![Complex64::new(0.0, 0.0); l]);
    }
    let y_at = |s: f64| if c == 0 { SpacetimePoint::from_uv(x.u() - s, other) } else { SpacetimePoint::from_uv(other, x.v() - s) };
    let b2 = params.beta_sq;
    let thermal = !state.is_vacuum();
    let w0 = if thermal { state.eval(x, x)? } else { 0.0 };
    let pick = |du: Complex64, dv: Complex64| if c == 0 { du } else { dv };
    let err = std::cell::Cell::new(None);
    let body = |s: f64| -> Result<super::mc::C4> {
        let y = y_at(s);
        let gy = params.g.eval(y);
        let mut out = super::mc::C4([Complex64::new(0.0, 0.0); 4]);
        if gy == 0.0 {
            return Ok(out);
        }
        let (om, wf) = if thermal {
            let j = state.jet(y, x)?;
            let dwy = if c == 0 { j.du } else { j.dv };
            (I * dwy, b2 * (state.eval(x, y)? - w0))
        } else {
            (Complex64::new(0.0, 0.0), 0.0)
        };
        for (k, &eps) in cfg.ladder.iter().enumerate() {
            let r = Regulators::new(eps, cfg.mu)?;
            let e_xy = (I * b2 * hadamard_plus(x, y, &r)).exp();
            let e_yx = (I * b2 * hadamard_plus(y, x, &r)).exp();
            let bp = link_jet(Link::PlusPz, y, x, &r);
            let bf = link_jet(Link::Feynman, y, x, &r);
            let selfp = I / (16.0 * PI) * fcx;
            let v = (e_yx - e_xy) * (selfp + om * (0.5 * fx)) - (e_yx * pick(bp.du, bp.dv) - e_xy * pick(bf.du, bf.dv)) * (0.5 * fx);
            out.0[k] = v * (b2 * wf.exp() * gy);
        }
        Ok(out)
    };
    let mut pts = vec![lo, hi];
    for k in -14..=14 {
        pts.push(k as f64 * sd_l / 3.0);
    }
    for e in &cfg.ladder {
        for m in [0.0, 1.0, 4.0, 16.0, 64.0, 256.0] {
            pts.push(m * e);
            pts.push(-m * e);
        }
    }
    pts.retain(|t| *t >= lo && *t <= hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let res = integrate_breaks(
        |s| match body(s) {
            Ok(v) => v,
            Err(e) => {
                err.set(Some(e));
                super::mc::C4([Complex64::new(0.0, 0.0); 4])
            }
        },
        &pts,
        QuadOpts { abs_tol: 1e-12, rel_tol: 1e-8, max_intervals: 4000 },
    );
    if let Some(e) = err.take() {
        return Err(e);
    }
    let w = params.g.eval(x) / (qx * q_other);
    Ok(res.value.0[..l].iter().map(|v| v * w).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smearing::{AdiabaticCutoff, Plateau, SmearingFunction};

    fn plateau_params() -> ModelParams {
        let mut g = AdiabaticCutoff::gaussian(0.5, 1.5, 1.5);
        g.plateau = Some(Plateau { half_width: [2.0, 2.0], ramp: [1.0, 1.0] });
        ModelParams::new(PI, g).unwrap()
    }

    #[test]
    fn requires_plateau() {
        let p = ModelParams::new(PI, AdiabaticCutoff::gaussian(1.0, 2.0, 2.0)).unwrap();
        let f = TestFunction2D::new(SmearingFunction::bump(1.0), SmearingFunction::bump(1.0));
        let cfg = McConfig { samples: 10, ..Default::default() };
        assert!(conservation_check(&StateW::Vacuum, &p, &f, Component::U, &cfg).is_err());
    }

    #[test]
    fn vacuum_divergence_small_run() {
        let p = plateau_params();
        let f = TestFunction2D::new(SmearingFunction::bump(1.0).centered(0.3), SmearingFunction::bump(0.8));
        let cfg = McConfig { samples: 3000, seed: 5, ..Default::default() };
        for comp in [Component::U, Component::V] {
            let r = conservation_check(&StateW::Vacuum, &p, &f, comp, &cfg).unwrap();
            assert_eq!(r.order0.value, 0.0);
            let d = &r.order1;
            assert!(d.consistent_with_zero(4.0), "{comp:?}: {d:?}");
            assert!(d.parts.iter().all(|(_, v, e)| v.abs() > 5.0 * e), "{d:?}");
        }
    }
}
