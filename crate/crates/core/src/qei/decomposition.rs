//! Point-split decomposition check: the full Θ assembly against the positive part built on
//! ∂𝒢̄·∂𝒢 plus the difference part built on ∂(Σ σ_p G_ret(p,z))·∂𝒢.
//!
//! Both assemblies share the renormalized self-products, the W Hessian and the vertex terms, so
//! orders 0 and 1 agree identically; at order 2 the residual probes 𝒢 − 𝒢̄ = Σ σ_p G_ret(p,z),
//! with G_ret evaluated here from its own closed form.

use crate::error::{Error, Result};
use crate::geometry::{SpacetimePoint, Worldline};
use crate::propagators::{step, Regulators};
use crate::series::kernels::PointSet;
use crate::series::mc::{run, sample_point};
use crate::series::{enumerate_sector, McConfig, ModelParams, TimeWeight};
use crate::states::StateW;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Relative floor on the residual's error bar, in units of the mean |full assembly|.
pub const RESIDUAL_FLOOR: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionReport {
    pub order: usize,
    pub residual: f64,
    /// max(MC standard error, floor·scale).
    pub std_error: f64,
    /// Mean |full assembly| per sample.
    pub scale: f64,
    pub samples: usize,
    pub epsilon: f64,
}

impl DecompositionReport {
    pub fn consistent(&self, k: f64) -> bool {
        self.residual.abs() <= k * self.std_error
    }
}

/// G_ret(p,z) = Θ(p⁰−z⁰)·(−1/2π)[arctan(u/ε) + arctan(v/ε)], (u, v) = (u_p−u_z, v_p−v_z),
/// returned as (value, ∂_{u_z}, ∂_{v_z}).
pub fn retarded_jet(p: SpacetimePoint, z: SpacetimePoint, eps: f64) -> [f64; 3] {
    let th = step(p.x0 - z.x0);
    if th == 0.0 {
        return [0.0; 3];
    }
    let (u, v) = (p.u() - z.u(), p.v() - z.v());
    let val = -((u / eps).atan() + (v / eps).atan()) / (2.0 * PI);
    [th * val, th * eps / (2.0 * PI * (u * u + eps * eps)), th * eps / (2.0 * PI * (v * v + eps * eps))]
}

#[allow(clippy::too_many_arguments)]
fn sample(
    rng: &mut rand_chacha::ChaCha8Rng,
    state: &StateW,
    params: &ModelParams,
    wl: &Worldline,
    weight: &TimeWeight,
    eps: f64,
    mu: f64,
    hw: [[f64; 2]; 2],
) -> Result<Vec<Complex64>> {
    let zero = Complex64::new(0.0, 0.0);
    let (tau, qt) = weight.sample(rng);
    let (x, qx) = sample_point(rng, params);
    let (y, qy) = sample_point(rng, params);
    let w = weight.derivs(tau)[0] / qt * params.g.eval(x) / qx * params.g.eval(y) / qy;
    if w == 0.0 || !wl.in_domain(tau) {
        return Ok(vec![zero, zero]);
    }
    let r = Regulators::new(eps, mu)?;
    let z = wl.position(tau);
    let set = PointSet::new(&[x], &[y], &r, state)?;
    let lk = set.links(z, &r, state)?;
    let (rx, ry) = (retarded_jet(x, z, eps), retarded_jet(y, z, eps));
    let dr = [rx[1] - ry[1], rx[2] - ry[2]];
    let (qu, qv) = (wl.vu(tau), wl.vv(tau));
    let b2 = params.beta_sq;
    let (mut resid, mut full_abs) = (zero, 0.0);
    for idx in enumerate_sector(2, 0) {
        let g = set.cal_g(&idx, &lk);
        let gb = set.bar_cal_g(&idx, &lk);
        let e = idx.coefficient() * set.cal_e(&idx, b2);
        let sq = g.squares_renormalized();
        let full = (sq[0] * b2 + hw[0][0]) * (qu * qu) + (sq[1] * b2 + hw[1][1]) * (qv * qv);
        let corr = [g.self_ren[0] - g.self_sq[0], g.self_ren[1] - g.self_sq[1]];
        let pos_u = gb.jet.du * g.jet.du;
        let pos_v = gb.jet.dv * g.jet.dv;
        let diff_u = g.jet.du * dr[0];
        let diff_v = g.jet.dv * dr[1];
        let split = ((pos_u + diff_u + corr[0]) * b2 + hw[0][0]) * (qu * qu) + ((pos_v + diff_v + corr[1]) * b2 + hw[1][1]) * (qv * qv);
        resid += e * (full - split);
        full_abs += (e * full).norm();
    }
    Ok(vec![resid * w, Complex64::new(full_abs * w.abs(), 0.0)])
}

/// Residual [full] − [positive + difference + vertex] at the given order, evaluated at the
/// smallest regulator of the ladder.
pub fn decomposition_check(
    order: usize,
    state: &StateW,
    params: &ModelParams,
    wl: &Worldline,
    weight: &TimeWeight,
    cfg: &McConfig,
) -> Result<DecompositionReport> {
    cfg.validate()?;
    params.validate()?;
    state.validate()?;
    let eps = *cfg.ladder.last().unwrap_or(&1e-3);
    let exact = |order| Ok(DecompositionReport { order, residual: 0.0, std_error: 0.0, scale: 0.0, samples: 0, epsilon: eps });
    match order {
        0 | 1 => exact(order),
        2 => {
            let hw = state.coincident_hessian()?;
            let stream = crate::rng::stream_id("decomposition", 2, 0);
            let m = run(cfg, stream, &[1.0, 0.0], |rng| sample(rng, state, params, wl, weight, eps, cfg.mu, hw))?;
            let scale = m.per_eps[1];
            let se = (m.var_re / m.n as f64).sqrt();
            Ok(DecompositionReport { order, residual: m.mean.re, std_error: se.max(RESIDUAL_FLOOR * scale), scale, samples: m.n, epsilon: eps })
        }
        _ => Err(Error::Domain(format!("decomposition check covers orders ≤ 2, got {order}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagators::retarded;
    use crate::smearing::{AdiabaticCutoff, SmearingFunction};

    #[test]
    fn difference_is_retarded() {
        let r = Regulators::new(1e-3, 1.0).unwrap();
        let xs = [SpacetimePoint::new(0.7, 0.2)];
        let ys = [SpacetimePoint::new(-0.4, 1.1)];
        let z = SpacetimePoint::new(0.1, -0.3);
        let set = PointSet::new(&xs, &ys, &r, &StateW::Vacuum).unwrap();
        let lk = set.links(z, &r, &StateW::Vacuum).unwrap();
        let want = retarded(xs[0], z, &r) - retarded(ys[0], z, &r);
        let closed = retarded_jet(xs[0], z, 1e-3)[0] - retarded_jet(ys[0], z, 1e-3)[0];
        assert!((want.re - closed).abs() < 1e-12 && want.im.abs() < 1e-12);
        for idx in enumerate_sector(2, 0) {
            let d = set.cal_g(&idx, &lk).jet.val - set.bar_cal_g(&idx, &lk).jet.val;
            assert!((d - want).norm() < 1e-12, "{idx:?}");
        }
    }

    #[test]
    fn order_two_residual_vanishes() {
        let p = ModelParams::new(PI, AdiabaticCutoff::gaussian(1.0, 2.0, 2.0)).unwrap();
        let cfg = McConfig { samples: 2000, ..McConfig::default() };
        let w = TimeWeight::Squared(SmearingFunction::gaussian(1.0));
        let rep = decomposition_check(2, &StateW::Vacuum, &p, &Worldline::static_line(), &w, &cfg).unwrap();
        assert!(rep.scale > 0.0);
        assert!(rep.consistent(3.0), "{rep:?}");
    }
}
