//! The free bound K₀, the worldline-difference terms Δ^{u/v}, and the h⁰ diagonal integral
//! computed both through the Fourier representation and through Parseval.

use crate::error::{Error, Result};
use crate::geometry::Worldline;
use crate::quad::{integrate_breaks, QuadOpts, QuadValue};
use crate::series::mc::extrapolation_weights;
use crate::smearing::{CompactTruncation, SmearingFunction};
use std::f64::consts::PI;

/// Default cap on |v¹| before the worldline bounds are declared divergent.
pub const DEFAULT_V1_CAP: f64 = 1e6;

fn breakpoints(f: &SmearingFunction) -> Vec<f64> {
    let (lo, hi) = f.support();
    let (c, s) = (f.center, f.scale());
    let mut v: Vec<f64> = (-12..=12).map(|k| c + k as f64 * s).filter(|t| *t > lo && *t < hi).collect();
    v.push(lo);
    v.push(hi);
    v.sort_by(f64::total_cmp);
    v
}

/// K₀ split as (straight part, acceleration part):
/// (1/24π)·6∫f'² and (1/24π)∫f²(v̇¹)²/(1+(v¹)²).
pub fn k0(wl: &Worldline, f: &SmearingFunction) -> Result<(f64, f64)> {
    f.validate()?;
    let pts = breakpoints(f);
    let opts = QuadOpts { abs_tol: 1e-13, rel_tol: 1e-13, max_intervals: 4000 };
    let straight = integrate_breaks(|t| f.derivs(t)[1].powi(2), &pts, opts);
    let accel = integrate_breaks(
        |t| {
            let fv = f.eval(t);
            if fv == 0.0 {
                return 0.0;
            }
            let r = wl.a1(t) / 1f64.hypot(wl.v1(t));
            fv * fv * r * r
        },
        &pts,
        opts,
    );
    for q in [&straight, &accel] {
        if !q.converged || !q.value.is_finite() {
            return Err(Error::Numerical(format!("K0 quadrature did not converge (error {:e})", q.error)));
        }
    }
    Ok((6.0 * straight.value / (24.0 * PI), accel.value / (24.0 * PI)))
}

fn near_null(wl: &Worldline, tau: f64, cap: f64) -> Result<()> {
    let v1 = wl.v1(tau).abs();
    if v1 <= cap {
        Ok(())
    } else {
        Err(Error::NearNull { v1, cap })
    }
}

/// −(1/3) a^{−3/2} ∂²_τ a^{−1/2} for a frame factor a with derivatives a', a''.
fn schwarz(a: f64, d1: f64, d2: f64) -> f64 {
    let dd = 0.75 * a.powf(-2.5) * d1 * d1 - 0.5 * a.powf(-1.5) * d2;
    -a.powf(-1.5) * dd / 3.0
}

/// Diagonal values (Δ^u, Δ^v) at τ, built from v⁰ − v¹ and v⁰ + v¹.
pub fn delta_diag(wl: &Worldline, tau: f64, v1_cap: f64) -> Result<(f64, f64)> {
    near_null(wl, tau, v1_cap)?;
    let (a, b) = (wl.vu(tau), wl.vv(tau));
    let (d1, d2) = wl.dvu_dvv(tau);
    Ok((schwarz(a, d1[0], d2[0]), schwarz(b, d1[1], d2[1])))
}

/// h^Δ(τ,τ)/f(τ)² = (1/4π)[(v⁰−v¹)²Δ^u + (v⁰+v¹)²Δ^v].
pub fn h_delta_diag(wl: &Worldline, tau: f64, v1_cap: f64) -> Result<f64> {
    let (du, dv) = delta_diag(wl, tau, v1_cap)?;
    let (a, b) = (wl.vu(tau), wl.vv(tau));
    Ok((a * a * du + b * b * dv) / (4.0 * PI))
}

/// Off-diagonal (Δ^u, Δ^v)(τ, τ') = 1/(u−u')² − τ̇(u)τ̇(u')/(τ−τ')², and the same in v.
pub fn delta_offdiag(wl: &Worldline, tau: f64, tau2: f64, v1_cap: f64) -> Result<(f64, f64)> {
    near_null(wl, tau, v1_cap)?;
    near_null(wl, tau2, v1_cap)?;
    if tau == tau2 {
        return Err(Error::Input("off-diagonal Δ needs τ ≠ τ'".into()));
    }
    let dt2 = (tau - tau2).powi(2);
    let du = wl.u_of(tau) - wl.u_of(tau2);
    let dv = wl.v_of(tau) - wl.v_of(tau2);
    let pu = 1.0 / (wl.vu(tau) * wl.vu(tau2));
    let pv = 1.0 / (wl.vv(tau) * wl.vv(tau2));
    Ok((1.0 / (du * du) - pu / dt2, 1.0 / (dv * dv) - pv / dt2))
}

/// Coincidence limit of [`delta_offdiag`] from symmetric splittings τ ± h/2, h ∈ {h₀, h₀/2, h₀/4},
/// Richardson-extrapolated in h² and h⁴. Returns ((Δ^u, Δ^v), spread between 2- and 3-point fits).
pub fn delta_limit(wl: &Worldline, tau: f64, h0: f64, v1_cap: f64) -> Result<((f64, f64), f64)> {
    let hs = [h0, h0 / 2.0, h0 / 4.0];
    let vals: Vec<(f64, f64)> = hs.iter().map(|h| delta_offdiag(wl, tau - h / 2.0, tau + h / 2.0, v1_cap)).collect::<Result<_>>()?;
    let w3 = extrapolation_weights(&hs, &[2.0, 4.0])?;
    let w2 = extrapolation_weights(&hs[1..], &[2.0])?;
    let comb = |w: &[f64], v: &[(f64, f64)]| w.iter().zip(v).fold((0.0, 0.0), |acc, (w, x)| (acc.0 + w * x.0, acc.1 + w * x.1));
    let l3 = comb(&w3, &vals);
    let l2 = comb(&w2, &vals[1..]);
    Ok((l3, (l3.0 - l2.0).abs().max((l3.1 - l2.1).abs())))
}

#[derive(Clone, Copy, Debug)]
struct V3([f64; 3]);

impl std::ops::Add for V3 {
    type Output = V3;
    fn add(self, o: V3) -> V3 {
        V3([0, 1, 2].map(|i| self.0[i] + o.0[i]))
    }
}
impl std::ops::Sub for V3 {
    type Output = V3;
    fn sub(self, o: V3) -> V3 {
        V3([0, 1, 2].map(|i| self.0[i] - o.0[i]))
    }
}
impl std::ops::Mul<f64> for V3 {
    type Output = V3;
    fn mul(self, a: f64) -> V3 {
        V3(self.0.map(|x| x * a))
    }
}
impl QuadValue for V3 {
    fn zero() -> Self {
        V3([0.0; 3])
    }
    fn norm(self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// [1 − e^{−pε}(1+pε)]/ε².
pub fn fourier_kernel(p: f64, eps: f64) -> f64 {
    let x = p * eps;
    let num = if x < 0.1 {
        // Σ_{k≥2} (−1)^k (k−1) x^k / k!
        let mut term = x * x / 2.0;
        let mut s = term;
        for k in 3..30 {
            term *= -x / k as f64;
            let add = term * (k - 1) as f64;
            s += add;
            if add.abs() < 1e-18 * s.abs() {
                break;
            }
        }
        s
    } else {
        1.0 - (-x).exp() * (1.0 + x)
    };
    num / (eps * eps)
}

/// Regulator ladder for the Fourier pipeline.
pub const H0_LADDER: [f64; 3] = [4e-3, 2e-3, 1e-3];

#[derive(Clone, Debug, PartialEq)]
pub struct H0Result {
    /// Fourier route, extrapolated to ε → 0.
    pub fourier: f64,
    /// Parseval route −(1/4π)∫f_N'².
    pub parseval: f64,
    /// Fourier route at each ladder value.
    pub per_epsilon: Vec<f64>,
    /// Difference between the two- and three-point extrapolations.
    pub extrapolation_residual: f64,
    pub flagged: bool,
}

impl H0Result {
    pub fn relative_gap(&self) -> f64 {
        let s = self.parseval.abs().max(self.fourier.abs());
        if s == 0.0 {
            0.0
        } else {
            (self.fourier - self.parseval).abs() / s
        }
    }
}

/// −(1/4π)∫ f_N'(τ)² dτ.
pub fn h0_parseval(f: &CompactTruncation) -> f64 {
    -f.deriv_l2() / (4.0 * PI)
}

/// −(1/2π²)∫₀^∞ |f̃_N(p)|² K_ε(p) dp on [`H0_LADDER`], plus the ε → 0 extrapolation.
pub fn h0_fourier(f: &CompactTruncation, tol: f64) -> Result<(f64, Vec<f64>, f64, bool)> {
    if f.base.amplitude == 0.0 {
        return Ok((0.0, vec![0.0; 3], 0.0, false));
    }
    // f̃_N decays faster than any power; beyond p_max it is far below the working precision.
    let p_max = 256.0 / f.base.scale().min(1.0);
    let mut pts = vec![0.0];
    let mut p = 0.5;
    while p < p_max {
        pts.push(p);
        p *= 2.0;
    }
    pts.push(p_max);
    let opts = QuadOpts { abs_tol: 0.0, rel_tol: 1e-11, max_intervals: 3000 };
    let q = integrate_breaks(
        |p| {
            let m = f.fourier(p).norm_sqr();
            V3(H0_LADDER.map(|e| m * fourier_kernel(p, e)))
        },
        &pts,
        opts,
    );
    let vals: Vec<f64> = q.value.0.iter().map(|v| -v / (2.0 * PI * PI)).collect();
    let tail = f.fourier(p_max).norm_sqr() * fourier_kernel(p_max, H0_LADDER[2]) * p_max / (2.0 * PI * PI);
    let w3 = extrapolation_weights(&H0_LADDER, &[1.0, 2.0])?;
    let w2 = extrapolation_weights(&H0_LADDER[1..], &[1.0])?;
    let e3: f64 = w3.iter().zip(&vals).map(|(w, v)| w * v).sum();
    let e2: f64 = w2.iter().zip(&vals[1..]).map(|(w, v)| w * v).sum();
    let resid = (e3 - e2).abs();
    let scale = e3.abs().max(f64::MIN_POSITIVE);
    let flagged = !q.converged || resid > tol * scale || tail > tol * scale;
    Ok((e3, vals, resid, flagged))
}

/// Both pipelines for h⁰(f_N); `tol` is the relative tolerance for the extrapolation flag.
pub fn h0_integral(f: &CompactTruncation, tol: f64) -> Result<H0Result> {
    f.base.validate()?;
    let (fourier, per_epsilon, extrapolation_residual, flagged) = h0_fourier(f, tol)?;
    Ok(H0Result { fourier, parseval: h0_parseval(f), per_epsilon, extrapolation_residual, flagged })
}
