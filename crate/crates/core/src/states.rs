//! State-dependent part W of quasi-free Hadamard states.
//!
//! The thermal-window kernel integrates out the light-like momentum deltas:
//! W(x,y) = (1/2π) ∫_{E₀}^{E₁} w(E) [cos(E u) + cos(E v)] dE,
//! w(E) = e^{−bE} / (E (1 − e^{−bE})), with (u, v) = lightcone(x, y).

use crate::error::{Error, Result};
use crate::geometry::{lightcone, SpacetimePoint};
use crate::propagators::{massive_hadamard_uv, Regulators};
use crate::quad::{integrate, integrate_inf, QuadOpts, QuadValue};
use crate::rng::sample_rng;
use crate::smearing::{SmearingFunction, TestFunction2D};
use crate::special::EULER_GAMMA;
use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StateW {
    Vacuum,
    /// b is the inverse temperature.
    ThermalWindow { e0: f64, e1: f64, b: f64 },
}

const W_OPTS: QuadOpts = QuadOpts { abs_tol: 1e-12, rel_tol: 1e-13, max_intervals: 4000 };

/// Spectral weight e^{−bE}/(E(1−e^{−bE})) = 1/(E (e^{bE} − 1)).
pub fn window_weight(e: f64, b: f64) -> f64 {
    1.0 / (e * (b * e).exp_m1())
}

/// Derivative counts with respect to (u_x, v_x, u_y, v_y).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MultiIndex {
    pub ux: u8,
    pub vx: u8,
    pub uy: u8,
    pub vy: u8,
}

impl MultiIndex {
    pub fn new(ux: u8, vx: u8, uy: u8, vy: u8) -> Self {
        MultiIndex { ux, vx, uy, vy }
    }
    pub fn order(&self) -> u8 {
        self.ux + self.vx + self.uy + self.vy
    }
}

/// Value with first and second derivatives of one cosine sector with respect to the
/// second argument's light-cone coordinate.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct V3([f64; 3]);

impl std::ops::Add for V3 {
    type Output = V3;
    fn add(self, o: V3) -> V3 {
        V3([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}
impl std::ops::Sub for V3 {
    type Output = V3;
    fn sub(self, o: V3) -> V3 {
        V3([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}
impl std::ops::Mul<f64> for V3 {
    type Output = V3;
    fn mul(self, c: f64) -> V3 {
        V3([self.0[0] * c, self.0[1] * c, self.0[2] * c])
    }
}
impl QuadValue for V3 {
    fn zero() -> Self {
        V3([0.0; 3])
    }
    fn norm(self) -> f64 {
        self.0.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }
}

/// W(x, z) and its derivatives in the second argument.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct WJet {
    pub val: f64,
    pub du: f64,
    pub dv: f64,
    pub duu: f64,
    pub dvv: f64,
}

impl StateW {
    pub fn thermal_window(e0: f64, e1: f64, b: f64) -> Result<Self> {
        let s = StateW::ThermalWindow { e0, e1, b };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StateW::Vacuum => Ok(()),
            StateW::ThermalWindow { e0, e1, b } => {
                if e0 > 0.0 && e1 > e0 && e1.is_finite() && b > 0.0 && b.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Input(format!("thermal window needs 0 < E0 < E1 and b > 0, got E0={e0}, E1={e1}, b={b}")))
                }
            }
        }
    }

    pub fn is_vacuum(&self) -> bool {
        matches!(self, StateW::Vacuum)
    }

    /// ∫ E^k w(E) dE over the window.
    pub fn moment(&self, k: i32) -> Result<f64> {
        match *self {
            StateW::Vacuum => Ok(0.0),
            StateW::ThermalWindow { e0, e1, b } => {
                let r = integrate(|e: f64| e.powi(k) * window_weight(e, b), e0, e1, W_OPTS);
                checked(r.value, r.converged, r.error)
            }
        }
    }

    /// (∫ w cos(Es), ∫ E w sin(Es), ∫ E² w cos(Es)).
    fn sector(&self, s: f64) -> Result<[f64; 3]> {
        match *self {
            StateW::Vacuum => Ok([0.0; 3]),
            StateW::ThermalWindow { e0, e1, b } => {
                if s.abs() * (e1 - e0) > 4000.0 {
                    return Ok(sector_asymptotic(e0, e1, b, s));
                }
                let f = |e: f64| {
                    let w = window_weight(e, b);
                    let (sn, cs) = (e * s).sin_cos();
                    V3([w * cs, w * e * sn, w * e * e * cs])
                };
                let r = integrate(f, e0, e1, W_OPTS);
                if !r.converged {
                    return Err(Error::Numerical(format!("W quadrature did not converge (err {})", r.error)));
                }
                Ok(r.value.0)
            }
        }
    }

    /// W(x, y).
    pub fn eval(&self, x: SpacetimePoint, y: SpacetimePoint) -> Result<f64> {
        w_eval(self, x, y)
    }

    /// W(x, z) with derivatives in (u_z, v_z).
    pub fn jet(&self, x: SpacetimePoint, z: SpacetimePoint) -> Result<WJet> {
        if self.is_vacuum() {
            return Ok(WJet::default());
        }
        let lc = lightcone(x, z);
        let a = self.sector(lc.u)?;
        let b = self.sector(lc.v)?;
        let k = 1.0 / (2.0 * PI);
        // d/du_z cos(E(u_x − u_z)) = E sin(E u); d²/du_z² = −E² cos(E u).
        Ok(WJet { val: k * (a[0] + b[0]), du: k * a[1], dv: k * b[1], duu: -k * a[2], dvv: -k * b[2] })
    }

    /// ∂_{u_z}∂_{u_z'} W(z, z') at coincidence (equal to the v–v entry; mixed entries vanish).
    pub fn coincident_hessian(&self) -> Result<[[f64; 2]; 2]> {
        let m2 = self.moment(2)? / (2.0 * PI);
        Ok([[m2, 0.0], [0.0, m2]])
    }
}

/// Endpoint expansion ∫φ e^{iEs} ≈ Σ_k (−1)^k [φ^{(k)} e^{iEs}/(is)^{k+1}] for large |s|.
fn sector_asymptotic(e0: f64, e1: f64, b: f64, s: f64) -> [f64; 3] {
    let phi = |e: f64, j: usize| window_weight(e, b) * e.powi(j as i32);
    let d = |e: f64, j: usize, k: usize| {
        let h = 1e-3 * e;
        match k {
            0 => phi(e, j),
            1 => (phi(e + h, j) - phi(e - h, j)) / (2.0 * h),
            _ => (phi(e + h, j) - 2.0 * phi(e, j) + phi(e - h, j)) / (h * h),
        }
    };
    let is = Complex64::new(0.0, s);
    let int = |j: usize| {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..3 {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let den = is.powi(k as i32 + 1);
            let at = |e: f64| Complex64::from_polar(1.0, e * s) * d(e, j, k) / den;
            acc += (at(e1) - at(e0)) * sign;
        }
        acc
    };
    let (i0, i1, i2) = (int(0), int(1), int(2));
    [i0.re, i1.im, i2.re]
}

fn checked(v: f64, converged: bool, err: f64) -> Result<f64> {
    if converged {
        Ok(v)
    } else {
        Err(Error::Numerical(format!("quadrature did not converge (err {err})")))
    }
}

pub fn w_eval(s: &StateW, x: SpacetimePoint, y: SpacetimePoint) -> Result<f64> {
    match *s {
        StateW::Vacuum => Ok(0.0),
        StateW::ThermalWindow { e0, e1, b } => {
            let lc = lightcone(x, y);
            let f = |e: f64| window_weight(e, b) * ((e * lc.u).cos() + (e * lc.v).cos());
            let r = integrate(f, e0, e1, W_OPTS);
            checked(r.value / (2.0 * PI), r.converged, r.error)
        }
    }
}

/// Mixed derivative of W(x, y) of total order ≤ 2.
pub fn w_derivs(s: &StateW, x: SpacetimePoint, y: SpacetimePoint, m: MultiIndex) -> Result<f64> {
    if m.order() > 2 {
        return Err(Error::Input(format!("derivative order {} exceeds 2", m.order())));
    }
    let (nu, nv) = (m.ux + m.uy, m.vx + m.vy);
    if nu > 0 && nv > 0 {
        return Ok(0.0);
    }
    let StateW::ThermalWindow { e0, e1, b } = *s else {
        return Ok(0.0);
    };
    let lc = lightcone(x, y);
    let (arg, n, ny) = if nu > 0 { (lc.u, nu, m.uy) } else if nv > 0 { (lc.v, nv, m.vy) } else { (0.0, 0, 0) };
    // ∂_y = −∂_s on a function of s = s_x − s_y.
    let sign = if ny % 2 == 1 { -1.0 } else { 1.0 };
    let f = |e: f64| {
        let w = window_weight(e, b);
        match n {
            0 => w * ((e * lc.u).cos() + (e * lc.v).cos()),
            1 => -w * e * (e * arg).sin(),
            _ => -w * e * e * (e * arg).cos(),
        }
    };
    let r = integrate(f, e0, e1, W_OPTS);
    checked(sign * r.value / (2.0 * PI), r.converged, r.error)
}

/// Finite linear combination Σ α_k f₀ₖ(x⁰) f₁ₖ(x¹) with complex coefficients.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ComplexTestFunction {
    pub terms: Vec<(Complex64, TestFunction2D)>,
}

impl ComplexTestFunction {
    pub fn new(terms: Vec<(Complex64, TestFunction2D)>) -> Self {
        ComplexTestFunction { terms }
    }

    /// ∫ f(x) e^{−i(k₀x⁰ + k₁x¹)} d²x.
    pub fn fourier(&self, k0: f64, k1: f64) -> Complex64 {
        self.terms.iter().map(|(a, t)| a * t.f0.fourier(k0) * t.f1.fourier(k1)).sum()
    }

    pub fn mean(&self) -> Complex64 {
        self.fourier(0.0, 0.0)
    }

    pub fn eval(&self, x: SpacetimePoint) -> Complex64 {
        self.terms.iter().map(|(a, t)| a * t.eval(x)).sum()
    }

    /// Scale of |f|²: (Σ|α_k| ‖f₀ₖ‖₁‖f₁ₖ‖₁)².
    pub fn scale2(&self) -> f64 {
        let s: f64 = self.terms.iter().map(|(a, t)| a.norm() * t.f0.l1() * t.f1.l1()).sum();
        s * s
    }
}

/// Re ∬ W_M(x,y) f(x) f*(y) with M = 0 giving the massless kernel.
/// Each cosine mode contributes ½(|f̃(κ)|² + |f̃(−κ)|²).
fn smeared_window(s: &StateW, mass: f64, f: &ComplexTestFunction) -> Result<f64> {
    let StateW::ThermalWindow { e0, e1, b } = *s else {
        return Ok(0.0);
    };
    let g = |e: f64| {
        let m = mass * mass / (4.0 * e);
        let modes = [(e + m, m - e), (m + e, e - m)];
        let sum: f64 = modes.iter().map(|&(k0, k1)| f.fourier(k0, k1).norm_sqr() + f.fourier(-k0, -k1).norm_sqr()).sum();
        window_weight(e, b) * 0.5 * sum
    };
    let r = integrate(g, e0, e1, QuadOpts { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 4000 });
    checked(r.value / (2.0 * PI), r.converged, r.error)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PositivityReport {
    pub min_quadratic_form: f64,
    pub ensemble_size: usize,
    pub seed: u64,
}

/// Random zero-mean ensemble: each member is α₁(G₁ − G₂) + α₂(G₃ − G₄) with unit-mass
/// Gaussians G_i and complex α.
pub fn zero_mean_ensemble(n: usize, seed: u64) -> Vec<ComplexTestFunction> {
    (0..n)
        .map(|i| {
            let mut rng = sample_rng(seed, 0x5747, i as u64);
            let mut terms = Vec::new();
            for _ in 0..2 {
                let alpha = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                for sgn in [1.0, -1.0] {
                    let s0: f64 = rng.random_range(0.3..2.0);
                    let s1: f64 = rng.random_range(0.3..2.0);
                    let c0: f64 = rng.random_range(-2.0..2.0);
                    let c1: f64 = rng.random_range(-2.0..2.0);
                    let g0 = SmearingFunction::gaussian(s0).centered(c0).scaled(1.0 / (s0 * (2.0 * PI).sqrt()));
                    let g1 = SmearingFunction::gaussian(s1).centered(c1).scaled(1.0 / (s1 * (2.0 * PI).sqrt()));
                    terms.push((alpha * sgn, TestFunction2D::new(g0, g1)));
                }
            }
            ComplexTestFunction::new(terms)
        })
        .collect()
}

/// Minimum of Re W(f, f*) over a zero-mean ensemble.
pub fn conditional_positivity(s: &StateW, ensemble: &[ComplexTestFunction], seed: u64) -> Result<PositivityReport> {
    let mut min = f64::INFINITY;
    for (i, f) in ensemble.iter().enumerate() {
        let m = f.mean().norm();
        if m > 1e-12 {
            return Err(Error::Input(format!("ensemble member {i} has mean {m:e}, not zero")));
        }
        min = min.min(smeared_window(s, 0.0, f)?);
    }
    if ensemble.is_empty() {
        min = 0.0;
    }
    Ok(PositivityReport { min_quadratic_form: min, ensemble_size: ensemble.len(), seed })
}

/// Σ_{i,j} [W(x_i,x_j) − W(y_i,x_j) − W(x_i,y_j) + W(y_i,y_j)].
pub fn discrete_positivity(s: &StateW, xs: &[SpacetimePoint], ys: &[SpacetimePoint]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::Input("point lists differ in length".into()));
    }
    let mut total = 0.0;
    for i in 0..xs.len() {
        for j in 0..xs.len() {
            total += w_eval(s, xs[i], xs[j])? - w_eval(s, ys[i], xs[j])? - w_eval(s, xs[i], ys[j])? + w_eval(s, ys[i], ys[j])?;
        }
    }
    Ok(total)
}

/// W_M(x,y) = (1/2π) ∫ w(E)[cos(Eu + M²v/4E) + cos(M²u/4E + Ev)] dE.
pub fn massive_extension_eval(s: &StateW, mass: f64, x: SpacetimePoint, y: SpacetimePoint) -> Result<f64> {
    if !(mass > 0.0) {
        return Err(Error::Input(format!("mass must be positive, got {mass}")));
    }
    let StateW::ThermalWindow { e0, e1, b } = *s else {
        return Ok(0.0);
    };
    let lc = lightcone(x, y);
    let f = |e: f64| {
        let m = mass * mass / (4.0 * e);
        window_weight(e, b) * ((e * lc.u + m * lc.v).cos() + (m * lc.u + e * lc.v).cos())
    };
    let r = integrate(f, e0, e1, W_OPTS);
    checked(r.value / (2.0 * PI), r.converged, r.error)
}

/// Bessel part of the auxiliary massive two-point function smeared with f ⊗ f*, via
/// a = eᵗ: (1/4π) ∫ |f̃(2Λ' cosh t, −2Λ' sinh t)|² e^{−2Λ'ε cosh t} dt, Λ' = Λe^{−γ}.
pub fn massive_bessel_quadratic_form(lambda: f64, r: &Regulators, f: &ComplexTestFunction) -> Result<f64> {
    let lp = lambda * (-EULER_GAMMA).exp();
    let g = |t: f64| {
        let (c, s) = (t.cosh(), t.sinh());
        let damp = (-2.0 * lp * r.epsilon * c).exp();
        if damp == 0.0 {
            return 0.0;
        }
        f.fourier(2.0 * lp * c, -2.0 * lp * s).norm_sqr() * damp
    };
    let res = integrate_inf(g, QuadOpts { abs_tol: 1e-15, rel_tol: 1e-11, max_intervals: 4000 });
    checked(res.value / (4.0 * PI), res.converged, res.error)
}

/// Re ∬ [K₀ term + W_M](x,y) f(x) f*(y) with M = 2Λe^{−γ}.
pub fn massive_state_quadratic_form(s: &StateW, lambda: f64, r: &Regulators, f: &ComplexTestFunction) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Input(format!("Λ must be positive, got {lambda}")));
    }
    if f.terms.is_empty() {
        return Ok(0.0);
    }
    let mass = 2.0 * lambda * (-EULER_GAMMA).exp();
    Ok(massive_bessel_quadratic_form(lambda, r, f)? + smeared_window(s, mass, f)?)
}

/// Pointwise auxiliary kernel (1/2π)K₀(...) + W_M, for direct cross-checks.
pub fn massive_state_kernel(s: &StateW, lambda: f64, r: &Regulators, x: SpacetimePoint, y: SpacetimePoint) -> Result<Complex64> {
    let lc = lightcone(x, y);
    let mass = 2.0 * lambda * (-EULER_GAMMA).exp();
    let w = if s.is_vacuum() { 0.0 } else { massive_extension_eval(s, mass, x, y)? };
    Ok(massive_hadamard_uv(lc.u, lc.v, lambda, r) + w)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tw() -> StateW {
        StateW::thermal_window(0.5, 2.0, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_window() {
        assert!(StateW::thermal_window(0.0, 2.0, 1.0).is_err());
        assert!(StateW::thermal_window(1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn jet_matches_finite_differences() {
        let s = tw();
        let x = SpacetimePoint::new(0.3, -0.4);
        let z = SpacetimePoint::from_uv(0.9, -1.3);
        let j = s.jet(x, z).unwrap();
        let h = 1e-4;
        let w = |du: f64, dv: f64| s.eval(x, SpacetimePoint::from_uv(z.u() + du, z.v() + dv)).unwrap();
        assert!((j.du - (w(h, 0.0) - w(-h, 0.0)) / (2.0 * h)).abs() < 1e-7);
        assert!((j.dv - (w(0.0, h) - w(0.0, -h)) / (2.0 * h)).abs() < 1e-7);
        assert!((j.duu - (w(h, 0.0) - 2.0 * j.val + w(-h, 0.0)) / (h * h)).abs() < 1e-5);
        let m = w_derivs(&s, x, z, MultiIndex::new(1, 0, 1, 0)).unwrap();
        let fd = (s.eval(SpacetimePoint::from_uv(x.u() + h, x.v()), SpacetimePoint::from_uv(z.u() + h, z.v())).unwrap()
            - s.eval(SpacetimePoint::from_uv(x.u() + h, x.v()), SpacetimePoint::from_uv(z.u() - h, z.v())).unwrap()
            - s.eval(SpacetimePoint::from_uv(x.u() - h, x.v()), SpacetimePoint::from_uv(z.u() + h, z.v())).unwrap()
            + s.eval(SpacetimePoint::from_uv(x.u() - h, x.v()), SpacetimePoint::from_uv(z.u() - h, z.v())).unwrap())
            / (4.0 * h * h);
        assert!((m - fd).abs() < 1e-6 * m.abs().max(1.0));
    }

    #[test]
    fn massive_extension_limit_and_bisolution() {
        let s = tw();
        let x = SpacetimePoint::new(0.7, 0.2);
        let y = SpacetimePoint::new(-0.1, 0.5);
        let a = massive_extension_eval(&s, 1e-3, x, y).unwrap();
        let b = w_eval(&s, x, y).unwrap();
        assert!((a - b).abs() < 1e-6);
        let m: f64 = 0.8;
        let h = 1e-3;
        let lc = lightcone(x, y);
        let wm = |du: f64, dv: f64| massive_extension_eval(&s, m, SpacetimePoint::from_uv(lc.u + du, lc.v + dv), SpacetimePoint::new(0.0, 0.0)).unwrap();
        let duv = (wm(h, h) - wm(h, -h) - wm(-h, h) + wm(-h, -h)) / (4.0 * h * h);
        let res = -4.0 * duv - m * m * wm(0.0, 0.0);
        assert!(res.abs() < 1e-5 * (m * m * wm(0.0, 0.0)).abs(), "{res}");
    }

    // Direct check of the smeared window form: ∫ W(r) A(r) d²r with the closed-form
    // autocorrelation A of a Gaussian mixture.
    fn autocorr(f: &ComplexTestFunction, r: SpacetimePoint) -> Complex64 {
        let one = |a: &SmearingFunction, b: &SmearingFunction, d: f64| {
            let (sa, sb) = (a.scale(), b.scale());
            let s2 = sa * sa + sb * sb;
            a.amplitude * b.amplitude * (2.0 * PI).sqrt() * sa * sb / s2.sqrt() * (-(d + a.center - b.center).powi(2) / (2.0 * s2)).exp()
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (ak, tk) in &f.terms {
            for (al, tl) in &f.terms {
                acc += ak * al.conj() * one(&tk.f0, &tl.f0, -r.x0) * one(&tk.f1, &tl.f1, -r.x1);
            }
        }
        acc
    }

    #[test]
    fn window_form_matches_direct_integral() {
        let s = tw();
        let f = &zero_mean_ensemble(1, 9)[0];
        let fast = smeared_window(&s, 0.0, f).unwrap();
        let inner = |r0: f64| {
            integrate_inf(
                |r1: f64| {
                    let r = SpacetimePoint::new(r0, r1);
                    (autocorr(f, r) * w_eval(&s, r, SpacetimePoint::new(0.0, 0.0)).unwrap()).re
                },
                QuadOpts::tol(1e-11, 1e-9),
            )
            .value
        };
        let direct = integrate_inf(inner, QuadOpts::tol(1e-10, 1e-8)).value;
        assert!((fast - direct).abs() < 1e-7 * fast.abs().max(1e-3), "{fast} vs {direct}");
    }

    #[test]
    fn bessel_form_matches_direct_integral() {
        let r = Regulators::new(0.3, 1.0).unwrap();
        let lambda = 0.4;
        let f = &zero_mean_ensemble(1, 3)[0];
        let fast = massive_bessel_quadratic_form(lambda, &r, f).unwrap();
        // ∫ K(r) A(r) d²r in light-cone coordinates, d²r = ½ du dv.
        let pts = [-60.0, -3.0, -1.0, -0.3, 0.0, 0.3, 1.0, 3.0, 60.0];
        let inner = |u: f64| {
            crate::quad::integrate_breaks(
                |v: f64| {
                    let x = SpacetimePoint::from_uv(u, v);
                    (autocorr(f, x) * massive_hadamard_uv(u, v, lambda, &r)).re * 0.5
                },
                &pts,
                QuadOpts::tol(1e-12, 1e-9),
            )
            .value
        };
        let direct = crate::quad::integrate_breaks(inner, &pts, QuadOpts::tol(1e-11, 1e-8)).value;
        assert!((fast - direct).abs() < 1e-6 * fast.abs().max(1e-3), "{fast} vs {direct}");
    }

    #[test]
    fn sector_asymptotic_matches_quadrature() {
        let (e0, e1, b) = (0.5, 2.0, 1.0);
        for s in [2000.0, -3100.0] {
            let a = sector_asymptotic(e0, e1, b, s);
            let f = |e: f64| {
                let w = window_weight(e, b);
                let (sn, cs) = (e * s).sin_cos();
                V3([w * cs, w * e * sn, w * e * e * cs])
            };
            let r = integrate(f, e0, e1, QuadOpts { abs_tol: 1e-14, rel_tol: 1e-12, max_intervals: 100_000 });
            for i in 0..3 {
                assert!((a[i] - r.value.0[i]).abs() < 1e-9, "{i}: {} vs {}", a[i], r.value.0[i]);
            }
        }
    }
}
