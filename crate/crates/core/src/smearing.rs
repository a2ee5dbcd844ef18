//! Worldline test functions f, their compact truncations f_N, two-dimensional test
//! functions, and the adiabatic cutoff g.

use crate::error::{Error, Result};
use crate::geometry::SpacetimePoint;
use crate::quad::{integrate_breaks, QuadOpts};
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Family {
    Gaussian { sigma: f64 },
    Bump { radius: f64 },
    HermiteGaussian { degree: u32, sigma: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmearingFunction {
    pub family: Family,
    pub center: f64,
    pub amplitude: f64,
}

/// Physicists' Hermite polynomials H_0..=H_d at t.
fn hermite_all(d: u32, t: f64) -> Vec<f64> {
    let mut h = vec![1.0];
    if d >= 1 {
        h.push(2.0 * t);
    }
    for n in 1..d as usize {
        let next = 2.0 * t * h[n] - 2.0 * n as f64 * h[n - 1];
        h.push(next);
    }
    h
}

impl SmearingFunction {
    pub fn gaussian(sigma: f64) -> Self {
        SmearingFunction { family: Family::Gaussian { sigma }, center: 0.0, amplitude: 1.0 }
    }
    pub fn bump(radius: f64) -> Self {
        SmearingFunction { family: Family::Bump { radius }, center: 0.0, amplitude: 1.0 }
    }
    pub fn hermite_gaussian(degree: u32, sigma: f64) -> Self {
        SmearingFunction { family: Family::HermiteGaussian { degree, sigma }, center: 0.0, amplitude: 1.0 }
    }
    pub fn centered(mut self, c: f64) -> Self {
        self.center = c;
        self
    }
    pub fn scaled(mut self, a: f64) -> Self {
        self.amplitude *= a;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.family {
            Family::Gaussian { sigma } | Family::HermiteGaussian { sigma, .. } => sigma > 0.0 && sigma.is_finite(),
            Family::Bump { radius } => radius > 0.0 && radius.is_finite(),
        };
        if ok && self.center.is_finite() && self.amplitude.is_finite() {
            Ok(())
        } else {
            Err(Error::Input(format!("invalid smearing function {self:?}")))
        }
    }

    /// Interval outside which |f| is zero or below 1e−300 relative to the amplitude.
    pub fn support(&self) -> (f64, f64) {
        let h = match self.family {
            Family::Gaussian { sigma } => 38.0 * sigma,
            Family::HermiteGaussian { degree, sigma } => (38.0 + 2.0 * (degree as f64 + 1.0).sqrt()) * sigma,
            Family::Bump { radius } => radius,
        };
        (self.center - h, self.center + h)
    }

    /// Width scale used to place quadrature breakpoints.
    pub fn scale(&self) -> f64 {
        match self.family {
            Family::Gaussian { sigma } | Family::HermiteGaussian { sigma, .. } => sigma,
            Family::Bump { radius } => radius,
        }
    }

    /// f, f', f'' at τ.
    pub fn derivs(&self, tau: f64) -> [f64; 3] {
        let a = self.amplitude;
        match self.family {
            Family::Gaussian { sigma } => {
                let t = (tau - self.center) / sigma;
                let e = a * (-0.5 * t * t).exp();
                [e, -t * e / sigma, (t * t - 1.0) * e / (sigma * sigma)]
            }
            Family::HermiteGaussian { degree, sigma } => {
                let t = (tau - self.center) / sigma;
                let h = hermite_all(degree, t);
                let d = degree as usize;
                let e = a * (-0.5 * t * t).exp();
                let hd = h[d];
                let hdm1 = if d >= 1 { h[d - 1] } else { 0.0 };
                let f0 = hd * e;
                let f1 = (2.0 * d as f64 * hdm1 - t * hd) * e / sigma;
                let f2 = (t * t - 2.0 * d as f64 - 1.0) * f0 / (sigma * sigma);
                [f0, f1, f2]
            }
            Family::Bump { radius } => {
                let t = (tau - self.center) / radius;
                if t.abs() >= 1.0 {
                    return [0.0, 0.0, 0.0];
                }
                let q = 1.0 - t * t;
                let f = a * (1.0 - 1.0 / q).exp();
                let p1 = -2.0 * t / (q * q);
                let p2 = -2.0 / (q * q) - 8.0 * t * t / (q * q * q);
                [f, f * p1 / radius, f * (p1 * p1 + p2) / (radius * radius)]
            }
        }
    }

    pub fn eval_deriv(&self, tau: f64, order: u8) -> f64 {
        assert!(order <= 2, "derivatives available up to order 2");
        self.derivs(tau)[order as usize]
    }

    pub fn eval(&self, tau: f64) -> f64 {
        self.derivs(tau)[0]
    }

    /// f̃(p) = ∫ f(τ) e^{−ipτ} dτ.
    pub fn fourier(&self, p: f64) -> Complex64 {
        let phase = Complex64::from_polar(1.0, -p * self.center);
        match self.family {
            Family::Gaussian { sigma } => phase * (self.amplitude * sigma * (2.0 * PI).sqrt() * (-0.5 * sigma * sigma * p * p).exp()),
            Family::HermiteGaussian { degree, sigma } => {
                let h = hermite_all(degree, sigma * p)[degree as usize];
                let mag = self.amplitude * sigma * (2.0 * PI).sqrt() * h * (-0.5 * sigma * sigma * p * p).exp();
                let rot = match degree % 4 {
                    0 => Complex64::new(1.0, 0.0),
                    1 => Complex64::new(0.0, -1.0),
                    2 => Complex64::new(-1.0, 0.0),
                    _ => Complex64::new(0.0, 1.0),
                };
                phase * rot * mag
            }
            Family::Bump { .. } => fourier_quadrature(|t| self.eval(t), self.support(), p),
        }
    }

    /// ∫ f'(τ)² dτ.
    pub fn deriv_l2(&self) -> f64 {
        let (lo, hi) = self.support();
        let s = self.scale();
        let c = self.center;
        let pts: Vec<f64> = [lo, c - 8.0 * s, c - 2.0 * s, c, c + 2.0 * s, c + 8.0 * s, hi].to_vec();
        integrate_breaks(|t| self.derivs(t)[1].powi(2), &sorted(pts), QuadOpts::tol(1e-14, 1e-13)).value
    }

    /// ∫ |f(τ)| dτ.
    pub fn l1(&self) -> f64 {
        let (lo, hi) = self.support();
        let s = self.scale();
        let c = self.center;
        let pts = sorted(vec![lo, c - 8.0 * s, c - 2.0 * s, c, c + 2.0 * s, c + 8.0 * s, hi]);
        integrate_breaks(|t| self.eval(t).abs(), &pts, QuadOpts::tol(1e-14, 1e-12)).value
    }
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

fn fourier_quadrature(f: impl Fn(f64) -> f64, (lo, hi): (f64, f64), p: f64) -> Complex64 {
    // Enough panels to resolve both the oscillation and the function.
    let n = (((hi - lo) * p.abs() / PI).ceil() as usize).clamp(8, 4000);
    let pts: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let opts = QuadOpts { abs_tol: 1e-15, rel_tol: 1e-13, max_intervals: 20000 };
    integrate_breaks(|t| Complex64::from_polar(f(t), -p * t), &pts, opts).value
}

/// Trapezoidal-FFT transform of samples of f on a window of length 2πK starting at `lo`;
/// returns f̃ at p = k/K for k = 0..n/2.
pub fn fourier_fft(f: impl Fn(f64) -> f64, lo: f64, k_window: usize, n: usize) -> Vec<(f64, Complex64)> {
    let len = 2.0 * PI * k_window as f64;
    let h = len / n as f64;
    let mut buf: Vec<Complex64> = (0..n).map(|j| Complex64::new(f(lo + j as f64 * h), 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    (0..=n / 2)
        .map(|k| {
            let p = k as f64 / k_window as f64;
            (p, buf[k] * h * Complex64::from_polar(1.0, -p * lo))
        })
        .collect()
}

/// e^{−1/x} for x > 0 with its first two derivatives.
fn psi(x: f64) -> [f64; 3] {
    if x <= 0.0 {
        return [0.0; 3];
    }
    let e = (-1.0 / x).exp();
    let x2 = x * x;
    [e, e / x2, e * (1.0 - 2.0 * x) / (x2 * x2)]
}

/// C^∞ smoothstep S(t): 0 for t ≤ 0, 1 for t ≥ 1; returns S, S', S''.
pub fn smoothstep(t: f64) -> [f64; 3] {
    if t <= 0.0 {
        return [0.0; 3];
    }
    if t >= 1.0 {
        return [1.0, 0.0, 0.0];
    }
    let a = psi(t);
    let b = psi(1.0 - t);
    let (a0, a1, a2) = (a[0], a[1], a[2]);
    let (b0, b1, b2) = (b[0], -b[1], b[2]);
    let d = a0 + b0;
    let d1 = a1 + b1;
    let num = a1 * b0 - a0 * b1;
    let num1 = a2 * b0 - a0 * b2;
    [a0 / d, num / (d * d), (num1 * d - 2.0 * num * d1) / (d * d * d)]
}

/// f_N = χ_N f with χ_N = 1 on [−N, N] and 0 outside [−N−2, N+2].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompactTruncation {
    pub base: SmearingFunction,
    pub n: f64,
}

impl CompactTruncation {
    pub fn new(base: SmearingFunction, n: f64) -> Result<Self> {
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::Input(format!("plateau half-width must be positive, got {n}")));
        }
        Ok(CompactTruncation { base, n })
    }

    /// χ_N, χ_N', χ_N''.
    pub fn chi(&self, tau: f64) -> [f64; 3] {
        let t = 0.5 * (self.n + 2.0 - tau.abs());
        let s = smoothstep(t);
        let sg = if tau < 0.0 { -1.0 } else { 1.0 };
        [s[0], -0.5 * sg * s[1], 0.25 * s[2]]
    }

    pub fn derivs(&self, tau: f64) -> [f64; 3] {
        let c = self.chi(tau);
        if c[0] == 0.0 && c[1] == 0.0 && c[2] == 0.0 {
            return [0.0; 3];
        }
        let f = self.base.derivs(tau);
        [c[0] * f[0], c[1] * f[0] + c[0] * f[1], c[2] * f[0] + 2.0 * c[1] * f[1] + c[0] * f[2]]
    }

    pub fn support(&self) -> (f64, f64) {
        (-self.n - 2.0, self.n + 2.0)
    }

    fn breakpoints(&self) -> Vec<f64> {
        let n = self.n;
        let c = self.base.center;
        let s = self.base.scale();
        let mut v = vec![-n - 2.0, -n - 1.0, -n, c - 2.0 * s, c, c + 2.0 * s, n, n + 1.0, n + 2.0];
        v.retain(|x| x.abs() <= n + 2.0);
        sorted(v)
    }

    pub fn fourier(&self, p: f64) -> Complex64 {
        fourier_quadrature(|t| self.derivs(t)[0], self.support(), p)
    }

    pub fn deriv_l2(&self) -> f64 {
        integrate_breaks(|t| self.derivs(t)[1].powi(2), &self.breakpoints(), QuadOpts::tol(1e-15, 1e-13)).value
    }
}

/// Product test function on spacetime, f(x) = f₀(x⁰) f₁(x¹).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestFunction2D {
    pub f0: SmearingFunction,
    pub f1: SmearingFunction,
}

/// Value and light-cone derivatives of a spacetime function.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Jet2 {
    pub val: f64,
    pub du: f64,
    pub dv: f64,
    pub duu: f64,
    pub duv: f64,
    pub dvv: f64,
}

impl TestFunction2D {
    pub fn new(f0: SmearingFunction, f1: SmearingFunction) -> Self {
        TestFunction2D { f0, f1 }
    }
    pub fn eval(&self, x: SpacetimePoint) -> f64 {
        self.f0.eval(x.x0) * self.f1.eval(x.x1)
    }
    /// Derivatives in u = x⁰ − x¹, v = x⁰ + x¹ (∂_u = ½(∂₀ − ∂₁), ∂_v = ½(∂₀ + ∂₁)).
    pub fn jet(&self, x: SpacetimePoint) -> Jet2 {
        let a = self.f0.derivs(x.x0);
        let b = self.f1.derivs(x.x1);
        let f00 = a[2] * b[0];
        let f11 = a[0] * b[2];
        let f01 = a[1] * b[1];
        let f0 = a[1] * b[0];
        let f1 = a[0] * b[1];
        Jet2 {
            val: a[0] * b[0],
            du: 0.5 * (f0 - f1),
            dv: 0.5 * (f0 + f1),
            duu: 0.25 * (f00 - 2.0 * f01 + f11),
            duv: 0.25 * (f00 - f11),
            dvv: 0.25 * (f00 + 2.0 * f01 + f11),
        }
    }
    pub fn support(&self) -> ((f64, f64), (f64, f64)) {
        (self.f0.support(), self.f1.support())
    }
}

/// Adiabatic cutoff g(x) = g₀ P₀(x⁰ − c₀) P₁(x¹ − c₁), with P_i Gaussian of width σ_i,
/// optionally flattened to 1 on |x_i − c_i| ≤ L_i through a smoothstep of width W_i.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdiabaticCutoff {
    pub g0: f64,
    pub sigma: [f64; 2],
    pub center: [f64; 2],
    pub plateau: Option<Plateau>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plateau {
    pub half_width: [f64; 2],
    pub ramp: [f64; 2],
}

impl AdiabaticCutoff {
    pub fn gaussian(g0: f64, sigma0: f64, sigma1: f64) -> Self {
        AdiabaticCutoff { g0, sigma: [sigma0, sigma1], center: [0.0, 0.0], plateau: None }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.g0 >= 0.0
            && self.g0.is_finite()
            && self.sigma.iter().all(|s| *s > 0.0 && s.is_finite())
            && self.center.iter().all(|c| c.is_finite())
            && self.plateau.is_none_or(|p| p.half_width.iter().chain(p.ramp.iter()).all(|w| *w > 0.0 && w.is_finite()));
        if ok {
            Ok(())
        } else {
            Err(Error::Input(format!("invalid adiabatic cutoff {self:?}")))
        }
    }

    fn profile(&self, i: usize, x: f64) -> f64 {
        let d = x - self.center[i];
        let s = self.sigma[i];
        let gauss = (-0.5 * d * d / (s * s)).exp();
        match self.plateau {
            None => gauss,
            Some(p) => {
                let st = smoothstep((p.half_width[i] + p.ramp[i] - d.abs()) / p.ramp[i])[0];
                st + (1.0 - st) * gauss
            }
        }
    }

    pub fn eval(&self, x: SpacetimePoint) -> f64 {
        self.g0 * self.profile(0, x.x0) * self.profile(1, x.x1)
    }

    /// Gaussian proposal (center, standard deviations) dominating g's tails.
    pub fn proposal(&self) -> ([f64; 2], [f64; 2]) {
        let sd = match self.plateau {
            None => self.sigma,
            Some(p) => [0, 1].map(|i| (self.sigma[i].powi(2) + (p.half_width[i] + p.ramp[i]).powi(2)).sqrt()),
        };
        (self.center, sd)
    }

    /// ∫ g d²x.
    pub fn l1(&self) -> f64 {
        let one = |i: usize| {
            let c = self.center[i];
            let s = self.sigma[i];
            let ext = self.plateau.map_or(0.0, |p| p.half_width[i] + p.ramp[i]);
            let pts = sorted(vec![c - ext - 40.0 * s, c - ext, c, c + ext, c + ext + 40.0 * s]);
            integrate_breaks(|x| self.profile(i, x), &pts, QuadOpts::tol(1e-14, 1e-13)).value
        };
        self.g0 * one(0) * one(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        let g = SmearingFunction::gaussian(1.0);
        assert_eq!(g.eval_deriv(0.0, 0), 1.0);
        assert_eq!(g.eval_deriv(0.0, 1), 0.0);
        assert_eq!(SmearingFunction::bump(1.0).eval_deriv(1.5, 0), 0.0);
    }

    #[test]
    fn gaussian_transform_at_zero() {
        let v = SmearingFunction::gaussian(1.0).fourier(0.0);
        assert!((v.re - (2.0 * PI).sqrt()).abs() < 1e-14 && v.im == 0.0);
    }

    #[test]
    fn derivatives_match_central_differences() {
        let fams = [
            SmearingFunction::gaussian(0.7).centered(0.3).scaled(2.0),
            SmearingFunction::bump(1.3).centered(-0.2),
            SmearingFunction::hermite_gaussian(3, 1.1).centered(0.5),
        ];
        let h = 1e-5;
        for f in fams {
            for &t in &[-0.9, -0.1, 0.4, 1.0] {
                let d = f.derivs(t);
                let fd1 = (f.eval(t + h) - f.eval(t - h)) / (2.0 * h);
                let fd2 = (f.derivs(t + h)[1] - f.derivs(t - h)[1]) / (2.0 * h);
                assert!((d[1] - fd1).abs() < 1e-6 * (1.0 + d[1].abs()), "{f:?} τ={t}: {} vs {fd1}", d[1]);
                assert!((d[2] - fd2).abs() < 1e-6 * (1.0 + d[2].abs()), "{f:?} τ={t}: {} vs {fd2}", d[2]);
            }
        }
    }

    #[test]
    fn hermite_transform_matches_quadrature() {
        let f = SmearingFunction::hermite_gaussian(3, 0.8).centered(0.4);
        for &p in &[0.0, 0.7, 1.9, -2.3] {
            let q = fourier_quadrature(|t| f.eval(t), (-20.0, 20.0), p);
            assert!((f.fourier(p) - q).norm() < 1e-11, "p={p}");
        }
    }

    #[test]
    fn bump_quadrature_matches_fft() {
        let f = SmearingFunction::bump(1.0).centered(0.3);
        let table = fourier_fft(|t| f.eval(t), -PI, 1, 1 << 12);
        for p in [0usize, 1, 2] {
            let (pp, v) = table[p];
            assert_eq!(pp, p as f64);
            assert!((f.fourier(pp) - v).norm() < 1e-8, "p={p}");
        }
    }

    #[test]
    fn deriv_l2_gaussian_closed_form() {
        let v = SmearingFunction::gaussian(1.0).deriv_l2();
        assert!((v - PI.sqrt() / 2.0).abs() < 1e-10);
        assert_eq!(SmearingFunction::gaussian(1.0).scaled(0.0).deriv_l2(), 0.0);
    }

    #[test]
    fn smoothstep_slope_bound() {
        let mut max = 0.0f64;
        for i in 0..=200_000 {
            let t = i as f64 / 200_000.0;
            max = max.max(smoothstep(t)[1].abs());
        }
        // χ_N' = −½ S', so the bound |χ_N'| ≤ 1 needs max S' ≤ 2.
        assert!(max <= 2.0 + 1e-12, "max S' = {max}");
        assert!((smoothstep(0.5)[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn truncation_matches_base_on_plateau() {
        let f = SmearingFunction::gaussian(1.0);
        let fnn = CompactTruncation::new(f, 4.0).unwrap();
        for &t in &[-4.0, -1.0, 0.0, 3.9] {
            assert_eq!(fnn.derivs(t), f.derivs(t));
        }
        assert_eq!(fnn.derivs(6.0), [0.0; 3]);
        assert_eq!(fnn.derivs(-7.0), [0.0; 3]);
    }

    #[test]
    fn truncated_gaussian_l2_approaches_limit() {
        let f = SmearingFunction::gaussian(1.0);
        let target = PI.sqrt() / 2.0;
        let mut prev = f64::INFINITY;
        for n in [2.0, 4.0, 6.0, 8.0] {
            let d = (CompactTruncation::new(f, n).unwrap().deriv_l2() - target).abs();
            assert!(d <= prev);
            prev = d;
        }
        assert!(prev < 1e-6);
    }

    #[test]
    fn cutoff_plateau_is_flat() {
        let mut g = AdiabaticCutoff::gaussian(0.3, 2.0, 2.0);
        g.plateau = Some(Plateau { half_width: [3.0, 3.0], ramp: [1.0, 1.0] });
        assert_eq!(g.eval(SpacetimePoint::new(2.9, -3.0)), 0.3);
        assert!(g.eval(SpacetimePoint::new(5.0, 0.0)) < 0.3);
        let plain = AdiabaticCutoff::gaussian(1.0, 2.0, 3.0);
        assert!((plain.l1() - 2.0 * PI * 6.0).abs() < 1e-10);
    }
}
