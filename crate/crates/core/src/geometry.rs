//! Timelike worldlines in 1+1 Minkowski space, their frames, and the monotone
//! maps τ ↦ u(z(τ)), τ ↦ v(z(τ)) with their inverses.

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOpts};

/// Minkowski metric diag(−1, +1).
pub const ETA: [[f64; 2]; 2] = [[-1.0, 0.0], [0.0, 1.0]];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpacetimePoint {
    pub x0: f64,
    pub x1: f64,
}

impl SpacetimePoint {
    pub fn new(x0: f64, x1: f64) -> Self {
        SpacetimePoint { x0, x1 }
    }
    /// Absolute light-cone coordinate x⁰ − x¹.
    pub fn u(&self) -> f64 {
        self.x0 - self.x1
    }
    /// Absolute light-cone coordinate x⁰ + x¹.
    pub fn v(&self) -> f64 {
        self.x0 + self.x1
    }
    pub fn from_uv(u: f64, v: f64) -> Self {
        SpacetimePoint { x0: 0.5 * (u + v), x1: 0.5 * (v - u) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LightconePair {
    pub u: f64,
    pub v: f64,
}

pub fn lightcone(x: SpacetimePoint, y: SpacetimePoint) -> LightconePair {
    let dt = x.x0 - y.x0;
    let dx = x.x1 - y.x1;
    LightconePair { u: dt - dx, v: dt + dx }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameVectors {
    pub vmu: [f64; 2],
    pub wmu: [f64; 2],
    pub accel1: f64,
}

/// Natural cubic spline for z¹(τ).
#[derive(Clone, Debug)]
pub struct CubicSpline {
    t: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
    /// z⁰ at each knot, accumulated from v⁰ = sqrt(1+(v¹)²).
    z0: Vec<f64>,
}

impl CubicSpline {
    pub fn new(t: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = t.len();
        if n < 3 || y.len() != n {
            return Err(Error::Input("spline needs at least 3 knots with matching values".into()));
        }
        if t.windows(2).any(|w| !(w[1] > w[0])) || t.iter().chain(y.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Input("spline knots must be finite and strictly increasing".into()));
        }
        // Tridiagonal solve for second derivatives with natural end conditions.
        let mut m = vec![0.0; n];
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = t[i] - t[i - 1];
            let h1 = t[i + 1] - t[i];
            let a = h0;
            let b = 2.0 * (h0 + h1);
            let cc = h1;
            let r = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            let denom = b - a * c[i - 1];
            c[i] = cc / denom;
            d[i] = (r - a * d[i - 1]) / denom;
        }
        for i in (1..n - 1).rev() {
            m[i] = d[i] - c[i] * m[i + 1];
        }
        let mut s = CubicSpline { t, y, m, z0: vec![0.0; n] };
        s.z0[0] = s.t[0];
        for i in 1..n {
            let (a, b) = (s.t[i - 1], s.t[i]);
            let seg = integrate(|x| (1.0 + s.d1(x).powi(2)).sqrt(), a, b, QuadOpts::tol(1e-14, 1e-14));
            s.z0[i] = s.z0[i - 1] + seg.value;
        }
        Ok(s)
    }

    fn seg(&self, x: f64) -> usize {
        let n = self.t.len();
        match self.t.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.clamp(1, n - 1) - 1,
        }
    }

    pub fn range(&self) -> (f64, f64) {
        (self.t[0], self.t[self.t.len() - 1])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.seg(x);
        let h = self.t[i + 1] - self.t[i];
        let a = (self.t[i + 1] - x) / h;
        let b = (x - self.t[i]) / h;
        a * self.y[i] + b * self.y[i + 1] + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h * h / 6.0
    }

    pub fn d1(&self, x: f64) -> f64 {
        let i = self.seg(x);
        let h = self.t[i + 1] - self.t[i];
        let a = (self.t[i + 1] - x) / h;
        let b = (x - self.t[i]) / h;
        (self.y[i + 1] - self.y[i]) / h + h / 6.0 * (-(3.0 * a * a - 1.0) * self.m[i] + (3.0 * b * b - 1.0) * self.m[i + 1])
    }

    pub fn d2(&self, x: f64) -> f64 {
        let i = self.seg(x);
        let h = self.t[i + 1] - self.t[i];
        let a = (self.t[i + 1] - x) / h;
        let b = (x - self.t[i]) / h;
        a * self.m[i] + b * self.m[i + 1]
    }

    pub fn d3(&self, x: f64) -> f64 {
        let i = self.seg(x);
        (self.m[i + 1] - self.m[i]) / (self.t[i + 1] - self.t[i])
    }

    fn z0(&self, x: f64) -> f64 {
        let i = self.seg(x);
        let seg = integrate(|s| (1.0 + self.d1(s).powi(2)).sqrt(), self.t[i], x, QuadOpts::tol(1e-14, 1e-14));
        self.z0[i] + seg.value
    }
}

#[derive(Clone, Debug)]
pub enum WorldlineKind {
    Static,
    Boosted { eta: f64 },
    Accelerated { a: f64 },
    Spline(CubicSpline),
}

#[derive(Clone, Debug)]
pub struct Worldline {
    pub kind: WorldlineKind,
    pub domain: (f64, f64),
}

impl Worldline {
    pub fn static_line() -> Self {
        Worldline { kind: WorldlineKind::Static, domain: (f64::NEG_INFINITY, f64::INFINITY) }
    }
    pub fn boosted(eta: f64) -> Self {
        Worldline { kind: WorldlineKind::Boosted { eta }, domain: (f64::NEG_INFINITY, f64::INFINITY) }
    }
    pub fn accelerated(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Input(format!("acceleration must be positive, got {a}")));
        }
        Ok(Worldline { kind: WorldlineKind::Accelerated { a }, domain: (f64::NEG_INFINITY, f64::INFINITY) })
    }
    pub fn spline(knots: Vec<f64>, z1: Vec<f64>) -> Result<Self> {
        let s = CubicSpline::new(knots, z1)?;
        let domain = s.range();
        let w = Worldline { kind: WorldlineKind::Spline(s), domain };
        // Normalization holds by construction; reject curves where rounding says otherwise.
        let n = 1000;
        for i in 0..=n {
            let tau = domain.0 + (domain.1 - domain.0) * i as f64 / n as f64;
            let v1 = w.v1(tau);
            let v0 = (1.0 + v1 * v1).sqrt();
            if !v0.is_finite() || (-v0 * v0 + v1 * v1 + 1.0).abs() > 1e-8 * v0 * v0 {
                return Err(Error::Input(format!("spline worldline fails v·v = −1 at τ = {tau}")));
            }
        }
        Ok(w)
    }

    pub fn with_domain(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::Input(format!("empty τ-domain [{lo}, {hi}]")));
        }
        if let WorldlineKind::Spline(s) = &self.kind {
            let (a, b) = s.range();
            if lo < a || hi > b {
                return Err(Error::Input(format!("τ-domain [{lo}, {hi}] exceeds spline knots [{a}, {b}]")));
            }
        }
        self.domain = (lo, hi);
        Ok(self)
    }

    pub fn in_domain(&self, tau: f64) -> bool {
        tau >= self.domain.0 && tau <= self.domain.1
    }

    pub fn position(&self, tau: f64) -> SpacetimePoint {
        match &self.kind {
            WorldlineKind::Static => SpacetimePoint::new(tau, 0.0),
            WorldlineKind::Boosted { eta } => SpacetimePoint::new(tau * eta.cosh(), tau * eta.sinh()),
            WorldlineKind::Accelerated { a } => {
                let at = a * tau;
                // (cosh − 1)/a written without cancellation.
                let s = (0.5 * at).sinh();
                SpacetimePoint::new(at.sinh() / a, 2.0 * s * s / a)
            }
            WorldlineKind::Spline(s) => SpacetimePoint::new(s.z0(tau), s.eval(tau)),
        }
    }

    pub fn v1(&self, tau: f64) -> f64 {
        match &self.kind {
            WorldlineKind::Static => 0.0,
            WorldlineKind::Boosted { eta } => eta.sinh(),
            WorldlineKind::Accelerated { a } => (a * tau).sinh(),
            WorldlineKind::Spline(s) => s.d1(tau),
        }
    }

    pub fn v0(&self, tau: f64) -> f64 {
        match &self.kind {
            WorldlineKind::Static => 1.0,
            WorldlineKind::Boosted { eta } => eta.cosh(),
            WorldlineKind::Accelerated { a } => (a * tau).cosh(),
            WorldlineKind::Spline(_) => {
                let v1 = self.v1(tau);
                (1.0 + v1 * v1).sqrt()
            }
        }
    }

    /// dv¹/dτ.
    pub fn a1(&self, tau: f64) -> f64 {
        match &self.kind {
            WorldlineKind::Static | WorldlineKind::Boosted { .. } => 0.0,
            WorldlineKind::Accelerated { a } => a * (a * tau).cosh(),
            WorldlineKind::Spline(s) => s.d2(tau),
        }
    }

    /// d²v¹/dτ².
    pub fn j1(&self, tau: f64) -> f64 {
        match &self.kind {
            WorldlineKind::Static | WorldlineKind::Boosted { .. } => 0.0,
            WorldlineKind::Accelerated { a } => a * a * (a * tau).sinh(),
            WorldlineKind::Spline(s) => s.d3(tau),
        }
    }

    /// v^u = v⁰ − v¹ = du/dτ.
    pub fn vu(&self, tau: f64) -> f64 {
        match &self.kind {
            WorldlineKind::Static => 1.0,
            WorldlineKind::Boosted { eta } => (-eta).exp(),
            WorldlineKind::Accelerated { a } => (-a * tau).exp(),
            WorldlineKind::Spline(_) => {
                let v1 = self.v1(tau);
                1.0 / ((1.0 + v1 * v1).sqrt() + v1)
            }
        }
    }

    /// v^v = v⁰ + v¹ = dv/dτ.
    pub fn vv(&self, tau: f64) -> f64 {
        match &self.kind {
            WorldlineKind::Static => 1.0,
            WorldlineKind::Boosted { eta } => eta.exp(),
            WorldlineKind::Accelerated { a } => (a * tau).exp(),
            WorldlineKind::Spline(_) => {
                let v1 = self.v1(tau);
                (1.0 + v1 * v1).sqrt() + v1
            }
        }
    }

    /// First and second τ-derivatives of (v^u, v^v).
    pub fn dvu_dvv(&self, tau: f64) -> ([f64; 2], [f64; 2]) {
        let v1 = self.v1(tau);
        let a1 = self.a1(tau);
        let j1 = self.j1(tau);
        let v0 = (1.0 + v1 * v1).sqrt();
        let a0 = v1 * a1 / v0;
        let j0 = (a1 * a1 + v1 * j1) / v0 - v1 * a1 * a0 / (v0 * v0);
        ([a0 - a1, a0 + a1], [j0 - j1, j0 + j1])
    }

    pub fn u_of(&self, tau: f64) -> f64 {
        match &self.kind {
            WorldlineKind::Accelerated { a } => -(-a * tau).exp_m1() / a,
            _ => self.position(tau).u(),
        }
    }

    pub fn v_of(&self, tau: f64) -> f64 {
        match &self.kind {
            WorldlineKind::Accelerated { a } => (a * tau).exp_m1() / a,
            _ => self.position(tau).v(),
        }
    }

    pub fn frame_at(&self, tau: f64) -> Result<FrameVectors> {
        if !self.in_domain(tau) {
            return Err(Error::Domain(format!("τ = {tau} outside worldline domain [{}, {}]", self.domain.0, self.domain.1)));
        }
        let v1 = self.v1(tau);
        let v0 = (1.0 + v1 * v1).sqrt();
        Ok(FrameVectors { vmu: [v0, v1], wmu: [v1, v0], accel1: self.a1(tau) })
    }

    /// Error if |v¹| exceeds `cap` anywhere on [lo, hi] (sampled).
    pub fn check_v1_cap(&self, lo: f64, hi: f64, cap: f64) -> Result<()> {
        let n = 2000;
        for i in 0..=n {
            let tau = lo + (hi - lo) * i as f64 / n as f64;
            if !self.in_domain(tau) {
                continue;
            }
            let v1 = self.v1(tau).abs();
            if !(v1 <= cap) {
                return Err(Error::NearNull { v1, cap });
            }
        }
        Ok(())
    }

    pub fn tau_of_u(&self, u: f64) -> Result<f64> {
        self.invert(u, |t| self.u_of(t), |t| self.vu(t))
    }

    pub fn tau_of_v(&self, v: f64) -> Result<f64> {
        self.invert(v, |t| self.v_of(t), |t| self.vv(t))
    }

    fn invert(&self, target: f64, f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> Result<f64> {
        let (mut lo, mut hi) = self.domain;
        if !lo.is_finite() {
            lo = hi.min(0.0) - 1.0;
            while f(lo) > target {
                lo *= 2.0;
                if lo < -1e8 {
                    return Err(Error::Range { value: target, lo: f(lo), hi: f(self.domain.1.min(1e8)) });
                }
            }
        }
        if !hi.is_finite() {
            hi = lo.max(0.0) + 1.0;
            while f(hi) < target {
                hi *= 2.0;
                if hi > 1e8 {
                    return Err(Error::Range { value: target, lo: f(lo), hi: f(hi) });
                }
            }
        }
        let (flo, fhi) = (f(lo), f(hi));
        if !(target >= flo && target <= fhi) {
            return Err(Error::Range { value: target, lo: flo, hi: fhi });
        }
        while hi - lo > 1e-13 * (1.0 + lo.abs().max(hi.abs())) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut t = 0.5 * (lo + hi);
        for _ in 0..2 {
            let step = (f(t) - target) / df(t);
            let cand = t - step;
            if cand.is_finite() && self.in_domain(cand) {
                t = cand;
            }
        }
        Ok(t)
    }
}

/// v^μ v^ν (A_μ B_ν − ½ η_{μν} A·B) for covectors A, B.
pub fn vv_trace_contraction(v: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let va = v[0] * a[0] + v[1] * a[1];
    let vb = v[0] * b[0] + v[1] * b[1];
    let adotb = -a[0] * b[0] + a[1] * b[1];
    let vv = -v[0] * v[0] + v[1] * v[1];
    va * vb - 0.5 * vv * adotb
}

/// ½ (v^μ v^ν + w^μ w^ν) A_μ B_ν.
pub fn frame_contraction(fr: &FrameVectors, a: [f64; 2], b: [f64; 2]) -> f64 {
    let (v, w) = (fr.vmu, fr.wmu);
    let va = v[0] * a[0] + v[1] * a[1];
    let vb = v[0] * b[0] + v[1] * b[1];
    let wa = w[0] * a[0] + w[1] * a[1];
    let wb = w[0] * b[0] + w[1] * b[1];
    0.5 * (va * vb + wa * wb)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lightcone_examples() {
        let o = SpacetimePoint::new(0.0, 0.0);
        assert_eq!(lightcone(o, o), LightconePair { u: 0.0, v: 0.0 });
        assert_eq!(lightcone(SpacetimePoint::new(1.0, 0.0), o), LightconePair { u: 1.0, v: 1.0 });
        assert_eq!(lightcone(SpacetimePoint::new(0.0, 1.0), o), LightconePair { u: -1.0, v: 1.0 });
    }

    #[test]
    fn frame_examples() {
        let f = Worldline::static_line().frame_at(3.0).unwrap();
        assert_eq!(f.vmu, [1.0, 0.0]);
        assert_eq!(f.wmu, [0.0, 1.0]);
        assert_eq!(f.accel1, 0.0);
        let f = Worldline::boosted(1.0).frame_at(-2.0).unwrap();
        assert!((f.vmu[0] - 1f64.cosh()).abs() < 1e-15 && (f.vmu[1] - 1f64.sinh()).abs() < 1e-15);
        let f = Worldline::accelerated(1.0).unwrap().frame_at(0.0).unwrap();
        assert_eq!(f.vmu, [1.0, 0.0]);
        assert_eq!(f.accel1, 1.0);
    }

    #[test]
    fn frame_outside_domain_is_error() {
        let w = Worldline::static_line().with_domain(-1.0, 1.0).unwrap();
        assert!(matches!(w.frame_at(2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn inversion_examples() {
        assert!((Worldline::static_line().tau_of_u(0.7).unwrap() - 0.7).abs() < 1e-12);
        let eta = 1.3;
        let w = Worldline::boosted(eta);
        assert!((w.tau_of_u(0.4).unwrap() - eta.exp() * 0.4).abs() < 1e-11);
        assert!((w.tau_of_v(0.4).unwrap() - (-eta).exp() * 0.4).abs() < 1e-11);
    }

    #[test]
    fn accelerated_u_range_error() {
        let w = Worldline::accelerated(1.0).unwrap();
        assert!(matches!(w.tau_of_u(1.5), Err(Error::Range { .. })));
        assert!(w.tau_of_u(0.99).is_ok());
    }

    #[test]
    fn spline_of_straight_line_is_boost() {
        let eta: f64 = 0.6;
        let knots: Vec<f64> = (0..21).map(|i| -5.0 + 0.5 * i as f64).collect();
        let z1: Vec<f64> = knots.iter().map(|t| t * eta.sinh()).collect();
        let w = Worldline::spline(knots, z1).unwrap();
        let b = Worldline::boosted(eta);
        for &t in &[-4.3, -1.0, 0.2, 3.9] {
            assert!((w.v1(t) - b.v1(t)).abs() < 1e-12);
            let (p, q) = (w.position(t), b.position(t));
            assert!((p.x1 - q.x1).abs() < 1e-12);
            // z⁰ anchored at the first knot: z⁰(−5) = −5.
            assert!((p.x0 - (-5.0 + (t + 5.0) * eta.cosh())).abs() < 1e-11);
        }
    }
}
