//! Regularized two-point kernels built from the massless Hadamard parametrix.
//!
//! Relative light-cone coordinates are u = u(x,y), v = v(x,y) as in
//! [`crate::geometry::lightcone`]. Derivatives `du`, `dv` in [`KernelJet`] are taken
//! with respect to the absolute light-cone coordinates of the *second* argument.

use crate::error::{Error, Result};
use crate::geometry::{lightcone, SpacetimePoint};
use crate::quad::{integrate_breaks, QuadOpts};
use crate::smearing::TestFunction2D;
use crate::special::{bessel_k0, EULER_GAMMA};
use num_complex::Complex64;
use std::f64::consts::PI;

pub const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Regulators {
    pub epsilon: f64,
    pub mu: f64,
}

impl Regulators {
    pub fn new(epsilon: f64, mu: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite() && mu > 0.0 && mu.is_finite()) {
            return Err(Error::Input(format!("regulators need ε > 0 and μ > 0, got ε={epsilon}, μ={mu}")));
        }
        Ok(Regulators { epsilon, mu })
    }
    pub fn with_epsilon(self, epsilon: f64) -> Self {
        Regulators { epsilon, ..self }
    }
}

/// Kernel value with first derivatives in (u_z, v_z) and diagonal second derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct KernelJet {
    pub val: Complex64,
    pub du: Complex64,
    pub dv: Complex64,
    pub duu: Complex64,
    pub dvv: Complex64,
}

impl std::ops::Add for KernelJet {
    type Output = KernelJet;
    fn add(self, o: KernelJet) -> KernelJet {
        KernelJet { val: self.val + o.val, du: self.du + o.du, dv: self.dv + o.dv, duu: self.duu + o.duu, dvv: self.dvv + o.dvv }
    }
}
impl std::ops::Sub for KernelJet {
    type Output = KernelJet;
    fn sub(self, o: KernelJet) -> KernelJet {
        KernelJet { val: self.val - o.val, du: self.du - o.du, dv: self.dv - o.dv, duu: self.duu - o.duu, dvv: self.dvv - o.dvv }
    }
}
impl std::ops::Mul<Complex64> for KernelJet {
    type Output = KernelJet;
    fn mul(self, c: Complex64) -> KernelJet {
        KernelJet { val: self.val * c, du: self.du * c, dv: self.dv * c, duu: self.duu * c, dvv: self.dvv * c }
    }
}

/// h(s) = (i/4π) ln μ(ε+is) with h'(s), h''(s).
#[inline]
pub fn h_single(s: f64, r: &Regulators) -> [Complex64; 3] {
    let a = Complex64::new(r.epsilon, s);
    let val = I / (4.0 * PI) * (a * r.mu).ln();
    let inv = a.inv();
    [val, -inv / (4.0 * PI), I * inv * inv / (4.0 * PI)]
}

/// H⁺ as a function of the relative light-cone pair (u, v).
pub fn h_plus_uv(u: f64, v: f64, r: &Regulators) -> Complex64 {
    h_single(u, r)[0] + h_single(v, r)[0]
}

/// H⁺(x, y) = (i/4π)[ln μ(ε+iu) + ln μ(ε+iv)], principal logs factor by factor.
pub fn hadamard_plus(x: SpacetimePoint, y: SpacetimePoint, r: &Regulators) -> Complex64 {
    let p = lightcone(x, y);
    h_plus_uv(p.u, p.v, r)
}

/// H^F(x, y) = (i/4π) ln[μ²(−uv + iε|u+v| + ε²)].
pub fn feynman(x: SpacetimePoint, y: SpacetimePoint, r: &Regulators) -> Complex64 {
    let p = lightcone(x, y);
    feynman_uv(p.u, p.v, r)
}

pub fn feynman_uv(u: f64, v: f64, r: &Regulators) -> Complex64 {
    let e = r.epsilon;
    let arg = Complex64::new(e * e - u * v, e * (u + v).abs()) * (r.mu * r.mu);
    I / (4.0 * PI) * arg.ln()
}

/// H^D(x, y) = Θ(x⁰−y⁰) H⁺(y,x) + Θ(y⁰−x⁰) H⁺(x,y), with Θ(0) = ½.
pub fn dyson(x: SpacetimePoint, y: SpacetimePoint, r: &Regulators) -> Complex64 {
    let a = hadamard_plus(y, x, r);
    let b = hadamard_plus(x, y, r);
    step(x.x0 - y.x0) * a + step(y.x0 - x.x0) * b
}

pub fn step(t: f64) -> f64 {
    if t > 0.0 {
        1.0
    } else if t < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// G_ret(x, y) = Θ(x⁰−y⁰)[H⁺(x,y) − H⁺(y,x)].
pub fn retarded(x: SpacetimePoint, y: SpacetimePoint, r: &Regulators) -> Complex64 {
    let t = step(x.x0 - y.x0);
    if t == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    (hadamard_plus(x, y, r) - hadamard_plus(y, x, r)) * t
}

/// Which parametrix sits on a link between an insertion point p and the field point z.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Link {
    /// H⁺(p, z)
    PlusPz,
    /// H⁺(z, p)
    PlusZp,
    /// H^F(p, z)
    Feynman,
    /// H^D(p, z)
    Dyson,
}

/// Jet of H⁺(p, z) in z, from relative pair (u, v) = lightcone(p, z).
fn jet_plus_pz(u: f64, v: f64, r: &Regulators) -> KernelJet {
    let a = h_single(u, r);
    let b = h_single(v, r);
    // u = u_p − u_z, so ∂/∂u_z = −∂/∂u.
    KernelJet { val: a[0] + b[0], du: -a[1], dv: -b[1], duu: a[2], dvv: b[2] }
}

/// Jet of H⁺(z, p) in z.
fn jet_plus_zp(u: f64, v: f64, r: &Regulators) -> KernelJet {
    let a = h_single(-u, r);
    let b = h_single(-v, r);
    KernelJet { val: a[0] + b[0], du: a[1], dv: b[1], duu: a[2], dvv: b[2] }
}

/// Jet of the chosen link kernel as a function of z.
pub fn link_jet(kind: Link, p: SpacetimePoint, z: SpacetimePoint, r: &Regulators) -> KernelJet {
    let lc = lightcone(p, z);
    let (u, v) = (lc.u, lc.v);
    match kind {
        Link::PlusPz => jet_plus_pz(u, v, r),
        Link::PlusZp => jet_plus_zp(u, v, r),
        Link::Feynman | Link::Dyson => {
            // Pointwise the closed forms equal the causal splits.
            let later = p.x0 - z.x0;
            let (fut, past) = (jet_plus_pz(u, v, r), jet_plus_zp(u, v, r));
            let (a, b) = if kind == Link::Feynman { (fut, past) } else { (past, fut) };
            if later > 0.0 {
                a
            } else if later < 0.0 {
                b
            } else {
                (a + b) * Complex64::new(0.5, 0.0)
            }
        }
    }
}

/// Kernel value only.
pub fn link_value(kind: Link, p: SpacetimePoint, z: SpacetimePoint, r: &Regulators) -> Complex64 {
    match kind {
        Link::PlusPz => hadamard_plus(p, z, r),
        Link::PlusZp => hadamard_plus(z, p, r),
        Link::Feynman => feynman(p, z, r),
        Link::Dyson => dyson(p, z, r),
    }
}

/// Three-point Richardson extrapolation for a geometric ladder h, h/q, h/q²,
/// assuming an error expansion a₁h + a₂h² + …; returns (limit, error estimate).
pub fn richardson(vals: &[f64], q: f64) -> (f64, f64) {
    match vals.len() {
        0 => (f64::NAN, f64::INFINITY),
        1 => (vals[0], f64::INFINITY),
        2 => {
            let r = (q * vals[1] - vals[0]) / (q - 1.0);
            (r, (r - vals[1]).abs())
        }
        _ => {
            let n = vals.len();
            let (a, b, c) = (vals[n - 3], vals[n - 2], vals[n - 1]);
            let r1 = (q * b - a) / (q - 1.0);
            let r2 = (q * c - b) / (q - 1.0);
            let q2 = q * q;
            let r = (q2 * r2 - r1) / (q2 - 1.0);
            (r, (r - r2).abs())
        }
    }
}

/// ε→0 value of G_ret on the ladder ε₀, ε₀/2, ε₀/4 with its extrapolation error.
pub fn retarded_limit(x: SpacetimePoint, y: SpacetimePoint, r: &Regulators) -> (Complex64, f64) {
    let vals: Vec<Complex64> = (0..3).map(|k| retarded(x, y, &r.with_epsilon(r.epsilon / f64::powi(2.0, k)))).collect();
    let (re, ere) = richardson(&vals.iter().map(|c| c.re).collect::<Vec<_>>(), 2.0);
    let (im, eim) = richardson(&vals.iter().map(|c| c.im).collect::<Vec<_>>(), 2.0);
    (Complex64::new(re, im), ere.hypot(eim))
}

/// ∫ (−4∂_u∂_v H^F)(x,y) f(y) d²y with the nascent delta 2ε/(π(u²+ε²)) δ(u+v).
/// On the support of δ(u+v), y⁰ = x⁰ and y¹ = x¹ + u.
pub fn smeared_dalembert_feynman(f: &TestFunction2D, x: SpacetimePoint, r: &Regulators) -> Result<f64> {
    let e = r.epsilon;
    let ((_, _), (lo1, hi1)) = f.support();
    let g = |u: f64| {
        let y = SpacetimePoint::new(x.x0, x.x1 + u);
        e / (PI * (u * u + e * e)) * f.eval(y)
    };
    let span = (hi1 - lo1).abs() + (x.x1 - lo1).abs() + (x.x1 - hi1).abs();
    let mut pts = vec![-span, -1.0, -100.0 * e, -10.0 * e, -e, 0.0, e, 10.0 * e, 100.0 * e, 1.0, span];
    pts.push(lo1 - x.x1);
    pts.push(hi1 - x.x1);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let res = integrate_breaks(g, &pts, QuadOpts { abs_tol: 1e-13, rel_tol: 1e-12, max_intervals: 10000 });
    if !res.converged {
        return Err(Error::Numerical(format!("nascent-delta quadrature did not converge (err {})", res.error)));
    }
    // Tails beyond ±span: the Lorentzian weight times sup|f|, bounded analytically.
    Ok(res.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductKind {
    FFuu,
    FFvv,
    FFuv,
    WWuu,
    WWvv,
    WWuv,
}

/// Renormalized coincidence products, local δ² terms dropped; derivatives are with
/// respect to the relative coordinates u(x,y), v(x,y).
pub fn renormalized_product(kind: ProductKind, x: SpacetimePoint, y: SpacetimePoint, r: &Regulators) -> Complex64 {
    let lc = lightcone(x, y);
    let (u, v) = (lc.u, lc.v);
    // H^F = (i/4π) ln A with A = −uv + iε|u+v| + ε², sgn(0) = 0 at equal times.
    let e = r.epsilon;
    let sg = if u + v > 0.0 { 1.0 } else if u + v < 0.0 { -1.0 } else { 0.0 };
    let a = Complex64::new(e * e - u * v, e * (u + v).abs());
    let au = Complex64::new(-v, e * sg) / a;
    let av = Complex64::new(-u, e * sg) / a;
    let kf = I / (4.0 * PI);
    let k = -I / (4.0 * PI);
    match kind {
        ProductKind::WWuu => k * h_single(u, r)[2],
        ProductKind::WWvv => k * h_single(v, r)[2],
        ProductKind::WWuv => h_single(u, r)[1] * h_single(v, r)[1],
        ProductKind::FFuu => k * kf * (-au * au),
        ProductKind::FFvv => k * kf * (-av * av),
        ProductKind::FFuv => {
            let hf = kf * (a * (r.mu * r.mu)).ln();
            kf * kf * au * av + hf * kf * (-a.inv() - au * av)
        }
    }
}

/// (1/2π) K₀(2Λe^{−γ} sqrt((ε+iu)(ε+iv))), principal square root.
pub fn massive_hadamard(x: SpacetimePoint, y: SpacetimePoint, lambda: f64, r: &Regulators) -> Complex64 {
    let lc = lightcone(x, y);
    massive_hadamard_uv(lc.u, lc.v, lambda, r)
}

pub fn massive_hadamard_uv(u: f64, v: f64, lambda: f64, r: &Regulators) -> Complex64 {
    let prod = Complex64::new(r.epsilon, u) * Complex64::new(r.epsilon, v);
    let z = prod.sqrt() * (2.0 * lambda * (-EULER_GAMMA).exp());
    bessel_k0(z) / (2.0 * PI)
}
