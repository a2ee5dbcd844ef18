//! Modified Bessel function K0 of complex argument (Re z > 0).

use num_complex::Complex64;
use std::f64::consts::PI;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// K0(z) for Re z > 0. Power series for |z| < 2, Steed's continued fraction for
/// 2 ≤ |z| < 17, and the Hankel asymptotic series beyond.
/// Saturates to 0 once exp(−Re z) underflows.
pub fn bessel_k0(z: Complex64) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        return Complex64::new(f64::INFINITY, 0.0);
    }
    if z.re > 700.0 {
        return Complex64::new(0.0, 0.0);
    }
    if r < 2.0 {
        k0_series(z)
    } else if r < 17.0 {
        k0_steed(z)
    } else {
        k0_asymptotic(z)
    }
}

fn k0_series(z: Complex64) -> Complex64 {
    let q = z * z * 0.25;
    let lead = -((z * 0.5).ln() + EULER_GAMMA);
    let mut term = Complex64::new(1.0, 0.0);
    let mut harmonic = 0.0;
    let mut sum = lead;
    for k in 1..200 {
        let kf = k as f64;
        term = term * q / (kf * kf);
        harmonic += 1.0 / kf;
        let add = term * (lead + harmonic);
        sum += add;
        if add.norm() < 1e-17 * sum.norm() {
            break;
        }
    }
    sum
}

fn k0_steed(x: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let mut b = (one + x) * 2.0;
    let mut d = one / b;
    let mut delh = d;
    let mut q1 = Complex64::new(0.0, 0.0);
    let mut q2 = one;
    let a1 = 0.25;
    let mut q = Complex64::new(a1, 0.0);
    let mut c = Complex64::new(a1, 0.0);
    let mut a = -a1;
    let mut s = one + q * delh;
    for i in 1..200_000 {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -c * a / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = one / (b + d * a);
        delh = (b * d - 1.0) * delh;
        let dels = q * delh;
        s += dels;
        if dels.norm() < 1e-17 * s.norm() {
            break;
        }
    }
    (Complex64::new(PI, 0.0) / (x * 2.0)).sqrt() * (-x).exp() / s
}

fn k0_asymptotic(z: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let m = (2.0 * kf - 1.0) * (2.0 * kf - 1.0);
        let next = term * (-m) / (kf * 8.0 * z);
        let nn = next.norm();
        if nn > prev {
            break;
        }
        prev = nn;
        term = next;
        sum += term;
        if nn < 1e-17 * sum.norm() {
            break;
        }
    }
    (Complex64::new(PI, 0.0) / (z * 2.0)).sqrt() * (-z).exp() * sum
}

/// Gamma function of a real argument.
pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}
