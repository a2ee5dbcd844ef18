//! Perturbative expansion of the smeared energy density.

pub mod combinatorics;
pub mod conservation;
pub mod kernels;
pub mod mc;

use crate::error::{Error, Result};
use crate::smearing::AdiabaticCutoff;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use std::f64::consts::PI;

pub use conservation::{conservation_check, Component, ConservationReport, DivergenceEstimate};
pub use combinatorics::{identity_sums, majorant, majorant_odd, majorant_tail, random_configuration, vanishing_sum};
pub use kernels::{bar_cal_g, cal_e, cal_g, cal_g_jet, theta_spacetime, theta_worldline, ThetaValue};
pub use mc::{order_value, term_value, McConfig, TermEstimate, TimeWeight};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub beta_sq: f64,
    pub g: AdiabaticCutoff,
    pub mc_default_beta_sq_cap: f64,
}

impl ModelParams {
    pub fn new(beta_sq: f64, g: AdiabaticCutoff) -> Result<Self> {
        let p = ModelParams { beta_sq, g, mc_default_beta_sq_cap: PI };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta_sq > 0.0 && self.beta_sq < 4.0 * PI) {
            return Err(Error::Input(format!("β² = {} outside the finite regime (0, 4π)", self.beta_sq)));
        }
        self.g.validate()
    }

    /// γ = β²/4π, the exponent of the pair factors |μ²uv|^{∓γ}.
    pub fn gamma(&self) -> f64 {
        self.beta_sq / (4.0 * PI)
    }

    /// 1 − β²/8π.
    pub fn vertex_factor(&self) -> f64 {
        1.0 - self.beta_sq / (8.0 * PI)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeriesIndex {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub m: usize,
}

impl SeriesIndex {
    pub fn new(n: usize, k: usize, l: usize, m: usize) -> Result<Self> {
        if l <= k && k <= n && m <= n - k {
            Ok(SeriesIndex { n, k, l, m })
        } else {
            Err(Error::Input(format!("invalid series index (n,k,l,m) = ({n},{k},{l},{m})")))
        }
    }

    /// Number of x insertions (charge +β).
    pub fn nx(&self) -> usize {
        self.l + self.m
    }

    /// Number of y insertions (charge −β).
    pub fn ny(&self) -> usize {
        self.n - self.l - self.m
    }

    /// Sector s with 2(l+m) = n + s, if s ∈ {−1, 0, 1}.
    pub fn sector(&self) -> Option<i32> {
        let s = 2 * self.nx() as i64 - self.n as i64;
        (-1..=1).contains(&s).then_some(s as i32)
    }

    /// (−1)^k / (l!(k−l)!m!(n−k−m)!) exactly.
    pub fn weight_exact(&self) -> BigRational {
        let den = factorial(self.l) * factorial(self.k - self.l) * factorial(self.m) * factorial(self.n - self.k - self.m);
        let sign = if self.k % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        BigRational::new(sign, den)
    }

    /// (−1)^k iⁿ / (l!(k−l)!m!(n−k−m)!).
    pub fn coefficient(&self) -> Complex64 {
        let w = self.weight_exact().to_f64().unwrap_or(f64::NAN);
        let ipow = match self.n % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        ipow * w
    }
}

pub fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

/// All (k, l, m) with l ≤ k ≤ n, m ≤ n − k and 2(l+m) = n + s.
pub fn enumerate_sector(n: usize, s: i32) -> Vec<SeriesIndex> {
    let mut out = Vec::new();
    for k in 0..=n {
        for l in 0..=k {
            for m in 0..=(n - k) {
                if 2 * (l + m) as i64 == n as i64 + s as i64 {
                    out.push(SeriesIndex { n, k, l, m });
                }
            }
        }
    }
    out
}
