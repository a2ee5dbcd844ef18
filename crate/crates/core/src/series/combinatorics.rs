//! Exact collapse sums, the vanishing alternating ℰ-sum, and factorial majorants.

use super::kernels::PointSet;
use super::{factorial, ModelParams, SeriesIndex};
use crate::error::{Error, Result};
use crate::geometry::SpacetimePoint;
use crate::propagators::Regulators;
use crate::states::StateW;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn inv_fact4(a: usize, b: usize, c: usize, d: usize) -> BigRational {
    BigRational::new(BigInt::one(), factorial(a) * factorial(b) * factorial(c) * factorial(d))
}

/// Even and odd collapse sums and their closed forms, all exact.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentitySums {
    pub even: BigRational,
    pub even_closed: BigRational,
    pub odd: BigRational,
    pub odd_closed: BigRational,
}

impl IdentitySums {
    pub fn holds(&self) -> bool {
        self.even == self.even_closed && self.odd == self.odd_closed
    }
}

/// Σ_{k=0}^{2n} Σ_{ℓ=max(0,k−n)}^{min(k,n)} 1/(ℓ!(k−ℓ)!(n−ℓ)!(n−k+ℓ)!) and the shifted odd sum
/// Σ_{k=0}^{2n+1} Σ_{ℓ=max(0,k−n−1)}^{min(k,n)} 1/(ℓ!(k−ℓ)!(n−ℓ)!(n+1−k+ℓ)!).
pub fn identity_sums(n: usize) -> Result<IdentitySums> {
    if n > 64 {
        return Err(Error::Input(format!("identity sums limited to n ≤ 64, got {n}")));
    }
    let mut even = BigRational::zero();
    for k in 0..=2 * n {
        for l in k.saturating_sub(n)..=k.min(n) {
            even += inv_fact4(l, k - l, n - l, n + l - k);
        }
    }
    let mut odd = BigRational::zero();
    for k in 0..=2 * n + 1 {
        for l in k.saturating_sub(n + 1)..=k.min(n) {
            odd += inv_fact4(l, k - l, n - l, n + 1 + l - k);
        }
    }
    let two = BigInt::from(2);
    let even_closed = BigRational::new(num_traits::pow(two.clone(), 2 * n), factorial(n) * factorial(n));
    let odd_closed = BigRational::new(num_traits::pow(two, 2 * n + 1), factorial(n) * factorial(n + 1));
    Ok(IdentitySums { even, even_closed, odd, odd_closed })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Result of the alternating sum with the largest single term for scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VanishingSum {
    pub value: Complex64,
    pub max_term: f64,
}

/// 𝕊 Σ_k Σ_ℓ (−1)^{k+n} ℰ_{k,ℓ,2n,n−ℓ}/(ℓ!(k−ℓ)!(n−ℓ)!(n−k+ℓ)!), symmetrized by averaging
/// over permutations of the x's and of the y's.
pub fn vanishing_sum(
    n: usize,
    xs: &[SpacetimePoint],
    ys: &[SpacetimePoint],
    r: &Regulators,
    p: &ModelParams,
    s: &StateW,
    symmetrize: bool,
) -> Result<VanishingSum> {
    if n == 0 || xs.len() != n || ys.len() != n {
        return Err(Error::Input(format!("vanishing sum needs n ≥ 1 and n points of each charge (n={n})")));
    }
    if n > 4 && symmetrize {
        return Err(Error::Input("symmetrization limited to n ≤ 4".into()));
    }
    let perms = if symmetrize { permutations(n) } else { vec![(0..n).collect()] };
    let mut total = Complex64::new(0.0, 0.0);
    let mut max_term: f64 = 0.0;
    let mut count = 0usize;
    for px in &perms {
        for py in &perms {
            let xp: Vec<_> = px.iter().map(|&i| xs[i]).collect();
            let yp: Vec<_> = py.iter().map(|&i| ys[i]).collect();
            let set = PointSet::new(&xp, &yp, r, s)?;
            for k in 0..=2 * n {
                for l in k.saturating_sub(n)..=k.min(n) {
                    let idx = SeriesIndex::new(2 * n, k, l, n - l)?;
                    let sign = if (k + n) % 2 == 0 { 1.0 } else { -1.0 };
                    let w = sign / (fact_f(l) * fact_f(k - l) * fact_f(n - l) * fact_f(n + l - k));
                    let term = set.cal_e(&idx, p.beta_sq) * w;
                    max_term = max_term.max(term.norm());
                    total += term;
                }
            }
            count += 1;
        }
    }
    Ok(VanishingSum { value: total / count as f64, max_term })
}

/// Seeded configuration of n x's and n y's, uniform in [−2, 2]², pairwise separated from the
/// light cone by at least 10⁻² in both light-cone coordinates.
pub fn random_configuration(seed: u64, n: usize, index: u64) -> (Vec<SpacetimePoint>, Vec<SpacetimePoint>) {
    use rand::Rng;
    let mut rng = crate::rng::sample_rng(seed, crate::rng::stream_id("vanishing", n as i64, 0), index);
    loop {
        let pts: Vec<SpacetimePoint> = (0..2 * n).map(|_| SpacetimePoint::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))).collect();
        let ok = pts.iter().enumerate().all(|(i, p)| {
            pts[i + 1..].iter().all(|q| (p.u() - q.u()).abs() > 1e-2 && (p.v() - q.v()).abs() > 1e-2)
        });
        if ok {
            return (pts[..n].to_vec(), pts[n..].to_vec());
        }
    }
}

fn fact_f(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Ĉ (n+1)² (2K̂)^{2n} / (n!)^{1−β²/4π}.
pub fn majorant(n: usize, c_hat: f64, k_hat: f64, beta_sq: f64) -> f64 {
    let expo = 1.0 - beta_sq / (4.0 * std::f64::consts::PI);
    c_hat * ((n + 1) as f64).powi(2) * (2.0 * k_hat).powi(2 * n as i32) / fact_f(n).powf(expo)
}

/// Odd-sector analogue Ĉ K̂ (n+1) (2K̂)^{2n} / (n!)^{1−β²/4π}.
pub fn majorant_odd(n: usize, c_hat: f64, k_hat: f64, beta_sq: f64) -> f64 {
    let expo = 1.0 - beta_sq / (4.0 * std::f64::consts::PI);
    c_hat * k_hat * (n + 1) as f64 * (2.0 * k_hat).powi(2 * n as i32) / fact_f(n).powf(expo)
}

/// Σ_{j ≥ n0} majorant(j), summed until terms fall below 1e−17 of the running total.
pub fn majorant_tail(n0: usize, c_hat: f64, k_hat: f64, beta_sq: f64) -> f64 {
    let mut sum = 0.0;
    let mut j = n0;
    let mut prev = f64::INFINITY;
    loop {
        let t = majorant(j, c_hat, k_hat, beta_sq);
        sum += t;
        if (t < 1e-17 * sum && t < prev) || j > n0 + 100_000 {
            break;
        }
        prev = t;
        j += 1;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_identities() {
        let s = identity_sums(0).unwrap();
        assert!(s.holds() && s.even == BigRational::one());
        let s = identity_sums(2).unwrap();
        assert_eq!(s.even, BigRational::from_integer(BigInt::from(4)));
        let s = identity_sums(5).unwrap();
        assert_eq!(s.odd, BigRational::new(BigInt::from(2048), BigInt::from(120 * 720)));
    }

    #[test]
    fn majorant_example() {
        assert!((majorant(3, 1.0, 1.0, 0.0) - 16.0 * 64.0 / 6.0).abs() < 1e-12);
    }
}
