//! ℰ, 𝒢, 𝒢̄ and the Θ kernels.
//!
//! Each insertion point carries a charge σ (+1 for x, −1 for y) and a group: anti-time-ordered
//! (the first l x's and first k−l y's) or time-ordered (the rest). With this bookkeeping
//! ℰ = exp[−iβ² Σ_{p<q} σ_pσ_q K(p,q) − (β²/2) Σ_{p,q} σ_pσ_q W(p,q)] where K is H^D inside the
//! anti group, H^F inside the time-ordered group and H⁺(anti point, time-ordered point) across.

use super::{ModelParams, SeriesIndex};
use crate::error::{Error, Result};
use crate::geometry::{SpacetimePoint, Worldline};
use crate::propagators::{link_jet, step, KernelJet, Link, Regulators, I};
use crate::states::{StateW, WJet};
use num_complex::Complex64;

/// Insertion points with all pairwise kernel values cached.
#[derive(Clone, Debug)]
pub struct PointSet {
    pub pts: Vec<SpacetimePoint>,
    pub nx: usize,
    hp: Vec<Vec<Complex64>>,
    w: Vec<Vec<f64>>,
}

impl PointSet {
    pub fn new(xs: &[SpacetimePoint], ys: &[SpacetimePoint], r: &Regulators, s: &StateW) -> Result<Self> {
        let pts: Vec<SpacetimePoint> = xs.iter().chain(ys.iter()).copied().collect();
        let n = pts.len();
        let mut hp = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        let mut w = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    hp[i][j] = crate::propagators::hadamard_plus(pts[i], pts[j], r);
                }
                if j >= i && !s.is_vacuum() {
                    let v = s.eval(pts[i], pts[j])?;
                    w[i][j] = v;
                    w[j][i] = v;
                }
            }
        }
        Ok(PointSet { pts, nx: xs.len(), hp, w })
    }

    fn charge(&self, i: usize) -> f64 {
        if i < self.nx {
            1.0
        } else {
            -1.0
        }
    }

    /// Whether point i is in the anti-time-ordered group for this index.
    fn anti(&self, idx: &SeriesIndex, i: usize) -> bool {
        if i < self.nx {
            i < idx.l
        } else {
            i - self.nx < idx.k - idx.l
        }
    }

    fn check(&self, idx: &SeriesIndex) -> Result<()> {
        if idx.nx() != self.nx || idx.ny() != self.pts.len() - self.nx {
            return Err(Error::Input(format!(
                "index {idx:?} needs {} x and {} y points, got {} and {}",
                idx.nx(),
                idx.ny(),
                self.nx,
                self.pts.len() - self.nx
            )));
        }
        Ok(())
    }

    fn feynman(&self, i: usize, j: usize) -> Complex64 {
        let t = self.pts[i].x0 - self.pts[j].x0;
        self.hp[i][j] * step(t) + self.hp[j][i] * step(-t)
    }

    fn dyson(&self, i: usize, j: usize) -> Complex64 {
        let t = self.pts[i].x0 - self.pts[j].x0;
        self.hp[j][i] * step(t) + self.hp[i][j] * step(-t)
    }

    /// Exponent of ℰ split as (parametrix part, W part).
    pub fn cal_e_exponent(&self, idx: &SeriesIndex, beta_sq: f64) -> (Complex64, f64) {
        let n = self.pts.len();
        let mut h = Complex64::new(0.0, 0.0);
        let mut wsum = 0.0;
        for i in 0..n {
            for j in 0..n {
                wsum += self.charge(i) * self.charge(j) * self.w[i][j];
            }
            for j in (i + 1)..n {
                let (ai, aj) = (self.anti(idx, i), self.anti(idx, j));
                let k = match (ai, aj) {
                    (true, true) => self.dyson(i, j),
                    (false, false) => self.feynman(i, j),
                    (true, false) => self.hp[i][j],
                    (false, true) => self.hp[j][i],
                };
                h += k * (self.charge(i) * self.charge(j));
            }
        }
        (-I * beta_sq * h, -0.5 * beta_sq * wsum)
    }

    /// ℰ_{k,l,n,m} for points laid out as (x..., y...). The index must match the point counts.
    pub fn cal_e(&self, idx: &SeriesIndex, beta_sq: f64) -> Complex64 {
        let (h, w) = self.cal_e_exponent(idx, beta_sq);
        (h + w).exp()
    }

    /// Jets of the links from every insertion point to z.
    pub fn links(&self, z: SpacetimePoint, r: &Regulators, s: &StateW) -> Result<ZLinks> {
        let mut plus_pz = Vec::with_capacity(self.pts.len());
        let mut plus_zp = Vec::with_capacity(self.pts.len());
        let mut w = Vec::with_capacity(self.pts.len());
        for &p in &self.pts {
            plus_pz.push(link_jet(Link::PlusPz, p, z, r));
            plus_zp.push(link_jet(Link::PlusZp, p, z, r));
            w.push(s.jet(p, z)?);
        }
        Ok(ZLinks { z, plus_pz, plus_zp, w })
    }

    /// 𝒢 jet (value and z-derivatives) for this index.
    pub fn cal_g(&self, idx: &SeriesIndex, links: &ZLinks) -> GJet {
        self.assemble(idx, links, false)
    }

    /// 𝒢̄ jet for this index.
    pub fn bar_cal_g(&self, idx: &SeriesIndex, links: &ZLinks) -> GJet {
        self.assemble(idx, links, true)
    }

    fn assemble(&self, idx: &SeriesIndex, lk: &ZLinks, bar: bool) -> GJet {
        let mut total = KernelJet::default();
        let mut self_uu = Complex64::new(0.0, 0.0);
        let mut self_vv = Complex64::new(0.0, 0.0);
        let mut sq_u = Complex64::new(0.0, 0.0);
        let mut sq_v = Complex64::new(0.0, 0.0);
        for i in 0..self.pts.len() {
            let t = self.pts[i].x0 - lk.z.x0;
            let (fut, past) = (lk.plus_pz[i], lk.plus_zp[i]);
            // H^F(p,z) and H^D(z,p) select by the time order of p and z.
            let ordered = |a: KernelJet, b: KernelJet| {
                if t > 0.0 {
                    a
                } else if t < 0.0 {
                    b
                } else {
                    (a + b) * Complex64::new(0.5, 0.0)
                }
            };
            let k = match (self.anti(idx, i), bar) {
                (true, false) => fut,
                (false, false) => ordered(fut, past),
                (true, true) => ordered(past, fut),
                (false, true) => past,
            };
            let wj = lk.w[i];
            let wk = KernelJet {
                val: Complex64::new(wj.val, 0.0),
                du: Complex64::new(wj.du, 0.0),
                dv: Complex64::new(wj.dv, 0.0),
                duu: Complex64::new(wj.duu, 0.0),
                dvv: Complex64::new(wj.dvv, 0.0),
            };
            let sg = Complex64::new(self.charge(i), 0.0);
            total = total + (k - wk * I) * sg;
            self_uu += k.duu;
            self_vv += k.dvv;
            sq_u += k.du * k.du;
            sq_v += k.dv * k.dv;
        }
        GJet { jet: total, self_sq: [sq_u, sq_v], self_ren: [self_uu * (-I / (4.0 * std::f64::consts::PI)), self_vv * (-I / (4.0 * std::f64::consts::PI))] }
    }
}

/// Link jets from each insertion point to a fixed z.
#[derive(Clone, Debug)]
pub struct ZLinks {
    pub z: SpacetimePoint,
    pub plus_pz: Vec<KernelJet>,
    pub plus_zp: Vec<KernelJet>,
    pub w: Vec<WJet>,
}

/// 𝒢 with the per-point squared parametrix derivatives and their renormalized replacements.
#[derive(Clone, Copy, Debug)]
pub struct GJet {
    pub jet: KernelJet,
    /// Σ_p (∂_u K_p)², Σ_p (∂_v K_p)².
    pub self_sq: [Complex64; 2],
    /// Σ_p −(i/4π)∂²K_p in u and v.
    pub self_ren: [Complex64; 2],
}

impl GJet {
    /// (∂_u𝒢)² and (∂_v𝒢)² with coincident self-products renormalized.
    pub fn squares_renormalized(&self) -> [Complex64; 2] {
        [
            self.jet.du * self.jet.du - self.self_sq[0] + self.self_ren[0],
            self.jet.dv * self.jet.dv - self.self_sq[1] + self.self_ren[1],
        ]
    }
}

fn points(idx: &SeriesIndex, xs: &[SpacetimePoint], ys: &[SpacetimePoint], r: &Regulators, s: &StateW) -> Result<PointSet> {
    let set = PointSet::new(xs, ys, r, s)?;
    set.check(idx)?;
    Ok(set)
}

/// ℰ_{k,l,n,m}(xs; ys).
pub fn cal_e(idx: &SeriesIndex, xs: &[SpacetimePoint], ys: &[SpacetimePoint], r: &Regulators, p: &ModelParams, s: &StateW) -> Result<Complex64> {
    Ok(points(idx, xs, ys, r, s)?.cal_e(idx, p.beta_sq))
}

/// 𝒢_{k,l,n,m}(xs; ys; z).
pub fn cal_g(idx: &SeriesIndex, xs: &[SpacetimePoint], ys: &[SpacetimePoint], z: SpacetimePoint, r: &Regulators, s: &StateW) -> Result<Complex64> {
    Ok(cal_g_jet(idx, xs, ys, z, r, s)?.jet.val)
}

/// 𝒢 with analytic z-derivatives.
pub fn cal_g_jet(idx: &SeriesIndex, xs: &[SpacetimePoint], ys: &[SpacetimePoint], z: SpacetimePoint, r: &Regulators, s: &StateW) -> Result<GJet> {
    let set = points(idx, xs, ys, r, s)?;
    let lk = set.links(z, r, s)?;
    Ok(set.cal_g(idx, &lk))
}

/// 𝒢̄_{k,l,n,m}(xs; ys; z).
pub fn bar_cal_g(idx: &SeriesIndex, xs: &[SpacetimePoint], ys: &[SpacetimePoint], z: SpacetimePoint, r: &Regulators, s: &StateW) -> Result<Complex64> {
    let set = points(idx, xs, ys, r, s)?;
    let lk = set.links(z, r, s)?;
    Ok(set.bar_cal_g(idx, &lk).jet.val)
}

/// Sector-tagged Θ value on the worldline.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaValue {
    pub sector: i32,
    pub value: Complex64,
}

/// Θ^{k,l,n,m}(xs; ys; τ) = v^μv^ν Θ_μν at z = z(τ).
#[allow(clippy::too_many_arguments)]
pub fn theta_worldline(
    idx: &SeriesIndex,
    xs: &[SpacetimePoint],
    ys: &[SpacetimePoint],
    tau: f64,
    wl: &Worldline,
    r: &Regulators,
    p: &ModelParams,
    s: &StateW,
) -> Result<ThetaValue> {
    let sector = idx.sector().ok_or_else(|| Error::Input(format!("index {idx:?} is in no contributing sector")))?;
    let z = wl.position(tau);
    let set = points(idx, xs, ys, r, s)?;
    let lk = set.links(z, r, s)?;
    let g = set.cal_g(idx, &lk);
    let value = if sector == 0 {
        let (qu, qv) = (wl.vu(tau), wl.vv(tau));
        let sq = g.squares_renormalized();
        let hw = s.coincident_hessian()?;
        (sq[0] * p.beta_sq + hw[0][0]) * (qu * qu) + (sq[1] * p.beta_sq + hw[1][1]) * (qv * qv)
    } else {
        vertex_factor(sector, g.jet.val, z, p, s)? * (-1.0)
    };
    Ok(ThetaValue { sector, value })
}

/// (1−β²/8π) g(z) exp[∓iβ²𝒢 − (β²/2)W(z,z)] for s = ∓1.
pub fn vertex_factor(sector: i32, gval: Complex64, z: SpacetimePoint, p: &ModelParams, s: &StateW) -> Result<Complex64> {
    let wzz = if s.is_vacuum() { 0.0 } else { s.eval(z, z)? };
    let sign = if sector < 0 { -1.0 } else { 1.0 };
    Ok((I * gval * (sign * p.beta_sq) - 0.5 * p.beta_sq * wzz).exp() * (p.vertex_factor() * p.g.eval(z)))
}

/// Θ_μν(xs; ys; z) in Cartesian components (lower indices, η = diag(−1, 1)).
#[allow(clippy::too_many_arguments)]
pub fn theta_spacetime(
    idx: &SeriesIndex,
    xs: &[SpacetimePoint],
    ys: &[SpacetimePoint],
    z: SpacetimePoint,
    r: &Regulators,
    p: &ModelParams,
    s: &StateW,
) -> Result<[[Complex64; 2]; 2]> {
    let sector = idx.sector().ok_or_else(|| Error::Input(format!("index {idx:?} is in no contributing sector")))?;
    let set = points(idx, xs, ys, r, s)?;
    let lk = set.links(z, r, s)?;
    let g = set.cal_g(idx, &lk);
    let eta = [[-1.0, 0.0], [0.0, 1.0]];
    let zero = Complex64::new(0.0, 0.0);
    let mut th = [[zero; 2]; 2];
    if sector == 0 {
        // Products in light-cone components, self-products renormalized.
        let sq = g.squares_renormalized();
        let uv = g.jet.du * g.jet.dv;
        let (uu, vv) = (sq[0], sq[1]);
        // ∂₀ = ∂_u + ∂_v, ∂₁ = ∂_v − ∂_u.
        let a00 = uu + vv + uv * 2.0;
        let a11 = uu + vv - uv * 2.0;
        let a01 = vv - uu;
        let trace = -a00 + a11;
        let hw = s.coincident_hessian()?;
        let w00 = hw[0][0] + hw[1][1];
        let w11 = hw[0][0] + hw[1][1];
        let w01 = hw[1][1] - hw[0][0];
        let wtr = -w00 + w11;
        let a = [[a00, a01], [a01, a11]];
        let w = [[w00, w01], [w01, w11]];
        for mu in 0..2 {
            for nu in 0..2 {
                th[mu][nu] = (a[mu][nu] - trace * (0.5 * eta[mu][nu])) * p.beta_sq + (w[mu][nu] - 0.5 * eta[mu][nu] * wtr);
            }
        }
    } else {
        let v = vertex_factor(sector, g.jet.val, z, p, s)?;
        for mu in 0..2 {
            th[mu][mu] = v * eta[mu][mu];
        }
    }
    Ok(th)
}
