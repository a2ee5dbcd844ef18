//! One function per command. Each returns its tables, an optional text report and whether
//! every check passed.

use super::config::{Command, ComponentCfg, RunConfig, SweepParam, SweepTarget, WorldlineCfg};
use super::output::{num, status, Table};
use crate::error::{Error, Result};
use crate::propagators::Regulators;
use crate::qei::{k0, qei_verify, BoundOptions, QeiReport};
use crate::series::{
    conservation_check, enumerate_sector, identity_sums, random_configuration, term_value, vanishing_sum, Component,
    ModelParams, TermEstimate, TimeWeight,
};
use crate::smearing::AdiabaticCutoff;
use std::f64::consts::PI;
use std::fmt::Write as _;

pub struct Outcome {
    pub tables: Vec<(String, Table)>,
    pub report: Option<String>,
    pub ok: bool,
}

pub fn dispatch(cfg: &RunConfig, threads: usize) -> Result<Outcome> {
    match cfg.command {
        Command::K0 => k0_cmd(cfg),
        Command::Identities => identities_cmd(cfg),
        Command::Energy => energy_cmd(cfg, threads),
        Command::Qei => qei_cmd(cfg, threads),
        Command::Conservation => conservation_cmd(cfg, threads),
        Command::Sweep => sweep_cmd(cfg, threads),
    }
}

const K0_GRID: usize = 201;

/// Integrand of K₀ on a τ-grid plus the integrated totals.
fn k0_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let (wl, f) = (cfg.worldline()?, cfg.f()?);
    let (ks, ka) = k0(&wl, &f)?;
    let mut t = Table::new(&["label", "tau", "K0_straight", "K0_accel", "K0_total", "status"]);
    let (lo, hi) = f.support();
    let (a, b) = ((f.center - 8.0 * f.scale()).max(lo), (f.center + 8.0 * f.scale()).min(hi));
    for i in 0..K0_GRID {
        let tau = a + (b - a) * i as f64 / (K0_GRID - 1) as f64;
        if !wl.in_domain(tau) {
            continue;
        }
        let [fv, d1, _] = f.derivs(tau);
        let s = d1 * d1 / (4.0 * PI);
        let acc = wl.a1(tau) / wl.v1(tau).hypot(1.0);
        let ac = fv * fv * acc * acc / (24.0 * PI);
        t.push(vec!["density".into(), num(tau), num(s), num(ac), num(s + ac), status(true)]);
    }
    let ok = (ks + ka).is_finite();
    t.push(vec!["total".into(), String::new(), num(ks), num(ka), num(ks + ka), status(ok)]);
    Ok(Outcome { tables: vec![("k0".into(), t)], report: None, ok })
}

const N1_TOL: f64 = 1e-12;
const N2_TOL: f64 = 1e-10;
const VANISHING_EPS: f64 = 1e-3;

/// Exact collapse sums for n ≤ n_max and the alternating sums on seeded configurations.
fn identities_cmd(cfg: &RunConfig) -> Result<Outcome> {
    let ic = cfg.identities();
    let state = cfg.state()?;
    let params = ModelParams::new(cfg.beta_sq(), AdiabaticCutoff::gaussian(1.0, 1.0, 1.0))?;
    let seed = cfg.mc.as_ref().map_or(1, |m| m.seed);
    let mut t = Table::new(&["check", "n", "index", "value", "reference", "residual", "status"]);
    let mut ok = true;
    for n in 0..=ic.n_max {
        let s = identity_sums(n)?;
        let mut even_ref = s.even_closed.clone();
        if ic.self_test {
            // deliberately wrong reference; the check must fail
            even_ref += num_rational::BigRational::new(1.into(), num_bigint::BigInt::from(1u64 << 40));
        }
        for (name, v, r) in [("even_sum", &s.even, &even_ref), ("odd_sum", &s.odd, &s.odd_closed)] {
            let pass = v == r;
            ok &= pass;
            t.push(vec![name.into(), n.to_string(), String::new(), v.to_string(), r.to_string(), (v - r).to_string(), status(pass)]);
        }
    }
    let r = Regulators::new(VANISHING_EPS, 1.0)?;
    for (n, sym, tol) in [(1usize, false, N1_TOL), (2, true, N2_TOL)] {
        for i in 0..ic.configurations {
            let (xs, ys) = random_configuration(seed, n, i as u64);
            let v = vanishing_sum(n, &xs, &ys, &r, &params, &state, sym)?;
            let resid = if n == 1 { v.value.norm() } else { v.value.norm() / v.max_term };
            let pass = resid <= tol;
            ok &= pass;
            let name = if sym { "vanishing_symmetrized" } else { "vanishing" };
            t.push(vec![name.into(), n.to_string(), i.to_string(), num(v.value.norm()), num(v.max_term), num(resid), status(pass)]);
        }
    }
    Ok(Outcome { tables: vec![("identities".into(), t)], report: None, ok })
}

fn energy_rows(cfg: &RunConfig, threads: usize, t: &mut Table, prefix: &[String]) -> Result<bool> {
    let (wl, f, params, state) = (cfg.worldline()?, cfg.f()?, cfg.params()?, cfg.state()?);
    let mc = cfg.mc(threads)?;
    let w = TimeWeight::Squared(f);
    let mut ok = true;
    let (mut total, mut var) = (0.0, 0.0);
    for n in 0..=mc.max_order {
        let mut parts = Vec::new();
        for s in -1..=1 {
            if enumerate_sector(n, s).is_empty() {
                continue;
            }
            let e = term_value(n, s, &state, &params, &wl, &w, &mc)?;
            ok &= !e.flagged;
            let mut row = prefix.to_vec();
            row.extend([n.to_string(), s.to_string(), num(e.value), num(e.std_error), num(e.imag), e.samples.to_string(), status(!e.flagged)]);
            t.push(row);
            parts.push(e);
        }
        let e = TermEstimate::combine(&parts, None);
        total += e.value;
        var += e.std_error * e.std_error;
        let mut row = prefix.to_vec();
        row.extend([n.to_string(), "all".into(), num(e.value), num(e.std_error), num(e.imag), e.samples.to_string(), status(!e.flagged)]);
        t.push(row);
    }
    let mut row = prefix.to_vec();
    row.extend(["total".into(), "all".into(), num(total), num(var.sqrt()), String::new(), String::new(), status(ok)]);
    t.push(row);
    Ok(ok)
}

const ENERGY_COLUMNS: [&str; 7] = ["order", "sector", "value", "std_error", "imag", "samples", "status"];

/// Smeared energy density ∫f² ⟨Θ⟩ per sector and order.
fn energy_cmd(cfg: &RunConfig, threads: usize) -> Result<Outcome> {
    let mut t = Table::new(&ENERGY_COLUMNS);
    let ok = energy_rows(cfg, threads, &mut t, &[])?;
    Ok(Outcome { tables: vec![("energy".into(), t)], report: None, ok })
}

fn qei_report(cfg: &RunConfig, threads: usize) -> Result<QeiReport> {
    let (wl, f, params, state) = (cfg.worldline()?, cfg.f()?, cfg.params()?, cfg.state()?);
    let mc = cfg.mc(threads)?;
    qei_verify(&state, &wl, &f, &params, mc.max_order, &mc, &BoundOptions::default())
}

fn qei_rows(r: &QeiReport, t: &mut Table, prefix: &[String]) {
    let mut push = |q: String, v: f64, s: f64| {
        let mut row = prefix.to_vec();
        row.extend([q, num(v), num(s), r.verdict.as_str().to_string()]);
        t.push(row);
    };
    push("K0_straight".into(), r.k0_straight, 0.0);
    push("K0_accel".into(), r.k0_accel, 0.0);
    push("KV".into(), r.kv.value, 0.0);
    push("KH".into(), r.kh.value, 0.0);
    push("K_total".into(), r.k_total(), 0.0);
    for e in &r.e_truncated {
        push(format!("E_{}", e.order), e.value, e.std_error);
    }
    push("E_truncated".into(), r.energy(), r.sigma());
    push("E_plus_K".into(), r.energy() + r.k_total(), r.sigma());
}

fn qei_text(cfg: &RunConfig, r: &QeiReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "state-independent bound check");
    let _ = writeln!(s, "  worldline   {:?}", cfg.worldline);
    let _ = writeln!(s, "  state       {:?}", cfg.state);
    let _ = writeln!(s, "  K0          {:.6e}  (straight {:.6e}, acceleration {:.6e})", r.k0(), r.k0_straight, r.k0_accel);
    let _ = writeln!(s, "  KV          {:.6e}  (mu {:.4}, orders summed {})", r.kv.value, r.kv.mu, r.kv.orders_summed);
    let _ = writeln!(s, "  KH          {:.6e}  (mu {:.4}, orders summed {})", r.kh.value, r.kh.mu, r.kh.orders_summed);
    for e in &r.e_truncated {
        let _ = writeln!(s, "  E_{}         {:+.6e} +- {:.2e}{}", e.order, e.value, e.std_error, if e.flagged { "  [flagged]" } else { "" });
    }
    let _ = writeln!(s, "  E           {:+.6e} +- {:.2e}", r.energy(), r.sigma());
    let _ = writeln!(s, "  E + K       {:+.6e}", r.energy() + r.k_total());
    let _ = writeln!(s, "  verdict     {}", r.verdict.as_str());
    s
}

const QEI_COLUMNS: [&str; 4] = ["quantity", "value", "std_error", "status"];

fn qei_cmd(cfg: &RunConfig, threads: usize) -> Result<Outcome> {
    let r = qei_report(cfg, threads)?;
    let mut t = Table::new(&QEI_COLUMNS);
    qei_rows(&r, &mut t, &[]);
    let ok = r.verdict == crate::qei::Verdict::Satisfied;
    Ok(Outcome { tables: vec![("qei".into(), t)], report: Some(qei_text(cfg, &r)), ok })
}

const CONSERVATION_SIGMAS: f64 = 3.0;

fn conservation_cmd(cfg: &RunConfig, threads: usize) -> Result<Outcome> {
    let (params, state, f) = (cfg.params()?, cfg.state()?, cfg.test_function_2d()?);
    let mc = cfg.mc(threads)?;
    let comps = match cfg.conservation.as_ref().map(|c| c.component) {
        Some(ComponentCfg::U) => vec![Component::U],
        Some(ComponentCfg::V) => vec![Component::V],
        _ => vec![Component::U, Component::V],
    };
    let mut t = Table::new(&["component", "order", "value", "std_error", "status"]);
    let mut ok = true;
    for c in comps {
        let rep = conservation_check(&state, &params, &f, c, &mc)?;
        let name = if c == Component::U { "u" } else { "v" };
        for (order, e) in [("0", &rep.order0), ("1", &rep.order1)] {
            let pass = e.consistent_with_zero(CONSERVATION_SIGMAS);
            ok &= pass;
            t.push(vec![name.into(), order.into(), num(e.value), num(e.std_error), status(pass)]);
        }
    }
    Ok(Outcome { tables: vec![("conservation".into(), t)], report: None, ok })
}

fn with_value(cfg: &RunConfig, p: SweepParam, x: f64) -> Result<RunConfig> {
    let mut c = cfg.clone();
    match p {
        SweepParam::Eta => c.worldline = Some(WorldlineCfg::Boosted { eta: x }),
        SweepParam::A => c.worldline = Some(WorldlineCfg::Accelerated { a: x }),
        SweepParam::BetaSq => c.model = Some(super::config::ModelCfg { beta_sq: x }),
        SweepParam::G0 => {
            c.g.as_mut().ok_or_else(|| Error::Config("sweeping g0 needs a [g] block".into()))?.g0 = x;
        }
    }
    Ok(c)
}

/// Long-format table, one block of rows per swept value.
fn sweep_cmd(cfg: &RunConfig, threads: usize) -> Result<Outcome> {
    let sw = cfg.sweep.clone().ok_or_else(|| Error::Config("missing [sweep] block".into()))?;
    let mut cols = vec!["parameter", "param_value"];
    let inner: &[&'static str] = match sw.target {
        SweepTarget::K0 => &["quantity", "value", "std_error", "status"],
        SweepTarget::Energy => &ENERGY_COLUMNS,
        SweepTarget::Qei => &QEI_COLUMNS,
    };
    cols.extend_from_slice(inner);
    let mut t = Table::new(&cols);
    let mut ok = true;
    let mut report = String::new();
    for &x in &sw.values {
        let c = with_value(cfg, sw.parameter, x)?;
        let prefix = vec![sw.parameter.name().to_string(), num(x)];
        match sw.target {
            SweepTarget::K0 => {
                let (ks, ka) = k0(&c.worldline()?, &c.f()?)?;
                for (q, v) in [("K0_straight", ks), ("K0_accel", ka), ("K0_total", ks + ka)] {
                    let mut row = prefix.clone();
                    row.extend([q.to_string(), num(v), num(0.0), status(v.is_finite())]);
                    ok &= v.is_finite();
                    t.push(row);
                }
            }
            SweepTarget::Energy => ok &= energy_rows(&c, threads, &mut t, &prefix)?,
            SweepTarget::Qei => {
                let r = qei_report(&c, threads)?;
                ok &= r.verdict == crate::qei::Verdict::Satisfied;
                qei_rows(&r, &mut t, &prefix);
                let _ = writeln!(report, "[{} = {}]\n{}", sw.parameter.name(), x, qei_text(&c, &r));
            }
        }
    }
    let report = (!report.is_empty()).then_some(report);
    Ok(Outcome { tables: vec![("sweep".into(), t)], report, ok })
}
