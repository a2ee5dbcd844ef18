//! Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.
//! Run with `cargo test --release -p sgqei --test acceptance -- --nocapture --test-threads 1`.

use num_complex::Complex64;
use sgqei::geometry::{SpacetimePoint, Worldline};
use sgqei::propagators::{smeared_dalembert_feynman, Regulators};
use sgqei::qei::{
    decomposition_check, fit_factorial_majorant, h0_integral, k0, kv_majorant, qei_verify, vertex_growth, BoundOptions, Verdict,
};
use sgqei::series::{
    conservation_check, identity_sums, order_value, random_configuration, vanishing_sum, Component, McConfig, ModelParams,
    TimeWeight,
};
use sgqei::smearing::{AdiabaticCutoff, CompactTruncation, Plateau, SmearingFunction, TestFunction2D};
use sgqei::states::{conditional_positivity, massive_state_quadratic_form, zero_mean_ensemble, ComplexTestFunction, StateW};
use std::f64::consts::PI;

fn report(name: &str, pass: bool, detail: String) {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "{name}: {detail}");
}

fn unit_gaussian() -> SmearingFunction {
    SmearingFunction::gaussian(1.0)
}

fn thermal() -> StateW {
    StateW::thermal_window(0.5, 2.0, 1.0).unwrap()
}

fn params(g0: f64) -> ModelParams {
    ModelParams::new(PI, AdiabaticCutoff::gaussian(g0, 2.0, 2.0)).unwrap()
}

#[test]
fn c01_k0_closed_forms() {
    let f = unit_gaussian();
    let (s, a) = k0(&Worldline::static_line(), &f).unwrap();
    let want = 1.0 / (8.0 * PI.sqrt());
    let worst = (s + a - want).abs();
    let mut pass = worst <= 1e-8;
    let mut acc_err: f64 = 0.0;
    for acc in [0.5, 1.0, 2.0] {
        let (s, a) = k0(&Worldline::accelerated(acc).unwrap(), &f).unwrap();
        let want = PI.sqrt() * (3.0 + acc * acc) / (24.0 * PI);
        acc_err = acc_err.max((s + a - want).abs());
    }
    pass &= acc_err <= 1e-6;
    report("K0 closed forms", pass, format!("static |err| = {worst:.2e} (tol 1e-8), accelerated max |err| = {acc_err:.2e} (tol 1e-6)"));
}

#[test]
fn c02_boost_invariance() {
    let f = unit_gaussian();
    let vals: Vec<f64> = [0.0, 1.0, 2.0]
        .iter()
        .map(|&eta| {
            let (s, a) = k0(&Worldline::boosted(eta), &f).unwrap();
            s + a
        })
        .collect();
    let spread = vals.iter().fold(0.0f64, |m, v| m.max((v - vals[0]).abs()));
    report("boost invariance of K0", spread <= 1e-10, format!("max spread over eta in {{0,1,2}} = {spread:.2e} (tol 1e-10)"));
}

#[test]
fn c03_dual_pipeline_h0() {
    let mut worst: f64 = 0.0;
    let mut flagged = false;
    for n in [4.0, 6.0, 8.0] {
        let t = CompactTruncation::new(unit_gaussian(), n).unwrap();
        // flag threshold = the criterion's own relative tolerance
        let r = h0_integral(&t, 1e-6).unwrap();
        worst = worst.max(r.relative_gap());
        flagged |= r.flagged;
    }
    report("dual-pipeline h0", worst <= 1e-6 && !flagged, format!("max relative gap N in {{4,6,8}} = {worst:.2e} (tol 1e-6), flagged = {flagged}"));
}

#[test]
fn c04_identity_sums_exact() {
    let bad: Vec<usize> = (0..=32).filter(|&n| !identity_sums(n).unwrap().holds()).collect();
    report("exact collapse sums", bad.is_empty(), format!("n = 0..32 exact in big rationals, failures {bad:?}"));
}

#[test]
fn c05_vanishing_sum() {
    let r = Regulators::new(1e-3, 1.0).unwrap();
    let p = params(1.0);
    let (mut w1, mut w2): (f64, f64) = (0.0, 0.0);
    for s in [StateW::Vacuum, thermal()] {
        for i in 0..20 {
            let (xs, ys) = random_configuration(11, 1, i);
            let v = vanishing_sum(1, &xs, &ys, &r, &p, &s, false).unwrap();
            w1 = w1.max(v.value.norm());
            let (xs, ys) = random_configuration(11, 2, i);
            let v = vanishing_sum(2, &xs, &ys, &r, &p, &s, true).unwrap();
            w2 = w2.max(v.value.norm() / v.max_term);
        }
    }
    report(
        "vanishing-sum identity",
        w1 <= 1e-12 && w2 <= 1e-10,
        format!("n=1 max residual {w1:.2e} (tol 1e-12), n=2 max relative residual {w2:.2e} (tol 1e-10), 20 configurations x 2 states"),
    );
}

#[test]
fn c06_fundamental_solution() {
    let f = TestFunction2D::new(SmearingFunction::gaussian(1.0), SmearingFunction::gaussian(0.7));
    let ladder = [1e-2, 5e-3, 2.5e-3, 1.25e-3];
    let mut ratios = Vec::new();
    for x in [SpacetimePoint::new(0.2, -0.3), SpacetimePoint::new(-0.5, 0.4), SpacetimePoint::new(0.0, 1.1)] {
        let exact = f.eval(x);
        let errs: Vec<f64> = ladder
            .iter()
            .map(|&e| (smeared_dalembert_feynman(&f, x, &Regulators::new(e, 1.0).unwrap()).unwrap() - exact).abs())
            .collect();
        ratios.extend(errs.windows(2).map(|w| w[0] / w[1]));
    }
    let pass = ratios.iter().all(|r| (r - 2.0).abs() <= 0.3);
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(*r), b.max(*r)));
    report("fundamental solution", pass, format!("error ratios per halving in [{lo:.4}, {hi:.4}] (want 2.0 +- 0.3)"));
}

#[test]
fn c07_state_positivity() {
    let s = thermal();
    let ens = zero_mean_ensemble(100, 2024);
    let cond = conditional_positivity(&s, &ens, 2024).unwrap().min_quadratic_form;
    // Arbitrary (non-zero-mean) functions: a zero-mean member plus a positive Gaussian bump.
    let r = Regulators::new(0.05, 1.0).unwrap();
    let mut massive = f64::INFINITY;
    for (i, m) in zero_mean_ensemble(20, 77).into_iter().enumerate() {
        let mut terms = m.terms.clone();
        let c = 0.3 * i as f64 - 3.0;
        terms.push((Complex64::new(0.5, 0.0), TestFunction2D::new(SmearingFunction::gaussian(0.8).centered(c), SmearingFunction::gaussian(1.2))));
        let f = ComplexTestFunction::new(terms);
        for st in [StateW::Vacuum, s] {
            massive = massive.min(massive_state_quadratic_form(&st, 0.1, &r, &f).unwrap());
        }
    }
    report(
        "state positivity",
        cond >= -1e-10 && massive >= -1e-8,
        format!("conditional min {cond:.3e} over 100 (tol -1e-10), massive auxiliary min {massive:.3e} over 20 (tol -1e-8)"),
    );
}

#[test]
fn c08_mc_vs_oracle() {
    let p = params(1.0);
    let wl = Worldline::static_line();
    let w = TimeWeight::Squared(unit_gaussian());
    let cfg = McConfig { samples: 1_000_000, seed: 8, max_order: 1, ..McConfig::default() };
    let e = order_value(1, &StateW::Vacuum, &p, &wl, &w, &cfg).unwrap();
    let oracle = sgqei::series::mc::order_one_vacuum_oracle(&p, &wl, &w, cfg.mu).unwrap();
    let z = (e.value - oracle).abs() / e.std_error;
    let rel = e.std_error / e.value.abs();
    report(
        "MC vs quadrature oracle, order 1",
        z <= 3.0 && rel <= 0.05,
        format!("MC {:.6e} +- {:.2e}, oracle {oracle:.6e}, |z| = {z:.2} (tol 3), sigma/|value| = {rel:.2e} (tol 5e-2)", e.value, e.std_error),
    );
}

#[test]
fn c09_conservation() {
    let mut g = AdiabaticCutoff::gaussian(0.5, 1.5, 1.5);
    g.plateau = Some(Plateau { half_width: [2.0, 2.0], ramp: [1.0, 1.0] });
    let p = ModelParams::new(PI, g).unwrap();
    let f = TestFunction2D::new(SmearingFunction::bump(1.0).centered(0.3), SmearingFunction::bump(0.8));
    let cfg = McConfig { samples: 3000, seed: 9, ..McConfig::default() };
    let mut worst: f64 = 0.0;
    let mut pass = true;
    for s in [StateW::Vacuum, thermal()] {
        for c in [Component::U, Component::V] {
            let r = conservation_check(&s, &p, &f, c, &cfg).unwrap();
            for d in [&r.order0, &r.order1] {
                pass &= d.consistent_with_zero(3.0);
                if d.std_error > 0.0 {
                    worst = worst.max(d.value.abs() / d.std_error);
                } else if d.value != 0.0 {
                    worst = f64::INFINITY;
                }
            }
        }
    }
    report("conservation, orders 0-1", pass, format!("max |estimate|/sigma = {worst:.2} over 2 states x 2 components (tol 3)"));
}

#[test]
fn c10_decomposition_residual() {
    let p = params(1.0);
    let cfg = McConfig { samples: 4000, seed: 10, ..McConfig::default() };
    let w = TimeWeight::Squared(unit_gaussian());
    let mut pass = true;
    let mut detail = Vec::new();
    for s in [StateW::Vacuum, thermal()] {
        for n in 0..=2 {
            let r = decomposition_check(n, &s, &p, &Worldline::boosted(0.5), &w, &cfg).unwrap();
            pass &= r.consistent(3.0);
            if n == 2 {
                detail.push(format!("{:.2e} +- {:.2e}", r.residual, r.std_error));
            }
        }
    }
    report("decomposition residual", pass, format!("orders 0,1 exactly 0; order 2 residuals (vacuum, thermal) {}", detail.join(", ")));
}

#[test]
fn c11_factorial_decay() {
    let p = params(0.01);
    let wl = Worldline::static_line();
    let w = TimeWeight::Squared(unit_gaussian());
    let cfg = McConfig { samples: 4000, seed: 11, max_order: 3, ..McConfig::default() };
    let est: Vec<_> = (1..=3).map(|n| order_value(n, &StateW::Vacuum, &p, &wl, &w, &cfg).unwrap()).collect();
    let mu = kv_majorant(&p, &wl, &w, 3, &StateW::Vacuum, &BoundOptions::default()).unwrap().mu;
    let fit = fit_factorial_majorant(&est, vertex_growth(&p, mu), p.beta_sq).unwrap();
    let rows: Vec<String> = fit.rows.iter().map(|r| format!("n={}: {:.2e} <= {:.2e}", r.0, r.1, r.3 + 3.0 * r.2)).collect();
    report("factorial decay", fit.all_pass(), format!("C = {:.2e}, K = {:.2e}; {}", fit.c_hat, fit.k_hat, rows.join("; ")));
}

#[test]
fn c12_end_to_end_qei() {
    let f = unit_gaussian();
    let p = params(0.01);
    let cfg = McConfig { samples: 3000, seed: 12, max_order: 2, ..McConfig::default() };
    let mut pass = true;
    let mut cells = Vec::new();
    for (sname, s) in [("vacuum", StateW::Vacuum), ("thermal", thermal())] {
        for (wname, wl) in [("static", Worldline::static_line()), ("boosted", Worldline::boosted(1.0)), ("accelerated", Worldline::accelerated(1.0).unwrap())] {
            let r = qei_verify(&s, &wl, &f, &p, 2, &cfg, &BoundOptions::default()).unwrap();
            pass &= r.verdict == Verdict::Satisfied;
            cells.push(format!("{sname}/{wname}={}", r.verdict.as_str()));
        }
    }
    report("end-to-end QEI", pass, cells.join(", "));
}

fn run_cli(cfg: &std::path::Path, out: &std::path::Path, threads: usize) -> i32 {
    let args: Vec<String> = vec![
        "sgqei".into(),
        "--config".into(),
        cfg.display().to_string(),
        "--out".into(),
        out.display().to_string(),
        "--threads".into(),
        threads.to_string(),
    ];
    sgqei::cli::run(args)
}

const DETERMINISM_CONFIGS: [(&str, &str); 3] = [
    ("energy", "command = \"energy\"\n[worldline]\nkind = \"accelerated\"\na = 1.0\n[f]\nfamily = \"gaussian\"\nsigma = 1.0\n[g]\ng0 = 0.1\nsigma = [2.0, 2.0]\n[state]\nkind = \"thermal_window\"\ne0 = 0.5\ne1 = 2.0\nb = 1.0\n[mc]\nsamples = 300\nmax_order = 3\n"),
    ("identities", "command = \"identities\"\n[identities]\nconfigurations = 5\n"),
    ("k0", "command = \"k0\"\n[worldline]\nkind = \"boosted\"\neta = 1.0\n[f]\nfamily = \"bump\"\nradius = 1.5\n"),
];

#[test]
fn c13_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut pass = true;
    let mut checked = Vec::new();
    for (name, text) in DETERMINISM_CONFIGS {
        let cfg = dir.path().join(format!("{name}.toml"));
        std::fs::write(&cfg, text).unwrap();
        let (a, b) = (dir.path().join(format!("{name}-t1")), dir.path().join(format!("{name}-t4")));
        let (ca, cb) = (run_cli(&cfg, &a, 1), run_cli(&cfg, &b, 4));
        pass &= ca == cb && ca != 2;
        let fa = std::fs::read(a.join(format!("{name}.csv"))).unwrap();
        let fb = std::fs::read(b.join(format!("{name}.csv"))).unwrap();
        pass &= fa == fb;
        checked.push(format!("{name} ({} bytes, exit {ca})", fa.len()));
    }
    report("determinism across thread counts", pass, format!("--threads 1 vs 4 bit-identical: {}", checked.join(", ")));
}
