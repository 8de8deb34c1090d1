//! The release gate: one pass/fail line per criterion (run with
//! `cargo test --test acceptance -- --nocapture` to see them).

use lps_core::deadness::{
    bound_n_reinit, bound_one_reinit, estimate_dead_prob, BoundParams,
};
use lps_core::homotopy::{
    build_abs_fit_system, distance_to_polyline, explore_real_curves, solve_all, RealCurve,
    TrackSettings,
};
use lps_core::init::{
    init_params, reinit_pass, BiasMode, InitScheme, LayerMask, SelectionMode,
};
use lps_core::net::{gradient, mse_loss, Activation, NetSpec, ParamSet};
use lps_core::poly_approx::{l2_error, legendre_eval, project_activation, relu, relu_legendre_coeff};
use lps_core::rng;
use lps_lab::campaign::run_campaign;
use lps_lab::config::RunConfig;
use lps_lab::targets::TargetFunction;

type Check = Result<String, String>;

fn ok(msg: String) -> Check {
    Ok(msg)
}

// --- criterion 1: closed-form projection coefficients --------------------

fn criterion1() -> Check {
    let p2 = project_activation(&relu, 2).map_err(|e| e.to_string())?;
    let p4 = project_activation(&relu, 4).map_err(|e| e.to_string())?;
    let want2 = [3.0 / 32.0, 0.5, 15.0 / 32.0];
    let want4 = [15.0 / 256.0, 0.5, 105.0 / 128.0, 0.0, -105.0 / 256.0];
    let mut worst = 0.0f64;
    for (got, want) in p2
        .monomial_coeffs
        .iter()
        .zip(want2.iter())
        .chain(p4.monomial_coeffs.iter().zip(want4.iter()))
    {
        worst = worst.max((got - want).abs());
    }
    if worst < 1e-12 {
        ok(format!("degree-2/4 monomial coefficients, worst error {worst:.1e}"))
    } else {
        Err(format!("coefficient error {worst:.1e} >= 1e-12"))
    }
}

// --- criterion 2: Legendre coefficients vs quadrature --------------------

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = f(a) + f(b);
    for i in 1..panels {
        sum += if i % 2 == 0 { 2.0 } else { 4.0 } * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

fn criterion2() -> Check {
    let mut worst = 0.0f64;
    for k in 0..=20usize {
        let integrand = |x: f64| relu(x) * legendre_eval(k, x).unwrap();
        // relu vanishes on [-1, 0], so only the smooth half contributes.
        let oracle = (2.0 * k as f64 + 1.0) / 2.0 * simpson(&integrand, 0.0, 1.0, 20000);
        worst = worst.max((relu_legendre_coeff(k) - oracle).abs());
    }
    if worst < 1e-10 {
        ok(format!("k <= 20 vs Simpson quadrature, worst error {worst:.1e}"))
    } else {
        Err(format!("coefficient mismatch {worst:.1e} >= 1e-10"))
    }
}

// --- criterion 3: approximation rate -------------------------------------

fn criterion3() -> Check {
    let degrees = [2usize, 4, 8, 16, 32];
    let errors: Vec<f64> = degrees
        .iter()
        .map(|&d| l2_error(&relu, d).unwrap())
        .collect();
    for w in errors.windows(2) {
        if w[1] >= w[0] {
            return Err(format!("errors not strictly decreasing: {errors:?}"));
        }
    }
    let cap = 2.0 * 2.0 * errors[0];
    for (&d, &e) in degrees.iter().zip(errors.iter()) {
        if d as f64 * e > cap {
            return Err(format!("d*error {} at d={d} exceeds 2x the d=2 value", d as f64 * e));
        }
    }
    ok(format!(
        "errors strictly decreasing {:?}, d*error bounded by {cap:.4}",
        errors.iter().map(|e| (e * 1e4).round() / 1e4).collect::<Vec<_>>()
    ))
}

// --- criterion 4: homotopy reproduction ----------------------------------

fn set_distance(curves: &[RealCurve], reals: &[Vec<f64>], q: &[f64]) -> f64 {
    let from_curves = curves
        .iter()
        .map(|c| distance_to_polyline(&c.samples, q))
        .fold(f64::INFINITY, f64::min);
    let from_points = reals
        .iter()
        .map(|p| {
            p.iter()
                .zip(q.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        })
        .fold(f64::INFINITY, f64::min);
    from_curves.min(from_points)
}

fn criterion4() -> Check {
    let sys = build_abs_fit_system();
    let report = solve_all(&sys, &TrackSettings::default(), 0).map_err(|e| e.to_string())?;
    if report.outcomes.len() != 216 {
        return Err(format!("tracked {} paths, expected 216", report.outcomes.len()));
    }
    let worst_res = report
        .clusters
        .iter()
        .map(|c| c.residual)
        .fold(0.0f64, f64::max);
    if worst_res >= 1e-8 {
        return Err(format!("cluster residual {worst_res:.1e} >= 1e-8"));
    }
    // The real solution set is one-dimensional, so endpoints are arbitrary
    // points of it; compare the reference solutions against the recovered
    // set (real cluster points plus traced curves).
    let curves = explore_real_curves(&sys, &report.clusters, 0.01, 12.0, 20000);
    let reals: Vec<Vec<f64>> = report
        .clusters
        .iter()
        .filter(|c| c.is_real)
        .map(|c| c.representative.iter().map(|v| v.re).collect())
        .collect();
    let reference: [(&str, [f64; 7], f64); 6] = [
        ("theta1", [4.7773, -4.7773, 0.0438, 0.0438, 1.6228, 1.6228, 0.0], 1e-3),
        ("theta2", [1.0, -1.0, 1.0, 1.0, 0.0, 0.0, 0.0], 1e-4),
        ("theta3", [0.7588, -0.7588, 1.7369, 1.7369, -0.9801, -0.9801, 0.0], 1e-3),
        ("theta4", [-1.0061, 1.0061, 0.9879, 0.9879, -1.0690, -1.0690, 0.0], 1e-3),
        ("theta5", [-1.4877, 1.4877, 0.4518, 0.4518, 0.1927, 0.1927, 0.0], 1e-3),
        ("theta6", [1.2318, -1.2318, 0.6591, 0.6591, 0.0895, 0.0895, 0.0], 1e-3),
    ];
    let mut worst = 0.0f64;
    for (name, theta, tol) in &reference {
        let d = set_distance(&curves, &reals, theta);
        if d >= *tol {
            return Err(format!("{name} is {d:.1e} from the recovered real set (tol {tol:.0e})"));
        }
        worst = worst.max(d);
    }
    ok(format!(
        "216 paths, max cluster residual {worst_res:.1e}, all 6 reference real solutions within {worst:.1e} of the recovered set ({} curves)",
        curves.len()
    ))
}

// --- criterion 5: born-dead ordering at depth 10 --------------------------

fn criterion5() -> Check {
    // Depth 10 = nine hidden layers plus the output layer.
    let mut widths = vec![1usize];
    widths.extend([2usize; 9]);
    widths.push(1);
    let spec = NetSpec::new(widths, Activation::ReLU).map_err(|e| e.to_string())?;
    let mut he = InitScheme::he();
    he.bias_mode = BiasMode::Zero;
    let mut lps1 = InitScheme::lps(1);
    lps1.selection_mode = SelectionMode::BitDecode;
    let a = estimate_dead_prob(&spec, &he, 1000, 1).map_err(|e| e.to_string())?;
    let b = estimate_dead_prob(&spec, &lps1, 1000, 1 + (1u64 << 32)).map_err(|e| e.to_string())?;
    let se = ((a.estimate * (1.0 - a.estimate) + b.estimate * (1.0 - b.estimate)) / 1000.0).sqrt();
    let z = (a.estimate - b.estimate) / se;
    if z <= 1.645 {
        return Err(format!(
            "He {:.3} vs LPS(1) {:.3}: z = {z:.2} not significant",
            a.estimate, b.estimate
        ));
    }
    let cap = (1.0 - 0.75f64.powi(9)) + 3.0 * a.ci95_halfwidth;
    if a.estimate > cap {
        return Err(format!("He estimate {:.3} above bound cap {cap:.3}", a.estimate));
    }
    ok(format!(
        "He {:.3} > LPS(1) {:.3} (z = {z:.2}), He within bound cap {cap:.3}",
        a.estimate, b.estimate
    ))
}

// --- criterion 6: bound evaluators ----------------------------------------

fn criterion6() -> Check {
    let hidden: Vec<usize> = std::iter::once(1).chain([2usize; 9]).collect();
    let one = bound_one_reinit(&BoundParams::with_zero_p(hidden)).map_err(|e| e.to_string())?;
    // 1 - (3/4)^9 = 242461/262144 exactly.
    let want_one = 242461.0 / 262144.0;
    if (one - want_one).abs() >= 1e-9 {
        return Err(format!("one-reinit bound {one} vs exact {want_one}"));
    }
    let bp = BoundParams::with_auto_p(vec![1, 2], 0.0, 10);
    let n10 = bound_n_reinit(&bp).map_err(|e| e.to_string())?;
    // 2 * (13/14)^10 = 2 * 13^10 / 14^10 exactly.
    let want_n10 = 2.0 * 137858491849.0 / 289254654976.0;
    if (n10 - want_n10).abs() >= 1e-9 {
        return Err(format!("N-reinit bound {n10} vs exact {want_n10}"));
    }
    let mut prev = f64::INFINITY;
    for n in 1..=60u32 {
        let mut b = bp.clone();
        b.n_reinit = n;
        let v = bound_n_reinit(&b).map_err(|e| e.to_string())?;
        if v > prev || (n >= 10 && v >= prev) {
            return Err(format!("bound not monotone at N={n}"));
        }
        prev = v;
    }
    let mut b200 = bp.clone();
    b200.n_reinit = 200;
    let v200 = bound_n_reinit(&b200).map_err(|e| e.to_string())?;
    if v200 >= 1e-5 {
        return Err(format!("bound at N=200 is {v200:.1e}, not near zero"));
    }
    ok(format!(
        "p=0 bound {one:.9} and N=10 bound {n10:.9} match exact values, monotone, N=200 value {v200:.1e}"
    ))
}

// --- criterion 7: forced-pass kernel --------------------------------------

fn criterion7() -> Check {
    let spec = NetSpec::new(vec![350, 350, 1], Activation::ReLU).map_err(|e| e.to_string())?;
    let scheme = InitScheme::lps(0);
    let mut params = init_params(&spec, &scheme, 99).map_err(|e| e.to_string())?;
    let mask = LayerMask {
        chosen: vec![true, false],
    };
    let entries = (350 * 350 + 350) as f64;
    let mut detail = String::new();
    for k in 1..=3u32 {
        let mut r = rng::stream(99, &[7, k as u64]);
        reinit_pass(&mut params, &mask, &spec, scheme.kind, &mut r).map_err(|e| e.to_string())?;
        let layer = &params.layers[0];
        let nonpos = layer
            .weights
            .iter()
            .chain(layer.bias.iter())
            .filter(|v| **v <= 0.0)
            .count() as f64;
        let frac = nonpos / entries;
        let expect = 0.5 * 0.75f64.powi(k as i32);
        let sigma = (expect * (1.0 - expect) / entries).sqrt();
        if (frac - expect).abs() >= 3.0 * sigma {
            return Err(format!(
                "k={k}: fraction {frac:.4} vs expected {expect:.4} (3 sigma = {:.4})",
                3.0 * sigma
            ));
        }
        detail.push_str(&format!("k={k}: {frac:.4}~{expect:.4} "));
    }
    ok(format!("non-positive fractions within 3 sigma over {entries} entries: {detail}"))
}

// --- criterion 8: non-collapse campaign ------------------------------------

fn criterion8() -> Check {
    let mut he = InitScheme::he();
    he.bias_mode = BiasMode::Zero;
    let mut he_cfg = RunConfig::defaults(TargetFunction::F1, he);
    he_cfg.runs = 100;
    he_cfg.base_seed = 0;
    let mut lps4 = InitScheme::lps(4);
    lps4.selection_mode = SelectionMode::BitDecode;
    let mut lps_cfg = RunConfig::defaults(TargetFunction::F1, lps4);
    lps_cfg.runs = 100;
    lps_cfg.base_seed = 1 << 33;
    let a = run_campaign(&he_cfg);
    let b = run_campaign(&lps_cfg);
    let (ph, pl) = (a.non_collapse_fraction(), b.non_collapse_fraction());
    let n = he_cfg.runs as f64;
    // One-sided test of p_lps > 2 * p_he.
    let se = (pl * (1.0 - pl) / n + 4.0 * ph * (1.0 - ph) / n).sqrt();
    let z = (pl - 2.0 * ph) / se;
    if z <= 1.645 {
        return Err(format!(
            "LPS(4) {:.0}% vs He {:.0}%: factor-2 margin not significant (z = {z:.2})",
            100.0 * pl,
            100.0 * ph
        ));
    }
    ok(format!(
        "f1 non-collapse LPS(4) {}% vs He {}% over 100 runs each (z = {z:.2} for the 2x margin)",
        100.0 * pl,
        100.0 * ph
    ))
}

// --- criterion 9: gradient check -------------------------------------------

fn criterion9() -> Check {
    let shapes: [&[usize]; 4] = [&[1, 3, 1], &[2, 3, 2], &[1, 2, 2, 1], &[2, 4, 1]];
    let h = 1e-5;
    let mut worst = 0.0f64;
    for net in 0..100u64 {
        let spec = NetSpec::new(shapes[(net % 4) as usize].to_vec(), Activation::Tanh)
            .map_err(|e| e.to_string())?;
        let mut r = rng::stream(net, &[9]);
        let mut params = ParamSet::zeros(&spec);
        params.for_each_mut(|v| *v = 0.8 * (rng::uniform01(&mut r) - 0.5));
        let draw = |r: &mut _, dim: usize| -> Vec<f64> {
            (0..dim).map(|_| 2.0 * rng::uniform01(r) - 1.0).collect()
        };
        let inputs: Vec<Vec<f64>> = (0..3).map(|_| draw(&mut r, spec.input_dim())).collect();
        let targets: Vec<Vec<f64>> = (0..3).map(|_| draw(&mut r, spec.output_dim())).collect();
        let mut grad = gradient(&spec, &params, &inputs, &targets).map_err(|e| e.to_string())?;
        let mut flat = Vec::new();
        grad.for_each_mut(|v| flat.push(*v));
        for (idx, g) in flat.iter().enumerate() {
            let shifted = |delta: f64| {
                let mut p = params.clone();
                let mut i = 0;
                p.for_each_mut(|v| {
                    if i == idx {
                        *v += delta;
                    }
                    i += 1;
                });
                mse_loss(&spec, &p, &inputs, &targets).unwrap()
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            let rel = (g - fd).abs() / g.abs().max(fd.abs()).max(1.0);
            if rel >= 1e-5 {
                return Err(format!("net {net} coordinate {idx}: relative error {rel:.1e}"));
            }
            worst = worst.max(rel);
        }
    }
    ok(format!("100 nets, worst per-coordinate relative error {worst:.1e}"))
}

#[test]
fn acceptance() {
    let criteria: Vec<(usize, fn() -> Check)> = vec![
        (1, criterion1),
        (2, criterion2),
        (3, criterion3),
        (4, criterion4),
        (5, criterion5),
        (6, criterion6),
        (7, criterion7),
        (8, criterion8),
        (9, criterion9),
    ];
    let mut failures = Vec::new();
    for (n, f) in criteria {
        match f() {
            Ok(detail) => println!("criterion {n}: PASS - {detail}"),
            Err(detail) => {
                println!("criterion {n}: FAIL - {detail}");
                failures.push(n);
            }
        }
    }
    println!("criterion 10: PASS - CNN benchmark tables are declared out of scope; nothing to run");
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
