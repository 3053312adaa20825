//! Acceptance criteria. Each test prints one `criterion N: PASS|FAIL` line.

use std::f64::consts::{FRAC_PI_4, SQRT_2, TAU};

use cvtp::average::{
    avg_fidelity_circle, avg_fidelity_circle_sym, avg_fidelity_disk_sym, avg_fidelity_gaussian,
    avg_fidelity_imag, avg_fidelity_real,
};
use cvtp::optimize::{
    maximize_one_param, maximize_three_param, optimal_g_circle, optimal_g_gaussian_centered,
    optimal_gu_imag, optimal_gv_real, Objective, OptimizationResult,
};
use cvtp::oracle::{oracle_state_fidelity, tier2_average};
use cvtp::{
    original_cvtp_fidelity, state_fidelity, ChannelSqueezing, CoherentAmplitude, InputDistribution,
    ProtocolSettings,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sq(r: f64) -> ChannelSqueezing {
    ChannelSqueezing::new(r).unwrap()
}

fn settings(theta: f64, g_u: f64, g_v: f64) -> ProtocolSettings {
    ProtocolSettings::new(theta, g_u, g_v).unwrap()
}

fn optimum(family: InputDistribution, r: f64) -> OptimizationResult {
    maximize_three_param(&family, sq(r), Objective::ClosedForm).unwrap()
}

/// Prints the verdict line and fails the test on any recorded failure.
fn report(id: &str, title: &str, summary: String, failures: Vec<String>) {
    let verdict = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!("criterion {id}: {verdict} - {title} ({summary})");
    for f in failures.iter().take(10) {
        println!("    {f}");
    }
    assert!(
        failures.is_empty(),
        "criterion {id} failed: {} violation(s)",
        failures.len()
    );
}

fn central_diff(mut f: impl FnMut(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

#[test]
fn criterion_01_original_protocol_fidelity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for k in 0..=8 {
        let r = 0.25 * k as f64;
        let want = 1.0 / (1.0 + (-2.0 * r).exp());
        for _ in 0..100 {
            let alpha = CoherentAmplitude::from_polar(
                10.0 * rng.gen::<f64>().sqrt(),
                rng.gen_range(0.0..TAU),
            );
            let got = state_fidelity(alpha, sq(r), &ProtocolSettings::original());
            let err = (got - want).abs();
            worst = worst.max(err);
            if err > 1e-12 {
                failures.push(format!("r = {r}, alpha = {alpha:?}: {got} vs {want}"));
            }
        }
    }
    report(
        "1",
        "original-protocol fidelity",
        format!("max deviation {worst:.2e}"),
        failures,
    );
}

#[test]
fn criterion_02_tier1_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let r = sq(rng.gen_range(0.0..=1.5));
        let alpha =
            CoherentAmplitude::from_polar(3.0 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..TAU));
        let s = settings(
            rng.gen_range(0.1..1.47),
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.0..3.0),
        );
        match oracle_state_fidelity(alpha, r, &s) {
            Ok(v) => {
                let err = (v - state_fidelity(alpha, r, &s)).abs();
                worst = worst.max(err);
                if err > 1e-6 {
                    failures.push(format!("{r:?} {alpha:?} {s:?}: deviation {err:.3e}"));
                }
            }
            Err(e) => failures.push(format!("{r:?} {alpha:?} {s:?}: {e}")),
        }
    }
    report(
        "2",
        "tier-1 oracle equivalence",
        format!("max deviation {worst:.2e}"),
        failures,
    );
}

#[test]
fn criterion_03_tier2_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    let mut check = |name: &str,
                     closed: f64,
                     family: InputDistribution,
                     r: ChannelSqueezing,
                     s: ProtocolSettings| {
        match tier2_average(&family, r, &s) {
            Ok(q) => {
                let rel = (closed - q.value).abs() / q.value.abs();
                worst = worst.max(rel);
                if rel > 1e-8 {
                    failures.push(format!(
                        "{name} {family:?} {r:?} {s:?}: relative error {rel:.3e}"
                    ));
                }
            }
            Err(e) => failures.push(format!("{name} {family:?}: {e}")),
        }
    };
    for _ in 0..50 {
        let r = sq(rng.gen_range(0.0..2.0));
        let radius = rng.gen_range(0.1..5.0);
        let s = settings(
            rng.gen_range(0.1..1.47),
            rng.gen_range(0.0..3.0),
            rng.gen_range(0.0..3.0),
        );
        let g = rng.gen_range(0.0..3.0);
        let lambda = rng.gen_range(0.05..10.0);
        let beta = CoherentAmplitude::from_polar(3.0 * rng.gen::<f64>(), rng.gen_range(0.0..TAU));

        let fam = InputDistribution::real_line(radius).unwrap();
        check("real", avg_fidelity_real(r, radius, &s).unwrap(), fam, r, s);
        let fam = InputDistribution::imag_line(radius).unwrap();
        check("imag", avg_fidelity_imag(r, radius, &s).unwrap(), fam, r, s);
        let fam = InputDistribution::circumference(radius).unwrap();
        check(
            "circle",
            avg_fidelity_circle(r, radius, &s).unwrap(),
            fam,
            r,
            s,
        );
        let fam = InputDistribution::disk(radius).unwrap();
        check(
            "disk",
            avg_fidelity_disk_sym(r, radius, g).unwrap(),
            fam,
            r,
            ProtocolSettings::symmetric(g),
        );
        let fam = InputDistribution::gaussian(lambda, beta).unwrap();
        check(
            "gaussian",
            avg_fidelity_gaussian(r, lambda, beta, &s).unwrap(),
            fam,
            r,
            s,
        );
    }
    report(
        "3",
        "tier-2 oracle equivalence",
        format!("max relative error {worst:.2e}"),
        failures,
    );
}

#[test]
fn criterion_04_closed_form_sub_solvers() {
    let mut failures = Vec::new();
    let mut worst_grad: f64 = 0.0;
    let mut worst_param: f64 = 0.0;
    let mut worst_value: f64 = 0.0;
    let h = 1e-5;
    let mut note = |what: String, grad: f64, param: f64, value: f64, failures: &mut Vec<String>| {
        worst_grad = worst_grad.max(grad);
        worst_param = worst_param.max(param);
        worst_value = worst_value.max(value);
        if grad > 1e-6 || param > 1e-4 || value > 1e-8 {
            failures.push(format!(
                "{what}: gradient {grad:.2e}, parameter {param:.2e}, fidelity {value:.2e}"
            ));
        }
    };
    for r in [0.1, 0.5, 1.0, 1.5] {
        for radius in [0.5, 1.0, 2.0] {
            // Real line: closed-form g_v at the optimizer's θ.
            let fam = InputDistribution::real_line(radius).unwrap();
            let res = optimum(fam, r);
            let s = res.settings;
            let gv = optimal_gv_real(s.theta, sq(r));
            let f =
                |g: f64| avg_fidelity_real(sq(r), radius, &settings(s.theta, s.g_u, g)).unwrap();
            let grad = central_diff(f, gv, h).abs();
            note(
                format!("real r={r} R={radius}"),
                grad,
                (gv - s.g_v).abs(),
                (f(gv) - res.value).abs(),
                &mut failures,
            );

            // Imaginary line: closed-form g_u.
            let fam = InputDistribution::imag_line(radius).unwrap();
            let res = optimum(fam, r);
            let s = res.settings;
            let gu = optimal_gu_imag(s.theta, sq(r));
            let f =
                |g: f64| avg_fidelity_imag(sq(r), radius, &settings(s.theta, g, s.g_v)).unwrap();
            let grad = central_diff(f, gu, h).abs();
            note(
                format!("imag r={r} R={radius}"),
                grad,
                (gu - s.g_u).abs(),
                (f(gu) - res.value).abs(),
                &mut failures,
            );

            // Circle: the cubic's root.
            let fam = InputDistribution::circumference(radius).unwrap();
            let res = optimum(fam, r);
            let g = optimal_g_circle(sq(r), radius).unwrap();
            let grad = central_diff(
                |x| avg_fidelity_circle_sym(sq(r), radius, x).unwrap(),
                g.g,
                h,
            )
            .abs();
            let s = res.settings;
            let param = (s.theta - FRAC_PI_4)
                .abs()
                .max((s.g_u - g.g).abs())
                .max((s.g_v - g.g).abs());
            note(
                format!("circle r={r} R={radius}"),
                grad,
                param,
                (g.fidelity - res.value).abs(),
                &mut failures,
            );
        }
        for lambda in [0.5, 1.0, 2.0] {
            let fam = InputDistribution::gaussian(lambda, CoherentAmplitude::ZERO).unwrap();
            let res = optimum(fam, r);
            let g = optimal_g_gaussian_centered(sq(r), lambda).unwrap();
            let f = |x: f64| {
                avg_fidelity_gaussian(
                    sq(r),
                    lambda,
                    CoherentAmplitude::ZERO,
                    &ProtocolSettings::symmetric(x),
                )
                .unwrap()
            };
            let grad = central_diff(f, g, h).abs();
            let s = res.settings;
            let param = (s.theta - FRAC_PI_4)
                .abs()
                .max((s.g_u - g).abs())
                .max((s.g_v - g).abs());
            note(
                format!("gaussian r={r} lambda={lambda}"),
                grad,
                param,
                (f(g) - res.value).abs(),
                &mut failures,
            );
        }
    }
    report(
        "4",
        "closed-form sub-solvers",
        format!("max gradient {worst_grad:.2e}, parameter gap {worst_param:.2e}, fidelity gap {worst_value:.2e}"),
        failures,
    );
}

#[test]
fn criterion_05_zero_radius_circle() {
    let mut failures = Vec::new();
    for r in [0.0f64, 0.5, 1.0, 2.0] {
        let g = optimal_g_circle(sq(r), 0.0).unwrap();
        let res = optimum(InputDistribution::circumference(0.0).unwrap(), r);
        if (g.g - SQRT_2 * r.tanh()).abs() > 1e-8 {
            failures.push(format!("r = {r}: g = {} vs {}", g.g, SQRT_2 * r.tanh()));
        }
        for (what, v) in [("cubic", g.fidelity), ("optimizer", res.value)] {
            if (v - 1.0).abs() > 1e-10 {
                failures.push(format!("r = {r}: {what} fidelity {v}"));
            }
        }
    }
    report(
        "5",
        "zero-radius circumference",
        "r in {0, 0.5, 1, 2}".into(),
        failures,
    );
}

#[test]
fn criterion_06_broad_gaussian_recovers_original() {
    let mut failures = Vec::new();
    let lambda = 1e-6;
    let mut worst: f64 = 0.0;
    for k in 0..=20 {
        let r = 0.1 * k as f64;
        let g = optimal_g_gaussian_centered(sq(r), lambda).unwrap();
        let f = avg_fidelity_gaussian(
            sq(r),
            lambda,
            CoherentAmplitude::ZERO,
            &ProtocolSettings::symmetric(g),
        )
        .unwrap();
        let orig = original_cvtp_fidelity(sq(r));
        worst = worst.max((f - orig).abs());
        if (g - SQRT_2).abs() > 1e-4 {
            failures.push(format!("r = {r}: g = {g}"));
        }
        if (f - orig).abs() > 1e-4 {
            failures.push(format!("r = {r}: fidelity {f} vs {orig}"));
        }
    }
    report(
        "6",
        "broad Gaussian recovers the original protocol",
        format!("max gap {worst:.2e}"),
        failures,
    );
}

#[test]
fn criterion_07_dominance_and_ordering() {
    let mut failures = Vec::new();
    let radii = [0.5, 1.0, 2.0, 5.0];
    let mut best_one_gap: f64 = 0.0;
    let mut best_orig_gap: f64 = 0.0;
    for k in 0..=20 {
        let r = 0.1 * k as f64;
        let results: Vec<OptimizationResult> = radii
            .iter()
            .map(|&radius| optimum(InputDistribution::real_line(radius).unwrap(), r))
            .collect();
        for (w, pair) in results.windows(2).enumerate() {
            if pair[0].value < pair[1].value {
                failures.push(format!(
                    "r = {r}: F(R={}) < F(R={})",
                    radii[w],
                    radii[w + 1]
                ));
            }
        }
        let at5 = results.last().unwrap();
        if !at5.dominance_holds(0.0) {
            failures.push(format!("r = {r}: dominance chain broken at R = 5: {at5:?}"));
        }
        if r > 0.0 && r < 0.5 {
            best_one_gap = best_one_gap.max(at5.value - at5.baseline_one_param);
            best_orig_gap = best_orig_gap.max(at5.baseline_one_param - at5.baseline_original);
        }
    }
    if best_one_gap <= 1e-3 {
        failures.push(format!(
            "three-parameter gap over one-parameter only {best_one_gap:.2e}"
        ));
    }
    if best_orig_gap <= 1e-3 {
        failures.push(format!(
            "one-parameter gap over original only {best_orig_gap:.2e}"
        ));
    }
    report(
        "7",
        "dominance and ordering on the real line",
        format!("largest gaps in (0, 0.5): three-vs-one {best_one_gap:.3e}, one-vs-original {best_orig_gap:.3e}"),
        failures,
    );
}

#[test]
fn criterion_08_symmetric_families_collapse() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut failures = Vec::new();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let r = rng.gen_range(0.0..2.0);
        let radius = rng.gen_range(0.1..5.0);
        let lambda = rng.gen_range(0.05..10.0);
        for fam in [
            InputDistribution::circumference(radius).unwrap(),
            InputDistribution::disk(radius).unwrap(),
            InputDistribution::gaussian(lambda, CoherentAmplitude::ZERO).unwrap(),
        ] {
            let s = optimum(fam, r).settings;
            let dev = (s.theta - FRAC_PI_4).abs().max((s.g_u - s.g_v).abs());
            worst = worst.max(dev);
            if dev > 1e-4 {
                failures.push(format!("{fam:?}, r = {r}: {s:?}"));
            }
        }
    }
    report(
        "8",
        "symmetric distributions collapse to one parameter",
        format!("max deviation {worst:.2e}"),
        failures,
    );
}

#[test]
fn criterion_09_broken_symmetry() {
    let mut failures = Vec::new();
    let r = 0.2;
    let at = |deg: f64| {
        let beta = CoherentAmplitude::from_polar(1.5, deg.to_radians());
        optimum(InputDistribution::gaussian(2.0, beta).unwrap(), r).settings
    };
    let mut worst_sym: f64 = 0.0;
    for deg in [45.0, 135.0, 225.0, 315.0] {
        let s = at(deg);
        let dev = (s.theta - FRAC_PI_4).abs().max((s.g_u - s.g_v).abs());
        worst_sym = worst_sym.max(dev);
        if dev > 1e-3 {
            failures.push(format!("arg {deg} deg: {s:?}"));
        }
    }
    let mut least_break = f64::INFINITY;
    for deg in [0.0, 90.0] {
        let s = at(deg);
        let dev = (s.theta - FRAC_PI_4).abs();
        least_break = least_break.min(dev);
        if dev <= 1e-2 {
            failures.push(format!(
                "arg {deg} deg: theta {} too close to pi/4",
                s.theta
            ));
        }
    }
    report(
        "9",
        "broken symmetry for displaced Gaussians",
        format!("diagonal deviation {worst_sym:.2e}, axis theta offset {least_break:.3}"),
        failures,
    );
}

#[test]
fn criterion_10_displaced_gaussian_asymptote() {
    let mut failures = Vec::new();
    let r = 0.2;
    let gap = |deg: f64| {
        let beta = CoherentAmplitude::from_polar(10.0, deg.to_radians());
        let res = optimum(InputDistribution::gaussian(2.0, beta).unwrap(), r);
        res.value - res.baseline_original
    };
    let axis = gap(0.0);
    let diagonal = gap(30.0);
    if axis < 0.01 {
        failures.push(format!("arg 0: gap {axis:.4e} < 0.01"));
    }
    if diagonal > 2e-3 {
        failures.push(format!("arg 30 deg: gap {diagonal:.4e} > 2e-3"));
    }
    report(
        "10",
        "displaced-Gaussian asymptote",
        format!("|beta| = 10 gaps over original: arg 0 {axis:.4e}, arg 30 deg {diagonal:.4e}"),
        failures,
    );
}

#[test]
fn criterion_11_disk_beats_circumference() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut failures = Vec::new();
    let mut smallest = f64::INFINITY;
    for _ in 0..20 {
        let r = rng.gen_range(0.0..2.0);
        let radius = rng.gen_range(0.1..5.0);
        let disk = maximize_one_param(
            &InputDistribution::disk(radius).unwrap(),
            sq(r),
            Objective::ClosedForm,
        )
        .unwrap();
        let circle = optimal_g_circle(sq(r), radius).unwrap();
        smallest = smallest.min(disk.value - circle.fidelity);
        if disk.value < circle.fidelity {
            failures.push(format!(
                "r = {r}, R = {radius}: disk {} < circle {}",
                disk.value, circle.fidelity
            ));
        }
    }
    report(
        "11",
        "disk outperforms circumference",
        format!("smallest margin {smallest:.3e}"),
        failures,
    );
}
