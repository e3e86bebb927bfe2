//! End-to-end checks of the headline results. Prints one PASS/FAIL line
//! per criterion and exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use vkerr_core::linfluct::{diffusion_at, drift, drift_jacobian, jacobian_at, phase_point, FrequencyGrid, SpectralPoint};
use vkerr_core::params::mirror;
use vkerr_core::sdesim::{noise_factor, simulate_spectra, SimConfig};
use vkerr_core::squeeze::{
    analytic_bifurcation_q, beta_of, fold_denominator, minimize_over_frequency, optimal_frequency, optimal_quadrature,
    pol_denominator, quad_spectrum, Mode,
};
use vkerr_core::steady::{
    all_states, approach, bimode_states, bistability_range, polarization_threshold, singlemode_pump_e2,
    singlemode_state, vacuum, wrap_angle, Bifurcation,
};
use vkerr_core::stokes::{
    bifurcation_stokes, classify_polarization, pump_scan, search_grid, stokes_means, stokes_variance_spectra, summarize,
};
use vkerr_core::{ModelParams, C64};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn sqrt3() -> f64 {
    3f64.sqrt()
}

/// Lower-fold optimum at the cusp, from the closed form and from the
/// matrix pipeline.
fn criterion_1() -> Check {
    let m = ModelParams::liquid(sqrt3(), 0.0);
    let i = 2.0 / sqrt3();
    let w = 1.0 / sqrt3();
    let q = analytic_bifurcation_q(i, &m, Mode::Orthogonal, PI, w).map_err(err)?;
    let s = approach(&m, Bifurcation::LowerFold, 1e-6).map_err(err)?;
    let mm = m.with_pump_e2(s.pump_e2);
    let qp = quad_spectrum(&s, &mm, Mode::Orthogonal, beta_of(&s, PI), w).map_err(err)?.normal_ordered;
    let msg = format!("closed form {q:.12}, pipeline at offset 1e-6 {qp:.6}");
    ensure((q + 0.75).abs() < 1e-9, format!("closed form off: {msg}"))?;
    ensure((qp + 0.75).abs() < 1e-3, format!("pipeline off by {:.2e}: {msg}", (qp + 0.75).abs()))?;
    Ok(msg)
}

fn upper_fold_optimum(delta: f64) -> Result<(f64, f64), String> {
    let m = ModelParams::liquid(delta, 0.0);
    let i = bistability_range(&m).ok_or("no bistability")?.i_plus;
    let o = minimize_over_frequency(
        |w| analytic_bifurcation_q(i, &m, Mode::Orthogonal, PI, w),
        10.0 + 5.0 * delta.abs(),
    )
    .map_err(err)?;
    Ok((o.q_min, o.omega))
}

fn criterion_2() -> Check {
    let (q100, _) = upper_fold_optimum(100.0)?;
    let (q3, _) = upper_fold_optimum(sqrt3())?;
    let m = ModelParams::liquid(100.0, 0.0);
    // Informational: the pipeline converges like √ε towards the fold.
    let s = approach(&m, Bifurcation::UpperFold, 1e-8).map_err(err)?;
    let qp = optimal_frequency(&s, &m.with_pump_e2(s.pump_e2), Mode::Orthogonal, beta_of(&s, PI))
        .map_err(err)?
        .q_min;
    let msg = format!("Δ=100: {q100:.5} (pipeline at offset 1e-8: {qp:.5}); Δ=√3: {q3:.6}");
    ensure((-0.99..=-0.97).contains(&q100), msg.clone())?;
    ensure((q3 + 0.75).abs() < 1e-3, msg.clone())?;
    Ok(msg)
}

fn criterion_3() -> Check {
    let t0 = Instant::now();
    let m = ModelParams::liquid(2.0, 0.0);
    let mut parts = Vec::new();
    for (kind, mode) in [
        (Bifurcation::Polarization, Mode::Orthogonal),
        (Bifurcation::UpperFold, Mode::Parallel),
        (Bifurcation::LowerFold, Mode::Parallel),
    ] {
        let mut qs = Vec::new();
        for eps in [1e-3, 1e-4, 1e-5, 1e-6] {
            let s = approach(&m, kind, eps).map_err(err)?;
            let q = optimal_quadrature(&s, &m.with_pump_e2(s.pump_e2), mode, 0.0).map_err(err)?.q_min;
            qs.push(q);
        }
        let monotone = qs.windows(2).all(|w| w[1] < w[0]);
        let last = *qs.last().unwrap();
        ensure(monotone && last <= -0.999, format!("{}: {qs:?}", kind.name()))?;
        parts.push(format!("{} {last:.7}", kind.name()));
    }
    let dt = t0.elapsed().as_secs_f64();
    ensure(dt < 10.0, format!("took {dt:.1} s"))?;
    Ok(format!("{} ({dt:.2} s)", parts.join(", ")))
}

/// Printed closed form for the optimal angle at the polarization
/// threshold. It gives `β − φ1` of the optimally squeezed mode-2
/// quadrature.
fn printed_angle(delta: f64) -> f64 {
    let r = (8.0 + 9.0 * delta * delta).sqrt();
    -0.5 * ((1.0 - delta * r) / (3.0 * (1.0 + delta * delta))).clamp(-1.0, 1.0).acos()
}

/// Numerically optimal `β − φ1`, reduced to `(−π/2, π/2]`.
fn numeric_angle(delta: f64) -> Result<f64, String> {
    let m = ModelParams::liquid(delta, 0.0);
    let s = approach(&m, Bifurcation::Polarization, 1e-8).map_err(err)?;
    let o = optimal_quadrature(&s, &m.with_pump_e2(s.pump_e2), Mode::Orthogonal, 0.0).map_err(err)?;
    Ok(wrap_angle(2.0 * (o.beta - s.phi1)) / 2.0)
}

fn criterion_4() -> Check {
    let mut worst: f64 = 0.0;
    for d in [-5.0, 0.0, 2.0, 5.0] {
        let x = numeric_angle(d)?;
        let p = printed_angle(d);
        worst = worst.max((x - p).abs());
        ensure((x - p).abs() < 1e-3, format!("Δ={d}: numeric {x:.6}, closed form {p:.6}"))?;
    }
    let lo = numeric_angle(-100.0)?;
    let hi = numeric_angle(100.0)?;
    ensure(lo.abs() < 0.02, format!("Δ=-100: {lo}"))?;
    ensure((hi + PI / 2.0).abs() < 0.02, format!("Δ=100: {hi}"))?;
    Ok(format!("max deviation {worst:.2e} rad; Δ=-100 → {lo:.4}, Δ=100 → {hi:.4}"))
}

/// Whether the upper-fold mode-2 optimum at ψ = π sits at ω = 0, from the
/// curvature of the closed form there.
fn upper_opt_at_zero(delta: f64) -> Result<bool, String> {
    let m = ModelParams::liquid(delta, 0.0);
    let i = bistability_range(&m).ok_or("no bistability")?.i_plus;
    let q = |w: f64| analytic_bifurcation_q(i, &m, Mode::Orthogonal, PI, w).map_err(err);
    Ok(q(1e-4)? >= q(0.0)?)
}

fn criterion_5() -> Check {
    let m0 = ModelParams::liquid(0.0, 0.0);
    let s = approach(&m0, Bifurcation::Polarization, 1e-8).map_err(err)?;
    let w1 = optimal_frequency(&s, &m0.with_pump_e2(s.pump_e2), Mode::Parallel, beta_of(&s, 0.0))
        .map_err(err)?
        .omega;
    ensure((w1 - 5f64.sqrt()).abs() < 1e-3, format!("pol ω_opt {w1}"))?;

    let m2 = ModelParams::liquid(2.0, 0.0);
    let s = approach(&m2, Bifurcation::LowerFold, 1e-8).map_err(err)?;
    let w2 = optimal_frequency(&s, &m2.with_pump_e2(s.pump_e2), Mode::Orthogonal, beta_of(&s, PI))
        .map_err(err)?
        .omega;
    ensure((w2 - 1.5f64.sqrt()).abs() < 1e-3, format!("down ω_opt {w2}"))?;

    let s = approach(&m2, Bifurcation::UpperFold, 1e-8).map_err(err)?;
    let w3 = optimal_frequency(&s, &m2.with_pump_e2(s.pump_e2), Mode::Orthogonal, beta_of(&s, PI))
        .map_err(err)?
        .omega;
    ensure(w3 < 1e-3, format!("up ω_opt {w3}"))?;

    let (mut a, mut b) = (sqrt3() + 1e-3, 2.5);
    ensure(!upper_opt_at_zero(a)? && upper_opt_at_zero(b)?, "no crossover in bracket".into())?;
    for _ in 0..50 {
        let c = 0.5 * (a + b);
        if upper_opt_at_zero(c)? {
            b = c;
        } else {
            a = c;
        }
    }
    ensure((1.85..=1.93).contains(&b), format!("crossover at Δ = {b}"))?;
    Ok(format!("pol {w1:.6}, down {w2:.6}, up {w3:.2e}, crossover Δ = {b:.4}"))
}

fn criterion_6() -> Check {
    let mut found = Vec::new();
    for d in [1.8, 2.0, 3.0, 5.0] {
        let m = ModelParams::liquid(d, 0.0);
        for kind in [Bifurcation::UpperFold, Bifurcation::LowerFold] {
            let s = approach(&m, kind, 1e-6).map_err(err)?;
            let mm = m.with_pump_e2(s.pump_e2);
            let sum = summarize(&s, &mm, &search_grid(&mm, 200)).map_err(err)?;
            let means = stokes_means(&s);
            let mut ok = false;
            for &w in search_grid(&mm, 200).omegas() {
                let Ok(v) = stokes_variance_spectra(&s, &mm, w) else { continue };
                ok |= classify_polarization(&means, &v)
                    .witnesses
                    .iter()
                    .any(|x| x.l == 3 && x.v_l < 1.0 && x.v_k > 1.0);
            }
            ensure(ok, format!("Δ={d} {}: squeezed {:?}, minV {:?}", kind.name(), sum.squeezed, sum.min_v))?;
            found.push(format!("{:.3}", sum.min_v[3]));
        }
    }
    for d in [0.0, 1.0, 2.0] {
        let m = ModelParams::liquid(d, 0.0);
        let s = approach(&m, Bifurcation::Polarization, 1e-6).map_err(err)?;
        let mm = m.with_pump_e2(s.pump_e2);
        let sum = summarize(&s, &mm, &search_grid(&mm, 200)).map_err(err)?;
        ensure(sum.squeezed.is_empty(), format!("verdict at pol, Δ={d}: {:?}", sum.squeezed))?;
    }
    Ok(format!("S3 squeezed at all folds (min Ṽ3: {}); none at pol", found.join(" ")))
}

fn criterion_7() -> Check {
    let m = ModelParams::liquid(1.0, 0.0);
    let e2: Vec<f64> = (0..=118).map(|k| 2.1 + 0.05 * k as f64).collect();
    let rows = pump_scan(&m, &e2, &search_grid(&m, 200)).map_err(err)?;
    let mut s2 = Vec::new();
    let mut s1 = Vec::new();
    for r in &rows {
        let sum = r.summary.as_ref().ok_or(format!("no stable state at E2={}", r.e2))?;
        ensure(sum.min_v.iter().any(|v| *v < 1.0), format!("all Ṽ ≥ 1 at E2={}", r.e2))?;
        if sum.squeezed.contains(&2) {
            s2.push(r.e2);
        }
        if sum.squeezed.contains(&1) {
            s1.push(r.e2);
        }
    }
    let s2_ok = s2.iter().any(|e| (2.5..=3.5).contains(e));
    let s1_ok = s1.iter().any(|e| *e > 5.0 && *e <= 8.0);
    let span = |v: &[f64]| match (v.first(), v.last()) {
        (Some(a), Some(b)) => format!("{a:.2}..{b:.2}"),
        _ => "none".into(),
    };
    let msg = format!("S2 verdicts E2 {}, S1 verdicts E2 {}", span(&s2), span(&s1));
    ensure(s2_ok && s1_ok, msg.clone())?;
    Ok(msg)
}

fn criterion_8() -> Check {
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let d_fold = sqrt3() + 0.01 + 18.0 * k as f64 / 49.0;
        let m = ModelParams::liquid(d_fold, 0.0);
        let b = bistability_range(&m).ok_or("no bistability")?;
        worst = worst.max(fold_denominator(b.i_plus, d_fold).abs());
        worst = worst.max(fold_denominator(b.i_minus, d_fold).abs());
        let d_pol = -20.0 + 40.0 * k as f64 / 49.0;
        let p = polarization_threshold(&m.with_delta(d_pol)).map_err(err)?;
        worst = worst.max(pol_denominator(p.i_pol, d_pol).abs());
    }
    ensure(worst < 1e-10, format!("max residual {worst:e}"))?;
    Ok(format!("max residual {worst:.1e}"))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn criterion_9() -> Check {
    let mut points = 0;
    let mut worst: f64 = 0.0;
    for a in 0..20 {
        let d = -3.0 + 6.0 * a as f64 / 19.0;
        for b in 0..20 {
            let i = 0.05 + 2.95 * b as f64 / 19.0;
            let m = ModelParams::liquid(d, singlemode_pump_e2(i, d));
            let s = singlemode_state(&m, i).map_err(err)?;
            if !s.is_stable() {
                continue;
            }
            points += 1;
            for w in [0.0, 0.3, 1.0, 3.0] {
                for mode in [Mode::Parallel, Mode::Orthogonal] {
                    for psi in [0.0, 0.7, PI / 2.0, PI, -2.0] {
                        let x = quad_spectrum(&s, &m, mode, beta_of(&s, psi), w).map_err(err)?.normal_ordered;
                        let y = analytic_bifurcation_q(i, &m, mode, psi, w).map_err(err)?;
                        worst = worst.max((x - y).abs() / x.abs().max(1.0));
                        ensure(close(x, y), format!("q{} Δ={d} I={i} ω={w} ψ={psi}: {x} vs {y}", mode.index()))?;
                    }
                }
                let v = stokes_variance_spectra(&s, &m, w).map_err(err)?;
                let c = bifurcation_stokes(i, &m, w).map_err(err)?;
                for k in 0..4 {
                    worst = worst.max((v.v_norm[k] - c.v_norm[k]).abs() / v.v_norm[k].abs().max(1.0));
                    ensure(
                        close(v.v_norm[k], c.v_norm[k]),
                        format!("Ṽ{k} Δ={d} I={i} ω={w}: {} vs {}", v.v_norm[k], c.v_norm[k]),
                    )?;
                }
            }
        }
    }
    ensure(points >= 100, format!("only {points} stable grid points"))?;
    Ok(format!("{points} stable points, max deviation {worst:.1e}"))
}

fn criterion_10() -> Check {
    let t0 = Instant::now();
    let m = ModelParams::liquid(1.0, 1.0);
    let s = *all_states(&m).map_err(err)?.iter().find(|s| s.is_stable()).ok_or("no stable state")?;
    let cfg = SimConfig {
        n_traj: 400,
        duration: 200.0,
        dt: 1e-3,
        seed: 42,
        ..SimConfig::default()
    };
    let omegas = [0.0, 0.5, 1.0, 2.0];
    let est = simulate_spectra(&s, &m, &cfg, &FrequencyGrid::new(omegas.to_vec()).map_err(err)?).map_err(err)?;
    let mut worst_z: f64 = 0.0;
    for (k, &w) in omegas.iter().enumerate() {
        for mode in [Mode::Parallel, Mode::Orthogonal] {
            for beta in [s.phi1, s.phi1 + PI / 4.0] {
                let exact = quad_spectrum(&s, &m, mode, beta, w).map_err(err)?.normal_ordered;
                let (q, se) = est.quadrature(k, mode, beta);
                let z = (q - exact) / se;
                worst_z = worst_z.max(z.abs());
                ensure(z.abs() < 3.0, format!("ω={w} mode {} β={beta:.3}: {q} ± {se} vs {exact}", mode.index()))?;
            }
        }
    }
    let exact = quad_spectrum(&s, &m, Mode::Parallel, 0.0, 0.0).map_err(err)?.normal_ordered;
    let (q, se) = est.quadrature(0, Mode::Parallel, 0.0);
    ensure((q - exact).abs() < 3.0 * se, format!(":q1:(0,0) = {exact} outside {q} ± {}", 3.0 * se))?;
    let dt = t0.elapsed().as_secs_f64();
    ensure(dt < 120.0, format!("took {dt:.0} s"))?;
    Ok(format!("max |z| {worst_z:.2}; :q1:(0,0) = {exact:.4} in {q:.4} ± {:.4} ({dt:.1} s)", 3.0 * se))
}

fn max_dev(a: &vkerr_core::ComplexMatrix4, b: &vkerr_core::ComplexMatrix4) -> f64 {
    let mut w: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            w = w.max((a.0[r][c] - b.0[r][c]).norm());
        }
    }
    w
}

fn criterion_11() -> Check {
    // Vacuum.
    let mv = ModelParams::liquid(1.3, 0.0);
    let v = vacuum(&mv);
    for mode in [Mode::Parallel, Mode::Orthogonal] {
        for beta in [0.0, 0.4, 1.9] {
            for w in [0.0, 0.5, 3.0] {
                let q = quad_spectrum(&v, &mv, mode, beta, w).map_err(err)?.normal_ordered;
                ensure(q == 0.0, format!("vacuum q = {q}"))?;
            }
        }
    }

    let cases = [
        ModelParams::liquid(1.0, 1.0),
        ModelParams::liquid(1.0, 3.0),
        ModelParams::liquid(2.0, 1.0),
        ModelParams::liquid(-1.5, 2.5),
        ModelParams::liquid(3.0, 6.0),
    ];
    let mut worst_t: f64 = 0.0;
    let mut worst_b: f64 = 0.0;
    let mut worst_j: f64 = 0.0;
    for m in &cases {
        for s in all_states(m).map_err(err)?.into_iter().filter(|s| s.is_stable()) {
            for w in [0.3, 1.0, 2.5] {
                let a = SpectralPoint::new(&s, m, w).map_err(err)?.matrix();
                let b = SpectralPoint::new(&s, m, -w).map_err(err)?.matrix();
                worst_t = worst_t.max(max_dev(&a.transpose(), &b) / a.max_abs().max(1.0));
            }
            let d = diffusion_at(&s, m);
            worst_b = worst_b.max(max_dev(&noise_factor(&d).map_err(err)?.reconstruct(), &d));

            let x = phase_point(s.a1, s.a2);
            let jac = jacobian_at(&x, m);
            let h = 1e-6;
            for c in 0..4 {
                let (mut xp, mut xm) = (x, x);
                xp[c] += C64::new(h, 0.0);
                xm[c] -= C64::new(h, 0.0);
                let (fp, fm) = (drift(&xp, m), drift(&xm, m));
                for r in 0..4 {
                    let fd = (fp[r] - fm[r]) / (2.0 * h);
                    worst_j = worst_j.max((fd - jac.0[r][c]).norm() / jac.max_abs().max(1.0));
                }
            }
            let dj = max_dev(&drift_jacobian(&s, m), &jac);
            ensure(dj == 0.0, "drift_jacobian disagrees with jacobian_at".into())?;
        }
    }
    ensure(worst_t < 1e-10, format!("M(ω)ᵀ vs M(−ω): {worst_t:e}"))?;
    ensure(worst_b < 1e-12, format!("BBᵀ − D: {worst_b:e}"))?;
    ensure(worst_j < 1e-6, format!("Jacobian vs finite differences: {worst_j:e}"))?;

    // Mirror: same intensities, conjugate amplitudes.
    for m in &cases {
        let a = all_states(m).map_err(err)?;
        let b = all_states(&mirror(m)).map_err(err)?;
        ensure(a.len() == b.len(), "mirror changes the number of states".into())?;
        for s in &a {
            let hit = b.iter().any(|t| {
                (t.i1 - s.i1).abs() < 1e-9
                    && (t.i2 - s.i2).abs() < 1e-9
                    && (t.a1 - s.a1.conj()).norm() < 1e-9
                    && (t.a2 - s.a2.conj()).norm() < 1e-9
                    && t.stability == s.stability
            });
            ensure(hit, format!("no mirror image of {s:?}"))?;
        }
    }

    // Singlemode Ṽ0 = Ṽ1.
    let mut worst_v: f64 = 0.0;
    for (d, e2) in [(1.0, 1.0), (0.0, 0.5), (2.0, 1.0), (-2.0, 4.0)] {
        let m = ModelParams::liquid(d, e2);
        for s in all_states(&m).map_err(err)?.into_iter().filter(|s| s.is_stable() && s.i2 == 0.0) {
            for w in [0.0, 0.7, 2.0] {
                let v = stokes_variance_spectra(&s, &m, w).map_err(err)?;
                worst_v = worst_v.max((v.v_norm[0] - v.v_norm[1]).abs());
            }
        }
    }
    ensure(worst_v < 1e-12, format!("singlemode Ṽ0 − Ṽ1: {worst_v:e}"))?;

    // Phase-bistable twins.
    let m = ModelParams::liquid(1.0, 4.0);
    let twins: Vec<_> = bimode_states(&m).into_iter().filter(|s| s.is_stable()).collect();
    ensure(twins.len() == 2, format!("expected two stable twins, got {}", twins.len()))?;
    for w in [0.0, 0.5, 1.5] {
        let a = stokes_variance_spectra(&twins[0], &m, w).map_err(err)?;
        let b = stokes_variance_spectra(&twins[1], &m, w).map_err(err)?;
        for k in 0..4 {
            ensure(close(a.v_norm[k], b.v_norm[k]), format!("twin Ṽ{k} at ω={w}: {} vs {}", a.v_norm[k], b.v_norm[k]))?;
        }
    }
    Ok(format!("transpose {worst_t:.1e}, BBᵀ {worst_b:.1e}, Jacobian {worst_j:.1e}, Ṽ0−Ṽ1 {worst_v:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 11] = [
        ("lower-fold optimum at the cusp", criterion_1),
        ("upper-fold asymptote", criterion_2),
        ("perfect squeezing limits", criterion_3),
        ("optimal-angle closed form", criterion_4),
        ("optimal frequencies", criterion_5),
        ("polarization squeezing at the folds", criterion_6),
        ("pump scan at detuning 1", criterion_7),
        ("closed-form denominators", criterion_8),
        ("pipeline equivalence", criterion_9),
        ("Monte Carlo oracle", criterion_10),
        ("structural properties", criterion_11),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !filter.is_empty() && !filter.iter().any(|x| x == &id.to_string()) {
            continue;
        }
        match f() {
            Ok(detail) => println!("criterion {id:>2} PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id:>2} FAIL  {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
