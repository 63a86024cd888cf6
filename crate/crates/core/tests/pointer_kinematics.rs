//! Integration tests for the sum-coordinate pointer kinematics: bounding
//! systems against analytic moments, pathwise bracketing under real noise,
//! and post-collapse localization of the reconstructed peaks.

use qmupl_core::collapse::{collapse_time, gamma_step_physical, CollapseThresholds};
use qmupl_core::ensemble::run_ensemble;
use qmupl_core::gaussian::distance_closed_form;
use qmupl_core::params::{PhysicalParams, Sign};
use qmupl_core::pointer::{
    aux_mean, aux_variance, post_collapse_drift_bounds, reconstruct_peaks, step_aux_linear,
    step_sum_coords, SumCoords,
};
use qmupl_core::stats::RunningMoments;
use rand::Rng;
use rand_distr::StandardNormal;

/// Parameter set with unit localization frequency (`lambda = 1/4`,
/// `sigma_q = 1`), so times read directly as `omega t`.
fn unit_omega(kappa: f64, t_meas: f64) -> PhysicalParams {
    PhysicalParams {
        m: 1.0,
        m0: 4.0,
        lambda0: 1.0,
        hbar: 1.0,
        kappa,
        t_meas,
        t0: 0.0,
    }
}

#[test]
fn bounding_system_matches_analytic_moments() {
    let p = PhysicalParams::dimensionless(2.0, 0.25);
    let dc = p.derive().unwrap();
    let dt = 2.5e-4;
    let capture = [600u64, 1000];
    let n: u64 = 10_000;
    let x_sep: Vec<f64> = (0..1000)
        .map(|i| {
            distance_closed_form(i as f64 * dt, p.t_meas, &dc)
                .unwrap()
                .x
        })
        .collect();

    let paths = run_ensemble(n, 314, |_, rng| {
        let mut sc = SumCoords::default();
        let mut out = Vec::new();
        for (i, x) in x_sep.iter().enumerate() {
            let dw: f64 = rng.sample::<f64, _>(StandardNormal) * dt.sqrt();
            step_aux_linear(Sign::Plus, &mut sc, *x, dt, dw, &dc).unwrap();
            if capture.contains(&(i as u64 + 1)) {
                out.push(sc);
            }
        }
        out
    });

    for (ci, &step) in capture.iter().enumerate() {
        let t = step as f64 * dt;
        let mut xm = RunningMoments::new();
        let mut km = RunningMoments::new();
        for path in &paths {
            xm.push(path[ci].xtilde);
            km.push(path[ci].ktilde);
        }
        let mean_x = aux_mean(t, Sign::Plus, p.t_meas, &dc).unwrap();
        assert!(
            (xm.mean - mean_x).abs() <= 3.0 * xm.se_mean(),
            "t = {t}: sum-coordinate mean {:e} vs {mean_x:e}",
            xm.mean
        );
        let var_x = aux_variance(t, &dc);
        assert!(
            (xm.variance() - var_x).abs() <= 0.05 * var_x,
            "t = {t}: sum-coordinate variance {:e} vs {var_x:e}",
            xm.variance()
        );
        // The momentum-like mean is minus the closed-form K separation and
        // its variance is 4 lambda t.
        let mean_k = -distance_closed_form(t, p.t_meas, &dc).unwrap().k;
        assert!(
            (km.mean - mean_k).abs() <= 3.0 * km.se_mean(),
            "t = {t}: wavenumber mean {:e} vs {mean_k:e}",
            km.mean
        );
        let var_k = 4.0 * dc.lambda * t;
        assert!(
            (km.variance() - var_k).abs() <= 0.05 * var_k,
            "t = {t}: wavenumber variance {:e} vs {var_k:e}",
            km.variance()
        );
    }
}

#[test]
fn frozen_drive_systems_bracket_the_true_one_under_real_noise() {
    let p = unit_omega(1.0, 2.0);
    let dc = p.derive().unwrap();
    let dt = 1e-3;
    let n_steps = 1000usize;
    let x_sep: Vec<f64> = (0..n_steps)
        .map(|i| {
            distance_closed_form(i as f64 * dt, p.t_meas, &dc)
                .unwrap()
                .x
        })
        .collect();

    let violations: u64 = run_ensemble(2_000u64, 9_000, |_, rng| {
        let mut lo = SumCoords::default();
        let mut mid = SumCoords::default();
        let mut hi = SumCoords::default();
        let mut gamma = 0.0_f64;
        let mut bad = 0u64;
        for x in &x_sep {
            let dw: f64 = rng.sample::<f64, _>(StandardNormal) * dt.sqrt();
            gamma = gamma_step_physical(gamma, *x, dt, dw, &dc).unwrap();
            step_aux_linear(Sign::Minus, &mut lo, *x, dt, dw, &dc).unwrap();
            step_sum_coords(&mut mid, gamma, *x, dt, dw, &dc).unwrap();
            step_aux_linear(Sign::Plus, &mut hi, *x, dt, dw, &dc).unwrap();
            if !(lo.xtilde <= mid.xtilde && mid.xtilde <= hi.xtilde) {
                bad += 1;
            }
            if !(lo.ktilde <= mid.ktilde && mid.ktilde <= hi.ktilde) {
                bad += 1;
            }
        }
        bad
    })
    .into_iter()
    .sum();
    assert_eq!(violations, 0, "bracketing must hold exactly on every step");
}

/// Regime with fast confirmation (`t_c ~ 0.15 T`), slow localization
/// (`omega T = 0.05`) and a macroscopic branch separation, mirroring the
/// SI setup at desk scale.
#[test]
fn confirmed_outcome_pins_the_plus_peak_displacement() {
    let p = PhysicalParams {
        m: 1.0,
        m0: 1600.0,
        lambda0: 1.0,
        hbar: 1.0,
        kappa: 2667.0,
        t_meas: 1.0,
        t0: 0.0,
    };
    let dc = p.derive().unwrap();
    // The ten-sigma padding on the exit time makes stragglers at t_c rarer
    // than one in a million, so conditioning on confirmation is clean.
    let th = CollapseThresholds {
        a: 3.0,
        b: 5.0,
        multiplier: 10.0,
    };
    let t_c = collapse_time(0.0, &th, &p).unwrap().seconds;
    assert!(
        t_c < 0.3 * p.t_meas,
        "confirmation should beat the window; t_c = {t_c}"
    );

    let dt = 1e-3;
    let t_end = 10.0 * p.t_meas;
    let n_steps = (t_end / dt).round() as usize;
    let first_checked = (t_c / dt).ceil() as usize;
    let checkpoints = [500usize, 1_000, 5_000, 10_000];
    let x_sep: Vec<f64> = (0..n_steps)
        .map(|i| {
            distance_closed_form(i as f64 * dt, p.t_meas, &dc)
                .unwrap()
                .x
        })
        .collect();

    struct PathReport {
        eligible: bool,
        gap_violations: u64,
        in_band: [bool; 4],
    }

    let reports = run_ensemble(2_000u64, 424_242, |_, rng| {
        let mut gamma = 0.0_f64;
        let mut true_sc = SumCoords::default();
        let mut aux_sc = SumCoords::default();
        let mut eligible = true;
        let mut gap_violations = 0u64;
        let mut in_band = [false; 4];
        for (i, x) in x_sep.iter().enumerate() {
            let dw: f64 = rng.sample::<f64, _>(StandardNormal) * dt.sqrt();
            gamma = gamma_step_physical(gamma, *x, dt, dw, &dc).unwrap();
            step_sum_coords(&mut true_sc, gamma, *x, dt, dw, &dc).unwrap();
            step_aux_linear(Sign::Plus, &mut aux_sc, *x, dt, dw, &dc).unwrap();
            let step = i + 1;
            if step < first_checked {
                continue;
            }
            let t = step as f64 * dt;
            if gamma < th.a {
                eligible = false;
            }
            let bounds = post_collapse_drift_bounds(t, t_c, th.a, p.t_meas, &dc).unwrap();
            let k_gap = aux_sc.ktilde - true_sc.ktilde;
            let x_gap = aux_sc.xtilde - true_sc.xtilde;
            if eligible
                && !(k_gap >= 0.0 && k_gap <= bounds.k_gap && x_gap >= 0.0 && x_gap <= bounds.x_gap)
            {
                gap_violations += 1;
            }
            if let Some(ci) = checkpoints.iter().position(|&c| c == step) {
                let x_plus = reconstruct_peaks(*x, &true_sc).x_plus;
                let target = 0.5 * dc.hbar_kappa * t.min(p.t_meas);
                let band = 0.5 * bounds.x_gap + 1.5 * aux_variance(t, &dc).sqrt();
                in_band[ci] = (x_plus - target).abs() <= band;
            }
        }
        PathReport {
            eligible,
            gap_violations,
            in_band,
        }
    });

    let eligible: Vec<&PathReport> = reports.iter().filter(|r| r.eligible).collect();
    // roughly half the paths confirm +, and nearly all of those stay there
    assert!(
        eligible.len() > 800,
        "too few eligible paths ({}) for a meaningful check",
        eligible.len()
    );
    let total_gap_violations: u64 = eligible.iter().map(|r| r.gap_violations).sum();
    assert_eq!(
        total_gap_violations, 0,
        "aux-system gaps exceeded their closed-form bounds"
    );
    for (ci, &step) in checkpoints.iter().enumerate() {
        let inside = eligible.iter().filter(|r| r.in_band[ci]).count() as f64;
        let frac = inside / eligible.len() as f64;
        assert!(
            frac >= 0.99,
            "step {step}: only {frac} of confirmed paths inside the displacement band"
        );
    }
}
