//! Acceptance checks. Runs as a plain binary so every criterion prints one
//! PASS/FAIL line; exits non-zero if any fails.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::Instant;

use mixcoupling::dephasing::{
    gamma_nonlinear_analytic, gamma_ode, gamma_linear, log_log_slope, max_step,
    z_quadratic_analytic, z_trajectory, DephasingParams, ZModel,
};
use mixcoupling::dispersive::{
    chi_zero_gp, cpt_shifts, extract_shifts, label_dressed_states, mixed_model_shifts,
    mixed_model_shifts_with_noise, shift_grid, BareBasis, DEFAULT_OVERLAP_FLOOR,
};
use mixcoupling::models::{build_synthetic_dispersive, CptParams, MixedCouplingParams};
use mixcoupling::quantum::eigendecompose;
use mixcoupling::readout::{
    calibrate_drive, error_curve_sweep, integrate_trajectory, steady_state_photons,
    ReadoutConfig, SweepAxis, SNR_PREFACTOR,
};
use mixcoupling::units::{GHZ, MHZ};
use proptest::strategy::{Strategy, ValueTree};
use proptest::test_runner::TestRunner;
use rayon::prelude::*;

const NS: f64 = 1e-9;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn zero_locus() -> Outcome {
    const N: usize = 101;
    let cell = 150.0 * MHZ / (N - 1) as f64;
    let axis: Vec<f64> = (0..N).map(|i| i as f64 * cell).collect();
    let base = MixedCouplingParams::new(5.0 * GHZ, 8.0 * GHZ, 0.0, 0.0, 8);
    let grid = shift_grid(&base, &axis, &axis);
    let chi: Vec<f64> = match grid.into_iter().map(|r| r.map(|s| s.chi)).collect() {
        Ok(v) => v,
        Err(e) => return outcome(false, format!("extraction failed: {e}")),
    };
    let at = |i: usize, j: usize| chi[i * N + j];

    // Crossings on grid edges, in units of cells.
    let mut crossings: Vec<(f64, f64)> = Vec::new();
    for i in 0..N {
        for j in 0..N {
            let here = at(i, j);
            if i == 0 && j == 0 {
                continue;
            }
            if here == 0.0 {
                crossings.push((i as f64, j as f64));
            }
            for (di, dj) in [(1, 0), (0, 1)] {
                if i + di >= N || j + dj >= N {
                    continue;
                }
                let next = at(i + di, j + dj);
                if here * next < 0.0 {
                    let f = here / (here - next);
                    crossings.push((i as f64 + f * di as f64, j as f64 + f * dj as f64));
                }
            }
        }
    }
    let (s_lo, s_hi) = chi_zero_gp(1.0, 5.0, 8.0).unwrap();
    let dist_to_branches = |x: f64, y: f64| {
        [s_lo, s_hi]
            .iter()
            .map(|s| (y - s * x).abs() / (1.0 + s * s).sqrt())
            .fold(f64::INFINITY, f64::min)
    };
    let worst_crossing = crossings
        .iter()
        .map(|&(x, y)| dist_to_branches(x, y))
        .fold(0.0, f64::max);

    // Every analytic branch point in the box has a numeric crossing nearby.
    let mut worst_branch: f64 = 0.0;
    for s in [s_lo, s_hi] {
        let mut x = 0.0;
        while x <= 100.0 && s * x <= 100.0 {
            let y = s * x;
            if x * x + y * y > 1.0 {
                let d = crossings
                    .iter()
                    .map(|&(cx, cy)| ((cx - x).powi(2) + (cy - y).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min);
                worst_branch = worst_branch.max(d);
            }
            x += 0.25;
        }
    }
    let pass = !crossings.is_empty() && worst_crossing <= 1.0 && worst_branch <= 1.0;
    outcome(
        pass,
        format!(
            "{} crossings; max crossing-to-curve {:.3} cells, max curve-to-crossing {:.3} cells",
            crossings.len(),
            worst_crossing,
            worst_branch
        ),
    )
}

fn non_simultaneous_suppression() -> Outcome {
    let mut worst_ratio = f64::INFINITY;
    let mut detail = String::new();
    for k in 0..=10 {
        let gx = (50.0 + 10.0 * k as f64) * MHZ;
        let (gp, _) = chi_zero_gp(gx, 5.0 * GHZ, 8.0 * GHZ).unwrap();
        let p = MixedCouplingParams::new(5.0 * GHZ, 8.0 * GHZ, gx, gp, 10);
        let (report, noise) = match mixed_model_shifts_with_noise(&p) {
            Ok(v) => v,
            Err(e) => return outcome(false, format!("g_X = {gx:e}: {e}")),
        };
        let ratio = report.chi_prime.abs() / noise.chi_prime.max(f64::MIN_POSITIVE);
        if ratio < worst_ratio {
            worst_ratio = ratio;
            detail = format!(
                "worst at g_X = {:.0} MHz: |χ′| = {:.3e} Hz, floor = {:.3e} Hz",
                gx / MHZ,
                report.chi_prime.abs(),
                noise.chi_prime
            );
        }
    }
    outcome(worst_ratio > 10.0, format!("min |χ′|/floor = {worst_ratio:.3e}; {detail}"))
}

fn dephasing_cross_validation() -> Outcome {
    let mut worst_closed: f64 = 0.0;
    let mut worst_z: f64 = 0.0;
    let mut failures = Vec::new();
    for n in [1e-4, 1e-3, 1e-2] {
        for chip in [0.01, 0.1, 1.0] {
            for kappa in [1.0, 3.0, 10.0] {
                let p = DephasingParams::new(kappa * MHZ, 0.0, chip * MHZ, n);
                let cubic = match gamma_ode(&p, ZModel::Cubic) {
                    Ok(r) => r.gamma,
                    Err(e) => {
                        failures.push(format!("({n},{chip},{kappa}): {e}"));
                        continue;
                    }
                };
                let closed = gamma_nonlinear_analytic(&p).unwrap().gamma;
                worst_closed = worst_closed.max((cubic - closed).abs() / closed);

                let k = TAU * kappa * MHZ;
                let traj = z_trajectory(&p, 50.0 / k, max_step(p.kappa), ZModel::Quadratic).unwrap();
                let exact = z_quadratic_analytic(&p).unwrap();
                worst_z = worst_z.max((traj.z.last().unwrap() - exact).norm() / exact.norm());
            }
        }
    }
    outcome(
        failures.is_empty() && worst_closed <= 0.05 && worst_z <= 1e-8,
        format!(
            "max |Γ_cubic/Γ_closed − 1| = {:.4}, max quadratic Z error = {:.2e}{}",
            worst_closed,
            worst_z,
            if failures.is_empty() { String::new() } else { format!("; failures: {failures:?}") }
        ),
    )
}

fn cubic_scaling() -> Outcome {
    let n: Vec<f64> = (0..9).map(|k| 10f64.powf(-4.0 + 0.25 * k as f64)).collect();
    let ode: Vec<f64> = n
        .iter()
        .map(|&n| gamma_ode(&DephasingParams::new(3.0 * MHZ, 0.0, 0.1 * MHZ, n), ZModel::Cubic).unwrap().gamma)
        .collect();
    let lin: Vec<f64> = n
        .iter()
        .map(|&n| gamma_linear(&DephasingParams::new(3.0 * MHZ, 1.0 * MHZ, 0.0, n)).unwrap().gamma)
        .collect();
    let s3 = log_log_slope(&n, &ode);
    let s1 = log_log_slope(&n, &lin);
    outcome(
        (s3 - 3.0).abs() <= 0.05 && (s1 - 1.0).abs() <= 0.02,
        format!("nonlinear slope {s3:.4}, linear slope {s1:.4}"),
    )
}

fn one_second() -> Outcome {
    let p = DephasingParams::thermal(3.0 * MHZ, 0.0, 1.0 * MHZ, 0.050, 7.0 * GHZ);
    let closed = gamma_nonlinear_analytic(&p).unwrap().t_phi;
    let ode = match gamma_ode(&p, ZModel::Cubic) {
        Ok(r) => r.t_phi,
        Err(e) => return outcome(false, e.to_string()),
    };
    outcome(
        closed > 1.0 && ode > 1.0,
        format!("n_th = {:.4e}; T_φ closed {closed:.3} s, ODE {ode:.3} s", p.n_th().unwrap()),
    )
}

fn readout_error(chip: f64, t_ns: f64, eta: f64) -> Result<f64, String> {
    let cfg = ReadoutConfig {
        snr_prefactor: SNR_PREFACTOR,
        ..ReadoutConfig::new(3.0 * MHZ, 0.0, chip * MHZ, 15.0, t_ns * NS).with_eta(eta)
    };
    integrate_trajectory(&cfg)
        .map(|t| t.final_error())
        .map_err(|e| e.to_string())
}

fn readout_anchor() -> Outcome {
    // The anchor fixes the prefactor; the other two use it unchanged.
    let anchor = readout_error(0.1, 400.0, 1.0);
    let fast = readout_error(0.12, 300.0, 1.0);
    let lossy = readout_error(0.1, 400.0, 0.25);
    match (anchor, fast, lossy) {
        (Ok(a), Ok(f), Ok(l)) => outcome(
            a < 1e-4 && f < 1e-4 && l < 1e-3,
            format!(
                "prefactor {SNR_PREFACTOR}; error(χ′=0.1, 400 ns) = {a:.2e}, error(χ′=0.12, 300 ns) = {f:.2e}, error(η=0.25, 400 ns) = {l:.2e}"
            ),
        ),
        (a, f, l) => outcome(false, format!("{a:?} {f:?} {l:?}")),
    }
}

fn kappa_optimum() -> Outcome {
    let kappas: Vec<f64> = (0..15).map(|k| (1.0 + 0.5 * k as f64) * MHZ).collect();
    let base = ReadoutConfig::new(3.0 * MHZ, 0.0, 0.12 * MHZ, 15.0, 400.0 * NS);
    let points = error_curve_sweep(&base, &SweepAxis::Kappa(kappas.clone()));
    let mut errors = Vec::new();
    for p in &points {
        match &p.outcome {
            Ok(o) => errors.push(o.error),
            Err(e) => return outcome(false, format!("κ = {:e}: {e}", p.value)),
        }
    }
    let (imin, &emin) = errors
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let k_opt = kappas[imin] / MHZ;
    let at_1p5 = errors[1];
    let interior = imin > 0 && imin + 1 < errors.len();
    outcome(
        interior && (k_opt - 4.0).abs() <= 1.0 && at_1p5 < 1e-4,
        format!("minimum error {emin:.2e} at κ/2π = {k_opt} MHz; error(1.5 MHz) = {at_1p5:.2e}"),
    )
}

fn photon_parity() -> Outcome {
    let mut configs = Vec::new();
    for chip in [0.05, 0.08, 0.1, 0.12, 0.15, 0.2] {
        configs.push(ReadoutConfig::new(3.0 * MHZ, 0.0, chip * MHZ, 15.0, 400.0 * NS));
    }
    configs.push(ReadoutConfig::new(3.0 * MHZ, 0.0, 0.12 * MHZ, 15.0, 300.0 * NS));
    configs.push(ReadoutConfig::new(3.0 * MHZ, 0.0, 0.1 * MHZ, 15.0, 400.0 * NS).with_eta(0.25));
    let mut worst: f64 = 0.0;
    for cfg in configs {
        let eps = match calibrate_drive(&cfg) {
            Ok(e) => e,
            Err(e) => return outcome(false, e.to_string()),
        };
        let (n0, n1) = steady_state_photons(&cfg.with_epsilon(eps)).unwrap();
        worst = worst.max((n0 - n1).abs() / n0);
    }
    outcome(worst <= 1e-10, format!("max relative photon difference {worst:.2e}"))
}

fn cpt_landscape() -> Outcome {
    const N: usize = 13;
    let span = 3.0 * GHZ;
    let axis: Vec<f64> = (0..N).map(|i| -span + 2.0 * span * i as f64 / (N - 1) as f64).collect();
    let params = |ejd: f64, ecd: f64| CptParams {
        n_fock: 12,
        ..CptParams::from_sum_delta(18.0 * GHZ, ejd, 10.0 * GHZ, ecd, 10.0 * GHZ, 100.0 * GHZ, 0.25, 3.0)
    };
    let points: Vec<(usize, usize)> = (0..N).flat_map(|i| (0..N).map(move |j| (i, j))).collect();
    let results: Vec<_> = points
        .par_iter()
        .map(|&(i, j)| cpt_shifts(&params(axis[i], axis[j])))
        .collect();
    let mut chi = vec![0.0; N * N];
    let mut chip = vec![0.0; N * N];
    for (k, r) in results.into_iter().enumerate() {
        match r {
            Ok(s) => {
                chi[k] = s.chi;
                chip[k] = s.chi_prime;
            }
            Err(e) => return outcome(false, format!("grid point {:?}: {e}", points[k])),
        }
    }
    let mut edges = Vec::new();
    for i in 0..N {
        for j in 0..N {
            for (di, dj) in [(1, 0), (0, 1)] {
                if i + di < N && j + dj < N {
                    let (a, b) = (i * N + j, (i + di) * N + j + dj);
                    if chi[a] * chi[b] < 0.0 {
                        edges.push((a, b));
                    }
                }
            }
        }
    }
    let centre = (N - 1) / 2;
    let near_origin = |k: usize| {
        let (i, j) = (k / N, k % N);
        i.abs_diff(centre) <= 2 && j.abs_diff(centre) <= 2
    };
    let origin_adjacent = edges.iter().any(|&(a, b)| near_origin(a) || near_origin(b));
    // χ′ on the contour against its truncation noise at the origin.
    let origin = params(0.0, 0.0);
    let floor = match (cpt_shifts(&origin), cpt_shifts(&CptParams { n_fock: 17, ..origin })) {
        (Ok(a), Ok(b)) => (a.chi_prime - b.chi_prime).abs(),
        (a, b) => return outcome(false, format!("noise floor: {a:?} {b:?}")),
    };
    let min_chip = edges
        .iter()
        .map(|&(a, b)| chip[a].abs().min(chip[b].abs()))
        .fold(f64::INFINITY, f64::min);
    outcome(
        !edges.is_empty() && origin_adjacent && min_chip > 10.0 * floor,
        format!(
            "{} sign-change edges, origin-adjacent: {origin_adjacent}; min |χ′| on contour {:.3e} Hz, floor {:.3e} Hz",
            edges.len(),
            min_chip,
            floor
        ),
    )
}

fn extraction_oracle() -> Outcome {
    let mut runner = TestRunner::deterministic();
    let strategy = (-5.0f64..5.0, -0.5f64..0.5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (chi, chip) = strategy.new_tree(&mut runner).unwrap().current();
        let (chi, chip) = (chi * MHZ, chip * MHZ);
        let h = build_synthetic_dispersive(chi, chip, 7.0 * GHZ, 5.0 * GHZ, 5).unwrap();
        let es = eigendecompose(&h).unwrap();
        let basis = BareBasis::spin_boson(h.space(), 5.0 * GHZ, 7.0 * GHZ, 2, 3).unwrap();
        let ds = label_dressed_states(&es, &basis, DEFAULT_OVERLAP_FLOOR).unwrap();
        let r = extract_shifts(&ds).unwrap();
        worst = worst
            .max((r.chi - chi).abs() / chi.abs())
            .max((r.chi_prime - chip).abs() / chip.abs());
    }
    outcome(worst <= 1e-9, format!("max relative error over 100 pairs {worst:.2e}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("chi=0 locus", zero_locus),
        ("non-simultaneous suppression", non_simultaneous_suppression),
        ("dephasing cross-validation", dephasing_cross_validation),
        ("cubic scaling law", cubic_scaling),
        ("one-second dephasing time", one_second),
        ("readout anchor", readout_anchor),
        ("kappa optimum", kappa_optimum),
        ("chi=0 photon parity", photon_parity),
        ("CPT landscape", cpt_landscape),
        ("extraction oracle", extraction_oracle),
    ];
    // Make sure a mis-built library does not silently pass the shift checks.
    assert!(mixed_model_shifts(&MixedCouplingParams::new(5.0 * GHZ, 8.0 * GHZ, 0.0, 0.0, 4)).is_ok());

    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "[{tag}] {:>2}. {name} ({:.1} s): {}",
            k + 1,
            start.elapsed().as_secs_f64(),
            o.detail
        );
        if !o.pass {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
