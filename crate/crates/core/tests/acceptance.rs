//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use nldiff::diagnostics::{attractor_error, collapse, log_times, loglog_slope, sup_norm_bound, CollapseOptions};
use nldiff::fd::{run as run_fd, FdConfig, FdRun};
use nldiff::mass_ode::{mass_decay_exponent, tail_exponent_of_a};
use nldiff::profile::{euler_integral_oracle, f_mu, f_mu_tail_exponent, KummerControls};
use nldiff::spectral::{default_ode_controls, evaluate_bounded, DEFAULT_MODES};
use nldiff::{
    kummer_1f1, solve_a, AsymptoticConstants, Execution, ExplicitSolution, Grid1D, InitialCondition, KernelControls,
    KernelRun, OdeControls, ProfileSpec, SineCoefficients, SpectralState,
};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn chi() -> InitialCondition {
    InitialCondition::indicator(1.0, 2.0).unwrap()
}

const M1_CHI: f64 = 1.5;

fn kernel_run(ic: InitialCondition, grid: Grid1D, t_end: f64) -> KernelRun {
    let resc = solve_a(&ic, t_end, &OdeControls::default()).unwrap();
    KernelRun::new(ic, resc, grid, KernelControls::default()).unwrap()
}

/// FD run on [0, 400] with Δx = 0.2 up to t = 5·10⁴, moments on a log grid.
fn long_fd_run() -> FdRun {
    let grid = Grid1D::with_spacing(400.0, 0.2).unwrap();
    let mut cfg = FdConfig::new(grid, 5e4, vec![50.0, 500.0, 5000.0, 5e4]);
    cfg.moment_times = log_times(1.0, 5e4, 47);
    run_fd(&cfg, &chi(), Execution::default()).unwrap()
}

fn mass_decay(fd: &FdRun) -> Outcome {
    let start = Instant::now();
    let resc = solve_a(&chi(), 1e5, &OdeControls::default()).map_err(|e| e.to_string())?;
    let ode = mass_decay_exponent(&resc, (1e4, 1e5)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let series: Vec<(f64, f64)> = fd.records.iter().map(|r| (r.moments.t, r.moments.mass)).collect();
    let fd_fit = loglog_slope(&series, (5e3, 5e4)).map_err(|e| e.to_string())?;
    check(
        (ode.slope + 1.0 / 3.0).abs() <= 0.02 && elapsed < 1.0 && (fd_fit.slope + 1.0 / 3.0).abs() <= 0.05,
        format!("ode slope {:.5} in {elapsed:.3} s, fd slope {:.5}", ode.slope, fd_fit.slope),
    )
}

fn asymptotic_constant() -> Outcome {
    let resc = solve_a(&chi(), 1e5, &OdeControls::default()).map_err(|e| e.to_string())?;
    let c = AsymptoticConstants::new(M1_CHI).unwrap().c;
    let ratio = resc.a_at(1e5).unwrap() / 1e5f64.powf(2.0 / 3.0);
    let rel = (ratio - c).abs() / c;
    check(rel <= 0.05, format!("a/t^(2/3) = {ratio:.5}, c = {c:.5}, rel {rel:.2e}"))
}

fn heavy_tail() -> Outcome {
    let ic = InitialCondition::PowerTail { delta: 1.5 };
    let resc = solve_a(&ic, 1e5, &OdeControls::default()).map_err(|e| e.to_string())?;
    let fit = tail_exponent_of_a(&resc, (1e4, 1e5)).map_err(|e| e.to_string())?;
    check((fit.slope - 0.8).abs() <= 0.05, format!("a exponent {:.5} (target 0.8)", fit.slope))
}

fn fd_kernel_gap(dx: f64) -> f64 {
    let grid = Grid1D::with_spacing(400.0, dx).unwrap();
    // Δt = 0.9·Δx²/(2M(0)) with the exact initial mass; the sampled mass is
    // 1 + Δx, so this sits inside the bound only with θ = 1
    let mut cfg = FdConfig::new(grid, 50.0, vec![50.0]);
    cfg.dt = Some(0.9 * dx * dx / (2.0 * chi().mass()));
    cfg.theta = 1.0;
    let fd = run_fd(&cfg, &chi(), Execution::default()).unwrap();
    let field = &fd.fields[0];
    let kernel = kernel_run(chi(), grid, 60.0).evaluate(field.time).unwrap();
    field
        .values
        .iter()
        .zip(&kernel.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn cross_solver() -> Outcome {
    let coarse = fd_kernel_gap(0.1);
    let fine = fd_kernel_gap(0.05);
    let ratio = coarse / fine;
    check(
        coarse <= 5e-3 && ratio >= 2.0,
        format!("gap {coarse:.3e} at dx 0.1, {fine:.3e} at dx 0.05, ratio {ratio:.4}"),
    )
}

fn self_similar_collapse() -> Outcome {
    let run = kernel_run(chi(), Grid1D::with_spacing(600.0, 0.1).unwrap(), 5e4);
    let fields: Vec<_> = [50.0, 500.0, 5000.0, 5e4].iter().map(|&t| run.evaluate(t).unwrap()).collect();
    let report = collapse(&fields, run.rescaling(), M1_CHI, &CollapseOptions::default()).map_err(|e| e.to_string())?;
    let exponent = report.exponent_over(5e2, 5e4).map_err(|e| e.to_string())?;
    let d: Vec<String> = report.distances.iter().map(|d| format!("{d:.3e}")).collect();
    check(
        report.strictly_decreasing() && exponent <= -0.30,
        format!("d = [{}], exponent {exponent:.4}", d.join(", ")),
    )
}

fn convergence_rate() -> Outcome {
    let run = kernel_run(chi(), Grid1D::with_spacing(1000.0, 0.05).unwrap(), 1e5);
    let times = log_times(1e3, 1e5, 11);
    let scaled: Vec<f64> = times
        .iter()
        .map(|&t| attractor_error(&run.evaluate(t).unwrap(), run.rescaling(), M1_CHI).unwrap() * t)
        .collect();
    let mut worst: f64 = 0.0;
    for k in 1..scaled.len() {
        let floor = scaled[..k].iter().copied().fold(f64::INFINITY, f64::min);
        worst = worst.max(scaled[k] / floor);
    }
    check(
        worst <= 1.1,
        format!("t·err from {:.4e} to {:.4e}, worst rise {worst:.4}", scaled[0], scaled[scaled.len() - 1]),
    )
}

/// Counts sampled times where `sup u > M₁/(√(2eπ)·a)` beyond roundoff.
fn sup_bound_violations(samples: &[(f64, f64, f64)]) -> usize {
    samples
        .iter()
        .filter(|(sup, m1, a)| *sup > sup_norm_bound(*m1, *a) * (1.0 + 1e-12))
        .count()
}

fn sup_norm(fd: &FdRun) -> Outcome {
    let half_line = [
        chi(),
        InitialCondition::ScaledSine { mass: 1.0 },
        InitialCondition::SelfSimilarSeed { m1: 1.5 },
        InitialCondition::PowerTail { delta: 1.5 },
    ];
    let mut checked = 0;
    let mut violations = 0;
    let times = log_times(0.1, 1e4, 11);
    for ic in &half_line {
        // the bound is vacuous for data with infinite first moment
        let Some(m1) = ic.first_moment().finite() else { continue };
        let resc = solve_a(ic, 1e4, &OdeControls::default()).unwrap();
        let run = KernelRun::new(ic.clone(), resc, Grid1D::new(10.0, 3).unwrap(), KernelControls::default()).unwrap();
        let mut samples = Vec::new();
        for &t in &times {
            let a = run.rescaling().a_at(t).unwrap();
            let (_, hi) = ic.support();
            let x_hi = hi.min(50.0) + 10.0 * a.sqrt();
            let sup = (1..=4000)
                .map(|k| run.evaluate_at(t, x_hi * k as f64 / 4000.0).unwrap())
                .fold(0.0, f64::max);
            samples.push((sup, m1, a));
        }
        checked += samples.len();
        violations += sup_bound_violations(&samples);
    }

    let m1_fd = fd.initial.moments.first;
    let fd_samples: Vec<_> = fd.records.iter().map(|r| (r.moments.sup_norm, m1_fd, r.a)).collect();
    checked += fd_samples.len();
    violations += sup_bound_violations(&fd_samples);

    let grid = Grid1D::new(PI, 1025).unwrap();
    for ic in &half_line {
        let coeffs = SineCoefficients::from_ic(ic, DEFAULT_MODES, Execution::default()).unwrap();
        // first moment over (0, π) of the truncated series
        let m1: f64 = coeffs
            .values()
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let n = (k + 1) as f64;
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign * w * PI / n
            })
            .sum();
        let state = SpectralState::new(coeffs, 1e4, &times, &default_ode_controls()).unwrap();
        let samples: Vec<_> = times
            .iter()
            .map(|&t| {
                let f = evaluate_bounded(&state, t, &grid, Execution::default()).unwrap();
                (f.sup_norm(), m1, state.rescaling().a_at(t).unwrap())
            })
            .collect();
        checked += samples.len();
        violations += sup_bound_violations(&samples);
    }
    check(violations == 0, format!("{violations} violations in {checked} sampled (solver, ic, t)"))
}

fn first_moment(fd: &FdRun) -> Outcome {
    let run = kernel_run(chi(), Grid1D::with_spacing(400.0, 0.1).unwrap(), 1e4);
    let kernel_drift = log_times(1.0, 1e4, 9)
        .iter()
        .map(|&t| (run.evaluate(t).unwrap().moments().first - M1_CHI).abs() / M1_CHI)
        .fold(0.0, f64::max);
    let m1_0 = fd.initial.moments.first;
    let mut fd_raw: f64 = 0.0;
    let mut fd_accounted: f64 = 0.0;
    for r in &fd.records {
        fd_raw = fd_raw.max((r.moments.first - m1_0).abs() / m1_0);
        fd_accounted = fd_accounted.max((r.moments.first + fd.boundary_moment_loss(r) - m1_0).abs() / m1_0);
    }
    check(
        kernel_drift <= 1e-4 && fd_accounted <= 1e-2,
        format!("kernel drift {kernel_drift:.2e}, fd drift {fd_accounted:.2e} (raw {fd_raw:.2e})"),
    )
}

fn bounded_domain() -> Outcome {
    let grid = Grid1D::new(PI, 257).unwrap();
    let times = log_times(0.01, 100.0, 9);
    let mut worst: f64 = 0.0;
    for mass in [0.5, 2.0, 7.0] {
        let exact = ExplicitSolution::new(mass).unwrap();
        let state = SpectralState::new(exact.coefficients(), 100.0, &times, &default_ode_controls()).unwrap();
        for &t in &times {
            let f = evaluate_bounded(&state, t, &grid, Execution::default()).unwrap();
            worst = worst.max(exact.sup_distance(&f));
        }
    }

    let one = SineCoefficients::from_ic(
        &InitialCondition::Indicator { a: 0.0, b: PI, height: 1.0 },
        DEFAULT_MODES,
        Execution::default(),
    )
    .unwrap();
    let late = log_times(10.0, 1e3, 21);
    let state = SpectralState::new(one, 1e3, &late, &default_ode_controls()).unwrap();
    let star = ExplicitSolution::new(PI).unwrap();
    let scaled: Vec<f64> = late
        .iter()
        .map(|&t| star.sup_distance(&evaluate_bounded(&state, t, &grid, Execution::default()).unwrap()) * t * t)
        .collect();
    let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let settled = (scaled[20] - scaled[19]).abs() / scaled[20];
    check(
        worst <= 1e-10 && hi / lo <= 1.5 && settled < 1e-2,
        format!("single-mode error {worst:.2e}; t²·d in [{lo:.4e}, {hi:.4e}]"),
    )
}

fn profile_properties() -> Outcome {
    let ctl = KummerControls::default();
    let k = |a: f64, b: f64, z: f64| kummer_1f1(a, b, z, &ctl).unwrap();
    let mut identity: f64 = 0.0;
    for i in 0..=24 {
        let mu = 1.0 / 3.0 + (0.9 - 1.0 / 3.0) * i as f64 / 24.0;
        for j in 0..=200 {
            let xi = 0.05 * j as f64;
            let x = 0.5 * mu * xi * xi;
            let direct = xi * k(0.5 / mu, 1.5, -x);
            let transformed = xi * (-x).exp() * k(1.5 - 0.5 / mu, 1.5, x);
            identity = identity.max((direct - transformed).abs() / (1.0 + direct.abs()));
        }
    }

    let third = ProfileSpec::new(1.0 / 3.0).unwrap();
    let closed = (0..=600)
        .map(|j| {
            let xi = 0.01 * j as f64;
            (f_mu(&third, xi).unwrap() - xi * (-xi * xi / 6.0).exp()).abs()
        })
        .fold(0.0, f64::max);

    let mut tails = Vec::new();
    for mu in [0.5, 2.0 / 3.0] {
        let slope = f_mu_tail_exponent(&ProfileSpec::new(mu).unwrap(), 20.0, 200.0).map_err(|e| e.to_string())?;
        tails.push((slope, 1.0 - 1.0 / mu));
    }

    let mut euler: f64 = 0.0;
    for mu in [0.35, 0.5, 0.7, 0.9] {
        for xi in [0.5, 2.0, 5.0, 9.0] {
            let (alpha, z) = (0.5 / mu, -0.5 * mu * xi * xi);
            euler = euler.max((euler_integral_oracle(alpha, 1.5, z).unwrap() - k(alpha, 1.5, z)).abs());
        }
    }

    let tails_ok = tails.iter().all(|(s, want)| (s - want).abs() <= 0.05);
    let tail_text: Vec<String> = tails.iter().map(|(s, w)| format!("{s:.4}/{w:.4}")).collect();
    check(
        identity < 1e-10 && closed < 1e-12 && tails_ok && euler < 1e-8,
        format!(
            "identity {identity:.1e}, closed form {closed:.1e}, tails {}, euler {euler:.1e}",
            tail_text.join(" ")
        ),
    )
}

fn main() {
    let fd = long_fd_run();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("1 mass decay law", Box::new(|| mass_decay(&fd))),
        ("2 asymptotic constant", Box::new(asymptotic_constant)),
        ("3 heavy-tail exponent", Box::new(heavy_tail)),
        ("4 fd vs kernel", Box::new(cross_solver)),
        ("5 self-similar collapse", Box::new(self_similar_collapse)),
        ("6 convergence rate", Box::new(convergence_rate)),
        ("7 sup-norm bound", Box::new(|| sup_norm(&fd))),
        ("8 first moment", Box::new(|| first_moment(&fd))),
        ("9 bounded domain", Box::new(bounded_domain)),
        ("10 profile properties", Box::new(profile_properties)),
    ];
    let mut failures = 0;
    for (name, criterion) in criteria {
        let start = Instant::now();
        let outcome = criterion();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.1} s]"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {name}: {detail} [{secs:.1} s]");
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
