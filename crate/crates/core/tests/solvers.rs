use nldiff::fd::{self, FdConfig};
use nldiff::spectral::{default_ode_controls, evaluate_bounded};
use nldiff::{
    solve_a, Execution, Grid1D, InitialCondition, KernelControls, KernelRun, OdeControls, SineCoefficients,
    SpectralState,
};
use proptest::prelude::*;

fn indicator() -> impl Strategy<Value = InitialCondition> {
    (0.2f64..3.0, 0.2f64..2.0).prop_map(|(a, w)| InitialCondition::indicator(a, a + w).unwrap())
}

fn any_ic() -> impl Strategy<Value = InitialCondition> {
    prop_oneof![
        indicator(),
        (1.05f64..1.95).prop_map(|delta| InitialCondition::PowerTail { delta }),
        (0.5f64..3.0).prop_map(|m1| InitialCondition::SelfSimilarSeed { m1 }),
        (0.1f64..4.0).prop_map(|mass| InitialCondition::ScaledSine { mass }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn ic_json_round_trips(ic in any_ic()) {
        let text = serde_json::to_string(&ic).unwrap();
        let back: InitialCondition = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, ic);
    }

    #[test]
    fn fd_mass_decreases_and_stays_positive(ic in indicator(), theta in 0.3f64..1.0) {
        let grid = Grid1D::new(20.0, 401).unwrap();
        let mut cfg = FdConfig::new(grid, 2.0, vec![0.5, 2.0]);
        cfg.theta = theta;
        let run = fd::run(&cfg, &ic, Execution::default()).unwrap();
        let mut prev = run.initial.moments.mass;
        for r in &run.records {
            prop_assert!(r.moments.mass <= prev);
            prev = r.moments.mass;
        }
        for f in &run.fields {
            prop_assert!(f.values.iter().all(|v| *v >= 0.0));
            prop_assert!(f.sup_norm() <= 1.0);
        }
    }

    #[test]
    fn kernel_field_carries_the_ode_mass(ic in indicator(), t in 0.5f64..20.0) {
        let resc = solve_a(&ic, 20.0, &OdeControls::default()).unwrap();
        let grid = Grid1D::new(60.0, 6001).unwrap();
        let run = KernelRun::new(ic, resc, grid, KernelControls::default()).unwrap();
        let field = run.evaluate(t).unwrap();
        let m = run.rescaling().mass_at(t).unwrap();
        prop_assert!((field.mass() - m).abs() < 1e-5 * m, "{} vs {}", field.mass(), m);
    }

    #[test]
    fn spectral_policies_agree(ic in indicator(), t in 0.05f64..2.0) {
        let coeffs = SineCoefficients::from_ic(&ic, 64, Execution::Sequential).unwrap();
        let state = SpectralState::new(coeffs, 2.0, &[t], &default_ode_controls()).unwrap();
        let grid = Grid1D::new(std::f64::consts::PI, 257).unwrap();
        let a = evaluate_bounded(&state, t, &grid, Execution::Sequential).unwrap();
        let b = evaluate_bounded(&state, t, &grid, Execution::Parallel).unwrap();
        prop_assert_eq!(a.values, b.values);
    }
}

#[test]
fn fd_config_json_round_trips() {
    let mut cfg = FdConfig::new(Grid1D::new(10.0, 101).unwrap(), 5.0, vec![1.0, 5.0]);
    cfg.moment_times = vec![0.5, 2.5];
    cfg.dt = Some(1e-3);
    let back: FdConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
    assert_eq!(back, cfg);
}

fn seed_gap(dx: f64) -> f64 {
    let ic = InitialCondition::SelfSimilarSeed { m1: 1.5 };
    let grid = Grid1D::with_spacing(100.0, dx).unwrap();
    let run = fd::run(&FdConfig::new(grid, 10.0, vec![10.0]), &ic, Execution::default()).unwrap();
    let field = &run.fields[0];
    let resc = solve_a(&ic, 20.0, &OdeControls::default()).unwrap();
    let exact = KernelRun::new(ic, resc, grid, KernelControls::default()).unwrap().evaluate(field.time).unwrap();
    field.values.iter().zip(&exact.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

#[test]
fn fd_is_second_order_on_smooth_data() {
    let (coarse, fine) = (seed_gap(0.1), seed_gap(0.05));
    assert!(coarse < 1e-3, "gap {coarse}");
    let ratio = coarse / fine;
    assert!((3.6..4.4).contains(&ratio), "ratio {ratio}");
}
