use pass_covert::fusion::dep_exact;
use pass_covert::geometry::{place_wardens, SystemGeometry};
use pass_covert::mc_oracle::{mc_system_dep_many, McConfig};
use pass_covert::optimizer::{
    feasible_init, grid_search_baseline, optimize, random_search_baseline, refine, OptimizerConfig, PlacementGrid,
    PowerGrid,
};
use pass_covert::piecewise_dep::{min_dep_threshold, DepCurve};
use pass_covert::radiation::RadiationSpec;
use pass_covert::scenario::{DesignPoint, Scenario};
use pass_covert::{Error, Exec};

fn scenario(m: usize) -> Scenario {
    let wardens = place_wardens(m, (0.0, 4.0), (-2.0, 2.0), 21);
    let g = SystemGeometry::new(4.0, 4.0, 0.4, 5e9, 1.4, [2.1, -0.3, 0.0], wardens).unwrap();
    let noise = 10f64.powf(-11.4) * 1e-3;
    let spacing = 0.15 * g.guided_wavelength();
    Scenario::new(g, noise, noise, 0.1, spacing).unwrap()
}

fn nominal() -> DesignPoint {
    DesignPoint {
        p_c: 0.06,
        p_j_max: 0.04,
        radiation_c: RadiationSpec::Proportional { delta_sq: 0.5, n: 4 },
        radiation_j: RadiationSpec::Proportional { delta_sq: 0.5, n: 4 },
        x_c: vec![0.0; 4],
        x_j: vec![0.0; 4],
    }
}

fn quick(exec: Exec) -> OptimizerConfig {
    OptimizerConfig {
        k_max: 4,
        multistart: 3,
        exec,
        ..OptimizerConfig::default()
    }
}

#[test]
fn scenario_dep_agrees_with_simulation() {
    let s = scenario(5);
    let d = feasible_init(&s, &nominal(), &OptimizerConfig::default(), 0).unwrap();
    let profiles = s.profiles(&d).unwrap();
    let (tau_star, g, _) = min_dep_threshold(&profiles, s.grid_density).unwrap();
    let taus = [0.5 * tau_star, tau_star, 1.5 * tau_star];
    let trials = 200_000;
    let est = mc_system_dep_many(&profiles, &taus, &McConfig::new(trials, 3)).unwrap();
    for (&tau, e) in taus.iter().zip(&est) {
        let exact = dep_exact(tau, &profiles).unwrap();
        assert!((e.p_dep - exact).abs() <= 5.0 * e.stderr.max(1e-12), "tau={tau}: {} vs {exact}", e.p_dep);
    }
    assert!((est[1].p_dep - g).abs() <= 5.0 * est[1].stderr.max(1e-12));
}

#[test]
fn sequential_and_parallel_paths_agree_exactly() {
    let s = scenario(5);
    let a = optimize(&s, &nominal(), &quick(Exec::Sequential)).unwrap();
    let b = optimize(&s, &nominal(), &quick(Exec::Parallel)).unwrap();
    assert_eq!(a, b);

    let d = a.design().clone();
    let profiles = s.profiles(&d).unwrap();
    let taus = [1e-12, 1e-10, 1e-8];
    let cfg = McConfig::new(70_000, 5);
    let seq = mc_system_dep_many(&profiles, &taus, &cfg.clone().with_exec(Exec::Sequential)).unwrap();
    let par = mc_system_dep_many(&profiles, &taus, &cfg.with_exec(Exec::Parallel)).unwrap();
    assert_eq!(seq, par);

    let grid = PlacementGrid::Equispaced {
        centers: vec![1.0, 2.0, 3.0],
        pitches: vec![0.5],
    };
    let power = PowerGrid::Simplex { step: 0.1 };
    let g1 = grid_search_baseline(&s, &nominal(), &grid, &power, 0.1, Exec::Sequential).unwrap();
    let g2 = grid_search_baseline(&s, &nominal(), &grid, &power, 0.1, Exec::Parallel).unwrap();
    assert_eq!(g1, g2);
}

#[test]
fn refine_never_loses_rate_and_stays_covert() {
    let s = scenario(5);
    let cfg = quick(Exec::default());
    let first = optimize(&s, &nominal(), &cfg).unwrap();
    let again = refine(&s, first.design().clone(), &cfg).unwrap();
    assert!(again.acr >= first.acr());
    assert!(again.covertness.g >= 0.9 - 1e-9);
    assert_eq!(again.trace.records[0].acr, first.acr());
}

#[test]
fn refine_rejects_designs_that_are_not_covert() {
    let s = scenario(5);
    let mut d = feasible_init(&s, &nominal(), &OptimizerConfig::default(), 0).unwrap();
    d.p_c = 0.1 - d.p_j_max;
    assert!(s.covertness(&d).unwrap().g < 0.9);
    assert!(matches!(refine(&s, d, &OptimizerConfig::default()), Err(Error::NoFeasiblePower)));
}

#[test]
fn optimizer_beats_random_designs() {
    let s = scenario(5);
    let cfg = quick(Exec::default());
    let opt = optimize(&s, &nominal(), &cfg).unwrap();
    let random = random_search_baseline(&s, &nominal(), 20, 4, 0.1, Exec::default()).unwrap();
    assert!(opt.acr() > random.mean_acr);
    assert!(random.best_acr >= random.mean_acr);
}

#[test]
fn dep_curve_survives_a_file_round_trip() {
    let s = scenario(3);
    let d = feasible_init(&s, &nominal(), &OptimizerConfig::default(), 0).unwrap();
    let (_, _, curve) = min_dep_threshold(&s.profiles(&d).unwrap(), 16).unwrap();
    let mut buf = Vec::new();
    curve.write_csv(&mut buf).unwrap();
    let back = DepCurve::read_csv(buf.as_slice()).unwrap();
    assert_eq!(back.taus, curve.taus);
    assert_eq!(back.values, curve.values);
    assert_eq!(back.tau_star, curve.tau_star);
    assert_eq!(back.g_star, curve.g_star);
}
