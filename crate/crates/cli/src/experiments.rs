//! The five experiment drivers behind the CLI subcommands.
//!
//! Each driver returns named outputs; sweep points run in parallel but rows
//! are assembled in sweep order, so files are reproducible byte for byte.

use pass_covert::fusion::dep_exact;
use pass_covert::local_detect::{p_fa, p_md, WardenProfile};
use pass_covert::mc_oracle::{
    binomial_stderr, mc_avg_rate, mc_local_many, mc_system_dep_many, McConfig, RateSampling,
};
use pass_covert::optimizer::{
    grid_search_baseline, optimize, random_search_baseline, OptimizerConfig, OptimizerTrace, PlacementGrid,
    PowerGrid,
};
use pass_covert::par::map_range;
use pass_covert::piecewise_dep::{build_breakpoints, dep_piecewise, min_dep_threshold};
use pass_covert::radiation::RadiationModel;
use pass_covert::rate::avg_covert_rate;
use pass_covert::scenario::{DesignPoint, Scenario};
use pass_covert::Exec;

use crate::config::ScenarioConfig;
use crate::records::{Table, Value};
use crate::RunError;

/// A named artifact: a table written in the chosen format, or raw text.
#[derive(Debug, Clone, PartialEq)]
pub enum Output {
    Table { name: String, table: Table },
    Text { name: String, text: String },
}

impl Output {
    fn table(name: impl Into<String>, table: Table) -> Self {
        Output::Table {
            name: name.into(),
            table,
        }
    }
}

/// `n` evenly spaced points on `[lo, hi]`; a single point sits at `lo`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn cases(cfg: &ScenarioConfig) -> Vec<(RadiationModel, usize)> {
    cfg.models
        .iter()
        .flat_map(|&model| cfg.warden_counts.iter().map(move |&m| (model, m)))
        .collect()
}

fn name(model: RadiationModel) -> Value {
    model.name().into()
}

fn alpha3_max(profiles: &[WardenProfile]) -> f64 {
    profiles.iter().map(|w| w.alpha3()).fold(0.0, f64::max)
}

/// Exact, piecewise (when slopes are common) and optional Monte Carlo DEP over a
/// threshold grid, plus the minimizing threshold per curve.
pub fn run_dep_vs_tau(cfg: &ScenarioConfig) -> Result<Vec<Output>, RunError> {
    let opts = &cfg.file.dep_curve;
    let mut curve = Table::new(&["model", "m", "tau", "dep_exact", "dep_piecewise", "mc_dep", "mc_stderr"]);
    let mut summary = Table::new(&["model", "m", "tau_star", "g_star", "ordering_case", "u_shaped"]);
    for (model, m) in cases(cfg) {
        let scenario = cfg.scenario(m)?;
        let profiles = scenario.profiles(&cfg.nominal(model))?;
        let taus = linspace(0.0, opts.tau_max_factor * alpha3_max(&profiles), opts.points);
        let mc = if opts.mc_trials > 0 {
            let mc_cfg = McConfig::new(opts.mc_trials, cfg.seed());
            Some(mc_system_dep_many(&profiles, &taus, &mc_cfg)?)
        } else {
            None
        };
        for (i, &tau) in taus.iter().enumerate() {
            let piecewise = dep_piecewise(tau, &profiles).ok();
            let est = mc.as_ref().map(|v| v[i]);
            curve.push(vec![
                name(model),
                m.into(),
                tau.into(),
                dep_exact(tau, &profiles)?.into(),
                piecewise.into(),
                est.map(|e| e.p_dep).into(),
                est.map(|e| e.stderr).into(),
            ]);
        }
        let (tau_star, g_star, _) = min_dep_threshold(&profiles, scenario.grid_density)?;
        let table = build_breakpoints(&profiles)?;
        let u_shaped = g_star < 1.0 && tau_star > table.sigma_sq && tau_star < table.alpha3.max();
        summary.push(vec![
            name(model),
            m.into(),
            tau_star.into(),
            g_star.into(),
            table.ordering_case.name().into(),
            u_shaped.into(),
        ]);
    }
    Ok(vec![Output::table("dep_curve", curve), Output::table("dep_curve_summary", summary)])
}

/// Worst-case DEP (threshold re-minimized per point) across a jamming sweep.
pub fn run_dep_vs_jamming(cfg: &ScenarioConfig) -> Result<Vec<Output>, RunError> {
    let opts = &cfg.file.dep_vs_jamming;
    let sweep = linspace(opts.p_j_min_mw * 1e-3, opts.p_j_max_mw * 1e-3, opts.points);
    let mut rows = Table::new(&["model", "m", "p_j_max", "tau_star", "g"]);
    let mut summary = Table::new(&["model", "m", "p_j_max_at_min", "g_min", "interior_minimum"]);
    for (model, m) in cases(cfg) {
        let scenario = cfg.scenario(m)?;
        let base = cfg.nominal(model);
        let points = map_range(Exec::default(), sweep.len(), |i| {
            let mut d = base.clone();
            d.p_j_max = sweep[i];
            scenario.covertness(&d)
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
        for (p, c) in sweep.iter().zip(&points) {
            rows.push(vec![name(model), m.into(), (*p).into(), c.tau_star.into(), c.g.into()]);
        }
        let g: Vec<f64> = points.iter().map(|c| c.g).collect();
        let (k, g_min) = argmin(&g);
        summary.push(vec![
            name(model),
            m.into(),
            sweep[k].into(),
            g_min.into(),
            has_interior_minimum(&g).into(),
        ]);
    }
    Ok(vec![Output::table("dep_vs_jamming", rows), Output::table("dep_vs_jamming_summary", summary)])
}

/// First index of the smallest value.
pub fn argmin(v: &[f64]) -> (usize, f64) {
    v.iter()
        .copied()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, x)| if x < best.1 { (i, x) } else { best })
}

/// The minimum sits strictly inside the sweep and below both ends.
pub fn has_interior_minimum(v: &[f64]) -> bool {
    if v.len() < 3 {
        return false;
    }
    let (k, g) = argmin(v);
    k > 0 && k + 1 < v.len() && g < v[0] - 1e-9 && g < v[v.len() - 1] - 1e-9
}

/// Average covert rate across a covert-power sweep at fixed jamming.
pub fn run_acr_vs_pc(cfg: &ScenarioConfig) -> Result<Vec<Output>, RunError> {
    let opts = &cfg.file.acr_curve;
    let sweep = linspace(opts.p_c_min_mw * 1e-3, opts.p_c_max_mw * 1e-3, opts.points);
    let mut rows = Table::new(&["model", "m", "p_c", "acr", "g"]);
    for (model, m) in cases(cfg) {
        let scenario = cfg.scenario(m)?;
        let base = cfg.nominal(model);
        let points = map_range(Exec::default(), sweep.len(), |i| {
            let mut d = base.clone();
            d.p_c = sweep[i];
            Ok::<_, pass_covert::Error>((scenario.acr(&d)?, scenario.covertness(&d)?.g))
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
        for (p, (acr, g)) in sweep.iter().zip(points) {
            rows.push(vec![name(model), m.into(), (*p).into(), acr.into(), g.into()]);
        }
    }
    Ok(vec![Output::table("acr_curve", rows)])
}

fn trace_table(trace: &OptimizerTrace) -> Table {
    let mut t = Table::new(&[
        "outer",
        "surrogate",
        "acr",
        "g",
        "tau_star",
        "slack",
        "power_step",
        "position_step",
        "stalled",
    ]);
    for r in &trace.records {
        t.push(vec![
            r.outer.into(),
            r.surrogate.into(),
            r.acr.into(),
            r.g.into(),
            r.tau_star.into(),
            r.slack.into(),
            r.power_step.into(),
            r.position_step.into(),
            r.stalled.into(),
        ]);
    }
    t
}

pub fn optimizer_config(cfg: &ScenarioConfig, epsilon: f64, multistart: usize) -> OptimizerConfig {
    let o = &cfg.file.optimizer;
    OptimizerConfig {
        epsilon,
        k_max: o.k_max,
        t_max: o.t_max,
        delta_out: o.delta_out,
        delta_in: o.delta_in,
        multistart,
        proximal_weight: o.proximal_weight,
        fd_step: o.fd_step,
        rng_seed: cfg.seed(),
        exec: Exec::default(),
    }
}

pub fn placement_grid(cfg: &ScenarioConfig, scenario: &Scenario) -> PlacementGrid {
    let o = &cfg.file.optimizer;
    let len = scenario.geometry.length();
    let centers = if o.grid_centers == 1 {
        vec![0.5 * len]
    } else {
        linspace(0.0, len, o.grid_centers)
    };
    PlacementGrid::Equispaced {
        centers,
        pitches: o.grid_pitches_m.clone(),
    }
}

/// Optimizer at each multistart count against grid and random baselines.
pub fn run_optimizer_study(cfg: &ScenarioConfig) -> Result<Vec<Output>, RunError> {
    let o = &cfg.file.optimizer;
    let mut rows = Table::new(&["model", "m", "epsilon", "method", "acr", "g", "tau_star"]);
    let mut outputs = Vec::new();
    for (model, m) in cases(cfg) {
        let scenario = cfg.scenario(m)?;
        let nominal = cfg.nominal(model);
        for &eps in &o.epsilons {
            let tag = format!("{}_m{m}_eps{eps}", model.name());
            let mut record = |method: String, d: &DesignPoint, acr: f64| -> Result<(), RunError> {
                let c = scenario.covertness(d)?;
                rows.push(vec![name(model), m.into(), eps.into(), method.into(), acr.into(), c.g.into(), c.tau_star.into()]);
                Ok(())
            };
            for &k in &o.multistart {
                let result = optimize(&scenario, &nominal, &optimizer_config(cfg, eps, k))?;
                record(format!("mm_bcd_sca_K{k}"), result.design(), result.acr())?;
                for run in &result.runs {
                    outputs.push(Output::table(
                        format!("traces/{tag}_K{k}_start{}", run.start),
                        trace_table(&run.trace),
                    ));
                }
                outputs.push(Output::Text {
                    name: format!("designs/{tag}_K{k}.toml"),
                    text: cfg.design_toml(result.design()),
                });
            }
            let grid = grid_search_baseline(
                &scenario,
                &nominal,
                &placement_grid(cfg, &scenario),
                &PowerGrid::Simplex { step: o.grid_power_step },
                eps,
                Exec::default(),
            )?;
            record("grid".into(), &grid.design, grid.acr)?;
            outputs.push(Output::Text {
                name: format!("designs/{tag}_grid.toml"),
                text: cfg.design_toml(&grid.design),
            });
            let random = random_search_baseline(&scenario, &nominal, o.random_trials, cfg.seed(), eps, Exec::default())?;
            record("random_mean".into(), &random.best, random.mean_acr)?;
        }
    }
    outputs.insert(0, Output::table("optimize", rows));
    Ok(outputs)
}

/// Monte Carlo cross-checks of the local, fused and rate closed forms.
///
/// `z` is the deviation in standard errors; the standard error uses the
/// closed-form probability, so deterministic regimes must match exactly.
pub fn run_validate(cfg: &ScenarioConfig) -> Result<Vec<Output>, RunError> {
    let v = &cfg.file.validate;
    let mut rows = Table::new(&["check", "model", "m", "tau", "closed_form", "mc", "stderr", "z", "pass"]);
    let mut push = |check: &str, model: RadiationModel, m: usize, tau: Option<f64>, exact: f64, mc: f64, se: f64| {
        let z = if se > 0.0 { Some((mc - exact) / se) } else { None };
        let pass = match z {
            Some(z) => z.abs() <= 4.0,
            None => mc == exact,
        };
        rows.push(vec![
            check.into(),
            name(model),
            m.into(),
            tau.into(),
            exact.into(),
            mc.into(),
            se.into(),
            z.into(),
            pass.into(),
        ]);
    };
    for (model, m) in cases(cfg) {
        let scenario = cfg.scenario(m)?;
        let design = cfg.nominal(model);
        let profiles = scenario.profiles(&design)?;
        let sigma = scenario.sigma_w_sq;
        let top = alpha3_max(&profiles);
        // interior points only: the ends are the trivial all-one regimes
        let taus: Vec<f64> = linspace(sigma, top, v.thresholds + 2)[1..=v.thresholds].to_vec();
        let mc_cfg = McConfig::new(v.mc_trials, cfg.seed());

        let local = mc_local_many(&profiles[0], &taus, &mc_cfg);
        for (&tau, est) in taus.iter().zip(&local) {
            let fa = p_fa(tau, &profiles[0]);
            let md = p_md(tau, &profiles[0]);
            push("local_fa", model, m, Some(tau), fa, est.p_fa, binomial_stderr(fa, v.mc_trials));
            push("local_md", model, m, Some(tau), md, est.p_md, binomial_stderr(md, v.mc_trials));
        }

        let system = mc_system_dep_many(&profiles, &taus, &mc_cfg)?;
        for (&tau, est) in taus.iter().zip(&system) {
            let (fa, md) = pass_covert::fusion::dep_parts(tau, &profiles)?;
            let se = (binomial_stderr(fa, v.mc_trials).powi(2) + binomial_stderr(md, v.mc_trials).powi(2)).sqrt();
            push("system_dep", model, m, Some(tau), fa + md, est.p_dep, se);
        }

        let budget = scenario.link_budget(&design)?;
        let rate = mc_avg_rate(&budget, v.rate_samples, cfg.seed(), RateSampling::Plain, Exec::default());
        push(
            "rate",
            model,
            m,
            None,
            avg_covert_rate(&budget, &scenario.rule),
            rate.mean,
            rate.stderr,
        );
    }
    Ok(vec![Output::table("validate", rows)])
}
