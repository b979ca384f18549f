//! Covert-rate maximization under the worst-case covertness constraint.
//!
//! The outer loop builds a concave minorizer of the average rate around the
//! current design and linearizes the covertness constraint at the current
//! minimizing threshold. The inner loop alternates a power/radiation block
//! (projected gradient on the minorizer) with a position block (proximal
//! linearized step projected onto the spacing polytope). Every candidate is
//! checked against the true constraint and shrunk toward its starting point
//! until it passes.
//!
//! Because antenna phases are fixed by positions and amplitudes by the
//! radiation fractions, the lifted covariance form of the power subproblem
//! collapses to a smooth program over powers and radiation parameters,
//! which is solved directly.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mc_oracle::{stream_rng, uniform};
use crate::par::{map_range, Exec};
use crate::piecewise_dep::dep_gradient;
use crate::projection::{dykstra, project_capped_simplex, project_spacing, HalfSpace};
use crate::radiation::RadiationSpec;
use crate::rate::{link_budget, MmSurrogate};
use crate::scenario::{Covertness, DesignPoint, Scenario};

/// Logit bound for General and Proportional coupling parameters.
const LOGIT_BOUND: f64 = 10.0;
/// Smallest `N rho` under the Equal law.
const EQUAL_FLOOR: f64 = 1e-3;
const SHRINK_STEPS: usize = 12;
const BACKTRACK_STEPS: usize = 40;
const MAX_GRADIENT_STEPS: usize = 50;
const ARMIJO: f64 = 1e-4;
const INIT_STREAM: u64 = 1 << 42;
const RANDOM_STREAM: u64 = 1 << 43;

/// Solver settings.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// Covertness level: require `min_tau P_dep >= 1 - epsilon`.
    pub epsilon: f64,
    pub k_max: usize,
    pub t_max: usize,
    pub delta_out: f64,
    pub delta_in: f64,
    pub multistart: usize,
    pub proximal_weight: f64,
    pub fd_step: f64,
    pub rng_seed: u64,
    pub exec: Exec,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            epsilon: 0.1,
            k_max: 30,
            t_max: 5,
            delta_out: 1e-6,
            delta_in: 1e-6,
            multistart: 1,
            proximal_weight: 1.0,
            fd_step: 1e-6,
            rng_seed: 0,
            exec: Exec::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::ParamOutOfRange {
                name: "epsilon",
                value: self.epsilon,
            });
        }
        for (name, v) in [
            ("delta_out", self.delta_out),
            ("delta_in", self.delta_in),
            ("fd_step", self.fd_step),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::ParamOutOfRange { name, value: v });
            }
        }
        if !(self.proximal_weight >= 0.0) {
            return Err(Error::ParamOutOfRange {
                name: "proximal_weight",
                value: self.proximal_weight,
            });
        }
        if self.multistart == 0 {
            return Err(Error::ParamOutOfRange {
                name: "multistart",
                value: 0.0,
            });
        }
        Ok(())
    }

    fn target(&self) -> f64 {
        1.0 - self.epsilon
    }
}

/// One accepted outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub outer: usize,
    /// Minorizer built at the previous iterate, evaluated at this one.
    pub surrogate: f64,
    pub acr: f64,
    pub g: f64,
    pub tau_star: f64,
    /// `g - (1 - epsilon)`.
    pub slack: f64,
    pub power_step: f64,
    pub position_step: f64,
    /// Some block made no progress in this iteration.
    pub stalled: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OptimizerTrace {
    pub records: Vec<IterationRecord>,
}

/// Outcome of one seeded start.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub start: usize,
    pub design: DesignPoint,
    pub acr: f64,
    pub covertness: Covertness,
    pub trace: OptimizerTrace,
}

/// Best start plus every start's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerResult {
    pub best: usize,
    pub runs: Vec<RunOutcome>,
}

impl OptimizerResult {
    pub fn best_run(&self) -> &RunOutcome {
        &self.runs[self.best]
    }
    pub fn design(&self) -> &DesignPoint {
        &self.best_run().design
    }
    pub fn acr(&self) -> f64 {
        self.best_run().acr
    }
}

/// Runs `multistart` independent starts and keeps the best true rate.
pub fn optimize(scenario: &Scenario, nominal: &DesignPoint, cfg: &OptimizerConfig) -> Result<OptimizerResult> {
    cfg.validate()?;
    let runs = map_range(cfg.exec, cfg.multistart, |s| run_single(scenario, nominal, cfg, s))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let mut best = 0;
    for (i, r) in runs.iter().enumerate() {
        if r.acr > runs[best].acr {
            best = i;
        }
    }
    Ok(OptimizerResult { best, runs })
}

fn run_single(scenario: &Scenario, nominal: &DesignPoint, cfg: &OptimizerConfig, start: usize) -> Result<RunOutcome> {
    let init = feasible_init(scenario, nominal, cfg, start)?;
    let mut run = refine(scenario, init, cfg)?;
    run.start = start;
    Ok(run)
}

/// Runs the MM loop from a given design, which must satisfy every constraint.
pub fn refine(scenario: &Scenario, mut design: DesignPoint, cfg: &OptimizerConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    scenario.check_design(&design)?;
    if scenario.covertness(&design)?.g < cfg.target() {
        return Err(Error::NoFeasiblePower);
    }
    let mut cov = scenario.covertness(&design)?;
    let mut acr = scenario.acr(&design)?;
    let mut trace = OptimizerTrace::default();
    trace.records.push(IterationRecord {
        outer: 0,
        surrogate: acr,
        acr,
        g: cov.g,
        tau_star: cov.tau_star,
        slack: cov.g - cfg.target(),
        power_step: 0.0,
        position_step: 0.0,
        stalled: false,
    });
    let mut last_surrogate = acr;
    for k in 1..=cfg.k_max {
        let anchor = design.clone();
        let surrogate = MmSurrogate::new(&link_budget(&anchor, scenario)?, &scenario.rule);
        let lin = Linearization {
            z: to_block(&anchor),
            x: positions(&anchor),
            g: cov.g,
            grad_z: block_gradient(scenario, &anchor, cov.tau_star, cfg.fd_step)?,
        };
        let ctx = BlockContext {
            scenario,
            surrogate: &surrogate,
            lin: &lin,
            cfg,
        };
        let mut y = anchor.clone();
        let (mut power_step, mut position_step, mut stalled) = (0.0, 0.0, false);
        for _ in 0..cfg.t_max.max(1) {
            let p = ctx.power_block(&y)?;
            let q = ctx.position_block(&p.design)?;
            power_step += p.step;
            position_step += q.step;
            stalled |= p.stalled || q.stalled;
            y = q.design;
            if p.step + q.step <= cfg.delta_in {
                break;
            }
        }
        let value = surrogate.value(&link_budget(&y, scenario)?);
        if value < last_surrogate {
            break;
        }
        let new_cov = scenario.covertness(&y)?;
        let new_acr = scenario.acr(&y)?;
        trace.records.push(IterationRecord {
            outer: k,
            surrogate: value,
            acr: new_acr,
            g: new_cov.g,
            tau_star: new_cov.tau_star,
            slack: new_cov.g - cfg.target(),
            power_step,
            position_step,
            stalled,
        });
        let done = (new_acr - acr).abs() <= cfg.delta_out;
        design = y;
        cov = new_cov;
        acr = new_acr;
        last_surrogate = value;
        if done {
            break;
        }
    }
    Ok(RunOutcome {
        start: 0,
        design,
        acr,
        covertness: cov,
        trace,
    })
}

/// A feasible starting point.
///
/// Start 0 uses equally spaced antennas and the nominal radiation laws and
/// jamming power; later starts draw positions, radiation parameters and the
/// power split from a stream keyed by `(rng_seed, start)`. The covert power
/// is then bisected against the true covertness constraint, which always
/// holds at `P_C = 0` because both hypotheses then look identical.
pub fn feasible_init(scenario: &Scenario, nominal: &DesignPoint, cfg: &OptimizerConfig, start: usize) -> Result<DesignPoint> {
    let len = scenario.geometry.length();
    let spacing = scenario.min_spacing;
    for n in [nominal.radiation_c.n(), nominal.radiation_j.n()] {
        if n >= 2 && (n - 1) as f64 * spacing > len {
            return Err(Error::InfeasibleGeometry {
                count: n,
                spacing,
                length: len,
            });
        }
    }
    let mut rng = stream_rng(cfg.rng_seed, INIT_STREAM + start as u64, 0);
    let mut d = nominal.clone();
    if start == 0 {
        d.x_c = equispaced(nominal.radiation_c.n(), len);
        d.x_j = equispaced(nominal.radiation_j.n(), len);
        d.radiation_c = clamp_radiation(&nominal.radiation_c)?;
        d.radiation_j = clamp_radiation(&nominal.radiation_j)?;
        d.p_j_max = nominal.p_j_max.min(scenario.p_max);
        d.p_c = nominal.p_c.min(scenario.p_max - d.p_j_max).max(0.0);
    } else {
        d.x_c = random_positions(&mut rng, nominal.radiation_c.n(), spacing, len);
        d.x_j = random_positions(&mut rng, nominal.radiation_j.n(), spacing, len);
        d.radiation_c = random_radiation(&mut rng, &nominal.radiation_c, 2.0)?;
        d.radiation_j = random_radiation(&mut rng, &nominal.radiation_j, 2.0)?;
        d.p_j_max = scenario.p_max * (0.2 + 0.6 * uniform(&mut rng));
        d.p_c = scenario.p_max - d.p_j_max;
    }
    fit_covert_power(scenario, d, cfg.target())
}

/// Largest covert power not above `design.p_c` meeting the constraint.
///
/// `g` is continuous and non-increasing in `P_C`, so the boundary is
/// bracketed by regula falsi with the Illinois modification. The returned
/// power is the feasible end of a bracket narrower than `1e-9 P_C`.
pub fn fit_covert_power(scenario: &Scenario, mut design: DesignPoint, target: f64) -> Result<DesignPoint> {
    let hi_power = design.p_c;
    let slack = |p: f64, d: &mut DesignPoint| -> Result<f64> {
        d.p_c = p;
        Ok(scenario.covertness(d)?.g - target)
    };
    let mut f_hi = slack(hi_power, &mut design)?;
    if f_hi >= 0.0 {
        return Ok(design);
    }
    let mut f_lo = slack(0.0, &mut design)?;
    if f_lo < 0.0 {
        return Err(Error::NoFeasiblePower);
    }
    let (mut lo, mut hi) = (0.0, hi_power);
    let mut side = 0i8;
    for _ in 0..100 {
        if hi - lo <= 1e-9 * hi_power {
            break;
        }
        let mut p = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        if !(p > lo && p < hi) {
            p = 0.5 * (lo + hi);
        }
        let f = slack(p, &mut design)?;
        if f >= 0.0 {
            lo = p;
            f_lo = f;
            if side == 1 {
                f_hi *= 0.5;
            }
            side = 1;
        } else {
            hi = p;
            f_hi = f;
            if side == -1 {
                f_lo *= 0.5;
            }
            side = -1;
        }
    }
    design.p_c = lo;
    Ok(design)
}

fn equispaced(n: usize, len: f64) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5 * len],
        _ => (0..n).map(|i| len * i as f64 / (n - 1) as f64).collect(),
    }
}

fn random_positions(rng: &mut ChaCha8Rng, n: usize, spacing: f64, len: f64) -> Vec<f64> {
    let free = (len - n.saturating_sub(1) as f64 * spacing).max(0.0);
    let mut u: Vec<f64> = (0..n).map(|_| free * uniform(rng)).collect();
    u.sort_by(f64::total_cmp);
    u.into_iter().enumerate().map(|(i, v)| v + i as f64 * spacing).collect()
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

fn random_radiation(rng: &mut ChaCha8Rng, r: &RadiationSpec, logit_range: f64) -> Result<RadiationSpec> {
    let mut draw = || sigmoid(logit_range * (2.0 * uniform(rng) - 1.0));
    let params: Vec<f64> = match r {
        RadiationSpec::Equal { n, .. } => vec![(0.5 + 0.5 * draw()) / *n as f64],
        _ => (0..r.params().len()).map(|_| draw()).collect(),
    };
    r.with_params(&params)
}

fn clamp_radiation(r: &RadiationSpec) -> Result<RadiationSpec> {
    let z = radiation_to_block(r);
    radiation_from_block(r, &z)
}

// ---- block coordinates -------------------------------------------------

fn radiation_to_block(r: &RadiationSpec) -> Vec<f64> {
    match r {
        RadiationSpec::Equal { rho, n } => vec![(rho * *n as f64).clamp(EQUAL_FLOOR, 1.0)],
        _ => r
            .params()
            .iter()
            .map(|&p| logit(p).clamp(-LOGIT_BOUND, LOGIT_BOUND))
            .collect(),
    }
}

fn radiation_from_block(r: &RadiationSpec, z: &[f64]) -> Result<RadiationSpec> {
    let params: Vec<f64> = match r {
        RadiationSpec::Equal { n, .. } => vec![z[0] / *n as f64],
        _ => z.iter().map(|&t| sigmoid(t)).collect(),
    };
    r.with_params(&params)
}

/// `d primitive / d block` per radiation coordinate.
fn radiation_jacobian(r: &RadiationSpec, z: &[f64]) -> Vec<f64> {
    match r {
        RadiationSpec::Equal { n, .. } => vec![1.0 / *n as f64],
        _ => z
            .iter()
            .map(|&t| {
                let s = sigmoid(t);
                s * (1.0 - s)
            })
            .collect(),
    }
}

fn radiation_bounds(r: &RadiationSpec) -> (f64, f64) {
    match r {
        RadiationSpec::Equal { .. } => (EQUAL_FLOOR, 1.0),
        _ => (-LOGIT_BOUND, LOGIT_BOUND),
    }
}

/// Power-block coordinates `[P_C/P_max, P_J/P_max, radiation_C.., radiation_J..]`.
fn to_block(d: &DesignPoint) -> Vec<f64> {
    // powers are normalized by the caller's budget in `BlockContext`
    let mut z = vec![d.p_c, d.p_j_max];
    z.extend(radiation_to_block(&d.radiation_c));
    z.extend(radiation_to_block(&d.radiation_j));
    z
}

fn positions(d: &DesignPoint) -> Vec<f64> {
    let mut x = d.x_c.clone();
    x.extend(&d.x_j);
    x
}

/// Danskin gradient in block coordinates: powers (in watts), radiation, positions.
fn block_gradient(scenario: &Scenario, d: &DesignPoint, tau_star: f64, fd_step: f64) -> Result<Vec<f64>> {
    let mut g = dep_gradient(scenario, d, tau_star, fd_step)?;
    let layout = d.layout();
    let zc = radiation_to_block(&d.radiation_c);
    let zj = radiation_to_block(&d.radiation_j);
    for (i, j) in layout.rad_c.clone().zip(radiation_jacobian(&d.radiation_c, &zc)) {
        g[i] *= j;
    }
    for (i, j) in layout.rad_j.clone().zip(radiation_jacobian(&d.radiation_j, &zj)) {
        g[i] *= j;
    }
    Ok(g)
}

struct Linearization {
    z: Vec<f64>,
    x: Vec<f64>,
    g: f64,
    /// Gradient over `[z.., x..]`.
    grad_z: Vec<f64>,
}

impl Linearization {
    fn nz(&self) -> usize {
        self.z.len()
    }

    /// Value of the affine model at `(z, x)`.
    fn model(&self, z: &[f64], x: &[f64]) -> f64 {
        let (gz, gx) = self.grad_z.split_at(self.nz());
        let dz: f64 = gz.iter().zip(z).zip(&self.z).map(|((g, a), b)| g * (a - b)).sum();
        let dx: f64 = gx.iter().zip(x).zip(&self.x).map(|((g, a), b)| g * (a - b)).sum();
        self.g + dz + dx
    }
}

struct BlockStep {
    design: DesignPoint,
    step: f64,
    stalled: bool,
}

struct BlockContext<'a> {
    scenario: &'a Scenario,
    surrogate: &'a MmSurrogate,
    lin: &'a Linearization,
    cfg: &'a OptimizerConfig,
}

impl BlockContext<'_> {
    fn value(&self, d: &DesignPoint) -> Result<f64> {
        Ok(self.surrogate.value(&link_budget(d, self.scenario)?))
    }

    fn truly_feasible(&self, d: &DesignPoint) -> Result<bool> {
        Ok(self.scenario.check_design(d).is_ok() && self.scenario.covertness(d)?.g >= self.cfg.target())
    }

    /// Moves from `from` toward `to` by halving until the surrogate has not
    /// dropped. A candidate violating the true constraint first has its
    /// covert power lowered onto the constraint boundary.
    fn safeguard(&self, from: &DesignPoint, to: &DesignPoint, f0: f64) -> Result<Option<DesignPoint>> {
        let a = from.to_vector();
        let b = to.to_vector();
        let mut beta = 1.0;
        for _ in 0..SHRINK_STEPS {
            let v: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + beta * (y - x)).collect();
            let cand = from.from_vector(&v)?;
            if self.scenario.check_design(&cand).is_ok() && self.value(&cand)? >= f0 {
                let cand = fit_covert_power(self.scenario, cand, self.cfg.target())?;
                if self.value(&cand)? >= f0 && self.truly_feasible(&cand)? {
                    return Ok(Some(cand));
                }
            }
            beta *= 0.5;
        }
        Ok(None)
    }

    fn design_from_block(&self, base: &DesignPoint, z: &[f64]) -> Result<DesignPoint> {
        let pm = self.scenario.p_max;
        let nc = base.radiation_c.params().len();
        let mut d = base.clone();
        d.p_c = z[0] * pm;
        d.p_j_max = z[1] * pm;
        d.radiation_c = radiation_from_block(&base.radiation_c, &z[2..2 + nc])?;
        d.radiation_j = radiation_from_block(&base.radiation_j, &z[2 + nc..])?;
        Ok(d)
    }

    fn normalized_block(&self, d: &DesignPoint) -> Vec<f64> {
        let mut z = to_block(d);
        z[0] /= self.scenario.p_max;
        z[1] /= self.scenario.p_max;
        z
    }

    /// Gradient of the minorizer over normalized block coordinates.
    fn power_gradient(&self, base: &DesignPoint, z: &[f64]) -> Result<Vec<f64>> {
        let d = self.design_from_block(base, z)?;
        let budget = link_budget(&d, self.scenario)?;
        let (fs, fi) = self.surrogate.gradient(&budget);
        let pm = self.scenario.p_max;
        let a_c = if d.p_c > 0.0 { budget.s / d.p_c } else { self.gain_c(&d)? };
        let a_j = if d.p_j_max > 0.0 { budget.i / d.p_j_max } else { self.gain_j(&d)? };
        let mut g = vec![fs * pm * a_c, fi * pm * a_j];
        let nc = base.radiation_c.params().len();
        let bounds_c = radiation_bounds(&base.radiation_c);
        let bounds_j = radiation_bounds(&base.radiation_j);
        for i in 2..z.len() {
            let (lo, hi) = if i < 2 + nc { bounds_c } else { bounds_j };
            let h = 1e-6 * z[i].abs().max(1.0);
            let eval = |delta: f64| -> Result<f64> {
                let mut v = z.to_vec();
                v[i] = (v[i] + delta).clamp(lo, hi);
                let dd = self.design_from_block(base, &v)?;
                Ok(if i < 2 + nc { self.gain_c(&dd)? } else { self.gain_j(&dd)? })
            };
            let (up, down) = ((z[i] + h).min(hi), (z[i] - h).max(lo));
            let dg = (eval(up - z[i])? - eval(down - z[i])?) / (up - down);
            g.push(if i < 2 + nc { fs * d.p_c * dg } else { fi * d.p_j_max * dg });
        }
        Ok(g)
    }

    fn gain_c(&self, d: &DesignPoint) -> Result<f64> {
        let g = &self.scenario.geometry;
        g.gain(crate::geometry::Side::C, &d.x_c, &d.radiation_c.fractions()?, g.bob())
    }

    fn gain_j(&self, d: &DesignPoint) -> Result<f64> {
        let g = &self.scenario.geometry;
        g.gain(crate::geometry::Side::J, &d.x_j, &d.radiation_j.fractions()?, g.bob())
    }

    /// Projection onto powers-in-simplex, radiation boxes and the linearized
    /// covertness half-space, all in normalized block coordinates.
    fn project_power(&self, base: &DesignPoint, z: &[f64]) -> Vec<f64> {
        let nc = base.radiation_c.params().len();
        let bc = radiation_bounds(&base.radiation_c);
        let bj = radiation_bounds(&base.radiation_j);
        let pm = self.scenario.p_max;
        let boxes = |v: &[f64]| -> Vec<f64> {
            let mut out = project_capped_simplex(&v[..2], 1.0);
            for (i, &t) in v.iter().enumerate().skip(2) {
                let (lo, hi) = if i < 2 + nc { bc } else { bj };
                out.push(t.clamp(lo, hi));
            }
            out
        };
        // linear model in normalized coordinates with positions held at base
        let nz = self.lin.nz();
        let mut normal = self.lin.grad_z[..nz].to_vec();
        normal[0] *= pm;
        normal[1] *= pm;
        let mut z_anchor = self.lin.z.clone();
        z_anchor[0] /= pm;
        z_anchor[1] /= pm;
        let x = positions(base);
        let pos_term = self.lin.model(&self.lin.z, &x) - self.lin.g;
        let offset = self.cfg.target() - self.lin.g - pos_term + normal.iter().zip(&z_anchor).map(|(a, b)| a * b).sum::<f64>();
        let half = HalfSpace { normal, offset };
        dykstra(z, boxes, |v| half.project(v), 200, 1e-13)
    }

    fn power_block(&self, base: &DesignPoint) -> Result<BlockStep> {
        let f0 = self.value(base)?;
        let z0 = self.normalized_block(base);
        let mut z = z0.clone();
        let mut fz = f0;
        let mut eta = 1.0;
        for _ in 0..MAX_GRADIENT_STEPS {
            let grad = self.power_gradient(base, &z)?;
            let mut accepted = None;
            for _ in 0..BACKTRACK_STEPS {
                let trial: Vec<f64> = z.iter().zip(&grad).map(|(a, g)| a + eta * g).collect();
                let cand = self.project_power(base, &trial);
                let dir: Vec<f64> = cand.iter().zip(&z).map(|(a, b)| a - b).collect();
                let ascent: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
                if norm(&dir) <= self.cfg.delta_in || ascent <= 0.0 {
                    break;
                }
                let fc = self.value(&self.design_from_block(base, &cand)?)?;
                if fc >= fz + ARMIJO * ascent {
                    accepted = Some((cand, fc));
                    break;
                }
                eta *= 0.5;
            }
            match accepted {
                Some((cand, fc)) => {
                    let moved = norm(&cand.iter().zip(&z).map(|(a, b)| a - b).collect::<Vec<_>>());
                    z = cand;
                    fz = fc;
                    eta *= 2.0;
                    if moved <= self.cfg.delta_in {
                        break;
                    }
                }
                None => break,
            }
        }
        let target = self.design_from_block(base, &z)?;
        self.finish(base, target, f0, |a, b| {
            let za = self.normalized_block(a);
            let zb = self.normalized_block(b);
            norm(&za.iter().zip(&zb).map(|(x, y)| x - y).collect::<Vec<_>>())
        })
    }

    fn position_block(&self, base: &DesignPoint) -> Result<BlockStep> {
        let f0 = self.value(base)?;
        let x0 = positions(base);
        let nc = base.x_c.len();
        let len = self.scenario.geometry.length();
        let spacing = self.scenario.min_spacing;
        let with_x = |x: &[f64]| -> DesignPoint {
            let mut d = base.clone();
            d.x_c = x[..nc].to_vec();
            d.x_j = x[nc..].to_vec();
            d
        };
        let h = self.cfg.fd_step * len;
        let mut grad = Vec::with_capacity(x0.len());
        for i in 0..x0.len() {
            let up = (x0[i] + h).min(len);
            let down = (x0[i] - h).max(0.0);
            let eval = |v: f64| -> Result<f64> {
                let mut x = x0.clone();
                x[i] = v;
                self.value(&with_x(&x))
            };
            grad.push((eval(up)? - eval(down)?) / (up - down));
        }
        let gmax = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        if !(gmax > 0.0) || !gmax.is_finite() {
            return Ok(BlockStep {
                design: base.clone(),
                step: 0.0,
                stalled: !gmax.is_finite(),
            });
        }
        // positions linear term of the covertness model, powers at base
        let nz = self.lin.nz();
        let normal = self.lin.grad_z[nz..].to_vec();
        let z_term = self.lin.model(&to_block(base), &self.lin.x) - self.lin.g;
        let offset = self.cfg.target() - self.lin.g - z_term + normal.iter().zip(&self.lin.x).map(|(a, b)| a * b).sum::<f64>();
        let half = HalfSpace { normal, offset };
        let spacing_proj = |v: &[f64]| -> Vec<f64> {
            let mut out = project_spacing(&v[..nc], spacing, len).unwrap_or_else(|_| v[..nc].to_vec());
            out.extend(project_spacing(&v[nc..], spacing, len).unwrap_or_else(|_| v[nc..].to_vec()));
            out
        };
        let mut t = 0.25 * self.scenario.geometry.guided_wavelength() / gmax;
        let mut target = None;
        for _ in 0..BACKTRACK_STEPS {
            let factor = t / (1.0 + t * self.cfg.proximal_weight);
            let trial: Vec<f64> = x0.iter().zip(&grad).map(|(x, g)| x + factor * g).collect();
            let cand = dykstra(&trial, spacing_proj, |v| half.project(v), 200, 1e-13 * len);
            let dir: Vec<f64> = cand.iter().zip(&x0).map(|(a, b)| a - b).collect();
            let ascent: f64 = dir.iter().zip(&grad).map(|(d, g)| d * g).sum();
            if norm(&dir) <= self.cfg.delta_in * len || ascent <= 0.0 {
                break;
            }
            let d = with_x(&cand);
            if self.value(&d)? >= f0 + ARMIJO * ascent {
                target = Some(d);
                break;
            }
            t *= 0.5;
        }
        match target {
            None => Ok(BlockStep {
                design: base.clone(),
                step: 0.0,
                stalled: false,
            }),
            Some(d) => self.finish(base, d, f0, |a, b| {
                let xa = positions(a);
                let xb = positions(b);
                norm(&xa.iter().zip(&xb).map(|(x, y)| x - y).collect::<Vec<_>>()) / len
            }),
        }
    }

    fn finish(
        &self,
        base: &DesignPoint,
        target: DesignPoint,
        f0: f64,
        dist: impl Fn(&DesignPoint, &DesignPoint) -> f64,
    ) -> Result<BlockStep> {
        if dist(base, &target) == 0.0 {
            return Ok(BlockStep {
                design: base.clone(),
                step: 0.0,
                stalled: false,
            });
        }
        Ok(match self.safeguard(base, &target, f0)? {
            Some(d) => BlockStep {
                step: dist(base, &d),
                design: d,
                stalled: false,
            },
            None => BlockStep {
                design: base.clone(),
                step: 0.0,
                stalled: true,
            },
        })
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

// ---- baselines ---------------------------------------------------------

/// Candidate antenna placements per waveguide.
#[derive(Debug, Clone, PartialEq)]
pub enum PlacementGrid {
    /// Symmetric equally spaced arrays `center + (i - (N-1)/2) pitch`.
    Equispaced { centers: Vec<f64>, pitches: Vec<f64> },
    /// All spacing-feasible increasing tuples on the lattice `k * pitch`.
    Lattice { pitch: f64 },
}

impl PlacementGrid {
    /// Feasible placements for `n` antennas, in deterministic order.
    pub fn placements(&self, n: usize, len: f64, spacing: f64) -> Vec<Vec<f64>> {
        let tol = 1e-12 * len.max(1.0);
        match self {
            PlacementGrid::Equispaced { centers, pitches } => {
                let mut out = Vec::new();
                for &c in centers {
                    for &p in pitches {
                        if n >= 2 && p < spacing - tol {
                            continue;
                        }
                        let x: Vec<f64> = (0..n).map(|i| c + (i as f64 - (n as f64 - 1.0) / 2.0) * p).collect();
                        if x.iter().all(|&v| v >= -tol && v <= len + tol) {
                            let x = x.into_iter().map(|v| v.clamp(0.0, len)).collect();
                            if !out.contains(&x) {
                                out.push(x);
                            }
                        }
                    }
                }
                out
            }
            PlacementGrid::Lattice { pitch } => {
                let count = (len / pitch + 1e-9).floor() as usize + 1;
                let points: Vec<f64> = (0..count).map(|k| (k as f64 * pitch).min(len)).collect();
                let mut out = Vec::new();
                let mut current = Vec::with_capacity(n);
                lattice_tuples(&points, n, spacing - tol, 0, &mut current, &mut out);
                out
            }
        }
    }
}

fn lattice_tuples(points: &[f64], n: usize, spacing: f64, from: usize, current: &mut Vec<f64>, out: &mut Vec<Vec<f64>>) {
    if current.len() == n {
        out.push(current.clone());
        return;
    }
    for k in from..points.len() {
        if let Some(&last) = current.last() {
            if points[k] - last < spacing {
                continue;
            }
        }
        current.push(points[k]);
        lattice_tuples(points, n, spacing, k + 1, current, out);
        current.pop();
    }
}

/// Candidate `(P_C, P_J_max)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub enum PowerGrid {
    /// Lattice `(i, j) * step * P_max` with `i + j <= 1/step`.
    Simplex { step: f64 },
    /// Explicit pairs in watts.
    Points(Vec<(f64, f64)>),
}

/// Best grid design and bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSearchResult {
    pub design: DesignPoint,
    pub acr: f64,
    pub g: f64,
    /// Designs whose rate was evaluated.
    pub evaluated: usize,
}

/// Exhaustive search over a placement grid and a power grid.
///
/// On the power simplex the largest feasible covert power grows with the
/// jamming power (the error probability is non-increasing in `P_C` and
/// depends on the powers only through `P_C / P_J_max`), so each placement
/// is scanned along that feasibility staircase with every point verified.
pub fn grid_search_baseline(
    scenario: &Scenario,
    nominal: &DesignPoint,
    placement_grid: &PlacementGrid,
    power_grid: &PowerGrid,
    epsilon: f64,
    exec: Exec,
) -> Result<GridSearchResult> {
    let len = scenario.geometry.length();
    let pc = placement_grid.placements(nominal.radiation_c.n(), len, scenario.min_spacing);
    let pj = placement_grid.placements(nominal.radiation_j.n(), len, scenario.min_spacing);
    let pairs: Vec<(usize, usize)> = (0..pc.len()).flat_map(|a| (0..pj.len()).map(move |b| (a, b))).collect();
    if pairs.is_empty() {
        return Err(Error::NoFeasibleGridPoint);
    }
    let target = 1.0 - epsilon;
    let results = map_range(exec, pairs.len(), |k| {
        let (a, b) = pairs[k];
        let mut d = nominal.clone();
        d.x_c = pc[a].clone();
        d.x_j = pj[b].clone();
        scan_powers(scenario, d, power_grid, target)
    });
    let mut best: Option<GridSearchResult> = None;
    let mut evaluated = 0;
    for r in results {
        let r = r?;
        evaluated += r.evaluated;
        if let Some(found) = r.best {
            if best.as_ref().is_none_or(|b| found.acr > b.acr) {
                best = Some(found);
            }
        }
    }
    let mut best = best.ok_or(Error::NoFeasibleGridPoint)?;
    best.evaluated = evaluated;
    Ok(best)
}

struct ScanResult {
    best: Option<GridSearchResult>,
    evaluated: usize,
}

fn scan_powers(scenario: &Scenario, design: DesignPoint, grid: &PowerGrid, target: f64) -> Result<ScanResult> {
    let mut best: Option<GridSearchResult> = None;
    let mut evaluated = 0;
    let mut consider = |d: &DesignPoint, g: f64, evaluated: &mut usize| -> Result<()> {
        let acr = scenario.acr(d)?;
        *evaluated += 1;
        if best.as_ref().is_none_or(|b| acr > b.acr) {
            best = Some(GridSearchResult {
                design: d.clone(),
                acr,
                g,
                evaluated: 0,
            });
        }
        Ok(())
    };
    let with_powers = |p_c: f64, p_j: f64| {
        let mut d = design.clone();
        d.p_c = p_c;
        d.p_j_max = p_j;
        d
    };
    match grid {
        PowerGrid::Points(points) => {
            for &(p_c, p_j) in points {
                let d = with_powers(p_c, p_j);
                if scenario.check_design(&d).is_err() {
                    continue;
                }
                let g = scenario.covertness(&d)?.g;
                if g >= target {
                    consider(&d, g, &mut evaluated)?;
                }
            }
        }
        PowerGrid::Simplex { step } => {
            let n = (1.0 / step).round() as usize;
            let pm = scenario.p_max;
            let level = |i: usize| pm * i as f64 / n as f64;
            let mut i = 0usize;
            for j in 1..=n {
                i = i.min(n - j);
                let mut g_at_i = None;
                while i < n - j {
                    let g = scenario.covertness(&with_powers(level(i + 1), level(j)))?.g;
                    if g >= target {
                        i += 1;
                        g_at_i = Some(g);
                    } else {
                        break;
                    }
                }
                let d = with_powers(level(i), level(j));
                let g = match g_at_i {
                    Some(g) => g,
                    None => scenario.covertness(&d)?.g,
                };
                if g >= target {
                    consider(&d, g, &mut evaluated)?;
                }
            }
        }
    }
    Ok(ScanResult { best, evaluated })
}

/// Mean and best rate over uniformly drawn feasible designs.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomSearchResult {
    pub mean_acr: f64,
    pub best: DesignPoint,
    pub best_acr: f64,
    pub accepted: usize,
    pub draws: usize,
}

/// Rejection-samples `trials` designs satisfying every constraint.
///
/// Powers are uniform on the simplex, radiation parameters uniform on their
/// ranges and positions uniform on the spacing polytope. Draw `d` uses its
/// own stream, so results do not depend on the batch size.
pub fn random_search_baseline(
    scenario: &Scenario,
    nominal: &DesignPoint,
    trials: usize,
    rng_seed: u64,
    epsilon: f64,
    exec: Exec,
) -> Result<RandomSearchResult> {
    if trials == 0 {
        return Err(Error::ParamOutOfRange { name: "trials", value: 0.0 });
    }
    let max_draws = trials.saturating_mul(10_000);
    let target = 1.0 - epsilon;
    let batch = 64;
    let mut accepted: Vec<(DesignPoint, f64)> = Vec::with_capacity(trials);
    let mut draws = 0;
    while accepted.len() < trials && draws < max_draws {
        let count = batch.min(max_draws - draws);
        let results = map_range(exec, count, |k| -> Result<Option<(DesignPoint, f64)>> {
            let d = random_design(scenario, nominal, rng_seed, (draws + k) as u64)?;
            if scenario.check_design(&d).is_err() || scenario.covertness(&d)?.g < target {
                return Ok(None);
            }
            Ok(Some((d.clone(), scenario.acr(&d)?)))
        });
        for r in results {
            draws += 1;
            if let Some(hit) = r? {
                if accepted.len() < trials {
                    accepted.push(hit);
                }
            }
        }
    }
    if accepted.len() < trials {
        return Err(Error::RejectionBudgetExceeded {
            accepted: accepted.len(),
            draws,
        });
    }
    let mean_acr = accepted.iter().map(|(_, a)| a).sum::<f64>() / trials as f64;
    let mut best = 0;
    for (i, (_, a)) in accepted.iter().enumerate() {
        if *a > accepted[best].1 {
            best = i;
        }
    }
    let (best_design, best_acr) = accepted.swap_remove(best);
    Ok(RandomSearchResult {
        mean_acr,
        best: best_design,
        best_acr,
        accepted: trials,
        draws,
    })
}

fn random_design(scenario: &Scenario, nominal: &DesignPoint, seed: u64, draw: u64) -> Result<DesignPoint> {
    let mut rng = stream_rng(seed, RANDOM_STREAM + draw, 0);
    let (mut u1, mut u2) = (uniform(&mut rng), uniform(&mut rng));
    if u1 + u2 > 1.0 {
        u1 = 1.0 - u1;
        u2 = 1.0 - u2;
    }
    let len = scenario.geometry.length();
    let mut rad = |r: &RadiationSpec| -> Result<RadiationSpec> {
        let open = |u: f64| u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
        let params: Vec<f64> = match r {
            RadiationSpec::Equal { n, .. } => vec![(1.0 - uniform(&mut rng)) / *n as f64],
            _ => (0..r.params().len()).map(|_| open(uniform(&mut rng))).collect(),
        };
        r.with_params(&params)
    };
    let radiation_c = rad(&nominal.radiation_c)?;
    let radiation_j = rad(&nominal.radiation_j)?;
    Ok(DesignPoint {
        p_c: u1 * scenario.p_max,
        p_j_max: u2 * scenario.p_max,
        radiation_c,
        radiation_j,
        x_c: random_positions(&mut rng, nominal.radiation_c.n(), scenario.min_spacing, len),
        x_j: random_positions(&mut rng, nominal.radiation_j.n(), scenario.min_spacing, len),
    })
}
