//! Scenario configuration files.
//!
//! A config is a TOML document. Every key is optional; missing keys take the
//! reference values below (4 m guides at 4 m height, 0.4 m offset, 5 GHz,
//! `n_eff = 1.4`, 100 mW budget with 40 mW jamming, four antennas per guide,
//! -114 dBm noise). Noise is given in dBm and converted to watts here;
//! everything past this module works in SI units.
//!
//! ```toml
//! seed = 7
//!
//! [geometry]
//! length_m = 4.0
//! height_m = 4.0
//! offset_m = 0.4
//! carrier_hz = 5e9
//! n_eff = 1.4
//! bob = [2.1, -0.3, 0.0]
//! # min_spacing_m defaults to 0.15 guided wavelengths
//!
//! [radiation]
//! pas_covert = 4
//! pas_jamming = 4
//! models = ["general", "proportional", "equal"]
//! proportional_delta_sq = 0.5
//! general_delta = 0.5
//! # equal_rho defaults to 1/N
//!
//! [power]
//! p_max_mw = 100.0
//! p_j_max_mw = 40.0
//! p_c_mw = 60.0
//!
//! [noise]
//! warden_dbm = -114.0
//! bob_dbm = -114.0
//!
//! [wardens]
//! counts = [5, 8]
//! # explicit ground points [[x, y], ...] or a seeded uniform draw over
//! region_y = [-2.0, 2.0]
//! # region_x defaults to [0, length_m]; seed defaults to the run seed
//! ```
//!
//! The remaining sections (`detector`, `dep_curve`, `dep_vs_jamming`,
//! `acr_curve`, `optimizer`, `validate`) size the experiments, and an
//! optional `design` section pins a full design point (powers in watts).

use std::fmt;
use std::path::Path;

use pass_covert::geometry::{place_wardens, Point3, SystemGeometry};
use pass_covert::radiation::{RadiationModel, RadiationSpec};
use pass_covert::rate::QuadratureRule;
use pass_covert::scenario::{DesignPoint, Scenario};
use pass_covert::Error as CoreError;
use serde::{Deserialize, Serialize};

/// Failure to read, parse or validate a config.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid {field}: {message}")]
    Validation { field: String, message: String },
}

fn invalid(field: impl Into<String>, message: impl fmt::Display) -> ConfigError {
    ConfigError::Validation {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: u64,
    pub geometry: GeometrySection,
    pub radiation: RadiationSection,
    pub power: PowerSection,
    pub noise: NoiseSection,
    pub wardens: WardenSection,
    pub detector: DetectorSection,
    pub dep_curve: DepCurveSection,
    pub dep_vs_jamming: DepVsJammingSection,
    pub acr_curve: AcrCurveSection,
    pub optimizer: OptimizerSection,
    pub validate: ValidateSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub design: Option<DesignSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub length_m: f64,
    pub height_m: f64,
    pub offset_m: f64,
    pub carrier_hz: f64,
    pub n_eff: f64,
    pub bob: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_spacing_m: Option<f64>,
}

impl Default for GeometrySection {
    fn default() -> Self {
        GeometrySection {
            length_m: 4.0,
            height_m: 4.0,
            offset_m: 0.4,
            carrier_hz: 5e9,
            n_eff: 1.4,
            bob: vec![2.1, -0.3, 0.0],
            min_spacing_m: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadiationSection {
    pub pas_covert: usize,
    pub pas_jamming: usize,
    pub models: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equal_rho: Option<f64>,
    pub proportional_delta_sq: f64,
    pub general_delta: f64,
}

impl Default for RadiationSection {
    fn default() -> Self {
        RadiationSection {
            pas_covert: 4,
            pas_jamming: 4,
            models: RadiationModel::ALL.iter().map(|m| m.name().to_string()).collect(),
            equal_rho: None,
            proportional_delta_sq: 0.5,
            general_delta: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerSection {
    pub p_max_mw: f64,
    pub p_j_max_mw: f64,
    pub p_c_mw: f64,
}

impl Default for PowerSection {
    fn default() -> Self {
        PowerSection {
            p_max_mw: 100.0,
            p_j_max_mw: 40.0,
            p_c_mw: 60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub warden_dbm: f64,
    pub bob_dbm: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection {
            warden_dbm: -114.0,
            bob_dbm: -114.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WardenSection {
    pub counts: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub positions: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub region_x: Option<[f64; 2]>,
    pub region_y: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for WardenSection {
    fn default() -> Self {
        WardenSection {
            counts: vec![5, 8],
            positions: None,
            region_x: None,
            region_y: [-2.0, 2.0],
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorSection {
    /// Search points inside each breakpoint interval.
    pub grid_density: usize,
    pub quadrature_nodes: usize,
    /// `0` selects plain Gauss-Legendre; `p > 0` grades nodes as `t^p`.
    pub quadrature_grading: u32,
}

impl Default for DetectorSection {
    fn default() -> Self {
        DetectorSection {
            grid_density: pass_covert::scenario::DEFAULT_GRID_DENSITY,
            quadrature_nodes: pass_covert::rate::DEFAULT_NODES,
            quadrature_grading: pass_covert::rate::DEFAULT_GRADING,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DepCurveSection {
    pub points: usize,
    /// Grid spans `[0, tau_max_factor * max alpha3]`.
    pub tau_max_factor: f64,
    /// Monte Carlo trials per threshold; 0 disables the estimate.
    pub mc_trials: usize,
}

impl Default for DepCurveSection {
    fn default() -> Self {
        DepCurveSection {
            points: 200,
            tau_max_factor: 1.1,
            mc_trials: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DepVsJammingSection {
    pub p_j_min_mw: f64,
    pub p_j_max_mw: f64,
    pub points: usize,
}

impl Default for DepVsJammingSection {
    fn default() -> Self {
        DepVsJammingSection {
            p_j_min_mw: 1.0,
            p_j_max_mw: 40.0,
            points: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcrCurveSection {
    pub p_c_min_mw: f64,
    pub p_c_max_mw: f64,
    pub points: usize,
}

impl Default for AcrCurveSection {
    fn default() -> Self {
        AcrCurveSection {
            p_c_min_mw: 0.0,
            p_c_max_mw: 60.0,
            points: 31,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSection {
    pub epsilons: Vec<f64>,
    pub multistart: Vec<usize>,
    pub k_max: usize,
    pub t_max: usize,
    pub delta_out: f64,
    pub delta_in: f64,
    pub proximal_weight: f64,
    pub fd_step: f64,
    /// Array centers for the grid baseline, evenly spread over the guide.
    pub grid_centers: usize,
    pub grid_pitches_m: Vec<f64>,
    /// Power lattice step as a fraction of the budget.
    pub grid_power_step: f64,
    pub random_trials: usize,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        OptimizerSection {
            epsilons: vec![0.05, 0.1, 0.2],
            multistart: vec![1, 5],
            k_max: 30,
            t_max: 5,
            delta_out: 1e-6,
            delta_in: 1e-6,
            proximal_weight: 1.0,
            fd_step: 1e-6,
            grid_centers: 5,
            grid_pitches_m: vec![0.25, 0.5, 1.0],
            grid_power_step: 0.05,
            random_trials: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    pub mc_trials: usize,
    /// Thresholds per curve, spread over `(sigma^2, max alpha3)`.
    pub thresholds: usize,
    pub rate_samples: usize,
}

impl Default for ValidateSection {
    fn default() -> Self {
        ValidateSection {
            mc_trials: 200_000,
            thresholds: 9,
            rate_samples: 1_000_000,
        }
    }
}

/// A fixed design point. Powers in watts so values round-trip exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    pub model: String,
    pub p_c_w: f64,
    pub p_j_max_w: f64,
    pub radiation_c: Vec<f64>,
    pub radiation_j: Vec<f64>,
    pub x_c: Vec<f64>,
    pub x_j: Vec<f64>,
}

impl DesignSection {
    pub fn from_design(d: &DesignPoint) -> Self {
        DesignSection {
            model: d.radiation_c.model().name().to_string(),
            p_c_w: d.p_c,
            p_j_max_w: d.p_j_max,
            radiation_c: d.radiation_c.params(),
            radiation_j: d.radiation_j.params(),
            x_c: d.x_c.clone(),
            x_j: d.x_j.clone(),
        }
    }
}

/// A validated scenario with defaults applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub file: ConfigFile,
    pub models: Vec<RadiationModel>,
    pub warden_counts: Vec<usize>,
    pub warden_pool: Vec<Point3>,
    base: Scenario,
    pub p_c: f64,
    pub p_j_max: f64,
    pub design: Option<DesignPoint>,
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

/// Reads and validates a config file, optionally overriding its seed.
pub fn load_scenario(path: &Path, seed: Option<u64>) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_scenario(&text, seed)
}

pub fn parse_scenario(text: &str, seed: Option<u64>) -> Result<ScenarioConfig, ConfigError> {
    let mut file: ConfigFile = toml::from_str(text).map_err(|e| {
        let (line, column) = e
            .span()
            .map(|s| line_col(text, s.start))
            .unwrap_or((0, 0));
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    if let Some(s) = seed {
        file.seed = s;
    }
    ScenarioConfig::from_file(file)
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, column)
}

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be positive and finite, got {v}")))
    }
}

fn nonnegative(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be non-negative and finite, got {v}")))
    }
}

fn open_unit(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(invalid(field, format!("must lie in (0, 1), got {v}")))
    }
}

fn at_least_one(field: &str, v: usize) -> Result<usize, ConfigError> {
    if v >= 1 {
        Ok(v)
    } else {
        Err(invalid(field, "must be at least 1"))
    }
}

fn ordered_range(field: &str, r: [f64; 2]) -> Result<(f64, f64), ConfigError> {
    if r[0].is_finite() && r[1].is_finite() && r[0] <= r[1] {
        Ok((r[0], r[1]))
    } else {
        Err(invalid(field, format!("must be a finite [low, high] pair, got {r:?}")))
    }
}

fn ground_point(field: &str, p: &[f64]) -> Result<Point3, ConfigError> {
    match *p {
        [x, y] | [x, y, 0.0] if x.is_finite() && y.is_finite() => Ok([x, y, 0.0]),
        _ => Err(invalid(field, format!("expected [x, y] or [x, y, 0] on the ground plane, got {p:?}"))),
    }
}

/// Field path for a core geometry error.
fn geometry_error(e: CoreError) -> ConfigError {
    match e {
        CoreError::NotOnGround { index: 0, .. } | CoreError::DegenerateDistance { index: 0, .. } => invalid("geometry.bob", e),
        CoreError::NotOnGround { index, .. } | CoreError::DegenerateDistance { index, .. } => {
            invalid(format!("wardens.positions[{}]", index - 1), e)
        }
        other => invalid("geometry", other),
    }
}

impl ScenarioConfig {
    pub fn from_file(file: ConfigFile) -> Result<Self, ConfigError> {
        let g = &file.geometry;
        let length = positive("geometry.length_m", g.length_m)?;
        positive("geometry.height_m", g.height_m)?;
        nonnegative("geometry.offset_m", g.offset_m)?;
        positive("geometry.carrier_hz", g.carrier_hz)?;
        if !(g.n_eff.is_finite() && g.n_eff >= 1.0) {
            return Err(invalid("geometry.n_eff", format!("must be at least 1, got {}", g.n_eff)));
        }
        let bob = ground_point("geometry.bob", &g.bob)?;

        let r = &file.radiation;
        at_least_one("radiation.pas_covert", r.pas_covert)?;
        at_least_one("radiation.pas_jamming", r.pas_jamming)?;
        if r.models.is_empty() {
            return Err(invalid("radiation.models", "must list at least one model"));
        }
        let models = r
            .models
            .iter()
            .enumerate()
            .map(|(i, name)| {
                RadiationModel::from_name(name)
                    .ok_or_else(|| invalid(format!("radiation.models[{i}]"), format!("unknown model {name:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        open_unit("radiation.proportional_delta_sq", r.proportional_delta_sq)?;
        open_unit("radiation.general_delta", r.general_delta)?;
        if let Some(rho) = r.equal_rho {
            let n = r.pas_covert.max(r.pas_jamming) as f64;
            if !(rho > 0.0 && rho * n <= 1.0) {
                return Err(invalid("radiation.equal_rho", format!("need 0 < rho <= 1/N, got {rho}")));
            }
        }

        let p = &file.power;
        let p_max = positive("power.p_max_mw", p.p_max_mw)? * 1e-3;
        let p_j_max = nonnegative("power.p_j_max_mw", p.p_j_max_mw)? * 1e-3;
        let p_c = nonnegative("power.p_c_mw", p.p_c_mw)? * 1e-3;
        if p.p_c_mw + p.p_j_max_mw > p.p_max_mw {
            return Err(invalid(
                "power.p_c_mw + power.p_j_max_mw",
                format!("{} mW exceeds power.p_max_mw = {} mW", p.p_c_mw + p.p_j_max_mw, p.p_max_mw),
            ));
        }

        let sigma_w = dbm_to_watts(file.noise.warden_dbm);
        let sigma_b = dbm_to_watts(file.noise.bob_dbm);
        positive("noise.warden_dbm", sigma_w)?;
        positive("noise.bob_dbm", sigma_b)?;

        let w = &file.wardens;
        if w.counts.is_empty() {
            return Err(invalid("wardens.counts", "must list at least one warden count"));
        }
        for (i, &c) in w.counts.iter().enumerate() {
            at_least_one(&format!("wardens.counts[{i}]"), c)?;
        }
        let needed = *w.counts.iter().max().unwrap_or(&1);
        let warden_pool = match &w.positions {
            Some(points) => {
                if points.len() < needed {
                    return Err(invalid(
                        "wardens.positions",
                        format!("{} positions given but wardens.counts needs {needed}", points.len()),
                    ));
                }
                points
                    .iter()
                    .enumerate()
                    .map(|(i, pt)| ground_point(&format!("wardens.positions[{i}]"), pt))
                    .collect::<Result<Vec<_>, _>>()?
            }
            None => {
                let rx = ordered_range("wardens.region_x", w.region_x.unwrap_or([0.0, length]))?;
                let ry = ordered_range("wardens.region_y", w.region_y)?;
                place_wardens(needed, rx, ry, w.seed.unwrap_or(file.seed))
            }
        };

        let geometry = SystemGeometry::new(
            length,
            g.height_m,
            g.offset_m,
            g.carrier_hz,
            g.n_eff,
            bob,
            warden_pool.clone(),
        )
        .map_err(geometry_error)?;
        let min_spacing = match g.min_spacing_m {
            Some(s) => nonnegative("geometry.min_spacing_m", s)?,
            None => 0.15 * geometry.guided_wavelength(),
        };
        for (field, n) in [("radiation.pas_covert", r.pas_covert), ("radiation.pas_jamming", r.pas_jamming)] {
            if (n - 1) as f64 * min_spacing > length {
                return Err(invalid(
                    field,
                    format!("{n} antennas at spacing {min_spacing} m do not fit on a {length} m guide"),
                ));
            }
        }

        let d = &file.detector;
        at_least_one("detector.grid_density", d.grid_density)?;
        at_least_one("detector.quadrature_nodes", d.quadrature_nodes)?;
        let rule = if d.quadrature_grading == 0 {
            QuadratureRule::gauss_legendre(d.quadrature_nodes)
        } else {
            QuadratureRule::graded(d.quadrature_nodes, d.quadrature_grading)
        };
        let base = Scenario::new(geometry, sigma_w, sigma_b, p_max, min_spacing)
            .map_err(|e| invalid("scenario", e))?
            .with_rule(rule)
            .with_grid_density(d.grid_density);

        Self::check_experiments(&file)?;

        let mut cfg = ScenarioConfig {
            models,
            warden_counts: w.counts.clone(),
            warden_pool,
            base,
            p_c,
            p_j_max,
            design: None,
            file,
        };
        if let Some(ds) = cfg.file.design.clone() {
            cfg.design = Some(cfg.design_from_section(&ds)?);
        }
        Ok(cfg)
    }

    fn check_experiments(file: &ConfigFile) -> Result<(), ConfigError> {
        at_least_one("dep_curve.points", file.dep_curve.points)?;
        positive("dep_curve.tau_max_factor", file.dep_curve.tau_max_factor)?;

        let j = &file.dep_vs_jamming;
        at_least_one("dep_vs_jamming.points", j.points)?;
        nonnegative("dep_vs_jamming.p_j_min_mw", j.p_j_min_mw)?;
        nonnegative("dep_vs_jamming.p_j_max_mw", j.p_j_max_mw)?;
        if j.p_j_min_mw > j.p_j_max_mw {
            return Err(invalid("dep_vs_jamming.p_j_min_mw", "exceeds dep_vs_jamming.p_j_max_mw"));
        }
        if file.power.p_c_mw + j.p_j_max_mw > file.power.p_max_mw {
            return Err(invalid(
                "dep_vs_jamming.p_j_max_mw",
                "power.p_c_mw plus the sweep end exceeds power.p_max_mw",
            ));
        }

        let a = &file.acr_curve;
        at_least_one("acr_curve.points", a.points)?;
        nonnegative("acr_curve.p_c_min_mw", a.p_c_min_mw)?;
        nonnegative("acr_curve.p_c_max_mw", a.p_c_max_mw)?;
        if a.p_c_min_mw > a.p_c_max_mw {
            return Err(invalid("acr_curve.p_c_min_mw", "exceeds acr_curve.p_c_max_mw"));
        }
        if a.p_c_max_mw + file.power.p_j_max_mw > file.power.p_max_mw {
            return Err(invalid(
                "acr_curve.p_c_max_mw",
                "the sweep end plus power.p_j_max_mw exceeds power.p_max_mw",
            ));
        }

        let o = &file.optimizer;
        if o.epsilons.is_empty() {
            return Err(invalid("optimizer.epsilons", "must list at least one level"));
        }
        for (i, &e) in o.epsilons.iter().enumerate() {
            open_unit(&format!("optimizer.epsilons[{i}]"), e)?;
        }
        if o.multistart.is_empty() {
            return Err(invalid("optimizer.multistart", "must list at least one start count"));
        }
        for (i, &k) in o.multistart.iter().enumerate() {
            at_least_one(&format!("optimizer.multistart[{i}]"), k)?;
        }
        positive("optimizer.delta_out", o.delta_out)?;
        positive("optimizer.delta_in", o.delta_in)?;
        positive("optimizer.fd_step", o.fd_step)?;
        nonnegative("optimizer.proximal_weight", o.proximal_weight)?;
        at_least_one("optimizer.grid_centers", o.grid_centers)?;
        if o.grid_pitches_m.is_empty() {
            return Err(invalid("optimizer.grid_pitches_m", "must list at least one pitch"));
        }
        for (i, &p) in o.grid_pitches_m.iter().enumerate() {
            positive(&format!("optimizer.grid_pitches_m[{i}]"), p)?;
        }
        let step = positive("optimizer.grid_power_step", o.grid_power_step)?;
        if step > 1.0 {
            return Err(invalid("optimizer.grid_power_step", "must not exceed 1"));
        }
        at_least_one("optimizer.random_trials", o.random_trials)?;

        let v = &file.validate;
        at_least_one("validate.mc_trials", v.mc_trials)?;
        at_least_one("validate.thresholds", v.thresholds)?;
        at_least_one("validate.rate_samples", v.rate_samples)?;
        Ok(())
    }

    fn design_from_section(&self, ds: &DesignSection) -> Result<DesignPoint, ConfigError> {
        let model = RadiationModel::from_name(&ds.model)
            .ok_or_else(|| invalid("design.model", format!("unknown model {:?}", ds.model)))?;
        let template = self.nominal(model);
        let rc = template
            .radiation_c
            .with_params(&ds.radiation_c)
            .map_err(|e| invalid("design.radiation_c", e))?;
        let rj = template
            .radiation_j
            .with_params(&ds.radiation_j)
            .map_err(|e| invalid("design.radiation_j", e))?;
        let design = DesignPoint {
            p_c: ds.p_c_w,
            p_j_max: ds.p_j_max_w,
            radiation_c: rc,
            radiation_j: rj,
            x_c: ds.x_c.clone(),
            x_j: ds.x_j.clone(),
        };
        self.base.check_design(&design).map_err(|e| invalid("design", e))?;
        Ok(design)
    }

    pub fn seed(&self) -> u64 {
        self.file.seed
    }

    /// Scenario with the first `m` wardens of the pool.
    pub fn scenario(&self, m: usize) -> Result<Scenario, ConfigError> {
        if m == 0 || m > self.warden_pool.len() {
            return Err(invalid("wardens.counts", format!("{m} wardens requested, {} available", self.warden_pool.len())));
        }
        self.base
            .with_wardens(self.warden_pool[..m].to_vec())
            .map_err(geometry_error)
    }

    pub fn radiation(&self, model: RadiationModel, n: usize) -> RadiationSpec {
        let r = &self.file.radiation;
        match model {
            RadiationModel::General => RadiationSpec::General {
                delta: vec![r.general_delta; n],
            },
            RadiationModel::Proportional => RadiationSpec::Proportional {
                delta_sq: r.proportional_delta_sq,
                n,
            },
            RadiationModel::Equal => RadiationSpec::Equal {
                rho: r.equal_rho.unwrap_or(1.0 / n as f64),
                n,
            },
        }
    }

    /// The pinned design when it uses `model`, else the configured powers and
    /// radiation with equally spaced antennas.
    pub fn nominal(&self, model: RadiationModel) -> DesignPoint {
        if let Some(d) = self.design.as_ref().filter(|d| d.radiation_c.model() == model) {
            return d.clone();
        }
        let len = self.base.geometry.length();
        let spread = |n: usize| -> Vec<f64> {
            if n == 1 {
                vec![0.5 * len]
            } else {
                (0..n).map(|i| len * i as f64 / (n - 1) as f64).collect()
            }
        };
        let r = &self.file.radiation;
        DesignPoint {
            p_c: self.p_c,
            p_j_max: self.p_j_max,
            radiation_c: self.radiation(model, r.pas_covert),
            radiation_j: self.radiation(model, r.pas_jamming),
            x_c: spread(r.pas_covert),
            x_j: spread(r.pas_jamming),
        }
    }

    /// Config text that reloads to this scenario with `design` pinned.
    pub fn design_toml(&self, design: &DesignPoint) -> String {
        let mut file = self.file.clone();
        file.design = Some(DesignSection::from_design(design));
        toml::to_string(&file).expect("config serializes")
    }
}
