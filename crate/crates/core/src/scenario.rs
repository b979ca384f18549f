//! Scenario data shared by the rate, covertness and optimization code.

use crate::error::{Error, Result};
use crate::geometry::{Side, SystemGeometry};
use crate::local_detect::WardenProfile;
use crate::piecewise_dep::min_dep;
use crate::radiation::RadiationSpec;
use crate::rate::{avg_covert_rate, link_budget, LinkBudget, QuadratureRule};

/// Default number of interior search points per breakpoint interval.
pub const DEFAULT_GRID_DENSITY: usize = 64;

/// Fixed physical setting in which designs are evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub geometry: SystemGeometry,
    /// Warden noise power in watts.
    pub sigma_w_sq: f64,
    /// Bob's noise power in watts.
    pub sigma_b_sq: f64,
    /// Total power budget `P_C + P_J_max <= p_max`, watts.
    pub p_max: f64,
    /// Minimum spacing between neighboring antennas on a waveguide, meters.
    pub min_spacing: f64,
    pub rule: QuadratureRule,
    pub grid_density: usize,
}

/// Optimization variables: powers, radiation laws and antenna positions.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignPoint {
    pub p_c: f64,
    pub p_j_max: f64,
    pub radiation_c: RadiationSpec,
    pub radiation_j: RadiationSpec,
    pub x_c: Vec<f64>,
    pub x_j: Vec<f64>,
}

/// Minimum system error probability and where it is attained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Covertness {
    pub tau_star: f64,
    pub g: f64,
}

impl DesignPoint {
    /// Flat layout `[P_C, P_J_max, radiation_C.., radiation_J.., x_C.., x_J..]`.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = vec![self.p_c, self.p_j_max];
        v.extend(self.radiation_c.params());
        v.extend(self.radiation_j.params());
        v.extend(&self.x_c);
        v.extend(&self.x_j);
        v
    }

    /// Inverse of [`DesignPoint::to_vector`], keeping this point's laws and sizes.
    pub fn from_vector(&self, v: &[f64]) -> Result<Self> {
        let nc = self.radiation_c.params().len();
        let nj = self.radiation_j.params().len();
        let expected = 2 + nc + nj + self.x_c.len() + self.x_j.len();
        if v.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: v.len(),
            });
        }
        let mut at = 2;
        let mut take = |n: usize| {
            let s = &v[at..at + n];
            at += n;
            s
        };
        let rc = take(nc);
        let rj = take(nj);
        let xc = take(self.x_c.len()).to_vec();
        let xj = take(self.x_j.len()).to_vec();
        Ok(DesignPoint {
            p_c: v[0],
            p_j_max: v[1],
            radiation_c: self.radiation_c.with_params(rc)?,
            radiation_j: self.radiation_j.with_params(rj)?,
            x_c: xc,
            x_j: xj,
        })
    }

    /// Index ranges of the blocks inside the flat vector.
    pub fn layout(&self) -> DesignLayout {
        let nc = self.radiation_c.params().len();
        let nj = self.radiation_j.params().len();
        let rad_c = 2..2 + nc;
        let rad_j = rad_c.end..rad_c.end + nj;
        let x_c = rad_j.end..rad_j.end + self.x_c.len();
        let x_j = x_c.end..x_c.end + self.x_j.len();
        DesignLayout { rad_c, rad_j, x_c, x_j }
    }
}

/// Positions of each block within [`DesignPoint::to_vector`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignLayout {
    pub rad_c: std::ops::Range<usize>,
    pub rad_j: std::ops::Range<usize>,
    pub x_c: std::ops::Range<usize>,
    pub x_j: std::ops::Range<usize>,
}

impl Scenario {
    pub fn new(geometry: SystemGeometry, sigma_w_sq: f64, sigma_b_sq: f64, p_max: f64, min_spacing: f64) -> Result<Self> {
        for (name, v) in [
            ("sigma_w_sq", sigma_w_sq),
            ("sigma_b_sq", sigma_b_sq),
            ("p_max", p_max),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::ParamOutOfRange { name, value: v });
            }
        }
        if !(min_spacing.is_finite() && min_spacing >= 0.0) {
            return Err(Error::ParamOutOfRange {
                name: "min_spacing",
                value: min_spacing,
            });
        }
        Ok(Scenario {
            geometry,
            sigma_w_sq,
            sigma_b_sq,
            p_max,
            min_spacing,
            rule: QuadratureRule::default(),
            grid_density: DEFAULT_GRID_DENSITY,
        })
    }

    pub fn with_rule(mut self, rule: QuadratureRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_grid_density(mut self, grid_density: usize) -> Self {
        self.grid_density = grid_density;
        self
    }

    /// Scenario with a different warden set.
    pub fn with_wardens(&self, wardens: Vec<crate::geometry::Point3>) -> Result<Self> {
        Ok(Scenario {
            geometry: self.geometry.with_wardens(wardens)?,
            ..self.clone()
        })
    }

    pub fn warden_count(&self) -> usize {
        self.geometry.wardens().len()
    }

    /// Per-warden `(A_C, A_J)` effective gains.
    pub fn warden_gains(&self, design: &DesignPoint) -> Result<Vec<(f64, f64)>> {
        let rho_c = design.radiation_c.fractions()?;
        let rho_j = design.radiation_j.fractions()?;
        let g = &self.geometry;
        g.wardens()
            .iter()
            .map(|&w| Ok((g.gain(Side::C, &design.x_c, &rho_c, w)?, g.gain(Side::J, &design.x_j, &rho_j, w)?)))
            .collect()
    }

    /// Warden profiles; zero jamming yields step-function profiles.
    pub fn profiles(&self, design: &DesignPoint) -> Result<Vec<WardenProfile>> {
        self.warden_gains(design)?
            .into_iter()
            .map(|(a_c, a_j)| WardenProfile::new_unchecked(a_c, a_j, self.sigma_w_sq, design.p_c, design.p_j_max))
            .collect()
    }

    pub fn link_budget(&self, design: &DesignPoint) -> Result<LinkBudget> {
        link_budget(design, self)
    }

    /// Average covert rate of a design in bits/s/Hz.
    pub fn acr(&self, design: &DesignPoint) -> Result<f64> {
        Ok(avg_covert_rate(&self.link_budget(design)?, &self.rule))
    }

    /// Worst-case (minimum over thresholds) system error probability.
    pub fn covertness(&self, design: &DesignPoint) -> Result<Covertness> {
        let (tau_star, g) = min_dep(&self.profiles(design)?, self.grid_density)?;
        Ok(Covertness { tau_star, g })
    }

    /// Closed box for each flat design variable, used for finite differences.
    pub fn variable_bounds(&self, design: &DesignPoint) -> Vec<(f64, f64)> {
        let open = (f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
        let rad = |r: &RadiationSpec| {
            let (_, hi) = r.param_bounds();
            match r {
                RadiationSpec::Equal { .. } => (f64::MIN_POSITIVE, hi),
                _ => open,
            }
        };
        let mut b = vec![(0.0, self.p_max), (0.0, self.p_max)];
        b.extend(std::iter::repeat_n(rad(&design.radiation_c), design.radiation_c.params().len()));
        b.extend(std::iter::repeat_n(rad(&design.radiation_j), design.radiation_j.params().len()));
        let len = self.geometry.length();
        b.extend(std::iter::repeat_n((0.0, len), design.x_c.len() + design.x_j.len()));
        b
    }

    /// Checks the power budget, radiation laws, and placement constraints.
    pub fn check_design(&self, design: &DesignPoint) -> Result<()> {
        if !(design.p_c >= 0.0) {
            return Err(Error::ParamOutOfRange { name: "P_C", value: design.p_c });
        }
        if !(design.p_j_max >= 0.0) {
            return Err(Error::ParamOutOfRange {
                name: "P_J_max",
                value: design.p_j_max,
            });
        }
        let total = design.p_c + design.p_j_max;
        if total > self.p_max * (1.0 + 1e-12) {
            return Err(Error::ParamOutOfRange {
                name: "P_C + P_J_max",
                value: total,
            });
        }
        design.radiation_c.validate()?;
        design.radiation_j.validate()?;
        for (x, rad) in [(&design.x_c, &design.radiation_c), (&design.x_j, &design.radiation_j)] {
            if x.len() != rad.n() {
                return Err(Error::LengthMismatch {
                    expected: rad.n(),
                    found: x.len(),
                });
            }
            self.check_positions(x)?;
        }
        Ok(())
    }

    fn check_positions(&self, x: &[f64]) -> Result<()> {
        let len = self.geometry.length();
        let slack = 1e-12 * len.max(1.0);
        for (index, &xi) in x.iter().enumerate() {
            if !(xi >= -slack && xi <= len + slack) {
                return Err(Error::OutOfWaveguide { index, x: xi, length: len });
            }
        }
        for w in x.windows(2) {
            if w[1] - w[0] < self.min_spacing - slack {
                return Err(Error::ParamOutOfRange {
                    name: "antenna spacing",
                    value: w[1] - w[0],
                });
            }
        }
        Ok(())
    }
}
