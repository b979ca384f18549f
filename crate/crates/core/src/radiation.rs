//! Per-antenna radiated-power fractions under the three coupling laws.

use crate::error::{Error, Result};

/// Which coupling law governs a waveguide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RadiationModel {
    General,
    Proportional,
    Equal,
}

impl RadiationModel {
    pub const ALL: [RadiationModel; 3] = [
        RadiationModel::General,
        RadiationModel::Proportional,
        RadiationModel::Equal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RadiationModel::General => "general",
            RadiationModel::Proportional => "proportional",
            RadiationModel::Equal => "equal",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }
}

/// Active coupling law together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum RadiationSpec {
    /// Per-antenna coupling strengths `delta_n` in `(0, 1)`.
    General { delta: Vec<f64> },
    /// Common extracted fraction `delta^2` of the remaining power.
    Proportional { delta_sq: f64, n: usize },
    /// Common fraction `rho` in `(0, 1/N]`.
    Equal { rho: f64, n: usize },
}

impl RadiationSpec {
    pub fn model(&self) -> RadiationModel {
        match self {
            RadiationSpec::General { .. } => RadiationModel::General,
            RadiationSpec::Proportional { .. } => RadiationModel::Proportional,
            RadiationSpec::Equal { .. } => RadiationModel::Equal,
        }
    }

    /// Number of antennas on the waveguide.
    pub fn n(&self) -> usize {
        match self {
            RadiationSpec::General { delta } => delta.len(),
            RadiationSpec::Proportional { n, .. } | RadiationSpec::Equal { n, .. } => *n,
        }
    }

    pub fn fractions(&self) -> Result<Vec<f64>> {
        match self {
            RadiationSpec::General { delta } => fractions_general(delta),
            RadiationSpec::Proportional { delta_sq, n } => fractions_proportional(*delta_sq, *n),
            RadiationSpec::Equal { rho, n } => fractions_equal(*rho, *n),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.fractions().map(|_| ())
    }

    /// Power left in the guide after the last antenna, `1 - sum(rho)`.
    pub fn residual_power(&self) -> Result<f64> {
        Ok(1.0 - self.fractions()?.iter().sum::<f64>())
    }

    /// Scalar or vector parameters in a flat list.
    pub fn params(&self) -> Vec<f64> {
        match self {
            RadiationSpec::General { delta } => delta.clone(),
            RadiationSpec::Proportional { delta_sq, .. } => vec![*delta_sq],
            RadiationSpec::Equal { rho, .. } => vec![*rho],
        }
    }

    /// Same law and antenna count with new flat parameters.
    pub fn with_params(&self, params: &[f64]) -> Result<Self> {
        let expected = self.params().len();
        if params.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: params.len(),
            });
        }
        Ok(match self {
            RadiationSpec::General { .. } => RadiationSpec::General {
                delta: params.to_vec(),
            },
            RadiationSpec::Proportional { n, .. } => RadiationSpec::Proportional {
                delta_sq: params[0],
                n: *n,
            },
            RadiationSpec::Equal { n, .. } => RadiationSpec::Equal {
                rho: params[0],
                n: *n,
            },
        })
    }

    /// Admissible closed range for each flat parameter.
    pub fn param_bounds(&self) -> (f64, f64) {
        match self {
            RadiationSpec::General { .. } | RadiationSpec::Proportional { .. } => (0.0, 1.0),
            RadiationSpec::Equal { n, .. } => (0.0, 1.0 / *n as f64),
        }
    }
}

fn open_unit(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange { name, value: v })
    }
}

/// `rho_n = delta_n^2 prod_{i<n} (1 - delta_i^2)`.
pub fn fractions_general(delta: &[f64]) -> Result<Vec<f64>> {
    let mut remaining = 1.0;
    delta
        .iter()
        .map(|&d| {
            open_unit("delta", d)?;
            let d2 = d * d;
            let rho = d2 * remaining;
            remaining *= 1.0 - d2;
            Ok(rho)
        })
        .collect()
}

/// `rho_n = delta^2 (1 - delta^2)^(n-1)`.
pub fn fractions_proportional(delta_sq: f64, n: usize) -> Result<Vec<f64>> {
    open_unit("delta_sq", delta_sq)?;
    Ok((0..n).map(|i| delta_sq * (1.0 - delta_sq).powi(i as i32)).collect())
}

/// `rho_n = rho` for every antenna, with `0 < rho <= 1/N`.
pub fn fractions_equal(rho: f64, n: usize) -> Result<Vec<f64>> {
    if !(rho > 0.0 && rho * n as f64 <= 1.0 + 1e-15) {
        return Err(Error::ParamOutOfRange { name: "rho", value: rho });
    }
    Ok(vec![rho; n])
}
