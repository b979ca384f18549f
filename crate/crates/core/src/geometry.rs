//! Dual-waveguide layout, line-of-sight channels and effective gains.
//!
//! The covert waveguide runs along `y = -D` and the jamming waveguide along
//! `y = +D`, both at height `H` and spanning `x` in `[0, L]`. Ground nodes
//! (Bob and the wardens) sit at `z = 0`.
//!
//! Bob's position in the reference parameter table is printed with four
//! entries; the toolkit treats it as the 3-vector `[2.1, -0.3, 0]`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mc_oracle::{stream_rng, uniform};

pub type Point3 = [f64; 3];

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Smallest admissible antenna-user distance in meters.
pub const MIN_DISTANCE: f64 = 1e-9;

/// Which waveguide an antenna set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// Covert-signal waveguide at `y = -D`.
    C,
    /// Jamming waveguide at `y = +D`.
    J,
}

/// Static geometry of the downlink: waveguides, wavelengths and ground nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemGeometry {
    length: f64,
    height: f64,
    offset: f64,
    wavelength: f64,
    guided_wavelength: f64,
    n_eff: f64,
    eta: f64,
    bob: Point3,
    wardens: Vec<Point3>,
}

impl SystemGeometry {
    /// Builds a geometry from the carrier frequency in hertz.
    pub fn new(
        length: f64,
        height: f64,
        offset: f64,
        carrier_hz: f64,
        n_eff: f64,
        bob: Point3,
        wardens: Vec<Point3>,
    ) -> Result<Self> {
        if !(carrier_hz.is_finite() && carrier_hz > 0.0) {
            return Err(Error::ParamOutOfRange {
                name: "carrier_hz",
                value: carrier_hz,
            });
        }
        Self::with_wavelength(
            length,
            height,
            offset,
            SPEED_OF_LIGHT / carrier_hz,
            n_eff,
            bob,
            wardens,
        )
    }

    /// Builds a geometry from the free-space wavelength in meters.
    pub fn with_wavelength(
        length: f64,
        height: f64,
        offset: f64,
        wavelength: f64,
        n_eff: f64,
        bob: Point3,
        wardens: Vec<Point3>,
    ) -> Result<Self> {
        check(length.is_finite() && length > 0.0, "length", length)?;
        check(height.is_finite() && height >= 0.0, "height", height)?;
        check(offset.is_finite() && offset >= 0.0, "offset", offset)?;
        check(wavelength.is_finite() && wavelength > 0.0, "wavelength", wavelength)?;
        check(n_eff.is_finite() && n_eff >= 1.0, "n_eff", n_eff)?;
        let geom = SystemGeometry {
            length,
            height,
            offset,
            wavelength,
            guided_wavelength: wavelength / n_eff,
            n_eff,
            eta: wavelength * wavelength / (16.0 * PI * PI),
            bob,
            wardens: Vec::new(),
        };
        ground_check(0, &bob)?;
        geom.with_wardens(wardens)
    }

    /// Returns a copy with a different warden set.
    pub fn with_wardens(&self, wardens: Vec<Point3>) -> Result<Self> {
        for (i, w) in wardens.iter().enumerate() {
            ground_check(i + 1, w)?;
        }
        Ok(SystemGeometry {
            wardens,
            ..self.clone()
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }
    pub fn height(&self) -> f64 {
        self.height
    }
    pub fn offset(&self) -> f64 {
        self.offset
    }
    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
    pub fn guided_wavelength(&self) -> f64 {
        self.guided_wavelength
    }
    pub fn n_eff(&self) -> f64 {
        self.n_eff
    }
    /// Free-space path-loss constant `lambda^2 / (16 pi^2)`.
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn bob(&self) -> Point3 {
        self.bob
    }
    pub fn wardens(&self) -> &[Point3] {
        &self.wardens
    }

    /// Effective gain `|sum sqrt(rho_n) h_n omega_n|^2` from one waveguide to `user`.
    pub fn gain(&self, side: Side, x: &[f64], rho: &[f64], user: Point3) -> Result<f64> {
        let pts = pa_positions(x, side, self)?;
        let h = freespace_channel(&pts, user, self.wavelength)?;
        let omega = waveguide_phase(x, self.guided_wavelength)?;
        effective_gain(&h, rho, &omega)
    }
}

fn check(ok: bool, name: &'static str, value: f64) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::ParamOutOfRange { name, value })
    }
}

fn ground_check(index: usize, p: &Point3) -> Result<()> {
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("ground node position"));
    }
    if p[2] != 0.0 {
        return Err(Error::NotOnGround { index, z: p[2] });
    }
    Ok(())
}

/// Complex free-space channel from each antenna on a waveguide to one user.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    pub entries: Vec<Complex64>,
}

/// 3-D coordinates of antennas at `x` on the given waveguide.
pub fn pa_positions(x: &[f64], side: Side, geom: &SystemGeometry) -> Result<Vec<Point3>> {
    let y = match side {
        Side::C => -geom.offset,
        Side::J => geom.offset,
    };
    x.iter()
        .enumerate()
        .map(|(index, &xi)| {
            if !xi.is_finite() {
                Err(Error::NonFinite("antenna position"))
            } else if !(0.0..=geom.length).contains(&xi) {
                Err(Error::OutOfWaveguide {
                    index,
                    x: xi,
                    length: geom.length,
                })
            } else {
                Ok([xi, y, geom.height])
            }
        })
        .collect()
}

/// Line-of-sight channel `sqrt(eta) exp(-j 2 pi d / lambda) / d` per antenna.
pub fn freespace_channel(pa_pts: &[Point3], user: Point3, wavelength: f64) -> Result<ChannelVector> {
    let sqrt_eta = wavelength / (4.0 * PI);
    let k = 2.0 * PI / wavelength;
    let entries = pa_pts
        .iter()
        .enumerate()
        .map(|(index, p)| {
            let d = distance(p, &user);
            if !d.is_finite() {
                return Err(Error::NonFinite("antenna-user distance"));
            }
            if d < MIN_DISTANCE {
                return Err(Error::DegenerateDistance { index, distance: d });
            }
            Ok(Complex64::from_polar(sqrt_eta / d, -k * d))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChannelVector { entries })
}

/// In-waveguide phase `exp(-j 2 pi x / lambda_g)` per antenna.
pub fn waveguide_phase(x: &[f64], guided_wavelength: f64) -> Result<Vec<Complex64>> {
    if !(guided_wavelength.is_finite() && guided_wavelength > 0.0) {
        return Err(Error::ParamOutOfRange {
            name: "guided_wavelength",
            value: guided_wavelength,
        });
    }
    x.iter()
        .map(|&xi| {
            if xi.is_finite() {
                Ok(Complex64::from_polar(1.0, -2.0 * PI * xi / guided_wavelength))
            } else {
                Err(Error::NonFinite("antenna position"))
            }
        })
        .collect()
}

/// Coherent gain `|sum_n sqrt(rho_n) h_n omega_n|^2`, excluding transmit power.
pub fn effective_gain(h: &ChannelVector, rho: &[f64], omega: &[Complex64]) -> Result<f64> {
    let n = h.entries.len();
    for len in [rho.len(), omega.len()] {
        if len != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: len,
            });
        }
    }
    for (index, &r) in rho.iter().enumerate() {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::ProbOutOfRange { index, value: r });
        }
    }
    let sum: Complex64 = h
        .entries
        .iter()
        .zip(rho)
        .zip(omega)
        .map(|((hn, &r), wn)| hn * wn * r.sqrt())
        .sum();
    Ok(sum.norm_sqr())
}

fn distance(a: &Point3, b: &Point3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

const PLACEMENT_STREAM: u64 = 1 << 44;

/// `count` ground points drawn uniformly from `x_range x y_range`.
///
/// Point `i` comes from its own stream, so a smaller count yields a prefix
/// of a larger one.
pub fn place_wardens(count: usize, x_range: (f64, f64), y_range: (f64, f64), seed: u64) -> Vec<Point3> {
    (0..count)
        .map(|i| {
            let mut rng = stream_rng(seed, PLACEMENT_STREAM + i as u64, 0);
            let x = x_range.0 + (x_range.1 - x_range.0) * uniform(&mut rng);
            let y = y_range.0 + (y_range.1 - y_range.0) * uniform(&mut rng);
            [x, y, 0.0]
        })
        .collect()
}
