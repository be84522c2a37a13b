//! Array geometry, arrival angles and steering vectors.
//!
//! The narrowband far-field manifold: sensor `n` at position `p_n` (in units
//! of half wavelengths) responds to a plane wave from angle `theta` (radians
//! from broadside) with phase `exp(j * pi * p_n * sin(theta))`.

use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Sensor positions in half-wavelength units, strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    positions: Vec<f64>,
}

impl ArrayGeometry {
    pub fn new(positions: Vec<f64>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::Config("array needs at least one sensor".into()));
        }
        if positions.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "sensor positions must be strictly increasing".into(),
            ));
        }
        Ok(Self { positions })
    }

    /// Uniform linear array with half-wavelength spacing: positions 0, 1, ..., n-1.
    pub fn ula(sensors: usize) -> Result<Self> {
        Self::new((0..sensors).map(|i| i as f64).collect())
    }

    pub fn sensors(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }
}

/// Arrival angles in radians, each inside (-pi/2, pi/2), strictly ascending.
///
/// Ascending order is the canonical form; estimators always return it so that
/// permutation ambiguity is resolved consistently.
#[derive(Debug, Clone, PartialEq)]
pub struct DoaVector {
    angles: Vec<f64>,
}

impl DoaVector {
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::Config("at least one arrival angle required".into()));
        }
        for &a in &angles {
            check_angle(a)?;
        }
        if angles.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config(
                "arrival angles must be strictly ascending".into(),
            ));
        }
        Ok(Self { angles })
    }

    pub fn from_degrees(degrees: &[f64]) -> Result<Self> {
        Self::new(degrees.iter().map(|d| d.to_radians()).collect())
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn to_degrees(&self) -> Vec<f64> {
        self.angles.iter().map(|a| a.to_degrees()).collect()
    }
}

fn check_angle(angle: f64) -> Result<()> {
    if !(angle.is_finite() && angle > -FRAC_PI_2 && angle < FRAC_PI_2) {
        return Err(Error::Domain(format!(
            "angle {angle} rad outside open interval (-pi/2, pi/2)"
        )));
    }
    Ok(())
}

/// Steering vector a(theta): unit-modulus phase response of every sensor.
pub fn steering_vector(geometry: &ArrayGeometry, angle: f64) -> Result<CVector> {
    check_angle(angle)?;
    let s = angle.sin();
    Ok(CVector::from_iterator(
        geometry.sensors(),
        geometry
            .positions
            .iter()
            .map(|&p| Complex64::from_polar(1.0, std::f64::consts::PI * p * s)),
    ))
}

/// Steering matrix A(theta) = [a(theta_1), ..., a(theta_M)].
///
/// Requires M < N for identifiability and checks full column rank, which can
/// fail for (numerically) coincident angles.
pub fn steering_matrix(geometry: &ArrayGeometry, doas: &DoaVector) -> Result<CMatrix> {
    let n = geometry.sensors();
    let m = doas.len();
    if m >= n {
        return Err(Error::Config(format!(
            "need fewer sources than sensors (M = {m}, N = {n})"
        )));
    }
    let mut a = CMatrix::zeros(n, m);
    for (k, &angle) in doas.angles().iter().enumerate() {
        a.set_column(k, &steering_vector(geometry, angle)?);
    }
    let sv = a.clone().singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if smin <= 1e-10 * smax {
        return Err(Error::Singular(format!(
            "steering matrix rank deficient (sigma_min/sigma_max = {:.3e})",
            smin / smax
        )));
    }
    Ok(a)
}
