//! Deterministic source waveforms and observed snapshot blocks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::array::{steering_matrix, ArrayGeometry, CMatrix, DoaVector};
use crate::error::{Error, Result};

/// M x T block of source waveforms; column `t` is s(t).
#[derive(Debug, Clone, PartialEq)]
pub struct SourceWaveforms {
    samples: CMatrix,
}

impl SourceWaveforms {
    pub fn new(samples: CMatrix) -> Result<Self> {
        if samples.ncols() == 0 || samples.nrows() == 0 {
            return Err(Error::Config("waveform block must be non-empty".into()));
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("waveforms contain non-finite entries".into()));
        }
        Ok(Self { samples })
    }

    pub fn num_sources(&self) -> usize {
        self.samples.nrows()
    }

    pub fn num_snapshots(&self) -> usize {
        self.samples.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.samples
    }

    /// Total energy sum_t ||s(t)||^2.
    pub fn total_energy(&self) -> f64 {
        self.samples.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Every entry multiplied by a real scalar.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            samples: self.samples.map(|z| z * factor),
        }
    }
}

/// N x T block of array outputs; column `t` is x(t).
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshots {
    data: CMatrix,
}

impl Snapshots {
    pub fn new(data: CMatrix) -> Result<Self> {
        if data.ncols() == 0 || data.nrows() == 0 {
            return Err(Error::Config("snapshot block must be non-empty".into()));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Domain("snapshots contain non-finite entries".into()));
        }
        Ok(Self { data })
    }

    pub fn sensors(&self) -> usize {
        self.data.nrows()
    }

    pub fn num_snapshots(&self) -> usize {
        self.data.ncols()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.data
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            data: self.data.map(|z| z * factor),
        }
    }
}

/// Unit-modulus random-phase waveforms scaled to a common per-sample power.
///
/// All sources carry identical power, and the draw is fully determined by the
/// generator state.
pub fn generate_waveforms<R: Rng>(
    num_sources: usize,
    num_snapshots: usize,
    per_sample_power: f64,
    rng: &mut R,
) -> Result<SourceWaveforms> {
    if num_sources == 0 || num_snapshots == 0 {
        return Err(Error::Config("waveform block must be non-empty".into()));
    }
    if !(per_sample_power > 0.0) {
        return Err(Error::Domain(format!(
            "per-sample power must be positive (got {per_sample_power})"
        )));
    }
    let amp = per_sample_power.sqrt();
    let samples = DMatrix::from_fn(num_sources, num_snapshots, |_, _| {
        let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        Complex64::from_polar(amp, phase)
    });
    SourceWaveforms::new(samples)
}

/// x(t) = A(theta) s(t) + n(t), column-wise over the whole block.
pub fn synthesize(
    geometry: &ArrayGeometry,
    doas: &DoaVector,
    waveforms: &SourceWaveforms,
    noise: &CMatrix,
) -> Result<Snapshots> {
    let a = steering_matrix(geometry, doas)?;
    if waveforms.num_sources() != doas.len() {
        return Err(Error::Dimension(format!(
            "waveforms have {} sources, DOA vector has {}",
            waveforms.num_sources(),
            doas.len()
        )));
    }
    if noise.nrows() != geometry.sensors() || noise.ncols() != waveforms.num_snapshots() {
        return Err(Error::Dimension(format!(
            "noise block is {}x{}, expected {}x{}",
            noise.nrows(),
            noise.ncols(),
            geometry.sensors(),
            waveforms.num_snapshots()
        )));
    }
    Snapshots::new(&a * waveforms.matrix() + noise)
}
