//! Compound-Gaussian (SIRP) noise: n(t) = sqrt(tau(t)) * sigma(t).
//!
//! The texture tau(t) is i.i.d. positive (gamma for K-distributed noise,
//! inverse gamma for t-distributed noise) and the speckle sigma(t) is a
//! circular complex Gaussian with covariance Q, trace-normalized to N so the
//! texture/speckle split is identifiable.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::array::CMatrix;
use crate::error::{Error, Result};
use crate::numerics::special::ln_gamma;
use crate::signal::SourceWaveforms;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TextureKind {
    /// Gamma-distributed texture: K-distributed noise.
    Gamma,
    /// Inverse-gamma-distributed texture: t-distributed noise.
    InverseGamma,
}

/// Texture distribution with shape `a` and scale `b`, both positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TextureParams {
    kind: TextureKind,
    shape: f64,
    scale: f64,
}

impl TextureParams {
    pub fn new(kind: TextureKind, shape: f64, scale: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) || !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain(format!(
                "texture shape and scale must be positive (a = {shape}, b = {scale})"
            )));
        }
        Ok(Self { kind, shape, scale })
    }

    pub fn kind(&self) -> TextureKind {
        self.kind
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn pdf(&self, tau: f64) -> Result<f64> {
        Ok(self.ln_pdf(tau)?.exp())
    }

    pub fn ln_pdf(&self, tau: f64) -> Result<f64> {
        if !(tau > 0.0) {
            return Err(Error::Domain(format!(
                "texture density requires tau > 0 (got {tau})"
            )));
        }
        let (a, b) = (self.shape, self.scale);
        Ok(match self.kind {
            TextureKind::Gamma => -ln_gamma(a) - a * b.ln() + (a - 1.0) * tau.ln() - tau / b,
            TextureKind::InverseGamma => {
                a * b.ln() - ln_gamma(a) - (a + 1.0) * tau.ln() - b / tau
            }
        })
    }

    /// E{tau}: `a*b` for gamma, `b/(a-1)` for inverse gamma (needs a > 1).
    pub fn mean(&self) -> Result<f64> {
        match self.kind {
            TextureKind::Gamma => Ok(self.shape * self.scale),
            TextureKind::InverseGamma => {
                if self.shape <= 1.0 {
                    Err(Error::UndefinedMean { shape: self.shape })
                } else {
                    Ok(self.scale / (self.shape - 1.0))
                }
            }
        }
    }

    /// i.i.d. texture draws. Inverse gamma is sampled as the reciprocal of a
    /// gamma draw with inverted scale.
    pub fn sample<R: Rng>(&self, count: usize, rng: &mut R) -> Vec<f64> {
        match self.kind {
            TextureKind::Gamma => {
                let g = Gamma::new(self.shape, self.scale).expect("validated params");
                (0..count).map(|_| g.sample(rng)).collect()
            }
            TextureKind::InverseGamma => {
                let g = Gamma::new(self.shape, 1.0 / self.scale).expect("validated params");
                (0..count).map(|_| 1.0 / g.sample(rng)).collect()
            }
        }
    }
}

/// Hermitian speckle covariance. Not necessarily trace-normalized; use
/// [`crate::numerics::normalize_trace`] to impose tr(Q) = N.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeckleCovariance {
    q: CMatrix,
}

impl SpeckleCovariance {
    pub fn new(q: CMatrix) -> Result<Self> {
        if q.nrows() != q.ncols() || q.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "covariance must be square and non-empty ({}x{})",
                q.nrows(),
                q.ncols()
            )));
        }
        let asym = (&q - q.adjoint()).norm();
        if asym > 1e-12 * q.norm().max(1.0) {
            return Err(Error::Domain(format!(
                "covariance is not Hermitian (asymmetry {asym:.3e})"
            )));
        }
        Ok(Self { q })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            q: CMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.q
    }

    pub fn trace(&self) -> f64 {
        self.q.diagonal().iter().map(|z| z.re).sum()
    }

    /// True when tr(Q) = N within the stated tolerance.
    pub fn is_trace_normalized(&self, tol: f64) -> bool {
        (self.trace() - self.dim() as f64).abs() <= tol * self.dim() as f64
    }
}

/// Noise block plus the texture draws that generated it (kept for diagnostics).
#[derive(Debug, Clone)]
pub struct NoiseBlock {
    noise: CMatrix,
    textures: Vec<f64>,
}

impl NoiseBlock {
    pub fn noise(&self) -> &CMatrix {
        &self.noise
    }

    pub fn textures(&self) -> &[f64] {
        &self.textures
    }
}

/// Speckle covariance recipe [Q]_{m,n} = sigma^2 * 0.9^|m-n| * exp(j*pi*(m-n)/2).
pub fn build_speckle_covariance(sensors: usize, sigma_sq: f64) -> Result<SpeckleCovariance> {
    if sensors == 0 {
        return Err(Error::Config("covariance dimension must be positive".into()));
    }
    if !(sigma_sq > 0.0) {
        return Err(Error::Domain(format!(
            "sigma^2 must be positive (got {sigma_sq})"
        )));
    }
    let q = DMatrix::from_fn(sensors, sensors, |m, n| {
        let d = m as f64 - n as f64;
        Complex64::from_polar(
            sigma_sq * 0.9f64.powi((m as i64 - n as i64).unsigned_abs() as i32),
            std::f64::consts::FRAC_PI_2 * d,
        )
    });
    SpeckleCovariance::new(q)
}

/// Draw a SIRP noise block: column t is sqrt(tau(t)) * L * g(t) with L L^H = Q
/// and g(t) a unit-covariance circular complex Gaussian.
pub fn sample_noise<R: Rng>(
    params: &TextureParams,
    covariance: &SpeckleCovariance,
    num_snapshots: usize,
    rng: &mut R,
) -> Result<NoiseBlock> {
    if num_snapshots == 0 {
        return Err(Error::Config("snapshot count must be positive".into()));
    }
    if !covariance.is_trace_normalized(1e-6) {
        return Err(Error::Domain(format!(
            "speckle covariance must be trace-normalized (tr = {}, N = {})",
            covariance.trace(),
            covariance.dim()
        )));
    }
    let chol = nalgebra::Cholesky::new(covariance.matrix().clone()).ok_or_else(|| {
        Error::Singular("speckle covariance is not positive definite".into())
    })?;
    let l = chol.l();
    let n = covariance.dim();
    let textures = params.sample(num_snapshots, rng);
    let mut noise = CMatrix::zeros(n, num_snapshots);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    for (t, &tau) in textures.iter().enumerate() {
        let g = nalgebra::DVector::from_fn(n, |_, _| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re * scale, im * scale)
        });
        noise.set_column(t, &(&l * g * Complex64::from(tau.sqrt())));
    }
    Ok(NoiseBlock { noise, textures })
}

/// SNR = sum_t ||s(t)||^2 / (T * E{tau} * tr(Q)), as a linear ratio.
pub fn compute_snr(
    waveforms: &SourceWaveforms,
    params: &TextureParams,
    covariance: &SpeckleCovariance,
) -> Result<f64> {
    let t = waveforms.num_snapshots() as f64;
    Ok(waveforms.total_energy() / (t * params.mean()? * covariance.trace()))
}

pub fn linear_to_db(snr: f64) -> f64 {
    10.0 * snr.log10()
}

pub fn db_to_linear(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

/// Rescale waveforms so that [`compute_snr`] hits the target exactly.
pub fn scale_waveforms_to_snr(
    waveforms: &SourceWaveforms,
    target_snr: f64,
    params: &TextureParams,
    covariance: &SpeckleCovariance,
) -> Result<SourceWaveforms> {
    if !(target_snr > 0.0) {
        return Err(Error::Domain(format!(
            "target SNR must be positive (got {target_snr})"
        )));
    }
    let current = compute_snr(waveforms, params, covariance)?;
    if current <= 0.0 {
        return Err(Error::Domain(
            "cannot scale all-zero waveforms to a positive SNR".into(),
        ));
    }
    Ok(waveforms.scaled((target_snr / current).sqrt()))
}
