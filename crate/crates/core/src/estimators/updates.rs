//! Closed-form concentration updates: per-snapshot texture estimates, the
//! speckle covariance refresh, waveform least squares, texture shape/scale
//! fits, and the angle search objective.

use num_complex::Complex64;

use crate::array::{steering_vector, ArrayGeometry, CMatrix, CVector, DoaVector};
use crate::error::{Error, Result};
use crate::noise::{TextureKind, TextureParams};
use crate::numerics::special::digamma;
use crate::numerics::{find_root_monotone, minimize_doa_objective, GridSpec, HermitianFactor, LsSolver};
use crate::signal::{Snapshots, SourceWaveforms};

/// Default bracket for the texture shape root.
pub const SHAPE_BRACKET: (f64, f64) = (1e-3, 1e3);

fn residual(x_t: &CVector, steering: &CMatrix, s_t: &CVector) -> CVector {
    x_t - steering * s_t
}

fn quad_form(r: &CVector, q_inv: &CMatrix) -> f64 {
    (r.adjoint() * q_inv * r)[(0, 0)].re
}

/// Texture estimate that maximizes the conditional likelihood for one
/// snapshot: `(x - A s)^H Q^{-1} (x - A s) / N`. Zero residual yields zero;
/// callers apply their own floor.
pub fn estimate_tau_ml(
    x_t: &CVector,
    steering: &CMatrix,
    s_t: &CVector,
    q_inv: &CMatrix,
) -> f64 {
    let r = residual(x_t, steering, s_t);
    (quad_form(&r, q_inv) / x_t.nrows() as f64).max(0.0)
}

/// Texture estimate that maximizes the per-snapshot joint likelihood.
pub fn estimate_tau_map(
    x_t: &CVector,
    steering: &CMatrix,
    s_t: &CVector,
    q_inv: &CMatrix,
    params: &TextureParams,
) -> f64 {
    let n = x_t.nrows() as f64;
    let (a, b) = (params.shape(), params.scale());
    let r = residual(x_t, steering, s_t);
    let q = quad_form(&r, q_inv).max(0.0);
    match params.kind() {
        TextureKind::Gamma => {
            let c = (a - n - 1.0) * b;
            0.5 * (c + (c * c + 4.0 * b * q).sqrt())
        }
        TextureKind::InverseGamma => (q + b) / (a + n + 1.0),
    }
}

/// Covariance refresh with the texture concentrated out under the
/// conditional likelihood:
///
/// `Q = (N/T) sum_t r_t r_t^H / (r_t^H Q_prev^{-1} r_t)`
///
/// Returned unnormalized; follow with trace normalization before use.
pub fn update_q_ml(
    snapshots: &Snapshots,
    steering: &CMatrix,
    waveforms: &SourceWaveforms,
    q_prev_inv: &CMatrix,
) -> Result<CMatrix> {
    weighted_scatter(snapshots, steering, waveforms, |r, t| {
        let denom = quad_form(r, q_prev_inv);
        if denom <= 0.0 {
            return Err(Error::DegenerateResidual { snapshot: t });
        }
        Ok(r.nrows() as f64 / denom)
    })
}

/// Covariance refresh with the texture concentrated out under the joint
/// likelihood (posterior variant), both texture families.
pub fn update_q_map(
    snapshots: &Snapshots,
    steering: &CMatrix,
    waveforms: &SourceWaveforms,
    q_prev_inv: &CMatrix,
    params: &TextureParams,
) -> Result<CMatrix> {
    let n = snapshots.sensors() as f64;
    let (a, b) = (params.shape(), params.scale());
    weighted_scatter(snapshots, steering, waveforms, |r, t| {
        let q = quad_form(r, q_prev_inv).max(0.0);
        let denom = match params.kind() {
            TextureKind::Gamma => {
                let c = (a - n - 1.0) * b;
                (c * c + 4.0 * b * q).sqrt() + c
            }
            TextureKind::InverseGamma => (b + q) / (a + n + 1.0),
        };
        if denom <= 0.0 {
            return Err(Error::DegenerateResidual { snapshot: t });
        }
        Ok(match params.kind() {
            TextureKind::Gamma => 2.0 / denom,
            TextureKind::InverseGamma => 1.0 / denom,
        })
    })
}

fn weighted_scatter<F>(
    snapshots: &Snapshots,
    steering: &CMatrix,
    waveforms: &SourceWaveforms,
    mut weight: F,
) -> Result<CMatrix>
where
    F: FnMut(&CVector, usize) -> Result<f64>,
{
    let n = snapshots.sensors();
    let t_count = snapshots.num_snapshots();
    if waveforms.num_snapshots() != t_count {
        return Err(Error::Dimension(format!(
            "snapshots have {t_count} columns, waveforms {}",
            waveforms.num_snapshots()
        )));
    }
    let mut acc = CMatrix::zeros(n, n);
    for t in 0..t_count {
        let x_t = CVector::from(snapshots.matrix().column(t));
        let s_t = CVector::from(waveforms.matrix().column(t));
        let r = residual(&x_t, steering, &s_t);
        let w = weight(&r, t)?;
        acc += &r * r.adjoint() * Complex64::from(w);
    }
    acc /= Complex64::from(t_count as f64);
    // sums of outer products are Hermitian; enforce it against rounding drift
    Ok((&acc + acc.adjoint()) * Complex64::from(0.5))
}

/// Per-snapshot least squares on whitened quantities:
/// `s_t = (A~^H A~)^{-1} A~^H x~_t`. The solution does not depend on the
/// texture weights, which only scale each snapshot's quadratic form.
pub fn estimate_waveforms(
    snapshots: &Snapshots,
    geometry: &ArrayGeometry,
    theta: &DoaVector,
    factor: &HermitianFactor,
) -> Result<SourceWaveforms> {
    let a = crate::array::steering_matrix(geometry, theta)?;
    let whitened_a = factor.inv_sqrt() * &a;
    let solver = LsSolver::new(&whitened_a)?;
    let whitened_x = factor.inv_sqrt() * snapshots.matrix();
    let t_count = snapshots.num_snapshots();
    let mut s = CMatrix::zeros(theta.len(), t_count);
    for t in 0..t_count {
        let coef = solver.solve(&CVector::from(whitened_x.column(t)));
        s.set_column(t, &coef);
    }
    SourceWaveforms::new(s)
}

/// Scale estimate given the shape: `sum(tau) / (T a)` for gamma,
/// `T a / sum(1/tau)` for inverse gamma.
pub fn estimate_b(taus: &[f64], shape: f64, kind: TextureKind) -> Result<f64> {
    validate_taus(taus)?;
    if !(shape > 0.0) {
        return Err(Error::Domain(format!("shape must be positive (got {shape})")));
    }
    let t_count = taus.len() as f64;
    Ok(match kind {
        TextureKind::Gamma => taus.iter().sum::<f64>() / (t_count * shape),
        TextureKind::InverseGamma => {
            t_count * shape / taus.iter().map(|&tau| 1.0 / tau).sum::<f64>()
        }
    })
}

/// Shape estimate with bracket clamping information.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeEstimate {
    pub value: f64,
    pub clamped: bool,
}

/// Shape estimate: root of `ln(a) - Psi(a) = s`, where `s` compares the
/// arithmetic and geometric means of the texture values (gamma) or of their
/// reciprocals (inverse gamma). The left side decreases strictly from +inf
/// to 0, so the root is unique; roots outside the bracket are clamped to the
/// nearest edge and flagged.
pub fn estimate_a(taus: &[f64], kind: TextureKind, bracket: (f64, f64)) -> Result<ShapeEstimate> {
    validate_taus(taus)?;
    let (lo, hi) = bracket;
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::Config(format!("invalid shape bracket [{lo}, {hi}]")));
    }
    let t_count = taus.len() as f64;
    let rhs = match kind {
        TextureKind::Gamma => {
            let mean = taus.iter().sum::<f64>() / t_count;
            let mean_ln = taus.iter().map(|&tau| tau.ln()).sum::<f64>() / t_count;
            mean.ln() - mean_ln
        }
        TextureKind::InverseGamma => {
            let mean_inv = taus.iter().map(|&tau| 1.0 / tau).sum::<f64>() / t_count;
            let mean_ln_inv = taus.iter().map(|&tau| -(tau.ln())).sum::<f64>() / t_count;
            mean_inv.ln() - mean_ln_inv
        }
    };
    let gap = |a: f64| a.ln() - digamma(a) - rhs;
    // rhs >= 0 by the AM-GM inequality; equality pushes the root to +inf
    if gap(hi) >= 0.0 {
        return Ok(ShapeEstimate {
            value: hi,
            clamped: true,
        });
    }
    if gap(lo) <= 0.0 {
        return Ok(ShapeEstimate {
            value: lo,
            clamped: true,
        });
    }
    let value = find_root_monotone(gap, lo, hi, 1e-11)?;
    Ok(ShapeEstimate {
        value,
        clamped: false,
    })
}

/// Angle estimate: minimize the texture-weighted whitened projection residual
///
/// `sum_t (1/tau_t) || P_perp(A~(theta)) x~_t ||^2`
///
/// over ascending angle tuples via coarse search plus refinement. A warm
/// start (previous iterate) guarantees the result is never worse than it.
pub fn estimate_theta(
    snapshots: &Snapshots,
    geometry: &ArrayGeometry,
    taus: &[f64],
    factor: &HermitianFactor,
    num_sources: usize,
    grid: &GridSpec,
    warm_start: Option<&DoaVector>,
) -> Result<DoaVector> {
    let t_count = snapshots.num_snapshots();
    if taus.len() != t_count {
        return Err(Error::Dimension(format!(
            "{} texture values for {t_count} snapshots",
            taus.len()
        )));
    }
    if taus.iter().any(|&tau| !(tau > 0.0)) {
        return Err(Error::Domain("texture weights must be positive".into()));
    }
    if num_sources >= snapshots.sensors() {
        return Err(Error::Config(format!(
            "need fewer sources than sensors (M = {num_sources}, N = {})",
            snapshots.sensors()
        )));
    }
    let whitened_x = factor.inv_sqrt() * snapshots.matrix();
    let weights: Vec<f64> = taus.iter().map(|&tau| 1.0 / tau).collect();
    let n = snapshots.sensors();
    // contiguous column-major copy for fast per-snapshot dot products
    let wx: Vec<Complex64> = whitened_x.as_slice().to_vec();
    let x_norms: Vec<f64> = (0..t_count)
        .map(|t| wx[t * n..(t + 1) * n].iter().map(|z| z.norm_sqr()).sum())
        .collect();
    // whitened steering columns are reused heavily across the coarse grid
    let column_cache = std::cell::RefCell::new(std::collections::HashMap::<u64, Vec<Complex64>>::new());
    let objective = |angles: &[f64]| -> f64 {
        let mut cache = column_cache.borrow_mut();
        for &angle in angles {
            let key = angle.to_bits();
            if !cache.contains_key(&key) {
                let col = match steering_vector(geometry, angle) {
                    Ok(v) => v,
                    Err(_) => return f64::INFINITY,
                };
                cache.insert(key, (factor.inv_sqrt() * col).as_slice().to_vec());
            }
        }
        // orthonormalize the whitened steering columns (modified Gram-Schmidt
        // with one reorthogonalization pass); residual energy per snapshot is
        // then ||x||^2 - ||Q1^H x||^2
        let m = angles.len();
        let mut basis: Vec<Complex64> = Vec::with_capacity(m * n);
        for &angle in angles {
            let col = &cache[&angle.to_bits()];
            let start = basis.len();
            basis.extend_from_slice(col);
            let norm_before: f64 = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for _ in 0..2 {
                for j in (0..start).step_by(n) {
                    let mut dot = Complex64::new(0.0, 0.0);
                    for i in 0..n {
                        dot += basis[j + i].conj() * basis[start + i];
                    }
                    for i in 0..n {
                        let adj = basis[j + i] * dot;
                        basis[start + i] -= adj;
                    }
                }
            }
            let norm: f64 = basis[start..start + n]
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>()
                .sqrt();
            if norm <= 1e-8 * norm_before {
                return f64::INFINITY;
            }
            let inv = Complex64::from(1.0 / norm);
            for i in 0..n {
                basis[start + i] *= inv;
            }
        }
        let mut total = 0.0;
        for (t, w) in weights.iter().enumerate() {
            let x_col = &wx[t * n..(t + 1) * n];
            let mut projected = 0.0;
            for k in 0..m {
                let q_col = &basis[k * n..(k + 1) * n];
                let mut dot = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    dot += q_col[i].conj() * x_col[i];
                }
                projected += dot.norm_sqr();
            }
            total += w * (x_norms[t] - projected).max(0.0);
        }
        total
    };
    minimize_doa_objective(objective, num_sources, grid, warm_start)
}

fn validate_taus(taus: &[f64]) -> Result<()> {
    if taus.is_empty() {
        return Err(Error::Config("texture vector must be non-empty".into()));
    }
    if taus.iter().any(|&tau| !(tau > 0.0) || !tau.is_finite()) {
        return Err(Error::Domain("texture values must be positive".into()));
    }
    Ok(())
}

/// Helper used by tests and the verification suites: per-snapshot residual
/// quadratic form `r^H Q^{-1} r` through the factor's inverse.
pub fn residual_quad_form(
    x_t: &CVector,
    steering: &CMatrix,
    s_t: &CVector,
    q_inv: &CMatrix,
) -> f64 {
    quad_form(&residual(x_t, steering, s_t), q_inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{steering_matrix, ArrayGeometry};
    use crate::noise::SpeckleCovariance;
    use crate::numerics::hermitian_factor;
    use crate::signal::{generate_waveforms, synthesize};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn small_instance(seed: u64) -> (ArrayGeometry, DoaVector, SourceWaveforms, Snapshots) {
        let geom = ArrayGeometry::ula(6).unwrap();
        let theta = DoaVector::from_degrees(&[30.0, 60.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = generate_waveforms(2, 10, 1.0, &mut rng).unwrap();
        let noise = CMatrix::from_fn(6, 10, |i, j| {
            Complex64::new(
                0.3 * ((i * 7 + j * 3) as f64).sin(),
                0.2 * ((i * 5 + j * 11) as f64).cos(),
            )
        });
        let x = synthesize(&geom, &theta, &s, &noise).unwrap();
        (geom, theta, s, x)
    }

    #[test]
    fn tau_ml_is_zero_for_exact_fit() {
        let (geom, theta, s, _) = small_instance(5);
        let a = steering_matrix(&geom, &theta).unwrap();
        let x_t = &a * CVector::from(s.matrix().column(0));
        let eye = CMatrix::identity(6, 6);
        let tau = estimate_tau_ml(&x_t, &a, &CVector::from(s.matrix().column(0)), &eye);
        assert_abs_diff_eq!(tau, 0.0, epsilon = 1e-20);
    }

    #[test]
    fn tau_ml_with_identity_is_mean_square_residual() {
        let n = 6;
        let a = CMatrix::zeros(n, 1); // zero steering: residual is x itself
        let x = CVector::from_fn(n, |i, _| Complex64::new(i as f64, -1.0));
        let eye = CMatrix::identity(n, n);
        let tau = estimate_tau_ml(&x, &a, &CVector::zeros(1), &eye);
        assert_abs_diff_eq!(tau, x.norm_squared() / n as f64, epsilon = 1e-12);
    }

    #[test]
    fn tau_map_zero_residual_limits() {
        let n = 6;
        let a = CMatrix::identity(n, 1);
        let x = CVector::zeros(n);
        let eye = CMatrix::identity(n, n);
        // t branch: b / (a + N + 1) = 2 / 8.1
        let t_params = TextureParams::new(TextureKind::InverseGamma, 1.1, 2.0).unwrap();
        let tau_t = estimate_tau_map(&x, &a, &CVector::zeros(1), &eye, &t_params);
        assert_abs_diff_eq!(tau_t, 2.0 / 8.1, epsilon = 1e-12);
        // K branch with a < N + 1 collapses to zero
        let k_params = TextureParams::new(TextureKind::Gamma, 1.6, 2.0).unwrap();
        let tau_k = estimate_tau_map(&x, &a, &CVector::zeros(1), &eye, &k_params);
        assert_abs_diff_eq!(tau_k, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn q_update_on_orthogonal_unit_residuals_has_trace_n() {
        // x_t = e_t, zero signal, T = N: scatter of orthogonal unit vectors
        let n = 4;
        let x = Snapshots::new(CMatrix::identity(n, n)).unwrap();
        let steering = CMatrix::zeros(n, 1);
        let s = SourceWaveforms::new(CMatrix::zeros(1, n)).unwrap();
        let eye = CMatrix::identity(n, n);
        let q = update_q_ml(&x, &steering, &s, &eye).unwrap();
        let trace: f64 = q.diagonal().iter().map(|z| z.re).sum();
        assert_abs_diff_eq!(trace, n as f64, epsilon = 1e-12);
        assert!((&q - q.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn q_updates_are_hermitian_on_random_input() {
        let (geom, theta, s, x) = small_instance(6);
        let a = steering_matrix(&geom, &theta).unwrap();
        let eye = CMatrix::identity(6, 6);
        let q1 = update_q_ml(&x, &a, &s, &eye).unwrap();
        assert!((&q1 - q1.adjoint()).norm() < 1e-12 * q1.norm());
        let params = TextureParams::new(TextureKind::Gamma, 1.6, 2.0).unwrap();
        let q2 = update_q_map(&x, &a, &s, &eye, &params).unwrap();
        assert!((&q2 - q2.adjoint()).norm() < 1e-12 * q2.norm());
    }

    #[test]
    fn map_q_update_at_b_zero_limit_matches_ml_up_to_known_ratio() {
        // t branch with b -> 0: Eq ratio (a + N + 1) / N against the ML update
        let (geom, theta, s, x) = small_instance(7);
        let a_mat = steering_matrix(&geom, &theta).unwrap();
        let eye = CMatrix::identity(6, 6);
        let a = 1.1;
        let params = TextureParams::new(TextureKind::InverseGamma, a, 1e-300).unwrap();
        let q_map = update_q_map(&x, &a_mat, &s, &eye, &params).unwrap();
        let q_ml = update_q_ml(&x, &a_mat, &s, &eye).unwrap();
        let ratio = 6.0 / (a + 6.0 + 1.0);
        assert!((q_ml - &q_map * Complex64::from(ratio)).norm() < 1e-9 * q_map.norm());
    }

    #[test]
    fn waveforms_recover_exactly_without_noise() {
        let geom = ArrayGeometry::ula(6).unwrap();
        let theta = DoaVector::from_degrees(&[30.0, 60.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = generate_waveforms(2, 10, 1.0, &mut rng).unwrap();
        let x = synthesize(&geom, &theta, &s, &CMatrix::zeros(6, 10)).unwrap();
        let q = crate::noise::build_speckle_covariance(6, 1.0).unwrap();
        let factor = hermitian_factor(&q).unwrap();
        let fitted = estimate_waveforms(&x, &geom, &theta, &factor).unwrap();
        assert!((fitted.matrix() - s.matrix()).norm() < 1e-10);
    }

    #[test]
    fn single_source_waveform_is_matched_filter_output() {
        let geom = ArrayGeometry::ula(5).unwrap();
        let theta = DoaVector::from_degrees(&[20.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = generate_waveforms(1, 3, 1.0, &mut rng).unwrap();
        let noise = CMatrix::from_fn(5, 3, |i, j| Complex64::new(0.1 * i as f64, 0.1 * j as f64));
        let x = synthesize(&geom, &theta, &s, &noise).unwrap();
        let factor = hermitian_factor(&SpeckleCovariance::identity(5)).unwrap();
        let fitted = estimate_waveforms(&x, &geom, &theta, &factor).unwrap();
        let a = steering_matrix(&geom, &theta).unwrap();
        let a0 = CVector::from(a.column(0));
        for t in 0..3 {
            let expected =
                (a0.adjoint() * CVector::from(x.matrix().column(t)))[(0, 0)] / a0.norm_squared();
            assert!((fitted.matrix()[(0, t)] - expected).norm() < 1e-10);
        }
    }

    #[test]
    fn scale_fit_trivial_cases() {
        let a = 1.6;
        // gamma with all-ones textures: b = 1/a
        let b_k = estimate_b(&[1.0; 8], a, TextureKind::Gamma).unwrap();
        assert_abs_diff_eq!(b_k, 1.0 / a, epsilon = 1e-12);
        // inverse gamma with constant textures c: b = a * c
        let b_t = estimate_b(&[2.5; 8], a, TextureKind::InverseGamma).unwrap();
        assert_abs_diff_eq!(b_t, a * 2.5, epsilon = 1e-12);
    }

    #[test]
    fn equal_textures_clamp_shape_at_upper_bracket() {
        let fit = estimate_a(&[3.0; 10], TextureKind::Gamma, SHAPE_BRACKET).unwrap();
        assert!(fit.clamped);
        assert_abs_diff_eq!(fit.value, 1e3, epsilon = 1e-9);
    }

    #[test]
    fn theta_estimate_ignores_constant_weight_scaling() {
        let (geom, _, _, x) = small_instance(10);
        let factor = hermitian_factor(&SpeckleCovariance::identity(6)).unwrap();
        let grid = GridSpec::default_search();
        let base = estimate_theta(&x, &geom, &[1.0; 10], &factor, 2, &grid, None).unwrap();
        let scaled = estimate_theta(&x, &geom, &[7.5; 10], &factor, 2, &grid, None).unwrap();
        for (a, b) in base.angles().iter().zip(scaled.angles().iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn noiseless_theta_estimate_hits_truth() {
        let geom = ArrayGeometry::ula(6).unwrap();
        let truth = DoaVector::from_degrees(&[30.0, 60.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = generate_waveforms(2, 10, 1.0, &mut rng).unwrap();
        let x = synthesize(&geom, &truth, &s, &CMatrix::zeros(6, 10)).unwrap();
        let q = crate::noise::build_speckle_covariance(6, 1.0).unwrap();
        let factor = hermitian_factor(&q).unwrap();
        let grid = GridSpec::default_search();
        let est = estimate_theta(&x, &geom, &[1.0; 10], &factor, 2, &grid, None).unwrap();
        for (e, t) in est.angles().iter().zip(truth.angles().iter()) {
            assert!((e - t).abs() < 0.011f64.to_radians());
        }
    }
}
