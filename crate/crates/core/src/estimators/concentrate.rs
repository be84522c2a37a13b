//! Shared stepwise-concentration driver behind the iterative estimators.
//!
//! Per outer iteration:
//!   1. angles and waveforms from the current (texture, covariance) pair,
//!      warm-started at the previous angles; for the posterior flavor the
//!      texture shape and scale are refitted from the current textures;
//!   2. covariance refresh from the new residuals with the texture
//!      concentrated out, then trace normalization (see
//!      [`super::covariance`] for the conditioning constraint);
//!   3. texture refresh from the same residuals through the new covariance.
//!
//! The likelihood trace records, per iteration, the (conditional or joint)
//! log-likelihood of the bundle that step 1 worked with.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::array::{steering_matrix, ArrayGeometry, CVector, DoaVector};
use crate::error::{Error, Result};
use crate::noise::{SpeckleCovariance, TextureKind, TextureParams};
use crate::numerics::{hermitian_factor, GridSpec};
use crate::signal::Snapshots;

use super::covariance::{covariance_step, Q_CONDITION_FLOOR};
use super::likelihood::{conditional_log_likelihood, joint_log_likelihood};
use super::state::{EstimateReport, EstimatorState, StopCriterion};
use super::updates::{
    estimate_a, estimate_b, estimate_tau_map, estimate_tau_ml, estimate_theta,
    estimate_waveforms, SHAPE_BRACKET,
};

/// Numerical floor for texture estimates entering denominators.
pub const TAU_FLOOR: f64 = 1e-10;

/// Which likelihood the texture updates concentrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Flavor {
    /// Texture treated as deterministic: conditional likelihood only.
    Conditional,
    /// Texture prior included; shape and scale refitted every iteration.
    Posterior(TextureKind),
}

pub(crate) struct ConcentrationSetup<'a> {
    pub geometry: &'a ArrayGeometry,
    pub num_sources: usize,
    pub grid: &'a GridSpec,
    pub stop: &'a StopCriterion,
    pub flavor: Flavor,
}

pub(crate) fn run_concentration(
    snapshots: &Snapshots,
    setup: &ConcentrationSetup<'_>,
    seed: u64,
) -> Result<EstimateReport> {
    let n = snapshots.sensors();
    let t_count = snapshots.num_snapshots();
    if setup.num_sources >= n {
        return Err(Error::Config(format!(
            "need fewer sources than sensors (M = {}, N = {n})",
            setup.num_sources
        )));
    }

    let mut taus = initial_taus(setup.flavor, t_count, seed);
    let mut covariance = SpeckleCovariance::identity(n);
    let mut factor = hermitian_factor(&covariance)?;
    let mut theta_prev: Option<DoaVector> = None;

    let mut theta_trace = Vec::new();
    let mut ll_trace = Vec::new();
    let mut tau_floored = false;
    let mut shape_clamped = false;
    let mut last_state: Option<EstimatorState> = None;

    for iteration in 0..setup.stop.max_iterations {
        let theta = estimate_theta(
            snapshots,
            setup.geometry,
            &taus,
            &factor,
            setup.num_sources,
            setup.grid,
            theta_prev.as_ref(),
        )?;
        let waveforms = estimate_waveforms(snapshots, setup.geometry, &theta, &factor)?;

        let texture_fit = match setup.flavor {
            Flavor::Conditional => None,
            Flavor::Posterior(kind) => {
                let shape = estimate_a(&taus, kind, SHAPE_BRACKET)?;
                shape_clamped |= shape.clamped;
                let scale = estimate_b(&taus, shape.value, kind)?;
                Some(TextureParams::new(kind, shape.value, scale)?)
            }
        };

        let ll = match &texture_fit {
            None => conditional_log_likelihood(
                snapshots,
                setup.geometry,
                &theta,
                &waveforms,
                &factor,
                &taus,
            )?,
            Some(params) => joint_log_likelihood(
                snapshots,
                setup.geometry,
                &theta,
                &waveforms,
                &factor,
                &taus,
                params,
            )?,
        };
        theta_trace.push(theta.clone());
        ll_trace.push(ll);

        let converged = theta_prev
            .as_ref()
            .map(|prev| max_abs_change(&theta, prev) < setup.stop.theta_tolerance_rad)
            .unwrap_or(false);

        last_state = Some(EstimatorState {
            iteration,
            theta: theta.clone(),
            waveforms: waveforms.clone(),
            q_normalized: covariance.clone(),
            taus: taus.clone(),
            shape_a: texture_fit.as_ref().map(|p| p.shape()),
            scale_b: texture_fit.as_ref().map(|p| p.scale()),
        });
        theta_prev = Some(theta.clone());

        if converged || iteration + 1 == setup.stop.max_iterations {
            break;
        }

        // step 3: covariance then texture, from the fresh residuals
        let steering = steering_matrix(setup.geometry, &theta)?;
        let residuals = snapshots.matrix() - &steering * waveforms.matrix();
        let concentrated: Vec<f64> = (0..t_count)
            .map(|t| {
                let x_t = CVector::from(snapshots.matrix().column(t));
                let s_t = CVector::from(waveforms.matrix().column(t));
                let tau = match &texture_fit {
                    None => estimate_tau_ml(&x_t, &steering, &s_t, factor.inverse()),
                    Some(params) => {
                        estimate_tau_map(&x_t, &steering, &s_t, factor.inverse(), params)
                    }
                };
                floor_tau(tau, &mut tau_floored)
            })
            .collect();
        let step = covariance_step(
            &residuals,
            &concentrated,
            &covariance,
            &factor,
            Q_CONDITION_FLOOR,
        )?;
        covariance = step.covariance;
        factor = step.factor;
        taus = (0..t_count)
            .map(|t| {
                let x_t = CVector::from(snapshots.matrix().column(t));
                let s_t = CVector::from(waveforms.matrix().column(t));
                let tau = match &texture_fit {
                    None => estimate_tau_ml(&x_t, &steering, &s_t, factor.inverse()),
                    Some(params) => {
                        estimate_tau_map(&x_t, &steering, &s_t, factor.inverse(), params)
                    }
                };
                floor_tau(tau, &mut tau_floored)
            })
            .collect();
    }

    let iterations_used = theta_trace.len();
    Ok(EstimateReport {
        final_state: last_state.expect("at least one iteration ran"),
        theta_trace,
        ll_trace,
        iterations_used,
        tau_floored,
        shape_clamped,
    })
}

fn initial_taus(flavor: Flavor, t_count: usize, seed: u64) -> Vec<f64> {
    match flavor {
        Flavor::Conditional => vec![1.0; t_count],
        Flavor::Posterior(_) => {
            // random positive init: an all-ones start makes the first
            // shape/scale fit degenerate
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..t_count)
                .map(|_| {
                    let g: f64 = StandardNormal.sample(&mut rng);
                    g.abs().max(TAU_FLOOR)
                })
                .collect()
        }
    }
}

fn floor_tau(tau: f64, flagged: &mut bool) -> f64 {
    if tau < TAU_FLOOR {
        *flagged = true;
        TAU_FLOOR
    } else {
        tau
    }
}

fn max_abs_change(a: &DoaVector, b: &DoaVector) -> f64 {
    a.angles()
        .iter()
        .zip(b.angles().iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
