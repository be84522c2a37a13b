//! Direction-of-arrival estimation for sensor arrays under compound-Gaussian
//! (spherically invariant) noise.
//!
//! The crate provides the signal model (steering vectors, waveform and
//! snapshot synthesis), SIRP noise generation with gamma or inverse-gamma
//! textures, the shared numerical kernels, and a family of interchangeable
//! estimators behind [`estimators::DoaEstimator`]: the conventional white-noise
//! ML estimator and the iterative ML / MAP estimators that concentrate the
//! likelihood over textures and the speckle covariance.

pub mod array;
pub mod error;
pub mod estimators;
pub mod noise;
pub mod numerics;
pub mod oracle;
pub mod signal;

pub use array::{steering_matrix, steering_vector, ArrayGeometry, CMatrix, CVector, DoaVector};
pub use error::{Error, Result};
pub use estimators::{
    DoaEstimator, EstimateReport, EstimatorOptions, EstimatorRegistry, EstimatorState,
    StopCriterion,
};
pub use noise::{
    build_speckle_covariance, compute_snr, db_to_linear, linear_to_db, sample_noise,
    scale_waveforms_to_snr, NoiseBlock, SpeckleCovariance, TextureKind, TextureParams,
};
pub use numerics::GridSpec;
pub use signal::{generate_waveforms, synthesize, Snapshots, SourceWaveforms};
