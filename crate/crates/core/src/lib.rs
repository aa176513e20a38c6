//! Deterministic cavity-QED source of polarization-entangled single-photon
//! wavepackets.
//!
//! A Λ atom per polarization is driven by a Raman laser pulse and emits one
//! photon into the cavity output mode. This crate evaluates the closed-form
//! transfer integrals and spectral envelope, the n-photon fidelity with
//! laser intensity noise and photon loss, and propagates the one-excitation
//! wavefunction with quantized atomic motion.
//!
//! Angular frequencies and rates are in MHz, times in μs, intensities in MHz².

pub mod envelope;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod model;
pub mod motion;
pub mod noise;
pub mod params;
pub mod pulse;
pub mod quadrature;

pub use envelope::{spectral_envelope, wavepacket_overlap, EnvelopeRow, SpectralEnvelope};
pub use error::{Error, Result};
pub use grid::ContinuumGrid;
pub use model::{
    ideal_fidelity, project_measurement, pulse_integral_mu, pulse_integral_theta, transfer_probability, BranchSetup,
    EntangledPhotons, MeasurementSign, Source,
};
pub use motion::{
    auto_n_max, excitation_number, lamb_dicke_coefficients, motion_fidelity, propagate, target_state, thermal_weights,
    BathModel, DiagnosticRow, MotionFidelity, MotionHamiltonian, MotionOptions, MotionSpec, SingleExcitationState,
};
pub use noise::{
    averaged_fidelity, convert_d_to_fr, convert_fr_to_d, loss_fidelity, mu_statistics, sample_mu, AveragedFidelity,
    MuSampler, MuStatistics, NoiseSpec, NoiseStrength, NoiseWarning,
};
pub use params::{InitialSuperposition, PolarizationBranch};
pub use pulse::{Pulse, PulsePhase, PulseShape};
