use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::hamiltonian::{MotionHamiltonian, MotionOptions};
use super::propagate::propagate;
use super::state::SingleExcitationState;
use super::{thermal_weights, MotionSpec};
use crate::envelope::{spectral_envelope, SpectralEnvelope};
use crate::error::{Error, Result};
use crate::grid::ContinuumGrid;
use crate::model::Source;
use crate::params::InitialSuperposition;
use crate::quadrature::pairwise_sum;

/// Discretized reference state Σ_α c_α Σ_m G_α(ω_m)√Δω b†_α,m|0⟩|f⟩_α.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetState {
    /// Photon amplitudes per mode, one vector per branch.
    pub branches: [Vec<C64>; 2],
}

impl TargetState {
    pub fn norm_sqr(&self) -> f64 {
        self.branches.iter().flatten().map(|a| a.norm_sqr()).sum()
    }
}

pub fn target_state(envelopes: [&SpectralEnvelope; 2], c: &InitialSuperposition) -> TargetState {
    let amps = |alpha: usize| -> Vec<C64> {
        let ca = c.amplitude(alpha);
        envelopes[alpha].mode_amplitudes().into_iter().map(|g| g * ca).collect()
    };
    TargetState {
        branches: [amps(0), amps(1)],
    }
}

/// ⟨t̂|Φ_k(n')⟩ for every vibrational level n' carried by `state`, where t̂
/// is the unit-normalized single-branch target.
pub fn overlap_vectors(unit_target: &[C64], state: &SingleExcitationState) -> Vec<C64> {
    let l = state.level_count();
    let mut v = vec![C64::new(0.0, 0.0); l];
    for (m, t) in unit_target.iter().enumerate() {
        let tc = t.conj();
        for (j, vj) in v.iter_mut().enumerate() {
            *vj += tc * state.continuum[m * l + j];
        }
    }
    v
}

/// Single-cycle fidelity with motion; P(n) follows as the n-th power since
/// the vibrational state is re-prepared before every cycle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MotionFidelity {
    pub single_cycle: f64,
}

impl MotionFidelity {
    pub fn at(&self, n: u32) -> f64 {
        self.single_cycle.powi(n as i32)
    }
}

fn unit(v: Vec<C64>) -> Vec<C64> {
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        v
    } else {
        v.into_iter().map(|a| a / norm).collect()
    }
}

/// Trace fidelity of the one-cycle output against the ideal transfer state,
/// averaged over a thermal vibrational state.
///
/// Each initial Fock level k is propagated separately in each branch. With
/// v_α,k(n') = ⟨t̂_α|Φ_α,k(n')⟩ the two polarization sectors are orthogonal,
/// so the overlap with the target is Σ_α |c_α|² v_α,k(n') and
/// P(1) = Σ_k p_k Σ_n' |Σ_α |c_α|² v_α,k(n')|². The target of each branch is
/// normalized, which makes the motionless limit equal to 1 − e^(−2μ).
pub fn motion_fidelity(
    source: &Source,
    motion: &MotionSpec,
    grid: &ContinuumGrid,
    options: MotionOptions,
) -> Result<MotionFidelity> {
    motion.validate()?;
    let weights = thermal_weights(motion.thermal_n, motion.n_max)?;
    let c2 = source.initial.weights();
    let symmetric = source.is_symmetric();

    let mut targets = Vec::with_capacity(2);
    for setup in &source.branches {
        let env = spectral_envelope(&setup.pulse, &setup.branch, grid)?;
        targets.push(unit(env.mode_amplitudes()));
    }

    // Branch 1 reuses branch 0 when both are identical.
    let branches: Vec<usize> = if symmetric { vec![0] } else { vec![0, 1] };
    // Without Lamb-Dicke coupling every Fock level evolves identically.
    let populated: Vec<usize> = (0..=motion.n_max).filter(|&k| weights[k] > 0.0).collect();
    let levels: Vec<usize> = if motion.is_motionless() {
        populated.iter().copied().take(1).collect()
    } else {
        populated.clone()
    };
    let jobs: Vec<(usize, usize)> = branches
        .iter()
        .flat_map(|&a| levels.iter().map(move |&k| (a, k)))
        .filter(|&(a, _)| symmetric || c2[a] > 0.0)
        .collect();

    type Job = ((usize, usize), Vec<C64>);
    let results: Vec<Result<Job>> = jobs
        .par_iter()
        .map(|&(alpha, k)| {
            let setup = &source.branches[alpha];
            let h = MotionHamiltonian::new(setup.branch.clone(), *motion, *grid, k, options)?;
            let st = SingleExcitationState::excited_atom(&h, k)?;
            let dt = h.default_step(&setup.pulse);
            let out = propagate(&st, &h, &setup.pulse, dt)?;
            Ok(((alpha, k), overlap_vectors(&targets[alpha], &out)))
        })
        .collect();

    let mut v: [Vec<Option<Vec<C64>>>; 2] = [vec![None; motion.n_max + 1], vec![None; motion.n_max + 1]];
    for r in results {
        let ((alpha, k), vec) = r?;
        v[alpha][k] = Some(vec);
    }
    if motion.is_motionless() {
        for side in v.iter_mut() {
            if let Some(first) = populated.first().and_then(|&k| side[k].clone()) {
                for &k in &populated {
                    side[k] = Some(first.clone());
                }
            }
        }
    }
    if symmetric {
        v[1] = v[0].clone();
    }

    let mut terms = Vec::with_capacity(motion.n_max + 1);
    for k in 0..=motion.n_max {
        if weights[k] == 0.0 {
            continue;
        }
        let len = v[0][k].as_ref().or(v[1][k].as_ref()).map(|x| x.len()).unwrap_or(0);
        let mut s = 0.0;
        for j in 0..len {
            let mut amp = C64::new(0.0, 0.0);
            for alpha in 0..2 {
                if let Some(va) = &v[alpha][k] {
                    amp += va[j] * c2[alpha];
                }
            }
            s += amp.norm_sqr();
        }
        terms.push(weights[k] * s);
    }
    let p1 = pairwise_sum(&terms);
    if !p1.is_finite() {
        return Err(Error::NumericalInstability("non-finite motion fidelity".into()));
    }
    Ok(MotionFidelity { single_cycle: p1 })
}
