//! Closed-form pulse integrals, the ideal n-photon fidelity and the final
//! atomic measurement that turns the atom–photon state into an n-photon
//! entangled state.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::params::{InitialSuperposition, PolarizationBranch};
use crate::pulse::Pulse;

/// Parameters and drive of one polarization branch.
#[derive(Clone, Debug, PartialEq)]
pub struct BranchSetup {
    pub branch: PolarizationBranch,
    pub pulse: Pulse,
}

/// Both branches of the source plus the initial atomic superposition.
#[derive(Clone, Debug, PartialEq)]
pub struct Source {
    pub branches: [BranchSetup; 2],
    pub initial: InitialSuperposition,
}

impl Source {
    pub fn new(branches: [BranchSetup; 2], initial: InitialSuperposition) -> Result<Self> {
        for (alpha, b) in branches.iter().enumerate() {
            b.branch.validate(false)?;
            b.pulse.validate()?;
            if b.branch.label != alpha {
                return Err(Error::invalid(
                    "label",
                    format!("branch at position {alpha} carries label {}", b.branch.label),
                ));
            }
        }
        Ok(Source { branches, initial })
    }

    /// Both polarizations share `branch` and `pulse`.
    pub fn identical(branch: PolarizationBranch, pulse: Pulse, initial: InitialSuperposition) -> Result<Self> {
        let b0 = BranchSetup {
            branch: branch.clone().with_label(0),
            pulse: pulse.clone(),
        };
        let b1 = BranchSetup {
            branch: branch.with_label(1),
            pulse,
        };
        Self::new([b0, b1], initial)
    }

    /// True when the two branches differ only in their label.
    pub fn is_symmetric(&self) -> bool {
        let [a, b] = &self.branches;
        a.pulse == b.pulse
            && a.branch.g == b.branch.g
            && a.branch.delta == b.branch.delta
            && a.branch.k_c == b.branch.k_c
            && a.branch.k_a == b.branch.k_a
    }

    /// Apply `f` to both branches, keeping the initial state.
    pub fn map_branches<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(&BranchSetup) -> Result<BranchSetup>,
    {
        let b0 = f(&self.branches[0])?;
        let b1 = f(&self.branches[1])?;
        Self::new([b0, b1], self.initial)
    }
}

/// μ(T) = g²/(4δ²κ) ∫₀ᵀ Ω²(t) dt, with κ = k_c, or k_c + k_a when
/// `include_loss` is set.
pub fn pulse_integral_mu(pulse: &Pulse, branch: &PolarizationBranch, include_loss: bool) -> Result<f64> {
    pulse.validate()?;
    branch.validate(false)?;
    Ok(branch.mu_prefactor(include_loss) * pulse.area()?)
}

/// Stark phase θ(T) = ∫₀ᵀ Ω²(t)/(4δ) dt.
pub fn pulse_integral_theta(pulse: &Pulse, delta: f64) -> Result<f64> {
    if delta == 0.0 {
        return Err(Error::Domain("theta requires a non-zero detuning".into()));
    }
    if !delta.is_finite() {
        return Err(Error::invalid("delta", format!("must be finite, got {delta}")));
    }
    pulse.validate()?;
    Ok(pulse.area()? / (4.0 * delta))
}

/// Single-cycle transfer probability 1 − e^(−2μ).
pub fn transfer_probability(mu: f64) -> f64 {
    -(-2.0 * mu).exp_m1()
}

/// P(n) = Σ_α |c_α|² [1 − e^(−2μ_α(T))]^n.
pub fn ideal_fidelity(n: u32, source: &Source) -> Result<f64> {
    let w = source.initial.weights();
    let mut total = 0.0;
    for (alpha, setup) in source.branches.iter().enumerate() {
        let mu = pulse_integral_mu(&setup.pulse, &setup.branch, false)?;
        total += w[alpha] * transfer_probability(mu).powi(n as i32);
    }
    Ok(total)
}

/// Outcome of the atomic projection onto (|f⟩₀ ± |f⟩₁)/√2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasurementSign {
    Plus,
    Minus,
}

/// n-photon polarization state a|0…0⟩ + b|1…1⟩ left after the projection.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntangledPhotons {
    pub photons: u32,
    /// Amplitude on |00…0⟩.
    pub all_zero: C64,
    /// Amplitude on |11…1⟩.
    pub all_one: C64,
}

impl EntangledPhotons {
    pub fn norm_sqr(&self) -> f64 {
        self.all_zero.norm_sqr() + self.all_one.norm_sqr()
    }

    /// True when only one of the two product states survives.
    pub fn is_product(&self) -> bool {
        self.all_zero == C64::new(0.0, 0.0) || self.all_one == C64::new(0.0, 0.0)
    }
}

/// Project the atom after `n` cycles; the continuum is left in
/// (c₀|0…0⟩ ± c₁|1…1⟩)/√(|c₀|² + |c₁|²).
pub fn project_measurement(c0: C64, c1: C64, sign: MeasurementSign, n: u32) -> Result<EntangledPhotons> {
    if n == 0 {
        return Err(Error::invalid("n", "projection needs at least one photon"));
    }
    let norm = (c0.norm_sqr() + c1.norm_sqr()).sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::invalid("initial", "c0 = c1 = 0 leaves nothing to project"));
    }
    let s = match sign {
        MeasurementSign::Plus => 1.0,
        MeasurementSign::Minus => -1.0,
    };
    Ok(EntangledPhotons {
        photons: n,
        all_zero: c0 / norm,
        all_one: c1 * s / norm,
    })
}

impl InitialSuperposition {
    pub fn project(&self, sign: MeasurementSign, n: u32) -> Result<EntangledPhotons> {
        project_measurement(self.c0, self.c1, sign, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn fig2() -> (PolarizationBranch, Pulse) {
        (
            PolarizationBranch::lossless(60.0, 1500.0, 25.0).unwrap(),
            Pulse::square(3600.0, 30.0).unwrap(),
        )
    }

    #[test]
    fn mu_square_closed_form() {
        let (b, p) = fig2();
        let mu = pulse_integral_mu(&p, &b, false).unwrap();
        // g²IT/(4δ²k_c) = 60²·3600·30 / (4·1500²·25)
        assert!((mu - 1.728).abs() < 1e-12);
        let zero = Pulse::square(0.0, 30.0).unwrap();
        assert_eq!(pulse_integral_mu(&zero, &b, false).unwrap(), 0.0);
        let p2 = p.with_duration(60.0).unwrap();
        assert!((pulse_integral_mu(&p2, &b, false).unwrap() - 2.0 * mu).abs() < 1e-12);
    }

    #[test]
    fn mu_with_loss_uses_total_decay() {
        let (b, p) = fig2();
        let b = b.with_loss(0.25).unwrap();
        let mu = pulse_integral_mu(&p, &b, true).unwrap();
        assert!((mu - 1.728 * 25.0 / 25.25).abs() < 1e-12);
    }

    #[test]
    fn theta_closed_form_and_errors() {
        let (_, p) = fig2();
        assert!((pulse_integral_theta(&p, 1500.0).unwrap() - 18.0).abs() < 1e-12);
        assert!((pulse_integral_theta(&p, 3000.0).unwrap() - 9.0).abs() < 1e-12);
        assert_eq!(
            pulse_integral_theta(&Pulse::square(0.0, 1.0).unwrap(), 1.0).unwrap(),
            0.0
        );
        assert!(matches!(pulse_integral_theta(&p, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn ideal_fidelity_values() {
        let (b, p) = fig2();
        let s = Source::identical(b, p, InitialSuperposition::balanced()).unwrap();
        assert_eq!(ideal_fidelity(0, &s).unwrap(), 1.0);
        let p1 = 1.0 - (-3.456f64).exp();
        assert!((ideal_fidelity(1, &s).unwrap() - p1).abs() < 1e-14);
        assert!((ideal_fidelity(1, &s).unwrap() - 0.96845).abs() < 1e-5);
        assert!((ideal_fidelity(10, &s).unwrap() - 0.7257).abs() < 1e-4);
    }

    #[test]
    fn projection_gives_ghz() {
        let a = C64::new(FRAC_1_SQRT_2, 0.0);
        let ghz = project_measurement(a, a, MeasurementSign::Plus, 3).unwrap();
        assert!((ghz.all_zero - a).norm() < 1e-15);
        assert!((ghz.all_one - a).norm() < 1e-15);
        let minus = project_measurement(a, a, MeasurementSign::Minus, 3).unwrap();
        assert!((minus.all_one + a).norm() < 1e-15);
        let prod = project_measurement(C64::new(1.0, 0.0), C64::new(0.0, 0.0), MeasurementSign::Minus, 5).unwrap();
        assert!(prod.is_product());
        assert!(project_measurement(C64::new(0.0, 0.0), C64::new(0.0, 0.0), MeasurementSign::Plus, 2).is_err());
        assert!(project_measurement(a, a, MeasurementSign::Plus, 0).is_err());
    }
}
