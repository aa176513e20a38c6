//! Classical Raman laser pulses: intensity profile Ω²(t) and phase φ(t).

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::adaptive_simpson;

/// Intensity profile Ω²(t) on [0, T].
#[derive(Clone, Debug, PartialEq)]
pub enum PulseShape {
    /// Constant intensity I (MHz²) for duration T (μs).
    Square { intensity: f64, duration: f64 },
    /// sin² turn-on and turn-off ramps of length `ramp_fraction·T` around a
    /// flat top of height `peak` (MHz²).
    SineSquaredRamp {
        peak: f64,
        duration: f64,
        ramp_fraction: f64,
    },
    /// Piecewise-linear interpolation of Ω² samples on a strictly increasing
    /// grid that starts at 0 and ends at T.
    Sampled { times: Vec<f64>, intensity: Vec<f64> },
}

/// Laser phase φ(t) in radians.
#[derive(Clone, Debug, PartialEq)]
pub enum PulsePhase {
    Constant(f64),
    /// Piecewise-linear samples; the grid must cover [0, T].
    Sampled {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pulse {
    pub shape: PulseShape,
    pub phase: PulsePhase,
}

impl Pulse {
    pub fn new(shape: PulseShape, phase: PulsePhase) -> Result<Self> {
        let p = Pulse { shape, phase };
        p.validate()?;
        Ok(p)
    }

    pub fn square(intensity: f64, duration: f64) -> Result<Self> {
        Self::new(PulseShape::Square { intensity, duration }, PulsePhase::Constant(0.0))
    }

    pub fn sine_squared_ramp(peak: f64, duration: f64, ramp_fraction: f64) -> Result<Self> {
        Self::new(
            PulseShape::SineSquaredRamp {
                peak,
                duration,
                ramp_fraction,
            },
            PulsePhase::Constant(0.0),
        )
    }

    pub fn sampled(times: Vec<f64>, intensity: Vec<f64>) -> Result<Self> {
        Self::new(PulseShape::Sampled { times, intensity }, PulsePhase::Constant(0.0))
    }

    pub fn with_phase(mut self, phase: PulsePhase) -> Result<Self> {
        self.phase = phase;
        self.validate()?;
        Ok(self)
    }

    /// Same pulse with the time axis stretched so that the duration becomes `t`.
    pub fn with_duration(&self, t: f64) -> Result<Self> {
        let scale = t / self.duration();
        let shape = match &self.shape {
            PulseShape::Square { intensity, .. } => PulseShape::Square {
                intensity: *intensity,
                duration: t,
            },
            PulseShape::SineSquaredRamp {
                peak, ramp_fraction, ..
            } => PulseShape::SineSquaredRamp {
                peak: *peak,
                duration: t,
                ramp_fraction: *ramp_fraction,
            },
            PulseShape::Sampled { times, intensity } => PulseShape::Sampled {
                times: times.iter().map(|x| x * scale).collect(),
                intensity: intensity.clone(),
            },
        };
        let phase = match &self.phase {
            PulsePhase::Constant(p) => PulsePhase::Constant(*p),
            PulsePhase::Sampled { times, values } => PulsePhase::Sampled {
                times: times.iter().map(|x| x * scale).collect(),
                values: values.clone(),
            },
        };
        Pulse::new(shape, phase)
    }

    /// Same profile with every intensity multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let shape = match &self.shape {
            PulseShape::Square { intensity, duration } => PulseShape::Square {
                intensity: intensity * factor,
                duration: *duration,
            },
            PulseShape::SineSquaredRamp {
                peak,
                duration,
                ramp_fraction,
            } => PulseShape::SineSquaredRamp {
                peak: peak * factor,
                duration: *duration,
                ramp_fraction: *ramp_fraction,
            },
            PulseShape::Sampled { times, intensity } => PulseShape::Sampled {
                times: times.clone(),
                intensity: intensity.iter().map(|x| x * factor).collect(),
            },
        };
        Pulse::new(shape, self.phase.clone())
    }

    pub fn duration(&self) -> f64 {
        match &self.shape {
            PulseShape::Square { duration, .. } | PulseShape::SineSquaredRamp { duration, .. } => *duration,
            PulseShape::Sampled { times, .. } => times.last().copied().unwrap_or(0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.shape {
            PulseShape::Square { intensity, duration } => {
                nonneg("intensity", *intensity)?;
                positive("duration", *duration)?;
            }
            PulseShape::SineSquaredRamp {
                peak,
                duration,
                ramp_fraction,
            } => {
                nonneg("peak", *peak)?;
                positive("duration", *duration)?;
                if !(ramp_fraction.is_finite() && *ramp_fraction > 0.0 && *ramp_fraction <= 0.5) {
                    return Err(Error::invalid(
                        "ramp_fraction",
                        format!("must lie in (0, 0.5], got {ramp_fraction}"),
                    ));
                }
            }
            PulseShape::Sampled { times, intensity } => {
                check_grid("times", times)?;
                if intensity.len() != times.len() {
                    return Err(Error::invalid(
                        "intensity",
                        format!("{} samples for {} grid points", intensity.len(), times.len()),
                    ));
                }
                for &v in intensity {
                    nonneg("intensity", v)?;
                }
            }
        }
        if let PulsePhase::Sampled { times, values } = &self.phase {
            check_grid("phase.times", times)?;
            if values.len() != times.len() {
                return Err(Error::invalid(
                    "phase.values",
                    format!("{} samples for {} grid points", values.len(), times.len()),
                ));
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid("phase.values", "non-finite phase sample"));
            }
            let t = self.duration();
            if times[0] > 0.0 || *times.last().unwrap() < t {
                return Err(Error::invalid("phase.times", format!("phase grid must cover [0, {t}]")));
            }
        }
        Ok(())
    }

    /// Ω²(t); zero outside [0, T].
    pub fn intensity(&self, t: f64) -> f64 {
        let big_t = self.duration();
        if !(0.0..=big_t).contains(&t) {
            return 0.0;
        }
        match &self.shape {
            PulseShape::Square { intensity, .. } => *intensity,
            PulseShape::SineSquaredRamp {
                peak,
                duration,
                ramp_fraction,
            } => {
                let ramp = ramp_fraction * duration;
                if t < ramp {
                    peak * (0.5 * PI * t / ramp).sin().powi(2)
                } else if t > duration - ramp {
                    peak * (0.5 * PI * (duration - t) / ramp).sin().powi(2)
                } else {
                    *peak
                }
            }
            PulseShape::Sampled { times, intensity } => interpolate(times, intensity, t),
        }
    }

    /// Rabi amplitude Ω(t) = √Ω²(t).
    pub fn rabi(&self, t: f64) -> f64 {
        self.intensity(t).max(0.0).sqrt()
    }

    pub fn phase_at(&self, t: f64) -> f64 {
        match &self.phase {
            PulsePhase::Constant(p) => *p,
            PulsePhase::Sampled { times, values } => interpolate(times, values, t),
        }
    }

    pub fn max_intensity(&self) -> f64 {
        match &self.shape {
            PulseShape::Square { intensity, .. } => *intensity,
            PulseShape::SineSquaredRamp { peak, .. } => *peak,
            PulseShape::Sampled { intensity, .. } => intensity.iter().copied().fold(0.0, f64::max),
        }
    }

    /// Times where the profile is not smooth; quadrature splits there.
    fn breakpoints(&self) -> Vec<f64> {
        let t = self.duration();
        match &self.shape {
            PulseShape::Square { .. } => vec![0.0, t],
            PulseShape::SineSquaredRamp {
                duration,
                ramp_fraction,
                ..
            } => {
                let r = ramp_fraction * duration;
                let mut v = vec![0.0, r, duration - r, *duration];
                v.dedup_by(|a, b| (*a - *b).abs() < 1e-15 * duration);
                v
            }
            PulseShape::Sampled { times, .. } => times.clone(),
        }
    }

    /// Pulse area ∫₀ᵗ Ω²(s) ds for t clamped to [0, T]. Closed form for square
    /// pulses, piecewise adaptive Simpson otherwise.
    pub fn area_until(&self, t: f64) -> Result<f64> {
        let t = t.clamp(0.0, self.duration());
        if let PulseShape::Square { intensity, .. } = &self.shape {
            return Ok(intensity * t);
        }
        let bps = self.breakpoints();
        let scale = self.max_intensity().max(1e-300) * self.duration();
        let tol = 1e-14 * scale;
        let mut total = 0.0;
        for w in bps.windows(2) {
            let (a, b) = (w[0], w[1].min(t));
            if b <= a {
                break;
            }
            total += adaptive_simpson(&|s| self.intensity(s), a, b, tol);
        }
        if !total.is_finite() {
            return Err(Error::invalid("pulse", "non-finite pulse area"));
        }
        Ok(total)
    }

    /// Total pulse area ∫₀ᵀ Ω²(t) dt.
    pub fn area(&self) -> Result<f64> {
        self.area_until(self.duration())
    }

    /// Cumulative area on the uniform grid t_j = j·T/n, j = 0..=n, using
    /// Simpson's rule on each cell.
    pub fn cumulative_area(&self, n: usize) -> Vec<f64> {
        let big_t = self.duration();
        let h = big_t / n as f64;
        if let PulseShape::Square { intensity, .. } = &self.shape {
            return (0..=n).map(|j| intensity * j as f64 * h).collect();
        }
        let mut out = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        out.push(0.0);
        for j in 0..n {
            let a = j as f64 * h;
            let b = a + h;
            let piece = h / 6.0 * (self.intensity(a) + 4.0 * self.intensity(0.5 * (a + b)) + self.intensity(b));
            acc += piece;
            out.push(acc);
        }
        out
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be finite and > 0, got {v}")))
    }
}

fn nonneg(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be finite and >= 0, got {v}")))
    }
}

fn check_grid(field: &str, times: &[f64]) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::invalid(field, "need at least two grid points"));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid(field, "non-finite grid point"));
    }
    if times[0] != 0.0 && field == "times" {
        return Err(Error::invalid(field, format!("grid must start at 0, got {}", times[0])));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid(field, "grid must be strictly increasing"));
    }
    if field == "times" && *times.last().unwrap() <= 0.0 {
        return Err(Error::invalid(field, "duration must be > 0"));
    }
    Ok(())
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    if x <= xs[0] {
        return ys[0];
    }
    let last = xs.len() - 1;
    if x >= xs[last] {
        return ys[last];
    }
    let j = xs.partition_point(|&v| v <= x) - 1;
    let f = (x - xs[j]) / (xs[j + 1] - xs[j]);
    ys[j] + f * (ys[j + 1] - ys[j])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ramp_area_matches_closed_form() {
        let p = Pulse::sine_squared_ramp(3600.0, 30.0, 0.2).unwrap();
        // each sin² ramp contributes half its length at full height
        let exact = 3600.0 * (30.0 - 0.2 * 30.0);
        assert!((p.area().unwrap() - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn sampled_area_is_trapezoid_of_samples() {
        let p = Pulse::sampled(vec![0.0, 1.0, 3.0], vec![0.0, 2.0, 2.0]).unwrap();
        assert!((p.area().unwrap() - 5.0).abs() < 1e-12);
        assert!((p.intensity(0.5) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cumulative_area_ends_at_total() {
        let p = Pulse::sine_squared_ramp(100.0, 2.0, 0.3).unwrap();
        let c = p.cumulative_area(400);
        assert!((c[400] - p.area().unwrap()).abs() < 1e-8);
        assert!(c.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(Pulse::square(-1.0, 1.0).is_err());
        assert!(Pulse::square(1.0, 0.0).is_err());
        assert!(Pulse::sampled(vec![0.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]).is_err());
        assert!(Pulse::sampled(vec![0.0, 1.0], vec![1.0, f64::NAN]).is_err());
        assert!(Pulse::sampled(vec![0.5, 1.0], vec![1.0, 1.0]).is_err());
        assert!(Pulse::sine_squared_ramp(1.0, 1.0, 0.7).is_err());
    }

    #[test]
    fn zero_outside_window() {
        let p = Pulse::square(5.0, 2.0).unwrap();
        assert_eq!(p.intensity(-0.1), 0.0);
        assert_eq!(p.intensity(2.1), 0.0);
        assert_eq!(p.intensity(1.0), 5.0);
    }
}
