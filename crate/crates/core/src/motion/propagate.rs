use num_complex::Complex64 as C64;

use super::hamiltonian::{BathModel, LocalCoefficients, MotionHamiltonian};
use super::state::SingleExcitationState;
use crate::error::{Error, Result};
use crate::fourier::chirp_z;
use crate::pulse::Pulse;

/// Allowed change of the total population over one propagation.
pub const NORM_DRIFT_TOL: f64 = 1e-6;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Populations sampled during a propagation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticRow {
    pub t_us: f64,
    pub norm: f64,
    pub pop_atom: f64,
    pub pop_cavity: f64,
    pub pop_continuum: f64,
}

/// Evolve `state` through one application of `pulse` with classical RK4 at
/// fixed step `dt` (shrunk so that an integer number of steps spans the
/// pulse). The pulse starts at `state.time`.
pub fn propagate(
    state: &SingleExcitationState,
    h: &MotionHamiltonian,
    pulse: &Pulse,
    dt: f64,
) -> Result<SingleExcitationState> {
    run(state, h, pulse, dt, 0).map(|(s, _)| s)
}

/// As [`propagate`], also recording populations every `every` steps.
pub fn propagate_with_diagnostics(
    state: &SingleExcitationState,
    h: &MotionHamiltonian,
    pulse: &Pulse,
    dt: f64,
    every: usize,
) -> Result<(SingleExcitationState, Vec<DiagnosticRow>)> {
    run(state, h, pulse, dt, every.max(1))
}

fn run(
    state: &SingleExcitationState,
    h: &MotionHamiltonian,
    pulse: &Pulse,
    dt: f64,
    every: usize,
) -> Result<(SingleExcitationState, Vec<DiagnosticRow>)> {
    pulse.validate()?;
    state.check_compatible(h)?;
    h.grid.validate(h.branch.total_decay(), pulse.duration())?;
    let max = h.max_step(pulse);
    if !(dt.is_finite() && dt > 0.0) || dt > max * (1.0 + 1e-12) {
        return Err(Error::Configuration(format!(
            "step {dt} us outside (0, 0.02/nu_max = {max:.6e}] us"
        )));
    }
    let big_t = pulse.duration();
    let steps = (big_t / dt - 1e-9).ceil().max(1.0) as usize;
    let norm0 = state.norm_sqr();
    let (out, diag) = match h.options.bath {
        BathModel::Markov => run_markov(state, h, pulse, steps, every),
        BathModel::Discrete => run_discrete(state, h, pulse, steps, every),
    };
    let norm1 = out.norm_sqr();
    if !norm1.is_finite() || (norm1 - norm0).abs() > NORM_DRIFT_TOL {
        return Err(Error::NumericalInstability(format!(
            "norm drifted from {norm0} to {norm1} over {steps} steps"
        )));
    }
    Ok((out, diag))
}

/// Pulse-relative time of step boundary s, exact at both ends.
fn boundary(s: usize, steps: usize, big_t: f64) -> f64 {
    if s == steps {
        big_t
    } else {
        big_t * s as f64 / steps as f64
    }
}

/// Atom and cavity block of the generator.
struct Local<'a> {
    h: &'a MotionHamiltonian,
    eta_l: f64,
    eta_r: f64,
    eta_b: f64,
    cav_stark: f64,
    damp: f64,
    xa: Vec<C64>,
    xc: Vec<C64>,
}

impl<'a> Local<'a> {
    fn new(h: &'a MotionHamiltonian) -> Self {
        let l = h.levels().len();
        Local {
            h,
            eta_l: h.motion.eta_l.powi(2),
            eta_r: h.motion.eta_r.powi(2),
            eta_b: h.motion.raman_eta_sq(),
            cav_stark: h.cavity_stark(),
            damp: h.cavity_damping(),
            xa: vec![ZERO; l],
            xc: vec![ZERO; l],
        }
    }

    fn apply_x2(h: &MotionHamiltonian, vib: C64, v: &[C64], out: &mut [C64]) {
        let l = v.len();
        for j in 0..l {
            let mut acc = v[j] * h.x2_diag[j];
            if j > 0 {
                acc += vib * v[j - 1] * h.x2_off[j - 1];
            }
            if j + 1 < l {
                acc += vib.conj() * v[j + 1] * h.x2_off[j];
            }
            out[j] = acc;
        }
    }

    /// d(a_i, a_c)/dt for y = [a_i..., a_c...], plus `feedback` added to ȧ_c.
    /// Returns Σ|a_c|².
    fn rhs(&mut self, c: &LocalCoefficients, y: &[C64], feedback: Option<&[C64]>, dy: &mut [C64]) -> f64 {
        let l = y.len() / 2;
        let (ai, ac) = y.split_at(l);
        Self::apply_x2(self.h, c.vib, ai, &mut self.xa);
        Self::apply_x2(self.h, c.vib, ac, &mut self.xc);
        let (dai, dac) = dy.split_at_mut(l);
        let i = C64::new(0.0, 1.0);
        let mut pop = 0.0;
        for j in 0..l {
            let stark_i = c.stark * (ai[j] - self.eta_l * self.xa[j]);
            let raman_c = ac[j] - self.eta_b * self.xc[j];
            dai[j] = -i * stark_i + c.raman * raman_c;
            let stark_c = self.cav_stark * (ac[j] - self.eta_r * self.xc[j]);
            let raman_i = ai[j] - self.eta_b * self.xa[j];
            dac[j] = -i * stark_c - c.raman.conj() * raman_i - self.damp * ac[j];
            if let Some(fb) = feedback {
                dac[j] += fb[j];
            }
            pop += ac[j].norm_sqr();
        }
        pop
    }
}

fn axpy(out: &mut [C64], y: &[C64], a: f64, k: &[C64]) {
    for ((o, &yi), &ki) in out.iter_mut().zip(y).zip(k) {
        *o = yi + ki * a;
    }
}

fn row(t: f64, atom: &[C64], cav: &[C64], cont: f64, lost: f64) -> DiagnosticRow {
    let pa: f64 = atom.iter().map(|a| a.norm_sqr()).sum();
    let pc: f64 = cav.iter().map(|a| a.norm_sqr()).sum();
    DiagnosticRow {
        t_us: t,
        norm: pa + pc + cont + lost,
        pop_atom: pa,
        pop_cavity: pc,
        pop_continuum: cont,
    }
}

fn run_markov(
    state: &SingleExcitationState,
    h: &MotionHamiltonian,
    pulse: &Pulse,
    steps: usize,
    every: usize,
) -> (SingleExcitationState, Vec<DiagnosticRow>) {
    let l = state.level_count();
    let big_t = pulse.duration();
    let dt = big_t / steps as f64;
    let t_start = state.time;
    let (k_c, k_a) = (h.branch.k_c, h.branch.k_a);

    let mut local = Local::new(h);
    let mut y: Vec<C64> = state.atom.iter().chain(&state.cavity).copied().collect();
    let (mut rad, mut lost) = (state.radiated, state.lost);
    let mut k = [
        vec![ZERO; 2 * l],
        vec![ZERO; 2 * l],
        vec![ZERO; 2 * l],
        vec![ZERO; 2 * l],
    ];
    let mut ys = [vec![ZERO; 2 * l], vec![ZERO; 2 * l], vec![ZERO; 2 * l]];
    // a_c stage values on the half-step grid, weighted as in the RK4 update.
    let mut samples = vec![ZERO; (2 * steps + 1) * l];
    let mut diag = Vec::new();
    if every > 0 {
        diag.push(row(t_start, &y[..l], &y[l..], rad, lost));
    }

    for s in 0..steps {
        let tp0 = boundary(s, steps, big_t);
        let tp1 = boundary(s + 1, steps, big_t);
        let tph = 0.5 * (tp0 + tp1);
        let c0 = h.local(pulse, tp0, t_start + tp0);
        let ch = h.local(pulse, tph, t_start + tph);
        let c1 = h.local(pulse, tp1, t_start + tp1);

        let p1 = local.rhs(&c0, &y, None, &mut k[0]);
        axpy(&mut ys[0], &y, 0.5 * dt, &k[0]);
        let p2 = local.rhs(&ch, &ys[0], None, &mut k[1]);
        axpy(&mut ys[1], &y, 0.5 * dt, &k[1]);
        let p3 = local.rhs(&ch, &ys[1], None, &mut k[2]);
        axpy(&mut ys[2], &y, dt, &k[2]);
        let p4 = local.rhs(&c1, &ys[2], None, &mut k[3]);

        for j in 0..l {
            samples[2 * s * l + j] += y[l + j] * (dt / 6.0);
            samples[(2 * s + 1) * l + j] += (ys[0][l + j] + ys[1][l + j]) * (dt / 3.0);
            samples[(2 * s + 2) * l + j] += ys[2][l + j] * (dt / 6.0);
        }
        for (idx, yi) in y.iter_mut().enumerate() {
            *yi += (k[0][idx] + (k[1][idx] + k[2][idx]) * 2.0 + k[3][idx]) * (dt / 6.0);
        }
        let pop = (p1 + 2.0 * (p2 + p3) + p4) * (dt / 6.0);
        rad += 2.0 * k_c * pop;
        lost += 2.0 * k_a * pop;

        if every > 0 && ((s + 1) % every == 0 || s + 1 == steps) {
            diag.push(row(t_start + tp1, &y[..l], &y[l..], rad, lost));
        }
    }

    let mut out = state.clone();
    let grid = &h.grid;
    let coupling = h.mode_coupling();
    let m_count = grid.mode_count;
    let shift: Vec<C64> = (0..m_count)
        .map(|m| C64::from_polar(coupling, grid.omega(m) * t_start))
        .collect();
    let mut w = vec![ZERO; 2 * steps + 1];
    for j in 0..l {
        for (q, wq) in w.iter_mut().enumerate() {
            *wq = samples[q * l + j];
        }
        let x = chirp_z(&w, 0.5 * dt, grid.omega(0), grid.spacing(), m_count);
        for m in 0..m_count {
            out.continuum[m * l + j] += shift[m] * x[m];
        }
    }
    out.atom.copy_from_slice(&y[..l]);
    out.cavity.copy_from_slice(&y[l..]);
    out.radiated = rad;
    out.lost = lost;
    out.time = t_start + big_t;
    (out, diag)
}

/// Explicit continuum. The modes are driven by a_c alone, so every RK4
/// stage needs only the sums S(τ) = Σ_m e^(−iω_m τ) x_m at the step's
/// midpoint and end, corrected analytically for the stage increments. The
/// mode update and the sums for the next step share a single pass.
fn run_discrete(
    state: &SingleExcitationState,
    h: &MotionHamiltonian,
    pulse: &Pulse,
    steps: usize,
    every: usize,
) -> (SingleExcitationState, Vec<DiagnosticRow>) {
    let l = state.level_count();
    let big_t = pulse.duration();
    let dt = big_t / steps as f64;
    let t_start = state.time;
    let k_a = h.branch.k_a;
    let grid = &h.grid;
    let m_count = grid.mode_count;
    let c = h.mode_coupling();

    let mut local = Local::new(h);
    let mut y: Vec<C64> = state.atom.iter().chain(&state.cavity).copied().collect();
    let mut lost = state.lost;
    // Level-major copy of the continuum so each level is one contiguous run.
    let mut x = vec![ZERO; l * m_count];
    for m in 0..m_count {
        for j in 0..l {
            x[j * m_count + m] = state.continuum[m * l + j];
        }
    }
    let omega = grid.frequencies();
    let mut p0: Vec<C64> = omega.iter().map(|w| C64::from_polar(1.0, w * t_start)).collect();
    let rot: Vec<C64> = omega.iter().map(|w| C64::from_polar(1.0, 0.5 * w * dt)).collect();
    let kh: C64 = rot.iter().map(|r| r.conj()).sum();
    let kf: C64 = rot.iter().map(|r| (r * r).conj()).sum();
    let km = m_count as f64;

    let mut s0 = vec![ZERO; l];
    let mut sh = vec![ZERO; l];
    let mut s1 = vec![ZERO; l];
    for m in 0..m_count {
        let ph = p0[m] * rot[m];
        let pe = ph * rot[m];
        for j in 0..l {
            let xm = x[j * m_count + m];
            s0[j] += p0[m].conj() * xm;
            sh[j] += ph.conj() * xm;
            s1[j] += pe.conj() * xm;
        }
    }

    let mut k = [
        vec![ZERO; 2 * l],
        vec![ZERO; 2 * l],
        vec![ZERO; 2 * l],
        vec![ZERO; 2 * l],
    ];
    let mut ys = [vec![ZERO; 2 * l], vec![ZERO; 2 * l], vec![ZERO; 2 * l]];
    let mut fb = vec![ZERO; l];
    let (mut ca, mut cb, mut cd) = (vec![ZERO; l], vec![ZERO; l], vec![ZERO; l]);
    let (mut sh_next, mut s1_next) = (vec![ZERO; l], vec![ZERO; l]);
    let mut diag = Vec::new();
    let mode_pop = |x: &[C64]| x.iter().map(|a| a.norm_sqr()).sum::<f64>();
    if every > 0 {
        diag.push(row(t_start, &y[..l], &y[l..], mode_pop(&x), lost));
    }

    for s in 0..steps {
        let tp0 = boundary(s, steps, big_t);
        let tp1 = boundary(s + 1, steps, big_t);
        let tph = 0.5 * (tp0 + tp1);
        let c0 = h.local(pulse, tp0, t_start + tp0);
        let chh = h.local(pulse, tph, t_start + tph);
        let c1 = h.local(pulse, tp1, t_start + tp1);

        for j in 0..l {
            fb[j] = -c * s0[j];
        }
        let p1 = local.rhs(&c0, &y, Some(&fb), &mut k[0]);
        axpy(&mut ys[0], &y, 0.5 * dt, &k[0]);
        for j in 0..l {
            fb[j] = -c * sh[j] - y[l + j] * kh * (0.5 * dt * c * c);
        }
        let p2 = local.rhs(&chh, &ys[0], Some(&fb), &mut k[1]);
        axpy(&mut ys[1], &y, 0.5 * dt, &k[1]);
        for j in 0..l {
            fb[j] = -c * sh[j] - ys[0][l + j] * (0.5 * dt * c * c * km);
        }
        let p3 = local.rhs(&chh, &ys[1], Some(&fb), &mut k[2]);
        axpy(&mut ys[2], &y, dt, &k[2]);
        for j in 0..l {
            fb[j] = -c * s1[j] - ys[1][l + j] * kh * (dt * c * c);
        }
        let p4 = local.rhs(&c1, &ys[2], Some(&fb), &mut k[3]);

        for j in 0..l {
            ca[j] = y[l + j] * (dt / 6.0 * c);
            cb[j] = (ys[0][l + j] + ys[1][l + j]) * (dt / 3.0 * c);
            cd[j] = ys[2][l + j] * (dt / 6.0 * c);
            s0[j] = s1[j] + ca[j] * kf + cb[j] * kh + cd[j] * km;
            sh_next[j] = ZERO;
            s1_next[j] = ZERO;
        }
        for idx in 0..2 * l {
            y[idx] += (k[0][idx] + (k[1][idx] + k[2][idx]) * 2.0 + k[3][idx]) * (dt / 6.0);
        }
        lost += 2.0 * k_a * (p1 + 2.0 * (p2 + p3) + p4) * (dt / 6.0);

        for j in 0..l {
            let (sh_j, s1_j) = advance_level(&mut x[j * m_count..(j + 1) * m_count], &p0, &rot, ca[j], cb[j], cd[j]);
            sh_next[j] = sh_j;
            s1_next[j] = s1_j;
        }
        for (p, r) in p0.iter_mut().zip(&rot) {
            *p *= r * r;
        }
        std::mem::swap(&mut sh, &mut sh_next);
        std::mem::swap(&mut s1, &mut s1_next);

        if every > 0 && ((s + 1) % every == 0 || s + 1 == steps) {
            diag.push(row(t_start + tp1, &y[..l], &y[l..], mode_pop(&x), lost));
        }
    }

    let mut out = state.clone();
    out.atom.copy_from_slice(&y[..l]);
    out.cavity.copy_from_slice(&y[l..]);
    out.radiated = mode_pop(&x);
    for m in 0..m_count {
        for j in 0..l {
            out.continuum[m * l + j] = x[j * m_count + m];
        }
    }
    out.lost = lost;
    out.time = t_start + big_t;
    (out, diag)
}

/// x_m += a·p_m + b·p_m r_m + d·p_m r_m² for one level, returning the sums
/// Σ conj(p_m r_m³) x_m and Σ conj(p_m r_m⁴) x_m that the next step needs.
#[inline(never)]
fn advance_level(x: &mut [C64], p0: &[C64], rot: &[C64], a: C64, b: C64, d: C64) -> (C64, C64) {
    let (mut sh_re, mut sh_im, mut s1_re, mut s1_im) = (0.0, 0.0, 0.0, 0.0);
    for ((xm, &pa), &r) in x.iter_mut().zip(p0).zip(rot) {
        let ph = pa * r;
        let pe = ph * r;
        let phn = pe * r;
        let pen = phn * r;
        let v = *xm + a * pa + b * ph + d * pe;
        *xm = v;
        sh_re += phn.re * v.re + phn.im * v.im;
        sh_im += phn.re * v.im - phn.im * v.re;
        s1_re += pen.re * v.re + pen.im * v.im;
        s1_im += pen.re * v.im - pen.im * v.re;
    }
    (C64::new(sh_re, sh_im), C64::new(s1_re, s1_im))
}

/// Full derivative of the discrete-bath state evaluated term by term.
#[cfg(test)]
pub(crate) fn discrete_derivative(
    h: &MotionHamiltonian,
    pulse: &Pulse,
    pulse_time: f64,
    state: &SingleExcitationState,
) -> Vec<C64> {
    let l = state.level_count();
    let t = state.time;
    let grid = &h.grid;
    let c = h.mode_coupling();
    let mut fb = vec![ZERO; l];
    for m in 0..grid.mode_count {
        let ph = C64::from_polar(1.0, -grid.omega(m) * t);
        for (f, &x) in fb.iter_mut().zip(&state.continuum[m * l..(m + 1) * l]) {
            *f -= c * ph * x;
        }
    }
    let y: Vec<C64> = state.atom.iter().chain(&state.cavity).copied().collect();
    let mut dy = vec![ZERO; 2 * l];
    let mut local = Local::new(h);
    local.rhs(&h.local(pulse, pulse_time, t), &y, Some(&fb), &mut dy);
    for m in 0..grid.mode_count {
        let ph = C64::from_polar(c, grid.omega(m) * t);
        for j in 0..l {
            dy.push(ph * state.cavity[j]);
        }
    }
    dy
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::ContinuumGrid;
    use crate::motion::{MotionOptions, MotionSpec};
    use crate::params::PolarizationBranch;

    fn small(bath: BathModel) -> (MotionHamiltonian, Pulse) {
        let b = PolarizationBranch::lossless(60.0, 1500.0, 25.0).unwrap();
        let m = MotionSpec::new(1.3, 0.1, 0.05, 0.2).unwrap();
        let p = Pulse::square(3600.0, 3.0).unwrap();
        let g = ContinuumGrid::auto(25.0, 3.0).unwrap();
        let h = MotionHamiltonian::new(
            b,
            m,
            g,
            0,
            MotionOptions {
                bath,
                cavity_stark: true,
            },
        )
        .unwrap();
        (h, p)
    }

    #[test]
    fn derivative_matches_dense_generator() {
        let b = PolarizationBranch::lossless(60.0, 1500.0, 25.0).unwrap();
        let m = MotionSpec::new(1.3, 0.1, 0.05, 0.2).unwrap();
        let g = ContinuumGrid::new(200.0, 9).unwrap();
        let p = Pulse::square(3600.0, 30.0).unwrap();
        let h = MotionHamiltonian::new(
            b,
            m,
            g,
            1,
            MotionOptions {
                bath: BathModel::Discrete,
                cavity_stark: true,
            },
        )
        .unwrap();
        let mut st = SingleExcitationState::excited_atom(&h, 1).unwrap();
        st.time = 0.83;
        let l = st.level_count();
        let mut seed = 1u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for v in st
            .atom
            .iter_mut()
            .chain(st.cavity.iter_mut())
            .chain(st.continuum.iter_mut())
        {
            *v = C64::new(rnd(), rnd());
        }
        let fast = discrete_derivative(&h, &p, 0.4, &st);
        let dense = h.dense(&p, 0.4, st.time);
        let psi: Vec<C64> = st.atom.iter().chain(&st.cavity).chain(&st.continuum).copied().collect();
        let i = C64::new(0.0, 1.0);
        for r in 0..psi.len() {
            let hpsi: C64 = dense[r].iter().zip(&psi).map(|(a, b)| a * b).sum();
            assert!((fast[r] + i * hpsi).norm() < 1e-10, "row {r} of {}", 2 * l);
        }
    }

    #[test]
    fn zero_pulse_leaves_atom_alone() {
        for bath in [BathModel::Markov, BathModel::Discrete] {
            let (h, _) = small(bath);
            let p = Pulse::square(0.0, 3.0).unwrap();
            let st = SingleExcitationState::excited_atom(&h, 2).unwrap();
            let dt = h.default_step(&p);
            let out = propagate(&st, &h, &p, dt).unwrap();
            assert_eq!(out.atom, st.atom);
            assert_eq!(out.mode_population(), 0.0);
            assert!((out.time - 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn norm_is_conserved() {
        for bath in [BathModel::Markov, BathModel::Discrete] {
            let (h, p) = small(bath);
            let st = SingleExcitationState::excited_atom(&h, 0).unwrap();
            let out = propagate(&st, &h, &p, h.default_step(&p)).unwrap();
            assert!((out.norm_sqr() - 1.0).abs() < 1e-8, "{bath:?}: {}", out.norm_sqr());
        }
    }

    #[test]
    fn markov_reconstruction_matches_radiated_population() {
        let (h, p) = small(BathModel::Markov);
        let st = SingleExcitationState::excited_atom(&h, 0).unwrap();
        let out = propagate(&st, &h, &p, h.default_step(&p)).unwrap();
        // The grid misses only the far spectral tail.
        assert!(out.radiated > 0.25);
        assert!((out.mode_population() - out.radiated).abs() < 2e-3 * out.radiated);
    }

    #[test]
    fn baths_agree() {
        let (hm, p) = small(BathModel::Markov);
        let (hd, _) = small(BathModel::Discrete);
        let sm = propagate(
            &SingleExcitationState::excited_atom(&hm, 0).unwrap(),
            &hm,
            &p,
            hm.default_step(&p),
        )
        .unwrap();
        let sd = propagate(
            &SingleExcitationState::excited_atom(&hd, 0).unwrap(),
            &hd,
            &p,
            hd.default_step(&p),
        )
        .unwrap();
        for j in 0..sm.level_count() {
            assert!((sm.atom[j] - sd.atom[j]).norm() < 5e-3);
        }
        let peak = sd.continuum.iter().map(|a| a.norm()).fold(0.0, f64::max);
        for (a, b) in sm.continuum.iter().zip(&sd.continuum) {
            assert!((a - b).norm() < 0.02 * peak);
        }
    }

    #[test]
    fn step_bound_is_enforced() {
        let (h, p) = small(BathModel::Discrete);
        let st = SingleExcitationState::excited_atom(&h, 0).unwrap();
        let too_big = 2.0 * h.max_step(&p);
        assert!(matches!(propagate(&st, &h, &p, too_big), Err(Error::Configuration(_))));
    }

    #[test]
    fn sequential_propagation_continues_clock() {
        let (h, p) = small(BathModel::Markov);
        let mut st = SingleExcitationState::excited_atom(&h, 0).unwrap();
        let dt = h.default_step(&p);
        for _ in 0..3 {
            st = propagate(&st, &h, &p, dt).unwrap();
        }
        assert!((st.time - 9.0).abs() < 1e-12);
        assert!((st.norm_sqr() - 1.0).abs() < 1e-6);
    }
}
