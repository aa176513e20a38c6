//! Acceptance criteria for the reference source: g = √I = 60 MHz,
//! δ = 1500 MHz, k_c = 25 MHz, T = 30 μs, square pulses, identical
//! polarizations.
//!
//! Prints one PASS/FAIL line per criterion with indented details and exits
//! non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64 as C64;
use wavepacket_cli::figures::{figure_curves, reference_source};
use wavepacket_cli::{run_experiment, FigureId};
use wavepacket_core::noise::{monte_carlo_transfer, sample_mu_batch, DEFAULT_WIENER_STEPS};
use wavepacket_core::{
    convert_fr_to_d, ideal_fidelity, loss_fidelity, motion_fidelity, propagate, spectral_envelope, wavepacket_overlap,
    BathModel, ContinuumGrid, InitialSuperposition, MotionHamiltonian, MotionOptions, MotionSpec, MuSampler,
    PolarizationBranch, Pulse, SingleExcitationState, Source,
};

const G: f64 = 60.0;
const INTENSITY: f64 = 3600.0;
const DELTA: f64 = 1500.0;
const K_C: f64 = 25.0;
const T: f64 = 30.0;

// Pinned tolerances.
const TOL_CLOSED_FORM: f64 = 1e-6;
const TOL_NORM_DEFAULT: f64 = 1e-3;
const TOL_NORM_REFINED: f64 = 1e-5;
const MC_SAMPLES: usize = 100_000;
const MC_SIGMAS: f64 = 3.0;
const TOL_LOSS: f64 = 1e-3;
const TOL_MOTIONLESS_FIDELITY: f64 = 1e-3;
const TOL_MOTIONLESS_AMPLITUDE: f64 = 1e-2;
const DOMINANT_FRACTION: f64 = 0.1;
const TOL_GROUND_STATE: f64 = 0.02;
const TOL_TRUNCATION: f64 = 1e-4;
const TOL_INDEPENDENCE: f64 = 0.01;
const TOL_OVERLAP_ZERO: f64 = 1e-6;

/// μ(T) for a square pulse, written out from the parameters.
fn mu_square(k: f64) -> f64 {
    G * G * INTENSITY * T / (4.0 * DELTA * DELTA * k)
}

struct Report {
    passed: usize,
    failed: Vec<String>,
}

impl Report {
    fn line(&mut self, id: &str, title: &str, ok: bool, details: &[String], started: Instant) {
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("{tag}  {id}  {title}  ({:.1} s)", started.elapsed().as_secs_f64());
        for d in details {
            println!("        {d}");
        }
        if ok {
            self.passed += 1;
        } else {
            self.failed.push(id.to_string());
        }
    }
}

fn branch() -> PolarizationBranch {
    PolarizationBranch::lossless(G, DELTA, K_C).unwrap()
}

fn pulse() -> Pulse {
    Pulse::square(INTENSITY, T).unwrap()
}

fn criterion_1(r: &mut Report) {
    let t0 = Instant::now();
    let p1_exact = 1.0 - (-2.0 * mu_square(K_C)).exp();
    let p10_exact = p1_exact.powi(10);
    let s = reference_source();
    let p1 = ideal_fidelity(1, &s).unwrap();
    let p10 = ideal_fidelity(10, &s).unwrap();
    let d = (p1 - p1_exact).abs().max((p10 - p10_exact).abs());
    // Reference values as printed, checked to one unit in their last digit.
    let printed = (p1 - 0.96845).abs() <= 1e-5 && (p10 - 0.7257).abs() <= 1e-4;
    let ok = d <= TOL_CLOSED_FORM && printed;
    r.line(
        "1",
        "ideal closed form",
        ok,
        &[
            format!("P(1) = {p1:.10}, independent {p1_exact:.10}, printed 0.96845"),
            format!("P(10) = {p10:.10}, independent {p10_exact:.10}, printed 0.7257"),
            format!("max |difference| = {d:.2e} (tolerance {TOL_CLOSED_FORM:e})"),
            format!("printed values agree to one unit in their last digit: {printed} (0.9684443 rounds to 0.96844)"),
        ],
        t0,
    );
}

fn criterion_2(r: &mut Report) {
    let t0 = Instant::now();
    let exact = 1.0 - (-2.0 * mu_square(K_C)).exp();
    let grid = ContinuumGrid::auto(K_C, T).unwrap();
    let fine = grid.refined(4).unwrap();
    let n_default = spectral_envelope(&pulse(), &branch(), &grid).unwrap().norm();
    let n_fine = spectral_envelope(&pulse(), &branch(), &fine).unwrap().norm();
    let (e_default, e_fine) = ((n_default - exact).abs(), (n_fine - exact).abs());
    let ramp = Pulse::sine_squared_ramp(INTENSITY, T, 0.2).unwrap();
    let ramp_exact = 1.0 - (-2.0 * wavepacket_core::pulse_integral_mu(&ramp, &branch(), false).unwrap()).exp();
    let ramp_fine = spectral_envelope(&ramp, &branch(), &fine).unwrap().norm();
    let ok = e_default <= TOL_NORM_DEFAULT && e_fine <= TOL_NORM_REFINED;
    r.line(
        "2",
        "quadrature vs closed form",
        ok,
        &[
            format!(
                "default grid (W = {} MHz, M = {}): {n_default:.8} vs {exact:.8}, error {e_default:.2e} (tolerance {TOL_NORM_DEFAULT:e})",
                grid.half_bandwidth, grid.mode_count
            ),
            format!(
                "4x modes (M = {}): {n_fine:.8}, error {e_fine:.2e} (tolerance {TOL_NORM_REFINED:e})",
                fine.mode_count
            ),
            "square-pulse spectral tail beyond ±W: ≈ (μ/π)(1 + e^(-2μ))(2/W), independent of M".to_string(),
            format!(
                "info: sin² ramped pulse at 4x modes: error {:.2e}",
                (ramp_fine - ramp_exact).abs()
            ),
        ],
        t0,
    );
}

fn criterion_3(r: &mut Report) {
    let t0 = Instant::now();
    let b = branch();
    let p = pulse();
    let mut ok = true;
    let mut details = Vec::new();
    let noiseless = 1.0 - (-2.0 * mu_square(K_C)).exp();
    for (i, fr) in [0.05, 0.1, 0.2].into_iter().enumerate() {
        let d = convert_fr_to_d(fr, &p).unwrap();
        let mu = mu_square(K_C);
        let sigma2 = G.powi(4) * d * T / (16.0 * DELTA.powi(4) * K_C * K_C);
        let mgf = 1.0 - (-2.0 * mu + 2.0 * sigma2).exp();
        let printed = 1.0 - (-2.0 * mu - 2.0 * sigma2).exp();
        let sampler = MuSampler::new(&p, &b, d, DEFAULT_WIENER_STEPS).unwrap();
        let est = monte_carlo_transfer(&sample_mu_batch(&sampler, 1000 + i as u64, MC_SAMPLES));
        let z = (est.mean - mgf).abs() / est.std_err;
        let z_printed = (est.mean - printed).abs() / est.std_err;
        let pass = z <= MC_SIGMAS && est.mean < noiseless;
        ok &= pass;
        details.push(format!(
            "F_r = {fr}: MC {:.6} ± {:.1e}, +2σ² form {mgf:.6} ({z:.2} SE), -2σ² form {printed:.6} ({z_printed:.1} SE), noiseless {noiseless:.6}",
            est.mean, est.std_err
        ));
    }
    details.push(format!(
        "{MC_SAMPLES} seeded Wiener samples per point, tolerance {MC_SIGMAS} SE, strictly below noiseless"
    ));
    r.line("3", "Monte Carlo vs Gaussian average", ok, &details, t0);
}

fn criterion_4(r: &mut Report) {
    let t0 = Instant::now();
    let ratio = 0.01;
    let k_a = ratio * K_C;
    let kappa = K_C + k_a;
    let independent = (K_C / kappa * (1.0 - (-2.0 * mu_square(kappa)).exp())).powi(10);
    let lossy = Source::identical(
        branch().with_loss(k_a).unwrap(),
        pulse(),
        InitialSuperposition::balanced(),
    )
    .unwrap();
    let p10 = loss_fidelity(10, &lossy).unwrap();
    let s = reference_source();
    let mut zero_exact = true;
    for n in 1..=15 {
        zero_exact &= loss_fidelity(n, &s).unwrap() == ideal_fidelity(n, &s).unwrap();
    }
    let ok = (p10 - independent).abs() <= TOL_LOSS && (p10 - 0.6496).abs() <= TOL_LOSS && zero_exact;
    r.line(
        "4",
        "loss fidelity",
        ok,
        &[
            format!("k_a/k_c = 0.01, n = 10: {p10:.6}, independent {independent:.6}, printed 0.6496 (tolerance {TOL_LOSS:e})"),
            format!("k_a = 0 reproduces the ideal values exactly for n = 1..15: {zero_exact}"),
        ],
        t0,
    );
}

fn criterion_5(r: &mut Report) {
    let t0 = Instant::now();
    let s = reference_source();
    let grid = ContinuumGrid::auto(K_C, T).unwrap();
    let still = MotionSpec::new(1.0, 0.0, 0.0, 1.0).unwrap();
    let discrete = MotionOptions {
        bath: BathModel::Discrete,
        cavity_stark: true,
    };
    let p1 = motion_fidelity(&s, &still, &grid, discrete).unwrap().single_cycle;
    let ideal = ideal_fidelity(1, &s).unwrap();

    let b = branch();
    let h = MotionHamiltonian::new(b.clone(), still, grid, 0, discrete).unwrap();
    let st = SingleExcitationState::excited_atom(&h, 0).unwrap();
    let out = propagate(&st, &h, &pulse(), h.default_step(&pulse())).unwrap();
    let emitted = out.mode_amplitudes(0);
    let target: Vec<C64> = spectral_envelope(&pulse(), &b, &grid).unwrap().mode_amplitudes();
    let peak = target.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    let mut dominant = 0;
    for (t, e) in target.iter().zip(&emitted) {
        if t.norm() > DOMINANT_FRACTION * peak {
            dominant += 1;
            worst = worst.max((e + t).norm() / t.norm());
        }
    }
    let ok = (p1 - ideal).abs() <= TOL_MOTIONLESS_FIDELITY && worst <= TOL_MOTIONLESS_AMPLITUDE;
    r.line(
        "5",
        "motionless-limit equivalence",
        ok,
        &[
            format!(
                "η = 0, N = 1, discrete bath: P(1) = {p1:.6} vs {ideal:.6}, |difference| {:.2e} (tolerance {TOL_MOTIONLESS_FIDELITY:e})",
                (p1 - ideal).abs()
            ),
            format!(
                "max relative amplitude error on {dominant} dominant modes: {worst:.3} (tolerance {TOL_MOTIONLESS_AMPLITUDE:e}); emitted amplitude compared with -G√Δω"
            ),
            "the closed-form envelope is the adiabatic limit; the gap is the finite-k_c correction and the cavity light shift g²/δ".to_string(),
        ],
        t0,
    );
}

fn criterion_6(r: &mut Report) {
    let t0 = Instant::now();
    let s = reference_source();
    let grid = ContinuumGrid::auto(K_C, T).unwrap();
    let opts = MotionOptions::default();
    let thermal = [0.01, 0.1, 0.5, 1.0];
    let mut curves = Vec::new();
    let mut details = Vec::new();
    let mut stable = true;
    for n_bar in thermal {
        let spec = MotionSpec::new(1.0, 0.07, 0.07, n_bar).unwrap();
        let f = motion_fidelity(&s, &spec, &grid, opts).unwrap();
        let wider = spec.with_n_max(spec.n_max + 5).unwrap();
        let g = motion_fidelity(&s, &wider, &grid, opts).unwrap();
        let shift = (f.single_cycle - g.single_cycle).abs();
        stable &= shift < TOL_TRUNCATION;
        details.push(format!(
            "N = {n_bar}: P(1) = {:.7}, P(10) = {:.6}, n_max = {} -> {} changes P(1) by {shift:.1e}",
            f.single_cycle,
            f.at(10),
            spec.n_max,
            wider.n_max
        ));
        curves.push(f);
    }
    let mut ordered = true;
    for n in 1..=10 {
        for w in curves.windows(2) {
            ordered &= w[1].at(n) < w[0].at(n);
        }
    }
    let still = MotionSpec::new(1.0, 0.0, 0.0, 0.0).unwrap();
    let p_still = motion_fidelity(&s, &still, &grid, opts).unwrap().single_cycle;
    let near = (curves[0].single_cycle - p_still).abs();
    details.push(format!("strictly decreasing in N for n = 1..10: {ordered}"));
    details.push(format!(
        "N = 0.01 vs motionless at n = 1: {:.7} vs {p_still:.7}, gap {near:.2e} (tolerance {TOL_GROUND_STATE})",
        curves[0].single_cycle
    ));
    details.push(format!("n_max + 5 stable within {TOL_TRUNCATION:e}: {stable}"));
    details.push("ω₀ = 1 MHz, η_L = η_r = 0.07, Markov bath".to_string());
    r.line(
        "6",
        "thermal-motion curve ordering",
        ordered && near < TOL_GROUND_STATE && stable,
        &details,
        t0,
    );
}

fn criterion_7(r: &mut Report) {
    let t0 = Instant::now();
    let grid = ContinuumGrid::auto(K_C, T).unwrap();
    let fine = grid.refined(4).unwrap();
    let env = spectral_envelope(&pulse(), &branch(), &grid).unwrap();
    let env_fine = spectral_envelope(&pulse(), &branch(), &fine).unwrap();
    let mut ok = true;
    let mut details = Vec::new();
    let mut check = |e: &wavepacket_core::SpectralEnvelope, label: &str, shifts: &[f64]| {
        let mut worst: f64 = 0.0;
        for &k in shifts {
            for sign in [-1.0, 1.0] {
                worst = worst.max(wavepacket_overlap(e, sign * k * T).norm());
            }
        }
        ok &= worst < TOL_INDEPENDENCE;
        let list: Vec<String> = shifts.iter().map(|k| format!("±{k}T")).collect();
        details.push(format!(
            "{label} (recurrence {:.0} μs): max |overlap| at {} = {worst:.2e} (tolerance {TOL_INDEPENDENCE})",
            e.grid.recurrence_time(),
            list.join(", ")
        ));
    };
    check(&env, "default grid", &[3.0]);
    check(&env_fine, "4x modes", &[3.0, 5.0, 10.0, 15.0]);
    let zero = wavepacket_overlap(&env, 0.0);
    let dz = (zero - env.norm()).norm();
    ok &= dz <= TOL_OVERLAP_ZERO;
    details.push(format!(
        "overlap(0) = {:.8} vs norm {:.8}, |difference| {dz:.1e} (tolerance {TOL_OVERLAP_ZERO:e})",
        zero.re,
        env.norm()
    ));
    details.push(format!(
        "info: on a uniform grid the overlap revives at multiples of 2π/Δω; |overlap(4T)| = {:.3} on the default grid",
        wavepacket_overlap(&env, 4.0 * T).norm()
    ));
    r.line("7", "wavepacket independence", ok, &details, t0);
}

fn run_fig2(dir: &Path, workers: Option<&str>) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wavepacket"));
    cmd.args(["figure", "fig2", "--seed", "11", "--out"]).arg(dir);
    match workers {
        Some(w) => cmd.env("WAVEPACKET_WORKERS", w),
        None => cmd.env_remove("WAVEPACKET_WORKERS"),
    };
    let out = cmd.output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    let mut files = Vec::new();
    for c in figure_curves(FigureId::Fig2, 11) {
        let name = format!("fig2{}.csv", c.suffix);
        files.push((name.clone(), std::fs::read(dir.join(&name)).map_err(|e| e.to_string())?));
    }
    Ok(files)
}

fn criterion_8(r: &mut Report) {
    let t0 = Instant::now();
    let root = tempfile::tempdir().unwrap();
    let runs: Vec<_> = [("a", None), ("b", None), ("c", Some("3")), ("d", Some("1"))]
        .into_iter()
        .map(|(d, w)| run_fig2(&root.path().join(d), w))
        .collect();
    let mut details = Vec::new();
    let ok = match runs.into_iter().collect::<Result<Vec<_>, _>>() {
        Err(e) => {
            details.push(format!("figure fig2 failed: {e}"));
            false
        }
        Ok(all) => {
            let same = all.windows(2).all(|w| w[0] == w[1]);
            let names: Vec<&str> = all[0].iter().map(|(n, _)| n.as_str()).collect();
            let bytes: usize = all[0].iter().map(|(_, b)| b.len()).sum();
            details.push(format!("files: {} ({bytes} bytes)", names.join(", ")));
            details.push(format!(
                "two runs with default workers and runs with WAVEPACKET_WORKERS = 3 and 1 byte-identical: {same}"
            ));
            same && names.len() == 3
        }
    };
    // In-process: same seed, different pool sizes.
    let tables: Vec<_> = [1, 2]
        .into_iter()
        .map(|n| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
            pool.install(|| run_experiment(&figure_curves(FigureId::Fig2, 11)[2].config).unwrap())
        })
        .collect();
    let same_tables = tables[0] == tables[1];
    details.push(format!("in-process tables identical across pool sizes: {same_tables}"));
    r.line("8", "determinism", ok && same_tables, &details, t0);
}

fn main() {
    let mut r = Report {
        passed: 0,
        failed: Vec::new(),
    };
    criterion_1(&mut r);
    criterion_2(&mut r);
    criterion_3(&mut r);
    criterion_4(&mut r);
    criterion_5(&mut r);
    criterion_6(&mut r);
    criterion_7(&mut r);
    criterion_8(&mut r);
    let total = r.passed + r.failed.len();
    println!("acceptance: {}/{total} criteria passed", r.passed);
    if !r.failed.is_empty() {
        println!("failed: {}", r.failed.join(", "));
        std::process::exit(1);
    }
}
