use num_complex::Complex64 as C64;
use proptest::prelude::*;
use wavepacket_core::*;

fn branch() -> PolarizationBranch {
    PolarizationBranch::lossless(60.0, 1500.0, 25.0).unwrap()
}

fn source(intensity: f64, t: f64) -> Source {
    Source::identical(
        branch(),
        Pulse::square(intensity, t).unwrap(),
        InitialSuperposition::balanced(),
    )
    .unwrap()
}

fn any_pulse() -> impl Strategy<Value = Pulse> {
    prop_oneof![
        (100.0..8000.0f64, 5.0..40.0f64).prop_map(|(i, t)| Pulse::square(i, t).unwrap()),
        (100.0..8000.0f64, 5.0..40.0f64, 0.05..0.5f64).prop_map(|(i, t, r)| Pulse::sine_squared_ramp(i, t, r).unwrap()),
        (proptest::collection::vec(0.0..6000.0f64, 3..8), 5.0..40.0f64).prop_map(|(v, t)| {
            let n = v.len();
            let times = (0..n).map(|k| t * k as f64 / (n - 1) as f64).collect();
            Pulse::sampled(times, v).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ideal_fidelity_monotone(i in 10.0..10000.0f64, t in 1.0..50.0f64, n in 0u32..30, scale in 1.0..5.0f64) {
        let s = source(i, t);
        let f = ideal_fidelity(n, &s).unwrap();
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert!(ideal_fidelity(n + 1, &s).unwrap() <= f);
        let stronger = source(i * scale, t);
        prop_assert!(ideal_fidelity(n, &stronger).unwrap() >= f);
    }

    #[test]
    fn ideal_fidelity_saturates(n in 1u32..20) {
        let s = source(1e6, 30.0);
        prop_assert!((ideal_fidelity(n, &s).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn projection_is_unit_norm(a in -1.0..1.0f64, b in -1.0..1.0f64, c in -1.0..1.0f64, d in -1.0..1.0f64,
                               n in 1u32..12, plus in any::<bool>()) {
        prop_assume!(a * a + b * b + c * c + d * d > 1e-6);
        let sign = if plus { MeasurementSign::Plus } else { MeasurementSign::Minus };
        let st = project_measurement(C64::new(a, b), C64::new(c, d), sign, n).unwrap();
        prop_assert!((st.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert_eq!(st.photons, n);
    }

    #[test]
    fn closed_forms_are_bit_deterministic(i in 10.0..10000.0f64, t in 1.0..50.0f64, n in 0u32..20) {
        let s = source(i, t);
        prop_assert_eq!(ideal_fidelity(n, &s).unwrap().to_bits(), ideal_fidelity(n, &s).unwrap().to_bits());
        let d = [1e5, 2e5];
        prop_assert_eq!(
            averaged_fidelity(n, &s, d).unwrap().value.to_bits(),
            averaged_fidelity(n, &s, d).unwrap().value.to_bits()
        );
    }

    #[test]
    fn averaged_below_ideal(fr in 0.001..0.3f64, n in 1u32..15) {
        let s = source(3600.0, 30.0);
        let p = &s.branches[0].pulse;
        let d = convert_fr_to_d(fr, p).unwrap();
        let avg = averaged_fidelity(n, &s, [d, d]).unwrap().value;
        prop_assert!(avg < ideal_fidelity(n, &s).unwrap());
        let one = averaged_fidelity(1, &s, [d, d]).unwrap().value;
        prop_assert!((avg - one.powi(n as i32)).abs() < 1e-14);
        prop_assert_eq!(averaged_fidelity(n, &s, [0.0, 0.0]).unwrap().value, ideal_fidelity(n, &s).unwrap());
    }

    #[test]
    fn averaged_decreases_with_noise(d1 in 0.0..1e7f64, extra in 1.0..1e7f64, n in 1u32..10) {
        let s = source(3600.0, 30.0);
        let a = averaged_fidelity(n, &s, [d1, d1]).unwrap().value;
        let b = averaged_fidelity(n, &s, [d1 + extra, d1 + extra]).unwrap().value;
        prop_assert!(b < a);
    }

    #[test]
    fn fr_round_trip(fr in 0.0..1.0f64, i in 1.0..1e4f64, t in 0.1..100.0f64) {
        let p = Pulse::square(i, t).unwrap();
        let back = convert_d_to_fr(convert_fr_to_d(fr, &p).unwrap(), &p).unwrap();
        prop_assert!((back - fr).abs() <= 1e-12 * fr.max(1.0));
    }

    #[test]
    fn loss_fidelity_properties(ka in 0.0..5.0f64, more in 0.01..5.0f64, n in 1u32..15) {
        let mk = |k_a: f64| Source::identical(
            branch().with_loss(k_a).unwrap(),
            Pulse::square(3600.0, 30.0).unwrap(),
            InitialSuperposition::balanced(),
        ).unwrap();
        let s = mk(ka);
        let f = loss_fidelity(n, &s).unwrap();
        prop_assert!(loss_fidelity(n, &mk(ka + more)).unwrap() < f);
        prop_assert!(loss_fidelity(n + 1, &s).unwrap() < f);
        let one = loss_fidelity(1, &s).unwrap();
        prop_assert!((f - one.powi(n as i32)).abs() < 1e-14);
    }

    #[test]
    fn thermal_weights_normalized(n in 0.0..3.0f64) {
        let n_max = auto_n_max(n);
        let p = thermal_weights(n, n_max).unwrap();
        let sum: f64 = p.iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-14);
        let mean: f64 = p.iter().enumerate().map(|(k, w)| k as f64 * w).sum();
        prop_assert!((mean - n).abs() < 1e-4 * n.max(1.0));
        prop_assert!(p.iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn lamb_dicke_matrix_symmetric(eta_l in 0.0..0.5f64, eta_r in 0.0..0.5f64, n in 0.0..2.0f64) {
        let m = MotionSpec::new(1.0, eta_l, eta_r, n).unwrap();
        let c = lamb_dicke_coefficients(&m);
        let x = c.dense();
        for (i, row) in x.iter().enumerate() {
            prop_assert_eq!(row[i], 2.0 * i as f64 + 1.0);
            for (j, &v) in row.iter().enumerate() {
                prop_assert_eq!(v, x[j][i]);
            }
        }
    }

    #[test]
    fn generator_is_hermitian(eta_l in 0.0..0.5f64, eta_r in 0.0..0.5f64, omega0 in 0.0..5.0f64,
                              t in 0.0..30.0f64, k in 0usize..6, phase in -3.0..3.0f64) {
        let m = MotionSpec::new(omega0, eta_l, eta_r, 0.05).unwrap();
        let g = ContinuumGrid::new(200.0, 6).unwrap();
        let p = Pulse::square(3600.0, 30.0).unwrap().with_phase(PulsePhase::Constant(phase)).unwrap();
        let h = MotionHamiltonian::new(branch(), m, g, k, MotionOptions { bath: BathModel::Discrete, cavity_stark: true }).unwrap();
        let d = h.dense(&p, t, t);
        for (r, row) in d.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                prop_assert!((v - d[c][r].conj()).norm() < 1e-12);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn envelope_norm_identity(p in any_pulse()) {
        let b = branch();
        let g = ContinuumGrid::auto(b.total_decay(), p.duration()).unwrap();
        let env = spectral_envelope(&p, &b, &g).unwrap();
        let mu = pulse_integral_mu(&p, &b, false).unwrap();
        prop_assert!((env.norm() - transfer_probability(mu)).abs() < 1e-3);
        let o = wavepacket_overlap(&env, 0.0);
        prop_assert!(o.re >= 0.0 && o.re <= 1.0);
        prop_assert!(o.im.abs() < 1e-12);
        let again = spectral_envelope(&p, &b, &g).unwrap();
        prop_assert!(env.amplitudes.iter().zip(&again.amplitudes).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
    }

    #[test]
    fn overlap_is_hermitian(dt in -100.0..100.0f64) {
        let b = branch();
        let p = Pulse::square(3600.0, 30.0).unwrap();
        let g = ContinuumGrid::auto(25.0, 30.0).unwrap();
        let env = spectral_envelope(&p, &b, &g).unwrap();
        let a = wavepacket_overlap(&env, dt);
        let c = wavepacket_overlap(&env, -dt);
        prop_assert!((a - c.conj()).norm() < 1e-13);
        prop_assert!(a.norm() <= env.norm() * (1.0 + 1e-12));
    }

    #[test]
    fn propagation_conserves_norm(eta in 0.0..0.2f64, omega0 in 0.1..3.0f64, k in 0usize..4, n_th in 0.0..0.3f64) {
        let m = MotionSpec::new(omega0, eta, eta, n_th).unwrap();
        let p = Pulse::square(3600.0, 3.0).unwrap();
        let g = ContinuumGrid::auto(25.0, 3.0).unwrap();
        let h = MotionHamiltonian::new(branch(), m, g, k, MotionOptions::default()).unwrap();
        let st = SingleExcitationState::excited_atom(&h, k).unwrap();
        prop_assert_eq!(excitation_number(&st), 1.0);
        let out = propagate(&st, &h, &p, h.default_step(&p)).unwrap();
        prop_assert!((excitation_number(&out) - 1.0).abs() < 1e-6);
    }
}
