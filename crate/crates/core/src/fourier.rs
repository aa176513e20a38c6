//! Chirp-z evaluation of sampled Fourier sums on a uniform frequency grid.

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

/// X_m = Σ_q x_q · exp(i·(ω₀ + m·Δω)·q·h) for m = 0..m_count.
///
/// Bluestein's identity m·q = (m² + q² − (m − q)²)/2 turns the sum into a
/// linear convolution evaluated with one forward and one inverse FFT pair.
pub fn chirp_z(x: &[C64], h: f64, omega0: f64, d_omega: f64, m_count: usize) -> Vec<C64> {
    let q_count = x.len();
    if q_count == 0 || m_count == 0 {
        return vec![C64::new(0.0, 0.0); m_count];
    }
    let beta = d_omega * h;
    let len = (q_count + m_count - 1).next_power_of_two();

    // Quadratic phases are reduced with exact integer squares.
    let chirp = |k: i64| C64::from_polar(1.0, 0.5 * beta * (k * k) as f64);

    let mut a = vec![C64::new(0.0, 0.0); len];
    for (q, (aq, &xq)) in a.iter_mut().zip(x).enumerate() {
        let lin = C64::from_polar(1.0, omega0 * h * q as f64);
        *aq = xq * lin * chirp(q as i64);
    }
    // b_k = conj(chirp(k)) for k in −(Q−1)..=(M−1), wrapped circularly.
    let mut b = vec![C64::new(0.0, 0.0); len];
    for (k, bk) in b.iter_mut().take(m_count).enumerate() {
        *bk = chirp(k as i64).conj();
    }
    for k in 1..q_count {
        b[len - k] = chirp(k as i64).conj();
    }

    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (ai, bi) in a.iter_mut().zip(&b) {
        *ai *= bi;
    }
    inv.process(&mut a);

    let scale = 1.0 / len as f64;
    (0..m_count).map(|m| a[m] * chirp(m as i64) * scale).collect()
}
