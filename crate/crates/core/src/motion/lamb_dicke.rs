use super::MotionSpec;

/// Matrix elements of (l + l†)² on Fock levels 0..=n_max.
#[derive(Clone, Debug, PartialEq)]
pub struct LambDickeCoefficients {
    /// ⟨n|(l+l†)²|n⟩ = 2n + 1.
    pub diagonal: Vec<f64>,
    /// ⟨n+2|(l+l†)²|n⟩ = √((n+1)(n+2)), for n = 0..=n_max−2.
    pub second: Vec<f64>,
    /// (η_L² + η_r²)/2.
    pub raman_eta_sq: f64,
    pub eta_l_sq: f64,
    pub eta_r_sq: f64,
}

pub fn lamb_dicke_coefficients(motion: &MotionSpec) -> LambDickeCoefficients {
    let n_max = motion.n_max;
    LambDickeCoefficients {
        diagonal: (0..=n_max).map(|n| 2.0 * n as f64 + 1.0).collect(),
        second: (0..n_max.saturating_sub(1))
            .map(|n| ((n + 1) as f64 * (n + 2) as f64).sqrt())
            .collect(),
        raman_eta_sq: motion.raman_eta_sq(),
        eta_l_sq: motion.eta_l * motion.eta_l,
        eta_r_sq: motion.eta_r * motion.eta_r,
    }
}

impl LambDickeCoefficients {
    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// Dense (l + l†)² on the truncated space.
    pub fn dense(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut x = vec![vec![0.0; d]; d];
        for (n, &v) in self.diagonal.iter().enumerate() {
            x[n][n] = v;
        }
        for (n, &s) in self.second.iter().enumerate() {
            x[n + 2][n] = s;
            x[n][n + 2] = s;
        }
        x
    }

    /// Diagonal of the Raman factor 1 − η̄²(l+l†)².
    pub fn raman_diagonal(&self) -> Vec<f64> {
        self.diagonal.iter().map(|d| 1.0 - self.raman_eta_sq * d).collect()
    }
}
