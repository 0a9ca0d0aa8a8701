//! Sampled modulation trajectories p(t) = λ(t) e^{iω(t)} on [−T, t_end],
//! and the explicit leading-order family p_{0,κ}.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;

/// ∫_t^T ds/log²(T−s), evaluated through m = log(T−s) as ∫ e^m/m² dm.
fn log_square_tail_integral(t: f64, big_t: f64) -> f64 {
    let m_hi = (big_t - t).ln();
    debug_assert!(m_hi < 0.0, "requires T − t < 1");
    let m_lo = m_hi - 50.0;
    adaptive_simpson(&|m: f64| m.exp() / (m * m), m_lo, m_hi, 1e-14)
        .map(|r| r.value)
        .unwrap_or(0.0)
}

/// p_{0,κ}(t) = κ |log T| ∫_t^T ds/|log(T−s)|²; satisfies p_{0,κ}(T) = 0
/// exactly.
pub fn p0_kappa(kappa: Complex64, big_t: f64, t: f64) -> Complex64 {
    assert!(big_t > 0.0 && big_t < 1.0);
    if t >= big_t {
        return Complex64::new(0.0, 0.0);
    }
    kappa * big_t.ln().abs() * log_square_tail_integral(t, big_t)
}

/// ṗ_{0,κ}(t) = −κ |log T| / log²(T−t).
pub fn p0_kappa_deriv(kappa: Complex64, big_t: f64, t: f64) -> Complex64 {
    let l = (big_t - t).ln();
    -kappa * big_t.ln().abs() / (l * l)
}

/// A modulation trajectory sampled on a strictly increasing time grid over
/// [−T, t_end], carrying both p and ṗ. λ = |p|, ω = arg p; λ̇ comes from a
/// centered 5-point stencil on the |p| samples (generalized to non-uniform
/// grids through the Lagrange derivative).
#[derive(Debug, Clone)]
pub struct PHistory {
    pub big_t: f64,
    ts: Vec<f64>,
    p: Vec<Complex64>,
    pdot: Vec<Complex64>,
    lam: Vec<f64>,
}

impl PHistory {
    /// Build from explicit samples. The grid must be strictly increasing and
    /// start at −T.
    pub fn from_samples(
        big_t: f64,
        ts: Vec<f64>,
        p: Vec<Complex64>,
        pdot: Vec<Complex64>,
    ) -> Result<Self> {
        if ts.len() < 5 || ts.len() != p.len() || ts.len() != pdot.len() {
            return Err(Error::domain("trajectory needs ≥ 5 consistent samples"));
        }
        if !ts.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::domain("trajectory time grid must be strictly increasing"));
        }
        if (ts[0] + big_t).abs() > 1e-12 * big_t.max(1.0) {
            return Err(Error::domain("trajectory must start at −T"));
        }
        let lam = p.iter().map(|c| c.norm()).collect();
        Ok(PHistory {
            big_t,
            ts,
            p,
            pdot,
            lam,
        })
    }

    /// Build from a ṗ function on a given grid, integrating backward from the
    /// terminal condition p(t_end) = `p_end` with the trapezoid rule.
    pub fn from_pdot_fn(
        big_t: f64,
        ts: Vec<f64>,
        p_end: Complex64,
        pdot_fn: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        let n = ts.len();
        let pdot: Vec<Complex64> = ts.iter().map(|&t| pdot_fn(t)).collect();
        let mut p = vec![Complex64::new(0.0, 0.0); n];
        p[n - 1] = p_end;
        for i in (0..n - 1).rev() {
            let dt = ts[i + 1] - ts[i];
            p[i] = p[i + 1] - 0.5 * dt * (pdot[i] + pdot[i + 1]);
        }
        Self::from_samples(big_t, ts, p, pdot)
    }

    /// The p_{0,κ} trajectory on a grid geometrically clustered toward T,
    /// with exact p and ṗ values. Terminal time is T − `t_gap`.
    pub fn p0_kappa_trajectory(
        kappa: Complex64,
        big_t: f64,
        n: usize,
        t_gap: f64,
    ) -> Result<Self> {
        let ts = clustered_grid(big_t, n, t_gap);
        let p = ts.iter().map(|&t| p0_kappa(kappa, big_t, t)).collect();
        let pdot = ts
            .iter()
            .map(|&t| p0_kappa_deriv(kappa, big_t, t))
            .collect();
        Self::from_samples(big_t, ts, p, pdot)
    }

    pub fn t_start(&self) -> f64 {
        self.ts[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    pub fn times(&self) -> &[f64] {
        &self.ts
    }

    pub fn check_covers(&self, t: f64) -> Result<()> {
        if t < self.t_start() - 1e-14 || t > self.t_end() + 1e-14 {
            return Err(Error::domain(format!(
                "trajectory covers [{:.6e}, {:.6e}] but {t:.6e} was requested",
                self.t_start(),
                self.t_end()
            )));
        }
        Ok(())
    }

    fn bracket(&self, t: f64) -> usize {
        match self
            .ts
            .binary_search_by(|v| v.partial_cmp(&t).expect("NaN time"))
        {
            Ok(i) => i.min(self.ts.len() - 2),
            Err(i) => i.clamp(1, self.ts.len() - 1) - 1,
        }
    }

    pub fn eval_p(&self, t: f64) -> Complex64 {
        let i = self.bracket(t);
        let s = (t - self.ts[i]) / (self.ts[i + 1] - self.ts[i]);
        self.p[i] * (1.0 - s) + self.p[i + 1] * s
    }

    pub fn eval_pdot(&self, t: f64) -> Complex64 {
        let i = self.bracket(t);
        let s = (t - self.ts[i]) / (self.ts[i + 1] - self.ts[i]);
        self.pdot[i] * (1.0 - s) + self.pdot[i + 1] * s
    }

    pub fn lambda(&self, t: f64) -> f64 {
        self.eval_p(t).norm()
    }

    pub fn omega(&self, t: f64) -> f64 {
        self.eval_p(t).arg()
    }

    /// λ̇(t) from the five |p| samples nearest t (Lagrange quartic derivative;
    /// reduces to the classical centered 5-point stencil on uniform grids).
    pub fn lambda_dot(&self, t: f64) -> f64 {
        let n = self.ts.len();
        let c = self.bracket(t);
        let lo = c.saturating_sub(2).min(n - 5);
        let xs = &self.ts[lo..lo + 5];
        let ys = &self.lam[lo..lo + 5];
        lagrange_derivative(xs, ys, t)
    }

    pub fn max_pdot(&self) -> f64 {
        self.pdot.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Grid on [−T, T − gap] uniform in the first half and geometrically
/// clustered toward T in the second.
pub fn clustered_grid(big_t: f64, n: usize, t_gap: f64) -> Vec<f64> {
    assert!(n >= 16 && t_gap > 0.0 && t_gap < big_t);
    let n_uniform = n / 2;
    let mut ts = Vec::with_capacity(n);
    for i in 0..n_uniform {
        ts.push(-big_t + (big_t) * i as f64 / n_uniform as f64);
    }
    // from 0 to T − gap: T − t decreases geometrically from T to gap
    let n_geo = n - n_uniform;
    let ratio = (t_gap / big_t).powf(1.0 / (n_geo - 1) as f64);
    let mut gap = big_t;
    for _ in 0..n_geo {
        ts.push(big_t - gap);
        gap *= ratio;
    }
    ts.dedup_by(|a, b| (*a - *b).abs() < f64::EPSILON);
    ts
}

/// Derivative at `x` of the polynomial interpolating (xs, ys).
fn lagrange_derivative(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let mut acc = 0.0;
    for j in 0..n {
        // d/dx Π_{m≠j} (x − x_m)/(x_j − x_m)
        let mut denom = 1.0;
        for m in 0..n {
            if m != j {
                denom *= xs[j] - xs[m];
            }
        }
        let mut dnum = 0.0;
        for k in 0..n {
            if k == j {
                continue;
            }
            let mut prod = 1.0;
            for m in 0..n {
                if m != j && m != k {
                    prod *= x - xs[m];
                }
            }
            dnum += prod;
        }
        acc += ys[j] * dnum / denom;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn p0_terminal_condition_is_exact() {
        let k = Complex64::new(0.7, -0.2);
        let t_big = 1e-3;
        assert_eq!(p0_kappa(k, t_big, t_big), Complex64::new(0.0, 0.0));
        // p(0) > 0 in magnitude and shrinks toward T
        let p0 = p0_kappa(k, t_big, 0.0).norm();
        let p_half = p0_kappa(k, t_big, t_big / 2.0).norm();
        assert!(p0 > p_half && p_half > 0.0);
    }

    #[test]
    fn p0_matches_lambda_star_shape() {
        // p_{0,κ}(t) ≈ κ λ_*(t) (1 + O(1/|log(T−t)|))
        let t_big = 1e-3;
        let k = Complex64::new(1.0, 0.0);
        for &t in &[0.0, 2.5e-4, 5e-4, 9e-4] {
            let lam_star = t_big.ln().abs() * (t_big - t) / (t_big - t).ln().powi(2);
            let ratio = p0_kappa(k, t_big, t).norm() / lam_star;
            assert!(
                (ratio - 1.0).abs() < 2.5 / (t_big - t).ln().abs(),
                "ratio {ratio} at t = {t}"
            );
        }
    }

    #[test]
    fn stencil_derivative_matches_analytic() {
        let t_big = 1e-3;
        let k = Complex64::new(0.4, 0.9);
        let hist = PHistory::p0_kappa_trajectory(k, t_big, 257, 1e-9).unwrap();
        for &t in &[0.0, 1e-4, 4e-4, 7.9e-4] {
            // λ̇ = Re(ṗ e^{−iω}) for a differentiable trajectory
            let p = p0_kappa(k, t_big, t);
            let pdot = p0_kappa_deriv(k, t_big, t);
            let analytic = (pdot * p.conj()).re / p.norm();
            let stencil = hist.lambda_dot(t);
            assert_abs_diff_eq!(stencil, analytic, epsilon = 1e-3 * analytic.abs().max(1.0));
        }
    }

    #[test]
    fn trapezoid_integration_reproduces_linear_p() {
        let t_big = 0.5;
        let ts: Vec<f64> = (0..64).map(|i| -t_big + i as f64 * t_big / 32.0).collect();
        let c = Complex64::new(0.3, -0.1);
        let hist =
            PHistory::from_pdot_fn(t_big, ts, Complex64::new(0.0, 0.0), |_| c).unwrap();
        // p(t) = c (t − t_end)
        let t_end = hist.t_end();
        for &t in &[-0.4, -0.1, 0.2] {
            let expect = c * (t - t_end);
            let got = hist.eval_p(t);
            assert_abs_diff_eq!((got - expect).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn coverage_errors() {
        let hist = PHistory::p0_kappa_trajectory(Complex64::new(1.0, 0.0), 1e-3, 64, 1e-8)
            .unwrap();
        assert!(hist.check_covers(0.0).is_ok());
        assert!(hist.check_covers(-2e-3).is_err());
        assert!(hist.check_covers(2e-3).is_err());
    }
}
