//! The smooth kernels Γ₁(τ), Γ₂(τ) of the nonlocal operator:
//!
//! ```text
//! Γ₁(τ) = −∫₀^∞ ρ³w_ρ³ [ K(ζ) + 2ζK_ζ(ζ) ρ²/(1+ρ²) − 4 cos w · ζ²K_ζζ(ζ) ]  dρ
//! Γ₂(τ) = −∫₀^∞ ρ³w_ρ³ [ K(ζ) − ζ²K_ζζ(ζ) ]                                 dρ
//! ```
//!
//! with ζ = τ(1+ρ²). Both tend to 1 as τ → 0⁺ (K(0) = ½ against
//! ∫ρ³w_ρ³ = −2) and decay like 1/τ for large τ.
//!
//! Direct evaluation integrates in v = log(1+ρ²); a log-spaced table with
//! monotone cubic interpolation provides the fast path used inside B₀.

use crate::error::Result;
use crate::interp::Pchip;
use crate::quad::adaptive_simpson;

use super::{kernel_big_k, zeta2_k_zetazeta, zeta_k_zeta};

fn integrand_bracket(l: usize, u: f64, zeta: f64) -> f64 {
    // u = 1 + ρ²; ρ²/(1+ρ²) = (u−1)/u and cos w = (u−2)/u.
    match l {
        1 => {
            kernel_big_k(zeta) + 2.0 * zeta_k_zeta(zeta) * (u - 1.0) / u
                - 4.0 * ((u - 2.0) / u) * zeta2_k_zetazeta(zeta)
        }
        2 => kernel_big_k(zeta) - zeta2_k_zetazeta(zeta),
        _ => panic!("Γ index must be 1 or 2"),
    }
}

/// Direct quadrature of Γ_l(τ) to absolute tolerance `tol`.
///
/// Substituting u = 1+ρ² (so ρ³w_ρ³ dρ = −4(u−1)/u³ du) and then v = log u:
/// the integrand becomes 4 e^{-2v}(1−e^{-v}) · bracket(τ e^v), integrated over
/// v ∈ [0, v_max]. The cutoff is tied to τ so the truncated tail, bounded via
/// K(ζ) ~ 2/ζ, stays under tol.
pub fn gamma_direct(l: usize, tau: f64, tol: f64) -> Result<f64> {
    assert!(tau > 0.0, "Γ is defined for τ > 0");
    let u_max = (1e7f64).max(40.0 / (tau * tol.max(1e-12))).min(1e300);
    let v_max = u_max.ln();
    let f = |v: f64| {
        let u = v.exp();
        let zeta = tau * u;
        4.0 * (1.0 - (-v).exp()) / u * integrand_bracket(l, u, zeta) / u
    };
    // split at the K-transition scale ζ ~ 1, i.e. u ~ 1/τ
    let v_break = (1.0 / tau).ln().clamp(0.1, v_max - 0.1);
    let head = adaptive_simpson(&f, 0.0, v_break, 0.25 * tol)?;
    let tail = adaptive_simpson(&f, v_break, v_max, 0.25 * tol)?;
    Ok(head.value + tail.value)
}

/// Fitted constants for the shape bounds |Γ_l − 1| ≤ C τ(1+|log τ|) (τ < 1)
/// and |Γ_l| ≤ C/τ (τ > 1).
#[derive(Debug, Clone, Copy)]
pub struct GammaBoundFit {
    pub c_small: [f64; 2],
    pub c_large: [f64; 2],
}

/// Log-spaced table of Γ₁, Γ₂ with monotone cubic interpolation in log τ.
#[derive(Debug, Clone)]
pub struct GammaTable {
    tau_min: f64,
    tau_max: f64,
    taus: Vec<f64>,
    values: [Vec<f64>; 2],
    interp: [Pchip; 2],
}

impl GammaTable {
    pub const DEFAULT_RANGE: (f64, f64) = (1e-8, 1e4);
    pub const DEFAULT_SIZE: usize = 2048;

    /// Build an `n`-point table over [tau_min, tau_max] by direct quadrature.
    pub fn build(tau_min: f64, tau_max: f64, n: usize, tol: f64) -> Result<Self> {
        assert!(tau_min > 0.0 && tau_max > tau_min && n >= 8);
        let log_min = tau_min.ln();
        let log_max = tau_max.ln();
        let taus: Vec<f64> = (0..n)
            .map(|i| (log_min + (log_max - log_min) * i as f64 / (n - 1) as f64).exp())
            .collect();
        let mut values = [vec![0.0; n], vec![0.0; n]];
        for (i, &tau) in taus.iter().enumerate() {
            values[0][i] = gamma_direct(1, tau, tol)?;
            values[1][i] = gamma_direct(2, tau, tol)?;
        }
        let logs: Vec<f64> = taus.iter().map(|t| t.ln()).collect();
        let interp = [
            Pchip::new(logs.clone(), values[0].clone()),
            Pchip::new(logs, values[1].clone()),
        ];
        Ok(GammaTable {
            tau_min,
            tau_max,
            taus,
            values,
            interp,
        })
    }

    pub fn build_default() -> Result<Self> {
        Self::build(
            Self::DEFAULT_RANGE.0,
            Self::DEFAULT_RANGE.1,
            Self::DEFAULT_SIZE,
            1e-9,
        )
    }

    /// Interpolated Γ_l(τ). Below the table the limit value Γ_l(0⁺) = 1 is
    /// approached (error O(τ log τ)); above it the C/τ decay is continued.
    pub fn eval(&self, l: usize, tau: f64) -> f64 {
        assert!(tau > 0.0);
        let idx = l - 1;
        if tau < self.tau_min {
            return self.values[idx][0];
        }
        if tau > self.tau_max {
            let last = *self.values[idx].last().unwrap();
            return last * self.tau_max / tau;
        }
        self.interp[idx].eval(tau.ln())
    }

    pub fn taus(&self) -> &[f64] {
        &self.taus
    }

    pub fn values(&self, l: usize) -> &[f64] {
        &self.values[l - 1]
    }

    /// Fit the shape-bound constants over the table.
    pub fn fit_bounds(&self) -> GammaBoundFit {
        let mut c_small = [0.0f64; 2];
        let mut c_large = [0.0f64; 2];
        for (i, &tau) in self.taus.iter().enumerate() {
            for l in 0..2 {
                let g = self.values[l][i];
                if tau < 1.0 {
                    let shape = tau * (1.0 + tau.ln().abs());
                    c_small[l] = c_small[l].max((g - 1.0).abs() / shape);
                } else {
                    c_large[l] = c_large[l].max(g.abs() * tau);
                }
            }
        }
        GammaBoundFit { c_small, c_large }
    }
}
