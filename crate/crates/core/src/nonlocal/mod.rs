//! The nonlocal machinery of the modulation equation: the heat-kernel
//! profile k and its dimensionless form K, the smooth kernels Γ₁, Γ₂ with a
//! tabulated fast path, the Duhamel correction φ⁰, the nonlocal operator B₀,
//! the S_α/R_α splitting of the singular integral, and an approximate
//! inverse producing the trajectory p(t) = λ(t) e^{iω(t)}.

mod b0;
mod gamma;
mod history;
mod inverse;

pub use b0::{b0, b0_with_parts, split_s_r, B0Options, B0Parts};
pub use gamma::{gamma_direct, GammaBoundFit, GammaTable};
pub use history::{p0_kappa, p0_kappa_deriv, PHistory};
pub use inverse::{approx_inverse_p, InverseParams, InverseReport, IterationRecord};

use crate::error::{Error, Result};

/// K(ζ) = 2 (1 − e^{−ζ/4})/ζ, continued by its limit value ½ at ζ = 0.
/// Monotone decreasing, K(ζ) ~ 2/ζ as ζ → ∞.
pub fn kernel_big_k(zeta: f64) -> f64 {
    debug_assert!(zeta >= 0.0);
    if zeta == 0.0 {
        return 0.5;
    }
    if zeta < 1e-4 {
        // series: 1/2 − ζ/16 + ζ²/192
        return 0.5 - zeta / 16.0 + zeta * zeta / 192.0;
    }
    -2.0 * f64::exp_m1(-0.25 * zeta) / zeta
}

/// ζ K_ζ(ζ) = e^{−ζ/4}/2 − K(ζ).
pub fn zeta_k_zeta(zeta: f64) -> f64 {
    0.5 * (-0.25 * zeta).exp() - kernel_big_k(zeta)
}

/// ζ² K_ζζ(ζ) = 2K(ζ) − e^{−ζ/4} − (ζ/8) e^{−ζ/4}.
pub fn zeta2_k_zetazeta(zeta: f64) -> f64 {
    let e = (-0.25 * zeta).exp();
    2.0 * kernel_big_k(zeta) - e - 0.125 * zeta * e
}

/// k(z, t) = 2 (1 − e^{−z²/4t})/z² = K(z²/t)/t for t > 0; at z → 0 the
/// series limit 1/(2t).
pub fn kernel_k(z: f64, t: f64) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::domain(format!("heat kernel requires t > 0, got {t}")));
    }
    Ok(kernel_big_k(z * z / t) / t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn k_limits() {
        // z → 0 at t = 1 gives 1/2
        assert_abs_diff_eq!(kernel_k(0.0, 1.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(kernel_k(1e-9, 1.0).unwrap(), 0.5, epsilon = 1e-12);
        // large z: k ≈ 2/z² with relative error ≤ 1e−6 once z²/4t ≥ 40
        let z = (160.0f64).sqrt();
        let k = kernel_k(z, 1.0).unwrap();
        assert!((k - 2.0 / (z * z)).abs() / (2.0 / (z * z)) < 1e-6);
        assert!(kernel_k(1.0, 0.0).is_err());
        assert!(kernel_k(1.0, -1.0).is_err());
    }

    #[test]
    fn big_k_limit_and_monotonicity() {
        assert_abs_diff_eq!(kernel_big_k(0.0), 0.5, epsilon = 1e-16);
        assert_abs_diff_eq!(kernel_big_k(1e-9), 0.5, epsilon = 1e-10);
        let mut prev = kernel_big_k(0.0);
        for i in 1..2000 {
            let zeta = i as f64 * 0.05;
            let v = kernel_big_k(zeta);
            assert!(v < prev, "K must decrease");
            assert!(v > 0.0);
            prev = v;
        }
    }

    #[test]
    fn kz_bounds() {
        // k(z,t)·z² = 2(1 − e^{−z²/4t}) ∈ [0, 2]
        for &z in &[1e-6, 0.1, 1.0, 30.0] {
            for &t in &[1e-6, 1.0, 50.0] {
                let v = kernel_k(z, t).unwrap() * z * z;
                assert!((0.0..=2.0).contains(&v));
            }
        }
    }

    #[test]
    fn derivative_identities_match_finite_differences() {
        for &zeta in &[0.03, 0.7, 3.0, 25.0] {
            let h = 1e-6 * zeta.max(1.0);
            let dk = (kernel_big_k(zeta + h) - kernel_big_k(zeta - h)) / (2.0 * h);
            assert_abs_diff_eq!(zeta * dk, zeta_k_zeta(zeta), epsilon = 1e-7);
            let d2k = (kernel_big_k(zeta + h) - 2.0 * kernel_big_k(zeta) + kernel_big_k(zeta - h))
                / (h * h);
            assert_abs_diff_eq!(zeta * zeta * d2k, zeta2_k_zetazeta(zeta), epsilon = 1e-4);
        }
    }
}
