//! The Duhamel correction profile φ⁰, the nonlocal operator B₀ acting on a
//! modulation trajectory, and the S_α/R_α splitting of the singular
//! history integral.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::modulation::lambda_star;
use crate::quad::adaptive_simpson;

use super::gamma::GammaTable;
use super::history::PHistory;
use super::kernel_k;

/// φ⁰(s, t) = −∫_{−T}^t ṗ(τ) · s · k(z(s), t−τ) dτ with z(s) = √(s²+λ²).
///
/// The integrand is regular up to τ = t (k(z, 0⁺) = 2/z²); the quadrature
/// refines the last panel where k transitions on the scale t−τ ~ z².
pub fn phi0(s: f64, t: f64, hist: &PHistory, lambda: f64, tol: f64) -> Result<Complex64> {
    if s < 0.0 {
        return Err(Error::domain(format!("φ⁰ requires s ≥ 0, got {s}")));
    }
    hist.check_covers(t)?;
    if s == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let z2 = s * s + lambda * lambda;
    let kernel = move |tau: f64| kernel_k(z2.sqrt(), t - tau).unwrap_or(0.0);
    let re = |tau: f64| hist.eval_pdot(tau).re * s * kernel(tau);
    let im = |tau: f64| hist.eval_pdot(tau).im * s * kernel(tau);
    // split at the kernel transition time
    let t0 = hist.t_start();
    let split = (t - z2).max(t0);
    let mut acc = Complex64::new(0.0, 0.0);
    if split > t0 {
        acc += Complex64::new(
            adaptive_simpson(&re, t0, split, 0.5 * tol)?.value,
            adaptive_simpson(&im, t0, split, 0.5 * tol)?.value,
        );
    }
    acc += Complex64::new(
        adaptive_simpson(&re, split, t, 0.5 * tol)?.value,
        adaptive_simpson(&im, split, t, 0.5 * tol)?.value,
    );
    Ok(-acc)
}

/// The plane vector field Φ⁰ = (φ⁰(s, t) e^{iθ}, 0) around the center ξ;
/// returns the complex pair and the (zero) third component at (r, z).
pub fn phi0_plane_value(
    hist: &PHistory,
    t: f64,
    xi: [f64; 2],
    lambda: f64,
    r: f64,
    z: f64,
    tol: f64,
) -> Result<(Complex64, f64)> {
    let (a, b) = (r - xi[0], z - xi[1]);
    let s = a.hypot(b);
    let phase = if s == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(a / s, b / s)
    };
    Ok((phi0(s, t, hist, lambda, tol)? * phase, 0.0))
}

/// Quadrature controls for B₀.
#[derive(Debug, Clone, Copy)]
pub struct B0Options {
    /// Panels of the graded mesh in t−τ.
    pub panels: usize,
    /// Grading exponent toward τ = t.
    pub grading: f64,
}

impl Default for B0Options {
    fn default() -> Self {
        B0Options {
            panels: 384,
            grading: 2.0,
        }
    }
}

/// The two real components entering B₀ and the assembled complex value.
#[derive(Debug, Clone, Copy)]
pub struct B0Parts {
    pub b01: f64,
    pub b02: f64,
    pub value: Complex64,
}

/// B₀[p](t) = ½ e^{iω(t)} (B₀₁ + i B₀₂) with
///
/// ```text
/// B₀₁ = ∫_{−T}^t Re(ṗ(τ) e^{−iω(t)}) Γ₁(λ(t)²/(t−τ)) dτ/(t−τ) − 2 λ̇(t)
/// B₀₂ = ∫_{−T}^t Im(ṗ(τ) e^{−iω(t)}) Γ₂(λ(t)²/(t−τ)) dτ/(t−τ)
/// ```
///
/// The apparent singularity at τ → t is integrable because
/// Γ_l(λ²/(t−τ)) → 0 linearly in (t−τ); the quadrature uses a mesh in
/// s = t−τ graded toward s = 0 with two-point Gauss panels, so the
/// endpoint itself is never evaluated.
pub fn b0_with_parts(
    hist: &PHistory,
    t: f64,
    table: &GammaTable,
    opts: &B0Options,
) -> Result<B0Parts> {
    hist.check_covers(t)?;
    let lambda = hist.lambda(t);
    if lambda <= 0.0 {
        return Err(Error::degenerate(
            "B₀ requires λ(t) > 0 along the trajectory",
        ));
    }
    let omega = hist.omega(t);
    let rot = Complex64::from_polar(1.0, -omega);
    let lam2 = lambda * lambda;

    let s_max = t - hist.t_start();
    let n = opts.panels;
    // Gauss points of order 2 on [-1, 1]
    const GPT: f64 = 0.577_350_269_189_625_8;
    let mut int1 = 0.0;
    let mut int2 = 0.0;
    let mut prev = 0.0;
    for j in 1..=n {
        let edge = s_max * ((j as f64) / n as f64).powf(opts.grading);
        let c = 0.5 * (prev + edge);
        let hw = 0.5 * (edge - prev);
        for &g in &[-GPT, GPT] {
            let s = c + hw * g;
            let pd = hist.eval_pdot(t - s) * rot;
            let arg = lam2 / s;
            int1 += hw * pd.re * table.eval(1, arg) / s;
            int2 += hw * pd.im * table.eval(2, arg) / s;
        }
        prev = edge;
    }
    let b01 = int1 - 2.0 * hist.lambda_dot(t);
    let b02 = int2;
    let value = 0.5 * Complex64::from_polar(1.0, omega) * Complex64::new(b01, b02);
    Ok(B0Parts { b01, b02, value })
}

pub fn b0(hist: &PHistory, t: f64, table: &GammaTable, opts: &B0Options) -> Result<Complex64> {
    Ok(b0_with_parts(hist, t, table, opts)?.value)
}

/// S_α and R_α splitting of the truncated history integral:
///
/// ```text
/// S_α[g](t) = g(t) [ −2 log λ_*(t) + (1+α) log(T−t) ]
///           + ∫_{−T}^{t−(T−t)^{1+α}} g(s)/(t−s) ds
/// R_α[g](t) = −∫_{t−(T−t)^{1+α}}^{t−λ_*²} (g(t) − g(s))/(t−s) ds
/// ```
///
/// Their sum reproduces ∫_{−T}^{t−λ_*(t)²} g(s)/(t−s) ds exactly, which the
/// tests check against independent quadrature. R_α is zero when the window
/// is empty ((T−t)^{1+α} ≤ λ_*²).
pub fn split_s_r(
    g: &dyn Fn(f64) -> Complex64,
    t: f64,
    big_t: f64,
    alpha: f64,
    tol: f64,
) -> Result<(Complex64, Complex64)> {
    if !(0.0 < alpha && alpha < 0.5) {
        return Err(Error::domain(format!("α must lie in (0, ½), got {alpha}")));
    }
    if t >= big_t {
        return Err(Error::domain("S_α/R_α need t < T"));
    }
    let lam_star = lambda_star(t, big_t)?;
    let eps_outer = (big_t - t).powf(1.0 + alpha);
    let eps_inner = lam_star * lam_star;
    let gt = g(t);

    let s_value = {
        let coeff = -2.0 * lam_star.ln() + (1.0 + alpha) * (big_t - t).ln();
        let upper = t - eps_outer;
        let integral = integrate_history(g, -big_t, upper, t, tol)?;
        gt * coeff + integral
    };

    let r_value = if eps_outer <= eps_inner {
        Complex64::new(0.0, 0.0)
    } else {
        let f = |s: f64| (gt - g(s)) / (t - s);
        let lo = t - eps_outer;
        let hi = t - eps_inner;
        -complex_simpson(&f, lo, hi, tol)?
    };
    Ok((s_value, r_value))
}

/// ∫_a^b g(s)/(t−s) ds through the substitution v = log(t−s), which removes
/// the near-singular scale at s → t.
pub fn integrate_history(
    g: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    t: f64,
    tol: f64,
) -> Result<Complex64> {
    assert!(b <= t && a < b);
    let v_lo = (t - b).ln();
    let v_hi = (t - a).ln();
    complex_simpson(&|v: f64| g(t - v.exp()), v_lo, v_hi, tol)
}

fn complex_simpson(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<Complex64> {
    let re = adaptive_simpson(&|x| f(x).re, a, b, tol)?;
    let im = adaptive_simpson(&|x| f(x).im, a, b, tol)?;
    Ok(Complex64::new(re.value, im.value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlocal::history::clustered_grid;
    use approx::assert_abs_diff_eq;

    fn quiet_history(big_t: f64) -> PHistory {
        let ts = clustered_grid(big_t, 64, 1e-6 * big_t);
        let p0 = Complex64::new(0.04, 0.0);
        PHistory::from_pdot_fn(big_t, ts, p0, |_| Complex64::new(0.0, 0.0)).unwrap()
    }

    #[test]
    fn phi0_vanishes_for_static_p_and_at_axis() {
        let big_t = 1e-2;
        let hist = quiet_history(big_t);
        let v = phi0(0.3, 0.0, &hist, 0.04, 1e-10).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
        let hist2 = PHistory::p0_kappa_trajectory(Complex64::new(1.0, 0.0), 1e-3, 128, 1e-9)
            .unwrap();
        let v0 = phi0(0.0, 5e-4, &hist2, hist2.lambda(5e-4), 1e-10).unwrap();
        assert_eq!(v0, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn phi0_matches_midpoint_oracle_for_constant_pdot() {
        // ṗ ≡ c on a short window: φ⁰ = −c s ∫ k dτ, checked against a fine
        // midpoint rule evaluated independently.
        let big_t = 1e-2;
        let ts: Vec<f64> = (0..=256)
            .map(|i| -big_t + i as f64 * 2.0 * big_t / 256.0)
            .collect();
        let c = Complex64::new(0.7, -0.4);
        let hist = PHistory::from_pdot_fn(big_t, ts, Complex64::new(0.0, 0.0), |_| c).unwrap();
        let (s, t, lambda) = (0.15, 3e-3, 0.02);
        let z2: f64 = s * s + lambda * lambda;

        let n = 400_000;
        let dt = (t + big_t) / n as f64;
        let mut oracle = 0.0;
        for i in 0..n {
            let tau = -big_t + (i as f64 + 0.5) * dt;
            oracle += kernel_k(z2.sqrt(), t - tau).unwrap() * dt;
        }
        let expect = -c * s * oracle;
        let got = phi0(s, t, &hist, lambda, 1e-9).unwrap();
        assert!((got - expect).norm() < 1e-6, "got {got}, expect {expect}");
    }

    #[test]
    fn b0_zero_for_static_trajectory() {
        let big_t = 1e-2;
        let hist = quiet_history(big_t);
        let table = GammaTable::build(1e-6, 1e3, 128, 1e-8).unwrap();
        let v = b0(&hist, 2e-3, &table, &B0Options::default()).unwrap();
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn split_identity_and_closed_forms() {
        let big_t = 1e-2;
        let alpha = 0.25;
        let t = 4e-3;
        // g ≡ const ⇒ R_α = 0
        let gc = |_: f64| Complex64::new(0.9, 0.3);
        let (_s, r) = split_s_r(&gc, t, big_t, alpha, 1e-11).unwrap();
        assert!(r.norm() < 1e-11);

        // g(s) = T − s ⇒ R_α = (T−t)^{1+α} − λ_*² in closed form
        let gl = |s: f64| Complex64::new(big_t - s, 0.0);
        let (s_part, r_part) = split_s_r(&gl, t, big_t, alpha, 1e-11).unwrap();
        let lam2 = lambda_star(t, big_t).unwrap().powi(2);
        let expect_r = (big_t - t).powf(1.0 + alpha) - lam2;
        assert_abs_diff_eq!(r_part.re, expect_r, epsilon = 1e-8);
        assert!(r_part.im.abs() < 1e-12);

        // S_α + R_α equals the truncated integral evaluated independently
        let direct = integrate_history(&gl, -big_t, t - lam2, t, 1e-12).unwrap();
        let coeff_check = s_part + r_part;
        assert!((coeff_check - direct).norm() < 1e-8);
    }

    #[test]
    fn split_window_empties_near_terminal_time() {
        // For α → 0 and t → T the window (T−t)^{1+α} ≤ λ_*² can close; the
        // splitting then returns R_α = 0.
        let big_t = 1e-2;
        let t = big_t - 1e-9;
        let g = |s: f64| Complex64::new(s, 0.0);
        // with α close to 0 the window is tiny; the call must not panic
        let (_s, r) = split_s_r(&g, t, big_t, 0.01, 1e-9).unwrap();
        assert!(r.is_finite());
    }
}
