//! Reduced dynamics of the blow-up: the model scale law λ_*, the explicit
//! center trajectory ξ⁰ and its ODE, extraction of the complex datum
//! a₀ = div + i curl from an initial field, and the predicted trajectory
//! p(t) composed from the approximate inverse of the nonlocal operator.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linearized::PlaneField;
use crate::nonlocal::{approx_inverse_p, GammaTable, InverseParams, InverseReport};

/// λ_*(t) = |log T| (T−t) / |log(T−t)|², the model scale law.
pub fn lambda_star(t: f64, big_t: f64) -> Result<f64> {
    if !(big_t > 0.0 && big_t < 1.0) {
        return Err(Error::domain(format!(
            "λ_* requires 0 < T < 1, got T = {big_t}"
        )));
    }
    if t >= big_t {
        return Err(Error::domain(format!(
            "λ_* requires t < T, got t = {t}, T = {big_t}"
        )));
    }
    let l = (big_t - t).ln();
    Ok(big_t.ln().abs() * (big_t - t) / (l * l))
}

/// The explicit center trajectory ξ⁰(t) = (√(r₀² + 2(T−t)), z₀).
pub fn xi0(t: f64, big_t: f64, r0: f64, z0: f64) -> [f64; 2] {
    [(r0 * r0 + 2.0 * (big_t - t)).sqrt(), z0]
}

/// Configuration of a reduced-dynamics run.
#[derive(Debug, Clone)]
pub struct ReducedConfig {
    pub big_t: f64,
    pub r0: f64,
    pub z0: f64,
    /// Inner-region growth exponent β ∈ (0, ½) for R(t) = λ_*^{−β}.
    pub beta: f64,
    /// The complex datum; if absent it is extracted from a field.
    pub a0_star: Option<Complex64>,
}

impl ReducedConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.big_t > 0.0 && self.big_t < 1.0) {
            return Err(Error::domain("T must lie in (0, 1)"));
        }
        if self.r0 <= 0.0 {
            return Err(Error::domain("the blow-up circle needs r₀ > 0"));
        }
        if !(self.beta > 0.0 && self.beta < 0.5) {
            return Err(Error::domain("β must lie in (0, ½)"));
        }
        if let Some(a0) = self.a0_star {
            if a0.norm() < 1e-8 {
                return Err(Error::degenerate("a₀* must be bounded away from 0"));
            }
        }
        Ok(())
    }

    /// R(t) = λ_*(t)^{−β}.
    pub fn inner_radius(&self, t: f64) -> Result<f64> {
        Ok(lambda_star(t, self.big_t)?.powf(-self.beta))
    }
}

/// A sampled center trajectory on [0, T].
#[derive(Debug, Clone)]
pub struct XiTrajectory {
    pub t: Vec<f64>,
    pub xi1: Vec<f64>,
    pub xi2: Vec<f64>,
    pub xi1_dot: Vec<f64>,
    pub xi2_dot: Vec<f64>,
}

impl XiTrajectory {
    pub fn terminal(&self) -> [f64; 2] {
        [*self.xi1.last().unwrap(), *self.xi2.last().unwrap()]
    }
}

/// Integrate the main-order center system ξ̇₁ = −1/ξ₁, ξ̇₂ = 0 backward from
/// ξ(T) = (r₀, z₀) with classical RK4 on `n_steps` uniform steps, sampling
/// forward in time. Steps that would push ξ₁ through 0 are rejected.
pub fn solve_xi(cfg: &ReducedConfig, n_steps: usize) -> Result<XiTrajectory> {
    cfg.validate()?;
    let n = n_steps.max(2);
    let dt = cfg.big_t / n as f64;
    let mut xi1 = vec![0.0; n + 1];
    let mut xi2 = vec![cfg.z0; n + 1];
    let mut t = vec![0.0; n + 1];
    xi1[n] = cfg.r0;
    t[n] = cfg.big_t;
    // integrate backwards: d(ξ₁)/ds = +1/ξ₁ in s = T − t
    let f = |x: f64| 1.0 / x;
    let mut x = cfg.r0;
    for i in (0..n).rev() {
        let k1 = f(x);
        let k2 = f(x + 0.5 * dt * k1);
        let k3 = f(x + 0.5 * dt * k2);
        let k4 = f(x + dt * k3);
        let next = x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if !(next > 0.0) {
            return Err(Error::domain(
                "ξ₁ would cross 0 during backward integration",
            ));
        }
        x = next;
        xi1[i] = x;
        t[i] = i as f64 * dt;
    }
    let xi1_dot = xi1.iter().map(|&v| -1.0 / v).collect();
    let xi2_dot = vec![0.0; n + 1];
    Ok(XiTrajectory {
        t,
        xi1,
        xi2,
        xi1_dot,
        xi2_dot,
    })
}

/// a₀ = div z̃₀ + i curl z̃₀ at q, from analytic partials when the field
/// provides them (the default trait implementation uses centered differences
/// with step 1e−5). Flags |a₀| < 1e−8 as a nondegeneracy violation.
pub fn a0_from_field(field: &dyn PlaneField, q: [f64; 2]) -> Result<Complex64> {
    let [dr, dz] = field.partials(q[0], q[1]);
    let a0 = dr.0 - Complex64::i() * dz.0;
    if a0.norm() < 1e-8 {
        return Err(Error::degenerate(format!(
            "div + i curl = {a0} at the blow-up point is numerically zero"
        )));
    }
    Ok(a0)
}

/// The concrete initial field used for end-to-end runs:
/// z̃₀(r, z) = s·[(r−r₀) + i·½(z−z₀)], third component 0, times a smooth
/// bump supported in the ball of radius `support` around (r₀, z₀).
/// At q it has div = 1.5·s, curl = 0, value 0, and an invertible Jacobian.
#[derive(Debug, Clone, Copy)]
pub struct DefaultInitialField {
    pub q: [f64; 2],
    pub scale: f64,
    pub support: f64,
}

impl DefaultInitialField {
    pub fn new(q: [f64; 2]) -> Self {
        DefaultInitialField {
            q,
            scale: 0.05,
            support: 0.5,
        }
    }

    fn bump(&self, d2: f64) -> f64 {
        // C² bump: (1 − (d/R)²)³ inside, 0 outside.
        let x = d2 / (self.support * self.support);
        if x >= 1.0 {
            0.0
        } else {
            (1.0 - x).powi(3)
        }
    }

    fn bump_grad_factor(&self, d2: f64) -> f64 {
        // d/d(d²) of the bump
        let r2 = self.support * self.support;
        let x = d2 / r2;
        if x >= 1.0 {
            0.0
        } else {
            -3.0 * (1.0 - x).powi(2) / r2
        }
    }
}

impl PlaneField for DefaultInitialField {
    fn value(&self, r: f64, z: f64) -> (Complex64, f64) {
        let (a, b) = (r - self.q[0], z - self.q[1]);
        let core = Complex64::new(a, 0.5 * b);
        (self.scale * core * self.bump(a * a + b * b), 0.0)
    }

    fn partials(&self, r: f64, z: f64) -> [(Complex64, f64); 2] {
        let (a, b) = (r - self.q[0], z - self.q[1]);
        let d2 = a * a + b * b;
        let eta = self.bump(d2);
        let deta = self.bump_grad_factor(d2);
        let core = Complex64::new(a, 0.5 * b);
        let dr = self.scale * (Complex64::new(1.0, 0.0) * eta + core * deta * 2.0 * a);
        let dz = self.scale * (Complex64::new(0.0, 0.5) * eta + core * deta * 2.0 * b);
        [(dr, 0.0), (dz, 0.0)]
    }
}

/// Predicted trajectory report.
#[derive(Debug, Clone)]
pub struct PredictedP {
    pub a0: Complex64,
    pub inverse: InverseReport,
    /// Per-sample (t, |p(t)|/λ_*(t)).
    pub ratio: Vec<(f64, f64)>,
    /// Least-squares coefficient ĉ in p(t) ≈ ĉ ·|log T|(T−t)/log²(T−t).
    pub model_coeff: Complex64,
    /// ĉ/a₀ — carries the sign convention relating the rate law to the
    /// datum; both signs are reported by the callers.
    pub ratio_to_a0: Complex64,
}

/// Compose the datum (given or extracted from a field), the approximate
/// inverse with constant datum a ≡ a₀*, and the rate diagnostics.
pub fn predicted_p(
    cfg: &ReducedConfig,
    field: Option<&dyn PlaneField>,
    params: &InverseParams,
    table: &GammaTable,
) -> Result<PredictedP> {
    cfg.validate()?;
    let a0 = match (cfg.a0_star, field) {
        (Some(a0), _) => a0,
        (None, Some(f)) => a0_from_field(f, [cfg.r0, cfg.z0])?,
        (None, None) => {
            return Err(Error::domain(
                "predicted_p needs either a₀* or an initial field",
            ))
        }
    };
    if a0.norm() < 1e-8 {
        return Err(Error::degenerate("a₀* must be nonzero"));
    }
    let inverse = approx_inverse_p(&|_| a0, cfg.big_t, params, table)?;

    let mut ratio = Vec::new();
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    let n = 129;
    for i in 0..n {
        let t = cfg.big_t * (i as f64 + 0.5) / (n as f64 + 1.0);
        let lam_star = lambda_star(t, cfg.big_t)?;
        let p = inverse.p.eval_p(t);
        ratio.push((t, p.norm() / lam_star));
        // least squares of p against the λ_*-shaped model
        num += p * lam_star;
        den += lam_star * lam_star;
    }
    let model_coeff = num / den;
    Ok(PredictedP {
        a0,
        inverse,
        ratio,
        model_coeff,
        ratio_to_a0: model_coeff / a0,
    })
}
