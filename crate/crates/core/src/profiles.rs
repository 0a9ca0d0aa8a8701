//! The degree-1 bubble and everything derived from it in closed form:
//! the profile w(ρ) = π − 2 arctan ρ, the harmonic map W, the tangent frame
//! {E₁, E₂}, the six kernel elements Z_lj of the linearized operator, and
//! the moment integrals the reduced equations rest on.
//!
//! In polar coordinates y = ρ e^{iθ},
//!
//! ```text
//! W(y)  = (e^{iθ} sin w, cos w),      w_ρ = −2/(1+ρ²),
//! E₁(y) = (e^{iθ} cos w, −sin w),     E₂(y) = (i e^{iθ}, 0),
//! ```
//!
//! and sin w = −ρ w_ρ, cos w = (ρ²−1)/(1+ρ²).

use crate::error::{Error, Result};
use crate::geom::{vec3, PlanePoint, UnitVector3};
use crate::quad::adaptive_simpson;

/// w(ρ) = π − 2 arctan ρ for ρ ≥ 0.
pub fn w(rho: f64) -> Result<f64> {
    if rho < 0.0 {
        return Err(Error::domain(format!("w requires ρ ≥ 0, got {rho}")));
    }
    Ok(std::f64::consts::PI - 2.0 * rho.atan())
}

/// w_ρ(ρ) = −2/(1+ρ²).
pub fn w_rho(rho: f64) -> f64 {
    -2.0 / (1.0 + rho * rho)
}

/// sin w(ρ) = 2ρ/(1+ρ²) = −ρ w_ρ.
pub fn sin_w(rho: f64) -> f64 {
    2.0 * rho / (1.0 + rho * rho)
}

/// cos w(ρ) = (ρ²−1)/(1+ρ²).
pub fn cos_w(rho: f64) -> f64 {
    (rho * rho - 1.0) / (1.0 + rho * rho)
}

/// |∇W|²(y) = w_ρ² + sin²w/ρ² = 2 w_ρ² = 8/(1+ρ²)².
pub fn grad_w_sq(rho: f64) -> f64 {
    let d = 1.0 + rho * rho;
    8.0 / (d * d)
}

/// The canonical 1-corotational harmonic map W(y) = (2y, |y|²−1)/(1+|y|²).
pub fn bubble(y: PlanePoint) -> UnitVector3 {
    let r2 = y.rho_sq();
    let d = 1.0 + r2;
    UnitVector3::from_unit([2.0 * y.y1 / d, 2.0 * y.y2 / d, (r2 - 1.0) / d])
}

/// Analytic partial derivatives ∂₁W, ∂₂W.
pub fn bubble_grad(y: PlanePoint) -> [[f64; 3]; 2] {
    let d = 1.0 + y.rho_sq();
    let d2 = d * d;
    let (a, b) = (y.y1, y.y2);
    [
        [
            2.0 / d - 4.0 * a * a / d2,
            -4.0 * a * b / d2,
            4.0 * a / d2,
        ],
        [
            -4.0 * a * b / d2,
            2.0 / d - 4.0 * b * b / d2,
            4.0 * b / d2,
        ],
    ]
}

/// Frame vector E_j(y) of the tangent space T_{W(y)}S², j ∈ {1, 2}.
pub fn frame(j: usize, y: PlanePoint) -> UnitVector3 {
    let theta = y.theta();
    let (st, ct) = theta.sin_cos();
    let rho = y.rho();
    match j {
        1 => {
            let cw = cos_w(rho);
            UnitVector3::from_unit([ct * cw, st * cw, -sin_w(rho)])
        }
        2 => UnitVector3::from_unit([-st, ct, 0.0]),
        _ => panic!("frame index must be 1 or 2"),
    }
}

/// Kernel element Z_lj(y) of L_W, l ∈ {−1, 0, 1}, j ∈ {1, 2}:
///
/// ```text
/// Z_{0j}  = ρ w_ρ E_j
/// Z_{11}  = w_ρ (cos θ E₁ + sin θ E₂),     Z_{12}  = w_ρ (sin θ E₁ − cos θ E₂)
/// Z_{-11} = ρ² w_ρ (cos θ E₁ − sin θ E₂),  Z_{-12} = ρ² w_ρ (sin θ E₁ + cos θ E₂)
/// ```
///
/// The value at y = 0 is the radial limit along θ = 0.
pub fn kernel_z(l: i32, j: usize, y: PlanePoint) -> [f64; 3] {
    let rho = y.rho();
    let theta = y.theta();
    let (st, ct) = theta.sin_cos();
    let wr = w_rho(rho);
    let e1 = frame(1, y).as_array();
    let e2 = frame(2, y).as_array();
    let comb = |a: f64, b: f64, scale: f64| {
        vec3::add(vec3::scale(scale * a, e1), vec3::scale(scale * b, e2))
    };
    match (l, j) {
        (0, 1) => vec3::scale(rho * wr, e1),
        (0, 2) => vec3::scale(rho * wr, e2),
        (1, 1) => comb(ct, st, wr),
        (1, 2) => comb(st, -ct, wr),
        (-1, 1) => comb(ct, -st, rho * rho * wr),
        (-1, 2) => comb(st, ct, rho * rho * wr),
        _ => panic!("kernel index out of range: l ∈ {{-1,0,1}}, j ∈ {{1,2}}"),
    }
}

/// All six (l, j) kernel index pairs.
pub const KERNEL_INDICES: [(i32, usize); 6] =
    [(0, 1), (0, 2), (1, 1), (1, 2), (-1, 1), (-1, 2)];

/// The moment integrals over ρ ∈ [0, ∞) appearing in the reduced equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentKind {
    /// ∫ ρ³ w_ρ³ dρ = −2
    Rho3Wrho3,
    /// ∫ ρ w_ρ² dρ = 2
    RhoWrho2,
    /// ∫ ρ w_ρ² cos w dρ = 0
    RhoWrho2Cosw,
    /// Dirichlet energy E(W) = ½ ∫_{ℝ²} |∇W|² = 4π
    DirichletEnergy,
}

/// Closed values from the antiderivatives under u = 1+ρ².
pub fn moment_exact(kind: MomentKind) -> f64 {
    match kind {
        MomentKind::Rho3Wrho3 => -2.0,
        MomentKind::RhoWrho2 => 2.0,
        MomentKind::RhoWrho2Cosw => 0.0,
        MomentKind::DirichletEnergy => 4.0 * std::f64::consts::PI,
    }
}

/// Adaptive quadrature of the moment integrals. The substitution u = 1+ρ²,
/// then x = 1/u, maps the infinite range onto (0, 1]; the integrands become
/// polynomials in x, so the quadrature converges immediately and serves as a
/// cross-check of the closed values.
pub fn moment_integral(kind: MomentKind) -> Result<f64> {
    // After u = 1+ρ² (ρ dρ = du/2) and x = 1/u (du = −dx/x²):
    //   ∫₀^∞ ρ³ w_ρ³ dρ      = −4 ∫₀¹ (1−x) dx            .. = −2
    //   ∫₀^∞ ρ w_ρ² dρ       =  2 ∫₀¹ dx                  .. =  2
    //   ∫₀^∞ ρ w_ρ² cos w dρ =  2 ∫₀¹ (1−2x) dx           .. =  0
    //   ½ ∫_{ℝ²} |∇W|²       =  4π ∫₀¹ dx                 .. = 4π
    let tol = 1e-12;
    let r = match kind {
        MomentKind::Rho3Wrho3 => {
            adaptive_simpson(&|x: f64| -4.0 * (1.0 - x), 0.0, 1.0, tol)?
        }
        MomentKind::RhoWrho2 => adaptive_simpson(&|_x: f64| 2.0, 0.0, 1.0, tol)?,
        MomentKind::RhoWrho2Cosw => {
            adaptive_simpson(&|x: f64| 2.0 * (1.0 - 2.0 * x), 0.0, 1.0, tol)?
        }
        MomentKind::DirichletEnergy => {
            adaptive_simpson(&|_x: f64| 4.0 * std::f64::consts::PI, 0.0, 1.0, tol)?
        }
    };
    Ok(r.value)
}

/// Same moments integrated directly in ρ on [0, R] plus the analytic tail,
/// without the substitution. Slower route, kept as an independent check.
pub fn moment_integral_direct(kind: MomentKind, rho_max: f64, tol: f64) -> Result<f64> {
    let f: Box<dyn Fn(f64) -> f64> = match kind {
        MomentKind::Rho3Wrho3 => Box::new(|r: f64| r.powi(3) * w_rho(r).powi(3)),
        MomentKind::RhoWrho2 => Box::new(|r: f64| r * w_rho(r).powi(2)),
        MomentKind::RhoWrho2Cosw => Box::new(|r: f64| r * w_rho(r).powi(2) * cos_w(r)),
        MomentKind::DirichletEnergy => {
            Box::new(|r: f64| 0.5 * std::f64::consts::TAU * r * grad_w_sq(r))
        }
    };
    let head = adaptive_simpson(&|r| f(r), 0.0, rho_max, tol)?.value;
    // Tails from the u-substitution antiderivatives evaluated at u = 1+R².
    let u = 1.0 + rho_max * rho_max;
    let tail = match kind {
        MomentKind::Rho3Wrho3 => -4.0 * (1.0 / u - 0.5 / (u * u)),
        MomentKind::RhoWrho2 => 2.0 / u,
        MomentKind::RhoWrho2Cosw => 2.0 * (1.0 / u - 1.0 / (u * u)),
        MomentKind::DirichletEnergy => 4.0 * std::f64::consts::PI / u,
    };
    Ok(head + tail)
}
