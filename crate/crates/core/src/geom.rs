//! Basic geometric types: points of the inner plane, unit vectors of S²,
//! rotations about the third axis, and the modulation state (λ, ω, ξ).

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Vector algebra helpers on raw `[f64; 3]`.
pub mod vec3 {
    pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        [
            a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0],
        ]
    }

    pub fn norm(a: [f64; 3]) -> f64 {
        dot(a, a).sqrt()
    }

    pub fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
    }

    pub fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
        [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
    }

    pub fn scale(s: f64, a: [f64; 3]) -> [f64; 3] {
        [s * a[0], s * a[1], s * a[2]]
    }
}

/// A point y = (y₁, y₂) of the dimensionless inner plane, with polar
/// accessors ρ = |y| and θ = atan2(y₂, y₁) ∈ (−π, π]. θ at the origin is
/// taken to be 0 (removable-singularity convention).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanePoint {
    pub y1: f64,
    pub y2: f64,
}

impl PlanePoint {
    pub fn new(y1: f64, y2: f64) -> Self {
        PlanePoint { y1, y2 }
    }

    pub fn polar(rho: f64, theta: f64) -> Self {
        PlanePoint {
            y1: rho * theta.cos(),
            y2: rho * theta.sin(),
        }
    }

    pub fn rho(&self) -> f64 {
        self.y1.hypot(self.y2)
    }

    /// atan2 convention; equals 0 at the origin.
    pub fn theta(&self) -> f64 {
        if self.y1 == 0.0 && self.y2 == 0.0 {
            0.0
        } else {
            self.y2.atan2(self.y1)
        }
    }

    pub fn rho_sq(&self) -> f64 {
        self.y1 * self.y1 + self.y2 * self.y2
    }
}

/// A point of S², kept unit to ~1e-12 by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector3(pub [f64; 3]);

impl UnitVector3 {
    /// Normalize a raw vector onto S². Errors on (near-)zero input.
    pub fn new(v: [f64; 3]) -> Result<Self> {
        let n = vec3::norm(v);
        if n < 1e-14 {
            return Err(Error::domain("cannot normalize a near-zero vector"));
        }
        Ok(UnitVector3([v[0] / n, v[1] / n, v[2] / n]))
    }

    /// Wrap a vector already known to be unit (|v| - 1 checked to 1e-9).
    pub fn from_unit(v: [f64; 3]) -> Self {
        debug_assert!((vec3::norm(v) - 1.0).abs() < 1e-9);
        UnitVector3(v)
    }

    pub fn e3() -> Self {
        UnitVector3([0.0, 0.0, 1.0])
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, other: [f64; 3]) -> f64 {
        vec3::dot(self.0, other)
    }
}

/// Rotation by ω about the third axis (acts on the first two components).
pub fn rotate_z(omega: f64, v: [f64; 3]) -> [f64; 3] {
    let (s, c) = omega.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
}

/// Modulation parameters at one time: scale λ > 0, rotation angle ω,
/// center ξ in the (r, z) half-plane, packed as p = λ e^{iω}.
#[derive(Debug, Clone, Copy)]
pub struct ModulationState {
    pub lambda: f64,
    pub omega: f64,
    pub xi: [f64; 2],
}

impl ModulationState {
    pub fn new(lambda: f64, omega: f64, xi: [f64; 2]) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::domain(format!("scale must be positive, got {lambda}")));
        }
        Ok(ModulationState { lambda, omega, xi })
    }

    /// p = λ e^{iω}.
    pub fn p(&self) -> Complex64 {
        Complex64::from_polar(self.lambda, self.omega)
    }

    /// Recover (λ, ω) from p; ω = arg p.
    pub fn from_p(p: Complex64, xi: [f64; 2]) -> Result<Self> {
        Self::new(p.norm(), p.arg(), xi)
    }

    /// Inner variable y = ((r, z) − ξ)/λ.
    pub fn inner_point(&self, r: f64, z: f64) -> PlanePoint {
        PlanePoint::new((r - self.xi[0]) / self.lambda, (z - self.xi[1]) / self.lambda)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rotation_basics() {
        let v = [1.0, 0.0, 0.0];
        let w = rotate_z(std::f64::consts::FRAC_PI_2, v);
        assert_abs_diff_eq!(w[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], 1.0, epsilon = 1e-15);
        // identity and inverse
        let u = rotate_z(0.0, [0.3, -0.4, 0.5]);
        assert_eq!(u, [0.3, -0.4, 0.5]);
        let v2 = rotate_z(0.7, rotate_z(-0.7, [0.3, -0.4, 0.5]));
        for k in 0..3 {
            assert_abs_diff_eq!(v2[k], [0.3, -0.4, 0.5][k], epsilon = 1e-15);
        }
    }

    #[test]
    fn modulation_state_packing() {
        let st = ModulationState::new(0.05, 1.2, [1.0, 0.0]).unwrap();
        let p = st.p();
        assert_abs_diff_eq!(p.norm(), 0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(p.arg(), 1.2, epsilon = 1e-15);
        let back = ModulationState::from_p(p, [1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(back.lambda, 0.05, epsilon = 1e-15);
        assert!(ModulationState::new(0.0, 0.0, [0.0, 0.0]).is_err());
    }

    #[test]
    fn theta_zero_at_origin() {
        assert_eq!(PlanePoint::new(0.0, 0.0).theta(), 0.0);
        assert_abs_diff_eq!(
            PlanePoint::new(-1.0, 0.0).theta(),
            std::f64::consts::PI,
            epsilon = 1e-15
        );
    }
}
