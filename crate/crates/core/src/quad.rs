//! Quadrature rules used across the crate: adaptive Simpson with an error
//! estimate, Gauss–Legendre nodes for tensor-product integrals, and the
//! uniform-in-θ trapezoid rule (spectrally accurate for periodic integrands).

use crate::error::{Error, Result};

/// Result of an adaptive quadrature: value plus an error estimate.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub err_estimate: f64,
    pub evals: usize,
}

/// Adaptive Simpson on [a, b] to absolute tolerance `tol`.
///
/// Errors if the recursion bottoms out before the local error estimate
/// drops under the (depth-split) tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut evals = 3usize;
    let mut err_total = 0.0;
    let value = simpson_rec(
        f, a, b, fa, fm, fb, whole, tol, 50, &mut evals, &mut err_total,
    )?;
    Ok(QuadResult {
        value,
        err_estimate: err_total,
        evals,
    })
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    evals: &mut usize,
    err_total: &mut f64,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    *evals += 2;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || (b - a).abs() < 1e-14 * (a.abs() + b.abs() + 1.0) {
        if depth == 0 && delta.abs() > 15.0 * tol {
            return Err(Error::Quadrature {
                message: format!("adaptive Simpson hit max depth on [{a}, {b}]"),
                achieved: delta.abs() / 15.0,
                requested: tol,
            });
        }
        *err_total += delta.abs() / 15.0;
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Quadrature {
            message: format!("adaptive Simpson hit max depth on [{a}, {b}]"),
            achieved: delta.abs() / 15.0,
            requested: tol,
        });
    }
    let lv = simpson_rec(
        f,
        a,
        m,
        fa,
        flm,
        fm,
        left,
        0.5 * tol,
        depth - 1,
        evals,
        err_total,
    )?;
    let rv = simpson_rec(
        f,
        m,
        b,
        fm,
        frm,
        fb,
        right,
        0.5 * tol,
        depth - 1,
        evals,
        err_total,
    )?;
    Ok(lv + rv)
}

/// Gauss–Legendre rule on [-1, 1]; nodes found by Newton iteration on the
/// Legendre polynomial, weights from the standard derivative formula.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 2);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Chebyshev-based initial guess.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_and_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrate `f` over [a, b].
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(c + h * x))
            .sum::<f64>()
            * h
    }

    /// Composite rule over consecutive panels given by `breaks`.
    pub fn integrate_panels<F: Fn(f64) -> f64>(&self, breaks: &[f64], f: F) -> f64 {
        breaks
            .windows(2)
            .map(|w| self.integrate(w[0], w[1], &f))
            .sum()
    }
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Uniform trapezoid rule over one period [0, 2π) with `n` samples.
pub fn trapezoid_periodic<F: Fn(f64) -> f64>(n: usize, f: F) -> f64 {
    let h = std::f64::consts::TAU / n as f64;
    (0..n).map(|k| f(k as f64 * h)).sum::<f64>() * h
}
