//! Approximate inverse of the nonlocal operator: given a datum a(t) on
//! [0, T], produce a trajectory p = p_{0,κ} + p₁ with p(T) = 0 whose
//! dominant-part image matches a.
//!
//! The construction mirrors the splitting in `b0.rs`: the remainder R_α is
//! dropped and the dominant part S_α is inverted on the log-quotient family
//! ṗ(t) = −κ̂(t)/log²(T−t) by a damped diagonally-preconditioned fixed-point
//! iteration in κ̂. The fitted κ̂ is extracted with the moment
//! ∫_{−T}^T ṗ(s)/(T−s) ds, the same functional that normalizes the
//! predicted blow-up coefficient.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;

use super::b0::{b0, B0Options};
use super::gamma::GammaTable;
use super::history::{clustered_grid, PHistory};
use super::split_s_r;

/// Solver controls.
#[derive(Debug, Clone)]
pub struct InverseParams {
    /// Collocation nodes on [0, T), geometrically clustered toward T.
    pub n_nodes: usize,
    /// Terminal gap: the last node sits at T − gap_factor·T.
    pub gap_factor: f64,
    /// Splitting exponent α ∈ (0, ½).
    pub alpha: f64,
    /// Damping of the fixed-point update.
    pub damping: f64,
    pub max_iters: usize,
    /// Stop once the sup residual falls under tol_rel · sup|a|.
    pub tol_rel: f64,
    /// Weight exponent l in the reported |log(T−t)|^l sup norms.
    pub weight_exponent: f64,
}

impl Default for InverseParams {
    fn default() -> Self {
        InverseParams {
            n_nodes: 97,
            gap_factor: 1e-6,
            alpha: 0.25,
            damping: 0.5,
            max_iters: 40,
            tol_rel: 1e-9,
            weight_exponent: 0.0,
        }
    }
}

/// One fixed-point sweep record.
#[derive(Debug, Clone, Copy)]
pub struct IterationRecord {
    pub iter: usize,
    /// Weighted sup-norm of the dominant-part residual sup |S_α[ṗ] − a|·w.
    pub residual: f64,
}

/// Inverse solve report.
#[derive(Debug, Clone)]
pub struct InverseReport {
    /// Coefficient of the p_{0,κ} part (ṗ ≈ −κ|log T|/log²(T−t)).
    pub kappa: Complex64,
    /// Same fit in the raw normalization ṗ ≈ −κ̂/log²(T−t); κ̂ = κ|log T|.
    pub kappa_hat: Complex64,
    /// Moment prediction −a(T)/∫_{−T}^T ds/((T−s)log²(T−s)), by quadrature.
    pub kappa_hat_pred: Complex64,
    /// The solved trajectory on [−T, T] with p(T) = 0.
    pub p: PHistory,
    /// Samples of p₁ = p − p_{0,κ} on the collocation nodes.
    pub p1: Vec<(f64, Complex64)>,
    /// Residual history of the iteration (must decrease).
    pub iterations: Vec<IterationRecord>,
    /// Final weighted sup-norm of the dominant-part residual.
    pub residual_dominant: f64,
    /// Weighted sup-norm diagnostic |B₀[p] − a| over interior times.
    pub residual_b0: f64,
}

/// ∫_{−T}^T ds/((T−s) log²(T−s)), by quadrature in m = log(T−s) plus the
/// exact ∫ dm/m² tail below the truncation.
pub fn log_moment_norm(big_t: f64) -> f64 {
    // ∫ ds/((T−s) log²(T−s)) = ∫ dm/m² over m ∈ (−∞, log 2T]
    let m_hi = (2.0 * big_t).ln();
    let m_lo = m_hi - 4000.0;
    let body = adaptive_simpson(&|m: f64| 1.0 / (m * m), m_lo, m_hi, 1e-12)
        .map(|r| r.value)
        .unwrap_or(0.0);
    body + 1.0 / m_lo.abs()
}

struct Family {
    big_t: f64,
    nodes: Vec<f64>,
    kappa_hat: Vec<Complex64>,
}

impl Family {
    fn kappa_at(&self, s: f64) -> Complex64 {
        // constant continuation before t = 0 and after the last node
        let n = self.nodes.len();
        if s <= self.nodes[0] {
            return self.kappa_hat[0];
        }
        if s >= self.nodes[n - 1] {
            return self.kappa_hat[n - 1];
        }
        let i = match self
            .nodes
            .binary_search_by(|v| v.partial_cmp(&s).expect("NaN node"))
        {
            Ok(k) => return self.kappa_hat[k],
            Err(k) => k - 1,
        };
        let w = (s - self.nodes[i]) / (self.nodes[i + 1] - self.nodes[i]);
        self.kappa_hat[i] * (1.0 - w) + self.kappa_hat[i + 1] * w
    }

    fn pdot(&self, s: f64) -> Complex64 {
        let l = (self.big_t - s).ln();
        -self.kappa_at(s) / (l * l)
    }
}

/// Approximate inverse: returns p with dominant part matching `a` on [0, T].
///
/// Preconditions: a ≡ 0 short-circuits to the zero trajectory; otherwise
/// |a(T)| must not degenerate relative to sup |a|. Divergence (residual not
/// decreasing for 3 consecutive sweeps) aborts with the residual trace.
pub fn approx_inverse_p(
    a: &dyn Fn(f64) -> Complex64,
    big_t: f64,
    params: &InverseParams,
    table: &GammaTable,
) -> Result<InverseReport> {
    if !(big_t > 0.0 && big_t < 1.0) {
        return Err(Error::domain("inverse solve requires 0 < T < 1"));
    }
    let gap = params.gap_factor * big_t;
    let n = params.n_nodes;
    // nodes t_j with T − t_j geometric from T down to gap
    let ratio = (gap / big_t).powf(1.0 / (n - 1) as f64);
    let mut nodes = Vec::with_capacity(n);
    let mut d = big_t;
    for _ in 0..n {
        nodes.push(big_t - d);
        d *= ratio;
    }

    let a_samples: Vec<Complex64> = nodes.iter().map(|&t| a(t)).collect();
    let sup_a = a_samples.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if sup_a == 0.0 {
        let p = zero_history(big_t)?;
        return Ok(InverseReport {
            kappa: Complex64::new(0.0, 0.0),
            kappa_hat: Complex64::new(0.0, 0.0),
            kappa_hat_pred: Complex64::new(0.0, 0.0),
            p,
            p1: Vec::new(),
            iterations: Vec::new(),
            residual_dominant: 0.0,
            residual_b0: 0.0,
        });
    }
    let a_terminal = *a_samples.last().unwrap();
    if a_terminal.norm() < 1e-8 * (1.0 + sup_a) {
        return Err(Error::degenerate(format!(
            "|a(T)| = {:.3e} is degenerate relative to sup|a| = {:.3e}",
            a_terminal.norm(),
            sup_a
        )));
    }

    let weights: Vec<f64> = nodes
        .iter()
        .map(|&t| (big_t - t).ln().abs().powf(params.weight_exponent))
        .collect();

    // Diagonal gain of the dominant part on the κ̂ ≡ 1 member of the family.
    let unit = Family {
        big_t,
        nodes: nodes.clone(),
        kappa_hat: vec![Complex64::new(1.0, 0.0); n],
    };
    let gains: Vec<Complex64> = nodes
        .iter()
        .map(|&t| dominant_apply(&unit, t, params.alpha))
        .collect::<Result<_>>()?;
    for g in &gains {
        if g.norm() < 1e-6 {
            return Err(Error::degenerate("dominant-part gain degenerated"));
        }
    }

    let mut family = Family {
        big_t,
        nodes: nodes.clone(),
        kappa_hat: vec![Complex64::new(0.0, 0.0); n],
    };
    let mut iterations: Vec<IterationRecord> = Vec::new();
    let mut last_residuals: Vec<f64> = Vec::new();
    let mut residual_dominant = f64::INFINITY;

    for iter in 0..params.max_iters {
        let image: Vec<Complex64> = nodes
            .iter()
            .map(|&t| dominant_apply(&family, t, params.alpha))
            .collect::<Result<_>>()?;
        let mut sup_res: f64 = 0.0;
        let mut updates = Vec::with_capacity(n);
        for j in 0..n {
            let r = a_samples[j] - image[j];
            sup_res = sup_res.max(r.norm() * weights[j]);
            updates.push(r / gains[j]);
        }
        residual_dominant = sup_res;
        iterations.push(IterationRecord {
            iter,
            residual: sup_res,
        });

        if sup_res <= params.tol_rel * sup_a {
            break;
        }
        // divergence guard: three consecutive non-decreasing sweeps
        last_residuals.push(sup_res);
        if last_residuals.len() >= 4 {
            let k = last_residuals.len();
            if last_residuals[k - 1] >= last_residuals[k - 2]
                && last_residuals[k - 2] >= last_residuals[k - 3]
                && last_residuals[k - 3] >= last_residuals[k - 4]
            {
                return Err(Error::Convergence {
                    message: "dominant-part residual stopped decreasing".into(),
                    trace: last_residuals,
                });
            }
        }
        for j in 0..n {
            family.kappa_hat[j] += params.damping * updates[j];
        }
    }

    // Assemble the trajectory on [−T, T]: clustered grid plus exact terminal
    // point; p by backward trapezoid integration of ṗ, p(T) = 0.
    let mut ts = clustered_grid(big_t, 2 * n, gap);
    ts.push(big_t);
    let hist = PHistory::from_pdot_fn(big_t, ts, Complex64::new(0.0, 0.0), |s| {
        if s >= big_t {
            Complex64::new(0.0, 0.0)
        } else {
            family.pdot(s)
        }
    })?;

    // κ̂ fit through the moment ∫_{−T}^T ṗ(s)/(T−s) ds. In m = log(T−s) the
    // integrand is ṗ(T−e^m); κ̂ is constant outside the collocation range, so
    // the head (s < 0) and terminal (s > T−gap) pieces have the exact
    // antiderivative −κ̂ d(1/log(T−s)); the middle is quadrature.
    let moment = {
        let k0 = family.kappa_hat[0];
        let k_last = *family.kappa_hat.last().unwrap();
        let head = -k0 * (1.0 / big_t.ln() - 1.0 / (2.0 * big_t).ln());
        let tail = k_last / gap.ln();
        let m_lo = gap.ln();
        let m_hi = big_t.ln();
        let re = adaptive_simpson(&|m: f64| family.pdot(big_t - m.exp()).re, m_lo, m_hi, 1e-12)?;
        let im = adaptive_simpson(&|m: f64| family.pdot(big_t - m.exp()).im, m_lo, m_hi, 1e-12)?;
        head + tail + Complex64::new(re.value, im.value)
    };
    let norm = log_moment_norm(big_t);
    let kappa_hat = -moment / norm;
    let kappa = kappa_hat / big_t.ln().abs();
    let kappa_hat_pred = -a_terminal / norm;

    // p₁ = p − p_{0,κ} samples on the collocation nodes.
    let p1: Vec<(f64, Complex64)> = nodes
        .iter()
        .map(|&t| {
            (
                t,
                hist.eval_p(t) - super::history::p0_kappa(kappa, big_t, t),
            )
        })
        .collect();

    // B₀ diagnostic on interior nodes (λ > 0 and away from the endpoints).
    let mut residual_b0: f64 = 0.0;
    let opts = B0Options::default();
    for (j, &t) in nodes.iter().enumerate() {
        if t < 0.05 * big_t || t > 0.9 * big_t {
            continue;
        }
        if let Ok(v) = b0(&hist, t, table, &opts) {
            residual_b0 = residual_b0.max((v - a_samples[j]).norm() * weights[j]);
        }
    }

    Ok(InverseReport {
        kappa,
        kappa_hat,
        kappa_hat_pred,
        p: hist,
        p1,
        iterations,
        residual_dominant,
        residual_b0,
    })
}

/// S_α applied to the family's ṗ at time t (the R_α remainder is dropped).
fn dominant_apply(family: &Family, t: f64, alpha: f64) -> Result<Complex64> {
    let g = |s: f64| family.pdot(s);
    let (s_part, _r) = split_s_r(&g, t, family.big_t, alpha, 1e-10)?;
    Ok(s_part)
}

fn zero_history(big_t: f64) -> Result<PHistory> {
    let ts = clustered_grid(big_t, 32, 1e-6 * big_t);
    PHistory::from_pdot_fn(big_t, ts, Complex64::new(0.0, 0.0), |_| {
        Complex64::new(0.0, 0.0)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn zero_datum_gives_zero_solution() {
        let table = GammaTable::build(1e-6, 1e3, 64, 1e-7).unwrap();
        let report = approx_inverse_p(
            &|_| Complex64::new(0.0, 0.0),
            1e-3,
            &InverseParams::default(),
            &table,
        )
        .unwrap();
        assert_eq!(report.kappa, Complex64::new(0.0, 0.0));
        assert!(report.p.eval_p(0.0).norm() < 1e-15);
    }

    #[test]
    fn degenerate_terminal_datum_is_rejected() {
        let table = GammaTable::build(1e-6, 1e3, 64, 1e-7).unwrap();
        // a(T) ≈ 0 while sup|a| = O(1)
        let big_t = 1e-3;
        let res = approx_inverse_p(
            &|t| Complex64::new((big_t - t) / big_t, 0.0),
            big_t,
            &InverseParams::default(),
            &table,
        );
        assert!(matches!(res, Err(Error::Degenerate(_))));
    }

    #[test]
    fn log_moment_matches_antiderivative() {
        // ∫_{−T}^T ds/((T−s)log²(T−s)) = 1/|log 2T|
        let big_t = 1e-3;
        assert_abs_diff_eq!(
            log_moment_norm(big_t),
            1.0 / (2.0 * big_t).ln().abs(),
            epsilon = 1e-8
        );
    }

    #[test]
    fn constant_datum_converges_with_decreasing_residual() {
        let table = GammaTable::build(1e-8, 1e4, 256, 1e-8).unwrap();
        let big_t = 1e-3;
        let report = approx_inverse_p(
            &|_| Complex64::new(1.0, 0.0),
            big_t,
            &InverseParams::default(),
            &table,
        )
        .unwrap();
        // strictly decreasing over the first five sweeps
        assert!(report.iterations.len() >= 5);
        for w in report.iterations.windows(2).take(8) {
            assert!(
                w[1].residual < w[0].residual,
                "residuals {:?}",
                report.iterations
            );
        }
        // κ̂ within 10% of the moment prediction
        let rel = (report.kappa_hat - report.kappa_hat_pred).norm()
            / report.kappa_hat_pred.norm();
        assert!(rel < 0.10, "κ̂ fit off by {rel:.3}");
        // terminal condition
        assert!(report.p.eval_p(big_t).norm() < 1e-14);
        // the dominant residual ends far below its starting point
        assert!(report.residual_dominant < 1e-3 * report.iterations[0].residual);
    }
}
