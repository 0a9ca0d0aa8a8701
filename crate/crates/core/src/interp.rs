//! Monotone cubic (PCHIP / Fritsch–Carlson) interpolation on an increasing
//! abscissa grid. Used for the Γ tables and trajectory lookups.

/// Piecewise-cubic Hermite interpolant with shape-preserving slopes.
#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    /// Build from strictly increasing `x` and matching `y`.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len());
        assert!(x.len() >= 2);
        assert!(
            x.windows(2).all(|w| w[1] > w[0]),
            "abscissae must be strictly increasing"
        );
        let n = x.len();
        let mut d = vec![0.0; n];
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let s: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        // Interior slopes: weighted harmonic mean when secants agree in sign.
        for i in 1..n - 1 {
            if s[i - 1] * s[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
            }
        }
        d[0] = edge_slope(h[0], h.get(1).copied().unwrap_or(h[0]), s[0], s.get(1).copied().unwrap_or(s[0]));
        d[n - 1] = edge_slope(
            h[n - 2],
            if n >= 3 { h[n - 3] } else { h[n - 2] },
            s[n - 2],
            if n >= 3 { s[n - 3] } else { s[n - 2] },
        );
        Pchip { x, y, d }
    }

    /// Evaluate at `t`; clamps to the end values outside the range.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0] + self.d[0] * (t - self.x[0]).max(0.0);
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = match self
            .x
            .binary_search_by(|v| v.partial_cmp(&t).expect("NaN abscissa"))
        {
            Ok(k) => return self.y[k],
            Err(k) => k - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let y0 = self.y[i];
        let y1 = self.y[i + 1];
        let d0 = self.d[i] * h;
        let d1 = self.d[i + 1] * h;
        let s2 = s * s;
        let s3 = s2 * s;
        y0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + d0 * (s3 - 2.0 * s2 + s)
            + y1 * (-2.0 * s3 + 3.0 * s2)
            + d1 * (s3 - s2)
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], *self.x.last().unwrap())
    }
}

fn edge_slope(h0: f64, h1: f64, s0: f64, s1: f64) -> f64 {
    // One-sided three-point estimate, limited to preserve shape.
    let d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if d * s0 <= 0.0 {
        0.0
    } else if s0 * s1 <= 0.0 && d.abs() > 3.0 * s0.abs() {
        3.0 * s0
    } else {
        d
    }
}
