//! Cubic interpolants for 1-D profiles.

/// Clamped cubic spline on uniformly spaced knots. End slopes come from
/// fourth-order one-sided differences, so cubic data is reproduced exactly.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x0: f64,
    h: f64,
    y: Vec<f64>,
    m: Vec<f64>,
}

fn end_slopes(y: &[f64], h: f64) -> (f64, f64) {
    let n = y.len();
    if n >= 5 {
        let l = (-25.0 * y[0] + 48.0 * y[1] - 36.0 * y[2] + 16.0 * y[3] - 3.0 * y[4]) / (12.0 * h);
        let r = (25.0 * y[n - 1] - 48.0 * y[n - 2] + 36.0 * y[n - 3] - 16.0 * y[n - 4] + 3.0 * y[n - 5]) / (12.0 * h);
        (l, r)
    } else {
        let l = (y[1] - y[0]) / h;
        let r = (y[n - 1] - y[n - 2]) / h;
        (l, r)
    }
}

impl CubicSpline {
    pub fn uniform(x0: f64, h: f64, y: &[f64]) -> Self {
        assert!(y.len() >= 2, "spline needs at least two knots");
        assert!(h > 0.0);
        let n = y.len();
        let (s0, s1) = end_slopes(y, h);
        // tridiagonal system for second derivatives, clamped ends
        let mut a = vec![h / 6.0; n];
        let mut b = vec![2.0 * h / 3.0; n];
        let mut c = vec![h / 6.0; n];
        let mut d = vec![0.0; n];
        b[0] = h / 3.0;
        c[0] = h / 6.0;
        d[0] = (y[1] - y[0]) / h - s0;
        a[n - 1] = h / 6.0;
        b[n - 1] = h / 3.0;
        d[n - 1] = s1 - (y[n - 1] - y[n - 2]) / h;
        for i in 1..n - 1 {
            d[i] = (y[i + 1] - 2.0 * y[i] + y[i - 1]) / h;
        }
        a[0] = 0.0;
        c[n - 1] = 0.0;
        // Thomas algorithm
        for i in 1..n {
            let w = a[i] / b[i - 1];
            b[i] -= w * c[i - 1];
            d[i] -= w * d[i - 1];
        }
        let mut m = vec![0.0; n];
        m[n - 1] = d[n - 1] / b[n - 1];
        for i in (0..n - 1).rev() {
            m[i] = (d[i] - c[i] * m[i + 1]) / b[i];
        }
        Self { x0, h, y: y.to_vec(), m }
    }

    pub fn x_min(&self) -> f64 {
        self.x0
    }

    pub fn x_max(&self) -> f64 {
        self.x0 + self.h * (self.y.len() - 1) as f64
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min() && x <= self.x_max()
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.y.len();
        let s = (x - self.x0) / self.h;
        let i = (s.floor().max(0.0) as usize).min(n - 2);
        (i, s - i as f64)
    }

    /// Value at `x`, `None` outside the knot range.
    pub fn eval(&self, x: f64) -> Option<f64> {
        if !self.contains(x) {
            return None;
        }
        Some(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: f64) -> f64 {
        let (i, t) = self.locate(x);
        if t == 0.0 {
            return self.y[i];
        }
        let u = 1.0 - t;
        let h2 = self.h * self.h / 6.0;
        u * self.y[i] + t * self.y[i + 1] + h2 * ((u * u * u - u) * self.m[i] + (t * t * t - t) * self.m[i + 1])
    }

    /// Cumulative integral from the first knot, evaluated at every knot.
    pub fn cumulative_integral(&self) -> Vec<f64> {
        let h = self.h;
        let mut out = Vec::with_capacity(self.y.len());
        let mut acc = 0.0;
        out.push(0.0);
        for i in 0..self.y.len() - 1 {
            acc += h * (self.y[i] + self.y[i + 1]) / 2.0 - h * h * h * (self.m[i] + self.m[i + 1]) / 24.0;
            out.push(acc);
        }
        out
    }
}

/// Shape-preserving piecewise cubic Hermite interpolant (Fritsch–Carlson slopes)
/// on strictly increasing, possibly nonuniform, abscissae.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: &[f64], y: &[f64]) -> Option<Self> {
        let n = x.len();
        if n < 2 || y.len() != n || x.windows(2).any(|w| w[1] <= w[0]) {
            return None;
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] <= 0.0 {
                    d[i] = 0.0;
                } else {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Some(Self { x: x.to_vec(), y: y.to_vec(), d })
    }

    pub fn eval(&self, xq: f64) -> Option<f64> {
        let n = self.x.len();
        if !(xq >= self.x[0] && xq <= self.x[n - 1]) {
            return None;
        }
        let i = match self.x.binary_search_by(|v| v.partial_cmp(&xq).unwrap()) {
            Ok(i) => return Some(self.y[i]),
            Err(i) => i - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let t = (xq - self.x[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Some(h00 * self.y[i] + h10 * h * self.d[i] + h01 * self.y[i + 1] + h11 * h * self.d[i + 1])
    }
}

fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}
