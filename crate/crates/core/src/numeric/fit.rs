//! Small least-squares fits: polynomials, lines and planes.

use nalgebra::{DMatrix, DVector};

fn lstsq(a: DMatrix<f64>, b: DVector<f64>) -> DVector<f64> {
    let svd = a.svd(true, true);
    svd.solve(&b, 1e-12).expect("SVD with both factors computed")
}

/// Polynomial in the normalized variable `s = (x - center) / scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub center: f64,
    pub scale: f64,
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn eval(&self, x: f64) -> f64 {
        let s = (x - self.center) / self.scale;
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

/// Least-squares polynomial of degree `deg` (clamped to `x.len() - 1`).
pub fn polyfit(x: &[f64], y: &[f64], deg: usize) -> Poly {
    assert_eq!(x.len(), y.len());
    assert!(!x.is_empty());
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let center = 0.5 * (lo + hi);
    let scale = if hi > lo { 0.5 * (hi - lo) } else { 1.0 };
    let deg = deg.min(x.len() - 1);
    let a = DMatrix::from_fn(x.len(), deg + 1, |i, j| ((x[i] - center) / scale).powi(j as i32));
    let c = lstsq(a, DVector::from_column_slice(y));
    Poly { center, scale, coeffs: c.iter().cloned().collect() }
}

/// Least-squares line `y ≈ a0 + a1·x`.
pub fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let a1 = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - a1 * mx, a1)
}

/// Returns `y` minus its least-squares line.
pub fn remove_line(x: &[f64], y: &[f64]) -> Vec<f64> {
    let (a0, a1) = line_fit(x, y);
    x.iter().zip(y).map(|(xv, yv)| yv - a0 - a1 * xv).collect()
}

/// Least-squares plane `v ≈ c0 + cx·x + cy·y` over scattered samples.
pub fn plane_fit(samples: &[(f64, f64, f64)]) -> (f64, f64, f64) {
    if samples.is_empty() {
        return (0.0, 0.0, 0.0);
    }
    // centered normal equations, accumulated in index order
    let n = samples.len() as f64;
    let (mut mx, mut my, mut mv) = (0.0, 0.0, 0.0);
    for &(x, y, v) in samples {
        mx += x;
        my += y;
        mv += v;
    }
    mx /= n;
    my /= n;
    mv /= n;
    let (mut sxx, mut sxy, mut syy, mut sxv, mut syv) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, y, v) in samples {
        let (dx, dy, dv) = (x - mx, y - my, v - mv);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
        sxv += dx * dv;
        syv += dy * dv;
    }
    let det = sxx * syy - sxy * sxy;
    let (cx, cy) = if det.abs() > 1e-300 {
        ((sxv * syy - syv * sxy) / det, (syv * sxx - sxv * sxy) / det)
    } else if sxx > 0.0 {
        (sxv / sxx, 0.0)
    } else if syy > 0.0 {
        (0.0, syv / syy)
    } else {
        (0.0, 0.0)
    };
    (mv - cx * mx - cy * my, cx, cy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polyfit_recovers_polynomial() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.3 - 4.0).collect();
        let f = |x: f64| 1.0 - 2.0 * x + 0.5 * x * x * x;
        let y: Vec<f64> = x.iter().map(|&v| f(v)).collect();
        let p = polyfit(&x, &y, 5);
        for &v in &x {
            assert!((p.eval(v) - f(v)).abs() < 1e-9);
        }
    }

    #[test]
    fn plane_fit_exact() {
        let s: Vec<(f64, f64, f64)> = (0..30)
            .map(|i| {
                let x = i as f64 * 0.7;
                let y = (i * i % 7) as f64;
                (x, y, 3.0 + 2.0 * x - 0.25 * y)
            })
            .collect();
        let (c, cx, cy) = plane_fit(&s);
        assert!((c - 3.0).abs() < 1e-10 && (cx - 2.0).abs() < 1e-12 && (cy + 0.25).abs() < 1e-12);
    }

    #[test]
    fn line_removal_leaves_zero_mean_and_slope() {
        let x: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| (v * 0.3).sin() + 5.0 + 0.1 * v).collect();
        let r = remove_line(&x, &y);
        let (a0, a1) = line_fit(&x, &r);
        assert!(a0.abs() < 1e-12 && a1.abs() < 1e-12);
    }
}
