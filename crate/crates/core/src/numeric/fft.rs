//! Centered discrete Fourier transforms.
//!
//! Sample `k` of an `n`-point lane stands for the signed index `k - n/2`, on
//! both sides of the transform. The forward transform uses `exp(-j…)` and is
//! unnormalized; the inverse uses `exp(+j…)` and divides by `n`.

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

fn plan(n: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    match dir {
        Direction::Forward => planner.plan_fft_forward(n),
        Direction::Inverse => planner.plan_fft_inverse(n),
    }
}

fn centered_in_place(fft: &dyn Fft<f64>, lane: &mut [Complex64], dir: Direction) {
    let n = lane.len();
    let c = n / 2;
    lane.rotate_left(c);
    fft.process(lane);
    lane.rotate_right(c);
    if dir == Direction::Inverse {
        let s = 1.0 / n as f64;
        lane.iter_mut().for_each(|v| *v *= s);
    }
}

/// Centered transform of a single vector.
pub fn centered_fft(data: &mut [Complex64], dir: Direction) {
    if data.is_empty() {
        return;
    }
    let fft = plan(data.len(), dir);
    centered_in_place(fft.as_ref(), data, dir);
}

/// Centered transform of every lane of `a` along `axis` (0 = down the rows, 1 = along a row).
pub fn centered_fft_axis(a: &mut Array2<Complex64>, axis: usize, dir: Direction) {
    let (rows, cols) = a.dim();
    if rows == 0 || cols == 0 {
        return;
    }
    match axis {
        1 => {
            let fft = plan(cols, dir);
            a.axis_iter_mut(Axis(0)).into_par_iter().for_each(|mut row| match row.as_slice_mut() {
                Some(s) => centered_in_place(fft.as_ref(), s, dir),
                None => {
                    let mut buf: Vec<Complex64> = row.to_vec();
                    centered_in_place(fft.as_ref(), &mut buf, dir);
                    row.iter_mut().zip(buf).for_each(|(d, v)| *d = v);
                }
            });
        }
        0 => {
            let fft = plan(rows, dir);
            let cols_out: Vec<Vec<Complex64>> = (0..cols)
                .into_par_iter()
                .map(|j| {
                    let mut buf: Vec<Complex64> = a.column(j).to_vec();
                    centered_in_place(fft.as_ref(), &mut buf, dir);
                    buf
                })
                .collect();
            for (j, col) in cols_out.into_iter().enumerate() {
                a.column_mut(j).iter_mut().zip(col).for_each(|(d, v)| *d = v);
            }
        }
        _ => panic!("axis must be 0 or 1"),
    }
}

/// Centered 2-D transform.
pub fn centered_fft2(a: &mut Array2<Complex64>, dir: Direction) {
    centered_fft_axis(a, 1, dir);
    centered_fft_axis(a, 0, dir);
}

/// Band-limited upsampling of a periodic complex lane by zero padding its centered spectrum.
/// Output sample `u·k` coincides with input sample `k`.
pub fn upsample_periodic(lane: &[Complex64], factor: usize) -> Vec<Complex64> {
    let n = lane.len();
    if factor <= 1 || n == 0 {
        return lane.to_vec();
    }
    let m = n * factor;
    let mut spec = lane.to_vec();
    // plain (non-centered) DFT so index 0 is sample 0
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut spec);
    let mut padded = vec![Complex64::new(0.0, 0.0); m];
    let half = n / 2;
    for k in 0..n {
        if n.is_multiple_of(2) && k == half {
            // split the Nyquist bin to keep real signals real
            padded[half] += spec[k] * 0.5;
            padded[m - half] += spec[k] * 0.5;
        } else if k < half || (n % 2 == 1 && k == half) {
            padded[k] = spec[k];
        } else {
            padded[m - (n - k)] = spec[k];
        }
    }
    planner.plan_fft_inverse(m).process(&mut padded);
    let s = 1.0 / n as f64;
    padded.iter_mut().for_each(|v| *v *= s);
    padded
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn naive_centered(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        let c = n as f64 / 2.0;
        let c = c.floor();
        (0..n)
            .map(|p| {
                x.iter()
                    .enumerate()
                    .map(|(k, v)| {
                        let arg = -2.0 * PI * (k as f64 - c) * (p as f64 - c) / n as f64;
                        v * Complex64::from_polar(1.0, arg)
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_definition() {
        for n in [8usize, 9, 16] {
            let x: Vec<Complex64> =
                (0..n).map(|k| Complex64::new((k as f64 * 0.7).sin(), (k as f64 * 1.3).cos())).collect();
            let mut y = x.clone();
            centered_fft(&mut y, Direction::Forward);
            let r = naive_centered(&x);
            for (a, b) in y.iter().zip(&r) {
                assert!((a - b).norm() < 1e-10);
            }
            centered_fft(&mut y, Direction::Inverse);
            for (a, b) in y.iter().zip(&x) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn axis_transform_round_trip() {
        let mut a = Array2::from_shape_fn((8, 6), |(i, j)| Complex64::new(i as f64, j as f64 * 0.5));
        let orig = a.clone();
        centered_fft2(&mut a, Direction::Forward);
        centered_fft2(&mut a, Direction::Inverse);
        for (x, y) in a.iter().zip(orig.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn upsample_preserves_samples() {
        let n = 16;
        let x: Vec<Complex64> =
            (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * PI * 3.0 * k as f64 / n as f64)).collect();
        let u = upsample_periodic(&x, 4);
        for k in 0..n {
            assert!((u[4 * k] - x[k]).norm() < 1e-12);
        }
        // in-between sample of a pure tone is the tone
        let t = 0.25;
        let expect = Complex64::from_polar(1.0, 2.0 * PI * 3.0 * t / n as f64);
        assert!((u[1] - expect).norm() < 1e-12);
    }
}
