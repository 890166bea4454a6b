use super::{EstimateDiagnostics, EstimatorConfig};
use crate::error::Result;
use crate::numeric::fit::remove_line;
use crate::numeric::{centered_fft, centered_fft_axis, Direction};
use crate::pfa::ComplexImage;
use crate::structure::APEProfile;
use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;

struct Bin {
    col: usize,
    peak_at: usize,
    peak: f64,
}

fn select_bins(img: &Array2<Complex64>, floor_db: f64, max_bins: usize) -> Vec<Bin> {
    let nx = img.dim().0;
    let mut bins: Vec<Bin> = img
        .axis_iter(Axis(1))
        .into_par_iter()
        .enumerate()
        .filter_map(|(col, lane)| {
            let (mut peak, mut peak_at, mut sum) = (0.0, 0, 0.0);
            for (i, v) in lane.iter().enumerate() {
                let p = v.norm_sqr();
                sum += p;
                if p > peak {
                    peak = p;
                    peak_at = i;
                }
            }
            let mean = sum / nx as f64;
            (peak > 0.0 && 10.0 * (peak / mean).log10() >= floor_db).then_some(Bin { col, peak_at, peak })
        })
        .collect();
    bins.sort_by(|a, b| b.peak.total_cmp(&a.peak).then(a.col.cmp(&b.col)));
    bins.truncate(max_bins);
    bins.sort_by_key(|b| b.col);
    bins
}

fn centered_lane(img: &Array2<Complex64>, bin: &Bin) -> Vec<Complex64> {
    let nx = img.dim().0;
    let c = nx / 2;
    let mut lane: Vec<Complex64> = img.column(bin.col).to_vec();
    if bin.peak_at >= c {
        lane.rotate_left(bin.peak_at - c);
    } else {
        lane.rotate_right(c - bin.peak_at);
    }
    lane
}

/// Extent between the outermost samples whose summed power lies within 10 dB
/// of the centre. Smeared lanes are speckled, so a contiguous run undercounts.
fn ten_db_width(lanes: &[Vec<Complex64>]) -> usize {
    let nx = lanes[0].len();
    let c = nx / 2;
    let power: Vec<f64> = (0..nx).map(|i| lanes.iter().map(|l| l[i].norm_sqr()).sum()).collect();
    let thr = power[c] / 10.0;
    let lo = (0..=c).find(|&i| power[i] >= thr).unwrap_or(c);
    let hi = (c..nx).rev().find(|&i| power[i] >= thr).unwrap_or(c);
    hi - lo + 1
}

/// Image-domain window of half-width `half` around the centred peak, returned
/// in the aperture domain. The lane is zero-padded to twice its length first
/// so the window acts as a linear rather than circular smoothing over `X`.
fn windowed_aperture(lane: Vec<Complex64>, half: usize) -> Vec<Complex64> {
    let n = lane.len();
    let mut a = lane;
    centered_fft(&mut a, Direction::Inverse);
    let m = 2 * n;
    let off = n / 2;
    let mut pad = vec![Complex64::new(0.0, 0.0); m];
    pad[off..off + n].copy_from_slice(&a);
    centered_fft(&mut pad, Direction::Forward);
    let (c, h) = (m / 2, 2 * half);
    for (i, v) in pad.iter_mut().enumerate() {
        if i + h < c || i > c + h {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    centered_fft(&mut pad, Direction::Inverse);
    pad[off..off + n].to_vec()
}

/// Phase gradient autofocus over the azimuth (`X`) dimension of `img`.
/// Returns the accumulated phase error with its affine part removed. An image
/// whose first update is below tolerance returns a zero profile.
pub fn estimate_ape_pga(img: &ComplexImage, cfg: &EstimatorConfig) -> Result<(APEProfile, EstimateDiagnostics)> {
    cfg.validate()?;
    let p = &cfg.pga;
    let (nx, _) = img.dims();
    let xs = img.grid.x.values();
    let mut work = img.data.clone();
    let mut total = vec![0.0; nx];
    let mut diag = EstimateDiagnostics::default();
    let mut window = 0usize;
    for it in 0..p.max_iterations {
        let bins = select_bins(&work, p.snr_floor, p.target_bins);
        diag.selected_bins = bins.iter().map(|b| b.col).collect();
        if bins.is_empty() {
            diag.low_confidence = true;
            break;
        }
        let lanes: Vec<Vec<Complex64>> = bins.iter().map(|b| centered_lane(&work, b)).collect();
        if it == 0 {
            window = p.initial_window.max(ten_db_width(&lanes)).min(nx);
        }
        let half = window / 2;
        let spectra: Vec<Vec<Complex64>> = lanes.into_par_iter().map(|l| windowed_aperture(l, half)).collect();
        // conjugate-lagged products summed over bins in index order
        let mut phi = vec![0.0; nx];
        for k in 1..nx {
            let s: Complex64 = spectra.iter().map(|g| g[k] * g[k - 1].conj()).sum();
            phi[k] = phi[k - 1] + s.arg();
        }
        let phi = remove_line(&xs, &phi);
        let rms = (phi.iter().map(|v| v * v).sum::<f64>() / nx as f64).sqrt();
        diag.rms_updates.push(rms);
        if it == 0 && rms < p.tolerance {
            // already focused; the update is leakage, not error
            diag.converged = true;
            break;
        }
        apply_x_phase(&mut work, &phi);
        total.iter_mut().zip(&phi).for_each(|(t, v)| *t += v);
        if rms < p.tolerance {
            diag.converged = true;
            break;
        }
        window = ((window as f64 * p.window_shrink).round() as usize).max(p.min_window);
    }
    if diag.selected_bins.len() < p.target_bins.min(4) {
        diag.low_confidence = true;
    }
    let values = remove_line(&xs, &total);
    Ok((APEProfile { x: img.grid.x, values }, diag))
}

/// Removes `phi(X)` from every range bin of an image.
fn apply_x_phase(img: &mut Array2<Complex64>, phi: &[f64]) {
    centered_fft_axis(img, 0, Direction::Inverse);
    img.axis_iter_mut(Axis(1)).into_par_iter().for_each(|mut lane| {
        lane.iter_mut().zip(phi).for_each(|(v, p)| *v *= Complex64::from_polar(1.0, -p));
    });
    centered_fft_axis(img, 0, Direction::Forward);
}
