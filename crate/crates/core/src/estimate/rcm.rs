use super::{EstimateDiagnostics, EstimatorConfig, ReferenceMode};
use crate::error::{invalid, Result};
use crate::numeric::fft::upsample_periodic;
use crate::numeric::fit::{polyfit, remove_line};
use crate::pfa::RangeCompressed;
use crate::structure::RCMProfile;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Smoothed migration under this peak-to-peak, in cells, is reported as zero.
pub const MIN_MIGRATION_CELLS: f64 = 1e-3;

fn signed(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Sub-sample offset of the correlation centre from `idx`: the midpoint of
/// the half-peak crossings, which stays on the axis of symmetry when range
/// defocus splits the peak. Falls back to a parabola when no crossing is
/// found within half the record.
fn refine_peak(buf: &[Complex64], idx: usize, peak: f64) -> f64 {
    let m = buf.len() as isize;
    let at = |k: isize| buf[k.rem_euclid(m) as usize].re;
    let half = 0.5 * peak;
    let crossing = |dir: isize| -> Option<f64> {
        let mut k = idx as isize;
        for _ in 0..m / 2 {
            let next = k + dir;
            if at(next) < half {
                let (a, b) = (at(k), at(next));
                return Some((k - idx as isize) as f64 + dir as f64 * (a - half) / (a - b));
            }
            k = next;
        }
        None
    };
    match (crossing(-1), crossing(1)) {
        (Some(lo), Some(hi)) => 0.5 * (lo + hi),
        _ => {
            let (ym, yp) = (at(idx as isize - 1), at(idx as isize + 1));
            let den = ym - 2.0 * peak + yp;
            if den < 0.0 {
                0.5 * (ym - yp) / den
            } else {
                0.0
            }
        }
    }
}

/// Range alignment over azimuth samples. Each power profile is
/// cross-correlated against the reference, the lag taken at the centre of the
/// upsampled correlation's main lobe, and the shifts smoothed by a polynomial in
/// `X` fitted with iterative outlier rejection. The constant and slope of the result are removed and cells are
/// converted to metres.
pub fn estimate_rcm(rc: &RangeCompressed, cfg: &EstimatorConfig) -> Result<(RCMProfile, EstimateDiagnostics)> {
    cfg.validate()?;
    let rcfg = &cfg.rcm;
    let (nx, nr) = rc.data.dim();
    if nx < 2 || nr < 4 {
        return invalid("range alignment needs at least two azimuth samples and four range cells");
    }
    let up = rcfg.upsample;
    // power of the ×2 band-limited profile is itself band-limited
    let len = 2 * nr;
    let m = len * up;
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(m);

    let spectra: Vec<(Vec<Complex64>, f64)> = (0..nx)
        .into_par_iter()
        .map(|i| {
            let fine = upsample_periodic(&rc.data.row(i).to_vec(), 2);
            let mut s: Vec<Complex64> = fine.iter().map(|v| Complex64::new(v.norm_sqr(), 0.0)).collect();
            let energy: f64 = s.iter().map(|v| v.re * v.re).sum();
            fwd.process(&mut s);
            (s, energy)
        })
        .collect();

    let c = nx / 2;
    let mut order = vec![c];
    for d in 1..nx {
        if c + d < nx {
            order.push(c + d);
        }
        if d <= c {
            order.push(c - d);
        }
    }

    let mut reference = spectra[c].0.clone();
    let mut ref_energy = spectra[c].1;
    let mut count = 1.0;
    let mut shifts = vec![0.0; nx];
    let mut sharpness = vec![0.0; nx];
    sharpness[c] = if spectra[c].1 > 0.0 { 1.0 } else { 0.0 };
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for &i in &order[1..] {
        let (spec, energy) = &spectra[i];
        if *energy <= 0.0 || ref_energy <= 0.0 {
            continue;
        }
        buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        for k in 0..len {
            let p = spec[k] * reference[k].conj();
            if k == len / 2 {
                buf[k] += p * 0.5;
                buf[m - k] += p * 0.5;
            } else if k < len / 2 {
                buf[k] = p;
            } else {
                buf[m - (len - k)] = p;
            }
        }
        inv.process(&mut buf);
        let (idx, peak) =
            buf.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |acc, (k, v)| {
                    if v.re > acc.1 {
                        (k, v.re)
                    } else {
                        acc
                    }
                },
            );
        let lag = signed(idx, m) + refine_peak(&buf, idx, peak);
        let s = lag / m as f64 * nr as f64;
        shifts[i] = s;
        // unnormalized inverse: buf holds len × correlation
        let corr = peak / len as f64;
        sharpness[i] = corr / (energy * ref_energy).sqrt();
        if rcfg.reference == ReferenceMode::RunningMean {
            let aligned: Vec<Complex64> = (0..len)
                .map(|k| spec[k] * Complex64::from_polar(1.0, 2.0 * PI * signed(k, len) * 2.0 * s / len as f64))
                .collect();
            reference.iter_mut().zip(&aligned).for_each(|(r, a)| *r = (*r * count + a) / (count + 1.0));
            count += 1.0;
            ref_energy = reference.iter().map(|v| v.norm_sqr()).sum::<f64>() / len as f64;
        }
    }

    let xs = rc.grid.x.values();
    let mut keep: Vec<usize> = (0..nx).filter(|&i| sharpness[i] >= rcfg.sharpness_floor).collect();
    let mut diag = EstimateDiagnostics { sharpness: sharpness.clone(), shifts: shifts.clone(), ..Default::default() };
    if (nx - keep.len()) as f64 > 0.2 * nx as f64 {
        diag.low_confidence = true;
    }
    let mut poly = None;
    for _ in 0..8 {
        if keep.len() <= rcfg.poly_degree {
            break;
        }
        let fx: Vec<f64> = keep.iter().map(|&i| xs[i]).collect();
        let fy: Vec<f64> = keep.iter().map(|&i| shifts[i]).collect();
        let p = polyfit(&fx, &fy, rcfg.poly_degree);
        let resid: Vec<f64> = keep.iter().map(|&i| (shifts[i] - p.eval(xs[i])).abs()).collect();
        let mut sorted = resid.clone();
        sorted.sort_by(f64::total_cmp);
        // robust deviation, floored at 1/100 cell
        let sigma = (1.4826 * sorted[sorted.len() / 2]).max(0.01);
        let limit = rcfg.outlier_sigma * sigma;
        let before = keep.len();
        keep = keep.into_iter().zip(&resid).filter(|(_, &r)| r <= limit).map(|(i, _)| i).collect();
        poly = Some(p);
        if keep.len() == before {
            break;
        }
    }
    let smoothed: Vec<f64> = match poly {
        Some(p) if keep.len() > rcfg.poly_degree => xs.iter().map(|&x| p.eval(x)).collect(),
        _ => {
            diag.low_confidence = true;
            vec![0.0; nx]
        }
    };
    let kept: std::collections::HashSet<usize> = keep.iter().copied().collect();
    diag.rejected = (0..nx).filter(|i| !kept.contains(i)).collect();
    if diag.rejected.len() as f64 > 0.2 * nx as f64 {
        diag.low_confidence = true;
    }
    let cells = remove_line(&xs, &smoothed);
    let hi = cells.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = cells.iter().cloned().fold(f64::INFINITY, f64::min);
    diag.migration_cells = Some(hi - lo);
    diag.converged = !diag.low_confidence;
    let pixel = rc.range_pixel();
    // below registration resolution
    let values = if hi - lo < MIN_MIGRATION_CELLS { vec![0.0; nx] } else { cells.iter().map(|v| v * pixel).collect() };
    Ok((RCMProfile { x: rc.grid.x, values }, diag))
}
