//! Focus-quality metrics.

use crate::error::{Error, Result};
use crate::numeric::fft::upsample_periodic;
use crate::pfa::{form_image, unform_image, CartesianSpectrum, ComplexImage};
use ndarray::{Array2, ArrayView1, Axis, Zip};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// `−Σ p ln p` with `p = |I|² / Σ|I|²`, in nats.
pub fn entropy(data: &Array2<Complex64>) -> Result<f64> {
    let total: f64 = data.iter().map(|v| v.norm_sqr()).sum();
    if !(total > 0.0) {
        return Err(Error::ZeroImage);
    }
    let h = data
        .iter()
        .map(|v| {
            let p = v.norm_sqr() / total;
            if p > 0.0 {
                -p * p.ln()
            } else {
                0.0
            }
        })
        .sum::<f64>();
    Ok(h.max(0.0))
}

pub fn image_entropy(img: &ComplexImage) -> Result<f64> {
    entropy(&img.data)
}

/// `std(|I|²) / mean(|I|²)`.
pub fn image_contrast(img: &ComplexImage) -> Result<f64> {
    let n = img.data.len() as f64;
    let mean = img.data.iter().map(|v| v.norm_sqr()).sum::<f64>() / n;
    if !(mean > 0.0) {
        return Err(Error::ZeroImage);
    }
    let var = img.data.iter().map(|v| (v.norm_sqr() - mean).powi(2)).sum::<f64>() / n;
    Ok(var.sqrt() / mean)
}

fn same_lattice(a: &ComplexImage, b: &ComplexImage) -> Result<()> {
    if a.dims() != b.dims() || !a.grid.same_lattice(&b.grid) {
        return Err(Error::GridMismatch("images are on different grids".into()));
    }
    Ok(())
}

/// `|Σ P·exp{−j(xX + y(Y − Y0))}|` over a grid of candidate offsets.
fn correlation_grid(p: &CartesianSpectrum, xs: &[f64], ys: &[f64]) -> Vec<Vec<f64>> {
    let gx = p.grid.x.values();
    let gy: Vec<f64> = p.grid.y.values().iter().map(|y| y - p.grid.y0).collect();
    ys.par_iter()
        .map(|&y| {
            let rot: Vec<Complex64> = gy.iter().map(|v| Complex64::from_polar(1.0, -y * v)).collect();
            let q: Vec<Complex64> =
                p.data.rows().into_iter().map(|r| r.iter().zip(&rot).map(|(a, b)| a * b).sum()).collect();
            xs.iter()
                .map(|&x| {
                    q.iter().zip(&gx).map(|(v, u)| v * Complex64::from_polar(1.0, -x * u)).sum::<Complex64>().norm()
                })
                .collect()
        })
        .collect()
}

/// Offset `(dx, dy)` in metres of `img` relative to `reference`, from the
/// peak of their complex cross-correlation refined to 1/1000 pixel.
pub fn register_offset(reference: &ComplexImage, img: &ComplexImage) -> Result<(f64, f64)> {
    same_lattice(reference, img)?;
    let a = unform_image(reference);
    let b = unform_image(img);
    let mut cross = b.clone();
    Zip::from(&mut cross.data).and(&a.data).for_each(|v, r| *v *= r.conj());
    let coarse = form_image(&cross, crate::pfa::Taper::None);
    let (mut bi, mut bm) = ((0, 0), -1.0);
    for ((i, j), v) in coarse.data.indexed_iter() {
        if v.norm_sqr() > bm {
            bm = v.norm_sqr();
            bi = (i, j);
        }
    }
    if bm <= 0.0 {
        return Err(Error::ZeroImage);
    }
    let (dx, dy) = (img.dx(), img.dy());
    let (mut x0, mut y0) = coarse.position(bi.0, bi.1);
    let mut span = 1.0;
    for _ in 0..3 {
        let steps: Vec<f64> = (-10..=10).map(|k| k as f64 * span / 10.0).collect();
        let xs: Vec<f64> = steps.iter().map(|s| x0 + s * dx).collect();
        let ys: Vec<f64> = steps.iter().map(|s| y0 + s * dy).collect();
        let c = correlation_grid(&cross, &xs, &ys);
        let (mut best, mut at) = (-1.0, (0, 0));
        for (k, row) in c.iter().enumerate() {
            for (l, &v) in row.iter().enumerate() {
                if v > best {
                    best = v;
                    at = (l, k);
                }
            }
        }
        x0 = xs[at.0];
        y0 = ys[at.1];
        span /= 10.0;
    }
    Ok((x0, y0))
}

/// Moves the image content by `(-dx, -dy)` metres with a linear spectral phase.
pub fn shift_image(img: &ComplexImage, dx: f64, dy: f64) -> ComplexImage {
    let mut s = unform_image(img);
    let xs = s.grid.x.values();
    let ys: Vec<f64> = s.grid.y.values().iter().map(|y| y - s.grid.y0).collect();
    for ((i, j), v) in s.data.indexed_iter_mut() {
        *v *= Complex64::from_polar(1.0, -(dx * xs[i] + dy * ys[j]));
    }
    form_image(&s, img.taper)
}

/// `img` shifted onto `reference` by [`register_offset`].
pub fn register_to(reference: &ComplexImage, img: &ComplexImage) -> Result<ComplexImage> {
    let (dx, dy) = register_offset(reference, img)?;
    Ok(shift_image(img, dx, dy))
}

/// Entropy of `img` after sub-pixel registration to `reference`. Point
/// responses on a critically sampled grid change entropy with their
/// sub-pixel position, so comparisons between images are made registered.
pub fn registered_entropy(reference: &ComplexImage, img: &ComplexImage) -> Result<f64> {
    image_entropy(&register_to(reference, img)?)
}

/// Normalized correlation of the magnitudes, `Σ|a||b| / sqrt(Σ|a|²Σ|b|²)`.
pub fn magnitude_correlation(a: &ComplexImage, b: &ComplexImage) -> Result<f64> {
    same_lattice(a, b)?;
    let (mut ab, mut aa, mut bb) = (0.0, 0.0, 0.0);
    for (u, v) in a.data.iter().zip(b.data.iter()) {
        let (p, q) = (u.norm(), v.norm());
        ab += p * q;
        aa += p * p;
        bb += q * q;
    }
    if aa <= 0.0 || bb <= 0.0 {
        return Err(Error::ZeroImage);
    }
    Ok(ab / (aa * bb).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutMetrics {
    /// −3 dB width, metres.
    pub irw: f64,
    /// Highest first sidelobe relative to the peak, dB.
    pub pslr: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointResponse {
    pub peak: (usize, usize),
    pub azimuth: CutMetrics,
    pub range: CutMetrics,
}

/// Brightest pixel within `radius` (wrapped) of `near`.
pub fn local_peak(img: &ComplexImage, near: (usize, usize), radius: usize) -> (usize, usize) {
    let (nx, ny) = img.dims();
    let r = radius as isize;
    let mut best = (near, -1.0);
    for di in -r..=r {
        for dj in -r..=r {
            let i = (near.0 as isize + di).rem_euclid(nx as isize) as usize;
            let j = (near.1 as isize + dj).rem_euclid(ny as isize) as usize;
            let m = img.data[[i, j]].norm_sqr();
            if m > best.1 {
                best = ((i, j), m);
            }
        }
    }
    best.0
}

/// The `count` brightest pixels at least `min_separation` apart (Chebyshev, wrapped).
pub fn find_peaks(img: &ComplexImage, count: usize, min_separation: usize) -> Vec<(usize, usize)> {
    let (nx, ny) = img.dims();
    let mut mag = img.data.mapv(|v| v.norm_sqr());
    let mut out = Vec::new();
    let s = min_separation as isize;
    for _ in 0..count {
        let (idx, m) = mag.indexed_iter().fold(((0, 0), -1.0), |acc, (ij, &v)| if v > acc.1 { (ij, v) } else { acc });
        if m <= 0.0 {
            break;
        }
        out.push(idx);
        for di in -s..=s {
            for dj in -s..=s {
                let i = (idx.0 as isize + di).rem_euclid(nx as isize) as usize;
                let j = (idx.1 as isize + dj).rem_euclid(ny as isize) as usize;
                mag[[i, j]] = 0.0;
            }
        }
    }
    out
}

fn cut_metrics(
    lane: ArrayView1<Complex64>,
    at: usize,
    spacing: f64,
    radius: usize,
    upsample: usize,
) -> Result<CutMetrics> {
    let up = upsample_periodic(&lane.to_vec(), upsample);
    let m = up.len();
    let p: Vec<f64> = up.iter().map(|v| v.norm_sqr()).collect();
    let idx = |k: isize| k.rem_euclid(m as isize) as usize;
    let centre = (at * upsample) as isize;
    let u = upsample as isize;
    let mut k0 = centre;
    for k in centre - u..=centre + u {
        if p[idx(k)] > p[idx(k0)] {
            k0 = k;
        }
    }
    let peak = p[idx(k0)];
    if !(peak > 0.0) {
        return Err(Error::NoIsolatedPeak("zero response".into()));
    }
    let reach = (radius * upsample) as isize;
    let half = 0.5 * peak;
    let crossing = |dir: isize| -> Option<f64> {
        let mut k = k0;
        for _ in 0..reach {
            let next = k + dir;
            if p[idx(next)] < half {
                let (a, b) = (p[idx(k)], p[idx(next)]);
                return Some((k - k0) as f64 + dir as f64 * (a - half) / (a - b));
            }
            k = next;
        }
        None
    };
    let (lo, hi) = match (crossing(-1), crossing(1)) {
        (Some(l), Some(h)) => (l, h),
        _ => return Err(Error::NoIsolatedPeak("no −3 dB crossing inside the neighbourhood".into())),
    };
    let irw = (hi - lo) / upsample as f64 * spacing;
    let sidelobe = |dir: isize| -> Option<f64> {
        let mut k = k0;
        let mut steps = 0;
        while steps < reach && p[idx(k + dir)] <= p[idx(k)] {
            k += dir;
            steps += 1;
        }
        while steps < reach && p[idx(k + dir)] >= p[idx(k)] {
            k += dir;
            steps += 1;
        }
        (steps < reach).then(|| p[idx(k)])
    };
    let sl = match (sidelobe(-1), sidelobe(1)) {
        (Some(a), Some(b)) => a.max(b),
        (Some(a), None) | (None, Some(a)) => a,
        (None, None) => return Err(Error::NoIsolatedPeak("no sidelobe inside the neighbourhood".into())),
    };
    Ok(CutMetrics { irw, pslr: 10.0 * (sl / peak).log10() })
}

/// IRW and PSLR along both axes through the brightest pixel near `near`,
/// from full-line cuts upsampled by `upsample`.
pub fn point_response_metrics(
    img: &ComplexImage,
    near: (usize, usize),
    radius: usize,
    upsample: usize,
) -> Result<PointResponse> {
    if radius < 2 || upsample < 1 {
        return Err(Error::InvalidInput("radius must be at least 2 and upsample at least 1".into()));
    }
    let peak = local_peak(img, near, radius);
    let azimuth = cut_metrics(img.data.index_axis(Axis(1), peak.1), peak.0, img.dx(), radius, upsample)?;
    let range = cut_metrics(img.data.index_axis(Axis(0), peak.0), peak.1, img.dy(), radius, upsample)?;
    Ok(PointResponse { peak, azimuth, range })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusMetrics {
    pub entropy: f64,
    pub contrast: f64,
    pub targets: Vec<PointResponse>,
    pub residual_rcm_cells: Option<f64>,
}

/// Entropy, contrast and the point responses of the `targets` brightest peaks.
pub fn focus_metrics(img: &ComplexImage, targets: usize, radius: usize, upsample: usize) -> Result<FocusMetrics> {
    let entropy = image_entropy(img)?;
    let contrast = image_contrast(img)?;
    let peaks = find_peaks(img, targets, radius);
    let targets = peaks.into_iter().filter_map(|p| point_response_metrics(img, p, radius, upsample).ok()).collect();
    Ok(FocusMetrics { entropy, contrast, targets, residual_rcm_cells: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pfa::{form_image, CartesianGrid, CartesianSpectrum, Taper};

    fn point(n: usize, taper: Taper) -> ComplexImage {
        let g = CartesianGrid::synthetic(10e9, 1.0, crate::sim::SPEED_OF_LIGHT, n, 0.05, n, 0.04);
        let s = CartesianSpectrum::point_targets(
            &g,
            &[(0.37 * g.pixel_x(), -0.21 * g.pixel_y(), Complex64::new(1.0, 0.0))],
        );
        form_image(&s, taper)
    }

    #[test]
    fn entropy_limits() {
        let mut a = Array2::zeros((8, 8));
        a[[3, 4]] = Complex64::new(2.0, 1.0);
        assert_eq!(entropy(&a).unwrap(), 0.0);
        let u = Array2::from_elem((8, 8), Complex64::new(0.0, 3.0));
        assert!((entropy(&u).unwrap() - 64f64.ln()).abs() < 1e-12);
        assert!(matches!(entropy(&Array2::zeros((2, 2))), Err(Error::ZeroImage)));
    }

    #[test]
    fn untapered_sinc_response() {
        let img = point(256, Taper::None);
        let r = point_response_metrics(&img, (128, 128), 12, 16).unwrap();
        assert!((r.azimuth.pslr + 13.26).abs() < 0.3, "{}", r.azimuth.pslr);
        assert!((r.range.pslr + 13.26).abs() < 0.3, "{}", r.range.pslr);
        assert!((r.azimuth.irw / (0.886 * img.dx()) - 1.0).abs() < 0.03);
        assert!((r.range.irw / (0.886 * img.dy()) - 1.0).abs() < 0.03);
    }

    #[test]
    fn hann_response_is_wider_and_lower() {
        let plain = point_response_metrics(&point(256, Taper::None), (128, 128), 12, 16).unwrap();
        let hann = point_response_metrics(&point(256, Taper::Hann), (128, 128), 12, 16).unwrap();
        assert!(hann.azimuth.irw > plain.azimuth.irw);
        assert!(hann.azimuth.pslr <= -31.0, "{}", hann.azimuth.pslr);
    }

    #[test]
    fn metrics_invariant_to_phase_and_scale() {
        let img = point(128, Taper::None);
        let mut other = img.clone();
        other.data.mapv_inplace(|v| v * Complex64::from_polar(3.5, 1.1));
        assert!((image_entropy(&img).unwrap() - image_entropy(&other).unwrap()).abs() < 1e-12);
        assert!((image_contrast(&img).unwrap() - image_contrast(&other).unwrap()).abs() < 1e-9);
        let a = point_response_metrics(&img, (64, 64), 10, 8).unwrap();
        let b = point_response_metrics(&other, (64, 64), 10, 8).unwrap();
        assert!((a.azimuth.irw - b.azimuth.irw).abs() < 1e-12 && (a.range.pslr - b.range.pslr).abs() < 1e-9);
    }

    #[test]
    fn registration_recovers_sub_pixel_shift() {
        let img = point(128, Taper::None);
        let (dx, dy) = (0.37 * img.dx(), -1.21 * img.dy());
        let moved = shift_image(&img, -dx, -dy);
        let (ex, ey) = register_offset(&img, &moved).unwrap();
        assert!((ex - dx).abs() < 2e-3 * img.dx() && (ey - dy).abs() < 2e-3 * img.dy(), "{ex} {ey}");
        let back = register_to(&img, &moved).unwrap();
        assert!(magnitude_correlation(&img, &back).unwrap() > 0.999999);
        assert!((registered_entropy(&img, &moved).unwrap() - image_entropy(&img).unwrap()).abs() < 1e-4);
    }

    #[test]
    fn flat_image_has_no_isolated_peak() {
        let mut img = point(64, Taper::None);
        img.data.fill(Complex64::new(1.0, 0.0));
        assert!(matches!(point_response_metrics(&img, (32, 32), 6, 4), Err(Error::NoIsolatedPeak(_))));
    }
}
