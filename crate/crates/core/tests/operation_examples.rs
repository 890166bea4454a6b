use kasar::estimate::{coarse_range_preprocess, EstimatorConfig};
use kasar::io::metrics::{image_entropy, magnitude_correlation, point_response_metrics, register_to};
use kasar::numeric::{SincConfig, SincKernel};
use kasar::pfa::{form_image, range_resample, CartesianGrid, CartesianSpectrum, ComplexImage, Taper};
use kasar::pipeline::{autofocus, baseline_prior2d, ka_autofocus, measure_residual_rcm, Mode, PipelineConfig};
use kasar::sim::{
    inject_spectrum_error, make_linear_geometry, synth_phase_history, PointTarget, RadarParams, RangeErrorProfile,
    TargetScene, SPEED_OF_LIGHT,
};
use kasar::structure::{
    ape_to_surface_with, rcm_to_surface, taylor_decompose, APEProfile, EdgePolicy, PhaseErrorSurface, RCMProfile,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

const N: usize = 256;

fn grid(n: usize) -> CartesianGrid {
    let y0 = 4.0 * PI * 10e9 / SPEED_OF_LIGHT;
    CartesianGrid::synthetic(10e9, 1.0, SPEED_OF_LIGHT, n, 24.0 / n as f64, n, 0.06 * y0 / n as f64)
}

fn centre(n: usize) -> CartesianSpectrum {
    CartesianSpectrum::point_targets(&grid(n), &[(0.0, 0.0, Complex64::new(1.0, 0.0))])
}

fn scene() -> CartesianSpectrum {
    let g = grid(N);
    let (dx, dy) = (g.pixel_x(), g.pixel_y());
    let targets: Vec<(f64, f64, Complex64)> = (0..12)
        .map(|k| {
            let i = ((k * 5) % 12) as f64 * 16.0 - 88.0;
            let j = k as f64 * 15.0 - 82.0;
            (i * dx, j * dy, Complex64::from_polar(1.0, 1.1 * k as f64))
        })
        .collect();
    CartesianSpectrum::point_targets(&g, &targets)
}

fn quadratic(s: &CartesianSpectrum, a: f64) -> CartesianSpectrum {
    let p = APEProfile::from_fn(s.grid.x, |x| a * x * x);
    let surf = ape_to_surface_with(&p, &s.grid, EdgePolicy::Extend { fraction: 0.5 }).unwrap();
    inject_spectrum_error(s, &surf).unwrap()
}

fn img(s: &CartesianSpectrum) -> ComplexImage {
    form_image(s, Taper::None)
}

#[test]
fn long_elevated_aperture_matches_hand_geometry() {
    let radar = RadarParams::new(10e9, 600e6, 64, 1760).unwrap();
    let g = make_linear_geometry(&radar, 120.0, 5000.0, 8000.0, 0.0, 1760.0, 1760).unwrap();
    let ground = (8000f64.powi(2) - 5000f64.powi(2)).sqrt();
    let max = g.azimuth.iter().fold(0f64, |m, t| m.max(t.abs()));
    assert!((max - (880f64 / ground).atan()).abs() < 1e-3, "{max}");
    for (k, p) in g.apc.iter().enumerate() {
        let along = 120.0 * g.slow_time.value(k);
        let theta = p[0].atan2(p[1]);
        let phi = p[0].hypot(p[1]).atan2(p[2]);
        assert!((g.azimuth[k] - theta).abs() < 1e-12 && (g.incidence[k] - phi).abs() < 1e-12);
        assert!((p[0] - along).abs() < 1e-9 && (p[1] - ground).abs() < 1e-9 && (p[2] - 5000.0).abs() < 1e-12);
    }
}

#[test]
fn doubling_pulses_halves_spacing_and_keeps_angles() {
    let r1 = RadarParams::new(10e9, 600e6, 64, 800).unwrap();
    let r2 = RadarParams::new(10e9, 600e6, 64, 1600).unwrap();
    let a = make_linear_geometry(&r1, 120.0, 0.0, 8000.0, 0.17, 480.0, 800).unwrap();
    let b = make_linear_geometry(&r2, 120.0, 0.0, 8000.0, 0.17, 480.0, 1600).unwrap();
    assert!((a.slow_time.step / b.slow_time.step - 2.0).abs() < 1e-12);
    for k in 0..800 {
        assert!((a.slow_time.value(k) - b.slow_time.value(2 * k)).abs() < 1e-12);
        assert!((a.azimuth[k] - b.azimuth[2 * k]).abs() < 1e-12);
        assert!((a.range[k] - b.range[2 * k]).abs() < 1e-9);
    }
}

#[test]
fn range_resample_leaves_the_centre_pulse_unchanged() {
    let radar = RadarParams::new(10e9, 600e6, 128, 257).unwrap();
    let geo = make_linear_geometry(&radar, 120.0, 0.0, 8000.0, 0.17, 240.0, 257).unwrap();
    let scene = TargetScene::new(vec![
        PointTarget { x: 3.0, y: -2.0, amplitude: Complex64::new(1.0, 0.0) },
        PointTarget { x: -5.0, y: 4.0, amplitude: Complex64::new(0.0, 0.7) },
    ])
    .unwrap();
    let ph = synth_phase_history(&scene, &geo, &radar, &RangeErrorProfile::zero(257)).unwrap();
    let kernel = SincKernel::new(SincConfig::default());
    let rr = range_resample(&ph, &radar.range_freq_axis(), &kernel).unwrap();
    let c = geo.center_index();
    for j in 0..128 {
        assert!((rr.data[[c, j]] - ph.data[[c, j]]).norm() < 1e-12);
        assert!(rr.coverage[[c, j]]);
    }
}

#[test]
fn centre_target_focuses_at_image_centre_with_sinc_width() {
    let s = centre(N);
    let im = img(&s);
    let (nx, ny) = im.dims();
    let pr = point_response_metrics(&im, (nx / 2, ny / 2), 16, 8).unwrap();
    assert_eq!(pr.peak, (nx / 2, ny / 2));
    let expected = 0.886 * 2.0 * PI / (s.grid.y.step * ny as f64);
    assert!((pr.range.irw / expected - 1.0).abs() < 0.03, "{} vs {expected}", pr.range.irw);
}

#[test]
fn zero_spectrum_gives_zero_image() {
    let g = grid(64);
    let s = CartesianSpectrum::point_targets(&g, &[]);
    assert!(img(&s).data.iter().all(|v| v.norm() == 0.0));
}

#[test]
fn coarse_image_widens_range_only() {
    let s = centre(N);
    let fine = img(&s);
    let coarse = coarse_range_preprocess(&s, 4).unwrap();
    let one = coarse_range_preprocess(&s, 1).unwrap();
    assert!(one.data.iter().zip(fine.data.iter()).all(|(a, b)| a == b));
    let f = point_response_metrics(&fine, (N / 2, N / 2), 16, 8).unwrap();
    let (cx, cy) = coarse.dims();
    let c = point_response_metrics(&coarse, (cx / 2, cy / 2), 16, 8).unwrap();
    assert!((c.range.irw / f.range.irw / 4.0 - 1.0).abs() < 0.02, "{} {}", c.range.irw, f.range.irw);
    assert!((c.azimuth.irw / f.azimuth.irw - 1.0).abs() < 0.02);
    assert!(coarse_range_preprocess(&s, 16).is_err());
    assert!(coarse_range_preprocess(&s, 3).is_err());
}

#[test]
fn three_cell_migration_fits_in_a_coarse_cell() {
    let s = scene();
    let span = s.grid.x.span();
    let amp = 1.5 * s.grid.pixel_y();
    // linear phase in Y shifts range by phi1; a sinusoid gives 3 cells peak-to-peak
    let phi1 = RCMProfile::from_fn(s.grid.x, |x| amp * (2.0 * PI * x / span).sin());
    let e = inject_spectrum_error(&s, &rcm_to_surface(&phi1, &s.grid).unwrap()).unwrap();
    let est = EstimatorConfig::default();
    let fine = measure_residual_rcm(&e, &est).unwrap();
    assert!(fine > 2.5, "{fine}");
    let coarse = measure_residual_rcm(&e.y_band(N / 8).unwrap(), &est).unwrap();
    assert!(coarse < 0.5, "{coarse}");
}

#[test]
fn error_free_ka_output_equals_plain_image() {
    let s = scene();
    let reference = img(&s);
    let (out, _) = ka_autofocus(&s, &PipelineConfig::default()).unwrap();
    let peak = reference.data.iter().fold(0f64, |m, v| m.max(v.norm()));
    let worst = out.data.iter().zip(reference.data.iter()).fold(0f64, |m, (a, b)| m.max((a.norm() - b.norm()).abs()));
    assert!(worst / peak < 1e-6, "{}", worst / peak);
}

#[test]
fn pga_handles_quadratic_error_beyond_its_one_d_limit() {
    let c = scene();
    let s = quadratic(&c, 0.3);
    let cfg = PipelineConfig { mode: Mode::Ka, ..PipelineConfig::default() };
    let (out, _) = autofocus(&s, &cfg).unwrap();
    let e0 = image_entropy(&img(&c)).unwrap();
    let e = image_entropy(&register_to(&img(&c), &out).unwrap()).unwrap();
    assert!((e / e0 - 1.0).abs() < 0.02, "{e} vs {e0}");
}

#[test]
fn plane_error_only_shifts_the_image() {
    let s = scene();
    let y0 = s.grid.y0;
    let (a0, a1) = (2.3, 1.7);
    let plane = PhaseErrorSurface::from_fn(&s.grid, |x, y| a0 / y0 * y + a1 * x);
    let shifted = img(&inject_spectrum_error(&s, &plane).unwrap());
    let reference = img(&s);
    let c = magnitude_correlation(&reference, &register_to(&reference, &shifted).unwrap()).unwrap();
    assert!(c >= 0.999, "{c}");
}

#[test]
fn prior2d_matches_ka_when_high_order_terms_are_small() {
    let c = scene();
    let s = quadratic(&c, 0.6);
    let cfg = PipelineConfig::default();
    let reference = img(&c);
    let (ka, _) = ka_autofocus(&s, &cfg).unwrap();
    let (p2, _) = baseline_prior2d(&s, &cfg).unwrap();
    let ek = image_entropy(&register_to(&reference, &ka).unwrap()).unwrap();
    let ep = image_entropy(&register_to(&reference, &p2).unwrap()).unwrap();
    assert!((ep / ek - 1.0).abs() < 0.01, "{ep} vs {ek}");
    let corr =
        magnitude_correlation(&register_to(&reference, &ka).unwrap(), &register_to(&reference, &p2).unwrap()).unwrap();
    assert!(corr > 0.99, "{corr}");
}

#[test]
fn defocus_raises_entropy() {
    let c = scene();
    let e0 = image_entropy(&img(&c)).unwrap();
    let e1 = image_entropy(&img(&quadratic(&c, 0.3))).unwrap();
    assert!(e1 > e0);
}

#[test]
fn taylor_reconstructs_random_smooth_surfaces() {
    let g = grid(N);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let half = g.x.span() / 2.0;
    for _ in 0..5 {
        let c: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
        let xi = move |u: f64| {
            let t = u / half;
            c[0] * t * t + c[1] * t * t * t + c[2] * (2.0 * t).sin() + c[3] * (3.0 * t).cos()
        };
        let surf = kasar::structure::surface_from_xi(&xi, &g);
        let tc = taylor_decompose(&surf).unwrap();
        let rebuilt = PhaseErrorSurface::from_fn(&g, |x, y| {
            let i = g.x.position(x).round() as usize;
            let d = y - g.y0;
            tc.phi0[i] + tc.phi1[i] * d + tc.phi2[i] * d * d
        });
        let err = surf.sub(&rebuilt).unwrap().rms();
        assert!(err < 1e-3, "{err}");
        assert!(tc.truncation_rms < 1e-3, "{}", tc.truncation_rms);
    }
}
