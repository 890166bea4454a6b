use kasar::io::dataset::{
    load_image, load_phase_history, load_spectrum, load_surface, save_image, save_phase_history, save_spectrum,
    save_surface,
};
use kasar::io::metrics::{image_contrast, image_entropy, point_response_metrics};
use kasar::io::{Config, Provenance};
use kasar::pfa::{form_image, CartesianGrid, CartesianSpectrum, ComplexImage, Taper};
use kasar::sim::SPEED_OF_LIGHT;
use kasar::structure::PhaseErrorSurface;
use kasar::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn image(x: f64, y: f64) -> ComplexImage {
    let g = CartesianGrid::synthetic(10e9, 1.0, SPEED_OF_LIGHT, 64, 0.2, 48, 0.25);
    let s = CartesianSpectrum::point_targets(
        &g,
        &[(x, y, Complex64::new(1.0, 0.0)), (-x, 0.5 * y, Complex64::new(0.4, 1.0))],
    );
    form_image(&s, Taper::Hann)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn metrics_ignore_phase_and_gain(x in -5.0..5.0f64, y in -4.0..4.0f64, rot in -3.1..3.1f64, gain in 1e-3..1e3f64) {
        let a = image(x, y);
        let b = ComplexImage { data: a.data.mapv(|v| v * Complex64::from_polar(gain, rot)), ..a.clone() };
        prop_assert!(rel(image_entropy(&b).unwrap(), image_entropy(&a).unwrap()) < 1e-12);
        prop_assert!(rel(image_contrast(&b).unwrap(), image_contrast(&a).unwrap()) < 1e-12);
        let near = a.pixel_of(x, y);
        let (pa, pb) = (point_response_metrics(&a, near, 8, 8).unwrap(), point_response_metrics(&b, near, 8, 8).unwrap());
        prop_assert!(rel(pb.azimuth.irw, pa.azimuth.irw) < 1e-9 && rel(pb.range.irw, pa.range.irw) < 1e-9);
        prop_assert!((pb.azimuth.pslr - pa.azimuth.pslr).abs() < 1e-9 && (pb.range.pslr - pa.range.pslr).abs() < 1e-9);
    }
}

#[test]
fn datasets_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let prov = Provenance::from_config_text("seed = 3\n");
    let mut cfg = Config::default();
    cfg.radar.range_freq_samples = 32;
    cfg.radar.pulse_count = 40;
    let ph = cfg.simulate().unwrap();
    let p = dir.path().join("ph.kds");
    save_phase_history(&p, &ph, &prov).unwrap();
    assert_eq!(load_phase_history(&p).unwrap(), ph);

    let img = image(1.3, -0.7);
    let s = kasar::pfa::unform_image(&img);
    save_spectrum(&dir.path().join("s.kds"), &s, &prov).unwrap();
    let back = load_spectrum(&dir.path().join("s.kds")).unwrap();
    assert_eq!(back.data, s.data);
    assert_eq!(back.coverage, s.coverage);
    save_image(&dir.path().join("i.kds"), &img, &prov).unwrap();
    assert_eq!(load_image(&dir.path().join("i.kds")).unwrap(), img);

    let mut surf = PhaseErrorSurface::from_fn(&img.grid, |x, y| x * 0.1 - y * 1e-3);
    surf.valid[[3, 4]] = false;
    surf.values[[3, 4]] = 0.0;
    save_surface(&dir.path().join("e.kds"), &surf, &prov).unwrap();
    assert_eq!(load_surface(&dir.path().join("e.kds")).unwrap(), surf);
}

#[test]
fn wrong_kind_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("i.kds");
    save_image(&p, &image(1.0, 1.0), &Provenance::default()).unwrap();
    assert!(matches!(load_spectrum(&p), Err(Error::KindMismatch { .. })));
}

#[test]
fn identical_writes_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let img = image(0.4, 2.2);
    let prov = Provenance::from_config_text("x");
    let (a, b) = (dir.path().join("a.kds"), dir.path().join("b.kds"));
    save_image(&a, &img, &prov).unwrap();
    save_image(&b, &img, &prov).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
