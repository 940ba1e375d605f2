#![allow(dead_code)]

use nalgebra::{DVector, Vector2, Vector3};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wgms_core::channel::{random_dft_combiner, RxArray, Scenario, Target};
use wgms_core::em::{OperatingPoint, PanelGeometry};

pub const FREQ: f64 = 20e9;

/// Random element layout inside a 0.5 m square, away from the centre feed.
pub fn random_elements(n: usize, seed: u64) -> Vec<Vector2<f64>> {
    let lam = OperatingPoint::new(FREQ).unwrap().wavelength;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vector2<f64>> = Vec::with_capacity(n);
    while out.len() < n {
        let p = Vector2::new(rng.random_range(-0.25..0.25), rng.random_range(-0.25..0.25));
        if p.norm() < lam / 4.0 || out.iter().any(|q| (q - p).norm() < lam / 4.0) {
            continue;
        }
        out.push(p);
    }
    out
}

pub fn scenario(n: usize, m: usize, u: usize, seed: u64) -> Scenario<f64> {
    let op = OperatingPoint::new(FREQ).unwrap();
    let lam = op.wavelength;
    let panel = PanelGeometry::new(0.5, 0.5, lam / 5.0, random_elements(n, seed), Vector2::zeros(), lam / 4.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let positions = [Vector3::new(5.4, 5.3, 4.0), Vector3::new(7.1, 3.5, 5.25)];
    let targets = positions[..u]
        .iter()
        .map(|p| Target::new(*p, Complex::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))).unwrap())
        .collect();
    let rows = (1..=m).filter(|r| m.is_multiple_of(*r) && r * r <= m).max().unwrap();
    let rx = RxArray::uniform_planar(Vector3::new(10.0, 5.0, 5.0), rows, m / rows, lam, Vector3::z(), Vector3::y())
        .unwrap()
        .with_combiner(random_dft_combiner(m, seed))
        .unwrap();
    let s = Scenario {
        damping: vec![op.omega / 100.0; n],
        op,
        panel,
        targets,
        rx,
        noise_variance: 1e-11,
        pilots: 100,
        pilot_power: 1.2589254117941675e-3,
    };
    s.validate().unwrap();
    s
}

pub fn random_moments(n: usize, scale: f64, seed: u64) -> DVector<Complex<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DVector::from_fn(n, |_, _| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * scale)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
