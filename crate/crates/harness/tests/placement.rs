use proptest::prelude::*;
use wgms_harness::config::{Config, PlacementKind};
use wgms_harness::placement::{gaussian_draws, generate_placement};

const KINDS: [PlacementKind; 4] = [
    PlacementKind::Random,
    PlacementKind::UniformGrid,
    PlacementKind::GaussianCluster { variance_m2: 0.05 },
    PlacementKind::GaussianCluster { variance_m2: 0.25 },
];

fn min_distance(points: &[nalgebra::Vector2<f64>]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..points.len() {
        for j in 0..i {
            best = best.min((points[i] - points[j]).norm());
        }
    }
    best
}

#[test]
fn reference_layouts_keep_quarter_wavelength_spacing() {
    let c = Config::default();
    let lam = c.wavelength();
    for kind in KINDS {
        for n in [1, 16, 64, 256, 512] {
            let p = generate_placement(&c.placement_spec(kind, n, 99)).unwrap();
            assert_eq!(p.len(), n);
            assert!(min_distance(&p.elements) >= lam / 4.0, "{kind} N={n}");
            for e in &p.elements {
                assert!(e.norm() >= lam / 4.0, "{kind} N={n}: element inside the feed exclusion");
                assert!(e.x.abs() <= 0.25 && e.y.abs() <= 0.25);
            }
        }
    }
}

#[test]
fn odd_grid_shifts_the_center_point_off_the_feed() {
    let c = Config::default();
    let lam = c.wavelength();
    // 23 x 23 lattice, the 265th point sits on the feed
    let p = generate_placement(&c.placement_spec(PlacementKind::UniformGrid, 512, 0)).unwrap();
    let shifted = p.elements[11 * 23 + 11];
    assert!(shifted.x.abs() < 1e-15);
    assert!((shifted.y - lam / 4.0).abs() < 1e-9 * lam);
}

#[test]
fn gaussian_per_axis_variance() {
    for seed in [1, 2, 3] {
        let draws = gaussian_draws(0.05, 1000, seed);
        for axis in 0..2 {
            let v: Vec<f64> = draws.iter().map(|p| p[axis]).collect();
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
            assert!((var / 0.05 - 1.0).abs() <= 0.15, "seed {seed} axis {axis}: {var}");
        }
    }
}

#[test]
fn narrow_cluster_concentrates_elements() {
    let c = Config::default();
    let spread = |kind| {
        let p = generate_placement(&c.placement_spec(kind, 64, 5)).unwrap();
        p.elements.iter().map(|e| e.norm_squared()).sum::<f64>() / 64.0
    };
    assert!(spread(PlacementKind::GaussianCluster { variance_m2: 0.05 }) < spread(PlacementKind::Random));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn generated_layouts_are_valid(kind in 0usize..4, n in 1usize..200, seed in any::<u64>()) {
        let c = Config::default();
        let p = generate_placement(&c.placement_spec(KINDS[kind], n, seed)).unwrap();
        prop_assert!(p.validate().is_ok());
        prop_assert_eq!(p.len(), n);
        prop_assert!(min_distance(&p.elements) >= c.wavelength() / 4.0);
    }
}
