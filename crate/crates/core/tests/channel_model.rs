mod common;

use common::{random_moments, scenario};
use nalgebra::DMatrix;
use num_complex::Complex;
use wgms_core::channel::{mean_response, round_trip_channel, simulate_received};

#[test]
fn round_trip_matches_naive_accumulation() {
    let s = scenario(6, 4, 2, 11);
    let tx = s.tx_vectors().unwrap();
    let rx = s.rx_vectors().unwrap();
    let h = s.round_trip().unwrap();
    for m in 0..4 {
        for n in 0..6 {
            let mut acc = Complex::new(0.0, 0.0);
            for u in 0..2 {
                acc += s.targets[u].reflection * rx[u].values[m] * tx[u].values[n].conj();
            }
            assert!((h[(m, n)] - acc).norm() <= 1e-12 * acc.norm().max(1e-300));
        }
    }
    let doubled: Vec<_> = s.reflections().iter().map(|b| b * 2.0).collect();
    let h2 = round_trip_channel(&tx, &rx, &doubled);
    assert!((&h2 - &h * Complex::new(2.0, 0.0)).norm() <= 1e-12 * h.norm());
}

#[test]
fn single_target_channel_is_rank_one() {
    let s = scenario(8, 4, 1, 3);
    let h = s.round_trip().unwrap();
    let sv = h.singular_values();
    assert!(sv[1] <= 1e-12 * sv[0]);
}

#[test]
fn mean_response_matches_triple_product() {
    let s = scenario(5, 4, 2, 7);
    let h = s.round_trip().unwrap();
    let m = random_moments(5, 1e-5, 1);
    let w = &s.rx.combiner;
    let mu = mean_response(w, &h, &m);
    for i in 0..4 {
        let mut acc = Complex::new(0.0, 0.0);
        for a in 0..4 {
            for n in 0..5 {
                acc += w[(a, i)].conj() * h[(a, n)] * m[n];
            }
        }
        assert!((mu[i] - acc).norm() <= 1e-12 * mu.norm());
    }
    let plain = &h * &m;
    assert!(((mu.norm() - plain.norm()) / plain.norm()).abs() < 1e-12);
    let id = mean_response(&DMatrix::identity(4, 4), &h, &m);
    assert_eq!(id, plain);
}

#[test]
fn noiseless_batch_is_rank_one_product() {
    let mut s = scenario(4, 2, 1, 5);
    s.noise_variance = 0.0;
    let m = random_moments(4, 1e-5, 2);
    let y = simulate_received(&s, &m, 9).unwrap();
    let mu = mean_response(&s.rx.combiner, &s.round_trip().unwrap(), &m);
    let p = s.pilot_power.sqrt();
    for t in 0..s.pilots {
        for r in 0..2 {
            assert_eq!(y[(r, t)], mu[r] * p);
        }
    }
}

#[test]
fn noise_statistics_and_determinism() {
    let mut s = scenario(4, 4, 1, 5);
    s.pilots = 2500;
    let m = random_moments(4, 1e-5, 2);
    let y = simulate_received(&s, &m, 77).unwrap();
    assert_eq!(y, simulate_received(&s, &m, 77).unwrap());
    assert_ne!(y, simulate_received(&s, &m, 78).unwrap());
    let mu = mean_response(&s.rx.combiner, &s.round_trip().unwrap(), &m);
    let p = s.pilot_power.sqrt();
    let mut acc = 0.0;
    let mut count = 0usize;
    let mut mean = Complex::new(0.0, 0.0);
    for t in 0..s.pilots {
        for r in 0..4 {
            let e = y[(r, t)] - mu[r] * p;
            acc += e.norm_sqr();
            mean += e;
            count += 1;
        }
    }
    assert_eq!(count, 10_000);
    let var = acc / count as f64;
    assert!((var / s.noise_variance - 1.0).abs() < 0.05, "variance ratio {}", var / s.noise_variance);
    assert!((mean / count as f64).norm() < 0.05 * s.noise_variance.sqrt());
}

#[test]
fn scenario_validation() {
    let s = scenario(2, 2, 2, 1);
    let mut bad = s.clone();
    bad.noise_variance = 0.0;
    assert!(bad.validate().is_err());
    let mut bad = s.clone();
    bad.pilots = 0;
    assert!(bad.validate().is_err());
    let mut bad = s.clone();
    bad.targets.push(bad.targets[0]);
    assert!(bad.validate().is_err());
    let mut bad = s.clone();
    bad.damping.pop();
    assert!(bad.validate().is_err());
}
