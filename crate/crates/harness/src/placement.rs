//! Element layouts on the aperture: uniform random, a near-square lattice and
//! a Gaussian cluster around the aperture center.

use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use wgms_core::em::PanelGeometry;

use crate::config::PlacementKind;
use crate::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlacementSpec {
    pub kind: PlacementKind,
    pub elements: usize,
    pub width: f64,
    pub depth: f64,
    /// Waveguide height of the returned panel.
    pub height: f64,
    pub min_spacing: f64,
    pub feed: Vector2<f64>,
    /// No element closer than this to the feed.
    pub feed_exclusion: f64,
    /// Candidate draws allowed for the whole layout.
    pub max_attempts: usize,
    pub seed: u64,
}

fn placement_error(msg: impl Into<String>) -> HarnessError {
    HarnessError::Placement(msg.into())
}

/// Upper bound on the number of disks of diameter `d` whose centers fit in
/// the `w x h` rectangle, from the hexagonal packing density.
pub fn packing_capacity(width: f64, depth: f64, spacing: f64) -> f64 {
    if spacing <= 0.0 {
        return f64::INFINITY;
    }
    (width + spacing) * (depth + spacing) * 2.0 / (3f64.sqrt() * spacing * spacing)
}

pub fn generate_placement(spec: &PlacementSpec) -> Result<PanelGeometry<f64>> {
    let n = spec.elements;
    if n == 0 {
        return Err(placement_error("at least one element is required"));
    }
    let capacity = packing_capacity(spec.width, spec.depth, spec.min_spacing);
    if n as f64 > capacity {
        return Err(placement_error(format!(
            "{n} elements cannot keep a spacing of {:.4e} m inside {} m x {} m (at most {capacity:.0})",
            spec.min_spacing, spec.width, spec.depth
        )));
    }
    let elements = match spec.kind {
        PlacementKind::Random => {
            let (hw, hd) = (spec.width / 2.0, spec.depth / 2.0);
            rejection(spec, |rng| Vector2::new(rng.random_range(-hw..=hw), rng.random_range(-hd..=hd)))?
        }
        PlacementKind::GaussianCluster { variance_m2 } => {
            let normal = Normal::new(0.0, variance_m2.sqrt()).map_err(|e| placement_error(e.to_string()))?;
            rejection(spec, |rng| Vector2::new(normal.sample(rng), normal.sample(rng)))?
        }
        PlacementKind::UniformGrid => grid(spec)?,
    };
    PanelGeometry::new(spec.width, spec.depth, spec.height, elements, spec.feed, spec.min_spacing)
        .map_err(|e| placement_error(e.to_string()))
}

/// Raw cluster draws before any rejection, as used by the generator.
pub fn gaussian_draws(variance_m2: f64, count: usize, seed: u64) -> Vec<Vector2<f64>> {
    let normal = Normal::new(0.0, variance_m2.sqrt()).expect("positive variance");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| Vector2::new(normal.sample(&mut rng), normal.sample(&mut rng))).collect()
}

fn inside(spec: &PlacementSpec, p: &Vector2<f64>) -> bool {
    p.x.abs() <= spec.width / 2.0 && p.y.abs() <= spec.depth / 2.0
}

fn admissible(spec: &PlacementSpec, placed: &[Vector2<f64>], p: &Vector2<f64>) -> bool {
    inside(spec, p)
        && (p - spec.feed).norm() >= spec.feed_exclusion
        && *p != spec.feed
        && placed.iter().all(|q| (q - p).norm() >= spec.min_spacing)
}

fn rejection(spec: &PlacementSpec, mut draw: impl FnMut(&mut ChaCha8Rng) -> Vector2<f64>) -> Result<Vec<Vector2<f64>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut placed = Vec::with_capacity(spec.elements);
    for _ in 0..spec.max_attempts {
        let p = draw(&mut rng);
        if admissible(spec, &placed, &p) {
            placed.push(p);
            if placed.len() == spec.elements {
                return Ok(placed);
            }
        }
    }
    Err(placement_error(format!(
        "{} placement gave up after {} attempts with {} of {} elements placed",
        spec.kind,
        spec.max_attempts,
        placed.len(),
        spec.elements
    )))
}

/// `r = ceil(sqrt(N))` rows and `c = ceil(N / r)` columns of cell centers,
/// filled row-major. A lattice point inside the feed exclusion is pushed
/// along +y to just outside it.
fn grid(spec: &PlacementSpec) -> Result<Vec<Vector2<f64>>> {
    let n = spec.elements;
    let rows = (n as f64).sqrt().ceil() as usize;
    let cols = n.div_ceil(rows);
    let (px, py) = (spec.width / cols as f64, spec.depth / rows as f64);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let (r, c) = (k / cols, k % cols);
        let mut p = Vector2::new(-spec.width / 2.0 + (c as f64 + 0.5) * px, -spec.depth / 2.0 + (r as f64 + 0.5) * py);
        let d = p - spec.feed;
        let clear = spec.feed_exclusion * (1.0 + 1e-9);
        if d.norm() < clear || d.norm() == 0.0 {
            let dy = (clear * clear - d.x * d.x).max(0.0).sqrt();
            p.y = spec.feed.y + dy.max(clear * 1e-9);
        }
        if !admissible(spec, &out, &p) {
            return Err(placement_error(format!(
                "a {rows} x {cols} lattice of {n} elements violates the spacing or feed constraints"
            )));
        }
        out.push(p);
    }
    Ok(out)
}
