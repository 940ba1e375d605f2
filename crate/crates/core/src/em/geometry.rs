use nalgebra::Vector2;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// Element and feed layout of the panel. The aperture is centred on the
/// origin of the `xy`-plane and spans `[-width/2, width/2] x [-depth/2, depth/2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PanelGeometry<T: Real> {
    pub width: T,
    pub depth: T,
    /// Waveguide (plate separation) height, m.
    pub height: T,
    pub elements: Vec<Vector2<T>>,
    pub feed: Vector2<T>,
    pub min_spacing: T,
}

impl<T: Real> PanelGeometry<T> {
    pub fn new(
        width: T,
        depth: T,
        height: T,
        elements: Vec<Vector2<T>>,
        feed: Vector2<T>,
        min_spacing: T,
    ) -> Result<Self> {
        let panel = Self { width, depth, height, elements, feed, min_spacing };
        panel.validate()?;
        Ok(panel)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn center(&self) -> Vector2<T> {
        Vector2::zeros()
    }

    pub fn contains(&self, p: &Vector2<T>) -> bool {
        let hw = self.width / lit(2.0);
        let hd = self.depth / lit(2.0);
        p.x.abs() <= hw && p.y.abs() <= hd
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("width", self.width), ("depth", self.depth), ("height", self.height)] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::invalid(format!("panel {name} must be positive, got {v}")));
            }
        }
        if !(self.min_spacing >= T::zero()) {
            return Err(Error::invalid("minimum spacing must be non-negative"));
        }
        if !self.contains(&self.feed) {
            return Err(Error::invalid("feed lies outside the aperture"));
        }
        for (n, r) in self.elements.iter().enumerate() {
            if !(r.x.is_finite() && r.y.is_finite()) || !self.contains(r) {
                return Err(Error::invalid(format!("element {n} lies outside the aperture")));
            }
            if (r - self.feed).norm() <= T::zero() {
                return Err(Error::singular(format!("element {n} coincides with the feed")));
            }
        }
        if let Some((a, b, d)) = self.closest_pair() {
            if d <= T::zero() {
                return Err(Error::singular(format!("elements {a} and {b} coincide")));
            }
            if d < self.min_spacing {
                return Err(Error::invalid(format!(
                    "elements {a} and {b} are {d} m apart, below the minimum spacing {}",
                    self.min_spacing
                )));
            }
        }
        Ok(())
    }

    /// Closest element pair and its distance.
    pub fn closest_pair(&self) -> Option<(usize, usize, T)> {
        let mut best: Option<(usize, usize, T)> = None;
        for a in 0..self.elements.len() {
            for b in a + 1..self.elements.len() {
                let d = (self.elements[a] - self.elements[b]).norm();
                if best.is_none_or(|(_, _, bd)| d < bd) {
                    best = Some((a, b, d));
                }
            }
        }
        best
    }

    /// Same panel with the elements reordered by `perm` (new index `i` takes
    /// old element `perm[i]`).
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let elements = perm.iter().map(|&i| self.elements[i]).collect();
        Self { elements, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn panel(elements: Vec<Vector2<f64>>) -> Result<PanelGeometry<f64>> {
        PanelGeometry::new(0.5, 0.5, 0.003, elements, Vector2::zeros(), 0.004)
    }

    #[test]
    fn accepts_valid_layout() {
        let p = panel(vec![Vector2::new(0.01, 0.0), Vector2::new(0.02, 0.01)]).unwrap();
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn rejects_bad_layouts() {
        assert!(panel(vec![Vector2::new(0.3, 0.0)]).is_err());
        assert!(matches!(panel(vec![Vector2::zeros()]), Err(Error::Singularity(_))));
        assert!(matches!(
            panel(vec![Vector2::new(0.01, 0.0), Vector2::new(0.01, 0.0)]),
            Err(Error::Singularity(_))
        ));
        assert!(panel(vec![Vector2::new(0.01, 0.0), Vector2::new(0.012, 0.0)]).is_err());
    }
}
