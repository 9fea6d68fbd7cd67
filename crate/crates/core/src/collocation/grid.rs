//! Finite-element mesh over the normalized horizon [0, 1].

use super::basis::{
    differentiation_matrix, quadrature_weights, radau_points, CollocationError,
};

/// Uniform finite-element grid with Radau IIA collocation points.
///
/// Element boundaries and collocation points live in normalized time; each
/// control interval covers `elements_per_interval` consecutive elements.
#[derive(Clone, Debug)]
pub struct CollocationGrid {
    pub n_elements: usize,
    pub degree: usize,
    /// `n_elements + 1` strictly increasing boundaries, first 0, last 1.
    pub element_boundaries: Vec<f64>,
    /// Radau points on the unit element, last exactly 1.
    pub points: Vec<f64>,
    /// Quadrature weights matching `points`.
    pub weights: Vec<f64>,
    /// `(degree + 1) x degree` Lagrange derivative matrix over `{0} ∪ points`.
    pub diff_matrix: Vec<Vec<f64>>,
    pub elements_per_interval: usize,
}

impl CollocationGrid {
    /// Uniform grid: `n_intervals` control intervals, each holding
    /// `elements_per_interval` equal elements of degree `degree`.
    pub fn uniform(
        n_intervals: usize,
        elements_per_interval: usize,
        degree: usize,
    ) -> Result<Self, CollocationError> {
        if n_intervals == 0 || elements_per_interval == 0 {
            return Err(CollocationError::MisalignedGrid(
                "need at least one control interval and one element per interval".into(),
            ));
        }
        let n_elements = n_intervals * elements_per_interval;
        let points = radau_points(degree)?;
        let weights = quadrature_weights(&points)?;
        let diff_matrix = differentiation_matrix(&points)?;
        let element_boundaries: Vec<f64> =
            (0..=n_elements).map(|e| e as f64 / n_elements as f64).collect();
        Ok(CollocationGrid {
            n_elements,
            degree,
            element_boundaries,
            points,
            weights,
            diff_matrix,
            elements_per_interval,
        })
    }

    pub fn n_intervals(&self) -> usize {
        self.n_elements / self.elements_per_interval
    }

    /// Width of element `e` in normalized time.
    pub fn element_width(&self, e: usize) -> f64 {
        self.element_boundaries[e + 1] - self.element_boundaries[e]
    }

    /// Control interval owning element `e`.
    pub fn interval_of_element(&self, e: usize) -> usize {
        e / self.elements_per_interval
    }

    /// Normalized time of collocation point `k` in element `e`.
    pub fn point_time(&self, e: usize, k: usize) -> f64 {
        self.element_boundaries[e] + self.element_width(e) * self.points[k]
    }

    /// Validate that element boundaries align with control-interval
    /// boundaries (each interval holds an integer number of elements).
    pub fn check_alignment(&self) -> Result<(), CollocationError> {
        if self.n_elements % self.elements_per_interval != 0 {
            return Err(CollocationError::MisalignedGrid(format!(
                "{} elements do not divide into intervals of {} elements",
                self.n_elements, self.elements_per_interval
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_boundaries_and_ownership() {
        let g = CollocationGrid::uniform(3, 2, 3).unwrap();
        assert_eq!(g.n_elements, 6);
        assert_eq!(g.element_boundaries.first(), Some(&0.0));
        assert_eq!(g.element_boundaries.last(), Some(&1.0));
        assert_eq!(g.interval_of_element(0), 0);
        assert_eq!(g.interval_of_element(1), 0);
        assert_eq!(g.interval_of_element(2), 1);
        assert_eq!(g.n_intervals(), 3);
        g.check_alignment().unwrap();
    }

    #[test]
    fn point_times_increase_and_end_on_boundary() {
        let g = CollocationGrid::uniform(2, 1, 3).unwrap();
        let mut prev = 0.0;
        for e in 0..g.n_elements {
            for k in 0..g.degree {
                let t = g.point_time(e, k);
                assert!(t > prev);
                prev = t;
            }
            assert!((g.point_time(e, g.degree - 1) - g.element_boundaries[e + 1]).abs() < 1e-15);
        }
    }
}
