use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform mesh on [0, L] with `N >= 3` nodes, `x_j = j·Δx`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct Grid1D {
    length: f64,
    nodes: usize,
    spacing: f64,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    length: f64,
    nodes: usize,
}

impl TryFrom<GridRepr> for Grid1D {
    type Error = Error;
    fn try_from(r: GridRepr) -> Result<Self> {
        Grid1D::new(r.length, r.nodes)
    }
}

impl From<Grid1D> for GridRepr {
    fn from(g: Grid1D) -> Self {
        GridRepr {
            length: g.length,
            nodes: g.nodes,
        }
    }
}

impl Grid1D {
    pub fn new(length: f64, nodes: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::invalid(format!("grid length must be positive, got {length}")));
        }
        if nodes < 3 {
            return Err(Error::invalid(format!("grid needs at least 3 nodes, got {nodes}")));
        }
        Ok(Self {
            length,
            nodes,
            spacing: length / (nodes - 1) as f64,
        })
    }

    /// Grid on [0, L] with the node count chosen so that Δx equals `dx`
    /// (L/dx must be an integer up to roundoff).
    pub fn with_spacing(length: f64, dx: f64) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::invalid(format!("grid spacing must be positive, got {dx}")));
        }
        let cells = (length / dx).round();
        if ((cells * dx - length) / length).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "spacing {dx} does not divide the length {length}"
            )));
        }
        Self::new(length, cells as usize + 1)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.nodes
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        if j + 1 == self.nodes {
            self.length
        } else {
            j as f64 * self.spacing
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.nodes).map(move |j| self.x(j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert!(Grid1D::new(1.0, 2).is_err());
        assert!(Grid1D::new(0.0, 10).is_err());
        assert!(Grid1D::new(f64::NAN, 10).is_err());
        assert!(Grid1D::with_spacing(1.0, 0.3).is_err());
    }

    #[test]
    fn spacing_constructor() {
        let g = Grid1D::with_spacing(400.0, 0.2).unwrap();
        assert_eq!(g.len(), 2001);
        assert_eq!(g.x(2000), 400.0);
    }

    #[test]
    fn serde_validates() {
        let g: Grid1D = serde_json::from_str(r#"{"length": 4.0, "nodes": 5}"#).unwrap();
        assert_eq!(g.spacing(), 1.0);
        assert!(serde_json::from_str::<Grid1D>(r#"{"length": 4.0, "nodes": 1}"#).is_err());
    }

    proptest! {
        #[test]
        fn nodes_are_increasing_and_span_the_interval(length in 1e-3f64..1e4, nodes in 3usize..5000) {
            let g = Grid1D::new(length, nodes).unwrap();
            let xs: Vec<f64> = g.nodes().collect();
            prop_assert_eq!(xs[0], 0.0);
            prop_assert_eq!(xs[nodes - 1], length);
            prop_assert!(xs.windows(2).all(|w| w[1] > w[0]));
            let span = g.spacing() * (nodes - 1) as f64;
            prop_assert!((span - length).abs() <= 4.0 * f64::EPSILON * length);
        }
    }
}
