//! Scalar fields sampled on a mesh.

use super::mesh::Mesh;
use crate::geom::Point2;
use crate::{Error, Result};
use std::sync::Arc;

/// A scalar function given by one value per interior mesh node.
#[derive(Debug, Clone)]
pub struct GridField {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.len() {
            return Err(Error::MeshTooCoarse(format!(
                "field length {} does not match mesh size {}",
                values.len(),
                mesh.len()
            )));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::ExponentOverflow);
        }
        Ok(GridField { mesh, values })
    }

    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        let n = mesh.len();
        GridField {
            mesh,
            values: vec![0.0; n],
        }
    }

    /// Samples `f` at every node.
    pub fn from_fn(mesh: Arc<Mesh>, f: impl Fn(Point2) -> f64) -> Result<Self> {
        let values = mesh.points().iter().map(|&p| f(p)).collect();
        GridField::new(mesh, values)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index and value of the entry with largest magnitude (lowest index on
    /// ties).
    pub fn argmax_abs(&self) -> (usize, f64) {
        let mut best = (0usize, 0.0f64);
        for (i, &v) in self.values.iter().enumerate() {
            if v.abs() > best.1.abs() {
                best = (i, v);
            }
        }
        best
    }

    pub fn max_abs(&self) -> f64 {
        self.argmax_abs().1.abs()
    }

    /// Bilinear interpolation at `p`.
    pub fn interp(&self, p: Point2) -> f64 {
        self.mesh.interp(&self.values, p)
    }

    pub fn scaled(&self, s: f64) -> GridField {
        GridField {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::DomainSpec;
    use crate::pde::build_mesh;

    #[test]
    fn rejects_non_finite_values() {
        let mesh = Arc::new(build_mesh(&DomainSpec::UnitDisc, 1.0 / 16.0).unwrap());
        let mut vals = vec![0.0; mesh.len()];
        vals[3] = f64::NAN;
        assert!(GridField::new(mesh, vals).is_err());
    }

    #[test]
    fn argmax_prefers_lowest_index_on_ties() {
        let mesh = Arc::new(build_mesh(&DomainSpec::UnitDisc, 1.0 / 16.0).unwrap());
        let mut vals = vec![0.0; mesh.len()];
        vals[5] = -2.0;
        vals[10] = 2.0;
        let f = GridField::new(mesh, vals).unwrap();
        assert_eq!(f.argmax_abs(), (5, -2.0));
    }
}
