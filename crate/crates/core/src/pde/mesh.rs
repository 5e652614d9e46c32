//! Cartesian interior meshes with Shortley-Weller boundary cuts.
//!
//! Nodes are lattice points strictly inside the domain. Each node stores
//! its four arm lengths (west, east, south, north): `h` toward an interior
//! neighbor, the cut distance to the boundary otherwise. Rectangles demand
//! an exact lattice fit so every arm is `h`.

use crate::geom::{DomainSpec, Point2};
use crate::{Error, Result};
use std::collections::HashMap;

pub const W: usize = 0;
pub const E: usize = 1;
pub const S: usize = 2;
pub const N: usize = 3;

const NO_NEIGHBOR: u32 = u32::MAX;

#[derive(Debug)]
pub struct Mesh {
    pub domain: DomainSpec,
    pub h: f64,
    points: Vec<Point2>,
    index: HashMap<(i32, i32), u32>,
    arms: Vec<[f64; 4]>,
    neighbors: Vec<[u32; 4]>,
    cell_area: Vec<f64>,
    /// Half-bandwidth of the five-point adjacency under this node ordering.
    pub bandwidth: usize,
    /// Lattice origin in physical coordinates.
    origin: Point2,
}

impl Mesh {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> Point2 {
        self.points[i]
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn arms(&self, i: usize) -> [f64; 4] {
        self.arms[i]
    }

    pub fn neighbor(&self, i: usize, dir: usize) -> Option<usize> {
        let n = self.neighbors[i][dir];
        (n != NO_NEIGHBOR).then_some(n as usize)
    }

    /// Cell area (aW+aE)(aS+aN)/4; the nodal quadrature weight and the
    /// diagonal of the discrete inner product.
    pub fn area(&self, i: usize) -> f64 {
        self.cell_area[i]
    }

    pub fn areas(&self) -> &[f64] {
        &self.cell_area
    }

    /// Nodes with at least one boundary-cut arm.
    pub fn near_boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.neighbors[i].iter().any(|&n| n == NO_NEIGHBOR))
    }

    pub fn node_at(&self, li: i32, lj: i32) -> Option<usize> {
        self.index.get(&(li, lj)).map(|&k| k as usize)
    }

    /// Index of the mesh node nearest to `p`.
    pub fn nearest_node(&self, p: Point2) -> usize {
        let fi = (p.x - self.origin.x) / self.h;
        let fj = (p.y - self.origin.y) / self.h;
        let (ci, cj) = (fi.round() as i32, fj.round() as i32);
        let mut best = usize::MAX;
        let mut best_d = f64::INFINITY;
        for r in 0..4i32 {
            for di in -r..=r {
                for dj in -r..=r {
                    if di.abs() != r && dj.abs() != r {
                        continue;
                    }
                    if let Some(k) = self.node_at(ci + di, cj + dj) {
                        let d = self.points[k].dist(p);
                        if d < best_d {
                            best_d = d;
                            best = k;
                        }
                    }
                }
            }
            if best != usize::MAX {
                return best;
            }
        }
        // pathological fallback: linear scan
        (0..self.len())
            .min_by(|&a, &b| {
                self.points[a]
                    .dist(p)
                    .total_cmp(&self.points[b].dist(p))
            })
            .expect("mesh has nodes")
    }

    /// Bilinear interpolation of nodal values at `p`; lattice corners
    /// outside the node set contribute the Dirichlet value 0.
    pub fn interp(&self, values: &[f64], p: Point2) -> f64 {
        let fi = (p.x - self.origin.x) / self.h;
        let fj = (p.y - self.origin.y) / self.h;
        let (i0, j0) = (fi.floor() as i32, fj.floor() as i32);
        let (tx, ty) = (fi - i0 as f64, fj - j0 as f64);
        let mut acc = 0.0;
        for (di, dj, w) in [
            (0, 0, (1.0 - tx) * (1.0 - ty)),
            (1, 0, tx * (1.0 - ty)),
            (0, 1, (1.0 - tx) * ty),
            (1, 1, tx * ty),
        ] {
            if let Some(k) = self.node_at(i0 + di, j0 + dj) {
                acc += w * values[k];
            }
        }
        acc
    }
}

/// Builds the interior mesh at target spacing `h`.
pub fn build_mesh(domain: &DomainSpec, h: f64) -> Result<Mesh> {
    domain.validate()?;
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::ResolutionInvalid("h must be positive".into()));
    }
    if h > domain.diameter() / 16.0 {
        return Err(Error::ResolutionInvalid(format!(
            "h = {h} exceeds diameter/16 = {}",
            domain.diameter() / 16.0
        )));
    }

    let mut points = Vec::new();
    let mut lattice = Vec::new();
    let origin;
    match *domain {
        DomainSpec::UnitDisc | DomainSpec::Disc { .. } => {
            let (a, c) = domain.disc_params().unwrap();
            origin = c;
            let nmax = (a / h).ceil() as i32 + 1;
            let r2max = a * a * (1.0 - 1e-13);
            for j in -nmax..=nmax {
                for i in -nmax..=nmax {
                    let p = Point2::new(i as f64 * h, j as f64 * h);
                    if p.norm_sq() < r2max {
                        lattice.push((i, j));
                        points.push(c + p);
                    }
                }
            }
        }
        DomainSpec::Rectangle { width, height } => {
            origin = Point2::ORIGIN;
            let nx = width / h;
            let ny = height / h;
            if (nx - nx.round()).abs() > 1e-9 * nx || (ny - ny.round()).abs() > 1e-9 * ny {
                return Err(Error::ResolutionInvalid(format!(
                    "h = {h} does not divide the rectangle sides {width} x {height}"
                )));
            }
            let (nx, ny) = (nx.round() as i32, ny.round() as i32);
            for j in 1..ny {
                for i in 1..nx {
                    lattice.push((i, j));
                    points.push(Point2::new(i as f64 * h, j as f64 * h));
                }
            }
        }
    }
    if points.len() < 9 {
        return Err(Error::ResolutionInvalid(format!(
            "only {} interior nodes",
            points.len()
        )));
    }

    let index: HashMap<(i32, i32), u32> = lattice
        .iter()
        .enumerate()
        .map(|(k, &ij)| (ij, k as u32))
        .collect();

    let mut arms = vec![[h; 4]; points.len()];
    let mut neighbors = vec![[NO_NEIGHBOR; 4]; points.len()];
    let mut bandwidth = 0usize;
    let dirs = [(-1i32, 0i32), (1, 0), (0, -1), (0, 1)];
    for k in 0..points.len() {
        let (i, j) = lattice[k];
        for (d, (di, dj)) in dirs.iter().enumerate() {
            if let Some(&nk) = index.get(&(i + di, j + dj)) {
                neighbors[k][d] = nk;
                bandwidth = bandwidth.max(k.abs_diff(nk as usize));
            } else {
                // Shortley-Weller cut: distance to the boundary along the axis
                let p = points[k];
                let cut = match *domain {
                    DomainSpec::UnitDisc | DomainSpec::Disc { .. } => {
                        let (a, c) = domain.disc_params().unwrap();
                        let q = p - c;
                        if *di != 0 {
                            let xb = (a * a - q.y * q.y).max(0.0).sqrt() * (*di as f64);
                            (xb - q.x).abs()
                        } else {
                            let yb = (a * a - q.x * q.x).max(0.0).sqrt() * (*dj as f64);
                            (yb - q.y).abs()
                        }
                    }
                    DomainSpec::Rectangle { .. } => h,
                };
                // guard against degenerate zero-length arms
                arms[k][d] = cut.max(1e-12 * h);
            }
        }
    }

    let cell_area = (0..points.len())
        .map(|k| (arms[k][W] + arms[k][E]) * (arms[k][S] + arms[k][N]) / 4.0)
        .collect();

    Ok(Mesh {
        domain: *domain,
        h,
        points,
        index,
        arms,
        neighbors,
        cell_area,
        bandwidth,
        origin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_coarse_rejected() {
        assert!(matches!(
            build_mesh(&DomainSpec::UnitDisc, 0.5),
            Err(Error::ResolutionInvalid(_))
        ));
    }

    #[test]
    fn rectangle_lattice_counts() {
        let m = build_mesh(
            &DomainSpec::Rectangle {
                width: 1.0,
                height: 1.0,
            },
            1.0 / 64.0,
        )
        .unwrap();
        assert_eq!(m.len(), 63 * 63);
        // all arms exactly h
        for k in 0..m.len() {
            for a in m.arms(k) {
                assert_eq!(a, m.h);
            }
        }
    }

    #[test]
    fn rectangle_requires_exact_fit() {
        assert!(matches!(
            build_mesh(
                &DomainSpec::Rectangle {
                    width: 1.0,
                    height: 1.0
                },
                0.0157
            ),
            Err(Error::ResolutionInvalid(_))
        ));
    }

    #[test]
    fn disc_node_count_tracks_area() {
        // the lattice count deviates from area/h² by a boundary term O(1/h)
        for h in [1.0 / 32.0, 1.0 / 64.0] {
            let m = build_mesh(&DomainSpec::UnitDisc, h).unwrap();
            let expect = std::f64::consts::PI / (h * h);
            let dev = (m.len() as f64 - expect).abs();
            assert!(
                dev < 6.0 / h,
                "h={h}: count {} vs area estimate {expect}",
                m.len()
            );
            assert!((m.len() as f64 - expect).abs() / expect < 0.02);
        }
        // frozen generator counts at the two calibration resolutions
        assert_eq!(
            build_mesh(&DomainSpec::UnitDisc, 1.0 / 32.0).unwrap().len(),
            3205
        );
        assert_eq!(
            build_mesh(&DomainSpec::UnitDisc, 1.0 / 64.0).unwrap().len(),
            12849
        );
    }

    #[test]
    fn disc_arms_touch_circle() {
        let m = build_mesh(&DomainSpec::UnitDisc, 1.0 / 32.0).unwrap();
        for k in m.near_boundary_nodes() {
            let p = m.point(k);
            let arms = m.arms(k);
            for (d, (dx, dy)) in [(-1.0, 0.0), (1.0, 0.0), (0.0, -1.0), (0.0, 1.0)]
                .iter()
                .enumerate()
            {
                if m.neighbor(k, d).is_none() {
                    let b = p + Point2::new(dx * arms[d], dy * arms[d]);
                    assert!(
                        (b.norm() - 1.0).abs() < 1e-10,
                        "cut arm does not reach the circle"
                    );
                    assert!(arms[d] <= m.h * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn interpolation_reproduces_linear_fields() {
        let m = build_mesh(&DomainSpec::UnitDisc, 1.0 / 32.0).unwrap();
        let vals: Vec<f64> = m.points().iter().map(|p| 2.0 * p.x - 0.5 * p.y).collect();
        let q = Point2::new(0.213, -0.117);
        let got = m.interp(&vals, q);
        assert!((got - (2.0 * q.x - 0.5 * q.y)).abs() < 1e-12);
    }

    #[test]
    fn nearest_node_is_nearest() {
        let m = build_mesh(&DomainSpec::UnitDisc, 1.0 / 16.0).unwrap();
        let p = Point2::new(0.4301, 0.2199);
        let k = m.nearest_node(p);
        let d = m.point(k).dist(p);
        for i in 0..m.len() {
            assert!(m.point(i).dist(p) >= d - 1e-15);
        }
    }
}
