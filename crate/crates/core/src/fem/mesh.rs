use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Structured triangulation of the unit square.
///
/// The square is cut into `cells × cells` squares of side `h = 1/cells`, and
/// each square is split along the diagonal from its lower-left to its
/// upper-right corner. Nodes are numbered row-major (by `y`, then `x`);
/// only interior nodes carry degrees of freedom since the boundary is
/// homogeneous Dirichlet.
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    cells: usize,
    h: f64,
    nodes: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    node_dof: Vec<Option<usize>>,
    dof_node: Vec<usize>,
}

impl Mesh {
    /// Builds the mesh for spacing `h`; `1/h` must be an integer `>= 2`.
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::arg(format!("mesh spacing must be positive, got {h}")));
        }
        let inv = 1.0 / h;
        let cells = inv.round();
        if (inv - cells).abs() > 1e-9 * inv {
            return Err(Error::arg(format!("1/h must be an integer, got 1/h = {inv}")));
        }
        Self::with_cells(cells as usize)
    }

    pub fn with_cells(cells: usize) -> Result<Self> {
        if cells < 2 {
            return Err(Error::arg(format!(
                "need at least 2 cells per side, got {cells}"
            )));
        }
        let h = 1.0 / cells as f64;
        let per_side = cells + 1;
        let mut nodes = Vec::with_capacity(per_side * per_side);
        let mut node_dof = Vec::with_capacity(per_side * per_side);
        let mut dof_node = Vec::with_capacity((cells - 1) * (cells - 1));
        for j in 0..per_side {
            for i in 0..per_side {
                nodes.push([i as f64 * h, j as f64 * h]);
                let interior = i > 0 && i < cells && j > 0 && j < cells;
                if interior {
                    node_dof.push(Some(dof_node.len()));
                    dof_node.push(j * per_side + i);
                } else {
                    node_dof.push(None);
                }
            }
        }
        let mut triangles = Vec::with_capacity(2 * cells * cells);
        for j in 0..cells {
            for i in 0..cells {
                let ll = j * per_side + i;
                let lr = ll + 1;
                let ul = ll + per_side;
                let ur = ul + 1;
                triangles.push([ll, lr, ur]);
                triangles.push([ll, ur, ul]);
            }
        }
        Ok(Self {
            cells,
            h,
            nodes,
            triangles,
            node_dof,
            dof_node,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Number of squares per side (`1/h`).
    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Number of interior degrees of freedom, `(1/h - 1)²`.
    pub fn n_dof(&self) -> usize {
        self.dof_node.len()
    }

    /// Dof index of a node, `None` on the boundary.
    pub fn node_dof(&self, node: usize) -> Option<usize> {
        self.node_dof[node]
    }

    pub fn dof_node(&self, dof: usize) -> usize {
        self.dof_node[dof]
    }

    pub fn dof_point(&self, dof: usize) -> Point {
        self.nodes[self.dof_node[dof]]
    }

    /// Signed area of triangle `t`.
    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|n| self.nodes[n]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.triangles[t].map(|n| self.nodes[n]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Containing triangle and barycentric weights of `p`, found in O(1)
    /// from the grid structure.
    pub fn locate(&self, p: Point) -> Result<(usize, [f64; 3])> {
        let [x, y] = p;
        if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&y) {
            return Err(Error::arg(format!("point ({x}, {y}) lies outside the unit square")));
        }
        let n = self.cells;
        let sx = x * n as f64;
        let sy = y * n as f64;
        let i = (sx.floor() as usize).min(n - 1);
        let j = (sy.floor() as usize).min(n - 1);
        let xi = sx - i as f64;
        let eta = sy - j as f64;
        let cell = j * n + i;
        if xi >= eta {
            // lower triangle (ll, lr, ur)
            Ok((2 * cell, [1.0 - xi, xi - eta, eta]))
        } else {
            // upper triangle (ll, ur, ul)
            Ok((2 * cell + 1, [1.0 - eta, xi, eta - xi]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coarsest_mesh() {
        let m = Mesh::new(0.5).unwrap();
        assert_eq!(m.n_dof(), 1);
        assert_eq!(m.triangles().len(), 8);
        assert_eq!(m.dof_point(0), [0.5, 0.5]);
    }

    #[test]
    fn counts() {
        let m = Mesh::new(0.25).unwrap();
        assert_eq!(m.n_dof(), 9);
        assert_eq!(m.triangles().len(), 32);
        assert_eq!(Mesh::new(1.0 / 64.0).unwrap().n_dof(), 3969);
    }

    #[test]
    fn non_integer_inverse_spacing() {
        assert!(Mesh::new(0.3).is_err());
        assert!(Mesh::new(1.0).is_err());
        assert!(Mesh::new(-0.5).is_err());
    }

    #[test]
    fn areas_are_positive() {
        let m = Mesh::new(1.0 / 8.0).unwrap();
        let expected = m.h() * m.h() / 2.0;
        for t in 0..m.triangles().len() {
            assert!((m.signed_area(t) - expected).abs() < 1e-15);
        }
    }

    #[test]
    fn node_order_is_row_major() {
        let m = Mesh::new(0.25).unwrap();
        assert_eq!(m.nodes()[1], [0.25, 0.0]);
        assert_eq!(m.nodes()[5], [0.0, 0.25]);
        assert_eq!(m.dof_point(1), [0.5, 0.25]);
    }

    #[test]
    fn locate_reproduces_point() {
        let m = Mesh::new(0.125).unwrap();
        for &p in &[[0.3, 0.71], [0.0, 0.0], [1.0, 1.0], [0.5, 0.125], [0.999, 0.001]] {
            let (t, w) = m.locate(p).unwrap();
            let tri = m.triangles()[t];
            let mut q = [0.0; 2];
            for k in 0..3 {
                assert!(w[k] >= -1e-12);
                q[0] += w[k] * m.nodes()[tri[k]][0];
                q[1] += w[k] * m.nodes()[tri[k]][1];
            }
            assert!((q[0] - p[0]).abs() < 1e-14 && (q[1] - p[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn locate_rejects_outside() {
        let m = Mesh::new(0.5).unwrap();
        assert!(m.locate([1.01, 0.5]).is_err());
        assert!(m.locate([0.5, -0.1]).is_err());
    }
}
