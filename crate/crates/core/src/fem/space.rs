use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::assembly::TRIANGLE_RULE;
use crate::fem::{assemble_mass, assemble_stiffness, Mesh, Point, ProblemCoefficients};
use crate::linalg::{cg_solve_with, CgConfig, CsrMatrix};

/// The P1 space `V_h ⊂ H¹₀(Ω)` on a [`Mesh`], with the matrices needed for
/// the discrete `L²`, `H¹` and `H⁻¹` norms.
#[derive(Debug)]
pub struct FemSpace {
    mesh: Mesh,
    mass: CsrMatrix,
    laplace: CsrMatrix,
    h1: CsrMatrix,
}

impl FemSpace {
    pub fn new(mesh: Mesh) -> Arc<Self> {
        let mass = assemble_mass(&mesh);
        let laplace = assemble_stiffness(&mesh, &ProblemCoefficients::default())
            .expect("unit coefficients are valid");
        let h1 = laplace
            .linear_combination(1.0, &mass, 1.0)
            .expect("same sparsity shape");
        Arc::new(Self {
            mesh,
            mass,
            laplace,
            h1,
        })
    }

    /// Shorthand for `FemSpace::new(Mesh::new(h)?)`.
    pub fn with_spacing(h: f64) -> Result<Arc<Self>> {
        Ok(Self::new(Mesh::new(h)?))
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn n_dof(&self) -> usize {
        self.mesh.n_dof()
    }

    pub fn mass(&self) -> &CsrMatrix {
        &self.mass
    }

    /// Stiffness of the unit Laplacian (`a = 1`, `c = 0`).
    pub fn laplace(&self) -> &CsrMatrix {
        &self.laplace
    }

    /// Sparse matrix mapping dof coefficients to values at `points`.
    pub fn evaluation_matrix(&self, points: &[Point]) -> Result<CsrMatrix> {
        let mut triplets = Vec::with_capacity(3 * points.len());
        for (row, &p) in points.iter().enumerate() {
            let (t, w) = self.mesh.locate(p)?;
            for (k, &node) in self.mesh.triangles()[t].iter().enumerate() {
                if let Some(dof) = self.mesh.node_dof(node) {
                    if w[k] != 0.0 {
                        triplets.push((row, dof, w[k]));
                    }
                }
            }
        }
        CsrMatrix::from_triplets(points.len(), self.n_dof(), &triplets)
    }

    /// Load vector `(f, φ_j)` by the degree-4 triangle rule.
    pub fn load_vector(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mesh = &self.mesh;
        let mut load = vec![0.0; self.n_dof()];
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let area = mesh.signed_area(t);
            let verts = tri.map(|n| mesh.nodes()[n]);
            let dofs = tri.map(|n| mesh.node_dof(n));
            if dofs.iter().all(Option::is_none) {
                continue;
            }
            for (bary, w) in TRIANGLE_RULE {
                let x = bary[0] * verts[0][0] + bary[1] * verts[1][0] + bary[2] * verts[2][0];
                let y = bary[0] * verts[0][1] + bary[1] * verts[1][1] + bary[2] * verts[2][1];
                let fv = f(x, y) * w * area;
                for k in 0..3 {
                    if let Some(d) = dofs[k] {
                        load[d] += fv * bary[k];
                    }
                }
            }
        }
        load
    }

    /// `L²` integral of a continuous function over Ω by the triangle rule.
    pub fn integrate(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let mesh = &self.mesh;
        let mut total = 0.0;
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let area = mesh.signed_area(t);
            let verts = tri.map(|n| mesh.nodes()[n]);
            for (bary, w) in TRIANGLE_RULE {
                let x = bary[0] * verts[0][0] + bary[1] * verts[1][0] + bary[2] * verts[2][0];
                let y = bary[0] * verts[0][1] + bary[1] * verts[1][1] + bary[2] * verts[2][1];
                total += f(x, y) * w * area;
            }
        }
        total
    }

    pub(crate) fn solve_h1(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let inv_diag: Vec<f64> = self.h1.diagonal().iter().map(|d| 1.0 / d).collect();
        let cfg = CgConfig::with_tolerance(1e-12);
        Ok(cg_solve_with(&self.h1, rhs, None, Some(&inv_diag), &cfg)?.x)
    }

    pub(crate) fn solve_mass(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let inv_diag: Vec<f64> = self.mass.diagonal().iter().map(|d| 1.0 / d).collect();
        let cfg = CgConfig::with_tolerance(1e-13);
        Ok(cg_solve_with(&self.mass, rhs, None, Some(&inv_diag), &cfg)?.x)
    }
}

/// Coefficients of a P1 function `Σ F_j φ_j` on a [`FemSpace`].
#[derive(Clone, Debug)]
pub struct FieldVector {
    space: Arc<FemSpace>,
    coeffs: Vec<f64>,
}

impl PartialEq for FieldVector {
    fn eq(&self, other: &Self) -> bool {
        self.same_space(other) && self.coeffs == other.coeffs
    }
}

impl FieldVector {
    pub fn zeros(space: &Arc<FemSpace>) -> Self {
        Self {
            space: Arc::clone(space),
            coeffs: vec![0.0; space.n_dof()],
        }
    }

    pub fn from_coeffs(space: &Arc<FemSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.n_dof() {
            return Err(Error::arg(format!(
                "{} coefficients for a space with {} dofs",
                coeffs.len(),
                space.n_dof()
            )));
        }
        Ok(Self {
            space: Arc::clone(space),
            coeffs,
        })
    }

    /// The hat function of dof `j`.
    pub fn hat(space: &Arc<FemSpace>, j: usize) -> Self {
        let mut v = Self::zeros(space);
        v.coeffs[j] = 1.0;
        v
    }

    /// Nodal interpolant (boundary values are dropped).
    pub fn interpolate(space: &Arc<FemSpace>, f: impl Fn(f64, f64) -> f64) -> Self {
        let coeffs = (0..space.n_dof())
            .map(|d| {
                let [x, y] = space.mesh().dof_point(d);
                f(x, y)
            })
            .collect();
        Self {
            space: Arc::clone(space),
            coeffs,
        }
    }

    /// `L²` projection of a continuous function onto the space.
    pub fn project_l2(space: &Arc<FemSpace>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let load = space.load_vector(f);
        let coeffs = space.solve_mass(&load)?;
        Self::from_coeffs(space, coeffs)
    }

    pub fn space(&self) -> &Arc<FemSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn same_space(&self, other: &FieldVector) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || self.space.mesh == other.space.mesh
    }

    fn check_space(&self, other: &FieldVector) -> Result<()> {
        if self.same_space(other) {
            Ok(())
        } else {
            Err(Error::arg("fields live on different meshes"))
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            space: Arc::clone(&self.space),
            coeffs: self.coeffs.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn sub(&self, other: &FieldVector) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self {
            space: Arc::clone(&self.space),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        })
    }

    pub fn add(&self, other: &FieldVector) -> Result<Self> {
        self.check_space(other)?;
        Ok(Self {
            space: Arc::clone(&self.space),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Exact P1 values at arbitrary points of the closed square.
    pub fn evaluate_at_points(&self, points: &[Point]) -> Result<Vec<f64>> {
        let mesh = self.space.mesh();
        points
            .iter()
            .map(|&p| {
                let (t, w) = mesh.locate(p)?;
                Ok(mesh.triangles()[t]
                    .iter()
                    .zip(w)
                    .filter_map(|(&n, w)| mesh.node_dof(n).map(|d| w * self.coeffs[d]))
                    .sum())
            })
            .collect()
    }

    /// `sqrt(Fᵀ M F)`
    pub fn l2_norm(&self) -> f64 {
        self.space.mass.quadratic_form(&self.coeffs).max(0.0).sqrt()
    }

    /// `sqrt(Fᵀ (A₀ + M) F)`
    pub fn h1_norm(&self) -> f64 {
        self.space.h1.quadratic_form(&self.coeffs).max(0.0).sqrt()
    }

    /// `sqrt((MF)ᵀ (A₀ + M)⁻¹ (MF))`, the dual norm of `H¹` restricted to the
    /// space.
    pub fn hminus1_norm(&self) -> Result<f64> {
        let mf = self.space.mass.spmv(&self.coeffs)?;
        let z = self.space.solve_h1(&mf)?;
        Ok(crate::linalg::dot(&mf, &z).max(0.0).sqrt())
    }

    /// `L²` distance to a continuous function, integrated with the
    /// degree-4 triangle rule (boundary nodes contribute zero).
    pub fn l2_distance_to(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let mesh = self.space.mesh();
        let mut total = 0.0;
        for (t, tri) in mesh.triangles().iter().enumerate() {
            let area = mesh.signed_area(t);
            let verts = tri.map(|n| mesh.nodes()[n]);
            let vals = tri.map(|n| mesh.node_dof(n).map_or(0.0, |d| self.coeffs[d]));
            for (bary, w) in TRIANGLE_RULE {
                let x = bary[0] * verts[0][0] + bary[1] * verts[1][0] + bary[2] * verts[2][0];
                let y = bary[0] * verts[0][1] + bary[1] * verts[1][1] + bary[2] * verts[2][1];
                let uh = bary[0] * vals[0] + bary[1] * vals[1] + bary[2] * vals[2];
                let e = uh - f(x, y);
                total += e * e * w * area;
            }
        }
        total.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
        let mut s = seed;
        (0..n)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            })
            .collect()
    }

    #[test]
    fn hat_function_is_nodal() {
        let space = FemSpace::with_spacing(0.25).unwrap();
        let hat = FieldVector::hat(&space, 4);
        let pts: Vec<Point> = (0..space.n_dof()).map(|d| space.mesh().dof_point(d)).collect();
        let vals = hat.evaluate_at_points(&pts).unwrap();
        for (d, v) in vals.iter().enumerate() {
            assert_eq!(*v, if d == 4 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn linears_are_reproduced_away_from_the_boundary() {
        let space = FemSpace::with_spacing(0.125).unwrap();
        let v = FieldVector::interpolate(&space, |x, y| x + y);
        // points inside the band of cells not touching ∂Ω
        let pts = [[0.3, 0.41], [0.5, 0.5], [0.17, 0.8], [0.62, 0.29]];
        for (p, v) in pts.iter().zip(v.evaluate_at_points(&pts).unwrap()) {
            assert!((v - (p[0] + p[1])).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_field() {
        let space = FemSpace::with_spacing(0.25).unwrap();
        let z = FieldVector::zeros(&space);
        assert_eq!(z.evaluate_at_points(&[[0.3, 0.3]]).unwrap(), vec![0.0]);
        assert_eq!(z.l2_norm(), 0.0);
        assert_eq!(z.h1_norm(), 0.0);
        assert_eq!(z.hminus1_norm().unwrap(), 0.0);
    }

    #[test]
    fn evaluation_matrix_matches_pointwise() {
        let space = FemSpace::with_spacing(0.125).unwrap();
        let v = FieldVector::from_coeffs(&space, pseudo_random(space.n_dof(), 3)).unwrap();
        let pts = [[0.0, 0.0], [0.33, 0.91], [1.0, 0.5], [0.5, 0.5], [0.07, 0.02]];
        let e = space.evaluation_matrix(&pts).unwrap();
        let a = e.spmv(v.coeffs()).unwrap();
        let b = v.evaluate_at_points(&pts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0], 0.0);
        assert_eq!(a[2], 0.0);
    }

    #[test]
    fn norm_ordering_and_homogeneity() {
        let space = FemSpace::with_spacing(0.125).unwrap();
        for seed in 0..100 {
            let v = FieldVector::from_coeffs(&space, pseudo_random(space.n_dof(), seed)).unwrap();
            let (l2, h1, hm1) = (v.l2_norm(), v.h1_norm(), v.hminus1_norm().unwrap());
            assert!(hm1 <= l2 * (1.0 + 1e-10), "seed {seed}: {hm1} > {l2}");
            assert!(l2 <= h1);
            let w = v.scaled(-2.5);
            assert!((w.l2_norm() - 2.5 * l2).abs() < 1e-12 * l2);
            assert!((w.h1_norm() - 2.5 * h1).abs() < 1e-12 * h1);
            assert!((w.hminus1_norm().unwrap() - 2.5 * hm1).abs() < 1e-9 * hm1);
        }
    }

    #[test]
    fn projection_error_is_second_order() {
        let u = |x: f64, y: f64| (PI * x).sin() * (PI * y).sin();
        let err = |h: f64| {
            let space = FemSpace::with_spacing(h).unwrap();
            let interp = FieldVector::interpolate(&space, u);
            let proj = FieldVector::project_l2(&space, u).unwrap();
            interp.sub(&proj).unwrap().l2_norm()
        };
        let ratio = err(1.0 / 8.0) / err(1.0 / 16.0);
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn mismatched_spaces() {
        let a = FieldVector::zeros(&FemSpace::with_spacing(0.25).unwrap());
        let b = FieldVector::zeros(&FemSpace::with_spacing(0.5).unwrap());
        assert!(a.sub(&b).is_err());
        assert!(FieldVector::from_coeffs(a.space(), vec![0.0; 2]).is_err());
    }
}
