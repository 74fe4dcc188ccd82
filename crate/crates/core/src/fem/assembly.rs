use crate::error::{Error, Result};
use crate::fem::{Mesh, ProblemCoefficients};
use crate::linalg::CsrMatrix;

/// Degree-4 symmetric rule on a triangle: barycentric points and weights
/// (weights sum to one and are scaled by the area at use).
pub(crate) const TRIANGLE_RULE: [([f64; 3], f64); 6] = {
    const A: f64 = 0.445_948_490_915_965;
    const WA: f64 = 0.223_381_589_678_011;
    const B: f64 = 0.091_576_213_509_771;
    const WB: f64 = 0.109_951_743_655_322;
    [
        ([A, A, 1.0 - 2.0 * A], WA),
        ([A, 1.0 - 2.0 * A, A], WA),
        ([1.0 - 2.0 * A, A, A], WA),
        ([B, B, 1.0 - 2.0 * B], WB),
        ([B, 1.0 - 2.0 * B, B], WB),
        ([1.0 - 2.0 * B, B, B], WB),
    ]
};

/// Gradients of the three barycentric coordinates of triangle `t`.
pub(crate) fn basis_gradients(mesh: &Mesh, t: usize) -> [[f64; 2]; 3] {
    let [p0, p1, p2] = mesh.triangles()[t].map(|n| mesh.nodes()[n]);
    let two_area = 2.0 * mesh.signed_area(t);
    [
        [(p1[1] - p2[1]) / two_area, (p2[0] - p1[0]) / two_area],
        [(p2[1] - p0[1]) / two_area, (p0[0] - p2[0]) / two_area],
        [(p0[1] - p1[1]) / two_area, (p1[0] - p0[0]) / two_area],
    ]
}

fn element_mass(area: f64) -> [[f64; 3]; 3] {
    let d = area / 6.0;
    let o = area / 12.0;
    [[d, o, o], [o, d, o], [o, o, d]]
}

fn assemble<F>(mesh: &Mesh, include_boundary: bool, mut element: F) -> Result<CsrMatrix>
where
    F: FnMut(usize) -> Result<[[f64; 3]; 3]>,
{
    let size = if include_boundary {
        mesh.nodes().len()
    } else {
        mesh.n_dof()
    };
    let index = |node: usize| {
        if include_boundary {
            Some(node)
        } else {
            mesh.node_dof(node)
        }
    };
    let mut triplets = Vec::with_capacity(mesh.triangles().len() * 9);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let local = element(t)?;
        for r in 0..3 {
            let Some(row) = index(tri[r]) else { continue };
            for c in 0..3 {
                if let Some(col) = index(tri[c]) {
                    triplets.push((row, col, local[r][c]));
                }
            }
        }
    }
    CsrMatrix::from_triplets(size, size, &triplets)
}

/// Consistent P1 mass matrix over interior dofs.
pub fn assemble_mass(mesh: &Mesh) -> CsrMatrix {
    assemble(mesh, false, |t| Ok(element_mass(mesh.signed_area(t))))
        .expect("mesh connectivity is valid by construction")
}

/// Mass matrix over every node, boundary included.
pub fn assemble_mass_full(mesh: &Mesh) -> CsrMatrix {
    assemble(mesh, true, |t| Ok(element_mass(mesh.signed_area(t))))
        .expect("mesh connectivity is valid by construction")
}

/// Stiffness matrix of `a(v, w) = (a∇v, ∇w) + (c v, w)` over interior dofs,
/// with `a` and `c` sampled at triangle centroids.
pub fn assemble_stiffness(mesh: &Mesh, coeff: &ProblemCoefficients) -> Result<CsrMatrix> {
    assemble(mesh, false, |t| {
        let [x, y] = mesh.centroid(t);
        let a = coeff.a.eval(x, y);
        let c = coeff.c.eval(x, y);
        if !(a > 0.0) {
            return Err(Error::arg(format!(
                "diffusion coefficient a({x:.4}, {y:.4}) = {a} is not positive"
            )));
        }
        if !(c >= 0.0) {
            return Err(Error::arg(format!(
                "reaction coefficient c({x:.4}, {y:.4}) = {c} is negative"
            )));
        }
        let area = mesh.signed_area(t);
        let grads = basis_gradients(mesh, t);
        let mass = element_mass(area);
        let mut local = [[0.0; 3]; 3];
        for r in 0..3 {
            for s in 0..3 {
                let g = grads[r][0] * grads[s][0] + grads[r][1] * grads[s][1];
                local[r][s] = a * area * g + c * mass[r][s];
            }
        }
        Ok(local)
    })
}
