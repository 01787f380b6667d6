//! Piecewise-linear stiffness and conformally weighted mass matrices.

use sprs::{CsMat, TriMat};

use super::mesh::{midpoint_weights, Mesh};

/// Flat stiffness `K` and weighted mass `M` over all mesh vertices.
pub fn assemble(mesh: &Mesh) -> (CsMat<f64>, CsMat<f64>) {
    let n = mesh.num_vertices();
    let nt = mesh.triangles.len();
    let mut k = TriMat::with_capacity((n, n), 9 * nt);
    let mut m = TriMat::with_capacity((n, n), 9 * nt);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let p = tri.map(|i| mesh.vertices[i]);
        let area = mesh.triangle_area(t).abs();
        // Gradients of the barycentric coordinates are (−dy, dx) / 2A of the
        // opposite edge.
        let g: [[f64; 2]; 3] = std::array::from_fn(|a| {
            let (b, c) = ((a + 1) % 3, (a + 2) % 3);
            [p[b][1] - p[c][1], p[c][0] - p[b][0]]
        });
        let q = midpoint_weights(p[0], p[1], p[2]);
        // Basis function a is 1/2 at the two midpoints of edges touching a.
        // Midpoint q[e] lies on edge (e, e+1).
        let phi = |a: usize, e: usize| if a == e || a == (e + 1) % 3 { 0.5 } else { 0.0 };
        for a in 0..3 {
            for b in 0..3 {
                let kab = (g[a][0] * g[b][0] + g[a][1] * g[b][1]) / (4.0 * area);
                let mab: f64 = (0..3).map(|e| q[e] * phi(a, e) * phi(b, e)).sum::<f64>() * area / 3.0;
                k.add_triplet(tri[a], tri[b], kab);
                m.add_triplet(tri[a], tri[b], mab);
            }
        }
    }
    (k.to_csr(), m.to_csr())
}

/// `A x` for a CSR matrix.
pub fn matvec(a: &CsMat<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.rows()];
    for (v, (i, j)) in a.iter() {
        y[i] += v * x[j];
    }
    y
}

/// Keeps the rows and columns listed in `keep` (which must be increasing).
pub fn restrict(mat: &CsMat<f64>, keep: &[usize]) -> CsMat<f64> {
    let mut map = vec![usize::MAX; mat.rows()];
    for (new, &old) in keep.iter().enumerate() {
        map[old] = new;
    }
    let mut out = TriMat::with_capacity((keep.len(), keep.len()), mat.nnz());
    for (v, (i, j)) in mat.iter() {
        let (a, b) = (map[i], map[j]);
        if a != usize::MAX && b != usize::MAX {
            out.add_triplet(a, b, *v);
        }
    }
    out.to_csr()
}
