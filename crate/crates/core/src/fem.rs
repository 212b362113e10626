//! Trilinear hexahedra and global stiffness/mass assembly.
//!
//! Degrees of freedom are node-major, `3 * node + c` with `c = 0, 1, 2` for `x, y, z`.
//! Strains use Voigt order `(xx, yy, zz, yz, xz, xy)` with engineering shears.

use alloc::vec;
use alloc::vec::Vec;

use crate::dispersion::PlateMaterial;
use crate::mesh::Mesh;
use crate::C64;

const G: f64 = 0.577_350_269_189_625_8;

/// Reference coordinates of the hex8 nodes: bottom face counter-clockwise, then top.
pub const HEX8_NODES: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

/// The eight 2x2x2 Gauss points (all weights are 1).
pub fn gauss_points() -> [[f64; 3]; 8] {
    HEX8_NODES.map(|p| [p[0] * G, p[1] * G, p[2] * G])
}

pub fn shape(xi: [f64; 3]) -> [f64; 8] {
    HEX8_NODES.map(|p| 0.125 * (1.0 + p[0] * xi[0]) * (1.0 + p[1] * xi[1]) * (1.0 + p[2] * xi[2]))
}

/// Derivatives with respect to the reference coordinates.
pub fn shape_gradients(xi: [f64; 3]) -> [[f64; 3]; 8] {
    HEX8_NODES.map(|p| {
        let a = 1.0 + p[0] * xi[0];
        let b = 1.0 + p[1] * xi[1];
        let c = 1.0 + p[2] * xi[2];
        [0.125 * p[0] * b * c, 0.125 * p[1] * a * c, 0.125 * p[2] * a * b]
    })
}

/// `J[i][j] = d x_j / d xi_i` and its determinant.
pub fn jacobian(coords: &[[f64; 3]; 8], xi: [f64; 3]) -> ([[f64; 3]; 3], f64) {
    let dn = shape_gradients(xi);
    let mut j = [[0.0; 3]; 3];
    for (a, g) in dn.iter().enumerate() {
        for r in 0..3 {
            for c in 0..3 {
                j[r][c] += g[r] * coords[a][c];
            }
        }
    }
    (j, det3(&j))
}

fn det3(j: &[[f64; 3]; 3]) -> f64 {
    j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1]) - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
        + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0])
}

fn inverse3(j: &[[f64; 3]; 3], det: f64) -> [[f64; 3]; 3] {
    let d = 1.0 / det;
    [
        [
            (j[1][1] * j[2][2] - j[1][2] * j[2][1]) * d,
            (j[0][2] * j[2][1] - j[0][1] * j[2][2]) * d,
            (j[0][1] * j[1][2] - j[0][2] * j[1][1]) * d,
        ],
        [
            (j[1][2] * j[2][0] - j[1][0] * j[2][2]) * d,
            (j[0][0] * j[2][2] - j[0][2] * j[2][0]) * d,
            (j[0][2] * j[1][0] - j[0][0] * j[1][2]) * d,
        ],
        [
            (j[1][0] * j[2][1] - j[1][1] * j[2][0]) * d,
            (j[0][1] * j[2][0] - j[0][0] * j[2][1]) * d,
            (j[0][0] * j[1][1] - j[0][1] * j[1][0]) * d,
        ],
    ]
}

/// Physical shape-function gradients and `det J` at a reference point.
pub fn physical_gradients(coords: &[[f64; 3]; 8], xi: [f64; 3]) -> ([[f64; 3]; 8], f64) {
    let (j, det) = jacobian(coords, xi);
    let inv = inverse3(&j, det);
    let dn = shape_gradients(xi);
    let g = dn.map(|d| {
        let mut out = [0.0; 3];
        for (c, o) in out.iter_mut().enumerate() {
            *o = inv[c][0] * d[0] + inv[c][1] * d[1] + inv[c][2] * d[2];
        }
        out
    });
    (g, det)
}

/// Isotropic `D` in Voigt order.
pub fn elastic_matrix(lambda: f64, mu: f64) -> [[f64; 6]; 6] {
    let mut d = [[0.0; 6]; 6];
    for i in 0..3 {
        for j in 0..3 {
            d[i][j] = lambda;
        }
        d[i][i] = lambda + 2.0 * mu;
        d[i + 3][i + 3] = mu;
    }
    d
}

/// Strain-displacement matrix `B` (6 x 24) from physical gradients.
pub fn strain_displacement(g: &[[f64; 3]; 8]) -> [[f64; 24]; 6] {
    let mut b = [[0.0; 24]; 6];
    for (a, d) in g.iter().enumerate() {
        let c = 3 * a;
        b[0][c] = d[0];
        b[1][c + 1] = d[1];
        b[2][c + 2] = d[2];
        b[3][c + 1] = d[2];
        b[3][c + 2] = d[1];
        b[4][c] = d[2];
        b[4][c + 2] = d[0];
        b[5][c] = d[1];
        b[5][c + 1] = d[0];
    }
    b
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum FemError {
    #[error("element {element} has non-positive Jacobian {det:.3e}")]
    Jacobian { element: usize, det: f64 },
}

/// 24 x 24 stiffness and consistent mass of one element.
#[derive(Debug, Clone)]
pub struct ElementMatrices {
    pub k: [[f64; 24]; 24],
    pub m: [[f64; 24]; 24],
}

pub fn element_matrices(coords: &[[f64; 3]; 8], lambda: f64, mu: f64, rho: f64) -> Result<ElementMatrices, FemError> {
    let mut k = [[0.0; 24]; 24];
    let mut m = [[0.0; 24]; 24];
    for xi in gauss_points() {
        let (g, det) = physical_gradients(coords, xi);
        if det <= 0.0 || !det.is_finite() {
            return Err(FemError::Jacobian { element: usize::MAX, det });
        }
        let n = shape(xi);
        for a in 0..8 {
            for b in 0..8 {
                let ga = g[a];
                let gb = g[b];
                let dot = ga[0] * gb[0] + ga[1] * gb[1] + ga[2] * gb[2];
                for i in 0..3 {
                    for j in 0..3 {
                        let mut v = lambda * ga[i] * gb[j] + mu * ga[j] * gb[i];
                        if i == j {
                            v += mu * dot;
                        }
                        k[3 * a + i][3 * b + j] += v * det;
                    }
                }
                let mass = rho * n[a] * n[b] * det;
                for i in 0..3 {
                    m[3 * a + i][3 * b + i] += mass;
                }
            }
        }
    }
    Ok(ElementMatrices { k, m })
}

/// `K` and `M` in compressed rows over a shared pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalSystem {
    pub n_dofs: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub k: Vec<f64>,
    pub m: Vec<f64>,
}

#[inline]
pub fn dof(node: usize, component: usize) -> usize {
    3 * node + component
}

pub fn assemble(mesh: &Mesh, material: &PlateMaterial) -> Result<GlobalSystem, FemError> {
    let p = mesh.nodes.len();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); p];
    for e in &mesh.elements {
        for &a in e {
            adjacency[a].extend_from_slice(e);
        }
    }
    for list in adjacency.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let n = 3 * p;
    let mut row_ptr = Vec::with_capacity(n + 1);
    row_ptr.push(0);
    let mut col_idx = Vec::new();
    for list in &adjacency {
        for _ in 0..3 {
            for &b in list {
                col_idx.extend_from_slice(&[3 * b, 3 * b + 1, 3 * b + 2]);
            }
            row_ptr.push(col_idx.len());
        }
    }
    let mut k = vec![0.0; col_idx.len()];
    let mut m = vec![0.0; col_idx.len()];
    for (id, e) in mesh.elements.iter().enumerate() {
        let coords = e.map(|i| mesh.nodes[i]);
        let em = element_matrices(&coords, material.lambda, material.mu, material.rho).map_err(|err| match err {
            FemError::Jacobian { det, .. } => FemError::Jacobian { element: id, det },
        })?;
        for (la, &a) in e.iter().enumerate() {
            for (lb, &b) in e.iter().enumerate() {
                let slot = adjacency[a].binary_search(&b).expect("pattern covers element couplings");
                for i in 0..3 {
                    let start = row_ptr[3 * a + i] + 3 * slot;
                    for j in 0..3 {
                        k[start + j] += em.k[3 * la + i][3 * lb + j];
                        m[start + j] += em.m[3 * la + i][3 * lb + j];
                    }
                }
            }
        }
    }
    Ok(GlobalSystem { n_dofs: n, row_ptr, col_idx, k, m })
}

impl GlobalSystem {
    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    fn spmv<T>(&self, values: &[f64], x: &[T], zero: T) -> Vec<T>
    where
        T: Copy + core::ops::Add<Output = T> + core::ops::Mul<f64, Output = T>,
    {
        (0..self.n_dofs)
            .map(|r| {
                let mut acc = zero;
                for s in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc = acc + x[self.col_idx[s]] * values[s];
                }
                acc
            })
            .collect()
    }

    pub fn mul_k(&self, x: &[f64]) -> Vec<f64> {
        self.spmv(&self.k, x, 0.0)
    }

    pub fn mul_m(&self, x: &[f64]) -> Vec<f64> {
        self.spmv(&self.m, x, 0.0)
    }

    /// `(K - omega^2 M) x` for complex `x`.
    pub fn apply_dynamic(&self, omega: f64, x: &[C64]) -> Vec<C64> {
        let w2 = omega * omega;
        (0..self.n_dofs)
            .map(|r| {
                let mut acc = C64::new(0.0, 0.0);
                for s in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc += x[self.col_idx[s]] * (self.k[s] - w2 * self.m[s]);
                }
                acc
            })
            .collect()
    }

    /// Upper-triangle entries `(row, col, K - omega^2 M)`.
    pub fn dynamic_upper_triplets(&self, omega: f64) -> Vec<(usize, usize, f64)> {
        let w2 = omega * omega;
        let mut out = Vec::with_capacity(self.nnz() / 2 + self.n_dofs);
        for r in 0..self.n_dofs {
            for s in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[s];
                if c >= r {
                    out.push((r, c, self.k[s] - w2 * self.m[s]));
                }
            }
        }
        out
    }

    /// Largest absolute entry of `K`.
    pub fn k_max_abs(&self) -> f64 {
        self.k.iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Entry `(r, c)` of `K` and `M`, zero outside the pattern.
    pub fn entry(&self, r: usize, c: usize) -> (f64, f64) {
        let cols = &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]];
        match cols.binary_search(&c) {
            Ok(i) => (self.k[self.row_ptr[r] + i], self.m[self.row_ptr[r] + i]),
            Err(_) => (0.0, 0.0),
        }
    }
}

/// The six rigid-body displacement fields at the mesh nodes.
pub fn rigid_body_modes(nodes: &[[f64; 3]]) -> [Vec<f64>; 6] {
    let mut out: [Vec<f64>; 6] = Default::default();
    for v in out.iter_mut() {
        *v = vec![0.0; 3 * nodes.len()];
    }
    for (i, x) in nodes.iter().enumerate() {
        for c in 0..3 {
            out[c][3 * i + c] = 1.0;
        }
        // rotations about x, y, z
        out[3][3 * i + 1] = -x[2];
        out[3][3 * i + 2] = x[1];
        out[4][3 * i] = x[2];
        out[4][3 * i + 2] = -x[0];
        out[5][3 * i] = -x[1];
        out[5][3 * i + 1] = x[0];
    }
    out
}
