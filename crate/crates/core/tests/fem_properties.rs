//! Global stiffness and mass properties on generated plate meshes.

use plate_dtn_core::dispersion::PlateMaterial;
use plate_dtn_core::fem::{
    assemble, elastic_matrix, element_matrices, gauss_points, physical_gradients, rigid_body_modes, strain_displacement,
    GlobalSystem,
};
use plate_dtn_core::mesh::{generate, CavitySpec, Mesh, MeshResolution};
use plate_dtn_core::solver::SymmetricFactor;

fn steel() -> PlateMaterial {
    let base = PlateMaterial::from_engineering(1.0, 2.0e11, 0.3, 7800.0, 1.0).unwrap();
    base.with_omega(base.c_t()).unwrap()
}

fn disk(nr: usize, nc: usize, nt: usize) -> Mesh {
    generate(2.0, &steel(), &CavitySpec::none(), &MeshResolution::new(nr, nc, nt)).unwrap()
}

fn lcg(seed: u64) -> impl FnMut() -> f64 {
    let mut s = seed;
    move || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// 3 x 3 x 3 node patch of eight hexes with perturbed interior nodes.
fn patch() -> (Vec<[f64; 3]>, Vec<[usize; 8]>) {
    let mut next = lcg(17);
    let mut nodes = Vec::new();
    for k in 0..3 {
        for j in 0..3 {
            for i in 0..3 {
                let mut p = [i as f64, j as f64, k as f64 * 0.7];
                let boundary = i != 1 || j != 1 || k != 1;
                let jitter = if boundary { 0.08 } else { 0.2 };
                for c in &mut p {
                    *c += jitter * next();
                }
                nodes.push(p);
            }
        }
    }
    let id = |i: usize, j: usize, k: usize| i + 3 * j + 9 * k;
    let mut elements = Vec::new();
    for k in 0..2 {
        for j in 0..2 {
            for i in 0..2 {
                elements.push([
                    id(i, j, k),
                    id(i + 1, j, k),
                    id(i + 1, j + 1, k),
                    id(i, j + 1, k),
                    id(i, j, k + 1),
                    id(i + 1, j, k + 1),
                    id(i + 1, j + 1, k + 1),
                    id(i, j + 1, k + 1),
                ]);
            }
        }
    }
    (nodes, elements)
}

const GRAD: [[f64; 3]; 3] = [[1.0e-3, 2.0e-4, -3.0e-4], [-1.0e-4, 5.0e-4, 4.0e-4], [2.5e-4, -6.0e-4, 8.0e-4]];

fn linear_field(p: [f64; 3]) -> [f64; 3] {
    let mut u = [3.0e-3, -1.0e-3, 2.0e-3];
    for i in 0..3 {
        for j in 0..3 {
            u[i] += GRAD[i][j] * p[j];
        }
    }
    u
}

#[test]
fn constant_strain_patch_reproduces_exact_stress() {
    let (lambda, mu) = (1.2e11, 0.8e11);
    let d = elastic_matrix(lambda, mu);
    let eps = [
        GRAD[0][0],
        GRAD[1][1],
        GRAD[2][2],
        GRAD[1][2] + GRAD[2][1],
        GRAD[0][2] + GRAD[2][0],
        GRAD[0][1] + GRAD[1][0],
    ];
    let exact: Vec<f64> = (0..6).map(|i| (0..6).map(|j| d[i][j] * eps[j]).sum()).collect();
    let scale = exact.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let (nodes, elements) = patch();
    for e in &elements {
        let coords = e.map(|n| nodes[n]);
        let ue: Vec<f64> = coords.iter().flat_map(|&p| linear_field(p)).collect();
        for xi in gauss_points() {
            let (g, _) = physical_gradients(&coords, xi);
            let b = strain_displacement(&g);
            for i in 0..6 {
                let strain: Vec<f64> = (0..6).map(|r| dot(&b[r], &ue)).collect();
                let stress: f64 = (0..6).map(|j| d[i][j] * strain[j]).sum();
                assert!((stress - exact[i]).abs() < 1e-10 * scale);
            }
        }
    }
    // interior node carries no force under a linear field
    let mut f = [0.0; 3];
    for e in &elements {
        let coords = e.map(|n| nodes[n]);
        let ue: Vec<f64> = coords.iter().flat_map(|&p| linear_field(p)).collect();
        let em = element_matrices(&coords, lambda, mu, 7800.0).unwrap();
        if let Some(local) = e.iter().position(|&n| n == 13) {
            for c in 0..3 {
                f[c] += dot(&em.k[3 * local + c], &ue);
            }
        }
    }
    let k_scale = (lambda + 2.0 * mu) * 1e-3;
    for v in f {
        assert!(v.abs() < 1e-10 * k_scale, "{v}");
    }
}

fn check_symmetry(sys: &GlobalSystem) {
    let (kmax, mmax) = (sys.k_max_abs(), sys.m.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    for r in 0..sys.n_dofs {
        for s in sys.row_ptr[r]..sys.row_ptr[r + 1] {
            let c = sys.col_idx[s];
            let (kt, mt) = sys.entry(c, r);
            assert!((sys.k[s] - kt).abs() <= 1e-12 * kmax);
            assert!((sys.m[s] - mt).abs() <= 1e-12 * mmax);
        }
    }
}

#[test]
fn global_matrices_are_symmetric_with_rigid_kernel() {
    for cavity in [CavitySpec::none(), CavitySpec::through(0.6), CavitySpec::partial(0.6, 0.5), CavitySpec::ellipsoid(0.6, 0.5)] {
        let mesh = generate(2.0, &steel(), &cavity, &MeshResolution::new(3, 24, 4)).unwrap();
        let sys = assemble(&mesh, &steel()).unwrap();
        check_symmetry(&sys);
        let kmax = sys.k_max_abs();
        for r in rigid_body_modes(&mesh.nodes) {
            let kr = sys.mul_k(&r);
            assert!(norm(&kr) < 1e-8 * kmax * norm(&r), "{cavity:?}");
        }
    }
}

#[test]
fn quadratic_forms_are_semidefinite_and_mass_definite() {
    let mesh = generate(2.0, &steel(), &CavitySpec::through(0.5), &MeshResolution::new(3, 16, 2)).unwrap();
    let sys = assemble(&mesh, &steel()).unwrap();
    let mut next = lcg(99);
    let kmax = sys.k_max_abs();
    for _ in 0..100 {
        let x: Vec<f64> = (0..sys.n_dofs).map(|_| next()).collect();
        let xx = dot(&x, &x);
        assert!(dot(&x, &sys.mul_k(&x)) >= -1e-12 * kmax * xx);
        assert!(dot(&x, &sys.mul_m(&x)) > 0.0);
    }
}

#[test]
fn assembly_is_bit_reproducible() {
    let mesh = generate(2.0, &steel(), &CavitySpec::partial(0.5, 0.5), &MeshResolution::new(3, 16, 4)).unwrap();
    let a = assemble(&mesh, &steel()).unwrap();
    let b = assemble(&mesh, &steel()).unwrap();
    assert_eq!(a.row_ptr, b.row_ptr);
    assert_eq!(a.col_idx, b.col_idx);
    assert!(a.k.iter().zip(&b.k).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert!(a.m.iter().zip(&b.m).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn disjoint_meshes_assemble_block_diagonally() {
    let one = disk(2, 16, 2);
    let mut two = one.clone();
    let offset = one.nodes.len();
    two.nodes.extend(one.nodes.iter().map(|p| [p[0] + 10.0, p[1], p[2]]));
    two.elements.extend(one.elements.iter().map(|e| e.map(|n| n + offset)));
    let s1 = assemble(&one, &steel()).unwrap();
    let s2 = assemble(&two, &steel()).unwrap();
    let n = s1.n_dofs;
    assert_eq!(s2.n_dofs, 2 * n);
    for r in 0..2 * n {
        for s in s2.row_ptr[r]..s2.row_ptr[r + 1] {
            let c = s2.col_idx[s];
            assert_eq!(r < n, c < n, "coupling entry ({r}, {c})");
            let (k1, m1) = s1.entry(r % n, c % n);
            assert!((s2.k[s] - k1).abs() <= 1e-12 * s1.k_max_abs());
            assert!((s2.m[s] - m1).abs() <= 1e-12 * s1.m.iter().fold(0.0f64, |a, v| a.max(v.abs())));
        }
    }
}

/// Eigenvalues of a small dense symmetric matrix by cyclic Jacobi rotations, with the
/// rotated basis accumulated in `v`.
fn jacobi_eigen(mut a: Vec<Vec<f64>>) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut v: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i][j] * a[i][j]).sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-30 * diag {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]) / a[p][q];
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i][i]).collect(), v)
}

/// Lowest nonzero eigenvalue of `(K, M)` by block inverse iteration with Rayleigh-Ritz,
/// the rigid-body modes deflated in the `M` inner product.
fn lowest_elastic_eigenvalue(mesh: &Mesh) -> f64 {
    const BLOCK: usize = 8;
    let sys = assemble(mesh, &steel()).unwrap();
    let m_orthonormalize = |basis: &mut Vec<Vec<f64>>, fixed: &[Vec<f64>]| {
        let mut done: Vec<Vec<f64>> = Vec::new();
        for mut r in basis.drain(..) {
            for q in fixed.iter().chain(done.iter()) {
                let c = dot(q, &sys.mul_m(&r));
                for (a, b) in r.iter_mut().zip(q) {
                    *a -= c * b;
                }
            }
            let s = dot(&r, &sys.mul_m(&r)).sqrt();
            r.iter_mut().for_each(|v| *v /= s);
            done.push(r);
        }
        *basis = done;
    };
    let mut rigid: Vec<Vec<f64>> = rigid_body_modes(&mesh.nodes).into_iter().collect();
    m_orthonormalize(&mut rigid, &[]);
    let kscale = sys.k_max_abs() / sys.m.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let factor = SymmetricFactor::shifted(&sys, -1e-3 * kscale).unwrap();
    let mut next = lcg(5);
    let mut x: Vec<Vec<f64>> = (0..BLOCK).map(|_| (0..sys.n_dofs).map(|_| next()).collect()).collect();
    let mut lowest = f64::INFINITY;
    for _ in 0..300 {
        let mut y: Vec<Vec<f64>> = x.iter().map(|v| factor.solve_real(&sys.mul_m(v))).collect();
        m_orthonormalize(&mut y, &rigid);
        let ky: Vec<Vec<f64>> = y.iter().map(|v| sys.mul_k(v)).collect();
        let reduced: Vec<Vec<f64>> = (0..BLOCK).map(|i| (0..BLOCK).map(|j| 0.5 * (dot(&y[i], &ky[j]) + dot(&y[j], &ky[i]))).collect()).collect();
        let (vals, vecs) = jacobi_eigen(reduced);
        let mut order: Vec<usize> = (0..BLOCK).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        x = order
            .iter()
            .map(|&c| (0..sys.n_dofs).map(|i| (0..BLOCK).map(|j| y[j][i] * vecs[j][c]).sum()).collect())
            .collect();
        let new = vals[order[0]];
        if (new - lowest).abs() < 1e-12 * new {
            return new;
        }
        lowest = new;
    }
    lowest
}

#[test]
fn lowest_eigenvalue_matches_refined_mesh() {
    // the reference mesh has about ten times the elements
    let coarse_mesh = disk(3, 32, 6);
    let fine_mesh = disk(6, 68, 14);
    assert!(fine_mesh.elements.len() >= 10 * coarse_mesh.elements.len());
    let coarse = lowest_elastic_eigenvalue(&coarse_mesh);
    let fine = lowest_elastic_eigenvalue(&fine_mesh);
    let rel = (coarse - fine).abs() / fine;
    assert!(rel < 0.05, "coarse {coarse:e} fine {fine:e} rel {rel:.4}");
}
