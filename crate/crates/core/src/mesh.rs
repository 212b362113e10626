//! Structured hexahedral meshes of a plate disk `r <= a`, `|z| <= h` around a cavity.
//!
//! The in-plane layout is an O-grid: a tan-spaced square core, blended rings out to the
//! circle `r = r_in`, then polar rings graded out to `r = a`. Ring node `j` sits at
//! `theta_j = -pi/4 + 2 pi j / n_c` on every ring, so the layout is mirror symmetric in `y`.
//! Through-thickness cavities drop the core and start the rings at `r = b`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::dispersion::{LambRoot, ModeKind, PlateMaterial, ShRoot};
use crate::fem::{gauss_points, jacobian};
use crate::math::{atan2, ceil, cos, hypot, round, sin, sqrt, tan};

/// Largest cavity radius as a fraction of the virtual boundary radius.
pub const MAX_CAVITY_FRACTION: f64 = 0.8;
/// Elements per wavelength below which the resolution report warns.
pub const MIN_ELEMENTS_PER_WAVELENGTH: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CavityShape {
    /// Undamaged plate.
    None,
    /// Cylindrical hole through the full thickness.
    ThroughCylinder,
    /// Closed cylindrical void `r <= b`, `|z| <= d`.
    PartialCylinder,
    /// Spheroidal void `r^2 / b^2 + z^2 / d^2 <= 1`.
    Ellipsoid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitySpec {
    pub shape: CavityShape,
    /// Radius `b`.
    pub radius: f64,
    /// Half-depth `d`; ignored for `None` and `ThroughCylinder`.
    pub half_depth: f64,
}

impl CavitySpec {
    pub fn none() -> Self {
        Self { shape: CavityShape::None, radius: 0.0, half_depth: 0.0 }
    }

    pub fn through(b: f64) -> Self {
        Self { shape: CavityShape::ThroughCylinder, radius: b, half_depth: 0.0 }
    }

    pub fn partial(b: f64, d: f64) -> Self {
        Self { shape: CavityShape::PartialCylinder, radius: b, half_depth: d }
    }

    pub fn ellipsoid(b: f64, d: f64) -> Self {
        Self { shape: CavityShape::Ellipsoid, radius: b, half_depth: d }
    }

    /// Exact cavity volume in a plate of half-thickness `h`.
    pub fn volume(&self, h: f64) -> f64 {
        let b = self.radius;
        match self.shape {
            CavityShape::None => 0.0,
            CavityShape::ThroughCylinder => PI * b * b * 2.0 * h,
            CavityShape::PartialCylinder => PI * b * b * 2.0 * self.half_depth.min(h),
            CavityShape::Ellipsoid => 4.0 / 3.0 * PI * b * b * self.half_depth,
        }
    }

    /// A partial cylinder that reaches both faces is a through hole.
    fn normalized(&self, h: f64) -> Self {
        if self.shape == CavityShape::PartialCylinder && self.half_depth >= h {
            Self::through(self.radius)
        } else {
            *self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeshResolution {
    /// Radial cells between `r_in` and `a`.
    pub n_radial: usize,
    pub n_circumferential: usize,
    pub n_thickness: usize,
    /// Radial-to-circumferential size ratio near the cavity, where radial cells grow
    /// geometrically before the spacing is capped.
    pub radial_aspect: f64,
}

impl MeshResolution {
    pub fn new(n_radial: usize, n_circumferential: usize, n_thickness: usize) -> Self {
        Self { n_radial, n_circumferential, n_thickness, radial_aspect: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("n_circumferential = {0} must be at least 16 and divisible by 4")]
    Circumferential(usize),
    #[error("n_thickness = {0} must be even and at least 2")]
    Thickness(usize),
    #[error("n_radial must be at least 1")]
    Radial,
    #[error("radial_aspect must be positive and finite")]
    Aspect,
    #[error("geometry: {0}")]
    Geometry(&'static str),
    #[error("too coarse: the cavity needs n_thickness >= {0} to fit between the plate faces")]
    TooCoarse(usize),
    #[error("element {element} has non-positive Jacobian {det:.3e}")]
    Jacobian { element: usize, det: f64 },
}

/// Q4 face on `r = a`. Nodes run `(theta0, z0), (theta1, z0), (theta1, z1), (theta0, z1)`,
/// which orients the face normal along `+r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryFace {
    pub nodes: [usize; 4],
    pub theta: [f64; 2],
    pub z: [f64; 2],
}

impl BoundaryFace {
    /// `(theta, z)` at face parameters `(s, t)` in `[-1, 1]^2`.
    pub fn point(&self, s: f64, t: f64) -> (f64, f64) {
        let th = 0.5 * ((1.0 - s) * self.theta[0] + (1.0 + s) * self.theta[1]);
        let z = 0.5 * ((1.0 - t) * self.z[0] + (1.0 + t) * self.z[1]);
        (th, z)
    }

    /// Bilinear weights of the four face nodes.
    pub fn shape(s: f64, t: f64) -> [f64; 4] {
        [
            0.25 * (1.0 - s) * (1.0 - t),
            0.25 * (1.0 + s) * (1.0 - t),
            0.25 * (1.0 + s) * (1.0 + t),
            0.25 * (1.0 - s) * (1.0 + t),
        ]
    }

    /// `dS = a dtheta dz` per unit parameter area.
    pub fn jacobian(&self, a: f64) -> f64 {
        a * 0.25 * (self.theta[1] - self.theta[0]) * (self.z[1] - self.z[0])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub a: f64,
    pub h: f64,
    pub cavity: CavitySpec,
    pub resolution: MeshResolution,
    /// Angle of ring node 0.
    pub theta_offset: f64,
    pub nodes: Vec<[f64; 3]>,
    pub elements: Vec<[usize; 8]>,
    pub boundary_faces: Vec<BoundaryFace>,
    /// Nodes lying on the cavity surface, sorted.
    pub cavity_nodes: Vec<usize>,
    /// Radii of the polar rings from `r_in` to `a`.
    pub ring_radii: Vec<f64>,
}

struct Plane {
    pts: Vec<[f64; 2]>,
    cells: Vec<[usize; 4]>,
    /// Cell lies inside `r <= r_in`.
    inner_cell: Vec<bool>,
    /// Point lies inside or on `r = r_in`.
    inner_pt: Vec<bool>,
    /// Point lies on `r = r_in`.
    rim_pt: Vec<bool>,
    /// Node indices of the outermost ring.
    outer: Vec<usize>,
}

/// Radii `r_in = r_0 < ... < r_n = a` with steps `min(alpha r, cap)`, the cap chosen so the
/// last step lands on `a`; purely geometric when even uncapped steps fall short.
pub fn graded_radii(r_in: f64, a: f64, n: usize, alpha: f64) -> Vec<f64> {
    let march = |cap: f64| {
        let mut r = vec![r_in];
        for i in 0..n {
            let step = (alpha * r[i]).min(cap);
            r.push(r[i] + step);
        }
        r
    };
    let mut radii = if march(f64::INFINITY)[n] <= a {
        let ratio = libm::pow(a / r_in, 1.0 / n as f64);
        (0..=n).map(|i| r_in * libm::pow(ratio, i as f64)).collect()
    } else {
        let (mut lo, mut hi) = ((a - r_in) / n as f64, a - r_in);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if march(mid)[n] > a {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        march(lo)
    };
    radii[n] = a;
    radii
}

fn build_plane(r_in: f64, radii: &[f64], nc: usize, with_core: bool, offset: f64) -> Plane {
    let dtheta = 2.0 * PI / nc as f64;
    let theta = |j: usize| offset + dtheta * j as f64;
    let mut pts = Vec::new();
    let mut cells = Vec::new();
    let mut inner_cell = Vec::new();
    let mut rings: Vec<Vec<usize>> = Vec::new();

    let n_transition;
    if with_core {
        let nq = nc / 4;
        let s = 0.5 * r_in;
        let grid: Vec<f64> = (0..=nq).map(|i| s * tan(offset + dtheta * i as f64)).collect();
        let id = |i: usize, k: usize| k * (nq + 1) + i;
        for k in 0..=nq {
            for i in 0..=nq {
                pts.push([grid[i], grid[k]]);
            }
        }
        for k in 0..nq {
            for i in 0..nq {
                cells.push([id(i, k), id(i + 1, k), id(i + 1, k + 1), id(i, k + 1)]);
                inner_cell.push(true);
            }
        }
        let square: Vec<usize> = (0..nc)
            .map(|j| match j / nq {
                0 => id(nq, j),
                1 => id(2 * nq - j, nq),
                2 => id(0, 3 * nq - j),
                _ => id(j - 3 * nq, 0),
            })
            .collect();
        n_transition = nq.div_ceil(2);
        let base: Vec<[f64; 2]> = square.iter().map(|&i| pts[i]).collect();
        rings.push(square);
        for t in 1..=n_transition {
            let f = t as f64 / n_transition as f64;
            let ring: Vec<usize> = (0..nc)
                .map(|j| {
                    let (c, sn) = (cos(theta(j)), sin(theta(j)));
                    let p = if t == n_transition {
                        [r_in * c, r_in * sn]
                    } else {
                        [(1.0 - f) * base[j][0] + f * r_in * c, (1.0 - f) * base[j][1] + f * r_in * sn]
                    };
                    pts.push(p);
                    pts.len() - 1
                })
                .collect();
            rings.push(ring);
        }
    } else {
        n_transition = 0;
        let ring: Vec<usize> = (0..nc)
            .map(|j| {
                pts.push([r_in * cos(theta(j)), r_in * sin(theta(j))]);
                pts.len() - 1
            })
            .collect();
        rings.push(ring);
    }
    let n_inner_pts = pts.len();
    let rim: Vec<usize> = rings.last().unwrap().clone();
    for &r in &radii[1..] {
        let ring: Vec<usize> = (0..nc)
            .map(|j| {
                pts.push([r * cos(theta(j)), r * sin(theta(j))]);
                pts.len() - 1
            })
            .collect();
        rings.push(ring);
    }
    for (ri, pair) in rings.windows(2).enumerate() {
        for j in 0..nc {
            let jn = (j + 1) % nc;
            cells.push([pair[0][j], pair[1][j], pair[1][jn], pair[0][jn]]);
            inner_cell.push(with_core && ri < n_transition);
        }
    }
    let mut inner_pt = vec![false; pts.len()];
    let mut rim_pt = vec![false; pts.len()];
    if with_core {
        inner_pt[..n_inner_pts].iter_mut().for_each(|v| *v = true);
    }
    for &i in &rim {
        inner_pt[i] = true;
        rim_pt[i] = true;
    }
    let outer = rings.last().unwrap().clone();
    Plane { pts, cells, inner_cell, inner_pt, rim_pt, outer }
}

/// Upper-half layer heights for a column whose cavity surface sits at `zc`.
fn stack(zc: f64, h: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|j| if j == n { h } else { zc + (h - zc) * j as f64 / n as f64 }).collect()
}

pub fn generate(a: f64, material: &PlateMaterial, cavity: &CavitySpec, resolution: &MeshResolution) -> Result<Mesh, MeshError> {
    let h = material.h;
    let cavity = cavity.normalized(h);
    let nc = resolution.n_circumferential;
    let nt = resolution.n_thickness;
    if nc < 16 || nc % 4 != 0 {
        return Err(MeshError::Circumferential(nc));
    }
    if nt < 2 || nt % 2 != 0 {
        return Err(MeshError::Thickness(nt));
    }
    if resolution.n_radial == 0 {
        return Err(MeshError::Radial);
    }
    if !(resolution.radial_aspect > 0.0 && resolution.radial_aspect.is_finite()) {
        return Err(MeshError::Aspect);
    }
    if !(a > 0.0 && a.is_finite() && h > 0.0) {
        return Err(MeshError::Geometry("a and h must be positive"));
    }
    let b = cavity.radius;
    let d = cavity.half_depth;
    if cavity.shape != CavityShape::None {
        if !(b > 0.0 && b < MAX_CAVITY_FRACTION * a) {
            return Err(MeshError::Geometry("cavity radius must satisfy 0 < b < 0.8 a"));
        }
        if cavity.shape != CavityShape::ThroughCylinder && !(d > 0.0 && d <= h) {
            return Err(MeshError::Geometry("cavity half-depth must satisfy 0 < d <= h"));
        }
        if cavity.shape == CavityShape::Ellipsoid && d >= h {
            return Err(MeshError::Geometry("an ellipsoidal cavity must leave material above and below it (d < h)"));
        }
    }
    if material.omega > 0.0 {
        if let Ok(roots) = crate::dispersion::find_lamb_roots(material, 0) {
            if let Some(k0) = roots.iter().filter(|r| r.kind == ModeKind::Propagating).map(|r| r.k.re).reduce(f64::max) {
                let standoff = 2.0 * 2.0 * PI / k0;
                if a < b + standoff {
                    log::warn!("virtual boundary a = {a} is closer than two S0 wavelengths to the cavity (recommended a >= {})", b + standoff);
                }
            }
        }
    }

    let offset = -PI / 4.0;
    let alpha = resolution.radial_aspect * 2.0 * PI / nc as f64;
    let (r_in, with_core) = match cavity.shape {
        CavityShape::None => ((a - resolution.n_radial as f64 * 2.0 * PI * a / nc as f64).max(0.3 * a), true),
        CavityShape::ThroughCylinder => (b, false),
        _ => (b, true),
    };
    let radii = graded_radii(r_in, a, resolution.n_radial, alpha);
    let plane = build_plane(r_in, &radii, nc, with_core, offset);
    let np = plane.pts.len();

    let mut nodes = Vec::new();
    let mut elements = Vec::new();
    let mut cavity_nodes = Vec::new();
    let mut boundary_faces = Vec::new();
    // column node ids for each plane point, bottom to top
    let mut columns: Vec<Vec<usize>> = Vec::with_capacity(np);

    match cavity.shape {
        CavityShape::Ellipsoid => {
            let half = nt / 2;
            let mut lower_cols: Vec<Vec<usize>> = Vec::with_capacity(np);
            for (v, p) in plane.pts.iter().enumerate() {
                let r = hypot(p[0], p[1]);
                let zc = if plane.inner_pt[v] && !plane.rim_pt[v] { d * sqrt((1.0 - (r / b) * (r / b)).max(0.0)) } else { 0.0 };
                let zs = stack(zc, h, half);
                let mut upper = Vec::with_capacity(half + 1);
                let mut lower = Vec::with_capacity(half + 1);
                for (j, &z) in zs.iter().enumerate() {
                    if j == 0 && zc == 0.0 {
                        nodes.push([p[0], p[1], 0.0]);
                        let id = nodes.len() - 1;
                        upper.push(id);
                        lower.push(id);
                        if plane.rim_pt[v] {
                            cavity_nodes.push(id);
                        }
                        continue;
                    }
                    nodes.push([p[0], p[1], z]);
                    upper.push(nodes.len() - 1);
                    nodes.push([p[0], p[1], -z]);
                    lower.push(nodes.len() - 1);
                    if j == 0 {
                        cavity_nodes.push(upper[0]);
                        cavity_nodes.push(lower[0]);
                    }
                }
                columns.push(upper);
                lower_cols.push(lower);
            }
            for cell in &plane.cells {
                for j in 0..half {
                    let up = |v: usize, l: usize| columns[v][l];
                    let lo = |v: usize, l: usize| lower_cols[v][l];
                    elements.push([
                        up(cell[0], j),
                        up(cell[1], j),
                        up(cell[2], j),
                        up(cell[3], j),
                        up(cell[0], j + 1),
                        up(cell[1], j + 1),
                        up(cell[2], j + 1),
                        up(cell[3], j + 1),
                    ]);
                    elements.push([
                        lo(cell[0], j + 1),
                        lo(cell[1], j + 1),
                        lo(cell[2], j + 1),
                        lo(cell[3], j + 1),
                        lo(cell[0], j),
                        lo(cell[1], j),
                        lo(cell[2], j),
                        lo(cell[3], j),
                    ]);
                }
            }
            // rebuild full bottom-to-top columns for the outer ring
            for (v, col) in columns.iter_mut().enumerate() {
                let mut full: Vec<usize> = lower_cols[v].iter().rev().copied().collect();
                full.extend_from_slice(&col[1..]);
                *col = full;
            }
        }
        _ => {
            let upper: Vec<f64> = if cavity.shape == CavityShape::PartialCylinder {
                if nt < 4 {
                    return Err(MeshError::TooCoarse(4));
                }
                let n_mid = ((2.0 * round(nt as f64 * d / (2.0 * h))) as usize).clamp(2, nt - 2);
                let (n_in, n_out) = (n_mid / 2, (nt - n_mid) / 2);
                let mut zs: Vec<f64> = (0..n_in).map(|j| d * j as f64 / n_in as f64).collect();
                zs.extend((0..n_out).map(|j| d + (h - d) * j as f64 / n_out as f64));
                zs.push(h);
                zs
            } else {
                stack(0.0, h, nt / 2)
            };
            let mut zs: Vec<f64> = upper[1..].iter().rev().map(|z| -z).collect();
            zs.extend_from_slice(&upper);
            let carved = |cell: usize, l: usize| {
                cavity.shape == CavityShape::PartialCylinder && plane.inner_cell[cell] && 0.5 * (zs[l] + zs[l + 1]).abs() < d
            };
            let mut used = vec![false; np * (nt + 1)];
            for (ci, cell) in plane.cells.iter().enumerate() {
                for l in 0..nt {
                    if carved(ci, l) {
                        continue;
                    }
                    for &v in cell {
                        used[l * np + v] = true;
                        used[(l + 1) * np + v] = true;
                    }
                }
            }
            let mut ids = vec![usize::MAX; np * (nt + 1)];
            for (v, p) in plane.pts.iter().enumerate() {
                for (l, &z) in zs.iter().enumerate() {
                    if used[l * np + v] {
                        nodes.push([p[0], p[1], z]);
                        ids[l * np + v] = nodes.len() - 1;
                    }
                }
            }
            for (v, _) in plane.pts.iter().enumerate() {
                columns.push((0..=nt).map(|l| ids[l * np + v]).collect());
            }
            for (ci, cell) in plane.cells.iter().enumerate() {
                for l in 0..nt {
                    if carved(ci, l) {
                        continue;
                    }
                    let id = |v: usize, l: usize| ids[l * np + v];
                    elements.push([
                        id(cell[0], l),
                        id(cell[1], l),
                        id(cell[2], l),
                        id(cell[3], l),
                        id(cell[0], l + 1),
                        id(cell[1], l + 1),
                        id(cell[2], l + 1),
                        id(cell[3], l + 1),
                    ]);
                }
            }
            match cavity.shape {
                CavityShape::ThroughCylinder => {
                    for v in (0..np).filter(|&v| plane.rim_pt[v]) {
                        cavity_nodes.extend(columns[v].iter().copied());
                    }
                }
                CavityShape::PartialCylinder => {
                    for v in (0..np).filter(|&v| plane.inner_pt[v]) {
                        for (l, &z) in zs.iter().enumerate() {
                            let on_side = plane.rim_pt[v] && z.abs() <= d;
                            let on_cap = (z.abs() - d).abs() == 0.0;
                            if on_side || on_cap {
                                cavity_nodes.push(ids[l * np + v]);
                            }
                        }
                    }
                }
                _ => {}
            }
        }
    }
    cavity_nodes.sort_unstable();
    cavity_nodes.dedup();

    let dtheta = 2.0 * PI / nc as f64;
    for j in 0..nc {
        let (v0, v1) = (plane.outer[j], plane.outer[(j + 1) % nc]);
        let (c0, c1) = (&columns[v0], &columns[v1]);
        for l in 0..nt {
            boundary_faces.push(BoundaryFace {
                nodes: [c0[l], c1[l], c1[l + 1], c0[l + 1]],
                theta: [offset + dtheta * j as f64, offset + dtheta * (j + 1) as f64],
                z: [nodes[c0[l]][2], nodes[c0[l + 1]][2]],
            });
        }
    }

    let mesh = Mesh { a, h, cavity, resolution: *resolution, theta_offset: offset, nodes, elements, boundary_faces, cavity_nodes, ring_radii: radii };
    mesh.check_jacobians()?;
    Ok(mesh)
}

impl Mesh {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_coords(&self, e: usize) -> [[f64; 3]; 8] {
        self.elements[e].map(|i| self.nodes[i])
    }

    pub fn check_jacobians(&self) -> Result<(), MeshError> {
        for e in 0..self.elements.len() {
            let c = self.element_coords(e);
            for xi in gauss_points() {
                let det = jacobian(&c, xi).1;
                if !(det > 0.0) {
                    return Err(MeshError::Jacobian { element: e, det });
                }
            }
        }
        Ok(())
    }

    /// Sum of element volumes by 2x2x2 Gauss quadrature.
    pub fn volume(&self) -> f64 {
        (0..self.elements.len()).map(|e| gauss_points().iter().map(|&xi| jacobian(&self.element_coords(e), xi).1).sum::<f64>()).sum()
    }

    /// Sorted unique nodes on `r = a`.
    pub fn boundary_nodes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.boundary_faces.iter().flat_map(|f| f.nodes).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn node_theta(&self, node: usize) -> f64 {
        atan2(self.nodes[node][1], self.nodes[node][0])
    }

    /// Index of the node at `(x, y, -z)` for every node.
    pub fn z_mirror(&self) -> Option<Vec<usize>> {
        let key = |p: [f64; 3]| (p[0].to_bits(), p[1].to_bits(), p[2].to_bits());
        let map: BTreeMap<(u64, u64, u64), usize> = self.nodes.iter().enumerate().map(|(i, p)| (key(*p), i)).collect();
        self.nodes.iter().map(|p| map.get(&key([p[0], p[1], if p[2] == 0.0 { 0.0 } else { -p[2] }])).copied()).collect()
    }

    /// Largest in-plane edge length over all elements.
    pub fn max_in_plane_edge(&self) -> f64 {
        const EDGES: [(usize, usize); 12] = [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4), (0, 4), (1, 5), (2, 6), (3, 7)];
        let mut m = 0.0f64;
        for e in &self.elements {
            for (i, j) in EDGES {
                let (p, q) = (self.nodes[e[i]], self.nodes[e[j]]);
                m = m.max(hypot(p[0] - q[0], p[1] - q[1]));
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionReport {
    pub max_edge: f64,
    /// `(wavelength, elements per wavelength)` for each propagating mode.
    pub per_mode: Vec<(f64, f64)>,
    pub min_elements_per_wavelength: f64,
}

impl ResolutionReport {
    pub fn is_adequate(&self) -> bool {
        self.min_elements_per_wavelength >= MIN_ELEMENTS_PER_WAVELENGTH
    }
}

pub fn wavelength_resolution_report(mesh: &Mesh, lamb: &[LambRoot], sh: &[ShRoot]) -> ResolutionReport {
    let max_edge = mesh.max_in_plane_edge();
    let ks = lamb.iter().filter(|r| r.kind == ModeKind::Propagating).map(|r| r.k.re).chain(sh.iter().filter(|r| r.kind == ModeKind::Propagating).map(|r| r.l.re));
    let per_mode: Vec<(f64, f64)> = ks.map(|k| (2.0 * PI / k, 2.0 * PI / k / max_edge)).collect();
    let min = per_mode.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    if min < MIN_ELEMENTS_PER_WAVELENGTH {
        log::warn!("only {min:.1} elements per wavelength (recommended >= {MIN_ELEMENTS_PER_WAVELENGTH})");
    }
    ResolutionReport { max_edge, per_mode, min_elements_per_wavelength: min }
}

/// Number of rings a solid-disk annulus would need for square-ish cells at `r = a`.
pub fn suggested_radial_cells(a: f64, span: f64, n_circumferential: usize) -> usize {
    ceil(span / (2.0 * PI * a / n_circumferential as f64)) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn material() -> PlateMaterial {
        PlateMaterial::from_engineering(1.0, 2.0e11, 0.3, 7800.0, 1.0).unwrap()
    }

    fn all_shapes() -> [CavitySpec; 4] {
        [CavitySpec::none(), CavitySpec::through(1.0), CavitySpec::partial(1.0, 0.5), CavitySpec::ellipsoid(1.0, 0.6)]
    }

    #[test]
    fn solid_disk_annulus_node_count() {
        let res = MeshResolution::new(3, 16, 2);
        let m = generate(4.0, &material(), &CavitySpec::none(), &res).unwrap();
        let annulus = (res.n_radial + 1) * 16 * (res.n_thickness + 1);
        let nq = 4;
        let core = ((nq + 1) * (nq + 1) + (nq / 2) * 16 - 16) * 3;
        assert_eq!(m.node_count(), annulus + core);
    }

    #[test]
    fn invariants_for_every_shape() {
        for cavity in all_shapes() {
            let res = MeshResolution { n_radial: 6, n_circumferential: 32, n_thickness: 4, radial_aspect: 1.5 };
            let m = generate(4.0, &material(), &cavity, &res).unwrap();
            let dt = 2.0 * PI / 32.0;
            for f in &m.boundary_faces {
                assert!(((f.theta[1] - f.theta[0]) - dt).abs() < 1e-14);
                for (k, &n) in f.nodes.iter().enumerate() {
                    let p = m.nodes[n];
                    assert!((hypot(p[0], p[1]) - 4.0).abs() < 1e-10 * 4.0);
                    let th = f.theta[usize::from(k == 1 || k == 2)];
                    let z = f.z[usize::from(k >= 2)];
                    assert!((4.0 * cos(th) - p[0]).abs() < 1e-12 * 4.0);
                    assert!((4.0 * sin(th) - p[1]).abs() < 1e-12 * 4.0);
                    assert_eq!(z, p[2]);
                }
            }
            let mirror = m.z_mirror().expect("node set symmetric in z");
            let mut elems: Vec<[usize; 8]> = m.elements.iter().map(|e| { let mut s = *e; s.sort_unstable(); s }).collect();
            elems.sort_unstable();
            for e in &m.elements {
                let mut img = e.map(|i| mirror[i]);
                img.sort_unstable();
                assert!(elems.binary_search(&img).is_ok());
            }
            if matches!(cavity.shape, CavityShape::ThroughCylinder | CavityShape::PartialCylinder) {
                for &n in &m.cavity_nodes {
                    let p = m.nodes[n];
                    let r = hypot(p[0], p[1]);
                    let on_side = (r - 1.0).abs() < 1e-10;
                    let on_cap = (p[2].abs() - cavity.half_depth).abs() < 1e-12 && r <= 1.0 + 1e-10;
                    assert!(on_side || on_cap, "{p:?}");
                }
            }
            if cavity.shape == CavityShape::Ellipsoid {
                for &n in &m.cavity_nodes {
                    let p = m.nodes[n];
                    let s = (p[0] * p[0] + p[1] * p[1]) + p[2] * p[2] / (0.36);
                    assert!((s - 1.0).abs() < 1e-10, "{p:?}");
                }
            }
            assert!(!m.cavity_nodes.is_empty() || cavity.shape == CavityShape::None);
        }
    }

    #[test]
    fn volume_matches_analytic() {
        for cavity in all_shapes() {
            let res = MeshResolution { n_radial: 24, n_circumferential: 128, n_thickness: 8, radial_aspect: 1.0 };
            let m = generate(4.0, &material(), &cavity, &res).unwrap();
            let exact = PI * 16.0 * 2.0 - cavity.volume(1.0);
            let rel = (m.volume() - exact).abs() / exact;
            assert!(rel < 1e-3, "{cavity:?}: {rel}");
        }
    }

    #[test]
    fn rejects_bad_resolution_and_geometry() {
        let m = material();
        assert_eq!(generate(4.0, &m, &CavitySpec::none(), &MeshResolution::new(2, 18, 2)), Err(MeshError::Circumferential(18)));
        assert_eq!(generate(4.0, &m, &CavitySpec::none(), &MeshResolution::new(2, 16, 3)), Err(MeshError::Thickness(3)));
        assert!(matches!(generate(4.0, &m, &CavitySpec::through(3.3), &MeshResolution::new(2, 16, 2)), Err(MeshError::Geometry(_))));
        assert!(matches!(generate(4.0, &m, &CavitySpec::partial(1.0, 0.5), &MeshResolution::new(2, 16, 2)), Err(MeshError::TooCoarse(4))));
        assert!(matches!(generate(4.0, &m, &CavitySpec::ellipsoid(1.0, 1.0), &MeshResolution::new(2, 16, 2)), Err(MeshError::Geometry(_))));
    }

    #[test]
    fn graded_radii_are_monotone_and_capped() {
        let r = graded_radii(1.0, 20.0, 30, 0.2);
        assert_eq!(r[30], 20.0);
        let steps: Vec<f64> = r.windows(2).map(|w| w[1] - w[0]).collect();
        assert!(steps.iter().all(|&s| s > 0.0));
        assert!(steps.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        let g = graded_radii(1.0, 20.0, 3, 0.2);
        assert!((g[1] / g[0] - g[2] / g[1]).abs() < 1e-12);
    }

    #[test]
    fn wavelength_report_scales_with_refinement() {
        let mat = material();
        let k = crate::C64::new(0.7, 0.0);
        let root = LambRoot::from_wavenumber(&mat.with_omega(1.0).unwrap(), k);
        let root = LambRoot { kind: ModeKind::Propagating, ..root };
        let res = |n: usize| MeshResolution { n_radial: 4 * n, n_circumferential: 32 * n, n_thickness: 2, radial_aspect: 10.0 };
        let coarse = generate(4.0, &mat, &CavitySpec::through(1.0), &res(1)).unwrap();
        let fine = generate(4.0, &mat, &CavitySpec::through(1.0), &res(2)).unwrap();
        let rc = wavelength_resolution_report(&coarse, &[root], &[]);
        let rf = wavelength_resolution_report(&fine, &[root], &[]);
        assert!((rc.min_elements_per_wavelength - 2.0 * PI / 0.7 / rc.max_edge).abs() < 1e-12);
        let ratio = rf.min_elements_per_wavelength / rc.min_elements_per_wavelength;
        assert!((ratio - 2.0).abs() < 0.01, "{ratio}");
    }
}
