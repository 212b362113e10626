//! Modal Dirichlet-to-Neumann map on the virtual cylinder `r = a`.
//!
//! Outside the cylinder the scattered field is a sum of outgoing symmetric Lamb and SH
//! modes per circumferential harmonic `m`. For each `m` the boundary displacement is
//! projected onto thickness functions (`D`), the projections are matched against those of
//! the modes (`AB`), and the recovered coefficients are turned into consistent nodal forces
//! (`G`). Summed over harmonics, `F = sum_m G_m AB_m^+ D_m`.
//!
//! Projection rows are ordered `u_r` against `cos(n' pi z / 2h)` for every cosine order,
//! then `u_theta` against the same cosines, then `u_z` against `sin(n' pi z / 2h)`.
//! Columns are the Lamb modes followed by the SH modes.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::dense::{CMatrix, PivotedQr};
use crate::dispersion::{find_lamb_roots, sh_wavenumbers, DispersionError, ModeKind, PlateMaterial};
use crate::math::{cos, gauss_legendre, sin};
use crate::mesh::{BoundaryFace, Mesh};
use crate::modes::{
    cos_projection_integral, lamb_profiles, lamb_stress_profiles, sh_norm_integral, sin_projection_integral, LambMode, ModeError, ShMode,
};
use crate::specfun::{CylinderFunctionValue, CylinderTable, SpecialFunctionError};
use crate::C64;

/// Relative diagonal of `R` below which a projection basis counts as rank deficient.
pub const RANK_TOL: f64 = 1e-10;
/// Condition estimate above which a harmonic is reported as ill-conditioned.
pub const CONDITION_WARN: f64 = 1e8;
/// Gauss points per direction on each boundary face.
pub const FACE_GAUSS: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DtnError {
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error(transparent)]
    SpecialFunction(#[from] SpecialFunctionError),
    #[error("invalid truncation: {0}")]
    Truncation(&'static str),
    #[error("{propagating} propagating Lamb modes exceed the {requested} retained")]
    TooFewLambModes { propagating: usize, requested: usize },
    #[error("n_circumferential = {n_c} cannot resolve harmonic {m_max} (needs >= 4 M + 8)")]
    Aliasing { n_c: usize, m_max: usize },
    #[error("DtN basis degenerate at this frequency for harmonic m = {m} (rank {rank} of {cols})")]
    Degenerate { m: i32, rank: usize, cols: usize },
}

/// One retained outgoing mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeColumn {
    Lamb(LambMode),
    Sh(ShMode),
}

impl ModeColumn {
    pub fn wavenumber(&self) -> C64 {
        match self {
            Self::Lamb(m) => m.k(),
            Self::Sh(m) => m.l(),
        }
    }

    pub fn is_propagating(&self) -> bool {
        match self {
            Self::Lamb(m) => m.is_propagating(),
            Self::Sh(m) => m.is_propagating(),
        }
    }

    pub fn is_lamb(&self) -> bool {
        matches!(self, Self::Lamb(_))
    }
}

/// Harmonics `-m_max ..= m_max`, retained modes and projection orders.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    pub m_max: usize,
    pub lamb: Vec<LambMode>,
    pub sh: Vec<ShMode>,
    pub cos_orders: Vec<u32>,
    pub sin_orders: Vec<u32>,
}

impl Truncation {
    /// Square configuration for even `n`: `n + 1` Lamb modes (all propagating ones first,
    /// then the slowest-decaying evanescent ones), SH orders `0, 2, ..., n` that are not at
    /// cutoff, cosine orders `0, 2, ..., n` and sine orders `2, ..., n`.
    pub fn square(material: &PlateMaterial, n: u32, m_max: usize) -> Result<Self, DtnError> {
        if n % 2 != 0 {
            return Err(DtnError::Truncation("the thickness order N must be even"));
        }
        let want = n as usize + 1;
        let propagating = find_lamb_roots(material, 0)?;
        if propagating.len() > want {
            return Err(DtnError::TooFewLambModes { propagating: propagating.len(), requested: want });
        }
        let roots = find_lamb_roots(material, want - propagating.len())?;
        let lamb = roots.into_iter().map(|r| LambMode::new(material, r)).collect::<Result<Vec<_>, _>>()?;
        let sh = sh_wavenumbers(material, n)?.into_iter().filter(|r| r.kind != ModeKind::Cutoff).map(|r| ShMode::new(material, r)).collect();
        let t = Self { m_max, lamb, sh, cos_orders: (0..=n).step_by(2).collect(), sin_orders: (2..=n).step_by(2).collect() };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), DtnError> {
        if self.cos_orders.iter().chain(&self.sin_orders).any(|n| n % 2 != 0) {
            return Err(DtnError::Truncation("projection orders must be even"));
        }
        if self.sin_orders.contains(&0) {
            return Err(DtnError::Truncation("sine projection orders start at 2"));
        }
        if self.sh.iter().any(|s| s.root.kind == ModeKind::Cutoff || s.l().norm() == 0.0) {
            return Err(DtnError::Truncation("SH modes at cutoff carry no field and must be excluded"));
        }
        if self.cols() == 0 {
            return Err(DtnError::Truncation("no modes retained"));
        }
        if self.rows() < self.cols() {
            return Err(DtnError::Truncation("fewer projection rows than retained modes"));
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        2 * self.cos_orders.len() + self.sin_orders.len()
    }

    pub fn cols(&self) -> usize {
        self.lamb.len() + self.sh.len()
    }

    pub fn columns(&self) -> Vec<ModeColumn> {
        self.lamb.iter().map(|m| ModeColumn::Lamb(*m)).chain(self.sh.iter().map(|m| ModeColumn::Sh(*m))).collect()
    }

    pub fn harmonics(&self) -> impl Iterator<Item = i32> {
        let m = self.m_max as i32;
        -m..=m
    }
}

/// Displacement `(u_r, u_theta, u_z)` and traction `(sigma_r, tau_rtheta, tau_rz)` of a
/// unit-coefficient outgoing mode of harmonic `m` at radius `r`, without `exp(i m theta)`.
/// `hv` holds `H_m` and its derivative at `k r`.
pub fn mode_fields(col: &ModeColumn, m: i32, r: f64, z: f64, hv: CylinderFunctionValue) -> ([C64; 3], [C64; 3]) {
    let (hh, dh) = (hv.value, hv.derivative);
    let mf = m as f64;
    let i = C64::i();
    match col {
        ModeColumn::Lamb(mode) => {
            let k = mode.k();
            let (v, w) = lamb_profiles(mode, z);
            let (s_rr, s_t, s_rz) = lamb_stress_profiles(mode, z);
            let u = [v * dh, i * mf * v * hh / (k * r), w * hh];
            let t = [
                s_rr * hh - s_t * (dh / r - mf * mf * hh / (k * r * r)),
                i * mf * s_t * (dh / r - hh / (k * r * r)),
                -s_rz * dh,
            ];
            (u, t)
        }
        ModeColumn::Sh(mode) => {
            let l = mode.l();
            let mu = mode.mu;
            let uz = mode.profile(z);
            let duz = mode.profile_derivative(z);
            let u = [i * mf * uz * hh / (l * r), -uz * dh, C64::new(0.0, 0.0)];
            let t = [
                2.0 * mu * i * mf * uz * (dh / r - hh / (l * r * r)),
                mu * uz * (2.0 * dh / r + (l - 2.0 * mf * mf / (l * r * r)) * hh),
                i * mf * mu * duz * hh / (l * r),
            ];
            (u, t)
        }
    }
}

/// Cylindrical `(r, theta, z)` components to Cartesian at angle `theta`.
pub fn to_cartesian(v: [C64; 3], theta: f64) -> [C64; 3] {
    let (c, s) = (cos(theta), sin(theta));
    [v[0] * c - v[1] * s, v[0] * s + v[1] * c, v[2]]
}

/// How the mode-projection matrix `AB` is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AbVariant {
    /// Projections of the nodally sampled modes through the same `D` used on the data, so
    /// an interpolated mode is recovered exactly.
    #[default]
    Sampled,
    /// Closed-form thickness integrals times Hankel values.
    Analytic,
}

/// Boundary operators of one harmonic.
#[derive(Debug, Clone)]
pub struct HarmonicBlock {
    pub m: i32,
    /// `rows x nb` projection of boundary dofs.
    pub d: CMatrix,
    /// `rows x cols` projections of the modes.
    pub ab: CMatrix,
    /// `nb x cols` consistent nodal forces of the modes.
    pub g: CMatrix,
    /// `cols x nb` least-squares recovery `AB^+ D`.
    pub recovery: CMatrix,
    pub condition: f64,
}

/// Per-harmonic modal coefficients, columns ordered as in [`Truncation::columns`].
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub m_max: usize,
    pub values: Vec<Vec<C64>>,
}

impl Coefficients {
    pub fn zeros(m_max: usize, cols: usize) -> Self {
        Self { m_max, values: vec![vec![C64::new(0.0, 0.0); cols]; 2 * m_max + 1] }
    }

    pub fn get(&self, m: i32, col: usize) -> C64 {
        self.values[(m + self.m_max as i32) as usize][col]
    }

    pub fn set(&mut self, m: i32, col: usize, v: C64) {
        self.values[(m + self.m_max as i32) as usize][col] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0f64, |a, v| a.max(v.norm()))
    }
}

struct QuadPoint {
    theta: f64,
    z: f64,
    weight: f64,
    shape: [f64; 4],
}

#[derive(Debug, Clone)]
pub struct DtnOperator {
    pub trunc: Truncation,
    pub a: f64,
    pub h: f64,
    pub variant: AbVariant,
    pub n_dofs: usize,
    /// Global ids of the boundary nodes; local dof `3 i + c` is global `3 boundary_nodes[i] + c`.
    pub boundary_nodes: Vec<usize>,
    pub node_theta: Vec<f64>,
    pub node_z: Vec<f64>,
    pub blocks: Vec<HarmonicBlock>,
    columns: Vec<ModeColumn>,
    tables: Vec<CylinderTable>,
    faces: Vec<BoundaryFace>,
    local: Vec<usize>,
}

impl DtnOperator {
    pub fn build(mesh: &Mesh, trunc: &Truncation, variant: AbVariant) -> Result<Self, DtnError> {
        trunc.validate()?;
        let n_c = mesh.resolution.n_circumferential;
        if n_c < 4 * trunc.m_max + 8 {
            return Err(DtnError::Aliasing { n_c, m_max: trunc.m_max });
        }
        let a = mesh.a;
        let boundary_nodes = mesh.boundary_nodes();
        let mut local = vec![usize::MAX; mesh.nodes.len()];
        for (i, &n) in boundary_nodes.iter().enumerate() {
            local[n] = i;
        }
        let mut node_theta = vec![0.0; boundary_nodes.len()];
        for f in &mesh.boundary_faces {
            node_theta[local[f.nodes[0]]] = f.theta[0];
            node_theta[local[f.nodes[3]]] = f.theta[0];
        }
        let node_z = boundary_nodes.iter().map(|&n| mesh.nodes[n][2]).collect();
        let columns = trunc.columns();
        let tables = columns
            .iter()
            .map(|c| CylinderTable::hankel1(trunc.m_max + 1, c.wavenumber() * a))
            .collect::<Result<Vec<_>, _>>()?;
        let mut op = Self {
            trunc: trunc.clone(),
            a,
            h: mesh.h,
            variant,
            n_dofs: 3 * mesh.nodes.len(),
            boundary_nodes,
            node_theta,
            node_z,
            blocks: Vec::new(),
            columns,
            tables,
            faces: mesh.boundary_faces.clone(),
            local,
        };
        let quad = op.quadrature();
        for m in trunc.harmonics() {
            let block = op.harmonic_block(m, &quad)?;
            if block.condition > CONDITION_WARN {
                log::warn!("DtN harmonic m = {m}: condition estimate {:.3e}", block.condition);
            }
            op.blocks.push(block);
        }
        Ok(op)
    }

    fn quadrature(&self) -> Vec<(usize, Vec<QuadPoint>)> {
        let (x, w) = gauss_legendre(FACE_GAUSS);
        self.faces
            .iter()
            .enumerate()
            .map(|(fi, f)| {
                let jac = f.jacobian(self.a);
                let mut pts = Vec::with_capacity(FACE_GAUSS * FACE_GAUSS);
                for (i, &s) in x.iter().enumerate() {
                    for (j, &t) in x.iter().enumerate() {
                        let (theta, z) = f.point(s, t);
                        pts.push(QuadPoint { theta, z, weight: w[i] * w[j] * jac, shape: BoundaryFace::shape(s, t) });
                    }
                }
                (fi, pts)
            })
            .collect()
    }

    pub fn nb(&self) -> usize {
        3 * self.boundary_nodes.len()
    }

    pub fn columns(&self) -> &[ModeColumn] {
        &self.columns
    }

    fn hankel(&self, col: usize, m: i32) -> CylinderFunctionValue {
        self.tables[col].get(m)
    }

    fn mu(&self) -> f64 {
        match &self.columns[0] {
            ModeColumn::Lamb(l) => l.mu,
            ModeColumn::Sh(s) => s.mu,
        }
    }

    fn alpha(&self, n: u32) -> f64 {
        n as f64 * PI / (2.0 * self.h)
    }

    fn harmonic_block(&self, m: i32, quad: &[(usize, Vec<QuadPoint>)]) -> Result<HarmonicBlock, DtnError> {
        let t = &self.trunc;
        let (pc, rows, cols, nb) = (t.cos_orders.len(), t.rows(), t.cols(), self.nb());
        let mu = self.mu();
        let mut d = CMatrix::zeros(rows, nb);
        let mut g = CMatrix::zeros(nb, cols);
        for (fi, pts) in quad {
            let face = &self.faces[*fi];
            let locals = face.nodes.map(|n| self.local[n]);
            for q in pts {
                let e = C64::new(0.0, -(m as f64) * q.theta).exp() * (q.weight / (2.0 * PI * mu));
                for (j, &lj) in locals.iter().enumerate() {
                    let th = self.node_theta[lj];
                    let (cj, sj) = (cos(th), sin(th));
                    let base = e * q.shape[j];
                    for (i, &n) in t.cos_orders.iter().enumerate() {
                        let c = base * cos(self.alpha(n) * q.z);
                        d[(i, 3 * lj)] += c * cj;
                        d[(i, 3 * lj + 1)] += c * sj;
                        d[(pc + i, 3 * lj)] -= c * sj;
                        d[(pc + i, 3 * lj + 1)] += c * cj;
                    }
                    for (i, &n) in t.sin_orders.iter().enumerate() {
                        d[(2 * pc + i, 3 * lj + 2)] += base * sin(self.alpha(n) * q.z);
                    }
                }
                let phase = C64::new(0.0, m as f64 * q.theta).exp();
                for (ci, col) in self.columns.iter().enumerate() {
                    let (_, tr) = mode_fields(col, m, self.a, q.z, self.hankel(ci, m));
                    let tc = to_cartesian(tr.map(|v| v * phase), q.theta);
                    for (j, &lj) in locals.iter().enumerate() {
                        let wj = q.shape[j] * q.weight;
                        for c in 0..3 {
                            g[(3 * lj + c, ci)] += tc[c] * wj;
                        }
                    }
                }
            }
        }
        let ab = match self.variant {
            AbVariant::Sampled => {
                let mut ab = CMatrix::zeros(rows, cols);
                for ci in 0..cols {
                    let u = self.sample_mode(ci, m);
                    ab.col_mut(ci).copy_from_slice(&d.mul_vec(&u));
                }
                ab
            }
            AbVariant::Analytic => self.analytic_ab(m),
        };
        let scale: Vec<f64> = (0..cols).map(|c| {
            let n = libm::sqrt(ab.col(c).iter().map(|v| v.norm_sqr()).sum());
            if n > 0.0 { 1.0 / n } else { 1.0 }
        }).collect();
        let scaled = CMatrix::from_fn(rows, cols, |r, c| ab[(r, c)] * scale[c]);
        let qr = PivotedQr::new(&scaled, RANK_TOL);
        if qr.rank() < cols {
            return Err(DtnError::Degenerate { m, rank: qr.rank(), cols });
        }
        let mut recovery = qr.solve_matrix(&d);
        for c in 0..nb {
            for (r, s) in scale.iter().enumerate() {
                recovery[(r, c)] *= *s;
            }
        }
        Ok(HarmonicBlock { m, d, ab, g, recovery, condition: qr.condition_estimate() })
    }

    fn analytic_ab(&self, m: i32) -> CMatrix {
        let t = &self.trunc;
        let (pc, a) = (t.cos_orders.len(), self.a);
        let mf = m as f64;
        let i = C64::i();
        let mut ab = CMatrix::zeros(t.rows(), t.cols());
        for (ci, col) in self.columns.iter().enumerate() {
            let hv = self.hankel(ci, m);
            match col {
                ModeColumn::Lamb(mode) => {
                    let mu = mode.mu;
                    let k = mode.k();
                    for (r, &n) in t.cos_orders.iter().enumerate() {
                        let iv = cos_projection_integral(n, mode);
                        ab[(r, ci)] = a / mu * hv.derivative * iv;
                        ab[(pc + r, ci)] = a / mu * i * mf * hv.value / (k * a) * iv;
                    }
                    for (r, &n) in t.sin_orders.iter().enumerate() {
                        ab[(2 * pc + r, ci)] = a / mu * hv.value * sin_projection_integral(n, mode);
                    }
                }
                ModeColumn::Sh(mode) => {
                    let l = mode.l();
                    for (r, &n) in t.cos_orders.iter().enumerate() {
                        let is = sh_norm_integral(mode.order(), n, self.h);
                        ab[(r, ci)] = a / mode.mu * i * mf * hv.value / (l * a) * is;
                        ab[(pc + r, ci)] = -a / mode.mu * hv.derivative * is;
                    }
                }
            }
        }
        ab
    }

    /// Cartesian nodal samples (length `nb`) of column `col` with harmonic `m`.
    pub fn sample_mode(&self, col: usize, m: i32) -> Vec<C64> {
        let hv = self.hankel(col, m);
        let mut u = vec![C64::new(0.0, 0.0); self.nb()];
        for (i, (&th, &z)) in self.node_theta.iter().zip(&self.node_z).enumerate() {
            let (f, _) = mode_fields(&self.columns[col], m, self.a, z, hv);
            let phase = C64::new(0.0, m as f64 * th).exp();
            let uc = to_cartesian(f.map(|v| v * phase), th);
            u[3 * i..3 * i + 3].copy_from_slice(&uc);
        }
        u
    }

    pub fn block(&self, m: i32) -> &HarmonicBlock {
        &self.blocks[(m + self.trunc.m_max as i32) as usize]
    }

    /// Boundary entries of a full-length dof vector.
    pub fn gather(&self, u: &[C64]) -> Vec<C64> {
        self.boundary_nodes.iter().flat_map(|&n| [u[3 * n], u[3 * n + 1], u[3 * n + 2]]).collect()
    }

    /// Full-length dof vector with `ub` on the boundary nodes and zero elsewhere.
    pub fn scatter(&self, ub: &[C64]) -> Vec<C64> {
        let mut u = vec![C64::new(0.0, 0.0); self.n_dofs];
        for (i, &n) in self.boundary_nodes.iter().enumerate() {
            u[3 * n..3 * n + 3].copy_from_slice(&ub[3 * i..3 * i + 3]);
        }
        u
    }

    /// Modal coefficients of a full-length scattered displacement (interior entries ignored).
    pub fn recover_coefficients(&self, u: &[C64]) -> Coefficients {
        let ub = self.gather(u);
        Coefficients { m_max: self.trunc.m_max, values: self.blocks.iter().map(|b| b.recovery.mul_vec(&ub)).collect() }
    }

    /// Full-length consistent nodal forces of a modal expansion.
    pub fn modal_forces(&self, c: &Coefficients) -> Vec<C64> {
        let mut fb = vec![C64::new(0.0, 0.0); self.nb()];
        for (b, cm) in self.blocks.iter().zip(&c.values) {
            for (f, v) in fb.iter_mut().zip(b.g.mul_vec(cm)) {
                *f += v;
            }
        }
        self.scatter(&fb)
    }

    /// `F u` for a full-length displacement.
    pub fn apply(&self, u: &[C64]) -> Vec<C64> {
        self.modal_forces(&self.recover_coefficients(u))
    }

    /// Full-length nodal samples of a modal expansion on the boundary nodes.
    pub fn synthesize(&self, c: &Coefficients) -> Vec<C64> {
        let mut ub = vec![C64::new(0.0, 0.0); self.nb()];
        for m in self.trunc.harmonics() {
            for col in 0..self.columns.len() {
                let v = c.get(m, col);
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                for (x, s) in ub.iter_mut().zip(self.sample_mode(col, m)) {
                    *x += v * s;
                }
            }
        }
        self.scatter(&ub)
    }

    /// Dense `nb x nb` boundary block of `F`.
    pub fn assemble_fbar(&self) -> CMatrix {
        let nb = self.nb();
        let mut f = CMatrix::zeros(nb, nb);
        for b in &self.blocks {
            let p = b.g.matmul(&b.recovery);
            for (x, y) in f.data.iter_mut().zip(&p.data) {
                *x += y;
            }
        }
        f
    }

    /// Low-rank factors `F = L R` with `L = [G_m]` (`nb x r`) and `R = [AB_m^+ D_m]` (`r x nb`).
    pub fn low_rank_factors(&self) -> (CMatrix, CMatrix) {
        let nb = self.nb();
        let cols = self.columns.len();
        let r = cols * self.blocks.len();
        let mut left = CMatrix::zeros(nb, r);
        let mut right = CMatrix::zeros(r, nb);
        for (bi, b) in self.blocks.iter().enumerate() {
            for c in 0..cols {
                left.col_mut(bi * cols + c).copy_from_slice(b.g.col(c));
                for j in 0..nb {
                    right[(bi * cols + c, j)] = b.recovery[(c, j)];
                }
            }
        }
        (left, right)
    }

    /// Scattered displacement and traction (Cartesian) of a modal expansion at `(a, theta, z)`.
    pub fn modal_field(&self, c: &Coefficients, theta: f64, z: f64) -> ([C64; 3], [C64; 3]) {
        let mut u = [C64::new(0.0, 0.0); 3];
        let mut t = [C64::new(0.0, 0.0); 3];
        for m in self.trunc.harmonics() {
            let phase = C64::new(0.0, m as f64 * theta).exp();
            for (ci, col) in self.columns.iter().enumerate() {
                let v = c.get(m, ci);
                if v == C64::new(0.0, 0.0) {
                    continue;
                }
                let (uu, tt) = mode_fields(col, m, self.a, z, self.hankel(ci, m));
                for k in 0..3 {
                    u[k] += uu[k] * v * phase;
                    t[k] += tt[k] * v * phase;
                }
            }
        }
        (to_cartesian(u, theta), to_cartesian(t, theta))
    }

    /// Cylindrical `(u, t)` of unit column `col`, harmonic `m`, at `(a, z)`, without the angular phase.
    pub fn column_fields(&self, col: usize, m: i32, z: f64) -> ([C64; 3], [C64; 3]) {
        mode_fields(&self.columns[col], m, self.a, z, self.hankel(col, m))
    }

    /// Largest condition estimate over harmonics.
    pub fn worst_condition(&self) -> f64 {
        self.blocks.iter().map(|b| b.condition).fold(0.0, f64::max)
    }

    pub fn faces(&self) -> &[BoundaryFace] {
        &self.faces
    }
}
