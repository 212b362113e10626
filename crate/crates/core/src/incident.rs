//! The incident fundamental symmetric Lamb wave `phi = exp(i k0 x)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::dispersion::{find_lamb_roots, DispersionError, ModeKind, PlateMaterial};
use crate::math::{ceil, cos, gauss_legendre, i_pow, sin};
use crate::mesh::Mesh;
use crate::modes::{lamb_profile_derivatives, lamb_profiles, lamb_stress_profiles, LambMode, ModeError};
use crate::specfun::{CylinderTable, SpecialFunctionError};
use crate::C64;

/// Series terms below this fraction of the accumulated magnitude end the harmonic sum.
pub const SERIES_TOL: f64 = 1e-10;
/// Gauss points per direction on boundary faces.
pub const FACE_GAUSS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum IncidentError {
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error(transparent)]
    SpecialFunction(#[from] SpecialFunctionError),
    #[error("no propagating symmetric Lamb mode at this frequency")]
    NoPropagatingMode,
    #[error("incident series not converged at {max_order} harmonics (k0 a = {k0a:.3})")]
    NotConverged { max_order: usize, k0a: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentField {
    pub mode: LambMode,
    pub amplitude: C64,
}

impl IncidentField {
    /// Unit-amplitude S0 wave: the propagating symmetric root with the largest wavenumber.
    pub fn fundamental(material: &PlateMaterial) -> Result<Self, IncidentError> {
        let roots = find_lamb_roots(material, 0)?;
        let root = roots
            .into_iter()
            .filter(|r| r.kind == ModeKind::Propagating)
            .max_by(|a, b| a.k.re.total_cmp(&b.k.re))
            .ok_or(IncidentError::NoPropagatingMode)?;
        Ok(Self { mode: LambMode::new(material, root)?, amplitude: C64::new(1.0, 0.0) })
    }

    pub fn with_amplitude(self, amplitude: C64) -> Self {
        Self { amplitude, ..self }
    }

    pub fn k0(&self) -> f64 {
        self.mode.k().re
    }
}

/// Closed-form `(u_x, u_y, u_z)`.
pub fn incident_displacement(field: &IncidentField, p: [f64; 3]) -> [C64; 3] {
    let (v, w) = lamb_profiles(&field.mode, p[2]);
    let e = field.amplitude * C64::new(0.0, field.k0() * p[0]).exp();
    [C64::i() * v * e, C64::new(0.0, 0.0), w * e]
}

/// Closed-form Cartesian stress tensor from Hooke's law.
pub fn incident_stress_cartesian(field: &IncidentField, p: [f64; 3]) -> [[C64; 3]; 3] {
    let m = &field.mode;
    let k = field.k0();
    let (v, w) = lamb_profiles(m, p[2]);
    let (dv, dw) = lamb_profile_derivatives(m, p[2]);
    let e = field.amplitude * C64::new(0.0, k * p[0]).exp();
    let dil = dw - k * v;
    let sxx = (m.lambda * dil - 2.0 * m.mu * k * v) * e;
    let syy = m.lambda * dil * e;
    let szz = (m.lambda * dil + 2.0 * m.mu * dw) * e;
    let sxz = m.mu * C64::i() * (dv + k * w) * e;
    let zero = C64::new(0.0, 0.0);
    [[sxx, zero, sxz], [zero, syy, zero], [sxz, zero, szz]]
}

/// `(u_r, u_theta, u_z)` from the Jacobi-Anger series over `|m| <= max_order`.
pub fn incident_displacement_series(field: &IncidentField, r: f64, theta: f64, z: f64, max_order: usize) -> Result<[C64; 3], IncidentError> {
    let k = field.k0();
    let table = CylinderTable::bessel_j(max_order, C64::new(k * r, 0.0))?;
    let (v, w) = lamb_profiles(&field.mode, z);
    let mut out = [C64::new(0.0, 0.0); 3];
    for m in -(max_order as i32)..=max_order as i32 {
        let j = table.get(m);
        let f = i_pow(m as i64) * C64::new(0.0, m as f64 * theta).exp();
        out[0] += v * j.derivative * f;
        out[1] += C64::i() * m as f64 * v * j.value / (k * r) * f;
        out[2] += w * j.value * f;
    }
    Ok(out.map(|c| c * field.amplitude))
}

/// Harmonic series of the incident tractions on the cylinder `r = a`.
#[derive(Debug, Clone)]
pub struct IncidentSeries {
    field: IncidentField,
    a: f64,
    table: CylinderTable,
}

impl IncidentSeries {
    pub fn new(field: &IncidentField, a: f64) -> Result<Self, IncidentError> {
        let x = field.k0() * a;
        let max_order = 4 * ceil(x) as usize + 40;
        Ok(Self { field: *field, a, table: CylinderTable::bessel_j(max_order, C64::new(x, 0.0))? })
    }

    pub fn max_order(&self) -> usize {
        self.table.max_order()
    }

    /// `(sigma_r, tau_rtheta, tau_rz)` at `(a, theta, z)` and the number of harmonics used.
    pub fn tractions(&self, theta: f64, z: f64) -> Result<([C64; 3], usize), IncidentError> {
        let k = self.field.k0();
        let a = self.a;
        let (s_rr, s_t, s_rz) = lamb_stress_profiles(&self.field.mode, z);
        let mut out = [C64::new(0.0, 0.0); 3];
        let mut acc = 0.0;
        for m in 0..=self.max_order() as i32 {
            let mut size = 0.0;
            let orders: &[i32] = if m == 0 { &[0] } else { &[m, -m] };
            for &sm in orders {
                let j = self.table.get(sm);
                let f = i_pow(sm as i64) * C64::new(0.0, sm as f64 * theta).exp();
                let mf = sm as f64;
                let t = [
                    (s_rr * j.value - s_t * (j.derivative / a - mf * mf * j.value / (k * a * a))) * f,
                    C64::i() * mf * s_t * (k * j.derivative / a - j.value / (a * a)) / k * f,
                    -s_rz * j.derivative * f,
                ];
                for c in 0..3 {
                    out[c] += t[c];
                    size += t[c].norm();
                }
            }
            acc += size;
            if m as f64 > k * a && size <= SERIES_TOL * acc {
                return Ok((out.map(|c| c * self.field.amplitude), m as usize));
            }
        }
        Err(IncidentError::NotConverged { max_order: self.max_order(), k0a: k * a })
    }
}

/// `(sigma_r, tau_rtheta, tau_rz)` of the incident wave on the cylinder `r = a`.
pub fn incident_tractions_on_cylinder(field: &IncidentField, a: f64, theta: f64, z: f64) -> Result<[C64; 3], IncidentError> {
    Ok(IncidentSeries::new(field, a)?.tractions(theta, z)?.0)
}

/// Cylindrical traction components to Cartesian at angle `theta`.
pub fn cylindrical_to_cartesian(t: [C64; 3], theta: f64) -> [C64; 3] {
    let (c, s) = (cos(theta), sin(theta));
    [t[0] * c - t[1] * s, t[0] * s + t[1] * c, t[2]]
}

/// Consistent nodal forces `int N_J t dS` on the virtual boundary for a traction field
/// given in Cartesian components as a function of `(theta, z)`.
pub fn boundary_nodal_forces<E>(
    mesh: &Mesh,
    mut traction: impl FnMut(f64, f64) -> Result<[C64; 3], E>,
) -> Result<Vec<C64>, E> {
    let (x, w) = gauss_legendre(FACE_GAUSS);
    let mut f = vec![C64::new(0.0, 0.0); 3 * mesh.nodes.len()];
    for face in &mesh.boundary_faces {
        let jac = face.jacobian(mesh.a);
        for (i, &s) in x.iter().enumerate() {
            for (j, &t) in x.iter().enumerate() {
                let (th, z) = face.point(s, t);
                let tr = traction(th, z)?;
                let n = crate::mesh::BoundaryFace::shape(s, t);
                let wt = w[i] * w[j] * jac;
                for (local, &node) in face.nodes.iter().enumerate() {
                    for c in 0..3 {
                        f[3 * node + c] += tr[c] * (n[local] * wt);
                    }
                }
            }
        }
    }
    Ok(f)
}

/// Nodal incident displacements at every node and equivalent incident forces on the
/// virtual boundary faces (zero elsewhere).
pub fn incident_nodal_data(field: &IncidentField, mesh: &Mesh) -> Result<(Vec<C64>, Vec<C64>), IncidentError> {
    let u: Vec<C64> = mesh.nodes.iter().flat_map(|&p| incident_displacement(field, p)).collect();
    let series = IncidentSeries::new(field, mesh.a)?;
    let f = boundary_nodal_forces(mesh, |th, z| Ok::<_, IncidentError>(cylindrical_to_cartesian(series.tractions(th, z)?.0, th)))?;
    Ok((u, f))
}
