//! Modal coefficients, energy balance on the virtual boundary and far-field amplitudes.
//!
//! Time dependence is `exp(-i omega t)`. The time-averaged power leaving a closed surface
//! is `(omega / 2) Im ∮ t · conj(u) dS` with `t` the traction on the outward normal.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::dtn::{Coefficients, DtnOperator, ModeColumn};
use crate::incident::{incident_displacement, incident_stress_cartesian, IncidentField};
use crate::math::{cos, gauss_legendre, ln, sin, sqrt};
use crate::C64;

/// Gauss points per direction on each boundary face.
pub const FLUX_GAUSS: usize = 4;
/// Thickness quadrature for the reference power: panels times points.
const REF_PANELS: usize = 8;
const REF_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum PostprocessError {
    #[error("incident reference power {0:.3e} is not positive")]
    Reference(f64),
    #[error("column {0} is not a propagating mode")]
    NotPropagating(usize),
}

/// Net outgoing power and its ratio to the incident reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxBalance {
    pub p_net: f64,
    pub p_ref: f64,
    pub error: f64,
}

fn dot_conj(t: &[C64; 3], u: &[C64; 3]) -> C64 {
    t[0] * u[0].conj() + t[1] * u[1].conj() + t[2] * u[2].conj()
}

/// Power of the incident mode through a `2a x 2h` section normal to its direction.
pub fn incident_reference_power(field: &IncidentField, omega: f64, a: f64) -> f64 {
    let h = field.mode.h;
    let (x, w) = gauss_legendre(REF_POINTS);
    let panel = 2.0 * h / REF_PANELS as f64;
    let mut sum = 0.0;
    for p in 0..REF_PANELS {
        let z0 = -h + p as f64 * panel;
        for (xi, wi) in x.iter().zip(&w) {
            let z = z0 + 0.5 * panel * (xi + 1.0);
            let s = incident_stress_cartesian(field, [0.0, 0.0, z]);
            let u = incident_displacement(field, [0.0, 0.0, z]);
            sum += dot_conj(&s[0], &u).im * wi * 0.5 * panel;
        }
    }
    2.0 * a * 0.5 * omega * sum
}

/// `(omega / 2) Im ∮ t · conj(u) dS` over the boundary faces of `dtn`, with the Cartesian
/// total field supplied as a function of `(theta, z)`.
pub fn net_outgoing_power(dtn: &DtnOperator, omega: f64, mut field: impl FnMut(f64, f64) -> ([C64; 3], [C64; 3])) -> f64 {
    let (x, w) = gauss_legendre(FLUX_GAUSS);
    let mut sum = 0.0;
    for face in dtn.faces() {
        let jac = face.jacobian(dtn.a);
        for (i, &s) in x.iter().enumerate() {
            for (j, &t) in x.iter().enumerate() {
                let (th, z) = face.point(s, t);
                let (u, tr) = field(th, z);
                sum += dot_conj(&tr, &u).im * w[i] * w[j] * jac;
            }
        }
    }
    0.5 * omega * sum
}

/// Cartesian incident displacement and traction on the cylinder `r = a`.
pub fn incident_on_cylinder(field: &IncidentField, a: f64, theta: f64, z: f64) -> ([C64; 3], [C64; 3]) {
    let (c, s) = (cos(theta), sin(theta));
    let p = [a * c, a * s, z];
    let sig = incident_stress_cartesian(field, p);
    let t = [0, 1, 2].map(|i| sig[i][0] * c + sig[i][1] * s);
    (incident_displacement(field, p), t)
}

/// Net-flux energy balance of incident plus modal scattered field on the virtual boundary.
pub fn net_flux_balance(
    dtn: &DtnOperator,
    coeffs: &Coefficients,
    field: &IncidentField,
    omega: f64,
) -> Result<FluxBalance, PostprocessError> {
    let p_ref = incident_reference_power(field, omega, dtn.a);
    if !(p_ref > 0.0) {
        return Err(PostprocessError::Reference(p_ref));
    }
    let p_net = net_outgoing_power(dtn, omega, |th, z| {
        let (ui, ti) = incident_on_cylinder(field, dtn.a, th, z);
        let (us, ts) = dtn.modal_field(coeffs, th, z);
        ([0, 1, 2].map(|k| ui[k] + us[k]), [0, 1, 2].map(|k| ti[k] + ts[k]))
    });
    Ok(FluxBalance { p_net, p_ref, error: p_net.abs() / p_ref })
}

/// Outgoing power carried by each column on its own, summed over harmonics, using the
/// angular orthogonality of `exp(i m theta)`. Cross-mode terms are not included.
pub fn modal_powers(dtn: &DtnOperator, coeffs: &Coefficients, omega: f64) -> Vec<f64> {
    let (x, w) = gauss_legendre(REF_POINTS);
    let h = dtn.h;
    let panel = 2.0 * h / REF_PANELS as f64;
    (0..dtn.columns().len())
        .map(|col| {
            let mut total = 0.0;
            for m in dtn.trunc.harmonics() {
                let c = coeffs.get(m, col);
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut integral = 0.0;
                for p in 0..REF_PANELS {
                    let z0 = -h + p as f64 * panel;
                    for (xi, wi) in x.iter().zip(&w) {
                        let z = z0 + 0.5 * panel * (xi + 1.0);
                        let (u, t) = dtn.column_fields(col, m, z);
                        integral += dot_conj(&t, &u).im * wi * 0.5 * panel;
                    }
                }
                total += c.norm_sqr() * integral;
            }
            0.5 * omega * 2.0 * PI * dtn.a * total
        })
        .collect()
}

/// Far-field amplitude `f(theta)` of a propagating column: the scattered field of that mode
/// behaves as `f(theta) exp(i k r) / sqrt(r)` times the thickness profile.
pub fn far_field_pattern(column: &ModeColumn, col: usize, coeffs: &Coefficients, theta: f64) -> Result<C64, PostprocessError> {
    if !column.is_propagating() {
        return Err(PostprocessError::NotPropagating(col));
    }
    let k = column.wavenumber().re;
    let scale = sqrt(2.0 / (PI * k));
    let m_max = coeffs.m_max as i32;
    let mut f = C64::new(0.0, 0.0);
    for m in -m_max..=m_max {
        let phase = C64::new(0.0, m as f64 * theta - m as f64 * PI / 2.0 - PI / 4.0).exp();
        f += coeffs.get(m, col) * scale * phase;
    }
    Ok(f)
}

/// Back-scattered `f(pi)` and forward `f(0)` amplitudes of a propagating column.
pub fn reflection_transmission(column: &ModeColumn, col: usize, coeffs: &Coefficients) -> Result<(C64, C64), PostprocessError> {
    Ok((far_field_pattern(column, col, coeffs, PI)?, far_field_pattern(column, col, coeffs, 0.0)?))
}

/// Coefficients referred to `H_{|m|}` instead of `H_m`: negative harmonics pick up
/// `(-1)^m` since `H_{-m} = (-1)^m H_m`.
pub fn abs_order_normalized(coeffs: &Coefficients) -> Coefficients {
    let mut out = coeffs.clone();
    for m in 1..=coeffs.m_max as i32 {
        if m % 2 == 1 {
            for v in &mut out.values[(coeffs.m_max as i32 - m) as usize] {
                *v = -*v;
            }
        }
    }
    out
}

/// Worst relative violation of the mirror symmetry `A_m = A_{-m}` (Lamb columns) and
/// `B_m = -B_{-m}` (SH columns) of the `H_{|m|}`-referred coefficients, each column scaled
/// by its largest coefficient.
pub fn symmetry_error(columns: &[ModeColumn], coeffs: &Coefficients, propagating_only: bool) -> f64 {
    let coeffs = &abs_order_normalized(coeffs);
    let m_max = coeffs.m_max as i32;
    let mut worst = 0.0f64;
    for (col, c) in columns.iter().enumerate() {
        if propagating_only && !c.is_propagating() {
            continue;
        }
        let sign = if c.is_lamb() { 1.0 } else { -1.0 };
        let scale = (-m_max..=m_max).map(|m| coeffs.get(m, col).norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            continue;
        }
        for m in 1..=m_max {
            let d = (coeffs.get(m, col) - coeffs.get(-m, col) * sign).norm() / scale;
            worst = worst.max(d);
        }
    }
    worst
}

/// Largest change of a propagating `|coefficient|` between two truncations, over the
/// harmonics both retain, relative to the largest `|coefficient|` of that column.
pub fn propagating_coefficient_change(columns: &[ModeColumn], a: &Coefficients, b: &Coefficients) -> f64 {
    let m = a.m_max.min(b.m_max) as i32;
    let mut worst = 0.0f64;
    for (col, c) in columns.iter().enumerate() {
        if !c.is_propagating() {
            continue;
        }
        let scale = (-m..=m).map(|k| a.get(k, col).norm().max(b.get(k, col).norm())).fold(0.0, f64::max);
        if scale == 0.0 {
            continue;
        }
        for k in -m..=m {
            worst = worst.max((a.get(k, col).norm() - b.get(k, col).norm()).abs() / scale);
        }
    }
    worst
}

/// Observed convergence order from successive differences `e_coarse`, `e_fine` of a
/// sequence refined by `ratio` per step.
pub fn observed_order(e_coarse: f64, e_fine: f64, ratio: f64) -> f64 {
    ln(e_coarse / e_fine) / ln(ratio)
}

/// Reflection and transmission amplitudes of one propagating column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarField {
    pub column: usize,
    pub reflection: C64,
    pub transmission: C64,
}

/// Everything derived from one scattered solution.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringResult {
    pub coefficients: Coefficients,
    pub mode_powers: Vec<f64>,
    pub balance: FluxBalance,
    pub far_field: Vec<FarField>,
    pub symmetry_error: f64,
}

impl ScatteringResult {
    pub fn compute(dtn: &DtnOperator, u_sca: &[C64], field: &IncidentField, omega: f64) -> Result<Self, PostprocessError> {
        let coefficients = dtn.recover_coefficients(u_sca);
        let balance = net_flux_balance(dtn, &coefficients, field, omega)?;
        let mode_powers = modal_powers(dtn, &coefficients, omega);
        let mut far_field = Vec::new();
        for (col, c) in dtn.columns().iter().enumerate() {
            if c.is_propagating() {
                let (reflection, transmission) = reflection_transmission(c, col, &coefficients)?;
                far_field.push(FarField { column: col, reflection, transmission });
            }
        }
        let symmetry_error = symmetry_error(dtn.columns(), &coefficients, true);
        Ok(Self { coefficients, mode_powers, balance, far_field, symmetry_error })
    }

    pub fn energy_balance_error(&self) -> f64 {
        self.balance.error
    }
}
