//! Direct solution of `(K - omega^2 M - F) U_sca = F_inc - (K - omega^2 M) U_inc`.
//!
//! `A = K - omega^2 M` is real symmetric and factored once per frequency with a supernodal
//! Bunch-Kaufman `L B L^T`. The DtN block `F = P L R P^T` has rank `(2M + 1)(NL + NS)`, so
//! the bordered system is closed with the Woodbury identity:
//! `(I - R P^T A^-1 P L) y = R P^T A^-1 b`, then `x = A^-1 (b + P L y)`.
//! Every solution is checked against the full operator and refined.

use alloc::vec;
use alloc::vec::Vec;

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::perm::PermRef;
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, CholeskySymbolicParams, IntranodeLbltRef, SymbolicCholesky, SymmetricOrdering,
};
use faer::sparse::linalg::SupernodalThreshold;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, Mat, Par, Side};

use crate::dense::{CMatrix, PivotedQr};
use crate::dtn::DtnOperator;
use crate::fem::GlobalSystem;
use crate::C64;

/// Largest accepted relative residual `||b - (A - F) x|| / ||b||`.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Refinement stops once the residual drops below this.
const REFINE_TARGET: f64 = 1e-12;
const MAX_REFINEMENTS: usize = 4;
/// Real right-hand sides per batched solve.
const BATCH: usize = 32;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("sparse symbolic factorization failed")]
    Symbolic,
    #[error("near-singular system: relative residual {residual:.3e} after refinement, capacitance condition {condition:.3e} (trapped mode or cutoff proximity?)")]
    NearSingular { residual: f64, condition: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Factor of the real symmetric indefinite `K - omega^2 M`.
pub struct SymmetricFactor {
    n: usize,
    symbolic: SymbolicCholesky<usize>,
    values: Vec<f64>,
    subdiag: Vec<f64>,
    fwd: Vec<usize>,
    inv: Vec<usize>,
}

impl SymmetricFactor {
    pub fn new(system: &GlobalSystem, omega: f64) -> Result<Self, SolverError> {
        Self::shifted(system, omega * omega)
    }

    /// Factor of `K - sigma M`.
    pub fn shifted(system: &GlobalSystem, sigma: f64) -> Result<Self, SolverError> {
        let n = system.n_dofs;
        let w2 = sigma;
        // upper-triangle columns: column c holds rows r <= c, which by symmetry are the
        // lower part of compressed row c
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        let mut vals = Vec::new();
        col_ptr.push(0usize);
        for c in 0..n {
            for s in system.row_ptr[c]..system.row_ptr[c + 1] {
                let r = system.col_idx[s];
                if r <= c {
                    row_idx.push(r);
                    vals.push(system.k[s] - w2 * system.m[s]);
                }
            }
            col_ptr.push(row_idx.len());
        }
        let sym = SymbolicSparseColMatRef::new_checked(n, n, &col_ptr, None, &row_idx);
        let a = SparseColMatRef::new(sym, &vals);
        let symbolic = factorize_symbolic_cholesky(
            sym,
            Side::Upper,
            SymmetricOrdering::Amd,
            CholeskySymbolicParams { supernodal_flop_ratio_threshold: SupernodalThreshold::FORCE_SUPERNODAL, ..Default::default() },
        )
        .map_err(|_| SolverError::Symbolic)?;
        let mut values = vec![0.0; symbolic.len_val()];
        let mut subdiag = vec![0.0; n];
        let mut fwd = vec![0usize; n];
        let mut inv = vec![0usize; n];
        let mut mem = MemBuffer::new(symbolic.factorize_numeric_intranode_lblt_scratch::<f64>(Par::Seq, Default::default()));
        symbolic.factorize_numeric_intranode_lblt(
            &mut values,
            &mut subdiag,
            &mut fwd,
            &mut inv,
            a,
            Side::Upper,
            Par::Seq,
            MemStack::new(&mut mem),
            Default::default(),
        );
        Ok(Self { n, symbolic, values, subdiag, fwd, inv })
    }

    /// Stored factor entries.
    pub fn factor_entries(&self) -> usize {
        self.values.len()
    }

    pub fn solve_in_place(&self, rhs: &mut Mat<f64>) {
        let perm = PermRef::new_checked(&self.fwd, &self.inv, self.n);
        let f = IntranodeLbltRef::new(&self.symbolic, &self.values, &self.subdiag, perm);
        let mut mem = MemBuffer::new(self.symbolic.solve_in_place_scratch::<f64>(rhs.ncols(), Par::Seq));
        f.solve_in_place_with_conj(Conj::No, rhs.as_mut(), Par::Seq, MemStack::new(&mut mem));
    }

    pub fn solve_real(&self, b: &[f64]) -> Vec<f64> {
        let mut m = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        self.solve_in_place(&mut m);
        (0..self.n).map(|i| m[(i, 0)]).collect()
    }

    /// `A^-1 b` for complex right-hand sides, real and imaginary parts solved together.
    pub fn solve_complex(&self, rhs: &[Vec<C64>]) -> Vec<Vec<C64>> {
        let mut out = Vec::with_capacity(rhs.len());
        for chunk in rhs.chunks(BATCH / 2) {
            let mut m = Mat::<f64>::zeros(self.n, 2 * chunk.len());
            for (j, b) in chunk.iter().enumerate() {
                for (i, v) in b.iter().enumerate() {
                    m[(i, 2 * j)] = v.re;
                    m[(i, 2 * j + 1)] = v.im;
                }
            }
            self.solve_in_place(&mut m);
            for j in 0..chunk.len() {
                out.push((0..self.n).map(|i| C64::new(m[(i, 2 * j)], m[(i, 2 * j + 1)])).collect());
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveStats {
    pub n_dofs: usize,
    pub boundary_dofs: usize,
    /// Rank of the DtN update.
    pub update_rank: usize,
    pub factor_entries: usize,
    /// Approximate factor and update storage in bytes.
    pub memory_bytes: usize,
    pub refinement_steps: usize,
    pub capacitance_condition: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteredSolution {
    pub u_sca: Vec<C64>,
    pub residual: f64,
    pub stats: SolveStats,
}

/// Factored `K - omega^2 M - F` for one frequency.
pub struct ScatteringSolver<'a> {
    system: &'a GlobalSystem,
    dtn: &'a DtnOperator,
    omega: f64,
    factor: SymmetricFactor,
    left: CMatrix,
    right: CMatrix,
    capacitance: PivotedQr,
}

fn norm(v: &[C64]) -> f64 {
    libm::sqrt(v.iter().map(|c| c.norm_sqr()).sum())
}

impl<'a> ScatteringSolver<'a> {
    pub fn new(system: &'a GlobalSystem, omega: f64, dtn: &'a DtnOperator) -> Result<Self, SolverError> {
        if dtn.n_dofs != system.n_dofs {
            return Err(SolverError::Dimension { expected: system.n_dofs, got: dtn.n_dofs });
        }
        let factor = SymmetricFactor::new(system, omega)?;
        let (mut left, mut right) = dtn.low_rank_factors();
        let r = left.cols;
        // scale each rank-one pair to equal column and row norms
        for c in 0..r {
            let ln = norm(left.col(c));
            let rn = libm::sqrt((0..right.cols).map(|j| right[(c, j)].norm_sqr()).sum::<f64>());
            if ln > 0.0 && rn > 0.0 {
                let s = libm::sqrt(ln / rn);
                left.col_mut(c).iter_mut().for_each(|v| *v /= s);
                (0..right.cols).for_each(|j| right[(c, j)] *= s);
            }
        }
        let cols: Vec<Vec<C64>> = (0..r).map(|c| dtn.scatter(left.col(c))).collect();
        let solved = factor.solve_complex(&cols);
        let mut cap = CMatrix::identity(r);
        for (c, z) in solved.iter().enumerate() {
            let rz = right.mul_vec(&dtn.gather(z));
            for (i, v) in rz.into_iter().enumerate() {
                cap[(i, c)] -= v;
            }
        }
        let capacitance = PivotedQr::new(&cap, 1e-14);
        Ok(Self { system, dtn, omega, factor, left, right, capacitance })
    }

    /// `(K - omega^2 M - F) x`.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = self.system.apply_dynamic(self.omega, x);
        for (a, b) in y.iter_mut().zip(self.dtn.apply(x)) {
            *a -= b;
        }
        y
    }

    fn woodbury(&self, b: &[C64]) -> Vec<C64> {
        let z = self.factor.solve_complex(&[b.to_vec()]).pop().unwrap();
        let y = self.capacitance.solve(&self.right.mul_vec(&self.dtn.gather(&z)));
        let lb = self.dtn.scatter(&self.left.mul_vec(&y));
        let rhs: Vec<C64> = b.iter().zip(&lb).map(|(p, q)| p + q).collect();
        self.factor.solve_complex(&[rhs]).pop().unwrap()
    }

    pub fn solve(&self, b: &[C64]) -> Result<ScatteredSolution, SolverError> {
        let n = self.system.n_dofs;
        if b.len() != n {
            return Err(SolverError::Dimension { expected: n, got: b.len() });
        }
        let mut stats = SolveStats {
            n_dofs: n,
            boundary_dofs: self.dtn.nb(),
            update_rank: self.left.cols,
            factor_entries: self.factor.factor_entries(),
            memory_bytes: 8 * self.factor.factor_entries() + 16 * (self.left.data.len() + self.right.data.len() + self.left.cols * self.left.cols),
            refinement_steps: 0,
            capacitance_condition: self.capacitance.condition_estimate(),
        };
        let bn = norm(b);
        if bn == 0.0 {
            return Ok(ScatteredSolution { u_sca: vec![C64::new(0.0, 0.0); n], residual: 0.0, stats });
        }
        let mut x = self.woodbury(b);
        let mut residual;
        loop {
            let ax = self.apply(&x);
            let r: Vec<C64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
            residual = norm(&r) / bn;
            if !residual.is_finite() || residual < REFINE_TARGET || stats.refinement_steps == MAX_REFINEMENTS {
                break;
            }
            let dx = self.woodbury(&r);
            for (xi, d) in x.iter_mut().zip(dx) {
                *xi += d;
            }
            stats.refinement_steps += 1;
        }
        if !(residual < RESIDUAL_TOL) {
            return Err(SolverError::NearSingular { residual, condition: stats.capacitance_condition });
        }
        Ok(ScatteredSolution { u_sca: x, residual, stats })
    }
}

/// Right-hand side `F_inc - (K - omega^2 M) U_inc`.
pub fn scattering_rhs(system: &GlobalSystem, omega: f64, u_inc: &[C64], f_inc: &[C64]) -> Vec<C64> {
    let au = system.apply_dynamic(omega, u_inc);
    f_inc.iter().zip(au).map(|(f, a)| f - a).collect()
}

pub fn solve_scattering(
    system: &GlobalSystem,
    omega: f64,
    dtn: &DtnOperator,
    u_inc: &[C64],
    f_inc: &[C64],
) -> Result<ScatteredSolution, SolverError> {
    ScatteringSolver::new(system, omega, dtn)?.solve(&scattering_rhs(system, omega, u_inc, f_inc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::PlateMaterial;
    use crate::dtn::{AbVariant, Truncation};
    use crate::fem::assemble;
    use crate::incident::{incident_nodal_data, IncidentField};
    use crate::mesh::{generate, CavitySpec, MeshResolution};

    fn case() -> (PlateMaterial, crate::mesh::Mesh, GlobalSystem, DtnOperator) {
        let base = PlateMaterial::from_engineering(1.0, 2.0e11, 0.3, 7800.0, 1.0).unwrap();
        let mat = base.with_omega(base.c_t()).unwrap();
        let mesh = generate(4.0, &mat, &CavitySpec::through(1.0), &MeshResolution { n_radial: 8, n_circumferential: 32, n_thickness: 2, radial_aspect: 2.0 }).unwrap();
        let sys = assemble(&mesh, &mat).unwrap();
        let trunc = Truncation::square(&mat, 0, 4).unwrap();
        let dtn = DtnOperator::build(&mesh, &trunc, AbVariant::Sampled).unwrap();
        (mat, mesh, sys, dtn)
    }

    #[test]
    fn zero_incident_gives_zero_scattering() {
        let (mat, _, sys, dtn) = case();
        let z = vec![C64::new(0.0, 0.0); sys.n_dofs];
        let s = solve_scattering(&sys, mat.omega, &dtn, &z, &z).unwrap();
        assert!(s.u_sca.iter().all(|v| *v == C64::new(0.0, 0.0)));
    }

    #[test]
    fn solution_satisfies_system_and_scales_linearly() {
        let (mat, mesh, sys, dtn) = case();
        let inc = IncidentField::fundamental(&mat).unwrap();
        let (u, f) = incident_nodal_data(&inc, &mesh).unwrap();
        let solver = ScatteringSolver::new(&sys, mat.omega, &dtn).unwrap();
        let b = scattering_rhs(&sys, mat.omega, &u, &f);
        let s1 = solver.solve(&b).unwrap();
        assert!(s1.residual < RESIDUAL_TOL);
        let b2: Vec<C64> = b.iter().map(|v| v * 2.0).collect();
        let s2 = solver.solve(&b2).unwrap();
        let n1 = norm(&s1.u_sca);
        assert!(s1.u_sca.iter().zip(&s2.u_sca).all(|(a, b)| (b - a * 2.0).norm() <= 1e-12 * n1));
    }

    #[test]
    fn decayed_evanescent_columns_at_large_radius() {
        let base = PlateMaterial::from_engineering(1.0, 2.0e11, 0.3, 7800.0, 1.0).unwrap();
        let mat = base.with_omega(base.c_t()).unwrap();
        let res = MeshResolution { n_radial: 10, n_circumferential: 32, n_thickness: 4, radial_aspect: 4.0 };
        let mesh = generate(22.0, &mat, &CavitySpec::through(1.0), &res).unwrap();
        let sys = assemble(&mesh, &mat).unwrap();
        let dtn = DtnOperator::build(&mesh, &Truncation::square(&mat, 4, 4).unwrap(), AbVariant::Sampled).unwrap();
        let inc = IncidentField::fundamental(&mat).unwrap();
        let (u, f) = incident_nodal_data(&inc, &mesh).unwrap();
        let s = solve_scattering(&sys, mat.omega, &dtn, &u, &f).unwrap();
        assert!(s.residual < RESIDUAL_TOL, "{:e}", s.residual);
    }
}
