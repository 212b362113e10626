//! Per-frequency orchestration: modes, boundary operator, solve and post-processing.

use crate::config::{ConfigError, Plan};
use crate::output;
use crate::pool::map_ordered;
use plate_dtn_core::dispersion::{find_lamb_roots, sh_wavenumbers, ModeKind};
use plate_dtn_core::dtn::{DtnOperator, ModeColumn};
use plate_dtn_core::fem::{assemble, GlobalSystem};
use plate_dtn_core::incident::{incident_nodal_data, IncidentField};
use plate_dtn_core::mesh::{generate, wavelength_resolution_report, Mesh};
use plate_dtn_core::modes::check_traction_free;
use plate_dtn_core::postprocess::ScatteringResult;
use plate_dtn_core::solver::{scattering_rhs, ScatteringSolver, SolveStats};
use plate_dtn_core::C64;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

/// Largest traction-free residual accepted by `--check`.
pub const TRACTION_FREE_TOL: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{stage} failed at {freq} Hz: {message}")]
    Numerical { freq: f64, stage: &'static str, message: String },
    #[error("{stage} failed: {message}")]
    Setup { stage: &'static str, message: String },
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Numerical { .. } | Self::Setup { .. } => 3,
            Self::Io { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Lamb,
    Sh,
}

impl Family {
    pub fn label(self) -> &'static str {
        match self {
            Self::Lamb => "lamb",
            Self::Sh => "sh",
        }
    }
}

/// Identity of one retained mode column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeInfo {
    pub family: Family,
    /// Position among the retained Lamb roots, or the SH order.
    pub n: u32,
    pub wavenumber: C64,
    pub propagating: bool,
}

pub fn mode_infos(columns: &[ModeColumn]) -> Vec<ModeInfo> {
    let mut lamb = 0;
    columns
        .iter()
        .map(|c| match c {
            ModeColumn::Lamb(m) => {
                lamb += 1;
                ModeInfo { family: Family::Lamb, n: lamb - 1, wavenumber: m.k(), propagating: m.is_propagating() }
            }
            ModeColumn::Sh(m) => ModeInfo { family: Family::Sh, n: m.root.n, wavenumber: m.l(), propagating: m.is_propagating() },
        })
        .collect()
}

/// Mesh and frequency-independent stiffness and mass, shared read-only by all workers.
pub struct Shared {
    pub mesh: Mesh,
    pub system: GlobalSystem,
    pub timings: Vec<(&'static str, Duration)>,
}

pub fn prepare(plan: &Plan) -> Result<Shared, RunError> {
    let t = Instant::now();
    let mesh = generate(plan.a, &plan.material, &plan.cavity, &plan.resolution).map_err(|e| RunError::Setup { stage: "mesh", message: e.to_string() })?;
    let t_mesh = t.elapsed();
    let t = Instant::now();
    let system = assemble(&mesh, &plan.material).map_err(|e| RunError::Setup { stage: "assembly", message: e.to_string() })?;
    log::info!("mesh: {} nodes, {} elements, {} dofs, a = {:.6e} m", mesh.nodes.len(), mesh.elements.len(), system.n_dofs, plan.a);
    Ok(Shared { mesh, system, timings: vec![("mesh", t_mesh), ("assembly", t.elapsed())] })
}

#[derive(Debug, Clone)]
pub struct FrequencyResult {
    pub index: usize,
    pub freq: f64,
    pub omega: f64,
    pub modes: Vec<ModeInfo>,
    pub result: ScatteringResult,
    pub stats: SolveStats,
    pub residual: f64,
    /// Condition estimate of the mode-projection fit per harmonic.
    pub conditions: Vec<(i32, f64)>,
    pub min_elements_per_wavelength: f64,
    pub timings: Vec<(&'static str, Duration)>,
    pub fields_file: Option<PathBuf>,
}

/// Solves one frequency of the sweep and, if `fields_dir` is given, writes its VTK file.
pub fn solve_frequency(plan: &Plan, shared: &Shared, index: usize, fields_dir: Option<&Path>) -> Result<FrequencyResult, RunError> {
    let freq = plan.frequencies[index];
    let material = plan.material_at(freq);
    let omega = material.omega;
    let fail = |stage: &'static str| move |e: String| RunError::Numerical { freq, stage, message: e };
    let mut timings = Vec::new();
    let mut clock = Instant::now();
    let mut lap = |name: &'static str, timings: &mut Vec<(&'static str, Duration)>| {
        timings.push((name, clock.elapsed()));
        clock = Instant::now();
    };

    let trunc = plan.truncation_at(&material).map_err(fail("modes"))?;
    let field = IncidentField::fundamental(&material).map_err(|e| fail("incident")(e.to_string()))?.with_amplitude(plan.amplitude);
    let lamb_roots: Vec<_> = trunc.lamb.iter().map(|m| m.root).collect();
    let sh_roots: Vec<_> = trunc.sh.iter().map(|m| m.root).collect();
    let report = wavelength_resolution_report(&shared.mesh, &lamb_roots, &sh_roots);
    lap("modes", &mut timings);

    let dtn = DtnOperator::build(&shared.mesh, &trunc, plan.variant).map_err(|e| fail("dtn")(e.to_string()))?;
    lap("dtn", &mut timings);
    let (u_inc, f_inc) = incident_nodal_data(&field, &shared.mesh).map_err(|e| fail("incident")(e.to_string()))?;
    let rhs = scattering_rhs(&shared.system, omega, &u_inc, &f_inc);
    lap("incident", &mut timings);
    let solver = ScatteringSolver::new(&shared.system, omega, &dtn).map_err(|e| fail("factorization")(e.to_string()))?;
    lap("factorization", &mut timings);
    let solution = solver.solve(&rhs).map_err(|e| fail("solve")(e.to_string()))?;
    lap("solve", &mut timings);
    let result = ScatteringResult::compute(&dtn, &solution.u_sca, &field, omega).map_err(|e| fail("postprocess")(e.to_string()))?;
    lap("postprocess", &mut timings);

    let fields_file = match fields_dir {
        Some(dir) => {
            let path = dir.join(format!("fields_{index:03}.vtk"));
            let total: Vec<C64> = u_inc.iter().zip(&solution.u_sca).map(|(a, b)| a + b).collect();
            output::write_field_vtk(&path, &shared.mesh, &format!("plate-dtn fields at {freq} Hz"), &total, &solution.u_sca)
                .map_err(|source| RunError::Io { path: path.clone(), source })?;
            lap("export", &mut timings);
            Some(path)
        }
        None => None,
    };

    Ok(FrequencyResult {
        index,
        freq,
        omega,
        modes: mode_infos(dtn.columns()),
        result,
        stats: solution.stats,
        residual: solution.residual,
        conditions: dtn.blocks.iter().map(|b| (b.m, b.condition)).collect(),
        min_elements_per_wavelength: report.min_elements_per_wavelength,
        timings,
        fields_file,
    })
}

/// Everything a finished run produced.
pub struct RunSummary {
    pub shared: Shared,
    pub frequencies: Vec<FrequencyResult>,
    pub workers: usize,
    pub wall: Duration,
}

/// Solves every frequency on `workers` threads and returns results in frequency order.
pub fn run_sweep(plan: &Plan, workers: usize, fields_dir: Option<&Path>) -> Result<RunSummary, RunError> {
    let start = Instant::now();
    let shared = prepare(plan)?;
    let results = map_ordered(plan.frequencies.len(), workers, |i| {
        let r = solve_frequency(plan, &shared, i, fields_dir);
        match &r {
            Ok(fr) => log::info!("{} Hz: energy balance error {:.3e}", fr.freq, fr.result.energy_balance_error()),
            Err(e) => log::error!("{e}"),
        }
        r
    });
    let frequencies = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(RunSummary { shared, frequencies, workers, wall: start.elapsed() })
}

/// Full run: solve the sweep and write coefficients.csv, energy.csv, fields_*.vtk and run.log.
pub fn run(plan: &Plan, workers: usize, config_path: Option<&Path>) -> Result<RunSummary, RunError> {
    let out = &plan.output;
    std::fs::create_dir_all(out).map_err(|source| RunError::Io { path: out.clone(), source })?;
    let summary = run_sweep(plan, workers, plan.write_fields.then_some(out.as_path()))?;
    let io = |path: PathBuf| move |source| RunError::Io { path, source };
    let p = out.join("coefficients.csv");
    output::write_coefficients_csv(&p, plan.m_max, &summary.frequencies).map_err(io(p.clone()))?;
    let p = out.join("energy.csv");
    output::write_energy_csv(&p, &summary.frequencies).map_err(io(p.clone()))?;
    let p = out.join("run.log");
    output::write_run_log(&p, plan, config_path, &summary).map_err(io(p.clone()))?;
    Ok(summary)
}

/// Outcome of `--check` at one frequency.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub freq: f64,
    pub propagating_lamb: usize,
    pub propagating_sh: usize,
    pub modes: Vec<ModeInfo>,
    pub worst_traction_residual: f64,
}

/// Dispersion and mode validation only: roots, retained basis and traction-free residuals.
pub fn check(plan: &Plan) -> Result<Vec<CheckReport>, RunError> {
    plan.frequencies
        .iter()
        .map(|&freq| {
            let material = plan.material_at(freq);
            let fail = |stage: &'static str| move |message: String| RunError::Numerical { freq, stage, message };
            let lamb = find_lamb_roots(&material, 0).map_err(|e| fail("dispersion")(e.to_string()))?;
            let trunc = plan.truncation_at(&material).map_err(fail("modes"))?;
            let worst = trunc.lamb.iter().map(check_traction_free).fold(0.0, f64::max);
            if !(worst < TRACTION_FREE_TOL) {
                return Err(fail("modes")(format!("traction-free residual {worst:.3e} exceeds {TRACTION_FREE_TOL:e}")));
            }
            let n_max = 2 * (material.k_t() * material.h / std::f64::consts::PI) as u32 + 2;
            let propagating_sh = sh_wavenumbers(&material, n_max)
                .map_err(|e| fail("dispersion")(e.to_string()))?
                .iter()
                .filter(|r| r.kind == ModeKind::Propagating)
                .count();
            Ok(CheckReport { freq, propagating_lamb: lamb.len(), propagating_sh, modes: mode_infos(&trunc.columns()), worst_traction_residual: worst })
        })
        .collect()
}
