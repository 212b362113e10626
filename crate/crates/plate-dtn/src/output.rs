//! CSV, legacy VTK and run-log writers, plus a VTK reader for round trips.

use crate::config::Plan;
use crate::pipeline::{FrequencyResult, RunSummary};
use plate_dtn_core::mesh::Mesh;
use plate_dtn_core::C64;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// VTK cell type of the trilinear hexahedron.
pub const VTK_HEXAHEDRON: u8 = 12;

/// Scientific notation with 17 significant digits, enough to round-trip any `f64`.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

const COEFFICIENT_HEADER: &str = "\
# Scattered-field modal coefficients on the virtual boundary r = a.
# u_sca(a, theta, z) = sum_n sum_m c[n, m] U_n(z) H_m(k_n a) exp(i m theta), with the raw
# (unnormalised) Lamb and SH thickness profiles U_n and H_m the outgoing Hankel function of
# the first kind with H_{-m} = (-1)^m H_m. Lamb n counts retained symmetric roots from the
# fastest (n = 0 is S0); SH n is the thickness order. Evanescent raw amplitudes at r = a can
# be many orders of magnitude below propagating ones.
";

pub fn write_coefficients_csv(path: &Path, m_max: usize, results: &[FrequencyResult]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(COEFFICIENT_HEADER.as_bytes())?;
    writeln!(w, "freq,family,n,m,re,im")?;
    let m = m_max as i32;
    for r in results {
        for (col, mode) in r.modes.iter().enumerate() {
            for h in -m..=m {
                let c = r.result.coefficients.get(h, col);
                writeln!(w, "{},{},{},{},{},{}", num(r.freq), mode.family.label(), mode.n, h, num(c.re), num(c.im))?;
            }
        }
    }
    w.flush()
}

pub fn write_energy_csv(path: &Path, results: &[FrequencyResult]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# Powers in W (time-averaged, e^(-i omega t)); P_ref is the incident flux through the 2a x 2h diametral section.")?;
    writeln!(
        w,
        "freq,family,n,propagating,k_re,k_im,mode_power,p_net,p_ref,energy_balance_error,symmetry_error,reflection_re,reflection_im,transmission_re,transmission_im"
    )?;
    for r in results {
        let b = &r.result.balance;
        for (col, mode) in r.modes.iter().enumerate() {
            let ff = r.result.far_field.iter().find(|f| f.column == col);
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                num(r.freq),
                mode.family.label(),
                mode.n,
                mode.propagating,
                num(mode.wavenumber.re),
                num(mode.wavenumber.im),
                num(r.result.mode_powers[col]),
                num(b.p_net),
                num(b.p_ref),
                num(b.error),
                num(r.result.symmetry_error),
                opt(ff.map(|f| f.reflection.re)),
                opt(ff.map(|f| f.reflection.im)),
                opt(ff.map(|f| f.transmission.re)),
                opt(ff.map(|f| f.transmission.im)),
            )?;
        }
    }
    w.flush()
}

/// Legacy ASCII unstructured grid with real and imaginary parts of the total and scattered
/// displacements as separate point vectors.
pub fn write_field_vtk(path: &Path, mesh: &Mesh, title: &str, total: &[C64], scattered: &[C64]) -> io::Result<()> {
    let arrays = [
        ("u_total_re", total.iter().map(|c| c.re).collect::<Vec<_>>()),
        ("u_total_im", total.iter().map(|c| c.im).collect()),
        ("u_sca_re", scattered.iter().map(|c| c.re).collect()),
        ("u_sca_im", scattered.iter().map(|c| c.im).collect()),
    ];
    write_vtk(path, title, &mesh.nodes, &mesh.elements, &arrays.iter().map(|(n, v)| (*n, v.as_slice())).collect::<Vec<_>>())
}

/// Writes points, hexahedra and point vectors (three values per node, flattened).
pub fn write_vtk(path: &Path, title: &str, points: &[[f64; 3]], cells: &[[usize; 8]], vectors: &[(&str, &[f64])]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "{}", title.lines().next().unwrap_or(""))?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", points.len())?;
    for p in points {
        writeln!(w, "{} {} {}", num(p[0]), num(p[1]), num(p[2]))?;
    }
    writeln!(w, "CELLS {} {}", cells.len(), 9 * cells.len())?;
    let mut line = String::new();
    for c in cells {
        line.clear();
        line.push('8');
        for n in c {
            let _ = write!(line, " {n}");
        }
        writeln!(w, "{line}")?;
    }
    writeln!(w, "CELL_TYPES {}", cells.len())?;
    for _ in cells {
        writeln!(w, "{VTK_HEXAHEDRON}")?;
    }
    if !vectors.is_empty() {
        writeln!(w, "POINT_DATA {}", points.len())?;
        for (name, v) in vectors {
            if v.len() != 3 * points.len() {
                return Err(io::Error::new(io::ErrorKind::InvalidInput, format!("array {name} has {} values for {} points", v.len(), points.len())));
            }
            writeln!(w, "VECTORS {name} double")?;
            for p in v.chunks(3) {
                writeln!(w, "{} {} {}", num(p[0]), num(p[1]), num(p[2]))?;
            }
        }
    }
    w.flush()
}

/// Contents of a legacy VTK file written by [`write_vtk`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VtkData {
    pub title: String,
    pub points: Vec<[f64; 3]>,
    pub cells: Vec<Vec<usize>>,
    pub cell_types: Vec<u8>,
    pub vectors: BTreeMap<String, Vec<[f64; 3]>>,
}

fn bad(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

pub fn read_vtk(path: &Path) -> io::Result<VtkData> {
    let mut lines = BufReader::new(File::open(path)?).lines();
    let mut next = || -> io::Result<String> { lines.next().ok_or_else(|| bad("unexpected end of file"))? };
    if !next()?.starts_with("# vtk DataFile") {
        return Err(bad("not a legacy VTK file"));
    }
    let mut data = VtkData { title: next()?, ..Default::default() };
    if next()?.trim() != "ASCII" {
        return Err(bad("only ASCII files are supported"));
    }
    let mut n_points = 0;
    loop {
        let line = match next() {
            Ok(l) => l,
            Err(e) if e.kind() == io::ErrorKind::InvalidData => break,
            Err(e) => return Err(e),
        };
        let words: Vec<&str> = line.split_whitespace().collect();
        let Some(&key) = words.first() else { continue };
        let count = |i: usize| words.get(i).and_then(|w| w.parse::<usize>().ok()).ok_or_else(|| bad(format!("bad header: {line}")));
        let parse3 = |l: &str| -> io::Result<[f64; 3]> {
            let v: Vec<f64> = l.split_whitespace().map(|t| t.parse::<f64>()).collect::<Result<_, _>>().map_err(|e| bad(e.to_string()))?;
            v.try_into().map_err(|_| bad(format!("expected three values: {l}")))
        };
        match key {
            "DATASET" => {}
            "POINTS" => {
                n_points = count(1)?;
                for _ in 0..n_points {
                    data.points.push(parse3(&next()?)?);
                }
            }
            "CELLS" => {
                for _ in 0..count(1)? {
                    let ids: Vec<usize> = next()?.split_whitespace().map(|t| t.parse::<usize>()).collect::<Result<_, _>>().map_err(|e| bad(e.to_string()))?;
                    data.cells.push(ids[1..].to_vec());
                }
            }
            "CELL_TYPES" => {
                for _ in 0..count(1)? {
                    data.cell_types.push(next()?.trim().parse().map_err(|_| bad("bad cell type"))?);
                }
            }
            "POINT_DATA" => {}
            "VECTORS" => {
                let name = words.get(1).ok_or_else(|| bad("unnamed vector array"))?.to_string();
                let mut v = Vec::with_capacity(n_points);
                for _ in 0..n_points {
                    v.push(parse3(&next()?)?);
                }
                data.vectors.insert(name, v);
            }
            other => return Err(bad(format!("unsupported section {other}"))),
        }
    }
    Ok(data)
}

fn secs(d: std::time::Duration) -> String {
    format!("{:.3} s", d.as_secs_f64())
}

/// Human-readable log of the run: setup, per-frequency stage timings and diagnostics.
pub fn write_run_log(path: &Path, plan: &Plan, config_path: Option<&Path>, summary: &RunSummary) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "plate-dtn {}", env!("CARGO_PKG_VERSION"))?;
    if let Some(p) = config_path {
        writeln!(w, "config: {}", p.display())?;
    }
    let mesh = &summary.shared.mesh;
    let mat = &plan.material;
    writeln!(w, "material: h = {} m, lambda = {} Pa, mu = {} Pa, rho = {} kg/m^3", mat.h, mat.lambda, mat.mu, mat.rho)?;
    writeln!(w, "cavity: {:?}, virtual boundary a = {} m", plan.cavity, plan.a)?;
    writeln!(
        w,
        "mesh: {} nodes, {} elements, {} dofs, {} boundary faces, {:?}",
        mesh.nodes.len(),
        mesh.elements.len(),
        summary.shared.system.n_dofs,
        mesh.boundary_faces.len(),
        plan.resolution
    )?;
    writeln!(w, "truncation: M = {}, {:?}, AB = {:?}", plan.m_max, plan.truncation, plan.variant)?;
    for (name, d) in &summary.shared.timings {
        writeln!(w, "setup {name}: {}", secs(*d))?;
    }
    writeln!(w, "workers: {}", summary.workers)?;
    for r in &summary.frequencies {
        writeln!(w, "[{}/{}] {} Hz (omega = {} rad/s)", r.index + 1, summary.frequencies.len(), r.freq, r.omega)?;
        for m in &r.modes {
            let kind = if m.propagating { "propagating" } else { "evanescent" };
            writeln!(w, "  mode {} {}: k = {} {kind}", m.family.label(), m.n, m.wavenumber)?;
        }
        writeln!(w, "  elements per shortest wavelength: {:.2}", r.min_elements_per_wavelength)?;
        let t: Vec<String> = r.timings.iter().map(|(n, d)| format!("{n} {}", secs(*d))).collect();
        writeln!(w, "  timings: {}", t.join(", "))?;
        let s = &r.stats;
        writeln!(
            w,
            "  solver: {} dofs, {} boundary dofs, update rank {}, factor entries {}, memory {:.1} MiB, refinement steps {}, relative residual {:.3e}",
            s.n_dofs,
            s.boundary_dofs,
            s.update_rank,
            s.factor_entries,
            s.memory_bytes as f64 / (1024.0 * 1024.0),
            s.refinement_steps,
            r.residual
        )?;
        writeln!(w, "  capacitance condition estimate: {:.3e}", s.capacitance_condition)?;
        let worst = r.conditions.iter().copied().fold((0, 0.0f64), |a, b| if b.1 > a.1 { b } else { a });
        writeln!(w, "  mode-fit condition: worst {:.3e} at m = {}", worst.1, worst.0)?;
        for (m, c) in &r.conditions {
            if *c > plate_dtn_core::dtn::CONDITION_WARN {
                writeln!(w, "  warning: harmonic {m} condition {c:.3e}")?;
            }
        }
        let b = &r.result.balance;
        writeln!(w, "  energy: P_net = {:.6e} W, P_ref = {:.6e} W, balance error {:.3e}", b.p_net, b.p_ref, b.error)?;
        writeln!(w, "  symmetry error (propagating): {:.3e}", r.result.symmetry_error)?;
        if let Some(f) = &r.fields_file {
            writeln!(w, "  fields: {}", f.display())?;
        }
    }
    writeln!(w, "total wall time: {}", secs(summary.wall))?;
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use plate_dtn_core::dispersion::PlateMaterial;
    use plate_dtn_core::mesh::{generate, CavitySpec, MeshResolution};

    fn small_mesh() -> Mesh {
        let mat = PlateMaterial::from_engineering(1.0, 2.0e11, 0.3, 7800.0, 1.0).unwrap();
        generate(3.0, &mat, &CavitySpec::through(1.0), &MeshResolution::new(2, 16, 2)).unwrap()
    }

    #[test]
    fn vtk_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.vtk");
        let mesh = small_mesh();
        let n = mesh.nodes.len();
        let total: Vec<C64> = (0..3 * n).map(|i| C64::new((i as f64).sin() / 3.0, 1e-300 * i as f64)).collect();
        let sca: Vec<C64> = (0..3 * n).map(|i| C64::new(-(i as f64) * std::f64::consts::PI, 0.1)).collect();
        write_field_vtk(&path, &mesh, "test", &total, &sca).unwrap();
        let data = read_vtk(&path).unwrap();
        assert_eq!(data.points, mesh.nodes);
        assert_eq!(data.cells.len(), mesh.elements.len());
        assert!(data.cells.iter().zip(&mesh.elements).all(|(a, b)| a.as_slice() == b.as_slice()));
        assert!(data.cell_types.iter().all(|&t| t == VTK_HEXAHEDRON));
        let re: Vec<f64> = data.vectors["u_total_re"].iter().flatten().copied().collect();
        assert_eq!(re, total.iter().map(|c| c.re).collect::<Vec<_>>());
        let im: Vec<f64> = data.vectors["u_sca_im"].iter().flatten().copied().collect();
        assert_eq!(im, sca.iter().map(|c| c.im).collect::<Vec<_>>());
    }

    #[test]
    fn zero_solution_exports_zero_arrays() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("z.vtk");
        let mesh = small_mesh();
        let z = vec![C64::new(0.0, 0.0); 3 * mesh.nodes.len()];
        write_field_vtk(&path, &mesh, "zero", &z, &z).unwrap();
        let data = read_vtk(&path).unwrap();
        assert_eq!(data.vectors.len(), 4);
        assert!(data.vectors.values().flatten().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn mismatched_array_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let err = write_vtk(&dir.path().join("x.vtk"), "x", &[[0.0; 3]], &[], &[("u", &[1.0])]).unwrap_err();
        assert_eq!(err.kind(), io::ErrorKind::InvalidInput);
    }
}
