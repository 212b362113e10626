//! Run configuration: TOML schema, defaults and validation.

use plate_dtn_core::dispersion::{find_lamb_roots, sh_wavenumbers, ModeKind, PlateMaterial};
use plate_dtn_core::dtn::{AbVariant, Truncation};
use plate_dtn_core::incident::IncidentField;
use plate_dtn_core::mesh::{CavitySpec, MeshResolution, MAX_CAVITY_FRACTION};
use plate_dtn_core::modes::{LambMode, ShMode};
use serde::Deserialize;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

/// Value of the `schema` key this build reads.
pub const SCHEMA: &str = "plate-dtn/1";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    pub material: MaterialConfig,
    pub frequency: FrequencyConfig,
    #[serde(default)]
    pub cavity: CavityConfig,
    pub mesh: MeshConfig,
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub boundary: BoundaryConfig,
    #[serde(default)]
    pub incident: IncidentConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub run: RunSection,
}

/// Elastic constants in SI units. Give either `young` and `poisson` or `lame_lambda` and `lame_mu`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    /// Full plate thickness `2h`.
    pub thickness: f64,
    pub density: f64,
    pub young: Option<f64>,
    pub poisson: Option<f64>,
    pub lame_lambda: Option<f64>,
    pub lame_mu: Option<f64>,
}

/// Frequencies in Hz: an explicit list or an evenly spaced range.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyConfig {
    pub values: Option<Vec<f64>>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub count: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CavityShape {
    #[default]
    None,
    Through,
    Partial,
    Ellipsoid,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct CavityConfig {
    #[serde(default)]
    pub shape: CavityShape,
    pub radius: Option<f64>,
    pub half_depth: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub n_radial: usize,
    pub n_circumferential: usize,
    pub n_thickness: usize,
    #[serde(default = "one")]
    pub radial_aspect: f64,
}

fn one() -> f64 {
    1.0
}

/// Harmonics `-harmonics ..= harmonics`, and either the square thickness order `n` or
/// explicit projection orders and mode lists.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    pub harmonics: usize,
    pub thickness_order: Option<u32>,
    pub cos_orders: Option<Vec<u32>>,
    pub sin_orders: Option<Vec<u32>>,
    pub lamb_modes: Option<usize>,
    pub sh_orders: Option<Vec<u32>>,
    #[serde(default)]
    pub ab: AbChoice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AbChoice {
    #[default]
    Sampled,
    Analytic,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum RadiusSetting {
    Value(f64),
    Keyword(String),
}

impl Default for RadiusSetting {
    fn default() -> Self {
        Self::Keyword("auto".into())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryConfig {
    #[serde(default)]
    pub radius: RadiusSetting,
    /// Standoff in S0 wavelengths used when `radius = "auto"`.
    #[serde(default = "two")]
    pub standoff_wavelengths: f64,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self { radius: RadiusSetting::default(), standoff_wavelengths: 2.0 }
    }
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentConfig {
    #[serde(default = "s0")]
    pub mode: String,
    #[serde(default = "unit")]
    pub amplitude: [f64; 2],
}

impl Default for IncidentConfig {
    fn default() -> Self {
        Self { mode: s0(), amplitude: unit() }
    }
}

fn s0() -> String {
    "S0".into()
}

fn unit() -> [f64; 2] {
    [1.0, 0.0]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub directory: PathBuf,
    #[serde(default = "yes")]
    pub fields: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: default_dir(), fields: true }
    }
}

fn default_dir() -> PathBuf {
    PathBuf::from("plate-dtn-out")
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "one_worker")]
    pub workers: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { workers: one_worker() }
    }
}

fn one_worker() -> usize {
    1
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse configuration: {0}")]
    Parse(String),
    #[error("invalid configuration:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
}

/// How the modal basis is chosen at each frequency.
#[derive(Debug, Clone, PartialEq)]
pub enum TruncationPlan {
    Square { n: u32 },
    Explicit { lamb_modes: usize, sh_orders: Vec<u32>, cos_orders: Vec<u32>, sin_orders: Vec<u32> },
}

/// A configuration with every precondition checked and derived quantities filled in.
#[derive(Debug, Clone)]
pub struct Plan {
    /// Material at the first listed frequency.
    pub material: PlateMaterial,
    pub frequencies: Vec<f64>,
    pub a: f64,
    pub cavity: CavitySpec,
    pub resolution: MeshResolution,
    pub m_max: usize,
    pub truncation: TruncationPlan,
    pub variant: AbVariant,
    pub amplitude: plate_dtn_core::C64,
    pub output: PathBuf,
    pub write_fields: bool,
    pub workers: usize,
}

impl Plan {
    pub fn omega(&self, freq: f64) -> f64 {
        2.0 * PI * freq
    }

    pub fn material_at(&self, freq: f64) -> PlateMaterial {
        PlateMaterial { omega: self.omega(freq), ..self.material }
    }

    /// Retained modes and projection orders at one frequency.
    pub fn truncation_at(&self, material: &PlateMaterial) -> Result<Truncation, String> {
        match &self.truncation {
            TruncationPlan::Square { n } => Truncation::square(material, *n, self.m_max).map_err(|e| e.to_string()),
            TruncationPlan::Explicit { lamb_modes, sh_orders, cos_orders, sin_orders } => {
                let propagating = find_lamb_roots(material, 0).map_err(|e| e.to_string())?.len();
                if propagating > *lamb_modes {
                    return Err(format!("{propagating} propagating Lamb modes exceed the {lamb_modes} retained"));
                }
                let roots = find_lamb_roots(material, lamb_modes - propagating).map_err(|e| e.to_string())?;
                let lamb = roots.into_iter().map(|r| LambMode::new(material, r)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
                let max_order = sh_orders.iter().copied().max().unwrap_or(0);
                let sh_roots = sh_wavenumbers(material, max_order).map_err(|e| e.to_string())?;
                let mut sh = Vec::new();
                for &n in sh_orders {
                    match sh_roots.iter().find(|r| r.n == n) {
                        Some(r) if r.kind == ModeKind::Cutoff => return Err(format!("SH{n} is exactly at cutoff")),
                        Some(r) => sh.push(ShMode::new(material, *r)),
                        None => return Err(format!("SH order {n} is not available")),
                    }
                }
                let t = Truncation { m_max: self.m_max, lamb, sh, cos_orders: cos_orders.clone(), sin_orders: sin_orders.clone() };
                t.validate().map_err(|e| e.to_string())?;
                Ok(t)
            }
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_owned(), source })?;
        Self::from_toml(&text)
    }

    pub fn frequencies(&self) -> Result<Vec<f64>, String> {
        let f = &self.frequency;
        match (&f.values, f.start, f.stop, f.count) {
            (Some(v), None, None, None) => Ok(v.clone()),
            (None, Some(start), Some(stop), Some(count)) => match count {
                0 => Err("frequency.count must be at least 1".into()),
                1 => Ok(vec![start]),
                _ => Ok((0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect()),
            },
            _ => Err("frequency needs either `values` or all of `start`, `stop`, `count`".into()),
        }
    }

    /// Checks every field and returns all problems found, or the resolved plan.
    pub fn validate(&self) -> Result<Plan, ConfigError> {
        let mut problems = Vec::new();
        if self.schema != SCHEMA {
            problems.push(format!("schema is {:?}, this build reads {SCHEMA:?}", self.schema));
        }

        let m = &self.material;
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(m.thickness) {
            problems.push("material.thickness must be positive".into());
        }
        if !positive(m.density) {
            problems.push("material.density must be positive".into());
        }
        let h = 0.5 * m.thickness;
        let material = match (m.young, m.poisson, m.lame_lambda, m.lame_mu) {
            (Some(e), Some(nu), None, None) => PlateMaterial::from_engineering(h, e, nu, m.density, 1.0).map_err(|e| e.to_string()),
            (None, None, Some(l), Some(mu)) => PlateMaterial::new(h, l, mu, m.density, 1.0).map_err(|e| e.to_string()),
            _ => Err("material needs either `young` and `poisson` or `lame_lambda` and `lame_mu`".into()),
        };
        let material = match material {
            Ok(mat) => Some(mat),
            Err(e) => {
                if positive(m.thickness) && positive(m.density) {
                    problems.push(format!("material: {e}"));
                }
                None
            }
        };

        let frequencies = match self.frequencies() {
            Ok(f) if f.is_empty() => {
                problems.push("frequency.values is empty".into());
                Vec::new()
            }
            Ok(f) => {
                for (i, v) in f.iter().enumerate() {
                    if !positive(*v) {
                        problems.push(format!("frequency {i} = {v} Hz must be positive"));
                    }
                }
                f
            }
            Err(e) => {
                problems.push(e);
                Vec::new()
            }
        };
        let freqs_ok = !frequencies.is_empty() && frequencies.iter().all(|v| positive(*v));

        let c = &self.cavity;
        let cavity = match c.shape {
            CavityShape::None => {
                if c.radius.is_some() || c.half_depth.is_some() {
                    problems.push("cavity.shape = \"none\" takes no radius or half_depth".into());
                }
                Some(CavitySpec::none())
            }
            shape => match c.radius {
                Some(b) if positive(b) => match (shape, c.half_depth) {
                    (CavityShape::Through, None) => Some(CavitySpec::through(b)),
                    (CavityShape::Through, Some(_)) => {
                        problems.push("a through cavity takes no half_depth".into());
                        None
                    }
                    (_, Some(d)) if positive(d) && d <= h => match shape {
                        CavityShape::Partial => Some(CavitySpec::partial(b, d)),
                        _ if d < h => Some(CavitySpec::ellipsoid(b, d)),
                        _ => {
                            problems.push("an ellipsoidal cavity needs half_depth < thickness / 2".into());
                            None
                        }
                    },
                    _ => {
                        problems.push("cavity.half_depth must satisfy 0 < half_depth <= thickness / 2".into());
                        None
                    }
                },
                _ => {
                    problems.push("cavity.radius must be positive".into());
                    None
                }
            },
        };

        let r = &self.mesh;
        if r.n_circumferential < 16 || r.n_circumferential % 4 != 0 {
            problems.push(format!("mesh.n_circumferential = {} must be at least 16 and divisible by 4", r.n_circumferential));
        }
        if r.n_thickness < 2 || r.n_thickness % 2 != 0 {
            problems.push(format!("mesh.n_thickness = {} must be even and at least 2", r.n_thickness));
        }
        if c.shape == CavityShape::Partial && r.n_thickness < 4 {
            problems.push("a partial cavity needs mesh.n_thickness >= 4".into());
        }
        if r.n_radial == 0 {
            problems.push("mesh.n_radial must be at least 1".into());
        }
        if !positive(r.radial_aspect) {
            problems.push("mesh.radial_aspect must be positive".into());
        }
        let resolution = MeshResolution { n_radial: r.n_radial, n_circumferential: r.n_circumferential, n_thickness: r.n_thickness, radial_aspect: r.radial_aspect };

        let t = &self.truncation;
        let m_max = t.harmonics;
        if 4 * m_max + 8 > r.n_circumferential {
            problems.push(format!("truncation.harmonics = {m_max} needs mesh.n_circumferential >= {}", 4 * m_max + 8));
        }
        let explicit = t.cos_orders.is_some() || t.sin_orders.is_some() || t.lamb_modes.is_some() || t.sh_orders.is_some();
        let truncation = match (t.thickness_order, explicit) {
            (Some(n), false) => {
                if n % 2 != 0 {
                    problems.push(format!("truncation.thickness_order = {n} must be even"));
                }
                Some(TruncationPlan::Square { n })
            }
            (None, true) => match (&t.cos_orders, &t.sin_orders, t.lamb_modes, &t.sh_orders) {
                (Some(cos), Some(sin), Some(lamb), Some(sh)) => {
                    if cos.iter().chain(sin).chain(sh).any(|n| n % 2 != 0) {
                        problems.push("truncation orders must all be even".into());
                    }
                    if sin.contains(&0) {
                        problems.push("truncation.sin_orders start at 2".into());
                    }
                    if 2 * cos.len() + sin.len() < lamb + sh.len() {
                        problems.push("truncation has fewer projection rows than retained modes".into());
                    }
                    Some(TruncationPlan::Explicit { lamb_modes: lamb, sh_orders: sh.clone(), cos_orders: cos.clone(), sin_orders: sin.clone() })
                }
                _ => {
                    problems.push("explicit truncation needs cos_orders, sin_orders, lamb_modes and sh_orders".into());
                    None
                }
            },
            (Some(_), true) => {
                problems.push("truncation takes either thickness_order or explicit lists, not both".into());
                None
            }
            (None, false) => {
                problems.push("truncation needs thickness_order or explicit lists".into());
                None
            }
        };
        let variant = match t.ab {
            AbChoice::Sampled => AbVariant::Sampled,
            AbChoice::Analytic => AbVariant::Analytic,
        };

        if self.incident.mode != "S0" {
            problems.push(format!("incident.mode = {:?} is not supported (only \"S0\")", self.incident.mode));
        }
        let amplitude = plate_dtn_core::C64::new(self.incident.amplitude[0], self.incident.amplitude[1]);
        if !(amplitude.norm() > 0.0 && amplitude.norm().is_finite()) {
            problems.push("incident.amplitude must be nonzero".into());
        }
        if self.run.workers == 0 {
            problems.push("run.workers must be at least 1".into());
        }

        let b = cavity.map(|c| c.radius).unwrap_or(0.0);
        let mut a = None;
        match &self.boundary.radius {
            RadiusSetting::Value(v) if positive(*v) => a = Some(*v),
            RadiusSetting::Value(v) => problems.push(format!("boundary.radius = {v} must be positive")),
            RadiusSetting::Keyword(k) if k == "auto" => {
                if !positive(self.boundary.standoff_wavelengths) {
                    problems.push("boundary.standoff_wavelengths must be positive".into());
                } else if let (Some(mat), true) = (material, freqs_ok) {
                    let f_min = frequencies.iter().copied().fold(f64::INFINITY, f64::min);
                    match IncidentField::fundamental(&PlateMaterial { omega: 2.0 * PI * f_min, ..mat }) {
                        Ok(inc) => a = Some(b + self.boundary.standoff_wavelengths * 2.0 * PI / inc.k0()),
                        Err(e) => problems.push(format!("incident wave at {f_min} Hz: {e}")),
                    }
                }
            }
            RadiusSetting::Keyword(k) => problems.push(format!("boundary.radius = {k:?} must be a number or \"auto\"")),
        }
        if let Some(a) = a {
            if b > 0.0 && b >= MAX_CAVITY_FRACTION * a {
                problems.push(format!("cavity radius {b} must be below {MAX_CAVITY_FRACTION} times the boundary radius {a}"));
            }
        }

        let plan = match (material, cavity, truncation, a) {
            (Some(mat), Some(cavity), Some(truncation), Some(a)) if problems.is_empty() => Some(Plan {
                material: PlateMaterial { omega: 2.0 * PI * frequencies[0], ..mat },
                frequencies: frequencies.clone(),
                a,
                cavity,
                resolution,
                m_max,
                truncation,
                variant,
                amplitude,
                output: self.output.directory.clone(),
                write_fields: self.output.fields,
                workers: self.run.workers,
            }),
            _ => None,
        };
        if let Some(plan) = &plan {
            for &f in &plan.frequencies {
                let mat = plan.material_at(f);
                if let Err(e) = IncidentField::fundamental(&mat) {
                    problems.push(format!("{f} Hz: {e}"));
                }
                if let Err(e) = plan.truncation_at(&mat) {
                    problems.push(format!("{f} Hz: truncation: {e}"));
                }
            }
        }
        match plan {
            Some(plan) if problems.is_empty() => Ok(plan),
            _ => Err(ConfigError::Invalid(problems)),
        }
    }
}
