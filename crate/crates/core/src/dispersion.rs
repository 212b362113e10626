//! Symmetric Rayleigh-Lamb and SH wavenumbers at a fixed angular frequency.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math::{self, branch_sqrt, sinc};
use crate::C64;

/// Default number of real-axis samples over `(0, 1.5 k_T]`.
pub const SCAN_POINTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum DispersionError {
    #[error("invalid material: {0}")]
    InvalidMaterial(&'static str),
    #[error("root scan resolution insufficient ({coarse} roots on the scan grid, {fine} on the verification grid)")]
    ScanResolution { coarse: usize, fine: usize },
    #[error("only {found} evanescent roots located, {requested} requested")]
    MissingEvanescentRoots { found: usize, requested: usize },
    #[error("SH order {0} must be even")]
    OddShOrder(u32),
}

/// Isotropic plate with half-thickness `h` driven at angular frequency `omega`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateMaterial {
    pub h: f64,
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    pub omega: f64,
}

impl PlateMaterial {
    pub fn new(h: f64, lambda: f64, mu: f64, rho: f64, omega: f64) -> Result<Self, DispersionError> {
        let m = Self { h, lambda, mu, rho, omega };
        m.validate()?;
        Ok(m)
    }

    /// From Young's modulus and Poisson's ratio.
    pub fn from_engineering(h: f64, young: f64, poisson: f64, rho: f64, omega: f64) -> Result<Self, DispersionError> {
        if !(poisson > -1.0 && poisson < 0.5) {
            return Err(DispersionError::InvalidMaterial("Poisson ratio must lie in (-1, 0.5)"));
        }
        let lambda = young * poisson / ((1.0 + poisson) * (1.0 - 2.0 * poisson));
        let mu = young / (2.0 * (1.0 + poisson));
        Self::new(h, lambda, mu, rho, omega)
    }

    pub fn validate(&self) -> Result<(), DispersionError> {
        let finite = [self.h, self.lambda, self.mu, self.rho, self.omega].iter().all(|v| v.is_finite());
        if !finite {
            return Err(DispersionError::InvalidMaterial("non-finite parameter"));
        }
        if self.h <= 0.0 {
            return Err(DispersionError::InvalidMaterial("half-thickness must be positive"));
        }
        if self.mu <= 0.0 {
            return Err(DispersionError::InvalidMaterial("shear modulus must be positive"));
        }
        if self.rho <= 0.0 {
            return Err(DispersionError::InvalidMaterial("density must be positive"));
        }
        if self.lambda <= -2.0 / 3.0 * self.mu {
            return Err(DispersionError::InvalidMaterial("bulk modulus must be positive"));
        }
        if self.omega <= 0.0 {
            return Err(DispersionError::InvalidMaterial("angular frequency must be positive"));
        }
        Ok(())
    }

    pub fn with_omega(&self, omega: f64) -> Result<Self, DispersionError> {
        Self::new(self.h, self.lambda, self.mu, self.rho, omega)
    }

    pub fn c_l(&self) -> f64 {
        math::sqrt((self.lambda + 2.0 * self.mu) / self.rho)
    }

    pub fn c_t(&self) -> f64 {
        math::sqrt(self.mu / self.rho)
    }

    pub fn k_l(&self) -> f64 {
        self.omega / self.c_l()
    }

    pub fn k_t(&self) -> f64 {
        self.omega / self.c_t()
    }

    /// Thin-plate extensional velocity `2 c_T sqrt(1 - c_T^2 / c_L^2)`.
    pub fn plate_velocity(&self) -> f64 {
        let r = self.c_t() / self.c_l();
        2.0 * self.c_t() * math::sqrt(1.0 - r * r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    Propagating,
    Evanescent,
    /// Exactly at a cutoff: zero wavenumber, no radiating or decaying field.
    Cutoff,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambRoot {
    pub k: C64,
    pub p: C64,
    pub q: C64,
    pub kind: ModeKind,
}

impl LambRoot {
    pub fn from_wavenumber(material: &PlateMaterial, k: C64) -> Self {
        let kl = material.k_l();
        let kt = material.k_t();
        let p = branch_sqrt(C64::new(kl * kl, 0.0) - k * k);
        let q = branch_sqrt(C64::new(kt * kt, 0.0) - k * k);
        let kind = if k.im == 0.0 && k.re > 0.0 { ModeKind::Propagating } else { ModeKind::Evanescent };
        Self { k, p, q, kind }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShRoot {
    pub n: u32,
    pub l: C64,
    pub kind: ModeKind,
}

struct Eval {
    value: C64,
    derivative: C64,
    scale: f64,
}

/// `F / q` in units of `h`, an entire function of `kappa = k h` that is real on the real axis.
fn reduced(kl: f64, kt: f64, kappa: C64) -> Eval {
    let s = kappa * kappa;
    let a = C64::new(kl * kl, 0.0) - s;
    let b = C64::new(kt * kt, 0.0) - s;
    let p = branch_sqrt(a);
    let q = branch_sqrt(b);
    let cp = p.cos();
    let sp = sinc(p);
    let tp = p * p.sin();
    let cq = q.cos();
    let sq = sinc(q);
    let dsq_db = if q.norm() < 1e-2 {
        C64::new(-1.0 / 6.0, 0.0) + b / 60.0 - b * b / 1680.0
    } else {
        (cq - sq) / (2.0 * b)
    };
    let bs = b - s;
    let t1 = bs * bs * cp * sq;
    let t2 = 4.0 * s * tp * cq;
    let da = bs * bs * (-0.5 * sp) * sq + 2.0 * s * cq * (sp + cp);
    let db = 2.0 * bs * cp * sq + bs * bs * cp * dsq_db - 2.0 * s * tp * sq;
    let ds = -2.0 * bs * cp * sq + 4.0 * tp * cq;
    let derivative = 2.0 * kappa * (ds - da - db);
    Eval { value: t1 + t2, derivative, scale: t1.norm() + t2.norm() }
}

/// Pole-free symmetric Rayleigh-Lamb function
/// `(q^2-k^2)^2 cos(ph) sin(qh) + 4 k^2 p q sin(ph) cos(qh)`.
pub fn rayleigh_lamb(material: &PlateMaterial, k: C64) -> C64 {
    let (t1, t2) = rayleigh_lamb_terms(material, k);
    t1 + t2
}

/// Magnitude reference for residuals of [`rayleigh_lamb`]: the sum of the moduli of its two terms.
pub fn rayleigh_lamb_scale(material: &PlateMaterial, k: C64) -> f64 {
    let (t1, t2) = rayleigh_lamb_terms(material, k);
    t1.norm() + t2.norm()
}

fn rayleigh_lamb_terms(material: &PlateMaterial, k: C64) -> (C64, C64) {
    let r = LambRoot::from_wavenumber(material, k);
    let h = material.h;
    let qk = r.q * r.q - k * k;
    let t1 = qk * qk * (r.p * h).cos() * (r.q * h).sin();
    let t2 = 4.0 * k * k * r.p * r.q * (r.p * h).sin() * (r.q * h).cos();
    (t1, t2)
}

fn scan_real(kl: f64, kt: f64, points: usize) -> Vec<(f64, f64)> {
    let top = 1.5 * kt;
    let mut brackets = Vec::new();
    let mut prev_x = top / points as f64;
    let mut prev_f = reduced(kl, kt, C64::new(prev_x, 0.0)).value.re;
    if prev_f == 0.0 {
        brackets.push((prev_x, prev_x));
    }
    for i in 2..=points {
        let x = top * i as f64 / points as f64;
        let f = reduced(kl, kt, C64::new(x, 0.0)).value.re;
        if f == 0.0 {
            brackets.push((x, x));
        } else if prev_f != 0.0 && (f < 0.0) != (prev_f < 0.0) {
            brackets.push((prev_x, x));
        }
        prev_x = x;
        prev_f = f;
    }
    brackets
}

fn refine_real(kl: f64, kt: f64, (mut lo, mut hi): (f64, f64)) -> f64 {
    let f = |x: f64| reduced(kl, kt, C64::new(x, 0.0)).value.re;
    let mut flo = f(lo);
    for _ in 0..200 {
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..3 {
        let e = reduced(kl, kt, C64::new(x, 0.0));
        if e.derivative.re == 0.0 {
            break;
        }
        let next = x - e.value.re / e.derivative.re;
        if !(next > lo - (hi - lo) && next < hi + (hi - lo)) || f(next).abs() >= e.value.re.abs() {
            break;
        }
        x = next;
    }
    x
}

fn newton_complex(kl: f64, kt: f64, start: C64) -> Option<C64> {
    let mut z = start;
    for _ in 0..80 {
        let e = reduced(kl, kt, z);
        if e.derivative.norm() == 0.0 {
            return None;
        }
        let mut step = e.value / e.derivative;
        if step.norm() > 0.5 {
            step *= 0.5 / step.norm();
        }
        z -= step;
        if !(z.re.is_finite() && z.im.is_finite()) || z.im.abs() > 400.0 {
            return None;
        }
        if step.norm() < 1e-14 * (1.0 + z.norm()) {
            let e = reduced(kl, kt, z);
            return (e.value.norm() <= 1e-10 * e.scale).then_some(z);
        }
    }
    None
}

fn real_roots(kl: f64, kt: f64, points: usize) -> Vec<f64> {
    scan_real(kl, kt, points).into_iter().map(|b| refine_real(kl, kt, b)).collect()
}

fn evanescent_roots(kl: f64, kt: f64, count: usize) -> Vec<C64> {
    let re_max = kt + 4.0 + math::ln(count as f64 + 1.0);
    let im_max = PI * (count as f64 + 2.0) + kt;
    let step = 0.25;
    let nre = (re_max / step) as usize + 1;
    let nim = (im_max / step) as usize + 1;
    let mut found: Vec<C64> = Vec::new();
    let push = |z: C64, found: &mut Vec<C64>| {
        if found.iter().all(|w| (w - z).norm() > 1e-7 * (1.0 + z.norm())) {
            found.push(z);
        }
    };
    for i in 0..nre {
        for j in 0..nim {
            let seed = C64::new(i as f64 * step, 0.1 + j as f64 * step);
            let Some(mut z) = newton_complex(kl, kt, seed) else { continue };
            if z.im < 0.0 {
                z = -z;
            }
            if z.im <= 1e-9 * (1.0 + z.norm()) {
                continue;
            }
            if z.re.abs() <= 1e-9 * z.norm() {
                z.re = 0.0;
                push(z, &mut found);
            } else {
                push(C64::new(z.re.abs(), z.im), &mut found);
                push(C64::new(-z.re.abs(), z.im), &mut found);
            }
        }
    }
    found.sort_by(|a, b| a.im.total_cmp(&b.im).then(b.re.total_cmp(&a.re)));
    found
}

/// Symmetric Lamb wavenumbers: all propagating roots in `(0, 1.5 k_T]`, descending, then
/// `count_evanescent` complex roots with the smallest decay rates.
pub fn find_lamb_roots(material: &PlateMaterial, count_evanescent: usize) -> Result<Vec<LambRoot>, DispersionError> {
    find_lamb_roots_with_grid(material, count_evanescent, SCAN_POINTS)
}

pub fn find_lamb_roots_with_grid(
    material: &PlateMaterial,
    count_evanescent: usize,
    scan_points: usize,
) -> Result<Vec<LambRoot>, DispersionError> {
    material.validate()?;
    let h = material.h;
    let kl = material.k_l() * h;
    let kt = material.k_t() * h;
    let coarse = scan_real(kl, kt, scan_points).len();
    let fine = scan_real(kl, kt, 4 * scan_points).len();
    if coarse != fine {
        return Err(DispersionError::ScanResolution { coarse, fine });
    }
    let mut kappas = real_roots(kl, kt, scan_points);
    kappas.sort_by(|a, b| b.total_cmp(a));
    let mut roots: Vec<LambRoot> =
        kappas.into_iter().map(|x| LambRoot::from_wavenumber(material, C64::new(x / h, 0.0))).collect();
    if count_evanescent > 0 {
        let ev = evanescent_roots(kl, kt, count_evanescent);
        if ev.len() < count_evanescent {
            return Err(DispersionError::MissingEvanescentRoots { found: ev.len(), requested: count_evanescent });
        }
        roots.extend(ev.into_iter().take(count_evanescent).map(|z| LambRoot::from_wavenumber(material, z / h)));
    }
    log::debug!("{} Lamb roots at omega = {}", roots.len(), material.omega);
    Ok(roots)
}

/// Sign-carrying group velocity `d omega / d k` of a real root, from implicit differentiation
/// of the characteristic function. Negative values mark backward waves.
pub fn group_velocity(material: &PlateMaterial, root: &LambRoot) -> f64 {
    let h = material.h;
    let kappa = C64::new(root.k.re * h, 0.0);
    let (kl, kt) = (material.k_l() * h, material.k_t() * h);
    let e = reduced(kl, kt, kappa);
    let d = 1e-6;
    let up = reduced(kl * (1.0 + d), kt * (1.0 + d), kappa).value.re;
    let dn = reduced(kl * (1.0 - d), kt * (1.0 - d), kappa).value.re;
    // d F / d omega with kappa fixed; both bulk wavenumbers scale with omega
    let f_omega = (up - dn) / (2.0 * d * material.omega);
    -e.derivative.re / (h * f_omega)
}

/// Symmetric SH wavenumbers for `n = 0, 2, ..., n_max`.
pub fn sh_wavenumbers(material: &PlateMaterial, n_max: u32) -> Result<Vec<ShRoot>, DispersionError> {
    if n_max % 2 != 0 {
        return Err(DispersionError::OddShOrder(n_max));
    }
    let kt = material.k_t();
    let mut out = Vec::new();
    for n in (0..=n_max).step_by(2) {
        if n == 0 {
            out.push(ShRoot { n, l: C64::new(kt, 0.0), kind: ModeKind::Propagating });
            continue;
        }
        let alpha = n as f64 * PI / (2.0 * material.h);
        let l2 = (kt - alpha) * (kt + alpha);
        let (l, kind) = if l2.abs() <= 1e-12 * kt * kt {
            (C64::new(0.0, 0.0), ModeKind::Cutoff)
        } else if l2 > 0.0 {
            (C64::new(math::sqrt(l2), 0.0), ModeKind::Propagating)
        } else {
            (C64::new(0.0, math::sqrt(-l2)), ModeKind::Evanescent)
        };
        out.push(ShRoot { n, l, kind });
    }
    Ok(out)
}
