//! Integer-order Bessel `J` and Hankel `H^{(1)}` functions of complex argument.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::math;
use crate::C64;

/// Largest supported order magnitude.
pub const MAX_ORDER: i32 = 200;
/// Beyond this modulus the Hankel functions of order 0 and 1 use the asymptotic series.
pub const ASYMPTOTIC_MIN_MODULUS: f64 = 14.0;
/// Above this imaginary part (inside the asymptotic disc) a Macdonald integral is used.
const IMAG_SPLIT: f64 = 2.5;
const MAX_IMAG: f64 = 700.0;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderFunctionValue {
    pub value: C64,
    /// Derivative with respect to the full argument.
    pub derivative: C64,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum SpecialFunctionError {
    #[error("order {0} exceeds the supported maximum of {MAX_ORDER}")]
    OrderTooLarge(i32),
    #[error("argument {0} is outside the domain of the function")]
    Domain(C64),
    #[error("argument {0} out of supported range")]
    OutOfRange(C64),
}

type Result<T> = core::result::Result<T, SpecialFunctionError>;

fn check_order(order: i32) -> Result<usize> {
    if order.unsigned_abs() > MAX_ORDER as u32 {
        return Err(SpecialFunctionError::OrderTooLarge(order));
    }
    Ok(order.unsigned_abs() as usize)
}

fn check_arg(x: C64) -> Result<()> {
    if !x.re.is_finite() || !x.im.is_finite() {
        return Err(SpecialFunctionError::Domain(x));
    }
    if x.im.abs() > MAX_IMAG {
        return Err(SpecialFunctionError::OutOfRange(x));
    }
    Ok(())
}

fn all_finite(v: &[C64]) -> bool {
    v.iter().all(|c| c.re.is_finite() && c.im.is_finite())
}

#[inline]
fn reflect(m: i32) -> f64 {
    if m < 0 && m % 2 != 0 {
        -1.0
    } else {
        1.0
    }
}

/// `J_0 .. J_{max_order}` by normalised backward recurrence.
pub fn bessel_j_orders(max_order: usize, x: C64) -> Result<Vec<C64>> {
    check_arg(x)?;
    let mut out = vec![C64::new(0.0, 0.0); max_order + 1];
    if x == C64::new(0.0, 0.0) {
        out[0] = C64::new(1.0, 0.0);
        return Ok(out);
    }
    let ax = x.norm();
    let start = (ax + 10.0 * libm::cbrt(ax) + 25.0) as usize;
    let start = start.max(max_order + 25);
    let mut f = vec![C64::new(0.0, 0.0); start + 2];
    f[start] = C64::new(1e-30, 0.0);
    let two_over_x = C64::new(2.0, 0.0) / x;
    for n in (1..=start).rev() {
        let next = two_over_x * (n as f64) * f[n] - f[n + 1];
        f[n - 1] = next;
        // complex division squares moduli, so keep the unnormalised sequence well below 1e150
        if next.norm() > 1e100 {
            for v in f[n - 1..].iter_mut() {
                *v *= 1e-100;
            }
        }
    }
    // e^{-ix} = J_0 + 2 sum (-i)^n J_n in the upper half plane, mirrored below.
    let (phase, unit) = if x.im >= 0.0 {
        ((-C64::i() * x).exp(), -C64::i())
    } else {
        ((C64::i() * x).exp(), C64::i())
    };
    let mut sum = f[0];
    let mut w = C64::new(1.0, 0.0);
    for v in f.iter().take(start + 1).skip(1) {
        w *= unit;
        sum += 2.0 * w * v;
    }
    let scale = phase / sum;
    for (o, v) in out.iter_mut().zip(&f) {
        *o = v * scale;
    }
    if !all_finite(&out) {
        return Err(SpecialFunctionError::OutOfRange(x));
    }
    Ok(out)
}

fn h01_asymptotic(x: C64) -> [C64; 2] {
    let mut out = [C64::new(0.0, 0.0); 2];
    let pref = (C64::new(2.0 / PI, 0.0) / x).sqrt();
    for (nu, o) in out.iter_mut().enumerate() {
        let mu = 4.0 * (nu * nu) as f64;
        let mut term = C64::new(1.0, 0.0);
        let mut sum = term;
        let mut last = f64::INFINITY;
        for k in 1..80 {
            let c = (mu - ((2 * k - 1) * (2 * k - 1)) as f64) / (8.0 * k as f64);
            let next = term * C64::i() * c / x;
            let mag = next.norm();
            if mag > last {
                break;
            }
            term = next;
            sum += term;
            last = mag;
            if mag < 1e-17 * sum.norm() {
                break;
            }
        }
        let phase = x - nu as f64 * FRAC_PI_2 - FRAC_PI_4;
        *o = pref * (C64::i() * phase).exp() * sum;
    }
    out
}

fn h01_neumann(x: C64) -> Result<[C64; 2]> {
    let top = (x.norm() + 45.0) as usize;
    let j = bessel_j_orders(top + 1, x)?;
    let lg = (x / 2.0).ln() + EULER_GAMMA;
    let mut s0 = C64::new(0.0, 0.0);
    let mut s1 = C64::new(0.0, 0.0);
    let mut k = 1;
    while 2 * k + 1 <= top + 1 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k as f64;
        k += 1;
    }
    let y0 = (2.0 / PI) * (lg * j[0] - 2.0 * s0);
    let y1 = (2.0 / PI) * (-j[0] / x + lg * j[1] + s1);
    Ok([j[0] + C64::i() * y0, j[1] + C64::i() * y1])
}

fn h01_macdonald(x: C64) -> [C64; 2] {
    // H_nu(x) = (2 / (pi i)) e^{-i nu pi / 2} K_nu(-i x), K_nu(w) = int_0^inf e^{-w cosh t} cosh(nu t) dt
    let w = -C64::i() * x;
    let step = 0.02;
    let mut k0 = 0.5 * (-w).exp();
    let mut k1 = k0;
    let mut n = 1;
    loop {
        let t = n as f64 * step;
        let ch = math::cosh(t);
        let e = (-w * ch).exp();
        k0 += e;
        k1 += e * ch;
        if w.re * ch > 45.0 + t {
            break;
        }
        n += 1;
    }
    k0 *= step;
    k1 *= step;
    let c = C64::new(0.0, -2.0 / PI);
    [c * k0, c * (-C64::i()) * k1]
}

/// `H^{(1)}_0 .. H^{(1)}_{max_order}` by forward recurrence from orders 0 and 1.
pub fn hankel1_orders(max_order: usize, x: C64) -> Result<Vec<C64>> {
    check_arg(x)?;
    if x == C64::new(0.0, 0.0) || x.im < 0.0 {
        return Err(SpecialFunctionError::Domain(x));
    }
    let h01 = if x.norm() >= ASYMPTOTIC_MIN_MODULUS {
        h01_asymptotic(x)
    } else if x.im <= IMAG_SPLIT {
        h01_neumann(x)?
    } else {
        h01_macdonald(x)
    };
    let mut out = Vec::with_capacity(max_order + 2);
    out.push(h01[0]);
    out.push(h01[1]);
    let two_over_x = C64::new(2.0, 0.0) / x;
    for n in 1..max_order {
        let next = two_over_x * (n as f64) * out[n] - out[n - 1];
        out.push(next);
    }
    out.truncate(max_order + 1);
    if !all_finite(&out) {
        return Err(SpecialFunctionError::OutOfRange(x));
    }
    Ok(out)
}

/// `J_m(x)` and `J'_m(x)`.
pub fn bessel_j(order: i32, x: C64) -> Result<CylinderFunctionValue> {
    let m = check_order(order)?;
    let j = bessel_j_orders(m + 1, x)?;
    let d = if m == 0 { -j[1] } else { 0.5 * (j[m - 1] - j[m + 1]) };
    let s = reflect(order);
    Ok(CylinderFunctionValue { value: s * j[m], derivative: s * d })
}

/// `H^{(1)}_m(x)` and its derivative.
pub fn hankel1(order: i32, x: C64) -> Result<CylinderFunctionValue> {
    let m = check_order(order)?;
    let h = hankel1_orders(m + 1, x)?;
    let d = if m == 0 { -h[1] } else { h[m - 1] - (m as f64) * h[m] / x };
    let s = reflect(order);
    Ok(CylinderFunctionValue { value: s * h[m], derivative: s * d })
}

/// Values and derivatives for orders `-max_order ..= max_order` at one argument.
#[derive(Debug, Clone)]
pub struct CylinderTable {
    values: Vec<C64>,
    derivatives: Vec<C64>,
}

impl CylinderTable {
    fn from_sequence(seq: &[C64], max_order: usize, x: C64, hankel: bool) -> Self {
        let mut values = Vec::with_capacity(max_order + 1);
        let mut derivatives = Vec::with_capacity(max_order + 1);
        for m in 0..=max_order {
            values.push(seq[m]);
            let d = if m == 0 {
                -seq[1]
            } else if hankel {
                seq[m - 1] - (m as f64) * seq[m] / x
            } else {
                0.5 * (seq[m - 1] - seq[m + 1])
            };
            derivatives.push(d);
        }
        Self { values, derivatives }
    }

    pub fn hankel1(max_order: usize, x: C64) -> Result<Self> {
        check_order(max_order as i32)?;
        let seq = hankel1_orders(max_order + 1, x)?;
        Ok(Self::from_sequence(&seq, max_order, x, true))
    }

    pub fn bessel_j(max_order: usize, x: C64) -> Result<Self> {
        check_order(max_order as i32)?;
        let seq = bessel_j_orders(max_order + 1, x)?;
        Ok(Self::from_sequence(&seq, max_order, x, false))
    }

    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }

    /// Entry for a signed order; panics when `|m|` exceeds the table.
    pub fn get(&self, m: i32) -> CylinderFunctionValue {
        let k = m.unsigned_abs() as usize;
        let s = reflect(m);
        CylinderFunctionValue { value: s * self.values[k], derivative: s * self.derivatives[k] }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn origin_values() {
        let j0 = bessel_j(0, c(0.0, 0.0)).unwrap();
        assert_eq!(j0.value, c(1.0, 0.0));
        assert_eq!(j0.derivative, c(0.0, 0.0));
        assert_eq!(bessel_j(1, c(0.0, 0.0)).unwrap().value, c(0.0, 0.0));
        assert!(matches!(hankel1(0, c(0.0, 0.0)), Err(SpecialFunctionError::Domain(_))));
    }

    #[test]
    fn hankel_reflection_and_order_cap() {
        let p = hankel1(3, c(2.5, 0.0)).unwrap();
        let n = hankel1(-3, c(2.5, 0.0)).unwrap();
        assert_relative_eq!(n.value.re, -p.value.re, max_relative = 1e-15);
        assert_relative_eq!(n.value.im, -p.value.im, max_relative = 1e-15);
        assert!(matches!(hankel1(201, c(1.0, 0.0)), Err(SpecialFunctionError::OrderTooLarge(201))));
    }

    #[test]
    fn large_imaginary_part_is_reported() {
        assert!(matches!(bessel_j(0, c(1.0, 800.0)), Err(SpecialFunctionError::OutOfRange(_))));
        assert!(matches!(hankel1(2, c(1.0, -1.0)), Err(SpecialFunctionError::Domain(_))));
    }

    #[test]
    fn wronskian_across_regions() {
        for &x in &[c(1.7, 0.0), c(5.0, 1.0), c(3.0, 4.0), c(20.0, 0.5), c(0.3, 9.0), c(13.9, 2.6)] {
            for m in 0..=5 {
                let j = bessel_j(m, x).unwrap();
                let h = hankel1(m, x).unwrap();
                let w = j.value * h.derivative - j.derivative * h.value;
                let expect = c(0.0, 2.0 / PI) / x;
                assert!(rel(w, expect) < 1e-11, "x={x} m={m} w={w}");
            }
        }
    }

    #[test]
    fn regions_agree_at_their_seams() {
        // Neumann series versus Macdonald integral on the imaginary split.
        for &x in &[c(1.0, 2.5), c(6.0, 2.5), c(12.0, 2.5)] {
            let a = h01_neumann(x).unwrap();
            let b = h01_macdonald(x);
            assert!(rel(a[0], b[0]) < 1e-11 && rel(a[1], b[1]) < 1e-11, "{x}");
        }
        // Small-argument methods versus the asymptotic series on the modulus seam.
        for &x in &[c(14.0, 0.0), c(13.0, 5.3), c(5.0, 13.1)] {
            let a = h01_asymptotic(x);
            let b = if x.im <= IMAG_SPLIT { h01_neumann(x).unwrap() } else { h01_macdonald(x) };
            assert!(rel(a[0], b[0]) < 1e-11 && rel(a[1], b[1]) < 1e-11, "{x}");
        }
    }

    #[test]
    fn large_argument_asymptotics() {
        let lead = |m: i32, x: f64| math::sqrt(2.0 / (PI * x)) * math::cis(x - m as f64 * FRAC_PI_2 - FRAC_PI_4);
        for m in 0..2 {
            let h = hankel1(m, c(50.0, 0.0)).unwrap().value;
            assert!(rel(h, lead(m, 50.0)) < 1e-2);
        }
        for m in 0..6 {
            let mut prev = f64::INFINITY;
            for x in [10.0, 50.0, 250.0, 1250.0] {
                let e = rel(hankel1(m, c(x, 0.0)).unwrap().value, lead(m, x));
                assert!(e < prev);
                prev = e;
            }
            assert!(prev < 1e-2);
        }
    }

    #[test]
    fn evanescent_hankel_decays_monotonically() {
        for m in 0..8 {
            let mut prev = f64::INFINITY;
            for i in 1..200 {
                let r = 0.05 * i as f64;
                let v = hankel1(m, c(0.0, 1.3 * r)).unwrap().value.norm();
                assert!(v < prev, "m={m} r={r}");
                prev = v;
            }
        }
    }

    proptest! {
        #[test]
        fn hankel_recurrence(m in 1i32..60, lx in -2.0f64..2.3, im in 0.0f64..3.0) {
            let x = c(libm::pow(10.0, lx), im);
            let hm = hankel1(m, x).unwrap().value;
            let hp = hankel1(m + 1, x).unwrap().value;
            let hmm = hankel1(m - 1, x).unwrap().value;
            let lhs = hp;
            let rhs = 2.0 * m as f64 / x * hm - hmm;
            prop_assert!((lhs - rhs).norm() <= 1e-10 * lhs.norm().max(hm.norm()));
        }

        #[test]
        fn derivative_matches_central_difference(m in -8i32..8, re in 0.2f64..30.0, im in 0.0f64..4.0) {
            let x = c(re, im);
            let step = 1e-5 * x.norm();
            for f in [hankel1 as fn(i32, C64) -> Result<CylinderFunctionValue>, bessel_j] {
                let v = f(m, x).unwrap();
                let fd = (f(m, x + step).unwrap().value - f(m, x - step).unwrap().value) / (2.0 * step);
                prop_assert!((fd - v.derivative).norm() <= 1e-6 * v.derivative.norm().max(v.value.norm()));
            }
        }

        #[test]
        fn table_matches_single_calls(mmax in 0usize..30, re in 0.1f64..40.0, im in 0.0f64..5.0) {
            let x = c(re, im);
            let t = CylinderTable::hankel1(mmax, x).unwrap();
            for m in -(mmax as i32)..=(mmax as i32) {
                let a = t.get(m);
                let b = hankel1(m, x).unwrap();
                prop_assert!(rel(a.value, b.value) < 1e-13);
                prop_assert!(rel(a.derivative, b.derivative) < 1e-13);
            }
        }
    }
}
