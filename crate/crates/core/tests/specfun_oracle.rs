//! Cylinder functions checked against independent ascending power series.

use num_complex::Complex64 as C;
use plate_dtn_core::specfun::{bessel_j, hankel1};
use std::f64::consts::PI;

const GAMMA: f64 = 0.577_215_664_901_532_9;

fn fact(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn psi(n: usize) -> f64 {
    // digamma at positive integer n
    -GAMMA + (1..n).map(|k| 1.0 / k as f64).sum::<f64>()
}

fn j_series(m: usize, z: C) -> C {
    let q = -(z * z) / 4.0;
    let mut sum = C::new(0.0, 0.0);
    let mut term = (z / 2.0).powu(m as u32) / fact(m);
    for k in 0..200 {
        sum += term;
        term = term * q / ((k + 1) as f64 * (k + 1 + m) as f64);
        if term.norm() < 1e-20 * sum.norm() {
            break;
        }
    }
    sum
}

fn y_series(n: usize, z: C) -> C {
    let half = z / 2.0;
    let q = -(z * z) / 4.0;
    let mut first = C::new(0.0, 0.0);
    for k in 0..n {
        first += fact(n - k - 1) / fact(k) * (z * z / 4.0).powu(k as u32);
    }
    first = -first / (PI * half.powu(n as u32));
    let log = 2.0 / PI * half.ln() * j_series(n, z);
    let mut third = C::new(0.0, 0.0);
    let mut qk = C::new(1.0, 0.0);
    for k in 0..200 {
        let t = (psi(k + 1) + psi(n + k + 1)) * qk / (fact(k) * fact(n + k));
        third += t;
        if k > 5 && t.norm() < 1e-20 * third.norm() {
            break;
        }
        qk *= q;
    }
    third = -half.powu(n as u32) / PI * third;
    first + log + third
}

#[test]
fn frozen_reference_values() {
    let j0 = j_series(0, C::new(1.0, 0.0));
    assert!((j0.re - 0.765_197_686_557_966_55).abs() < 1e-15);
    let lib = bessel_j(0, C::new(1.0, 0.0)).unwrap().value;
    assert!((lib.re - 0.765_197_686_557_966_55).abs() < 1e-14 && lib.im.abs() < 1e-15);

    let z = C::new(2.0, 0.0);
    let oracle = j_series(0, z) + C::i() * y_series(0, z);
    assert!((oracle - C::new(0.223_890_779_141_235_67, 0.510_375_672_649_745_12)).norm() < 1e-14);
    let h = hankel1(0, z).unwrap().value;
    assert!((h - C::new(0.223_890_779_141_235_67, 0.510_375_672_649_745_12)).norm() < 1e-13);
}

#[test]
fn bessel_j_matches_power_series() {
    for &(re, im) in &[(0.1, 0.0), (1.0, 0.0), (2.5, 0.3), (4.0, 1.5), (6.0, -1.0), (7.9, 0.0), (0.5, 2.0)] {
        let z = C::new(re, im);
        for m in 0..12 {
            let a = bessel_j(m as i32, z).unwrap().value;
            let b = j_series(m, z);
            assert!((a - b).norm() <= 1e-12 * b.norm().max(1e-3), "m={m} z={z} {a} {b}");
        }
    }
}

#[test]
fn hankel_matches_power_series() {
    for &(re, im) in &[(0.1, 0.0), (0.7, 0.2), (2.0, 0.0), (3.3, 1.0), (5.0, 2.0), (6.5, 3.0), (1.0, 4.0)] {
        let z = C::new(re, im);
        for m in 0..6 {
            let a = hankel1(m as i32, z).unwrap().value;
            let b = j_series(m, z) + C::i() * y_series(m, z);
            assert!((a - b).norm() <= 1e-10 * b.norm(), "m={m} z={z} {a} {b}");
        }
    }
}
