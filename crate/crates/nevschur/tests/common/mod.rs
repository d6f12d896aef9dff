//! Shared fixtures and oracles for the integration suites.
#![allow(dead_code)]

use nevschur::numkit::{opnorm, psd_sqrt, ComplexMatrix, HermitianMatrix};
use nevschur::systems::{random_selfadjoint_system, CutPlanePoint, PassiveSystem};
use num_complex::Complex64;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Omega(z) = z.
pub fn flip_system() -> PassiveSystem {
    PassiveSystem::validate(
        ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]),
        1,
        true,
    )
    .unwrap()
}

/// Omega identically zero.
pub fn zero_system() -> PassiveSystem {
    PassiveSystem::validate(ComplexMatrix::zeros(1, 1), 1, true).unwrap()
}

/// Conservative realization of the inner function (zI + D)(I + zD)^{-1}:
/// the unitary block operator [D D_D; D_D -D].
pub fn inner_system(d: &HermitianMatrix) -> PassiveSystem {
    let m = d.dim();
    let d_sq = &ComplexMatrix::identity(m) - &(d.as_matrix() * d.as_matrix()).hermitize();
    let d_d = psd_sqrt(&HermitianMatrix::new_unchecked(d_sq)).unwrap();
    let t = ComplexMatrix::block2x2(
        d.as_matrix(),
        d_d.as_matrix(),
        d_d.as_matrix(),
        &d.as_matrix().scale_re(-1.0),
    );
    PassiveSystem::validate(t, m, true).unwrap()
}

/// The seeded corpus used across criteria: dimensions cycle over small
/// input/state splits.
pub fn random_corpus(count: usize) -> Vec<PassiveSystem> {
    (0..count as u64)
        .map(|seed| {
            let m = 1 + (seed as usize) % 2;
            let n = 2 + (seed as usize) % 3;
            random_selfadjoint_system(seed, m, n)
        })
        .collect()
}

/// Residual of P_M (I - zT)^{-1} |_M (I - z Omega(z)) - I.
pub fn schur_frobenius_residual(sys: &PassiveSystem, z: CutPlanePoint) -> f64 {
    let m = sys.dim_input();
    let dim = sys.dim_total();
    let zv = z.value();
    let shifted = &ComplexMatrix::identity(dim) - &sys.matrix().scale(zv);
    let inv = nevschur::numkit::inverse(&shifted).unwrap();
    let compressed = inv.submatrix(0, m, 0, m);
    let omega = sys.transfer(z).unwrap();
    let product = &compressed * &(&ComplexMatrix::identity(m) - &omega.scale(zv));
    opnorm(&(&product - &ComplexMatrix::identity(m)))
}

/// Largest deviation of the two transfer functions over the given points.
pub fn transfer_distance(a: &PassiveSystem, b: &PassiveSystem, points: &[CutPlanePoint]) -> f64 {
    points
        .iter()
        .map(|&z| {
            let wa = a.transfer(z).unwrap();
            let wb = b.transfer(z).unwrap();
            opnorm(&(&wa - &wb))
        })
        .fold(0.0, f64::max)
}
