//! Fixed probe grids used by certificates, fit tests and cross-checks.
//!
//! All points avoid the cuts `(-inf,-1]` and `[1,+inf)` by construction.

use num_complex::Complex64;

use crate::systems::CutPlanePoint;

fn polar(r: f64, theta: f64) -> Complex64 {
    Complex64::from_polar(r, theta)
}

/// 12 disk points: radii {0.3, 0.6, 0.9} x four angles off the real axis.
pub fn disk_grid() -> Vec<CutPlanePoint> {
    let radii = [0.3, 0.6, 0.9];
    let angles = [
        std::f64::consts::FRAC_PI_6,
        2.0 * std::f64::consts::FRAC_PI_3,
        7.0 * std::f64::consts::PI / 6.0,
        5.0 * std::f64::consts::PI / 3.0,
    ];
    let mut pts = Vec::with_capacity(12);
    for &r in &radii {
        for &t in &angles {
            pts.push(CutPlanePoint::new(polar(r, t)).expect("disk grid point"));
        }
    }
    pts
}

/// 8 real points in (-0.99, 0.99).
pub fn real_grid() -> Vec<f64> {
    vec![-0.9, -0.65, -0.35, -0.1, 0.1, 0.35, 0.65, 0.9]
}

/// Certificate grid: per half-plane, radii {0.5, 1.0, 1.8} x angles
/// {pi/3, 2pi/3}; the lower half is the conjugate family.
pub fn certificate_grid() -> (Vec<CutPlanePoint>, Vec<CutPlanePoint>) {
    let radii = [0.5, 1.0, 1.8];
    let angles = [std::f64::consts::FRAC_PI_3, 2.0 * std::f64::consts::FRAC_PI_3];
    let mut upper = Vec::with_capacity(6);
    let mut lower = Vec::with_capacity(6);
    for &r in &radii {
        for &t in &angles {
            let z = polar(r, t);
            upper.push(CutPlanePoint::new(z).expect("upper grid point"));
            lower.push(CutPlanePoint::new(z.conj()).expect("lower grid point"));
        }
    }
    (upper, lower)
}

/// 16-point grid for transfer-function agreement: the disk grid plus four
/// interior real points.
pub fn probe_16() -> Vec<CutPlanePoint> {
    let mut pts = disk_grid();
    for x in [-0.8, -0.2, 0.2, 0.8] {
        pts.push(CutPlanePoint::new(Complex64::new(x, 0.0)).expect("real probe"));
    }
    pts
}

/// Combined disk + real probe grid (20 points) used by fit reports.
pub fn fit_grid() -> Vec<CutPlanePoint> {
    let mut pts = disk_grid();
    for x in real_grid() {
        pts.push(CutPlanePoint::new(Complex64::new(x, 0.0)).expect("real probe"));
    }
    pts
}

/// 6 resolvent probes off [-1, 1].
pub fn xi_grid() -> Vec<Complex64> {
    vec![
        Complex64::new(0.0, 2.0),
        Complex64::new(0.0, -2.0),
        Complex64::new(1.5, 0.8),
        Complex64::new(-1.5, -0.8),
        Complex64::new(0.4, 1.1),
        Complex64::new(2.5, 0.0),
    ]
}

/// Points z with |z sin(beta) + sign i cos(beta)| = 1 and z != +-1,
/// parametrized by four phases on the image circle.
pub fn beta_circle(beta: f64, sign: f64) -> Vec<CutPlanePoint> {
    let phases = [
        std::f64::consts::PI / 5.0,
        2.0 * std::f64::consts::FRAC_PI_3,
        6.0 * std::f64::consts::PI / 5.0,
        9.0 * std::f64::consts::PI / 5.0,
    ];
    phases
        .iter()
        .map(|&phi| {
            let z = (Complex64::from_polar(1.0, phi) - Complex64::new(0.0, sign * beta.cos()))
                / beta.sin();
            CutPlanePoint::new(z).expect("beta circle point")
        })
        .collect()
}

/// The three slopes used by the circle-bound checks.
pub fn beta_values() -> Vec<f64> {
    vec![
        std::f64::consts::FRAC_PI_6,
        std::f64::consts::FRAC_PI_4,
        std::f64::consts::FRAC_PI_3,
    ]
}
