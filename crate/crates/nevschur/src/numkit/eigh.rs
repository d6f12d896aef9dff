//! Hermitian eigendecomposition by cyclic Jacobi rotations.
//!
//! Self-contained and deterministic: pairs are swept in fixed row-major
//! order, eigenvalues are sorted ascending with a stable permutation, and
//! each eigenvector is rescaled so that its first component of largest
//! modulus is real and nonnegative. Identical input bytes therefore yield
//! identical output bytes across runs and platforms.

use num_complex::Complex64;

use super::matrix::{ComplexMatrix, HermitianMatrix};

/// Eigenvalues ascending; `vectors` columns form an orthonormal basis with
/// `A = V diag(eigenvalues) V*`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// V diag(f(lambda)) V*, symmetrized.
    pub fn apply_spectral(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.vectors.rows();
        let v = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let flam = f(lam);
            if flam == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)];
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj() * flam;
                }
            }
        }
        out.hermitize()
    }
}

/// Hermitian eigendecomposition of a validated Hermitian matrix.
pub fn eigh(a: &HermitianMatrix) -> EigenDecomposition {
    jacobi_hermitian(a.as_matrix())
}

const MAX_SWEEPS: usize = 64;

/// Core cyclic Jacobi loop. The input is assumed Hermitian (takes the
/// upper triangle as authoritative through the symmetrized accessors).
pub(crate) fn jacobi_hermitian(a: &ComplexMatrix) -> EigenDecomposition {
    let n = a.rows();
    debug_assert!(a.is_square());
    if n == 0 {
        return EigenDecomposition {
            eigenvalues: Vec::new(),
            vectors: ComplexMatrix::zeros(0, 0),
        };
    }

    let mut m = a.hermitize();
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius().max(1.0);
    let stop = 1e-15 * scale;

    for _sweep in 0..MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if (2.0 * off).sqrt() <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap());

    let eigenvalues: Vec<f64> = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        // Phase convention: first component of largest modulus becomes
        // real nonnegative.
        let mut best = 0usize;
        let mut best_abs = 0.0;
        for i in 0..n {
            let a = v[(i, old_col)].norm();
            if a > best_abs {
                best_abs = a;
                best = i;
            }
        }
        let pivot = v[(best, old_col)];
        let phase = if best_abs > 0.0 {
            pivot.conj() / best_abs
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            vectors[(i, new_col)] = v[(i, old_col)] * phase;
        }
    }

    EigenDecomposition {
        eigenvalues,
        vectors,
    }
}

/// One complex Jacobi rotation annihilating m[(p,q)].
fn rotate(m: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let beta = m[(p, q)];
    let b = beta.norm();
    if b == 0.0 {
        return;
    }
    let alpha = m[(p, p)].re;
    let gamma = m[(q, q)].re;
    let phase = beta / b;

    // tan of the rotation angle from tau = (gamma - alpha) / (2|beta|),
    // smaller-magnitude root of t^2 + 2 tau t - 1 = 0.
    let tau = (gamma - alpha) / (2.0 * b);
    let t = if tau >= 0.0 {
        1.0 / (tau + f64::hypot(1.0, tau))
    } else {
        -1.0 / (-tau + f64::hypot(1.0, tau))
    };
    let c = 1.0 / f64::hypot(1.0, t);
    let sigma = t * c;
    let s = phase * sigma; // complex sine with the phase of beta

    let n = m.rows();
    // B = G* M G with G = [[c, s], [-conj(s), c]] on columns (p, q).
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        let new_kp = mkp * c - mkq * s.conj();
        let new_kq = mkp * s + mkq * c;
        m[(k, p)] = new_kp;
        m[(p, k)] = new_kp.conj();
        m[(k, q)] = new_kq;
        m[(q, k)] = new_kq.conj();
    }
    let app = c * c * alpha - 2.0 * c * sigma * b + sigma * sigma * gamma;
    let aqq = sigma * sigma * alpha + 2.0 * c * sigma * b + c * c * gamma;
    m[(p, p)] = Complex64::new(app, 0.0);
    m[(q, q)] = Complex64::new(aqq, 0.0);
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * s.conj();
        v[(k, q)] = vkp * s + vkq * c;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded::{random_hermitian, rng_from_seed};

    fn reconstruct(d: &EigenDecomposition) -> ComplexMatrix {
        d.apply_spectral(|x| x)
    }

    #[test]
    fn flip_matrix_eigenvalues() {
        let a = HermitianMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let d = eigh(&a);
        assert!((d.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((d.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_is_fixed_point() {
        let a = HermitianMatrix::real_diagonal(&[1.0, 2.0]);
        let d = eigh(&a);
        assert_eq!(d.eigenvalues, vec![1.0, 2.0]);
        assert_eq!(d.vectors, ComplexMatrix::identity(2));
    }

    #[test]
    fn random_reconstruction_and_orthonormality() {
        for seed in 0..8u64 {
            let mut rng = rng_from_seed(900 + seed);
            let a = random_hermitian(&mut rng, 6);
            let d = eigh(&a);
            let scale = 1.0_f64.max(a.as_matrix().frobenius());
            let resid = (&reconstruct(&d) - a.as_matrix()).frobenius();
            assert!(resid < 1e-10 * scale, "residual {resid}");
            let vtv = &d.vectors.adjoint() * &d.vectors;
            let ortho = (&vtv - &ComplexMatrix::identity(6)).frobenius();
            assert!(ortho < 1e-10, "orthonormality {ortho}");
        }
    }

    #[test]
    fn ascending_and_deterministic() {
        let mut rng = rng_from_seed(7);
        let a = random_hermitian(&mut rng, 9);
        let d1 = eigh(&a);
        let d2 = eigh(&a);
        for w in d1.eigenvalues.windows(2) {
            assert!(w[0] <= w[1]);
        }
        // bitwise determinism
        assert_eq!(d1.eigenvalues, d2.eigenvalues);
        for i in 0..9 {
            for j in 0..9 {
                let x = d1.vectors[(i, j)];
                let y = d2.vectors[(i, j)];
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
    }

    #[test]
    fn phase_convention_largest_component_real() {
        let mut rng = rng_from_seed(21);
        let a = random_hermitian(&mut rng, 5);
        let d = eigh(&a);
        for col in 0..5 {
            let mut best = 0usize;
            let mut best_abs = 0.0;
            for i in 0..5 {
                let v = d.vectors[(i, col)].norm();
                if v > best_abs {
                    best_abs = v;
                    best = i;
                }
            }
            let z = d.vectors[(best, col)];
            assert!(z.im.abs() < 1e-14 && z.re >= 0.0);
        }
    }

    #[test]
    fn empty_matrix() {
        let a = HermitianMatrix::zeros(0);
        let d = eigh(&a);
        assert!(d.eigenvalues.is_empty());
    }
}
