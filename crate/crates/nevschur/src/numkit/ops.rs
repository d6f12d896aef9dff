//! Factorization-backed operations: defect square roots, pseudoinverse,
//! range embeddings, operator norm, and dense linear solves.

use super::eigh::{eigh, jacobi_hermitian};
use super::matrix::{ComplexMatrix, HermitianMatrix, HERMITIAN_TOL};
use crate::error::{Error, Result};

/// Default relative rank tolerance.
pub const RTOL_DEFAULT: f64 = 1e-10;
/// Clamping window for slightly negative eigenvalues of defect operators.
pub const NEG_EIG_CLAMP: f64 = 1e-10;
/// Condition-number ceiling guarding resolvent-backed evaluations.
pub const COND_LIMIT: f64 = 1e12;

/// Largest singular value, computed from the spectrum of A*A.
pub fn opnorm(a: &ComplexMatrix) -> f64 {
    if a.rows() == 0 || a.cols() == 0 {
        return 0.0;
    }
    let gram = (&a.adjoint() * a).hermitize();
    let d = jacobi_hermitian(&gram);
    d.eigenvalues.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Two-norm condition number; infinite when the smallest singular value
/// rounds to zero.
pub fn cond2(a: &ComplexMatrix) -> f64 {
    if a.rows() == 0 || a.cols() == 0 {
        return 1.0;
    }
    let sigmas = singular_values(a);
    let hi = sigmas.first().copied().unwrap_or(0.0);
    let lo = sigmas.last().copied().unwrap_or(0.0);
    if lo == 0.0 {
        if hi == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        hi / lo
    }
}

/// PSD square root S of A: S >= 0 and S^2 = A. Eigenvalues inside the
/// clamping window are set to zero; anything more negative is an error.
pub fn psd_sqrt(a: &HermitianMatrix) -> Result<HermitianMatrix> {
    let d = eigh(a);
    let max_abs = d
        .eigenvalues
        .iter()
        .fold(0.0_f64, |acc, &x| acc.max(x.abs()));
    let tolerance = NEG_EIG_CLAMP * 1.0_f64.max(max_abs);
    if let Some(&lo) = d.eigenvalues.first() {
        if lo < -tolerance {
            return Err(Error::NotPsd {
                eigenvalue: lo,
                tolerance,
            });
        }
    }
    let s = d.apply_spectral(|x| x.max(0.0).sqrt());
    Ok(HermitianMatrix::new_unchecked(s))
}

/// Singular values and right singular frame by one-sided Jacobi: columns of
/// the working copy are rotated pairwise until mutually orthogonal, which
/// avoids forming A*A and keeps small singular values at full relative
/// accuracy. Returns (W, V) with W = A V column-orthogonal.
fn one_sided_jacobi(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let k = a.cols();
    let mut w = a.clone();
    let mut v = ComplexMatrix::identity(k);
    let m = a.rows();
    for _sweep in 0..64 {
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let mut app = 0.0;
                let mut aqq = 0.0;
                let mut apq = num_complex::Complex64::new(0.0, 0.0);
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    app += wp.norm_sqr();
                    aqq += wq.norm_sqr();
                    apq += wp.conj() * wq;
                }
                let b = apq.norm();
                if b <= 1e-15 * (app * aqq).sqrt() || b == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = apq / b;
                let tau = (aqq - app) / (2.0 * b);
                let t = if tau >= 0.0 {
                    1.0 / (tau + f64::hypot(1.0, tau))
                } else {
                    -1.0 / (-tau + f64::hypot(1.0, tau))
                };
                let cth = 1.0 / f64::hypot(1.0, t);
                let sigma = t * cth;
                let s = phase * sigma;
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    w[(i, p)] = wp * cth - wq * s.conj();
                    w[(i, q)] = wp * s + wq * cth;
                }
                for i in 0..k {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = vp * cth - vq * s.conj();
                    v[(i, q)] = vp * s + vq * cth;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (w, v)
}

/// Moore-Penrose pseudoinverse. Hermitian inputs are inverted on their
/// spectrum directly; general inputs go through a one-sided Jacobi SVD.
/// Singular values at or below `rtol * sigma_max` are treated as zero.
pub fn pinv(a: &ComplexMatrix, rtol: f64) -> ComplexMatrix {
    if a.rows() == 0 || a.cols() == 0 {
        return ComplexMatrix::zeros(a.cols(), a.rows());
    }
    if a.is_square() && a.asymmetry() <= HERMITIAN_TOL * 1.0_f64.max(a.frobenius()) {
        let d = jacobi_hermitian(a);
        let cut = rtol
            * d.eigenvalues
                .iter()
                .fold(0.0_f64, |acc, &x| acc.max(x.abs()));
        return d.apply_spectral(|x| if x.abs() > cut { 1.0 / x } else { 0.0 });
    }
    if a.rows() < a.cols() {
        return pinv(&a.adjoint(), rtol).adjoint();
    }
    let (w, v) = one_sided_jacobi(a);
    let k = a.cols();
    let sigmas: Vec<f64> = (0..k).map(|j| w.column(j).vec_norm()).collect();
    let sigma_max = sigmas.iter().fold(0.0_f64, |acc, &x| acc.max(x));
    if sigma_max == 0.0 {
        return ComplexMatrix::zeros(a.cols(), a.rows());
    }
    let cut = rtol * sigma_max;
    // A^+ = sum over kept directions of v_j sigma_j^{-1} u_j^*
    let mut out = ComplexMatrix::zeros(a.cols(), a.rows());
    for (j, &sigma) in sigmas.iter().enumerate() {
        if sigma <= cut {
            continue;
        }
        let inv_sq = 1.0 / (sigma * sigma);
        for r in 0..a.cols() {
            let vrj = v[(r, j)];
            for c in 0..a.rows() {
                out[(r, c)] += vrj * w[(c, j)].conj() * inv_sq;
            }
        }
    }
    out
}

/// Singular values in descending order via one-sided Jacobi.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.rows() == 0 || a.cols() == 0 {
        return Vec::new();
    }
    if a.rows() < a.cols() {
        return singular_values(&a.adjoint());
    }
    let (w, _) = one_sided_jacobi(a);
    let mut sigmas: Vec<f64> = (0..a.cols()).map(|j| w.column(j).vec_norm()).collect();
    sigmas.sort_by(|x, y| y.partial_cmp(x).unwrap());
    sigmas
}

/// Isometric embedding of the numerical range of a PSD matrix: columns are
/// orthonormal, span the eigenspaces with eigenvalue above
/// `rtol * lambda_max`, and are ordered by descending eigenvalue.
pub fn range_embed(a: &HermitianMatrix, rtol: f64) -> Result<ComplexMatrix> {
    let n = a.dim();
    let d = eigh(a);
    let max_abs = d
        .eigenvalues
        .iter()
        .fold(0.0_f64, |acc, &x| acc.max(x.abs()));
    let tolerance = NEG_EIG_CLAMP * 1.0_f64.max(max_abs);
    if let Some(&lo) = d.eigenvalues.first() {
        if lo < -tolerance {
            return Err(Error::NotPsd {
                eigenvalue: lo,
                tolerance,
            });
        }
    }
    let lam_max = d.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    let cut = rtol * lam_max;
    let kept: Vec<usize> = (0..n)
        .rev()
        .filter(|&i| d.eigenvalues[i] > cut && d.eigenvalues[i] > 0.0)
        .collect();
    let mut e = ComplexMatrix::zeros(n, kept.len());
    for (col, &src) in kept.iter().enumerate() {
        for i in 0..n {
            e[(i, col)] = d.vectors[(i, src)];
        }
    }
    Ok(e)
}

/// Solves A X = B by LU with partial pivoting. Deterministic: the pivot is
/// the first entry of maximal modulus in each column.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if b.rows() != n {
        return Err(Error::DimensionMismatch {
            context: format!("solve: {}x{} vs rhs {}x{}", n, n, b.rows(), b.cols()),
        });
    }
    if n == 0 {
        return Ok(ComplexMatrix::zeros(0, b.cols()));
    }
    let mut lu = a.clone();
    let mut x = b.clone();
    let scale = a.max_abs().max(1.0);
    for col in 0..n {
        let mut piv = col;
        let mut piv_abs = lu[(col, col)].norm();
        for r in (col + 1)..n {
            let v = lu[(r, col)].norm();
            if v > piv_abs {
                piv_abs = v;
                piv = r;
            }
        }
        if piv_abs <= 1e-300 * scale {
            return Err(Error::Singular {
                context: format!("LU pivot {col}"),
            });
        }
        if piv != col {
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(piv, j)];
                lu[(piv, j)] = tmp;
            }
            for j in 0..x.cols() {
                let tmp = x[(col, j)];
                x[(col, j)] = x[(piv, j)];
                x[(piv, j)] = tmp;
            }
        }
        let d = lu[(col, col)];
        for r in (col + 1)..n {
            let f = lu[(r, col)] / d;
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for j in col..n {
                let v = lu[(col, j)] * f;
                lu[(r, j)] -= v;
            }
            for j in 0..x.cols() {
                let v = x[(col, j)] * f;
                x[(r, j)] -= v;
            }
        }
    }
    for col in (0..n).rev() {
        let d = lu[(col, col)];
        for j in 0..x.cols() {
            let mut acc = x[(col, j)];
            for k in (col + 1)..n {
                acc -= lu[(col, k)] * x[(k, j)];
            }
            x[(col, j)] = acc / d;
        }
    }
    Ok(x)
}

pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    solve(a, &ComplexMatrix::identity(a.rows()))
}

/// Convenience: eigendecomposition-backed function calculus on a
/// Hermitian matrix.
pub fn hermitian_function(a: &HermitianMatrix, f: impl Fn(f64) -> f64) -> HermitianMatrix {
    HermitianMatrix::new_unchecked(eigh(a).apply_spectral(f))
}

/// Defect operator D = (I - A* A)^(1/2) of a contraction block.
pub fn defect(a: &ComplexMatrix) -> Result<HermitianMatrix> {
    let gram = (&a.adjoint() * a).hermitize();
    let n = gram.rows();
    let d_sq = &ComplexMatrix::identity(n) - &gram;
    psd_sqrt(&HermitianMatrix::new_unchecked(d_sq))
}

/// Smallest eigenvalue of a Hermitian matrix; +inf for the empty matrix so
/// that vacuous positivity checks pass.
pub fn min_eig(a: &HermitianMatrix) -> f64 {
    eigh(a).eigenvalues.first().copied().unwrap_or(f64::INFINITY)
}
