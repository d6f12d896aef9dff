//! Passive discrete-time systems tau = {T; M, M, K}: validation, transfer
//! evaluation, compressed resolvents, Krylov structure, simulation, and
//! unitary similarity.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numkit::{
    cond2, opnorm, solve, ComplexMatrix, HermitianMatrix, COND_LIMIT, HERMITIAN_TOL,
};
use crate::seeded::{random_contraction, random_hermitian_contraction, rng_from_seed};

/// Passivity slack: opnorm(T) may exceed 1 by at most this much.
pub const PASSIVITY_TOL: f64 = 1e-10;

/// A point of the cut plane C \ {(-inf,-1] u [1,+inf)}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CutPlanePoint(Complex64);

impl CutPlanePoint {
    pub fn new(z: Complex64) -> Result<Self> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::InvalidParameter("non-finite point".into()));
        }
        if z.im == 0.0 && z.re.abs() >= 1.0 {
            return Err(Error::OutsideDomain {
                point: format!("{z}"),
                domain: "C \\ {(-inf,-1] u [1,+inf)}".into(),
            });
        }
        Ok(Self(z))
    }

    pub fn new_real(x: f64) -> Result<Self> {
        Self::new(Complex64::new(x, 0.0))
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn conj(self) -> Self {
        Self(self.0.conj())
    }
}

/// Rejects xi in [-1, 1]; the holomorphy domain of compressed resolvents.
pub fn check_resolvent_point(xi: Complex64) -> Result<Complex64> {
    if !xi.re.is_finite() || !xi.im.is_finite() {
        return Err(Error::InvalidParameter("non-finite point".into()));
    }
    if xi.im == 0.0 && xi.re.abs() <= 1.0 {
        return Err(Error::OutsideDomain {
            point: format!("{xi}"),
            domain: "C \\ [-1,1]".into(),
        });
    }
    Ok(xi)
}

/// A contraction T = [D C; B A] partitioned over input dimension m and
/// state dimension n. Selfadjoint systems additionally satisfy T = T*,
/// hence B = C*, A = A*, D = D*.
#[derive(Clone, Debug)]
pub struct PassiveSystem {
    m: usize,
    n: usize,
    t: ComplexMatrix,
    selfadjoint: bool,
}

impl PassiveSystem {
    /// Validating constructor: checks the partition, passivity, and (when
    /// requested) selfadjointness; a selfadjoint T is stored symmetrized.
    pub fn validate(t: ComplexMatrix, m: usize, require_selfadjoint: bool) -> Result<Self> {
        if !t.is_square() {
            return Err(Error::NotSquare {
                rows: t.rows(),
                cols: t.cols(),
            });
        }
        if t.rows() < m {
            return Err(Error::DimensionMismatch {
                context: format!("input dimension {} exceeds operator size {}", m, t.rows()),
            });
        }
        t.check_finite()?;
        let norm = opnorm(&t);
        if norm > 1.0 + PASSIVITY_TOL {
            return Err(Error::NotContraction { norm });
        }
        let t = if require_selfadjoint {
            let defect = t.asymmetry();
            let tolerance = HERMITIAN_TOL * 1.0_f64.max(t.frobenius());
            if defect > tolerance {
                return Err(Error::NotSelfadjoint { defect, tolerance });
            }
            t.hermitize()
        } else {
            t
        };
        let n = t.rows() - m;
        Ok(Self {
            m,
            n,
            t,
            selfadjoint: require_selfadjoint,
        })
    }

    /// Skips all checks. For assembling fixtures that are known good, or
    /// deliberately invalid ones when exercising failure verdicts.
    pub fn new_unchecked(t: ComplexMatrix, m: usize, selfadjoint: bool) -> Self {
        let n = t.rows() - m;
        Self {
            m,
            n,
            t,
            selfadjoint,
        }
    }

    pub fn dim_input(&self) -> usize {
        self.m
    }

    pub fn dim_state(&self) -> usize {
        self.n
    }

    pub fn dim_total(&self) -> usize {
        self.m + self.n
    }

    pub fn is_selfadjoint(&self) -> bool {
        self.selfadjoint
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.t
    }

    pub fn to_hermitian(&self) -> Result<HermitianMatrix> {
        HermitianMatrix::new(self.t.clone())
    }

    /// Feedthrough block D (m x m).
    pub fn d_block(&self) -> ComplexMatrix {
        self.t.submatrix(0, self.m, 0, self.m)
    }

    /// Observation block C (m x n).
    pub fn c_block(&self) -> ComplexMatrix {
        self.t.submatrix(0, self.m, self.m, self.m + self.n)
    }

    /// Control block B (n x m).
    pub fn b_block(&self) -> ComplexMatrix {
        self.t.submatrix(self.m, self.m + self.n, 0, self.m)
    }

    /// Main block A (n x n).
    pub fn a_block(&self) -> ComplexMatrix {
        self.t
            .submatrix(self.m, self.m + self.n, self.m, self.m + self.n)
    }

    /// Transfer function Omega(z) = D + z C (I - z A)^{-1} B.
    pub fn transfer(&self, z: CutPlanePoint) -> Result<ComplexMatrix> {
        let zv = z.value();
        if self.n == 0 {
            return Ok(self.d_block());
        }
        let resolvent = &ComplexMatrix::identity(self.n) - &self.a_block().scale(zv);
        let cond = cond2(&resolvent);
        if cond > COND_LIMIT {
            return Err(Error::NearSingularResolvent { cond });
        }
        let x = solve(&resolvent, &self.b_block())?;
        Ok(&self.d_block() + &(&self.c_block() * &x).scale(zv))
    }

    /// Derivative Omega'(z) = C (I - z A)^{-2} B.
    pub fn transfer_derivative(&self, z: CutPlanePoint) -> Result<ComplexMatrix> {
        let zv = z.value();
        if self.n == 0 {
            return Ok(ComplexMatrix::zeros(self.m, self.m));
        }
        let resolvent = &ComplexMatrix::identity(self.n) - &self.a_block().scale(zv);
        let cond = cond2(&resolvent);
        if cond > COND_LIMIT {
            return Err(Error::NearSingularResolvent { cond });
        }
        let x = solve(&resolvent, &solve(&resolvent, &self.b_block())?)?;
        Ok(&self.c_block() * &x)
    }

    /// Runs the recursion h_{k+1} = A h_k + B xi_k, sigma_k = C h_k + D xi_k.
    pub fn simulate(&self, h0: &ComplexMatrix, inputs: &[ComplexMatrix]) -> Result<Trajectory> {
        if h0.rows() != self.n || h0.cols() != 1 {
            return Err(Error::DimensionMismatch {
                context: format!("initial state must be {}x1, got {}x{}", self.n, h0.rows(), h0.cols()),
            });
        }
        for (k, xi) in inputs.iter().enumerate() {
            if xi.rows() != self.m || xi.cols() != 1 {
                return Err(Error::DimensionMismatch {
                    context: format!("input {k} must be {}x1", self.m),
                });
            }
        }
        let a = self.a_block();
        let b = self.b_block();
        let c = self.c_block();
        let d = self.d_block();
        let mut states = Vec::with_capacity(inputs.len() + 1);
        let mut outputs = Vec::with_capacity(inputs.len());
        states.push(h0.clone());
        for xi in inputs {
            let h = states.last().expect("nonempty");
            outputs.push(&(&c * h) + &(&d * xi));
            let next = &(&a * h) + &(&b * xi);
            states.push(next);
        }
        Ok(Trajectory {
            states,
            outputs,
            inputs: inputs.to_vec(),
        })
    }
}

/// States h_0..h_K, outputs sigma_0..sigma_{K-1}, inputs xi_0..xi_{K-1}.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub states: Vec<ComplexMatrix>,
    pub outputs: Vec<ComplexMatrix>,
    pub inputs: Vec<ComplexMatrix>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Per-step energy balance (||h_k||^2 + ||xi_k||^2) - (||h_{k+1}||^2 +
    /// ||sigma_k||^2); nonnegative up to roundoff for passive systems.
    pub fn energy_defects(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let before = self.states[k].frobenius().powi(2)
                    + self.inputs[k].frobenius().powi(2);
                let after = self.states[k + 1].frobenius().powi(2)
                    + self.outputs[k].frobenius().powi(2);
                before - after
            })
            .collect()
    }

    pub fn min_energy_defect(&self) -> f64 {
        self.energy_defects()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Compressed resolvent M(xi) = P_M (T - xi I)^{-1} |_M of a selfadjoint
/// contraction, evaluated off the interval [-1, 1].
pub fn compressed_resolvent(t: &HermitianMatrix, m: usize, xi: Complex64) -> Result<ComplexMatrix> {
    let xi = check_resolvent_point(xi)?;
    let dim = t.dim();
    if m > dim {
        return Err(Error::DimensionMismatch {
            context: format!("compression rank {m} exceeds dimension {dim}"),
        });
    }
    let norm = opnorm(t.as_matrix());
    if norm > 1.0 + PASSIVITY_TOL {
        return Err(Error::NotContraction { norm });
    }
    let shifted = t.as_matrix() - &ComplexMatrix::identity(dim).scale(xi);
    let rhs = ComplexMatrix::identity(dim).submatrix(0, dim, 0, m);
    let x = solve(&shifted, &rhs)?;
    Ok(x.submatrix(0, m, 0, m))
}

/// Controllability/observability structure detected from Krylov blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KrylovAnalysis {
    pub controllable_dim: usize,
    pub observable_dim: usize,
    pub minimal: bool,
    pub simple: bool,
}

/// Appends to `basis` the fresh orthonormal directions found in the columns
/// of `cols`; a column counts when its orthogonal residual exceeds
/// `rtol` times its own norm. Returns the accepted directions.
fn grow_basis(basis: &mut Vec<ComplexMatrix>, cols: &ComplexMatrix, rtol: f64) -> Vec<ComplexMatrix> {
    let mut fresh = Vec::new();
    for j in 0..cols.cols() {
        let v = cols.column(j);
        let scale = v.vec_norm();
        if scale == 0.0 {
            continue;
        }
        let mut w = v;
        for _ in 0..2 {
            for q in basis.iter() {
                let coeff = (&q.adjoint() * &w)[(0, 0)];
                w = &w - &q.scale(coeff);
            }
        }
        let norm = w.vec_norm();
        if norm > rtol * scale {
            let q = w.scale_re(1.0 / norm);
            basis.push(q.clone());
            fresh.push(q);
        }
    }
    fresh
}

/// Dimension of span{A^k B M} by iterated orthonormalization: each new
/// direction is normalized before it is propagated, so long chains with
/// geometrically decaying couplings are resolved at full rank.
pub(crate) fn krylov_span_dim(a: &ComplexMatrix, b: &ComplexMatrix, rtol: f64) -> (usize, Vec<ComplexMatrix>) {
    let n = a.rows();
    let mut basis: Vec<ComplexMatrix> = Vec::new();
    let mut frontier = grow_basis(&mut basis, b, rtol);
    while !frontier.is_empty() && basis.len() < n {
        let refs: Vec<&ComplexMatrix> = frontier.iter().collect();
        let propagated = a * &ComplexMatrix::hstack(&refs);
        frontier = grow_basis(&mut basis, &propagated, rtol);
    }
    (basis.len(), basis)
}

/// Dimensions of span{A^k B M} and span{A*^k C* M}, minimality, and
/// simplicity (closed span of both equals the state space).
pub fn krylov_analysis(sys: &PassiveSystem, rtol: f64) -> KrylovAnalysis {
    let n = sys.dim_state();
    if n == 0 {
        return KrylovAnalysis {
            controllable_dim: 0,
            observable_dim: 0,
            minimal: true,
            simple: true,
        };
    }
    let a = sys.a_block();
    let (rc, basis_c) = krylov_span_dim(&a, &sys.b_block(), rtol);
    let (ro, basis_o) = krylov_span_dim(&a.adjoint(), &sys.c_block().adjoint(), rtol);
    let mut joint = basis_c;
    let mut rs = joint.len();
    for q in basis_o {
        rs += grow_basis(&mut joint, &q, rtol).len();
    }
    KrylovAnalysis {
        controllable_dim: rc,
        observable_dim: ro,
        minimal: rc == n && ro == n,
        simple: rs == n,
    }
}

/// Attempts to produce the unitary state-space change U with A2 = U A1 U*,
/// B2 = U B1, C2 = C1 U*, D2 = D1 by matching Krylov bases built with the
/// same acceptance recipe on both sides. Both systems must be minimal and
/// selfadjoint; `rtol` bounds the probe-grid transfer agreement. Returns
/// None when the probe values differ or the verification postcondition
/// fails; existence for equal transfer functions is guaranteed for minimal
/// realizations, so the construction is verified rather than trusted.
pub fn unitary_similarity(
    sys1: &PassiveSystem,
    sys2: &PassiveSystem,
    rtol: f64,
) -> Result<Option<ComplexMatrix>> {
    if !sys1.is_selfadjoint() || !sys2.is_selfadjoint() {
        return Err(Error::InvalidParameter(
            "unitary similarity requires selfadjoint systems".into(),
        ));
    }
    if sys1.dim_input() != sys2.dim_input() {
        return Err(Error::DimensionMismatch {
            context: "input dimensions differ".into(),
        });
    }
    let k1 = krylov_analysis(sys1, crate::numkit::RTOL_DEFAULT);
    let k2 = krylov_analysis(sys2, crate::numkit::RTOL_DEFAULT);
    if !k1.minimal || !k2.minimal {
        return Err(Error::MinimalityRequired {
            context: "unitary similarity of non-minimal systems is not decided".into(),
        });
    }
    if sys1.dim_state() != sys2.dim_state() {
        return Ok(None);
    }
    for z in crate::grids::probe_16() {
        let w1 = sys1.transfer(z)?;
        let w2 = sys2.transfer(z)?;
        if opnorm(&(&w1 - &w2)) > rtol {
            return Ok(None);
        }
    }
    let n = sys1.dim_state();
    if n == 0 {
        return Ok(Some(ComplexMatrix::zeros(0, 0)));
    }
    // The iterated orthonormalization runs the same acceptance recipe on
    // both sides, so for unitarily related systems the bases correspond
    // column by column and U = Q2 Q1*.
    let (r1, q1) = krylov_span_dim(&sys1.a_block(), &sys1.b_block(), crate::numkit::RTOL_DEFAULT);
    let (r2, q2) = krylov_span_dim(&sys2.a_block(), &sys2.b_block(), crate::numkit::RTOL_DEFAULT);
    if r1 != n || r2 != n {
        return Ok(None);
    }
    let q1m = ComplexMatrix::hstack(&q1.iter().collect::<Vec<_>>());
    let q2m = ComplexMatrix::hstack(&q2.iter().collect::<Vec<_>>());
    let u = &q2m * &q1m.adjoint();

    let tol = 1e-8;
    let ok = opnorm(&(&(&u * &u.adjoint()) - &ComplexMatrix::identity(n))) <= tol
        && opnorm(&(&(&(&u * &sys1.a_block()) * &u.adjoint()) - &sys2.a_block())) <= tol
        && opnorm(&(&(&u * &sys1.b_block()) - &sys2.b_block())) <= tol
        && opnorm(&(&(&sys1.c_block() * &u.adjoint()) - &sys2.c_block())) <= tol
        && opnorm(&(&sys1.d_block() - &sys2.d_block())) <= tol;
    Ok(if ok { Some(u) } else { None })
}

/// Seeded passive selfadjoint system: a symmetrized Gaussian matrix scaled
/// strictly inside the contraction ball.
pub fn random_selfadjoint_system(seed: u64, m: usize, n: usize) -> PassiveSystem {
    let mut rng = rng_from_seed(seed);
    let t = random_hermitian_contraction(&mut rng, m + n);
    PassiveSystem::validate(t.into_matrix(), m, true).expect("generated system is valid")
}

/// Seeded passive (not necessarily selfadjoint) system.
pub fn random_passive_system(seed: u64, m: usize, n: usize) -> PassiveSystem {
    let mut rng = rng_from_seed(seed);
    let t = random_contraction(&mut rng, m + n, m + n);
    PassiveSystem::validate(t, m, false).expect("generated system is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids;
    use crate::seeded::random_unitary;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cut_plane_membership() {
        assert!(CutPlanePoint::new(c(0.5, 0.0)).is_ok());
        assert!(CutPlanePoint::new(c(1.0, 0.0)).is_err());
        assert!(CutPlanePoint::new(c(-3.0, 0.0)).is_err());
        assert!(CutPlanePoint::new(c(-3.0, 0.1)).is_ok());
        assert!(check_resolvent_point(c(0.5, 0.0)).is_err());
        assert!(check_resolvent_point(c(1.5, 0.0)).is_ok());
    }

    #[test]
    fn validate_flip_and_reject_noncontraction() {
        let flip = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let sys = PassiveSystem::validate(flip, 1, true).unwrap();
        assert_eq!((sys.dim_input(), sys.dim_state()), (1, 1));
        let big = ComplexMatrix::from_real_rows(&[vec![2.0]]);
        assert!(matches!(
            PassiveSystem::validate(big, 1, false),
            Err(Error::NotContraction { .. })
        ));
        let asym = ComplexMatrix::from_real_rows(&[vec![0.0, 0.5], vec![0.0, 0.0]]);
        assert!(matches!(
            PassiveSystem::validate(asym, 1, true),
            Err(Error::NotSelfadjoint { .. })
        ));
    }

    #[test]
    fn random_generator_is_valid_and_seed_stable() {
        let s1 = random_selfadjoint_system(42, 2, 3);
        let s2 = random_selfadjoint_system(42, 2, 3);
        assert_eq!(s1.matrix(), s2.matrix());
        assert!(opnorm(s1.matrix()) <= 1.0 + PASSIVITY_TOL);
        let p = random_passive_system(9, 2, 3);
        assert!(opnorm(p.matrix()) <= 1.0 + PASSIVITY_TOL);
    }

    #[test]
    fn transfer_of_flip_is_z() {
        let sys = PassiveSystem::validate(
            ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]),
            1,
            true,
        )
        .unwrap();
        for z in grids::probe_16() {
            let w = sys.transfer(z).unwrap();
            assert!((w[(0, 0)] - z.value()).norm() < 1e-12);
        }
        let dz = sys.transfer_derivative(CutPlanePoint::new(c(0.3, 0.1)).unwrap()).unwrap();
        assert!((dz[(0, 0)] - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn stateless_transfer_is_constant() {
        let sys = PassiveSystem::validate(ComplexMatrix::from_real_rows(&[vec![0.7]]), 1, true)
            .unwrap();
        let z = CutPlanePoint::new(c(0.2, 0.4)).unwrap();
        assert!((sys.transfer(z).unwrap()[(0, 0)] - c(0.7, 0.0)).norm() < 1e-15);
        assert_eq!(sys.transfer_derivative(z).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn isometric_corner_transfer_value() {
        let r = 1.0 / 2.0_f64.sqrt();
        let sys = PassiveSystem::validate(
            ComplexMatrix::from_real_rows(&[vec![0.0, r], vec![r, 0.0]]),
            1,
            true,
        )
        .unwrap();
        let w = sys.transfer(CutPlanePoint::new(c(0.0, 1.0)).unwrap()).unwrap();
        assert!((w[(0, 0)] - c(0.0, 0.5)).norm() < 1e-14);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let sys = random_selfadjoint_system(17, 2, 4);
        let z0 = c(0.0, 0.3);
        let h = 1e-6;
        let exact = sys
            .transfer_derivative(CutPlanePoint::new(z0).unwrap())
            .unwrap();
        let plus = sys.transfer(CutPlanePoint::new(z0 + c(h, 0.0)).unwrap()).unwrap();
        let minus = sys.transfer(CutPlanePoint::new(z0 - c(h, 0.0)).unwrap()).unwrap();
        let fd = (&plus - &minus).scale_re(0.5 / h);
        let rel = opnorm(&(&exact - &fd)) / opnorm(&exact).max(1e-12);
        assert!(rel < 1e-6, "finite difference mismatch {rel}");
    }

    #[test]
    fn near_singular_resolvent_is_rejected() {
        // rotation-like main block with spectrum hugging the unit circle:
        // (I - zA) degenerates at z close to -i
        let r = 0.999_999_9;
        let t = ComplexMatrix::from_real_rows(&[
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, r],
            vec![0.0, -r, 0.0],
        ]);
        let sys = PassiveSystem::validate(t, 1, false).unwrap();
        let z = CutPlanePoint::new(c(0.0, -1.0 / r)).unwrap();
        assert!(matches!(
            sys.transfer(z),
            Err(Error::NearSingularResolvent { .. })
        ));
        assert!(matches!(
            sys.transfer_derivative(z),
            Err(Error::NearSingularResolvent { .. })
        ));
    }

    #[test]
    fn nevanlinna_symmetry_and_schur_bound() {
        let sys = random_selfadjoint_system(5, 2, 4);
        for z in grids::disk_grid() {
            let w = sys.transfer(z).unwrap();
            let wc = sys.transfer(z.conj()).unwrap();
            assert!(opnorm(&(&w.adjoint() - &wc)) < 1e-10);
            assert!(opnorm(&w) <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn compressed_resolvent_values() {
        let t = HermitianMatrix::from_real_rows(&[vec![0.0]]).unwrap();
        let xi = c(0.7, 1.3);
        let m = compressed_resolvent(&t, 1, xi).unwrap();
        assert!((m[(0, 0)] - (-1.0 / xi)).norm() < 1e-14);

        let t = HermitianMatrix::real_diagonal(&[1.0, -1.0]);
        let m = compressed_resolvent(&t, 1, xi).unwrap();
        assert!((m[(0, 0)] - 1.0 / (1.0 - xi)).norm() < 1e-14);

        assert!(compressed_resolvent(&t, 1, c(0.3, 0.0)).is_err());
    }

    #[test]
    fn resolvent_nevanlinna_symmetry_and_asymptotics() {
        let sys = random_selfadjoint_system(31, 2, 3);
        let t = sys.to_hermitian().unwrap();
        let xi = c(0.4, 1.1);
        let m1 = compressed_resolvent(&t, 2, xi).unwrap();
        let m2 = compressed_resolvent(&t, 2, xi.conj()).unwrap();
        assert!(opnorm(&(&m1.adjoint() - &m2)) < 1e-10);
        let far = c(0.0, 1e6);
        let m = compressed_resolvent(&t, 2, far).unwrap().scale(far);
        assert!(opnorm(&(&m + &ComplexMatrix::identity(2))) < 1e-4);
    }

    #[test]
    fn schur_frobenius_identity() {
        let sys = random_selfadjoint_system(23, 2, 4);
        let z = c(0.0, 0.4);
        let dim = sys.dim_total();
        let shifted = &ComplexMatrix::identity(dim) - &sys.matrix().scale(z);
        let inv = crate::numkit::inverse(&shifted).unwrap();
        let compressed = inv.submatrix(0, 2, 0, 2);
        let omega = sys.transfer(CutPlanePoint::new(z).unwrap()).unwrap();
        let prod = &compressed * &(&ComplexMatrix::identity(2) - &omega.scale(z));
        assert!(opnorm(&(&prod - &ComplexMatrix::identity(2))) < 1e-10);
    }

    #[test]
    fn krylov_detects_structure() {
        // decoupled state block orthogonal to ran C*: not minimal
        let t = ComplexMatrix::from_real_rows(&[
            vec![0.0, 0.5, 0.0],
            vec![0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.5],
        ]);
        let sys = PassiveSystem::validate(t, 1, true).unwrap();
        let k = krylov_analysis(&sys, 1e-10);
        assert_eq!(k.controllable_dim, 1);
        assert!(!k.minimal);
        assert!(!k.simple);

        // C = 0: nothing controllable
        let t = ComplexMatrix::from_real_rows(&[vec![0.3, 0.0], vec![0.0, 0.4]]);
        let sys = PassiveSystem::validate(t, 1, true).unwrap();
        let k = krylov_analysis(&sys, 1e-10);
        assert_eq!(k.controllable_dim, 0);
        assert!(!k.minimal);

        let sys = random_selfadjoint_system(77, 2, 4);
        let k = krylov_analysis(&sys, 1e-10);
        assert_eq!(k.controllable_dim, k.observable_dim);
        assert!(k.minimal && k.simple);
    }

    #[test]
    fn simulate_identity_and_energy() {
        let sys = PassiveSystem::validate(ComplexMatrix::identity(2), 1, true).unwrap();
        let h0 = ComplexMatrix::from_real_rows(&[vec![0.5]]);
        let inputs: Vec<ComplexMatrix> = (0..4)
            .map(|k| ComplexMatrix::from_real_rows(&[vec![k as f64 / 3.0]]))
            .collect();
        let traj = sys.simulate(&h0, &inputs).unwrap();
        for (xi, sigma) in traj.inputs.iter().zip(traj.outputs.iter()) {
            assert_eq!(xi[(0, 0)], sigma[(0, 0)]);
        }
        for h in &traj.states {
            assert_eq!(h[(0, 0)], c(0.5, 0.0));
        }

        // A = 0 forgets the state after one step with zero inputs
        let t = ComplexMatrix::from_real_rows(&[vec![0.0, 0.5], vec![0.5, 0.0]]);
        let sys = PassiveSystem::validate(t, 1, true).unwrap();
        let h0 = ComplexMatrix::from_real_rows(&[vec![1.0]]);
        let one = ComplexMatrix::from_real_rows(&[vec![1.0]]);
        let zero = ComplexMatrix::zeros(1, 1);
        let traj = sys.simulate(&h0, &[one, zero.clone(), zero]).unwrap();
        assert_eq!(traj.states[2].max_abs(), 0.0);
        assert_eq!(traj.states[3].max_abs(), 0.0);

        let sys = random_passive_system(3, 2, 3);
        let mut rng = rng_from_seed(4);
        let h0 = crate::seeded::random_gaussian_matrix(&mut rng, 3, 1);
        let inputs: Vec<ComplexMatrix> = (0..1000)
            .map(|_| crate::seeded::random_gaussian_matrix(&mut rng, 2, 1))
            .collect();
        let traj = sys.simulate(&h0, &inputs).unwrap();
        assert!(traj.min_energy_defect() >= -1e-12);
    }

    #[test]
    fn simulate_rejects_bad_dims() {
        let sys = random_passive_system(3, 2, 3);
        let bad = ComplexMatrix::zeros(2, 1);
        assert!(sys.simulate(&bad, &[]).is_err());
    }

    #[test]
    fn unitary_similarity_recovers_conjugation() {
        let sys1 = random_selfadjoint_system(55, 2, 4);
        assert!(krylov_analysis(&sys1, 1e-10).minimal);

        // same system: U = I up to phase freedom collapses to exactly I here
        let u = unitary_similarity(&sys1, &sys1, 1e-8).unwrap().unwrap();
        assert!(opnorm(&(&u - &ComplexMatrix::identity(4))) < 1e-8);

        let mut rng = rng_from_seed(100);
        let w = random_unitary(&mut rng, 4);
        let a2 = (&(&w * &sys1.a_block()) * &w.adjoint()).hermitize();
        let b2 = &w * &sys1.b_block();
        let t2 = ComplexMatrix::block2x2(&sys1.d_block(), &b2.adjoint(), &b2, &a2);
        let sys2 = PassiveSystem::validate(t2, 2, true).unwrap();
        let u = unitary_similarity(&sys1, &sys2, 1e-8).unwrap().expect("similar");
        assert!(opnorm(&(&(&(&u * &sys1.a_block()) * &u.adjoint()) - &sys2.a_block())) < 1e-8);
        assert!(opnorm(&(&(&u * &sys1.b_block()) - &sys2.b_block())) < 1e-8);

        // different transfer functions: no unitary
        let sys3 = random_selfadjoint_system(56, 2, 4);
        assert!(unitary_similarity(&sys1, &sys3, 1e-8).unwrap().is_none());

        // non-minimal input is rejected
        let t = ComplexMatrix::from_real_rows(&[vec![0.3, 0.0], vec![0.0, 0.4]]);
        let nm = PassiveSystem::validate(t, 1, true).unwrap();
        assert!(matches!(
            unitary_similarity(&nm, &nm, 1e-8),
            Err(Error::MinimalityRequired { .. })
        ));
    }
}
