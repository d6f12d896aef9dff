//! Transform catalog with explicit realizations.
//!
//! Each map on transfer functions comes with a construction on the block
//! operator that realizes its image: the involution Phi(Omega)(z) =
//! (zI - Omega)(I - z Omega)^{-1}, the Moebius precomposition
//! Omega((z+a)/(1+az)), the post-compositions (aI + Omega)(I + a Omega)^{-1}
//! and (Omega - aI)(I - a Omega)^{-1}, the Redheffer feedback product with a
//! selfadjoint coupler, bi-inner dilations with their spectral measures, and
//! the fixed-point identities that characterize constants, inner functions,
//! and fundamental symmetries.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grids;
use crate::numkit::{
    cond2, eigh, inverse, opnorm, psd_sqrt, solve, ComplexMatrix, HermitianMatrix, COND_LIMIT,
    RTOL_DEFAULT,
};
use crate::rsclass::FIT_TOL;
use crate::systems::{
    check_resolvent_point, compressed_resolvent, krylov_analysis, CutPlanePoint, PassiveSystem,
    PASSIVITY_TOL,
};

/// Merging window for degenerate spectral atoms.
const ATOM_MERGE_TOL: f64 = 1e-10;

fn require_selfadjoint(sys: &PassiveSystem, what: &str) -> Result<()> {
    if !sys.is_selfadjoint() {
        return Err(Error::InvalidParameter(format!(
            "{what} requires a selfadjoint system"
        )));
    }
    Ok(())
}

fn check_disk_parameter(a: f64) -> Result<f64> {
    if !(a.is_finite() && a.abs() < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "parameter a = {a} must lie in (-1, 1)"
        )));
    }
    Ok(a)
}

/// Scalar Moebius map w_a(z) = (z + a)/(1 + az).
pub fn moebius_scalar(z: Complex64, a: f64) -> Complex64 {
    (z + a) / (Complex64::new(1.0, 0.0) + z * a)
}

/// w_a applied inside the cut plane; the map is an automorphism of the
/// domain for a in (-1, 1).
pub fn moebius_point(z: CutPlanePoint, a: f64) -> Result<CutPlanePoint> {
    CutPlanePoint::new(moebius_scalar(z.value(), a))
}

/// Pointwise Phi: Upsilon(z) = (zI - Omega(z))(I - z Omega(z))^{-1}.
pub fn phi_eval(sys: &PassiveSystem, z: CutPlanePoint) -> Result<ComplexMatrix> {
    let m = sys.dim_input();
    let zv = z.value();
    let omega = sys.transfer(z)?;
    let denominator = &ComplexMatrix::identity(m) - &omega.scale(zv);
    let cond = cond2(&denominator);
    if cond > COND_LIMIT {
        return Err(Error::NearSingularResolvent { cond });
    }
    let numerator = &ComplexMatrix::identity(m).scale(zv) - &omega;
    // numerator and denominator are polynomials in Omega(z), so they commute
    solve(&denominator, &numerator)
}

/// Block operator of the Phi realization on M (+) D_T:
/// [ -P_M T|_M   P_M D_T ]
/// [  D_T|_M     T       ]
/// with the state compressed onto ran D_T. Returns the operator and the
/// compressed state dimension.
pub(crate) fn phi_block(t: &ComplexMatrix, m: usize) -> Result<(ComplexMatrix, usize)> {
    let dim = t.rows();
    let gram = (&t.adjoint() * t).hermitize();
    let d_sq = &ComplexMatrix::identity(dim) - &gram;
    let d_t = psd_sqrt(&HermitianMatrix::new_unchecked(d_sq))?;
    let e = crate::blocks::embed_defect_range(&d_t)?;
    let r = e.cols();
    let d_new = t.submatrix(0, m, 0, m).scale_re(-1.0);
    let c_new = (d_t.as_matrix() * &e).submatrix(0, m, 0, r);
    let a_new = (&(&e.adjoint() * t) * &e).hermitize();
    let t_phi = ComplexMatrix::block2x2(&d_new, &c_new, &c_new.adjoint(), &a_new).hermitize();
    Ok((t_phi, r))
}

/// Realization of Phi(Omega) as a passive selfadjoint system with the same
/// input space and state space ran D_T; minimality is preserved.
pub fn phi_realize(sys: &PassiveSystem) -> Result<PassiveSystem> {
    require_selfadjoint(sys, "the Phi realization")?;
    let (t_phi, _) = phi_block(sys.matrix(), sys.dim_input())?;
    PassiveSystem::validate(t_phi, sys.dim_input(), true)
}

/// Realization of Omega((z+a)/(1+az)): feedthrough Omega(a), observation
/// sqrt(1-a^2) C (I - aF)^{-1}, main block F_a = (F - aI)(I - aF)^{-1}.
pub fn xi_realize(sys: &PassiveSystem, a: f64) -> Result<PassiveSystem> {
    require_selfadjoint(sys, "the Xi realization")?;
    let a = check_disk_parameter(a)?;
    let n = sys.dim_state();
    let f = sys.a_block();
    let inv_f = inverse(&(&ComplexMatrix::identity(n) - &f.scale_re(a)))?;
    let omega_a = sys.transfer(CutPlanePoint::new_real(a)?)?;
    let c_new = (&sys.c_block() * &inv_f).scale_re((1.0 - a * a).sqrt());
    let f_a = (&(&f - &ComplexMatrix::identity(n).scale_re(a)) * &inv_f).hermitize();
    let t = ComplexMatrix::block2x2(&omega_a.hermitize(), &c_new, &c_new.adjoint(), &f_a);
    PassiveSystem::validate(t, sys.dim_input(), true)
}

/// Operator Moebius map W_a(T) = (T + aI)(I + aT)^{-1} of a contraction;
/// fundamental symmetries are fixed points for every a.
pub fn w_a(t: &ComplexMatrix, a: f64) -> Result<ComplexMatrix> {
    let a = check_disk_parameter(a)?;
    let dim = t.rows();
    let denominator = &ComplexMatrix::identity(dim) + &t.scale_re(a);
    let numerator = t + &ComplexMatrix::identity(dim).scale_re(a);
    // right inverse: W_a(T) = (T + aI)(I + aT)^{-1}; the factors commute
    solve(&denominator, &numerator)
}

/// Realization of (Omega((z+a)/(1+az)) - aI)(I - a Omega((z+a)/(1+az)))^{-1}
/// by the block operator T_a = W_{-a}(T) = (T - aI)(I - aT)^{-1}.
pub fn operator_moebius(sys: &PassiveSystem, a: f64) -> Result<PassiveSystem> {
    require_selfadjoint(sys, "the operator Moebius realization")?;
    let a = check_disk_parameter(a)?;
    let t_a = w_a(sys.matrix(), -a)?.hermitize();
    PassiveSystem::validate(t_a, sys.dim_input(), true)
}

/// The same operator T_a assembled blockwise from the resolvent formulas:
/// ((Omega(a) - aI)(I - a Omega(a))^{-1},
///  (1-a^2)(I - a Omega(a))^{-1} C (I - aF)^{-1}; ...,
///  F_a + a(1-a^2)(I - aF)^{-1} C* (I - a Omega(a))^{-1} C (I - aF)^{-1}).
pub fn operator_moebius_blocks(sys: &PassiveSystem, a: f64) -> Result<ComplexMatrix> {
    require_selfadjoint(sys, "the operator Moebius block form")?;
    let a = check_disk_parameter(a)?;
    let m = sys.dim_input();
    let n = sys.dim_state();
    let f = sys.a_block();
    let c = sys.c_block();
    let omega_a = sys.transfer(CutPlanePoint::new_real(a)?)?;
    let inv_omega = inverse(&(&ComplexMatrix::identity(m) - &omega_a.scale_re(a)))?;
    let inv_f = inverse(&(&ComplexMatrix::identity(n) - &f.scale_re(a)))?;
    let one_minus = 1.0 - a * a;
    let d_new = &(&omega_a - &ComplexMatrix::identity(m).scale_re(a)) * &inv_omega;
    let c_new = (&(&inv_omega * &c) * &inv_f).scale_re(one_minus);
    let b_new = (&(&inv_f * &c.adjoint()) * &inv_omega).scale_re(one_minus);
    let f_a = &(&f - &ComplexMatrix::identity(n).scale_re(a)) * &inv_f;
    let correction = (&(&(&(&inv_f * &c.adjoint()) * &inv_omega) * &c) * &inv_f)
        .scale_re(a * one_minus);
    let f_new = &f_a + &correction;
    Ok(ComplexMatrix::block2x2(&d_new, &c_new, &b_new, &f_new))
}

/// Selfadjoint contractive coupler K = [K11 K12; K12* K22] over M (+) H.
#[derive(Clone, Debug)]
pub struct RedhefferCoupler {
    assembled: ComplexMatrix,
    m: usize,
    h: usize,
}

impl RedhefferCoupler {
    pub fn new(k: ComplexMatrix, m: usize) -> Result<Self> {
        if !k.is_square() {
            return Err(Error::NotSquare {
                rows: k.rows(),
                cols: k.cols(),
            });
        }
        if m > k.rows() {
            return Err(Error::DimensionMismatch {
                context: format!("outer dimension {} exceeds coupler size {}", m, k.rows()),
            });
        }
        let k = HermitianMatrix::new(k)?.into_matrix();
        let norm = opnorm(&k);
        if norm > 1.0 + PASSIVITY_TOL {
            return Err(Error::NotContraction { norm });
        }
        let h = k.rows() - m;
        Ok(Self { assembled: k, m, h })
    }

    /// The special coupler K_a = [aI, sqrt(1-a^2) I; sqrt(1-a^2) I, -aI];
    /// selfadjoint and unitary.
    pub fn k_a(a: f64, m: usize) -> Result<Self> {
        let a = check_disk_parameter(a)?;
        let s = (1.0 - a * a).sqrt();
        let k = ComplexMatrix::block2x2(
            &ComplexMatrix::identity(m).scale_re(a),
            &ComplexMatrix::identity(m).scale_re(s),
            &ComplexMatrix::identity(m).scale_re(s),
            &ComplexMatrix::identity(m).scale_re(-a),
        );
        Self::new(k, m)
    }

    pub fn dim_outer(&self) -> usize {
        self.m
    }

    pub fn dim_inner(&self) -> usize {
        self.h
    }

    pub fn assembled(&self) -> &ComplexMatrix {
        &self.assembled
    }

    pub fn k11(&self) -> ComplexMatrix {
        self.assembled.submatrix(0, self.m, 0, self.m)
    }

    pub fn k12(&self) -> ComplexMatrix {
        self.assembled.submatrix(0, self.m, self.m, self.m + self.h)
    }

    pub fn k22(&self) -> ComplexMatrix {
        self.assembled
            .submatrix(self.m, self.m + self.h, self.m, self.m + self.h)
    }
}

/// Pointwise image Theta(z) = K11 + K12 Omega(z) (I - K22 Omega(z))^{-1} K12*.
pub fn theta_eval(
    coupler: &RedhefferCoupler,
    sys: &PassiveSystem,
    z: CutPlanePoint,
) -> Result<ComplexMatrix> {
    let h = coupler.dim_inner();
    if sys.dim_input() != h {
        return Err(Error::DimensionMismatch {
            context: format!(
                "coupler inner dimension {} vs system input {}",
                h,
                sys.dim_input()
            ),
        });
    }
    let omega = sys.transfer(z)?;
    let denominator = &ComplexMatrix::identity(h) - &(&coupler.k22() * &omega);
    let cond = cond2(&denominator);
    if cond > COND_LIMIT {
        return Err(Error::NearSingularResolvent { cond });
    }
    let core = &omega * &inverse(&denominator)?;
    Ok(&coupler.k11() + &(&(&coupler.k12() * &core) * &coupler.k12().adjoint()))
}

/// Redheffer product T = K . S: feedback composition of the coupler with
/// the system operator. Feasible when ||K22|| < 1, or unconditionally when
/// the inner feedthrough vanishes (transfer(sys, 0) = 0).
pub fn redheffer(coupler: &RedhefferCoupler, sys: &PassiveSystem) -> Result<PassiveSystem> {
    let h = coupler.dim_inner();
    if sys.dim_input() != h {
        return Err(Error::DimensionMismatch {
            context: format!(
                "coupler inner dimension {} vs system input {}",
                h,
                sys.dim_input()
            ),
        });
    }
    let k22_norm = opnorm(&coupler.k22());
    let a = sys.d_block();
    if k22_norm >= 1.0 && opnorm(&a) > 1e-10 {
        return Err(Error::InfeasibleCoupler { k22_norm });
    }
    let b = sys.c_block();
    let b_star = sys.b_block();
    let g = sys.a_block();
    let k11 = coupler.k11();
    let k12 = coupler.k12();
    let k22 = coupler.k22();

    let inv_ka = inverse(&(&ComplexMatrix::identity(h) - &(&k22 * &a)))?;
    let inv_ak = inverse(&(&ComplexMatrix::identity(h) - &(&a * &k22)))?;
    let t11 = &k11 + &(&(&(&k12 * &a) * &inv_ka) * &k12.adjoint());
    let t12 = &(&k12 * &inv_ak) * &b;
    let t21 = &(&b_star * &inv_ka) * &k12.adjoint();
    let t22 = &g + &(&(&(&b_star * &k22) * &inv_ak) * &b);
    let mut t = ComplexMatrix::block2x2(&t11, &t12, &t21, &t22);
    let selfadjoint = sys.is_selfadjoint();
    if selfadjoint {
        t = t.hermitize();
    }
    PassiveSystem::validate(t, coupler.dim_outer(), selfadjoint)
}

/// Realization of (aI + Omega(z))(I + a Omega(z))^{-1} over the same state
/// space; agrees with the Redheffer product against K_a.
pub fn pi_a_realize(sys: &PassiveSystem, a: f64) -> Result<PassiveSystem> {
    require_selfadjoint(sys, "the Pi_a realization")?;
    let a = check_disk_parameter(a)?;
    let m = sys.dim_input();
    let d = sys.d_block();
    let c = sys.c_block();
    let f = sys.a_block();
    let inv_d = inverse(&(&ComplexMatrix::identity(m) + &d.scale_re(a)))?;
    let d_new = (&(&d + &ComplexMatrix::identity(m).scale_re(a)) * &inv_d).hermitize();
    let c_new = (&inv_d * &c).scale_re((1.0 - a * a).sqrt());
    let f_new = (&f - &(&(&c.adjoint() * &inv_d) * &c).scale_re(a)).hermitize();
    let t = ComplexMatrix::block2x2(&d_new, &c_new, &c_new.adjoint(), &f_new);
    PassiveSystem::validate(t, m, true)
}

/// Realization of (Omega(z) - aI)(I - a Omega(z))^{-1}: the operator
/// Moebius map applied to the Xi realization at -a.
pub fn zeta_realize(sys: &PassiveSystem, a: f64) -> Result<PassiveSystem> {
    let precomposed = xi_realize(sys, -a)?;
    operator_moebius(&precomposed, a)
}

/// The unique fixed point of Phi: Omega_0(z) = z I / (1 + sqrt(1 - z^2))
/// with the branch that equals 1 at z = 0 and is analytic on the cut plane.
pub fn omega0_eval(z: CutPlanePoint, m: usize) -> ComplexMatrix {
    let zv = z.value();
    let w = (Complex64::new(1.0, 0.0) - zv * zv).sqrt();
    ComplexMatrix::identity(m).scale(zv / (Complex64::new(1.0, 0.0) + w))
}

/// The unique fixed point of Gamma: M_0(xi) = -I / sqrt(xi^2 - 1) with the
/// branch making xi M_0(xi) -> -I at infinity.
pub fn m0_eval(xi: Complex64, m: usize) -> Result<ComplexMatrix> {
    let xi = check_resolvent_point(xi)?;
    // sqrt(xi^2 - 1) = xi sqrt(1 - 1/xi^2), principal inner root: this is
    // analytic off [-1, 1] and asymptotic to xi.
    let s = xi * (Complex64::new(1.0, 0.0) - 1.0 / (xi * xi)).sqrt();
    Ok(ComplexMatrix::identity(m).scale(-1.0 / s))
}

/// Truncated block Jacobi realization of Omega_0: state dimension N*m, the
/// first off-diagonal block is I/sqrt(2), all further ones are I/2.
pub fn jacobi_system(n_trunc: usize, m: usize) -> PassiveSystem {
    let blocks = n_trunc + 1;
    let dim = blocks * m;
    let mut t = ComplexMatrix::zeros(dim, dim);
    for k in 0..n_trunc {
        let coupling = if k == 0 {
            1.0 / 2.0_f64.sqrt()
        } else {
            0.5
        };
        for i in 0..m {
            t[(k * m + i, (k + 1) * m + i)] = Complex64::new(coupling, 0.0);
            t[((k + 1) * m + i, k * m + i)] = Complex64::new(coupling, 0.0);
        }
    }
    PassiveSystem::validate(t, m, true).expect("jacobi truncation is a selfadjoint contraction")
}

/// Bi-inner dilation data: a selfadjoint contraction A~ on the ambient
/// space M~ = M (+) ran D_T (the input space sits in the first m ambient
/// coordinates) with Omega(z) = P_M (zI + A~)(I + z A~)^{-1} |_M.
#[derive(Clone, Debug)]
pub struct InnerDilation {
    a_tilde: HermitianMatrix,
    dim_input: usize,
}

impl InnerDilation {
    pub fn a_tilde(&self) -> &HermitianMatrix {
        &self.a_tilde
    }

    pub fn dim_input(&self) -> usize {
        self.dim_input
    }

    pub fn dim_ambient(&self) -> usize {
        self.a_tilde.dim()
    }

    /// P_M (zI + A~)(I + z A~)^{-1} |_M.
    pub fn reconstruct(&self, z: CutPlanePoint) -> Result<ComplexMatrix> {
        let dim = self.dim_ambient();
        let zv = z.value();
        let at = self.a_tilde.as_matrix();
        let denominator = &ComplexMatrix::identity(dim) + &at.scale(zv);
        let numerator = &ComplexMatrix::identity(dim).scale(zv) + at;
        let x = solve(&denominator, &numerator)?;
        Ok(x.submatrix(0, self.dim_input, 0, self.dim_input))
    }

    /// Compressed resolvent of the dilation operator.
    pub fn compressed_resolvent(&self, xi: Complex64) -> Result<ComplexMatrix> {
        compressed_resolvent(&self.a_tilde, self.dim_input, xi)
    }

    /// Whether the orbit of M under A~ spans the ambient space.
    pub fn is_m_simple(&self, rtol: f64) -> bool {
        let dim = self.dim_ambient();
        let e_m = ComplexMatrix::identity(dim).submatrix(0, dim, 0, self.dim_input);
        let (rank, _) = crate::systems::krylov_span_dim(self.a_tilde.as_matrix(), &e_m, rtol);
        rank == dim
    }
}

/// Builds the bi-inner dilation A~ = -T_Phi of a minimal selfadjoint
/// system; the ambient dimension is m + rank D_T and the source is inner
/// exactly when no enlargement happens.
pub fn inner_dilate(sys: &PassiveSystem) -> Result<InnerDilation> {
    require_selfadjoint(sys, "the bi-inner dilation")?;
    if !krylov_analysis(sys, RTOL_DEFAULT).minimal {
        return Err(Error::MinimalityRequired {
            context: "the dilation construction starts from a minimal realization".into(),
        });
    }
    let (t_phi, _) = phi_block(sys.matrix(), sys.dim_input())?;
    Ok(InnerDilation {
        a_tilde: HermitianMatrix::new_unchecked(t_phi.scale_re(-1.0)),
        dim_input: sys.dim_input(),
    })
}

/// Atoms (t_j, jump_j) of the representing measure: jumps are compressions
/// of the spectral projections of A~ onto M and sum to the identity.
#[derive(Clone, Debug)]
pub struct SpectralMeasure {
    pub atoms: Vec<(f64, HermitianMatrix)>,
    dim_input: usize,
}

impl SpectralMeasure {
    pub fn dim_input(&self) -> usize {
        self.dim_input
    }

    /// Sum of all jumps; the identity up to roundoff.
    pub fn total(&self) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim_input, self.dim_input);
        for (_, jump) in &self.atoms {
            acc = &acc + jump.as_matrix();
        }
        acc
    }

    /// Omega(z) = sum_j (z + t_j)/(1 + z t_j) jump_j.
    pub fn reconstruct(&self, z: CutPlanePoint) -> ComplexMatrix {
        let zv = z.value();
        let mut acc = ComplexMatrix::zeros(self.dim_input, self.dim_input);
        for (t, jump) in &self.atoms {
            let factor = (zv + t) / (Complex64::new(1.0, 0.0) + zv * t);
            acc = &acc + &jump.as_matrix().scale(factor);
        }
        acc
    }
}

/// Extracts the spectral measure of a dilation: eigenvalues of A~ are the
/// atom locations (clamped to [-1,1], merged within the degeneracy window)
/// and the jumps are P_M P_j |_M.
pub fn spectral_measure(dil: &InnerDilation) -> SpectralMeasure {
    let m = dil.dim_input();
    let decomp = eigh(dil.a_tilde());
    let dim = dil.dim_ambient();
    let mut atoms: Vec<(f64, HermitianMatrix)> = Vec::new();
    let mut idx = 0;
    while idx < dim {
        let mut stop = idx + 1;
        while stop < dim && decomp.eigenvalues[stop] - decomp.eigenvalues[stop - 1] <= ATOM_MERGE_TOL
        {
            stop += 1;
        }
        let mut jump = ComplexMatrix::zeros(m, m);
        let mut location = 0.0;
        for k in idx..stop {
            location += decomp.eigenvalues[k];
            for i in 0..m {
                for j in 0..m {
                    jump[(i, j)] += decomp.vectors[(i, k)] * decomp.vectors[(j, k)].conj();
                }
            }
        }
        location /= (stop - idx) as f64;
        atoms.push((
            location.clamp(-1.0, 1.0),
            HermitianMatrix::new_unchecked(jump.hermitize()),
        ));
        idx = stop;
    }
    SpectralMeasure {
        atoms,
        dim_input: m,
    }
}

/// Grid verdicts for the three fixed-point identities at parameter a:
/// precomposition invariance (constants), the inner-function identity, and
/// the reflected identity solved only by fundamental symmetries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixedPointReport {
    pub xi_fixed: bool,
    pub infix_fixed: bool,
    pub cjdcyjd_fixed: bool,
}

pub fn fixed_point_tests(sys: &PassiveSystem, a: f64) -> Result<FixedPointReport> {
    require_selfadjoint(sys, "fixed-point tests")?;
    let a = check_disk_parameter(a)?;
    if a == 0.0 {
        return Err(Error::InvalidParameter(
            "fixed-point tests need a nonzero parameter".into(),
        ));
    }
    let m = sys.dim_input();
    let id = ComplexMatrix::identity(m);
    let mut xi_err: f64 = 0.0;
    let mut infix_err: f64 = 0.0;
    let mut reflected_err: f64 = 0.0;
    for z in grids::fit_grid() {
        let omega_z = sys.transfer(z)?;
        let omega_plus = sys.transfer(moebius_point(z, a)?)?;
        xi_err = xi_err.max(opnorm(&(&omega_plus - &omega_z)));

        let infix_rhs = &(&omega_plus - &id.scale_re(a))
            * &inverse(&(&id - &omega_plus.scale_re(a)))?;
        infix_err = infix_err.max(opnorm(&(&infix_rhs - &omega_z)));

        let omega_minus = sys.transfer(moebius_point(z, -a)?)?;
        let reflected_rhs = &(&omega_minus - &id.scale_re(a))
            * &inverse(&(&id - &omega_minus.scale_re(a)))?;
        reflected_err = reflected_err.max(opnorm(&(&reflected_rhs - &omega_z)));
    }
    Ok(FixedPointReport {
        xi_fixed: xi_err <= FIT_TOL,
        infix_fixed: infix_err <= FIT_TOL,
        cjdcyjd_fixed: reflected_err <= FIT_TOL,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::random_selfadjoint_system;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn flip_system() -> PassiveSystem {
        PassiveSystem::validate(
            ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]),
            1,
            true,
        )
        .unwrap()
    }

    fn zero_system() -> PassiveSystem {
        PassiveSystem::validate(ComplexMatrix::zeros(1, 1), 1, true).unwrap()
    }

    fn inner_scalar_system(d: f64) -> PassiveSystem {
        let df = (1.0 - d * d).sqrt();
        let t = ComplexMatrix::from_real_rows(&[vec![d, df], vec![df, -d]]);
        PassiveSystem::validate(t, 1, true).unwrap()
    }

    fn transfer_match(a: &PassiveSystem, b: &PassiveSystem) -> f64 {
        let mut worst: f64 = 0.0;
        for z in grids::probe_16() {
            let wa = a.transfer(z).unwrap();
            let wb = b.transfer(z).unwrap();
            worst = worst.max(opnorm(&(&wa - &wb)));
        }
        worst
    }

    #[test]
    fn phi_eval_closed_forms() {
        // Omega = 0: Upsilon(z) = z
        let z = CutPlanePoint::new(c(0.3, 0.5)).unwrap();
        let u = phi_eval(&zero_system(), z).unwrap();
        assert!((u[(0, 0)] - c(0.3, 0.5)).norm() < 1e-14);

        // Omega(z) = z: Upsilon = 0
        let u = phi_eval(&flip_system(), z).unwrap();
        assert!(u.max_abs() < 1e-14);

        // inner with D = 0.3: Upsilon = -0.3
        let sys = inner_scalar_system(0.3);
        for z in grids::fit_grid().into_iter().take(5) {
            let u = phi_eval(&sys, z).unwrap();
            assert!((u[(0, 0)] - c(-0.3, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn phi_realize_matches_eval_and_preserves_minimality() {
        // stateless zero: T_Phi is the flip operator, transfer z
        let realized = phi_realize(&zero_system()).unwrap();
        let flip = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert!((realized.matrix() - &flip).frobenius() < 1e-12);

        // unitary source: rank D_T = 0, stateless output -D
        let realized = phi_realize(&inner_scalar_system(0.3)).unwrap();
        assert_eq!(realized.dim_state(), 0);
        assert!((realized.d_block()[(0, 0)].re + 0.3).abs() < 1e-12);

        let sys = random_selfadjoint_system(1000, 2, 4);
        let realized = phi_realize(&sys).unwrap();
        for z in grids::probe_16() {
            let via_realization = realized.transfer(z).unwrap();
            let via_eval = phi_eval(&sys, z).unwrap();
            assert!(opnorm(&(&via_realization - &via_eval)) < 1e-9);
        }
        assert!(krylov_analysis(&realized, RTOL_DEFAULT).minimal);

        // involution: Phi(Phi(s)) has the original transfer function
        let twice = phi_realize(&realized).unwrap();
        assert!(transfer_match(&twice, &sys) < 1e-9);
    }

    #[test]
    fn xi_realize_values_and_composition() {
        // a = 0 leaves the blocks unchanged
        let sys = random_selfadjoint_system(1001, 2, 3);
        let same = xi_realize(&sys, 0.0).unwrap();
        assert!((sys.matrix() - same.matrix()).frobenius() < 1e-12);

        // flip system precomposed: transfer (z+a)/(1+az)
        let shifted = xi_realize(&flip_system(), 0.5).unwrap();
        let z = CutPlanePoint::new(c(0.0, 1.0)).unwrap();
        let w = shifted.transfer(z).unwrap();
        let expect = moebius_scalar(c(0.0, 1.0), 0.5);
        assert!((w[(0, 0)] - expect).norm() < 1e-12);

        // composition law with c = (a+b)/(1+ab)
        let a = 0.5;
        let b = 0.5;
        let cc = (a + b) / (1.0 + a * b);
        let double = xi_realize(&xi_realize(&sys, a).unwrap(), b).unwrap();
        let direct = xi_realize(&sys, cc).unwrap();
        assert!(transfer_match(&double, &direct) < 1e-9);
        assert!((cc - 0.8).abs() < 1e-15);

        // minimality preserved
        assert!(krylov_analysis(&xi_realize(&sys, 0.4).unwrap(), RTOL_DEFAULT).minimal);
    }

    #[test]
    fn w_a_fixes_fundamental_symmetry() {
        let j = ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
        for &a in &[-0.7, -0.3, 0.3, 0.7] {
            let image = w_a(&j, a).unwrap();
            assert!((&image - &j).frobenius() < 1e-12);
        }
        // W_a and W_{-a} invert each other
        let sys = random_selfadjoint_system(1002, 2, 3);
        let t = sys.matrix();
        let back = w_a(&w_a(t, 0.4).unwrap(), -0.4).unwrap();
        assert!(opnorm(&(&back - t)) < 1e-10);
    }

    #[test]
    fn operator_moebius_transfer_and_blocks() {
        // scalar T = 0, a = 0.5: T_a = -0.5
        let t_a = operator_moebius(&zero_system(), 0.5).unwrap();
        assert!((t_a.matrix()[(0, 0)].re + 0.5).abs() < 1e-14);

        let sys = random_selfadjoint_system(1003, 2, 4);
        let a = 0.4;
        let eta = operator_moebius(&sys, a).unwrap();
        for z in grids::disk_grid() {
            let lhs = eta.transfer(z).unwrap();
            let omega_w = sys.transfer(moebius_point(z, a).unwrap()).unwrap();
            let id = ComplexMatrix::identity(2);
            let rhs = &(&omega_w - &id.scale_re(a))
                * &inverse(&(&id - &omega_w.scale_re(a))).unwrap();
            assert!(opnorm(&(&lhs - &rhs)) < 1e-9);
        }
        // block form agrees with the direct resolvent computation
        let blocks = operator_moebius_blocks(&sys, a).unwrap();
        assert!(opnorm(&(&blocks - eta.matrix())) < 1e-10);
    }

    #[test]
    fn redheffer_identity_coupler_and_k_a() {
        let sys = random_selfadjoint_system(1004, 2, 3);
        // identity coupler: K11 = 0, K12 = I, K22 = 0
        let k = ComplexMatrix::block2x2(
            &ComplexMatrix::zeros(2, 2),
            &ComplexMatrix::identity(2),
            &ComplexMatrix::identity(2),
            &ComplexMatrix::zeros(2, 2),
        );
        let coupler = RedhefferCoupler::new(k, 2).unwrap();
        let out = redheffer(&coupler, &sys).unwrap();
        assert!((out.matrix() - sys.matrix()).frobenius() < 1e-12);

        // K_a on Omega(z) = z at z = 0: Theta(0) = a
        let coupler = RedhefferCoupler::k_a(0.3, 1).unwrap();
        let out = redheffer(&coupler, &flip_system()).unwrap();
        let at_zero = out
            .transfer(CutPlanePoint::new_real(0.0).unwrap())
            .unwrap();
        assert!((at_zero[(0, 0)].re - 0.3).abs() < 1e-12);
    }

    #[test]
    fn redheffer_matches_theta_and_contracts() {
        let mut rng = crate::seeded::rng_from_seed(60);
        for trial in 0..10 {
            let sys = random_selfadjoint_system(2000 + trial, 2, 3);
            let k = crate::seeded::random_hermitian_contraction(&mut rng, 4);
            let coupler = RedhefferCoupler::new(k.into_matrix(), 2).unwrap();
            let out = redheffer(&coupler, &sys).unwrap();
            assert!(opnorm(out.matrix()) <= 1.0 + 1e-9);
            for z in grids::disk_grid().into_iter().take(4) {
                let via_product = out.transfer(z).unwrap();
                let via_theta = theta_eval(&coupler, &sys, z).unwrap();
                assert!(opnorm(&(&via_product - &via_theta)) < 1e-9, "trial {trial}");
            }
        }
    }

    #[test]
    fn redheffer_feasibility_cases() {
        // ||K22|| = 1 with nonzero Omega(0): infeasible
        let k = ComplexMatrix::block2x2(
            &ComplexMatrix::zeros(1, 1),
            &ComplexMatrix::zeros(1, 1),
            &ComplexMatrix::zeros(1, 1),
            &ComplexMatrix::identity(1),
        );
        let coupler = RedhefferCoupler::new(k, 1).unwrap();
        let constant =
            PassiveSystem::validate(ComplexMatrix::from_real_rows(&[vec![0.4]]), 1, true).unwrap();
        assert!(matches!(
            redheffer(&coupler, &constant),
            Err(Error::InfeasibleCoupler { .. })
        ));
        // but acceptable when Omega(0) = 0
        assert!(redheffer(&coupler, &flip_system()).is_ok());
    }

    #[test]
    fn redheffer_intrav_identity() {
        // K_{-a} . V_a(T) = T_a entrywise
        for &a in &[0.3, -0.3, 0.7, -0.7] {
            let sys = random_selfadjoint_system(1005, 2, 3);
            let xi_sys = xi_realize(&sys, a).unwrap();
            let coupler = RedhefferCoupler::k_a(-a, 2).unwrap();
            let lhs = redheffer(&coupler, &xi_sys).unwrap();
            let rhs = operator_moebius(&sys, a).unwrap();
            assert!(opnorm(&(lhs.matrix() - rhs.matrix())) < 1e-10, "a = {a}");
        }
    }

    #[test]
    fn pi_a_realize_matches_redheffer_and_inverts_zeta() {
        let sys = random_selfadjoint_system(1006, 2, 4);
        let same = pi_a_realize(&sys, 0.0).unwrap();
        assert!((sys.matrix() - same.matrix()).frobenius() < 1e-12);

        let a = 0.5;
        let hat = pi_a_realize(&flip_system(), a).unwrap();
        let at_zero = hat.transfer(CutPlanePoint::new_real(0.0).unwrap()).unwrap();
        assert!((at_zero[(0, 0)].re - 0.5).abs() < 1e-12);

        let via_pi = pi_a_realize(&sys, a).unwrap();
        let coupler = RedhefferCoupler::k_a(a, 2).unwrap();
        let via_red = redheffer(&coupler, &sys).unwrap();
        assert!(transfer_match(&via_pi, &via_red) < 1e-9);

        // zeta then pi recovers the original transfer
        let zeta = zeta_realize(&sys, a).unwrap();
        let back = pi_a_realize(&zeta, a).unwrap();
        assert!(transfer_match(&back, &sys) < 1e-9);
        assert!(krylov_analysis(&zeta, RTOL_DEFAULT).minimal);

        // zeta at zero is the identity transform
        let z0 = zeta_realize(&sys, 0.0).unwrap();
        assert!(transfer_match(&z0, &sys) < 1e-11);
        // scalar check: Omega(z) = z, a = 0.5, z = 0 -> -0.5
        let zf = zeta_realize(&flip_system(), 0.5).unwrap();
        let v = zf.transfer(CutPlanePoint::new_real(0.0).unwrap()).unwrap();
        assert!((v[(0, 0)].re + 0.5).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_closed_forms() {
        // Omega_0(i) = i/(1 + sqrt 2)
        let zi = CutPlanePoint::new(c(0.0, 1.0)).unwrap();
        let om = omega0_eval(zi, 1);
        let expect = c(0.0, 1.0 / (1.0 + 2.0_f64.sqrt()));
        assert!((om[(0, 0)] - expect).norm() < 1e-15);

        // M_0(i) = i/sqrt 2
        let m0 = m0_eval(c(0.0, 1.0), 1).unwrap();
        assert!((m0[(0, 0)] - c(0.0, 1.0 / 2.0_f64.sqrt())).norm() < 1e-15);

        // branch symmetry M_0(conj(xi)) = M_0(xi)* and asymptotics
        let m_minus = m0_eval(c(0.0, -1.0), 1).unwrap();
        assert!((m_minus[(0, 0)] - m0[(0, 0)].conj()).norm() < 1e-15);
        let far = c(0.0, 1e8);
        let m_far = m0_eval(far, 1).unwrap();
        assert!((m_far[(0, 0)] * far + 1.0).norm() < 1e-8);
    }

    #[test]
    fn omega0_is_phi_fixed_point() {
        for z in grids::fit_grid().into_iter().take(6) {
            let zv = z.value();
            let om = omega0_eval(z, 1)[(0, 0)];
            let phi = (zv - om) / (c(1.0, 0.0) - zv * om);
            assert!((phi - om).norm() < 1e-12);
        }
    }

    #[test]
    fn jacobi_entries_and_low_order_transfer() {
        let sys = jacobi_system(4, 1);
        let t = sys.matrix();
        assert!((t[(0, 1)].re - 1.0 / 2.0_f64.sqrt()).abs() < 1e-15);
        assert!((t[(1, 2)].re - 0.5).abs() < 1e-15);
        assert_eq!(t[(0, 2)], c(0.0, 0.0));
        assert!(krylov_analysis(&sys, RTOL_DEFAULT).minimal);

        // N = 1: transfer z/2
        let one = jacobi_system(1, 1);
        let z = CutPlanePoint::new(c(0.0, 0.5)).unwrap();
        let w = one.transfer(z).unwrap();
        assert!((w[(0, 0)] - c(0.0, 0.25)).norm() < 1e-14);

        // block version carries identity blocks
        let sys = jacobi_system(2, 2);
        assert_eq!(sys.dim_state(), 4);
        assert!((sys.matrix()[(0, 2)].re - 1.0 / 2.0_f64.sqrt()).abs() < 1e-15);
        assert_eq!(sys.matrix()[(0, 3)], c(0.0, 0.0));
    }

    #[test]
    fn jacobi_transfer_converges_to_omega0() {
        let z = CutPlanePoint::new(c(0.0, 0.5)).unwrap();
        let target = omega0_eval(z, 1)[(0, 0)];
        let mut prev = f64::INFINITY;
        for n in [1usize, 2, 4, 8] {
            let sys = jacobi_system(n, 1);
            let w = sys.transfer(z).unwrap()[(0, 0)];
            let err = (w - target).norm();
            assert!(err < prev, "error not decreasing at N = {n}");
            prev = err;
        }
        assert!(prev < 1e-8);
    }

    #[test]
    fn dilation_reconstructs_and_detects_inner() {
        // unitary source: ambient space is M itself and A~ = -(-D) = D... the
        // dilation of an inner function adds nothing
        let dil = inner_dilate(&inner_scalar_system(0.3)).unwrap();
        assert_eq!(dil.dim_ambient(), 1);

        // flip system (inner): ambient = input space
        let dil = inner_dilate(&flip_system()).unwrap();
        assert_eq!(dil.dim_ambient(), 1);
        assert!((dil.a_tilde().as_matrix()[(0, 0)]).norm() < 1e-12);

        // Omega = 0: ambient dimension 2 and A~ = [[0,-1],[-1,0]]
        let dil = inner_dilate(&zero_system()).unwrap();
        assert_eq!(dil.dim_ambient(), 2);
        let expect = ComplexMatrix::from_real_rows(&[vec![0.0, -1.0], vec![-1.0, 0.0]]);
        assert!((dil.a_tilde().as_matrix() - &expect).frobenius() < 1e-12);
        for z in grids::fit_grid().into_iter().take(4) {
            assert!(dil.reconstruct(z).unwrap().max_abs() < 1e-12);
        }

        let sys = random_selfadjoint_system(1007, 2, 4);
        let dil = inner_dilate(&sys).unwrap();
        assert!(dil.is_m_simple(RTOL_DEFAULT));
        for z in grids::probe_16() {
            let direct = sys.transfer(z).unwrap();
            let via_dil = dil.reconstruct(z).unwrap();
            assert!(opnorm(&(&direct - &via_dil)) < 1e-9);
        }

        // non-minimal input rejected
        let t = ComplexMatrix::from_real_rows(&[vec![0.3, 0.0], vec![0.0, 0.4]]);
        let nm = PassiveSystem::validate(t, 1, true).unwrap();
        assert!(matches!(
            inner_dilate(&nm),
            Err(Error::MinimalityRequired { .. })
        ));
    }

    #[test]
    fn spectral_measure_atoms_and_reconstruction() {
        // Omega(z) = z: single atom (0, I)
        let measure = spectral_measure(&inner_dilate(&flip_system()).unwrap());
        assert_eq!(measure.atoms.len(), 1);
        assert!((measure.atoms[0].0).abs() < 1e-12);
        assert!((measure.atoms[0].1.as_matrix()[(0, 0)].re - 1.0).abs() < 1e-12);

        // Omega = 0: atoms (-1, 1/2) and (1, 1/2)
        let measure = spectral_measure(&inner_dilate(&zero_system()).unwrap());
        assert_eq!(measure.atoms.len(), 2);
        assert!((measure.atoms[0].0 + 1.0).abs() < 1e-10);
        assert!((measure.atoms[1].0 - 1.0).abs() < 1e-10);
        assert!((measure.atoms[0].1.as_matrix()[(0, 0)].re - 0.5).abs() < 1e-10);
        assert!((measure.atoms[1].1.as_matrix()[(0, 0)].re - 0.5).abs() < 1e-10);

        let sys = random_selfadjoint_system(1008, 2, 4);
        let measure = spectral_measure(&inner_dilate(&sys).unwrap());
        let id = ComplexMatrix::identity(2);
        assert!(opnorm(&(&measure.total() - &id)) < 1e-9);
        for (t, jump) in &measure.atoms {
            assert!(*t >= -1.0 && *t <= 1.0);
            assert!(crate::numkit::min_eig(jump) > -1e-10);
        }
        for z in grids::probe_16() {
            let direct = sys.transfer(z).unwrap();
            let via_measure = measure.reconstruct(z);
            assert!(opnorm(&(&direct - &via_measure)) < 1e-9);
        }
    }

    #[test]
    fn fixed_point_reports() {
        // constant 0.4: xi-invariant only
        let constant =
            PassiveSystem::validate(ComplexMatrix::from_real_rows(&[vec![0.4]]), 1, true).unwrap();
        let report = fixed_point_tests(&constant, 0.5).unwrap();
        assert_eq!(
            report,
            FixedPointReport {
                xi_fixed: true,
                infix_fixed: false,
                cjdcyjd_fixed: false
            }
        );

        // Omega(z) = z with a = 1/2: inner identity only
        let report = fixed_point_tests(&flip_system(), 0.5).unwrap();
        assert_eq!(
            report,
            FixedPointReport {
                xi_fixed: false,
                infix_fixed: true,
                cjdcyjd_fixed: false
            }
        );

        // constant fundamental symmetry: all three identities hold
        let j = PassiveSystem::validate(
            ComplexMatrix::from_real_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]),
            2,
            true,
        )
        .unwrap();
        let report = fixed_point_tests(&j, 0.5).unwrap();
        assert_eq!(
            report,
            FixedPointReport {
                xi_fixed: true,
                infix_fixed: true,
                cjdcyjd_fixed: true
            }
        );

        assert!(fixed_point_tests(&constant, 0.0).is_err());
    }

    #[test]
    fn commutation_u_phi_equals_gamma_u() {
        use crate::rsclass::{gamma_transform, to_nfunction};
        let sys = random_selfadjoint_system(1009, 2, 3);
        let phi_sys = phi_realize(&sys).unwrap();
        let nf_phi = to_nfunction(&phi_sys).unwrap();
        let nf = to_nfunction(&sys).unwrap();
        for xi in grids::xi_grid() {
            let lhs = nf_phi.eval(xi).unwrap();
            let rhs = gamma_transform(&nf, xi).unwrap();
            assert!(opnorm(&(&lhs - &rhs)) < 1e-9);
        }
    }
}
