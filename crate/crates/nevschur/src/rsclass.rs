//! Class analytics for transfer functions of passive selfadjoint systems:
//! the characteristic function of the state block, Pick-type kernels and
//! sampled certificates, strong limit values, the Moebius representation,
//! inner-function detection, and the compressed-resolvent bridge between
//! transfer functions and Nevanlinna functions off [-1, 1].

use num_complex::Complex64;

use crate::blocks::{extract_ky, extract_nx, KYParam};
use crate::error::{Error, Result};
use crate::grids;
use crate::numkit::{
    cond2, inverse, min_eig, opnorm, pinv, psd_sqrt, solve, ComplexMatrix,
    HermitianMatrix, COND_LIMIT, RTOL_DEFAULT,
};
use crate::systems::{
    check_resolvent_point, compressed_resolvent, krylov_analysis, CutPlanePoint, PassiveSystem,
    PASSIVITY_TOL,
};

/// PSD slack scale for certificate verdicts.
pub const CERT_PSD_TOL: f64 = 1e-8;
/// Norm slack for the disk bound in certificates.
pub const CERT_NORM_TOL: f64 = 1e-9;
/// Residual threshold for boolean fit reports.
pub const FIT_TOL: f64 = 1e-8;

/// Characteristic function of a selfadjoint contraction F, evaluated on the
/// defect-range coordinates: Delta_F(z) = (zI - F)(I - zF)^{-1} |_{D_F}.
pub fn characteristic_fn(f: &HermitianMatrix, z: CutPlanePoint) -> Result<ComplexMatrix> {
    let norm = opnorm(f.as_matrix());
    if norm > 1.0 + PASSIVITY_TOL {
        return Err(Error::NotContraction { norm });
    }
    let n = f.dim();
    let zv = z.value();
    let d_sq = &ComplexMatrix::identity(n) - &(f.as_matrix() * f.as_matrix()).hermitize();
    let d_f = psd_sqrt(&HermitianMatrix::new_unchecked(d_sq))?;
    let e = crate::blocks::embed_defect_range(&d_f)?;
    let numerator = &ComplexMatrix::identity(n).scale(zv) - f.as_matrix();
    let denominator = &ComplexMatrix::identity(n) - &f.as_matrix().scale(zv);
    // zI - F and (I - zF)^{-1} commute, both being functions of F.
    let delta = solve(&denominator, &numerator)?;
    Ok(&(&e.adjoint() * &delta) * &e)
}

/// Pick-type kernel
/// K(z,w) = I - Omega*(w) Omega(z) - (1 - conj(w) z)/(z - conj(w)) (Omega(z) - Omega*(w)).
pub fn pick_kernel(
    sys: &PassiveSystem,
    z: CutPlanePoint,
    w: CutPlanePoint,
) -> Result<ComplexMatrix> {
    let zv = z.value();
    let wv = w.value();
    if (zv - wv.conj()).norm() < 1e-14 {
        return Err(Error::InvalidParameter(
            "pick kernel pole: z equals conj(w)".into(),
        ));
    }
    let m = sys.dim_input();
    let omega_z = sys.transfer(z)?;
    let omega_w_star = sys.transfer(w)?.adjoint();
    let factor = (Complex64::new(1.0, 0.0) - wv.conj() * zv) / (zv - wv.conj());
    Ok(&(&ComplexMatrix::identity(m) - &(&omega_w_star * &omega_z))
        - &(&omega_z - &omega_w_star).scale(factor))
}

/// Sampling layout for certificates; the default follows the fixed grids.
#[derive(Clone, Debug)]
pub struct CertificateGrid {
    pub upper: Vec<CutPlanePoint>,
    pub lower: Vec<CutPlanePoint>,
    pub disk: Vec<CutPlanePoint>,
}

impl Default for CertificateGrid {
    fn default() -> Self {
        let (upper, lower) = grids::certificate_grid();
        Self {
            upper,
            lower,
            disk: grids::disk_grid(),
        }
    }
}

/// Sampled positive-semidefiniteness report. The verdict is grid-relative
/// evidence, not a decision procedure.
#[derive(Clone, Debug)]
pub struct RSCertificate {
    pub grid: CertificateGrid,
    pub min_kernel_eig: f64,
    pub min_inequality_eig: f64,
    pub schur_norm_max: f64,
    pub tol_psd: f64,
    pub tol_norm: f64,
    pub verdict: bool,
}

fn kernel_gram_min_eig(
    sys: &PassiveSystem,
    points: &[CutPlanePoint],
    max_block_norm: &mut f64,
) -> Result<f64> {
    let m = sys.dim_input();
    let p = points.len();
    let mut gram = ComplexMatrix::zeros(m * p, m * p);
    for (l, &zl) in points.iter().enumerate() {
        for (k, &zk) in points.iter().enumerate() {
            let block = pick_kernel(sys, zk, zl)?;
            *max_block_norm = max_block_norm.max(opnorm(&block));
            for i in 0..m {
                for j in 0..m {
                    gram[(l * m + i, k * m + j)] = block[(i, j)];
                }
            }
        }
    }
    let gram = HermitianMatrix::new_unchecked(gram.hermitize());
    Ok(min_eig(&gram))
}

/// Evaluates the two positivity statements and the disk norm bound on the
/// sampling grid. A valid passive selfadjoint system must pass; the failure
/// verdict is data, not an error, so evaluation breakdowns on deliberately
/// invalid inputs are folded into a failing certificate.
pub fn certify_rs(sys: &PassiveSystem, grid: CertificateGrid) -> RSCertificate {
    let m = sys.dim_input();
    let mut max_block_norm: f64 = 0.0;
    let mut eval_failed = false;

    let mut min_kernel = f64::INFINITY;
    for points in [&grid.upper, &grid.lower] {
        match kernel_gram_min_eig(sys, points, &mut max_block_norm) {
            Ok(e) => min_kernel = min_kernel.min(e),
            Err(_) => eval_failed = true,
        }
    }

    let mut min_ineq = f64::INFINITY;
    for z in grid.upper.iter().chain(grid.lower.iter()) {
        let zv = z.value();
        if zv.im == 0.0 {
            continue;
        }
        match sys.transfer(*z) {
            Ok(om) => {
                let im_om = (&om - &om.adjoint()).scale(Complex64::new(0.0, -0.5));
                let w = &(&ComplexMatrix::identity(m) - &(&om.adjoint() * &om))
                    - &im_om.scale_re((1.0 - zv.norm_sqr()) / zv.im);
                max_block_norm = max_block_norm.max(opnorm(&w));
                min_ineq = min_ineq.min(min_eig(&HermitianMatrix::new_unchecked(w.hermitize())));
            }
            Err(_) => eval_failed = true,
        }
    }

    let mut schur_norm_max: f64 = 0.0;
    for z in &grid.disk {
        match sys.transfer(*z) {
            Ok(om) => schur_norm_max = schur_norm_max.max(opnorm(&om)),
            Err(_) => eval_failed = true,
        }
    }

    let tol_psd = CERT_PSD_TOL * 1.0_f64.max(max_block_norm);
    let verdict = !eval_failed
        && min_kernel >= -tol_psd
        && min_ineq >= -tol_psd
        && schur_norm_max <= 1.0 + CERT_NORM_TOL;
    RSCertificate {
        grid,
        min_kernel_eig: if eval_failed { f64::NEG_INFINITY } else { min_kernel },
        min_inequality_eig: if eval_failed { f64::NEG_INFINITY } else { min_ineq },
        schur_norm_max,
        tol_psd,
        tol_norm: CERT_NORM_TOL,
        verdict,
    }
}

/// Strong limit values Omega(-1) = -KK* + D_{K*} Y D_{K*} and
/// Omega(1) = KK* + D_{K*} Y D_{K*}, computed from the parametrization
/// rather than by numerical limiting.
#[derive(Clone, Debug)]
pub struct LimitValues {
    pub minus: HermitianMatrix,
    pub plus: HermitianMatrix,
}

pub fn limit_values(p: &KYParam) -> LimitValues {
    let kk = p.kk_star();
    let y_term = p.y_ambient_term();
    LimitValues {
        minus: HermitianMatrix::new_unchecked(&y_term - &kk),
        plus: HermitianMatrix::new_unchecked(&y_term + &kk),
    }
}

/// Moebius representation Omega(z) = Omega(0) + D Lambda(z) (I +
/// Omega(0) Lambda(z))^{-1} D with D = D_{Omega(0)} and Lambda realized as
/// the transfer function of the system [0 N*; N F^] on D_{Omega(0)} (+) K.
#[derive(Clone, Debug)]
pub struct MoebiusRep {
    omega0: HermitianMatrix,
    d_omega0: HermitianMatrix,
    /// m x r embedding of ran D_{Omega(0)}.
    embed: ComplexMatrix,
    lambda_system: PassiveSystem,
}

impl MoebiusRep {
    pub fn omega0(&self) -> &HermitianMatrix {
        &self.omega0
    }

    pub fn lambda_system(&self) -> &PassiveSystem {
        &self.lambda_system
    }

    /// Lambda(z) at intrinsic defect dimension.
    pub fn lambda(&self, z: CutPlanePoint) -> Result<ComplexMatrix> {
        self.lambda_system.transfer(z)
    }

    /// Lambda(z) carried to the ambient input space.
    pub fn lambda_ambient(&self, z: CutPlanePoint) -> Result<ComplexMatrix> {
        let lam = self.lambda(z)?;
        Ok(&(&self.embed * &lam) * &self.embed.adjoint())
    }

    /// Reassembles Omega(z) from the representation.
    pub fn reconstruct(&self, z: CutPlanePoint) -> Result<ComplexMatrix> {
        let m = self.omega0.dim();
        let lam = self.lambda_ambient(z)?;
        let w = &ComplexMatrix::identity(m) + &(self.omega0.as_matrix() * &lam);
        let core = &lam * &inverse(&w)?;
        Ok(self.omega0.as_matrix()
            + &(&(self.d_omega0.as_matrix() * &core) * self.d_omega0.as_matrix()))
    }
}

/// Builds the Moebius representation and verifies the reconstruction on the
/// fit grid.
pub fn moebius_rep(sys: &PassiveSystem) -> Result<MoebiusRep> {
    let nx = extract_nx(sys)?;
    let omega0 = nx.d().clone();
    let m = omega0.dim();
    let d_sq = &ComplexMatrix::identity(m)
        - &(omega0.as_matrix() * omega0.as_matrix()).hermitize();
    let d_omega0 = psd_sqrt(&HermitianMatrix::new_unchecked(d_sq))?;
    let embed = nx.d_embed().clone();
    let r = embed.cols();
    let n_op = nx.n_op().clone();
    let t_lambda = ComplexMatrix::block2x2(
        &ComplexMatrix::zeros(r, r),
        &n_op.adjoint(),
        &n_op,
        nx.fhat().as_matrix(),
    );
    let lambda_system = PassiveSystem::validate(t_lambda, r, true)?;
    let rep = MoebiusRep {
        omega0,
        d_omega0,
        embed,
        lambda_system,
    };
    let mut worst: f64 = 0.0;
    for z in grids::fit_grid() {
        let direct = sys.transfer(z)?;
        let recon = rep.reconstruct(z)?;
        worst = worst.max(opnorm(&(&direct - &recon)));
    }
    if worst > FIT_TOL {
        return Err(Error::ReconstructionFailed {
            residual: worst,
            limit: FIT_TOL,
        });
    }
    Ok(rep)
}

/// Independent route to Lambda(z) through the Moore-Penrose inverse:
/// Lambda = D^+ (Omega(z) - Omega(0)) (I - Omega(0) Omega(z))^{-1} D.
pub fn lambda_via_pinv(sys: &PassiveSystem, z: CutPlanePoint) -> Result<ComplexMatrix> {
    let m = sys.dim_input();
    let omega0 = sys.d_block();
    let d_sq = &ComplexMatrix::identity(m) - &(&omega0 * &omega0).hermitize();
    let d = psd_sqrt(&HermitianMatrix::new_unchecked(d_sq))?;
    let omega_z = sys.transfer(z)?;
    let w = &ComplexMatrix::identity(m) - &(&omega0 * &omega_z);
    let core = &(&omega_z - &omega0) * &inverse(&w)?;
    Ok(&(&pinv(d.as_matrix(), RTOL_DEFAULT) * &core) * d.as_matrix())
}

/// Evaluates the canonical inner form (zI + D)(I + zD)^{-1} for a
/// selfadjoint contraction D; the two factors commute.
pub fn inner_form(d: &ComplexMatrix, z: CutPlanePoint) -> Result<ComplexMatrix> {
    let m = d.rows();
    let zv = z.value();
    let numerator = &ComplexMatrix::identity(m).scale(zv) + d;
    let denominator = &ComplexMatrix::identity(m) + &d.scale(zv);
    solve(&denominator, &numerator)
}

/// Outcome of the inner-function battery on a minimal selfadjoint system.
///
/// `neuvaa` reports the three equivalent statements about the limit values:
/// (i) Omega(+-1)^2 = I, (ii) the midpoint/difference identities, (iii) K a
/// partial isometry with Y^2 = I on its defect. `thinne_at_a` probes the
/// single-point sufficiency test at a = 1/2.
#[derive(Clone, Debug)]
pub struct InnerReport {
    pub is_inner: bool,
    pub d_fit: Option<HermitianMatrix>,
    pub fit_residual: f64,
    pub neuvaa: [bool; 3],
    pub thinne_at_a: bool,
}

pub fn inner_test(sys: &PassiveSystem) -> Result<InnerReport> {
    if !krylov_analysis(sys, RTOL_DEFAULT).minimal {
        return Err(Error::MinimalityRequired {
            context: "inner detection is decided on minimal systems".into(),
        });
    }
    let m = sys.dim_input();
    let d = sys.d_block();

    let mut fit_residual: f64 = 0.0;
    for z in grids::fit_grid() {
        let direct = sys.transfer(z)?;
        let form = inner_form(&d, z)?;
        fit_residual = fit_residual.max(opnorm(&(&direct - &form)));
    }
    let is_inner = fit_residual <= FIT_TOL;

    let ky = extract_ky(sys)?;
    let lv = limit_values(&ky);
    let id = ComplexMatrix::identity(m);
    let sq = |h: &HermitianMatrix| (h.as_matrix() * h.as_matrix()).hermitize();
    let n1 = opnorm(&(&sq(&lv.plus) - &id)) <= FIT_TOL && opnorm(&(&sq(&lv.minus) - &id)) <= FIT_TOL;

    let p_half = (lv.plus.as_matrix() - lv.minus.as_matrix()).scale_re(0.5);
    let q_half = (lv.plus.as_matrix() + lv.minus.as_matrix()).scale_re(0.5);
    let n2 = opnorm(&(&(&p_half * &p_half) - &p_half)) <= FIT_TOL
        && opnorm(&(&(&q_half * &q_half) - &(&id - &p_half))) <= FIT_TOL;

    let kk = (&ky.k().adjoint() * ky.k()).hermitize();
    let s = ky.y().dim();
    let n3 = opnorm(&(&(&kk * &kk) - &kk)) <= FIT_TOL
        && opnorm(&(&(ky.y().as_matrix() * ky.y().as_matrix()) - &ComplexMatrix::identity(s)))
            <= FIT_TOL;

    let a = 0.5;
    let omega_a = sys.transfer(CutPlanePoint::new_real(a)?)?;
    let lhs = &(&omega_a - &id.scale_re(a))
        * &inverse(&(&id - &omega_a.scale_re(a)))?;
    let thinne = opnorm(&(&lhs - &d)) <= FIT_TOL;

    Ok(InnerReport {
        is_inner,
        d_fit: if is_inner {
            Some(HermitianMatrix::new_unchecked(d))
        } else {
            None
        },
        fit_residual,
        neuvaa: [n1, n2, n3],
        thinne_at_a: thinne,
    })
}

/// A Nevanlinna function of the class holomorphic off [-1, 1] with
/// xi M(xi) -> -I, carried by its realizing selfadjoint contraction:
/// M(xi) = P_M (T - xi)^{-1} |_M.
#[derive(Clone, Debug)]
pub struct NFunction {
    t: HermitianMatrix,
    m: usize,
}

impl NFunction {
    pub fn new(t: HermitianMatrix, m: usize) -> Result<Self> {
        let norm = opnorm(t.as_matrix());
        if norm > 1.0 + PASSIVITY_TOL {
            return Err(Error::NotContraction { norm });
        }
        if m > t.dim() {
            return Err(Error::DimensionMismatch {
                context: format!("compression rank {} exceeds dimension {}", m, t.dim()),
            });
        }
        Ok(Self { t, m })
    }

    pub fn backing(&self) -> &HermitianMatrix {
        &self.t
    }

    pub fn dim_input(&self) -> usize {
        self.m
    }

    pub fn eval(&self, xi: Complex64) -> Result<ComplexMatrix> {
        compressed_resolvent(&self.t, self.m, xi)
    }
}

/// The transform U: a selfadjoint system realizes M(xi) = (Omega(1/xi) -
/// xi)^{-1} as the compressed resolvent of the very same operator T.
pub fn to_nfunction(sys: &PassiveSystem) -> Result<NFunction> {
    if !sys.is_selfadjoint() {
        return Err(Error::InvalidParameter(
            "compressed resolvents require a selfadjoint system".into(),
        ));
    }
    NFunction::new(sys.to_hermitian()?, sys.dim_input())
}

/// The inverse transform U^{-1}: Omega(z) = M(1/z)^{-1} + (1/z) I,
/// evaluated pointwise for z != 0.
pub fn omega_from_nfunction(nf: &NFunction, z: CutPlanePoint) -> Result<ComplexMatrix> {
    let zv = z.value();
    if zv.norm() < 1e-14 {
        return Err(Error::InvalidParameter(
            "evaluate the inverse transform away from z = 0".into(),
        ));
    }
    let xi = 1.0 / zv;
    let mval = nf.eval(xi)?;
    let cond = cond2(&mval);
    if cond > COND_LIMIT {
        return Err(Error::NearSingularResolvent { cond });
    }
    Ok(&inverse(&mval)? + &ComplexMatrix::identity(nf.m).scale(xi))
}

/// The involution Gamma: M(xi) -> M(xi)^{-1} / (xi^2 - 1), evaluated
/// pointwise off [-1, 1].
pub fn gamma_transform(nf: &NFunction, xi: Complex64) -> Result<ComplexMatrix> {
    let xi = check_resolvent_point(xi)?;
    let mval = nf.eval(xi)?;
    let cond = cond2(&mval);
    if cond > COND_LIMIT {
        return Err(Error::NearSingularResolvent { cond });
    }
    let scale = 1.0 / (xi * xi - 1.0);
    Ok(inverse(&mval)?.scale(scale))
}

/// Realization of Gamma: the image is the compressed resolvent of the
/// block operator built by the Phi realization over the same input space.
pub fn gamma_realize(nf: &NFunction) -> Result<NFunction> {
    let (t_phi, _) = crate::transforms::phi_block(nf.t.as_matrix(), nf.m)?;
    NFunction::new(HermitianMatrix::new_unchecked(t_phi), nf.m)
}

/// Loewner-order monotonicity check of x -> Omega(x) used by property
/// tests: returns the smallest eigenvalue of successive differences over
/// the real grid.
pub fn monotonicity_min_eig(sys: &PassiveSystem) -> Result<f64> {
    let mut prev: Option<ComplexMatrix> = None;
    let mut worst = f64::INFINITY;
    for x in grids::real_grid() {
        let omega = sys.transfer(CutPlanePoint::new_real(x)?)?;
        if let Some(p) = prev {
            let diff = HermitianMatrix::new_unchecked((&omega - &p).hermitize());
            worst = worst.min(min_eig(&diff));
        }
        prev = Some(omega);
    }
    Ok(worst)
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

    /// Minimal realization of (z + d)(1 + zd)^{-1} for scalar |d| < 1.
    fn inner_scalar_system(d: f64) -> PassiveSystem {
        let df = (1.0 - d * d).sqrt();
        let t = ComplexMatrix::from_real_rows(&[vec![d, df], vec![df, -d]]);
        PassiveSystem::validate(t, 1, true).unwrap()
    }

    #[test]
    fn characteristic_scalar_values() {
        // F = 0: Delta(z) = z
        let z = CutPlanePoint::new(c(0.3, 0.4)).unwrap();
        let delta = characteristic_fn(&HermitianMatrix::zeros(1), z).unwrap();
        assert!((delta[(0, 0)] - c(0.3, 0.4)).norm() < 1e-14);

        // F = 1: zero-dimensional defect
        let delta = characteristic_fn(&HermitianMatrix::real_diagonal(&[1.0]), z).unwrap();
        assert_eq!((delta.rows(), delta.cols()), (0, 0));

        // F = 1/2 at z = i: (i - 1/2)/(1 - i/2), unimodular
        let zi = CutPlanePoint::new(c(0.0, 1.0)).unwrap();
        let delta = characteristic_fn(&HermitianMatrix::real_diagonal(&[0.5]), zi).unwrap();
        let expect = (c(0.0, 1.0) - 0.5) / (c(1.0, 0.0) - c(0.0, 0.5));
        assert!((delta[(0, 0)] - expect).norm() < 1e-14);
        assert!((delta[(0, 0)].norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn characteristic_unimodular_on_circle() {
        let mut rng = crate::seeded::rng_from_seed(42);
        let f = crate::seeded::random_hermitian_contraction(&mut rng, 4);
        let z = CutPlanePoint::new(Complex64::from_polar(1.0, 0.8)).unwrap();
        let delta = characteristic_fn(&f, z).unwrap();
        let r = delta.cols();
        let gram = (&delta.adjoint() * &delta).hermitize();
        assert!(opnorm(&(&gram - &ComplexMatrix::identity(r))) < 1e-9);
    }

    #[test]
    fn kernel_vanishes_for_inner_and_is_identity_for_zero() {
        let flip = flip_system();
        let z = CutPlanePoint::new(c(0.0, 0.5)).unwrap();
        let w = CutPlanePoint::new(c(0.0, 1.0 / 3.0)).unwrap();
        let k = pick_kernel(&flip, z, w).unwrap();
        assert!(k.max_abs() < 1e-12);

        let zero = PassiveSystem::validate(ComplexMatrix::zeros(1, 1), 1, true).unwrap();
        let k = pick_kernel(&zero, z, w).unwrap();
        assert!((k[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);

        assert!(pick_kernel(&flip, z, CutPlanePoint::new(c(0.0, -0.5)).unwrap()).is_err());
    }

    #[test]
    fn kernel_hermitian_symmetry_and_gram_psd() {
        let sys = random_selfadjoint_system(9, 2, 3);
        let z = CutPlanePoint::new(c(0.2, 0.7)).unwrap();
        let w = CutPlanePoint::new(c(-0.4, 0.3)).unwrap();
        let kzw = pick_kernel(&sys, z, w).unwrap();
        let kwz = pick_kernel(&sys, w, z).unwrap();
        assert!(opnorm(&(&kzw.adjoint() - &kwz)) < 1e-10);

        let cert = certify_rs(&sys, CertificateGrid::default());
        assert!(cert.verdict, "{cert:?}");
        assert!(cert.min_kernel_eig >= -cert.tol_psd);
    }

    #[test]
    fn certificate_fails_constructed_violator() {
        let t = ComplexMatrix::from_real_rows(&[vec![1.2, 0.0], vec![0.0, 0.3]]);
        let fake = PassiveSystem::new_unchecked(t, 1, true);
        let cert = certify_rs(&fake, CertificateGrid::default());
        assert!(!cert.verdict);
        assert!(cert.min_inequality_eig < -cert.tol_psd);
    }

    #[test]
    fn inner_system_certificate_kernel_near_zero() {
        let sys = inner_scalar_system(0.3);
        let cert = certify_rs(&sys, CertificateGrid::default());
        assert!(cert.verdict);
        assert!(cert.min_kernel_eig.abs() < 1e-9);
    }

    #[test]
    fn limit_values_flip_and_constant() {
        let p = extract_ky(&flip_system()).unwrap();
        let lv = limit_values(&p);
        assert!((lv.plus.as_matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!((lv.minus.as_matrix()[(0, 0)].re + 1.0).abs() < 1e-12);

        let constant =
            PassiveSystem::validate(ComplexMatrix::from_real_rows(&[vec![0.4]]), 1, true).unwrap();
        let lv = limit_values(&extract_ky(&constant).unwrap());
        assert!((lv.plus.as_matrix()[(0, 0)].re - 0.4).abs() < 1e-12);
        assert!((lv.minus.as_matrix()[(0, 0)].re - 0.4).abs() < 1e-12);
    }

    #[test]
    fn limit_values_match_near_boundary_transfer() {
        let sys = random_selfadjoint_system(800, 2, 4);
        let p = extract_ky(&sys).unwrap();
        let lv = limit_values(&p);
        for (sign, lim) in [(1.0, &lv.plus), (-1.0, &lv.minus)] {
            let x = sign * (1.0 - 1e-6);
            let near = sys.transfer(CutPlanePoint::new_real(x).unwrap()).unwrap();
            assert!(opnorm(&(&near - lim.as_matrix())) < 1e-4);
        }
        // ordering -I <= Omega(-1) <= Omega(0) <= Omega(1) <= I
        let d = sys.d_block();
        let id = ComplexMatrix::identity(2);
        for diff in [
            &(lv.minus.as_matrix() + &id),
            &(&d - lv.minus.as_matrix()),
            &(lv.plus.as_matrix() - &d),
            &(&id - lv.plus.as_matrix()),
        ] {
            assert!(min_eig(&HermitianMatrix::new_unchecked(diff.hermitize())) > -1e-9);
        }
    }

    #[test]
    fn moebius_rep_flip_and_constant() {
        // Omega(z) = z: Lambda(z) = z on a one-dimensional defect
        let rep = moebius_rep(&flip_system()).unwrap();
        assert_eq!(rep.omega0().as_matrix().max_abs(), 0.0);
        let z = CutPlanePoint::new(c(0.3, 0.2)).unwrap();
        let lam = rep.lambda(z).unwrap();
        assert!((lam[(0, 0)] - c(0.3, 0.2)).norm() < 1e-12);

        // constant: Lambda = 0 realized on a stateless defect system
        let constant =
            PassiveSystem::validate(ComplexMatrix::from_real_rows(&[vec![0.4]]), 1, true).unwrap();
        let rep = moebius_rep(&constant).unwrap();
        assert_eq!(rep.lambda_system().dim_state(), 0);
        assert!(rep.lambda(z).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn moebius_rep_random_schwarz_and_pinv_route() {
        let sys = random_selfadjoint_system(801, 2, 4);
        let rep = moebius_rep(&sys).unwrap();
        for z in grids::disk_grid().into_iter().take(8) {
            let lam = rep.lambda(z).unwrap();
            assert!(opnorm(&lam) <= z.value().norm() + 1e-9);
            let via_pinv = lambda_via_pinv(&sys, z).unwrap();
            let amb = rep.lambda_ambient(z).unwrap();
            assert!(opnorm(&(&amb - &via_pinv)) < 1e-8);
        }
        assert!(rep.lambda(CutPlanePoint::new_real(0.0).unwrap()).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn inner_test_detects_flip_and_shifted() {
        let report = inner_test(&flip_system()).unwrap();
        assert!(report.is_inner);
        assert_eq!(report.d_fit.as_ref().unwrap().as_matrix().max_abs(), 0.0);
        assert_eq!(report.neuvaa, [true, true, true]);
        assert!(report.thinne_at_a);

        let report = inner_test(&inner_scalar_system(0.3)).unwrap();
        assert!(report.is_inner);
        let d = report.d_fit.unwrap();
        assert!((d.as_matrix()[(0, 0)].re - 0.3).abs() < 1e-9);
    }

    #[test]
    fn inner_test_rejects_jacobi_truncation() {
        // z/2 has limit values +-1/2: not inner, neuvaa (i) false
        let r = 1.0 / 2.0_f64.sqrt();
        let sys = PassiveSystem::validate(
            ComplexMatrix::from_real_rows(&[vec![0.0, r], vec![r, 0.0]]),
            1,
            true,
        )
        .unwrap();
        let report = inner_test(&sys).unwrap();
        assert!(!report.is_inner);
        assert_eq!(report.neuvaa, [false, false, false]);
    }

    #[test]
    fn inner_test_requires_minimality() {
        let t = ComplexMatrix::from_real_rows(&[vec![0.3, 0.0], vec![0.0, 0.4]]);
        let sys = PassiveSystem::validate(t, 1, true).unwrap();
        assert!(matches!(
            inner_test(&sys),
            Err(Error::MinimalityRequired { .. })
        ));
    }

    #[test]
    fn nfunction_round_trip_and_values() {
        // Omega = 0 gives M(xi) = -1/xi
        let zero = PassiveSystem::validate(ComplexMatrix::zeros(1, 1), 1, true).unwrap();
        let nf = to_nfunction(&zero).unwrap();
        let xi = c(0.7, 1.1);
        assert!((nf.eval(xi).unwrap()[(0, 0)] + 1.0 / xi).norm() < 1e-14);

        // inner with D = 0 at xi = 2i: M = 2i/5
        let nf = to_nfunction(&flip_system()).unwrap();
        let m = nf.eval(c(0.0, 2.0)).unwrap();
        assert!((m[(0, 0)] - c(0.0, 0.4)).norm() < 1e-14);

        // U^{-1} U = identity on probe points
        let sys = random_selfadjoint_system(802, 2, 4);
        let nf = to_nfunction(&sys).unwrap();
        for z in grids::disk_grid().into_iter().take(8) {
            let direct = sys.transfer(z).unwrap();
            let round = omega_from_nfunction(&nf, z).unwrap();
            assert!(opnorm(&(&direct - &round)) < 1e-9);
        }
    }

    #[test]
    fn gamma_is_involutive_and_realized() {
        let sys = random_selfadjoint_system(803, 2, 3);
        let nf = to_nfunction(&sys).unwrap();
        let gamma_nf = gamma_realize(&nf).unwrap();
        for xi in grids::xi_grid() {
            let direct = gamma_transform(&nf, xi).unwrap();
            let realized = gamma_nf.eval(xi).unwrap();
            assert!(opnorm(&(&direct - &realized)) < 1e-9);
            // Gamma(Gamma(M)) = M
            let twice = gamma_transform(&gamma_nf, xi).unwrap();
            let original = nf.eval(xi).unwrap();
            assert!(opnorm(&(&twice - &original)) < 1e-9);
        }
    }

    #[test]
    fn gamma_of_free_function() {
        // M(xi) = -1/xi maps to -xi/(xi^2 - 1)
        let zero = PassiveSystem::validate(ComplexMatrix::zeros(1, 1), 1, true).unwrap();
        let nf = to_nfunction(&zero).unwrap();
        let xi = c(0.5, 1.5);
        let g = gamma_transform(&nf, xi).unwrap();
        let expect = -xi / (xi * xi - 1.0);
        assert!((g[(0, 0)] - expect).norm() < 1e-12);
    }

    #[test]
    fn monotone_on_real_interval() {
        let sys = random_selfadjoint_system(804, 2, 4);
        assert!(monotonicity_min_eig(&sys).unwrap() > -1e-10);
    }
}
