//! Contractive 2x2 block operators and their parametrizations.
//!
//! A selfadjoint contraction T = [D C; C* F] over M (+) K is determined in
//! two equivalent ways: by the state block F together with a contraction
//! K: D_F -> M and a selfadjoint contraction Y on D_{K*} (so that C = K D_F
//! and D = -K F K* + D_{K*} Y D_{K*}), or dually by the input block D with
//! N: D_D -> K and X on D_{N*}. Defect spaces are carried concretely as
//! isometric range embeddings, so K, Y, N, X live at their intrinsic
//! dimensions and zero-dimensional defects are ordinary 0 x k matrices.

use crate::error::{Error, Result};
use crate::numkit::{
    opnorm, pinv, psd_sqrt, range_embed, ComplexMatrix, HermitianMatrix, RTOL_DEFAULT,
};
use crate::systems::{PassiveSystem, PASSIVITY_TOL};

const NORM_SLACK: f64 = 1.0 + PASSIVITY_TOL;
/// Reassembly residual above this signals unusable defect ranges.
const REASSEMBLY_LIMIT: f64 = 1e-8;

fn check_contraction(label: &str, a: &ComplexMatrix) -> Result<()> {
    let norm = opnorm(a);
    if norm > NORM_SLACK {
        return Err(Error::InvalidParameter(format!(
            "{label} must be a contraction, norm {norm}"
        )));
    }
    Ok(())
}

/// A contraction's defect eigenvalue below this is numerical zero: the
/// squared defect I - A*A carries roundoff of order eps, which the square
/// root inflates to ~1e-8, an order of magnitude under this floor.
pub(crate) const DEFECT_RANK_FLOOR: f64 = 1e-7;

/// Range embedding of a defect operator with the absolute noise floor
/// applied on top of the relative rank cut.
pub(crate) fn embed_defect_range(d: &HermitianMatrix) -> Result<ComplexMatrix> {
    let lam_max = crate::numkit::eigh(d)
        .eigenvalues
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0);
    if lam_max <= DEFECT_RANK_FLOOR {
        return Ok(ComplexMatrix::zeros(d.dim(), 0));
    }
    range_embed(d, RTOL_DEFAULT.max(DEFECT_RANK_FLOOR / lam_max))
}

/// Defect operator (I - A*A)^(1/2) together with the isometric embedding of
/// its range.
fn defect_with_embedding(a: &ComplexMatrix) -> Result<(HermitianMatrix, ComplexMatrix)> {
    let k = a.cols();
    let gram = (&a.adjoint() * a).hermitize();
    let d_sq = &ComplexMatrix::identity(k) - &gram;
    let d = psd_sqrt(&HermitianMatrix::new_unchecked(d_sq))?;
    let e = embed_defect_range(&d)?;
    Ok((d, e))
}

/// (F, K, Y) parametrization of a selfadjoint contraction, anchored at the
/// state block.
#[derive(Clone, Debug)]
pub struct KYParam {
    f: HermitianMatrix,
    /// n x r embedding of ran D_F.
    f_embed: ComplexMatrix,
    d_f: HermitianMatrix,
    /// m x r contraction from D_F into the input space.
    k: ComplexMatrix,
    /// m x s embedding of ran D_{K*}.
    kstar_embed: ComplexMatrix,
    d_kstar: HermitianMatrix,
    /// s x s selfadjoint contraction on D_{K*}.
    y: HermitianMatrix,
}

impl KYParam {
    pub fn new(f: HermitianMatrix, k: ComplexMatrix, y: HermitianMatrix) -> Result<Self> {
        check_contraction("F", f.as_matrix())?;
        check_contraction("K", &k)?;
        check_contraction("Y", y.as_matrix())?;
        let (d_f, f_embed) = defect_with_embedding(f.as_matrix())?;
        if k.cols() != f_embed.cols() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "K has {} columns but dim D_F = {}",
                    k.cols(),
                    f_embed.cols()
                ),
            });
        }
        let m = k.rows();
        let kk = (&k * &k.adjoint()).hermitize();
        let d_kstar = psd_sqrt(&HermitianMatrix::new_unchecked(
            &ComplexMatrix::identity(m) - &kk,
        ))?;
        let kstar_embed = embed_defect_range(&d_kstar)?;
        if y.dim() != kstar_embed.cols() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "Y has dimension {} but dim D_K* = {}",
                    y.dim(),
                    kstar_embed.cols()
                ),
            });
        }
        Ok(Self {
            f,
            f_embed,
            d_f,
            k,
            kstar_embed,
            d_kstar,
            y,
        })
    }

    pub fn f(&self) -> &HermitianMatrix {
        &self.f
    }

    pub fn k(&self) -> &ComplexMatrix {
        &self.k
    }

    pub fn y(&self) -> &HermitianMatrix {
        &self.y
    }

    pub fn f_embed(&self) -> &ComplexMatrix {
        &self.f_embed
    }

    pub fn kstar_embed(&self) -> &ComplexMatrix {
        &self.kstar_embed
    }

    pub fn dim_input(&self) -> usize {
        self.k.rows()
    }

    pub fn dim_state(&self) -> usize {
        self.f.dim()
    }

    /// K K* on the input space.
    pub fn kk_star(&self) -> ComplexMatrix {
        (&self.k * &self.k.adjoint()).hermitize()
    }

    /// D_{K*} Y D_{K*} carried back to the ambient input space.
    pub fn y_ambient_term(&self) -> ComplexMatrix {
        let y_amb = &(&self.kstar_embed * self.y.as_matrix()) * &self.kstar_embed.adjoint();
        (&(self.d_kstar.as_matrix() * &y_amb) * self.d_kstar.as_matrix()).hermitize()
    }

    /// Observation block C = K D_F.
    pub fn c_block(&self) -> ComplexMatrix {
        &self.k * &(&self.f_embed.adjoint() * self.d_f.as_matrix())
    }

    /// Feedthrough block D = -K F K* + D_{K*} Y D_{K*}.
    pub fn d_block(&self) -> ComplexMatrix {
        let f_c = (&(&self.f_embed.adjoint() * self.f.as_matrix()) * &self.f_embed).hermitize();
        let minus_kfk = (&(&self.k * &f_c) * &self.k.adjoint()).scale_re(-1.0);
        (&minus_kfk + &self.y_ambient_term()).hermitize()
    }
}

/// Assembles the selfadjoint contraction T = [D C; C* F] from (F, K, Y).
pub fn assemble_selfadjoint_ky(p: &KYParam) -> Result<PassiveSystem> {
    let c = p.c_block();
    let d = p.d_block();
    let t = ComplexMatrix::block2x2(&d, &c, &c.adjoint(), p.f.as_matrix());
    PassiveSystem::validate(t, p.dim_input(), true)
}

/// Recovers (F, K, Y) from a selfadjoint system: K = C pinv(D_F) extended by
/// zero on ker D_F and Y = pinv(D_{K*}) (D + K F K*) pinv(D_{K*}) compressed
/// onto ran D_{K*}. Fidelity is checked by reassembly.
pub fn extract_ky(sys: &PassiveSystem) -> Result<KYParam> {
    if !sys.is_selfadjoint() {
        return Err(Error::InvalidParameter(
            "KY parametrization requires a selfadjoint system".into(),
        ));
    }
    let f = HermitianMatrix::new_unchecked(sys.a_block());
    let (d_f, f_embed) = defect_with_embedding(f.as_matrix())?;
    let k_amb = &sys.c_block() * &pinv(d_f.as_matrix(), RTOL_DEFAULT);
    let k = &k_amb * &f_embed;

    let m = sys.dim_input();
    let kk = (&k * &k.adjoint()).hermitize();
    let d_kstar = psd_sqrt(&HermitianMatrix::new_unchecked(
        &ComplexMatrix::identity(m) - &kk,
    ))?;
    let kstar_embed = embed_defect_range(&d_kstar)?;
    let pinv_dk = pinv(d_kstar.as_matrix(), RTOL_DEFAULT);
    let kfk = &(&k_amb * f.as_matrix()) * &k_amb.adjoint();
    let y_amb = &(&pinv_dk * &(&sys.d_block() + &kfk)) * &pinv_dk;
    let y = HermitianMatrix::new_unchecked(
        (&(&kstar_embed.adjoint() * &y_amb) * &kstar_embed).hermitize(),
    );

    let param = KYParam::new(f, k, y)?;
    let reassembled = assemble_selfadjoint_ky(&param)?;
    let scale = 1.0_f64.max(opnorm(sys.matrix()));
    let residual = opnorm(&(reassembled.matrix() - sys.matrix()));
    if residual > REASSEMBLY_LIMIT * scale {
        return Err(Error::IllConditionedExtraction { residual });
    }
    Ok(param)
}

/// (D, N, X) parametrization of a selfadjoint contraction, anchored at the
/// input block.
#[derive(Clone, Debug)]
pub struct NXParam {
    d: HermitianMatrix,
    /// m x r embedding of ran D_D.
    d_embed: ComplexMatrix,
    d_d: HermitianMatrix,
    /// n x r contraction from D_D into the state space.
    n_op: ComplexMatrix,
    /// n x u embedding of ran D_{N*}.
    nstar_embed: ComplexMatrix,
    d_nstar: HermitianMatrix,
    /// u x u selfadjoint contraction on D_{N*}.
    x: HermitianMatrix,
}

impl NXParam {
    pub fn new(d: HermitianMatrix, n_op: ComplexMatrix, x: HermitianMatrix) -> Result<Self> {
        check_contraction("D", d.as_matrix())?;
        check_contraction("N", &n_op)?;
        check_contraction("X", x.as_matrix())?;
        let (d_d, d_embed) = defect_with_embedding(d.as_matrix())?;
        if n_op.cols() != d_embed.cols() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "N has {} columns but dim D_D = {}",
                    n_op.cols(),
                    d_embed.cols()
                ),
            });
        }
        let n = n_op.rows();
        let nn = (&n_op * &n_op.adjoint()).hermitize();
        let d_nstar = psd_sqrt(&HermitianMatrix::new_unchecked(
            &ComplexMatrix::identity(n) - &nn,
        ))?;
        let nstar_embed = embed_defect_range(&d_nstar)?;
        if x.dim() != nstar_embed.cols() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "X has dimension {} but dim D_N* = {}",
                    x.dim(),
                    nstar_embed.cols()
                ),
            });
        }
        Ok(Self {
            d,
            d_embed,
            d_d,
            n_op,
            nstar_embed,
            d_nstar,
            x,
        })
    }

    pub fn d(&self) -> &HermitianMatrix {
        &self.d
    }

    pub fn n_op(&self) -> &ComplexMatrix {
        &self.n_op
    }

    pub fn x(&self) -> &HermitianMatrix {
        &self.x
    }

    pub fn d_embed(&self) -> &ComplexMatrix {
        &self.d_embed
    }

    pub fn dim_input(&self) -> usize {
        self.d.dim()
    }

    pub fn dim_state(&self) -> usize {
        self.n_op.rows()
    }

    /// N carried to the ambient input space (n x m), vanishing on ker D_D.
    pub fn n_ambient(&self) -> ComplexMatrix {
        &self.n_op * &self.d_embed.adjoint()
    }

    /// The selfadjoint contraction F^ = D_{N*} X D_{N*} on the state space.
    pub fn fhat(&self) -> HermitianMatrix {
        let x_amb = &(&self.nstar_embed * self.x.as_matrix()) * &self.nstar_embed.adjoint();
        HermitianMatrix::new_unchecked(
            (&(self.d_nstar.as_matrix() * &x_amb) * self.d_nstar.as_matrix()).hermitize(),
        )
    }

    /// Observation block C = D_D N*.
    pub fn c_block(&self) -> ComplexMatrix {
        self.d_d.as_matrix() * &self.n_ambient().adjoint()
    }

    /// State block F = -N D N* + D_{N*} X D_{N*}.
    pub fn f_block(&self) -> ComplexMatrix {
        let d_c = (&(&self.d_embed.adjoint() * self.d.as_matrix()) * &self.d_embed).hermitize();
        let minus_ndn = (&(&self.n_op * &d_c) * &self.n_op.adjoint()).scale_re(-1.0);
        (&minus_ndn + self.fhat().as_matrix()).hermitize()
    }
}

/// Assembles T = [D C; C* F] from (D, N, X).
pub fn assemble_selfadjoint_nx(p: &NXParam) -> Result<PassiveSystem> {
    let c = p.c_block();
    let f = p.f_block();
    let t = ComplexMatrix::block2x2(p.d.as_matrix(), &c, &c.adjoint(), &f);
    PassiveSystem::validate(t, p.dim_input(), true)
}

/// Recovers (D, N, X) from a selfadjoint system; dual to [`extract_ky`].
pub fn extract_nx(sys: &PassiveSystem) -> Result<NXParam> {
    if !sys.is_selfadjoint() {
        return Err(Error::InvalidParameter(
            "NX parametrization requires a selfadjoint system".into(),
        ));
    }
    let d = HermitianMatrix::new_unchecked(sys.d_block());
    let (d_d, d_embed) = defect_with_embedding(d.as_matrix())?;
    let nstar_amb = &pinv(d_d.as_matrix(), RTOL_DEFAULT) * &sys.c_block();
    let n_amb = nstar_amb.adjoint();
    let n_op = &n_amb * &d_embed;

    let n = sys.dim_state();
    let nn = (&n_op * &n_op.adjoint()).hermitize();
    let d_nstar = psd_sqrt(&HermitianMatrix::new_unchecked(
        &ComplexMatrix::identity(n) - &nn,
    ))?;
    let nstar_embed = embed_defect_range(&d_nstar)?;
    let pinv_dn = pinv(d_nstar.as_matrix(), RTOL_DEFAULT);
    let ndn = &(&n_amb * d.as_matrix()) * &n_amb.adjoint();
    let x_amb = &(&pinv_dn * &(&sys.a_block() + &ndn)) * &pinv_dn;
    let x = HermitianMatrix::new_unchecked(
        (&(&nstar_embed.adjoint() * &x_amb) * &nstar_embed).hermitize(),
    );

    let param = NXParam::new(d, n_op, x)?;
    let reassembled = assemble_selfadjoint_nx(&param)?;
    let scale = 1.0_f64.max(opnorm(sys.matrix()));
    let residual = opnorm(&(reassembled.matrix() - sys.matrix()));
    if residual > REASSEMBLY_LIMIT * scale {
        return Err(Error::IllConditionedExtraction { residual });
    }
    Ok(param)
}

/// The fundamental block J_F = [-F D_F; D_F F] on D_F (+) K; selfadjoint
/// and unitary for every selfadjoint contraction F.
pub fn fundamental_jf(f: &HermitianMatrix) -> Result<ComplexMatrix> {
    check_contraction("F", f.as_matrix())?;
    let (d_f, e) = defect_with_embedding(f.as_matrix())?;
    let top_left = (&(&e.adjoint() * f.as_matrix()) * &e).hermitize().scale_re(-1.0);
    let top_right = &e.adjoint() * d_f.as_matrix();
    let bottom_left = top_right.adjoint();
    Ok(ComplexMatrix::block2x2(&top_left, &top_right, &bottom_left, f.as_matrix()).hermitize())
}

/// Free parameters (D, N, G, L) of a general contraction
/// T = [D, D_{D*}G; N D_D, -N D* G + D_{N*} L D_G] from M (+) K to N (+) L.
/// All four operators live at intrinsic defect dimensions.
#[derive(Clone, Debug)]
pub struct GeneralBlockParam {
    d: ComplexMatrix,
    n_op: ComplexMatrix,
    g: ComplexMatrix,
    l_op: ComplexMatrix,
    e_d: ComplexMatrix,
    e_dstar: ComplexMatrix,
    e_g: ComplexMatrix,
    e_nstar: ComplexMatrix,
    d_d: HermitianMatrix,
    d_dstar: HermitianMatrix,
    d_g: HermitianMatrix,
    d_nstar: HermitianMatrix,
    dim_k: usize,
}

impl GeneralBlockParam {
    /// `d`: M -> N; `n_op`: D_D -> L; `g`: K -> D_{D*}; `l_op`: D_G -> D_{N*}.
    /// `dim_k` fixes the second input space (g may have fewer rows than
    /// columns only through its intrinsic codomain, so K's dimension is
    /// explicit).
    pub fn new(
        d: ComplexMatrix,
        n_op: ComplexMatrix,
        g: ComplexMatrix,
        l_op: ComplexMatrix,
        dim_k: usize,
    ) -> Result<Self> {
        check_contraction("D", &d)?;
        check_contraction("N", &n_op)?;
        check_contraction("G", &g)?;
        check_contraction("L", &l_op)?;
        let (d_d, e_d) = defect_with_embedding(&d)?;
        let (d_dstar, e_dstar) = defect_with_embedding(&d.adjoint())?;
        if n_op.cols() != e_d.cols() {
            return Err(Error::DimensionMismatch {
                context: format!("N has {} columns, dim D_D = {}", n_op.cols(), e_d.cols()),
            });
        }
        if g.rows() != e_dstar.cols() || g.cols() != dim_k {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "G is {}x{}, expected {}x{}",
                    g.rows(),
                    g.cols(),
                    e_dstar.cols(),
                    dim_k
                ),
            });
        }
        let (d_g, e_g) = defect_with_embedding(&g)?;
        let l = n_op.rows();
        let nn = (&n_op * &n_op.adjoint()).hermitize();
        let d_nstar = psd_sqrt(&HermitianMatrix::new_unchecked(
            &ComplexMatrix::identity(l) - &nn,
        ))?;
        let e_nstar = embed_defect_range(&d_nstar)?;
        if l_op.rows() != e_nstar.cols() || l_op.cols() != e_g.cols() {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "L is {}x{}, expected {}x{}",
                    l_op.rows(),
                    l_op.cols(),
                    e_nstar.cols(),
                    e_g.cols()
                ),
            });
        }
        Ok(Self {
            d,
            n_op,
            g,
            l_op,
            e_d,
            e_dstar,
            e_g,
            e_nstar,
            d_d,
            d_dstar,
            d_g,
            d_nstar,
            dim_k,
        })
    }

    pub fn dim_in(&self) -> (usize, usize) {
        (self.d.cols(), self.dim_k)
    }

    pub fn dim_out(&self) -> (usize, usize) {
        (self.d.rows(), self.n_op.rows())
    }
}

/// Assembles the contraction T determined by the free parameters.
pub fn assemble_contraction(p: &GeneralBlockParam) -> ComplexMatrix {
    let b = &p.n_op * &(&p.e_d.adjoint() * p.d_d.as_matrix());
    let c = &(p.d_dstar.as_matrix() * &p.e_dstar) * &p.g;
    let middle = &(&p.e_d.adjoint() * &p.d.adjoint()) * &p.e_dstar;
    let term1 = (&(&p.n_op * &middle) * &p.g).scale_re(-1.0);
    let l_amb = &(&p.e_nstar * &p.l_op) * &p.e_g.adjoint();
    let term2 = &(p.d_nstar.as_matrix() * &l_amb) * p.d_g.as_matrix();
    let f = &term1 + &term2;
    ComplexMatrix::block2x2(&p.d, &c, &b, &f)
}


/// Seeded staged sampling of free parameters: each factor is drawn as a
/// Gaussian contraction at the intrinsic dimension determined by the
/// previous stage.
pub fn random_general_block(
    rng: &mut rand_chacha::ChaCha8Rng,
    dim_m: usize,
    dim_k: usize,
    dim_n: usize,
    dim_l: usize,
) -> GeneralBlockParam {
    use crate::seeded::random_contraction;
    let d = random_contraction(rng, dim_n, dim_m);
    let (_, e_d) = defect_with_embedding(&d).expect("defect of a contraction");
    let (_, e_dstar) = defect_with_embedding(&d.adjoint()).expect("defect of a contraction");
    let n_op = random_contraction(rng, dim_l, e_d.cols());
    let g = random_contraction(rng, e_dstar.cols(), dim_k);
    let (_, e_g) = defect_with_embedding(&g).expect("defect of a contraction");
    let nn = (&n_op * &n_op.adjoint()).hermitize();
    let d_nstar = psd_sqrt(&HermitianMatrix::new_unchecked(
        &ComplexMatrix::identity(dim_l) - &nn,
    ))
    .expect("defect of a contraction");
    let e_nstar = embed_defect_range(&d_nstar).expect("defect range");
    let l_op = random_contraction(rng, e_nstar.cols(), e_g.cols());
    GeneralBlockParam::new(d, n_op, g, l_op, dim_k).expect("staged parameters are consistent")
}

/// Evaluates both sides of the norm-defect identity
/// ||(f,h)||^2 - ||T(f,h)||^2 = ||D_N(D_D f - D*G h) - N*L D_G h||^2
///                              + ||D_L D_G h||^2
/// and returns the absolute difference.
pub fn defect_identity_residual(
    p: &GeneralBlockParam,
    f: &ComplexMatrix,
    h: &ComplexMatrix,
) -> Result<f64> {
    let (m, k) = p.dim_in();
    if f.rows() != m || f.cols() != 1 || h.rows() != k || h.cols() != 1 {
        return Err(Error::DimensionMismatch {
            context: format!(
                "vectors must be {}x1 and {}x1, got {}x{} and {}x{}",
                m,
                k,
                f.rows(),
                f.cols(),
                h.rows(),
                h.cols()
            ),
        });
    }
    let t = assemble_contraction(p);
    let top = &(&t.submatrix(0, p.d.rows(), 0, m) * f)
        + &(&t.submatrix(0, p.d.rows(), m, m + k) * h);
    let rows = t.rows();
    let bottom = &(&t.submatrix(p.d.rows(), rows, 0, m) * f)
        + &(&t.submatrix(p.d.rows(), rows, m, m + k) * h);
    let lhs = f.frobenius().powi(2) + h.frobenius().powi(2)
        - top.frobenius().powi(2)
        - bottom.frobenius().powi(2);

    let g_amb_h = &p.e_dstar * &(&p.g * h);
    let v_amb = &(p.d_d.as_matrix() * f) - &(&p.d.adjoint() * &g_amb_h);
    let v = &p.e_d.adjoint() * &v_amb;
    let r_d = p.e_d.cols();
    let d_n = psd_sqrt(&HermitianMatrix::new_unchecked(
        &ComplexMatrix::identity(r_d) - &(&p.n_op.adjoint() * &p.n_op).hermitize(),
    ))?;
    let w = &p.e_g.adjoint() * &(p.d_g.as_matrix() * h);
    let l_w_amb = &p.e_nstar * &(&p.l_op * &w);
    let term1 = &(d_n.as_matrix() * &v) - &(&p.n_op.adjoint() * &l_w_amb);
    let r_g = p.e_g.cols();
    let d_l = psd_sqrt(&HermitianMatrix::new_unchecked(
        &ComplexMatrix::identity(r_g) - &(&p.l_op.adjoint() * &p.l_op).hermitize(),
    ))?;
    let term2 = d_l.as_matrix() * &w;
    let rhs = term1.frobenius().powi(2) + term2.frobenius().powi(2);
    Ok((lhs - rhs).abs())
}
