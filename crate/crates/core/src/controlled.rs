//! Controlled g-frames.
//!
//! For a family `{L_i}` and controllers `C, C'` the positive blocks
//! `P_i = C* L_i* L_i C'` define the controlled frame operator `S = sum_i P_i`.
//! The representation space `K` consists of sequences `{P_i^{1/2} f}`; its
//! blocks have the ambient length `n`, not `d_i`.
//!
//! Controlled synthesis is implemented on the whole direct sum of `m` copies of
//! `H` as the block row `T = [P_1^{1/2} ... P_m^{1/2}]`. On `K` it maps
//! `{P_i^{1/2} f}` to `S f`, and it lets products such as `T_L T_M*` of two
//! different systems be formed as `sum_i R_i^L R_i^M`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gframes::{BlockSpace, CoefficientSequence, FrameBounds, GFrameFamily};
use crate::matcore::{self, ComplexMatrix, HermitianEig, ZERO};
use crate::tol::Tolerances;

/// The pair `(C, C')`, both invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerPair {
    c: ComplexMatrix,
    cp: ComplexMatrix,
}

fn check_invertible(m: &ComplexMatrix, which: &'static str, inv_tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let s = matcore::singular_values(m);
    let (smax, smin) = (s[0], *s.last().unwrap());
    let ratio = if smax > 0.0 { smin / smax } else { 0.0 };
    if ratio <= inv_tol {
        return Err(Error::NotInvertible { which, ratio });
    }
    Ok(())
}

impl ControllerPair {
    pub fn new(c: ComplexMatrix, cp: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(c, cp, Tolerances::default().inv)
    }

    pub fn with_tolerance(c: ComplexMatrix, cp: ComplexMatrix, inv_tol: f64) -> Result<Self> {
        if c.rows() != cp.rows() || c.cols() != cp.cols() {
            return Err(Error::DimensionMismatch(
                "C and C' have different shapes".into(),
            ));
        }
        check_invertible(&c, "C", inv_tol)?;
        check_invertible(&cp, "C'", inv_tol)?;
        Ok(Self { c, cp })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            c: ComplexMatrix::identity(n),
            cp: ComplexMatrix::identity(n),
        }
    }

    pub fn c(&self) -> &ComplexMatrix {
        &self.c
    }

    pub fn cp(&self) -> &ComplexMatrix {
        &self.cp
    }

    pub fn dim(&self) -> usize {
        self.c.rows()
    }

    /// True when `C` and `C'` are entry-for-entry identical.
    pub fn is_symmetric(&self) -> bool {
        self.c.exactly_equals(&self.cp)
    }
}

/// A family together with a controller pair and all derived operators.
#[derive(Debug, Clone)]
pub struct ControlledSystem {
    family: GFrameFamily,
    pair: ControllerPair,
    blocks: Vec<ComplexMatrix>,
    roots: Vec<ComplexMatrix>,
    s: ComplexMatrix,
    s_eig: HermitianEig,
    bounds: FrameBounds,
    tol: Tolerances,
}

pub fn build_system(family: GFrameFamily, pair: ControllerPair) -> Result<ControlledSystem> {
    build_system_with(family, pair, Tolerances::default())
}

pub fn build_system_with(
    family: GFrameFamily,
    pair: ControllerPair,
    tol: Tolerances,
) -> Result<ControlledSystem> {
    let n = family.ambient_dim();
    if pair.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "controllers are {}x{}, ambient dimension is {n}",
            pair.dim(),
            pair.dim()
        )));
    }
    let c_adj = pair.c().adjoint();
    let mut blocks = Vec::with_capacity(family.len());
    let mut roots = Vec::with_capacity(family.len());
    for (index, op) in family.operators().iter().enumerate() {
        let p = &(&c_adj * &(&op.adjoint() * op)) * pair.cp();
        let asymmetry = p.asymmetry();
        if asymmetry > tol.herm * p.frobenius_norm() {
            return Err(Error::BlockNotSelfAdjoint { index, asymmetry });
        }
        let p = p.hermitian_part();
        let eig = matcore::herm_eig_with(&p, &tol)?;
        let scale = eig.lambda_max().abs().max(eig.lambda_min().abs());
        if eig.lambda_min() < -tol.psd * scale {
            return Err(Error::BlockNotPositive {
                index,
                lambda_min: eig.lambda_min(),
            });
        }
        roots.push(eig.apply_fn(|l| l.max(0.0).sqrt()));
        blocks.push(p);
    }
    let s = matcore::sum_matrices(blocks.iter())
        .expect("non-empty family")
        .hermitian_part();
    let s_eig = matcore::herm_eig_with(&s, &tol)?;
    let bounds = FrameBounds {
        lower: s_eig.lambda_min(),
        upper: s_eig.lambda_max(),
    };
    Ok(ControlledSystem {
        family,
        pair,
        blocks,
        roots,
        s,
        s_eig,
        bounds,
        tol,
    })
}

impl ControlledSystem {
    pub fn family(&self) -> &GFrameFamily {
        &self.family
    }

    pub fn pair(&self) -> &ControllerPair {
        &self.pair
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn dim(&self) -> usize {
        self.family.ambient_dim()
    }

    pub fn num_blocks(&self) -> usize {
        self.family.len()
    }

    /// The positive blocks `P_i = C* L_i* L_i C'`.
    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    /// The square roots `R_i = P_i^{1/2}`.
    pub fn roots(&self) -> &[ComplexMatrix] {
        &self.roots
    }

    /// The controlled frame operator `S = sum_i P_i`.
    pub fn frame_operator(&self) -> &ComplexMatrix {
        &self.s
    }

    pub fn frame_operator_eig(&self) -> &HermitianEig {
        &self.s_eig
    }

    pub fn bounds(&self) -> FrameBounds {
        self.bounds
    }

    pub fn is_frame(&self) -> bool {
        self.bounds.lower > self.tol.bound
    }

    pub fn is_parseval(&self) -> bool {
        (self.bounds.lower - 1.0).abs() <= self.tol.parseval
            && (self.bounds.upper - 1.0).abs() <= self.tol.parseval
    }

    /// Block space of `K`: `m` copies of `H`.
    pub fn k_space(&self) -> BlockSpace {
        BlockSpace::new(self.dim(), vec![self.dim(); self.num_blocks()])
            .expect("positive dimensions")
    }

    /// `T = [R_1 ... R_m]`, of shape `n x (m n)`.
    pub fn block_row(&self) -> ComplexMatrix {
        ComplexMatrix::hstack(&self.roots).expect("roots share the ambient dimension")
    }

    pub fn apply_s_inverse(&self, f: &[Complex64]) -> Result<Vec<Complex64>> {
        self.require_frame()?;
        let v = &self.s_eig.eigenvectors;
        let mut coeffs = v.adjoint_mul_vec(f);
        for (c, l) in coeffs.iter_mut().zip(&self.s_eig.eigenvalues) {
            *c /= *l;
        }
        Ok(v.mul_vec(&coeffs))
    }

    pub fn s_inverse(&self) -> Result<ComplexMatrix> {
        self.require_frame()?;
        Ok(self.s_eig.apply_fn(|l| 1.0 / l))
    }

    pub fn s_inv_sqrt(&self) -> Result<ComplexMatrix> {
        self.require_frame()?;
        Ok(self.s_eig.apply_fn(|l| 1.0 / l.sqrt()))
    }

    pub fn s_sqrt(&self) -> ComplexMatrix {
        self.s_eig.apply_fn(|l| l.max(0.0).sqrt())
    }

    fn require_frame(&self) -> Result<()> {
        if self.is_frame() {
            Ok(())
        } else {
            Err(Error::NotAFrame {
                lower: self.bounds.lower,
            })
        }
    }

    /// `sum_i <L_i C' f, L_i C f>` evaluated straight from the family.
    pub fn quadratic_form(&self, f: &[Complex64]) -> Complex64 {
        let cpf = self.pair.cp().mul_vec(f);
        let cf = self.pair.c().mul_vec(f);
        self.family
            .operators()
            .iter()
            .map(|op| matcore::inner(&op.mul_vec(&cpf), &op.mul_vec(&cf)))
            .sum()
    }

    fn check_vector(&self, f: &[Complex64]) -> Result<()> {
        if f.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} in a space of dimension {}",
                f.len(),
                self.dim()
            )));
        }
        Ok(())
    }
}

pub fn controlled_bounds(sys: &ControlledSystem) -> FrameBounds {
    sys.bounds()
}

/// `T* f = {R_i f}`.
pub fn controlled_analysis(sys: &ControlledSystem, f: &[Complex64]) -> Result<CoefficientSequence> {
    sys.check_vector(f)?;
    let blocks = sys.roots().iter().map(|r| r.mul_vec(f)).collect();
    CoefficientSequence::new(sys.k_space(), blocks)
}

/// `T h = sum_i R_i h_i` for `h` in `m` copies of `H`.
pub fn controlled_synthesis(
    sys: &ControlledSystem,
    h: &CoefficientSequence,
) -> Result<Vec<Complex64>> {
    if h.space() != &sys.k_space() {
        return Err(Error::DimensionMismatch(
            "controlled coefficients need m blocks of ambient length".into(),
        ));
    }
    let mut out = vec![ZERO; sys.dim()];
    for (r, hi) in sys.roots().iter().zip(h.blocks()) {
        for (o, v) in out.iter_mut().zip(r.mul_vec(hi)) {
            *o += v;
        }
    }
    Ok(out)
}

/// Both orderings of the reconstruction `f = sum P_i S^{-1} f = S^{-1} sum P_i f`.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub left: Vec<Complex64>,
    pub right: Vec<Complex64>,
    /// `||left - f|| / ||f||` (absolute when `f = 0`).
    pub left_residual: f64,
    pub right_residual: f64,
}

impl Reconstruction {
    pub fn max_residual(&self) -> f64 {
        self.left_residual.max(self.right_residual)
    }
}

pub fn reconstruct(sys: &ControlledSystem, f: &[Complex64]) -> Result<Reconstruction> {
    sys.check_vector(f)?;
    let sinv_f = sys.apply_s_inverse(f)?;
    let mut left = vec![ZERO; sys.dim()];
    let mut sum_pf = vec![ZERO; sys.dim()];
    for p in sys.blocks() {
        for (o, v) in left.iter_mut().zip(p.mul_vec(&sinv_f)) {
            *o += v;
        }
        for (o, v) in sum_pf.iter_mut().zip(p.mul_vec(f)) {
            *o += v;
        }
    }
    let right = sys.apply_s_inverse(&sum_pf)?;
    let scale = matcore::norm(f).max(f64::MIN_POSITIVE);
    let left_residual = matcore::norm(&matcore::sub_vec(&left, f)) / scale;
    let right_residual = matcore::norm(&matcore::sub_vec(&right, f)) / scale;
    Ok(Reconstruction {
        left,
        right,
        left_residual,
        right_residual,
    })
}

/// Commutator norms `||[S^{-1/2}, C]||` and `||[S^{-1/2}, C']||`, relative to
/// `||S^{-1/2}|| ||C||` and `||S^{-1/2}|| ||C'||`.
pub fn controller_commutators(sys: &ControlledSystem) -> Result<(f64, f64)> {
    let w = sys.s_inv_sqrt()?;
    let wn = matcore::op_norm(&w);
    let rel = |c: &ComplexMatrix| matcore::commutator_norm(&w, c) / (wn * matcore::op_norm(c));
    Ok((rel(sys.pair().c()), rel(sys.pair().cp())))
}

pub fn check_commutation(sys: &ControlledSystem) -> Result<()> {
    let (c_commutator, cp_commutator) = controller_commutators(sys)?;
    if c_commutator > sys.tol.comm || cp_commutator > sys.tol.comm {
        return Err(Error::CommutationFailure {
            c_commutator,
            cp_commutator,
        });
    }
    Ok(())
}

/// `{L_i S^{-1/2}}` with the same controllers; Parseval when `S^{-1/2}`
/// commutes with both controllers.
pub fn parseval_normalize(sys: &ControlledSystem) -> Result<ControlledSystem> {
    check_commutation(sys)?;
    let w = sys.s_inv_sqrt()?;
    build_system_with(
        sys.family().right_multiplied(&w),
        sys.pair().clone(),
        sys.tol,
    )
}

fn same_structure(a: &ControlledSystem, b: &ControlledSystem) -> Result<()> {
    if a.family().space() != b.family().space() {
        return Err(Error::SpaceMismatch(
            "systems have different ambient or block dimensions".into(),
        ));
    }
    Ok(())
}

/// `sum_i R_i^A R_i^B`, the product `T_A T_B*`.
pub fn mixed_product(a: &ControlledSystem, b: &ControlledSystem) -> Result<ComplexMatrix> {
    same_structure(a, b)?;
    let prods: Vec<ComplexMatrix> = a
        .roots()
        .iter()
        .zip(b.roots())
        .map(|(ra, rb)| ra * rb)
        .collect();
    Ok(matcore::sum_matrices(prods.iter()).expect("non-empty family"))
}

#[derive(Debug, Clone)]
pub struct CrossOperator {
    pub phi: ComplexMatrix,
    pub trace_norm: f64,
    /// `n * sqrt(B_A * B_B)`.
    pub bound: f64,
    pub holds: bool,
}

impl CrossOperator {
    pub fn slack(&self) -> f64 {
        self.bound - self.trace_norm
    }
}

pub fn cross_operator(a: &ControlledSystem, b: &ControlledSystem) -> Result<CrossOperator> {
    let phi = mixed_product(a, b)?;
    let trace_norm = matcore::trace_norm(&phi);
    let bound = a.dim() as f64 * (a.bounds().upper.max(0.0) * b.bounds().upper.max(0.0)).sqrt();
    Ok(CrossOperator {
        phi,
        trace_norm,
        bound,
        holds: trace_norm <= bound + a.tol.herm,
    })
}

/// Right-inverse certificate for the controlled synthesis operator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurjectivityCertificate {
    /// `||T T^+ - I||`.
    pub right_inverse_residual: f64,
    /// `1 / ||T^+||^2`.
    pub pinv_lower_bound: f64,
    pub lower_bound: f64,
    pub is_frame: bool,
    pub right_inverse_pass: bool,
    pub lower_bound_pass: bool,
}

impl SurjectivityCertificate {
    pub fn pass(&self) -> bool {
        self.right_inverse_pass && self.lower_bound_pass
    }
}

pub fn surjectivity_certificate(sys: &ControlledSystem) -> SurjectivityCertificate {
    let t = sys.block_row();
    let t_pinv = matcore::pinv_with(&t, sys.tol.rank);
    let n = sys.dim();
    let right_inverse_residual = matcore::op_norm(&(&(&t * &t_pinv) - &ComplexMatrix::identity(n)));
    let pn = matcore::op_norm(&t_pinv);
    let pinv_lower_bound = if pn > 0.0 {
        1.0 / (pn * pn)
    } else {
        f64::INFINITY
    };
    let is_frame = sys.is_frame();
    let lower_bound = sys.bounds().lower;
    SurjectivityCertificate {
        right_inverse_residual,
        pinv_lower_bound,
        lower_bound,
        is_frame,
        right_inverse_pass: is_frame && right_inverse_residual <= sys.tol.recon,
        lower_bound_pass: pinv_lower_bound <= lower_bound + sys.tol.herm,
    }
}

/// Lower-bound certificates for a dual pair: `A_L >= 1/B_M` and `A_M >= 1/B_L`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualFrameCertificate {
    pub identity_residual: f64,
    pub primary_lower: f64,
    pub primary_required: f64,
    pub dual_lower: f64,
    pub dual_required: f64,
    pub pass: bool,
}

pub fn dual_pair_implies_frames(
    primary: &ControlledSystem,
    dual: &ControlledSystem,
) -> Result<DualFrameCertificate> {
    let prod = mixed_product(primary, dual)?;
    let identity_residual = matcore::op_norm(&(&prod - &ComplexMatrix::identity(primary.dim())));
    if identity_residual > primary.tol.dual {
        return Err(Error::NotADualPair {
            residual: identity_residual,
        });
    }
    let primary_lower = primary.bounds().lower;
    let dual_lower = dual.bounds().lower;
    let primary_required = 1.0 / dual.bounds().upper;
    let dual_required = 1.0 / primary.bounds().upper;
    let tol = primary.tol.herm;
    Ok(DualFrameCertificate {
        identity_residual,
        primary_lower,
        primary_required,
        dual_lower,
        dual_required,
        pass: primary_lower >= primary_required - tol && dual_lower >= dual_required - tol,
    })
}
