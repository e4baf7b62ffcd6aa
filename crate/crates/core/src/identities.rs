//! Partial frame operators `S_J` and verification of the equalities and
//! inequalities they satisfy.
//!
//! Two meanings of `S_J` are in use and the API keeps them apart:
//!
//! * [`PartialSource::Coupled`]: for a dual pair, `S_J = sum_{i in J} R_i^L R_i^M`,
//!   which satisfies `S_J + S_{J^c} = Id`;
//! * [`PartialSource::Plain`]: for a single system, `S_J = sum_{i in J} P_i`,
//!   which satisfies `S_J + S_{J^c} = S`.
//!
//! Vector arguments are normalised to unit length before evaluation. Several
//! printed statements square `P_i f` where their derivation squares
//! `P_i^{1/2} f`; those checks report both readings and only the derived one
//! decides `pass`.

use num_complex::Complex64;

use crate::controlled::{check_commutation, ControlledSystem};
use crate::duals::DualPair;
use crate::error::{Error, Result};
use crate::matcore::{self, ComplexMatrix};
use crate::report::{CheckReport, RangeCertificate};

/// An ordered subset `J` of `{0, .., m-1}` and its complement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSplit {
    members: Vec<usize>,
    complement: Vec<usize>,
}

impl IndexSplit {
    /// `members` may be given in any order; duplicates and out-of-range indices are rejected.
    pub fn new(mut members: Vec<usize>, num_blocks: usize) -> Result<Self> {
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::BadSplit("duplicate index".into()));
        }
        if let Some(&i) = members.iter().find(|&&i| i >= num_blocks) {
            return Err(Error::BadSplit(format!(
                "index {i} out of range for {num_blocks} blocks"
            )));
        }
        let complement = (0..num_blocks)
            .filter(|i| members.binary_search(i).is_err())
            .collect();
        Ok(Self {
            members,
            complement,
        })
    }

    /// Split from a bit mask over the blocks.
    pub fn from_mask(mask: u64, num_blocks: usize) -> Result<Self> {
        Self::new(
            (0..num_blocks).filter(|i| mask >> i & 1 == 1).collect(),
            num_blocks,
        )
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn complement(&self) -> &[usize] {
        &self.complement
    }

    pub fn num_blocks(&self) -> usize {
        self.members.len() + self.complement.len()
    }

    pub fn swapped(&self) -> Self {
        Self {
            members: self.complement.clone(),
            complement: self.members.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum PartialSource<'a> {
    Coupled(&'a DualPair),
    Plain(&'a ControlledSystem),
}

impl PartialSource<'_> {
    fn num_blocks(&self) -> usize {
        match self {
            PartialSource::Coupled(p) => p.primary().num_blocks(),
            PartialSource::Plain(s) => s.num_blocks(),
        }
    }

    fn dim(&self) -> usize {
        match self {
            PartialSource::Coupled(p) => p.primary().dim(),
            PartialSource::Plain(s) => s.dim(),
        }
    }

    fn term(&self, i: usize) -> ComplexMatrix {
        match self {
            PartialSource::Coupled(p) => &p.primary().roots()[i] * &p.dual().roots()[i],
            PartialSource::Plain(s) => s.blocks()[i].clone(),
        }
    }
}

fn sum_over(source: PartialSource<'_>, indices: &[usize]) -> ComplexMatrix {
    indices.iter().fold(
        ComplexMatrix::zeros(source.dim(), source.dim()),
        |acc, &i| &acc + &source.term(i),
    )
}

/// `S_J` for the given source.
pub fn s_j(source: PartialSource<'_>, split: &IndexSplit) -> Result<ComplexMatrix> {
    if split.num_blocks() != source.num_blocks() {
        return Err(Error::BadSplit(format!(
            "split covers {} blocks, system has {}",
            split.num_blocks(),
            source.num_blocks()
        )));
    }
    Ok(sum_over(source, split.members()))
}

/// `(S_J, S_{J^c})`.
pub fn s_j_pair(
    source: PartialSource<'_>,
    split: &IndexSplit,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    Ok((s_j(source, split)?, s_j(source, &split.swapped())?))
}

/// Partition and boundedness of the coupled partial operator:
/// `S_J + S_{J^c} = Id` and `||S_J|| <= sqrt(B_L B_M)`.
pub fn partial_operator_check(pair: &DualPair, split: &IndexSplit) -> Result<CheckReport> {
    let tol = pair.primary().tolerances();
    let (sj, sjc) = s_j_pair(PartialSource::Coupled(pair), split)?;
    let n = pair.primary().dim();
    let partition = matcore::op_norm(&(&(&sj + &sjc) - &ComplexMatrix::identity(n)));
    let norm = matcore::op_norm(&sj);
    let bound = (pair.primary().bounds().upper * pair.dual().bounds().upper).sqrt();
    let report = CheckReport::new(
        "partial_operator",
        "S_J + S_Jc = Id and ||S_J|| <= sqrt(B1 B2)",
        tol.dual,
    )
    .with_residual(partition)
    .with_certificate(RangeCertificate::new(
        "||S_J||",
        (norm, norm),
        (0.0, bound),
        tol.herm,
    ))
    .detail("norm", norm)
    .detail("bound", bound);
    Ok(report.finish())
}

fn unit(f: &[Complex64]) -> Vec<Complex64> {
    let n = matcore::norm(f);
    if n > 0.0 {
        matcore::scale_vec(f, 1.0 / n)
    } else {
        f.to_vec()
    }
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn require_parseval(sys: &ControlledSystem) -> Result<()> {
    if sys.is_parseval() {
        Ok(())
    } else {
        let b = sys.bounds();
        Err(Error::NotParseval {
            lower: b.lower,
            upper: b.upper,
        })
    }
}

fn range(m: &ComplexMatrix) -> (f64, f64) {
    matcore::eig_range(&m.hermitian_part()).expect("Hermitian part is Hermitian")
}

/// `sum_J <R^M f, R^L f> - ||S_J f||^2 = sum_Jc conj<R^M f, R^L f> - ||S_Jc f||^2`.
pub fn partial_balance_check(
    pair: &DualPair,
    split: &IndexSplit,
    f: &[Complex64],
) -> Result<CheckReport> {
    let tol = pair.primary().tolerances();
    let f = unit(f);
    let (sj, sjc) = s_j_pair(PartialSource::Coupled(pair), split)?;
    let coupling = |i: usize| {
        matcore::inner(
            &pair.dual().roots()[i].mul_vec(&f),
            &pair.primary().roots()[i].mul_vec(&f),
        )
    };
    let lhs: Complex64 = split
        .members()
        .iter()
        .map(|&i| coupling(i))
        .sum::<Complex64>()
        - norm_sqr(&sj.mul_vec(&f));
    let rhs: Complex64 = split
        .complement()
        .iter()
        .map(|&i| coupling(i).conj())
        .sum::<Complex64>()
        - norm_sqr(&sjc.mul_vec(&f));
    let residual = (lhs - rhs).norm();
    Ok(CheckReport::new(
        "partial_balance",
        "sum_J <R~f, Rf> - ||S_J f||^2 = sum_Jc conj<R~f, Rf> - ||S_Jc f||^2",
        tol.id,
    )
    .with_residual(residual)
    .with_literal(residual, residual <= tol.id)
    .detail("lhs_re", lhs.re)
    .detail("lhs_im", lhs.im)
    .detail("rhs_re", rhs.re)
    .detail("rhs_im", rhs.im)
    .finish())
}

/// Parseval energy balance and its `3/4` lower bound.
pub fn parseval_energy_check(
    sys: &ControlledSystem,
    split: &IndexSplit,
    f: &[Complex64],
) -> Result<CheckReport> {
    require_parseval(sys)?;
    let tol = sys.tolerances();
    let f = unit(f);
    let (sj, sjc) = s_j_pair(PartialSource::Plain(sys), split)?;
    let root_energy = |idx: &[usize]| -> f64 {
        idx.iter()
            .map(|&i| norm_sqr(&sys.roots()[i].mul_vec(&f)))
            .sum()
    };
    let block_energy = |idx: &[usize]| -> f64 {
        idx.iter()
            .map(|&i| norm_sqr(&sys.blocks()[i].mul_vec(&f)))
            .sum()
    };
    let sjf = norm_sqr(&sj.mul_vec(&f));
    let sjcf = norm_sqr(&sjc.mul_vec(&f));

    let (a_j, a_jc) = (
        root_energy(split.members()),
        root_energy(split.complement()),
    );
    let (b_j, b_jc) = (
        block_energy(split.members()),
        block_energy(split.complement()),
    );

    let balance = ((a_j - sjf) - (a_jc - sjcf)).abs();
    let energy = a_j + sjcf;
    let n = sys.dim();
    let q = &(&ComplexMatrix::identity(n) - &sj) + &(&sj * &sj);
    let form = matcore::inner(&q.mul_vec(&f), &f).re;
    let form_residual = (energy - form).abs();
    let lower_violation = (0.75 - energy).max(0.0);

    let literal_balance = ((b_j - sjf) - (b_jc - sjcf)).abs();
    let literal_energy = b_j + sjcf;
    let literal_violation = (0.75 - literal_energy).max(0.0);
    let literal = literal_balance.max(literal_violation);

    Ok(CheckReport::new(
        "parseval_energy",
        "Parseval: sum_J ||P^(1/2) f||^2 - ||S_J f||^2 balances over J^c, and sum_J ||P^(1/2) f||^2 + ||S_Jc f||^2 >= 3/4",
        tol.id,
    )
    .with_residual(balance.max(form_residual).max(lower_violation))
    .with_literal(literal, literal <= tol.id)
    .with_certificate(RangeCertificate::new("I - S_J + S_J^2", range(&q), (0.75, f64::INFINITY), tol.id))
    .detail("energy", energy)
    .detail("literal_energy", literal_energy)
    .detail("balance_residual", balance)
    .detail("literal_balance_residual", literal_balance)
    .finish())
}

/// `0 <= S_J - S_J^2 <= Id/4` for Parseval systems.
pub fn parseval_range_check(sys: &ControlledSystem, split: &IndexSplit) -> Result<CheckReport> {
    require_parseval(sys)?;
    let tol = sys.tolerances();
    let (sj, sjc) = s_j_pair(PartialSource::Plain(sys), split)?;
    let op = &sj - &(&sj * &sj);
    let commutator = matcore::commutator_norm(&sj, &sjc);
    Ok(CheckReport::new(
        "parseval_range",
        "Parseval: 0 <= S_J - S_J^2 <= Id/4",
        tol.id,
    )
    .with_residual(commutator)
    .with_certificate(RangeCertificate::new(
        "S_J - S_J^2",
        range(&op),
        (0.0, 0.25),
        tol.id,
    ))
    .detail("commutator", commutator)
    .finish())
}

/// `0 <= S_J - S_J^2 <= Id/4` and `Id/2 <= S_J^2 + S_Jc^2 <= 3/2 Id` for Parseval systems.
pub fn parseval_square_sum_check(
    sys: &ControlledSystem,
    split: &IndexSplit,
) -> Result<CheckReport> {
    require_parseval(sys)?;
    let tol = sys.tolerances();
    let (sj, sjc) = s_j_pair(PartialSource::Plain(sys), split)?;
    let diff = &sj - &(&sj * &sj);
    let squares = &(&sj * &sj) + &(&sjc * &sjc);
    let sq_range = range(&squares);
    Ok(CheckReport::new(
        "parseval_square_sum",
        "Parseval: 0 <= S_J - S_J^2 <= Id/4 and Id/2 <= S_J^2 + S_Jc^2 <= 3/2 Id",
        tol.id,
    )
    .with_certificate(RangeCertificate::new(
        "S_J - S_J^2",
        range(&diff),
        (0.0, 0.25),
        tol.id,
    ))
    .with_certificate(RangeCertificate::new(
        "S_J^2 + S_Jc^2",
        sq_range,
        (0.5, 1.5),
        tol.id,
    ))
    .with_certificate(RangeCertificate::new(
        "S_J^2 + S_Jc^2 (tight)",
        sq_range,
        (0.5, 1.0),
        tol.id,
    ))
    .finish())
}

/// Quantities shared by the weighted (non-Parseval) checks.
struct Weighted {
    sj: ComplexMatrix,
    sjc: ComplexMatrix,
    w: ComplexMatrix,
    s_inv: ComplexMatrix,
    scale: f64,
}

fn weighted(sys: &ControlledSystem, split: &IndexSplit) -> Result<Weighted> {
    check_commutation(sys)?;
    let (sj, sjc) = s_j_pair(PartialSource::Plain(sys), split)?;
    Ok(Weighted {
        sj,
        sjc,
        w: sys.s_inv_sqrt()?,
        s_inv: sys.s_inverse()?,
        scale: sys.bounds().upper.max(1.0),
    })
}

/// `sum_J ||(S^-1/2 P_i S^-1/2)^(1/2) S^(1/2) f||^2` over `idx`.
fn normalized_root_energy(
    sys: &ControlledSystem,
    wt: &Weighted,
    idx: &[usize],
    f: &[Complex64],
) -> Result<f64> {
    let h = sys.s_sqrt().mul_vec(f);
    let mut total = 0.0;
    for &i in idx {
        let theta = &(&wt.w * &sys.blocks()[i]) * &wt.w;
        let root = matcore::psd_sqrt_with(&theta.hermitian_part(), sys.tolerances())?;
        total += norm_sqr(&root.mul_vec(&h));
    }
    Ok(total)
}

fn weighted_block_energy(
    sys: &ControlledSystem,
    wt: &Weighted,
    idx: &[usize],
    f: &[Complex64],
) -> f64 {
    idx.iter()
        .map(|&i| norm_sqr(&wt.w.mul_vec(&sys.blocks()[i].mul_vec(f))))
        .sum()
}

/// Energy balance weighted by `S^{-1/2}`, for systems whose `S^{-1/2}` commutes with the controllers.
pub fn weighted_energy_check(
    sys: &ControlledSystem,
    split: &IndexSplit,
    f: &[Complex64],
) -> Result<CheckReport> {
    let wt = weighted(sys, split)?;
    let tol = sys.tolerances();
    let f = unit(f);
    let wsjf = norm_sqr(&wt.w.mul_vec(&wt.sj.mul_vec(&f)));
    let wsjcf = norm_sqr(&wt.w.mul_vec(&wt.sjc.mul_vec(&f)));

    let a_j = normalized_root_energy(sys, &wt, split.members(), &f)?;
    let a_jc = normalized_root_energy(sys, &wt, split.complement(), &f)?;
    let proof = ((a_j + wsjcf) - (a_jc + wsjf)).abs() / wt.scale;

    let b_j = weighted_block_energy(sys, &wt, split.members(), &f);
    let b_jc = weighted_block_energy(sys, &wt, split.complement(), &f);
    let literal = ((b_j + wsjcf) - (b_jc + wsjf)).abs() / wt.scale;

    Ok(CheckReport::new(
        "weighted_energy",
        "sum_J ||(S^-1/2 P S^-1/2)^(1/2) S^(1/2) f||^2 + ||S^-1/2 S_Jc f||^2 is symmetric in J, J^c",
        tol.id,
    )
    .with_residual(proof)
    .with_literal(literal, literal <= tol.id)
    .detail("lhs", a_j + wsjcf)
    .detail("rhs", a_jc + wsjf)
    .detail("literal_lhs", b_j + wsjcf)
    .detail("literal_rhs", b_jc + wsjf)
    .finish())
}

/// `0 <= S_J - S_J S^{-1} S_J <= S/4`, certified through the congruent form
/// `S^{-1/2}(S_J - S_J S^{-1} S_J)S^{-1/2} in [0, 1/4]`.
pub fn weighted_range_check(sys: &ControlledSystem, split: &IndexSplit) -> Result<CheckReport> {
    let wt = weighted(sys, split)?;
    let tol = sys.tolerances();
    let inner_op = &wt.sj - &(&(&wt.sj * &wt.s_inv) * &wt.sj);
    let congruent = &(&wt.w * &inner_op) * &wt.w;
    let quarter_gap = &sys.frame_operator().scale_real(0.25) - &inner_op;
    let (lo, _) = range(&inner_op);
    let (gap_lo, _) = range(&quarter_gap);
    let literal = (-lo).max(-gap_lo).max(0.0) / wt.scale;
    Ok(
        CheckReport::new("weighted_range", "0 <= S_J - S_J S^-1 S_J <= S/4", tol.id)
            .with_literal(literal, literal <= tol.id)
            .with_certificate(RangeCertificate::new(
                "S^-1/2 (S_J - S_J S^-1 S_J) S^-1/2",
                range(&congruent),
                (0.0, 0.25),
                tol.id,
            ))
            .finish(),
    )
}

/// Weighted energy lower bound `>= 3/4 lambda_min(S) ||f||^2`; the printed
/// `3/4 lambda_min(S)^{1/2}` bound is evaluated alongside.
pub fn weighted_lower_bound_check(
    sys: &ControlledSystem,
    split: &IndexSplit,
    f: &[Complex64],
) -> Result<CheckReport> {
    let wt = weighted(sys, split)?;
    let tol = sys.tolerances();
    let f = unit(f);
    let lmin = sys.bounds().lower;
    let wsjcf = norm_sqr(&wt.w.mul_vec(&wt.sjc.mul_vec(&f)));
    let energy = normalized_root_energy(sys, &wt, split.members(), &f)? + wsjcf;
    let literal_energy = weighted_block_energy(sys, &wt, split.members(), &f) + wsjcf;
    let proof_bound = 0.75 * lmin;
    let printed_bound = 0.75 * lmin.sqrt();

    let violation = (proof_bound - energy).max(0.0) / wt.scale;
    let literal_violation = (printed_bound - literal_energy).max(0.0) / wt.scale;

    // S_J + S_Jc S^-1 S_Jc = S^(1/2)(I - X + X^2)S^(1/2) >= 3/4 S
    let m = &wt.sj + &(&(&wt.sjc * &wt.s_inv) * &wt.sjc);
    let (mlo, mhi) = range(&m);
    Ok(CheckReport::new(
        "weighted_lower_bound",
        "sum_J ||(S^-1/2 P S^-1/2)^(1/2) S^(1/2) f||^2 + ||S^-1/2 S_Jc f||^2 >= 3/4 lambda_min(S)",
        tol.id,
    )
    .with_residual(violation)
    .with_literal(literal_violation, literal_violation <= tol.id)
    .with_certificate(RangeCertificate::new(
        "S_J + S_Jc S^-1 S_Jc",
        (mlo / wt.scale, mhi / wt.scale),
        (proof_bound / wt.scale, f64::INFINITY),
        tol.id,
    ))
    .detail("energy", energy)
    .detail("literal_energy", literal_energy)
    .detail("bound_lambda_min", proof_bound)
    .detail("bound_sqrt_lambda_min", printed_bound)
    .detail("energy_minus_sqrt_bound", energy - printed_bound)
    .detail("literal_minus_lambda_bound", literal_energy - proof_bound)
    .finish())
}

/// Extremal value of `<(a u^2 + b u + c) f, f>` on the unit sphere against `(4ac - b^2) / 4a`.
pub fn lemma_quadratic_bound(u: &ComplexMatrix, a: f64, b: f64, c: f64) -> Result<CheckReport> {
    lemma_quadratic_bound_with(u, a, b, c, crate::tol::Tolerances::default().id)
}

pub fn lemma_quadratic_bound_with(
    u: &ComplexMatrix,
    a: f64,
    b: f64,
    c: f64,
    tol: f64,
) -> Result<CheckReport> {
    if a == 0.0 {
        return Err(Error::ZeroLeadingCoefficient);
    }
    let eig = matcore::herm_eig(u)?;
    let values: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&l| a * l * l + b * l + c)
        .collect();
    let n = u.rows();
    let v =
        &(&(u * u).scale_real(a) + &u.scale_real(b)) + &ComplexMatrix::identity(n).scale_real(c);
    let (vlo, vhi) = range(&v);
    let bound = (4.0 * a * c - b * b) / (4.0 * a);
    let scale = values.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let (extremal, matrix_extremal, cert) = if a > 0.0 {
        let inf = values.iter().copied().fold(f64::INFINITY, f64::min);
        (
            inf,
            vlo,
            RangeCertificate::new(
                "a u^2 + b u + c",
                (vlo, vhi),
                (bound, f64::INFINITY),
                tol * scale,
            ),
        )
    } else {
        let sup = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (
            sup,
            vhi,
            RangeCertificate::new(
                "a u^2 + b u + c",
                (vlo, vhi),
                (f64::NEG_INFINITY, bound),
                tol * scale,
            ),
        )
    };
    let route_gap = (extremal - matrix_extremal).abs() / scale;
    Ok(CheckReport::new(
        "quadratic_bound",
        "a>0: inf <vf,f> >= (4ac-b^2)/4a; a<0: sup <= (4ac-b^2)/4a",
        tol,
    )
    .with_residual(route_gap)
    .with_certificate(cert)
    .detail("extremal", extremal)
    .detail("bound", bound)
    .finish())
}

/// `u + v = Id` implies `u - v = u^2 - v^2`.
pub fn lemma_sum_identity(u: &ComplexMatrix, v: &ComplexMatrix) -> Result<CheckReport> {
    lemma_sum_identity_with(u, v, 1e-12)
}

pub fn lemma_sum_identity_with(
    u: &ComplexMatrix,
    v: &ComplexMatrix,
    tol: f64,
) -> Result<CheckReport> {
    if !u.is_square() || u.rows() != v.rows() || u.cols() != v.cols() {
        return Err(Error::DimensionMismatch(
            "u and v must be square of the same size".into(),
        ));
    }
    let n = u.rows();
    let scale = matcore::op_norm(u).max(matcore::op_norm(v)).max(1.0);
    let partition = matcore::op_norm(&(&(u + v) - &ComplexMatrix::identity(n)));
    if partition > crate::tol::Tolerances::default().herm * scale {
        return Err(Error::NotAPartition {
            residual: partition,
        });
    }
    let lhs = u - v;
    let rhs = &(u * u) - &(v * v);
    let residual = matcore::op_norm(&(&lhs - &rhs)) / (scale * scale);
    Ok(
        CheckReport::new("sum_identity", "u + v = Id implies u - v = u^2 - v^2", tol)
            .with_residual(residual)
            .finish(),
    )
}
