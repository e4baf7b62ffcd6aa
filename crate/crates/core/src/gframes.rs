//! Classical g-frames: a finite ordered family of operators `L_i : H -> H_i`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::controlled::ControllerPair;
use crate::error::{Error, Result};
use crate::matcore::{self, ComplexMatrix, ZERO};

/// Dimensions of `H` and of each `H_i`, in index order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpace {
    ambient_dim: usize,
    block_dims: Vec<usize>,
}

impl BlockSpace {
    pub fn new(ambient_dim: usize, block_dims: Vec<usize>) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::BadParams(
                "ambient dimension must be positive".into(),
            ));
        }
        if block_dims.contains(&0) {
            return Err(Error::BadParams("block dimensions must be positive".into()));
        }
        Ok(Self {
            ambient_dim,
            block_dims,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.block_dims.iter().sum()
    }
}

/// An element `{g_i}` of the direct sum of the `H_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSequence {
    space: BlockSpace,
    blocks: Vec<Vec<Complex64>>,
}

impl CoefficientSequence {
    pub fn new(space: BlockSpace, blocks: Vec<Vec<Complex64>>) -> Result<Self> {
        if blocks.len() != space.num_blocks()
            || blocks
                .iter()
                .zip(space.block_dims())
                .any(|(b, &d)| b.len() != d)
        {
            return Err(Error::SpaceMismatch(
                "block lengths do not match the block space".into(),
            ));
        }
        Ok(Self { space, blocks })
    }

    pub fn zeros(space: &BlockSpace) -> Self {
        let blocks = space.block_dims().iter().map(|&d| vec![ZERO; d]).collect();
        Self {
            space: space.clone(),
            blocks,
        }
    }

    pub fn space(&self) -> &BlockSpace {
        &self.space
    }

    pub fn blocks(&self) -> &[Vec<Complex64>] {
        &self.blocks
    }

    pub fn into_blocks(self) -> Vec<Vec<Complex64>> {
        self.blocks
    }

    /// `sum_i ||g_i||^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.blocks
            .iter()
            .flat_map(|b| b.iter())
            .map(|z| z.norm_sqr())
            .sum()
    }

    pub fn inner(&self, other: &Self) -> Complex64 {
        self.blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| matcore::inner(a, b))
            .sum()
    }

    pub fn sub(&self, other: &Self) -> Self {
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| matcore::sub_vec(a, b))
            .collect();
        Self {
            space: self.space.clone(),
            blocks,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| matcore::add_vec(a, b))
            .collect();
        Self {
            space: self.space.clone(),
            blocks,
        }
    }

    /// All blocks concatenated in index order.
    pub fn flatten(&self) -> Vec<Complex64> {
        self.blocks.iter().flatten().copied().collect()
    }
}

/// The family `{L_i}` with `L_i` of shape `d_i x n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GFrameFamily {
    space: BlockSpace,
    operators: Vec<ComplexMatrix>,
}

impl GFrameFamily {
    pub fn new(ambient_dim: usize, operators: Vec<ComplexMatrix>) -> Result<Self> {
        if operators.is_empty() {
            return Err(Error::BadParams(
                "a family needs at least one operator".into(),
            ));
        }
        if let Some((i, op)) = operators
            .iter()
            .enumerate()
            .find(|(_, op)| op.cols() != ambient_dim)
        {
            return Err(Error::DimensionMismatch(format!(
                "operator {i} has {} columns, ambient dimension is {ambient_dim}",
                op.cols()
            )));
        }
        let space = BlockSpace::new(ambient_dim, operators.iter().map(|op| op.rows()).collect())?;
        Ok(Self { space, operators })
    }

    pub fn space(&self) -> &BlockSpace {
        &self.space
    }

    pub fn ambient_dim(&self) -> usize {
        self.space.ambient_dim()
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    /// `{L_i M}` for an `n x n` matrix `M`.
    pub fn right_multiplied(&self, m: &ComplexMatrix) -> Self {
        Self {
            space: self.space.clone(),
            operators: self.operators.iter().map(|op| op * m).collect(),
        }
    }

    /// Family with one more operator appended.
    pub fn appended(&self, op: ComplexMatrix) -> Result<Self> {
        let mut ops = self.operators.clone();
        ops.push(op);
        Self::new(self.ambient_dim(), ops)
    }

    /// The stacked analysis matrix `[L_1; ...; L_m]`.
    pub fn block_column(&self) -> ComplexMatrix {
        ComplexMatrix::vstack(&self.operators).expect("operators share the ambient dimension")
    }
}

/// `T g = sum_i L_i* g_i`.
pub fn synthesis(family: &GFrameFamily, g: &CoefficientSequence) -> Result<Vec<Complex64>> {
    if g.space() != family.space() {
        return Err(Error::SpaceMismatch(
            "coefficients do not live in the family's block space".into(),
        ));
    }
    let mut out = vec![ZERO; family.ambient_dim()];
    for (op, gi) in family.operators().iter().zip(g.blocks()) {
        for (o, v) in out.iter_mut().zip(op.adjoint_mul_vec(gi)) {
            *o += v;
        }
    }
    Ok(out)
}

/// `T* f = {L_i f}`.
pub fn analysis(family: &GFrameFamily, f: &[Complex64]) -> Result<CoefficientSequence> {
    if f.len() != family.ambient_dim() {
        return Err(Error::SpaceMismatch(format!(
            "vector of length {} in a space of dimension {}",
            f.len(),
            family.ambient_dim()
        )));
    }
    let blocks = family.operators().iter().map(|op| op.mul_vec(f)).collect();
    CoefficientSequence::new(family.space().clone(), blocks)
}

/// `S = sum_i L_i* L_i`.
pub fn frame_operator(family: &GFrameFamily) -> ComplexMatrix {
    let s = matcore::sum_matrices(
        family
            .operators()
            .iter()
            .map(|op| &op.adjoint() * op)
            .collect::<Vec<_>>()
            .iter(),
    )
    .expect("non-empty family");
    s.hermitian_part()
}

/// Optimal frame bounds: extremal eigenvalues of the frame operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub lower: f64,
    pub upper: f64,
}

impl FrameBounds {
    pub fn is_frame(&self, bound_tol: f64) -> bool {
        self.lower > bound_tol
    }

    pub fn condition_number(&self) -> f64 {
        self.upper / self.lower
    }
}

pub fn frame_bounds(family: &GFrameFamily) -> FrameBounds {
    let (lower, upper) =
        matcore::eig_range(&frame_operator(family)).expect("frame operator is Hermitian");
    FrameBounds { lower, upper }
}

/// Realises a vector family `{f_i}` with controller `C` as a controlled g-frame
/// with one-dimensional blocks `L_i f = <f, f_i>`.
///
/// The controller pair is `(C*, Id)`, which makes the controlled operator equal
/// `sum_i <., f_i> C f_i`; for Hermitian `C` this is the pair `(C, Id)`.
pub fn from_vector_frame(
    vectors: &[Vec<Complex64>],
    c: &ComplexMatrix,
) -> Result<(GFrameFamily, ControllerPair)> {
    let n = c.rows();
    if !c.is_square() {
        return Err(Error::DimensionMismatch("controller must be square".into()));
    }
    if let Some(v) = vectors.iter().find(|v| v.len() != n) {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for a controller of size {n}",
            v.len()
        )));
    }
    let ops = vectors
        .iter()
        .map(|v| ComplexMatrix::column(v).adjoint())
        .collect();
    let family = GFrameFamily::new(n, ops)?;
    let pair = ControllerPair::new(c.adjoint(), ComplexMatrix::identity(n))?;
    Ok((family, pair))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn two_identities() -> GFrameFamily {
        GFrameFamily::new(
            2,
            vec![ComplexMatrix::identity(2), ComplexMatrix::identity(2)],
        )
        .unwrap()
    }

    fn coordinate_rows() -> GFrameFamily {
        GFrameFamily::new(
            2,
            vec![
                ComplexMatrix::from_real_rows(&[&[1.0, 0.0]]),
                ComplexMatrix::from_real_rows(&[&[0.0, 1.0]]),
            ],
        )
        .unwrap()
    }

    #[test]
    fn synthesis_examples() {
        let fam = two_identities();
        let f = vec![c(1.0, 2.0), c(-3.0, 0.5)];
        let g = CoefficientSequence::new(fam.space().clone(), vec![f.clone(), f.clone()]).unwrap();
        let out = synthesis(&fam, &g).unwrap();
        assert_eq!(out, vec![c(2.0, 4.0), c(-6.0, 1.0)]);

        let zero = CoefficientSequence::zeros(fam.space());
        assert_eq!(synthesis(&fam, &zero).unwrap(), vec![ZERO; 2]);

        let fam = coordinate_rows();
        let g = CoefficientSequence::new(
            fam.space().clone(),
            vec![vec![c(5.0, 1.0)], vec![c(-2.0, 0.0)]],
        )
        .unwrap();
        assert_eq!(
            synthesis(&fam, &g).unwrap(),
            vec![c(5.0, 1.0), c(-2.0, 0.0)]
        );
    }

    #[test]
    fn synthesis_rejects_foreign_space() {
        let fam = two_identities();
        let other = coordinate_rows();
        let g = CoefficientSequence::zeros(other.space());
        assert!(matches!(synthesis(&fam, &g), Err(Error::SpaceMismatch(_))));
        assert!(matches!(
            analysis(&fam, &[ZERO; 3]),
            Err(Error::SpaceMismatch(_))
        ));
    }

    #[test]
    fn analysis_examples() {
        let fam = two_identities();
        let f = vec![c(1.0, -1.0), c(0.0, 2.0)];
        let a = analysis(&fam, &f).unwrap();
        assert_eq!(a.blocks(), &[f.clone(), f.clone()]);
        let a = analysis(&fam, &[ZERO; 2]).unwrap();
        assert_eq!(a.norm_sqr(), 0.0);
    }

    #[test]
    fn frame_operator_examples() {
        let s = frame_operator(&two_identities());
        assert_eq!(s, ComplexMatrix::from_diag(&[2.0, 2.0]));
        let s = frame_operator(&coordinate_rows());
        assert_eq!(s, ComplexMatrix::identity(2));
    }

    #[test]
    fn bounds_examples() {
        let b = frame_bounds(&two_identities());
        assert_abs_diff_eq!(b.lower, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.upper, 2.0, epsilon = 1e-14);

        let single =
            GFrameFamily::new(2, vec![ComplexMatrix::from_real_rows(&[&[1.0, 0.0]])]).unwrap();
        let b = frame_bounds(&single);
        assert_abs_diff_eq!(b.lower, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.upper, 1.0, epsilon = 1e-14);
        assert!(!b.is_frame(1e-10));
    }

    #[test]
    fn family_shape_validation() {
        assert!(GFrameFamily::new(3, vec![ComplexMatrix::identity(2)]).is_err());
        assert!(GFrameFamily::new(2, vec![]).is_err());
    }

    #[test]
    fn vector_frame_orthonormal_basis() {
        let basis = vec![vec![c(1.0, 0.0), ZERO], vec![ZERO, c(1.0, 0.0)]];
        let (fam, pair) = from_vector_frame(&basis, &ComplexMatrix::identity(2)).unwrap();
        assert_eq!(fam.space().block_dims(), &[1, 1]);
        assert_eq!(pair.c(), &ComplexMatrix::identity(2));
        let b = frame_bounds(&fam);
        assert_abs_diff_eq!(b.lower, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b.upper, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn vector_frame_dimension_mismatch() {
        let bad = vec![vec![c(1.0, 0.0)]];
        assert!(matches!(
            from_vector_frame(&bad, &ComplexMatrix::identity(2)),
            Err(Error::DimensionMismatch(_))
        ));
    }
}
