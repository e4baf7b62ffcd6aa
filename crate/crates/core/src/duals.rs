//! Controlled g-dual pairs and the canonical controlled dual.
//!
//! The canonical dual is only defined for a symmetric controller pair
//! `C = C'`; its frame operator is written `S_C` and equals `S_{CC}`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::controlled::{self, ControlledSystem};
use crate::error::{Error, Result};
use crate::gframes::{self, CoefficientSequence, FrameBounds, GFrameFamily};
use crate::matcore::{self, ComplexMatrix, ZERO};

/// Residuals of the equivalent duality conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualityResiduals {
    /// `||T_L T_M* - I||`.
    pub primary_first: f64,
    /// `||T_M T_L* - I||`.
    pub dual_first: f64,
    /// `||[<T_M* e_k, T_L* e_j>] - I||`.
    pub gram: f64,
    /// Largest `||e_k - sum_i R_i^L R_i^M e_k||` over the standard basis.
    pub expansion: f64,
}

impl DualityResiduals {
    pub fn max(&self) -> f64 {
        self.primary_first
            .max(self.dual_first)
            .max(self.gram)
            .max(self.expansion)
    }

    /// Whether all four conditions agree on pass/fail at `tol`.
    pub fn consistent(&self, tol: f64) -> bool {
        let v = [
            self.primary_first,
            self.dual_first,
            self.gram,
            self.expansion,
        ];
        v.iter().all(|&r| r <= tol) || v.iter().all(|&r| r > tol)
    }
}

/// Evaluates all duality conditions without requiring them to hold.
pub fn duality_residuals(
    primary: &ControlledSystem,
    dual: &ControlledSystem,
) -> Result<DualityResiduals> {
    let n = primary.dim();
    let id = ComplexMatrix::identity(n);
    let forward = controlled::mixed_product(primary, dual)?;
    let backward = controlled::mixed_product(dual, primary)?;

    let basis: Vec<Vec<Complex64>> = (0..n).map(|k| id.col(k)).collect();
    let an_primary: Vec<CoefficientSequence> = basis
        .iter()
        .map(|e| controlled::controlled_analysis(primary, e))
        .collect::<Result<_>>()?;
    let an_dual: Vec<CoefficientSequence> = basis
        .iter()
        .map(|e| controlled::controlled_analysis(dual, e))
        .collect::<Result<_>>()?;
    let gram = ComplexMatrix::from_fn(n, n, |j, k| an_dual[k].inner(&an_primary[j]));

    let mut expansion = 0.0f64;
    for e in &basis {
        let mut acc = vec![ZERO; n];
        for (rl, rm) in primary.roots().iter().zip(dual.roots()) {
            for (a, v) in acc.iter_mut().zip(rl.mul_vec(&rm.mul_vec(e))) {
                *a += v;
            }
        }
        expansion = expansion.max(matcore::norm(&matcore::sub_vec(e, &acc)));
    }

    Ok(DualityResiduals {
        primary_first: matcore::op_norm(&(&forward - &id)),
        dual_first: matcore::op_norm(&(&backward - &id)),
        gram: matcore::op_norm(&(&gram - &id)),
        expansion,
    })
}

/// A verified controlled g-dual pair.
#[derive(Debug, Clone)]
pub struct DualPair {
    primary: ControlledSystem,
    dual: ControlledSystem,
    residuals: DualityResiduals,
}

impl DualPair {
    pub fn primary(&self) -> &ControlledSystem {
        &self.primary
    }

    pub fn dual(&self) -> &ControlledSystem {
        &self.dual
    }

    pub fn identity_residual(&self) -> f64 {
        self.residuals.primary_first
    }

    pub fn residuals(&self) -> &DualityResiduals {
        &self.residuals
    }

    /// A Parseval system paired with itself.
    pub fn self_dual(sys: &ControlledSystem) -> Result<Self> {
        check_dual_pair(sys, sys)
    }
}

pub fn check_dual_pair(primary: &ControlledSystem, dual: &ControlledSystem) -> Result<DualPair> {
    let residuals = duality_residuals(primary, dual)?;
    if residuals.max() > primary.tolerances().dual {
        return Err(Error::NotADualPair {
            residual: residuals.primary_first.max(residuals.max()),
        });
    }
    Ok(DualPair {
        primary: primary.clone(),
        dual: dual.clone(),
        residuals,
    })
}

/// `Gamma_i = L_i C S_C^{-1}` together with its source system.
#[derive(Debug, Clone)]
pub struct CanonicalDual {
    gamma: GFrameFamily,
    source: ControlledSystem,
    /// `||sum_i C* L_i* Gamma_i - I||`.
    pub synthesis_residual: f64,
    /// `||sum_i Gamma_i* L_i C - I||`.
    pub analysis_residual: f64,
}

impl CanonicalDual {
    pub fn gamma(&self) -> &GFrameFamily {
        &self.gamma
    }

    pub fn source(&self) -> &ControlledSystem {
        &self.source
    }

    /// `{L_i C}`, the family whose adjoints synthesise with controller `C`.
    pub fn controlled_family(&self) -> GFrameFamily {
        self.source
            .family()
            .right_multiplied(self.source.pair().c())
    }

    /// `{Gamma_i f}`.
    pub fn canonical_coefficients(&self, f: &[Complex64]) -> Result<CoefficientSequence> {
        gframes::analysis(&self.gamma, f)
    }

    /// `sum_i C* L_i* g_i`.
    pub fn synthesize(&self, g: &CoefficientSequence) -> Result<Vec<Complex64>> {
        gframes::synthesis(&self.controlled_family(), g)
    }
}

pub fn canonical_dual(sys: &ControlledSystem) -> Result<CanonicalDual> {
    if !sys.pair().is_symmetric() {
        return Err(Error::ControllersDiffer);
    }
    let s_inv = sys.s_inverse()?;
    let c = sys.pair().c();
    let c_sinv = c * &s_inv;
    let gamma = sys.family().right_multiplied(&c_sinv);
    let n = sys.dim();
    let id = ComplexMatrix::identity(n);
    let c_adj = c.adjoint();
    let mut syn = ComplexMatrix::zeros(n, n);
    let mut ana = ComplexMatrix::zeros(n, n);
    for (l, g) in sys.family().operators().iter().zip(gamma.operators()) {
        syn = &syn + &(&(&c_adj * &l.adjoint()) * g);
        ana = &ana + &(&(&g.adjoint() * l) * c);
    }
    Ok(CanonicalDual {
        gamma,
        source: sys.clone(),
        synthesis_residual: matcore::op_norm(&(&syn - &id)),
        analysis_residual: matcore::op_norm(&(&ana - &id)),
    })
}

/// Frame bounds of the canonical dual against the interval `[1/B, 1/A]`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DualBoundsCertificate {
    pub bounds: FrameBounds,
    pub required_lower: f64,
    pub required_upper: f64,
    pub pass: bool,
}

pub fn canonical_dual_bounds(cd: &CanonicalDual) -> DualBoundsCertificate {
    let bounds = gframes::frame_bounds(cd.gamma());
    let src = cd.source().bounds();
    let required_lower = 1.0 / src.upper;
    let required_upper = 1.0 / src.lower;
    let tol = cd.source().tolerances().herm;
    DualBoundsCertificate {
        bounds,
        required_lower,
        required_upper,
        pass: bounds.lower >= required_lower - tol && bounds.upper <= required_upper + tol,
    }
}

/// Pythagorean decomposition of an arbitrary representation of `f`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MinimalNormReport {
    /// `sum ||g_i||^2`.
    pub coefficient_energy: f64,
    /// `sum ||Gamma_i f||^2`.
    pub canonical_energy: f64,
    /// `sum ||g_i - Gamma_i f||^2`.
    pub deviation_energy: f64,
    /// `|coefficient - canonical - deviation|`, divided by `||f||^2` when `f != 0`.
    pub pythagorean_residual: f64,
    /// `coefficient - canonical`, same normalisation; never below `-pyth_tol`.
    pub excess: f64,
    pub pass: bool,
}

pub fn minimal_norm_check(
    cd: &CanonicalDual,
    f: &[Complex64],
    g: &CoefficientSequence,
) -> Result<MinimalNormReport> {
    let tol = cd.source().tolerances();
    let fnorm = matcore::norm(f);
    let synthesized = cd.synthesize(g)?;
    let rep_residual = matcore::norm(&matcore::sub_vec(&synthesized, f));
    if rep_residual > tol.recon * fnorm.max(1.0) {
        return Err(Error::NotARepresentation {
            residual: rep_residual,
        });
    }
    let canon = cd.canonical_coefficients(f)?;
    let coefficient_energy = g.norm_sqr();
    let canonical_energy = canon.norm_sqr();
    let deviation_energy = g.sub(&canon).norm_sqr();
    let scale = if fnorm > 0.0 { fnorm * fnorm } else { 1.0 };
    let pythagorean_residual =
        (coefficient_energy - canonical_energy - deviation_energy).abs() / scale;
    let excess = (coefficient_energy - canonical_energy) / scale;
    Ok(MinimalNormReport {
        coefficient_energy,
        canonical_energy,
        deviation_energy,
        pythagorean_residual,
        excess,
        pass: pythagorean_residual <= tol.pyth && excess >= -tol.pyth,
    })
}

/// `g = {Gamma_i f} + h` with `h` a seeded random element of the kernel of
/// `g -> sum_i C* L_i* g_i`.
pub fn random_decomposition(
    cd: &CanonicalDual,
    f: &[Complex64],
    seed: u64,
) -> Result<CoefficientSequence> {
    let canon = cd.canonical_coefficients(f)?;
    let stacked = cd.controlled_family().block_column();
    let synth = stacked.adjoint();
    let dim = synth.cols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z: Vec<Complex64> = (0..dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            Complex64::new(re, im)
        })
        .collect();
    let p = matcore::pinv_with(&synth, cd.source().tolerances().rank);
    let h = matcore::sub_vec(&z, &p.mul_vec(&synth.mul_vec(&z)));
    let h = if matcore::norm(&h) <= 1e-12 * matcore::norm(&z) {
        vec![ZERO; dim]
    } else {
        h
    };
    let space = canon.space().clone();
    let mut blocks = Vec::with_capacity(space.num_blocks());
    let mut off = 0;
    for (cb, &d) in canon.blocks().iter().zip(space.block_dims()) {
        blocks.push(matcore::add_vec(cb, &h[off..off + d]));
        off += d;
    }
    CoefficientSequence::new(space, blocks)
}
