//! Numerical tolerances shared by every module.
//!
//! All values are sized for double precision at ambient dimension up to 64.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative Hermitian / reconstruction tolerance for eigen and product checks.
    pub herm: f64,
    /// Negative eigenvalues down to `-psd * ||M||` are treated as zero.
    pub psd: f64,
    /// Singular values below `rank * sigma_max` count as zero.
    pub rank: f64,
    /// Lower frame bound at or below this value means "not a frame".
    pub bound: f64,
    /// Controllers need `sigma_min > inv * sigma_max`.
    pub inv: f64,
    /// Relative commutator tolerance for `[S^{-1/2}, C]`.
    pub comm: f64,
    /// Identity residual accepted for dual pairs.
    pub dual: f64,
    /// Relative reconstruction residual.
    pub recon: f64,
    /// Deviation of both bounds from 1 accepted for a Parseval system.
    pub parseval: f64,
    /// Pythagorean identity residual on unit-normalized input.
    pub pyth: f64,
    /// Operator identity residual on unit-normalized input.
    pub id: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            psd: 1e-8,
            rank: 1e-12,
            bound: 1e-10,
            inv: 1e-12,
            comm: 1e-8,
            dual: 1e-8,
            recon: 1e-9,
            parseval: 1e-8,
            pyth: 1e-10,
            id: 1e-10,
        }
    }
}
