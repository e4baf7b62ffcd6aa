//! Seeded instance generators.
//!
//! Each kind constructs its hypotheses directly instead of sampling and
//! rejecting: commutation, Parseval normalisation and duality all hold by
//! construction. Output depends only on `(kind, n, m, seed)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::controlled::{build_system, parseval_normalize, ControllerPair};
use crate::error::{Error, Result};
use crate::gframes::{frame_operator, GFrameFamily};
use crate::instance::{FrameInstanceFile, Metadata};
use crate::matcore::{self, ComplexMatrix};

pub const MAX_DIM: usize = 64;
pub const MAX_BLOCKS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneratorKind {
    Generic,
    Parseval,
    Commuting,
    IllConditioned { kappa: f64 },
    DualPair,
}

impl GeneratorKind {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorKind::Generic => "generic",
            GeneratorKind::Parseval => "parseval",
            GeneratorKind::Commuting => "commuting",
            GeneratorKind::IllConditioned { .. } => "ill_conditioned",
            GeneratorKind::DualPair => "dual_pair",
        }
    }

    /// Every kind, with `kappa` for the ill-conditioned one.
    pub fn all(kappa: f64) -> [GeneratorKind; 5] {
        [
            GeneratorKind::Generic,
            GeneratorKind::Parseval,
            GeneratorKind::Commuting,
            GeneratorKind::IllConditioned { kappa },
            GeneratorKind::DualPair,
        ]
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    /// Parses a kind name; `ill_conditioned` gets `kappa = 1e4` unless set afterwards.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "generic" => Ok(GeneratorKind::Generic),
            "parseval" => Ok(GeneratorKind::Parseval),
            "commuting" => Ok(GeneratorKind::Commuting),
            "ill_conditioned" => Ok(GeneratorKind::IllConditioned { kappa: 1e4 }),
            "dual_pair" => Ok(GeneratorKind::DualPair),
            other => Err(Error::BadParams(format!(
                "unknown generator kind {other:?}"
            ))),
        }
    }
}

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_normal(rng))
}

fn unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let q = gaussian(rng, n, n).to_nalgebra().qr().q();
    ComplexMatrix::from_nalgebra(&q)
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

fn check_params(n: usize, m: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::BadParams(format!(
            "dimension {n} outside 1..={MAX_DIM}"
        )));
    }
    if m == 0 || m > MAX_BLOCKS {
        return Err(Error::BadParams(format!(
            "block count {m} outside 1..={MAX_BLOCKS}"
        )));
    }
    Ok(())
}

fn generic_family(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Result<GFrameFamily> {
    let min_rows = n.div_ceil(m).max(1);
    let ops = (0..m)
        .map(|_| {
            let d = rng.random_range(min_rows..=n);
            gaussian(rng, d, n)
        })
        .collect();
    GFrameFamily::new(n, ops)
}

fn metadata(kind: GeneratorKind, seed: u64) -> Metadata {
    Metadata {
        seed,
        generator_name: kind.name().to_string(),
        kappa: match kind {
            GeneratorKind::IllConditioned { kappa } => Some(kappa),
            _ => None,
        },
    }
}

/// Generates an instance of `kind` with ambient dimension `n` and `m` blocks.
pub fn generate(kind: GeneratorKind, n: usize, m: usize, seed: u64) -> Result<FrameInstanceFile> {
    check_params(n, m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let meta = metadata(kind, seed);
    match kind {
        GeneratorKind::Generic => {
            let family = generic_family(&mut rng, n, m)?;
            let q1 = unitary(&mut rng, n);
            let q2 = unitary(&mut rng, n);
            let c = &(&q1 * &ComplexMatrix::from_diag(&uniform(&mut rng, n, 0.5, 2.0))) * &q2;
            let sys = build_system(family, ControllerPair::new(c.clone(), c)?)?;
            FrameInstanceFile::from_system(&sys, None, meta)
        }
        GeneratorKind::Parseval => {
            let family = generic_family(&mut rng, n, m)?;
            let v = matcore::herm_eig(&frame_operator(&family))?.eigenvectors;
            let d = ComplexMatrix::from_diag(&uniform(&mut rng, n, 0.5, 2.0));
            let c = (&(&v * &d) * &v.adjoint()).hermitian_part();
            let sys = build_system(family, ControllerPair::new(c.clone(), c)?)?;
            let normalized = parseval_normalize(&sys)?;
            FrameInstanceFile::from_system(&normalized, None, meta)
        }
        GeneratorKind::Commuting => {
            let ops = (0..m)
                .map(|_| ComplexMatrix::from_diag(&uniform(&mut rng, n, 0.2, 2.0)))
                .collect();
            let c = ComplexMatrix::from_diag(&uniform(&mut rng, n, 0.5, 2.0));
            let cp = ComplexMatrix::from_diag(&uniform(&mut rng, n, 0.5, 2.0));
            let sys = build_system(GFrameFamily::new(n, ops)?, ControllerPair::new(c, cp)?)?;
            FrameInstanceFile::from_system(&sys, None, meta)
        }
        GeneratorKind::IllConditioned { kappa } => {
            if !(kappa >= 1.0 && kappa.is_finite()) {
                return Err(Error::BadParams(format!(
                    "kappa must be finite and >= 1, got {kappa}"
                )));
            }
            if n == 1 && kappa != 1.0 {
                return Err(Error::BadParams("kappa > 1 needs dimension >= 2".into()));
            }
            let spectrum: Vec<f64> = (0..n)
                .map(|j| {
                    if n == 1 {
                        1.0
                    } else {
                        kappa.powf(j as f64 / (n - 1) as f64)
                    }
                })
                .collect();
            let weights: Vec<Vec<f64>> = (0..m).map(|_| uniform(&mut rng, n, 0.1, 1.0)).collect();
            let ops = (0..m)
                .map(|i| {
                    let diag: Vec<f64> = (0..n)
                        .map(|j| {
                            let total: f64 = weights.iter().map(|w| w[j]).sum();
                            (spectrum[j] * weights[i][j] / total).sqrt()
                        })
                        .collect();
                    ComplexMatrix::from_diag(&diag)
                })
                .collect();
            let sys = build_system(GFrameFamily::new(n, ops)?, ControllerPair::identity(n))?;
            FrameInstanceFile::from_system(&sys, None, meta)
        }
        GeneratorKind::DualPair => {
            let u = unitary(&mut rng, n);
            let cdiag = uniform(&mut rng, n, 0.5, 2.0);
            let c = (&(&u.adjoint() * &ComplexMatrix::from_diag(&cdiag)) * &u).hermitian_part();
            let p: Vec<Vec<f64>> = (0..m).map(|_| uniform(&mut rng, n, 0.2, 2.0)).collect();
            let totals: Vec<f64> = (0..n).map(|j| p.iter().map(|pi| pi[j]).sum()).collect();
            let mut lam = Vec::with_capacity(m);
            let mut theta = Vec::with_capacity(m);
            for pi in &p {
                let q: Vec<f64> = pi.iter().zip(&totals).map(|(x, t)| x / (t * t)).collect();
                for (weights, out) in [(pi, &mut lam), (&q, &mut theta)] {
                    let w = unitary(&mut rng, n);
                    let d: Vec<f64> = weights
                        .iter()
                        .zip(&cdiag)
                        .map(|(x, cj)| x.sqrt() / cj)
                        .collect();
                    out.push(&(&w * &ComplexMatrix::from_diag(&d)) * &u);
                }
            }
            let pair = ControllerPair::new(c.clone(), c)?;
            let primary = build_system(GFrameFamily::new(n, lam)?, pair.clone())?;
            let dual = build_system(GFrameFamily::new(n, theta)?, pair)?;
            FrameInstanceFile::from_system(&primary, Some(&dual), meta)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::duals::check_dual_pair;
    use crate::tol::Tolerances;

    #[test]
    fn deterministic() {
        for kind in GeneratorKind::all(100.0) {
            let a = generate(kind, 4, 3, 11).unwrap().to_json();
            let b = generate(kind, 4, 3, 11).unwrap().to_json();
            assert_eq!(a, b, "{kind}");
            let c = generate(kind, 4, 3, 12).unwrap().to_json();
            assert_ne!(a, c, "{kind}");
        }
    }

    #[test]
    fn parseval_small() {
        for seed in 0..5 {
            let inst = generate(GeneratorKind::Parseval, 2, 2, seed)
                .unwrap()
                .build(Tolerances::default())
                .unwrap();
            let b = inst.system.bounds();
            assert!(
                (b.lower - 1.0).abs() < 1e-8 && (b.upper - 1.0).abs() < 1e-8,
                "{b:?}"
            );
        }
    }

    #[test]
    fn ill_conditioned_spread() {
        let inst = generate(GeneratorKind::IllConditioned { kappa: 1e4 }, 6, 3, 1)
            .unwrap()
            .build(Tolerances::default())
            .unwrap();
        assert!((inst.system.bounds().condition_number() - 1e4).abs() < 1.0);
    }

    #[test]
    fn dual_pair_holds() {
        let inst = generate(GeneratorKind::DualPair, 5, 4, 3)
            .unwrap()
            .build(Tolerances::default())
            .unwrap();
        let pair = check_dual_pair(&inst.system, inst.dual.as_ref().unwrap()).unwrap();
        assert!(pair.identity_residual() < 1e-12);
    }

    #[test]
    fn bad_params() {
        assert!(matches!(
            generate(GeneratorKind::Generic, 0, 2, 0),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(
            generate(GeneratorKind::Generic, 65, 2, 0),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(
            generate(GeneratorKind::Generic, 4, 17, 0),
            Err(Error::BadParams(_))
        ));
        assert!(matches!(
            generate(GeneratorKind::IllConditioned { kappa: 0.5 }, 4, 2, 0),
            Err(Error::BadParams(_))
        ));
        assert!("nope".parse::<GeneratorKind>().is_err());
    }
}
