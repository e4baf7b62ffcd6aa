//! Richardson frame algorithm and controlled preconditioning.
//!
//! `f_{k+1} = f_k + w (g - S f_k)` with `w = 2/(A+B)` contracts the error by
//! `(B-A)/(B+A)` per step. The traced error is propagated as
//! `e_{k+1} = (I - w S) e_k` from `e_0 = S^{-1} g`, so the per-step ratio is
//! not capped by the rounding floor of the reference solution; the directly
//! measured error of the last iterate is recorded separately.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::controlled::{build_system, ControlledSystem, ControllerPair};
use crate::error::{Error, Result};
use crate::gframes::GFrameFamily;
use crate::matcore::{self, ComplexMatrix};

const DIVERGENCE_STREAK: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterConfig {
    /// `None` uses `2/(A+B)`.
    pub relaxation: Option<f64>,
    pub max_iter: usize,
    /// Target for the relative error `||f - f_k|| / ||f||`.
    pub target_residual: f64,
}

impl Default for IterConfig {
    fn default() -> Self {
        Self {
            relaxation: None,
            max_iter: 200_000,
            target_residual: 1e-8,
        }
    }
}

impl IterConfig {
    fn validate(&self) -> Result<()> {
        if self.relaxation.is_some_and(|w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::BadParams("relaxation must be positive".into()));
        }
        if self.target_residual.is_nan() || self.target_residual <= 0.0 {
            return Err(Error::BadParams("target_residual must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(Error::BadParams("max_iter must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    /// `residuals[k] = ||f - f_k|| / ||f||`, starting at `k = 0`.
    pub residuals: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
    pub condition_number: f64,
    pub contraction_rate: f64,
    pub relaxation: f64,
    /// `||S f_k - g||` at the final iterate.
    pub final_equation_residual: f64,
    /// `||S^{-1} g - f_k|| / ||S^{-1} g||` measured on the final iterate.
    pub final_error: f64,
}

impl ConvergenceTrace {
    /// Largest ratio `residuals[k+1] / residuals[k]`.
    pub fn max_step_ratio(&self) -> f64 {
        self.residuals
            .windows(2)
            .filter(|w| w[0] > 0.0)
            .map(|w| w[1] / w[0])
            .fold(0.0, f64::max)
    }

    /// Every step contracts by at most `contraction_rate + slack`.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.max_step_ratio() <= self.contraction_rate + slack
    }
}

/// `ceil(ln(target) / ln(rate))`; one when `rate` is zero.
pub fn predicted_iterations(lower: f64, upper: f64, target: f64) -> usize {
    let rate = (upper - lower) / (upper + lower);
    if rate <= 0.0 {
        1
    } else {
        (target.ln() / rate.ln()).ceil() as usize
    }
}

/// Approximates `S^{-1} g` starting from zero.
///
/// `a` and `b` are the bounds handed to the iteration; passing looser values
/// than the true spectrum is allowed and only slows convergence.
pub fn frame_algorithm(
    s: &ComplexMatrix,
    a: f64,
    b: f64,
    g: &[Complex64],
    cfg: &IterConfig,
) -> Result<(Vec<Complex64>, ConvergenceTrace)> {
    cfg.validate()?;
    if a.is_nan() || a <= 0.0 {
        return Err(Error::NotAFrame { lower: a });
    }
    if b < a {
        return Err(Error::BadParams(format!(
            "upper bound {b} below lower bound {a}"
        )));
    }
    if !s.is_square() || s.rows() != g.len() {
        return Err(Error::DimensionMismatch(format!(
            "operator is {}x{}, right-hand side has length {}",
            s.rows(),
            s.cols(),
            g.len()
        )));
    }
    let eig = matcore::herm_eig(s)?;
    let herm = crate::tol::Tolerances::default().herm;
    if eig.lambda_min() < a - herm * a.max(1.0) || eig.lambda_max() > b + herm * b.max(1.0) {
        return Err(Error::BadParams(format!(
            "spectrum [{}, {}] not inside supplied bounds [{a}, {b}]",
            eig.lambda_min(),
            eig.lambda_max()
        )));
    }
    let omega = cfg.relaxation.unwrap_or(2.0 / (a + b));
    let rate = (b - a) / (b + a);
    let n = g.len();

    let exact = eig.apply_fn(|l| 1.0 / l).mul_vec(g);
    let exact_norm = matcore::norm(&exact);
    let mut f = vec![matcore::ZERO; n];
    let mut trace = ConvergenceTrace {
        residuals: vec![if exact_norm > 0.0 { 1.0 } else { 0.0 }],
        iterations_used: 0,
        converged: false,
        condition_number: b / a,
        contraction_rate: rate,
        relaxation: omega,
        final_equation_residual: matcore::norm(g),
        final_error: 0.0,
    };
    if exact_norm == 0.0 {
        trace.converged = true;
        trace.final_equation_residual = 0.0;
        return Ok((f, trace));
    }

    let mut err = exact.clone();
    let mut r = g.to_vec();
    let mut growth = 0;
    for k in 1..=cfg.max_iter {
        f = matcore::add_vec(&f, &matcore::scale_vec(&r, omega));
        let se = s.mul_vec(&err);
        err = matcore::sub_vec(&err, &matcore::scale_vec(&se, omega));
        let sr = s.mul_vec(&r);
        r = matcore::sub_vec(&r, &matcore::scale_vec(&sr, omega));

        let rel = matcore::norm(&err) / exact_norm;
        if !rel.is_finite() {
            return Err(Error::Diverged {
                iteration: k,
                residual: rel,
            });
        }
        let prev = *trace.residuals.last().unwrap();
        trace.residuals.push(rel);
        trace.iterations_used = k;
        growth = if rel > prev { growth + 1 } else { 0 };
        if growth >= DIVERGENCE_STREAK {
            return Err(Error::Diverged {
                iteration: k,
                residual: rel,
            });
        }
        if rel <= cfg.target_residual {
            trace.converged = true;
            break;
        }
    }
    trace.final_equation_residual = matcore::norm(&matcore::sub_vec(&s.mul_vec(&f), g));
    trace.final_error = matcore::norm(&matcore::sub_vec(&exact, &f)) / exact_norm;
    Ok((f, trace))
}

/// Runs the frame algorithm on a system's own operator and bounds.
pub fn solve_system(
    sys: &ControlledSystem,
    g: &[Complex64],
    cfg: &IterConfig,
) -> Result<(Vec<Complex64>, ConvergenceTrace)> {
    let bounds = sys.bounds();
    frame_algorithm(sys.frame_operator(), bounds.lower, bounds.upper, g, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreconditioningReport {
    pub plain_condition: f64,
    pub controlled_condition: f64,
    pub plain_iterations: usize,
    pub controlled_iterations: usize,
    pub plain_predicted: usize,
    pub controlled_predicted: usize,
    pub plain: ConvergenceTrace,
    pub controlled: ConvergenceTrace,
}

impl PreconditioningReport {
    pub fn controlled_is_faster(&self) -> bool {
        self.controlled_iterations < self.plain_iterations
    }
}

/// Solves for `f` from `S_L f` and from `S_{CC'} f` and compares the runs.
///
/// When `f` is `None` the normalised sum of the extreme eigenvectors of each
/// operator is used, which makes every step contract at exactly the worst rate.
pub fn compare_preconditioning(
    family: &GFrameFamily,
    pair: &ControllerPair,
    f: Option<&[Complex64]>,
    cfg: &IterConfig,
) -> Result<PreconditioningReport> {
    let plain = build_system(
        family.clone(),
        ControllerPair::identity(family.ambient_dim()),
    )?;
    let controlled = build_system(family.clone(), pair.clone())?;
    for sys in [&plain, &controlled] {
        if !sys.is_frame() {
            return Err(Error::NotAFrame {
                lower: sys.bounds().lower,
            });
        }
    }
    let run = |sys: &ControlledSystem| -> Result<(ConvergenceTrace, usize)> {
        let target = match f {
            Some(f) => f.to_vec(),
            None => worst_case_vector(sys),
        };
        let g = sys.frame_operator().mul_vec(&target);
        let (_, trace) = solve_system(sys, &g, cfg)?;
        let b = sys.bounds();
        Ok((
            trace,
            predicted_iterations(b.lower, b.upper, cfg.target_residual),
        ))
    };
    let (pt, pp) = run(&plain)?;
    let (ct, cp) = run(&controlled)?;
    Ok(PreconditioningReport {
        plain_condition: plain.bounds().condition_number(),
        controlled_condition: controlled.bounds().condition_number(),
        plain_iterations: pt.iterations_used,
        controlled_iterations: ct.iterations_used,
        plain_predicted: pp,
        controlled_predicted: cp,
        plain: pt,
        controlled: ct,
    })
}

/// Normalised sum of the eigenvectors for the smallest and largest eigenvalue.
pub fn worst_case_vector(sys: &ControlledSystem) -> Vec<Complex64> {
    let eig = sys.frame_operator_eig();
    let n = sys.dim();
    let v = if n == 1 {
        eig.eigenvectors.col(0)
    } else {
        matcore::add_vec(&eig.eigenvectors.col(0), &eig.eigenvectors.col(n - 1))
    };
    matcore::scale_vec(&v, 1.0 / matcore::norm(&v))
}

/// `C = C' = diag(S_L)^{-1/4}`. For diagonal `S_L` the controlled operator
/// has the square root of its spectrum.
pub fn equilibrating_pair(family: &GFrameFamily) -> Result<ControllerPair> {
    let s = crate::gframes::frame_operator(family);
    let d: Vec<f64> = s
        .diag()
        .iter()
        .map(|z| z.re.max(f64::MIN_POSITIVE).powf(-0.25))
        .collect();
    let c = ComplexMatrix::from_diag(&d);
    ControllerPair::new(c.clone(), c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn identity_converges_in_one_step() {
        let (f, t) = frame_algorithm(
            &ComplexMatrix::identity(3),
            1.0,
            1.0,
            &[c(1.0), c(2.0), c(-1.0)],
            &IterConfig::default(),
        )
        .unwrap();
        assert_eq!(t.iterations_used, 1);
        assert!(t.converged);
        assert_eq!(f, vec![c(1.0), c(2.0), c(-1.0)]);
    }

    #[test]
    fn zero_rhs() {
        let (f, t) = frame_algorithm(
            &ComplexMatrix::from_diag(&[1.0, 5.0]),
            1.0,
            5.0,
            &[c(0.0), c(0.0)],
            &IterConfig::default(),
        )
        .unwrap();
        assert_eq!(t.iterations_used, 0);
        assert!(t.converged);
        assert_eq!(f, vec![c(0.0), c(0.0)]);
    }

    #[test]
    fn diag_one_hundred_matches_closed_form() {
        let s = ComplexMatrix::from_diag(&[1.0, 100.0]);
        let x = 1.0 / 2f64.sqrt();
        let g = s.mul_vec(&[c(x), c(x)]);
        let (_, t) = frame_algorithm(&s, 1.0, 100.0, &g, &IterConfig::default()).unwrap();
        assert_eq!(predicted_iterations(1.0, 100.0, 1e-8), 922);
        assert!(
            (t.iterations_used as i64 - 922).abs() <= 5,
            "{}",
            t.iterations_used
        );
        assert!(
            t.is_monotone(1e-12),
            "{} vs {}",
            t.max_step_ratio(),
            t.contraction_rate
        );
        assert!(t.final_error < 1e-8 * 1.01);
    }

    #[test]
    fn errors() {
        let s = ComplexMatrix::identity(2);
        let g = [c(1.0), c(0.0)];
        assert!(matches!(
            frame_algorithm(&s, 0.0, 1.0, &g, &IterConfig::default()),
            Err(Error::NotAFrame { .. })
        ));
        let cfg = IterConfig {
            relaxation: Some(3.0),
            ..IterConfig::default()
        };
        assert!(matches!(
            frame_algorithm(&s, 1.0, 1.0, &g, &cfg),
            Err(Error::Diverged { iteration: 5, .. })
        ));
    }

    #[test]
    fn loose_bounds_still_converge() {
        let s = ComplexMatrix::from_diag(&[2.0, 3.0]);
        let g = [c(1.0), c(1.0)];
        let (f, t) = frame_algorithm(&s, 1.0, 4.0, &g, &IterConfig::default()).unwrap();
        assert!(t.converged);
        assert!(t.is_monotone(1e-12));
        assert!((f[0] - c(0.5)).norm() < 1e-7);
    }

    #[test]
    fn inverse_controller_gives_identity() {
        let fam = GFrameFamily::new(
            2,
            vec![
                ComplexMatrix::from_diag(&[1.0, 3.0]),
                ComplexMatrix::from_diag(&[2.0, 1.0]),
            ],
        )
        .unwrap();
        let s_inv = matcore::hpd_inverse(&crate::gframes::frame_operator(&fam)).unwrap();
        let pair = ControllerPair::new(s_inv, ComplexMatrix::identity(2)).unwrap();
        let rep = compare_preconditioning(&fam, &pair, None, &IterConfig::default()).unwrap();
        assert!((rep.controlled_condition - 1.0).abs() < 1e-10);
        assert_eq!(rep.controlled_iterations, 1);
    }

    #[test]
    fn identity_controllers_match_plain() {
        let fam = GFrameFamily::new(2, vec![ComplexMatrix::from_diag(&[1.0, 3.0])]).unwrap();
        let rep = compare_preconditioning(
            &fam,
            &ControllerPair::identity(2),
            None,
            &IterConfig::default(),
        )
        .unwrap();
        assert_eq!(rep.plain, rep.controlled);
    }
}
