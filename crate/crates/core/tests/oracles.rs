//! Cross-checks against an independent oracle: cyclic Jacobi on the real
//! symmetric embedding `[[Re, -Im], [Im, Re]]`, whose spectrum is that of the
//! Hermitian matrix with every eigenvalue doubled.

use cgframe_core::controlled::{controlled_bounds, cross_operator};
use cgframe_core::duals::{canonical_dual, canonical_dual_bounds};
use cgframe_core::gframes::{frame_bounds, frame_operator};
use cgframe_core::matcore::{self, herm_eig};
use cgframe_core::recon::predicted_iterations;
use cgframe_core::{
    build_system, generate, Complex64, ComplexMatrix, ControllerPair, GFrameFamily, GeneratorKind,
    Tolerances,
};

fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for row in a.iter_mut() {
                    let (akp, akq) = (row[p], row[q]);
                    row[p] = c * akp - s * akq;
                    row[q] = s * akp + c * akq;
                }
                let (rp, rq) = (a[p].clone(), a[q].clone());
                for k in 0..n {
                    a[p][k] = c * rp[k] - s * rq[k];
                    a[q][k] = s * rp[k] + c * rq[k];
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// Eigenvalues of a Hermitian matrix, ascending.
fn oracle_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.rows();
    let mut big = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            big[i][j] = z.re;
            big[i + n][j + n] = z.re;
            big[i][j + n] = -z.im;
            big[i + n][j] = z.im;
        }
    }
    jacobi_eigenvalues(big)
        .chunks(2)
        .map(|c| 0.5 * (c[0] + c[1]))
        .collect()
}

/// `sum_i C* L_i* L_i C'` by explicit index loops.
fn oracle_frame_operator(
    ops: &[ComplexMatrix],
    c: &ComplexMatrix,
    cp: &ComplexMatrix,
) -> ComplexMatrix {
    let n = c.rows();
    let mut s = ComplexMatrix::zeros(n, n);
    for l in ops {
        let d = l.rows();
        for a in 0..n {
            for b in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..d {
                    let mut lc = Complex64::new(0.0, 0.0);
                    let mut lcp = Complex64::new(0.0, 0.0);
                    for j in 0..n {
                        lc += l[(k, j)] * c[(j, a)];
                        lcp += l[(k, j)] * cp[(j, b)];
                    }
                    acc += lc.conj() * lcp;
                }
                s[(a, b)] += acc;
            }
        }
    }
    s
}

fn load(kind: GeneratorKind, n: usize, m: usize, seed: u64) -> cgframe_core::LoadedInstance {
    generate(kind, n, m, seed)
        .unwrap()
        .build(Tolerances::default())
        .unwrap()
}

#[test]
fn eigenvalues_match_oracle() {
    for seed in 0..10 {
        let inst = load(GeneratorKind::Generic, 6, 3, seed);
        let s = inst.system.frame_operator();
        let ours = herm_eig(s).unwrap().eigenvalues;
        let theirs = oracle_eigenvalues(s);
        let scale = theirs.last().unwrap().abs().max(1.0);
        for (a, b) in ours.iter().zip(&theirs) {
            assert!((a - b).abs() <= 1e-11 * scale, "{a} vs {b}");
        }
    }
}

#[test]
fn controlled_operator_and_bounds_match_oracle() {
    for kind in [
        GeneratorKind::Generic,
        GeneratorKind::Commuting,
        GeneratorKind::DualPair,
    ] {
        for seed in 0..5 {
            let inst = load(kind, 5, 4, seed);
            let sys = &inst.system;
            let oracle =
                oracle_frame_operator(sys.family().operators(), sys.pair().c(), sys.pair().cp());
            let scale = oracle.frobenius_norm().max(1.0);
            assert!((&oracle - sys.frame_operator()).max_abs() <= 1e-12 * scale);
            let ev = oracle_eigenvalues(&oracle.hermitian_part());
            let b = controlled_bounds(sys);
            assert!((b.lower - ev[0]).abs() <= 1e-11 * scale);
            assert!((b.upper - ev[ev.len() - 1]).abs() <= 1e-11 * scale);

            let t = matcore::op_norm(&sys.block_row());
            assert!((t * t - ev[ev.len() - 1]).abs() <= 1e-9 * scale);
        }
    }
}

#[test]
fn diagonal_controller_example() {
    // L = Id, C = C' = diag(2, 1): S = diag(4, 1)
    let fam = GFrameFamily::new(2, vec![ComplexMatrix::identity(2)]).unwrap();
    let c = ComplexMatrix::from_diag(&[2.0, 1.0]);
    let sys = build_system(
        fam.clone(),
        ControllerPair::new(c.clone(), c.clone()).unwrap(),
    )
    .unwrap();
    let oracle = oracle_eigenvalues(&oracle_frame_operator(fam.operators(), &c, &c));
    assert!((oracle[0] - 1.0).abs() < 1e-14 && (oracle[1] - 4.0).abs() < 1e-14);
    assert_eq!(sys.bounds().lower, oracle[0]);
    assert_eq!(sys.bounds().upper, oracle[1]);
}

#[test]
fn canonical_dual_diag_example() {
    // L_1 = L_2 = Id, C = C' = diag(2, 1): S = diag(8, 2), G_i = C S^-1 = diag(1/4, 1/2)
    let fam = GFrameFamily::new(
        2,
        vec![ComplexMatrix::identity(2), ComplexMatrix::identity(2)],
    )
    .unwrap();
    let c = ComplexMatrix::from_diag(&[2.0, 1.0]);
    let sys = build_system(fam, ControllerPair::new(c.clone(), c).unwrap()).unwrap();
    let cd = canonical_dual(&sys).unwrap();
    let expected = ComplexMatrix::from_diag(&[0.25, 0.5]);
    for g in cd.gamma().operators() {
        assert!((g - &expected).max_abs() <= 1e-12);
    }
    let b = canonical_dual_bounds(&cd);
    // sum G_i* G_i = diag(1/8, 1/2)
    assert!((b.bounds.lower - 0.125).abs() < 1e-14);
    assert!((b.bounds.upper - 0.5).abs() < 1e-14);
    assert!(b.pass);
}

#[test]
fn uncontrolled_family_matches_oracle() {
    let ops = vec![
        ComplexMatrix::from_real_rows(&[&[1.0, 2.0, 0.0]]),
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0, -1.0], &[3.0, 0.0, 1.0]]),
    ];
    let fam = GFrameFamily::new(3, ops.clone()).unwrap();
    let id = ComplexMatrix::identity(3);
    let oracle = oracle_frame_operator(&ops, &id, &id);
    assert!((&oracle - &frame_operator(&fam)).max_abs() < 1e-14);
    let ev = oracle_eigenvalues(&oracle);
    let b = frame_bounds(&fam);
    assert!((b.lower - ev[0]).abs() < 1e-12 && (b.upper - ev[2]).abs() < 1e-12);
}

#[test]
fn parseval_self_pair_trace_equals_dimension() {
    for seed in 0..5 {
        let inst = load(GeneratorKind::Parseval, 4, 3, seed);
        let x = cross_operator(&inst.system, &inst.system).unwrap();
        assert!((x.trace_norm - 4.0).abs() < 1e-9, "{}", x.trace_norm);
    }
}

#[test]
fn closed_form_iteration_counts() {
    // ceil(ln 1e-8 / ln(99/101)) computed independently
    let rho: f64 = 99.0 / 101.0;
    let k = (1e-8f64.ln() / rho.ln()).ceil() as usize;
    assert_eq!(k, 922);
    assert_eq!(predicted_iterations(1.0, 100.0, 1e-8), k);
}
