//! Ladder recursion, truncated matrix representations and relation checks.
//!
//! A finite cutoff `d` only falsifies the last row and column of the
//! commutator-type relations, so every check except `[H, J3]` is measured on
//! the leading `(d-1)×(d-1)` block.

use std::collections::BTreeMap;

use ndarray::{s, Array1, Array2};
use serde::Serialize;

use crate::algebra::{
    matrix_rows, CharacteristicFunctions, LadderSequence, Physicality, TruncatedRep, VacuumState,
};
use crate::error::{GhaError, Result};

/// Relative slack below zero tolerated on `N_n²` before it counts as negative.
pub const NORM_SLACK: f64 = 1e-12;

pub const REL_H_ADAG: &str = "H_adag";
pub const REL_A_H: &str = "a_H";
pub const REL_J3_ADAG: &str = "J3_adag";
pub const REL_A_J3: &str = "a_J3";
pub const REL_COMM_A_ADAG: &str = "comm_a_adag";
pub const REL_COMM_H_J3: &str = "comm_H_J3";
pub const REL_CASIMIR1_FORMS: &str = "casimir1_forms";

/// Runs `α_{n+1} = f(α_n) + β_n`, `β_{n+1} = g(α_n)` for `levels` steps and
/// accumulates `N_{n+1}² = N_n² + f(α_{n+1}) − α_{n+1} + β_{n+1}` from
/// `N_0² = f(α_0) − α_0 + β_0`.
pub fn iterate_eigenvalues(
    funcs: &CharacteristicFunctions,
    vacuum: VacuumState,
    levels: usize,
) -> Result<LadderSequence> {
    if levels == 0 {
        return Err(GhaError::InvalidArgument("levels must be >= 1".into()));
    }
    let mut alphas = Vec::with_capacity(levels + 1);
    let mut betas = Vec::with_capacity(levels + 1);
    let mut norms_sq = Vec::with_capacity(levels);
    alphas.push(vacuum.alpha0);
    betas.push(vacuum.beta0);

    let mut norm_sq = funcs.f(vacuum.alpha0) - vacuum.alpha0 + vacuum.beta0;
    for n in 0..levels {
        let alpha = funcs.f(alphas[n]) + betas[n];
        let beta = funcs.g(alphas[n]);
        if !alpha.is_finite() || !beta.is_finite() || !norm_sq.is_finite() {
            return Err(GhaError::Truncation { index: n + 1 });
        }
        alphas.push(alpha);
        betas.push(beta);
        norms_sq.push(norm_sq);
        norm_sq += funcs.f(alpha) - alpha + beta;
    }

    let mut seq = LadderSequence {
        vacuum,
        alphas,
        betas,
        norms_sq,
        physicality: Physicality::Physical {
            first_zero_norm: None,
        },
    };
    seq.physicality = check_physical(&seq);
    Ok(seq)
}

/// Physical iff every `N_n² >= 0`, i.e. `α_{n+1} >= α_0`.
///
/// Values within `NORM_SLACK` (relative to the largest level seen so far) of
/// zero are treated as zero norms.
pub fn check_physical(seq: &LadderSequence) -> Physicality {
    let mut first_zero_norm = None;
    let mut scale = seq.alphas[0].abs().max(1.0);
    for (n, &norm_sq) in seq.norms_sq.iter().enumerate() {
        scale = scale.max(seq.alphas[n + 1].abs());
        let slack = NORM_SLACK * scale;
        if norm_sq < -slack {
            return Physicality::Violation { index: n };
        }
        if norm_sq <= slack && first_zero_norm.is_none() {
            first_zero_norm = Some(n);
        }
    }
    Physicality::Physical { first_zero_norm }
}

/// Builds the `d×d` matrices with `d = seq.levels() + 1`, using every stored
/// `α`, `β` and `N²`. `N_n` is the non-negative root.
pub fn build_matrices(seq: &LadderSequence) -> Result<TruncatedRep> {
    if let Physicality::Violation { index } = check_physical(seq) {
        return Err(GhaError::NonPhysical {
            index,
            norm_sq: seq.norms_sq[index],
        });
    }
    let d = seq.alphas.len();
    let h = Array2::from_diag(&Array1::from(seq.alphas.clone()));
    let j3 = Array2::from_diag(&Array1::from(seq.betas.clone()));
    let mut a_dag = Array2::zeros((d, d));
    for (n, &norm_sq) in seq.norms_sq.iter().enumerate() {
        a_dag[[n + 1, n]] = norm_sq.max(0.0).sqrt();
    }
    let a = a_dag.t().to_owned();
    Ok(TruncatedRep { h, j3, a_dag, a })
}

/// Iterates `dim - 1` levels from the vacuum and builds the `dim×dim` representation.
pub fn build_representation(
    funcs: &CharacteristicFunctions,
    vacuum: VacuumState,
    dim: usize,
) -> Result<TruncatedRep> {
    if dim < 2 {
        return Err(GhaError::InvalidArgument("dim must be >= 2".into()));
    }
    build_matrices(&iterate_eigenvalues(funcs, vacuum, dim - 1)?)
}

/// Matrix polynomial by Horner's rule.
pub fn matrix_poly(coeffs: &[f64], m: &Array2<f64>) -> Array2<f64> {
    let identity = Array2::<f64>::eye(m.nrows());
    coeffs
        .iter()
        .rev()
        .fold(Array2::zeros(m.raw_dim()), |acc, &c| {
            acc.dot(m) + &identity * c
        })
}

fn commutator(x: &Array2<f64>, y: &Array2<f64>) -> Array2<f64> {
    x.dot(y) - y.dot(x)
}

fn max_abs(m: &Array2<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

fn interior_max_abs(m: &Array2<f64>) -> f64 {
    let k = m.nrows() - 1;
    max_abs(&m.slice(s![..k, ..k]).to_owned())
}

fn first_zero_norm(rep: &TruncatedRep) -> Option<usize> {
    (0..rep.dim() - 1).find(|&n| rep.a_dag[[n + 1, n]] == 0.0)
}

/// Per-relation residuals of a truncated representation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationReport {
    pub residuals: BTreeMap<String, f64>,
    pub dim: usize,
    pub interior_dim: usize,
    pub tol: f64,
    pub passed: bool,
    /// First `n` with `N_n = 0`; the representation block-decomposes there.
    pub first_zero_norm: Option<usize>,
}

impl RelationReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.values().fold(0.0, |a: f64, &b| a.max(b))
    }
}

pub fn verify_relations(
    rep: &TruncatedRep,
    funcs: &CharacteristicFunctions,
    tol: f64,
) -> Result<RelationReport> {
    let d = rep.dim();
    if d < 3 {
        return Err(GhaError::InvalidArgument(format!(
            "relation checks need dim >= 3, got {d}"
        )));
    }
    let (h, j3, a_dag, a) = (&rep.h, &rep.j3, &rep.a_dag, &rep.a);
    let f_h = matrix_poly(funcs.f_coeffs(), h);
    let g_h = matrix_poly(funcs.g_coeffs(), h);
    let shifted = &f_h + j3;

    let mut residuals = BTreeMap::new();
    let mut put = |name: &str, value: f64| {
        residuals.insert(name.to_string(), value);
    };
    put(
        REL_H_ADAG,
        interior_max_abs(&(h.dot(a_dag) - a_dag.dot(&shifted))),
    );
    put(REL_A_H, interior_max_abs(&(a.dot(h) - shifted.dot(a))));
    put(
        REL_J3_ADAG,
        interior_max_abs(&(j3.dot(a_dag) - a_dag.dot(&g_h))),
    );
    put(REL_A_J3, interior_max_abs(&(a.dot(j3) - g_h.dot(a))));
    put(
        REL_COMM_A_ADAG,
        interior_max_abs(&(commutator(a, a_dag) - (&f_h - h + j3))),
    );
    put(REL_COMM_H_J3, max_abs(&commutator(h, j3)));
    let form1 = a.dot(a_dag) - &f_h - j3;
    let form2 = a_dag.dot(a) - h;
    put(REL_CASIMIR1_FORMS, interior_max_abs(&(form1 - form2)));

    let passed = residuals.values().all(|&r| r <= tol);
    Ok(RelationReport {
        residuals,
        dim: d,
        interior_dim: d - 1,
        tol,
        passed,
        first_zero_norm: first_zero_norm(rep),
    })
}

/// First Casimir `C⁽¹⁾ = a a† − f(H) − J3 = a† a − H`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Casimir1Report {
    /// `a† a − H`, which is exact on the full truncated space.
    #[serde(serialize_with = "serialize_matrix")]
    pub matrix: Array2<f64>,
    /// Interior max-abs difference between the two expressions.
    pub forms_difference: f64,
    /// Interior max-abs of `[C⁽¹⁾, X]` for X in {a†, a, H, J3}.
    pub commutators: BTreeMap<String, f64>,
    /// Interior diagonal of `C⁽¹⁾`.
    pub diagonal: Vec<f64>,
    /// `−α_0`.
    pub expected: f64,
    /// Max-abs deviation of `C⁽¹⁾` from `−α_0·I` on the interior block.
    pub constant_deviation: f64,
}

fn serialize_matrix<S: serde::Serializer>(
    m: &Array2<f64>,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    matrix_rows(m).serialize(serializer)
}

pub fn casimir1(rep: &TruncatedRep, funcs: &CharacteristicFunctions) -> Casimir1Report {
    let d = rep.dim();
    let (h, j3, a_dag, a) = (&rep.h, &rep.j3, &rep.a_dag, &rep.a);
    let f_h = matrix_poly(funcs.f_coeffs(), h);
    let form1 = a.dot(a_dag) - &f_h - j3;
    let c1 = a_dag.dot(a) - h;

    let mut commutators = BTreeMap::new();
    for (name, gen) in [("a_dag", a_dag), ("a", a), ("H", h), ("J3", j3)] {
        commutators.insert(name.to_string(), interior_max_abs(&commutator(&c1, gen)));
    }
    let expected = -h[[0, 0]];
    let interior = d.saturating_sub(1).max(1);
    let deviation = &c1 - &(Array2::<f64>::eye(d) * expected);
    Casimir1Report {
        forms_difference: if d > 1 {
            interior_max_abs(&(&form1 - &c1))
        } else {
            0.0
        },
        commutators,
        diagonal: (0..interior).map(|n| c1[[n, n]]).collect(),
        expected,
        constant_deviation: if d > 1 {
            interior_max_abs(&deviation)
        } else {
            max_abs(&deviation)
        },
        matrix: c1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::LinearParams;

    fn linear(r: f64, s: f64) -> CharacteristicFunctions {
        CharacteristicFunctions::linear(LinearParams::new(r, s).unwrap())
    }

    fn vac(a: f64, b: f64) -> VacuumState {
        VacuumState::new(a, b).unwrap()
    }

    #[test]
    fn fibonacci_levels() {
        let seq = iterate_eigenvalues(&linear(1.0, 1.0), vac(1.0, 0.0), 5).unwrap();
        assert_eq!(seq.alphas(), &[1.0, 1.0, 2.0, 3.0, 5.0, 8.0]);
        assert_eq!(seq.betas(), &[0.0, 1.0, 1.0, 2.0, 3.0, 5.0]);
        assert_eq!(seq.norms_sq(), &[0.0, 1.0, 2.0, 4.0, 7.0]);
        assert_eq!(
            seq.physicality(),
            Physicality::Physical {
                first_zero_norm: Some(0)
            }
        );
    }

    #[test]
    fn zero_functions_give_zero_sequence() {
        let funcs = CharacteristicFunctions::new(vec![0.0], vec![0.0]).unwrap();
        let seq = iterate_eigenvalues(&funcs, vac(0.0, 0.0), 4).unwrap();
        assert!(seq.alphas().iter().chain(seq.betas()).all(|&v| v == 0.0));
        assert!(seq.norms_sq().iter().all(|&v| v == 0.0));
        assert!(seq.physicality().is_physical());
    }

    #[test]
    fn evenly_spaced_levels() {
        let seq = iterate_eigenvalues(&linear(2.0, -1.0), vac(0.0, 1.0), 4).unwrap();
        assert_eq!(seq.alphas(), &[0.0, 1.0, 2.0, 3.0, 4.0]);
        assert_eq!(seq.norms_sq(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn zero_levels_rejected() {
        assert!(matches!(
            iterate_eigenvalues(&linear(1.0, 1.0), vac(1.0, 0.0), 0),
            Err(GhaError::InvalidArgument(_))
        ));
    }

    #[test]
    fn overflow_names_first_bad_index() {
        let funcs = CharacteristicFunctions::new(vec![0.0, 0.0, 1e10], vec![0.0]).unwrap();
        let err = iterate_eigenvalues(&funcs, vac(10.0, 0.0), 20).unwrap_err();
        // α1 = 1e12, α2 = 1e34, α3 = 1e78, α4 = 1e166, α5 = inf
        assert_eq!(err, GhaError::Truncation { index: 5 });
    }

    #[test]
    fn negative_vacuum_fibonacci_is_unphysical() {
        let seq = iterate_eigenvalues(&linear(1.0, 1.0), vac(-1.0, 0.0), 10).unwrap();
        // α1 = -1 + 0 = -1 (N0² = 0), α2 = -2 < α0
        assert_eq!(seq.physicality(), Physicality::Violation { index: 1 });
        assert!(matches!(
            build_matrices(&seq),
            Err(GhaError::NonPhysical { index: 1, .. })
        ));
    }

    #[test]
    fn fibonacci_matrices_d3() {
        let seq = iterate_eigenvalues(&linear(1.0, 1.0), vac(1.0, 0.0), 2).unwrap();
        let rep = build_matrices(&seq).unwrap();
        assert_eq!(rep.dim(), 3);
        assert_eq!(rep.h().diag().to_vec(), vec![1.0, 1.0, 2.0]);
        assert_eq!(rep.a_dag()[[1, 0]], 0.0);
        assert_eq!(rep.a_dag()[[2, 1]], 1.0);
        assert_eq!(rep.a(), &rep.a_dag().t().to_owned());
    }

    #[test]
    fn zero_matrices_d2() {
        let funcs = CharacteristicFunctions::new(vec![0.0], vec![0.0]).unwrap();
        let rep = build_representation(&funcs, vac(0.0, 0.0), 2).unwrap();
        for m in [rep.h(), rep.j3(), rep.a_dag(), rep.a()] {
            assert!(m.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn evenly_spaced_subdiagonal() {
        let rep = build_representation(&linear(2.0, -1.0), vac(0.0, 1.0), 5).unwrap();
        let sub: Vec<f64> = (0..4).map(|n| rep.a_dag()[[n + 1, n]]).collect();
        let expected = [1.0, 2f64.sqrt(), 3f64.sqrt(), 2.0];
        for (x, y) in sub.iter().zip(expected) {
            assert!((x - y).abs() < 1e-15);
        }
        // only the first subdiagonal is populated
        for ((i, j), &v) in rep.a_dag().indexed_iter() {
            if i != j + 1 {
                assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn fibonacci_relations_hold() {
        let funcs = linear(1.0, 1.0);
        let rep = build_representation(&funcs, vac(1.0, 0.0), 16).unwrap();
        let report = verify_relations(&rep, &funcs, 1e-9).unwrap();
        assert!(report.passed, "{report:?}");
        assert_eq!(report.residuals.len(), 7);
        assert_eq!(report.interior_dim, 15);
        assert_eq!(report.first_zero_norm, Some(0));
    }

    #[test]
    fn zero_rep_relations_exact() {
        let funcs = CharacteristicFunctions::new(vec![0.0], vec![0.0]).unwrap();
        let rep = build_representation(&funcs, vac(0.0, 0.0), 4).unwrap();
        let report = verify_relations(&rep, &funcs, 0.0).unwrap();
        assert!(report.residuals.values().all(|&r| r == 0.0));
        assert!(report.passed);
    }

    #[test]
    fn perturbed_subdiagonal_fails() {
        let funcs = linear(1.0, 1.0);
        let mut rep = build_representation(&funcs, vac(1.0, 0.0), 16).unwrap();
        rep.a_dag[[5, 4]] += 1e-3;
        rep.a = rep.a_dag.t().to_owned();
        let report = verify_relations(&rep, &funcs, 1e-9).unwrap();
        assert!(!report.passed);
        assert!(report.residuals[REL_COMM_A_ADAG] >= 1e-4);
    }

    #[test]
    fn relation_check_needs_dim_3() {
        let funcs = linear(1.0, 1.0);
        let rep = build_representation(&funcs, vac(1.0, 0.0), 2).unwrap();
        assert!(verify_relations(&rep, &funcs, 1e-9).is_err());
    }

    #[test]
    fn truncation_spoils_only_last_row_and_column() {
        let funcs = linear(1.0, 1.0);
        let rep = build_representation(&funcs, vac(1.0, 2.0), 6).unwrap();
        let f_h = matrix_poly(funcs.f_coeffs(), rep.h());
        let full = commutator(rep.a(), rep.a_dag()) - (&f_h - rep.h() + rep.j3());
        assert!(full[[5, 5]].abs() > 1.0);
        assert!(interior_max_abs(&full) < 1e-12);
    }

    #[test]
    fn casimir1_examples() {
        let funcs = linear(1.0, 1.0);
        let rep = build_representation(&funcs, vac(1.0, 0.0), 12).unwrap();
        let c = casimir1(&rep, &funcs);
        assert_eq!(c.expected, -1.0);
        assert!(c.diagonal.iter().all(|&v| (v + 1.0).abs() < 1e-12));
        assert!(c.constant_deviation < 1e-12);
        assert!(c.forms_difference < 1e-12);
        assert!(c.commutators.values().all(|&v| v < 1e-12));

        let zero = CharacteristicFunctions::new(vec![0.0], vec![0.0]).unwrap();
        let c = casimir1(
            &build_representation(&zero, vac(0.0, 0.0), 3).unwrap(),
            &zero,
        );
        assert!(c.matrix.iter().all(|&v| v == 0.0));

        let funcs = linear(2.0, -1.0);
        let c = casimir1(
            &build_representation(&funcs, vac(0.0, 1.0), 8).unwrap(),
            &funcs,
        );
        assert_eq!(c.expected, 0.0);
        assert!(c.constant_deviation < 1e-12);
    }

    #[test]
    fn matrix_poly_matches_scalar_on_diagonal() {
        let h = Array2::from_diag(&Array1::from(vec![1.5, -2.0, 0.25]));
        let p = matrix_poly(&[1.0, -2.0, 0.5], &h);
        for i in 0..3 {
            assert_eq!(
                p[[i, i]],
                crate::algebra::eval_poly(&[1.0, -2.0, 0.5], h[[i, i]])
            );
        }
    }
}
