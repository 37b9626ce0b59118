//! Domain types of the two-step algebra.
//!
//! The algebra is generated by `H`, `J3`, `a†` and `a` and is fixed by two
//! characteristic functions `f` and `g`, restricted here to real polynomials:
//!
//! ```text
//! H a†  = a† (f(H) + J3)      a H  = (f(H) + J3) a
//! J3 a† = a† g(H)             a J3 = g(H) a
//! [a, a†] = f(H) - H + J3     [H, J3] = 0
//! ```

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{GhaError, Result};

/// Region membership tolerance used when none is supplied.
pub const DEFAULT_TOL: f64 = 1e-10;

/// Evaluates `Σ coeffs[k]·x^k` by Horner's rule. An empty list evaluates to 0.
pub fn eval_poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Polynomials `f` and `g`, constant term first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFunctions")]
pub struct CharacteristicFunctions {
    f: Vec<f64>,
    g: Vec<f64>,
}

#[derive(Deserialize)]
struct RawFunctions {
    f: Vec<f64>,
    g: Vec<f64>,
}

impl TryFrom<RawFunctions> for CharacteristicFunctions {
    type Error = GhaError;

    fn try_from(raw: RawFunctions) -> Result<Self> {
        Self::new(raw.f, raw.g)
    }
}

impl CharacteristicFunctions {
    pub fn new(f: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        check_coeffs("f", &f)?;
        check_coeffs("g", &g)?;
        Ok(Self { f, g })
    }

    /// `f(x) = r x`, `g(x) = s x`.
    pub fn linear(params: LinearParams) -> Self {
        Self {
            f: vec![0.0, params.r],
            g: vec![0.0, params.s],
        }
    }

    pub fn f_coeffs(&self) -> &[f64] {
        &self.f
    }

    pub fn g_coeffs(&self) -> &[f64] {
        &self.g
    }

    pub fn f(&self, x: f64) -> f64 {
        eval_poly(&self.f, x)
    }

    pub fn g(&self, x: f64) -> f64 {
        eval_poly(&self.g, x)
    }
}

fn check_coeffs(which: &'static str, coeffs: &[f64]) -> Result<()> {
    if coeffs.is_empty() {
        return Err(GhaError::EmptyCoefficients(which));
    }
    if let Some(&value) = coeffs.iter().find(|c| !c.is_finite()) {
        return Err(GhaError::NonFinite {
            what: "polynomial coefficient",
            value,
        });
    }
    Ok(())
}

/// Ground-state eigenvalues of `H` and `J3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VacuumState {
    pub alpha0: f64,
    pub beta0: f64,
}

impl VacuumState {
    pub fn new(alpha0: f64, beta0: f64) -> Result<Self> {
        for value in [alpha0, beta0] {
            if !value.is_finite() {
                return Err(GhaError::NonFinite {
                    what: "vacuum eigenvalue",
                    value,
                });
            }
        }
        Ok(Self { alpha0, beta0 })
    }
}

/// Outcome of the physicality check on a ladder sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Physicality {
    /// Every stored norm is non-negative. `first_zero_norm` marks where the
    /// representation becomes reducible (finite-dimensional block).
    Physical { first_zero_norm: Option<usize> },
    /// `norms_sq[index] < 0`.
    Violation { index: usize },
}

impl Physicality {
    pub fn is_physical(&self) -> bool {
        matches!(self, Physicality::Physical { .. })
    }
}

/// Vacuum data plus the iterated eigenvalues `α_n`, `β_n` and squared norms `N_n²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderSequence {
    pub(crate) vacuum: VacuumState,
    pub(crate) alphas: Vec<f64>,
    pub(crate) betas: Vec<f64>,
    pub(crate) norms_sq: Vec<f64>,
    pub(crate) physicality: Physicality,
}

impl LadderSequence {
    pub fn vacuum(&self) -> VacuumState {
        self.vacuum
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn norms_sq(&self) -> &[f64] {
        &self.norms_sq
    }

    pub fn physicality(&self) -> Physicality {
        self.physicality
    }

    /// Number of recursion steps stored (`alphas.len() - 1`).
    pub fn levels(&self) -> usize {
        self.norms_sq.len()
    }
}

/// Dense `d×d` matrices for `H`, `J3`, `a†` and `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedRep {
    pub(crate) h: Array2<f64>,
    pub(crate) j3: Array2<f64>,
    pub(crate) a_dag: Array2<f64>,
    pub(crate) a: Array2<f64>,
}

impl TruncatedRep {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn h(&self) -> &Array2<f64> {
        &self.h
    }

    pub fn j3(&self) -> &Array2<f64> {
        &self.j3
    }

    pub fn a_dag(&self) -> &Array2<f64> {
        &self.a_dag
    }

    pub fn a(&self) -> &Array2<f64> {
        &self.a
    }

    /// `N = diag(0, 1, …, d-1)`.
    pub fn number_operator(&self) -> Array2<f64> {
        Array2::from_diag(&ndarray::Array1::from_iter(
            (0..self.dim()).map(|n| n as f64),
        ))
    }
}

/// Row-major nested vectors, the JSON layout for matrices.
pub fn matrix_rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.outer_iter().map(|row| row.to_vec()).collect()
}

impl Serialize for TruncatedRep {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            dim: usize,
            #[serde(rename = "H")]
            h: Vec<Vec<f64>>,
            #[serde(rename = "J3")]
            j3: Vec<Vec<f64>>,
            a_dag: Vec<Vec<f64>>,
            a: Vec<Vec<f64>>,
        }
        Repr {
            dim: self.dim(),
            h: matrix_rows(&self.h),
            j3: matrix_rows(&self.j3),
            a_dag: matrix_rows(&self.a_dag),
            a: matrix_rows(&self.a),
        }
        .serialize(serializer)
    }
}

/// Coefficients of the linear case `f(x) = r x`, `g(x) = s x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    pub r: f64,
    pub s: f64,
}

impl LinearParams {
    pub fn new(r: f64, s: f64) -> Result<Self> {
        for value in [r, s] {
            if !value.is_finite() {
                return Err(GhaError::NonFinite {
                    what: "linear parameter",
                    value,
                });
            }
        }
        Ok(Self { r, s })
    }

    /// `r² + 4s`.
    pub fn discriminant(&self) -> f64 {
        self.r * self.r + 4.0 * self.s
    }
}

/// Roots of `λ² − rλ − s = 0`.
///
/// Real roots are ordered `lambda_plus >= lambda_minus`; a complex pair puts the
/// root with positive imaginary part in `lambda_plus`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair {
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    pub discriminant: f64,
}

impl EigenPair {
    pub fn is_real(&self) -> bool {
        self.discriminant >= 0.0
    }

    pub fn moduli(&self) -> (f64, f64) {
        (self.lambda_plus.norm(), self.lambda_minus.norm())
    }

    pub fn spectral_radius(&self) -> f64 {
        self.lambda_plus.norm().max(self.lambda_minus.norm())
    }
}

impl Serialize for EigenPair {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct C {
            re: f64,
            im: f64,
        }
        #[derive(Serialize)]
        struct Repr {
            lambda_plus: C,
            lambda_minus: C,
            discriminant: f64,
        }
        Repr {
            lambda_plus: C {
                re: self.lambda_plus.re,
                im: self.lambda_plus.im,
            },
            lambda_minus: C {
                re: self.lambda_minus.re,
                im: self.lambda_minus.im,
            },
            discriminant: self.discriminant,
        }
        .serialize(serializer)
    }
}
