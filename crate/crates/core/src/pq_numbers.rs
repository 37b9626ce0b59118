//! Gauss p,q-numbers `[n]_{p,q} = (pⁿ − qⁿ)/(p − q)` and the closed forms of
//! the linear case built on them.
//!
//! With `(p, q) = (λ₊, λ₋)` the levels are `α_n = α₀[n+1] + β₀[n]`. Three
//! evaluation branches are used:
//!
//! * distinct real roots: the quotient directly, or the expanded sum
//!   `Σ p^k q^{n−1−k}` when the roots are close enough for the quotient to
//!   cancel badly;
//! * `|p − q| < 1e-10·max(1, |p|)`: the limit `n·p^{n−1}`;
//! * complex conjugate `p = ρe^{iθ}`: `ρ^{n−1}·sin(nθ)/sin(θ)`, which is real.
//!
//! Negative indices follow the recurrence `[n+1] = r[n] + s[n−1]` run
//! backwards, so `[−1] = 1/s`; they are undefined when `s = 0`.

use num_complex::Complex64;
use serde::Serialize;

use crate::algebra::{CharacteristicFunctions, LinearParams, VacuumState};
use crate::error::{GhaError, Result};
use crate::linear_dynamics::eigenvalues;
use crate::rep_builder::iterate_eigenvalues;

const DEGENERATE_REL: f64 = 1e-10;
/// Below this relative root separation the quotient form is replaced by the sum.
const CLOSE_REL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PQBasis {
    #[serde(skip)]
    p: Complex64,
    #[serde(skip)]
    q: Complex64,
    r: f64,
    s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Branch {
    Distinct { p: f64, q: f64 },
    Close { p: f64, q: f64 },
    Degenerate { p: f64 },
    Conjugate { rho: f64, theta: f64 },
}

impl PQBasis {
    pub fn from_params(params: LinearParams) -> Self {
        let pair = eigenvalues(params);
        Self {
            p: pair.lambda_plus,
            q: pair.lambda_minus,
            r: params.r,
            s: params.s,
        }
    }

    /// Builds the basis from the roots; `p + q` and `−pq` must be real.
    pub fn from_roots(p: Complex64, q: Complex64) -> Result<Self> {
        let sum = p + q;
        let prod = p * q;
        let scale = p.norm().max(q.norm()).max(1.0);
        if sum.im.abs() > 1e-12 * scale || prod.im.abs() > 1e-12 * scale * scale {
            return Err(GhaError::Domain(format!(
                "p + q = {sum} and p·q = {prod} must be real"
            )));
        }
        Ok(Self {
            p,
            q,
            r: sum.re,
            s: -prod.re,
        })
    }

    pub fn p(&self) -> Complex64 {
        self.p
    }

    pub fn q(&self) -> Complex64 {
        self.q
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn params(&self) -> LinearParams {
        LinearParams {
            r: self.r,
            s: self.s,
        }
    }

    fn branch(&self) -> Branch {
        let (p, q) = (self.p, self.q);
        if (p - q).norm() < DEGENERATE_REL * p.norm().max(1.0) {
            Branch::Degenerate {
                p: (p.re + q.re) / 2.0,
            }
        } else if p.im == 0.0 && q.im == 0.0 {
            let (p, q) = (p.re, q.re);
            if (p - q).abs() < CLOSE_REL * p.abs().max(q.abs()) {
                Branch::Close { p, q }
            } else {
                Branch::Distinct { p, q }
            }
        } else {
            let upper = if p.im > 0.0 { p } else { q };
            Branch::Conjugate {
                rho: upper.norm(),
                theta: upper.arg(),
            }
        }
    }
}

/// `[n]_{p,q}` for `n >= 0`.
pub fn gauss_number(n: u32, basis: &PQBasis) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let k = n as i32;
    match basis.branch() {
        Branch::Distinct { p, q } => (p.powi(k) - q.powi(k)) / (p - q),
        Branch::Close { p, q } => (0..k).map(|j| p.powi(j) * q.powi(k - 1 - j)).sum(),
        Branch::Degenerate { p } => n as f64 * p.powi(k - 1),
        Branch::Conjugate { rho, theta } => {
            rho.powi(k - 1) * (n as f64 * theta).sin() / theta.sin()
        }
    }
}

/// `[n]_{p,q}` for any integer index; negative indices run the recurrence backwards.
pub fn gauss_number_signed(n: i64, basis: &PQBasis) -> Result<f64> {
    if n >= 0 {
        return Ok(gauss_number(n as u32, basis));
    }
    if basis.s == 0.0 {
        return Err(GhaError::Domain(
            "negative-index Gauss numbers need s != 0".into(),
        ));
    }
    // [k-1] = ([k+1] - r[k]) / s, starting from [1] = 1, [0] = 0
    let (mut upper, mut lower) = (1.0, 0.0);
    for _ in 0..(-n) {
        let next = (upper - basis.r * lower) / basis.s;
        upper = lower;
        lower = next;
    }
    Ok(lower)
}

/// `α_n = α₀[n+1] + β₀[n]`.
pub fn binet_alpha(n: u32, vacuum: VacuumState, basis: &PQBasis) -> f64 {
    vacuum.alpha0 * gauss_number(n + 1, basis) + vacuum.beta0 * gauss_number(n, basis)
}

/// Diagonal of `H = α₀[N+1] + β₀[N]` on `|n⟩`.
pub fn fock_h_diag(n: u32, vacuum: VacuumState, basis: &PQBasis) -> f64 {
    binet_alpha(n, vacuum, basis)
}

/// Diagonal of `J3 = s(α₀[N] + β₀[N−1])` on `|n⟩`.
pub fn fock_j3_diag(n: u32, vacuum: VacuumState, basis: &PQBasis) -> Result<f64> {
    let lower = gauss_number_signed(n as i64 - 1, basis)?;
    Ok(basis.s * (vacuum.alpha0 * gauss_number(n, basis) + vacuum.beta0 * lower))
}

/// `[a, a†]` on `|n⟩` as `α₀([n+2] − [n+1]) + β₀([n+1] − [n])`.
pub fn commutator_diag(n: u32, vacuum: VacuumState, basis: &PQBasis) -> f64 {
    let g = |k: u32| gauss_number(k, basis);
    vacuum.alpha0 * (g(n + 2) - g(n + 1)) + vacuum.beta0 * (g(n + 1) - g(n))
}

/// `[a, a†]` on `|n⟩` in the unsimplified form
/// `(r − 1)(α₀[n+1] + β₀[n]) + s(α₀[n] + β₀[n−1])`.
pub fn commutator_diag_expanded(n: u32, vacuum: VacuumState, basis: &PQBasis) -> Result<f64> {
    let h = fock_h_diag(n, vacuum, basis);
    let j3 = fock_j3_diag(n, vacuum, basis)?;
    Ok((basis.r - 1.0) * h + j3)
}

/// Diagonal of `C⁽²⁾ = a a† − α₀([N+2] − 1) − β₀([N+1] − 1)` on `|n⟩`.
///
/// `a a†|n⟩ = N_n²|n⟩` is taken from the ladder recursion, not from the
/// closed form, so the result is a genuine check that `C⁽²⁾ = β₀`.
pub fn casimir2_diag(n: u32, vacuum: VacuumState, basis: &PQBasis) -> Result<f64> {
    let funcs = CharacteristicFunctions::linear(basis.params());
    let seq = iterate_eigenvalues(&funcs, vacuum, n as usize + 1)?;
    let aa_dag = seq.norms_sq()[n as usize];
    let g = |k: u32| gauss_number(k, basis);
    Ok(aa_dag - vacuum.alpha0 * (g(n + 2) - 1.0) - vacuum.beta0 * (g(n + 1) - 1.0))
}
