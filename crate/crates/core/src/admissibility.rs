//! Admissible vacua of the linear case.
//!
//! A vacuum `(α₀, β₀)` gives a Fock representation iff every ladder norm is
//! non-negative, i.e. `α_n ≥ α₀` for all `n ≥ 1`, equivalently
//! `β₀[n] ≥ (1 − [n+1])α₀`. Two sources answer this:
//!
//! * closed-form lower bounds on `β₀` per region of the real `(λ₋, λ₊)`
//!   half-plane ([`classify_lambda_region`], [`beta0_bound_analytic`]);
//! * a numerical oracle that iterates the recurrence and settles the
//!   `n → ∞` tail from the modal decomposition of `α_n`
//!   ([`oracle_verdict`]).
//!
//! [`scan_agreement`] compares the two.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::algebra::{LinearParams, VacuumState};
use crate::error::{GhaError, Result};
use crate::linear_dynamics::{eigenvalues, map_period, DEFAULT_PROBE_DEPTH};

/// Region membership tolerance in the `(λ₋, λ₊)` plane.
pub const REGION_TOL: f64 = 1e-10;
/// Default iteration depth of the numerical oracle.
pub const DEFAULT_N_MAX: usize = 200;
/// Eigenvalue moduli within this distance of 1 are treated as on the unit circle.
const UNIT_TOL: f64 = 1e-9;
/// Hard cap on extra iterations spent waiting for a transient to die out.
const SETTLE_CAP: usize = 1_000_000;
/// Modal coefficients below this (relative to the vacuum scale) are rounding noise.
const COEFF_ZERO: f64 = 64.0 * f64::EPSILON;
/// Default admissibility tolerance used by the scan.
pub const SCAN_TOL: f64 = 1e-10;

#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum RegionLabel {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    B_I_II,
    B_I_IV,
    B_II_III,
    B_IV_V,
    B_V_VI,
    B_III_V,
    B_III_VI,
    B_VI_VII,
    Undefined,
}

impl RegionLabel {
    pub const ALL: [RegionLabel; 16] = [
        RegionLabel::I,
        RegionLabel::II,
        RegionLabel::III,
        RegionLabel::IV,
        RegionLabel::V,
        RegionLabel::VI,
        RegionLabel::VII,
        RegionLabel::B_I_II,
        RegionLabel::B_I_IV,
        RegionLabel::B_II_III,
        RegionLabel::B_IV_V,
        RegionLabel::B_V_VI,
        RegionLabel::B_III_V,
        RegionLabel::B_III_VI,
        RegionLabel::B_VI_VII,
        RegionLabel::Undefined,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegionLabel::I => "I",
            RegionLabel::II => "II",
            RegionLabel::III => "III",
            RegionLabel::IV => "IV",
            RegionLabel::V => "V",
            RegionLabel::VI => "VI",
            RegionLabel::VII => "VII",
            RegionLabel::B_I_II => "B_I_II",
            RegionLabel::B_I_IV => "B_I_IV",
            RegionLabel::B_II_III => "B_II_III",
            RegionLabel::B_IV_V => "B_IV_V",
            RegionLabel::B_V_VI => "B_V_VI",
            RegionLabel::B_III_V => "B_III_V",
            RegionLabel::B_III_VI => "B_III_VI",
            RegionLabel::B_VI_VII => "B_VI_VII",
            RegionLabel::Undefined => "Undefined",
        }
    }

    pub fn is_boundary(self) -> bool {
        self.as_str().starts_with("B_")
    }
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Locates `(λ₋, λ₊)` among the regions and boundaries of the half-plane
/// `λ₊ ≥ λ₋`. Points within `tol` of a boundary line get the boundary label;
/// points where three or more regions meet, or that violate `λ₊ ≥ λ₋ − tol`,
/// are `Undefined`.
///
/// The diagonal `λ₋ = λ₊` is assigned to the region lying directly below it
/// (II, III or VII), so a double root is never left unlabelled.
pub fn classify_lambda_region(lm: f64, lp: f64, tol: f64) -> RegionLabel {
    use RegionLabel::*;
    if !lm.is_finite() || !lp.is_finite() || lp < lm - tol {
        return Undefined;
    }
    let near = |x: f64, y: f64| (x - y).abs() <= tol;

    // boundary lines, restricted to the open segments between junctions
    if near(lp, 1.0) && lm > -1.0 + tol {
        return B_I_II;
    }
    if near(lm, -1.0) && lp > 1.0 + tol {
        return B_I_IV;
    }
    if near(lm, -lp) && lp > tol && lp < 1.0 - tol {
        return B_II_III;
    }
    if near(lm, -lp) && lp > 1.0 + tol {
        return B_IV_V;
    }
    if near(lp, 0.0) && lm < -1.0 - tol {
        return B_V_VI;
    }
    if near(lm, -1.0) && lp > tol && lp < 1.0 - tol {
        return B_III_V;
    }
    if near(lm, -1.0) && lp > -1.0 + tol && lp < -tol {
        return B_III_VI;
    }
    if near(lp, -1.0) && lm < -1.0 - tol {
        return B_VI_VII;
    }

    if lp > 1.0 + tol && lm > -1.0 + tol {
        return I;
    }
    if lp > 1.0 + tol && lm > -lp + tol && lm < -1.0 - tol {
        return IV;
    }
    if lp > tol && lm < -lp - tol && lm < -1.0 - tol {
        return V;
    }
    if lp > tol && lp < 1.0 - tol && lm > -lp + tol {
        return II;
    }
    if lp > -1.0 + tol && lp < 1.0 - tol && lm > -1.0 + tol {
        let below = if lp >= -tol { lm < -lp - tol } else { true };
        if below {
            return III;
        }
    }
    if lp > -1.0 + tol && lp < -tol && lm < -1.0 - tol {
        return VI;
    }
    if lp < -1.0 - tol {
        return VII;
    }
    Undefined
}

/// Region of a real eigenvalue pair; `None` for complex pairs.
pub fn region_of_params(params: LinearParams, tol: f64) -> Option<RegionLabel> {
    let pair = eigenvalues(params);
    pair.is_real()
        .then(|| classify_lambda_region(pair.lambda_minus.re, pair.lambda_plus.re, tol))
}

/// A closed-form `β₀` lower bound, or the marker that none exists.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AnalyticBound {
    LowerBound(f64),
    NumericalOnly,
}

impl AnalyticBound {
    pub fn value(self) -> Option<f64> {
        match self {
            AnalyticBound::LowerBound(b) => Some(b),
            AnalyticBound::NumericalOnly => None,
        }
    }
}

impl Serialize for AnalyticBound {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AnalyticBound::LowerBound(b) => serializer.serialize_f64(*b),
            AnalyticBound::NumericalOnly => serializer.serialize_str("numerical-only"),
        }
    }
}

/// The region's lower bound on `β₀` at the given `α₀`.
///
/// Boundary labels substitute the boundary equation into the neighbouring
/// region's formula. Regions II and III (and boundary II/III) list no bound
/// for part of the `α₀` range; those queries return
/// [`GhaError::NoAdmissibleBeta0`].
pub fn beta0_bound_analytic(
    region: RegionLabel,
    lm: f64,
    lp: f64,
    alpha0: f64,
) -> Result<AnalyticBound> {
    use RegionLabel::*;
    let none = || {
        Err(GhaError::NoAdmissibleBeta0 {
            region: region.to_string(),
            alpha0,
        })
    };
    let a = alpha0.abs();
    let b = match region {
        I => region_i(lm, lp, alpha0),
        II => {
            if alpha0 > 0.0 {
                return none();
            }
            (lp + lm - 1.0) * a
        }
        III | B_II_III => {
            if alpha0 != 0.0 {
                return none();
            }
            0.0
        }
        IV => {
            let m = lm.abs();
            if alpha0 >= 0.0 {
                (1.0 - lp + m) * alpha0
            } else {
                (lp * lp + m * m - lp * m - 1.0) / (lp - m) * a
            }
        }
        V => return Ok(AnalyticBound::NumericalOnly),
        VI => region_vi(lm, lp, alpha0),
        VII => {
            if alpha0 >= 0.0 {
                (1.0 + lp.abs() + lm.abs()) * alpha0
            } else {
                -lm.abs() * a
            }
        }
        B_I_II => -lm * alpha0,
        B_I_IV => region_i(-1.0, lp, alpha0),
        B_IV_V => alpha0,
        B_V_VI => region_vi(lm, 0.0, alpha0),
        B_III_V => {
            if alpha0 >= 0.0 {
                (2.0 + lp) * alpha0
            } else {
                lp * a
            }
        }
        B_III_VI => region_vi(-1.0, lp, alpha0),
        B_VI_VII => region_vi(lm, -1.0, alpha0),
        Undefined => {
            return Err(GhaError::Domain(format!(
                "no region for (lambda_minus, lambda_plus) = ({lm}, {lp})"
            )))
        }
    };
    Ok(AnalyticBound::LowerBound(b))
}

fn region_i(lm: f64, lp: f64, alpha0: f64) -> f64 {
    if alpha0 >= 0.0 {
        (1.0 - lp - lm) * alpha0
    } else {
        lp * alpha0.abs()
    }
}

fn region_vi(lm: f64, lp: f64, alpha0: f64) -> f64 {
    let (p, m) = (lp.abs(), lm.abs());
    if alpha0 >= 0.0 {
        (1.0 + p + m) * alpha0
    } else {
        (lp * lp + lm * lm - p * m - 1.0) / (m - p) * alpha0.abs()
    }
}

/// Outcome of the numerical oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum NumericVerdict {
    Admissible,
    /// `first_violation` is the first `n` with `α_n < α₀ − tol`, when one was
    /// reached before overflow.
    Inadmissible {
        first_violation: Option<usize>,
    },
    Inconclusive {
        reason: String,
    },
}

impl NumericVerdict {
    pub fn is_admissible(&self) -> bool {
        matches!(self, NumericVerdict::Admissible)
    }

    pub fn is_conclusive(&self) -> bool {
        !matches!(self, NumericVerdict::Inconclusive { .. })
    }
}

/// Asymptotic form of `α_n`.
#[derive(Debug, Clone, Copy)]
enum Modes {
    /// `c_p pⁿ + c_q qⁿ`, real `p > q`.
    Distinct { p: f64, q: f64, cp: f64, cq: f64 },
    /// `(a + b n) pⁿ`.
    Double { p: f64, a: f64, b: f64 },
    /// `2 Re(c (ρ e^{iθ})ⁿ)`.
    Conjugate { rho: f64, theta: f64, c: Complex64 },
}

fn modes(params: LinearParams, vacuum: VacuumState) -> Modes {
    let pair = eigenvalues(params);
    let VacuumState { alpha0, beta0 } = vacuum;
    let (p, q) = (pair.lambda_plus, pair.lambda_minus);
    if (p - q).norm() < 1e-10 * p.norm().max(1.0) {
        let p = (p.re + q.re) / 2.0;
        // α₁ = (a + b) p = r α₀ + β₀ with r = 2p
        let b = if p == 0.0 {
            0.0
        } else {
            (params.r * alpha0 + beta0) / p - alpha0
        };
        Modes::Double { p, a: alpha0, b }
    } else if pair.is_real() {
        let (p, q) = (p.re, q.re);
        Modes::Distinct {
            p,
            q,
            cp: (alpha0 * p + beta0) / (p - q),
            cq: -(alpha0 * q + beta0) / (p - q),
        }
    } else {
        Modes::Conjugate {
            rho: p.norm(),
            theta: p.arg(),
            c: (p * alpha0 + beta0) / (p - q),
        }
    }
}

/// Bound on the transient part: `amp · n^{linear as i32} · rateⁿ`.
#[derive(Debug, Clone, Copy)]
struct Envelope {
    amp: f64,
    linear: bool,
    rate: f64,
}

impl Envelope {
    fn at(&self, n: usize) -> f64 {
        let lin = if self.linear { n as f64 } else { 1.0 };
        self.amp * lin * self.rate.powf(n as f64)
    }
}

#[derive(Debug, Clone)]
enum Tail {
    Holds,
    Fails,
    /// `α_n` approaches a limit set with infimum `limit_inf`; deviations from
    /// it are bounded by `envelope`.
    Settles {
        limit_inf: f64,
        envelope: Envelope,
    },
}

fn is_unit(x: f64) -> bool {
    (x.abs() - 1.0).abs() <= UNIT_TOL
}

/// Tail of a single real mode `c λⁿ`.
fn single_tail(lambda: f64, c: f64, floor: f64, zero: f64) -> Tail {
    if c.abs() <= zero {
        return if 0.0 >= floor {
            Tail::Holds
        } else {
            Tail::Fails
        };
    }
    if is_unit(lambda) {
        let inf = if lambda > 0.0 { c } else { -c.abs() };
        return if inf >= floor {
            Tail::Holds
        } else {
            Tail::Fails
        };
    }
    if lambda.abs() > 1.0 {
        return if lambda > 0.0 && c > 0.0 {
            Tail::Holds
        } else {
            Tail::Fails
        };
    }
    Tail::Settles {
        limit_inf: 0.0,
        envelope: Envelope {
            amp: c.abs(),
            linear: false,
            rate: lambda.abs(),
        },
    }
}

fn tail_of(params: LinearParams, vacuum: VacuumState, floor: f64) -> Tail {
    let scale = vacuum.alpha0.abs().max(vacuum.beta0.abs()).max(1.0);
    match modes(params, vacuum) {
        Modes::Double { p, a, b } => {
            let zero = COEFF_ZERO * scale;
            if p == 0.0 {
                return Tail::Holds;
            }
            if p.abs() < 1.0 - UNIT_TOL {
                return Tail::Settles {
                    limit_inf: 0.0,
                    envelope: Envelope {
                        amp: a.abs() + b.abs(),
                        linear: true,
                        rate: p.abs(),
                    },
                };
            }
            if b.abs() > zero {
                return if p > 0.0 && b > 0.0 {
                    Tail::Holds
                } else {
                    Tail::Fails
                };
            }
            single_tail(p, a, floor, COEFF_ZERO * scale)
        }
        Modes::Distinct { p, q, cp, cq } => {
            let zero = COEFF_ZERO * scale / (p - q).abs().min(1.0);
            let (d, cd, e, ce) = if p.abs() >= q.abs() {
                (p, cp, q, cq)
            } else {
                (q, cq, p, cp)
            };
            let rho = d.abs();
            if rho - e.abs() <= UNIT_TOL * rho.max(1.0) {
                // p ≈ −q: even and odd subsequences are separate geometric modes
                let (c_pos, c_neg) = if p > 0.0 { (cp, cq) } else { (cq, cp) };
                if rho < 1.0 - UNIT_TOL {
                    return Tail::Settles {
                        limit_inf: 0.0,
                        envelope: Envelope {
                            amp: cp.abs() + cq.abs(),
                            linear: false,
                            rate: rho,
                        },
                    };
                }
                let parities = [c_pos + c_neg, c_pos - c_neg];
                if is_unit(rho) {
                    let inf = parities.iter().cloned().fold(f64::INFINITY, f64::min);
                    return if inf >= floor {
                        Tail::Holds
                    } else {
                        Tail::Fails
                    };
                }
                let ok = parities.iter().all(|&x| {
                    if x.abs() <= zero {
                        0.0 >= floor
                    } else {
                        x > 0.0
                    }
                });
                return if ok { Tail::Holds } else { Tail::Fails };
            }
            if rho < 1.0 - UNIT_TOL {
                return Tail::Settles {
                    limit_inf: 0.0,
                    envelope: Envelope {
                        amp: cp.abs() + cq.abs(),
                        linear: false,
                        rate: rho,
                    },
                };
            }
            if is_unit(rho) {
                let limit_inf = if d > 0.0 { cd } else { -cd.abs() };
                return Tail::Settles {
                    limit_inf,
                    envelope: Envelope {
                        amp: ce.abs(),
                        linear: false,
                        rate: e.abs(),
                    },
                };
            }
            if cd.abs() > zero {
                return if d > 0.0 && cd > 0.0 {
                    Tail::Holds
                } else {
                    Tail::Fails
                };
            }
            single_tail(e, ce, floor, COEFF_ZERO * scale)
        }
        Modes::Conjugate { rho, theta, c } => {
            if c.norm() <= COEFF_ZERO * scale {
                return if 0.0 >= floor {
                    Tail::Holds
                } else {
                    Tail::Fails
                };
            }
            if rho < 1.0 - UNIT_TOL {
                return Tail::Settles {
                    limit_inf: 0.0,
                    envelope: Envelope {
                        amp: 2.0 * c.norm(),
                        linear: false,
                        rate: rho,
                    },
                };
            }
            if rho > 1.0 + UNIT_TOL {
                return Tail::Fails;
            }
            let inf = match map_period(params, DEFAULT_PROBE_DEPTH) {
                Some(k) => (1..=k)
                    .map(|n| 2.0 * (c * Complex64::from_polar(1.0, n as f64 * theta)).re)
                    .fold(f64::INFINITY, f64::min),
                None => -2.0 * c.norm(),
            };
            if inf >= floor {
                Tail::Holds
            } else {
                Tail::Fails
            }
        }
    }
}

/// `α_1, α_2, …` from the planar map.
struct Levels {
    params: LinearParams,
    alpha: f64,
    beta: f64,
}

impl Levels {
    fn new(params: LinearParams, vacuum: VacuumState) -> Self {
        Self {
            params,
            alpha: vacuum.alpha0,
            beta: vacuum.beta0,
        }
    }

    fn step(&mut self) -> f64 {
        (self.alpha, self.beta) = (
            self.params.r * self.alpha + self.beta,
            self.params.s * self.alpha,
        );
        self.alpha
    }
}

/// Decides whether `α_n ≥ α₀ − tol·max(1, |α₀|, |β₀|)` for every `n ≥ 1`.
///
/// The first `n_max` levels are checked directly. The remaining tail is
/// settled from the modal form of `α_n`: the sign of the dominant coefficient
/// when the spectral radius exceeds 1, the limit set on the unit circle, and
/// further iteration until the transient is provably below the margin when
/// the sequence converges.
pub fn oracle_verdict(
    params: LinearParams,
    vacuum: VacuumState,
    n_max: usize,
    tol: f64,
) -> Result<NumericVerdict> {
    if n_max < 16 {
        return Err(GhaError::InvalidArgument(format!(
            "n_max must be >= 16, got {n_max}"
        )));
    }
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(GhaError::InvalidArgument(format!("bad tolerance {tol}")));
    }
    let scale = vacuum.alpha0.abs().max(vacuum.beta0.abs()).max(1.0);
    let floor = vacuum.alpha0 - tol * scale;

    let mut levels = Levels::new(params, vacuum);
    let mut overflowed = false;
    for n in 1..=n_max {
        let a = levels.step();
        if !a.is_finite() {
            overflowed = true;
            break;
        }
        if a < floor {
            return Ok(NumericVerdict::Inadmissible {
                first_violation: Some(n),
            });
        }
    }

    let search = |mut levels: Levels| {
        for n in n_max + 1..=n_max + SETTLE_CAP {
            let a = levels.step();
            if !a.is_finite() {
                break;
            }
            if a < floor {
                return Some(n);
            }
        }
        None
    };

    Ok(match tail_of(params, vacuum, floor) {
        Tail::Holds => NumericVerdict::Admissible,
        Tail::Fails => NumericVerdict::Inadmissible {
            first_violation: if overflowed { None } else { search(levels) },
        },
        Tail::Settles {
            limit_inf,
            envelope,
        } => {
            let margin = limit_inf - floor;
            if margin < 0.0 {
                NumericVerdict::Inadmissible {
                    first_violation: search(levels),
                }
            } else if margin == 0.0 {
                NumericVerdict::Inconclusive {
                    reason: "limit coincides with alpha0".into(),
                }
            } else {
                let mut n = n_max;
                loop {
                    if envelope.at(n) < margin {
                        break NumericVerdict::Admissible;
                    }
                    if n >= n_max + SETTLE_CAP {
                        break NumericVerdict::Inconclusive {
                            reason: format!("transient not settled after {n} levels"),
                        };
                    }
                    n += 1;
                    if levels.step() < floor {
                        break NumericVerdict::Inadmissible {
                            first_violation: Some(n),
                        };
                    }
                }
            }
        }
    })
}

/// Where an [`AdmissibilityVerdict`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictSource {
    Analytic,
    Numeric,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityVerdict {
    pub admissible: bool,
    pub beta0_lower_bound: AnalyticBound,
    pub source: VerdictSource,
    pub region: Option<RegionLabel>,
    pub numeric: NumericVerdict,
    /// `Some(false)` when the closed-form bound contradicts the oracle.
    pub analytic_agrees: Option<bool>,
}

/// Oracle-only verdict. The reported bound is the tightest `β₀` lower bound
/// implied by the constraints up to `n_max`, or `numerical-only` if there is none.
pub fn admissible_numeric(
    params: LinearParams,
    vacuum: VacuumState,
    n_max: usize,
    tol: f64,
) -> Result<AdmissibilityVerdict> {
    let numeric = oracle_verdict(params, vacuum, n_max, tol)?;
    let bound = numeric_beta0_interval(params, vacuum.alpha0, n_max)?
        .map(|iv| iv.lower)
        .filter(|b| b.is_finite())
        .map_or(AnalyticBound::NumericalOnly, AnalyticBound::LowerBound);
    Ok(AdmissibilityVerdict {
        admissible: numeric.is_admissible(),
        beta0_lower_bound: bound,
        source: VerdictSource::Numeric,
        region: region_of_params(params, REGION_TOL),
        numeric,
        analytic_agrees: None,
    })
}

/// Combined verdict: the oracle decides, the closed form is reported alongside
/// and cross-checked when the eigenvalues are real and the region has one.
pub fn assess(
    params: LinearParams,
    vacuum: VacuumState,
    n_max: usize,
    tol: f64,
) -> Result<AdmissibilityVerdict> {
    let numeric = oracle_verdict(params, vacuum, n_max, tol)?;
    let pair = eigenvalues(params);
    let region = region_of_params(params, REGION_TOL);
    let analytic = match region {
        Some(label) if label != RegionLabel::Undefined => Some(beta0_bound_analytic(
            label,
            pair.lambda_minus.re,
            pair.lambda_plus.re,
            vacuum.alpha0,
        )),
        _ => None,
    };
    let scale = vacuum.beta0.abs().max(1.0);
    let analytic_admissible = match &analytic {
        Some(Ok(AnalyticBound::LowerBound(b))) => Some(vacuum.beta0 >= b - tol * scale),
        Some(Err(GhaError::NoAdmissibleBeta0 { .. })) => Some(false),
        _ => None,
    };
    let bound = match analytic {
        Some(Ok(bound)) => bound,
        _ => AnalyticBound::NumericalOnly,
    };
    let (source, agrees) = match (analytic_admissible, numeric.is_conclusive()) {
        (Some(a), true) if a == numeric.is_admissible() => (VerdictSource::Both, Some(true)),
        (Some(_), true) => (VerdictSource::Numeric, Some(false)),
        (Some(a), false) => {
            return Ok(AdmissibilityVerdict {
                admissible: a,
                beta0_lower_bound: bound,
                source: VerdictSource::Analytic,
                region,
                numeric,
                analytic_agrees: None,
            })
        }
        (None, _) => (VerdictSource::Numeric, None),
    };
    Ok(AdmissibilityVerdict {
        admissible: numeric.is_admissible(),
        beta0_lower_bound: bound,
        source,
        region,
        numeric,
        analytic_agrees: agrees,
    })
}

/// Interval of `β₀` satisfying `β₀[n] ≥ (1 − [n+1])α₀` for `1 ≤ n ≤ n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Beta0Interval {
    pub lower: f64,
    pub upper: f64,
    /// Last `n` that contributed before overflow.
    pub n_checked: usize,
}

/// `None` when the finite constraints are already contradictory.
pub fn numeric_beta0_interval(
    params: LinearParams,
    alpha0: f64,
    n_max: usize,
) -> Result<Option<Beta0Interval>> {
    if n_max == 0 {
        return Err(GhaError::InvalidArgument("n_max must be >= 1".into()));
    }
    let (mut lower, mut upper) = (f64::NEG_INFINITY, f64::INFINITY);
    // [n] and [n+1] by [k+1] = r[k] + s[k-1]
    let (mut g_n, mut g_next) = (1.0_f64, params.r);
    let mut n_checked = 0;
    for n in 1..=n_max {
        if !g_n.is_finite() || !g_next.is_finite() {
            break;
        }
        let rhs = (1.0 - g_next) * alpha0;
        let zero = 1e-14 * g_next.abs().max(1.0);
        if g_n.abs() <= zero {
            if rhs > 1e-12 * alpha0.abs().max(1.0) {
                return Ok(None);
            }
        } else if g_n > 0.0 {
            lower = lower.max(rhs / g_n);
        } else {
            upper = upper.min(rhs / g_n);
        }
        n_checked = n;
        (g_n, g_next) = (g_next, params.r * g_next + params.s * g_n);
    }
    Ok((lower <= upper).then_some(Beta0Interval {
        lower,
        upper,
        n_checked,
    }))
}

/// `(1 − [n+1])/[n]` for `n = 1..=n_max`, skipping indices where `[n] = 0`.
pub fn bound_coefficients(params: LinearParams, n_max: usize) -> Vec<(usize, f64)> {
    let (mut g_n, mut g_next) = (1.0_f64, params.r);
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        if !g_n.is_finite() || !g_next.is_finite() {
            break;
        }
        if g_n != 0.0 {
            out.push((n, (1.0 - g_next) / g_n));
        }
        (g_n, g_next) = (g_next, params.r * g_next + params.s * g_n);
    }
    out
}

/// One `(λ₋, λ₊, α₀)` point to compare.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanSample {
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub alpha0: f64,
}

impl ScanSample {
    pub fn params(&self) -> LinearParams {
        LinearParams {
            r: self.lambda_plus + self.lambda_minus,
            s: -self.lambda_plus * self.lambda_minus,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Disagreement {
    pub sample: ScanSample,
    pub region: RegionLabel,
    /// `None` when the region lists no admissible `β₀` at this `α₀`.
    pub bound: Option<f64>,
    pub above: Option<NumericVerdict>,
    pub below: Option<NumericVerdict>,
    /// An admissible `β₀` found where none was expected.
    pub witness_beta0: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RegionTally {
    pub sampled: usize,
    pub agreed: usize,
    pub disagreed: usize,
    pub inconclusive: usize,
    pub skipped: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct AgreementReport {
    pub total: usize,
    pub compared: usize,
    pub agreed: usize,
    pub inconclusive: usize,
    /// Region V (no closed form) and `Undefined` points.
    pub skipped: usize,
    pub per_region: BTreeMap<String, RegionTally>,
    pub disagreements: Vec<Disagreement>,
}

impl AgreementReport {
    /// Agreed fraction of the conclusive comparisons.
    pub fn agreement_fraction(&self) -> f64 {
        let conclusive = self.compared - self.inconclusive;
        if conclusive == 0 {
            1.0
        } else {
            self.agreed as f64 / conclusive as f64
        }
    }

    pub fn inconclusive_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.inconclusive as f64 / self.total as f64
        }
    }
}

enum Outcome {
    Skipped,
    Agreed,
    Inconclusive,
    Disagreed(Disagreement),
}

/// `β₀` values probed when a region claims no admissible `β₀` exists.
fn probe_beta0s(alpha0: f64) -> impl Iterator<Item = f64> {
    let scale = alpha0.abs().max(1.0);
    (-200..=200).map(move |k| k as f64 * 0.25 * scale)
}

fn compare_one(sample: ScanSample, n_max: usize, tol: f64) -> (RegionLabel, Outcome) {
    let ScanSample {
        lambda_minus: lm,
        lambda_plus: lp,
        alpha0,
    } = sample;
    let region = classify_lambda_region(lm, lp, REGION_TOL);
    if matches!(region, RegionLabel::V | RegionLabel::Undefined) {
        return (region, Outcome::Skipped);
    }
    let params = sample.params();
    let verdict = |beta0: f64| {
        VacuumState::new(alpha0, beta0)
            .and_then(|v| oracle_verdict(params, v, n_max, tol))
            .unwrap_or_else(|e| NumericVerdict::Inconclusive {
                reason: e.to_string(),
            })
    };
    let outcome = match beta0_bound_analytic(region, lm, lp, alpha0) {
        Ok(AnalyticBound::NumericalOnly) | Err(GhaError::Domain(_)) => Outcome::Skipped,
        Ok(AnalyticBound::LowerBound(b)) => {
            let eps = 1e-6 * b.abs().max(1.0);
            let above = verdict(b + eps);
            let below = verdict(b - eps);
            if !above.is_conclusive() || !below.is_conclusive() {
                Outcome::Inconclusive
            } else if above.is_admissible() && !below.is_admissible() {
                Outcome::Agreed
            } else {
                Outcome::Disagreed(Disagreement {
                    sample,
                    region,
                    bound: Some(b),
                    above: Some(above),
                    below: Some(below),
                    witness_beta0: None,
                })
            }
        }
        Err(_) => {
            let mut witness = None;
            let mut inconclusive = false;
            for beta0 in probe_beta0s(alpha0) {
                match verdict(beta0) {
                    NumericVerdict::Admissible => {
                        witness = Some(beta0);
                        break;
                    }
                    NumericVerdict::Inconclusive { .. } => inconclusive = true,
                    NumericVerdict::Inadmissible { .. } => {}
                }
            }
            match witness {
                Some(beta0) => Outcome::Disagreed(Disagreement {
                    sample,
                    region,
                    bound: None,
                    above: None,
                    below: None,
                    witness_beta0: Some(beta0),
                }),
                None if inconclusive => Outcome::Inconclusive,
                None => Outcome::Agreed,
            }
        }
    };
    (region, outcome)
}

/// Tests every closed-form bound against the oracle: `β₀ = b + ε` must be
/// admissible and `β₀ = b − ε` must not, with `ε = 1e-6·max(1, |b|)`.
/// Where a region lists no admissible `β₀`, a fixed ladder of `β₀` values
/// is probed instead. Region V and `Undefined` points are skipped.
pub fn scan_agreement(samples: &[ScanSample], n_max: usize, tol: f64) -> AgreementReport {
    let outcomes: Vec<(RegionLabel, Outcome)> = samples
        .par_iter()
        .map(|&s| compare_one(s, n_max, tol))
        .collect();

    let mut report = AgreementReport {
        total: samples.len(),
        ..Default::default()
    };
    for (region, outcome) in outcomes {
        let tally = report.per_region.entry(region.to_string()).or_default();
        tally.sampled += 1;
        match outcome {
            Outcome::Skipped => {
                tally.skipped += 1;
                report.skipped += 1;
            }
            Outcome::Agreed => {
                tally.agreed += 1;
                report.compared += 1;
                report.agreed += 1;
            }
            Outcome::Inconclusive => {
                tally.inconclusive += 1;
                report.compared += 1;
                report.inconclusive += 1;
            }
            Outcome::Disagreed(d) => {
                tally.disagreed += 1;
                report.compared += 1;
                report.disagreements.push(d);
            }
        }
    }
    report
}

/// Row of the `(λ₋, λ₊)` region map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaRegionRow {
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub region: RegionLabel,
    /// Bound at `α₀ = +1` and `α₀ = −1`; `None` when there is none.
    pub bound_pos: Option<AnalyticBound>,
    pub bound_neg: Option<AnalyticBound>,
}

/// Region labels on the half-grid `λ₊ ≥ λ₋` of `[min, max]²`.
pub fn lambda_region_map(min: f64, max: f64, n: usize) -> Result<Vec<LambdaRegionRow>> {
    let axis = crate::linear_dynamics::grid_axis(min, max, n)?;
    let mut rows = Vec::new();
    for &lp in &axis {
        for &lm in axis.iter().filter(|&&lm| lm <= lp) {
            let region = classify_lambda_region(lm, lp, REGION_TOL);
            let bound = |a0: f64| beta0_bound_analytic(region, lm, lp, a0).ok();
            rows.push(LambdaRegionRow {
                lambda_minus: lm,
                lambda_plus: lp,
                region,
                bound_pos: bound(1.0),
                bound_neg: bound(-1.0),
            });
        }
    }
    Ok(rows)
}
