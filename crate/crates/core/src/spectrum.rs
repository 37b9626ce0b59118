//! Energy-level datasets of the linear case: levels, gaps and their shape.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;

use crate::admissibility::{numeric_beta0_interval, oracle_verdict, NumericVerdict, DEFAULT_N_MAX};
use crate::algebra::{LinearParams, VacuumState};
use crate::error::{GhaError, Result};
use crate::linear_dynamics::{
    classify_spectrum, eigenvalues, map_period, SpectrumType, DEFAULT_PROBE_DEPTH,
};

/// Absolute tolerance (relative to the level scale) for comparing gaps.
const GAP_TOL: f64 = 1e-9;
/// Admissibility tolerance applied before emitting levels.
const LEVEL_TOL: f64 = 1e-9;
/// Phase discrepancy below which a non-periodic unit-circle spectrum counts as dense.
pub const DENSE_DISCREPANCY: f64 = 0.01;
/// Number of levels used by the density probe.
pub const DENSE_PROBE_LEVELS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Flat,
    Increasing,
    Decreasing,
    NonMonotone,
}

/// Shape of a gap sequence: non-strict trend, `Flat` when every gap is equal.
pub fn gap_monotonicity(gaps: &[f64], tol: f64) -> Monotonicity {
    let (mut up, mut down) = (false, false);
    for w in gaps.windows(2) {
        let d = w[1] - w[0];
        up |= d > tol;
        down |= d < -tol;
    }
    match (up, down) {
        (false, false) => Monotonicity::Flat,
        (true, false) => Monotonicity::Increasing,
        (false, true) => Monotonicity::Decreasing,
        (true, true) => Monotonicity::NonMonotone,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelSet {
    pub params: LinearParams,
    pub vacuum: VacuumState,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// `α_{n+1} − α_n`, one fewer than `alphas`.
    pub gaps: Vec<f64>,
    pub gap_trend: Monotonicity,
    /// `lim α_n` when it exists.
    pub limit: Option<f64>,
    /// `sup α_n` when the sequence is bounded above.
    pub supremum: Option<f64>,
    pub admissibility: NumericVerdict,
}

/// `α_n`, `β_n` for `n = 0..=n_levels` plus gaps and trend annotations.
///
/// The vacuum is first checked with the admissibility oracle; inadmissible
/// vacua are rejected with the violated constraint. An inconclusive oracle is
/// passed through in `admissibility`.
pub fn levels(params: LinearParams, vacuum: VacuumState, n_levels: usize) -> Result<LevelSet> {
    if n_levels == 0 {
        return Err(GhaError::InvalidArgument("n_levels must be >= 1".into()));
    }
    let verdict = oracle_verdict(params, vacuum, n_levels.max(DEFAULT_N_MAX), LEVEL_TOL)?;
    if let NumericVerdict::Inadmissible { first_violation } = verdict {
        let mut detail = match first_violation {
            Some(n) => format!("alpha_{n} < alpha0"),
            None => "alpha_n < alpha0 for large n".to_owned(),
        };
        if let Some(iv) = numeric_beta0_interval(params, vacuum.alpha0, DEFAULT_N_MAX)? {
            let _ = write!(detail, "; beta0 must lie in [{}, {}]", iv.lower, iv.upper);
        }
        return Err(GhaError::Inadmissible {
            alpha0: vacuum.alpha0,
            beta0: vacuum.beta0,
            detail,
        });
    }

    let mut alphas = Vec::with_capacity(n_levels + 1);
    let mut betas = Vec::with_capacity(n_levels + 1);
    let (mut a, mut b) = (vacuum.alpha0, vacuum.beta0);
    alphas.push(a);
    betas.push(b);
    for n in 1..=n_levels {
        (a, b) = (params.r * a + b, params.s * a);
        if !a.is_finite() || !b.is_finite() {
            return Err(GhaError::Truncation { index: n });
        }
        alphas.push(a);
        betas.push(b);
    }
    let gaps: Vec<f64> = alphas.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = alphas.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let gap_trend = gap_monotonicity(&gaps, GAP_TOL * scale);
    let (limit, supremum) = bounds(params, vacuum, &alphas);
    Ok(LevelSet {
        params,
        vacuum,
        alphas,
        betas,
        gaps,
        gap_trend,
        limit,
        supremum,
        admissibility: verdict,
    })
}

/// `(lim α_n, sup α_n)` from the modal form, where they exist.
fn bounds(params: LinearParams, vacuum: VacuumState, alphas: &[f64]) -> (Option<f64>, Option<f64>) {
    let pair = eigenvalues(params);
    let (p, q) = (pair.lambda_plus, pair.lambda_minus);
    let radius = pair.spectral_radius();
    let seen = alphas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let unit = 1e-9;
    if radius < 1.0 - unit {
        return (Some(0.0), Some(seen.max(0.0)));
    }
    if !pair.is_real() && (radius - 1.0).abs() <= unit {
        // α_n = 2 Re(c pⁿ): a periodic orbit attains its maximum, a dense one approaches 2|c|
        let c = (p * vacuum.alpha0 + vacuum.beta0) / (p - q);
        let sup = match map_period(params, DEFAULT_PROBE_DEPTH) {
            Some(k) if alphas.len() > k => seen,
            _ => 2.0 * c.norm(),
        };
        return (None, Some(sup));
    }
    let (p, q) = (p.re, q.re);
    if pair.is_real() && (p - 1.0).abs() <= unit && q.abs() < 1.0 - unit {
        let limit = (vacuum.alpha0 * p + vacuum.beta0) / (p - q);
        return (Some(limit), Some(seen.max(limit)));
    }
    (None, None)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapStatistics {
    pub min_gap: f64,
    pub max_gap: f64,
    pub monotonicity: Monotonicity,
    /// Smallest lag at which the gap sequence repeats; only for periodic spectra.
    pub period_estimate: Option<usize>,
}

pub fn gap_statistics(levels: &[f64], spectrum: &SpectrumType) -> Result<GapStatistics> {
    if levels.len() < 3 {
        return Err(GhaError::InvalidArgument(format!(
            "gap statistics need at least 3 levels, got {}",
            levels.len()
        )));
    }
    let gaps: Vec<f64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    let scale = levels.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let tol = GAP_TOL * scale;
    let min_gap = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    let max_gap = gaps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let period_estimate = match spectrum {
        SpectrumType::Periodic(_) => repeat_lag(&gaps, tol),
        _ => None,
    };
    Ok(GapStatistics {
        min_gap,
        max_gap,
        monotonicity: gap_monotonicity(&gaps, tol),
        period_estimate,
    })
}

/// Smallest `k` with `x[i + k] = x[i]` for all `i`, seen at least twice over.
fn repeat_lag(x: &[f64], tol: f64) -> Option<usize> {
    (1..=x.len() / 2).find(|&k| x.iter().zip(&x[k..]).all(|(a, b)| (a - b).abs() <= tol))
}

/// Finite evidence that a unit-circle spectrum is dense rather than periodic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityProbe {
    pub levels: usize,
    /// Repeat lag of the gap sequence, if any up to the probe depth.
    pub gap_period: Option<usize>,
    /// Star discrepancy of the normalized phases in `[0, 1)`.
    pub discrepancy: f64,
    pub dense: bool,
}

/// Recovers the phase of each level on its envelope and measures how evenly
/// the phases fill `[0, 1)`. Only meaningful for a complex pair with `|λ| = 1`.
pub fn density_probe(params: LinearParams, vacuum: VacuumState, n: usize) -> Result<DensityProbe> {
    let pair = eigenvalues(params);
    if pair.is_real() || (pair.spectral_radius() - 1.0).abs() > 1e-9 {
        return Err(GhaError::Domain(
            "density probe needs a complex eigenvalue pair on the unit circle".into(),
        ));
    }
    if n < 16 {
        return Err(GhaError::InvalidArgument(format!(
            "need at least 16 levels, got {n}"
        )));
    }
    let theta = pair.lambda_plus.arg();
    let (sin, cos) = theta.sin_cos();
    let mut alphas = Vec::with_capacity(n + 2);
    let (mut a, mut b) = (vacuum.alpha0, vacuum.beta0);
    alphas.push(a);
    for _ in 0..=n {
        (a, b) = (params.r * a + b, params.s * a);
        alphas.push(a);
    }
    // α_n = 2 Re z_n with z_{n+1} = z_n e^{iθ}; recover z_n from (α_n, α_{n+1})
    let mut phases: Vec<f64> = alphas
        .windows(2)
        .take(n)
        .map(|w| {
            let x = w[0] / 2.0;
            let y = (x * cos - w[1] / 2.0) / sin;
            (Complex64::new(x, y).arg() / (2.0 * PI)).rem_euclid(1.0)
        })
        .collect();
    phases.sort_by(f64::total_cmp);
    let len = phases.len() as f64;
    let discrepancy = phases
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i as f64 + 1.0) / len - x).max(x - i as f64 / len))
        .fold(0.0, f64::max);

    let gaps: Vec<f64> = alphas.windows(2).take(n).map(|w| w[1] - w[0]).collect();
    let scale = alphas.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let window = &gaps[..gaps.len().min(2 * DEFAULT_PROBE_DEPTH + 2)];
    let gap_period = repeat_lag(window, GAP_TOL * scale).filter(|&k| k <= DEFAULT_PROBE_DEPTH);
    Ok(DensityProbe {
        levels: n,
        gap_period,
        discrepancy,
        dense: gap_period.is_none() && discrepancy < DENSE_DISCREPANCY,
    })
}

/// One of the five parameter sets illustrating level-spacing morphologies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Figure4Preset {
    pub name: &'static str,
    pub params: LinearParams,
    pub vacuum: VacuumState,
    pub expected: SpectrumType,
}

pub fn figure4_presets() -> Vec<Figure4Preset> {
    let periodic = 2.0 * PI / 3.0;
    let dense = 2.0 * PI / 2f64.sqrt();
    vec![
        Figure4Preset {
            name: "evenly_spaced",
            params: LinearParams { r: 2.0, s: -1.0 },
            vacuum: VacuumState {
                alpha0: 0.0,
                beta0: 1.0,
            },
            expected: SpectrumType::EvenlySpaced,
        },
        Figure4Preset {
            name: "increasing_spacing",
            params: LinearParams { r: 3.0, s: -2.0 },
            vacuum: VacuumState {
                alpha0: 1.0,
                beta0: 0.0,
            },
            expected: SpectrumType::IncreasingSpacing,
        },
        Figure4Preset {
            name: "periodic",
            params: LinearParams {
                r: 2.0 * periodic.cos(),
                s: -1.0,
            },
            vacuum: VacuumState {
                alpha0: -1.0,
                beta0: periodic.cos(),
            },
            expected: SpectrumType::Periodic(3),
        },
        Figure4Preset {
            name: "dense",
            params: LinearParams {
                r: 2.0 * dense.cos(),
                s: -1.0,
            },
            vacuum: VacuumState {
                alpha0: -1.0,
                beta0: dense.cos(),
            },
            expected: SpectrumType::DenseQuasiperiodic,
        },
        Figure4Preset {
            name: "decreasing_spacing",
            params: LinearParams { r: 1.5, s: -0.5 },
            vacuum: VacuumState {
                alpha0: 0.0,
                beta0: 1.0,
            },
            expected: SpectrumType::DecreasingSpacing,
        },
    ]
}

/// Levels plus the morphology classification of the same parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub spectrum: SpectrumType,
    #[serde(flatten)]
    pub levels: LevelSet,
}

pub fn spectrum_report(
    params: LinearParams,
    vacuum: VacuumState,
    n_levels: usize,
) -> Result<SpectrumReport> {
    let levels = levels(params, vacuum, n_levels)?;
    let spectrum = classify_spectrum(params, vacuum, DEFAULT_PROBE_DEPTH)?;
    Ok(SpectrumReport { spectrum, levels })
}
