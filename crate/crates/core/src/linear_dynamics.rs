//! The linear case `f(x) = r x`, `g(x) = s x`.
//!
//! The ladder recursion becomes the planar map
//!
//! ```text
//! (α, β) ↦ (r α + β, s α),   M = [[r, 1], [s, 0]]
//! ```
//!
//! whose eigenvalues solve `λ² − rλ − s = 0`. In the `(r, s)` plane the
//! origin is asymptotically stable inside the triangle `A = (0, 1)`,
//! `B = (−2, −1)`, `C = (2, −1)`; the edges are the lines where an eigenvalue
//! sits on the unit circle: `AC` (`λ = 1`, `r + s = 1`), `AB` (`λ = −1`,
//! `s = 1 + r`) and `BC` (`|λ| = 1` complex pair, `s = −1`).

use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::algebra::{EigenPair, LinearParams, VacuumState};
use crate::error::{GhaError, Result};

/// Tolerance on `M^k = I` when probing for periodic spectra.
pub const PERIOD_TOL: f64 = 1e-9;
/// Default cap on the period search.
pub const DEFAULT_PROBE_DEPTH: usize = 64;

pub fn eigenvalues(params: LinearParams) -> EigenPair {
    let LinearParams { r, s } = params;
    let disc = params.discriminant();
    if disc >= 0.0 {
        let root = disc.sqrt();
        // larger-magnitude root first, the other from the product −s
        let big = if r >= 0.0 {
            (r + root) / 2.0
        } else {
            (r - root) / 2.0
        };
        let small = if big == 0.0 { 0.0 } else { -s / big };
        let (plus, minus) = if big >= small {
            (big, small)
        } else {
            (small, big)
        };
        EigenPair {
            lambda_plus: Complex64::new(plus, 0.0),
            lambda_minus: Complex64::new(minus, 0.0),
            discriminant: disc,
        }
    } else {
        let im = (-disc).sqrt() / 2.0;
        EigenPair {
            lambda_plus: Complex64::new(r / 2.0, im),
            lambda_minus: Complex64::new(r / 2.0, -im),
            discriminant: disc,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FixedPoints {
    OriginOnly,
    /// The origin plus the line `(α*, s α*)`.
    OriginAndLine {
        slope: f64,
    },
}

/// `(0, 0)` always; the line `(α*, s α*)` as well when `|r + s − 1| <= tol`.
pub fn fixed_points(params: LinearParams, tol: f64) -> FixedPoints {
    if (params.r + params.s - 1.0).abs() <= tol {
        FixedPoints::OriginAndLine { slope: params.s }
    } else {
        FixedPoints::OriginOnly
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum StabilityKind {
    AsymptoticallyStable,
    Unstable,
    MarginallyStableOrigin,
    PeriodTwoEdge,
    FixedLineMarginal,
    FixedLineUnstable,
}

impl StabilityKind {
    pub fn is_marginal(self) -> bool {
        matches!(
            self,
            StabilityKind::MarginallyStableOrigin
                | StabilityKind::PeriodTwoEdge
                | StabilityKind::FixedLineMarginal
        )
    }
}

impl fmt::Display for StabilityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityClass {
    pub kind: StabilityKind,
    pub eigenpair: EigenPair,
    pub fixed_points: FixedPoints,
}

pub fn classify_stability(params: LinearParams, tol: f64) -> StabilityClass {
    let eigenpair = eigenvalues(params);
    let fixed_points = fixed_points(params, tol);
    let LinearParams { r, s } = params;

    let kind = if matches!(fixed_points, FixedPoints::OriginAndLine { .. }) {
        // λ₊ = 1, λ₋ = r − 1 on the line r + s = 1
        if r >= -tol && r <= 2.0 + tol {
            StabilityKind::FixedLineMarginal
        } else {
            StabilityKind::FixedLineUnstable
        }
    } else {
        let radius = eigenpair.spectral_radius();
        if radius < 1.0 - tol {
            StabilityKind::AsymptoticallyStable
        } else if radius > 1.0 + tol {
            StabilityKind::Unstable
        } else {
            // On the closed triangle boundary away from AC: either the
            // complex unit pair (BC) or λ₋ = −1 (AB).
            let on_bc = (s + 1.0).abs() <= tol && eigenpair.discriminant < 0.0;
            let dist_ab = (1.0 + r - s).abs();
            let dist_bc = (1.0 + s).abs();
            if on_bc || (dist_bc < dist_ab && !eigenpair.is_real()) {
                StabilityKind::MarginallyStableOrigin
            } else {
                StabilityKind::PeriodTwoEdge
            }
        }
    };
    StabilityClass {
        kind,
        eigenpair,
        fixed_points,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum TriangleRegion {
    Inside,
    EdgeAB,
    EdgeBC,
    EdgeAC,
    VertexA,
    VertexB,
    VertexC,
    Outside,
}

impl fmt::Display for TriangleRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            TriangleRegion::Inside => "inside",
            TriangleRegion::EdgeAB => "edgeAB",
            TriangleRegion::EdgeBC => "edgeBC",
            TriangleRegion::EdgeAC => "edgeAC",
            TriangleRegion::VertexA => "vertexA",
            TriangleRegion::VertexB => "vertexB",
            TriangleRegion::VertexC => "vertexC",
            TriangleRegion::Outside => "outside",
        };
        f.write_str(name)
    }
}

/// Locates `(r, s)` against the triangle ABC using the three edge functions
/// `1 − r − s` (AC), `1 + r − s` (AB) and `1 + s` (BC), all positive inside.
pub fn triangle_region(params: LinearParams, tol: f64) -> TriangleRegion {
    let LinearParams { r, s } = params;
    let ac = 1.0 - r - s;
    let ab = 1.0 + r - s;
    let bc = 1.0 + s;
    let on = |e: f64| e.abs() <= tol;
    let within = |e: f64| e >= -tol;

    match (on(ab), on(bc), on(ac)) {
        (true, false, true) => TriangleRegion::VertexA,
        (true, true, false) => TriangleRegion::VertexB,
        (false, true, true) => TriangleRegion::VertexC,
        (true, true, true) => TriangleRegion::VertexA,
        (true, false, false) if within(bc) && within(ac) => TriangleRegion::EdgeAB,
        (false, true, false) if within(ab) && within(ac) => TriangleRegion::EdgeBC,
        (false, false, true) if within(ab) && within(bc) => TriangleRegion::EdgeAC,
        (false, false, false) if ac > 0.0 && ab > 0.0 && bc > 0.0 => TriangleRegion::Inside,
        _ => TriangleRegion::Outside,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", content = "period")]
pub enum SpectrumType {
    EvenlySpaced,
    IncreasingSpacing,
    DecreasingSpacing,
    Periodic(usize),
    DenseQuasiperiodic,
    Constant,
    Unclassified,
}

impl fmt::Display for SpectrumType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumType::Periodic(k) => write!(f, "Periodic({k})"),
            other => fmt::Debug::fmt(other, f),
        }
    }
}

type Mat2 = [[f64; 2]; 2];

fn mat_mul(x: &Mat2, y: &Mat2) -> Mat2 {
    [
        [
            x[0][0] * y[0][0] + x[0][1] * y[1][0],
            x[0][0] * y[0][1] + x[0][1] * y[1][1],
        ],
        [
            x[1][0] * y[0][0] + x[1][1] * y[1][0],
            x[1][0] * y[0][1] + x[1][1] * y[1][1],
        ],
    ]
}

pub fn map_matrix(params: LinearParams) -> [[f64; 2]; 2] {
    [[params.r, 1.0], [params.s, 0.0]]
}

/// Smallest `k` in `2..=max_k` with `M^k = I` to within `PERIOD_TOL`.
pub fn map_period(params: LinearParams, max_k: usize) -> Option<usize> {
    let m = map_matrix(params);
    let mut power = m;
    for k in 2..=max_k {
        power = mat_mul(&power, &m);
        let dev = (power[0][0] - 1.0)
            .abs()
            .max(power[0][1].abs())
            .max(power[1][0].abs())
            .max((power[1][1] - 1.0).abs());
        if dev <= PERIOD_TOL {
            return Some(k);
        }
        if !dev.is_finite() {
            return None;
        }
    }
    None
}

/// Classifies the morphology of the level sequence grown from `vacuum`.
///
/// Unit-modulus cases are probed for `M^k = I` with `k <= probe_depth`;
/// anything not periodic by then is reported as dense.
pub fn classify_spectrum(
    params: LinearParams,
    vacuum: VacuumState,
    probe_depth: usize,
) -> Result<SpectrumType> {
    classify_spectrum_with_tol(params, vacuum, probe_depth, crate::algebra::DEFAULT_TOL)
}

pub fn classify_spectrum_with_tol(
    params: LinearParams,
    vacuum: VacuumState,
    probe_depth: usize,
    tol: f64,
) -> Result<SpectrumType> {
    if probe_depth < 8 {
        return Err(GhaError::InvalidArgument(format!(
            "probe_depth must be >= 8, got {probe_depth}"
        )));
    }
    let LinearParams { r, s } = params;
    let (alpha1, beta1) = (r * vacuum.alpha0 + vacuum.beta0, s * vacuum.alpha0);
    let scale = vacuum.alpha0.abs().max(vacuum.beta0.abs()).max(1.0);
    if (alpha1 - vacuum.alpha0).abs() <= tol * scale && (beta1 - vacuum.beta0).abs() <= tol * scale
    {
        return Ok(SpectrumType::Constant);
    }

    let pair = eigenvalues(params);
    let (mod_plus, mod_minus) = pair.moduli();
    let radius = mod_plus.max(mod_minus);

    if (r - 2.0).abs() <= tol && (s + 1.0).abs() <= tol {
        return Ok(SpectrumType::EvenlySpaced);
    }
    if (radius - 1.0).abs() <= tol {
        if let Some(k) = map_period(params, probe_depth) {
            return Ok(SpectrumType::Periodic(k));
        }
        if !pair.is_real() {
            return Ok(SpectrumType::DenseQuasiperiodic);
        }
    }
    let plus = pair.lambda_plus.re;
    if pair.is_real() && plus > 1.0 + tol && plus >= mod_minus {
        return Ok(SpectrumType::IncreasingSpacing);
    }
    if radius < 1.0 - tol {
        return Ok(SpectrumType::DecreasingSpacing);
    }
    // simple λ₊ = 1 with a contracting partner: levels saturate at a finite limit
    if pair.is_real() && (plus - 1.0).abs() <= tol && mod_minus < 1.0 - tol {
        return Ok(SpectrumType::DecreasingSpacing);
    }
    Ok(SpectrumType::Unclassified)
}

/// Applies `M = [[r, 1], [s, 0]]` `steps` times; returns `steps + 1` points.
pub fn iterate_map(
    params: LinearParams,
    point: (f64, f64),
    steps: usize,
) -> Result<Vec<(f64, f64)>> {
    let mut trajectory = Vec::with_capacity(steps + 1);
    let (mut alpha, mut beta) = point;
    trajectory.push(point);
    for k in 1..=steps {
        (alpha, beta) = (params.r * alpha + beta, params.s * alpha);
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(GhaError::Truncation { index: k });
        }
        trajectory.push((alpha, beta));
    }
    Ok(trajectory)
}

/// One row of the `(r, s)` region map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionMapRow {
    pub r: f64,
    pub s: f64,
    pub stability_kind: StabilityKind,
    pub spectrum_kind: SpectrumType,
    pub abs_lambda_plus: f64,
    pub abs_lambda_minus: f64,
}

/// Evaluates an `n×n` grid over `[min, max]²`, rows ordered by `r` then `s`.
/// Spectrum kinds use `vacuum` as the reference ground state.
pub fn region_map(
    min: f64,
    max: f64,
    n: usize,
    vacuum: VacuumState,
    tol: f64,
) -> Result<Vec<RegionMapRow>> {
    let axis = grid_axis(min, max, n)?;
    let points: Vec<(f64, f64)> = axis
        .iter()
        .flat_map(|&r| axis.iter().map(move |&s| (r, s)))
        .collect();
    points
        .par_iter()
        .map(|&(r, s)| {
            let params = LinearParams::new(r, s)?;
            let class = classify_stability(params, tol);
            let (abs_lambda_plus, abs_lambda_minus) = class.eigenpair.moduli();
            Ok(RegionMapRow {
                r,
                s,
                stability_kind: class.kind,
                spectrum_kind: classify_spectrum_with_tol(
                    params,
                    vacuum,
                    DEFAULT_PROBE_DEPTH,
                    tol,
                )?,
                abs_lambda_plus,
                abs_lambda_minus,
            })
        })
        .collect()
}

/// `n` evenly spaced points on `[min, max]` inclusive.
pub fn grid_axis(min: f64, max: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !min.is_finite() || !max.is_finite() || min >= max {
        return Err(GhaError::InvalidArgument(format!(
            "grid needs finite min < max and n >= 2 (got {min}, {max}, {n})"
        )));
    }
    let step = (max - min) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                max
            } else {
                min + step * i as f64
            }
        })
        .collect())
}
