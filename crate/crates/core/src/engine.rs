//! Robust stability decisions for lambda-parametrized determinant families.
//!
//! A configuration's determinant is multilinear in its lambda parameters
//! (each lambda enters one matrix entry affinely), so at a fixed frequency
//! the value set over the lambda box lies in the convex hull of the 2^m
//! corner values. Certification combines one stable member with a zero
//! exclusion sweep over `[0, omega_max]`: adaptive marching with a
//! Lipschitz bound on the corner determinants, falsification probes where
//! the hull approaches the origin, and an explicit resolution floor below
//! which the verdict degrades to inconclusive rather than claiming
//! stability the sweep cannot support.

use std::time::Instant;

use num_bigint::BigUint;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::kharitonov::VertexId;
use crate::poly::{Hurwitz, PolyError, Polynomial, RouthFailure};
use crate::polymatrix::{IntervalPolynomialMatrix, MatrixError, PolynomialMatrix};
use crate::testing_sets::{
    collapse_patterns, expand_pattern, pattern_config_count, EdgeConfiguration, EntryState,
    EnumerationError, Method, PatternSkeleton, Position,
};

/// Hard cap on lambda arity for corner-hull evaluation (2^m corners).
pub const MAX_SWEEP_ARITY: usize = 20;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("lambda arity {arity} exceeds the 2^m corner budget (max {max}); use grid mode")]
    ArityOverflow { arity: usize, max: usize },
    #[error("lambda coordinate {index} = {value} outside [0, 1]")]
    LambdaOutOfBox { index: usize, value: f64 },
    #[error("lambda grid of {points} points exceeds the cap {cap}")]
    GridTooLarge { points: u128, cap: u128 },
    #[error("margin bracket invalid: verdict at eps_lo = {lo_verdict:?}, at eps_hi = {hi_verdict:?}")]
    BracketInvalid { lo_verdict: Verdict, hi_verdict: Verdict },
    #[error("cannot instantiate problem template: {0}")]
    Template(String),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
}

/// The uncertain family `M(s) = B(s)A(s) + D(s)C(s)`.
#[derive(Debug, Clone)]
pub struct Problem {
    pub a: PolynomialMatrix,
    pub c: PolynomialMatrix,
    pub b: IntervalPolynomialMatrix,
    pub d: IntervalPolynomialMatrix,
}

impl Problem {
    pub fn new(
        a: PolynomialMatrix,
        c: PolynomialMatrix,
        b: IntervalPolynomialMatrix,
        d: IntervalPolynomialMatrix,
    ) -> Result<Self, MatrixError> {
        let n = a.dim();
        for dim in [c.dim(), b.dim(), d.dim()] {
            if dim != n {
                return Err(MatrixError::DimensionMismatch { left: n, right: dim });
            }
        }
        Ok(Self { a, c, b, d })
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// Composed matrix at the interval centers.
    pub fn center_composed(&self) -> PolynomialMatrix {
        PolynomialMatrix::compose(&self.b.center(), &self.a, &self.d.center(), &self.c)
            .expect("dimensions checked at construction")
    }

    pub fn compose_member(
        &self,
        b: &PolynomialMatrix,
        d: &PolynomialMatrix,
    ) -> PolynomialMatrix {
        PolynomialMatrix::compose(b, &self.a, d, &self.c)
            .expect("dimensions checked at construction")
    }
}

/// Tolerances, budgets and reproducibility knobs, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EngineSettings {
    /// Relative Routh pivot tolerance.
    pub routh_tol: f64,
    /// Absolute hull-distance tolerance after scaling by the max corner
    /// magnitude at that frequency.
    pub hull_tol: f64,
    /// Frequency resolution floor, relative to omega_max.
    pub freq_floor: f64,
    /// Steps per lambda axis for the fallback grid check.
    pub grid_steps: usize,
    /// Deterministic subsampling cap on expanded configurations.
    pub max_configs: Option<u64>,
    pub seed: u64,
    pub jobs: usize,
    /// Collapse equal-valued vertex/edge choices during expansion.
    pub dedup_values: bool,
    /// Random vertex assignments per pattern in the degree precheck
    /// (on top of the four uniform ones).
    pub degree_vertex_samples: usize,
    /// Random full-box samples in the degree precheck.
    pub degree_box_samples: usize,
    /// Exhaustive vertex-combination budget for the oracle.
    pub oracle_vertex_budget: u64,
    /// Upper bound on hull evaluations per sweep before giving up.
    pub max_hull_evals: u64,
}

impl Default for EngineSettings {
    fn default() -> Self {
        Self {
            routh_tol: 1e-9,
            hull_tol: 1e-9,
            freq_floor: 1e-6,
            grid_steps: 10,
            max_configs: None,
            seed: 0,
            jobs: 1,
            dedup_values: true,
            degree_vertex_samples: 4,
            degree_box_samples: 32,
            oracle_vertex_budget: 100_000,
            max_hull_evals: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stable,
    Unstable,
    Inconclusive,
}

/// Concrete family member exhibiting instability.
#[derive(Debug, Clone, Serialize)]
pub struct Witness {
    pub lambda: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub routh_reason: Option<RouthFailure>,
    /// Determinant of the witness member, ascending coefficients.
    pub determinant: Polynomial,
}

/// Closest approach data when a sweep ends without a certificate.
#[derive(Debug, Clone, Serialize)]
pub struct NearMiss {
    pub omega: f64,
    pub lambda: Vec<f64>,
    pub abs_det: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub omega_max: f64,
    pub hull_evaluations: u64,
    /// Smallest scaled hull distance seen on certified intervals.
    pub min_certified_distance: f64,
    /// Frequency windows the sweep could not certify.
    pub unresolved: Vec<(f64, f64)>,
}

/// Outcome of one family check.
#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nearest: Option<NearMiss>,
    /// True when produced by the non-certifying grid fallback.
    pub grid_only: bool,
}

impl Certificate {
    fn unstable(witness: Witness) -> Self {
        Self { verdict: Verdict::Unstable, sweep: None, witness: Some(witness), nearest: None, grid_only: false }
    }
}

/// Convex hull of the corner values of `det M(j omega)` over the lambda box,
/// with the signed distance from the origin (positive = excluded).
#[derive(Debug, Clone)]
pub struct ValueSetHull {
    pub omega: f64,
    pub corners: Vec<Complex64>,
    pub hull: Vec<(f64, f64)>,
    pub distance: f64,
    pub scale: f64,
}

/// Monotone-chain convex hull, counter-clockwise, no duplicate endpoint.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn dist_point_segment(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    };
    let (cx, cy) = (a.0 + t * dx - p.0, a.1 + t * dy - p.1);
    (cx * cx + cy * cy).sqrt()
}

/// Signed distance from the origin to a convex polygon: positive outside,
/// negative penetration depth inside, zero on the boundary.
pub fn signed_origin_distance(hull: &[(f64, f64)]) -> f64 {
    let o = (0.0, 0.0);
    match hull.len() {
        0 => 0.0,
        1 => (hull[0].0 * hull[0].0 + hull[0].1 * hull[0].1).sqrt(),
        2 => dist_point_segment(o, hull[0], hull[1]),
        _ => {
            let mut inside = true;
            let mut min_edge = f64::INFINITY;
            for i in 0..hull.len() {
                let a = hull[i];
                let b = hull[(i + 1) % hull.len()];
                let cross = (b.0 - a.0) * (0.0 - a.1) - (b.1 - a.1) * (0.0 - a.0);
                if cross < 0.0 {
                    inside = false;
                }
                min_edge = min_edge.min(dist_point_segment(o, a, b));
            }
            if inside {
                -min_edge
            } else {
                min_edge
            }
        }
    }
}

/// One testing-set configuration together with the fixed matrices.
#[derive(Debug, Clone)]
pub struct ParamFamily<'p> {
    pub problem: &'p Problem,
    pub config: EdgeConfiguration,
}

impl<'p> ParamFamily<'p> {
    pub fn new(problem: &'p Problem, config: EdgeConfiguration) -> Self {
        Self { problem, config }
    }

    pub fn arity(&self) -> usize {
        self.config.arity()
    }

    /// Instantiate `(B, D)` at a lambda vector in `[0,1]^m`.
    pub fn instantiate(
        &self,
        lambda: &[f64],
    ) -> Result<(PolynomialMatrix, PolynomialMatrix), EngineError> {
        for (index, &v) in lambda.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(EngineError::LambdaOutOfBox { index, value: v });
            }
        }
        Ok(self.config.instantiate(lambda)?)
    }

    /// Composed matrix `B A + D C` at a lambda vector.
    pub fn composed(&self, lambda: &[f64]) -> Result<PolynomialMatrix, EngineError> {
        let (b, d) = self.instantiate(lambda)?;
        Ok(self.problem.compose_member(&b, &d))
    }

    fn corner_lambda(&self, mask: usize) -> Vec<f64> {
        (0..self.arity()).map(|e| ((mask >> e) & 1) as f64).collect()
    }

    /// Corner-hull of the determinant value set at a fixed frequency.
    pub fn value_set_hull(&self, omega: f64) -> Result<ValueSetHull, EngineError> {
        let m = self.arity();
        if m > MAX_SWEEP_ARITY {
            return Err(EngineError::ArityOverflow { arity: m, max: MAX_SWEEP_ARITY });
        }
        let composed: Vec<PolynomialMatrix> = (0..1_usize << m)
            .map(|mask| self.composed(&self.corner_lambda(mask)))
            .collect::<Result<_, _>>()?;
        Ok(hull_from_corners(&composed, omega))
    }
}

fn hull_from_corners(composed: &[PolynomialMatrix], omega: f64) -> ValueSetHull {
    let z = Complex64::new(0.0, omega);
    let corners: Vec<Complex64> = composed.iter().map(|m| m.eval(z).det()).collect();
    let pts: Vec<(f64, f64)> = corners.iter().map(|c| (c.re, c.im)).collect();
    let hull = convex_hull(&pts);
    let distance = signed_origin_distance(&hull);
    let scale = corners.iter().fold(1.0_f64, |m, c| m.max(c.norm()));
    ValueSetHull { omega, corners, hull, distance, scale }
}

/// Precomputed per-corner data for one configuration sweep.
struct SweepContext<'p> {
    family: &'p ParamFamily<'p>,
    composed: Vec<PolynomialMatrix>,
    dets: Vec<Polynomial>,
}

impl<'p> SweepContext<'p> {
    fn build(family: &'p ParamFamily<'p>) -> Result<Self, EngineError> {
        let m = family.arity();
        if m > MAX_SWEEP_ARITY {
            return Err(EngineError::ArityOverflow { arity: m, max: MAX_SWEEP_ARITY });
        }
        let composed: Vec<PolynomialMatrix> = (0..1_usize << m)
            .map(|mask| family.composed(&family.corner_lambda(mask)))
            .collect::<Result<_, _>>()?;
        let dets: Vec<Polynomial> =
            composed.iter().map(|c| c.determinant()).collect::<Result<_, _>>()?;
        Ok(Self { family, composed, dets })
    }

    fn hull(&self, omega: f64) -> ValueSetHull {
        hull_from_corners(&self.composed, omega)
    }

    /// Upper bound on `|d/domega det(j omega)|` over the lambda box for
    /// frequencies up to `omega` (coefficientwise, the interior coefficient
    /// vectors lie in the corner hull, so corner maxima bound them).
    fn lipschitz(&self, omega: f64) -> f64 {
        let mut worst = 0.0_f64;
        for det in &self.dets {
            let mut acc = 0.0;
            let mut pw = 1.0;
            for k in 1..=det.degree() {
                acc += k as f64 * det.coeff(k).abs() * pw;
                pw *= omega;
            }
            worst = worst.max(acc);
        }
        worst
    }

    fn det_at(&self, lambda: &[f64], z: Complex64) -> Complex64 {
        let m = self
            .family
            .composed(lambda)
            .expect("lambda stays in the box during descent");
        m.eval(z).det()
    }

    /// Cyclic coordinate descent on `|det(j omega)|^2`; exact per
    /// coordinate because the determinant is affine in each lambda.
    fn descend(&self, omega: f64, start: &[f64], passes: usize) -> (Vec<f64>, f64) {
        let z = Complex64::new(0.0, omega);
        let m = self.family.arity();
        let mut lambda = start.to_vec();
        let mut best = self.det_at(&lambda, z).norm();
        for _ in 0..passes {
            for e in 0..m {
                let mut lo = lambda.clone();
                lo[e] = 0.0;
                let mut hi = lambda.clone();
                hi[e] = 1.0;
                let v0 = self.det_at(&lo, z);
                let v1 = self.det_at(&hi, z);
                let beta = v1 - v0;
                let denom = beta.norm_sqr();
                let t = if denom == 0.0 {
                    lambda[e]
                } else {
                    (-(v0.conj() * beta).re / denom).clamp(0.0, 1.0)
                };
                lambda[e] = t;
            }
            best = self.det_at(&lambda, z).norm();
        }
        (lambda, best)
    }

    /// Try to extract a concrete unstable member near an at-risk window.
    fn falsify(
        &self,
        omega_lo: f64,
        omega_hi: f64,
        routh_tol: f64,
    ) -> Result<Option<Witness>, EngineError> {
        let m = self.family.arity();
        let center = vec![0.5; m];
        // locate the best (omega, lambda) by golden section over omega with
        // an exact coordinate descent inside
        let mut a = omega_lo.max(0.0);
        let mut b = omega_hi;
        let phi = 0.5 * (3.0 - 5.0_f64.sqrt());
        let probe = |w: f64| self.descend(w, &center, 3);
        let mut x1 = a + phi * (b - a);
        let mut x2 = b - phi * (b - a);
        let (mut l1, mut f1) = probe(x1);
        let (mut l2, mut f2) = probe(x2);
        for _ in 0..40 {
            if f1 <= f2 {
                b = x2;
                x2 = x1;
                l2 = l1.clone();
                f2 = f1;
                x1 = a + phi * (b - a);
                let r = probe(x1);
                l1 = r.0;
                f1 = r.1;
            } else {
                a = x1;
                x1 = x2;
                l1 = l2.clone();
                f1 = f2;
                x2 = b - phi * (b - a);
                let r = probe(x2);
                l2 = r.0;
                f2 = r.1;
            }
        }
        let (omega_best, lambda_best) = if f1 <= f2 { (x1, l1) } else { (x2, l2) };
        // candidate lambdas: the minimizer, its per-coordinate endpoint
        // walk, and the box center
        let mut candidates: Vec<Vec<f64>> = vec![lambda_best.clone(), center];
        for e in 0..m {
            for v in [0.0, 1.0] {
                let mut snapped = lambda_best.clone();
                snapped[e] = v;
                candidates.push(snapped);
            }
        }
        for lambda in candidates {
            let det = self.family.composed(&lambda)?.determinant()?;
            let verdict = match det.is_hurwitz(routh_tol) {
                Ok(v) => v,
                Err(_) => Hurwitz::NotStable(RouthFailure::ZeroLeading),
            };
            if let Hurwitz::NotStable(reason) = verdict {
                return Ok(Some(Witness {
                    lambda,
                    omega: Some(omega_best),
                    routh_reason: Some(reason),
                    determinant: det,
                }));
            }
        }
        Ok(None)
    }
}

/// Zero-exclusion certification of one configuration: one stable member
/// plus origin exclusion from the corner hull over the whole sweep.
pub fn zero_exclusion_sweep(
    family: &ParamFamily<'_>,
    settings: &EngineSettings,
) -> Result<Certificate, EngineError> {
    let m = family.arity();
    let ctx = SweepContext::build(family)?;

    // (a) one member stable at the box center
    let center = vec![0.5; m];
    let center_det = ctx.family.composed(&center)?.determinant()?;
    match center_det.is_hurwitz(settings.routh_tol) {
        Err(_) => {
            return Ok(Certificate::unstable(Witness {
                lambda: center,
                omega: None,
                routh_reason: None,
                determinant: center_det,
            }))
        }
        Ok(Hurwitz::NotStable(reason)) => {
            return Ok(Certificate::unstable(Witness {
                lambda: center,
                omega: None,
                routh_reason: Some(reason),
                determinant: center_det,
            }))
        }
        Ok(Hurwitz::Stable) => {}
    }

    // corner members must be stable and share the center's degree
    let degree = center_det.degree();
    for (mask, det) in ctx.dets.iter().enumerate() {
        let lambda = family.corner_lambda(mask);
        match det.is_hurwitz(settings.routh_tol) {
            Err(_) => {
                return Ok(Certificate::unstable(Witness {
                    lambda,
                    omega: None,
                    routh_reason: None,
                    determinant: det.clone(),
                }))
            }
            Ok(Hurwitz::NotStable(reason)) => {
                return Ok(Certificate::unstable(Witness {
                    lambda,
                    omega: None,
                    routh_reason: Some(reason),
                    determinant: det.clone(),
                }))
            }
            Ok(Hurwitz::Stable) => {}
        }
        if det.degree() != degree {
            return Ok(Certificate {
                verdict: Verdict::Inconclusive,
                sweep: None,
                witness: None,
                nearest: Some(NearMiss { omega: 0.0, lambda, abs_det: det.leading().abs() }),
                grid_only: false,
            });
        }
    }

    if m == 0 {
        return Ok(Certificate {
            verdict: Verdict::Stable,
            sweep: Some(SweepSummary {
                omega_max: 0.0,
                hull_evaluations: 0,
                min_certified_distance: f64::INFINITY,
                unresolved: Vec::new(),
            }),
            witness: None,
            nearest: None,
            grid_only: false,
        });
    }

    // Interior coefficient vectors lie in the hull of the corner vectors,
    // so a shared Cauchy-style bound covers every member's roots.
    let lead_min = ctx.dets.iter().fold(f64::INFINITY, |acc, d| acc.min(d.leading().abs()));
    let mut num_max = 0.0_f64;
    for det in &ctx.dets {
        for k in 0..degree {
            num_max = num_max.max(det.coeff(k).abs());
        }
    }
    let omega_max = 1.0 + num_max / lead_min;

    let floor = settings.freq_floor * omega_max.max(1.0);
    let mut omega = 0.0_f64;
    let mut evals: u64 = 0;
    let mut min_certified = f64::INFINITY;
    let mut unresolved: Vec<(f64, f64)> = Vec::new();
    let mut nearest: Option<NearMiss> = None;

    while omega <= omega_max {
        if evals >= settings.max_hull_evals {
            unresolved.push((omega, omega_max));
            break;
        }
        let hull = ctx.hull(omega);
        evals += 1;
        let margin = hull.distance - settings.hull_tol * hull.scale;
        if margin > 0.0 {
            // certified exclusion over [omega, omega + h]
            let mut h = margin / ctx.lipschitz(omega_max.min(omega + margin)).max(1e-300);
            h = h.min(0.25 * omega_max + floor);
            while h > floor && ctx.lipschitz(omega + h) * h > margin {
                h *= 0.5;
            }
            if h >= floor {
                min_certified = min_certified.min(hull.distance / hull.scale);
                omega += h;
                continue;
            }
        }
        // at-risk window: try to extract a concrete unstable member
        let width = floor.max(1e-12 * omega_max);
        if let Some(witness) = ctx.falsify(omega - width, omega + 2.0 * width, settings.routh_tol)? {
            return Ok(Certificate {
                verdict: Verdict::Unstable,
                sweep: Some(SweepSummary {
                    omega_max,
                    hull_evaluations: evals,
                    min_certified_distance: min_certified,
                    unresolved,
                }),
                witness: Some(witness),
                nearest: None,
                grid_only: false,
            });
        }
        let (lam, best) = ctx.descend(omega, &vec![0.5; m], 3);
        if nearest.as_ref().is_none_or(|n| best < n.abs_det) {
            nearest = Some(NearMiss { omega, lambda: lam, abs_det: best });
        }
        unresolved.push((omega, omega + width));
        omega += width;
    }

    let sweep = SweepSummary {
        omega_max,
        hull_evaluations: evals,
        min_certified_distance: min_certified,
        unresolved,
    };
    if sweep.unresolved.is_empty() {
        Ok(Certificate {
            verdict: Verdict::Stable,
            sweep: Some(sweep),
            witness: None,
            nearest: None,
            grid_only: false,
        })
    } else {
        Ok(Certificate {
            verdict: Verdict::Inconclusive,
            sweep: Some(sweep),
            witness: None,
            nearest,
            grid_only: false,
        })
    }
}

/// Non-certifying uniform grid fallback: instability found on the grid is
/// definite; survival is reported as inconclusive ("stable on grid").
pub fn grid_check(
    family: &ParamFamily<'_>,
    steps: usize,
    settings: &EngineSettings,
) -> Result<Certificate, EngineError> {
    const GRID_CAP: u128 = 2_000_000;
    let m = family.arity();
    let points = ((steps as u128) + 1).pow(m as u32);
    if points > GRID_CAP {
        return Err(EngineError::GridTooLarge { points, cap: GRID_CAP });
    }
    let mut idx = vec![0_usize; m];
    loop {
        let lambda: Vec<f64> =
            idx.iter().map(|&i| i as f64 / steps.max(1) as f64).collect();
        let det = family.composed(&lambda)?.determinant()?;
        let verdict = match det.is_hurwitz(settings.routh_tol) {
            Ok(v) => v,
            Err(_) => Hurwitz::NotStable(RouthFailure::ZeroLeading),
        };
        if let Hurwitz::NotStable(reason) = verdict {
            return Ok(Certificate::unstable(Witness {
                lambda,
                omega: None,
                routh_reason: Some(reason),
                determinant: det,
            }));
        }
        // odometer
        let mut carry = true;
        for slot in idx.iter_mut() {
            if !carry {
                break;
            }
            *slot += 1;
            if *slot > steps {
                *slot = 0;
            } else {
                carry = false;
            }
        }
        if carry || m == 0 {
            break;
        }
    }
    Ok(Certificate {
        verdict: Verdict::Inconclusive,
        sweep: None,
        witness: None,
        nearest: None,
        grid_only: true,
    })
}

/// Evidence for a determinant-degree drop somewhere in the family.
#[derive(Debug, Clone, Serialize)]
pub struct DegreeDropEvidence {
    pub description: String,
    pub expected: usize,
    pub got: usize,
    pub leading: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeCheck {
    pub ok: bool,
    pub degree: usize,
    pub samples: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<DegreeDropEvidence>,
}

fn det_degree_probe(
    det: &Polynomial,
    expected: usize,
    routh_tol: f64,
    description: &str,
    failures: &mut Vec<DegreeDropEvidence>,
) {
    let lead_ok = det.leading().abs() > routh_tol * det.max_abs_coeff();
    if det.degree() != expected || !lead_ok {
        if failures.len() < 8 {
            failures.push(DegreeDropEvidence {
                description: description.to_string(),
                expected,
                got: det.degree(),
                leading: det.leading(),
            });
        }
    }
}

/// Determinant-degree invariance precheck: the nominal center fixes the
/// reference degree; pattern-skeleton corners (uniform plus seeded random
/// vertex assignments — a documented subsample) and random box draws must
/// agree, with the leading coefficient bounded away from zero.
pub fn degree_invariance_check(
    problem: &Problem,
    patterns: &[PatternSkeleton],
    settings: &EngineSettings,
) -> Result<DegreeCheck, EngineError> {
    let center_det = problem.center_composed().determinant()?;
    let expected = center_det.degree();
    let mut failures = Vec::new();
    let mut samples: u64 = 1;
    det_degree_probe(&center_det, expected, settings.routh_tol, "center", &mut failures);
    if center_det.leading() == 0.0 && center_det.is_zero() {
        // identically zero determinant is a degenerate problem
        return Ok(DegreeCheck { ok: false, degree: 0, samples, failures });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed ^ 0xde9);
    for (pi, pat) in patterns.iter().enumerate() {
        let m = pat.edges.len().min(12);
        let mut assignments: Vec<Vec<VertexId>> = VertexId::ALL
            .iter()
            .map(|&id| vec![id; 2 * pat.n * pat.n])
            .collect();
        for _ in 0..settings.degree_vertex_samples {
            assignments.push(
                (0..2 * pat.n * pat.n)
                    .map(|_| VertexId::ALL[rng.random_range(0..4)])
                    .collect(),
            );
        }
        for assignment in assignments {
            let config = assign_pattern(pat, problem, &assignment);
            let family = ParamFamily::new(problem, config);
            for mask in 0..(1_usize << m) {
                let lambda = family.corner_lambda(mask);
                let det = family.composed(&lambda)?.determinant()?;
                samples += 1;
                det_degree_probe(
                    &det,
                    expected,
                    settings.routh_tol,
                    &format!("pattern {pi} corner {mask:b}"),
                    &mut failures,
                );
            }
        }
    }
    for k in 0..settings.degree_box_samples {
        let b = problem.b.sample(&mut rng);
        let d = problem.d.sample(&mut rng);
        let det = problem.compose_member(&b, &d).determinant()?;
        samples += 1;
        det_degree_probe(&det, expected, settings.routh_tol, &format!("box sample {k}"), &mut failures);
    }
    Ok(DegreeCheck { ok: failures.is_empty(), degree: expected, samples, failures })
}

/// Turn a skeleton into a configuration with a fixed vertex assignment.
fn assign_pattern(
    pat: &PatternSkeleton,
    problem: &Problem,
    vertex_ids: &[VertexId],
) -> EdgeConfiguration {
    use crate::testing_sets::Side;
    let n = pat.n;
    let edge_set = pat.edge_set();
    let mut states = Vec::with_capacity(2 * n * n);
    for side in [Side::B, Side::D] {
        for row in 0..n {
            for col in 0..n {
                let pos = Position::new(side, row, col);
                let ip = match side {
                    Side::B => problem.b.entry(row, col),
                    Side::D => problem.d.entry(row, col),
                };
                let state = if edge_set.contains(&pos) {
                    let seg = ip.distinct_edges().into_iter().next();
                    match seg {
                        Some((id, segment)) => EntryState::Edge { id, segment },
                        None => EntryState::Vertex {
                            id: VertexId::K1,
                            value: ip.vertex(VertexId::K1),
                        },
                    }
                } else {
                    let id = vertex_ids[pos.flat_index(n)];
                    EntryState::Vertex { id, value: ip.vertex(id) }
                };
                states.push(state);
            }
        }
    }
    let edges: Vec<Position> = pat
        .edges
        .iter()
        .copied()
        .filter(|&pos| matches!(states[pos.flat_index(n)], EntryState::Edge { .. }))
        .collect();
    EdgeConfiguration { n, pattern_index: 0, states, edges }
}

/// Witness enriched with the instantiated matrices for replay.
#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub configuration: u64,
    pub pattern: usize,
    pub pattern_label: String,
    pub lambda: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub routh_reason: Option<RouthFailure>,
    pub determinant: Polynomial,
    pub b_entries: Vec<Vec<Polynomial>>,
    pub d_entries: Vec<Vec<Polynomial>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictCounts {
    pub checked: u64,
    pub stable: u64,
    pub unstable: u64,
    pub inconclusive: u64,
}

/// Aggregated outcome over a whole testing set.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub method: Method,
    pub verdict: Verdict,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree_drop: Option<Vec<DegreeDropEvidence>>,
    pub patterns_raw: u64,
    pub patterns: u64,
    /// Expanded configurations in this run (value-deduplicated by default).
    pub configurations: u64,
    pub subsampled: bool,
    pub counts: VerdictCounts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessReport>,
    pub min_certified_distance: Option<f64>,
    pub hull_evaluations: u64,
    pub settings: EngineSettings,
    pub timing: Timing,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub wall_ms: u128,
}

impl AnalysisReport {
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Verdict::Stable => 0,
            Verdict::Unstable => 1,
            Verdict::Inconclusive => 2,
        }
    }
}

fn biguint_to_u64_saturating(v: &BigUint) -> u64 {
    u64::try_from(v).unwrap_or(u64::MAX)
}

/// Decide robust stability over the testing set selected by `method`.
///
/// Patterns are collapsed for degeneracy, every per-pattern vertex/edge
/// expansion is swept, and the first unstable configuration (in
/// deterministic enumeration order) aborts the run with its witness.
pub fn analyze(
    problem: &Problem,
    method: Method,
    settings: &EngineSettings,
) -> Result<AnalysisReport, EngineError> {
    let started = Instant::now();
    let n = problem.dim();
    let raw = method.patterns(n);
    let collapsed = collapse_patterns(&raw, &problem.b, &problem.d);

    let degree_check = degree_invariance_check(problem, &collapsed, settings)?;
    if !degree_check.ok {
        return Ok(AnalysisReport {
            method,
            verdict: Verdict::Inconclusive,
            n,
            degree: None,
            degree_drop: Some(degree_check.failures),
            patterns_raw: raw.len() as u64,
            patterns: collapsed.len() as u64,
            configurations: 0,
            subsampled: false,
            counts: VerdictCounts { checked: 0, stable: 0, unstable: 0, inconclusive: 0 },
            witness: None,
            min_certified_distance: None,
            hull_evaluations: 0,
            settings: settings.clone(),
            timing: Timing { wall_ms: started.elapsed().as_millis() },
        });
    }

    let per_pattern: Vec<BigUint> = collapsed
        .iter()
        .map(|p| pattern_config_count(p, &problem.b, &problem.d, settings.dedup_values))
        .collect();
    let total: BigUint = per_pattern.iter().sum();
    let total_u64 = biguint_to_u64_saturating(&total);

    // deterministic pseudo-random subsample of configuration indices
    let sample_indices: Option<Vec<u64>> = match settings.max_configs {
        Some(cap) if BigUint::from(cap) < total => {
            let mut rng = ChaCha8Rng::seed_from_u64(settings.seed ^ 0x5eed);
            let mut chosen = std::collections::BTreeSet::new();
            while (chosen.len() as u64) < cap {
                chosen.insert(rng.random_range(0..total_u64));
            }
            Some(chosen.into_iter().collect())
        }
        _ => None,
    };
    let subsampled = sample_indices.is_some();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.jobs.max(1))
        .build()
        .expect("thread pool");

    let mut counts = VerdictCounts { checked: 0, stable: 0, unstable: 0, inconclusive: 0 };
    let mut witness_report: Option<WitnessReport> = None;
    let mut min_dist = f64::INFINITY;
    let mut hull_evals: u64 = 0;

    let chunk_size = (settings.jobs.max(1) * 8).max(16);
    let mut buffer: Vec<(u64, usize, EdgeConfiguration)> = Vec::with_capacity(chunk_size);
    let mut flat_index: u64 = 0;
    let mut sample_cursor = 0_usize;

    'outer: for (pi, pat) in collapsed.iter().enumerate() {
        for config in expand_pattern(pat, pi, &problem.b, &problem.d, settings.dedup_values) {
            let keep = match &sample_indices {
                None => true,
                Some(idx) => {
                    while sample_cursor < idx.len() && idx[sample_cursor] < flat_index {
                        sample_cursor += 1;
                    }
                    sample_cursor < idx.len() && idx[sample_cursor] == flat_index
                }
            };
            if keep {
                buffer.push((flat_index, pi, config));
            }
            flat_index += 1;
            if buffer.len() >= chunk_size {
                if process_chunk(
                    problem,
                    &collapsed,
                    settings,
                    &pool,
                    &mut buffer,
                    &mut counts,
                    &mut witness_report,
                    &mut min_dist,
                    &mut hull_evals,
                )? {
                    break 'outer;
                }
            }
        }
    }
    if witness_report.is_none() && !buffer.is_empty() {
        process_chunk(
            problem,
            &collapsed,
            settings,
            &pool,
            &mut buffer,
            &mut counts,
            &mut witness_report,
            &mut min_dist,
            &mut hull_evals,
        )?;
    }

    let verdict = if witness_report.is_some() {
        Verdict::Unstable
    } else if subsampled || counts.inconclusive > 0 {
        Verdict::Inconclusive
    } else {
        Verdict::Stable
    };
    Ok(AnalysisReport {
        method,
        verdict,
        n,
        degree: Some(degree_check.degree),
        degree_drop: None,
        patterns_raw: raw.len() as u64,
        patterns: collapsed.len() as u64,
        configurations: total_u64,
        subsampled,
        counts,
        witness: witness_report,
        min_certified_distance: if min_dist.is_finite() { Some(min_dist) } else { None },
        hull_evaluations: hull_evals,
        settings: settings.clone(),
        timing: Timing { wall_ms: started.elapsed().as_millis() },
    })
}

#[allow(clippy::too_many_arguments)]
fn process_chunk(
    problem: &Problem,
    patterns: &[PatternSkeleton],
    settings: &EngineSettings,
    pool: &rayon::ThreadPool,
    buffer: &mut Vec<(u64, usize, EdgeConfiguration)>,
    counts: &mut VerdictCounts,
    witness_report: &mut Option<WitnessReport>,
    min_dist: &mut f64,
    hull_evals: &mut u64,
) -> Result<bool, EngineError> {
    let chunk = std::mem::take(buffer);
    let results: Vec<(u64, usize, EdgeConfiguration, Certificate)> = pool.install(|| {
        chunk
            .into_par_iter()
            .map(|(idx, pi, config)| {
                let family = ParamFamily::new(problem, config.clone());
                let cert = zero_exclusion_sweep(&family, settings)?;
                Ok((idx, pi, config, cert))
            })
            .collect::<Result<_, EngineError>>()
    })?;
    for (idx, pi, config, cert) in results {
        counts.checked += 1;
        if let Some(s) = &cert.sweep {
            *hull_evals += s.hull_evaluations;
            if s.min_certified_distance.is_finite() {
                *min_dist = min_dist.min(s.min_certified_distance);
            }
        }
        match cert.verdict {
            Verdict::Stable => counts.stable += 1,
            Verdict::Inconclusive => counts.inconclusive += 1,
            Verdict::Unstable => {
                counts.unstable += 1;
                let w = cert.witness.expect("unstable certificates carry a witness");
                let (b, d) = config.instantiate(&w.lambda)?;
                *witness_report = Some(WitnessReport {
                    configuration: idx,
                    pattern: pi,
                    pattern_label: patterns[pi].label.clone(),
                    lambda: w.lambda,
                    omega: w.omega,
                    routh_reason: w.routh_reason,
                    determinant: w.determinant,
                    b_entries: b.rows(),
                    d_entries: d.rows(),
                });
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// Bisection result for the scalar uncertainty-scale margin.
#[derive(Debug, Clone, Serialize)]
pub struct MarginResult {
    pub stable_eps: f64,
    pub unstable_eps: f64,
    pub steps: Vec<MarginStep>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MarginStep {
    pub eps: f64,
    pub verdict: Verdict,
}

/// Bisect the largest uncertainty scale with a stable verdict. Inconclusive
/// verdicts are treated as not stable, so the returned `stable_eps` is a
/// certified lower bound.
pub fn robust_margin(
    template: &dyn Fn(f64) -> Result<Problem, EngineError>,
    eps_lo: f64,
    eps_hi: f64,
    tol: f64,
    method: Method,
    settings: &EngineSettings,
) -> Result<MarginResult, EngineError> {
    let run = |eps: f64| -> Result<Verdict, EngineError> {
        Ok(analyze(&template(eps)?, method, settings)?.verdict)
    };
    let lo_verdict = run(eps_lo)?;
    let hi_verdict = run(eps_hi)?;
    if lo_verdict != Verdict::Stable || hi_verdict == Verdict::Stable {
        return Err(EngineError::BracketInvalid { lo_verdict, hi_verdict });
    }
    let mut steps = vec![
        MarginStep { eps: eps_lo, verdict: lo_verdict },
        MarginStep { eps: eps_hi, verdict: hi_verdict },
    ];
    let (mut lo, mut hi) = (eps_lo, eps_hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let verdict = run(mid)?;
        steps.push(MarginStep { eps: mid, verdict });
        if verdict == Verdict::Stable {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(MarginResult { stable_eps: lo, unstable_eps: hi, steps })
}

/// A falsification witness from the sampling oracle.
#[derive(Debug, Clone, Serialize)]
pub struct OracleWitness {
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub routh_reason: Option<RouthFailure>,
    pub determinant: Polynomial,
    pub b_entries: Vec<Vec<Polynomial>>,
    pub d_entries: Vec<Vec<Polynomial>>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum OracleOutcome {
    Witness(OracleWitness),
    NoneFound { samples: u64, vertex_combos: u64 },
}

impl OracleOutcome {
    pub fn witness(&self) -> Option<&OracleWitness> {
        match self {
            OracleOutcome::Witness(w) => Some(w),
            OracleOutcome::NoneFound { .. } => None,
        }
    }
}

/// Monte Carlo falsification: exhaustive distinct-vertex combinations when
/// they fit the budget, then seeded uniform box samples.
pub fn oracle_falsify(
    problem: &Problem,
    samples: u64,
    seed: u64,
    settings: &EngineSettings,
) -> Result<OracleOutcome, EngineError> {
    let n = problem.dim();
    let check = |b: &PolynomialMatrix,
                 d: &PolynomialMatrix,
                 source: String|
     -> Result<Option<OracleWitness>, EngineError> {
        let det = problem.compose_member(b, d).determinant()?;
        let verdict = match det.is_hurwitz(settings.routh_tol) {
            Ok(v) => v,
            Err(_) => Hurwitz::NotStable(RouthFailure::ZeroLeading),
        };
        Ok(match verdict {
            Hurwitz::Stable => None,
            Hurwitz::NotStable(reason) => Some(OracleWitness {
                source,
                routh_reason: Some(reason),
                determinant: det,
                b_entries: b.rows(),
                d_entries: d.rows(),
            }),
        })
    };

    // distinct-vertex exhaustion
    let mut vertex_lists: Vec<Vec<Polynomial>> = Vec::with_capacity(2 * n * n);
    for m in [&problem.b, &problem.d] {
        for i in 0..n {
            for j in 0..n {
                vertex_lists
                    .push(m.entry(i, j).distinct_vertices().into_iter().map(|(_, v)| v).collect());
            }
        }
    }
    let combos: BigUint =
        vertex_lists.iter().fold(BigUint::from(1_u32), |acc, l| acc * BigUint::from(l.len()));
    let mut vertex_combos = 0_u64;
    if combos <= BigUint::from(settings.oracle_vertex_budget) {
        use itertools::Itertools;
        for pick in vertex_lists.iter().map(|l| l.iter()).multi_cartesian_product() {
            vertex_combos += 1;
            let b = PolynomialMatrix::from_fn(n, |i, j| pick[i * n + j].clone());
            let d = PolynomialMatrix::from_fn(n, |i, j| pick[n * n + i * n + j].clone());
            if let Some(w) = check(&b, &d, format!("vertex_exhaustion[{}]", vertex_combos - 1))? {
                return Ok(OracleOutcome::Witness(w));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..samples {
        let b = problem.b.sample(&mut rng);
        let d = problem.d.sample(&mut rng);
        if let Some(w) = check(&b, &d, format!("sample[{k}]"))? {
            return Ok(OracleOutcome::Witness(w));
        }
    }
    Ok(OracleOutcome::NoneFound { samples, vertex_combos })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kharitonov::{EdgeId, IntervalPolynomial};
    use crate::testing_sets::Side;

    fn p(coeffs: &[f64]) -> Polynomial {
        Polynomial::new(coeffs.to_vec()).unwrap()
    }

    fn ip(bounds: &[(f64, f64)]) -> IntervalPolynomial {
        IntervalPolynomial::new(bounds.to_vec()).unwrap()
    }

    fn scalar_problem(b: IntervalPolynomial, d: IntervalPolynomial) -> Problem {
        Problem::new(
            PolynomialMatrix::identity(1),
            PolynomialMatrix::identity(1),
            IntervalPolynomialMatrix::new(vec![vec![b]]).unwrap(),
            IntervalPolynomialMatrix::new(vec![vec![d]]).unwrap(),
        )
        .unwrap()
    }

    /// Single-edge configuration at B(1,1) for a scalar problem.
    fn single_edge_config(problem: &Problem, edge: EdgeId) -> EdgeConfiguration {
        let bip = problem.b.entry(0, 0);
        let dip = problem.d.entry(0, 0);
        EdgeConfiguration {
            n: 1,
            pattern_index: 0,
            states: vec![
                EntryState::Edge { id: edge, segment: bip.edge(edge) },
                EntryState::Vertex { id: VertexId::K1, value: dip.vertex(VertexId::K1) },
            ],
            edges: vec![Position::new(Side::B, 0, 0)],
        }
    }

    #[test]
    fn instantiate_endpoints_and_midpoint() {
        let problem = scalar_problem(
            ip(&[(1.0, 2.0), (3.0, 4.0), (5.0, 6.0)]),
            IntervalPolynomial::from_point(&p(&[1.0])),
        );
        let config = single_edge_config(&problem, EdgeId::E12);
        let family = ParamFamily::new(&problem, config);
        let (b0, _) = family.instantiate(&[0.0]).unwrap();
        let (b1, _) = family.instantiate(&[1.0]).unwrap();
        let (bm, _) = family.instantiate(&[0.5]).unwrap();
        // lambda = 0 sits at the 'to' endpoint (K2), lambda = 1 at 'from' (K1)
        assert_eq!(b0.entry(0, 0), &p(&[1.0, 4.0, 6.0]));
        assert_eq!(b1.entry(0, 0), &p(&[1.0, 3.0, 6.0]));
        assert_eq!(bm.entry(0, 0), &p(&[1.0, 3.5, 6.0]));
        assert!(family.instantiate(&[1.5]).is_err());
    }

    #[test]
    fn hull_of_zero_arity_family_is_a_point() {
        let problem = scalar_problem(
            IntervalPolynomial::from_point(&p(&[1.0, 1.0])),
            IntervalPolynomial::from_point(&p(&[1.0])),
        );
        let config = EdgeConfiguration {
            n: 1,
            pattern_index: 0,
            states: vec![
                EntryState::Vertex { id: VertexId::K1, value: p(&[1.0, 1.0]) },
                EntryState::Vertex { id: VertexId::K1, value: p(&[1.0]) },
            ],
            edges: vec![],
        };
        let family = ParamFamily::new(&problem, config);
        let hull = family.value_set_hull(1.0).unwrap();
        assert_eq!(hull.corners.len(), 1);
        // det = (1 + j) + 1 = 2 + j
        assert!((hull.corners[0] - Complex64::new(2.0, 1.0)).norm() < 1e-12);
        assert!((hull.distance - 5.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn hull_of_one_edge_at_omega_zero_is_the_constant_segment() {
        let problem = scalar_problem(
            ip(&[(1.0, 2.0), (1.0, 1.0)]),
            IntervalPolynomial::from_point(&Polynomial::zero()),
        );
        // edge (3,1) varies the constant coefficient between 1 and 2
        let config = single_edge_config(&problem, EdgeId::E31);
        let family = ParamFamily::new(&problem, config);
        let hull = family.value_set_hull(0.0).unwrap();
        assert_eq!(hull.corners.len(), 2);
        assert!((hull.distance - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interior_values_stay_inside_the_hull() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let problem = scalar_problem(
            ip(&[(1.0, 2.0), (3.0, 4.0), (5.0, 6.0)]),
            IntervalPolynomial::from_point(&p(&[1.0])),
        );
        let config = single_edge_config(&problem, EdgeId::E12);
        let family = ParamFamily::new(&problem, config);
        for _ in 0..200 {
            let omega = rng.random_range(0.0..3.0);
            let lambda = vec![rng.random_range(0.0..1.0)];
            let hull = family.value_set_hull(omega).unwrap();
            let v = family.composed(&lambda).unwrap().eval(Complex64::new(0.0, omega)).det();
            let d = signed_origin_distance(
                &convex_hull(&hull.corners.iter().map(|c| (c.re - v.re, c.im - v.im)).collect::<Vec<_>>()),
            );
            assert!(d <= 1e-9 * hull.scale, "value escaped hull by {d}");
        }
    }

    #[test]
    fn sweep_matches_brute_force_grid_on_scalar_edge() {
        // family: b(s) + 1 with b on the (1,2) edge of the quadratic box
        let problem = scalar_problem(
            ip(&[(1.0, 2.0), (3.0, 4.0), (5.0, 6.0)]),
            IntervalPolynomial::from_point(&p(&[1.0])),
        );
        let settings = EngineSettings::default();
        let config = single_edge_config(&problem, EdgeId::E12);
        let family = ParamFamily::new(&problem, config);
        let cert = zero_exclusion_sweep(&family, &settings).unwrap();
        // oracle: 1000-point lambda grid
        let mut all_stable = true;
        for i in 0..=1000 {
            let lambda = vec![i as f64 / 1000.0];
            let det = family.composed(&lambda).unwrap().determinant().unwrap();
            if !det.is_hurwitz(settings.routh_tol).unwrap().is_stable() {
                all_stable = false;
            }
        }
        assert!(all_stable);
        assert_eq!(cert.verdict, Verdict::Stable);
        assert!(cert.sweep.unwrap().unresolved.is_empty());
    }

    #[test]
    fn fixed_unstable_member_is_witnessed() {
        // point family at (s-1)(s+2)(s+3) = s^3 + 4s^2 + s - 6
        let bad = p(&[-6.0, 1.0, 4.0, 1.0]);
        let problem = scalar_problem(
            IntervalPolynomial::from_point(&bad),
            IntervalPolynomial::from_point(&Polynomial::zero()),
        );
        let config = EdgeConfiguration {
            n: 1,
            pattern_index: 0,
            states: vec![
                EntryState::Vertex { id: VertexId::K1, value: bad.clone() },
                EntryState::Vertex { id: VertexId::K1, value: Polynomial::zero() },
            ],
            edges: vec![],
        };
        let family = ParamFamily::new(&problem, config);
        let cert = zero_exclusion_sweep(&family, &EngineSettings::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::Unstable);
        let w = cert.witness.unwrap();
        assert_eq!(w.determinant, bad);
        assert!(!w.determinant.is_hurwitz(1e-9).unwrap().is_stable());
    }

    #[test]
    fn zero_arity_stable_family_passes_trivially() {
        let problem = scalar_problem(
            IntervalPolynomial::from_point(&p(&[1.0, 1.0])),
            IntervalPolynomial::from_point(&p(&[1.0])),
        );
        let config = EdgeConfiguration {
            n: 1,
            pattern_index: 0,
            states: vec![
                EntryState::Vertex { id: VertexId::K1, value: p(&[1.0, 1.0]) },
                EntryState::Vertex { id: VertexId::K1, value: p(&[1.0]) },
            ],
            edges: vec![],
        };
        let family = ParamFamily::new(&problem, config);
        let cert = zero_exclusion_sweep(&family, &EngineSettings::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::Stable);
    }

    /// The constructed pocket family: a(s)(b0 + lambda g)(s) + q(s) with
    /// a = s^2 + 0.556 s + 7.77 and q = 5.39 s + 3.31 is stable at all
    /// eleven grid points of steps=10 but unstable on a narrow interior
    /// pocket (roughly lambda in (0.010, 0.036)).
    fn pocket_problem() -> Problem {
        let a = PolynomialMatrix::new(vec![vec![p(&[7.77, 0.556, 1.0])]]).unwrap();
        let c = PolynomialMatrix::identity(1);
        // (1,2) edge: from = K1 = [0.58, 1.196, 1.38, 2.12], to = K2 = [0.58, 1.45, 1.38, 0.15]
        let b = IntervalPolynomialMatrix::new(vec![vec![ip(&[
            (0.58, 0.58),
            (1.196, 1.45),
            (1.38, 1.38),
            (0.15, 2.12),
        ])]])
        .unwrap();
        let d = IntervalPolynomialMatrix::new(vec![vec![IntervalPolynomial::from_point(&p(&[
            3.31, 5.39,
        ]))]])
        .unwrap();
        Problem::new(a, c, b, d).unwrap()
    }

    #[test]
    fn grid_misses_pocket_but_sweep_catches_it() {
        let problem = pocket_problem();
        let config = single_edge_config(&problem, EdgeId::E12);
        let family = ParamFamily::new(&problem, config);
        let settings = EngineSettings::default();
        // the 11-point grid sees only stable members
        let grid = grid_check(&family, 10, &settings).unwrap();
        assert_eq!(grid.verdict, Verdict::Inconclusive);
        assert!(grid.grid_only);
        assert!(grid.witness.is_none());
        // the sweep finds a concrete unstable member
        let cert = zero_exclusion_sweep(&family, &settings).unwrap();
        assert_eq!(cert.verdict, Verdict::Unstable);
        let w = cert.witness.unwrap();
        assert!(w.lambda[0] > 0.0 && w.lambda[0] < 0.1, "witness at {:?}", w.lambda);
        // replay the witness
        let det = family.composed(&w.lambda).unwrap().determinant().unwrap();
        assert!(!det.is_hurwitz(settings.routh_tol).unwrap().is_stable());
    }

    #[test]
    fn grid_check_finds_corner_instability() {
        let problem = scalar_problem(
            ip(&[(-6.0, 6.0), (1.0, 1.0), (4.0, 4.0), (1.0, 1.0)]),
            IntervalPolynomial::from_point(&Polynomial::zero()),
        );
        let config = single_edge_config(&problem, EdgeId::E31);
        let family = ParamFamily::new(&problem, config);
        let cert = grid_check(&family, 4, &EngineSettings::default()).unwrap();
        assert_eq!(cert.verdict, Verdict::Unstable);
        assert!(cert.witness.is_some());
    }

    #[test]
    fn degree_check_flags_constructed_drop() {
        // family 1 + b*s with b in [-1, 1]: degree drops at b = 0
        let problem = scalar_problem(
            ip(&[(1.0, 1.0), (-1.0, 1.0)]),
            IntervalPolynomial::from_point(&Polynomial::zero()),
        );
        let patterns = Method::Thm1Row.patterns(1);
        let collapsed = collapse_patterns(&patterns, &problem.b, &problem.d);
        let check =
            degree_invariance_check(&problem, &collapsed, &EngineSettings::default()).unwrap();
        assert!(!check.ok);
        assert!(!check.failures.is_empty());
    }

    #[test]
    fn degree_check_ok_scalar() {
        // n=1, b in [1,2] on s, D = 0: degree 1 everywhere
        let problem = scalar_problem(
            ip(&[(1.0, 1.0), (1.0, 2.0)]),
            IntervalPolynomial::from_point(&Polynomial::zero()),
        );
        let patterns = collapse_patterns(&Method::Prop1.patterns(1), &problem.b, &problem.d);
        let check =
            degree_invariance_check(&problem, &patterns, &EngineSettings::default()).unwrap();
        assert!(check.ok);
        assert_eq!(check.degree, 1);
    }

    #[test]
    fn analyze_scalar_kharitonov_box() {
        // stable box: tight intervals around (s+1)(s+2)(s+3) = s^3+6s^2+11s+6
        let problem = scalar_problem(
            ip(&[(5.8, 6.2), (10.8, 11.2), (5.8, 6.2), (1.0, 1.0)]),
            IntervalPolynomial::from_point(&Polynomial::zero()),
        );
        let settings = EngineSettings::default();
        for method in [Method::Prop1, Method::Thm1Row, Method::Thm1Column] {
            let report = analyze(&problem, method, &settings).unwrap();
            assert_eq!(report.verdict, Verdict::Stable, "{method:?}");
        }
        // matches the four-vertex Kharitonov check
        let all_vertices_stable = problem
            .b
            .entry(0, 0)
            .vertices()
            .iter()
            .all(|v| v.is_hurwitz(settings.routh_tol).unwrap().is_stable());
        assert!(all_vertices_stable);
        // oracle agrees
        let oracle = oracle_falsify(&problem, 2000, 1, &settings).unwrap();
        assert!(oracle.witness().is_none());
    }

    #[test]
    fn analyze_finds_unstable_box() {
        // wide box: constant coefficient interval reaches negative values
        let problem = scalar_problem(
            ip(&[(-1.0, 6.0), (10.8, 11.2), (5.8, 6.2), (1.0, 1.0)]),
            IntervalPolynomial::from_point(&Polynomial::zero()),
        );
        let settings = EngineSettings::default();
        let report = analyze(&problem, Method::Thm1Row, &settings).unwrap();
        assert_eq!(report.verdict, Verdict::Unstable);
        let w = report.witness.unwrap();
        assert!(!w.determinant.is_hurwitz(settings.routh_tol).unwrap().is_stable());
        // oracle also finds one
        let oracle = oracle_falsify(&problem, 5000, 2, &settings).unwrap();
        assert!(oracle.witness().is_some());
    }

    #[test]
    fn margin_of_constructed_crossing_is_half() {
        // M = s + (1 - 2 eps): stable iff eps < 0.5
        let template = |eps: f64| -> Result<Problem, EngineError> {
            Ok(scalar_problem(
                IntervalPolynomial::from_point(&Polynomial::zero()),
                IntervalPolynomial::from_point(&p(&[1.0 - 2.0 * eps, 1.0])),
            ))
        };
        let settings = EngineSettings::default();
        let result =
            robust_margin(&template, 0.0, 1.0, 1e-4, Method::Thm1Row, &settings).unwrap();
        assert!((result.stable_eps - 0.5).abs() < 1e-3, "got {}", result.stable_eps);
        assert!(result.unstable_eps >= 0.5 - 1e-9);
        // invalid bracket errors out with both verdicts
        let err = robust_margin(&template, 0.9, 1.0, 1e-3, Method::Thm1Row, &settings);
        assert!(matches!(err, Err(EngineError::BracketInvalid { .. })));
    }

    #[test]
    fn oracle_replays_analyze_witness() {
        let problem = scalar_problem(
            ip(&[(-1.0, 6.0), (10.8, 11.2), (5.8, 6.2), (1.0, 1.0)]),
            IntervalPolynomial::from_point(&Polynomial::zero()),
        );
        let settings = EngineSettings::default();
        let report = analyze(&problem, Method::Prop1, &settings).unwrap();
        let w = report.witness.unwrap();
        let b = PolynomialMatrix::new(w.b_entries.clone()).unwrap();
        let d = PolynomialMatrix::new(w.d_entries.clone()).unwrap();
        let det = problem.compose_member(&b, &d).determinant().unwrap();
        assert!(!det.is_hurwitz(settings.routh_tol).unwrap().is_stable());
    }

    #[test]
    fn point_boxes_oracle_trivially_clean() {
        let problem = scalar_problem(
            IntervalPolynomial::from_point(&p(&[2.0, 1.0])),
            IntervalPolynomial::from_point(&p(&[1.0])),
        );
        let out = oracle_falsify(&problem, 100, 3, &EngineSettings::default()).unwrap();
        match out {
            OracleOutcome::NoneFound { vertex_combos, .. } => assert_eq!(vertex_combos, 1),
            OracleOutcome::Witness(_) => panic!("stable point family"),
        }
    }
}
