//! Frequency-domain checks over the reduced testing sets: H-infinity norm
//! bound, strict positive realness, and sector positivity for transfer
//! families `G(s) = B(s) D(s)^-1`, plus closed-loop stability via the
//! composed characteristic matrix.
//!
//! Unlike the determinant sweep, sigma_max and positive-definiteness are
//! not multilinear in lambda, so the hull argument does not apply. These
//! checks evaluate all lambda-corners plus a uniform interior grid and an
//! adaptive frequency grid; results are certified at grid resolution, and
//! near-threshold margins degrade to inconclusive.

use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{analyze, AnalysisReport, EngineError, EngineSettings, Timing};
use crate::poly::Hurwitz;
use crate::polymatrix::{ComplexMatrix, PolynomialMatrix};
use crate::testing_sets::{collapse_patterns, expand_pattern, Method};

#[derive(Debug, Error)]
pub enum FreqError {
    #[error("sector gain matrix must be square, got row {row} of length {len} for n = {n}")]
    SectorNotSquare { row: usize, len: usize, n: usize },
    #[error("sector gain matrix is not symmetric at ({i},{j})")]
    SectorNotSymmetric { i: usize, j: usize },
    #[error("sector gain matrix is not positive definite (leading minor {k} = {value})")]
    SectorNotPositive { k: usize, value: f64 },
    #[error("sector multiplier eta must be nonnegative, got {eta}")]
    NegativeEta { eta: f64 },
    #[error("strict properness fails in column {col}: numerator degree {num} >= denominator column degree {den}")]
    NotStrictlyProper { col: usize, num: usize, den: usize },
    #[error("denominator column {col} is identically zero")]
    ZeroColumn { col: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// `G(j omega) = B(j omega) D(j omega)^-1` at one frequency.
#[derive(Debug, Clone)]
pub struct TransferEval {
    pub omega: f64,
    /// `None` when `D(j omega)` is singular within tolerance.
    pub g: Option<ComplexMatrix>,
}

impl TransferEval {
    pub fn singular(&self) -> bool {
        self.g.is_none()
    }
}

pub fn transfer_eval(
    b: &PolynomialMatrix,
    d: &PolynomialMatrix,
    omega: f64,
    tol: f64,
) -> TransferEval {
    let z = Complex64::new(0.0, omega);
    let g = d.eval(z).invert(tol).map(|dinv| b.eval(z).mul(&dinv));
    TransferEval { omega, g }
}

#[derive(Debug, Error)]
#[error("power iteration did not converge; best estimate {best}")]
pub struct SigmaMaxError {
    pub best: f64,
}

/// Largest singular value by power iteration on `M^H M` (relative
/// tolerance 1e-10, iteration cap carrying the best estimate on failure).
pub fn sigma_max(m: &ComplexMatrix) -> Result<f64, SigmaMaxError> {
    const RTOL: f64 = 1e-10;
    const CAP: usize = 5_000;
    let n = m.dim();
    let a = m.adjoint().mul(m);
    let scale = a.max_abs();
    if scale == 0.0 {
        return Ok(0.0);
    }
    // a start vector not orthogonal to the top eigenvector
    let mut starts: Vec<Vec<Complex64>> = vec![vec![Complex64::new(1.0, 0.0); n]];
    for k in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[k] = Complex64::new(1.0, 0.0);
        starts.push(e);
    }
    let apply = |x: &[Complex64]| -> Vec<Complex64> {
        (0..n).map(|i| (0..n).map(|j| a.entry(i, j) * x[j]).sum()).collect()
    };
    let norm = |x: &[Complex64]| x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    for start in starts {
        let mut x = start;
        let nx = norm(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        let y = apply(&x);
        if norm(&y) <= 1e-14 * scale {
            continue;
        }
        let mut prev = f64::INFINITY;
        for _ in 0..CAP {
            let y = apply(&x);
            let ny = norm(&y);
            if ny == 0.0 {
                return Ok(0.0);
            }
            // Rayleigh quotient of the normalized iterate
            let est = x
                .iter()
                .zip(&y)
                .map(|(xi, yi)| (xi.conj() * yi).re)
                .sum::<f64>();
            x = y.into_iter().map(|v| v / ny).collect();
            if (est - prev).abs() <= RTOL * est.abs().max(1e-300) {
                return Ok(est.max(0.0).sqrt());
            }
            prev = est;
        }
        return Err(SigmaMaxError { best: prev.max(0.0).sqrt() });
    }
    Ok(0.0)
}

/// Outcome of a column-reducedness test on `D(s)`.
#[derive(Debug, Clone, Serialize)]
pub struct ColumnReduced {
    pub yes: bool,
    /// Determinant of the highest-column-degree coefficient matrix.
    pub leading_det: f64,
    pub column_degrees: Vec<usize>,
}

/// `D` is column reduced iff its highest-column-degree coefficient matrix
/// is nonsingular.
pub fn column_reduced_check(d: &PolynomialMatrix, tol: f64) -> Result<ColumnReduced, FreqError> {
    let n = d.dim();
    let degs: Vec<usize> = d
        .column_degrees()
        .into_iter()
        .enumerate()
        .map(|(col, deg)| deg.ok_or(FreqError::ZeroColumn { col: col + 1 }))
        .collect::<Result<_, _>>()?;
    let hc = ComplexMatrix::from_fn(n, |i, j| Complex64::new(d.entry(i, j).coeff(degs[j]), 0.0));
    let scale = hc.max_abs().max(1.0);
    let det = hc.det().re;
    Ok(ColumnReduced {
        yes: det.abs() > tol * scale.powi(n as i32),
        leading_det: det,
        column_degrees: degs,
    })
}

/// Sector bound `K = K2 - K1` (symmetric positive definite) with the
/// frequency multiplier `eta >= 0`.
#[derive(Debug, Clone, Serialize)]
pub struct SectorSpec {
    k: Vec<Vec<f64>>,
    eta: f64,
}

impl SectorSpec {
    pub fn new(k: Vec<Vec<f64>>, eta: f64) -> Result<Self, FreqError> {
        let n = k.len();
        for (row, r) in k.iter().enumerate() {
            if r.len() != n {
                return Err(FreqError::SectorNotSquare { row, len: r.len(), n });
            }
        }
        for i in 0..n {
            for j in 0..i {
                if (k[i][j] - k[j][i]).abs() > 1e-12 * k[i][j].abs().max(k[j][i].abs()).max(1.0) {
                    return Err(FreqError::SectorNotSymmetric { i, j });
                }
            }
        }
        let km = ComplexMatrix::from_real(&k);
        for m in 1..=n {
            let minor = km.leading_minor(m).re;
            if minor <= 0.0 {
                return Err(FreqError::SectorNotPositive { k: m, value: minor });
            }
        }
        if eta < 0.0 {
            return Err(FreqError::NegativeEta { eta });
        }
        Ok(Self { k, eta })
    }

    pub fn gain(&self) -> ComplexMatrix {
        ComplexMatrix::from_real(&self.k)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }
}

/// Frequency-check tolerances and grid resolution, echoed into reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FreqSettings {
    /// Strictness tolerance on the decision quantity.
    pub tol: f64,
    /// Margins below `near_factor * tol` report inconclusive.
    pub near_factor: f64,
    /// Lambda grid points per edge parameter (endpoints included).
    pub lambda_grid: usize,
    /// Base frequency grid size.
    pub omega_points: usize,
    /// Local refinement rounds around the worst frequency.
    pub refine_rounds: usize,
    /// Sweep extends to this multiple of the pole radius bound.
    pub omega_margin: f64,
}

impl Default for FreqSettings {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            near_factor: 10.0,
            lambda_grid: 5,
            omega_points: 120,
            refine_rounds: 2,
            omega_margin: 4.0,
        }
    }
}

/// Worst evaluation point of a frequency check.
#[derive(Debug, Clone, Serialize)]
pub struct WorstPoint {
    pub configuration: u64,
    pub lambda: Vec<f64>,
    pub omega: f64,
    /// The check's decision value at the point (sigma for the norm check,
    /// scaled minimum principal minor for the definiteness checks).
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CheckOutcome {
    Holds { margin: f64 },
    Violated { at: WorstPoint },
    Inconclusive { reason: String },
}

impl CheckOutcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            CheckOutcome::Holds { .. } => 0,
            CheckOutcome::Violated { .. } => 1,
            CheckOutcome::Inconclusive { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FreqReport {
    pub check: &'static str,
    pub method: Method,
    pub outcome: CheckOutcome,
    pub configurations: u64,
    pub members_checked: u64,
    pub precondition_failures: u64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub precondition_notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst: Option<WorstPoint>,
    pub freq_settings: FreqSettings,
    pub settings: EngineSettings,
    pub timing: Timing,
}

/// One evaluated decision point: `value` is the reported quantity (sigma
/// for the norm check, the raw worst principal minor for the definiteness
/// checks); `margin` is the scale-free decision margin, violated at
/// `margin <= tol`.
#[derive(Debug, Clone, Copy)]
struct ScorePoint {
    value: f64,
    margin: f64,
}

/// What a specific check computes on one member `(B, D)`.
trait MemberCheck {
    fn score(&self, g: &ComplexMatrix, omega: f64) -> Option<ScorePoint>;
    /// Score for the `omega -> infinity` limit, with whether it
    /// participates in the violation decision strictly.
    fn limit_score(
        &self,
        b: &PolynomialMatrix,
        d: &PolynomialMatrix,
    ) -> Option<(ScorePoint, bool)>;
    /// Per-member precondition; `Err(note)` skips the member.
    fn precondition(&self, b: &PolynomialMatrix, d: &PolynomialMatrix) -> Result<(), String>;
    fn name(&self) -> &'static str;
}

/// Positive-definiteness score of a Hermitian matrix via leading principal
/// minors: the raw worst minor for reporting, the scaled worst for the
/// decision.
fn herm_pd_score(h: &ComplexMatrix) -> ScorePoint {
    let n = h.dim();
    let scale = h.max_abs().max(1.0);
    let mut worst_scaled = f64::INFINITY;
    let mut worst_raw = f64::INFINITY;
    for k in 1..=n {
        let minor = h.leading_minor(k).re;
        let scaled = minor / scale.powi(k as i32);
        if scaled < worst_scaled {
            worst_scaled = scaled;
            worst_raw = minor;
        }
    }
    ScorePoint { value: worst_raw, margin: worst_scaled }
}

/// Highest-column-degree coefficient matrices for the infinity limit
/// `G(inf) = B_hc * D_hc^-1` (shift = 1 computes `lim j omega G`).
fn limit_matrix(
    b: &PolynomialMatrix,
    d: &PolynomialMatrix,
    shift: usize,
    tol: f64,
) -> Option<ComplexMatrix> {
    let n = d.dim();
    let degs: Vec<usize> = d.column_degrees().into_iter().map(|o| o.unwrap_or(0)).collect();
    let d_hc = ComplexMatrix::from_fn(n, |i, j| Complex64::new(d.entry(i, j).coeff(degs[j]), 0.0));
    let b_hc = ComplexMatrix::from_fn(n, |i, j| {
        let want = degs[j].checked_sub(shift);
        Complex64::new(want.map_or(0.0, |k| b.entry(i, j).coeff(k)), 0.0)
    });
    d_hc.invert(tol).map(|inv| b_hc.mul(&inv))
}

struct HinfCheck {
    tol: f64,
}

impl MemberCheck for HinfCheck {
    fn score(&self, g: &ComplexMatrix, _omega: f64) -> Option<ScorePoint> {
        sigma_max(g).ok().map(|s| ScorePoint { value: s, margin: 1.0 - s })
    }

    fn limit_score(
        &self,
        b: &PolynomialMatrix,
        d: &PolynomialMatrix,
    ) -> Option<(ScorePoint, bool)> {
        let lim = limit_matrix(b, d, 0, self.tol)?;
        sigma_max(&lim).ok().map(|s| (ScorePoint { value: s, margin: 1.0 - s }, true))
    }

    fn precondition(&self, b: &PolynomialMatrix, d: &PolynomialMatrix) -> Result<(), String> {
        let cr = column_reduced_check(d, self.tol).map_err(|e| e.to_string())?;
        if !cr.yes {
            return Err(format!("D not column reduced (leading det {})", cr.leading_det));
        }
        // proper: numerator column degrees bounded by denominator's
        for (j, deg) in cr.column_degrees.iter().enumerate() {
            for i in 0..b.dim() {
                let e = b.entry(i, j);
                if !e.is_zero() && e.degree() > *deg {
                    return Err(format!(
                        "not proper: B({},{}) degree {} exceeds column degree {}",
                        i + 1,
                        j + 1,
                        e.degree(),
                        deg
                    ));
                }
            }
        }
        Ok(())
    }

    fn name(&self) -> &'static str {
        "hinf"
    }
}

struct SprCheck {
    tol: f64,
}

impl MemberCheck for SprCheck {
    fn score(&self, g: &ComplexMatrix, _omega: f64) -> Option<ScorePoint> {
        Some(herm_pd_score(&g.hermitian_part()))
    }

    fn limit_score(
        &self,
        b: &PolynomialMatrix,
        d: &PolynomialMatrix,
    ) -> Option<(ScorePoint, bool)> {
        // non-strict at the limit: a strictly proper SPR family has
        // Hermitian part tending to zero without violating strictness at
        // any finite frequency
        let lim = limit_matrix(b, d, 0, self.tol)?;
        Some((herm_pd_score(&lim.hermitian_part()), false))
    }

    fn precondition(&self, b: &PolynomialMatrix, d: &PolynomialMatrix) -> Result<(), String> {
        HinfCheck { tol: self.tol }.precondition(b, d)
    }

    fn name(&self) -> &'static str {
        "spr"
    }
}

struct SectorCheck {
    spec: SectorSpec,
    tol: f64,
}

impl SectorCheck {
    fn z_matrix(&self, g: &ComplexMatrix, omega: f64) -> ComplexMatrix {
        let factor = Complex64::new(1.0, omega * self.spec.eta());
        ComplexMatrix::identity(g.dim()).add(&self.spec.gain().mul(g).scale(factor))
    }
}

impl MemberCheck for SectorCheck {
    fn score(&self, g: &ComplexMatrix, omega: f64) -> Option<ScorePoint> {
        Some(herm_pd_score(&self.z_matrix(g, omega).hermitian_part()))
    }

    fn limit_score(
        &self,
        b: &PolynomialMatrix,
        d: &PolynomialMatrix,
    ) -> Option<(ScorePoint, bool)> {
        // Z(inf) = I + eta K lim(j omega G); equals I when eta = 0
        let z = if self.spec.eta() == 0.0 {
            ComplexMatrix::identity(d.dim())
        } else {
            let l = limit_matrix(b, d, 1, self.tol)?;
            ComplexMatrix::identity(d.dim())
                .add(&self.spec.gain().mul(&l).scale(Complex64::new(self.spec.eta(), 0.0)))
        };
        Some((herm_pd_score(&z.hermitian_part()), false))
    }

    fn precondition(&self, b: &PolynomialMatrix, d: &PolynomialMatrix) -> Result<(), String> {
        let cr = column_reduced_check(d, self.tol).map_err(|e| e.to_string())?;
        if !cr.yes {
            return Err(format!("D not column reduced (leading det {})", cr.leading_det));
        }
        // strict properness: every numerator column degree below the
        // denominator column degree, so G(inf) = 0
        for (j, deg) in cr.column_degrees.iter().enumerate() {
            for i in 0..b.dim() {
                let e = b.entry(i, j);
                if !e.is_zero() && e.degree() + 1 > *deg {
                    return Err(
                        FreqError::NotStrictlyProper { col: j + 1, num: e.degree(), den: *deg }
                            .to_string(),
                    );
                }
            }
        }
        Ok(())
    }

    fn name(&self) -> &'static str {
        "sector"
    }
}

/// Run one member's frequency sweep over `[0, omega_max]`; returns the
/// worst-margin point as (score, omega).
fn member_sweep(
    check: &dyn MemberCheck,
    b: &PolynomialMatrix,
    d: &PolynomialMatrix,
    fs: &FreqSettings,
    tol: f64,
) -> Option<(ScorePoint, f64)> {
    let det_d = d.determinant().ok()?;
    let pole_bound = det_d.cauchy_root_bound().unwrap_or(1.0);
    let omega_max = fs.omega_margin * (1.0 + pole_bound);
    let mut omegas: Vec<f64> = vec![0.0];
    let lo = (omega_max * 1e-4).max(1e-6);
    let count = fs.omega_points.max(8) - 1;
    for k in 0..count {
        let t = k as f64 / (count - 1) as f64;
        omegas.push(lo * (omega_max / lo).powf(t));
    }
    let singular =
        ScorePoint { value: f64::NEG_INFINITY, margin: f64::NEG_INFINITY };
    let eval = |omega: f64| -> Option<ScorePoint> {
        let te = transfer_eval(b, d, omega, tol);
        check.score(te.g.as_ref()?, omega)
    };
    let mut worst: Option<(ScorePoint, f64)> = None;
    let mut push = |s: Option<ScorePoint>, w: f64, worst: &mut Option<(ScorePoint, f64)>| -> bool {
        match s {
            Some(s) => {
                if worst.is_none() || s.margin < worst.unwrap().0.margin {
                    *worst = Some((s, w));
                }
                true
            }
            None => {
                // singular D(j omega): imaginary-axis pole
                *worst = Some((singular, w));
                false
            }
        }
    };
    for &w in &omegas {
        if !push(eval(w), w, &mut worst) {
            return worst;
        }
    }
    // refine around the worst base-grid frequency, staying inside the sweep
    let (_, w0) = worst?;
    let idx = omegas.iter().position(|&w| w == w0).expect("worst comes from the base grid");
    let mut left = if idx == 0 { 0.0 } else { omegas[idx - 1] };
    let mut right = if idx + 1 < omegas.len() { omegas[idx + 1] } else { w0 };
    for _ in 0..fs.refine_rounds {
        if right <= left {
            break;
        }
        let step = (right - left) / 11.0;
        let mut local_best = (f64::INFINITY, 0.5 * (left + right));
        for k in 1..=10 {
            let w = left + step * k as f64;
            match eval(w) {
                Some(s) => {
                    if s.margin < local_best.0 {
                        local_best = (s.margin, w);
                    }
                    push(Some(s), w, &mut worst);
                }
                None => {
                    push(None, w, &mut worst);
                    return worst;
                }
            }
        }
        left = (local_best.1 - step).max(left);
        right = (local_best.1 + step).min(right);
    }
    worst
}

fn run_check(
    problem: &crate::engine::Problem,
    method: Method,
    check: &dyn MemberCheck,
    settings: &EngineSettings,
    fs: &FreqSettings,
) -> FreqReport {
    let started = Instant::now();
    let raw = method.patterns(problem.dim());
    let collapsed = collapse_patterns(&raw, &problem.b, &problem.d);
    let grid = fs.lambda_grid.max(2);

    let mut configurations: u64 = 0;
    let mut members: u64 = 0;
    let mut pre_failures: u64 = 0;
    let mut pre_notes: Vec<String> = Vec::new();
    let mut worst: Option<WorstPoint> = None;
    let mut worst_margin: Option<f64> = None;
    let mut violated: Option<WorstPoint> = None;

    'outer: for (pi, pat) in collapsed.iter().enumerate() {
        for config in expand_pattern(pat, pi, &problem.b, &problem.d, settings.dedup_values) {
            let cfg_index = configurations;
            configurations += 1;
            let m = config.arity();
            let mut idx = vec![0_usize; m];
            loop {
                let lambda: Vec<f64> =
                    idx.iter().map(|&i| i as f64 / (grid - 1) as f64).collect();
                let (b, d) = config.instantiate(&lambda).expect("grid stays in the box");
                members += 1;
                let mut fail = |note: String| {
                    pre_failures += 1;
                    if pre_notes.len() < 8 {
                        pre_notes.push(format!("config {cfg_index} lambda {lambda:?}: {note}"));
                    }
                };
                if let Err(note) = check.precondition(&b, &d) {
                    fail(note);
                } else {
                    let det_d = d.determinant().ok();
                    let stable = det_d
                        .as_ref()
                        .and_then(|p| p.is_hurwitz(settings.routh_tol).ok())
                        .is_some_and(|h| matches!(h, Hurwitz::Stable));
                    if !stable {
                        fail("family member not stable (det D not Hurwitz)".to_string());
                    } else {
                        let mut points: Vec<(ScorePoint, f64)> = Vec::new();
                        if let Some(w) = member_sweep(check, &b, &d, fs, fs.tol) {
                            points.push(w);
                        }
                        if let Some((s, strict)) = check.limit_score(&b, &d) {
                            if strict || s.margin < -fs.near_factor * fs.tol {
                                points.push((s, f64::INFINITY));
                            }
                        }
                        for (score, omega) in points {
                            let record = WorstPoint {
                                configuration: cfg_index,
                                lambda: lambda.clone(),
                                omega,
                                value: score.value,
                            };
                            if worst_margin.is_none() || score.margin < worst_margin.unwrap() {
                                worst_margin = Some(score.margin);
                                worst = Some(record.clone());
                            }
                            if score.margin <= fs.tol && violated.is_none() {
                                violated = Some(record);
                            }
                        }
                        if violated.is_some() {
                            break 'outer;
                        }
                    }
                }
                // odometer over the lambda grid
                let mut carry = true;
                for slot in idx.iter_mut() {
                    if !carry {
                        break;
                    }
                    *slot += 1;
                    if *slot >= grid {
                        *slot = 0;
                    } else {
                        carry = false;
                    }
                }
                if carry || m == 0 {
                    break;
                }
            }
        }
    }

    let outcome = if let Some(at) = violated {
        CheckOutcome::Violated { at }
    } else if pre_failures > 0 {
        CheckOutcome::Inconclusive {
            reason: format!("{pre_failures} member(s) failed preconditions"),
        }
    } else {
        match worst_margin {
            Some(m) if m > fs.near_factor * fs.tol => CheckOutcome::Holds { margin: m },
            Some(m) => CheckOutcome::Inconclusive {
                reason: format!("margin {m} within {} of the threshold", fs.near_factor * fs.tol),
            },
            None => CheckOutcome::Inconclusive { reason: "no members evaluated".to_string() },
        }
    };
    FreqReport {
        check: check.name(),
        method,
        outcome,
        configurations,
        members_checked: members,
        precondition_failures: pre_failures,
        precondition_notes: pre_notes,
        worst,
        freq_settings: fs.clone(),
        settings: settings.clone(),
        timing: Timing { wall_ms: started.elapsed().as_millis() },
    }
}

/// `||G||_inf < 1` over the testing set selected by `method`.
pub fn hinf_lt_one(
    problem: &crate::engine::Problem,
    method: Method,
    settings: &EngineSettings,
    fs: &FreqSettings,
) -> FreqReport {
    run_check(problem, method, &HinfCheck { tol: fs.tol }, settings, fs)
}

/// Strict positive realness of `G` over the testing set.
pub fn spr_check(
    problem: &crate::engine::Problem,
    method: Method,
    settings: &EngineSettings,
    fs: &FreqSettings,
) -> FreqReport {
    run_check(problem, method, &SprCheck { tol: fs.tol }, settings, fs)
}

/// Positivity of `Z(j omega) = I + (1 + j omega eta) K G(j omega)`.
pub fn sector_positivity(
    problem: &crate::engine::Problem,
    sector: &SectorSpec,
    method: Method,
    settings: &EngineSettings,
    fs: &FreqSettings,
) -> FreqReport {
    run_check(problem, method, &SectorCheck { spec: sector.clone(), tol: fs.tol }, settings, fs)
}

/// Closed-loop robust stability with plant factors `(B, D)` interval and
/// controller factors `(A, C)` fixed: delegates to the determinant engine
/// on `M = B A + D C`.
pub fn closed_loop_stable(
    problem: &crate::engine::Problem,
    method: Method,
    settings: &EngineSettings,
) -> Result<AnalysisReport, EngineError> {
    analyze(problem, method, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Problem, Verdict};
    use crate::kharitonov::IntervalPolynomial;
    use crate::poly::Polynomial;
    use crate::polymatrix::IntervalPolynomialMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(coeffs: &[f64]) -> Polynomial {
        Polynomial::new(coeffs.to_vec()).unwrap()
    }

    fn scalar_fixed(bp: &[f64], dp: &[f64]) -> Problem {
        Problem::new(
            crate::polymatrix::PolynomialMatrix::identity(1),
            crate::polymatrix::PolynomialMatrix::identity(1),
            IntervalPolynomialMatrix::from_point(
                &crate::polymatrix::PolynomialMatrix::new(vec![vec![p(bp)]]).unwrap(),
            ),
            IntervalPolynomialMatrix::from_point(
                &crate::polymatrix::PolynomialMatrix::new(vec![vec![p(dp)]]).unwrap(),
            ),
        )
        .unwrap()
    }

    #[test]
    fn transfer_eval_scalar_cases() {
        let b = crate::polymatrix::PolynomialMatrix::new(vec![vec![p(&[1.0])]]).unwrap();
        let d = crate::polymatrix::PolynomialMatrix::new(vec![vec![p(&[1.0, 1.0])]]).unwrap();
        let at0 = transfer_eval(&b, &d, 0.0, 1e-12);
        assert!((at0.g.unwrap().entry(0, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let at1 = transfer_eval(&b, &d, 1.0, 1e-12);
        let g = at1.g.unwrap().entry(0, 0);
        assert!((g.norm() - 1.0 / 2.0_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn transfer_eval_diagonal_case() {
        let n = 3;
        let b = crate::polymatrix::PolynomialMatrix::identity(n);
        let d = crate::polymatrix::PolynomialMatrix::from_fn(n, |i, j| {
            if i == j {
                p(&[1.0, 1.0])
            } else {
                Polynomial::zero()
            }
        });
        for omega in [0.0, 0.7, 2.5] {
            let te = transfer_eval(&b, &d, omega, 1e-12);
            let g = te.g.unwrap();
            let expect = Complex64::new(1.0, 0.0) / Complex64::new(1.0, omega);
            for i in 0..n {
                assert!((g.entry(i, i) - expect).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn transfer_eval_consistency_g_times_d_is_b() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        for _ in 0..30 {
            let n = rng.random_range(1..=3);
            let rp = |rng: &mut ChaCha8Rng| {
                let c: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
                Polynomial::new(c).unwrap()
            };
            let b = crate::polymatrix::PolynomialMatrix::from_fn(n, |_, _| rp(&mut rng));
            let d = crate::polymatrix::PolynomialMatrix::from_fn(n, |i, j| {
                if i == j {
                    p(&[rng.random_range(0.5..2.0), rng.random_range(0.5..2.0), 1.0])
                } else {
                    rp(&mut rng)
                }
            });
            let omega = rng.random_range(0.0..3.0);
            let te = transfer_eval(&b, &d, omega, 1e-12);
            if let Some(g) = te.g {
                let z = Complex64::new(0.0, omega);
                let lhs = g.mul(&d.eval(z));
                let rhs = b.eval(z);
                let scale = rhs.max_abs().max(1.0);
                for i in 0..n {
                    for j in 0..n {
                        assert!((lhs.entry(i, j) - rhs.entry(i, j)).norm() <= 1e-8 * scale);
                    }
                }
            }
        }
    }

    #[test]
    fn sigma_max_known_values() {
        assert!((sigma_max(&ComplexMatrix::identity(2)).unwrap() - 1.0).abs() < 1e-10);
        let diag = ComplexMatrix::from_real(&[vec![2.0, 0.0], vec![0.0, 0.5]]);
        assert!((sigma_max(&diag).unwrap() - 2.0).abs() < 1e-10);
        // nilpotent Jordan block has singular values {1, 0}
        let jordan = ComplexMatrix::from_real(&[vec![0.0, 1.0], vec![0.0, 0.0]]);
        assert!((sigma_max(&jordan).unwrap() - 1.0).abs() < 1e-10);
        let zero = ComplexMatrix::from_real(&[vec![0.0, 0.0], vec![0.0, 0.0]]);
        assert_eq!(sigma_max(&zero).unwrap(), 0.0);
    }

    #[test]
    fn sigma_max_unitary_phase_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let n = rng.random_range(1..=3);
            let m = ComplexMatrix::from_fn(n, |_, _| {
                Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0))
            });
            let u = ComplexMatrix::from_fn(n, |i, j| {
                if i == j {
                    Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let v = ComplexMatrix::from_fn(n, |i, j| {
                if i == j {
                    Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU))
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            let s1 = sigma_max(&m).unwrap();
            let s2 = sigma_max(&u.mul(&m).mul(&v)).unwrap();
            assert!((s1 - s2).abs() <= 1e-8 * s1.max(1.0));
            // dominates every entry magnitude
            for i in 0..n {
                for j in 0..n {
                    assert!(s1 + 1e-10 >= m.entry(i, j).norm());
                }
            }
        }
    }

    #[test]
    fn column_reduced_examples() {
        let d1 = crate::polymatrix::PolynomialMatrix::new(vec![
            vec![p(&[1.0, 1.0]), Polynomial::zero()],
            vec![Polynomial::zero(), p(&[2.0, 1.0])],
        ])
        .unwrap();
        assert!(column_reduced_check(&d1, 1e-9).unwrap().yes);
        // [[s, s],[1, 1]] has a singular leading column matrix
        let d2 = crate::polymatrix::PolynomialMatrix::new(vec![
            vec![p(&[0.0, 1.0]), p(&[0.0, 1.0])],
            vec![p(&[1.0]), p(&[1.0])],
        ])
        .unwrap();
        assert!(!column_reduced_check(&d2, 1e-9).unwrap().yes);
        assert!(column_reduced_check(&crate::polymatrix::PolynomialMatrix::identity(2), 1e-9)
            .unwrap()
            .yes);
    }

    #[test]
    fn hinf_scalar_golden_cases() {
        let settings = EngineSettings::default();
        let fs = FreqSettings::default();
        // ||0.5/(s+1)|| = 0.5 < 1
        let holds = hinf_lt_one(&scalar_fixed(&[0.5], &[1.0, 1.0]), Method::Thm1Row, &settings, &fs);
        match holds.outcome {
            CheckOutcome::Holds { margin } => assert!((margin - 0.5).abs() < 1e-6),
            other => panic!("expected holds, got {other:?}"),
        }
        // ||1/(s+1)|| peaks at exactly 1 at omega = 0: not strictly below 1
        let viol = hinf_lt_one(&scalar_fixed(&[1.0], &[1.0, 1.0]), Method::Thm1Row, &settings, &fs);
        match viol.outcome {
            CheckOutcome::Violated { at } => {
                assert_eq!(at.omega, 0.0);
                assert!((at.value - 1.0).abs() < 1e-9);
            }
            other => panic!("expected violated, got {other:?}"),
        }
        // zero numerator holds trivially
        let zero = hinf_lt_one(&scalar_fixed(&[0.0], &[1.0, 1.0]), Method::Thm1Row, &settings, &fs);
        match zero.outcome {
            CheckOutcome::Holds { margin } => assert!((margin - 1.0).abs() < 1e-9),
            other => panic!("expected holds, got {other:?}"),
        }
    }

    #[test]
    fn spr_scalar_golden_cases() {
        let settings = EngineSettings::default();
        let fs = FreqSettings::default();
        // (s+2)/(s+1): Re G = (2 + w^2)/(1 + w^2) > 0
        let holds = spr_check(&scalar_fixed(&[2.0, 1.0], &[1.0, 1.0]), Method::Thm1Row, &settings, &fs);
        assert!(matches!(holds.outcome, CheckOutcome::Holds { .. }), "{:?}", holds.outcome);
        // (s-2)/(s+1) is -2 at omega = 0
        let viol = spr_check(&scalar_fixed(&[-2.0, 1.0], &[1.0, 1.0]), Method::Thm1Row, &settings, &fs);
        match viol.outcome {
            CheckOutcome::Violated { at } => {
                assert_eq!(at.omega, 0.0);
                assert!((at.value - -2.0).abs() < 1e-9);
            }
            other => panic!("expected violated, got {other:?}"),
        }
        // identity-like transfer: G = 1
        let ident = spr_check(&scalar_fixed(&[1.0, 1.0], &[1.0, 1.0]), Method::Thm1Row, &settings, &fs);
        assert!(matches!(ident.outcome, CheckOutcome::Holds { .. }));
    }

    #[test]
    fn sector_scalar_golden_cases() {
        let settings = EngineSettings::default();
        let fs = FreqSettings::default();
        let k = SectorSpec::new(vec![vec![1.0]], 0.0).unwrap();
        // 1 + 1/(1+w^2) stays positive
        let cert = sector_positivity(
            &scalar_fixed(&[1.0], &[1.0, 1.0]),
            &k,
            Method::Thm1Row,
            &settings,
            &fs,
        );
        assert!(matches!(cert.outcome, CheckOutcome::Holds { .. }), "{:?}", cert.outcome);
        // G = -2/(s+1): Z(0) = -1
        let viol = sector_positivity(
            &scalar_fixed(&[-2.0], &[1.0, 1.0]),
            &k,
            Method::Thm1Row,
            &settings,
            &fs,
        );
        match viol.outcome {
            CheckOutcome::Violated { at } => {
                assert_eq!(at.omega, 0.0);
                assert!((at.value - -1.0).abs() < 1e-9);
            }
            other => panic!("expected violated, got {other:?}"),
        }
    }

    #[test]
    fn sector_spec_validation() {
        assert!(SectorSpec::new(vec![vec![1.0, 0.2], vec![0.2, 1.0]], 0.1).is_ok());
        assert!(matches!(
            SectorSpec::new(vec![vec![0.0]], 0.0),
            Err(FreqError::SectorNotPositive { .. })
        ));
        assert!(matches!(
            SectorSpec::new(vec![vec![1.0, 0.5], vec![-0.5, 1.0]], 0.0),
            Err(FreqError::SectorNotSymmetric { .. })
        ));
        assert!(matches!(
            SectorSpec::new(vec![vec![1.0]], -0.5),
            Err(FreqError::NegativeEta { .. })
        ));
    }

    #[test]
    fn sector_requires_strict_properness() {
        let settings = EngineSettings::default();
        let fs = FreqSettings::default();
        let k = SectorSpec::new(vec![vec![1.0]], 0.0).unwrap();
        // (s+2)/(s+1) is proper but not strictly proper
        let report = sector_positivity(
            &scalar_fixed(&[2.0, 1.0], &[1.0, 1.0]),
            &k,
            Method::Thm1Row,
            &settings,
            &fs,
        );
        assert!(matches!(report.outcome, CheckOutcome::Inconclusive { .. }));
        assert!(report.precondition_failures > 0);
        assert!(report.precondition_notes[0].contains("column 1"));
    }

    #[test]
    fn sector_agrees_with_direct_scalar_inequality() {
        let settings = EngineSettings::default();
        let fs = FreqSettings::default();
        // decision must agree with the direct inequality 1 + k Re G(jw) > 0
        let cases: Vec<(f64, Vec<f64>, Vec<f64>)> = vec![
            (0.5, vec![1.0], vec![2.0, 1.0]),
            (1.0, vec![1.0], vec![2.0, 1.0]),
            (3.0, vec![1.0], vec![2.0, 1.0]),
            // G = (1-s)/(s^2+3s+2) has Re G < 0 beyond omega^2 = 1/2
            (20.0, vec![1.0, -1.0], vec![2.0, 3.0, 1.0]),
            (1.0, vec![1.0, -1.0], vec![2.0, 3.0, 1.0]),
        ];
        for (kk, bp, dp) in cases {
            let k = SectorSpec::new(vec![vec![kk]], 0.0).unwrap();
            let problem = scalar_fixed(&bp, &dp);
            let report = sector_positivity(&problem, &k, Method::Thm1Row, &settings, &fs);
            let b0 = Polynomial::new(bp.clone()).unwrap();
            let d0 = Polynomial::new(dp.clone()).unwrap();
            let omega_max =
                fs.omega_margin * d0.cauchy_root_bound().map(|r| 1.0 + r).unwrap_or(1.0);
            let mut direct_min = f64::INFINITY;
            for i in 0..=20_000 {
                let z = Complex64::new(0.0, omega_max * i as f64 / 20_000.0);
                let g = b0.eval(z) / d0.eval(z);
                direct_min = direct_min.min(1.0 + kk * g.re);
            }
            match report.outcome {
                CheckOutcome::Holds { .. } => {
                    assert!(direct_min > 0.0, "k={kk}: direct min {direct_min}")
                }
                CheckOutcome::Violated { .. } => {
                    assert!(direct_min <= 1e-9, "k={kk}: direct min {direct_min}")
                }
                other => panic!("k={kk}: inconclusive {other:?} with direct min {direct_min}"),
            }
        }
    }

    #[test]
    fn closed_loop_scalar_cases() {
        let settings = EngineSettings::default();
        // P = 1/(s+1), K = 1: characteristic family s + 2
        let stable = Problem::new(
            crate::polymatrix::PolynomialMatrix::identity(1),
            crate::polymatrix::PolynomialMatrix::identity(1),
            IntervalPolynomialMatrix::new(vec![vec![IntervalPolynomial::from_point(&p(&[1.0]))]])
                .unwrap(),
            IntervalPolynomialMatrix::new(vec![vec![IntervalPolynomial::from_point(&p(&[
                1.0, 1.0,
            ]))]])
            .unwrap(),
        )
        .unwrap();
        let report = closed_loop_stable(&stable, Method::Thm1Row, &settings).unwrap();
        assert_eq!(report.verdict, Verdict::Stable);
        // P = 1/(s-1), K = 0.5: characteristic family s - 0.5
        let unstable = Problem::new(
            crate::polymatrix::PolynomialMatrix::new(vec![vec![p(&[0.5])]]).unwrap(),
            crate::polymatrix::PolynomialMatrix::identity(1),
            IntervalPolynomialMatrix::new(vec![vec![IntervalPolynomial::from_point(&p(&[1.0]))]])
                .unwrap(),
            IntervalPolynomialMatrix::new(vec![vec![IntervalPolynomial::from_point(&p(&[
                -1.0, 1.0,
            ]))]])
            .unwrap(),
        )
        .unwrap();
        let report = closed_loop_stable(&unstable, Method::Thm1Row, &settings).unwrap();
        assert_eq!(report.verdict, Verdict::Unstable);
    }
}
