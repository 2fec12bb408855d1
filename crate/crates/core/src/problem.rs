//! Problem-file ingestion: the versioned JSON schema, the
//! uncertainty-scale templates, and the bundled manipulator fixtures.
//!
//! Coefficients of `B` and `D` entries come in three spellings: a bare
//! number (point interval), a `[lo, hi]` pair (fixed interval), or
//! `{"center": c, "scale": s}` which resolves to `[c - eps*s, c + eps*s]`
//! at a given uncertainty scale `eps`, so the same file drives both
//! `analyze` and the `margin` bisection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::Problem;
use crate::kharitonov::IntervalPolynomial;
use crate::poly::Polynomial;
use crate::polymatrix::{IntervalPolynomialMatrix, PolynomialMatrix};

pub const SCHEMA_VERSION: u32 = 1;

/// The paper-derived two-link manipulator family with the joint-angle box
/// over-approximation baked into `B`.
pub const MANIPULATOR_FIXTURE: &str = include_str!("../fixtures/manipulator.json");
/// The same family with the joint angle pinned at zero (point `B`).
pub const MANIPULATOR_THETA0_FIXTURE: &str = include_str!("../fixtures/manipulator_theta0.json");

/// Resolve a builtin fixture name.
pub fn builtin_fixture(name: &str) -> Option<&'static str> {
    match name {
        "manipulator" => Some(MANIPULATOR_FIXTURE),
        "manipulator_theta0" => Some(MANIPULATOR_THETA0_FIXTURE),
        _ => None,
    }
}

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("cannot parse problem file at {path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("unsupported schema version {got} (expected {SCHEMA_VERSION})")]
    Schema { got: u32 },
    #[error("n must be at least 1")]
    ZeroDim,
    #[error("{matrix} must be {n}x{n}: row {row} has {len} entries")]
    BadShape { matrix: &'static str, n: usize, row: usize, len: usize },
    #[error("{matrix}({row},{col}) coefficient {index}: {message}")]
    BadCoefficient { matrix: &'static str, row: usize, col: usize, index: usize, message: String },
    #[error("{matrix}({row},{col}): entry has no coefficients")]
    EmptyEntry { matrix: &'static str, row: usize, col: usize },
    #[error("eps must be nonnegative, got {eps}")]
    NegativeEps { eps: f64 },
    #[error("problem has no center/scale template entries; margin needs them")]
    NoTemplate,
}

/// One coefficient of an interval polynomial entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoeffSpec {
    /// Fixed value (point interval).
    Point(f64),
    /// Fixed closed interval `[lo, hi]`.
    Interval([f64; 2]),
    /// Uncertainty-scaled interval `[center - eps*scale, center + eps*scale]`.
    Scaled { center: f64, scale: f64 },
}

impl CoeffSpec {
    fn resolve(&self, eps: f64) -> Result<(f64, f64), String> {
        match *self {
            CoeffSpec::Point(x) => Ok((x, x)),
            CoeffSpec::Interval([lo, hi]) => {
                if lo > hi {
                    Err(format!("lo > hi ({lo} > {hi})"))
                } else {
                    Ok((lo, hi))
                }
            }
            CoeffSpec::Scaled { center, scale } => {
                if scale < 0.0 {
                    Err(format!("scale must be nonnegative, got {scale}"))
                } else {
                    Ok((center - eps * scale, center + eps * scale))
                }
            }
        }
    }

    fn is_scaled(&self) -> bool {
        matches!(self, CoeffSpec::Scaled { .. })
    }
}

/// Sector-check parameters from the problem file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorBlock {
    #[serde(rename = "K")]
    pub k: Vec<Vec<f64>>,
    #[serde(default)]
    pub eta: f64,
}

/// Optional frequency-domain check blocks.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckBlocks {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hinf: Option<serde_json::Map<String, serde_json::Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spr: Option<serde_json::Map<String, serde_json::Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector: Option<SectorBlock>,
}

/// Tolerance overrides carried by the problem file; command-line flags win.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SettingsPatch {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub routh_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hull_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq_floor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SettingsPatch {
    pub fn apply(&self, settings: &mut crate::engine::EngineSettings) {
        if let Some(v) = self.routh_tol {
            settings.routh_tol = v;
        }
        if let Some(v) = self.hull_tol {
            settings.hull_tol = v;
        }
        if let Some(v) = self.freq_floor {
            settings.freq_floor = v;
        }
        if let Some(v) = self.seed {
            settings.seed = v;
        }
    }
}

/// Parsed problem file. `A` and `C` default to identity when omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub schema: u32,
    pub n: usize,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<Vec<CoeffSpec>>>,
    #[serde(rename = "D")]
    pub d: Vec<Vec<Vec<CoeffSpec>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checks: Option<CheckBlocks>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub settings: Option<SettingsPatch>,
}

impl ProblemFile {
    /// Parse from JSON text with field-path diagnostics.
    pub fn parse(text: &str, origin: &str) -> Result<Self, ProblemError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: ProblemFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = format!("{origin}:{}", e.path());
            ProblemError::Json { path, source: e.into_inner() }
        })?;
        if file.schema != SCHEMA_VERSION {
            return Err(ProblemError::Schema { got: file.schema });
        }
        if file.n == 0 {
            return Err(ProblemError::ZeroDim);
        }
        // validate shapes and interval sanity at eps = 0 up front
        file.resolve(0.0)?;
        Ok(file)
    }

    /// Canonical JSON form; parse-then-serialize is idempotent.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("problem files always serialize")
    }

    /// Whether any coefficient carries a center/scale template.
    pub fn has_template(&self) -> bool {
        self.scaled_coefficients() > 0
    }

    pub fn scaled_coefficients(&self) -> usize {
        self.b
            .iter()
            .chain(self.d.iter())
            .flatten()
            .flatten()
            .filter(|c| c.is_scaled())
            .count()
    }

    fn fixed_matrix(
        n: usize,
        name: &'static str,
        data: &Option<Vec<Vec<Vec<f64>>>>,
    ) -> Result<PolynomialMatrix, ProblemError> {
        match data {
            None => Ok(PolynomialMatrix::identity(n)),
            Some(rows) => {
                if rows.len() != n {
                    return Err(ProblemError::BadShape { matrix: name, n, row: rows.len(), len: 0 });
                }
                let mut out = Vec::with_capacity(n);
                for (i, row) in rows.iter().enumerate() {
                    if row.len() != n {
                        return Err(ProblemError::BadShape { matrix: name, n, row: i + 1, len: row.len() });
                    }
                    let mut entries = Vec::with_capacity(n);
                    for (j, coeffs) in row.iter().enumerate() {
                        let p = Polynomial::new(coeffs.clone()).map_err(|e| {
                            ProblemError::BadCoefficient {
                                matrix: name,
                                row: i + 1,
                                col: j + 1,
                                index: 0,
                                message: e.to_string(),
                            }
                        })?;
                        entries.push(p);
                    }
                    out.push(entries);
                }
                Ok(PolynomialMatrix::new(out).expect("shape checked above"))
            }
        }
    }

    fn interval_matrix(
        n: usize,
        name: &'static str,
        data: &[Vec<Vec<CoeffSpec>>],
        eps: f64,
    ) -> Result<IntervalPolynomialMatrix, ProblemError> {
        if data.len() != n {
            return Err(ProblemError::BadShape { matrix: name, n, row: data.len(), len: 0 });
        }
        let mut out = Vec::with_capacity(n);
        for (i, row) in data.iter().enumerate() {
            if row.len() != n {
                return Err(ProblemError::BadShape { matrix: name, n, row: i + 1, len: row.len() });
            }
            let mut entries = Vec::with_capacity(n);
            for (j, specs) in row.iter().enumerate() {
                if specs.is_empty() {
                    return Err(ProblemError::EmptyEntry { matrix: name, row: i + 1, col: j + 1 });
                }
                let mut bounds = Vec::with_capacity(specs.len());
                for (k, spec) in specs.iter().enumerate() {
                    let pair = spec.resolve(eps).map_err(|message| {
                        ProblemError::BadCoefficient {
                            matrix: name,
                            row: i + 1,
                            col: j + 1,
                            index: k,
                            message,
                        }
                    })?;
                    bounds.push(pair);
                }
                let ip = IntervalPolynomial::new(bounds).map_err(|e| {
                    ProblemError::BadCoefficient {
                        matrix: name,
                        row: i + 1,
                        col: j + 1,
                        index: 0,
                        message: e.to_string(),
                    }
                })?;
                entries.push(ip);
            }
            out.push(entries);
        }
        Ok(IntervalPolynomialMatrix::new(out).expect("shape checked above"))
    }

    /// Instantiate the interval boxes at the given uncertainty scale.
    pub fn resolve(&self, eps: f64) -> Result<Problem, ProblemError> {
        if eps < 0.0 {
            return Err(ProblemError::NegativeEps { eps });
        }
        let n = self.n;
        let a = Self::fixed_matrix(n, "A", &self.a)?;
        let c = Self::fixed_matrix(n, "C", &self.c)?;
        let b = Self::interval_matrix(n, "B", &self.b, eps)?;
        let d = Self::interval_matrix(n, "D", &self.d, eps)?;
        Ok(Problem::new(a, c, b, d).expect("dimensions validated above"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manipulator_fixture_parses() {
        let file = ProblemFile::parse(MANIPULATOR_FIXTURE, "builtin").unwrap();
        assert_eq!(file.n, 2);
        assert_eq!(file.scaled_coefficients(), 12);
        assert!(file.has_template());
        // C omitted: defaults to identity
        assert!(file.c.is_none());
        let problem = file.resolve(0.5).unwrap();
        assert_eq!(problem.c, PolynomialMatrix::identity(2));
        // the two off-diagonal B entries are the only nondegenerate ones
        assert_eq!(problem.b.nondegenerate_entries(), 2);
        assert_eq!(problem.d.nondegenerate_entries(), 4);
        // Kd(1,1) bounds at eps = 0.5
        let d11 = problem.d.entry(0, 0);
        assert!((d11.lo(2) - 3.035).abs() < 1e-12);
        assert!((d11.hi(2) - 9.105).abs() < 1e-12);
        assert!((d11.lo(1) - 3.06).abs() < 1e-12);
        assert!((d11.lo(0) - 2.555).abs() < 1e-12);
    }

    #[test]
    fn eps_zero_gives_point_template_entries() {
        let file = ProblemFile::parse(MANIPULATOR_FIXTURE, "builtin").unwrap();
        let problem = file.resolve(0.0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!(problem.d.entry(i, j).is_full_point());
            }
        }
        // the plain B intervals are not eps-scaled
        assert!(!problem.b.entry(0, 1).is_full_point());
    }

    #[test]
    fn theta0_fixture_has_point_b() {
        let file = ProblemFile::parse(MANIPULATOR_THETA0_FIXTURE, "builtin").unwrap();
        let problem = file.resolve(0.1).unwrap();
        assert_eq!(problem.b.nondegenerate_entries(), 0);
    }

    #[test]
    fn inverted_interval_is_rejected_naming_the_entry() {
        let text = r#"{
            "schema": 1, "n": 1,
            "B": [[[ [2.0, 1.0] ]]],
            "D": [[[ 0.0 ]]]
        }"#;
        let err = ProblemFile::parse(text, "test").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("B(1,1)"), "{msg}");
        assert!(msg.contains("coefficient 0"), "{msg}");
    }

    #[test]
    fn schema_and_shape_errors() {
        let bad_schema = r#"{"schema": 2, "n": 1, "B": [[[1]]], "D": [[[1]]]}"#;
        assert!(matches!(
            ProblemFile::parse(bad_schema, "test"),
            Err(ProblemError::Schema { got: 2 })
        ));
        let bad_shape = r#"{"schema": 1, "n": 2, "B": [[[1]]], "D": [[[1],[1]],[[1],[1]]]}"#;
        let msg = ProblemFile::parse(bad_shape, "test").unwrap_err().to_string();
        assert!(msg.contains('B'), "{msg}");
    }

    #[test]
    fn round_trip_is_idempotent() {
        let file = ProblemFile::parse(MANIPULATOR_FIXTURE, "builtin").unwrap();
        let once = file.to_canonical_json();
        let reparsed = ProblemFile::parse(&once, "round1").unwrap();
        assert_eq!(reparsed.to_canonical_json(), once);
        assert_eq!(reparsed, file);
    }

    #[test]
    fn sector_block_round_trips() {
        let text = r#"{
            "schema": 1, "n": 1,
            "B": [[[ 1.0 ]]],
            "D": [[[ 1.0, 1.0 ]]],
            "checks": {"sector": {"K": [[1.0]], "eta": 0.25}}
        }"#;
        let file = ProblemFile::parse(text, "test").unwrap();
        let sector = file.checks.as_ref().unwrap().sector.as_ref().unwrap();
        assert_eq!(sector.k, vec![vec![1.0]]);
        assert_eq!(sector.eta, 0.25);
    }

    #[test]
    fn builtin_lookup() {
        assert!(builtin_fixture("manipulator").is_some());
        assert!(builtin_fixture("manipulator_theta0").is_some());
        assert!(builtin_fixture("nope").is_none());
    }
}
