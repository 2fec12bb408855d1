//! Interval polynomials and their Kharitonov vertex and edge sets.
//!
//! The four vertices follow the periodic low/high patterns over `k mod 4`
//! (`L,L,U,U` / `L,U,U,L` / `U,L,L,U` / `U,U,L,L`), and the four edges join
//! the vertex pairs (1,2), (2,4), (4,3), (3,1) with the closed parameter
//! range `lambda in [0,1]`, so every vertex lies on two edges.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::poly::Polynomial;

#[derive(Debug, Error, PartialEq)]
pub enum IntervalError {
    #[error("bound list is empty")]
    Empty,
    #[error("bound {index} is not finite")]
    NonFinite { index: usize },
    #[error("bound {index} has lo > hi ({lo} > {hi})")]
    Inverted { index: usize, lo: f64, hi: f64 },
}

/// One of the four Kharitonov vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VertexId {
    K1,
    K2,
    K3,
    K4,
}

impl VertexId {
    pub const ALL: [VertexId; 4] = [VertexId::K1, VertexId::K2, VertexId::K3, VertexId::K4];

    /// 1-based index used in reports.
    pub fn index(self) -> usize {
        match self {
            VertexId::K1 => 1,
            VertexId::K2 => 2,
            VertexId::K3 => 3,
            VertexId::K4 => 4,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index.checked_sub(1)?).copied()
    }

    /// Bound selection pattern by `k mod 4`: true picks the upper bound.
    fn pattern(self) -> [bool; 4] {
        match self {
            VertexId::K1 => [false, false, true, true],
            VertexId::K2 => [false, true, true, false],
            VertexId::K3 => [true, false, false, true],
            VertexId::K4 => [true, true, false, false],
        }
    }
}

/// One of the four Kharitonov edges, identified by its vertex pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeId {
    E12,
    E24,
    E43,
    E31,
}

impl EdgeId {
    pub const ALL: [EdgeId; 4] = [EdgeId::E12, EdgeId::E24, EdgeId::E43, EdgeId::E31];

    /// `(from, to)` vertex pair; the segment is `lambda*from + (1-lambda)*to`.
    pub fn endpoints(self) -> (VertexId, VertexId) {
        match self {
            EdgeId::E12 => (VertexId::K1, VertexId::K2),
            EdgeId::E24 => (VertexId::K2, VertexId::K4),
            EdgeId::E43 => (VertexId::K4, VertexId::K3),
            EdgeId::E31 => (VertexId::K3, VertexId::K1),
        }
    }

    /// 1-based position in the pair list (1,2),(2,4),(4,3),(3,1).
    pub fn index(self) -> usize {
        match self {
            EdgeId::E12 => 1,
            EdgeId::E24 => 2,
            EdgeId::E43 => 3,
            EdgeId::E31 => 4,
        }
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index.checked_sub(1)?).copied()
    }
}

/// Segment between two Kharitonov vertices, `lambda*from + (1-lambda)*to`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSegment {
    pub from: Polynomial,
    pub to: Polynomial,
}

impl EdgeSegment {
    pub fn at(&self, lambda: f64) -> Polynomial {
        self.from.scale(lambda).add(&self.to.scale(1.0 - lambda))
    }

    /// Both endpoints coincide exactly.
    pub fn is_degenerate(&self) -> bool {
        self.from == self.to
    }
}

/// Per-coefficient degeneracy report.
#[derive(Debug, Clone, PartialEq)]
pub struct Degeneracy {
    /// Flag per coefficient: interval is a point (`lo == hi` exactly).
    pub point: Vec<bool>,
    /// All coefficient intervals are points.
    pub full_point: bool,
}

/// Closed coefficient box: `bounds[k]` bounds the coefficient of `s^k`.
/// Exact trailing `[0,0]` intervals are trimmed at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct IntervalPolynomial {
    bounds: Vec<(f64, f64)>,
    invariant_degree: bool,
}

impl TryFrom<Vec<[f64; 2]>> for IntervalPolynomial {
    type Error = IntervalError;

    fn try_from(bounds: Vec<[f64; 2]>) -> Result<Self, IntervalError> {
        Self::new(bounds.into_iter().map(|[lo, hi]| (lo, hi)).collect())
    }
}

impl From<IntervalPolynomial> for Vec<[f64; 2]> {
    fn from(ip: IntervalPolynomial) -> Self {
        ip.bounds.into_iter().map(|(lo, hi)| [lo, hi]).collect()
    }
}

impl IntervalPolynomial {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self, IntervalError> {
        if bounds.is_empty() {
            return Err(IntervalError::Empty);
        }
        for (index, &(lo, hi)) in bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(IntervalError::NonFinite { index });
            }
            if lo > hi {
                return Err(IntervalError::Inverted { index, lo, hi });
            }
        }
        let mut bounds = bounds;
        while bounds.len() > 1 && bounds[bounds.len() - 1] == (0.0, 0.0) {
            bounds.pop();
        }
        // Invariant family degree: the top interval is a point, or both of
        // its bounds share a sign and neither is zero.
        let (lo, hi) = bounds[bounds.len() - 1];
        let invariant_degree = lo == hi || (lo != 0.0 && hi != 0.0 && lo.signum() == hi.signum());
        Ok(Self { bounds, invariant_degree })
    }

    /// Interval polynomial whose box is the single polynomial `p`.
    pub fn from_point(p: &Polynomial) -> Self {
        let bounds = p.coeffs().iter().map(|&c| (c, c)).collect();
        Self::new(bounds).expect("point bounds are always well-formed")
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn num_coeffs(&self) -> usize {
        self.bounds.len()
    }

    pub fn lo(&self, k: usize) -> f64 {
        self.bounds.get(k).map_or(0.0, |b| b.0)
    }

    pub fn hi(&self, k: usize) -> f64 {
        self.bounds.get(k).map_or(0.0, |b| b.1)
    }

    /// Highest stored coefficient index.
    pub fn degree_bound(&self) -> usize {
        self.bounds.len() - 1
    }

    /// Whether every member of the family has the same degree (used by the
    /// degree-drop prechecks; entries failing this are not rejected here).
    pub fn has_invariant_degree(&self) -> bool {
        self.invariant_degree
    }

    pub fn vertex(&self, id: VertexId) -> Polynomial {
        let pattern = id.pattern();
        let coeffs = self
            .bounds
            .iter()
            .enumerate()
            .map(|(k, &(lo, hi))| if pattern[k % 4] { hi } else { lo })
            .collect();
        Polynomial::new(coeffs).expect("vertex bounds are finite")
    }

    /// The four Kharitonov vertices K1..K4.
    pub fn vertices(&self) -> [Polynomial; 4] {
        VertexId::ALL.map(|id| self.vertex(id))
    }

    pub fn edge(&self, id: EdgeId) -> EdgeSegment {
        let (from, to) = id.endpoints();
        EdgeSegment { from: self.vertex(from), to: self.vertex(to) }
    }

    /// The four Kharitonov edges for pairs (1,2),(2,4),(4,3),(3,1).
    pub fn edges(&self) -> [EdgeSegment; 4] {
        EdgeId::ALL.map(|id| self.edge(id))
    }

    /// Which coefficient intervals are exact points, and whether all are.
    pub fn degeneracy(&self) -> Degeneracy {
        let point: Vec<bool> = self.bounds.iter().map(|&(lo, hi)| lo == hi).collect();
        let full_point = point.iter().all(|&p| p);
        Degeneracy { point, full_point }
    }

    pub fn is_full_point(&self) -> bool {
        self.bounds.iter().all(|&(lo, hi)| lo == hi)
    }

    /// Midpoint member of the box.
    pub fn center(&self) -> Polynomial {
        let coeffs = self.bounds.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect();
        Polynomial::new(coeffs).expect("center bounds are finite")
    }

    /// Independent uniform draw per coefficient.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Polynomial {
        let coeffs = self
            .bounds
            .iter()
            .map(|&(lo, hi)| if lo == hi { lo } else { rng.random_range(lo..=hi) })
            .collect();
        Polynomial::new(coeffs).expect("sampled bounds are finite")
    }

    /// Box membership with an absolute slack per coefficient.
    pub fn contains(&self, p: &Polynomial, slack: f64) -> bool {
        let len = self.bounds.len().max(p.coeffs().len());
        (0..len).all(|k| {
            let c = p.coeff(k);
            c >= self.lo(k) - slack && c <= self.hi(k) + slack
        })
    }

    /// Vertices deduplicated by exact coefficient equality, keeping the
    /// first id for each distinct polynomial.
    pub fn distinct_vertices(&self) -> Vec<(VertexId, Polynomial)> {
        let mut out: Vec<(VertexId, Polynomial)> = Vec::new();
        for id in VertexId::ALL {
            let v = self.vertex(id);
            if !out.iter().any(|(_, seen)| *seen == v) {
                out.push((id, v));
            }
        }
        out
    }

    /// Nondegenerate edges deduplicated by unordered endpoint pair.
    pub fn distinct_edges(&self) -> Vec<(EdgeId, EdgeSegment)> {
        let mut out: Vec<(EdgeId, EdgeSegment)> = Vec::new();
        for id in EdgeId::ALL {
            let e = self.edge(id);
            if e.is_degenerate() {
                continue;
            }
            let dup = out.iter().any(|(_, seen)| {
                (seen.from == e.from && seen.to == e.to) || (seen.from == e.to && seen.to == e.from)
            });
            if !dup {
                out.push((id, e));
            }
        }
        out
    }
}
