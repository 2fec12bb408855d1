//! Enumeration of the reduced testing configurations: the two-permutation
//! edge set (one edge per row of each matrix), the one-edge-per-row
//! intersection set in both its row- and column-indexed readings, and the
//! single-row exchange sets, together with degeneracy collapse and exact
//! counting.

use std::collections::BTreeSet;

use itertools::Itertools;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kharitonov::{EdgeId, EdgeSegment, VertexId};
use crate::poly::Polynomial;
use crate::polymatrix::{IntervalPolynomialMatrix, PolynomialMatrix};

#[derive(Debug, Error, PartialEq)]
pub enum EnumerationError {
    #[error("B and D must share dimension, got {b} and {d}")]
    DimensionMismatch { b: usize, d: usize },
    #[error("row index {row} out of range for n = {n}")]
    RowOutOfRange { row: usize, n: usize },
}

/// Which interval matrix an entry belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    B,
    D,
}

/// A matrix entry position (0-based internally, printed 1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position {
    pub side: Side,
    pub row: usize,
    pub col: usize,
}

impl Position {
    pub fn new(side: Side, row: usize, col: usize) -> Self {
        Self { side, row, col }
    }

    /// Index into the canonical state vector: all of B row-major, then D.
    pub fn flat_index(&self, n: usize) -> usize {
        let offset = match self.side {
            Side::B => 0,
            Side::D => n * n,
        };
        offset + self.row * n + self.col
    }
}

impl std::fmt::Display for Position {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let side = match self.side {
            Side::B => 'B',
            Side::D => 'D',
        };
        write!(f, "{}({},{})", side, self.row + 1, self.col + 1)
    }
}

impl Serialize for Position {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// Testing-set family selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Two permutations: one edge per row in B and one per row in D
    /// (2n parameters per configuration).
    Prop1,
    /// One edge per row across both matrices, designated columns pairwise
    /// distinct within each side (n parameters).
    Thm1Row,
    /// Column-indexed reading: one edge per column, designated rows
    /// pairwise distinct within each side (n parameters).
    Thm1Column,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Prop1 => "prop1",
            Method::Thm1Row => "thm1_row",
            Method::Thm1Column => "thm1_column",
        }
    }

    pub fn patterns(&self, n: usize) -> Vec<PatternSkeleton> {
        match self {
            Method::Prop1 => prop1_patterns(n),
            Method::Thm1Row => thm1_patterns(n, Thm1Variant::Row),
            Method::Thm1Column => thm1_patterns(n, Thm1Variant::Column),
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "prop1" => Ok(Method::Prop1),
            "thm1_row" => Ok(Method::Thm1Row),
            "thm1_column" => Ok(Method::Thm1Column),
            other => Err(format!("unknown method '{other}' (expected prop1|thm1_row|thm1_column)")),
        }
    }
}

/// Row- or column-indexed reading of the intersection testing set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Thm1Variant {
    Row,
    Column,
}

/// Exchange-set mode for a single row: two edges in the row (one per side,
/// independent columns), or a single edge in exactly one side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma2Mode {
    /// `N^(i)`: edge at B(i,k1) and at D(i,k2), all (k1,k2) pairs.
    TwoEdges,
    /// `N_E^(i)`: a single column k with an edge in exactly one of B, D.
    OneEdge,
}

/// Edge-position skeleton: which entries carry the one-parameter edges.
/// Vertex and edge indices are not yet assigned.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternSkeleton {
    pub n: usize,
    /// Edge positions in lambda order.
    pub edges: Vec<Position>,
    /// Human-readable provenance (permutations or row/side assignment).
    pub label: String,
    /// Number of raw patterns merged into this one by degeneracy collapse.
    pub merged: usize,
}

impl PatternSkeleton {
    fn new(n: usize, edges: Vec<Position>, label: String) -> Self {
        Self { n, edges, label, merged: 1 }
    }

    pub fn edge_set(&self) -> BTreeSet<Position> {
        self.edges.iter().copied().collect()
    }
}

/// All permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    (0..n).permutations(n).collect()
}

/// One skeleton per permutation pair: B edges at (i, sigma_b(i)), D edges
/// at (i, sigma_d(i)); `(n!)^2` skeletons, 2n edges each.
pub fn prop1_patterns(n: usize) -> Vec<PatternSkeleton> {
    let perms = permutations(n);
    let mut out = Vec::with_capacity(perms.len() * perms.len());
    for sb in &perms {
        for sd in &perms {
            let mut edges = Vec::with_capacity(2 * n);
            for (i, &j) in sb.iter().enumerate() {
                edges.push(Position::new(Side::B, i, j));
            }
            for (i, &j) in sd.iter().enumerate() {
                edges.push(Position::new(Side::D, i, j));
            }
            let label = format!("prop1 sigma_b={sb:?} sigma_d={sd:?}");
            out.push(PatternSkeleton::new(n, edges, label));
        }
    }
    out
}

/// Row variant: each row picks a side and a designated column (distinct
/// columns within each side). Column variant: the transpose reading.
/// Pattern count is `sum_t C(n,t)^2 n! = (2n)!/n!` either way.
pub fn thm1_patterns(n: usize, variant: Thm1Variant) -> Vec<PatternSkeleton> {
    let mut out = Vec::new();
    let mut assignment: Vec<(Side, usize)> = Vec::with_capacity(n);
    fn recurse(
        n: usize,
        variant: Thm1Variant,
        assignment: &mut Vec<(Side, usize)>,
        used_b: &mut Vec<bool>,
        used_d: &mut Vec<bool>,
        out: &mut Vec<PatternSkeleton>,
    ) {
        if assignment.len() == n {
            let edges: Vec<Position> = assignment
                .iter()
                .enumerate()
                .map(|(slot, &(side, idx))| match variant {
                    Thm1Variant::Row => Position::new(side, slot, idx),
                    Thm1Variant::Column => Position::new(side, idx, slot),
                })
                .collect();
            let what = match variant {
                Thm1Variant::Row => "thm1_row",
                Thm1Variant::Column => "thm1_column",
            };
            let label = format!("{what} assignment={assignment:?}");
            out.push(PatternSkeleton::new(n, edges, label));
            return;
        }
        for side in [Side::B, Side::D] {
            for idx in 0..n {
                let used = match side {
                    Side::B => &mut *used_b,
                    Side::D => &mut *used_d,
                };
                if used[idx] {
                    continue;
                }
                used[idx] = true;
                assignment.push((side, idx));
                recurse(n, variant, assignment, used_b, used_d, out);
                assignment.pop();
                let used = match side {
                    Side::B => &mut *used_b,
                    Side::D => &mut *used_d,
                };
                used[idx] = false;
            }
        }
    }
    recurse(n, variant, &mut assignment, &mut vec![false; n], &mut vec![false; n], &mut out);
    out
}

/// Exchange-set skeletons for row `i`.
pub fn lemma2_patterns(
    n: usize,
    row: usize,
    mode: Lemma2Mode,
) -> Result<Vec<PatternSkeleton>, EnumerationError> {
    if row >= n {
        return Err(EnumerationError::RowOutOfRange { row, n });
    }
    let mut out = Vec::new();
    match mode {
        Lemma2Mode::TwoEdges => {
            for k1 in 0..n {
                for k2 in 0..n {
                    let edges =
                        vec![Position::new(Side::B, row, k1), Position::new(Side::D, row, k2)];
                    let label = format!("lemma2 row={} k1={} k2={}", row + 1, k1 + 1, k2 + 1);
                    out.push(PatternSkeleton::new(n, edges, label));
                }
            }
        }
        Lemma2Mode::OneEdge => {
            for k in 0..n {
                for side in [Side::B, Side::D] {
                    let edges = vec![Position::new(side, row, k)];
                    let label = format!(
                        "lemma2_e row={} k={} side={side:?}",
                        row + 1,
                        k + 1
                    );
                    out.push(PatternSkeleton::new(n, edges, label));
                }
            }
        }
    }
    Ok(out)
}

fn entry<'a>(
    b: &'a IntervalPolynomialMatrix,
    d: &'a IntervalPolynomialMatrix,
    pos: Position,
) -> &'a crate::kharitonov::IntervalPolynomial {
    match pos.side {
        Side::B => b.entry(pos.row, pos.col),
        Side::D => d.entry(pos.row, pos.col),
    }
}

/// Degeneracy collapse at the pattern level: edges on full-point entries
/// degenerate to their unique vertex and are dropped from the edge set;
/// the family of a pattern is then monotone in its edge set (vertices are
/// edge endpoints), so reduced sets contained in another reduced set are
/// absorbed by it. Keeps the first representative of every maximal set.
pub fn collapse_patterns(
    patterns: &[PatternSkeleton],
    b: &IntervalPolynomialMatrix,
    d: &IntervalPolynomialMatrix,
) -> Vec<PatternSkeleton> {
    let reduced: Vec<(Vec<Position>, BTreeSet<Position>)> = patterns
        .iter()
        .map(|p| {
            let edges: Vec<Position> = p
                .edges
                .iter()
                .copied()
                .filter(|&pos| !entry(b, d, pos).is_full_point())
                .collect();
            let set = edges.iter().copied().collect();
            (edges, set)
        })
        .collect();
    // Indices of maximal sets, first occurrence wins among equals.
    let mut keep: Vec<usize> = Vec::new();
    'outer: for (i, (_, set)) in reduced.iter().enumerate() {
        for (j, (_, other)) in reduced.iter().enumerate() {
            if i == j {
                continue;
            }
            if set == other {
                if j < i {
                    continue 'outer; // duplicate, earlier copy wins
                }
            } else if set.is_subset(other) {
                continue 'outer; // strictly absorbed
            }
        }
        keep.push(i);
    }
    let mut out: Vec<PatternSkeleton> = keep
        .iter()
        .map(|&i| PatternSkeleton {
            n: patterns[i].n,
            edges: reduced[i].0.clone(),
            label: patterns[i].label.clone(),
            merged: 0,
        })
        .collect();
    // Assign every raw pattern to the first kept superset of its reduced set.
    for (_, set) in &reduced {
        for (slot, &i) in keep.iter().enumerate() {
            if set.is_subset(&reduced[i].1) {
                out[slot].merged += 1;
                break;
            }
        }
    }
    out
}

/// Entry assignment in a fully expanded configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum EntryState {
    Vertex { id: VertexId, value: Polynomial },
    Edge { id: EdgeId, segment: EdgeSegment },
}

/// A fully assigned testing configuration: every entry of B and D carries
/// either a fixed Kharitonov vertex or a one-parameter Kharitonov edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeConfiguration {
    pub n: usize,
    pub pattern_index: usize,
    /// States in canonical order (B row-major, then D row-major).
    pub states: Vec<EntryState>,
    /// Edge positions in lambda order.
    pub edges: Vec<Position>,
}

impl EdgeConfiguration {
    /// Number of lambda parameters.
    pub fn arity(&self) -> usize {
        self.edges.len()
    }

    pub fn state(&self, pos: Position) -> &EntryState {
        &self.states[pos.flat_index(self.n)]
    }

    /// Instantiate at a lambda vector, one coordinate per edge position.
    pub fn instantiate(
        &self,
        lambda: &[f64],
    ) -> Result<(PolynomialMatrix, PolynomialMatrix), EnumerationError> {
        assert_eq!(lambda.len(), self.edges.len(), "lambda arity mismatch");
        let n = self.n;
        let value_at = |pos: Position| -> Polynomial {
            match self.state(pos) {
                EntryState::Vertex { value, .. } => value.clone(),
                EntryState::Edge { segment, .. } => {
                    let e = self.edges.iter().position(|&p| p == pos).unwrap();
                    segment.at(lambda[e])
                }
            }
        };
        let b = PolynomialMatrix::from_fn(n, |i, j| value_at(Position::new(Side::B, i, j)));
        let d = PolynomialMatrix::from_fn(n, |i, j| value_at(Position::new(Side::D, i, j)));
        Ok((b, d))
    }
}

/// Per-position choice lists for expanding a pattern skeleton.
///
/// With `dedup_values` every choice list is reduced to distinct polynomial
/// values (distinct vertex values; nondegenerate segments deduplicated by
/// unordered endpoints, falling back to the unique vertex on point
/// entries). Without it the four vertex indices and four edge pair-indices
/// are kept verbatim, mirroring the `4^(2n^2)` bookkeeping.
pub fn pattern_choices(
    pattern: &PatternSkeleton,
    b: &IntervalPolynomialMatrix,
    d: &IntervalPolynomialMatrix,
    dedup_values: bool,
) -> Vec<Vec<EntryState>> {
    let n = pattern.n;
    let edge_set = pattern.edge_set();
    let mut choices: Vec<Vec<EntryState>> = Vec::with_capacity(2 * n * n);
    for side in [Side::B, Side::D] {
        for row in 0..n {
            for col in 0..n {
                let pos = Position::new(side, row, col);
                let ip = entry(b, d, pos);
                let states: Vec<EntryState> = if edge_set.contains(&pos) {
                    let segs: Vec<EntryState> = if dedup_values {
                        ip.distinct_edges()
                            .into_iter()
                            .map(|(id, segment)| EntryState::Edge { id, segment })
                            .collect()
                    } else {
                        EdgeId::ALL
                            .iter()
                            .map(|&id| EntryState::Edge { id, segment: ip.edge(id) })
                            .collect()
                    };
                    if segs.is_empty() {
                        // fully degenerate entry: the edge is a point
                        vec![EntryState::Vertex { id: VertexId::K1, value: ip.vertex(VertexId::K1) }]
                    } else {
                        segs
                    }
                } else if dedup_values {
                    ip.distinct_vertices()
                        .into_iter()
                        .map(|(id, value)| EntryState::Vertex { id, value })
                        .collect()
                } else {
                    VertexId::ALL
                        .iter()
                        .map(|&id| EntryState::Vertex { id, value: ip.vertex(id) })
                        .collect()
                };
                choices.push(states);
            }
        }
    }
    choices
}

/// Number of configurations a pattern expands to.
pub fn pattern_config_count(
    pattern: &PatternSkeleton,
    b: &IntervalPolynomialMatrix,
    d: &IntervalPolynomialMatrix,
    dedup_values: bool,
) -> BigUint {
    pattern_choices(pattern, b, d, dedup_values)
        .iter()
        .fold(BigUint::from(1_u32), |acc, c| acc * BigUint::from(c.len()))
}

/// Stream every configuration of a pattern in lexicographic choice order.
pub fn expand_pattern<'a>(
    pattern: &'a PatternSkeleton,
    pattern_index: usize,
    b: &'a IntervalPolynomialMatrix,
    d: &'a IntervalPolynomialMatrix,
    dedup_values: bool,
) -> impl Iterator<Item = EdgeConfiguration> + 'a {
    let n = pattern.n;
    let choices = pattern_choices(pattern, b, d, dedup_values);
    let edges = pattern.edges.clone();
    choices.into_iter().multi_cartesian_product().map(move |states| {
        // an edge choice may have collapsed to a vertex on a degenerate entry
        let live_edges: Vec<Position> = edges
            .iter()
            .copied()
            .filter(|&pos| matches!(states[pos.flat_index(n)], EntryState::Edge { .. }))
            .collect();
        EdgeConfiguration { n, pattern_index, states, edges: live_edges }
    })
}

/// Serialize exact counts as decimal strings; they overflow JSON numbers.
pub mod biguint_string {
    use num_bigint::BigUint;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }
}

/// Exact-count report for the reduced testing sets.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountFormulas {
    /// `4^(2n^2) (n!)^2`
    #[serde(with = "biguint_string")]
    pub prop1: BigUint,
    /// `sum_t C(n,t)^2 4^(2n^2) n!`
    #[serde(with = "biguint_string")]
    pub thm1: BigUint,
    /// `(n!)^2`
    #[serde(with = "biguint_string")]
    pub prop1_patterns: BigUint,
    /// `sum_t C(n,t)^2 n! = (2n)!/n!`
    #[serde(with = "biguint_string")]
    pub thm1_patterns: BigUint,
}

pub fn factorial(n: usize) -> BigUint {
    (1..=n as u64).fold(BigUint::from(1_u32), |acc, k| acc * BigUint::from(k))
}

pub fn binomial(n: usize, t: usize) -> BigUint {
    if t > n {
        return BigUint::from(0_u32);
    }
    // Pascal row, exact.
    let mut row = vec![BigUint::from(1_u32)];
    for _ in 0..n {
        let mut next = vec![BigUint::from(1_u32)];
        for w in row.windows(2) {
            next.push(&w[0] + &w[1]);
        }
        next.push(BigUint::from(1_u32));
        row = next;
    }
    row[t].clone()
}

pub fn count_formulas(n: usize) -> CountFormulas {
    let four_pow = BigUint::from(4_u32).pow(2 * (n as u32) * (n as u32));
    let nfact = factorial(n);
    let sum_sq: BigUint = (0..=n).map(|t| binomial(n, t).pow(2)).sum();
    CountFormulas {
        prop1: &four_pow * &nfact * &nfact,
        thm1: &four_pow * &sum_sq * &nfact,
        prop1_patterns: &nfact * &nfact,
        thm1_patterns: &sum_sq * &nfact,
    }
}
