//! Finite metric spaces, raw codes, and the metric transforms.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::MERGE_THRESHOLD;

/// A square matrix of reals intended as pairwise distances, before any
/// validation. Conditions (1)-(4) are checked by [`validate_code`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCode {
    pub n: usize,
    pub d: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub labels: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub basepoint: Option<usize>,
}

impl MetricCode {
    pub fn new(d: Vec<Vec<f64>>) -> Self {
        MetricCode {
            n: d.len(),
            d,
            labels: None,
            basepoint: None,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// One violated code condition, with the indices where it fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    Malformed { row: usize, expected: usize, got: usize },
    NonFinite { i: usize, j: usize },
    Negative { i: usize, j: usize, value: f64 },
    NonzeroDiagonal { i: usize, value: f64 },
    Asymmetric { i: usize, j: usize, lhs: f64, rhs: f64 },
    Triangle { i: usize, j: usize, k: usize, slack: f64 },
}

impl Violation {
    /// Sort key; triangle violations are ordered worst slack first.
    fn severity(&self) -> f64 {
        match self {
            Violation::Triangle { slack, .. } => *slack,
            _ => f64::INFINITY,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Malformed { row, expected, got } => {
                write!(f, "row {row} has {got} entries, expected {expected}")
            }
            Violation::NonFinite { i, j } => write!(f, "entry ({i},{j}) is not finite"),
            Violation::Negative { i, j, value } => {
                write!(f, "entry ({i},{j}) is negative: {value}")
            }
            Violation::NonzeroDiagonal { i, value } => {
                write!(f, "diagonal entry ({i},{i}) is {value}, not 0")
            }
            Violation::Asymmetric { i, j, lhs, rhs } => {
                write!(f, "asymmetry at ({i},{j}): {lhs} vs {rhs}")
            }
            Violation::Triangle { i, j, k, slack } => {
                write!(f, "triangle violation ({i},{j},{k}): excess {slack}")
            }
        }
    }
}

/// Checks conditions (1)-(4) on a code within `tol`.
///
/// Violations are data, not errors: the list is empty exactly when the code
/// is a valid (pseudo)metric. Triangle violations come first-worst-first.
pub fn validate_code(code: &MetricCode, tol: f64) -> Vec<Violation> {
    let n = code.n;
    let mut out = Vec::new();
    if code.d.len() != n {
        out.push(Violation::Malformed {
            row: usize::MAX,
            expected: n,
            got: code.d.len(),
        });
        return out;
    }
    for (i, row) in code.d.iter().enumerate() {
        if row.len() != n {
            out.push(Violation::Malformed {
                row: i,
                expected: n,
                got: row.len(),
            });
        }
    }
    if !out.is_empty() {
        return out;
    }
    let d = &code.d;
    for i in 0..n {
        if d[i][i].abs() > tol {
            out.push(Violation::NonzeroDiagonal { i, value: d[i][i] });
        }
        for j in 0..n {
            if !d[i][j].is_finite() {
                out.push(Violation::NonFinite { i, j });
            } else if d[i][j] < -tol {
                out.push(Violation::Negative { i, j, value: d[i][j] });
            }
        }
    }
    if !out.is_empty() {
        // Symmetry and triangle checks on non-finite data would be noise.
        if out.iter().any(|v| matches!(v, Violation::NonFinite { .. })) {
            return out;
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (d[i][j] - d[j][i]).abs() > tol {
                out.push(Violation::Asymmetric {
                    i,
                    j,
                    lhs: d[i][j],
                    rhs: d[j][i],
                });
            }
        }
    }
    let mut triangles = Vec::new();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let slack = d[i][k] - d[i][j] - d[j][k];
                if slack > tol {
                    triangles.push(Violation::Triangle { i, j, k, slack });
                }
            }
        }
    }
    triangles.sort_by(|a, b| b.severity().partial_cmp(&a.severity()).unwrap());
    out.extend(triangles);
    out
}

/// A validated finite metric space: symmetric, zero diagonal, strictly
/// positive off-diagonal, triangle inequality.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteMetricSpace {
    d: Vec<Vec<f64>>,
    labels: Option<Vec<String>>,
}

impl FiniteMetricSpace {
    /// Builds a space from a code that must already be strictly positive off
    /// the diagonal (use [`quotient_zero`] first otherwise).
    pub fn from_code(code: &MetricCode, tol: f64) -> Result<Self> {
        let violations = validate_code(code, tol);
        if !violations.is_empty() {
            return Err(Error::InvalidCode(violations));
        }
        for i in 0..code.n {
            for j in 0..code.n {
                if i != j && code.d[i][j] < MERGE_THRESHOLD {
                    return Err(Error::InvalidCode(vec![Violation::NonzeroDiagonal {
                        i,
                        value: code.d[i][j],
                    }]));
                }
            }
        }
        Ok(FiniteMetricSpace {
            d: code.d.clone(),
            labels: code.labels.clone(),
        })
    }

    /// Constructs a space from an already-symmetric distance matrix,
    /// panicking on invalid input. For matrices built by code in this crate.
    pub(crate) fn from_matrix_unchecked(d: Vec<Vec<f64>>) -> Self {
        FiniteMetricSpace { d, labels: None }
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.d[i][j]
    }

    pub fn matrix(&self) -> &Vec<Vec<f64>> {
        &self.d
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn to_code(&self) -> MetricCode {
        MetricCode {
            n: self.len(),
            d: self.d.clone(),
            labels: self.labels.clone(),
            basepoint: None,
        }
    }

    /// Largest pairwise distance; 0 for a one-point space.
    pub fn diameter(&self) -> f64 {
        let mut m: f64 = 0.0;
        for row in &self.d {
            for &v in row {
                m = m.max(v);
            }
        }
        m
    }

    /// Smallest off-diagonal distance; +inf for a one-point space.
    pub fn min_distance(&self) -> f64 {
        let mut m = f64::INFINITY;
        for i in 0..self.len() {
            for j in 0..self.len() {
                if i != j {
                    m = m.min(self.d[i][j]);
                }
            }
        }
        m
    }

    /// The subspace induced by `points` (in the given order).
    pub fn subspace(&self, points: &[usize]) -> FiniteMetricSpace {
        let d = points
            .iter()
            .map(|&i| points.iter().map(|&j| self.d[i][j]).collect())
            .collect();
        FiniteMetricSpace { d, labels: None }
    }

    /// Rescales every distance by `factor > 0`.
    pub fn scale(&self, factor: f64) -> FiniteMetricSpace {
        let d = self
            .d
            .iter()
            .map(|row| row.iter().map(|&v| v * factor).collect())
            .collect();
        FiniteMetricSpace {
            d,
            labels: self.labels.clone(),
        }
    }
}

/// A finite metric space with a distinguished basepoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointedSpace {
    pub space: FiniteMetricSpace,
    pub basepoint: usize,
}

impl PointedSpace {
    pub fn new(space: FiniteMetricSpace, basepoint: usize) -> Result<Self> {
        if basepoint >= space.len() {
            return Err(Error::BasepointOutOfRange {
                index: basepoint,
                n: space.len(),
            });
        }
        Ok(PointedSpace { space, basepoint })
    }
}

/// Merges zero-distance classes of a valid code into single points.
///
/// Distances below [`MERGE_THRESHOLD`] are treated as exact zeros; the
/// representative of each class is its smallest index.
pub fn quotient_zero(code: &MetricCode, tol: f64) -> Result<FiniteMetricSpace> {
    let violations = validate_code(code, tol);
    if !violations.is_empty() {
        return Err(Error::InvalidCode(violations));
    }
    let n = code.n;
    let mut class = vec![usize::MAX; n];
    let mut reps: Vec<usize> = Vec::new();
    for i in 0..n {
        // By the triangle inequality zero-distance is transitive, so
        // matching against representatives is enough.
        let found = reps
            .iter()
            .position(|&r| code.d[r][i].abs() < MERGE_THRESHOLD);
        match found {
            Some(c) => class[i] = c,
            None => {
                class[i] = reps.len();
                reps.push(i);
            }
        }
    }
    let d: Vec<Vec<f64>> = reps
        .iter()
        .map(|&r| {
            reps.iter()
                .map(|&s| if r == s { 0.0 } else { code.d[r][s] })
                .collect()
        })
        .collect();
    let labels = code
        .labels
        .as_ref()
        .map(|ls| reps.iter().map(|&r| ls[r].clone()).collect());
    Ok(FiniteMetricSpace { d, labels })
}

/// Replaces every distance t by t/(1+t); the result has diameter < 1.
pub fn bound_transform(space: &FiniteMetricSpace) -> FiniteMetricSpace {
    let d = space
        .d
        .iter()
        .map(|row| row.iter().map(|&t| t / (1.0 + t)).collect())
        .collect();
    FiniteMetricSpace {
        d,
        labels: space.labels.clone(),
    }
}

/// Replaces every distance t by t^alpha for alpha in (0,1).
pub fn snowflake(space: &FiniteMetricSpace, alpha: f64) -> Result<FiniteMetricSpace> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::AlphaOutOfRange { alpha });
    }
    let d = space
        .d
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &t)| if i == j { 0.0 } else { t.powf(alpha) })
                .collect()
        })
        .collect();
    Ok(FiniteMetricSpace {
        d,
        labels: space.labels.clone(),
    })
}

/// Index bookkeeping for [`normalize_diameter_one`]: the two gadget points
/// are appended after the original ones.
pub const GADGET_POINTS: usize = 2;

/// Forces diameter exactly 1 by adjoining a pair {u,v} with d(u,v)=1 and
/// d(u,x)=d(v,x)=1/2 for every original point x.
///
/// Requires diameter < 1 (apply [`bound_transform`] first). The pair {u,v}
/// is then the unique pair at distance 1, which makes the gadget
/// recognizable and the construction isometry-faithful.
pub fn normalize_diameter_one(space: &FiniteMetricSpace) -> Result<FiniteMetricSpace> {
    if space.is_empty() {
        return Err(Error::EmptySpace);
    }
    let diam = space.diameter();
    if diam >= 1.0 {
        return Err(Error::DiameterNotBelowOne { diameter: diam });
    }
    let n = space.len();
    let mut d = vec![vec![0.0; n + 2]; n + 2];
    for i in 0..n {
        for j in 0..n {
            d[i][j] = space.d[i][j];
        }
        d[i][n] = 0.5;
        d[n][i] = 0.5;
        d[i][n + 1] = 0.5;
        d[n + 1][i] = 0.5;
    }
    d[n][n + 1] = 1.0;
    d[n + 1][n] = 1.0;
    Ok(FiniteMetricSpace { d, labels: None })
}

/// Adjoins a ray t_1..t_k with d(t_j, x) = j + 2 for original x and
/// d(t_j, t_l) = |j - l|, turning a diameter-≤1 space into one whose
/// diameter grows with k.
pub fn psi_unbounded(space: &FiniteMetricSpace, k: usize) -> Result<FiniteMetricSpace> {
    if space.is_empty() {
        return Err(Error::EmptySpace);
    }
    if k == 0 {
        return Err(Error::RayLengthZero { k });
    }
    let diam = space.diameter();
    if diam > 1.0 + 1e-9 {
        return Err(Error::DiameterExceedsOne { diameter: diam });
    }
    let n = space.len();
    let mut d = vec![vec![0.0; n + k]; n + k];
    for i in 0..n {
        for j in 0..n {
            d[i][j] = space.d[i][j];
        }
        for j in 0..k {
            let v = (j + 3) as f64; // t_1 sits at distance 3 from the core
            d[i][n + j] = v;
            d[n + j][i] = v;
        }
    }
    for j in 0..k {
        for l in 0..k {
            d[n + j][n + l] = (j as f64 - l as f64).abs();
        }
    }
    Ok(FiniteMetricSpace { d, labels: None })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(d: &[&[f64]]) -> MetricCode {
        MetricCode::new(d.iter().map(|r| r.to_vec()).collect())
    }

    #[test]
    fn two_point_code_is_valid() {
        let c = code(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(validate_code(&c, 1e-9).is_empty());
    }

    #[test]
    fn asymmetry_is_reported() {
        let c = code(&[&[0.0, 1.0], &[2.0, 0.0]]);
        let v = validate_code(&c, 1e-9);
        assert!(v
            .iter()
            .any(|x| matches!(x, Violation::Asymmetric { i: 0, j: 1, .. })));
    }

    #[test]
    fn triangle_violation_is_reported() {
        let c = code(&[&[0.0, 1.0, 3.0], &[1.0, 0.0, 1.0], &[3.0, 1.0, 0.0]]);
        let v = validate_code(&c, 1e-9);
        let worst = v.first().unwrap();
        match worst {
            Violation::Triangle { i, j, k, slack } => {
                assert_eq!((*i, *j, *k), (0, 1, 2));
                assert!((slack - 1.0).abs() < 1e-12);
            }
            other => panic!("expected triangle violation, got {other:?}"),
        }
    }

    #[test]
    fn quotient_merges_zero_classes() {
        let c = code(&[
            &[0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0],
            &[1.0, 1.0, 0.0],
        ]);
        let s = quotient_zero(&c, 1e-9).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.dist(0, 1) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quotient_identity_on_distinct_points() {
        let c = code(&[&[0.0, 1.0, 2.0], &[1.0, 0.0, 1.5], &[2.0, 1.5, 0.0]]);
        let s = quotient_zero(&c, 1e-9).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.matrix(), &c.d);
    }

    #[test]
    fn quotient_collapses_to_single_point() {
        let c = code(&[&[0.0, 0.0], &[0.0, 0.0]]);
        let s = quotient_zero(&c, 1e-9).unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn quotient_is_idempotent() {
        let c = code(&[
            &[0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0],
            &[1.0, 1.0, 0.0],
        ]);
        let s = quotient_zero(&c, 1e-9).unwrap();
        let again = quotient_zero(&s.to_code(), 1e-9).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn bound_transform_halves_unit_distance() {
        let c = code(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let s = FiniteMetricSpace::from_code(&c, 1e-9).unwrap();
        let b = bound_transform(&s);
        assert!((b.dist(0, 1) - 0.5).abs() < 1e-12);
        assert!((b.dist(0, 0)).abs() < 1e-12);
    }

    #[test]
    fn snowflake_takes_square_roots() {
        let c = code(&[&[0.0, 4.0], &[4.0, 0.0]]);
        let s = FiniteMetricSpace::from_code(&c, 1e-9).unwrap();
        let f = snowflake(&s, 0.5).unwrap();
        assert!((f.dist(0, 1) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn snowflake_collinear_triple_becomes_strict() {
        let c = code(&[&[0.0, 1.0, 2.0], &[1.0, 0.0, 1.0], &[2.0, 1.0, 0.0]]);
        let s = FiniteMetricSpace::from_code(&c, 1e-9).unwrap();
        let f = snowflake(&s, 0.5).unwrap();
        assert!((f.dist(0, 2) - 2f64.sqrt()).abs() < 1e-12);
        assert!(f.dist(0, 2) < f.dist(0, 1) + f.dist(1, 2) - 1e-6);
        assert!(validate_code(&f.to_code(), 1e-9).is_empty());
    }

    #[test]
    fn snowflake_rejects_bad_alpha() {
        let c = code(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let s = FiniteMetricSpace::from_code(&c, 1e-9).unwrap();
        assert!(snowflake(&s, 1.0).is_err());
        assert!(snowflake(&s, 0.0).is_err());
    }

    #[test]
    fn diameter_values() {
        let c = code(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let s = FiniteMetricSpace::from_code(&c, 1e-9).unwrap();
        assert_eq!(s.diameter(), 1.0);
        let one = FiniteMetricSpace::from_matrix_unchecked(vec![vec![0.0]]);
        assert_eq!(one.diameter(), 0.0);
    }

    #[test]
    fn gadget_on_singleton() {
        let one = FiniteMetricSpace::from_matrix_unchecked(vec![vec![0.0]]);
        let g = normalize_diameter_one(&one).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.diameter(), 1.0);
        assert!((g.dist(0, 1) - 0.5).abs() < 1e-12);
        assert!((g.dist(0, 2) - 0.5).abs() < 1e-12);
        assert!((g.dist(1, 2) - 1.0).abs() < 1e-12);
        assert!(validate_code(&g.to_code(), 1e-9).is_empty());
    }

    #[test]
    fn gadget_rejects_large_diameter() {
        let c = code(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let s = FiniteMetricSpace::from_code(&c, 1e-9).unwrap();
        assert!(normalize_diameter_one(&s).is_err());
    }

    #[test]
    fn psi_on_singleton() {
        let one = FiniteMetricSpace::from_matrix_unchecked(vec![vec![0.0]]);
        let p = psi_unbounded(&one, 2).unwrap();
        assert_eq!(p.len(), 3);
        assert!((p.dist(0, 1) - 3.0).abs() < 1e-12);
        assert!((p.dist(0, 2) - 4.0).abs() < 1e-12);
        assert!((p.dist(1, 2) - 1.0).abs() < 1e-12);
        assert!(validate_code(&p.to_code(), 1e-9).is_empty());
    }

    #[test]
    fn snowflake_composes() {
        let c = code(&[&[0.0, 3.0, 2.5], &[3.0, 0.0, 1.5], &[2.5, 1.5, 0.0]]);
        let s = FiniteMetricSpace::from_code(&c, 1e-9).unwrap();
        let twice = snowflake(&snowflake(&s, 0.5).unwrap(), 0.5).unwrap();
        let once = snowflake(&s, 0.25).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((twice.dist(i, j) - once.dist(i, j)).abs() < 1e-12);
            }
        }
    }
}
