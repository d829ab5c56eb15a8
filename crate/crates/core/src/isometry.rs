//! Exact search for isometries and dilatations between finite spaces.
//!
//! Complete backtracking over index bijections, pruned by sorted
//! distance-row multisets and explored most-constrained-first. Every
//! returned witness is re-verified against its defining identity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::FiniteMetricSpace;

/// A bijection of point indices with d_Y(σx, σx') = d_X(x, x').
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryWitness {
    pub mapping: Vec<usize>,
}

impl IsometryWitness {
    /// Checks the witness invariant on every pair.
    pub fn verify(&self, x: &FiniteMetricSpace, y: &FiniteMetricSpace, tol: f64) -> bool {
        verify_scaled(&self.mapping, x, y, 1.0, tol)
    }
}

/// A bijection together with a scale λ > 0 such that
/// d_Y(σx, σx') = λ d_X(x, x').
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilatationWitness {
    pub mapping: Vec<usize>,
    pub lambda: f64,
}

impl DilatationWitness {
    pub fn verify(&self, x: &FiniteMetricSpace, y: &FiniteMetricSpace, tol: f64) -> bool {
        self.lambda > 0.0 && verify_scaled(&self.mapping, x, y, self.lambda, tol)
    }
}

fn verify_scaled(
    mapping: &[usize],
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    lambda: f64,
    tol: f64,
) -> bool {
    let n = x.len();
    if mapping.len() != n || y.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &img in mapping {
        if img >= n || seen[img] {
            return false;
        }
        seen[img] = true;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (y.dist(mapping[i], mapping[j]) - lambda * x.dist(i, j)).abs() > tol {
                return false;
            }
        }
    }
    true
}

/// Sorted distance row of point `i`, excluding the diagonal.
fn sorted_row(space: &FiniteMetricSpace, i: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..space.len())
        .filter(|&j| j != i)
        .map(|j| space.dist(i, j))
        .collect();
    row.sort_by(|a, b| a.partial_cmp(b).unwrap());
    row
}

fn rows_match(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

/// Complete backtracking search for an isometry X → Y, with optional forced
/// assignments. `scale` rescales X first, so the same search serves
/// dilatations.
fn search(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    scale: f64,
    forced: &[(usize, usize)],
    tol: f64,
) -> Option<Vec<usize>> {
    let n = x.len();
    if y.len() != n {
        return None;
    }
    if n == 0 {
        return Some(Vec::new());
    }
    let rows_x: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r = sorted_row(x, i);
            for v in &mut r {
                *v *= scale;
            }
            r
        })
        .collect();
    let rows_y: Vec<Vec<f64>> = (0..n).map(|i| sorted_row(y, i)).collect();

    // Candidate images filtered by row multisets.
    let mut candidates: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| rows_match(&rows_x[i], &rows_y[j], tol))
                .collect()
        })
        .collect();
    for &(i, img) in forced {
        if !candidates[i].contains(&img) {
            return None;
        }
        candidates[i] = vec![img];
    }
    if candidates.iter().any(|c| c.is_empty()) {
        return None;
    }

    // Most-constrained-first: fewest candidates, index as tie-break.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (candidates[i].len(), i));

    let mut mapping = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn backtrack(
        depth: usize,
        order: &[usize],
        candidates: &[Vec<usize>],
        x: &FiniteMetricSpace,
        y: &FiniteMetricSpace,
        scale: f64,
        tol: f64,
        mapping: &mut [usize],
        used: &mut [bool],
    ) -> bool {
        if depth == order.len() {
            return true;
        }
        let i = order[depth];
        'next: for &j in &candidates[i] {
            if used[j] {
                continue;
            }
            for &k in &order[..depth] {
                if (y.dist(j, mapping[k]) - scale * x.dist(i, k)).abs() > tol {
                    continue 'next;
                }
            }
            mapping[i] = j;
            used[j] = true;
            if backtrack(depth + 1, order, candidates, x, y, scale, tol, mapping, used) {
                return true;
            }
            mapping[i] = usize::MAX;
            used[j] = false;
        }
        false
    }
    if backtrack(
        0,
        &order,
        &candidates,
        x,
        y,
        scale,
        tol,
        &mut mapping,
        &mut used,
    ) {
        Some(mapping)
    } else {
        None
    }
}

/// Finds an isometry X → Y, or None when no bijection preserves distances.
pub fn find_isometry(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    tol: f64,
) -> Option<IsometryWitness> {
    let mapping = search(x, y, 1.0, &[], tol)?;
    let w = IsometryWitness { mapping };
    debug_assert!(w.verify(x, y, tol * (x.len() as f64 + 1.0)));
    Some(w)
}

/// Finds an isometry that additionally maps each forced pair (i, σi).
pub fn find_isometry_fixing(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    forced: &[(usize, usize)],
    tol: f64,
) -> Option<IsometryWitness> {
    let mapping = search(x, y, 1.0, forced, tol)?;
    Some(IsometryWitness { mapping })
}

/// Finds a dilatation X → Y. The scale is forced: a dilatation maps
/// diameter pairs to diameter pairs, so λ = diam(Y)/diam(X).
pub fn find_dilatation(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    tol: f64,
) -> Option<DilatationWitness> {
    if x.len() != y.len() {
        return None;
    }
    if x.len() <= 1 {
        // λ is vacuous for singletons; fix it at 1.
        return Some(DilatationWitness {
            mapping: (0..x.len()).collect(),
            lambda: 1.0,
        });
    }
    let dx = x.diameter();
    let dy = y.diameter();
    if dx <= 0.0 || dy <= 0.0 {
        return None;
    }
    let lambda = dy / dx;
    let mapping = search(x, y, lambda, &[], tol)?;
    Some(DilatationWitness { mapping, lambda })
}

/// Report for the equal-diameter rigidity check: any dilatation between
/// spaces of the same positive diameter must have λ = 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SameDiameterReport {
    pub witness: Option<DilatationWitness>,
    pub lambda_is_one: bool,
}

pub fn same_diameter_dilatation_is_isometry_check(
    x: &FiniteMetricSpace,
    y: &FiniteMetricSpace,
    tol: f64,
) -> Result<SameDiameterReport> {
    let dx = x.diameter();
    let dy = y.diameter();
    if (dx - dy).abs() > tol || dx <= 0.0 {
        return Err(Error::DiameterMismatch { left: dx, right: dy });
    }
    let witness = find_dilatation(x, y, tol);
    let lambda_is_one = witness
        .as_ref()
        .map(|w| (w.lambda - 1.0).abs() <= tol)
        .unwrap_or(true);
    Ok(SameDiameterReport {
        witness,
        lambda_is_one,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::MetricCode;

    fn space(d: &[&[f64]]) -> FiniteMetricSpace {
        let code = MetricCode::new(d.iter().map(|r| r.to_vec()).collect());
        FiniteMetricSpace::from_code(&code, 1e-9).unwrap()
    }

    fn permuted(s: &FiniteMetricSpace, sigma: &[usize]) -> FiniteMetricSpace {
        let n = s.len();
        let mut d = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                d[sigma[i]][sigma[j]] = s.dist(i, j);
            }
        }
        FiniteMetricSpace::from_code(&MetricCode::new(d), 1e-9).unwrap()
    }

    fn triple() -> FiniteMetricSpace {
        space(&[&[0.0, 1.0, 1.8], &[1.0, 0.0, 1.4], &[1.8, 1.4, 0.0]])
    }

    #[test]
    fn identity_isometry() {
        let s = triple();
        let w = find_isometry(&s, &s, 1e-9).unwrap();
        assert!(w.verify(&s, &s, 1e-9));
    }

    #[test]
    fn permuted_space_is_isometric() {
        let s = triple();
        let p = permuted(&s, &[2, 0, 1]);
        let w = find_isometry(&s, &p, 1e-9).unwrap();
        assert!(w.verify(&s, &p, 1e-9));
    }

    #[test]
    fn distinct_multisets_fail_fast() {
        let a = space(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let b = space(&[&[0.0, 2.0], &[2.0, 0.0]]);
        assert!(find_isometry(&a, &b, 1e-9).is_none());
    }

    #[test]
    fn scaled_copy_gives_dilatation() {
        let s = triple();
        let y = s.scale(3.0);
        let w = find_dilatation(&s, &y, 1e-9).unwrap();
        assert!((w.lambda - 3.0).abs() < 1e-9);
        assert!(w.verify(&s, &y, 1e-9));
    }

    #[test]
    fn self_dilatation_is_identity_scale() {
        let s = triple();
        let w = find_dilatation(&s, &s, 1e-9).unwrap();
        assert!((w.lambda - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equilateral_vs_collinear_has_no_dilatation() {
        let eq = space(&[&[0.0, 2.0, 2.0], &[2.0, 0.0, 2.0], &[2.0, 2.0, 0.0]]);
        let line = space(&[&[0.0, 1.0, 2.0], &[1.0, 0.0, 1.0], &[2.0, 1.0, 0.0]]);
        assert!(find_dilatation(&eq, &line, 1e-9).is_none());
    }

    #[test]
    fn singleton_pair_gets_unit_lambda() {
        let one = space(&[&[0.0]]);
        let w = find_dilatation(&one, &one, 1e-9).unwrap();
        assert_eq!(w.lambda, 1.0);
    }

    #[test]
    fn forced_assignment_respected() {
        let s = space(&[&[0.0, 1.0, 1.0], &[1.0, 0.0, 1.0], &[1.0, 1.0, 0.0]]);
        let w = find_isometry_fixing(&s, &s, &[(0, 2)], 1e-9).unwrap();
        assert_eq!(w.mapping[0], 2);
        assert!(w.verify(&s, &s, 1e-9));
    }

    #[test]
    fn same_diameter_check_reports_unit_lambda() {
        let s = triple();
        let p = permuted(&s, &[1, 2, 0]);
        let r = same_diameter_dilatation_is_isometry_check(&s, &p, 1e-9).unwrap();
        assert!(r.lambda_is_one);
        assert!(r.witness.is_some());
    }

    #[test]
    fn same_diameter_check_rejects_scaled_input() {
        let s = triple();
        let y = s.scale(2.0);
        assert!(same_diameter_dilatation_is_isometry_check(&s, &y, 1e-9).is_err());
    }

    /// Brute-force oracle: try all n! bijections.
    fn brute_force(x: &FiniteMetricSpace, y: &FiniteMetricSpace, tol: f64) -> bool {
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, n - 1);
                    out.push(q);
                }
            }
            out
        }
        perms(x.len())
            .into_iter()
            .any(|m| verify_scaled(&m, x, y, 1.0, tol))
    }

    #[test]
    fn agrees_with_brute_force_on_small_spaces() {
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let n = rng.gen_range(2..=5);
            let mut d = vec![vec![0.0; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = (rng.gen_range(4..=8) as f64) / 4.0;
                    d[i][j] = v;
                    d[j][i] = v;
                }
            }
            let a = FiniteMetricSpace::from_code(&MetricCode::new(d), 1e-9).unwrap();
            let b = if rng.gen_bool(0.5) {
                let mut sigma: Vec<usize> = (0..n).collect();
                sigma.shuffle(&mut rng);
                permuted(&a, &sigma)
            } else {
                // Perturb one distance; may or may not stay isometric.
                let mut d2 = a.matrix().clone();
                let i = rng.gen_range(0..n - 1);
                d2[i][i + 1] += 0.25;
                d2[i + 1][i] += 0.25;
                match FiniteMetricSpace::from_code(&MetricCode::new(d2), 1e-9) {
                    Ok(s) => s,
                    Err(_) => a.clone(),
                }
            };
            let found = find_isometry(&a, &b, 1e-9).is_some();
            assert_eq!(found, brute_force(&a, &b, 1e-9));
        }
    }
}
