//! Small-scale independent oracles.
//!
//! These deliberately share no code with the production solvers: the
//! transport oracle enumerates vertex plans recursively, and the extreme
//! point oracle does exact rational vertex enumeration of the polyhedral
//! unit ball via Caratheodory subsets and Gaussian elimination. Both are
//! exponential and meant for supports of at most four or five points.

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::molecule::Molecule;
use crate::scalar::Scalar;
use crate::space::FiniteMetricSpace;

fn rat(v: f64) -> BigRational {
    <BigRational as Scalar>::from_f64(v)
}

fn rzero() -> BigRational {
    <BigRational as num_traits::Zero>::zero()
}

fn rone() -> BigRational {
    <BigRational as num_traits::One>::one()
}

/// Minimal transport cost by exhaustive enumeration of vertex plans.
///
/// Every vertex of the transportation polytope arises from some order of
/// saturating moves, so recursing over all (source, sink, saturate) choices
/// visits every vertex.
pub fn exhaustive_transport(m: &Molecule, space: &FiniteMetricSpace) -> BigRational {
    let mut sources: Vec<(usize, BigRational)> = Vec::new();
    let mut sinks: Vec<(usize, BigRational)> = Vec::new();
    for (x, c) in m.entries() {
        if c > 0.0 {
            sources.push((x, rat(c)));
        } else if c < 0.0 {
            sinks.push((x, rat(-c)));
        }
    }
    if sources.is_empty() || sinks.is_empty() {
        return rzero();
    }
    // Balance exactly (the zero-sum invariant allows a 1e-12 slack).
    let total_a: BigRational = sources.iter().map(|(_, a)| a.clone()).sum();
    let total_b: BigRational = sinks.iter().map(|(_, b)| b.clone()).sum();
    let last = sinks.len() - 1;
    sinks[last].1 = sinks[last].1.clone() + total_a - total_b;

    let costs: Vec<Vec<BigRational>> = sources
        .iter()
        .map(|&(p, _)| sinks.iter().map(|&(q, _)| rat(space.dist(p, q))).collect())
        .collect();

    fn recurse(
        a: &mut Vec<BigRational>,
        b: &mut Vec<BigRational>,
        costs: &[Vec<BigRational>],
        spent: BigRational,
        best: &mut Option<BigRational>,
    ) {
        let live_a: Vec<usize> = (0..a.len()).filter(|&i| a[i].is_positive()).collect();
        if live_a.is_empty() {
            match best {
                Some(v) if *v <= spent => {}
                _ => *best = Some(spent),
            }
            return;
        }
        if let Some(v) = best {
            if spent >= *v {
                return; // cannot improve: costs are nonnegative
            }
        }
        let live_b: Vec<usize> = (0..b.len()).filter(|&j| b[j].is_positive()).collect();
        for &i in &live_a {
            for &j in &live_b {
                let flow = if a[i] < b[j] { a[i].clone() } else { b[j].clone() };
                let old_a = a[i].clone();
                let old_b = b[j].clone();
                a[i] = a[i].clone() - flow.clone();
                b[j] = b[j].clone() - flow.clone();
                recurse(
                    a,
                    b,
                    costs,
                    spent.clone() + flow * costs[i][j].clone(),
                    best,
                );
                a[i] = old_a;
                b[j] = old_b;
            }
        }
    }

    let mut a: Vec<BigRational> = sources.into_iter().map(|(_, v)| v).collect();
    let mut b: Vec<BigRational> = sinks.into_iter().map(|(_, v)| v).collect();
    let mut best = None;
    recurse(&mut a, &mut b, &costs, rzero(), &mut best);
    best.expect("at least one plan exists")
}

/// Solves A λ = rhs exactly; returns None when inconsistent or rank-deficient.
fn solve_exact(mut a: Vec<Vec<BigRational>>, mut rhs: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let nrows = a.len();
    let ncols = if nrows == 0 { 0 } else { a[0].len() };
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut row = 0;
    for col in 0..ncols {
        let piv = (row..nrows).find(|&r| !a[r][col].is_zero())?;
        a.swap(row, piv);
        rhs.swap(row, piv);
        let p = a[row][col].clone();
        for c in col..ncols {
            a[row][c] = a[row][c].clone() / p.clone();
        }
        rhs[row] = rhs[row].clone() / p;
        for r in 0..nrows {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in col..ncols {
                    let delta = f.clone() * a[row][c].clone();
                    a[r][c] = a[r][c].clone() - delta;
                }
                rhs[r] = rhs[r].clone() - f * rhs[row].clone();
            }
        }
        pivot_of_col[col] = Some(row);
        row += 1;
        if row == nrows {
            break;
        }
    }
    // Any remaining rows must be all-zero with zero rhs.
    for r in row..nrows {
        if a[r].iter().any(|v| !v.is_zero()) {
            return None; // rank-deficient handling above bails earlier
        }
        if !rhs[r].is_zero() {
            return None;
        }
    }
    if pivot_of_col.iter().any(|p| p.is_none()) {
        return None;
    }
    let mut sol = vec![rzero(); ncols];
    for (col, piv) in pivot_of_col.iter().enumerate() {
        sol[col] = rhs[piv.unwrap()].clone();
    }
    Some(sol)
}

/// Is `v` in the convex hull of `others`? Exact, via Caratheodory subsets.
fn in_convex_hull(v: &[BigRational], others: &[Vec<BigRational>], max_subset: usize) -> bool {
    let k_max = max_subset.min(others.len());
    let dim = v.len();
    let idx: Vec<usize> = (0..others.len()).collect();
    let mut subset = Vec::new();
    fn rec(
        start: usize,
        k: usize,
        idx: &[usize],
        subset: &mut Vec<usize>,
        v: &[BigRational],
        others: &[Vec<BigRational>],
        dim: usize,
    ) -> bool {
        if subset.len() == k {
            // Solve sum λ_c c = v, sum λ = 1.
            let mut a = Vec::with_capacity(dim + 1);
            for d in 0..dim {
                a.push(subset.iter().map(|&c| others[c][d].clone()).collect());
            }
            a.push(vec![rone(); subset.len()]);
            let mut rhs: Vec<BigRational> = v.to_vec();
            rhs.push(rone());
            if let Some(lambda) = solve_exact(a, rhs) {
                if lambda.iter().all(|l| !l.is_negative()) {
                    return true;
                }
            }
            return false;
        }
        for pos in start..idx.len() {
            subset.push(idx[pos]);
            if rec(pos + 1, k, idx, subset, v, others, dim) {
                return true;
            }
            subset.pop();
        }
        false
    }
    for k in 1..=k_max {
        if rec(0, k, &idx, &mut subset, v, others, dim) {
            return true;
        }
    }
    false
}

/// Exact extreme-point oracle: the unit ball of F(X) is the convex hull of
/// the normalized elementary molecules ±m_pq/d(p,q); the molecule for
/// (p, q) is extreme iff it lies outside the hull of the other candidates.
///
/// Exponential in the candidate count; intended for spaces of at most four
/// points.
pub fn ball_vertex_oracle(space: &FiniteMetricSpace, p: usize, q: usize) -> bool {
    let n = space.len();
    assert!(p < n && q < n && p != q);
    let mut candidates: Vec<(usize, usize, f64, Vec<BigRational>)> = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            for sign in [1.0, -1.0] {
                let mut vec = vec![rzero(); n];
                let inv_d = rone() / rat(space.dist(a, b));
                vec[a] = rat(sign) * inv_d.clone();
                vec[b] = -rat(sign) * inv_d;
                candidates.push((a, b, sign, vec));
            }
        }
    }
    let target: Vec<BigRational> = candidates
        .iter()
        .find(|&&(a, b, s, _)| a == p.min(q) && b == p.max(q) && {
            // Orientation: m_pq has +1/d at p.
            (p < q && s == 1.0) || (p > q && s == -1.0)
        })
        .map(|(_, _, _, v)| v.clone())
        .unwrap();
    let others: Vec<Vec<BigRational>> = candidates
        .iter()
        .filter(|(_, _, _, v)| *v != target)
        .map(|(_, _, _, v)| v.clone())
        .collect();
    // Caratheodory bound: molecules live in a hyperplane of dimension n-1.
    !in_convex_hull(&target, &others, n)
}
