//! A dense two-phase simplex over any [`Scalar`].
//!
//! Small by design: the programs in this crate have at most a few hundred
//! rows. Pivoting starts with Dantzig's rule and falls back to Bland's rule
//! after an iteration threshold, so runs terminate and are deterministic.

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

/// maximize objective . x  subject to the rows, x >= 0.
#[derive(Debug, Clone)]
pub struct LinearProgram<S> {
    pub objective: Vec<S>,
    pub rows: Vec<(Vec<S>, Relation, S)>,
}

#[derive(Debug, Clone)]
pub enum LpOutcome<S> {
    Optimal { value: S, solution: Vec<S> },
    Infeasible,
    Unbounded,
}

struct Tableau<S> {
    rows: Vec<Vec<S>>, // coefficient part, canonical w.r.t. basis
    rhs: Vec<S>,
    basis: Vec<usize>,
    ncols: usize,
}

impl<S: Scalar> Tableau<S> {
    fn pivot(&mut self, row: usize, col: usize, obj: &mut Vec<S>, obj_val: &mut S) {
        let piv = self.rows[row][col].clone();
        for v in self.rows[row].iter_mut() {
            *v = v.clone() / piv.clone();
        }
        self.rhs[row] = self.rhs[row].clone() / piv.clone();
        for r in 0..self.rows.len() {
            if r == row {
                continue;
            }
            let factor = self.rows[r][col].clone();
            if factor == S::zero() {
                continue;
            }
            for c in 0..self.ncols {
                let delta = factor.clone() * self.rows[row][c].clone();
                self.rows[r][c] = self.rows[r][c].clone() - delta;
            }
            self.rhs[r] = self.rhs[r].clone() - factor * self.rhs[row].clone();
        }
        let factor = obj[col].clone();
        if factor != S::zero() {
            for c in 0..self.ncols {
                let delta = factor.clone() * self.rows[row][c].clone();
                obj[c] = obj[c].clone() - delta;
            }
            *obj_val = obj_val.clone() + factor * self.rhs[row].clone();
        }
        self.basis[row] = col;
    }

    /// Runs simplex on the current objective row (reduced costs). Returns
    /// false if unbounded. `allowed` masks columns that may enter.
    fn optimize(&mut self, obj: &mut Vec<S>, obj_val: &mut S, allowed: &[bool]) -> bool {
        let bland_after = 200 + 4 * (self.rows.len() + self.ncols);
        let mut iter = 0usize;
        loop {
            iter += 1;
            let use_bland = iter > bland_after;
            let mut entering: Option<usize> = None;
            let mut best = S::eps();
            for j in 0..self.ncols {
                if !allowed[j] {
                    continue;
                }
                if obj[j].is_positive_eps() {
                    if use_bland {
                        entering = Some(j);
                        break;
                    }
                    if obj[j] > best {
                        best = obj[j].clone();
                        entering = Some(j);
                    }
                }
            }
            let Some(col) = entering else {
                return true;
            };
            let mut leaving: Option<usize> = None;
            let mut best_ratio: Option<S> = None;
            for r in 0..self.rows.len() {
                if self.rows[r][col].is_positive_eps() {
                    let ratio = self.rhs[r].clone() / self.rows[r][col].clone();
                    let better = match &best_ratio {
                        None => true,
                        Some(b) => {
                            ratio < *b
                                || (ratio == *b
                                    && self.basis[r] < self.basis[leaving.unwrap()])
                        }
                    };
                    if better {
                        best_ratio = Some(ratio);
                        leaving = Some(r);
                    }
                }
            }
            let Some(row) = leaving else {
                return false;
            };
            self.pivot(row, col, obj, obj_val);
        }
    }
}

/// Solves the program; deterministic for fixed input.
pub fn solve<S: Scalar>(lp: &LinearProgram<S>) -> LpOutcome<S> {
    let nvars = lp.objective.len();
    let m = lp.rows.len();

    // Normalize rows to nonnegative rhs; a flipped Le becomes a Ge.
    #[derive(Clone, Copy, PartialEq)]
    enum Kind {
        Le,
        Ge,
        Eq,
    }
    let mut norm: Vec<(Vec<S>, Kind, S)> = Vec::with_capacity(m);
    for (a, rel, b) in &lp.rows {
        assert_eq!(a.len(), nvars, "row length mismatch");
        if *b < S::zero() {
            let a = a.iter().map(|v| -v.clone()).collect();
            let kind = match rel {
                Relation::Le => Kind::Ge,
                Relation::Eq => Kind::Eq,
            };
            norm.push((a, kind, -b.clone()));
        } else {
            let kind = match rel {
                Relation::Le => Kind::Le,
                Relation::Eq => Kind::Eq,
            };
            norm.push((a.clone(), kind, b.clone()));
        }
    }

    let n_slack = norm
        .iter()
        .filter(|(_, k, _)| matches!(k, Kind::Le | Kind::Ge))
        .count();
    let n_art = norm
        .iter()
        .filter(|(_, k, _)| matches!(k, Kind::Ge | Kind::Eq))
        .count();
    let ncols = nvars + n_slack + n_art;

    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut slack_at = nvars;
    let mut art_at = nvars + n_slack;
    let mut art_cols = Vec::new();
    for (a, kind, b) in &norm {
        let mut row = vec![S::zero(); ncols];
        row[..nvars].clone_from_slice(a);
        match kind {
            Kind::Le => {
                row[slack_at] = S::one();
                basis.push(slack_at);
                slack_at += 1;
            }
            Kind::Ge => {
                row[slack_at] = -S::one();
                slack_at += 1;
                row[art_at] = S::one();
                basis.push(art_at);
                art_cols.push(art_at);
                art_at += 1;
            }
            Kind::Eq => {
                row[art_at] = S::one();
                basis.push(art_at);
                art_cols.push(art_at);
                art_at += 1;
            }
        }
        rows.push(row);
        rhs.push(b.clone());
    }

    let mut tableau = Tableau {
        rows,
        rhs,
        basis,
        ncols,
    };
    let is_art = {
        let mut v = vec![false; ncols];
        for &c in &art_cols {
            v[c] = true;
        }
        v
    };

    // Phase 1: maximize -(sum of artificials).
    if !art_cols.is_empty() {
        let mut obj = vec![S::zero(); ncols];
        let mut obj_val = S::zero();
        for r in 0..m {
            if is_art[tableau.basis[r]] {
                // Price out the basic artificial (cost -1).
                for c in 0..ncols {
                    obj[c] = obj[c].clone() + tableau.rows[r][c].clone();
                }
                obj_val = obj_val.clone() - tableau.rhs[r].clone();
            }
        }
        for &c in &art_cols {
            obj[c] = obj[c].clone() - S::one();
        }
        let allowed = vec![true; ncols];
        if !tableau.optimize(&mut obj, &mut obj_val, &allowed) {
            // Phase-1 objective is bounded above by 0; cannot happen.
            return LpOutcome::Infeasible;
        }
        if obj_val.is_negative_eps() {
            return LpOutcome::Infeasible;
        }
        // Drive remaining artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < tableau.rows.len() {
            if is_art[tableau.basis[r]] {
                let col = (0..ncols)
                    .find(|&c| !is_art[c] && tableau.rows[r][c].clone().abs().is_positive_eps());
                match col {
                    Some(c) => {
                        let mut dummy = vec![S::zero(); ncols];
                        let mut dummy_val = S::zero();
                        tableau.pivot(r, c, &mut dummy, &mut dummy_val);
                        r += 1;
                    }
                    None => {
                        tableau.rows.remove(r);
                        tableau.rhs.remove(r);
                        tableau.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }

    // Phase 2 on the real objective.
    let mut obj = vec![S::zero(); ncols];
    obj[..nvars].clone_from_slice(&lp.objective);
    let mut obj_val = S::zero();
    for r in 0..tableau.rows.len() {
        let b = tableau.basis[r];
        let cost = obj[b].clone();
        if cost != S::zero() {
            for c in 0..ncols {
                let delta = cost.clone() * tableau.rows[r][c].clone();
                obj[c] = obj[c].clone() - delta;
            }
            obj_val = obj_val.clone() + cost * tableau.rhs[r].clone();
        }
    }
    let allowed: Vec<bool> = (0..ncols).map(|c| !is_art[c]).collect();
    if !tableau.optimize(&mut obj, &mut obj_val, &allowed) {
        return LpOutcome::Unbounded;
    }

    let mut solution = vec![S::zero(); nvars];
    for r in 0..tableau.rows.len() {
        let b = tableau.basis[r];
        if b < nvars {
            solution[b] = tableau.rhs[r].clone();
        }
    }
    LpOutcome::Optimal {
        value: obj_val,
        solution,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn simple_bounded_max() {
        // max x + y, x + y <= 4, x <= 3
        let lp = LinearProgram {
            objective: vec![1.0, 1.0],
            rows: vec![
                (vec![1.0, 1.0], Relation::Le, 4.0),
                (vec![1.0, 0.0], Relation::Le, 3.0),
            ],
        };
        match solve(&lp) {
            LpOutcome::Optimal { value, .. } => assert!((value - 4.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equality_constraints() {
        // max x, x + y = 2, x - y <= 1 -> x = 1.5
        let lp = LinearProgram {
            objective: vec![1.0, 0.0],
            rows: vec![
                (vec![1.0, 1.0], Relation::Eq, 2.0),
                (vec![1.0, -1.0], Relation::Le, 1.0),
            ],
        };
        match solve(&lp) {
            LpOutcome::Optimal { value, solution } => {
                assert!((value - 1.5).abs() < 1e-9);
                assert!((solution[1] - 0.5).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_detected() {
        // x <= 1, x >= 2 (as -x <= -2)
        let lp = LinearProgram {
            objective: vec![1.0],
            rows: vec![
                (vec![1.0], Relation::Le, 1.0),
                (vec![-1.0], Relation::Le, -2.0),
            ],
        };
        assert!(matches!(solve(&lp), LpOutcome::Infeasible));
    }

    #[test]
    fn unbounded_detected() {
        let lp = LinearProgram {
            objective: vec![1.0],
            rows: vec![(vec![-1.0], Relation::Le, 0.0)],
        };
        assert!(matches!(solve(&lp), LpOutcome::Unbounded));
    }

    #[test]
    fn redundant_equalities_are_handled() {
        // x + y = 2 stated twice, max x with x <= 1
        let lp = LinearProgram {
            objective: vec![1.0, 0.0],
            rows: vec![
                (vec![1.0, 1.0], Relation::Eq, 2.0),
                (vec![1.0, 1.0], Relation::Eq, 2.0),
                (vec![1.0, 0.0], Relation::Le, 1.0),
            ],
        };
        match solve(&lp) {
            LpOutcome::Optimal { value, .. } => assert!((value - 1.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rational_mode_is_exact() {
        let lp = LinearProgram {
            objective: vec![rat(1, 1), rat(1, 1)],
            rows: vec![
                (vec![rat(1, 1), rat(2, 1)], Relation::Le, rat(3, 1)),
                (vec![rat(2, 1), rat(1, 1)], Relation::Le, rat(3, 1)),
            ],
        };
        match solve(&lp) {
            LpOutcome::Optimal { value, .. } => assert_eq!(value, rat(2, 1)),
            other => panic!("{other:?}"),
        }
    }
}
