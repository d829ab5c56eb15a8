//! Transportation simplex for the primal norm.
//!
//! Solves min Σ x_ij c_ij with row sums fixed to the supplies and column
//! sums to the demands. Northwest-corner start, MODI duals on the basis
//! tree, Bland's entering/leaving rule throughout (deterministic, no
//! cycling).

use crate::scalar::Scalar;

/// Optimal flows for a balanced transportation instance.
///
/// `supplies` and `demands` must be positive and have equal totals; `cost`
/// gives c(i, j) for source i and sink j. Returns the optimal value and the
/// strictly positive flows.
pub fn solve_transportation<S: Scalar>(
    supplies: &[S],
    demands: &[S],
    cost: impl Fn(usize, usize) -> S,
) -> (S, Vec<(usize, usize, S)>) {
    let s = supplies.len();
    let t = demands.len();
    if s == 0 || t == 0 {
        return (S::zero(), Vec::new());
    }
    let c: Vec<Vec<S>> = (0..s)
        .map(|i| (0..t).map(|j| cost(i, j)).collect())
        .collect();

    let mut x = vec![vec![S::zero(); t]; s];
    let mut basic = vec![vec![false; t]; s];

    // Northwest-corner initial basis: s + t - 1 cells forming a tree.
    {
        let mut a: Vec<S> = supplies.to_vec();
        let mut b: Vec<S> = demands.to_vec();
        let (mut i, mut j) = (0, 0);
        loop {
            let flow = if a[i] < b[j] { a[i].clone() } else { b[j].clone() };
            x[i][j] = flow.clone();
            basic[i][j] = true;
            a[i] = a[i].clone() - flow.clone();
            b[j] = b[j].clone() - flow;
            if i + 1 == s && j + 1 == t {
                break;
            }
            // At a boundary row or column the other index must advance;
            // rounding residue from inexact subtraction is treated as zero.
            if i + 1 == s {
                j += 1;
            } else if j + 1 == t {
                i += 1;
            } else if a[i] < b[j] {
                i += 1;
            } else {
                j += 1;
            }
        }
    }

    loop {
        // MODI duals u, v with u[i] + v[j] = c[i][j] on basic cells.
        let mut u: Vec<Option<S>> = vec![None; s];
        let mut v: Vec<Option<S>> = vec![None; t];
        u[0] = Some(S::zero());
        let mut queue = vec![(true, 0usize)];
        while let Some((is_row, k)) = queue.pop() {
            if is_row {
                for j in 0..t {
                    if basic[k][j] && v[j].is_none() {
                        v[j] = Some(c[k][j].clone() - u[k].clone().unwrap());
                        queue.push((false, j));
                    }
                }
            } else {
                for i in 0..s {
                    if basic[i][k] && u[i].is_none() {
                        u[i] = Some(c[i][k].clone() - v[k].clone().unwrap());
                        queue.push((true, i));
                    }
                }
            }
        }
        let u: Vec<S> = u.into_iter().map(|o| o.expect("basis is a tree")).collect();
        let v: Vec<S> = v.into_iter().map(|o| o.expect("basis is a tree")).collect();

        // Bland entering rule: first cell with negative reduced cost.
        let mut entering = None;
        'scan: for i in 0..s {
            for j in 0..t {
                if !basic[i][j] {
                    let rc = c[i][j].clone() - u[i].clone() - v[j].clone();
                    if rc.is_negative_eps() {
                        entering = Some((i, j));
                        break 'scan;
                    }
                }
            }
        }
        let Some((ei, ej)) = entering else {
            break;
        };

        // Unique cycle: path in the basis tree from sink ej back to source ei.
        let path = tree_path(&basic, s, t, ej, ei);
        // Signs along the path starting at the entering sink: -, +, -, ...
        let mut minus_cells: Vec<(usize, usize)> = Vec::new();
        let mut plus_cells: Vec<(usize, usize)> = Vec::new();
        for (k, &(i, j)) in path.iter().enumerate() {
            if k % 2 == 0 {
                minus_cells.push((i, j));
            } else {
                plus_cells.push((i, j));
            }
        }
        let mut theta: Option<S> = None;
        let mut leaving = None;
        for &(i, j) in &minus_cells {
            let better = match &theta {
                None => true,
                Some(th) => {
                    x[i][j] < *th || (x[i][j] == *th && (i, j) < leaving.unwrap())
                }
            };
            if better {
                theta = Some(x[i][j].clone());
                leaving = Some((i, j));
            }
        }
        let theta = theta.expect("cycle has a leaving cell");
        let (li, lj) = leaving.unwrap();
        for &(i, j) in &minus_cells {
            x[i][j] = x[i][j].clone() - theta.clone();
        }
        for &(i, j) in &plus_cells {
            x[i][j] = x[i][j].clone() + theta.clone();
        }
        x[ei][ej] = x[ei][ej].clone() + theta;
        basic[ei][ej] = true;
        basic[li][lj] = false;
        x[li][lj] = S::zero();
    }

    let mut value = S::zero();
    let mut flows = Vec::new();
    for i in 0..s {
        for j in 0..t {
            if x[i][j].is_positive_eps() {
                value = value + x[i][j].clone() * c[i][j].clone();
                flows.push((i, j, x[i][j].clone()));
            }
        }
    }
    (value, flows)
}

/// Path of basic cells from sink node `from_sink` to source node `to_source`
/// through the basis tree. Returned as the cell sequence along the path.
fn tree_path(
    basic: &[Vec<bool>],
    s: usize,
    t: usize,
    from_sink: usize,
    to_source: usize,
) -> Vec<(usize, usize)> {
    // Nodes: 0..s sources, s..s+t sinks. Edges are the basic cells.
    let n = s + t;
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut seen = vec![false; n];
    let start = s + from_sink;
    let goal = to_source;
    seen[start] = true;
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(start);
    while let Some(node) = queue.pop_front() {
        if node == goal {
            break;
        }
        if node < s {
            for j in 0..t {
                if basic[node][j] && !seen[s + j] {
                    seen[s + j] = true;
                    parent[s + j] = Some(node);
                    queue.push_back(s + j);
                }
            }
        } else {
            let j = node - s;
            for i in 0..s {
                if basic[i][j] && !seen[i] {
                    seen[i] = true;
                    parent[i] = Some(node);
                    queue.push_back(i);
                }
            }
        }
    }
    let mut cells = Vec::new();
    let mut node = goal;
    while let Some(prev) = parent[node] {
        let cell = if node < s {
            (node, prev - s)
        } else {
            (prev, node - s)
        };
        cells.push(cell);
        node = prev;
    }
    // Collected goal -> start; flip so the first cell touches the sink end.
    cells.reverse();
    cells
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    #[test]
    fn single_pair() {
        let (value, flows) = solve_transportation(&[1.0], &[1.0], |_, _| 2.5);
        assert!((value - 2.5).abs() < 1e-12);
        assert_eq!(flows.len(), 1);
    }

    #[test]
    fn prefers_cheap_assignment() {
        // Two sources, two sinks; diagonal assignment costs 1, off 10.
        let costs = [[1.0, 10.0], [10.0, 1.0]];
        let (value, _) = solve_transportation(&[1.0, 1.0], &[1.0, 1.0], |i, j| costs[i][j]);
        assert!((value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn classic_unbalanced_weights() {
        // Supplies 3,2; demands 2,3. Costs chosen so splitting is optimal.
        let costs = [[4.0, 1.0], [2.0, 3.0]];
        let (value, flows) = solve_transportation(&[3.0, 2.0], &[2.0, 3.0], |i, j| costs[i][j]);
        // Optimal: x00=0, x01=3, x10=2, x11=0 -> 3*1 + 2*2 = 7
        assert!((value - 7.0).abs() < 1e-12);
        let total: f64 = flows.iter().map(|(_, _, f)| *f).sum();
        assert!((total - 5.0).abs() < 1e-12);
    }

    #[test]
    fn exact_rational() {
        let rat = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let costs = [[rat(1, 3), rat(2, 1)], [rat(5, 1), rat(1, 7)]];
        let (value, _) = solve_transportation(
            &[rat(1, 2), rat(1, 2)],
            &[rat(1, 2), rat(1, 2)],
            |i, j| costs[i][j].clone(),
        );
        assert_eq!(value, rat(1, 6) + rat(1, 14));
    }
}
