//! Katetov functions, one-point extensions, and finite Urysohn
//! approximations grown by grid-valued extension, together with the
//! back-and-forth extension of partial isometries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isometry;
use crate::space::{quotient_zero, FiniteMetricSpace, MetricCode};

/// An admissible one-point distance profile over a space:
/// |f(x)-f(y)| <= d(x,y) <= f(x)+f(y) and f >= 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KatetovFunction {
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum KatetovViolation {
    Negative { x: usize, value: f64 },
    LipschitzFail { x: usize, y: usize, excess: f64 },
    SumFail { x: usize, y: usize, excess: f64 },
}

/// Empty iff `f` is an admissible distance profile within `tol`.
pub fn validate_katetov(
    f: &KatetovFunction,
    space: &FiniteMetricSpace,
    tol: f64,
) -> Vec<KatetovViolation> {
    let n = space.len();
    assert_eq!(f.values.len(), n, "profile not total on the space");
    let mut out = Vec::new();
    for (x, &v) in f.values.iter().enumerate() {
        if v < -tol {
            out.push(KatetovViolation::Negative { x, value: v });
        }
    }
    for x in 0..n {
        for y in (x + 1)..n {
            let d = space.dist(x, y);
            let lip = (f.values[x] - f.values[y]).abs() - d;
            if lip > tol {
                out.push(KatetovViolation::LipschitzFail { x, y, excess: lip });
            }
            let sum = d - f.values[x] - f.values[y];
            if sum > tol {
                out.push(KatetovViolation::SumFail { x, y, excess: sum });
            }
        }
    }
    out
}

/// Adjoins one point z* with d(z*, x) = f(x) exactly.
///
/// The result is returned as a code rather than a space: an admissible f
/// may take the value 0 at a point, in which case the output contains a
/// zero-distance duplicate and `quotient_zero` merges it.
pub fn one_point_extension(
    space: &FiniteMetricSpace,
    f: &KatetovFunction,
    tol: f64,
) -> Result<MetricCode> {
    let violations = validate_katetov(f, space, tol);
    if !violations.is_empty() {
        return Err(Error::InvalidKatetov(format!("{violations:?}")));
    }
    let n = space.len();
    let mut d = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            d[i][j] = space.dist(i, j);
        }
        let v = f.values[i].max(0.0);
        d[i][n] = v;
        d[n][i] = v;
    }
    Ok(MetricCode::new(d))
}

/// One extension step in the construction log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtensionRecord {
    pub subset: Vec<usize>,
    pub values: Vec<f64>,
    pub new_point: usize,
}

/// A finite approximation of the Urysohn space: a space closed (to the
/// extent the construction converged) under grid-valued Katetov extensions
/// over small subsets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UrysohnApprox {
    pub space: FiniteMetricSpace,
    pub grid: Vec<f64>,
    pub log: Vec<ExtensionRecord>,
    /// Count of admissible grid functions still unrealized when growth
    /// stopped.
    pub unrealized: usize,
}

/// Extends subset values to the whole space by the Katetov formula
/// min_s (f(s) + d(s, x)), capped at `cap`. With cap >= diam the capped
/// profile is still admissible, and it keeps the diameter from creeping
/// past max(diam, grid maximum) during growth.
fn extended_profile(
    space: &FiniteMetricSpace,
    subset: &[usize],
    values: &[f64],
    cap: f64,
) -> KatetovFunction {
    let profile = (0..space.len())
        .map(|x| {
            subset
                .iter()
                .zip(values)
                .map(|(&s, &fs)| fs + space.dist(s, x))
                .fold(f64::INFINITY, f64::min)
                .min(cap)
        })
        .collect();
    KatetovFunction { values: profile }
}

fn realizes(space: &FiniteMetricSpace, z: usize, subset: &[usize], values: &[f64], tol: f64) -> bool {
    subset
        .iter()
        .zip(values)
        .all(|(&s, &fs)| (space.dist(z, s) - fs).abs() <= tol)
}

fn find_realizer(
    space: &FiniteMetricSpace,
    subset: &[usize],
    values: &[f64],
    tol: f64,
) -> Option<usize> {
    (0..space.len()).find(|&z| realizes(space, z, subset, values, tol))
}

/// Admissibility of grid values on a subset, checked exactly.
fn admissible_on_subset(
    space: &FiniteMetricSpace,
    subset: &[usize],
    values: &[f64],
    tol: f64,
) -> bool {
    for (a, &s) in subset.iter().enumerate() {
        for (b, &t) in subset.iter().enumerate().skip(a + 1) {
            let d = space.dist(s, t);
            if (values[a] - values[b]).abs() > d + tol || d > values[a] + values[b] + tol {
                return false;
            }
        }
    }
    true
}

/// All subsets of {0..n} of size 1..=k, by size then lexicographic.
fn subsets_up_to(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in 1..=k {
        let mut current = Vec::with_capacity(size);
        fn rec(start: usize, n: usize, size: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if current.len() == size {
                out.push(current.clone());
                return;
            }
            for i in start..n {
                current.push(i);
                rec(i + 1, n, size, current, out);
                current.pop();
            }
        }
        rec(0, n, size, &mut current, &mut out);
    }
    out
}

fn value_tuples(grid: &[f64], len: usize) -> Vec<Vec<f64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::new();
        for tuple in &out {
            for &g in grid {
                let mut t = tuple.clone();
                t.push(g);
                next.push(t);
            }
        }
        out = next;
    }
    out
}

/// Grows a seed space toward the Urysohn property: sweeps over all
/// admissible grid-valued profiles on subsets of size <= `max_subset`,
/// realizing each unrealized one by a one-point extension. Deterministic
/// lexicographic order unless `rng_seed` asks for a shuffled sweep.
pub fn grow_urysohn(
    seed: &FiniteMetricSpace,
    grid: &[f64],
    max_subset: usize,
    rounds: usize,
    rng_seed: Option<u64>,
    budget: usize,
    tol: f64,
) -> Result<UrysohnApprox> {
    if seed.is_empty() {
        return Err(Error::EmptySpace);
    }
    let mut grid: Vec<f64> = grid.to_vec();
    grid.retain(|&g| g > 0.0);
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();
    let grid_max = grid.last().copied().unwrap_or(0.0);

    let mut space = seed.clone();
    let mut log = Vec::new();
    for _ in 0..rounds {
        let n0 = space.len();
        let mut tasks: Vec<(Vec<usize>, Vec<f64>)> = Vec::new();
        for subset in subsets_up_to(n0, max_subset) {
            for values in value_tuples(&grid, subset.len()) {
                tasks.push((subset.clone(), values));
            }
        }
        if let Some(s) = rng_seed {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(s);
            tasks.shuffle(&mut rng);
        }
        let mut added = 0usize;
        for (subset, values) in tasks {
            if !admissible_on_subset(&space, &subset, &values, tol) {
                continue;
            }
            if find_realizer(&space, &subset, &values, tol).is_some() {
                continue;
            }
            if space.len() + 1 > budget {
                return Err(Error::BudgetExceeded {
                    budget,
                    reached: space.len(),
                });
            }
            let cap = space.diameter().max(grid_max);
            let profile = extended_profile(&space, &subset, &values, cap);
            let code = one_point_extension(&space, &profile, tol)?;
            space = FiniteMetricSpace::from_code(&code, tol)?;
            log.push(ExtensionRecord {
                subset,
                values,
                new_point: space.len() - 1,
            });
            added += 1;
        }
        if added == 0 {
            break;
        }
    }

    let unrealized = count_unrealized(&space, &grid, max_subset, tol);
    Ok(UrysohnApprox {
        space,
        grid,
        log,
        unrealized,
    })
}

/// Re-enumerates every admissible grid profile and counts those with no
/// realizing point.
pub fn count_unrealized(
    space: &FiniteMetricSpace,
    grid: &[f64],
    max_subset: usize,
    tol: f64,
) -> usize {
    let mut count = 0;
    for subset in subsets_up_to(space.len(), max_subset) {
        for values in value_tuples(grid, subset.len()) {
            if admissible_on_subset(space, &subset, &values, tol)
                && find_realizer(space, &subset, &values, tol).is_none()
            {
                count += 1;
            }
        }
    }
    count
}

impl UrysohnApprox {
    /// Re-applies the construction log to a seed; the result must equal the
    /// stored space.
    pub fn replay(&self, seed: &FiniteMetricSpace, tol: f64) -> Result<FiniteMetricSpace> {
        let grid_max = self.grid.last().copied().unwrap_or(0.0);
        let mut space = seed.clone();
        for record in &self.log {
            let cap = space.diameter().max(grid_max);
            let profile = extended_profile(&space, &record.subset, &record.values, cap);
            let code = one_point_extension(&space, &profile, tol)?;
            space = FiniteMetricSpace::from_code(&code, tol)?;
        }
        Ok(space)
    }
}

/// Backtracking search for an embedding of `target` into existing points of
/// `space`, exact within tol.
fn embedding_into_existing(
    target: &FiniteMetricSpace,
    space: &FiniteMetricSpace,
    tol: f64,
) -> Option<Vec<usize>> {
    let k = target.len();
    let mut images: Vec<usize> = Vec::with_capacity(k);
    fn rec(
        depth: usize,
        target: &FiniteMetricSpace,
        space: &FiniteMetricSpace,
        images: &mut Vec<usize>,
        tol: f64,
    ) -> bool {
        if depth == target.len() {
            return true;
        }
        'cand: for z in 0..space.len() {
            if images.contains(&z) {
                continue;
            }
            for (j, &img) in images.iter().enumerate() {
                if (space.dist(z, img) - target.dist(depth, j)).abs() > tol {
                    continue 'cand;
                }
            }
            images.push(z);
            if rec(depth + 1, target, space, images, tol) {
                return true;
            }
            images.pop();
        }
        false
    }
    if rec(0, target, space, &mut images, tol) {
        Some(images)
    } else {
        None
    }
}

/// Embeds the coded space isometrically into the approximation, growing it
/// by one-point extensions where no existing point fits. Returns the image
/// indices, one per point of the quotiented code.
pub fn embed_code(
    code: &MetricCode,
    approx: &mut UrysohnApprox,
    tol: f64,
) -> Result<Vec<usize>> {
    let target = quotient_zero(code, tol)?;
    if let Some(images) = embedding_into_existing(&target, &approx.space, tol) {
        return Ok(images);
    }
    let mut images: Vec<usize> = Vec::with_capacity(target.len());
    for i in 0..target.len() {
        let existing = (0..approx.space.len()).find(|&z| {
            !images.contains(&z)
                && images
                    .iter()
                    .enumerate()
                    .all(|(j, &img)| (approx.space.dist(z, img) - target.dist(i, j)).abs() <= tol)
        });
        match existing {
            Some(z) => images.push(z),
            None => {
                let values: Vec<f64> = (0..i).map(|j| target.dist(i, j)).collect();
                let profile = extended_profile(
                    &approx.space,
                    &images,
                    &values,
                    f64::INFINITY,
                );
                let ext = one_point_extension(&approx.space, &profile, tol)?;
                approx.space = FiniteMetricSpace::from_code(&ext, tol)?;
                let z = approx.space.len() - 1;
                approx.log.push(ExtensionRecord {
                    subset: images.clone(),
                    values,
                    new_point: z,
                });
                images.push(z);
            }
        }
    }
    Ok(images)
}

/// Extends a partial isometry of the approximation, back-and-forth, until
/// its domain and range cover every point present when the call was made.
pub fn extend_partial_isometry(
    approx: &mut UrysohnApprox,
    partial: &[(usize, usize)],
    tol: f64,
) -> Result<Vec<(usize, usize)>> {
    let space = &approx.space;
    for (k, &(a, b)) in partial.iter().enumerate() {
        for &(a2, b2) in partial.iter().skip(k + 1) {
            let lhs = space.dist(a, a2);
            let rhs = space.dist(b, b2);
            if (lhs - rhs).abs() > tol {
                return Err(Error::NotDistancePreserving {
                    p: a,
                    q: a2,
                    lhs,
                    rhs,
                });
            }
        }
    }
    let original_n = approx.space.len();
    let mut map: Vec<(usize, usize)> = partial.to_vec();
    loop {
        let domain: Vec<usize> = map.iter().map(|&(a, _)| a).collect();
        let range: Vec<usize> = map.iter().map(|&(_, b)| b).collect();
        if let Some(x) = (0..original_n).find(|x| !domain.contains(x)) {
            let y = match_or_extend(approx, &map, x, true, tol)?;
            map.push((x, y));
            continue;
        }
        if let Some(y) = (0..original_n).find(|y| !range.contains(y)) {
            let x = match_or_extend(approx, &map, y, false, tol)?;
            map.push((x, y));
            continue;
        }
        break;
    }
    map.sort_unstable();
    Ok(map)
}

/// Finds (or creates by extension) a partner for `point` on the other side
/// of the partial map. `forward` chooses the direction.
fn match_or_extend(
    approx: &mut UrysohnApprox,
    map: &[(usize, usize)],
    point: usize,
    forward: bool,
    tol: f64,
) -> Result<usize> {
    let space = &approx.space;
    let (this_side, other_side): (Vec<usize>, Vec<usize>) = if forward {
        (
            map.iter().map(|&(a, _)| a).collect(),
            map.iter().map(|&(_, b)| b).collect(),
        )
    } else {
        (
            map.iter().map(|&(_, b)| b).collect(),
            map.iter().map(|&(a, _)| a).collect(),
        )
    };
    let wanted: Vec<f64> = this_side.iter().map(|&a| space.dist(point, a)).collect();
    let candidate = (0..space.len()).find(|&z| {
        !other_side.contains(&z)
            && other_side
                .iter()
                .zip(&wanted)
                .all(|(&b, &w)| (space.dist(z, b) - w).abs() <= tol)
    });
    if let Some(z) = candidate {
        return Ok(z);
    }
    let profile = extended_profile(space, &other_side, &wanted, f64::INFINITY);
    let ext = one_point_extension(space, &profile, tol)?;
    approx.space = FiniteMetricSpace::from_code(&ext, tol)?;
    let z = approx.space.len() - 1;
    approx.log.push(ExtensionRecord {
        subset: other_side,
        values: wanted,
        new_point: z,
    });
    Ok(z)
}

/// A seed that is already closed under half-integer grid extensions over
/// pairs: the discrete torus (Z/8k)^2 under the Chebyshev metric, quantized
/// to multiples of 1/2 by d = ceil(cheb/k)/2.
///
/// Growing from a small seed cannot reach such a state: realizing one
/// profile by a fresh point creates new pairs with profiles of their own,
/// which is the Fraisse construction of an infinite limit. Closure over the
/// grid {1/2, 1, 3/2, 2} (k = 1) therefore needs a seed with enough room,
/// and the two-dimensional torus provides it: for any admissible pair
/// profile a witness can be placed using the second coordinate.
pub fn torus_seed(k: usize) -> FiniteMetricSpace {
    assert!(k >= 1);
    let n = 8 * k as i64;
    let pts: Vec<(i64, i64)> = (0..n)
        .flat_map(|a| (0..n).map(move |b| (a, b)))
        .collect();
    let circ = |a: i64, b: i64| {
        let r = (a - b).rem_euclid(n);
        r.min(n - r)
    };
    let d = pts
        .iter()
        .map(|&(a1, a2)| {
            pts.iter()
                .map(|&(b1, b2)| {
                    let cheb = circ(a1, b1).max(circ(a2, b2));
                    (cheb as f64 / k as f64).ceil() / 2.0
                })
                .collect()
        })
        .collect();
    FiniteMetricSpace::from_code(&MetricCode::new(d), 1e-9).expect("quantized Chebyshev metric")
}

/// Convenience for tests and the pipeline: wraps a bare space as an
/// approximation with an empty log.
pub fn approx_from_space(space: FiniteMetricSpace, grid: Vec<f64>) -> UrysohnApprox {
    UrysohnApprox {
        space,
        grid,
        log: Vec::new(),
        unrealized: 0,
    }
}

/// Checks that embedded images reproduce the quotiented code's distances.
pub fn verify_embedding(
    code: &MetricCode,
    approx: &UrysohnApprox,
    images: &[usize],
    tol: f64,
) -> Result<bool> {
    let target = quotient_zero(code, tol)?;
    let image_space = approx.space.subspace(images);
    Ok(isometry::find_isometry(&target, &image_space, tol).is_some())
}
