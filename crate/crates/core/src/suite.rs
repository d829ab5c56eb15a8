//! The property suite behind the `suite` subcommand.
//!
//! Each criterion draws its own seeded random stream, so criteria are
//! independent and the whole run is reproducible from the configuration.
//! Criterion errors are reported as failures, not propagated as crashes.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::isometry::{find_dilatation, find_isometry, same_diameter_dilatation_is_isometry_check};
use crate::katetov::{
    approx_from_space, embed_code, grow_urysohn, one_point_extension, torus_seed, verify_embedding,
    KatetovFunction,
};
use crate::molecule::Molecule;
use crate::norm::{
    dual_norm, dual_norm_exact, holmes_norm, primal_norm, primal_norm_exact,
    support_restricted_norm,
};
use crate::oracle::{ball_vertex_oracle, exhaustive_transport};
use crate::pipeline::theorem1_check;
use crate::space::{
    bound_transform, snowflake, validate_code, FiniteMetricSpace, MetricCode, PointedSpace,
};
use crate::weaver::{is_concave, is_extreme};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub tolerance: f64,
    pub rng_seed: u64,
    pub point_budget: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tolerance: 1e-9,
            rng_seed: 17,
            point_budget: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub tolerance: f64,
    pub rng_seed: u64,
    pub point_budget: usize,
    pub criteria: Vec<CriterionResult>,
    pub all_passed: bool,
}

fn stream(config: &RunConfig, criterion: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(
        config
            .rng_seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(criterion),
    )
}

/// Distances drawn from {1, 9/8, ..., 2}: dyadic, hence exact in binary
/// floating point, and within a factor-2 band so every triple satisfies the
/// triangle inequality.
fn random_space(rng: &mut ChaCha8Rng, n: usize) -> FiniteMetricSpace {
    let mut d = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 1.0 + rng.gen_range(0..=8) as f64 / 8.0;
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    FiniteMetricSpace::from_code(&MetricCode::new(d), 1e-9).expect("banded distances are metric")
}

/// A molecule with dyadic coefficients on a random support of size >= 2.
fn random_molecule(rng: &mut ChaCha8Rng, n: usize) -> Molecule {
    let size = rng.gen_range(2..=n);
    let mut points: Vec<usize> = (0..n).collect();
    points.shuffle(rng);
    points.truncate(size);
    let mut terms = Vec::with_capacity(size - 1);
    for k in 1..size {
        let c = rng.gen_range(-16..=16) as f64 / 8.0;
        terms.push((c, Molecule::elementary(points[k], points[0])));
    }
    let m = Molecule::combine(&terms);
    if m.is_zero() {
        Molecule::elementary(points[0], points[1])
    } else {
        m
    }
}

/// Permutes the point order of a space.
fn permuted(rng: &mut ChaCha8Rng, space: &FiniteMetricSpace) -> (FiniteMetricSpace, Vec<usize>) {
    let mut order: Vec<usize> = (0..space.len()).collect();
    order.shuffle(rng);
    (space.subspace(&order), order)
}

/// Moves one distance by 1/8 inside the [1, 2] band; the distance multiset
/// changes, so the result is never isometric to the input.
fn perturbed(rng: &mut ChaCha8Rng, space: &FiniteMetricSpace) -> FiniteMetricSpace {
    let n = space.len();
    let i = rng.gen_range(0..n - 1);
    let j = rng.gen_range(i + 1..n);
    let mut d = space.matrix().clone();
    let delta = if d[i][j] >= 1.5 { -0.125 } else { 0.125 };
    d[i][j] += delta;
    d[j][i] += delta;
    FiniteMetricSpace::from_code(&MetricCode::new(d), 1e-9).expect("band preserved")
}

/// Points on a line with dyadic gaps; every inner point witnesses a
/// triangle equality between its neighbors.
fn collinear_space(rng: &mut ChaCha8Rng, n: usize) -> FiniteMetricSpace {
    let mut pos = vec![0.0f64; n];
    for i in 1..n {
        pos[i] = pos[i - 1] + 1.0 + rng.gen_range(0..=8) as f64 / 8.0;
    }
    let d = pos
        .iter()
        .map(|&a| pos.iter().map(|&b| (a - b).abs()).collect())
        .collect();
    FiniteMetricSpace::from_code(&MetricCode::new(d), 1e-9).expect("line metric")
}

fn criterion(id: usize, name: &str, body: impl FnOnce() -> Result<(bool, String)>) -> CriterionResult {
    let (passed, detail) = match body() {
        Ok(pair) => pair,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult {
        id,
        name: name.to_string(),
        passed,
        detail,
    }
}

fn c1_duality(config: &RunConfig) -> CriterionResult {
    let tol = config.tolerance;
    let mut rng = stream(config, 1);
    criterion(1, "duality", || {
        let mut max_gap: f64 = 0.0;
        let mut exact_checks = 0usize;
        for i in 0..500 {
            let n = 2 + i % 7;
            let space = random_space(&mut rng, n);
            let basepoint = rng.gen_range(0..n);
            let pointed = PointedSpace::new(space.clone(), basepoint)?;
            let m = random_molecule(&mut rng, n);
            let p = primal_norm(&m, &space)?;
            let d = dual_norm(&m, &pointed)?;
            max_gap = max_gap.max((p.value - d.value).abs());
            if max_gap > tol {
                return Ok((false, format!("gap {max_gap:.3e} above tolerance at case {i}")));
            }
            if n <= 4 {
                let (pe, _) = primal_norm_exact(&m, &space)?;
                let (de, _) = dual_norm_exact(&m, &pointed)?;
                let oracle = exhaustive_transport(&m, &space);
                if pe != oracle || de != oracle {
                    return Ok((false, format!("exact-mode mismatch with oracle at case {i}")));
                }
                exact_checks += 1;
            }
        }
        Ok((
            true,
            format!("500 molecules, max gap {max_gap:.3e}, {exact_checks} exact oracle matches"),
        ))
    })
}

fn c2_elementary_norms(config: &RunConfig) -> CriterionResult {
    let tol = config.tolerance;
    let mut rng = stream(config, 2);
    criterion(2, "elementary_norms", || {
        let mut max_err: f64 = 0.0;
        let mut pairs = 0usize;
        for i in 0..100 {
            let n = 2 + i % 5;
            let space = random_space(&mut rng, n);
            let pointed = PointedSpace::new(space.clone(), 0)?;
            for p in 0..n {
                for q in (p + 1)..n {
                    let m = Molecule::elementary(p, q);
                    let pv = primal_norm(&m, &space)?.value;
                    let dv = dual_norm(&m, &pointed)?.value;
                    max_err = max_err
                        .max((pv - space.dist(p, q)).abs())
                        .max((dv - space.dist(p, q)).abs());
                    pairs += 1;
                }
            }
        }
        Ok((
            max_err <= tol,
            format!("{pairs} pairs over 100 spaces, max |norm - d| = {max_err:.3e}"),
        ))
    })
}

fn c3_norm_axioms(config: &RunConfig) -> CriterionResult {
    let tol = config.tolerance;
    let mut rng = stream(config, 3);
    criterion(3, "norm_axioms", || {
        for i in 0..100 {
            let n = 2 + i % 7;
            let space = random_space(&mut rng, n);
            let pointed = PointedSpace::new(space.clone(), rng.gen_range(0..n))?;
            let m1 = random_molecule(&mut rng, n);
            let m2 = random_molecule(&mut rng, n);
            let v1 = primal_norm(&m1, &space)?.value;
            let v2 = primal_norm(&m2, &space)?.value;
            let lambda = rng.gen_range(-16..=16) as f64 / 8.0;
            let scaled = primal_norm(&m1.scaled(lambda), &space)?.value;
            if (scaled - lambda.abs() * v1).abs() > tol {
                return Ok((false, format!("homogeneity failed at case {i}")));
            }
            let sum = Molecule::combine(&[(1.0, m1.clone()), (1.0, m2.clone())]);
            let vs = primal_norm(&sum, &space)?.value;
            if vs > v1 + v2 + tol {
                return Ok((false, format!("triangle inequality failed at case {i}")));
            }
            if !m1.is_zero() && v1 <= 0.0 {
                return Ok((false, format!("positivity failed at case {i}")));
            }
            // The +/- epsilon witness gives the explicit lower bound
            // eps * sum |a_i| over the basepoint expansion of m1.
            let eps = space.min_distance() / 2.0;
            let mass: f64 = m1
                .entries()
                .filter(|&(x, _)| x != pointed.basepoint)
                .map(|(_, c)| c.abs())
                .sum();
            let witness_bound = eps * mass;
            let dv = dual_norm(&m1, &pointed)?.value;
            if dv + tol < witness_bound {
                return Ok((false, format!("epsilon-witness bound failed at case {i}")));
            }
        }
        Ok((true, "homogeneity, triangle, positivity, witness bound on 100 cases".into()))
    })
}

fn c4_support_restriction(config: &RunConfig) -> CriterionResult {
    let tol = config.tolerance;
    let mut rng = stream(config, 4);
    criterion(4, "support_restriction", || {
        let mut max_err: f64 = 0.0;
        for i in 0..200 {
            let n = 3 + i % 6;
            let space = random_space(&mut rng, n);
            let pointed = PointedSpace::new(space.clone(), rng.gen_range(0..n))?;
            let m = random_molecule(&mut rng, n);
            let full = primal_norm(&m, &space)?.value;
            let restricted = support_restricted_norm(&m, &pointed)?;
            max_err = max_err.max((full - restricted).abs());
        }
        Ok((
            max_err <= tol,
            format!("200 molecules, max |restricted - full| = {max_err:.3e}"),
        ))
    })
}

fn c5_holmes(config: &RunConfig) -> CriterionResult {
    let tol = config.tolerance;
    let mut rng = stream(config, 5);
    criterion(5, "holmes_formula", || {
        let mut max_err: f64 = 0.0;
        for i in 0..200 {
            let n = 2 + i % 5;
            let space = random_space(&mut rng, n);
            let e = rng.gen_range(0..n);
            let pointed = PointedSpace::new(space.clone(), e)?;
            let k = rng.gen_range(1..=n);
            let coeffs: Vec<(f64, usize)> = (0..k)
                .map(|_| {
                    (
                        rng.gen_range(-16..=16) as f64 / 8.0,
                        rng.gen_range(0..n),
                    )
                })
                .collect();
            let terms: Vec<(f64, Molecule)> = coeffs
                .iter()
                .map(|&(l, x)| (l, Molecule::elementary(x, e)))
                .collect();
            let m = Molecule::combine(&terms);
            let via_holmes = holmes_norm(&coeffs, &pointed)?;
            let via_free = primal_norm(&m, &space)?.value;
            max_err = max_err.max((via_holmes - via_free).abs());
        }
        Ok((
            max_err <= tol,
            format!("200 coefficient vectors, max deviation {max_err:.3e}"),
        ))
    })
}

fn c6_weaver(config: &RunConfig) -> CriterionResult {
    let tol = config.tolerance;
    let mut rng = stream(config, 6);
    criterion(6, "weaver_concavity", || {
        for i in 0..100 {
            let n = 2 + i % 5;
            let flat = random_space(&mut rng, n);
            let snow = snowflake(&flat, 0.5)?;
            let report = is_concave(&snow, 0, tol)?;
            if !report.concave {
                return Ok((false, format!("snowflaked space {i} not concave")));
            }
        }
        for i in 0..50 {
            let n = 3 + i % 4;
            let line = collinear_space(&mut rng, n);
            let report = is_concave(&line, 0, tol)?;
            if report.concave || !report.failures.iter().any(|f| (f.p, f.q) == (0, 2)) {
                return Ok((false, format!("collinear space {i} missed the equality triple")));
            }
        }
        // Oracle cross-check on small instances, both concave and not.
        let mut compared = 0usize;
        for i in 0..40 {
            let space = if i % 2 == 0 {
                snowflake(&random_space(&mut rng, 3 + i % 2), 0.5)?
            } else {
                collinear_space(&mut rng, 3 + i % 2)
            };
            let pointed = PointedSpace::new(space.clone(), 0)?;
            for p in 0..space.len() {
                for q in (p + 1)..space.len() {
                    let m = Molecule::elementary(p, q).scaled(1.0 / space.dist(p, q));
                    let lp_verdict = is_extreme(&m, &pointed, tol)?.is_extreme;
                    let oracle_verdict = ball_vertex_oracle(&space, p, q);
                    if lp_verdict != oracle_verdict {
                        return Ok((
                            false,
                            format!("oracle disagreement at space {i}, pair ({p},{q})"),
                        ));
                    }
                    compared += 1;
                }
            }
        }
        Ok((
            true,
            format!("100 snowflaked concave, 50 collinear refuted, {compared} oracle matches"),
        ))
    })
}

fn c7_transform_equivalence(config: &RunConfig) -> CriterionResult {
    let tol = config.tolerance;
    let mut rng = stream(config, 7);
    criterion(7, "transform_equivalences", || {
        for i in 0..200 {
            let n = 2 + i % 5;
            let x = random_space(&mut rng, n);
            let (y, _) = if i % 2 == 0 {
                permuted(&mut rng, &x)
            } else {
                (perturbed(&mut rng, &x), Vec::new())
            };
            let plain = find_isometry(&x, &y, tol);
            let bounded = find_isometry(&bound_transform(&x), &bound_transform(&y), tol);
            let snowed = find_isometry(&snowflake(&x, 0.5)?, &snowflake(&y, 0.5)?, tol);
            let expected = i % 2 == 0;
            if plain.is_some() != expected {
                return Ok((false, format!("base verdict wrong at pair {i}")));
            }
            let same = match (&plain, &bounded, &snowed) {
                (Some(a), Some(b), Some(c)) => a.mapping == b.mapping && a.mapping == c.mapping,
                (None, None, None) => true,
                _ => false,
            };
            if !same {
                return Ok((false, format!("transform changed the verdict at pair {i}")));
            }
        }
        Ok((true, "200 pairs, verdicts and witness mappings stable".into()))
    })
}

fn c8_theorem1(config: &RunConfig) -> CriterionResult {
    let tol = config.tolerance;
    let mut rng = stream(config, 8);
    criterion(8, "theorem1_equivalence", || {
        for i in 0..200 {
            let n = 2 + i % 5;
            let x = random_space(&mut rng, n);
            let y = if i % 2 == 0 {
                permuted(&mut rng, &x).0
            } else {
                perturbed(&mut rng, &x)
            };
            let report = theorem1_check(&x.to_code(), &y.to_code(), tol)?;
            if !report.agree {
                return Ok((false, format!("three-way disagreement at pair {i}")));
            }
            let expected = i % 2 == 0;
            if report.spaces_isometric != expected {
                return Ok((false, format!("verdict wrong at pair {i}")));
            }
        }
        Ok((true, "200 pairs, all three verdicts agree".into()))
    })
}

fn c9_dilatation(config: &RunConfig) -> CriterionResult {
    let tol = config.tolerance;
    let mut rng = stream(config, 9);
    criterion(9, "dilatation_recovery", || {
        let mut max_err: f64 = 0.0;
        for i in 0..50 {
            let n = 2 + i % 5;
            let x = random_space(&mut rng, n);
            for lambda in [0.5, 2.0, 3.0] {
                let y = x.scale(lambda);
                let w = match find_dilatation(&x, &y, tol) {
                    Some(w) => w,
                    None => return Ok((false, format!("no dilatation found at case {i}"))),
                };
                max_err = max_err.max((w.lambda - lambda).abs());
            }
            let (p, _) = permuted(&mut rng, &x);
            let report = same_diameter_dilatation_is_isometry_check(&x, &p, tol)?;
            if !report.lambda_is_one {
                return Ok((false, format!("equal-diameter dilatation not rigid at case {i}")));
            }
        }
        Ok((
            max_err <= tol,
            format!("150 scaled recoveries, max lambda error {max_err:.3e}; 50 rigidity checks"),
        ))
    })
}

fn c10_urysohn(config: &RunConfig) -> CriterionResult {
    let tol = config.tolerance;
    let mut rng = stream(config, 10);
    criterion(10, "katetov_urysohn", || {
        for i in 0..50 {
            let n = 2 + i % 5;
            let space = random_space(&mut rng, n);
            let z = rng.gen_range(0..n);
            let c = rng.gen_range(0..=2) as f64 / 2.0;
            let f = KatetovFunction {
                values: (0..n).map(|x| space.dist(x, z) + c).collect(),
            };
            let code = one_point_extension(&space, &f, tol)?;
            let violations = validate_code(&code, tol);
            if !violations.is_empty() {
                return Ok((false, format!("extension {i} produced invalid code")));
            }
        }
        let seed = torus_seed(1);
        let grid = [0.5, 1.0, 1.5, 2.0];
        let approx = grow_urysohn(&seed, &grid, 2, 8, None, config.point_budget, tol)?;
        if approx.unrealized != 0 {
            return Ok((
                false,
                format!("closure stopped with {} unrealized functions", approx.unrealized),
            ));
        }
        let grown_to = approx.space.len();
        let embed_seed = FiniteMetricSpace::from_code(
            &MetricCode::new(vec![vec![0.0, 1.0], vec![1.0, 0.0]]),
            tol,
        )?;
        for i in 0..50 {
            let n = 2 + i % 4;
            let code = random_space(&mut rng, n).to_code();
            let mut fresh = approx_from_space(embed_seed.clone(), grid.to_vec());
            let images = embed_code(&code, &mut fresh, tol)?;
            if !verify_embedding(&code, &fresh, &images, tol)? {
                return Ok((false, format!("embedding {i} not isometric to its code")));
            }
        }
        Ok((
            true,
            format!("50 extensions valid, closure at {grown_to} points, 50 embeddings isometric"),
        ))
    })
}

/// Runs criteria 1 through 10 once.
pub fn run_criteria(config: &RunConfig) -> Vec<CriterionResult> {
    vec![
        c1_duality(config),
        c2_elementary_norms(config),
        c3_norm_axioms(config),
        c4_support_restriction(config),
        c5_holmes(config),
        c6_weaver(config),
        c7_transform_equivalence(config),
        c8_theorem1(config),
        c9_dilatation(config),
        c10_urysohn(config),
    ]
}

/// Runs the full suite: criteria 1-10 twice, with criterion 11 comparing
/// the two serialized runs byte for byte.
pub fn run_suite(config: &RunConfig) -> SuiteReport {
    let first = run_criteria(config);
    let second = run_criteria(config);
    let bytes_a = serde_json::to_vec(&first).expect("criteria serialize");
    let bytes_b = serde_json::to_vec(&second).expect("criteria serialize");
    let identical = bytes_a == bytes_b;
    let mut criteria = first;
    criteria.push(CriterionResult {
        id: 11,
        name: "determinism".to_string(),
        passed: identical,
        detail: if identical {
            format!("two runs, {} identical report bytes", bytes_a.len())
        } else {
            "repeat run diverged".to_string()
        },
    });
    let all_passed = criteria.iter().all(|c| c.passed);
    SuiteReport {
        tolerance: config.tolerance,
        rng_seed: config.rng_seed,
        point_budget: config.point_budget,
        criteria,
        all_passed,
    }
}
