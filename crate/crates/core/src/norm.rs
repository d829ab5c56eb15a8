//! The free-space norm from both sides of duality.
//!
//! The primal solver decomposes a molecule into elementary molecules through
//! a transportation problem; the dual solver maximizes the pairing over the
//! unit ball of basepointed Lipschitz functions through an independent
//! linear program. Agreement of the two values is the certificate.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lipschitz::{lipschitz_constant, LipschitzFunction};
use crate::lp::{solve, LinearProgram, LpOutcome, Relation};
use crate::molecule::Molecule;
use crate::scalar::Scalar;
use crate::space::{FiniteMetricSpace, PointedSpace};
use crate::transport::solve_transportation;

/// An optimal decomposition m = Σ a_i m_{p_i q_i} with value Σ a_i d(p_i,q_i).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PrimalSolution {
    pub value: f64,
    /// Triples (p, q, a) with a > 0.
    pub decomposition: Vec<(usize, usize, f64)>,
}

/// An optimal 1-Lipschitz witness for the dual program.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualSolution {
    pub value: f64,
    pub witness: LipschitzFunction,
}

/// Primal and dual solutions together with the achieved gap.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormCertificate {
    pub value: f64,
    pub primal_value: f64,
    pub dual_value: f64,
    pub primal: Vec<(usize, usize, f64)>,
    pub dual_witness: LipschitzFunction,
    pub gap: f64,
}

fn check_support(m: &Molecule, n: usize) -> Result<()> {
    if let Some(max) = m.max_index() {
        if max >= n {
            return Err(Error::PointOutOfRange { index: max, n });
        }
    }
    Ok(())
}

/// Transportation formulation, generic over the scalar. Coefficients and
/// distances are converted losslessly from their binary representation.
fn primal_in<S: Scalar>(
    m: &Molecule,
    dist: impl Fn(usize, usize) -> S,
) -> (S, Vec<(usize, usize, S)>) {
    let mut sources: Vec<(usize, S)> = Vec::new();
    let mut sinks: Vec<(usize, S)> = Vec::new();
    for (x, c) in m.entries() {
        if c > 0.0 {
            sources.push((x, S::from_f64(c)));
        } else {
            sinks.push((x, S::from_f64(-c)));
        }
    }
    if sources.is_empty() || sinks.is_empty() {
        return (S::zero(), Vec::new());
    }
    // Rebalance the tiny zero-sum slack onto the last sink so the
    // transportation instance is exactly balanced.
    let supply_total = sources
        .iter()
        .fold(S::zero(), |acc, (_, a)| acc + a.clone());
    let demand_total = sinks.iter().fold(S::zero(), |acc, (_, b)| acc + b.clone());
    let last = sinks.len() - 1;
    let adjusted = sinks[last].1.clone() + supply_total - demand_total;
    sinks[last].1 = adjusted;

    let supplies: Vec<S> = sources.iter().map(|(_, a)| a.clone()).collect();
    let demands: Vec<S> = sinks.iter().map(|(_, b)| b.clone()).collect();
    let (value, flows) = solve_transportation(&supplies, &demands, |i, j| {
        dist(sources[i].0, sinks[j].0)
    });
    let decomposition = flows
        .into_iter()
        .map(|(i, j, a)| (sources[i].0, sinks[j].0, a))
        .collect();
    (value, decomposition)
}

/// inf { Σ |a_i| d(p_i,q_i) : m = Σ a_i m_{p_i q_i} } with an optimal
/// decomposition.
pub fn primal_norm(m: &Molecule, space: &FiniteMetricSpace) -> Result<PrimalSolution> {
    check_support(m, space.len())?;
    let (value, decomposition) = primal_in::<f64>(m, |p, q| space.dist(p, q));
    Ok(PrimalSolution {
        value,
        decomposition,
    })
}

/// Exact-rational primal norm; distances are converted from their binary
/// floating representation without rounding.
pub fn primal_norm_exact(
    m: &Molecule,
    space: &FiniteMetricSpace,
) -> Result<(BigRational, Vec<(usize, usize, BigRational)>)> {
    check_support(m, space.len())?;
    Ok(primal_in::<BigRational>(m, |p, q| {
        <BigRational as Scalar>::from_f64(space.dist(p, q))
    }))
}

/// The pairwise-constraint linear program behind the dual norm: maximize
/// Σ obj(x) f(x) over f with f(e)=0 and f(x)-f(y) ≤ d(x,y) for all pairs.
///
/// Returns the optimal value and the full vector of f-values. Ties between
/// optimal witnesses are broken by the solver's deterministic pivoting
/// (Dantzig then Bland, variables ordered positive part first, then by
/// point index).
fn lip_dual_lp<S: Scalar>(
    obj: &[S],
    n: usize,
    e: usize,
    dist: impl Fn(usize, usize) -> S,
) -> Result<(S, Vec<S>)> {
    if n == 0 {
        return Err(Error::EmptySpace);
    }
    // Variables: f(x) = u_x - v_x for x != e, in point-index order.
    let vars: Vec<usize> = (0..n).filter(|&x| x != e).collect();
    let idx_of = |x: usize| vars.iter().position(|&y| y == x);
    let nv = vars.len();
    let mut objective = vec![S::zero(); 2 * nv];
    for (k, &x) in vars.iter().enumerate() {
        objective[k] = obj[x].clone();
        objective[nv + k] = -obj[x].clone();
    }
    let mut rows = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if x == y {
                continue;
            }
            let mut a = vec![S::zero(); 2 * nv];
            if let Some(k) = idx_of(x) {
                a[k] = S::one();
                a[nv + k] = -S::one();
            }
            if let Some(k) = idx_of(y) {
                a[k] = a[k].clone() - S::one();
                a[nv + k] = a[nv + k].clone() + S::one();
            }
            rows.push((a, Relation::Le, dist(x, y)));
        }
    }
    let lp = LinearProgram { objective, rows };
    match solve(&lp) {
        LpOutcome::Optimal { value, solution } => {
            let mut f = vec![S::zero(); n];
            for (k, &x) in vars.iter().enumerate() {
                f[x] = solution[k].clone() - solution[nv + k].clone();
            }
            Ok((value, f))
        }
        LpOutcome::Infeasible => Err(Error::Solver("dual program infeasible".into())),
        LpOutcome::Unbounded => Err(Error::Solver("dual program unbounded".into())),
    }
}

/// sup { Σ f(x) m(x) : f 1-Lipschitz, f(e) = 0 } with a maximizing witness.
pub fn dual_norm(m: &Molecule, pointed: &PointedSpace) -> Result<DualSolution> {
    let n = pointed.space.len();
    check_support(m, n)?;
    if m.is_zero() {
        return Ok(DualSolution {
            value: 0.0,
            witness: LipschitzFunction::zero(n),
        });
    }
    let mut obj = vec![0.0; n];
    for (x, c) in m.entries() {
        obj[x] = c;
    }
    let (value, f) = lip_dual_lp::<f64>(&obj, n, pointed.basepoint, |x, y| {
        pointed.space.dist(x, y)
    })?;
    Ok(DualSolution {
        value,
        witness: LipschitzFunction::new(f),
    })
}

/// Exact-rational dual norm.
pub fn dual_norm_exact(m: &Molecule, pointed: &PointedSpace) -> Result<(BigRational, Vec<BigRational>)> {
    let n = pointed.space.len();
    check_support(m, n)?;
    if m.is_zero() {
        return Ok((
            <BigRational as Scalar>::zero(),
            vec![<BigRational as Scalar>::zero(); n],
        ));
    }
    let mut obj = vec![<BigRational as Scalar>::zero(); n];
    for (x, c) in m.entries() {
        obj[x] = <BigRational as Scalar>::from_f64(c);
    }
    lip_dual_lp::<BigRational>(&obj, n, pointed.basepoint, |x, y| {
        <BigRational as Scalar>::from_f64(pointed.space.dist(x, y))
    })
}

/// Runs both solvers and certifies that the gap is within `tol`.
///
/// A gap beyond `tol` is reported as an error: on finite instances strong
/// duality is exact, so a visible gap means a solver bug, not a property of
/// the input.
pub fn norm_certificate(m: &Molecule, pointed: &PointedSpace, tol: f64) -> Result<NormCertificate> {
    let primal = primal_norm(m, &pointed.space)?;
    let dual = dual_norm(m, pointed)?;
    let gap = (primal.value - dual.value).abs();
    if gap > tol {
        return Err(Error::DualityGap {
            primal: primal.value,
            dual: dual.value,
            gap,
            tol,
        });
    }
    // Re-check the certificate against its own invariants.
    let k = lipschitz_constant(&dual.witness, &pointed.space);
    if k > 1.0 + tol.max(1e-12) {
        return Err(Error::Solver(format!(
            "dual witness has Lipschitz constant {k} > 1"
        )));
    }
    let recombined = Molecule::combine(
        &primal
            .decomposition
            .iter()
            .map(|&(p, q, a)| (a, Molecule::elementary(p, q)))
            .collect::<Vec<_>>(),
    );
    let residual = Molecule::combine(&[(1.0, recombined), (-1.0, m.clone())]);
    if residual.total_mass() > 1e-9 {
        return Err(Error::Solver(format!(
            "primal decomposition misses the molecule by {}",
            residual.total_mass()
        )));
    }
    Ok(NormCertificate {
        value: primal.value,
        primal_value: primal.value,
        dual_value: dual.value,
        primal: primal.decomposition,
        dual_witness: dual.witness,
        gap,
    })
}

/// Dual norm computed on support(m) ∪ {e} only; equals the full-space norm.
pub fn support_restricted_norm(m: &Molecule, pointed: &PointedSpace) -> Result<f64> {
    let n = pointed.space.len();
    check_support(m, n)?;
    if m.is_zero() {
        return Ok(0.0);
    }
    let mut points = m.support();
    if !points.contains(&pointed.basepoint) {
        points.push(pointed.basepoint);
        points.sort_unstable();
    }
    let sub = pointed.space.subspace(&points);
    let e_sub = points
        .iter()
        .position(|&x| x == pointed.basepoint)
        .expect("basepoint included");
    let mut entries = std::collections::BTreeMap::new();
    for (x, c) in m.entries() {
        let k = points.iter().position(|&y| y == x).unwrap();
        entries.insert(k, c);
    }
    let m_sub = Molecule::new(entries).expect("zero-sum preserved by reindexing");
    let sub_pointed = PointedSpace::new(sub, e_sub)?;
    Ok(dual_norm(&m_sub, &sub_pointed)?.value)
}

/// x ↦ m_{xe}; the basepoint maps to the zero molecule.
pub fn canonical_embed(x: usize, pointed: &PointedSpace) -> Result<Molecule> {
    if x >= pointed.space.len() {
        return Err(Error::PointOutOfRange {
            index: x,
            n: pointed.space.len(),
        });
    }
    Ok(Molecule::elementary(x, pointed.basepoint))
}

/// sup { |Σ λ_i f(x_i)| : f in the unit ball of Lip₀ over {x_i} ∪ {e} }.
///
/// Equals the free-space norm of Σ λ_i m_{x_i e}.
pub fn holmes_norm(coeffs: &[(f64, usize)], pointed: &PointedSpace) -> Result<f64> {
    let n = pointed.space.len();
    for &(_, x) in coeffs {
        if x >= n {
            return Err(Error::PointOutOfRange { index: x, n });
        }
    }
    let mut points: Vec<usize> = coeffs.iter().map(|&(_, x)| x).collect();
    points.push(pointed.basepoint);
    points.sort_unstable();
    points.dedup();
    let sub = pointed.space.subspace(&points);
    let e_sub = points
        .iter()
        .position(|&x| x == pointed.basepoint)
        .unwrap();
    let mut obj = vec![0.0; points.len()];
    for &(lambda, x) in coeffs {
        let k = points.iter().position(|&y| y == x).unwrap();
        obj[k] += lambda;
    }
    if obj.iter().all(|&c| c == 0.0) {
        return Ok(0.0);
    }
    let (plus, _) = lip_dual_lp::<f64>(&obj, points.len(), e_sub, |x, y| sub.dist(x, y))?;
    let neg: Vec<f64> = obj.iter().map(|c| -c).collect();
    let (minus, _) = lip_dual_lp::<f64>(&neg, points.len(), e_sub, |x, y| sub.dist(x, y))?;
    Ok(plus.max(minus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::MetricCode;

    fn space(d: &[&[f64]]) -> FiniteMetricSpace {
        let code = MetricCode::new(d.iter().map(|r| r.to_vec()).collect());
        FiniteMetricSpace::from_code(&code, 1e-9).unwrap()
    }

    fn collinear() -> FiniteMetricSpace {
        space(&[&[0.0, 1.0, 2.0], &[1.0, 0.0, 1.0], &[2.0, 1.0, 0.0]])
    }

    #[test]
    fn elementary_norm_is_distance_primal() {
        let s = collinear();
        let m = Molecule::elementary(0, 2);
        let sol = primal_norm(&m, &s).unwrap();
        assert!((sol.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn elementary_norm_is_distance_dual() {
        let s = collinear();
        let p = PointedSpace::new(s, 1).unwrap();
        let m = Molecule::elementary(0, 2);
        let sol = dual_norm(&m, &p).unwrap();
        assert!((sol.value - 2.0).abs() < 1e-9);
        let f = &sol.witness;
        assert!((f.value(0) - f.value(2) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn zero_molecule() {
        let s = collinear();
        let p = PointedSpace::new(s.clone(), 0).unwrap();
        assert_eq!(primal_norm(&Molecule::zero(), &s).unwrap().value, 0.0);
        assert!(primal_norm(&Molecule::zero(), &s)
            .unwrap()
            .decomposition
            .is_empty());
        assert_eq!(dual_norm(&Molecule::zero(), &p).unwrap().value, 0.0);
    }

    #[test]
    fn two_elementary_terms_on_collinear_triple() {
        // m = m_01 + m_21: transports mass from both ends to the middle.
        let s = collinear();
        let m = Molecule::combine(&[
            (1.0, Molecule::elementary(0, 1)),
            (1.0, Molecule::elementary(2, 1)),
        ]);
        let sol = primal_norm(&m, &s).unwrap();
        assert!((sol.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn certificate_has_tiny_gap() {
        let s = collinear();
        let p = PointedSpace::new(s, 0).unwrap();
        let m = Molecule::combine(&[
            (1.5, Molecule::elementary(0, 1)),
            (-0.5, Molecule::elementary(2, 0)),
        ]);
        let cert = norm_certificate(&m, &p, 1e-9).unwrap();
        assert!(cert.gap <= 1e-9);
    }

    #[test]
    fn support_restriction_matches_full_norm() {
        // 5-point space; molecule supported on two points.
        let s = space(&[
            &[0.0, 1.0, 1.5, 1.2, 1.9],
            &[1.0, 0.0, 1.1, 1.4, 1.3],
            &[1.5, 1.1, 0.0, 1.6, 1.0],
            &[1.2, 1.4, 1.6, 0.0, 1.7],
            &[1.9, 1.3, 1.0, 1.7, 0.0],
        ]);
        let p = PointedSpace::new(s, 3).unwrap();
        let m = Molecule::elementary(0, 4);
        let full = dual_norm(&m, &p).unwrap().value;
        let restricted = support_restricted_norm(&m, &p).unwrap();
        assert!((full - restricted).abs() < 1e-9);
        assert!((full - 1.9).abs() < 1e-9);
    }

    #[test]
    fn canonical_embedding_is_isometric() {
        let s = collinear();
        let p = PointedSpace::new(s.clone(), 1).unwrap();
        assert!(canonical_embed(1, &p).unwrap().is_zero());
        let mx = canonical_embed(0, &p).unwrap();
        let my = canonical_embed(2, &p).unwrap();
        let diff = Molecule::combine(&[(1.0, mx), (-1.0, my)]);
        let v = primal_norm(&diff, &s).unwrap().value;
        assert!((v - s.dist(0, 2)).abs() < 1e-9);
    }

    #[test]
    fn holmes_single_term() {
        let s = space(&[&[0.0, 2.0], &[2.0, 0.0]]);
        let p = PointedSpace::new(s, 0).unwrap();
        let v = holmes_norm(&[(1.0, 1)], &p).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
    }

    #[test]
    fn holmes_zero_coefficients() {
        let s = collinear();
        let p = PointedSpace::new(s, 0).unwrap();
        let v = holmes_norm(&[(0.0, 1), (0.0, 2)], &p).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn exact_mode_agrees_with_float() {
        let s = collinear();
        let p = PointedSpace::new(s.clone(), 0).unwrap();
        let m = Molecule::combine(&[
            (0.5, Molecule::elementary(0, 1)),
            (0.25, Molecule::elementary(2, 1)),
        ]);
        let (pv, _) = primal_norm_exact(&m, &s).unwrap();
        let (dv, _) = dual_norm_exact(&m, &p).unwrap();
        assert_eq!(pv, dv);
        let float = primal_norm(&m, &s).unwrap().value;
        assert!((Scalar::to_f64(&pv) - float).abs() < 1e-9);
    }
}
