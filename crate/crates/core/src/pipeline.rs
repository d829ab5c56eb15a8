//! The finite-scale reduction pipeline and the equivalence verifier.
//!
//! phi0 maps a metric code through quotient, bounding, diameter
//! normalization, snowflaking, and basepoint adjunction; the result is a
//! pointed concave space whose free space is the value of the reduction.
//! theorem1_check compares three notions of equivalence on a pair of codes
//! and reports whether they agree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isometry::{find_dilatation, find_isometry, find_isometry_fixing, DilatationWitness, IsometryWitness};
use crate::molecule::Molecule;
use crate::norm::{dual_norm, norm_certificate, primal_norm, DualSolution, NormCertificate, PrimalSolution};
use crate::space::{
    bound_transform, normalize_diameter_one, quotient_zero, snowflake, FiniteMetricSpace,
    MetricCode, PointedSpace,
};

/// Distance from the adjoined basepoint to every other point. Any value
/// admissible for all stages works as long as it is fixed; equidistance
/// keeps the basepoint from breaking isometry equivalence.
pub const BASEPOINT_DISTANCE: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// One pipeline stage together with the code it produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: String,
    pub code: MetricCode,
}

/// Audit log of a pipeline run: the input code plus every stage output, in
/// order. Replaying the stages from the input must reproduce each record
/// bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub input: MetricCode,
    pub stages: Vec<StageRecord>,
}

fn adjoin_basepoint(space: &FiniteMetricSpace) -> PointedSpace {
    let n = space.len();
    let mut d = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            d[i][j] = space.dist(i, j);
        }
        d[i][n] = BASEPOINT_DISTANCE;
        d[n][i] = BASEPOINT_DISTANCE;
    }
    PointedSpace {
        space: FiniteMetricSpace::from_matrix_unchecked(d),
        basepoint: n,
    }
}

/// Strict triangle inequality at every triple certifies concavity: a
/// normalized elementary molecule fails to be extreme exactly when some
/// point lies metrically between its endpoints.
fn check_strict_triangles(space: &FiniteMetricSpace) -> Result<()> {
    let n = space.len();
    for p in 0..n {
        for q in (p + 1)..n {
            for r in 0..n {
                if r == p || r == q {
                    continue;
                }
                let slack = space.dist(p, r) + space.dist(r, q) - space.dist(p, q);
                if slack <= 1e-12 {
                    return Err(Error::NotConcave { p, q });
                }
            }
        }
    }
    Ok(())
}

fn run_stages(code: &MetricCode, tol: f64) -> Result<(PointedSpace, Provenance)> {
    if code.n == 0 {
        return Err(Error::EmptySpace);
    }
    let mut stages = Vec::with_capacity(5);
    let quotiented = quotient_zero(code, tol)?;
    stages.push(StageRecord {
        stage: "quotient_zero".into(),
        code: quotiented.to_code(),
    });
    let bounded = bound_transform(&quotiented);
    stages.push(StageRecord {
        stage: "bound_transform".into(),
        code: bounded.to_code(),
    });
    let gadgeted = normalize_diameter_one(&bounded)?;
    stages.push(StageRecord {
        stage: "normalize_diameter_one".into(),
        code: gadgeted.to_code(),
    });
    let snowflaked = snowflake(&gadgeted, 0.5)?;
    stages.push(StageRecord {
        stage: "snowflake_half".into(),
        code: snowflaked.to_code(),
    });
    let pointed = adjoin_basepoint(&snowflaked);
    let mut code_out = pointed.space.to_code();
    code_out.basepoint = Some(pointed.basepoint);
    stages.push(StageRecord {
        stage: "adjoin_basepoint".into(),
        code: code_out,
    });
    check_strict_triangles(&pointed.space)?;
    Ok((
        pointed,
        Provenance {
            input: code.clone(),
            stages,
        },
    ))
}

/// The finite-scale Φ₀: quotient, bound, normalize to diameter 1 with the
/// gadget pair, snowflake at α = 1/2, adjoin the basepoint. The output is
/// verified concave before it is returned.
pub fn phi0(code: &MetricCode, tol: f64) -> Result<PointedSpace> {
    run_stages(code, tol).map(|(p, _)| p)
}

/// Re-runs the pipeline from the logged input and checks every stage
/// reproduces its recorded code exactly.
pub fn replay(provenance: &Provenance, tol: f64) -> Result<PointedSpace> {
    let (pointed, fresh) = run_stages(&provenance.input, tol)?;
    if fresh.stages.len() != provenance.stages.len() {
        return Err(Error::ProvenanceMismatch {
            stage: "stage count".into(),
        });
    }
    for (a, b) in fresh.stages.iter().zip(&provenance.stages) {
        if a != b {
            return Err(Error::ProvenanceMismatch {
                stage: b.stage.clone(),
            });
        }
    }
    Ok(pointed)
}

/// The free space over Φ₀(code), represented by its concave pointed base
/// and the norm solvers, plus the transform log that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FreeSpaceInstance {
    pub pointed: PointedSpace,
    pub provenance: Provenance,
}

impl FreeSpaceInstance {
    pub fn norm(&self, m: &Molecule, tol: f64) -> Result<NormCertificate> {
        norm_certificate(m, &self.pointed, tol)
    }

    pub fn primal(&self, m: &Molecule) -> Result<PrimalSolution> {
        primal_norm(m, &self.pointed.space)
    }

    pub fn dual(&self, m: &Molecule) -> Result<DualSolution> {
        dual_norm(m, &self.pointed)
    }

    pub fn replay(&self, tol: f64) -> Result<PointedSpace> {
        replay(&self.provenance, tol)
    }
}

/// The finite-scale Φ: wraps the Φ₀ base so norm queries delegate to the
/// free-space solvers.
pub fn phi(code: &MetricCode, tol: f64) -> Result<FreeSpaceInstance> {
    let (pointed, provenance) = run_stages(code, tol)?;
    Ok(FreeSpaceInstance {
        pointed,
        provenance,
    })
}

/// Per-assertion verdicts for the three-way equivalence, plus whether they
/// agree. Assertion (3) is the finite analog: a base isometry of the Φ₀
/// outputs mapping basepoint to basepoint, which extends linearly to the
/// free spaces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theorem1Report {
    pub spaces_isometric: bool,
    pub space_witness: Option<IsometryWitness>,
    pub free_spaces_isometric: bool,
    pub free_witness: Option<DilatationWitness>,
    pub basepoint_isometry: bool,
    pub basepoint_witness: Option<IsometryWitness>,
    pub agree: bool,
}

/// Checks the three-way equivalence on a pair of codes: (1) isometry of the
/// quotiented coded spaces, (2) linear isometry of the free spaces over the
/// Φ₀ outputs, decided through a dilatation search on the concave bases,
/// (3) a basepoint-preserving isometry of the Φ₀ outputs. Disagreement is
/// reported, not hidden.
pub fn theorem1_check(d: &MetricCode, dprime: &MetricCode, tol: f64) -> Result<Theorem1Report> {
    let x = quotient_zero(d, tol)?;
    let y = quotient_zero(dprime, tol)?;
    let space_witness = find_isometry(&x, &y, tol);

    let px = phi0(d, tol)?;
    let py = phi0(dprime, tol)?;
    // Both bases were verified concave by phi0, so the dilatation search
    // decides free-space isometry.
    let free_witness = find_dilatation(&px.space, &py.space, tol);
    let basepoint_witness = find_isometry_fixing(
        &px.space,
        &py.space,
        &[(px.basepoint, py.basepoint)],
        tol,
    );

    let v1 = space_witness.is_some();
    let v2 = free_witness.is_some();
    let v3 = basepoint_witness.is_some();
    Ok(Theorem1Report {
        spaces_isometric: v1,
        space_witness,
        free_spaces_isometric: v2,
        free_witness,
        basepoint_isometry: v3,
        basepoint_witness,
        agree: v1 == v2 && v2 == v3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weaver::is_concave;

    fn code(d: &[&[f64]]) -> MetricCode {
        MetricCode::new(d.iter().map(|r| r.to_vec()).collect())
    }

    #[test]
    fn one_point_code_gives_four_points() {
        let p = phi0(&code(&[&[0.0]]), 1e-9).unwrap();
        assert_eq!(p.space.len(), 4);
        assert_eq!(p.basepoint, 3);
        assert!((p.space.diameter() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn output_passes_lp_concavity() {
        let c = code(&[&[0.0, 1.0, 2.0], &[1.0, 0.0, 1.0], &[2.0, 1.0, 0.0]]);
        let p = phi0(&c, 1e-9).unwrap();
        let r = is_concave(&p.space, p.basepoint, 1e-9).unwrap();
        assert!(r.concave, "failures: {:?}", r.failures);
    }

    #[test]
    fn zero_distance_pair_is_quotiented() {
        let c = code(&[&[0.0, 0.0, 1.0], &[0.0, 0.0, 1.0], &[1.0, 1.0, 0.0]]);
        let p = phi0(&c, 1e-9).unwrap();
        // 2 quotiented points + gadget pair + basepoint.
        assert_eq!(p.space.len(), 5);
    }

    #[test]
    fn phi0_is_deterministic() {
        let c = code(&[&[0.0, 1.5, 0.75], &[1.5, 0.0, 1.25], &[0.75, 1.25, 0.0]]);
        let a = phi(&c, 1e-9).unwrap();
        let b = phi(&c, 1e-9).unwrap();
        assert_eq!(
            serde_json::to_vec(&a.provenance).unwrap(),
            serde_json::to_vec(&b.provenance).unwrap()
        );
    }

    #[test]
    fn replay_reproduces_the_space() {
        let c = code(&[&[0.0, 2.0, 1.0], &[2.0, 0.0, 1.5], &[1.0, 1.5, 0.0]]);
        let inst = phi(&c, 1e-9).unwrap();
        let replayed = inst.replay(1e-9).unwrap();
        assert_eq!(replayed.space.matrix(), inst.pointed.space.matrix());
    }

    #[test]
    fn replay_detects_tampering() {
        let c = code(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let mut inst = phi(&c, 1e-9).unwrap();
        inst.provenance.stages[1].code.d[0][1] += 0.25;
        assert!(matches!(
            inst.replay(1e-9),
            Err(Error::ProvenanceMismatch { .. })
        ));
    }

    #[test]
    fn elementary_norm_matches_base_distance() {
        let c = code(&[&[0.0, 1.0, 2.0], &[1.0, 0.0, 1.0], &[2.0, 1.0, 0.0]]);
        let inst = phi(&c, 1e-9).unwrap();
        let n = inst.pointed.space.len();
        for p in 0..n {
            for q in (p + 1)..n {
                let cert = inst.norm(&Molecule::elementary(p, q), 1e-9).unwrap();
                assert!((cert.value - inst.pointed.space.dist(p, q)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_molecule_has_zero_norm() {
        let inst = phi(&code(&[&[0.0, 1.0], &[1.0, 0.0]]), 1e-9).unwrap();
        let cert = inst.norm(&Molecule::zero(), 1e-9).unwrap();
        assert_eq!(cert.value, 0.0);
    }

    #[test]
    fn permuted_codes_give_isometric_outputs() {
        let c = code(&[&[0.0, 1.0, 1.25], &[1.0, 0.0, 0.5], &[1.25, 0.5, 0.0]]);
        let perm = code(&[&[0.0, 0.5, 1.0], &[0.5, 0.0, 1.25], &[1.0, 1.25, 0.0]]);
        let a = phi0(&c, 1e-9).unwrap();
        let b = phi0(&perm, 1e-9).unwrap();
        assert!(find_isometry(&a.space, &b.space, 1e-9).is_some());
    }

    #[test]
    fn theorem1_identity_pair_all_true() {
        let c = code(&[&[0.0, 1.0, 1.25], &[1.0, 0.0, 0.5], &[1.25, 0.5, 0.0]]);
        let r = theorem1_check(&c, &c, 1e-9).unwrap();
        assert!(r.spaces_isometric && r.free_spaces_isometric && r.basepoint_isometry);
        assert!(r.agree);
    }

    #[test]
    fn theorem1_permuted_pair_all_true() {
        let c = code(&[&[0.0, 1.0, 1.25], &[1.0, 0.0, 0.5], &[1.25, 0.5, 0.0]]);
        let perm = code(&[&[0.0, 0.5, 1.0], &[0.5, 0.0, 1.25], &[1.0, 1.25, 0.0]]);
        let r = theorem1_check(&c, &perm, 1e-9).unwrap();
        assert!(r.spaces_isometric && r.free_spaces_isometric && r.basepoint_isometry);
        assert!(r.agree);
    }

    #[test]
    fn theorem1_perturbed_pair_all_false() {
        let c = code(&[&[0.0, 1.0, 1.25], &[1.0, 0.0, 0.5], &[1.25, 0.5, 0.0]]);
        let bad = code(&[&[0.0, 1.0, 1.25], &[1.0, 0.0, 0.625], &[1.25, 0.625, 0.0]]);
        let r = theorem1_check(&c, &bad, 1e-9).unwrap();
        assert!(!r.spaces_isometric && !r.free_spaces_isometric && !r.basepoint_isometry);
        assert!(r.agree);
    }

    #[test]
    fn theorem1_size_mismatch_all_false() {
        let a = code(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let b = code(&[&[0.0, 1.0, 2.0], &[1.0, 0.0, 1.0], &[2.0, 1.0, 0.0]]);
        let r = theorem1_check(&a, &b, 1e-9).unwrap();
        assert!(r.agree);
        assert!(!r.spaces_isometric);
    }
}
