//! Molecules: finitely supported real functions summing to zero.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO_SUM_TOL: f64 = 1e-12;

/// A finitely supported function on point indices with coefficients summing
/// to zero. No explicit zero entries are stored.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Molecule {
    entries: BTreeMap<usize, f64>,
}

impl Molecule {
    pub fn zero() -> Self {
        Molecule::default()
    }

    /// Builds a molecule, dropping zero entries and rejecting coefficient
    /// sums beyond 1e-12.
    pub fn new(entries: BTreeMap<usize, f64>) -> Result<Self> {
        let sum: f64 = entries.values().sum();
        if sum.abs() > ZERO_SUM_TOL {
            return Err(Error::NotZeroSum { sum });
        }
        let entries = entries.into_iter().filter(|&(_, c)| c != 0.0).collect();
        Ok(Molecule { entries })
    }

    /// m_pq with m(p)=1, m(q)=-1. For p=q the zero molecule is returned,
    /// matching m_pp = 0.
    pub fn elementary(p: usize, q: usize) -> Self {
        if p == q {
            return Molecule::zero();
        }
        let mut entries = BTreeMap::new();
        entries.insert(p, 1.0);
        entries.insert(q, -1.0);
        Molecule { entries }
    }

    /// Pointwise linear combination of molecules.
    pub fn combine(terms: &[(f64, Molecule)]) -> Self {
        let mut entries: BTreeMap<usize, f64> = BTreeMap::new();
        for (coeff, m) in terms {
            for (&x, &c) in &m.entries {
                *entries.entry(x).or_insert(0.0) += coeff * c;
            }
        }
        entries.retain(|_, c| *c != 0.0);
        Molecule { entries }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Molecule::combine(&[(factor, self.clone())])
    }

    pub fn coefficient(&self, x: usize) -> f64 {
        self.entries.get(&x).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&x, &c)| (x, c))
    }

    pub fn support(&self) -> Vec<usize> {
        self.entries.keys().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of |m(x)| over the support.
    pub fn total_mass(&self) -> f64 {
        self.entries.values().map(|c| c.abs()).sum()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.entries.keys().next_back().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elementary_molecule_definition() {
        let m = Molecule::elementary(0, 1);
        assert_eq!(m.coefficient(0), 1.0);
        assert_eq!(m.coefficient(1), -1.0);
        assert_eq!(m.coefficient(2), 0.0);
    }

    #[test]
    fn elementary_on_equal_points_is_zero() {
        assert!(Molecule::elementary(3, 3).is_zero());
    }

    #[test]
    fn antisymmetry() {
        let s = Molecule::combine(&[
            (1.0, Molecule::elementary(0, 1)),
            (1.0, Molecule::elementary(1, 0)),
        ]);
        assert!(s.is_zero());
    }

    #[test]
    fn telescoping_triple_cancels() {
        let s = Molecule::combine(&[
            (1.0, Molecule::elementary(0, 1)),
            (1.0, Molecule::elementary(1, 2)),
            (1.0, Molecule::elementary(2, 0)),
        ]);
        assert!(s.is_zero());
    }

    #[test]
    fn chain_collapses_to_elementary() {
        let s = Molecule::combine(&[
            (1.0, Molecule::elementary(0, 1)),
            (1.0, Molecule::elementary(1, 2)),
        ]);
        assert_eq!(s, Molecule::elementary(0, 2));
    }

    #[test]
    fn scaling() {
        let m = Molecule::elementary(0, 1).scaled(2.0);
        assert_eq!(m.coefficient(0), 2.0);
        assert_eq!(m.coefficient(1), -2.0);
    }

    #[test]
    fn nonzero_sum_rejected() {
        let mut e = BTreeMap::new();
        e.insert(0, 1.0);
        e.insert(1, -0.5);
        assert!(Molecule::new(e).is_err());
    }
}
