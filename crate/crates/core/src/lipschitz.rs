//! Lipschitz functions on a finite space, their best constants, and the
//! extension of partial 1-Lipschitz data.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::molecule::Molecule;
use crate::space::FiniteMetricSpace;

/// A real function defined on every point of a space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzFunction {
    pub values: Vec<f64>,
}

impl LipschitzFunction {
    pub fn new(values: Vec<f64>) -> Self {
        LipschitzFunction { values }
    }

    pub fn zero(n: usize) -> Self {
        LipschitzFunction {
            values: vec![0.0; n],
        }
    }

    pub fn value(&self, x: usize) -> f64 {
        self.values[x]
    }
}

/// Best Lipschitz constant: max over pairs of |f(x)-f(y)| / d(x,y).
pub fn lipschitz_constant(f: &LipschitzFunction, space: &FiniteMetricSpace) -> f64 {
    let n = space.len();
    assert_eq!(f.values.len(), n, "function not total on the space");
    let mut k: f64 = 0.0;
    for x in 0..n {
        for y in (x + 1)..n {
            let ratio = (f.values[x] - f.values[y]).abs() / space.dist(x, y);
            k = k.max(ratio);
        }
    }
    k
}

/// Extends a partial 1-Lipschitz function by g(x) = min_s (f(s) + d(x,s)).
///
/// The input is checked to be 1-Lipschitz on its domain (within `tol`); the
/// output agrees with it there and has Lipschitz constant at most 1.
pub fn mcshane_extend(
    partial: &BTreeMap<usize, f64>,
    space: &FiniteMetricSpace,
    tol: f64,
) -> Result<LipschitzFunction> {
    let n = space.len();
    for &s in partial.keys() {
        if s >= n {
            return Err(Error::PointOutOfRange { index: s, n });
        }
    }
    for (&p, &fp) in partial {
        for (&q, &fq) in partial {
            if p < q {
                let difference = (fp - fq).abs();
                let distance = space.dist(p, q);
                if difference > distance + tol {
                    return Err(Error::NotLipschitz {
                        p,
                        q,
                        difference,
                        distance,
                    });
                }
            }
        }
    }
    let values = (0..n)
        .map(|x| {
            partial
                .iter()
                .map(|(&s, &fs)| fs + space.dist(x, s))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(LipschitzFunction { values })
}

/// The canonical pairing Σ f(x) m(x).
pub fn pairing(f: &LipschitzFunction, m: &Molecule) -> f64 {
    m.entries().map(|(x, c)| f.values[x] * c).sum()
}
