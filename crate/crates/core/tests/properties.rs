use std::collections::BTreeMap;

use proptest::prelude::*;

use lipfree::molecule::Molecule;
use lipfree::norm::{dual_norm, primal_norm};
use lipfree::space::{FiniteMetricSpace, MetricCode, PointedSpace};

fn dyadic_space(levels: Vec<u8>) -> FiniteMetricSpace {
    // Distances in [1, 2] satisfy every triangle inequality.
    let n = (1.0 + (2.0 * levels.len() as f64).sqrt()).ceil() as usize;
    let mut d = vec![vec![0.0; n]; n];
    let mut it = levels.into_iter().cycle();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 1.0 + it.next().unwrap() as f64 / 8.0;
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    let code = MetricCode {
        n,
        d,
        labels: None,
        basepoint: None,
    };
    FiniteMetricSpace::from_code(&code, 1e-9).unwrap()
}

fn molecule_from(coeffs: Vec<i8>, n: usize) -> Option<Molecule> {
    let mut entries = BTreeMap::new();
    for (x, c) in coeffs.into_iter().take(n - 1).enumerate() {
        if c != 0 {
            entries.insert(x, c as f64 / 4.0);
        }
    }
    // Balance the total mass onto the last point.
    let sum: f64 = entries.values().sum();
    if sum != 0.0 {
        entries.insert(n - 1, -sum);
    }
    if entries.is_empty() {
        return None;
    }
    Some(Molecule::new(entries).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn primal_and_dual_agree(
        levels in prop::collection::vec(0u8..=8, 3..=10),
        coeffs in prop::collection::vec(-8i8..=8, 3..=5),
    ) {
        let space = dyadic_space(levels);
        let Some(m) = molecule_from(coeffs, space.len()) else {
            return Ok(());
        };
        let pointed = PointedSpace::new(space.clone(), 0).unwrap();
        let p = primal_norm(&m, &space).unwrap().value;
        let d = dual_norm(&m, &pointed).unwrap().value;
        prop_assert!((p - d).abs() <= 1e-9, "primal {p} vs dual {d}");
    }

    #[test]
    fn norm_is_subadditive(
        levels in prop::collection::vec(0u8..=8, 3..=10),
        a in prop::collection::vec(-8i8..=8, 3..=5),
        b in prop::collection::vec(-8i8..=8, 3..=5),
    ) {
        let space = dyadic_space(levels);
        let n = space.len();
        let (Some(ma), Some(mb)) = (molecule_from(a, n), molecule_from(b, n)) else {
            return Ok(());
        };
        let sum = Molecule::combine(&[(1.0, ma.clone()), (1.0, mb.clone())]);
        let na = primal_norm(&ma, &space).unwrap().value;
        let nb = primal_norm(&mb, &space).unwrap().value;
        let ns = primal_norm(&sum, &space).unwrap().value;
        prop_assert!(ns <= na + nb + 1e-9);
    }
}
