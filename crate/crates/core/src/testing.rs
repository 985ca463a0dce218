//! Proptest strategies shared by the unit tests.

use proptest::prelude::*;

use crate::dist::{Alphabet, JointDistribution};
use crate::reduction::Alpha;

/// Random valid joints with up to `max_s x max_x` symbols; about a fifth of
/// the cells are structural zeros, but every marginal stays positive.
pub fn arb_joint(max_s: usize, max_x: usize) -> impl Strategy<Value = JointDistribution> {
    (1..=max_s, 1..=max_x)
        .prop_flat_map(|(ns, nx)| {
            proptest::collection::vec(proptest::collection::vec(0u32..=100, nx), ns)
        })
        .prop_filter_map("needs positive marginals", |w| {
            let ns = w.len();
            let nx = w[0].len();
            let w: Vec<Vec<f64>> = w
                .into_iter()
                .map(|r| r.into_iter().map(|v| if v < 20 { 0.0 } else { v as f64 }).collect())
                .collect();
            let total: f64 = w.iter().flatten().sum();
            if total == 0.0 {
                return None;
            }
            let p = w
                .iter()
                .map(|r| r.iter().map(|v| v / total).collect())
                .collect();
            JointDistribution::from_joint(
                Alphabet::indexed(ns).unwrap(),
                Alphabet::indexed(nx).unwrap(),
                p,
            )
            .ok()
        })
}

pub fn arb_alpha() -> impl Strategy<Value = Alpha> {
    prop_oneof![
        (1u32..=1000).prop_map(|k| Alpha::new(k as f64 / 1000.0).unwrap()),
        Just(Alpha::new(1.0).unwrap()),
    ]
}
