//! A small built-in dataset used by the docs, the CLI smoke paths and tests.

use crate::dist::{Alphabet, Dist, JointDistribution};

/// `P_{X|S}` rows of the demo dataset over `S = {1, 2}`, `X = {a, b, c, d}`.
pub const CONDITIONAL: [[f64; 4]; 2] = [[0.2, 0.1, 0.5, 0.2], [0.5, 0.3, 0.1, 0.1]];

/// `P_S` of the demo dataset.
pub const PRIOR: [f64; 2] = [0.3, 0.7];

/// The demo joint distribution, `P_X = (0.41, 0.24, 0.22, 0.13)`.
pub fn joint() -> JointDistribution {
    JointDistribution::from_conditional(
        Alphabet::new(["1", "2"]).expect("static alphabet"),
        Alphabet::new(["a", "b", "c", "d"]).expect("static alphabet"),
        &CONDITIONAL.iter().map(|r| r.to_vec()).collect::<Vec<_>>(),
        &Dist::new(PRIOR.to_vec()).expect("static prior"),
    )
    .expect("static dataset is valid")
}
