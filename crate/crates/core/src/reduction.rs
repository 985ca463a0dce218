//! The linear-reduction target channel `P_{Y|S}`.
//!
//! Each conditional row is pulled toward the marginal:
//! `P_{Y|S}(x|s) = (1 - α) P_{X|S}(x|s) + α P_X(x)`. The output marginal is
//! unchanged, and every deviation `|P_{Y|S}(x|s) - P_Y(x)|` shrinks by exactly
//! `1 - α`.

use crate::dist::{check_row_stochastic, check_shape, Alphabet, Dist, JointDistribution, ProbMatrix, INPUT_TOLERANCE};
use crate::error::{Error, Result};

/// Privacy level in `(0, 1]`; `1` makes the output independent of `S`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Alpha(f64);

impl Alpha {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 && value <= 1.0 {
            Ok(Alpha(value))
        } else {
            Err(Error::AlphaOutOfRange(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - α`, the factor applied to every deviation from the marginal.
    pub fn retention(self) -> f64 {
        1.0 - self.0
    }
}

impl TryFrom<f64> for Alpha {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Alpha::new(v)
    }
}

/// A conditional distribution `P_{Y|S}` with `Y` over the `X` alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftChannel {
    s_alphabet: Alphabet,
    y_alphabet: Alphabet,
    rows: ProbMatrix,
}

impl SoftChannel {
    /// Validates a user-supplied channel; rows must be stochastic within 1e-9.
    pub fn new(s_alphabet: Alphabet, y_alphabet: Alphabet, rows: ProbMatrix) -> Result<Self> {
        check_shape(&rows, s_alphabet.len(), y_alphabet.len())?;
        check_row_stochastic(&rows, INPUT_TOLERANCE)?;
        let rows = rows
            .into_iter()
            .map(|r| {
                let sum: f64 = r.iter().sum();
                r.into_iter().map(|v| v / sum).collect()
            })
            .collect();
        Ok(SoftChannel { s_alphabet, y_alphabet, rows })
    }

    /// The unreduced channel `P_{X|S}` of `j` (the `α = 0` baseline).
    pub fn original(j: &JointDistribution) -> Self {
        SoftChannel {
            s_alphabet: j.s_alphabet().clone(),
            y_alphabet: j.x_alphabet().clone(),
            rows: j.cond_x_given_s(),
        }
    }

    pub fn s_alphabet(&self) -> &Alphabet {
        &self.s_alphabet
    }

    pub fn y_alphabet(&self) -> &Alphabet {
        &self.y_alphabet
    }

    pub fn rows(&self) -> &ProbMatrix {
        &self.rows
    }

    /// `P_{Y|S}(y|s)`.
    pub fn prob(&self, y: usize, s: usize) -> f64 {
        self.rows[s][y]
    }

    /// Output marginal `P_Y(y) = Σ_s P_{Y|S}(y|s) P_S(s)`.
    ///
    /// When every row is the same the common row is returned as is, so a
    /// perfectly private channel measures exactly zero leakage.
    pub fn output_marginal(&self, p_s: &Dist) -> Vec<f64> {
        if self.rows.windows(2).all(|w| w[0] == w[1]) {
            return self.rows[0].clone();
        }
        let mut p_y = vec![0.0; self.y_alphabet.len()];
        for (row, &w) in self.rows.iter().zip(p_s.values()) {
            for (acc, v) in p_y.iter_mut().zip(row) {
                *acc += w * v;
            }
        }
        p_y
    }
}

/// Builds the reduced channel at level `alpha`.
pub fn linear_reduce(j: &JointDistribution, alpha: Alpha) -> SoftChannel {
    let keep = alpha.retention();
    let a = alpha.value();
    let p_x = j.marginal_x();
    let rows = (0..j.n_s())
        .map(|s| {
            (0..j.n_x())
                .map(|x| keep * j.x_given_s(x, s) + a * p_x[x])
                .collect()
        })
        .collect();
    SoftChannel {
        s_alphabet: j.s_alphabet().clone(),
        y_alphabet: j.x_alphabet().clone(),
        rows,
    }
}

/// `P_{S,Y}(s, y) = P_S(s) P_{Y|S}(y|s)`.
///
/// Fails with `DeadSymbol` when some output symbol is never produced.
pub fn induced_joint(channel: &SoftChannel, p_s: &Dist) -> Result<JointDistribution> {
    if p_s.len() != channel.s_alphabet.len() {
        return Err(Error::DimensionMismatch("P_S does not match channel".into()));
    }
    let p = channel
        .rows
        .iter()
        .zip(p_s.values())
        .map(|(row, &w)| row.iter().map(|v| w * v).collect())
        .collect();
    JointDistribution::from_joint(channel.s_alphabet.clone(), channel.y_alphabet.clone(), p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo;
    use crate::testing::{arb_alpha, arb_joint};
    use proptest::prelude::*;

    #[test]
    fn alpha_range() {
        assert!(Alpha::new(0.0).is_err());
        assert!(Alpha::new(-0.1).is_err());
        assert!(Alpha::new(1.0 + 1e-12).is_err());
        assert!(Alpha::new(f64::NAN).is_err());
        assert_eq!(Alpha::new(1.0).unwrap().value(), 1.0);
    }

    #[test]
    fn demo_half_reduction() {
        let j = demo::joint();
        let ch = linear_reduce(&j, Alpha::new(0.5).unwrap());
        assert!((ch.prob(2, 0) - 0.36).abs() < 1e-12);
        let joint = induced_joint(&ch, j.marginal_s()).unwrap();
        assert!((joint.p(0, 2) - 0.108).abs() < 1e-12);
        for (got, want) in joint.marginal_x().values().iter().zip([0.41, 0.24, 0.22, 0.13]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn full_reduction_gives_marginal_rows() {
        let j = demo::joint();
        let ch = linear_reduce(&j, Alpha::new(1.0).unwrap());
        for row in ch.rows() {
            for (got, want) in row.iter().zip([0.41, 0.24, 0.22, 0.13]) {
                assert!((got - want).abs() < 1e-12);
            }
        }
        let joint = induced_joint(&ch, j.marginal_s()).unwrap();
        for s in 0..2 {
            for x in 0..4 {
                let prod = j.marginal_s()[s] * j.marginal_x()[x];
                assert!((joint.p(s, x) - prod).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn independent_joint_is_fixed_point() {
        let j = JointDistribution::independent(
            Alphabet::new(["u", "v"]).unwrap(),
            Alphabet::new(["a", "b", "c"]).unwrap(),
            &Dist::new(vec![0.4, 0.6]).unwrap(),
            &Dist::new(vec![0.5, 0.3, 0.2]).unwrap(),
        )
        .unwrap();
        let ch = linear_reduce(&j, Alpha::new(0.37).unwrap());
        for (a, b) in ch.rows().iter().flatten().zip(j.cond_x_given_s().iter().flatten()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn user_channel_validation() {
        let s = Alphabet::new(["s"]).unwrap();
        let y = Alphabet::new(["a", "b"]).unwrap();
        assert!(SoftChannel::new(s.clone(), y.clone(), vec![vec![0.5, 0.5]]).is_ok());
        assert!(matches!(
            SoftChannel::new(s, y, vec![vec![0.5, 0.6]]),
            Err(Error::RowNotStochastic { .. })
        ));
    }

    proptest! {
        #[test]
        fn marginal_is_preserved(j in arb_joint(6, 6), alpha in arb_alpha()) {
            let ch = linear_reduce(&j, alpha);
            let p_y = ch.output_marginal(j.marginal_s());
            for (a, b) in p_y.iter().zip(j.marginal_x().values()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
            for row in ch.rows() {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }

        #[test]
        fn rows_are_convex_combinations(j in arb_joint(6, 6), alpha in arb_alpha()) {
            let ch = linear_reduce(&j, alpha);
            let a = alpha.value();
            for s in 0..j.n_s() {
                for x in 0..j.n_x() {
                    let want = (1.0 - a) * j.x_given_s(x, s) + a * j.marginal_x()[x];
                    prop_assert!((ch.prob(x, s) - want).abs() <= 1e-15);
                }
            }
        }

        #[test]
        fn reductions_compose(j in arb_joint(5, 5), a in arb_alpha(), b in arb_alpha()) {
            let first = induced_joint(&linear_reduce(&j, a), j.marginal_s()).unwrap();
            let twice = linear_reduce(&first, b);
            let combined = 1.0 - a.retention() * b.retention();
            let once = linear_reduce(&j, Alpha::new(combined).unwrap());
            for (x, y) in twice.rows().iter().flatten().zip(once.rows().iter().flatten()) {
                prop_assert!((x - y).abs() <= 1e-12);
            }
        }
    }
}
