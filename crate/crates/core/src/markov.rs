//! Mechanisms that only look at `X` (the chain `S - X - Y`).
//!
//! The unique such mechanism realizing the reduced channel keeps each input
//! with probability `1 - α(1 - P_X(x))` and otherwise resamples from `P_X`.

use crate::dist::{check_row_stochastic, check_shape, Alphabet, Dist, ProbMatrix, INPUT_TOLERANCE};
use crate::error::{Error, Result};
use crate::reduction::Alpha;
use crate::utility::{DistortionMatrix, DtvConvention};

/// A transition matrix `P_{Y|X}`; row `x'` is the output law for input `x'`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovMechanism {
    x_alphabet: Alphabet,
    rows: ProbMatrix,
}

impl MarkovMechanism {
    /// Wraps user-supplied rows (stochastic within 1e-9, renormalized).
    pub fn from_rows(x_alphabet: Alphabet, rows: ProbMatrix) -> Result<Self> {
        check_shape(&rows, x_alphabet.len(), x_alphabet.len())?;
        check_row_stochastic(&rows, INPUT_TOLERANCE)?;
        let rows = rows
            .into_iter()
            .map(|r| {
                let sum: f64 = r.iter().sum();
                r.into_iter().map(|v| v / sum).collect()
            })
            .collect();
        Ok(MarkovMechanism { x_alphabet, rows })
    }

    pub(crate) fn from_trusted(x_alphabet: Alphabet, rows: ProbMatrix) -> Self {
        MarkovMechanism { x_alphabet, rows }
    }

    /// The identity channel `Y = X`.
    pub fn identity(x_alphabet: Alphabet) -> Self {
        let n = x_alphabet.len();
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        MarkovMechanism { x_alphabet, rows }
    }

    pub fn x_alphabet(&self) -> &Alphabet {
        &self.x_alphabet
    }

    pub fn rows(&self) -> &ProbMatrix {
        &self.rows
    }

    /// `P_{Y|X}(y | x_in)`.
    pub fn prob(&self, y: usize, x_in: usize) -> f64 {
        self.rows[x_in][y]
    }

    /// Output law `P_Y = P_X P_{Y|X}`.
    pub fn output_marginal(&self, p_x: &Dist) -> Vec<f64> {
        let mut p_y = vec![0.0; self.x_alphabet.len()];
        for (row, &w) in self.rows.iter().zip(p_x.values()) {
            for (acc, v) in p_y.iter_mut().zip(row) {
                *acc += w * v;
            }
        }
        p_y
    }
}

/// Builds the `S`-blind mechanism realizing the reduction at `alpha`.
pub fn markov_mechanism(x_alphabet: &Alphabet, p_x: &Dist, alpha: Alpha) -> Result<MarkovMechanism> {
    if p_x.len() != x_alphabet.len() {
        return Err(Error::DimensionMismatch("P_X does not match alphabet".into()));
    }
    let a = alpha.value();
    let n = p_x.len();
    let rows = (0..n)
        .map(|x_in| {
            (0..n)
                .map(|y| {
                    if y == x_in {
                        1.0 - a * (1.0 - p_x[y])
                    } else {
                        a * p_x[y]
                    }
                })
                .collect()
        })
        .collect();
    Ok(MarkovMechanism::from_trusted(x_alphabet.clone(), rows))
}

/// Closed form `α Σ_{x != x'} P_X(x) P_X(x') d(x', x)`.
pub fn markov_expected_distortion(p_x: &Dist, alpha: Alpha, d: &DistortionMatrix) -> Result<f64> {
    d.check_size(p_x.len())?;
    let mut total = 0.0;
    for x_in in 0..p_x.len() {
        for y in 0..p_x.len() {
            if y != x_in {
                total += p_x[y] * p_x[x_in] * d.get(x_in, y);
            }
        }
    }
    Ok(alpha.value() * total)
}

/// Closed form `α (1 - Σ P_X²)` (half) or twice that (full).
pub fn markov_dtv(p_x: &Dist, alpha: Alpha, convention: DtvConvention) -> f64 {
    let half = alpha.value() * (1.0 - p_x.collision());
    match convention {
        DtvConvention::Half => half,
        DtvConvention::Full => 2.0 * half,
    }
}
