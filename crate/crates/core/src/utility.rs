//! Utility of a released `Y` relative to the original `X`.
//!
//! Total variation is measured against the identity channel. Two conventions
//! are reported: `half = 1 - Σ_x P_X(x) P_{Y|X}(x|x)` and the plain ℓ1 sum
//! `full = Σ_{x,x'} P_X(x') |P_{Y|X}(x|x') - [x = x']|`, which is exactly
//! twice `half`. Published tradeoff curves use `full`.

use std::fmt;
use std::str::FromStr;

use crate::dist::{Dist, ProbMatrix};
use crate::error::{Error, Result};
use crate::markov::MarkovMechanism;
use crate::privacy::LogBase;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtvConvention {
    /// `1 - Σ P_X(x) P_{Y|X}(x|x)`.
    Half,
    /// ℓ1 distance to the identity channel; twice [`DtvConvention::Half`].
    Full,
}

impl fmt::Display for DtvConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DtvConvention::Half => "half",
            DtvConvention::Full => "full",
        })
    }
}

impl FromStr for DtvConvention {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "half" => Ok(DtvConvention::Half),
            "full" => Ok(DtvConvention::Full),
            other => Err(format!("unknown TV convention `{other}`")),
        }
    }
}

/// Cost `d(x_in, y)` of releasing `y` when the record held `x_in`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionMatrix {
    d: ProbMatrix,
}

impl DistortionMatrix {
    /// Requires a square, finite, nonnegative matrix with a zero diagonal.
    pub fn new(d: Vec<Vec<f64>>) -> Result<Self> {
        let n = d.len();
        if n == 0 || d.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidDistortion("matrix must be square and nonempty".into()));
        }
        for (i, row) in d.iter().enumerate() {
            for (k, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidDistortion(format!("d({i},{k}) = {v}")));
                }
                if i == k && v != 0.0 {
                    return Err(Error::InvalidDistortion(format!("d({i},{i}) = {v}, must be 0")));
                }
            }
        }
        Ok(DistortionMatrix { d })
    }

    pub fn hamming(n: usize) -> Self {
        DistortionMatrix {
            d: (0..n)
                .map(|i| (0..n).map(|k| if i == k { 0.0 } else { 1.0 }).collect())
                .collect(),
        }
    }

    pub fn zero(n: usize) -> Self {
        DistortionMatrix { d: vec![vec![0.0; n]; n] }
    }

    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }

    pub fn get(&self, x_in: usize, y: usize) -> f64 {
        self.d[x_in][y]
    }

    pub fn rows(&self) -> &ProbMatrix {
        &self.d
    }

    /// True when `d(a, c) <= d(a, b) + d(b, c)` for all triples.
    pub fn satisfies_triangle_inequality(&self) -> bool {
        let n = self.len();
        (0..n).all(|a| {
            (0..n).all(|b| (0..n).all(|c| self.d[a][c] <= self.d[a][b] + self.d[b][c] + 1e-12))
        })
    }

    pub(crate) fn check_size(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::InvalidDistortion(format!(
                "matrix is {0}x{0}, alphabet has {n} symbols",
                self.len()
            )));
        }
        Ok(())
    }
}

/// `(half, full)` total variation to the identity channel.
pub fn dtv(channel: &MarkovMechanism, p_x: &Dist) -> (f64, f64) {
    let kept: f64 = (0..p_x.len()).map(|x| p_x[x] * channel.prob(x, x)).sum();
    let half = 1.0 - kept;
    (half, 2.0 * half)
}

/// The ℓ1 sum `Σ P_X(x') |P_{Y|X}(x|x') - [x = x']|`, computed entry by entry.
pub fn dtv_l1(channel: &MarkovMechanism, p_x: &Dist) -> f64 {
    channel
        .rows()
        .iter()
        .enumerate()
        .map(|(x_in, row)| {
            let spread: f64 = row
                .iter()
                .enumerate()
                .map(|(y, &v)| (v - if y == x_in { 1.0 } else { 0.0 }).abs())
                .sum();
            p_x[x_in] * spread
        })
        .sum()
}

/// `Σ_{x',x} P_X(x') P_{Y|X}(x|x') d(x', x)`.
pub fn expected_distortion(channel: &MarkovMechanism, p_x: &Dist, d: &DistortionMatrix) -> Result<f64> {
    d.check_size(p_x.len())?;
    Ok(channel
        .rows()
        .iter()
        .enumerate()
        .map(|(x_in, row)| {
            p_x[x_in] * row.iter().enumerate().map(|(y, v)| v * d.get(x_in, y)).sum::<f64>()
        })
        .sum())
}

/// Shannon entropy with `0 log 0 = 0`.
pub fn entropy(p: &Dist, base: LogBase) -> f64 {
    -p.values()
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * base.log(v))
        .sum::<f64>()
}

/// `I(X;Y)` for `X ~ p_x` and `Y` drawn through `channel`.
pub fn mutual_information(channel: &MarkovMechanism, p_x: &Dist, base: LogBase) -> f64 {
    let p_y = channel.output_marginal(p_x);
    let mut total = 0.0;
    for (x_in, row) in channel.rows().iter().enumerate() {
        for (y, &v) in row.iter().enumerate() {
            let joint = p_x[x_in] * v;
            if joint > 0.0 {
                total += joint * base.log(v / p_y[y]);
            }
        }
    }
    // Clamp the float noise around independence.
    total.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityReport {
    pub base: LogBase,
    pub dtv_half: f64,
    pub dtv_full: f64,
    pub expected_distortion: f64,
    pub mutual_information: f64,
    pub entropy_x: f64,
    /// `H(X) - I(X;Y)`.
    pub utility_loss: f64,
}

impl UtilityReport {
    pub fn compute(
        channel: &MarkovMechanism,
        p_x: &Dist,
        d: &DistortionMatrix,
        base: LogBase,
    ) -> Result<Self> {
        let (dtv_half, dtv_full) = dtv(channel, p_x);
        let mi = mutual_information(channel, p_x, base);
        let h = entropy(p_x, base);
        Ok(UtilityReport {
            base,
            dtv_half,
            dtv_full,
            expected_distortion: expected_distortion(channel, p_x, d)?,
            mutual_information: mi,
            entropy_x: h,
            utility_loss: (h - mi).max(0.0),
        })
    }
}
