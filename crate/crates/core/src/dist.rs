//! Finite alphabets and joint distributions over `(S, X)`.
//!
//! A [`JointDistribution`] is validated once on construction and is immutable
//! afterwards. Inputs are accepted when they sum to one within
//! [`INPUT_TOLERANCE`] and are then renormalized, so hand-entered decimals such
//! as `0.3 * 0.2` land on exact downstream identities.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Tolerance on user-supplied probability sums.
pub const INPUT_TOLERANCE: f64 = 1e-9;

/// Row-major probability matrix.
pub type ProbMatrix = Vec<Vec<f64>>;

/// Ordered set of distinct symbol labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl Alphabet {
    pub fn new<I, L>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = L>,
        L: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if index.insert(l.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        Ok(Alphabet { labels, index })
    }

    /// Alphabet `0, 1, ..., n-1` (labels are the decimal indices).
    pub fn indexed(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn require(&self, label: &str) -> Result<usize> {
        self.index_of(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }
}

/// A probability vector over one alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct Dist {
    values: Vec<f64>,
}

impl Dist {
    /// Validates and renormalizes. Sums must be within [`INPUT_TOLERANCE`] of one.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        for (i, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::NegativeEntry { row: 0, col: i, value: v });
            }
        }
        let sum: f64 = values.iter().sum();
        if (sum - 1.0).abs() > INPUT_TOLERANCE {
            return Err(Error::SumNotOne(sum));
        }
        Ok(Dist {
            values: values.into_iter().map(|v| v / sum).collect(),
        })
    }

    pub(crate) fn from_trusted(values: Vec<f64>) -> Self {
        Dist { values }
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyAlphabet);
        }
        Ok(Dist { values: vec![1.0 / n as f64; n] })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sum of squared probabilities.
    pub fn collision(&self) -> f64 {
        self.values.iter().map(|p| p * p).sum()
    }
}

impl std::ops::Index<usize> for Dist {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// Joint law `P_{S,X}` over two finite alphabets.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    s_alphabet: Alphabet,
    x_alphabet: Alphabet,
    p: ProbMatrix,
    p_s: Dist,
    p_x: Dist,
}

impl JointDistribution {
    /// Builds a joint from a matrix indexed `(s, x)`.
    pub fn from_joint(s_alphabet: Alphabet, x_alphabet: Alphabet, p: ProbMatrix) -> Result<Self> {
        check_shape(&p, s_alphabet.len(), x_alphabet.len())?;
        let mut sum = 0.0;
        for (r, row) in p.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::NegativeEntry { row: r, col: c, value: v });
                }
                sum += v;
            }
        }
        if (sum - 1.0).abs() > INPUT_TOLERANCE {
            return Err(Error::SumNotOne(sum));
        }
        let p: ProbMatrix = p
            .into_iter()
            .map(|row| row.into_iter().map(|v| v / sum).collect())
            .collect();

        let p_s: Vec<f64> = p.iter().map(|row| row.iter().sum()).collect();
        let mut p_x = vec![0.0; x_alphabet.len()];
        for row in &p {
            for (acc, v) in p_x.iter_mut().zip(row) {
                *acc += v;
            }
        }
        if let Some(i) = p_s.iter().position(|&v| v <= 0.0) {
            return Err(Error::DeadSymbol(s_alphabet.label(i).to_string()));
        }
        if let Some(i) = p_x.iter().position(|&v| v <= 0.0) {
            return Err(Error::DeadSymbol(x_alphabet.label(i).to_string()));
        }
        Ok(JointDistribution {
            s_alphabet,
            x_alphabet,
            p,
            p_s: Dist::from_trusted(p_s),
            p_x: Dist::from_trusted(p_x),
        })
    }

    /// Builds `P_{S,X}(s,x) = P_S(s) P_{X|S}(x|s)`.
    pub fn from_conditional(
        s_alphabet: Alphabet,
        x_alphabet: Alphabet,
        p_x_given_s: &[Vec<f64>],
        p_s: &Dist,
    ) -> Result<Self> {
        check_shape(p_x_given_s, s_alphabet.len(), x_alphabet.len())?;
        if p_s.len() != s_alphabet.len() {
            return Err(Error::DimensionMismatch(format!(
                "P_S has {} entries, alphabet has {}",
                p_s.len(),
                s_alphabet.len()
            )));
        }
        check_row_stochastic(p_x_given_s, INPUT_TOLERANCE)?;
        let joint = p_x_given_s
            .iter()
            .zip(p_s.values())
            .map(|(row, &ps)| {
                let sum: f64 = row.iter().sum();
                row.iter().map(|v| ps * v / sum).collect()
            })
            .collect();
        Self::from_joint(s_alphabet, x_alphabet, joint)
    }

    /// Product joint `P_S ⊗ P_X`.
    pub fn independent(
        s_alphabet: Alphabet,
        x_alphabet: Alphabet,
        p_s: &Dist,
        p_x: &Dist,
    ) -> Result<Self> {
        let rows = vec![p_x.values().to_vec(); s_alphabet.len()];
        Self::from_conditional(s_alphabet, x_alphabet, &rows, p_s)
    }

    pub fn s_alphabet(&self) -> &Alphabet {
        &self.s_alphabet
    }

    pub fn x_alphabet(&self) -> &Alphabet {
        &self.x_alphabet
    }

    pub fn n_s(&self) -> usize {
        self.s_alphabet.len()
    }

    pub fn n_x(&self) -> usize {
        self.x_alphabet.len()
    }

    /// `P_{S,X}(s, x)`.
    pub fn p(&self, s: usize, x: usize) -> f64 {
        self.p[s][x]
    }

    pub fn matrix(&self) -> &ProbMatrix {
        &self.p
    }

    pub fn marginal_s(&self) -> &Dist {
        &self.p_s
    }

    pub fn marginal_x(&self) -> &Dist {
        &self.p_x
    }

    /// `P_{X|S}(x|s)`.
    pub fn x_given_s(&self, x: usize, s: usize) -> f64 {
        self.p[s][x] / self.p_s[s]
    }

    /// `P_{S|X}(s|x)`.
    pub fn s_given_x(&self, s: usize, x: usize) -> f64 {
        self.p[s][x] / self.p_x[x]
    }

    /// Rows indexed by `s`, each a distribution over `x`.
    pub fn cond_x_given_s(&self) -> ProbMatrix {
        (0..self.n_s())
            .map(|s| (0..self.n_x()).map(|x| self.x_given_s(x, s)).collect())
            .collect()
    }

    /// Rows indexed by `x`, each a distribution over `s`.
    pub fn cond_s_given_x(&self) -> ProbMatrix {
        (0..self.n_x())
            .map(|x| (0..self.n_s()).map(|s| self.s_given_x(s, x)).collect())
            .collect()
    }
}

pub(crate) fn check_shape(m: &[Vec<f64>], rows: usize, cols: usize) -> Result<()> {
    if m.len() != rows || m.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch(format!(
            "expected a {rows}x{cols} matrix"
        )));
    }
    Ok(())
}

pub(crate) fn check_row_stochastic(m: &[Vec<f64>], tol: f64) -> Result<()> {
    for (r, row) in m.iter().enumerate() {
        for (c, &v) in row.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::NegativeEntry { row: r, col: c, value: v });
            }
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::RowNotStochastic { row: r, sum });
        }
    }
    Ok(())
}
