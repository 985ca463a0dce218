//! Empirical joints from records, and reproducible record sanitization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::dist::{Alphabet, JointDistribution};
use crate::error::{Error, Result};
use crate::markov::MarkovMechanism;
use crate::nonmarkov::Mechanism;

/// Identifier of the generator behind [`SanitizerState`], written to output metadata.
pub const RNG_ID: &str = "chacha20";

/// One `(s, x)` row of a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Record {
    pub s: String,
    pub x: String,
}

impl Record {
    pub fn new(s: impl Into<String>, x: impl Into<String>) -> Self {
        Record { s: s.into(), x: x.into() }
    }
}

/// Maximum-likelihood joint from record counts. Every declared symbol must
/// be observed at least once.
pub fn estimate_joint(records: &[Record], s_alphabet: &Alphabet, x_alphabet: &Alphabet) -> Result<JointDistribution> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut counts = vec![vec![0u64; x_alphabet.len()]; s_alphabet.len()];
    for r in records {
        let s = s_alphabet.require(&r.s)?;
        let x = x_alphabet.require(&r.x)?;
        counts[s][x] += 1;
    }
    let n = records.len() as f64;
    let p = counts
        .into_iter()
        .map(|row| row.into_iter().map(|c| c as f64 / n).collect())
        .collect();
    JointDistribution::from_joint(s_alphabet.clone(), x_alphabet.clone(), p)
}

/// Alphabets in order of first appearance.
pub fn alphabets_from_records(records: &[Record]) -> Result<(Alphabet, Alphabet)> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut s: Vec<&str> = Vec::new();
    let mut x: Vec<&str> = Vec::new();
    for r in records {
        if !s.contains(&r.s.as_str()) {
            s.push(&r.s);
        }
        if !x.contains(&r.x.as_str()) {
            x.push(&r.x);
        }
    }
    Ok((Alphabet::new(s)?, Alphabet::new(x)?))
}

/// Anything that yields an output law for an `(s, x)` record.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyMechanism {
    Markov(MarkovMechanism),
    NonMarkov(Mechanism),
}

impl AnyMechanism {
    fn slice(&self, s: usize, x: usize) -> &[f64] {
        match self {
            AnyMechanism::Markov(m) => &m.rows()[x],
            AnyMechanism::NonMarkov(m) => m.slice(s, x),
        }
    }

    pub fn x_alphabet(&self) -> &Alphabet {
        match self {
            AnyMechanism::Markov(m) => m.x_alphabet(),
            AnyMechanism::NonMarkov(m) => m.x_alphabet(),
        }
    }

    /// `None` for Markov mechanisms, which accept any secret label.
    pub fn s_alphabet(&self) -> Option<&Alphabet> {
        match self {
            AnyMechanism::Markov(_) => None,
            AnyMechanism::NonMarkov(m) => Some(m.s_alphabet()),
        }
    }
}

impl From<MarkovMechanism> for AnyMechanism {
    fn from(m: MarkovMechanism) -> Self {
        AnyMechanism::Markov(m)
    }
}

impl From<Mechanism> for AnyMechanism {
    fn from(m: Mechanism) -> Self {
        AnyMechanism::NonMarkov(m)
    }
}

/// Seeded sampler applying a mechanism record by record.
///
/// A state is single-owner: draws advance the generator, so identical seeds
/// and identical record sequences give identical outputs.
#[derive(Debug, Clone)]
pub struct SanitizerState {
    mechanism: AnyMechanism,
    seed: u64,
    rng: ChaCha20Rng,
    draw_count: u64,
}

impl SanitizerState {
    pub fn new(mechanism: impl Into<AnyMechanism>, seed: u64) -> Self {
        SanitizerState {
            mechanism: mechanism.into(),
            seed,
            rng: ChaCha20Rng::seed_from_u64(seed),
            draw_count: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn draw_count(&self) -> u64 {
        self.draw_count
    }

    pub fn mechanism(&self) -> &AnyMechanism {
        &self.mechanism
    }

    /// Draws an output index for an `(s, x)` pair given by index.
    pub fn draw(&mut self, s: usize, x: usize) -> usize {
        let u: f64 = self.rng.random();
        self.draw_count += 1;
        inverse_cdf(self.mechanism.slice(s, x), u)
    }

    /// Sanitizes `records`, returning one output label per record.
    pub fn sanitize(&mut self, records: &[Record]) -> Result<Vec<String>> {
        // Resolve every label first so a bad record consumes no draws.
        let x_alphabet = self.mechanism.x_alphabet().clone();
        let idx = records
            .iter()
            .map(|r| {
                let s = match self.mechanism.s_alphabet() {
                    Some(a) => a.require(&r.s)?,
                    None => 0,
                };
                Ok((s, x_alphabet.require(&r.x)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(idx
            .into_iter()
            .map(|(s, x)| x_alphabet.label(self.draw(s, x)).to_string())
            .collect())
    }
}

/// Smallest index whose cumulative mass exceeds `u`; falls back to the last
/// index with positive mass when round-off leaves the total below `u`.
fn inverse_cdf(weights: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}
