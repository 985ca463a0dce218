//! Mechanisms `P_{Y|S,X}` that may consult the secret.
//!
//! For every secret `s` the input symbols split into
//!
//! * `X⁺(s) = {x : P_X(x) >= P_{X|S}(x|s)}`, which must gain mass, and
//! * `X⁻(s) = {x : P_X(x) <  P_{X|S}(x|s)}`, which must shed mass.
//!
//! A utility-optimal mechanism keeps the largest possible share of each input
//! in place (every `X⁺` symbol is kept, an `X⁻` symbol keeps
//! `1 - α(1 - P_X(x)/P_{X|S}(x|s))`) and ships the surplus of `X⁻(s)` to the
//! deficit of `X⁺(s)`. The shipment is a transportation problem with supplies
//! `α(P_{X|S}(x'|s) - P_X(x'))` and demands `α(P_X(x) - P_{X|S}(x|s))`; any
//! feasible plan minimizes total variation, and the plan minimizing
//! `Σ flow · P_S(s) · d(x', x)` minimizes expected distortion when `d` is a
//! metric.

use crate::dist::{Alphabet, JointDistribution, ProbMatrix};
use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram};
use crate::markov::MarkovMechanism;
use crate::reduction::Alpha;
use crate::utility::DistortionMatrix;

/// Residual threshold used by [`RealizationReport::passes`].
pub const REALIZATION_TOLERANCE: f64 = 1e-9;

/// Per-secret split of the `X` alphabet into gaining and shedding symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportPartition {
    /// `plus[s]` lists `X⁺(s)` in alphabet order.
    pub plus: Vec<Vec<usize>>,
    /// `minus[s]` lists `X⁻(s)` in alphabet order.
    pub minus: Vec<Vec<usize>>,
}

pub fn partition_supports(j: &JointDistribution) -> SupportPartition {
    let p_x = j.marginal_x();
    let mut plus = Vec::with_capacity(j.n_s());
    let mut minus = Vec::with_capacity(j.n_s());
    for s in 0..j.n_s() {
        let (p, m): (Vec<usize>, Vec<usize>) =
            (0..j.n_x()).partition(|&x| p_x[x] >= j.x_given_s(x, s));
        plus.push(p);
        minus.push(m);
    }
    SupportPartition { plus, minus }
}

/// The transportation problem hidden in one `s`-slice.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportBlock {
    pub s: usize,
    /// `(x', α(P_{X|S}(x'|s) - P_X(x')))` for `x' ∈ X⁻(s)`.
    pub supplies: Vec<(usize, f64)>,
    /// `(x, α(P_X(x) - P_{X|S}(x|s)))` for `x ∈ X⁺(s)`.
    pub demands: Vec<(usize, f64)>,
}

impl TransportBlock {
    pub fn new(j: &JointDistribution, alpha: Alpha, s: usize) -> Self {
        let a = alpha.value();
        let p_x = j.marginal_x();
        let mut supplies = Vec::new();
        let mut demands = Vec::new();
        for x in 0..j.n_x() {
            let c = j.x_given_s(x, s);
            if p_x[x] >= c {
                demands.push((x, a * (p_x[x] - c)));
            } else {
                supplies.push((x, a * (c - p_x[x])));
            }
        }
        TransportBlock { s, supplies, demands }
    }

    pub fn total_supply(&self) -> f64 {
        self.supplies.iter().map(|(_, m)| m).sum()
    }

    pub fn total_demand(&self) -> f64 {
        self.demands.iter().map(|(_, d)| d).sum()
    }

    /// Proportional plan `flow(x', x) = m(x') δ(x) / Σδ`, indexed `[supply][demand]`.
    pub fn proportional_plan(&self) -> Vec<Vec<f64>> {
        let total = self.total_demand();
        self.supplies
            .iter()
            .map(|&(_, m)| {
                self.demands
                    .iter()
                    .map(|&(_, d)| if total > 0.0 { m * d / total } else { 0.0 })
                    .collect()
            })
            .collect()
    }

    /// Minimum-cost plan under cost `P_S(s) d(x', x)` per unit of flow.
    pub fn distortion_lp(&self, j: &JointDistribution, d: &DistortionMatrix) -> LinearProgram {
        let ns = self.supplies.len();
        let nd = self.demands.len();
        let weight = j.marginal_s()[self.s];
        let cost = self
            .supplies
            .iter()
            .flat_map(|&(xi, _)| self.demands.iter().map(move |&(y, _)| weight * d.get(xi, y)))
            .collect();
        let mut lp = LinearProgram::minimize(cost);
        for (i, &(_, m)) in self.supplies.iter().enumerate() {
            let mut row = vec![0.0; ns * nd];
            row[i * nd..(i + 1) * nd].iter_mut().for_each(|v| *v = 1.0);
            lp.add_eq(row, m);
        }
        for (k, &(_, dem)) in self.demands.iter().enumerate() {
            let mut row = vec![0.0; ns * nd];
            (0..ns).for_each(|i| row[i * nd + k] = 1.0);
            lp.add_eq(row, dem);
        }
        lp
    }

    /// The linear system on the cross entries `P(x|s,x')`, `x' ∈ X⁻(s)`,
    /// `x ∈ X⁺(s)` (variables ordered supply-major): one row per `X⁺`
    /// symbol (mass received) then one per `X⁻` symbol (mass sent).
    pub fn constraint_system(&self, j: &JointDistribution, alpha: Alpha) -> (Vec<Vec<f64>>, Vec<f64>) {
        let ns = self.supplies.len();
        let nd = self.demands.len();
        let mut a = Vec::with_capacity(ns + nd);
        let mut b = Vec::with_capacity(ns + nd);
        for (k, &(_, dem)) in self.demands.iter().enumerate() {
            let mut row = vec![0.0; ns * nd];
            for (i, &(xi, _)) in self.supplies.iter().enumerate() {
                row[i * nd + k] = j.x_given_s(xi, self.s);
            }
            a.push(row);
            b.push(dem);
        }
        let p_x = j.marginal_x();
        for (i, &(xi, _)) in self.supplies.iter().enumerate() {
            let mut row = vec![0.0; ns * nd];
            row[i * nd..(i + 1) * nd].iter_mut().for_each(|v| *v = 1.0);
            a.push(row);
            b.push(alpha.value() * (1.0 - p_x[xi] / j.x_given_s(xi, self.s)));
        }
        (a, b)
    }
}

/// A randomization tensor `P_{Y|S,X}`, indexed `[s][x_in][y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mechanism {
    s_alphabet: Alphabet,
    x_alphabet: Alphabet,
    tensor: Vec<ProbMatrix>,
}

impl Mechanism {
    /// Validates shape and entries; slices must be stochastic within 1e-9.
    pub fn from_tensor(s_alphabet: Alphabet, x_alphabet: Alphabet, tensor: Vec<ProbMatrix>) -> Result<Self> {
        let nx = x_alphabet.len();
        if tensor.len() != s_alphabet.len()
            || tensor.iter().any(|m| m.len() != nx || m.iter().any(|r| r.len() != nx))
        {
            return Err(Error::DimensionMismatch(format!(
                "expected a {}x{nx}x{nx} tensor",
                s_alphabet.len()
            )));
        }
        for slice in &tensor {
            crate::dist::check_row_stochastic(slice, crate::dist::INPUT_TOLERANCE)?;
        }
        Ok(Mechanism { s_alphabet, x_alphabet, tensor })
    }

    /// The same `P_{Y|X}` used for every secret.
    pub fn from_markov(m: &MarkovMechanism, s_alphabet: &Alphabet) -> Self {
        Mechanism {
            s_alphabet: s_alphabet.clone(),
            x_alphabet: m.x_alphabet().clone(),
            tensor: vec![m.rows().clone(); s_alphabet.len()],
        }
    }

    pub fn s_alphabet(&self) -> &Alphabet {
        &self.s_alphabet
    }

    pub fn x_alphabet(&self) -> &Alphabet {
        &self.x_alphabet
    }

    pub fn tensor(&self) -> &[ProbMatrix] {
        &self.tensor
    }

    pub fn into_tensor(self) -> Vec<ProbMatrix> {
        self.tensor
    }

    /// `P_{Y|S,X}(y | s, x_in)`.
    pub fn prob(&self, y: usize, s: usize, x_in: usize) -> f64 {
        self.tensor[s][x_in][y]
    }

    /// Output law for one `(s, x_in)` record.
    pub fn slice(&self, s: usize, x_in: usize) -> &[f64] {
        &self.tensor[s][x_in]
    }
}

/// Diagonal `P(x|s,x)` that no feasible mechanism can exceed.
fn saturated_diagonal(j: &JointDistribution, alpha: Alpha, s: usize, x: usize) -> f64 {
    let c = j.x_given_s(x, s);
    let p = j.marginal_x()[x];
    if p >= c {
        1.0
    } else {
        1.0 - alpha.value() * (1.0 - p / c)
    }
}

/// Fills one slice from the saturated diagonal and a transport plan.
fn assemble_slice(j: &JointDistribution, alpha: Alpha, block: &TransportBlock, plan: &[Vec<f64>]) -> ProbMatrix {
    let n = j.n_x();
    let s = block.s;
    let mut slice = vec![vec![0.0; n]; n];
    for (x, row) in slice.iter_mut().enumerate() {
        row[x] = saturated_diagonal(j, alpha, s, x);
    }
    for (i, &(xi, _)) in block.supplies.iter().enumerate() {
        let mass = j.x_given_s(xi, s);
        for (k, &(y, _)) in block.demands.iter().enumerate() {
            slice[xi][y] = plan[i][k] / mass;
        }
    }
    slice
}

/// Total-variation-optimal mechanism with the proportional transport plan.
pub fn tv_optimal_mechanism(j: &JointDistribution, alpha: Alpha) -> Mechanism {
    let tensor = (0..j.n_s())
        .map(|s| {
            let block = TransportBlock::new(j, alpha, s);
            let plan = block.proportional_plan();
            assemble_slice(j, alpha, &block, &plan)
        })
        .collect();
    Mechanism {
        s_alphabet: j.s_alphabet().clone(),
        x_alphabet: j.x_alphabet().clone(),
        tensor,
    }
}

/// Expected-distortion-optimal mechanism: one transportation LP per secret.
pub fn distortion_optimal_mechanism(
    j: &JointDistribution,
    alpha: Alpha,
    d: &DistortionMatrix,
) -> Result<Mechanism> {
    d.check_size(j.n_x())?;
    let mut tensor = Vec::with_capacity(j.n_s());
    for s in 0..j.n_s() {
        let block = TransportBlock::new(j, alpha, s);
        let plan = if block.supplies.is_empty() || block.demands.is_empty() {
            vec![vec![0.0; block.demands.len()]; block.supplies.len()]
        } else {
            let sol = lp::solve(&block.distortion_lp(j, d))?;
            if !sol.is_optimal() {
                return Err(Error::LpInfeasible(j.s_alphabet().label(s).to_string()));
            }
            let nd = block.demands.len();
            sol.values.chunks(nd).map(|c| c.to_vec()).collect()
        };
        tensor.push(assemble_slice(j, alpha, &block, &plan));
    }
    Ok(Mechanism {
        s_alphabet: j.s_alphabet().clone(),
        x_alphabet: j.x_alphabet().clone(),
        tensor,
    })
}

/// `P_{Y|X}(y|x') = Σ_s P_{Y|S,X}(y|s,x') P_{S|X}(s|x')`.
pub fn induced_channel(m: &Mechanism, j: &JointDistribution) -> Result<MarkovMechanism> {
    if m.tensor.len() != j.n_s() || m.x_alphabet.len() != j.n_x() {
        return Err(Error::DimensionMismatch("mechanism does not match joint".into()));
    }
    let n = j.n_x();
    let rows = (0..n)
        .map(|x_in| {
            let mut row = vec![0.0; n];
            for s in 0..j.n_s() {
                let w = j.s_given_x(s, x_in);
                for (acc, v) in row.iter_mut().zip(&m.tensor[s][x_in]) {
                    *acc += w * v;
                }
            }
            row
        })
        .collect();
    Ok(MarkovMechanism::from_trusted(j.x_alphabet().clone(), rows))
}

/// How far a mechanism is from realizing the reduced channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealizationReport {
    /// `max_{s,y} |Σ_{x'} P(y|s,x') P_{X|S}(x'|s) - P_{Y|S}(y|s)|`.
    pub constraint_residual: f64,
    /// `max_{s,x'} |Σ_y P(y|s,x') - 1|`.
    pub stochastic_residual: f64,
    /// Smallest tensor entry.
    pub min_entry: f64,
}

impl RealizationReport {
    pub fn passes(&self) -> bool {
        self.constraint_residual <= REALIZATION_TOLERANCE
            && self.stochastic_residual <= REALIZATION_TOLERANCE
            && self.min_entry >= -REALIZATION_TOLERANCE
    }
}

pub fn verify_realization(m: &Mechanism, j: &JointDistribution, alpha: Alpha) -> Result<RealizationReport> {
    if m.tensor.len() != j.n_s() || m.x_alphabet.len() != j.n_x() {
        return Err(Error::DimensionMismatch("mechanism does not match joint".into()));
    }
    let a = alpha.value();
    let p_x = j.marginal_x();
    let mut report = RealizationReport {
        constraint_residual: 0.0,
        stochastic_residual: 0.0,
        min_entry: f64::INFINITY,
    };
    for (s, slice) in m.tensor.iter().enumerate() {
        for row in slice {
            let sum: f64 = row.iter().sum();
            report.stochastic_residual = report.stochastic_residual.max((sum - 1.0).abs());
            report.min_entry = row.iter().fold(report.min_entry, |acc, &v| acc.min(v));
        }
        for y in 0..j.n_x() {
            let produced: f64 = (0..j.n_x()).map(|xi| slice[xi][y] * j.x_given_s(xi, s)).sum();
            let target = j.x_given_s(y, s) - a * (j.x_given_s(y, s) - p_x[y]);
            report.constraint_residual = report.constraint_residual.max((produced - target).abs());
        }
    }
    Ok(report)
}
