//! Local differential privacy and log-lift of a channel `P_{Y|S}`.
//!
//! Both measures are reported in bits unless a [`LogBase`] says otherwise.
//! Zero handling: a `0/0` ratio is skipped, a `p/0` ratio with `p > 0` makes
//! the measure `f64::INFINITY`.

use std::fmt;
use std::str::FromStr;

use crate::dist::{Dist, JointDistribution, ProbMatrix};
use crate::reduction::{linear_reduce, Alpha, SoftChannel};

/// Unit for information quantities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LogBase {
    #[default]
    Bits,
    Nats,
}

impl LogBase {
    pub fn log(self, v: f64) -> f64 {
        match self {
            LogBase::Bits => v.log2(),
            LogBase::Nats => v.ln(),
        }
    }

    /// Converts a value measured in bits into this unit.
    pub fn from_bits(self, bits: f64) -> f64 {
        match self {
            LogBase::Bits => bits,
            LogBase::Nats => bits * std::f64::consts::LN_2,
        }
    }
}

impl fmt::Display for LogBase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LogBase::Bits => "bits",
            LogBase::Nats => "nats",
        })
    }
}

impl FromStr for LogBase {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bits" => Ok(LogBase::Bits),
            "nats" => Ok(LogBase::Nats),
            other => Err(format!("unknown log base `{other}` (expected bits or nats)")),
        }
    }
}

/// `max_{x,s,s'} log P_{Y|S}(x|s) / P_{Y|S}(x|s')`, in bits.
pub fn ldp(channel: &SoftChannel) -> f64 {
    ldp_in(channel, LogBase::Bits)
}

pub fn ldp_in(channel: &SoftChannel, base: LogBase) -> f64 {
    let rows = channel.rows();
    let n_y = channel.y_alphabet().len();
    let mut worst: f64 = 0.0;
    for y in 0..n_y {
        let (lo, hi) = rows
            .iter()
            .map(|r| r[y])
            .fold((f64::INFINITY, 0.0_f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi == 0.0 {
            continue;
        }
        if lo == 0.0 {
            return f64::INFINITY;
        }
        worst = worst.max(base.log(hi / lo));
    }
    worst
}

/// Log-lift with the `(y, s)` pair attaining it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLift {
    pub value: f64,
    /// `(y index, s index)`; `None` when every lift is exactly one.
    pub witness: Option<(usize, usize)>,
}

/// `max_{x,s} |log P_{Y|S}(x|s) / P_Y(x)|`, in bits.
pub fn log_lift(channel: &SoftChannel, p_s: &Dist) -> LogLift {
    log_lift_in(channel, p_s, LogBase::Bits)
}

pub fn log_lift_in(channel: &SoftChannel, p_s: &Dist, base: LogBase) -> LogLift {
    let p_y = channel.output_marginal(p_s);
    let mut best = LogLift { value: 0.0, witness: None };
    for (y, &py) in p_y.iter().enumerate() {
        if py == 0.0 {
            continue;
        }
        for (s, row) in channel.rows().iter().enumerate() {
            let v = if row[y] == 0.0 {
                f64::INFINITY
            } else {
                base.log(row[y] / py).abs()
            };
            if v > best.value {
                best = LogLift { value: v, witness: Some((y, s)) };
                if v.is_infinite() {
                    return best;
                }
            }
        }
    }
    best
}

/// `(1 - α) L^LDP(S -> X)`, the first-order estimate of the reduced LDP.
pub fn ldp_first_order(j: &JointDistribution, alpha: Alpha) -> f64 {
    alpha.retention() * ldp(&SoftChannel::original(j))
}

/// `(1 - α) L^LL(S -> X)`.
pub fn loglift_first_order(j: &JointDistribution, alpha: Alpha) -> f64 {
    alpha.retention() * log_lift(&SoftChannel::original(j), j.marginal_s()).value
}

/// `max_{x,s,s'} (P_{Y|S}(x|s) - P_{Y|S}(x|s')) / P_Y(x)`, the linearized LDP.
///
/// Shrinks by exactly `1 - α` under [`linear_reduce`].
pub fn ldp_linearized(channel: &SoftChannel, p_s: &Dist) -> f64 {
    let p_y = channel.output_marginal(p_s);
    let mut worst: f64 = 0.0;
    for (y, &py) in p_y.iter().enumerate() {
        if py == 0.0 {
            continue;
        }
        let col = channel.rows().iter().map(|r| r[y]);
        let (lo, hi) = col.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        worst = worst.max((hi - lo) / py);
    }
    worst
}

/// Entrywise `|P_{Y|S}(y|s) - P_Y(y)|`, rows indexed by `s`.
pub fn l1_deviation(channel: &SoftChannel, p_s: &Dist) -> ProbMatrix {
    let p_y = channel.output_marginal(p_s);
    channel
        .rows()
        .iter()
        .map(|row| row.iter().zip(&p_y).map(|(v, m)| (v - m).abs()).collect())
        .collect()
}

/// Per output symbol, `Σ_s P_S(s) (P_{Y|S}(y|s) - P_Y(y))^2`.
pub fn conditional_variance(channel: &SoftChannel, p_s: &Dist) -> Vec<f64> {
    let p_y = channel.output_marginal(p_s);
    let mut var = vec![0.0; p_y.len()];
    for (row, &w) in channel.rows().iter().zip(p_s.values()) {
        for ((acc, v), m) in var.iter_mut().zip(row).zip(&p_y) {
            *acc += w * (v - m) * (v - m);
        }
    }
    var
}

/// Privacy of a released variable measured against `S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrivacyReport {
    pub base: LogBase,
    pub ldp: f64,
    pub log_lift: f64,
    pub ldp_first_order: f64,
    pub loglift_first_order: f64,
    /// `(y index, s index)` attaining the log-lift.
    pub loglift_argmax: Option<(usize, usize)>,
}

impl PrivacyReport {
    /// Privacy of releasing `X` itself; the first-order fields equal the exact ones.
    pub fn of_original(j: &JointDistribution, base: LogBase) -> Self {
        let ch = SoftChannel::original(j);
        let ll = log_lift_in(&ch, j.marginal_s(), base);
        let ldp = ldp_in(&ch, base);
        PrivacyReport {
            base,
            ldp,
            log_lift: ll.value,
            ldp_first_order: ldp,
            loglift_first_order: ll.value,
            loglift_argmax: ll.witness,
        }
    }

    /// Privacy of the reduced channel at `alpha`, with the `(1 - α)` estimates.
    pub fn of_reduction(j: &JointDistribution, alpha: Alpha, base: LogBase) -> Self {
        let original = Self::of_original(j, base);
        let ch = linear_reduce(j, alpha);
        let ll = log_lift_in(&ch, j.marginal_s(), base);
        PrivacyReport {
            base,
            ldp: ldp_in(&ch, base),
            log_lift: ll.value,
            ldp_first_order: alpha.retention() * original.ldp,
            loglift_first_order: alpha.retention() * original.log_lift,
            loglift_argmax: ll.witness,
        }
    }
}
