//! Privacy-utility tradeoff curves over a grid of `α`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::dist::JointDistribution;
use crate::error::{Error, Result};
use crate::markov::markov_mechanism;
use crate::nonmarkov::{
    distortion_optimal_mechanism, induced_channel, tv_optimal_mechanism, verify_realization, Mechanism,
};
use crate::privacy::{ldp_in, log_lift_in, LogBase, PrivacyReport};
use crate::reduction::{linear_reduce, Alpha};
use crate::utility::{DistortionMatrix, UtilityReport};

/// Which mechanism realizes the reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Markov,
    NonmarkovTv,
    NonmarkovDistortion,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Markov, Family::NonmarkovTv, Family::NonmarkovDistortion];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Markov => "markov",
            Family::NonmarkovTv => "nonmarkov_tv",
            Family::NonmarkovDistortion => "nonmarkov_distortion",
        })
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "markov" => Ok(Family::Markov),
            "nonmarkov_tv" => Ok(Family::NonmarkovTv),
            "nonmarkov_distortion" => Ok(Family::NonmarkovDistortion),
            other => Err(format!(
                "unknown family `{other}` (expected markov, nonmarkov_tv or nonmarkov_distortion)"
            )),
        }
    }
}

/// Parses `start:stop:step` (the stop value is always included) or a
/// comma-separated list. Values must lie in `(0, 1]` and increase strictly.
pub fn parse_grid(spec: &str) -> Result<Vec<Alpha>> {
    let bad = |msg: String| Error::Parse { line: 0, msg };
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| bad(format!("`{v}` is not a number")));
    let values: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, step] = parts.as_slice() else {
            return Err(bad(format!("grid `{spec}` must be start:stop:step")));
        };
        let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
        if ![start, stop, step].iter().all(|v| v.is_finite()) || step <= 0.0 || stop < start {
            return Err(bad(format!("grid `{spec}` needs step > 0 and stop >= start")));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        let mut v: Vec<f64> = (0..=n).map(|i| start + i as f64 * step).collect();
        // Drop a last step that lands within round-off of `stop`, then append `stop`.
        if v.last().is_some_and(|&l| (stop - l).abs() <= 1e-9 * step.max(1.0)) {
            v.pop();
        }
        v.push(stop);
        v
    } else {
        spec.split(',').map(num).collect::<Result<_>>()?
    };
    if values.is_empty() {
        return Err(bad("empty grid".into()));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(bad(format!("grid `{spec}` is not strictly increasing")));
    }
    values.into_iter().map(Alpha::new).collect()
}

/// One row of a tradeoff table. Information quantities are in `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffPoint {
    pub alpha: f64,
    pub ldp_y: f64,
    pub loglift_y: f64,
    pub ldp_approx: f64,
    pub loglift_approx: f64,
    pub dtv_half: f64,
    pub dtv_full: f64,
    pub expected_distortion: f64,
    pub mi: f64,
    pub utility_loss: f64,
    pub family: Family,
}

/// Builds the mechanism of `family` at `alpha`. The distortion family needs `d`.
pub fn build_mechanism(
    j: &JointDistribution,
    alpha: Alpha,
    family: Family,
    d: Option<&DistortionMatrix>,
) -> Result<Mechanism> {
    match family {
        Family::Markov => {
            let m = markov_mechanism(j.x_alphabet(), j.marginal_x(), alpha)?;
            Ok(Mechanism::from_markov(&m, j.s_alphabet()))
        }
        Family::NonmarkovTv => Ok(tv_optimal_mechanism(j, alpha)),
        Family::NonmarkovDistortion => {
            let d = d.ok_or_else(|| {
                Error::InvalidDistortion("nonmarkov_distortion needs a distortion matrix".into())
            })?;
            distortion_optimal_mechanism(j, alpha, d)
        }
    }
}

/// Evaluates one grid point. `d` scores expected distortion (Hamming if `None`)
/// and drives the distortion family.
pub fn tradeoff_point(
    j: &JointDistribution,
    alpha: Alpha,
    family: Family,
    d: Option<&DistortionMatrix>,
    base: LogBase,
) -> Result<TradeoffPoint> {
    let m = build_mechanism(j, alpha, family, d)?;
    let report = verify_realization(&m, j, alpha)?;
    if !report.passes() {
        return Err(Error::LpInfeasible(format!(
            "{family} mechanism at alpha={} misses the target channel by {:e}",
            alpha.value(),
            report.constraint_residual.max(report.stochastic_residual)
        )));
    }
    // Every family realizes the same P_{Y|S}, so privacy is read off the target.
    let target = linear_reduce(j, alpha);
    let estimate = PrivacyReport::of_reduction(j, alpha, base);
    let hamming;
    let d = match d {
        Some(d) => d,
        None => {
            hamming = DistortionMatrix::hamming(j.n_x());
            &hamming
        }
    };
    let u = UtilityReport::compute(&induced_channel(&m, j)?, j.marginal_x(), d, base)?;
    Ok(TradeoffPoint {
        alpha: alpha.value(),
        ldp_y: ldp_in(&target, base),
        loglift_y: log_lift_in(&target, j.marginal_s(), base).value,
        ldp_approx: estimate.ldp_first_order,
        loglift_approx: estimate.loglift_first_order,
        dtv_half: u.dtv_half,
        dtv_full: u.dtv_full,
        expected_distortion: u.expected_distortion,
        mi: u.mutual_information,
        utility_loss: u.utility_loss,
        family,
    })
}

/// All `(family, α)` points, grouped by family in the given order, then by `α`.
/// Points are computed in parallel; output order does not depend on scheduling.
pub fn sweep(
    j: &JointDistribution,
    grid: &[Alpha],
    families: &[Family],
    d: Option<&DistortionMatrix>,
    base: LogBase,
) -> Result<Vec<TradeoffPoint>> {
    let jobs: Vec<(Family, Alpha)> = families
        .iter()
        .flat_map(|&f| grid.iter().map(move |&a| (f, a)))
        .collect();
    jobs.par_iter()
        .map(|&(f, a)| tradeoff_point(j, a, f, d, base))
        .collect()
}

/// Column names; the two information columns carry the unit, e.g. `mi_bits`.
pub fn tsv_header(base: LogBase) -> Vec<String> {
    let mut h: Vec<String> = [
        "alpha",
        "ldp_y",
        "loglift_y",
        "ldp_approx",
        "loglift_approx",
        "dtv_half",
        "dtv_full",
        "expected_distortion",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    h.push(format!("mi_{base}"));
    h.push(format!("utility_loss_{base}"));
    h.push("family".into());
    h
}

/// Formats like C's `%.9g`.
pub fn format_sig(v: f64) -> String {
    const DIGITS: i32 = 9;
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() { "nan".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // Round first so the exponent reflects the printed mantissa.
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Tab-separated table with a header row; numbers to 9 significant digits.
pub fn to_tsv(points: &[TradeoffPoint], base: LogBase) -> String {
    let mut out = tsv_header(base).join("\t");
    out.push('\n');
    for p in points {
        let nums = [
            p.alpha,
            p.ldp_y,
            p.loglift_y,
            p.ldp_approx,
            p.loglift_approx,
            p.dtv_half,
            p.dtv_full,
            p.expected_distortion,
            p.mi,
            p.utility_loss,
        ];
        for v in nums {
            out.push_str(&format_sig(v));
            out.push('\t');
        }
        out.push_str(&p.family.to_string());
        out.push('\n');
    }
    out
}

/// Reads a table written by [`to_tsv`], returning the unit found in its header.
pub fn parse_tsv(text: &str) -> Result<(LogBase, Vec<TradeoffPoint>)> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let header = lines.next().map(|(_, h)| h).unwrap_or_default();
    let base = [LogBase::Bits, LogBase::Nats]
        .into_iter()
        .find(|&b| header.split('\t').eq(tsv_header(b).iter().map(String::as_str)))
        .ok_or_else(|| Error::Parse { line: 1, msg: "missing tradeoff header".into() })?;
    let width = tsv_header(base).len();
    let points = lines
        .map(|(i, l)| {
            let bad = |msg: String| Error::Parse { line: i + 1, msg };
            let f: Vec<&str> = l.split('\t').collect();
            if f.len() != width {
                return Err(bad(format!("expected {width} columns")));
            }
            let n = f[..10]
                .iter()
                .map(|v| v.parse::<f64>().map_err(|_| bad(format!("`{v}` is not a number"))))
                .collect::<Result<Vec<_>>>()?;
            Ok(TradeoffPoint {
                alpha: n[0],
                ldp_y: n[1],
                loglift_y: n[2],
                ldp_approx: n[3],
                loglift_approx: n[4],
                dtv_half: n[5],
                dtv_full: n[6],
                expected_distortion: n[7],
                mi: n[8],
                utility_loss: n[9],
                family: f[10].parse().map_err(bad)?,
            })
        })
        .collect::<Result<_>>()?;
    Ok((base, points))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demo;

    fn grid(v: &[f64]) -> Vec<Alpha> {
        v.iter().map(|&a| Alpha::new(a).unwrap()).collect()
    }

    #[test]
    fn grid_parsing() {
        let g: Vec<f64> = parse_grid("0.2:1:0.2").unwrap().iter().map(|a| a.value()).collect();
        assert_eq!(g.len(), 5);
        assert_eq!(*g.last().unwrap(), 1.0);
        let g: Vec<f64> = parse_grid("0.011:1:0.05").unwrap().iter().map(|a| a.value()).collect();
        assert_eq!(g.len(), 21);
        assert!((g[10] - 0.511).abs() < 1e-12);
        assert_eq!(g[20], 1.0);
        assert_eq!(parse_grid("0.5, 1").unwrap().len(), 2);
        assert!(parse_grid("0:1:0.5").is_err());
        assert!(parse_grid("0.5,0.4").is_err());
        assert!(parse_grid("0.1:1").is_err());
        assert!(parse_grid("0.1:1:0").is_err());
        assert!(parse_grid("0.5,1.5").is_err());
    }

    #[test]
    fn sig_format() {
        assert_eq!(format_sig(0.0), "0");
        assert_eq!(format_sig(1.0), "1");
        assert_eq!(format_sig(0.724598), "0.724598");
        assert_eq!(format_sig(2.321928094887362), "2.32192809");
        assert_eq!(format_sig(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig(1e-20), "1e-20");
        assert_eq!(format_sig(123456789012.0), "1.23456789e+11");
        assert_eq!(format_sig(0.9999999999), "1");
        assert_eq!(format_sig(-0.25), "-0.25");
        assert_eq!(format_sig(f64::INFINITY), "inf");
    }

    #[test]
    fn demo_rows() {
        let j = demo::joint();
        let ham = DistortionMatrix::hamming(4);
        let pts = sweep(&j, &grid(&[0.511, 1.0]), &Family::ALL, Some(&ham), LogBase::Bits).unwrap();
        assert_eq!(pts.len(), 6);
        let m = &pts[0];
        assert_eq!((m.family, m.alpha), (Family::Markov, 0.511));
        assert!((m.dtv_full - 0.724598).abs() < 1e-6);
        for p in pts.iter().filter(|p| p.alpha == 1.0) {
            assert_eq!(p.ldp_y, 0.0);
            assert_eq!(p.loglift_y, 0.0);
        }
        // Only the S-blind mechanism forgets X entirely at full privacy.
        assert!(pts[1].mi < 1e-12);
        assert!(pts[3].mi > 0.5);
        let tv = &pts[2];
        assert_eq!(tv.family, Family::NonmarkovTv);
        assert!((tv.dtv_half - 0.21 * 0.511).abs() < 1e-12);
        // Under Hamming d the distortion family hits the same TV optimum.
        assert!((pts[4].expected_distortion - pts[4].dtv_half).abs() < 1e-12);
        assert!((pts[4].dtv_half - tv.dtv_half).abs() < 1e-12);
    }

    #[test]
    fn tsv_round_trip() {
        let j = demo::joint();
        let pts = sweep(&j, &grid(&[0.25, 0.5]), &[Family::NonmarkovTv], None, LogBase::Nats).unwrap();
        let text = to_tsv(&pts, LogBase::Nats);
        assert!(text.starts_with("alpha\tldp_y"));
        assert!(text.lines().next().unwrap().contains("\tmi_nats\tutility_loss_nats\t"));
        let (base, back) = parse_tsv(&text).unwrap();
        assert_eq!(base, LogBase::Nats);
        assert_eq!(back.len(), 2);
        for (a, b) in pts.iter().zip(&back) {
            assert_eq!(a.family, b.family);
            assert!((a.mi - b.mi).abs() <= 1e-8 * a.mi.abs().max(1e-300));
        }
        assert!(parse_tsv("alpha\n").is_err());
    }

    #[test]
    fn distortion_family_requires_matrix() {
        let j = demo::joint();
        let a = Alpha::new(0.5).unwrap();
        assert!(matches!(
            build_mechanism(&j, a, Family::NonmarkovDistortion, None),
            Err(Error::InvalidDistortion(_))
        ));
    }
}
