//! Text formats read and written by the command-line tool.
//!
//! * joint triplets: header `s,x,prob`, then one `s_label,x_label,prob` per line;
//! * conditional form: a `#P_S` block of `s_label,prob` lines, then a `#P_X|S`
//!   block with header `s,<x labels...>` and one row per secret;
//! * records: header `s,x` (or `s,y`), then one `s_label,x_label` per line,
//!   optionally preceded by `#s_alphabet=...` / `#x_alphabet=...` declarations;
//! * mechanisms: `#key=value` metadata lines, header `s,x_in,y,prob`, then
//!   every `(s, x_in, y)` quadruplet;
//! * distortion matrices: header `x_in,<y labels...>`, one row per input label.
//!
//! Lines that are blank or start with `#` (outside the conditional block
//! markers and metadata) are ignored. Labels may not contain commas.

use std::fmt;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::dist::{Alphabet, Dist, JointDistribution};
use crate::error::{Error, Result};
use crate::nonmarkov::Mechanism;
use crate::privacy::LogBase;
use crate::sanitize::{alphabets_from_records, estimate_joint, Record, RNG_ID};
use crate::sweep::Family;
use crate::utility::DistortionMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Joint,
    Conditional,
    Records,
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputFormat::Joint => "joint",
            InputFormat::Conditional => "conditional",
            InputFormat::Records => "records",
        })
    }
}

impl FromStr for InputFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "joint" => Ok(InputFormat::Joint),
            "conditional" => Ok(InputFormat::Conditional),
            "records" => Ok(InputFormat::Records),
            other => Err(format!("unknown input format `{other}`")),
        }
    }
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Non-blank lines with their 1-based line numbers.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn fields(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

fn number(line: usize, field: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| parse_err(line, format!("`{field}` is not a number")))
}

/// Guesses the format from the first meaningful line.
pub fn detect_format(text: &str) -> Option<InputFormat> {
    for (_, l) in lines(text) {
        if l.starts_with("#P_S") {
            return Some(InputFormat::Conditional);
        }
        if l.starts_with('#') {
            continue;
        }
        return match fields(l).as_slice() {
            ["s", "x", "prob"] => Some(InputFormat::Joint),
            ["s", "x"] | ["s", "y"] => Some(InputFormat::Records),
            _ => None,
        };
    }
    None
}

/// Parses a dataset in any input format into a joint distribution.
pub fn load_joint(text: &str, format: Option<InputFormat>) -> Result<JointDistribution> {
    let format = match format.or_else(|| detect_format(text)) {
        Some(f) => f,
        None => {
            return Err(parse_err(
                1,
                "cannot detect format: expected header `s,x,prob`, `s,x` or a `#P_S` block",
            ))
        }
    };
    match format {
        InputFormat::Joint => parse_joint(text),
        InputFormat::Conditional => parse_conditional(text),
        InputFormat::Records => {
            let parsed = parse_records(text)?;
            let (s, x) = parsed.alphabets()?;
            estimate_joint(&parsed.records, &s, &x)
        }
    }
}

fn push_label(labels: &mut Vec<String>, l: &str) -> usize {
    match labels.iter().position(|k| k == l) {
        Some(i) => i,
        None => {
            labels.push(l.to_string());
            labels.len() - 1
        }
    }
}

/// Joint triplets; alphabets are ordered by first appearance and missing
/// cells are zero.
pub fn parse_joint(text: &str) -> Result<JointDistribution> {
    let mut s_labels = Vec::new();
    let mut x_labels = Vec::new();
    let mut cells = Vec::new();
    for (n, l) in lines(text) {
        if l.starts_with('#') {
            continue;
        }
        let f = fields(l);
        if f == ["s", "x", "prob"] {
            continue;
        }
        let [s, x, p] = f.as_slice() else {
            return Err(parse_err(n, "expected `s_label,x_label,prob`"));
        };
        let p = number(n, p)?;
        let si = push_label(&mut s_labels, s);
        let xi = push_label(&mut x_labels, x);
        if cells.iter().any(|&(a, b, _, _)| a == si && b == xi) {
            return Err(parse_err(n, format!("duplicate cell ({s}, {x})")));
        }
        cells.push((si, xi, p, n));
    }
    if cells.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut m = vec![vec![0.0; x_labels.len()]; s_labels.len()];
    for (s, x, p, _) in cells {
        m[s][x] = p;
    }
    JointDistribution::from_joint(Alphabet::new(s_labels)?, Alphabet::new(x_labels)?, m)
}

/// Conditional form: `#P_S` block then `#P_X|S` block.
pub fn parse_conditional(text: &str) -> Result<JointDistribution> {
    enum Section {
        None,
        Prior,
        Conditional,
    }
    let mut section = Section::None;
    let mut prior: Vec<(String, f64)> = Vec::new();
    let mut x_labels: Option<Vec<String>> = None;
    let mut rows: Vec<(usize, String, Vec<f64>)> = Vec::new();
    for (n, l) in lines(text) {
        if l.starts_with("#P_S") {
            section = Section::Prior;
            continue;
        }
        if l.starts_with("#P_X|S") {
            section = Section::Conditional;
            continue;
        }
        if l.starts_with('#') {
            continue;
        }
        let f = fields(l);
        match section {
            Section::None => return Err(parse_err(n, "data before `#P_S` block")),
            Section::Prior => {
                let [s, p] = f.as_slice() else {
                    return Err(parse_err(n, "expected `s_label,prob`"));
                };
                prior.push((s.to_string(), number(n, p)?));
            }
            Section::Conditional => {
                if x_labels.is_none() {
                    if f.first() != Some(&"s") || f.len() < 2 {
                        return Err(parse_err(n, "expected header `s,<x labels...>`"));
                    }
                    x_labels = Some(f[1..].iter().map(|s| s.to_string()).collect());
                    continue;
                }
                let width = x_labels.as_ref().map_or(0, Vec::len);
                if f.len() != width + 1 {
                    return Err(parse_err(n, format!("expected {} fields", width + 1)));
                }
                let vals = f[1..].iter().map(|v| number(n, v)).collect::<Result<Vec<_>>>()?;
                rows.push((n, f[0].to_string(), vals));
            }
        }
    }
    let x_labels = x_labels.ok_or_else(|| parse_err(0, "missing `#P_X|S` block"))?;
    if prior.is_empty() {
        return Err(parse_err(0, "empty `#P_S` block"));
    }
    let s_alphabet = Alphabet::new(prior.iter().map(|(s, _)| s.clone()))?;
    let mut cond = vec![None; s_alphabet.len()];
    for (n, s, vals) in rows {
        let i = s_alphabet
            .index_of(&s)
            .ok_or_else(|| parse_err(n, format!("secret `{s}` not declared in `#P_S`")))?;
        if cond[i].replace(vals).is_some() {
            return Err(parse_err(n, format!("duplicate row for `{s}`")));
        }
    }
    let cond = cond
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.ok_or_else(|| parse_err(0, format!("missing row for `{}`", s_alphabet.label(i)))))
        .collect::<Result<Vec<_>>>()?;
    let p_s = Dist::new(prior.iter().map(|(_, p)| *p).collect())?;
    JointDistribution::from_conditional(s_alphabet, Alphabet::new(x_labels)?, &cond, &p_s)
}

/// A parsed records file.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordsFile {
    pub records: Vec<Record>,
    pub s_alphabet: Option<Alphabet>,
    pub x_alphabet: Option<Alphabet>,
}

impl RecordsFile {
    /// Declared alphabets, falling back to first-appearance order.
    pub fn alphabets(&self) -> Result<(Alphabet, Alphabet)> {
        let (s, x) = alphabets_from_records(&self.records)?;
        Ok((
            self.s_alphabet.clone().unwrap_or(s),
            self.x_alphabet.clone().unwrap_or(x),
        ))
    }
}

pub fn parse_records(text: &str) -> Result<RecordsFile> {
    let mut out = RecordsFile { records: Vec::new(), s_alphabet: None, x_alphabet: None };
    for (n, l) in lines(text) {
        if let Some(rest) = l.strip_prefix('#') {
            if let Some(v) = rest.trim().strip_prefix("s_alphabet=") {
                out.s_alphabet = Some(Alphabet::new(fields(v))?);
            } else if let Some(v) = rest.trim().strip_prefix("x_alphabet=") {
                out.x_alphabet = Some(Alphabet::new(fields(v))?);
            }
            continue;
        }
        match fields(l).as_slice() {
            ["s", "x"] | ["s", "y"] => {}
            [s, x] => out.records.push(Record::new(*s, *x)),
            _ => return Err(parse_err(n, "expected `s_label,x_label`")),
        }
    }
    Ok(out)
}

/// Joint triplets for `j`, with full-precision numbers.
pub fn write_joint(j: &JointDistribution) -> String {
    let mut out = String::from("s,x,prob\n");
    for s in 0..j.n_s() {
        for x in 0..j.n_x() {
            out.push_str(&format!("{},{},{}\n", j.s_alphabet().label(s), j.x_alphabet().label(x), j.p(s, x)));
        }
    }
    out
}

/// Hex SHA-256 of an input file's bytes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Provenance written ahead of a mechanism table.
#[derive(Debug, Clone, PartialEq)]
pub struct MechanismMeta {
    pub alpha: f64,
    pub family: Family,
    pub base: LogBase,
    pub rng: String,
    pub input_sha256: String,
}

impl MechanismMeta {
    pub fn new(alpha: f64, family: Family, input_sha256: impl Into<String>) -> Self {
        MechanismMeta {
            alpha,
            family,
            base: LogBase::Bits,
            rng: RNG_ID.to_string(),
            input_sha256: input_sha256.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MechanismFile {
    pub meta: MechanismMeta,
    pub mechanism: Mechanism,
}

/// Writes every `(s, x_in, y)` entry; probabilities use the shortest
/// representation that parses back to the same `f64`.
pub fn write_mechanism(m: &Mechanism, meta: &MechanismMeta) -> String {
    let mut out = String::new();
    out.push_str("#format=linsan-mechanism-v1\n");
    out.push_str(&format!("#alpha={}\n", meta.alpha));
    out.push_str(&format!("#family={}\n", meta.family));
    out.push_str(&format!("#base={}\n", meta.base));
    out.push_str(&format!("#rng={}\n", meta.rng));
    out.push_str(&format!("#input_sha256={}\n", meta.input_sha256));
    out.push_str(&format!("#s_alphabet={}\n", m.s_alphabet().labels().join(",")));
    out.push_str(&format!("#x_alphabet={}\n", m.x_alphabet().labels().join(",")));
    out.push_str("s,x_in,y,prob\n");
    let xs = m.x_alphabet();
    for (s, slice) in m.tensor().iter().enumerate() {
        for (xi, row) in slice.iter().enumerate() {
            for (y, p) in row.iter().enumerate() {
                out.push_str(&format!("{},{},{},{}\n", m.s_alphabet().label(s), xs.label(xi), xs.label(y), p));
            }
        }
    }
    out
}

pub fn parse_mechanism(text: &str) -> Result<MechanismFile> {
    let mut alpha = None;
    let mut family = None;
    let mut base = LogBase::Bits;
    let mut rng = RNG_ID.to_string();
    let mut input_sha256 = String::new();
    let mut s_alphabet = None;
    let mut x_alphabet = None;
    let mut quads = Vec::new();
    for (n, l) in lines(text) {
        if let Some(rest) = l.strip_prefix('#') {
            let Some((k, v)) = rest.split_once('=') else { continue };
            let (k, v) = (k.trim(), v.trim());
            match k {
                "alpha" => alpha = Some(number(n, v)?),
                "family" => family = Some(v.parse::<Family>().map_err(|e| parse_err(n, e))?),
                "base" => base = v.parse().map_err(|e: String| parse_err(n, e))?,
                "rng" => rng = v.to_string(),
                "input_sha256" => input_sha256 = v.to_string(),
                "s_alphabet" => s_alphabet = Some(Alphabet::new(fields(v))?),
                "x_alphabet" => x_alphabet = Some(Alphabet::new(fields(v))?),
                _ => {}
            }
            continue;
        }
        match fields(l).as_slice() {
            ["s", "x_in", "y", "prob"] => {}
            [s, x, y, p] => quads.push((n, s.to_string(), x.to_string(), y.to_string(), number(n, p)?)),
            _ => return Err(parse_err(n, "expected `s,x_in,y,prob`")),
        }
    }
    let s_alphabet = s_alphabet.ok_or_else(|| parse_err(0, "missing `#s_alphabet=` metadata"))?;
    let x_alphabet = x_alphabet.ok_or_else(|| parse_err(0, "missing `#x_alphabet=` metadata"))?;
    let nx = x_alphabet.len();
    let mut tensor = vec![vec![vec![0.0; nx]; nx]; s_alphabet.len()];
    let mut seen = vec![vec![vec![false; nx]; nx]; s_alphabet.len()];
    for (n, s, x, y, p) in quads {
        let lookup = |a: &Alphabet, l: &str| a.index_of(l).ok_or_else(|| parse_err(n, format!("undeclared label `{l}`")));
        let (si, xi, yi) = (lookup(&s_alphabet, &s)?, lookup(&x_alphabet, &x)?, lookup(&x_alphabet, &y)?);
        if std::mem::replace(&mut seen[si][xi][yi], true) {
            return Err(parse_err(n, format!("duplicate entry ({s}, {x}, {y})")));
        }
        tensor[si][xi][yi] = p;
    }
    let mechanism = Mechanism::from_tensor(s_alphabet, x_alphabet, tensor)?;
    Ok(MechanismFile {
        meta: MechanismMeta {
            alpha: alpha.ok_or_else(|| parse_err(0, "missing `#alpha=` metadata"))?,
            family: family.ok_or_else(|| parse_err(0, "missing `#family=` metadata"))?,
            base,
            rng,
            input_sha256,
        },
        mechanism,
    })
}

/// Distortion matrix whose labels must match `x_alphabet` (any row/column order).
pub fn parse_distortion(text: &str, x_alphabet: &Alphabet) -> Result<DistortionMatrix> {
    let n = x_alphabet.len();
    let mut cols: Option<Vec<usize>> = None;
    let mut d = vec![vec![f64::NAN; n]; n];
    let mut filled = vec![false; n];
    for (ln, l) in lines(text) {
        if l.starts_with('#') {
            continue;
        }
        let f = fields(l);
        let Some(cols) = cols.as_ref() else {
            if f.len() != n + 1 {
                return Err(parse_err(ln, format!("expected header `x_in,<{n} labels>`")));
            }
            cols = Some(f[1..].iter().map(|l| x_alphabet.require(l)).collect::<Result<_>>()?);
            continue;
        };
        if f.len() != n + 1 {
            return Err(parse_err(ln, format!("expected {} fields", n + 1)));
        }
        let r = x_alphabet.require(f[0])?;
        if std::mem::replace(&mut filled[r], true) {
            return Err(parse_err(ln, format!("duplicate row `{}`", f[0])));
        }
        for (&c, v) in cols.iter().zip(&f[1..]) {
            d[r][c] = number(ln, v)?;
        }
    }
    if let Some(r) = filled.iter().position(|f| !f) {
        return Err(parse_err(0, format!("missing distortion row `{}`", x_alphabet.label(r))));
    }
    DistortionMatrix::new(d)
}

pub fn write_distortion(d: &DistortionMatrix, x_alphabet: &Alphabet) -> String {
    let mut out = format!("x_in,{}\n", x_alphabet.labels().join(","));
    for (i, row) in d.rows().iter().enumerate() {
        let vals: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&format!("{},{}\n", x_alphabet.label(i), vals.join(",")));
    }
    out
}
