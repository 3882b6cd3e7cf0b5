//! Text formats: probability vectors, inequalities, deterministic-vector
//! listings, membership weights, density matrices and measurement models.
//!
//! Files tied to a scenario carry its hash, the first 16 hex digits of the
//! SHA-256 of [`Scenario::canonical_text`].

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::detvectors::DetVector;
use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::farkas::FarkasVector;
use crate::polytope::RawValue;
use crate::quantum::{CMatrix, MeasurementModel, QuantumState};
use crate::scenario::Scenario;

pub fn scenario_hash(s: &Scenario) -> String {
    let digest = Sha256::digest(s.canonical_text().as_bytes());
    hex::encode(digest)[..16].to_string()
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        message: message.into(),
    }
}

/// Non-comment lines with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn check_hash(s: &Scenario, found: &str) -> Result<()> {
    let expected = scenario_hash(s);
    if found != expected {
        return Err(Error::HashMismatch {
            expected,
            found: found.to_string(),
        });
    }
    Ok(())
}

/// Header `<tag> <hash> ...`; returns the line number and remaining words.
fn header<'a>(
    lines: &mut impl Iterator<Item = (usize, &'a str)>,
    tag: &str,
    s: &Scenario,
) -> Result<(usize, Vec<&'a str>)> {
    let (line, text) = lines
        .next()
        .ok_or_else(|| syntax(1, format!("missing `{tag}` header")))?;
    let mut words = text.split_whitespace();
    if words.next() != Some(tag) {
        return Err(syntax(line, format!("expected `{tag} <scenario-hash>`")));
    }
    let hash = words.next().ok_or_else(|| syntax(line, "missing scenario hash"))?;
    check_hash(s, hash)?;
    Ok((line, words.collect()))
}

/// `p/q` and integers are exact; tokens with `.`, `e` or `E` are floats.
pub fn parse_value(token: &str, line: usize) -> Result<RawValue> {
    if token.contains(['.', 'e', 'E']) {
        token
            .parse::<f64>()
            .map(RawValue::Float)
            .map_err(|_| syntax(line, format!("invalid number `{token}`")))
    } else {
        parse_rational(token, line).map(RawValue::Exact)
    }
}

fn parse_rational(token: &str, line: usize) -> Result<Rational> {
    let r = Rational::from_str(token).map_err(|_| syntax(line, format!("invalid rational `{token}`")))?;
    Ok(r)
}

fn tokens<'a>(lines: impl Iterator<Item = (usize, &'a str)>) -> Vec<(usize, &'a str)> {
    lines
        .flat_map(|(n, l)| l.split_whitespace().map(move |t| (n, t)))
        .collect()
}

fn expect_count<T>(items: &[T], expected: usize) -> Result<()> {
    if items.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            found: items.len(),
        });
    }
    Ok(())
}

pub fn write_pvec(s: &Scenario, p: &[Rational]) -> String {
    let mut out = format!("pvec {}\n", scenario_hash(s));
    for v in p {
        let _ = writeln!(out, "{v}");
    }
    out
}

/// Float-valued variant, e.g. for Born probabilities.
pub fn write_pvec_f64(s: &Scenario, p: &[f64]) -> String {
    let mut out = format!("pvec {}\n", scenario_hash(s));
    for v in p {
        let _ = writeln!(out, "{v:e}");
    }
    out
}

pub fn parse_pvec(s: &Scenario, text: &str) -> Result<Vec<RawValue>> {
    let mut lines = content_lines(text);
    let (line, extra) = header(&mut lines, "pvec", s)?;
    if !extra.is_empty() {
        return Err(syntax(line, "unexpected words after the scenario hash"));
    }
    let values = tokens(lines)
        .into_iter()
        .map(|(n, t)| parse_value(t, n))
        .collect::<Result<Vec<_>>>()?;
    expect_count(&values, s.n_k())?;
    Ok(values)
}

/// One inequality as read from a file, bounds as claimed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InequalityRecord {
    pub components: Vec<i64>,
    pub m: i128,
    pub n: i128,
}

pub fn write_inequality(s: &Scenario, f: &FarkasVector) -> String {
    let mut out = format!("farkas {} m={} n={}\n", scenario_hash(s), f.m(), f.n());
    let body: Vec<String> = f.components().iter().map(i64::to_string).collect();
    out.push_str(&body.join(" "));
    out.push('\n');
    out
}

/// One or more concatenated inequality records.
pub fn parse_inequalities(s: &Scenario, text: &str) -> Result<Vec<InequalityRecord>> {
    let expected_hash = scenario_hash(s);
    let mut out = Vec::new();
    let mut current: Option<(usize, InequalityRecord)> = None;
    let finish = |cur: Option<(usize, InequalityRecord)>, out: &mut Vec<InequalityRecord>| -> Result<()> {
        if let Some((line, r)) = cur {
            if r.components.len() != s.n_k() {
                return Err(syntax(
                    line,
                    format!("expected {} components, found {}", s.n_k(), r.components.len()),
                ));
            }
            out.push(r);
        }
        Ok(())
    };
    for (line, text) in content_lines(text) {
        let mut words = text.split_whitespace().peekable();
        if words.peek() == Some(&"farkas") {
            finish(current.take(), &mut out)?;
            words.next();
            let hash = words.next().ok_or_else(|| syntax(line, "missing scenario hash"))?;
            if hash != expected_hash {
                return Err(Error::HashMismatch {
                    expected: expected_hash.clone(),
                    found: hash.to_string(),
                });
            }
            let mut bound = |key: &str| -> Result<i128> {
                let w = words.next().ok_or_else(|| syntax(line, format!("missing `{key}=`")))?;
                w.strip_prefix(key)
                    .and_then(|v| v.strip_prefix('='))
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| syntax(line, format!("invalid bound `{w}`")))
            };
            let m = bound("m")?;
            let n = bound("n")?;
            current = Some((
                line,
                InequalityRecord {
                    components: Vec::with_capacity(s.n_k()),
                    m,
                    n,
                },
            ));
            continue;
        }
        let (_, rec) = current
            .as_mut()
            .ok_or_else(|| syntax(line, "components before any `farkas` header"))?;
        for w in words {
            rec.components
                .push(w.parse().map_err(|_| syntax(line, format!("invalid integer `{w}`")))?);
        }
    }
    finish(current, &mut out)?;
    if out.is_empty() {
        return Err(syntax(1, "no `farkas` record"));
    }
    Ok(out)
}

pub fn det_enum_line(v: &DetVector) -> String {
    let mut line = v.index.to_string();
    for k in v.ones() {
        let _ = write!(line, " {k}");
    }
    line
}

/// Records `(λ, ones)` of a `det enum` listing.
pub fn parse_det_enum(text: &str) -> Result<Vec<(u128, Vec<usize>)>> {
    content_lines(text)
        .map(|(line, l)| {
            let mut it = l.split_whitespace();
            let lam = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| syntax(line, "invalid λ index"))?;
            let ones = it
                .map(|t| t.parse().map_err(|_| syntax(line, format!("invalid K index `{t}`"))))
                .collect::<Result<Vec<usize>>>()?;
            Ok((lam, ones))
        })
        .collect()
}

pub fn format_det_enum(records: &[(u128, Vec<usize>)]) -> String {
    let mut out = String::new();
    for (lam, ones) in records {
        let _ = write!(out, "{lam}");
        for k in ones {
            let _ = write!(out, " {k}");
        }
        out.push('\n');
    }
    out
}

pub fn write_weights(s: &Scenario, w: &[Rational]) -> String {
    let mut out = format!("weights {}\n", scenario_hash(s));
    for v in w {
        let _ = writeln!(out, "{v}");
    }
    out
}

pub fn parse_weights(s: &Scenario, text: &str) -> Result<Vec<Rational>> {
    let mut lines = content_lines(text);
    header(&mut lines, "weights", s)?;
    let w = tokens(lines)
        .into_iter()
        .map(|(n, t)| parse_rational(t, n))
        .collect::<Result<Vec<_>>>()?;
    let n_lambda = usize::try_from(s.n_lambda()).map_err(|_| Error::Overflow("N_λ".into()))?;
    expect_count(&w, n_lambda)?;
    Ok(w)
}

fn write_matrix(out: &mut String, m: &CMatrix) {
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|c| format!("{} {}", m[(r, c)].re, m[(r, c)].im))
            .collect();
        out.push_str(&row.join("  "));
        out.push('\n');
    }
}

fn read_matrix(toks: &[(usize, &str)], pos: &mut usize, d: usize) -> Result<CMatrix> {
    let mut m = CMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            let mut next = || -> Result<f64> {
                let (line, t) = *toks
                    .get(*pos)
                    .ok_or_else(|| syntax(toks.last().map_or(1, |t| t.0), "matrix ends early"))?;
                *pos += 1;
                t.parse().map_err(|_| syntax(line, format!("invalid number `{t}`")))
            };
            let re = next()?;
            let im = next()?;
            m[(r, c)] = Complex64::new(re, im);
        }
    }
    Ok(m)
}

pub fn write_state(st: &QuantumState) -> String {
    let dims: Vec<String> = st.dims().iter().map(usize::to_string).collect();
    let mut out = format!("state {}\n", dims.join(" "));
    write_matrix(&mut out, st.matrix());
    out
}

pub fn parse_state(text: &str) -> Result<QuantumState> {
    let mut lines = content_lines(text);
    let (line, head) = lines.next().ok_or_else(|| syntax(1, "missing `state` header"))?;
    let mut words = head.split_whitespace();
    if words.next() != Some("state") {
        return Err(syntax(line, "expected `state <dims>`"));
    }
    let dims = words
        .map(|w| {
            w.parse::<usize>()
                .map_err(|_| syntax(line, format!("invalid dimension `{w}`")))
        })
        .collect::<Result<Vec<_>>>()?;
    if dims.is_empty() || dims.contains(&0) {
        return Err(syntax(line, "dimensions must be positive"));
    }
    let d: usize = dims.iter().product();
    let toks = tokens(lines);
    if toks.len() != 2 * d * d {
        return Err(Error::LengthMismatch {
            expected: 2 * d * d,
            found: toks.len(),
        });
    }
    let mut pos = 0;
    let m = read_matrix(&toks, &mut pos, d)?;
    QuantumState::new(m, dims)
}

/// Blocks `observer <o> setting <s> outcomes <k> dim <d>`, each followed by
/// `k` row-major `d × d` projectors written as `re im` pairs.
pub fn write_model(model: &MeasurementModel) -> String {
    let mut out = String::new();
    for (o, settings) in model.projectors().iter().enumerate() {
        for (s, outs) in settings.iter().enumerate() {
            let _ = writeln!(
                out,
                "observer {o} setting {s} outcomes {} dim {}",
                outs.len(),
                model.dims()[o]
            );
            for p in outs {
                write_matrix(&mut out, p);
            }
        }
    }
    out
}

pub fn parse_model(text: &str) -> Result<MeasurementModel> {
    let mut projectors: Vec<Vec<Vec<CMatrix>>> = Vec::new();
    let lines: Vec<(usize, &str)> = content_lines(text).collect();
    let mut i = 0;
    while i < lines.len() {
        let (line, head) = lines[i];
        let w: Vec<&str> = head.split_whitespace().collect();
        let field = |j: usize, key: &str| -> Result<usize> {
            if w.get(j) != Some(&key) {
                return Err(syntax(line, "expected `observer <o> setting <s> outcomes <k> dim <d>`"));
            }
            w.get(j + 1)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| syntax(line, format!("invalid `{key}` value")))
        };
        let (o, s, k, d) = (
            field(0, "observer")?,
            field(2, "setting")?,
            field(4, "outcomes")?,
            field(6, "dim")?,
        );
        if w.len() != 8 {
            return Err(syntax(line, "unexpected words in block header"));
        }
        if o != projectors.len().saturating_sub(1) && o != projectors.len() {
            return Err(syntax(line, format!("observer {o} out of order")));
        }
        if o == projectors.len() {
            projectors.push(Vec::new());
        }
        if s != projectors[o].len() {
            return Err(syntax(line, format!("setting {s} out of order")));
        }
        let body_lines = k * d;
        let body = lines
            .get(i + 1..i + 1 + body_lines)
            .ok_or_else(|| syntax(line, "block ends early"))?;
        let toks = tokens(body.iter().copied());
        if toks.len() != 2 * k * d * d {
            return Err(syntax(
                line,
                format!("block needs {} numbers, found {}", 2 * k * d * d, toks.len()),
            ));
        }
        let mut pos = 0;
        let outs = (0..k)
            .map(|_| read_matrix(&toks, &mut pos, d))
            .collect::<Result<Vec<_>>>()?;
        projectors[o].push(outs);
        i += 1 + body_lines;
    }
    MeasurementModel::new(projectors)
}
