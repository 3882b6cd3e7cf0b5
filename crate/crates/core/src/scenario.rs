//! Bell scenarios and the canonical index maps for coincidences `K` and
//! deterministic assignments `λ`.
//!
//! Coincidences are ordered lexicographically: observer 0 is the most
//! significant digit, and within one observer the `(setting, outcome)` pairs
//! are enumerated setting-major. Assignments are ordered the same way over the
//! flat list of all settings of all observers.

use std::fmt;

use crate::error::{Error, Result};
use crate::exact;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Observer {
    pub name: String,
    /// Outcome count of each setting, in declaration order.
    pub outcomes: Vec<usize>,
}

impl Observer {
    pub fn settings(&self) -> usize {
        self.outcomes.len()
    }

    /// Number of `(setting, outcome)` pairs.
    pub fn local_size(&self) -> usize {
        self.outcomes.iter().sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SettingOutcome {
    pub setting: usize,
    pub outcome: usize,
}

impl SettingOutcome {
    pub fn new(setting: usize, outcome: usize) -> Self {
        Self { setting, outcome }
    }
}

/// One `(setting, outcome)` pair per observer.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoincidenceIndex(pub Vec<SettingOutcome>);

/// One chosen outcome per setting per observer.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Assignment(pub Vec<Vec<usize>>);

impl Assignment {
    pub fn outcome(&self, observer: usize, setting: usize) -> usize {
        self.0[observer][setting]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ScenarioCounts {
    pub n_k: u128,
    pub n_lambda: u128,
    pub n_t: u128,
    pub n_z: u128,
    pub n_d: u128,
}

impl fmt::Display for ScenarioCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "N_K={} N_λ={} N_T={} N_Z={} N_D={}",
            self.n_k, self.n_lambda, self.n_t, self.n_z, self.n_d
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Scenario {
    observers: Vec<Observer>,
    /// `offsets[o][s]`: local index of `(s, 0)` for observer `o`.
    offsets: Vec<Vec<usize>>,
    /// Flat K stride of each observer.
    strides: Vec<usize>,
    n_k: usize,
    n_lambda: u128,
}

impl Scenario {
    pub fn new(observers: Vec<Observer>) -> Result<Self> {
        if observers.len() < 2 {
            return Err(Error::InvalidScenario(format!(
                "at least 2 observers required, found {}",
                observers.len()
            )));
        }
        for o in &observers {
            if o.outcomes.is_empty() {
                return Err(Error::InvalidScenario(format!("observer {} has no settings", o.name)));
            }
            if let Some(s) = o.outcomes.iter().position(|&a| a == 0) {
                return Err(Error::InvalidScenario(format!(
                    "observer {} setting {s} has zero outcomes",
                    o.name
                )));
            }
        }
        for (i, o) in observers.iter().enumerate() {
            if observers[..i].iter().any(|p| p.name == o.name) {
                return Err(Error::InvalidScenario(format!("duplicate observer name {}", o.name)));
            }
        }
        let offsets: Vec<Vec<usize>> = observers
            .iter()
            .map(|o| {
                let mut acc = 0;
                o.outcomes
                    .iter()
                    .map(|&a| {
                        let off = acc;
                        acc += a;
                        off
                    })
                    .collect()
            })
            .collect();
        let mut strides = vec![0; observers.len()];
        let mut n_k: usize = 1;
        for (o, obs) in observers.iter().enumerate().rev() {
            strides[o] = n_k;
            n_k = n_k
                .checked_mul(obs.local_size())
                .ok_or_else(|| Error::InvalidScenario("coincidence space too large".into()))?;
        }
        let mut n_lambda: u128 = 1;
        for &a in observers.iter().flat_map(|o| o.outcomes.iter()) {
            n_lambda = n_lambda
                .checked_mul(a as u128)
                .ok_or_else(|| Error::InvalidScenario("assignment count overflows".into()))?;
        }
        Ok(Self {
            observers,
            offsets,
            strides,
            n_k,
            n_lambda,
        })
    }

    /// Convenience constructor with generated names `A`, `B`, `C`, ...
    pub fn from_outcomes(outcomes: &[&[usize]]) -> Result<Self> {
        let observers = outcomes
            .iter()
            .enumerate()
            .map(|(i, o)| Observer {
                name: observer_name(i),
                outcomes: o.to_vec(),
            })
            .collect();
        Self::new(observers)
    }

    /// Every observer has `settings` settings with `outcomes` outcomes each.
    pub fn uniform(observers: usize, settings: usize, outcomes: usize) -> Result<Self> {
        let row = vec![outcomes; settings];
        let rows: Vec<&[usize]> = (0..observers).map(|_| row.as_slice()).collect();
        Self::from_outcomes(&rows)
    }

    pub fn observers(&self) -> &[Observer] {
        &self.observers
    }

    pub fn num_observers(&self) -> usize {
        self.observers.len()
    }

    pub fn settings(&self, observer: usize) -> usize {
        self.observers[observer].settings()
    }

    pub fn outcomes(&self, observer: usize, setting: usize) -> usize {
        self.observers[observer].outcomes[setting]
    }

    pub fn n_k(&self) -> usize {
        self.n_k
    }

    pub fn n_lambda(&self) -> u128 {
        self.n_lambda
    }

    pub fn n_t(&self) -> u128 {
        self.observers.iter().map(|o| o.settings() as u128).product()
    }

    pub fn local_index(&self, observer: usize, so: SettingOutcome) -> usize {
        self.offsets[observer][so.setting] + so.outcome
    }

    pub fn local_size(&self, observer: usize) -> usize {
        self.observers[observer].local_size()
    }

    pub fn stride(&self, observer: usize) -> usize {
        self.strides[observer]
    }

    /// Inverse of [`Scenario::local_index`].
    pub fn local_pair(&self, observer: usize, local: usize) -> SettingOutcome {
        let offs = &self.offsets[observer];
        let setting = offs.partition_point(|&o| o <= local) - 1;
        SettingOutcome::new(setting, local - offs[setting])
    }

    /// Local index of `observer` within flat coincidence `k`.
    pub fn local_of(&self, k: usize, observer: usize) -> usize {
        (k / self.strides[observer]) % self.local_size(observer)
    }

    pub fn k_index(&self, c: &CoincidenceIndex) -> Result<usize> {
        if c.0.len() != self.observers.len() {
            return Err(Error::LengthMismatch {
                expected: self.observers.len(),
                found: c.0.len(),
            });
        }
        let mut k = 0;
        for (o, so) in c.0.iter().enumerate() {
            if so.setting >= self.settings(o) || so.outcome >= self.outcomes(o, so.setting) {
                return Err(Error::IndexOutOfRange(format!(
                    "observer {o}: setting {} outcome {}",
                    so.setting, so.outcome
                )));
            }
            k += self.local_index(o, *so) * self.strides[o];
        }
        Ok(k)
    }

    pub fn coincidence(&self, k: usize) -> Result<CoincidenceIndex> {
        if k >= self.n_k {
            return Err(Error::IndexOutOfRange(format!("K={k} not below N_K={}", self.n_k)));
        }
        Ok(CoincidenceIndex(
            (0..self.observers.len())
                .map(|o| self.local_pair(o, self.local_of(k, o)))
                .collect(),
        ))
    }

    /// Flat index from per-observer local indices.
    pub fn k_from_locals(&self, locals: &[usize]) -> usize {
        locals.iter().zip(&self.strides).map(|(l, s)| l * s).sum()
    }

    pub fn lambda_index(&self, a: &Assignment) -> Result<u128> {
        if a.0.len() != self.observers.len() {
            return Err(Error::LengthMismatch {
                expected: self.observers.len(),
                found: a.0.len(),
            });
        }
        let mut idx: u128 = 0;
        for (o, outs) in a.0.iter().enumerate() {
            if outs.len() != self.settings(o) {
                return Err(Error::LengthMismatch {
                    expected: self.settings(o),
                    found: outs.len(),
                });
            }
            for (s, &x) in outs.iter().enumerate() {
                let radix = self.outcomes(o, s);
                if x >= radix {
                    return Err(Error::IndexOutOfRange(format!("observer {o} setting {s}: outcome {x}")));
                }
                idx = idx * radix as u128 + x as u128;
            }
        }
        Ok(idx)
    }

    pub fn assignment(&self, index: u128) -> Result<Assignment> {
        if index >= self.n_lambda {
            return Err(Error::IndexOutOfRange(format!(
                "λ={index} not below N_λ={}",
                self.n_lambda
            )));
        }
        let mut rest = index;
        let mut out: Vec<Vec<usize>> = self.observers.iter().map(|o| vec![0; o.settings()]).collect();
        for o in (0..self.observers.len()).rev() {
            for s in (0..self.settings(o)).rev() {
                let radix = self.outcomes(o, s) as u128;
                out[o][s] = (rest % radix) as usize;
                rest /= radix;
            }
        }
        Ok(Assignment(out))
    }

    /// All assignments in canonical order.
    pub fn assignments(&self) -> Assignments<'_> {
        Assignments {
            scenario: self,
            next: Some(Assignment(
                self.observers.iter().map(|o| vec![0; o.settings()]).collect(),
            )),
        }
    }

    /// All sectors (one setting per observer) in lexicographic order.
    pub fn sectors(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let radices: Vec<usize> = self.observers.iter().map(Observer::settings).collect();
        odometer(radices)
    }

    /// Sector of a coincidence.
    pub fn sector_of(&self, k: usize) -> Vec<usize> {
        (0..self.observers.len())
            .map(|o| self.local_pair(o, self.local_of(k, o)).setting)
            .collect()
    }

    pub fn counts(&self) -> ScenarioCounts {
        let n_k = self.n_k as u128;
        let n_d = if self.observers.len() == 2 {
            let sum_a: u128 = self.observers[0].local_size() as u128;
            let sum_b: u128 = self.observers[1].local_size() as u128;
            let s_a = self.observers[0].settings() as u128;
            let s_b = self.observers[1].settings() as u128;
            let n_z = (s_b - 1) * sum_a + (s_a - 1) * sum_b - (s_a - 1) * (s_b - 1);
            n_k - n_z
        } else {
            (0..self.observers.len()).map(|o| self.local_rank(o) as u128).product()
        };
        ScenarioCounts {
            n_k,
            n_lambda: self.n_lambda,
            n_t: self.n_t(),
            n_z: n_k - n_d,
            n_d,
        }
    }

    /// Exact rank of one observer's local pattern vectors (one-hot per setting).
    ///
    /// The span of all such patterns equals the span of the all-zero-outcome
    /// pattern together with its single-setting modifications, so only those
    /// `1 + Σ(A_s - 1)` rows are eliminated.
    pub fn local_rank(&self, observer: usize) -> usize {
        let rows: Vec<Vec<i64>> = local_spanning_patterns(self, observer)
            .iter()
            .map(|p| p.iter().map(|&v| v as i64).collect())
            .collect();
        exact::rank(&rows)
    }

    /// Text form used for hashing and round trips.
    pub fn canonical_text(&self) -> String {
        let mut s = String::new();
        for o in &self.observers {
            s.push_str("observer ");
            s.push_str(&o.name);
            s.push(':');
            for a in &o.outcomes {
                s.push(' ');
                s.push_str(&a.to_string());
            }
            s.push('\n');
        }
        s
    }

    /// Merges outcomes. `maps[o][s][x]` is the coarse outcome of fine outcome `x`;
    /// each map must be onto `0..m` for some `m ≥ 1`.
    pub fn coarse_grain(&self, maps: &[Vec<Vec<usize>>]) -> Result<Scenario> {
        if maps.len() != self.observers.len() {
            return Err(Error::LengthMismatch {
                expected: self.observers.len(),
                found: maps.len(),
            });
        }
        let mut observers = Vec::with_capacity(maps.len());
        for (o, obs) in self.observers.iter().enumerate() {
            if maps[o].len() != obs.settings() {
                return Err(Error::LengthMismatch {
                    expected: obs.settings(),
                    found: maps[o].len(),
                });
            }
            let mut outcomes = Vec::with_capacity(obs.settings());
            for (s, m) in maps[o].iter().enumerate() {
                if m.len() != obs.outcomes[s] {
                    return Err(Error::LengthMismatch {
                        expected: obs.outcomes[s],
                        found: m.len(),
                    });
                }
                let count = m.iter().max().map_or(0, |x| x + 1);
                if (0..count).any(|c| !m.contains(&c)) {
                    return Err(Error::InvalidScenario(format!(
                        "coarse-graining map of observer {o} setting {s} is not onto"
                    )));
                }
                outcomes.push(count);
            }
            observers.push(Observer {
                name: obs.name.clone(),
                outcomes,
            });
        }
        Scenario::new(observers)
    }
}

/// Local 0/1 patterns of one observer spanning its pattern space.
pub(crate) fn local_spanning_patterns(s: &Scenario, observer: usize) -> Vec<Vec<u8>> {
    let obs = &s.observers()[observer];
    let base: Vec<usize> = vec![0; obs.settings()];
    let mut outs = vec![base.clone()];
    for (set, &a) in obs.outcomes.iter().enumerate() {
        for x in 1..a {
            let mut p = base.clone();
            p[set] = x;
            outs.push(p);
        }
    }
    outs.iter().map(|p| local_pattern(s, observer, p)).collect()
}

/// One-hot-per-setting indicator over an observer's local indices.
pub(crate) fn local_pattern(s: &Scenario, observer: usize, outcomes: &[usize]) -> Vec<u8> {
    let mut v = vec![0u8; s.local_size(observer)];
    for (set, &x) in outcomes.iter().enumerate() {
        v[s.local_index(observer, SettingOutcome::new(set, x))] = 1;
    }
    v
}

pub(crate) fn observer_name(i: usize) -> String {
    let letters = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    if i < letters.len() {
        (letters[i] as char).to_string()
    } else {
        format!("O{i}")
    }
}

pub(crate) fn odometer(radices: Vec<usize>) -> impl Iterator<Item = Vec<usize>> {
    let mut next = if radices.iter().all(|&r| r > 0) {
        Some(vec![0; radices.len()])
    } else {
        None
    };
    std::iter::from_fn(move || {
        let cur = next.take()?;
        let mut n = cur.clone();
        for i in (0..n.len()).rev() {
            n[i] += 1;
            if n[i] < radices[i] {
                next = Some(n);
                break;
            }
            n[i] = 0;
        }
        Some(cur)
    })
}

pub struct Assignments<'a> {
    scenario: &'a Scenario,
    next: Option<Assignment>,
}

impl Iterator for Assignments<'_> {
    type Item = Assignment;

    fn next(&mut self) -> Option<Assignment> {
        let cur = self.next.take()?;
        let mut n = cur.clone();
        'outer: for o in (0..n.0.len()).rev() {
            for s in (0..n.0[o].len()).rev() {
                n.0[o][s] += 1;
                if n.0[o][s] < self.scenario.outcomes(o, s) {
                    self.next = Some(n);
                    break 'outer;
                }
                n.0[o][s] = 0;
            }
        }
        Some(cur)
    }
}

/// Parses the scenario file format: `observer <name>: <k1> <k2> ...` per line,
/// `#` comments, blank lines ignored.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut observers = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: String| Error::Syntax { line: line_no, message };
        let rest = line
            .strip_prefix("observer")
            .filter(|r| r.starts_with(char::is_whitespace))
            .ok_or_else(|| syntax("expected `observer <name>: <outcome counts>`".into()))?;
        let (name, counts) = rest
            .split_once(':')
            .ok_or_else(|| syntax("missing `:` after observer name".into()))?;
        let name = name.trim();
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(syntax(format!("invalid observer name `{name}`")));
        }
        let outcomes = counts
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| syntax(format!("invalid outcome count `{t}`")))
            })
            .collect::<Result<Vec<usize>>>()?;
        if outcomes.is_empty() {
            return Err(syntax(format!("observer {name} has no settings")));
        }
        if let Some(pos) = outcomes.iter().position(|&a| a == 0) {
            return Err(syntax(format!("observer {name} setting {pos} has zero outcomes")));
        }
        observers.push(Observer {
            name: name.to_string(),
            outcomes,
        });
    }
    if observers.is_empty() {
        return Err(Error::InvalidScenario("no observers declared".into()));
    }
    Scenario::new(observers)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s222() -> Scenario {
        Scenario::uniform(2, 2, 2).unwrap()
    }

    #[test]
    fn parse_two_by_two() {
        let s = parse_scenario("observer A: 2 2\nobserver B: 2 2\n").unwrap();
        assert_eq!(s.num_observers(), 2);
        assert_eq!(s.observers()[0].outcomes, vec![2, 2]);
        assert_eq!(s.observers()[1].name, "B");
    }

    #[test]
    fn parse_three_by_two_settings() {
        let s = parse_scenario("# three settings\nobserver A: 3 3 3\n\nobserver B: 3 3   # Bob\n").unwrap();
        assert_eq!(s.settings(0), 3);
        assert_eq!(s.settings(1), 2);
        assert_eq!(s.n_t(), 6);
    }

    #[test]
    fn parse_rejects_zero_outcomes_with_line() {
        match parse_scenario("observer A: 2 0") {
            Err(Error::Syntax { line: 1, message }) => assert!(message.contains("zero outcomes")),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_scenario("observer A: 2 2\nobserver B 2 2"),
            Err(Error::Syntax { line: 2, .. })
        ));
        assert!(parse_scenario("# nothing\n").is_err());
        assert!(parse_scenario("observer A: 2 2").is_err());
        assert!(parse_scenario("observer A:\nobserver B: 2").is_err());
        assert!(parse_scenario("observer A: 2\nobserver A: 2").is_err());
    }

    #[test]
    fn counts_two_by_two() {
        let c = s222().counts();
        assert_eq!((c.n_k, c.n_lambda, c.n_t, c.n_z, c.n_d), (16, 16, 4, 7, 9));
        assert_eq!(c.to_string(), "N_K=16 N_λ=16 N_T=4 N_Z=7 N_D=9");
    }

    #[test]
    fn counts_three_settings_and_three_observers() {
        let s32 = Scenario::from_outcomes(&[&[2, 2, 2], &[2, 2]]).unwrap();
        assert_eq!(s32.counts().n_t, 6);
        assert_eq!(s32.counts().n_lambda, 32);
        let three = Scenario::uniform(3, 2, 2).unwrap();
        assert_eq!(three.counts().n_k, 64);
        let big = Scenario::uniform(2, 2, 3).unwrap();
        assert_eq!(big.counts().n_d, 25);
    }

    #[test]
    fn k_index_corners_and_round_trip() {
        let s = s222();
        let first = CoincidenceIndex(vec![SettingOutcome::new(0, 0), SettingOutcome::new(0, 0)]);
        let last = CoincidenceIndex(vec![SettingOutcome::new(1, 1), SettingOutcome::new(1, 1)]);
        assert_eq!(s.k_index(&first).unwrap(), 0);
        assert_eq!(s.k_index(&last).unwrap(), 15);
        for k in 0..16 {
            assert_eq!(s.k_index(&s.coincidence(k).unwrap()).unwrap(), k);
        }
        let bad = CoincidenceIndex(vec![SettingOutcome::new(2, 0), SettingOutcome::new(0, 0)]);
        assert!(s.k_index(&bad).is_err());
        assert!(s.coincidence(16).is_err());
    }

    #[test]
    fn assignments_enumerate_in_order() {
        let s = s222();
        let all: Vec<Assignment> = s.assignments().collect();
        assert_eq!(all.len(), 16);
        for (i, a) in all.iter().enumerate() {
            assert_eq!(s.lambda_index(a).unwrap(), i as u128);
            assert_eq!(&s.assignment(i as u128).unwrap(), a);
        }
        let s32 = Scenario::from_outcomes(&[&[2, 2, 2], &[2, 2]]).unwrap();
        assert_eq!(s32.assignments().count(), 32);
        let single = Scenario::from_outcomes(&[&[1, 1], &[1]]).unwrap();
        assert_eq!(single.assignments().count(), 1);
    }

    #[test]
    fn sectors_and_local_pairs() {
        let s = Scenario::from_outcomes(&[&[3, 2], &[2, 4, 1]]).unwrap();
        assert_eq!(s.sectors().count(), 6);
        for o in 0..2 {
            for l in 0..s.local_size(o) {
                assert_eq!(s.local_index(o, s.local_pair(o, l)), l);
            }
        }
        let k = s
            .k_index(&CoincidenceIndex(vec![
                SettingOutcome::new(1, 1),
                SettingOutcome::new(2, 0),
            ]))
            .unwrap();
        assert_eq!(s.sector_of(k), vec![1, 2]);
    }

    #[test]
    fn coarse_grain_merges_outcomes() {
        let s = Scenario::from_outcomes(&[&[3, 2], &[2, 2]]).unwrap();
        let maps = vec![vec![vec![0, 0, 1], vec![0, 1]], vec![vec![0, 1], vec![0, 1]]];
        let c = s.coarse_grain(&maps).unwrap();
        assert_eq!(c.observers()[0].outcomes, vec![2, 2]);
        let bad = vec![vec![vec![0, 0, 2], vec![0, 1]], vec![vec![0, 1], vec![0, 1]]];
        assert!(s.coarse_grain(&bad).is_err());
    }
}
