//! Farkas vectors (Bell inequalities), their exhaustive validation, the
//! graphical CH-type generator with coarse-graining partitions, and the
//! chained-CH decomposition.

use std::collections::HashSet;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::detvectors::{det_ones, SizeGuard};
use crate::error::{Error, Result};
use crate::exact::Rational;
use crate::nullspace::Canonicalizer;
use crate::scenario::{odometer, Assignment, Scenario, SettingOutcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Graphical,
    FacetEnumeration,
    MembershipCertificate,
    UserSupplied,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Graphical => "graphical",
            Provenance::FacetEnumeration => "facet-enumeration",
            Provenance::MembershipCertificate => "membership-certificate",
            Provenance::UserSupplied => "user-supplied",
        }
    }
}

/// Integer vector over K-space with tight bounds `m ≤ B^λ·F ≤ n` over all λ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FarkasVector {
    components: Vec<i64>,
    m: i128,
    n: i128,
    provenance: Provenance,
    /// Bounds come from every λ rather than a sample.
    certified: bool,
}

impl FarkasVector {
    pub fn components(&self) -> &[i64] {
        &self.components
    }

    pub fn m(&self) -> i128 {
        self.m
    }

    pub fn n(&self) -> i128 {
        self.n
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    /// `B^λ·F ≥ 0` for every λ examined.
    pub fn is_valid(&self) -> bool {
        self.m >= 0
    }

    /// Valid with `m = 0`.
    pub fn is_proper(&self) -> bool {
        self.m == 0
    }

    pub fn with_provenance(mut self, p: Provenance) -> Self {
        self.provenance = p;
        self
    }

    pub fn into_components(self) -> Vec<i64> {
        self.components
    }

    pub fn evaluate(&self, p: &[Rational]) -> Rational {
        self.components
            .iter()
            .zip(p)
            .filter(|(f, _)| **f != 0)
            .map(|(&f, x)| x * Rational::from_integer(f.into()))
            .sum()
    }

    pub fn evaluate_f64(&self, p: &[f64]) -> f64 {
        self.components.iter().zip(p).map(|(&f, &x)| f as f64 * x).sum()
    }
}

fn score(s: &Scenario, a: &Assignment, f: &[i64]) -> i128 {
    det_ones(s, a).into_iter().map(|k| f[k] as i128).sum()
}

fn check_len(s: &Scenario, f: &[i64]) -> Result<()> {
    if f.len() != s.n_k() {
        return Err(Error::LengthMismatch {
            expected: s.n_k(),
            found: f.len(),
        });
    }
    Ok(())
}

/// Tight bounds over every λ.
pub fn validate(s: &Scenario, f: &[i64], guard: SizeGuard) -> Result<FarkasVector> {
    check_len(s, f)?;
    let n = guard.check(s)?;
    let (m, mx) = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = s.assignment(i as u128).expect("index below N_λ");
            let v = score(s, &a, f);
            (v, v)
        })
        .reduce(|| (i128::MAX, i128::MIN), |x, y| (x.0.min(y.0), x.1.max(y.1)));
    Ok(FarkasVector {
        components: f.to_vec(),
        m,
        n: mx,
        provenance: Provenance::UserSupplied,
        certified: true,
    })
}

/// Bounds over `samples` random λ drawn from a seeded generator; never
/// certified.
pub fn validate_sampled(s: &Scenario, f: &[i64], samples: usize, seed: u64) -> Result<FarkasVector> {
    check_len(s, f)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut m, mut mx) = (i128::MAX, i128::MIN);
    for _ in 0..samples.max(1) {
        let a = Assignment(
            s.observers()
                .iter()
                .map(|o| o.outcomes.iter().map(|&k| rng.random_range(0..k)).collect())
                .collect(),
        );
        let v = score(s, &a, f);
        m = m.min(v);
        mx = mx.max(v);
    }
    Ok(FarkasVector {
        components: f.to_vec(),
        m,
        n: mx,
        provenance: Provenance::UserSupplied,
        certified: false,
    })
}

/// Ordered split of one setting's outcomes into `first` (the bits of
/// `first_mask`) and `second` (the rest); both nonempty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Bipartition {
    pub outcomes: usize,
    pub first_mask: u64,
}

impl Bipartition {
    pub fn new(outcomes: usize, first: &[usize]) -> Result<Self> {
        if outcomes > 63 {
            return Err(Error::InvalidSpec(format!(
                "{outcomes} outcomes exceed the 63-outcome limit"
            )));
        }
        let mut mask = 0u64;
        for &x in first {
            if x >= outcomes {
                return Err(Error::InvalidSpec(format!("outcome {x} out of range 0..{outcomes}")));
            }
            mask |= 1 << x;
        }
        let b = Self {
            outcomes,
            first_mask: mask,
        };
        b.check()?;
        Ok(b)
    }

    /// The `i`-th of the `2^A − 2` ordered bipartitions.
    pub fn nth(outcomes: usize, i: u64) -> Self {
        Self {
            outcomes,
            first_mask: i + 1,
        }
    }

    fn full(&self) -> u64 {
        (1u64 << self.outcomes) - 1
    }

    fn check(&self) -> Result<()> {
        if self.outcomes > 63
            || self.first_mask == 0
            || self.first_mask & !self.full() != 0
            || self.first_mask == self.full()
        {
            return Err(Error::InvalidSpec(format!(
                "bipartition {:#b} of {} outcomes must have two nonempty parts",
                self.first_mask, self.outcomes
            )));
        }
        Ok(())
    }

    pub fn in_first(&self, x: usize) -> bool {
        self.first_mask >> x & 1 == 1
    }

    pub fn first(&self) -> Vec<usize> {
        (0..self.outcomes).filter(|&x| self.in_first(x)).collect()
    }

    pub fn second(&self) -> Vec<usize> {
        (0..self.outcomes).filter(|&x| !self.in_first(x)).collect()
    }
}

/// Inputs of the CH-type construction.
///
/// `negative = (x, y)` is the sector carrying `-1` on `first(x) × first(y)`;
/// `opposite = (x', y')` gets `second(x') × second(y')`; the companions
/// `(x, y')` and `(x', y)` get `first(x) × first(y')` and
/// `first(x') × first(y)`. `partitions` are for `x, x', y, y'` in that order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChPartitionSpec {
    pub observers: (usize, usize),
    pub negative: (usize, usize),
    pub opposite: (usize, usize),
    pub partitions: [Bipartition; 4],
    /// One `(setting, outcome)` for every other observer, ascending by observer.
    pub slab: Vec<(usize, SettingOutcome)>,
}

impl ChPartitionSpec {
    /// Two observers, settings 0/1, outcome 0 against the rest everywhere.
    pub fn simple(s: &Scenario) -> Result<Self> {
        let part = |o: usize, set: usize| Bipartition::new(s.outcomes(o, set), &[0]);
        let slab = (2..s.num_observers()).map(|o| (o, SettingOutcome::new(0, 0))).collect();
        let spec = Self {
            observers: (0, 1),
            negative: (0, 0),
            opposite: (1, 1),
            partitions: [part(0, 0)?, part(0, 1)?, part(1, 0)?, part(1, 1)?],
            slab,
        };
        spec.check(s)?;
        Ok(spec)
    }

    pub fn check(&self, s: &Scenario) -> Result<()> {
        let (p, q) = self.observers;
        let n = s.num_observers();
        if p == q || p >= n || q >= n {
            return Err(Error::InvalidSpec(format!(
                "observers ({p}, {q}) must be distinct and below {n}"
            )));
        }
        let (x, y) = self.negative;
        let (xp, yp) = self.opposite;
        if x == xp || y == yp || x.max(xp) >= s.settings(p) || y.max(yp) >= s.settings(q) {
            return Err(Error::InvalidSpec(format!(
                "settings x={x}, x'={xp} of observer {p} and y={y}, y'={yp} of observer {q} must be distinct and in range"
            )));
        }
        let owners = [(p, x), (p, xp), (q, y), (q, yp)];
        for (b, &(o, set)) in self.partitions.iter().zip(&owners) {
            if b.outcomes != s.outcomes(o, set) {
                return Err(Error::InvalidSpec(format!(
                    "partition for observer {o} setting {set} covers {} outcomes, setting has {}",
                    b.outcomes,
                    s.outcomes(o, set)
                )));
            }
            b.check()?;
        }
        let others: Vec<usize> = (0..n).filter(|&o| o != p && o != q).collect();
        if self.slab.len() != others.len() || self.slab.iter().zip(&others).any(|(a, &o)| a.0 != o) {
            return Err(Error::InvalidSpec(format!(
                "slab must fix exactly observers {others:?} in order"
            )));
        }
        for &(o, so) in &self.slab {
            if so.setting >= s.settings(o) || so.outcome >= s.outcomes(o, so.setting) {
                return Err(Error::InvalidSpec(format!(
                    "slab pair {so:?} out of range for observer {o}"
                )));
            }
        }
        Ok(())
    }
}

/// Raw components of the CH-type vector (no validation).
pub fn ch_components(s: &Scenario, spec: &ChPartitionSpec) -> Result<Vec<i64>> {
    spec.check(s)?;
    let (p, q) = spec.observers;
    let (x, y) = spec.negative;
    let (xp, yp) = spec.opposite;
    let [bx, bxp, by, byp] = spec.partitions;
    let mut locals = vec![0usize; s.num_observers()];
    for &(o, so) in &spec.slab {
        locals[o] = s.local_index(o, so);
    }
    let mut f = vec![0i64; s.n_k()];
    let mut block = |sa: usize, a_out: &[usize], sb: usize, b_out: &[usize], v: i64| {
        for &i in a_out {
            for &j in b_out {
                locals[p] = s.local_index(p, SettingOutcome::new(sa, i));
                locals[q] = s.local_index(q, SettingOutcome::new(sb, j));
                f[s.k_from_locals(&locals)] += v;
            }
        }
    };
    block(x, &bx.first(), y, &by.first(), -1);
    block(xp, &bxp.second(), yp, &byp.second(), 1);
    block(x, &bx.first(), yp, &byp.first(), 1);
    block(xp, &bxp.first(), y, &by.first(), 1);
    Ok(f)
}

/// CH-type Farkas vector. Bounds are exhaustive when `N_λ` fits the default
/// guard; otherwise they are the constructive `m = 0, n = 1`, uncertified.
pub fn generate_ch(s: &Scenario, spec: &ChPartitionSpec) -> Result<FarkasVector> {
    let f = ch_components(s, spec)?;
    if SizeGuard::default().check(s).is_ok() {
        let v = validate(s, &f, SizeGuard::default())?.with_provenance(Provenance::Graphical);
        if v.m != 0 || v.n != 1 {
            return Err(Error::Invariant(format!(
                "CH construction produced bounds m={}, n={}",
                v.m, v.n
            )));
        }
        Ok(v)
    } else {
        Ok(FarkasVector {
            components: f,
            m: 0,
            n: 1,
            provenance: Provenance::Graphical,
            certified: false,
        })
    }
}

/// One observer pair with one choice of `(x, x', y, y')`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SectorChoice {
    pub observers: (usize, usize),
    pub negative: (usize, usize),
    pub opposite: (usize, usize),
}

impl SectorChoice {
    /// Number of ordered bipartition choices for this sector choice.
    pub fn partition_count(&self, s: &Scenario) -> Option<u128> {
        let (p, q) = self.observers;
        [
            (p, self.negative.0),
            (p, self.opposite.0),
            (q, self.negative.1),
            (q, self.opposite.1),
        ]
        .iter()
        .try_fold(1u128, |acc, &(o, set)| {
            let a = s.outcomes(o, set) as u32;
            let parts = 2u128.checked_pow(a)?.checked_sub(2)?;
            acc.checked_mul(parts)
        })
    }
}

/// Every observer pair `p < q` and every ordered `(x, x')`, `(y, y')`.
pub fn sector_choices(s: &Scenario) -> Vec<SectorChoice> {
    let n = s.num_observers();
    let mut out = Vec::new();
    for p in 0..n {
        for q in (p + 1)..n {
            for x in 0..s.settings(p) {
                for y in 0..s.settings(q) {
                    for xp in (0..s.settings(p)).filter(|&v| v != x) {
                        for yp in (0..s.settings(q)).filter(|&v| v != y) {
                            out.push(SectorChoice {
                                observers: (p, q),
                                negative: (x, y),
                                opposite: (xp, yp),
                            });
                        }
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChCounts {
    /// Partition choices `N_F` for each sector choice, in enumeration order.
    pub per_choice: Vec<(SectorChoice, u128)>,
    /// Slab choices for each observer pair (1 with two observers).
    pub slabs: Vec<((usize, usize), u128)>,
    pub total: u128,
}

/// Counts of the CH family without materializing it.
pub fn ch_counts(s: &Scenario) -> Result<ChCounts> {
    let overflow = || Error::Overflow("CH family count".into());
    let mut per_choice = Vec::new();
    let mut slabs = Vec::new();
    let mut total = 0u128;
    let n = s.num_observers();
    for c in sector_choices(s) {
        let nf = c.partition_count(s).ok_or_else(overflow)?;
        let (p, q) = c.observers;
        let slab = (0..n)
            .filter(|&o| o != p && o != q)
            .try_fold(1u128, |acc, o| acc.checked_mul(s.local_size(o) as u128))
            .ok_or_else(overflow)?;
        if !slabs.iter().any(|(pq, _)| *pq == (p, q)) {
            slabs.push(((p, q), slab));
        }
        total = nf
            .checked_mul(slab)
            .and_then(|v| total.checked_add(v))
            .ok_or_else(overflow)?;
        per_choice.push((c, nf));
    }
    Ok(ChCounts {
        per_choice,
        slabs,
        total,
    })
}

/// Every spec of the CH family in deterministic order.
pub fn ch_specs(s: &Scenario) -> impl Iterator<Item = ChPartitionSpec> + '_ {
    let n = s.num_observers();
    sector_choices(s).into_iter().flat_map(move |c| {
        let (p, q) = c.observers;
        let owners = [
            (p, c.negative.0),
            (p, c.opposite.0),
            (q, c.negative.1),
            (q, c.opposite.1),
        ];
        let widths: Vec<usize> = owners
            .iter()
            .map(|&(o, set)| (1usize << s.outcomes(o, set)) - 2)
            .collect();
        let others: Vec<usize> = (0..n).filter(|&o| o != p && o != q).collect();
        let mut radices = widths;
        radices.extend(others.iter().map(|&o| s.local_size(o)));
        odometer(radices).map(move |digits| {
            let parts: Vec<Bipartition> = owners
                .iter()
                .zip(&digits)
                .map(|(&(o, set), &d)| Bipartition::nth(s.outcomes(o, set), d as u64))
                .collect();
            ChPartitionSpec {
                observers: (p, q),
                negative: c.negative,
                opposite: c.opposite,
                partitions: [parts[0], parts[1], parts[2], parts[3]],
                slab: others
                    .iter()
                    .zip(&digits[4..])
                    .map(|(&o, &l)| (o, s.local_pair(o, l)))
                    .collect(),
            }
        })
    })
}

/// Streams `generate_ch` over the whole family, stopping after `limit`.
pub fn enumerate_ch(s: &Scenario, limit: Option<usize>) -> impl Iterator<Item = Result<FarkasVector>> + '_ {
    ch_specs(s)
        .take(limit.unwrap_or(usize::MAX))
        .map(move |spec| generate_ch(s, &spec))
}

/// First member of each Z-equivalence class, in enumeration order.
pub fn enumerate_ch_deduped(s: &Scenario, limit: Option<usize>) -> Result<Vec<FarkasVector>> {
    let canon = Canonicalizer::new(s);
    let mut seen: HashSet<Vec<BigInt>> = HashSet::new();
    let mut out = Vec::new();
    for v in enumerate_ch(s, limit) {
        let v = v?;
        if seen.insert(canon.canonicalize(v.components())?) {
            out.push(v);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChainDecomposition {
    Parts(Vec<FarkasVector>),
    NotDecomposed,
}

/// One nonzero cell of a two-observer vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Cell {
    a: SettingOutcome,
    b: SettingOutcome,
}

/// Splits a chained CH vector (one `-1` and `2k-1` cells `+1` forming a
/// closed alternating chain through `2k` distinct sectors) into `k-1`
/// four-sector CH vectors whose sum is exactly the input.
///
/// Walking the chain `v1, v2, ..., v2k` from the Alice setting `v1` of the
/// negative cell, consecutive positive cells share a setting with
/// complementary outcomes, and the first and last positive cells repeat the
/// negative cell's outcomes at `v1` and `v2k`. Every setting on the chain
/// must have two outcomes.
pub fn chain_decompose(s: &Scenario, f: &FarkasVector) -> Result<ChainDecomposition> {
    check_len(s, f.components())?;
    if s.num_observers() != 2 {
        return Ok(ChainDecomposition::NotDecomposed);
    }
    let Some(chain) = find_chain(s, f.components()) else {
        return Ok(ChainDecomposition::NotDecomposed);
    };
    let (neg, pos) = chain;
    let k = pos.len().div_ceil(2);
    let two = |o: usize, so: SettingOutcome| -> Result<Bipartition> {
        Bipartition::new(s.outcomes(o, so.setting), &[so.outcome])
    };
    let mut parts = Vec::with_capacity(k - 1);
    for i in 1..k {
        // Cells s_{2i-1}, s_{2i}, s_{2i+1} are pos[2i-2], pos[2i-1], pos[2i].
        let left = pos[2 * i - 2];
        let opp = pos[2 * i - 1];
        let right = pos[2 * i];
        let alice = neg.a;
        // Alice settings: x = v1, x' = v_{2i+1}. Bob: y = v_{2i+2}, y' = v_{2i}.
        let spec = ChPartitionSpec {
            observers: (0, 1),
            negative: (alice.setting, right.b.setting),
            opposite: (right.a.setting, left.b.setting),
            partitions: [two(0, alice)?, two(0, right.a)?, two(1, right.b)?, two(1, left.b)?],
            slab: Vec::new(),
        };
        let part = generate_ch(s, &spec)?;
        let c = part.components();
        let expect_opp = s.k_from_locals(&[s.local_index(0, opp.a), s.local_index(1, opp.b)]);
        if c[expect_opp] != 1 {
            return Err(Error::Invariant("chain part misses its opposite cell".into()));
        }
        parts.push(part);
    }
    let mut sum = vec![0i64; s.n_k()];
    for p in &parts {
        for (acc, v) in sum.iter_mut().zip(p.components()) {
            *acc += v;
        }
    }
    if sum != f.components() {
        return Err(Error::Invariant("chain parts do not sum to the input".into()));
    }
    Ok(ChainDecomposition::Parts(parts))
}

fn find_chain(s: &Scenario, f: &[i64]) -> Option<(Cell, Vec<Cell>)> {
    let cell = |k: usize| Cell {
        a: s.local_pair(0, s.local_of(k, 0)),
        b: s.local_pair(1, s.local_of(k, 1)),
    };
    let mut neg = None;
    let mut pos = Vec::new();
    for (k, &v) in f.iter().enumerate() {
        match v {
            0 => {}
            -1 if neg.is_none() => neg = Some(cell(k)),
            1 => pos.push(cell(k)),
            _ => return None,
        }
    }
    let neg = neg?;
    if pos.len() < 3 || pos.len() % 2 == 0 {
        return None;
    }
    let binary = |c: &Cell| s.outcomes(0, c.a.setting) == 2 && s.outcomes(1, c.b.setting) == 2;
    if !binary(&neg) || !pos.iter().all(binary) {
        return None;
    }
    let mut used = vec![false; pos.len()];
    let mut chain = Vec::with_capacity(pos.len());
    let mut alice_settings = vec![neg.a.setting];
    let mut bob_settings = vec![neg.b.setting];
    // First positive cell: same Alice pair as the negative cell, other Bob setting.
    let mut at_alice = true;
    let mut pivot = neg.a;
    for step in 0..pos.len() {
        let candidates: Vec<usize> = (0..pos.len())
            .filter(|&i| !used[i])
            .filter(|&i| {
                let c = pos[i];
                if at_alice {
                    c.a.setting == pivot.setting
                        && (if step == 0 {
                            c.a.outcome == pivot.outcome
                        } else {
                            c.a.outcome != pivot.outcome
                        })
                } else {
                    c.b.setting == pivot.setting && c.b.outcome != pivot.outcome
                }
            })
            .collect();
        if candidates.len() != 1 {
            return None;
        }
        let i = candidates[0];
        used[i] = true;
        let c = pos[i];
        chain.push(c);
        if at_alice {
            if bob_settings.contains(&c.b.setting) && step != pos.len() - 1 {
                return None;
            }
            bob_settings.push(c.b.setting);
            pivot = c.b;
        } else {
            if alice_settings.contains(&c.a.setting) {
                return None;
            }
            alice_settings.push(c.a.setting);
            pivot = c.a;
        }
        at_alice = !at_alice;
    }
    // The walk must close on the negative cell's Bob pair.
    let last = *chain.last()?;
    if last.b != neg.b {
        return None;
    }
    Some((neg, chain))
}
