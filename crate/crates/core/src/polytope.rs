//! Membership in the local cone, the Gram-determinant face test with
//! cofactor extraction of integer Farkas vectors, and sharded exhaustive
//! facet enumeration.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::detvectors::{all_det_vectors, gram_from, interior_from, DetVector, GramMatrix, InteriorVector, SizeGuard};
use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::farkas::{ch_components, ch_counts, ch_specs, validate, FarkasVector, Provenance};
use crate::nullspace::{self, Canonicalizer};
use crate::scenario::Scenario;
use crate::simplex::{self, Feasibility};

/// Default tolerance for rationalizing floating-point probabilities.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Above this many CH members the dual solution is reported instead of the
/// most violated CH inequality.
pub const CH_SCAN_LIMIT: u128 = 200_000;

#[derive(Clone, Debug, PartialEq)]
pub enum RawValue {
    Exact(Rational),
    Float(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IngestOptions {
    pub tolerance: f64,
    /// Reject any normalization or no-signaling defect instead of repairing
    /// or flagging it.
    pub strict: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            strict: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Defects {
    /// `Σ_K P_K − N_T`.
    pub normalization: Rational,
    /// Largest `|Σ_K P_K Z_K|` over the elementary null vectors.
    pub max_residual: Rational,
}

impl Defects {
    pub fn is_clean(&self) -> bool {
        self.normalization.is_zero() && self.max_residual.is_zero()
    }

    fn measure(s: &Scenario, p: &[Rational]) -> Result<Self> {
        let total: Rational = p.iter().sum();
        let max_residual = nullspace::no_signaling_defect(s, p)?
            .into_iter()
            .map(|r| r.residual.abs())
            .max()
            .unwrap_or_default();
        Ok(Self {
            normalization: total - Rational::from_integer(s.n_t().into()),
            max_residual,
        })
    }
}

/// Coincidence probabilities over K-space, summing to `N_T` when clean.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector {
    components: Vec<Rational>,
    /// Floating-point values as read, when any input was a float.
    pub source: Option<Vec<f64>>,
    pub tolerance: Option<f64>,
    /// Projected onto the no-signaling subspace and renormalized after
    /// rationalization.
    pub repaired: bool,
    pub defects: Defects,
}

impl ProbVector {
    /// Exact components; defects are recorded, not rejected.
    pub fn exact(s: &Scenario, components: Vec<Rational>) -> Result<Self> {
        let raw: Vec<RawValue> = components.into_iter().map(RawValue::Exact).collect();
        ingest_probabilities(s, &raw, IngestOptions::default())
    }

    pub fn components(&self) -> &[Rational] {
        &self.components
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.components.iter().map(exact::rational_to_f64).collect()
    }
}

pub fn ingest_floats(s: &Scenario, values: &[f64], opts: IngestOptions) -> Result<ProbVector> {
    let raw: Vec<RawValue> = values.iter().map(|&v| RawValue::Float(v)).collect();
    ingest_probabilities(s, &raw, opts)
}

/// Exact values pass through; floats are rationalized by continued fractions
/// within `opts.tolerance`. Small defects of float data (at most
/// `tolerance · N_K` per residual) are repaired by exact orthogonal
/// projection onto the no-signaling subspace followed by rescaling to `N_T`,
/// unless `strict` is set.
pub fn ingest_probabilities(s: &Scenario, values: &[RawValue], opts: IngestOptions) -> Result<ProbVector> {
    if values.len() != s.n_k() {
        return Err(Error::LengthMismatch {
            expected: s.n_k(),
            found: values.len(),
        });
    }
    if !(opts.tolerance > 0.0 && opts.tolerance.is_finite()) {
        return Err(Error::InvalidProbabilities(format!(
            "tolerance {} must be positive",
            opts.tolerance
        )));
    }
    let any_float = values.iter().any(|v| matches!(v, RawValue::Float(_)));
    let mut comps = Vec::with_capacity(values.len());
    for (k, v) in values.iter().enumerate() {
        let q = match v {
            RawValue::Exact(q) => q.clone(),
            RawValue::Float(x) => {
                if !x.is_finite() || *x < -opts.tolerance {
                    return Err(Error::InvalidProbabilities(format!(
                        "component {k} = {x} is negative or not finite"
                    )));
                }
                exact::rationalize(x.max(0.0), opts.tolerance)?
            }
        };
        if q.is_negative() {
            return Err(Error::InvalidProbabilities(format!("component {k} = {q} is negative")));
        }
        comps.push(q);
    }
    let mut defects = Defects::measure(s, &comps)?;
    let mut repaired = false;
    if !defects.is_clean() {
        if opts.strict {
            return Err(Error::InvalidProbabilities(format!(
                "normalization defect {}, largest no-signaling residual {}",
                defects.normalization, defects.max_residual
            )));
        }
        let limit = exact::rationalize(opts.tolerance * s.n_k() as f64, opts.tolerance * 1e-3)?;
        let small = defects.max_residual <= limit && defects.normalization.abs() <= limit;
        if any_float && small {
            let projected = Canonicalizer::new(s).project(&comps);
            let total: Rational = projected.iter().sum();
            if !total.is_positive() {
                return Err(Error::InvalidProbabilities("repaired vector has no weight".into()));
            }
            let scale = Rational::from_integer(s.n_t().into()) / total;
            comps = projected.into_iter().map(|x| x * &scale).collect();
            if let Some(k) = comps.iter().position(|x| x.is_negative()) {
                return Err(Error::InvalidProbabilities(format!(
                    "no-signaling repair made component {k} negative"
                )));
            }
            defects = Defects::measure(s, &comps)?;
            repaired = true;
        }
    }
    Ok(ProbVector {
        components: comps,
        source: if any_float {
            Some(
                values
                    .iter()
                    .map(|v| match v {
                        RawValue::Float(x) => *x,
                        RawValue::Exact(q) => exact::rational_to_f64(q),
                    })
                    .collect(),
            )
        } else {
            None
        },
        tolerance: any_float.then_some(opts.tolerance),
        repaired,
        defects,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateSource {
    /// Most violated member of the CH family.
    ChFamily,
    /// Primitive-integer rescaling of the phase-one dual.
    DualSolution,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MembershipResult {
    /// `Σ_λ w_λ B^λ = P`, `w ≥ 0`, `Σ w = 1`.
    Inside { weights: Vec<Rational> },
    /// `F·P = violation < 0` while `B^λ·F ≥ 0` for every λ.
    Outside {
        certificate: FarkasVector,
        violation: Rational,
        source: CertificateSource,
    },
}

impl MembershipResult {
    pub fn is_inside(&self) -> bool {
        matches!(self, MembershipResult::Inside { .. })
    }
}

/// Exact decision of `P ∈ cone{B^λ}` by phase-one simplex.
pub fn decide_membership(s: &Scenario, p: &ProbVector, guard: SizeGuard) -> Result<MembershipResult> {
    if p.components.len() != s.n_k() {
        return Err(Error::LengthMismatch {
            expected: s.n_k(),
            found: p.components.len(),
        });
    }
    if let Some(k) = p.components.iter().position(|x| x.is_negative()) {
        return Err(Error::InvalidProbabilities(format!("component {k} is negative")));
    }
    let defects = Defects::measure(s, &p.components)?;
    if !defects.is_clean() {
        return Err(Error::InvalidProbabilities(format!(
            "normalization defect {}, largest no-signaling residual {}",
            defects.normalization, defects.max_residual
        )));
    }
    let vecs = all_det_vectors(s, guard)?;
    let one = Rational::from_integer(1.into());
    let zero = Rational::zero();
    let a: Vec<Vec<Rational>> = (0..s.n_k())
        .map(|k| {
            vecs.iter()
                .map(|b| if b.dense()[k] == 1 { one.clone() } else { zero.clone() })
                .collect()
        })
        .collect();
    match simplex::feasibility(&a, &p.components) {
        Feasibility::Feasible(w) => {
            let mut rebuilt = vec![Rational::zero(); s.n_k()];
            for (b, wl) in vecs.iter().zip(&w) {
                if !wl.is_zero() {
                    for &k in b.ones() {
                        rebuilt[k] += wl;
                    }
                }
            }
            let total: Rational = w.iter().sum();
            if rebuilt != p.components || total != one {
                return Err(Error::Invariant("membership weights do not reproduce P".into()));
            }
            Ok(MembershipResult::Inside { weights: w })
        }
        Feasibility::Infeasible(y) => {
            if let Some((cert, violation)) = most_violated_ch(s, p, guard)? {
                return Ok(MembershipResult::Outside {
                    certificate: cert,
                    violation,
                    source: CertificateSource::ChFamily,
                });
            }
            let f = exact::to_i64_vec(&exact::primitive_from_rationals(&y))?;
            let cert = validate(s, &f, guard)?.with_provenance(Provenance::MembershipCertificate);
            let violation = cert.evaluate(&p.components);
            if !cert.is_valid() || !violation.is_negative() {
                return Err(Error::Invariant("dual certificate failed re-verification".into()));
            }
            Ok(MembershipResult::Outside {
                certificate: cert,
                violation,
                source: CertificateSource::DualSolution,
            })
        }
    }
}

fn most_violated_ch(s: &Scenario, p: &ProbVector, guard: SizeGuard) -> Result<Option<(FarkasVector, Rational)>> {
    match ch_counts(s) {
        Ok(c) if c.total > 0 && c.total <= CH_SCAN_LIMIT => {}
        _ => return Ok(None),
    }
    let mut best: Option<(Vec<i64>, Rational)> = None;
    for spec in ch_specs(s) {
        let f = ch_components(s, &spec)?;
        let v: Rational = f
            .iter()
            .zip(&p.components)
            .filter(|(c, _)| **c != 0)
            .map(|(&c, x)| x * Rational::from_integer(c.into()))
            .sum();
        if v.is_negative() && best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((f, v));
        }
    }
    let Some((f, v)) = best else {
        return Ok(None);
    };
    let cert = validate(s, &f, guard)?.with_provenance(Provenance::MembershipCertificate);
    if !cert.is_valid() {
        return Err(Error::Invariant("CH certificate failed re-verification".into()));
    }
    Ok(Some((cert, v)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FaceVerdict {
    Face,
    Interior,
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceCandidate {
    /// Ascending λ indices, `N_D − 1` of them.
    pub subset: Vec<usize>,
    pub verdict: FaceVerdict,
    /// `G = cof₀₀ C' + Σ_μ cof₀μ B^μ`, present unless degenerate.
    normal: Option<Vec<BigInt>>,
}

impl FaceCandidate {
    pub fn normal(&self) -> Option<&[BigInt]> {
        self.normal.as_deref()
    }
}

/// Everything the face test needs, computed once per scenario and shared
/// read-only between workers.
#[derive(Clone, Debug)]
pub struct FaceContext {
    scenario: Scenario,
    vecs: Vec<DetVector>,
    gram: GramMatrix,
    interior: InteriorVector,
    /// `B^λ·C = Σ_ν A^{λν}`.
    b_dot_c: Vec<i64>,
    c_dot_c: i64,
    n_d: usize,
}

impl FaceContext {
    pub fn new(s: &Scenario, guard: SizeGuard) -> Result<Self> {
        let vecs = all_det_vectors(s, guard)?;
        let gram = gram_from(&vecs)?;
        let interior = interior_from(s, &vecs);
        let b_dot_c: Vec<i64> = (0..gram.size())
            .map(|l| gram.row(l).iter().map(|&v| v as i64).sum())
            .collect();
        let c_dot_c = interior.components.iter().map(|&c| (c * c) as i64).sum();
        let rows: Vec<Vec<i64>> = vecs.iter().map(DetVector::to_i64).collect();
        let n_d = exact::rank(&rows);
        Ok(Self {
            scenario: s.clone(),
            vecs,
            gram,
            interior,
            b_dot_c,
            c_dot_c,
            n_d,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn n_d(&self) -> usize {
        self.n_d
    }

    pub fn n_lambda(&self) -> usize {
        self.vecs.len()
    }

    pub fn det_vectors(&self) -> &[DetVector] {
        &self.vecs
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    fn check_subset(&self, subset: &[usize]) -> Result<()> {
        if subset.len() + 1 != self.n_d {
            return Err(Error::SubsetSize {
                expected: self.n_d.saturating_sub(1),
                found: subset.len(),
            });
        }
        if subset.windows(2).any(|w| w[0] >= w[1]) || subset.last().is_some_and(|&l| l >= self.vecs.len()) {
            return Err(Error::IndexOutOfRange(format!(
                "subset must be strictly ascending below N_λ = {}",
                self.vecs.len()
            )));
        }
        Ok(())
    }

    fn a(&self, l: usize, m: usize) -> i64 {
        self.gram.get(l, m) as i64
    }

    /// `X·C' = X·C − Σ_{μ∈S} X·B^μ` for `X = B^κ`.
    fn b_dot_c_prime(&self, kappa: usize, subset: &[usize]) -> i64 {
        self.b_dot_c[kappa] - subset.iter().map(|&m| self.a(kappa, m)).sum::<i64>()
    }

    /// Rows `λ ∈ S` of the bordered matrix: `[B^λ·C', B^λ·B^μ ...]`.
    fn lower_rows(&self, subset: &[usize]) -> Vec<Vec<i64>> {
        subset
            .iter()
            .map(|&l| {
                let mut row = Vec::with_capacity(subset.len() + 1);
                row.push(self.b_dot_c_prime(l, subset));
                row.extend(subset.iter().map(|&m| self.a(l, m)));
                row
            })
            .collect()
    }

    /// First-row cofactors of the bordered matrix; `None` when the Gram
    /// minor of the subset is singular.
    fn cofactors(&self, subset: &[usize]) -> Option<Vec<BigInt>> {
        let rows = self.lower_rows(subset);
        let minor = |skip: usize| -> Vec<Vec<i64>> {
            rows.iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|&(j, _)| j != skip)
                        .map(|(_, &v)| v)
                        .collect()
                })
                .collect()
        };
        let c00 = exact::determinant(&minor(0));
        if c00.is_zero() {
            return None;
        }
        let mut cof = Vec::with_capacity(self.n_d);
        cof.push(c00);
        for j in 1..self.n_d {
            let d = exact::determinant(&minor(j));
            cof.push(if j % 2 == 1 { -d } else { d });
        }
        Some(cof)
    }

    /// The bordered determinant with first row `[X·C', X·B^μ ...]` for
    /// `X = B^κ`, by direct elimination.
    pub fn bordered_determinant(&self, subset: &[usize], kappa: usize) -> Result<BigInt> {
        self.check_subset(subset)?;
        let mut m = Vec::with_capacity(self.n_d);
        let mut first = vec![self.b_dot_c_prime(kappa, subset)];
        first.extend(subset.iter().map(|&mu| self.a(kappa, mu)));
        m.push(first);
        m.extend(self.lower_rows(subset));
        Ok(exact::determinant(&m))
    }

    /// `B^κ·G` from the cofactors.
    fn side(&self, cof: &[BigInt], subset: &[usize], kappa: usize) -> BigInt {
        let mut d = &cof[0] * BigInt::from(self.b_dot_c_prime(kappa, subset));
        for (c, &mu) in cof[1..].iter().zip(subset) {
            let a = self.a(kappa, mu);
            if a != 0 {
                d += c * BigInt::from(a);
            }
        }
        d
    }

    /// Face iff the subset's Gram minor is nonsingular, `C·G > 0`, and no
    /// `B^κ` lies strictly on the far side (`B^κ·G ≥ 0`). Vertices on the
    /// hyperplane itself are admitted so that facets with more than
    /// `N_D − 1` vertices are found.
    pub fn face_test(&self, subset: &[usize]) -> Result<FaceCandidate> {
        self.check_subset(subset)?;
        Ok(self.face_test_unchecked(subset))
    }

    fn face_test_unchecked(&self, subset: &[usize]) -> FaceCandidate {
        let Some(cof) = self.cofactors(subset) else {
            return FaceCandidate {
                subset: subset.to_vec(),
                verdict: FaceVerdict::Degenerate,
                normal: None,
            };
        };
        let mut c_side = &cof[0] * BigInt::from(self.c_dot_c - subset.iter().map(|&m| self.b_dot_c[m]).sum::<i64>());
        for (c, &mu) in cof[1..].iter().zip(subset) {
            c_side += c * BigInt::from(self.b_dot_c[mu]);
        }
        let mut verdict = if c_side.is_positive() {
            FaceVerdict::Face
        } else {
            FaceVerdict::Interior
        };
        if verdict == FaceVerdict::Face {
            let mut si = 0;
            for kappa in 0..self.vecs.len() {
                if si < subset.len() && subset[si] == kappa {
                    si += 1;
                    continue;
                }
                if self.side(&cof, subset, kappa).is_negative() {
                    verdict = FaceVerdict::Interior;
                    break;
                }
            }
        }
        let n_k = self.scenario.n_k();
        let mut g: Vec<BigInt> = (0..n_k)
            .map(|k| {
                let c_prime = self.interior.components[k] as i64
                    - subset.iter().map(|&m| self.vecs[m].dense()[k] as i64).sum::<i64>();
                &cof[0] * BigInt::from(c_prime)
            })
            .collect();
        for (c, &mu) in cof[1..].iter().zip(subset) {
            for &k in self.vecs[mu].ones() {
                g[k] += c;
            }
        }
        FaceCandidate {
            subset: subset.to_vec(),
            verdict,
            normal: Some(g),
        }
    }

    /// Primitive integer Farkas vector of a face, canonicalized and
    /// exhaustively validated with `m = 0` and `C·F > 0`.
    pub fn extract_farkas(&self, face: &FaceCandidate, canon: &Canonicalizer) -> Result<FarkasVector> {
        match face.verdict {
            FaceVerdict::Face => {}
            FaceVerdict::Degenerate => return Err(Error::DegenerateFace),
            FaceVerdict::Interior => {
                return Err(Error::InvalidSpec(
                    "subset spans an interior hyperplane, not a face".into(),
                ))
            }
        }
        let g = face.normal.as_ref().ok_or(Error::DegenerateFace)?;
        let f = exact::to_i64_vec(&canon.canonicalize_big(g)?)?;
        let v = validate(&self.scenario, &f, SizeGuard::unlimited())?.with_provenance(Provenance::FacetEnumeration);
        let c_score: i128 = self
            .interior
            .components
            .iter()
            .zip(&f)
            .map(|(&c, &x)| c as i128 * x as i128)
            .sum();
        if v.m() != 0 || c_score <= 0 {
            return Err(Error::Invariant(format!(
                "extracted face vector has m = {} and C·F = {c_score}",
                v.m()
            )));
        }
        Ok(v)
    }

    /// `C(N_λ, N_D − 1)`.
    pub fn subset_count(&self) -> Option<u128> {
        exact::binomial(self.vecs.len() as u128, self.n_d.saturating_sub(1) as u128)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Shard {
    pub index: u64,
    pub count: u64,
}

impl Shard {
    pub fn new(index: u64, count: u64) -> Result<Self> {
        if count == 0 || index >= count {
            return Err(Error::InvalidSpec(format!("shard {index}/{count} out of range")));
        }
        Ok(Self { index, count })
    }

    /// Half-open range of lexicographic subset ranks.
    pub fn range(&self, total: u128) -> (u128, u128) {
        let i = self.index as u128;
        let n = self.count as u128;
        (
            total / n * i + (total % n).min(i),
            total / n * (i + 1) + (total % n).min(i + 1),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FacetOptions {
    /// Largest number of subsets examined without a shard.
    pub budget: u128,
    pub shard: Option<Shard>,
}

impl Default for FacetOptions {
    fn default() -> Self {
        Self {
            budget: 1_000_000,
            shard: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FacetEnumeration {
    /// Classes with a nonnegative representative.
    pub trivial: Vec<FarkasVector>,
    pub nontrivial: Vec<FarkasVector>,
    pub subsets_examined: u128,
    pub faces: u128,
    pub degenerate: u128,
}

impl FacetEnumeration {
    pub fn all(&self) -> impl Iterator<Item = &FarkasVector> {
        self.trivial.iter().chain(&self.nontrivial)
    }
}

/// Face test over all `(N_D − 1)`-subsets in the shard's lexicographic rank
/// range, deduplicated by canonical form and sorted by it.
pub fn enumerate_facets(ctx: &FaceContext, opts: FacetOptions) -> Result<FacetEnumeration> {
    let total = ctx
        .subset_count()
        .ok_or_else(|| Error::Overflow("subset count".into()))?;
    let (lo, hi) = match opts.shard {
        Some(sh) => sh.range(total),
        None => {
            if total > opts.budget {
                return Err(Error::SizeGuard {
                    what: "face-test subsets",
                    size: total,
                    limit: opts.budget,
                });
            }
            (0, total)
        }
    };
    let n = ctx.n_lambda();
    let r = ctx.n_d.saturating_sub(1);
    let chunk = 2048u128;
    let chunks: Vec<(u128, u128)> = (0..(hi - lo).div_ceil(chunk))
        .map(|c| (lo + c * chunk, (lo + (c + 1) * chunk).min(hi)))
        .collect();
    #[derive(Default)]
    struct Acc {
        normals: BTreeSet<Vec<BigInt>>,
        faces: u128,
        degenerate: u128,
    }
    let acc = chunks
        .par_iter()
        .map(|&(a, b)| {
            let mut acc = Acc::default();
            let mut subset = unrank_subset(n, r, a);
            for rank in a..b {
                let cand = ctx.face_test_unchecked(&subset);
                match cand.verdict {
                    FaceVerdict::Face => {
                        acc.faces += 1;
                        let g = cand.normal.expect("faces carry a normal");
                        acc.normals.insert(exact::primitive(&g));
                    }
                    FaceVerdict::Degenerate => acc.degenerate += 1,
                    FaceVerdict::Interior => {}
                }
                if rank + 1 < b {
                    next_subset(&mut subset, n);
                }
            }
            acc
        })
        .reduce(Acc::default, |mut x, y| {
            x.normals.extend(y.normals);
            x.faces += y.faces;
            x.degenerate += y.degenerate;
            x
        });

    let canon = Canonicalizer::new(ctx.scenario());
    let mut classes: BTreeSet<Vec<BigInt>> = BTreeSet::new();
    for g in &acc.normals {
        classes.insert(canon.canonicalize_big(g)?);
    }
    let mut trivial = Vec::new();
    let mut nontrivial = Vec::new();
    for c in classes {
        let f = exact::to_i64_vec(&c)?;
        let v = validate(ctx.scenario(), &f, SizeGuard::unlimited())?.with_provenance(Provenance::FacetEnumeration);
        if v.m() != 0 {
            return Err(Error::Invariant("facet vector is not tight on its face".into()));
        }
        if nullspace::has_nonnegative_representative(ctx.scenario(), &f)? {
            trivial.push(v);
        } else {
            nontrivial.push(v);
        }
    }
    Ok(FacetEnumeration {
        trivial,
        nontrivial,
        subsets_examined: hi - lo,
        faces: acc.faces,
        degenerate: acc.degenerate,
    })
}

/// The `rank`-th `k`-subset of `0..n` in lexicographic order.
pub fn unrank_subset(n: usize, k: usize, mut rank: u128) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut c = 0usize;
    for i in 0..k {
        loop {
            let below = exact::binomial((n - c - 1) as u128, (k - i - 1) as u128).unwrap_or(u128::MAX);
            if rank < below {
                out.push(c);
                c += 1;
                break;
            }
            rank -= below;
            c += 1;
        }
    }
    out
}

/// Advances to the lexicographic successor; returns false after the last.
pub fn next_subset(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    for i in (0..k).rev() {
        if subset[i] < n - k + i {
            subset[i] += 1;
            for j in (i + 1)..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// `B^λ·F` as a float for quick reporting.
pub fn score_f64(f: &FarkasVector, p: &ProbVector) -> f64 {
    f.evaluate(p.components()).to_f64().unwrap_or(f64::NAN)
}
