//! Deterministic Boolean vectors `B^λ`, the Gram tensor `A^{λμ}` and the
//! interior vector `C`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact;
use crate::scenario::{Assignment, Scenario, SettingOutcome};

/// Refuses to materialize more than `max_assignments` vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeGuard {
    pub max_assignments: u128,
}

impl Default for SizeGuard {
    fn default() -> Self {
        Self {
            max_assignments: 10_000,
        }
    }
}

impl SizeGuard {
    pub fn unlimited() -> Self {
        Self {
            max_assignments: u128::MAX,
        }
    }

    pub fn with_limit(max_assignments: u128) -> Self {
        Self { max_assignments }
    }

    pub fn check(&self, s: &Scenario) -> Result<usize> {
        let n = s.n_lambda();
        if n > self.max_assignments || n > usize::MAX as u128 {
            return Err(Error::SizeGuard {
                what: "N_λ",
                size: n,
                limit: self.max_assignments,
            });
        }
        Ok(n as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetVector {
    pub assignment: Assignment,
    pub index: usize,
    /// Flat K-indices of the `N_T` ones, ascending.
    ones: Vec<usize>,
    dense: Vec<u8>,
}

impl DetVector {
    pub fn ones(&self) -> &[usize] {
        &self.ones
    }

    pub fn dense(&self) -> &[u8] {
        &self.dense
    }

    pub fn to_i64(&self) -> Vec<i64> {
        self.dense.iter().map(|&v| v as i64).collect()
    }

    /// `Σ_K B_K F_K`.
    pub fn score(&self, f: &[i64]) -> i128 {
        self.ones.iter().map(|&k| f[k] as i128).sum()
    }

    pub fn dot(&self, other: &DetVector) -> u32 {
        sorted_intersection(&self.ones, &other.ones)
    }
}

fn sorted_intersection(a: &[usize], b: &[usize]) -> u32 {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Ones of `B^λ`: for every sector, the coincidence whose outcomes are the
/// ones `λ` assigns to that sector's settings.
pub fn det_ones(s: &Scenario, a: &Assignment) -> Vec<usize> {
    s.sectors()
        .map(|sector| {
            let locals: Vec<usize> = sector
                .iter()
                .enumerate()
                .map(|(o, &set)| s.local_index(o, SettingOutcome::new(set, a.outcome(o, set))))
                .collect();
            s.k_from_locals(&locals)
        })
        .collect()
}

pub fn det_vector(s: &Scenario, a: &Assignment) -> Result<DetVector> {
    let index = s.lambda_index(a)?;
    let ones = det_ones(s, a);
    let mut dense = vec![0u8; s.n_k()];
    for &k in &ones {
        dense[k] = 1;
    }
    Ok(DetVector {
        assignment: a.clone(),
        index: index as usize,
        ones,
        dense,
    })
}

/// All `B^λ` in canonical λ order, generated in parallel over λ.
pub fn all_det_vectors(s: &Scenario, guard: SizeGuard) -> Result<Vec<DetVector>> {
    let n = guard.check(s)?;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let a = s.assignment(i as u128)?;
            det_vector(s, &a)
        })
        .collect()
}

/// Symmetric `N_λ × N_λ` matrix of overlaps `B^λ·B^μ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GramMatrix {
    n: usize,
    entries: Vec<u32>,
}

impl GramMatrix {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, lambda: usize, mu: usize) -> u32 {
        self.entries[lambda * self.n + mu]
    }

    pub fn row(&self, lambda: usize) -> &[u32] {
        &self.entries[lambda * self.n..(lambda + 1) * self.n]
    }
}

/// Product over observers of the number of settings on which the two
/// assignments agree.
pub fn gram_entry_factorized(a: &Assignment, b: &Assignment) -> u32 {
    a.0.iter()
        .zip(&b.0)
        .map(|(x, y)| x.iter().zip(y).filter(|(p, q)| p == q).count() as u32)
        .product()
}

/// Gram matrix by direct dot products, cross-checked entry by entry against
/// the factorized formula.
pub fn gram(s: &Scenario, guard: SizeGuard) -> Result<GramMatrix> {
    let vecs = all_det_vectors(s, guard)?;
    gram_from(&vecs)
}

pub fn gram_from(vecs: &[DetVector]) -> Result<GramMatrix> {
    let n = vecs.len();
    let rows: Vec<Vec<u32>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let direct = vecs[i].dot(&vecs[j]);
                    let factored = gram_entry_factorized(&vecs[i].assignment, &vecs[j].assignment);
                    if direct != factored {
                        Err(Error::Invariant(format!(
                            "Gram entry ({i},{j}): dot product {direct} but factorized {factored}"
                        )))
                    } else {
                        Ok(direct)
                    }
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(GramMatrix {
        n,
        entries: rows.into_iter().flatten().collect(),
    })
}

/// Exact rank of the matrix whose rows are all `B^λ`.
pub fn span_rank(s: &Scenario, guard: SizeGuard) -> Result<usize> {
    let vecs = all_det_vectors(s, guard)?;
    let rows: Vec<Vec<i64>> = vecs.iter().map(DetVector::to_i64).collect();
    Ok(exact::rank(&rows))
}

/// `C = Σ_λ B^λ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InteriorVector {
    pub components: Vec<u64>,
}

impl InteriorVector {
    pub fn to_i64(&self) -> Vec<i64> {
        self.components.iter().map(|&c| c as i64).collect()
    }
}

pub fn interior_vector(s: &Scenario, guard: SizeGuard) -> Result<InteriorVector> {
    let vecs = all_det_vectors(s, guard)?;
    Ok(interior_from(s, &vecs))
}

pub fn interior_from(s: &Scenario, vecs: &[DetVector]) -> InteriorVector {
    let mut c = vec![0u64; s.n_k()];
    for v in vecs {
        for &k in v.ones() {
            c[k] += 1;
        }
    }
    InteriorVector { components: c }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::CoincidenceIndex;

    fn s222() -> Scenario {
        Scenario::uniform(2, 2, 2).unwrap()
    }

    fn k(s: &Scenario, pairs: &[(usize, usize)]) -> usize {
        s.k_index(&CoincidenceIndex(
            pairs.iter().map(|&(a, b)| SettingOutcome::new(a, b)).collect(),
        ))
        .unwrap()
    }

    #[test]
    fn all_zero_assignment_pattern() {
        let s = s222();
        let a = Assignment(vec![vec![0, 0], vec![0, 0]]);
        let b = det_vector(&s, &a).unwrap();
        let mut expected = vec![
            k(&s, &[(0, 0), (0, 0)]),
            k(&s, &[(0, 0), (1, 0)]),
            k(&s, &[(1, 0), (0, 0)]),
            k(&s, &[(1, 0), (1, 0)]),
        ];
        expected.sort();
        assert_eq!(b.ones(), expected.as_slice());
        assert_eq!(b.dense().iter().map(|&x| x as usize).sum::<usize>(), 4);
    }

    #[test]
    fn six_coincidence_pattern() {
        // Alice: tests with outcomes (a,b,c), (r,s,t), (u,v,w); Bob: (α,β,γ), (ρ,σ,τ).
        // λ = [bsu; βρ] -> outcome indices Alice (1,1,0), Bob (1,0).
        let s = Scenario::from_outcomes(&[&[3, 3, 3], &[3, 3]]).unwrap();
        let lam = Assignment(vec![vec![1, 1, 0], vec![1, 0]]);
        let b = det_vector(&s, &lam).unwrap();
        let mut expected: Vec<usize> = [(0, 1), (1, 1), (2, 0)]
            .iter()
            .flat_map(|&alice| [(0, 1), (1, 0)].map(|bob| k(&s, &[alice, bob])))
            .collect();
        expected.sort();
        assert_eq!(b.ones(), expected.as_slice());
    }

    #[test]
    fn component_sum_is_number_of_sectors() {
        for s in [
            s222(),
            Scenario::from_outcomes(&[&[3, 2, 1], &[2, 4]]).unwrap(),
            Scenario::uniform(3, 2, 2).unwrap(),
        ] {
            for v in all_det_vectors(&s, SizeGuard::default()).unwrap() {
                assert_eq!(v.ones().len() as u128, s.n_t());
            }
        }
    }

    #[test]
    fn gram_examples() {
        let s = Scenario::from_outcomes(&[&[3, 3, 3], &[3, 3]]).unwrap();
        let lam = Assignment(vec![vec![1, 1, 0], vec![1, 0]]);
        let mu = Assignment(vec![vec![2, 0, 1], vec![0, 2]]);
        assert_eq!(gram_entry_factorized(&lam, &mu), 0);
        assert_eq!(gram_entry_factorized(&lam, &lam), 6);

        // Agreeing on one Alice setting and both Bob settings: brute-force dot.
        let s2 = s222();
        let x = Assignment(vec![vec![0, 1], vec![1, 0]]);
        let y = Assignment(vec![vec![0, 0], vec![1, 0]]);
        let bx = det_vector(&s2, &x).unwrap();
        let by = det_vector(&s2, &y).unwrap();
        let brute: u32 = bx.dense().iter().zip(by.dense()).map(|(&p, &q)| (p * q) as u32).sum();
        assert_eq!(brute, 2);
        assert_eq!(gram_entry_factorized(&x, &y), brute);

        let g = gram(&s, SizeGuard::default()).unwrap();
        assert_eq!(g.size(), 243);
        for l in (0..g.size()).step_by(97) {
            assert_eq!(g.get(l, l), 6);
        }
    }

    #[test]
    fn span_ranks() {
        assert_eq!(span_rank(&s222(), SizeGuard::default()).unwrap(), 9);
        assert_eq!(
            span_rank(&Scenario::uniform(2, 2, 3).unwrap(), SizeGuard::default()).unwrap(),
            25
        );
    }

    #[test]
    fn interior_vector_examples() {
        let s = s222();
        let c = interior_vector(&s, SizeGuard::default()).unwrap();
        // Oracle: brute-force sum of dense vectors.
        let mut brute = vec![0u64; 16];
        for a in s.assignments() {
            for (k, &v) in det_vector(&s, &a).unwrap().dense().iter().enumerate() {
                brute[k] += v as u64;
            }
        }
        assert_eq!(c.components, brute);
        assert!(c.components.iter().all(|&x| x == 4));
        assert_eq!(c.components.iter().sum::<u64>(), 64);

        let single = Scenario::from_outcomes(&[&[1, 1], &[1]]).unwrap();
        let c1 = interior_vector(&single, SizeGuard::default()).unwrap();
        let only = det_vector(&single, &single.assignment(0).unwrap()).unwrap();
        assert_eq!(c1.to_i64(), only.to_i64());
    }

    #[test]
    fn guard_refuses_large_scenarios() {
        let s = Scenario::uniform(2, 4, 4).unwrap();
        assert!(matches!(
            all_det_vectors(&s, SizeGuard::default()),
            Err(Error::SizeGuard { .. })
        ));
    }
}
