//! Null Farkas vectors `Z`, the no-signaling check, and canonical
//! representatives of Farkas vectors modulo the span of the `Z`.
//!
//! The orthogonal complement of the `Z`-span is the span of the `B^λ`, which
//! factorizes as a tensor product of one subspace per observer. The projector
//! onto it is therefore the Kronecker product of small per-observer
//! projectors; it is stored scaled to integers and applied mode by mode.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{self, Rational};
use crate::scenario::{local_spanning_patterns, Scenario, SettingOutcome};
use crate::simplex::{self, Feasibility};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NullVector {
    pub components: Vec<i64>,
    pub varying_observer: usize,
    /// Setting whose line carries `-1`.
    pub from_setting: usize,
    /// Setting whose line carries `+1`.
    pub to_setting: usize,
    /// `(observer, setting/outcome)` held fixed for every other observer.
    pub fixed: Vec<(usize, SettingOutcome)>,
}

/// All elementary null vectors: for every observer with at least two settings,
/// every ordered pair of its settings and every choice of one
/// `(setting, outcome)` per other observer.
pub fn enumerate_null_vectors(s: &Scenario) -> Vec<NullVector> {
    let n_obs = s.num_observers();
    let mut out = Vec::new();
    for o in 0..n_obs {
        let others: Vec<usize> = (0..n_obs).filter(|&p| p != o).collect();
        let radices: Vec<usize> = others.iter().map(|&p| s.local_size(p)).collect();
        for from in 0..s.settings(o) {
            for to in 0..s.settings(o) {
                if from == to {
                    continue;
                }
                for choice in crate::scenario::odometer(radices.clone()) {
                    let mut locals = vec![0usize; n_obs];
                    let mut fixed = Vec::with_capacity(others.len());
                    for (&p, &l) in others.iter().zip(&choice) {
                        locals[p] = l;
                        fixed.push((p, s.local_pair(p, l)));
                    }
                    let mut z = vec![0i64; s.n_k()];
                    for x in 0..s.outcomes(o, from) {
                        locals[o] = s.local_index(o, SettingOutcome::new(from, x));
                        z[s.k_from_locals(&locals)] = -1;
                    }
                    for x in 0..s.outcomes(o, to) {
                        locals[o] = s.local_index(o, SettingOutcome::new(to, x));
                        z[s.k_from_locals(&locals)] = 1;
                    }
                    out.push(NullVector {
                        components: z,
                        varying_observer: o,
                        from_setting: from,
                        to_setting: to,
                        fixed,
                    });
                }
            }
        }
    }
    out
}

/// A linearly independent subset of the elementary null vectors spanning the
/// same space, chosen greedily in enumeration order.
pub fn null_basis(s: &Scenario) -> Vec<Vec<i64>> {
    let mut basis: Vec<Vec<i64>> = Vec::new();
    for z in enumerate_null_vectors(s) {
        basis.push(z.components);
        if exact::rank(&basis) < basis.len() {
            basis.pop();
        }
    }
    basis
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoSignalingResidual {
    pub null: NullVector,
    /// `Σ_K P_K Z_K`, i.e. `to_sum - from_sum`.
    pub residual: Rational,
    /// Marginal of the fixed observers computed in the `from_setting` sector.
    pub from_sum: Rational,
    /// The same marginal computed in the `to_setting` sector.
    pub to_sum: Rational,
}

/// Residual of every elementary null vector on `p`.
pub fn no_signaling_defect(s: &Scenario, p: &[Rational]) -> Result<Vec<NoSignalingResidual>> {
    if p.len() != s.n_k() {
        return Err(Error::LengthMismatch {
            expected: s.n_k(),
            found: p.len(),
        });
    }
    Ok(enumerate_null_vectors(s)
        .into_iter()
        .map(|z| {
            let mut from_sum = Rational::zero();
            let mut to_sum = Rational::zero();
            for (k, &c) in z.components.iter().enumerate() {
                match c {
                    -1 => from_sum += &p[k],
                    1 => to_sum += &p[k],
                    _ => {}
                }
            }
            NoSignalingResidual {
                residual: &to_sum - &from_sum,
                from_sum,
                to_sum,
                null: z,
            }
        })
        .collect())
}

pub fn is_no_signaling(s: &Scenario, p: &[Rational]) -> Result<bool> {
    Ok(no_signaling_defect(s, p)?.iter().all(|r| r.residual.is_zero()))
}

/// Projector onto the span of the `B^λ` (the orthogonal complement of the
/// `Z`-span), computed once per scenario.
#[derive(Clone, Debug)]
pub struct Canonicalizer {
    n_k: usize,
    strides: Vec<usize>,
    sizes: Vec<usize>,
    /// Per observer: `scale * Π_o` as integers.
    scaled: Vec<Vec<Vec<BigInt>>>,
    scales: Vec<BigInt>,
}

impl Canonicalizer {
    pub fn new(s: &Scenario) -> Self {
        let mut scaled = Vec::new();
        let mut scales = Vec::new();
        for o in 0..s.num_observers() {
            let (m, d) = observer_projector(s, o);
            scaled.push(m);
            scales.push(d);
        }
        Self {
            n_k: s.n_k(),
            strides: (0..s.num_observers()).map(|o| s.stride(o)).collect(),
            sizes: (0..s.num_observers()).map(|o| s.local_size(o)).collect(),
            scaled,
            scales,
        }
    }

    fn apply_scaled(&self, f: Vec<BigInt>) -> Vec<BigInt> {
        let mut v = f;
        for o in 0..self.scaled.len() {
            let stride = self.strides[o];
            let size = self.sizes[o];
            let m = &self.scaled[o];
            let mut w = vec![BigInt::zero(); self.n_k];
            for (k, slot) in w.iter_mut().enumerate() {
                let l = (k / stride) % size;
                let base = k - l * stride;
                let mut acc = BigInt::zero();
                for (lp, coef) in m[l].iter().enumerate() {
                    if !coef.is_zero() {
                        let x = &v[base + lp * stride];
                        if !x.is_zero() {
                            acc += coef * x;
                        }
                    }
                }
                *slot = acc;
            }
            v = w;
        }
        v
    }

    /// Exact orthogonal projection onto the `B`-span.
    pub fn project(&self, f: &[Rational]) -> Vec<Rational> {
        let l = f.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
        let ints: Vec<BigInt> = f.iter().map(|x| x.numer() * (&l / x.denom())).collect();
        let scale: BigInt = self.scales.iter().product::<BigInt>() * &l;
        self.apply_scaled(ints)
            .into_iter()
            .map(|x| Rational::new(x, scale.clone()))
            .collect()
    }

    /// Canonical representative: projection onto the `B`-span rescaled to a
    /// primitive integer vector (positive scaling only).
    pub fn canonicalize_big(&self, f: &[BigInt]) -> Result<Vec<BigInt>> {
        if f.len() != self.n_k {
            return Err(Error::LengthMismatch {
                expected: self.n_k,
                found: f.len(),
            });
        }
        Ok(exact::primitive(&self.apply_scaled(f.to_vec())))
    }

    pub fn canonicalize(&self, f: &[i64]) -> Result<Vec<BigInt>> {
        let big: Vec<BigInt> = f.iter().map(|&x| BigInt::from(x)).collect();
        self.canonicalize_big(&big)
    }

    pub fn equivalent(&self, f: &[i64], g: &[i64]) -> Result<bool> {
        Ok(self.canonicalize(f)? == self.canonicalize(g)?)
    }
}

/// `(scale * Π_o, scale)` for the projector onto observer `o`'s pattern span.
fn observer_projector(s: &Scenario, o: usize) -> (Vec<Vec<BigInt>>, BigInt) {
    let w: Vec<Vec<Rational>> = local_spanning_patterns(s, o)
        .iter()
        .map(|p| p.iter().map(|&v| Rational::from_integer(v.into())).collect())
        .collect();
    let r = w.len();
    let l = s.local_size(o);
    let gram: Vec<Vec<Rational>> = (0..r)
        .map(|i| (0..r).map(|j| (0..l).map(|k| &w[i][k] * &w[j][k]).sum()).collect())
        .collect();
    let inv = exact::invert(&gram).expect("local spanning patterns are independent");
    // Π = Wᵀ G⁻¹ W
    let mut pi = vec![vec![Rational::zero(); l]; l];
    for a in 0..l {
        for b in 0..l {
            let mut acc = Rational::zero();
            for i in 0..r {
                if w[i][a].is_zero() {
                    continue;
                }
                for j in 0..r {
                    if !w[j][b].is_zero() {
                        acc += &inv[i][j];
                    }
                }
            }
            pi[a][b] = acc;
        }
    }
    let scale = pi.iter().flatten().fold(BigInt::one(), |d, x| d.lcm(x.denom()));
    let m = pi
        .iter()
        .map(|row| row.iter().map(|x| x.numer() * (&scale / x.denom())).collect())
        .collect();
    (m, scale)
}

pub fn canonicalize(s: &Scenario, f: &[i64]) -> Result<Vec<BigInt>> {
    Canonicalizer::new(s).canonicalize(f)
}

/// Whether `f + z ≥ 0` for some `z` in the `Z`-span, decided by an exact LP.
pub fn has_nonnegative_representative(s: &Scenario, f: &[i64]) -> Result<bool> {
    if f.len() != s.n_k() {
        return Err(Error::LengthMismatch {
            expected: s.n_k(),
            found: f.len(),
        });
    }
    if f.iter().all(|&x| x >= 0) {
        return Ok(true);
    }
    let basis = null_basis(s);
    let n_k = s.n_k();
    let q = |v: i64| Rational::from_integer(v.into());
    // Zᵀc⁺ - Zᵀc⁻ - slack = -f
    let a: Vec<Vec<Rational>> = (0..n_k)
        .map(|k| {
            let mut row: Vec<Rational> = basis.iter().map(|z| q(z[k])).collect();
            row.extend(basis.iter().map(|z| q(-z[k])));
            row.extend((0..n_k).map(|j| if j == k { q(-1) } else { q(0) }));
            row
        })
        .collect();
    let b: Vec<Rational> = f.iter().map(|&x| q(-x)).collect();
    Ok(matches!(simplex::feasibility(&a, &b), Feasibility::Feasible(_)))
}

/// Sectors containing a negative component.
pub fn negative_sectors(s: &Scenario, f: &[i64]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (k, &v) in f.iter().enumerate() {
        if v < 0 {
            let sec = s.sector_of(k);
            if !out.contains(&sec) {
                out.push(sec);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detvectors::{all_det_vectors, SizeGuard};
    use num_traits::Signed;

    fn s222() -> Scenario {
        Scenario::uniform(2, 2, 2).unwrap()
    }

    #[test]
    fn null_vectors_annihilate_every_pattern() {
        for s in [
            s222(),
            Scenario::from_outcomes(&[&[3, 2], &[2, 1, 2]]).unwrap(),
            Scenario::uniform(3, 2, 2).unwrap(),
        ] {
            let bs = all_det_vectors(&s, SizeGuard::default()).unwrap();
            for z in enumerate_null_vectors(&s) {
                for b in &bs {
                    assert_eq!(b.score(&z.components), 0);
                }
            }
        }
    }

    #[test]
    fn null_span_rank_is_n_z() {
        let s = s222();
        let zs: Vec<Vec<i64>> = enumerate_null_vectors(&s).into_iter().map(|z| z.components).collect();
        assert_eq!(exact::rank(&zs), 7);
        assert_eq!(null_basis(&s).len(), 7);
    }

    #[test]
    fn single_setting_observer_never_varies() {
        let s = Scenario::from_outcomes(&[&[2], &[2, 2]]).unwrap();
        let zs = enumerate_null_vectors(&s);
        assert!(!zs.is_empty());
        assert!(zs.iter().all(|z| z.varying_observer == 1));
    }

    #[test]
    fn canonical_form_kills_null_vectors() {
        let s = s222();
        let c = Canonicalizer::new(&s);
        for z in enumerate_null_vectors(&s) {
            assert!(c.canonicalize(&z.components).unwrap().iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn projection_agrees_with_explicit_null_basis() {
        // Oracle: P = I - Zᵀ(ZZᵀ)⁻¹Z from an explicit null basis.
        let s = Scenario::from_outcomes(&[&[3, 2], &[2, 2]]).unwrap();
        let z = null_basis(&s);
        let n = s.n_k();
        let q = |v: i64| Rational::from_integer(v.into());
        let g: Vec<Vec<Rational>> = z
            .iter()
            .map(|a| z.iter().map(|b| q(exact::dot_i64(a, b) as i64)).collect())
            .collect();
        let ginv = exact::invert(&g).unwrap();
        let f: Vec<i64> = (0..n as i64).map(|i| (i * 7 % 5) - 2).collect();
        let zf: Vec<Rational> = z.iter().map(|row| q(exact::dot_i64(row, &f) as i64)).collect();
        let coef: Vec<Rational> = (0..z.len())
            .map(|i| (0..z.len()).map(|j| &ginv[i][j] * &zf[j]).sum())
            .collect();
        let oracle: Vec<Rational> = (0..n)
            .map(|k| q(f[k]) - (0..z.len()).map(|i| &coef[i] * q(z[i][k])).sum::<Rational>())
            .collect();
        let fq: Vec<Rational> = f.iter().map(|&x| q(x)).collect();
        assert_eq!(Canonicalizer::new(&s).project(&fq), oracle);
    }

    #[test]
    fn residuals_flag_perturbation() {
        let s = s222();
        let bs = all_det_vectors(&s, SizeGuard::default()).unwrap();
        let mut p: Vec<Rational> = vec![Rational::zero(); 16];
        for (i, b) in bs.iter().enumerate().take(3) {
            for &k in b.ones() {
                p[k] += Rational::new((i as i64 + 1).into(), 6.into());
            }
        }
        assert!(is_no_signaling(&s, &p).unwrap());
        p[5] += Rational::new(1.into(), 10.into());
        let res = no_signaling_defect(&s, &p).unwrap();
        let tenth = Rational::new(1.into(), 10.into());
        assert!(res.iter().any(|r| r.residual == tenth || r.residual == -tenth.clone()));
        assert!(res.iter().all(|r| r.residual.is_zero() || r.residual.abs() == tenth));
        assert!(no_signaling_defect(&s, &p[..15]).is_err());
    }

    #[test]
    fn nonnegative_representative_lp() {
        let s = s222();
        let z = &enumerate_null_vectors(&s)[0];
        // A null vector plus a positive cell: equivalent to that cell alone.
        let mut f = z.components.clone();
        let cell = f.iter().position(|&v| v == 0).unwrap();
        f[cell] = 1;
        assert!(f.iter().any(|&v| v < 0));
        assert!(has_nonnegative_representative(&s, &f).unwrap());
        // A lone negative cell can never be repaired.
        let mut g = vec![0i64; 16];
        g[0] = -1;
        assert!(!has_nonnegative_representative(&s, &g).unwrap());
    }
}
