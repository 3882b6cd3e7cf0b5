//! Exact integer and rational helpers: fraction-free (Bareiss) elimination,
//! primitive rescaling, small dense rational inverses and continued-fraction
//! rationalization.
//!
//! Elimination runs in `i128` with checked arithmetic first and restarts in
//! `BigInt` when an intermediate minor overflows.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

trait Ring: Clone {
    fn ring_zero() -> Self;
    fn ring_is_zero(&self) -> bool;
    /// `a*b - c*d`
    fn cross(a: &Self, b: &Self, c: &Self, d: &Self) -> Option<Self>;
    fn div_exact(&self, d: &Self) -> Option<Self>;
    fn negate(&self) -> Option<Self>;
}

impl Ring for i128 {
    fn ring_zero() -> Self {
        0
    }
    fn ring_is_zero(&self) -> bool {
        *self == 0
    }
    fn cross(a: &Self, b: &Self, c: &Self, d: &Self) -> Option<Self> {
        a.checked_mul(*b)?.checked_sub(c.checked_mul(*d)?)
    }
    fn div_exact(&self, d: &Self) -> Option<Self> {
        debug_assert_eq!(self % d, 0);
        self.checked_div(*d)
    }
    fn negate(&self) -> Option<Self> {
        self.checked_neg()
    }
}

impl Ring for BigInt {
    fn ring_zero() -> Self {
        Zero::zero()
    }
    fn ring_is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn cross(a: &Self, b: &Self, c: &Self, d: &Self) -> Option<Self> {
        Some(a * b - c * d)
    }
    fn div_exact(&self, d: &Self) -> Option<Self> {
        Some(self / d)
    }
    fn negate(&self) -> Option<Self> {
        Some(-self)
    }
}

struct Echelon<T> {
    rank: usize,
    /// Determinant when the matrix is square and of full rank.
    det: Option<T>,
}

/// Fraction-free row echelon reduction. Returns `None` on overflow.
fn bareiss<T: Ring>(mut m: Vec<Vec<T>>) -> Option<Echelon<T>> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut prev: Option<T> = None;
    let mut negate = false;
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].ring_is_zero()) else {
            continue;
        };
        if p != r {
            m.swap(p, r);
            negate = !negate;
        }
        for i in (r + 1)..rows {
            for j in (c + 1)..cols {
                let v = T::cross(&m[r][c], &m[i][j], &m[i][c], &m[r][j])?;
                m[i][j] = match &prev {
                    Some(d) => v.div_exact(d)?,
                    None => v,
                };
            }
            m[i][c] = T::ring_zero();
        }
        prev = Some(m[r][c].clone());
        r += 1;
    }
    let det = if rows == cols && r == rows {
        let d = prev.unwrap_or_else(|| T::ring_zero());
        Some(if negate { d.negate()? } else { d })
    } else {
        None
    };
    Some(Echelon { rank: r, det })
}

fn widen(rows: &[Vec<i64>]) -> Vec<Vec<i128>> {
    rows.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect()
}

fn to_big(rows: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    rows.iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect()
}

/// Exact rank of an integer matrix.
pub fn rank(rows: &[Vec<i64>]) -> usize {
    match bareiss(widen(rows)) {
        Some(e) => e.rank,
        None => bareiss(to_big(rows)).map(|e| e.rank).unwrap_or(0),
    }
}

/// Exact determinant of a square integer matrix. The empty matrix has determinant 1.
pub fn determinant(rows: &[Vec<i64>]) -> BigInt {
    if rows.is_empty() {
        return BigInt::one();
    }
    assert!(rows.iter().all(|r| r.len() == rows.len()), "matrix must be square");
    match bareiss(widen(rows)) {
        Some(e) => e.det.map_or_else(BigInt::zero, BigInt::from),
        None => determinant_big(&to_big(rows)),
    }
}

pub fn determinant_big(rows: &[Vec<BigInt>]) -> BigInt {
    if rows.is_empty() {
        return BigInt::one();
    }
    bareiss(rows.to_vec()).and_then(|e| e.det).unwrap_or_else(BigInt::zero)
}

pub fn rank_big(rows: &[Vec<BigInt>]) -> usize {
    bareiss(rows.to_vec()).map_or(0, |e| e.rank)
}

/// Divides by the positive gcd of all entries. The zero vector is returned unchanged.
pub fn primitive(v: &[BigInt]) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() || g.is_one() {
        return v.to_vec();
    }
    v.iter().map(|x| x / &g).collect()
}

/// Clears denominators with their lcm, then divides by the gcd. Signs are kept.
pub fn primitive_from_rationals(v: &[Rational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&l / x.denom())).collect();
    primitive(&ints)
}

pub fn to_i64_vec(v: &[BigInt]) -> Result<Vec<i64>> {
    v.iter()
        .map(|x| {
            x.to_i64()
                .ok_or_else(|| Error::Overflow(format!("component {x} does not fit in i64")))
        })
        .collect()
}

pub fn dot_i64(a: &[i64], b: &[i64]) -> i128 {
    a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum()
}

/// Gauss-Jordan inverse over the rationals; `None` if singular.
#[allow(clippy::needless_range_loop)]
pub fn invert(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut a: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(p, c);
        let inv = a[c][c].recip();
        for x in a[c].iter_mut() {
            *x *= &inv;
        }
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..2 * n {
                    let t = &f * &a[c][j];
                    a[i][j] -= t;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Smallest-denominator continued-fraction convergent within `tol` of `x`.
pub fn rationalize(x: f64, tol: f64) -> Result<Rational> {
    if !x.is_finite() {
        return Err(Error::InvalidProbabilities(format!("non-finite value {x}")));
    }
    let tol = tol.abs();
    let negative = x < 0.0;
    let target = x.abs();
    let (mut h_prev, mut h) = (BigInt::zero(), BigInt::one());
    let (mut k_prev, mut k) = (BigInt::one(), BigInt::zero());
    let mut rem = target;
    let mut best = Rational::from_integer(BigInt::from(target.round() as i64));
    for _ in 0..64 {
        let a = rem.floor();
        let a_big = BigInt::from(a as i64);
        let h_next = &a_big * &h + &h_prev;
        let k_next = &a_big * &k + &k_prev;
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
        best = Rational::new(h.clone(), k.clone());
        let approx = best.to_f64().unwrap_or(f64::NAN);
        if (approx - target).abs() <= tol {
            break;
        }
        let frac = rem - a;
        if frac <= f64::EPSILON {
            break;
        }
        rem = 1.0 / frac;
    }
    Ok(if negative { -best } else { best })
}

/// `n choose k`, `None` on overflow.
pub fn binomial(n: u128, k: u128) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn is_nonnegative(r: &Rational) -> bool {
    !r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cofactor_det(m: &[Vec<i64>]) -> i128 {
        // Laplace expansion oracle.
        if m.len() == 1 {
            return m[0][0] as i128;
        }
        (0..m.len())
            .map(|j| {
                let minor: Vec<Vec<i64>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &v)| v).collect())
                    .collect();
                let s = if j % 2 == 0 { 1 } else { -1 };
                s * m[0][j] as i128 * cofactor_det(&minor)
            })
            .sum()
    }

    #[test]
    fn determinant_matches_laplace() {
        let m = vec![
            vec![2, -1, 0, 3],
            vec![1, 4, -2, 0],
            vec![0, 5, 1, -1],
            vec![3, 0, 2, 2],
        ];
        assert_eq!(determinant(&m), BigInt::from(cofactor_det(&m)));
        let singular = vec![vec![1, 2], vec![2, 4]];
        assert!(determinant(&singular).is_zero());
    }

    #[test]
    fn overflow_falls_back_to_bigint() {
        let big = 1_i64 << 40;
        let m = vec![vec![big, 1, 0], vec![0, big, 1], vec![1, 0, big]];
        let expected = BigInt::from(big).pow(3) + BigInt::one();
        assert_eq!(determinant(&m), expected);
    }

    #[test]
    fn rank_of_dependent_rows() {
        let m = vec![vec![1, 0, 1, 0], vec![0, 1, 0, 1], vec![1, 1, 1, 1], vec![0, 0, 0, 0]];
        assert_eq!(rank(&m), 2);
        assert_eq!(rank(&[]), 0);
    }

    #[test]
    fn primitive_keeps_sign() {
        let v: Vec<BigInt> = [-4, 6, 0, 2].iter().map(|&x| BigInt::from(x)).collect();
        let p: Vec<i64> = to_i64_vec(&primitive(&v)).unwrap();
        assert_eq!(p, vec![-2, 3, 0, 1]);
        let r = vec![Rational::new(1.into(), 2.into()), Rational::new((-1).into(), 3.into())];
        assert_eq!(to_i64_vec(&primitive_from_rationals(&r)).unwrap(), vec![3, -2]);
    }

    #[test]
    fn continued_fraction_recovers_simple_fractions() {
        assert_eq!(rationalize(0.25, 1e-9).unwrap(), Rational::new(1.into(), 4.into()));
        assert_eq!(rationalize(0.1, 1e-9).unwrap(), Rational::new(1.into(), 10.into()));
        assert_eq!(
            rationalize(-2.0 / 3.0, 1e-9).unwrap(),
            Rational::new((-2).into(), 3.into())
        );
        assert!(rationalize(0.0, 1e-9).unwrap().is_zero());
        let pi = rationalize(std::f64::consts::PI, 1e-9).unwrap();
        assert!((rational_to_f64(&pi) - std::f64::consts::PI).abs() <= 1e-9);
        assert!(rationalize(f64::NAN, 1e-9).is_err());
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn inverse_round_trip() {
        let q = |a: i64, b: i64| Rational::new(a.into(), b.into());
        let m = vec![vec![q(2, 1), q(1, 1)], vec![q(1, 1), q(3, 2)]];
        let inv = invert(&m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let s: Rational = (0..2).map(|k| &m[i][k] * &inv[k][j]).sum();
                assert_eq!(s, if i == j { q(1, 1) } else { q(0, 1) });
            }
        }
        assert!(invert(&[vec![q(1, 1), q(2, 1)], vec![q(2, 1), q(4, 1)]]).is_none());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(16, 8), Some(12_870));
        assert_eq!(binomial(5, 7), Some(0));
        assert_eq!(binomial(64, 32), Some(1_832_624_140_942_590_534));
    }
}
