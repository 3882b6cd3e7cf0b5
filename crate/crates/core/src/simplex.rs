//! Exact rational phase-one simplex for `A x = b, x ≥ 0` with Bland's
//! anticycling rule.
//!
//! When the system is infeasible the optimal phase-one duals give the Farkas
//! alternative: a vector `y` with `yᵀA ≥ 0` componentwise and `y·b < 0`.

use num_traits::{One, Signed, Zero};

use crate::exact::Rational;

#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility {
    /// A nonnegative solution `x` (a basic one).
    Feasible(Vec<Rational>),
    /// `y` with `yᵀA ≥ 0` and `y·b < 0`.
    Infeasible(Vec<Rational>),
}

pub fn feasibility(a: &[Vec<Rational>], b: &[Rational]) -> Feasibility {
    let m = b.len();
    let n = a.first().map_or(0, Vec::len);
    assert_eq!(a.len(), m, "row count must match right-hand side");
    let width = n + m;

    let signs: Vec<bool> = b.iter().map(|v| v.is_negative()).collect();
    let mut t: Vec<Vec<Rational>> = Vec::with_capacity(m);
    let mut rhs: Vec<Rational> = Vec::with_capacity(m);
    for i in 0..m {
        let mut row: Vec<Rational> = a[i].clone();
        row.extend((0..m).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
        if signs[i] {
            for v in row.iter_mut().take(n) {
                *v = -v.clone();
            }
            rhs.push(-b[i].clone());
        } else {
            rhs.push(b[i].clone());
        }
        t.push(row);
    }
    let mut basis: Vec<usize> = (n..width).collect();

    // Reduced costs for min Σ artificials with the artificial basis.
    let mut rc: Vec<Rational> = vec![Rational::zero(); width];
    for j in 0..n {
        rc[j] = -t.iter().map(|row| row[j].clone()).sum::<Rational>();
    }
    let mut obj: Rational = rhs.iter().cloned().sum();

    while let Some(enter) = (0..width).find(|&j| rc[j].is_negative()) {
        let mut leave: Option<usize> = None;
        let mut best: Option<Rational> = None;
        for i in 0..m {
            if t[i][enter].is_positive() {
                let ratio = &rhs[i] / &t[i][enter];
                let better = match &best {
                    None => true,
                    Some(b) => ratio < *b || (ratio == *b && basis[i] < basis[leave.unwrap()]),
                };
                if better {
                    best = Some(ratio);
                    leave = Some(i);
                }
            }
        }
        // Phase one is bounded below by zero, so a pivot row always exists.
        let r = leave.expect("phase-one objective cannot be unbounded");

        let piv = t[r][enter].clone();
        for v in t[r].iter_mut() {
            *v /= &piv;
        }
        rhs[r] /= &piv;
        let pivot_row = t[r].clone();
        let pivot_rhs = rhs[r].clone();
        for i in 0..m {
            if i != r && !t[i][enter].is_zero() {
                let f = t[i][enter].clone();
                for (v, p) in t[i].iter_mut().zip(&pivot_row) {
                    if !p.is_zero() {
                        *v -= &f * p;
                    }
                }
                rhs[i] -= &f * &pivot_rhs;
            }
        }
        let f = rc[enter].clone();
        for (v, p) in rc.iter_mut().zip(&pivot_row) {
            if !p.is_zero() {
                *v -= &f * p;
            }
        }
        obj += &f * &pivot_rhs;
        basis[r] = enter;
    }

    if obj.is_zero() {
        let mut x = vec![Rational::zero(); n];
        for (i, &j) in basis.iter().enumerate() {
            if j < n {
                x[j] = rhs[i].clone();
            }
        }
        Feasibility::Feasible(x)
    } else {
        let y = (0..m)
            .map(|i| {
                let yi = Rational::one() - &rc[n + i];
                // Undo the row flip, then negate to get yᵀA ≥ 0, y·b < 0.
                if signs[i] {
                    yi
                } else {
                    -yi
                }
            })
            .collect();
        Feasibility::Infeasible(y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(v: i64) -> Rational {
        Rational::from_integer(v.into())
    }

    fn mat(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect()
    }

    fn check_certificate(a: &[Vec<Rational>], b: &[Rational], y: &[Rational]) {
        for j in 0..a[0].len() {
            let s: Rational = (0..a.len()).map(|i| &y[i] * &a[i][j]).sum();
            assert!(!s.is_negative(), "column {j} scores {s}");
        }
        let yb: Rational = y.iter().zip(b).map(|(p, q)| p * q).sum();
        assert!(yb.is_negative());
    }

    #[test]
    fn feasible_system() {
        let a = mat(&[&[1, 1, 0], &[0, 1, 1]]);
        let b = vec![q(2), q(3)];
        match feasibility(&a, &b) {
            Feasibility::Feasible(x) => {
                for (i, row) in a.iter().enumerate() {
                    let s: Rational = row.iter().zip(&x).map(|(p, q)| p * q).sum();
                    assert_eq!(s, b[i]);
                }
                assert!(x.iter().all(|v| !v.is_negative()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn infeasible_system_yields_farkas_vector() {
        // x1 + x2 = 1, x1 + x2 = 2.
        let a = mat(&[&[1, 1], &[1, 1]]);
        let b = vec![q(1), q(2)];
        match feasibility(&a, &b) {
            Feasibility::Infeasible(y) => check_certificate(&a, &b, &y),
            other => panic!("{other:?}"),
        }
        // Negative right-hand side: x1 - x2 = -1 with x2 = 0 forced by x2 + x3 = 0.
        let a = mat(&[&[1, -1, 0], &[0, 1, 1]]);
        let b = vec![q(-1), q(0)];
        match feasibility(&a, &b) {
            Feasibility::Infeasible(y) => check_certificate(&a, &b, &y),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale-type degenerate system.
        let a = mat(&[
            &[1, 0, 0, 1, -2, 1, 3],
            &[0, 1, 0, 2, -9, -1, 9],
            &[0, 0, 1, 0, 0, 1, 0],
        ]);
        let b = vec![q(0), q(0), q(1)];
        assert!(matches!(feasibility(&a, &b), Feasibility::Feasible(_)));
    }
}
