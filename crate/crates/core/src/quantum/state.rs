use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Structural tolerance for Hermiticity, trace, positivity and projectors.
pub const STRUCTURAL_TOL: f64 = 1e-9;

pub(crate) fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub(crate) fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    m.is_square() && max_abs(&(m - m.adjoint())) <= tol
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut e: Vec<f64> = h.symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Density matrix over a tensor product of subsystems, first subsystem most
/// significant in the row/column index.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    rho: CMatrix,
    dims: Vec<usize>,
}

impl QuantumState {
    pub fn new(rho: CMatrix, dims: Vec<usize>) -> Result<Self> {
        check_dims(&rho, &dims)?;
        if !is_hermitian(&rho, STRUCTURAL_TOL) {
            return Err(Error::InvalidQuantum("density matrix is not Hermitian".into()));
        }
        let tr = rho.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > STRUCTURAL_TOL {
            return Err(Error::InvalidQuantum(format!("trace {tr} is not 1")));
        }
        let min = hermitian_eigenvalues(&rho)[0];
        if min < -STRUCTURAL_TOL {
            return Err(Error::InvalidQuantum(format!("eigenvalue {min} is negative")));
        }
        Ok(Self { rho, dims })
    }

    /// `|ψ⟩⟨ψ|` for `ψ` rescaled to unit norm.
    pub fn pure(psi: &CVector, dims: Vec<usize>) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidQuantum("state vector has zero norm".into()));
        }
        let v = psi.unscale(n);
        Self::new(&v * v.adjoint(), dims)
    }

    /// `Σ_i c_i ρ'_i ⊗ ρ''_i ⊗ ...` with `c_i ≥ 0`, `Σ c_i = 1`.
    pub fn separable(terms: &[(f64, Vec<QuantumState>)]) -> Result<Self> {
        let total: f64 = terms.iter().map(|t| t.0).sum();
        if terms.is_empty() || terms.iter().any(|t| t.0 < 0.0) || (total - 1.0).abs() > STRUCTURAL_TOL {
            return Err(Error::InvalidQuantum(
                "mixture weights must be nonnegative and sum to 1".into(),
            ));
        }
        let mut acc: Option<(CMatrix, Vec<usize>)> = None;
        for (c, factors) in terms {
            let mut it = factors.iter();
            let first = it
                .next()
                .ok_or_else(|| Error::InvalidQuantum("empty product term".into()))?;
            let prod = it.fold(first.clone(), |a, b| a.tensor(b));
            match &mut acc {
                None => acc = Some((prod.rho * Complex64::new(*c, 0.0), prod.dims)),
                Some((m, d)) => {
                    if *d != prod.dims {
                        return Err(Error::DimensionMismatch(
                            "mixture terms have different dimensions".into(),
                        ));
                    }
                    *m += prod.rho * Complex64::new(*c, 0.0);
                }
            }
        }
        let (m, d) = acc.expect("nonempty");
        Self::new(m, d)
    }

    /// `(|01⟩ − |10⟩)/√2`.
    pub fn singlet() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = CVector::from_vec(vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(s, 0.0),
            Complex64::new(-s, 0.0),
            Complex64::new(0.0, 0.0),
        ]);
        Self::pure(&psi, vec![2, 2]).expect("singlet is a state")
    }

    /// `v |ψ⁻⟩⟨ψ⁻| + (1 − v) I/4`.
    pub fn werner(v: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidQuantum(format!("visibility {v} outside [0, 1]")));
        }
        let s = Self::singlet();
        let id = CMatrix::identity(4, 4) * Complex64::new((1.0 - v) / 4.0, 0.0);
        Self::new(s.rho * Complex64::new(v, 0.0) + id, vec![2, 2])
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            rho: CMatrix::identity(d, d) / Complex64::new(d as f64, 0.0),
            dims: vec![d],
        }
    }

    pub fn tensor(&self, other: &QuantumState) -> QuantumState {
        let mut dims = self.dims.clone();
        dims.extend(&other.dims);
        QuantumState {
            rho: self.rho.kronecker(&other.rho),
            dims,
        }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// `⟨ψ|ρ|ψ⟩` for a unit `ψ`; insensitive to the global phase of `ψ`.
    pub fn fidelity_with_pure(&self, psi: &CVector) -> Result<f64> {
        if psi.len() != self.rho.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} against a {}-dimensional state",
                psi.len(),
                self.rho.nrows()
            )));
        }
        Ok((psi.adjoint() * &self.rho * psi)[(0, 0)].re)
    }
}

pub(crate) fn check_dims(m: &CMatrix, dims: &[usize]) -> Result<()> {
    let prod: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) || !m.is_square() || m.nrows() != prod {
        return Err(Error::DimensionMismatch(format!(
            "{}×{} matrix with subsystem dimensions {dims:?}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_rejects_non_states() {
        let bad_trace = CMatrix::identity(2, 2);
        assert!(QuantumState::new(bad_trace, vec![2]).is_err());
        let mut neg = CMatrix::zeros(2, 2);
        neg[(0, 0)] = Complex64::new(1.5, 0.0);
        neg[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(QuantumState::new(neg, vec![2]).is_err());
        let mut nh = CMatrix::identity(2, 2) * Complex64::new(0.5, 0.0);
        nh[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(QuantumState::new(nh, vec![2]).is_err());
        assert!(QuantumState::new(CMatrix::identity(4, 4) / Complex64::new(4.0, 0.0), vec![2, 3]).is_err());
    }

    #[test]
    fn tensor_of_pure_states_is_pure_with_unit_trace() {
        let a = QuantumState::pure(
            &CVector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)]),
            vec![2],
        )
        .unwrap();
        let b = QuantumState::maximally_mixed(3);
        let t = a.tensor(&b);
        assert_eq!(t.dims(), &[2, 3]);
        assert!((t.matrix().trace().re - 1.0).abs() < 1e-12);
        let aa = a.tensor(&a);
        let purity = (aa.matrix() * aa.matrix()).trace().re;
        assert!((purity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn werner_range() {
        assert!(QuantumState::werner(0.3).is_ok());
        assert!(QuantumState::werner(1.2).is_err());
    }
}
