use num_complex::Complex64;

use super::state::{is_hermitian, max_abs, CMatrix, CVector, STRUCTURAL_TOL};
use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Projective measurements: `projectors[o][s][x]` acts on observer `o`'s
/// subsystem for outcome `x` of setting `s`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementModel {
    projectors: Vec<Vec<Vec<CMatrix>>>,
    dims: Vec<usize>,
}

impl MeasurementModel {
    pub fn new(projectors: Vec<Vec<Vec<CMatrix>>>) -> Result<Self> {
        let mut dims = Vec::with_capacity(projectors.len());
        for (o, settings) in projectors.iter().enumerate() {
            let d = settings
                .first()
                .and_then(|s| s.first())
                .map(|p| p.nrows())
                .ok_or_else(|| Error::InvalidQuantum(format!("observer {o} has no projectors")))?;
            for (s, outs) in settings.iter().enumerate() {
                if outs.is_empty() {
                    return Err(Error::InvalidQuantum(format!(
                        "observer {o} setting {s} has no outcomes"
                    )));
                }
                let mut sum = CMatrix::zeros(d, d);
                for (x, p) in outs.iter().enumerate() {
                    if p.nrows() != d || p.ncols() != d {
                        return Err(Error::DimensionMismatch(format!(
                            "observer {o} setting {s} outcome {x}: {}×{} projector on a {d}-dimensional subsystem",
                            p.nrows(),
                            p.ncols()
                        )));
                    }
                    if !is_hermitian(p, STRUCTURAL_TOL) || max_abs(&(p * p - p)) > STRUCTURAL_TOL {
                        return Err(Error::InvalidQuantum(format!(
                            "observer {o} setting {s} outcome {x} is not an orthogonal projector"
                        )));
                    }
                    sum += p;
                }
                if max_abs(&(sum - CMatrix::identity(d, d))) > STRUCTURAL_TOL {
                    return Err(Error::InvalidQuantum(format!(
                        "projectors of observer {o} setting {s} do not sum to the identity"
                    )));
                }
            }
            dims.push(d);
        }
        if dims.is_empty() {
            return Err(Error::InvalidQuantum("model has no observers".into()));
        }
        Ok(Self { projectors, dims })
    }

    /// Rank-one projectors onto the columns of each setting's unitary basis.
    pub fn from_bases(bases: Vec<Vec<Vec<CVector>>>) -> Result<Self> {
        let projectors = bases
            .into_iter()
            .map(|settings| {
                settings
                    .into_iter()
                    .map(|vs| vs.into_iter().map(|v| &v * v.adjoint()).collect())
                    .collect()
            })
            .collect();
        Self::new(projectors)
    }

    /// Qubit settings given by real analyzer angles in degrees: outcome 0
    /// projects on `cos θ|0⟩ + sin θ|1⟩`, outcome 1 on the orthogonal state.
    pub fn qubit_rotations(angles_deg: &[&[f64]]) -> Result<Self> {
        let bases = angles_deg
            .iter()
            .map(|angles| angles.iter().map(|&a| rotation_basis(a)).collect())
            .collect();
        Self::from_bases(bases)
    }

    /// Angles at which the singlet reaches the CH minimum `(1 − √2)/2` on the
    /// CH vector with `-1` on (A0 outcome 0, B0 outcome 0).
    pub fn singlet_ch_optimal() -> Self {
        Self::qubit_rotations(&[&[0.0, 135.0], &[112.5, 157.5]]).expect("valid angles")
    }

    /// The same optimum for `(|00⟩ + |11⟩)/√2`.
    pub fn phi_plus_ch_optimal() -> Self {
        Self::qubit_rotations(&[&[0.0, 45.0], &[157.5, 112.5]]).expect("valid angles")
    }

    pub fn projector(&self, observer: usize, setting: usize, outcome: usize) -> &CMatrix {
        &self.projectors[observer][setting][outcome]
    }

    pub fn projectors(&self) -> &[Vec<Vec<CMatrix>>] {
        &self.projectors
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Observer `o`'s projectors replaced by their complex conjugates.
    pub fn conjugate_observer(&self, o: usize) -> Result<Self> {
        if o >= self.projectors.len() {
            return Err(Error::IndexOutOfRange(format!("observer {o}")));
        }
        let mut p = self.projectors.clone();
        for setting in &mut p[o] {
            for m in setting.iter_mut() {
                *m = m.conjugate();
            }
        }
        Ok(Self {
            projectors: p,
            dims: self.dims.clone(),
        })
    }

    pub fn check_scenario(&self, s: &Scenario) -> Result<()> {
        if self.projectors.len() != s.num_observers() {
            return Err(Error::DimensionMismatch(format!(
                "model has {} observers, scenario {}",
                self.projectors.len(),
                s.num_observers()
            )));
        }
        for (o, settings) in self.projectors.iter().enumerate() {
            if settings.len() != s.settings(o) {
                return Err(Error::DimensionMismatch(format!(
                    "observer {o}: model has {} settings, scenario {}",
                    settings.len(),
                    s.settings(o)
                )));
            }
            for (set, outs) in settings.iter().enumerate() {
                if outs.len() != s.outcomes(o, set) {
                    return Err(Error::DimensionMismatch(format!(
                        "observer {o} setting {set}: model has {} outcomes, scenario {}",
                        outs.len(),
                        s.outcomes(o, set)
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn rotation_basis(angle_deg: f64) -> Vec<CVector> {
    let t = angle_deg.to_radians();
    let (s, c) = t.sin_cos();
    vec![
        CVector::from_vec(vec![Complex64::new(c, 0.0), Complex64::new(s, 0.0)]),
        CVector::from_vec(vec![Complex64::new(-s, 0.0), Complex64::new(c, 0.0)]),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_incomplete_or_non_projective() {
        let b = rotation_basis(30.0);
        let p0 = &b[0] * b[0].adjoint();
        assert!(MeasurementModel::new(vec![vec![vec![p0.clone()]]]).is_err());
        let half = CMatrix::identity(2, 2) * Complex64::new(0.5, 0.0);
        assert!(MeasurementModel::new(vec![vec![vec![half.clone(), half]]]).is_err());
        let p1 = &b[1] * b[1].adjoint();
        assert!(MeasurementModel::new(vec![vec![vec![p0, p1]]]).is_ok());
    }

    #[test]
    fn scenario_shape_is_checked() {
        let m = MeasurementModel::singlet_ch_optimal();
        assert!(m.check_scenario(&Scenario::uniform(2, 2, 2).unwrap()).is_ok());
        assert!(m.check_scenario(&Scenario::uniform(2, 3, 2).unwrap()).is_err());
        assert!(m.check_scenario(&Scenario::uniform(2, 2, 3).unwrap()).is_err());
    }
}
