//! Seeded random states and projective models for property tests and
//! benchmarks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::model::MeasurementModel;
use super::state::{CMatrix, CVector, QuantumState};
use crate::scenario::Scenario;

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// `G G† / Tr(G G†)` for a `d × rank` Ginibre matrix `G`.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dims: &[usize], rank: usize) -> QuantumState {
    let d: usize = dims.iter().product();
    let g = ginibre(rng, d, rank.max(1));
    let m = &g * g.adjoint();
    let tr = m.trace();
    QuantumState::new(m / tr, dims.to_vec()).expect("Ginibre construction yields a state")
}

/// Haar-distributed unitary via QR with phase correction.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, d: usize) -> CMatrix {
    let qr = ginibre(rng, d, d).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let ph = r[(j, j)] / r[(j, j)].norm();
        for i in 0..d {
            q[(i, j)] *= ph;
        }
    }
    q
}

/// Random orthonormal bases, one rank-one projector per outcome. Each
/// setting's outcome count must equal the observer's dimension.
pub fn random_projective_model<R: Rng + ?Sized>(rng: &mut R, s: &Scenario, dims: &[usize]) -> MeasurementModel {
    let bases = (0..s.num_observers())
        .map(|o| {
            (0..s.settings(o))
                .map(|_| {
                    let u = random_unitary(rng, dims[o]);
                    (0..dims[o])
                        .map(|j| CVector::from_iterator(dims[o], u.column(j).iter().copied()))
                        .collect()
                })
                .collect()
        })
        .collect();
    MeasurementModel::from_bases(bases).expect("unitary columns give a projective model")
}
