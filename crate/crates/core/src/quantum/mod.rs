//! Quantum coincidence probabilities, partial transposition and the PPT
//! test, the transpose-invariance identity for Bell functionals, and GHZ
//! post-selection.

mod model;
pub mod random;
mod state;

pub use model::{rotation_basis, MeasurementModel};
pub use state::{hermitian_eigenvalues, CMatrix, CVector, QuantumState, STRUCTURAL_TOL};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::farkas::FarkasVector;
use crate::polytope::{ingest_floats, IngestOptions, ProbVector};
use crate::scenario::Scenario;

/// Eigenvalues below this are reported as a negative partial transpose.
pub const PPT_TOL: f64 = 1e-8;

/// `Tr(M · ⊗_o Π_o(K))` for every K, with `M` any matrix on the joint space.
fn traces(m: &CMatrix, dims: &[usize], model: &MeasurementModel, s: &Scenario) -> Result<Vec<f64>> {
    model.check_scenario(s)?;
    if model.dims() != dims {
        return Err(Error::DimensionMismatch(format!(
            "state dimensions {dims:?} against model dimensions {:?}",
            model.dims()
        )));
    }
    (0..s.n_k())
        .map(|k| {
            let c = s.coincidence(k)?;
            let mut op: Option<CMatrix> = None;
            for (o, so) in c.0.iter().enumerate() {
                let p = model.projector(o, so.setting, so.outcome);
                op = Some(match op {
                    None => p.clone(),
                    Some(acc) => acc.kronecker(p),
                });
            }
            let op = op.expect("at least two observers");
            Ok((m * op).trace().re)
        })
        .collect()
}

/// `P_K = Tr(ρ ⊗_o Π_o(K))`, one subsystem per observer.
pub fn born_probabilities(state: &QuantumState, model: &MeasurementModel, s: &Scenario) -> Result<Vec<f64>> {
    traces(state.matrix(), state.dims(), model, s)
}

/// Born probabilities ingested as an exact rational vector.
pub fn born_prob_vector(
    state: &QuantumState,
    model: &MeasurementModel,
    s: &Scenario,
    opts: IngestOptions,
) -> Result<ProbVector> {
    ingest_floats(s, &born_probabilities(state, model, s)?, opts)
}

/// `σ` with the row and column indices of every subsystem in `subset`
/// exchanged.
pub fn partial_transpose(m: &CMatrix, dims: &[usize], subset: &[usize]) -> Result<CMatrix> {
    state::check_dims(m, dims)?;
    if subset.iter().any(|&i| i >= dims.len()) {
        return Err(Error::IndexOutOfRange(format!(
            "subsystem subset {subset:?} for {} subsystems",
            dims.len()
        )));
    }
    let n = m.nrows();
    let digits = |mut i: usize| -> Vec<usize> {
        let mut d = vec![0; dims.len()];
        for j in (0..dims.len()).rev() {
            d[j] = i % dims[j];
            i /= dims[j];
        }
        d
    };
    let compose = |d: &[usize]| d.iter().zip(dims).fold(0, |acc, (&x, &r)| acc * r + x);
    let mut out = CMatrix::zeros(n, n);
    for r in 0..n {
        let rd = digits(r);
        for c in 0..n {
            let mut a = rd.clone();
            let mut b = digits(c);
            for &i in subset {
                std::mem::swap(&mut a[i], &mut b[i]);
            }
            out[(r, c)] = m[(compose(&a), compose(&b))];
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PptVerdict {
    /// No cut has a negative eigenvalue; necessary, not sufficient, for
    /// separability.
    Ppt,
    /// Some cut has a negative eigenvalue: not separable.
    Npt,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PptReport {
    /// `(subset, minimal eigenvalue of the partial transpose)` for every
    /// nonempty proper subset.
    pub cuts: Vec<(Vec<usize>, f64)>,
    pub min_eigenvalue: f64,
    pub verdict: PptVerdict,
}

pub fn ppt_test(state: &QuantumState) -> Result<PptReport> {
    let n = state.dims().len();
    if n < 2 {
        return Err(Error::InvalidQuantum("PPT test needs at least two subsystems".into()));
    }
    let mut cuts = Vec::new();
    for mask in 1..(1usize << n) - 1 {
        let subset: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let sigma = partial_transpose(state.matrix(), state.dims(), &subset)?;
        cuts.push((subset, hermitian_eigenvalues(&sigma)[0]));
    }
    let min_eigenvalue = cuts.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    Ok(PptReport {
        cuts,
        min_eigenvalue,
        verdict: if min_eigenvalue < -PPT_TOL {
            PptVerdict::Npt
        } else {
            PptVerdict::Ppt
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvarianceReport {
    /// `Σ_K F^K Tr(ρ A_K ⊗ B_K)`.
    pub rho_value: f64,
    /// `Σ_K F^K Tr(σ A_K ⊗ B*_K)` with `σ` transposed on the second subsystem.
    pub sigma_value: f64,
    pub difference: f64,
}

pub fn transpose_invariance_check(
    state: &QuantumState,
    model: &MeasurementModel,
    s: &Scenario,
    farkas: &FarkasVector,
) -> Result<InvarianceReport> {
    if state.dims().len() != 2 {
        return Err(Error::DimensionMismatch(
            "transpose invariance needs two subsystems".into(),
        ));
    }
    if farkas.components().len() != s.n_k() {
        return Err(Error::LengthMismatch {
            expected: s.n_k(),
            found: farkas.components().len(),
        });
    }
    let sigma = partial_transpose(state.matrix(), state.dims(), &[1])?;
    let conj = model.conjugate_observer(1)?;
    let p = traces(state.matrix(), state.dims(), model, s)?;
    let q = traces(&sigma, state.dims(), &conj, s)?;
    let rho_value = farkas.evaluate_f64(&p);
    let sigma_value = farkas.evaluate_f64(&q);
    Ok(InvarianceReport {
        rho_value,
        sigma_value,
        difference: (rho_value - sigma_value).abs(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GhzReport {
    /// `(xxx + yyy)/√2`.
    pub before: CVector,
    /// Normalized two-party state after observer 1 finds `u`.
    pub after: CVector,
    pub success_probability: f64,
    /// `|⟨(uu + vv)/√2 | after⟩|²`.
    pub fidelity: f64,
    /// Concurrence `2|ad − bc|` of the post-selected state.
    pub concurrence: f64,
    /// Concurrence left when observer 1 tests `x` instead of `u`.
    pub x_test_concurrence: f64,
    /// CH value of the post-selected state at its optimal settings.
    pub ch_value: f64,
}

fn ket(v: &[f64]) -> CVector {
    CVector::from_vec(v.iter().map(|&x| Complex64::new(x, 0.0)).collect())
}

/// `⟨a|_1 ψ` for a three-qubit `ψ`, returning (norm², normalized remainder).
fn project_first(psi: &CVector, a: &CVector) -> (f64, CVector) {
    let mut rest = CVector::zeros(4);
    for i in 0..2 {
        for j in 0..4 {
            rest[j] += a[i].conj() * psi[i * 4 + j];
        }
    }
    let p = rest.norm_squared();
    (p, rest.unscale(p.sqrt()))
}

fn concurrence(v: &CVector) -> f64 {
    2.0 * (v[0] * v[3] - v[1] * v[2]).norm()
}

pub fn ghz_postselect() -> Result<GhzReport> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let x = ket(&[1.0, 0.0]);
    let y = ket(&[0.0, 1.0]);
    let u = (&x + &y).scale(r);
    let v = (&x - &y).scale(r);
    let kron3 = |a: &CVector, b: &CVector, c: &CVector| a.kronecker(b).kronecker(c);
    let before = (kron3(&x, &x, &x) + kron3(&y, &y, &y)).scale(r);
    let (success_probability, after) = project_first(&before, &u);
    let target = (u.kronecker(&u) + v.kronecker(&v)).scale(r);
    let fidelity = (target.adjoint() * &after)[(0, 0)].norm_sqr();
    let (_, x_rest) = project_first(&before, &x);

    let s = Scenario::uniform(2, 2, 2)?;
    let state = QuantumState::pure(&after, vec![2, 2])?;
    let p = born_probabilities(&state, &MeasurementModel::phi_plus_ch_optimal(), &s)?;
    Ok(GhzReport {
        concurrence: concurrence(&after),
        x_test_concurrence: concurrence(&x_rest),
        ch_value: ch_functional(&p),
        before,
        after,
        success_probability,
        fidelity,
    })
}

/// `p(A1=0,B0=0)... ` CH functional of the 2×2×2 vector with `-1` on
/// (A0 = 0, B0 = 0) and `+1` on (A0 = 0, B1 = 0), (A1 = 0, B0 = 0),
/// (A1 = 1, B1 = 1).
pub fn ch_functional(p: &[f64]) -> f64 {
    -p[0] + p[2] + p[8] + p[15]
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointwiseReport {
    /// `((a, n, β, μ), a(1−μ) + β(1−n) + nμ − aβ)` for all 16 tuples.
    pub values: Vec<([u8; 4], i32)>,
    pub pass: bool,
}

/// Exhaustive check that `0 ≤ a(1−μ) + β(1−n) + nμ − aβ ≤ 1` on `{0,1}⁴`.
pub fn pointwise_ch_identity_check() -> PointwiseReport {
    let mut values = Vec::with_capacity(16);
    for bits in 0..16u8 {
        let t = [bits >> 3 & 1, bits >> 2 & 1, bits >> 1 & 1, bits & 1];
        let [a, n, beta, mu] = t.map(i32::from);
        values.push((t, a * (1 - mu) + beta * (1 - n) + n * mu - a * beta));
    }
    let pass = values.iter().all(|&(_, v)| (0..=1).contains(&v));
    PointwiseReport { values, pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detvectors::SizeGuard;
    use crate::exact::{rational_to_f64, Rational};
    use crate::farkas::{generate_ch, ChPartitionSpec};
    use crate::nullspace::no_signaling_defect;
    use crate::polytope::decide_membership;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s222() -> Scenario {
        Scenario::uniform(2, 2, 2).unwrap()
    }

    #[test]
    fn singlet_probabilities() {
        let s = s222();
        let m = MeasurementModel::qubit_rotations(&[&[0.0, 45.0], &[0.0, 90.0]]).unwrap();
        let p = born_probabilities(&QuantumState::singlet(), &m, &s).unwrap();
        // Same basis in setting (0,0): equal outcomes never coincide.
        assert!(p[0].abs() < 1e-12);
        assert!(p[5].abs() < 1e-12);
        assert!((p.iter().sum::<f64>() - 4.0).abs() < 1e-12);
        let q: Vec<Rational> = p
            .iter()
            .map(|&x| crate::exact::rationalize(x, 1e-12).unwrap())
            .collect();
        let worst = no_signaling_defect(&s, &q)
            .unwrap()
            .iter()
            .map(|r| rational_to_f64(&r.residual).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-8);
    }

    #[test]
    fn product_state_probabilities_factor() {
        let s = s222();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random::random_state(&mut rng, &[2], 2);
        let b = random::random_state(&mut rng, &[2], 2);
        let m = random::random_projective_model(&mut rng, &s, &[2, 2]);
        let p = born_probabilities(&a.tensor(&b), &m, &s).unwrap();
        for (k, pk) in p.iter().enumerate() {
            let c = s.coincidence(k).unwrap().0;
            let pa = (a.matrix() * m.projector(0, c[0].setting, c[0].outcome)).trace().re;
            let pb = (b.matrix() * m.projector(1, c[1].setting, c[1].outcome)).trace().re;
            assert!((pk - pa * pb).abs() < 1e-12);
        }
    }

    #[test]
    fn singlet_violation_at_optimal_angles() {
        let s = s222();
        let p = born_probabilities(&QuantumState::singlet(), &MeasurementModel::singlet_ch_optimal(), &s).unwrap();
        assert!((ch_functional(&p) - (1.0 - 2f64.sqrt()) / 2.0).abs() < 1e-12);
        let pv = born_prob_vector(
            &QuantumState::singlet(),
            &MeasurementModel::singlet_ch_optimal(),
            &s,
            IngestOptions::default(),
        )
        .unwrap();
        assert!(!decide_membership(&s, &pv, SizeGuard::default()).unwrap().is_inside());
    }

    #[test]
    fn partial_transpose_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let st = random::random_state(&mut rng, &[2, 3], 6);
        let m = st.matrix();
        let full = partial_transpose(m, st.dims(), &[0, 1]).unwrap();
        assert!(state::max_abs(&(full - m.transpose())) < 1e-15);
        let once = partial_transpose(m, st.dims(), &[1]).unwrap();
        let twice = partial_transpose(&once, st.dims(), &[1]).unwrap();
        assert!(state::max_abs(&(twice - m)) < 1e-15);
        assert!((once.trace() - m.trace()).norm() < 1e-12);
        assert!(state::max_abs(&(&once - once.adjoint())) < 1e-12);
        assert!(partial_transpose(m, st.dims(), &[2]).is_err());
    }

    #[test]
    fn ppt_examples() {
        let singlet = ppt_test(&QuantumState::singlet()).unwrap();
        assert_eq!(singlet.verdict, PptVerdict::Npt);
        assert!((singlet.min_eigenvalue + 0.5).abs() < 1e-9);
        for (v, expect) in [
            (0.25, PptVerdict::Ppt),
            (1.0 / 3.0, PptVerdict::Ppt),
            (0.34, PptVerdict::Npt),
        ] {
            let r = ppt_test(&QuantumState::werner(v).unwrap()).unwrap();
            assert_eq!(r.verdict, expect, "visibility {v}");
            assert!((r.min_eigenvalue - (1.0 - 3.0 * v) / 4.0).abs() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let prod = random::random_state(&mut rng, &[2], 2).tensor(&random::random_state(&mut rng, &[3], 3));
        assert_eq!(ppt_test(&prod).unwrap().verdict, PptVerdict::Ppt);
        assert!(ppt_test(&QuantumState::maximally_mixed(2)).is_err());
    }

    #[test]
    fn invariance_on_singlet_and_real_inputs() {
        let s = s222();
        let ch = generate_ch(&s, &ChPartitionSpec::simple(&s).unwrap()).unwrap();
        let r = transpose_invariance_check(
            &QuantumState::singlet(),
            &MeasurementModel::singlet_ch_optimal(),
            &s,
            &ch,
        )
        .unwrap();
        assert!((r.rho_value - (1.0 - 2f64.sqrt()) / 2.0).abs() < 1e-10);
        assert!(r.difference < 1e-10);
    }

    #[test]
    fn ghz_postselection() {
        let g = ghz_postselect().unwrap();
        assert!((g.success_probability - 0.5).abs() < 1e-12);
        assert!(g.fidelity > 1.0 - 1e-12);
        assert!((g.concurrence - 1.0).abs() < 1e-12);
        assert!(g.x_test_concurrence < 1e-12);
        assert!((g.ch_value - (1.0 - 2f64.sqrt()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn pointwise_identity() {
        let r = pointwise_ch_identity_check();
        assert!(r.pass);
        assert_eq!(r.values.len(), 16);
        assert_eq!(r.values[0], ([0, 0, 0, 0], 0));
        assert_eq!(r.values[0b1001], ([1, 0, 0, 1], 0));
    }
}
