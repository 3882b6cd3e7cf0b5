use bellcone::detvectors::{all_det_vectors, span_rank};
use bellcone::exact::{determinant, rank};
use bellcone::farkas::{enumerate_ch, enumerate_ch_deduped, validate};
use bellcone::nullspace::{canonicalize, enumerate_null_vectors, has_nonnegative_representative, null_basis};
use bellcone::quantum::random::random_state;
use bellcone::quantum::{ppt_test, PptVerdict};
use bellcone::{Canonicalizer, Rational, Scenario, SizeGuard};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scenario_strategy(max_observers: usize) -> impl Strategy<Value = Scenario> {
    prop::collection::vec(prop::collection::vec(1usize..=3, 1..=3), 2..=max_observers).prop_filter_map(
        "keep N_λ small",
        |rows| {
            let refs: Vec<&[usize]> = rows.iter().map(Vec::as_slice).collect();
            let s = Scenario::from_outcomes(&refs).ok()?;
            (s.n_lambda() <= 256 && s.n_k() <= 128).then_some(s)
        },
    )
}

fn s222() -> Scenario {
    Scenario::uniform(2, 2, 2).unwrap()
}

fn ch_members(s: &Scenario) -> Vec<Vec<i64>> {
    enumerate_ch(s, None).map(|f| f.unwrap().into_components()).collect()
}

fn add_nulls(f: &[i64], nulls: &[Vec<i64>], coeffs: &[i64]) -> Vec<i64> {
    let mut g = f.to_vec();
    for (z, &c) in nulls.iter().zip(coeffs) {
        for (x, &y) in g.iter_mut().zip(z) {
            *x += c * y;
        }
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn index_maps_are_bijective(s in scenario_strategy(3), k_seed in any::<u64>(), l_seed in any::<u64>()) {
        let k = (k_seed % s.n_k() as u64) as usize;
        let c = s.coincidence(k).unwrap();
        prop_assert_eq!(s.k_index(&c).unwrap(), k);
        let l = l_seed as u128 % s.n_lambda();
        let a = s.assignment(l).unwrap();
        prop_assert_eq!(s.lambda_index(&a).unwrap(), l);
    }

    #[test]
    fn null_and_span_ranks_fill_coincidence_space(s in scenario_strategy(3)) {
        let z: Vec<Vec<i64>> = enumerate_null_vectors(&s).into_iter().map(|z| z.components).collect();
        let rz = if z.is_empty() { 0 } else { rank(&z) };
        let rb = span_rank(&s, SizeGuard::default()).unwrap();
        prop_assert_eq!(rz + rb, s.n_k());
        let c = s.counts();
        prop_assert_eq!((c.n_z as usize, c.n_d as usize), (rz, rb));
    }

    #[test]
    fn null_gram_is_nonsingular(s in scenario_strategy(2)) {
        let basis = null_basis(&s);
        prop_assume!(!basis.is_empty());
        let g: Vec<Vec<i64>> = basis
            .iter()
            .map(|a| basis.iter().map(|b| a.iter().zip(b).map(|(x, y)| x * y).sum()).collect())
            .collect();
        prop_assert!(determinant(&g) > 0.into());
    }

    #[test]
    fn canonical_form_is_a_class_invariant(
        pick in 0usize..64,
        coeffs in prop::collection::vec(-3i64..=3, 24),
    ) {
        let s = s222();
        let canon = Canonicalizer::new(&s);
        let f = &ch_members(&s)[pick];
        let nulls: Vec<Vec<i64>> = enumerate_null_vectors(&s).into_iter().map(|z| z.components).collect();
        let g = add_nulls(f, &nulls, &coeffs);
        let cf = canon.canonicalize(f).unwrap();
        prop_assert_eq!(&canon.canonicalize(&g).unwrap(), &cf);
        let again: Vec<i64> = cf.iter().map(|x| i64::try_from(x).unwrap()).collect();
        prop_assert_eq!(canon.canonicalize(&again).unwrap(), cf);
    }

    #[test]
    fn null_perturbation_keeps_bounds_and_scores(
        pick in 0usize..64,
        coeffs in prop::collection::vec(-2i64..=2, 24),
        weights in prop::collection::vec(0i64..5, 16),
    ) {
        let s = s222();
        prop_assume!(weights.iter().any(|&w| w > 0));
        let f = ch_members(&s)[pick].clone();
        let nulls: Vec<Vec<i64>> = enumerate_null_vectors(&s).into_iter().map(|z| z.components).collect();
        let g = add_nulls(&f, &nulls, &coeffs);
        let vf = validate(&s, &f, SizeGuard::default()).unwrap();
        let vg = validate(&s, &g, SizeGuard::default()).unwrap();
        prop_assert_eq!((vf.m(), vf.n()), (vg.m(), vg.n()));
        let total: i64 = weights.iter().sum();
        let vecs = all_det_vectors(&s, SizeGuard::default()).unwrap();
        let p: Vec<Rational> = (0..s.n_k())
            .map(|k| {
                let num: i64 = vecs.iter().zip(&weights).map(|(b, &w)| b.dense()[k] as i64 * w).sum();
                Rational::new(num.into(), total.into())
            })
            .collect();
        prop_assert_eq!(vf.evaluate(&p), vg.evaluate(&p));
    }

    #[test]
    fn products_of_states_are_ppt(seed in any::<u64>(), ra in 1usize..=2, rb in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_state(&mut rng, &[2], ra);
        let b = random_state(&mut rng, &[3], rb);
        prop_assert_eq!(ppt_test(&a.tensor(&b)).unwrap().verdict, PptVerdict::Ppt);
    }
}

#[test]
fn ch_family_has_eight_classes_on_two_by_two() {
    let s = s222();
    assert_eq!(ch_members(&s).len(), 64);
    assert_eq!(enumerate_ch_deduped(&s, None).unwrap().len(), 8);
}

#[test]
fn ch_family_classes_for_three_observers() {
    let s = Scenario::uniform(3, 2, 2).unwrap();
    assert_eq!(ch_members(&s).len(), 768);
    assert_eq!(enumerate_ch_deduped(&s, None).unwrap().len(), 96);
}

#[test]
fn full_negative_line_is_equivalent_to_its_ch_vector() {
    // CH vector plus null vectors, one of which empties a whole line of a
    // sector into negative entries.
    let s = s222();
    let f = ch_members(&s)[0].clone();
    let nulls = enumerate_null_vectors(&s);
    let mut g = f.clone();
    for z in nulls.iter().take(3) {
        for (x, y) in g.iter_mut().zip(&z.components) {
            *x -= 2 * y;
        }
    }
    assert!(g.iter().any(|&x| x < 0));
    let negative_line = s.sectors().any(|sec| {
        let ks: Vec<usize> = (0..s.n_k()).filter(|&k| s.sector_of(k) == sec).collect();
        (0..2).any(|x| {
            ks.iter()
                .filter(|&&k| s.coincidence(k).unwrap().0[0].outcome == x)
                .all(|&k| g[k] < 0)
        })
    });
    assert!(negative_line);
    assert_eq!(canonicalize(&s, &g).unwrap(), canonicalize(&s, &f).unwrap());
    let vf = validate(&s, &f, SizeGuard::default()).unwrap();
    let vg = validate(&s, &g, SizeGuard::default()).unwrap();
    assert_eq!((vg.m(), vg.n()), (vf.m(), vf.n()));
}

#[test]
fn null_vector_plus_positive_cell_is_trivial() {
    let s = s222();
    let z = &enumerate_null_vectors(&s)[0].components;
    let mut f = z.clone();
    let k = (0..s.n_k()).find(|&k| z[k] == 0).unwrap();
    f[k] += 1;
    assert!(f.iter().any(|&x| x < 0));
    assert!(has_nonnegative_representative(&s, &f).unwrap());
    for g in ch_members(&s) {
        assert!(!has_nonnegative_representative(&s, &g).unwrap());
    }
}
