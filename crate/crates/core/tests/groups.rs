use std::collections::HashSet;

use mloop_core::loop_core::{direct_product, gen_abelian, gen_zassenhaus81, quotient};
use mloop_core::mult_group::{inner_mapping, translation};
use mloop_core::structure::{associator_subloop, center, Subloop};
use mloop_core::{CayleyLoop, Error, Guards, MultGroupBundle, PermGroup, Permutation};
use proptest::prelude::*;

/// Breadth-first closure of a generating set; the group order oracle.
fn naive_elements(degree: usize, gens: &[Permutation]) -> HashSet<Permutation> {
    let mut seen = HashSet::from([Permutation::identity(degree)]);
    let mut frontier = vec![Permutation::identity(degree)];
    while let Some(g) = frontier.pop() {
        for s in gens {
            let h = s.compose(&g);
            if seen.insert(h.clone()) {
                frontier.push(h);
            }
        }
    }
    seen
}

fn cycles(n: usize, c: &[&[usize]]) -> Permutation {
    Permutation::from_cycles(n, c).unwrap()
}

fn dihedral8() -> PermGroup {
    PermGroup::from_generators(4, &[cycles(4, &[&[0, 1, 2, 3]]), cycles(4, &[&[0, 2]])]).unwrap()
}

fn quaternion8() -> PermGroup {
    // Regular representation of Q8 on {±1, ±i, ±j, ±k}.
    let i = Permutation::from_images(vec![2, 3, 1, 0, 6, 7, 5, 4]).unwrap();
    let j = Permutation::from_images(vec![4, 5, 7, 6, 1, 0, 2, 3]).unwrap();
    PermGroup::from_generators(8, &[i, j]).unwrap()
}

fn small_nilpotent_groups() -> Vec<(&'static str, PermGroup)> {
    let z9 = PermGroup::from_generators(9, &[cycles(9, &[&[0, 1, 2, 3, 4, 5, 6, 7, 8]])]).unwrap();
    let z2z4 = PermGroup::from_generators(6, &[cycles(6, &[&[0, 1]]), cycles(6, &[&[2, 3, 4, 5]])])
        .unwrap();
    let z6 = PermGroup::from_generators(5, &[cycles(5, &[&[0, 1], &[2, 3, 4]])]).unwrap();
    let m27 = MultGroupBundle::new(&gen_abelian(&[3, 3, 3], 64).unwrap())
        .unwrap()
        .mult_group()
        .clone();
    vec![
        ("Z9", z9),
        ("Z2xZ4", z2z4),
        ("Z6", z6),
        ("D8", dihedral8()),
        ("Q8", quaternion8()),
        ("Z3^3", m27),
    ]
}

#[test]
fn schreier_sims_order_matches_enumeration() {
    let s5 =
        PermGroup::from_generators(5, &[cycles(5, &[&[0, 1]]), cycles(5, &[&[0, 1, 2, 3, 4]])])
            .unwrap();
    let a5 = PermGroup::from_generators(
        5,
        &[cycles(5, &[&[0, 1, 2]]), cycles(5, &[&[0, 1, 2, 3, 4]])],
    )
    .unwrap();
    let guards = Guards::DEFAULT;
    for (name, g) in small_nilpotent_groups()
        .into_iter()
        .chain([("S5", s5), ("A5", a5)])
    {
        let naive = naive_elements(g.degree(), g.generators());
        assert_eq!(g.order(), naive.len() as u128, "{name}");
        let listed: HashSet<Permutation> =
            g.enumerate_elements(&guards).unwrap().into_iter().collect();
        assert_eq!(listed, naive, "{name}");
        for p in &naive {
            assert!(g.contains(p).unwrap());
        }
    }
}

#[test]
fn frattini_formula_matches_search() {
    let guards = Guards::DEFAULT;
    let expected = [
        ("Z9", 3),
        ("Z2xZ4", 2),
        ("Z6", 1),
        ("D8", 2),
        ("Q8", 2),
        ("Z3^3", 1),
    ];
    for ((name, g), (_, order)) in small_nilpotent_groups().into_iter().zip(expected) {
        let formula = g.frattini_subgroup(&guards).unwrap();
        let search = g.frattini_subgroup_by_search(&guards).unwrap();
        assert!(formula.same_group(&search), "{name}");
        assert_eq!(formula.order(), order, "{name}");
    }
}

#[test]
fn non_nilpotent_groups_are_rejected() {
    let s3 =
        PermGroup::from_generators(3, &[cycles(3, &[&[0, 1]]), cycles(3, &[&[0, 1, 2]])]).unwrap();
    assert!(matches!(
        s3.frattini_subgroup(&Guards::DEFAULT),
        Err(Error::NotNilpotent { .. })
    ));
    assert_eq!(s3.nilpotency_class(&Guards::DEFAULT).unwrap(), None);
    assert_eq!(
        dihedral8().nilpotency_class(&Guards::DEFAULT).unwrap(),
        Some(2)
    );
}

#[test]
fn subgroup_queries() {
    let guards = Guards::DEFAULT;
    let d8 = dihedral8();
    let rotations = d8.subgroup(&[cycles(4, &[&[0, 1, 2, 3]])]).unwrap();
    assert_eq!(rotations.order(), 4);
    assert!(d8.is_normal_subgroup(&rotations).unwrap());
    let reflection = d8.subgroup(&[cycles(4, &[&[0, 2]])]).unwrap();
    assert!(!d8.is_normal_subgroup(&reflection).unwrap());
    assert_eq!(
        d8.normalizer_of_subgroup(&reflection, &guards)
            .unwrap()
            .order(),
        4
    );
    assert_eq!(d8.center_of_group(&guards).unwrap().order(), 2);
    assert_eq!(d8.derived_subgroup().unwrap().order(), 2);
    assert_eq!(
        d8.normal_closure(reflection.generators()).unwrap().order(),
        4
    );
    assert!(d8.subgroup(&[cycles(4, &[&[0, 1]])]).is_err());
    assert!(matches!(
        PermGroup::from_generators(4, &[cycles(5, &[&[0, 1]])]),
        Err(Error::DegreeMismatch { .. })
    ));
    let g = PermGroup::from_generators(4, &[cycles(4, &[&[0, 1]])]).unwrap();
    assert_eq!(g.orbit(0), vec![0, 1]);
    assert_eq!(d8.exponent(&guards).unwrap(), 4);
}

#[test]
fn zassenhaus_mult_group() {
    let l = gen_zassenhaus81();
    let bundle = MultGroupBundle::new(&l).unwrap();
    let m = bundle.mult_group();
    let translations: Vec<Permutation> = (0..81).map(|x| translation(&l, x)).collect();
    let naive = naive_elements(81, &translations);
    assert_eq!(m.order(), 2187);
    assert_eq!(naive.len(), 2187);
    assert_eq!(bundle.inner_group().order(), 27);
    assert_eq!(m.order(), 81 * bundle.inner_group().order());
    assert!(bundle.first_nontrivial_t().is_none());

    let guards = Guards::DEFAULT;
    let zm = m.center_of_group(&guards).unwrap();
    assert_eq!(zm.order(), 3);
    let derived = m.derived_subgroup().unwrap();
    assert_eq!(derived.order(), 81);
    assert_eq!(m.frattini_subgroup(&guards).unwrap().order(), 81);
    assert_eq!(m.nilpotency_class(&guards).unwrap(), Some(3));

    // Every inner mapping fixes the identity and lies in I.
    for (x, y) in [(3, 9), (27, 9), (5, 77)] {
        let t = inner_mapping(&l, x, y);
        assert_eq!(t.apply(0), 0);
        assert!(bundle.inner_group().contains(&t).unwrap());
    }
    // Central elements give central translations.
    for &a in center(&l).elements() {
        assert!(zm.contains(bundle.translation(a)).unwrap());
    }
}

#[test]
fn lemma1_for_normal_subloops() {
    let l = gen_zassenhaus81();
    let bundle = MultGroupBundle::new(&l).unwrap();
    let guards = Guards::DEFAULT;
    let lp = associator_subloop(&l).unwrap();
    assert!(bundle.verify_lemma1(&lp, &guards).unwrap().passed());
    assert!(bundle
        .verify_lemma1(&Subloop::trivial(&l), &guards)
        .unwrap()
        .passed());
    assert!(bundle
        .verify_lemma1(&Subloop::whole(&l), &guards)
        .unwrap()
        .passed());

    let hs = bundle.h_star(&lp, &guards).unwrap();
    let q = quotient(&l, &lp).unwrap();
    let mq = MultGroupBundle::new(&q.loop_).unwrap();
    assert_eq!(mq.mult_group().order(), 27);
    assert_eq!(hs.order(), 81);
    assert_eq!(bundle.orbit_of_identity(&hs, &guards).unwrap(), lp);
    let derived = bundle.mult_group().derived_subgroup().unwrap();
    assert_eq!(bundle.orbit_of_identity(&derived, &guards).unwrap(), lp);
}

#[test]
fn prop1_and_lemma7() {
    let guards = Guards::DEFAULT;
    let loops: Vec<CayleyLoop> = vec![
        gen_zassenhaus81(),
        gen_abelian(&[3, 3], 64).unwrap(),
        gen_abelian(&[2, 4], 64).unwrap(),
        direct_product(&gen_zassenhaus81(), &gen_abelian(&[3], 8).unwrap(), 1024).unwrap(),
    ];
    for l in &loops {
        let bundle = MultGroupBundle::new(l).unwrap();
        let p1 = bundle.verify_prop1(&guards).unwrap();
        assert!(p1.passed(), "{}: {}", l.label(), p1.witness);
        let l7 = bundle.verify_lemma7(&guards).unwrap();
        assert!(l7.passed(), "{}: {}", l.label(), l7.witness);
    }
}

#[test]
fn abelian_groups_have_trivial_inner_mappings() {
    let l = gen_abelian(&[3, 3, 3], 64).unwrap();
    let bundle = MultGroupBundle::new(&l).unwrap();
    assert!(bundle.inner_group().is_trivial());
    assert_eq!(bundle.mult_group().order(), 27);
}

#[test]
fn non_commutative_table_is_rejected() {
    let s3 =
        PermGroup::from_generators(3, &[cycles(3, &[&[0, 1]]), cycles(3, &[&[0, 1, 2]])]).unwrap();
    let (table, _) = s3.cayley_loop(&Guards::DEFAULT).unwrap();
    assert!(matches!(
        MultGroupBundle::new(&table),
        Err(Error::NotCommutative { .. })
    ));
}

fn perm(n: usize) -> impl Strategy<Value = Permutation> {
    Just((0..n).collect::<Vec<usize>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::from_images(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_groups_are_closed(gens in prop::collection::vec(perm(6), 1..4)) {
        let g = PermGroup::from_generators(6, &gens).unwrap();
        let naive = naive_elements(6, &gens);
        prop_assert_eq!(g.order(), naive.len() as u128);
        for a in naive.iter().take(40) {
            for b in naive.iter().take(40) {
                prop_assert!(g.contains(&a.compose(b)).unwrap());
            }
            prop_assert!(g.contains(&a.inverse()).unwrap());
        }
        let derived = g.derived_subgroup().unwrap();
        prop_assert!(derived.is_subgroup_of(&g));
        prop_assert!(g.is_normal_subgroup(&derived).unwrap());
    }
}
