use mloop_core::loop_core::{direct_product, gen_abelian, gen_zassenhaus81, zassenhaus_index};
use mloop_core::normalizer::{
    ascending_subnormal_system, normalizer, normalizer_chain, normalizer_condition,
    normalizer_oracle, saturation_runs,
};
use mloop_core::structure::{all_subloops, extend_subloop, generate_subloop, is_normal, Subloop};
use mloop_core::{CayleyLoop, Error, Guards};

fn e(t: [u8; 4]) -> usize {
    zassenhaus_index(t)
}

/// Subloops of `K` that contain `H` and in which `H` is normal.
fn normalizing_subloops(
    l: &CayleyLoop,
    k: &Subloop,
    h: &Subloop,
    lattice: &[Subloop],
) -> Vec<Subloop> {
    lattice
        .iter()
        .filter(|s| h.is_subset(s) && s.is_subset(k) && is_normal(l, h, s).unwrap())
        .cloned()
        .collect()
}

#[test]
fn trace_invariants_over_the_lattice() {
    let l = gen_zassenhaus81();
    let whole = Subloop::whole(&l);
    let lattice = all_subloops(&l, &Guards::DEFAULT).unwrap();
    for h in &lattice {
        let trace = normalizer(&l, &whole, h).unwrap();
        assert!(trace.is_monotone(), "{h}");
        assert!(h.is_subset(&trace.result));
        assert!(is_normal(&l, h, &trace.result).unwrap());
        assert!(trace.postconditions.h_normal);
        let first_p = &trace.p_stages[0];
        assert!(h
            .elements()
            .iter()
            .all(|x| first_p.binary_search(x).is_ok()));
        // When the stages meet, the result is the largest normalizing subloop.
        if trace.postconditions.hold() {
            for s in normalizing_subloops(&l, &whole, h, &lattice) {
                assert!(s.is_subset(&trace.result), "{s} escapes N({h})");
            }
        }
    }
}

#[test]
fn normal_subloops_are_their_own_witnesses() {
    let l = gen_zassenhaus81();
    let whole = Subloop::whole(&l);
    for h in [
        Subloop::trivial(&l),
        generate_subloop(&l, &[1]).unwrap(),
        whole.clone(),
    ] {
        let trace = normalizer(&l, &whole, &h).unwrap();
        assert_eq!(trace.result, whole);
        assert!(trace.postconditions.hold());
    }
}

#[test]
fn no_largest_normalizing_subloop_for_a_unit_vector() {
    let l = gen_zassenhaus81();
    let whole = Subloop::whole(&l);
    let (e1, e2, e3, e4) = (
        e([1, 0, 0, 0]),
        e([0, 1, 0, 0]),
        e([0, 0, 1, 0]),
        e([0, 0, 0, 1]),
    );
    let h = generate_subloop(&l, &[e1]).unwrap();
    let a = extend_subloop(&l, &h, e2);
    let b = extend_subloop(&l, &h, e3);
    assert_eq!((a.len(), b.len()), (9, 9));
    assert!(is_normal(&l, &h, &a).unwrap());
    assert!(is_normal(&l, &h, &b).unwrap());
    let joined = generate_subloop(&l, &[e1, e2, e3]).unwrap();
    assert!(joined.is_whole());
    assert!(!is_normal(&l, &h, &joined).unwrap());

    let trace = normalizer(&l, &whole, &h).unwrap();
    assert_eq!(trace.result, generate_subloop(&l, &[e1, e4]).unwrap());
    assert!(!trace.postconditions.stages_agree);
    assert!(trace.postconditions.normal_extension_outside.is_some());
    let ends = saturation_runs(&l, &whole, &h, 0, 5).unwrap();
    assert!(ends
        .iter()
        .all(|s| !s.is_whole() && is_normal(&l, &h, s).unwrap()));
    assert!(matches!(
        normalizer_oracle(&l, &whole, &h, 0, 5),
        Err(Error::Postcondition(_))
    ));
}

#[test]
fn associative_loops_agree_with_the_oracle() {
    let l = gen_abelian(&[3, 3, 3], 64).unwrap();
    let whole = Subloop::whole(&l);
    for h in all_subloops(&l, &Guards::DEFAULT).unwrap() {
        let trace = normalizer(&l, &whole, &h).unwrap();
        assert!(trace.postconditions.hold());
        assert_eq!(trace.result, whole);
        assert_eq!(normalizer_oracle(&l, &whole, &h, 3, 3).unwrap(), whole);
    }
}

#[test]
fn ambient_subloop_is_respected() {
    let l = gen_zassenhaus81();
    let k = generate_subloop(&l, &[e([1, 0, 0, 0]), e([0, 1, 0, 0]), e([0, 0, 0, 1])]).unwrap();
    let h = generate_subloop(&l, &[e([1, 0, 0, 0])]).unwrap();
    let trace = normalizer(&l, &k, &h).unwrap();
    assert!(trace.result.is_subset(&k));
    assert!(trace.postconditions.hold());
    // K = <e1, e2, e4> is a group, so H is normal in all of it.
    assert_eq!(trace.result, k);

    let outside = generate_subloop(&l, &[e([0, 0, 1, 0])]).unwrap();
    assert!(matches!(
        normalizer(&l, &k, &outside),
        Err(Error::NotNested { .. })
    ));
}

#[test]
fn normalizer_condition_holds() {
    let loops = vec![
        gen_zassenhaus81(),
        gen_abelian(&[3, 3, 3], 64).unwrap(),
        gen_abelian(&[2, 4], 64).unwrap(),
    ];
    for l in loops {
        let nc = normalizer_condition(&l, &Guards::DEFAULT).unwrap();
        assert!(nc.holds, "{}: {:?}", l.label(), nc.witness);
        assert!(nc.sizes.iter().all(|&(h, n)| n > h));
    }
}

#[test]
fn chains_and_subnormal_systems() {
    let l = gen_zassenhaus81();
    let guards = Guards::DEFAULT;
    for h in all_subloops(&l, &guards).unwrap() {
        let chain = normalizer_chain(&l, &h, &guards).unwrap();
        assert!(chain.last().unwrap().is_whole());
        assert!(chain.len() - 1 <= 2, "{h}: {} steps", chain.len() - 1);
        let system = ascending_subnormal_system(&l, &h, &guards).unwrap();
        assert!(system.terms[0].is_trivial());
        assert!(system.terms.last().unwrap().is_whole());
        for w in system.terms.windows(2) {
            assert!(is_normal(&l, &w[0], &w[1]).unwrap());
        }
    }
}

#[test]
fn chain_respects_the_lattice_guard() {
    let p = direct_product(&gen_zassenhaus81(), &gen_abelian(&[3], 8).unwrap(), 1024).unwrap();
    let h = generate_subloop(&p, &[1]).unwrap();
    let err = normalizer_chain(&p, &h, &Guards::DEFAULT).unwrap_err();
    assert!(matches!(
        err,
        Error::OrderOverflow {
            guard: "lattice",
            ..
        }
    ));
}
