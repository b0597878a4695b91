use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{Context, Outcome};
use crate::error::{Error, Result};
use crate::loop_core::{prime_divisors, quotient, CayleyLoop};
use crate::normalizer::{normalizer, normalizer_chain, saturation_runs};
use crate::perm_group::{PermGroup, Permutation};
use crate::structure::{
    center, cube_subloop, frattini_subloop, generate_subloop, intersect_all, is_divisible,
    is_normal, maximal_elements, maximal_subloops, non_generator_refutation, Subloop,
};

pub type CheckFn = fn(&Context) -> Result<Outcome>;

type Suite = (&'static str, &'static [(&'static str, CheckFn)]);

/// Exhaustive scans above this many tuples are replaced by seeded samples.
const EXHAUSTIVE_LIMIT: u64 = 100_000_000;
const SAMPLED_TUPLES: usize = 2_000_000;
const DIASSOCIATIVE_PAIRS: usize = 256;
const ORACLE_RUNS: usize = 5;
const PROP3_PAIRS: usize = 24;
const CYCLIC_SUBGROUPS: usize = 24;
const NON_GENERATOR_TRIALS: usize = 200;

const SUITES: &[Suite] = &[
    (
        "identities",
        &[
            ("identities.inner_mapping_formula", inner_mapping_formula),
            ("identities.associator_symmetries", associator_symmetries),
            ("identities.associator_expansion", associator_expansion),
            ("identities.diassociativity", diassociativity),
        ],
    ),
    (
        "lemma1",
        &[
            ("lemma1.quotient_correspondence", lemma1_quotients),
            ("lemma1.orbit_of_identity", lemma1_orbits),
        ],
    ),
    ("lemma2", &[("lemma2.cubes_central", lemma2_cubes_central)]),
    (
        "lemma4",
        &[
            ("lemma4.loop_associator_in_frattini", lemma4_loop),
            ("lemma4.group_derived_in_frattini", lemma4_group),
        ],
    ),
    (
        "lemma6",
        &[
            ("lemma6.frattini_biconditional", lemma6_biconditional),
            ("lemma6.theorem1_equivalences", theorem1_equivalences),
            ("lemma6.prop2_equivalences", prop2_equivalences),
        ],
    ),
    ("lemma7", &[("lemma7.four_way_equality", lemma7_four_way)]),
    ("prop1", &[("prop1.center_isomorphism", prop1_center)]),
    (
        "prop3",
        &[
            ("prop3.normal_overloops_contained", prop3_containment),
            ("prop3.fixpoint_matches_saturation", prop3_oracle_agreement),
        ],
    ),
    (
        "prop4",
        &[
            ("prop4.loop_normalizer_chains", prop4_loop_chains),
            ("prop4.group_normalizer_chains", prop4_group_chains),
        ],
    ),
    (
        "theorem2",
        &[
            ("theorem2.normalizer_condition", theorem2_condition),
            ("theorem2.lemma3", theorem2_lemma3),
            ("theorem2.corollary1", theorem2_corollary1),
        ],
    ),
    (
        "frattini",
        &[
            ("frattini.maximal_subloops_vs_lattice", frattini_maximal),
            ("frattini.intersection_vs_lattice", frattini_intersection),
            ("frattini.lemma5_images", frattini_lemma5),
            ("frattini.non_generators_sampled", frattini_non_generators),
            ("frattini.group_formula_vs_search", frattini_group_oracle),
        ],
    ),
    (
        "divisible",
        &[
            ("divisible.loop", divisible_loop),
            ("divisible.group", divisible_group),
            ("divisible.trivial_direct_factor", divisible_decomposition),
        ],
    ),
];

/// Registered suite names, in registration order, followed by `all`.
pub fn suite_names() -> Vec<&'static str> {
    SUITES.iter().map(|(s, _)| *s).chain(["all"]).collect()
}

/// The checks a suite runs; `all` is every registered check once.
pub fn checks_for(suite: &str) -> Result<Vec<(&'static str, CheckFn)>> {
    if suite == "all" {
        return Ok(SUITES.iter().flat_map(|(_, c)| c.iter().copied()).collect());
    }
    SUITES
        .iter()
        .find(|(s, _)| *s == suite)
        .map(|(_, c)| c.to_vec())
        .ok_or_else(|| {
            Error::InvalidSpec(format!(
                "unknown suite '{suite}' (expected one of {})",
                suite_names().join(", ")
            ))
        })
}

fn rng(ctx: &Context, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(ctx.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Calls `f` on every `k`-tuple of elements, or on a seeded sample when there
/// are too many; returns the first tuple rejected by `f`.
fn scan_tuples<const K: usize>(
    ctx: &Context,
    salt: u64,
    mut f: impl FnMut([usize; K]) -> bool,
) -> (Option<[usize; K]>, serde_json::Value) {
    let n = ctx.loop_.order();
    let total = (n as u64).saturating_pow(K as u32);
    if total <= EXHAUSTIVE_LIMIT {
        let mut t = [0usize; K];
        for mut code in 0..total {
            for slot in t.iter_mut().rev() {
                *slot = (code % n as u64) as usize;
                code /= n as u64;
            }
            if !f(t) {
                return (Some(t), json!({ "tuples": total, "exhaustive": true }));
            }
        }
        (None, json!({ "tuples": total, "exhaustive": true }))
    } else {
        let mut r = rng(ctx, salt);
        for _ in 0..SAMPLED_TUPLES {
            let t: [usize; K] = std::array::from_fn(|_| r.gen_range(0..n));
            if !f(t) {
                return (
                    Some(t),
                    json!({ "tuples": SAMPLED_TUPLES, "exhaustive": false }),
                );
            }
        }
        (
            None,
            json!({ "tuples": SAMPLED_TUPLES, "exhaustive": false }),
        )
    }
}

fn tuple_outcome<const K: usize>(found: (Option<[usize; K]>, serde_json::Value)) -> Outcome {
    let (bad, mut witness) = found;
    match bad {
        None => Outcome::pass(witness),
        Some(t) => {
            witness["counterexample"] = json!(t.to_vec());
            Outcome::fail(witness)
        }
    }
}

/// Associator lookup table for loops small enough to tabulate.
struct Associators<'a> {
    l: &'a CayleyLoop,
    table: Option<Vec<u32>>,
}

impl<'a> Associators<'a> {
    fn new(l: &'a CayleyLoop) -> Self {
        let n = l.order();
        let table = (n <= 128).then(|| {
            let mut t = Vec::with_capacity(n * n * n);
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        t.push(l.associator(a, b, c) as u32);
                    }
                }
            }
            t
        });
        Associators { l, table }
    }

    #[inline]
    fn get(&self, a: usize, b: usize, c: usize) -> usize {
        let n = self.l.order();
        match &self.table {
            Some(t) => t[(a * n + b) * n + c] as usize,
            None => self.l.associator(a, b, c),
        }
    }
}

// ---- identities ----

fn inner_mapping_formula(ctx: &Context) -> Result<Outcome> {
    let l = ctx.loop_;
    Ok(tuple_outcome(scan_tuples::<3>(ctx, 2, |[x, y, z]| {
        let lhs = l.left_div(l.mul(x, y), l.mul(x, l.mul(y, z)));
        lhs == l.mul(z, l.associator(z, y, x))
    })))
}

fn associator_symmetries(ctx: &Context) -> Result<Outcome> {
    let l = ctx.loop_;
    let a = Associators::new(l);
    Ok(tuple_outcome(scan_tuples::<3>(ctx, 3, |[x, y, z]| {
        let k = a.get(x, y, z);
        k == a.get(y, z, x) && k == a.get(l.inv(y), x, z) && k == l.inv(a.get(y, x, z))
    })))
}

fn associator_expansion(ctx: &Context) -> Result<Outcome> {
    let l = ctx.loop_;
    let a = Associators::new(l);
    Ok(tuple_outcome(scan_tuples::<4>(ctx, 4, |[x, y, u, v]| {
        let xuv = a.get(x, u, v);
        let yuv = a.get(y, u, v);
        let left = l.mul(xuv, a.get(xuv, x, y));
        let right = l.mul(yuv, a.get(yuv, y, x));
        a.get(l.mul(x, y), u, v) == l.mul(left, right)
    })))
}

fn diassociativity(ctx: &Context) -> Result<Outcome> {
    let l = ctx.loop_;
    let n = l.order();
    let mut r = rng(ctx, 5);
    for _ in 0..DIASSOCIATIVE_PAIRS {
        let (x, y) = (r.gen_range(0..n), r.gen_range(0..n));
        let s = generate_subloop(l, &[x, y])?;
        for &a in s.elements() {
            for &b in s.elements() {
                for &c in s.elements() {
                    if l.associator(a, b, c) != 0 {
                        return Ok(Outcome::fail(json!({
                            "pair": [x, y],
                            "nonassociative_triple": [a, b, c],
                        })));
                    }
                }
            }
        }
    }
    Ok(Outcome::pass(json!({ "pairs": DIASSOCIATIVE_PAIRS })))
}

// ---- lemma 1 ----

/// Normal subloops used by the Lemma 1 checks: 1, L', Z(L), L.
fn standard_normal_subloops(ctx: &Context) -> Result<Vec<Subloop>> {
    let l = ctx.loop_;
    let mut out = vec![
        Subloop::trivial(l),
        ctx.associator_subloop()?.clone(),
        center(l),
        Subloop::whole(l),
    ];
    out.sort();
    out.dedup();
    Ok(out)
}

fn lemma1_quotients(ctx: &Context) -> Result<Outcome> {
    let bundle = ctx.bundle()?;
    let mut witnesses = Vec::new();
    for h in standard_normal_subloops(ctx)? {
        let o = bundle.verify_lemma1(&h, &ctx.guards)?;
        if !o.passed() {
            return Ok(o);
        }
        witnesses.push(o.witness);
    }
    Ok(Outcome::pass(json!({ "subloops": witnesses })))
}

fn lemma1_orbits(ctx: &Context) -> Result<Outcome> {
    let bundle = ctx.bundle()?;
    let mut checked = Vec::new();
    for h in standard_normal_subloops(ctx)? {
        let hs = bundle.h_star(&h, &ctx.guards)?;
        let orbit = bundle.orbit_of_identity(&hs, &ctx.guards)?;
        if !h.is_subset(&orbit) {
            return Ok(Outcome::fail(json!({ "H": h, "orbit": orbit })));
        }
        checked.push(json!({ "H": h.len(), "orbit": orbit.len() }));
    }
    let derived = bundle.mult_group().derived_subgroup()?;
    let orbit = bundle.orbit_of_identity(&derived, &ctx.guards)?;
    let lp = ctx.associator_subloop()?;
    let ok = lp.is_subset(&orbit);
    Ok(Outcome::from_bool(
        ok,
        json!({ "h_star_orbits": checked, "derived_orbit": orbit.len(), "associator_subloop": lp.len() }),
    ))
}

// ---- lemma 2 ----

fn lemma2_cubes_central(ctx: &Context) -> Result<Outcome> {
    let l = ctx.loop_;
    let z = center(l);
    if let Some(x) = (0..l.order()).find(|&x| !z.contains(l.pow(x, 3))) {
        return Ok(Outcome::fail(json!({ "x": x, "cube": l.pow(x, 3) })));
    }
    let cubes = cube_subloop(l)?;
    Ok(Outcome::from_bool(
        cubes.is_subset(&z),
        json!({ "center": z.len(), "cubes": cubes.len() }),
    ))
}

// ---- lemma 4 / lemma 6 ----

fn lemma4_loop(ctx: &Context) -> Result<Outcome> {
    let lp = ctx.associator_subloop()?;
    let phi = ctx.frattini()?;
    Ok(Outcome::from_bool(
        lp.is_subset(phi),
        json!({ "associator_subloop": lp, "frattini": phi }),
    ))
}

fn lemma4_group(ctx: &Context) -> Result<Outcome> {
    let m = ctx.bundle()?.mult_group();
    let derived = m.derived_subgroup()?;
    let phi = ctx.group_frattini()?;
    Ok(Outcome::from_bool(
        derived.is_subgroup_of(phi),
        json!({
            "order_M": m.order().to_string(),
            "order_derived": derived.order().to_string(),
            "order_frattini": phi.order().to_string(),
        }),
    ))
}

fn lemma6_biconditional(ctx: &Context) -> Result<Outcome> {
    let loop_side = ctx.frattini()?.is_whole();
    let m = ctx.bundle()?.mult_group();
    let group_side = ctx.group_frattini()?.order() == m.order();
    Ok(Outcome::from_bool(
        loop_side == group_side,
        json!({ "frattini_L_is_L": loop_side, "frattini_M_is_M": group_side }),
    ))
}

/// `x -> x^p` is onto `S` for every prime `p` dividing the exponent of `S`.
fn subloop_divisible(l: &CayleyLoop, s: &Subloop) -> bool {
    let exponent = s.elements().iter().fold(1u64, |acc, &x| {
        crate::loop_core::lcm(acc, l.element_order(x) as u64)
    });
    prime_divisors(exponent as u128).into_iter().all(|p| {
        let image: HashSet<usize> = s.elements().iter().map(|&x| l.pow(x, p as i64)).collect();
        image.len() == s.len()
    })
}

fn group_elements_in(g: &PermGroup, ctx: &Context) -> Result<Vec<Permutation>> {
    g.enumerate_elements(&ctx.guards)
}

fn theorem1_equivalences(ctx: &Context) -> Result<Outcome> {
    let l = ctx.loop_;
    let m = ctx.bundle()?.mult_group();
    let lp = ctx.associator_subloop()?;
    let cubes = cube_subloop(l)?;
    let s1 = ctx.frattini()?.is_whole();
    let s2 = lp.intersection(&cubes).is_trivial()
        && lp.len() * cubes.len() == l.order()
        && subloop_divisible(l, &cubes);
    let s3 = ctx.group_frattini()?.order() == m.order();
    // The only candidate for the divisible factor is Z(M).
    let derived = m.derived_subgroup()?;
    let zm = m.center_of_group(&ctx.guards)?;
    let zm_elements = group_elements_in(&zm, ctx)?;
    let meets_trivially = zm_elements
        .iter()
        .all(|g| g.is_identity() || !derived.has(g));
    let s4 = meets_trivially
        && derived.order() * zm.order() == m.order()
        && zm.is_divisible_group(&ctx.guards)?;
    let values = [s1, s2, s3, s4];
    Ok(Outcome::from_bool(
        values.iter().all(|&v| v == s1),
        json!({ "statements": values }),
    ))
}

fn prop2_equivalences(ctx: &Context) -> Result<Outcome> {
    let l = ctx.loop_;
    let m = ctx.bundle()?.mult_group();
    let phi_l = ctx.frattini()?.is_whole();
    let phi_m = ctx.group_frattini()?.order() == m.order();
    let s1 = phi_l && (0..l.order()).all(|x| l.pow(x, 3) == 0);
    let s2 = ctx.associator_subloop()?.is_whole();
    let s3 = m.derived_subgroup()?.order() == m.order();
    let s4 = phi_l && center(l).is_trivial();
    let s5 = phi_m && m.center_of_group(&ctx.guards)?.is_trivial();
    let values = [s1, s2, s3, s4, s5];
    Ok(Outcome::from_bool(
        values.iter().all(|&v| v == s1),
        json!({ "statements": values }),
    ))
}

// ---- lemma 7 / prop 1 ----

fn lemma7_four_way(ctx: &Context) -> Result<Outcome> {
    ctx.bundle()?.verify_lemma7(&ctx.guards)
}

fn prop1_center(ctx: &Context) -> Result<Outcome> {
    ctx.bundle()?.verify_prop1(&ctx.guards)
}

// ---- prop 3 ----

fn prop3_containment(ctx: &Context) -> Result<Outcome> {
    let l = ctx.loop_;
    let lattice = ctx.lattice()?;
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (i, h) in lattice.iter().enumerate() {
        for (j, k) in lattice.iter().enumerate() {
            if h.is_subset(k) {
                pairs.push((i, j));
            }
        }
    }
    let mut r = rng(ctx, 31);
    let sample: Vec<(usize, usize)> = pairs
        .choose_multiple(&mut r, PROP3_PAIRS.min(pairs.len()))
        .copied()
        .collect();
    let mut containments = 0usize;
    let mut violations = 0usize;
    let mut first = None;
    for (i, j) in sample.iter().copied() {
        let (h, k) = (&lattice[i], &lattice[j]);
        let n = normalizer(l, k, h)?.result;
        for kp in lattice {
            if h.is_subset(kp) && kp.is_subset(k) && is_normal(l, h, kp)? {
                containments += 1;
                if !kp.is_subset(&n) {
                    violations += 1;
                    first.get_or_insert_with(|| json!({ "H": h, "K": k, "K_prime": kp, "N": n }));
                }
            }
        }
    }
    Ok(Outcome::from_bool(
        violations == 0,
        json!({
            "pairs": sample.len(),
            "containments": containments,
            "violations": violations,
            "first_violation": first,
        }),
    ))
}

fn prop3_oracle_agreement(ctx: &Context) -> Result<Outcome> {
    let l = ctx.loop_;
    let whole = Subloop::whole(l);
    let lattice = ctx.lattice()?;
    let mut by_size: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut first = None;
    for (i, h) in lattice.iter().enumerate() {
        let trace = normalizer(l, &whole, h)?;
        let runs = saturation_runs(l, &whole, h, ctx.seed.wrapping_add(i as u64), ORACLE_RUNS)?;
        let starts_above_h = h.elements().iter().all(|x| {
            trace.p_stages[0].binary_search(x).is_ok() && trace.d_stages[0].binary_search(x).is_ok()
        });
        let post = &trace.postconditions;
        let problems = [
            ("oracle_runs_disagree", runs.iter().any(|r| *r != runs[0])),
            ("fixpoint_differs_from_oracle", trace.result != runs[0]),
            ("not_monotone", !trace.is_monotone()),
            ("H_outside_first_stages", !starts_above_h),
            ("final_P_differs_from_D", !post.stages_agree),
            ("H_not_normal_in_result", !post.h_normal),
            (
                "normal_extension_outside",
                post.normal_extension_outside.is_some(),
            ),
        ];
        let mut bad = false;
        for (name, hit) in problems {
            if hit {
                *counts.entry(name).or_default() += 1;
                bad = true;
            }
        }
        if bad && first.is_none() {
            first = Some(json!({
                "H": h,
                "fixpoint": trace.result,
                "final_P": trace.p_stages.last(),
                "oracle_runs": runs,
                "normal_extension_outside": post.normal_extension_outside,
            }));
        }
        *by_size
            .entry(h.len())
            .or_default()
            .entry(trace.result.len())
            .or_default() += 1;
    }
    Ok(Outcome::from_bool(
        counts.is_empty(),
        json!({
            "subloops": lattice.len(),
            "oracle_runs": ORACLE_RUNS,
            "problems": counts,
            "first_problem": first,
            "normalizer_sizes_by_H_size": by_size,
        }),
    ))
}

// ---- prop 4 ----

fn prop4_loop_chains(ctx: &Context) -> Result<Outcome> {
    let l = ctx.loop_;
    let class = ctx.class()?;
    let mut longest = 0;
    for h in ctx.lattice()? {
        let steps = match normalizer_chain(l, h, &ctx.guards) {
            Ok(chain) => chain.len() - 1,
            Err(Error::ChainStalled { step, size }) => {
                return Ok(Outcome::fail(
                    json!({ "H": h, "stalled_at": step, "size": size }),
                ))
            }
            Err(e) => return Err(e),
        };
        if steps > class {
            return Ok(Outcome::fail(
                json!({ "H": h, "steps": steps, "class": class }),
            ));
        }
        longest = longest.max(steps);
    }
    Ok(Outcome::pass(
        json!({ "class": class, "longest_chain": longest }),
    ))
}

fn prop4_group_chains(ctx: &Context) -> Result<Outcome> {
    let m = ctx.bundle()?.mult_group();
    let bound = (2 * ctx.class()?).saturating_sub(1);
    let elements = m.enumerate_elements(&ctx.guards)?;
    // Distinct cyclic subgroups, keyed by their sorted element lists.
    let mut seen = HashSet::new();
    let mut cyclic = Vec::new();
    for g in &elements {
        let mut members: Vec<Permutation> = (0..g.order()).map(|k| g.pow(k as i64)).collect();
        members.sort();
        if seen.insert(members) {
            cyclic.push(g.clone());
        }
    }
    let mut r = rng(ctx, 41);
    let sample: Vec<Permutation> = cyclic
        .choose_multiple(&mut r, CYCLIC_SUBGROUPS.min(cyclic.len()))
        .cloned()
        .collect();
    let mut longest = 0;
    for g in &sample {
        let mut current = m.subgroup(std::slice::from_ref(g))?;
        let mut steps = 0;
        while current.order() != m.order() {
            let next = m.normalizer_of_subgroup(&current, &ctx.guards)?;
            steps += 1;
            if next.order() == current.order() || steps > bound {
                return Ok(Outcome::fail(json!({
                    "generator": g,
                    "steps": steps,
                    "bound": bound,
                    "stalled": next.order() == current.order(),
                })));
            }
            current = next;
        }
        longest = longest.max(steps);
    }
    Ok(Outcome::pass(json!({
        "cyclic_subgroups": cyclic.len(),
        "sampled": sample.len(),
        "bound": bound,
        "longest_chain": longest,
    })))
}

// ---- theorem 2 ----

fn theorem2_condition(ctx: &Context) -> Result<Outcome> {
    let nc = ctx.normalizer_condition()?;
    let witness = json!({
        "proper_subloops": nc.sizes.len(),
        "sizes": nc.sizes,
        "self_normalizing": nc.witness,
    });
    Ok(Outcome::from_bool(nc.holds, witness))
}

/// `(Z_1, Z_2)`, with `Z_2 = Z_1` when the series stops at the first term.
fn first_centers(ctx: &Context) -> Result<(usize, usize)> {
    let terms = &ctx.central_series()?.terms;
    let z1 = terms.get(1).map_or(1, Subloop::len);
    let z2 = terms.get(2).map_or(z1, Subloop::len);
    Ok((z1, z2))
}

fn theorem2_lemma3(ctx: &Context) -> Result<Outcome> {
    let (z1, z2) = first_centers(ctx)?;
    let lp = ctx.associator_subloop()?;
    let ok = z1 == z2 || !lp.is_whole();
    Ok(Outcome::from_bool(
        ok,
        json!({ "Z1": z1, "Z2": z2, "associator_subloop": lp.len() }),
    ))
}

fn theorem2_corollary1(ctx: &Context) -> Result<Outcome> {
    let (z1, z2) = first_centers(ctx)?;
    if z1 == z2 {
        return Ok(Outcome::pass(
            json!({ "Z1": z1, "Z2": z2, "premise": false }),
        ));
    }
    let holds = ctx.normalizer_condition()?.holds;
    Ok(Outcome::from_bool(
        holds,
        json!({ "Z1": z1, "Z2": z2, "premise": true, "normalizer_condition": holds }),
    ))
}

// ---- frattini ----

fn frattini_maximal(ctx: &Context) -> Result<Outcome> {
    let l = ctx.loop_;
    if l.order() == 1 {
        return Ok(Outcome::pass(
            json!({ "maximal_subloops": 0, "trivial_loop": true }),
        ));
    }
    let by_quotient = maximal_subloops(l)?;
    let by_lattice = maximal_elements(ctx.lattice()?);
    Ok(Outcome::from_bool(
        by_quotient == by_lattice,
        json!({ "by_quotient": by_quotient.len(), "by_lattice": by_lattice.len() }),
    ))
}

fn frattini_intersection(ctx: &Context) -> Result<Outcome> {
    let l = ctx.loop_;
    if l.order() == 1 {
        return Ok(Outcome::pass(
            json!({ "frattini": "0", "trivial_loop": true }),
        ));
    }
    let phi = ctx.frattini()?;
    let direct = intersect_all(l, &maximal_elements(ctx.lattice()?));
    Ok(Outcome::from_bool(
        *phi == direct && !phi.is_whole(),
        json!({ "by_quotient": phi, "by_lattice": direct }),
    ))
}

fn frattini_lemma5(ctx: &Context) -> Result<Outcome> {
    let l = ctx.loop_;
    let phi = ctx.frattini()?;
    let mut images = Vec::new();
    let mut kernels = standard_normal_subloops(ctx)?;
    kernels.push(cube_subloop(l)?);
    kernels.sort();
    kernels.dedup();
    for h in kernels {
        let q = quotient(l, &h)?;
        let target = if q.loop_.order() == 1 {
            Subloop::whole(&q.loop_)
        } else {
            frattini_subloop(&q.loop_)?
        };
        if let Some(&x) = phi
            .elements()
            .iter()
            .find(|&&x| !target.contains(q.projection[x]))
        {
            return Ok(Outcome::fail(json!({ "kernel": h, "element": x })));
        }
        images.push(json!({ "kernel": h.len(), "frattini_of_image": target.len() }));
    }
    Ok(Outcome::pass(json!({ "quotients": images })))
}

fn frattini_non_generators(ctx: &Context) -> Result<Outcome> {
    let l = ctx.loop_;
    if l.order() == 1 {
        return Ok(Outcome::pass(json!({ "trivial_loop": true })));
    }
    let phi = ctx.frattini()?;
    let mut r = rng(ctx, 53);
    let mut refuted_outside = 0;
    for x in 0..l.order() {
        let refutation = non_generator_refutation(l, x, NON_GENERATOR_TRIALS, &mut r);
        match (phi.contains(x), refutation) {
            (true, Some(s)) => {
                return Ok(Outcome::fail(json!({ "element": x, "generating_with": s })))
            }
            (false, Some(_)) => refuted_outside += 1,
            _ => {}
        }
    }
    Ok(Outcome::pass(json!({
        "trials_per_element": NON_GENERATOR_TRIALS,
        "frattini": phi.len(),
        "outside_refuted": refuted_outside,
        "outside": l.order() - phi.len(),
    })))
}

fn frattini_group_oracle(ctx: &Context) -> Result<Outcome> {
    let m = ctx.bundle()?.mult_group();
    if m.order() > ctx.guards.frattini_oracle {
        return Ok(Outcome::skipped(format!(
            "|M| = {} exceeds the Frattini oracle guard {}",
            m.order(),
            ctx.guards.frattini_oracle
        )));
    }
    let formula = ctx.group_frattini()?;
    let search = m.frattini_subgroup_by_search(&ctx.guards)?;
    Ok(Outcome::from_bool(
        formula.same_group(&search),
        json!({ "formula": formula.order().to_string(), "search": search.order().to_string() }),
    ))
}

// ---- divisibility ----

fn divisible_loop(ctx: &Context) -> Result<Outcome> {
    let d = is_divisible(ctx.loop_);
    let trivial = ctx.loop_.order() == 1;
    Ok(Outcome::from_bool(
        d == trivial,
        json!({ "divisible": d, "trivial": trivial }),
    ))
}

fn divisible_group(ctx: &Context) -> Result<Outcome> {
    let m = ctx.bundle()?.mult_group();
    let d = m.is_divisible_group(&ctx.guards)?;
    let trivial = m.order() == 1;
    Ok(Outcome::from_bool(
        d == trivial,
        json!({ "divisible": d, "trivial": trivial }),
    ))
}

/// For finite `M` the divisible part is `{e}` and the complement is `M`.
/// Every nontrivial cyclic subgroup must fail to be divisible.
fn divisible_decomposition(ctx: &Context) -> Result<Outcome> {
    let m = ctx.bundle()?.mult_group();
    let degree = m.degree();
    let divisible_part = PermGroup::trivial(degree);
    if !divisible_part.is_divisible_group(&ctx.guards)? {
        return Ok(Outcome::fail(
            json!({ "reason": "trivial group reported non-divisible" }),
        ));
    }
    for g in group_elements_in(m, ctx)?
        .iter()
        .filter(|g| !g.is_identity())
    {
        let cyclic = PermGroup::from_generators(degree, std::slice::from_ref(g))?;
        if cyclic.is_divisible_group(&ctx.guards)? {
            return Ok(Outcome::fail(json!({ "divisible_cyclic_subgroup": g })));
        }
    }
    Ok(Outcome::pass(json!({
        "divisible_part": divisible_part.order().to_string(),
        "complement": m.order().to_string(),
    })))
}
