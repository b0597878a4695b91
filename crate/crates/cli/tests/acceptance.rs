//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use mloop_core::loop_core::{direct_product, gen_abelian, gen_zassenhaus81, trivial_loop};
use mloop_core::normalizer::{normalizer, normalizer_chain, normalizer_condition, saturation_runs};
use mloop_core::structure::{
    all_subloops, associator_subloop, center, cube_subloop, extend_subloop, frattini_subloop,
    intersect_all, is_divisible, is_normal, maximal_elements, maximal_subloops,
    upper_central_series, Subloop,
};
use mloop_core::verify::{run_suite, Status};
use mloop_core::{CayleyLoop, Guards, MultGroupBundle};
use serde_json::Value;

type Verdict = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn z3() -> CayleyLoop {
    gen_abelian(&[3], 8).unwrap()
}

fn product() -> CayleyLoop {
    direct_product(&gen_zassenhaus81(), &z3(), 1024).unwrap()
}

/// Every loop the criteria quantify over.
fn test_loops() -> Vec<CayleyLoop> {
    vec![
        trivial_loop(),
        gen_abelian(&[2], 8).unwrap(),
        z3(),
        gen_abelian(&[9], 16).unwrap(),
        gen_abelian(&[2, 4], 16).unwrap(),
        gen_abelian(&[3, 3], 16).unwrap(),
        gen_abelian(&[3, 3, 3], 64).unwrap(),
        gen_zassenhaus81(),
        product(),
    ]
}

fn naive_closure(l: &CayleyLoop, gens: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
    let mut set: BTreeSet<usize> = gens.into_iter().collect();
    set.insert(0);
    loop {
        let items: Vec<usize> = set.iter().copied().collect();
        let before = set.len();
        for &a in &items {
            for &b in &items {
                set.insert(l.mul(a, b));
            }
        }
        if set.len() == before {
            return set;
        }
    }
}

fn check_passed(report: &mloop_core::verify::VerdictReport, name: &str) -> Result<Value, String> {
    let c = report
        .checks
        .iter()
        .find(|c| c.name == name)
        .ok_or_else(|| format!("missing check {name}"))?;
    ensure(
        c.status == Status::Pass,
        format!("{name}: {:?} {}", c.status, c.witness),
    )?;
    Ok(c.witness.clone())
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let l = gen_zassenhaus81();
    let d = l.diagnose();
    let elapsed = start.elapsed();
    ensure(d.is_cml, "is_cml is false")?;
    ensure(!d.is_associative, "is_associative is true")?;
    ensure(
        elapsed < Duration::from_secs(5),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!(
        "is_cml, not associative, {} ms",
        elapsed.as_millis()
    ))
}

fn criterion_2() -> Verdict {
    for l in [gen_zassenhaus81(), gen_abelian(&[3, 3, 3], 64).unwrap()] {
        let report = e(run_suite(&l, "identities", 0, Guards::DEFAULT))?;
        for name in ["identities.associator_symmetries", "identities.associator_expansion"] {
            let w = check_passed(&report, name)?;
            ensure(
                w["exhaustive"] == true,
                format!("{name} was sampled on {}", l.label()),
            )?;
        }
    }
    Ok("exhaustive, zero violations on both loops".into())
}

fn criterion_3() -> Verdict {
    let loops = test_loops();
    for l in &loops {
        let z = center(l);
        if let Some(x) = (0..l.order()).find(|&x| !z.contains(l.pow(x, 3))) {
            return Err(format!("{}: cube of {x} is not central", l.label()));
        }
    }
    Ok(format!("{} loops, zero violations", loops.len()))
}

fn criterion_4() -> Verdict {
    let l = gen_zassenhaus81();
    let n = l.order();
    // Brute-force oracles first.
    let naive_center: Vec<usize> = (0..n)
        .filter(|&x| (0..n).all(|a| (0..n).all(|b| l.associator(x, a, b) == 0)))
        .collect();
    let naive_derived = naive_closure(
        &l,
        (0..n)
            .flat_map(|a| (0..n).flat_map(move |b| (0..n).map(move |c| (a, b, c))))
            .map(|(a, b, c)| l.associator(a, b, c)),
    );
    let naive_cubes = naive_closure(&l, (0..n).map(|x| l.pow(x, 3)));
    let lattice = e(all_subloops(&l, &Guards::DEFAULT))?;
    let proper: Vec<Subloop> = lattice.into_iter().filter(|s| !s.is_whole()).collect();
    let naive_maximal = maximal_elements(&proper);
    let naive_frattini = intersect_all(&l, &naive_maximal);

    let z = center(&l);
    let lp = e(associator_subloop(&l))?;
    let cubes = e(cube_subloop(&l))?;
    let class = e(upper_central_series(&l))?.class;
    let maximal = e(maximal_subloops(&l))?;
    let phi = e(frattini_subloop(&l))?;

    ensure(
        z.elements() == naive_center.as_slice(),
        "center differs from oracle",
    )?;
    ensure(
        lp.elements()
            .iter()
            .copied()
            .eq(naive_derived.iter().copied()),
        "L' differs from oracle",
    )?;
    ensure(
        cubes
            .elements()
            .iter()
            .copied()
            .eq(naive_cubes.iter().copied()),
        "L^3 differs from oracle",
    )?;
    ensure(
        maximal == naive_maximal,
        "maximal subloops differ from lattice search",
    )?;
    ensure(
        phi == naive_frattini,
        "quotient Frattini differs from intersection",
    )?;

    let got = (
        z.len(),
        lp.len(),
        cubes.len(),
        class,
        phi.len(),
        maximal.len(),
    );
    ensure(
        got == (3, 3, 1, Some(2), 3, 13),
        format!("(|Z|, |L'|, |L^3|, class, |F|, #max) = {got:?}"),
    )?;
    Ok("|Z|=3 |L'|=3 |L^3|=1 class=2 |F|=3 maximal=13".into())
}

fn criterion_5() -> Verdict {
    let start = Instant::now();
    let l = gen_zassenhaus81();
    let guards = Guards::DEFAULT;
    let bundle = e(MultGroupBundle::new(&l))?;
    let (m, i) = (bundle.mult_group().order(), bundle.inner_group().order());
    ensure(m == 81 * i, format!("|M| = {m}, |I| = {i}"))?;
    let p1 = e(bundle.verify_prop1(&guards))?;
    ensure(p1.passed(), format!("prop 1: {}", p1.witness))?;
    let l7 = e(bundle.verify_lemma7(&guards))?;
    ensure(l7.passed(), format!("lemma 7: {}", l7.witness))?;
    let lp = e(associator_subloop(&l))?;
    let l1 = e(bundle.verify_lemma1(&lp, &guards))?;
    ensure(l1.passed(), format!("lemma 1: {}", l1.witness))?;
    let elapsed = start.elapsed();
    ensure(
        elapsed < Duration::from_secs(60),
        format!("took {elapsed:?}"),
    )?;
    Ok(format!("|M|={m} |I|={i}, {} ms", elapsed.as_millis()))
}

/// Faithful to the criterion as stated: fixpoint = every one of five seeded
/// saturation orders, monotone stages, and no excluded `x` with `H` normal
/// in `<N, x>`.
fn criterion_6() -> Verdict {
    let mut problems = Vec::new();
    let mut total = 0;
    for l in [gen_zassenhaus81(), gen_abelian(&[3, 3, 3], 64).unwrap()] {
        let whole = Subloop::whole(&l);
        let lattice = e(all_subloops(&l, &Guards::DEFAULT))?;
        let (mut disagree, mut nonmonotone, mut not_maximal) = (0, 0, 0);
        for (idx, h) in lattice.iter().enumerate() {
            let trace = e(normalizer(&l, &whole, h))?;
            // Run 0 scans in index order; the next five are shuffled.
            let runs = e(saturation_runs(&l, &whole, h, idx as u64, 6))?;
            if runs.iter().any(|r| *r != trace.result) {
                disagree += 1;
            }
            if !trace.is_monotone() {
                nonmonotone += 1;
            }
            let n = &trace.result;
            let escapes = whole
                .elements()
                .iter()
                .filter(|&&x| !n.contains(x))
                .any(|&x| is_normal(&l, h, &extend_subloop(&l, n, x)).unwrap_or(false));
            if escapes {
                not_maximal += 1;
            }
        }
        total += lattice.len();
        if disagree + nonmonotone + not_maximal > 0 {
            problems.push(format!(
                "{}: {} subloops, oracle disagrees on {disagree}, non-monotone {nonmonotone}, \
                 maximality fails on {not_maximal}",
                l.label(),
                lattice.len()
            ));
        }
    }
    if problems.is_empty() {
        Ok(format!("{total} subloops agree"))
    } else {
        Err(problems.join("; "))
    }
}

fn criterion_7() -> Verdict {
    let mut sizes = Vec::new();
    for (l, lattice_guard) in [
        (gen_zassenhaus81(), Guards::DEFAULT.lattice),
        (
            gen_abelian(&[3, 3, 3], 64).unwrap(),
            Guards::DEFAULT.lattice,
        ),
        (product(), 256),
    ] {
        let guards = Guards {
            lattice: lattice_guard,
            ..Guards::DEFAULT
        };
        let nc = e(normalizer_condition(&l, &guards))?;
        ensure(
            nc.holds,
            format!("{}: self-normalizing {:?}", l.label(), nc.witness),
        )?;
        sizes.push(format!("{}:{}", l.label(), nc.sizes.len() + 1));
    }
    Ok(format!(
        "no self-normalizing proper subloop ({})",
        sizes.join(", ")
    ))
}

fn criterion_8() -> Verdict {
    let l = gen_zassenhaus81();
    let guards = Guards::DEFAULT;
    let mut longest = 0;
    for h in e(all_subloops(&l, &guards))? {
        let chain = e(normalizer_chain(&l, &h, &guards))?;
        longest = longest.max(chain.len() - 1);
    }
    ensure(longest <= 2, format!("loop chain of {longest} steps"))?;
    let report = e(run_suite(&l, "prop4", 0, guards))?;
    let w = check_passed(&report, "prop4.group_normalizer_chains")?;
    ensure(
        w["sampled"].as_u64().unwrap_or(0) >= 20,
        format!("sampled {}", w["sampled"]),
    )?;
    ensure(w["bound"] == 3, format!("bound {}", w["bound"]))?;
    Ok(format!(
        "loop chains <= {longest}, {} cyclic subgroups with chains <= {}",
        w["sampled"], w["longest_chain"]
    ))
}

fn criterion_9() -> Verdict {
    let guards = Guards::DEFAULT;
    let loops = test_loops();
    for l in &loops {
        let phi = if l.order() == 1 {
            Subloop::whole(l)
        } else {
            e(frattini_subloop(l))?
        };
        ensure(
            e(associator_subloop(l))?.is_subset(&phi),
            format!("{}: L' not in F(L)", l.label()),
        )?;
        let bundle = e(MultGroupBundle::new(l))?;
        let m = bundle.mult_group();
        let phi_m = e(m.frattini_subgroup(&guards))?;
        ensure(
            e(m.derived_subgroup())?.is_subgroup_of(&phi_m),
            format!("{}: M' not in F(M)", l.label()),
        )?;
        if l.order() > 1 {
            let (loop_side, group_side) = (phi.is_whole(), phi_m.order() == m.order());
            ensure(
                !loop_side && !group_side,
                format!(
                    "{}: F(L)=L is {loop_side}, F(M)=M is {group_side}",
                    l.label()
                ),
            )?;
        }
    }
    Ok(format!("{} loops", loops.len()))
}

fn criterion_10() -> Verdict {
    let guards = Guards::DEFAULT;
    let loops = test_loops();
    for l in &loops {
        let trivial = l.order() == 1;
        let group = e(MultGroupBundle::new(l))?;
        let group_divisible = e(group.mult_group().is_divisible_group(&guards))?;
        ensure(
            is_divisible(l) == trivial && group_divisible == trivial,
            format!(
                "{}: loop {}, group {group_divisible}",
                l.label(),
                is_divisible(l)
            ),
        )?;
    }
    Ok(format!(
        "divisible only for the trivial subject among {}",
        loops.len()
    ))
}

fn strip_millis(v: &mut Value) {
    if let Some(checks) = v["checks"].as_array_mut() {
        for c in checks {
            c.as_object_mut().map(|o| o.remove("millis"));
        }
    }
}

fn criterion_11() -> Verdict {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let mut reports = Vec::new();
    for run in 0..2 {
        let out = dir.join(format!("determinism-{run}.json"));
        let status = e(Command::new(env!("CARGO_BIN_EXE_mloop"))
            .args([
                "verify",
                "--gen",
                "zassenhaus81",
                "--suite",
                "all",
                "--seed",
                "0",
                "--json",
            ])
            .arg(&out)
            .env_remove("MLOOP_MAX_ORDER")
            .env_remove("MLOOP_MAX_LATTICE")
            .output())?
        .status;
        ensure(
            matches!(status.code(), Some(0 | 1)),
            format!("exit status {status}"),
        )?;
        let text = e(std::fs::read_to_string(&out))?;
        let mut v: Value = e(serde_json::from_str(&text))?;
        strip_millis(&mut v);
        reports.push(e(serde_json::to_string_pretty(&v))?);
    }
    ensure(reports[0] == reports[1], "reports differ beyond millis")?;
    Ok(format!(
        "{} bytes identical after stripping millis",
        reports[0].len()
    ))
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Verdict); 11] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
    ];
    let mut failed = 0;
    for (n, f) in criteria {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(msg) => println!("criterion {n}: PASS ({msg}) [{secs:.1}s]"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n}: FAIL ({msg}) [{secs:.1}s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
