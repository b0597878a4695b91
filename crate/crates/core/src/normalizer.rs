//! The normalizer `N_K(H)` of a subloop, built from the series
//! `P_1 ⊇ P_2 ⊇ ...` and `D_1 ⊆ D_2 ⊆ ...`, plus the derived notions: the
//! normalizer condition, normalizer chains and ascending subnormal systems.
//!
//! In a nonassociative CML the subloops in which `H` is normal need not have
//! a largest element. For `H = <e1>` in the order-81 loop, `H` is normal in
//! both `<e1, e2>` and `<e1, e3>`, which together generate the whole loop. There
//! the series stop with `P != D`; the final `D` stage is still reported as
//! the normalizer and [`Postconditions`] records what failed.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::loop_core::CayleyLoop;
use crate::structure::{all_subloops, extend_subloop, is_normal, Subloop};
use crate::Guards;

/// Every stage of the fixpoint, as sorted element lists, with the
/// postconditions evaluated on the result.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NormalizerTrace {
    pub p_stages: Vec<Vec<usize>>,
    pub d_stages: Vec<Vec<usize>>,
    /// The final `D` stage.
    pub result: Subloop,
    pub iterations: usize,
    pub postconditions: Postconditions,
}

/// What held once the stages stopped changing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Postconditions {
    /// The final `P` and `D` stages coincide.
    pub stages_agree: bool,
    /// `H` is normal in the result.
    pub h_normal: bool,
    /// Least `x ∈ K` outside the result with `H` normal in `<H, x>`.
    pub normal_extension_outside: Option<usize>,
}

impl Postconditions {
    pub fn hold(&self) -> bool {
        self.stages_agree && self.h_normal && self.normal_extension_outside.is_none()
    }
}

impl NormalizerTrace {
    /// `P_{i+1} ⊆ P_i` and `D_i ⊆ D_{i+1}` for every recorded stage.
    pub fn is_monotone(&self) -> bool {
        let subset = |a: &Vec<usize>, b: &Vec<usize>| a.iter().all(|x| b.binary_search(x).is_ok());
        self.p_stages.windows(2).all(|w| subset(&w[1], &w[0]))
            && self.d_stages.windows(2).all(|w| subset(&w[0], &w[1]))
    }
}

/// `1 = H_0 ⊆ H_1 ⊆ ... ⊆ L`, each term normal in the next.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubnormalSystem {
    pub terms: Vec<Subloop>,
}

/// Memo for `R(a, b) := (h, a, b) ∈ H for every h ∈ H`, over `K × K`.
///
/// Both defining conditions are instances of it: `(H, d, x) ⊆ H` is
/// `R(d, x)` and `(H, x, p) ⊆ H` is `R(x, p)`.
struct Relation<'a> {
    l: &'a CayleyLoop,
    h: &'a Subloop,
    position: Vec<usize>,
    k: usize,
    memo: Vec<u8>,
}

impl<'a> Relation<'a> {
    fn new(l: &'a CayleyLoop, k: &Subloop, h: &'a Subloop) -> Self {
        let mut position = vec![usize::MAX; l.order()];
        for (i, &x) in k.elements().iter().enumerate() {
            position[x] = i;
        }
        Relation {
            l,
            h,
            position,
            k: k.len(),
            memo: vec![0; k.len() * k.len()],
        }
    }

    fn holds(&mut self, a: usize, b: usize) -> bool {
        let slot = self.position[a] * self.k + self.position[b];
        if self.memo[slot] == 0 {
            let ok = self
                .h
                .elements()
                .iter()
                .all(|&e| self.h.contains(self.l.associator(e, a, b)));
            self.memo[slot] = if ok { 1 } else { 2 };
        }
        self.memo[slot] == 1
    }
}

/// `N_K(H)` by the P/D fixpoint: the final `D` stage, with the
/// postconditions (`P = D`, `H` normal in the result, no `x` outside it with
/// `H` normal in `<H, x>`) evaluated and recorded on the trace.
pub fn normalizer(l: &CayleyLoop, k: &Subloop, h: &Subloop) -> Result<NormalizerTrace> {
    l.require_cml()?;
    h.require_within(k)?;
    let mut rel = Relation::new(l, k, h);
    let ks = k.elements();
    let p_from = |rel: &mut Relation, ds: &[usize]| -> Vec<usize> {
        ks.iter()
            .copied()
            .filter(|&x| ds.iter().all(|&d| rel.holds(d, x)))
            .collect()
    };
    let d_from = |rel: &mut Relation, ps: &[usize]| -> Vec<usize> {
        ks.iter()
            .copied()
            .filter(|&x| ps.iter().all(|&p| rel.holds(x, p)))
            .collect()
    };

    // P_1 = {x : (H, H, x) ⊆ H}.
    let mut p = p_from(&mut rel, h.elements());
    let mut d = d_from(&mut rel, &p);
    let mut p_stages = vec![p.clone()];
    let mut d_stages = vec![d.clone()];
    let mut iterations = 1;
    let cap = k.len() + 2;
    loop {
        let p_next = p_from(&mut rel, &d);
        let d_next = d_from(&mut rel, &p_next);
        iterations += 1;
        p_stages.push(p_next.clone());
        d_stages.push(d_next.clone());
        if p_next == p && d_next == d {
            break;
        }
        if iterations > cap {
            return Err(Error::ChainStalled {
                step: iterations,
                size: d_next.len(),
            });
        }
        p = p_next;
        d = d_next;
    }
    let result = Subloop::from_elements(l, d.clone())
        .map_err(|e| Error::Postcondition(format!("final D stage is not a subloop: {e}")))?;
    if !h.is_subset(&result) {
        return Err(Error::Postcondition(
            "final D stage does not contain H".into(),
        ));
    }
    let postconditions = Postconditions {
        stages_agree: p == d,
        h_normal: is_normal(l, h, &result)?,
        normal_extension_outside: normal_extension_outside(l, k, h, &result)?,
    };
    Ok(NormalizerTrace {
        p_stages,
        d_stages,
        result,
        iterations,
        postconditions,
    })
}

fn normal_extension_outside(
    l: &CayleyLoop,
    k: &Subloop,
    h: &Subloop,
    n: &Subloop,
) -> Result<Option<usize>> {
    let mut tried: HashMap<Subloop, bool> = HashMap::new();
    for &x in k.elements() {
        if n.contains(x) {
            continue;
        }
        let hx = extend_subloop(l, h, x);
        let normal = match tried.get(&hx) {
            Some(&v) => v,
            None => {
                let v = is_normal(l, h, &hx)?;
                tried.insert(hx, v);
                v
            }
        };
        if normal {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// Greedy saturation: starting from `H`, keep adjoining any `x ∈ K` that
/// keeps `H` normal. The first run scans in index order; every further run
/// uses a seeded shuffle. Returns the end point of every run.
pub fn saturation_runs(
    l: &CayleyLoop,
    k: &Subloop,
    h: &Subloop,
    seed: u64,
    runs: usize,
) -> Result<Vec<Subloop>> {
    h.require_within(k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(runs.max(1));
    for run in 0..runs.max(1) {
        let mut order: Vec<usize> = k.elements().to_vec();
        if run > 0 {
            order.shuffle(&mut rng);
        }
        let mut s = h.clone();
        'grow: loop {
            for &x in &order {
                if s.contains(x) {
                    continue;
                }
                let t = extend_subloop(l, &s, x);
                if is_normal(l, h, &t)? {
                    s = t;
                    continue 'grow;
                }
            }
            break;
        }
        out.push(s);
    }
    Ok(out)
}

/// The largest subloop of `K` in which `H` is normal, by greedy saturation.
/// Fails when differently ordered runs end at different subloops, in which
/// case no such largest subloop exists.
pub fn normalizer_oracle(
    l: &CayleyLoop,
    k: &Subloop,
    h: &Subloop,
    seed: u64,
    runs: usize,
) -> Result<Subloop> {
    let ends = saturation_runs(l, k, h, seed, runs)?;
    let first = ends[0].clone();
    if let Some((run, other)) = ends.iter().enumerate().find(|(_, s)| **s != first) {
        return Err(Error::Postcondition(format!(
            "saturation run {run} ended at {other}, run 0 at {first}"
        )));
    }
    Ok(first)
}

/// Outcome of the exhaustive normalizer-condition scan.
#[derive(Debug, Clone, Serialize)]
pub struct NormalizerCondition {
    pub holds: bool,
    /// Least proper subloop equal to its own normalizer.
    pub witness: Option<Subloop>,
    /// `(|H|, |N_L(H)|)` for every proper subloop, in lattice order.
    pub sizes: Vec<(usize, usize)>,
}

/// Every proper subloop is strictly smaller than its normalizer.
pub fn normalizer_condition(l: &CayleyLoop, guards: &Guards) -> Result<NormalizerCondition> {
    l.require_cml()?;
    let lattice = all_subloops(l, guards)?;
    normalizer_condition_on(l, &lattice)
}

/// As [`normalizer_condition`], over an already computed lattice.
pub fn normalizer_condition_on(l: &CayleyLoop, lattice: &[Subloop]) -> Result<NormalizerCondition> {
    let whole = Subloop::whole(l);
    let mut sizes = Vec::new();
    let mut witness = None;
    for h in lattice.iter().filter(|h| !h.is_whole()) {
        let n = normalizer(l, &whole, h)?.result;
        sizes.push((h.len(), n.len()));
        if n == *h && witness.is_none() {
            witness = Some(h.clone());
        }
    }
    Ok(NormalizerCondition {
        holds: witness.is_none(),
        witness,
        sizes,
    })
}

/// `H_0 = H`, `H_{i+1} = N_L(H_i)`, until `L` is reached.
pub fn normalizer_chain(l: &CayleyLoop, h: &Subloop, guards: &Guards) -> Result<Vec<Subloop>> {
    guards.check_lattice(l.order())?;
    let whole = Subloop::whole(l);
    let mut chain = vec![h.clone()];
    loop {
        let current = chain.last().expect("chain starts at H");
        if current.is_whole() {
            return Ok(chain);
        }
        let next = normalizer(l, &whole, current)?.result;
        if next == *current {
            return Err(Error::ChainStalled {
                step: chain.len() - 1,
                size: next.len(),
            });
        }
        chain.push(next);
    }
}

/// `1 ⊆ H ⊆ N(H) ⊆ N(N(H)) ⊆ ... ⊆ L`, each step checked normal.
pub fn ascending_subnormal_system(
    l: &CayleyLoop,
    h: &Subloop,
    guards: &Guards,
) -> Result<SubnormalSystem> {
    let mut terms = vec![Subloop::trivial(l)];
    for s in normalizer_chain(l, h, guards)? {
        if terms.last() != Some(&s) {
            terms.push(s);
        }
    }
    for w in terms.windows(2) {
        if !is_normal(l, &w[0], &w[1])? {
            return Err(Error::Postcondition(format!(
                "{} is not normal in {}",
                w[0], w[1]
            )));
        }
    }
    Ok(SubnormalSystem { terms })
}
