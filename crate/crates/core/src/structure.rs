//! Subloops and the invariants built from them.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::hash::{Hash, Hasher};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::loop_core::{prime_divisors, quotient, CayleyLoop};
use crate::Guards;

/// A subloop of some parent loop, stored as its sorted element indices.
#[derive(Clone)]
pub struct Subloop {
    elements: Vec<usize>,
    mask: Vec<bool>,
}

impl Subloop {
    pub(crate) fn from_sorted_unchecked(parent_order: usize, elements: Vec<usize>) -> Self {
        debug_assert!(elements.windows(2).all(|w| w[0] < w[1]));
        let mut mask = vec![false; parent_order];
        for &e in &elements {
            mask[e] = true;
        }
        Subloop { elements, mask }
    }

    fn from_mask(mask: Vec<bool>) -> Self {
        let elements = (0..mask.len()).filter(|&i| mask[i]).collect();
        Subloop { elements, mask }
    }

    /// Validates that `elements` is closed under product and inverse.
    pub fn from_elements(l: &CayleyLoop, mut elements: Vec<usize>) -> Result<Self> {
        elements.sort_unstable();
        elements.dedup();
        if let Some(&bad) = elements.iter().find(|&&e| e >= l.order()) {
            return Err(Error::InvalidElement {
                index: bad,
                order: l.order(),
            });
        }
        let s = Self::from_sorted_unchecked(l.order(), elements);
        if !s.contains(0) {
            return Err(Error::NotASubloop("identity missing".into()));
        }
        for &a in &s.elements {
            if !s.contains(l.inv(a)) {
                return Err(Error::NotASubloop(format!("inverse of {a} missing")));
            }
            for &b in &s.elements {
                let p = l.mul(a, b);
                if !s.contains(p) {
                    return Err(Error::NotASubloop(format!("{a}*{b} = {p} missing")));
                }
            }
        }
        Ok(s)
    }

    pub fn whole(l: &CayleyLoop) -> Self {
        Self::from_sorted_unchecked(l.order(), (0..l.order()).collect())
    }

    pub fn trivial(l: &CayleyLoop) -> Self {
        Self::from_sorted_unchecked(l.order(), vec![0])
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn parent_order(&self) -> usize {
        self.mask.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.elements.len() == 1
    }

    pub fn is_whole(&self) -> bool {
        self.elements.len() == self.mask.len()
    }

    #[inline]
    pub fn contains(&self, x: usize) -> bool {
        self.mask.get(x).copied().unwrap_or(false)
    }

    pub fn is_subset(&self, other: &Subloop) -> bool {
        self.elements.iter().all(|&e| other.contains(e))
    }

    pub fn intersection(&self, other: &Subloop) -> Subloop {
        let elements = self
            .elements
            .iter()
            .copied()
            .filter(|&e| other.contains(e))
            .collect();
        Subloop::from_sorted_unchecked(self.mask.len(), elements)
    }

    pub(crate) fn first_outside(&self, outer: &Subloop) -> Option<usize> {
        self.elements.iter().copied().find(|&e| !outer.contains(e))
    }

    pub(crate) fn require_within(&self, outer: &Subloop) -> Result<()> {
        match self.first_outside(outer) {
            Some(element) => Err(Error::NotNested { element }),
            None => Ok(()),
        }
    }
}

impl PartialEq for Subloop {
    fn eq(&self, other: &Self) -> bool {
        self.elements == other.elements
    }
}

impl Eq for Subloop {}

impl Hash for Subloop {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.elements.hash(state);
    }
}

impl Ord for Subloop {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.elements.cmp(&other.elements))
    }
}

impl PartialOrd for Subloop {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Subloop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.elements.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Subloop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subloop[{}]{{{self}}}", self.len())
    }
}

impl Serialize for Subloop {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Smallest subloop containing `base` (already a subloop) and `extra`.
fn close(l: &CayleyLoop, base: &Subloop, extra: &[usize]) -> Subloop {
    let mut mask = base.mask.clone();
    let mut elements = base.elements.clone();
    let mut queue = Vec::new();
    let add =
        |x: usize, mask: &mut Vec<bool>, elements: &mut Vec<usize>, queue: &mut Vec<usize>| {
            if !mask[x] {
                mask[x] = true;
                elements.push(x);
                queue.push(x);
            }
        };
    for &x in extra {
        add(x, &mut mask, &mut elements, &mut queue);
    }
    while let Some(e) = queue.pop() {
        add(l.inv(e), &mut mask, &mut elements, &mut queue);
        let mut i = 0;
        while i < elements.len() {
            let f = elements[i];
            add(l.mul(e, f), &mut mask, &mut elements, &mut queue);
            add(l.mul(f, e), &mut mask, &mut elements, &mut queue);
            i += 1;
        }
    }
    Subloop::from_mask(mask)
}

/// Least subloop containing `generators`.
pub fn generate_subloop(l: &CayleyLoop, generators: &[usize]) -> Result<Subloop> {
    if let Some(&bad) = generators.iter().find(|&&g| g >= l.order()) {
        return Err(Error::InvalidElement {
            index: bad,
            order: l.order(),
        });
    }
    Ok(close(l, &Subloop::trivial(l), generators))
}

/// `<S ∪ {x}>` for a subloop `S`.
pub fn extend_subloop(l: &CayleyLoop, s: &Subloop, x: usize) -> Subloop {
    close(l, s, &[x])
}

/// An associator `(h, y, x)` that escapes `H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NormalityWitness {
    pub h: usize,
    pub y: usize,
    pub x: usize,
    pub value: usize,
}

impl NormalityWitness {
    pub fn into_error(self) -> Error {
        Error::NotNormal {
            h: self.h,
            y: self.y,
            x: self.x,
            value: self.value,
        }
    }
}

/// Least `(h, y, x)` with `h ∈ H`, `x, y ∈ K` and `(h, y, x) ∉ H`, if any.
pub fn normality_witness(
    l: &CayleyLoop,
    h: &Subloop,
    k: &Subloop,
) -> Result<Option<NormalityWitness>> {
    h.require_within(k)?;
    for &a in h.elements() {
        for &y in k.elements() {
            for &x in k.elements() {
                let value = l.associator(a, y, x);
                if !h.contains(value) {
                    return Ok(Some(NormalityWitness { h: a, y, x, value }));
                }
            }
        }
    }
    Ok(None)
}

/// Normality of `H` in `K` through associators: `(H, K, K) ⊆ H`.
pub fn is_normal(l: &CayleyLoop, h: &Subloop, k: &Subloop) -> Result<bool> {
    Ok(normality_witness(l, h, k)?.is_none())
}

/// Normality of `H` in `K` checked directly against the inner mappings
/// `L(x,y) = L(xy)^-1 L(x) L(y)` of `K`.
pub fn is_normal_by_inner_maps(l: &CayleyLoop, h: &Subloop, k: &Subloop) -> Result<bool> {
    h.require_within(k)?;
    for &x in k.elements() {
        for &y in k.elements() {
            let xy = l.mul(x, y);
            for &z in h.elements() {
                let image = l.left_div(xy, l.mul(x, l.mul(y, z)));
                if !h.contains(image) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Every subloop, sorted by size and then lexicographically.
///
/// Subloops are grown one generator at a time, breadth first, and keyed by
/// their element sets. The search stops once a round produces nothing new,
/// i.e. once `<S ∪ {x}>` is already known for every known `S` and every `x`.
pub fn all_subloops(l: &CayleyLoop, guards: &Guards) -> Result<Vec<Subloop>> {
    guards.check_lattice(l.order())?;
    let n = l.order();
    let trivial = Subloop::trivial(l);
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    seen.insert(trivial.elements.clone());
    let mut all = vec![trivial.clone()];
    let mut frontier = vec![trivial];
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for s in &frontier {
            for x in 0..n {
                // <S, x> = <S, x^-1>, so one of each inverse pair is enough.
                if s.contains(x) || l.inv(x) < x {
                    continue;
                }
                let t = extend_subloop(l, s, x);
                if seen.insert(t.elements.clone()) {
                    next.push(t);
                }
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all.sort();
    Ok(all)
}

/// Proper subloops of a lattice that no other proper subloop contains.
pub fn maximal_elements(lattice: &[Subloop]) -> Vec<Subloop> {
    let proper: Vec<&Subloop> = lattice.iter().filter(|s| !s.is_whole()).collect();
    let mut out: Vec<Subloop> = proper
        .iter()
        .filter(|s| !proper.iter().any(|t| t.len() > s.len() && s.is_subset(t)))
        .map(|s| (*s).clone())
        .collect();
    out.sort();
    out
}

/// Intersection of a nonempty family of subloops.
pub fn intersect_all(l: &CayleyLoop, family: &[Subloop]) -> Subloop {
    family
        .iter()
        .fold(Subloop::whole(l), |acc, s| acc.intersection(s))
}

/// Elements that commute and associate, in every position, with everything.
pub fn center(l: &CayleyLoop) -> Subloop {
    let n = l.order();
    let central = |x: usize| {
        (0..n).all(|a| {
            l.mul(x, a) == l.mul(a, x)
                && (0..n).all(|b| {
                    l.associator(x, a, b) == 0
                        && l.associator(a, x, b) == 0
                        && l.associator(a, b, x) == 0
                })
        })
    };
    let elements = (0..n).filter(|&x| central(x)).collect();
    Subloop::from_sorted_unchecked(n, elements)
}

/// The associator subloop `L' = <(a,b,c)>`, checked normal.
pub fn associator_subloop(l: &CayleyLoop) -> Result<Subloop> {
    l.require_cml()?;
    let n = l.order();
    let mut found = vec![false; n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                found[l.associator(a, b, c)] = true;
            }
        }
    }
    let gens: Vec<usize> = (0..n).filter(|&x| found[x]).collect();
    let derived = generate_subloop(l, &gens)?;
    if let Some(w) = normality_witness(l, &derived, &Subloop::whole(l))? {
        return Err(Error::Postcondition(format!(
            "associator subloop is not normal: {}",
            w.into_error()
        )));
    }
    Ok(derived)
}

/// `{x^k : x ∈ L}`, which must already be a subloop.
fn power_set(l: &CayleyLoop, k: i64) -> Result<Subloop> {
    let mut elements: Vec<usize> = (0..l.order()).map(|x| l.pow(x, k)).collect();
    elements.sort_unstable();
    elements.dedup();
    Subloop::from_elements(l, elements)
}

/// `L^3 = {x^3}`; a central subloop of every CML.
pub fn cube_subloop(l: &CayleyLoop) -> Result<Subloop> {
    l.require_cml()?;
    let cubes = power_set(l, 3)?;
    let z = center(l);
    if let Some(x) = cubes.first_outside(&z) {
        return Err(Error::NotASubloop(format!("cube {x} is not central")));
    }
    Ok(cubes)
}

/// `1 = Z_0 ⊂ Z_1 ⊂ ...` with `Z_{i+1}/Z_i = Z(L/Z_i)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CentralSeries {
    pub terms: Vec<Subloop>,
    /// `None` when the series stabilizes below the whole loop.
    pub class: Option<usize>,
}

pub fn upper_central_series(l: &CayleyLoop) -> Result<CentralSeries> {
    l.require_cml()?;
    let mut terms = vec![Subloop::trivial(l)];
    loop {
        let current = terms.last().expect("series starts with Z_0");
        if current.is_whole() {
            let class = terms.len() - 1;
            return Ok(CentralSeries {
                terms,
                class: Some(class),
            });
        }
        let q = quotient(l, current)?;
        let z = center(&q.loop_);
        let next = Subloop::from_sorted_unchecked(l.order(), q.preimage(&z));
        if next.len() == current.len() {
            return Ok(CentralSeries { terms, class: None });
        }
        terms.push(next);
    }
}

/// Coordinates of an elementary abelian p-group over a greedy basis.
fn coordinates(v: &CayleyLoop, p: usize) -> (usize, Vec<Vec<usize>>) {
    let n = v.order();
    let mut coords: Vec<Option<Vec<usize>>> = vec![None; n];
    coords[0] = Some(Vec::new());
    let mut span = vec![0usize];
    let mut rank = 0;
    for g in 0..n {
        if coords[g].is_some() {
            continue;
        }
        rank += 1;
        let mut grown = Vec::with_capacity(span.len() * p);
        for &s in &span {
            let base = coords[s].clone().expect("span elements have coordinates");
            for k in 0..p {
                let w = v.mul(s, v.pow(g, k as i64));
                let mut c = base.clone();
                c.resize(rank - 1, 0);
                c.push(k);
                coords[w] = Some(c);
                grown.push(w);
            }
        }
        span = grown;
    }
    let coords = coords
        .into_iter()
        .map(|c| {
            let mut c = c.expect("basis spans the group");
            c.resize(rank, 0);
            c
        })
        .collect();
    (rank, coords)
}

/// Nonzero vectors of `GF(p)^rank` whose first nonzero entry is 1.
fn projective_points(p: usize, rank: usize) -> Vec<Vec<usize>> {
    let total = p.pow(rank as u32);
    (1..total)
        .map(|mut code| {
            let mut v = vec![0; rank];
            for slot in v.iter_mut().rev() {
                *slot = code % p;
                code /= p;
            }
            v
        })
        .filter(|v| v.iter().find(|&&c| c != 0) == Some(&1))
        .collect()
}

/// Maximal proper subloops of a finite CML.
///
/// Each one contains `L'`, so they are the preimages of the index-p subgroups
/// of the abelian group `A = L/L'`, i.e. of the hyperplanes of `A/A^p`.
pub fn maximal_subloops(l: &CayleyLoop) -> Result<Vec<Subloop>> {
    if l.order() == 1 {
        return Err(Error::TrivialLoop);
    }
    let derived = associator_subloop(l)?;
    let to_abelian = quotient(l, &derived)?;
    let a = &to_abelian.loop_;
    let mut out = Vec::new();
    for p in prime_divisors(a.order() as u128) {
        let p = p as usize;
        let a_p = power_set(a, p as i64)?;
        let to_vector = quotient(a, &a_p)?;
        let (rank, coords) = coordinates(&to_vector.loop_, p);
        for functional in projective_points(p, rank) {
            let in_kernel = |v: usize| {
                coords[v]
                    .iter()
                    .zip(&functional)
                    .map(|(x, c)| x * c)
                    .sum::<usize>()
                    % p
                    == 0
            };
            let elements = (0..l.order())
                .filter(|&x| in_kernel(to_vector.projection[to_abelian.projection[x]]))
                .collect();
            out.push(Subloop::from_sorted_unchecked(l.order(), elements));
        }
    }
    out.sort();
    Ok(out)
}

/// Intersection of all maximal subloops.
pub fn frattini_subloop(l: &CayleyLoop) -> Result<Subloop> {
    let maximal = maximal_subloops(l)?;
    Ok(intersect_all(l, &maximal))
}

/// Searches random sets `S` with `<x, S> = L` but `<S> != L`. Finding one
/// proves `x` is a generator; finding none proves nothing.
pub fn non_generator_refutation(
    l: &CayleyLoop,
    x: usize,
    trials: usize,
    rng: &mut impl Rng,
) -> Option<Vec<usize>> {
    let n = l.order();
    let max_size = (usize::BITS - n.leading_zeros()) as usize + 1;
    let pool: Vec<usize> = (0..n).collect();
    for _ in 0..trials {
        let size = rng.gen_range(1..=max_size.min(n));
        let mut s: Vec<usize> = pool.choose_multiple(rng, size).copied().collect();
        s.sort_unstable();
        let without = generate_subloop(l, &s).expect("indices in range");
        if without.is_whole() {
            continue;
        }
        if extend_subloop(l, &without, x).is_whole() {
            return Some(s);
        }
    }
    None
}

/// For every prime `p` dividing the exponent, `x -> x^p` is onto.
pub fn is_divisible(l: &CayleyLoop) -> bool {
    let n = l.order();
    prime_divisors(l.exponent() as u128).into_iter().all(|p| {
        let mut hit = vec![false; n];
        for x in 0..n {
            hit[l.pow(x, p as i64)] = true;
        }
        hit.iter().all(|&h| h)
    })
}
