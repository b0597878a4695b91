use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use super::Permutation;
use crate::error::{Error, Result};
use crate::loop_core::{lcm, prime_divisors, CayleyLoop};
use crate::structure::{all_subloops, maximal_elements};
use crate::Guards;

#[derive(Clone)]
struct Coset {
    rep: Permutation,
    rep_inv: Permutation,
}

/// One level of the stabilizer chain: the orbit of `base` under the strong
/// generators that fix every earlier base point.
#[derive(Clone)]
struct Level {
    base: usize,
    gens: Vec<Permutation>,
    orbit: Vec<usize>,
    transversal: Vec<Option<Coset>>,
}

impl Level {
    fn new(base: usize, degree: usize) -> Self {
        let mut level = Level {
            base,
            gens: Vec::new(),
            orbit: Vec::new(),
            transversal: Vec::new(),
        };
        level.rebuild(degree);
        level
    }

    fn rebuild(&mut self, degree: usize) {
        let id = Permutation::identity(degree);
        self.transversal = vec![None; degree];
        self.transversal[self.base] = Some(Coset {
            rep: id.clone(),
            rep_inv: id,
        });
        self.orbit = vec![self.base];
        let mut i = 0;
        while i < self.orbit.len() {
            let beta = self.orbit[i];
            for s in &self.gens {
                let gamma = s.apply(beta);
                if self.transversal[gamma].is_none() {
                    let rep = s * &self.transversal[beta].as_ref().expect("orbit point").rep;
                    let rep_inv = rep.inverse();
                    self.transversal[gamma] = Some(Coset { rep, rep_inv });
                    self.orbit.push(gamma);
                }
            }
            i += 1;
        }
    }
}

/// A permutation group given by generators, with a base and strong
/// generating set built by deterministic Schreier-Sims.
#[derive(Clone)]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Permutation>,
    levels: Vec<Level>,
}

impl fmt::Debug for PermGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PermGroup")
            .field("degree", &self.degree)
            .field("order", &self.order())
            .field("base", &self.base())
            .finish()
    }
}

/// Generators plus order, as written into reports.
#[derive(Debug, Clone, Serialize)]
pub struct GroupSummary {
    pub order: String,
    pub generators: Vec<Permutation>,
}

/// `1 = Z_0 ≤ Z_1 ≤ ...` of a permutation group.
#[derive(Debug, Clone)]
pub struct GroupCentralSeries {
    pub terms: Vec<PermGroup>,
    /// `Some(c)` when `Z_c` is the whole group.
    pub class: Option<usize>,
}

impl PermGroup {
    pub fn trivial(degree: usize) -> Self {
        PermGroup {
            degree,
            generators: Vec::new(),
            levels: Vec::new(),
        }
    }

    /// Builds the stabilizer chain. Generators already in the group built so
    /// far are dropped, so [`generators`](Self::generators) is irredundant.
    pub fn from_generators(degree: usize, gens: &[Permutation]) -> Result<Self> {
        let mut g = PermGroup::trivial(degree);
        for p in gens {
            g.check_degree(p)?;
            g.extend(p);
        }
        Ok(g)
    }

    fn check_degree(&self, p: &Permutation) -> Result<()> {
        if p.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: p.degree(),
            });
        }
        Ok(())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn base(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.base).collect()
    }

    pub fn summary(&self) -> GroupSummary {
        GroupSummary {
            order: self.order().to_string(),
            generators: self.generators.clone(),
        }
    }

    /// Product of the basic orbit lengths.
    pub fn order(&self) -> u128 {
        self.levels.iter().map(|l| l.orbit.len() as u128).product()
    }

    pub fn is_trivial(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn contains(&self, p: &Permutation) -> Result<bool> {
        self.check_degree(p)?;
        Ok(self.has(p))
    }

    pub(crate) fn has(&self, p: &Permutation) -> bool {
        let (residue, level) = self.sift(p.clone(), 0);
        level == self.levels.len() && residue.is_identity()
    }

    fn sift(&self, mut g: Permutation, from: usize) -> (Permutation, usize) {
        for (l, level) in self.levels.iter().enumerate().skip(from) {
            match &level.transversal[g.apply(level.base)] {
                Some(coset) => g = coset.rep_inv.compose(&g),
                None => return (g, l),
            }
        }
        (g, self.levels.len())
    }

    fn push_level(&mut self, base: usize) {
        self.levels.push(Level::new(base, self.degree));
    }

    /// Adds `g`; returns false if it was already a member.
    fn extend(&mut self, g: &Permutation) -> bool {
        if g.is_identity() || self.has(g) {
            return false;
        }
        self.generators.push(g.clone());
        let first_moved = self.levels.iter().position(|l| g.apply(l.base) != l.base);
        let j = match first_moved {
            Some(j) => j,
            None => {
                self.push_level(g.least_moved_point().expect("non-identity"));
                self.levels.len() - 1
            }
        };
        for l in 0..=j {
            self.levels[l].gens.push(g.clone());
            self.levels[l].rebuild(self.degree);
        }
        self.complete_from(j);
        true
    }

    /// Schreier-Sims: checks every Schreier generator of each level against
    /// the chain below it, repairing the chain until all of them sift.
    fn complete_from(&mut self, start: usize) {
        let mut i = start as isize;
        while i >= 0 {
            let level = i as usize;
            match self.failing_schreier_generator(level) {
                None => i -= 1,
                Some((h, drop)) => {
                    if drop == self.levels.len() {
                        self.push_level(h.least_moved_point().expect("non-identity residue"));
                    }
                    for l in level + 1..=drop {
                        self.levels[l].gens.push(h.clone());
                        self.levels[l].rebuild(self.degree);
                    }
                    i = drop as isize;
                }
            }
        }
    }

    fn failing_schreier_generator(&self, i: usize) -> Option<(Permutation, usize)> {
        let level = &self.levels[i];
        for &beta in &level.orbit {
            let u_beta = &level.transversal[beta].as_ref().expect("orbit point").rep;
            for s in &level.gens {
                let su = s.compose(u_beta);
                let gamma = su.apply(level.base);
                let back = &level.transversal[gamma]
                    .as_ref()
                    .expect("orbit is closed")
                    .rep_inv;
                let schreier = back.compose(&su);
                if schreier.is_identity() {
                    continue;
                }
                let (h, drop) = self.sift(schreier, i + 1);
                if drop < self.levels.len() || !h.is_identity() {
                    return Some((h, drop));
                }
            }
        }
        None
    }

    /// All elements as products of transversal representatives; the
    /// identity comes first.
    pub fn enumerate_elements(&self, guards: &Guards) -> Result<Vec<Permutation>> {
        guards.check_elements(self.order())?;
        let mut elements = vec![Permutation::identity(self.degree)];
        for level in self.levels.iter().rev() {
            let mut next = Vec::with_capacity(elements.len() * level.orbit.len());
            for &beta in &level.orbit {
                let rep = &level.transversal[beta].as_ref().expect("orbit point").rep;
                for g in &elements {
                    next.push(rep.compose(g));
                }
            }
            elements = next;
        }
        Ok(elements)
    }

    pub fn is_subgroup_of(&self, other: &PermGroup) -> bool {
        self.degree == other.degree && self.generators.iter().all(|g| other.has(g))
    }

    pub fn same_group(&self, other: &PermGroup) -> bool {
        self.order() == other.order() && self.is_subgroup_of(other)
    }

    pub fn join(&self, other: &PermGroup) -> Result<PermGroup> {
        let mut g = self.clone();
        for p in &other.generators {
            g.check_degree(p)?;
            g.extend(p);
        }
        Ok(g)
    }

    /// Subgroup generated by a set of members.
    pub fn subgroup(&self, gens: &[Permutation]) -> Result<PermGroup> {
        for p in gens {
            if !self.contains(p)? {
                return Err(Error::NotSubgroup(format!("{p:?} is not a member")));
            }
        }
        PermGroup::from_generators(self.degree, gens)
    }

    /// Orbit of a point under the group.
    pub fn orbit(&self, point: usize) -> Vec<usize> {
        let mut seen = vec![false; self.degree];
        seen[point] = true;
        let mut orbit = vec![point];
        let mut i = 0;
        while i < orbit.len() {
            for g in &self.generators {
                let y = g.apply(orbit[i]);
                if !seen[y] {
                    seen[y] = true;
                    orbit.push(y);
                }
            }
            i += 1;
        }
        orbit.sort_unstable();
        orbit
    }

    fn require_subgroup(&self, h: &PermGroup) -> Result<()> {
        if h.degree != self.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: h.degree,
            });
        }
        if let Some(g) = h.generators.iter().find(|g| !self.has(g)) {
            return Err(Error::NotSubgroup(format!(
                "generator {g:?} is not a member"
            )));
        }
        Ok(())
    }

    /// Elements commuting with every generator.
    pub fn center_of_group(&self, guards: &Guards) -> Result<PermGroup> {
        let central: Vec<Permutation> = self
            .enumerate_elements(guards)?
            .into_iter()
            .filter(|g| self.generators.iter().all(|s| g * s == s * g))
            .collect();
        PermGroup::from_generators(self.degree, &central)
    }

    /// Least normal subgroup of `self` containing `s`.
    pub fn normal_closure(&self, s: &[Permutation]) -> Result<PermGroup> {
        let mut n = self.subgroup(s)?;
        loop {
            let mut grew = false;
            let current = n.generators.clone();
            for x in &current {
                for g in &self.generators {
                    let c = x.conjugate_by(g);
                    if n.extend(&c) {
                        grew = true;
                    }
                }
            }
            if !grew {
                return Ok(n);
            }
        }
    }

    /// Commutator subgroup: normal closure of generator commutators.
    pub fn derived_subgroup(&self) -> Result<PermGroup> {
        let mut comms = Vec::new();
        for (i, a) in self.generators.iter().enumerate() {
            for b in &self.generators[i + 1..] {
                let c = Permutation::commutator(a, b);
                if !c.is_identity() {
                    comms.push(c);
                }
            }
        }
        self.normal_closure(&comms)
    }

    pub fn is_normal_subgroup(&self, h: &PermGroup) -> Result<bool> {
        self.require_subgroup(h)?;
        Ok(h.generators
            .iter()
            .all(|x| self.generators.iter().all(|g| h.has(&x.conjugate_by(g)))))
    }

    /// `{g ∈ G : g^-1 H g = H}`.
    pub fn normalizer_of_subgroup(&self, h: &PermGroup, guards: &Guards) -> Result<PermGroup> {
        self.require_subgroup(h)?;
        let mut n = h.clone();
        for g in self.enumerate_elements(guards)? {
            if n.has(&g) {
                continue;
            }
            if h.generators.iter().all(|x| h.has(&x.conjugate_by(&g))) {
                n.extend(&g);
            }
        }
        Ok(n)
    }

    /// Ascending central series; `Z_{i+1}` collects the `g` whose commutators
    /// with every generator lie in `Z_i`.
    pub fn upper_central_series(&self, guards: &Guards) -> Result<GroupCentralSeries> {
        let elements = self.enumerate_elements(guards)?;
        let mut terms = vec![PermGroup::trivial(self.degree)];
        loop {
            let current = terms.last().expect("series starts with Z_0");
            if current.order() == self.order() {
                let class = terms.len() - 1;
                return Ok(GroupCentralSeries {
                    terms,
                    class: Some(class),
                });
            }
            let mut next = current.clone();
            for g in &elements {
                if next.has(g) {
                    continue;
                }
                if self
                    .generators
                    .iter()
                    .all(|s| current.has(&Permutation::commutator(g, s)))
                {
                    next.extend(g);
                }
            }
            if next.order() == current.order() {
                return Ok(GroupCentralSeries { terms, class: None });
            }
            terms.push(next);
        }
    }

    pub fn nilpotency_class(&self, guards: &Guards) -> Result<Option<usize>> {
        Ok(self.upper_central_series(guards)?.class)
    }

    /// Frattini subgroup of a finite nilpotent group: `G' G^r` where `r` is
    /// the product of the distinct primes dividing `|G|`.
    pub fn frattini_subgroup(&self, guards: &Guards) -> Result<PermGroup> {
        let series = self.upper_central_series(guards)?;
        if series.class.is_none() {
            return Err(Error::NotNilpotent {
                stalled_at: series.terms.last().map_or(1, |t| t.order()),
                order: self.order(),
            });
        }
        let radical: u128 = prime_divisors(self.order()).into_iter().product();
        let mut phi = self.derived_subgroup()?;
        for g in self.enumerate_elements(guards)? {
            phi.extend(&g.pow(radical as i64));
        }
        Ok(phi)
    }

    /// Maximal subgroups by exhaustive search over the subgroup lattice.
    pub fn maximal_subgroups_by_search(&self, guards: &Guards) -> Result<Vec<PermGroup>> {
        if self.order() > guards.frattini_oracle {
            return Err(Error::OrderOverflow {
                guard: "frattini-oracle",
                what: "maximal subgroup search".into(),
                requested: self.order(),
                limit: guards.frattini_oracle,
            });
        }
        let (table, elements) = self.cayley_loop(guards)?;
        let lattice_guards = Guards {
            lattice: table.order(),
            ..*guards
        };
        let lattice = all_subloops(&table, &lattice_guards)?;
        maximal_elements(&lattice)
            .iter()
            .map(|m| {
                let gens: Vec<Permutation> =
                    m.elements().iter().map(|&i| elements[i].clone()).collect();
                PermGroup::from_generators(self.degree, &gens)
            })
            .collect()
    }

    /// Intersection of all maximal subgroups, found by exhaustive search.
    pub fn frattini_subgroup_by_search(&self, guards: &Guards) -> Result<PermGroup> {
        let maximal = self.maximal_subgroups_by_search(guards)?;
        if maximal.is_empty() {
            return Ok(self.clone());
        }
        let common: Vec<Permutation> = self
            .enumerate_elements(guards)?
            .into_iter()
            .filter(|g| maximal.iter().all(|m| m.has(g)))
            .collect();
        PermGroup::from_generators(self.degree, &common)
    }

    /// The group's Cayley table as a loop (identity at index 0), together
    /// with the element list that indexes it.
    pub fn cayley_loop(&self, guards: &Guards) -> Result<(CayleyLoop, Vec<Permutation>)> {
        let max = guards.max_order.max(guards.lattice) as u128;
        if self.order() > max {
            return Err(Error::OrderOverflow {
                guard: "max-order",
                what: "Cayley table of a group".into(),
                requested: self.order(),
                limit: max,
            });
        }
        let elements = self.enumerate_elements(guards)?;
        let index: HashMap<&Permutation, usize> =
            elements.iter().enumerate().map(|(i, g)| (g, i)).collect();
        let n = elements.len();
        let mut table = Vec::with_capacity(n * n);
        for a in &elements {
            for b in &elements {
                table.push(index[&a.compose(b)] as u32);
            }
        }
        let l = CayleyLoop::from_flat(n, table, Some(format!("group{n}")))?;
        Ok((l, elements))
    }

    pub fn exponent(&self, guards: &Guards) -> Result<u64> {
        Ok(self
            .enumerate_elements(guards)?
            .iter()
            .fold(1, |acc, g| lcm(acc, g.order())))
    }

    /// For every prime `p` dividing the exponent, `g -> g^p` is onto.
    pub fn is_divisible_group(&self, guards: &Guards) -> Result<bool> {
        let elements = self.enumerate_elements(guards)?;
        let exponent = elements.iter().fold(1, |acc, g| lcm(acc, g.order()));
        for p in prime_divisors(exponent as u128) {
            let images: HashSet<Permutation> = elements.iter().map(|g| g.pow(p as i64)).collect();
            if images.len() != elements.len() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
