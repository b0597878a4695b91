//! Translations, the multiplication group `M(L)` and the inner mapping
//! group `I(L)` of a commutative loop, and the checks that relate their
//! structure back to the loop.

use std::collections::HashSet;

use serde_json::json;

use crate::error::{Error, Result};
use crate::loop_core::{quotient, CayleyLoop};
use crate::perm_group::{PermGroup, Permutation};
use crate::structure::{associator_subloop, center, is_normal, Subloop};
use crate::verify::Outcome;
use crate::Guards;

/// `L(x): y -> xy`.
pub fn translation(l: &CayleyLoop, x: usize) -> Permutation {
    Permutation::from_images_unchecked((0..l.order()).map(|y| l.mul(x, y) as u32).collect())
}

/// `R(x): y -> yx`.
pub fn right_translation(l: &CayleyLoop, x: usize) -> Permutation {
    Permutation::from_images_unchecked((0..l.order()).map(|y| l.mul(y, x) as u32).collect())
}

/// `L(x, y) = L(xy)^-1 L(x) L(y)`.
pub fn inner_mapping(l: &CayleyLoop, x: usize, y: usize) -> Permutation {
    let lxy = translation(l, l.mul(x, y));
    lxy.inverse()
        .compose(&translation(l, x))
        .compose(&translation(l, y))
}

/// A loop together with its multiplication and inner mapping groups.
#[derive(Debug, Clone)]
pub struct MultGroupBundle {
    loop_: CayleyLoop,
    m: PermGroup,
    i: PermGroup,
    translations: Vec<Permutation>,
}

impl MultGroupBundle {
    /// Builds `M(L)` from the left translations and `I(L)` from all `L(x,y)`.
    /// Only commutative loops are accepted, where `R(x) = L(x)`.
    pub fn new(l: &CayleyLoop) -> Result<Self> {
        let n = l.order();
        for x in 0..n {
            for y in x + 1..n {
                if l.mul(x, y) != l.mul(y, x) {
                    return Err(Error::NotCommutative { x, y });
                }
            }
        }
        let translations: Vec<Permutation> = (0..n).map(|x| translation(l, x)).collect();
        let m = PermGroup::from_generators(n, &translations)?;
        let mut seen = HashSet::new();
        let mut inner = Vec::new();
        for x in 0..n {
            for y in 0..n {
                let t = inner_mapping(l, x, y);
                if !t.is_identity() && seen.insert(t.clone()) {
                    inner.push(t);
                }
            }
        }
        let i = PermGroup::from_generators(n, &inner)?;
        // I fixes 0 and M is transitive, so |M| = n |I| forces I = Stab_M(0).
        if i.generators().iter().any(|g| g.apply(0) != 0) || !i.is_subgroup_of(&m) {
            return Err(Error::Postcondition(
                "inner mappings do not lie in the stabilizer of the identity".into(),
            ));
        }
        if m.order() != n as u128 * i.order() {
            return Err(Error::Postcondition(format!(
                "|M| = {} but |L| |I| = {}",
                m.order(),
                n as u128 * i.order()
            )));
        }
        Ok(MultGroupBundle {
            loop_: l.clone(),
            m,
            i,
            translations,
        })
    }

    pub fn loop_(&self) -> &CayleyLoop {
        &self.loop_
    }

    pub fn mult_group(&self) -> &PermGroup {
        &self.m
    }

    pub fn inner_group(&self) -> &PermGroup {
        &self.i
    }

    pub fn translation(&self, x: usize) -> &Permutation {
        &self.translations[x]
    }

    /// `T(x) = L(x)^-1 R(x)`, computed literally. Returns the first `x` for
    /// which it is not the identity.
    pub fn first_nontrivial_t(&self) -> Option<usize> {
        (0..self.loop_.order()).find(|&x| {
            !self.translations[x]
                .inverse()
                .compose(&right_translation(&self.loop_, x))
                .is_identity()
        })
    }

    /// `M(H) = <L(h) : h ∈ H>`.
    pub fn translations_of(&self, h: &Subloop) -> Result<PermGroup> {
        let gens: Vec<Permutation> = h
            .elements()
            .iter()
            .map(|&x| self.translations[x].clone())
            .collect();
        PermGroup::from_generators(self.loop_.order(), &gens)
    }

    /// `H* = {α ∈ M : α(x) H = x H for all x}` for a normal subloop `H`.
    pub fn h_star(&self, h: &Subloop, guards: &Guards) -> Result<PermGroup> {
        let q = quotient(&self.loop_, h)?;
        let n = self.loop_.order();
        let fixed: Vec<Permutation> = self
            .m
            .enumerate_elements(guards)?
            .into_iter()
            .filter(|a| (0..n).all(|x| q.projection[a.apply(x)] == q.projection[x]))
            .collect();
        PermGroup::from_generators(n, &fixed)
    }

    /// `N(1)` for a subgroup `N ≤ M`, checked to be a normal subloop `H`
    /// with `N ⊆ H*`.
    pub fn orbit_of_identity(&self, n: &PermGroup, guards: &Guards) -> Result<Subloop> {
        if !n.is_subgroup_of(&self.m) {
            return Err(Error::NotSubgroup(
                "group is not contained in the multiplication group".into(),
            ));
        }
        let orbit = Subloop::from_elements(&self.loop_, n.orbit(0))
            .map_err(|e| Error::Postcondition(format!("orbit of 1 is not a subloop: {e}")))?;
        if !is_normal(&self.loop_, &orbit, &Subloop::whole(&self.loop_))? {
            return Err(Error::Postcondition(format!("orbit {orbit} is not normal")));
        }
        if !n.is_subgroup_of(&self.h_star(&orbit, guards)?) {
            return Err(Error::Postcondition(format!(
                "group does not lie in H* for H = {orbit}"
            )));
        }
        Ok(orbit)
    }

    /// `M(L/H) ≅ M/H*`: orders match, and the action on cosets is a
    /// homomorphism onto `M(L/H)` whose kernel is exactly `H*`.
    pub fn verify_lemma1(&self, h: &Subloop, guards: &Guards) -> Result<Outcome> {
        let q = quotient(&self.loop_, h)?;
        let quotient_bundle = MultGroupBundle::new(&q.loop_)?;
        let mq = &quotient_bundle.m;
        let hs = self.h_star(h, guards)?;
        let mut witness = json!({
            "H": h.len(),
            "order_M": self.m.order().to_string(),
            "order_M_quotient": mq.order().to_string(),
            "order_H_star": hs.order().to_string(),
        });
        if mq.order() * hs.order() != self.m.order() {
            witness["reason"] = json!("|M(L/H)| |H*| != |M|");
            return Ok(Outcome::fail(witness));
        }
        let induced = |a: &Permutation| -> Permutation {
            Permutation::from_images_unchecked(
                q.representatives
                    .iter()
                    .map(|&r| q.projection[a.apply(r)] as u32)
                    .collect(),
            )
        };
        let n = self.loop_.order();
        let mut images = HashSet::new();
        for a in self.m.enumerate_elements(guards)? {
            let abar = induced(&a);
            if let Some(x) =
                (0..n).find(|&x| q.projection[a.apply(x)] != abar.apply(q.projection[x]))
            {
                witness["reason"] = json!("action on cosets is not well defined");
                witness["alpha"] = json!(a);
                witness["x"] = json!(x);
                return Ok(Outcome::fail(witness));
            }
            if !mq.has(&abar) {
                witness["reason"] = json!("induced map outside M(L/H)");
                witness["alpha"] = json!(a);
                return Ok(Outcome::fail(witness));
            }
            if abar.is_identity() != hs.has(&a) {
                witness["reason"] = json!("kernel differs from H*");
                witness["alpha"] = json!(a);
                return Ok(Outcome::fail(witness));
            }
            for (x, t) in self.translations.iter().enumerate() {
                let lhs = induced(&a.compose(t));
                let rhs = abar.compose(quotient_bundle.translation(q.projection[x]));
                if lhs != rhs {
                    witness["reason"] = json!("induced action is not multiplicative");
                    witness["alpha"] = json!(a);
                    witness["x"] = json!(x);
                    return Ok(Outcome::fail(witness));
                }
            }
            images.insert(abar);
        }
        if images.len() as u128 != mq.order() {
            witness["reason"] = json!("induced action is not onto M(L/H)");
            witness["image_size"] = json!(images.len());
            return Ok(Outcome::fail(witness));
        }
        Ok(Outcome::pass(witness))
    }

    /// `Z(M) = {L(a) : a ∈ Z(L)}` and `a -> L(a)` is an isomorphism.
    pub fn verify_prop1(&self, guards: &Guards) -> Result<Outcome> {
        let l = &self.loop_;
        let z = center(l);
        let zm = self.m.center_of_group(guards)?;
        let group_side: HashSet<Permutation> = zm.enumerate_elements(guards)?.into_iter().collect();
        let loop_side: HashSet<Permutation> = z
            .elements()
            .iter()
            .map(|&a| self.translations[a].clone())
            .collect();
        let mut witness = json!({
            "order_Z_L": z.len(),
            "order_Z_M": zm.order().to_string(),
        });
        if loop_side.len() != z.len() {
            witness["reason"] = json!("a -> L(a) is not injective on Z(L)");
            return Ok(Outcome::fail(witness));
        }
        if group_side != loop_side {
            let mut missing: Vec<usize> = z
                .elements()
                .iter()
                .copied()
                .filter(|&a| !group_side.contains(&self.translations[a]))
                .collect();
            missing.sort_unstable();
            witness["reason"] = json!("Z(M) differs from the translations of Z(L)");
            witness["central_elements_not_in_Z_M"] = json!(missing);
            return Ok(Outcome::fail(witness));
        }
        for &a in z.elements() {
            for &b in z.elements() {
                if self.translations[a].compose(&self.translations[b])
                    != self.translations[l.mul(a, b)]
                {
                    witness["reason"] = json!("L(a) L(b) != L(ab)");
                    witness["pair"] = json!([a, b]);
                    return Ok(Outcome::fail(witness));
                }
            }
        }
        Ok(Outcome::pass(witness))
    }

    /// `M' = <I, M(L')> = (L')* = normal closure of I`, compared pairwise.
    pub fn verify_lemma7(&self, guards: &Guards) -> Result<Outcome> {
        let lp = associator_subloop(&self.loop_)?;
        let groups = [
            ("derived", self.m.derived_subgroup()?),
            ("join_I_M_L'", self.i.join(&self.translations_of(&lp)?)?),
            ("L'_star", self.h_star(&lp, guards)?),
            (
                "normal_closure_I",
                self.m.normal_closure(self.i.generators())?,
            ),
        ];
        let orders: serde_json::Map<String, serde_json::Value> = groups
            .iter()
            .map(|(name, g)| (name.to_string(), json!(g.order().to_string())))
            .collect();
        let mut witness = json!({ "orders": orders });
        for (a, (name_a, ga)) in groups.iter().enumerate() {
            for (name_b, gb) in &groups[a + 1..] {
                if !ga.same_group(gb) {
                    witness["reason"] = json!(format!("{name_a} != {name_b}"));
                    return Ok(Outcome::fail(witness));
                }
            }
        }
        Ok(Outcome::pass(witness))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loop_core::{gen_abelian, trivial_loop};

    #[test]
    fn translations_of_z3() {
        let z3 = gen_abelian(&[3], 16).unwrap();
        assert!(translation(&z3, 0).is_identity());
        assert_eq!(
            translation(&z3, 1),
            Permutation::from_cycles(3, &[&[0, 1, 2]]).unwrap()
        );
        let b = MultGroupBundle::new(&z3).unwrap();
        assert_eq!(b.mult_group().order(), 3);
        assert!(b.inner_group().is_trivial());
        assert_eq!(b.first_nontrivial_t(), None);
    }

    #[test]
    fn refuses_noncommutative_loops() {
        // Cayley table of S3 with identity at 0.
        let s3 = PermGroup::from_generators(
            3,
            &[
                Permutation::from_cycles(3, &[&[0, 1]]).unwrap(),
                Permutation::from_cycles(3, &[&[0, 1, 2]]).unwrap(),
            ],
        )
        .unwrap();
        let (table, _) = s3.cayley_loop(&Guards::DEFAULT).unwrap();
        assert!(matches!(
            MultGroupBundle::new(&table),
            Err(Error::NotCommutative { .. })
        ));
    }

    #[test]
    fn h_star_extremes() {
        let z9 = gen_abelian(&[9], 16).unwrap();
        let b = MultGroupBundle::new(&z9).unwrap();
        let g = Guards::DEFAULT;
        assert!(b.h_star(&Subloop::trivial(&z9), &g).unwrap().is_trivial());
        assert_eq!(b.h_star(&Subloop::whole(&z9), &g).unwrap().order(), 9);
        let h = Subloop::from_elements(&z9, vec![0, 3, 6]).unwrap();
        assert_eq!(b.h_star(&h, &g).unwrap().order(), 3);
        assert!(b.verify_lemma1(&h, &g).unwrap().passed());
        assert_eq!(b.orbit_of_identity(b.mult_group(), &g).unwrap().len(), 9);
        let t = trivial_loop();
        let tb = MultGroupBundle::new(&t).unwrap();
        assert!(tb.verify_prop1(&g).unwrap().passed());
        assert!(tb.verify_lemma7(&g).unwrap().passed());
    }
}
