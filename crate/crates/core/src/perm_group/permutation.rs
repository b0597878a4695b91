use std::fmt;
use std::ops::Mul;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A bijection of `{0..n-1}`, stored as its image array.
///
/// Permutations act on the left: `(a * b).apply(x) == a.apply(b.apply(x))`,
/// matching the composition order used for translations `L(x) L(y)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<u32>,
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Permutation {
            images: (0..degree as u32).collect(),
        }
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n || seen[x] {
                return Err(Error::NotSubgroup(format!(
                    "image array {images:?} is not a bijection"
                )));
            }
            seen[x] = true;
        }
        Ok(Permutation {
            images: images.into_iter().map(|x| x as u32).collect(),
        })
    }

    pub(crate) fn from_images_unchecked(images: Vec<u32>) -> Self {
        Permutation { images }
    }

    /// Builds a permutation from disjoint cycles, e.g. `&[&[0, 1, 2]]`.
    pub fn from_cycles(degree: usize, cycles: &[&[usize]]) -> Result<Self> {
        let mut images: Vec<usize> = (0..degree).collect();
        for cycle in cycles {
            for (k, &x) in cycle.iter().enumerate() {
                let next = cycle[(k + 1) % cycle.len()];
                if x >= degree || next >= degree {
                    return Err(Error::DegreeMismatch {
                        expected: degree,
                        found: x.max(next) + 1,
                    });
                }
                images[x] = next;
            }
        }
        Self::from_images(images)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn apply(&self, x: usize) -> usize {
        self.images[x] as usize
    }

    pub fn images(&self) -> Vec<usize> {
        self.images.iter().map(|&x| x as usize).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u32; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Permutation { images: inv }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Permutation) -> Self {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation {
            images: other
                .images
                .iter()
                .map(|&x| self.images[x as usize])
                .collect(),
        }
    }

    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = Permutation::identity(self.degree());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.compose(&sq);
            }
            sq = sq.compose(&sq);
            e >>= 1;
        }
        acc
    }

    /// `a^-1 b^-1 a b`.
    pub fn commutator(a: &Permutation, b: &Permutation) -> Self {
        a.inverse().compose(&b.inverse()).compose(a).compose(b)
    }

    /// `g^-1 self g`.
    pub fn conjugate_by(&self, g: &Permutation) -> Self {
        g.inverse().compose(self).compose(g)
    }

    pub fn order(&self) -> u64 {
        let mut seen = vec![false; self.images.len()];
        let mut acc = 1u64;
        for start in 0..self.images.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0u64;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.apply(x);
                len += 1;
            }
            acc = crate::loop_core::lcm(acc, len);
        }
        acc
    }

    pub fn least_moved_point(&self) -> Option<usize> {
        self.images
            .iter()
            .enumerate()
            .find(|&(i, &x)| i as u32 != x)
            .map(|(i, _)| i)
    }
}

impl Mul for &Permutation {
    type Output = Permutation;

    fn mul(self, rhs: &Permutation) -> Permutation {
        self.compose(rhs)
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.images)
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.images.serialize(s)
    }
}
