//! Multi-indices, components and jet variables.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Largest supported base dimension.
pub const MAX_DIM: usize = 4;

/// Symmetric derivative multi-index stored as per-direction counts.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct MultiIndex(pub [u8; MAX_DIM]);

impl MultiIndex {
    pub const ZERO: MultiIndex = MultiIndex([0; MAX_DIM]);

    pub fn unit(mu: usize) -> MultiIndex {
        let mut c = [0; MAX_DIM];
        c[mu] = 1;
        MultiIndex(c)
    }

    /// Builds the multi-index of a list of directions, in any order.
    pub fn from_dirs(dirs: &[usize]) -> MultiIndex {
        let mut c = [0u8; MAX_DIM];
        for &d in dirs {
            c[d] += 1;
        }
        MultiIndex(c)
    }

    pub fn order(&self) -> usize {
        self.0.iter().map(|&c| c as usize).sum()
    }

    pub fn count(&self, mu: usize) -> u8 {
        self.0[mu]
    }

    pub fn is_zero(&self) -> bool {
        self.0 == [0; MAX_DIM]
    }

    pub fn plus(&self, mu: usize) -> MultiIndex {
        let mut c = self.0;
        c[mu] += 1;
        MultiIndex(c)
    }

    pub fn minus(&self, mu: usize) -> Option<MultiIndex> {
        if self.0[mu] == 0 {
            return None;
        }
        let mut c = self.0;
        c[mu] -= 1;
        Some(MultiIndex(c))
    }

    pub fn add(&self, o: &MultiIndex) -> MultiIndex {
        let mut c = self.0;
        for i in 0..MAX_DIM {
            c[i] += o.0[i];
        }
        MultiIndex(c)
    }

    /// `self - o` when `o <= self` componentwise.
    pub fn sub(&self, o: &MultiIndex) -> Option<MultiIndex> {
        let mut c = self.0;
        for i in 0..MAX_DIM {
            c[i] = c[i].checked_sub(o.0[i])?;
        }
        Some(MultiIndex(c))
    }

    /// Sorted list of directions, e.g. counts `[1,0,2,0]` give `[0,2,2]`.
    pub fn dirs(&self) -> Vec<usize> {
        let mut v = Vec::with_capacity(self.order());
        for (i, &c) in self.0.iter().enumerate() {
            for _ in 0..c {
                v.push(i);
            }
        }
        v
    }

    /// Smallest direction with a nonzero count.
    pub fn first_dir(&self) -> Option<usize> {
        self.0.iter().position(|&c| c > 0)
    }

    /// All multi-indices of order at most `k` in dimension `n`, by increasing order.
    pub fn all_up_to(n: usize, k: usize) -> Vec<MultiIndex> {
        let mut out = vec![MultiIndex::ZERO];
        let mut layer = vec![MultiIndex::ZERO];
        for _ in 0..k {
            let mut next = Vec::new();
            for m in &layer {
                let start = m.0[..n].iter().rposition(|&c| c > 0).unwrap_or(0);
                for mu in start..n {
                    next.push(m.plus(mu));
                }
            }
            out.extend(next.iter().copied());
            layer = next;
        }
        out
    }

    /// Number of distinct orderings of the directions (multinomial coefficient).
    pub fn multinomial(&self) -> u64 {
        let mut num: u64 = (1..=self.order() as u64).product();
        for &c in &self.0 {
            num /= (1..=c as u64).product::<u64>();
        }
        num
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.dirs())
    }
}

/// Which bundle a component belongs to.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum Bundle {
    /// Configuration fields `y^a`.
    Field,
    /// Generic field variations `V^a`.
    Var,
    /// Parameters `eps^A` of a parametrization.
    Eps,
    /// Generator components: `xi^mu` first, then gauge components.
    Gen,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct Comp {
    pub bundle: Bundle,
    pub index: u16,
}

impl Comp {
    pub fn field(i: usize) -> Comp {
        Comp {
            bundle: Bundle::Field,
            index: i as u16,
        }
    }
    pub fn var(i: usize) -> Comp {
        Comp {
            bundle: Bundle::Var,
            index: i as u16,
        }
    }
    pub fn eps(i: usize) -> Comp {
        Comp {
            bundle: Bundle::Eps,
            index: i as u16,
        }
    }
    pub fn gen(i: usize) -> Comp {
        Comp {
            bundle: Bundle::Gen,
            index: i as u16,
        }
    }
}

/// A field component together with a derivative multi-index.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct JetVar {
    pub comp: Comp,
    pub idx: MultiIndex,
}

impl JetVar {
    pub fn new(comp: Comp, idx: MultiIndex) -> JetVar {
        JetVar { comp, idx }
    }

    pub fn base(comp: Comp) -> JetVar {
        JetVar {
            comp,
            idx: MultiIndex::ZERO,
        }
    }

    pub fn order(&self) -> usize {
        self.idx.order()
    }

    pub fn with_idx(&self, idx: MultiIndex) -> JetVar {
        JetVar {
            comp: self.comp,
            idx,
        }
    }
}

/// Strictly increasing set of base indices, stored as a bitmask.
#[derive(
    Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default, Serialize, Deserialize,
)]
pub struct BaseSet(pub u8);

impl BaseSet {
    pub const EMPTY: BaseSet = BaseSet(0);

    pub fn single(mu: usize) -> BaseSet {
        BaseSet(1 << mu)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn contains(&self, mu: usize) -> bool {
        self.0 & (1 << mu) != 0
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..8).filter(|&i| self.contains(i)).collect()
    }

    pub fn max_index(&self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(7 - self.0.leading_zeros() as usize)
        }
    }

    /// Normalizes an index tuple: `None` if it repeats an index, otherwise the
    /// set and the sign of the sorting permutation.
    pub fn from_tuple(t: &[usize]) -> Option<(BaseSet, i64)> {
        let mut bits = 0u8;
        let mut inversions = 0;
        for (i, &a) in t.iter().enumerate() {
            if bits & (1 << a) != 0 {
                return None;
            }
            bits |= 1 << a;
            inversions += t[i + 1..].iter().filter(|&&b| b < a).count();
        }
        Some((BaseSet(bits), if inversions % 2 == 0 { 1 } else { -1 }))
    }

    /// Adds `mu` at the end of the tuple; returns the new set and the sign of
    /// moving `mu` into sorted position.
    pub fn push(&self, mu: usize) -> Option<(BaseSet, i64)> {
        if self.contains(mu) {
            return None;
        }
        let after = (self.0 >> (mu + 1)).count_ones();
        Some((
            BaseSet(self.0 | (1 << mu)),
            if after % 2 == 0 { 1 } else { -1 },
        ))
    }

    /// All subsets of `{0..n}` of size `k`.
    pub fn all_of_size(n: usize, k: usize) -> Vec<BaseSet> {
        (0u16..(1 << n))
            .filter(|b| b.count_ones() as usize == k)
            .map(|b| BaseSet(b as u8))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_is_order_insensitive() {
        assert_eq!(
            MultiIndex::from_dirs(&[1, 0, 1]),
            MultiIndex::from_dirs(&[0, 1, 1])
        );
        assert_eq!(MultiIndex::from_dirs(&[2, 0]).dirs(), vec![0, 2]);
        assert!(MultiIndex::ZERO.is_zero());
        assert_eq!(MultiIndex::ZERO.order(), 0);
    }

    #[test]
    fn enumerates_symmetric_indices() {
        // n=2, k=2: 1 + 2 + 3
        assert_eq!(MultiIndex::all_up_to(2, 2).len(), 6);
        // n=4, k=2: 1 + 4 + 10
        assert_eq!(MultiIndex::all_up_to(4, 2).len(), 15);
        assert_eq!(MultiIndex::from_dirs(&[0, 0, 1]).multinomial(), 3);
    }

    #[test]
    fn base_set_signs() {
        assert_eq!(BaseSet::from_tuple(&[1, 0]), Some((BaseSet(0b11), -1)));
        assert_eq!(BaseSet::from_tuple(&[0, 2, 1]), Some((BaseSet(0b111), -1)));
        assert_eq!(BaseSet::from_tuple(&[2, 0, 1]), Some((BaseSet(0b111), 1)));
        assert_eq!(BaseSet::from_tuple(&[1, 1]), None);
        assert_eq!(BaseSet::single(1).push(0), Some((BaseSet(0b11), -1)));
        assert_eq!(BaseSet::single(0).push(1), Some((BaseSet(0b11), 1)));
        assert_eq!(BaseSet(0b1010).max_index(), Some(3));
    }
}
