use super::{BitSetOps, SparseBitSet};

pub const DEFAULT_HYBRID_THRESHOLD: usize = 8;

#[derive(Debug, Clone)]
enum Repr {
    Small(Vec<u32>),
    Large(SparseBitSet),
}

/// Sorted array while the set holds at most `threshold` elements, a
/// [`SparseBitSet`] afterwards. Switching to the bit set is one-way.
#[derive(Debug, Clone)]
pub struct HybridSet {
    repr: Repr,
    threshold: usize,
}

impl Default for HybridSet {
    fn default() -> Self {
        Self::with_threshold(DEFAULT_HYBRID_THRESHOLD)
    }
}

impl PartialEq for HybridSet {
    fn eq(&self, other: &Self) -> bool {
        self.cardinality() == other.cardinality() && self.iter().eq(other.iter())
    }
}

impl Eq for HybridSet {}

impl FromIterator<u32> for HybridSet {
    fn from_iter<I: IntoIterator<Item = u32>>(iter: I) -> Self {
        let mut s = HybridSet::default();
        for i in iter {
            s.set(i);
        }
        s
    }
}

impl HybridSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_threshold(threshold: usize) -> Self {
        HybridSet { repr: Repr::Small(Vec::new()), threshold }
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    /// Whether the set is still in sorted-array mode.
    pub fn is_small(&self) -> bool {
        matches!(self.repr, Repr::Small(_))
    }

    fn promote(&mut self) {
        if let Repr::Small(items) = &self.repr {
            let mut bits = SparseBitSet::new();
            for &i in items {
                bits.set(i);
            }
            self.repr = Repr::Large(bits);
        }
    }

    /// Elements of `other` missing from `self`, as a new set.
    pub fn difference(&self, other: &HybridSet) -> HybridSet {
        let mut out = HybridSet::with_threshold(self.threshold);
        for i in self.iter() {
            if !other.contains(i) {
                out.set(i);
            }
        }
        out
    }
}

impl BitSetOps for HybridSet {
    fn set(&mut self, index: u32) -> bool {
        match &mut self.repr {
            Repr::Small(items) => match items.binary_search(&index) {
                Ok(_) => false,
                Err(pos) => {
                    if items.len() < self.threshold {
                        items.insert(pos, index);
                    } else {
                        self.promote();
                        self.set(index);
                    }
                    true
                }
            },
            Repr::Large(bits) => bits.set(index),
        }
    }

    fn clear(&mut self, index: u32) -> bool {
        match &mut self.repr {
            Repr::Small(items) => match items.binary_search(&index) {
                Ok(pos) => {
                    items.remove(pos);
                    true
                }
                Err(_) => false,
            },
            Repr::Large(bits) => bits.clear(index),
        }
    }

    fn contains(&self, index: u32) -> bool {
        match &self.repr {
            Repr::Small(items) => items.binary_search(&index).is_ok(),
            Repr::Large(bits) => bits.contains(index),
        }
    }

    fn cardinality(&self) -> usize {
        match &self.repr {
            Repr::Small(items) => items.len(),
            Repr::Large(bits) => bits.cardinality(),
        }
    }

    fn iter(&self) -> Box<dyn Iterator<Item = u32> + '_> {
        match &self.repr {
            Repr::Small(items) => Box::new(items.iter().copied()),
            Repr::Large(bits) => bits.iter(),
        }
    }

    fn or_into(&mut self, other: &Self) -> bool {
        if let (Repr::Large(mine), Repr::Large(theirs)) = (&mut self.repr, &other.repr) {
            return mine.or_into(theirs);
        }
        let mut changed = false;
        for i in other.iter() {
            changed |= self.set(i);
        }
        changed
    }
}
