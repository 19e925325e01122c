//! Points-to set storage: a flat bit set, a two-level page-table sparse bit
//! set with 256-bit leaf pages, and a hybrid container that keeps small sets
//! as sorted arrays.

mod hybrid;
mod regular;
mod sparse;

pub use hybrid::{HybridSet, DEFAULT_HYBRID_THRESHOLD};
pub use regular::RegularBitSet;
pub use sparse::{SparseBitSet, DIRECTORY_ENTRY_BITS, LEAF_BITS};

use std::hash::Hash;

use indexmap::IndexSet;

/// Set operations shared by every representation. Mutators return whether
/// the set changed.
pub trait BitSetOps: Default + Clone {
    fn set(&mut self, index: u32) -> bool;
    fn clear(&mut self, index: u32) -> bool;
    fn contains(&self, index: u32) -> bool;
    fn cardinality(&self) -> usize;
    /// Set bits in ascending order.
    fn iter(&self) -> Box<dyn Iterator<Item = u32> + '_>;

    fn is_empty(&self) -> bool {
        self.cardinality() == 0
    }

    /// `self |= other`
    fn or_into(&mut self, other: &Self) -> bool {
        let mut changed = false;
        for i in other.iter() {
            changed |= self.set(i);
        }
        changed
    }

    /// `self &= other`
    fn and_into(&mut self, other: &Self) -> bool {
        let drop: Vec<u32> = self.iter().filter(|i| !other.contains(*i)).collect();
        for i in &drop {
            self.clear(*i);
        }
        !drop.is_empty()
    }

    /// `self &= !other`
    fn and_not(&mut self, other: &Self) -> bool {
        let drop: Vec<u32> = self.iter().filter(|i| other.contains(*i)).collect();
        for i in &drop {
            self.clear(*i);
        }
        !drop.is_empty()
    }
}

/// Dense indices for objects, assigned in first-seen order.
#[derive(Debug, Clone)]
pub struct ObjectIndexer<T: Hash + Eq> {
    objects: IndexSet<T>,
}

impl<T: Hash + Eq> Default for ObjectIndexer<T> {
    fn default() -> Self {
        ObjectIndexer { objects: IndexSet::new() }
    }
}

impl<T: Hash + Eq + Clone> ObjectIndexer<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// The index of `obj`, assigning the next free index on first sight.
    pub fn index(&mut self, obj: &T) -> u32 {
        match self.objects.get_index_of(obj) {
            Some(i) => i as u32,
            None => self.objects.insert_full(obj.clone()).0 as u32,
        }
    }

    pub fn get_index(&self, obj: &T) -> Option<u32> {
        self.objects.get_index_of(obj).map(|i| i as u32)
    }

    pub fn object(&self, index: u32) -> &T {
        &self.objects[index as usize]
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &T)> {
        self.objects.iter().enumerate().map(|(i, o)| (i as u32, o))
    }
}
