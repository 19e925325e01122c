use super::BitSetOps;

/// Bits per leaf page.
pub const LEAF_BITS: u32 = 256;
/// Width charged for one directory entry.
pub const DIRECTORY_ENTRY_BITS: usize = 32;

const LEAF_SHIFT: u32 = 8;
const LEAF_WORDS: usize = (LEAF_BITS / 64) as usize;
/// The second-level fan-out stops doubling at 64; the top level grows after.
const MAX_MID_SHIFT: u32 = 6;

type Leaf = [u64; LEAF_WORDS];
type MidDirectory = Vec<Option<Box<Leaf>>>;

/// A "virtual memory"-like sparse bit set addressed through a two-level page
/// table. Bit `i` lives in leaf page `i >> 8`; the page number splits into a
/// top-directory index and a second-level index. Only pages with set bits
/// get leaves, and only populated top entries get a second-level directory.
///
/// Both directory levels start with one entry. The second level doubles until
/// it reaches 64 entries, after which the top level doubles; because the top
/// level has a single entry until then, growth never relocates a leaf.
#[derive(Debug, Clone)]
pub struct SparseBitSet {
    top: Vec<Option<MidDirectory>>,
    mid_shift: u32,
    leaves: usize,
    len: usize,
}

impl Default for SparseBitSet {
    fn default() -> Self {
        SparseBitSet { top: vec![None], mid_shift: 0, leaves: 0, len: 0 }
    }
}

impl PartialEq for SparseBitSet {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len && self.iter().eq(other.iter())
    }
}

impl Eq for SparseBitSet {}

impl SparseBitSet {
    pub fn new() -> Self {
        Self::default()
    }

    fn mid_len(&self) -> usize {
        1 << self.mid_shift
    }

    fn split(&self, page: usize) -> (usize, usize) {
        (page >> self.mid_shift, page & (self.mid_len() - 1))
    }

    fn capacity_pages(&self) -> usize {
        self.top.len() * self.mid_len()
    }

    fn grow_for(&mut self, page: usize) {
        while page >= self.capacity_pages() {
            if self.mid_shift < MAX_MID_SHIFT {
                debug_assert_eq!(self.top.len(), 1);
                self.mid_shift += 1;
                let len = self.mid_len();
                if let Some(mid) = self.top[0].as_mut() {
                    mid.resize_with(len, || None);
                }
            } else {
                let len = self.top.len() * 2;
                self.top.resize_with(len, || None);
            }
        }
    }

    fn leaf(&self, page: usize) -> Option<&Leaf> {
        if page >= self.capacity_pages() {
            return None;
        }
        let (t, m) = self.split(page);
        self.top[t].as_ref()?[m].as_deref()
    }

    fn leaf_mut(&mut self, page: usize) -> Option<&mut Leaf> {
        if page >= self.capacity_pages() {
            return None;
        }
        let (t, m) = self.split(page);
        self.top[t].as_mut()?[m].as_deref_mut()
    }

    fn leaf_or_insert(&mut self, page: usize) -> &mut Leaf {
        self.grow_for(page);
        let (t, m) = self.split(page);
        let mid_len = self.mid_len();
        let mid = self.top[t].get_or_insert_with(|| vec![None; mid_len]);
        if mid[m].is_none() {
            self.leaves += 1;
        }
        mid[m].get_or_insert_with(|| Box::new([0; LEAF_WORDS]))
    }

    /// `(page number, leaf)` for every allocated leaf, ascending.
    fn pages(&self) -> impl Iterator<Item = (usize, &Leaf)> + '_ {
        let shift = self.mid_shift;
        self.top.iter().enumerate().flat_map(move |(t, mid)| {
            mid.iter().flat_map(move |mid| {
                mid.iter()
                    .enumerate()
                    .filter_map(move |(m, leaf)| leaf.as_deref().map(|l| ((t << shift) | m, l)))
            })
        })
    }

    fn pages_mut(&mut self) -> impl Iterator<Item = (usize, &mut Leaf)> + '_ {
        let shift = self.mid_shift;
        self.top.iter_mut().enumerate().flat_map(move |(t, mid)| {
            mid.iter_mut().flat_map(move |mid| {
                mid.iter_mut()
                    .enumerate()
                    .filter_map(move |(m, leaf)| leaf.as_deref_mut().map(|l| ((t << shift) | m, l)))
            })
        })
    }

    /// Number of allocated leaf pages.
    pub fn leaf_pages(&self) -> usize {
        self.leaves
    }

    /// Current directory fan-outs `(top, second level)`.
    pub fn directory_shape(&self) -> (usize, usize) {
        (self.top.len(), self.mid_len())
    }

    /// Storage in bits: every leaf page plus every allocated directory entry.
    pub fn allocated_bits(&self) -> usize {
        let mids = self.top.iter().filter(|m| m.is_some()).count();
        let entries = self.top.len() + mids * self.mid_len();
        self.leaves * LEAF_BITS as usize + entries * DIRECTORY_ENTRY_BITS
    }

    /// Storage under a single flat directory with one entry per page of the
    /// spanned range: `256 * leaves + 32 * pages`.
    pub fn allocated_bits_one_level(&self) -> usize {
        let pages = self.pages().map(|(p, _)| p + 1).max().unwrap_or(1);
        self.leaves * LEAF_BITS as usize + pages * DIRECTORY_ENTRY_BITS
    }

    /// Frees leaves whose bits are all clear and directories left empty.
    pub fn compact(&mut self) {
        let mut freed = 0;
        for mid in self.top.iter_mut() {
            if let Some(entries) = mid {
                for slot in entries.iter_mut() {
                    if slot.as_ref().is_some_and(|l| l.iter().all(|w| *w == 0)) {
                        *slot = None;
                        freed += 1;
                    }
                }
                if entries.iter().all(Option::is_none) {
                    *mid = None;
                }
            }
        }
        self.leaves -= freed;
    }
}

fn locate(index: u32) -> (usize, usize, u64) {
    let page = (index >> LEAF_SHIFT) as usize;
    let bit = index & (LEAF_BITS - 1);
    (page, (bit / 64) as usize, 1u64 << (bit % 64))
}

impl BitSetOps for SparseBitSet {
    fn set(&mut self, index: u32) -> bool {
        let (page, w, mask) = locate(index);
        let leaf = self.leaf_or_insert(page);
        let fresh = leaf[w] & mask == 0;
        leaf[w] |= mask;
        self.len += fresh as usize;
        fresh
    }

    fn clear(&mut self, index: u32) -> bool {
        let (page, w, mask) = locate(index);
        match self.leaf_mut(page) {
            Some(leaf) if leaf[w] & mask != 0 => {
                leaf[w] &= !mask;
                self.len -= 1;
                true
            }
            _ => false,
        }
    }

    fn contains(&self, index: u32) -> bool {
        let (page, w, mask) = locate(index);
        self.leaf(page).is_some_and(|l| l[w] & mask != 0)
    }

    fn cardinality(&self) -> usize {
        self.len
    }

    fn iter(&self) -> Box<dyn Iterator<Item = u32> + '_> {
        Box::new(self.pages().flat_map(|(page, leaf)| {
            let base = (page as u32) << LEAF_SHIFT;
            leaf.iter().enumerate().flat_map(move |(w, &word)| {
                let mut rest = word;
                std::iter::from_fn(move || {
                    if rest == 0 {
                        return None;
                    }
                    let bit = rest.trailing_zeros();
                    rest &= rest - 1;
                    Some(base + w as u32 * 64 + bit)
                })
            })
        }))
    }

    fn or_into(&mut self, other: &Self) -> bool {
        let mut added = 0usize;
        for (page, theirs) in other.pages() {
            if theirs.iter().all(|w| *w == 0) {
                continue;
            }
            let mine = self.leaf_or_insert(page);
            for (m, t) in mine.iter_mut().zip(theirs) {
                let new = *t & !*m;
                added += new.count_ones() as usize;
                *m |= new;
            }
        }
        self.len += added;
        added > 0
    }

    fn and_into(&mut self, other: &Self) -> bool {
        let mut removed = 0usize;
        let others: Vec<(usize, Leaf)> = other.pages().map(|(p, l)| (p, *l)).collect();
        let mut cursor = others.iter().peekable();
        for (page, mine) in self.pages_mut() {
            while cursor.peek().is_some_and(|(p, _)| *p < page) {
                cursor.next();
            }
            let theirs = match cursor.peek() {
                Some((p, l)) if *p == page => *l,
                _ => [0; LEAF_WORDS],
            };
            for (m, t) in mine.iter_mut().zip(theirs) {
                let keep = *m & t;
                removed += (*m ^ keep).count_ones() as usize;
                *m = keep;
            }
        }
        self.len -= removed;
        removed > 0
    }

    fn and_not(&mut self, other: &Self) -> bool {
        let mut removed = 0usize;
        for (page, theirs) in other.pages() {
            if let Some(mine) = self.leaf_mut(page) {
                for (m, t) in mine.iter_mut().zip(theirs) {
                    let gone = *m & *t;
                    removed += gone.count_ones() as usize;
                    *m &= !gone;
                }
            }
        }
        self.len -= removed;
        removed > 0
    }
}
