use super::BitSetOps;

const WORD_BITS: u32 = 64;

/// A flat bit set over `[0, capacity)`, grown a word at a time.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RegularBitSet {
    words: Vec<u64>,
    len: usize,
}

impl RegularBitSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Pre-allocates room for indices below `bits`.
    pub fn with_capacity(bits: usize) -> Self {
        RegularBitSet { words: vec![0; bits.div_ceil(WORD_BITS as usize)], len: 0 }
    }

    /// Storage in bits: whole words up to the highest index ever covered.
    pub fn allocated_bits(&self) -> usize {
        self.words.len() * WORD_BITS as usize
    }

    fn locate(index: u32) -> (usize, u64) {
        ((index / WORD_BITS) as usize, 1u64 << (index % WORD_BITS))
    }
}

impl BitSetOps for RegularBitSet {
    fn set(&mut self, index: u32) -> bool {
        let (w, mask) = Self::locate(index);
        if w >= self.words.len() {
            self.words.resize(w + 1, 0);
        }
        let fresh = self.words[w] & mask == 0;
        self.words[w] |= mask;
        self.len += fresh as usize;
        fresh
    }

    fn clear(&mut self, index: u32) -> bool {
        let (w, mask) = Self::locate(index);
        match self.words.get_mut(w) {
            Some(word) if *word & mask != 0 => {
                *word &= !mask;
                self.len -= 1;
                true
            }
            _ => false,
        }
    }

    fn contains(&self, index: u32) -> bool {
        let (w, mask) = Self::locate(index);
        self.words.get(w).is_some_and(|word| word & mask != 0)
    }

    fn cardinality(&self) -> usize {
        self.len
    }

    fn iter(&self) -> Box<dyn Iterator<Item = u32> + '_> {
        Box::new(self.words.iter().enumerate().flat_map(|(w, &word)| {
            let base = w as u32 * WORD_BITS;
            let mut rest = word;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros();
                rest &= rest - 1;
                Some(base + bit)
            })
        }))
    }

    fn or_into(&mut self, other: &Self) -> bool {
        if other.words.len() > self.words.len() {
            self.words.resize(other.words.len(), 0);
        }
        let mut added = 0usize;
        for (mine, theirs) in self.words.iter_mut().zip(&other.words) {
            let new = *theirs & !*mine;
            added += new.count_ones() as usize;
            *mine |= new;
        }
        self.len += added;
        added > 0
    }

    fn and_into(&mut self, other: &Self) -> bool {
        let mut removed = 0usize;
        for (i, mine) in self.words.iter_mut().enumerate() {
            let keep = *mine & other.words.get(i).copied().unwrap_or(0);
            removed += (*mine ^ keep).count_ones() as usize;
            *mine = keep;
        }
        self.len -= removed;
        removed > 0
    }

    fn and_not(&mut self, other: &Self) -> bool {
        let mut removed = 0usize;
        for (mine, theirs) in self.words.iter_mut().zip(&other.words) {
            let gone = *mine & *theirs;
            removed += gone.count_ones() as usize;
            *mine &= !gone;
        }
        self.len -= removed;
        removed > 0
    }
}
