//! Set of grid cell ids with a size-adaptive representation.
//!
//! Small sets are sorted vectors; once a vector would outgrow a bitmap over
//! the whole id space the set switches to the bitmap. The representation is a
//! pure function of the contents, so derived equality is logical equality.

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    Sparse(Vec<u32>),
    Dense { bits: Vec<u64>, len: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellSet {
    /// Largest admissible id.
    max_id: u32,
    repr: Repr,
}

impl CellSet {
    pub fn new(max_id: u32) -> Self {
        Self {
            max_id,
            repr: Repr::Sparse(Vec::new()),
        }
    }

    /// Builds from ids in any order; duplicates are collapsed.
    pub fn from_ids(max_id: u32, ids: impl IntoIterator<Item = u32>) -> Self {
        let mut v: Vec<u32> = ids.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        debug_assert!(v.last().is_none_or(|&x| x <= max_id));
        let mut s = Self {
            max_id,
            repr: Repr::Sparse(v),
        };
        s.normalize();
        s
    }

    fn words(&self) -> usize {
        (self.max_id as usize + 1).div_ceil(64)
    }

    fn dense_threshold(&self) -> usize {
        // a sorted u32 vector costs 32 bits per id, the bitmap one bit per id
        (self.max_id as usize + 1) / 32
    }

    fn normalize(&mut self) {
        let threshold = self.dense_threshold();
        let words = self.words();
        match &mut self.repr {
            Repr::Sparse(v) if v.len() > threshold => {
                let mut bits = vec![0u64; words];
                for &id in v.iter() {
                    bits[id as usize / 64] |= 1 << (id % 64);
                }
                let len = v.len();
                self.repr = Repr::Dense { bits, len };
            }
            Repr::Dense { bits, len } if *len <= threshold => {
                let v = iter_bits(bits, 0, u32::MAX).collect();
                self.repr = Repr::Sparse(v);
            }
            _ => {}
        }
    }

    pub fn max_id(&self) -> u32 {
        self.max_id
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Sparse(v) => v.len(),
            Repr::Dense { len, .. } => *len,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, id: u32) -> bool {
        match &self.repr {
            Repr::Sparse(v) => v.binary_search(&id).is_ok(),
            Repr::Dense { bits, .. } => id <= self.max_id && bits[id as usize / 64] & (1 << (id % 64)) != 0,
        }
    }

    pub fn insert(&mut self, id: u32) -> bool {
        assert!(id <= self.max_id, "cell id {id} out of range");
        let added = match &mut self.repr {
            Repr::Sparse(v) => match v.binary_search(&id) {
                Ok(_) => false,
                Err(i) => {
                    v.insert(i, id);
                    true
                }
            },
            Repr::Dense { bits, len } => {
                let w = &mut bits[id as usize / 64];
                let mask = 1 << (id % 64);
                let fresh = *w & mask == 0;
                *w |= mask;
                *len += fresh as usize;
                fresh
            }
        };
        if added {
            self.normalize();
        }
        added
    }

    pub fn remove(&mut self, id: u32) -> bool {
        let removed = match &mut self.repr {
            Repr::Sparse(v) => match v.binary_search(&id) {
                Ok(i) => {
                    v.remove(i);
                    true
                }
                Err(_) => false,
            },
            Repr::Dense { bits, len } => {
                if id > self.max_id {
                    false
                } else {
                    let w = &mut bits[id as usize / 64];
                    let mask = 1 << (id % 64);
                    let present = *w & mask != 0;
                    *w &= !mask;
                    *len -= present as usize;
                    present
                }
            }
        };
        if removed {
            self.normalize();
        }
        removed
    }

    /// Adds every id of `other`; returns whether anything was new.
    pub fn union_with(&mut self, other: &CellSet) -> bool {
        debug_assert_eq!(self.max_id, other.max_id);
        let before = self.len();
        match (&mut self.repr, &other.repr) {
            (Repr::Dense { bits, len }, Repr::Dense { bits: ob, .. }) => {
                let mut n = 0;
                for (a, b) in bits.iter_mut().zip(ob) {
                    *a |= b;
                    n += a.count_ones() as usize;
                }
                *len = n;
            }
            (Repr::Dense { bits, len }, Repr::Sparse(ov)) => {
                for &id in ov {
                    let w = &mut bits[id as usize / 64];
                    let mask = 1 << (id % 64);
                    *len += (*w & mask == 0) as usize;
                    *w |= mask;
                }
            }
            (Repr::Sparse(v), Repr::Sparse(ov)) => {
                let mut merged = Vec::with_capacity(v.len() + ov.len());
                let (mut i, mut j) = (0, 0);
                while i < v.len() && j < ov.len() {
                    match v[i].cmp(&ov[j]) {
                        std::cmp::Ordering::Less => {
                            merged.push(v[i]);
                            i += 1;
                        }
                        std::cmp::Ordering::Greater => {
                            merged.push(ov[j]);
                            j += 1;
                        }
                        std::cmp::Ordering::Equal => {
                            merged.push(v[i]);
                            i += 1;
                            j += 1;
                        }
                    }
                }
                merged.extend_from_slice(&v[i..]);
                merged.extend_from_slice(&ov[j..]);
                *v = merged;
            }
            (Repr::Sparse(_), Repr::Dense { .. }) => {
                let mine = std::mem::replace(&mut self.repr, other.repr.clone());
                if let (Repr::Dense { bits, len }, Repr::Sparse(v)) = (&mut self.repr, mine) {
                    for id in v {
                        let w = &mut bits[id as usize / 64];
                        let mask = 1 << (id % 64);
                        *len += (*w & mask == 0) as usize;
                        *w |= mask;
                    }
                }
            }
        }
        self.normalize();
        self.len() != before
    }

    /// Ascending ids.
    pub fn iter(&self) -> CellIter<'_> {
        self.range(0, self.max_id)
    }

    /// Ascending ids within `lo..=hi`.
    pub fn range(&self, lo: u32, hi: u32) -> CellIter<'_> {
        match &self.repr {
            Repr::Sparse(v) => {
                let a = v.partition_point(|&x| x < lo);
                let b = v.partition_point(|&x| x <= hi);
                CellIter::Sparse(v[a..b.max(a)].iter())
            }
            Repr::Dense { bits, .. } => CellIter::Dense(iter_bits(bits, lo, hi.min(self.max_id))),
        }
    }

    pub fn to_vec(&self) -> Vec<u32> {
        self.iter().collect()
    }
}

pub enum CellIter<'a> {
    Sparse(std::slice::Iter<'a, u32>),
    Dense(BitIter<'a>),
}

impl Iterator for CellIter<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        match self {
            CellIter::Sparse(it) => it.next().copied(),
            CellIter::Dense(it) => it.next(),
        }
    }
}

pub struct BitIter<'a> {
    bits: &'a [u64],
    word: usize,
    current: u64,
    hi: u32,
}

fn iter_bits(bits: &[u64], lo: u32, hi: u32) -> BitIter<'_> {
    let word = lo as usize / 64;
    let current = if lo > hi || word >= bits.len() {
        0
    } else {
        bits[word] & (!0u64 << (lo % 64))
    };
    BitIter {
        bits,
        word,
        current,
        hi,
    }
}

impl Iterator for BitIter<'_> {
    type Item = u32;

    fn next(&mut self) -> Option<u32> {
        loop {
            if self.current != 0 {
                let id = (self.word * 64) as u32 + self.current.trailing_zeros();
                if id > self.hi {
                    self.current = 0;
                    self.word = self.bits.len();
                    return None;
                }
                self.current &= self.current - 1;
                return Some(id);
            }
            self.word += 1;
            if self.word >= self.bits.len() || (self.word * 64) as u64 > self.hi as u64 {
                return None;
            }
            self.current = self.bits[self.word];
        }
    }
}
