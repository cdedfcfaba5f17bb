//! Fixed-length bitmask over u64 words, used for filter survivor sets and
//! row selectors on inverted lists.

/// A bitmask of `len` bits. Bits past `len` in the last word are always zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bitmask {
    words: Vec<u64>,
    len: usize,
}

impl Bitmask {
    pub fn zeros(len: usize) -> Self {
        Bitmask {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut mask = Bitmask {
            words: vec![u64::MAX; len.div_ceil(64)],
            len,
        };
        mask.clear_tail();
        mask
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut mask = Bitmask::zeros(len);
        for i in 0..len {
            if f(i) {
                mask.set(i);
            }
        }
        mask
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    /// Number of set bits.
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn and_assign(&mut self, other: &Bitmask) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn or_assign(&mut self, other: &Bitmask) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn not_assign(&mut self) {
        for w in &mut self.words {
            *w = !*w;
        }
        self.clear_tail();
    }

    /// Indices of set bits, ascending.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + bit)
            })
        })
    }

    /// Maximal runs of consecutive set bits as `(start, len)`, ascending.
    /// Selective block reads coalesce on these.
    pub fn runs(&self) -> Vec<(usize, usize)> {
        let mut runs = Vec::new();
        let mut start = None;
        for i in 0..self.len {
            match (self.get(i), start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    runs.push((s, i - s));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            runs.push((s, self.len - s));
        }
        runs
    }

    fn clear_tail(&mut self) {
        let tail = self.len % 64;
        if tail != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops() {
        let mut m = Bitmask::zeros(70);
        assert_eq!(m.count_ones(), 0);
        m.set(0);
        m.set(63);
        m.set(64);
        m.set(69);
        assert_eq!(m.count_ones(), 4);
        assert!(m.get(63) && m.get(64) && !m.get(1));
        assert_eq!(m.iter_ones().collect::<Vec<_>>(), vec![0, 63, 64, 69]);
    }

    #[test]
    fn not_keeps_tail_clear() {
        let mut m = Bitmask::zeros(70);
        m.not_assign();
        assert_eq!(m.count_ones(), 70);
        assert_eq!(m, Bitmask::ones(70));
        m.not_assign();
        assert_eq!(m.count_ones(), 0);
    }

    #[test]
    fn runs_coalesce() {
        let m = Bitmask::from_fn(10, |i| matches!(i, 0 | 1 | 2 | 5 | 8 | 9));
        assert_eq!(m.runs(), vec![(0, 3), (5, 1), (8, 2)]);
        assert_eq!(Bitmask::zeros(4).runs(), vec![]);
        assert_eq!(Bitmask::ones(4).runs(), vec![(0, 4)]);
    }
}
