//! Small fixed-length bitset used for cut membership and column masks.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    pub fn new(len: usize) -> Self {
        Bits {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut b = Bits {
            len,
            words: vec![u64::MAX; len.div_ceil(64)],
        };
        let tail = len & 63;
        if tail != 0 {
            if let Some(last) = b.words.last_mut() {
                *last = (1u64 << tail) - 1;
            }
        }
        b
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i >> 6] >> (i & 63) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        debug_assert!(i < self.len);
        if v {
            self.words[i >> 6] |= 1 << (i & 63);
        } else {
            self.words[i >> 6] &= !(1 << (i & 63));
        }
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn any(&self) -> bool {
        self.words.iter().any(|&w| w != 0)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// self & other, both taken as-is or complemented per flag.
    pub fn and_into(&self, self_neg: bool, other: &Bits, other_neg: bool, out: &mut Bits) {
        debug_assert_eq!(self.len, other.len);
        let tail_bits = self.len & 63;
        let last = out.words.len().wrapping_sub(1);
        for (i, w) in out.words.iter_mut().enumerate() {
            let a = if self_neg { !self.words[i] } else { self.words[i] };
            let b = if other_neg { !other.words[i] } else { other.words[i] };
            let mut v = a & b;
            if i == last && tail_bits != 0 {
                v &= (1u64 << tail_bits) - 1;
            }
            *w = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_count() {
        let mut b = Bits::new(130);
        b.set(0, true);
        b.set(64, true);
        b.set(129, true);
        assert!(b.get(0) && b.get(64) && b.get(129));
        assert!(!b.get(1));
        assert_eq!(b.count_ones(), 3);
        b.set(64, false);
        assert_eq!(b.count_ones(), 2);
    }

    #[test]
    fn and_with_complement_masks_tail() {
        let mut a = Bits::new(70);
        let b = Bits::new(70);
        a.set(69, true);
        let mut out = Bits::new(70);
        // a & !b keeps bit 69; bits past len stay clear.
        a.and_into(false, &b, true, &mut out);
        assert!(out.get(69));
        assert_eq!(out.count_ones(), 1);
    }
}
