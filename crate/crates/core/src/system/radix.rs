use alloc::vec::Vec;

/// Mixed-radix numbering of tuples. Component 0 is the most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Radix {
    sizes: Vec<usize>,
    strides: Vec<usize>,
    total: usize,
}

impl Radix {
    /// `None` if the product overflows `limit`.
    pub fn new(sizes: Vec<usize>, limit: usize) -> Option<Radix> {
        let mut strides = alloc::vec![0; sizes.len()];
        let mut total = 1usize;
        for k in (0..sizes.len()).rev() {
            strides[k] = total;
            total = total.checked_mul(sizes[k])?;
            if total > limit {
                return None;
            }
        }
        Some(Radix { sizes, strides, total })
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn encode(&self, digits: &[usize]) -> usize {
        debug_assert_eq!(digits.len(), self.sizes.len());
        digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum()
    }

    pub fn decode(&self, index: usize) -> Vec<usize> {
        (0..self.sizes.len()).map(|k| self.digit(index, k)).collect()
    }

    pub fn digit(&self, index: usize, k: usize) -> usize {
        (index / self.strides[k]) % self.sizes[k]
    }

    /// Index of the sub-tuple picked by `positions`, numbered in the radix
    /// formed by those components alone.
    pub fn sub_index(&self, index: usize, positions: &[usize]) -> usize {
        positions.iter().fold(0, |acc, &k| acc * self.sizes[k] + self.digit(index, k))
    }

    pub fn sub_total(&self, positions: &[usize]) -> usize {
        positions.iter().map(|&k| self.sizes[k]).product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_decode_inverse() {
        let r = Radix::new(alloc::vec![2, 3, 2], 100).unwrap();
        assert_eq!(r.total(), 12);
        for i in 0..12 {
            assert_eq!(r.encode(&r.decode(i)), i);
        }
        assert_eq!(r.decode(7), [1, 0, 1]);
        assert_eq!(r.sub_index(7, &[0, 2]), 3);
        assert_eq!(r.sub_total(&[1]), 3);
    }

    #[test]
    fn overflow_is_reported() {
        assert!(Radix::new(alloc::vec![usize::MAX, 2], usize::MAX).is_none());
        assert!(Radix::new(alloc::vec![10, 10], 50).is_none());
        assert_eq!(Radix::new(alloc::vec![], 1).unwrap().total(), 1);
    }
}
