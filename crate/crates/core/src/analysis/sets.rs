//! Enumeration of caching sets: every subset of at most `i` objects out of
//! `K`, indexed first by size `l` and then by lexicographic rank among the
//! `C(K, l)` subsets of that size.
//!
//! Index 0 is the empty set; for `K = 3, i = 2` the order is
//! `{}, {0}, {1}, {2}, {0,1}, {0,2}, {1,2}`.

use crate::model::ObjectId;

/// `C(n, k)`, saturating at `u64::MAX`.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Lexicographic rank of a sorted `l`-subset of `{0..n}`.
pub fn rank(n: u64, subset: &[u64]) -> u64 {
    let l = subset.len() as u64;
    let mut r = 0;
    let mut prev = 0;
    for (pos, &x) in subset.iter().enumerate() {
        let remaining = l - pos as u64 - 1;
        for skipped in prev..x {
            r += binomial(n - skipped - 1, remaining);
        }
        prev = x + 1;
    }
    r
}

/// Inverse of [`rank`].
pub fn unrank(n: u64, l: u64, mut r: u64) -> Vec<u64> {
    let mut out = Vec::with_capacity(l as usize);
    let mut x = 0;
    for pos in 0..l {
        let remaining = l - pos - 1;
        loop {
            let c = binomial(n - x - 1, remaining);
            if r < c {
                break;
            }
            r -= c;
            x += 1;
        }
        out.push(x);
        x += 1;
    }
    out
}

/// All caching sets of size `0..=max_size` over `objects` objects.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CachingSets {
    objects: u64,
    max_size: u64,
    /// `offsets[l]` is the index of the first set of size `l`.
    offsets: Vec<u64>,
}

impl CachingSets {
    pub fn new(objects: usize, max_size: usize) -> Self {
        let max_size = max_size.min(objects) as u64;
        let mut offsets = Vec::with_capacity(max_size as usize + 2);
        let mut acc = 0u64;
        for l in 0..=max_size {
            offsets.push(acc);
            acc = acc.saturating_add(binomial(objects as u64, l));
        }
        offsets.push(acc);
        Self { objects: objects as u64, max_size, offsets }
    }

    /// Number of sets, saturating.
    pub fn count(&self) -> u64 {
        *self.offsets.last().expect("nonempty")
    }

    pub fn max_size(&self) -> usize {
        self.max_size as usize
    }

    /// Index of the `i`-th (0-based) subset of size `l`.
    pub fn index(&self, l: usize, i: u64) -> u64 {
        self.offsets[l] + i
    }

    pub fn index_of(&self, set: &[ObjectId]) -> u64 {
        let mut v: Vec<u64> = set.iter().map(|k| k.0 as u64).collect();
        v.sort_unstable();
        self.index(v.len(), rank(self.objects, &v))
    }

    /// Size and rank of the set at `index`.
    pub fn locate(&self, index: u64) -> (usize, u64) {
        let l = self.offsets.partition_point(|&o| o <= index) - 1;
        (l, index - self.offsets[l])
    }

    pub fn set(&self, index: u64) -> Vec<ObjectId> {
        let (l, r) = self.locate(index);
        unrank(self.objects, l as u64, r).into_iter().map(|x| ObjectId(x as u32)).collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = Vec<ObjectId>> + '_ {
        (0..self.count()).map(|i| self.set(i))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(52, 5), 2_598_960);
        assert_eq!(binomial(5000, 2500), u64::MAX);
    }

    #[test]
    fn documented_order() {
        let s = CachingSets::new(3, 2);
        let all: Vec<Vec<u32>> = s.iter().map(|v| v.into_iter().map(|k| k.0).collect()).collect();
        assert_eq!(all, vec![vec![], vec![0], vec![1], vec![2], vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn rank_unrank_round_trip() {
        for n in 1..9u64 {
            for l in 0..=n {
                let mut prev: Option<Vec<u64>> = None;
                for r in 0..binomial(n, l) {
                    let v = unrank(n, l, r);
                    assert_eq!(rank(n, &v), r);
                    assert!(v.windows(2).all(|w| w[0] < w[1]));
                    if let Some(p) = prev {
                        assert!(p < v, "lexicographic order");
                    }
                    prev = Some(v);
                }
            }
        }
    }

    #[test]
    fn index_bijection() {
        let s = CachingSets::new(7, 3);
        assert_eq!(s.count(), 1 + 7 + 21 + 35);
        for i in 0..s.count() {
            assert_eq!(s.index_of(&s.set(i)), i);
        }
    }
}
