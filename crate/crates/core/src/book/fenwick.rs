/// Binary indexed tree over non-negative counts with order-statistic lookup.
#[derive(Debug, Clone)]
pub(crate) struct Fenwick {
    tree: Vec<i64>,
    // largest power of two <= len, for the descent in `find`
    top: usize,
}

impl Fenwick {
    pub(crate) fn new(len: usize) -> Self {
        let top = if len == 0 { 0 } else { 1 << (usize::BITS - 1 - len.leading_zeros()) };
        Fenwick {
            tree: vec![0; len + 1],
            top,
        }
    }

    pub(crate) fn from_counts(counts: &[u32]) -> Self {
        let mut f = Fenwick::new(counts.len());
        for (i, &c) in counts.iter().enumerate() {
            f.tree[i + 1] += c as i64;
            let parent = (i + 1) + ((i + 1) & (i + 1).wrapping_neg());
            if parent < f.tree.len() {
                f.tree[parent] += f.tree[i + 1];
            }
        }
        f
    }

    pub(crate) fn add(&mut self, idx: usize, delta: i64) {
        let mut i = idx + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum of counts in `[0, idx]`.
    #[cfg(test)]
    pub(crate) fn prefix(&self, idx: usize) -> i64 {
        let mut i = idx + 1;
        let mut acc = 0;
        while i > 0 {
            acc += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        acc
    }

    /// Smallest slot whose prefix sum reaches `k` (`k >= 1`).
    pub(crate) fn find(&self, mut k: i64) -> usize {
        let mut pos = 0;
        let mut step = self.top;
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] < k {
                pos = next;
                k -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}
