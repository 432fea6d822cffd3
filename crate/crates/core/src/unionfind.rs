//! Minimal union-find with path halving, used for orbit partitions.

use crate::space::Partition;

pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra != rb {
            // Smaller root wins, keeping labels stable.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    /// Blocks numbered by first occurrence, ascending in the ground set.
    pub fn into_partition(mut self) -> Partition {
        let n = self.parent.len();
        let mut ids = vec![usize::MAX; n];
        let mut next = 0;
        let mut block_of = Vec::with_capacity(n);
        for x in 0..n {
            let root = self.find(x);
            if ids[root] == usize::MAX {
                ids[root] = next;
                next += 1;
            }
            block_of.push(ids[root]);
        }
        Partition::from_block_ids(block_of).expect("union-find produces contiguous ids")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_are_numbered_by_first_occurrence() {
        let mut uf = UnionFind::new(5);
        uf.union(3, 4);
        uf.union(0, 2);
        let p = uf.into_partition();
        assert_eq!(p.block_ids(), &[0, 1, 0, 2, 2]);
    }
}
