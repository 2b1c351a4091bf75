//! Sorted integer sets stored as maximal runs, with rank/select for uniform
//! index sampling.

/// A set of `usize` values as disjoint, non-adjacent, increasing runs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunSet {
    starts: Vec<usize>,
    lens: Vec<usize>,
    /// `before[i]` counts the members in runs `0..i`.
    before: Vec<usize>,
    total: usize,
}

struct Builder {
    starts: Vec<usize>,
    lens: Vec<usize>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            starts: Vec::new(),
            lens: Vec::new(),
        }
    }

    /// Append `[start, start + len)`; runs must arrive in increasing order.
    fn push(&mut self, start: usize, len: usize) {
        if len == 0 {
            return;
        }
        if let (Some(&s), Some(l)) = (self.starts.last(), self.lens.last_mut()) {
            debug_assert!(start >= s + *l);
            if s + *l == start {
                *l += len;
                return;
            }
        }
        self.starts.push(start);
        self.lens.push(len);
    }

    fn finish(self) -> RunSet {
        let mut before = Vec::with_capacity(self.lens.len());
        let mut total = 0;
        for &l in &self.lens {
            before.push(total);
            total += l;
        }
        RunSet {
            starts: self.starts,
            lens: self.lens,
            before,
            total,
        }
    }
}

impl RunSet {
    pub fn empty() -> Self {
        RunSet::default()
    }

    /// `0..len`.
    pub fn full(len: usize) -> Self {
        let mut b = Builder::new();
        b.push(0, len);
        b.finish()
    }

    /// Members are the positions of `true` entries.
    pub fn from_mask(mask: &[bool]) -> Self {
        let mut b = Builder::new();
        let mut i = 0;
        while i < mask.len() {
            if mask[i] {
                let s = i;
                while i < mask.len() && mask[i] {
                    i += 1;
                }
                b.push(s, i - s);
            } else {
                i += 1;
            }
        }
        b.finish()
    }

    /// From values in any order; duplicates are ignored.
    pub fn from_values(values: impl IntoIterator<Item = usize>) -> Self {
        let mut v: Vec<usize> = values.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        let mut b = Builder::new();
        for x in v {
            b.push(x, 1);
        }
        b.finish()
    }

    /// From `(start, len)` pairs in increasing, non-overlapping order.
    pub fn from_runs(runs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut b = Builder::new();
        for (s, l) in runs {
            b.push(s, l);
        }
        b.finish()
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn n_runs(&self) -> usize {
        self.starts.len()
    }

    pub fn runs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.starts.iter().copied().zip(self.lens.iter().copied())
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.runs().flat_map(|(s, l)| s..s + l)
    }

    pub fn contains(&self, x: usize) -> bool {
        match self.starts.partition_point(|&s| s <= x) {
            0 => false,
            k => x < self.starts[k - 1] + self.lens[k - 1],
        }
    }

    /// The `k`-th smallest member.
    pub fn nth(&self, k: usize) -> Option<usize> {
        if k >= self.total {
            return None;
        }
        let r = self.before.partition_point(|&b| b <= k) - 1;
        Some(self.starts[r] + (k - self.before[r]))
    }

    /// Number of members below `x`.
    pub fn rank(&self, x: usize) -> usize {
        match self.starts.partition_point(|&s| s <= x) {
            0 => 0,
            k => self.before[k - 1] + (x - self.starts[k - 1]).min(self.lens[k - 1]),
        }
    }

    pub fn intersect(&self, other: &RunSet) -> RunSet {
        let mut b = Builder::new();
        let (mut i, mut j) = (0, 0);
        while i < self.starts.len() && j < other.starts.len() {
            let (s1, e1) = (self.starts[i], self.starts[i] + self.lens[i]);
            let (s2, e2) = (other.starts[j], other.starts[j] + other.lens[j]);
            let (s, e) = (s1.max(s2), e1.min(e2));
            if s < e {
                b.push(s, e - s);
            }
            if e1 <= e2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        b.finish()
    }

    pub fn union(&self, other: &RunSet) -> RunSet {
        let mut all: Vec<(usize, usize)> = self.runs().chain(other.runs()).collect();
        all.sort_unstable();
        let mut b = Builder::new();
        let mut cur: Option<(usize, usize)> = None;
        for (s, l) in all {
            let e = s + l;
            cur = match cur {
                Some((cs, ce)) if s <= ce => Some((cs, ce.max(e))),
                Some((cs, ce)) => {
                    b.push(cs, ce - cs);
                    Some((s, e))
                }
                None => Some((s, e)),
            };
        }
        if let Some((cs, ce)) = cur {
            b.push(cs, ce - cs);
        }
        b.finish()
    }

    /// Members of `0..len` not in the set.
    pub fn complement(&self, len: usize) -> RunSet {
        let mut b = Builder::new();
        let mut at = 0;
        for (s, l) in self.runs() {
            if s >= len {
                break;
            }
            b.push(at, s - at);
            at = s + l;
        }
        if at < len {
            b.push(at, len - at);
        }
        b.finish()
    }

    pub fn difference(&self, other: &RunSet) -> RunSet {
        let end = self
            .starts
            .last()
            .map_or(0, |s| s + self.lens[self.lens.len() - 1]);
        self.intersect(&other.complement(end))
    }
}
