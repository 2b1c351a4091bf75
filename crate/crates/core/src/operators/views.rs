//! Read-only transformed views over a base network.

use crate::net::{NetView, SymmetrizeRule};

/// Keeps only dyads whose precomputed mask entry is set.
pub(super) struct FilterView<'a> {
    pub base: &'a dyn NetView,
    pub keep: &'a [bool],
}

impl FilterView<'_> {
    fn kept(&self, t: usize, h: usize) -> bool {
        self.keep[t * self.base.n() + h]
    }
}

impl NetView for FilterView<'_> {
    fn n(&self) -> usize {
        self.base.n()
    }

    fn directed(&self) -> bool {
        self.base.directed()
    }

    fn bipartite(&self) -> Option<usize> {
        self.base.bipartite()
    }

    fn value(&self, t: usize, h: usize) -> f64 {
        if self.kept(t, h) {
            self.base.value(t, h)
        } else {
            0.0
        }
    }

    fn for_each_out(&self, v: usize, f: &mut dyn FnMut(usize, f64)) {
        self.base.for_each_out(v, &mut |x, y| {
            if self.kept(v, x) {
                f(x, y)
            }
        });
    }

    fn for_each_in(&self, v: usize, f: &mut dyn FnMut(usize, f64)) {
        self.base.for_each_in(v, &mut |x, y| {
            if self.kept(x, v) {
                f(x, y)
            }
        });
    }
}

/// Undirected view of a directed base.
pub(super) struct SymView<'a> {
    pub base: &'a dyn NetView,
    pub rule: SymmetrizeRule,
}

impl SymView<'_> {
    pub fn pair(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (i.min(j), i.max(j));
        self.rule
            .apply(self.base.value(a, b), self.base.value(b, a))
    }
}

impl NetView for SymView<'_> {
    fn n(&self) -> usize {
        self.base.n()
    }

    fn directed(&self) -> bool {
        false
    }

    fn bipartite(&self) -> Option<usize> {
        None
    }

    fn value(&self, t: usize, h: usize) -> f64 {
        if t == h {
            0.0
        } else {
            self.pair(t, h)
        }
    }

    fn for_each_out(&self, v: usize, f: &mut dyn FnMut(usize, f64)) {
        let mut nb = Vec::new();
        self.base.for_each_out(v, &mut |x, _| nb.push(x));
        self.base.for_each_in(v, &mut |x, _| nb.push(x));
        nb.sort_unstable();
        nb.dedup();
        for x in nb {
            let y = self.pair(v, x);
            if y != 0.0 {
                f(x, y);
            }
        }
    }

    fn for_each_in(&self, v: usize, f: &mut dyn FnMut(usize, f64)) {
        self.for_each_out(v, f)
    }
}

/// Vertex-subset view, relabelled densely. With `bipartite = Some(b)` the
/// first `b` sub-vertices are tails and the rest heads, and the view is
/// undirected.
pub(super) struct SubView<'a> {
    pub base: &'a dyn NetView,
    pub idx: &'a [usize],
    pub inv: &'a [Option<usize>],
    pub bipartite: Option<usize>,
}

impl NetView for SubView<'_> {
    fn n(&self) -> usize {
        self.idx.len()
    }

    fn directed(&self) -> bool {
        self.bipartite.is_none() && self.base.directed()
    }

    fn bipartite(&self) -> Option<usize> {
        self.bipartite
    }

    fn value(&self, t: usize, h: usize) -> f64 {
        match self.bipartite {
            None => self.base.value(self.idx[t], self.idx[h]),
            Some(b) => {
                let (p, q) = (t.min(h), t.max(h));
                if p < b && q >= b {
                    self.base.value(self.idx[p], self.idx[q])
                } else {
                    0.0
                }
            }
        }
    }

    fn for_each_out(&self, v: usize, f: &mut dyn FnMut(usize, f64)) {
        let Some(b) = self.bipartite else {
            self.base.for_each_out(self.idx[v], &mut |x, y| {
                if let Some(s) = self.inv[x] {
                    f(s, y)
                }
            });
            return;
        };
        if v < b {
            self.base.for_each_out(self.idx[v], &mut |x, y| {
                if let Some(s) = self.inv[x].filter(|&s| s >= b) {
                    f(s, y)
                }
            });
        } else {
            self.base.for_each_in(self.idx[v], &mut |x, y| {
                if let Some(s) = self.inv[x].filter(|&s| s < b) {
                    f(s, y)
                }
            });
        }
    }

    fn for_each_in(&self, v: usize, f: &mut dyn FnMut(usize, f64)) {
        if self.bipartite.is_some() {
            return self.for_each_out(v, f);
        }
        self.base.for_each_in(self.idx[v], &mut |x, y| {
            if let Some(s) = self.inv[x] {
                f(s, y)
            }
        });
    }
}

/// 0/1 view keeping dyads accepted by a per-dyad predicate that is false
/// at value 0.
pub(super) struct BinView<'a> {
    pub base: &'a dyn NetView,
    pub pred: &'a (dyn Fn(usize, usize, f64) -> bool + Sync),
}

impl NetView for BinView<'_> {
    fn n(&self) -> usize {
        self.base.n()
    }

    fn directed(&self) -> bool {
        self.base.directed()
    }

    fn bipartite(&self) -> Option<usize> {
        self.base.bipartite()
    }

    fn value(&self, t: usize, h: usize) -> f64 {
        let y = self.base.value(t, h);
        f64::from(u8::from(y != 0.0 && (self.pred)(t, h, y)))
    }

    fn for_each_out(&self, v: usize, f: &mut dyn FnMut(usize, f64)) {
        self.base.for_each_out(v, &mut |x, y| {
            if (self.pred)(v, x, y) {
                f(x, 1.0)
            }
        });
    }

    fn for_each_in(&self, v: usize, f: &mut dyn FnMut(usize, f64)) {
        self.base.for_each_in(v, &mut |x, y| {
            if (self.pred)(x, v, y) {
                f(x, 1.0)
            }
        });
    }
}
