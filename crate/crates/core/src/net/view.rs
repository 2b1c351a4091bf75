use super::Network;

/// Read-only access to a (possibly transformed) network.
///
/// Undirected views report every neighbour through `for_each_out` and
/// `for_each_in` alike, and `value` is order-insensitive.
pub trait NetView {
    fn n(&self) -> usize;
    fn directed(&self) -> bool;
    fn bipartite(&self) -> Option<usize>;
    fn value(&self, t: usize, h: usize) -> f64;
    fn for_each_out(&self, v: usize, f: &mut dyn FnMut(usize, f64));
    fn for_each_in(&self, v: usize, f: &mut dyn FnMut(usize, f64));

    fn out_degree(&self, v: usize) -> usize {
        let mut k = 0;
        self.for_each_out(v, &mut |_, _| k += 1);
        k
    }

    fn in_degree(&self, v: usize) -> usize {
        let mut k = 0;
        self.for_each_in(v, &mut |_, _| k += 1);
        k
    }

    /// Nonzero dyads, each once, tails ascending.
    fn for_each_edge(&self, f: &mut dyn FnMut(usize, usize, f64)) {
        let directed = self.directed();
        for t in 0..self.n() {
            self.for_each_out(t, &mut |h, v| {
                if directed || h > t {
                    f(t, h, v)
                }
            });
        }
    }
}

impl NetView for Network {
    fn n(&self) -> usize {
        Network::n(self)
    }

    fn directed(&self) -> bool {
        Network::directed(self)
    }

    fn bipartite(&self) -> Option<usize> {
        Network::bipartite(self)
    }

    fn value(&self, t: usize, h: usize) -> f64 {
        Network::value(self, t, h)
    }

    fn for_each_out(&self, v: usize, f: &mut dyn FnMut(usize, f64)) {
        for (&h, &x) in self.out_neighbors(v) {
            f(h, x);
        }
    }

    fn for_each_in(&self, v: usize, f: &mut dyn FnMut(usize, f64)) {
        for (&t, &x) in self.in_neighbors(v) {
            f(t, x);
        }
    }

    fn out_degree(&self, v: usize) -> usize {
        self.out_neighbors(v).len()
    }

    fn in_degree(&self, v: usize) -> usize {
        self.in_neighbors(v).len()
    }
}

/// A view that differs from `base` in exactly one dyad.
pub struct Overlay<'a> {
    pub base: &'a dyn NetView,
    pub tail: usize,
    pub head: usize,
    pub value: f64,
}

impl<'a> Overlay<'a> {
    pub fn new(base: &'a dyn NetView, tail: usize, head: usize, value: f64) -> Self {
        Overlay {
            base,
            tail,
            head,
            value,
        }
    }

    fn hits(&self, t: usize, h: usize) -> bool {
        (t == self.tail && h == self.head)
            || (!self.base.directed() && t == self.head && h == self.tail)
    }
}

impl NetView for Overlay<'_> {
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
        if self.hits(t, h) {
            self.value
        } else {
            self.base.value(t, h)
        }
    }

    fn for_each_out(&self, v: usize, f: &mut dyn FnMut(usize, f64)) {
        let other = if v == self.tail {
            Some(self.head)
        } else if !self.base.directed() && v == self.head {
            Some(self.tail)
        } else {
            None
        };
        match other {
            None => self.base.for_each_out(v, f),
            Some(o) => {
                self.base.for_each_out(v, &mut |h, x| {
                    if h != o {
                        f(h, x)
                    }
                });
                if self.value != 0.0 {
                    f(o, self.value);
                }
            }
        }
    }

    fn for_each_in(&self, v: usize, f: &mut dyn FnMut(usize, f64)) {
        if !self.base.directed() {
            return self.for_each_out(v, f);
        }
        if v == self.head {
            let o = self.tail;
            self.base.for_each_in(v, &mut |t, x| {
                if t != o {
                    f(t, x)
                }
            });
            if self.value != 0.0 {
                f(o, self.value);
            }
        } else {
            self.base.for_each_in(v, f)
        }
    }

    fn out_degree(&self, v: usize) -> usize {
        let base = self.base.out_degree(v);
        let touches = v == self.tail || (!self.base.directed() && v == self.head);
        if !touches {
            return base;
        }
        let (t, h) = (self.tail, self.head);
        let was = self.base.value(t, h) != 0.0;
        let now = self.value != 0.0;
        base + usize::from(now) - usize::from(was)
    }

    fn in_degree(&self, v: usize) -> usize {
        if !self.base.directed() {
            return self.out_degree(v);
        }
        let base = self.base.in_degree(v);
        if v != self.head {
            return base;
        }
        let was = self.base.value(self.tail, self.head) != 0.0;
        let now = self.value != 0.0;
        base + usize::from(now) - usize::from(was)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collect_out(v: &dyn NetView, i: usize) -> Vec<usize> {
        let mut out = Vec::new();
        v.for_each_out(i, &mut |h, _| out.push(h));
        out.sort();
        out
    }

    #[test]
    fn overlay_adds_and_removes() {
        let mut net = Network::new(4, false, None).unwrap();
        net.set_value(0, 1, 1.0);
        net.set_value(1, 2, 1.0);
        let add = Overlay::new(&net, 2, 0, 1.0);
        assert_eq!(collect_out(&add, 0), vec![1, 2]);
        assert_eq!(add.out_degree(2), 2);
        assert_eq!(add.value(0, 2), 1.0);
        let del = Overlay::new(&net, 1, 0, 0.0);
        assert_eq!(collect_out(&del, 1), vec![2]);
        assert_eq!(del.out_degree(0), 0);
    }

    #[test]
    fn overlay_directed_in() {
        let mut net = Network::new(3, true, None).unwrap();
        net.set_value(0, 2, 1.0);
        let ov = Overlay::new(&net, 1, 2, 1.0);
        let mut ins = Vec::new();
        ov.for_each_in(2, &mut |t, _| ins.push(t));
        ins.sort();
        assert_eq!(ins, vec![0, 1]);
        assert_eq!(ov.in_degree(2), 2);
        assert_eq!(ov.out_degree(2), 0);
    }
}
