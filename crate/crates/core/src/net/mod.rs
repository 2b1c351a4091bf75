//! Network storage, read-only views and the structural transforms used by
//! term operators.
//!
//! Vertices are 0-based inside the library. The JSON format and the CLI use
//! 1-based indices and convert at the boundary.

mod io;
mod transform;
mod view;

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{ErgmError, Result};

pub use io::{network_from_json, network_to_json, read_network, write_network};
pub use transform::{binarize, induced_subgraph, symmetrize_net, SymmetrizeRule};
pub use view::{NetView, Overlay};

/// An ordered vertex pair. For undirected networks the canonical form has `tail < head`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dyad {
    pub tail: usize,
    pub head: usize,
}

impl Dyad {
    pub fn new(tail: usize, head: usize) -> Self {
        Dyad { tail, head }
    }
}

/// A single-valued proposal: set `dyad` to `value`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DyadChange {
    pub dyad: Dyad,
    pub value: f64,
}

/// One vertex attribute column.
#[derive(Clone, Debug, PartialEq)]
pub enum AttrColumn {
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
    Boolean(Vec<bool>),
}

impl AttrColumn {
    pub fn len(&self) -> usize {
        match self {
            AttrColumn::Numeric(v) => v.len(),
            AttrColumn::Categorical(v) => v.len(),
            AttrColumn::Boolean(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AttrColumn::Numeric(_) => "numeric",
            AttrColumn::Categorical(_) => "categorical",
            AttrColumn::Boolean(_) => "boolean",
        }
    }

    /// Restrict to the given vertices, in order.
    pub fn select(&self, idx: &[usize]) -> AttrColumn {
        match self {
            AttrColumn::Numeric(v) => AttrColumn::Numeric(idx.iter().map(|&i| v[i]).collect()),
            AttrColumn::Categorical(v) => {
                AttrColumn::Categorical(idx.iter().map(|&i| v[i].clone()).collect())
            }
            AttrColumn::Boolean(v) => AttrColumn::Boolean(idx.iter().map(|&i| v[i]).collect()),
        }
    }
}

/// Constraint formulas stored alongside a network, as the JSON `meta` block.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NetMeta {
    pub constraints: Option<String>,
    pub obs_constraints: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Network {
    n: usize,
    directed: bool,
    bipartite: Option<usize>,
    // Directed: out_adj[t][h] and in_adj[h][t]. Undirected: out_adj holds both
    // directions and in_adj is unused.
    out_adj: Vec<BTreeMap<usize, f64>>,
    in_adj: Vec<BTreeMap<usize, f64>>,
    n_edges: usize,
    missing: BTreeSet<Dyad>,
    attrs: BTreeMap<String, AttrColumn>,
    pub meta: NetMeta,
}

impl Network {
    pub fn new(n: usize, directed: bool, bipartite: Option<usize>) -> Result<Self> {
        if let Some(b) = bipartite {
            if directed {
                return Err(ErgmError::Network(
                    "bipartite networks must be undirected".into(),
                ));
            }
            if b == 0 || b >= n {
                return Err(ErgmError::Network(format!(
                    "bipartite first-mode size {b} must lie strictly between 0 and n={n}"
                )));
            }
        }
        Ok(Network {
            n,
            directed,
            bipartite,
            out_adj: vec![BTreeMap::new(); n],
            in_adj: if directed {
                vec![BTreeMap::new(); n]
            } else {
                Vec::new()
            },
            n_edges: 0,
            missing: BTreeSet::new(),
            attrs: BTreeMap::new(),
            meta: NetMeta::default(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn bipartite(&self) -> Option<usize> {
        self.bipartite
    }

    /// Validate a vertex pair and return its canonical form.
    pub fn canonical(&self, i: usize, j: usize) -> Result<Dyad> {
        canonical_dyad(self.n, self.directed, self.bipartite, i, j)
    }

    /// Stored value of the pair, 0 if absent. Order-insensitive on undirected networks.
    pub fn value(&self, t: usize, h: usize) -> f64 {
        self.out_adj
            .get(t)
            .and_then(|m| m.get(&h))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn is_missing(&self, d: Dyad) -> bool {
        self.missing.contains(&d)
    }

    pub fn missing(&self) -> &BTreeSet<Dyad> {
        &self.missing
    }

    pub fn set_missing(&mut self, d: Dyad, missing: bool) -> Result<()> {
        let d = self.canonical(d.tail, d.head)?;
        if missing {
            self.set_value(d.tail, d.head, 0.0);
            self.missing.insert(d);
        } else {
            self.missing.remove(&d);
        }
        Ok(())
    }

    pub fn clear_missing(&mut self) {
        self.missing.clear();
    }

    /// Validated update; returns the previous value.
    pub fn set_dyad(&mut self, change: DyadChange) -> Result<f64> {
        let d = self.canonical(change.dyad.tail, change.dyad.head)?;
        if !change.value.is_finite() {
            return Err(ErgmError::Network(format!(
                "non-finite value {} for dyad ({}, {})",
                change.value,
                d.tail + 1,
                d.head + 1
            )));
        }
        Ok(self.set_value(d.tail, d.head, change.value))
    }

    /// Unchecked update used on hot paths; the pair must already be valid.
    /// Returns the previous value.
    pub fn set_value(&mut self, t: usize, h: usize, v: f64) -> f64 {
        let old = if v != 0.0 {
            self.out_adj[t].insert(h, v)
        } else {
            self.out_adj[t].remove(&h)
        };
        if self.directed {
            if v != 0.0 {
                self.in_adj[h].insert(t, v);
            } else {
                self.in_adj[h].remove(&t);
            }
        } else if v != 0.0 {
            self.out_adj[h].insert(t, v);
        } else {
            self.out_adj[h].remove(&t);
        }
        match (old.is_some(), v != 0.0) {
            (false, true) => self.n_edges += 1,
            (true, false) => self.n_edges -= 1,
            _ => {}
        }
        old.unwrap_or(0.0)
    }

    pub fn edge_count(&self) -> usize {
        self.n_edges
    }

    /// Nonzero dyads in canonical order.
    pub fn edges(&self) -> Vec<(Dyad, f64)> {
        let mut out = Vec::with_capacity(self.n_edges);
        for (t, nb) in self.out_adj.iter().enumerate() {
            for (&h, &v) in nb {
                if self.directed || h > t {
                    out.push((Dyad::new(t, h), v));
                }
            }
        }
        out
    }

    pub fn out_neighbors(&self, v: usize) -> &BTreeMap<usize, f64> {
        &self.out_adj[v]
    }

    pub fn in_neighbors(&self, v: usize) -> &BTreeMap<usize, f64> {
        if self.directed {
            &self.in_adj[v]
        } else {
            &self.out_adj[v]
        }
    }

    pub fn is_binary(&self) -> bool {
        self.out_adj.iter().all(|m| m.values().all(|&v| v == 1.0))
    }

    pub fn attr(&self, name: &str) -> Option<&AttrColumn> {
        self.attrs.get(name)
    }

    pub fn attrs(&self) -> &BTreeMap<String, AttrColumn> {
        &self.attrs
    }

    pub fn set_attr(&mut self, name: impl Into<String>, col: AttrColumn) -> Result<()> {
        let name = name.into();
        if col.len() != self.n {
            return Err(ErgmError::Attr(format!(
                "attribute `{name}` has length {} but the network has {} vertices",
                col.len(),
                self.n
            )));
        }
        if let AttrColumn::Numeric(v) = &col {
            if v.iter().any(|x| x.is_nan()) {
                return Err(ErgmError::Attr(format!(
                    "attribute `{name}` has undefined entries"
                )));
            }
        }
        self.attrs.insert(name, col);
        Ok(())
    }

    /// Same vertex set and attributes, no edges and nothing missing.
    pub fn empty_copy(&self) -> Network {
        let mut net =
            Network::new(self.n, self.directed, self.bipartite).expect("shape already validated");
        net.attrs = self.attrs.clone();
        net.meta = self.meta.clone();
        net
    }

    /// Total number of dyads in the unconstrained sample space.
    pub fn n_dyads(&self) -> usize {
        dyad_count(self.n, self.directed, self.bipartite)
    }

    /// All dyads in the dense enumeration order.
    pub fn dyads(&self) -> DyadIter {
        DyadIter::new(self.n, self.directed, self.bipartite)
    }
}

pub(crate) fn canonical_dyad(
    n: usize,
    directed: bool,
    bipartite: Option<usize>,
    i: usize,
    j: usize,
) -> Result<Dyad> {
    if i >= n || j >= n {
        return Err(ErgmError::Dyad {
            tail: i + 1,
            head: j + 1,
            reason: "vertex index out of range",
        });
    }
    if i == j {
        return Err(ErgmError::Dyad {
            tail: i + 1,
            head: j + 1,
            reason: "self-loop",
        });
    }
    let d = if directed || i < j {
        Dyad::new(i, j)
    } else {
        Dyad::new(j, i)
    };
    if let Some(b) = bipartite {
        if !(d.tail < b && d.head >= b) {
            return Err(ErgmError::Dyad {
                tail: i + 1,
                head: j + 1,
                reason: "within-mode pair on a bipartite network",
            });
        }
    }
    Ok(d)
}

pub(crate) fn dyad_count(n: usize, directed: bool, bipartite: Option<usize>) -> usize {
    match (directed, bipartite) {
        (_, Some(b)) => b * (n - b),
        (true, None) => n * n.saturating_sub(1),
        (false, None) => n * n.saturating_sub(1) / 2,
    }
}

/// Row-major walk over (tail, head), skipping the diagonal; undirected pairs
/// appear once with `tail < head`, bipartite pairs only across modes.
pub struct DyadIter {
    n: usize,
    directed: bool,
    bipartite: Option<usize>,
    t: usize,
    h: usize,
}

impl DyadIter {
    pub(crate) fn new(n: usize, directed: bool, bipartite: Option<usize>) -> Self {
        let mut it = DyadIter {
            n,
            directed,
            bipartite,
            t: 0,
            h: 0,
        };
        it.h = it.first_head(0);
        it
    }

    fn first_head(&self, t: usize) -> usize {
        match (self.directed, self.bipartite) {
            (_, Some(b)) => b,
            (true, None) => usize::from(t == 0),
            (false, None) => t + 1,
        }
    }
}

impl Iterator for DyadIter {
    type Item = Dyad;

    fn next(&mut self) -> Option<Dyad> {
        let last_tail = match self.bipartite {
            Some(b) => b,
            None => self.n,
        };
        loop {
            if self.t >= last_tail {
                return None;
            }
            if self.directed && self.h == self.t {
                self.h += 1;
            }
            if self.h < self.n {
                let d = Dyad::new(self.t, self.h);
                self.h += 1;
                return Some(d);
            }
            self.t += 1;
            self.h = self.first_head(self.t);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_forms() {
        let u = Network::new(6, false, None).unwrap();
        assert_eq!(u.canonical(4, 1).unwrap(), Dyad::new(1, 4));
        let d = Network::new(6, true, None).unwrap();
        assert_eq!(d.canonical(4, 1).unwrap(), Dyad::new(4, 1));
        assert!(d.canonical(2, 2).is_err());
        assert!(d.canonical(2, 6).is_err());
        let b = Network::new(5, false, Some(2)).unwrap();
        assert!(b.canonical(0, 1).is_err());
        assert_eq!(b.canonical(3, 1).unwrap(), Dyad::new(1, 3));
    }

    #[test]
    fn set_and_clear() {
        let mut net = Network::new(3, false, None).unwrap();
        net.set_dyad(DyadChange {
            dyad: Dyad::new(0, 1),
            value: 1.0,
        })
        .unwrap();
        assert_eq!(net.edge_count(), 1);
        assert_eq!(net.value(1, 0), 1.0);
        net.set_value(0, 1, 0.0);
        assert_eq!(net.edge_count(), 0);
        assert_eq!(net.value(0, 1), 0.0);
    }

    #[test]
    fn dyad_iteration_counts() {
        for &(n, dir, bip) in &[(5, true, None), (5, false, None), (5, false, Some(2))] {
            let all: Vec<_> = DyadIter::new(n, dir, bip).collect();
            assert_eq!(all.len(), dyad_count(n, dir, bip));
            for d in &all {
                assert_eq!(canonical_dyad(n, dir, bip, d.tail, d.head).unwrap(), *d);
            }
            let mut sorted = all.clone();
            sorted.sort();
            assert_eq!(sorted, all);
        }
    }

    #[test]
    fn attr_length_checked() {
        let mut net = Network::new(3, false, None).unwrap();
        assert!(net
            .set_attr("x", AttrColumn::Numeric(vec![1.0, 2.0]))
            .is_err());
        assert!(net
            .set_attr("x", AttrColumn::Numeric(vec![1.0, 2.0, 3.0]))
            .is_ok());
    }
}
