use std::collections::BTreeSet;
use std::str::FromStr;

use super::Network;
use crate::error::{ErgmError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymmetrizeRule {
    Weak,
    Strong,
    Upper,
    Lower,
}

impl SymmetrizeRule {
    pub fn name(self) -> &'static str {
        match self {
            SymmetrizeRule::Weak => "weak",
            SymmetrizeRule::Strong => "strong",
            SymmetrizeRule::Upper => "upper",
            SymmetrizeRule::Lower => "lower",
        }
    }

    /// Combine y_ij (i<j) and y_ji into the undirected value.
    pub fn apply(self, ij: f64, ji: f64) -> f64 {
        let (a, b) = (ij != 0.0, ji != 0.0);
        let on = match self {
            SymmetrizeRule::Weak => a || b,
            SymmetrizeRule::Strong => a && b,
            SymmetrizeRule::Upper => a,
            SymmetrizeRule::Lower => b,
        };
        f64::from(u8::from(on))
    }
}

impl FromStr for SymmetrizeRule {
    type Err = ErgmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weak" => Ok(SymmetrizeRule::Weak),
            "strong" => Ok(SymmetrizeRule::Strong),
            "upper" => Ok(SymmetrizeRule::Upper),
            "lower" => Ok(SymmetrizeRule::Lower),
            other => Err(ErgmError::term(
                "Symmetrize",
                format!("unknown rule `{other}` (expected weak, strong, upper or lower)"),
            )),
        }
    }
}

/// Undirected binary network from a directed one.
pub fn symmetrize_net(net: &Network, rule: SymmetrizeRule) -> Result<Network> {
    if !net.directed() {
        return Err(ErgmError::term(
            "Symmetrize",
            "the network is already undirected",
        ));
    }
    let mut out = Network::new(net.n(), false, None)?;
    for (name, col) in net.attrs() {
        out.set_attr(name.clone(), col.clone())?;
    }
    for i in 0..net.n() {
        for j in (i + 1)..net.n() {
            let v = rule.apply(net.value(i, j), net.value(j, i));
            if v != 0.0 {
                out.set_value(i, j, v);
            }
        }
    }
    Ok(out)
}

/// Subgraph on the selected vertices, relabelled densely in the given order.
///
/// Equal tail and head sets give an induced subgraph of the same kind.
/// Disjoint sets give an undirected bipartite network whose first mode is
/// `tails`; only ties running from a tail to a head are kept.
pub fn induced_subgraph(net: &Network, tails: &[usize], heads: &[usize]) -> Result<Network> {
    if tails.is_empty() || heads.is_empty() {
        return Err(ErgmError::term("S", "empty vertex selection"));
    }
    let ts: BTreeSet<usize> = tails.iter().copied().collect();
    let hs: BTreeSet<usize> = heads.iter().copied().collect();
    if ts == hs {
        let idx: Vec<usize> = ts.into_iter().collect();
        let mut out = Network::new(idx.len(), net.directed(), None)?;
        for (name, col) in net.attrs() {
            out.set_attr(name.clone(), col.select(&idx))?;
        }
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                if a != b && (net.directed() || a < b) {
                    let v = net.value(i, j);
                    if v != 0.0 {
                        out.set_value(a, b, v);
                    }
                }
            }
        }
        return Ok(out);
    }
    if !ts.is_disjoint(&hs) {
        return Err(ErgmError::term(
            "S",
            "tail and head selections must be identical or disjoint",
        ));
    }
    if net.bipartite().is_some() {
        return Err(ErgmError::term(
            "S",
            "two-sided selection on a bipartite network is not supported",
        ));
    }
    let t_idx: Vec<usize> = ts.into_iter().collect();
    let h_idx: Vec<usize> = hs.into_iter().collect();
    let b = t_idx.len();
    let all: Vec<usize> = t_idx.iter().chain(h_idx.iter()).copied().collect();
    let mut out = Network::new(all.len(), false, Some(b))?;
    for (name, col) in net.attrs() {
        out.set_attr(name.clone(), col.select(&all))?;
    }
    for (a, &i) in t_idx.iter().enumerate() {
        for (c, &j) in h_idx.iter().enumerate() {
            let v = net.value(i, j);
            if v != 0.0 {
                out.set_value(a, b + c, v);
            }
        }
    }
    Ok(out)
}

/// Binary network whose ties are the dyads accepted by `keep`.
pub fn binarize(net: &Network, keep: &dyn Fn(usize, usize, f64) -> bool) -> Result<Network> {
    if keep(0, 0, 0.0) {
        return Err(ErgmError::term(
            "B",
            "the predicate must be 0 for a zero-valued dyad",
        ));
    }
    let mut out = net.empty_copy();
    out.clear_missing();
    for (d, v) in net.edges() {
        if keep(d.tail, d.head, v) {
            out.set_value(d.tail, d.head, 1.0);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn directed(n: usize, edges: &[(usize, usize)]) -> Network {
        let mut net = Network::new(n, true, None).unwrap();
        for &(t, h) in edges {
            net.set_value(t, h, 1.0);
        }
        net
    }

    #[test]
    fn symmetrize_rules() {
        let net = directed(3, &[(0, 1), (1, 0), (1, 2), (2, 0)]);
        let count = |r| symmetrize_net(&net, r).unwrap().edge_count();
        assert_eq!(count(SymmetrizeRule::Weak), 3);
        assert_eq!(count(SymmetrizeRule::Strong), 1);
        assert_eq!(count(SymmetrizeRule::Upper), 2);
        assert_eq!(count(SymmetrizeRule::Lower), 2);
        assert_eq!(
            count(SymmetrizeRule::Weak) + count(SymmetrizeRule::Strong),
            net.edge_count()
        );
        let und = symmetrize_net(&net, SymmetrizeRule::Weak).unwrap();
        assert!(symmetrize_net(&und, SymmetrizeRule::Weak).is_err());
    }

    #[test]
    fn bipartite_split() {
        let net = directed(4, &[(0, 2), (2, 0), (1, 3), (3, 1), (0, 1)]);
        let sub = induced_subgraph(&net, &[0, 1], &[2, 3]).unwrap();
        assert_eq!(sub.bipartite(), Some(2));
        assert_eq!(sub.edge_count(), 2);
        assert!(induced_subgraph(&net, &[0, 1], &[1, 2]).is_err());
        let same = induced_subgraph(&net, &[0, 1, 2, 3], &[3, 2, 1, 0]).unwrap();
        assert_eq!(same.edges(), net.edges());
    }

    #[test]
    fn binarize_threshold() {
        let mut net = Network::new(3, true, None).unwrap();
        net.set_value(0, 1, 3.0);
        net.set_value(1, 2, 1.0);
        let b = binarize(&net, &|_, _, v| v >= 2.0).unwrap();
        assert_eq!(b.edge_count(), 1);
        assert!(binarize(&net, &|_, _, v| v >= 0.0).is_err());
    }
}
