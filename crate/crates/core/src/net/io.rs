use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{AttrColumn, Dyad, NetMeta, Network};
use crate::error::{ErgmError, Result};

#[derive(Serialize, Deserialize)]
struct NetJson {
    n: usize,
    directed: bool,
    #[serde(default)]
    bipartite: Option<usize>,
    #[serde(default)]
    edges: Vec<Vec<f64>>,
    #[serde(default)]
    missing: Vec<[usize; 2]>,
    #[serde(default)]
    vattrs: BTreeMap<String, AttrJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<MetaJson>,
}

#[derive(Serialize, Deserialize)]
struct AttrJson {
    kind: String,
    values: Vec<Value>,
}

#[derive(Serialize, Deserialize, Default)]
struct MetaJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constraints: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    obs_constraints: Option<String>,
}

fn bad(msg: impl Into<String>) -> ErgmError {
    ErgmError::Network(msg.into())
}

fn parse_column(name: &str, a: &AttrJson) -> Result<AttrColumn> {
    match a.kind.as_str() {
        "numeric" => a
            .values
            .iter()
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| bad(format!("attribute `{name}`: non-numeric entry {v}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(AttrColumn::Numeric),
        "categorical" => a
            .values
            .iter()
            .map(|v| match v {
                Value::String(s) => Ok(s.clone()),
                Value::Number(x) => Ok(x.to_string()),
                Value::Bool(b) => Ok(if *b { "TRUE" } else { "FALSE" }.to_string()),
                _ => Err(bad(format!("attribute `{name}`: undefined entry"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(AttrColumn::Categorical),
        "boolean" => a
            .values
            .iter()
            .map(|v| {
                v.as_bool()
                    .ok_or_else(|| bad(format!("attribute `{name}`: non-boolean entry {v}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(AttrColumn::Boolean),
        other => Err(bad(format!("attribute `{name}`: unknown kind `{other}`"))),
    }
}

fn to_index(x: f64, what: &str) -> Result<usize> {
    if x.fract() != 0.0 || x < 1.0 {
        return Err(bad(format!(
            "{what}: vertex index {x} is not a positive integer"
        )));
    }
    Ok(x as usize - 1)
}

/// Parse the JSON network format (1-based vertex indices).
pub fn network_from_json(text: &str) -> Result<Network> {
    let raw: NetJson = serde_json::from_str(text)?;
    let mut net = Network::new(raw.n, raw.directed, raw.bipartite)?;
    for e in &raw.edges {
        if e.len() != 2 && e.len() != 3 {
            return Err(bad("each edge must be [tail, head] or [tail, head, value]"));
        }
        let t = to_index(e[0], "edge")?;
        let h = to_index(e[1], "edge")?;
        let v = e.get(2).copied().unwrap_or(1.0);
        let d = net.canonical(t, h)?;
        if v != 0.0 {
            if net.value(d.tail, d.head) != 0.0 {
                return Err(bad(format!("duplicate edge ({}, {})", t + 1, h + 1)));
            }
            net.set_value(d.tail, d.head, v);
        }
    }
    for m in &raw.missing {
        let d = net.canonical(
            to_index(m[0] as f64, "missing")?,
            to_index(m[1] as f64, "missing")?,
        )?;
        if net.value(d.tail, d.head) != 0.0 {
            return Err(bad(format!(
                "dyad ({}, {}) is both an edge and missing",
                d.tail + 1,
                d.head + 1
            )));
        }
        net.set_missing(d, true)?;
    }
    for (name, a) in &raw.vattrs {
        net.set_attr(name.clone(), parse_column(name, a)?)?;
    }
    if let Some(m) = raw.meta {
        net.meta = NetMeta {
            constraints: m.constraints,
            obs_constraints: m.obs_constraints,
        };
    }
    Ok(net)
}

/// Serialize to the JSON network format. Binary edges omit the value.
pub fn network_to_json(net: &Network) -> String {
    let binary = net.is_binary();
    let edges = net
        .edges()
        .into_iter()
        .map(|(d, v)| {
            let mut e = vec![(d.tail + 1) as f64, (d.head + 1) as f64];
            if !binary {
                e.push(v);
            }
            e
        })
        .collect();
    let missing = net
        .missing()
        .iter()
        .map(|d: &Dyad| [d.tail + 1, d.head + 1])
        .collect();
    let vattrs = net
        .attrs()
        .iter()
        .map(|(k, c)| {
            let values = match c {
                AttrColumn::Numeric(v) => v.iter().map(|&x| Value::from(x)).collect(),
                AttrColumn::Categorical(v) => v.iter().map(|s| Value::from(s.as_str())).collect(),
                AttrColumn::Boolean(v) => v.iter().map(|&b| Value::from(b)).collect(),
            };
            (
                k.clone(),
                AttrJson {
                    kind: c.kind().to_string(),
                    values,
                },
            )
        })
        .collect();
    let meta = if net.meta == NetMeta::default() {
        None
    } else {
        Some(MetaJson {
            constraints: net.meta.constraints.clone(),
            obs_constraints: net.meta.obs_constraints.clone(),
        })
    };
    let raw = NetJson {
        n: net.n(),
        directed: net.directed(),
        bipartite: net.bipartite(),
        edges,
        missing,
        vattrs,
        meta,
    };
    serde_json::to_string(&raw).expect("network serialization cannot fail")
}

pub fn read_network(path: impl AsRef<Path>) -> Result<Network> {
    network_from_json(&std::fs::read_to_string(path)?)
}

pub fn write_network(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, network_to_json(net))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = r#"{"n":4,"directed":true,"edges":[[1,2],[3,1],[4,2]],
            "missing":[[2,3]],
            "vattrs":{"g":{"kind":"categorical","values":["a","b","a","c"]},
                      "x":{"kind":"numeric","values":[1,2.5,3,4]}},
            "meta":{"obs_constraints":"~observed"}}"#;
        let net = network_from_json(text).unwrap();
        assert_eq!(net.edge_count(), 3);
        assert_eq!(net.value(2, 0), 1.0);
        assert!(net.is_missing(Dyad::new(1, 2)));
        let back = network_from_json(&network_to_json(&net)).unwrap();
        assert_eq!(back.edges(), net.edges());
        assert_eq!(back.missing(), net.missing());
        assert_eq!(back.attrs(), net.attrs());
        assert_eq!(back.meta, net.meta);
    }

    #[test]
    fn rejects_overlap_and_loops() {
        assert!(network_from_json(r#"{"n":3,"directed":false,"edges":[[1,1]]}"#).is_err());
        assert!(
            network_from_json(r#"{"n":3,"directed":false,"edges":[[1,2]],"missing":[[2,1]]}"#)
                .is_err()
        );
    }

    #[test]
    fn valued_edges_keep_values() {
        let net =
            network_from_json(r#"{"n":3,"directed":true,"edges":[[1,2,3],[2,1,0]]}"#).unwrap();
        assert_eq!(net.value(0, 1), 3.0);
        assert_eq!(net.edge_count(), 1);
        assert!(network_to_json(&net).contains("[1.0,2.0,3.0]"));
    }
}
