#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ergm_core::fit::{exact_mle, mple, Problem};
use ergm_core::mcmc::{run_chain, ChainConfig, Reference};
use ergm_core::net::{read_network, AttrColumn, Network};
use ergm_core::space::{build_universe, Constraint, DyadUniverse, RunSet};
use ergm_core::terms::{Model, TermOptions};

pub type Check = Result<String, String>;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn fixture(name: &str) -> Result<Network, String> {
    let path = data_dir().join(format!("{name}.json"));
    if !path.exists() {
        return Err(format!("fixture {name} unavailable (see data/README.md)"));
    }
    read_network(&path).map_err(|e| format!("{name}: {e}"))
}

pub fn model(net: &Network, text: &str, valued: bool) -> Result<Model, String> {
    Model::parse(text, net, valued, TermOptions::default()).map_err(|e| format!("{text}: {e}"))
}

pub fn random_net(seed: u64, n: usize, directed: bool, density: f64) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Network::new(n, directed, None).unwrap();
    for d in net.dyads().collect::<Vec<_>>() {
        if rng.random::<f64>() < density {
            net.set_value(d.tail, d.head, 1.0);
        }
    }
    let cat: Vec<String> = (0..n).map(|i| ["a", "b", "c"][i % 3].to_string()).collect();
    net.set_attr("c", AttrColumn::Categorical(cat)).unwrap();
    let x: Vec<f64> = (0..n).map(|i| (i % 4) as f64 + 0.5).collect();
    net.set_attr("x", AttrColumn::Numeric(x)).unwrap();
    net
}

pub fn random_valued(seed: u64, n: usize, directed: bool, max: u32) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut net = random_net(seed, n, directed, 0.0);
    for d in net.dyads().collect::<Vec<_>>() {
        let v = rng.random_range(0..=max);
        if v > 0 {
            net.set_value(d.tail, d.head, f64::from(v));
        }
    }
    net
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

const DIRECTED_TERMS: &[&str] = &[
    "edges",
    "mutual",
    "ttriple",
    "ctriple",
    "transitiveties",
    "cyclicalties",
    "cycle(3)",
    "isolates",
    "nodeifactor(\"c\")",
    "nodematch(\"c\", diff=TRUE)",
    "nodemix(\"c\")",
    "F(~ttriple, ~nodematch(\"c\"))",
    "S(~mutual + edges, ~c != \"b\")",
    "Symmetrize(~triangle, \"weak\")",
];

const UNDIRECTED_TERMS: &[&str] = &[
    "edges",
    "triangle",
    "degree(0:3)",
    "isolates",
    "cycle(4)",
    "transitiveties",
    "nodefactor(\"c\")",
    "mm(\"c\")",
    "F(~triangle, ~!nodematch(\"c\"))",
];

const VALUED_TERMS: &[&str] = &[
    "sum",
    "nonzero",
    "atleast(2)",
    "equalto(1)",
    "mutuality(\"min\")",
    "B(~mutual + ttriple, ~atleast(2))",
    "nodematch(\"c\")",
];

/// Change statistics equal the difference of full evaluations, exactly, on
/// random networks, models, dyads and values.
pub fn change_consistency(cases: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..cases {
        let n = rng.random_range(4..9);
        let kind = rng.random_range(0..3);
        let (net, pool, valued) = match kind {
            0 => (random_net(case as u64, n, true, 0.3), DIRECTED_TERMS, false),
            1 => (
                random_net(case as u64, n, false, 0.35),
                UNDIRECTED_TERMS,
                false,
            ),
            _ => (random_valued(case as u64, n, true, 3), VALUED_TERMS, true),
        };
        let k = rng.random_range(1..4);
        let text = (0..k)
            .map(|_| pool[rng.random_range(0..pool.len())])
            .collect::<Vec<_>>()
            .join(" + ");
        let m = model(&net, &text, valued)?;
        let dyads: Vec<_> = net.dyads().collect();
        let d = dyads[rng.random_range(0..dyads.len())];
        let old = net.value(d.tail, d.head);
        let new = if valued {
            let mut v = old;
            while v == old {
                v = f64::from(rng.random_range(0..4u32));
            }
            v
        } else {
            1.0 - old
        };
        let mut out = vec![0.0; m.dim()];
        m.change(&net, d.tail, d.head, new, &mut out);
        let before = m.eval(&net);
        let mut after = net.clone();
        after.set_value(d.tail, d.head, new);
        let after = m.eval(&after);
        for j in 0..m.dim() {
            if out[j] != after[j] - before[j] {
                return Err(format!(
                    "case {case}: `{text}` stat {j} at ({}, {}) <- {new}: change {} vs difference {}",
                    d.tail + 1,
                    d.head + 1,
                    out[j],
                    after[j] - before[j]
                ));
            }
        }
    }
    Ok(format!("{cases} cases"))
}

/// Run-length sets round-trip through masks and agree with plain set algebra.
pub fn rle_roundtrip(cases: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..cases {
        let len = rng.random_range(0..200);
        let p = rng.random::<f64>();
        let a: Vec<bool> = (0..len).map(|_| rng.random::<f64>() < p).collect();
        let b: Vec<bool> = (0..len).map(|_| rng.random::<f64>() < 0.5).collect();
        let (ra, rb) = (RunSet::from_mask(&a), RunSet::from_mask(&b));
        let back: Vec<usize> = ra.iter().collect();
        let want: Vec<usize> = (0..len).filter(|&i| a[i]).collect();
        if back != want {
            return Err(format!("case {case}: mask round trip differs"));
        }
        for (k, &x) in want.iter().enumerate() {
            if ra.nth(k) != Some(x) || ra.rank(x) != k {
                return Err(format!("case {case}: nth/rank disagree at {k}"));
            }
        }
        let inter: Vec<usize> = (0..len).filter(|&i| a[i] && b[i]).collect();
        let union: Vec<usize> = (0..len).filter(|&i| a[i] || b[i]).collect();
        let comp: Vec<usize> = (0..len).filter(|&i| !a[i]).collect();
        if ra.intersect(&rb).iter().collect::<Vec<_>>() != inter
            || ra.union(&rb).iter().collect::<Vec<_>>() != union
            || ra.complement(len).iter().collect::<Vec<_>>() != comp
        {
            return Err(format!("case {case}: set algebra differs"));
        }
    }
    Ok(format!("{cases} cases"))
}

fn universe(net: &Network, text: &str) -> Result<DyadUniverse, String> {
    let cs = Constraint::parse_formula(text, net).map_err(|e| e.to_string())?;
    build_universe(net, &cs).map_err(|e| e.to_string())
}

/// Simulated networks never leave the constrained sample space.
pub fn constraint_preservation() -> Check {
    let net = random_net(11, 10, true, 0.25);
    let m = model(&net, "edges + mutual + ttriple", false)?;
    let theta = [0.3, 0.5, -0.1];
    let cfg = ChainConfig {
        burnin: 2000,
        interval: 50,
        samplesize: 200,
        seed: 5,
        ..ChainConfig::default()
    };
    let cases = [
        "~edges",
        "~Dyads(fix = ~nodematch(\"c\"))",
        "~blocks(\"c\", levels2 = c(1, 5))",
        "~bd(maxout = 2)",
        "~edges + Dyads(vary = ~nodematch(\"c\"))",
    ];
    for text in cases {
        let u = universe(&net, text)?;
        let out = run_chain(&net, &m, &theta, &cfg, &u, &Reference::Bernoulli)
            .map_err(|e| e.to_string())?;
        let end = &out.final_nets[0];
        for d in net.dyads() {
            if !u.contains(d) && end.value(d.tail, d.head) != net.value(d.tail, d.head) {
                return Err(format!(
                    "{text}: fixed dyad ({}, {}) changed",
                    d.tail + 1,
                    d.head + 1
                ));
            }
        }
        if text.contains("edges") {
            let col: Vec<f64> = out.stats.column(0).iter().copied().collect();
            if col.iter().any(|&e| e != net.edge_count() as f64) {
                return Err(format!("{text}: edge count moved"));
            }
        }
        if text.contains("bd") {
            for v in 0..end.n() {
                let grew = end.out_neighbors(v).len() > net.out_neighbors(v).len().max(2);
                if grew {
                    return Err(format!("{text}: out-degree bound exceeded at {}", v + 1));
                }
            }
        }
    }
    Ok(format!("{} constraint sets", cases.len()))
}

/// Binary statistics and fits are the {0,1} special case of valued ones.
pub fn specialization_identities() -> Check {
    for seed in 0..5 {
        let net = random_net(seed, 7, true, 0.3);
        let b = model(&net, "edges + mutual + nodematch(\"c\")", false)?.eval(&net);
        let v = model(&net, "sum + mutuality(\"min\") + nodematch(\"c\")", true)?.eval(&net);
        let w = model(
            &net,
            "nonzero + B(~mutual, \"nonzero\") + B(~nodematch(\"c\"), ~atleast(1))",
            true,
        )?
        .eval(&net);
        if b != v || b != w {
            return Err(format!("seed {seed}: binary {b:?} vs valued {v:?} / {w:?}"));
        }
    }
    let net = random_net(4, 4, true, 0.4);
    let bm = model(&net, "edges + nodematch(\"c\")", false)?;
    let vm = model(&net, "sum + nodematch(\"c\")", true)?;
    let bp =
        Problem::new(&net, &bm, Reference::Bernoulli, None, None).map_err(|e| e.to_string())?;
    let vp = Problem::new(&net, &vm, Reference::DiscUnif { a: 0, b: 1 }, None, None)
        .map_err(|e| e.to_string())?;
    let fb = mple(&bp).map_err(|e| e.to_string())?;
    let fv = exact_mle(&vp, false).map_err(|e| e.to_string())?;
    for k in 0..2 {
        let close = (fb.coef[k] - fv.coef[k]).abs() <= 1e-6
            || (fb.coef[k].is_infinite() && fb.coef[k].signum() * fv.coef[k] > 10.0);
        if !close {
            return Err(format!(
                "binary MPLE {:?} vs DiscUnif(0,1) exact MLE {:?}",
                fb.coef, fv.coef
            ));
        }
    }
    Ok("statistics and fits agree".into())
}

/// For dyad-independent models the pseudo-likelihood is the likelihood.
pub fn mple_equals_exact() -> Check {
    let cases: [(usize, bool, &str); 4] = [
        (4, true, "edges + nodeifactor(\"c\")"),
        (5, false, "edges + nodematch(\"c\")"),
        (6, false, "edges + nodecov(\"x\")"),
        (4, true, "edges + absdiff(\"x\") + nodeofactor(\"c\")"),
    ];
    for (i, (n, directed, text)) in cases.into_iter().enumerate() {
        let net = random_net(40 + i as u64, n, directed, 0.4);
        let m = model(&net, text, false)?;
        let p =
            Problem::new(&net, &m, Reference::Bernoulli, None, None).map_err(|e| e.to_string())?;
        let a = mple(&p).map_err(|e| e.to_string())?;
        let b = exact_mle(&p, false).map_err(|e| e.to_string())?;
        for k in 0..a.coef.len() {
            let close = (a.coef[k] - b.coef[k]).abs() <= 1e-6
                || (a.coef[k].is_infinite() && a.coef[k].signum() * b.coef[k] > 10.0);
            if !close {
                return Err(format!(
                    "{text} on n={n}: MPLE {:?} vs exact {:?}",
                    a.coef, b.coef
                ));
            }
        }
    }
    Ok(format!("{} models", cases.len()))
}
