//! Dyad-dependent terms for valued networks.

use super::{Args, Ctx, Support, Term};
use crate::error::Result;
use crate::formula::TermExpr;
use crate::net::{NetView, Network, Overlay};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum MutualForm {
    Product,
    Geometric,
    Min,
    NAbsDiff,
}

impl MutualForm {
    fn name(self) -> &'static str {
        match self {
            MutualForm::Product => "product",
            MutualForm::Geometric => "geometric",
            MutualForm::Min => "min",
            MutualForm::NAbsDiff => "nabsdiff",
        }
    }

    fn pair(self, a: f64, b: f64) -> f64 {
        match self {
            MutualForm::Product => a * b,
            MutualForm::Geometric => (a * b).sqrt(),
            MutualForm::Min => a.min(b),
            MutualForm::NAbsDiff => -(a - b).abs(),
        }
    }
}

struct Mutuality(MutualForm);

impl Term for Mutuality {
    fn names(&self) -> Vec<String> {
        vec![format!("mutuality.{}", self.0.name())]
    }

    fn dyad_independent(&self) -> bool {
        false
    }

    fn support(&self) -> Support {
        Support::Valued
    }

    fn eval(&self, net: &dyn NetView, out: &mut [f64]) {
        let mut s = 0.0;
        // Pairs with both values zero contribute nothing under every form.
        net.for_each_edge(&mut |t, h, y| {
            let back = net.value(h, t);
            if t < h || back == 0.0 {
                s += self.0.pair(y, back);
            }
        });
        out[0] = s;
    }

    fn change(&self, net: &dyn NetView, t: usize, h: usize, new: f64, out: &mut [f64]) {
        let back = net.value(h, t);
        out[0] = self.0.pair(new, back) - self.0.pair(net.value(t, h), back);
    }
}

/// Co-variation of transformed values on dyads sharing an actor.
struct SqrtCovar {
    center: bool,
    sqrt: bool,
}

impl SqrtCovar {
    fn tr(&self, y: f64) -> f64 {
        if self.sqrt {
            y.sqrt()
        } else {
            y
        }
    }
}

impl Term for SqrtCovar {
    fn names(&self) -> Vec<String> {
        let mut name = String::from("nodesqrtcovar");
        if !self.sqrt {
            name.push_str(".identity");
        }
        if !self.center {
            name.push_str(".uncentered");
        }
        vec![name]
    }

    fn dyad_independent(&self) -> bool {
        false
    }

    fn support(&self) -> Support {
        Support::Valued
    }

    fn eval(&self, net: &dyn NetView, out: &mut [f64]) {
        let n = net.n();
        if n < 3 {
            out[0] = 0.0;
            return;
        }
        // Per-actor sums of s_ij - c expand into totals over edges only.
        let m = (n - 1) as f64;
        let mut row = vec![0.0; n];
        let (mut total, mut squares) = (0.0, 0.0);
        net.for_each_edge(&mut |t, h, y| {
            let s = self.tr(y);
            row[t] += s;
            row[h] += s;
            total += s;
            squares += s * s;
        });
        let c = if self.center {
            total / (n as f64 * m / 2.0)
        } else {
            0.0
        };
        let nf = n as f64;
        let mut acc = 0.0;
        for a in &row {
            let d = a - m * c;
            acc += d * d;
        }
        // Sum over actors of squared deviations of each incident dyad.
        let own = 2.0 * squares - 4.0 * c * total + nf * m * c * c;
        out[0] = (acc - own) / (2.0 * (nf - 2.0));
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mean {
    Min,
    Geomean,
}

impl Mean {
    fn parse(a: &Args, arg: &str, default: &str) -> Result<Mean> {
        match a.string(arg, default)?.as_str() {
            "min" => Ok(Mean::Min),
            "geomean" => Ok(Mean::Geomean),
            other => Err(a.err(format!(
                "{arg} must be \"min\" or \"geomean\", not `{other}`"
            ))),
        }
    }

    fn apply(self, x: f64, y: f64) -> f64 {
        match self {
            Mean::Min => x.min(y),
            Mean::Geomean => (x * y).sqrt(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Mean::Min => "min",
            Mean::Geomean => "geomean",
        }
    }
}

struct Weights {
    cyclical: bool,
    twopath: Mean,
    max: bool,
    affect: Mean,
}

impl Weights {
    fn pair(&self, net: &dyn NetView, i: usize, j: usize) -> f64 {
        let y = net.value(i, j);
        if y == 0.0 {
            return 0.0;
        }
        let mut comb = 0.0;
        let mut add = |a: f64, b: f64| {
            if a != 0.0 && b != 0.0 {
                let p = self.twopath.apply(a, b);
                comb = if self.max {
                    f64::max(comb, p)
                } else {
                    comb + p
                };
            }
        };
        if self.cyclical && net.directed() {
            net.for_each_in(i, &mut |k, yki| {
                if k != j {
                    add(net.value(j, k), yki);
                }
            });
        } else {
            net.for_each_out(i, &mut |k, yik| {
                if k != j {
                    add(yik, net.value(k, j));
                }
            });
        }
        self.affect.apply(y, comb)
    }

    fn touching(net: &dyn NetView, t: usize, h: usize) -> Vec<(usize, usize)> {
        let directed = net.directed();
        let canon = |a: usize, b: usize| {
            if directed {
                (a, b)
            } else {
                (a.min(b), a.max(b))
            }
        };
        let mut ds = vec![canon(t, h)];
        for v in [t, h] {
            net.for_each_out(v, &mut |x, _| ds.push(canon(v, x)));
            if directed {
                net.for_each_in(v, &mut |x, _| ds.push((x, v)));
            }
        }
        ds.sort_unstable();
        ds.dedup();
        ds
    }
}

impl Term for Weights {
    fn names(&self) -> Vec<String> {
        vec![format!(
            "{}.{}.{}.{}",
            if self.cyclical {
                "cyclicalweights"
            } else {
                "transitiveweights"
            },
            self.twopath.name(),
            if self.max { "max" } else { "sum" },
            self.affect.name()
        )]
    }

    fn dyad_independent(&self) -> bool {
        false
    }

    fn support(&self) -> Support {
        Support::Valued
    }

    fn eval(&self, net: &dyn NetView, out: &mut [f64]) {
        let mut s = 0.0;
        net.for_each_edge(&mut |i, j, _| s += self.pair(net, i, j));
        out[0] = s;
    }

    fn change(&self, net: &dyn NetView, t: usize, h: usize, new: f64, out: &mut [f64]) {
        if net.value(t, h) == new {
            out[0] = 0.0;
            return;
        }
        let ov = Overlay::new(net, t, h, new);
        let mut d = 0.0;
        for (i, j) in Self::touching(net, t, h) {
            d += self.pair(&ov, i, j) - self.pair(net, i, j);
        }
        out[0] = d;
    }
}

pub(super) fn realize(
    name: &str,
    term: &TermExpr,
    net: &Network,
    _ctx: &mut Ctx,
) -> Result<Option<Box<dyn Term>>> {
    let t: Box<dyn Term> = match name {
        "mutuality" => {
            let a = Args::bind(term, &["form"])?;
            if !net.directed() {
                return Err(a.err("requires a directed network"));
            }
            let form = match a.string("form", "min")?.as_str() {
                "product" => MutualForm::Product,
                "geometric" => MutualForm::Geometric,
                "min" => MutualForm::Min,
                "nabsdiff" => MutualForm::NAbsDiff,
                other => {
                    return Err(a.err(format!(
                        "form must be product, geometric, min or nabsdiff, not `{other}`"
                    )))
                }
            };
            Box::new(Mutuality(form))
        }
        "nodesqrtcovar" => {
            let a = Args::bind(term, &["center", "transform"])?;
            if net.directed() || net.bipartite().is_some() {
                return Err(a.err("requires an undirected unipartite network"));
            }
            let sqrt = match a.string("transform", "sqrt")?.as_str() {
                "sqrt" => true,
                "identity" => false,
                other => {
                    return Err(a.err(format!(
                        "transform must be \"sqrt\" or \"identity\", not `{other}`"
                    )))
                }
            };
            Box::new(SqrtCovar {
                center: a.flag("center", true)?,
                sqrt,
            })
        }
        "transitiveweights" | "cyclicalweights" => {
            let a = Args::bind(term, &["twopath", "combine", "affect"])?;
            let max = match a.string("combine", "max")?.as_str() {
                "max" => true,
                "sum" => false,
                other => {
                    return Err(a.err(format!("combine must be \"max\" or \"sum\", not `{other}`")))
                }
            };
            Box::new(Weights {
                cyclical: name == "cyclicalweights",
                twopath: Mean::parse(&a, "twopath", "min")?,
                max,
                affect: Mean::parse(&a, "affect", "min")?,
            })
        }
        _ => return Ok(None),
    };
    Ok(Some(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::testutil::{check_changes, random_net, random_valued};
    use crate::terms::{Model, TermOptions};

    fn stats(net: &Network, text: &str, valued: bool) -> Vec<f64> {
        Model::parse(text, net, valued, TermOptions::default())
            .unwrap()
            .eval(net)
    }

    #[test]
    fn binary_specializations() {
        for seed in 0..4 {
            let d = random_net(seed, 8, true, 0.3);
            let v = stats(
                &d,
                "sum + nonzero + mutuality(\"min\") + transitiveweights + cyclicalweights",
                true,
            );
            let b = stats(
                &d,
                "edges + edges + mutual + transitiveties + cyclicalties",
                false,
            );
            assert_eq!(v, b);
            let u = random_net(seed, 8, false, 0.4);
            assert_eq!(
                stats(&u, "transitiveweights(\"min\",\"max\",\"min\")", true),
                stats(&u, "transitiveties", false)
            );
        }
    }

    #[test]
    fn mutuality_forms() {
        let mut net = Network::new(3, true, None).unwrap();
        net.set_value(0, 1, 4.0);
        net.set_value(1, 0, 1.0);
        net.set_value(1, 2, 3.0);
        let s = stats(
            &net,
            "mutuality(\"product\") + mutuality(\"geometric\") + mutuality(\"min\") + mutuality(\"nabsdiff\")",
            true,
        );
        assert_eq!(s, vec![4.0, 2.0, 1.0, -6.0]);
    }

    /// Direct double sum over actors and unordered pairs of incident dyads.
    fn sqrtcovar_brute(net: &Network, center: bool) -> f64 {
        let n = net.n();
        let mut c = 0.0;
        if center {
            let mut k = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    c += net.value(i, j).sqrt();
                    k += 1.0;
                }
            }
            c /= k;
        }
        let mut g = 0.0;
        for i in 0..n {
            let mut s = 0.0;
            for j in 0..n {
                for k in j + 1..n {
                    if j != i && k != i {
                        s += (net.value(i, j).sqrt() - c) * (net.value(i, k).sqrt() - c);
                    }
                }
            }
            g += s / (n as f64 - 2.0);
        }
        g
    }

    #[test]
    fn sqrtcovar_matches_direct_sum() {
        for seed in 0..4 {
            let net = random_valued(seed, 7, false, 4);
            let s = stats(&net, "nodesqrtcovar + nodesqrtcovar(center=FALSE)", true);
            assert!((s[0] - sqrtcovar_brute(&net, true)).abs() < 1e-9);
            assert!((s[1] - sqrtcovar_brute(&net, false)).abs() < 1e-9);
        }
    }

    #[test]
    fn weights_by_hand() {
        // 0->1 (2), 1->2 (3), 0->2 (4): one transitive path closing 0->2.
        let mut net = Network::new(3, true, None).unwrap();
        net.set_value(0, 1, 2.0);
        net.set_value(1, 2, 3.0);
        net.set_value(0, 2, 4.0);
        let s = stats(
            &net,
            "transitiveweights + transitiveweights(\"geomean\",\"sum\",\"geomean\") + cyclicalweights",
            true,
        );
        assert_eq!(s[0], 2.0);
        assert!((s[1] - (4.0 * 6f64.sqrt()).sqrt()).abs() < 1e-12);
        assert_eq!(s[2], 0.0);
    }

    #[test]
    fn changes_match_differences() {
        for seed in 0..3 {
            let d = random_valued(seed, 6, true, 3);
            check_changes(
                &d,
                "mutuality(\"product\") + mutuality(\"geometric\") + mutuality + mutuality(\"nabsdiff\") \
                 + transitiveweights + cyclicalweights(\"geomean\",\"sum\",\"geomean\")",
                true,
                &[0.0, 1.0, 2.0, 5.0],
            );
            let u = random_valued(seed + 7, 6, false, 3);
            check_changes(
                &u,
                "nodesqrtcovar + nodesqrtcovar(FALSE, \"identity\") + transitiveweights(\"min\",\"sum\",\"geomean\")",
                true,
                &[0.0, 1.0, 4.0],
            );
        }
    }
}
