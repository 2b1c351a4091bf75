//! Dyad-dependent binary terms.

use super::{Args, Ctx, Term};
use crate::error::Result;
use crate::formula::{fmt_num, TermExpr};
use crate::net::{NetView, Network, Overlay};

fn on(net: &dyn NetView, t: usize, h: usize) -> bool {
    net.value(t, h) != 0.0
}

/// +1, -1 or 0 for a binary toggle of (t, h) to `new`.
fn toggle_sign(net: &dyn NetView, t: usize, h: usize, new: f64) -> f64 {
    match (on(net, t, h), new != 0.0) {
        (false, true) => 1.0,
        (true, false) => -1.0,
        _ => 0.0,
    }
}

fn outs(net: &dyn NetView, v: usize) -> Vec<usize> {
    let mut out = Vec::new();
    net.for_each_out(v, &mut |x, _| out.push(x));
    out
}

fn ins(net: &dyn NetView, v: usize) -> Vec<usize> {
    let mut out = Vec::new();
    net.for_each_in(v, &mut |x, _| out.push(x));
    out
}

struct Mutual;

impl Term for Mutual {
    fn names(&self) -> Vec<String> {
        vec!["mutual".into()]
    }

    fn dyad_independent(&self) -> bool {
        false
    }

    fn eval(&self, net: &dyn NetView, out: &mut [f64]) {
        let mut k = 0.0;
        net.for_each_edge(&mut |t, h, _| {
            if t < h && on(net, h, t) {
                k += 1.0;
            }
        });
        out[0] = k;
    }

    fn change(&self, net: &dyn NetView, t: usize, h: usize, new: f64, out: &mut [f64]) {
        out[0] = if on(net, h, t) {
            toggle_sign(net, t, h, new)
        } else {
            0.0
        };
    }
}

/// Triangles (undirected) or transitive plus cyclic triples (directed).
struct Triangle;

fn common_neighbors(net: &dyn NetView, a: usize, b: usize) -> f64 {
    let mut k = 0.0;
    net.for_each_out(a, &mut |x, _| {
        if x != b && on(net, b, x) {
            k += 1.0;
        }
    });
    k
}

fn ttriple_change(net: &dyn NetView, t: usize, h: usize) -> f64 {
    let mut k = 0.0;
    // t->h as the shortcut of t->j->h, as the first leg, and as the second.
    net.for_each_out(t, &mut |j, _| {
        if j != h && on(net, j, h) {
            k += 1.0;
        }
        if j != h && on(net, h, j) {
            k += 1.0;
        }
    });
    net.for_each_in(t, &mut |i, _| {
        if i != h && on(net, i, h) {
            k += 1.0;
        }
    });
    k
}

fn ctriple_change(net: &dyn NetView, t: usize, h: usize) -> f64 {
    let mut k = 0.0;
    net.for_each_out(h, &mut |x, _| {
        if x != t && on(net, x, t) {
            k += 1.0;
        }
    });
    k
}

fn ttriple_eval(net: &dyn NetView) -> f64 {
    let mut k = 0.0;
    net.for_each_edge(&mut |i, j, _| {
        net.for_each_out(i, &mut |m, _| {
            if m != j && on(net, m, j) {
                k += 1.0;
            }
        });
    });
    k
}

fn ctriple_eval(net: &dyn NetView) -> f64 {
    let mut k = 0.0;
    net.for_each_edge(&mut |t, h, _| k += ctriple_change(net, t, h));
    k / 3.0
}

fn triangle_eval(net: &dyn NetView) -> f64 {
    let mut k = 0.0;
    net.for_each_edge(&mut |t, h, _| k += common_neighbors(net, t, h));
    k / 3.0
}

impl Term for Triangle {
    fn names(&self) -> Vec<String> {
        vec!["triangle".into()]
    }

    fn dyad_independent(&self) -> bool {
        false
    }

    fn eval(&self, net: &dyn NetView, out: &mut [f64]) {
        out[0] = if net.directed() {
            ttriple_eval(net) + ctriple_eval(net)
        } else {
            triangle_eval(net)
        };
    }

    fn change(&self, net: &dyn NetView, t: usize, h: usize, new: f64, out: &mut [f64]) {
        let s = toggle_sign(net, t, h, new);
        out[0] = if s == 0.0 {
            0.0
        } else if net.directed() {
            s * (ttriple_change(net, t, h) + ctriple_change(net, t, h))
        } else {
            s * common_neighbors(net, t, h)
        };
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Triple {
    Transitive,
    Cyclic,
}

struct Triples(Triple);

impl Term for Triples {
    fn names(&self) -> Vec<String> {
        vec![match self.0 {
            Triple::Transitive => "ttriple".into(),
            Triple::Cyclic => "ctriple".into(),
        }]
    }

    fn dyad_independent(&self) -> bool {
        false
    }

    fn eval(&self, net: &dyn NetView, out: &mut [f64]) {
        out[0] = match self.0 {
            Triple::Transitive => ttriple_eval(net),
            Triple::Cyclic => ctriple_eval(net),
        };
    }

    fn change(&self, net: &dyn NetView, t: usize, h: usize, new: f64, out: &mut [f64]) {
        let s = toggle_sign(net, t, h, new);
        out[0] = if s == 0.0 {
            0.0
        } else {
            s * match self.0 {
                Triple::Transitive => ttriple_change(net, t, h),
                Triple::Cyclic => ctriple_change(net, t, h),
            }
        };
    }
}

/// Simple k-cycles, each counted once.
struct Cycle {
    ks: Vec<usize>,
}

/// Simple paths `from -> ... -> to` with exactly `len` edges.
fn count_paths(net: &dyn NetView, from: usize, to: usize, len: usize, seen: &mut [bool]) -> f64 {
    if len == 1 {
        return f64::from(u8::from(on(net, from, to)));
    }
    let mut total = 0.0;
    for x in outs(net, from) {
        if x != to && !seen[x] {
            seen[x] = true;
            total += count_paths(net, x, to, len - 1, seen);
            seen[x] = false;
        }
    }
    total
}

fn closing_paths(net: &dyn NetView, t: usize, h: usize, k: usize) -> f64 {
    let mut seen = vec![false; net.n()];
    seen[h] = true;
    seen[t] = true;
    count_paths(net, h, t, k - 1, &mut seen)
}

impl Term for Cycle {
    fn names(&self) -> Vec<String> {
        self.ks.iter().map(|k| format!("cycle{k}")).collect()
    }

    fn dyad_independent(&self) -> bool {
        false
    }

    fn eval(&self, net: &dyn NetView, out: &mut [f64]) {
        for (o, &k) in out.iter_mut().zip(&self.ks) {
            let mut total = 0.0;
            net.for_each_edge(&mut |t, h, _| total += closing_paths(net, t, h, k));
            *o = total / k as f64;
        }
    }

    fn change(&self, net: &dyn NetView, t: usize, h: usize, new: f64, out: &mut [f64]) {
        let s = toggle_sign(net, t, h, new);
        for (o, &k) in out.iter_mut().zip(&self.ks) {
            *o = if s == 0.0 {
                0.0
            } else {
                s * closing_paths(net, t, h, k)
            };
        }
    }
}

/// Node counts by degree; `None` degree list means isolates.
struct Degree {
    ds: Vec<usize>,
    isolates: bool,
}

impl Degree {
    fn deg(net: &dyn NetView, v: usize) -> usize {
        if net.directed() {
            net.out_degree(v) + net.in_degree(v)
        } else {
            net.out_degree(v)
        }
    }
}

impl Term for Degree {
    fn names(&self) -> Vec<String> {
        if self.isolates {
            vec!["isolates".into()]
        } else {
            self.ds.iter().map(|d| format!("degree{d}")).collect()
        }
    }

    fn dyad_independent(&self) -> bool {
        false
    }

    fn eval(&self, net: &dyn NetView, out: &mut [f64]) {
        out.fill(0.0);
        for v in 0..net.n() {
            let d = Self::deg(net, v);
            for (o, &want) in out.iter_mut().zip(&self.ds) {
                if d == want {
                    *o += 1.0;
                }
            }
        }
    }

    fn change(&self, net: &dyn NetView, t: usize, h: usize, new: f64, out: &mut [f64]) {
        out.fill(0.0);
        let s = toggle_sign(net, t, h, new);
        if s == 0.0 {
            return;
        }
        for v in [t, h] {
            let before = Self::deg(net, v);
            let after = if s > 0.0 { before + 1 } else { before - 1 };
            for (o, &want) in out.iter_mut().zip(&self.ds) {
                *o += f64::from(u8::from(after == want)) - f64::from(u8::from(before == want));
            }
        }
    }
}

/// Ties that close at least one two-path of the given orientation.
struct TieClosure(Triple);

impl TieClosure {
    fn status(&self, net: &dyn NetView, i: usize, j: usize) -> bool {
        if !on(net, i, j) {
            return false;
        }
        let mut found = false;
        if !net.directed() {
            net.for_each_out(i, &mut |k, _| found |= k != j && on(net, k, j));
            return found;
        }
        match self.0 {
            Triple::Transitive => net.for_each_out(i, &mut |k, _| found |= k != j && on(net, k, j)),
            Triple::Cyclic => net.for_each_in(i, &mut |k, _| found |= k != j && on(net, j, k)),
        }
        found
    }

    fn affected(net: &dyn NetView, t: usize, h: usize) -> Vec<(usize, usize)> {
        let directed = net.directed();
        let mut ds = vec![if directed {
            (t, h)
        } else {
            (t.min(h), t.max(h))
        }];
        for v in [t, h] {
            for x in outs(net, v) {
                ds.push(if directed {
                    (v, x)
                } else {
                    (v.min(x), v.max(x))
                });
            }
            if directed {
                for x in ins(net, v) {
                    ds.push((x, v));
                }
            }
        }
        ds.sort_unstable();
        ds.dedup();
        ds
    }
}

impl Term for TieClosure {
    fn names(&self) -> Vec<String> {
        vec![match self.0 {
            Triple::Transitive => "transitiveties".into(),
            Triple::Cyclic => "cyclicalties".into(),
        }]
    }

    fn dyad_independent(&self) -> bool {
        false
    }

    fn eval(&self, net: &dyn NetView, out: &mut [f64]) {
        let mut k = 0.0;
        net.for_each_edge(&mut |i, j, _| {
            if self.status(net, i, j) {
                k += 1.0;
            }
        });
        out[0] = k;
    }

    fn change(&self, net: &dyn NetView, t: usize, h: usize, new: f64, out: &mut [f64]) {
        if toggle_sign(net, t, h, new) == 0.0 {
            out[0] = 0.0;
            return;
        }
        let ov = Overlay::new(net, t, h, new);
        let mut delta = 0.0;
        for (i, j) in Self::affected(net, t, h) {
            delta += f64::from(u8::from(self.status(&ov, i, j)))
                - f64::from(u8::from(self.status(net, i, j)));
        }
        out[0] = delta;
    }
}

fn need_directed(a: &Args, net: &Network, want: bool) -> Result<()> {
    if net.directed() != want {
        return Err(a.err(if want {
            "requires a directed network"
        } else {
            "requires an undirected network"
        }));
    }
    Ok(())
}

fn counts(a: &Args, name: &str, min: usize) -> Result<Vec<usize>> {
    let v = a
        .nums(name)?
        .ok_or_else(|| a.err(format!("missing argument `{name}`")))?;
    v.iter()
        .map(|&x| {
            if x.fract() != 0.0 || x < min as f64 {
                Err(a.err(format!(
                    "`{name}` must be integers >= {min}, got {}",
                    fmt_num(x)
                )))
            } else {
                Ok(x as usize)
            }
        })
        .collect()
}

pub(super) fn realize(
    name: &str,
    term: &TermExpr,
    net: &Network,
    _ctx: &mut Ctx,
) -> Result<Option<Box<dyn Term>>> {
    let t: Box<dyn Term> = match name {
        "mutual" => {
            let a = Args::bind(term, &[])?;
            need_directed(&a, net, true)?;
            Box::new(Mutual)
        }
        "triangle" | "triangles" => {
            Args::bind(term, &[])?;
            Box::new(Triangle)
        }
        "ttriple" | "ctriple" => {
            let a = Args::bind(term, &[])?;
            need_directed(&a, net, true)?;
            Box::new(Triples(if name == "ttriple" {
                Triple::Transitive
            } else {
                Triple::Cyclic
            }))
        }
        "cycle" => {
            let a = Args::bind(term, &["k"])?;
            let min = if net.directed() { 2 } else { 3 };
            Box::new(Cycle {
                ks: counts(&a, "k", min)?,
            })
        }
        "degree" => {
            let a = Args::bind(term, &["d"])?;
            need_directed(&a, net, false)?;
            Box::new(Degree {
                ds: counts(&a, "d", 0)?,
                isolates: false,
            })
        }
        "isolates" => {
            Args::bind(term, &[])?;
            Box::new(Degree {
                ds: vec![0],
                isolates: true,
            })
        }
        "transitiveties" | "cyclicalties" => {
            Args::bind(term, &[])?;
            Box::new(TieClosure(if name == "transitiveties" {
                Triple::Transitive
            } else {
                Triple::Cyclic
            }))
        }
        _ => return Ok(None),
    };
    Ok(Some(t))
}
