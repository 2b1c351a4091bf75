//! Operators that evaluate inner terms on a transformed network.

use super::views::{BinView, FilterView, SubView, SymView};
use super::{first_dyad, has_dyadwise, inner_terms, split_formula};
use crate::error::{ErgmError, Result};
use crate::formula::{BinOp, Env, Expr, UnOp};
use crate::net::{induced_subgraph, symmetrize_net, NetView, Network, SymmetrizeRule};
use crate::terms::{realize_all, Args, Ctx, Support, Term, TermList};

fn prefixed(prefix: &str, inner: &TermList) -> Vec<String> {
    inner
        .names()
        .iter()
        .map(|n| format!("{prefix}~{n}"))
        .collect()
}

/// Map a base dyad's contribution through an optional per-dyad map.
fn dyadwise_or_zero(
    inner: &TermList,
    mapped: Option<(usize, usize)>,
    y: f64,
    out: &mut [f64],
) -> bool {
    match mapped {
        Some((a, b)) => inner.dyadwise(a, b, y, out),
        None => {
            out.fill(0.0);
            true
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Cmp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    fn from_op(op: &BinOp) -> Option<Cmp> {
        Some(match op {
            BinOp::Eq => Cmp::Eq,
            BinOp::Ne => Cmp::Ne,
            BinOp::Lt => Cmp::Lt,
            BinOp::Le => Cmp::Le,
            BinOp::Gt => Cmp::Gt,
            BinOp::Ge => Cmp::Ge,
            _ => return None,
        })
    }

    fn holds(self, a: f64, b: f64) -> bool {
        match self {
            Cmp::Eq => a == b,
            Cmp::Ne => a != b,
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Gt => a > b,
            Cmp::Ge => a >= b,
        }
    }
}

struct Filtered {
    prefix: String,
    inner: TermList,
    keep: Vec<bool>,
    n: usize,
}

impl Filtered {
    fn kept(&self, t: usize, h: usize) -> bool {
        self.keep[t * self.n + h]
    }
}

impl Term for Filtered {
    fn names(&self) -> Vec<String> {
        prefixed(&self.prefix, &self.inner)
    }

    fn dyad_independent(&self) -> bool {
        self.inner.dyad_independent()
    }

    fn support(&self) -> Support {
        Support::Both
    }

    fn eval(&self, net: &dyn NetView, out: &mut [f64]) {
        self.inner.eval_into(
            &FilterView {
                base: net,
                keep: &self.keep,
            },
            out,
        )
    }

    fn change(&self, net: &dyn NetView, t: usize, h: usize, new: f64, out: &mut [f64]) {
        if !self.kept(t, h) {
            out.fill(0.0);
            return;
        }
        let view = FilterView {
            base: net,
            keep: &self.keep,
        };
        self.inner.change(&view, t, h, new, out)
    }

    fn dyadwise(&self, t: usize, h: usize, y: f64, out: &mut [f64]) -> bool {
        dyadwise_or_zero(&self.inner, self.kept(t, h).then_some((t, h)), y, out)
    }
}

/// Dyad mask from a single-statistic dyad-independent term evaluated at a
/// tie, compared against a constant.
fn dyad_mask(
    label: &str,
    filter: &Expr,
    cmp: Cmp,
    rhs: f64,
    net: &Network,
    ctx: &mut Ctx,
) -> Result<Vec<bool>> {
    let f = crate::formula::Formula::from_expr(filter)?;
    let terms = ctx.with_valued(false, |c| realize_all(&f, net, c))?;
    let term = TermList::new(terms);
    if term.dim() != 1 || !term.dyad_independent() || !has_dyadwise(&term, net) {
        return Err(ErgmError::term(
            label,
            "the filter must be one dyad-independent statistic",
        ));
    }
    let n = net.n();
    let mut keep = vec![false; n * n];
    let mut v = [0.0];
    for d in net.dyads() {
        term.dyadwise(d.tail, d.head, 1.0, &mut v);
        let k = cmp.holds(v[0], rhs);
        keep[d.tail * n + d.head] = k;
        if !net.directed() {
            keep[d.head * n + d.tail] = k;
        }
    }
    Ok(keep)
}

pub(super) fn filter(
    term: &crate::formula::TermExpr,
    net: &Network,
    ctx: &mut Ctx,
) -> Result<Box<dyn Term>> {
    let a = Args::bind(term, &["formula", "filter"])?;
    let inner = inner_terms(a.required("formula")?, net, ctx)?;
    let spec = a.required("filter")?.strip_tilde().clone();
    let (fexpr, cmp, rhs) = match &spec {
        Expr::Unary(UnOp::Not, x) => ((**x).clone(), Cmp::Eq, 0.0),
        Expr::Binary(op, l, r) if Cmp::from_op(op).is_some() => {
            let rhs = Env::new(None)
                .eval(r)
                .and_then(|v| v.as_scalar())
                .map_err(|e| a.err(format!("filter comparison needs a numeric constant: {e}")))?;
            ((**l).clone(), Cmp::from_op(op).expect("checked"), rhs)
        }
        other => (other.clone(), Cmp::Ne, 0.0),
    };
    let keep = dyad_mask("F", &fexpr, cmp, rhs, net, ctx)?;
    Ok(Box::new(Filtered {
        prefix: format!("F({spec})"),
        inner,
        keep,
        n: net.n(),
    }))
}

struct Symmetrized {
    rule: SymmetrizeRule,
    inner: TermList,
}

impl Term for Symmetrized {
    fn names(&self) -> Vec<String> {
        prefixed(&format!("Symmetrize({})", self.rule.name()), &self.inner)
    }

    fn dyad_independent(&self) -> bool {
        false
    }

    fn support(&self) -> Support {
        Support::Both
    }

    fn eval(&self, net: &dyn NetView, out: &mut [f64]) {
        self.inner.eval_into(
            &SymView {
                base: net,
                rule: self.rule,
            },
            out,
        )
    }

    fn change(&self, net: &dyn NetView, t: usize, h: usize, new: f64, out: &mut [f64]) {
        let view = SymView {
            base: net,
            rule: self.rule,
        };
        let old = view.pair(t, h);
        let back = net.value(h, t);
        let now = if t < h {
            self.rule.apply(new, back)
        } else {
            self.rule.apply(back, new)
        };
        if now == old {
            out.fill(0.0);
        } else {
            self.inner.change(&view, t.min(h), t.max(h), now, out)
        }
    }
}

pub(super) fn symmetrize(
    term: &crate::formula::TermExpr,
    net: &Network,
    ctx: &mut Ctx,
) -> Result<Box<dyn Term>> {
    let a = Args::bind(term, &["formula", "rule"])?;
    let rule: SymmetrizeRule = a.string("rule", "weak")?.parse()?;
    if !net.directed() {
        return Err(a.err("the network is already undirected"));
    }
    let sym = symmetrize_net(net, rule)?;
    let inner = inner_terms(a.required("formula")?, &sym, ctx)?;
    Ok(Box::new(Symmetrized { rule, inner }))
}

struct Subgraph {
    prefix: String,
    inner: TermList,
    idx: Vec<usize>,
    inv: Vec<Option<usize>>,
    bipartite: Option<usize>,
    directed: bool,
}

impl Subgraph {
    fn map(&self, t: usize, h: usize) -> Option<(usize, usize)> {
        let (a, b) = (self.inv[t]?, self.inv[h]?);
        match self.bipartite {
            None if self.directed => Some((a, b)),
            None => Some((a.min(b), a.max(b))),
            Some(k) if a < k && b >= k => Some((a, b)),
            Some(k) if !self.directed && b < k && a >= k => Some((b, a)),
            Some(_) => None,
        }
    }

    fn view<'a>(&'a self, base: &'a dyn NetView) -> SubView<'a> {
        SubView {
            base,
            idx: &self.idx,
            inv: &self.inv,
            bipartite: self.bipartite,
        }
    }
}

impl Term for Subgraph {
    fn names(&self) -> Vec<String> {
        prefixed(&self.prefix, &self.inner)
    }

    fn dyad_independent(&self) -> bool {
        self.inner.dyad_independent()
    }

    fn support(&self) -> Support {
        Support::Both
    }

    fn eval(&self, net: &dyn NetView, out: &mut [f64]) {
        self.inner.eval_into(&self.view(net), out)
    }

    fn change(&self, net: &dyn NetView, t: usize, h: usize, new: f64, out: &mut [f64]) {
        match self.map(t, h) {
            Some((a, b)) => self.inner.change(&self.view(net), a, b, new, out),
            None => out.fill(0.0),
        }
    }

    fn dyadwise(&self, t: usize, h: usize, y: f64, out: &mut [f64]) -> bool {
        dyadwise_or_zero(&self.inner, self.map(t, h), y, out)
    }
}

/// Vertex selection from a logical mask or 1-based indices.
fn select(e: &Expr, net: &Network) -> Result<Vec<usize>> {
    let n = net.n();
    let v = Env::new(Some(net)).eval(e)?;
    let bad = || ErgmError::term("S", format!("`{e}` does not select vertices"));
    match v.atom() {
        Some(crate::formula::Atom::Bool(_)) => {
            let mask = v.as_bools()?;
            if mask.is_empty() || n % mask.len() != 0 {
                return Err(bad());
            }
            Ok((0..n).filter(|&i| mask[i % mask.len()]).collect())
        }
        Some(crate::formula::Atom::Num(ix)) => {
            let mut out = Vec::with_capacity(ix.len());
            for &x in ix {
                if x.fract() != 0.0 || x < 1.0 || x > n as f64 {
                    return Err(bad());
                }
                out.push(x as usize - 1);
            }
            out.sort_unstable();
            out.dedup();
            Ok(out)
        }
        _ => Err(bad()),
    }
}

pub(super) fn subgraph(
    term: &crate::formula::TermExpr,
    net: &Network,
    ctx: &mut Ctx,
) -> Result<Box<dyn Term>> {
    let a = Args::bind(term, &["formula", "attrs"])?;
    let sel = a.required("attrs")?;
    let (tails, heads, prefix) = match sel {
        Expr::Formula(Some(l), r) => (select(l, net)?, select(r, net)?, format!("S({l},{r})")),
        other => {
            let e = other.strip_tilde();
            let s = select(e, net)?;
            (s.clone(), s, format!("S({e})"))
        }
    };
    let sub = induced_subgraph(net, &tails, &heads)?;
    let inner = inner_terms(a.required("formula")?, &sub, ctx)?;
    let (idx, bipartite) = if tails == heads {
        (tails, None)
    } else {
        let b = tails.len();
        (tails.into_iter().chain(heads).collect(), Some(b))
    };
    let mut inv = vec![None; net.n()];
    for (k, &v) in idx.iter().enumerate() {
        inv[v] = Some(k);
    }
    Ok(Box::new(Subgraph {
        prefix,
        inner,
        idx,
        inv,
        bipartite: bipartite.or(sub.bipartite()),
        directed: net.directed(),
    }))
}

enum BForm {
    Sum,
    Nonzero,
    Pred(Box<dyn Term>),
}

struct Binarized {
    prefix: String,
    inner: TermList,
    form: BForm,
    directed: bool,
}

impl Binarized {
    fn keep(&self, t: usize, h: usize, y: f64) -> bool {
        if y == 0.0 {
            return false;
        }
        match &self.form {
            BForm::Sum | BForm::Nonzero => true,
            BForm::Pred(p) => {
                let (t, h) = if self.directed {
                    (t, h)
                } else {
                    (t.min(h), t.max(h))
                };
                let mut v = [0.0];
                p.dyadwise(t, h, y, &mut v);
                v[0] == 1.0
            }
        }
    }

    /// Inner contributions of a tie at (t, h), for the `sum` form.
    fn unit(&self, t: usize, h: usize, out: &mut [f64]) {
        self.inner.dyadwise(t, h, 1.0, out);
    }
}

impl Term for Binarized {
    fn names(&self) -> Vec<String> {
        prefixed(&self.prefix, &self.inner)
    }

    fn dyad_independent(&self) -> bool {
        self.inner.dyad_independent()
    }

    fn support(&self) -> Support {
        Support::Valued
    }

    fn eval(&self, net: &dyn NetView, out: &mut [f64]) {
        if let BForm::Sum = self.form {
            out.fill(0.0);
            let mut buf = vec![0.0; out.len()];
            net.for_each_edge(&mut |t, h, y| {
                self.unit(t, h, &mut buf);
                for (o, b) in out.iter_mut().zip(&buf) {
                    *o += y * b;
                }
            });
            return;
        }
        let pred = |t: usize, h: usize, y: f64| self.keep(t, h, y);
        self.inner.eval_into(
            &BinView {
                base: net,
                pred: &pred,
            },
            out,
        )
    }

    fn change(&self, net: &dyn NetView, t: usize, h: usize, new: f64, out: &mut [f64]) {
        let old = net.value(t, h);
        if let BForm::Sum = self.form {
            self.unit(t, h, out);
            for o in out.iter_mut() {
                *o *= new - old;
            }
            return;
        }
        let (was, now) = (self.keep(t, h, old), self.keep(t, h, new));
        if was == now {
            out.fill(0.0);
            return;
        }
        let pred = |t: usize, h: usize, y: f64| self.keep(t, h, y);
        let view = BinView {
            base: net,
            pred: &pred,
        };
        self.inner
            .change(&view, t, h, f64::from(u8::from(now)), out)
    }

    fn dyadwise(&self, t: usize, h: usize, y: f64, out: &mut [f64]) -> bool {
        if !self.inner.dyadwise(t, h, 1.0, out) {
            return false;
        }
        let w = match self.form {
            BForm::Sum => y,
            _ => f64::from(u8::from(self.keep(t, h, y))),
        };
        for o in out.iter_mut() {
            *o *= w;
        }
        true
    }
}

pub(super) fn binary(
    term: &crate::formula::TermExpr,
    net: &Network,
    ctx: &mut Ctx,
) -> Result<Box<dyn Term>> {
    let a = Args::bind(term, &["formula", "form"])?;
    let inner = ctx.with_valued(false, |c| inner_terms(a.required("formula")?, net, c))?;
    let (form, label) = match a.get("form") {
        None => (BForm::Sum, "sum".to_string()),
        Some(Expr::Str(s)) if s == "sum" => (BForm::Sum, s.clone()),
        Some(Expr::Str(s)) if s == "nonzero" => (BForm::Nonzero, s.clone()),
        Some(Expr::Str(s)) => {
            return Err(a.err(format!(
                "form must be \"sum\", \"nonzero\" or a formula, not `{s}`"
            )))
        }
        Some(e) => {
            let (_, f) = split_formula(e)?;
            let mut terms = ctx.with_valued(true, |c| realize_all(&f, net, c))?;
            let bad =
                || a.err("the form term must be one dyad-independent 0/1 statistic that is 0 at 0");
            if terms.len() != 1 || terms[0].dim() != 1 || !terms[0].dyad_independent() {
                return Err(bad());
            }
            let p = terms.remove(0);
            if let Some((t, h)) = first_dyad(net) {
                let mut v = [0.0];
                if !p.dyadwise(t, h, 0.0, &mut v) || v[0] != 0.0 {
                    return Err(bad());
                }
                for y in [0.5, 1.0, 2.0, 3.0] {
                    p.dyadwise(t, h, y, &mut v);
                    if v[0] != 0.0 && v[0] != 1.0 {
                        return Err(bad());
                    }
                }
            }
            (BForm::Pred(p), e.strip_tilde().to_string())
        }
    };
    if let BForm::Sum = form {
        if !inner.dyad_independent() || !has_dyadwise(&inner, net) {
            return Err(a.err("form \"sum\" needs dyad-independent inner terms"));
        }
    }
    Ok(Box::new(Binarized {
        prefix: format!("B({label})"),
        inner,
        form,
        directed: net.directed(),
    }))
}

#[cfg(test)]
mod tests {
    use crate::net::{AttrColumn, Network};
    use crate::terms::testutil::{check_changes, random_net, random_valued};
    use crate::terms::{Model, TermOptions};

    fn stats(net: &Network, text: &str, valued: bool) -> Vec<f64> {
        Model::parse(text, net, valued, TermOptions::default())
            .unwrap()
            .eval(net)
    }

    fn names(net: &Network, text: &str, valued: bool) -> Vec<String> {
        Model::parse(text, net, valued, TermOptions::default())
            .unwrap()
            .names()
    }

    #[test]
    fn filter_semantics() {
        let net = random_net(2, 9, true, 0.4);
        let s = stats(
            &net,
            "F(~edges, ~absdiff(\"x\") < 1) + nodematch(\"x\") + F(~edges, ~nodematch(\"c\")) + F(~edges, ~!nodematch(\"c\")) + edges",
            false,
        );
        assert_eq!(s[0], s[1]);
        assert_eq!(s[2] + s[3], s[4]);
        assert_eq!(
            names(
                &net,
                "F(~edges + mutual, ~nodefactor(\"c\", levels=\"a\")==2)",
                false
            ),
            vec![
                "F(nodefactor(\"c\",levels=\"a\")==2)~edges",
                "F(nodefactor(\"c\",levels=\"a\")==2)~mutual"
            ]
        );
        assert!(Model::parse("F(~edges, ~triangle)", &net, false, TermOptions::default()).is_err());
    }

    #[test]
    fn symmetrize_counts_partition_edges() {
        for seed in 0..4 {
            let net = random_net(seed, 8, true, 0.35);
            let s = stats(
                &net,
                "Symmetrize(~edges, \"strong\") + Symmetrize(~edges, \"weak\") + edges + mutual",
                false,
            );
            assert_eq!(s[0] + s[1], s[2]);
            assert_eq!(s[0], s[3]);
        }
        let net = random_net(0, 5, false, 0.3);
        assert!(Model::parse("Symmetrize(~edges)", &net, false, TermOptions::default()).is_err());
    }

    #[test]
    fn subgraph_selections() {
        let net = random_net(7, 10, true, 0.3);
        let all = stats(
            &net,
            "S(~edges + mutual + ttriple, ~x > 0) + edges + mutual + ttriple",
            false,
        );
        assert_eq!(all[..3], all[3..]);
        let m = Model::parse(
            "S(~cycle(4), (c == \"a\") ~ (c != \"a\"))",
            &net,
            false,
            TermOptions::default(),
        )
        .unwrap();
        assert_eq!(m.names(), vec!["S((c==\"a\"),(c!=\"a\"))~cycle4"]);
    }

    #[test]
    fn binary_forms() {
        let net = random_valued(4, 7, true, 3);
        let s = stats(
            &net,
            "B(~edges, ~atleast(2)) + atleast(2) + B(~edges, \"nonzero\") + nonzero + B(~edges) + sum + B(~mutual, ~nonzero)",
            true,
        );
        assert_eq!(s[0], s[1]);
        assert_eq!(s[2], s[3]);
        assert_eq!(s[4], s[5]);
        assert_eq!(
            names(&net, "B(~edges, ~atleast(1))", true),
            vec!["B(atleast(1))~edges"]
        );
        assert!(Model::parse("B(~triangle)", &net, true, TermOptions::default()).is_err());
        assert!(Model::parse("B(~edges, ~sum)", &net, true, TermOptions::default()).is_err());
    }

    #[test]
    fn operator_changes() {
        for seed in 0..2 {
            let mut d = random_net(seed, 7, true, 0.35);
            d.set_attr(
                "k",
                AttrColumn::Numeric((0..7).map(|i| (i % 2) as f64).collect()),
            )
            .unwrap();
            check_changes(
                &d,
                "F(~edges + ttriple, ~nodematch(\"c\")) + Symmetrize(~triangle + edges, \"weak\") \
                 + S(~mutual + edges, ~c != \"b\") + S(~cycle(4) + edges, (k == 1) ~ (k == 0))",
                false,
                &[0.0, 1.0],
            );
            let v = random_valued(seed, 6, true, 3);
            check_changes(
                &v,
                "B(~edges + nodematch(\"c\")) + B(~mutual + ttriple, ~atleast(2)) + B(~cycle(3), \"nonzero\")",
                true,
                &[0.0, 1.0, 2.0, 3.0],
            );
        }
    }
}
