//! Dyad-independent terms: each statistic is a sum of per-dyad contributions.

use super::{Args, Ctx, Form, Support, Term};
use crate::error::Result;
use crate::formula::{
    fmt_num, AttrSpec, CellGroup, Expr, Factor, Level, LevelSpec, Levels2Spec, TermExpr,
};
use crate::net::{DyadIter, NetView, Network};

/// Contribution of one dyad: `out += scale * f_th(y)`.
pub(crate) trait Dyadwise: Send + Sync {
    fn add(&self, t: usize, h: usize, y: f64, scale: f64, out: &mut [f64]);

    /// True when `f_th(0) != 0`, so evaluation must visit empty dyads too.
    fn zero_nonzero(&self) -> bool {
        false
    }
}

pub(crate) struct DyadTerm<D> {
    pub names: Vec<String>,
    pub support: Support,
    pub d: D,
}

impl<D: Dyadwise> DyadTerm<D> {
    pub fn boxed(names: Vec<String>, support: Support, d: D) -> Box<dyn Term>
    where
        D: 'static,
    {
        Box::new(DyadTerm { names, support, d })
    }
}

impl<D: Dyadwise> Term for DyadTerm<D> {
    fn names(&self) -> Vec<String> {
        self.names.clone()
    }

    fn dim(&self) -> usize {
        self.names.len()
    }

    fn dyad_independent(&self) -> bool {
        true
    }

    fn support(&self) -> Support {
        self.support
    }

    fn eval(&self, net: &dyn NetView, out: &mut [f64]) {
        out.fill(0.0);
        if self.d.zero_nonzero() {
            for d in DyadIter::new(net.n(), net.directed(), net.bipartite()) {
                self.d
                    .add(d.tail, d.head, net.value(d.tail, d.head), 1.0, out);
            }
        } else {
            net.for_each_edge(&mut |t, h, y| self.d.add(t, h, y, 1.0, out));
        }
    }

    fn change(&self, net: &dyn NetView, t: usize, h: usize, new: f64, out: &mut [f64]) {
        out.fill(0.0);
        let old = net.value(t, h);
        if old != new {
            self.d.add(t, h, new, 1.0, out);
            self.d.add(t, h, old, -1.0, out);
        }
    }

    fn dyadwise(&self, t: usize, h: usize, y: f64, out: &mut [f64]) -> bool {
        out.fill(0.0);
        self.d.add(t, h, y, 1.0, out);
        true
    }
}

struct Edges;

impl Dyadwise for Edges {
    fn add(&self, _t: usize, _h: usize, y: f64, scale: f64, out: &mut [f64]) {
        out[0] += scale * y;
    }
}

struct NodeCov {
    cols: Vec<Vec<f64>>,
    form: Form,
}

impl Dyadwise for NodeCov {
    fn add(&self, t: usize, h: usize, y: f64, scale: f64, out: &mut [f64]) {
        let w = scale * self.form.phi(y);
        if w != 0.0 {
            for (o, x) in out.iter_mut().zip(&self.cols) {
                *o += w * (x[t] + x[h]);
            }
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ends {
    Both,
    Tail,
    Head,
}

/// Endpoint incidence counts per selected category.
struct NodeFactor {
    codes: Vec<Option<usize>>,
    ends: Ends,
    form: Form,
}

impl Dyadwise for NodeFactor {
    fn add(&self, t: usize, h: usize, y: f64, scale: f64, out: &mut [f64]) {
        let w = scale * self.form.phi(y);
        if w == 0.0 {
            return;
        }
        if self.ends != Ends::Head {
            if let Some(k) = self.codes[t] {
                out[k] += w;
            }
        }
        if self.ends != Ends::Tail {
            if let Some(k) = self.codes[h] {
                out[k] += w;
            }
        }
    }
}

struct NodeMatch {
    codes: Vec<Option<usize>>,
    diff: bool,
    form: Form,
}

impl Dyadwise for NodeMatch {
    fn add(&self, t: usize, h: usize, y: f64, scale: f64, out: &mut [f64]) {
        if let (Some(a), Some(b)) = (self.codes[t], self.codes[h]) {
            if a == b {
                out[if self.diff { a } else { 0 }] += scale * self.form.phi(y);
            }
        }
    }
}

struct AbsDiff {
    x: Vec<f64>,
    pow: f64,
    form: Form,
}

impl Dyadwise for AbsDiff {
    fn add(&self, t: usize, h: usize, y: f64, scale: f64, out: &mut [f64]) {
        out[0] += scale * self.form.phi(y) * (self.x[t] - self.x[h]).abs().powf(self.pow);
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Orient {
    /// Unordered level pair on an undirected network with one attribute.
    Sym,
    /// (tail level, head level).
    Single,
    /// Undirected with distinct row and column attributes: both orientations.
    Both,
}

/// Mixing-matrix cells mapped to statistics.
pub(crate) struct Mixing {
    pub rcodes: Vec<Option<usize>>,
    pub ccodes: Vec<Option<usize>>,
    pub cell: Vec<Vec<Option<usize>>>,
    pub orient: Orient,
    pub form: Form,
}

impl Mixing {
    pub fn stat(&self, t: usize, h: usize, out: &mut dyn FnMut(usize)) {
        let look = |a: Option<usize>, b: Option<usize>| match (a, b) {
            (Some(r), Some(c)) => self.cell[r][c],
            _ => None,
        };
        match self.orient {
            Orient::Sym => {
                if let (Some(a), Some(b)) = (self.rcodes[t], self.rcodes[h]) {
                    if let Some(k) = self.cell[a.min(b)][a.max(b)] {
                        out(k);
                    }
                }
            }
            Orient::Single => {
                if let Some(k) = look(self.rcodes[t], self.ccodes[h]) {
                    out(k);
                }
            }
            Orient::Both => {
                if let Some(k) = look(self.rcodes[t], self.ccodes[h]) {
                    out(k);
                }
                if let Some(k) = look(self.rcodes[h], self.ccodes[t]) {
                    out(k);
                }
            }
        }
    }
}

impl Dyadwise for Mixing {
    fn add(&self, t: usize, h: usize, y: f64, scale: f64, out: &mut [f64]) {
        let w = scale * self.form.phi(y);
        if w != 0.0 {
            self.stat(t, h, &mut |k| out[k] += w);
        }
    }
}

/// Dyad-value predicates and transforms usable as statistics and as `B`
/// criteria.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Threshold {
    Sum(f64),
    Nonzero,
    AtLeast(f64),
    AtMost(f64),
    EqualTo(f64, f64),
    GreaterThan(f64),
    SmallerThan(f64),
    InInterval(f64, f64, bool, bool),
}

impl Threshold {
    pub fn value(&self, y: f64) -> f64 {
        let b = |c: bool| f64::from(u8::from(c));
        match *self {
            Threshold::Sum(p) => {
                if p == 1.0 {
                    y
                } else {
                    y.powf(p)
                }
            }
            Threshold::Nonzero => b(y != 0.0),
            Threshold::AtLeast(v) => b(y >= v),
            Threshold::AtMost(v) => b(y <= v),
            Threshold::EqualTo(v, tol) => b((y - v).abs() <= tol),
            Threshold::GreaterThan(v) => b(y > v),
            Threshold::SmallerThan(v) => b(y < v),
            Threshold::InInterval(lo, hi, open_lo, open_hi) => {
                let above = if open_lo { y > lo } else { y >= lo };
                let below = if open_hi { y < hi } else { y <= hi };
                b(above && below)
            }
        }
    }

    pub fn name(&self) -> String {
        match *self {
            Threshold::Sum(p) if p == 1.0 => "sum".into(),
            Threshold::Sum(p) => format!("sum.pow{}", fmt_num(p)),
            Threshold::Nonzero => "nonzero".into(),
            Threshold::AtLeast(v) => format!("atleast.{}", fmt_num(v)),
            Threshold::AtMost(v) => format!("atmost.{}", fmt_num(v)),
            Threshold::EqualTo(v, tol) if tol == 0.0 => format!("equalto.{}", fmt_num(v)),
            Threshold::EqualTo(v, tol) => {
                format!("equalto.{}.pm.{}", fmt_num(v), fmt_num(tol))
            }
            Threshold::GreaterThan(v) => format!("greaterthan.{}", fmt_num(v)),
            Threshold::SmallerThan(v) => format!("smallerthan.{}", fmt_num(v)),
            Threshold::InInterval(lo, hi, ol, oh) => format!(
                "ininterval{}{},{}{}",
                if ol { "(" } else { "[" },
                fmt_num(lo),
                fmt_num(hi),
                if oh { ")" } else { "]" }
            ),
        }
    }

    pub fn parse(name: &str, term: &TermExpr) -> Result<Option<Threshold>> {
        let t = match name {
            "sum" => {
                let a = Args::bind(term, &["pow"])?;
                Threshold::Sum(a.num("pow", 1.0)?)
            }
            "nonzero" => {
                Args::bind(term, &[])?;
                Threshold::Nonzero
            }
            "atleast" | "atmost" | "greaterthan" | "smallerthan" | "lessthan" => {
                let a = Args::bind(term, &["threshold"])?;
                let v = a.num("threshold", 0.0)?;
                match name {
                    "atleast" => Threshold::AtLeast(v),
                    "atmost" => Threshold::AtMost(v),
                    "greaterthan" => Threshold::GreaterThan(v),
                    _ => Threshold::SmallerThan(v),
                }
            }
            "equalto" => {
                let a = Args::bind(term, &["value", "tolerance"])?;
                let tol = a.num("tolerance", 0.0)?;
                if tol < 0.0 {
                    return Err(a.err("tolerance must be nonnegative"));
                }
                Threshold::EqualTo(a.num("value", 0.0)?, tol)
            }
            "ininterval" => {
                let a = Args::bind(term, &["lower", "upper", "open"])?;
                let open = match a.get("open") {
                    None => vec![true, true],
                    Some(e) => crate::formula::Env::new(None).eval(e)?.as_bools()?,
                };
                let (ol, oh) = match open.as_slice() {
                    [o] => (*o, *o),
                    [l, h] => (*l, *h),
                    _ => return Err(a.err("open takes one or two logical values")),
                };
                Threshold::InInterval(
                    a.num("lower", f64::NEG_INFINITY)?,
                    a.num("upper", f64::INFINITY)?,
                    ol,
                    oh,
                )
            }
            _ => return Ok(None),
        };
        Ok(Some(t))
    }
}

impl Dyadwise for Threshold {
    fn add(&self, _t: usize, _h: usize, y: f64, scale: f64, out: &mut [f64]) {
        out[0] += scale * self.value(y);
    }

    fn zero_nonzero(&self) -> bool {
        self.value(0.0) != 0.0
    }
}

fn factor_codes(
    args: &Args,
    f: &Factor,
    spec: &LevelSpec,
) -> Result<(Vec<Level>, Vec<Option<usize>>)> {
    let levels = spec
        .resolve(&f.values)
        .map_err(|e| args.err(e.to_string()))?;
    let codes = f.codes(&levels);
    Ok((levels, codes))
}

fn vertex_levels(n: usize) -> Vec<Level> {
    (1..=n).map(|i| Level::Num(i as f64)).collect()
}

/// One side of a mixing specification.
fn side_attr(e: &Expr) -> Result<AttrSpec> {
    match e {
        Expr::Str(_) | Expr::Ident(_) | Expr::Formula(None, _) => AttrSpec::parse(e),
        Expr::Call(n, _) if n == "c" || n == "COLLAPSE_SMALLEST" || n == "I" => AttrSpec::parse(e),
        Expr::Paren(inner) => side_attr(inner),
        other => Ok(AttrSpec::Expr(other.clone())),
    }
}

struct MixSpec<'a> {
    args: &'a Args,
    row: Factor,
    col: Factor,
    row_levels: LevelSpec,
    col_levels: LevelSpec,
    levels2: Levels2Spec,
    orient: Orient,
    form: Form,
}

/// Resolve a mixing specification into statistic names and a cell table.
fn build_mixing(
    spec: MixSpec<'_>,
    net: &Network,
    name: &dyn Fn(&Level, &Level) -> String,
    group_name: &dyn Fn(&str) -> String,
) -> Result<(Vec<String>, Mixing)> {
    let err = |e: crate::error::ErgmError| spec.args.err(e.to_string());
    let (rvals, cvals): (Vec<Level>, Vec<Level>) = match net.bipartite() {
        Some(b) => (spec.row.values[..b].to_vec(), spec.col.values[b..].to_vec()),
        None => (spec.row.values.clone(), spec.col.values.clone()),
    };
    let rl = spec.row_levels.resolve(&rvals).map_err(err)?;
    let cl = if spec.orient == Orient::Sym {
        rl.clone()
    } else {
        spec.col_levels.resolve(&cvals).map_err(err)?
    };
    let groups: Vec<CellGroup> = spec
        .levels2
        .resolve(&rl, &cl, spec.orient == Orient::Sym)
        .map_err(err)?;
    let mut cell = vec![vec![None; cl.len()]; rl.len()];
    let mut names = Vec::with_capacity(groups.len());
    for (k, g) in groups.iter().enumerate() {
        for &(r, c) in &g.cells {
            cell[r][c] = Some(k);
        }
        names.push(match &g.label {
            Some(l) => group_name(l),
            None => {
                let (r, c) = g.cells[0];
                name(&rl[r], &cl[c])
            }
        });
    }
    Ok((
        names,
        Mixing {
            rcodes: spec.row.codes(&rl),
            ccodes: spec.col.codes(&cl),
            cell,
            orient: spec.orient,
            form: spec.form,
        },
    ))
}

/// Mixing cells of a factor, shared with the block constraint.
pub(crate) fn block_mixing(
    args: &Args,
    net: &Network,
    attr: &AttrSpec,
    levels: LevelSpec,
    levels2: Levels2Spec,
) -> Result<Mixing> {
    let f = attr.factor(net)?;
    let orient = if net.directed() || net.bipartite().is_some() {
        Orient::Single
    } else {
        Orient::Sym
    };
    let spec = MixSpec {
        args,
        row: f.clone(),
        col: f,
        row_levels: levels.clone(),
        col_levels: levels,
        levels2,
        orient,
        form: Form::Sum,
    };
    Ok(build_mixing(spec, net, &|_, _| String::new(), &|_| String::new())?.1)
}

pub(super) fn realize(
    name: &str,
    term: &TermExpr,
    net: &Network,
    ctx: &mut Ctx,
) -> Result<Option<Box<dyn Term>>> {
    let valued = ctx.valued;
    let t: Box<dyn Term> = match name {
        "edges" => {
            Args::bind(term, &[])?;
            DyadTerm::boxed(vec!["edges".into()], Support::Binary, Edges)
        }
        "nodecov" => {
            let a = Args::bind(term, &["attr", "form"])?;
            let form = a.form(valued)?;
            let cov = a.attr("attr")?.covariate(net, &mut ctx.warnings)?;
            let names = cov
                .names
                .iter()
                .map(|c| format!("nodecov{}.{c}", form.infix()))
                .collect();
            DyadTerm::boxed(
                names,
                Support::Both,
                NodeCov {
                    cols: cov.columns,
                    form,
                },
            )
        }
        "nodefactor" | "nodeifactor" | "nodeofactor" => {
            let a = Args::bind(term, &["attr", "levels", "form"])?;
            let ends = match name {
                "nodefactor" => Ends::Both,
                "nodeifactor" => Ends::Head,
                _ => Ends::Tail,
            };
            if ends != Ends::Both && !net.directed() {
                return Err(a.err("requires a directed network"));
            }
            let form = a.form(valued)?;
            let attr = a.attr("attr")?;
            let f = attr.factor(net)?;
            let spec = a.levels("levels", LevelSpec::Indices(vec![-1]))?;
            let (levels, codes) = factor_codes(&a, &f, &spec)?;
            let names = levels
                .iter()
                .map(|l| format!("{name}{}.{}.{}", form.infix(), f.name, l.label()))
                .collect();
            DyadTerm::boxed(names, Support::Both, NodeFactor { codes, ends, form })
        }
        "sender" | "receiver" | "sociality" => {
            let a = Args::bind(term, &["nodes", "form"])?;
            let ends = match name {
                "sender" => Ends::Tail,
                "receiver" => Ends::Head,
                _ => Ends::Both,
            };
            if ends != Ends::Both && !net.directed() {
                return Err(a.err("requires a directed network"));
            }
            if ends == Ends::Both && net.directed() {
                return Err(a.err("requires an undirected network"));
            }
            let form = a.form(valued)?;
            let ids = vertex_levels(net.n());
            let spec = a.levels("nodes", LevelSpec::Indices(vec![-1]))?;
            let chosen = spec.resolve(&ids).map_err(|e| a.err(e.to_string()))?;
            let codes = ids
                .iter()
                .map(|v| chosen.iter().position(|c| c.matches(v)))
                .collect();
            let names = chosen
                .iter()
                .map(|l| format!("{name}{}{}", form.infix(), l.label()))
                .collect();
            DyadTerm::boxed(names, Support::Both, NodeFactor { codes, ends, form })
        }
        "nodematch" => {
            let a = Args::bind(term, &["attr", "diff", "levels", "form"])?;
            let form = a.form(valued)?;
            let diff = a.flag("diff", false)?;
            let f = a.attr("attr")?.factor(net)?;
            let spec = a.levels("levels", LevelSpec::All)?;
            let (levels, codes) = factor_codes(&a, &f, &spec)?;
            let base = format!("nodematch{}.{}", form.infix(), f.name);
            let names = if diff {
                levels
                    .iter()
                    .map(|l| format!("{base}.{}", l.label()))
                    .collect()
            } else {
                vec![base]
            };
            DyadTerm::boxed(names, Support::Both, NodeMatch { codes, diff, form })
        }
        "absdiff" => {
            let a = Args::bind(term, &["attr", "pow", "form"])?;
            let form = a.form(valued)?;
            let pow = a.num("pow", 1.0)?;
            let cov = a.attr("attr")?.covariate(net, &mut ctx.warnings)?;
            if cov.columns.len() != 1 {
                return Err(a.err("needs a single numeric attribute"));
            }
            let pow_tag = if pow == 1.0 {
                String::new()
            } else {
                fmt_num(pow)
            };
            let names = vec![format!("absdiff{pow_tag}{}.{}", form.infix(), cov.names[0])];
            DyadTerm::boxed(
                names,
                Support::Both,
                AbsDiff {
                    x: cov.columns.into_iter().next().expect("one column"),
                    pow,
                    form,
                },
            )
        }
        "nodemix" => {
            let a = Args::bind(term, &["attr", "levels", "levels2", "form"])?;
            let form = a.form(valued)?;
            let f = a.attr("attr")?.factor(net)?;
            let levels = a.levels("levels", LevelSpec::All)?;
            let orient = if net.directed() || net.bipartite().is_some() {
                Orient::Single
            } else {
                Orient::Sym
            };
            let label = f.name.clone();
            let spec = MixSpec {
                args: &a,
                row: f.clone(),
                col: f,
                row_levels: levels.clone(),
                col_levels: levels,
                levels2: a.levels2("levels2", Levels2Spec::Indices(vec![-1]))?,
                orient,
                form,
            };
            let infix = form.infix();
            let (names, mix) = build_mixing(
                spec,
                net,
                &|r, c| format!("mix{infix}.{label}.{}.{}", r.label(), c.label()),
                &|g| format!("mix{infix}.{label}.{g}"),
            )?;
            DyadTerm::boxed(names, Support::Both, mix)
        }
        "mm" => {
            let a = Args::bind(term, &["attrs", "levels", "levels2", "form"])?;
            let form = a.form(valued)?;
            let (rspec, cspec, two_sided) = match a.required("attrs")? {
                Expr::Formula(Some(l), r) => (side_attr(l)?, side_attr(r)?, true),
                e => {
                    let s = side_attr(e)?;
                    (s.clone(), s, false)
                }
            };
            let (rl, cl) = match a.get("levels") {
                Some(Expr::Formula(Some(l), r)) => (LevelSpec::parse(l)?, LevelSpec::parse(r)?),
                _ => {
                    let s = a.levels("levels", LevelSpec::All)?;
                    (s.clone(), s)
                }
            };
            let orient = if net.directed() || net.bipartite().is_some() {
                Orient::Single
            } else if two_sided {
                Orient::Both
            } else {
                Orient::Sym
            };
            let row = rspec.factor(net)?;
            let col = cspec.factor(net)?;
            let (rn, cn) = (row.name.clone(), col.name.clone());
            let spec = MixSpec {
                args: &a,
                row,
                col,
                row_levels: rl,
                col_levels: cl,
                levels2: a.levels2("levels2", Levels2Spec::Indices(vec![-1]))?,
                orient,
                form,
            };
            let infix = form.infix();
            let (names, mix) = build_mixing(
                spec,
                net,
                &|r, c| format!("mm{infix}[{rn}={},{cn}={}]", r.label(), c.label()),
                &|g| format!("mm{infix}[{g}]"),
            )?;
            DyadTerm::boxed(names, Support::Both, mix)
        }
        _ => match Threshold::parse(name, term)? {
            Some(th) => {
                let names = vec![th.name()];
                DyadTerm::boxed(names, Support::Both, th)
            }
            None => return Ok(None),
        },
    };
    Ok(Some(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::AttrColumn;
    use crate::terms::testutil::{check_changes, random_net, random_valued};
    use crate::terms::{Model, TermOptions};

    fn stats(net: &Network, text: &str) -> (Vec<String>, Vec<f64>) {
        let m = Model::parse(text, net, false, TermOptions::default()).unwrap();
        (m.names(), m.eval(net))
    }

    #[test]
    fn covariates_count_by_hand() {
        let mut net = Network::new(4, false, None).unwrap();
        net.set_attr("x", AttrColumn::Numeric(vec![1.0, 2.0, 3.0, 5.0]))
            .unwrap();
        net.set_attr(
            "c",
            AttrColumn::Categorical(vec!["a".into(), "a".into(), "b".into(), "b".into()]),
        )
        .unwrap();
        for (t, h) in [(0, 1), (1, 2), (2, 3)] {
            net.set_value(t, h, 1.0);
        }
        let (names, s) = stats(
            &net,
            "edges + nodecov(\"x\") + absdiff(\"x\") + nodematch(\"c\") + nodefactor(\"c\", levels=TRUE)",
        );
        assert_eq!(
            names,
            vec![
                "edges",
                "nodecov.x",
                "absdiff.x",
                "nodematch.c",
                "nodefactor.c.a",
                "nodefactor.c.b"
            ]
        );
        assert_eq!(
            s,
            vec![3.0, 3.0 + 5.0 + 8.0, 1.0 + 1.0 + 2.0, 2.0, 3.0, 3.0]
        );
        let (names, s) = stats(&net, "nodemix(\"c\", levels2=TRUE)");
        assert_eq!(names, vec!["mix.c.a.a", "mix.c.a.b", "mix.c.b.b"]);
        assert_eq!(s, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn nodecov_is_degree_weighted() {
        let net = random_net(3, 9, false, 0.4);
        let (_, s) = stats(&net, "nodecov(\"x\")");
        let x = match net.attr("x").unwrap() {
            AttrColumn::Numeric(v) => v.clone(),
            _ => unreachable!(),
        };
        let want: f64 = (0..9).map(|i| net.out_degree(i) as f64 * x[i]).sum();
        assert_eq!(s[0], want);
        let (_, one) = stats(&net, "nodecov(~1) + edges");
        assert_eq!(one[0], 2.0 * one[1]);
    }

    #[test]
    fn full_mixing_partitions_edges() {
        for directed in [false, true] {
            let net = random_net(5, 10, directed, 0.35);
            let (_, s) = stats(&net, "nodemix(\"c\", levels2=NULL)");
            let (_, e) = stats(&net, "edges");
            assert_eq!(s.iter().sum::<f64>(), e[0]);
            let (_, s) = stats(&net, "mm(\"b\" ~ \"c\", levels2=NULL)");
            let want = if directed { e[0] } else { 2.0 * e[0] };
            assert_eq!(s.iter().sum::<f64>(), want);
        }
    }

    #[test]
    fn directed_factor_names_and_counts() {
        let net = random_net(9, 8, true, 0.3);
        let (names, s) = stats(&net, "nodeofactor(\"c\", levels=TRUE) + nodeifactor(\"c\", levels=TRUE) + nodefactor(\"c\", levels=TRUE)");
        assert_eq!(names[0], "nodeofactor.c.a");
        assert_eq!(names[3], "nodeifactor.c.a");
        for k in 0..3 {
            assert_eq!(s[k] + s[k + 3], s[k + 6]);
        }
        let (names, s) = stats(&net, "sender + receiver(nodes=1:2)");
        assert_eq!(names[0], "sender2");
        assert_eq!(names[7], "receiver1");
        assert_eq!(s[0], net.out_degree(1) as f64);
        assert_eq!(s[7], net.in_degree(0) as f64);
    }

    #[test]
    fn threshold_terms() {
        let mut net = Network::new(3, true, None).unwrap();
        net.set_value(0, 1, 3.0);
        net.set_value(1, 0, 1.0);
        net.set_value(2, 0, 2.0);
        let m = Model::parse(
            "sum + nonzero + atleast(2) + atmost(1) + equalto(2) + equalto(2, 1) + greaterthan(1) + smallerthan(3) + ininterval(1, 3, c(FALSE, TRUE))",
            &net,
            true,
            TermOptions::default(),
        )
        .unwrap();
        assert_eq!(
            m.eval(&net),
            vec![6.0, 3.0, 2.0, 4.0, 1.0, 3.0, 2.0, 5.0, 2.0]
        );
        assert_eq!(m.names()[8], "ininterval[1,3)");
    }

    #[test]
    fn changes_match_differences() {
        for (seed, directed) in [(1, false), (2, true)] {
            let net = random_net(seed, 7, directed, 0.4);
            check_changes(
                &net,
                "edges + nodecov(\"x\") + nodefactor(\"c\") + nodematch(\"c\", diff=TRUE) + absdiff(\"x\", pow=2) + nodemix(\"c\") + mm(~b, levels2=NULL)",
                false,
                &[0.0, 1.0],
            );
            let v = random_valued(seed, 6, directed, 3);
            check_changes(
                &v,
                "sum + nonzero + atmost(1) + equalto(0) + nodecov(\"x\", form=\"nonzero\") + nodematch(\"c\") + mm(\"c\")",
                true,
                &[0.0, 1.0, 2.0, 3.0],
            );
        }
    }
}
