//! Term operators: terms built from other formulas, either by transforming
//! the network the inner terms see or by transforming their statistics and
//! parameters.

mod linear;
mod network;
mod views;

use nalgebra::DMatrix;

use crate::error::{ErgmError, Result};
use crate::formula::{Expr, Formula, TermExpr};
use crate::net::{NetView, Network};
use crate::terms::{realize_all, Ctx, InteractPolicy, Support, Term, TermList};

impl Term for TermList {
    fn names(&self) -> Vec<String> {
        TermList::names(self)
    }

    fn dim(&self) -> usize {
        TermList::dim(self)
    }

    fn dyad_independent(&self) -> bool {
        TermList::dyad_independent(self)
    }

    fn support(&self) -> Support {
        Support::Both
    }

    fn eval(&self, net: &dyn NetView, out: &mut [f64]) {
        self.eval_into(net, out)
    }

    fn change(&self, net: &dyn NetView, t: usize, h: usize, new: f64, out: &mut [f64]) {
        TermList::change(self, net, t, h, new, out)
    }

    fn dyadwise(&self, t: usize, h: usize, y: f64, out: &mut [f64]) -> bool {
        TermList::dyadwise(self, t, h, y, out)
    }

    fn param_names(&self) -> Vec<String> {
        TermList::param_names(self)
    }

    fn eta(&self, theta: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&TermList::eta(self, theta))
    }

    fn eta_jacobian(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        if self.curved() {
            Some(TermList::eta_jacobian(self, theta))
        } else {
            None
        }
    }

    fn param_bounds(&self) -> Vec<(f64, f64)> {
        TermList::param_bounds(self)
    }
}

/// Split a formula argument into its optional left-hand side and its terms.
pub(crate) fn split_formula(e: &Expr) -> Result<(Option<&Expr>, Formula)> {
    let e = match e {
        Expr::Paren(inner) => inner,
        e => e,
    };
    match e {
        Expr::Formula(lhs, rhs) => Ok((lhs.as_deref(), Formula::from_expr(rhs)?)),
        other => Ok((None, Formula::from_expr(other)?)),
    }
}

pub(crate) fn inner_terms(e: &Expr, net: &Network, ctx: &mut Ctx) -> Result<TermList> {
    let (lhs, f) = split_formula(e)?;
    if lhs.is_some() {
        return Err(ErgmError::Parse {
            pos: 0,
            msg: format!("unexpected left-hand side in `{e}`"),
        });
    }
    Ok(TermList::new(realize_all(&f, net, ctx)?))
}

/// Operator terms; `None` when `name` is not an operator.
pub fn realize(
    name: &str,
    term: &TermExpr,
    net: &Network,
    ctx: &mut Ctx,
) -> Result<Option<Box<dyn Term>>> {
    Ok(Some(match name {
        "F" => network::filter(term, net, ctx)?,
        "Symmetrize" => network::symmetrize(term, net, ctx)?,
        "S" => network::subgraph(term, net, ctx)?,
        "B" => network::binary(term, net, ctx)?,
        "Sum" => linear::sum(term, net, ctx)?,
        "Log" | "Exp" => linear::log_exp(name == "Log", term, net, ctx)?,
        "Prod" => linear::prod(term, net, ctx)?,
        "Parametrize" => linear::parametrize(term, net, ctx)?,
        _ => return Ok(None),
    }))
}

/// Any dyad of the network, for probing per-dyad capabilities.
fn first_dyad(net: &Network) -> Option<(usize, usize)> {
    net.dyads().next().map(|d| (d.tail, d.head))
}

/// Whether `t` provides per-dyad contributions.
fn has_dyadwise(t: &dyn Term, net: &Network) -> bool {
    let mut buf = vec![0.0; t.dim()];
    match first_dyad(net) {
        Some((a, b)) => t.dyadwise(a, b, 0.0, &mut buf),
        None => true,
    }
}

struct Interaction {
    a: Box<dyn Term>,
    b: Box<dyn Term>,
    /// Operands with per-dyad contributions; otherwise change statistics are
    /// multiplied and the statistic is accumulated along an edge sequence.
    dyadwise: bool,
}

impl Interaction {
    fn outer(&self, fa: &[f64], fb: &[f64], scale: f64, out: &mut [f64]) {
        let pa = fa.len();
        for (j, y) in fb.iter().enumerate() {
            for (i, x) in fa.iter().enumerate() {
                out[j * pa + i] += scale * x * y;
            }
        }
    }

    fn bufs(&self) -> (Vec<f64>, Vec<f64>) {
        (vec![0.0; self.a.dim()], vec![0.0; self.b.dim()])
    }
}

impl Term for Interaction {
    fn names(&self) -> Vec<String> {
        let (na, nb) = (self.a.names(), self.b.names());
        nb.iter()
            .flat_map(|y| na.iter().map(move |x| format!("{x}:{y}")))
            .collect()
    }

    fn dyad_independent(&self) -> bool {
        self.dyadwise
    }

    fn support(&self) -> Support {
        match (self.a.support(), self.b.support()) {
            (Support::Both, s) | (s, Support::Both) => s,
            (s, _) => s,
        }
    }

    fn eval(&self, net: &dyn NetView, out: &mut [f64]) {
        out.fill(0.0);
        let (mut fa, mut fb) = self.bufs();
        if self.dyadwise {
            for d in crate::net::DyadIter::new(net.n(), net.directed(), net.bipartite()) {
                let y = net.value(d.tail, d.head);
                self.a.dyadwise(d.tail, d.head, y, &mut fa);
                self.b.dyadwise(d.tail, d.head, y, &mut fb);
                self.outer(&fa, &fb, 1.0, out);
            }
            return;
        }
        let mut edges = Vec::new();
        net.for_each_edge(&mut |t, h, y| edges.push((t, h, y)));
        let Ok(mut partial) = Network::new(net.n(), net.directed(), net.bipartite()) else {
            return;
        };
        for (t, h, y) in edges {
            self.a.change(&partial, t, h, y, &mut fa);
            self.b.change(&partial, t, h, y, &mut fb);
            self.outer(&fa, &fb, 1.0, out);
            partial.set_value(t, h, y);
        }
    }

    fn change(&self, net: &dyn NetView, t: usize, h: usize, new: f64, out: &mut [f64]) {
        out.fill(0.0);
        let (mut fa, mut fb) = self.bufs();
        if self.dyadwise {
            let old = net.value(t, h);
            self.a.dyadwise(t, h, new, &mut fa);
            self.b.dyadwise(t, h, new, &mut fb);
            self.outer(&fa, &fb, 1.0, out);
            self.a.dyadwise(t, h, old, &mut fa);
            self.b.dyadwise(t, h, old, &mut fb);
            self.outer(&fa, &fb, -1.0, out);
        } else {
            self.a.change(net, t, h, new, &mut fa);
            self.b.change(net, t, h, new, &mut fb);
            self.outer(&fa, &fb, 1.0, out);
        }
    }

    fn dyadwise(&self, t: usize, h: usize, y: f64, out: &mut [f64]) -> bool {
        if !self.dyadwise {
            return false;
        }
        out.fill(0.0);
        let (mut fa, mut fb) = self.bufs();
        self.a.dyadwise(t, h, y, &mut fa);
        self.b.dyadwise(t, h, y, &mut fb);
        self.outer(&fa, &fb, 1.0, out);
        true
    }
}

/// `a:b`, with the left factor varying fastest in the statistic order.
pub fn interaction(
    a: &TermExpr,
    b: &TermExpr,
    net: &Network,
    ctx: &mut Ctx,
) -> Result<Box<dyn Term>> {
    let label = format!("{a}:{b}");
    let ta = crate::terms::realize(a, net, ctx)?;
    let tb = crate::terms::realize(b, net, ctx)?;
    for t in [&ta, &tb] {
        let zeros = vec![0.0; t.param_names().len()];
        if t.eta_jacobian(&zeros).is_some() {
            return Err(ErgmError::term(
                label,
                "interactions involving curved terms are not supported",
            ));
        }
    }
    let dyadwise = ta.dyad_independent()
        && tb.dyad_independent()
        && has_dyadwise(ta.as_ref(), net)
        && has_dyadwise(tb.as_ref(), net);
    if !dyadwise {
        let msg = format!("interaction `{label}` involves a dyad-dependent term");
        match ctx.opts.interact_dependent {
            InteractPolicy::Error => return Err(ErgmError::term(
                label,
                "interaction involves a dyad-dependent term; set interact.dependent to allow it",
            )),
            InteractPolicy::Message | InteractPolicy::Warning => ctx.warnings.push(msg),
            InteractPolicy::Silent => {}
        }
    }
    Ok(Box::new(Interaction {
        a: ta,
        b: tb,
        dyadwise,
    }))
}
