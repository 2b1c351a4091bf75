//! Operators on statistics and parameters: Sum, Log, Exp, Prod, Parametrize.

use nalgebra::DMatrix;

use super::{has_dyadwise, inner_terms, split_formula};
use crate::error::{ErgmError, Result};
use crate::formula::{Env, Expr, TermExpr, Value};
use crate::net::{NetView, Network};
use crate::terms::{realize_all, Args, Ctx, Support, Term, TermList};

/// Linear combination `sum_k A_k g_k`.
struct Summed {
    names: Vec<String>,
    parts: Vec<(Box<dyn Term>, DMatrix<f64>)>,
    dyadwise: bool,
}

impl Summed {
    fn combine(&self, out: &mut [f64], mut part: impl FnMut(&dyn Term, &mut [f64])) {
        out.fill(0.0);
        for (t, a) in &self.parts {
            let mut buf = vec![0.0; t.dim()];
            part(t.as_ref(), &mut buf);
            for r in 0..a.nrows() {
                out[r] += (0..a.ncols()).map(|c| a[(r, c)] * buf[c]).sum::<f64>();
            }
        }
    }
}

impl Term for Summed {
    fn names(&self) -> Vec<String> {
        self.names.clone()
    }

    fn dyad_independent(&self) -> bool {
        self.parts.iter().all(|(t, _)| t.dyad_independent())
    }

    fn support(&self) -> Support {
        Support::Both
    }

    fn eval(&self, net: &dyn NetView, out: &mut [f64]) {
        self.combine(out, |t, buf| t.eval(net, buf))
    }

    fn change(&self, net: &dyn NetView, t: usize, h: usize, new: f64, out: &mut [f64]) {
        self.combine(out, |term, buf| term.change(net, t, h, new, buf))
    }

    fn dyadwise(&self, t: usize, h: usize, y: f64, out: &mut [f64]) -> bool {
        if !self.dyadwise {
            return false;
        }
        self.combine(out, |term, buf| {
            term.dyadwise(t, h, y, buf);
        });
        true
    }
}

/// Weight matrix from a formula's left-hand side, for `p` inner statistics.
fn weights(lhs: Option<&Expr>, p: usize) -> Result<DMatrix<f64>> {
    let Some(lhs) = lhs else {
        return Ok(DMatrix::identity(p, p));
    };
    let bad = |msg: String| ErgmError::term("Sum", msg);
    let v = Env::new(None).eval(lhs)?;
    if let Some(crate::formula::Atom::Str(s)) = v.atom() {
        return match s.as_slice() {
            [s] if s == "sum" => Ok(DMatrix::from_element(1, p, 1.0)),
            [s] if s == "mean" => Ok(DMatrix::from_element(1, p, 1.0 / p as f64)),
            _ => Err(bad(format!(
                "weights must be numeric, \"sum\" or \"mean\", not {lhs}"
            ))),
        };
    }
    match &v {
        Value::Matrix(m) => {
            let x = v.as_nums()?;
            if m.ncol != p {
                return Err(bad(format!(
                    "weight matrix has {} columns for {p} statistics",
                    m.ncol
                )));
            }
            Ok(DMatrix::from_column_slice(m.nrow, m.ncol, &x))
        }
        _ => {
            let x = v.as_nums()?;
            match x.len() {
                1 => Ok(DMatrix::identity(p, p) * x[0]),
                k if k == p => Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(x))),
                k => Err(bad(format!("{k} weights for {p} statistics"))),
            }
        }
    }
}

/// Formula arguments: a single formula or `list(...)` of formulas.
fn formula_list(e: &Expr) -> Vec<&Expr> {
    match e {
        Expr::Call(n, args) if n == "list" => args.iter().map(|a| &a.value).collect(),
        e => vec![e],
    }
}

fn labels(a: &Args, rows: usize, fallback: String) -> Result<Vec<String>> {
    let given: Vec<String> = match a.get("label") {
        None => vec![fallback],
        Some(e) => match Env::new(None).eval(e)? {
            Value::Atom(atom) => atom.labels(),
            _ => return Err(a.err("label must be a character vector")),
        },
    };
    Ok(match given.len() {
        k if k == rows => given,
        1 => (1..=rows).map(|i| format!("{}{i}", given[0])).collect(),
        k => return Err(a.err(format!("{k} labels for {rows} statistics"))),
    })
}

/// Realize each formula with its weights; `wrap` post-processes each inner
/// list before it is weighted.
fn weighted_parts(
    a: &Args,
    net: &Network,
    ctx: &mut Ctx,
    wrap: impl Fn(TermList) -> Result<Box<dyn Term>>,
) -> Result<(Vec<(Box<dyn Term>, DMatrix<f64>)>, String)> {
    let arg = a.required("formulas")?;
    let mut parts = Vec::new();
    let mut texts = Vec::new();
    for f in formula_list(arg) {
        let (lhs, formula) = split_formula(f)?;
        texts.push(formula.to_string());
        let list = TermList::new(realize_all(&formula, net, ctx)?);
        let w = weights(lhs, list.dim()).map_err(|e| a.err(e.to_string()))?;
        parts.push((wrap(list)?, w));
    }
    let rows = parts[0].1.nrows();
    if parts.iter().any(|(_, w)| w.nrows() != rows) {
        return Err(a.err("weight matrices disagree in their number of rows"));
    }
    Ok((parts, texts.join("+")))
}

pub(super) fn sum(term: &TermExpr, net: &Network, ctx: &mut Ctx) -> Result<Box<dyn Term>> {
    let a = Args::bind(term, &["formulas", "label"])?;
    let (parts, text) = weighted_parts(&a, net, ctx, |l| Ok(Box::new(l)))?;
    let rows = parts[0].1.nrows();
    let names = labels(&a, rows, text)?
        .into_iter()
        .map(|l| format!("Sum~{l}"))
        .collect();
    let dyadwise = parts
        .iter()
        .all(|(t, _)| t.dyad_independent() && has_dyadwise(t.as_ref(), net));
    Ok(Box::new(Summed {
        names,
        parts,
        dyadwise,
    }))
}

/// Elementwise `log_base` or `base^x` of the inner statistics.
struct Mapped {
    log: bool,
    base: f64,
    inner: Box<dyn Term>,
}

impl Mapped {
    fn f(&self, x: f64) -> f64 {
        if self.log {
            x.ln() / self.base.ln()
        } else {
            self.base.powf(x)
        }
    }
}

impl Term for Mapped {
    fn names(&self) -> Vec<String> {
        let p = if self.log { "Log" } else { "Exp" };
        self.inner
            .names()
            .iter()
            .map(|n| format!("{p}~{n}"))
            .collect()
    }

    fn dyad_independent(&self) -> bool {
        false
    }

    fn support(&self) -> Support {
        Support::Both
    }

    fn eval(&self, net: &dyn NetView, out: &mut [f64]) {
        self.inner.eval(net, out);
        for o in out.iter_mut() {
            *o = self.f(*o);
        }
    }

    fn change(&self, net: &dyn NetView, t: usize, h: usize, new: f64, out: &mut [f64]) {
        let mut before = vec![0.0; out.len()];
        self.inner.eval(net, &mut before);
        self.inner.change(net, t, h, new, out);
        for (o, b) in out.iter_mut().zip(before) {
            *o = self.f(b + *o) - self.f(b);
        }
    }
}

fn check_positive(label: &str, t: &dyn Term, net: &Network) -> Result<()> {
    let s = {
        let mut buf = vec![0.0; t.dim()];
        t.eval(net, &mut buf);
        buf
    };
    if let Some((n, x)) = t.names().iter().zip(&s).find(|(_, x)| **x <= 0.0) {
        return Err(ErgmError::term(
            label,
            format!("statistic `{n}` is {x}; the logarithm needs positive statistics"),
        ));
    }
    Ok(())
}

pub(super) fn log_exp(
    log: bool,
    term: &TermExpr,
    net: &Network,
    ctx: &mut Ctx,
) -> Result<Box<dyn Term>> {
    let a = Args::bind(term, &["formula", "base"])?;
    let inner = inner_terms(a.required("formula")?, net, ctx)?;
    let base = a.num("base", std::f64::consts::E)?;
    if base <= 0.0 || base == 1.0 {
        return Err(a.err("base must be positive and not 1"));
    }
    if log {
        check_positive(&term.name(), &inner, net)?;
    }
    Ok(Box::new(Mapped {
        log,
        base,
        inner: Box::new(inner),
    }))
}

pub(super) fn prod(term: &TermExpr, net: &Network, ctx: &mut Ctx) -> Result<Box<dyn Term>> {
    let a = Args::bind(term, &["formulas", "label"])?;
    let label = term.name();
    let (parts, text) = weighted_parts(&a, net, ctx, |l| {
        check_positive(&label, &l, net)?;
        Ok(Box::new(Mapped {
            log: true,
            base: std::f64::consts::E,
            inner: Box::new(l),
        }))
    })?;
    let rows = parts[0].1.nrows();
    let names = labels(&a, rows, text)?
        .into_iter()
        .map(|l| format!("Sum~{l}"))
        .collect();
    Ok(Box::new(Mapped {
        log: false,
        base: std::f64::consts::E,
        inner: Box::new(Summed {
            names,
            parts,
            dyadwise: false,
        }),
    }))
}

enum ParamMap {
    Rep,
    Func(Value),
}

enum ParamGrad {
    Numeric,
    Linear,
    Func(Value),
}

/// Reparametrization of an inner formula: its canonical parameters become
/// a function of a new, usually shorter, parameter vector.
struct Parametrized {
    inner: TermList,
    params: Vec<String>,
    map: ParamMap,
    grad: ParamGrad,
    bounds: Vec<(f64, f64)>,
    cov: Option<Value>,
}

impl Parametrized {
    fn call(&self, f: &Value, theta: &[f64]) -> Result<Value> {
        let mut args = vec![
            Value::Atom(crate::formula::Atom::Num(theta.to_vec())),
            Value::num(self.inner.n_params() as f64),
        ];
        if let Some(c) = &self.cov {
            args.push(c.clone());
        }
        Env::new(None).apply(f, args)
    }

    fn map(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let p = self.inner.n_params();
        match &self.map {
            ParamMap::Rep => Ok((0..p).map(|i| theta[i % theta.len()]).collect()),
            ParamMap::Func(f) => {
                let v = self.call(f, theta)?.as_nums()?;
                if v.len() != p {
                    return Err(ErgmError::term(
                        "Parametrize",
                        format!(
                            "map returned {} values; the formula has {p} parameters",
                            v.len()
                        ),
                    ));
                }
                Ok(v)
            }
        }
    }

    /// `d map / d theta`, inner parameters by new parameters.
    fn map_jacobian(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        let (p, q) = (self.inner.n_params(), theta.len());
        let mut j = DMatrix::zeros(p, q);
        match (&self.map, &self.grad) {
            (ParamMap::Rep, _) => {
                for i in 0..p {
                    j[(i, i % q)] = 1.0;
                }
            }
            (_, ParamGrad::Linear) => {
                let zero = self.map(&vec![0.0; q])?;
                for k in 0..q {
                    let mut e = vec![0.0; q];
                    e[k] = 1.0;
                    let col = self.map(&e)?;
                    for i in 0..p {
                        j[(i, k)] = col[i] - zero[i];
                    }
                }
            }
            (_, ParamGrad::Numeric) => {
                for k in 0..q {
                    let step = 1e-6 * theta[k].abs().max(1.0);
                    let (mut up, mut down) = (theta.to_vec(), theta.to_vec());
                    up[k] += step;
                    down[k] -= step;
                    let (a, b) = (self.map(&up)?, self.map(&down)?);
                    for i in 0..p {
                        j[(i, k)] = (a[i] - b[i]) / (2.0 * step);
                    }
                }
            }
            (_, ParamGrad::Func(g)) => {
                let v = self.call(g, theta)?;
                let x = v.as_nums()?;
                let (nr, nc) = match &v {
                    Value::Matrix(m) => (m.nrow, m.ncol),
                    _ => (q, x.len() / q.max(1)),
                };
                let m = DMatrix::from_column_slice(nr, nc, &x);
                j = if (nr, nc) == (q, p) {
                    m.transpose()
                } else if (nr, nc) == (p, q) {
                    m
                } else {
                    return Err(ErgmError::term(
                        "Parametrize",
                        format!("gradient is {nr}x{nc}; expected {q}x{p}"),
                    ));
                };
            }
        }
        Ok(j)
    }
}

impl Term for Parametrized {
    fn names(&self) -> Vec<String> {
        self.inner.names()
    }

    fn dyad_independent(&self) -> bool {
        self.inner.dyad_independent()
    }

    fn support(&self) -> Support {
        Support::Both
    }

    fn eval(&self, net: &dyn NetView, out: &mut [f64]) {
        self.inner.eval_into(net, out)
    }

    fn change(&self, net: &dyn NetView, t: usize, h: usize, new: f64, out: &mut [f64]) {
        self.inner.change(net, t, h, new, out)
    }

    fn dyadwise(&self, t: usize, h: usize, y: f64, out: &mut [f64]) -> bool {
        self.inner.dyadwise(t, h, y, out)
    }

    fn param_names(&self) -> Vec<String> {
        self.params.clone()
    }

    fn eta(&self, theta: &[f64], out: &mut [f64]) {
        match self.map(theta) {
            Ok(phi) => out.copy_from_slice(&self.inner.eta(&phi)),
            Err(_) => out.fill(f64::NAN),
        }
    }

    fn eta_jacobian(&self, theta: &[f64]) -> Option<DMatrix<f64>> {
        let q = self.params.len();
        let fail = || DMatrix::from_element(self.inner.dim(), q, f64::NAN);
        let Ok(phi) = self.map(theta) else {
            return Some(fail());
        };
        match self.map_jacobian(theta) {
            Ok(jm) => Some(self.inner.eta_jacobian(&phi) * jm),
            Err(_) => Some(fail()),
        }
    }

    fn param_bounds(&self) -> Vec<(f64, f64)> {
        self.bounds.clone()
    }
}

pub(super) fn parametrize(term: &TermExpr, net: &Network, ctx: &mut Ctx) -> Result<Box<dyn Term>> {
    let a = Args::bind(
        term,
        &[
            "formula", "params", "map", "gradient", "minpar", "maxpar", "cov",
        ],
    )?;
    let inner = inner_terms(a.required("formula")?, net, ctx)?;
    let params = match Env::new(None).eval(a.required("params")?)? {
        Value::Atom(atom) => atom.labels(),
        _ => return Err(a.err("params must be a character vector")),
    };
    if params.is_empty() {
        return Err(a.err("params is empty"));
    }
    let eval = |name: &str| -> Result<Option<Value>> {
        a.get(name)
            .map(|e| Env::new(None).eval(e))
            .transpose()
            .map_err(|e| a.err(format!("argument `{name}`: {e}")))
    };
    let map = match eval("map")? {
        Some(Value::Atom(crate::formula::Atom::Str(s))) if s == ["rep"] => ParamMap::Rep,
        Some(f @ Value::Func(_, _)) => ParamMap::Func(f),
        _ => return Err(a.err("map must be \"rep\" or a function(x, n, ...)")),
    };
    let grad = match eval("gradient")? {
        None | Some(Value::Null) => ParamGrad::Numeric,
        Some(Value::Atom(crate::formula::Atom::Str(s))) if s == ["linear"] => ParamGrad::Linear,
        Some(f @ Value::Func(_, _)) => ParamGrad::Func(f),
        _ => return Err(a.err("gradient must be NULL, \"linear\" or a function")),
    };
    let q = params.len();
    let bound = |name: &str, default: f64| -> Result<Vec<f64>> {
        let v = a.nums(name)?.unwrap_or_else(|| vec![default]);
        if v.is_empty() || q % v.len() != 0 {
            return Err(a.err(format!("`{name}` length does not divide {q}")));
        }
        Ok((0..q).map(|i| v[i % v.len()]).collect())
    };
    let (lo, hi) = (
        bound("minpar", f64::NEG_INFINITY)?,
        bound("maxpar", f64::INFINITY)?,
    );
    let cov = eval("cov")?.filter(|v| !matches!(v, Value::Null));
    let op = Parametrized {
        inner,
        params,
        map,
        grad,
        bounds: lo.into_iter().zip(hi).collect(),
        cov,
    };
    let probe: Vec<f64> = op
        .bounds
        .iter()
        .map(|&(l, h)| 0f64.clamp(l, h.max(l)))
        .map(|x| if x.is_finite() { x } else { 0.0 })
        .collect();
    op.map(&probe).map_err(|e| a.err(e.to_string()))?;
    op.map_jacobian(&probe).map_err(|e| a.err(e.to_string()))?;
    Ok(Box::new(op))
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;

    use crate::net::{AttrColumn, Network};
    use crate::terms::testutil::{check_changes, random_net};
    use crate::terms::{Model, TermOptions};

    fn model(net: &Network, text: &str) -> Model {
        Model::parse(text, net, false, TermOptions::default()).unwrap()
    }

    fn grouped(seed: u64) -> Network {
        let mut net = random_net(seed, 9, true, 0.35);
        let g: Vec<String> = (0..9).map(|i| ["L", "O", "T"][i % 3].to_string()).collect();
        net.set_attr("group", AttrColumn::Categorical(g)).unwrap();
        net
    }

    #[test]
    fn sum_spellings_agree() {
        let net = grouped(1);
        let m = model(
            &net,
            "Sum(cbind(1,0,1) ~ nodeifactor(\"group\", levels=TRUE), \"nf.L_T\") \
             + Sum(\"sum\" ~ nodeifactor(\"group\", levels=-2), \"nf.L_T\") \
             + nodeifactor(~group != \"O\") + Sum(list(~edges, ~mutual), \"EM\") + edges + mutual",
        );
        let s = m.eval(&net);
        assert_eq!(m.names()[0], "Sum~nf.L_T");
        assert_eq!(m.names()[3], "Sum~EM");
        assert_eq!(s[0], s[1]);
        assert_eq!(s[0], s[2]);
        assert_eq!(s[3], s[4] + s[5]);
        let id = model(&net, "Sum(~edges + mutual, \"x\") + edges + mutual").eval(&net);
        assert_eq!(id[..2], id[2..]);
    }

    #[test]
    fn prod_log_exp() {
        let net = grouped(2);
        let m = model(
            &net,
            "Prod(list(~edges, ~mutual), \"EM\") + edges + mutual + Log(~edges)",
        );
        assert_eq!(m.names()[0], "Exp~Sum~EM");
        let s = m.eval(&net);
        assert!((s[0] - s[1] * s[2]).abs() < 1e-6 * s[0]);
        assert!((s[3] - s[1].ln()).abs() < 1e-12);
        let empty = Network::new(4, true, None).unwrap();
        assert!(Model::parse(
            "Prod(list(~edges, ~edges))",
            &empty,
            false,
            TermOptions::default()
        )
        .is_err());
    }

    #[test]
    fn parametrize_maps_and_gradients() {
        let net = grouped(3);
        let rep = model(
            &net,
            "Parametrize(~nodeifactor(\"group\", levels=-2), \"nf\", \"rep\")",
        );
        assert_eq!(rep.unique_param_names(), vec!["nf"]);
        assert_eq!(rep.eta(&[0.7]), vec![0.7, 0.7]);
        assert_eq!(
            rep.eta_jacobian(&[0.7]),
            DMatrix::from_column_slice(2, 1, &[1.0, 1.0])
        );
        let lin = model(
            &net,
            "Parametrize(~nodeifactor(\"group\", levels=TRUE), \"nf\", function(x,n,...) c(x,0,x), gradient=\"linear\")",
        );
        assert_eq!(lin.eta(&[2.0]), vec![2.0, 0.0, 2.0]);
        assert_eq!(
            lin.eta_jacobian(&[2.0]),
            DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 1.0])
        );
        let num = model(
            &net,
            "Parametrize(~edges + mutual, c(\"a\"), function(x,n,...) c(x^2, exp(x)))",
        );
        let j = num.eta_jacobian(&[1.5]);
        assert!((j[(0, 0)] - 3.0).abs() < 1e-6);
        assert!((j[(1, 0)] - 1.5f64.exp()).abs() < 1e-6);
        let exp = model(
            &net,
            "Parametrize(~edges + mutual, c(\"a\"), function(x,n,...) c(x^2, exp(x)), gradient=function(x,n,...) cbind(2*x, exp(x)), minpar=0)",
        );
        assert!((exp.eta_jacobian(&[1.5])[(1, 0)] - 1.5f64.exp()).abs() < 1e-12);
        assert_eq!(exp.list.param_bounds(), vec![(0.0, f64::INFINITY)]);
        assert!(exp.curved());
        assert!(Model::parse(
            "Parametrize(~edges + mutual, \"a\", function(x,n,...) x)",
            &net,
            false,
            TermOptions::default()
        )
        .is_err());
    }

    #[test]
    fn operator_changes() {
        let net = grouped(4);
        check_changes(
            &net,
            "Sum(cbind(1,0,1) ~ nodeifactor(\"group\", levels=TRUE), \"a\") + Sum(list(~edges, ~ttriple), \"b\") \
             + Exp(~Log(~edges + mutual)) + Parametrize(~edges + triangle, \"p\", \"rep\")",
            false,
            &[0.0, 1.0],
        );
    }
}
