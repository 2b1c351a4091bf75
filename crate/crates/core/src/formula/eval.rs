//! Vectorised evaluation of attribute expressions with R-style recycling.

use std::collections::HashMap;

use super::ast::{fmt_num, Arg, BinOp, Expr, UnOp};
use crate::error::{ErgmError, Result};
use crate::net::{AttrColumn, Network};

/// Homogeneous vector.
#[derive(Clone, Debug, PartialEq)]
pub enum Atom {
    Num(Vec<f64>),
    Str(Vec<String>),
    Bool(Vec<bool>),
}

impl Atom {
    pub fn len(&self) -> usize {
        match self {
            Atom::Num(v) => v.len(),
            Atom::Str(v) => v.len(),
            Atom::Bool(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Atom::Num(_) => "numeric",
            Atom::Str(_) => "character",
            Atom::Bool(_) => "logical",
        }
    }

    pub fn to_num(&self) -> Option<Vec<f64>> {
        match self {
            Atom::Num(v) => Some(v.clone()),
            Atom::Bool(v) => Some(v.iter().map(|&b| f64::from(u8::from(b))).collect()),
            Atom::Str(_) => None,
        }
    }

    pub fn labels(&self) -> Vec<String> {
        match self {
            Atom::Num(v) => v.iter().map(|&x| fmt_num(x)).collect(),
            Atom::Str(v) => v.clone(),
            Atom::Bool(v) => v
                .iter()
                .map(|&b| if b { "TRUE" } else { "FALSE" }.to_string())
                .collect(),
        }
    }

    fn pick(&self, idx: &[usize]) -> Atom {
        match self {
            Atom::Num(v) => Atom::Num(idx.iter().map(|&i| v[i]).collect()),
            Atom::Str(v) => Atom::Str(idx.iter().map(|&i| v[i].clone()).collect()),
            Atom::Bool(v) => Atom::Bool(idx.iter().map(|&i| v[i]).collect()),
        }
    }

    fn concat(parts: Vec<Atom>) -> Result<Atom> {
        if parts.iter().any(|a| matches!(a, Atom::Str(_))) {
            Ok(Atom::Str(parts.iter().flat_map(|a| a.labels()).collect()))
        } else if parts.iter().all(|a| matches!(a, Atom::Bool(_))) {
            Ok(Atom::Bool(
                parts
                    .into_iter()
                    .flat_map(|a| match a {
                        Atom::Bool(v) => v,
                        _ => unreachable!(),
                    })
                    .collect(),
            ))
        } else {
            Ok(Atom::Num(
                parts
                    .iter()
                    .flat_map(|a| a.to_num().expect("no strings here"))
                    .collect(),
            ))
        }
    }
}

impl From<&AttrColumn> for Atom {
    fn from(c: &AttrColumn) -> Self {
        match c {
            AttrColumn::Numeric(v) => Atom::Num(v.clone()),
            AttrColumn::Categorical(v) => Atom::Str(v.clone()),
            AttrColumn::Boolean(v) => Atom::Bool(v.clone()),
        }
    }
}

/// Column-major matrix with optional column names.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub data: Atom,
    pub nrow: usize,
    pub ncol: usize,
    pub colnames: Vec<Option<String>>,
}

impl Matrix {
    pub fn column(&self, j: usize) -> Atom {
        let idx: Vec<usize> = (j * self.nrow..(j + 1) * self.nrow).collect();
        self.data.pick(&idx)
    }

    /// Entry (r, c) as a label.
    pub fn label(&self, r: usize, c: usize) -> String {
        self.data.pick(&[c * self.nrow + r]).labels().remove(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Null,
    Atom(Atom),
    Matrix(Matrix),
    List(Vec<Value>),
    Func(Vec<String>, Expr),
}

impl Value {
    pub fn num(x: f64) -> Value {
        Value::Atom(Atom::Num(vec![x]))
    }

    pub fn atom(&self) -> Option<&Atom> {
        match self {
            Value::Atom(a) => Some(a),
            Value::Matrix(m) => Some(&m.data),
            _ => None,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Value::Null => "NULL",
            Value::Atom(a) => a.kind(),
            Value::Matrix(_) => "matrix",
            Value::List(_) => "list",
            Value::Func(_, _) => "function",
        }
    }

    pub fn as_nums(&self) -> Result<Vec<f64>> {
        self.atom().and_then(Atom::to_num).ok_or_else(|| {
            ErgmError::Attr(format!("expected a numeric value, got {}", self.kind()))
        })
    }

    pub fn as_scalar(&self) -> Result<f64> {
        let v = self.as_nums()?;
        if v.len() != 1 {
            return Err(ErgmError::Attr(format!(
                "expected a scalar, got length {}",
                v.len()
            )));
        }
        Ok(v[0])
    }

    pub fn as_bools(&self) -> Result<Vec<bool>> {
        match self.atom() {
            Some(Atom::Bool(v)) => Ok(v.clone()),
            Some(Atom::Num(v)) => Ok(v.iter().map(|&x| x != 0.0).collect()),
            _ => Err(ErgmError::Attr(format!(
                "expected a logical value, got {}",
                self.kind()
            ))),
        }
    }
}

/// Evaluation environment: lexical bindings over an optional network whose
/// vertex attributes resolve free identifiers.
pub struct Env<'a> {
    net: Option<&'a Network>,
    n: Option<usize>,
    scopes: Vec<HashMap<String, Value>>,
}

impl<'a> Env<'a> {
    pub fn new(net: Option<&'a Network>) -> Self {
        Env {
            net,
            n: net.map(Network::n),
            scopes: vec![HashMap::new()],
        }
    }

    pub fn bind(&mut self, name: impl Into<String>, v: Value) {
        self.scopes
            .last_mut()
            .expect("root scope")
            .insert(name.into(), v);
    }

    fn lookup(&self, name: &str) -> Result<Value> {
        for s in self.scopes.iter().rev() {
            if let Some(v) = s.get(name) {
                return Ok(v.clone());
            }
        }
        if let Some(net) = self.net {
            if let Some(c) = net.attr(name) {
                return Ok(Value::Atom(c.into()));
            }
        }
        Err(ErgmError::Attr(format!(
            "unknown attribute or variable `{name}`"
        )))
    }

    pub fn eval(&mut self, e: &Expr) -> Result<Value> {
        match e {
            Expr::Num(x) => Ok(Value::num(*x)),
            Expr::Str(s) => Ok(Value::Atom(Atom::Str(vec![s.clone()]))),
            Expr::Bool(b) => Ok(Value::Atom(Atom::Bool(vec![*b]))),
            Expr::Null => Ok(Value::Null),
            Expr::Ident(name) => self.lookup(name),
            Expr::Paren(inner) => self.eval(inner),
            Expr::Formula(None, rhs) => self.eval(rhs),
            Expr::Formula(Some(_), _) => Err(ErgmError::Attr(
                "a two-sided formula is not a value here".into(),
            )),
            Expr::Function(params, body) => Ok(Value::Func(params.clone(), (**body).clone())),
            Expr::Unary(op, x) => {
                let v = self.eval(x)?;
                unary(*op, v)
            }
            Expr::Binary(op, l, r) => {
                let a = self.eval(l)?;
                let b = self.eval(r)?;
                binary(op, a, b)
            }
            Expr::Index(target, idx, _) => {
                let t = self.eval(target)?;
                let i = self.eval(idx)?;
                index(t, i)
            }
            Expr::Call(name, args) => self.call(name, args),
        }
    }

    pub fn apply(&mut self, f: &Value, args: Vec<Value>) -> Result<Value> {
        let Value::Func(params, body) = f else {
            return Err(ErgmError::Attr("attempt to call a non-function".into()));
        };
        let mut scope = HashMap::new();
        for (p, a) in params.iter().filter(|p| *p != "...").zip(args) {
            scope.insert(p.clone(), a);
        }
        self.scopes.push(scope);
        let out = self.eval(body);
        self.scopes.pop();
        out
    }

    fn positional(&mut self, args: &[Arg]) -> Result<Vec<Value>> {
        args.iter().map(|a| self.eval(&a.value)).collect()
    }

    fn call(&mut self, name: &str, args: &[Arg]) -> Result<Value> {
        let math = |f: fn(f64) -> f64, v: Value| -> Result<Value> {
            let x = v.as_nums()?;
            Ok(rewrap(&v, Atom::Num(x.into_iter().map(f).collect())))
        };
        match name {
            "abs" | "exp" | "sqrt" | "log" if args.len() == 1 => {
                let v = self.eval(&args[0].value)?;
                let f: fn(f64) -> f64 = match name {
                    "abs" => f64::abs,
                    "exp" => f64::exp,
                    "sqrt" => f64::sqrt,
                    _ => f64::ln,
                };
                math(f, v)
            }
            "log" if args.len() == 2 => {
                let v = self.eval(&args[0].value)?;
                let base = self.eval(&args[1].value)?.as_scalar()?;
                let x = v.as_nums()?;
                Ok(rewrap(
                    &v,
                    Atom::Num(x.into_iter().map(|x| x.ln() / base.ln()).collect()),
                ))
            }
            "mean" | "sum" | "min" | "max" | "length" => {
                let vals = self.positional(args)?;
                let mut all = Vec::new();
                for v in &vals {
                    all.extend(v.as_nums()?);
                }
                let x = match name {
                    "mean" => all.iter().sum::<f64>() / all.len() as f64,
                    "sum" => all.iter().sum(),
                    "min" => all.iter().copied().fold(f64::INFINITY, f64::min),
                    "max" => all.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                    _ => all.len() as f64,
                };
                Ok(Value::num(x))
            }
            "network.size" => self
                .n
                .map(|n| Value::num(n as f64))
                .ok_or_else(|| ErgmError::Attr("network.size() needs a network".into())),
            "c" => {
                let vals = self.positional(args)?;
                if vals.iter().any(|v| matches!(v, Value::List(_))) {
                    return Ok(Value::List(vals));
                }
                let atoms: Vec<Atom> = vals.iter().filter_map(|v| v.atom().cloned()).collect();
                Ok(Value::Atom(Atom::concat(atoms)?))
            }
            "list" => Ok(Value::List(self.positional(args)?)),
            "I" | "identity" | "as.vector" => {
                if args.len() != 1 {
                    return Err(ErgmError::Attr(format!("{name}() takes one argument")));
                }
                self.eval(&args[0].value)
            }
            "as.numeric" => {
                let v = self.eval(&args[0].value)?;
                Ok(Value::Atom(Atom::Num(v.as_nums()?)))
            }
            "as.character" => {
                let v = self.eval(&args[0].value)?;
                let a = v
                    .atom()
                    .ok_or_else(|| ErgmError::Attr("bad as.character".into()))?;
                Ok(Value::Atom(Atom::Str(a.labels())))
            }
            "rep" => {
                let v = self.eval(&args[0].value)?;
                let a = v
                    .atom()
                    .cloned()
                    .ok_or_else(|| ErgmError::Attr("rep() needs a vector".into()))?;
                let mut times = 1usize;
                let mut each = 1usize;
                for arg in args.iter().skip(1) {
                    let x = self.eval(&arg.value)?.as_scalar()? as usize;
                    match arg.name.as_deref() {
                        Some("each") => each = x,
                        _ => times = x,
                    }
                }
                let idx: Vec<usize> = (0..times)
                    .flat_map(|_| (0..a.len()).flat_map(move |i| std::iter::repeat_n(i, each)))
                    .collect();
                Ok(Value::Atom(a.pick(&idx)))
            }
            "cbind" => self.cbind(args),
            "matrix" => self.matrix(args),
            "sapply" | "lapply" => {
                let list = self.eval(&args[0].value)?;
                let f = self.eval(&args[1].value)?;
                let items: Vec<Value> = match list {
                    Value::List(v) => v,
                    Value::Atom(a) => (0..a.len()).map(|i| Value::Atom(a.pick(&[i]))).collect(),
                    other => {
                        return Err(ErgmError::Attr(format!(
                            "cannot iterate over {}",
                            other.kind()
                        )))
                    }
                };
                let mut out = Vec::with_capacity(items.len());
                for it in items {
                    out.push(self.apply(&f, vec![it])?);
                }
                if name == "lapply" {
                    return Ok(Value::List(out));
                }
                let atoms: Option<Vec<Atom>> = out.iter().map(|v| v.atom().cloned()).collect();
                match atoms {
                    Some(a) => Ok(Value::Atom(Atom::concat(a)?)),
                    None => Ok(Value::List(out)),
                }
            }
            "paste" | "paste0" => {
                let mut sep = if name == "paste" { " " } else { "" }.to_string();
                let mut parts = Vec::new();
                for a in args {
                    if a.name.as_deref() == Some("sep") {
                        sep = a.value.as_str().unwrap_or("").to_string();
                    } else {
                        let v = self.eval(&a.value)?;
                        parts.push(v.atom().map(Atom::labels).unwrap_or_default());
                    }
                }
                let len = parts.iter().map(Vec::len).max().unwrap_or(0);
                let out = (0..len)
                    .map(|i| {
                        parts
                            .iter()
                            .map(|p| p[i % p.len()].clone())
                            .collect::<Vec<_>>()
                            .join(&sep)
                    })
                    .collect();
                Ok(Value::Atom(Atom::Str(out)))
            }
            _ => Err(ErgmError::Attr(format!("unknown function `{name}`"))),
        }
    }

    fn cbind(&mut self, args: &[Arg]) -> Result<Value> {
        let mut cols: Vec<(Option<String>, Atom)> = Vec::new();
        for a in args {
            match self.eval(&a.value)? {
                Value::Matrix(m) => {
                    for j in 0..m.ncol {
                        cols.push((m.colnames[j].clone(), m.column(j)));
                    }
                }
                Value::Atom(at) => {
                    let name = a.name.clone().or_else(|| match &a.value {
                        Expr::Ident(s) => Some(s.clone()),
                        _ => None,
                    });
                    cols.push((name, at));
                }
                other => return Err(ErgmError::Attr(format!("cannot cbind a {}", other.kind()))),
            }
        }
        if cols.is_empty() {
            return Ok(Value::Null);
        }
        let nrow = cols.iter().map(|c| c.1.len()).max().unwrap_or(0);
        let mut atoms = Vec::with_capacity(cols.len());
        let mut names = Vec::with_capacity(cols.len());
        for (name, at) in cols {
            atoms.push(recycle(&at, nrow)?);
            names.push(name);
        }
        Ok(Value::Matrix(Matrix {
            ncol: atoms.len(),
            data: Atom::concat(atoms)?,
            nrow,
            colnames: names,
        }))
    }

    fn matrix(&mut self, args: &[Arg]) -> Result<Value> {
        let mut data = None;
        let mut nrow = None;
        let mut ncol = None;
        let mut byrow = false;
        let mut pos = 0;
        for a in args {
            let key = a.name.clone().unwrap_or_else(|| {
                pos += 1;
                ["data", "nrow", "ncol", "byrow"][(pos - 1).min(3)].to_string()
            });
            let v = self.eval(&a.value)?;
            match key.as_str() {
                "data" => data = v.atom().cloned(),
                "nrow" => nrow = Some(v.as_scalar()? as usize),
                "ncol" => ncol = Some(v.as_scalar()? as usize),
                "byrow" => byrow = v.as_bools()?.first().copied().unwrap_or(false),
                _ => {
                    return Err(ErgmError::Attr(format!(
                        "matrix(): unknown argument `{key}`"
                    )))
                }
            }
        }
        let data = data.ok_or_else(|| ErgmError::Attr("matrix() needs data".into()))?;
        let len = data.len().max(1);
        let (nrow, ncol) = match (nrow, ncol) {
            (Some(r), Some(c)) => (r, c),
            (Some(r), None) => (r, len.div_ceil(r)),
            (None, Some(c)) => (len.div_ceil(c), c),
            (None, None) => (len, 1),
        };
        let data = recycle(&data, nrow * ncol)?;
        let data = if byrow {
            let idx: Vec<usize> = (0..nrow * ncol)
                .map(|k| {
                    let (r, c) = (k % nrow, k / nrow);
                    r * ncol + c
                })
                .collect();
            data.pick(&idx)
        } else {
            data
        };
        Ok(Value::Matrix(Matrix {
            data,
            nrow,
            ncol,
            colnames: vec![None; ncol],
        }))
    }
}

/// Repeat `a` to length `n`; `a`'s length must divide `n`.
pub fn recycle(a: &Atom, n: usize) -> Result<Atom> {
    let len = a.len();
    if len == n {
        return Ok(a.clone());
    }
    if len == 0 || n % len != 0 {
        return Err(ErgmError::Attr(format!(
            "length {len} does not divide the required length {n}"
        )));
    }
    let idx: Vec<usize> = (0..n).map(|i| i % len).collect();
    Ok(a.pick(&idx))
}

fn rewrap(like: &Value, a: Atom) -> Value {
    match like {
        Value::Matrix(m) if a.len() == m.nrow * m.ncol => Value::Matrix(Matrix {
            data: a,
            nrow: m.nrow,
            ncol: m.ncol,
            colnames: m.colnames.clone(),
        }),
        _ => Value::Atom(a),
    }
}

fn unary(op: UnOp, v: Value) -> Result<Value> {
    match op {
        UnOp::Plus => Ok(v),
        UnOp::Neg => {
            let x = v.as_nums()?;
            Ok(rewrap(&v, Atom::Num(x.into_iter().map(|x| -x).collect())))
        }
        UnOp::Not => {
            let b = v.as_bools()?;
            Ok(rewrap(&v, Atom::Bool(b.into_iter().map(|b| !b).collect())))
        }
    }
}

fn index(t: Value, i: Value) -> Result<Value> {
    let idx = i.as_nums()?;
    match t {
        Value::List(items) => {
            if idx.len() != 1 {
                return Err(ErgmError::Attr("list index must be a scalar".into()));
            }
            let k = idx[0] as usize;
            items
                .get(k.wrapping_sub(1))
                .cloned()
                .ok_or_else(|| ErgmError::Attr(format!("index {k} out of range")))
        }
        other => {
            let a = other
                .atom()
                .ok_or_else(|| ErgmError::Attr("cannot index this value".into()))?;
            let mut pos = Vec::with_capacity(idx.len());
            for &x in &idx {
                let k = x as usize;
                if x < 1.0 || k > a.len() {
                    return Err(ErgmError::Attr(format!("index {x} out of range")));
                }
                pos.push(k - 1);
            }
            Ok(Value::Atom(a.pick(&pos)))
        }
    }
}

fn binary(op: &BinOp, a: Value, b: Value) -> Result<Value> {
    if let BinOp::Special(s) = op {
        return match s.as_str() {
            "in" => {
                let x = a
                    .atom()
                    .ok_or_else(|| ErgmError::Attr("bad %in% operand".into()))?;
                let table = match &b {
                    Value::List(items) => items
                        .iter()
                        .filter_map(|v| v.atom())
                        .flat_map(Atom::labels)
                        .collect::<Vec<_>>(),
                    v => v.atom().map(Atom::labels).unwrap_or_default(),
                };
                let xs = x.labels();
                Ok(Value::Atom(Atom::Bool(
                    xs.iter().map(|l| table.contains(l)).collect(),
                )))
            }
            other => Err(ErgmError::Attr(format!("unknown operator %{other}%"))),
        };
    }
    if *op == BinOp::Colon {
        let from = a.as_scalar()?;
        let to = b.as_scalar()?;
        let n = (to - from).abs().floor() as usize;
        let step = if to >= from { 1.0 } else { -1.0 };
        return Ok(Value::Atom(Atom::Num(
            (0..=n).map(|k| from + step * k as f64).collect(),
        )));
    }
    let like = if matches!(a, Value::Matrix(_)) {
        a.clone()
    } else {
        b.clone()
    };
    let (x, y) = match (a.atom(), b.atom()) {
        (Some(x), Some(y)) => (x.clone(), y.clone()),
        _ => {
            return Err(ErgmError::Attr(format!(
                "operator {} needs vector operands",
                op.symbol()
            )))
        }
    };
    let n = if x.is_empty() || y.is_empty() {
        0
    } else {
        x.len().max(y.len())
    };
    let x = recycle(&x, n)?;
    let y = recycle(&y, n)?;
    let out = match op {
        BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Pow => {
            let (Some(u), Some(v)) = (x.to_num(), y.to_num()) else {
                return Err(ErgmError::Attr(format!(
                    "arithmetic `{}` on non-numeric values",
                    op.symbol()
                )));
            };
            let f: fn(f64, f64) -> f64 = match op {
                BinOp::Add => |p, q| p + q,
                BinOp::Sub => |p, q| p - q,
                BinOp::Mul => |p, q| p * q,
                BinOp::Div => |p, q| p / q,
                _ => f64::powf,
            };
            Atom::Num(u.iter().zip(&v).map(|(&p, &q)| f(p, q)).collect())
        }
        BinOp::And | BinOp::AndAnd | BinOp::Or | BinOp::OrOr => {
            let u = Value::Atom(x).as_bools()?;
            let v = Value::Atom(y).as_bools()?;
            let and = matches!(op, BinOp::And | BinOp::AndAnd);
            Atom::Bool(
                u.iter()
                    .zip(&v)
                    .map(|(&p, &q)| if and { p && q } else { p || q })
                    .collect(),
            )
        }
        _ => {
            let ord: Vec<std::cmp::Ordering> = match (x.to_num(), y.to_num()) {
                (Some(u), Some(v)) => u
                    .iter()
                    .zip(&v)
                    .map(|(p, q)| p.partial_cmp(q).unwrap_or(std::cmp::Ordering::Equal))
                    .collect(),
                _ => {
                    let (u, v) = (x.labels(), y.labels());
                    u.iter().zip(&v).map(|(p, q)| p.cmp(q)).collect()
                }
            };
            use std::cmp::Ordering::*;
            Atom::Bool(
                ord.into_iter()
                    .map(|o| match op {
                        BinOp::Eq => o == Equal,
                        BinOp::Ne => o != Equal,
                        BinOp::Lt => o == Less,
                        BinOp::Le => o != Greater,
                        BinOp::Gt => o == Greater,
                        _ => o != Less,
                    })
                    .collect(),
            )
        }
    };
    Ok(rewrap(&like, out))
}
