//! Vertex attribute specifications: names, expressions and literals, plus the
//! categorical transforms applied before level selection.

use super::ast::Expr;
use super::eval::{recycle, Atom, Env, Value};
use super::levels::{tabulate, Level};
use crate::error::{ErgmError, Result};
use crate::net::Network;

#[derive(Clone, Debug, PartialEq)]
pub enum AttrSpec {
    Name(String),
    /// Several attributes: pasted for categorical use, column-bound otherwise.
    Names(Vec<String>),
    Expr(Expr),
    Literal(Value),
    CollapseSmallest {
        inner: Box<AttrSpec>,
        k: usize,
        into: Level,
    },
}

/// Numeric covariate matrix, one column per statistic.
#[derive(Clone, Debug, PartialEq)]
pub struct Covariate {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    pub name: String,
    pub values: Vec<Level>,
}

impl Factor {
    pub fn levels(&self) -> Vec<Level> {
        tabulate(&self.values).into_iter().map(|(l, _)| l).collect()
    }

    /// Per-vertex index into `levels`, or `None` for vertices outside it.
    pub fn codes(&self, levels: &[Level]) -> Vec<Option<usize>> {
        self.values
            .iter()
            .map(|v| levels.iter().position(|l| l.matches(v)))
            .collect()
    }
}

impl AttrSpec {
    pub fn parse(e: &Expr) -> Result<AttrSpec> {
        match e {
            Expr::Str(s) | Expr::Ident(s) => Ok(AttrSpec::Name(s.clone())),
            Expr::Formula(None, rhs) => Ok(AttrSpec::Expr((**rhs).clone())),
            Expr::Call(n, args) if n == "c" && args.iter().all(|a| a.value.as_str().is_some()) => {
                let names: Vec<String> = args
                    .iter()
                    .filter_map(|a| a.value.as_str().map(str::to_string))
                    .collect();
                Ok(if names.len() == 1 {
                    AttrSpec::Name(names[0].clone())
                } else {
                    AttrSpec::Names(names)
                })
            }
            Expr::Call(n, args) if n == "I" && args.len() == 1 => {
                Ok(AttrSpec::Literal(Env::new(None).eval(&args[0].value)?))
            }
            Expr::Call(n, args) if n == "COLLAPSE_SMALLEST" => {
                if args.len() != 3 {
                    return Err(ErgmError::Attr(
                        "COLLAPSE_SMALLEST(attr, n, into) takes three arguments".into(),
                    ));
                }
                let inner = AttrSpec::parse(&args[0].value)?;
                let k = match args[1].value {
                    Expr::Num(k) if k >= 1.0 && k.fract() == 0.0 => k as usize,
                    _ => {
                        return Err(ErgmError::Attr(
                            "COLLAPSE_SMALLEST needs a positive integer count".into(),
                        ))
                    }
                };
                let into = match &args[2].value {
                    Expr::Num(x) => Level::Num(*x),
                    Expr::Str(s) => Level::Str(s.clone()),
                    Expr::Bool(b) => Level::Bool(*b),
                    other => {
                        return Err(ErgmError::Attr(format!(
                            "COLLAPSE_SMALLEST target must be a literal, got {other}"
                        )))
                    }
                };
                Ok(AttrSpec::CollapseSmallest {
                    inner: Box::new(inner),
                    k,
                    into,
                })
            }
            Expr::Paren(inner) => AttrSpec::parse(inner),
            other => Ok(AttrSpec::Literal(Env::new(None).eval(other)?)),
        }
    }

    /// Label used in statistic names.
    pub fn label(&self) -> String {
        match self {
            AttrSpec::Name(s) => s.clone(),
            AttrSpec::Names(v) => v.join("."),
            AttrSpec::Expr(e) => e.to_string(),
            AttrSpec::Literal(_) => "attr".into(),
            AttrSpec::CollapseSmallest { inner, .. } => inner.label(),
        }
    }

    fn value(&self, net: &Network) -> Result<Value> {
        match self {
            AttrSpec::Name(s) => net
                .attr(s)
                .map(|c| Value::Atom(c.into()))
                .ok_or_else(|| ErgmError::Attr(format!("unknown vertex attribute `{s}`"))),
            AttrSpec::Names(v) => {
                let mut cols = Vec::with_capacity(v.len());
                for s in v {
                    cols.push(AttrSpec::Name(s.clone()).value(net)?);
                }
                Ok(Value::List(cols))
            }
            AttrSpec::Expr(e) => Env::new(Some(net)).eval(e),
            AttrSpec::Literal(v) => Ok(v.clone()),
            AttrSpec::CollapseSmallest { .. } => Err(ErgmError::Attr(
                "COLLAPSE_SMALLEST yields a categorical attribute".into(),
            )),
        }
    }

    /// Evaluate for quantitative use. Computed columns without an explicit
    /// name are labelled by their expression text and reported in `warnings`.
    pub fn covariate(&self, net: &Network, warnings: &mut Vec<String>) -> Result<Covariate> {
        let n = net.n();
        let num = |a: &Atom, what: &str| -> Result<Vec<f64>> {
            let a = recycle(a, n)?;
            a.to_num()
                .ok_or_else(|| ErgmError::Attr(format!("attribute `{what}` is not numeric")))
        };
        let label = self.label();
        match self.value(net)? {
            Value::Atom(a) => {
                if matches!(self, AttrSpec::Expr(e) if !matches!(e, Expr::Ident(_))) {
                    warnings.push(format!(
                        "covariate `{label}` is unnamed; using its expression text"
                    ));
                }
                Ok(Covariate {
                    names: vec![label.clone()],
                    columns: vec![num(&a, &label)?],
                })
            }
            Value::Matrix(m) => {
                let mut names = Vec::with_capacity(m.ncol);
                let mut columns = Vec::with_capacity(m.ncol);
                for j in 0..m.ncol {
                    let name = match &m.colnames[j] {
                        Some(s) => s.clone(),
                        None => {
                            warnings.push(format!("column {} of `{label}` is unnamed", j + 1));
                            format!("{label}.{}", j + 1)
                        }
                    };
                    columns.push(num(&m.column(j), &name)?);
                    names.push(name);
                }
                Ok(Covariate { names, columns })
            }
            Value::List(parts) => {
                let AttrSpec::Names(v) = self else {
                    return Err(ErgmError::Attr(format!("`{label}` is not a vector")));
                };
                let mut columns = Vec::with_capacity(v.len());
                for (name, p) in v.iter().zip(parts) {
                    let a = p
                        .atom()
                        .cloned()
                        .ok_or_else(|| ErgmError::Attr(name.clone()))?;
                    columns.push(num(&a, name)?);
                }
                Ok(Covariate {
                    names: v.clone(),
                    columns,
                })
            }
            _ => Err(ErgmError::Attr(format!(
                "`{label}` did not evaluate to a vector or matrix"
            ))),
        }
    }

    /// Evaluate for categorical use; multi-column values are pasted row-wise.
    pub fn factor(&self, net: &Network) -> Result<Factor> {
        let n = net.n();
        if let AttrSpec::CollapseSmallest { inner, k, into } = self {
            let mut f = inner.factor(net)?;
            let mut table = tabulate(&f.values);
            table.sort_by(|a, b| a.1.cmp(&b.1));
            let small: Vec<Level> = table.into_iter().take(*k).map(|(l, _)| l).collect();
            let same_kind = f
                .values
                .iter()
                .all(|v| std::mem::discriminant(v) == std::mem::discriminant(into));
            for v in &mut f.values {
                if small.iter().any(|s| s.matches(v)) {
                    *v = into.clone();
                }
            }
            if !same_kind {
                for v in &mut f.values {
                    if !matches!(v, Level::Str(_)) {
                        *v = Level::Str(v.label());
                    }
                }
            }
            return Ok(f);
        }
        let label = self.label();
        let rows: Vec<Vec<Level>> = match self.value(net)? {
            Value::Atom(a) => vec![Level::from_atom(&recycle(&a, n)?)],
            Value::Matrix(m) => (0..m.ncol)
                .map(|j| recycle(&m.column(j), n).map(|a| Level::from_atom(&a)))
                .collect::<Result<_>>()?,
            Value::List(parts) => parts
                .iter()
                .map(|p| {
                    let a = p
                        .atom()
                        .ok_or_else(|| ErgmError::Attr(format!("`{label}` is not a vector")))?;
                    recycle(a, n).map(|a| Level::from_atom(&a))
                })
                .collect::<Result<_>>()?,
            _ => {
                return Err(ErgmError::Attr(format!(
                    "`{label}` did not evaluate to a vector"
                )))
            }
        };
        let values = if rows.len() == 1 {
            rows.into_iter().next().expect("one column")
        } else {
            (0..n)
                .map(|i| {
                    Level::Str(
                        rows.iter()
                            .map(|c| c[i].label())
                            .collect::<Vec<_>>()
                            .join("."),
                    )
                })
                .collect()
        };
        Ok(Factor {
            name: label,
            values,
        })
    }
}
