//! Model formulas: a right-hand side of terms joined by `+`, with `:` and `*`
//! interactions.

use std::fmt;

use super::ast::{Arg, BinOp, Expr};
use super::parse::parse_expr;
use crate::error::{ErgmError, Result};

/// One model term before realization.
#[derive(Clone, Debug, PartialEq)]
pub enum TermExpr {
    Term { name: String, args: Vec<Arg> },
    Interact(Box<TermExpr>, Box<TermExpr>),
}

impl TermExpr {
    pub fn name(&self) -> String {
        match self {
            TermExpr::Term { name, .. } => name.clone(),
            TermExpr::Interact(a, b) => format!("{}:{}", a.name(), b.name()),
        }
    }

    /// Match arguments to formal names: exact names first, then positional
    /// arguments fill the remaining slots in order.
    pub fn bind(&self, formals: &[&str]) -> Result<Vec<Option<Expr>>> {
        let TermExpr::Term { name, args } = self else {
            return Err(ErgmError::term(
                self.name(),
                "an interaction takes no arguments",
            ));
        };
        let mut out: Vec<Option<Expr>> = vec![None; formals.len()];
        for a in args.iter() {
            if let Some(n) = &a.name {
                let k = formals.iter().position(|f| f == n).ok_or_else(|| {
                    ErgmError::term(name.clone(), format!("unknown argument `{n}`"))
                })?;
                if out[k].is_some() {
                    return Err(ErgmError::term(
                        name.clone(),
                        format!("argument `{n}` given twice"),
                    ));
                }
                out[k] = Some(a.value.clone());
            }
        }
        let mut slot = 0;
        for a in args.iter().filter(|a| a.name.is_none()) {
            while slot < formals.len() && out[slot].is_some() {
                slot += 1;
            }
            if slot == formals.len() {
                return Err(ErgmError::term(name.clone(), "too many arguments"));
            }
            out[slot] = Some(a.value.clone());
        }
        Ok(out)
    }
}

impl fmt::Display for TermExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TermExpr::Term { name, args } if args.is_empty() => write!(f, "{name}"),
            TermExpr::Term { name, args } => {
                write!(f, "{}", Expr::Call(name.clone(), args.clone()))
            }
            TermExpr::Interact(a, b) => write!(f, "{a}:{b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Formula {
    pub terms: Vec<TermExpr>,
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl Formula {
    pub fn parse(text: &str) -> Result<Formula> {
        if text.trim().is_empty() {
            return Err(ErgmError::Parse {
                pos: 0,
                msg: "empty model formula".into(),
            });
        }
        Formula::from_expr(&parse_expr(text)?)
    }

    pub fn from_expr(e: &Expr) -> Result<Formula> {
        let terms = expand(e)?;
        if terms.is_empty() {
            return Err(ErgmError::Parse {
                pos: 0,
                msg: "model formula has no terms".into(),
            });
        }
        Ok(Formula { terms })
    }
}

fn pairs(l: &[TermExpr], r: &[TermExpr]) -> Vec<TermExpr> {
    l.iter()
        .flat_map(|a| {
            r.iter()
                .map(move |b| TermExpr::Interact(Box::new(a.clone()), Box::new(b.clone())))
        })
        .collect()
}

fn expand(e: &Expr) -> Result<Vec<TermExpr>> {
    match e {
        Expr::Formula(None, rhs) => expand(rhs),
        Expr::Paren(inner) => expand(inner),
        Expr::Ident(name) => Ok(vec![TermExpr::Term {
            name: name.clone(),
            args: Vec::new(),
        }]),
        Expr::Call(name, args) => Ok(vec![TermExpr::Term {
            name: name.clone(),
            args: args.clone(),
        }]),
        Expr::Binary(BinOp::Add, l, r) => {
            let mut out = expand(l)?;
            out.extend(expand(r)?);
            Ok(out)
        }
        Expr::Binary(BinOp::Colon, l, r) => Ok(pairs(&expand(l)?, &expand(r)?)),
        Expr::Binary(BinOp::Mul, l, r) => {
            let (a, b) = (expand(l)?, expand(r)?);
            let mut out = a.clone();
            out.extend(b.iter().cloned());
            out.extend(pairs(&a, &b));
            Ok(out)
        }
        other => Err(ErgmError::Parse {
            pos: 0,
            msg: format!("`{other}` is not a model term"),
        }),
    }
}
