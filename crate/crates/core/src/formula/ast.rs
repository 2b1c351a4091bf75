use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Plus,
    Not,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    AndAnd,
    Or,
    OrOr,
    Colon,
    /// `%name%`, e.g. `%in%`.
    Special(String),
}

impl BinOp {
    pub fn symbol(&self) -> String {
        match self {
            BinOp::Add => "+".into(),
            BinOp::Sub => "-".into(),
            BinOp::Mul => "*".into(),
            BinOp::Div => "/".into(),
            BinOp::Pow => "^".into(),
            BinOp::Eq => "==".into(),
            BinOp::Ne => "!=".into(),
            BinOp::Lt => "<".into(),
            BinOp::Le => "<=".into(),
            BinOp::Gt => ">".into(),
            BinOp::Ge => ">=".into(),
            BinOp::And => "&".into(),
            BinOp::AndAnd => "&&".into(),
            BinOp::Or => "|".into(),
            BinOp::OrOr => "||".into(),
            BinOp::Colon => ":".into(),
            BinOp::Special(s) => format!("%{s}%"),
        }
    }

    /// Binding power; higher binds tighter.
    pub(crate) fn prec(&self) -> u8 {
        match self {
            BinOp::Or | BinOp::OrOr => 2,
            BinOp::And | BinOp::AndAnd => 3,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 5,
            BinOp::Add | BinOp::Sub => 6,
            BinOp::Mul | BinOp::Div => 7,
            BinOp::Special(_) => 8,
            BinOp::Colon => 9,
            BinOp::Pow => 11,
        }
    }

    pub(crate) fn right_assoc(&self) -> bool {
        matches!(self, BinOp::Pow)
    }
}

pub(crate) const PREC_TILDE: u8 = 1;
pub(crate) const PREC_NOT: u8 = 4;
pub(crate) const PREC_UNARY: u8 = 10;
const PREC_ATOM: u8 = 13;

#[derive(Clone, Debug, PartialEq)]
pub struct Arg {
    pub name: Option<String>,
    pub value: Expr,
}

/// Expression tree shared by model formulas, attribute expressions and
/// argument values.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Str(String),
    Bool(bool),
    Null,
    Ident(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Formula(Option<Box<Expr>>, Box<Expr>),
    Call(String, Vec<Arg>),
    /// `x[i]` (single) or `x[[i]]` (double).
    Index(Box<Expr>, Box<Expr>, bool),
    Paren(Box<Expr>),
    Function(Vec<String>, Box<Expr>),
}

impl Expr {
    fn prec(&self) -> u8 {
        match self {
            Expr::Binary(op, _, _) => op.prec(),
            Expr::Unary(UnOp::Not, _) => PREC_NOT,
            Expr::Unary(_, _) => PREC_UNARY,
            Expr::Formula(_, _) => PREC_TILDE,
            Expr::Function(_, _) => 0,
            _ => PREC_ATOM,
        }
    }

    /// The right-hand side of a formula, or the expression itself.
    pub fn strip_tilde(&self) -> &Expr {
        match self {
            Expr::Formula(None, rhs) => rhs,
            e => e,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Expr::Str(s) => Some(s),
            _ => None,
        }
    }
}

/// R-style number text: integers without a decimal point, others in
/// shortest round-trip form.
pub fn fmt_num(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "Inf".into() } else { "-Inf".into() };
    }
    if x.is_nan() {
        return "NaN".into();
    }
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn wrap(e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if e.prec() < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// Compact printer: no spaces, parentheses only where written or needed.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{}", fmt_num(*x)),
            Expr::Str(s) => write!(f, "{}", quote(s)),
            Expr::Bool(b) => write!(f, "{}", if *b { "TRUE" } else { "FALSE" }),
            Expr::Null => write!(f, "NULL"),
            Expr::Ident(s) => write!(f, "{s}"),
            Expr::Unary(op, e) => {
                let (sym, p) = match op {
                    UnOp::Neg => ("-", PREC_UNARY),
                    UnOp::Plus => ("+", PREC_UNARY),
                    UnOp::Not => ("!", PREC_NOT),
                };
                write!(f, "{sym}")?;
                wrap(e, p, f)
            }
            Expr::Binary(op, l, r) => {
                let p = op.prec();
                let (lmin, rmin) = if op.right_assoc() {
                    (p + 1, p)
                } else {
                    (p, p + 1)
                };
                wrap(l, lmin, f)?;
                write!(f, "{}", op.symbol())?;
                wrap(r, rmin, f)
            }
            Expr::Formula(lhs, rhs) => {
                if let Some(l) = lhs {
                    wrap(l, PREC_TILDE + 1, f)?;
                }
                write!(f, "~")?;
                wrap(rhs, PREC_TILDE + 1, f)
            }
            Expr::Call(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    if let Some(n) = &a.name {
                        write!(f, "{n}=")?;
                    }
                    write!(f, "{}", a.value)?;
                }
                write!(f, ")")
            }
            Expr::Index(e, i, double) => {
                wrap(e, PREC_ATOM, f)?;
                if *double {
                    write!(f, "[[{i}]]")
                } else {
                    write!(f, "[{i}]")
                }
            }
            Expr::Paren(e) => write!(f, "({e})"),
            Expr::Function(params, body) => {
                write!(f, "function({}) {body}", params.join(","))
            }
        }
    }
}
