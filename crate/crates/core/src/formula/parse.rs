use super::ast::{Arg, BinOp, Expr, UnOp, PREC_NOT, PREC_TILDE, PREC_UNARY};
use crate::error::{ErgmError, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Str(String),
    Ident(String),
    Op(&'static str),
    Special(String),
    LParen,
    RParen,
    LBrack,
    DLBrack,
    RBrack,
    Comma,
    Assign,
    Eof,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

fn err(pos: usize, msg: impl Into<String>) -> ErgmError {
    ErgmError::Parse {
        pos,
        msg: msg.into(),
    }
}

impl<'a> Lexer<'a> {
    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn skip_space(&mut self) {
        while let Some(c) = self.peek_char() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else if c == '#' {
                while let Some(c) = self.peek_char() {
                    self.pos += c.len_utf8();
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn next_tok(&mut self) -> Result<(Tok, usize)> {
        self.skip_space();
        let start = self.pos;
        let rest = &self.src[self.pos..];
        let Some(c) = rest.chars().next() else {
            return Ok((Tok::Eof, start));
        };
        let two = rest.get(..2).unwrap_or("");
        let tok = if c.is_ascii_digit()
            || (c == '.' && rest[1..].starts_with(|d: char| d.is_ascii_digit()))
        {
            self.number()?
        } else if c.is_alphabetic() || c == '.' || c == '_' {
            let len = rest
                .char_indices()
                .find(|&(_, ch)| !(ch.is_alphanumeric() || ch == '.' || ch == '_'))
                .map_or(rest.len(), |(i, _)| i);
            self.pos += len;
            Tok::Ident(rest[..len].to_string())
        } else if c == '`' {
            let end = rest[1..]
                .find('`')
                .ok_or_else(|| err(start, "unterminated backquoted name"))?;
            self.pos += end + 2;
            Tok::Ident(rest[1..end + 1].to_string())
        } else if c == '"' || c == '\'' {
            self.string(c)?
        } else if c == '%' {
            let end = rest[1..]
                .find('%')
                .ok_or_else(|| err(start, "unterminated %operator%"))?;
            self.pos += end + 2;
            Tok::Special(rest[1..end + 1].to_string())
        } else {
            let op: Option<&'static str> = match two {
                "==" => Some("=="),
                "!=" => Some("!="),
                "<=" => Some("<="),
                ">=" => Some(">="),
                "&&" => Some("&&"),
                "||" => Some("||"),
                _ => None,
            };
            if let Some(op) = op {
                self.pos += 2;
                Tok::Op(op)
            } else if two == "[[" {
                self.pos += 2;
                Tok::DLBrack
            } else {
                self.pos += c.len_utf8();
                match c {
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBrack,
                    ']' => Tok::RBrack,
                    ',' => Tok::Comma,
                    '=' => Tok::Assign,
                    '+' => Tok::Op("+"),
                    '-' => Tok::Op("-"),
                    '*' => Tok::Op("*"),
                    '/' => Tok::Op("/"),
                    '^' => Tok::Op("^"),
                    '<' => Tok::Op("<"),
                    '>' => Tok::Op(">"),
                    '!' => Tok::Op("!"),
                    '&' => Tok::Op("&"),
                    '|' => Tok::Op("|"),
                    ':' => Tok::Op(":"),
                    '~' => Tok::Op("~"),
                    other => return Err(err(start, format!("unexpected character `{other}`"))),
                }
            }
        };
        Ok((tok, start))
    }

    fn number(&mut self) -> Result<Tok> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let mut i = self.pos;
        while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
            i += 1;
        }
        if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
            let mut j = i + 1;
            if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                j += 1;
            }
            if j < bytes.len() && bytes[j].is_ascii_digit() {
                while j < bytes.len() && bytes[j].is_ascii_digit() {
                    j += 1;
                }
                i = j;
            }
        }
        let text = &self.src[start..i];
        let x: f64 = text
            .parse()
            .map_err(|_| err(start, format!("malformed number `{text}`")))?;
        if i < bytes.len() && bytes[i] == b'L' {
            i += 1;
        }
        self.pos = i;
        Ok(Tok::Num(x))
    }

    fn string(&mut self, q: char) -> Result<Tok> {
        let start = self.pos;
        let mut out = String::new();
        let mut chars = self.src[self.pos + 1..].char_indices();
        loop {
            let Some((i, c)) = chars.next() else {
                return Err(err(start, "unterminated string"));
            };
            if c == q {
                self.pos += i + 2;
                return Ok(Tok::Str(out));
            }
            if c == '\\' {
                match chars.next() {
                    Some((_, 'n')) => out.push('\n'),
                    Some((_, 't')) => out.push('\t'),
                    Some((_, e)) => out.push(e),
                    None => return Err(err(start, "unterminated string")),
                }
            } else {
                out.push(c);
            }
        }
    }
}

/// Recursive-descent (precedence climbing) parser over R-like syntax.
struct Parser {
    toks: Vec<(Tok, usize)>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn pos(&self) -> usize {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            Err(err(
                self.pos(),
                format!("expected {what}, found {:?}", self.peek()),
            ))
        }
    }

    fn infix(&self) -> Option<(BinOp, u8)> {
        let op = match self.peek() {
            Tok::Op(s) => match *s {
                "+" => BinOp::Add,
                "-" => BinOp::Sub,
                "*" => BinOp::Mul,
                "/" => BinOp::Div,
                "^" => BinOp::Pow,
                "==" => BinOp::Eq,
                "!=" => BinOp::Ne,
                "<" => BinOp::Lt,
                "<=" => BinOp::Le,
                ">" => BinOp::Gt,
                ">=" => BinOp::Ge,
                "&" => BinOp::And,
                "&&" => BinOp::AndAnd,
                "|" => BinOp::Or,
                "||" => BinOp::OrOr,
                ":" => BinOp::Colon,
                _ => return None,
            },
            Tok::Special(s) => BinOp::Special(s.clone()),
            _ => return None,
        };
        let p = op.prec();
        Some((op, p))
    }

    fn expr(&mut self, min: u8) -> Result<Expr> {
        let mut lhs = self.prefix()?;
        loop {
            if matches!(self.peek(), Tok::Op("~")) {
                if PREC_TILDE < min {
                    break;
                }
                self.bump();
                let rhs = self.expr(PREC_TILDE + 1)?;
                lhs = Expr::Formula(Some(Box::new(lhs)), Box::new(rhs));
                continue;
            }
            let Some((op, p)) = self.infix() else { break };
            if p < min {
                break;
            }
            self.bump();
            let next = if op.right_assoc() { p } else { p + 1 };
            let rhs = self.expr(next)?;
            lhs = if op == BinOp::Special(">".into()) {
                pipe(lhs, rhs, self.pos())?
            } else {
                Expr::Binary(op, Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr> {
        let pos = self.pos();
        let base = match self.bump() {
            Tok::Num(x) => Expr::Num(x),
            Tok::Str(s) => Expr::Str(s),
            Tok::Op("-") => Expr::Unary(UnOp::Neg, Box::new(self.expr(PREC_UNARY)?)),
            Tok::Op("+") => Expr::Unary(UnOp::Plus, Box::new(self.expr(PREC_UNARY)?)),
            Tok::Op("!") => Expr::Unary(UnOp::Not, Box::new(self.expr(PREC_NOT)?)),
            Tok::Op("~") => Expr::Formula(None, Box::new(self.expr(PREC_TILDE + 1)?)),
            Tok::LParen => {
                let e = self.expr(0)?;
                self.expect(Tok::RParen, "`)`")?;
                Expr::Paren(Box::new(e))
            }
            Tok::Ident(name) => match name.as_str() {
                "TRUE" => Expr::Bool(true),
                "FALSE" => Expr::Bool(false),
                "NULL" => Expr::Null,
                "Inf" => Expr::Num(f64::INFINITY),
                "function" => return self.function(),
                _ if *self.peek() == Tok::LParen => {
                    self.bump();
                    let args = self.args()?;
                    Expr::Call(name, args)
                }
                _ => Expr::Ident(name),
            },
            t => return Err(err(pos, format!("unexpected token {t:?}"))),
        };
        self.postfix(base)
    }

    fn postfix(&mut self, mut e: Expr) -> Result<Expr> {
        loop {
            match self.peek() {
                Tok::LBrack => {
                    self.bump();
                    let i = self.expr(0)?;
                    self.expect(Tok::RBrack, "`]`")?;
                    e = Expr::Index(Box::new(e), Box::new(i), false);
                }
                Tok::DLBrack => {
                    self.bump();
                    let i = self.expr(0)?;
                    self.expect(Tok::RBrack, "`]]`")?;
                    self.expect(Tok::RBrack, "`]]`")?;
                    e = Expr::Index(Box::new(e), Box::new(i), true);
                }
                _ => return Ok(e),
            }
        }
    }

    fn function(&mut self) -> Result<Expr> {
        self.expect(Tok::LParen, "`(` after `function`")?;
        let mut params = Vec::new();
        while *self.peek() != Tok::RParen {
            match self.bump() {
                Tok::Ident(p) => params.push(p),
                t => return Err(err(self.pos(), format!("bad parameter {t:?}"))),
            }
            if *self.peek() == Tok::Comma {
                self.bump();
            }
        }
        self.bump();
        let body = self.expr(PREC_TILDE)?;
        Ok(Expr::Function(params, Box::new(body)))
    }

    fn args(&mut self) -> Result<Vec<Arg>> {
        let mut args = Vec::new();
        if *self.peek() == Tok::RParen {
            self.bump();
            return Ok(args);
        }
        loop {
            let named = match (self.peek(), &self.toks.get(self.i + 1).map(|t| &t.0)) {
                (Tok::Ident(n), Some(Tok::Assign)) => Some(n.clone()),
                (Tok::Str(n), Some(Tok::Assign)) => Some(n.clone()),
                _ => None,
            };
            if named.is_some() {
                self.bump();
                self.bump();
            }
            let value = self.expr(0)?;
            args.push(Arg { name: named, value });
            match self.bump() {
                Tok::Comma => continue,
                Tok::RParen => return Ok(args),
                t => return Err(err(self.pos(), format!("expected `,` or `)`, found {t:?}"))),
            }
        }
    }
}

fn pipe(lhs: Expr, rhs: Expr, pos: usize) -> Result<Expr> {
    match rhs {
        Expr::Call(name, mut args) => {
            args.insert(
                0,
                Arg {
                    name: None,
                    value: lhs,
                },
            );
            Ok(Expr::Call(name, args))
        }
        Expr::Ident(name) => Ok(Expr::Call(
            name,
            vec![Arg {
                name: None,
                value: lhs,
            }],
        )),
        _ => Err(err(pos, "right side of %>% must be a call")),
    }
}

/// Parse one complete expression.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let mut lx = Lexer { src, pos: 0 };
    let mut toks = Vec::new();
    loop {
        let (t, p) = lx.next_tok()?;
        let done = t == Tok::Eof;
        toks.push((t, p));
        if done {
            break;
        }
    }
    let mut p = Parser { toks, i: 0 };
    if *p.peek() == Tok::Eof {
        return Err(err(0, "empty input"));
    }
    let e = p.expr(0)?;
    if *p.peek() != Tok::Eof {
        return Err(err(p.pos(), format!("unexpected trailing {:?}", p.peek())));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rt(s: &str) -> String {
        parse_expr(s).unwrap().to_string()
    }

    #[test]
    fn precedence() {
        let e = parse_expr("a:b*c").unwrap();
        assert!(matches!(e, Expr::Binary(BinOp::Mul, _, _)));
        let e = parse_expr("-1:3").unwrap();
        match e {
            Expr::Binary(BinOp::Colon, l, _) => assert!(matches!(*l, Expr::Unary(UnOp::Neg, _))),
            _ => panic!(),
        }
        assert_eq!(rt("-2^2"), "-2^2");
        assert_eq!(rt("a ^ b ^ c"), "a^b^c");
        assert_eq!(rt("!a == b"), "!a==b");
    }

    #[test]
    fn names_print_compactly() {
        assert_eq!(
            rt("(Grade - mean(Grade)) / network.size(.)"),
            "(Grade-mean(Grade))/network.size(.)"
        );
        assert_eq!(rt("group != \"Outcasts\""), "group!=\"Outcasts\"");
        assert_eq!(
            rt("nodefactor(\"group\", levels = \"Turks\") == 2"),
            "nodefactor(\"group\",levels=\"Turks\")==2"
        );
        assert_eq!(rt("Grade >= 10 ~ Race"), "Grade>=10~Race");
    }

    #[test]
    fn formulas_and_pipes() {
        let e = parse_expr("(~Race) %>% COLLAPSE_SMALLEST(3, \"BWO\")").unwrap();
        match e {
            Expr::Call(n, args) => {
                assert_eq!(n, "COLLAPSE_SMALLEST");
                assert_eq!(args.len(), 3);
            }
            _ => panic!(),
        }
        let e = parse_expr("cbind(1,0,1) ~ nodeifactor(\"group\", levels=TRUE)").unwrap();
        assert!(matches!(e, Expr::Formula(Some(_), _)));
        let e = parse_expr("function(a) a %in% 7:9").unwrap();
        assert!(matches!(e, Expr::Function(_, _)));
        let e = parse_expr("pair[[1]] %in% c(7,8) && pair[[2]] %in% c(7,8)").unwrap();
        assert!(matches!(e, Expr::Binary(BinOp::AndAnd, _, _)));
    }

    #[test]
    fn errors_carry_positions() {
        match parse_expr("edges + (mutual") {
            Err(ErgmError::Parse { pos, .. }) => assert_eq!(pos, 15),
            other => panic!("{other:?}"),
        }
        assert!(parse_expr("edges +").is_err());
        assert!(parse_expr("\"abc").is_err());
    }
}
