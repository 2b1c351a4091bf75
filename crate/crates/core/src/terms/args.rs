use crate::error::{ErgmError, Result};
use crate::formula::{AttrSpec, Env, Expr, LevelSpec, Levels2Spec, TermExpr, Value};

/// Arguments of one term call, matched against its formal names.
pub(crate) struct Args {
    term: String,
    formals: Vec<&'static str>,
    vals: Vec<Option<Expr>>,
}

/// How a valued dyad enters a covariate-style statistic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Form {
    Sum,
    Nonzero,
}

impl Form {
    pub fn phi(self, y: f64) -> f64 {
        match self {
            Form::Sum => y,
            Form::Nonzero => f64::from(u8::from(y != 0.0)),
        }
    }

    /// Name infix: empty for the default `sum`.
    pub fn infix(self) -> &'static str {
        match self {
            Form::Sum => "",
            Form::Nonzero => ".nonzero",
        }
    }
}

impl Args {
    pub fn bind(term: &TermExpr, formals: &[&'static str]) -> Result<Args> {
        Ok(Args {
            term: term.name(),
            formals: formals.to_vec(),
            vals: term.bind(formals)?,
        })
    }

    pub fn err(&self, msg: impl Into<String>) -> ErgmError {
        ErgmError::term(self.term.clone(), msg)
    }

    pub fn get(&self, name: &str) -> Option<&Expr> {
        let k = self
            .formals
            .iter()
            .position(|f| *f == name)
            .expect("formal declared by the term");
        self.vals[k].as_ref()
    }

    pub fn required(&self, name: &str) -> Result<&Expr> {
        self.get(name)
            .ok_or_else(|| self.err(format!("missing argument `{name}`")))
    }

    fn value(&self, name: &str) -> Result<Option<Value>> {
        match self.get(name) {
            None => Ok(None),
            Some(e) => Env::new(None)
                .eval(e)
                .map(Some)
                .map_err(|err| self.err(format!("argument `{name}`: {err}"))),
        }
    }

    pub fn num(&self, name: &str, default: f64) -> Result<f64> {
        match self.value(name)? {
            None => Ok(default),
            Some(v) => v
                .as_scalar()
                .map_err(|e| self.err(format!("argument `{name}`: {e}"))),
        }
    }

    pub fn nums(&self, name: &str) -> Result<Option<Vec<f64>>> {
        match self.value(name)? {
            None | Some(Value::Null) => Ok(None),
            Some(v) => v
                .as_nums()
                .map(Some)
                .map_err(|e| self.err(format!("argument `{name}`: {e}"))),
        }
    }

    pub fn flag(&self, name: &str, default: bool) -> Result<bool> {
        match self.value(name)? {
            None => Ok(default),
            Some(v) => match v.as_bools() {
                Ok(b) if b.len() == 1 => Ok(b[0]),
                _ => Err(self.err(format!("argument `{name}` must be TRUE or FALSE"))),
            },
        }
    }

    pub fn string(&self, name: &str, default: &str) -> Result<String> {
        match self.get(name) {
            None => Ok(default.to_string()),
            Some(Expr::Str(s)) => Ok(s.clone()),
            Some(other) => {
                Err(self.err(format!("argument `{name}` must be a string, got {other}")))
            }
        }
    }

    pub fn attr(&self, name: &str) -> Result<AttrSpec> {
        AttrSpec::parse(self.required(name)?)
    }

    pub fn levels(&self, name: &str, default: LevelSpec) -> Result<LevelSpec> {
        match self.get(name) {
            None => Ok(default),
            Some(e) => LevelSpec::parse(e),
        }
    }

    pub fn levels2(&self, name: &str, default: Levels2Spec) -> Result<Levels2Spec> {
        match self.get(name) {
            None => Ok(default),
            Some(e) => Levels2Spec::parse(e),
        }
    }

    /// `form` argument of valued covariate terms; binary models ignore it.
    pub fn form(&self, valued: bool) -> Result<Form> {
        if !valued {
            return Ok(Form::Sum);
        }
        match self.string("form", "sum")?.as_str() {
            "sum" => Ok(Form::Sum),
            "nonzero" => Ok(Form::Nonzero),
            other => Err(self.err(format!(
                "form must be \"sum\" or \"nonzero\", not `{other}`"
            ))),
        }
    }
}
