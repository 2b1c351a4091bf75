//! Level selection for categorical attributes and for cells of mixing matrices.

use std::cmp::Ordering;

use super::ast::{fmt_num, Expr, UnOp};
use super::eval::{Atom, Env, Matrix, Value};
use crate::error::{ErgmError, Result};

/// One value of a categorical attribute.
#[derive(Clone, Debug, PartialEq)]
pub enum Level {
    Num(f64),
    Str(String),
    Bool(bool),
}

impl Level {
    pub fn label(&self) -> String {
        match self {
            Level::Num(x) => fmt_num(*x),
            Level::Str(s) => s.clone(),
            Level::Bool(b) => if *b { "TRUE" } else { "FALSE" }.to_string(),
        }
    }

    /// Default order: numeric, FALSE < TRUE, lexicographic; mixed kinds by label.
    pub fn default_cmp(&self, other: &Level) -> Ordering {
        match (self, other) {
            (Level::Num(a), Level::Num(b)) => a.partial_cmp(b).unwrap_or(Ordering::Equal),
            (Level::Bool(a), Level::Bool(b)) => a.cmp(b),
            (Level::Str(a), Level::Str(b)) => a.cmp(b),
            (a, b) => a.label().cmp(&b.label()),
        }
    }

    /// Equality with cross-kind matching through labels, so `"7"` selects 7.
    pub fn matches(&self, other: &Level) -> bool {
        match (self, other) {
            (Level::Num(a), Level::Num(b)) => a == b,
            (Level::Bool(a), Level::Bool(b)) => a == b,
            (Level::Str(a), Level::Str(b)) => a == b,
            (a, b) => a.label() == b.label(),
        }
    }

    pub(crate) fn atom(levels: &[Level]) -> Atom {
        if levels.iter().all(|l| matches!(l, Level::Num(_))) {
            Atom::Num(
                levels
                    .iter()
                    .map(|l| match l {
                        Level::Num(x) => *x,
                        _ => unreachable!(),
                    })
                    .collect(),
            )
        } else if levels.iter().all(|l| matches!(l, Level::Bool(_))) {
            Atom::Bool(
                levels
                    .iter()
                    .map(|l| matches!(l, Level::Bool(true)))
                    .collect(),
            )
        } else {
            Atom::Str(levels.iter().map(Level::label).collect())
        }
    }

    pub(crate) fn from_atom(a: &Atom) -> Vec<Level> {
        match a {
            Atom::Num(v) => v.iter().map(|&x| Level::Num(x)).collect(),
            Atom::Str(v) => v.iter().map(|s| Level::Str(s.clone())).collect(),
            Atom::Bool(v) => v.iter().map(|&b| Level::Bool(b)).collect(),
        }
    }
}

/// Distinct values in default order together with their frequencies.
pub fn tabulate(values: &[Level]) -> Vec<(Level, usize)> {
    let mut sorted: Vec<&Level> = values.iter().collect();
    sorted.sort_by(|a, b| a.default_cmp(b));
    let mut out: Vec<(Level, usize)> = Vec::new();
    for v in sorted {
        match out.last_mut() {
            Some((l, k)) if l.matches(v) => *k += 1,
            _ => out.push((v.clone(), 1)),
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum LevelSpec {
    All,
    Nothing,
    Indices(Vec<i64>),
    Mask(Vec<bool>),
    Values(Vec<Level>),
    Predicate(Value),
    Largest(usize),
    Smallest(usize),
    NegLargest(usize),
    NegSmallest(usize),
}

fn rank_arg(name: &str, args: &[super::ast::Arg]) -> Result<usize> {
    match args {
        [] => Ok(1),
        [a] => match a.value {
            Expr::Num(k) if k >= 1.0 && k.fract() == 0.0 => Ok(k as usize),
            _ => Err(ErgmError::Attr(format!(
                "{name}() needs a positive integer"
            ))),
        },
        _ => Err(ErgmError::Attr(format!(
            "{name}() takes at most one argument"
        ))),
    }
}

fn ranked(e: &Expr) -> Result<Option<(bool, usize)>> {
    match e {
        Expr::Ident(n) if n == "LARGEST" => Ok(Some((true, 1))),
        Expr::Ident(n) if n == "SMALLEST" => Ok(Some((false, 1))),
        Expr::Call(n, a) if n == "LARGEST" => Ok(Some((true, rank_arg(n, a)?))),
        Expr::Call(n, a) if n == "SMALLEST" => Ok(Some((false, rank_arg(n, a)?))),
        _ => Ok(None),
    }
}

fn from_value(v: Value) -> Result<LevelSpec> {
    match v {
        Value::Null => Ok(LevelSpec::All),
        Value::Func(_, _) => Ok(LevelSpec::Predicate(v)),
        Value::Atom(Atom::Bool(b)) if b == [true] => Ok(LevelSpec::All),
        Value::Atom(Atom::Bool(b)) if b == [false] => Ok(LevelSpec::Nothing),
        Value::Atom(Atom::Bool(b)) => Ok(LevelSpec::Mask(b)),
        Value::Atom(Atom::Num(x)) => {
            if x.iter().any(|v| v.fract() != 0.0) {
                return Err(ErgmError::Attr(
                    "level indices must be integers; wrap values in I()".into(),
                ));
            }
            Ok(LevelSpec::Indices(x.iter().map(|&v| v as i64).collect()))
        }
        Value::Atom(a @ Atom::Str(_)) => Ok(LevelSpec::Values(Level::from_atom(&a))),
        other => Err(ErgmError::Attr(format!(
            "cannot use {other:?} as a level selector"
        ))),
    }
}

impl LevelSpec {
    pub fn parse(e: &Expr) -> Result<LevelSpec> {
        let e = match e {
            Expr::Paren(inner) => inner,
            e => e,
        };
        if let Some((largest, k)) = ranked(e)? {
            return Ok(if largest {
                LevelSpec::Largest(k)
            } else {
                LevelSpec::Smallest(k)
            });
        }
        if let Expr::Unary(UnOp::Neg, inner) = e {
            if let Some((largest, k)) = ranked(inner)? {
                return Ok(if largest {
                    LevelSpec::NegLargest(k)
                } else {
                    LevelSpec::NegSmallest(k)
                });
            }
        }
        match e {
            Expr::Call(n, args) if n == "I" && args.len() == 1 => {
                let v = Env::new(None).eval(&args[0].value)?;
                let a = v
                    .atom()
                    .ok_or_else(|| ErgmError::Attr("I() needs a vector of levels".into()))?;
                Ok(LevelSpec::Values(Level::from_atom(a)))
            }
            Expr::Formula(None, rhs) => Ok(LevelSpec::Predicate(Value::Func(
                vec![".".into()],
                (**rhs).clone(),
            ))),
            _ => from_value(Env::new(None).eval(e)?),
        }
    }

    /// Apply to the observed attribute values; the result keeps default order
    /// except for explicit index or value lists, which keep the order given.
    pub fn resolve(&self, values: &[Level]) -> Result<Vec<Level>> {
        let table = tabulate(values);
        let levels: Vec<Level> = table.iter().map(|(l, _)| l.clone()).collect();
        self.resolve_table(&levels, &table)
    }

    fn resolve_table(&self, levels: &[Level], table: &[(Level, usize)]) -> Result<Vec<Level>> {
        let by_rank = |largest: bool, k: usize| -> Vec<usize> {
            let mut idx: Vec<usize> = (0..table.len()).collect();
            idx.sort_by(|&a, &b| {
                let o = table[a].1.cmp(&table[b].1);
                let o = if largest { o.reverse() } else { o };
                o.then(a.cmp(&b))
            });
            idx.truncate(k);
            idx
        };
        let keep_mask = |keep: &dyn Fn(usize) -> bool| -> Vec<Level> {
            (0..levels.len())
                .filter(|&i| keep(i))
                .map(|i| levels[i].clone())
                .collect()
        };
        match self {
            LevelSpec::All => Ok(levels.to_vec()),
            LevelSpec::Nothing => Ok(Vec::new()),
            LevelSpec::Indices(ix) => select_indices(levels, ix),
            LevelSpec::Mask(m) => {
                if m.is_empty() || levels.len() % m.len() != 0 {
                    return Err(ErgmError::Attr(format!(
                        "logical level mask of length {} does not fit {} levels",
                        m.len(),
                        levels.len()
                    )));
                }
                Ok(keep_mask(&|i| m[i % m.len()]))
            }
            LevelSpec::Values(vals) => vals
                .iter()
                .map(|v| {
                    levels
                        .iter()
                        .find(|l| l.matches(v))
                        .cloned()
                        .ok_or_else(|| {
                            ErgmError::Attr(format!("level `{}` is not present", v.label()))
                        })
                })
                .collect(),
            LevelSpec::Predicate(f) => {
                let mut env = Env::new(None);
                let arg = Value::Atom(Level::atom(levels));
                env.bind(".levels", arg.clone());
                let out = env.apply(f, vec![arg])?;
                let spec = from_value(out)?;
                if matches!(spec, LevelSpec::Predicate(_)) {
                    return Err(ErgmError::Attr(
                        "level predicate returned a function".into(),
                    ));
                }
                spec.resolve_table(levels, table)
            }
            LevelSpec::Largest(k) | LevelSpec::Smallest(k) => {
                let chosen = by_rank(matches!(self, LevelSpec::Largest(_)), *k);
                Ok(keep_mask(&|i| chosen.contains(&i)))
            }
            LevelSpec::NegLargest(k) | LevelSpec::NegSmallest(k) => {
                let chosen = by_rank(matches!(self, LevelSpec::NegLargest(_)), *k);
                Ok(keep_mask(&|i| !chosen.contains(&i)))
            }
        }
    }
}

fn select_indices<T: Clone>(items: &[T], ix: &[i64]) -> Result<Vec<T>> {
    let n = items.len() as i64;
    if ix.iter().any(|&i| i == 0 || i.abs() > n) {
        return Err(ErgmError::Attr(format!(
            "index out of range 1..{n} in {ix:?}"
        )));
    }
    if ix.iter().all(|&i| i > 0) {
        Ok(ix
            .iter()
            .map(|&i| items[(i - 1) as usize].clone())
            .collect())
    } else if ix.iter().all(|&i| i < 0) {
        Ok((0..items.len())
            .filter(|&k| !ix.contains(&(-(k as i64) - 1)))
            .map(|k| items[k].clone())
            .collect())
    } else {
        Err(ErgmError::Attr(
            "cannot mix positive and negative indices".into(),
        ))
    }
}

/// Cell selector for mixing matrices.
#[derive(Clone, Debug, PartialEq)]
pub enum Levels2Spec {
    All,
    Nothing,
    Indices(Vec<i64>),
    Mask(Vec<bool>),
    Matrix(Matrix),
    Predicate(Value),
}

/// A statistic of a mixing term: one or more (row, column) level-index cells.
#[derive(Clone, Debug, PartialEq)]
pub struct CellGroup {
    pub label: Option<String>,
    pub cells: Vec<(usize, usize)>,
}

impl Levels2Spec {
    pub fn parse(e: &Expr) -> Result<Levels2Spec> {
        let e = match e {
            Expr::Paren(inner) => inner,
            e => e,
        };
        if let Expr::Formula(None, rhs) = e {
            return Ok(Levels2Spec::Predicate(Value::Func(
                vec![".".into()],
                (**rhs).clone(),
            )));
        }
        Self::from_value(Env::new(None).eval(e)?)
    }

    fn from_value(v: Value) -> Result<Levels2Spec> {
        match v {
            Value::Matrix(m) => Ok(Levels2Spec::Matrix(m)),
            Value::Func(_, _) => Ok(Levels2Spec::Predicate(v)),
            other => match from_value(other)? {
                LevelSpec::All => Ok(Levels2Spec::All),
                LevelSpec::Nothing => Ok(Levels2Spec::Nothing),
                LevelSpec::Indices(i) => Ok(Levels2Spec::Indices(i)),
                LevelSpec::Mask(m) => Ok(Levels2Spec::Mask(m)),
                _ => Err(ErgmError::Attr(
                    "levels2 takes indices, a logical vector, a matrix or a predicate".into(),
                )),
            },
        }
    }

    /// Enumerate cells and select or group them. Symmetric mixing uses
    /// unordered pairs (r <= c) listed column by column; otherwise all pairs
    /// with the row index varying fastest.
    pub fn resolve(
        &self,
        rows: &[Level],
        cols: &[Level],
        symmetric: bool,
    ) -> Result<Vec<CellGroup>> {
        let cells: Vec<(usize, usize)> = if symmetric {
            (0..cols.len())
                .flat_map(|c| (0..=c).map(move |r| (r, c)))
                .filter(|&(r, _)| r < rows.len())
                .collect()
        } else {
            (0..cols.len())
                .flat_map(|c| (0..rows.len()).map(move |r| (r, c)))
                .collect()
        };
        let single = |cs: Vec<(usize, usize)>| -> Vec<CellGroup> {
            cs.into_iter()
                .map(|c| CellGroup {
                    label: None,
                    cells: vec![c],
                })
                .collect()
        };
        match self {
            Levels2Spec::All => Ok(single(cells)),
            Levels2Spec::Nothing => Ok(Vec::new()),
            Levels2Spec::Indices(ix) => Ok(single(select_indices(&cells, ix)?)),
            Levels2Spec::Mask(m) => {
                if m.is_empty() || cells.len() % m.len() != 0 {
                    return Err(ErgmError::Attr(format!(
                        "levels2 mask of length {} does not fit {} cells",
                        m.len(),
                        cells.len()
                    )));
                }
                Ok(single(
                    cells
                        .into_iter()
                        .enumerate()
                        .filter(|(i, _)| m[i % m.len()])
                        .map(|(_, c)| c)
                        .collect(),
                ))
            }
            Levels2Spec::Predicate(f) => {
                let pairs: Vec<Value> = cells
                    .iter()
                    .map(|&(r, c)| Value::Atom(Level::atom(&[rows[r].clone(), cols[c].clone()])))
                    .collect();
                let mut env = Env::new(None);
                let list = Value::List(pairs);
                env.bind(".levels", list.clone());
                let out = env.apply(f, vec![list])?;
                Self::from_value(out)?.resolve(rows, cols, symmetric)
            }
            Levels2Spec::Matrix(m) => {
                if m.nrow != rows.len() || m.ncol != cols.len() {
                    return Err(ErgmError::Attr(format!(
                        "levels2 matrix is {}x{} but the mixing matrix is {}x{}",
                        m.nrow,
                        m.ncol,
                        rows.len(),
                        cols.len()
                    )));
                }
                match &m.data {
                    Atom::Str(_) => {
                        let mut groups: Vec<CellGroup> = Vec::new();
                        for (r, c) in cells {
                            let mut lab = m.label(r, c);
                            if symmetric && lab.is_empty() {
                                lab = m.label(c, r);
                            }
                            if lab.is_empty() || lab == "NA" {
                                groups.push(CellGroup {
                                    label: None,
                                    cells: vec![(r, c)],
                                });
                            } else if let Some(g) =
                                groups.iter_mut().find(|g| g.label.as_deref() == Some(&lab))
                            {
                                g.cells.push((r, c));
                            } else {
                                groups.push(CellGroup {
                                    label: Some(lab),
                                    cells: vec![(r, c)],
                                });
                            }
                        }
                        Ok(groups)
                    }
                    data => {
                        let on = Value::Atom(data.clone()).as_bools()?;
                        let at = |r: usize, c: usize| on[c * m.nrow + r];
                        Ok(single(
                            cells
                                .into_iter()
                                .filter(|&(r, c)| at(r, c) || (symmetric && at(c, r)))
                                .collect(),
                        ))
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse_expr;

    fn grades() -> Vec<Level> {
        let counts = [
            (7.0, 62),
            (8.0, 40),
            (9.0, 42),
            (10.0, 25),
            (11.0, 24),
            (12.0, 12),
        ];
        counts
            .iter()
            .flat_map(|&(g, k)| std::iter::repeat_n(Level::Num(g), k))
            .collect()
    }

    fn resolve(src: &str) -> Vec<String> {
        LevelSpec::parse(&parse_expr(src).unwrap())
            .unwrap()
            .resolve(&grades())
            .unwrap()
            .iter()
            .map(Level::label)
            .collect()
    }

    #[test]
    fn five_spellings_agree() {
        let want = vec!["7", "8", "9"];
        assert_eq!(resolve("-SMALLEST(3)"), want);
        assert_eq!(resolve("I(7:9)"), want);
        assert_eq!(resolve("c(\"7\", \"8\", \"9\")"), want);
        assert_eq!(resolve("function(a) a %in% 7:9"), want);
        assert_eq!(resolve("~. %in% 7:9"), want);
        assert_eq!(resolve("1:3"), want);
        assert_eq!(resolve("-(4:6)"), want);
    }

    #[test]
    fn ranks_and_errors() {
        assert_eq!(resolve("LARGEST"), vec!["7"]);
        assert_eq!(resolve("SMALLEST(2)"), vec!["11", "12"]);
        assert_eq!(resolve("-LARGEST"), vec!["8", "9", "10", "11", "12"]);
        assert_eq!(resolve("TRUE").len(), 6);
        assert_eq!(resolve("-1").len(), 5);
        let bad = LevelSpec::parse(&parse_expr("7").unwrap()).unwrap();
        assert!(bad.resolve(&grades()).is_err());
        let mixed = LevelSpec::parse(&parse_expr("c(1,-2)").unwrap()).unwrap();
        assert!(mixed.resolve(&grades()).is_err());
    }

    #[test]
    fn frequency_ties_break_by_default_order() {
        let v: Vec<Level> = ["b", "a", "c", "c"]
            .iter()
            .map(|s| Level::Str(s.to_string()))
            .collect();
        let spec = LevelSpec::Smallest(1);
        assert_eq!(spec.resolve(&v).unwrap(), vec![Level::Str("a".into())]);
    }

    #[test]
    fn cells_symmetric_order() {
        let lv = vec![Level::Bool(false), Level::Bool(true)];
        let all = Levels2Spec::All.resolve(&lv, &lv, true).unwrap();
        let cells: Vec<_> = all.iter().map(|g| g.cells[0]).collect();
        assert_eq!(cells, vec![(0, 0), (0, 1), (1, 1)]);
        let dflt = Levels2Spec::Indices(vec![-1])
            .resolve(&lv, &lv, true)
            .unwrap();
        assert_eq!(dflt.len(), 2);
        let dir = Levels2Spec::All.resolve(&lv, &lv, false).unwrap();
        let cells: Vec<_> = dir.iter().map(|g| g.cells[0]).collect();
        assert_eq!(cells, vec![(0, 0), (1, 0), (0, 1), (1, 1)]);
    }

    #[test]
    fn labelled_matrix_groups() {
        let lv = vec![Level::Str("F".into()), Level::Str("M".into())];
        let spec = Levels2Spec::parse(
            &parse_expr("matrix(c(\"homophilous\", \"\", \"\", \"homophilous\"), 2, 2)").unwrap(),
        )
        .unwrap();
        let g = spec.resolve(&lv, &lv, true).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].label.as_deref(), Some("homophilous"));
        assert_eq!(g[0].cells, vec![(0, 0), (1, 1)]);
        assert_eq!(g[1].label, None);
        assert_eq!(g[1].cells, vec![(0, 1)]);
    }

    #[test]
    fn pair_predicate() {
        let lv: Vec<Level> = (7..=12).map(|g| Level::Num(g as f64)).collect();
        let spec = Levels2Spec::parse(
            &parse_expr(
                "~sapply(.levels, function(pair) pair[[1]] %in% c(7,8) && pair[[2]] %in% c(7,8))",
            )
            .unwrap(),
        )
        .unwrap();
        let g = spec.resolve(&lv, &lv, true).unwrap();
        let cells: Vec<_> = g.iter().map(|g| g.cells[0]).collect();
        assert_eq!(cells, vec![(0, 0), (0, 1), (1, 1)]);
    }
}
