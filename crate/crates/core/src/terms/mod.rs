//! The statistic catalog and the model container that concatenates terms.

mod args;
mod dyadic;
mod structural;
mod valued;

use nalgebra::DMatrix;

use crate::error::{ErgmError, Result};
use crate::formula::{Formula, TermExpr};
use crate::net::{NetView, Network, Overlay};

pub(crate) use args::{Args, Form};
pub(crate) use dyadic::block_mixing;

/// Which networks a term understands.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Support {
    Binary,
    Valued,
    Both,
}

/// A realized statistic block.
///
/// `change` writes `g(y with y_th = new) - g(y)`; implementations must make
/// this equal the difference of two `eval` calls exactly.
pub trait Term: Send + Sync {
    fn names(&self) -> Vec<String>;

    fn dim(&self) -> usize {
        self.names().len()
    }

    fn dyad_independent(&self) -> bool;

    fn support(&self) -> Support {
        Support::Binary
    }

    fn eval(&self, net: &dyn NetView, out: &mut [f64]);

    fn change(&self, net: &dyn NetView, t: usize, h: usize, new: f64, out: &mut [f64]) {
        let p = out.len();
        let mut before = vec![0.0; p];
        self.eval(net, &mut before);
        let ov = Overlay::new(net, t, h, new);
        self.eval(&ov, out);
        for (o, b) in out.iter_mut().zip(before) {
            *o -= b;
        }
    }

    /// Per-dyad contribution `f_th(y)`; `false` when the term has none.
    fn dyadwise(&self, _t: usize, _h: usize, _y: f64, _out: &mut [f64]) -> bool {
        false
    }

    fn param_names(&self) -> Vec<String> {
        self.names()
    }

    /// Map free parameters to canonical ones; identity unless overridden.
    fn eta(&self, theta: &[f64], out: &mut [f64]) {
        out.copy_from_slice(theta);
    }

    /// `d eta / d theta` (dim x params), or `None` for the identity.
    fn eta_jacobian(&self, _theta: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    /// Box constraints on the free parameters.
    fn param_bounds(&self) -> Vec<(f64, f64)> {
        vec![(f64::NEG_INFINITY, f64::INFINITY); self.param_names().len()]
    }
}

/// What to do when an interaction involves a dyad-dependent term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum InteractPolicy {
    #[default]
    Error,
    Message,
    Warning,
    Silent,
}

impl std::str::FromStr for InteractPolicy {
    type Err = ErgmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "error" => Ok(InteractPolicy::Error),
            "message" => Ok(InteractPolicy::Message),
            "warning" => Ok(InteractPolicy::Warning),
            "silent" => Ok(InteractPolicy::Silent),
            _ => Err(ErgmError::Unsupported(format!(
                "interact.dependent must be error, message, warning or silent, not `{s}`"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TermOptions {
    pub interact_dependent: InteractPolicy,
    /// Reserved for geometrically weighted terms; no shipped term reads it.
    pub gw_cutoff: usize,
}

impl Default for TermOptions {
    fn default() -> Self {
        TermOptions {
            interact_dependent: InteractPolicy::Error,
            gw_cutoff: 30,
        }
    }
}

/// Realization context threaded through nested formulas.
pub struct Ctx {
    pub valued: bool,
    pub opts: TermOptions,
    pub warnings: Vec<String>,
}

impl Ctx {
    pub fn new(valued: bool, opts: TermOptions) -> Self {
        Ctx {
            valued,
            opts,
            warnings: Vec::new(),
        }
    }

    pub(crate) fn with_valued<T>(&mut self, valued: bool, f: impl FnOnce(&mut Ctx) -> T) -> T {
        let old = self.valued;
        self.valued = valued;
        let out = f(self);
        self.valued = old;
        out
    }
}

/// Build one term from its formula node against `net`.
pub fn realize(term: &TermExpr, net: &Network, ctx: &mut Ctx) -> Result<Box<dyn Term>> {
    let t = match term {
        TermExpr::Interact(a, b) => crate::operators::interaction(a, b, net, ctx)?,
        TermExpr::Term { name, .. } => {
            let name = name.as_str();
            if let Some(t) = crate::operators::realize(name, term, net, ctx)? {
                t
            } else if let Some(t) = dyadic::realize(name, term, net, ctx)? {
                t
            } else if let Some(t) = structural::realize(name, term, net, ctx)? {
                t
            } else if let Some(t) = valued::realize(name, term, net, ctx)? {
                t
            } else {
                return Err(ErgmError::term(name, "unknown term"));
            }
        }
    };
    let label = term.name();
    match (t.support(), ctx.valued) {
        (Support::Binary, true) => Err(ErgmError::term(
            label,
            "binary term in a valued model; wrap it in B()",
        )),
        (Support::Valued, false) => Err(ErgmError::term(
            label,
            "valued term in a binary model; pass a response",
        )),
        _ => Ok(t),
    }
}

/// Realize every term of a formula.
pub fn realize_all(f: &Formula, net: &Network, ctx: &mut Ctx) -> Result<Vec<Box<dyn Term>>> {
    f.terms.iter().map(|t| realize(t, net, ctx)).collect()
}

/// Concatenation of terms with a combined parameter map.
pub struct TermList {
    terms: Vec<Box<dyn Term>>,
    offsets: Vec<usize>,
    poffsets: Vec<usize>,
}

impl TermList {
    pub fn new(terms: Vec<Box<dyn Term>>) -> Self {
        let mut offsets = vec![0];
        let mut poffsets = vec![0];
        for t in &terms {
            offsets.push(offsets.last().expect("nonempty") + t.dim());
            poffsets.push(poffsets.last().expect("nonempty") + t.param_names().len());
        }
        TermList {
            terms,
            offsets,
            poffsets,
        }
    }

    pub fn terms(&self) -> &[Box<dyn Term>] {
        &self.terms
    }

    pub fn dim(&self) -> usize {
        *self.offsets.last().expect("nonempty")
    }

    pub fn n_params(&self) -> usize {
        *self.poffsets.last().expect("nonempty")
    }

    pub fn names(&self) -> Vec<String> {
        self.terms.iter().flat_map(|t| t.names()).collect()
    }

    pub fn param_names(&self) -> Vec<String> {
        self.terms.iter().flat_map(|t| t.param_names()).collect()
    }

    pub fn dyad_independent(&self) -> bool {
        self.terms.iter().all(|t| t.dyad_independent())
    }

    pub fn curved(&self) -> bool {
        let theta = vec![0.0; self.n_params()];
        self.terms.iter().enumerate().any(|(k, t)| {
            t.eta_jacobian(&theta[self.poffsets[k]..self.poffsets[k + 1]])
                .is_some()
        })
    }

    pub fn eval(&self, net: &dyn NetView) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.eval_into(net, &mut out);
        out
    }

    pub fn eval_into(&self, net: &dyn NetView, out: &mut [f64]) {
        for (k, t) in self.terms.iter().enumerate() {
            t.eval(net, &mut out[self.offsets[k]..self.offsets[k + 1]]);
        }
    }

    pub fn change(&self, net: &dyn NetView, t: usize, h: usize, new: f64, out: &mut [f64]) {
        for (k, term) in self.terms.iter().enumerate() {
            term.change(
                net,
                t,
                h,
                new,
                &mut out[self.offsets[k]..self.offsets[k + 1]],
            );
        }
    }

    pub fn dyadwise(&self, t: usize, h: usize, y: f64, out: &mut [f64]) -> bool {
        for (k, term) in self.terms.iter().enumerate() {
            if !term.dyadwise(t, h, y, &mut out[self.offsets[k]..self.offsets[k + 1]]) {
                return false;
            }
        }
        true
    }

    pub fn eta(&self, theta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (k, t) in self.terms.iter().enumerate() {
            t.eta(
                &theta[self.poffsets[k]..self.poffsets[k + 1]],
                &mut out[self.offsets[k]..self.offsets[k + 1]],
            );
        }
        out
    }

    pub fn eta_jacobian(&self, theta: &[f64]) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.dim(), self.n_params());
        for (k, t) in self.terms.iter().enumerate() {
            let (r0, c0) = (self.offsets[k], self.poffsets[k]);
            let th = &theta[c0..self.poffsets[k + 1]];
            match t.eta_jacobian(th) {
                Some(m) => j.view_mut((r0, c0), (m.nrows(), m.ncols())).copy_from(&m),
                None => {
                    for i in 0..t.dim() {
                        j[(r0 + i, c0 + i)] = 1.0;
                    }
                }
            }
        }
        j
    }

    pub fn param_bounds(&self) -> Vec<(f64, f64)> {
        self.terms.iter().flat_map(|t| t.param_bounds()).collect()
    }
}

/// A parsed and realized model.
pub struct Model {
    pub formula: Formula,
    pub list: TermList,
    pub valued: bool,
    pub warnings: Vec<String>,
}

impl Model {
    pub fn new(formula: Formula, net: &Network, valued: bool, opts: TermOptions) -> Result<Model> {
        let mut ctx = Ctx::new(valued, opts);
        let terms = realize_all(&formula, net, &mut ctx)?;
        Ok(Model {
            formula,
            list: TermList::new(terms),
            valued,
            warnings: ctx.warnings,
        })
    }

    pub fn parse(text: &str, net: &Network, valued: bool, opts: TermOptions) -> Result<Model> {
        Model::new(Formula::parse(text)?, net, valued, opts)
    }

    pub fn dim(&self) -> usize {
        self.list.dim()
    }

    pub fn n_params(&self) -> usize {
        self.list.n_params()
    }

    pub fn names(&self) -> Vec<String> {
        self.list.names()
    }

    /// Parameter names with repeats disambiguated by a `#k` suffix.
    pub fn unique_param_names(&self) -> Vec<String> {
        let raw = self.list.param_names();
        let mut out = Vec::with_capacity(raw.len());
        for (i, n) in raw.iter().enumerate() {
            let k = raw[..i].iter().filter(|m| *m == n).count();
            out.push(if k == 0 {
                n.clone()
            } else {
                format!("{n}#{}", k + 1)
            });
        }
        out
    }

    pub fn eval(&self, net: &dyn NetView) -> Vec<f64> {
        self.list.eval(net)
    }

    pub fn change(&self, net: &dyn NetView, t: usize, h: usize, new: f64, out: &mut [f64]) {
        self.list.change(net, t, h, new, out)
    }

    pub fn dyad_independent(&self) -> bool {
        self.list.dyad_independent()
    }

    pub fn curved(&self) -> bool {
        self.list.curved()
    }

    pub fn eta(&self, theta: &[f64]) -> Vec<f64> {
        self.list.eta(theta)
    }

    pub fn eta_jacobian(&self, theta: &[f64]) -> DMatrix<f64> {
        self.list.eta_jacobian(theta)
    }
}

/// Statistics of `net` under the model text; missing dyads count as 0.
pub fn summary_stats(
    net: &Network,
    text: &str,
    valued: bool,
    opts: TermOptions,
) -> Result<(Vec<String>, Vec<f64>, Vec<String>)> {
    let model = Model::parse(text, net, valued, opts)?;
    let mut warnings = model.warnings.clone();
    if !net.missing().is_empty() {
        warnings.push(format!(
            "{} missing dyads were treated as 0",
            net.missing().len()
        ));
    }
    let stats = model.eval(net);
    Ok((model.names(), stats, warnings))
}

#[cfg(test)]
pub(crate) mod testutil {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::net::AttrColumn;

    pub fn random_net(seed: u64, n: usize, directed: bool, density: f64) -> Network {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = Network::new(n, directed, None).unwrap();
        for d in net.dyads().collect::<Vec<_>>() {
            if rng.random::<f64>() < density {
                net.set_value(d.tail, d.head, 1.0);
            }
        }
        let cat: Vec<String> = (0..n).map(|i| ["a", "b", "c"][i % 3].to_string()).collect();
        net.set_attr("c", AttrColumn::Categorical(cat)).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i % 4) as f64 + 0.5).collect();
        net.set_attr("x", AttrColumn::Numeric(x)).unwrap();
        let b: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
        net.set_attr("b", AttrColumn::Boolean(b)).unwrap();
        net
    }

    pub fn random_valued(seed: u64, n: usize, directed: bool, max: u32) -> Network {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut net = random_net(seed, n, directed, 0.0);
        for d in net.dyads().collect::<Vec<_>>() {
            let v = rng.random_range(0..=max);
            if v > 0 {
                net.set_value(d.tail, d.head, f64::from(v));
            }
        }
        net
    }

    /// Assert `change` equals the eval difference for every dyad and value.
    pub fn check_changes(net: &Network, text: &str, valued: bool, values: &[f64]) {
        let m = Model::parse(text, net, valued, TermOptions::default()).unwrap();
        let base = m.eval(net);
        let mut out = vec![0.0; m.dim()];
        for d in net.dyads() {
            for &v in values {
                m.change(net, d.tail, d.head, v, &mut out);
                let mut after = net.clone();
                after.set_value(d.tail, d.head, v);
                let want = m.eval(&after);
                for k in 0..m.dim() {
                    let diff = want[k] - base[k];
                    assert!(
                        (out[k] - diff).abs() < 1e-9,
                        "{text}: stat {k} at ({},{})<-{v}: change {} vs diff {}",
                        d.tail,
                        d.head,
                        out[k],
                        diff
                    );
                }
            }
        }
    }
}
