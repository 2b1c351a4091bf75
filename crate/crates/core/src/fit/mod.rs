//! Estimation and prediction.

mod exact;
mod linalg;
mod mcmle;
mod mple;
mod predict;
mod report;

use nalgebra::DMatrix;

pub use exact::{allstats, exact_loglik, exact_mle, EnumTable, ENUM_LIMIT};
pub use mcmle::{fit_target_stats, mcmle, McmleConfig};
pub use mple::{mple, MpleRows};
pub use predict::{predict_conditional, predict_unconditional};
pub use report::{fit_json, fit_table};

use crate::error::Result;
use crate::mcmc::Reference;
use crate::net::{Dyad, Network};
use crate::space::{
    build_universe, observation_constraints, observation_universe, Constraint, DyadUniverse,
};
use crate::terms::Model;

/// A network, a model and the sample space the model lives on.
pub struct Problem<'a> {
    pub net: &'a Network,
    pub model: &'a Model,
    pub reference: Reference,
    pub universe: DyadUniverse,
    /// Unobserved dyads within `universe`, when the network is only
    /// partially observed.
    pub unobserved: Option<DyadUniverse>,
}

impl<'a> Problem<'a> {
    /// Constraint texts default to those stored with the network.
    pub fn new(
        net: &'a Network,
        model: &'a Model,
        reference: Reference,
        constraints: Option<&str>,
        obs_constraints: Option<&str>,
    ) -> Result<Problem<'a>> {
        let text = constraints.or(net.meta.constraints.as_deref());
        let cs = match text {
            Some(t) if !t.trim().trim_start_matches('~').trim().is_empty() => {
                Constraint::parse_formula(t, net)?
            }
            _ => Vec::new(),
        };
        let universe = build_universe(net, &cs)?;
        let obs = observation_constraints(net, obs_constraints)?;
        let unobserved = observation_universe(net, &universe, &obs)?.filter(|u| u.n_free() > 0);
        Ok(Problem {
            net,
            model,
            reference,
            universe,
            unobserved,
        })
    }

    /// Free dyads whose values were observed.
    pub fn observed_dyads(&self) -> impl Iterator<Item = Dyad> + '_ {
        self.universe
            .free_dyads()
            .filter(move |d| self.unobserved.as_ref().is_none_or(|u| !u.contains(*d)))
    }

    pub fn n_observed(&self) -> usize {
        self.universe.n_free() - self.unobserved.as_ref().map_or(0, |u| u.n_free())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Mple,
    Mcmle,
    Exact,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Mple => "MPLE",
            Method::Mcmle => "MCMLE",
            Method::Exact => "EXACT",
        }
    }
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub names: Vec<String>,
    pub coef: Vec<f64>,
    /// Includes the Monte Carlo contribution for simulation-based fits.
    pub vcov: DMatrix<f64>,
    pub se: Vec<f64>,
    pub mcmc_se: Vec<f64>,
    pub loglik: Option<f64>,
    pub null_deviance: Option<f64>,
    pub residual_deviance: Option<f64>,
    /// Free observed dyads.
    pub df: usize,
    pub residual_df: usize,
    pub aic: Option<f64>,
    pub bic: Option<f64>,
    pub method: Method,
    pub iterations: usize,
    pub converged: bool,
    pub diagnostics: Vec<String>,
}

impl FitResult {
    pub(crate) fn new(
        problem: &Problem,
        coef: Vec<f64>,
        vcov: DMatrix<f64>,
        method: Method,
    ) -> Self {
        let p = coef.len();
        let se = (0..p).map(|k| vcov[(k, k)].max(0.0).sqrt()).collect();
        let df = problem.n_observed();
        FitResult {
            names: problem.model.unique_param_names(),
            coef,
            vcov,
            se,
            mcmc_se: vec![0.0; p],
            loglik: None,
            null_deviance: None,
            residual_deviance: None,
            df,
            residual_df: df.saturating_sub(p),
            aic: None,
            bic: None,
            method,
            iterations: 0,
            converged: true,
            diagnostics: Vec::new(),
        }
    }

    /// Fill the deviance fields from a log-likelihood.
    pub(crate) fn set_loglik(&mut self, problem: &Problem, loglik: Option<f64>) {
        self.null_deviance = null_loglik(problem).map(|l| -2.0 * l);
        self.loglik = loglik;
        if let Some(l) = loglik {
            let p = self.coef.len() as f64;
            self.residual_deviance = Some(-2.0 * l);
            self.aic = Some(-2.0 * l + 2.0 * p);
            self.bic = Some(-2.0 * l + p * (self.df as f64).ln());
        }
    }
}

/// Log-likelihood at the null model (all canonical parameters zero) over the
/// free observed dyads.
pub(crate) fn null_loglik(problem: &Problem) -> Option<f64> {
    let base = problem.reference.log_base_mass()?;
    let mut l = 0.0;
    for d in problem.observed_dyads() {
        l += problem.reference.log_h(problem.net.value(d.tail, d.head)) - base;
    }
    Some(l)
}

/// Exact log-likelihood of a dyad-independent model over the free observed
/// dyads; `None` for dyad-dependent models or unbounded supports.
pub(crate) fn independent_loglik(problem: &Problem, theta: &[f64]) -> Option<f64> {
    let model = problem.model;
    if !model.dyad_independent() {
        return None;
    }
    let support = problem.reference.support()?;
    let eta = model.eta(theta);
    let mut g = vec![0.0; model.dim()];
    let mut l = 0.0;
    let mut terms = Vec::with_capacity(support.len());
    for d in problem.observed_dyads() {
        terms.clear();
        for &v in &support {
            if !model.list.dyadwise(d.tail, d.head, v, &mut g) {
                return None;
            }
            terms.push(linalg::dot(&eta, &g) + problem.reference.log_h(v));
        }
        let y = problem.net.value(d.tail, d.head);
        model.list.dyadwise(d.tail, d.head, y, &mut g);
        l += linalg::dot(&eta, &g) + problem.reference.log_h(y) - linalg::log_sum_exp(&terms);
    }
    Some(l)
}
