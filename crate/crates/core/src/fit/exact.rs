//! Exhaustive enumeration of the sample space and exact likelihoods.

use rustc_hash::FxHashMap;

use nalgebra::{DMatrix, DVector};

use super::linalg::{dot, log_sum_exp, pinv_sym};
use super::{FitResult, Method, Problem};
use crate::error::{ErgmError, Result};
use crate::mcmc::Reference;
use crate::net::Network;
use crate::space::DyadUniverse;
use crate::terms::Model;

/// Largest number of networks enumerated without `force`.
pub const ENUM_LIMIT: u128 = 1 << 28;

/// Distinct statistic vectors with their total reference weight.
#[derive(Clone, Debug)]
pub struct EnumTable {
    pub names: Vec<String>,
    pub rows: Vec<(Vec<f64>, f64)>,
    pub total_networks: u128,
}

impl EnumTable {
    pub fn total_weight(&self) -> f64 {
        self.rows.iter().map(|r| r.1).sum()
    }

    /// log of the normalizing constant at canonical parameters `eta`.
    pub fn log_kappa(&self, eta: &[f64]) -> f64 {
        let v: Vec<f64> = self
            .rows
            .iter()
            .map(|(g, w)| w.ln() + dot(eta, g))
            .collect();
        log_sum_exp(&v)
    }

    /// Mean and covariance of the statistics at `eta`.
    fn moments(&self, eta: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let lk = self.log_kappa(eta);
        let p = self.names.len();
        let mut mean = DVector::zeros(p);
        let mut second = DMatrix::zeros(p, p);
        for (g, w) in &self.rows {
            let pr = (w.ln() + dot(eta, g) - lk).exp();
            let v = DVector::from_column_slice(g);
            mean += &v * pr;
            second += &v * v.transpose() * pr;
        }
        let cov = second - &mean * mean.transpose();
        (mean, cov)
    }
}

/// Number of networks in the space, or `None` beyond `u128`.
fn state_count(k: usize, m: usize) -> Option<u128> {
    (k as u128).checked_pow(u32::try_from(m).ok()?)
}

/// Tabulate the statistics of every network in `universe`, with dyads
/// outside it held at their values in `template`. Steps through the space
/// in reflected Gray-code order so each network differs from the previous
/// one in a single dyad.
pub fn allstats(
    template: &Network,
    model: &Model,
    universe: &DyadUniverse,
    reference: &Reference,
    force: bool,
) -> Result<EnumTable> {
    let support = reference.support().ok_or_else(|| {
        ErgmError::Unsupported(format!(
            "enumeration needs a finite support; {} has none",
            reference.name()
        ))
    })?;
    let free: Vec<_> = universe.free_dyads().collect();
    let k = support.len();
    let states = state_count(k, free.len());
    if !force && states.is_none_or(|s| s > ENUM_LIMIT) {
        return Err(ErgmError::Estimation(format!(
            "the sample space has {}^{} networks, more than the 2^28 limit; pass force to enumerate anyway",
            k,
            free.len()
        )));
    }
    let total_networks =
        states.ok_or_else(|| ErgmError::Unsupported("sample space too large".into()))?;

    let mut net = template.clone();
    net.clear_missing();
    for d in &free {
        net.set_value(d.tail, d.head, support[0]);
    }
    let mut stats = model.eval(&net);
    let mut log_h: f64 = net
        .dyads()
        .map(|d| reference.log_h(net.value(d.tail, d.head)))
        .sum();
    let p = model.dim();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut index: FxHashMap<Box<[i64]>, usize> = FxHashMap::default();
    let mut key = vec![0i64; p];
    let mut record = |stats: &[f64], log_h: f64| {
        for (k, s) in key.iter_mut().zip(stats) {
            *k = (s * 1e6).round() as i64;
        }
        let w = log_h.exp();
        match index.get(key.as_slice()) {
            Some(&i) => rows[i].1 += w,
            None => {
                index.insert(key.clone().into_boxed_slice(), rows.len());
                rows.push((stats.to_vec(), w));
            }
        }
    };
    record(&stats, log_h);

    let mut digit = vec![0usize; free.len()];
    let mut up = vec![true; free.len()];
    let mut delta = vec![0.0; p];
    loop {
        let mut j = None;
        for i in 0..free.len() {
            let ok = if up[i] {
                digit[i] + 1 < k
            } else {
                digit[i] > 0
            };
            if ok {
                j = Some(i);
                break;
            }
            up[i] = !up[i];
        }
        let Some(j) = j else {
            break;
        };
        let d = free[j];
        let old = support[digit[j]];
        digit[j] = if up[j] { digit[j] + 1 } else { digit[j] - 1 };
        let new = support[digit[j]];
        model.change(&net, d.tail, d.head, new, &mut delta);
        for (s, x) in stats.iter_mut().zip(&delta) {
            *s += x;
        }
        log_h += reference.log_h(new) - reference.log_h(old);
        net.set_value(d.tail, d.head, new);
        record(&stats, log_h);
    }
    rows.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(EnumTable {
        names: model.names(),
        rows,
        total_networks,
    })
}

/// Exact log-likelihood of a network with statistics `obs` and reference
/// log-weight `obs_log_h`.
pub fn exact_loglik(
    model: &Model,
    theta: &[f64],
    table: &EnumTable,
    obs: &[f64],
    obs_log_h: f64,
) -> Result<f64> {
    let eta = model.eta(theta);
    let lk = table.log_kappa(&eta);
    if !lk.is_finite() {
        return Err(ErgmError::Estimation(
            "the normalizing constant is not finite".into(),
        ));
    }
    Ok(dot(&eta, obs) + obs_log_h - lk)
}

/// Maximum likelihood by enumeration of the whole sample space.
pub fn exact_mle(problem: &Problem, force: bool) -> Result<FitResult> {
    if problem.unobserved.is_some() {
        return Err(ErgmError::Unsupported(
            "exact fits of partially observed networks are not implemented".into(),
        ));
    }
    let (net, model) = (problem.net, problem.model);
    let table = allstats(net, model, &problem.universe, &problem.reference, force)?;
    let obs = model.eval(net);
    let obs_h: f64 = net
        .dyads()
        .map(|d| problem.reference.log_h(net.value(d.tail, d.head)))
        .sum();
    let ll = |th: &[f64]| exact_loglik(model, th, &table, &obs, obs_h);
    let mut theta = vec![0.0; model.n_params()];
    let mut cur = ll(&theta)?;
    let mut info = DMatrix::zeros(theta.len(), theta.len());
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=200 {
        iterations = it;
        let eta = model.eta(&theta);
        let j = model.eta_jacobian(&theta);
        let (mean, cov) = table.moments(&eta);
        let grad = j.transpose() * (DVector::from_column_slice(&obs) - mean);
        info = j.transpose() * cov * &j;
        if grad.amax() < 1e-10 {
            converged = true;
            break;
        }
        let step = pinv_sym(&info) * &grad;
        let mut scale = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let cand: Vec<f64> = theta
                .iter()
                .zip(step.iter())
                .map(|(t, s)| t + scale * s)
                .collect();
            let l = ll(&cand)?;
            if l >= cur {
                moved = cand != theta;
                theta = cand;
                cur = l;
                break;
            }
            scale *= 0.5;
        }
        if !moved {
            converged = grad.amax() < 1e-6 * (1.0 + cur.abs());
            break;
        }
    }
    let mut fit = FitResult::new(problem, theta, pinv_sym(&info), Method::Exact);
    fit.iterations = iterations;
    fit.converged = converged;
    if !converged {
        fit.diagnostics
            .push("the exact likelihood did not converge; the MLE may not exist".into());
    }
    fit.set_loglik(problem, Some(cur));
    Ok(fit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::TermOptions;

    fn table(net: &Network, text: &str, r: &Reference) -> EnumTable {
        let valued = !r.is_binary();
        let model = Model::parse(text, net, valued, TermOptions::default()).unwrap();
        allstats(net, &model, &DyadUniverse::full(net), r, false).unwrap()
    }

    #[test]
    fn three_node_edges_table() {
        let net = Network::new(3, false, None).unwrap();
        let t = table(&net, "edges", &Reference::Bernoulli);
        let mut rows: Vec<(f64, f64)> = t.rows.iter().map(|(g, w)| (g[0], *w)).collect();
        rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        assert_eq!(rows, vec![(0.0, 1.0), (1.0, 3.0), (2.0, 3.0), (3.0, 1.0)]);
    }

    #[test]
    fn multiplicities_sum_to_state_count() {
        for (n, directed) in [(4, true), (5, false), (6, false), (4, false)] {
            let net = Network::new(n, directed, None).unwrap();
            let text = if directed {
                "edges + triangle + mutual"
            } else {
                "edges + triangle"
            };
            let t = table(&net, text, &Reference::Bernoulli);
            let m = if directed {
                n * (n - 1)
            } else {
                n * (n - 1) / 2
            };
            assert_eq!(t.total_weight(), (1u64 << m) as f64);
            assert_eq!(t.total_networks, 1u128 << m);
        }
    }

    #[test]
    fn single_dyad_discrete_uniform() {
        let mut net = Network::new(2, true, None).unwrap();
        net.set_value(1, 0, 2.0);
        let model = Model::parse("sum", &net, true, TermOptions::default()).unwrap();
        let mut u = DyadUniverse::full(&net);
        u.restrict(&crate::space::RunSet::from_values([0]));
        let t = allstats(&net, &model, &u, &Reference::DiscUnif { a: 0, b: 3 }, false).unwrap();
        let rows: Vec<(f64, f64)> = t.rows.iter().map(|(g, w)| (g[0], *w)).collect();
        assert_eq!(rows, vec![(2.0, 1.0), (3.0, 1.0), (4.0, 1.0), (5.0, 1.0)]);
    }

    #[test]
    fn uniform_loglik_and_normalization() {
        let mut net = Network::new(3, false, None).unwrap();
        net.set_value(0, 1, 1.0);
        let model = Model::parse("edges", &net, false, TermOptions::default()).unwrap();
        let t = allstats(
            &net,
            &model,
            &DyadUniverse::full(&net),
            &Reference::Bernoulli,
            false,
        )
        .unwrap();
        let l = exact_loglik(&model, &[0.0], &t, &[1.0], 0.0).unwrap();
        assert!((l - (1.0f64 / 8.0).ln()).abs() < 1e-12);

        // log kappa from the table against direct summation over all graphs.
        let net = Network::new(4, false, None).unwrap();
        let model = Model::parse("edges + triangle", &net, false, TermOptions::default()).unwrap();
        let t = allstats(
            &net,
            &model,
            &DyadUniverse::full(&net),
            &Reference::Bernoulli,
            false,
        )
        .unwrap();
        let eta = [-0.3, 0.8];
        let dyads: Vec<_> = net.dyads().collect();
        let mut direct = 0.0;
        for code in 0u32..64 {
            let mut g = Network::new(4, false, None).unwrap();
            for (b, d) in dyads.iter().enumerate() {
                if code >> b & 1 == 1 {
                    g.set_value(d.tail, d.head, 1.0);
                }
            }
            let s = model.eval(&g);
            direct += (eta[0] * s[0] + eta[1] * s[1]).exp();
        }
        let lk = t.log_kappa(&eta).exp();
        assert!(((lk - direct) / direct).abs() < 1e-10);
    }

    #[test]
    fn limit_needs_force() {
        let net = Network::new(9, false, None).unwrap();
        let model = Model::parse("edges", &net, false, TermOptions::default()).unwrap();
        let err = allstats(
            &net,
            &model,
            &DyadUniverse::full(&net),
            &Reference::Bernoulli,
            false,
        );
        assert!(matches!(err, Err(ErgmError::Estimation(_))));
    }

    #[test]
    fn exact_edges_mle_is_logit_density() {
        let mut net = Network::new(4, true, None).unwrap();
        for (t, h) in [(0, 1), (1, 2), (2, 0), (3, 0), (0, 3)] {
            net.set_value(t, h, 1.0);
        }
        let model = Model::parse("edges", &net, false, TermOptions::default()).unwrap();
        let p = Problem::new(&net, &model, Reference::Bernoulli, None, None).unwrap();
        let f = exact_mle(&p, false).unwrap();
        assert!((f.coef[0] - (5.0f64 / 7.0).ln()).abs() < 1e-8);
        assert_eq!(f.method, Method::Exact);
    }
}
