//! Monte Carlo maximum likelihood.
//!
//! Each iteration simulates statistics at the current parameters and
//! maximises a log-normal approximation to the likelihood ratio. The target
//! (observed statistics, or the mean of a chain over the networks consistent
//! with a partial observation) is first pulled towards the sample mean until
//! it lies inside the convex hull of the draws.

use minilp::{ComparisonOp, LinearExpr, OptimizationDirection};
use nalgebra::{DMatrix, DVector};

use super::exact::{allstats, exact_loglik};
use super::linalg::{col_means, covariance, is_pd, mean_covariance, pinv_sym};
use super::mple::mple;
use super::{independent_loglik, FitResult, Method, Problem};
use crate::error::{ErgmError, Result};
use crate::mcmc::{run_chains, san, ChainConfig, Reference};
use crate::net::Network;
use crate::space::{build_universe, Constraint};
use crate::terms::Model;

#[derive(Clone, Debug)]
pub struct McmleConfig {
    pub chain: ChainConfig,
    pub max_iter: usize,
    /// Largest estimated log-likelihood gain counted as convergence.
    pub tolerance: f64,
    pub start: Option<Vec<f64>>,
    /// Networks beyond this count are not enumerated for the log-likelihood.
    pub loglik_enum_limit: u128,
}

impl Default for McmleConfig {
    fn default() -> Self {
        McmleConfig {
            chain: ChainConfig::default(),
            max_iter: 60,
            tolerance: 0.01,
            start: None,
            loglik_enum_limit: 1 << 20,
        }
    }
}

/// Fraction of the way from the sample mean to the target that the trial
/// point is held back from the hull boundary.
const HULL_SHRINK: f64 = 0.95;

/// Largest step length in (0, 1] such that the mean moved that far towards
/// `target`, then shrunk towards the mean, lies in the hull of the rows of
/// `sample`.
pub(crate) fn hummel_step(
    sample: &DMatrix<f64>,
    mean: &DVector<f64>,
    target: &DVector<f64>,
) -> f64 {
    let (m, p) = sample.shape();
    let sd: Vec<f64> = (0..p)
        .map(|k| {
            let c = sample.column(k);
            let v = c.iter().map(|x| (x - mean[k]).powi(2)).sum::<f64>() / m.max(2) as f64;
            v.sqrt()
        })
        .collect();
    let dir: Vec<f64> = (0..p).map(|k| target[k] - mean[k]).collect();
    let mut rows = Vec::new();
    for k in 0..p {
        if sd[k] == 0.0 || sd[k] < 1e-12 * (1.0 + mean[k].abs()) {
            if dir[k].abs() > 1e-9 * (1.0 + mean[k].abs()) {
                return 0.0;
            }
        } else {
            rows.push(k);
        }
    }
    if rows.is_empty() {
        return 1.0;
    }
    let mut lp = minilp::Problem::new(OptimizationDirection::Maximize);
    let gamma = lp.add_var(1.0, (0.0, 1.0));
    let lambda: Vec<_> = (0..m)
        .map(|_| lp.add_var(0.0, (0.0, f64::INFINITY)))
        .collect();
    for &k in &rows {
        let mut e = LinearExpr::empty();
        for (i, l) in lambda.iter().enumerate() {
            let z = (sample[(i, k)] - mean[k]) / sd[k];
            if z != 0.0 {
                e.add(*l, z);
            }
        }
        e.add(gamma, -HULL_SHRINK * dir[k] / sd[k]);
        lp.add_constraint(e, ComparisonOp::Eq, 0.0);
    }
    let mut e = LinearExpr::empty();
    for l in &lambda {
        e.add(*l, 1.0);
    }
    lp.add_constraint(e, ComparisonOp::Eq, 1.0);
    match lp.solve() {
        Ok(sol) => sol[gamma].clamp(0.0, 1.0),
        Err(_) => 0.0,
    }
}

/// Maximise (eta - eta0)' r - (eta - eta0)' H (eta - eta0) / 2 over the
/// model parameters by Gauss-Newton. Returns the new parameters and the
/// attained value, an estimate of the log-likelihood gain.
fn lognormal_step(
    model: &Model,
    theta0: &[f64],
    r: &DVector<f64>,
    h: &DMatrix<f64>,
) -> (Vec<f64>, f64) {
    let eta0 = DVector::from_vec(model.eta(theta0));
    let bounds = model.list.param_bounds();
    let value = |th: &[f64]| -> f64 {
        let d = DVector::from_vec(model.eta(th)) - &eta0;
        d.dot(r) - 0.5 * (d.transpose() * h * &d)[(0, 0)]
    };
    let mut theta = theta0.to_vec();
    let mut cur = 0.0;
    for _ in 0..50 {
        let j = model.eta_jacobian(&theta);
        let d = DVector::from_vec(model.eta(&theta)) - &eta0;
        let grad = j.transpose() * (r - h * &d);
        let a = j.transpose() * h * &j;
        let s = pinv_sym(&a) * &grad;
        if s.amax() < 1e-12 {
            break;
        }
        let mut scale = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let cand: Vec<f64> = theta
                .iter()
                .zip(s.iter())
                .zip(&bounds)
                .map(|((t, x), (lo, hi))| (t + scale * x).clamp(*lo, *hi))
                .collect();
            let v = value(&cand);
            if v >= cur {
                moved = cand != theta;
                theta = cand;
                cur = v;
                break;
            }
            scale *= 0.5;
        }
        if !moved || !model.curved() {
            break;
        }
    }
    (theta, cur)
}

fn iteration_seed(seed: u64, it: usize, stream: u64) -> u64 {
    seed.wrapping_add((it as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

struct Draws {
    stats: DMatrix<f64>,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl Draws {
    fn new(stats: DMatrix<f64>) -> Self {
        Draws {
            mean: col_means(&stats),
            cov: covariance(&stats),
            stats,
        }
    }
}

fn simulate(
    starts: &mut Vec<Network>,
    problem: &Problem,
    universe: &crate::space::DyadUniverse,
    theta: &[f64],
    cfg: &ChainConfig,
    seed: u64,
) -> Result<Draws> {
    let cfg = ChainConfig {
        seed,
        ..cfg.clone()
    };
    let out = run_chains(
        starts,
        problem.model,
        theta,
        &cfg,
        universe,
        &problem.reference,
    )?;
    *starts = out.final_nets;
    Ok(Draws::new(out.stats))
}

/// Starting values: the pseudo-likelihood estimate for binary models,
/// zero otherwise.
fn start_values(problem: &Problem, cfg: &McmleConfig, diagnostics: &mut Vec<String>) -> Vec<f64> {
    if let Some(s) = &cfg.start {
        return s.clone();
    }
    let zeros = vec![0.0; problem.model.n_params()];
    if problem.model.valued {
        return zeros;
    }
    match mple(problem) {
        Ok(f) if f.coef.iter().all(|c| c.is_finite()) => f.coef,
        _ => {
            diagnostics.push("pseudo-likelihood start failed; starting from zero".into());
            zeros
        }
    }
}

/// Monte Carlo MLE. `target` replaces the observed statistics when given.
pub fn mcmle(problem: &Problem, cfg: &McmleConfig, target: Option<&[f64]>) -> Result<FitResult> {
    let model = problem.model;
    let p = model.dim();
    if let Some(t) = target {
        if t.len() != p {
            return Err(ErgmError::Estimation(format!(
                "target has {} statistics, the model {p}",
                t.len()
            )));
        }
    }
    let mut diagnostics = Vec::new();
    let mut theta = start_values(problem, cfg, &mut diagnostics);
    if theta.len() != model.n_params() {
        return Err(ErgmError::Estimation(
            "starting values have the wrong length".into(),
        ));
    }
    let observed =
        DVector::from_vec(target.map_or_else(|| model.eval(problem.net), <[f64]>::to_vec));
    let chains = cfg.chain.chains.max(1);
    let mut starts = vec![problem.net.clone(); chains];
    let mut obs_starts = starts.clone();

    let mut streak = 0;
    let mut converged = false;
    let mut last_gamma = 0.0;
    let mut iterations = 0;
    for it in 1..=cfg.max_iter {
        iterations = it;
        let eta = model.eta(&theta);
        if eta.iter().any(|x| !x.is_finite()) {
            return Err(ErgmError::Estimation(
                "non-finite canonical parameters".into(),
            ));
        }
        let sim = simulate(
            &mut starts,
            problem,
            &problem.universe,
            &theta,
            &cfg.chain,
            iteration_seed(cfg.chain.seed, it, 0),
        )?;
        let (xi, h) = match &problem.unobserved {
            Some(u) => {
                let obs = simulate(
                    &mut obs_starts,
                    problem,
                    u,
                    &theta,
                    &cfg.chain,
                    iteration_seed(cfg.chain.seed, it, 1),
                )?;
                let h = &sim.cov - &obs.cov;
                let h = if is_pd(&h) { h } else { sim.cov.clone() };
                (obs.mean, h)
            }
            None => (observed.clone(), sim.cov.clone()),
        };
        let gamma = hummel_step(&sim.stats, &sim.mean, &xi);
        last_gamma = gamma;
        let r = (&xi - &sim.mean) * gamma;
        let (next, gain) = lognormal_step(model, &theta, &r, &h);
        diagnostics.push(format!(
            "iteration {it}: step length {gamma:.3}, estimated log-likelihood gain {gain:.4}"
        ));
        theta = next;
        if gamma >= 1.0 - 1e-9 && gain < cfg.tolerance {
            streak += 1;
            if streak >= 2 {
                converged = true;
                break;
            }
        } else {
            streak = 0;
        }
    }
    if !converged && last_gamma < 1.0 {
        return Err(ErgmError::Estimation(format!(
            "the observed statistics remain outside the convex hull of simulated statistics after \
             {iterations} iterations (step length {last_gamma:.3}); the model may be degenerate"
        )));
    }
    if !converged {
        diagnostics.push(format!("no convergence within {iterations} iterations"));
    }

    // Covariances at the estimate.
    let it = iterations + 1;
    let sim = simulate(
        &mut starts,
        problem,
        &problem.universe,
        &theta,
        &cfg.chain,
        iteration_seed(cfg.chain.seed, it, 0),
    )?;
    let mut mc = mean_covariance(&sim.stats);
    let (xi, h) = match &problem.unobserved {
        Some(u) => {
            let obs = simulate(
                &mut obs_starts,
                problem,
                u,
                &theta,
                &cfg.chain,
                iteration_seed(cfg.chain.seed, it, 1),
            )?;
            mc += mean_covariance(&obs.stats);
            let h = &sim.cov - &obs.cov;
            (obs.mean, if is_pd(&h) { h } else { sim.cov.clone() })
        }
        None => (observed.clone(), sim.cov.clone()),
    };
    // A last step from the final sample, so the estimate carries Monte Carlo
    // error only and not the convergence tolerance.
    if converged && hummel_step(&sim.stats, &sim.mean, &xi) >= 1.0 - 1e-9 {
        let (next, gain) = lognormal_step(model, &theta, &(&xi - &sim.mean), &h);
        diagnostics.push(format!(
            "final step: estimated log-likelihood gain {gain:.4}"
        ));
        theta = next;
    }
    let j = model.eta_jacobian(&theta);
    let info_inv = pinv_sym(&(j.transpose() * h * &j));
    let mc_vcov = &info_inv * (j.transpose() * mc * &j) * &info_inv;
    let vcov = &info_inv + &mc_vcov;
    let mut fit = FitResult::new(problem, theta, vcov, Method::Mcmle);
    fit.mcmc_se = (0..fit.coef.len())
        .map(|k| mc_vcov[(k, k)].max(0.0).sqrt())
        .collect();
    fit.iterations = iterations;
    fit.converged = converged;
    fit.diagnostics = diagnostics;
    let ll = if target.is_some() {
        None
    } else {
        loglik(problem, &fit.coef, cfg)
    };
    fit.set_loglik(problem, ll);
    Ok(fit)
}

/// Exact log-likelihood when the model is dyad-independent or the sample
/// space is small enough to enumerate.
fn loglik(problem: &Problem, theta: &[f64], cfg: &McmleConfig) -> Option<f64> {
    if let Some(l) = independent_loglik(problem, theta) {
        return Some(l);
    }
    if problem.unobserved.is_some() {
        return None;
    }
    let k = problem.reference.support()?.len() as f64;
    let states = (problem.universe.n_free() as f64) * k.log2();
    if states > (cfg.loglik_enum_limit as f64).log2() {
        return None;
    }
    let (net, model) = (problem.net, problem.model);
    let table = allstats(net, model, &problem.universe, &problem.reference, true).ok()?;
    let obs_h: f64 = net
        .dyads()
        .map(|d| problem.reference.log_h(net.value(d.tail, d.head)))
        .sum();
    exact_loglik(model, theta, &table, &model.eval(net), obs_h).ok()
}

/// Fit against target statistics, starting from a network annealed towards
/// them from `template`.
pub fn fit_target_stats(
    template: &Network,
    model: &Model,
    reference: Reference,
    constraints: Option<&str>,
    target: &[f64],
    cfg: &McmleConfig,
) -> Result<FitResult> {
    let cs = match constraints {
        Some(t) if !t.trim().trim_start_matches('~').trim().is_empty() => {
            Constraint::parse_formula(t, template)?
        }
        _ => Vec::new(),
    };
    let universe = build_universe(template, &cs)?;
    let steps = (universe.n_free() * 200).max(50_000);
    let start = san(
        template,
        model,
        target,
        &universe,
        &reference,
        steps,
        cfg.chain.seed,
    )?;
    let mut start = start;
    start.meta.constraints = constraints
        .map(str::to_string)
        .or(template.meta.constraints.clone());
    start.meta.obs_constraints = None;
    let problem = Problem {
        net: &start,
        model,
        reference,
        universe,
        unobserved: None,
    };
    let mut fit = mcmle(&problem, cfg, Some(target))?;
    let got = model.eval(&start);
    fit.diagnostics
        .insert(0, format!("annealed start statistics: {:?}", got));
    Ok(fit)
}
