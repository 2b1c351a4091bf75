//! Maximum pseudo-likelihood: logistic regression of free observed dyads on
//! their change statistics, with identical rows aggregated.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use super::linalg::{dot, pinv_sym};
use super::{FitResult, Method, Problem};
use crate::error::{ErgmError, Result};
use crate::terms::Model;

/// Distinct change-statistic rows with tie and dyad counts.
#[derive(Clone, Debug, Default)]
pub struct MpleRows {
    pub delta: Vec<Vec<f64>>,
    pub ties: Vec<f64>,
    pub total: Vec<f64>,
}

impl MpleRows {
    pub fn build(problem: &Problem) -> Result<MpleRows> {
        if problem.model.valued {
            return Err(ErgmError::Unsupported(
                "pseudo-likelihood applies to binary models only".into(),
            ));
        }
        let (net, model) = (problem.net, problem.model);
        let mut rows = MpleRows::default();
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut buf = vec![0.0; model.dim()];
        for d in problem.observed_dyads() {
            let tie = net.value(d.tail, d.head) != 0.0;
            if tie {
                model.change(net, d.tail, d.head, 0.0, &mut buf);
                buf.iter_mut().for_each(|x| *x = -*x);
            } else {
                model.change(net, d.tail, d.head, 1.0, &mut buf);
            }
            // Normalise -0.0 so equal rows share a key.
            let key: Vec<u64> = buf.iter().map(|x| (x + 0.0).to_bits()).collect();
            let k = *seen.entry(key).or_insert_with(|| {
                rows.delta.push(buf.clone());
                rows.ties.push(0.0);
                rows.total.push(0.0);
                rows.delta.len() - 1
            });
            rows.total[k] += 1.0;
            if tie {
                rows.ties[k] += 1.0;
            }
        }
        if rows.delta.is_empty() {
            return Err(ErgmError::Estimation(
                "no free observed dyads to fit".into(),
            ));
        }
        Ok(rows)
    }

    fn softplus(x: f64) -> f64 {
        x.max(0.0) + (-x.abs()).exp().ln_1p()
    }

    pub fn loglik(&self, eta: &[f64]) -> f64 {
        (0..self.delta.len())
            .map(|i| {
                let x = dot(eta, &self.delta[i]);
                self.ties[i] * x - self.total[i] * Self::softplus(x)
            })
            .sum()
    }

    /// Gradient and information with respect to the canonical parameters.
    fn score(&self, eta: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let p = eta.len();
        let mut g = DVector::zeros(p);
        let mut info = DMatrix::zeros(p, p);
        for i in 0..self.delta.len() {
            let x = dot(eta, &self.delta[i]);
            let pi = 1.0 / (1.0 + (-x).exp());
            let d = DVector::from_column_slice(&self.delta[i]);
            g += &d * (self.ties[i] - self.total[i] * pi);
            info += &d * d.transpose() * (self.total[i] * pi * (1.0 - pi));
        }
        (g, info)
    }
}

pub(crate) struct Newton {
    pub theta: Vec<f64>,
    pub info: DMatrix<f64>,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn clamp(theta: &mut [f64], bounds: &[(f64, f64)]) {
    for (t, (lo, hi)) in theta.iter_mut().zip(bounds) {
        *t = t.clamp(*lo, *hi);
    }
}

/// Newton-Raphson with step halving, in the model's own parameters.
pub(crate) fn maximize(rows: &MpleRows, model: &Model, start: &[f64]) -> Newton {
    let bounds = model.list.param_bounds();
    let mut theta = start.to_vec();
    let mut ll = rows.loglik(&model.eta(&theta));
    let mut info = DMatrix::zeros(theta.len(), theta.len());
    let max_iter = 200;
    for it in 1..=max_iter {
        let eta = model.eta(&theta);
        let j = model.eta_jacobian(&theta);
        let (g_eta, i_eta) = rows.score(&eta);
        let grad = j.transpose() * g_eta;
        info = j.transpose() * i_eta * &j;
        if grad.amax() < 1e-10 {
            return Newton {
                theta,
                info,
                loglik: ll,
                iterations: it,
                converged: true,
            };
        }
        let step = pinv_sym(&info) * &grad;
        let mut scale = 1.0;
        let mut moved = false;
        for _ in 0..40 {
            let mut cand: Vec<f64> = theta
                .iter()
                .zip(step.iter())
                .map(|(t, s)| t + scale * s)
                .collect();
            clamp(&mut cand, &bounds);
            let l = rows.loglik(&model.eta(&cand));
            if l >= ll {
                moved = cand != theta;
                theta = cand;
                ll = l;
                break;
            }
            scale *= 0.5;
        }
        if !moved {
            // No ascent direction left at machine precision.
            return Newton {
                theta,
                info,
                loglik: ll,
                iterations: it,
                converged: grad.amax() < 1e-6 * (1.0 + ll.abs()),
            };
        }
    }
    Newton {
        theta,
        info,
        loglik: ll,
        iterations: max_iter,
        converged: false,
    }
}

/// Coefficients beyond this magnitude signal separation: the likelihood
/// keeps increasing towards infinity.
const SEPARATION: f64 = 20.0;

pub fn mple(problem: &Problem) -> Result<FitResult> {
    let rows = MpleRows::build(problem)?;
    let model = problem.model;
    let fit = maximize(&rows, model, &vec![0.0; model.n_params()]);
    let mut coef = fit.theta;
    let mut diagnostics = Vec::new();
    let names = model.unique_param_names();
    for (k, c) in coef.iter_mut().enumerate() {
        if c.abs() > SEPARATION {
            diagnostics.push(format!(
                "separation: `{}` diverges; the observed dyads are perfectly predicted",
                names[k]
            ));
            *c = c.signum() * f64::INFINITY;
        }
    }
    if coef.iter().any(|c| c.is_nan()) {
        return Err(ErgmError::Estimation(
            "pseudo-likelihood maximization failed".into(),
        ));
    }
    let separated = !diagnostics.is_empty();
    let mut out = FitResult::new(problem, coef, pinv_sym(&fit.info), Method::Mple);
    out.iterations = fit.iterations;
    out.converged = fit.converged && !separated;
    if !model.dyad_independent() {
        diagnostics.push(
            "standard errors from the pseudo-likelihood are approximate for dyad-dependent models"
                .into(),
        );
    }
    out.diagnostics = diagnostics;
    let ll = model.dyad_independent().then_some(fit.loglik);
    out.set_loglik(problem, ll.filter(|l| l.is_finite()));
    Ok(out)
}
