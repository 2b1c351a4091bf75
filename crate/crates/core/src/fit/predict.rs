//! Tie probabilities: conditional on the rest of the network, or
//! unconditional from simulation.

use nalgebra::DMatrix;

use super::linalg::dot;
use super::Problem;
use crate::error::{ErgmError, Result};
use crate::mcmc::{Chain, ChainConfig};

fn binary_only(problem: &Problem) -> Result<()> {
    if problem.model.valued {
        return Err(ErgmError::Unsupported(
            "tie probabilities are defined for binary models only".into(),
        ));
    }
    Ok(())
}

/// n x n matrix of P(tie | rest of the network); dyads outside the sample
/// space and the diagonal are NaN. Undirected results are symmetric.
pub fn predict_conditional(problem: &Problem, theta: &[f64]) -> Result<DMatrix<f64>> {
    binary_only(problem)?;
    let (net, model) = (problem.net, problem.model);
    let n = net.n();
    let eta = model.eta(theta);
    let mut out = DMatrix::from_element(n, n, f64::NAN);
    let mut buf = vec![0.0; model.dim()];
    for d in problem.universe.free_dyads() {
        if net.value(d.tail, d.head) != 0.0 {
            model.change(net, d.tail, d.head, 0.0, &mut buf);
            buf.iter_mut().for_each(|x| *x = -*x);
        } else {
            model.change(net, d.tail, d.head, 1.0, &mut buf);
        }
        let p = 1.0 / (1.0 + (-dot(&eta, &buf)).exp());
        out[(d.tail, d.head)] = p;
        if !net.directed() {
            out[(d.head, d.tail)] = p;
        }
    }
    Ok(out)
}

/// Tie frequencies over `nsim` networks drawn `config.interval` steps apart
/// after burn-in.
pub fn predict_unconditional(
    problem: &Problem,
    theta: &[f64],
    nsim: usize,
    config: &ChainConfig,
) -> Result<DMatrix<f64>> {
    binary_only(problem)?;
    let net = problem.net;
    let n = net.n();
    let mut chain = Chain::new(
        net,
        problem.model,
        theta,
        &problem.universe,
        &problem.reference,
        config.seed,
        0,
    )?;
    chain.advance(config.burnin)?;
    let mut counts = DMatrix::<f64>::zeros(n, n);
    for _ in 0..nsim {
        chain.advance(config.interval)?;
        for (d, _) in chain.net().edges() {
            counts[(d.tail, d.head)] += 1.0;
            if !net.directed() {
                counts[(d.head, d.tail)] += 1.0;
            }
        }
    }
    let mut out = counts / nsim.max(1) as f64;
    for i in 0..n {
        out[(i, i)] = f64::NAN;
    }
    for d in net.dyads() {
        if !problem.universe.contains(d) {
            out[(d.tail, d.head)] = f64::NAN;
            if !net.directed() {
                out[(d.head, d.tail)] = f64::NAN;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcmc::Reference;
    use crate::net::Network;
    use crate::terms::{Model, TermOptions};

    fn g4() -> Network {
        let mut net = Network::new(4, true, None).unwrap();
        for (t, h) in [(0, 1), (1, 2), (2, 0), (3, 0), (0, 3)] {
            net.set_value(t, h, 1.0);
        }
        net
    }

    #[test]
    fn edges_model_probabilities() {
        let net = g4();
        let model = Model::parse("edges", &net, false, TermOptions::default()).unwrap();
        let p = Problem::new(&net, &model, Reference::Bernoulli, None, None).unwrap();
        let theta = (5.0f64 / 7.0).ln();
        let m = predict_conditional(&p, &[theta]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    assert!(m[(i, j)].is_nan());
                } else {
                    assert!((m[(i, j)] - 5.0 / 12.0).abs() < 1e-12);
                }
            }
        }
        let cfg = ChainConfig {
            burnin: 1000,
            interval: 100,
            seed: 3,
            ..ChainConfig::default()
        };
        let u = predict_unconditional(&p, &[theta], 1000, &cfg).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert!((u[(i, j)] - 5.0 / 12.0).abs() < 0.05, "{}", u[(i, j)]);
                }
            }
        }
        let low = predict_conditional(&p, &[-50.0]).unwrap();
        assert!(low[(0, 1)] < 1e-20);
    }
}
