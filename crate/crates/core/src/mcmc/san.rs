//! Simulated annealing towards a network with given statistics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Reference;
use crate::error::{ErgmError, Result};
use crate::net::Network;
use crate::space::DyadUniverse;
use crate::terms::Model;

/// Search for a network in `universe` whose statistics approach `target`,
/// minimising a scaled squared distance over `steps` single-dyad moves with a
/// geometric cooling schedule. Returns the best network seen.
pub fn san(
    net0: &Network,
    model: &Model,
    target: &[f64],
    universe: &DyadUniverse,
    reference: &Reference,
    steps: usize,
    seed: u64,
) -> Result<Network> {
    if target.len() != model.dim() {
        return Err(ErgmError::Estimation(format!(
            "target has {} statistics, the model {}",
            target.len(),
            model.dim()
        )));
    }
    if universe.n_free() == 0 {
        return Ok(net0.clone());
    }
    let weight: Vec<f64> = target.iter().map(|t| 1.0 / t.abs().max(1.0)).collect();
    let dist = |s: &[f64]| -> f64 {
        s.iter()
            .zip(target)
            .zip(&weight)
            .map(|((x, t), w)| w * (x - t).powi(2))
            .sum()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = net0.clone();
    net.clear_missing();
    let mut stats = model.eval(&net);
    let mut cur = dist(&stats);
    let mut best = (cur, net.clone());
    let mut delta = vec![0.0; model.dim()];
    let mut next = vec![0.0; model.dim()];
    let (t0, t1) = (1.0f64, 1e-3f64);
    for i in 0..steps {
        if best.0 == 0.0 {
            break;
        }
        let temp = t0 * (t1 / t0).powf(i as f64 / steps.max(1) as f64);
        let d = universe.sample(&mut rng)?;
        let old = net.value(d.tail, d.head);
        let Some((new, _)) = reference.propose(old, &mut rng) else {
            continue;
        };
        if !universe.check_hard(&net, d, new) {
            continue;
        }
        model.change(&net, d.tail, d.head, new, &mut delta);
        for k in 0..next.len() {
            next[k] = stats[k] + delta[k];
        }
        let cand = dist(&next);
        if cand <= cur || rng.random::<f64>() < ((cur - cand) / temp).exp() {
            net.set_value(d.tail, d.head, new);
            stats.copy_from_slice(&next);
            cur = cand;
            if cur < best.0 {
                best = (cur, net.clone());
            }
        }
    }
    Ok(best.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::terms::TermOptions;

    #[test]
    fn reaches_attainable_targets() {
        let net = Network::new(18, true, None).unwrap();
        let model = Model::parse("edges + mutual", &net, false, TermOptions::default()).unwrap();
        let u = DyadUniverse::full(&net);
        let got = san(
            &net,
            &model,
            &[88.0, 28.0],
            &u,
            &Reference::Bernoulli,
            200_000,
            1,
        )
        .unwrap();
        assert_eq!(model.eval(&got), vec![88.0, 28.0]);
    }
}
