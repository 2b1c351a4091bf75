//! Metropolis-Hastings sampling of ERGMs over a constrained sample space.
//!
//! Binary models use a tie/no-tie mixture: with probability 1/2 an existing
//! free tie is proposed for removal, otherwise a uniform free dyad is
//! toggled. Fixed edge counts use a swap of one tie and one non-tie. Valued
//! models draw a uniform free dyad and a new value from the reference's
//! kernel.

mod reference;
mod san;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use reference::Reference;
pub use san::san;

use crate::error::{ErgmError, Result};
use crate::net::{Dyad, Network};
use crate::space::DyadUniverse;
use crate::terms::Model;

#[derive(Clone, Debug, PartialEq)]
pub struct ChainConfig {
    pub burnin: usize,
    pub interval: usize,
    pub samplesize: usize,
    pub seed: u64,
    pub chains: usize,
    /// Largest dyad value a valued chain may reach before it is abandoned.
    pub value_ceiling: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            burnin: 1 << 14,
            interval: 1 << 7,
            samplesize: 1 << 10,
            seed: 0,
            chains: 1,
            value_ceiling: 1e4,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.interval == 0 || self.samplesize == 0 || self.chains == 0 {
            return Err(ErgmError::Sampler(
                "interval, samplesize and chains must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct SampleOut {
    /// One row per retained draw, chains stacked in order.
    pub stats: DMatrix<f64>,
    pub final_nets: Vec<Network>,
    pub acceptance_rate: f64,
}

/// Free dyads currently holding a tie, indexable for uniform choice.
struct TieSet {
    list: Vec<usize>,
    pos: Vec<usize>,
}

impl TieSet {
    const ABSENT: usize = usize::MAX;

    fn new(net: &Network, universe: &DyadUniverse) -> Self {
        let idx = universe.index();
        let mut s = TieSet {
            list: Vec::new(),
            pos: vec![Self::ABSENT; idx.len()],
        };
        for (d, _) in net.edges() {
            let k = idx.index(d);
            if universe.free().contains(k) {
                s.insert(k);
            }
        }
        s
    }

    fn len(&self) -> usize {
        self.list.len()
    }

    fn insert(&mut self, k: usize) {
        if self.pos[k] == Self::ABSENT {
            self.pos[k] = self.list.len();
            self.list.push(k);
        }
    }

    fn remove(&mut self, k: usize) {
        let p = self.pos[k];
        if p == Self::ABSENT {
            return;
        }
        let last = self.list.pop().expect("nonempty");
        if last != k {
            self.list[p] = last;
            self.pos[last] = p;
        }
        self.pos[k] = Self::ABSENT;
    }

    fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.list[rng.random_range(0..self.list.len())]
    }
}

/// One Markov chain: its network, current statistics and generator.
pub struct Chain<'a> {
    model: &'a Model,
    eta: Vec<f64>,
    universe: &'a DyadUniverse,
    reference: &'a Reference,
    net: Network,
    stats: Vec<f64>,
    ties: Option<TieSet>,
    rng: ChaCha8Rng,
    ceiling: f64,
    delta: Vec<f64>,
    delta2: Vec<f64>,
    proposed: u64,
    accepted: u64,
}

impl<'a> Chain<'a> {
    /// A chain started at `net0`, seeded with `seed` on stream `stream`.
    pub fn new(
        net0: &Network,
        model: &'a Model,
        theta: &[f64],
        universe: &'a DyadUniverse,
        reference: &'a Reference,
        seed: u64,
        stream: u64,
    ) -> Result<Chain<'a>> {
        if theta.len() != model.n_params() {
            return Err(ErgmError::Sampler(format!(
                "expected {} parameters, got {}",
                model.n_params(),
                theta.len()
            )));
        }
        let eta = model.eta(theta);
        if eta.iter().any(|x| !x.is_finite()) {
            return Err(ErgmError::Sampler("non-finite canonical parameter".into()));
        }
        if universe.n_free() == 0 {
            return Err(ErgmError::Sampler(
                "the constrained sample space has no free dyads".into(),
            ));
        }
        if reference.is_binary() == model.valued {
            return Err(ErgmError::Sampler(format!(
                "reference {} does not match a {} model",
                reference.name(),
                if model.valued { "valued" } else { "binary" }
            )));
        }
        if universe.edges_fixed() && !reference.is_binary() {
            return Err(ErgmError::Unsupported(
                "a fixed edge count applies to binary models only".into(),
            ));
        }
        let mut net = net0.clone();
        net.clear_missing();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let p = model.dim();
        Ok(Chain {
            model,
            eta,
            universe,
            reference,
            stats: model.eval(&net),
            ties: reference.is_binary().then(|| TieSet::new(&net, universe)),
            net,
            rng,
            ceiling: f64::INFINITY,
            delta: vec![0.0; p],
            delta2: vec![0.0; p],
            proposed: 0,
            accepted: 0,
        })
    }

    pub fn with_ceiling(mut self, ceiling: f64) -> Self {
        self.ceiling = ceiling;
        self
    }

    pub fn net(&self) -> &Network {
        &self.net
    }

    pub fn stats(&self) -> &[f64] {
        &self.stats
    }

    pub fn into_net(self) -> Network {
        self.net
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    fn dot(&self, d: &[f64]) -> f64 {
        self.eta
            .iter()
            .zip(d)
            .map(|(e, x)| if *x == 0.0 { 0.0 } else { e * x })
            .sum()
    }

    fn accept(&mut self, log_ratio: f64) -> bool {
        log_ratio >= 0.0 || self.rng.random::<f64>().ln() < log_ratio
    }

    fn apply(&mut self, d: Dyad, new: f64, delta_second: bool) {
        self.net.set_value(d.tail, d.head, new);
        let delta = if delta_second {
            &self.delta2
        } else {
            &self.delta
        };
        for (s, x) in self.stats.iter_mut().zip(delta) {
            *s += x;
        }
        if let Some(t) = &mut self.ties {
            let k = self.universe.index().index(d);
            if new != 0.0 {
                t.insert(k);
            } else {
                t.remove(k);
            }
        }
    }

    /// One proposal with its accept/reject decision.
    pub fn step(&mut self) -> Result<()> {
        self.proposed += 1;
        if self.universe.edges_fixed() {
            return self.swap_step();
        }
        if self.reference.is_binary() {
            self.toggle_step()
        } else {
            self.value_step()
        }
    }

    fn toggle_step(&mut self) -> Result<()> {
        let ties = self.ties.as_ref().expect("binary chain tracks ties");
        let (e, free) = (ties.len() as f64, self.universe.n_free() as f64);
        let d = if e > 0.0 && self.rng.random::<bool>() {
            let k = ties.pick(&mut self.rng);
            self.universe.index().dyad(k)
        } else {
            self.universe.sample(&mut self.rng)?
        };
        let on = self.net.value(d.tail, d.head) == 0.0;
        let new = if on { 1.0 } else { 0.0 };
        // Forward and reverse probabilities of proposing this dyad.
        let pick = |ties: f64| if ties > 0.0 { 0.5 / free } else { 1.0 / free };
        let log_q = if on {
            (0.5 / (e + 1.0) + 0.5 / free).ln() - pick(e).ln()
        } else {
            pick(e - 1.0).ln() - (0.5 / e + 0.5 / free).ln()
        };
        if !self.universe.check_hard(&self.net, d, new) {
            return Ok(());
        }
        self.model
            .change(&self.net, d.tail, d.head, new, &mut self.delta);
        let lr = self.dot(&self.delta) + log_q;
        if self.accept(lr) {
            self.accepted += 1;
            self.apply(d, new, false);
        }
        Ok(())
    }

    fn swap_step(&mut self) -> Result<()> {
        let ties = self.ties.as_ref().expect("binary chain tracks ties");
        if ties.len() == 0 || ties.len() == self.universe.n_free() {
            return Ok(());
        }
        let off = self.universe.index().dyad(ties.pick(&mut self.rng));
        let on = loop {
            let d = self.universe.sample(&mut self.rng)?;
            if self.net.value(d.tail, d.head) == 0.0 {
                break d;
            }
        };
        self.model
            .change(&self.net, off.tail, off.head, 0.0, &mut self.delta);
        self.apply(off, 0.0, false);
        let ok = self.universe.check_hard(&self.net, on, 1.0);
        if ok {
            self.model
                .change(&self.net, on.tail, on.head, 1.0, &mut self.delta2);
            let lr = self.dot(&self.delta) + self.dot(&self.delta2);
            if self.accept(lr) {
                self.accepted += 1;
                self.apply(on, 1.0, true);
                return Ok(());
            }
        }
        for x in &mut self.delta {
            *x = -*x;
        }
        self.apply(off, 1.0, false);
        Ok(())
    }

    fn value_step(&mut self) -> Result<()> {
        let d = self.universe.sample(&mut self.rng)?;
        let old = self.net.value(d.tail, d.head);
        let Some((new, log_q)) = self.reference.propose(old, &mut self.rng) else {
            return Ok(());
        };
        if !self.universe.check_hard(&self.net, d, new) {
            return Ok(());
        }
        self.model
            .change(&self.net, d.tail, d.head, new, &mut self.delta);
        let lr =
            self.dot(&self.delta) + self.reference.log_h(new) - self.reference.log_h(old) + log_q;
        if self.accept(lr) {
            if new > self.ceiling {
                return Err(ErgmError::Sampler(format!(
                    "a dyad value exceeded {}; the parameter is likely outside the natural \
                     parameter space (the normalizing constant diverges)",
                    self.ceiling
                )));
            }
            self.accepted += 1;
            self.apply(d, new, false);
        }
        Ok(())
    }

    pub fn advance(&mut self, steps: usize) -> Result<()> {
        for _ in 0..steps {
            self.step()?;
        }
        Ok(())
    }
}

/// Draws assigned to chain `c` of `chains` when splitting `total`.
fn share(total: usize, chains: usize, c: usize) -> usize {
    total / chains + usize::from(c < total % chains)
}

/// Simulate `config.samplesize` draws after burn-in, spread over
/// `config.chains` independent chains run in parallel. Output is
/// deterministic for a fixed seed and chain count.
pub fn run_chain(
    net0: &Network,
    model: &Model,
    theta: &[f64],
    config: &ChainConfig,
    universe: &DyadUniverse,
    reference: &Reference,
) -> Result<SampleOut> {
    run_chains(
        &vec![net0.clone(); config.chains.max(1)],
        model,
        theta,
        config,
        universe,
        reference,
    )
}

/// As [`run_chain`], with one starting network per chain.
pub fn run_chains(
    starts: &[Network],
    model: &Model,
    theta: &[f64],
    config: &ChainConfig,
    universe: &DyadUniverse,
    reference: &Reference,
) -> Result<SampleOut> {
    config.validate()?;
    let chains = config.chains;
    if starts.len() != chains {
        return Err(ErgmError::Sampler(
            "one starting network per chain is required".into(),
        ));
    }
    let run = |c: usize| -> Result<(Vec<Vec<f64>>, Network, u64, u64)> {
        let mut chain = Chain::new(
            &starts[c],
            model,
            theta,
            universe,
            reference,
            config.seed,
            c as u64,
        )?
        .with_ceiling(config.value_ceiling);
        chain.advance(config.burnin)?;
        let m = share(config.samplesize, chains, c);
        let mut rows = Vec::with_capacity(m);
        for _ in 0..m {
            chain.advance(config.interval)?;
            rows.push(chain.stats().to_vec());
        }
        let (p, a) = (chain.proposed, chain.accepted);
        Ok((rows, chain.into_net(), p, a))
    };
    let results: Vec<_> = if chains == 1 {
        vec![run(0)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..chains).map(|c| s.spawn(move || run(c))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sampler thread panicked"))
                .collect()
        })
    };
    let p = model.dim();
    let mut data = Vec::with_capacity(config.samplesize * p);
    let (mut nets, mut proposed, mut accepted) = (Vec::new(), 0, 0);
    for r in results {
        let (rows, net, pr, ac) = r?;
        data.extend(rows.into_iter().flatten());
        nets.push(net);
        proposed += pr;
        accepted += ac;
    }
    Ok(SampleOut {
        stats: DMatrix::from_row_slice(config.samplesize, p, &data),
        final_nets: nets,
        acceptance_rate: if proposed == 0 {
            0.0
        } else {
            accepted as f64 / proposed as f64
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::NetView;
    use crate::space::{build_universe, Constraint};
    use crate::terms::TermOptions;

    fn binary(net: &Network, text: &str) -> Model {
        Model::parse(text, net, false, TermOptions::default()).unwrap()
    }

    fn config(samplesize: usize, interval: usize, seed: u64) -> ChainConfig {
        ChainConfig {
            burnin: 2000,
            interval,
            samplesize,
            seed,
            ..ChainConfig::default()
        }
    }

    /// Mean and batch-means standard error of a column.
    fn mean_se(col: &[f64]) -> (f64, f64) {
        let m = col.iter().sum::<f64>() / col.len() as f64;
        let b = 50;
        let size = col.len() / b;
        let means: Vec<f64> = (0..b)
            .map(|i| col[i * size..(i + 1) * size].iter().sum::<f64>() / size as f64)
            .collect();
        let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (b - 1) as f64;
        (m, (var / b as f64).sqrt())
    }

    #[test]
    fn deterministic_under_seed() {
        let net = Network::new(8, true, None).unwrap();
        let model = binary(&net, "edges + mutual");
        let u = DyadUniverse::full(&net);
        let cfg = ChainConfig {
            chains: 3,
            ..config(60, 10, 5)
        };
        let a = run_chain(&net, &model, &[-1.0, 0.5], &cfg, &u, &Reference::Bernoulli).unwrap();
        let b = run_chain(&net, &model, &[-1.0, 0.5], &cfg, &u, &Reference::Bernoulli).unwrap();
        assert_eq!(a.stats, b.stats);
        assert_eq!(a.stats.nrows(), 60);
        let c = run_chain(
            &net,
            &model,
            &[-1.0, 0.5],
            &config(60, 10, 6),
            &u,
            &Reference::Bernoulli,
        )
        .unwrap();
        assert_ne!(a.stats, c.stats);
    }

    #[test]
    fn stats_track_the_network() {
        let net = Network::new(7, false, None).unwrap();
        let model = binary(&net, "edges + triangle + degree(2)");
        let u = DyadUniverse::full(&net);
        let mut chain = Chain::new(
            &net,
            &model,
            &[0.0, 0.2, -0.1],
            &u,
            &Reference::Bernoulli,
            1,
            0,
        )
        .unwrap();
        for _ in 0..50 {
            chain.advance(37).unwrap();
            assert_eq!(chain.stats(), model.eval(chain.net()).as_slice());
        }
    }

    #[test]
    fn edges_only_mean_is_logistic() {
        let net = Network::new(10, false, None).unwrap();
        let model = binary(&net, "edges");
        let u = DyadUniverse::full(&net);
        let theta = -0.7f64;
        let out = run_chain(
            &net,
            &model,
            &[theta],
            &config(5000, 20, 3),
            &u,
            &Reference::Bernoulli,
        )
        .unwrap();
        let col: Vec<f64> = out.stats.column(0).iter().copied().collect();
        let (m, se) = mean_se(&col);
        let want = 45.0 / (1.0 + (-theta).exp());
        assert!((m - want).abs() < 3.0 * se, "{m} vs {want} (se {se})");
        let half = run_chain(
            &net,
            &model,
            &[0.0],
            &config(5000, 20, 4),
            &u,
            &Reference::Bernoulli,
        )
        .unwrap();
        let col: Vec<f64> = half.stats.column(0).iter().copied().collect();
        let (m, se) = mean_se(&col);
        assert!((m - 22.5).abs() < 3.0 * se);
    }

    #[test]
    fn constraints_are_preserved() {
        let mut net = Network::new(9, true, None).unwrap();
        for (t, h) in [(0, 1), (1, 2), (3, 4), (5, 6), (7, 8), (8, 0)] {
            net.set_value(t, h, 1.0);
        }
        let model = binary(&net, "edges + mutual");
        let u = build_universe(&net, &Constraint::parse_formula("~edges", &net).unwrap()).unwrap();
        let mut chain =
            Chain::new(&net, &model, &[0.5, 1.0], &u, &Reference::Bernoulli, 8, 0).unwrap();
        let mut moved = false;
        for _ in 0..300 {
            chain.advance(7).unwrap();
            assert_eq!(chain.net().edge_count(), 6);
            moved |= chain.net().value(0, 1) == 0.0;
        }
        assert!(moved);

        let u = build_universe(
            &net,
            &Constraint::parse_formula("~bd(maxout = 2)", &net).unwrap(),
        )
        .unwrap();
        let mut chain =
            Chain::new(&net, &model, &[2.0, 0.0], &u, &Reference::Bernoulli, 9, 0).unwrap();
        for _ in 0..300 {
            chain.advance(11).unwrap();
            assert!((0..9).all(|v| chain.net().out_degree(v) <= 2));
        }
    }

    /// Exact probabilities of every n=3 undirected graph under edges+triangle.
    #[test]
    fn three_node_frequencies_match_enumeration() {
        let net = Network::new(3, false, None).unwrap();
        let model = binary(&net, "edges + triangle");
        let u = DyadUniverse::full(&net);
        for (seed, theta) in [(1u64, [0.5, -0.2]), (2, [-0.4, 1.1])] {
            let mut chain =
                Chain::new(&net, &model, &theta, &u, &Reference::Bernoulli, seed, 0).unwrap();
            let mut counts = [0usize; 8];
            chain.advance(1000).unwrap();
            let draws = 100_000;
            for _ in 0..draws {
                chain.advance(3).unwrap();
                let n = chain.net();
                let code = n.value(0, 1) as usize
                    + 2 * n.value(0, 2) as usize
                    + 4 * n.value(1, 2) as usize;
                counts[code] += 1;
            }
            let w: Vec<f64> = (0..8)
                .map(|c: usize| {
                    let e = c.count_ones() as f64;
                    let t = if c == 7 { 1.0 } else { 0.0 };
                    (theta[0] * e + theta[1] * t).exp()
                })
                .collect();
            let z: f64 = w.iter().sum();
            let chi2: f64 = (0..8)
                .map(|c| {
                    let e = draws as f64 * w[c] / z;
                    (counts[c] as f64 - e).powi(2) / e
                })
                .sum();
            // 7 degrees of freedom, upper 1% point; thinning keeps draws
            // close to independent.
            assert!(chi2 < 18.48, "theta {theta:?}: chi2 {chi2}");
        }
    }

    fn dyad_net() -> Network {
        Network::new(2, true, None).unwrap()
    }

    fn single_dyad_distribution(
        reference: Reference,
        theta: f64,
        seed: u64,
        draws: usize,
    ) -> Vec<usize> {
        let net = dyad_net();
        let model = Model::parse("sum", &net, true, TermOptions::default()).unwrap();
        let mut u = DyadUniverse::full(&net);
        // Only the (0, 1) dyad varies.
        u.restrict(&crate::space::RunSet::from_values([0]));
        let mut chain = Chain::new(&net, &model, &[theta], &u, &reference, seed, 0).unwrap();
        chain.advance(500).unwrap();
        let mut counts = vec![0usize; 64];
        for _ in 0..draws {
            chain.advance(2).unwrap();
            counts[(chain.net().value(0, 1) as usize).min(63)] += 1;
        }
        counts
    }

    #[test]
    fn single_dyad_stationary_distributions() {
        let draws = 100_000;
        let cases: Vec<(Reference, f64)> = vec![
            (Reference::DiscUnif { a: 0, b: 3 }, 0.0),
            (Reference::DiscUnif { a: 0, b: 3 }, 0.4),
            (Reference::Binomial { trials: 4 }, -0.3),
            (Reference::Poisson, 0.7),
            (Reference::Geometric, -0.5),
        ];
        for (k, (r, theta)) in cases.into_iter().enumerate() {
            let counts = single_dyad_distribution(r.clone(), theta, 40 + k as u64, draws);
            let mass: Vec<f64> = (0..64)
                .map(|y| {
                    (r.log_h(y as f64) + theta * y as f64).exp()
                        * f64::from(u8::from(r.in_support(y as f64)))
                })
                .collect();
            let z: f64 = mass.iter().sum();
            let mut chi2 = 0.0;
            let mut cells = 0;
            for y in 0..64 {
                let e = draws as f64 * mass[y] / z;
                if e >= 5.0 {
                    chi2 += (counts[y] as f64 - e).powi(2) / e;
                    cells += 1;
                }
            }
            // Generous upper quantile for at most 15 degrees of freedom.
            assert!(cells >= 3);
            assert!(chi2 < 45.0, "{r:?}: chi2 {chi2} over {cells} cells");
        }
    }

    #[test]
    fn poisson_sum_mean_is_exp_theta() {
        let net = Network::new(6, true, None).unwrap();
        let model = Model::parse("sum", &net, true, TermOptions::default()).unwrap();
        let u = DyadUniverse::full(&net);
        let theta = 0.3f64;
        let out = run_chain(
            &net,
            &model,
            &[theta],
            &config(4000, 30, 12),
            &u,
            &Reference::Poisson,
        )
        .unwrap();
        let col: Vec<f64> = out.stats.column(0).iter().map(|s| s / 30.0).collect();
        let (m, se) = mean_se(&col);
        assert!((m - theta.exp()).abs() < 3.0 * se, "{m} vs {}", theta.exp());
    }

    #[test]
    fn diverging_values_abort() {
        let net = Network::new(3, true, None).unwrap();
        let model = Model::parse(
            "sum + mutuality(form = \"product\")",
            &net,
            true,
            TermOptions::default(),
        )
        .unwrap();
        let u = DyadUniverse::full(&net);
        let cfg = ChainConfig {
            value_ceiling: 200.0,
            ..config(100, 100, 1)
        };
        let err = run_chain(&net, &model, &[0.0, 0.5], &cfg, &u, &Reference::Poisson).unwrap_err();
        assert!(matches!(err, ErgmError::Sampler(m) if m.contains("natural parameter space")));
    }

    #[test]
    fn mismatched_reference_is_rejected() {
        let net = dyad_net();
        let model = binary(&net, "edges");
        let u = DyadUniverse::full(&net);
        assert!(Chain::new(&net, &model, &[0.0], &u, &Reference::Poisson, 0, 0).is_err());
        assert!(Chain::new(&net, &model, &[0.0, 1.0], &u, &Reference::Bernoulli, 0, 0).is_err());
    }
}
