//! Constrained sample spaces: the set of free dyads, stored run-length
//! encoded over a dense dyad numbering, plus checks that depend on the whole
//! network (degree bounds) and the fixed-edge-count flag the sampler honours
//! with a swap proposal.

mod rle;

use rand::Rng;

pub use rle::RunSet;

use crate::error::{ErgmError, Result};
use crate::formula::{AttrSpec, Expr, Formula, Level, LevelSpec, Levels2Spec, TermExpr, Value};
use crate::net::{Dyad, NetView, Network};
use crate::terms::{block_mixing, Args, Ctx, TermOptions};

/// Dense numbering of the dyads of a network, in the order of
/// [`Network::dyads`]: row-major over (tail, head) skipping the diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DyadIndex {
    n: usize,
    directed: bool,
    bipartite: Option<usize>,
}

impl DyadIndex {
    pub fn new(n: usize, directed: bool, bipartite: Option<usize>) -> Self {
        DyadIndex {
            n,
            directed,
            bipartite,
        }
    }

    pub fn of(net: &dyn NetView) -> Self {
        DyadIndex::new(net.n(), net.directed(), net.bipartite())
    }

    pub fn len(&self) -> usize {
        crate::net::dyad_count(self.n, self.directed, self.bipartite)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Pairs with tail below `t` on an undirected unipartite network.
    fn row_start(&self, t: usize) -> usize {
        t * (2 * self.n - t - 1) / 2
    }

    /// Position of a canonical dyad.
    pub fn index(&self, d: Dyad) -> usize {
        let (t, h) = (d.tail, d.head);
        match (self.directed, self.bipartite) {
            (_, Some(b)) => t * (self.n - b) + (h - b),
            (true, None) => t * (self.n - 1) + h - usize::from(h > t),
            (false, None) => self.row_start(t) + (h - t - 1),
        }
    }

    pub fn dyad(&self, k: usize) -> Dyad {
        match (self.directed, self.bipartite) {
            (_, Some(b)) => Dyad::new(k / (self.n - b), b + k % (self.n - b)),
            (true, None) => {
                let (t, r) = (k / (self.n - 1), k % (self.n - 1));
                Dyad::new(t, r + usize::from(r >= t))
            }
            (false, None) => {
                let (mut lo, mut hi) = (0, self.n - 1);
                while hi - lo > 1 {
                    let mid = (lo + hi) / 2;
                    if self.row_start(mid) <= k {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let t = lo;
                Dyad::new(t, t + 1 + (k - self.row_start(t)))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Both,
    Out,
    In,
}

/// One term of a constraint formula.
#[derive(Clone, Debug, PartialEq)]
pub enum Constraint {
    EdgesFixed,
    FixedAs {
        present: Vec<Dyad>,
        absent: Vec<Dyad>,
    },
    Dyads {
        fix: Option<Expr>,
        vary: Option<Expr>,
    },
    Blocks {
        attr: AttrSpec,
        levels: LevelSpec,
        levels2: Levels2Spec,
        term: TermExpr,
    },
    DegreeBound {
        maxout: Option<usize>,
        maxin: Option<usize>,
    },
    Observed,
    Egocentric {
        attr: Option<AttrSpec>,
        direction: Direction,
    },
}

fn cerr(msg: impl Into<String>) -> ErgmError {
    ErgmError::Constraint(msg.into())
}

/// 1-based vertex pairs from a two-column matrix or a single length-2 vector.
fn pairs(v: &Value, net: &Network) -> Result<Vec<Dyad>> {
    let (nums, nrow) = match v {
        Value::Null => return Ok(Vec::new()),
        Value::Matrix(m) if m.ncol == 2 => (v.as_nums()?, m.nrow),
        Value::Atom(_) => {
            let x = v.as_nums()?;
            if x.len() != 2 {
                return Err(cerr("an edge is a pair of vertex numbers"));
            }
            (x, 1)
        }
        _ => return Err(cerr("edge lists must be two-column matrices")),
    };
    let vertex = |x: f64| -> Result<usize> {
        if x.fract() != 0.0 || x < 1.0 {
            return Err(cerr(format!("invalid vertex number {x}")));
        }
        Ok(x as usize - 1)
    };
    (0..nrow)
        .map(|r| net.canonical(vertex(nums[r])?, vertex(nums[nrow + r])?))
        .collect()
}

fn count(v: Option<f64>, what: &str) -> Result<Option<usize>> {
    match v {
        None => Ok(None),
        Some(x) if x >= 0.0 && x.fract() == 0.0 => Ok(Some(x as usize)),
        Some(x) => Err(cerr(format!(
            "{what} must be a non-negative integer, got {x}"
        ))),
    }
}

impl Constraint {
    /// Parse a one-sided constraint formula such as `~bd(maxout = 2) + edges`.
    /// Term names are matched case-insensitively.
    pub fn parse_formula(text: &str, net: &Network) -> Result<Vec<Constraint>> {
        let f = Formula::parse(text)?;
        f.terms
            .iter()
            .map(|t| Constraint::from_term(t, net))
            .collect()
    }

    fn from_term(term: &TermExpr, net: &Network) -> Result<Constraint> {
        let TermExpr::Term { name, .. } = term else {
            return Err(cerr(format!("`{term}` is not a constraint")));
        };
        Ok(match name.to_ascii_lowercase().as_str() {
            "edges" => {
                Args::bind(term, &[])?;
                Constraint::EdgesFixed
            }
            "fixedas" => {
                let a = Args::bind(term, &["present", "absent"])?;
                let get = |k: &str| -> Result<Vec<Dyad>> {
                    match a.get(k) {
                        None => Ok(Vec::new()),
                        Some(e) => pairs(&crate::formula::Env::new(Some(net)).eval(e)?, net),
                    }
                };
                let (present, absent) = (get("present")?, get("absent")?);
                if present.iter().any(|d| absent.contains(d)) {
                    return Err(cerr("fixedas: a dyad cannot be both present and absent"));
                }
                Constraint::FixedAs { present, absent }
            }
            "dyads" => {
                let a = Args::bind(term, &["fix", "vary"])?;
                let (fix, vary) = (a.get("fix").cloned(), a.get("vary").cloned());
                if fix.is_none() && vary.is_none() {
                    return Err(cerr("Dyads needs fix=, vary= or both"));
                }
                Constraint::Dyads { fix, vary }
            }
            "blocks" => {
                let a = Args::bind(term, &["attr", "levels", "levels2"])?;
                Constraint::Blocks {
                    attr: a.attr("attr")?,
                    levels: a.levels("levels", LevelSpec::All)?,
                    levels2: a.levels2("levels2", Levels2Spec::Nothing)?,
                    term: term.clone(),
                }
            }
            "bd" => {
                let a = Args::bind(term, &["maxout", "maxin"])?;
                let maxout = count(a.nums("maxout")?.map(|v| v[0]), "maxout")?;
                let maxin = count(a.nums("maxin")?.map(|v| v[0]), "maxin")?;
                if maxin.is_some() && !net.directed() {
                    return Err(cerr("bd: maxin applies to directed networks; use maxout"));
                }
                Constraint::DegreeBound { maxout, maxin }
            }
            "observed" => {
                Args::bind(term, &[])?;
                Constraint::Observed
            }
            "egocentric" => {
                let a = Args::bind(term, &["attr", "direction"])?;
                let attr = a.get("attr").map(AttrSpec::parse).transpose()?;
                let direction = match a.string("direction", "both")?.as_str() {
                    "both" => Direction::Both,
                    "out" => Direction::Out,
                    "in" => Direction::In,
                    other => return Err(cerr(format!("unknown egocentric direction `{other}`"))),
                };
                if direction != Direction::Both && !net.directed() {
                    return Err(cerr("egocentric direction applies to directed networks"));
                }
                Constraint::Egocentric { attr, direction }
            }
            "dyadnoise" => {
                return Err(ErgmError::Unsupported(
                    "dyadnoise (soft observation-noise constraint) is not implemented".into(),
                ))
            }
            _ => return Err(cerr(format!("unknown constraint `{name}`"))),
        })
    }
}

/// Degree caps checked before a tie is added.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DegreeBound {
    pub maxout: Option<usize>,
    pub maxin: Option<usize>,
}

/// Free dyads plus the constraints that cannot be expressed as a dyad set.
#[derive(Clone, Debug, PartialEq)]
pub struct DyadUniverse {
    index: DyadIndex,
    free: RunSet,
    edges_fixed: bool,
    bound: Option<DegreeBound>,
}

impl DyadUniverse {
    pub fn full(net: &dyn NetView) -> Self {
        let index = DyadIndex::of(net);
        DyadUniverse {
            index,
            free: RunSet::full(index.len()),
            edges_fixed: false,
            bound: None,
        }
    }

    pub fn index(&self) -> DyadIndex {
        self.index
    }

    pub fn free(&self) -> &RunSet {
        &self.free
    }

    pub fn n_free(&self) -> usize {
        self.free.len()
    }

    pub fn edges_fixed(&self) -> bool {
        self.edges_fixed
    }

    pub fn degree_bound(&self) -> Option<DegreeBound> {
        self.bound
    }

    pub fn contains(&self, d: Dyad) -> bool {
        self.free.contains(self.index.index(d))
    }

    pub fn free_dyads(&self) -> impl Iterator<Item = Dyad> + '_ {
        self.free.iter().map(|k| self.index.dyad(k))
    }

    /// Uniform draw from the free dyads.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Dyad> {
        if self.free.is_empty() {
            return Err(ErgmError::Sampler(
                "the constrained sample space has no free dyads".into(),
            ));
        }
        let k = rng.random_range(0..self.free.len());
        Ok(self
            .index
            .dyad(self.free.nth(k).expect("rank below the set size")))
    }

    /// Whether setting `d` to `new` keeps every hard constraint satisfied.
    pub fn check_hard(&self, net: &dyn NetView, d: Dyad, new: f64) -> bool {
        let Some(b) = self.bound else {
            return true;
        };
        if new == 0.0 || net.value(d.tail, d.head) != 0.0 {
            return true;
        }
        if net.directed() {
            b.maxout.is_none_or(|m| net.out_degree(d.tail) < m)
                && b.maxin.is_none_or(|m| net.in_degree(d.head) < m)
        } else {
            b.maxout
                .is_none_or(|m| net.out_degree(d.tail) < m && net.out_degree(d.head) < m)
        }
    }

    /// Both sets of restrictions at once.
    pub fn intersect(&self, other: &DyadUniverse) -> DyadUniverse {
        let bound = match (self.bound, other.bound) {
            (Some(a), Some(b)) => Some(DegreeBound {
                maxout: min_opt(a.maxout, b.maxout),
                maxin: min_opt(a.maxin, b.maxin),
            }),
            (a, b) => a.or(b),
        };
        DyadUniverse {
            index: self.index,
            free: self.free.intersect(&other.free),
            edges_fixed: self.edges_fixed || other.edges_fixed,
            bound,
        }
    }

    /// Restrict to the dyads in `keep`.
    pub fn restrict(&mut self, keep: &RunSet) {
        self.free = self.free.intersect(keep);
    }
}

fn min_opt(a: Option<usize>, b: Option<usize>) -> Option<usize> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

/// Dyads where some statistic of a dyad-independent formula has a nonzero
/// contribution at a tie.
fn affected(e: &Expr, net: &Network, what: &str) -> Result<RunSet> {
    let mut ctx = Ctx::new(false, TermOptions::default());
    let terms = crate::operators::inner_terms(e, net, &mut ctx)?;
    if !terms.dyad_independent() {
        return Err(cerr(format!(
            "Dyads({what}=) may contain only dyad-independent terms"
        )));
    }
    let mut buf = vec![0.0; terms.dim()];
    let mut mask = Vec::with_capacity(net.n_dyads());
    for d in net.dyads() {
        if !terms.dyadwise(d.tail, d.head, 1.0, &mut buf) {
            return Err(cerr(format!(
                "Dyads({what}=): a term does not expose per-dyad statistics"
            )));
        }
        mask.push(buf.iter().any(|&x| x != 0.0));
    }
    Ok(RunSet::from_mask(&mask))
}

fn egos(attr: &Option<AttrSpec>, net: &Network) -> Result<Vec<bool>> {
    let Some(attr) = attr else {
        return Ok(vec![true; net.n()]);
    };
    let f = attr.factor(net)?;
    f.values
        .iter()
        .map(|v| match v {
            Level::Bool(b) => Ok(*b),
            Level::Num(x) => Ok(*x != 0.0),
            Level::Str(s) => Err(cerr(format!(
                "egocentric attribute must be logical, found `{s}`"
            ))),
        })
        .collect()
}

/// Free dyads of one constraint, or `None` when it restricts nothing.
fn free_set(c: &Constraint, net: &Network, index: DyadIndex) -> Result<Option<RunSet>> {
    let all = index.len();
    Ok(Some(match c {
        Constraint::EdgesFixed | Constraint::DegreeBound { .. } => return Ok(None),
        Constraint::FixedAs { present, absent } => {
            RunSet::from_values(present.iter().chain(absent).map(|d| index.index(*d)))
                .complement(all)
        }
        Constraint::Dyads { fix, vary } => {
            let fixed = fix
                .as_ref()
                .map(|e| affected(e, net, "fix").map(|s| s.complement(all)))
                .transpose()?;
            let varied = vary
                .as_ref()
                .map(|e| affected(e, net, "vary"))
                .transpose()?;
            match (fixed, varied) {
                (Some(a), Some(b)) => a.union(&b),
                (Some(s), None) | (None, Some(s)) => s,
                (None, None) => return Ok(None),
            }
        }
        Constraint::Blocks {
            attr,
            levels,
            levels2,
            term,
        } => {
            let args = Args::bind(term, &["attr", "levels", "levels2"])?;
            let mix = block_mixing(&args, net, attr, levels.clone(), levels2.clone())?;
            let mask: Vec<bool> = net
                .dyads()
                .map(|d| {
                    let mut hit = false;
                    mix.stat(d.tail, d.head, &mut |_| hit = true);
                    !hit
                })
                .collect();
            RunSet::from_mask(&mask)
        }
        Constraint::Observed => RunSet::from_values(net.missing().iter().map(|d| index.index(*d))),
        Constraint::Egocentric { attr, direction } => {
            let ego = egos(attr, net)?;
            let mask: Vec<bool> = net
                .dyads()
                .map(|d| {
                    let seen = match direction {
                        Direction::Out => ego[d.tail],
                        Direction::In => ego[d.head],
                        Direction::Both => ego[d.tail] || ego[d.head],
                    };
                    !seen
                })
                .collect();
            RunSet::from_mask(&mask)
        }
    }))
}

/// Intersect the free sets of all constraints.
pub fn build_universe(net: &Network, constraints: &[Constraint]) -> Result<DyadUniverse> {
    let mut u = DyadUniverse::full(net);
    for c in constraints {
        match c {
            Constraint::EdgesFixed => u.edges_fixed = true,
            Constraint::DegreeBound { maxout, maxin } => {
                let b = DegreeBound {
                    maxout: *maxout,
                    maxin: *maxin,
                };
                u.bound = Some(match u.bound {
                    Some(a) => DegreeBound {
                        maxout: min_opt(a.maxout, b.maxout),
                        maxin: min_opt(a.maxin, b.maxin),
                    },
                    None => b,
                });
            }
            _ => {}
        }
        if let Some(s) = free_set(c, net, u.index)? {
            u.restrict(&s);
        }
    }
    Ok(u)
}

/// Observation constraints for a network: those given (or stored with the
/// network), with `observed` added when the network records missing dyads.
pub fn observation_constraints(net: &Network, text: Option<&str>) -> Result<Vec<Constraint>> {
    let text = text.or(net.meta.obs_constraints.as_deref());
    let mut cs = match text {
        Some(t) if !t.trim().trim_start_matches('~').trim().is_empty() => {
            Constraint::parse_formula(t, net)?
        }
        _ => Vec::new(),
    };
    if !net.missing().is_empty() && !cs.contains(&Constraint::Observed) {
        cs.push(Constraint::Observed);
    }
    Ok(cs)
}

/// Dyads whose values the observation process did not reveal, within the
/// model's sample space; `None` when the network is fully observed.
pub fn observation_universe(
    net: &Network,
    model: &DyadUniverse,
    obs: &[Constraint],
) -> Result<Option<DyadUniverse>> {
    if obs.is_empty() {
        return Ok(None);
    }
    Ok(Some(model.intersect(&build_universe(net, obs)?)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::AttrColumn;
    use crate::terms::testutil::random_net;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn universe(net: &Network, text: &str) -> DyadUniverse {
        build_universe(net, &Constraint::parse_formula(text, net).unwrap()).unwrap()
    }

    #[test]
    fn index_matches_dyad_order() {
        for (n, directed, bip) in [
            (7, true, None),
            (7, false, None),
            (7, false, Some(3)),
            (2, true, None),
        ] {
            let idx = DyadIndex::new(n, directed, bip);
            let all: Vec<Dyad> = crate::net::DyadIter::new(n, directed, bip).collect();
            assert_eq!(all.len(), idx.len());
            for (k, d) in all.iter().enumerate() {
                assert_eq!(idx.index(*d), k);
                assert_eq!(idx.dyad(k), *d);
            }
        }
    }

    /// Two semesters of 73 students, directed, as in the school class data.
    fn semesters() -> Network {
        let mut net = Network::new(146, true, None).unwrap();
        let s = (0..146).map(|i| if i < 73 { 1.0 } else { 2.0 }).collect();
        net.set_attr("Semester", AttrColumn::Numeric(s)).unwrap();
        net
    }

    #[test]
    fn two_semester_counts() {
        let net = semesters();
        assert_eq!(DyadUniverse::full(&net).n_free(), 21170);
        let fix = universe(&net, "~Dyads(fix = ~nodematch(\"Semester\"))");
        assert_eq!(fix.n_free(), 10658);
        let vary = universe(&net, "~Dyads(vary = ~nodematch(\"Semester\"))");
        assert_eq!(vary.n_free(), 10512);
        let b23 = universe(&net, "~blocks(\"Semester\", levels2 = c(2, 3))");
        assert_eq!(b23.free(), vary.free());
        let b14 = universe(&net, "~blocks(attr = \"Semester\", levels2 = c(1, 4))");
        assert_eq!(b14.free(), fix.free());
        let both = universe(
            &net,
            "~Dyads(fix = ~nodematch(\"Semester\"), vary = ~nodematch(\"Semester\"))",
        );
        assert_eq!(both.n_free(), 21170);
        assert_eq!(universe(&net, "~blocks(\"Semester\")").n_free(), 21170);
    }

    #[test]
    fn dyads_rejects_dependent_terms() {
        let net = semesters();
        let cs = Constraint::parse_formula("~Dyads(fix = ~triangle)", &net).unwrap();
        assert!(build_universe(&net, &cs).is_err());
        assert!(matches!(
            Constraint::parse_formula("~dyadnoise(0.1, 0.1)", &net),
            Err(ErgmError::Unsupported(_))
        ));
        assert!(Constraint::parse_formula("~nosuch", &net).is_err());
    }

    #[test]
    fn degree_bound_vetoes_additions_only() {
        let mut net = Network::new(5, true, None).unwrap();
        net.set_value(0, 1, 1.0);
        net.set_value(0, 2, 1.0);
        let u = universe(&net, "~bd(maxout = 2)");
        assert!(!u.check_hard(&net, Dyad::new(0, 3), 1.0));
        assert!(u.check_hard(&net, Dyad::new(0, 1), 0.0));
        assert!(u.check_hard(&net, Dyad::new(1, 3), 1.0));
        assert!(DyadUniverse::full(&net).check_hard(&net, Dyad::new(0, 3), 1.0));
        let u = universe(&net, "~bd(maxin = 0)");
        assert!(!u.check_hard(&net, Dyad::new(3, 4), 1.0));
    }

    #[test]
    fn observation_universes() {
        let mut net = Network::new(18, true, None).unwrap();
        for h in 1..18 {
            net.set_missing(Dyad::new(0, h), true).unwrap();
        }
        let model = DyadUniverse::full(&net);
        let obs = observation_constraints(&net, None).unwrap();
        assert_eq!(obs, vec![Constraint::Observed]);
        let u = observation_universe(&net, &model, &obs).unwrap().unwrap();
        assert_eq!(u.n_free(), 17);
        assert!(u.free_dyads().all(|d| d.tail == 0));

        let mut net = Network::new(18, true, None).unwrap();
        let refused = (0..18).map(|i| i == 0).collect();
        net.set_attr("refused", AttrColumn::Boolean(refused))
            .unwrap();
        let obs = observation_constraints(&net, Some("~egocentric(~!refused, \"out\")")).unwrap();
        let u = observation_universe(&net, &model, &obs).unwrap().unwrap();
        assert_eq!(u.n_free(), 17);
        assert!(u.free_dyads().all(|d| d.tail == 0));

        let full = Network::new(6, false, None).unwrap();
        let cs = Constraint::parse_formula("~observed", &full).unwrap();
        assert_eq!(build_universe(&full, &cs).unwrap().n_free(), 0);
        assert!(observation_constraints(&full, None).unwrap().is_empty());
    }

    #[test]
    fn fixedas_removes_listed_dyads() {
        let net = Network::new(5, false, None).unwrap();
        let u = universe(
            &net,
            "~fixedas(present = cbind(c(1, 2), c(2, 3)), absent = c(5, 4))",
        );
        assert_eq!(u.n_free(), 7);
        assert!(!u.contains(Dyad::new(0, 1)) && !u.contains(Dyad::new(3, 4)));
        assert!(
            Constraint::parse_formula("~fixedas(present = c(1, 2), absent = c(2, 1))", &net)
                .is_err()
        );
    }

    #[test]
    fn sampling_is_uniform_over_free_dyads() {
        let net = Network::new(3, true, None).unwrap();
        let u = DyadUniverse::full(&net);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0usize; 6];
        let draws = 60000;
        for _ in 0..draws {
            counts[u.index().index(u.sample(&mut rng).unwrap())] += 1;
        }
        let e = draws as f64 / 6.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
        // 5 degrees of freedom, upper 0.1% point.
        assert!(chi2 < 20.52, "chi2 = {chi2}");

        let one = universe(&net, "~fixedas(absent = cbind(c(1,1,2,2,3), c(2,3,1,3,1)))");
        assert_eq!(one.n_free(), 1);
        assert_eq!(one.sample(&mut rng).unwrap(), Dyad::new(2, 1));
        let none = universe(&Network::new(4, false, None).unwrap(), "~observed");
        assert!(none.sample(&mut rng).is_err());

        let net = semesters();
        let fix = universe(&net, "~Dyads(fix = ~nodematch(\"Semester\"))");
        for _ in 0..100_000 {
            let d = fix.sample(&mut rng).unwrap();
            assert_ne!(d.tail < 73, d.head < 73);
        }
    }

    fn attributed(seed: u64, n: usize, directed: bool) -> Network {
        random_net(seed, n, directed, 0.3)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn unconstrained_cardinalities(n in 2usize..30, directed: bool, b in 1usize..29) {
            let net = Network::new(n, directed, None).unwrap();
            let want = if directed { n * (n - 1) } else { n * (n - 1) / 2 };
            prop_assert_eq!(DyadUniverse::full(&net).n_free(), want);
            if b < n {
                let bip = Network::new(n, false, Some(b)).unwrap();
                prop_assert_eq!(DyadUniverse::full(&bip).n_free(), b * (n - b));
            }
        }

        #[test]
        fn fix_and_vary_partition(seed in 0u64..1000, directed: bool) {
            let net = attributed(seed, 9, directed);
            let all = DyadIndex::of(&net).len();
            for f in ["nodematch(\"c\")", "nodecov(\"x\")", "absdiff(\"x\")"] {
                let fix = universe(&net, &format!("~Dyads(fix = ~{f})"));
                let vary = universe(&net, &format!("~Dyads(vary = ~{f})"));
                prop_assert!(fix.free().intersect(vary.free()).is_empty());
                prop_assert_eq!(fix.free().union(vary.free()).len(), all);
            }
        }

        #[test]
        fn blocks_equal_dyads_fix(seed in 0u64..1000, directed: bool, cells in proptest::collection::btree_set(1usize..10, 0..5)) {
            let net = attributed(seed, 10, directed);
            let ncell = if directed { 9 } else { 6 };
            let cells: Vec<usize> = cells.into_iter().filter(|&c| c <= ncell).collect();
            if cells.is_empty() {
                return Ok(());
            }
            let list = cells.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
            let blocks = universe(&net, &format!("~blocks(\"c\", levels2 = c({list}))"));
            let dyads = universe(&net, &format!("~Dyads(fix = ~nodemix(\"c\", levels2 = c({list})))"));
            prop_assert_eq!(blocks.free(), dyads.free());
        }
    }
}
