//! Reference measures for dyad values, each with a value-proposal kernel.

use rand::Rng;
use rand_distr::{Distribution, Geometric};
use statrs::function::factorial::{ln_binomial, ln_factorial};

use crate::error::{ErgmError, Result};
use crate::formula::{Env, Formula, TermExpr};

#[derive(Clone, Debug, PartialEq)]
pub enum Reference {
    Bernoulli,
    /// Continuous uniform on `[a, b]`; experimental.
    Unif {
        a: f64,
        b: f64,
    },
    DiscUnif {
        a: i64,
        b: i64,
    },
    Poisson,
    Geometric,
    Binomial {
        trials: u64,
    },
}

/// Probability of the jump-to-zero move in the count kernels.
const ZERO_JUMP: f64 = 0.2;

impl Reference {
    /// Parse `Bernoulli`, `~Poisson`, `DiscUnif(0, 3)`, `Binomial(trials = 5)`...
    pub fn parse(text: &str) -> Result<Reference> {
        let f = Formula::parse(text)?;
        let [term] = f.terms.as_slice() else {
            return Err(ErgmError::Unsupported(format!(
                "reference `{text}` must be a single term"
            )));
        };
        let TermExpr::Term { name, .. } = term else {
            return Err(ErgmError::Unsupported(format!(
                "reference `{text}` is not a distribution"
            )));
        };
        let nums = |formals: &[&str]| -> Result<Vec<Option<f64>>> {
            term.bind(formals)?
                .into_iter()
                .map(|e| e.map(|e| Env::new(None).eval(&e)?.as_scalar()).transpose())
                .collect()
        };
        let bad = |msg: &str| ErgmError::Unsupported(format!("reference {name}: {msg}"));
        Ok(match name.as_str() {
            "Bernoulli" => {
                nums(&[])?;
                Reference::Bernoulli
            }
            "Poisson" => {
                nums(&[])?;
                Reference::Poisson
            }
            "Geometric" => {
                nums(&[])?;
                Reference::Geometric
            }
            "Unif" | "DiscUnif" => {
                let v = nums(&["a", "b"])?;
                let (Some(a), Some(b)) = (v[0], v[1]) else {
                    return Err(bad("needs bounds a and b"));
                };
                if a > b {
                    return Err(bad("needs a <= b"));
                }
                if name == "Unif" {
                    Reference::Unif { a, b }
                } else {
                    if a.fract() != 0.0 || b.fract() != 0.0 {
                        return Err(bad("bounds must be integers"));
                    }
                    Reference::DiscUnif {
                        a: a as i64,
                        b: b as i64,
                    }
                }
            }
            "Binomial" => match nums(&["trials"])?[0] {
                Some(t) if t >= 1.0 && t.fract() == 0.0 => Reference::Binomial { trials: t as u64 },
                _ => return Err(bad("trials must be a positive integer")),
            },
            other => {
                return Err(ErgmError::Unsupported(format!(
                    "unknown reference `{other}`"
                )))
            }
        })
    }

    pub fn is_binary(&self) -> bool {
        matches!(self, Reference::Bernoulli)
    }

    pub fn name(&self) -> String {
        match self {
            Reference::Bernoulli => "Bernoulli".into(),
            Reference::Unif { a, b } => format!("Unif({a},{b})"),
            Reference::DiscUnif { a, b } => format!("DiscUnif({a},{b})"),
            Reference::Poisson => "Poisson".into(),
            Reference::Geometric => "Geometric".into(),
            Reference::Binomial { trials } => format!("Binomial({trials})"),
        }
    }

    pub fn in_support(&self, y: f64) -> bool {
        let int = y.fract() == 0.0;
        match *self {
            Reference::Bernoulli => y == 0.0 || y == 1.0,
            Reference::Unif { a, b } => (a..=b).contains(&y),
            Reference::DiscUnif { a, b } => int && (a as f64..=b as f64).contains(&y),
            Reference::Poisson | Reference::Geometric => int && y >= 0.0,
            Reference::Binomial { trials } => int && (0.0..=trials as f64).contains(&y),
        }
    }

    /// Finite support, if any, in increasing order.
    pub fn support(&self) -> Option<Vec<f64>> {
        match *self {
            Reference::Bernoulli => Some(vec![0.0, 1.0]),
            Reference::DiscUnif { a, b } => Some((a..=b).map(|v| v as f64).collect()),
            Reference::Binomial { trials } => Some((0..=trials).map(|v| v as f64).collect()),
            _ => None,
        }
    }

    /// log h(y) for one dyad.
    pub fn log_h(&self, y: f64) -> f64 {
        match *self {
            Reference::Poisson => -ln_factorial(y as u64),
            Reference::Binomial { trials } => ln_binomial(trials, y as u64),
            _ => 0.0,
        }
    }

    /// log of the per-dyad base mass, sum over the support of h; `None`
    /// when it diverges or the support is continuous.
    pub fn log_base_mass(&self) -> Option<f64> {
        match *self {
            Reference::Bernoulli => Some(std::f64::consts::LN_2),
            Reference::DiscUnif { a, b } => Some(((b - a + 1) as f64).ln()),
            Reference::Binomial { trials } => Some(trials as f64 * std::f64::consts::LN_2),
            Reference::Poisson => Some(1.0),
            Reference::Unif { a, b } => Some((b - a).ln()).filter(|x| x.is_finite()),
            Reference::Geometric => None,
        }
    }

    /// Count-kernel probability of moving from `old` to `new != old`.
    fn count_kernel(old: f64, new: f64) -> f64 {
        let step = (new - old).abs();
        let walk = (1.0 - ZERO_JUMP) * 0.5 * 0.5f64.powf(step);
        if new == 0.0 {
            ZERO_JUMP + walk
        } else {
            walk
        }
    }

    /// Propose a new value for a dyad currently at `old`. Returns the value
    /// and log q(new -> old) - log q(old -> new), or `None` for a move that
    /// leaves the support or the state unchanged.
    pub fn propose<R: Rng + ?Sized>(&self, old: f64, rng: &mut R) -> Option<(f64, f64)> {
        match *self {
            Reference::Bernoulli => Some((1.0 - old, 0.0)),
            Reference::Unif { a, b } => Some((rng.random_range(a..=b), 0.0)),
            Reference::DiscUnif { .. } | Reference::Binomial { .. } => {
                let s = self.support().expect("finite support");
                if s.len() < 2 {
                    return None;
                }
                let mut k = rng.random_range(0..s.len() - 1);
                if s[k] >= old {
                    k += 1;
                }
                Some((s[k], 0.0))
            }
            Reference::Poisson | Reference::Geometric => {
                let new = if rng.random::<f64>() < ZERO_JUMP {
                    0.0
                } else {
                    let g = Geometric::new(0.5).expect("valid probability").sample(rng) as f64;
                    let step = 1.0 + g;
                    if rng.random::<bool>() {
                        old + step
                    } else {
                        old - step
                    }
                };
                if new < 0.0 || new == old {
                    return None;
                }
                Some((
                    new,
                    (Self::count_kernel(new, old) / Self::count_kernel(old, new)).ln(),
                ))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parse_forms() {
        assert_eq!(
            Reference::parse("~Bernoulli").unwrap(),
            Reference::Bernoulli
        );
        assert_eq!(
            Reference::parse("~DiscUnif(0,3)").unwrap(),
            Reference::DiscUnif { a: 0, b: 3 }
        );
        assert_eq!(
            Reference::parse("Binomial(trials = 4)").unwrap(),
            Reference::Binomial { trials: 4 }
        );
        assert!(Reference::parse("DiscUnif(3, 0)").is_err());
        assert!(Reference::parse("Binomial(0)").is_err());
        assert!(Reference::parse("Cauchy").is_err());
    }

    #[test]
    fn h_ratios() {
        let p = Reference::Poisson;
        assert!((p.log_h(3.0) - p.log_h(4.0) - 4f64.ln()).abs() < 1e-12);
        let b = Reference::Binomial { trials: 4 };
        assert!((b.log_h(2.0) - 6f64.ln()).abs() < 1e-12);
        assert_eq!(Reference::DiscUnif { a: 0, b: 3 }.log_h(2.0), 0.0);
    }

    #[test]
    fn finite_kernels_skip_the_current_value() {
        let r = Reference::DiscUnif { a: 0, b: 3 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = [0; 4];
        for _ in 0..3000 {
            let (v, lq) = r.propose(2.0, &mut rng).unwrap();
            assert_eq!(lq, 0.0);
            seen[v as usize] += 1;
        }
        assert_eq!(seen[2], 0);
        assert!(seen.iter().enumerate().all(|(i, &c)| i == 2 || c > 900));
    }

    #[test]
    fn count_kernel_ratio_is_consistent() {
        // Proposal frequencies from 3 match the kernel used in the ratio.
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let draws = 200_000;
        let mut counts = std::collections::HashMap::new();
        for _ in 0..draws {
            if let Some((v, _)) = Reference::Poisson.propose(3.0, &mut rng) {
                *counts.entry(v as i64).or_insert(0usize) += 1;
            }
        }
        for v in [0i64, 1, 2, 4, 5, 7] {
            let p = Reference::count_kernel(3.0, v as f64);
            let got = counts.get(&v).copied().unwrap_or(0) as f64 / draws as f64;
            let se = (p * (1.0 - p) / draws as f64).sqrt();
            assert!((got - p).abs() < 5.0 * se, "{v}: {got} vs {p}");
        }
    }
}
