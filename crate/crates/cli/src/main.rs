use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use ergm_core::fit::{
    allstats, exact_mle, fit_json, fit_table, fit_target_stats, mcmle, mple, predict_conditional,
    predict_unconditional, FitResult, McmleConfig, Problem,
};
use ergm_core::formula::fmt_num;
use ergm_core::mcmc::{run_chain, ChainConfig, Reference};
use ergm_core::net::{read_network, write_network, Network};
use ergm_core::terms::{summary_stats, InteractPolicy, Model, TermOptions};
use ergm_core::ErgmError;

#[derive(Parser)]
#[command(
    name = "ergm",
    version,
    about = "Exponential-family random graph models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate model statistics on a network.
    Summary(Common),
    /// Estimate model coefficients.
    Fit {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        /// Fit against these statistics instead of the network's own.
        #[arg(long, value_name = "CSV")]
        target_stats: Option<String>,
        #[arg(long)]
        force: bool,
    },
    /// Draw networks from the model at given coefficients.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
        #[arg(long, value_name = "CSV", allow_hyphen_values = true)]
        coef: String,
        /// Write the final network of each chain here as JSON.
        #[arg(long, value_name = "DIR")]
        save_networks: Option<PathBuf>,
    },
    /// Tabulate the statistics of every network in the sample space.
    Enumerate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        force: bool,
    },
    /// Tie probabilities at given or fitted coefficients.
    Predict {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
        /// Coefficients; fitted from the network when omitted.
        #[arg(long, value_name = "CSV", allow_hyphen_values = true)]
        coef: Option<String>,
        /// Simulated tie frequencies instead of conditional probabilities.
        #[arg(long)]
        unconditional: bool,
        #[arg(long, default_value_t = 1000)]
        nsim: usize,
    },
}

#[derive(Args)]
struct Common {
    /// Network in the JSON network format.
    #[arg(long, value_name = "PATH")]
    network: Option<PathBuf>,
    /// Empty template network with this many nodes (instead of --network).
    #[arg(long, value_name = "N", conflicts_with = "network")]
    nodes: Option<usize>,
    #[arg(long, requires = "nodes")]
    directed: bool,
    /// Model formula, or @FILE to read it from a file.
    #[arg(long, value_name = "STR|@FILE")]
    model: String,
    /// Fit a valued model to the edge values; NAME labels them.
    #[arg(long, value_name = "NAME")]
    response: Option<String>,
    /// Reference measure; defaults to Bernoulli, or DiscUnif over the
    /// observed value range for valued models.
    #[arg(long, value_name = "STR")]
    reference: Option<String>,
    #[arg(long, value_name = "STR")]
    constraints: Option<String>,
    #[arg(long, value_name = "STR")]
    obs_constraints: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Output::Table)]
    output: Output,
    /// Handling of interactions with dyad-dependent operands.
    #[arg(long, default_value = "error", value_name = "POLICY")]
    interact_dependent: String,
    #[arg(long, default_value_t = 30)]
    gw_cutoff: usize,
}

#[derive(Args)]
struct Sampling {
    #[arg(long, default_value_t = 1 << 14)]
    burnin: usize,
    #[arg(long, default_value_t = 1 << 7)]
    interval: usize,
    #[arg(long, default_value_t = 1 << 10)]
    samplesize: usize,
    #[arg(long, default_value_t = 1)]
    chains: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Json,
    Table,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Auto,
    Mple,
    Mcmle,
    Exact,
}

struct Loaded {
    net: Network,
    model: Model,
    reference: Reference,
}

impl Common {
    fn model_text(&self) -> anyhow::Result<String> {
        match self.model.strip_prefix('@') {
            Some(path) => std::fs::read_to_string(path)
                .map(|s| s.trim().to_string())
                .with_context(|| format!("reading model file {path}")),
            None => Ok(self.model.clone()),
        }
    }

    fn options(&self) -> anyhow::Result<TermOptions> {
        Ok(TermOptions {
            interact_dependent: self.interact_dependent.parse::<InteractPolicy>()?,
            gw_cutoff: self.gw_cutoff,
        })
    }

    fn network(&self) -> anyhow::Result<Network> {
        match (&self.network, self.nodes) {
            (Some(p), _) => {
                Ok(read_network(p).with_context(|| format!("loading {}", p.display()))?)
            }
            (None, Some(n)) => Ok(Network::new(n, self.directed, None)?),
            (None, None) => bail!(ErgmError::Network(
                "one of --network or --nodes is required".into()
            )),
        }
    }

    fn valued(&self) -> bool {
        self.response.is_some()
    }

    fn load(&self) -> anyhow::Result<Loaded> {
        let net = self.network()?;
        let model = Model::parse(&self.model_text()?, &net, self.valued(), self.options()?)?;
        for w in &model.warnings {
            eprintln!("warning: {w}");
        }
        let reference = match &self.reference {
            Some(r) => Reference::parse(r)?,
            None if self.valued() => default_valued_reference(&net),
            None => Reference::Bernoulli,
        };
        Ok(Loaded {
            net,
            model,
            reference,
        })
    }
}

fn default_valued_reference(net: &Network) -> Reference {
    let top = net.edges().iter().map(|(_, v)| *v).fold(1.0, f64::max);
    Reference::DiscUnif {
        a: 0,
        b: top.ceil() as i64,
    }
}

impl Sampling {
    fn config(&self, seed: u64) -> ChainConfig {
        ChainConfig {
            burnin: self.burnin,
            interval: self.interval,
            samplesize: self.samplesize,
            seed,
            chains: self.chains,
            ..ChainConfig::default()
        }
    }
}

fn parse_csv(text: &str, what: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| {
                anyhow!(ErgmError::Network(format!(
                    "{what}: `{}` is not a number",
                    s.trim()
                )))
            })
        })
        .collect()
}

fn check_len(v: &[f64], p: usize, what: &str) -> anyhow::Result<()> {
    if v.len() != p {
        bail!(ErgmError::Network(format!(
            "{what} has {} values; the model has {p}",
            v.len()
        )));
    }
    Ok(())
}

fn cmd_summary(c: &Common) -> anyhow::Result<String> {
    let net = c.network()?;
    let (names, stats, warnings) = summary_stats(&net, &c.model_text()?, c.valued(), c.options()?)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok(match c.output {
        Output::Json => {
            let mut m = Map::new();
            for (n, s) in names.iter().zip(&stats) {
                m.insert(n.clone(), json!(s));
            }
            format!("{}\n", Value::Object(m))
        }
        Output::Csv => {
            let mut out = String::from("statistic,value\n");
            for (n, s) in names.iter().zip(&stats) {
                writeln!(out, "{},{}", csv_field(n), fmt_num(*s)).unwrap();
            }
            out
        }
        Output::Table => {
            let cells: Vec<String> = stats.iter().map(|s| fmt_num(*s)).collect();
            let widths: Vec<usize> = names
                .iter()
                .zip(&cells)
                .map(|(n, v)| n.len().max(v.len()))
                .collect();
            let mut head = String::new();
            let mut row = String::new();
            for ((n, v), w) in names.iter().zip(&cells).zip(&widths) {
                write!(head, "{n:>w$} ").unwrap();
                write!(row, "{v:>w$} ").unwrap();
            }
            format!("{}\n{}\n", head.trim_end(), row.trim_end())
        }
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn run_fit(
    c: &Common,
    l: &Loaded,
    sampling: &Sampling,
    method: MethodArg,
    target: Option<&str>,
    force: bool,
) -> anyhow::Result<FitResult> {
    let cfg = McmleConfig {
        chain: sampling.config(c.seed),
        ..McmleConfig::default()
    };
    if let Some(t) = target {
        let target = parse_csv(t, "--target-stats")?;
        check_len(&target, l.model.dim(), "--target-stats")?;
        return Ok(fit_target_stats(
            &l.net,
            &l.model,
            l.reference.clone(),
            c.constraints.as_deref(),
            &target,
            &cfg,
        )?);
    }
    let problem = Problem::new(
        &l.net,
        &l.model,
        l.reference.clone(),
        c.constraints.as_deref(),
        c.obs_constraints.as_deref(),
    )?;
    let method = match method {
        MethodArg::Auto => {
            let closed =
                l.model.dyad_independent() && !l.model.valued && problem.unobserved.is_none();
            if closed {
                MethodArg::Mple
            } else {
                MethodArg::Mcmle
            }
        }
        m => m,
    };
    Ok(match method {
        MethodArg::Mple => mple(&problem)?,
        MethodArg::Exact => exact_mle(&problem, force)?,
        _ => mcmle(&problem, &cfg, None)?,
    })
}

fn fit_output(fit: &FitResult, output: Output) -> String {
    match output {
        Output::Json => format!(
            "{}\n",
            serde_json::to_string_pretty(&fit_json(fit)).unwrap()
        ),
        Output::Table => fit_table(fit),
        Output::Csv => {
            let mut out = String::from("term,estimate,std_error,mcmc_se\n");
            for k in 0..fit.coef.len() {
                writeln!(
                    out,
                    "{},{},{},{}",
                    csv_field(&fit.names[k]),
                    fit.coef[k],
                    fit.se[k],
                    fit.mcmc_se[k]
                )
                .unwrap();
            }
            out
        }
    }
}

fn cmd_simulate(
    c: &Common,
    sampling: &Sampling,
    coef: &str,
    save: Option<&Path>,
) -> anyhow::Result<String> {
    let l = c.load()?;
    let theta = parse_csv(coef, "--coef")?;
    check_len(&theta, l.model.n_params(), "--coef")?;
    let problem = Problem::new(
        &l.net,
        &l.model,
        l.reference.clone(),
        c.constraints.as_deref(),
        None,
    )?;
    let out = run_chain(
        &l.net,
        &l.model,
        &theta,
        &sampling.config(c.seed),
        &problem.universe,
        &l.reference,
    )?;
    if let Some(dir) = save {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (i, net) in out.final_nets.iter().enumerate() {
            write_network(net, dir.join(format!("chain{}.json", i + 1)))?;
        }
    }
    let names = l.model.names();
    Ok(match c.output {
        Output::Json => {
            let rows: Vec<Value> = out
                .stats
                .row_iter()
                .map(|r| json!(r.iter().collect::<Vec<_>>()))
                .collect();
            format!(
                "{}\n",
                json!({"names": names, "stats": rows, "acceptance_rate": out.acceptance_rate})
            )
        }
        _ => {
            let mut s = names
                .iter()
                .map(|n| csv_field(n))
                .collect::<Vec<_>>()
                .join(",");
            s.push('\n');
            for r in out.stats.row_iter() {
                let cells: Vec<String> = r.iter().map(|x| fmt_num(*x)).collect();
                s += &cells.join(",");
                s.push('\n');
            }
            s
        }
    })
}

fn cmd_enumerate(c: &Common, force: bool) -> anyhow::Result<String> {
    let l = c.load()?;
    let problem = Problem::new(
        &l.net,
        &l.model,
        l.reference.clone(),
        c.constraints.as_deref(),
        None,
    )?;
    let table = allstats(&l.net, &l.model, &problem.universe, &l.reference, force)?;
    Ok(match c.output {
        Output::Json => {
            let rows: Vec<Value> = table
                .rows
                .iter()
                .map(|(g, w)| json!({"stats": g, "weight": w}))
                .collect();
            format!(
                "{}\n",
                json!({"names": table.names, "rows": rows, "networks": table.total_networks.to_string()})
            )
        }
        _ => {
            let mut s = table
                .names
                .iter()
                .map(|n| csv_field(n))
                .collect::<Vec<_>>()
                .join(",");
            s += ",weight\n";
            for (g, w) in &table.rows {
                let cells: Vec<String> = g.iter().map(|x| fmt_num(*x)).collect();
                writeln!(s, "{},{}", cells.join(","), fmt_num(*w)).unwrap();
            }
            s
        }
    })
}

fn cmd_predict(
    c: &Common,
    sampling: &Sampling,
    coef: Option<&str>,
    unconditional: bool,
    nsim: usize,
) -> anyhow::Result<String> {
    let l = c.load()?;
    let theta = match coef {
        Some(t) => parse_csv(t, "--coef")?,
        None => run_fit(c, &l, sampling, MethodArg::Auto, None, false)?.coef,
    };
    check_len(&theta, l.model.n_params(), "--coef")?;
    let problem = Problem::new(
        &l.net,
        &l.model,
        l.reference.clone(),
        c.constraints.as_deref(),
        None,
    )?;
    let m = if unconditional {
        predict_unconditional(&problem, &theta, nsim, &sampling.config(c.seed))?
    } else {
        predict_conditional(&problem, &theta)?
    };
    let cell = |x: f64| {
        if x.is_nan() {
            "NA".to_string()
        } else {
            format!("{x:.7}")
        }
    };
    Ok(match c.output {
        Output::Json => {
            let rows: Vec<Value> = m
                .row_iter()
                .map(|r| {
                    Value::Array(
                        r.iter()
                            .map(|x| if x.is_nan() { Value::Null } else { json!(x) })
                            .collect(),
                    )
                })
                .collect();
            format!("{}\n", Value::Array(rows))
        }
        _ => {
            let mut s = String::new();
            for r in m.row_iter() {
                let cells: Vec<String> = r.iter().map(|x| cell(*x)).collect();
                s += &cells.join(",");
                s.push('\n');
            }
            s
        }
    })
}

fn run(cli: Cli) -> anyhow::Result<String> {
    match &cli.command {
        Command::Summary(c) => cmd_summary(c),
        Command::Fit {
            common,
            sampling,
            method,
            target_stats,
            force,
        } => {
            let l = common.load()?;
            let fit = run_fit(
                common,
                &l,
                sampling,
                *method,
                target_stats.as_deref(),
                *force,
            )?;
            if !fit.converged {
                eprintln!("warning: estimation did not converge");
            }
            Ok(fit_output(&fit, common.output))
        }
        Command::Simulate {
            common,
            sampling,
            coef,
            save_networks,
        } => cmd_simulate(common, sampling, coef, save_networks.as_deref()),
        Command::Enumerate { common, force } => cmd_enumerate(common, *force),
        Command::Predict {
            common,
            sampling,
            coef,
            unconditional,
            nsim,
        } => cmd_predict(common, sampling, coef.as_deref(), *unconditional, *nsim),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<ErgmError>()) {
        Some(ErgmError::Unsupported(_)) => 4,
        Some(ErgmError::Estimation(_) | ErgmError::Sampler(_)) => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
