use serde_json::{json, Map, Value};
use statrs::distribution::{ContinuousCDF, Normal};

use super::FitResult;

fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        Value::Null
    } else if x > 0.0 {
        json!("Inf")
    } else {
        json!("-Inf")
    }
}

fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

fn named(names: &[String], v: &[f64]) -> Value {
    let mut m = Map::new();
    for (n, x) in names.iter().zip(v) {
        m.insert(n.clone(), num(*x));
    }
    Value::Object(m)
}

/// Fit summary keyed by coefficient name, in model order. Non-finite values
/// are written as "Inf"/"-Inf" or null.
pub fn fit_json(fit: &FitResult) -> Value {
    let p = fit.coef.len();
    let vcov: Vec<Vec<Value>> = (0..p)
        .map(|i| (0..p).map(|j| num(fit.vcov[(i, j)])).collect())
        .collect();
    json!({
        "method": fit.method.label(),
        "coef": named(&fit.names, &fit.coef),
        "se": named(&fit.names, &fit.se),
        "mcmc_se": named(&fit.names, &fit.mcmc_se),
        "vcov": vcov,
        "loglik": opt(fit.loglik),
        "null_deviance": opt(fit.null_deviance),
        "residual_deviance": opt(fit.residual_deviance),
        "df": fit.df,
        "residual_df": fit.residual_df,
        "aic": opt(fit.aic),
        "bic": opt(fit.bic),
        "iterations": fit.iterations,
        "converged": fit.converged,
        "diagnostics": fit.diagnostics,
    })
}

fn fmt(x: f64) -> String {
    if x.is_nan() {
        "NA".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "Inf".into()
        } else {
            "-Inf".into()
        }
    } else {
        format!("{x:.5}")
    }
}

fn fmt_p(p: f64) -> String {
    if p.is_nan() {
        "NA".into()
    } else if p < 1e-4 {
        "<1e-04".into()
    } else {
        format!("{p:.5}")
    }
}

/// Coefficient table with z tests, followed by the deviance lines.
pub fn fit_table(fit: &FitResult) -> String {
    let normal = Normal::standard();
    let width = fit.names.iter().map(|n| n.len()).max().unwrap_or(0).max(4);
    let mut out = format!("{} estimates\n\n", fit.method.label());
    out += &format!(
        "{:<width$} {:>12} {:>12} {:>7} {:>10} {:>10}\n",
        "", "Estimate", "Std. Error", "MCMC %", "z value", "Pr(>|z|)"
    );
    for k in 0..fit.coef.len() {
        let (c, se) = (fit.coef[k], fit.se[k]);
        let z = if se > 0.0 { c / se } else { f64::NAN };
        let p = if z.is_finite() {
            2.0 * normal.sf(z.abs())
        } else {
            f64::NAN
        };
        let mc = if se > 0.0 {
            format!("{:.0}", 100.0 * (fit.mcmc_se[k] / se).powi(2))
        } else {
            "0".into()
        };
        out += &format!(
            "{:<width$} {:>12} {:>12} {:>7} {:>10} {:>10}\n",
            fit.names[k],
            fmt(c),
            fmt(se),
            mc,
            fmt(z),
            fmt_p(p)
        );
    }
    out.push('\n');
    let line = |label: &str, v: Option<f64>, df: usize| match v {
        Some(v) => format!("{label:>18}: {} on {df} degrees of freedom\n", fmt(v)),
        None => format!("{label:>18}: NA\n"),
    };
    out += &line("Null Deviance", fit.null_deviance, fit.df);
    out += &line("Residual Deviance", fit.residual_deviance, fit.residual_df);
    out += &format!(
        "\nAIC: {}  BIC: {}\n",
        fit.aic.map_or("NA".into(), fmt),
        fit.bic.map_or("NA".into(), fmt)
    );
    if !fit.converged {
        out += "\nwarning: estimation did not converge\n";
    }
    for d in &fit.diagnostics {
        out += &format!("note: {d}\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::{mple, Problem};
    use crate::mcmc::Reference;
    use crate::terms::testutil::random_net;
    use crate::terms::{Model, TermOptions};

    #[test]
    fn json_and_table() {
        let net = random_net(2, 10, true, 0.3);
        let model = Model::parse("edges + mutual", &net, false, TermOptions::default()).unwrap();
        let p = Problem::new(&net, &model, Reference::Bernoulli, None, None).unwrap();
        let f = mple(&p).unwrap();
        let j = fit_json(&f);
        let keys: Vec<&String> = j["coef"].as_object().unwrap().keys().collect();
        assert_eq!(keys, ["edges", "mutual"]);
        assert_eq!(j["method"], "MPLE");
        assert_eq!(j["df"], 90);
        let t = fit_table(&f);
        assert!(t.contains("edges") && t.contains("Pr(>|z|)") && t.contains("on 90 degrees"));
    }
}
