//! JSON and CSV renderings of library results.

use serde_json::{json, Map, Value};

use gencert::augment::AugCertificate;
use gencert::optimize::GridResult;
use gencert::synth::{CoverageResult, CoverageSummary, Experiment, PartitionKind, SweepRow, TrialRecord};
use gencert::BoundReport;

/// Non-finite numbers have no JSON form; they are written as `null`.
fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

pub fn bound_report(r: &BoundReport, seeds: Value) -> Map<String, Value> {
    let p = &r.params;
    let mut m = Map::new();
    m.insert("n".into(), json!(r.n));
    m.insert("K".into(), json!(p.k()));
    m.insert("T_size".into(), json!(r.t_size));
    m.insert("sum_sq".into(), num(r.terms.sum_sq));
    m.insert("u_hat".into(), num(r.terms.u_hat));
    m.insert("g".into(), num(r.terms.g_val));
    m.insert("unc".into(), num(r.terms.unc));
    m.insert("alpha".into(), num(p.alpha()));
    m.insert("alpha_max".into(), num(r.terms.alpha_max));
    m.insert("gamma".into(), num(p.gamma()));
    m.insert("ln_gamma".into(), num(p.ln_gamma()));
    m.insert("delta".into(), num(p.delta()));
    m.insert("eps_gamma".into(), num(p.eps_gamma()));
    m.insert("c_sup".into(), num(p.c_sup()));
    m.insert("train_loss".into(), num(r.train_loss));
    m.insert("bound".into(), num(r.bound));
    m.insert("confidence".into(), num(r.confidence));
    m.insert("vacuous".into(), json!(r.vacuous));
    m.insert("corrected".into(), json!(r.corrected));
    m.insert("main_part".into(), r.main_part.map_or(Value::Null, num));
    if let Some(gp) = &r.general {
        m.insert("cell_masses".into(), Value::Array(gp.p.iter().map(|&x| num(x)).collect()));
        m.insert("delta1".into(), num(gp.delta1));
        m.insert("delta2".into(), num(gp.delta2));
    }
    m.insert("seeds".into(), seeds);
    m
}

pub fn aug_report(c: &AugCertificate, sigma: Option<f64>) -> Map<String, Value> {
    let mut m = bound_report(&c.report, json!({}));
    m.insert("eps_bar".into(), num(c.pairs.eps_bar));
    m.insert("aug_loss".into(), num(c.aug_loss));
    m.insert("correction".into(), num(c.correction));
    m.insert("m".into(), json!(c.pairs.m));
    m.insert("dropped_aug".into(), json!(c.dropped_aug));
    m.insert(
        "cells_missing_aug".into(),
        json!(c.pairs.cells.iter().filter(|s| s.missing_aug).count()),
    );
    if let Some(s) = sigma {
        m.insert("sigma".into(), num(s));
    }
    m
}

pub fn grid_report(g: &GridResult, master: u64, bonferroni: bool) -> Map<String, Value> {
    let seeds = json!({
        "master": master,
        "clustering": g.cluster_seeds.iter().map(|&(k, s)| json!({"K": k, "seed": s})).collect::<Vec<_>>(),
    });
    let mut m = bound_report(&g.best, seeds);
    m.insert("bonferroni".into(), json!(bonferroni));
    m.insert("delta_used".into(), num(g.delta_used));
    m.insert("grid_rows".into(), json!(g.rows.len()));
    m.insert("grid_valid".into(), json!(g.rows.iter().filter(|r| r.valid).count()));
    m
}

fn summary(s: &CoverageSummary) -> Value {
    json!({
        "coverage_fraction": num(s.coverage_fraction),
        "mean_bound": num(s.mean_bound),
        "mean_gap": num(s.mean_gap),
    })
}

pub fn coverage_report(e: &Experiment, r: &CoverageResult) -> Map<String, Value> {
    let c = &e.coverage;
    let mut m = Map::new();
    m.insert("n".into(), json!(c.n));
    m.insert("trials".into(), json!(c.trials));
    m.insert("K".into(), json!(c.k));
    m.insert("alpha".into(), num(c.alpha));
    m.insert("delta".into(), num(c.delta));
    m.insert("eps_gamma".into(), num(c.eps_gamma));
    m.insert("c_sup".into(), num(c.c_sup));
    m.insert(
        "partition".into(),
        json!(match c.partition {
            PartitionKind::KMeans => "kmeans",
            PartitionKind::Intervals => "intervals",
        }),
    );
    m.insert("train_threshold".into(), json!(c.train_threshold));
    m.insert("truth".into(), r.truth.map_or(Value::Null, |t| num(t.value)));
    m.insert(
        "truth_stderr".into(),
        r.truth.and_then(|t| t.stderr).map_or(Value::Null, num),
    );
    m.insert("guarantee".into(), num(r.guarantee));
    m.insert("tractable".into(), summary(&r.summary));
    m.insert("general".into(), r.general.as_ref().map_or(Value::Null, summary));
    m.insert("seeds".into(), json!({"master": c.seed}));
    m
}

pub fn to_json(m: Map<String, Value>) -> String {
    let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("serializable");
    s.push('\n');
    s
}

fn f(x: f64) -> String {
    format!("{x:?}")
}

pub fn trials_csv(rows: &[TrialRecord]) -> String {
    let mut s = String::from("trial,truth,train_loss,bound,covered,sum_sq,general_bound\n");
    for r in rows {
        s += &format!(
            "{},{},{},{},{},{},{}\n",
            r.trial,
            f(r.truth),
            f(r.train_loss),
            f(r.bound),
            r.covered,
            f(r.sum_sq),
            r.general_bound.map_or_else(String::new, f)
        );
    }
    s
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("sigma,seed,eps_bar,aug_loss,correction,main_part,bound\n");
    for r in rows {
        s += &format!(
            "{},{},{},{},{},{},{}\n",
            f(r.sigma),
            r.seed,
            f(r.eps_bar),
            f(r.aug_loss),
            f(r.correction),
            f(r.main_part),
            f(r.bound)
        );
    }
    s
}
