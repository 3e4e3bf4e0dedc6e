use std::fs;

use anyhow::{bail, Context, Result};
use cainfer::algo::{infer_string_ancestors, CompressorHandle, SlackBudget, StringCorpus};
use cainfer::bitset::BitSet;
use cainfer::dag::{
    ancestor_multiplicities, global_markov_holds, local_markov_holds, reference_elements, validate_dag_model,
    NodeMap, MAX_GLOBAL_MARKOV_NODES,
};
use cainfer::dist::JointDistribution;
use cainfer::inference::{
    check_decomposition, infer_from_distribution, infer_from_values, infer_with_c_vec, synergy_decomposition,
    InferenceOptions, InferenceReport, Mode, ObservationValues,
};
use cainfer::oracle::{verify_batch, VerificationConfig};
use cainfer::Error;
use serde_json::json;

use crate::args::{AnalyzeArgs, CheckDagArgs, Common, InferArgs, Source, StringsArgs, VerifyArgs};
use crate::input::{
    dag_groups, parse_groups, parse_name_list, parse_usize_list, read_dag, read_distribution, read_samples,
    read_values, subset_key,
};
use crate::report::{claim_json, is_positive, markov_json, Report};

/// A finished report and whether it counts as a success under `--strict`.
pub struct Outcome {
    pub report: Report,
    pub ok: bool,
}

fn check_tolerances(common: &Common) -> Result<()> {
    if !(common.tol_bits > 0.0 && common.tol_bits.is_finite()) {
        bail!("--tol-bits: {} is not a positive number", common.tol_bits);
    }
    if !(common.decision_tol_bits >= 0.0 && common.decision_tol_bits.is_finite()) {
        bail!("--decision-tol-bits: {} is not a non-negative number", common.decision_tol_bits);
    }
    Ok(())
}

fn load_source(source: &Source) -> Result<(JointDistribution, Mode)> {
    match (&source.dist, &source.samples) {
        (Some(p), None) => Ok((read_distribution(p)?, Mode::Exact)),
        (None, Some(p)) => Ok((read_samples(p)?, Mode::Empirical)),
        _ => bail!("exactly one of --dist and --samples is required"),
    }
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Exact => "exact",
        Mode::Empirical => "empirical",
        Mode::Values => "values",
        Mode::Strings => "strings",
    }
}

/// Runs `f` for each `c` in `1..=c_max` and merges the reports.
fn each_c(
    n: usize,
    c_max: Option<usize>,
    opts: &InferenceOptions,
    f: impl Fn(&InferenceOptions) -> cainfer::Result<InferenceReport>,
) -> Result<InferenceReport> {
    let top = match c_max {
        None => return Ok(f(opts)?),
        Some(c) if c == 0 || c >= n => bail!("--c: {c} is outside 1..={}", n.saturating_sub(1)),
        Some(c) => c,
    };
    let mut merged: Option<InferenceReport> = None;
    for c in 1..=top {
        let r = f(&InferenceOptions { c: Some(c), ..opts.clone() })?;
        match &mut merged {
            None => merged = Some(r),
            Some(m) => {
                m.quantities.extend(r.quantities);
                m.slacks.extend(r.slacks);
                m.results.extend(r.results);
                m.largest_c = m.largest_c.max(r.largest_c);
            }
        }
    }
    Ok(merged.expect("at least one c"))
}

pub fn analyze(a: &AnalyzeArgs) -> Result<Outcome> {
    check_tolerances(&a.common)?;
    let (dist, mode) = load_source(&a.source)?;
    let y = a.y.as_deref().map(|s| parse_name_list(s, &dist, "--y")).transpose()?;
    let groups = match &a.groups {
        Some(spec) => parse_groups(spec, &dist)?,
        None => dist
            .all()
            .difference(y.unwrap_or(BitSet::EMPTY))
            .iter()
            .map(BitSet::singleton)
            .collect(),
    };
    let opts = InferenceOptions {
        decision_tol: a.common.decision_tol_bits,
        c: None,
        no_direct_influence: a.no_direct_influence,
    };
    let inf = each_c(groups.len(), a.c, &opts, |o| infer_from_distribution(&dist, &groups, mode, o))?;

    let mut report = Report::new(mode_name(mode), a.common.tol_bits);
    report.absorb(&inf);
    let names = |s: BitSet| s.iter().map(|v| dist.variables()[v].name.clone()).collect::<Vec<_>>();
    report.extra("groups", json!(groups.iter().map(|&g| names(g)).collect::<Vec<_>>()));
    if let Some(y) = y {
        for r in &inf.results {
            let c = r.c;
            let s = synergy_decomposition(&dist, &groups, y, c).context("--y")?;
            report.quantity(format!("r_{c}_bits"), s.reference_bits);
            report.quantity(format!("r_{c}_observations_bits"), s.observations_bits);
            report.quantity(format!("r_{c}_conditioned_bits"), s.conditioned_bits);
            report.slack(format!("synergy_{c}_residual_bits"), s.residual_bits);
        }
        report.extra("y", json!(names(y)));
    }
    let ok = inf.largest_c > 0;
    Ok(Outcome { report, ok })
}

pub fn infer(a: &InferArgs) -> Result<Outcome> {
    check_tolerances(&a.common)?;
    let obs = read_values(&a.values)?;
    let opts = InferenceOptions {
        decision_tol: a.common.decision_tol_bits,
        c: None,
        no_direct_influence: a.no_direct_influence,
    };
    let c_vec = a.c_vec.as_deref().map(|s| parse_usize_list(s, "--c-vec")).transpose()?;
    let inf = match &c_vec {
        Some(v) => each_c(obs.n(), a.c, &opts, |o| infer_with_c_vec(&obs, v, o)).context("--c-vec")?,
        None => each_c(obs.n(), a.c, &opts, |o| infer_from_values(&obs, o))?,
    };
    let mut report = Report::new("values", a.common.tol_bits);
    report.absorb(&inf);
    let mut ok = inf.largest_c > 0;
    if let Some(e) = &inf.epsilon {
        let mut m = claim_json(&e.conclusion);
        m.insert("c_vec".into(), json!(e.c_vec));
        m.insert("epsilon_bits".into(), json!(e.epsilon_bits));
        m.insert("bound_bits".into(), json!(e.bound_bits));
        report.extra("epsilon", serde_json::Value::Object(m));
        ok |= e.conclusion.is_positive();
    }
    Ok(Outcome { report, ok })
}

pub fn check_dag(a: &CheckDagArgs) -> Result<Outcome> {
    let tol = a.common.tol_bits;
    check_tolerances(&a.common)?;
    let (dag, file) = read_dag(&a.dag)?;
    let (dist, mode) = load_source(&a.source)?;
    let obs = dag_groups(&dag, &file)?;
    let m = dist.measure();
    let ground = dist.ground_set();
    let map = NodeMap::injective(&dag, ground).context("every DAG node must be a variable of the distribution")?;

    let mut report = Report::new(mode_name(mode), tol);
    let mut ok = true;
    // Markov conditions concern the nodes alone; extra variables are references.
    let nodes = dist.marginal(map.map(dag.all()))?;
    let node_measure = nodes.measure();
    let local = local_markov_holds(&dag, &node_measure, tol)?;
    ok &= local.holds;
    let mut markov = serde_json::Map::new();
    markov.insert("local".into(), markov_json(&dag, &local));
    if dag.len() <= MAX_GLOBAL_MARKOV_NODES {
        let global = global_markov_holds(&dag, &node_measure, tol)?;
        ok &= global.holds;
        markov.insert("global".into(), markov_json(&dag, &global));
    } else {
        report.assumptions.push(format!(
            "global Markov check skipped above {MAX_GLOBAL_MARKOV_NODES} nodes; the local check is equivalent"
        ));
    }
    report.extra("markov", serde_json::Value::Object(markov));
    report.extra("multiplicities", json!(ancestor_multiplicities(&dag, &obs)));

    let reference = match reference_elements(&obs, &map, ground) {
        Ok((y, _)) => Some(y),
        Err(Error::NodeMismatch(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let Some(y) = reference else {
        report
            .assumptions
            .push("no reference: model validation and decompositions skipped".into());
        return Ok(Outcome { report, ok });
    };

    let values = match &a.values {
        Some(p) => {
            let v = read_values(p)?;
            if v.n() != obs.len() {
                bail!("{}: `n` is {} but the DAG declares {} groups", p.display(), v.n(), obs.len());
            }
            v
        }
        None => {
            let groups: Vec<BitSet> = obs.groups().iter().map(|&g| map.map(g)).collect();
            report
                .assumptions
                .push("observation values computed from the distribution".into());
            ObservationValues::from_measure(&m, &groups, y, None, false)?
        }
    };
    let model = validate_dag_model(&dag, &m, &obs, &values.to_map(), tol)?;
    ok &= model.holds;
    report.extra("dag_model", markov_json(&dag, &model));
    for (s, v) in values.to_map() {
        report.quantity(format!("info_{{{}}}_bits", subset_key(s)), v);
    }

    match check_decomposition(&dag, &m, &obs, tol) {
        Ok(d) => {
            if let Some(node) = &d.node_level {
                report.quantity("node_joint_bits", node.joint_bits);
                report.quantity("node_sum_bits", node.sum_bits);
                report.quantity("node_equality_condition_bits", node.equality_condition_bits);
                report.slack("node_decomposition_bits", node.slack_bits);
                ok &= node.slack_bits >= -tol && (!node.equality_expected || node.equality_holds);
                report.extra(
                    "node_equality",
                    json!({"expected": node.equality_expected, "holds": node.equality_holds}),
                );
            }
            if let Some(g) = &d.group_level {
                report.quantity("ancestral_bits", g.ancestral_bits);
                report.quantity("weighted_ancestral_bits", g.weighted_ancestral_bits);
                report.quantity("joint_bits", g.joint_bits);
                report.quantity("weighted_observed_bits", g.weighted_observed_bits);
                report.quantity("screening_bits", g.screening_bits);
                report.slack("ancestral_decomposition_bits", g.ancestral_slack_bits);
                report.slack("ancestral_to_observed_bits", g.ancestral_to_observed_slack_bits);
                report.slack("observed_decomposition_bits", g.observed_slack_bits);
                ok &= g.ancestral_slack_bits >= -tol && g.ancestral_to_observed_slack_bits >= -tol;
                if g.reference_screened {
                    ok &= g.observed_slack_bits >= -tol;
                } else {
                    report
                        .assumptions
                        .push("reference not screened by the observations; observed decomposition not guaranteed".into());
                }
                report.extra("reference_screened", json!(g.reference_screened));
            }
            report.assumptions.extend(d.notes);
        }
        Err(Error::MarkovPrecondition { worst_bits }) => {
            report.assumptions.push(format!(
                "decompositions skipped: local Markov condition fails by {worst_bits} bits"
            ));
        }
        Err(e) => return Err(e.into()),
    }
    Ok(Outcome { report, ok })
}

pub fn strings(a: &StringsArgs) -> Result<Outcome> {
    check_tolerances(&a.common)?;
    let mut parts = Vec::with_capacity(a.files.len());
    for p in &a.files {
        let bytes = fs::read(p).with_context(|| format!("cannot read {}", p.display()))?;
        parts.push((p.display().to_string(), bytes));
    }
    let corpus = StringCorpus::new(parts).context("input files")?;
    let n = corpus.len();
    let slack = match a.slack_bits {
        Some(s) => SlackBudget::new(s).context("--slack-bits")?,
        None => SlackBudget::default_for(n),
    };
    let c = a.c.unwrap_or(n - 1);
    let comp = CompressorHandle::zstd();
    let inf = infer_string_ancestors(&comp, &corpus, c, slack).context("--c")?;
    let mut report = Report::new("strings", a.common.tol_bits);
    report.absorb(&inf);
    report.extra("labels", json!(corpus.labels()));
    report.extra("slack_bits", json!(slack.bits()));
    report.extra("compressor", json!(comp.name()));
    let ok = report.conclusions.iter().any(is_positive);
    Ok(Outcome { report, ok })
}

pub fn verify(a: &VerifyArgs) -> Result<Outcome> {
    check_tolerances(&a.common)?;
    let config = VerificationConfig {
        trials: a.trials,
        n_nodes: a.nodes,
        edge_prob: a.edge_prob,
        seed: a.seed,
        tolerance_bits: a.common.tol_bits,
        threads: a.threads,
    };
    let v = verify_batch(&config)?;
    let mut report = Report::new("verification", a.common.tol_bits);
    report.seed = Some(a.seed);
    for (name, t) in &v.checks {
        if let Some(w) = t.worst_slack_bits {
            report.slack(format!("{name}_worst_bits"), w);
        }
    }
    report.extra("checks", json!(v.checks));
    report.extra("failures", json!(v.failures));
    report.extra("trials", json!(a.trials));
    report.extra("nodes", json!(a.nodes));
    report.extra("edge_prob", json!(a.edge_prob));
    report
        .assumptions
        .push("references in each trial are functions of the observed nodes".into());
    Ok(Outcome { ok: v.passed(), report })
}
