//! Seeded batch verification of the decomposition inequalities.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{exact_joint, flat_simplex, random_bayes_net_with};
use crate::bitset::BitSet;
use crate::dag::{global_markov_holds, local_markov_holds, Dag, ObservationGroups, MAX_GLOBAL_MARKOV_NODES};
use crate::dist::{JointDistribution, VariableDecl};
use crate::error::{Error, Result};
use crate::inference::{check_decomposition, submodularity_audit};
use crate::measure::ElementSubset;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationConfig {
    pub trials: u64,
    pub n_nodes: usize,
    pub edge_prob: f64,
    pub seed: u64,
    pub tolerance_bits: f64,
    /// Worker threads; `None` runs on the calling thread. Results do not
    /// depend on this.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        Self {
            trials: 200,
            n_nodes: 6,
            edge_prob: 0.5,
            seed: 0,
            tolerance_bits: 1e-9,
            threads: None,
        }
    }
}

impl VerificationConfig {
    fn validate(&self) -> Result<()> {
        if !(2..=MAX_GLOBAL_MARKOV_NODES).contains(&self.n_nodes) {
            return Err(Error::OutOfRange {
                what: "node count",
                value: self.n_nodes as i64,
                min: 2,
                max: MAX_GLOBAL_MARKOV_NODES as i64,
            });
        }
        if !(0.0..=1.0).contains(&self.edge_prob) {
            return Err(Error::InvalidConfig(format!("edge probability {} is outside [0, 1]", self.edge_prob)));
        }
        if !(self.tolerance_bits > 0.0) {
            return Err(Error::InvalidConfig(format!("tolerance {} is not positive", self.tolerance_bits)));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidConfig("thread count must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub check: &'static str,
    /// Signed margin; negative beyond the tolerance means a violation.
    pub slack_bits: Option<f64>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial: u64,
    pub checks: Vec<CheckOutcome>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CheckTally {
    pub passed: u64,
    pub failed: u64,
    pub worst_slack_bits: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialFailure {
    /// Reproduce with [`run_trial`] on the same config.
    pub trial: u64,
    pub check: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub config: VerificationConfig,
    pub checks: BTreeMap<String, CheckTally>,
    pub failures: Vec<TrialFailure>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn tally(&self, check: &str) -> Option<&CheckTally> {
        self.checks.get(check)
    }
}

struct Recorder {
    tol: f64,
    checks: Vec<CheckOutcome>,
}

impl Recorder {
    fn slack(&mut self, check: &'static str, slack: f64) {
        self.checks.push(CheckOutcome {
            check,
            slack_bits: Some(slack),
            passed: slack >= -self.tol,
        });
    }

    fn flag(&mut self, check: &'static str, passed: bool) {
        self.checks.push(CheckOutcome {
            check,
            slack_bits: None,
            passed,
        });
    }
}

/// Runs every trial; trial `t` draws from stream `t` of a generator seeded
/// with `config.seed`.
pub fn verify_batch(config: &VerificationConfig) -> Result<VerificationReport> {
    config.validate()?;
    let run = || -> Result<Vec<TrialOutcome>> {
        match config.threads {
            Some(_) => (0..config.trials).into_par_iter().map(|t| run_trial(config, t)).collect(),
            None => (0..config.trials).map(|t| run_trial(config, t)).collect(),
        }
    };
    let outcomes = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    let mut checks: BTreeMap<String, CheckTally> = BTreeMap::new();
    let mut failures = Vec::new();
    for outcome in outcomes {
        for c in outcome.checks {
            let tally = checks.entry(c.check.to_owned()).or_default();
            if c.passed {
                tally.passed += 1;
            } else {
                tally.failed += 1;
                failures.push(TrialFailure {
                    trial: outcome.trial,
                    check: c.check.to_owned(),
                });
            }
            if let Some(s) = c.slack_bits {
                tally.worst_slack_bits = Some(tally.worst_slack_bits.map_or(s, |w| w.min(s)));
            }
        }
    }
    Ok(VerificationReport {
        config: config.clone(),
        checks,
        failures,
    })
}

fn trial_rng(config: &VerificationConfig, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(trial);
    rng
}

/// One trial: a random binary net checked against the Markov conditions
/// and the decompositions, plus an independent-roots instance.
pub fn run_trial(config: &VerificationConfig, trial: u64) -> Result<TrialOutcome> {
    config.validate()?;
    let mut rng = trial_rng(config, trial);
    let mut rec = Recorder {
        tol: config.tolerance_bits,
        checks: Vec::new(),
    };
    dag_model_checks(&mut rng, config, &mut rec)?;
    independent_root_checks(&mut rng, config, &mut rec)?;
    Ok(TrialOutcome {
        trial,
        checks: rec.checks,
    })
}

fn dag_model_checks(rng: &mut ChaCha8Rng, config: &VerificationConfig, rec: &mut Recorder) -> Result<()> {
    let tol = config.tolerance_bits;
    let net = random_bayes_net_with(rng, config.n_nodes, config.edge_prob, 2)?;
    let dag = net.dag();
    let joint = exact_joint(&net)?;
    {
        let m = joint.measure();
        rec.flag("local_markov", local_markov_holds(dag, &m, tol)?.holds);
        rec.flag("global_markov", global_markov_holds(dag, &m, tol)?.holds);
    }
    let groups = random_disjoint_groups(rng, dag.all());
    let observed = groups.iter().fold(BitSet::EMPTY, |u, &g| u.union(g));
    let obs = ObservationGroups::new(dag, groups, BitSet::EMPTY)?;

    let cards = joint.cardinalities();
    let (copy_card, copy) = tuple_index(&cards, observed);
    let with_copy = joint.with_function("Y", copy_card, |x| copy(x))?;
    decomposition_checks(dag, &with_copy, &obs, tol, rec)?;

    let f = random_function(rng, copy_card);
    let with_fn = joint.with_function("Y", f.card, |x| f.table[copy(x)])?;
    decomposition_checks(dag, &with_fn, &obs, tol, rec)
}

fn decomposition_checks(
    dag: &Dag,
    joint: &JointDistribution,
    obs: &ObservationGroups,
    tol: f64,
    rec: &mut Recorder,
) -> Result<()> {
    let report = check_decomposition(dag, &joint.measure(), obs, tol)?;
    let node = report.node_level.expect("reference is external");
    rec.slack("node_decomposition", node.slack_bits);
    if node.equality_expected {
        rec.slack("node_decomposition_equality", -node.slack_bits.abs());
    }
    let group = report.group_level.expect("reference is external");
    rec.slack("ancestral_decomposition", group.ancestral_slack_bits);
    rec.slack("ancestral_to_observed", group.ancestral_to_observed_slack_bits);
    rec.flag("reference_screened", group.reference_screened);
    if group.reference_screened {
        rec.slack("observed_decomposition", group.observed_slack_bits);
    }
    Ok(())
}

fn independent_root_checks(rng: &mut ChaCha8Rng, config: &VerificationConfig, rec: &mut Recorder) -> Result<()> {
    let n = config.n_nodes;
    let names: Vec<String> = (1..=n).map(|i| format!("V{i}")).collect();
    let vars = names.iter().map(|name| VariableDecl::new(name.clone(), 2)).collect();
    let marginals: Vec<Vec<f64>> = (0..n).map(|_| flat_simplex(rng, 2)).collect();
    let roots = JointDistribution::independent(vars, &marginals)?;
    let dag = Dag::from_edges(names, &[])?;
    let cards = roots.cardinalities();

    // Overlapping groups; sometimes an exact duplicate.
    let k = rng.random_range(2..=4usize);
    let mut groups: Vec<BitSet> = (0..k)
        .map(|_| {
            let size = rng.random_range(1..=3usize.min(n));
            let mut nodes: Vec<usize> = (0..n).collect();
            nodes.shuffle(rng);
            nodes[..size].iter().copied().collect()
        })
        .collect();
    if rng.random_bool(0.25) {
        groups[1] = groups[0];
    }
    let observed = groups.iter().fold(BitSet::EMPTY, |u, &g| u.union(g));
    let (card, index) = tuple_index(&cards, observed);
    let f = random_function(rng, card);
    let joint = roots.with_function("Y", f.card, |x| f.table[index(x)])?;
    let obs = ObservationGroups::new(&dag, groups, BitSet::EMPTY)?;
    let report = check_decomposition(&dag, &joint.measure(), &obs, config.tolerance_bits)?;
    let group = report.group_level.expect("reference is external");
    rec.slack("independent_elements", group.observed_slack_bits);

    // Disjoint groups of independent roots; Y sees all of them.
    let parts = random_disjoint_groups(rng, dag.all());
    let (card, index) = tuple_index(&cards, dag.all());
    let f = random_function(rng, card);
    let joint = roots.with_function("Y", f.card, |x| f.table[index(x)])?;
    let m = joint.measure();
    let ground = joint.ground_set();
    let y = ElementSubset::from_names(ground, &["Y"])?;
    let parts = parts
        .into_iter()
        .map(|g| ElementSubset::from_mask(ground, g))
        .collect::<Result<Vec<_>>>()?;
    let excess = submodularity_audit(&m, &y, &parts, f64::NEG_INFINITY)?
        .iter()
        .map(|v| v.excess_bits)
        .fold(f64::NEG_INFINITY, f64::max);
    if excess.is_finite() {
        rec.slack("submodularity", -excess);
    }
    Ok(())
}

/// Random disjoint groups of size 1 or 2, at least two of them.
fn random_disjoint_groups<R: Rng + ?Sized>(rng: &mut R, nodes: BitSet) -> Vec<BitSet> {
    let mut order: Vec<usize> = nodes.iter().collect();
    order.shuffle(rng);
    let target = rng.random_range(2..=order.len().min(4));
    let mut groups = Vec::with_capacity(target);
    let mut rest = &order[..];
    while groups.len() < target && !rest.is_empty() {
        // Leave at least one node for each remaining group.
        let room = rest.len() - (target - groups.len() - 1);
        let size = if room >= 2 { rng.random_range(1..=2) } else { 1 };
        groups.push(rest[..size].iter().copied().collect());
        rest = &rest[size..];
    }
    groups
}

/// Number of joint values of `vars` and a map from a full assignment to
/// the index of its restriction to `vars`.
fn tuple_index(cards: &[usize], vars: BitSet) -> (usize, impl Fn(&[usize]) -> usize + '_) {
    let size = vars.iter().map(|v| cards[v]).product();
    (size, move |x: &[usize]| vars.iter().fold(0, |acc, v| acc * cards[v] + x[v]))
}

struct RandomFunction {
    card: usize,
    table: Vec<usize>,
}

/// A uniformly random map from `0..domain` into `2..=4` values.
fn random_function<R: Rng + ?Sized>(rng: &mut R, domain: usize) -> RandomFunction {
    let card = rng.random_range(2..=4);
    RandomFunction {
        card,
        table: (0..domain).map(|_| rng.random_range(0..card)).collect(),
    }
}
