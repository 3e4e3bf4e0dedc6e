//! Common-ancestor inference from information values.
//!
//! Criteria are compared against a decision tolerance rather than zero so
//! that rounding noise never produces a structural claim.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::bitset::BitSet;
use crate::dag::{ancestor_multiplicities, local_violations, reference_elements, Dag, NodeMap, ObservationGroups};
use crate::dist::{JointDistribution, Overlap};
use crate::error::{ensure_in_range, ensure_pairwise_disjoint, Error, Result};
use crate::measure::{ElementSubset, InfoMeasure};
use crate::numeric::compensated_sum;

/// Default margin a criterion must exceed before a conclusion is drawn.
pub const DEFAULT_DECISION_TOL: f64 = 1e-6;

/// Tolerance for the consistency checks on [`ObservationValues`].
pub const VALUE_CONSISTENCY_TOL: f64 = 1e-9;

/// Largest group count accepted in value mode (the table has `2^n` entries).
pub const MAX_VALUE_GROUPS: usize = 20;

/// Largest group count accepted by [`submodularity_audit`].
pub const MAX_SUBMODULARITY_GROUPS: usize = 12;

/// The observation `S ↦ I(Y:O_S)` over all subsets of `n` groups.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationValues {
    n: usize,
    values: Vec<f64>,
    ancestral_info: Option<f64>,
    y_is_function_of_obs: bool,
}

impl ObservationValues {
    /// `values[S.bits()]` holds `I(Y:O_S)`.
    pub fn new(n: usize, values: Vec<f64>, ancestral_info: Option<f64>, y_is_function_of_obs: bool) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty("group list"));
        }
        if n > MAX_VALUE_GROUPS {
            return Err(Error::SizeGuard {
                what: "observation values",
                size: n,
                limit: MAX_VALUE_GROUPS,
            });
        }
        let all = BitSet::full(n);
        if values.len() != 1 << n {
            // Name the first subset without an entry.
            let missing = all
                .subsets()
                .find(|s| s.bits() as usize >= values.len())
                .unwrap_or(all);
            return Err(Error::MissingSubset(missing));
        }
        let invalid = |msg: String| Err(Error::InvalidObservation(msg));
        if let Some(s) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("value for {:?} is not finite", BitSet::from_bits(s as u64)));
        }
        if values[0].abs() > VALUE_CONSISTENCY_TOL {
            return invalid(format!("value of the empty set is {} bits, expected 0", values[0]));
        }
        for s in all.subsets() {
            for i in all.difference(s) {
                let bigger = s.union(BitSet::singleton(i));
                let drop = values[s.bits() as usize] - values[bigger.bits() as usize];
                if drop > VALUE_CONSISTENCY_TOL {
                    return invalid(format!("value decreases by {drop} bits from {s:?} to {bigger:?}"));
                }
            }
        }
        if let Some(a) = ancestral_info {
            let joint = values[all.bits() as usize];
            if !a.is_finite() || a < joint - VALUE_CONSISTENCY_TOL {
                return invalid(format!("ancestral information {a} is below the joint value {joint}"));
            }
            if y_is_function_of_obs && (a - joint).abs() > VALUE_CONSISTENCY_TOL {
                return invalid(format!(
                    "ancestral information {a} differs from the joint value {joint} although Y is a function of the observations"
                ));
            }
        }
        Ok(Self {
            n,
            values,
            ancestral_info,
            y_is_function_of_obs,
        })
    }

    /// Builds from a subset-keyed map, which must cover every subset.
    pub fn from_map(
        n: usize,
        map: &BTreeMap<BitSet, f64>,
        ancestral_info: Option<f64>,
        y_is_function_of_obs: bool,
    ) -> Result<Self> {
        ensure_in_range("group count", n, 1, MAX_VALUE_GROUPS)?;
        let values = BitSet::full(n)
            .subsets()
            .map(|s| map.get(&s).copied().ok_or(Error::MissingSubset(s)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, values, ancestral_info, y_is_function_of_obs)
    }

    /// Evaluates `I(Y:O_S)` on a measure for all `S`; groups are ground masks.
    pub fn from_measure<M: InfoMeasure + ?Sized>(
        measure: &M,
        groups: &[BitSet],
        y: BitSet,
        ancestral_info: Option<f64>,
        y_is_function_of_obs: bool,
    ) -> Result<Self> {
        ensure_in_range("group count", groups.len(), 1, MAX_VALUE_GROUPS)?;
        let ground = measure.ground_set().all();
        if y.is_empty() {
            return Err(Error::Empty("reference set Y"));
        }
        for &g in groups {
            if g.is_empty() {
                return Err(Error::Empty("group"));
            }
            if !g.union(y).is_subset(ground) {
                return Err(Error::ForeignElement);
            }
            ensure_pairwise_disjoint(&[g, y])?;
        }
        let values = BitSet::full(groups.len())
            .subsets()
            .map(|s| {
                let o = s.iter().fold(BitSet::EMPTY, |u, i| u.union(groups[i]));
                measure.mutual_information(y, o, BitSet::EMPTY)
            })
            .collect();
        Self::new(groups.len(), values, ancestral_info, y_is_function_of_obs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn value(&self, s: BitSet) -> f64 {
        self.values[s.bits() as usize]
    }

    pub fn single(&self, i: usize) -> f64 {
        self.value(BitSet::singleton(i))
    }

    pub fn joint(&self) -> f64 {
        self.value(BitSet::full(self.n))
    }

    pub fn ancestral_info(&self) -> Option<f64> {
        self.ancestral_info
    }

    pub fn y_is_function_of_obs(&self) -> bool {
        self.y_is_function_of_obs
    }

    pub fn to_map(&self) -> BTreeMap<BitSet, f64> {
        BitSet::full(self.n).subsets().map(|s| (s, self.value(s))).collect()
    }

    /// `I(Y:an(O_[n]))`, either supplied or collapsed to the joint value.
    pub fn ancestral_value(&self) -> Result<f64> {
        match (self.ancestral_info, self.y_is_function_of_obs) {
            (Some(a), _) => Ok(a),
            (None, true) => Ok(self.joint()),
            (None, false) => Err(Error::MissingAssumption(
                "ancestral information or the assumption that Y is a function of the observations",
            )),
        }
    }
}

/// Where the numbers in a report came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// An exact joint distribution.
    Exact,
    /// A plug-in estimate from samples.
    Empirical,
    /// Supplied information values.
    Values,
    /// Compressed lengths of strings.
    Strings,
}

/// Quantity compared against the decision threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// `I_c = (1/c) Σ H(O_i) − H(O_[n])`.
    MultiInformation,
    /// `(1/c) Σ I(Y:O_i) − I(Y:an(O_[n]))`.
    Redundancy,
    /// `(1/c) Σ K(s_i) − K(s_1, …, s_n)`.
    Compression,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "claim", rename_all = "snake_case")]
pub enum Conclusion {
    /// Some `k` of the observations share a common ancestor in every DAG-model.
    /// `unobserved` is set only when the caller ruled out direct influence
    /// among the observations.
    CommonAncestorGe { k: usize, unobserved: bool },
    NoConclusion,
}

impl Conclusion {
    pub fn is_positive(&self) -> bool {
        matches!(self, Conclusion::CommonAncestorGe { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplicityResult {
    pub c: usize,
    pub criterion_bits: f64,
    pub conclusion: Conclusion,
    /// Entropy (multi-information criterion) or information (redundancy
    /// criterion) lower bound for the ancestors of more than `c` observations.
    pub bound_bits: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonResult {
    pub c_vec: Vec<usize>,
    pub epsilon_bits: f64,
    pub bound_bits: Option<f64>,
    pub conclusion: Conclusion,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InferenceReport {
    pub mode: Mode,
    pub criterion: Criterion,
    pub n: usize,
    pub results: Vec<MultiplicityResult>,
    /// Largest qualifying `c`, or 0 when none qualifies.
    pub largest_c: usize,
    pub epsilon: Option<EpsilonResult>,
    pub quantities: BTreeMap<String, f64>,
    pub slacks: BTreeMap<String, f64>,
    pub assumptions: Vec<String>,
    pub decision_tol_bits: f64,
}

impl InferenceReport {
    pub(crate) fn new(mode: Mode, criterion: Criterion, n: usize, decision_tol: f64) -> Self {
        Self {
            mode,
            criterion,
            n,
            results: Vec::new(),
            largest_c: 0,
            epsilon: None,
            quantities: BTreeMap::new(),
            slacks: BTreeMap::new(),
            assumptions: Vec::new(),
            decision_tol_bits: decision_tol,
        }
    }

    pub fn result(&self, c: usize) -> Option<&MultiplicityResult> {
        self.results.iter().find(|r| r.c == c)
    }

    /// The claim attached to the largest qualifying `c`.
    pub fn strongest(&self) -> Conclusion {
        self.result(self.largest_c)
            .map(|r| r.conclusion)
            .unwrap_or(Conclusion::NoConclusion)
    }

    pub(crate) fn push(&mut self, c: usize, criterion: f64, bound: Option<f64>, opts: &InferenceOptions) {
        let conclusion = if criterion > self.decision_tol_bits {
            self.largest_c = self.largest_c.max(c);
            Conclusion::CommonAncestorGe {
                k: c + 1,
                unobserved: opts.no_direct_influence,
            }
        } else {
            Conclusion::NoConclusion
        };
        self.results.push(MultiplicityResult {
            c,
            criterion_bits: criterion,
            conclusion,
            bound_bits: bound,
        });
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceOptions {
    pub decision_tol: f64,
    /// Restrict to one `c`; all of `1..n` otherwise.
    pub c: Option<usize>,
    /// Caller asserts no observation directly influences another, so any
    /// inferred common ancestor is unobserved.
    pub no_direct_influence: bool,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        Self {
            decision_tol: DEFAULT_DECISION_TOL,
            c: None,
            no_direct_influence: false,
        }
    }
}

impl InferenceOptions {
    pub(crate) fn c_values(&self, n: usize) -> Result<Vec<usize>> {
        if n < 2 {
            return Err(Error::OutOfRange {
                what: "group count",
                value: n as i64,
                min: 2,
                max: i64::MAX,
            });
        }
        if !(self.decision_tol >= 0.0) {
            return Err(Error::InvalidConfig(format!("decision tolerance {} is negative", self.decision_tol)));
        }
        match self.c {
            Some(c) => {
                ensure_in_range("c", c, 1, n - 1)?;
                Ok(vec![c])
            }
            None => Ok((1..n).collect()),
        }
    }
}

/// `(c/(n−c)) · I_c`, a lower bound on the entropy of the ancestors shared
/// by more than `c` of the `n` variables. `None` when `I_c ≤ 0`.
pub fn ancestor_entropy_bound(group_entropies: &[f64], joint_entropy: f64, c: usize) -> Result<Option<f64>> {
    let n = group_entropies.len();
    ensure_in_range("c", c, 1, n.saturating_sub(1))?;
    let i_c = compensated_sum(group_entropies.iter().copied()) / c as f64 - joint_entropy;
    Ok((i_c > 0.0).then(|| c as f64 / (n - c) as f64 * i_c))
}

/// Entropy mode: the observations are their own reference (`Y` a copy).
pub fn infer_from_entropies(
    group_entropies: &[f64],
    joint_entropy: f64,
    mode: Mode,
    opts: &InferenceOptions,
) -> Result<InferenceReport> {
    let n = group_entropies.len();
    let cs = opts.c_values(n)?;
    let mut report = InferenceReport::new(mode, Criterion::MultiInformation, n, opts.decision_tol);
    let singles = compensated_sum(group_entropies.iter().copied());
    for (i, &h) in group_entropies.iter().enumerate() {
        report.quantities.insert(format!("h_{}_bits", i + 1), h);
    }
    report.quantities.insert("h_joint_bits".into(), joint_entropy);
    for c in cs {
        let i_c = singles / c as f64 - joint_entropy;
        report.quantities.insert(format!("i_{c}_bits"), i_c);
        let bound = ancestor_entropy_bound(group_entropies, joint_entropy, c)?;
        report.push(c, i_c, bound, opts);
    }
    report.assumptions.push("reference is a copy of all observations".into());
    if mode == Mode::Empirical {
        report
            .assumptions
            .push("plug-in estimate from samples; no significance test".into());
    }
    push_influence_assumption(&mut report, opts);
    Ok(report)
}

/// Entropy mode on a distribution with disjoint variable groups.
pub fn infer_from_distribution(
    dist: &JointDistribution,
    groups: &[BitSet],
    mode: Mode,
    opts: &InferenceOptions,
) -> Result<InferenceReport> {
    // multi_information validates the groups.
    dist.multi_information(groups, 1)?;
    let entropies: Vec<f64> = groups.iter().map(|&g| dist.entropy(g)).collect::<Result<_>>()?;
    let union = groups.iter().fold(BitSet::EMPTY, |u, &g| u.union(g));
    infer_from_entropies(&entropies, dist.entropy(union)?, mode, opts)
}

/// Value mode: compares `(1/c) Σ I(Y:O_i)` with `I(Y:an(O_[n]))`.
pub fn infer_from_values(obs: &ObservationValues, opts: &InferenceOptions) -> Result<InferenceReport> {
    let n = obs.n();
    let cs = opts.c_values(n)?;
    let ancestral = obs.ancestral_value()?;
    let mut report = InferenceReport::new(Mode::Values, Criterion::Redundancy, n, opts.decision_tol);
    let singles = compensated_sum((0..n).map(|i| obs.single(i)));
    for i in 0..n {
        report.quantities.insert(format!("info_{}_bits", i + 1), obs.single(i));
    }
    report.quantities.insert("info_joint_bits".into(), obs.joint());
    report.quantities.insert("info_ancestral_bits".into(), ancestral);
    for c in cs {
        let eps = epsilon_and_bound(obs, &vec![c; n])?;
        report.quantities.insert(format!("r_{c}_bits"), singles / c as f64 - obs.joint());
        report.push(c, eps.epsilon_bits, eps.bound_bits, opts);
    }
    push_value_assumptions(&mut report, obs);
    push_influence_assumption(&mut report, opts);
    Ok(report)
}

fn push_value_assumptions(report: &mut InferenceReport, obs: &ObservationValues) {
    if obs.ancestral_info().is_some() {
        report.assumptions.push("ancestral information supplied".into());
    } else {
        report
            .assumptions
            .push("reference is independent of everything else given the observations".into());
    }
}

fn push_influence_assumption(report: &mut InferenceReport, opts: &InferenceOptions) {
    if opts.no_direct_influence {
        report
            .assumptions
            .push("no observation directly influences another".into());
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonBound {
    pub epsilon_bits: f64,
    /// `(Σ 1/c_i − 1)^{-1} ε`, present when `ε > 0`.
    pub bound_bits: Option<f64>,
}

/// `ε = Σ (1/c_i) I(Y:O_i) − I(Y:an(O_[n]))` and the information bound it implies.
pub fn epsilon_and_bound(obs: &ObservationValues, c_vec: &[usize]) -> Result<EpsilonBound> {
    let n = obs.n();
    if c_vec.len() != n {
        return Err(Error::InvalidConfig(format!("c vector has {} entries for {n} groups", c_vec.len())));
    }
    for &c in c_vec {
        ensure_in_range("c_i", c, 1, n.saturating_sub(1))?;
    }
    let ancestral = obs.ancestral_value()?;
    let weighted = compensated_sum(c_vec.iter().enumerate().map(|(i, &c)| obs.single(i) / c as f64));
    let epsilon = weighted - ancestral;
    // Every c_i ≤ n−1, so Σ 1/c_i ≥ n/(n−1) > 1 and the coefficient is finite.
    let excess = compensated_sum(c_vec.iter().map(|&c| 1.0 / c as f64)) - 1.0;
    let bound_bits = (epsilon > 0.0).then(|| epsilon / excess);
    Ok(EpsilonBound { epsilon_bits: epsilon, bound_bits })
}

/// Value-mode report with a non-uniform `c` vector.
pub fn infer_with_c_vec(obs: &ObservationValues, c_vec: &[usize], opts: &InferenceOptions) -> Result<InferenceReport> {
    let mut report = infer_from_values(obs, opts)?;
    let eps = epsilon_and_bound(obs, c_vec)?;
    let conclusion = if eps.epsilon_bits > opts.decision_tol {
        // Some index i has a common ancestor of c_i + 1 groups; which one is unknown.
        Conclusion::CommonAncestorGe {
            k: c_vec.iter().min().copied().unwrap_or(0) + 1,
            unobserved: opts.no_direct_influence,
        }
    } else {
        Conclusion::NoConclusion
    };
    report.epsilon = Some(EpsilonResult {
        c_vec: c_vec.to_vec(),
        epsilon_bits: eps.epsilon_bits,
        bound_bits: eps.bound_bits,
        conclusion,
    });
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeDecomposition {
    /// `I(Y : all non-reference nodes)`.
    pub joint_bits: f64,
    /// `Σ I(Y : v | pa(v))` over the same nodes.
    pub sum_bits: f64,
    pub slack_bits: f64,
    /// Largest `I(v : nd(v) ∖ pa(v) | pa(v), Y)`; equality is expected when
    /// it is within tolerance.
    pub equality_condition_bits: f64,
    pub equality_expected: bool,
    pub equality_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupDecomposition {
    pub multiplicities: Vec<usize>,
    /// `I(Y : an(O_[n]))`.
    pub ancestral_bits: f64,
    /// `Σ (1/d_i) I(Y : an(O_i))`.
    pub weighted_ancestral_bits: f64,
    /// `I(Y : O_[n])`.
    pub joint_bits: f64,
    /// `Σ (1/d_i) I(Y : O_i)`.
    pub weighted_observed_bits: f64,
    pub ancestral_slack_bits: f64,
    pub ancestral_to_observed_slack_bits: f64,
    /// `I(Y:O_[n]) − Σ (1/d_i) I(Y:O_i)`; guaranteed non-negative only when
    /// `reference_screened` holds.
    pub observed_slack_bits: f64,
    /// `I(Y : everything else | O_[n])`.
    pub screening_bits: f64,
    pub reference_screened: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub node_level: Option<NodeDecomposition>,
    pub group_level: Option<GroupDecomposition>,
    pub notes: Vec<String>,
}

/// Evaluates both decompositions of information about `Y` on a DAG-model.
///
/// The reference set is the `Y` nodes of `obs`, or every measure element
/// that is not a node. Fails if the local Markov condition is violated.
pub fn check_decomposition<M: InfoMeasure + ?Sized>(
    dag: &Dag,
    measure: &M,
    obs: &ObservationGroups,
    tol: f64,
) -> Result<DecompositionReport> {
    let ground = measure.ground_set();
    let map = NodeMap::injective(dag, ground)?;
    let violations = local_violations(dag, measure, &map, tol);
    if !violations.is_empty() {
        let worst = crate::dag::MarkovCheckResult {
            holds: false,
            violations,
            not_applicable: Vec::new(),
        }
        .worst_bits();
        return Err(Error::MarkovPrecondition { worst_bits: worst });
    }
    let (y, _) = reference_elements(obs, &map, ground)?;
    let i = |a: BitSet, b: BitSet, c: BitSet| measure.mutual_information(a, b, c);
    let y_nodes = obs.y_nodes();
    let mut notes = Vec::new();

    let node_level = if y_nodes.iter().any(|v| !dag.children(v).is_empty()) {
        notes.push("node-level decomposition skipped: reference nodes have children".into());
        None
    } else {
        let nodes = dag.all().difference(y_nodes);
        let joint = i(y, map.map(nodes), BitSet::EMPTY);
        let sum = compensated_sum(nodes.iter().map(|v| i(y, map.map(BitSet::singleton(v)), map.map(dag.parents(v)))));
        let mut worst: f64 = 0.0;
        for v in nodes {
            let pa = dag.parents(v);
            let rest = dag.non_descendants(v).difference(pa).difference(y_nodes);
            if !rest.is_empty() {
                let cond = map.map(pa).union(y);
                worst = worst.max(i(map.map(BitSet::singleton(v)), map.map(rest), cond));
            }
        }
        let slack = joint - sum;
        let expected = worst <= tol;
        Some(NodeDecomposition {
            joint_bits: joint,
            sum_bits: sum,
            slack_bits: slack,
            equality_condition_bits: worst,
            equality_expected: expected,
            equality_holds: slack.abs() <= tol,
        })
    };

    let groups = obs.groups();
    let ancestral: Vec<BitSet> = groups.iter().map(|&g| dag.ancestors_unchecked(g)).collect();
    let an_all = ancestral.iter().fold(BitSet::EMPTY, |u, &a| u.union(a));
    let group_level = if !an_all.is_disjoint(y_nodes) {
        notes.push("group-level decomposition skipped: a reference node is an ancestor of a group".into());
        None
    } else {
        let d = ancestor_multiplicities(dag, obs);
        let weighted = |sets: &[BitSet]| {
            compensated_sum(sets.iter().zip(&d).map(|(&s, &di)| i(y, map.map(s), BitSet::EMPTY) / di as f64))
        };
        let o_all = obs.union_of(obs.all_groups());
        let ancestral_bits = i(y, map.map(an_all), BitSet::EMPTY);
        let weighted_ancestral = weighted(&ancestral);
        let weighted_observed = weighted(groups);
        let joint = i(y, map.map(o_all), BitSet::EMPTY);
        let rest = ground.all().difference(y).difference(map.map(o_all));
        let screening = if rest.is_empty() {
            0.0
        } else {
            i(y, rest, map.map(o_all))
        };
        Some(GroupDecomposition {
            multiplicities: d,
            ancestral_bits,
            weighted_ancestral_bits: weighted_ancestral,
            joint_bits: joint,
            weighted_observed_bits: weighted_observed,
            ancestral_slack_bits: ancestral_bits - weighted_ancestral,
            ancestral_to_observed_slack_bits: weighted_ancestral - weighted_observed,
            observed_slack_bits: joint - weighted_observed,
            screening_bits: screening,
            reference_screened: screening <= tol,
        })
    };
    Ok(DecompositionReport {
        node_level,
        group_level,
        notes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubmodularityViolation {
    pub s: BitSet,
    pub t: BitSet,
    /// `I(Y:O_S) + I(Y:O_T) − I(Y:O_{S∪T}) − I(Y:O_{S∩T})`.
    pub excess_bits: f64,
}

/// Checks that `S ↦ −I(Y:O_S)` is submodular over all pairs of index sets.
///
/// A violation shows that the groups are not mutually independent.
pub fn submodularity_audit<M: InfoMeasure + ?Sized>(
    measure: &M,
    y: &ElementSubset,
    groups: &[ElementSubset],
    tol: f64,
) -> Result<Vec<SubmodularityViolation>> {
    if groups.is_empty() {
        return Err(Error::Empty("group list"));
    }
    if groups.len() > MAX_SUBMODULARITY_GROUPS {
        return Err(Error::SizeGuard {
            what: "submodularity audit",
            size: groups.len(),
            limit: MAX_SUBMODULARITY_GROUPS,
        });
    }
    let ground = measure.ground_set();
    for s in std::iter::once(y).chain(groups) {
        if !std::sync::Arc::ptr_eq(s.ground(), ground) && **s.ground() != **ground {
            return Err(Error::ForeignElement);
        }
    }
    let masks: Vec<BitSet> = groups.iter().map(|g| g.members()).collect();
    let union = masks.iter().fold(BitSet::EMPTY, |u, &g| u.union(g));
    ensure_pairwise_disjoint(&[y.members(), union])?;
    let all = BitSet::full(groups.len());
    let info: Vec<f64> = all
        .subsets()
        .map(|s| {
            let o = s.iter().fold(BitSet::EMPTY, |u, i| u.union(masks[i]));
            measure.mutual_information(y.members(), o, BitSet::EMPTY)
        })
        .collect();
    let at = |s: BitSet| info[s.bits() as usize];
    let mut out = Vec::new();
    for s in all.subsets() {
        for t in all.subsets() {
            if t <= s || s.is_subset(t) || t.is_subset(s) {
                continue;
            }
            let excess = at(s) + at(t) - at(s.union(t)) - at(s.intersection(t));
            if excess > tol {
                out.push(SubmodularityViolation { s, t, excess_bits: excess });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SynergyDecomposition {
    /// `r_c(Y)`.
    pub reference_bits: f64,
    /// `r_c(O_[n])`.
    pub observations_bits: f64,
    /// `r_c(O_[n] | Y)`.
    pub conditioned_bits: f64,
    /// `r_c(Y) − (r_c(O_[n]) − r_c(O_[n] | Y))`.
    pub residual_bits: f64,
}

/// Splits redundancy about `Y` into unconditional and `Y`-conditioned
/// redundancy of the observations about themselves.
///
/// Evaluating `r_c(O_[n])` requires the non-disjoint entropy identity, so
/// this needs a distribution rather than an abstract measure.
pub fn synergy_decomposition(
    dist: &JointDistribution,
    groups: &[BitSet],
    y: BitSet,
    c: usize,
) -> Result<SynergyDecomposition> {
    let union = groups.iter().fold(BitSet::EMPTY, |u, &g| u.union(g));
    ensure_pairwise_disjoint(&[union, y])?;
    let reference = dist.redundancy(groups, y, c, None, Overlap::Reject)?;
    let observations = dist.redundancy(groups, union, c, None, Overlap::Allow)?;
    let conditioned = dist.redundancy(groups, union, c, Some(y), Overlap::Allow)?;
    Ok(SynergyDecomposition {
        reference_bits: reference,
        observations_bits: observations,
        conditioned_bits: conditioned,
        residual_bits: reference - (observations - conditioned),
    })
}
