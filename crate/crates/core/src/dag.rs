//! Directed acyclic graphs, d-separation and Markov-condition checks.
//!
//! Nodes are identified by declaration index; every iteration follows that
//! order. A node counts as its own ancestor, so `an(S) ⊇ S`.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::bitset::{BitSet, MAX_INDICES};
use crate::error::{ensure_pairwise_disjoint, Error, Result};
use crate::measure::{for_each_disjoint_tuple, GroundSet, InfoMeasure};

/// Largest DAG accepted by [`global_markov_holds`].
pub const MAX_GLOBAL_MARKOV_NODES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    names: Vec<String>,
    parents: Vec<BitSet>,
    children: Vec<BitSet>,
    topo: Vec<usize>,
}

impl Dag {
    /// Builds a DAG from node names and `(parent, child)` name pairs.
    pub fn new<S: AsRef<str>>(nodes: &[S], edges: &[(S, S)]) -> Result<Self> {
        let names: Vec<String> = nodes.iter().map(|n| n.as_ref().to_owned()).collect();
        let ground = GroundSet::new(names.clone())?;
        let lookup = |n: &str| ground.index_of(n).ok_or_else(|| Error::UnknownName(n.to_owned()));
        let mut index_edges = Vec::with_capacity(edges.len());
        for (p, c) in edges {
            index_edges.push((lookup(p.as_ref())?, lookup(c.as_ref())?));
        }
        Self::from_edges(names, &index_edges)
    }

    /// Builds a DAG from names and index pairs.
    pub fn from_edges(names: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        GroundSet::new(names.clone())?;
        let n = names.len();
        let mut parents = vec![BitSet::EMPTY; n];
        for &(p, c) in edges {
            for v in [p, c] {
                if v >= n {
                    return Err(Error::IndexOutOfRange { index: v, len: n });
                }
            }
            if p == c {
                return Err(Error::SelfLoop(names[p].clone()));
            }
            if parents[c].contains(p) {
                return Err(Error::DuplicateEdge(names[p].clone(), names[c].clone()));
            }
            parents[c].insert(p);
        }
        Self::from_parents(names, parents)
    }

    /// Builds a DAG from per-node parent sets.
    pub fn from_parents(names: Vec<String>, parents: Vec<BitSet>) -> Result<Self> {
        GroundSet::new(names.clone())?;
        let n = names.len();
        if parents.len() != n {
            return Err(Error::InvalidConfig(format!("{n} nodes but {} parent sets", parents.len())));
        }
        let all = BitSet::full(n);
        let mut children = vec![BitSet::EMPTY; n];
        for (c, &ps) in parents.iter().enumerate() {
            if !ps.is_subset(all) {
                return Err(Error::IndexOutOfRange { index: ps.span() - 1, len: n });
            }
            if ps.contains(c) {
                return Err(Error::SelfLoop(names[c].clone()));
            }
            for p in ps {
                children[p].insert(c);
            }
        }
        // Kahn's algorithm, always taking the lowest-index ready node.
        let mut indegree: Vec<usize> = parents.iter().map(|p| p.len()).collect();
        let mut ready: BitSet = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(v) = ready.iter().next() {
            ready.remove(v);
            topo.push(v);
            for c in children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if topo.len() != n {
            return Err(Error::Cycle);
        }
        Ok(Self {
            names,
            parents,
            children,
            topo,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: usize) -> &str {
        &self.names[v]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn node_set<S: AsRef<str>>(&self, names: &[S]) -> Result<BitSet> {
        names
            .iter()
            .map(|n| self.index_of(n.as_ref()).ok_or_else(|| Error::UnknownName(n.as_ref().to_owned())))
            .collect()
    }

    pub fn all(&self) -> BitSet {
        BitSet::full(self.len())
    }

    pub fn parents(&self, v: usize) -> BitSet {
        self.parents[v]
    }

    pub fn children(&self, v: usize) -> BitSet {
        self.children[v]
    }

    /// Edges as `(parent, child)` pairs, ordered by child then parent.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.len())
            .flat_map(|c| self.parents[c].iter().map(move |p| (p, c)))
            .collect()
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    fn check_nodes(&self, s: BitSet) -> Result<()> {
        if !s.is_subset(self.all()) {
            return Err(Error::IndexOutOfRange {
                index: s.span() - 1,
                len: self.len(),
            });
        }
        Ok(())
    }

    /// Closure under "parent of": `S` plus every node with a directed path into `S`.
    pub fn ancestral_closure(&self, s: BitSet) -> Result<BitSet> {
        self.check_nodes(s)?;
        Ok(self.ancestors_unchecked(s))
    }

    pub(crate) fn ancestors_unchecked(&self, s: BitSet) -> BitSet {
        let mut closure = s;
        let mut frontier = s;
        while !frontier.is_empty() {
            let mut next = BitSet::EMPTY;
            for v in frontier {
                next = next.union(self.parents[v]);
            }
            frontier = next.difference(closure);
            closure = closure.union(next);
        }
        closure
    }

    /// Strict descendants of `v`.
    pub fn descendants(&self, v: usize) -> BitSet {
        let mut seen = BitSet::EMPTY;
        let mut frontier = self.children[v];
        while !frontier.is_empty() {
            seen = seen.union(frontier);
            let mut next = BitSet::EMPTY;
            for c in frontier {
                next = next.union(self.children[c]);
            }
            frontier = next.difference(seen);
        }
        seen
    }

    /// Nodes other than `v` that are not descendants of `v`.
    pub fn non_descendants(&self, v: usize) -> BitSet {
        self.all().difference(self.descendants(v)).difference(BitSet::singleton(v))
    }

    /// Whether every path between `a` and `b` is blocked by `c`.
    ///
    /// Uses the reachability ("Bayes ball") formulation: a trail is active
    /// when every non-collider on it is outside `c` and every collider has a
    /// descendant (itself included) in `c`.
    pub fn d_separated(&self, a: BitSet, b: BitSet, c: BitSet) -> Result<bool> {
        for s in [a, b, c] {
            self.check_nodes(s)?;
        }
        ensure_pairwise_disjoint(&[a, b, c])?;
        Ok(self.reachable(a, c).is_disjoint(b))
    }

    /// Nodes reachable from `a` along active trails given `c`.
    fn reachable(&self, a: BitSet, c: BitSet) -> BitSet {
        // Colliders are open iff they are in an(c).
        let anc_c = self.ancestors_unchecked(c);
        // visited[v] bit 0: entered from a child (moving up),
        //            bit 1: entered from a parent (moving down).
        const UP: u8 = 1;
        const DOWN: u8 = 2;
        let mut visited = vec![0u8; self.len()];
        let mut reached = BitSet::EMPTY;
        let mut queue: VecDeque<(usize, u8)> = a.iter().map(|v| (v, UP)).collect();
        while let Some((v, dir)) = queue.pop_front() {
            if visited[v] & dir != 0 {
                continue;
            }
            visited[v] |= dir;
            let blocked = c.contains(v);
            if !blocked {
                reached.insert(v);
            }
            if dir == UP {
                if !blocked {
                    queue.extend(self.parents[v].iter().map(|p| (p, UP)));
                    queue.extend(self.children[v].iter().map(|ch| (ch, DOWN)));
                }
            } else {
                if !blocked {
                    queue.extend(self.children[v].iter().map(|ch| (ch, DOWN)));
                }
                if anc_c.contains(v) {
                    queue.extend(self.parents[v].iter().map(|p| (p, UP)));
                }
            }
        }
        reached
    }
}

/// Observed groups `O_1..O_n` and the reference node set `Y` of a DAG.
///
/// Groups may overlap each other. An empty `y` means the reference object
/// is not a node of the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationGroups {
    groups: Vec<BitSet>,
    y: BitSet,
}

impl ObservationGroups {
    pub fn new(dag: &Dag, groups: Vec<BitSet>, y: BitSet) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::Empty("group list"));
        }
        if groups.len() > MAX_INDICES {
            return Err(Error::SizeGuard {
                what: "group list",
                size: groups.len(),
                limit: MAX_INDICES,
            });
        }
        for &g in &groups {
            if g.is_empty() {
                return Err(Error::Empty("group"));
            }
            dag.check_nodes(g)?;
            ensure_pairwise_disjoint(&[g, y])?;
        }
        dag.check_nodes(y)?;
        Ok(Self { groups, y })
    }

    pub fn from_names<S: AsRef<str>>(dag: &Dag, groups: &[Vec<S>], y: &[S]) -> Result<Self> {
        let groups = groups.iter().map(|g| dag.node_set(g)).collect::<Result<Vec<_>>>()?;
        Self::new(dag, groups, dag.node_set(y)?)
    }

    pub fn groups(&self) -> &[BitSet] {
        &self.groups
    }

    pub fn group(&self, i: usize) -> BitSet {
        self.groups[i]
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn y_nodes(&self) -> BitSet {
        self.y
    }

    /// `O_S` for a set `S` of group indices.
    pub fn union_of(&self, s: BitSet) -> BitSet {
        s.iter().fold(BitSet::EMPTY, |u, i| u.union(self.groups[i]))
    }

    pub fn all_groups(&self) -> BitSet {
        BitSet::full(self.len())
    }
}

/// `d_i`: the largest number of groups whose ancestral sets share a single
/// node of `an(O_i)`.
pub fn ancestor_multiplicity(dag: &Dag, obs: &ObservationGroups, i: usize) -> Result<usize> {
    if i >= obs.len() {
        return Err(Error::IndexOutOfRange { index: i, len: obs.len() });
    }
    Ok(ancestor_multiplicities(dag, obs)[i])
}

/// `d_i` for every group.
pub fn ancestor_multiplicities(dag: &Dag, obs: &ObservationGroups) -> Vec<usize> {
    let ancestral: Vec<BitSet> = obs.groups.iter().map(|&g| dag.ancestors_unchecked(g)).collect();
    let membership: Vec<usize> = (0..dag.len())
        .map(|v| ancestral.iter().filter(|a| a.contains(v)).count())
        .collect();
    ancestral
        .iter()
        .map(|a| a.iter().map(|v| membership[v]).max().unwrap_or(0))
        .collect()
}

/// Which part of the DAG-model definition an entry refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelCondition {
    /// (i) every observation is a set of nodes.
    GroupsAreNodes,
    /// (ii) local Markov condition.
    LocalMarkov,
    /// (iii) the measure reproduces the observed values.
    ExtendsObservation,
    /// (iv) `Y` has no outgoing edges.
    LeafReference,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MarkovViolation {
    Local {
        node: usize,
        cmi_bits: f64,
    },
    Global {
        a: BitSet,
        b: BitSet,
        c: BitSet,
        cmi_bits: f64,
    },
    Model {
        condition: ModelCondition,
        subject: BitSet,
        magnitude_bits: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MarkovCheckResult {
    pub holds: bool,
    pub violations: Vec<MarkovViolation>,
    /// Conditions that could not be evaluated in this setting.
    pub not_applicable: Vec<ModelCondition>,
}

impl MarkovCheckResult {
    fn from_violations(violations: Vec<MarkovViolation>) -> Self {
        Self {
            holds: violations.is_empty(),
            violations,
            not_applicable: Vec::new(),
        }
    }

    pub fn worst_bits(&self) -> f64 {
        self.violations
            .iter()
            .map(|v| match v {
                MarkovViolation::Local { cmi_bits, .. } | MarkovViolation::Global { cmi_bits, .. } => *cmi_bits,
                MarkovViolation::Model { magnitude_bits, .. } => *magnitude_bits,
            })
            .fold(0.0, f64::max)
    }
}

/// Positions of the DAG's nodes in a measure's ground set, matched by name.
#[derive(Debug, Clone)]
pub struct NodeMap {
    to_ground: Vec<usize>,
}

impl NodeMap {
    /// Requires the ground set to contain every node (extra elements allowed).
    pub fn injective(dag: &Dag, ground: &GroundSet) -> Result<Self> {
        let to_ground = dag
            .names
            .iter()
            .map(|n| {
                ground
                    .index_of(n)
                    .ok_or_else(|| Error::NodeMismatch(format!("node `{n}` is not a measure element")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { to_ground })
    }

    /// Requires nodes and ground elements to correspond one-to-one.
    pub fn bijective(dag: &Dag, ground: &GroundSet) -> Result<Self> {
        if dag.len() != ground.len() {
            return Err(Error::NodeMismatch(format!(
                "{} nodes but {} measure elements",
                dag.len(),
                ground.len()
            )));
        }
        Self::injective(dag, ground)
    }

    pub fn map(&self, nodes: BitSet) -> BitSet {
        nodes.iter().map(|v| self.to_ground[v]).collect()
    }

    /// Ground elements that are not images of nodes.
    pub fn unmapped(&self, ground: &GroundSet) -> BitSet {
        ground.all().difference(self.map(BitSet::full(self.to_ground.len())))
    }
}

pub(crate) fn local_violations<M: InfoMeasure + ?Sized>(dag: &Dag, measure: &M, map: &NodeMap, tol: f64) -> Vec<MarkovViolation> {
    let mut out = Vec::new();
    for v in 0..dag.len() {
        let pa = dag.parents(v);
        let rest = dag.non_descendants(v).difference(pa);
        if rest.is_empty() {
            continue;
        }
        let value = measure.mutual_information(map.map(BitSet::singleton(v)), map.map(rest), map.map(pa));
        if value > tol {
            out.push(MarkovViolation::Local { node: v, cmi_bits: value });
        }
    }
    out
}

/// Checks `I(v : nd(v) ∖ pa(v) | pa(v)) ≤ tol` for every node.
pub fn local_markov_holds<M: InfoMeasure + ?Sized>(dag: &Dag, measure: &M, tol: f64) -> Result<MarkovCheckResult> {
    let map = NodeMap::bijective(dag, measure.ground_set())?;
    Ok(MarkovCheckResult::from_violations(local_violations(dag, measure, &map, tol)))
}

/// Checks `I(A:B|C) ≤ tol` for every d-separated disjoint triple.
///
/// Each unordered pair `{A, B}` is visited once.
pub fn global_markov_holds<M: InfoMeasure + ?Sized>(dag: &Dag, measure: &M, tol: f64) -> Result<MarkovCheckResult> {
    if dag.len() > MAX_GLOBAL_MARKOV_NODES {
        return Err(Error::SizeGuard {
            what: "global Markov check",
            size: dag.len(),
            limit: MAX_GLOBAL_MARKOV_NODES,
        });
    }
    let map = NodeMap::bijective(dag, measure.ground_set())?;
    let mut violations = Vec::new();
    for_each_disjoint_tuple(dag.all(), 3, |t| {
        let (a, b, c) = (t[0], t[1], t[2]);
        if a.is_empty() || b.is_empty() || a > b {
            return;
        }
        if dag.reachable(a, c).is_disjoint(b) {
            let value = measure.mutual_information(map.map(a), map.map(b), map.map(c));
            if value > tol {
                violations.push(MarkovViolation::Global { a, b, c, cmi_bits: value });
            }
        }
    });
    Ok(MarkovCheckResult::from_violations(violations))
}

/// Resolves the reference set `Y` in ground-set terms: the mapped `y` nodes,
/// or every ground element that is not a node when `y` is empty.
pub fn reference_elements(obs: &ObservationGroups, map: &NodeMap, ground: &GroundSet) -> Result<(BitSet, bool)> {
    if obs.y_nodes().is_empty() {
        let external = map.unmapped(ground);
        if external.is_empty() {
            return Err(Error::NodeMismatch(
                "no reference elements: Y is neither a node set nor an extra measure element".into(),
            ));
        }
        Ok((external, false))
    } else {
        Ok((map.map(obs.y_nodes()), true))
    }
}

/// Checks the four conditions for `(dag, measure)` to be a DAG-model of the
/// observation `S ↦ observed_values[S] = I(Y:O_S)`.
///
/// The measure's ground set must contain every node. When `obs` has no `Y`
/// nodes the remaining ground elements play the role of `Y`, and the leaf
/// condition is reported as not applicable.
pub fn validate_dag_model<M: InfoMeasure + ?Sized>(
    dag: &Dag,
    measure: &M,
    obs: &ObservationGroups,
    observed_values: &BTreeMap<BitSet, f64>,
    tol: f64,
) -> Result<MarkovCheckResult> {
    let all_groups = obs.all_groups();
    for s in all_groups.subsets() {
        if !observed_values.contains_key(&s) {
            return Err(Error::MissingSubset(s));
        }
    }
    let ground = measure.ground_set();
    let map = NodeMap::injective(dag, ground)?;
    let (y, internal) = reference_elements(obs, &map, ground)?;

    let mut violations = Vec::new();
    // (i)
    for (i, &g) in obs.groups().iter().enumerate() {
        if g.is_empty() || !g.is_subset(dag.all()) {
            violations.push(MarkovViolation::Model {
                condition: ModelCondition::GroupsAreNodes,
                subject: BitSet::singleton(i),
                magnitude_bits: 0.0,
            });
        }
    }
    // (ii)
    violations.extend(local_violations(dag, measure, &map, tol));
    // (iii)
    for s in all_groups.subsets() {
        let model = measure.mutual_information(y, map.map(obs.union_of(s)), BitSet::EMPTY);
        let gap = (model - observed_values[&s]).abs();
        if gap > tol {
            violations.push(MarkovViolation::Model {
                condition: ModelCondition::ExtendsObservation,
                subject: s,
                magnitude_bits: gap,
            });
        }
    }
    // (iv)
    let mut result_na = Vec::new();
    if internal {
        for v in obs.y_nodes() {
            let out = dag.children(v);
            if !out.is_empty() {
                violations.push(MarkovViolation::Model {
                    condition: ModelCondition::LeafReference,
                    subject: BitSet::singleton(v),
                    magnitude_bits: out.len() as f64,
                });
            }
        }
    } else {
        result_na.push(ModelCondition::LeafReference);
    }
    let mut result = MarkovCheckResult::from_violations(violations);
    result.not_applicable = result_na;
    Ok(result)
}
