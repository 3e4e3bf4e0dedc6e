//! Brute-force backend: Bayesian nets with exact joints, reference nets,
//! and exhaustive checks used to validate the fast paths.

mod verify;

pub use verify::{run_trial, verify_batch, CheckOutcome, CheckTally, TrialFailure, TrialOutcome, VerificationConfig, VerificationReport};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::bitset::BitSet;
use crate::dag::{Dag, ObservationGroups};
use crate::dist::{decode_into, table_size, JointDistribution, VariableDecl, NORMALIZATION_TOL};
use crate::error::{Error, Result};

/// `p(node | parents)`, one row per parent configuration.
///
/// Rows are indexed in mixed radix over `parents` (ascending node index,
/// last parent fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct Cpt {
    pub node: usize,
    pub parents: Vec<usize>,
    pub table: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BayesNet {
    dag: Dag,
    cpts: Vec<Cpt>,
    cards: Vec<usize>,
}

impl BayesNet {
    pub fn new(dag: Dag, cpts: Vec<Cpt>, cards: Vec<usize>) -> Result<Self> {
        let n = dag.len();
        if cpts.len() != n || cards.len() != n {
            return Err(Error::InvalidConfig(format!(
                "{n} nodes but {} tables and {} cardinalities",
                cpts.len(),
                cards.len()
            )));
        }
        if let Some(&k) = cards.iter().find(|&&k| k == 0) {
            return Err(Error::InvalidDistribution(format!("cardinality {k}")));
        }
        for (v, cpt) in cpts.iter().enumerate() {
            let name = dag.name(v);
            if cpt.node != v {
                return Err(Error::InvalidConfig(format!("table {v} is for node {}", cpt.node)));
            }
            let declared: BitSet = cpt.parents.iter().copied().collect();
            if declared != dag.parents(v) || !cpt.parents.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::InvalidConfig(format!("parent list of `{name}` does not match the graph")));
            }
            let rows: usize = cpt.parents.iter().map(|&p| cards[p]).product();
            if cpt.table.len() != rows {
                return Err(Error::InvalidDistribution(format!(
                    "`{name}` has {} rows, expected {rows}",
                    cpt.table.len()
                )));
            }
            for row in &cpt.table {
                if row.len() != cards[v] || row.iter().any(|&p| !(p >= 0.0)) {
                    return Err(Error::InvalidDistribution(format!("malformed row in the table of `{name}`")));
                }
                let total: f64 = row.iter().sum();
                if (total - 1.0).abs() > NORMALIZATION_TOL {
                    return Err(Error::InvalidDistribution(format!("a row of `{name}` sums to {total}")));
                }
            }
        }
        Ok(Self { dag, cpts, cards })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cards
    }
}

/// Conditional table of a deterministic node `x = f(parent values)`.
pub fn deterministic_cpt<F: Fn(&[usize]) -> usize>(node: usize, parents: &[usize], cards: &[usize], f: F) -> Cpt {
    let pcards: Vec<usize> = parents.iter().map(|&p| cards[p]).collect();
    let rows: usize = pcards.iter().product();
    let mut digits = vec![0; parents.len()];
    let table = (0..rows)
        .map(|r| {
            decode_into(r, &pcards, &mut digits);
            let mut row = vec![0.0; cards[node]];
            row[f(&digits)] = 1.0;
            row
        })
        .collect();
    Cpt {
        node,
        parents: parents.to_vec(),
        table,
    }
}

/// Dense joint `Π p(x_v | x_pa(v))` over all nodes, named as in the DAG.
pub fn exact_joint(net: &BayesNet) -> Result<JointDistribution> {
    let cards = &net.cards;
    let size = table_size(cards.iter().copied())?;
    let mut digits = vec![0usize; cards.len()];
    let mut probs = Vec::with_capacity(size);
    for idx in 0..size {
        decode_into(idx, cards, &mut digits);
        let mut p = 1.0;
        for cpt in &net.cpts {
            let row = cpt.parents.iter().fold(0, |r, &q| r * cards[q] + digits[q]);
            p *= cpt.table[row][digits[cpt.node]];
            if p == 0.0 {
                break;
            }
        }
        probs.push(p);
    }
    let vars = net
        .dag
        .names()
        .iter()
        .zip(cards)
        .map(|(n, &k)| VariableDecl::new(n.clone(), k))
        .collect();
    JointDistribution::new(vars, probs)
}

/// A point drawn uniformly from the probability simplex with `k` vertices.
pub fn flat_simplex<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

/// Random net on nodes `V1..Vn`; see [`random_bayes_net_with`].
pub fn random_bayes_net(n_nodes: usize, edge_prob: f64, max_card: usize, seed: u64) -> Result<BayesNet> {
    random_bayes_net_with(&mut ChaCha8Rng::seed_from_u64(seed), n_nodes, edge_prob, max_card)
}

/// Random net: a random node order, each forward edge kept with
/// probability `edge_prob`, cardinalities uniform in `2..=max_card`, and
/// every table row uniform on the simplex.
pub fn random_bayes_net_with<R: Rng + ?Sized>(
    rng: &mut R,
    n_nodes: usize,
    edge_prob: f64,
    max_card: usize,
) -> Result<BayesNet> {
    if n_nodes == 0 {
        return Err(Error::Empty("node list"));
    }
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::InvalidConfig(format!("edge probability {edge_prob} is outside [0, 1]")));
    }
    if max_card < 2 {
        return Err(Error::OutOfRange {
            what: "max cardinality",
            value: max_card as i64,
            min: 2,
            max: i64::MAX,
        });
    }
    if n_nodes > 24 {
        return Err(Error::SizeGuard {
            what: "random net nodes",
            size: n_nodes,
            limit: 24,
        });
    }
    let mut order: Vec<usize> = (0..n_nodes).collect();
    order.shuffle(rng);
    let mut parents = vec![BitSet::EMPTY; n_nodes];
    for a in 0..n_nodes {
        for b in a + 1..n_nodes {
            if rng.random::<f64>() < edge_prob {
                parents[order[b]].insert(order[a]);
            }
        }
    }
    let cards: Vec<usize> = (0..n_nodes).map(|_| rng.random_range(2..=max_card)).collect();
    table_size(cards.iter().copied())?;
    let names = (1..=n_nodes).map(|i| format!("V{i}")).collect();
    let dag = Dag::from_parents(names, parents)?;
    let cpts = (0..n_nodes)
        .map(|v| {
            let ps: Vec<usize> = dag.parents(v).iter().collect();
            let rows: usize = ps.iter().map(|&p| cards[p]).product();
            Cpt {
                node: v,
                parents: ps,
                table: (0..rows).map(|_| flat_simplex(rng, cards[v])).collect(),
            }
        })
        .collect();
    BayesNet::new(dag, cpts, cards)
}

fn uniform_root(node: usize, k: usize) -> Cpt {
    Cpt {
        node,
        parents: Vec::new(),
        table: vec![vec![1.0 / k as f64; k]],
    }
}

/// Three uniform pairwise sources `U12, U13, U23` and `X1, X2, X3`, each the
/// spin product of its two sources.
pub fn build_parity_net() -> BayesNet {
    let names = ["U12", "U13", "U23", "X1", "X2", "X3"];
    let edges = [
        ("U12", "X1"),
        ("U13", "X1"),
        ("U12", "X2"),
        ("U23", "X2"),
        ("U13", "X3"),
        ("U23", "X3"),
    ];
    let dag = Dag::new(&names, &edges).expect("static graph");
    let cards = vec![2; 6];
    // Category 1 is spin +1, so the product is +1 iff both parents agree.
    let product = |x: &[usize]| usize::from(x[0] == x[1]);
    let mut cpts: Vec<Cpt> = (0..3).map(|v| uniform_root(v, 2)).collect();
    for v in 3..6 {
        let ps: Vec<usize> = dag.parents(v).iter().collect();
        cpts.push(deterministic_cpt(v, &ps, &cards, product));
    }
    BayesNet::new(dag, cpts, cards).expect("static net")
}

/// `U → X1..Xn` where every `X_i` copies a uniform `U` with `k` values.
pub fn hub_net(n: usize, k: usize) -> Result<BayesNet> {
    if n == 0 {
        return Err(Error::Empty("copy list"));
    }
    let mut names = vec!["U".to_owned()];
    names.extend((1..=n).map(|i| format!("X{i}")));
    let edges: Vec<(usize, usize)> = (1..=n).map(|i| (0, i)).collect();
    let dag = Dag::from_edges(names, &edges)?;
    let cards = vec![k; n + 1];
    let mut cpts = vec![uniform_root(0, k)];
    cpts.extend((1..=n).map(|v| deterministic_cpt(v, &[0], &cards, |x| x[0])));
    BayesNet::new(dag, cpts, cards)
}

/// Four observations `O1..O4`, one uniform binary source per triple of
/// them. Every three observations share a source but no source reaches all
/// four. Each `O_i` records the tuple of its three sources.
pub fn triple_source_net() -> (BayesNet, ObservationGroups) {
    let triples: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    let mut names: Vec<String> = triples
        .iter()
        .map(|t| format!("L{}{}{}", t[0] + 1, t[1] + 1, t[2] + 1))
        .collect();
    names.extend((1..=4).map(|i| format!("O{i}")));
    let mut edges = Vec::new();
    for (l, t) in triples.iter().enumerate() {
        for &o in t {
            edges.push((l, 4 + o));
        }
    }
    let dag = Dag::from_edges(names, &edges).expect("static graph");
    let mut cards = vec![2; 4];
    cards.extend([8; 4]);
    let mut cpts: Vec<Cpt> = (0..4).map(|v| uniform_root(v, 2)).collect();
    for v in 4..8 {
        let ps: Vec<usize> = dag.parents(v).iter().collect();
        cpts.push(deterministic_cpt(v, &ps, &cards, |x| x[0] * 4 + x[1] * 2 + x[2]));
    }
    let groups = (4..8).map(BitSet::singleton).collect();
    let obs = ObservationGroups::new(&dag, groups, BitSet::EMPTY).expect("static groups");
    (BayesNet::new(dag, cpts, cards).expect("static net"), obs)
}

/// Eight independent roots `X1..X8` and four groups in which every pair of
/// groups shares exactly one root and no root lies in three groups.
pub fn pairwise_cover_groups() -> (Dag, Vec<BitSet>) {
    let names = (1..=8).map(|i| format!("X{i}")).collect();
    let dag = Dag::from_edges(names, &[]).expect("edgeless graph");
    // Roots 0..6 are the six pairs {12,13,14,23,24,34}; 6 and 7 are private.
    let groups = [vec![0, 1, 2, 6], vec![0, 3, 4, 7], vec![1, 3, 5], vec![2, 4, 5]]
        .into_iter()
        .map(|g| g.into_iter().collect())
        .collect();
    (dag, groups)
}

/// Every DAG on nodes `V1..Vn`, from all orientations of all node pairs.
pub fn enumerate_dags(n: usize) -> Result<Vec<Dag>> {
    if n > 6 {
        return Err(Error::SizeGuard {
            what: "DAG enumeration",
            size: n,
            limit: 6,
        });
    }
    let names: Vec<String> = (1..=n).map(|i| format!("V{i}")).collect();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let total = 3usize.pow(pairs.len() as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut rest = code;
        let mut edges = Vec::with_capacity(pairs.len());
        for &(i, j) in &pairs {
            match rest % 3 {
                1 => edges.push((i, j)),
                2 => edges.push((j, i)),
                _ => {}
            }
            rest /= 3;
        }
        if let Ok(d) = Dag::from_edges(names.clone(), &edges) {
            out.push(d);
        }
    }
    Ok(out)
}

/// All simple paths of an undirected view of the DAG, as node sequences
/// with at least two nodes.
pub fn simple_paths(dag: &Dag) -> Vec<Vec<usize>> {
    fn extend(dag: &Dag, path: &mut Vec<usize>, on_path: BitSet, out: &mut Vec<Vec<usize>>) {
        let last = *path.last().expect("non-empty path");
        let neighbours = dag.parents(last).union(dag.children(last)).difference(on_path);
        for v in neighbours {
            path.push(v);
            out.push(path.clone());
            extend(dag, path, on_path.union(BitSet::singleton(v)), out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    for s in 0..dag.len() {
        extend(dag, &mut vec![s], BitSet::singleton(s), &mut out);
    }
    out
}

/// Whether a path is active given `c`: every collider on it is in `c` or
/// has a descendant in `c`, and every other interior node is outside `c`.
pub fn path_is_active(dag: &Dag, path: &[usize], c: BitSet) -> bool {
    path.windows(3).all(|w| {
        let (prev, v, next) = (w[0], w[1], w[2]);
        let collider = dag.parents(v).contains(prev) && dag.parents(v).contains(next);
        if collider {
            c.contains(v) || !dag.descendants(v).is_disjoint(c)
        } else {
            !c.contains(v)
        }
    })
}

/// For each node `u`, the nodes joined to `u` by an active path given `c`.
pub fn active_pairs_by_paths(dag: &Dag, paths: &[Vec<usize>], c: BitSet) -> Vec<BitSet> {
    let mut out = vec![BitSet::EMPTY; dag.len()];
    for p in paths {
        let (s, t) = (p[0], p[p.len() - 1]);
        if !c.contains(s) && !c.contains(t) && path_is_active(dag, p, c) {
            out[s].insert(t);
        }
    }
    out
}

/// d-separation by explicit path enumeration.
pub fn d_separated_by_paths(dag: &Dag, a: BitSet, b: BitSet, c: BitSet) -> bool {
    let active = active_pairs_by_paths(dag, &simple_paths(dag), c);
    a.iter().all(|u| active[u].is_disjoint(b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::{ancestor_multiplicities, local_markov_holds};
    use crate::dist::{make_copies, make_parity};

    #[test]
    fn dag_counts() {
        let counts: Vec<usize> = (1..=4).map(|n| enumerate_dags(n).unwrap().len()).collect();
        assert_eq!(counts, vec![1, 3, 25, 543]);
    }

    #[test]
    fn parity_net_marginal_and_multiplicity() {
        let net = build_parity_net();
        let joint = exact_joint(&net).unwrap();
        let x = joint.var_set(&["X1", "X2", "X3"]).unwrap();
        let marg = joint.marginal(x).unwrap();
        assert!(marg.l1_distance(&make_parity(3, f64::INFINITY).unwrap()).unwrap() < 1e-12);
        assert!(local_markov_holds(net.dag(), &joint.measure(), 1e-9).unwrap().holds);
        let obs = ObservationGroups::from_names(net.dag(), &[vec!["X1"], vec!["X2"], vec!["X3"]], &[]).unwrap();
        assert_eq!(ancestor_multiplicities(net.dag(), &obs), vec![2, 2, 2]);
    }

    #[test]
    fn hub_net_matches_copies() {
        let net = hub_net(3, 2).unwrap();
        let joint = exact_joint(&net).unwrap();
        let marg = joint.marginal(joint.var_set(&["X1", "X2", "X3"]).unwrap()).unwrap();
        let coin = JointDistribution::new(vec![VariableDecl::new("B", 2)], vec![0.5, 0.5]).unwrap();
        assert_eq!(marg.probs(), make_copies(3, &coin).unwrap().probs());
    }

    #[test]
    fn random_net_is_seed_deterministic() {
        let a = random_bayes_net(5, 0.5, 3, 9).unwrap();
        let b = random_bayes_net(5, 0.5, 3, 9).unwrap();
        assert_eq!(a, b);
        let empty = random_bayes_net(4, 0.0, 2, 1).unwrap();
        assert!(empty.dag().edges().is_empty());
        let joint = exact_joint(&empty).unwrap();
        assert!(joint.multi_information(&(0..4).map(BitSet::singleton).collect::<Vec<_>>(), 1).unwrap().abs() < 1e-9);
        let full = random_bayes_net(3, 1.0, 2, 1).unwrap();
        assert_eq!(full.dag().edges().len(), 3);
        assert!(local_markov_holds(full.dag(), &exact_joint(&full).unwrap().measure(), 1e-9).unwrap().holds);
    }

    #[test]
    fn random_net_guards() {
        assert!(random_bayes_net(0, 0.5, 2, 0).is_err());
        assert!(random_bayes_net(3, 1.5, 2, 0).is_err());
        assert!(random_bayes_net(3, 0.5, 1, 0).is_err());
        assert!(random_bayes_net(30, 0.5, 2, 0).is_err());
    }

    #[test]
    fn net_validation() {
        let dag = Dag::new(&["a", "b"], &[("a", "b")]).unwrap();
        let root = uniform_root(0, 2);
        let bad_parents = Cpt {
            node: 1,
            parents: vec![],
            table: vec![vec![0.5, 0.5]],
        };
        assert!(BayesNet::new(dag.clone(), vec![root.clone(), bad_parents], vec![2, 2]).is_err());
        let bad_row = Cpt {
            node: 1,
            parents: vec![0],
            table: vec![vec![0.5, 0.6], vec![1.0, 0.0]],
        };
        assert!(BayesNet::new(dag, vec![root, bad_row], vec![2, 2]).is_err());
    }

    #[test]
    fn chain_of_copies_is_constant_across_nodes() {
        let dag = Dag::new(&["a", "b", "c"], &[("a", "b"), ("b", "c")]).unwrap();
        let cards = vec![3; 3];
        let cpts = vec![
            Cpt {
                node: 0,
                parents: vec![],
                table: vec![vec![0.2, 0.3, 0.5]],
            },
            deterministic_cpt(1, &[0], &cards, |x| x[0]),
            deterministic_cpt(2, &[1], &cards, |x| x[0]),
        ];
        let joint = exact_joint(&BayesNet::new(dag, cpts, cards).unwrap()).unwrap();
        assert_eq!(joint.prob(&[2, 2, 2]), 0.5);
        assert_eq!(joint.prob(&[2, 1, 2]), 0.0);
    }

    #[test]
    fn triple_source_multiplicities() {
        let (net, obs) = triple_source_net();
        assert_eq!(ancestor_multiplicities(net.dag(), &obs), vec![3; 4]);
        let (dag, groups) = pairwise_cover_groups();
        let obs = ObservationGroups::new(&dag, groups, BitSet::EMPTY).unwrap();
        assert_eq!(ancestor_multiplicities(&dag, &obs), vec![2; 4]);
    }

    #[test]
    fn path_oracle_on_collider() {
        let dag = Dag::new(&["x", "y", "z"], &[("x", "y"), ("z", "y")]).unwrap();
        let (x, y, z) = (BitSet::singleton(0), BitSet::singleton(1), BitSet::singleton(2));
        assert!(d_separated_by_paths(&dag, x, z, BitSet::EMPTY));
        assert!(!d_separated_by_paths(&dag, x, z, y));
    }
}
