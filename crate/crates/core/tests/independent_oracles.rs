//! Cross-checks against deliberately naive reimplementations.

use std::collections::HashMap;

use cainfer::bitset::BitSet;
use cainfer::dag::{global_markov_holds, local_markov_holds, Dag};
use cainfer::dist::{from_samples, JointDistribution, Overlap, SampleTable, VariableDecl};
use cainfer::oracle::{enumerate_dags, exact_joint, random_bayes_net, BayesNet, Cpt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Entropy by grouping explicit assignment tuples in a hash map.
fn naive_entropy(d: &JointDistribution, s: BitSet) -> f64 {
    let cards = d.cardinalities();
    let mut acc: HashMap<Vec<usize>, f64> = HashMap::new();
    for (idx, &p) in d.probs().iter().enumerate() {
        let mut rest = idx;
        let mut digits = vec![0; cards.len()];
        for v in (0..cards.len()).rev() {
            digits[v] = rest % cards[v];
            rest /= cards[v];
        }
        let key: Vec<usize> = s.iter().map(|v| digits[v]).collect();
        *acc.entry(key).or_default() += p;
    }
    acc.values().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum()
}

/// d-separation via the moral graph of the ancestral set of `a ∪ b ∪ c`.
fn moral_separated(dag: &Dag, a: BitSet, b: BitSet, c: BitSet) -> bool {
    let keep = dag.ancestral_closure(a.union(b).union(c)).unwrap();
    let n = dag.len();
    let mut adj = vec![BitSet::EMPTY; n];
    for v in keep {
        let ps: Vec<usize> = dag.parents(v).iter().collect();
        for &p in &ps {
            adj[v].insert(p);
            adj[p].insert(v);
        }
        for (i, &p) in ps.iter().enumerate() {
            for &q in &ps[i + 1..] {
                adj[p].insert(q);
                adj[q].insert(p);
            }
        }
    }
    let mut seen = a;
    let mut stack: Vec<usize> = a.iter().collect();
    while let Some(v) = stack.pop() {
        for u in adj[v].intersection(keep).difference(c).difference(seen) {
            seen.insert(u);
            stack.push(u);
        }
    }
    seen.is_disjoint(b)
}

fn random_joint(rng: &mut ChaCha8Rng, n: usize) -> JointDistribution {
    let vars = (1..=n).map(|i| VariableDecl::new(format!("V{i}"), 2)).collect();
    let w: Vec<f64> = (0..1 << n).map(|_| rng.random::<f64>() + 0.01).collect();
    let total: f64 = w.iter().sum();
    JointDistribution::new(vars, w.into_iter().map(|x| x / total).collect()).unwrap()
}

#[test]
fn entropy_matches_naive_grouping() {
    for seed in 0..20 {
        let net = random_bayes_net(4, 0.5, 3, seed).unwrap();
        let d = exact_joint(&net).unwrap();
        for s in d.all().subsets().skip(1) {
            let fast = d.entropy(s).unwrap();
            assert!((fast - naive_entropy(&d, s)).abs() < 1e-12, "seed {seed}, set {s:?}");
        }
    }
}

#[test]
fn cmi_matches_naive_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let d = random_joint(&mut rng, 4);
    let (a, b, c) = (BitSet::singleton(0), BitSet::from_bits(0b0110), BitSet::singleton(3));
    let h = |s| naive_entropy(&d, s);
    let naive = h(a.union(c)) + h(b.union(c)) - h(a.union(b).union(c)) - h(c);
    assert!((d.cmi(a, b, c, Overlap::Reject).unwrap() - naive).abs() < 1e-12);
}

#[test]
fn bayes_ball_matches_moralization_on_all_four_node_dags() {
    for dag in enumerate_dags(4).unwrap() {
        let mut checked = 0;
        cainfer::measure::for_each_disjoint_tuple(dag.all(), 3, |t| {
            if t[0].is_empty() || t[1].is_empty() {
                return;
            }
            assert_eq!(
                dag.d_separated(t[0], t[1], t[2]).unwrap(),
                moral_separated(&dag, t[0], t[1], t[2]),
                "{:?} {t:?}",
                dag.edges()
            );
            checked += 1;
        });
        assert!(checked > 0);
    }
}

#[test]
fn local_and_global_markov_agree_on_arbitrary_joints() {
    // A generic joint satisfies the Markov conditions of complete DAGs only;
    // the two conditions must agree on every DAG either way.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for dag in enumerate_dags(3).unwrap() {
        let d = random_joint(&mut rng, 3);
        let m = d.measure();
        let local = local_markov_holds(&dag, &m, 1e-9).unwrap().holds;
        let global = global_markov_holds(&dag, &m, 1e-9).unwrap().holds;
        assert_eq!(local, global, "{:?}", dag.edges());
        assert_eq!(local, dag.edges().len() == 3);
    }
}

#[test]
fn local_and_global_markov_agree_across_graphs() {
    // Joints generated from one DAG, tested against every DAG on the same nodes.
    let dags = enumerate_dags(4).unwrap();
    for seed in 0..3u64 {
        let net = random_bayes_net(4, 0.5, 2, seed).unwrap();
        let d = exact_joint(&net).unwrap();
        let renamed = JointDistribution::new(
            (1..=4).map(|i| VariableDecl::new(format!("V{i}"), 2)).collect(),
            d.probs().to_vec(),
        )
        .unwrap();
        let m = renamed.measure();
        for dag in &dags {
            let local = local_markov_holds(dag, &m, 1e-9).unwrap().holds;
            let global = global_markov_holds(dag, &m, 1e-9).unwrap().holds;
            assert_eq!(local, global, "seed {seed}, {:?}", dag.edges());
        }
    }
}

#[test]
fn sampling_a_known_table_recovers_it() {
    // Rows laid out exactly in proportion to the table.
    let vars = vec![VariableDecl::new("a", 2), VariableDecl::new("b", 3)];
    let counts = [1usize, 2, 3, 0, 2, 2];
    let mut rows = Vec::new();
    for (idx, &k) in counts.iter().enumerate() {
        rows.extend(std::iter::repeat_n(vec![idx / 3, idx % 3], k));
    }
    let d = from_samples(&SampleTable::new(vars, rows).unwrap()).unwrap();
    let expected: Vec<f64> = counts.iter().map(|&k| k as f64 / 10.0).collect();
    assert_eq!(d.probs(), expected.as_slice());
}

#[test]
fn hand_built_net_product() {
    let dag = Dag::new(&["a", "b"], &[("a", "b")]).unwrap();
    let net = BayesNet::new(
        dag,
        vec![
            Cpt {
                node: 0,
                parents: vec![],
                table: vec![vec![0.25, 0.75]],
            },
            Cpt {
                node: 1,
                parents: vec![0],
                table: vec![vec![0.5, 0.5], vec![0.1, 0.9]],
            },
        ],
        vec![2, 2],
    )
    .unwrap();
    let d = exact_joint(&net).unwrap();
    let expected = [0.125, 0.125, 0.075, 0.675];
    for (p, q) in d.probs().iter().zip(expected) {
        assert!((p - q).abs() < 1e-15);
    }
}
