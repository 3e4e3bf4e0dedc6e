use cainfer::bitset::BitSet;
use cainfer::dag::{Dag, ObservationGroups};
use cainfer::dist::{make_copies, JointDistribution, Overlap, VariableDecl};
use cainfer::inference::{
    ancestor_entropy_bound, epsilon_and_bound, infer_from_values, synergy_decomposition, InferenceOptions,
    ObservationValues,
};
use cainfer::measure::{audit_axioms, audit_derived, InfoMeasure};
use cainfer::oracle::{d_separated_by_paths, exact_joint, hub_net, random_bayes_net};
use proptest::prelude::*;

/// A joint table over `cards` built from raw weights; about a quarter of the
/// cells are zeroed to exercise degenerate supports.
fn joint_from_weights(cards: &[usize], weights: &[f64]) -> JointDistribution {
    let size: usize = cards.iter().product();
    let mut w: Vec<f64> = weights.iter().cycle().take(size).map(|&x| if x < 0.25 { 0.0 } else { x }).collect();
    if w.iter().all(|&x| x == 0.0) {
        w[0] = 1.0;
    }
    let total: f64 = w.iter().sum();
    let vars = cards
        .iter()
        .enumerate()
        .map(|(i, &k)| VariableDecl::new(format!("X{}", i + 1), k))
        .collect();
    JointDistribution::new(vars, w.into_iter().map(|x| x / total).collect()).unwrap()
}

fn arb_joint(max_vars: usize, max_card: usize) -> impl Strategy<Value = JointDistribution> {
    (prop::collection::vec(2..=max_card, 1..=max_vars), prop::collection::vec(0.0f64..1.0, 64))
        .prop_map(|(cards, weights)| joint_from_weights(&cards, &weights))
}

fn arb_disjoint_triple(n: usize) -> impl Strategy<Value = (BitSet, BitSet, BitSet)> {
    prop::collection::vec(0u8..4, n).prop_map(|labels| {
        let mut sets = [BitSet::EMPTY; 3];
        for (i, &l) in labels.iter().enumerate() {
            if l < 3 {
                sets[l as usize].insert(i);
            }
        }
        (sets[0], sets[1], sets[2])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cmi_symmetric_and_nonnegative(d in arb_joint(5, 3), labels in prop::collection::vec(0u8..4, 5)) {
        let n = d.num_vars();
        let mut sets = [BitSet::EMPTY; 3];
        for (i, &l) in labels.iter().take(n).enumerate() {
            if l < 3 {
                sets[l as usize].insert(i);
            }
        }
        let [a, b, c] = sets;
        let ab = d.cmi(a, b, c, Overlap::Reject).unwrap();
        let ba = d.cmi(b, a, c, Overlap::Reject).unwrap();
        prop_assert_eq!(ab.to_bits(), ba.to_bits());
        prop_assert!(ab >= -1e-12);
    }

    #[test]
    fn chain_rule_holds(d in arb_joint(4, 3), labels in prop::collection::vec(0u8..5, 4)) {
        let n = d.num_vars();
        let mut s = [BitSet::EMPTY; 4];
        for (i, &l) in labels.iter().take(n).enumerate() {
            if l < 4 {
                s[l as usize].insert(i);
            }
        }
        let [a, b, c, e] = s;
        let lhs = d.cmi(a, b.union(c), e, Overlap::Reject).unwrap();
        let rhs = d.cmi(a, b, c.union(e), Overlap::Reject).unwrap() + d.cmi(a, c, e, Overlap::Reject).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn entropy_bounded_by_log_support(d in arb_joint(4, 4)) {
        let all = d.all();
        for s in all.subsets().skip(1) {
            let h = d.entropy(s).unwrap();
            let size: usize = s.iter().map(|v| d.variables()[v].cardinality).product();
            prop_assert!(h >= 0.0);
            prop_assert!(h <= (size as f64).log2() + 1e-12);
            for t in all.difference(s) {
                prop_assert!(d.entropy(s.union(BitSet::singleton(t))).unwrap() >= h - 1e-12);
            }
        }
    }

    #[test]
    fn marginal_of_marginal(d in arb_joint(4, 3)) {
        let all = d.all();
        for s in all.subsets().skip(1) {
            let direct = d.marginal(s).unwrap();
            let via_s_entropy = direct.entropy(direct.all()).unwrap();
            prop_assert!((via_s_entropy - d.entropy(s).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn audits_pass_on_random_joints(d in arb_joint(4, 2)) {
        let m = d.measure();
        let base = audit_axioms(&m, 1e-9).unwrap();
        prop_assert!(base.passed(), "{:?}", base.worst_violation);
        let derived = audit_derived(&m, 1e-9).unwrap();
        prop_assert!(derived.passed(), "{:?}", derived.worst_violation);
    }

    #[test]
    fn redundancy_non_increasing_in_c(d in arb_joint(4, 2)) {
        let n = d.num_vars();
        prop_assume!(n >= 3);
        let groups: Vec<BitSet> = (0..n - 1).map(BitSet::singleton).collect();
        let y = BitSet::singleton(n - 1);
        let r: Vec<f64> = (1..groups.len() + 1)
            .map(|c| d.redundancy(&groups, y, c, None, Overlap::Reject).unwrap())
            .collect();
        for w in r.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn synergy_identity(d in arb_joint(5, 2), split in 1usize..4) {
        let n = d.num_vars();
        prop_assume!(n >= 2);
        let k = split.min(n - 1);
        let groups: Vec<BitSet> = (0..k).map(BitSet::singleton).collect();
        let y = BitSet::full(n).difference(BitSet::full(k));
        for c in 1..=k {
            let s = synergy_decomposition(&d, &groups, y, c).unwrap();
            prop_assert!(s.residual_bits.abs() <= 1e-9);
        }
    }

    #[test]
    fn inference_monotone_in_c(d in arb_joint(4, 2)) {
        let n = d.num_vars();
        prop_assume!(n >= 3);
        let groups: Vec<BitSet> = (0..n - 1).map(BitSet::singleton).collect();
        let y = BitSet::singleton(n - 1);
        let obs = ObservationValues::from_measure(&d.measure(), &groups, y, None, true).unwrap();
        let opts = InferenceOptions { decision_tol: 0.0, ..Default::default() };
        let report = infer_from_values(&obs, &opts).unwrap();
        for c in 1..report.largest_c {
            prop_assert!(report.result(c).unwrap().conclusion.is_positive());
        }
        let eps = epsilon_and_bound(&obs, &vec![1; n - 1]).unwrap();
        prop_assert!(eps.epsilon_bits >= -1e-12 || report.largest_c == 0);
    }

    #[test]
    fn d_separation_symmetric_and_matches_paths(seed in any::<u64>(), triple in arb_disjoint_triple(5)) {
        let net = random_bayes_net(5, 0.5, 2, seed).unwrap();
        let dag = net.dag();
        let (a, b, c) = triple;
        let fast = dag.d_separated(a, b, c).unwrap();
        prop_assert_eq!(fast, dag.d_separated(b, a, c).unwrap());
        prop_assert_eq!(fast, d_separated_by_paths(dag, a, b, c));
    }

    #[test]
    fn ancestral_closure_is_idempotent(seed in any::<u64>(), bits in 0u64..64) {
        let net = random_bayes_net(6, 0.4, 2, seed).unwrap();
        let dag = net.dag();
        let s = BitSet::from_bits(bits);
        let an = dag.ancestral_closure(s).unwrap();
        prop_assert!(s.is_subset(an));
        prop_assert_eq!(dag.ancestral_closure(an).unwrap(), an);
        for v in an {
            prop_assert!(dag.parents(v).is_subset(an));
        }
    }

    #[test]
    fn exact_joints_satisfy_global_markov(seed in any::<u64>()) {
        let net = random_bayes_net(5, 0.5, 3, seed).unwrap();
        let joint = exact_joint(&net).unwrap();
        let g = cainfer::dag::global_markov_holds(net.dag(), &joint.measure(), 1e-9).unwrap();
        prop_assert!(g.holds, "{:?}", g.violations.first());
    }

    #[test]
    fn entropy_bound_never_exceeds_hub_source(weights in prop::collection::vec(0.01f64..1.0, 2..5), n in 2usize..5) {
        let total: f64 = weights.iter().sum();
        let base = JointDistribution::new(
            vec![VariableDecl::new("B", weights.len())],
            weights.iter().map(|w| w / total).collect(),
        )
        .unwrap();
        let copies = make_copies(n, &base).unwrap();
        let source = base.entropy(BitSet::singleton(0)).unwrap();
        let groups: Vec<BitSet> = (0..n).map(BitSet::singleton).collect();
        let h: Vec<f64> = groups.iter().map(|&g| copies.entropy(g).unwrap()).collect();
        let joint = copies.entropy(copies.all()).unwrap();
        for c in 1..n {
            if let Some(b) = ancestor_entropy_bound(&h, joint, c).unwrap() {
                prop_assert!(b <= source + 1e-9);
            }
        }
    }
}

#[test]
fn hub_net_source_carries_the_bound() {
    let net = hub_net(3, 2).unwrap();
    let joint = exact_joint(&net).unwrap();
    let dag = net.dag();
    let obs = ObservationGroups::from_names(dag, &[vec!["X1"], vec!["X2"], vec!["X3"]], &[]).unwrap();
    let shared = obs
        .groups()
        .iter()
        .map(|&g| dag.ancestral_closure(g).unwrap())
        .fold(dag.all(), |acc, a| acc.intersection(a));
    assert_eq!(shared, BitSet::singleton(dag.index_of("U").unwrap()));
    assert_eq!(joint.entropy(shared).unwrap(), 1.0);
    let h: Vec<f64> = obs.groups().iter().map(|&g| joint.entropy(g).unwrap()).collect();
    let x = joint.var_set(&["X1", "X2", "X3"]).unwrap();
    assert_eq!(ancestor_entropy_bound(&h, joint.entropy(x).unwrap(), 2).unwrap(), Some(1.0));
}

#[test]
fn measure_trait_matches_distribution() {
    let d = joint_from_weights(&[2, 3, 2], &[0.3, 0.9, 0.5, 0.7, 0.1, 0.4, 0.8, 0.6]);
    let m = d.measure();
    let (a, b, c) = (BitSet::singleton(0), BitSet::singleton(1), BitSet::singleton(2));
    assert_eq!(m.mutual_information(a, b, c), d.cmi(a, b, c, Overlap::Reject).unwrap());
    let dag = Dag::new(&["X1", "X2", "X3"], &[("X1", "X2"), ("X1", "X3"), ("X2", "X3")]).unwrap();
    assert!(cainfer::dag::local_markov_holds(&dag, &m, 1e-9).unwrap().holds);
}
