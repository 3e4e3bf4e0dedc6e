//! Abstract conditional mutual information and axiom audits.
//!
//! An [`InfoMeasure`] is any function `I(A:B|C)` over pairwise-disjoint
//! subsets of a finite ground set that satisfies
//!
//! * normalization: `I(A:∅|C) = 0`
//! * non-negativity: `I(A:B|C) ≥ 0`
//! * symmetry: `I(A:B|C) = I(B:A|C)`
//! * chain rule: `I(A:B∪C|D) = I(A:B|C∪D) + I(A:C|D)`
//!
//! Shannon conditional mutual information is the main instance
//! ([`crate::dist::DiscreteMeasure`]); compressed-length algorithmic mutual
//! information ([`crate::algo::CompressorMeasure`]) satisfies the axioms up to
//! a declared slack. [`audit_axioms`] and [`audit_derived`] check a concrete
//! measure against the axioms and their standard consequences (data
//! processing, conditioning on independent sets, semi-graphoid closure).
//!
//! All quantities are in bits.

use std::sync::Arc;

use serde::Serialize;

use crate::bitset::{BitSet, MAX_INDICES};
use crate::error::{ensure_pairwise_disjoint, Error, Result};

/// Default tolerance for table-backed measures, in bits.
pub const DEFAULT_TOL_BITS: f64 = 1e-9;

/// Largest ground set accepted by the exhaustive audits.
pub const MAX_AUDIT_ELEMENTS: usize = 12;

/// Ordered, named, finite set of elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundSet {
    elements: Vec<String>,
}

impl GroundSet {
    pub fn new<I, S>(names: I) -> Result<Arc<Self>>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let elements: Vec<String> = names.into_iter().map(Into::into).collect();
        if elements.len() > MAX_INDICES {
            return Err(Error::SizeGuard {
                what: "ground set",
                size: elements.len(),
                limit: MAX_INDICES,
            });
        }
        for (i, name) in elements.iter().enumerate() {
            if name.is_empty() {
                return Err(Error::EmptyName);
            }
            if elements[..i].contains(name) {
                return Err(Error::DuplicateName(name.clone()));
            }
        }
        Ok(Arc::new(Self { elements }))
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn name(&self, index: usize) -> &str {
        &self.elements[index]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == name)
    }

    /// All elements as a mask.
    pub fn all(&self) -> BitSet {
        BitSet::full(self.len())
    }

    /// Resolves names to a mask.
    pub fn mask_of<S: AsRef<str>>(&self, names: &[S]) -> Result<BitSet> {
        names
            .iter()
            .map(|n| {
                self.index_of(n.as_ref())
                    .ok_or_else(|| Error::UnknownName(n.as_ref().to_owned()))
            })
            .collect()
    }

    pub fn names_of(&self, mask: BitSet) -> Vec<&str> {
        mask.iter().map(|i| self.name(i)).collect()
    }
}

/// A subset of a particular ground set.
#[derive(Debug, Clone)]
pub struct ElementSubset {
    ground: Arc<GroundSet>,
    members: BitSet,
}

impl ElementSubset {
    pub fn empty(ground: &Arc<GroundSet>) -> Self {
        Self {
            ground: Arc::clone(ground),
            members: BitSet::EMPTY,
        }
    }

    pub fn from_names<S: AsRef<str>>(ground: &Arc<GroundSet>, names: &[S]) -> Result<Self> {
        Ok(Self {
            ground: Arc::clone(ground),
            members: ground.mask_of(names)?,
        })
    }

    pub fn from_mask(ground: &Arc<GroundSet>, members: BitSet) -> Result<Self> {
        if !members.is_subset(ground.all()) {
            return Err(Error::IndexOutOfRange {
                index: members.span() - 1,
                len: ground.len(),
            });
        }
        Ok(Self {
            ground: Arc::clone(ground),
            members,
        })
    }

    pub fn ground(&self) -> &Arc<GroundSet> {
        &self.ground
    }

    pub fn members(&self) -> BitSet {
        self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// A measure of conditional mutual information on a ground set.
///
/// Implementations evaluate `I(A:B|C)` on masks that the caller has already
/// validated (in range, pairwise disjoint); use [`cmi`] or [`cmi_masks`] for
/// checked evaluation. Evaluation must be deterministic and free of
/// observable side effects.
pub trait InfoMeasure: Sync {
    fn ground_set(&self) -> &Arc<GroundSet>;

    fn mutual_information(&self, a: BitSet, b: BitSet, c: BitSet) -> f64;
}

impl<M: InfoMeasure + ?Sized> InfoMeasure for &M {
    fn ground_set(&self) -> &Arc<GroundSet> {
        (**self).ground_set()
    }

    fn mutual_information(&self, a: BitSet, b: BitSet, c: BitSet) -> f64 {
        (**self).mutual_information(a, b, c)
    }
}

/// `h(A∪C) + h(B∪C) − h(A∪B∪C) − h(C)` for a set function `h`.
///
/// The first two terms are added before anything else, so swapping `a` and
/// `b` yields a bitwise-identical result.
#[inline]
pub fn entropy_identity<H: Fn(BitSet) -> f64>(h: H, a: BitSet, b: BitSet, c: BitSet) -> f64 {
    let ac = h(a.union(c));
    let bc = h(b.union(c));
    let abc = h(a.union(b).union(c));
    let hc = h(c);
    ((ac + bc) - abc) - hc
}

/// Checked `I(A:B|C)`.
pub fn cmi<M: InfoMeasure + ?Sized>(
    measure: &M,
    a: &ElementSubset,
    b: &ElementSubset,
    c: &ElementSubset,
) -> Result<f64> {
    let ground = measure.ground_set();
    for s in [a, b, c] {
        if !Arc::ptr_eq(ground, &s.ground) && **ground != *s.ground {
            return Err(Error::ForeignElement);
        }
    }
    cmi_masks(measure, a.members, b.members, c.members)
}

/// Checked `I(A:B|C)` on raw masks of the measure's ground set.
pub fn cmi_masks<M: InfoMeasure + ?Sized>(measure: &M, a: BitSet, b: BitSet, c: BitSet) -> Result<f64> {
    let all = measure.ground_set().all();
    for s in [a, b, c] {
        if !s.is_subset(all) {
            return Err(Error::IndexOutOfRange {
                index: s.span() - 1,
                len: measure.ground_set().len(),
            });
        }
    }
    ensure_pairwise_disjoint(&[a, b, c])?;
    Ok(measure.mutual_information(a, b, c))
}

/// `|I(A:B|C)| ≤ tol`.
pub fn is_independent<M: InfoMeasure + ?Sized>(
    measure: &M,
    a: &ElementSubset,
    b: &ElementSubset,
    c: &ElementSubset,
    tol: f64,
) -> Result<bool> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance must be >= 0, got {tol}")));
    }
    Ok(cmi(measure, a, b, c)?.abs() <= tol)
}

/// Identity of the law an audited instance violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axiom {
    Normalization,
    NonNegativity,
    Symmetry,
    ChainRule,
    /// `I(A:C|B) = 0 ⇒ I(A:B) ≥ I(A:C)`.
    DataProcessing,
    /// `I(A:C|B) = 0 ⇒ I(Y:A|B) ≤ I(Y:A|B,C)`.
    ConditioningIncrease,
    /// `I(Y:A|B,C) − I(Y:A|B) = I(A:C|B,Y) − I(A:C|B)` (holds unconditionally).
    ConditioningDifference,
    SemiGraphoidSymmetry,
    SemiGraphoidDecomposition,
    SemiGraphoidWeakUnion,
    SemiGraphoidContraction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomViolation {
    pub axiom: Axiom,
    /// Argument sets in the order of the law's statement.
    pub arguments: Vec<BitSet>,
    /// Amount by which the law is violated, in bits.
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AxiomAuditReport {
    /// Number of argument tuples evaluated.
    pub checked_triples: usize,
    pub worst_violation: f64,
    pub violations: Vec<AxiomViolation>,
}

impl AxiomAuditReport {
    fn new() -> Self {
        Self {
            checked_triples: 0,
            worst_violation: 0.0,
            violations: Vec::new(),
        }
    }

    fn record(&mut self, axiom: Axiom, arguments: &[BitSet], magnitude: f64, tol: f64) {
        if magnitude > tol {
            self.worst_violation = self.worst_violation.max(magnitude);
            self.violations.push(AxiomViolation {
                axiom,
                arguments: arguments.to_vec(),
                magnitude,
            });
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count(&self, axiom: Axiom) -> usize {
        self.violations.iter().filter(|v| v.axiom == axiom).count()
    }
}

/// Calls `f` on every `k`-tuple of pairwise-disjoint subsets of `universe`.
///
/// Tuples are produced in lexicographic order of their bitmasks (first
/// component slowest).
pub fn for_each_disjoint_tuple<F: FnMut(&[BitSet])>(universe: BitSet, k: usize, mut f: F) {
    fn recurse<F: FnMut(&[BitSet])>(free: BitSet, slots: &mut [BitSet], depth: usize, f: &mut F) {
        if depth == slots.len() {
            f(slots);
            return;
        }
        for s in free.subsets() {
            slots[depth] = s;
            recurse(free.difference(s), slots, depth + 1, f);
        }
    }
    let mut slots = vec![BitSet::EMPTY; k];
    recurse(universe, &mut slots, 0, &mut f);
}

fn ensure_auditable(ground: &GroundSet) -> Result<()> {
    if ground.len() > MAX_AUDIT_ELEMENTS {
        return Err(Error::SizeGuard {
            what: "exhaustive audit ground set",
            size: ground.len(),
            limit: MAX_AUDIT_ELEMENTS,
        });
    }
    Ok(())
}

fn ensure_tol(tol: f64) -> Result<()> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidConfig(format!("tolerance must be >= 0, got {tol}")));
    }
    Ok(())
}

/// Exhaustively checks the four defining axioms.
///
/// * normalization on every disjoint `(A, C)`;
/// * non-negativity on every disjoint `(A, B, C)` with `A, B ≠ ∅`;
/// * symmetry on the same triples, once per unordered `{A, B}`;
/// * chain rule on every disjoint `(A, B, C, D)` with `A, B, C ≠ ∅`.
pub fn audit_axioms<M: InfoMeasure + ?Sized>(measure: &M, tol: f64) -> Result<AxiomAuditReport> {
    ensure_tol(tol)?;
    let ground = measure.ground_set();
    ensure_auditable(ground)?;
    let all = ground.all();
    let mut report = AxiomAuditReport::new();
    let m = |a, b, c| measure.mutual_information(a, b, c);

    for_each_disjoint_tuple(all, 2, |t| {
        let (a, c) = (t[0], t[1]);
        report.checked_triples += 1;
        report.record(Axiom::Normalization, &[a, BitSet::EMPTY, c], m(a, BitSet::EMPTY, c).abs(), tol);
    });

    for_each_disjoint_tuple(all, 3, |t| {
        let (a, b, c) = (t[0], t[1], t[2]);
        if a.is_empty() || b.is_empty() {
            return;
        }
        report.checked_triples += 1;
        let ab = m(a, b, c);
        report.record(Axiom::NonNegativity, t, -ab, tol);
        if a < b {
            report.record(Axiom::Symmetry, t, (ab - m(b, a, c)).abs(), tol);
        }
    });

    for_each_disjoint_tuple(all, 4, |t| {
        check_chain_rule(&m, t, tol, &mut report);
    });

    Ok(report)
}

fn check_chain_rule<F: Fn(BitSet, BitSet, BitSet) -> f64>(
    m: &F,
    t: &[BitSet],
    tol: f64,
    report: &mut AxiomAuditReport,
) {
    let (a, b, c, d) = (t[0], t[1], t[2], t[3]);
    if a.is_empty() || b.is_empty() || c.is_empty() {
        return;
    }
    report.checked_triples += 1;
    let lhs = m(a, b.union(c), d);
    let rhs = m(a, b, c.union(d)) + m(a, c, d);
    report.record(Axiom::ChainRule, t, (lhs - rhs).abs(), tol);
}

/// Axiom checks on caller-chosen quadruples `(A, B, C, D)`.
///
/// For each tuple this evaluates normalization on `(A, ∅, D)`,
/// non-negativity and symmetry on `(A, B, D)` and `(A, C, D)`, and the chain
/// rule on the whole tuple. Used when the ground set is too large to
/// enumerate.
pub fn audit_axioms_sampled<M: InfoMeasure + ?Sized>(
    measure: &M,
    tuples: &[[BitSet; 4]],
    tol: f64,
) -> Result<AxiomAuditReport> {
    ensure_tol(tol)?;
    let all = measure.ground_set().all();
    let m = |a, b, c| measure.mutual_information(a, b, c);
    let mut report = AxiomAuditReport::new();
    for t in tuples {
        for &s in t {
            if !s.is_subset(all) {
                return Err(Error::IndexOutOfRange {
                    index: s.span() - 1,
                    len: measure.ground_set().len(),
                });
            }
        }
        ensure_pairwise_disjoint(t)?;
        let [a, b, c, d] = *t;
        report.checked_triples += 1;
        report.record(Axiom::Normalization, &[a, BitSet::EMPTY, d], m(a, BitSet::EMPTY, d).abs(), tol);
        for x in [b, c] {
            if a.is_empty() || x.is_empty() {
                continue;
            }
            let v = m(a, x, d);
            report.record(Axiom::NonNegativity, &[a, x, d], -v, tol);
            report.record(Axiom::Symmetry, &[a, x, d], (v - m(x, a, d)).abs(), tol);
        }
        check_chain_rule(&m, t, tol, &mut report);
    }
    Ok(report)
}

/// Exhaustively checks consequences of the axioms.
///
/// * data processing: `I(A:C|B) ≤ tol ⇒ I(A:B) ≥ I(A:C) − tol`;
/// * conditioning on independent sets: `I(A:C|B) ≤ tol ⇒
///   I(Y:A|B) ≤ I(Y:A|B,C) + tol` for every disjoint non-empty `Y`;
/// * the exact conditioning difference
///   `I(Y:A|B,C) − I(Y:A|B) = I(A:C|B,Y) − I(A:C|B)`;
/// * the semi-graphoid implications (symmetry, decomposition, weak union,
///   contraction), with "independent" meaning `I ≤ tol`.
pub fn audit_derived<M: InfoMeasure + ?Sized>(measure: &M, tol: f64) -> Result<AxiomAuditReport> {
    ensure_tol(tol)?;
    let ground = measure.ground_set();
    ensure_auditable(ground)?;
    let all = ground.all();
    let m = |a, b, c| measure.mutual_information(a, b, c);
    let indep = |a, b, c| m(a, b, c) <= tol;
    let mut report = AxiomAuditReport::new();
    let e = BitSet::EMPTY;

    // (A, B, C, Y): Lemma-style properties. Y = ∅ is skipped for the
    // conditioning checks, where it is vacuous.
    for_each_disjoint_tuple(all, 4, |t| {
        let (a, b, c, y) = (t[0], t[1], t[2], t[3]);
        if a.is_empty() || c.is_empty() {
            return;
        }
        report.checked_triples += 1;
        let acb = m(a, c, b);
        if y.is_empty() {
            if acb <= tol {
                let deficit = m(a, c, e) - m(a, b, e);
                report.record(Axiom::DataProcessing, &[a, b, c], deficit, tol);
            }
            return;
        }
        let with_c = m(y, a, b.union(c));
        let without_c = m(y, a, b);
        if acb <= tol {
            report.record(Axiom::ConditioningIncrease, t, without_c - with_c, tol);
        }
        let identity = (with_c - without_c) - (m(a, c, b.union(y)) - acb);
        report.record(Axiom::ConditioningDifference, t, identity.abs(), tol);
    });

    // (X, Y, W, Z): semi-graphoid closure.
    for_each_disjoint_tuple(all, 4, |t| {
        let (x, y, w, z) = (t[0], t[1], t[2], t[3]);
        if x.is_empty() || y.is_empty() {
            return;
        }
        report.checked_triples += 1;
        if w.is_empty() {
            if indep(x, y, z) {
                report.record(Axiom::SemiGraphoidSymmetry, &[x, y, z], m(y, x, z), tol);
            }
            return;
        }
        if indep(x, y.union(w), z) {
            report.record(Axiom::SemiGraphoidDecomposition, &[x, y, w, z], m(x, y, z), tol);
            report.record(Axiom::SemiGraphoidDecomposition, &[x, w, y, z], m(x, w, z), tol);
            report.record(Axiom::SemiGraphoidWeakUnion, &[x, y, w, z], m(x, y, z.union(w)), tol);
        }
        if indep(x, w, z.union(y)) && indep(x, y, z) {
            report.record(Axiom::SemiGraphoidContraction, &[x, y, w, z], m(x, w.union(y), z), tol);
        }
    });

    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Entropy of a set of independent fair bits plus an exact copy relation
    /// between elements 0 and 1: h(S) = |S| − [0,1 ∈ S].
    struct CopyPair {
        ground: Arc<GroundSet>,
    }

    impl InfoMeasure for CopyPair {
        fn ground_set(&self) -> &Arc<GroundSet> {
            &self.ground
        }
        fn mutual_information(&self, a: BitSet, b: BitSet, c: BitSet) -> f64 {
            let h = |s: BitSet| s.len() as f64 - if s.contains(0) && s.contains(1) { 1.0 } else { 0.0 };
            entropy_identity(h, a, b, c)
        }
    }

    fn copy_pair() -> CopyPair {
        CopyPair {
            ground: GroundSet::new(["X", "Y", "Z"]).unwrap(),
        }
    }

    #[test]
    fn ground_set_rejects_bad_names() {
        assert_eq!(GroundSet::new(["a", "a"]).unwrap_err(), Error::DuplicateName("a".into()));
        assert_eq!(GroundSet::new(["a", ""]).unwrap_err(), Error::EmptyName);
        let g = GroundSet::new(["a", "b"]).unwrap();
        assert_eq!(g.mask_of(&["c"]).unwrap_err(), Error::UnknownName("c".into()));
    }

    #[test]
    fn cmi_checks_disjointness_and_ground() {
        let m = copy_pair();
        let g = m.ground_set().clone();
        let x = ElementSubset::from_names(&g, &["X"]).unwrap();
        let y = ElementSubset::from_names(&g, &["Y"]).unwrap();
        let xy = ElementSubset::from_names(&g, &["X", "Y"]).unwrap();
        let none = ElementSubset::empty(&g);
        assert_eq!(cmi(&m, &x, &y, &none).unwrap(), 1.0);
        assert!(matches!(cmi(&m, &x, &xy, &none), Err(Error::Overlap { .. })));

        let other = GroundSet::new(["P", "Q", "R"]).unwrap();
        let foreign = ElementSubset::from_names(&other, &["P"]).unwrap();
        assert_eq!(cmi(&m, &foreign, &y, &none).unwrap_err(), Error::ForeignElement);

        // A structurally equal ground set is accepted.
        let twin = GroundSet::new(["X", "Y", "Z"]).unwrap();
        let x2 = ElementSubset::from_names(&twin, &["X"]).unwrap();
        assert_eq!(cmi(&m, &x2, &y, &none).unwrap(), 1.0);
    }

    #[test]
    fn independence_predicate() {
        let m = copy_pair();
        let g = m.ground_set().clone();
        let x = ElementSubset::from_names(&g, &["X"]).unwrap();
        let y = ElementSubset::from_names(&g, &["Y"]).unwrap();
        let z = ElementSubset::from_names(&g, &["Z"]).unwrap();
        let none = ElementSubset::empty(&g);
        assert!(!is_independent(&m, &x, &y, &none, 1e-9).unwrap());
        assert!(is_independent(&m, &x, &z, &none, 1e-9).unwrap());
        assert!(is_independent(&m, &x, &z, &y, 1e-9).unwrap());
        assert!(is_independent(&m, &x, &y, &none, -1.0).is_err());
    }

    #[test]
    fn tuple_enumeration_counts() {
        // (k + 1)^n assignments of n elements to k slots or none.
        let mut count = 0;
        for_each_disjoint_tuple(BitSet::full(4), 3, |t| {
            assert!(t[0].is_disjoint(t[1]) && t[0].is_disjoint(t[2]) && t[1].is_disjoint(t[2]));
            count += 1;
        });
        assert_eq!(count, 4usize.pow(4));
    }

    #[test]
    fn audits_pass_on_valid_measure() {
        let m = copy_pair();
        let axioms = audit_axioms(&m, 1e-12).unwrap();
        assert!(axioms.passed(), "{:?}", axioms.violations);
        assert!(axioms.checked_triples > 0);
        assert_eq!(axioms.worst_violation, 0.0);
        let derived = audit_derived(&m, 1e-12).unwrap();
        assert!(derived.passed(), "{:?}", derived.violations);
    }

    #[test]
    fn audit_guard_rejects_large_ground_sets() {
        struct Zero(Arc<GroundSet>);
        impl InfoMeasure for Zero {
            fn ground_set(&self) -> &Arc<GroundSet> {
                &self.0
            }
            fn mutual_information(&self, _: BitSet, _: BitSet, _: BitSet) -> f64 {
                0.0
            }
        }
        let names: Vec<String> = (0..13).map(|i| format!("e{i}")).collect();
        let m = Zero(GroundSet::new(names).unwrap());
        assert!(matches!(audit_axioms(&m, 1e-9), Err(Error::SizeGuard { .. })));
        assert!(matches!(audit_derived(&m, 1e-9), Err(Error::SizeGuard { .. })));
        // Sampled audits have no size guard.
        let t = [BitSet::singleton(0), BitSet::singleton(1), BitSet::singleton(12), BitSet::EMPTY];
        assert!(audit_axioms_sampled(&m, &[t], 1e-9).unwrap().passed());
        let bad = [BitSet::singleton(0), BitSet::singleton(0), BitSet::EMPTY, BitSet::EMPTY];
        assert!(matches!(audit_axioms_sampled(&m, &[bad], 1e-9), Err(Error::Overlap { .. })));
    }
}
