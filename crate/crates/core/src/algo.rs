//! Algorithmic information estimated by compressed length.
//!
//! `K(S)` for a set of strings is the compressed size, in bits, of their
//! length-prefixed concatenation in label order.

use std::sync::Arc;

use rayon::prelude::*;

use crate::bitset::BitSet;
use crate::error::{ensure_in_range, ensure_pairwise_disjoint, Error, Result};
use crate::inference::{Criterion, InferenceOptions, InferenceReport, Mode};
use crate::measure::{entropy_identity, GroundSet, InfoMeasure};
use crate::numeric::compensated_sum;

/// Fixed part of the default slack budget.
pub const BASE_SLACK_BITS: f64 = 4096.0;

/// Per-string framing allowance added to the default slack budget.
pub const PER_STRING_SLACK_BITS: f64 = 128.0;

/// Largest corpus for which [`CompressorMeasure`] tabulates all subsets.
pub const MAX_MEASURE_STRINGS: usize = 16;

pub const DEFAULT_ZSTD_LEVEL: i32 = 19;

/// A deterministic length oracle.
pub trait Compressor: Send + Sync {
    fn name(&self) -> String;
    fn compressed_len(&self, data: &[u8]) -> Result<usize>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZstdCompressor {
    pub level: i32,
}

impl Default for ZstdCompressor {
    fn default() -> Self {
        Self {
            level: DEFAULT_ZSTD_LEVEL,
        }
    }
}

impl Compressor for ZstdCompressor {
    fn name(&self) -> String {
        format!("zstd-{}", self.level)
    }

    fn compressed_len(&self, data: &[u8]) -> Result<usize> {
        zstd::bulk::compress(data, self.level)
            .map(|v| v.len())
            .map_err(|e| Error::Compressor {
                name: self.name(),
                message: e.to_string(),
            })
    }
}

/// A compressor together with its floor constant.
#[derive(Clone)]
pub struct CompressorHandle {
    inner: Arc<dyn Compressor>,
    floor_bits: f64,
}

impl std::fmt::Debug for CompressorHandle {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CompressorHandle")
            .field("name", &self.inner.name())
            .field("floor_bits", &self.floor_bits)
            .finish()
    }
}

impl CompressorHandle {
    pub fn new<C: Compressor + 'static>(compressor: C) -> Result<Self> {
        let inner: Arc<dyn Compressor> = Arc::new(compressor);
        let floor_bits = bits(inner.compressed_len(&frame(&[&[]]))?);
        Ok(Self { inner, floor_bits })
    }

    pub fn zstd() -> Self {
        Self::new(ZstdCompressor::default()).expect("in-memory zstd compression of 8 bytes cannot fail")
    }

    pub fn name(&self) -> String {
        self.inner.name()
    }

    /// `K` of a single empty string.
    pub fn floor_bits(&self) -> f64 {
        self.floor_bits
    }

    pub fn length_bits(&self, data: &[u8]) -> Result<f64> {
        self.inner.compressed_len(data).map(bits)
    }
}

fn bits(bytes: usize) -> f64 {
    8.0 * bytes as f64
}

/// Self-delimiting concatenation: each string preceded by its length as a
/// little-endian `u64`.
pub fn frame(parts: &[&[u8]]) -> Vec<u8> {
    let mut out = Vec::with_capacity(parts.iter().map(|p| p.len() + 8).sum());
    for p in parts {
        out.extend_from_slice(&(p.len() as u64).to_le_bytes());
        out.extend_from_slice(p);
    }
    out
}

/// Labelled byte strings, stored in label order.
#[derive(Debug, Clone, PartialEq)]
pub struct StringCorpus {
    strings: Vec<(String, Vec<u8>)>,
    ground: Arc<GroundSet>,
}

impl StringCorpus {
    pub fn new(mut strings: Vec<(String, Vec<u8>)>) -> Result<Self> {
        strings.sort_by(|a, b| a.0.cmp(&b.0));
        let ground = GroundSet::new(strings.iter().map(|(l, _)| l.clone()))?;
        Ok(Self { strings, ground })
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.strings.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn bytes(&self, i: usize) -> &[u8] {
        &self.strings[i].1
    }

    pub fn ground_set(&self) -> &Arc<GroundSet> {
        &self.ground
    }

    pub fn mask_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<BitSet> {
        self.ground.mask_of(labels)
    }

    fn framed(&self, s: BitSet) -> Vec<u8> {
        let parts: Vec<&[u8]> = s.iter().map(|i| self.bytes(i)).collect();
        frame(&parts)
    }
}

/// Additive constant tolerated before a compression criterion counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlackBudget {
    slack_bits: f64,
}

impl SlackBudget {
    pub fn new(slack_bits: f64) -> Result<Self> {
        if !(slack_bits >= 0.0 && slack_bits.is_finite()) {
            return Err(Error::InvalidConfig(format!("slack {slack_bits} bits is not a non-negative number")));
        }
        Ok(Self { slack_bits })
    }

    /// 4096 bits plus 128 bits per string.
    pub fn default_for(n_strings: usize) -> Self {
        Self {
            slack_bits: BASE_SLACK_BITS + PER_STRING_SLACK_BITS * n_strings as f64,
        }
    }

    pub fn bits(&self) -> f64 {
        self.slack_bits
    }
}

fn k_mask_unchecked(comp: &CompressorHandle, corpus: &StringCorpus, s: BitSet) -> Result<f64> {
    if s.is_empty() {
        return Ok(0.0);
    }
    comp.length_bits(&corpus.framed(s))
}

/// Estimated `K` of a non-empty set of strings, selected by label.
pub fn k_estimate<S: AsRef<str>>(comp: &CompressorHandle, corpus: &StringCorpus, labels: &[S]) -> Result<f64> {
    let s = corpus.mask_of(labels)?;
    if s.is_empty() {
        return Err(Error::Empty("string set"));
    }
    k_mask_unchecked(comp, corpus, s)
}

/// `K(A∪C) + K(B∪C) − K(A∪B∪C) − K(C)`, with `K(∅) = 0`.
pub fn algo_cmi<S: AsRef<str>>(
    comp: &CompressorHandle,
    corpus: &StringCorpus,
    a: &[S],
    b: &[S],
    c: &[S],
) -> Result<f64> {
    let (a, b, c) = (corpus.mask_of(a)?, corpus.mask_of(b)?, corpus.mask_of(c)?);
    ensure_pairwise_disjoint(&[a, b, c])?;
    let k = |s| k_mask_unchecked(comp, corpus, s);
    let (ac, bc, abc, kc) = (k(a.union(c))?, k(b.union(c))?, k(a.union(b).union(c))?, k(c)?);
    Ok(((ac + bc) - abc) - kc)
}

/// Information measure over a corpus with every `K` value tabulated upfront.
#[derive(Debug, Clone)]
pub struct CompressorMeasure {
    ground: Arc<GroundSet>,
    k: Vec<f64>,
}

impl CompressorMeasure {
    pub fn new(comp: &CompressorHandle, corpus: &StringCorpus) -> Result<Self> {
        if corpus.len() > MAX_MEASURE_STRINGS {
            return Err(Error::SizeGuard {
                what: "compressor measure",
                size: corpus.len(),
                limit: MAX_MEASURE_STRINGS,
            });
        }
        let masks: Vec<BitSet> = BitSet::full(corpus.len()).subsets().collect();
        let k = masks
            .par_iter()
            .map(|&s| k_mask_unchecked(comp, corpus, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            ground: corpus.ground.clone(),
            k,
        })
    }

    pub fn k(&self, s: BitSet) -> f64 {
        self.k[s.bits() as usize]
    }
}

impl InfoMeasure for CompressorMeasure {
    fn ground_set(&self) -> &Arc<GroundSet> {
        &self.ground
    }

    fn mutual_information(&self, a: BitSet, b: BitSet, c: BitSet) -> f64 {
        entropy_identity(|s| self.k(s), a, b, c)
    }
}

/// Concludes a common ancestor of `c + 1` strings when
/// `(1/c) Σ K(s_i) − K(s_1, …, s_n)` exceeds the slack budget.
pub fn infer_string_ancestors(
    comp: &CompressorHandle,
    corpus: &StringCorpus,
    c: usize,
    slack: SlackBudget,
) -> Result<InferenceReport> {
    let n = corpus.len();
    let opts = InferenceOptions {
        decision_tol: slack.bits(),
        c: Some(c),
        no_direct_influence: false,
    };
    opts.c_values(n)?;
    ensure_in_range("c", c, 1, n - 1)?;
    let singles: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| k_mask_unchecked(comp, corpus, BitSet::singleton(i)))
        .collect::<Result<_>>()?;
    let joint = k_mask_unchecked(comp, corpus, BitSet::full(n))?;
    let criterion = compensated_sum(singles.iter().copied()) / c as f64 - joint;

    let mut report = InferenceReport::new(Mode::Strings, Criterion::Compression, n, slack.bits());
    for (i, &k) in singles.iter().enumerate() {
        report.quantities.insert(format!("k_{}_bits", i + 1), k);
    }
    report.quantities.insert("k_joint_bits".into(), joint);
    report.quantities.insert("compressor_floor_bits".into(), comp.floor_bits());
    report.push(c, criterion, None, &opts);
    report.assumptions.push(format!("compressed length under {} stands in for complexity", comp.name()));
    report
        .assumptions
        .push("strings concatenated in label order with 8-byte length prefixes".into());
    Ok(report)
}
