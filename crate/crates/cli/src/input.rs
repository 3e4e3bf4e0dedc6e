//! File formats read by the command line.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use cainfer::bitset::BitSet;
use cainfer::dag::{Dag, ObservationGroups};
use cainfer::dist::{from_samples, JointDistribution, SampleTable, VariableDecl};
use cainfer::inference::ObservationValues;
use serde::Deserialize;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VariableFile {
    name: String,
    cardinality: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionFile {
    variables: Vec<VariableFile>,
    probs: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DagFile {
    pub nodes: Vec<String>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
    #[serde(default)]
    pub groups: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub y: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ValuesFile {
    n: usize,
    values: BTreeMap<String, f64>,
    #[serde(default)]
    ancestral_info: Option<f64>,
    #[serde(default)]
    y_is_function_of_obs: bool,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).with_context(|| format!("malformed JSON in {}", path.display()))
}

pub fn read_distribution(path: &Path) -> Result<JointDistribution> {
    let f: DistributionFile = parse_json(path)?;
    let vars = f
        .variables
        .into_iter()
        .map(|v| VariableDecl::new(v.name, v.cardinality))
        .collect();
    JointDistribution::new(vars, f.probs).with_context(|| format!("invalid distribution in {}", path.display()))
}

/// Header cells are `name` or `name:cardinality`.
pub fn read_samples(path: &Path) -> Result<JointDistribution> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let mut names = Vec::new();
    let mut declared = Vec::new();
    for cell in reader.headers().with_context(|| format!("missing header in {}", path.display()))? {
        match cell.split_once(':') {
            Some((name, card)) => {
                let card: usize = card
                    .parse()
                    .with_context(|| format!("{}: bad cardinality in header cell `{cell}`", path.display()))?;
                names.push(name.to_owned());
                declared.push(Some(card));
            }
            None => {
                names.push(cell.to_owned());
                declared.push(None);
            }
        }
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.with_context(|| format!("{}: malformed row {}", path.display(), i + 1))?;
        let row = record
            .iter()
            .enumerate()
            .map(|(j, v)| {
                v.parse::<usize>().with_context(|| {
                    format!("{}: row {}, column `{}`: `{v}` is not a category index", path.display(), i + 1, names[j])
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    let inferred = SampleTable::with_inferred_cardinalities(names.clone(), rows.clone())
        .with_context(|| format!("invalid samples in {}", path.display()))?;
    let vars = inferred
        .variables()
        .iter()
        .zip(&declared)
        .map(|(v, d)| VariableDecl::new(v.name.clone(), d.unwrap_or(v.cardinality)))
        .collect();
    let table = SampleTable::new(vars, rows).with_context(|| format!("invalid samples in {}", path.display()))?;
    from_samples(&table).with_context(|| format!("invalid samples in {}", path.display()))
}

pub fn read_dag(path: &Path) -> Result<(Dag, DagFile)> {
    let f: DagFile = parse_json(path)?;
    let dag = Dag::new(&f.nodes, &f.edges).with_context(|| format!("invalid DAG in {}", path.display()))?;
    Ok((dag, f))
}

/// Groups from the DAG file, or one group per non-reference node.
pub fn dag_groups(dag: &Dag, f: &DagFile) -> Result<ObservationGroups> {
    let groups: Vec<Vec<String>> = match &f.groups {
        Some(g) => g.clone(),
        None => dag
            .names()
            .iter()
            .filter(|n| !f.y.contains(n))
            .map(|n| vec![n.clone()])
            .collect(),
    };
    ObservationGroups::from_names(dag, &groups, &f.y).context("invalid groups or reference nodes")
}

/// Subset keys are comma-joined 1-based group indices; `""` is the empty set.
pub fn parse_subset_key(key: &str, n: usize) -> Result<BitSet> {
    let mut s = BitSet::EMPTY;
    if key.trim().is_empty() {
        return Ok(s);
    }
    for part in key.split(',') {
        let i: usize = part
            .trim()
            .parse()
            .with_context(|| format!("subset key `{key}`: `{part}` is not an index"))?;
        if !(1..=n).contains(&i) {
            bail!("subset key `{key}`: index {i} is outside 1..={n}");
        }
        s.insert(i - 1);
    }
    Ok(s)
}

pub fn subset_key(s: BitSet) -> String {
    s.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")
}

pub fn read_values(path: &Path) -> Result<ObservationValues> {
    let f: ValuesFile = parse_json(path)?;
    if f.n == 0 || f.n > cainfer::inference::MAX_VALUE_GROUPS {
        bail!("{}: field `n` = {} is outside 1..={}", path.display(), f.n, cainfer::inference::MAX_VALUE_GROUPS);
    }
    let mut map = BTreeMap::new();
    for (k, v) in &f.values {
        let s = parse_subset_key(k, f.n).with_context(|| format!("{}: field `values`", path.display()))?;
        if map.insert(s, *v).is_some() {
            bail!("{}: subset `{k}` appears twice in `values`", path.display());
        }
    }
    ObservationValues::from_map(f.n, &map, f.ancestral_info, f.y_is_function_of_obs)
        .with_context(|| format!("invalid observation values in {}", path.display()))
}

/// `X1;X2,X3` into variable sets of `dist`.
pub fn parse_groups(spec: &str, dist: &JointDistribution) -> Result<Vec<BitSet>> {
    spec.split(';')
        .map(|g| {
            let names: Vec<&str> = g.split(',').map(str::trim).collect();
            if names.iter().any(|n| n.is_empty()) {
                bail!("--groups: empty name in `{spec}`");
            }
            dist.var_set(&names).with_context(|| format!("--groups: in group `{g}`"))
        })
        .collect()
}

pub fn parse_name_list(spec: &str, dist: &JointDistribution, flag: &str) -> Result<BitSet> {
    let names: Vec<&str> = spec.split(',').map(str::trim).collect();
    if names.iter().any(|n| n.is_empty()) {
        bail!("{flag}: empty name in `{spec}`");
    }
    dist.var_set(&names).with_context(|| format!("{flag}: `{spec}`"))
}

pub fn parse_usize_list(spec: &str, flag: &str) -> Result<Vec<usize>> {
    spec.split(',')
        .map(|p| p.trim().parse().with_context(|| format!("{flag}: `{p}` is not a non-negative integer")))
        .collect()
}
