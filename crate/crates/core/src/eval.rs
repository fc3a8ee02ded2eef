//! Evaluation harness: per-subject gallery averaging, nearest-neighbor
//! classification by total angle, rank-k accuracy, confusion matrices, and
//! TP/TN threshold curves, driven by a declarative manifest.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rand::rngs::StdRng;
use rand::SeedableRng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{parse_fraction, FrameOrder, IngestConfig, IngestError};
use crate::metrics::{self, MetricsError};
use crate::signature::{
    sign_directory, SignatureConfig, SignatureVector, TopologicalSignature,
};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("cross-validation error: {0}")]
    BadCv(String),
    #[error("label {label} has {got} samples, expected {expected} for cross-validation")]
    UnevenSampleCounts {
        label: String,
        got: usize,
        expected: usize,
    },
    #[error("label {0} is not in the gallery")]
    UnknownLabel(String),
    #[error("{0}")]
    EmptyInput(String),
    #[error("signatures have mismatched configurations")]
    ConfigMismatch,
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("cannot read {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

/// Training signatures grouped by subject label.
pub type TrainingGroups = BTreeMap<String, Vec<TopologicalSignature<u64>>>;
/// Labeled test signatures.
pub type TestSet = Vec<(String, TopologicalSignature<u64>)>;

/// Per-subject averaged signatures used as the reference set.
#[derive(Debug, Clone)]
pub struct Gallery {
    config: SignatureConfig,
    entries: BTreeMap<String, TopologicalSignature<f64>>,
}

impl Gallery {
    /// Average each label's training signatures into one gallery entry.
    pub fn from_training(groups: &TrainingGroups) -> Result<Gallery, EvalError> {
        let mut entries = BTreeMap::new();
        let mut config = None;
        for (label, sigs) in groups {
            let mean = average_signatures(sigs)?;
            match &config {
                None => config = Some(mean.config.clone()),
                Some(c) if *c != mean.config => return Err(EvalError::ConfigMismatch),
                _ => {}
            }
            entries.insert(label.clone(), mean);
        }
        let config = config.ok_or_else(|| EvalError::EmptyInput("empty gallery".into()))?;
        Ok(Gallery { config, entries })
    }

    pub fn config(&self) -> &SignatureConfig {
        &self.config
    }

    pub fn labels(&self) -> impl Iterator<Item = &String> {
        self.entries.keys()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, label: &str) -> Option<&TopologicalSignature<f64>> {
        self.entries.get(label)
    }
}

/// Entry-wise arithmetic mean. Gallery vectors are real-valued.
pub fn average_signatures(
    sigs: &[TopologicalSignature<u64>],
) -> Result<TopologicalSignature<f64>, EvalError> {
    let first = sigs
        .first()
        .ok_or_else(|| EvalError::EmptyInput("cannot average zero signatures".into()))?;
    for s in &sigs[1..] {
        let layout_matches = s.config == first.config
            && s.vectors.len() == first.vectors.len()
            && s.vectors
                .iter()
                .zip(&first.vectors)
                .all(|(a, b)| a.plane == b.plane && a.dim == b.dim);
        if !layout_matches {
            return Err(EvalError::ConfigMismatch);
        }
    }
    let count = sigs.len() as f64;
    let vectors = first
        .vectors
        .iter()
        .enumerate()
        .map(|(i, proto)| SignatureVector {
            plane: proto.plane,
            dim: proto.dim,
            entries: (0..proto.entries.len())
                .map(|j| {
                    sigs.iter().map(|s| s.vectors[i].entries[j] as f64).sum::<f64>() / count
                })
                .collect(),
        })
        .collect();
    Ok(TopologicalSignature {
        config: first.config.clone(),
        vectors,
        meta: first.meta.clone(),
    })
}

/// Rank every gallery label by total angle to the query, ascending.
/// Ties keep label order, so results are deterministic.
pub fn classify(
    query: &TopologicalSignature<u64>,
    gallery: &Gallery,
) -> Result<Vec<(String, f64)>, EvalError> {
    if gallery.is_empty() {
        return Err(EvalError::EmptyInput("empty gallery".into()));
    }
    if query.config != gallery.config {
        return Err(EvalError::ConfigMismatch);
    }
    let query = query.to_f64();
    let mut ranked: Vec<(String, f64)> = gallery
        .entries
        .iter()
        .map(|(label, entry)| {
            metrics::total_angle(&query, entry).map(|a| (label.clone(), a))
        })
        .collect::<Result<_, _>>()?;
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(ranked)
}

#[derive(Debug, Clone, Default)]
pub struct TpTnSets {
    /// Same-subject comparison values, ascending.
    pub tp_values: Vec<f64>,
    /// Cross-subject comparison values, ascending, truncated to the |TP|
    /// smallest to balance the two sets.
    pub tn_values: Vec<f64>,
    pub tn_count_before_truncation: usize,
}

/// Compare each test signature with its own gallery entry (TP) and with all
/// other entries (TN).
pub fn tp_tn_sets(
    gallery: &Gallery,
    tests: &[(String, TopologicalSignature<u64>)],
) -> Result<TpTnSets, EvalError> {
    let mut tp = Vec::with_capacity(tests.len());
    let mut tn = Vec::new();
    for (label, sig) in tests {
        if gallery.entry(label).is_none() {
            return Err(EvalError::UnknownLabel(label.clone()));
        }
        let sig = sig.to_f64();
        for (other, entry) in &gallery.entries {
            let angle = metrics::total_angle(&sig, entry)?;
            if other == label {
                tp.push(angle);
            } else {
                tn.push(angle);
            }
        }
    }
    tp.sort_unstable_by(f64::total_cmp);
    tn.sort_unstable_by(f64::total_cmp);
    let before = tn.len();
    tn.truncate(tp.len());
    Ok(TpTnSets {
        tp_values: tp,
        tn_values: tn,
        tn_count_before_truncation: before,
    })
}

/// Cumulative-percentage curve: a point (v, p) means p percent of the set is
/// less than or equal to v.
pub fn cumulative_curve(sorted_values: &[f64]) -> Vec<(f64, f64)> {
    let n = sorted_values.len();
    sorted_values
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, 100.0 * (i + 1) as f64 / n as f64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

#[derive(Debug, Clone)]
pub struct SampleSpec {
    pub label: String,
    pub path: PathBuf,
    pub split: Option<Split>,
}

#[derive(Debug, Clone)]
pub struct CvSpec {
    /// Samples per subject used for training in each fold.
    pub train_per_subject: usize,
    /// Cap on enumerated folds; beyond it a seeded uniform sample is drawn.
    pub max_folds: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Manifest {
    pub signature: SignatureConfig,
    pub ingest: IngestConfig,
    pub exclude: Vec<String>,
    pub cv: Option<CvSpec>,
    pub samples: Vec<SampleSpec>,
}

#[derive(Deserialize)]
struct RawManifest {
    n: Option<usize>,
    crop_fraction: Option<String>,
    threshold: Option<u8>,
    order: Option<String>,
    #[serde(default)]
    exclude: Vec<String>,
    cv: Option<RawCv>,
    #[serde(default)]
    sample: Vec<RawSample>,
}

#[derive(Deserialize)]
struct RawCv {
    train_per_subject: usize,
    max_folds: Option<usize>,
    seed: Option<u64>,
}

#[derive(Deserialize)]
struct RawSample {
    label: String,
    path: String,
    split: Option<String>,
}

/// Parse a manifest file; sample paths resolve relative to its directory.
pub fn load_manifest(path: &Path) -> Result<Manifest, EvalError> {
    let text = fs::read_to_string(path).map_err(|source| EvalError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let raw: RawManifest =
        toml::from_str(&text).map_err(|e| EvalError::Manifest(e.to_string()))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));

    let mut ingest = IngestConfig::whole_frame();
    if let Some(cf) = &raw.crop_fraction {
        ingest.crop_fraction = parse_fraction(cf)
            .map_err(|e| EvalError::Manifest(format!("crop_fraction: {e}")))?;
    }
    if let Some(t) = raw.threshold {
        ingest.threshold = t;
    }
    if let Some(order) = &raw.order {
        ingest.order = match order.as_str() {
            "lexicographic" => FrameOrder::Lexicographic,
            "numeric-suffix" => FrameOrder::NumericSuffix,
            other => {
                return Err(EvalError::Manifest(format!(
                    "unknown order `{other}` (use lexicographic or numeric-suffix)"
                )))
            }
        };
    }
    let n = raw.n.unwrap_or(24);
    if n == 0 {
        return Err(EvalError::Manifest("n must be positive".into()));
    }

    let cv = raw
        .cv
        .map(|c| {
            if c.train_per_subject == 0 {
                return Err(EvalError::Manifest(
                    "cv.train_per_subject must be positive".into(),
                ));
            }
            Ok(CvSpec {
                train_per_subject: c.train_per_subject,
                max_folds: c.max_folds.unwrap_or(100),
                seed: c.seed.unwrap_or(0),
            })
        })
        .transpose()?;

    if raw.sample.is_empty() {
        return Err(EvalError::Manifest("manifest lists no samples".into()));
    }
    let mut samples = Vec::with_capacity(raw.sample.len());
    for s in raw.sample {
        let split = match s.split.as_deref() {
            None => None,
            Some("train") => Some(Split::Train),
            Some("test") => Some(Split::Test),
            Some(other) => {
                return Err(EvalError::Manifest(format!(
                    "sample {}: unknown split `{other}`",
                    s.path
                )))
            }
        };
        if cv.is_none() && split.is_none() {
            return Err(EvalError::Manifest(format!(
                "sample {}: split required when no [cv] section is present",
                s.path
            )));
        }
        samples.push(SampleSpec {
            label: s.label,
            path: base.join(s.path),
            split,
        });
    }
    Ok(Manifest {
        signature: SignatureConfig::new(n),
        ingest,
        exclude: raw.exclude,
        cv,
        samples,
    })
}

/// Full evaluation report. Percentages are averaged over folds; TP/TN sets
/// are concatenated across folds (each truncated per fold).
#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub labels: Vec<String>,
    pub folds: usize,
    pub tests_per_fold: usize,
    /// rank -> percent of tests whose true label ranks at or above it.
    pub rank_accuracy: BTreeMap<usize, f64>,
    /// Row: true label, column: predicted label, in `labels` order.
    pub confusion_percent: Vec<Vec<f64>>,
    pub tp_values: Vec<f64>,
    pub tn_values: Vec<f64>,
    pub tn_count_before_truncation: usize,
    pub tp_curve: Vec<(f64, f64)>,
    pub tn_curve: Vec<(f64, f64)>,
    pub warnings: Vec<String>,
}

impl EvalReport {
    pub fn rank1_accuracy(&self) -> f64 {
        self.rank_accuracy.get(&1).copied().unwrap_or(0.0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `set,threshold,percent` rows for both cumulative curves.
    pub fn write_curves_csv(&self, w: &mut impl Write) -> io::Result<()> {
        writeln!(w, "set,threshold,percent")?;
        for (v, p) in &self.tp_curve {
            writeln!(w, "tp,{v},{p}")?;
        }
        for (v, p) in &self.tn_curve {
            writeln!(w, "tn,{v},{p}")?;
        }
        Ok(())
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "labels: {}\nfolds: {}  tests per fold: {}\n\nrank accuracy (%):\n",
            self.labels.join(", "),
            self.folds,
            self.tests_per_fold
        ));
        for (rank, pct) in &self.rank_accuracy {
            out.push_str(&format!("  rank {:>2}: {:6.2}\n", rank, pct));
        }
        out.push_str("\nconfusion matrix (% of true-label tests):\n");
        let width = self.labels.iter().map(|l| l.len()).max().unwrap_or(4).max(6);
        out.push_str(&format!("  {:width$}", "", width = width));
        for l in &self.labels {
            out.push_str(&format!(" {:>width$}", l, width = width));
        }
        out.push('\n');
        for (i, l) in self.labels.iter().enumerate() {
            out.push_str(&format!("  {:width$}", l, width = width));
            for v in &self.confusion_percent[i] {
                out.push_str(&format!(" {:>width$.1}", v, width = width));
            }
            out.push('\n');
        }
        out.push_str(&format!(
            "\nTP set: {} values, TN set: {} values (truncated from {})\n",
            self.tp_values.len(),
            self.tn_values.len(),
            self.tn_count_before_truncation
        ));
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }
}

/// All r-subsets of 0..count, lexicographic.
fn enumerate_combinations(count: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..r).collect();
    loop {
        out.push(current.clone());
        // advance
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] != i + count - r {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        current[i] += 1;
        for j in i + 1..r {
            current[j] = current[j - 1] + 1;
        }
    }
}

fn binomial_capped(n: usize, r: usize, cap: u128) -> u128 {
    if r > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..r.min(n - r) {
        acc = acc.saturating_mul((n - i) as u128) / (i + 1) as u128;
        if acc > cap {
            return cap + 1;
        }
    }
    acc
}

/// Training-ordinal folds for the cross-validation spec: all combinations
/// when few enough, otherwise a seeded uniform sample of distinct ones.
fn cv_folds(samples_per_subject: usize, cv: &CvSpec) -> Result<Vec<Vec<usize>>, EvalError> {
    let r = cv.train_per_subject;
    if r >= samples_per_subject {
        return Err(EvalError::BadCv(format!(
            "train_per_subject {} leaves no test samples out of {}",
            r, samples_per_subject
        )));
    }
    let total = binomial_capped(samples_per_subject, r, cv.max_folds as u128);
    if total <= cv.max_folds as u128 {
        return Ok(enumerate_combinations(samples_per_subject, r));
    }
    let mut rng = StdRng::seed_from_u64(cv.seed);
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    while seen.len() < cv.max_folds {
        let mut pick = rand::seq::index::sample(&mut rng, samples_per_subject, r).into_vec();
        pick.sort_unstable();
        seen.insert(pick);
    }
    let mut folds: Vec<Vec<usize>> = seen.into_iter().collect();
    folds.sort();
    Ok(folds)
}

struct FoldOutcome {
    rank_hits: Vec<usize>,
    confusion: Vec<Vec<usize>>,
    test_count: usize,
    tp_tn: TpTnSets,
}

fn run_fold(
    labels: &[String],
    train: &TrainingGroups,
    tests: &TestSet,
) -> Result<FoldOutcome, EvalError> {
    let gallery = Gallery::from_training(train)?;
    let label_index: BTreeMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let mut rank_hits = vec![0usize; labels.len()];
    let mut confusion = vec![vec![0usize; labels.len()]; labels.len()];
    for (label, sig) in tests {
        let ranked = classify(sig, &gallery)?;
        let rank = ranked
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| EvalError::UnknownLabel(label.clone()))?;
        for hits in rank_hits.iter_mut().skip(rank) {
            *hits += 1;
        }
        confusion[label_index[label.as_str()]][label_index[ranked[0].0.as_str()]] += 1;
    }
    let tp_tn = tp_tn_sets(&gallery, tests)?;
    Ok(FoldOutcome {
        rank_hits,
        confusion,
        test_count: tests.len(),
        tp_tn,
    })
}

/// Run the full protocol described by a manifest: signature per sample,
/// gallery per fold, rank/confusion/TP-TN aggregation over folds.
pub fn eval(manifest: &Manifest) -> Result<EvalReport, EvalError> {
    let excluded: HashSet<&String> = manifest.exclude.iter().collect();
    let kept: Vec<&SampleSpec> = manifest
        .samples
        .iter()
        .filter(|s| !excluded.contains(&s.label))
        .collect();
    if kept.is_empty() {
        return Err(EvalError::EmptyInput(
            "no samples left after exclusions".into(),
        ));
    }

    // Signatures for all samples, in parallel; order stays deterministic.
    struct SignedSample {
        label: String,
        split: Option<Split>,
        signature: TopologicalSignature<u64>,
        warnings: Vec<String>,
    }
    let signed: Vec<SignedSample> = kept
        .par_iter()
        .map(|s| {
            sign_directory(&s.path, &manifest.ingest, &manifest.signature).map(
                |(signature, warnings)| SignedSample {
                    label: s.label.clone(),
                    split: s.split,
                    signature,
                    warnings,
                },
            )
        })
        .collect::<Result<_, _>>()?;

    type LabeledSamples = BTreeMap<String, Vec<(Option<Split>, TopologicalSignature<u64>)>>;
    let mut warnings: Vec<String> = Vec::new();
    let mut by_label = LabeledSamples::new();
    for mut sample in signed {
        warnings.append(&mut sample.warnings);
        by_label
            .entry(sample.label)
            .or_default()
            .push((sample.split, sample.signature));
    }
    let labels: Vec<String> = by_label.keys().cloned().collect();

    // Assemble folds as (train set, test set) pairs of owned signatures.
    let mut folds: Vec<(TrainingGroups, TestSet)> = Vec::new();
    match &manifest.cv {
        Some(cv) => {
            let per_subject = by_label.values().next().map_or(0, Vec::len);
            for (label, sigs) in &by_label {
                if sigs.len() != per_subject {
                    return Err(EvalError::UnevenSampleCounts {
                        label: label.clone(),
                        got: sigs.len(),
                        expected: per_subject,
                    });
                }
            }
            for ordinals in cv_folds(per_subject, cv)? {
                let chosen: HashSet<usize> = ordinals.iter().copied().collect();
                let mut train = TrainingGroups::new();
                let mut tests = TestSet::new();
                for (label, sigs) in &by_label {
                    for (i, (_, sig)) in sigs.iter().enumerate() {
                        if chosen.contains(&i) {
                            train.entry(label.clone()).or_default().push(sig.clone());
                        } else {
                            tests.push((label.clone(), sig.clone()));
                        }
                    }
                }
                folds.push((train, tests));
            }
        }
        None => {
            let mut train = TrainingGroups::new();
            let mut tests = TestSet::new();
            for (label, sigs) in &by_label {
                for (split, sig) in sigs {
                    match split.expect("split presence checked at load") {
                        Split::Train => {
                            train.entry(label.clone()).or_default().push(sig.clone())
                        }
                        Split::Test => tests.push((label.clone(), sig.clone())),
                    }
                }
            }
            for label in &labels {
                if !train.contains_key(label) {
                    return Err(EvalError::EmptyInput(format!(
                        "label {label} has no training samples"
                    )));
                }
            }
            folds.push((train, tests));
        }
    }

    let outcomes: Vec<FoldOutcome> = folds
        .par_iter()
        .map(|(train, tests)| run_fold(&labels, train, tests))
        .collect::<Result<_, _>>()?;

    let fold_count = outcomes.len();
    let tests_per_fold = outcomes.first().map_or(0, |o| o.test_count);
    if outcomes.iter().all(|o| o.test_count == 0) {
        return Err(EvalError::EmptyInput("no test samples".into()));
    }

    let mut rank_accuracy = BTreeMap::new();
    for k in 1..=labels.len() {
        let mean = outcomes
            .iter()
            .map(|o| 100.0 * o.rank_hits[k - 1] as f64 / o.test_count.max(1) as f64)
            .sum::<f64>()
            / fold_count as f64;
        rank_accuracy.insert(k, mean);
    }

    let mut confusion_percent = vec![vec![0.0f64; labels.len()]; labels.len()];
    for (i, row) in confusion_percent.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            let mut acc = 0.0;
            let mut used_folds = 0;
            for o in &outcomes {
                let row_total: usize = o.confusion[i].iter().sum();
                if row_total > 0 {
                    acc += 100.0 * o.confusion[i][j] as f64 / row_total as f64;
                    used_folds += 1;
                }
            }
            *cell = if used_folds > 0 {
                acc / used_folds as f64
            } else {
                0.0
            };
        }
    }

    let mut tp_values = Vec::new();
    let mut tn_values = Vec::new();
    let mut tn_before = 0;
    for o in &outcomes {
        tp_values.extend_from_slice(&o.tp_tn.tp_values);
        tn_values.extend_from_slice(&o.tp_tn.tn_values);
        tn_before += o.tp_tn.tn_count_before_truncation;
    }
    tp_values.sort_unstable_by(f64::total_cmp);
    tn_values.sort_unstable_by(f64::total_cmp);

    Ok(EvalReport {
        tp_curve: cumulative_curve(&tp_values),
        tn_curve: cumulative_curve(&tn_values),
        labels,
        folds: fold_count,
        tests_per_fold,
        rank_accuracy,
        confusion_percent,
        tp_values,
        tn_values,
        tn_count_before_truncation: tn_before,
        warnings,
    })
}

/// Convenience wrapper: load the manifest, run the evaluation.
pub fn eval_manifest_file(path: &Path) -> Result<EvalReport, EvalError> {
    eval(&load_manifest(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filtration::PlaneId;
    use crate::signature::SignatureMeta;

    /// Signature with every entry equal to `fill`, valid 16-vector layout.
    fn flat_signature(n: usize, fill: u64) -> TopologicalSignature<u64> {
        let vectors = PlaneId::ALL
            .iter()
            .flat_map(|&p| {
                [0u8, 1].map(|dim| SignatureVector {
                    plane: Some(p),
                    dim,
                    entries: vec![fill; 2 * n],
                })
            })
            .collect();
        TopologicalSignature {
            config: SignatureConfig::new(n),
            vectors,
            meta: SignatureMeta::default(),
        }
    }

    fn scaled(sig: &TopologicalSignature<u64>, factor: u64) -> TopologicalSignature<u64> {
        let mut out = sig.clone();
        for v in &mut out.vectors {
            for e in &mut v.entries {
                *e *= factor;
            }
        }
        out
    }

    /// Distinct per-slot patterns so different labels are far apart.
    fn patterned_signature(n: usize, seedish: u64) -> TopologicalSignature<u64> {
        let mut sig = flat_signature(n, 0);
        for (vi, v) in sig.vectors.iter_mut().enumerate() {
            for (i, e) in v.entries.iter_mut().enumerate() {
                *e = 1 + ((seedish + vi as u64 + i as u64 * (seedish + 1)) % 7);
            }
        }
        sig
    }

    #[test]
    fn average_of_one_is_identity() {
        let s = patterned_signature(3, 2);
        let mean = average_signatures(std::slice::from_ref(&s)).unwrap();
        for (v, m) in s.vectors.iter().zip(&mean.vectors) {
            for (a, b) in v.entries.iter().zip(&m.entries) {
                assert_eq!(*a as f64, *b);
            }
        }
    }

    #[test]
    fn average_of_two_copies_is_identity() {
        let s = patterned_signature(3, 4);
        let mean = average_signatures(&[s.clone(), s.clone()]).unwrap();
        for (v, m) in s.vectors.iter().zip(&mean.vectors) {
            for (a, b) in v.entries.iter().zip(&m.entries) {
                assert_eq!(*a as f64, *b);
            }
        }
    }

    #[test]
    fn average_of_s_and_3s_is_2s() {
        let s = patterned_signature(2, 1);
        let mean = average_signatures(&[s.clone(), scaled(&s, 3)]).unwrap();
        for (v, m) in s.vectors.iter().zip(&mean.vectors) {
            for (a, b) in v.entries.iter().zip(&m.entries) {
                assert_eq!(2.0 * *a as f64, *b);
            }
        }
    }

    #[test]
    fn averaging_nothing_is_an_error() {
        assert!(matches!(
            average_signatures(&[]),
            Err(EvalError::EmptyInput(_))
        ));
    }

    fn two_label_gallery(n: usize) -> (Gallery, TopologicalSignature<u64>) {
        let a = patterned_signature(n, 3);
        let b = patterned_signature(n, 40);
        let mut groups = BTreeMap::new();
        groups.insert("a".to_string(), vec![a.clone()]);
        groups.insert("b".to_string(), vec![b]);
        (Gallery::from_training(&groups).unwrap(), a)
    }

    #[test]
    fn query_matching_gallery_entry_ranks_first_at_zero() {
        let (gallery, a) = two_label_gallery(3);
        let ranked = classify(&a, &gallery).unwrap();
        assert_eq!(ranked[0].0, "a");
        assert_eq!(ranked[0].1, 0.0);
        assert!(ranked[1].1 > 0.0);
    }

    #[test]
    fn ties_break_by_label_order() {
        // Gallery entries v and 2v are the same direction: both at angle 0.
        let v = patterned_signature(2, 5);
        let mut groups = BTreeMap::new();
        groups.insert("beta".to_string(), vec![scaled(&v, 2)]);
        groups.insert("alpha".to_string(), vec![v.clone()]);
        let gallery = Gallery::from_training(&groups).unwrap();
        let ranked = classify(&v, &gallery).unwrap();
        assert_eq!(ranked[0], ("alpha".to_string(), 0.0));
        assert_eq!(ranked[1], ("beta".to_string(), 0.0));
    }

    #[test]
    fn scaling_a_query_preserves_the_ranking() {
        let (gallery, a) = two_label_gallery(3);
        let ranked_1: Vec<String> = classify(&a, &gallery)
            .unwrap()
            .into_iter()
            .map(|(l, _)| l)
            .collect();
        let ranked_3: Vec<String> = classify(&scaled(&a, 3), &gallery)
            .unwrap()
            .into_iter()
            .map(|(l, _)| l)
            .collect();
        assert_eq!(ranked_1, ranked_3);
    }

    #[test]
    fn tp_tn_counts_and_truncation() {
        let n = 2;
        let labels = 5usize;
        let tests_per_label = 2usize;
        let mut groups = BTreeMap::new();
        let mut tests = Vec::new();
        for li in 0..labels {
            let sig = patterned_signature(n, 7 * li as u64 + 1);
            groups.insert(format!("s{li}"), vec![sig.clone()]);
            for _ in 0..tests_per_label {
                tests.push((format!("s{li}"), sig.clone()));
            }
        }
        let gallery = Gallery::from_training(&groups).unwrap();
        let sets = tp_tn_sets(&gallery, &tests).unwrap();
        let t = labels * tests_per_label;
        assert_eq!(sets.tp_values.len(), t);
        assert_eq!(sets.tn_count_before_truncation, t * (labels - 1));
        assert_eq!(sets.tn_values.len(), t.min(t * (labels - 1)));
        // Tests identical to gallery entries compare at zero.
        assert!(sets.tp_values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unknown_test_label_is_an_error() {
        let (gallery, a) = two_label_gallery(2);
        let err = tp_tn_sets(&gallery, &[("ghost".to_string(), a)]).unwrap_err();
        assert!(matches!(err, EvalError::UnknownLabel(_)));
    }

    #[test]
    fn combination_enumeration_matches_binomial() {
        let combos = enumerate_combinations(6, 4);
        assert_eq!(combos.len(), 15);
        assert_eq!(combos[0], vec![0, 1, 2, 3]);
        assert_eq!(combos[14], vec![2, 3, 4, 5]);
        let unique: HashSet<&Vec<usize>> = combos.iter().collect();
        assert_eq!(unique.len(), 15);
    }

    #[test]
    fn capped_fold_sampling_is_deterministic() {
        let cv = CvSpec {
            train_per_subject: 5,
            max_folds: 20,
            seed: 3,
        };
        let f1 = cv_folds(12, &cv).unwrap();
        let f2 = cv_folds(12, &cv).unwrap();
        assert_eq!(f1.len(), 20);
        assert_eq!(f1, f2);
        for fold in &f1 {
            assert_eq!(fold.len(), 5);
            assert!(fold.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn cumulative_curve_reaches_100() {
        let curve = cumulative_curve(&[1.0, 2.0, 4.0, 8.0]);
        assert_eq!(curve.len(), 4);
        assert_eq!(curve[0], (1.0, 25.0));
        assert_eq!(curve[3], (8.0, 100.0));
    }

    #[test]
    fn manifest_requires_split_without_cv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.toml");
        fs::write(&path, "[[sample]]\nlabel = \"a\"\npath = \"a1\"\n").unwrap();
        let err = load_manifest(&path).unwrap_err();
        assert!(matches!(err, EvalError::Manifest(_)));
    }

    #[test]
    fn manifest_parses_fields() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.toml");
        fs::write(
            &path,
            concat!(
                "n = 8\ncrop_fraction = \"1/4\"\nthreshold = 100\norder = \"lexicographic\"\n",
                "exclude = [\"005\"]\n\n[cv]\ntrain_per_subject = 2\nseed = 9\n\n",
                "[[sample]]\nlabel = \"a\"\npath = \"a1\"\n",
                "[[sample]]\nlabel = \"a\"\npath = \"a2\"\n",
            ),
        )
        .unwrap();
        let m = load_manifest(&path).unwrap();
        assert_eq!(m.signature.n, 8);
        assert_eq!(m.ingest.crop_fraction, crate::scalar::Exact::new(1, 4));
        assert_eq!(m.ingest.threshold, 100);
        assert_eq!(m.ingest.order, FrameOrder::Lexicographic);
        assert_eq!(m.exclude, vec!["005".to_string()]);
        assert_eq!(m.cv.as_ref().unwrap().train_per_subject, 2);
        assert_eq!(m.cv.as_ref().unwrap().seed, 9);
        assert_eq!(m.samples.len(), 2);
        assert!(m.samples[0].path.starts_with(dir.path()));
    }

    #[test]
    fn single_class_manifest_confusion_is_all_100() {
        let dir = tempfile::tempdir().unwrap();
        for (i, sample) in [0usize, 1, 2].iter().enumerate() {
            crate::fixtures::write_sequence_dir(
                &dir.path().join(format!("s{i}")),
                &crate::fixtures::box_sequence(*sample),
            )
            .unwrap();
        }
        let manifest_path = dir.path().join("m.toml");
        fs::write(
            &manifest_path,
            concat!(
                "n = 6\ncrop_fraction = \"1\"\n",
                "[[sample]]\nlabel = \"only\"\npath = \"s0\"\nsplit = \"train\"\n",
                "[[sample]]\nlabel = \"only\"\npath = \"s1\"\nsplit = \"train\"\n",
                "[[sample]]\nlabel = \"only\"\npath = \"s2\"\nsplit = \"test\"\n",
            ),
        )
        .unwrap();
        let report = eval_manifest_file(&manifest_path).unwrap();
        assert_eq!(report.labels, vec!["only".to_string()]);
        assert_eq!(report.confusion_percent, vec![vec![100.0]]);
        assert_eq!(report.rank1_accuracy(), 100.0);
    }

    #[test]
    fn leave_one_out_runs_both_folds() {
        let dir = tempfile::tempdir().unwrap();
        for class in ["box", "bars"] {
            for sample in 0..2usize {
                let frames = if class == "box" {
                    crate::fixtures::box_sequence(sample)
                } else {
                    crate::fixtures::bars_sequence(sample)
                };
                crate::fixtures::write_sequence_dir(
                    &dir.path().join(format!("{class}_{sample}")),
                    &frames,
                )
                .unwrap();
            }
        }
        let manifest_path = dir.path().join("m.toml");
        let mut text = String::from("n = 6\ncrop_fraction = \"1\"\n\n[cv]\ntrain_per_subject = 1\n\n");
        for class in ["box", "bars"] {
            for sample in 0..2usize {
                text.push_str(&format!(
                    "[[sample]]\nlabel = \"{class}\"\npath = \"{class}_{sample}\"\n\n"
                ));
            }
        }
        fs::write(&manifest_path, text).unwrap();
        let report = eval_manifest_file(&manifest_path).unwrap();
        assert_eq!(report.folds, 2); // C(2,1)
        assert_eq!(report.tests_per_fold, 2);
    }
}
