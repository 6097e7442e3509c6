//! Spectral datasets: CSV ingestion, synthetic generation, hold-out splits.
//!
//! A dataset CSV has one spectrum per row. The header names the spectral
//! points (`f0,f1,...`) followed by a final `label` column. Class names are
//! mapped to dense indices in order of first appearance.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::derive_seed;

pub const LABEL_COLUMN: &str = "label";

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDataset {
    spectra: Array2<f64>,
    labels: Vec<usize>,
    class_names: Vec<String>,
    instance_ids: Vec<String>,
}

impl SpectralDataset {
    pub fn new(
        spectra: Array2<f64>,
        labels: Vec<usize>,
        class_names: Vec<String>,
        instance_ids: Vec<String>,
    ) -> Result<Self> {
        let ds = SpectralDataset {
            spectra,
            labels,
            class_names,
            instance_ids,
        };
        ds.validate()?;
        Ok(ds)
    }

    fn validate(&self) -> Result<()> {
        let (n, d) = self.spectra.dim();
        if d == 0 {
            return Err(Error::Dataset("feature_count must be positive".into()));
        }
        if self.labels.len() != n {
            return Err(Error::Dataset(format!(
                "{} labels for {} spectra",
                self.labels.len(),
                n
            )));
        }
        if self.instance_ids.len() != n {
            return Err(Error::Dataset(format!(
                "{} instance ids for {} spectra",
                self.instance_ids.len(),
                n
            )));
        }
        let k = self.class_names.len();
        if let Some(&bad) = self.labels.iter().find(|&&l| l >= k) {
            return Err(Error::Dataset(format!("label {bad} outside 0..{k}")));
        }
        if let Some((row, _)) = self
            .spectra
            .axis_iter(Axis(0))
            .enumerate()
            .find(|(_, r)| r.iter().any(|v| !v.is_finite()))
        {
            return Err(Error::Dataset(format!("non-finite intensity in row {row}")));
        }
        let mut seen = HashSet::with_capacity(n);
        for id in &self.instance_ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::Dataset(format!("duplicate instance id {id}")));
            }
        }
        Ok(())
    }

    pub fn spectra(&self) -> &Array2<f64> {
        &self.spectra
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn instance_ids(&self) -> &[String] {
        &self.instance_ids
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.spectra.ncols()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Rows selected by `indices`, in the given order. Class names are kept so
    /// label indices stay comparable with the parent dataset.
    pub fn subset(&self, indices: &[usize]) -> SpectralDataset {
        SpectralDataset {
            spectra: self.spectra.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            instance_ids: indices
                .iter()
                .map(|&i| self.instance_ids[i].clone())
                .collect(),
        }
    }

    pub fn index_of(&self, instance_id: &str) -> Option<usize> {
        self.instance_ids.iter().position(|id| id == instance_id)
    }
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<SpectralDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file)
}

pub fn read_csv<R: std::io::Read>(reader: R) -> Result<SpectralDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let width = header.len();
    if width < 2 || header.get(width - 1).map(str::trim) != Some(LABEL_COLUMN) {
        return Err(Error::Parse {
            line: 1,
            message: format!("header must end with a `{LABEL_COLUMN}` column"),
        });
    }
    let d = width - 1;

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut class_names: Vec<String> = Vec::new();
    let mut class_index: HashMap<String, usize> = HashMap::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != width {
            return Err(Error::Parse {
                line,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        for (col, field) in record.iter().take(d).enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line,
                message: format!("non-numeric intensity {field:?} in column {col}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite intensity in column {col}"),
                });
            }
            values.push(v);
        }
        let name = record[d].trim().to_string();
        if name.is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty label".into(),
            });
        }
        let next = class_names.len();
        let idx = *class_index.entry(name.clone()).or_insert_with(|| {
            class_names.push(name);
            next
        });
        labels.push(idx);
    }
    let n = labels.len();
    if n == 0 {
        return Err(Error::Dataset("no instances".into()));
    }
    let spectra =
        Array2::from_shape_vec((n, d), values).map_err(|e| Error::Dataset(e.to_string()))?;
    let ids = (0..n).map(|i| i.to_string()).collect();
    SpectralDataset::new(spectra, labels, class_names, ids)
}

pub fn write_csv(ds: &SpectralDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(ds, &mut file).map_err(|e| Error::io(path, e))
}

pub fn write_csv_to<W: Write>(ds: &SpectralDataset, out: &mut W) -> std::io::Result<()> {
    let mut buf = String::new();
    for j in 0..ds.feature_count() {
        buf.push_str(&format!("f{j},"));
    }
    buf.push_str(LABEL_COLUMN);
    buf.push('\n');
    out.write_all(buf.as_bytes())?;
    for (row, &label) in ds.spectra.axis_iter(Axis(0)).zip(&ds.labels) {
        buf.clear();
        for v in row {
            buf.push_str(&format!("{v},"));
        }
        buf.push_str(&ds.class_names[label]);
        buf.push('\n');
        out.write_all(buf.as_bytes())?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub train_ratio: f64,
    pub seed: u64,
}

impl FoldSplit {
    pub fn n_train(&self) -> usize {
        self.train_indices.len()
    }

    pub fn n_test(&self) -> usize {
        self.test_indices.len()
    }
}

pub fn train_size(n: usize, ratio: f64) -> usize {
    (ratio * n as f64).round() as usize
}

/// Uniform hold-out split. Indices are shuffled with a seeded generator, cut at
/// `round(ratio * N)`, and each side is returned in ascending order.
pub fn split(ds: &SpectralDataset, ratio: f64, seed: u64) -> Result<FoldSplit> {
    split_n(ds.len(), ratio, seed)
}

pub fn split_n(n: usize, ratio: f64, seed: u64) -> Result<FoldSplit> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Split(format!("ratio {ratio} outside (0, 1)")));
    }
    if n < 2 {
        return Err(Error::Split(format!("need at least 2 instances, got {n}")));
    }
    let n_train = train_size(n, ratio);
    if n_train == 0 || n_train == n {
        return Err(Error::Split(format!(
            "ratio {ratio} on {n} instances leaves an empty partition"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    let mut train = idx[..n_train].to_vec();
    let mut test = idx[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(FoldSplit {
        train_indices: train,
        test_indices: test,
        train_ratio: ratio,
        seed,
    })
}

/// Seed used for bootstrap run `run` of a fold seeded with `seed`.
pub fn run_seed(seed: u64, run: usize) -> u64 {
    derive_seed(seed, &[0xb007, run as u64])
}

/// Repeated random hold-out resampling: `n_runs` independent splits at the same
/// ratio, each with its own derived seed.
pub fn bootstrap_runs(
    ds: &SpectralDataset,
    ratio: f64,
    n_runs: usize,
    seed: u64,
) -> Result<Vec<FoldSplit>> {
    if n_runs == 0 {
        return Err(Error::Split("n_runs must be at least 1".into()));
    }
    (0..n_runs)
        .map(|r| split(ds, ratio, run_seed(seed, r)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n_classes: usize,
    pub instances_per_class: usize,
    pub feature_count: usize,
    pub peaks_per_class: usize,
    pub peak_width: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_classes: 6,
            instances_per_class: 100,
            feature_count: 518,
            peaks_per_class: 3,
            peak_width: 12.0,
            noise_sigma: 1.5,
            seed: 7,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_classes < 2 {
            return Err(Error::Dataset(format!(
                "n_classes must be at least 2, got {}",
                self.n_classes
            )));
        }
        if self.instances_per_class == 0 || self.feature_count == 0 || self.peaks_per_class == 0 {
            return Err(Error::Dataset(
                "instance, feature and peak counts must be positive".into(),
            ));
        }
        if !(self.peak_width > 0.0 && self.peak_width.is_finite()) {
            return Err(Error::Dataset(format!(
                "peak_width must be positive, got {}",
                self.peak_width
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Dataset(format!(
                "noise_sigma must be finite and non-negative, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }

    /// One noiseless template spectrum per class.
    pub fn templates(&self) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &[1]));
        let d = self.feature_count;
        let mut t = Array2::zeros((self.n_classes, d));
        for k in 0..self.n_classes {
            for _ in 0..self.peaks_per_class {
                let center = rng.gen_range(0.0..d as f64);
                let height = rng.gen_range(0.5..1.5);
                for (x, v) in t.row_mut(k).iter_mut().enumerate() {
                    let z = (x as f64 - center) / self.peak_width;
                    *v += height * (-0.5 * z * z).exp();
                }
            }
        }
        t
    }
}

/// Gaussian-peak spectra: every class owns `peaks_per_class` bumps at random
/// centers, and each instance is its class template plus i.i.d. noise.
/// Instances are laid out class by class.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SpectralDataset> {
    spec.validate()?;
    let templates = spec.templates();
    let n = spec.n_classes * spec.instances_per_class;
    let d = spec.feature_count;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &[2]));
    let noise = Normal::new(0.0, spec.noise_sigma).map_err(|e| Error::Dataset(e.to_string()))?;
    let mut spectra = Array2::zeros((n, d));
    let mut labels = Vec::with_capacity(n);
    for k in 0..spec.n_classes {
        for i in 0..spec.instances_per_class {
            let row_idx = k * spec.instances_per_class + i;
            let mut row = spectra.row_mut(row_idx);
            row.assign(&templates.row(k));
            if spec.noise_sigma > 0.0 {
                row.mapv_inplace(|v| v + noise.sample(&mut rng));
            }
            labels.push(k);
        }
    }
    let class_names = (0..spec.n_classes).map(|k| format!("class{k}")).collect();
    let ids = (0..n).map(|i| i.to_string()).collect();
    SpectralDataset::new(spectra, labels, class_names, ids)
}

/// Index of the closest template (squared Euclidean distance) for each spectrum.
pub fn nearest_template(templates: &Array2<f64>, spectra: &Array2<f64>) -> Vec<usize> {
    spectra
        .axis_iter(Axis(0))
        .map(|row| {
            templates
                .axis_iter(Axis(0))
                .map(|t| {
                    let diff: Array1<f64> = &row - &t;
                    diff.dot(&diff)
                })
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(k, _)| k)
                .unwrap_or(0)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_csv() -> &'static str {
        "f0,f1,f2,label\n1,2,3,a\n4,5,6,a\n7,8,9,b\n0.5,-1,2e-3,b\n"
    }

    #[test]
    fn loads_small_file() {
        let ds = read_csv(tiny_csv().as_bytes()).unwrap();
        assert_eq!(ds.len(), 4);
        assert_eq!(ds.n_classes(), 2);
        assert_eq!(ds.feature_count(), 3);
        assert_eq!(ds.labels(), &[0, 0, 1, 1]);
        assert_eq!(ds.spectra()[[3, 2]], 2e-3);
    }

    #[test]
    fn wrong_arity_names_line() {
        let text = "f0,f1,f2,label\n1,2,3,a\n4,5,a\n";
        match read_csv(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_is_rejected() {
        let text = "f0,f1,label\n1,x,a\n";
        assert!(matches!(
            read_csv(text.as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn header_must_end_with_label() {
        let text = "f0,f1,class\n1,2,a\n";
        assert!(matches!(
            read_csv(text.as_bytes()),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn labels_follow_first_appearance() {
        let text = "f0,label\n1,z\n2,a\n3,z\n4,m\n";
        let ds = read_csv(text.as_bytes()).unwrap();
        assert_eq!(ds.class_names(), &["z", "a", "m"]);
        assert_eq!(ds.labels(), &[0, 1, 0, 2]);
    }

    #[test]
    fn split_counts() {
        let s = split_n(10, 0.9, 1).unwrap();
        assert_eq!((s.n_train(), s.n_test()), (9, 1));
        let s = split_n(1040, 0.75, 1).unwrap();
        assert_eq!(s.n_train(), 780);
        assert_eq!(split_n(10, 0.9, 5).unwrap(), split_n(10, 0.9, 5).unwrap());
    }

    #[test]
    fn split_rejects_empty_partitions() {
        assert!(split_n(10, 0.01, 0).is_err());
        assert!(split_n(10, 0.99, 0).is_err());
        assert!(split_n(10, 1.0, 0).is_err());
        assert!(split_n(1, 0.5, 0).is_err());
    }

    #[test]
    fn bootstrap_seeds() {
        let ds = generate_synthetic(&SyntheticSpec {
            instances_per_class: 20,
            feature_count: 16,
            ..Default::default()
        })
        .unwrap();
        let runs = bootstrap_runs(&ds, 0.75, 3, 11).unwrap();
        assert_eq!(runs.len(), 3);
        assert_ne!(runs[0].seed, runs[1].seed);
        assert_ne!(runs[1].seed, runs[2].seed);
        assert_ne!(runs[0].test_indices, runs[1].test_indices);
        let one = bootstrap_runs(&ds, 0.75, 1, 11).unwrap();
        assert_eq!(one[0], split(&ds, 0.75, run_seed(11, 0)).unwrap());
        assert!(bootstrap_runs(&ds, 0.75, 0, 11).is_err());
    }

    #[test]
    fn synthetic_shape_and_noise() {
        let spec = SyntheticSpec::default();
        let ds = generate_synthetic(&spec).unwrap();
        assert_eq!(ds.len(), 600);
        assert_eq!(ds.feature_count(), 518);
        assert_eq!(ds.n_classes(), 6);

        let clean = generate_synthetic(&SyntheticSpec {
            noise_sigma: 0.0,
            ..spec.clone()
        })
        .unwrap();
        for k in 0..6 {
            let first = clean.spectra().row(k * 100);
            for i in 1..100 {
                assert_eq!(clean.spectra().row(k * 100 + i), first);
            }
        }

        let other = generate_synthetic(&SyntheticSpec { seed: 8, ..spec }).unwrap();
        assert_ne!(ds.spectra(), other.spectra());
    }

    #[test]
    fn synthetic_rejects_bad_spec() {
        let bad = SyntheticSpec {
            n_classes: 1,
            ..Default::default()
        };
        assert!(generate_synthetic(&bad).is_err());
        let bad = SyntheticSpec {
            noise_sigma: f64::NAN,
            ..Default::default()
        };
        assert!(generate_synthetic(&bad).is_err());
    }

    #[test]
    fn noiseless_nearest_template_is_perfect() {
        let spec = SyntheticSpec {
            noise_sigma: 0.0,
            instances_per_class: 5,
            ..Default::default()
        };
        let ds = generate_synthetic(&spec).unwrap();
        let pred = nearest_template(&spec.templates(), ds.spectra());
        assert_eq!(pred, ds.labels());
    }

    #[test]
    fn csv_round_trip() {
        let ds = generate_synthetic(&SyntheticSpec {
            instances_per_class: 4,
            feature_count: 9,
            ..Default::default()
        })
        .unwrap();
        let mut buf = Vec::new();
        write_csv_to(&ds, &mut buf).unwrap();
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.labels(), ds.labels());
        assert_eq!(back.len(), ds.len());
        assert_eq!(back.spectra(), ds.spectra());
    }

    #[test]
    fn duplicate_ids_rejected() {
        let r = SpectralDataset::new(
            Array2::zeros((2, 1)),
            vec![0, 0],
            vec!["a".into()],
            vec!["x".into(), "x".into()],
        );
        assert!(r.is_err());
    }
}
