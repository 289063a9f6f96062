//! Tabular datasets: CSV ingestion, normalization, reward-model fit and
//! candidate sampling.
//!
//! Normalization statistics come from a *reference* split; the *sampling*
//! split is normalized with them, fitted by near-unregularized ridge
//! regression to obtain `μ*`, and then used as the candidate population.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{Environment, GroupSampler, Round};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::policies::RoundContexts;
use crate::rng::{derive_stream, StreamRng};

/// Regularization of the ground-truth reward-model fit.
pub const MU_STAR_RIDGE: f64 = 1e-8;

/// Raw CSV contents: header plus string cells with their 1-based line numbers.
#[derive(Debug, Clone)]
pub struct Table {
    pub source: String,
    pub headers: Vec<String>,
    pub rows: Vec<(usize, Vec<String>)>,
}

impl Table {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, &path.display().to_string())
    }

    pub fn from_reader<R: Read>(reader: R, source: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(reader);
        let headers = rdr
            .headers()?
            .iter()
            .map(|h| h.trim().to_string())
            .collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::Data {
                path: source.to_string(),
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            rows.push((line, rec.iter().map(str::to_string).collect()));
        }
        Ok(Self {
            source: source.to_string(),
            headers,
            rows,
        })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::config(format!("{}: missing column '{name}'", self.source)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RewardNoise {
    /// The observed reward is the row's recorded (normalized) target.
    RecordedTarget,
    /// The observed reward is the true reward plus `N(0, sigma²)`.
    Gaussian { sigma: f64 },
}

impl Default for RewardNoise {
    fn default() -> Self {
        RewardNoise::Gaussian { sigma: 0.0 }
    }
}

/// Column roles and preprocessing options of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetColumns {
    pub feature_columns: Vec<String>,
    pub group_column: String,
    pub target_column: String,
    /// Groups with fewer sampling-split rows are dropped.
    #[serde(default)]
    pub min_group_size: usize,
    #[serde(default)]
    pub reward_noise: RewardNoise,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingMode {
    /// Candidate `a` is always drawn from group `a`.
    FixedGroupPerArm,
    /// Candidates are drawn from the whole population with their group label.
    IidPool,
}

/// A normalized candidate population with its fitted reward model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedDataset {
    pub columns: DatasetColumns,
    /// Sorted group labels; group index `i` is `group_names[i]`.
    pub group_names: Vec<String>,
    pub feature_stats: Vec<ColumnStats>,
    pub target_stats: ColumnStats,
    pub fitted_mu: Vec<f64>,
    pub features: Vec<Vec<f64>>,
    pub groups: Vec<usize>,
    pub targets: Vec<f64>,
    #[serde(skip)]
    rows_by_group: Vec<Vec<usize>>,
}

struct ParsedRow {
    group: String,
    features: Vec<f64>,
    target: f64,
}

fn parse_cell(table: &Table, line: usize, column: &str, cell: &str) -> Result<f64> {
    cell.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::Data {
            path: table.source.clone(),
            line,
            message: format!("column '{column}': cannot parse '{cell}' as a number"),
        })
}

fn parse_rows(table: &Table, cols: &DatasetColumns) -> Result<Vec<ParsedRow>> {
    let feature_idx = cols
        .feature_columns
        .iter()
        .map(|c| table.column(c))
        .collect::<Result<Vec<_>>>()?;
    let group_idx = table.column(&cols.group_column)?;
    let target_idx = table.column(&cols.target_column)?;
    table
        .rows
        .iter()
        .map(|(line, cells)| {
            let cell = |i: usize| -> Result<&str> {
                cells.get(i).map(String::as_str).ok_or_else(|| Error::Data {
                    path: table.source.clone(),
                    line: *line,
                    message: format!(
                        "expected {} cells, found {}",
                        table.headers.len(),
                        cells.len()
                    ),
                })
            };
            let features = feature_idx
                .iter()
                .zip(&cols.feature_columns)
                .map(|(&i, name)| parse_cell(table, *line, name, cell(i)?))
                .collect::<Result<Vec<_>>>()?;
            let target = parse_cell(table, *line, &cols.target_column, cell(target_idx)?)?;
            Ok(ParsedRow {
                group: cell(group_idx)?.trim().to_string(),
                features,
                target,
            })
        })
        .collect()
}

fn column_stats(values: impl Iterator<Item = f64> + Clone) -> ColumnStats {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    ColumnStats {
        mean,
        std: var.sqrt(),
    }
}

fn ridge_fit(features: &[Vec<f64>], targets: &[f64], lambda: f64) -> Result<Vec<f64>> {
    let d = features.first().map_or(0, Vec::len);
    let mut gram = DMatrix::<f64>::identity(d, d) * lambda;
    let mut rhs = DVector::<f64>::zeros(d);
    for (x, &y) in features.iter().zip(targets) {
        let x = DVector::from_column_slice(x);
        gram.ger(1.0, &x, &x, 1.0);
        rhs.axpy(y, &x, 1.0);
    }
    let chol = gram.cholesky().ok_or_else(|| {
        Error::Numerical("reward-model Gram matrix is not positive definite".into())
    })?;
    Ok(chol.solve(&rhs).as_slice().to_vec())
}

/// Normalizes both splits with reference statistics and fits `μ*` on the
/// sampling split.
pub fn dataset_prepare(
    reference: &Table,
    sampling: &Table,
    columns: &DatasetColumns,
) -> Result<PreparedDataset> {
    if columns.feature_columns.is_empty() {
        return Err(Error::config("at least one feature column is required"));
    }
    if let RewardNoise::Gaussian { sigma } = columns.reward_noise {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::config(format!(
                "reward noise sigma must be non-negative, got {sigma}"
            )));
        }
    }
    let sampling_rows = parse_rows(sampling, columns)?;
    let reference_rows = parse_rows(reference, columns)?;

    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &sampling_rows {
        *counts.entry(r.group.as_str()).or_default() += 1;
    }
    let group_names: Vec<String> = counts
        .iter()
        .filter(|(_, &n)| n >= columns.min_group_size.max(1))
        .map(|(g, _)| g.to_string())
        .collect();
    if group_names.is_empty() {
        return Err(Error::config(format!(
            "no group of column '{}' has at least {} rows",
            columns.group_column, columns.min_group_size
        )));
    }
    let index: BTreeMap<&str, usize> = group_names
        .iter()
        .enumerate()
        .map(|(i, g)| (g.as_str(), i))
        .collect();

    let reference_rows: Vec<&ParsedRow> = reference_rows
        .iter()
        .filter(|r| index.contains_key(r.group.as_str()))
        .collect();
    if reference_rows.is_empty() {
        return Err(Error::config(format!(
            "{}: no rows from the retained groups",
            reference.source
        )));
    }

    let feature_stats = (0..columns.feature_columns.len())
        .map(|j| {
            let s = column_stats(reference_rows.iter().map(move |r| r.features[j]));
            if s.std == 0.0 {
                Err(Error::config(format!(
                    "feature column '{}' has zero variance in the reference split",
                    columns.feature_columns[j]
                )))
            } else {
                Ok(s)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut target_stats = column_stats(reference_rows.iter().map(|r| r.target));
    if target_stats.std == 0.0 {
        // a constant target is only centered
        target_stats.std = 1.0;
    }

    let mut features = Vec::new();
    let mut groups = Vec::new();
    let mut targets = Vec::new();
    for r in &sampling_rows {
        let Some(&g) = index.get(r.group.as_str()) else {
            continue;
        };
        features.push(
            r.features
                .iter()
                .zip(&feature_stats)
                .map(|(v, s)| (v - s.mean) / s.std)
                .collect::<Vec<_>>(),
        );
        groups.push(g);
        targets.push((r.target - target_stats.mean) / target_stats.std);
    }
    let fitted_mu = ridge_fit(&features, &targets, MU_STAR_RIDGE)?;

    let mut data = PreparedDataset {
        columns: columns.clone(),
        group_names,
        feature_stats,
        target_stats,
        fitted_mu,
        features,
        groups,
        targets,
        rows_by_group: Vec::new(),
    };
    data.index_groups();
    Ok(data)
}

impl PreparedDataset {
    fn index_groups(&mut self) {
        let mut by_group = vec![Vec::new(); self.group_names.len()];
        for (i, &g) in self.groups.iter().enumerate() {
            by_group[g].push(i);
        }
        self.rows_by_group = by_group;
    }

    pub fn num_rows(&self) -> usize {
        self.features.len()
    }

    pub fn group_size(&self, group: usize) -> usize {
        self.rows_by_group[group].len()
    }

    pub fn save_bundle(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn load_bundle(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut data: Self = serde_json::from_reader(std::io::BufReader::new(file))?;
        let d = data.fitted_mu.len();
        let n = data.features.len();
        if data.groups.len() != n
            || data.targets.len() != n
            || data.features.iter().any(|x| x.len() != d)
            || data.groups.iter().any(|&g| g >= data.group_names.len())
        {
            return Err(Error::config(format!(
                "{}: inconsistent dataset bundle",
                path.display()
            )));
        }
        data.index_groups();
        Ok(data)
    }

    fn true_reward(&self, row: usize) -> f64 {
        dot(&self.fitted_mu, &self.features[row])
    }
}

impl GroupSampler for PreparedDataset {
    fn num_groups(&self) -> usize {
        self.group_names.len()
    }

    fn dim(&self) -> usize {
        self.fitted_mu.len()
    }

    fn mu_star(&self) -> &[f64] {
        &self.fitted_mu
    }

    fn group_names(&self) -> Vec<String> {
        self.group_names.clone()
    }

    fn sample_group_context(&self, group: usize, rng: &mut dyn RngCore) -> Vec<f64> {
        let rows = &self.rows_by_group[group];
        self.features[rows[rng.random_range(0..rows.len())]].clone()
    }

    fn sample_group_reward(&self, group: usize, rng: &mut dyn RngCore) -> f64 {
        let rows = &self.rows_by_group[group];
        self.true_reward(rows[rng.random_range(0..rows.len())])
    }
}

/// Draws candidates from a prepared dataset, with replacement.
pub struct DatasetEnv {
    data: Arc<PreparedDataset>,
    mode: SamplingMode,
    num_arms: usize,
    rng: StreamRng,
}

impl DatasetEnv {
    pub fn new(
        data: Arc<PreparedDataset>,
        mode: SamplingMode,
        num_arms: usize,
        labels: &[&str],
    ) -> Result<Self> {
        if num_arms == 0 {
            return Err(Error::config("num_arms must be at least 1"));
        }
        if mode == SamplingMode::FixedGroupPerArm && num_arms != data.num_groups() {
            return Err(Error::config(format!(
                "fixed_group_per_arm needs num_arms = number of groups ({}), got {num_arms}",
                data.num_groups()
            )));
        }
        if let Some(g) = (0..data.num_groups()).find(|&g| data.group_size(g) == 0) {
            return Err(Error::config(format!(
                "group '{}' has no rows",
                data.group_names[g]
            )));
        }
        let mut l = labels.to_vec();
        l.push("environment");
        Ok(Self {
            data,
            mode,
            num_arms,
            rng: derive_stream(&l),
        })
    }
}

impl Environment for DatasetEnv {
    fn num_arms(&self) -> usize {
        self.num_arms
    }

    fn next_round(&mut self, round: usize) -> Round {
        let data = &self.data;
        let rows: Vec<usize> = match self.mode {
            SamplingMode::FixedGroupPerArm => (0..self.num_arms)
                .map(|a| {
                    let g = &data.rows_by_group[a];
                    g[self.rng.random_range(0..g.len())]
                })
                .collect(),
            SamplingMode::IidPool => (0..self.num_arms)
                .map(|_| self.rng.random_range(0..data.num_rows()))
                .collect(),
        };
        let true_rewards: Vec<f64> = rows.iter().map(|&r| data.true_reward(r)).collect();
        let noisy_rewards = rows
            .iter()
            .zip(&true_rewards)
            .map(|(&row, &r)| {
                let xi: f64 = StandardNormal.sample(&mut self.rng);
                match data.columns.reward_noise {
                    RewardNoise::RecordedTarget => data.targets[row],
                    RewardNoise::Gaussian { sigma } => r + sigma * xi,
                }
            })
            .collect();
        let groups = match self.mode {
            SamplingMode::FixedGroupPerArm => None,
            SamplingMode::IidPool => Some(rows.iter().map(|&r| data.groups[r]).collect()),
        };
        let contexts = rows.iter().map(|&r| data.features[r].clone()).collect();
        Round {
            contexts: RoundContexts::new(round, contexts, groups).expect("well-formed round"),
            true_rewards,
            noisy_rewards,
        }
    }
}
