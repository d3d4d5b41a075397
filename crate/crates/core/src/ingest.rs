//! Survey microdata ingestion: CSV loading, equivalization, filtering of
//! nonpositive incomes and normalization by the weighted mean.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// One survey record in nominal currency units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawRecord {
    pub income: f64,
    pub weight: f64,
    pub household_size: u32,
    /// Line in the source file, for diagnostics.
    pub line: u64,
}

impl RawRecord {
    pub fn new(income: f64) -> Self {
        RawRecord {
            income,
            weight: 1.0,
            household_size: 1,
            line: 0,
        }
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_household_size(mut self, size: u32) -> Self {
        self.household_size = size;
        self
    }
}

/// How an optional column is located in the header.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "name", rename_all = "snake_case")]
pub enum ColumnSpec {
    /// Never read; the default value is used.
    Absent,
    /// Read if the header contains this name, default otherwise.
    IfPresent(String),
    /// Must be present.
    Required(String),
}

/// Column mapping by header name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub income: String,
    pub weight: ColumnSpec,
    pub household_size: ColumnSpec,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            income: "income".into(),
            weight: ColumnSpec::IfPresent("weight".into()),
            household_size: ColumnSpec::IfPresent("household_size".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessOptions {
    /// Divide income by the square root of household size.
    pub equivalize: bool,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions { equivalize: true }
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Vec<RawRecord>> {
    let file = std::fs::File::open(path.as_ref())?;
    read_csv(file, schema)
}

pub fn read_csv<R: Read>(reader: R, schema: &Schema) -> Result<Vec<RawRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);

    let income_idx = find(&schema.income)
        .ok_or_else(|| Error::Schema(format!("income column '{}' not found in header", schema.income)))?;
    let locate = |spec: &ColumnSpec| -> Result<Option<(usize, String)>> {
        match spec {
            ColumnSpec::Absent => Ok(None),
            ColumnSpec::IfPresent(name) => Ok(find(name).map(|i| (i, name.clone()))),
            ColumnSpec::Required(name) => find(name)
                .map(|i| Some((i, name.clone())))
                .ok_or_else(|| Error::Schema(format!("column '{name}' not found in header"))),
        }
    };
    let weight_col = locate(&schema.weight)?;
    let size_col = locate(&schema.household_size)?;

    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let cell = |idx: usize, name: &str| -> Result<&str> {
            rec.get(idx).ok_or_else(|| Error::Parse {
                row: line as usize,
                column: name.to_string(),
                value: String::new(),
                reason: "missing field".into(),
            })
        };
        let parse_err = |name: &str, value: &str, reason: &str| Error::Parse {
            row: line as usize,
            column: name.to_string(),
            value: value.to_string(),
            reason: reason.to_string(),
        };

        let raw = cell(income_idx, &schema.income)?;
        let income: f64 = raw
            .parse()
            .map_err(|_| parse_err(&schema.income, raw, "not a number"))?;
        if !income.is_finite() {
            return Err(parse_err(&schema.income, raw, "not finite"));
        }

        let weight = match &weight_col {
            None => 1.0,
            Some((idx, name)) => {
                let raw = cell(*idx, name)?;
                let w: f64 = raw.parse().map_err(|_| parse_err(name, raw, "not a number"))?;
                if !(w > 0.0) || !w.is_finite() {
                    return Err(parse_err(name, raw, "weight must be positive and finite"));
                }
                w
            }
        };

        let household_size = match &size_col {
            None => 1,
            Some((idx, name)) => {
                let raw = cell(*idx, name)?;
                let size = parse_size(raw).ok_or_else(|| parse_err(name, raw, "household size must be an integer >= 1"))?;
                size
            }
        };

        out.push(RawRecord {
            income,
            weight,
            household_size,
            line,
        });
    }
    Ok(out)
}

fn parse_size(raw: &str) -> Option<u32> {
    if let Ok(v) = raw.parse::<u32>() {
        return (v >= 1).then_some(v);
    }
    let v: f64 = raw.parse().ok()?;
    (v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64).then_some(v as u32)
}

/// Positive incomes sorted ascending with matching positive weights.
///
/// Samples produced by [`preprocess`] or [`WeightedSample::normalized`] have
/// weighted mean 1, which is what the fitting code expects.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    incomes: Vec<f64>,
    weights: Vec<f64>,
    raw_mean: f64,
    raw_mean_se: f64,
    n_raw: usize,
}

impl WeightedSample {
    /// Validates and sorts; no rescaling. `raw_mean` is the weighted mean of
    /// the values as given.
    pub fn new(incomes: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if incomes.is_empty() {
            return Err(Error::EmptySample("no observations".into()));
        }
        if incomes.len() != weights.len() {
            return domain(format!(
                "{} incomes but {} weights",
                incomes.len(),
                weights.len()
            ));
        }
        if let Some(x) = incomes.iter().find(|x| !(**x > 0.0) || !x.is_finite()) {
            return domain(format!("incomes must be positive and finite, got {x}"));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return domain(format!("weights must be positive and finite, got {w}"));
        }
        let n = incomes.len();
        let mut pairs: Vec<(f64, f64)> = incomes.into_iter().zip(weights).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (incomes, weights): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let (raw_mean, raw_mean_se) = weighted_mean_and_se(&incomes, &weights);
        Ok(WeightedSample {
            incomes,
            weights,
            raw_mean,
            raw_mean_se,
            n_raw: n,
        })
    }

    pub fn unweighted(incomes: Vec<f64>) -> Result<Self> {
        let w = vec![1.0; incomes.len()];
        WeightedSample::new(incomes, w)
    }

    /// Copy with every income divided by the weighted mean.
    pub fn normalized(&self) -> Self {
        let m = self.weighted_mean();
        WeightedSample {
            incomes: self.incomes.iter().map(|x| x / m).collect(),
            weights: self.weights.clone(),
            raw_mean: self.raw_mean,
            raw_mean_se: self.raw_mean_se,
            n_raw: self.n_raw,
        }
    }

    pub fn incomes(&self) -> &[f64] {
        &self.incomes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.incomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.incomes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        neumaier_sum(self.weights.iter().copied())
    }

    pub fn weighted_mean(&self) -> f64 {
        weighted_mean_and_se(&self.incomes, &self.weights).0
    }

    /// Weighted mean of the incomes before normalization, in currency units.
    pub fn raw_mean(&self) -> f64 {
        self.raw_mean
    }

    /// Standard error of [`raw_mean`](Self::raw_mean) (linearization estimator).
    pub fn raw_mean_se(&self) -> f64 {
        self.raw_mean_se
    }

    pub fn n_raw(&self) -> usize {
        self.n_raw
    }

    pub fn n_kept(&self) -> usize {
        self.incomes.len()
    }

    pub fn n_dropped(&self) -> usize {
        self.n_raw - self.n_kept()
    }

    pub fn is_unit_weighted(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }
}

/// Equivalize, drop nonpositive incomes, normalize to weighted mean 1.
pub fn preprocess(records: &[RawRecord], opts: &PreprocessOptions) -> Result<WeightedSample> {
    let n_raw = records.len();
    let mut incomes = Vec::with_capacity(n_raw);
    let mut weights = Vec::with_capacity(n_raw);
    for r in records {
        if !(r.weight > 0.0) || !r.weight.is_finite() {
            return domain(format!("line {}: weight must be positive, got {}", r.line, r.weight));
        }
        if r.household_size < 1 {
            return domain(format!("line {}: household size must be >= 1", r.line));
        }
        let x = if opts.equivalize {
            r.income / (r.household_size as f64).sqrt()
        } else {
            r.income
        };
        if x > 0.0 {
            incomes.push(x);
            weights.push(r.weight);
        }
    }
    if incomes.is_empty() {
        return Err(Error::EmptySample(format!(
            "all {n_raw} records have zero or negative income"
        )));
    }
    let mut sample = WeightedSample::new(incomes, weights)?.normalized();
    sample.n_raw = n_raw;
    let m = sample.weighted_mean();
    if (m - 1.0).abs() > 1e-12 {
        return Err(Error::Invariant(format!("normalized weighted mean is {m}, expected 1")));
    }
    Ok(sample)
}

fn weighted_mean_and_se(xs: &[f64], ws: &[f64]) -> (f64, f64) {
    let total = neumaier_sum(ws.iter().copied());
    let mean = neumaier_sum(xs.iter().zip(ws).map(|(x, w)| x * w)) / total;
    let ss = neumaier_sum(xs.iter().zip(ws).map(|(x, w)| (w * (x - mean)).powi(2)));
    (mean, ss.sqrt() / total)
}

/// Compensated summation.
pub(crate) fn neumaier_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}
