//! Error possibilities, total metrics, vulnerability scores and histograms.
//!
//! Possibilities and totals are exact [`Fraction`]s of counters. Scores are
//! produced in any [`Scalar`]; the histogram always bins exact scores so a
//! score on a bin boundary lands in the upper bin.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::campaign::ErrorMatrix;
use crate::scalar::{format_rational, parse_rational, Fraction, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("the campaign has zero runs")]
    ZeroRuns,
    #[error("output weights sum to zero")]
    ZeroWeightSum,
    #[error("weights line {line}: {reason}")]
    Weights { line: usize, reason: String },
    #[error("expected {expected} weights, found {found}")]
    WeightCount { expected: usize, found: usize },
    #[error("bin width must be in (0, 1]")]
    BinWidth,
}

/// How the per-cycle possibilities of one `(fault, output)` cell reduce to
/// a single number.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum TotalMode {
    /// Fraction of runs with at least one error at that output.
    #[default]
    AtLeastOnce,
    MaxCycle,
    MeanCycle,
}

impl TotalMode {
    pub fn as_str(self) -> &'static str {
        match self {
            TotalMode::AtLeastOnce => "at-least-once",
            TotalMode::MaxCycle => "max",
            TotalMode::MeanCycle => "mean",
        }
    }
}

impl fmt::Display for TotalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TotalMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "at-least-once" => Ok(TotalMode::AtLeastOnce),
            "max" => Ok(TotalMode::MaxCycle),
            "mean" => Ok(TotalMode::MeanCycle),
            _ => Err(format!("unknown total mode `{s}` (at-least-once, max, mean)")),
        }
    }
}

/// Non-negative per-output weights, in output order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weights(pub Vec<BigRational>);

impl Weights {
    pub fn uniform(outputs: usize) -> Self {
        Weights(vec![BigRational::one(); outputs])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> BigRational {
        self.0.iter().fold(BigRational::zero(), |a, w| a + w)
    }

    /// Fails when every weight is zero.
    pub fn check(&self) -> Result<(), MetricsError> {
        if self.sum().is_zero() {
            Err(MetricsError::ZeroWeightSum)
        } else {
            Ok(())
        }
    }

    /// Every weight multiplied by `k`.
    pub fn scaled(&self, k: &BigRational) -> Self {
        Weights(self.0.iter().map(|w| w * k).collect())
    }

    /// Reads `output,weight` lines. Outputs not listed keep weight 1; blank
    /// lines, `#` comments and an `output,weight` header are skipped.
    pub fn from_csv(text: &str, outputs: &[String]) -> Result<Self, MetricsError> {
        let mut w = Weights::uniform(outputs.len());
        let mut seen = vec![false; outputs.len()];
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |reason: String| MetricsError::Weights { line, reason };
            let l = raw.trim();
            if l.is_empty() || l.starts_with('#') || l.replace(' ', "") == "output,weight" {
                continue;
            }
            let (name, value) = l
                .rsplit_once(',')
                .ok_or_else(|| err("expected `output,weight`".into()))?;
            let name = name.trim();
            let b = outputs
                .iter()
                .position(|o| o == name)
                .ok_or_else(|| err(format!("unknown output `{name}`")))?;
            if std::mem::replace(&mut seen[b], true) {
                return Err(err(format!("output `{name}` listed twice")));
            }
            w.0[b] = parse_rational(value).ok_or_else(|| err(format!("`{}` is not a non-negative number", value.trim())))?;
        }
        Ok(w)
    }

    pub fn to_csv(&self, outputs: &[String]) -> String {
        let mut s = String::from("output,weight\n");
        for (o, w) in outputs.iter().zip(&self.0) {
            s.push_str(&format!("{o},{}\n", format_rational(w)));
        }
        s
    }
}

fn require_runs(m: &ErrorMatrix) -> Result<(), MetricsError> {
    if m.runs == 0 {
        Err(MetricsError::ZeroRuns)
    } else {
        Ok(())
    }
}

/// `counts / runs` for every cell, indexed `[fault][output][cycle]`.
pub fn error_possibility(m: &ErrorMatrix) -> Result<Vec<Vec<Vec<Fraction>>>, MetricsError> {
    require_runs(m)?;
    Ok((0..m.num_faults())
        .map(|f| {
            (0..m.num_outputs())
                .map(|b| m.cycle_counts(f, b).iter().map(|&c| Fraction::new(c, m.runs)).collect())
                .collect()
        })
        .collect())
}

/// Total metric per `[fault][output]`.
pub fn total_metric(m: &ErrorMatrix, mode: TotalMode) -> Result<Vec<Vec<Fraction>>, MetricsError> {
    require_runs(m)?;
    Ok((0..m.num_faults())
        .map(|f| {
            (0..m.num_outputs())
                .map(|b| {
                    let counts = m.cycle_counts(f, b);
                    match mode {
                        TotalMode::AtLeastOnce => Fraction::new(m.any_error(f, b), m.runs),
                        TotalMode::MaxCycle => Fraction::new(counts.iter().copied().max().unwrap_or(0), m.runs),
                        TotalMode::MeanCycle if counts.is_empty() => Fraction::zero(),
                        TotalMode::MeanCycle => {
                            Fraction::new(counts.iter().sum(), m.runs * counts.len() as u64)
                        }
                    }
                })
                .collect()
        })
        .collect())
}

/// `score[f] = sum_b w[b] * total[f][b] / sum_b w[b]`.
pub fn vulnerability_scores<T: Scalar>(total: &[Vec<Fraction>], weights: &Weights) -> Result<Vec<T>, MetricsError> {
    weights.check()?;
    let ws: Vec<T> = weights.0.iter().map(T::from_rational).collect();
    let denom = ws.iter().fold(T::zero(), |a, w| a + w.clone());
    total
        .iter()
        .map(|row| {
            if row.len() != ws.len() {
                return Err(MetricsError::WeightCount {
                    expected: row.len(),
                    found: ws.len(),
                });
            }
            let num = row
                .iter()
                .zip(&ws)
                .fold(T::zero(), |a, (t, w)| a + w.clone() * t.to::<T>());
            Ok(num / denom.clone())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bin {
    pub low: BigRational,
    pub high: BigRational,
    pub count: usize,
}

/// Bins of `width` over `[0, 1]`; the last bin is closed at 1.
pub fn histogram(scores: &[BigRational], width: &BigRational) -> Result<Vec<Bin>, MetricsError> {
    let one = BigRational::one();
    if *width <= BigRational::zero() || *width > one {
        return Err(MetricsError::BinWidth);
    }
    let n = (&one / width).ceil().to_integer();
    let n: usize = n.try_into().map_err(|_| MetricsError::BinWidth)?;
    let mut bins: Vec<Bin> = (0..n)
        .map(|i| {
            let low = width * BigRational::from_integer(BigInt::from(i));
            let high = (width * BigRational::from_integer(BigInt::from(i + 1))).min(one.clone());
            Bin { low, high, count: 0 }
        })
        .collect();
    for s in scores {
        let clamped = s.clone().max(BigRational::zero()).min(one.clone());
        let idx = (clamped / width).floor_usize().min(n - 1);
        bins[idx].count += 1;
    }
    Ok(bins)
}

/// Everything derived from one campaign.
#[derive(Clone, Debug, PartialEq)]
pub struct VulnReport<T> {
    pub runs: u64,
    pub cycles: usize,
    pub faults: Vec<String>,
    pub outputs: Vec<String>,
    pub mode: TotalMode,
    pub weights: Weights,
    pub bin_width: BigRational,
    pub possibility: Vec<Vec<Vec<Fraction>>>,
    pub total: Vec<Vec<Fraction>>,
    pub score: Vec<T>,
    pub histogram: Vec<Bin>,
}

impl<T: Scalar> VulnReport<T> {
    pub fn build(m: &ErrorMatrix, mode: TotalMode, weights: Weights, bin_width: BigRational) -> Result<Self, MetricsError> {
        if weights.len() != m.num_outputs() {
            return Err(MetricsError::WeightCount {
                expected: m.num_outputs(),
                found: weights.len(),
            });
        }
        let possibility = error_possibility(m)?;
        let total = total_metric(m, mode)?;
        let score = vulnerability_scores::<T>(&total, &weights)?;
        let exact = vulnerability_scores::<BigRational>(&total, &weights)?;
        let histogram = histogram(&exact, &bin_width)?;
        Ok(VulnReport {
            runs: m.runs,
            cycles: m.cycles,
            faults: m.faults.clone(),
            outputs: m.outputs.clone(),
            mode,
            weights,
            bin_width,
            possibility,
            total,
            score,
            histogram,
        })
    }

    /// `lut,output_bit,cycle_1..cycle_N,total`, one row per fault and output.
    pub fn table_csv(&self) -> String {
        let mut s = String::from("lut,output_bit");
        for c in 1..=self.cycles {
            s.push_str(&format!(",cycle_{c}"));
        }
        s.push_str(",total\n");
        for (f, lut) in self.faults.iter().enumerate() {
            for (b, out) in self.outputs.iter().enumerate() {
                s.push_str(&csv_field(lut));
                s.push(',');
                s.push_str(&csv_field(out));
                for p in &self.possibility[f][b] {
                    s.push_str(&format!(",{p}"));
                }
                s.push_str(&format!(",{}\n", self.total[f][b]));
            }
        }
        s
    }

    /// `bin_low,bin_high,count`.
    pub fn histogram_csv(&self) -> String {
        let mut s = String::from("bin_low,bin_high,count\n");
        for bin in &self.histogram {
            s.push_str(&format!(
                "{},{},{}\n",
                format_rational(&bin.low),
                format_rational(&bin.high),
                bin.count
            ));
        }
        s
    }

    /// The full report. `extra` fields (seed, stimulus provenance, ...) are
    /// copied in under `"config"`.
    pub fn to_json(&self, extra: serde_json::Map<String, Value>) -> Value {
        let frac = |p: &Fraction| p.to_f64();
        let mut config = serde_json::Map::new();
        config.insert("mode".into(), json!(self.mode.as_str()));
        config.insert("bin_width".into(), json!(format_rational(&self.bin_width)));
        config.insert(
            "weights".into(),
            Value::Object(
                self.outputs
                    .iter()
                    .zip(&self.weights.0)
                    .map(|(o, w)| (o.clone(), json!(format_rational(w))))
                    .collect(),
            ),
        );
        config.extend(extra);
        json!({
            "config": config,
            "runs": self.runs,
            "cycles": self.cycles,
            "faults": self.faults,
            "outputs": self.outputs,
            "possibility": self.possibility.iter()
                .map(|f| f.iter().map(|b| b.iter().map(frac).collect::<Vec<_>>()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "total": self.total.iter()
                .map(|f| f.iter().map(frac).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "score": self.score.iter().map(|s| s.to_f64()).collect::<Vec<_>>(),
            "histogram": self.histogram.iter()
                .map(|b| json!({
                    "low": format_rational(&b.low),
                    "high": format_rational(&b.high),
                    "count": b.count,
                }))
                .collect::<Vec<_>>(),
        })
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
