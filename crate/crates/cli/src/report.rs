//! Per-image rows and their aggregate, written as CSV and JSON.
//!
//! CSV columns, in order:
//! `file,method,status,brisque,niqe,piqe,piqe_degenerate,mean_brightness,std_dev,entropy,error,enhance_ms`.
//! Numbers carry four decimals; absent values are empty cells. Rows are
//! sorted by file, then method name.

use std::io::Write;

use serde::Serialize;
use sena_core::iqa::{wilcoxon_signed_rank, QualityReport, WilcoxonResult};

use crate::error::Result;
use crate::method::Method;

pub const CSV_COLUMNS: [&str; 12] = [
    "file",
    "method",
    "status",
    "brisque",
    "niqe",
    "piqe",
    "piqe_degenerate",
    "mean_brightness",
    "std_dev",
    "entropy",
    "error",
    "enhance_ms",
];

/// One image processed by one method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    /// Path relative to the input directory, `/`-separated.
    pub file: String,
    pub method: Method,
    /// Metrics of the written output, or why the row failed.
    #[serde(flatten, serialize_with = "outcome::serialize")]
    pub outcome: std::result::Result<QualityReport, String>,
}

mod outcome {
    use serde::ser::SerializeMap;
    use serde::Serializer;

    use super::QualityReport;

    pub fn serialize<S: Serializer>(
        v: &std::result::Result<QualityReport, String>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(2))?;
        match v {
            Ok(r) => {
                map.serialize_entry("status", "ok")?;
                map.serialize_entry("metrics", r)?;
            }
            Err(e) => {
                map.serialize_entry("status", "error")?;
                map.serialize_entry("error", e)?;
            }
        }
        map.end()
    }
}

impl Row {
    pub fn is_ok(&self) -> bool {
        self.outcome.is_ok()
    }

    pub fn metrics(&self) -> Option<&QualityReport> {
        self.outcome.as_ref().ok()
    }
}

/// The metrics compared across methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Brisque,
    Niqe,
    Piqe,
    MeanBrightness,
    StdDev,
    Entropy,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Brisque,
        Metric::Niqe,
        Metric::Piqe,
        Metric::MeanBrightness,
        Metric::StdDev,
        Metric::Entropy,
    ];

    pub fn of(self, r: &QualityReport) -> Option<f64> {
        match self {
            Metric::Brisque => r.brisque,
            Metric::Niqe => r.niqe,
            Metric::Piqe => Some(r.piqe),
            Metric::MeanBrightness => Some(r.mean_brightness),
            Metric::StdDev => Some(r.std_dev),
            Metric::Entropy => Some(r.entropy),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricMeans {
    pub brisque: Option<f64>,
    pub niqe: Option<f64>,
    pub piqe: Option<f64>,
    pub mean_brightness: Option<f64>,
    pub std_dev: Option<f64>,
    pub entropy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub median_ms: f64,
    pub p95_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub succeeded: usize,
    pub failed: usize,
    pub means: MetricMeans,
    pub timing: Option<Timing>,
}

/// Paired signed-rank comparison of one metric between two methods.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairedComparison {
    pub metric: Metric,
    pub first: Method,
    pub second: Method,
    pub pairs: usize,
    pub result: Option<WilcoxonResult>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateReport {
    pub rows: Vec<Row>,
    pub methods: Vec<MethodSummary>,
    pub comparisons: Vec<PairedComparison>,
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Nearest-rank percentile of an ascending slice.
fn nearest_rank(sorted: &[f64], pct: f64) -> f64 {
    let rank = ((pct / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

impl AggregateReport {
    /// Sorts the rows canonically and derives the summaries. `methods` fixes
    /// the order of summaries and comparison pairs.
    pub fn build(mut rows: Vec<Row>, methods: &[Method]) -> Self {
        rows.sort_by(|a, b| (&a.file, a.method.name()).cmp(&(&b.file, b.method.name())));

        let summaries = methods
            .iter()
            .map(|&m| {
                let mine: Vec<&QualityReport> =
                    rows.iter().filter(|r| r.method == m).filter_map(Row::metrics).collect();
                let failed = rows.iter().filter(|r| r.method == m && !r.is_ok()).count();
                let avg = |metric: Metric| {
                    mean(&mine.iter().filter_map(|r| metric.of(r)).collect::<Vec<_>>())
                };
                let mut times: Vec<f64> = mine.iter().filter_map(|r| r.enhance_millis).collect();
                times.sort_by(f64::total_cmp);
                MethodSummary {
                    method: m,
                    succeeded: mine.len(),
                    failed,
                    means: MetricMeans {
                        brisque: avg(Metric::Brisque),
                        niqe: avg(Metric::Niqe),
                        piqe: avg(Metric::Piqe),
                        mean_brightness: avg(Metric::MeanBrightness),
                        std_dev: avg(Metric::StdDev),
                        entropy: avg(Metric::Entropy),
                    },
                    timing: (!times.is_empty()).then(|| Timing {
                        median_ms: nearest_rank(&times, 50.0),
                        p95_ms: nearest_rank(&times, 95.0),
                    }),
                }
            })
            .collect();

        let mut comparisons = Vec::new();
        for (i, &first) in methods.iter().enumerate() {
            for &second in &methods[i + 1..] {
                for metric in Metric::ALL {
                    comparisons.push(compare(&rows, metric, first, second));
                }
            }
        }

        Self {
            rows,
            methods: summaries,
            comparisons,
        }
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }

    pub fn write_csv<W: Write>(&self, out: W, include_timing: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_COLUMNS)?;
        let num = |v: Option<f64>| v.map(|v| format!("{v:.4}")).unwrap_or_default();
        for row in &self.rows {
            let mut rec = vec![row.file.clone(), row.method.name().to_string()];
            match &row.outcome {
                Ok(r) => {
                    rec.push("ok".into());
                    rec.push(num(r.brisque));
                    rec.push(num(r.niqe));
                    rec.push(num(Some(r.piqe)));
                    rec.push(r.piqe_degenerate.to_string());
                    rec.push(num(Some(r.mean_brightness)));
                    rec.push(num(Some(r.std_dev)));
                    rec.push(num(Some(r.entropy)));
                    rec.push(String::new());
                    rec.push(if include_timing { num(r.enhance_millis) } else { String::new() });
                }
                Err(e) => {
                    rec.push("error".into());
                    rec.extend(std::iter::repeat_n(String::new(), 7));
                    rec.push(e.clone());
                    rec.push(String::new());
                }
            }
            w.write_record(&rec)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn csv_string(&self, include_timing: bool) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, include_timing).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is UTF-8")
    }
}

fn compare(rows: &[Row], metric: Metric, first: Method, second: Method) -> PairedComparison {
    let value = |file: &str, m: Method| {
        rows.iter()
            .find(|r| r.file == file && r.method == m)
            .and_then(Row::metrics)
            .and_then(|r| metric.of(r))
    };
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for r in rows.iter().filter(|r| r.method == first) {
        if let (Some(x), Some(y)) = (value(&r.file, first), value(&r.file, second)) {
            a.push(x);
            b.push(y);
        }
    }
    let (result, note) = match wilcoxon_signed_rank(&a, &b) {
        Ok(r) => (Some(r), None),
        Err(e) => (None, Some(e.to_string())),
    };
    PairedComparison {
        metric,
        first,
        second,
        pairs: a.len(),
        result,
        note,
    }
}
