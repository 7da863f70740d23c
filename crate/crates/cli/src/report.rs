//! Result envelopes and their companion CSV tables.

use std::path::{Path, PathBuf};

use locband_core::bandwidth::BandwidthGrid;
use locband_core::harness::{ChernoffReport, ConcentrationReport, CoveringReport, PoissonizationReport, Series, StudyReport};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::io::write_table;

/// Everything a run emits: tool identity, the configuration it ran with,
/// the seed, the payload and when it was produced. Only `timestamp` and
/// `wall_time_s` vary between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultEnvelope<T> {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub payload: T,
    /// ISO-8601, UTC.
    pub timestamp: String,
    pub wall_time_s: f64,
}

impl<T: Serialize> ResultEnvelope<T> {
    pub fn new(command: &str, config: serde_json::Value, seed: u64, payload: T, wall_time_s: f64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config,
            seed,
            payload,
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            wall_time_s,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("payloads serialize to JSON")
    }
}

pub struct Table {
    pub name: &'static str,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

/// Flat tables derived from a payload; column orders are part of the
/// output format.
pub trait Tables {
    fn tables(&self) -> Vec<Table> {
        Vec::new()
    }
}

fn num(v: f64) -> String {
    v.to_string()
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn series_tables(series: &[Series]) -> Vec<Table> {
    let rows = series
        .iter()
        .flat_map(|s| s.rows.iter().map(move |r| vec![s.name.clone(), r.n.to_string(), r.rep.to_string(), num(r.value)]))
        .collect();
    let summary = series
        .iter()
        .flat_map(|s| {
            s.summaries.iter().map(move |m| {
                let x = &m.summary;
                vec![
                    s.name.clone(),
                    m.n.to_string(),
                    x.count.to_string(),
                    num(x.mean),
                    num(x.median),
                    num(x.q05),
                    num(x.q25),
                    num(x.q75),
                    num(x.q95),
                    num(x.sd),
                    num(x.se),
                    opt(s.target),
                ]
            })
        })
        .collect();
    vec![
        Table { name: "rows", header: vec!["series", "n", "rep", "value"], rows },
        Table {
            name: "summary",
            header: vec!["series", "n", "count", "mean", "median", "q05", "q25", "q75", "q95", "sd", "se", "target"],
            rows: summary,
        },
    ]
}

impl Tables for StudyReport {
    fn tables(&self) -> Vec<Table> {
        series_tables(&self.series)
    }
}

impl Tables for PoissonizationReport {
    fn tables(&self) -> Vec<Table> {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    num(r.h),
                    r.anchors.to_string(),
                    num(r.threshold),
                    num(r.freq_g),
                    num(r.freq_p),
                    opt(r.ratio),
                    num(r.se),
                    r.holds.to_string(),
                ]
            })
            .collect();
        let mut t = vec![Table {
            name: "gap",
            header: vec!["n", "h", "anchors", "threshold", "freq_g", "freq_p", "ratio", "se", "holds"],
            rows,
        }];
        t.extend(series_tables(&self.series));
        t
    }
}

impl Tables for ConcentrationReport {
    fn tables(&self) -> Vec<Table> {
        let ratios = &self.params.ratios;
        let mut levels = Vec::new();
        let mut fits = Vec::new();
        for s in &self.series {
            for l in &s.levels {
                for (i, r) in ratios.iter().enumerate() {
                    levels.push(vec![
                        s.n.to_string(),
                        num(l.h),
                        num(l.log_inv_h),
                        num(l.tau),
                        num(*r),
                        num(l.thresholds[i]),
                        l.exceedances[i].to_string(),
                        num(l.p_hat[i]),
                        l.censored[i].to_string(),
                    ]);
                }
            }
            for (r, f) in ratios.iter().zip(&s.fits) {
                fits.push(vec![
                    s.n.to_string(),
                    num(*r),
                    opt(f.as_ref().map(|f| f.slope)),
                    opt(f.as_ref().map(|f| f.intercept)),
                    opt(f.as_ref().map(|f| f.r_squared)),
                    f.as_ref().map(|f| f.points.to_string()).unwrap_or_default(),
                ]);
            }
        }
        vec![
            Table {
                name: "levels",
                header: vec!["n", "h", "log_inv_h", "tau", "ratio", "threshold", "exceedances", "p_hat", "censored"],
                rows: levels,
            },
            Table { name: "fits", header: vec!["n", "ratio", "slope", "intercept", "r_squared", "points"], rows: fits },
        ]
    }
}

impl Tables for ChernoffReport {
    fn tables(&self) -> Vec<Table> {
        let rows = self
            .rows
            .iter()
            .map(|r| vec![r.n.to_string(), num(r.exact), num(r.exact_gamma), num(r.bound), r.holds.to_string()])
            .collect();
        vec![Table { name: "tails", header: vec!["n", "exact", "exact_gamma", "bound", "holds"], rows }]
    }
}

impl Tables for CoveringReport {
    fn tables(&self) -> Vec<Table> {
        let rows = self
            .rows
            .iter()
            .map(|r| vec![num(r.eps), r.greedy.to_string(), r.n_hat.to_string(), opt(r.declared_bound)])
            .collect();
        vec![Table { name: "packing", header: vec!["eps", "greedy", "n_hat", "declared_bound"], rows }]
    }
}

impl Tables for BandwidthGrid {
    fn tables(&self) -> Vec<Table> {
        let rows = self.levels.iter().enumerate().map(|(i, h)| vec![i.to_string(), num(*h)]).collect();
        vec![Table { name: "levels", header: vec!["level", "h"], rows }]
    }
}

impl Tables for locband_core::process::ProcessEvaluation {}
impl Tables for locband_core::kde::KdeEstimate {}
impl Tables for locband_core::kde::ConfidenceBand {}
impl Tables for crate::SelectorsPayload {}

/// `out.json` gets companions `out.<table>.csv`.
pub fn table_path(out: &Path, name: &str) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
    out.with_file_name(format!("{stem}.{name}.csv"))
}

/// Writes the JSON envelope to `out` and one CSV per payload table next to it.
pub fn emit_report<T: Serialize + Tables>(envelope: &ResultEnvelope<T>, out: &Path) -> Result<(), CliError> {
    std::fs::write(out, envelope.to_json() + "\n").map_err(|e| CliError::from_io(out, e))?;
    for t in envelope.payload.tables() {
        write_table(&table_path(out, t.name), &t.header, &t.rows)?;
    }
    Ok(())
}

/// The payload alone, as written inside the envelope.
pub fn payload_json<T: Serialize>(payload: &T) -> String {
    serde_json::to_string_pretty(payload).expect("payloads serialize to JSON")
}
