//! Tidy curve tables and the manifest that describes them.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

use super::aggregate::{AggregateCurve, CurvePoint, VarianceReport};
use super::experiment::AgentRecord;

pub const CURVES_CSV: &str = "curves.csv";
pub const CURVES_JSON: &str = "curves.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Commit the binary was built from, or `unknown` outside a git checkout.
pub fn commit_hash() -> &'static str {
    option_env!("CLMADDPG_COMMIT").unwrap_or("unknown")
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum PlotFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for PlotFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(PlotFormat::Csv),
            "json" => Ok(PlotFormat::Json),
            other => Err(Error::Usage(format!(
                "unknown plot format '{other}' (csv or json)"
            ))),
        }
    }
}

/// One labelled curve, e.g. `CL-MA 1e-3`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelledCurve {
    pub label: String,
    pub curve: AggregateCurve,
}

/// Row of the long-format table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub episode: usize,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub label: String,
}

pub fn curve_rows(curves: &[LabelledCurve]) -> Vec<CurveRow> {
    curves
        .iter()
        .flat_map(|c| {
            c.curve.points.iter().map(move |p: &CurvePoint| CurveRow {
                episode: p.episode,
                mean: p.mean,
                ci_low: p.ci_low(),
                ci_high: p.ci_high(),
                label: c.label.clone(),
            })
        })
        .collect()
}

/// Where a variant finished, for the informational ordering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalStanding {
    pub label: String,
    /// Mean over the last curve point's seeds.
    pub final_mean: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CurveSource {
    pub label: String,
    /// Agent whose reward column the curve follows.
    pub agent: usize,
    pub agents: Vec<AgentRecord>,
}

/// Self-describing companion to the curve table.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub curves: Vec<CurveSource>,
    pub betas: Vec<f64>,
    pub seeds: Vec<u64>,
    pub window: usize,
    pub confidence: f64,
    pub commit: String,
    /// Best to worst by final rolling mean. Informational only.
    pub ordering: Vec<FinalStanding>,
    /// Across-seed reward variance per curve. Informational only.
    pub variance: Vec<VarianceReport>,
}

pub fn final_ordering(curves: &[LabelledCurve]) -> Vec<FinalStanding> {
    let mut standings: Vec<FinalStanding> = curves
        .iter()
        .filter_map(|c| {
            c.curve.points.last().map(|p| FinalStanding {
                label: c.label.clone(),
                final_mean: p.mean,
            })
        })
        .collect();
    standings.sort_by(|a, b| b.final_mean.total_cmp(&a.final_mean));
    standings
}

pub fn write_curves_csv(out: impl Write, rows: &[CurveRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["episode", "mean", "ci_low", "ci_high", "label"])?;
    for r in rows {
        w.write_record([
            r.episode.to_string(),
            r.mean.to_string(),
            r.ci_low.to_string(),
            r.ci_high.to_string(),
            r.label.clone(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))
}

pub fn read_curves_csv(input: impl Read) -> Result<Vec<CurveRow>> {
    let mut r = csv::ReaderBuilder::new().from_reader(input);
    let rows = r
        .deserialize()
        .collect::<std::result::Result<Vec<CurveRow>, _>>()?;
    Ok(rows)
}

/// Writes the curve table (`curves.csv` or `curves.json`) and
/// `manifest.json` into `dir`, returning the paths written.
pub fn emit_plot_data(
    dir: &Path,
    curves: &[LabelledCurve],
    manifest: &Manifest,
    format: PlotFormat,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let rows = curve_rows(curves);
    let table = match format {
        PlotFormat::Csv => {
            let path = dir.join(CURVES_CSV);
            let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
            write_curves_csv(BufWriter::new(file), &rows)?;
            path
        }
        PlotFormat::Json => {
            let path = dir.join(CURVES_JSON);
            fs::write(&path, serde_json::to_vec_pretty(&rows)?).map_err(|e| Error::io(&path, e))?;
            path
        }
    };
    let manifest_path = dir.join(MANIFEST_FILE);
    let mut json = serde_json::to_vec_pretty(manifest)?;
    json.push(b'\n');
    fs::write(&manifest_path, json).map_err(|e| Error::io(&manifest_path, e))?;
    Ok(vec![table, manifest_path])
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_slice(&bytes)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(label: &str, means: &[f64]) -> LabelledCurve {
        LabelledCurve {
            label: label.into(),
            curve: AggregateCurve {
                points: means
                    .iter()
                    .enumerate()
                    .map(|(k, &m)| CurvePoint {
                        episode: k + 5,
                        mean: m,
                        half_width: 0.5,
                    })
                    .collect(),
            },
        }
    }

    #[test]
    fn rows_round_trip_and_bracket_the_mean() {
        let curves = [
            curve("MADDPG", &[1.0, 2.0]),
            curve("CL-MA 1e-3", &[-0.1, 0.3]),
        ];
        let rows = curve_rows(&curves);
        assert_eq!(rows.len(), 4);
        assert!(rows
            .iter()
            .all(|r| r.ci_low <= r.mean && r.mean <= r.ci_high));
        let mut bytes = Vec::new();
        write_curves_csv(&mut bytes, &rows).unwrap();
        assert_eq!(read_curves_csv(bytes.as_slice()).unwrap(), rows);
    }

    #[test]
    fn ordering_is_by_final_mean() {
        let curves = [
            curve("a", &[0.0, 1.0]),
            curve("b", &[5.0, 3.0]),
            curve("c", &[0.0, -2.0]),
        ];
        let labels: Vec<_> = final_ordering(&curves)
            .into_iter()
            .map(|s| s.label)
            .collect();
        assert_eq!(labels, ["b", "a", "c"]);
    }

    #[test]
    fn format_names() {
        assert_eq!("json".parse::<PlotFormat>().unwrap(), PlotFormat::Json);
        assert!("png".parse::<PlotFormat>().is_err());
    }
}
