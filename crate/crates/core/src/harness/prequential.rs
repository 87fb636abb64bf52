//! Interleaved test-then-train evaluation and the batch-size x fraction grid.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::engine::{EngineConfig, FiresEngine, SelectionMask};
use crate::error::{FiresError, Result};
use crate::exec::map_range;
use crate::stability::StabilityWindow;

use super::data::{Dataset, StreamBatch};
use super::perceptron::Perceptron;

/// Default number of masks the stability window holds.
pub const DEFAULT_WINDOW: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: u64,
    pub acc: f64,
    pub stability: Option<f64>,
    pub fs_ms: f64,
    pub train_ms: f64,
    pub selected: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub n_steps: usize,
    pub mean_acc: f64,
    pub acc_var: f64,
    pub mean_stability: Option<f64>,
    pub mean_fs_ms: f64,
    pub mean_train_ms: f64,
    pub mean_step_ms: f64,
}

impl RunSummary {
    pub fn from_records(records: &[StepRecord]) -> RunSummary {
        let n = records.len();
        let mean = |f: &dyn Fn(&StepRecord) -> f64| {
            if n == 0 {
                0.0
            } else {
                records.iter().map(f).sum::<f64>() / n as f64
            }
        };
        let mean_acc = mean(&|r| r.acc);
        let acc_var = mean(&|r| (r.acc - mean_acc).powi(2));
        let stab: Vec<f64> = records.iter().filter_map(|r| r.stability).collect();
        let mean_stability =
            (!stab.is_empty()).then(|| stab.iter().sum::<f64>() / stab.len() as f64);
        let mean_fs_ms = mean(&|r| r.fs_ms);
        let mean_train_ms = mean(&|r| r.train_ms);
        RunSummary {
            n_steps: n,
            mean_acc,
            acc_var,
            mean_stability,
            mean_fs_ms,
            mean_train_ms,
            mean_step_ms: mean_fs_ms + mean_train_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub records: Vec<StepRecord>,
    pub summary: RunSummary,
}

impl RunMetrics {
    /// Records with the wall-clock fields zeroed, for reproducibility checks.
    pub fn without_timings(&self) -> Vec<StepRecord> {
        self.records
            .iter()
            .map(|r| StepRecord {
                fs_ms: 0.0,
                train_ms: 0.0,
                ..r.clone()
            })
            .collect()
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Runs the prequential loop over `stream`.
///
/// Each batch is scored by the perceptron on the columns selected at the
/// previous step (all columns at the first step), then the selector updates
/// on the full batch, then the perceptron trains on the masked batch.
pub fn prequential_run<I>(stream: I, engine_cfg: &EngineConfig, window: usize) -> Result<RunMetrics>
where
    I: IntoIterator<Item = StreamBatch>,
{
    let mut stream = stream.into_iter().peekable();
    let n_features = stream
        .peek()
        .map(StreamBatch::n_features)
        .ok_or_else(|| FiresError::Data("stream has no batches".into()))?;
    let mut engine = FiresEngine::new(engine_cfg.clone(), n_features)?;
    let mut window = StabilityWindow::new(window, n_features, engine_cfg.n_selected)?;
    let mut learner = Perceptron::new(n_features);
    let mut mask = SelectionMask::all(n_features);
    let mut records = Vec::new();

    for batch in stream {
        let keep = mask.indicator();
        let test = batch.masked(&keep);
        let acc = learner.accuracy(&test);

        let start = Instant::now();
        let (next, _) = engine.step(&batch)?;
        let fs_ms = elapsed_ms(start);

        let start = Instant::now();
        learner.train(&test)?;
        let train_ms = elapsed_ms(start);

        window.push(&next)?;
        records.push(StepRecord {
            t: batch.t,
            acc,
            stability: window.stability(),
            fs_ms,
            train_ms,
            selected: next.selected().to_vec(),
        });
        mask = next;
    }
    let summary = RunSummary::from_records(&records);
    Ok(RunMetrics { records, summary })
}

/// `M = round(fraction * J)`, kept within `1..=J`.
pub fn selected_count(fraction: f64, n_features: usize) -> Result<usize> {
    if !(fraction.is_finite() && fraction > 0.0 && fraction <= 1.0) {
        return Err(FiresError::InvalidConfig(format!(
            "selected fraction must lie in (0, 1], got {fraction}"
        )));
    }
    Ok(((fraction * n_features as f64).round() as usize).clamp(1, n_features))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub batch_size: usize,
    pub fraction: f64,
    pub n_selected: usize,
    pub metrics: RunMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSummary {
    pub n_cells: usize,
    pub mean_acc: f64,
    pub mean_stability: Option<f64>,
    pub mean_step_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub cells: Vec<GridCell>,
    pub summary: GridSummary,
}

/// One prequential run per (batch size, fraction) pair. Cells are independent
/// and run concurrently under parallel execution; the summary holds
/// unweighted means over cells.
pub fn grid_run(
    data: &Dataset,
    batch_sizes: &[usize],
    fractions: &[f64],
    engine_cfg: &EngineConfig,
    window: usize,
) -> Result<GridResult> {
    if batch_sizes.is_empty() || fractions.is_empty() {
        return Err(FiresError::InvalidConfig(
            "grid needs at least one batch size and one fraction".into(),
        ));
    }
    if let Some(&b) = batch_sizes.iter().find(|&&b| b == 0) {
        return Err(FiresError::InvalidConfig(format!(
            "batch size must be positive, got {b}"
        )));
    }
    let j = data.n_features();
    let mut specs = Vec::new();
    for &b in batch_sizes {
        for &f in fractions {
            specs.push((b, f, selected_count(f, j)?));
        }
    }
    let cells = map_range(engine_cfg.exec, specs.len(), |i| {
        let (batch_size, fraction, n_selected) = specs[i];
        let cfg = EngineConfig {
            n_selected,
            ..engine_cfg.clone()
        };
        prequential_run(data.batches(batch_size), &cfg, window).map(|metrics| GridCell {
            batch_size,
            fraction,
            n_selected,
            metrics,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let n = cells.len() as f64;
    let stab: Vec<f64> = cells
        .iter()
        .filter_map(|c| c.metrics.summary.mean_stability)
        .collect();
    let summary = GridSummary {
        n_cells: cells.len(),
        mean_acc: cells
            .iter()
            .map(|c| c.metrics.summary.mean_acc)
            .sum::<f64>()
            / n,
        mean_stability: (!stab.is_empty()).then(|| stab.iter().sum::<f64>() / stab.len() as f64),
        mean_step_ms: cells
            .iter()
            .map(|c| c.metrics.summary.mean_step_ms)
            .sum::<f64>()
            / n,
    };
    Ok(GridResult { cells, summary })
}

fn write_line<W: Write>(out: &mut W, value: &impl Serialize) -> Result<()> {
    serde_json::to_writer(&mut *out, value).map_err(|e| FiresError::Data(e.to_string()))?;
    out.write_all(b"\n")?;
    Ok(())
}

/// One JSON object per step, then `{"summary": .., "config": ..}`.
pub fn write_run_jsonl<W: Write>(out: &mut W, metrics: &RunMetrics, config: &Value) -> Result<()> {
    for r in &metrics.records {
        write_line(out, r)?;
    }
    write_line(
        out,
        &json!({ "summary": metrics.summary, "config": config }),
    )
}

/// Step records of every cell, tagged with `batch_size` and `fraction`, then
/// one summary object with per-cell summaries.
pub fn write_grid_jsonl<W: Write>(out: &mut W, grid: &GridResult, config: &Value) -> Result<()> {
    let mut cells = Vec::new();
    for cell in &grid.cells {
        for r in &cell.metrics.records {
            let mut v = serde_json::to_value(r).map_err(|e| FiresError::Data(e.to_string()))?;
            if let Value::Object(map) = &mut v {
                map.insert("batch_size".into(), json!(cell.batch_size));
                map.insert("fraction".into(), json!(cell.fraction));
            }
            write_line(out, &v)?;
        }
        cells.push(json!({
            "batch_size": cell.batch_size,
            "fraction": cell.fraction,
            "n_selected": cell.n_selected,
            "summary": cell.metrics.summary,
        }));
    }
    write_line(
        out,
        &json!({ "summary": grid.summary, "cells": cells, "config": config }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::data::Label;
    use crate::models::ModelConfig;

    fn threshold_stream(n: usize) -> Dataset {
        let rows = (0..n).map(|i| {
            let x: Vec<f64> = (0..4)
                .map(|k| ((i * 7 + k * 13) % 17) as f64 / 16.0)
                .collect();
            let y = if x[0] > 0.5 {
                Label::Positive
            } else {
                Label::Negative
            };
            (x, y)
        });
        Dataset::from_rows(rows, 4).unwrap()
    }

    #[test]
    fn one_record_per_batch() {
        let data = threshold_stream(53);
        let cfg = EngineConfig::new(ModelConfig::default(), 2);
        let m = prequential_run(data.batches(10), &cfg, 5).unwrap();
        assert_eq!(m.records.len(), 6);
        assert_eq!(
            m.records.iter().map(|r| r.t).collect::<Vec<_>>(),
            vec![1, 2, 3, 4, 5, 6]
        );
        assert!(m.records[0].stability.is_none());
        assert!(m.records[1].stability.is_some());
        assert!(m
            .records
            .iter()
            .all(|r| r.fs_ms >= 0.0 && r.train_ms >= 0.0 && r.selected.len() == 2));
    }

    #[test]
    fn select_everything_has_no_stability() {
        let data = threshold_stream(40);
        let cfg = EngineConfig::new(ModelConfig::default(), 4);
        let m = prequential_run(data.batches(10), &cfg, 5).unwrap();
        assert!(m.records.iter().all(|r| r.stability.is_none()));
        assert!(m.summary.mean_stability.is_none());
    }

    #[test]
    fn empty_stream_is_an_error() {
        let cfg = EngineConfig::new(ModelConfig::default(), 1);
        assert!(prequential_run(Vec::new(), &cfg, 5).is_err());
    }

    #[test]
    fn selected_count_rounding() {
        assert_eq!(selected_count(0.1, 57).unwrap(), 6);
        assert_eq!(selected_count(0.15, 57).unwrap(), 9);
        assert_eq!(selected_count(0.2, 57).unwrap(), 11);
        assert_eq!(selected_count(0.01, 10).unwrap(), 1);
        assert!(selected_count(0.0, 10).is_err());
        assert!(selected_count(1.5, 10).is_err());
    }

    #[test]
    fn grid_shape_and_means() {
        let data = threshold_stream(120);
        let cfg = EngineConfig::new(ModelConfig::default(), 1);
        let g = grid_run(&data, &[10, 20], &[0.25, 0.5], &cfg, 4).unwrap();
        assert_eq!(g.cells.len(), 4);
        let mean = g
            .cells
            .iter()
            .map(|c| c.metrics.summary.mean_acc)
            .sum::<f64>()
            / 4.0;
        assert!((g.summary.mean_acc - mean).abs() < 1e-15);
        assert!(grid_run(&data, &[], &[0.5], &cfg, 4).is_err());
    }

    #[test]
    fn jsonl_lines() {
        let data = threshold_stream(30);
        let cfg = EngineConfig::new(ModelConfig::default(), 1);
        let m = prequential_run(data.batches(10), &cfg, 3).unwrap();
        let mut buf = Vec::new();
        write_run_jsonl(&mut buf, &m, &json!({"seed": 0})).unwrap();
        let lines: Vec<Value> = String::from_utf8(buf)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 4);
        for key in ["t", "acc", "stability", "fs_ms", "train_ms", "selected"] {
            assert!(lines[0].get(key).is_some(), "{key}");
        }
        assert!(lines[0]["stability"].is_null());
        assert_eq!(lines[3]["config"]["seed"], 0);
    }
}
