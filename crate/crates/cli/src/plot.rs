//! Plot-ready CSV series extracted from a metrics file.

use std::io::{BufRead, Write};

use clap::ValueEnum;
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    Accuracy,
    Stability,
    Tradeoff,
}

fn number(v: &Value) -> Option<String> {
    v.as_f64().map(|x| x.to_string())
}

fn malformed(line: usize, msg: &str) -> CliError {
    CliError::Metrics(format!("line {line}: {msg}"))
}

/// Writes `t,value` rows for the time kinds (prefixed by `batch_size,fraction`
/// for grid output) or `mean_acc,mean_stability,acc_var` rows for the tradeoff
/// kind, one per run or grid cell.
pub fn emit_plot_data<R: BufRead, W: Write>(
    input: R,
    kind: PlotKind,
    out: &mut W,
) -> Result<(), CliError> {
    let mut records = Vec::new();
    let mut summary = None;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(&line).map_err(|e| malformed(i + 1, &e.to_string()))?;
        if v.get("summary").is_some() {
            summary = Some(v);
        } else if v.get("t").is_some() {
            records.push((i + 1, v));
        } else {
            return Err(malformed(i + 1, "neither a step record nor a summary"));
        }
    }
    let summary = summary.ok_or_else(|| CliError::Metrics("no summary line".into()))?;
    let grid = summary.get("cells").is_some();

    match kind {
        PlotKind::Accuracy | PlotKind::Stability => {
            let key = if kind == PlotKind::Accuracy {
                "acc"
            } else {
                "stability"
            };
            let prefix = if grid { "batch_size,fraction," } else { "" };
            writeln!(out, "{prefix}t,{key}")?;
            for (line, r) in &records {
                let t = r["t"]
                    .as_u64()
                    .ok_or_else(|| malformed(*line, "t is not an integer"))?;
                let value = match &r[key] {
                    Value::Null if kind == PlotKind::Stability => continue,
                    v => number(v)
                        .ok_or_else(|| malformed(*line, &format!("{key} is not a number")))?,
                };
                if grid {
                    let b = number(&r["batch_size"])
                        .ok_or_else(|| malformed(*line, "missing batch_size"))?;
                    let f = number(&r["fraction"])
                        .ok_or_else(|| malformed(*line, "missing fraction"))?;
                    writeln!(out, "{b},{f},{t},{value}")?;
                } else {
                    writeln!(out, "{t},{value}")?;
                }
            }
        }
        PlotKind::Tradeoff => {
            let runs: Vec<&Value> = match summary.get("cells") {
                Some(Value::Array(cells)) => cells.iter().map(|c| &c["summary"]).collect(),
                Some(_) => return Err(CliError::Metrics("cells is not an array".into())),
                None => vec![&summary["summary"]],
            };
            writeln!(out, "mean_acc,mean_stability,acc_var")?;
            for s in runs {
                let acc = number(&s["mean_acc"])
                    .ok_or_else(|| CliError::Metrics("summary lacks mean_acc".into()))?;
                let stab = number(&s["mean_stability"]).unwrap_or_default();
                let var = number(&s["acc_var"])
                    .ok_or_else(|| CliError::Metrics("summary lacks acc_var".into()))?;
                writeln!(out, "{acc},{stab},{var}")?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const RUN: &str = r#"{"t":1,"acc":0.5,"stability":null,"fs_ms":0.1,"train_ms":0.1,"selected":[0]}
{"t":2,"acc":0.75,"stability":0.5,"fs_ms":0.1,"train_ms":0.1,"selected":[1]}
{"t":3,"acc":1.0,"stability":0.25,"fs_ms":0.1,"train_ms":0.1,"selected":[1]}
{"summary":{"n_steps":3,"mean_acc":0.75,"acc_var":0.0625,"mean_stability":0.375},"config":{}}
"#;

    fn emit(text: &str, kind: PlotKind) -> Result<String, CliError> {
        let mut out = Vec::new();
        emit_plot_data(text.as_bytes(), kind, &mut out)?;
        Ok(String::from_utf8(out).unwrap())
    }

    #[test]
    fn accuracy_rows() {
        assert_eq!(
            emit(RUN, PlotKind::Accuracy).unwrap(),
            "t,acc\n1,0.5\n2,0.75\n3,1\n"
        );
    }

    #[test]
    fn stability_skips_warm_up() {
        assert_eq!(
            emit(RUN, PlotKind::Stability).unwrap(),
            "t,stability\n2,0.5\n3,0.25\n"
        );
    }

    #[test]
    fn tradeoff_single_row() {
        assert_eq!(
            emit(RUN, PlotKind::Tradeoff).unwrap(),
            "mean_acc,mean_stability,acc_var\n0.75,0.375,0.0625\n"
        );
    }

    #[test]
    fn grid_rows() {
        let grid = r#"{"t":1,"acc":0.5,"stability":null,"batch_size":10,"fraction":0.1}
{"summary":{"n_cells":2},"cells":[{"summary":{"mean_acc":0.5,"acc_var":0.0,"mean_stability":null}},{"summary":{"mean_acc":0.6,"acc_var":0.01,"mean_stability":0.2}}],"config":{}}
"#;
        assert_eq!(
            emit(grid, PlotKind::Accuracy).unwrap(),
            "batch_size,fraction,t,acc\n10,0.1,1,0.5\n"
        );
        assert_eq!(
            emit(grid, PlotKind::Tradeoff).unwrap(),
            "mean_acc,mean_stability,acc_var\n0.5,,0\n0.6,0.2,0.01\n"
        );
    }

    #[test]
    fn malformed_inputs() {
        assert!(emit("not json\n", PlotKind::Accuracy).is_err());
        assert!(emit(r#"{"t":1,"acc":0.5}"#, PlotKind::Accuracy).is_err());
        assert!(emit(r#"{"foo":1}"#, PlotKind::Accuracy).is_err());
        let bad_acc = RUN.replace(r#""acc":0.5"#, r#""acc":"x""#);
        assert!(emit(&bad_acc, PlotKind::Accuracy).is_err());
    }
}
