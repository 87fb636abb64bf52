use std::fs::File;
use std::io::{self, BufWriter, Write};

use fires_core::harness::{
    gen_rbf_stream, grid_run, load_csv, prequential_run, selected_count, write_grid_jsonl,
    write_run_jsonl, Dataset, TreeGenerator,
};
use log::{info, warn};

use crate::config::{DataConfig, LabelKey, Plan, RunConfig, Selection};
use crate::error::CliError;

pub fn load_data(cfg: &DataConfig) -> Result<Dataset, CliError> {
    Ok(match cfg {
        DataConfig::Csv {
            path,
            label,
            shuffle_seed,
        } => {
            let loaded = load_csv(path, &LabelKey::column(label.as_ref()))?;
            for w in &loaded.warnings {
                warn!("{}: {w}", path.display());
            }
            match shuffle_seed {
                Some(seed) => loaded.dataset.shuffled(*seed),
                None => loaded.dataset,
            }
        }
        DataConfig::Rbf {
            n_samples,
            n_features,
            n_centroids,
            seed,
        } => gen_rbf_stream(*seed, *n_samples, *n_features, *n_centroids)?,
        DataConfig::Tree { n_samples, .. } => {
            let tree = cfg.tree_config().expect("tree source");
            TreeGenerator::new(tree)?.take_dataset(*n_samples)?
        }
    })
}

/// Runs the experiment described by `cfg` and writes JSON lines to
/// `cfg.run.out`, or stdout when no path is set.
pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    let plan = cfg.plan()?;
    let data = load_data(&cfg.data)?;
    info!("{} rows, {} features", data.len(), data.n_features());
    let echo = serde_json::to_value(cfg).map_err(|e| CliError::Config(e.to_string()))?;

    let mut out: Box<dyn Write> = match &cfg.run.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match plan {
        Plan::Single {
            batch_size,
            selection,
        } => {
            let m = match selection {
                Selection::Count(m) => m,
                Selection::Fraction(f) => selected_count(f, data.n_features())?,
            };
            let metrics =
                prequential_run(data.batches(batch_size), &cfg.engine(m)?, cfg.run.window)?;
            info!(
                "mean accuracy {:.4}, mean stability {:?}",
                metrics.summary.mean_acc, metrics.summary.mean_stability
            );
            write_run_jsonl(&mut out, &metrics, &echo)?;
        }
        Plan::Grid {
            batch_sizes,
            fractions,
        } => {
            let grid = grid_run(
                &data,
                &batch_sizes,
                &fractions,
                &cfg.engine(1)?,
                cfg.run.window,
            )?;
            info!(
                "{} cells, mean accuracy {:.4}, mean stability {:?}",
                grid.summary.n_cells, grid.summary.mean_acc, grid.summary.mean_stability
            );
            write_grid_jsonl(&mut out, &grid, &echo)?;
        }
    }
    out.flush()?;
    Ok(())
}
