use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use fpl_core::data::{load_idx, LabeledDataset};
use fpl_core::nn::{Activation, LossKind, Network, OptimizerKind, OutputHead, TrainConfig};

use crate::config::Config;

/// Where and how an experiment writes its artifacts.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub out_dir: PathBuf,
    pub svg: bool,
    pub verbose: bool,
}

impl RunContext {
    pub fn new(out_dir: impl Into<PathBuf>) -> Self {
        Self {
            out_dir: out_dir.into(),
            svg: false,
            verbose: false,
        }
    }

    pub fn note(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("{}", msg.as_ref());
        }
    }
}

/// Collects written files for the manifest.
pub struct Writer<'a> {
    ctx: &'a RunContext,
    pub files: Vec<String>,
}

impl<'a> Writer<'a> {
    pub fn new(ctx: &'a RunContext) -> Result<Self> {
        std::fs::create_dir_all(&ctx.out_dir)
            .with_context(|| format!("creating output directory {}", ctx.out_dir.display()))?;
        Ok(Self { ctx, files: Vec::new() })
    }

    pub fn text(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.ctx.out_dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn bytes(&mut self, name: &str, contents: &[u8]) -> Result<()> {
        let path = self.ctx.out_dir.join(name);
        std::fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    /// Writes an SVG only when figures were requested.
    pub fn svg(&mut self, name: &str, render: impl FnOnce() -> Result<String>) -> Result<()> {
        if self.ctx.svg {
            let s = render().with_context(|| format!("rendering {name}"))?;
            self.text(name, &s)?;
        }
        Ok(())
    }
}

pub fn parse_enum<T>(cfg: &Config, key: &str) -> Result<T>
where
    T: FromStr,
    T::Err: std::fmt::Display,
{
    cfg.parse(key)
}

/// Training hyperparameters from the shared key set.
pub fn train_config(cfg: &Config) -> Result<TrainConfig> {
    let batch = match cfg.str("batch_size")? {
        "full" | "0" => None,
        _ => Some(cfg.usize("batch_size")?),
    };
    Ok(TrainConfig {
        loss: parse_enum::<LossKind>(cfg, "loss")?,
        optimizer: parse_enum::<OptimizerKind>(cfg, "optimizer")?,
        learning_rate: cfg.f64("learning_rate")?,
        batch_size: batch,
        epochs: cfg.usize("epochs")?,
        init_std: cfg.f64("init_std")?,
        seed: cfg.u64("seed")?,
        record_every: cfg.usize("record_every")?,
    })
}

pub fn network(cfg: &Config, train: &TrainConfig) -> Result<Network<f64>> {
    let widths = cfg.widths("widths")?;
    let activation: Activation = parse_enum(cfg, "activation")?;
    let head = match train.loss {
        LossKind::CrossEntropySoftmax => OutputHead::Softmax,
        LossKind::Mse => OutputHead::Linear,
    };
    Ok(Network::init(&widths, activation, head, train.init_std, train.seed)?)
}

/// Resolves a data path: absolute, or relative to `data_dir`.
pub fn data_path(cfg: &Config, key: &str) -> Result<PathBuf> {
    let p = Path::new(cfg.str(key)?);
    let full = if p.is_absolute() {
        p.to_path_buf()
    } else {
        Path::new(cfg.str("data_dir")?).join(p)
    };
    if !full.exists() {
        bail!("dataset file not found: {} (set data_dir or {key})", full.display());
    }
    Ok(full)
}

pub fn mnist(cfg: &Config) -> Result<LabeledDataset<f64>> {
    let images = data_path(cfg, "mnist_images")?;
    let labels = data_path(cfg, "mnist_labels")?;
    let subset = match cfg.usize("subset")? {
        0 => None,
        s => Some(s),
    };
    Ok(load_idx(&images, &labels, subset, cfg.u64("data_seed")?)?)
}

pub fn opt_epoch(e: Option<usize>) -> serde_json::Value {
    match e {
        Some(v) => serde_json::json!(v),
        None => serde_json::Value::Null,
    }
}

/// Strictly increasing, with every entry present.
pub fn strictly_increasing(epochs: &[Option<usize>]) -> bool {
    epochs.iter().all(Option::is_some) && epochs.windows(2).all(|w| w[0] < w[1])
}

/// First-crossing order of `a` before `b`, with "never" later than any epoch.
pub fn crosses_before(a: Option<usize>, b: Option<usize>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x < y,
        (Some(_), None) => true,
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_order() {
        assert!(strictly_increasing(&[Some(1), Some(4), Some(9)]));
        assert!(!strictly_increasing(&[Some(1), Some(1)]));
        assert!(!strictly_increasing(&[Some(1), None]));
        assert!(crosses_before(Some(3), None));
        assert!(!crosses_before(None, Some(3)));
        assert!(!crosses_before(None, None));
    }
}
