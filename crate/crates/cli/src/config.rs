//! Flat `key = value` run configuration for `orthoview protocol`.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use orthoview::protocol::{ContextSwitch, ProtocolConfig};
use orthoview::{FeatureConfig, Metric, Resolution};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Single-context dataset root.
    pub dataset: Option<PathBuf>,
    /// Per-context dataset roots, in declaration order.
    pub contexts: Vec<(String, PathBuf)>,
    pub features: FeatureConfig,
    /// Dimension of precomputed view embeddings, when used instead of clouds.
    pub external_features: Option<usize>,
    pub protocol: ProtocolConfig,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            contexts: Vec::new(),
            features: FeatureConfig::default(),
            external_features: None,
            protocol: ProtocolConfig::default(),
            seeds: Vec::new(),
            out: PathBuf::from("protocol-out"),
        }
    }
}

fn parse_tau(value: &str) -> Result<f64> {
    match value {
        "inf" | "infinity" => Ok(f64::INFINITY),
        v => Ok(v.parse()?),
    }
}

impl RunConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut config = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("line {}: expected `key = value`", n + 1))?;
            let (key, value) = (key.trim(), value.trim());
            config
                .set(key, value, base)
                .with_context(|| format!("line {}: bad value for `{key}`", n + 1))?;
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    fn set(&mut self, key: &str, value: &str, base: &Path) -> Result<()> {
        let resolve = |v: &str| {
            let p = PathBuf::from(v);
            if p.is_relative() {
                base.join(p)
            } else {
                p
            }
        };
        match key {
            "dataset" => self.dataset = Some(resolve(value)),
            "out" => self.out = resolve(value),
            "resolution" => self.features.resolution = Resolution::square(value.parse()?),
            "blocks" => self.features.blocks = value.parse()?,
            "external_features" => self.external_features = Some(value.parse()?),
            "metric" => self.protocol.metric = value.parse()?,
            "tau_unknown" => self.protocol.tau_unknown = parse_tau(value)?,
            "intro_threshold" | "threshold" => self.protocol.intro_threshold = value.parse()?,
            "window_factor" => self.protocol.window_factor = value.parse()?,
            "max_stall" => self.protocol.max_stall = value.parse()?,
            "seed" => self.seeds = vec![value.parse()?],
            "seeds" => self.seeds = value.split(',').map(|s| s.trim().parse()).collect::<Result<_, _>>()?,
            "context_schedule" => {
                self.protocol.context_schedule = value
                    .split(',')
                    .map(|entry| {
                        let (id, start) = entry
                            .trim()
                            .split_once('@')
                            .context("schedule entries look like `id@start`")?;
                        Ok(ContextSwitch {
                            context_id: id.trim().to_owned(),
                            start_iteration: start.trim().parse()?,
                        })
                    })
                    .collect::<Result<_>>()?
            }
            k if k.starts_with("context.") => self.contexts.push((k["context.".len()..].to_owned(), resolve(value))),
            _ => bail!("unknown key `{key}`"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.dataset.is_none() && self.contexts.is_empty() {
            bail!("no dataset configured");
        }
        for path in self.dataset.iter().chain(self.contexts.iter().map(|(_, p)| p)) {
            if !path.is_dir() {
                bail!("dataset path {} does not exist", path.display());
            }
        }
        if self.seeds.is_empty() {
            bail!("no seeds configured");
        }
        if self.external_features.is_none() {
            self.features.validate()?;
        }
        self.protocol.validate()?;
        Ok(())
    }
}

pub fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: orthoview::Error| e.to_string())
}

pub fn parse_tau_arg(s: &str) -> Result<f64, String> {
    parse_tau(s).map_err(|e| e.to_string())
}
