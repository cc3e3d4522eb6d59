//! Resolution of the run configuration: command-line flags override the
//! optional TOML file, which overrides the preset defaults.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{Ablation, TrainConfig};
use crate::model::ModelConfig;
use crate::semgraph::Template;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Tiny,
    Base,
}

/// Everything needed to rerun an experiment, frozen into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: String,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub ablations: Vec<Ablation>,
}

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Clone, Default)]
pub struct FlagOverrides {
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub learning_rate: Option<f64>,
    pub image_encoder: Option<String>,
    pub k_object_object: Option<usize>,
    pub k_image_object: Option<usize>,
    pub template: Option<Template>,
    pub seed: Option<u64>,
    pub max_steps: Option<usize>,
    pub ablations: Vec<Ablation>,
}

fn merge(base: &mut toml::Value, over: toml::Value, path: &str) -> Result<()> {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                let key_path = if path.is_empty() {
                    k.clone()
                } else {
                    format!("{path}.{k}")
                };
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v, &key_path)?,
                    // optional fields serialize to nothing, so accept them here
                    None if key_path == "train.max_steps" => {
                        b.insert(k, v);
                    }
                    None => return Err(Error::Config(format!("unknown configuration key {key_path:?}"))),
                }
            }
            Ok(())
        }
        (slot, v) => {
            *slot = v;
            Ok(())
        }
    }
}

fn to_toml<T: Serialize>(v: &T) -> Result<toml::Value> {
    toml::Value::try_from(v).map_err(|e| Error::Config(e.to_string()))
}

/// Resolves the configuration for `dataset` with region features of
/// dimension `feature_dim`.
pub fn resolve_config(
    dataset: &str,
    preset: Preset,
    feature_dim: usize,
    file: Option<&Path>,
    flags: &FlagOverrides,
) -> Result<RunConfig> {
    let model = match preset {
        Preset::Tiny => ModelConfig::tiny(feature_dim),
        Preset::Base => ModelConfig::base(feature_dim),
    };
    let train = TrainConfig::for_dataset(dataset);
    let (mut model, mut train, mut ablations) = (model, train, Vec::new());

    if let Some(path) = file {
        let text =
            fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut parsed: toml::Value =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let Some(table) = parsed.as_table_mut() {
            if let Some(list) = table.remove("ablations") {
                let items = list
                    .as_array()
                    .ok_or_else(|| Error::Config("ablations must be a list".into()))?;
                for item in items {
                    let s = item
                        .as_str()
                        .ok_or_else(|| Error::Config("ablations must be strings".into()))?;
                    ablations.push(s.parse().map_err(|e: Error| Error::Config(e.to_string()))?);
                }
            }
        }
        let mut tree = toml::Value::Table(toml::map::Map::new());
        let t = tree.as_table_mut().expect("table");
        t.insert("model".into(), to_toml(&model)?);
        t.insert("train".into(), to_toml(&train)?);
        merge(&mut tree, parsed, "")?;
        let t = tree.as_table().expect("table");
        model = t["model"]
            .clone()
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("model section: {e}")))?;
        train = t["train"]
            .clone()
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("train section: {e}")))?;
    }

    if let Some(v) = flags.epochs {
        train.epochs = v;
    }
    if let Some(v) = flags.batch_size {
        train.batch_size = v;
    }
    if let Some(v) = flags.learning_rate {
        train.learning_rate = v;
    }
    if let Some(v) = &flags.image_encoder {
        train.image_encoder = v.clone();
    }
    if let Some(v) = flags.seed {
        train.seed = v;
    }
    if let Some(v) = flags.max_steps {
        train.max_steps = Some(v);
    }
    if let Some(v) = flags.k_object_object {
        model.k_object_object = v;
    }
    if let Some(v) = flags.k_image_object {
        model.k_image_object = v;
    }
    if let Some(v) = flags.template {
        model.template = v;
    }
    if !flags.ablations.is_empty() {
        ablations = flags.ablations.clone();
    }
    if model.feature_dim != feature_dim {
        return Err(Error::Config(format!(
            "configured feature_dim {} does not match the scene-graph file ({feature_dim})",
            model.feature_dim
        )));
    }
    model.validate()?;
    train.validate()?;
    Ok(RunConfig {
        dataset: dataset.to_string(),
        model,
        train,
        ablations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_flags_over_file_over_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(
            &path,
            "ablations = [\"w/o caption\"]\n[train]\nepochs = 3\nbatch_size = 8\n[model]\nd_model = 16\n",
        )
        .unwrap();
        let flags = FlagOverrides {
            epochs: Some(5),
            ..Default::default()
        };
        let c = resolve_config("twitter2015", Preset::Tiny, 4, Some(&path), &flags).unwrap();
        assert_eq!(c.train.epochs, 5);
        assert_eq!(c.train.batch_size, 8);
        assert_eq!(c.train.learning_rate, 2e-5);
        assert_eq!(c.model.d_model, 16);
        assert_eq!(c.ablations, vec![Ablation::Caption]);
    }

    #[test]
    fn unknown_key_is_config_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        fs::write(&path, "[train]\nepoch = 3\n").unwrap();
        let err = resolve_config("twitter2015", Preset::Tiny, 4, Some(&path), &FlagOverrides::default()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
