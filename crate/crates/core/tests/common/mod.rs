#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use alsim::config::{parse_config_with_overrides, ExperimentConfig};
use alsim::synth::{write_splits, PlantedKeywords};

/// Writes a planted-keyword corpus and a config next to it; returns the
/// config path.
pub fn setup(dir: &Path, docs: [usize; 3], experiment: &str, strategy: &str) -> PathBuf {
    let spec = PlantedKeywords {
        train: docs[0],
        dev: docs[1],
        test: docs[2],
        ..Default::default()
    };
    write_splits(&dir.join("raw"), &spec.generate()).unwrap();
    let path = dir.join("experiment.toml");
    fs::write(
        &path,
        format!(
            r#"
[data]
source = "raw"

[experiment]
{experiment}

[teacher]
strategy = "{strategy}"

[tracking]
store = "runs"
revision = "test"
"#
        ),
    )
    .unwrap();
    path
}

pub const SMALL: &str = "step_size = 20\nbudget = 60\ninitial_ratio = 0.05\nseeds = [42, 4711, 768]";

pub fn load(path: &Path, overrides: &[&str]) -> ExperimentConfig {
    let o: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
    parse_config_with_overrides(path, &o).unwrap()
}
