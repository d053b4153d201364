//! Runs random, margin and kmeans on the planted-keyword corpus in memory and
//! prints when each seed reaches the threshold.

use clap::Parser;

use alsim::config::ExperimentConfig;
use alsim::corpus::convert_raw;
use alsim::simulator::{run_seed, FeaturizedCorpus};
use alsim::synth::{write_splits, PlantedKeywords};
use alsim::teachers::StrategyRegistry;

#[derive(Parser)]
struct Args {
    #[arg(long, default_value_t = 0.6)]
    easy_fraction: f64,
    #[arg(long, default_value_t = 5000)]
    hard_keywords: usize,
    #[arg(long, default_value_t = 3)]
    min_tokens: usize,
    #[arg(long, default_value_t = 6)]
    max_tokens: usize,
    #[arg(long, default_value_t = 0.5)]
    learning_rate: f64,
    #[arg(long, default_value_t = 5)]
    epochs: usize,
}

fn main() {
    let args = Args::parse();
    let spec = PlantedKeywords {
        easy_fraction: args.easy_fraction,
        hard_keywords: args.hard_keywords,
        min_tokens: args.min_tokens,
        max_tokens: args.max_tokens,
        ..PlantedKeywords::default()
    };
    let (lr, ep) = (args.learning_rate, args.epochs);
    let dir = std::env::temp_dir().join(format!("alsim-calibrate-{}", std::process::id()));
    write_splits(&dir, &spec.generate()).unwrap();
    let registry = StrategyRegistry::with_builtin();
    let seeds = [42u64, 4711, 768, 4656, 32213];
    let mut means = Vec::new();
    for strategy in ["random", "margin", "kmeans"] {
        let text = format!(
            r#"
[data]
source = "{}"
[experiment]
step_size = 100
initial_ratio = 0.05
budget = 1000
seeds = [42]
[teacher]
strategy = "{strategy}"
[trainer]
learning_rate = {lr}
epochs_per_step = {ep}
[tracking]
revision = "cal"
"#,
            dir.display()
        );
        let cfg = ExperimentConfig::from_toml_str(&text, ".").unwrap();
        let split = convert_raw(&dir, &cfg.data).unwrap();
        let corpus = FeaturizedCorpus::build(&split, &cfg.trainer).unwrap();
        let t = std::time::Instant::now();
        let mut reach = Vec::new();
        let mut mean = vec![0.0; 20];
        for &s in &seeds {
            let c = run_seed(&cfg, &corpus, &registry, "calibration", s).unwrap();
            reach.push(c.labeled_count_reaching(0.85));
            for (i, p) in c.points.iter().enumerate() {
                mean[i] += p.test.macro_f1 / seeds.len() as f64;
            }
        }
        println!("{strategy:>7} {:?} {:.1}s", reach, t.elapsed().as_secs_f64());
        println!("        {}", mean.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(" "));
        means.push(mean);
    }
    let wins = (1..20).filter(|&i| means[1][i] >= means[0][i]).count();
    println!("margin>=random on {wins}/19 propose steps");
    std::fs::remove_dir_all(dir).ok();
}
