//! Command-line entry point: dataset generation, training, prediction,
//! evaluation and batch experiments.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use sha2::{Digest, Sha256};

use mlslcs::data::{load_csv, load_mulan_arff, save_csv, LabelSpec};
use mlslcs::error::Error;
use mlslcs::experiments::{
    predict_dataset, run_artificial_experiment, run_evaluation, EvaluationConfig,
    ExperimentConfig, ProblemRef,
};
use mlslcs::inference::{compact_ruleset, InferenceMethod, Ruleset, Threshold};
use mlslcs::metrics::EvaluationReport;
use mlslcs::textio::format_rule;
use mlslcs::training::Trainer;
use mlslcs::{Dataset, HyperParams};

type Result<T> = mlslcs::Result<T>;

#[derive(Parser)]
#[command(name = "mlslcs", version, about = "Multi-label learning classifier system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an artificial problem dataset plus its shortest-complete-solution files.
    Generate {
        /// Problem name: toy6x4 or mlposition
        #[arg(long)]
        problem: String,
        /// Size N for mlposition
        #[arg(long)]
        n: Option<usize>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a model on a dataset.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// key=value parameter file
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Label column count (default: inferred from l<i> header columns)
        #[arg(long)]
        labels: Option<usize>,
        /// Label names XML for ARFF datasets
        #[arg(long)]
        label_xml: Option<PathBuf>,
        /// Snapshot cadence in cycles (default: one epoch)
        #[arg(long)]
        snapshot_period: Option<u64>,
    },
    /// Predict label vectors for every row of a dataset.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// pcut, ival or best
        #[arg(long)]
        method: String,
        /// Fixed threshold in (0, 0.5] (skips calibration)
        #[arg(long)]
        threshold: Option<f64>,
        /// Calibration dataset for pcut/ival (default: --data)
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        labels: Option<usize>,
        #[arg(long)]
        label_xml: Option<PathBuf>,
    },
    /// Evaluate a model on a labeled dataset.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        method: String,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long)]
        labels: Option<usize>,
        #[arg(long)]
        label_xml: Option<PathBuf>,
    },
    /// Run a batch experiment described by a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Worker threads for seed fan-out (env MLSLCS_JOBS overrides)
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { problem, n, out } => cmd_generate(&problem, n, &out),
        Command::Train { data, config, seed, out, labels, label_xml, snapshot_period } => {
            cmd_train(&data, &config, seed, &out, labels, label_xml, snapshot_period)
        }
        Command::Predict { model, data, method, threshold, train, labels, label_xml } => {
            cmd_predict(&model, &data, &method, threshold, train, labels, label_xml)
        }
        Command::Evaluate { model, data, method, threshold, train, labels, label_xml } => {
            cmd_evaluate(&model, &data, &method, threshold, train, labels, label_xml)
        }
        Command::Experiment { config, jobs } => cmd_experiment(&config, jobs),
    }
}

fn write_text(path: &Path, content: &str) -> Result<()> {
    std::fs::write(path, content).map_err(|e| Error::io(path.display().to_string(), e))
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Loads CSV or ARFF datasets. For CSV without an explicit label count, the
/// trailing header columns named `l<digits>` are taken as labels.
fn load_dataset(
    path: &Path,
    labels: Option<usize>,
    label_xml: Option<PathBuf>,
) -> Result<Dataset> {
    let is_arff = path.extension().map_or(false, |e| e.eq_ignore_ascii_case("arff"));
    if is_arff {
        let spec = match (label_xml, labels) {
            (Some(xml), _) => LabelSpec::XmlPath(xml),
            (None, Some(n)) => LabelSpec::TrailingCount(n),
            (None, None) => {
                return Err(Error::Config(
                    "ARFF input needs --labels or --label-xml".into(),
                ))
            }
        };
        return load_mulan_arff(path, spec);
    }
    let label_count = match labels {
        Some(n) => n,
        None => infer_label_columns(path)?,
    };
    load_csv(path, label_count)
}

fn infer_label_columns(path: &Path) -> Result<usize> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    let header = text.lines().next().unwrap_or("");
    let count = header
        .split(',')
        .rev()
        .take_while(|col| {
            let col = col.trim();
            col.len() > 1
                && col.starts_with('l')
                && col[1..].chars().all(|c| c.is_ascii_digit())
        })
        .count();
    if count == 0 {
        return Err(Error::Config(format!(
            "cannot infer label columns from header of {}; pass --labels",
            path.display()
        )));
    }
    Ok(count)
}

fn cmd_generate(problem: &str, n: Option<usize>, out: &Path) -> Result<()> {
    let problem = ProblemRef::parse(problem, n)?;
    let (dataset, spec) = problem.build()?;
    create_dir(out)?;
    save_csv(&dataset, &out.join("dataset.csv"))?;
    for (i, alt) in spec.scs_alternatives.iter().enumerate() {
        let text: String =
            alt.iter().map(|r| format!("{}\n", format_rule(r))).collect();
        write_text(&out.join(format!("scs_alt{}.txt", i + 1)), &text)?;
    }
    println!(
        "wrote {} rows and {} SCS alternative(s) to {}",
        dataset.len(),
        spec.scs_alternatives.len(),
        out.display()
    );
    Ok(())
}

const CONFIG_KEYS: [&str; 15] = [
    "N", "I", "theta_ga", "theta_exp", "theta_del", "beta", "nu", "mu", "chi", "p_hash",
    "p_label_hash", "omega", "phi", "acc0", "k",
];

fn parse_key_value(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line: i + 1,
            message: format!("expected key=value, got '{line}'"),
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

fn parse_field<T: std::str::FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<T> {
    map[key]
        .parse()
        .map_err(|_| Error::Config(format!("bad value for {key}: '{}'", map[key])))
}

/// Parses the flat hyperparameter file. The key set is fixed; missing keys
/// are listed in the error and unknown keys are rejected.
fn parse_hyperparams(map: &BTreeMap<String, String>) -> Result<HyperParams> {
    let missing: Vec<&str> =
        CONFIG_KEYS.iter().copied().filter(|k| !map.contains_key(*k)).collect();
    if !missing.is_empty() {
        return Err(Error::Config(format!("config missing keys: {}", missing.join(", "))));
    }
    let mut params = HyperParams::artificial_defaults();
    params.population_size = parse_field(map, "N")?;
    params.iterations = parse_field(map, "I")?;
    params.theta_ga = parse_field(map, "theta_ga")?;
    params.theta_exp = parse_field(map, "theta_exp")?;
    params.theta_del = parse_field(map, "theta_del")?;
    params.beta = parse_field(map, "beta")?;
    params.nu = parse_field(map, "nu")?;
    params.mu = parse_field(map, "mu")?;
    params.chi = parse_field(map, "chi")?;
    params.p_hash = parse_field(map, "p_hash")?;
    params.p_label_hash = parse_field(map, "p_label_hash")?;
    params.omega = parse_field(map, "omega")?;
    params.phi = parse_field(map, "phi")?;
    params.acc0 = parse_field(map, "acc0")?;
    params.quantization_bits = parse_field(map, "k")?;
    params.validate()?;
    Ok(params)
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes =
        std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

fn manifest_json(
    command: &str,
    dataset_path: &Path,
    params: &HyperParams,
) -> Result<String> {
    let manifest = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "dataset_path": dataset_path.display().to_string(),
        "dataset_sha256": sha256_file(dataset_path)?,
        "params": params,
        "seed": params.seed,
        "created_unix": SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    });
    serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(format!("manifest serialization failed: {e}")))
}

fn cmd_train(
    data: &Path,
    config: &Path,
    seed: u64,
    out: &Path,
    labels: Option<usize>,
    label_xml: Option<PathBuf>,
    snapshot_period: Option<u64>,
) -> Result<()> {
    let dataset = load_dataset(data, labels, label_xml)?;
    let map = parse_key_value(config)?;
    if let Some(unknown) = map.keys().find(|k| !CONFIG_KEYS.contains(&k.as_str())) {
        return Err(Error::Config(format!("unknown config key '{unknown}'")));
    }
    let mut params = parse_hyperparams(&map)?;
    params.seed = seed;
    create_dir(out)?;

    let period = snapshot_period.unwrap_or(dataset.len() as u64).max(1);
    let mut progress = String::new();
    let mut trainer = Trainer::new(&dataset, params.clone())?;
    for i in 0..params.iterations {
        trainer.step();
        if (i + 1) % period == 0 || i + 1 == params.iterations {
            progress.push_str(&trainer.snapshot(None, None).tsv_row());
            progress.push('\n');
        }
    }
    let population = trainer.into_population();
    let ruleset = Ruleset::from_population(&population);
    let compact = compact_ruleset(&population, &dataset);

    write_text(&out.join("population.txt"), &ruleset.serialize())?;
    write_text(&out.join("compact.txt"), &compact.serialize())?;
    write_text(&out.join("progress.tsv"), &progress)?;
    write_text(&out.join("manifest.json"), &manifest_json("train", data, &params)?)?;
    println!(
        "trained {} cycles: {} macroclassifiers, {} after compaction",
        params.iterations,
        ruleset.len(),
        compact.len()
    );
    Ok(())
}

fn load_model(path: &Path) -> Result<Ruleset> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::io(path.display().to_string(), e))?;
    Ruleset::parse(&text)
}

#[allow(clippy::too_many_arguments)]
fn predict_common(
    model: &Path,
    data: &Path,
    method: &str,
    threshold: Option<f64>,
    train: Option<PathBuf>,
    labels: Option<usize>,
    label_xml: Option<PathBuf>,
) -> Result<(Vec<Vec<bool>>, Dataset, Option<Threshold>)> {
    let ruleset = load_model(model)?;
    let dataset = load_dataset(data, labels, label_xml.clone())?;
    let method: InferenceMethod = method.parse()?;
    let threshold = threshold.map(Threshold::new).transpose()?;
    let calibration = match train {
        Some(path) => load_dataset(&path, labels, label_xml)?,
        None => dataset.clone(),
    };
    let (preds, used) =
        predict_dataset(&ruleset, &dataset, method, threshold, &calibration, false)?;
    Ok((preds, dataset, used))
}

fn cmd_predict(
    model: &Path,
    data: &Path,
    method: &str,
    threshold: Option<f64>,
    train: Option<PathBuf>,
    labels: Option<usize>,
    label_xml: Option<PathBuf>,
) -> Result<()> {
    let (preds, _, used) =
        predict_common(model, data, method, threshold, train, labels, label_xml)?;
    if let Some(t) = used {
        eprintln!("threshold={}", t.value());
    }
    for p in preds {
        let line: String = p.iter().map(|&b| if b { '1' } else { '0' }).collect();
        println!("{line}");
    }
    Ok(())
}

fn cmd_evaluate(
    model: &Path,
    data: &Path,
    method: &str,
    threshold: Option<f64>,
    train: Option<PathBuf>,
    labels: Option<usize>,
    label_xml: Option<PathBuf>,
) -> Result<()> {
    let (preds, dataset, used) =
        predict_common(model, data, method, threshold, train, labels, label_xml)?;
    let truths: Vec<Vec<bool>> =
        dataset.instances.iter().map(|i| i.labels.clone()).collect();
    let report = EvaluationReport::compute(&preds, &truths)?;
    if let Some(t) = used {
        println!("threshold={}", t.value());
    }
    println!("accuracy={}", report.accuracy);
    println!("exact_match={}", report.exact_match);
    println!("hamming_loss={}", report.hamming_loss);
    Ok(())
}

fn parse_seeds(value: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = value.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| {
            Error::Config(format!("bad seed range start '{a}'"))
        })?;
        let b: u64 = b.trim().parse().map_err(|_| {
            Error::Config(format!("bad seed range end '{b}'"))
        })?;
        return Ok((a..b).collect());
    }
    value
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad seed '{s}'")))
        })
        .collect()
}

fn cmd_experiment(config_path: &Path, jobs: usize) -> Result<()> {
    let jobs = std::env::var("MLSLCS_JOBS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(jobs);
    let map = parse_key_value(config_path)?;
    let params = parse_hyperparams(
        &map.iter()
            .filter(|(k, _)| CONFIG_KEYS.contains(&k.as_str()))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect(),
    )?;
    let mode = map.get("mode").map(String::as_str).unwrap_or("artificial");
    let methods: Vec<InferenceMethod> = match map.get("methods") {
        Some(v) => v.split(',').map(|m| m.trim().parse()).collect::<Result<_>>()?,
        None => vec![InferenceMethod::Ival],
    };
    match mode {
        "artificial" => {
            let problem_name = map
                .get("problem")
                .ok_or_else(|| Error::Config("config missing keys: problem".into()))?;
            let n = map
                .get("n")
                .map(|v| {
                    v.parse::<usize>()
                        .map_err(|_| Error::Config(format!("bad value for n: '{v}'")))
                })
                .transpose()?;
            let problem = ProblemRef::parse(problem_name, n)?;
            let seeds = parse_seeds(
                map.get("seeds")
                    .ok_or_else(|| Error::Config("config missing keys: seeds".into()))?,
            )?;
            let snapshot_period = match map.get("snapshot_period") {
                Some(v) => v.parse().map_err(|_| {
                    Error::Config(format!("bad value for snapshot_period: '{v}'"))
                })?,
                None => problem.build()?.0.len() as u64,
            };
            let output_dir = map.get("out").map(PathBuf::from);
            let config = ExperimentConfig {
                problem,
                params,
                seeds,
                snapshot_period,
                methods,
                output_dir,
                jobs,
            };
            let summary = run_artificial_experiment(&config)?;
            print!("{}", summary.key_value_text());
            Ok(())
        }
        "evaluation" => {
            let data = map
                .get("data")
                .ok_or_else(|| Error::Config("config missing keys: data".into()))?;
            let labels = map
                .get("labels")
                .map(|v| {
                    v.parse::<usize>()
                        .map_err(|_| Error::Config(format!("bad value for labels: '{v}'")))
                })
                .transpose()?;
            let dataset = load_dataset(Path::new(data), labels, None)?;
            let folds = match map.get("folds") {
                Some(v) => v
                    .parse()
                    .map_err(|_| Error::Config(format!("bad value for folds: '{v}'")))?,
                None => 1,
            };
            let seed = match map.get("seeds") {
                Some(v) => *parse_seeds(v)?.first().ok_or_else(|| {
                    Error::Config("seed list is empty".into())
                })?,
                None => 0,
            };
            let config = EvaluationConfig { params, folds, seed, methods };
            let reports = run_evaluation(&dataset, &config)?;
            println!("fold,method,threshold,accuracy,exact_match,hamming_loss");
            for fold in &reports {
                for m in &fold.methods {
                    println!(
                        "{},{},{},{},{},{}",
                        fold.fold,
                        m.method,
                        m.threshold.map_or(String::from("-"), |t| t.to_string()),
                        m.report.accuracy,
                        m.report.exact_match,
                        m.report.hamming_loss
                    );
                }
            }
            Ok(())
        }
        other => Err(Error::Config(format!("unknown mode '{other}'"))),
    }
}
