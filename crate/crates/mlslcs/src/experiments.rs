//! Batch experiment drivers: multi-seed artificial-problem runs with learning
//! curves, and k-fold evaluation of the inference methods on arbitrary
//! datasets.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::data::{generate_mlposition, generate_toy6x4, ProblemSpec};
use crate::error::{Error, Result};
use crate::inference::{
    apply_threshold, calibrate_ival, calibrate_pcut, compact_ruleset, compute_votes,
    default_grid, predict_best, InferenceMethod, Ruleset, Threshold,
};
use crate::metrics::{label_cardinality, ml_accuracy, percent_scs, EvaluationReport};
use crate::training::Trainer;
use crate::types::{Dataset, HyperParams};

/// Which problem an artificial experiment runs on.
#[derive(Debug, Clone, PartialEq)]
pub enum ProblemRef {
    Toy6x4,
    MlPosition(usize),
}

impl ProblemRef {
    pub fn build(&self) -> Result<(Dataset, ProblemSpec)> {
        match self {
            ProblemRef::Toy6x4 => generate_toy6x4(),
            ProblemRef::MlPosition(n) => generate_mlposition(*n),
        }
    }

    pub fn parse(name: &str, n: Option<usize>) -> Result<Self> {
        match name {
            "toy6x4" => Ok(ProblemRef::Toy6x4),
            "mlposition" => {
                let n = n.ok_or_else(|| {
                    Error::Config("problem 'mlposition' needs a size (--n)".into())
                })?;
                Ok(ProblemRef::MlPosition(n))
            }
            other => Err(Error::Config(format!("unknown problem '{other}'"))),
        }
    }
}

/// Configuration of a multi-seed artificial run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub problem: ProblemRef,
    pub params: HyperParams,
    pub seeds: Vec<u64>,
    /// Snapshot cadence in cycles (an epoch is `|D|` cycles).
    pub snapshot_period: u64,
    pub methods: Vec<InferenceMethod>,
    pub output_dir: Option<PathBuf>,
    /// Worker threads for seed fan-out.
    pub jobs: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::Config("seed list is empty".into()));
        }
        if self.snapshot_period == 0 {
            return Err(Error::Config("snapshot period must be at least 1".into()));
        }
        self.params.validate()
    }
}

/// One learning-curve sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub seed: u64,
    pub t: u64,
    pub pct_scs: f64,
    pub accuracy: f64,
}

/// Outcome of one seed's run.
#[derive(Debug, Clone)]
pub struct SeedResult {
    pub seed: u64,
    pub curve: Vec<CurvePoint>,
    pub final_pct_scs: f64,
    pub final_accuracy: f64,
    pub compacted_size: usize,
}

/// Cross-seed aggregate of an artificial experiment.
#[derive(Debug, Clone)]
pub struct ArtificialSummary {
    pub mean_pct_scs: f64,
    pub mean_accuracy: f64,
    pub seeds_full_scs: usize,
    pub seeds_full_accuracy: usize,
    pub mean_compacted_size: f64,
    pub per_seed: Vec<SeedResult>,
}

impl ArtificialSummary {
    pub fn key_value_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "seeds={}", self.per_seed.len());
        let _ = writeln!(s, "mean_pct_scs={}", self.mean_pct_scs);
        let _ = writeln!(s, "mean_accuracy={}", self.mean_accuracy);
        let _ = writeln!(s, "seeds_full_scs={}", self.seeds_full_scs);
        let _ = writeln!(s, "seeds_full_accuracy={}", self.seeds_full_accuracy);
        let _ = writeln!(s, "mean_compacted_size={}", self.mean_compacted_size);
        s
    }

    pub fn csv_text(&self) -> String {
        format!(
            "seeds,mean_pct_scs,mean_accuracy,seeds_full_scs,seeds_full_accuracy,mean_compacted_size\n{},{},{},{},{},{}\n",
            self.per_seed.len(),
            self.mean_pct_scs,
            self.mean_accuracy,
            self.seeds_full_scs,
            self.seeds_full_accuracy,
            self.mean_compacted_size
        )
    }
}

/// Accuracy on a dataset under an internally calibrated threshold.
fn ival_train_accuracy(ruleset: &Ruleset, dataset: &Dataset) -> Result<f64> {
    let t = calibrate_ival(ruleset, dataset, &default_grid())?;
    let preds: Vec<Vec<bool>> = dataset
        .instances
        .iter()
        .map(|i| apply_threshold(&compute_votes(ruleset, i), t))
        .collect();
    let truths: Vec<Vec<bool>> = dataset.instances.iter().map(|i| i.labels.clone()).collect();
    ml_accuracy(&preds, &truths)
}

fn run_seed(
    dataset: &Dataset,
    problem: &ProblemSpec,
    params: &HyperParams,
    seed: u64,
    snapshot_period: u64,
) -> Result<SeedResult> {
    let mut params = params.clone();
    params.seed = seed;
    let mut trainer = Trainer::new(dataset, params.clone())?;
    let mut curve = Vec::new();
    for i in 0..params.iterations {
        trainer.step();
        if (i + 1) % snapshot_period == 0 || i + 1 == params.iterations {
            let pct = percent_scs(&trainer.population.members, &problem.scs_alternatives);
            let ruleset = Ruleset::from_population(&trainer.population);
            let accuracy = ival_train_accuracy(&ruleset, dataset)?;
            curve.push(CurvePoint { seed, t: trainer.t, pct_scs: pct, accuracy });
        }
    }
    let (final_pct_scs, final_accuracy) = match curve.last() {
        Some(p) => (p.pct_scs, p.accuracy),
        None => {
            let pct = percent_scs(&trainer.population.members, &problem.scs_alternatives);
            let ruleset = Ruleset::from_population(&trainer.population);
            (pct, ival_train_accuracy(&ruleset, dataset)?)
        }
    };
    let compacted = compact_ruleset(&trainer.population, dataset);
    Ok(SeedResult {
        seed,
        curve,
        final_pct_scs,
        final_accuracy,
        compacted_size: compacted.len(),
    })
}

fn run_seeds(
    dataset: &Dataset,
    problem: &ProblemSpec,
    config: &ExperimentConfig,
) -> Result<Vec<SeedResult>> {
    let jobs = config.jobs.max(1).min(config.seeds.len());
    let mut results: Vec<SeedResult> = if jobs <= 1 {
        config
            .seeds
            .iter()
            .map(|&s| run_seed(dataset, problem, &config.params, s, config.snapshot_period))
            .collect::<Result<_>>()?
    } else {
        let chunks: Vec<Vec<u64>> = (0..jobs)
            .map(|w| config.seeds.iter().copied().skip(w).step_by(jobs).collect())
            .collect();
        let mut collected = Vec::new();
        std::thread::scope(|scope| -> Result<()> {
            let handles: Vec<_> = chunks
                .iter()
                .map(|chunk| {
                    scope.spawn(move || -> Result<Vec<SeedResult>> {
                        chunk
                            .iter()
                            .map(|&s| {
                                run_seed(
                                    dataset,
                                    problem,
                                    &config.params,
                                    s,
                                    config.snapshot_period,
                                )
                            })
                            .collect()
                    })
                })
                .collect();
            for h in handles {
                collected.extend(h.join().expect("seed worker panicked")?);
            }
            Ok(())
        })?;
        collected
    };
    // deterministic aggregation regardless of worker scheduling
    results.sort_by_key(|r| r.seed);
    Ok(results)
}

fn curve_csv(points: &[CurvePoint]) -> String {
    let mut s = String::from("seed,t,pct_scs,accuracy\n");
    for p in points {
        let _ = writeln!(s, "{},{},{},{}", p.seed, p.t, p.pct_scs, p.accuracy);
    }
    s
}

fn mean_curve_csv(per_seed: &[SeedResult]) -> String {
    let mut s = String::from("seed,t,pct_scs,accuracy\n");
    let n = per_seed.len();
    if n == 0 {
        return s;
    }
    let points = per_seed.iter().map(|r| r.curve.len()).min().unwrap_or(0);
    for i in 0..points {
        let t = per_seed[0].curve[i].t;
        let pct: f64 = per_seed.iter().map(|r| r.curve[i].pct_scs).sum::<f64>() / n as f64;
        let acc: f64 = per_seed.iter().map(|r| r.curve[i].accuracy).sum::<f64>() / n as f64;
        let _ = writeln!(s, "mean,{t},{pct},{acc}");
    }
    s
}

fn write_file(dir: &Path, name: &str, content: &str) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, content).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Trains every configured seed on the generated problem, recording %SCS and
/// internally calibrated train accuracy at each snapshot. Writes per-seed
/// curves, the cross-seed mean curve and a summary when an output directory
/// is configured.
pub fn run_artificial_experiment(config: &ExperimentConfig) -> Result<ArtificialSummary> {
    config.validate()?;
    let (dataset, problem) = config.problem.build()?;
    let per_seed = run_seeds(&dataset, &problem, config)?;
    let n = per_seed.len() as f64;
    let full = |x: f64| x >= 1.0 - 1e-12;
    let summary = ArtificialSummary {
        mean_pct_scs: per_seed.iter().map(|r| r.final_pct_scs).sum::<f64>() / n,
        mean_accuracy: per_seed.iter().map(|r| r.final_accuracy).sum::<f64>() / n,
        seeds_full_scs: per_seed.iter().filter(|r| full(r.final_pct_scs)).count(),
        seeds_full_accuracy: per_seed.iter().filter(|r| full(r.final_accuracy)).count(),
        mean_compacted_size: per_seed.iter().map(|r| r.compacted_size as f64).sum::<f64>()
            / n,
        per_seed,
    };
    if let Some(dir) = &config.output_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
        for r in &summary.per_seed {
            write_file(dir, &format!("curve_seed{}.csv", r.seed), &curve_csv(&r.curve))?;
        }
        write_file(dir, "curve_mean.csv", &mean_curve_csv(&summary.per_seed))?;
        write_file(dir, "summary.txt", &summary.key_value_text())?;
        write_file(dir, "summary.csv", &summary.csv_text())?;
    }
    Ok(summary)
}

/// Predicts every row of `data` with a ruleset trained elsewhere. Pcut and
/// Ival calibrate their threshold on `train` only (pass the training split,
/// never the test split). An explicit threshold skips calibration.
pub fn predict_dataset(
    ruleset: &Ruleset,
    data: &Dataset,
    method: InferenceMethod,
    threshold: Option<Threshold>,
    train: &Dataset,
    best_uses_macro_fitness: bool,
) -> Result<(Vec<Vec<bool>>, Option<Threshold>)> {
    match method {
        InferenceMethod::Best => {
            let preds = data
                .instances
                .iter()
                .map(|i| predict_best(ruleset, i, best_uses_macro_fitness).0)
                .collect();
            Ok((preds, None))
        }
        InferenceMethod::Pcut | InferenceMethod::Ival => {
            let t = match threshold {
                Some(t) => t,
                None if method == InferenceMethod::Pcut => {
                    let lca = label_cardinality(train)?;
                    calibrate_pcut(ruleset, train, lca, &default_grid())?
                }
                None => calibrate_ival(ruleset, train, &default_grid())?,
            };
            let preds = data
                .instances
                .iter()
                .map(|i| apply_threshold(&compute_votes(ruleset, i), t))
                .collect();
            Ok((preds, Some(t)))
        }
    }
}

/// Metrics for one inference method on one fold.
#[derive(Debug, Clone)]
pub struct MethodReport {
    pub method: InferenceMethod,
    pub threshold: Option<f64>,
    pub report: EvaluationReport,
}

/// All method reports for one (fold, seed) pair.
#[derive(Debug, Clone)]
pub struct FoldReport {
    pub fold: usize,
    pub seed: u64,
    pub methods: Vec<MethodReport>,
}

/// Configuration of a k-fold evaluation run.
#[derive(Debug, Clone)]
pub struct EvaluationConfig {
    pub params: HyperParams,
    /// Number of folds; 1 evaluates on the training data itself.
    pub folds: usize,
    pub seed: u64,
    pub methods: Vec<InferenceMethod>,
}

/// Trains once per fold and evaluates the same trained population under every
/// requested method.
pub fn run_evaluation(dataset: &Dataset, config: &EvaluationConfig) -> Result<Vec<FoldReport>> {
    if config.methods.is_empty() {
        return Err(Error::Config("no inference methods requested".into()));
    }
    let splits: Vec<(Dataset, Dataset)> = if config.folds <= 1 {
        vec![(dataset.clone(), dataset.clone())]
    } else {
        crate::data::kfold_split(dataset, config.folds, config.seed)?
    };
    let mut reports = Vec::new();
    for (fold, (train_split, test_split)) in splits.iter().enumerate() {
        let mut params = config.params.clone();
        params.seed = config.seed;
        let mut trainer = Trainer::new(train_split, params.clone())?;
        for _ in 0..params.iterations {
            trainer.step();
        }
        let ruleset = Ruleset::from_population(&trainer.population);
        let truths: Vec<Vec<bool>> =
            test_split.instances.iter().map(|i| i.labels.clone()).collect();
        let mut methods = Vec::new();
        for &method in &config.methods {
            let (preds, t) = predict_dataset(
                &ruleset,
                test_split,
                method,
                None,
                train_split,
                params.best_uses_macro_fitness,
            )?;
            methods.push(MethodReport {
                method,
                threshold: t.map(Threshold::value),
                report: EvaluationReport::compute(&preds, &truths)?,
            });
        }
        reports.push(FoldReport { fold, seed: config.seed, methods });
    }
    Ok(reports)
}
