use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use harness_cli::{
    accuracy_plot, align_lp_angles, angle_scatter_plot, qwp_angle_scatter, run_sweep, summarize,
    write_angles_csv, write_plans, write_results_csv, write_summary_csv, SweepSpec,
};
use learn::{Hyper, Regime};
use materials_synth::{generate_dataset, read_dataset, write_dataset, Dataset, DatasetSpec, SynthConfig};
use mueller_core::MuellerMatrix;
use polarimeter::{estimate_mueller, intensity, ConditionTag, DesignMatrix, MeasurementPlan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "harness",
    about = "Simulated ellipsometry experiments: dataset generation, training sweeps, Mueller estimation, and angle analysis"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate the synthetic labeled Mueller-matrix dataset.
    Generate {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 40)]
        materials_per_category: u32,
        #[arg(long, default_value_t = 10)]
        samples_per_material: u32,
        /// Output directory for dataset.jsonl and manifest.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train over condition x regime x K with multi-trial statistics.
    Sweep {
        /// Dataset directory written by `generate`.
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated subset of LP,QWP,LP+QWP.
        #[arg(long, value_delimiter = ',')]
        conditions: Option<Vec<String>>,
        /// Comma-separated subset of Random,Uniform,Optimized.
        #[arg(long, value_delimiter = ',')]
        regimes: Option<Vec<String>>,
        /// Comma-separated capture counts.
        #[arg(long = "k", value_delimiter = ',')]
        k_values: Option<Vec<usize>>,
        #[arg(long, default_value_t = 10)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        base_seed: u64,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        classifier_lr: Option<f64>,
        #[arg(long)]
        angle_lr: Option<f64>,
        /// Evenly spaced test orientations per sample (0 = dataset
        /// orientation only).
        #[arg(long)]
        eval_rotations: Option<usize>,
        /// Also write accuracy.svg.
        #[arg(long)]
        plot: bool,
        /// JSON file whose fields override the flags above.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Round-trip demo: simulate intensities for one sample and solve
    /// the least-squares estimate.
    Estimate {
        /// Measurement plan JSON.
        #[arg(long)]
        plan: PathBuf,
        /// Dataset directory to take the sample from.
        #[arg(long, requires = "sample")]
        dataset: Option<PathBuf>,
        /// Sample index within the dataset.
        #[arg(long)]
        sample: Option<usize>,
        /// Seed for a random sample matrix instead of a dataset sample.
        #[arg(long, conflicts_with = "dataset")]
        m_seed: Option<u64>,
    },
    /// Align and aggregate optimized plan angles across trials.
    AnalyzeAngles {
        /// Plan JSON files, all with the same condition.
        #[arg(required = false)]
        plans: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Also write angles.svg for QWP scatter data.
        #[arg(long)]
        plot: bool,
    },
}

/// Exit codes: 2 for usage or parse problems, 3 for runtime failures.
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Runtime(e) => e,
        }
    }
}

fn usage<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Usage(e.into())
}

fn runtime<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Runtime(e.into())
}

fn main() {
    let cli = Cli::parse();
    if let Err(f) = run(cli) {
        eprintln!("error: {:#}", f.error());
        std::process::exit(f.code());
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.cmd {
        Cmd::Generate {
            seed,
            materials_per_category,
            samples_per_material,
            out,
        } => cmd_generate(seed, materials_per_category, samples_per_material, &out),
        Cmd::Sweep {
            dataset,
            out,
            conditions,
            regimes,
            k_values,
            trials,
            base_seed,
            steps,
            batch_size,
            classifier_lr,
            angle_lr,
            eval_rotations,
            plot,
            config,
        } => {
            let mut spec = SweepSpec {
                trials,
                base_seed,
                ..SweepSpec::default()
            };
            if let Some(c) = conditions {
                spec.conditions = parse_conditions(&c).map_err(usage)?;
            }
            if let Some(r) = regimes {
                spec.regimes = parse_regimes(&r).map_err(usage)?;
            }
            if let Some(k) = k_values {
                spec.k_values = k;
            }
            if let Some(v) = eval_rotations {
                spec.eval_rotations = v;
            }
            let mut hyper = Hyper::default();
            if let Some(v) = steps {
                hyper.steps = v;
            }
            if let Some(v) = batch_size {
                hyper.batch_size = v;
            }
            if let Some(v) = classifier_lr {
                hyper.classifier_lr = v;
            }
            if let Some(v) = angle_lr {
                hyper.angle_lr = v;
            }
            spec.hyper = hyper;
            if let Some(path) = config {
                apply_config(&mut spec, &path)?;
            }
            cmd_sweep(&dataset, &out, &spec, plot)
        }
        Cmd::Estimate {
            plan,
            dataset,
            sample,
            m_seed,
        } => cmd_estimate(&plan, dataset.as_deref(), sample, m_seed),
        Cmd::AnalyzeAngles { plans, out, plot } => cmd_analyze_angles(&plans, &out, plot),
    }
}

fn parse_conditions(names: &[String]) -> anyhow::Result<Vec<ConditionTag>> {
    names
        .iter()
        .map(|n| match n.as_str() {
            "LP" => Ok(ConditionTag::Lp),
            "QWP" => Ok(ConditionTag::Qwp),
            "LP+QWP" | "LP_QWP" => Ok(ConditionTag::LpQwp),
            other => Err(anyhow!("unknown condition {other:?} (expected LP, QWP, or LP+QWP)")),
        })
        .collect()
}

fn parse_regimes(names: &[String]) -> anyhow::Result<Vec<Regime>> {
    names
        .iter()
        .map(|n| match n.as_str() {
            "Random" => Ok(Regime::Random),
            "Uniform" => Ok(Regime::Uniform),
            "Optimized" => Ok(Regime::Optimized),
            other => Err(anyhow!(
                "unknown regime {other:?} (expected Random, Uniform, or Optimized)"
            )),
        })
        .collect()
}

/// Partial sweep config; present fields override the flags.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepConfigFile {
    conditions: Option<Vec<String>>,
    regimes: Option<Vec<String>>,
    k_values: Option<Vec<usize>>,
    trials: Option<usize>,
    base_seed: Option<u64>,
    steps: Option<usize>,
    batch_size: Option<usize>,
    classifier_lr: Option<f64>,
    angle_lr: Option<f64>,
    eval_rotations: Option<usize>,
}

fn apply_config(spec: &mut SweepSpec, path: &Path) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))
        .map_err(runtime)?;
    let file: SweepConfigFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing config {}", path.display()))
        .map_err(usage)?;
    if let Some(c) = file.conditions {
        spec.conditions = parse_conditions(&c).map_err(usage)?;
    }
    if let Some(r) = file.regimes {
        spec.regimes = parse_regimes(&r).map_err(usage)?;
    }
    if let Some(k) = file.k_values {
        spec.k_values = k;
    }
    if let Some(t) = file.trials {
        spec.trials = t;
    }
    if let Some(s) = file.base_seed {
        spec.base_seed = s;
    }
    if let Some(v) = file.steps {
        spec.hyper.steps = v;
    }
    if let Some(v) = file.batch_size {
        spec.hyper.batch_size = v;
    }
    if let Some(v) = file.classifier_lr {
        spec.hyper.classifier_lr = v;
    }
    if let Some(v) = file.angle_lr {
        spec.hyper.angle_lr = v;
    }
    if let Some(v) = file.eval_rotations {
        spec.eval_rotations = v;
    }
    Ok(())
}

fn cmd_generate(
    seed: u64,
    materials_per_category: u32,
    samples_per_material: u32,
    out: &Path,
) -> Result<(), Failure> {
    let spec = DatasetSpec {
        materials_per_category,
        samples_per_material,
        seed,
    };
    let dataset = generate_dataset(&spec, &SynthConfig::default()).map_err(runtime)?;
    write_dataset(out, &dataset, &spec)
        .with_context(|| format!("writing dataset to {}", out.display()))
        .map_err(runtime)?;
    println!(
        "wrote {} samples ({} materials x {} samples) to {}",
        dataset.samples.len(),
        5 * materials_per_category,
        samples_per_material,
        out.display()
    );
    Ok(())
}

fn load_dataset(dir: &Path) -> Result<Dataset, Failure> {
    let (dataset, _) = read_dataset(dir)
        .with_context(|| format!("reading dataset from {}", dir.display()))
        .map_err(|e| {
            // Malformed records are a parse problem, missing files are not.
            usage(e)
        })?;
    Ok(dataset)
}

fn cmd_sweep(dataset_dir: &Path, out: &Path, spec: &SweepSpec, plot: bool) -> Result<(), Failure> {
    let dataset = load_dataset(dataset_dir)?;
    let result = run_sweep(&dataset, spec).map_err(runtime)?;
    for note in &result.skipped {
        eprintln!("{note}");
    }
    std::fs::create_dir_all(out).map_err(runtime)?;
    write_results_csv(&out.join("results.csv"), &result.rows).map_err(runtime)?;
    let summary = summarize(&result.rows);
    write_summary_csv(&out.join("summary.csv"), &summary).map_err(runtime)?;
    write_plans(out, &result.rows).map_err(runtime)?;
    if plot {
        std::fs::write(out.join("accuracy.svg"), accuracy_plot(&summary)).map_err(runtime)?;
    }
    for s in &summary {
        println!(
            "{:7} {:9} K={:<3} accuracy {:.3} +/- {:.3} over {} trials",
            s.condition.label(),
            s.regime.label(),
            s.k,
            s.mean_accuracy,
            s.std_accuracy,
            s.n_trials
        );
    }
    Ok(())
}

fn frobenius(a: &MuellerMatrix, b: &MuellerMatrix) -> f64 {
    let mut sum = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            sum += (a[(i, j)] - b[(i, j)]).powi(2);
        }
    }
    sum.sqrt()
}

fn load_plan(path: &Path) -> Result<MeasurementPlan, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading plan {}", path.display()))
        .map_err(runtime)?;
    serde_json::from_str(&text)
        .with_context(|| format!("parsing plan {}", path.display()))
        .map_err(usage)
}

fn print_matrix(label: &str, m: &MuellerMatrix) {
    println!("{label}:");
    for i in 0..4 {
        println!(
            "  [{:10.6} {:10.6} {:10.6} {:10.6}]",
            m[(i, 0)],
            m[(i, 1)],
            m[(i, 2)],
            m[(i, 3)]
        );
    }
}

fn cmd_estimate(
    plan_path: &Path,
    dataset: Option<&Path>,
    sample: Option<usize>,
    m_seed: Option<u64>,
) -> Result<(), Failure> {
    let plan = load_plan(plan_path)?;
    let m = match (dataset, sample, m_seed) {
        (Some(dir), Some(idx), None) => {
            let ds = load_dataset(dir)?;
            ds.samples
                .get(idx)
                .ok_or_else(|| usage(anyhow!("sample index {idx} out of range")))?
                .mueller
        }
        (None, None, seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.unwrap_or(0));
            let mut flat = [0.0; 16];
            for x in &mut flat {
                *x = rng.gen_range(-0.5..0.5);
            }
            flat[0] = 1.0;
            MuellerMatrix::from_flat(&flat)
        }
        _ => {
            return Err(usage(anyhow!(
                "pass either --dataset with --sample, or --m-seed"
            )))
        }
    };
    let f: Vec<f64> = plan
        .captures
        .iter()
        .map(|c| intensity(&m, c, plan.condition, plan.source_intensity))
        .collect();
    let (recovered, residual) = estimate_mueller(&plan, &f);
    let diag = DesignMatrix::build(&plan).diagnostics();

    print_matrix("true matrix", &m);
    print_matrix("recovered matrix", &recovered);
    let full = frobenius(&m, &recovered);
    let mut block = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            block += (m[(i, j)] - recovered[(i, j)]).powi(2);
        }
    }
    println!("frobenius error (full):          {full:.3e}");
    println!("frobenius error (upper 3x3):     {:.3e}", block.sqrt());
    println!("residual:                        {residual:.3e}");
    println!("design rank:                     {}", diag.rank);
    println!("condition number:                {:.3e}", diag.condition_number);
    if diag.rank <= 9 && plan.condition == ConditionTag::Lp {
        println!("note: LP designs sense only the upper-left 3x3 block; the fourth row and column are reported as zero");
    }
    Ok(())
}

fn cmd_analyze_angles(plan_paths: &[PathBuf], out: &Path, plot: bool) -> Result<(), Failure> {
    let plans: Vec<MeasurementPlan> = plan_paths
        .iter()
        .map(|p| load_plan(p))
        .collect::<Result<_, _>>()?;
    std::fs::create_dir_all(out).map_err(runtime)?;
    let analysis = match plans.first().map(|p| p.condition) {
        None | Some(ConditionTag::Qwp) => qwp_angle_scatter(&plans).map_err(usage)?,
        Some(ConditionTag::Lp) => align_lp_angles(&plans).map_err(usage)?,
        Some(ConditionTag::LpQwp) => {
            return Err(usage(anyhow!(
                "angle analysis is defined for LP and QWP plans only"
            )))
        }
    };
    write_angles_csv(&out.join("angles.csv"), &analysis).map_err(runtime)?;
    if plot {
        std::fs::write(out.join("angles.svg"), angle_scatter_plot(&analysis)).map_err(runtime)?;
    }
    for s in &analysis.per_rank {
        println!(
            "rank {}: lg {:7.2} la {:7.2} qg {:7.2} qa {:7.2} rel {:7.2} (deg, mean)",
            s.rank,
            s.mean[0].to_degrees(),
            s.mean[1].to_degrees(),
            s.mean[2].to_degrees(),
            s.mean[3].to_degrees(),
            s.mean[4].to_degrees()
        );
    }
    Ok(())
}
