mod config;
mod repl;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;

use orthoview::dataset::{
    load_dataset, merge, synthetic_categories, synthetic_clouds, write_cloud_dataset, FeatureSource, SyntheticSpec,
};
use orthoview::descriptor::analyze;
use orthoview::grasp::{GraspConfig, GraspOutcome};
use orthoview::protocol::{write_events_jsonl, write_summary_csv, FeatureDataset};
use orthoview::{
    generate_shape, read_cloud, summarize, write_cloud, CategoryMemory, CloudFormat, FeatureConfig, GripperPose,
    Metric, Resolution, ShapeKind, TemplateStore,
};

use config::{parse_metric, parse_tau_arg, RunConfig};

#[derive(Parser)]
#[command(
    name = "orthoview",
    version,
    about = "Open-ended object category learning from orthographic depth views"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct FeatureArgs {
    /// Grid side length in cells.
    #[arg(long, default_value_t = 64)]
    resolution: usize,
    /// Blocks per grid side.
    #[arg(long, default_value_t = 8)]
    blocks: usize,
}

impl FeatureArgs {
    fn config(self) -> FeatureConfig {
        FeatureConfig {
            resolution: Resolution::square(self.resolution),
            blocks: self.blocks,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the global feature of one cloud.
    Feature {
        input: PathBuf,
        /// Output file; defaults to `<stem>.feat` next to the input.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the three depth views as PGM images into this directory.
        #[arg(long)]
        views: Option<PathBuf>,
        #[command(flatten)]
        features: FeatureArgs,
    },
    /// Run the simulated-teacher evaluation over a dataset.
    Protocol(ProtocolArgs),
    /// Interactive teaching session reading commands from stdin.
    Teach {
        /// Memory snapshot to start from.
        #[arg(long)]
        memory: Option<PathBuf>,
        #[arg(long, default_value = "cosine", value_parser = parse_metric)]
        metric: Metric,
        #[arg(long, default_value = "inf", value_parser = parse_tau_arg)]
        tau_unknown: f64,
        #[command(flatten)]
        features: FeatureArgs,
    },
    /// Learn and reuse grasp templates.
    #[command(subcommand)]
    Grasp(GraspCommand),
    /// Write synthetic clouds.
    #[command(subcommand)]
    Generate(GenerateCommand),
}

#[derive(Args)]
struct ProtocolArgs {
    /// Run configuration (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dataset root with one directory per category.
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long, value_parser = parse_metric)]
    metric: Option<Metric>,
    #[arg(long, value_parser = parse_tau_arg)]
    tau_unknown: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    window_factor: Option<usize>,
    #[arg(long)]
    max_stall: Option<usize>,
    /// Seeds to run; repeat or separate with commas.
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,
    /// Use precomputed `<instance>.<view>.feat` files of this dimension.
    #[arg(long)]
    external_features: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum GraspCommand {
    /// Store a demonstrated grasp for a cloud.
    Learn {
        cloud: PathBuf,
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        label: String,
        /// World pose as `px py pz qw qx qy qz`.
        #[arg(long, num_args = 7, allow_negative_numbers = true)]
        pose: Vec<f64>,
        #[command(flatten)]
        features: FeatureArgs,
    },
    /// Transfer the closest stored grasp onto a cloud.
    Query {
        cloud: PathBuf,
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        tau: f64,
    },
}

#[derive(Subcommand)]
enum GenerateCommand {
    /// Sample one shape, e.g. `box:4,2,1` or `cylinder:1,3`.
    Shape {
        kind: ShapeKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 2000)]
        points: usize,
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Write a synthetic category dataset.
    Dataset {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 30)]
        instances: usize,
        /// Number of categories, taken from the built-in list.
        #[arg(long, default_value_t = 10)]
        categories: usize,
        #[arg(long, default_value_t = 2000)]
        points: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "pcd")]
        format: String,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("ORTHOVIEW_LOG")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Feature {
            input,
            out,
            views,
            features,
        } => feature(&input, out, views, features.config()),
        Command::Protocol(args) => protocol(args),
        Command::Teach {
            memory,
            metric,
            tau_unknown,
            features,
        } => teach(memory, metric, tau_unknown, features.config()),
        Command::Grasp(cmd) => grasp(cmd),
        Command::Generate(cmd) => generate(cmd),
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().unwrap_or_default().to_string_lossy().into_owned()
}

fn feature(input: &Path, out: Option<PathBuf>, views: Option<PathBuf>, config: FeatureConfig) -> Result<ExitCode> {
    config.validate()?;
    let cloud = read_cloud(input)?;
    let analysis = analyze(&cloud, &config)?;
    let name = stem(input);
    let out = out.unwrap_or_else(|| input.with_file_name(format!("{name}.feat")));
    fs::write(&out, analysis.feature.to_text() + "\n").with_context(|| format!("writing {}", out.display()))?;
    info!(
        "{} -> {} ({} values)",
        input.display(),
        out.display(),
        analysis.feature.dim()
    );
    if let Some(dir) = views {
        fs::create_dir_all(&dir)?;
        for grid in &analysis.views {
            fs::write(dir.join(format!("{name}.{}.pgm", grid.view().name())), grid.to_pgm())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn resolve_run_config(args: ProtocolArgs) -> Result<RunConfig> {
    let mut c = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(d) = args.dataset {
        c.dataset = Some(d);
    }
    if let Some(r) = args.resolution {
        c.features.resolution = Resolution::square(r);
    }
    if let Some(b) = args.blocks {
        c.features.blocks = b;
    }
    if let Some(m) = args.metric {
        c.protocol.metric = m;
    }
    if let Some(t) = args.tau_unknown {
        c.protocol.tau_unknown = t;
    }
    if let Some(t) = args.threshold {
        c.protocol.intro_threshold = t;
    }
    if let Some(w) = args.window_factor {
        c.protocol.window_factor = w;
    }
    if let Some(s) = args.max_stall {
        c.protocol.max_stall = s;
    }
    if !args.seed.is_empty() {
        c.seeds = args.seed;
    }
    if c.seeds.is_empty() {
        c.seeds = vec![c.protocol.seed];
    }
    if let Some(d) = args.external_features {
        c.external_features = Some(d);
    }
    if let Some(o) = args.out {
        c.out = o;
    }
    c.validate()?;
    Ok(c)
}

fn load_run_dataset(c: &RunConfig) -> Result<FeatureDataset> {
    let source = match c.external_features {
        Some(dim) => FeatureSource::External { dim },
        None => FeatureSource::Clouds(c.features),
    };
    let mut parts = Vec::new();
    if let Some(root) = &c.dataset {
        parts.push(load_dataset(root, source, None)?);
    }
    for (id, root) in &c.contexts {
        parts.push(load_dataset(root, source, Some(id))?);
    }
    let dataset = merge(parts);
    dataset.validate()?;
    Ok(dataset)
}

fn protocol(args: ProtocolArgs) -> Result<ExitCode> {
    let c = resolve_run_config(args)?;
    let dataset = load_run_dataset(&c)?;
    info!(
        "{} categories, {} instances, seeds {:?}",
        dataset.categories.len(),
        dataset.total_instances(),
        c.seeds
    );
    fs::create_dir_all(&c.out)?;

    let reports = std::thread::scope(|s| {
        let handles: Vec<_> = c
            .seeds
            .iter()
            .map(|&seed| {
                let config = c.protocol.clone().with_seed(seed);
                let dataset = &dataset;
                s.spawn(move || orthoview::run_experiment(dataset, &config))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("experiment thread panicked"))
            .collect::<orthoview::Result<Vec<_>>>()
    })?;

    for r in &reports {
        fs::write(c.out.join(format!("report_seed{}.json", r.seed)), r.to_json()?)?;
        let mut events = BufWriter::new(File::create(c.out.join(format!("events_seed{}.jsonl", r.seed)))?);
        write_events_jsonl(&r.events, &mut events)?;
        events.flush()?;
        let fmt = |v: Option<f64>| v.map_or_else(|| "n/a".to_owned(), |v| format!("{v:.4}"));
        println!(
            "seed {}: {} learned {} questions {} gca {} apa {}",
            r.seed,
            r.termination.name(),
            r.learned_categories,
            r.qc_iterations,
            fmt(r.gca),
            fmt(r.apa)
        );
    }
    write_summary_csv(&reports, File::create(c.out.join("summary.csv"))?)?;
    fs::write(c.out.join("summary.json"), summarize(&reports)?.to_json()?)?;
    Ok(ExitCode::SUCCESS)
}

fn teach(memory: Option<PathBuf>, metric: Metric, tau_unknown: f64, features: FeatureConfig) -> Result<ExitCode> {
    features.validate()?;
    let memory = match memory {
        Some(p) => CategoryMemory::load(&p)?,
        None => CategoryMemory::new(),
    };
    let mut session = repl::Session {
        memory,
        features,
        metric,
        tau_unknown,
    };
    session.run(io::stdin().lock(), io::stdout().lock())?;
    Ok(ExitCode::SUCCESS)
}

fn grasp(cmd: GraspCommand) -> Result<ExitCode> {
    match cmd {
        GraspCommand::Learn {
            cloud,
            store,
            label,
            pose,
            features,
        } => {
            let pose = GripperPose::from_array(pose.try_into().map_err(|_| anyhow::anyhow!("pose needs 7 values"))?)?;
            let mut templates = if store.exists() {
                TemplateStore::load(&store)?
            } else {
                TemplateStore::new(GraspConfig {
                    features: features.config(),
                    ..Default::default()
                })
            };
            templates.learn_grasp(&read_cloud(&cloud)?, &label, &pose)?;
            templates.save(&store)?;
            println!("stored {label} ({} templates)", templates.len());
            Ok(ExitCode::SUCCESS)
        }
        GraspCommand::Query { cloud, store, tau } => {
            let templates = TemplateStore::load(&store)?;
            match templates.recognize_grasp(&read_cloud(&cloud)?, tau)? {
                GraspOutcome::Familiar(m) => {
                    let p = m.world_pose.to_array();
                    println!(
                        "{} {} {} {} {} {} {} {} {:.6}",
                        m.affordance_label,
                        p[0],
                        p[1],
                        p[2],
                        p[3],
                        p[4],
                        p[5],
                        p[6],
                        m.similarity()
                    );
                    Ok(ExitCode::SUCCESS)
                }
                GraspOutcome::NotFamiliar { best_distance } => {
                    println!("not familiar (best distance {best_distance:.4})");
                    Ok(ExitCode::from(1))
                }
            }
        }
    }
}

fn generate(cmd: GenerateCommand) -> Result<ExitCode> {
    match cmd {
        GenerateCommand::Shape {
            kind,
            out,
            points,
            noise,
            seed,
        } => {
            let format = CloudFormat::from_path(&out).context("output extension must be pcd, ply, xyz or txt")?;
            let cloud = generate_shape(kind, points, noise, seed)?;
            fs::write(&out, write_cloud(&cloud, format)?)?;
            Ok(ExitCode::SUCCESS)
        }
        GenerateCommand::Dataset {
            out,
            instances,
            categories,
            points,
            seed,
            format,
        } => {
            let format = CloudFormat::from_path(Path::new(&format!("x.{format}"))).context("unknown cloud format")?;
            let all = synthetic_categories();
            if categories == 0 || categories > all.len() {
                bail!("categories must be between 1 and {}", all.len());
            }
            let spec = SyntheticSpec {
                categories: all.into_iter().take(categories).collect(),
                instances_per_category: instances,
                n_points: points,
                seed,
                ..Default::default()
            };
            write_cloud_dataset(&out, &synthetic_clouds(&spec)?, format)?;
            println!("wrote {} clouds to {}", categories * instances, out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
