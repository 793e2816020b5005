use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use viewlab::classifier::ClassifierParams;
use viewlab::evalbench::{
    attack_success_rate, bench_attacks, bench_training, emit_dataset, loss_landscape_grid, AttackSuiteConfig,
    AxisSpec, Desk, DeskConfig, PlantedLandscape, TrainingSuiteConfig,
};
use viewlab::geometry::{axis_index, CameraIntrinsics, Viewpoint, ViewpointBounds};
use viewlab::gmvfool::{gmvfool_attack, init_mixture, write_trace_csv, AttackConfig, DistributionCheckpoint};
use viewlab::optim::OptimizerKind;
use viewlab::renderer::{load_library, save_library, SceneField};
use viewlab::viat::{derive_seed, viat_train_observed, write_metrics_csv, TrainConfig, Workbench};

#[derive(Parser)]
#[command(name = "viewlab", version, about = "Adversarial viewpoint attacks and robust training on synthetic scenes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Suite {
    Table4,
    Table2,
}

#[derive(Clone, Copy, ValueEnum)]
enum Planted {
    Single,
    Double,
}

#[derive(Subcommand)]
enum Command {
    /// Learn an adversarial viewpoint distribution for one scene.
    Attack {
        /// Scene JSON (a single scene or a library; see --object).
        #[arg(long)]
        scene: PathBuf,
        /// Index into the scene file when it holds a library.
        #[arg(long, default_value_t = 0)]
        object: usize,
        #[arg(long)]
        classifier: PathBuf,
        #[arg(long = "K", default_value_t = 15)]
        k: usize,
        #[arg(long = "T", default_value_t = 50)]
        t: usize,
        #[arg(long, default_value_t = 100)]
        q: usize,
        #[arg(long, default_value_t = 0.01)]
        lambda: f64,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long, value_enum, default_value = "adam")]
        optimizer: OptimizerArg,
        #[arg(long, default_value_t = 32)]
        image_size: usize,
        /// Renders drawn from the result to measure the success rate.
        #[arg(long, default_value_t = 100)]
        eval_samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Adversarial or augmentation training from a JSON run config.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "train_run")]
        out: PathBuf,
    },
    /// Loss over two swept viewpoint axes, as CSV.
    Landscape {
        #[arg(long, default_value = "psi,phi")]
        axes: String,
        #[arg(long, default_value = "72x28")]
        res: String,
        #[arg(long, requires = "classifier")]
        scene: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        object: usize,
        #[arg(long)]
        classifier: Option<PathBuf>,
        /// Use a synthetic landscape instead of a scene.
        #[arg(long, value_enum, conflicts_with = "scene")]
        planted: Option<Planted>,
        #[arg(long, default_value_t = 32)]
        image_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "landscape.csv")]
        out: PathBuf,
    },
    /// Run a benchmark suite and write JSON and CSV reports.
    Bench {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Suite config JSON; defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "bench")]
        out: PathBuf,
    },
    /// Render adversarial-viewpoint images with a manifest.
    EmitDataset {
        /// Samples per object.
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        classes: usize,
        #[arg(long, default_value_t = 4)]
        per_class: usize,
        #[arg(long = "K", default_value_t = 15)]
        k: usize,
        #[arg(long = "T", default_value_t = 50)]
        t: usize,
        #[arg(long, default_value_t = 100)]
        q: usize,
        #[arg(long, default_value_t = 32)]
        image_size: usize,
        #[arg(long, default_value_t = 600)]
        pretrain_steps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "dataset")]
        out: PathBuf,
    },
    /// Write a procedural object library as JSON.
    MakeLibrary {
        #[arg(long, default_value_t = 3)]
        classes: usize,
        #[arg(long, default_value_t = 4)]
        per_class: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "library.json")]
        out: PathBuf,
    },
    /// Standard-train a classifier on natural views of a library.
    Pretrain {
        #[arg(long)]
        library: PathBuf,
        #[arg(long, default_value_t = 600)]
        steps: usize,
        #[arg(long, default_value_t = 32)]
        image_size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "classifier.json")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OptimizerArg {
    Adam,
    Sgd,
}

impl From<OptimizerArg> for OptimizerKind {
    fn from(o: OptimizerArg) -> Self {
        match o {
            OptimizerArg::Adam => OptimizerKind::Adam,
            OptimizerArg::Sgd => OptimizerKind::Sgd,
        }
    }
}

/// Config file for `train`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default)]
struct TrainRun {
    desk: DeskConfig,
    train: TrainConfig,
    /// Save classifier and distributions after every epoch.
    checkpoints: bool,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    config: &'a TrainRun,
    seed: u64,
    standard_clean_acc: f64,
    metrics: &'a [viewlab::viat::EpochMetrics],
}

#[derive(Serialize)]
struct AttackSummary {
    queries: u64,
    best_loss: f64,
    best_viewpoint: Viewpoint,
    entropy: f64,
    entropy_std_error: f64,
    success_rate: f64,
}

fn load_scenes(path: &Path) -> Result<Vec<SceneField>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if let Ok(scene) = SceneField::from_json(&text) {
        return Ok(vec![scene]);
    }
    Ok(load_library(path)?)
}

fn pick_scene(path: &Path, object: usize) -> Result<SceneField> {
    let scenes = load_scenes(path)?;
    let n = scenes.len();
    scenes
        .into_iter()
        .nth(object)
        .with_context(|| format!("object {object} out of range ({n} scenes)"))
}

fn intrinsics(size: usize) -> CameraIntrinsics {
    CameraIntrinsics {
        width: size,
        height: size,
        ..Default::default()
    }
}

fn parse_axes(s: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        bail!("--axes takes two comma-separated names, got {s:?}");
    }
    let idx = |p: &str| axis_index(p).with_context(|| format!("unknown axis {p:?}"));
    Ok((idx(parts[0])?, idx(parts[1])?))
}

fn parse_res(s: &str) -> Result<(usize, usize)> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .with_context(|| format!("--res takes RxC, got {s:?}"))?;
    Ok((r.trim().parse()?, c.trim().parse()?))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Attack {
            scene,
            object,
            classifier,
            k,
            t,
            q,
            lambda,
            eta,
            optimizer,
            image_size,
            eval_samples,
            seed,
            out,
        } => {
            let scene = pick_scene(&scene, object)?;
            let params = ClassifierParams::load_json(&classifier)?;
            let bounds = ViewpointBounds::standard();
            let wb = Workbench::new(vec![scene], intrinsics(image_size), bounds.clone(), 0, seed)?;
            let optimizer: OptimizerKind = optimizer.into();
            let base = match optimizer {
                OptimizerKind::Adam => AttackConfig::default(),
                OptimizerKind::Sgd => AttackConfig::sgd(),
            };
            let config = AttackConfig {
                k,
                iterations: t,
                samples: q,
                lambda,
                eta: eta.unwrap_or(base.eta),
                optimizer,
                seed,
                ..base
            };
            let oracle = wb.oracle(&params, 0)?;
            let result = gmvfool_attack(&oracle, &init_mixture(k, seed)?, &bounds, &config)?;
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x5A]));
            let rate = attack_success_rate(&params, &wb, std::slice::from_ref(&result.params), &[0], eval_samples, &mut rng)?[0];
            fs::create_dir_all(&out)?;
            DistributionCheckpoint::new(&result.params, &bounds, seed, t).save(&out.join("distribution.json"))?;
            write_trace_csv(&result.trace, fs::File::create(out.join("trace.csv"))?)?;
            let summary = AttackSummary {
                queries: result.queries,
                best_loss: result.best_loss,
                best_viewpoint: result.best_viewpoint,
                entropy: result.entropy.value,
                entropy_std_error: result.entropy.std_error,
                success_rate: rate,
            };
            fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
            println!(
                "queries {} best loss {:.4} entropy {:.3} success rate {:.3}",
                summary.queries, summary.best_loss, summary.entropy, summary.success_rate
            );
        }
        Command::Train { config, seed, out } => {
            let text = fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut run: TrainRun = serde_json::from_str(&text).context("parsing train config")?;
            if let Some(s) = seed {
                run.desk.seed = s;
                run.train.seed = s;
            }
            run.train.validate()?;
            let desk = Desk::build(&run.desk)?;
            let standard_clean_acc = viewlab::viat::accuracy(&desk.standard, &desk.clean_eval)?;
            fs::create_dir_all(&out)?;
            desk.standard.save_json(&out.join("standard.json"))?;
            let ckpt_dir = out.join("checkpoints");
            let (params, state, history) = viat_train_observed(
                &desk.workbench,
                &desk.standard,
                &run.train,
                &desk.clean_eval,
                |m, params, state| {
                    println!(
                        "epoch {} loss {:.4} clean {:.3} own {} fresh {}",
                        m.epoch,
                        m.mean_loss,
                        m.clean_acc,
                        m.adv_acc_own_attack.map_or("-".into(), |x| format!("{x:.3}")),
                        m.adv_acc_fresh_attack.map_or("-".into(), |x| format!("{x:.3}")),
                    );
                    if run.checkpoints {
                        let dir = ckpt_dir.join(format!("epoch_{:03}", m.epoch));
                        fs::create_dir_all(&dir)?;
                        params.save_json(&dir.join("classifier.json"))?;
                        for (o, d) in state.distributions.iter().enumerate() {
                            DistributionCheckpoint::new(d, &desk.workbench.bounds, run.train.seed, m.epoch)
                                .save(&dir.join(format!("distribution_{o:03}.json")))?;
                        }
                    }
                    Ok(())
                },
            )?;
            params.save_json(&out.join("classifier.json"))?;
            for (o, d) in state.distributions.iter().enumerate() {
                DistributionCheckpoint::new(d, &desk.workbench.bounds, run.train.seed, run.train.epochs)
                    .save(&out.join(format!("distribution_{o:03}.json")))?;
            }
            save_library(&desk.workbench.objects, &out.join("library.json"))?;
            write_metrics_csv(&history, fs::File::create(out.join("metrics.csv"))?)?;
            let manifest = RunManifest {
                config: &run,
                seed: run.train.seed,
                standard_clean_acc,
                metrics: &history,
            };
            fs::write(out.join("run.json"), serde_json::to_string_pretty(&manifest)?)?;
        }
        Command::Landscape {
            axes,
            res,
            scene,
            object,
            classifier,
            planted,
            image_size,
            seed,
            out,
        } => {
            let (a0, a1) = parse_axes(&axes)?;
            let (r0, r1) = parse_res(&res)?;
            let bounds = ViewpointBounds::standard();
            let (rows, cols) = (AxisSpec::full(a0, r0, &bounds), AxisSpec::full(a1, r1, &bounds));
            let grid = match (planted, scene, classifier) {
                (Some(p), _, _) => {
                    let oracle = match p {
                        Planted::Single => PlantedLandscape::single_bump(),
                        Planted::Double => PlantedLandscape::two_bump(),
                    };
                    loss_landscape_grid(&oracle, &Viewpoint::ZERO, rows, cols, &bounds)?
                }
                (None, Some(scene), Some(classifier)) => {
                    let scene = pick_scene(&scene, object)?;
                    let params = ClassifierParams::load_json(&classifier)?;
                    let wb = Workbench::new(vec![scene], intrinsics(image_size), bounds.clone(), 0, seed)?;
                    let oracle = wb.oracle(&params, 0)?;
                    loss_landscape_grid(&oracle, &Viewpoint::ZERO, rows, cols, &bounds)?
                }
                _ => bail!("landscape needs --planted or both --scene and --classifier"),
            };
            grid.write_csv(fs::File::create(&out)?)?;
            let v = grid.argmax_viewpoint();
            println!(
                "max loss {:.4} at {}={:.2} {}={:.2}",
                grid.max_value(),
                axes.split(',').next().unwrap_or_default().trim(),
                v.to_array()[a0],
                axes.split(',').nth(1).unwrap_or_default().trim(),
                v.to_array()[a1]
            );
        }
        Command::Bench { suite, config, seed, out } => {
            let text = config
                .as_ref()
                .map(|p| fs::read_to_string(p).with_context(|| format!("reading {}", p.display())))
                .transpose()?;
            let report = match suite {
                Suite::Table4 => {
                    let mut cfg: AttackSuiteConfig = match text {
                        Some(t) => serde_json::from_str(&t)?,
                        None => AttackSuiteConfig::default(),
                    };
                    cfg.desk.seed = seed;
                    bench_attacks(&cfg)?
                }
                Suite::Table2 => {
                    let mut cfg: TrainingSuiteConfig = match text {
                        Some(t) => serde_json::from_str(&t)?,
                        None => TrainingSuiteConfig::default(),
                    };
                    cfg.desk.seed = seed;
                    cfg.train.seed = seed;
                    bench_training(&cfg)?
                }
            };
            let (json, csv) = report.save(&out)?;
            report.write_csv(std::io::stdout())?;
            eprintln!("wrote {} and {}", json.display(), csv.display());
        }
        Command::EmitDataset {
            n,
            classes,
            per_class,
            k,
            t,
            q,
            image_size,
            pretrain_steps,
            seed,
            out,
        } => {
            let desk = Desk::build(&DeskConfig {
                classes,
                objects_per_class: per_class,
                image_size,
                pretrain_steps,
                seed,
                ..Default::default()
            })?;
            let wb = &desk.workbench;
            let mut dists = Vec::with_capacity(wb.objects.len());
            for o in 0..wb.objects.len() {
                let config = AttackConfig {
                    k,
                    iterations: t,
                    samples: q,
                    seed: derive_seed(seed, &[0xDA7A, o as u64]),
                    entropy_samples: 1,
                    ..Default::default()
                };
                let oracle = wb.oracle(&desk.standard, o)?;
                dists.push(gmvfool_attack(&oracle, &init_mixture(k, config.seed)?, &wb.bounds, &config)?.params);
            }
            let manifest = emit_dataset(wb, &dists, n, seed, &out)?;
            save_library(&wb.objects, &out.join("library.json"))?;
            println!("wrote {} images to {}", manifest.entries.len(), out.display());
        }
        Command::MakeLibrary {
            classes,
            per_class,
            seed,
            out,
        } => {
            let lib = viewlab::library::make_object_library(classes, per_class, seed)?;
            save_library(&lib, &out)?;
            println!("wrote {} scenes to {}", lib.len(), out.display());
        }
        Command::Pretrain {
            library,
            steps,
            image_size,
            seed,
            out,
        } => {
            let objects = load_scenes(&library)?;
            let wb = Workbench::new(objects, intrinsics(image_size), ViewpointBounds::standard(), 64, seed)?;
            let mut params = ClassifierParams::init(wb.architecture(), seed);
            let losses = viewlab::viat::pretrain(&wb, &mut params, steps, 32, 1e-3, seed)?;
            let eval = wb.natural_renders(20, derive_seed(seed, &[0xE1]))?;
            params.save_json(&out)?;
            println!(
                "final loss {:.4} natural accuracy {:.3}",
                losses.last().copied().unwrap_or(f64::NAN),
                viewlab::viat::accuracy(&params, &eval)?
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
