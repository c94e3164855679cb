//! Command-line front end for the forcelayout optimizer.

pub mod render;

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use forcelayout::metrics::{scene_files, CorpusReport};
use forcelayout::ranker::write_candidates_csv;
use forcelayout::scene::load_constraints;
use forcelayout::{
    apply, evaluate, gen_corpus, load_scene, optimize, rank, scene_to_json, search, Catalog,
    CollisionMode, ConstraintSet, EditCommand, EditError, OptResult, OptimizerParams, Query,
    RankWeights, SceneState, SearchSpace,
};

pub use render::{render_svg, RenderSpec};

#[derive(Parser, Debug)]
#[command(
    name = "forcelayout",
    version,
    about = "Force-directed indoor layout optimization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Optimize a scene file.
    Optimize {
        #[command(flatten)]
        input: SceneInput,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Apply one edit command and re-optimize.
    Edit {
        #[command(flatten)]
        input: SceneInput,
        /// Edit command file.
        #[arg(long, value_name = "PATH")]
        command: PathBuf,
        /// Drop adjacency constraints that name a moved object.
        #[arg(long)]
        clear_adjacency: bool,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Score a catalog against one query and write the ranked list.
    Rank {
        #[arg(long, value_name = "PATH")]
        catalog: PathBuf,
        #[arg(long, value_name = "PATH")]
        query: PathBuf,
        /// Fusion weights file; defaults apply when absent.
        #[arg(long, value_name = "PATH")]
        weights: Option<PathBuf>,
        #[arg(long, value_name = "N")]
        top_k: Option<usize>,
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
    },
    /// Plausibility metrics for one scene or a directory of scenes.
    Eval {
        #[arg(
            long,
            value_name = "PATH",
            required_unless_present = "corpus",
            conflicts_with = "corpus"
        )]
        scene: Option<PathBuf>,
        #[arg(long, value_name = "DIR")]
        corpus: Option<PathBuf>,
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
    },
    /// Random search over optimizer parameters.
    Tune {
        #[arg(long, value_name = "DIR")]
        corpus: PathBuf,
        #[arg(long, value_name = "N", default_value_t = 200)]
        budget: usize,
        /// Scenes between pruning checks.
        #[arg(long, value_name = "N", default_value_t = 5)]
        prune_interval: usize,
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
    },
    /// Draw a scene as a top-down SVG.
    Render {
        #[command(flatten)]
        input: SceneInput,
        /// Pixels per meter.
        #[arg(long, value_name = "PX", default_value_t = 100.0)]
        scale: f64,
        #[arg(long, value_name = "M")]
        grid_spacing: Option<f64>,
        #[arg(long)]
        no_ids: bool,
        #[arg(long)]
        show_constraints: bool,
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: PathBuf,
    },
    /// Write a seeded synthetic corpus of scene files.
    GenCorpus {
        #[arg(long, value_name = "N")]
        count: usize,
        #[arg(long, value_name = "U64", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct SceneInput {
    #[arg(long, value_name = "PATH")]
    pub scene: PathBuf,
    /// Extra constraints, merged into those of the scene file.
    #[arg(long, value_name = "PATH")]
    pub constraints: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long, value_name = "PATH")]
    pub params: Option<PathBuf>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "N")]
    pub max_iters: Option<usize>,
    #[arg(long, value_name = "sat|area")]
    pub collision_mode: Option<CollisionMode>,
    #[arg(long)]
    pub no_deadlock_guard: bool,
}

#[derive(Args, Debug)]
pub struct OutputArgs {
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
    /// Write the residual trace as trace.csv.
    #[arg(long)]
    pub trace: bool,
    /// Write before.svg and after.svg.
    #[arg(long)]
    pub svg: bool,
    #[arg(long, value_name = "M")]
    pub grid_spacing: Option<f64>,
}

/// How a successful run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Done,
    NotConverged,
}

#[derive(Debug)]
pub enum CliError {
    Input(anyhow::Error),
    Edit(EditError),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(e) => write!(f, "{e:#}"),
            CliError::Edit(e) => write!(f, "invalid edit: {e}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Input(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Edit(_) => 3,
        }
    }
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Done => 0,
            Status::NotConverged => 2,
        }
    }
}

/// Writes `bytes` to a temporary file next to `path`, then renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating a file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> anyhow::Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

impl SceneInput {
    fn load(&self) -> anyhow::Result<(SceneState, ConstraintSet)> {
        let (scene, mut cons) =
            load_scene(&self.scene).with_context(|| format!("loading {}", self.scene.display()))?;
        if let Some(path) = &self.constraints {
            let extra =
                load_constraints(path).with_context(|| format!("loading {}", path.display()))?;
            cons.extend(extra);
            cons.validate(&scene)
                .with_context(|| format!("checking {}", path.display()))?;
        }
        Ok((scene, cons))
    }
}

impl RunArgs {
    pub fn params(&self) -> anyhow::Result<OptimizerParams> {
        let mut p: OptimizerParams = match &self.params {
            Some(path) => read_json(path)?,
            None => OptimizerParams::default(),
        };
        if let Some(seed) = self.seed {
            p.seed = seed;
        }
        if let Some(n) = self.max_iters {
            p.t_max = n;
        }
        if let Some(mode) = self.collision_mode {
            p.collision_mode = mode;
        }
        if self.no_deadlock_guard {
            p.deadlock_guard = false;
        }
        if let Err(e) = p.validate() {
            bail!("invalid parameters: {e}");
        }
        Ok(p)
    }
}

impl OutputArgs {
    fn write(
        &self,
        before: &SceneState,
        result: &OptResult,
        cons: &ConstraintSet,
    ) -> anyhow::Result<Status> {
        write_atomic(
            &self.out.join("scene.json"),
            scene_to_json(&result.scene, cons).as_bytes(),
        )?;
        if self.trace {
            write_atomic(
                &self.out.join("trace.csv"),
                &csv_bytes(|b| result.write_trace_csv(b))?,
            )?;
        }
        if self.svg {
            let spec = RenderSpec {
                grid: self.grid_spacing,
                show_constraints: true,
                ..Default::default()
            };
            spec.validate().map_err(anyhow::Error::msg)?;
            write_atomic(
                &self.out.join("before.svg"),
                render_svg(before, cons, &spec).as_bytes(),
            )?;
            write_atomic(
                &self.out.join("after.svg"),
                render_svg(&result.scene, cons, &spec).as_bytes(),
            )?;
        }
        Ok(if result.converged {
            Status::Done
        } else {
            Status::NotConverged
        })
    }
}

fn load_corpus(dir: &Path) -> anyhow::Result<Vec<(SceneState, ConstraintSet)>> {
    let files = scene_files(dir).with_context(|| format!("listing {}", dir.display()))?;
    files
        .iter()
        .map(|f| load_scene(f).with_context(|| format!("loading {}", f.display())))
        .collect()
}

pub fn run(cli: Cli) -> Result<Status, CliError> {
    match cli.command {
        Command::Optimize { input, run, output } => {
            let (scene, cons) = input.load()?;
            let params = run.params()?;
            let result = optimize(&scene, &cons, &params).context("optimizing")?;
            Ok(output.write(&scene, &result, &cons)?)
        }
        Command::Edit {
            input,
            command,
            clear_adjacency,
            run,
            output,
        } => {
            let (scene, mut cons) = input.load()?;
            let params = run.params()?;
            let cmd: EditCommand = read_json(&command)?;
            if let (true, EditCommand::Move { id, .. }) = (clear_adjacency, &cmd) {
                cons.adjacent.retain(|a| a.a != *id && a.b != *id);
            }
            let (edited, cons) = apply(&scene, &cons, &cmd).map_err(CliError::Edit)?;
            let result = optimize(&edited, &cons, &params).context("optimizing")?;
            Ok(output.write(&edited, &result, &cons)?)
        }
        Command::Rank {
            catalog,
            query,
            weights,
            top_k,
            out,
        } => {
            let catalog: Catalog = read_json(&catalog)?;
            let query: Query = read_json(&query)?;
            let mut w: RankWeights = match weights {
                Some(p) => read_json(&p)?,
                None => RankWeights::default(),
            };
            if let Some(k) = top_k {
                w.top_k = k;
            }
            let ranked = rank(&query, &catalog, &w).context("ranking")?;
            write_atomic(
                &out.join("ranking.csv"),
                &csv_bytes(|b| write_candidates_csv(&ranked, b))?,
            )?;
            Ok(Status::Done)
        }
        Command::Eval { scene, corpus, out } => {
            let report = match (scene, corpus) {
                (Some(path), _) => {
                    let (s, _) =
                        load_scene(&path).with_context(|| format!("loading {}", path.display()))?;
                    let name = path
                        .file_stem()
                        .map(|n| n.to_string_lossy().into_owned())
                        .unwrap_or_default();
                    CorpusReport::from_rows(vec![(name, evaluate(&s))])
                }
                (None, Some(dir)) => forcelayout::evaluate_corpus(&dir)
                    .with_context(|| format!("evaluating {}", dir.display()))?,
                (None, None) => unreachable!("clap requires one input"),
            };
            write_atomic(
                &out.join("metrics.csv"),
                &csv_bytes(|b| report.write_csv(b))?,
            )?;
            Ok(Status::Done)
        }
        Command::Tune {
            corpus,
            budget,
            prune_interval,
            run,
            out,
        } => {
            let base = run.params()?;
            let scenes = load_corpus(&corpus)?;
            let space = SearchSpace {
                prune_interval,
                ..SearchSpace::around(&base, budget, base.seed)
            };
            let outcome =
                search(&scenes, &space, &base, std::slice::from_ref(&base)).context("searching")?;
            write_atomic(
                &out.join("trials.csv"),
                &csv_bytes(|b| outcome.write_log_csv(b))?,
            )?;
            let mut best = serde_json::to_string_pretty(&outcome.best.params)
                .context("serializing parameters")?;
            best.push('\n');
            write_atomic(&out.join("best_params.json"), best.as_bytes())?;
            Ok(Status::Done)
        }
        Command::Render {
            input,
            scale,
            grid_spacing,
            no_ids,
            show_constraints,
            out,
        } => {
            let (scene, cons) = input.load()?;
            let spec = RenderSpec {
                scale,
                grid: grid_spacing,
                show_ids: !no_ids,
                show_constraints,
                color_by_level: true,
            };
            spec.validate().map_err(anyhow::Error::msg)?;
            write_atomic(
                &out.join("scene.svg"),
                render_svg(&scene, &cons, &spec).as_bytes(),
            )?;
            Ok(Status::Done)
        }
        Command::GenCorpus { count, seed, out } => {
            for (k, (scene, cons)) in gen_corpus(count, seed).into_iter().enumerate() {
                write_atomic(
                    &out.join(format!("scene_{k:04}.json")),
                    scene_to_json(&scene, &cons).as_bytes(),
                )?;
            }
            Ok(Status::Done)
        }
    }
}
