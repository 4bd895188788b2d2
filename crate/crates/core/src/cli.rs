//! The `cbreason` command line: argument parsing, the subcommands and their
//! exit codes (0 success, 1 runtime error, 2 usage error).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cbf;
use crate::error::Error;
use crate::eval::{evaluate, GroundTruth, Report, ScoredInstance};
use crate::fields::{boundary_field, center_field, recover_max_distance, signed_distance};
use crate::grid::ScalarField;
use crate::io::{self, DetectionRecord};
use crate::labels::{self, LabelSelectionConfig};
use crate::provider::{
    record_session, FieldProvider, OracleProvider, Recorder, ReplayProvider, Scene,
};
use crate::reasoning::{discover, Discovery, DiscoveryStats, ReasoningConfig};
use crate::render;
use crate::synth::{adjacency_pair, generate, AdjacencyConfig, SynthConfig};

pub const DETECTIONS_FILE: &str = "detections.json";
pub const RUN_MANIFEST_FILE: &str = "run.json";
pub const LABELS_FILE: &str = "labels.json";
pub const SESSION_FILE: &str = "session.json";

/// Why a command failed; decides the exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Runtime(e) => write!(f, "error: {e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

pub type CmdResult<T> = std::result::Result<T, Failure>;

#[derive(Debug, Parser)]
#[command(
    name = "cbreason",
    version,
    about = "Center-boundary fields and multi-object discovery"
)]
pub struct Cli {
    /// Worker threads; 1 runs serially, 0 uses every core.
    #[arg(long, global = true, env = "CBREASON_THREADS", default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute center, boundary and signed distance fields of a mask PNG.
    Fields {
        mask: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic scene file.
    Synth {
        /// Scene generator settings (TOML).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Generate an adjacent pair instead of a free layout.
        #[arg(long)]
        pair: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Discover objects in a scene with the oracle provider.
    Discover(DiscoverArgs),
    /// Score a detection file against scene files.
    Eval {
        detections: PathBuf,
        #[arg(long = "scene", required = true)]
        scenes: Vec<PathBuf>,
        /// Also write the report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run discovery with the oracle and store every field query for replay.
    Record {
        #[command(flatten)]
        input: SceneInput,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Discover objects from recorded field queries.
    ReplayDiscover {
        manifest: PathBuf,
        /// Defaults to the configuration stored with the recording.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trace_png: bool,
    },
    /// Render a field file (.cbf) or the instances of a scene file (.json) as PNG.
    Render {
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct SceneInput {
    /// Scene file written by `synth`.
    #[arg(long)]
    pub scene: Option<PathBuf>,
    /// Scene generator settings (TOML); the scene is generated on the fly.
    #[arg(long)]
    pub synth: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DiscoverArgs {
    #[command(flatten)]
    pub input: SceneInput,
    /// Reasoning settings (TOML); flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Write per-iteration field PNGs of every detection under `trace/`.
    #[arg(long)]
    pub trace_png: bool,
    /// Also write weighted pseudo-labels.
    #[arg(long)]
    pub labels: bool,
}

/// Everything needed to rerun a discovery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: ReasoningConfig,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub scenes: Vec<SceneSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSummary {
    pub scene_id: String,
    pub size: [usize; 2],
    pub detections: usize,
    /// Iterations to convergence → number of converged proposals.
    pub iterations_histogram: BTreeMap<usize, usize>,
    pub initial_proposals: usize,
    pub proposals_created: usize,
    pub discarded_existence: usize,
    pub discarded_unconverged: usize,
    pub splits: usize,
    pub converged: usize,
    pub budget_exhausted: bool,
}

impl SceneSummary {
    fn new(scene_id: &str, size: (usize, usize), d: &Discovery) -> Self {
        let mut iterations_histogram = BTreeMap::new();
        for it in d.iterations() {
            *iterations_histogram.entry(it).or_insert(0) += 1;
        }
        let DiscoveryStats {
            initial_proposals,
            proposals_created,
            discarded_existence,
            discarded_unconverged,
            splits,
            converged,
            budget_exhausted,
        } = d.stats.clone();
        SceneSummary {
            scene_id: scene_id.to_string(),
            size: [size.0, size.1],
            detections: d.detections.len(),
            iterations_histogram,
            initial_proposals,
            proposals_created,
            discarded_existence,
            discarded_unconverged,
            splits,
            converged,
            budget_exhausted,
        }
    }
}

/// What [`cmd_record`] stores next to the manifest so the run can be replayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub scene_id: String,
    pub size: [usize; 2],
    pub config: ReasoningConfig,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("{f}");
            f.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> CmdResult<()> {
    let threads = cli.threads;
    match &cli.command {
        Command::Fields { mask, out } => {
            let summary = cmd_fields(mask, out)?;
            print!("{summary}");
            Ok(())
        }
        Command::Synth {
            config,
            seed,
            pair,
            out,
        } => cmd_synth(config.as_deref(), *seed, *pair, out),
        Command::Discover(args) => cmd_discover(args, threads).map(|_| ()),
        Command::Eval {
            detections,
            scenes,
            out,
        } => {
            let report = cmd_eval(detections, scenes)?;
            let text = io::report_to_string(&report);
            print!("{text}");
            if let Some(out) = out {
                io::write_text(out, &text)?;
            }
            Ok(())
        }
        Command::Record {
            input,
            config,
            seed,
            out,
        } => {
            let n = cmd_record(input, config.as_deref(), *seed, out, threads)?;
            println!("recorded {n} queries in {}", out.display());
            Ok(())
        }
        Command::ReplayDiscover {
            manifest,
            config,
            seed,
            out,
            trace_png,
        } => cmd_replay_discover(manifest, config.as_deref(), *seed, out, *trace_png, threads)
            .map(|_| ()),
        Command::Render { input, out } => cmd_render(input, out),
    }
}

fn load_toml<T: DeserializeOwned>(path: &Path) -> CmdResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Reasoning settings from an optional file, then the seed flag.
pub fn load_reasoning_config(path: Option<&Path>, seed: Option<u64>) -> CmdResult<ReasoningConfig> {
    let mut cfg: ReasoningConfig = match path {
        Some(p) => load_toml(p)?,
        None => ReasoningConfig::default(),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn load_scene(input: &SceneInput) -> CmdResult<(Scene, BTreeMap<String, String>)> {
    let mut inputs = BTreeMap::new();
    let scene = match (&input.scene, &input.synth) {
        (Some(path), _) => {
            inputs.insert("scene".into(), path.display().to_string());
            io::read_scene(path)?
        }
        (None, Some(path)) => {
            inputs.insert("synth".into(), path.display().to_string());
            let cfg: SynthConfig = load_toml(path)?;
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            generate(&cfg, format!("synth-{}", cfg.seed))?.scene
        }
        (None, None) => {
            return Err(Failure::Usage(
                "either --scene or --synth is required".into(),
            ))
        }
    };
    Ok((scene, inputs))
}

/// Writes the three fields of a mask and returns the printed summary: the
/// largest interior distance and its recovery from the boundary field at the
/// innermost pixel where the gradient does not vanish.
pub fn cmd_fields(mask_path: &Path, out: &Path) -> CmdResult<String> {
    let mask = render::read_mask_png(mask_path)?;
    if !mask.any() {
        return Err(Error::EmptyMask.into());
    }
    let boundary = boundary_field(&mask)?;
    let center = center_field(&mask)?;
    let signed = if mask.all() {
        boundary.clone()
    } else {
        signed_distance(&mask)?
    };
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    cbf::write_vector(&out.join("center.cbf"), &center)?;
    cbf::write_scalar(&out.join("boundary.cbf"), &boundary)?;
    cbf::write_scalar(&out.join("signed.cbf"), &signed)?;
    render::write_vector_png(&out.join("center.png"), &center)?;
    render::write_scalar_png(&out.join("boundary.png"), &boundary)?;
    let peak = signed.data().iter().fold(0.0f32, |m, v| m.max(v.abs()));
    render::write_scalar_png(&out.join("signed.png"), &signed.map(|v| v / peak))?;

    let max_distance = signed
        .data()
        .iter()
        .zip(mask.data())
        .filter(|(_, &m)| m)
        .fold(0.0f32, |m, (&v, _)| m.max(v));
    let mut summary = format!("max distance: {:?}\n", max_distance as f64);
    let mut order: Vec<((usize, usize), f32)> = boundary
        .indexed()
        .filter(|(_, &v)| v > 0.0)
        .map(|(p, &v)| (p, v))
        .collect();
    order.sort_by(|a, b| b.1.total_cmp(&a.1));
    match order
        .iter()
        .find_map(|&(p, _)| recover_max_distance(&boundary, p).ok().map(|d| (p, d)))
    {
        Some(((r, c), d)) => summary.push_str(&format!("recovered at ({r}, {c}): {d:?}\n")),
        None => {
            summary.push_str("recovered: unavailable, no interior pixel with a usable gradient\n")
        }
    }
    Ok(summary)
}

pub fn cmd_synth(
    config: Option<&Path>,
    seed: Option<u64>,
    pair: bool,
    out: &Path,
) -> CmdResult<()> {
    let scene = if pair {
        let mut cfg: AdjacencyConfig = config.map(load_toml).transpose()?.unwrap_or_default();
        if let Some(s) = seed {
            cfg.seed = s;
        }
        let id = format!("pair-{}", cfg.seed);
        adjacency_pair(&cfg, id)
            .map_err(|e| Failure::Usage(e.to_string()))?
            .0
    } else {
        let mut cfg: SynthConfig = config.map(load_toml).transpose()?.unwrap_or_default();
        if let Some(s) = seed {
            cfg.seed = s;
        }
        cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        let s = generate(&cfg, format!("synth-{}", cfg.seed))?;
        if s.shortfall > 0 {
            eprintln!(
                "placed {} of {} objects",
                s.requested - s.shortfall,
                s.requested
            );
        }
        s.scene
    };
    io::write_scene(out, &scene)?;
    Ok(())
}

/// Runs discovery and writes `detections.json`, `run.json` and, on request,
/// `labels.json` and `trace/`. An exhausted proposal budget still writes
/// everything and then fails.
pub fn cmd_discover(args: &DiscoverArgs, threads: usize) -> CmdResult<Discovery> {
    let cfg = load_reasoning_config(args.config.as_deref(), args.seed)?;
    let (scene, mut inputs) = load_scene(&args.input)?;
    if let Some(c) = &args.config {
        inputs.insert("config".into(), c.display().to_string());
    }
    let provider = OracleProvider::new(&scene);
    let discovery = discover(&provider, &cfg, threads)?;
    write_run(&RunOutput {
        command: "discover",
        scene_id: &scene.id,
        provider: &provider,
        config: &cfg,
        inputs,
        out: &args.out,
        trace_png: args.trace_png,
        labels: args.labels,
        discovery: &discovery,
    })?;
    discovery.check_budget()?;
    Ok(discovery)
}

struct RunOutput<'a> {
    command: &'a str,
    scene_id: &'a str,
    provider: &'a dyn FieldProvider,
    config: &'a ReasoningConfig,
    inputs: BTreeMap<String, String>,
    out: &'a Path,
    trace_png: bool,
    labels: bool,
    discovery: &'a Discovery,
}

fn write_run(run: &RunOutput) -> CmdResult<()> {
    let d = run.discovery;
    let mut outputs = BTreeMap::new();
    let records: Vec<DetectionRecord> = d
        .detections
        .iter()
        .map(|x| DetectionRecord::from_detection(run.scene_id, x))
        .collect();
    let det_path = run.out.join(DETECTIONS_FILE);
    io::write_detections(&det_path, &records)?;
    outputs.insert("detections".into(), det_path.display().to_string());
    if run.labels {
        let path = run.out.join(LABELS_FILE);
        let selected = labels::select(&d.detections, &LabelSelectionConfig::default())?;
        labels::export(&path, run.scene_id, &selected)?;
        outputs.insert("labels".into(), path.display().to_string());
    }
    if run.trace_png {
        let dir = run.out.join("trace");
        write_traces(run.provider, d, &dir)?;
        outputs.insert("trace".into(), dir.display().to_string());
    }
    let manifest_path = run.out.join(RUN_MANIFEST_FILE);
    outputs.insert("manifest".into(), manifest_path.display().to_string());
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: run.command.to_string(),
        seed: run.config.seed,
        config: run.config.clone(),
        inputs: run.inputs.clone(),
        outputs,
        scenes: vec![SceneSummary::new(
            run.scene_id,
            run.provider.scene_size(),
            d,
        )],
    };
    io::write_text(&manifest_path, &io::to_json(&manifest))?;
    Ok(())
}

/// Boundary and center field PNGs of every box a detected proposal visited.
fn write_traces(provider: &dyn FieldProvider, d: &Discovery, dir: &Path) -> CmdResult<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for det in &d.detections {
        let Some(conv) = d.converged.iter().find(|c| c.id == det.proposal_id) else {
            continue;
        };
        for (k, &bbox) in conv.trajectory.iter().enumerate() {
            let bundle = provider.query(bbox)?;
            let stem = format!("p{:05}_{k:03}", conv.id);
            render::write_scalar_png(&dir.join(format!("{stem}_boundary.png")), &bundle.boundary)?;
            render::write_vector_png(&dir.join(format!("{stem}_center.png")), &bundle.center)?;
        }
    }
    Ok(())
}

/// Box and mask metrics of the detections against the scenes they name.
pub fn cmd_eval(detections: &Path, scene_files: &[PathBuf]) -> CmdResult<Report> {
    let records = io::read_detections(detections)?;
    let mut scenes: Vec<(Scene, Vec<ScoredInstance>)> = Vec::new();
    for p in scene_files {
        let scene = io::read_scene(p)?;
        if scenes.iter().any(|(s, _)| s.id == scene.id) {
            return Err(Failure::Usage(format!("scene id {} given twice", scene.id)));
        }
        scenes.push((scene, Vec::new()));
    }
    for r in &records {
        let Some((scene, dets)) = scenes.iter_mut().find(|(s, _)| s.id == r.scene_id) else {
            return Err(Failure::Usage(format!(
                "detection for unknown scene id {}",
                r.scene_id
            )));
        };
        let det = r.to_detection()?;
        if det.mask.dims() != scene.size() {
            return Err(Error::Shape {
                expected: scene.size(),
                actual: det.mask.dims(),
            }
            .into());
        }
        dets.push(ScoredInstance {
            bbox: det.bbox,
            mask: det.mask,
            score: det.confidence,
        });
    }
    let input: Vec<(Vec<ScoredInstance>, Vec<GroundTruth>)> = scenes
        .into_iter()
        .map(|(s, dets)| {
            let gts = s
                .instances()
                .iter()
                .zip(s.bboxes())
                .map(|(m, &b)| GroundTruth {
                    bbox: b,
                    mask: m.clone(),
                })
                .collect();
            (dets, gts)
        })
        .collect();
    Ok(evaluate(&input, 100)?)
}

/// Records every field query of an oracle discovery; returns the query count.
pub fn cmd_record(
    input: &SceneInput,
    config: Option<&Path>,
    seed: Option<u64>,
    out: &Path,
    threads: usize,
) -> CmdResult<usize> {
    let cfg = load_reasoning_config(config, seed)?;
    let (scene, _) = load_scene(input)?;
    let oracle = OracleProvider::new(&scene);
    let recorder = Recorder::new(&oracle);
    discover(&recorder, &cfg, threads)?;
    let queries = recorder.queries();
    record_session(&oracle, &queries, out)?;
    let (h, w) = scene.size();
    let session = Session {
        scene_id: scene.id.clone(),
        size: [h, w],
        config: cfg,
    };
    io::write_text(&out.join(SESSION_FILE), &io::to_json(&session))?;
    Ok(queries.len())
}

pub fn cmd_replay_discover(
    manifest: &Path,
    config: Option<&Path>,
    seed: Option<u64>,
    out: &Path,
    trace_png: bool,
    threads: usize,
) -> CmdResult<Discovery> {
    let dir = manifest.parent().unwrap_or(Path::new(""));
    let session: Session = io::read_json(&dir.join(SESSION_FILE))?;
    let cfg = match config {
        Some(_) => load_reasoning_config(config, seed)?,
        None => {
            let mut cfg = session.config.clone();
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg
        }
    };
    let provider = ReplayProvider::open(manifest, (session.size[0], session.size[1]))?;
    let discovery = discover(&provider, &cfg, threads)?;
    let mut inputs = BTreeMap::new();
    inputs.insert("manifest".into(), manifest.display().to_string());
    if let Some(c) = config {
        inputs.insert("config".into(), c.display().to_string());
    }
    write_run(&RunOutput {
        command: "replay-discover",
        scene_id: &session.scene_id,
        provider: &provider,
        config: &cfg,
        inputs,
        out,
        trace_png,
        labels: false,
        discovery: &discovery,
    })?;
    discovery.check_budget()?;
    Ok(discovery)
}

pub fn cmd_render(input: &Path, out: &Path) -> CmdResult<()> {
    match input.extension().and_then(|e| e.to_str()) {
        Some("cbf") => {
            let t = cbf::read(input)?;
            match t.channels {
                1 => render::write_scalar_png(out, &t.into_scalar(input)?)?,
                2 => render::write_vector_png(out, &t.into_vector(input)?)?,
                n => return Err(Failure::Usage(format!("cannot render {n}-channel field"))),
            }
        }
        Some("json") => {
            let scene = io::read_scene(input)?;
            let (h, w) = scene.size();
            // instance k gets an evenly spaced level in (0, 1]
            let n = scene.instances().len().max(1) as f32;
            let mut labels = ScalarField::filled(h, w, -1.0);
            for (k, m) in scene.instances().iter().enumerate() {
                for (v, &on) in labels.data_mut().iter_mut().zip(m.data()) {
                    if on {
                        *v = (k + 1) as f32 / n;
                    }
                }
            }
            render::write_scalar_png(out, &labels)?;
        }
        _ => {
            return Err(Failure::Usage(format!(
                "{}: expected a .cbf field or a .json scene",
                input.display()
            )))
        }
    }
    Ok(())
}
