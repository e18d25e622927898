//! Experiment configuration: a TOML file with a handful of required keys
//! and defaults for everything else. Unknown keys are rejected, every
//! constraint violation names the offending key, and a resolved config
//! round-trips through serialization unchanged.

use std::path::{Path, PathBuf};

use jedi_core::env::{Evaluator, MazeEnv, SyntheticKind, SyntheticTask};
use jedi_core::es::{Engine, EsConfig};
use jedi_core::methods::{EsSearchConfig, JediConfig, MapElitesConfig, SelectionMode};
use jedi_core::scoring::AlphaSchedule;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Jedi,
    MapElites,
    Es,
    EsRestart,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Jedi => "jedi",
            Method::MapElites => "map-elites",
            Method::Es => "es",
            Method::EsRestart => "es-restart",
        }
    }
}

/// Which environment a run evaluates in; maze paths are kept relative to
/// wherever the config said they were.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnvSpec {
    Maze(PathBuf),
    Sphere,
    Rastrigin,
    DeceptiveTrap,
}

impl EnvSpec {
    fn parse(s: &str) -> Result<Self, CliError> {
        if let Some(path) = s.strip_prefix("maze:") {
            return Ok(EnvSpec::Maze(PathBuf::from(path)));
        }
        match s {
            "sphere" => Ok(EnvSpec::Sphere),
            "rastrigin" => Ok(EnvSpec::Rastrigin),
            "deceptive-trap" => Ok(EnvSpec::DeceptiveTrap),
            other => Err(CliError::Config(format!(
                "env: unknown environment '{other}' (expected maze:<file>, sphere, rastrigin or deceptive-trap)"
            ))),
        }
    }

    pub fn to_config_string(&self) -> String {
        match self {
            EnvSpec::Maze(p) => format!("maze:{}", p.display()),
            EnvSpec::Sphere => "sphere".into(),
            EnvSpec::Rastrigin => "rastrigin".into(),
            EnvSpec::DeceptiveTrap => "deceptive-trap".into(),
        }
    }

    pub fn is_maze(&self) -> bool {
        matches!(self, EnvSpec::Maze(_))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawFile {
    method: Method,
    env: String,
    seeds: Vec<u64>,
    #[serde(default)]
    eval_budget: Option<u64>,
    #[serde(default)]
    output_dir: Option<PathBuf>,
    #[serde(default)]
    synthetic: Option<RawSynthetic>,
    #[serde(default)]
    archive: Option<RawArchive>,
    #[serde(default)]
    es: Option<RawEs>,
    #[serde(default)]
    jedi: Option<RawJedi>,
    #[serde(default)]
    map_elites: Option<RawMapElites>,
}

impl Default for Method {
    fn default() -> Self {
        Method::Jedi
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSynthetic {
    #[serde(default)]
    dim: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawArchive {
    #[serde(default)]
    centroids: Option<usize>,
    #[serde(default)]
    centroids_seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawEs {
    #[serde(default)]
    engine: Option<String>,
    #[serde(default)]
    population: Option<usize>,
    #[serde(default)]
    sigma_init: Option<f64>,
    #[serde(default)]
    elite_ratio: Option<f64>,
    #[serde(default)]
    memory: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawJedi {
    #[serde(default)]
    n_init: Option<usize>,
    #[serde(default)]
    n_es: Option<usize>,
    #[serde(default)]
    es_generations: Option<usize>,
    #[serde(default)]
    loops: Option<usize>,
    #[serde(default)]
    selection: Option<String>,
    #[serde(default)]
    alpha: Option<RawAlpha>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawAlpha {
    #[serde(default)]
    schedule: Option<String>,
    #[serde(default)]
    value: Option<f64>,
    #[serde(default)]
    start: Option<f64>,
    #[serde(default)]
    end: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawMapElites {
    #[serde(default)]
    n_init: Option<usize>,
    #[serde(default)]
    batch: Option<usize>,
    #[serde(default)]
    iso_sigma: Option<f64>,
    #[serde(default)]
    line_sigma: Option<f64>,
}

/// Fully resolved configuration: every field explicit.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub method: Method,
    pub env: EnvSpec,
    pub seeds: Vec<u64>,
    pub eval_budget: u64,
    pub output_dir: PathBuf,
    pub synthetic_dim: usize,
    pub centroids: usize,
    pub centroids_seed: u64,
    pub engine: Engine,
    pub population: usize,
    pub sigma_init: f64,
    pub elite_ratio: f64,
    pub memory: Option<usize>,
    pub n_init: usize,
    pub n_es: usize,
    pub es_generations: usize,
    pub loops: Option<usize>,
    pub selection: SelectionMode,
    pub alpha: AlphaSchedule,
    pub me_batch: usize,
    pub me_iso_sigma: f64,
    pub me_line_sigma: f64,
}

pub fn load(path: &Path) -> Result<ExperimentConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    from_str(&text)
}

pub fn from_str(text: &str) -> Result<ExperimentConfig, CliError> {
    let raw: RawFile =
        toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
    resolve(raw)
}

fn resolve(raw: RawFile) -> Result<ExperimentConfig, CliError> {
    let env = EnvSpec::parse(&raw.env)?;
    if raw.seeds.is_empty() {
        return Err(CliError::Config("seeds: must not be empty".into()));
    }
    let mut sorted = raw.seeds.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != raw.seeds.len() {
        return Err(CliError::Config("seeds: must be distinct".into()));
    }

    let is_maze = env.is_maze();
    let archive = raw.archive.unwrap_or_default();
    let es = raw.es.unwrap_or_default();
    let jedi = raw.jedi.unwrap_or_default();
    let me = raw.map_elites.unwrap_or_default();

    let engine = match es.engine.as_deref() {
        None | Some("sep-cma") => Engine::SepCma,
        Some("lm-ma") => Engine::LmMa,
        Some(other) => {
            return Err(CliError::Config(format!(
                "es.engine: unknown engine '{other}' (expected sep-cma or lm-ma)"
            )))
        }
    };
    let selection = match jedi.selection.as_deref() {
        None | Some("weighted-gp") => SelectionMode::WeightedGp,
        Some("standard-gp") => SelectionMode::StandardGp,
        Some("uniform") => SelectionMode::Uniform,
        Some(other) => {
            return Err(CliError::Config(format!(
                "jedi.selection: unknown mode '{other}' (expected weighted-gp, standard-gp or uniform)"
            )))
        }
    };
    let alpha = resolve_alpha(jedi.alpha.unwrap_or_default())?;

    // Per-method population defaults: a lone ES gets the big population,
    // the per-target emitters the small one.
    let default_population = match raw.method {
        Method::Es | Method::EsRestart => 64,
        _ => 16,
    };

    let config = ExperimentConfig {
        method: raw.method,
        seeds: raw.seeds,
        eval_budget: raw
            .eval_budget
            .unwrap_or(if is_maze { 200_000 } else { 50_000 }),
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("out")),
        synthetic_dim: raw.synthetic.unwrap_or_default().dim.unwrap_or(10),
        centroids: archive.centroids.unwrap_or(if is_maze { 1024 } else { 256 }),
        centroids_seed: archive.centroids_seed.unwrap_or(1),
        engine,
        population: es.population.unwrap_or(default_population),
        sigma_init: es.sigma_init.unwrap_or(0.05),
        elite_ratio: es.elite_ratio.unwrap_or(0.5),
        memory: es.memory,
        n_init: jedi.n_init.unwrap_or(128),
        n_es: jedi.n_es.unwrap_or(4),
        es_generations: jedi.es_generations.unwrap_or(if is_maze { 100 } else { 25 }),
        loops: jedi.loops,
        selection,
        alpha,
        me_batch: me.batch.unwrap_or(64),
        me_iso_sigma: me.iso_sigma.unwrap_or(0.2),
        me_line_sigma: me.line_sigma.unwrap_or(0.0),
        env,
    };
    config.validate()?;
    Ok(config)
}

fn resolve_alpha(raw: RawAlpha) -> Result<AlphaSchedule, CliError> {
    let schedule = match raw.schedule.as_deref() {
        None | Some("linear") => AlphaSchedule::Linear {
            start: raw.start.unwrap_or(0.8),
            end: raw.end.unwrap_or(0.0),
        },
        Some("constant") => AlphaSchedule::Constant(raw.value.unwrap_or(0.3)),
        Some(other) => {
            return Err(CliError::Config(format!(
                "jedi.alpha.schedule: unknown schedule '{other}' (expected constant or linear)"
            )))
        }
    };
    if !schedule.is_valid() {
        return Err(CliError::Config("jedi.alpha: alpha out of [0,1]".into()));
    }
    Ok(schedule)
}

impl ExperimentConfig {
    fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: &str| Err(CliError::Config(msg.into()));
        if self.eval_budget == 0 {
            return fail("eval_budget: must be positive");
        }
        if self.centroids == 0 {
            return fail("archive.centroids: must be positive");
        }
        if self.population == 0 {
            return fail("es.population: must be positive");
        }
        if !(self.sigma_init > 0.0) {
            return fail("es.sigma_init: must be positive");
        }
        if !(self.elite_ratio > 0.0 && self.elite_ratio <= 1.0) {
            return fail("es.elite_ratio: must be in (0, 1]");
        }
        if self.n_init == 0 || self.n_es == 0 || self.es_generations == 0 {
            return fail("jedi: n_init, n_es and es_generations must be positive");
        }
        if !self.env.is_maze() && self.synthetic_dim < 2 {
            return fail("synthetic.dim: must be at least 2");
        }
        if self.me_batch == 0 {
            return fail("map_elites.batch: must be positive");
        }
        if !(self.me_iso_sigma >= 0.0 && self.me_line_sigma >= 0.0) {
            return fail("map_elites: sigmas must be non-negative");
        }
        Ok(())
    }

    /// Build the evaluation environment. Maze paths are resolved relative
    /// to `base` (the config file's directory) unless absolute.
    pub fn build_evaluator(&self, base: &Path) -> Result<Box<dyn Evaluator>, CliError> {
        match &self.env {
            EnvSpec::Maze(path) => {
                let full = if path.is_absolute() {
                    path.clone()
                } else {
                    base.join(path)
                };
                let maze = crate::maze_file::load(&full)?;
                Ok(Box::new(MazeEnv::new(maze)))
            }
            EnvSpec::Sphere => Ok(Box::new(SyntheticTask::new(SyntheticKind::Sphere, self.synthetic_dim))),
            EnvSpec::Rastrigin => Ok(Box::new(SyntheticTask::new(
                SyntheticKind::Rastrigin,
                self.synthetic_dim,
            ))),
            EnvSpec::DeceptiveTrap => Ok(Box::new(SyntheticTask::new(
                SyntheticKind::DeceptiveTrap,
                self.synthetic_dim,
            ))),
        }
    }

    pub fn es_config(&self, dim: usize) -> EsConfig {
        EsConfig {
            engine: self.engine,
            dim,
            population: self.population,
            sigma_init: self.sigma_init,
            elite_ratio: self.elite_ratio,
            memory: self.memory,
        }
    }

    pub fn jedi_config(&self, dim: usize) -> JediConfig {
        JediConfig {
            n_init: self.n_init,
            n_es: self.n_es,
            loops: self.loops,
            es_generations: self.es_generations,
            es: self.es_config(dim),
            alpha: self.alpha,
            selection: self.selection,
            eval_budget: self.eval_budget,
        }
    }

    pub fn map_elites_config(&self) -> MapElitesConfig {
        MapElitesConfig {
            n_init: self.n_init,
            batch: self.me_batch,
            iso_sigma: self.me_iso_sigma,
            line_sigma: self.me_line_sigma,
            eval_budget: self.eval_budget,
        }
    }

    pub fn es_search_config(&self, dim: usize) -> EsSearchConfig {
        EsSearchConfig {
            es: self.es_config(dim),
            restart: matches!(self.method, Method::EsRestart),
            eval_budget: self.eval_budget,
        }
    }

    /// Canonical serialization with every field explicit.
    pub fn to_toml(&self) -> String {
        let raw = self.to_raw();
        toml::to_string(&raw).expect("config serialization cannot fail")
    }

    /// Hash of everything that affects results (the output directory does
    /// not).
    pub fn hash(&self) -> String {
        let mut clone = self.clone();
        clone.output_dir = PathBuf::new();
        let mut hasher = Sha256::new();
        hasher.update(clone.to_toml().as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn to_raw(&self) -> RawFile {
        let (schedule, value, start, end) = match self.alpha {
            AlphaSchedule::Constant(v) => ("constant", Some(v), None, None),
            AlphaSchedule::Linear { start, end } => ("linear", None, Some(start), Some(end)),
        };
        RawFile {
            method: self.method,
            env: self.env.to_config_string(),
            seeds: self.seeds.clone(),
            eval_budget: Some(self.eval_budget),
            output_dir: Some(self.output_dir.clone()),
            synthetic: Some(RawSynthetic { dim: Some(self.synthetic_dim) }),
            archive: Some(RawArchive {
                centroids: Some(self.centroids),
                centroids_seed: Some(self.centroids_seed),
            }),
            es: Some(RawEs {
                engine: Some(
                    match self.engine {
                        Engine::SepCma => "sep-cma",
                        Engine::LmMa => "lm-ma",
                    }
                    .into(),
                ),
                population: Some(self.population),
                sigma_init: Some(self.sigma_init),
                elite_ratio: Some(self.elite_ratio),
                memory: self.memory,
            }),
            jedi: Some(RawJedi {
                n_init: Some(self.n_init),
                n_es: Some(self.n_es),
                es_generations: Some(self.es_generations),
                loops: self.loops,
                selection: Some(
                    match self.selection {
                        SelectionMode::WeightedGp => "weighted-gp",
                        SelectionMode::StandardGp => "standard-gp",
                        SelectionMode::Uniform => "uniform",
                    }
                    .into(),
                ),
                alpha: Some(RawAlpha {
                    schedule: Some(schedule.into()),
                    value,
                    start,
                    end,
                }),
            }),
            map_elites: Some(RawMapElites {
                n_init: Some(self.n_init),
                batch: Some(self.me_batch),
                iso_sigma: Some(self.me_iso_sigma),
                line_sigma: Some(self.me_line_sigma),
            }),
        }
    }
}
