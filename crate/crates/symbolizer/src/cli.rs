//! Command-line interface: `schema`, `ground`, `plan`, `eval`, and
//! `make-instances`. Exit codes are a stable contract: 0 success,
//! 2 input error, 4 budget exceeded, 3 environment or transport
//! trouble (including a missing `SYMBOLIZER_API_KEY` for live runs).

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use symbolizer_core::planner::{Outcome, SearchBudget, Tiebreak};
use symbolizer_core::schema::{
    compile_goal_schema, compile_object_schema, compile_predicate_schema,
    compile_successor_schema, SchemaDoc,
};
use symbolizer_core::sim::{make_instance, DomainId, InstanceParams};

use crate::config::RunConfig;
use crate::eval::{
    self, DirectPlanSupplier, GroundingBackend, PlanningMode, PlanningOptions, StageSelection,
};
use crate::formats::{
    self, bundled_domain_pddl, resolve_record, InstanceRecord, ResolvedInstance,
};
use crate::grounder::{
    load_example_file, GroundError, GrounderConfig, HttpGrounder, MockGrounder,
    ReqwestTransport, StageExamples,
};
use crate::vlm;

pub const API_KEY_VAR: &str = "SYMBOLIZER_API_KEY";

#[derive(Debug)]
pub enum CliError {
    /// Bad input (missing files, invalid documents, usage errors).
    Input(String),
    /// Environment or transport trouble (API key, endpoint failures).
    Env(String),
    /// The search budget ran out.
    Budget(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Env(_) => 3,
            CliError::Budget(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Env(m) | CliError::Budget(m) => m,
        }
    }
}

fn input_err(e: impl std::fmt::Display) -> CliError {
    CliError::Input(e.to_string())
}

fn ground_err(e: GroundError) -> CliError {
    match e {
        GroundError::Transport(_) | GroundError::Cache(_) => CliError::Env(e.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

#[derive(Parser)]
#[command(
    name = "symbolizer",
    about = "Schema-constrained grounding and model-free symbolic planning"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CommonOpts {
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for all randomness (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Mock drop probability (overrides the config).
    #[arg(long)]
    epsilon: Option<f64>,
    /// Mock spurious-atom count (overrides the config).
    #[arg(long)]
    spurious: Option<usize>,
    /// Ground through the live endpoint instead of the mock.
    #[arg(long)]
    live: bool,
    /// Endpoint URL (overrides the config).
    #[arg(long)]
    endpoint: Option<String>,
    /// Model name (overrides the config).
    #[arg(long)]
    model: Option<String>,
    /// Expansion budget (overrides the config).
    #[arg(long)]
    max_expansions: Option<u64>,
    /// Tie-breaking: novelty, novelty-pairs, or fifo.
    #[arg(long)]
    tiebreak: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Compile structured-output schemas from a vocabulary file.
    Schema {
        /// Vocabulary JSON file.
        vocab: PathBuf,
        /// Instance file supplying the object set for the predicate,
        /// goal, and successor stages.
        #[arg(long)]
        instance: Option<PathBuf>,
        /// objects, predicates, goal, successor, or all.
        #[arg(long, default_value = "all")]
        stage: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Ground one instance into object, state, and goal files.
    Ground {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Search for a plan on one instance and write it with its stats.
    Plan {
        #[arg(long)]
        instance: PathBuf,
        /// model-free, with-model, or direct-vlm.
        #[arg(long, default_value = "model-free")]
        mode: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Score grounding or planning over a JSON-lines dataset.
    Eval {
        #[arg(long)]
        dataset: PathBuf,
        /// grounding, model-free, with-model, or direct-vlm.
        #[arg(long, default_value = "grounding")]
        mode: String,
        /// Comma-separated stage subset for grounding mode.
        #[arg(long)]
        stages: Option<String>,
        /// Comma-separated epsilons: run a noise sweep instead.
        #[arg(long)]
        sweep: Option<String>,
        /// Worker threads for row evaluation (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Generate bundled instances, vocabularies, and a dataset file.
    MakeInstances {
        /// blocksworld, hanoi, or hanoi-color; omit for the full suite.
        #[arg(long)]
        domain: Option<String>,
        #[arg(long)]
        size: Option<usize>,
        /// Scramble depth; omitted means the canonical layout.
        #[arg(long)]
        scramble: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Instances to generate (seeds seed..seed+count).
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

struct Session {
    config: RunConfig,
    out_dir: PathBuf,
    live: bool,
}

impl Session {
    fn open(common: &CommonOpts) -> Result<Self, CliError> {
        let mut config = match &common.config {
            Some(path) => RunConfig::load(path).map_err(input_err)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = common.seed {
            config.seed = Some(seed);
        }
        if let Some(epsilon) = common.epsilon {
            config.mock.epsilon = epsilon;
        }
        if let Some(spurious) = common.spurious {
            config.mock.spurious = spurious;
        }
        if let Some(url) = &common.endpoint {
            config.endpoint.url = url.clone();
        }
        if let Some(model) = &common.model {
            config.endpoint.model = model.clone();
        }
        if let Some(max) = common.max_expansions {
            config.planner.max_expansions = max;
        }
        if let Some(tiebreak) = &common.tiebreak {
            config.planner.tiebreak = tiebreak.clone();
        }
        config.validate("command line").map_err(input_err)?;
        let out_dir = common
            .out
            .clone()
            .or_else(|| config.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok(Session {
            config,
            out_dir,
            live: common.live,
        })
    }

    fn mock(&self) -> Result<MockGrounder, CliError> {
        self.config.require_seed().map_err(input_err)?;
        Ok(MockGrounder::new(self.config.grounder_config().noise))
    }

    fn api_key(&self) -> Result<String, CliError> {
        std::env::var(API_KEY_VAR).map_err(|_| {
            CliError::Env(format!("live runs need the {API_KEY_VAR} environment variable"))
        })
    }

    fn grounder_config(&self) -> Result<GrounderConfig, CliError> {
        let cfg = self.config.grounder_config();
        if cfg.endpoint.is_empty() || cfg.model.is_empty() {
            return Err(CliError::Input(
                "live runs need endpoint.url and endpoint.model".to_string(),
            ));
        }
        Ok(cfg)
    }

    fn stage_examples(&self) -> Result<StageExamples, CliError> {
        let load_all = |paths: &[PathBuf]| -> Result<Vec<_>, CliError> {
            let mut out = Vec::new();
            for path in paths {
                out.extend(load_example_file(path).map_err(ground_err)?);
            }
            Ok(out)
        };
        Ok(StageExamples {
            objects: load_all(&self.config.examples.objects)?,
            predicates: load_all(&self.config.examples.predicates)?,
            goal: load_all(&self.config.examples.goal)?,
            successor: load_all(&self.config.examples.successor)?,
        })
    }

    fn ensure_out_dir(&self) -> Result<(), CliError> {
        fs::create_dir_all(&self.out_dir)
            .map_err(|e| CliError::Env(format!("{}: {e}", self.out_dir.display())))
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf, CliError> {
        let path = self.out_dir.join(name);
        fs::write(&path, contents)
            .map_err(|e| CliError::Env(format!("{}: {e}", path.display())))?;
        Ok(path)
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Schema {
            vocab,
            instance,
            stage,
            out,
        } => cmd_schema(&vocab, instance.as_deref(), &stage, &out),
        Command::Ground { instance, common } => cmd_ground(&instance, &common),
        Command::Plan {
            instance,
            mode,
            common,
        } => cmd_plan(&instance, &mode, &common),
        Command::Eval {
            dataset,
            mode,
            stages,
            sweep,
            jobs,
            common,
        } => cmd_eval(&dataset, &mode, stages.as_deref(), sweep.as_deref(), jobs, &common),
        Command::MakeInstances {
            domain,
            size,
            scramble,
            seed,
            count,
            out,
        } => cmd_make_instances(domain.as_deref(), size, scramble, seed, count, &out),
    }
}

fn resolve_instance_file(path: &Path) -> Result<ResolvedInstance, CliError> {
    let record = formats::read_instance(path).map_err(input_err)?;
    let base = path.parent().unwrap_or(Path::new("."));
    resolve_record(&record, base).map_err(input_err)
}

fn cmd_schema(
    vocab_path: &Path,
    instance: Option<&Path>,
    stage: &str,
    out: &Path,
) -> Result<(), CliError> {
    let vocab = formats::load_vocab(vocab_path).map_err(input_err)?;
    let limits = Default::default();
    let resolved = instance.map(resolve_instance_file).transpose()?;
    let objects = resolved.as_ref().map(|r| &r.objects);

    let mut wanted: Vec<&str> = match stage {
        "all" => vec!["objects", "predicates", "goal", "successor"],
        s => vec![s],
    };
    if stage == "all" && objects.is_none() {
        wanted = vec!["objects"];
    }
    fs::create_dir_all(out).map_err(|e| CliError::Env(format!("{}: {e}", out.display())))?;
    for name in wanted {
        let doc: SchemaDoc = match name {
            "objects" => compile_object_schema(&vocab, &limits),
            "predicates" | "goal" | "successor" => {
                let objects = objects.ok_or_else(|| {
                    CliError::Input(format!("--stage {name} needs --instance for the object set"))
                })?;
                let compiled = match name {
                    "predicates" => compile_predicate_schema(&vocab, objects, &limits),
                    "goal" => compile_goal_schema(&vocab, objects, &limits),
                    _ => compile_successor_schema(&vocab, objects, &limits),
                };
                compiled.map_err(input_err)?
            }
            other => {
                return Err(CliError::Input(format!(
                    "unknown stage {other:?} (expected objects, predicates, goal, successor, or all)"
                )))
            }
        };
        let path = out.join(format!("{name}.schema.json"));
        fs::write(&path, doc.render())
            .map_err(|e| CliError::Env(format!("{}: {e}", path.display())))?;
        println!("wrote {} (vocab hash {})", path.display(), doc.vocab_hash());
    }
    Ok(())
}

/// Grounds one instance and writes `objects.json`, `state.txt`, and
/// `goal.txt` next to a short log of what ran.
fn cmd_ground(instance: &Path, common: &CommonOpts) -> Result<(), CliError> {
    let session = Session::open(common)?;
    let resolved = resolve_instance_file(instance)?;
    session.ensure_out_dir()?;

    let (objects, state, goal, via) = if session.live {
        let api_key = session.api_key()?;
        let cfg = session.grounder_config()?;
        let transport = ReqwestTransport::new(&cfg.endpoint, &api_key, cfg.timeout)
            .map_err(ground_err)?;
        let grounder = HttpGrounder::new(
            &transport,
            &cfg,
            session.config.schema_limits(),
            session.stage_examples()?,
        )
        .map_err(ground_err)?;
        let backend = GroundingBackend::Live(&grounder);
        let base = instance.parent().unwrap_or(Path::new("."));
        let out = ground_pipeline(&backend, &resolved, base).map_err(ground_err)?;
        println!(
            "live grounding: {} network calls (cache hits excluded)",
            grounder.network_calls()
        );
        (out.0, out.1, out.2, "live")
    } else {
        let mock = session.mock()?;
        let backend = GroundingBackend::Mock(mock);
        let base = instance.parent().unwrap_or(Path::new("."));
        let out = ground_pipeline(&backend, &resolved, base).map_err(ground_err)?;
        (out.0, out.1, out.2, "mock")
    };

    let objects_json = serde_json::to_string_pretty(
        &symbolizer_core::schema::encode_object_set(&objects),
    )
    .expect("objects serialize");
    session.write("objects.json", &(objects_json + "\n"))?;
    session.write("state.txt", &(state.canonical_key() + "\n"))?;
    let goal_text: Vec<String> = goal.literals().map(|l| l.to_string()).collect();
    session.write("goal.txt", &(goal_text.join("\n") + "\n"))?;
    println!(
        "grounded {} via {via}: {} objects, {} atoms, {} goal literals -> {}",
        resolved.record.id,
        objects.len(),
        state.len(),
        goal.len(),
        session.out_dir.display(),
    );
    Ok(())
}

fn ground_pipeline(
    backend: &GroundingBackend<'_>,
    resolved: &ResolvedInstance,
    base: &Path,
) -> Result<
    (
        symbolizer_core::vocab::ObjectSet,
        symbolizer_core::vocab::SymbolicState,
        symbolizer_core::vocab::Goal,
    ),
    GroundError,
> {
    let objects = match backend {
        GroundingBackend::Mock(mock) => {
            mock.ground_objects(&resolved.record.id, &resolved.objects)?
        }
        GroundingBackend::Live(grounder) => {
            let obs = load_observation_for(resolved, base)?;
            grounder.ground_objects(&obs, &resolved.vocab)?
        }
    };
    let state = match backend {
        GroundingBackend::Mock(mock) => mock.ground_state(
            &resolved.record.id,
            &resolved.state,
            &resolved.vocab,
            &objects,
        )?,
        GroundingBackend::Live(grounder) => {
            let obs = load_observation_for(resolved, base)?;
            grounder.ground_state(&obs, &resolved.vocab, &objects)?
        }
    };
    let goal = match backend {
        GroundingBackend::Mock(mock) => mock.ground_goal(
            &resolved.record.id,
            &resolved.goal,
            &resolved.vocab,
            &objects,
        )?,
        GroundingBackend::Live(grounder) => {
            grounder.ground_goal(&resolved.record.goal_text, &resolved.vocab, &objects)?
        }
    };
    Ok((objects, state, goal))
}

fn load_observation_for(
    resolved: &ResolvedInstance,
    base: &Path,
) -> Result<symbolizer_core::vocab::Observation, GroundError> {
    use crate::formats::ObservationRef;
    match &resolved.record.observation {
        ObservationRef::Text { text } => Ok(symbolizer_core::vocab::Observation::text(text)),
        ObservationRef::Image { image_path } => {
            let path = base.join(image_path);
            let bytes = fs::read(&path)
                .map_err(|e| GroundError::Transport(format!("{}: {e}", path.display())))?;
            let media_type = match path.extension().and_then(|e| e.to_str()) {
                Some("png") => "image/png",
                Some("jpg") | Some("jpeg") => "image/jpeg",
                _ => "application/octet-stream",
            };
            Ok(symbolizer_core::vocab::Observation::Image {
                bytes,
                media_type: media_type.to_string(),
            })
        }
    }
}

fn cmd_plan(instance: &Path, mode: &str, common: &CommonOpts) -> Result<(), CliError> {
    let session = Session::open(common)?;
    let mode = PlanningMode::parse(mode)
        .ok_or_else(|| CliError::Input(format!("unknown planning mode {mode:?}")))?;
    let resolved = resolve_instance_file(instance)?;
    let sim = resolved.simulator.clone().ok_or_else(|| {
        CliError::Input(format!(
            "planning needs a bundled domain, got {:?}",
            resolved.record.domain
        ))
    })?;
    session.ensure_out_dir()?;
    let budget = session.budget();
    let tiebreak = session.config.tiebreak();

    // Grounding feeds the planner; exact mock is the offline default.
    let base = instance.parent().unwrap_or(Path::new("."));
    let result = if session.live {
        let api_key = session.api_key()?;
        let cfg = session.grounder_config()?;
        let transport = ReqwestTransport::new(&cfg.endpoint, &api_key, cfg.timeout)
            .map_err(ground_err)?;
        let grounder = HttpGrounder::new(
            &transport,
            &cfg,
            session.config.schema_limits(),
            session.stage_examples()?,
        )
        .map_err(ground_err)?;
        match mode {
            PlanningMode::DirectVlm => {
                let obs = load_observation_for(&resolved, base).map_err(ground_err)?;
                let report = vlm::direct_vlm_plan(&grounder, &sim, &obs).map_err(ground_err)?;
                report.result
            }
            _ => {
                let backend = GroundingBackend::Live(&grounder);
                let (_, state, goal) =
                    ground_pipeline(&backend, &resolved, base).map_err(ground_err)?;
                run_search(&sim, &resolved, &state, &goal, mode, &budget, tiebreak)?
            }
        }
    } else {
        let mock = session.mock()?;
        match mode {
            PlanningMode::DirectVlm => {
                // Scripted offline stand-in: propose the oracle plan.
                let oracle = symbolizer_core::planner::bfs_oracle(
                    &sim.initial,
                    &sim.goal,
                    |s| sim.successors(s),
                    &budget,
                )
                .map_err(|e| CliError::Input(e.to_string()))?;
                vlm::validate_direct_plan(&sim, oracle.plan).result
            }
            _ => {
                let backend = GroundingBackend::Mock(mock);
                let (_, state, goal) =
                    ground_pipeline(&backend, &resolved, base).map_err(ground_err)?;
                run_search(&sim, &resolved, &state, &goal, mode, &budget, tiebreak)?
            }
        }
    };

    session.write("plan.txt", &formats::render_plan_file(&result))?;
    session.write("plan.stats.json", &formats::render_stats_json(&result))?;
    match result.outcome {
        Outcome::Solved => {
            // Validity check against the true initial state and goal.
            let end = sim
                .replay(&sim.initial, &result.plan)
                .map_err(|e| CliError::Input(format!("plan does not replay: {e}")))?;
            if !sim.goal_reached(&end) {
                return Err(CliError::Input(
                    "plan replays but misses the goal".to_string(),
                ));
            }
            println!(
                "solved {} in {} steps ({} expansions) -> {}",
                resolved.record.id,
                result.plan.len(),
                result.stats.expansions,
                session.out_dir.display(),
            );
            Ok(())
        }
        Outcome::BudgetExceeded => Err(CliError::Budget(format!(
            "budget exceeded after {} expansions",
            result.stats.expansions
        ))),
        Outcome::Exhausted => Err(CliError::Input(
            "search space exhausted without a plan".to_string(),
        )),
    }
}

fn run_search(
    sim: &symbolizer_core::sim::SimInstance,
    resolved: &ResolvedInstance,
    state: &symbolizer_core::vocab::SymbolicState,
    goal: &symbolizer_core::vocab::Goal,
    mode: PlanningMode,
    budget: &SearchBudget,
    tiebreak: Tiebreak,
) -> Result<symbolizer_core::planner::PlanResult, CliError> {
    match mode {
        PlanningMode::ModelFree => symbolizer_core::planner::plan(
            state,
            goal,
            |s| sim.successors(s),
            budget,
            tiebreak,
        )
        .map_err(|e| CliError::Input(e.to_string())),
        PlanningMode::WithModel => {
            let domain = symbolizer_core::pddl::parse_domain(bundled_domain_pddl(sim.domain))
                .map_err(input_err)?;
            let text = symbolizer_core::pddl::emit_problem(
                &resolved.record.id,
                domain.name(),
                &resolved.objects,
                state,
                goal,
            )
            .map_err(input_err)?;
            let problem = symbolizer_core::pddl::parse_problem(&text).map_err(input_err)?;
            symbolizer_core::pddl::plan_with_model(&domain, &problem, budget).map_err(input_err)
        }
        PlanningMode::DirectVlm => unreachable!("handled by the caller"),
    }
}

impl Session {
    fn budget(&self) -> SearchBudget {
        self.config.budget()
    }
}

fn cmd_eval(
    dataset: &Path,
    mode: &str,
    stages: Option<&str>,
    sweep: Option<&str>,
    jobs: usize,
    common: &CommonOpts,
) -> Result<(), CliError> {
    let session = Session::open(common)?;
    let rows = formats::read_dataset(dataset).map_err(input_err)?;
    if rows.is_empty() {
        return Err(CliError::Input(format!(
            "{}: dataset is empty",
            dataset.display()
        )));
    }
    session.ensure_out_dir()?;
    let base = dataset.parent().unwrap_or(Path::new(".")).to_path_buf();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Env(e.to_string()))?;

    if let Some(sweep_spec) = sweep {
        let epsilons: Vec<f64> = sweep_spec
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| CliError::Input(format!("bad sweep value: {e}")))?;
        let seed = session.config.require_seed().map_err(input_err)?;
        let spurious = session.config.mock.spurious;
        let points = pool
            .install(|| eval::sweep_grounding(&rows, &epsilons, spurious, seed, &base))
            .map_err(input_err)?;
        let path = session.write("sweep.csv", &eval::sweep_csv(&points))?;
        println!("wrote {}", path.display());
        return Ok(());
    }

    let stage_selection = match stages {
        None => StageSelection::default(),
        Some(spec) => {
            let mut sel = StageSelection {
                objects: false,
                predicates: false,
                goal: false,
            };
            for stage in spec.split(',') {
                match stage.trim() {
                    "objects" => sel.objects = true,
                    "predicates" => sel.predicates = true,
                    "goal" => sel.goal = true,
                    other => {
                        return Err(CliError::Input(format!("unknown stage {other:?}")))
                    }
                }
            }
            sel
        }
    };

    // Live evaluation wires the HTTP grounder; everything else mocks.
    let api_key = if session.live {
        Some(session.api_key()?)
    } else {
        session.config.require_seed().map_err(input_err)?;
        None
    };
    let cfg = if session.live {
        session.grounder_config()?
    } else {
        session.config.grounder_config()
    };
    let transport = match &api_key {
        Some(key) => Some(
            ReqwestTransport::new(&cfg.endpoint, key, cfg.timeout).map_err(ground_err)?,
        ),
        None => None,
    };
    let live_grounder = match &transport {
        Some(t) => Some(
            HttpGrounder::new(
                t,
                &cfg,
                session.config.schema_limits(),
                session.stage_examples()?,
            )
            .map_err(ground_err)?,
        ),
        None => None,
    };
    let backend = match &live_grounder {
        Some(g) => GroundingBackend::Live(g),
        None => GroundingBackend::Mock(MockGrounder::new(cfg.noise)),
    };

    if mode == "grounding" {
        let report = pool
            .install(|| eval::evaluate_grounding(&rows, &backend, stage_selection, &base))
            .map_err(input_err)?;
        let csv = session.write("grounding.csv", &eval::grounding_csv(&report))?;
        let md = session.write(
            "summary.md",
            &eval::markdown_summary(&report, "Grounding evaluation"),
        )?;
        println!("wrote {} and {}", csv.display(), md.display());
        return Ok(());
    }

    let mode = PlanningMode::parse(mode)
        .ok_or_else(|| CliError::Input(format!("unknown eval mode {mode:?}")))?;
    let budget = session.budget();
    // Offline direct planning proposes the oracle plan (scripted mock);
    // live direct planning asks the endpoint.
    let oracle_supplier: DirectPlanSupplier<'_> = &|inst: &ResolvedInstance| {
        let sim = inst.simulator.as_ref().expect("bundled domain");
        symbolizer_core::planner::bfs_oracle(
            &sim.initial,
            &sim.goal,
            |s| sim.successors(s),
            &SearchBudget::default(),
        )
        .map(|r| r.plan)
        .map_err(|e| GroundError::Sim(e.to_string()))
    };
    let live_supplier_grounder = live_grounder.as_ref();
    let base_for_live = base.clone();
    let live_supplier = move |inst: &ResolvedInstance| {
        let grounder = live_supplier_grounder.expect("live mode has a grounder");
        let sim = inst.simulator.as_ref().expect("bundled domain");
        let obs = load_observation_for(inst, &base_for_live)?;
        vlm::direct_vlm_plan(grounder, sim, &obs).map(|r| r.proposed)
    };
    let direct: DirectPlanSupplier<'_> = if session.live {
        &live_supplier
    } else {
        oracle_supplier
    };
    let options = PlanningOptions {
        budget,
        tiebreak: session.config.tiebreak(),
        direct: Some(direct),
    };
    let report = pool
        .install(|| eval::evaluate_planning(&rows, mode, &backend, &options, &base))
        .map_err(input_err)?;
    let csv = session.write("planning.csv", &eval::planning_csv(&report))?;
    let md = session.write(
        "summary.md",
        &eval::markdown_summary(&report, &format!("Planning evaluation ({})", mode.as_str())),
    )?;
    println!(
        "success rate {:.3}; wrote {} and {}",
        report.success_rate().unwrap_or(0.0),
        csv.display(),
        md.display(),
    );
    Ok(())
}

/// The bundled suite: Blocksworld at 2-6 blocks, Hanoi at 2-5 disks,
/// and Hanoi-Color at 3 disks, canonical plus two scrambled seeds each.
fn bundled_suite() -> Vec<(DomainId, usize)> {
    let mut out = Vec::new();
    for size in 2..=6 {
        out.push((DomainId::Blocksworld, size));
    }
    for size in 2..=5 {
        out.push((DomainId::Hanoi, size));
    }
    out.push((DomainId::HanoiColor, 3));
    out
}

fn cmd_make_instances(
    domain: Option<&str>,
    size: Option<usize>,
    scramble: Option<usize>,
    seed: u64,
    count: u64,
    out: &Path,
) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Env(format!("{}: {e}", out.display())))?;
    let mut records: Vec<InstanceRecord> = Vec::new();
    let mut domains_used: Vec<DomainId> = Vec::new();

    let mut emit = |domain: DomainId, params: &InstanceParams, seed: u64| -> Result<(), CliError> {
        let inst = make_instance(domain, params, seed).map_err(input_err)?;
        let record = InstanceRecord::from_instance(&inst);
        formats::write_instance(&out.join(format!("{}.json", record.id)), &record)
            .map_err(input_err)?;
        records.push(record);
        if !domains_used.contains(&domain) {
            domains_used.push(domain);
        }
        Ok(())
    };

    match domain {
        None => {
            for (domain, size) in bundled_suite() {
                emit(domain, &InstanceParams::canonical(size), 0)?;
                for extra in 1..=2u64 {
                    emit(
                        domain,
                        &InstanceParams::scrambled(size, 2 * size),
                        seed + extra,
                    )?;
                }
            }
        }
        Some(name) => {
            let domain = DomainId::parse(name)
                .ok_or_else(|| CliError::Input(format!("unknown domain {name:?}")))?;
            let size = size.ok_or_else(|| {
                CliError::Input("--domain needs --size".to_string())
            })?;
            for i in 0..count {
                let params = match scramble {
                    None => InstanceParams::canonical(size),
                    Some(depth) => InstanceParams::scrambled(size, depth),
                };
                emit(domain, &params, seed + i)?;
                if scramble.is_none() {
                    break; // canonical instances do not vary with the seed
                }
            }
        }
    }

    for domain in &domains_used {
        let vocab = symbolizer_core::sim::vocabulary(*domain);
        let path = out.join(format!("{}.vocab.json", domain.as_str()));
        fs::write(&path, formats::vocab_to_json(&vocab))
            .map_err(|e| CliError::Env(format!("{}: {e}", path.display())))?;
    }
    let dataset = out.join("dataset.jsonl");
    formats::write_dataset(&dataset, &records).map_err(input_err)?;
    println!(
        "wrote {} instances, {} vocabularies, and {}",
        records.len(),
        domains_used.len(),
        dataset.display(),
    );
    Ok(())
}
