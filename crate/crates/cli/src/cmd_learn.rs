use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use etud_core::ga::{evolve, finalize, RankingTask};
use etud_core::hetnet::{load_graph, save_etud};
use etud_core::metrics::load_history;

use crate::util::{
    commit, load_user_list, nodes_of_type_name, stage_seed, write_atomic, RunManifest, STAGE_LEARN,
};
use crate::GlobalOpts;

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[arg(long)]
    pub nodes: PathBuf,
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long)]
    pub history: PathBuf,
    /// Training user list (one node id per line).
    #[arg(long)]
    pub train_users: PathBuf,
    /// Output directory for etud.tsv, generations.tsv, best_chromosome.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Node type whose nodes are ranked inside fitness.
    #[arg(long, default_value = "song")]
    pub song_type: String,

    // GaConfig overrides (defaults come from --config or the paper values).
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub crossover_threshold: Option<f64>,
    #[arg(long)]
    pub mutation_threshold: Option<f64>,
    #[arg(long)]
    pub stable_generations: Option<usize>,
    #[arg(long)]
    pub sim_k: Option<usize>,
    #[arg(long)]
    pub max_generations: Option<usize>,
    #[arg(long)]
    pub fitness_sample: Option<usize>,

    // PprConfig overrides.
    #[arg(long)]
    pub damping: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

pub fn run(global: &GlobalOpts, args: LearnArgs) -> Result<()> {
    let file_cfg = global.load_config()?;
    let mut ga_cfg = file_cfg.ga;
    let mut ppr_cfg = file_cfg.ppr;
    if let Some(v) = args.population {
        ga_cfg.population = v;
    }
    if let Some(v) = args.crossover_threshold {
        ga_cfg.crossover_threshold = v;
    }
    if let Some(v) = args.mutation_threshold {
        ga_cfg.mutation_threshold = v;
    }
    if let Some(v) = args.stable_generations {
        ga_cfg.stable_generations = v;
    }
    if let Some(v) = args.sim_k {
        ga_cfg.sim_k = v;
    }
    if let Some(v) = args.max_generations {
        ga_cfg.max_generations = v;
    }
    if let Some(v) = args.fitness_sample {
        ga_cfg.fitness_sample = Some(v);
    }
    if let Some(v) = args.damping {
        ppr_cfg.damping = v;
    }
    if let Some(v) = args.tol {
        ppr_cfg.tol = v;
    }
    if let Some(v) = args.max_iter {
        ppr_cfg.max_iter = v;
    }
    if let Some(master) = global.seed {
        ga_cfg.seed = stage_seed(master, STAGE_LEARN);
    }

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating output directory {}", args.out.display()))?;

    let mut manifest = RunManifest::new(
        "learn",
        serde_json::json!({ "ga": ga_cfg, "ppr": ppr_cfg, "song_type": args.song_type }),
    );
    manifest.seed("learn", ga_cfg.seed);
    for path in [&args.nodes, &args.edges, &args.history, &args.train_users] {
        manifest.input(path)?;
    }

    let graph = manifest
        .time("load", || load_graph(&args.nodes, &args.edges))
        .context("loading graph")?;
    let history = load_history(&args.history, &graph).context("loading history")?;
    let train_users = load_user_list(&args.train_users, &graph)?;
    let songs = nodes_of_type_name(&graph, &args.song_type)?;

    let task = RankingTask {
        graph: &graph,
        train_users,
        songs,
        history: &history,
        ppr: ppr_cfg,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(ga_cfg.seed);
    let result = manifest
        .time("evolve", || evolve(&task, &ga_cfg, &mut rng))
        .context("learn stage")?;

    let deps = graph.registry().dependency_sets();
    let etud = finalize(&result.best, &deps);

    let etud_path = args.out.join("etud.tsv");
    commit(&etud_path, |p| save_etud(graph.registry(), &etud, p))?;

    let mut log = String::new();
    for rec in &result.log {
        writeln!(
            log,
            "{}\t{}\t{}",
            rec.generation,
            rec.best_raw_similarity,
            serde_json::to_string(&rec.best_genes)?
        )?;
    }
    let log_path = args.out.join("generations.tsv");
    write_atomic(&log_path, log.as_bytes())?;

    let best_path = args.out.join("best_chromosome.json");
    let best_json = serde_json::json!({ "genes": result.best.genes() });
    write_atomic(&best_path, serde_json::to_string_pretty(&best_json)?.as_bytes())?;

    for p in [&etud_path, &log_path, &best_path] {
        manifest.output(p);
    }
    manifest.write(&args.out.join("manifest.json"))?;

    eprintln!(
        "learned weights for {} edge types over {} generations into {}",
        graph.registry().edge_type_count(),
        result.log.len(),
        args.out.display()
    );
    Ok(())
}
