use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use etud_core::community::{export_partition, import_partition, label_propagation, louvain};
use etud_core::hetnet::{load_etud, load_graph, Etud};
use etud_core::Error;

use crate::util::{commit, stage_seed, RunManifest, STAGE_DETECT};
use crate::GlobalOpts;

const SUPPORTED: &str = "louvain, labelprop";

#[derive(Debug, Args)]
pub struct DetectArgs {
    #[arg(long)]
    pub nodes: PathBuf,
    #[arg(long)]
    pub edges: PathBuf,
    /// ETUD weight file; omitted means all-ones projection.
    #[arg(long)]
    pub etud: Option<PathBuf>,
    /// Native algorithm to run: louvain or labelprop.
    #[arg(long, conflicts_with = "import")]
    pub algorithm: Option<String>,
    /// Import a partition produced by an external tool instead.
    #[arg(long)]
    pub import: Option<PathBuf>,
    /// Louvain resolution parameter.
    #[arg(long, default_value_t = 1.0)]
    pub resolution: f64,
    /// Label propagation round cap.
    #[arg(long, default_value_t = 100)]
    pub max_rounds: usize,
    /// Output partition file.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(global: &GlobalOpts, args: DetectArgs) -> Result<()> {
    let seed = stage_seed(global.seed.unwrap_or(0), STAGE_DETECT);
    let mut manifest = RunManifest::new(
        "detect",
        serde_json::json!({
            "algorithm": args.algorithm,
            "import": args.import.as_ref().map(|p| p.display().to_string()),
            "resolution": args.resolution,
            "max_rounds": args.max_rounds,
            "etud": args.etud.is_some(),
        }),
    );
    manifest.seed("detect", seed);
    for path in [Some(&args.nodes), Some(&args.edges), args.etud.as_ref(), args.import.as_ref()]
        .into_iter()
        .flatten()
    {
        manifest.input(path)?;
    }

    let graph = load_graph(&args.nodes, &args.edges).context("loading graph")?;

    let partition = if let Some(import) = &args.import {
        import_partition(import, &graph).context("importing partition")?
    } else {
        let etud = match &args.etud {
            Some(path) => {
                let named = load_etud(path)?;
                Etud::from_named(graph.registry(), &named)?
            }
            None => Etud::all_ones(graph.registry().edge_type_count()),
        };
        let projected = graph.apply_etud(&etud)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let algorithm = args.algorithm.as_deref().unwrap_or("louvain");
        match algorithm {
            "louvain" => manifest.time("detect", || louvain(&projected, args.resolution, &mut rng)),
            "labelprop" => manifest.time("detect", || {
                label_propagation(&projected, args.max_rounds, &mut rng)
            }),
            other => {
                return Err(Error::UnknownAlgorithm {
                    given: other.to_string(),
                    supported: SUPPORTED.to_string(),
                }
                .into())
            }
        }
    };

    commit(&args.out, |p| export_partition(&partition, &graph, p))?;
    manifest.output(&args.out);
    let manifest_path = args.out.with_extension("manifest.json");
    manifest.write(&manifest_path)?;

    eprintln!(
        "partitioned {} nodes into {} communities -> {}",
        graph.node_count(),
        partition.community_count(),
        args.out.display()
    );
    Ok(())
}
