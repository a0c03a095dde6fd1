use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use etud_core::hetnet::save_graph;
use etud_core::metrics::save_history;
use etud_core::synth::{generate, split_users};

use crate::util::{commit, stage_seed, write_atomic, RunManifest, STAGE_SPLIT, STAGE_SYNTH};
use crate::GlobalOpts;

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Output directory (created if absent).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(global: &GlobalOpts, args: GenerateArgs) -> Result<()> {
    let file_cfg = global.load_config()?;
    let mut synth_cfg = file_cfg.synth;
    if let Some(master) = global.seed {
        synth_cfg.seed = stage_seed(master, STAGE_SYNTH);
    }
    let split_seed = stage_seed(global.seed.unwrap_or(synth_cfg.seed), STAGE_SPLIT);

    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating output directory {}", args.out.display()))?;

    let mut manifest = RunManifest::new("generate", serde_json::to_value(&synth_cfg)?);
    manifest.seed("synth", synth_cfg.seed);
    manifest.seed("split", split_seed);

    let output = manifest.time("generate", || generate(&synth_cfg))?;
    let mut rng = ChaCha8Rng::seed_from_u64(split_seed);
    let (train, test) = split_users(&output.users, synth_cfg.train_fraction, &mut rng)?;

    let nodes_path = args.out.join("nodes.tsv");
    let edges_path = args.out.join("edges.tsv");
    manifest.time("write", || -> Result<()> {
        let tmp_nodes = args.out.join("nodes.tsv.tmp");
        let tmp_edges = args.out.join("edges.tsv.tmp");
        save_graph(&output.graph, &tmp_nodes, &tmp_edges)?;
        std::fs::rename(&tmp_nodes, &nodes_path)?;
        std::fs::rename(&tmp_edges, &edges_path)?;

        let history_path = args.out.join("history.tsv");
        commit(&history_path, |p| save_history(&output.history, &output.graph, p))?;

        let mut groups = String::new();
        for &(node, group) in &output.groups {
            writeln!(groups, "{}\t{}", output.graph.node_name(node), group).expect("string write");
        }
        write_atomic(&args.out.join("groups.tsv"), groups.as_bytes())?;

        for (name, set) in [("train_users.txt", &train), ("test_users.txt", &test)] {
            let mut text = String::new();
            for &u in set {
                writeln!(text, "{}", output.graph.node_name(u)).expect("string write");
            }
            write_atomic(&args.out.join(name), text.as_bytes())?;
        }
        Ok(())
    })?;

    for name in [
        "nodes.tsv",
        "edges.tsv",
        "history.tsv",
        "groups.tsv",
        "train_users.txt",
        "test_users.txt",
    ] {
        manifest.output(&args.out.join(name));
    }
    manifest.write(&args.out.join("manifest.json"))?;

    eprintln!(
        "generated {} nodes, {} edges, {} listeners ({} train / {} test) into {}",
        output.graph.node_count(),
        output.graph.edge_count(),
        output.history.user_count(),
        train.len(),
        test.len(),
        args.out.display()
    );
    Ok(())
}
