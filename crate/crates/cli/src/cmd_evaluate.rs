use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use etud_core::community::{import_partition, Partition};
use etud_core::hetnet::{load_etud, load_graph, Etud, HomoGraph};
use etud_core::metrics::{cost_at_table, ndcg_at_k, ListeningHistory};
use etud_core::ppr::{personalized_pagerank, rank_by_score, PprConfig};
use etud_core::NodeId;

use crate::report::{to_jsonl, EvalRecord};
use crate::util::{load_user_list, nodes_of_type_name, write_atomic, RunManifest};
use crate::GlobalOpts;

/// NDCG cutoffs of the within-community ranking report.
const NDCG_KS: [usize; 4] = [5, 10, 20, 100];

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub nodes: PathBuf,
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long)]
    pub partition: PathBuf,
    #[arg(long)]
    pub history: PathBuf,
    /// Test user list (one node id per line).
    #[arg(long)]
    pub test_users: PathBuf,
    /// ETUD weight file; omitted means all-ones projection.
    #[arg(long)]
    pub etud: Option<PathBuf>,
    /// Algorithm name recorded in the output row.
    #[arg(long, default_value = "custom")]
    pub algorithm_label: String,
    /// Node type ranked within communities.
    #[arg(long, default_value = "song")]
    pub song_type: String,
    /// Output evaluation record (JSON lines).
    #[arg(long)]
    pub out: PathBuf,
    /// Directory for per-user PPR score dumps (node_id<TAB>score lines).
    #[arg(long)]
    pub dump_scores: Option<PathBuf>,

    #[arg(long)]
    pub damping: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

pub fn run(global: &GlobalOpts, args: EvaluateArgs) -> Result<()> {
    let file_cfg = global.load_config()?;
    let mut ppr_cfg = file_cfg.ppr;
    if let Some(v) = args.damping {
        ppr_cfg.damping = v;
    }
    if let Some(v) = args.tol {
        ppr_cfg.tol = v;
    }
    if let Some(v) = args.max_iter {
        ppr_cfg.max_iter = v;
    }

    let mut manifest = RunManifest::new(
        "evaluate",
        serde_json::json!({
            "algorithm_label": args.algorithm_label,
            "song_type": args.song_type,
            "etud": args.etud.is_some(),
            "ppr": ppr_cfg,
        }),
    );
    for path in [
        Some(&args.nodes),
        Some(&args.edges),
        Some(&args.partition),
        Some(&args.history),
        Some(&args.test_users),
        args.etud.as_ref(),
    ]
    .into_iter()
    .flatten()
    {
        manifest.input(path)?;
    }

    let graph = load_graph(&args.nodes, &args.edges).context("loading graph")?;
    let partition = import_partition(&args.partition, &graph).context("loading partition")?;
    let history = load_history_checked(&args.history, &graph)?;
    let test_users = load_user_list(&args.test_users, &graph)?;
    let songs = nodes_of_type_name(&graph, &args.song_type)?;

    let etud = match &args.etud {
        Some(path) => Etud::from_named(graph.registry(), &load_etud(path)?)?,
        None => Etud::all_ones(graph.registry().edge_type_count()),
    };
    let projected = graph.apply_etud(&etud)?;

    let cost = manifest.time("cost", || cost_at_table(&partition, &test_users, &history));
    let ndcg = manifest.time("ndcg", || {
        within_community_ndcg(
            &projected,
            &partition,
            &history,
            &test_users,
            &songs,
            &ppr_cfg,
            args.dump_scores.as_deref().map(|d| (d, &graph)),
        )
    })?;

    let record = EvalRecord {
        algorithm: args.algorithm_label.clone(),
        edge_types: if args.etud.is_some() { "yes" } else { "no" }.to_string(),
        communities: partition.community_count(),
        cost: cost
            .into_iter()
            .map(|(n, v)| (n.to_string(), v))
            .collect(),
        ndcg,
        better: None,
    };
    write_atomic(&args.out, to_jsonl(&[record])?.as_bytes())?;
    manifest.output(&args.out);
    manifest.write(&args.out.with_extension("manifest.json"))?;

    eprintln!(
        "evaluated partition ({} communities) over {} test users -> {}",
        partition.community_count(),
        test_users.len(),
        args.out.display()
    );
    Ok(())
}

fn load_history_checked(
    path: &std::path::Path,
    graph: &etud_core::HeteroGraph,
) -> Result<ListeningHistory> {
    etud_core::metrics::load_history(path, graph).context("loading history")
}

/// Mean NDCG@k over all test users: candidates are the songs sharing the
/// user's community, ranked by PPR seeded at the user. Users with an empty
/// candidate set or no graded songs contribute 0.
fn within_community_ndcg(
    projected: &HomoGraph,
    partition: &Partition,
    history: &ListeningHistory,
    test_users: &[NodeId],
    songs: &[NodeId],
    ppr_cfg: &PprConfig,
    dump: Option<(&std::path::Path, &etud_core::HeteroGraph)>,
) -> Result<BTreeMap<String, f64>> {
    let mut sums: BTreeMap<usize, f64> = NDCG_KS.iter().map(|&k| (k, 0.0)).collect();
    if let Some((dir, _)) = dump {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating score dump directory {}", dir.display()))?;
    }
    for &user in test_users {
        let community = partition.community_of(user);
        let candidates: Vec<NodeId> = songs
            .iter()
            .copied()
            .filter(|&s| partition.community_of(s) == community)
            .collect();
        let grades = history.user(user).map(|h| h.grades());
        let (Some(grades), false) = (grades, candidates.is_empty()) else {
            continue;
        };
        if grades.is_empty() {
            continue;
        }
        let scores = personalized_pagerank(projected, user, ppr_cfg)?;
        if let Some((dir, graph)) = dump {
            let mut text = String::new();
            for (i, &score) in scores.scores().iter().enumerate() {
                writeln!(text, "{}\t{}", graph.node_name(NodeId(i)), score)
                    .expect("string write");
            }
            write_atomic(
                &dir.join(format!("{}.tsv", graph.node_name(user))),
                text.as_bytes(),
            )?;
        }
        let ranked = rank_by_score(&scores, &candidates);
        for &k in &NDCG_KS {
            *sums.get_mut(&k).expect("initialized") += ndcg_at_k(&ranked, grades, k);
        }
    }
    let denom = test_users.len().max(1) as f64;
    Ok(sums
        .into_iter()
        .map(|(k, total)| (k.to_string(), total / denom))
        .collect())
}
