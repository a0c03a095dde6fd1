use std::path::PathBuf;

use anyhow::Result;
use clap::Args;

use crate::report::{merge, read_records, text_table, to_jsonl};
use crate::util::{write_atomic, RunManifest};
use crate::GlobalOpts;

#[derive(Debug, Args)]
#[command(after_help = "\
Each output line is one JSON record with fields: algorithm, edge_types \
(yes/no), communities, cost (map N -> Cost@N), ndcg (map k -> NDCG@k), and \
better (metric columns, e.g. \"cost@5\", this row strictly wins within its \
algorithm group; lower cost wins, higher ndcg wins). The text table marks \
winning cells with `*`.")]
pub struct ReportArgs {
    /// Evaluation record files produced by `evaluate` (or by `report`).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Merged machine-readable output (JSON lines).
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the text table here (it always prints to stdout).
    #[arg(long)]
    pub text: Option<PathBuf>,
}

pub fn run(_global: &GlobalOpts, args: ReportArgs) -> Result<()> {
    let mut manifest = RunManifest::new(
        "report",
        serde_json::json!({
            "inputs": args.inputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        }),
    );
    let mut records = Vec::new();
    for path in &args.inputs {
        manifest.input(path)?;
        records.extend(read_records(path)?);
    }
    let merged = merge(&records)?;

    write_atomic(&args.out, to_jsonl(&merged)?.as_bytes())?;
    manifest.output(&args.out);

    let table = text_table(&merged);
    print!("{table}");
    if let Some(text_path) = &args.text {
        write_atomic(text_path, table.as_bytes())?;
        manifest.output(text_path);
    }
    manifest.write(&args.out.with_extension("manifest.json"))?;
    Ok(())
}
