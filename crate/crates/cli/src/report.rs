//! Evaluation record schema shared by `evaluate` (writer) and `report`
//! (merger). One JSON object per line; `better` lists the metric columns a
//! row strictly wins against the other rows of the same algorithm.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EvalRecord {
    pub algorithm: String,
    /// "yes" when the partition/ranking used learned edge-type weights.
    pub edge_types: String,
    pub communities: usize,
    /// Cost@N keyed by N as a string (JSON-friendly, ordered).
    pub cost: BTreeMap<String, f64>,
    /// NDCG@k keyed by k as a string.
    pub ndcg: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub better: Option<Vec<String>>,
}

pub fn read_records(path: &Path) -> Result<Vec<EvalRecord>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: EvalRecord = serde_json::from_str(line)
            .with_context(|| format!("{}:{}: bad record", path.display(), i + 1))?;
        records.push(rec);
    }
    Ok(records)
}

pub fn to_jsonl(records: &[EvalRecord]) -> Result<String> {
    let mut out = String::new();
    for rec in records {
        out.push_str(&serde_json::to_string(rec)?);
        out.push('\n');
    }
    Ok(out)
}

/// Checks all records share the same metric columns, then recomputes the
/// `better` markers within each algorithm group: a row wins a cost column by
/// being strictly lowest, an ndcg column by being strictly highest.
pub fn merge(records: &[EvalRecord]) -> Result<Vec<EvalRecord>> {
    if records.is_empty() {
        bail!("no evaluation records given");
    }
    let cost_keys: Vec<&String> = records[0].cost.keys().collect();
    let ndcg_keys: Vec<&String> = records[0].ndcg.keys().collect();
    for rec in records {
        if rec.cost.keys().collect::<Vec<_>>() != cost_keys
            || rec.ndcg.keys().collect::<Vec<_>>() != ndcg_keys
        {
            bail!(
                "column mismatch: record for '{}' ({}) has different metric columns",
                rec.algorithm,
                rec.edge_types
            );
        }
    }

    let mut merged: Vec<EvalRecord> = records.to_vec();
    for rec in merged.iter_mut() {
        rec.better = Some(Vec::new());
    }
    let algorithms: Vec<String> = {
        let mut seen = Vec::new();
        for rec in records {
            if !seen.contains(&rec.algorithm) {
                seen.push(rec.algorithm.clone());
            }
        }
        seen
    };
    for algorithm in &algorithms {
        let group: Vec<usize> = (0..merged.len())
            .filter(|&i| &merged[i].algorithm == algorithm)
            .collect();
        if group.len() < 2 {
            continue;
        }
        for key in &cost_keys {
            mark_winner(&mut merged, &group, key, "cost", |a, b| a < b);
        }
        for key in &ndcg_keys {
            mark_winner(&mut merged, &group, key, "ndcg", |a, b| a > b);
        }
    }
    Ok(merged)
}

fn mark_winner(
    records: &mut [EvalRecord],
    group: &[usize],
    key: &str,
    metric: &str,
    beats: fn(f64, f64) -> bool,
) {
    let value = |i: usize| -> f64 {
        let rec = &records[i];
        match metric {
            "cost" => rec.cost[key],
            _ => rec.ndcg[key],
        }
    };
    let mut winner = group[0];
    let mut strict = true;
    for &i in &group[1..] {
        if beats(value(i), value(winner)) {
            winner = i;
            strict = true;
        } else if value(i) == value(winner) {
            strict = false;
        }
    }
    if strict {
        records[winner]
            .better
            .as_mut()
            .expect("initialized")
            .push(format!("{metric}@{key}"));
    }
}

/// Plain-text table, winner cells suffixed with `*`.
pub fn text_table(records: &[EvalRecord]) -> String {
    let mut out = String::new();
    if records.is_empty() {
        return out;
    }
    let cost_keys: Vec<String> = records[0].cost.keys().cloned().collect();
    let ndcg_keys: Vec<String> = records[0].ndcg.keys().cloned().collect();

    let mut header = vec![
        "algorithm".to_string(),
        "edge_types".to_string(),
        "communities".to_string(),
    ];
    header.extend(cost_keys.iter().map(|k| format!("cost@{k}")));
    header.extend(ndcg_keys.iter().map(|k| format!("ndcg@{k}")));

    let mut rows: Vec<Vec<String>> = vec![header];
    for rec in records {
        let better = rec.better.clone().unwrap_or_default();
        let mut row = vec![
            rec.algorithm.clone(),
            rec.edge_types.clone(),
            rec.communities.to_string(),
        ];
        for k in &cost_keys {
            let star = if better.contains(&format!("cost@{k}")) { "*" } else { "" };
            row.push(format!("{:.2}{star}", rec.cost[k]));
        }
        for k in &ndcg_keys {
            let star = if better.contains(&format!("ndcg@{k}")) { "*" } else { "" };
            row.push(format!("{:.4}{star}", rec.ndcg[k]));
        }
        rows.push(row);
    }

    let widths: Vec<usize> = (0..rows[0].len())
        .map(|c| rows.iter().map(|r| r[c].len()).max().unwrap_or(0))
        .collect();
    for row in &rows {
        for (c, cell) in row.iter().enumerate() {
            if c > 0 {
                out.push_str("  ");
            }
            write!(out, "{:>width$}", cell, width = widths[c]).expect("string write");
        }
        out.push('\n');
    }
    out
}
