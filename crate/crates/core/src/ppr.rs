//! Personalized PageRank by power iteration on the symmetrized weighted
//! graph. Teleport mass returns entirely to the seed node; dangling mass
//! (nodes with zero incident weight) is donated to the seed as well, so the
//! scores always form a probability distribution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hetnet::{HomoGraph, NodeId};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct PprConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PprConfig {
    fn default() -> Self {
        Self {
            damping: 0.85,
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

impl PprConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "damping must be in (0,1), got {}",
                self.damping
            )));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tol must be > 0, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}

/// Per-node scores of one personalized PageRank run.
#[derive(Clone, Debug)]
pub struct PprScores {
    scores: Vec<f64>,
    seed: NodeId,
    damping: f64,
    iterations: usize,
}

impl PprScores {
    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn score(&self, node: NodeId) -> f64 {
        self.scores[node.0]
    }

    pub fn seed(&self) -> NodeId {
        self.seed
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

/// Runs personalized PageRank seeded at `seed`. Walk probability along an
/// incident edge is proportional to its weight; each directed edge is
/// traversable both ways. Stops when the L1 change drops below `tol` or
/// after `max_iter` iterations.
pub fn personalized_pagerank(g: &HomoGraph, seed: NodeId, cfg: &PprConfig) -> Result<PprScores> {
    cfg.validate()?;
    let n = g.node_count();
    if seed.0 >= n {
        return Err(Error::UnknownNode(format!("node index {}", seed.0)));
    }

    let mut scores = vec![0.0; n];
    scores[seed.0] = 1.0;
    let mut next = vec![0.0; n];
    let teleport = 1.0 - cfg.damping;
    let mut iterations = 0;

    for _ in 0..cfg.max_iter {
        iterations += 1;
        next.iter_mut().for_each(|x| *x = 0.0);

        let mut dangling = 0.0;
        for u in 0..n {
            let mass = scores[u];
            if mass == 0.0 {
                continue;
            }
            let strength = g.strength(NodeId(u));
            if strength <= 0.0 {
                dangling += mass;
                continue;
            }
            let share = cfg.damping * mass / strength;
            for &(v, w) in g.neighbors(NodeId(u)) {
                next[v] += share * w;
            }
        }
        next[seed.0] += teleport + cfg.damping * dangling;

        let diff: f64 = scores
            .iter()
            .zip(next.iter())
            .map(|(a, b)| (a - b).abs())
            .sum();
        std::mem::swap(&mut scores, &mut next);
        if diff < cfg.tol {
            break;
        }
    }

    Ok(PprScores {
        scores,
        seed,
        damping: cfg.damping,
        iterations,
    })
}

/// Sorts candidate nodes by score descending; equal scores break by
/// ascending node id.
pub fn rank_by_score(scores: &PprScores, candidates: &[NodeId]) -> Vec<NodeId> {
    let mut ranked = candidates.to_vec();
    ranked.sort_by(|a, b| {
        scores
            .score(*b)
            .partial_cmp(&scores.score(*a))
            .expect("scores are finite")
            .then(a.cmp(b))
    });
    ranked
}
