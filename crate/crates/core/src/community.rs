//! Community detection on the projected homogeneous graph: Louvain, label
//! propagation, modularity scoring, and a partition exchange format for
//! partitions produced by external algorithms.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hetnet::{data_lines, HeteroGraph, HomoGraph, NodeId};

/// Node-to-community assignment with dense community ids `0..C`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    sizes: Vec<usize>,
}

impl Partition {
    /// Builds a partition from raw labels, renumbering communities densely
    /// by first appearance in node-index order.
    pub fn from_assignment(labels: &[usize]) -> Self {
        let mut remap: HashMap<usize, usize> = HashMap::new();
        let mut assignment = Vec::with_capacity(labels.len());
        for &l in labels {
            let next = remap.len();
            let id = *remap.entry(l).or_insert(next);
            assignment.push(id);
        }
        let mut sizes = vec![0usize; remap.len()];
        for &c in &assignment {
            sizes[c] += 1;
        }
        Self { assignment, sizes }
    }

    pub fn singletons(node_count: usize) -> Self {
        Self {
            assignment: (0..node_count).collect(),
            sizes: vec![1; node_count],
        }
    }

    pub fn community_of(&self, node: NodeId) -> usize {
        self.assignment[node.0]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn community_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn node_count(&self) -> usize {
        self.assignment.len()
    }
}

/// Weighted Newman modularity over symmetrized weights:
/// `Q = Σ_c (in_c/m − (tot_c/2m)²)` with `m` the total edge weight.
pub fn modularity(g: &HomoGraph, p: &Partition) -> f64 {
    let m = g.total_weight();
    if m <= 0.0 {
        return 0.0;
    }
    let c = p.community_count();
    let mut internal = vec![0.0; c];
    let mut total = vec![0.0; c];
    for &(s, t, w) in g.edges() {
        if p.community_of(s) == p.community_of(t) {
            internal[p.community_of(s)] += w;
        }
    }
    for i in 0..g.node_count() {
        total[p.community_of(NodeId(i))] += g.strength(NodeId(i));
    }
    let two_m = 2.0 * m;
    (0..c)
        .map(|ci| internal[ci] / m - (total[ci] / two_m).powi(2))
        .sum()
}

/// Louvain result with the flattened modularity recorded after each pass
/// (one pass = local moving + aggregation).
#[derive(Clone, Debug)]
pub struct LouvainResult {
    pub partition: Partition,
    pub pass_modularity: Vec<f64>,
}

/// Two-phase Louvain with shuffled node visit order. Moves are accepted only
/// for modularity gains above 1e-9 (in scale-invariant modularity units).
pub fn louvain<R: Rng>(g: &HomoGraph, resolution: f64, rng: &mut R) -> Partition {
    louvain_with_stats(g, resolution, rng).partition
}

pub fn louvain_with_stats<R: Rng>(g: &HomoGraph, resolution: f64, rng: &mut R) -> LouvainResult {
    let n = g.node_count();
    let m = g.total_weight();
    if n == 0 || m <= 0.0 {
        return LouvainResult {
            partition: Partition::singletons(n),
            pass_modularity: Vec::new(),
        };
    }

    // Working multigraph: symmetrized adjacency plus per-node self-loop weight.
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut self_w = vec![0.0; n];
    for &(s, t, w) in g.edges() {
        if s == t {
            self_w[s.0] += w;
        } else {
            adj[s.0].push((t.0, w));
            adj[t.0].push((s.0, w));
        }
    }

    // node_map[i] = super node of original node i in the current hierarchy.
    let mut node_map: Vec<usize> = (0..n).collect();
    let mut pass_modularity = Vec::new();

    loop {
        let (local, moved) = one_level(&adj, &self_w, m, resolution, rng);

        // Flatten original nodes through this level, then renumber community
        // labels densely by first appearance over original nodes.
        for c in node_map.iter_mut() {
            *c = local[*c];
        }
        let mut dense_of_raw: HashMap<usize, usize> = HashMap::new();
        for &raw in node_map.iter() {
            let next = dense_of_raw.len();
            dense_of_raw.entry(raw).or_insert(next);
        }
        for c in node_map.iter_mut() {
            *c = dense_of_raw[c];
        }
        let partition = Partition::from_assignment(&node_map);
        pass_modularity.push(modularity(g, &partition));

        if !moved {
            return LouvainResult {
                partition,
                pass_modularity,
            };
        }

        // Aggregate communities into super nodes. Every community holds at
        // least one original node, so dense_of_raw covers all of them.
        let c = partition.community_count();
        let mut new_adj: Vec<HashMap<usize, f64>> = vec![HashMap::new(); c];
        let mut new_self = vec![0.0; c];
        for (u, neigh) in adj.iter().enumerate() {
            let cu = dense_of_raw[&local[u]];
            for &(v, w) in neigh {
                if u < v {
                    let cv = dense_of_raw[&local[v]];
                    if cu == cv {
                        new_self[cu] += w;
                    } else {
                        *new_adj[cu].entry(cv).or_insert(0.0) += w;
                        *new_adj[cv].entry(cu).or_insert(0.0) += w;
                    }
                }
            }
        }
        for (u, &w) in self_w.iter().enumerate() {
            new_self[dense_of_raw[&local[u]]] += w;
        }

        adj = new_adj
            .into_iter()
            .map(|map| {
                let mut v: Vec<(usize, f64)> = map.into_iter().collect();
                v.sort_by_key(|&(nb, _)| nb);
                v
            })
            .collect();
        self_w = new_self;
    }
}

/// One local-moving phase. Returns the node->community labels and whether any
/// move was accepted.
fn one_level<R: Rng>(
    adj: &[Vec<(usize, f64)>],
    self_w: &[f64],
    m: f64,
    resolution: f64,
    rng: &mut R,
) -> (Vec<usize>, bool) {
    let n = adj.len();
    let strength: Vec<f64> = (0..n)
        .map(|u| adj[u].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self_w[u])
        .collect();
    let mut comm: Vec<usize> = (0..n).collect();
    let mut comm_tot = strength.clone();

    let mut neighbor_w = vec![0.0; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut order: Vec<usize> = (0..n).collect();
    let two_m2 = 2.0 * m * m;
    let mut any_move = false;

    loop {
        let mut moves = 0usize;
        order.shuffle(rng);
        for &u in &order {
            let cu = comm[u];
            let k_u = strength[u];

            for &(v, w) in &adj[u] {
                let cv = comm[v];
                if neighbor_w[cv] == 0.0 && !touched.contains(&cv) {
                    touched.push(cv);
                }
                neighbor_w[cv] += w;
            }

            comm_tot[cu] -= k_u;
            let stay_gain = neighbor_w[cu] / m - resolution * k_u * comm_tot[cu] / two_m2;
            let mut best_comm = cu;
            let mut best_gain = stay_gain;
            for &c in &touched {
                if c == cu {
                    continue;
                }
                let gain = neighbor_w[c] / m - resolution * k_u * comm_tot[c] / two_m2;
                if gain > best_gain + 1e-9 {
                    best_gain = gain;
                    best_comm = c;
                }
            }
            comm_tot[best_comm] += k_u;
            if best_comm != cu {
                comm[u] = best_comm;
                moves += 1;
            }

            for &c in &touched {
                neighbor_w[c] = 0.0;
            }
            touched.clear();
        }
        if moves == 0 {
            break;
        }
        any_move = true;
    }
    (comm, any_move)
}

/// Asynchronous weighted-majority label propagation; ties go to the smallest
/// label. Stops when a full round changes nothing or after `max_rounds`.
pub fn label_propagation<R: Rng>(g: &HomoGraph, max_rounds: usize, rng: &mut R) -> Partition {
    let n = g.node_count();
    let mut labels: Vec<usize> = (0..n).collect();
    let mut order: Vec<usize> = (0..n).collect();

    for _ in 0..max_rounds {
        order.shuffle(rng);
        let mut changed = false;
        for &u in &order {
            let mut weight_of: HashMap<usize, f64> = HashMap::new();
            for &(v, w) in g.neighbors(NodeId(u)) {
                if w > 0.0 {
                    *weight_of.entry(labels[v]).or_insert(0.0) += w;
                }
            }
            let mut best: Option<(f64, usize)> = None;
            for (&label, &w) in &weight_of {
                let better = match best {
                    None => true,
                    Some((bw, bl)) => w > bw || (w == bw && label < bl),
                };
                if better {
                    best = Some((w, label));
                }
            }
            if let Some((_, label)) = best {
                if label != labels[u] {
                    labels[u] = label;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    Partition::from_assignment(&labels)
}

/// Reads a `node_id<TAB>community_id` file covering every graph node exactly
/// once. Community ids are renumbered densely, grouping preserved.
pub fn import_partition(path: &Path, g: &HeteroGraph) -> Result<Partition> {
    let content = std::fs::read_to_string(path)?;
    let mut labels: Vec<Option<usize>> = vec![None; g.node_count()];
    let mut label_ids: HashMap<String, usize> = HashMap::new();
    for (ln, line) in data_lines(&content) {
        let mut it = line.split('\t');
        let node = it.next().unwrap_or("");
        let community = it.next().ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line: ln,
            message: "expected node_id<TAB>community_id".into(),
        })?;
        let id = g.node_id(node).ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line: ln,
            message: format!("unknown node '{node}'"),
        })?;
        if labels[id.0].is_some() {
            return Err(Error::PartitionDuplicateNode(node.to_string()));
        }
        let next = label_ids.len();
        let lab = *label_ids.entry(community.to_string()).or_insert(next);
        labels[id.0] = Some(lab);
    }
    let missing: Vec<&str> = (0..g.node_count())
        .filter(|&i| labels[i].is_none())
        .map(|i| g.node_name(NodeId(i)))
        .collect();
    if !missing.is_empty() {
        return Err(Error::PartitionMissingNodes(missing.join(", ")));
    }
    let raw: Vec<usize> = labels.into_iter().map(|l| l.unwrap()).collect();
    Ok(Partition::from_assignment(&raw))
}

/// Writes `node_id<TAB>community_id` lines in node-index order.
pub fn export_partition(p: &Partition, g: &HeteroGraph, path: &Path) -> Result<()> {
    let mut out = String::new();
    for i in 0..g.node_count() {
        writeln!(out, "{}\t{}", g.node_name(NodeId(i)), p.community_of(NodeId(i)))
            .expect("string write");
    }
    std::fs::write(path, out)?;
    Ok(())
}
