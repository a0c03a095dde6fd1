//! Heterogeneous graph model: typed nodes and edges, edge-type registry,
//! dependency sets, and ETUD-weighted projection to a homogeneous graph.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Index of a registered node type (registration order).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeTypeId(pub usize);

/// Index of a registered edge type (registration order).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeTypeId(pub usize);

/// Dense internal node index. External string ids map to these on load.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

#[derive(Clone, Debug)]
pub struct NodeType {
    pub id: NodeTypeId,
    pub name: String,
}

#[derive(Clone, Debug)]
pub struct EdgeType {
    pub id: EdgeTypeId,
    pub name: String,
    pub start: NodeTypeId,
    pub end: NodeTypeId,
}

/// Registry of node and edge types. Node type names are unique; edge types
/// are unique per (name, start, end) triple. Registration is idempotent.
#[derive(Clone, Debug, Default)]
pub struct TypeRegistry {
    node_types: Vec<NodeType>,
    edge_types: Vec<EdgeType>,
    node_by_name: HashMap<String, NodeTypeId>,
    edge_by_key: HashMap<(String, NodeTypeId, NodeTypeId), EdgeTypeId>,
}

impl TypeRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a node type, returning the existing id if the name is known.
    pub fn register_node_type(&mut self, name: &str) -> Result<NodeTypeId> {
        if name.is_empty() {
            return Err(Error::EmptyTypeName);
        }
        if let Some(&id) = self.node_by_name.get(name) {
            return Ok(id);
        }
        let id = NodeTypeId(self.node_types.len());
        self.node_types.push(NodeType {
            id,
            name: name.to_string(),
        });
        self.node_by_name.insert(name.to_string(), id);
        Ok(id)
    }

    /// Registers an edge type, returning the existing id on a repeated
    /// (name, start, end) triple. Both endpoint types must exist.
    pub fn register_edge_type(
        &mut self,
        name: &str,
        start: NodeTypeId,
        end: NodeTypeId,
    ) -> Result<EdgeTypeId> {
        if name.is_empty() {
            return Err(Error::EmptyTypeName);
        }
        for t in [start, end] {
            if t.0 >= self.node_types.len() {
                return Err(Error::UnknownNodeType(format!("id {}", t.0)));
            }
        }
        let key = (name.to_string(), start, end);
        if let Some(&id) = self.edge_by_key.get(&key) {
            return Ok(id);
        }
        let id = EdgeTypeId(self.edge_types.len());
        self.edge_types.push(EdgeType {
            id,
            name: name.to_string(),
            start,
            end,
        });
        self.edge_by_key.insert(key, id);
        Ok(id)
    }

    pub fn node_type(&self, id: NodeTypeId) -> &NodeType {
        &self.node_types[id.0]
    }

    pub fn edge_type(&self, id: EdgeTypeId) -> &EdgeType {
        &self.edge_types[id.0]
    }

    pub fn node_type_by_name(&self, name: &str) -> Option<NodeTypeId> {
        self.node_by_name.get(name).copied()
    }

    pub fn node_types(&self) -> &[NodeType] {
        &self.node_types
    }

    pub fn edge_types(&self) -> &[EdgeType] {
        &self.edge_types
    }

    pub fn node_type_count(&self) -> usize {
        self.node_types.len()
    }

    pub fn edge_type_count(&self) -> usize {
        self.edge_types.len()
    }

    /// Groups edge types into dependency sets: two edge types sharing a start
    /// node type or an end node type belong to the same set, transitively.
    pub fn dependency_sets(&self) -> DependencySets {
        let n = self.edge_types.len();
        let mut uf = UnionFind::new(n);
        let mut by_start: HashMap<NodeTypeId, usize> = HashMap::new();
        let mut by_end: HashMap<NodeTypeId, usize> = HashMap::new();
        for (i, et) in self.edge_types.iter().enumerate() {
            match by_start.entry(et.start) {
                std::collections::hash_map::Entry::Occupied(e) => uf.union(*e.get(), i),
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(i);
                }
            }
            match by_end.entry(et.end) {
                std::collections::hash_map::Entry::Occupied(e) => uf.union(*e.get(), i),
                std::collections::hash_map::Entry::Vacant(e) => {
                    e.insert(i);
                }
            }
        }
        let mut members: HashMap<usize, Vec<EdgeTypeId>> = HashMap::new();
        for i in 0..n {
            members.entry(uf.find(i)).or_default().push(EdgeTypeId(i));
        }
        // Canonical order: sets sorted by their smallest member id.
        let mut sets: Vec<Vec<EdgeTypeId>> = members.into_values().collect();
        for s in &mut sets {
            s.sort();
        }
        sets.sort_by_key(|s| s[0]);
        let mut set_of = vec![0usize; n];
        for (si, s) in sets.iter().enumerate() {
            for &et in s {
                set_of[et.0] = si;
            }
        }
        DependencySets { sets, set_of }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            let root = self.find(self.parent[x]);
            self.parent[x] = root;
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }
}

/// Partition of all edge types into disjoint dependency groups.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DependencySets {
    sets: Vec<Vec<EdgeTypeId>>,
    set_of: Vec<usize>,
}

impl DependencySets {
    pub fn sets(&self) -> &[Vec<EdgeTypeId>] {
        &self.sets
    }

    pub fn set_index_of(&self, et: EdgeTypeId) -> usize {
        self.set_of[et.0]
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

/// A directed typed weighted edge.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub source: NodeId,
    pub target: NodeId,
    pub edge_type: EdgeTypeId,
    pub weight: f64,
}

/// Immutable heterogeneous graph. Built once via [`GraphBuilder`]; safe for
/// concurrent reads afterwards.
#[derive(Clone, Debug)]
pub struct HeteroGraph {
    registry: TypeRegistry,
    node_names: Vec<String>,
    node_index: HashMap<String, NodeId>,
    node_types: Vec<NodeTypeId>,
    edges: Vec<Edge>,
    out_edges: Vec<Vec<usize>>,
}

impl HeteroGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::new()
    }

    pub fn registry(&self) -> &TypeRegistry {
        &self.registry
    }

    pub fn node_count(&self) -> usize {
        self.node_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.node_index.get(name).copied()
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.node_names[id.0]
    }

    pub fn node_type(&self, id: NodeId) -> NodeTypeId {
        self.node_types[id.0]
    }

    /// Outgoing edge indices (into [`edges`](Self::edges)) for a node.
    pub fn out_edges(&self, id: NodeId) -> &[usize] {
        &self.out_edges[id.0]
    }

    /// All nodes of the given type, in index order.
    pub fn nodes_of_type(&self, t: NodeTypeId) -> Vec<NodeId> {
        (0..self.node_count())
            .filter(|&i| self.node_types[i] == t)
            .map(NodeId)
            .collect()
    }

    /// Projects to a homogeneous graph: each edge weight is multiplied by the
    /// ETUD weight of its edge type. Node set and edge count are unchanged.
    pub fn apply_etud(&self, etud: &Etud) -> Result<HomoGraph> {
        self.project(etud.weights())
    }

    /// Projection with an arbitrary per-edge-type weight vector (indexed by
    /// `EdgeTypeId`). The GA uses this with raw, unnormalized genes.
    pub fn project(&self, weights: &[f64]) -> Result<HomoGraph> {
        if weights.len() < self.registry.edge_type_count() {
            let missing = &self.registry.edge_types()[weights.len()];
            return Err(Error::MissingEdgeTypeWeight(missing.name.clone()));
        }
        let edges: Vec<(NodeId, NodeId, f64)> = self
            .edges
            .iter()
            .map(|e| (e.source, e.target, e.weight * weights[e.edge_type.0]))
            .collect();
        Ok(HomoGraph::new(
            self.node_names.clone(),
            self.node_types.clone(),
            edges,
        ))
    }
}

/// Accumulates nodes and edges, validating type consistency on the fly.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    registry: TypeRegistry,
    node_names: Vec<String>,
    node_index: HashMap<String, NodeId>,
    node_types: Vec<NodeTypeId>,
    edges: Vec<Edge>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn registry(&self) -> &TypeRegistry {
        &self.registry
    }

    pub fn node_type(&mut self, name: &str) -> Result<NodeTypeId> {
        self.registry.register_node_type(name)
    }

    pub fn edge_type(&mut self, name: &str, start: NodeTypeId, end: NodeTypeId) -> Result<EdgeTypeId> {
        self.registry.register_edge_type(name, start, end)
    }

    pub fn node(&mut self, name: &str, node_type: NodeTypeId) -> Result<NodeId> {
        if let Some(&existing) = self.node_index.get(name) {
            if self.node_types[existing.0] != node_type {
                return Err(Error::DuplicateNode(name.to_string()));
            }
            return Ok(existing);
        }
        if node_type.0 >= self.registry.node_type_count() {
            return Err(Error::UnknownNodeType(format!("id {}", node_type.0)));
        }
        let id = NodeId(self.node_names.len());
        self.node_names.push(name.to_string());
        self.node_index.insert(name.to_string(), id);
        self.node_types.push(node_type);
        Ok(id)
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.node_index.get(name).copied()
    }

    pub fn edge(
        &mut self,
        source: NodeId,
        target: NodeId,
        edge_type: EdgeTypeId,
        weight: f64,
    ) -> Result<()> {
        let et = self.registry.edge_type(edge_type).clone();
        let (src_t, dst_t) = (self.node_types[source.0], self.node_types[target.0]);
        if src_t != et.start || dst_t != et.end {
            return Err(Error::EdgeTypeMismatch {
                src: self.node_names[source.0].clone(),
                dst: self.node_names[target.0].clone(),
                edge_type: et.name,
                expected_start: self.registry.node_type(et.start).name.clone(),
                expected_end: self.registry.node_type(et.end).name.clone(),
                actual_start: self.registry.node_type(src_t).name.clone(),
                actual_end: self.registry.node_type(dst_t).name.clone(),
            });
        }
        if weight < 0.0 || !weight.is_finite() {
            return Err(Error::NegativeWeight {
                src: self.node_names[source.0].clone(),
                dst: self.node_names[target.0].clone(),
                weight,
            });
        }
        self.edges.push(Edge {
            source,
            target,
            edge_type,
            weight,
        });
        Ok(())
    }

    pub fn build(self) -> HeteroGraph {
        let mut out_edges = vec![Vec::new(); self.node_names.len()];
        for (i, e) in self.edges.iter().enumerate() {
            out_edges[e.source.0].push(i);
        }
        HeteroGraph {
            registry: self.registry,
            node_names: self.node_names,
            node_index: self.node_index,
            node_types: self.node_types,
            edges: self.edges,
            out_edges,
        }
    }
}

/// Homogeneous projection of a heterogeneous graph: same node set, edges
/// carry a single weight. A symmetrized adjacency (each directed edge
/// traversable both ways) is prebuilt for walks and community detection.
#[derive(Clone, Debug)]
pub struct HomoGraph {
    node_names: Vec<String>,
    node_types: Vec<NodeTypeId>,
    edges: Vec<(NodeId, NodeId, f64)>,
    adj_offsets: Vec<usize>,
    adj: Vec<(usize, f64)>,
    node_strength: Vec<f64>,
}

impl HomoGraph {
    pub fn new(
        node_names: Vec<String>,
        node_types: Vec<NodeTypeId>,
        edges: Vec<(NodeId, NodeId, f64)>,
    ) -> Self {
        let n = node_names.len();
        let mut degree = vec![0usize; n];
        for &(s, t, _) in &edges {
            degree[s.0] += 1;
            degree[t.0] += 1;
        }
        let mut adj_offsets = Vec::with_capacity(n + 1);
        adj_offsets.push(0);
        for d in &degree {
            adj_offsets.push(adj_offsets.last().unwrap() + d);
        }
        let mut cursor = adj_offsets[..n].to_vec();
        let mut adj = vec![(0usize, 0.0); adj_offsets[n]];
        let mut node_strength = vec![0.0; n];
        for &(s, t, w) in &edges {
            adj[cursor[s.0]] = (t.0, w);
            cursor[s.0] += 1;
            adj[cursor[t.0]] = (s.0, w);
            cursor[t.0] += 1;
            node_strength[s.0] += w;
            node_strength[t.0] += w;
        }
        Self {
            node_names,
            node_types,
            edges,
            adj_offsets,
            adj,
            node_strength,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(NodeId, NodeId, f64)] {
        &self.edges
    }

    pub fn node_name(&self, id: NodeId) -> &str {
        &self.node_names[id.0]
    }

    pub fn node_type(&self, id: NodeId) -> NodeTypeId {
        self.node_types[id.0]
    }

    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.node_names
            .iter()
            .position(|n| n == name)
            .map(NodeId)
    }

    /// Symmetrized neighbors of a node: one entry per incident directed edge.
    pub fn neighbors(&self, id: NodeId) -> &[(usize, f64)] {
        &self.adj[self.adj_offsets[id.0]..self.adj_offsets[id.0 + 1]]
    }

    /// Total symmetrized incident weight of a node. Self-loops count twice.
    pub fn strength(&self, id: NodeId) -> f64 {
        self.node_strength[id.0]
    }

    /// Sum of all edge weights (each directed edge once).
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|&(_, _, w)| w).sum()
    }
}

/// Finalized per-edge-type usefulness weights, aligned to registry ids.
/// After [`crate::ga::finalize`], weights sum to 1 within each dependency set.
#[derive(Clone, Debug, PartialEq)]
pub struct Etud {
    weights: Vec<f64>,
}

impl Etud {
    pub fn from_weights(weights: Vec<f64>) -> Self {
        Self { weights }
    }

    /// Identity projection: weight 1 for every edge type.
    pub fn all_ones(edge_type_count: usize) -> Self {
        Self {
            weights: vec![1.0; edge_type_count],
        }
    }

    /// Builds an ETUD from (edge type name, weight) pairs resolved against a
    /// registry. Every registered edge type must have a weight.
    pub fn from_named(registry: &TypeRegistry, named: &[(String, f64)]) -> Result<Self> {
        let map: HashMap<&str, f64> = named.iter().map(|(n, w)| (n.as_str(), *w)).collect();
        let mut weights = Vec::with_capacity(registry.edge_type_count());
        for et in registry.edge_types() {
            match map.get(et.name.as_str()) {
                Some(&w) => weights.push(w),
                None => return Err(Error::MissingEdgeTypeWeight(et.name.clone())),
            }
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, et: EdgeTypeId) -> Option<f64> {
        self.weights.get(et.0).copied()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

// ---------------------------------------------------------------------------
// File formats. All files are UTF-8, TAB-separated, `#` starts a comment.
// ---------------------------------------------------------------------------

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

/// Iterates non-comment, non-blank lines of a file with 1-based line numbers.
pub(crate) fn data_lines(content: &str) -> impl Iterator<Item = (usize, &str)> {
    content
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

/// Loads a graph from a node file (`node_id<TAB>node_type_name`) and an edge
/// file (`source<TAB>target<TAB>edge_type_name[<TAB>weight]`). Edge-type
/// endpoint types are inferred from the referenced nodes on first sight and
/// enforced thereafter.
pub fn load_graph(nodes_path: &Path, edges_path: &Path) -> Result<HeteroGraph> {
    let mut b = GraphBuilder::new();

    let nodes = std::fs::read_to_string(nodes_path)?;
    for (ln, line) in data_lines(&nodes) {
        let mut it = line.split('\t');
        let id = it
            .next()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| parse_err(nodes_path, ln, "missing node id"))?;
        let type_name = it
            .next()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| parse_err(nodes_path, ln, "missing node type"))?;
        if b.node_id(id).is_some() {
            return Err(parse_err(nodes_path, ln, format!("duplicate node id '{id}'")));
        }
        let t = b.node_type(type_name)?;
        b.node(id, t)?;
    }

    let edges = std::fs::read_to_string(edges_path)?;
    let mut type_by_name: HashMap<String, EdgeTypeId> = HashMap::new();
    for (ln, line) in data_lines(&edges) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 3 {
            return Err(parse_err(
                edges_path,
                ln,
                "expected source<TAB>target<TAB>edge_type[<TAB>weight]",
            ));
        }
        let src = b
            .node_id(fields[0])
            .ok_or_else(|| parse_err(edges_path, ln, format!("unknown node '{}'", fields[0])))?;
        let dst = b
            .node_id(fields[1])
            .ok_or_else(|| parse_err(edges_path, ln, format!("unknown node '{}'", fields[1])))?;
        let type_name = fields[2];
        if type_name.is_empty() {
            return Err(parse_err(edges_path, ln, "empty edge type name"));
        }
        let weight = match fields.get(3) {
            Some(s) => s
                .parse::<f64>()
                .map_err(|e| parse_err(edges_path, ln, format!("bad weight '{s}': {e}")))?,
            None => 1.0,
        };
        let et = match type_by_name.get(type_name) {
            Some(&et) => et,
            None => {
                let (st, en) = (b.node_types[src.0], b.node_types[dst.0]);
                let et = b.edge_type(type_name, st, en)?;
                type_by_name.insert(type_name.to_string(), et);
                et
            }
        };
        b.edge(src, dst, et, weight)
            .map_err(|e| parse_err(edges_path, ln, e.to_string()))?;
    }

    Ok(b.build())
}

/// Writes a graph back out in the same node/edge file formats.
pub fn save_graph(g: &HeteroGraph, nodes_path: &Path, edges_path: &Path) -> Result<()> {
    let mut nodes = String::new();
    for i in 0..g.node_count() {
        let id = NodeId(i);
        writeln!(
            nodes,
            "{}\t{}",
            g.node_name(id),
            g.registry().node_type(g.node_type(id)).name
        )
        .expect("string write");
    }
    std::fs::write(nodes_path, nodes)?;

    let mut edges = String::new();
    for e in g.edges() {
        writeln!(
            edges,
            "{}\t{}\t{}\t{}",
            g.node_name(e.source),
            g.node_name(e.target),
            g.registry().edge_type(e.edge_type).name,
            e.weight
        )
        .expect("string write");
    }
    std::fs::write(edges_path, edges)?;
    Ok(())
}

/// Loads an ETUD file (`edge_type_name<TAB>weight` lines) as named pairs.
pub fn load_etud(path: &Path) -> Result<Vec<(String, f64)>> {
    let content = std::fs::read_to_string(path)?;
    let mut seen: HashMap<String, usize> = HashMap::new();
    let mut out = Vec::new();
    for (ln, line) in data_lines(&content) {
        let mut it = line.split('\t');
        let name = it
            .next()
            .filter(|s| !s.is_empty())
            .ok_or_else(|| parse_err(path, ln, "missing edge type name"))?;
        let weight: f64 = it
            .next()
            .ok_or_else(|| parse_err(path, ln, "missing weight"))?
            .parse()
            .map_err(|e| parse_err(path, ln, format!("bad weight: {e}")))?;
        if let Some(prev) = seen.insert(name.to_string(), ln) {
            return Err(parse_err(
                path,
                ln,
                format!("edge type '{name}' already defined on line {prev}"),
            ));
        }
        out.push((name.to_string(), weight));
    }
    Ok(out)
}

/// Writes finalized ETUD weights as `edge_type_name<TAB>weight` lines, in
/// edge-type registration order. Fails if two edge types share a name, since
/// the file format identifies types by name alone.
pub fn save_etud(registry: &TypeRegistry, etud: &Etud, path: &Path) -> Result<()> {
    let mut seen: HashMap<&str, ()> = HashMap::new();
    let mut out = String::new();
    for et in registry.edge_types() {
        if seen.insert(&et.name, ()).is_some() {
            return Err(Error::AmbiguousEdgeTypeName(et.name.clone()));
        }
        let w = etud
            .weight(et.id)
            .ok_or_else(|| Error::MissingEdgeTypeWeight(et.name.clone()))?;
        writeln!(out, "{}\t{}", et.name, w).expect("string write");
    }
    std::fs::write(path, out)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_type_builder() -> (GraphBuilder, NodeTypeId, NodeTypeId) {
        let mut b = GraphBuilder::new();
        let user = b.node_type("user").unwrap();
        let song = b.node_type("song").unwrap();
        (b, user, song)
    }

    #[test]
    fn node_type_registration_is_idempotent_and_ordered() {
        let mut r = TypeRegistry::new();
        let a = r.register_node_type("user").unwrap();
        let b = r.register_node_type("song").unwrap();
        let a2 = r.register_node_type("user").unwrap();
        assert_eq!(a, a2);
        assert_eq!(a, NodeTypeId(0));
        assert_eq!(b, NodeTypeId(1));
    }

    #[test]
    fn six_node_types_get_six_distinct_ids() {
        let mut r = TypeRegistry::new();
        let names = ["song", "user", "genre", "playlist", "artist", "album"];
        let ids: Vec<_> = names
            .iter()
            .map(|n| r.register_node_type(n).unwrap())
            .collect();
        for (i, id) in ids.iter().enumerate() {
            assert_eq!(id.0, i);
        }
        assert_eq!(r.node_type_count(), 6);
    }

    #[test]
    fn empty_type_name_rejected() {
        let mut r = TypeRegistry::new();
        assert!(r.register_node_type("").is_err());
    }

    #[test]
    fn edge_type_unique_per_triple() {
        let mut r = TypeRegistry::new();
        let user = r.register_node_type("user").unwrap();
        let song = r.register_node_type("song").unwrap();
        let artist = r.register_node_type("artist").unwrap();
        let plays = r.register_edge_type("plays", user, song).unwrap();
        assert_eq!(plays, EdgeTypeId(0));
        // Same name, different endpoints: a distinct type.
        let plays_artist = r.register_edge_type("plays", user, artist).unwrap();
        assert_ne!(plays, plays_artist);
        // Exact repeat is idempotent.
        assert_eq!(r.register_edge_type("plays", user, song).unwrap(), plays);
        assert_eq!(r.edge_type_count(), 2);
    }

    #[test]
    fn sixteen_edge_rows_get_sixteen_ids() {
        let mut r = TypeRegistry::new();
        let user = r.register_node_type("user").unwrap();
        let song = r.register_node_type("song").unwrap();
        let playlist = r.register_node_type("playlist").unwrap();
        let album = r.register_node_type("album").unwrap();
        let artist = r.register_node_type("artist").unwrap();
        let genre = r.register_node_type("genre").unwrap();
        let rows = [
            ("plays", user, song),
            ("includes", playlist, song),
            ("plays", user, artist),
            ("bookmarks", user, song),
            ("comments", user, song),
            ("bookmarks", user, album),
            ("comments", user, album),
            ("performsIn", artist, song),
            ("makes", user, playlist),
            ("include", album, song),
            ("comment", user, artist),
            ("performsIn", artist, album),
            ("categorizedAs", album, genre),
            ("bookmark", user, playlist),
            ("categorizedAs", artist, genre),
            ("comment", user, playlist),
        ];
        let ids: Vec<_> = rows
            .iter()
            .map(|&(n, s, e)| r.register_edge_type(n, s, e).unwrap())
            .collect();
        let mut distinct = ids.clone();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 16);
    }

    #[test]
    fn edge_type_unknown_endpoint_rejected() {
        let mut r = TypeRegistry::new();
        let user = r.register_node_type("user").unwrap();
        let err = r.register_edge_type("plays", user, NodeTypeId(9)).unwrap_err();
        assert!(err.to_string().contains("unknown node type"));
    }

    #[test]
    fn dependency_sets_merge_on_shared_endpoint() {
        let mut r = TypeRegistry::new();
        let user = r.register_node_type("user").unwrap();
        let song = r.register_node_type("song").unwrap();
        let artist = r.register_node_type("artist").unwrap();
        let album = r.register_node_type("album").unwrap();
        // All four share end type song: one set by transitive closure.
        r.register_edge_type("performsIn", artist, song).unwrap();
        r.register_edge_type("includes", album, song).unwrap();
        r.register_edge_type("plays", user, song).unwrap();
        r.register_edge_type("bookmarks", user, song).unwrap();
        let deps = r.dependency_sets();
        assert_eq!(deps.len(), 1);
        assert_eq!(deps.sets()[0].len(), 4);
    }

    #[test]
    fn dependency_sets_disjoint_types_stay_apart() {
        let mut r = TypeRegistry::new();
        let user = r.register_node_type("user").unwrap();
        let song = r.register_node_type("song").unwrap();
        let artist = r.register_node_type("artist").unwrap();
        r.register_edge_type("performsIn", artist, song).unwrap();
        r.register_edge_type("plays", user, artist).unwrap();
        let deps = r.dependency_sets();
        assert_eq!(deps.len(), 2);
        assert!(deps.sets().iter().all(|s| s.len() == 1));
    }

    #[test]
    fn dependency_sets_two_pair_example() {
        // performsIn: artist->song, includes: album->song share the end type;
        // plays/bookmarks: user->song would too, so use the user->artist and
        // user->album variants to get the two-set split.
        let mut r = TypeRegistry::new();
        let user = r.register_node_type("user").unwrap();
        let song = r.register_node_type("song").unwrap();
        let artist = r.register_node_type("artist").unwrap();
        let album = r.register_node_type("album").unwrap();
        let a = r.register_edge_type("performsIn", artist, song).unwrap();
        let b = r.register_edge_type("includes", album, song).unwrap();
        let c = r.register_edge_type("plays", user, artist).unwrap();
        let d = r.register_edge_type("bookmarks", user, album).unwrap();
        let deps = r.dependency_sets();
        assert_eq!(deps.len(), 2);
        assert_eq!(deps.set_index_of(a), deps.set_index_of(b));
        assert_eq!(deps.set_index_of(c), deps.set_index_of(d));
        assert_ne!(deps.set_index_of(a), deps.set_index_of(c));
    }

    #[test]
    fn dependency_sets_form_a_partition() {
        let mut r = TypeRegistry::new();
        let types: Vec<_> = ["a", "b", "c", "d"]
            .iter()
            .map(|n| r.register_node_type(n).unwrap())
            .collect();
        for (i, &s) in types.iter().enumerate() {
            for (j, &e) in types.iter().enumerate() {
                if i != j {
                    r.register_edge_type(&format!("t{i}{j}"), s, e).unwrap();
                }
            }
        }
        let deps = r.dependency_sets();
        let mut all: Vec<_> = deps.sets().iter().flatten().copied().collect();
        all.sort();
        let expected: Vec<_> = (0..r.edge_type_count()).map(EdgeTypeId).collect();
        assert_eq!(all, expected);
    }

    #[test]
    fn builder_rejects_type_mismatched_edge() {
        let (mut b, user, song) = two_type_builder();
        let plays = b.edge_type("plays", user, song).unwrap();
        let u = b.node("u1", user).unwrap();
        let u2 = b.node("u2", user).unwrap();
        let err = b.edge(u, u2, plays, 1.0).unwrap_err();
        assert!(matches!(err, Error::EdgeTypeMismatch { .. }));
    }

    #[test]
    fn builder_rejects_negative_weight() {
        let (mut b, user, song) = two_type_builder();
        let plays = b.edge_type("plays", user, song).unwrap();
        let u = b.node("u1", user).unwrap();
        let s = b.node("s1", song).unwrap();
        assert!(b.edge(u, s, plays, -0.5).is_err());
    }

    fn small_graph() -> HeteroGraph {
        let (mut b, user, song) = two_type_builder();
        let plays = b.edge_type("plays", user, song).unwrap();
        let bookmarks = b.edge_type("bookmarks", user, song).unwrap();
        let u = b.node("u1", user).unwrap();
        let s1 = b.node("s1", song).unwrap();
        let s2 = b.node("s2", song).unwrap();
        b.edge(u, s1, plays, 2.0).unwrap();
        b.edge(u, s2, plays, 1.0).unwrap();
        b.edge(u, s2, bookmarks, 4.0).unwrap();
        b.build()
    }

    #[test]
    fn apply_etud_identity_preserves_weights() {
        let g = small_graph();
        let h = g
            .apply_etud(&Etud::all_ones(g.registry().edge_type_count()))
            .unwrap();
        assert_eq!(h.edge_count(), g.edge_count());
        for (he, ge) in h.edges().iter().zip(g.edges()) {
            assert_eq!(he.2.to_bits(), ge.weight.to_bits());
        }
    }

    #[test]
    fn apply_etud_multiplies_weights() {
        let g = small_graph();
        let h = g.apply_etud(&Etud::from_weights(vec![0.5, 0.0])).unwrap();
        assert_eq!(h.edges()[0].2, 1.0); // 2.0 * 0.5
        assert_eq!(h.edges()[1].2, 0.5);
        assert_eq!(h.edges()[2].2, 0.0); // annihilated but retained
        assert_eq!(h.edge_count(), 3);
    }

    #[test]
    fn apply_etud_missing_weight_names_type() {
        let g = small_graph();
        let err = g.apply_etud(&Etud::from_weights(vec![0.5])).unwrap_err();
        assert!(err.to_string().contains("bookmarks"));
    }

    #[test]
    fn homograph_symmetrized_adjacency() {
        let g = small_graph();
        let h = g
            .apply_etud(&Etud::all_ones(g.registry().edge_type_count()))
            .unwrap();
        let u = h.node_id("u1").unwrap();
        let s2 = h.node_id("s2").unwrap();
        // u1 sees all three edges; s2 sees plays(1.0) and bookmarks(4.0).
        assert_eq!(h.neighbors(u).len(), 3);
        assert_eq!(h.neighbors(s2).len(), 2);
        assert_eq!(h.strength(s2), 5.0);
        assert_eq!(h.strength(u), 7.0);
    }

    #[test]
    fn load_graph_single_node_no_edges() {
        let dir = tempfile::tempdir().unwrap();
        let nodes = dir.path().join("nodes.tsv");
        let edges = dir.path().join("edges.tsv");
        std::fs::write(&nodes, "n1\tuser\n").unwrap();
        std::fs::write(&edges, "# empty\n").unwrap();
        let g = load_graph(&nodes, &edges).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn load_graph_keeps_edge_order_and_default_weight() {
        let dir = tempfile::tempdir().unwrap();
        let nodes = dir.path().join("nodes.tsv");
        let edges = dir.path().join("edges.tsv");
        std::fs::write(&nodes, "u1\tuser\ns1\tsong\ns2\tsong\n").unwrap();
        std::fs::write(
            &edges,
            "u1\ts1\tplays\t2.5\nu1\ts2\tplays\nu1\ts1\tbookmarks\t3\n",
        )
        .unwrap();
        let g = load_graph(&nodes, &edges).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.edges()[0].weight, 2.5);
        assert_eq!(g.edges()[1].weight, 1.0);
        assert_eq!(g.edges()[2].weight, 3.0);
    }

    #[test]
    fn load_graph_reports_line_numbers() {
        let dir = tempfile::tempdir().unwrap();
        let nodes = dir.path().join("nodes.tsv");
        let edges = dir.path().join("edges.tsv");
        std::fs::write(&nodes, "u1\tuser\ns1\tsong\n").unwrap();
        std::fs::write(&edges, "u1\ts1\tplays\n\nu1\tmissing\tplays\n").unwrap();
        let err = load_graph(&nodes, &edges).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(":3:"), "got: {msg}");
        assert!(msg.contains("missing"));
    }

    #[test]
    fn load_graph_enforces_inferred_edge_types() {
        let dir = tempfile::tempdir().unwrap();
        let nodes = dir.path().join("nodes.tsv");
        let edges = dir.path().join("edges.tsv");
        std::fs::write(&nodes, "u1\tuser\ns1\tsong\na1\tartist\n").unwrap();
        // "plays" is fixed as user->song by line 1; line 2 violates it.
        std::fs::write(&edges, "u1\ts1\tplays\nu1\ta1\tplays\n").unwrap();
        let err = load_graph(&nodes, &edges).unwrap_err();
        assert!(err.to_string().contains(":2:"));
    }

    #[test]
    fn graph_save_load_round_trip() {
        let g = small_graph();
        let dir = tempfile::tempdir().unwrap();
        let nodes = dir.path().join("nodes.tsv");
        let edges = dir.path().join("edges.tsv");
        save_graph(&g, &nodes, &edges).unwrap();
        let g2 = load_graph(&nodes, &edges).unwrap();
        assert_eq!(g.node_count(), g2.node_count());
        assert_eq!(g.edge_count(), g2.edge_count());
        for i in 0..g.node_count() {
            let id = NodeId(i);
            assert_eq!(g.node_name(id), g2.node_name(id));
            assert_eq!(
                g.registry().node_type(g.node_type(id)).name,
                g2.registry().node_type(g2.node_type(id)).name
            );
        }
        for (a, b) in g.edges().iter().zip(g2.edges()) {
            assert_eq!(a.source, b.source);
            assert_eq!(a.target, b.target);
            assert_eq!(a.weight.to_bits(), b.weight.to_bits());
            assert_eq!(
                g.registry().edge_type(a.edge_type).name,
                g2.registry().edge_type(b.edge_type).name
            );
        }
    }

    #[test]
    fn etud_file_round_trip_and_resolution() {
        let g = small_graph();
        let etud = Etud::from_weights(vec![0.25, 0.75]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("etud.tsv");
        save_etud(g.registry(), &etud, &path).unwrap();
        let named = load_etud(&path).unwrap();
        let resolved = Etud::from_named(g.registry(), &named).unwrap();
        assert_eq!(resolved, etud);
    }

    #[test]
    fn etud_resolution_missing_type_errors() {
        let g = small_graph();
        let named = vec![("plays".to_string(), 1.0)];
        let err = Etud::from_named(g.registry(), &named).unwrap_err();
        assert!(err.to_string().contains("bookmarks"));
    }
}
