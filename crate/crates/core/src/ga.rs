//! Genetic algorithm that learns the edge-type usefulness distribution:
//! population management, PPR+NDCG fitness with softmax normalization,
//! bootstrap selection, per-gene crossover and mutation, elitist evolution,
//! and dependency-set normalization of the final chromosome.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hetnet::{DependencySets, Etud, HeteroGraph, NodeId};
use crate::metrics::{ndcg_at_k, ListeningHistory};
use crate::ppr::{personalized_pagerank, rank_by_score, PprConfig};

/// One candidate ETUD: usefulness weight in [0,1] per registered edge type.
#[derive(Clone, Debug, PartialEq)]
pub struct Chromosome {
    genes: Vec<f64>,
}

impl Chromosome {
    pub fn from_genes(genes: Vec<f64>) -> Self {
        Self { genes }
    }

    pub fn genes(&self) -> &[f64] {
        &self.genes
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.genes.len() == other.genes.len()
            && self
                .genes
                .iter()
                .zip(&other.genes)
                .all(|(a, b)| (a - b).abs() <= tol)
    }
}

#[derive(Clone, Debug)]
pub struct Population {
    members: Vec<Chromosome>,
    generation: usize,
}

impl Population {
    pub fn members(&self) -> &[Chromosome] {
        &self.members
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Softmax-normalized fitness plus the raw per-chromosome similarity sums
/// it was computed from. Fitness entries are strictly positive and sum to 1.
#[derive(Clone, Debug)]
pub struct FitnessVector {
    fitness: Vec<f64>,
    raw: Vec<f64>,
}

impl FitnessVector {
    pub fn fitness(&self) -> &[f64] {
        &self.fitness
    }

    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    /// Index of the fittest chromosome; ties go to the lowest index.
    pub fn best_index(&self) -> usize {
        let mut best = 0;
        for i in 1..self.fitness.len() {
            if self.fitness[i] > self.fitness[best] {
                best = i;
            }
        }
        best
    }

    /// Softmax over raw similarity sums, stabilized by subtracting the max
    /// (which leaves the resulting distribution unchanged).
    pub fn from_raw(raw: Vec<f64>) -> Self {
        let max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = raw.iter().map(|&r| (r - max).exp()).collect();
        let total: f64 = exps.iter().sum();
        let fitness = exps.iter().map(|&e| e / total).collect();
        Self { fitness, raw }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct GaConfig {
    /// Population size P; must be even (selection output is paired).
    pub population: usize,
    /// Crossover threshold t_c: a gene crosses when its draw r >= t_c.
    pub crossover_threshold: f64,
    /// Mutation threshold t_m: per-gene mutation probability.
    pub mutation_threshold: f64,
    /// Stop after the best chromosome is unchanged this many generations.
    pub stable_generations: usize,
    /// NDCG cutoff used inside fitness.
    pub sim_k: usize,
    /// Hard cap on generations evaluated.
    pub max_generations: usize,
    /// Evaluate fitness on at most this many training users (sampled once
    /// per run, shared by every chromosome and generation).
    pub fitness_sample: Option<usize>,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 1000,
            crossover_threshold: 0.95,
            mutation_threshold: 0.1,
            stable_generations: 10,
            sim_k: 10,
            max_generations: 200,
            fitness_sample: None,
            seed: 42,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population < 2 || self.population % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "population must be even and >= 2, got {}",
                self.population
            )));
        }
        for (name, v) in [
            ("crossover_threshold", self.crossover_threshold),
            ("mutation_threshold", self.mutation_threshold),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be in [0,1], got {v}"
                )));
            }
        }
        if self.sim_k == 0 {
            return Err(Error::InvalidConfig("sim_k must be >= 1".into()));
        }
        if self.stable_generations == 0 {
            return Err(Error::InvalidConfig("stable_generations must be >= 1".into()));
        }
        if self.max_generations == 0 {
            return Err(Error::InvalidConfig("max_generations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Everything fitness needs to score one chromosome: the graph to project,
/// the training users to seed PPR at, the candidate songs to rank, and the
/// graded listening history to compare against.
pub struct RankingTask<'a> {
    pub graph: &'a HeteroGraph,
    pub train_users: Vec<NodeId>,
    pub songs: Vec<NodeId>,
    pub history: &'a ListeningHistory,
    pub ppr: PprConfig,
}

impl RankingTask<'_> {
    /// Sum over users of NDCG@k between the PPR song ranking under these
    /// raw genes and the user's graded history.
    pub fn raw_similarity(&self, genes: &[f64], users: &[NodeId], k: usize) -> Result<f64> {
        let projected = self.graph.project(genes)?;
        let mut total = 0.0;
        for &user in users {
            let Some(uh) = self.history.user(user) else {
                continue;
            };
            if uh.grades().is_empty() {
                continue;
            }
            let scores = personalized_pagerank(&projected, user, &self.ppr)?;
            let ranked = rank_by_score(&scores, &self.songs);
            total += ndcg_at_k(&ranked, uh.grades(), k);
        }
        Ok(total)
    }
}

/// P chromosomes with genes drawn i.i.d. uniform on [0,1].
pub fn init_population<R: Rng>(
    cfg: &GaConfig,
    num_edge_types: usize,
    rng: &mut R,
) -> Result<Population> {
    cfg.validate()?;
    if num_edge_types == 0 {
        return Err(Error::InvalidConfig("graph has no edge types".into()));
    }
    let members = (0..cfg.population)
        .map(|_| Chromosome {
            genes: (0..num_edge_types).map(|_| rng.random::<f64>()).collect(),
        })
        .collect();
    Ok(Population {
        members,
        generation: 0,
    })
}

/// Evaluates the whole population and softmax-normalizes the similarity sums.
/// Chromosomes with identical genes are evaluated once; evaluation runs in
/// parallel and is deterministic (no randomness, fixed reduction order).
pub fn fitness(
    pop: &Population,
    task: &RankingTask<'_>,
    users: &[NodeId],
    cfg: &GaConfig,
) -> Result<FitnessVector> {
    let mut first_of: std::collections::HashMap<Vec<u64>, usize> = std::collections::HashMap::new();
    let mut distinct: Vec<&Chromosome> = Vec::new();
    let mut slot: Vec<usize> = Vec::with_capacity(pop.len());
    for ch in pop.members() {
        let key: Vec<u64> = ch.genes.iter().map(|g| g.to_bits()).collect();
        let next = distinct.len();
        let idx = *first_of.entry(key).or_insert(next);
        if idx == distinct.len() {
            distinct.push(ch);
        }
        slot.push(idx);
    }

    let distinct_raw: Vec<Result<f64>> = distinct
        .par_iter()
        .map(|ch| task.raw_similarity(&ch.genes, users, cfg.sim_k))
        .collect();
    let mut resolved = Vec::with_capacity(distinct_raw.len());
    for r in distinct_raw {
        resolved.push(r?);
    }
    let raw: Vec<f64> = slot.iter().map(|&i| resolved[i]).collect();
    Ok(FitnessVector::from_raw(raw))
}

/// Bootstrap selection: P draws with replacement, probability proportional
/// to fitness. Output order is draw order; consecutive members pair up for
/// crossover.
pub fn select<R: Rng>(pop: &Population, fit: &FitnessVector, rng: &mut R) -> Population {
    let cumulative: Vec<f64> = fit
        .fitness()
        .iter()
        .scan(0.0, |acc, &f| {
            *acc += f;
            Some(*acc)
        })
        .collect();
    let members = (0..pop.len())
        .map(|_| {
            let x: f64 = rng.random();
            let idx = cumulative
                .partition_point(|&c| c <= x)
                .min(pop.len() - 1);
            pop.members[idx].clone()
        })
        .collect();
    Population {
        members,
        generation: pop.generation,
    }
}

/// Per-gene crossover: one draw r_j is shared by the pair; when r_j >= t_c
/// each offspring gene becomes its parent's share w_ij/(w_1j + w_2j),
/// otherwise genes pass through unchanged. A zero-sum gene pair stays zero.
pub fn crossover<R: Rng>(
    a: &Chromosome,
    b: &Chromosome,
    t_c: f64,
    rng: &mut R,
) -> (Chromosome, Chromosome) {
    debug_assert_eq!(a.len(), b.len());
    let mut ga = a.genes.clone();
    let mut gb = b.genes.clone();
    for j in 0..ga.len() {
        let r: f64 = rng.random();
        if r >= t_c {
            let sum = ga[j] + gb[j];
            if sum > 0.0 {
                ga[j] /= sum;
                gb[j] /= sum;
            }
        }
    }
    (Chromosome { genes: ga }, Chromosome { genes: gb })
}

/// Per-gene mutation with probability t_m: the crossover share formula is
/// applied against a fresh |N(0,1)| partner draw clamped to [1e-6, 1], and
/// the result is clamped back to the [0,1] gene domain.
pub fn mutate<R: Rng>(ch: &Chromosome, t_m: f64, rng: &mut R) -> Chromosome {
    let mut genes = ch.genes.clone();
    for g in genes.iter_mut() {
        let r: f64 = rng.random();
        if r >= 1.0 - t_m {
            let draw: f64 = StandardNormal.sample(rng);
            let partner = draw.clamp(1e-6, 1.0);
            *g = (*g / (*g + partner)).clamp(0.0, 1.0);
        }
    }
    Chromosome { genes }
}

/// Best chromosome of one generation, as logged by [`evolve`].
#[derive(Clone, Debug, Serialize)]
pub struct GenerationRecord {
    pub generation: usize,
    pub best_raw_similarity: f64,
    pub best_genes: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct EvolveResult {
    pub best: Chromosome,
    pub log: Vec<GenerationRecord>,
}

/// Runs the full evolution loop:
/// fitness -> record best -> select -> pair -> crossover -> mutate,
/// with the generation's best copied unmodified into slot 0 of the next
/// generation, until the best gene vector is unchanged (within 1e-12) for
/// `stable_generations` consecutive generations or `max_generations` is hit.
///
/// All randomness flows through `rng` in a fixed order: the optional fitness
/// subsample first, then init draws, then per generation the P selection
/// draws, per-pair crossover draws, and per-member mutation draws.
pub fn evolve<R: Rng>(
    task: &RankingTask<'_>,
    cfg: &GaConfig,
    rng: &mut R,
) -> Result<EvolveResult> {
    cfg.validate()?;
    task.ppr.validate()?;
    if task.train_users.is_empty() {
        return Err(Error::InvalidConfig("no training users".into()));
    }

    let users = match cfg.fitness_sample {
        Some(cap) if cap < task.train_users.len() => {
            let mut pool = task.train_users.clone();
            pool.sort();
            use rand::seq::SliceRandom;
            pool.shuffle(rng);
            let mut sample = pool[..cap].to_vec();
            sample.sort();
            sample
        }
        _ => {
            let mut all = task.train_users.clone();
            all.sort();
            all
        }
    };

    let num_edge_types = task.graph.registry().edge_type_count();
    let mut pop = init_population(cfg, num_edge_types, rng)?;
    let mut log = Vec::new();
    let mut prev_best: Option<Chromosome> = None;
    let mut stable = 0usize;

    loop {
        let fit = fitness(&pop, task, &users, cfg)?;
        let best_idx = fit.best_index();
        let best = pop.members[best_idx].clone();
        log.push(GenerationRecord {
            generation: pop.generation,
            best_raw_similarity: fit.raw()[best_idx],
            best_genes: best.genes.clone(),
        });

        match &prev_best {
            Some(prev) if prev.approx_eq(&best, 1e-12) => stable += 1,
            _ => stable = 0,
        }
        prev_best = Some(best.clone());

        if stable >= cfg.stable_generations || pop.generation + 1 >= cfg.max_generations {
            return Ok(EvolveResult { best, log });
        }

        let selected = select(&pop, &fit, rng);
        let mut next: Vec<Chromosome> = Vec::with_capacity(cfg.population);
        for pair in selected.members.chunks(2) {
            let (c1, c2) = crossover(&pair[0], &pair[1], cfg.crossover_threshold, rng);
            next.push(c1);
            next.push(c2);
        }
        for ch in next.iter_mut() {
            *ch = mutate(ch, cfg.mutation_threshold, rng);
        }
        // Elitism: the generation's best survives untouched in slot 0.
        next[0] = best;
        pop = Population {
            members: next,
            generation: pop.generation + 1,
        };
    }
}

/// Normalizes a chromosome within each dependency set so the weights of a
/// set sum to 1. An all-zero set falls back to uniform weights.
pub fn finalize(best: &Chromosome, deps: &DependencySets) -> Etud {
    let mut weights = best.genes.clone();
    for set in deps.sets() {
        let sum: f64 = set.iter().map(|&et| best.genes[et.0]).sum();
        if sum > 0.0 {
            for &et in set {
                weights[et.0] = best.genes[et.0] / sum;
            }
        } else {
            let uniform = 1.0 / set.len() as f64;
            for &et in set {
                weights[et.0] = uniform;
            }
        }
    }
    Etud::from_weights(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hetnet::{GraphBuilder, TypeRegistry};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(p: usize) -> GaConfig {
        GaConfig {
            population: p,
            ..Default::default()
        }
    }

    #[test]
    fn init_population_is_reproducible_and_in_range() {
        let c = cfg(2);
        let p1 = init_population(&c, 3, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        let p2 = init_population(&c, 3, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(p1.members(), p2.members());
        assert_eq!(p1.len(), 2);
        for ch in p1.members() {
            assert_eq!(ch.len(), 3);
            assert!(ch.genes().iter().all(|g| (0.0..=1.0).contains(g)));
        }
    }

    #[test]
    fn init_population_rejects_odd_or_tiny_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(init_population(&cfg(3), 2, &mut rng).is_err());
        assert!(init_population(&cfg(0), 2, &mut rng).is_err());
    }

    #[test]
    fn default_population_is_paper_scale() {
        assert_eq!(GaConfig::default().population, 1000);
        assert_eq!(GaConfig::default().crossover_threshold, 0.95);
        assert_eq!(GaConfig::default().mutation_threshold, 0.1);
        assert_eq!(GaConfig::default().stable_generations, 10);
        assert_eq!(GaConfig::default().sim_k, 10);
    }

    #[test]
    fn softmax_sums_to_one_and_is_positive() {
        let fv = FitnessVector::from_raw(vec![0.2, 1.5, -3.0, 0.2]);
        let total: f64 = fv.fitness().iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(fv.fitness().iter().all(|&f| f > 0.0));
    }

    #[test]
    fn softmax_identical_raw_gives_uniform() {
        let fv = FitnessVector::from_raw(vec![0.7, 0.7]);
        assert!((fv.fitness()[0] - 0.5).abs() < 1e-12);
        assert!((fv.fitness()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn softmax_shift_invariant_ordering() {
        let raw = vec![0.1, 0.9, 0.5];
        let a = FitnessVector::from_raw(raw.clone());
        let b = FitnessVector::from_raw(raw.iter().map(|r| r + 123.0).collect());
        assert_eq!(a.best_index(), b.best_index());
        let order = |fv: &FitnessVector| {
            let mut idx: Vec<usize> = (0..3).collect();
            idx.sort_by(|&i, &j| fv.fitness()[j].partial_cmp(&fv.fitness()[i]).unwrap());
            idx
        };
        assert_eq!(order(&a), order(&b));
    }

    #[test]
    fn crossover_below_threshold_is_identity() {
        let a = Chromosome::from_genes(vec![0.1, 0.9, 0.4]);
        let b = Chromosome::from_genes(vec![0.3, 0.2, 0.8]);
        // t_c = 1.0: r < 1 always, so no gene crosses.
        let (c1, c2) = crossover(&a, &b, 1.0, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(c1, a);
        assert_eq!(c2, b);
    }

    #[test]
    fn crossover_share_formula() {
        let a = Chromosome::from_genes(vec![0.2]);
        let b = Chromosome::from_genes(vec![0.2]);
        // t_c = 0: every gene crosses.
        let (c1, c2) = crossover(&a, &b, 0.0, &mut ChaCha8Rng::seed_from_u64(1));
        assert!((c1.genes()[0] - 0.5).abs() < 1e-15);
        assert!((c2.genes()[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn crossover_zero_sum_stays_zero() {
        let a = Chromosome::from_genes(vec![0.0]);
        let b = Chromosome::from_genes(vec![0.0]);
        let (c1, c2) = crossover(&a, &b, 0.0, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(c1.genes()[0], 0.0);
        assert_eq!(c2.genes()[0], 0.0);
    }

    #[test]
    fn crossover_keeps_genes_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..50 {
            let a = Chromosome::from_genes((0..6).map(|_| rng.random()).collect());
            let b = Chromosome::from_genes((0..6).map(|_| rng.random()).collect());
            let (c1, c2) = crossover(&a, &b, 0.5, &mut rng);
            for g in c1.genes().iter().chain(c2.genes()) {
                assert!((0.0..=1.0).contains(g));
            }
        }
    }

    #[test]
    fn mutate_zero_threshold_is_identity() {
        let ch = Chromosome::from_genes(vec![0.3, 0.6]);
        let out = mutate(&ch, 0.0, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(out, ch);
    }

    #[test]
    fn mutate_full_threshold_matches_scalar_oracle() {
        let ch = Chromosome::from_genes(vec![0.3, 0.6, 0.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let out = mutate(&ch, 1.0, &mut rng);
        // Scalar re-implementation with the same draw sequence.
        let mut oracle_rng = ChaCha8Rng::seed_from_u64(77);
        for (j, &g) in ch.genes().iter().enumerate() {
            let _r: f64 = oracle_rng.random();
            let x: f64 = StandardNormal.sample(&mut oracle_rng);
            let x = x.clamp(1e-6, 1.0);
            let expected = (g / (g + x)).clamp(0.0, 1.0);
            assert_eq!(out.genes()[j].to_bits(), expected.to_bits());
        }
        assert!(out.genes().iter().all(|g| (0.0..=1.0).contains(g)));
    }

    #[test]
    fn finalize_normalizes_within_sets() {
        let mut r = TypeRegistry::new();
        let user = r.register_node_type("user").unwrap();
        let song = r.register_node_type("song").unwrap();
        let artist = r.register_node_type("artist").unwrap();
        let album = r.register_node_type("album").unwrap();
        r.register_edge_type("plays", user, song).unwrap();
        r.register_edge_type("bookmarks", user, song).unwrap();
        r.register_edge_type("releases", artist, album).unwrap();
        let deps = r.dependency_sets();
        assert_eq!(deps.len(), 2);

        let etud = finalize(&Chromosome::from_genes(vec![0.2, 0.6, 0.7]), &deps);
        assert!((etud.weights()[0] - 0.25).abs() < 1e-12);
        assert!((etud.weights()[1] - 0.75).abs() < 1e-12);
        assert!((etud.weights()[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn finalize_equal_weights_split_evenly() {
        let mut r = TypeRegistry::new();
        let user = r.register_node_type("user").unwrap();
        let song = r.register_node_type("song").unwrap();
        r.register_edge_type("a", user, song).unwrap();
        r.register_edge_type("b", user, song).unwrap();
        let deps = r.dependency_sets();
        let etud = finalize(&Chromosome::from_genes(vec![0.3, 0.3]), &deps);
        assert_eq!(etud.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn finalize_zero_set_goes_uniform() {
        let mut r = TypeRegistry::new();
        let user = r.register_node_type("user").unwrap();
        let song = r.register_node_type("song").unwrap();
        r.register_edge_type("a", user, song).unwrap();
        r.register_edge_type("b", user, song).unwrap();
        let deps = r.dependency_sets();
        let etud = finalize(&Chromosome::from_genes(vec![0.0, 0.0]), &deps);
        assert_eq!(etud.weights(), &[0.5, 0.5]);
    }

    fn selection_counts(fitness: Vec<f64>, seeds: u64) -> Vec<usize> {
        let members: Vec<Chromosome> = (0..fitness.len())
            .map(|i| Chromosome::from_genes(vec![i as f64]))
            .collect();
        let pop = Population {
            members,
            generation: 0,
        };
        let fv = FitnessVector {
            raw: fitness.clone(),
            fitness,
        };
        let mut counts = vec![0usize; pop.len()];
        for seed in 0..seeds {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = select(&pop, &fv, &mut rng);
            assert_eq!(out.len(), pop.len());
            for ch in out.members() {
                counts[ch.genes()[0] as usize] += 1;
            }
        }
        counts
    }

    #[test]
    fn select_concentrated_fitness_dominates() {
        // Fitness (0.998, 0.001, 0.001): expected copies of member 0 over
        // 200 seeded draws of 4 = 200*4*0.998 = 798.4, sigma ~ 0.9.
        let counts = selection_counts(vec![0.998, 0.001, 0.001, 0.0], 200);
        let total: f64 = 200.0 * 4.0;
        let expected = total * 0.998;
        let sigma = (total * 0.998 * 0.002).sqrt();
        assert!(
            (counts[0] as f64 - expected).abs() <= 3.0 * sigma,
            "got {} expected {expected} sigma {sigma}",
            counts[0]
        );
    }

    #[test]
    fn select_uniform_fitness_is_balanced() {
        let counts = selection_counts(vec![0.25; 4], 200);
        let total: f64 = 200.0 * 4.0;
        let expected = total * 0.25;
        let sigma = (total * 0.25 * 0.75).sqrt();
        for &c in &counts {
            assert!((c as f64 - expected).abs() <= 3.0 * sigma, "counts {counts:?}");
        }
    }

    /// A two-edge-type graph where "signal" edges connect each user to their
    /// own songs and "noise" edges connect them to other users' songs.
    fn planted_task() -> (HeteroGraph, ListeningHistory, Vec<NodeId>, Vec<NodeId>) {
        let mut b = GraphBuilder::new();
        let user_t = b.node_type("user").unwrap();
        let song_t = b.node_type("song").unwrap();
        let signal = b.edge_type("signal", user_t, song_t).unwrap();
        let noise = b.edge_type("noise", user_t, song_t).unwrap();
        let users: Vec<NodeId> = (0..4)
            .map(|i| b.node(&format!("u{i}"), user_t).unwrap())
            .collect();
        let songs: Vec<NodeId> = (0..12)
            .map(|i| b.node(&format!("s{i}"), song_t).unwrap())
            .collect();
        let mut plays = Vec::new();
        for (ui, &u) in users.iter().enumerate() {
            for k in 0..3 {
                let s = songs[ui * 3 + k];
                b.edge(u, s, signal, 1.0).unwrap();
                plays.push((u, s, (k + 1) as u32));
            }
            // Noise points at a different user's songs.
            let other = (ui + 1) % 4;
            for k in 0..3 {
                b.edge(u, songs[other * 3 + k], noise, 1.0).unwrap();
            }
        }
        let g = b.build();
        let history = ListeningHistory::from_counts(plays);
        (g, history, users, songs)
    }

    #[test]
    fn fitness_identical_genes_split_evenly_and_signal_wins() {
        let (g, history, users, songs) = planted_task();
        let task = RankingTask {
            graph: &g,
            train_users: users.clone(),
            songs,
            history: &history,
            ppr: PprConfig::default(),
        };
        let c = GaConfig {
            population: 2,
            ..Default::default()
        };

        let twin = Population {
            members: vec![
                Chromosome::from_genes(vec![0.4, 0.4]),
                Chromosome::from_genes(vec![0.4, 0.4]),
            ],
            generation: 0,
        };
        let fv = fitness(&twin, &task, &users, &c).unwrap();
        assert!((fv.fitness()[0] - 0.5).abs() < 1e-12);
        assert!((fv.fitness()[1] - 0.5).abs() < 1e-12);

        // Direct two-point evaluation: all-signal beats all-noise.
        let signal_raw = task.raw_similarity(&[1.0, 0.0], &users, c.sim_k).unwrap();
        let noise_raw = task.raw_similarity(&[0.0, 1.0], &users, c.sim_k).unwrap();
        assert!(
            signal_raw > noise_raw,
            "signal {signal_raw} vs noise {noise_raw}"
        );
    }

    #[test]
    fn evolve_is_deterministic_and_respects_bounds() {
        let (g, history, users, songs) = planted_task();
        let task = RankingTask {
            graph: &g,
            train_users: users.clone(),
            songs,
            history: &history,
            ppr: PprConfig::default(),
        };
        let c = GaConfig {
            population: 8,
            stable_generations: 3,
            max_generations: 12,
            ..Default::default()
        };
        let r1 = evolve(&task, &c, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let r2 = evolve(&task, &c, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(r1.best, r2.best);
        assert_eq!(r1.log.len(), r2.log.len());
        for (a, b) in r1.log.iter().zip(&r2.log) {
            assert_eq!(a.best_genes, b.best_genes);
            assert_eq!(a.best_raw_similarity.to_bits(), b.best_raw_similarity.to_bits());
        }
        for rec in &r1.log {
            assert!(rec.best_genes.iter().all(|g| (0.0..=1.0).contains(g)));
        }
        assert!(r1.log.len() <= c.max_generations);
    }

    #[test]
    fn evolve_single_edge_type_stabilizes_quickly() {
        let mut b = GraphBuilder::new();
        let user_t = b.node_type("user").unwrap();
        let song_t = b.node_type("song").unwrap();
        let plays = b.edge_type("plays", user_t, song_t).unwrap();
        let u = b.node("u0", user_t).unwrap();
        let s1 = b.node("s0", song_t).unwrap();
        let s2 = b.node("s1", song_t).unwrap();
        b.edge(u, s1, plays, 1.0).unwrap();
        b.edge(u, s2, plays, 1.0).unwrap();
        let g = b.build();
        let history = ListeningHistory::from_counts([(u, s1, 2), (u, s2, 1)]);
        let task = RankingTask {
            graph: &g,
            train_users: vec![u],
            songs: vec![s1, s2],
            history: &history,
            ppr: PprConfig::default(),
        };
        let c = GaConfig {
            population: 6,
            stable_generations: 4,
            max_generations: 50,
            ..Default::default()
        };
        let result = evolve(&task, &c, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        // Every positive single gene is a pure rescaling: fitness ties, the
        // elite persists, and the loop ends within stable_generations + 1.
        assert!(result.log.len() <= c.stable_generations + 2);
    }

    #[test]
    fn evolve_elitist_best_raw_is_non_decreasing() {
        let (g, history, users, songs) = planted_task();
        let task = RankingTask {
            graph: &g,
            train_users: users,
            songs,
            history: &history,
            ppr: PprConfig::default(),
        };
        let c = GaConfig {
            population: 8,
            stable_generations: 5,
            max_generations: 15,
            mutation_threshold: 0.4,
            crossover_threshold: 0.7,
            ..Default::default()
        };
        let result = evolve(&task, &c, &mut ChaCha8Rng::seed_from_u64(21)).unwrap();
        for w in result.log.windows(2) {
            assert!(w[1].best_raw_similarity >= w[0].best_raw_similarity - 1e-12);
        }
    }
}
