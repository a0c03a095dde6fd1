//! Ranking quality (NDCG@k) and between-community searching cost.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::community::Partition;
use crate::error::{Error, Result};
use crate::hetnet::{data_lines, HeteroGraph, NodeId};

/// Cost@N columns reported by the evaluation pipeline.
pub const COST_TOP_NS: [usize; 5] = [5, 10, 20, 50, 100];

/// One user's play counts and quartile relevance grades.
#[derive(Clone, Debug, Default)]
pub struct UserHistory {
    counts: BTreeMap<NodeId, u32>,
    grades: BTreeMap<NodeId, u8>,
}

impl UserHistory {
    pub fn play_count(&self, song: NodeId) -> Option<u32> {
        self.counts.get(&song).copied()
    }

    pub fn grade(&self, song: NodeId) -> Option<u8> {
        self.grades.get(&song).copied()
    }

    pub fn listened(&self, song: NodeId) -> bool {
        self.counts.contains_key(&song)
    }

    pub fn counts(&self) -> &BTreeMap<NodeId, u32> {
        &self.counts
    }

    pub fn grades(&self) -> &BTreeMap<NodeId, u8> {
        &self.grades
    }

    pub fn song_count(&self) -> usize {
        self.counts.len()
    }

    /// The user's `n` most-played songs, ties broken by ascending song id.
    pub fn top_songs(&self, n: usize) -> Vec<NodeId> {
        let mut songs: Vec<(NodeId, u32)> = self.counts.iter().map(|(&s, &c)| (s, c)).collect();
        songs.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        songs.truncate(n);
        songs.into_iter().map(|(s, _)| s).collect()
    }
}

/// Per-user song play counts with quartile relevance grades in {1,2,3,4}.
/// Grades are assigned per user by play-count rank: songs sorted by count
/// ascending (ties by song id), rank r in 1..=m, grade = ceil(4r/m).
#[derive(Clone, Debug, Default)]
pub struct ListeningHistory {
    users: BTreeMap<NodeId, UserHistory>,
}

impl ListeningHistory {
    /// Builds a history from (user, song, play count) records. Repeated
    /// (user, song) pairs accumulate their counts.
    pub fn from_counts(entries: impl IntoIterator<Item = (NodeId, NodeId, u32)>) -> Self {
        let mut users: BTreeMap<NodeId, BTreeMap<NodeId, u32>> = BTreeMap::new();
        for (user, song, count) in entries {
            *users.entry(user).or_default().entry(song).or_insert(0) += count;
        }
        let users = users
            .into_iter()
            .map(|(u, counts)| {
                let grades = quartile_grades(&counts);
                (u, UserHistory { counts, grades })
            })
            .collect();
        Self { users }
    }

    pub fn user(&self, user: NodeId) -> Option<&UserHistory> {
        self.users.get(&user)
    }

    pub fn contains_user(&self, user: NodeId) -> bool {
        self.users.contains_key(&user)
    }

    /// Users in ascending id order.
    pub fn users(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.users.keys().copied()
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }
}

fn quartile_grades(counts: &BTreeMap<NodeId, u32>) -> BTreeMap<NodeId, u8> {
    let m = counts.len();
    let mut songs: Vec<(NodeId, u32)> = counts.iter().map(|(&s, &c)| (s, c)).collect();
    songs.sort_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)));
    songs
        .into_iter()
        .enumerate()
        .map(|(i, (s, _))| {
            let rank = i + 1;
            let grade = (4 * rank).div_ceil(m) as u8;
            (s, grade)
        })
        .collect()
}

/// NDCG@k with gain = grade (0 for ungraded songs) and discount
/// 1/log2(position+1). Returns 0 when the user has no graded songs.
pub fn ndcg_at_k(ranked: &[NodeId], grades: &BTreeMap<NodeId, u8>, k: usize) -> f64 {
    if grades.is_empty() || k == 0 {
        return 0.0;
    }
    let dcg: f64 = ranked
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, s)| {
            let gain = grades.get(s).copied().unwrap_or(0) as f64;
            gain / ((i + 2) as f64).log2()
        })
        .sum();
    let mut ideal: Vec<u8> = grades.values().copied().collect();
    ideal.sort_unstable_by(|a, b| b.cmp(a));
    let idcg: f64 = ideal
        .iter()
        .take(k)
        .enumerate()
        .map(|(i, &g)| g as f64 / ((i + 2) as f64).log2())
        .sum();
    if idcg == 0.0 {
        0.0
    } else {
        dcg / idcg
    }
}

/// One community in a user's visiting order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommunityRankEntry {
    pub community: usize,
    /// Retrieved listened songs the community contains.
    pub listened: usize,
    /// Total node count of the community.
    pub size: usize,
}

/// Communities holding at least one of the user's retrieved songs, ordered
/// by contained listened count descending (ties by ascending community id).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommunityRankingForUser {
    pub entries: Vec<CommunityRankEntry>,
}

pub fn rank_communities(
    partition: &Partition,
    user: NodeId,
    history: &ListeningHistory,
    top_n: usize,
) -> Result<CommunityRankingForUser> {
    let user_history = history
        .user(user)
        .ok_or_else(|| Error::UserNotInHistory(format!("node #{}", user.0)))?;
    Ok(rank_communities_inner(partition, user_history, top_n))
}

fn rank_communities_inner(
    partition: &Partition,
    user_history: &UserHistory,
    top_n: usize,
) -> CommunityRankingForUser {
    let retrieved = user_history.top_songs(top_n);
    let mut per_community: BTreeMap<usize, usize> = BTreeMap::new();
    for &s in &retrieved {
        *per_community.entry(partition.community_of(s)).or_insert(0) += 1;
    }
    let mut entries: Vec<CommunityRankEntry> = per_community
        .into_iter()
        .map(|(community, listened)| CommunityRankEntry {
            community,
            listened,
            size: partition.sizes()[community],
        })
        .collect();
    entries.sort_by(|a, b| b.listened.cmp(&a.listened).then(a.community.cmp(&b.community)));
    CommunityRankingForUser { entries }
}

/// Simulated cost for the given users to retrieve their top-n listened songs
/// by visiting communities in decreasing order of contained listened songs.
///
/// Per user with retrieved songs `R` and visiting order `C_1..C_K`
/// (defining `‖C_0‖ = 1`), each song `s` in `C_k` contributes
/// `(listened_k / (φ(s)·|R|)) · ln(‖C_{k−1}‖·‖C_k‖)`. Users are summed
/// in ascending id order; users without listened songs contribute 0.
pub fn searching_cost(
    partition: &Partition,
    users: &[NodeId],
    history: &ListeningHistory,
    top_n: usize,
) -> f64 {
    let mut ordered = users.to_vec();
    ordered.sort();
    let mut total = 0.0;
    for user in ordered {
        let Some(user_history) = history.user(user) else {
            continue;
        };
        let retrieved = user_history.top_songs(top_n);
        if retrieved.is_empty() {
            continue;
        }
        let retrieved_count = retrieved.len() as f64;
        let ranking = rank_communities_inner(partition, user_history, top_n);

        let mut by_community: BTreeMap<usize, Vec<NodeId>> = BTreeMap::new();
        for &s in &retrieved {
            by_community
                .entry(partition.community_of(s))
                .or_default()
                .push(s);
        }

        let mut prev_size = 1.0f64;
        for entry in &ranking.entries {
            let log_term = (prev_size * entry.size as f64).ln();
            let listened = entry.listened as f64;
            for &s in &by_community[&entry.community] {
                let plays = user_history.play_count(s).expect("retrieved song") as f64;
                total += listened / (plays * retrieved_count) * log_term;
            }
            prev_size = entry.size as f64;
        }
    }
    total
}

/// [`searching_cost`] over the standard Cost@N columns.
pub fn cost_at_table(
    partition: &Partition,
    users: &[NodeId],
    history: &ListeningHistory,
) -> Vec<(usize, f64)> {
    COST_TOP_NS
        .iter()
        .map(|&n| (n, searching_cost(partition, users, history, n)))
        .collect()
}

/// Loads a `user_id<TAB>song_id<TAB>play_count` file, resolving ids against
/// the graph. Quartile grades are computed per user at load time.
pub fn load_history(path: &Path, g: &HeteroGraph) -> Result<ListeningHistory> {
    let content = std::fs::read_to_string(path)?;
    let mut entries = Vec::new();
    for (ln, line) in data_lines(&content) {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: ln,
                message: "expected user_id<TAB>song_id<TAB>play_count".into(),
            });
        }
        let user = g.node_id(fields[0]).ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line: ln,
            message: format!("unknown node '{}'", fields[0]),
        })?;
        let song = g.node_id(fields[1]).ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            line: ln,
            message: format!("unknown node '{}'", fields[1]),
        })?;
        let count: u32 = fields[2].parse().map_err(|e| Error::Parse {
            path: path.display().to_string(),
            line: ln,
            message: format!("bad play count '{}': {e}", fields[2]),
        })?;
        if count == 0 {
            return Err(Error::Parse {
                path: path.display().to_string(),
                line: ln,
                message: "play count must be >= 1".into(),
            });
        }
        entries.push((user, song, count));
    }
    Ok(ListeningHistory::from_counts(entries))
}

/// Writes a history as `user_id<TAB>song_id<TAB>play_count` lines in
/// ascending (user, song) id order.
pub fn save_history(history: &ListeningHistory, g: &HeteroGraph, path: &Path) -> Result<()> {
    let mut out = String::new();
    for user in history.users() {
        let h = history.user(user).expect("listed user");
        for (&song, &count) in h.counts() {
            writeln!(
                out,
                "{}\t{}\t{}",
                g.node_name(user),
                g.node_name(song),
                count
            )
            .expect("string write");
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}
