//! Synthetic desk-scale heterogeneous music networks with planted taste
//! groups: dense within-group signal edges, group-independent noise edges,
//! and structural artist/album/playlist/genre wiring. Stands in for real
//! listening data so edge-type learning can be validated against a known
//! ground truth.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hetnet::{GraphBuilder, HeteroGraph, NodeId};
use crate::metrics::ListeningHistory;

/// A user->song edge type wired by taste group: probability `p_in` within a
/// group, `p_out` across groups.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SignalEdgeType {
    pub name: String,
    pub p_in: f64,
    pub p_out: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub users: usize,
    pub songs: usize,
    pub artists: usize,
    pub albums: usize,
    pub playlists: usize,
    pub genres: usize,
    /// Number of planted taste groups G; users and songs are assigned
    /// round-robin by index.
    pub groups: usize,
    /// Group-dependent user->song edge types. The first one carries play
    /// counts and defines the listening history.
    pub signal_types: Vec<SignalEdgeType>,
    /// Group-independent user->song edge types, each wired with `p_noise`.
    pub noise_types: Vec<String>,
    pub p_noise: f64,
    /// Songs per playlist.
    pub playlist_songs: usize,
    /// Mean of the geometric play-count distribution (counts are >= 1).
    pub play_count_mean: f64,
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            users: 200,
            songs: 400,
            artists: 40,
            albums: 60,
            playlists: 50,
            genres: 8,
            groups: 4,
            signal_types: vec![SignalEdgeType {
                name: "plays".into(),
                p_in: 0.05,
                p_out: 0.002,
            }],
            noise_types: vec!["comments".into(), "bookmarks".into()],
            p_noise: 0.01,
            playlist_songs: 8,
            play_count_mean: 3.0,
            train_fraction: 0.7,
            seed: 1,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("users", self.users),
            ("songs", self.songs),
            ("artists", self.artists),
            ("albums", self.albums),
            ("playlists", self.playlists),
            ("genres", self.genres),
            ("groups", self.groups),
        ] {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be >= 1")));
            }
        }
        if self.groups > self.users || self.groups > self.songs {
            return Err(Error::InvalidConfig(
                "groups must not exceed users or songs".into(),
            ));
        }
        if self.signal_types.is_empty() {
            return Err(Error::InvalidConfig("need at least one signal type".into()));
        }
        for s in &self.signal_types {
            if !(0.0..=1.0).contains(&s.p_in) || !(0.0..=1.0).contains(&s.p_out) {
                return Err(Error::InvalidConfig(format!(
                    "probabilities for '{}' must be in [0,1]",
                    s.name
                )));
            }
            if s.p_in <= s.p_out {
                return Err(Error::InvalidConfig(format!(
                    "'{}' needs p_in > p_out, got {} <= {}",
                    s.name, s.p_in, s.p_out
                )));
            }
        }
        if !(0.0..=1.0).contains(&self.p_noise) {
            return Err(Error::InvalidConfig("p_noise must be in [0,1]".into()));
        }
        if self.playlist_songs > self.songs {
            return Err(Error::InvalidConfig(
                "playlist_songs must not exceed songs".into(),
            ));
        }
        if self.play_count_mean < 1.0 {
            return Err(Error::InvalidConfig("play_count_mean must be >= 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidConfig("train_fraction must be in (0,1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug)]
pub struct SynthOutput {
    pub graph: HeteroGraph,
    pub history: ListeningHistory,
    /// Ground-truth taste group of each user and song node, ascending by id.
    pub groups: Vec<(NodeId, usize)>,
    pub users: Vec<NodeId>,
    pub songs: Vec<NodeId>,
}

/// Generates the network, listening history, and ground-truth group map.
/// Deterministic: a pure function of the config (rng seeded from it).
pub fn generate(cfg: &SynthConfig) -> Result<SynthOutput> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut b = GraphBuilder::new();

    let user_t = b.node_type("user")?;
    let song_t = b.node_type("song")?;
    let artist_t = b.node_type("artist")?;
    let album_t = b.node_type("album")?;
    let playlist_t = b.node_type("playlist")?;
    let genre_t = b.node_type("genre")?;

    let signal_ets = cfg
        .signal_types
        .iter()
        .map(|s| b.edge_type(&s.name, user_t, song_t))
        .collect::<Result<Vec<_>>>()?;
    let noise_ets = cfg
        .noise_types
        .iter()
        .map(|n| b.edge_type(n, user_t, song_t))
        .collect::<Result<Vec<_>>>()?;
    let performs_in = b.edge_type("performsIn", artist_t, song_t)?;
    let includes = b.edge_type("includes", album_t, song_t)?;
    let releases = b.edge_type("releases", artist_t, album_t)?;
    let makes = b.edge_type("makes", user_t, playlist_t)?;
    let contains = b.edge_type("contains", playlist_t, song_t)?;
    let categorized_as = b.edge_type("categorizedAs", album_t, genre_t)?;
    let has_genre = b.edge_type("hasGenre", artist_t, genre_t)?;

    let users: Vec<NodeId> = (0..cfg.users)
        .map(|i| b.node(&format!("u{i}"), user_t))
        .collect::<Result<_>>()?;
    let songs: Vec<NodeId> = (0..cfg.songs)
        .map(|i| b.node(&format!("s{i}"), song_t))
        .collect::<Result<_>>()?;
    let artists: Vec<NodeId> = (0..cfg.artists)
        .map(|i| b.node(&format!("a{i}"), artist_t))
        .collect::<Result<_>>()?;
    let albums: Vec<NodeId> = (0..cfg.albums)
        .map(|i| b.node(&format!("al{i}"), album_t))
        .collect::<Result<_>>()?;
    let playlists: Vec<NodeId> = (0..cfg.playlists)
        .map(|i| b.node(&format!("p{i}"), playlist_t))
        .collect::<Result<_>>()?;
    let genres: Vec<NodeId> = (0..cfg.genres)
        .map(|i| b.node(&format!("g{i}"), genre_t))
        .collect::<Result<_>>()?;

    let user_group = |i: usize| i % cfg.groups;
    let song_group = |j: usize| j % cfg.groups;

    // Signal edges; the first signal type carries play counts.
    let count_dist = Geometric::new(1.0 / cfg.play_count_mean)
        .map_err(|e| Error::InvalidConfig(format!("play count distribution: {e}")))?;
    let mut plays: Vec<(NodeId, NodeId, u32)> = Vec::new();
    for (si, &et) in signal_ets.iter().enumerate() {
        let spec = &cfg.signal_types[si];
        for (i, &u) in users.iter().enumerate() {
            for (j, &s) in songs.iter().enumerate() {
                let p = if user_group(i) == song_group(j) {
                    spec.p_in
                } else {
                    spec.p_out
                };
                if rng.random::<f64>() < p {
                    b.edge(u, s, et, 1.0)?;
                    if si == 0 {
                        let count = 1 + count_dist.sample(&mut rng) as u32;
                        plays.push((u, s, count));
                    }
                }
            }
        }
    }

    // Noise edges: group-independent.
    for &et in &noise_ets {
        for &u in &users {
            for &s in &songs {
                if rng.random::<f64>() < cfg.p_noise {
                    b.edge(u, s, et, 1.0)?;
                }
            }
        }
    }

    // Structural wiring consistent with the node types.
    for &s in &songs {
        let a = artists[rng.random_range(0..cfg.artists)];
        b.edge(a, s, performs_in, 1.0)?;
    }
    for &s in &songs {
        let al = albums[rng.random_range(0..cfg.albums)];
        b.edge(al, s, includes, 1.0)?;
    }
    for &al in &albums {
        let a = artists[rng.random_range(0..cfg.artists)];
        b.edge(a, al, releases, 1.0)?;
    }
    for &p in &playlists {
        let u = users[rng.random_range(0..cfg.users)];
        b.edge(u, p, makes, 1.0)?;
    }
    for &p in &playlists {
        let mut picks = rand::seq::index::sample(&mut rng, cfg.songs, cfg.playlist_songs)
            .into_vec();
        picks.sort_unstable();
        for j in picks {
            b.edge(p, songs[j], contains, 1.0)?;
        }
    }
    for &al in &albums {
        let g = genres[rng.random_range(0..cfg.genres)];
        b.edge(al, g, categorized_as, 1.0)?;
    }
    for &a in &artists {
        let g = genres[rng.random_range(0..cfg.genres)];
        b.edge(a, g, has_genre, 1.0)?;
    }

    let graph = b.build();
    let history = ListeningHistory::from_counts(plays);
    let mut groups: Vec<(NodeId, usize)> = users
        .iter()
        .enumerate()
        .map(|(i, &u)| (u, user_group(i)))
        .chain(songs.iter().enumerate().map(|(j, &s)| (s, song_group(j))))
        .collect();
    groups.sort();

    Ok(SynthOutput {
        graph,
        history,
        groups,
        users,
        songs,
    })
}

/// Random disjoint train/test split of users; both halves returned sorted.
pub fn split_users<R: Rng>(
    users: &[NodeId],
    train_fraction: f64,
    rng: &mut R,
) -> Result<(Vec<NodeId>, Vec<NodeId>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "train_fraction must be in (0,1), got {train_fraction}"
        )));
    }
    let mut pool = users.to_vec();
    pool.sort();
    pool.shuffle(rng);
    let n_train = ((users.len() as f64) * train_fraction).round() as usize;
    let n_train = n_train.min(users.len());
    let mut train = pool[..n_train].to_vec();
    let mut test = pool[n_train..].to_vec();
    train.sort();
    test.sort();
    Ok((train, test))
}
