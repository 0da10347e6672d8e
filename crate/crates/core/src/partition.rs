//! Which partitions a strategy profile forms, the coarsening order,
//! unilateral-deviation partitions and weak-partition tests.
//!
//! A coalition can form only if its members all wish for each other, so a
//! profile matters here only through its mutual graph: `i -- j` iff each
//! lists the other. The formed partitions are the clique partitions of
//! that graph admitting no strictly coarser clique partition.

use std::borrow::Cow;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::model::{bit, relabel_mask, CPartition, GameConfig, StrategyProfile};
use crate::rsg::share_of;
use crate::UTILITY_TOL;

/// Largest `n` whose formed partitions are tabulated for every graph.
pub const TABULATED_MAX: usize = 6;

/// Index of the undirected edge between 0-based players `i < j`.
pub(crate) fn edge_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

pub(crate) fn edge_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Symmetric "both want each other" relation between cooperating players.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MutualGraph {
    n: usize,
    adj: [u32; 32],
}

impl MutualGraph {
    pub fn of(profile: &StrategyProfile) -> Self {
        let n = profile.n();
        let wishes = profile.masks();
        let mut adj = [0u32; 32];
        for i in 0..n {
            for j in i + 1..n {
                if wishes[i] >> j & 1 == 1 && wishes[j] >> i & 1 == 1 {
                    adj[i] |= 1 << j;
                    adj[j] |= 1 << i;
                }
            }
        }
        MutualGraph { n, adj }
    }

    /// Graph from an edge bitmask in `edge_index` order.
    pub fn from_edge_mask(n: usize, edges: u32) -> Self {
        let mut adj = [0u32; 32];
        for i in 0..n {
            for j in i + 1..n {
                if edges >> edge_index(n, i, j) & 1 == 1 {
                    adj[i] |= 1 << j;
                    adj[j] |= 1 << i;
                }
            }
        }
        MutualGraph { n, adj }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_mask(&self) -> u32 {
        let mut edges = 0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.adj[i] >> j & 1 == 1 {
                    edges |= 1 << edge_index(self.n, i, j);
                }
            }
        }
        edges
    }

    /// Neighbours of `player` (1-based), not including the player.
    pub fn neighbors(&self, player: usize) -> u32 {
        self.adj[player - 1]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a != b && self.adj[a - 1] & bit(b) != 0
    }

    pub fn is_clique(&self, mask: u32) -> bool {
        let mut rest = mask;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if mask & !self.adj[i] & !(1 << i) != 0 {
                return false;
            }
        }
        true
    }

    /// Profile in which each player wishes for exactly its neighbours.
    pub fn neighborhood_profile(&self) -> StrategyProfile {
        StrategyProfile::from_masks_unchecked((0..self.n).map(|i| self.adj[i] | 1 << i).collect())
    }

    /// Graph with `player`'s edges replaced by those to `keep`.
    pub(crate) fn with_edges_of(&self, player: usize, keep: u32) -> Self {
        let i = player - 1;
        let mut g = *self;
        let keep = keep & !(1 << i);
        for j in 0..self.n {
            if j == i {
                continue;
            }
            if keep >> j & 1 == 1 {
                g.adj[j] |= 1 << i;
            } else {
                g.adj[j] &= !(1 << i);
            }
        }
        g.adj[i] = keep;
        g
    }

    pub fn relabel(&self, perm: &[usize]) -> Self {
        let mut adj = [0u32; 32];
        for i in 0..self.n {
            adj[perm[i]] = relabel_mask(self.adj[i], perm);
        }
        MutualGraph { n: self.n, adj }
    }
}

/// Partitions formed by one profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormedPartitions {
    pub partitions: Vec<CPartition>,
    pub unique: bool,
}

/// All set partitions of `1..=n`, generated as restricted growth strings.
pub fn all_partitions(n: usize) -> Vec<CPartition> {
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    fn rec(i: usize, used: usize, rgs: &mut Vec<usize>, out: &mut Vec<CPartition>) {
        let n = rgs.len();
        if i == n {
            let mut blocks = vec![0u32; used];
            for (p, &b) in rgs.iter().enumerate() {
                blocks[b] |= 1 << p;
            }
            out.push(CPartition::from_blocks_unchecked(n, blocks));
            return;
        }
        for b in 0..=used {
            rgs[i] = b;
            rec(i + 1, used.max(b + 1), rgs, out);
        }
    }
    if n > 0 {
        rgs[0] = 0;
        rec(1, 1, &mut rgs, &mut out);
    }
    out
}

/// A clique partition is minimal iff no two of its coalitions could merge
/// into a clique.
fn is_formed(graph: &MutualGraph, blocks: &[u32]) -> bool {
    blocks.iter().all(|&b| graph.is_clique(b))
        && blocks
            .iter()
            .enumerate()
            .all(|(x, &a)| blocks[x + 1..].iter().all(|&b| !graph.is_clique(a | b)))
}

fn compute_formed(graph: &MutualGraph, candidates: &[CPartition]) -> Vec<CPartition> {
    candidates
        .iter()
        .filter(|p| is_formed(graph, p.blocks()))
        .cloned()
        .collect()
}

fn partitions_cached(n: usize) -> &'static [CPartition] {
    static CACHE: [OnceLock<Vec<CPartition>>; TABULATED_MAX + 1] =
        [const { OnceLock::new() }; TABULATED_MAX + 1];
    CACHE[n].get_or_init(|| all_partitions(n))
}

fn formed_table(n: usize) -> &'static [Vec<CPartition>] {
    static TABLE: [OnceLock<Vec<Vec<CPartition>>>; TABULATED_MAX + 1] =
        [const { OnceLock::new() }; TABULATED_MAX + 1];
    TABLE[n].get_or_init(|| {
        let candidates = partitions_cached(n);
        (0..1u32 << edge_count(n))
            .map(|edges| compute_formed(&MutualGraph::from_edge_mask(n, edges), candidates))
            .collect()
    })
}

/// Formed partitions of a mutual graph, from a shared table when `n` is
/// small enough.
pub fn formed_by_graph(graph: &MutualGraph) -> Cow<'static, [CPartition]> {
    let n = graph.n();
    if n <= TABULATED_MAX {
        Cow::Borrowed(&formed_table(n)[graph.edge_mask() as usize])
    } else {
        Cow::Owned(compute_formed(graph, &all_partitions(n)))
    }
}

pub fn formed_partitions(profile: &StrategyProfile) -> FormedPartitions {
    let partitions = formed_by_graph(&MutualGraph::of(profile)).into_owned();
    let unique = partitions.len() == 1;
    FormedPartitions { partitions, unique }
}

/// True iff `coarser` strictly coarsens `finer`: they differ and every
/// coalition of `finer` lies inside one of `coarser`.
pub fn is_better(coarser: &CPartition, finer: &CPartition) -> Result<bool> {
    if coarser.n() != finer.n() {
        return Err(Error::InvalidPartition(format!(
            "cannot compare partitions of {} and {} players",
            coarser.n(),
            finer.n()
        )));
    }
    Ok(coarser != finer
        && finer
            .blocks()
            .iter()
            .all(|&s| coarser.blocks().iter().any(|&t| s & !t == 0)))
}

/// Partition after `player` leaves its coalition to stand alone. A
/// singleton stays as it is.
pub fn udp(partition: &CPartition, player: usize) -> Result<CPartition> {
    let n = partition.n();
    if player == 0 || player > n {
        return Err(Error::PlayerOutOfRange { player, n });
    }
    let own = partition.block_of(player);
    if own.count_ones() == 1 {
        return Ok(partition.clone());
    }
    let mut blocks: Vec<u32> = partition
        .blocks()
        .iter()
        .copied()
        .filter(|&b| b != own)
        .collect();
    blocks.push(bit(player));
    blocks.push(own & !bit(player));
    Ok(CPartition::from_blocks_unchecked(n, blocks))
}

/// Sufficient weakness test from coalition counts alone:
/// `m* > (k + 1)^2 / k^2`.
pub fn is_weak_criterion(partition: &CPartition) -> bool {
    let k = partition.k();
    partition.m_star() * k * k > (k + 1) * (k + 1)
}

/// Whether some member of a coalition of two or more gains strictly by
/// leaving to stand alone.
pub fn is_weak_exact(partition: &CPartition, config: &GameConfig) -> Result<bool> {
    if partition.n() != config.n() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} players, configuration has {}",
            partition.n(),
            config.n()
        )));
    }
    for &block in partition.blocks() {
        if block.count_ones() < 2 {
            continue;
        }
        let player = block.trailing_zeros() as usize + 1;
        let after = udp(partition, player)?;
        if share_of(&after, player, config) > share_of(partition, player, config) + UTILITY_TOL {
            return Ok(true);
        }
    }
    Ok(false)
}
