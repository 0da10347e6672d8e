//! Nash equilibria of the coalition-formation game, social optima and the
//! price of anarchy.
//!
//! Payoffs depend on a profile only through its mutual graph, and a player
//! can change its own edges only to some subset of the players that
//! currently wish for it. Two consequences drive the search:
//!
//! * a graph is the mutual graph of some equilibrium iff the profile where
//!   everybody wishes for exactly its neighbours is an equilibrium, so
//!   equilibrium partitions come from a scan over graphs;
//! * the equilibria sharing a graph differ only in one-sided wishes between
//!   non-neighbours, and each player tolerates a downward-closed family of
//!   incoming one-sided wishes.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{
    bit, canonicalize_profile, classify, full_mask, members_of, permutations, CPartition,
    GameConfig, PartitionClass, PartitionLabel, StrategyProfile,
};
use crate::partition::{
    all_partitions, edge_count, edge_index, formed_by_graph, is_weak_exact, MutualGraph,
    TABULATED_MAX,
};
use crate::rsg::{coalition_sum, coalition_sum_for_count, share_of};
use crate::UTILITY_TOL;

/// Largest `n` for which equilibria are searched.
pub const ENUMERATION_MAX: usize = TABULATED_MAX;
/// Largest `n` for which the unreduced product of strategy sets is searched.
pub const BRUTE_FORCE_MAX: usize = 4;

fn player_payoff(graph: &MutualGraph, player: usize, config: &GameConfig) -> f64 {
    formed_by_graph(graph)
        .iter()
        .map(|p| share_of(p, player, config))
        .fold(f64::INFINITY, f64::min)
}

/// Players other than `player` who currently wish for it.
fn admirers(profile: &StrategyProfile, player: usize) -> u32 {
    (1..=profile.n())
        .filter(|&j| j != player && profile.wish_mask(j) & bit(player) != 0)
        .fold(0, |acc, j| acc | bit(j))
}

fn subsets(mask: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(0u32);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == mask {
            None
        } else {
            Some((cur | !mask).wrapping_add(1) & mask)
        };
        Some(cur)
    })
}

/// Whether `player` has a strictly better choice of edges among `options`.
fn can_improve(graph: &MutualGraph, player: usize, options: u32, config: &GameConfig) -> bool {
    let current = player_payoff(graph, player, config);
    subsets(options).any(|t| {
        player_payoff(&graph.with_edges_of(player, t), player, config) > current + UTILITY_TOL
    })
}

fn check_profile(profile: &StrategyProfile, config: &GameConfig) -> Result<()> {
    if profile.n() != config.n() {
        return Err(Error::InvalidProfile(format!(
            "profile has {} players, configuration has {}",
            profile.n(),
            config.n()
        )));
    }
    Ok(())
}

/// Every wish-set of `player` that maximizes its payoff with the other
/// players' wishes fixed. Ties within 1e-12 count as maximal.
pub fn best_response_set(
    profile: &StrategyProfile,
    player: usize,
    config: &GameConfig,
) -> Result<Vec<Vec<usize>>> {
    check_profile(profile, config)?;
    let n = profile.n();
    if player == 0 || player > n {
        return Err(Error::PlayerOutOfRange { player, n });
    }
    let graph = MutualGraph::of(profile);
    let reachable = admirers(profile, player);
    let others = full_mask(n) & !bit(player);
    let payoffs: Vec<(u32, f64)> = subsets(others)
        .map(|w| {
            let g = graph.with_edges_of(player, w & reachable);
            (w | bit(player), player_payoff(&g, player, config))
        })
        .collect();
    let best = payoffs
        .iter()
        .map(|&(_, u)| u)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<u32> = payoffs
        .into_iter()
        .filter(|&(_, u)| u >= best - UTILITY_TOL)
        .map(|(w, _)| w)
        .collect();
    out.sort_unstable();
    Ok(out.into_iter().map(|w| members_of(w).collect()).collect())
}

/// No player can strictly gain by changing its own wish-set.
pub fn is_nash(profile: &StrategyProfile, config: &GameConfig) -> Result<bool> {
    check_profile(profile, config)?;
    let graph = MutualGraph::of(profile);
    Ok((1..=profile.n()).all(|p| !can_improve(&graph, p, admirers(profile, p), config)))
}

fn is_equilibrium_graph(graph: &MutualGraph, config: &GameConfig) -> bool {
    (1..=graph.n()).all(|p| !can_improve(graph, p, graph.neighbors(p), config))
}

/// Mutual graphs of all equilibrium profiles.
fn equilibrium_graphs(config: &GameConfig) -> Vec<MutualGraph> {
    let n = config.n();
    (0..1u32 << edge_count(n))
        .into_par_iter()
        .map(|edges| MutualGraph::from_edge_mask(n, edges))
        .filter(|g| is_equilibrium_graph(g, config))
        .collect()
}

/// Equilibrium profiles, one canonical representative per relabeling
/// class, plus the partitions they form.
#[derive(Debug, Clone, PartialEq)]
pub struct NashEnumeration {
    pub ne_profiles: Vec<StrategyProfile>,
    /// One representative per (label, coalition sizes) shape.
    pub ne_partitions: Vec<(PartitionLabel, CPartition)>,
    pub multiple_partition_ne: bool,
}

fn check_budget(n: usize) -> Result<()> {
    if n > ENUMERATION_MAX {
        return Err(Error::BudgetExceeded {
            n,
            reason: format!("equilibrium search is limited to n <= {ENUMERATION_MAX}"),
        });
    }
    Ok(())
}

/// Representatives of the partition shapes appearing across `partitions`.
fn partition_shapes<'a>(
    partitions: impl Iterator<Item = &'a CPartition>,
    config: &GameConfig,
) -> Vec<(PartitionLabel, CPartition)> {
    let mut shapes: BTreeMap<(PartitionLabel, Vec<usize>), CPartition> = BTreeMap::new();
    for p in partitions {
        let label = classify(p, config).expect("partition matches configuration");
        shapes
            .entry((label, p.sizes()))
            .and_modify(|rep| {
                if p < rep {
                    *rep = p.clone();
                }
            })
            .or_insert_with(|| p.clone());
    }
    shapes
        .into_iter()
        .map(|((label, _), p)| (label, p))
        .collect()
}

/// All equilibrium profiles up to relabeling.
///
/// With `use_symmetry`, only one graph per isomorphism class and one
/// wish pattern per automorphism orbit are expanded. Without it, every
/// profile of the full strategy product is tested, which is allowed only
/// for `n <= 4`.
pub fn enumerate_nash(config: &GameConfig, use_symmetry: bool) -> Result<NashEnumeration> {
    let n = config.n();
    check_budget(n)?;
    let profiles: BTreeSet<StrategyProfile> = if use_symmetry {
        symmetric_search(config)
    } else {
        if n > BRUTE_FORCE_MAX {
            return Err(Error::BudgetExceeded {
                n,
                reason: format!(
                    "search without symmetry reduction is limited to n <= {BRUTE_FORCE_MAX}"
                ),
            });
        }
        all_profiles(n)
            .into_par_iter()
            .filter(|p| is_nash(p, config).expect("profile matches configuration"))
            .map(|p| canonicalize_profile(&p))
            .collect()
    };

    let mut multiple = false;
    let mut formed = Vec::new();
    for p in &profiles {
        let parts = formed_by_graph(&MutualGraph::of(p));
        multiple |= parts.len() > 1;
        formed.extend(parts.iter().cloned());
    }
    Ok(NashEnumeration {
        ne_partitions: partition_shapes(formed.iter(), config),
        ne_profiles: profiles.into_iter().collect(),
        multiple_partition_ne: multiple,
    })
}

/// Every profile of the full strategy product, in lexicographic order.
pub fn all_profiles(n: usize) -> Vec<StrategyProfile> {
    let options: Vec<Vec<u32>> = (1..=n)
        .map(|p| {
            subsets(full_mask(n) & !bit(p))
                .map(|w| w | bit(p))
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(1 << (n * (n - 1)));
    let mut current = vec![0u32; n];
    fn rec(i: usize, options: &[Vec<u32>], cur: &mut Vec<u32>, out: &mut Vec<StrategyProfile>) {
        if i == options.len() {
            out.push(StrategyProfile::from_masks_unchecked(cur.clone()));
            return;
        }
        for &w in &options[i] {
            cur[i] = w;
            rec(i + 1, options, cur, out);
        }
    }
    rec(0, &options, &mut current, &mut out);
    out
}

/// Pairs of non-adjacent players, each wishing for the other or not.
/// `Forward` on `(i, j)` with `i < j` means `i` wishes for `j`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[repr(u8)]
enum Wish {
    Neither = 0,
    Forward = 1,
    Backward = 2,
}

impl Wish {
    fn flipped(self) -> Wish {
        match self {
            Wish::Neither => Wish::Neither,
            Wish::Forward => Wish::Backward,
            Wish::Backward => Wish::Forward,
        }
    }
}

/// An automorphism acting on non-edge positions: position `t` of the image
/// takes the wish at `source[t]`, flipped when `flip[t]`.
struct PositionMap {
    source: Vec<usize>,
    flip: Vec<bool>,
}

struct OrbitSearch<'a> {
    graph: MutualGraph,
    config: &'a GameConfig,
    /// Non-adjacent pairs `(i, j)`, 0-based, `i < j`, in lexicographic order.
    pairs: Vec<(usize, usize)>,
    automorphisms: Vec<PositionMap>,
    /// For player `i` (0-based), whether incoming one-sided wishes from a
    /// set of players leave it without a profitable deviation.
    tolerable: Vec<Vec<Option<bool>>>,
    current: Vec<f64>,
}

impl<'a> OrbitSearch<'a> {
    fn new(graph: MutualGraph, automorphisms: &[Vec<usize>], config: &'a GameConfig) -> Self {
        let n = graph.n();
        let mut pairs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                if !graph.has_edge(i + 1, j + 1) {
                    pairs.push((i, j));
                }
            }
        }
        let position: BTreeMap<(usize, usize), usize> =
            pairs.iter().enumerate().map(|(t, &p)| (p, t)).collect();
        let automorphisms = automorphisms
            .iter()
            .filter(|perm| perm.iter().enumerate().any(|(i, &j)| i != j))
            .map(|perm| {
                let mut source = vec![0; pairs.len()];
                let mut flip = vec![false; pairs.len()];
                for (s, &(a, b)) in pairs.iter().enumerate() {
                    let (c, d) = (perm[a], perm[b]);
                    let t = position[&(c.min(d), c.max(d))];
                    source[t] = s;
                    flip[t] = c > d;
                }
                PositionMap { source, flip }
            })
            .collect();
        let current = (1..=n).map(|p| player_payoff(&graph, p, config)).collect();
        OrbitSearch {
            graph,
            config,
            pairs,
            automorphisms,
            tolerable: vec![vec![None; 1 << n]; n],
            current,
        }
    }

    fn tolerates(&mut self, i: usize, incoming: u32) -> bool {
        if let Some(ok) = self.tolerable[i][incoming as usize] {
            return ok;
        }
        let options = self.graph.neighbors(i + 1) | incoming;
        let current = self.current[i];
        let ok = !subsets(options).any(|t| {
            player_payoff(&self.graph.with_edges_of(i + 1, t), i + 1, self.config)
                > current + UTILITY_TOL
        });
        self.tolerable[i][incoming as usize] = Some(ok);
        ok
    }

    /// False when some automorphism provably maps the first `assigned`
    /// wishes to something lexicographically smaller.
    fn prefix_is_minimal(&self, wishes: &[Wish], assigned: usize) -> bool {
        self.automorphisms.iter().all(|map| {
            for t in 0..assigned {
                let s = map.source[t];
                if s >= assigned {
                    return true;
                }
                let image = if map.flip[t] {
                    wishes[s].flipped()
                } else {
                    wishes[s]
                };
                if image != wishes[t] {
                    return image > wishes[t];
                }
            }
            true
        })
    }

    fn run(&mut self) -> Vec<StrategyProfile> {
        let mut out = Vec::new();
        let mut wishes = vec![Wish::Neither; self.pairs.len()];
        let mut incoming = vec![0u32; self.graph.n()];
        self.descend(0, &mut wishes, &mut incoming, &mut out);
        out
    }

    fn descend(
        &mut self,
        t: usize,
        wishes: &mut Vec<Wish>,
        incoming: &mut Vec<u32>,
        out: &mut Vec<StrategyProfile>,
    ) {
        if !self.prefix_is_minimal(wishes, t) {
            return;
        }
        if t == self.pairs.len() {
            out.push(self.profile(wishes));
            return;
        }
        let (i, j) = self.pairs[t];
        for w in [Wish::Neither, Wish::Forward, Wish::Backward] {
            let (target, from) = match w {
                Wish::Neither => (None, 0),
                Wish::Forward => (Some(j), i),
                Wish::Backward => (Some(i), j),
            };
            if let Some(target) = target {
                incoming[target] |= 1 << from;
                if !self.tolerates(target, incoming[target]) {
                    incoming[target] &= !(1 << from);
                    continue;
                }
            }
            wishes[t] = w;
            self.descend(t + 1, wishes, incoming, out);
            wishes[t] = Wish::Neither;
            if let Some(target) = target {
                incoming[target] &= !(1 << from);
            }
        }
    }

    fn profile(&self, wishes: &[Wish]) -> StrategyProfile {
        let n = self.graph.n();
        let mut masks: Vec<u32> = (0..n)
            .map(|i| self.graph.neighbors(i + 1) | 1 << i)
            .collect();
        for (&(i, j), &w) in self.pairs.iter().zip(wishes) {
            match w {
                Wish::Neither => {}
                Wish::Forward => masks[i] |= 1 << j,
                Wish::Backward => masks[j] |= 1 << i,
            }
        }
        StrategyProfile::from_masks_unchecked(masks)
    }
}

fn symmetric_search(config: &GameConfig) -> BTreeSet<StrategyProfile> {
    let n = config.n();
    let perms: Vec<Vec<usize>> = permutations(n).collect();
    let relabel_edges = |edges: u32, perm: &[usize]| {
        let mut out = 0;
        for i in 0..n {
            for j in i + 1..n {
                if edges >> edge_index(n, i, j) & 1 == 1 {
                    let (a, b) = (perm[i].min(perm[j]), perm[i].max(perm[j]));
                    out |= 1 << edge_index(n, a, b);
                }
            }
        }
        out
    };
    equilibrium_graphs(config)
        .into_iter()
        .filter_map(|g| {
            let edges = g.edge_mask();
            let canonical = perms.iter().all(|p| relabel_edges(edges, p) >= edges);
            canonical.then(|| {
                let auts: Vec<Vec<usize>> = perms
                    .iter()
                    .filter(|p| relabel_edges(edges, p) == edges)
                    .cloned()
                    .collect();
                (g, auts)
            })
        })
        .collect::<Vec<_>>()
        .into_par_iter()
        .flat_map_iter(|(g, auts)| {
            OrbitSearch::new(g, &auts, config)
                .run()
                .into_iter()
                .map(|p| canonicalize_profile(&p))
        })
        .collect()
}

/// Total payoff and partition classes of the social optimum.
///
/// Payoffs depend only on the number of coalitions `k`, so classes are
/// reported by `k` alone: `GC` for one coalition, `ALC` for `n`, `P{k}`
/// otherwise (this merges `TTC` with `{3,1}` at four players).
pub fn social_optimum(config: &GameConfig) -> (f64, Vec<PartitionLabel>) {
    let n = config.n();
    let values: Vec<f64> = (1..=n)
        .map(|k| coalition_sum_for_count(k, config))
        .collect();
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let labels = (1..=n)
        .filter(|&k| values[k - 1] >= best - UTILITY_TOL)
        .map(|k| PartitionLabel {
            class: PartitionClass::from_count(n, k),
            significant: config.is_significant(k),
        })
        .collect();
    (best, labels)
}

/// Full analysis of one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumReport {
    pub ne_partitions: Vec<(PartitionLabel, CPartition)>,
    pub multiple_partition_ne: bool,
    /// Smallest total cooperating payoff over equilibrium partitions.
    pub worst_ne_sum: f64,
    pub so_value: f64,
    pub so_partition_classes: Vec<PartitionLabel>,
    pub poa: f64,
}

impl EquilibriumReport {
    /// Distinct display labels of the equilibrium partitions, ordered from
    /// grand coalition to all alone.
    pub fn ne_labels(&self) -> Vec<PartitionLabel> {
        let set: BTreeSet<PartitionLabel> = self.ne_partitions.iter().map(|(l, _)| *l).collect();
        set.into_iter().collect()
    }
}

/// Equilibrium partitions, social optimum and price of anarchy. Works on
/// mutual graphs directly and never lists profiles.
pub fn analyze(config: &GameConfig) -> Result<EquilibriumReport> {
    check_budget(config.n())?;
    let graphs = equilibrium_graphs(config);
    let mut multiple = false;
    let mut formed: BTreeSet<CPartition> = BTreeSet::new();
    for g in &graphs {
        let parts = formed_by_graph(g);
        multiple |= parts.len() > 1;
        formed.extend(parts.iter().cloned());
    }
    let worst_ne_sum = formed
        .iter()
        .map(|p| coalition_sum(p, config).expect("partition matches configuration"))
        .fold(f64::INFINITY, f64::min);
    let (so_value, so_partition_classes) = social_optimum(config);
    Ok(EquilibriumReport {
        ne_partitions: partition_shapes(formed.iter(), config),
        multiple_partition_ne: multiple,
        worst_ne_sum,
        so_value,
        so_partition_classes,
        poa: so_value / worst_ne_sum,
    })
}

pub fn price_of_anarchy(config: &GameConfig) -> Result<f64> {
    analyze(config).map(|r| r.poa)
}

/// No equilibrium profile forms more than one partition.
pub fn no_multi_partition_equilibria(config: &GameConfig) -> Result<bool> {
    analyze(config).map(|r| !r.multiple_partition_ne)
}

/// Number of profiles of the full strategy product that form more than
/// one partition.
pub fn count_multiple_partition_profiles(n: usize) -> Result<usize> {
    if n > 5 {
        return Err(Error::BudgetExceeded {
            n,
            reason: "profile scan is limited to n <= 5".into(),
        });
    }
    Ok(all_profiles(n)
        .par_iter()
        .filter(|p| formed_by_graph(&MutualGraph::of(p)).len() > 1)
        .count())
}

/// When no equilibrium forms several partitions, no equilibrium partition
/// is weak.
pub fn no_weak_equilibrium_partitions(config: &GameConfig) -> Result<bool> {
    check_budget(config.n())?;
    let graphs = equilibrium_graphs(config);
    if graphs.iter().any(|g| formed_by_graph(g).len() > 1) {
        return Ok(true);
    }
    for g in &graphs {
        for p in formed_by_graph(g).iter() {
            if is_weak_exact(p, config)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Brute-force social optimum over every set partition; `n <= 8`.
pub fn social_optimum_brute_force(config: &GameConfig) -> (f64, Vec<PartitionLabel>) {
    let n = config.n();
    let parts = all_partitions(n);
    let sums: Vec<f64> = parts
        .iter()
        .map(|p| coalition_sum(p, config).expect("same player count"))
        .collect();
    let best = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let labels: BTreeSet<PartitionLabel> = parts
        .iter()
        .zip(&sums)
        .filter(|(_, &s)| s >= best - UTILITY_TOL)
        .map(|(p, _)| PartitionLabel {
            class: PartitionClass::from_count(n, p.k()),
            significant: config.is_significant(p.k()),
        })
        .collect();
    (best, labels.into_iter().collect())
}
