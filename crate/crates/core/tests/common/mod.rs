//! Straightforward reference implementations used to cross-check the
//! library. Nothing here calls into the crate's search code.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

/// Wish sets as bitmasks, player `p` (1-based) at bit `p - 1`.
pub type Profile = Vec<u32>;
/// Blocks as bitmasks, sorted ascending.
pub type Blocks = Vec<u32>;

pub const PLAYER_GRID_MAX: usize = 4;

pub fn eta_grid() -> Vec<f64> {
    let edges = [
        2.0 / 3f64.sqrt() - 1.0,
        2f64.sqrt() - 1.0,
        0.5,
        (3.0 - 2f64.sqrt()) / (2.0 * 2f64.sqrt()),
        2.0 / 3.0,
        1.0 / 2f64.sqrt(),
        0.75,
        0.8,
        5.0 / 6.0,
        1.0 + 2f64.sqrt(),
        1.0 + 3f64.sqrt(),
    ];
    let mut grid: Vec<f64> = edges.iter().flat_map(|&e| [e - 0.02, e + 0.02]).collect();
    grid.extend([1e-3, 0.1, 0.3, 1.0, 2.0, 5.0, 1e3]);
    grid.sort_by(f64::total_cmp);
    grid
}

/// All set partitions of `{1..n}` by inserting players one at a time.
pub fn set_partitions(n: usize) -> Vec<Blocks> {
    let mut out: Vec<Blocks> = vec![vec![]];
    for p in 0..n {
        let bit = 1u32 << p;
        let mut next = Vec::new();
        for blocks in &out {
            for i in 0..blocks.len() {
                let mut b = blocks.clone();
                b[i] |= bit;
                next.push(b);
            }
            let mut b = blocks.clone();
            b.push(bit);
            next.push(b);
        }
        out = next;
    }
    out.into_iter()
        .map(|mut b| {
            b.sort_unstable();
            b
        })
        .collect()
}

/// Every profile in which each player's wish contains itself.
pub fn all_profiles(n: usize) -> Vec<Profile> {
    let full = (1u32 << n) - 1;
    let mut out: Vec<Profile> = vec![vec![]];
    for p in 0..n {
        let own = 1u32 << p;
        let mut next = Vec::new();
        for prefix in &out {
            for w in 0..=full {
                if w & own != 0 {
                    let mut q = prefix.clone();
                    q.push(w);
                    next.push(q);
                }
            }
        }
        out = next;
    }
    out
}

fn members(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |p| mask >> p & 1 == 1)
}

/// Everybody in `s` wants everybody else in `s`.
pub fn is_mutual(profile: &[u32], s: u32) -> bool {
    members(s).all(|p| profile[p] & s == s)
}

/// Every block of `finer` sits inside some block of `coarser`.
pub fn refines(finer: &[u32], coarser: &[u32]) -> bool {
    finer.iter().all(|&f| coarser.iter().any(|&c| f & c == f))
}

/// Partitions into mutual coalitions that no other such partition
/// strictly coarsens.
pub fn formed_by_definition(profile: &[u32]) -> BTreeSet<Blocks> {
    let valid: Vec<Blocks> = set_partitions(profile.len())
        .into_iter()
        .filter(|p| p.iter().all(|&s| is_mutual(profile, s)))
        .collect();
    valid
        .iter()
        .filter(|p| !valid.iter().any(|q| q != *p && refines(p, q)))
        .cloned()
        .collect()
}

/// Equilibrium payoff of one of `k` coalitions with unit influence and
/// unit cost, without the closed form.
///
/// A bidder of weight `w` facing a weighted total `t` bids so that its
/// weighted bid is `t - t^2 / w` (nothing once `t >= w`). The total is
/// the root of `sum_i max(0, 1 - t / w_i) = 1`, found by bisection.
pub fn coalition_payoff(k: usize, eta: f64) -> f64 {
    if k == 1 && eta == 0.0 {
        return 1.0;
    }
    let mut weights = vec![1.0; k];
    if eta > 0.0 {
        weights.push(eta);
    }
    let excess = |t: f64| weights.iter().map(|&w| (1.0 - t / w).max(0.0)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0, weights.iter().copied().fold(0.0, f64::max));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let bid = (t - t * t).max(0.0);
    bid / t - bid
}

/// Payoffs for `k = 1..=n`, index `k - 1`.
pub fn payoff_table(n: usize, eta: f64) -> Vec<f64> {
    (1..=n).map(|k| coalition_payoff(k, eta)).collect()
}

/// Closed-form coalition payoff, adamant payoff, coalition action and
/// adamant action with unit influence and cost.
pub fn closed_form(k: usize, eta: f64) -> (f64, f64, f64, f64) {
    let kf = k as f64;
    if eta > (kf - 1.0) / kf && eta > 0.0 {
        let d = (1.0 + kf * eta).powi(2);
        (
            1.0 / d,
            ((1.0 - kf + kf * eta) / (1.0 + kf * eta)).powi(2),
            kf * eta / d,
            kf * (1.0 - kf + kf * eta) / d,
        )
    } else {
        (1.0 / (kf * kf), 0.0, (kf - 1.0) / (kf * kf), 0.0)
    }
}

/// All profiles of `n` players with the partitions each forms.
pub struct FormationTable {
    pub n: usize,
    pub formed: BTreeMap<Profile, BTreeSet<Blocks>>,
}

impl FormationTable {
    pub fn new(n: usize) -> Self {
        FormationTable {
            n,
            formed: all_profiles(n)
                .into_iter()
                .map(|p| {
                    let f = formed_by_definition(&p);
                    (p, f)
                })
                .collect(),
        }
    }

    /// Worst Shapley share of `player` over the partitions `profile` forms.
    pub fn share(&self, profile: &Profile, player: usize, payoffs: &[f64]) -> f64 {
        self.formed[profile]
            .iter()
            .map(|blocks| {
                let block = blocks.iter().find(|&&b| b >> player & 1 == 1).unwrap();
                payoffs[blocks.len() - 1] / block.count_ones() as f64
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_nash(&self, profile: &Profile, payoffs: &[f64]) -> bool {
        let full = (1u32 << self.n) - 1;
        (0..self.n).all(|p| {
            let current = self.share(profile, p, payoffs);
            (0..=full).filter(|w| w >> p & 1 == 1).all(|w| {
                let mut dev = profile.clone();
                dev[p] = w;
                self.share(&dev, p, payoffs) <= current + 1e-12
            })
        })
    }

    pub fn nash_profiles(&self, payoffs: &[f64]) -> Vec<Profile> {
        self.formed
            .keys()
            .filter(|p| self.is_nash(p, payoffs))
            .cloned()
            .collect()
    }
}

/// Display label of a partition: class by coalition count and shape,
/// degree sign when the adamant player gets nothing.
pub fn label(blocks: &[u32], n: usize, eta: f64) -> String {
    let k = blocks.len();
    let mut sizes: Vec<u32> = blocks.iter().map(|b| b.count_ones()).collect();
    sizes.sort_unstable();
    let class = if k == 1 {
        "GC".to_string()
    } else if k == n {
        "ALC".to_string()
    } else if n == 4 && sizes == [2, 2] {
        "TTC".to_string()
    } else {
        format!("P{k}")
    };
    let significant = eta > 0.0 && eta > (k as f64 - 1.0) / k as f64;
    if significant {
        class
    } else {
        format!("{class}°")
    }
}

/// Label of the optimum class for `k` coalitions.
pub fn count_label(k: usize, n: usize, eta: f64) -> String {
    let class = if k == 1 {
        "GC".to_string()
    } else if k == n {
        "ALC".to_string()
    } else {
        format!("P{k}")
    };
    if eta > 0.0 && eta > (k as f64 - 1.0) / k as f64 {
        class
    } else {
        format!("{class}°")
    }
}

/// Best total payoff over every set partition and the coalition counts
/// that reach it.
pub fn social_optimum(n: usize, payoffs: &[f64]) -> (f64, BTreeSet<usize>) {
    let totals: Vec<(usize, f64)> = set_partitions(n)
        .iter()
        .map(|p| (p.len(), p.len() as f64 * payoffs[p.len() - 1]))
        .collect();
    let best = totals.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
    let counts = totals
        .iter()
        .filter(|t| t.1 >= best - 1e-12)
        .map(|t| t.0)
        .collect();
    (best, counts)
}

/// Brute-force regime: equilibrium labels, optimum labels, price of anarchy.
pub fn regime(table: &FormationTable, eta: f64) -> (BTreeSet<String>, BTreeSet<String>, f64) {
    let n = table.n;
    let payoffs = payoff_table(n, eta);
    let mut labels = BTreeSet::new();
    let mut worst = f64::INFINITY;
    for p in table.nash_profiles(&payoffs) {
        for blocks in &table.formed[&p] {
            labels.insert(label(blocks, n, eta));
            worst = worst.min(blocks.len() as f64 * payoffs[blocks.len() - 1]);
        }
    }
    let (best, counts) = social_optimum(n, &payoffs);
    let so = counts.iter().map(|&k| count_label(k, n, eta)).collect();
    (labels, so, best / worst)
}

/// Relabels `profile` by `perm` (player `p` becomes `perm[p]`, 0-based).
pub fn relabel(profile: &[u32], perm: &[usize]) -> Profile {
    let map = |mask: u32| members(mask).fold(0u32, |acc, p| acc | 1 << perm[p]);
    let mut out = vec![0; profile.len()];
    for (p, &w) in profile.iter().enumerate() {
        out[perm[p]] = map(w);
    }
    out
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(pos, n - 1);
            out.push(p);
        }
    }
    out
}

/// Number of relabeling classes of profiles, by counting fixed points.
pub fn orbit_count(n: usize) -> usize {
    let perms = permutations(n);
    let profiles = all_profiles(n);
    let fixed: usize = perms
        .iter()
        .map(|g| profiles.iter().filter(|p| relabel(p, g) == **p).count())
        .sum();
    assert_eq!(fixed % perms.len(), 0);
    fixed / perms.len()
}
