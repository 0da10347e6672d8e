//! Domain vocabulary: game configuration, coalitions, partitions of the
//! cooperating players, strategy profiles and partition labels.
//!
//! Players are numbered `1..=n` in every public API. Internally a set of
//! players is a `u32` bitmask where player `p` occupies bit `p - 1`.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;

use crate::error::{Error, Result};

/// Largest number of cooperating players a bitmask can hold.
pub const MAX_PLAYERS: usize = 31;

pub(crate) fn full_mask(n: usize) -> u32 {
    (1u32 << n) - 1
}

pub(crate) fn bit(player: usize) -> u32 {
    1u32 << (player - 1)
}

pub(crate) fn members_of(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |b| mask >> b & 1 == 1).map(|b| b + 1)
}

/// Applies a 0-based relabeling `perm` (old index -> new index) to a mask.
pub(crate) fn relabel_mask(mask: u32, perm: &[usize]) -> u32 {
    perm.iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .fold(0, |acc, (_, &to)| acc | 1 << to)
}

pub(crate) fn permutations(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0..n).permutations(n)
}

fn format_members(mask: u32, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(out, "{}", members_of(mask).join(","))
}

fn parse_members(text: &str, what: &'static str) -> Result<Vec<usize>> {
    let err = || Error::Parse {
        what,
        input: text.to_string(),
    };
    text.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|_| err()))
        .collect()
}

fn mask_from_members(members: &[usize], n: usize) -> Result<u32> {
    let mut mask = 0u32;
    for &p in members {
        if p == 0 || p > n {
            return Err(Error::PlayerOutOfRange { player: p, n });
        }
        if mask & bit(p) != 0 {
            return Err(Error::InvalidPartition(format!("player {p} listed twice")));
        }
        mask |= bit(p);
    }
    Ok(mask)
}

/// Parameters of one game instance.
///
/// `eta` is the adamant player's influence relative to a cooperating
/// player. The adamant player is present exactly when `eta > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GameConfig {
    n: usize,
    eta: f64,
    lambda: f64,
    lambda0: f64,
    gamma: f64,
    action_cap: f64,
    adamant_present: bool,
}

impl GameConfig {
    /// Unit influence and cost for the cooperating players. `eta == 0`
    /// describes a game without the adamant player.
    pub fn new(n: usize, eta: f64) -> Result<Self> {
        Self::with_influence(n, 1.0, eta, 1.0)
    }

    pub fn without_adamant(n: usize) -> Result<Self> {
        Self::new(n, 0.0)
    }

    /// Explicit influence factors and cost. The action cap defaults to
    /// `2n / gamma`.
    pub fn with_influence(n: usize, lambda: f64, lambda0: f64, gamma: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma must be positive, got {gamma}"
            )));
        }
        let config = GameConfig {
            n,
            eta: lambda0 / lambda,
            lambda,
            lambda0,
            gamma,
            action_cap: 2.0 * n as f64 / gamma,
            adamant_present: lambda0 > 0.0,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_action_cap(mut self, cap: f64) -> Result<Self> {
        self.action_cap = cap;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n == 0 || self.n > MAX_PLAYERS {
            return bad(format!("n must be in 1..={MAX_PLAYERS}, got {}", self.n));
        }
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return bad(format!(
                "eta must be finite and nonnegative, got {}",
                self.eta
            ));
        }
        if !(self.lambda0.is_finite() && self.lambda0 >= 0.0) {
            return bad(format!("lambda0 must be nonnegative, got {}", self.lambda0));
        }
        if (self.eta - self.lambda0 / self.lambda).abs() > 1e-12 * self.eta.max(1.0) {
            return bad("eta must equal lambda0 / lambda".into());
        }
        if (self.eta == 0.0) == self.adamant_present {
            return bad("the adamant player is present exactly when eta > 0".into());
        }
        if !(self.action_cap > self.n as f64 / self.gamma) {
            return bad(format!(
                "action cap {} must exceed n / gamma = {}",
                self.action_cap,
                self.n as f64 / self.gamma
            ));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn action_cap(&self) -> f64 {
        self.action_cap
    }
    pub fn adamant_present(&self) -> bool {
        self.adamant_present
    }

    /// Whether the adamant player earns a positive payoff against `k`
    /// cooperating coalitions: `eta > (k - 1) / k`, strictly.
    pub fn is_significant(&self, k: usize) -> bool {
        self.adamant_present && self.eta > (k - 1) as f64 / k as f64
    }
}

/// A nonempty set of cooperating players.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coalition(u32);

impl Coalition {
    pub fn new(members: &[usize]) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidPartition("empty coalition".into()));
        }
        mask_from_members(members, MAX_PLAYERS).map(Coalition)
    }

    pub fn from_mask(mask: u32) -> Result<Self> {
        if mask == 0 || mask >> MAX_PLAYERS != 0 {
            return Err(Error::InvalidPartition(format!(
                "bad coalition mask {mask:#b}"
            )));
        }
        Ok(Coalition(mask))
    }

    pub fn mask(self) -> u32 {
        self.0
    }
    pub fn members(self) -> Vec<usize> {
        members_of(self.0).collect()
    }
    pub fn size(self) -> usize {
        self.0.count_ones() as usize
    }
    pub fn contains(self, player: usize) -> bool {
        (1..=MAX_PLAYERS).contains(&player) && self.0 & bit(player) != 0
    }
    pub fn smallest(self) -> usize {
        self.0.trailing_zeros() as usize + 1
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        format_members(self.0, f)?;
        f.write_str("}")
    }
}

/// A partition of the cooperating players `1..=n`. The adamant player is
/// always a singleton and is not stored.
///
/// Blocks are kept sorted by smallest member, so two equal partitions
/// have identical representations.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CPartition {
    n: usize,
    blocks: Vec<u32>,
}

impl CPartition {
    pub fn new(n: usize, coalitions: &[Coalition]) -> Result<Self> {
        Self::from_masks(n, coalitions.iter().map(|c| c.mask()).collect())
    }

    pub fn from_members(n: usize, coalitions: &[&[usize]]) -> Result<Self> {
        let masks = coalitions
            .iter()
            .map(|c| mask_from_members(c, n))
            .collect::<Result<Vec<_>>>()?;
        Self::from_masks(n, masks)
    }

    pub fn from_masks(n: usize, mut blocks: Vec<u32>) -> Result<Self> {
        if n == 0 || n > MAX_PLAYERS {
            return Err(Error::InvalidPartition(format!("n = {n} out of range")));
        }
        let mut seen = 0u32;
        for &b in &blocks {
            if b == 0 {
                return Err(Error::InvalidPartition("empty coalition".into()));
            }
            if seen & b != 0 {
                return Err(Error::InvalidPartition("coalitions overlap".into()));
            }
            seen |= b;
        }
        if seen != full_mask(n) {
            return Err(Error::InvalidPartition(format!(
                "coalitions do not cover exactly the players 1..={n}"
            )));
        }
        blocks.sort_by_key(|b| b.trailing_zeros());
        Ok(CPartition { n, blocks })
    }

    /// Unchecked constructor for blocks already known to be a partition.
    pub(crate) fn from_blocks_unchecked(n: usize, mut blocks: Vec<u32>) -> Self {
        blocks.sort_by_key(|b| b.trailing_zeros());
        CPartition { n, blocks }
    }

    pub fn grand(n: usize) -> Result<Self> {
        Self::from_masks(n, vec![full_mask(n)])
    }

    pub fn all_alone(n: usize) -> Result<Self> {
        Self::from_masks(n, (1..=n).map(bit).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of cooperating coalitions.
    pub fn k(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[u32] {
        &self.blocks
    }

    pub fn coalitions(&self) -> impl Iterator<Item = Coalition> + '_ {
        self.blocks.iter().map(|&b| Coalition(b))
    }

    /// Coalition sizes in ascending order.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self
            .blocks
            .iter()
            .map(|b| b.count_ones() as usize)
            .collect();
        s.sort_unstable();
        s
    }

    /// Size of the largest coalition.
    pub fn m_star(&self) -> usize {
        self.blocks
            .iter()
            .map(|b| b.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn coalition_of(&self, player: usize) -> Result<Coalition> {
        if player == 0 || player > self.n {
            return Err(Error::PlayerOutOfRange { player, n: self.n });
        }
        Ok(Coalition(self.block_of(player)))
    }

    pub(crate) fn block_of(&self, player: usize) -> u32 {
        *self
            .blocks
            .iter()
            .find(|&&b| b & bit(player) != 0)
            .expect("partition covers every player")
    }

    /// The same partition with players renamed by a 0-based permutation.
    pub fn relabel(&self, perm: &[usize]) -> CPartition {
        Self::from_blocks_unchecked(
            self.n,
            self.blocks.iter().map(|&b| relabel_mask(b, perm)).collect(),
        )
    }
}

impl fmt::Display for CPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.coalitions().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for CPartition {
    type Err = Error;

    /// Parses `"{1,2}|{3}"`. The player count is the largest member.
    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::Parse {
            what: "partition",
            input: s.to_string(),
        };
        let groups = s
            .split('|')
            .map(|part| {
                let inner = part
                    .trim()
                    .strip_prefix('{')
                    .and_then(|p| p.strip_suffix('}'))
                    .ok_or_else(err)?;
                parse_members(inner, "partition")
            })
            .collect::<Result<Vec<_>>>()?;
        let n = groups.iter().flatten().copied().max().ok_or_else(err)?;
        let refs: Vec<&[usize]> = groups.iter().map(Vec::as_slice).collect();
        Self::from_members(n, &refs)
    }
}

/// One wish-set per cooperating player. Player `i` always wishes to be
/// with itself.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StrategyProfile {
    wishes: Vec<u32>,
}

impl StrategyProfile {
    pub fn new(wishes: &[&[usize]]) -> Result<Self> {
        let n = wishes.len();
        let masks = wishes
            .iter()
            .map(|w| {
                let mut m = 0;
                for &p in w.iter() {
                    if p == 0 || p > n {
                        return Err(Error::PlayerOutOfRange { player: p, n });
                    }
                    m |= bit(p);
                }
                Ok(m)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_masks(masks)
    }

    pub fn from_masks(wishes: Vec<u32>) -> Result<Self> {
        let n = wishes.len();
        if n == 0 || n > MAX_PLAYERS {
            return Err(Error::InvalidProfile(format!("n = {n} out of range")));
        }
        for (i, &w) in wishes.iter().enumerate() {
            if w & !full_mask(n) != 0 {
                return Err(Error::InvalidProfile(format!(
                    "player {} wishes for a player outside 1..={n}",
                    i + 1
                )));
            }
            if w & bit(i + 1) == 0 {
                return Err(Error::InvalidProfile(format!(
                    "player {} must belong to its own wish-set",
                    i + 1
                )));
            }
        }
        Ok(StrategyProfile { wishes })
    }

    pub(crate) fn from_masks_unchecked(wishes: Vec<u32>) -> Self {
        StrategyProfile { wishes }
    }

    /// Every player wishes to stay alone.
    pub fn all_alone(n: usize) -> Result<Self> {
        Self::from_masks((1..=n).map(bit).collect())
    }

    /// Every player wishes for everyone.
    pub fn grand(n: usize) -> Result<Self> {
        Self::from_masks(vec![full_mask(n); n])
    }

    /// Each player wishes for exactly its own coalition in `partition`.
    /// This profile forms `partition` and nothing else.
    pub fn generating(partition: &CPartition) -> Self {
        StrategyProfile {
            wishes: (1..=partition.n()).map(|p| partition.block_of(p)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.wishes.len()
    }

    pub fn masks(&self) -> &[u32] {
        &self.wishes
    }

    /// Wish-set of `player` (1-based) as a bitmask.
    pub fn wish_mask(&self, player: usize) -> u32 {
        self.wishes[player - 1]
    }

    pub fn wish(&self, player: usize) -> Vec<usize> {
        members_of(self.wishes[player - 1]).collect()
    }

    /// The profile with `player`'s wish-set replaced.
    pub fn with_wish(&self, player: usize, mask: u32) -> Result<Self> {
        let n = self.n();
        if player == 0 || player > n {
            return Err(Error::PlayerOutOfRange { player, n });
        }
        let mut wishes = self.wishes.clone();
        wishes[player - 1] = mask;
        Self::from_masks(wishes)
    }

    /// The same profile with players renamed by a 0-based permutation.
    pub fn relabel(&self, perm: &[usize]) -> StrategyProfile {
        let mut wishes = vec![0; self.n()];
        for (i, &w) in self.wishes.iter().enumerate() {
            wishes[perm[i]] = relabel_mask(w, perm);
        }
        StrategyProfile { wishes }
    }
}

impl fmt::Display for StrategyProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &w) in self.wishes.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            format_members(w, f)?;
        }
        Ok(())
    }
}

impl FromStr for StrategyProfile {
    type Err = Error;

    /// Parses `"1,2;1,2,3;1,2,3"`.
    fn from_str(s: &str) -> Result<Self> {
        let sets = s
            .split(';')
            .map(|part| parse_members(part, "strategy profile"))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&[usize]> = sets.iter().map(Vec::as_slice).collect();
        Self::new(&refs)
    }
}

/// Lexicographically least relabeling of `profile`, comparing the
/// sequence of wish-set bitmasks. Equal outputs mean the inputs differ
/// only by renaming players.
///
/// Cost grows as `n!`; intended for `n <= 8`.
pub fn canonicalize_profile(profile: &StrategyProfile) -> StrategyProfile {
    permutations(profile.n())
        .map(|perm| profile.relabel(&perm))
        .min()
        .expect("at least one permutation")
}

/// Shape of a partition, ignoring which players sit where.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PartitionClass {
    /// One coalition of everybody.
    Grand,
    /// `k` coalitions, neither grand nor all-alone.
    Split(usize),
    /// Two coalitions of two players (four players only).
    TwoTwo,
    /// Every player alone.
    AllAlone,
}

impl PartitionClass {
    pub fn of(partition: &CPartition) -> Self {
        let (n, k) = (partition.n(), partition.k());
        if k == 1 {
            PartitionClass::Grand
        } else if k == n {
            PartitionClass::AllAlone
        } else if n == 4 && partition.sizes() == [2, 2] {
            PartitionClass::TwoTwo
        } else {
            PartitionClass::Split(k)
        }
    }

    /// Class named only from the coalition count.
    pub fn from_count(n: usize, k: usize) -> Self {
        if k == 1 {
            PartitionClass::Grand
        } else if k == n {
            PartitionClass::AllAlone
        } else {
            PartitionClass::Split(k)
        }
    }
}

impl fmt::Display for PartitionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PartitionClass::Grand => f.write_str("GC"),
            PartitionClass::Split(k) => write!(f, "P{k}"),
            PartitionClass::TwoTwo => f.write_str("TTC"),
            PartitionClass::AllAlone => f.write_str("ALC"),
        }
    }
}

/// Partition class plus whether the adamant player earns anything there.
/// Displays as `"GC"`, `"P2°"`, `"TTC"`, `"ALC°"` and so on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartitionLabel {
    pub class: PartitionClass,
    pub significant: bool,
}

impl PartitionLabel {
    pub fn display(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for PartitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.class)?;
        if !self.significant {
            f.write_str("°")?;
        }
        Ok(())
    }
}

pub fn classify(partition: &CPartition, config: &GameConfig) -> Result<PartitionLabel> {
    if partition.n() != config.n() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} players, configuration has {}",
            partition.n(),
            config.n()
        )));
    }
    Ok(PartitionLabel {
        class: PartitionClass::of(partition),
        significant: config.is_significant(partition.k()),
    })
}
