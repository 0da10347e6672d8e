//! Payoffs of the proportional resource-sharing game once a partition is
//! fixed.
//!
//! Each coalition acts as one aggregate bidder with influence `lambda`
//! against the adamant bidder with influence `lambda0`. A bidder with
//! weight `w` and action `a` receives `w a / (total weighted action)` and
//! pays `gamma a`. Equilibrium payoffs have a closed form. A numeric
//! best-response solver provides an independent check.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{CPartition, Coalition, GameConfig, StrategyProfile};
use crate::partition::formed_partitions;

/// Equilibrium payoffs and aggregate actions for one partition.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionOutcome {
    /// Coalitions in canonical order; aligned with the two vectors below.
    pub coalitions: Vec<Coalition>,
    pub coalition_utilities: Vec<f64>,
    pub coalition_actions: Vec<f64>,
    pub adamant_utility: f64,
    pub adamant_action: f64,
    pub significant: bool,
}

/// Per-player payoffs, indexed by player.
#[derive(Debug, Clone, PartialEq)]
pub struct ShareVector {
    shares: Vec<f64>,
}

impl ShareVector {
    /// Share of `player` (1-based).
    pub fn get(&self, player: usize) -> f64 {
        self.shares[player - 1]
    }
    pub fn as_slice(&self) -> &[f64] {
        &self.shares
    }
    pub fn total_over(&self, coalition: Coalition) -> f64 {
        coalition.members().into_iter().map(|p| self.get(p)).sum()
    }
}

/// Equilibrium payoff of each cooperating coalition when there are `k`.
pub fn coalition_value(k: usize, config: &GameConfig) -> f64 {
    let kf = k as f64;
    if config.is_significant(k) {
        1.0 / (1.0 + kf * config.eta()).powi(2)
    } else {
        1.0 / (kf * kf)
    }
}

/// Equilibrium payoff of the adamant player against `k` coalitions.
pub fn adamant_value(k: usize, config: &GameConfig) -> f64 {
    if !config.is_significant(k) {
        return 0.0;
    }
    let (kf, eta) = (k as f64, config.eta());
    ((1.0 - kf + kf * eta) / (1.0 + kf * eta)).powi(2)
}

/// Equilibrium aggregate actions `(per coalition, adamant)`.
pub fn equilibrium_actions(k: usize, config: &GameConfig) -> (f64, f64) {
    let (kf, lam, lam0, gam) = (k as f64, config.lambda(), config.lambda0(), config.gamma());
    if config.is_significant(k) {
        let denom = gam * (lam + kf * lam0).powi(2);
        (
            kf * lam * lam0 / denom,
            kf * lam * ((1.0 - kf) * lam + kf * lam0) / denom,
        )
    } else {
        ((kf - 1.0) / (gam * kf * kf), 0.0)
    }
}

fn check_players(partition: &CPartition, config: &GameConfig) -> Result<()> {
    if partition.n() != config.n() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} players, configuration has {}",
            partition.n(),
            config.n()
        )));
    }
    Ok(())
}

pub fn coalition_utilities(
    partition: &CPartition,
    config: &GameConfig,
) -> Result<PartitionOutcome> {
    check_players(partition, config)?;
    let k = partition.k();
    let value = coalition_value(k, config);
    let (action, adamant_action) = equilibrium_actions(k, config);
    Ok(PartitionOutcome {
        coalitions: partition.coalitions().collect(),
        coalition_utilities: vec![value; k],
        coalition_actions: vec![action; k],
        adamant_utility: adamant_value(k, config),
        adamant_action,
        significant: config.is_significant(k),
    })
}

/// Equal split of the coalition payoff among its members.
pub(crate) fn share_of(partition: &CPartition, player: usize, config: &GameConfig) -> f64 {
    let size = partition.block_of(player).count_ones() as f64;
    coalition_value(partition.k(), config) / size
}

pub fn player_share(partition: &CPartition, config: &GameConfig) -> Result<ShareVector> {
    check_players(partition, config)?;
    Ok(ShareVector {
        shares: (1..=partition.n())
            .map(|p| share_of(partition, p, config))
            .collect(),
    })
}

/// Each player's worst share across every partition the profile forms.
pub fn profile_utility(profile: &StrategyProfile, config: &GameConfig) -> Result<ShareVector> {
    if profile.n() != config.n() {
        return Err(Error::InvalidProfile(format!(
            "profile has {} players, configuration has {}",
            profile.n(),
            config.n()
        )));
    }
    let formed = formed_partitions(profile);
    Ok(ShareVector {
        shares: (1..=profile.n())
            .map(|p| {
                formed
                    .partitions
                    .iter()
                    .map(|part| share_of(part, p, config))
                    .fold(f64::INFINITY, f64::min)
            })
            .collect(),
    })
}

/// Total payoff of the cooperating players under `partition`.
pub fn coalition_sum(partition: &CPartition, config: &GameConfig) -> Result<f64> {
    check_players(partition, config)?;
    Ok(coalition_sum_for_count(partition.k(), config))
}

pub(crate) fn coalition_sum_for_count(k: usize, config: &GameConfig) -> f64 {
    k as f64 * coalition_value(k, config)
}

/// Numeric equilibrium of the aggregate game with `k` coalitions.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub coalition_utilities: Vec<f64>,
    pub coalition_actions: Vec<f64>,
    pub adamant_utility: f64,
    pub adamant_action: f64,
    pub significant: bool,
    pub iterations: usize,
    /// Largest best-response gap relative to the largest coalition action.
    pub residual: f64,
}

pub const ORACLE_MAX_ITERATIONS: usize = 10_000;

struct AggregateGame {
    /// Influence weights; index 0 is the adamant player.
    weights: Vec<f64>,
    gamma: f64,
    cap: f64,
}

impl AggregateGame {
    /// Maximizer of `w a / (w a + d) - gamma a` over `[0, cap]`.
    fn best_response(&self, i: usize, others: f64) -> f64 {
        let w = self.weights[i];
        if w == 0.0 || others <= 0.0 {
            return 0.0;
        }
        ((others / (self.gamma * w)).sqrt() - others / w).clamp(0.0, self.cap)
    }

    fn gap(&self, a: &DVector<f64>) -> DVector<f64> {
        let total: f64 = self.weights.iter().zip(a.iter()).map(|(w, x)| w * x).sum();
        DVector::from_iterator(
            a.len(),
            (0..a.len()).map(|i| self.best_response(i, total - self.weights[i] * a[i]) - a[i]),
        )
    }

    fn coalition_scale(a: &DVector<f64>) -> f64 {
        a.iter().skip(1).fold(0.0, |m: f64, &x| m.max(x))
    }

    /// Best-response gap measured against the coalitions' action scale,
    /// so the degenerate point where everybody bids nothing never looks
    /// converged.
    fn merit(a: &DVector<f64>, gap: &DVector<f64>) -> f64 {
        let scale = Self::coalition_scale(a);
        if scale > 0.0 {
            gap.amax() / scale
        } else {
            f64::INFINITY
        }
    }

    fn jacobian(&self, a: &DVector<f64>, gap: &DVector<f64>) -> DMatrix<f64> {
        let m = a.len();
        let floor = 1e-6 * Self::coalition_scale(a);
        let mut jac = DMatrix::zeros(m, m);
        for j in 0..m {
            let h = 1e-7 * a[j].max(floor);
            let mut up = a.clone();
            up[j] += h;
            let column = if a[j] > h {
                let mut down = a.clone();
                down[j] -= h;
                (self.gap(&up) - self.gap(&down)) / (2.0 * h)
            } else {
                (self.gap(&up) - gap) / h
            };
            jac.set_column(j, &column);
        }
        jac
    }
}

/// Solves the aggregate game with `k` coalitions numerically, without
/// using the closed form.
///
/// Newton steps on the best-response gap with a finite-difference
/// Jacobian and backtracking; when no step improves the relative gap, a
/// half step toward the best response is taken. Starts from all actions
/// `1 / (2 gamma)`.
pub fn numeric_rsg_ne(k: usize, config: &GameConfig, tol: f64) -> Result<OracleSolution> {
    if k == 0 || k > config.n() {
        return Err(Error::InvalidConfig(format!(
            "k must be in 1..={}, got {k}",
            config.n()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    if !config.adamant_present() && k == 1 {
        // A lone bidder wins everything with any positive action: payoff 1
        // is a supremum reached only in the limit of vanishing action.
        return Ok(OracleSolution {
            coalition_utilities: vec![1.0],
            coalition_actions: vec![0.0],
            adamant_utility: 0.0,
            adamant_action: 0.0,
            significant: false,
            iterations: 0,
            residual: 0.0,
        });
    }

    let mut weights = vec![config.lambda0()];
    weights.extend(std::iter::repeat_n(config.lambda(), k));
    let game = AggregateGame {
        weights,
        gamma: config.gamma(),
        cap: config.action_cap(),
    };

    let start = 1.0 / (2.0 * config.gamma());
    let mut a = DVector::from_iterator(
        k + 1,
        game.weights
            .iter()
            .map(|&w| if w > 0.0 { start } else { 0.0 }),
    );
    let mut iterations = 0;
    let mut gap = game.gap(&a);
    let mut residual = AggregateGame::merit(&a, &gap);
    while residual >= tol {
        if iterations == ORACLE_MAX_ITERATIONS || !residual.is_finite() {
            return Err(Error::NonConvergence {
                iterations,
                residual,
            });
        }
        let newton = game.jacobian(&a, &gap).lu().solve(&(-&gap));
        let mut next = None;
        if let Some(step) = newton {
            let mut t = 1.0;
            while t > 1e-10 {
                let cand = (&a + &step * t).map(|x| x.max(0.0));
                let positive = cand.iter().skip(1).all(|&x| x > 0.0);
                if positive {
                    let cand_gap = game.gap(&cand);
                    let cand_merit = AggregateGame::merit(&cand, &cand_gap);
                    if cand_merit < (1.0 - 1e-4 * t) * residual {
                        next = Some((cand, cand_gap, cand_merit));
                        break;
                    }
                }
                t *= 0.5;
            }
        }
        let (na, ngap, nres) = next.unwrap_or_else(|| {
            let cand = &a + &gap * 0.5;
            let cand_gap = game.gap(&cand);
            let cand_merit = AggregateGame::merit(&cand, &cand_gap);
            (cand, cand_gap, cand_merit)
        });
        a = na;
        gap = ngap;
        residual = nres;
        iterations += 1;
    }

    let total: f64 = game.weights.iter().zip(a.iter()).map(|(w, x)| w * x).sum();
    let payoff = |i: usize| game.weights[i] * a[i] / total - game.gamma * a[i];
    let adamant_action = a[0];
    Ok(OracleSolution {
        coalition_utilities: (1..=k).map(payoff).collect(),
        coalition_actions: a.iter().skip(1).copied().collect(),
        adamant_utility: payoff(0),
        adamant_action,
        significant: adamant_action > 1e-9 * AggregateGame::coalition_scale(&a),
        iterations,
        residual,
    })
}
