//! Property suite behind the `verify` command.

use clap::Args;
use coalition_forge::equilibrium::social_optimum_brute_force;
use coalition_forge::partition::all_partitions;
use coalition_forge::rsg::coalition_value;
use coalition_forge::tables::verification_grid;
use coalition_forge::{
    analyze, coalition_sum, coalition_utilities, enumerate_nash, is_nash, is_weak_criterion,
    is_weak_exact, no_multi_partition_equilibria, no_weak_equilibrium_partitions, numeric_rsg_ne,
    player_share, social_optimum, CPartition, GameConfig, PartitionClass, Result, StrategyProfile,
};
use rayon::prelude::*;

use crate::Failure;

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Largest player count to check (2 to 6).
    #[arg(long, default_value_t = 6)]
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub cases: usize,
    /// First failing case, if any.
    pub failure: Option<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

fn config(n: usize, eta: f64) -> Result<GameConfig> {
    if eta == 0.0 {
        GameConfig::without_adamant(n)
    } else {
        GameConfig::new(n, eta)
    }
}

/// Every `(n, eta)` pair with `n` in `ns`, over the grid and `eta = 0`.
fn cases(ns: impl Iterator<Item = usize>) -> Vec<(usize, f64)> {
    let mut grid = verification_grid();
    grid.insert(0, 0.0);
    ns.flat_map(|n| grid.iter().map(move |&eta| (n, eta)))
        .collect()
}

/// Runs `test` on every case in parallel and keeps the first failure in
/// case order.
fn check<T: Sync + std::fmt::Debug>(
    name: &'static str,
    cases: Vec<T>,
    test: impl Fn(&T) -> Result<bool> + Sync,
) -> CheckOutcome {
    let failure = cases.par_iter().find_map_first(|case| match test(case) {
        Ok(true) => None,
        Ok(false) => Some(format!("{case:?}")),
        Err(e) => Some(format!("{case:?}: {e}")),
    });
    CheckOutcome {
        name,
        cases: cases.len(),
        failure,
    }
}

fn shares_conserved(partition: &CPartition, config: &GameConfig) -> Result<bool> {
    let outcome = coalition_utilities(partition, config)?;
    let shares = player_share(partition, config)?;
    let per_coalition = partition
        .coalitions()
        .zip(&outcome.coalition_utilities)
        .all(|(c, &u)| (shares.total_over(c) - u).abs() <= 1e-12);
    let total: f64 = shares.as_slice().iter().sum();
    Ok(per_coalition && (total - coalition_sum(partition, config)?).abs() <= 1e-12)
}

pub fn run_suite(n_max: usize) -> Vec<CheckOutcome> {
    let all = || 1..=n_max;
    let large = || 5..=n_max;
    let small = || 1..=n_max.min(4);
    vec![
        check(
            "all-alone profile is always an equilibrium",
            cases(all()),
            |&(n, eta)| is_nash(&StrategyProfile::all_alone(n)?, &config(n, eta)?),
        ),
        check(
            "five or more players: no equilibrium forms several partitions",
            cases(large()),
            |&(n, eta)| no_multi_partition_equilibria(&config(n, eta)?),
        ),
        check(
            "no equilibrium partition is weak",
            cases(all()),
            |&(n, eta)| no_weak_equilibrium_partitions(&config(n, eta)?),
        ),
        check(
            "five or more players settle alone",
            cases(large()),
            |&(n, eta)| {
                let cfg = config(n, eta)?;
                let labels = analyze(&cfg)?.ne_labels();
                Ok(labels.len() == 1
                    && labels[0].class == PartitionClass::AllAlone
                    && labels[0].significant == cfg.is_significant(n))
            },
        ),
        check(
            "weakness criterion implies weakness",
            cases(all()),
            |&(n, eta)| {
                let cfg = config(n, eta)?;
                for p in all_partitions(n).iter().filter(|p| is_weak_criterion(p)) {
                    if !is_weak_exact(p, &cfg)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            },
        ),
        check(
            "five or more players: every other partition is weak",
            large().collect(),
            |&n| {
                Ok(all_partitions(n)
                    .iter()
                    .all(|p| p.k() == n || is_weak_criterion(p)))
            },
        ),
        check(
            "social optimum matches brute force",
            cases(all()),
            |&(n, eta)| {
                let cfg = config(n, eta)?;
                let (value, mut labels) = social_optimum(&cfg);
                let (brute, mut brute_labels) = social_optimum_brute_force(&cfg);
                labels.sort();
                brute_labels.sort();
                Ok((value - brute).abs() <= 1e-12 && labels == brute_labels)
            },
        ),
        check(
            "price of anarchy tends to n at extreme eta",
            (2..=n_max).flat_map(|n| [(n, 1e-3), (n, 1e3)]).collect(),
            |&(n, eta)| Ok((analyze(&config(n, eta)?)?.poa - n as f64).abs() < 0.05 * n as f64),
        ),
        check(
            "shares add up to coalition payoffs",
            cases(all()),
            |&(n, eta)| {
                let cfg = config(n, eta)?;
                for p in all_partitions(n) {
                    if !shares_conserved(&p, &cfg)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            },
        ),
        check(
            "payoffs are continuous at significance thresholds",
            (2..=n_max).collect(),
            |&k| {
                let edge = (k - 1) as f64 / k as f64;
                let below = coalition_value(k, &config(k, edge - 1e-12)?);
                let above = coalition_value(k, &config(k, edge + 1e-12)?);
                Ok((below - above).abs() < 1e-9)
            },
        ),
        check(
            "numeric solver matches closed form",
            cases(all()),
            |&(k, eta)| {
                let cfg = config(k, eta)?;
                let sol = numeric_rsg_ne(k, &cfg, 1e-12)?;
                let expected = coalition_value(k, &cfg);
                Ok(sol
                    .coalition_utilities
                    .iter()
                    .all(|u| (u - expected).abs() < 1e-6))
            },
        ),
        check(
            "symmetry reduction matches the full search",
            cases(small()),
            |&(n, eta)| {
                let cfg = config(n, eta)?;
                Ok(enumerate_nash(&cfg, true)? == enumerate_nash(&cfg, false)?)
            },
        ),
    ]
}

pub fn run_verify(args: &VerifyArgs) -> std::result::Result<(), Failure> {
    if !(2..=6).contains(&args.n_max) {
        return Err(Failure::usage("--n-max must be between 2 and 6"));
    }
    let outcomes = run_suite(args.n_max);
    for o in &outcomes {
        match &o.failure {
            None => println!("PASS {} ({} cases)", o.name, o.cases),
            Some(case) => println!("FAIL {} ({} cases), first failure: {case}", o.name, o.cases),
        }
    }
    let failed = outcomes.iter().filter(|o| !o.passed()).count();
    println!("{}/{} checks pass", outcomes.len() - failed, outcomes.len());
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::check(format!("{failed} checks failed")))
    }
}
