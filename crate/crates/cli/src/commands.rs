//! Subcommand arguments and their implementations.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use coalition_forge::rsg::{adamant_value, coalition_value, equilibrium_actions};
use coalition_forge::tables::{check_table, TableId, TableReport};
use coalition_forge::{analyze, enumerate_nash, numeric_rsg_ne, GameConfig, PartitionLabel};
use rayon::prelude::*;

use crate::record::{write_csv, write_json_lines, ReportRecord};
use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableChoice {
    N2,
    N3,
    N4,
    Large,
    Noadamant,
    All,
}

/// Opens `--out` or falls back to stdout.
fn sink(out: Option<&PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

/// Configuration from `--n`, `--eta` and `--no-adamant`. An `eta` of zero
/// means there is no adamant player.
pub fn config_from(n: usize, eta: Option<f64>, no_adamant: bool) -> Result<GameConfig, Failure> {
    if n == 0 {
        return Err(Failure::usage("--n must be at least 1"));
    }
    let eta = match (eta, no_adamant) {
        (Some(e), true) if e != 0.0 => {
            return Err(Failure::usage(
                "--no-adamant conflicts with a nonzero --eta",
            ))
        }
        (_, true) => 0.0,
        (Some(e), false) => e,
        (None, false) => {
            return Err(Failure::usage(
                "--eta is required unless --no-adamant is given",
            ))
        }
    };
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(Failure::usage(format!(
            "--eta must be a finite number >= 0, got {eta}"
        )));
    }
    Ok(if eta == 0.0 {
        GameConfig::without_adamant(n)?
    } else {
        GameConfig::new(n, eta)?
    })
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Number of cooperating players (1 to 6).
    #[arg(long)]
    pub n: usize,
    /// Strength of the adamant player relative to one cooperating player.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Leave out the adamant player.
    #[arg(long)]
    pub no_adamant: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Enumerate equilibrium profiles up to relabeling (the default).
    #[arg(long, overrides_with = "no_symmetry")]
    pub symmetry: bool,
    /// Enumerate every profile without symmetry reduction (n <= 4).
    #[arg(long, overrides_with = "symmetry")]
    pub no_symmetry: bool,
    /// Accepted for interface stability; every computation is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

type Shape = (PartitionLabel, Vec<usize>);

fn shapes<'a>(
    parts: impl Iterator<Item = &'a (PartitionLabel, coalition_forge::CPartition)>,
) -> BTreeSet<Shape> {
    parts.map(|(l, p)| (*l, p.sizes())).collect()
}

pub fn run_analyze(args: &AnalyzeArgs) -> Result<(), Failure> {
    let config = config_from(args.n, args.eta, args.no_adamant)?;
    let start = Instant::now();
    let report = analyze(&config)?;
    let profiles = enumerate_nash(&config, !args.no_symmetry)?;
    if shapes(profiles.ne_partitions.iter()) != shapes(report.ne_partitions.iter()) {
        return Err(Failure::check(
            "profile enumeration and graph search disagree on the equilibrium partitions",
        ));
    }
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let record = ReportRecord::new(&config, &report).with_runtime(runtime_ms);

    let mut out = sink(args.out.as_ref())?;
    match args.format {
        Format::Json => write_json_lines(&mut out, &[record]).map_err(Failure::io)?,
        Format::Csv => write_csv(&mut out, &[record]).map_err(Failure::io)?,
        Format::Text => {
            let adamant = if config.adamant_present() {
                "adamant player present"
            } else {
                "no adamant player"
            };
            let ne: Vec<String> = report
                .ne_partitions
                .iter()
                .map(|(label, p)| format!("{label} {p}"))
                .collect();
            let text = format!(
                "n = {}, eta = {} ({adamant})\n\
                 equilibrium partitions:   {}\n\
                 equilibrium profiles:     {} up to relabeling\n\
                 social optimum:           {} (total {})\n\
                 worst equilibrium total:  {}\n\
                 price of anarchy:         {}\n\
                 multi-partition profiles: {}\n\
                 runtime:                  {runtime_ms:.1} ms\n",
                config.n(),
                config.eta(),
                ne.join(", "),
                profiles.ne_profiles.len(),
                record.so_partitions.join(", "),
                record.so_value,
                record.worst_ne_sum,
                record.poa,
                if record.multiple_partition_ne {
                    "yes"
                } else {
                    "none"
                },
            );
            out.write_all(text.as_bytes()).map_err(Failure::io)?;
        }
    }
    out.flush().map_err(Failure::io)
}

#[derive(Debug, Args)]
pub struct TablesArgs {
    #[arg(long, value_enum, default_value_t = TableChoice::All)]
    pub which: TableChoice,
    /// How far inside each row's range the edge samples are taken.
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    /// Player count for the `large` table (5 or 6).
    #[arg(long, default_value_t = 5)]
    pub n: usize,
}

fn set_text(set: &BTreeSet<String>) -> String {
    format!("{{{}}}", set.iter().cloned().collect::<Vec<_>>().join(", "))
}

fn write_table(out: &mut dyn Write, report: &TableReport) -> io::Result<()> {
    writeln!(out, "== {} ==", report.id)?;
    for row in &report.rows {
        writeln!(
            out,
            "row {}  {}  exact {}  PoA {}  {}",
            row.index,
            row.quoted_range,
            row.exact_range,
            row.poa_formula,
            if row.pass() { "PASS" } else { "FAIL" }
        )?;
        for flag in &row.flags {
            writeln!(out, "    flag: {flag}")?;
        }
        for s in row.samples.iter().filter(|s| !s.pass()) {
            writeln!(
                out,
                "    mismatch at n = {}, eta = {}: expected NE {} SO {} PoA {}; computed NE {} SO {} PoA {}",
                s.n,
                s.eta,
                set_text(&s.expected_ne),
                set_text(&s.expected_so),
                s.expected_poa,
                set_text(&s.computed.ne),
                set_text(&s.computed.so),
                s.computed.poa
            )?;
        }
    }
    for b in &report.boundaries {
        writeln!(
            out,
            "boundary {}: nearest switch {:.6} ({:+.4}) {}",
            b.quoted,
            b.nearest_switch,
            b.nearest_switch - b.quoted_value,
            if b.within_tolerance { "ok" } else { "FLAGGED" }
        )?;
    }
    for g in &report.gaps {
        writeln!(
            out,
            "uncovered ({:.6}, {:.6}): NE {} SO {} PoA {:.6}",
            g.lo,
            g.hi,
            set_text(&g.sample.computed.ne),
            set_text(&g.sample.computed.so),
            g.sample.computed.poa
        )?;
    }
    writeln!(
        out,
        "{}: {}/{} rows pass",
        report.id,
        report.passed_rows(),
        report.rows.len()
    )
}

pub fn run_tables(args: &TablesArgs) -> Result<(), Failure> {
    let ids: Vec<TableId> = match args.which {
        TableChoice::N2 => vec![TableId::TwoPlayers],
        TableChoice::N3 => vec![TableId::ThreePlayers],
        TableChoice::N4 => vec![TableId::FourPlayers],
        TableChoice::Large => vec![TableId::Large(args.n)],
        TableChoice::Noadamant => vec![TableId::NoAdamant],
        TableChoice::All => TableId::all()
            .into_iter()
            .map(|id| {
                if let TableId::Large(_) = id {
                    TableId::Large(args.n)
                } else {
                    id
                }
            })
            .collect(),
    };
    let reports = ids
        .into_par_iter()
        .map(|id| check_table(id, args.tolerance))
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = io::stdout().lock();
    for report in &reports {
        write_table(&mut out, report).map_err(Failure::io)?;
    }
    let failed: Vec<String> = reports
        .iter()
        .filter(|r| !r.pass())
        .map(|r| r.id.to_string())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::check(format!(
            "row mismatches in {}",
            failed.join(", ")
        )))
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub eta_min: f64,
    #[arg(long)]
    pub eta_max: f64,
    /// Number of samples, endpoints included.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Space samples evenly in log(eta).
    #[arg(long)]
    pub log: bool,
    #[arg(long, value_enum, default_value_t = SweepFormat::Csv)]
    pub format: SweepFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Sample points of a sweep; the last one is exactly `max`.
pub fn sweep_points(min: f64, max: f64, steps: usize, log: bool) -> Result<Vec<f64>, Failure> {
    if steps < 2 {
        return Err(Failure::usage("--steps must be at least 2"));
    }
    if !(min.is_finite() && max.is_finite() && min >= 0.0 && max >= min) {
        return Err(Failure::usage(format!(
            "need 0 <= eta-min <= eta-max, got [{min}, {max}]"
        )));
    }
    if log && min <= 0.0 {
        return Err(Failure::usage("--log needs a positive --eta-min"));
    }
    let last = (steps - 1) as f64;
    Ok((0..steps)
        .map(|i| {
            let t = i as f64 / last;
            if i == steps - 1 {
                max
            } else if log {
                (min.ln() + t * (max.ln() - min.ln())).exp()
            } else {
                min + t * (max - min)
            }
        })
        .collect())
}

/// One record per sample, computed in parallel and returned in order.
pub fn sweep_records(n: usize, etas: &[f64]) -> Result<Vec<ReportRecord>, Failure> {
    etas.par_iter()
        .map(|&eta| {
            let config = config_from(n, Some(eta), false)?;
            Ok(ReportRecord::new(&config, &analyze(&config)?))
        })
        .collect()
}

pub fn run_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let etas = sweep_points(args.eta_min, args.eta_max, args.steps, args.log)?;
    let records = sweep_records(args.n, &etas)?;
    let mut out = sink(args.out.as_ref())?;
    match args.format {
        SweepFormat::Csv => write_csv(&mut out, &records).map_err(Failure::io)?,
        SweepFormat::Json => write_json_lines(&mut out, &records).map_err(Failure::io)?,
    }
    out.flush().map_err(Failure::io)
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Number of coalitions.
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub eta: f64,
    /// Marginal cost of bidding.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Influence factor of each coalition.
    #[arg(long, default_value_t = 1.0)]
    pub lambda: f64,
    /// Largest accepted deviation between the two solutions.
    #[arg(long, default_value_t = 1e-8)]
    pub tolerance: f64,
}

pub fn run_oracle(args: &OracleArgs) -> Result<(), Failure> {
    if args.k == 0 {
        return Err(Failure::usage("--k must be at least 1"));
    }
    if !(args.eta.is_finite() && args.eta >= 0.0) {
        return Err(Failure::usage(format!(
            "--eta must be a finite number >= 0, got {}",
            args.eta
        )));
    }
    if !(args.tolerance > 0.0) {
        return Err(Failure::usage("--tolerance must be positive"));
    }
    let config =
        GameConfig::with_influence(args.k, args.lambda, args.lambda * args.eta, args.gamma)?;
    let solver_tol = (args.tolerance * 1e-3).max(1e-13);
    let numeric = numeric_rsg_ne(args.k, &config, solver_tol)?;

    let (coalition_action, adamant_action) = equilibrium_actions(args.k, &config);
    let rows = [
        (
            "coalition utility",
            coalition_value(args.k, &config),
            numeric.coalition_utilities.clone(),
        ),
        (
            "coalition action",
            coalition_action,
            numeric.coalition_actions.clone(),
        ),
        (
            "adamant utility",
            adamant_value(args.k, &config),
            vec![numeric.adamant_utility],
        ),
        (
            "adamant action",
            adamant_action,
            vec![numeric.adamant_action],
        ),
    ];
    let mut out = io::stdout().lock();
    let mut deviation: f64 = 0.0;
    let write =
        |out: &mut dyn Write, line: String| out.write_all(line.as_bytes()).map_err(Failure::io);
    write(
        &mut out,
        format!(
            "k = {}, eta = {}, gamma = {}, lambda = {}; adamant {}\n{:<18} {:>22} {:>22} {:>12}\n",
            args.k,
            args.eta,
            args.gamma,
            args.lambda,
            if config.is_significant(args.k) {
                "significant"
            } else {
                "insignificant"
            },
            "",
            "closed form",
            "numeric",
            "deviation"
        ),
    )?;
    for (name, closed, values) in &rows {
        for (i, value) in values.iter().enumerate() {
            let d = (closed - value).abs();
            deviation = deviation.max(d);
            let label = if values.len() > 1 {
                format!("{name} {}", i + 1)
            } else {
                name.to_string()
            };
            write(
                &mut out,
                format!("{label:<18} {closed:>22.15e} {value:>22.15e} {d:>12.3e}\n"),
            )?;
        }
    }
    write(
        &mut out,
        format!(
            "max deviation {deviation:.3e} after {} iterations (relative gap {:.3e})\n",
            numeric.iterations, numeric.residual
        ),
    )?;
    if deviation < args.tolerance {
        Ok(())
    } else {
        Err(Failure::check(format!(
            "deviation {deviation:.3e} is not below tolerance {:.3e}",
            args.tolerance
        )))
    }
}
