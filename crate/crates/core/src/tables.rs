//! Reference regime tables: for each range of `eta`, the equilibrium
//! partitions, the socially optimal classes and the price of anarchy.
//!
//! Row ranges use exact thresholds. The rounded constants they are
//! usually quoted with are kept next to them, and [`check_table`] reports
//! any quoted constant that sits more than [`BOUNDARY_TOL`] away from the
//! exact threshold or from the nearest regime switch found numerically.

use std::collections::BTreeSet;
use std::fmt;

use crate::equilibrium::analyze;
use crate::error::{Error, Result};
use crate::model::GameConfig;

/// Allowed distance between a quoted boundary constant and the switch.
pub const BOUNDARY_TOL: f64 = 5e-3;
/// Allowed absolute deviation of the price of anarchy from a row formula.
pub const POA_TOL: f64 = 1e-9;

/// Exact regime thresholds.
pub mod thresholds {
    /// Three players: the grand coalition stops being an equilibrium.
    pub fn grand_exit_three() -> f64 {
        2.0 / 3f64.sqrt() - 1.0
    }
    pub fn sqrt2_minus_1() -> f64 {
        2f64.sqrt() - 1.0
    }
    /// A pair next to singletons (or two pairs) stops being stable.
    pub fn pair_exit() -> f64 {
        (3.0 - 2f64.sqrt()) / (2.0 * 2f64.sqrt())
    }
    pub fn inv_sqrt2() -> f64 {
        1.0 / 2f64.sqrt()
    }
    pub fn one_plus_sqrt2() -> f64 {
        1.0 + 2f64.sqrt()
    }
    pub fn one_plus_sqrt3() -> f64 {
        1.0 + 3f64.sqrt()
    }
}

/// Every regime threshold up to six players, each shifted by `+-0.02`,
/// plus a spread of small, moderate and large values.
pub fn verification_grid() -> Vec<f64> {
    use thresholds::*;
    let edges = [
        grand_exit_three(),
        sqrt2_minus_1(),
        0.5,
        pair_exit(),
        2.0 / 3.0,
        inv_sqrt2(),
        0.75,
        0.8,
        5.0 / 6.0,
        one_plus_sqrt2(),
        one_plus_sqrt3(),
    ];
    let mut grid: Vec<f64> = edges.iter().flat_map(|&e| [e - 0.02, e + 0.02]).collect();
    grid.extend([1e-3, 0.1, 0.3, 1.0, 2.0, 5.0, 1e3]);
    grid.sort_by(f64::total_cmp);
    grid
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableId {
    TwoPlayers,
    ThreePlayers,
    FourPlayers,
    /// Five or six players.
    Large(usize),
    NoAdamant,
}

impl TableId {
    pub fn all() -> [TableId; 5] {
        [
            TableId::TwoPlayers,
            TableId::ThreePlayers,
            TableId::FourPlayers,
            TableId::Large(5),
            TableId::NoAdamant,
        ]
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableId::TwoPlayers => f.write_str("n2"),
            TableId::ThreePlayers => f.write_str("n3"),
            TableId::FourPlayers => f.write_str("n4"),
            TableId::Large(n) => write!(f, "large(n={n})"),
            TableId::NoAdamant => f.write_str("noadamant"),
        }
    }
}

/// One end of a row's `eta` range.
#[derive(Debug, Clone, PartialEq)]
pub struct Bound {
    pub value: f64,
    pub closed: bool,
    /// The constant as usually quoted, e.g. `"0.707"`.
    pub quoted: String,
    pub quoted_value: f64,
    /// Closed form of `value`, e.g. `"1/sqrt(2)"`.
    pub closed_form: String,
}

fn bound(value: f64, closed: bool, quoted: &str, closed_form: &str) -> Bound {
    Bound {
        value,
        closed,
        quoted: quoted.to_string(),
        quoted_value: quoted.parse().unwrap_or(value),
        closed_form: closed_form.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowDomain {
    /// Adamant player present; `None` bounds mean `0` (open) and infinity.
    Eta {
        lo: Option<Bound>,
        hi: Option<Bound>,
    },
    /// No adamant player; checked at each listed `n`.
    Absent { n_values: Vec<usize> },
}

pub struct TableRow {
    pub index: usize,
    pub n: usize,
    pub domain: RowDomain,
    pub ne: Vec<&'static str>,
    pub so: Vec<&'static str>,
    pub poa_formula: &'static str,
    poa: Box<dyn Fn(f64, usize) -> f64 + Send + Sync>,
}

impl TableRow {
    pub fn expected_poa(&self, eta: f64, n: usize) -> f64 {
        (self.poa)(eta, n)
    }

    pub fn range_text(&self) -> String {
        match &self.domain {
            RowDomain::Eta { lo, hi } => {
                range_text(lo.as_ref(), hi.as_ref(), |b| b.closed_form.clone())
            }
            RowDomain::Absent { n_values } => format!("eta = 0, n in {n_values:?}"),
        }
    }

    pub fn quoted_range_text(&self) -> String {
        match &self.domain {
            RowDomain::Eta { lo, hi } => range_text(lo.as_ref(), hi.as_ref(), |b| b.quoted.clone()),
            RowDomain::Absent { .. } => self.range_text(),
        }
    }
}

fn range_text(lo: Option<&Bound>, hi: Option<&Bound>, show: impl Fn(&Bound) -> String) -> String {
    let left = match lo {
        Some(b) => format!("{}{}", if b.closed { "[" } else { "(" }, show(b)),
        None => "(0".to_string(),
    };
    let right = match hi {
        Some(b) => format!("{}{}", show(b), if b.closed { "]" } else { ")" }),
        None => "inf)".to_string(),
    };
    format!("{left}, {right}")
}

type Poa = Box<dyn Fn(f64, usize) -> f64 + Send + Sync>;

fn row(
    index: usize,
    n: usize,
    lo: Option<Bound>,
    hi: Option<Bound>,
    ne: &[&'static str],
    so: &[&'static str],
    poa_formula: &'static str,
    poa: Poa,
) -> TableRow {
    TableRow {
        index,
        n,
        domain: RowDomain::Eta { lo, hi },
        ne: ne.to_vec(),
        so: so.to_vec(),
        poa_formula,
        poa,
    }
}

fn grand_vs_alone(eta: f64, n: usize) -> f64 {
    let nf = n as f64;
    ((1.0 + nf * eta) / (1.0 + eta)).powi(2) / nf
}

/// Rows of a reference table, top to bottom.
pub fn reference_table(id: TableId) -> Result<Vec<TableRow>> {
    use thresholds::*;
    let s2m1 = |closed| bound(sqrt2_minus_1(), closed, "0.414", "sqrt(2)-1");
    let half = |closed| bound(0.5, closed, "0.5", "1/2");
    let inv_s2 = |closed| bound(inv_sqrt2(), closed, "0.707", "1/sqrt(2)");
    let pair = |closed| bound(pair_exit(), closed, "0.57", "(3-sqrt(2))/(2 sqrt(2))");
    let ops2 = |closed| bound(one_plus_sqrt2(), closed, "2.414", "1+sqrt(2)");
    Ok(match id {
        TableId::TwoPlayers => vec![
            row(
                1,
                2,
                Some(inv_s2(true)),
                None,
                &["GC", "ALC"],
                &["GC"],
                "(1/2)((1+2eta)/(1+eta))^2",
                Box::new(grand_vs_alone),
            ),
            row(
                2,
                2,
                Some(half(false)),
                Some(inv_s2(true)),
                &["ALC"],
                &["P2"],
                "1",
                Box::new(|_, _| 1.0),
            ),
            row(
                3,
                2,
                Some(s2m1(true)),
                Some(half(true)),
                &["ALC°"],
                &["P2°"],
                "1",
                Box::new(|_, _| 1.0),
            ),
            row(
                4,
                2,
                None,
                Some(s2m1(true)),
                &["GC", "ALC°"],
                &["GC"],
                "2/(1+eta)^2",
                Box::new(|e, _| 2.0 / (1.0 + e).powi(2)),
            ),
        ],
        TableId::ThreePlayers => {
            let two_thirds = bound(2.0 / 3.0, false, "0.57", "2/3");
            vec![
                row(
                    1,
                    3,
                    Some(bound(one_plus_sqrt3(), true, "2.732", "1+sqrt(3)")),
                    None,
                    &["GC", "P2", "ALC"],
                    &["GC"],
                    "(1/3)((1+3eta)/(1+eta))^2",
                    Box::new(grand_vs_alone),
                ),
                row(
                    2,
                    3,
                    Some(ops2(true)),
                    Some(bound(one_plus_sqrt3(), true, "2.732", "1+sqrt(3)")),
                    &["P2", "ALC"],
                    &["GC"],
                    "(1/3)((1+3eta)/(1+eta))^2",
                    Box::new(grand_vs_alone),
                ),
                row(
                    3,
                    3,
                    Some(inv_s2(true)),
                    Some(ops2(true)),
                    &["ALC"],
                    &["GC"],
                    "(1/3)((1+3eta)/(1+eta))^2",
                    Box::new(grand_vs_alone),
                ),
                row(
                    4,
                    3,
                    Some(two_thirds),
                    Some(inv_s2(true)),
                    &["ALC"],
                    &["P2"],
                    "(2/3)((1+3eta)/(1+2eta))^2",
                    Box::new(|e, _| 2.0 / 3.0 * ((1.0 + 3.0 * e) / (1.0 + 2.0 * e)).powi(2)),
                ),
                row(
                    5,
                    3,
                    Some(half(false)),
                    Some(pair(true)),
                    &["P2", "ALC°"],
                    &["P2"],
                    "6/(1+2eta)^2",
                    Box::new(|e, _| 6.0 / (1.0 + 2.0 * e).powi(2)),
                ),
                row(
                    6,
                    3,
                    Some(s2m1(true)),
                    Some(half(true)),
                    &["P2°", "ALC°"],
                    &["P2°"],
                    "3/2",
                    Box::new(|_, _| 1.5),
                ),
                row(
                    7,
                    3,
                    Some(bound(grand_exit_three(), false, "0.15", "2/sqrt(3)-1")),
                    Some(s2m1(true)),
                    &["P2°", "ALC°"],
                    &["GC"],
                    "3/(1+eta)^2",
                    Box::new(|e, _| 3.0 / (1.0 + e).powi(2)),
                ),
                row(
                    8,
                    3,
                    None,
                    Some(bound(grand_exit_three(), true, "0.15", "2/sqrt(3)-1")),
                    &["GC", "P2°", "ALC°"],
                    &["GC"],
                    "3/(1+eta)^2",
                    Box::new(|e, _| 3.0 / (1.0 + e).powi(2)),
                ),
            ]
        }
        TableId::FourPlayers => {
            let three_quarters = |closed| bound(0.75, closed, "0.75", "3/4");
            vec![
                row(
                    1,
                    4,
                    Some(ops2(true)),
                    None,
                    &["TTC", "ALC"],
                    &["GC"],
                    "(1/4)((1+4eta)/(1+eta))^2",
                    Box::new(grand_vs_alone),
                ),
                row(
                    2,
                    4,
                    Some(three_quarters(false)),
                    Some(ops2(true)),
                    &["ALC"],
                    &["GC"],
                    "(1/4)((1+4eta)/(1+eta))^2",
                    Box::new(grand_vs_alone),
                ),
                row(
                    3,
                    4,
                    Some(inv_s2(true)),
                    Some(three_quarters(true)),
                    &["ALC°"],
                    &["GC"],
                    "4/(1+eta)^2",
                    Box::new(|e, _| 4.0 / (1.0 + e).powi(2)),
                ),
                row(
                    4,
                    4,
                    Some(pair(false)),
                    Some(inv_s2(true)),
                    &["ALC°"],
                    &["P2"],
                    "8/(1+2eta)^2",
                    Box::new(|e, _| 8.0 / (1.0 + 2.0 * e).powi(2)),
                ),
                row(
                    5,
                    4,
                    Some(half(false)),
                    Some(pair(true)),
                    &["TTC", "ALC°"],
                    &["P2"],
                    "8/(1+2eta)^2",
                    Box::new(|e, _| 8.0 / (1.0 + 2.0 * e).powi(2)),
                ),
                row(
                    6,
                    4,
                    Some(s2m1(true)),
                    Some(half(true)),
                    &["TTC°", "ALC°"],
                    &["P2°"],
                    "2",
                    Box::new(|_, _| 2.0),
                ),
                row(
                    7,
                    4,
                    None,
                    Some(s2m1(true)),
                    &["TTC°", "ALC°"],
                    &["GC"],
                    "4/(1+eta)^2",
                    Box::new(|e, _| 4.0 / (1.0 + e).powi(2)),
                ),
            ]
        }
        TableId::Large(n) => {
            if !(5..=6).contains(&n) {
                return Err(Error::InvalidConfig(format!(
                    "the large-n table is checked for n = 5 or 6, got {n}"
                )));
            }
            let edge = (n - 1) as f64 / n as f64;
            let quoted = format!("{edge}");
            let upper = |closed| bound(edge, closed, &quoted, "(n-1)/n");
            vec![
                row(
                    1,
                    n,
                    Some(upper(false)),
                    None,
                    &["ALC"],
                    &["GC"],
                    "(1/n)((1+n eta)/(1+eta))^2",
                    Box::new(grand_vs_alone),
                ),
                row(
                    2,
                    n,
                    Some(inv_s2(true)),
                    Some(upper(true)),
                    &["ALC°"],
                    &["GC"],
                    "n/(1+eta)^2",
                    Box::new(|e, n| n as f64 / (1.0 + e).powi(2)),
                ),
                row(
                    3,
                    n,
                    Some(half(false)),
                    Some(inv_s2(true)),
                    &["ALC°"],
                    &["P2"],
                    "2n/(1+2eta)^2",
                    Box::new(|e, n| 2.0 * n as f64 / (1.0 + 2.0 * e).powi(2)),
                ),
                row(
                    4,
                    n,
                    Some(s2m1(true)),
                    Some(half(true)),
                    &["ALC°"],
                    &["P2°"],
                    "n/2",
                    Box::new(|_, n| n as f64 / 2.0),
                ),
                row(
                    5,
                    n,
                    None,
                    Some(s2m1(true)),
                    &["ALC°"],
                    &["GC"],
                    "n/(1+eta)^2",
                    Box::new(|e, n| n as f64 / (1.0 + e).powi(2)),
                ),
            ]
        }
        TableId::NoAdamant => {
            let absent = |index, n_values: Vec<usize>, ne: &[&'static str], formula| TableRow {
                index,
                n: n_values[0],
                domain: RowDomain::Absent { n_values },
                ne: ne.to_vec(),
                so: vec!["GC°"],
                poa_formula: formula,
                poa: Box::new(|_, n| n as f64),
            };
            vec![
                absent(1, vec![2], &["GC°", "ALC°"], "2"),
                absent(2, vec![3], &["GC°", "P2°", "ALC°"], "3"),
                absent(3, vec![4], &["GC°", "TTC°", "ALC°"], "4"),
                absent(4, vec![5, 6], &["ALC°"], "n"),
            ]
        }
    })
}

/// Quoted class names use `P{k}` for any `k`; with `k == n` that is the
/// all-alone partition.
fn normalize(label: &str, n: usize) -> String {
    let all_alone = format!("P{n}");
    match label.strip_suffix('°') {
        Some(base) if base == all_alone => "ALC°".to_string(),
        None if label == all_alone => "ALC".to_string(),
        _ => label.to_string(),
    }
}

fn label_set(labels: &[&str], n: usize) -> BTreeSet<String> {
    labels.iter().map(|l| normalize(l, n)).collect()
}

/// Computed equilibrium and optimum labels plus price of anarchy.
#[derive(Debug, Clone, PartialEq)]
pub struct Regime {
    pub ne: BTreeSet<String>,
    pub so: BTreeSet<String>,
    pub poa: f64,
}

pub fn regime(config: &GameConfig) -> Result<Regime> {
    let report = analyze(config)?;
    Ok(Regime {
        ne: report.ne_labels().iter().map(|l| l.to_string()).collect(),
        so: report
            .so_partition_classes
            .iter()
            .map(|l| l.to_string())
            .collect(),
        poa: report.poa,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleCheck {
    pub n: usize,
    pub eta: f64,
    pub expected_ne: BTreeSet<String>,
    pub expected_so: BTreeSet<String>,
    pub expected_poa: f64,
    pub computed: Regime,
}

impl SampleCheck {
    pub fn pass(&self) -> bool {
        self.computed.ne == self.expected_ne
            && self.computed.so == self.expected_so
            && (self.computed.poa - self.expected_poa).abs() <= POA_TOL * self.expected_poa.max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowReport {
    pub index: usize,
    pub quoted_range: String,
    pub exact_range: String,
    pub poa_formula: String,
    pub samples: Vec<SampleCheck>,
    /// Quoted constants farther than [`BOUNDARY_TOL`] from the exact bound.
    pub flags: Vec<String>,
}

impl RowReport {
    pub fn pass(&self) -> bool {
        self.samples.iter().all(SampleCheck::pass)
    }
}

/// A quoted boundary constant against the nearest numerically located
/// regime switch.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryCheck {
    pub quoted: String,
    pub quoted_value: f64,
    pub nearest_switch: f64,
    pub within_tolerance: bool,
}

/// A stretch of `eta` that no row covers, with what is computed there.
#[derive(Debug, Clone, PartialEq)]
pub struct Gap {
    pub lo: f64,
    pub hi: f64,
    pub sample: SampleCheck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableReport {
    pub id: TableId,
    pub rows: Vec<RowReport>,
    pub boundaries: Vec<BoundaryCheck>,
    /// Every regime switch located in the scanned range.
    pub switches: Vec<f64>,
    pub gaps: Vec<Gap>,
}

impl TableReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(RowReport::pass)
    }
    pub fn passed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.pass()).count()
    }
}

fn sample(row: &TableRow, n: usize, eta: f64) -> Result<SampleCheck> {
    let config = GameConfig::new(n, eta)?;
    Ok(SampleCheck {
        n,
        eta,
        expected_ne: label_set(&row.ne, n),
        expected_so: label_set(&row.so, n),
        expected_poa: row.expected_poa(eta, n),
        computed: regime(&config)?,
    })
}

/// Interior point and both ends pulled inward by `offset`.
fn sample_points(lo: Option<&Bound>, hi: Option<&Bound>, offset: f64) -> Vec<f64> {
    let lo_v = lo.map_or(0.0, |b| b.value);
    match hi {
        Some(h) => vec![lo_v + offset, 0.5 * (lo_v + h.value), h.value - offset],
        None => vec![lo_v + offset, 2.0 * lo_v + 1.0, 1e3],
    }
}

fn flags_for(bounds: [Option<&Bound>; 2]) -> Vec<String> {
    bounds
        .into_iter()
        .flatten()
        .filter(|b| (b.quoted_value - b.value).abs() > BOUNDARY_TOL)
        .map(|b| {
            format!(
                "quoted {} differs from exact {} = {:.6} by {:.4}",
                b.quoted,
                b.closed_form,
                b.value,
                (b.quoted_value - b.value).abs()
            )
        })
        .collect()
}

/// Regime switches of `(equilibrium labels, optimum labels)` in `[lo, hi]`,
/// located by a grid scan followed by bisection.
pub fn regime_switches(n: usize, lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    let signature = |eta: f64| -> Result<(BTreeSet<String>, BTreeSet<String>)> {
        let r = regime(&GameConfig::new(n, eta)?)?;
        Ok((r.ne, r.so))
    };
    let mut switches = Vec::new();
    let mut a = lo;
    let mut sa = signature(a)?;
    while a < hi {
        let b = (a + step).min(hi);
        let sb = signature(b)?;
        if sa != sb {
            let (mut l, mut r) = (a, b);
            while r - l > 1e-11 {
                let m = 0.5 * (l + r);
                if signature(m)? == sa {
                    l = m;
                } else {
                    r = m;
                }
            }
            switches.push(0.5 * (l + r));
        }
        a = b;
        sa = sb;
    }
    Ok(switches)
}

/// Samples every row inside its exact range (ends pulled in by `offset`),
/// compares against the row, locates regime switches and matches them to
/// the quoted constants.
pub fn check_table(id: TableId, offset: f64) -> Result<TableReport> {
    if !(offset > 0.0 && offset < 0.01) {
        return Err(Error::InvalidConfig(format!(
            "sampling offset must be in (0, 0.01), got {offset}"
        )));
    }
    let rows = reference_table(id)?;
    let mut reports = Vec::new();
    for row in &rows {
        let (samples, flags) = match &row.domain {
            RowDomain::Eta { lo, hi } => (
                sample_points(lo.as_ref(), hi.as_ref(), offset)
                    .into_iter()
                    .map(|eta| sample(row, row.n, eta))
                    .collect::<Result<Vec<_>>>()?,
                flags_for([lo.as_ref(), hi.as_ref()]),
            ),
            RowDomain::Absent { n_values } => (
                n_values
                    .iter()
                    .map(|&n| {
                        let config = GameConfig::without_adamant(n)?;
                        Ok(SampleCheck {
                            n,
                            eta: 0.0,
                            expected_ne: label_set(&row.ne, n),
                            expected_so: label_set(&row.so, n),
                            expected_poa: row.expected_poa(0.0, n),
                            computed: regime(&config)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?,
                Vec::new(),
            ),
        };
        reports.push(RowReport {
            index: row.index,
            quoted_range: row.quoted_range_text(),
            exact_range: row.range_text(),
            poa_formula: row.poa_formula.to_string(),
            samples,
            flags,
        });
    }

    let mut ranges: Vec<(f64, f64, &TableRow)> = rows
        .iter()
        .filter_map(|r| match &r.domain {
            RowDomain::Eta { lo, hi } => Some((
                lo.as_ref().map_or(0.0, |b| b.value),
                hi.as_ref().map_or(f64::INFINITY, |b| b.value),
                r,
            )),
            RowDomain::Absent { .. } => None,
        })
        .collect();
    ranges.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut gaps = Vec::new();
    for pair in ranges.windows(2) {
        let (hi, lo) = (pair[0].1, pair[1].0);
        if lo - hi > 1e-12 {
            let eta = 0.5 * (lo + hi);
            gaps.push(Gap {
                lo: hi,
                hi: lo,
                sample: sample(pair[1].2, pair[1].2.n, eta)?,
            });
        }
    }

    let (switches, boundaries) = if ranges.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        let n = ranges[0].2.n;
        let switches = regime_switches(n, 0.01, 4.0, 0.005)?;
        let quoted: BTreeSet<(u64, String)> = ranges
            .iter()
            .flat_map(|(_, _, r)| match &r.domain {
                RowDomain::Eta { lo, hi } => vec![lo.clone(), hi.clone()],
                RowDomain::Absent { .. } => Vec::new(),
            })
            .flatten()
            .map(|b| (b.quoted_value.to_bits(), b.quoted))
            .collect();
        let boundaries = quoted
            .into_iter()
            .map(|(bits, quoted)| {
                let quoted_value = f64::from_bits(bits);
                let nearest = switches
                    .iter()
                    .copied()
                    .min_by(|a, b| {
                        (a - quoted_value)
                            .abs()
                            .total_cmp(&(b - quoted_value).abs())
                    })
                    .unwrap_or(f64::NAN);
                BoundaryCheck {
                    quoted,
                    quoted_value,
                    nearest_switch: nearest,
                    within_tolerance: (nearest - quoted_value).abs() <= BOUNDARY_TOL,
                }
            })
            .collect();
        (switches, boundaries)
    };

    Ok(TableReport {
        id,
        rows: reports,
        boundaries,
        switches,
        gaps,
    })
}
