//! Text formats: pairwise matrices and metric tables (CSV), scenarios (JSON)
//! and simulation reports (CSV).
//!
//! All formats are UTF-8 with `\n` line endings and `.` as decimal separator.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::membership::RouteMetrics;
use crate::rank::{PairwiseMatrix, RouteId, RouteRanking};
use crate::sim::{Link, PolicyRun, Scenario, SimReport, TickRecord, Topology};

/// Fractional digits used when writing matrices.
pub const MATRIX_DIGITS: usize = 9;
/// Fractional digits used when writing reports.
pub const REPORT_DIGITS: usize = 4;

/// Diagonal entries this close to 1 are accepted and stored as exactly 1.
const DIAGONAL_TOLERANCE: f64 = 1e-9;

/// Rounds to `digits` fractional digits, halves away from zero.
pub fn round_half_away(x: f64, digits: usize) -> f64 {
    let scale = 10f64.powi(digits as i32);
    (x * scale).round() / scale
}

/// `x` rendered with exactly `digits` fractional digits, halves away from zero.
pub fn format_fixed(x: f64, digits: usize) -> String {
    let r = round_half_away(x, digits);
    // avoid "-0.0000"
    let r = if r == 0.0 { 0.0 } else { r };
    format!("{r:.digits$}")
}

/// Non-blank lines with their 1-based line numbers and comma-split fields
/// paired with their 1-based starting columns.
fn csv_rows(text: &str) -> impl Iterator<Item = (usize, Vec<(usize, &str)>)> {
    text.split('\n').enumerate().filter_map(|(i, line)| {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            return None;
        }
        let mut column = 1;
        let fields = line
            .split(',')
            .map(|f| {
                let start = column;
                column += f.chars().count() + 1;
                let trimmed = f.trim_start();
                (
                    start + f.chars().count() - trimmed.chars().count(),
                    trimmed.trim_end(),
                )
            })
            .collect();
        Some((i + 1, fields))
    })
}

fn parse_number(line: usize, column: usize, field: &str) -> Result<f64> {
    field
        .parse::<f64>()
        .map_err(|_| Error::parse(line, column, format!("expected a number, found {field:?}")))
}

/// Parses a square comma-separated table, optionally preceded by a header
/// row of route ids. Without a header the routes are named `r1..rn`.
pub fn parse_matrix(text: &str) -> Result<PairwiseMatrix> {
    let mut rows = csv_rows(text).peekable();
    let Some((first_line, first)) = rows.peek().cloned() else {
        return Err(Error::parse(1, 1, "empty matrix"));
    };
    let header = first.iter().any(|(_, f)| f.parse::<f64>().is_err());
    let ids: Option<Vec<RouteId>> = if header {
        rows.next();
        let mut seen = HashSet::new();
        let mut ids = Vec::with_capacity(first.len());
        for (col, f) in &first {
            if f.is_empty() {
                return Err(Error::parse(first_line, *col, "empty route id"));
            }
            if !seen.insert(*f) {
                return Err(Error::parse(
                    first_line,
                    *col,
                    format!("duplicate route id {f}"),
                ));
            }
            ids.push(RouteId::from(*f));
        }
        Some(ids)
    } else {
        None
    };

    let mut width = ids.as_ref().map(Vec::len);
    let mut values: Vec<Vec<f64>> = Vec::new();
    let mut last_line = first_line;
    for (line, fields) in rows {
        last_line = line;
        let n = *width.get_or_insert(fields.len());
        if fields.len() != n {
            return Err(Error::parse(
                line,
                1,
                format!("row has {} fields, expected {n}", fields.len()),
            ));
        }
        if values.len() == n {
            return Err(Error::parse(
                line,
                1,
                format!("more than {n} rows in a {n}-column matrix"),
            ));
        }
        let row = fields
            .iter()
            .map(|(col, f)| parse_number(line, *col, f))
            .collect::<Result<Vec<_>>>()?;
        values.push(row);
    }
    let n = width.unwrap_or(0);
    if values.len() != n || n == 0 {
        return Err(Error::parse(
            last_line + 1,
            1,
            format!("matrix has {} rows, expected {n}", values.len()),
        ));
    }

    for (i, row) in values.iter_mut().enumerate() {
        let d = row[i];
        if (d - 1.0).abs() > DIAGONAL_TOLERANCE {
            return Err(Error::invariant(format!(
                "diagonal entry ({}, {}) = {d} is not 1",
                i + 1,
                i + 1
            )));
        }
        row[i] = 1.0;
    }
    let ids = ids.unwrap_or_else(|| RouteId::default_ids(n));
    PairwiseMatrix::new(ids, values)
}

/// Header row of route ids, then one row per route at 9 fractional digits.
pub fn write_matrix(p: &PairwiseMatrix) -> String {
    let mut out = join_line(p.route_ids().iter().map(|id| id.to_string()));
    for i in 0..p.len() {
        out += &join_line(p.row(i).iter().map(|v| format_fixed(*v, MATRIX_DIGITS)));
    }
    out
}

fn join_line(fields: impl Iterator<Item = String>) -> String {
    let mut line = fields.collect::<Vec<_>>().join(",");
    line.push('\n');
    line
}

const METRICS_HEADER: [&str; 4] = ["route_id", "delay_ms", "load", "lifetime_s"];

/// Parses `route_id,delay_ms,load,lifetime_s` rows; the header is required.
pub fn parse_metrics(text: &str) -> Result<Vec<RouteMetrics>> {
    let mut rows = csv_rows(text);
    let Some((line, header)) = rows.next() else {
        return Err(Error::parse(1, 1, "missing header row"));
    };
    let names: Vec<&str> = header.iter().map(|(_, f)| *f).collect();
    if names != METRICS_HEADER {
        return Err(Error::parse(
            line,
            1,
            format!("header must be {}", METRICS_HEADER.join(",")),
        ));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, fields) in rows {
        if fields.len() != 4 {
            return Err(Error::parse(
                line,
                1,
                format!("row has {} fields, expected 4", fields.len()),
            ));
        }
        let (col, id) = fields[0];
        if id.is_empty() {
            return Err(Error::parse(line, col, "empty route id"));
        }
        if !seen.insert(id) {
            return Err(Error::invariant(format!(
                "duplicate route id {id} on line {line}"
            )));
        }
        let num = |k: usize| parse_number(line, fields[k].0, fields[k].1);
        out.push(RouteMetrics::new(id, num(1)?, num(2)?, num(3)?)?);
    }
    if out.is_empty() {
        return Err(Error::parse(line + 1, 1, "no metric rows"));
    }
    Ok(out)
}

pub fn write_metrics(metrics: &[RouteMetrics]) -> String {
    let mut out = join_line(METRICS_HEADER.iter().map(|s| s.to_string()));
    for m in metrics {
        out += &format!(
            "{},{},{},{}\n",
            m.route_id, m.delay_ms, m.load, m.lifetime_s
        );
    }
    out
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkDoc {
    a: String,
    b: String,
    delay_ms: f64,
    load: f64,
    lifetime_s: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    nodes: Vec<String>,
    links: Vec<LinkDoc>,
    source: String,
    destination: String,
    hop_limit: usize,
    duration_s: f64,
    seed: u64,
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let doc: ScenarioDoc = serde_json::from_str(text)
        .map_err(|e| Error::parse(e.line(), e.column(), e.to_string()))?;
    let links = doc.links.into_iter().map(|l| Link {
        a: l.a,
        b: l.b,
        delay_ms: l.delay_ms,
        load: l.load,
        lifetime_s: l.lifetime_s,
    });
    let topology = Topology::new(doc.nodes, links)?;
    Scenario::new(
        topology,
        doc.source,
        doc.destination,
        doc.hop_limit,
        doc.duration_s,
        doc.seed,
    )
}

/// Pretty-printed JSON with nodes and links in sorted order.
pub fn write_scenario(s: &Scenario) -> String {
    let doc = ScenarioDoc {
        nodes: s.topology().nodes().map(str::to_owned).collect(),
        links: s
            .topology()
            .links()
            .map(|l| LinkDoc {
                a: l.a.clone(),
                b: l.b.clone(),
                delay_ms: l.delay_ms,
                load: l.load,
                lifetime_s: l.lifetime_s,
            })
            .collect(),
        source: s.source().to_owned(),
        destination: s.destination().to_owned(),
        hop_limit: s.hop_limit(),
        duration_s: s.duration_s(),
        seed: s.seed(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("scenario serializes");
    out.push('\n');
    out
}

const SUMMARY_HEADER: [&str; 6] = [
    "policy",
    "offered",
    "delivered",
    "delivery_ratio",
    "mean_delay_ms",
    "reselections",
];
const LOG_HEADER: [&str; 4] = ["policy", "tick", "route", "delay_ms"];
const MISSING: &str = "NA";

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new()
        .flexible(true)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 output")
}

/// One summary row per policy; with `include_log`, a blank line and the
/// per-tick log follow. Decimals carry 4 fractional digits.
pub fn write_report(report: &SimReport, include_log: bool) -> String {
    let mut w = csv_writer();
    w.write_record(SUMMARY_HEADER).expect("in-memory write");
    for run in &report.runs {
        w.write_record([
            run.policy.clone(),
            run.offered.to_string(),
            run.delivered.to_string(),
            format_fixed(run.delivery_ratio(), REPORT_DIGITS),
            run.mean_delay_ms
                .map_or_else(|| MISSING.to_owned(), |d| format_fixed(d, REPORT_DIGITS)),
            run.reselections.to_string(),
        ])
        .expect("in-memory write");
    }
    let mut out = finish(w);
    if include_log {
        let mut w = csv_writer();
        w.write_record(LOG_HEADER).expect("in-memory write");
        for run in &report.runs {
            for rec in &run.log {
                w.write_record([
                    run.policy.clone(),
                    rec.tick.to_string(),
                    rec.route
                        .as_ref()
                        .map(|r| r.to_string())
                        .unwrap_or_default(),
                    rec.delay_ms
                        .map(|d| format_fixed(d, REPORT_DIGITS))
                        .unwrap_or_default(),
                ])
                .expect("in-memory write");
            }
        }
        out.push('\n');
        out += &finish(w);
    }
    out
}

/// Reads a report written by [`write_report`]. Decimal fields come back at
/// the 4-digit precision they were written with.
pub fn parse_report(text: &str) -> Result<SimReport> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut report = SimReport::default();
    let mut in_log = false;
    let mut seen_header = false;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, 1, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let fields: Vec<&str> = record.iter().collect();
        if !seen_header {
            if fields != SUMMARY_HEADER {
                return Err(Error::parse(line, 1, "missing report summary header"));
            }
            seen_header = true;
            continue;
        }
        if fields == LOG_HEADER {
            in_log = true;
            continue;
        }
        let int = |k: usize| {
            fields[k].parse::<usize>().map_err(|_| {
                Error::parse(
                    line,
                    k + 1,
                    format!("expected a count, found {:?}", fields[k]),
                )
            })
        };
        let num = |k: usize| {
            fields[k].parse::<f64>().map_err(|_| {
                Error::parse(
                    line,
                    k + 1,
                    format!("expected a number, found {:?}", fields[k]),
                )
            })
        };
        if !in_log {
            if fields.len() != SUMMARY_HEADER.len() {
                return Err(Error::parse(line, 1, "summary row needs 6 fields"));
            }
            let offered = int(1)?;
            let delivered = int(2)?;
            let ratio = num(3)?;
            let mean_delay_ms = if fields[4] == MISSING {
                None
            } else {
                Some(num(4)?)
            };
            let run = PolicyRun {
                policy: fields[0].to_owned(),
                offered,
                delivered,
                mean_delay_ms,
                reselections: int(5)?,
                log: Vec::new(),
            };
            if delivered > offered
                || format_fixed(run.delivery_ratio(), REPORT_DIGITS)
                    != format_fixed(ratio, REPORT_DIGITS)
                || mean_delay_ms.is_some() != (delivered > 0)
            {
                return Err(Error::invariant(format!(
                    "summary row on line {line} is inconsistent"
                )));
            }
            report.runs.push(run);
        } else {
            if fields.len() != LOG_HEADER.len() {
                return Err(Error::parse(line, 1, "log row needs 4 fields"));
            }
            let tick = fields[1]
                .parse::<u32>()
                .map_err(|_| Error::parse(line, 2, "bad tick"))?;
            let route = (!fields[2].is_empty()).then(|| RouteId::from(fields[2]));
            let delay_ms = if fields[3].is_empty() {
                None
            } else {
                Some(num(3)?)
            };
            let run = report
                .runs
                .iter_mut()
                .find(|r| r.policy == fields[0])
                .ok_or_else(|| {
                    Error::parse(line, 1, format!("log row for unknown policy {}", fields[0]))
                })?;
            run.log.push(TickRecord {
                tick,
                route,
                delay_ms,
            });
        }
    }
    if !seen_header {
        return Err(Error::parse(1, 1, "empty report"));
    }
    Ok(report)
}

/// `rank,route_id,score` rows, best first, scores at 9 fractional digits.
pub fn write_ranking(r: &RouteRanking) -> String {
    let mut out = String::from("rank,route_id,score\n");
    for (k, e) in r.entries().iter().enumerate() {
        out += &format!(
            "{},{},{}\n",
            k + 1,
            e.id,
            format_fixed(e.score, MATRIX_DIGITS)
        );
    }
    out
}
