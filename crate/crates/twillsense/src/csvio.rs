//! Text formats: test-run CSV, fit-parameter tables, metric tables, force
//! sweeps, resistor-graph edge lists and binned-difference exports.
//!
//! The run format is strict: UTF-8 with LF line endings, `#`-prefixed
//! `key=value` metadata lines before the header, the exact header
//! `t_s,d_mm,F_N,R_ohm`, decimal points, no thousands separators.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use twillsense_core::fit::FitParams;
use twillsense_core::metrics::{BinnedDiff, MetricsReport, Settle};
use twillsense_core::network::{EdgeKind, ResistorGraph, SweepPoint};
use twillsense_core::series::{Direction, RunMeta, Sample, Timeline};

pub const TIMELINE_HEADER: &str = "t_s,d_mm,F_N,R_ohm";

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: expected header `{TIMELINE_HEADER}`, found `{found}`")]
    BadHeader { line: usize, found: String },
    #[error("missing header `{TIMELINE_HEADER}`")]
    MissingHeader,
    #[error("line {line}: expected 4 comma-separated fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: `{text}` is not a number")]
    BadNumber { line: usize, text: String },
    #[error("line {line}: time does not increase")]
    NonMonotonicTime { line: usize },
    #[error("line {line}: resistance must be positive")]
    NonPositiveResistance { line: usize },
    #[error("line {line}: bad metadata `{text}` (expected `# key=value`)")]
    BadMeta { line: usize, text: String },
    #[error("line {line}: metadata after the header")]
    LateMeta { line: usize },
    #[error("file holds no samples")]
    Empty,
    #[error("invalid metadata: {0}")]
    BadMetaValue(String),
}

/// Parses a run recording. Metadata defaults: `L0_mm=50`,
/// `jog_rate_mm_s=1.333`, wale direction.
pub fn parse_timeline(text: &str) -> Result<Timeline, ParseError> {
    let mut meta = RunMeta::default();
    let mut samples: Vec<Sample> = Vec::new();
    let mut seen_header = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if seen_header {
                return Err(ParseError::LateMeta { line });
            }
            let body = rest.trim();
            let (key, value) = body
                .split_once('=')
                .ok_or_else(|| ParseError::BadMeta { line, text: body.to_string() })?;
            apply_meta(&mut meta, key.trim(), value.trim())
                .map_err(|e| ParseError::BadMeta { line, text: e })?;
            continue;
        }
        if !seen_header {
            if trimmed != TIMELINE_HEADER {
                return Err(ParseError::BadHeader { line, found: trimmed.to_string() });
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 4 {
            return Err(ParseError::FieldCount { line, found: fields.len() });
        }
        let num = |text: &str| -> Result<f64, ParseError> {
            text.trim()
                .parse::<f64>()
                .map_err(|_| ParseError::BadNumber { line, text: text.to_string() })
        };
        let sample =
            Sample { t: num(fields[0])?, d: num(fields[1])?, f: num(fields[2])?, r: num(fields[3])? };
        if let Some(prev) = samples.last() {
            if !(sample.t > prev.t) {
                return Err(ParseError::NonMonotonicTime { line });
            }
        }
        if !(sample.r > 0.0) {
            return Err(ParseError::NonPositiveResistance { line });
        }
        samples.push(sample);
    }
    if !seen_header {
        return Err(ParseError::MissingHeader);
    }
    if samples.is_empty() {
        return Err(ParseError::Empty);
    }
    Timeline::new(samples, meta).map_err(|e| ParseError::BadMetaValue(e.to_string()))
}

fn apply_meta(meta: &mut RunMeta, key: &str, value: &str) -> Result<(), String> {
    match key {
        "L0_mm" => {
            meta.l0 = value.parse().map_err(|_| format!("L0_mm: `{value}`"))?;
            if !(meta.l0 > 0.0) {
                return Err("L0_mm must be positive".into());
            }
        }
        "jog_rate_mm_s" => {
            meta.jog_rate = value.parse().map_err(|_| format!("jog_rate_mm_s: `{value}`"))?;
        }
        "variant" => meta.variant = Some(value.to_string()),
        "direction" => {
            meta.direction = match value {
                "wale" => Direction::Wale,
                "course" => Direction::Course,
                other => return Err(format!("direction: `{other}` (wale|course)")),
            };
        }
        _ => log::debug!("ignoring unknown metadata key `{key}`"),
    }
    Ok(())
}

/// Serializes a run in the exact format [`parse_timeline`] reads.
pub fn write_timeline(tl: &Timeline) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# L0_mm={}", tl.meta.l0);
    let _ = writeln!(out, "# jog_rate_mm_s={}", tl.meta.jog_rate);
    if let Some(variant) = &tl.meta.variant {
        let _ = writeln!(out, "# variant={variant}");
    }
    let _ = writeln!(
        out,
        "# direction={}",
        match tl.meta.direction {
            Direction::Wale => "wale",
            Direction::Course => "course",
        }
    );
    out.push_str(TIMELINE_HEADER);
    out.push('\n');
    for s in &tl.samples {
        let _ = writeln!(out, "{},{},{},{}", s.t, s.d, s.f, s.r);
    }
    out
}

pub fn read_timeline(path: &Path) -> anyhow::Result<Timeline> {
    let text = fs::read_to_string(path)?;
    Ok(parse_timeline(&text)?)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub const FIT_HEADER: &str = "variant,segment,a,s,d,k,o,r2,converged";

/// One fit-table row in the parameter-table column order.
pub fn fit_row(variant: &str, segment: &str, p: &FitParams, converged: bool) -> String {
    format!(
        "{variant},{segment},{},{},{},{},{},{},{}",
        p.a,
        p.s,
        p.d,
        p.k,
        p.o,
        opt(p.r2),
        converged
    )
}

pub const METRICS_HEADER: &str = "variant,delta_d_05_pct,delta_d_15_pct,r2_conformity,h_pct,\
f_h_N,delta_r_rel_pct,offset_pct,relaxation_pct,drift_pct,t_r_s,t_d_s,jog_half_r2,\
jog_double_r2,flags";

fn settle_cell(s: &Settle) -> String {
    match s {
        Settle::Settled(t) => t.to_string(),
        Settle::NeverSettled => "never".to_string(),
        Settle::NoDwell => String::new(),
    }
}

/// One metric-table row in the results-table column order.
pub fn metrics_row(report: &MetricsReport) -> String {
    let h = report.hysteresis.as_ref();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        report.variant.as_deref().unwrap_or(""),
        opt(report.delta_d_05_pct),
        opt(report.delta_d_15_pct),
        opt(report.r2_conformity),
        opt(h.map(|h| h.h_pct)),
        opt(h.map(|h| h.f_h)),
        opt(report.dynamic_range.and_then(|d| d.mean_pct)),
        opt(report.offset_pct),
        opt(report.relaxation_pct),
        opt(report.drift_pct),
        settle_cell(&report.t_r),
        settle_cell(&report.t_d),
        opt(report.jog_half_r2),
        opt(report.jog_double_r2),
        report.flags.join(";"),
    )
}

pub const SWEEP_HEADER: &str = "force_N,resistance_ohm";

/// Two-column force sweep; open-circuit entries leave the resistance empty.
pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(out, "{},{}", p.force, opt(p.resistance));
    }
    out
}

/// Plain edge list: `node_a node_b resistance kind` per line plus the two
/// terminal lines.
pub fn edge_list(graph: &ResistorGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# nodes {}", graph.node_count);
    for e in &graph.edges {
        let kind = match e.kind {
            EdgeKind::YarnSegment => "segment",
            EdgeKind::Contact => "contact",
        };
        let _ = writeln!(out, "{} {} {} {}", e.a, e.b, e.resistance, kind);
    }
    let ids = |v: &[usize]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, "terminal_top {}", ids(&graph.terminal_top));
    let _ = writeln!(out, "terminal_bottom {}", ids(&graph.terminal_bottom));
    out
}

pub const BINNED_HEADER: &str = "f_center_N,pull_mean,release_mean,abs_diff";

pub fn binned_csv(binned: &BinnedDiff) -> String {
    let mut out = String::from(BINNED_HEADER);
    out.push('\n');
    for bin in &binned.bins {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            bin.f_center,
            opt(bin.pull_mean),
            opt(bin.release_mean),
            opt(bin.abs_diff)
        );
    }
    out
}
