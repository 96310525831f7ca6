//! Implementations of the CLI subcommands.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};

use twillsense_core::knit::{build_grid, build_variant, variant, VariantName};
use twillsense_core::metrics::{
    analyze_timeline, binned_diff, jog_conformity, AnalysisConfig, HystNorm, MetricsReport,
    RunAnalysis,
};
use twillsense_core::network::{
    compile_graph, sweep_force, CompileOptions, ContactParams, LoadState, PressureRule,
};
use twillsense_core::series::{R0Policy, Direction, Timeline};
use twillsense_core::synth::{generate, Protocol, ResponseModel};
use twillsense_core::fit::model_eval;

use crate::cli::{
    AnalyzeArgs, DirectionArg, FitArgs, HystNormArg, ProtocolArg, ReportArgs, SimulateArgs,
    SynthArgs,
};
use crate::config::KvConfig;
use crate::csvio;
use crate::svg::{Chart, Series, PALETTE};

fn parse_forces(text: &str) -> anyhow::Result<Vec<f64>> {
    if let Some((rest, count)) = text.rsplit_once(':') {
        if let Some((lo, hi)) = rest.split_once(':') {
            let lo: f64 = lo.parse().context("force range start")?;
            let hi: f64 = hi.parse().context("force range end")?;
            let count: usize = count.parse().context("force range count")?;
            if count < 1 || !(hi >= lo) {
                bail!("force range must be `lo:hi:count` with hi >= lo and count >= 1");
            }
            if count == 1 {
                return Ok(vec![lo]);
            }
            return Ok((0..count)
                .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
                .collect());
        }
    }
    text.split(',')
        .map(|s| s.trim().parse::<f64>().with_context(|| format!("force value `{s}`")))
        .collect()
}

fn parse_range(text: &str) -> anyhow::Result<(f64, f64)> {
    let (lo, hi) = text.split_once(':').context("range must be `lo:hi`")?;
    let lo: f64 = lo.parse().context("range start")?;
    let hi: f64 = hi.parse().context("range end")?;
    if !(hi > lo) {
        bail!("range end must exceed the start");
    }
    Ok((lo, hi))
}

fn parse_amp_tau(text: &str) -> anyhow::Result<(f64, f64)> {
    let (amp, tau) = text.split_once(':').context("expected `amp:tau`")?;
    Ok((amp.parse().context("amplitude")?, tau.parse().context("time constant")?))
}

fn parse_r0(text: &str) -> anyhow::Result<R0Policy> {
    if text == "first-sample" {
        return Ok(R0Policy::FirstSample);
    }
    if let Some(value) = text.strip_prefix("explicit:") {
        let r0: f64 = value.parse().context("explicit R0 value")?;
        if !(r0 > 0.0) {
            bail!("explicit R0 must be positive");
        }
        return Ok(R0Policy::Explicit(r0));
    }
    bail!("--r0 must be `first-sample` or `explicit:<ohm>`")
}

fn parse_variant(text: &str) -> anyhow::Result<VariantName> {
    text.parse::<VariantName>().map_err(|e| anyhow::anyhow!("{e}"))
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

pub fn simulate(args: SimulateArgs) -> anyhow::Result<ExitCode> {
    let program = if args.grid {
        build_grid(args.wales, args.courses)?
    } else {
        let name = parse_variant(args.variant.as_deref().expect("clap enforces presence"))?;
        build_variant(&variant(name), args.wales, args.courses)?
    };
    let contact = ContactParams {
        rho: args.rho,
        hardness: args.hardness,
        spot_count: args.spots,
        pressure: 0.0,
        open_threshold: args.open_threshold,
    };
    let rule = match args.pressure {
        Some(pressure) => PressureRule::Fixed { pressure },
        None => PressureRule::Uniform { effective_area: args.area },
    };
    let opts = CompileOptions {
        segment_length: args.seg_len,
        ideal_bus_threshold: if args.keep_connectors { 0.0 } else { args.bus_threshold },
    };
    let forces = parse_forces(&args.forces)?;
    let points = sweep_force(&program, &contact, &forces, &rule, &opts)?;

    fs::create_dir_all(&args.out)?;
    write(&args.out.join("sweep.csv"), &csvio::sweep_csv(&points))?;

    let closed: Vec<(f64, f64)> =
        points.iter().filter_map(|p| p.resistance.map(|r| (p.force, r))).collect();
    if !closed.is_empty() {
        let chart = Chart {
            title: "effective resistance vs force",
            x_label: "force [N]",
            y_label: "resistance [Ohm]",
            series: vec![Series { label: "sweep", color: PALETTE[0], points: closed.clone() }],
        };
        write(&args.out.join("sweep.svg"), &chart.render())?;
    }
    if args.dump_graph {
        if let Some(&(force, _)) = closed.last() {
            let load = LoadState { total_force: force, rule: rule.clone() };
            let graph = compile_graph(&program, &contact, &load, &opts)?;
            write(&args.out.join("graph.txt"), &csvio::edge_list(&graph))?;
        }
    }
    if args.dump_program {
        write(&args.out.join("program.txt"), &program.grid_string())?;
    }

    let open: Vec<f64> = points.iter().filter(|p| p.resistance.is_none()).map(|p| p.force).collect();
    if !open.is_empty() {
        eprintln!(
            "open circuit at {} of {} forces (first open at {} N)",
            open.len(),
            points.len(),
            open[0]
        );
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

const SYNTH_CONFIG_KEYS: &[&str] = &[
    "variant",
    "direction",
    "protocol",
    "cycles",
    "target_force",
    "jog_rate",
    "dwell_time",
    "strain_target",
    "speed_factor",
    "seed",
    "noise_sd",
    "relaxation_amp",
    "relaxation_tau",
    "drift_amp",
    "drift_tau",
    "wearout_per_cycle",
    "compliance",
    "base_resistance",
    "overshoot",
];

pub fn synth(args: SynthArgs) -> anyhow::Result<ExitCode> {
    let cfg = match &args.config {
        Some(path) => {
            let cfg = KvConfig::load(path)?;
            cfg.warn_unknown(SYNTH_CONFIG_KEYS);
            cfg
        }
        None => KvConfig::default(),
    };

    // precedence: CLI flag, then config file, then the built-in default
    let variant_text = args
        .variant
        .clone()
        .or_else(|| cfg.get("variant").map(str::to_string))
        .unwrap_or_else(|| "P_Th".to_string());
    let variant_name = parse_variant(&variant_text)?;

    let protocol_kind = match args.protocol {
        Some(kind) => kind,
        None => match cfg.get("protocol") {
            Some("equal-force") | None => ProtocolArg::EqualForce,
            Some("dwell") => ProtocolArg::Dwell,
            Some("varying-speed") => ProtocolArg::VaryingSpeed,
            Some("increasing-force") => ProtocolArg::IncreasingForce,
            Some("long-term") => ProtocolArg::LongTerm,
            Some("course-directional") => ProtocolArg::CourseDirectional,
            Some("long-term-repetition") => ProtocolArg::LongTermRepetition,
            Some(other) => bail!("config protocol `{other}` unknown"),
        },
    };
    let direction = match args.direction {
        Some(DirectionArg::Wale) => Direction::Wale,
        Some(DirectionArg::Course) => Direction::Course,
        None => match cfg.get("direction") {
            Some("course") => Direction::Course,
            Some("wale") => Direction::Wale,
            Some(other) => bail!("config direction `{other}` (wale|course)"),
            // course-directional runs default to course-direction curves
            None if protocol_kind == ProtocolArg::CourseDirectional => Direction::Course,
            None => Direction::Wale,
        },
    };
    let mut protocol = match protocol_kind {
        ProtocolArg::EqualForce => Protocol::equal_force(),
        ProtocolArg::Dwell => Protocol::dwell(),
        ProtocolArg::VaryingSpeed => {
            let factor =
                args.speed_factor.or(cfg.get_f64("speed_factor")?).unwrap_or(1.0);
            Protocol::varying_speed(factor)
        }
        ProtocolArg::IncreasingForce => Protocol::increasing_force(),
        ProtocolArg::LongTerm => Protocol::long_term(),
        ProtocolArg::CourseDirectional => Protocol::course_directional(),
        ProtocolArg::LongTermRepetition => Protocol::long_term_repetition(),
    };
    if let Some(v) = args.cycles.or(cfg.get_u64("cycles")?.map(|v| v as u32)) {
        protocol.cycles = v;
        if let Some(schedule) = &mut protocol.schedule {
            // keep a consistent stepped schedule when the count changes
            *schedule = (1..=v).map(|i| 5.0 * i as f64).collect();
        }
    }
    if let Some(v) = args.target.or(cfg.get_f64("target_force")?) {
        protocol.target_force = v;
    }
    if let Some(v) = args.jog.or(cfg.get_f64("jog_rate")?) {
        protocol.jog_rate = v;
    }
    if let Some(v) = args.dwell_time.or(cfg.get_f64("dwell_time")?) {
        protocol.dwell_time = v;
    }
    if let Some(v) = args.strain.or(cfg.get_f64("strain_target")?) {
        protocol.strain_target = Some(v);
    }

    let mut model = ResponseModel::from_variant(variant_name, direction)
        .with_context(|| format!("no response curves for {variant_text} along {direction:?}"))?;
    if let Some(v) = args.noise.or(cfg.get_f64("noise_sd")?) {
        model.noise_sd = v;
    }
    let relax_flag = args.relax.as_deref().map(parse_amp_tau).transpose()?;
    model.relaxation_amp = relax_flag
        .map(|(amp, _)| amp)
        .or(cfg.get_f64("relaxation_amp")?)
        .unwrap_or(model.relaxation_amp);
    model.relaxation_tau = relax_flag
        .map(|(_, tau)| tau)
        .or(cfg.get_f64("relaxation_tau")?)
        .unwrap_or(model.relaxation_tau);
    let drift_flag = args.drift.as_deref().map(parse_amp_tau).transpose()?;
    model.drift_amp = drift_flag
        .map(|(amp, _)| amp)
        .or(cfg.get_f64("drift_amp")?)
        .unwrap_or(model.drift_amp);
    model.drift_tau = drift_flag
        .map(|(_, tau)| tau)
        .or(cfg.get_f64("drift_tau")?)
        .unwrap_or(model.drift_tau);
    if let Some(v) = args.wearout.or(cfg.get_f64("wearout_per_cycle")?) {
        model.wearout_per_cycle = v;
    }
    if let Some(v) = args.compliance.or(cfg.get_f64("compliance")?) {
        model.compliance = v;
    }
    if let Some(v) = args.base_r.or(cfg.get_f64("base_resistance")?) {
        model.base_resistance = v;
    }
    if let Some(v) = args.overshoot.or(cfg.get_f64("overshoot")?) {
        model.overshoot = v;
    }
    let seed = args.seed.or(cfg.get_u64("seed")?).unwrap_or(0);

    let mut timeline = generate(&protocol, &model, seed)?;
    timeline.meta.variant = Some(variant_text);
    timeline.meta.direction = direction;
    write(&args.out, &csvio::write_timeline(&timeline))?;
    Ok(ExitCode::SUCCESS)
}

fn analysis_config(
    hyst_norm: HystNormArg,
    r0: &str,
    range: &str,
    motion_eps: f64,
    force_eps: f64,
) -> anyhow::Result<AnalysisConfig> {
    Ok(AnalysisConfig {
        motion_eps,
        force_eps,
        hyst_norm: match hyst_norm {
            HystNormArg::Mean => HystNorm::Mean,
            HystNormArg::Pull => HystNorm::Pull,
            HystNormArg::Release => HystNorm::Release,
        },
        r0: parse_r0(r0)?,
        f_range: parse_range(range)?,
        ..AnalysisConfig::default()
    })
}

/// File stem with collision disambiguation across a batch.
fn unique_stems(paths: &[PathBuf]) -> Vec<String> {
    let mut seen: BTreeSet<String> = BTreeSet::new();
    paths
        .iter()
        .map(|p| {
            let base = p.file_stem().map(|s| s.to_string_lossy().into_owned());
            let base = base.unwrap_or_else(|| "run".to_string());
            let mut name = base.clone();
            let mut n = 1;
            while !seen.insert(name.clone()) {
                n += 1;
                name = format!("{base}_{n}");
            }
            name
        })
        .collect()
}

/// Position in the variant catalog for stable table ordering.
fn variant_rank(variant: Option<&str>) -> usize {
    variant
        .and_then(|v| VariantName::ALL.iter().position(|name| name.as_str() == v))
        .unwrap_or(VariantName::ALL.len())
}

pub fn analyze(args: AnalyzeArgs) -> anyhow::Result<ExitCode> {
    let mut cfg = analysis_config(
        args.hyst_norm,
        &args.r0,
        &args.range,
        args.motion_eps,
        args.force_eps,
    )?;
    if let Some(path) = &args.config {
        let kv = KvConfig::load(path)?;
        kv.warn_unknown(&["hyst_norm", "r0", "range", "motion_eps", "force_eps"]);
        if let Some(norm) = kv.get("hyst_norm") {
            cfg.hyst_norm = match norm {
                "mean" => HystNorm::Mean,
                "pull" => HystNorm::Pull,
                "release" => HystNorm::Release,
                other => bail!("config hyst_norm `{other}`"),
            };
        }
        if let Some(r0) = kv.get("r0") {
            cfg.r0 = parse_r0(r0)?;
        }
        if let Some(range) = kv.get("range") {
            cfg.f_range = parse_range(range)?;
        }
        if let Some(v) = kv.get_f64("motion_eps")? {
            cfg.motion_eps = v;
        }
        if let Some(v) = kv.get_f64("force_eps")? {
            cfg.force_eps = v;
        }
    }
    if (args.jog_half.is_some() || args.jog_double.is_some()) && args.input.len() != 1 {
        bail!("--jog-half/--jog-double need exactly one --input baseline");
    }

    fs::create_dir_all(&args.out)?;
    let stems = unique_stems(&args.input);
    let mut rows: Vec<(usize, String, MetricsReport)> = Vec::new();
    let mut failures = 0usize;

    for (path, stem) in args.input.iter().zip(&stems) {
        let timeline = match csvio::read_timeline(path) {
            Ok(tl) => tl,
            Err(err) => {
                eprintln!("{}: {err:#}", path.display());
                failures += 1;
                continue;
            }
        };
        let mut run = match analyze_timeline(&timeline, &cfg) {
            Ok(run) => run,
            Err(err) => {
                eprintln!("{}: {err}", path.display());
                failures += 1;
                continue;
            }
        };

        if let Some(half) = &args.jog_half {
            let other = csvio::read_timeline(half)?;
            match jog_conformity(&timeline, &other) {
                Ok(r2) => run.report.jog_half_r2 = Some(r2),
                Err(err) => {
                    log::warn!("jog x0.5 conformity unavailable: {err}");
                    run.report.flags.push("jog-half-unavailable".into());
                }
            }
        }
        if let Some(double) = &args.jog_double {
            let other = csvio::read_timeline(double)?;
            match jog_conformity(&timeline, &other) {
                Ok(r2) => run.report.jog_double_r2 = Some(r2),
                Err(err) => {
                    log::warn!("jog x2.0 conformity unavailable: {err}");
                    run.report.flags.push("jog-double-unavailable".into());
                }
            }
        }

        let mut row = String::from(csvio::METRICS_HEADER);
        row.push('\n');
        row.push_str(&csvio::metrics_row(&run.report));
        row.push('\n');
        write(&args.out.join(format!("{stem}_metrics.csv")), &row)?;

        if !args.no_plots {
            emit_plots(&args.out, stem, &timeline, &run, &cfg)?;
        }
        let binned = binned_diff(&run.pull_points, &run.release_points, cfg.f_range)?;
        write(&args.out.join(format!("{stem}_binned.csv")), &csvio::binned_csv(&binned))?;

        let rank = variant_rank(run.report.variant.as_deref());
        rows.push((rank, stem.clone(), run.report));
    }

    if rows.is_empty() {
        bail!("no input could be analyzed");
    }
    rows.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    let mut combined = String::from(csvio::METRICS_HEADER);
    combined.push('\n');
    for (_, _, report) in &rows {
        combined.push_str(&csvio::metrics_row(report));
        combined.push('\n');
    }
    write(&args.out.join("metrics.csv"), &combined)?;

    Ok(if failures > 0 { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn emit_plots(
    out: &Path,
    stem: &str,
    timeline: &Timeline,
    run: &RunAnalysis,
    cfg: &AnalysisConfig,
) -> anyhow::Result<()> {
    use twillsense_core::series::{mean_std, standardize};

    // force and conductance overlay, both standardized
    let t: Vec<f64> = timeline.samples.iter().map(|s| s.t).collect();
    let f = timeline.forces();
    let g = timeline.conductances();
    let mut series = Vec::new();
    let (mf, sf) = mean_std(&f);
    let (mg, sg) = mean_std(&g);
    let zf;
    let zg;
    if sf > 0.0 {
        zf = standardize(&f, mf, sf).expect("positive sigma");
        series.push(Series {
            label: "force (standardized)",
            color: "#555555",
            points: t.iter().copied().zip(zf.iter().copied()).collect(),
        });
    }
    if sg > 0.0 {
        zg = standardize(&g, mg, sg).expect("positive sigma");
        series.push(Series {
            label: "conductance (standardized)",
            color: PALETTE[0],
            points: t.iter().copied().zip(zg.iter().copied()).collect(),
        });
    }
    let chart = Chart {
        title: "timeline: force and conductance",
        x_label: "time [s]",
        y_label: "standardized value",
        series,
    };
    write(&out.join(format!("{stem}_timeline.svg")), &chart.render())?;

    // characteristics: response vs force with fit curves
    let mut series = vec![
        Series { label: "pull samples", color: PALETTE[0], points: run.pull_points.clone() },
        Series { label: "release samples", color: PALETTE[1], points: run.release_points.clone() },
    ];
    let (lo, hi) = cfg.f_range;
    let grid: Vec<f64> = (0..200).map(|i| lo + (hi - lo) * i as f64 / 199.0).collect();
    if let Some(fit) = &run.pull_fit {
        series.push(Series {
            label: "pull fit",
            color: PALETTE[2],
            points: grid.iter().map(|&x| (x, model_eval(&fit.params, x))).collect(),
        });
    }
    if let Some(fit) = &run.release_fit {
        series.push(Series {
            label: "release fit",
            color: PALETTE[3],
            points: grid.iter().map(|&x| (x, model_eval(&fit.params, x))).collect(),
        });
    }
    let chart = Chart {
        title: "characteristics: response vs force",
        x_label: "force [N]",
        y_label: "R / R0 [%]",
        series,
    };
    write(&out.join(format!("{stem}_characteristics.svg")), &chart.render())?;

    // binned pull/release difference
    let binned = binned_diff(&run.pull_points, &run.release_points, cfg.f_range)?;
    let points: Vec<(f64, f64)> = binned
        .bins
        .iter()
        .filter_map(|b| b.abs_diff.map(|d| (b.f_center, d)))
        .collect();
    let chart = Chart {
        title: "binned pull/release difference",
        x_label: "force [N]",
        y_label: "abs diff [% of R0]",
        series: vec![Series { label: "binned diff", color: PALETTE[4], points }],
    };
    write(&out.join(format!("{stem}_binned.svg")), &chart.render())?;
    Ok(())
}

pub fn fit(args: FitArgs) -> anyhow::Result<ExitCode> {
    let cfg = analysis_config(
        HystNormArg::Mean,
        &args.r0,
        &args.range,
        args.motion_eps,
        args.force_eps,
    )?;
    fs::create_dir_all(&args.out)?;
    let stems = unique_stems(&args.input);
    let mut table = String::from(csvio::FIT_HEADER);
    table.push('\n');
    for (path, stem) in args.input.iter().zip(&stems) {
        let timeline = csvio::read_timeline(path)?;
        let run = analyze_timeline(&timeline, &cfg)?;
        let label = timeline.meta.variant.clone().unwrap_or_else(|| stem.clone());
        if let Some(fit) = &run.pull_fit {
            table.push_str(&csvio::fit_row(&label, "pull", &fit.params, fit.converged));
            table.push('\n');
        }
        if let Some(fit) = &run.release_fit {
            table.push_str(&csvio::fit_row(&label, "release", &fit.params, fit.converged));
            table.push('\n');
        }
    }
    write(&args.out.join("fits.csv"), &table)?;
    Ok(ExitCode::SUCCESS)
}

fn fmt_sig(text: &str) -> String {
    match text.parse::<f64>() {
        Ok(v) => {
            if v == 0.0 {
                "0".to_string()
            } else {
                let mag = v.abs().log10().floor() as i32;
                let decimals = (3 - mag).clamp(0, 6) as usize;
                format!("{v:.decimals$}")
            }
        }
        Err(_) => {
            if text.is_empty() {
                "-".to_string()
            } else {
                text.to_string()
            }
        }
    }
}

pub fn report(args: ReportArgs) -> anyhow::Result<ExitCode> {
    let mut rows: Vec<(usize, Vec<String>)> = Vec::new();
    for path in &args.input {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let mut lines = text.lines();
        match lines.next() {
            Some(header) if header == csvio::METRICS_HEADER => {}
            other => bail!(
                "{}: not a metrics table (header {:?})",
                path.display(),
                other.unwrap_or("")
            ),
        }
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<String> = line.split(',').map(|s| s.to_string()).collect();
            let rank = variant_rank(fields.first().map(|s| s.as_str()).filter(|s| !s.is_empty()));
            rows.push((rank, fields));
        }
    }
    if rows.is_empty() {
        bail!("no metric rows found");
    }
    rows.sort_by(|a, b| (a.0, a.1.first()).cmp(&(b.0, b.1.first())));

    fs::create_dir_all(&args.out)?;
    let mut combined = String::from(csvio::METRICS_HEADER);
    combined.push('\n');
    for (_, fields) in &rows {
        combined.push_str(&fields.join(","));
        combined.push('\n');
    }
    write(&args.out.join("combined.csv"), &combined)?;

    // human-readable block: metrics down, variants across
    let labels = [
        ("delta_d_05 [%]", 1usize),
        ("delta_d_15 [%]", 2),
        ("r2", 3),
        ("h_R [%]", 4),
        ("F_h [N]", 5),
        ("dR_rel [%]", 6),
        ("offset [%]", 7),
        ("relaxation [%]", 8),
        ("drift [%]", 9),
        ("T_r [s]", 10),
        ("T_d [s]", 11),
        ("jog x0.5 r2", 12),
        ("jog x2.0 r2", 13),
        ("flags", 14),
    ];
    let col_w = 12usize;
    let mut table = String::new();
    table.push_str(&format!("{:<16}", ""));
    for (_, fields) in &rows {
        let name = if fields[0].is_empty() { "(run)" } else { &fields[0] };
        table.push_str(&format!("{name:>col_w$}"));
    }
    table.push('\n');
    table.push_str(&"-".repeat(16 + col_w * rows.len()));
    table.push('\n');
    for (label, idx) in labels {
        table.push_str(&format!("{label:<16}"));
        for (_, fields) in &rows {
            let cell = fields.get(idx).map(|s| fmt_sig(s)).unwrap_or_else(|| "-".into());
            table.push_str(&format!("{cell:>col_w$}"));
        }
        table.push('\n');
    }
    write(&args.out.join("table.txt"), &table)?;
    Ok(ExitCode::SUCCESS)
}
