//! Characterization metrics: relative extension (wear-out), force/response
//! conformity, hysteresis, dynamic range, offset/relaxation/drift, settling
//! times, actuation-speed conformity and within-design consistency.

use alloc::string::String;
use alloc::vec::Vec;

use crate::fit::{fit_curve, model_eval, CurveKind, FitError, FitInput, FitParams, FitResult};
use crate::math;
use crate::series::{
    drop_first_cycle, mean_std, segment_cycles, standardize, R0Policy, Segment, SegmentKind,
    Segmentation, SeriesError, Timeline,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error("need at least {needed} cycles, found {found}")]
    TooFewCycles { needed: u32, found: u32 },
    #[error("zero variance in the reference series")]
    ZeroVariance,
    #[error("series lengths differ or are too short")]
    BadSeries,
    #[error("invalid force range")]
    BadRange,
    #[error("no patches supplied")]
    NoPatches,
    #[error("curves degenerate over the force range")]
    DegenerateCurves,
}

/// Denominator convention for the normalized hysteresis distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HystNorm {
    /// Pointwise mean of the pull and release curves (default; gives the
    /// same value in the resistance and conductance domains).
    #[default]
    Mean,
    Pull,
    Release,
}

pub const BIN_COUNT: usize = 100;
pub const HYST_GRID: usize = 2000;

/// One force bin of a binned pull/release comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffBin {
    pub f_center: f64,
    pub pull_mean: Option<f64>,
    pub release_mean: Option<f64>,
    /// Absolute difference of the two means; `None` flags an empty side.
    pub abs_diff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinnedDiff {
    pub bins: Vec<DiffBin>,
}

/// Hysteresis between the fitted pull and release curves.
#[derive(Debug, Clone, PartialEq)]
pub struct HysteresisResult {
    /// Maximum normalized distance, percent.
    pub h_pct: f64,
    /// Force at which the maximum occurs, N.
    pub f_h: f64,
    pub pull_fit: FitParams,
    pub release_fit: FitParams,
    /// Curve difference evaluated at the bin centers.
    pub binned: BinnedDiff,
}

/// Maximum normalized distance between the pull and release curves over a
/// dense grid on `f_range`.
///
/// The distance at each grid force is `|pull − release|` divided by the
/// chosen normalization curve, in percent. Identical curves give `h = 0`
/// at the range start.
pub fn hysteresis(
    pull: &FitParams,
    release: &FitParams,
    f_range: (f64, f64),
    norm: HystNorm,
) -> Result<HysteresisResult, MetricsError> {
    let (lo, hi) = f_range;
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(MetricsError::BadRange);
    }
    let mut best_rel = f64::NEG_INFINITY;
    let mut best_f = lo;
    let mut any = false;
    for i in 0..HYST_GRID {
        let f = lo + (hi - lo) * i as f64 / (HYST_GRID - 1) as f64;
        let yp = model_eval(pull, f);
        let yr = model_eval(release, f);
        let denom = match norm {
            HystNorm::Mean => 0.5 * (yp + yr),
            HystNorm::Pull => yp,
            HystNorm::Release => yr,
        };
        if denom == 0.0 {
            continue;
        }
        let rel = math::abs(yp - yr) / math::abs(denom);
        if !rel.is_finite() {
            continue;
        }
        any = true;
        if rel > best_rel {
            best_rel = rel;
            best_f = f;
        }
    }
    if !any {
        return Err(MetricsError::DegenerateCurves);
    }
    let binned = curve_binned_diff(pull, release, f_range);
    Ok(HysteresisResult {
        h_pct: best_rel * 100.0,
        f_h: best_f,
        pull_fit: *pull,
        release_fit: *release,
        binned,
    })
}

fn curve_binned_diff(pull: &FitParams, release: &FitParams, f_range: (f64, f64)) -> BinnedDiff {
    let (lo, hi) = f_range;
    let width = (hi - lo) / BIN_COUNT as f64;
    let bins = (0..BIN_COUNT)
        .map(|b| {
            let f_center = lo + (b as f64 + 0.5) * width;
            let p = model_eval(pull, f_center);
            let r = model_eval(release, f_center);
            DiffBin {
                f_center,
                pull_mean: Some(p),
                release_mean: Some(r),
                abs_diff: Some(math::abs(p - r)),
            }
        })
        .collect();
    BinnedDiff { bins }
}

/// Splits `f_range` into 100 equal-width bins, averages the pull and
/// release samples separately per bin and reports the absolute difference.
/// Bins without samples on a side are flagged with `None`.
pub fn binned_diff(
    pull_points: &[(f64, f64)],
    release_points: &[(f64, f64)],
    f_range: (f64, f64),
) -> Result<BinnedDiff, MetricsError> {
    let (lo, hi) = f_range;
    if !(hi > lo) {
        return Err(MetricsError::BadRange);
    }
    let width = (hi - lo) / BIN_COUNT as f64;
    let mut pull_sum = [0.0f64; BIN_COUNT];
    let mut pull_cnt = [0usize; BIN_COUNT];
    let mut rel_sum = [0.0f64; BIN_COUNT];
    let mut rel_cnt = [0usize; BIN_COUNT];
    let bin_of = |f: f64| -> Option<usize> {
        if f < lo || f > hi {
            return None;
        }
        Some((((f - lo) / width) as usize).min(BIN_COUNT - 1))
    };
    for &(f, y) in pull_points {
        if let Some(b) = bin_of(f) {
            pull_sum[b] += y;
            pull_cnt[b] += 1;
        }
    }
    for &(f, y) in release_points {
        if let Some(b) = bin_of(f) {
            rel_sum[b] += y;
            rel_cnt[b] += 1;
        }
    }
    let bins = (0..BIN_COUNT)
        .map(|b| {
            let pull_mean = (pull_cnt[b] > 0).then(|| pull_sum[b] / pull_cnt[b] as f64);
            let release_mean = (rel_cnt[b] > 0).then(|| rel_sum[b] / rel_cnt[b] as f64);
            let abs_diff = match (pull_mean, release_mean) {
                (Some(p), Some(r)) => Some(math::abs(p - r)),
                _ => None,
            };
            DiffBin { f_center: lo + (b as f64 + 0.5) * width, pull_mean, release_mean, abs_diff }
        })
        .collect();
    Ok(BinnedDiff { bins })
}

/// Relative resistance difference between the 0 N and 20 N states of each
/// fitted curve, percent: `|y(0) − y(20)| / y(0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicRange {
    pub pull_pct: Option<f64>,
    pub release_pct: Option<f64>,
    /// Pull/release average; the reported headline value.
    pub mean_pct: Option<f64>,
}

pub fn dynamic_range(pull: &FitParams, release: &FitParams) -> DynamicRange {
    let per_curve = |p: &FitParams| -> Option<f64> {
        let y0 = model_eval(p, 0.0);
        let y20 = model_eval(p, 20.0);
        if math::abs(y0) < 1e-12 || !y0.is_finite() || !y20.is_finite() {
            return None;
        }
        Some(math::abs(y0 - y20) / math::abs(y0) * 100.0)
    };
    let pull_pct = per_curve(pull);
    let release_pct = per_curve(release);
    let mean_pct = match (pull_pct, release_pct) {
        (Some(a), Some(b)) => Some(0.5 * (a + b)),
        _ => None,
    };
    DynamicRange { pull_pct, release_pct, mean_pct }
}

fn rest_sample(tl: &Timeline, boundary: usize) -> usize {
    boundary.min(tl.len() - 1)
}

fn release_of_cycle(segments: &[Segment], cycle: u32) -> Option<&Segment> {
    segments.iter().rfind(|s| s.kind == SegmentKind::Release && s.cycle == cycle)
}

fn pull_of_cycle(segments: &[Segment], cycle: u32) -> Option<&Segment> {
    segments.iter().find(|s| s.kind == SegmentKind::Pull && s.cycle == cycle)
}

fn cycle_count(segments: &[Segment]) -> u32 {
    segments.iter().map(|s| s.cycle).max().unwrap_or(0)
}

/// Wear-out of the fabric over the five-cycle procedure, in percent:
/// `Δd₀,₅` relates the rest length after cycle 5 to the length before
/// cycle 1, `Δd₁,₅` to the rest length after cycle 1. The rest length is
/// the fabric length at the zero-force return point (`L0` plus the
/// displacement at the release-end boundary sample).
pub fn relative_extension(
    tl: &Timeline,
    segments: &[Segment],
) -> Result<(f64, f64), MetricsError> {
    let cycles = cycle_count(segments);
    if cycles < 5 {
        return Err(MetricsError::TooFewCycles { needed: 5, found: cycles });
    }
    let first_pull =
        pull_of_cycle(segments, 1).ok_or(MetricsError::TooFewCycles { needed: 5, found: 0 })?;
    let rest_before = tl.meta.l0 + tl.samples[first_pull.start].d;
    let rest_after = |cycle: u32| -> Option<f64> {
        let release = release_of_cycle(segments, cycle)?;
        Some(tl.meta.l0 + tl.samples[rest_sample(tl, release.end)].d)
    };
    let after1 = rest_after(1).ok_or(MetricsError::TooFewCycles { needed: 5, found: cycles })?;
    let after5 = rest_after(5).ok_or(MetricsError::TooFewCycles { needed: 5, found: cycles })?;
    let d05 = (after5 - rest_before) / rest_before * 100.0;
    let d15 = (after5 - after1) / after1 * 100.0;
    Ok((d05, d15))
}

/// Conformity between two trends: both series standardized by their own
/// moments, then `r² = 1 − Σ(Ĝ−F̂)²/Σ(F̂²)` with the first series as the
/// reference. `None` when either variance is zero or lengths mismatch.
pub fn conformity_r2(f_series: &[f64], g_series: &[f64]) -> Option<f64> {
    if f_series.len() != g_series.len() || f_series.len() < 2 {
        return None;
    }
    let (mf, sf) = mean_std(f_series);
    let (mg, sg) = mean_std(g_series);
    if !(sf > 0.0) || !(sg > 0.0) {
        return None;
    }
    let f_hat = standardize(f_series, mf, sf).ok()?;
    let g_hat = standardize(g_series, mg, sg).ok()?;
    let ss_res: f64 = f_hat.iter().zip(&g_hat).map(|(f, g)| (g - f) * (g - f)).sum();
    let ss_tot: f64 = f_hat.iter().map(|f| f * f).sum();
    Some(1.0 - ss_res / ss_tot)
}

/// Offset, relaxation and drift in percent, averaged over cycles 2..n
/// (the first actuation cycle starts from a long-settled state and is
/// excluded).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OffsetRelaxDrift {
    /// Relative resistance change between the rest samples before and
    /// after each cycle.
    pub offset_pct: Option<f64>,
    /// Relative change across each strained dwell.
    pub relaxation_pct: Option<f64>,
    /// Relative change across each rest dwell.
    pub drift_pct: Option<f64>,
}

pub fn offset_relaxation_drift(
    tl: &Timeline,
    segments: &[Segment],
) -> Result<OffsetRelaxDrift, MetricsError> {
    let cycles = cycle_count(segments);
    if cycles < 2 {
        return Err(MetricsError::TooFewCycles { needed: 2, found: cycles });
    }
    let r = |i: usize| tl.samples[i].r;

    let mut offsets = Vec::new();
    for cycle in 2..=cycles {
        let (Some(pull), Some(release)) =
            (pull_of_cycle(segments, cycle), release_of_cycle(segments, cycle))
        else {
            continue;
        };
        let pre = r(pull.start);
        let post = r(rest_sample(tl, release.end));
        offsets.push((post - pre) / pre);
    }
    let mean_pct = |v: &[f64]| -> Option<f64> {
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64 * 100.0)
    };

    let dwell_changes = |kind: SegmentKind| -> Vec<f64> {
        segments
            .iter()
            .filter(|s| s.kind == kind && s.cycle >= 2 && s.len() >= 2)
            .map(|s| (r(s.end - 1) - r(s.start)) / r(s.start))
            .collect()
    };
    let relax = dwell_changes(SegmentKind::DwellHigh);
    let drift = dwell_changes(SegmentKind::DwellLow);

    Ok(OffsetRelaxDrift {
        offset_pct: mean_pct(&offsets),
        relaxation_pct: mean_pct(&relax),
        drift_pct: mean_pct(&drift),
    })
}

/// Settling outcome of one dwell kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Settle {
    /// Time from dwell start until the windowed relative standard
    /// deviation permanently stays below the threshold, seconds.
    Settled(f64),
    /// The RSD was still at or above the threshold at the dwell end.
    NeverSettled,
    /// No dwell long enough to hold a full window.
    NoDwell,
}

impl Settle {
    pub fn seconds(&self) -> Option<f64> {
        match self {
            Settle::Settled(t) => Some(*t),
            _ => None,
        }
    }
}

/// Earliest time after which the conductance RSD over a trailing `window`
/// stays below `threshold` for good, per dwell kind: strained dwells give
/// `T_r`, rest dwells give `T_d`. The longest dwell of each kind is
/// evaluated; evaluation starts once a full window fits inside the dwell,
/// so a signal that is quiet from the start settles at the window length.
pub fn settling_times(
    tl: &Timeline,
    segments: &[Segment],
    window: f64,
    threshold: f64,
) -> (Settle, Settle) {
    let longest = |kind: SegmentKind| -> Option<&Segment> {
        segments.iter().filter(|s| s.kind == kind).max_by_key(|s| s.len())
    };
    let t_r = longest(SegmentKind::DwellHigh)
        .map(|s| dwell_settle(tl, s, window, threshold))
        .unwrap_or(Settle::NoDwell);
    let t_d = longest(SegmentKind::DwellLow)
        .map(|s| dwell_settle(tl, s, window, threshold))
        .unwrap_or(Settle::NoDwell);
    (t_r, t_d)
}

fn dwell_settle(tl: &Timeline, seg: &Segment, window: f64, threshold: f64) -> Settle {
    let (s, e) = (seg.start, seg.end);
    if e - s < 2 {
        return Settle::NoDwell;
    }
    let t = |i: usize| tl.samples[i].t;
    let t0 = t(s);
    if t(e - 1) - t0 < window {
        return Settle::NoDwell;
    }
    // rolling sums over the trailing window [t_i - window, t_i]
    let g: Vec<f64> = tl.samples[s..e].iter().map(|smp| 1.0 / smp.r).collect();
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    let mut left = 0usize;
    let mut evals: Vec<(usize, f64)> = Vec::new();
    for i in 0..g.len() {
        sum += g[i];
        sumsq += g[i] * g[i];
        while t(s + left) < t(s + i) - window {
            sum -= g[left];
            sumsq -= g[left] * g[left];
            left += 1;
        }
        if t(s + i) - t0 >= window {
            let cnt = (i - left + 1) as f64;
            let mean = sum / cnt;
            let var = (sumsq / cnt - mean * mean).max(0.0);
            let rsd = math::sqrt(var) / mean;
            evals.push((i, rsd));
        }
    }
    if evals.is_empty() {
        return Settle::NoDwell;
    }
    match evals.iter().rposition(|&(_, rsd)| rsd >= threshold) {
        None => Settle::Settled(t(s + evals[0].0) - t0),
        Some(pos) if pos + 1 < evals.len() => Settle::Settled(t(s + evals[pos + 1].0) - t0),
        Some(_) => Settle::NeverSettled,
    }
}

/// Conformity of a run against a baseline run recorded at a different
/// actuation speed. Both runs are segmented, their first cycles dropped,
/// the conductance series time-normalized and resampled to equal count,
/// then both standardized with the baseline's moments; returns
/// `r² = 1 − Σ(ô−b̂)²/Σ(b̂²)`.
pub fn jog_conformity(baseline: &Timeline, other: &Timeline) -> Result<f64, MetricsError> {
    let slice = |tl: &Timeline| -> Result<Vec<f64>, MetricsError> {
        let seg = segment_cycles(
            tl,
            crate::series::MOTION_EPS_DEFAULT,
            crate::series::FORCE_EPS_DEFAULT,
        )?;
        let kept = drop_first_cycle(&seg)?;
        let start = kept.iter().map(|s| s.start).min().expect("non-empty");
        let end = kept.iter().map(|s| s.end).max().expect("non-empty");
        Ok(tl.samples[start..end].iter().map(|s| 1.0 / s.r).collect())
    };
    let gb = slice(baseline)?;
    let go = slice(other)?;
    let n = gb.len().min(go.len());
    if n < 2 {
        return Err(MetricsError::BadSeries);
    }
    let rb = crate::series::resample(&gb, n)?;
    let ro = crate::series::resample(&go, n)?;
    let (mu, sigma) = mean_std(&rb);
    if !(sigma > 0.0) {
        return Err(MetricsError::ZeroVariance);
    }
    let b_hat = standardize(&rb, mu, sigma)?;
    let o_hat = standardize(&ro, mu, sigma)?;
    let ss_res: f64 = b_hat.iter().zip(&o_hat).map(|(b, o)| (o - b) * (o - b)).sum();
    let ss_tot: f64 = b_hat.iter().map(|b| b * b).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Extrema of one patch's run after first-cycle removal: ΔR/R₀ and strain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatchExtrema {
    pub dr_rel_min: f64,
    pub dr_rel_max: f64,
    pub strain_min: f64,
    pub strain_max: f64,
}

pub fn patch_extrema(tl: &Timeline, segments: &[Segment], r0: R0Policy) -> PatchExtrema {
    let r0 = r0.resolve(tl);
    let mut ex = PatchExtrema {
        dr_rel_min: f64::INFINITY,
        dr_rel_max: f64::NEG_INFINITY,
        strain_min: f64::INFINITY,
        strain_max: f64::NEG_INFINITY,
    };
    for seg in segments {
        for s in &tl.samples[seg.start..seg.end] {
            let dr = (s.r - r0) / r0;
            let e = s.d / tl.meta.l0;
            ex.dr_rel_min = ex.dr_rel_min.min(dr);
            ex.dr_rel_max = ex.dr_rel_max.max(dr);
            ex.strain_min = ex.strain_min.min(e);
            ex.strain_max = ex.strain_max.max(e);
        }
    }
    ex
}

/// Mean with population standard deviation; `sd` is `None` for a single
/// sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanSd {
    pub mean: f64,
    pub sd: Option<f64>,
}

fn mean_sd_of(values: &[f64]) -> MeanSd {
    let (mean, sd) = mean_std(values);
    MeanSd { mean, sd: (values.len() >= 2).then_some(sd) }
}

/// Within-design consistency across same-design patches.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyStats {
    pub count: usize,
    pub dr_rel_min: MeanSd,
    pub dr_rel_max: MeanSd,
    pub strain_min: MeanSd,
    pub strain_max: MeanSd,
    /// Indices of patches lying beyond 3 SD of the remaining patches on
    /// any field — listed, never silently dropped.
    pub outliers: Vec<usize>,
}

pub fn consistency(patches: &[PatchExtrema]) -> Result<ConsistencyStats, MetricsError> {
    if patches.is_empty() {
        return Err(MetricsError::NoPatches);
    }
    let field = |f: fn(&PatchExtrema) -> f64| -> Vec<f64> { patches.iter().map(f).collect() };
    let dr_min = field(|p| p.dr_rel_min);
    let dr_max = field(|p| p.dr_rel_max);
    let e_min = field(|p| p.strain_min);
    let e_max = field(|p| p.strain_max);

    let mut outliers = Vec::new();
    if patches.len() >= 3 {
        for i in 0..patches.len() {
            let is_out = [&dr_min, &dr_max, &e_min, &e_max].iter().any(|vals| {
                // leave-one-out moments: with the candidate included, n=4
                // caps any deviation at √3 SD and nothing would ever flag
                let rest: Vec<f64> = vals
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, v)| *v)
                    .collect();
                let (mu, sd) = mean_std(&rest);
                let dev = math::abs(vals[i] - mu);
                if sd > 0.0 {
                    dev > 3.0 * sd
                } else {
                    dev > 1e-9 * math::abs(mu).max(1.0)
                }
            });
            if is_out {
                outliers.push(i);
            }
        }
    }

    Ok(ConsistencyStats {
        count: patches.len(),
        dr_rel_min: mean_sd_of(&dr_min),
        dr_rel_max: mean_sd_of(&dr_max),
        strain_min: mean_sd_of(&e_min),
        strain_max: mean_sd_of(&e_max),
        outliers,
    })
}

/// Conventions and thresholds of a full-run analysis.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub motion_eps: f64,
    pub force_eps: f64,
    pub hyst_norm: HystNorm,
    pub r0: R0Policy,
    pub f_range: (f64, f64),
    pub settle_window: f64,
    pub settle_threshold: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            motion_eps: crate::series::MOTION_EPS_DEFAULT,
            force_eps: crate::series::FORCE_EPS_DEFAULT,
            hyst_norm: HystNorm::Mean,
            r0: R0Policy::FirstSample,
            f_range: (0.0, 20.0),
            settle_window: 10.0,
            settle_threshold: 0.01,
        }
    }
}

/// One row of the characterization table.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub variant: Option<String>,
    pub delta_d_05_pct: Option<f64>,
    pub delta_d_15_pct: Option<f64>,
    pub r2_conformity: Option<f64>,
    pub hysteresis: Option<HysteresisResult>,
    pub dynamic_range: Option<DynamicRange>,
    pub offset_pct: Option<f64>,
    pub relaxation_pct: Option<f64>,
    pub drift_pct: Option<f64>,
    pub t_r: Settle,
    pub t_d: Settle,
    pub jog_half_r2: Option<f64>,
    pub jog_double_r2: Option<f64>,
    /// Degradation notes ("insufficient-cycles", "fit-not-converged", ...).
    pub flags: Vec<String>,
}

/// Everything produced by one run analysis: the metric row plus the
/// intermediate artifacts needed for plots and fit tables.
#[derive(Debug, Clone, PartialEq)]
pub struct RunAnalysis {
    pub report: MetricsReport,
    pub segmentation: Segmentation,
    pub pull_fit: Option<FitResult>,
    pub release_fit: Option<FitResult>,
    /// `(force, response)` points after first-cycle removal; the response
    /// axis is resistance as percent of R₀.
    pub pull_points: Vec<(f64, f64)>,
    pub release_points: Vec<(f64, f64)>,
}

/// Runs the full single-run pipeline: segmentation, first-cycle removal,
/// pull/release curve fits and every metric derivable from one recording.
/// Degraded inputs (too few cycles, no dwells) produce flags rather than
/// errors.
pub fn analyze_timeline(tl: &Timeline, cfg: &AnalysisConfig) -> Result<RunAnalysis, MetricsError> {
    tl.validate()?;
    let segmentation = segment_cycles(tl, cfg.motion_eps, cfg.force_eps)?;
    let mut flags = Vec::new();
    if segmentation.no_motion {
        flags.push(String::from("no-motion"));
    }

    let kept: Vec<Segment> = match drop_first_cycle(&segmentation) {
        Ok(kept) => kept,
        Err(_) => {
            flags.push(String::from("insufficient-cycles"));
            segmentation.segments.clone()
        }
    };

    let r0 = cfg.r0.resolve(tl);
    let (lo, hi) = cfg.f_range;
    let mut pull_points = Vec::new();
    let mut release_points = Vec::new();
    for seg in &kept {
        let sink = match seg.kind {
            SegmentKind::Pull => &mut pull_points,
            SegmentKind::Release => &mut release_points,
            _ => continue,
        };
        // a motion segment's first sample is the reversal point shared
        // with the opposite branch; it belongs to neither point set
        let first = (seg.start + 1).min(seg.end);
        for s in &tl.samples[first..seg.end] {
            if s.f >= lo && s.f <= hi {
                sink.push((s.f, 100.0 * s.r / r0));
            }
        }
    }

    let try_fit = |points: &Vec<(f64, f64)>, kind: CurveKind, flags: &mut Vec<String>| {
        if points.len() < 6 {
            flags.push(String::from(match kind {
                CurveKind::Pull => "too-few-pull-points",
                CurveKind::Release => "too-few-release-points",
            }));
            return None;
        }
        let fitted = fit_curve(&FitInput { points: points.clone(), kind }).ok()?;
        if !fitted.converged {
            flags.push(String::from("fit-not-converged"));
        }
        if fitted.degenerate {
            flags.push(String::from("fit-degenerate"));
        }
        Some(fitted)
    };
    let pull_fit = try_fit(&pull_points, CurveKind::Pull, &mut flags);
    let release_fit = try_fit(&release_points, CurveKind::Release, &mut flags);

    let (hyst, range) = match (&pull_fit, &release_fit) {
        (Some(p), Some(r)) => {
            let h = hysteresis(&p.params, &r.params, cfg.f_range, cfg.hyst_norm).ok();
            if h.is_none() {
                flags.push(String::from("hysteresis-degenerate"));
            }
            (h, Some(dynamic_range(&p.params, &r.params)))
        }
        _ => (None, None),
    };

    let extension = relative_extension(tl, &segmentation.segments).ok();
    if extension.is_none() {
        flags.push(String::from("extension-unavailable"));
    }
    let ord = offset_relaxation_drift(tl, &segmentation.segments).ok();
    let conformity = conformity_r2(&tl.forces(), &tl.conductances());
    let (t_r, t_d) =
        settling_times(tl, &segmentation.segments, cfg.settle_window, cfg.settle_threshold);

    let report = MetricsReport {
        variant: tl.meta.variant.clone(),
        delta_d_05_pct: extension.map(|e| e.0),
        delta_d_15_pct: extension.map(|e| e.1),
        r2_conformity: conformity,
        hysteresis: hyst,
        dynamic_range: range,
        offset_pct: ord.and_then(|o| o.offset_pct),
        relaxation_pct: ord.and_then(|o| o.relaxation_pct),
        drift_pct: ord.and_then(|o| o.drift_pct),
        t_r,
        t_d,
        jog_half_r2: None,
        jog_double_r2: None,
        flags,
    };
    Ok(RunAnalysis { report, segmentation, pull_fit, release_fit, pull_points, release_points })
}
