//! Tensile-test timelines and series utilities: cycle segmentation,
//! first-cycle removal, standardization and resampling.

use alloc::vec::Vec;

use crate::math;

/// Actuation direction of a run relative to the knit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Wale,
    Course,
}

/// One recorded sample: time (s), actuator displacement (mm), force (N)
/// and sensor resistance (Ω).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub d: f64,
    pub f: f64,
    pub r: f64,
}

/// Run metadata. `l0` is the initial fabric length between the mounting
/// marks in mm, `jog_rate` the actuator speed in mm/s.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub l0: f64,
    pub jog_rate: f64,
    pub variant: Option<alloc::string::String>,
    pub direction: Direction,
}

impl Default for RunMeta {
    fn default() -> Self {
        RunMeta { l0: 50.0, jog_rate: 1.333, variant: None, direction: Direction::Wale }
    }
}

/// A uniformly sampled test recording (nominally 25 ms per sample, the
/// rig's ~40 Hz aggregate rate).
#[derive(Debug, Clone, PartialEq)]
pub struct Timeline {
    pub samples: Vec<Sample>,
    pub meta: RunMeta,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SeriesError {
    #[error("timeline is empty")]
    Empty,
    #[error("sample {index}: time does not increase")]
    NonMonotonicTime { index: usize },
    #[error("sample {index}: resistance must be positive")]
    NonPositiveResistance { index: usize },
    #[error("initial length must be positive")]
    BadInitialLength,
    #[error("need at least {needed} cycles, found {found}")]
    TooFewCycles { needed: u32, found: u32 },
    #[error("sigma must be positive (degenerate series)")]
    DegenerateSigma,
    #[error("series too short for this operation")]
    TooShort,
}

impl Timeline {
    pub fn new(samples: Vec<Sample>, meta: RunMeta) -> Result<Self, SeriesError> {
        let tl = Timeline { samples, meta };
        tl.validate()?;
        Ok(tl)
    }

    pub fn validate(&self) -> Result<(), SeriesError> {
        if self.samples.is_empty() {
            return Err(SeriesError::Empty);
        }
        if !(self.meta.l0 > 0.0) {
            return Err(SeriesError::BadInitialLength);
        }
        for (i, pair) in self.samples.windows(2).enumerate() {
            if !(pair[1].t > pair[0].t) {
                return Err(SeriesError::NonMonotonicTime { index: i + 1 });
            }
        }
        for (i, s) in self.samples.iter().enumerate() {
            if !(s.r > 0.0) {
                return Err(SeriesError::NonPositiveResistance { index: i });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn forces(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.f).collect()
    }

    pub fn resistances(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.r).collect()
    }

    pub fn conductances(&self) -> Vec<f64> {
        self.samples.iter().map(|s| 1.0 / s.r).collect()
    }
}

/// Choice of the reference resistance for ΔR/R₀.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum R0Policy {
    /// The run's first sample — the only always-available rest value.
    FirstSample,
    Explicit(f64),
}

impl R0Policy {
    pub fn resolve(&self, tl: &Timeline) -> f64 {
        match *self {
            R0Policy::FirstSample => tl.samples[0].r,
            R0Policy::Explicit(r0) => r0,
        }
    }
}

/// Per-sample derived series: strain `e = d/L0`, conductance `G = 1/R` and
/// relative resistance change `ΔR/R₀` (dimensionless fractions).
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedSeries {
    pub strain: Vec<f64>,
    pub conductance: Vec<f64>,
    pub dr_rel: Vec<f64>,
}

pub fn derive(tl: &Timeline, r0: R0Policy) -> DerivedSeries {
    let r0 = r0.resolve(tl);
    let mut strain = Vec::with_capacity(tl.len());
    let mut conductance = Vec::with_capacity(tl.len());
    let mut dr_rel = Vec::with_capacity(tl.len());
    for s in &tl.samples {
        strain.push(s.d / tl.meta.l0);
        conductance.push(1.0 / s.r);
        dr_rel.push((s.r - r0) / r0);
    }
    DerivedSeries { strain, conductance, dr_rel }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SegmentKind {
    Pull,
    Release,
    DwellHigh,
    DwellLow,
}

/// A contiguous span of samples `[start, end)`. Segments of one run tile
/// the sample range exactly; `cycle` numbering starts at 1 and increments
/// at every pull after the first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub kind: SegmentKind,
    pub start: usize,
    pub end: usize,
    pub cycle: u32,
}

impl Segment {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// Segmentation result. `no_motion` warns that the run never moved and was
/// classified as a single resting dwell.
#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub segments: Vec<Segment>,
    pub no_motion: bool,
}

impl Segmentation {
    pub fn cycle_count(&self) -> u32 {
        self.segments.iter().map(|s| s.cycle).max().unwrap_or(0)
    }
}

pub const MOTION_EPS_DEFAULT: f64 = 0.05; // mm/s, ~4 % of the baseline jog rate
pub const FORCE_EPS_DEFAULT: f64 = 0.1; // N, ~0.5 % of the 20 N target

#[derive(Clone, Copy, PartialEq, Eq)]
enum IntervalState {
    Rising,
    Falling,
    Still,
}

/// Splits a run into pull/release/dwell segments.
///
/// Motion is detected on displacement (`|Δd/Δt| > motion_eps`) because the
/// fabric may be slack near zero force; moving spans are classified by the
/// force trend (net change beyond `force_eps`, falling back to the
/// displacement direction), stationary spans by the preceding motion.
pub fn segment_cycles(
    tl: &Timeline,
    motion_eps: f64,
    force_eps: f64,
) -> Result<Segmentation, SeriesError> {
    tl.validate()?;
    let n = tl.len();
    if n == 1 {
        return Ok(Segmentation {
            segments: alloc::vec![Segment {
                kind: SegmentKind::DwellLow,
                start: 0,
                end: 1,
                cycle: 1
            }],
            no_motion: true,
        });
    }

    let state: Vec<IntervalState> = tl
        .samples
        .windows(2)
        .map(|p| {
            let v = (p[1].d - p[0].d) / (p[1].t - p[0].t);
            if v > motion_eps {
                IntervalState::Rising
            } else if v < -motion_eps {
                IntervalState::Falling
            } else {
                IntervalState::Still
            }
        })
        .collect();

    // group intervals into maximal same-state runs
    let mut runs: Vec<(IntervalState, usize, usize)> = Vec::new(); // (state, first, last)
    for (i, &st) in state.iter().enumerate() {
        match runs.last_mut() {
            Some((prev, _, last)) if *prev == st => *last = i,
            _ => runs.push((st, i, i)),
        }
    }

    let no_motion = runs.iter().all(|(st, _, _)| *st == IntervalState::Still);
    if no_motion {
        return Ok(Segmentation {
            segments: alloc::vec![Segment {
                kind: SegmentKind::DwellLow,
                start: 0,
                end: n,
                cycle: 1
            }],
            no_motion: true,
        });
    }

    let mut segments = Vec::with_capacity(runs.len());
    let mut cycle = 1u32;
    let mut seen_pull = false;
    let mut last_motion: Option<SegmentKind> = None;
    for (ri, &(st, first, last)) in runs.iter().enumerate() {
        let start = if ri == 0 { 0 } else { first };
        let end = if ri + 1 == runs.len() { n } else { last + 1 };
        let kind = match st {
            IntervalState::Still => match last_motion {
                Some(SegmentKind::Pull) => SegmentKind::DwellHigh,
                _ => SegmentKind::DwellLow,
            },
            _ => {
                let df = tl.samples[last + 1].f - tl.samples[first].f;
                let pull = if df > force_eps {
                    true
                } else if df < -force_eps {
                    false
                } else {
                    st == IntervalState::Rising
                };
                if pull {
                    if seen_pull {
                        cycle += 1;
                    }
                    seen_pull = true;
                    last_motion = Some(SegmentKind::Pull);
                    SegmentKind::Pull
                } else {
                    last_motion = Some(SegmentKind::Release);
                    SegmentKind::Release
                }
            }
        };
        segments.push(Segment { kind, start, end, cycle });
    }
    Ok(Segmentation { segments, no_motion: false })
}

/// Removes every segment of cycle 1 (the first actuation cycle is an
/// outlier). Remaining cycle numbers are preserved.
pub fn drop_first_cycle(seg: &Segmentation) -> Result<Vec<Segment>, SeriesError> {
    let cycles = seg.cycle_count();
    if cycles < 2 {
        return Err(SeriesError::TooFewCycles { needed: 2, found: cycles });
    }
    Ok(seg.segments.iter().copied().filter(|s| s.cycle != 1).collect())
}

/// Population mean and standard deviation.
pub fn mean_std(series: &[f64]) -> (f64, f64) {
    if series.is_empty() {
        return (0.0, 0.0);
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, math::sqrt(var))
}

/// Element-wise `(x − μ)/σ`.
pub fn standardize(series: &[f64], mu: f64, sigma: f64) -> Result<Vec<f64>, SeriesError> {
    if !(sigma > 0.0) {
        return Err(SeriesError::DegenerateSigma);
    }
    Ok(series.iter().map(|x| (x - mu) / sigma).collect())
}

/// Linear-interpolation resampling on a normalized [0, 1] axis. Endpoints
/// are preserved exactly.
pub fn resample(series: &[f64], target: usize) -> Result<Vec<f64>, SeriesError> {
    if series.len() < 2 || target < 2 {
        return Err(SeriesError::TooShort);
    }
    let n = series.len();
    let mut out = Vec::with_capacity(target);
    for j in 0..target {
        if j == 0 {
            out.push(series[0]);
            continue;
        }
        if j == target - 1 {
            out.push(series[n - 1]);
            continue;
        }
        // single rounding keeps interior positions monotone
        let pos = (j as f64 * (n - 1) as f64) / (target - 1) as f64;
        let i = (math::floor(pos) as usize).min(n - 2);
        let frac = pos - i as f64;
        out.push(series[i] + frac * (series[i + 1] - series[i]));
    }
    Ok(out)
}
