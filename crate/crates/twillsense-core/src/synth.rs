//! Synthetic tensile-test generation: the verification backbone of the
//! analysis pipeline.
//!
//! A [`Protocol`] shapes the force trajectory (triangles, trapezoids with
//! dwell, stepped peaks, long holds); a [`ResponseModel`] maps force to
//! resistance through the pull/release fit curves plus configurable noise,
//! exponential relaxation and drift during dwells, and per-cycle wear-out
//! on the displacement. Phase lengths are rounded to whole samples so the
//! trajectory reaches its extremes exactly on a sample, which keeps the
//! closed-form metric targets exact.

use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::fit::{model_eval, FitParams};
use crate::knit::VariantName;
use crate::math;
use crate::series::{Direction, RunMeta, Sample, Timeline};

/// Sampling period of the simulated rig (40 Hz aggregate rate).
pub const SAMPLE_DT: f64 = 0.025;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolKind {
    /// Triangles to the target force, immediate reversal.
    EqualForce,
    /// Trapezoids: hold at the target and at rest.
    Dwell,
    /// Equal-force cycling at a scaled jog rate.
    VaryingSpeed,
    /// Per-cycle targets stepping 5 N up to 40 N.
    IncreasingForce,
    /// One cycle with long holds at each end.
    LongTerm,
    /// Equal-force cycling mounted along the course direction.
    CourseDirectional,
    /// Thousands of strain-target cycles with short dwells.
    LongTermRepetition,
}

/// Test protocol parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Protocol {
    pub kind: ProtocolKind,
    pub cycles: u32,
    /// Peak force per cycle, N (ignored when `schedule` or `strain_target`
    /// is set).
    pub target_force: f64,
    /// Per-cycle force targets; overrides `target_force`.
    pub schedule: Option<Vec<f64>>,
    /// Actuator speed, mm/s.
    pub jog_rate: f64,
    /// Hold time at each end, s (zero = no dwell).
    pub dwell_time: f64,
    /// Pull to this strain instead of a force target (the force peak then
    /// follows from the model compliance).
    pub strain_target: Option<f64>,
}

pub const BASE_JOG_RATE: f64 = 1.333;

impl Protocol {
    pub fn equal_force() -> Self {
        Protocol {
            kind: ProtocolKind::EqualForce,
            cycles: 5,
            target_force: 20.0,
            schedule: None,
            jog_rate: BASE_JOG_RATE,
            dwell_time: 0.0,
            strain_target: None,
        }
    }

    pub fn dwell() -> Self {
        Protocol {
            kind: ProtocolKind::Dwell,
            dwell_time: 5.0,
            ..Protocol::equal_force()
        }
    }

    pub fn varying_speed(factor: f64) -> Self {
        Protocol {
            kind: ProtocolKind::VaryingSpeed,
            jog_rate: BASE_JOG_RATE * factor,
            ..Protocol::equal_force()
        }
    }

    pub fn increasing_force() -> Self {
        Protocol {
            kind: ProtocolKind::IncreasingForce,
            cycles: 8,
            schedule: Some((1..=8).map(|i| 5.0 * i as f64).collect()),
            ..Protocol::equal_force()
        }
    }

    pub fn long_term() -> Self {
        Protocol {
            kind: ProtocolKind::LongTerm,
            cycles: 1,
            dwell_time: 900.0,
            ..Protocol::equal_force()
        }
    }

    pub fn course_directional() -> Self {
        Protocol { kind: ProtocolKind::CourseDirectional, ..Protocol::equal_force() }
    }

    pub fn long_term_repetition() -> Self {
        Protocol {
            kind: ProtocolKind::LongTermRepetition,
            cycles: 2200,
            dwell_time: 3.0,
            strain_target: Some(0.2),
            ..Protocol::equal_force()
        }
    }
}

/// Force-to-resistance response plus disturbance knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseModel {
    pub pull: FitParams,
    pub release: FitParams,
    /// White Gaussian noise SD on the response axis (percent of R₀, like
    /// the fit curves).
    pub noise_sd: f64,
    /// Saturating relative resistance change during strained dwells.
    pub relaxation_amp: f64,
    pub relaxation_tau: f64,
    /// Saturating relative resistance change during rest dwells.
    pub drift_amp: f64,
    pub drift_tau: f64,
    /// Permanent elongation added per cycle, mm.
    pub wearout_per_cycle: f64,
    /// Displacement per force, mm/N.
    pub compliance: f64,
    /// Resistance corresponding to a response value of 100, Ω.
    pub base_resistance: f64,
    /// Fraction by which the force peak overshoots its target (rig
    /// communication lag stand-in).
    pub overshoot: f64,
}

impl ResponseModel {
    /// Noise- and disturbance-free model from the bundled variant curves.
    pub fn from_variant(variant: VariantName, direction: Direction) -> Option<Self> {
        let curves = crate::catalog::response_curves(variant, direction)?;
        Some(ResponseModel {
            pull: curves.pull,
            release: curves.release,
            noise_sd: 0.0,
            relaxation_amp: 0.0,
            relaxation_tau: 1.0,
            drift_amp: 0.0,
            drift_tau: 1.0,
            wearout_per_cycle: 0.0,
            compliance: 0.6,
            base_resistance: 250e3,
            overshoot: 0.0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthError {
    #[error("protocol/model inconsistency: {0}")]
    Config(&'static str),
}

/// Generates one synthetic run. Deterministic for a fixed seed.
pub fn generate(
    protocol: &Protocol,
    model: &ResponseModel,
    seed: u64,
) -> Result<Timeline, SynthError> {
    if protocol.cycles == 0 {
        return Err(SynthError::Config("cycle count must be positive"));
    }
    if !(protocol.jog_rate > 0.0) {
        return Err(SynthError::Config("jog rate must be positive"));
    }
    if !(model.compliance > 0.0) {
        return Err(SynthError::Config("compliance must be positive"));
    }
    if !(model.base_resistance > 0.0) {
        return Err(SynthError::Config("base resistance must be positive"));
    }
    if protocol.kind == ProtocolKind::Dwell && !(protocol.dwell_time > 0.0) {
        return Err(SynthError::Config("dwell protocol needs a positive dwell time"));
    }
    if (model.relaxation_amp != 0.0 && !(model.relaxation_tau > 0.0))
        || (model.drift_amp != 0.0 && !(model.drift_tau > 0.0))
    {
        return Err(SynthError::Config("disturbance time constants must be positive"));
    }
    if model.noise_sd < 0.0
        || model.relaxation_amp < 0.0
        || model.drift_amp < 0.0
        || model.wearout_per_cycle < 0.0
        || model.overshoot < 0.0
    {
        return Err(SynthError::Config("disturbance amplitudes must be non-negative"));
    }

    let meta = RunMeta {
        direction: if protocol.kind == ProtocolKind::CourseDirectional {
            Direction::Course
        } else {
            Direction::Wale
        },
        jog_rate: protocol.jog_rate,
        ..RunMeta::default()
    };

    let targets: Vec<f64> = match (&protocol.schedule, protocol.strain_target) {
        (Some(schedule), _) => {
            if schedule.len() != protocol.cycles as usize {
                return Err(SynthError::Config("schedule length must equal the cycle count"));
            }
            schedule.clone()
        }
        (None, Some(strain)) => {
            if !(strain > 0.0) {
                return Err(SynthError::Config("strain target must be positive"));
            }
            let force = strain * meta.l0 / model.compliance;
            alloc::vec![force; protocol.cycles as usize]
        }
        (None, None) => {
            if !(protocol.target_force > 0.0) {
                return Err(SynthError::Config("target force must be positive"));
            }
            alloc::vec![protocol.target_force; protocol.cycles as usize]
        }
    };

    let dwell_samples = math::round(protocol.dwell_time / SAMPLE_DT) as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");

    let response_to_r = |y: f64, rng: &mut ChaCha8Rng| -> f64 {
        let noisy = if model.noise_sd > 0.0 {
            y + model.noise_sd * normal.sample(rng)
        } else {
            y
        };
        (model.base_resistance * noisy / 100.0).max(1e-6)
    };

    let mut samples = Vec::new();
    let mut t = 0.0;
    let push = |samples: &mut Vec<Sample>, t: &mut f64, d: f64, f: f64, r: f64| {
        samples.push(Sample { t: *t, d, f, r });
        *t += SAMPLE_DT;
    };

    // initial rest sample on the pull branch
    push(&mut samples, &mut t, 0.0, 0.0, response_to_r(model_eval(&model.pull, 0.0), &mut rng));

    let mut wear_done = 0.0;
    for (ci, &target) in targets.iter().enumerate() {
        let peak = target * (1.0 + model.overshoot);
        let travel = peak * model.compliance;
        let leg = (math::round(travel / protocol.jog_rate / SAMPLE_DT) as usize).max(1);
        let wear_next = model.wearout_per_cycle * (ci + 1) as f64;

        // pull: force ramps to the peak, wear accrues across the phase
        for j in 1..=leg {
            let frac = j as f64 / leg as f64;
            let f = peak * frac;
            let d = f * model.compliance + wear_done + (wear_next - wear_done) * frac;
            let r = response_to_r(model_eval(&model.pull, f), &mut rng);
            push(&mut samples, &mut t, d, f, r);
        }
        wear_done = wear_next;

        // strained dwell: relaxation referenced to the peak sample
        if dwell_samples > 0 {
            let base = model_eval(&model.pull, peak);
            for j in 1..=dwell_samples {
                let dt = j as f64 * SAMPLE_DT;
                let y = base
                    * (1.0
                        + model.relaxation_amp * (1.0 - math::exp(-dt / model.relaxation_tau)));
                let d = peak * model.compliance + wear_done;
                push(&mut samples, &mut t, d, peak, response_to_r(y, &mut rng));
            }
        }

        // release back to zero force
        for j in 1..=leg {
            let f = peak * (1.0 - j as f64 / leg as f64);
            let d = f * model.compliance + wear_done;
            let r = response_to_r(model_eval(&model.release, f), &mut rng);
            push(&mut samples, &mut t, d, f, r);
        }

        // rest dwell: drift referenced to the return sample
        if dwell_samples > 0 {
            let base = model_eval(&model.release, 0.0);
            for j in 1..=dwell_samples {
                let dt = j as f64 * SAMPLE_DT;
                let y = base * (1.0 + model.drift_amp * (1.0 - math::exp(-dt / model.drift_tau)));
                push(&mut samples, &mut t, wear_done, 0.0, response_to_r(y, &mut rng));
            }
        }
    }

    Timeline::new(samples, meta).map_err(|_| SynthError::Config("generated run failed validation"))
}

/// Noiseless `(force, response)` samples of a fit curve on a force grid.
pub fn regenerate_from_fit(fit: &FitParams, f_grid: &[f64]) -> Vec<(f64, f64)> {
    f_grid.iter().map(|&f| (f, model_eval(fit, f))).collect()
}
