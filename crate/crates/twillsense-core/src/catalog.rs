//! Bundled response-curve parameters for the cataloged sensor variants.
//!
//! Each entry holds the pull- and release-branch parameters of the
//! exponential-plus-linear model fitted to measured characterization runs
//! of the physical patches (response axis: resistance as percent of the
//! run-initial value, force axis in newtons over the 0–20 N working range).
//! The erratic `P_RP` variant has no usable wale-direction curves, and only
//! `P_Th`/`P_PR` were characterized along the course direction.

use crate::fit::FitParams;
use crate::knit::VariantName;
use crate::series::Direction;

/// Pull/release model parameters for one variant and direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResponseCurves {
    pub pull: FitParams,
    pub release: FitParams,
}

const fn row(a: f64, s: f64, d: f64, k: f64, o: f64, r2: f64) -> FitParams {
    FitParams { a, s, d, k, o, r2: Some(r2) }
}

/// Wale-direction catalog: `(variant, pull, release)` for the nine usable
/// variants.
pub const WALE: [(VariantName, FitParams, FitParams); 9] = [
    (
        VariantName::PTl,
        row(-1.35, 15.8, 140.0, -0.556, 0.479, 0.570),
        row(-0.0897, 100.0, 36.3, 1.86, -5.00, 0.952),
    ),
    (
        VariantName::PTm,
        row(-0.0696, 100.0, 24.8, 1.32, -5.00, 0.958),
        row(-0.112, 100.0, 47.6, 0.302, -5.00, 0.959),
    ),
    (
        VariantName::PTh,
        row(-0.386, 36.5, 108.0, -1.17, -2.02, 0.982),
        row(-0.436, 43.1, 102.0, -1.26, -2.36, 0.988),
    ),
    (
        VariantName::PPr,
        row(-0.507, 26.8, 66.5, -0.935, -1.55, 0.989),
        row(-0.381, 45.3, 52.0, -0.257, -2.65, 0.993),
    ),
    (
        VariantName::Pl1M,
        row(-0.260, 38.7, 103.0, -1.14, -2.81, 0.991),
        row(-0.210, 100.0, 40.5, 1.30, -5.00, 0.992),
    ),
    (
        VariantName::Pl1H,
        row(-0.233, 38.8, 93.8, -0.778, -3.38, 0.982),
        row(-0.217, 100.0, 53.2, 0.509, -5.00, 0.983),
    ),
    (
        VariantName::Pl1Ml,
        row(-0.317, 28.0, 82.3, -0.835, -2.31, 0.990),
        row(-0.347, 42.3, 74.2, -0.532, -3.02, 0.996),
    ),
    (
        VariantName::Pl2MPlus,
        row(-0.0317, 27.4, 2.61e-8, -0.0178, -5.00, 0.956),
        row(-0.0797, 23.6, 7.66e-10, 0.466, -5.00, 0.962),
    ),
    (
        VariantName::Pl2Hl,
        row(-0.349, 3.68, 33.5, -0.458, -0.450, 0.964),
        row(-0.08264, 28.5, 2.18e-5, 0.627, -5.00, 0.983),
    ),
];

/// Course-direction catalog for the two variants characterized that way.
pub const COURSE: [(VariantName, FitParams, FitParams); 2] = [
    (
        VariantName::PTh,
        row(-0.167, 97.6, 19.0, 1.47, -5.0, 0.993),
        row(-0.225, 77.0, 40.9, 0.743, -4.54, 0.993),
    ),
    (
        VariantName::PPr,
        row(-0.0947, 62.2, 5.40e-15, 1.23, -5.0, 0.968),
        row(-0.271, 27.5, 42.6, 0.212, -2.46, 0.969),
    ),
];

/// Looks up the response curves for a variant along a direction; `None`
/// when no usable characterization exists.
pub fn response_curves(variant: VariantName, direction: Direction) -> Option<ResponseCurves> {
    let table: &[(VariantName, FitParams, FitParams)] = match direction {
        Direction::Wale => &WALE,
        Direction::Course => &COURSE,
    };
    table
        .iter()
        .find(|(v, _, _)| *v == variant)
        .map(|&(_, pull, release)| ResponseCurves { pull, release })
}

/// All `(variant, curves)` pairs of one direction, in catalog order.
pub fn all_curves(direction: Direction) -> alloc::vec::Vec<(VariantName, ResponseCurves)> {
    let table: &[(VariantName, FitParams, FitParams)] = match direction {
        Direction::Wale => &WALE,
        Direction::Course => &COURSE,
    };
    table
        .iter()
        .map(|&(v, pull, release)| (v, ResponseCurves { pull, release }))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coverage_matches_characterized_sets() {
        assert_eq!(WALE.len(), 9);
        assert_eq!(COURSE.len(), 2);
        assert!(response_curves(VariantName::PRp, Direction::Wale).is_none());
        assert!(response_curves(VariantName::PTh, Direction::Course).is_some());
        assert!(response_curves(VariantName::Pl2Hl, Direction::Course).is_none());
    }

    #[test]
    fn all_rows_inside_parameter_box() {
        for (_, pull, release) in WALE.iter().chain(COURSE.iter()) {
            assert!(pull.in_bounds(), "pull row out of box");
            assert!(release.in_bounds(), "release row out of box");
            assert!(pull.r2.unwrap() <= 1.0 && release.r2.unwrap() <= 1.0);
        }
    }
}
