//! Bounded nonlinear least-squares fitting of the exponential-plus-linear
//! response model
//!
//! ```text
//! y(x) = s · 2^(a·(x + o)) + k·x + d
//! ```
//!
//! to `(force, response)` segment data. The fitter runs a deterministic
//! multi-start schedule of damped least-squares (Levenberg-Marquardt) with
//! an analytic Jacobian and box bounds enforced by projection. Because the
//! model is linear in `(s·2^(a·o), k, d)` once `a` is fixed, every start is
//! refined by an exact linear solve of those parameters plus a golden-section
//! search over `a` (the pair `(s, o)` is only identified through `s·2^(a·o)`,
//! so recovered parameters may differ from the generating ones while the
//! predictions match).

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg;
use crate::math;

const LN2: f64 = core::f64::consts::LN_2;

/// Parameter box: `a` non-positive, `s` in (0, 100], `o` in [-5, 5],
/// `d` non-negative, `k` free.
pub const A_MIN: f64 = -10.0;
pub const A_MAX: f64 = 0.0;
pub const S_MIN: f64 = 1e-12;
pub const S_MAX: f64 = 100.0;
pub const D_MIN: f64 = 0.0;
pub const O_MIN: f64 = -5.0;
pub const O_MAX: f64 = 5.0;

/// Parameters of the exponential-plus-linear model with goodness of fit.
///
/// `r2` is `None` when undefined (zero response variance).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitParams {
    pub a: f64,
    pub s: f64,
    pub d: f64,
    pub k: f64,
    pub o: f64,
    pub r2: Option<f64>,
}

impl FitParams {
    pub const fn new(a: f64, s: f64, d: f64, k: f64, o: f64) -> Self {
        FitParams { a, s, d, k, o, r2: None }
    }

    pub fn in_bounds(&self) -> bool {
        (A_MIN..=A_MAX).contains(&self.a)
            && (S_MIN..=S_MAX).contains(&self.s)
            && self.d >= D_MIN
            && (O_MIN..=O_MAX).contains(&self.o)
    }
}

/// Evaluates the model at one force value.
pub fn model_eval(p: &FitParams, force: f64) -> f64 {
    p.s * math::exp2(p.a * (force + p.o)) + p.k * force + p.d
}

/// Analytic partial derivatives in parameter order `[a, s, d, k, o]`.
pub fn model_jacobian(p: &FitParams, force: f64) -> [f64; 5] {
    let e = math::exp2(p.a * (force + p.o));
    [
        p.s * LN2 * (force + p.o) * e,
        e,
        1.0,
        force,
        p.s * LN2 * p.a * e,
    ]
}

/// Which branch of a hysteresis loop the points belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurveKind {
    Pull,
    Release,
}

/// Input to [`fit_curve`]: at least 6 `(force, response)` points.
#[derive(Debug, Clone, PartialEq)]
pub struct FitInput {
    pub points: Vec<(f64, f64)>,
    pub kind: CurveKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FitError {
    #[error("need at least 6 points, got {0}")]
    TooFewPoints(usize),
    #[error("non-finite value in the input points")]
    NonFinite,
}

/// Fit outcome. `converged` is false when the iteration budget ran out
/// while still improving; the parameters are then the best found so far.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: FitParams,
    pub converged: bool,
    /// Input had zero response variance; parameters are the flat fallback.
    pub degenerate: bool,
}

const MAX_ITER: usize = 200;
const FTOL: f64 = 1e-10;
const STARTS: [(f64, f64, f64); 5] = [
    // (a0, golden bracket lo, hi)
    (-0.02, -0.1, 0.0),
    (-0.05, -0.6, -0.02),
    (-0.3, -2.0, -0.1),
    (-1.0, -10.0, -0.5),
    (-3.0, -10.0, 0.0),
];

fn clamp_params(p: &mut [f64; 5]) {
    p[0] = p[0].clamp(A_MIN, A_MAX);
    p[1] = p[1].clamp(S_MIN, S_MAX);
    p[2] = p[2].max(D_MIN);
    p[4] = p[4].clamp(O_MIN, O_MAX);
}

fn as_params(p: &[f64; 5]) -> FitParams {
    FitParams::new(p[0], p[1], p[2], p[3], p[4])
}

fn ssr(p: &[f64; 5], pts: &[(f64, f64)]) -> f64 {
    let fp = as_params(p);
    pts.iter().map(|&(x, y)| {
        let r = model_eval(&fp, x) - y;
        r * r
    }).sum()
}

/// One damped least-squares run from `p0`; returns (params, cost, converged).
fn levenberg_marquardt(p0: [f64; 5], pts: &[(f64, f64)]) -> ([f64; 5], f64, bool) {
    let mut p = p0;
    clamp_params(&mut p);
    let mut cost = ssr(&p, pts);
    let mut lambda = 1e-3;
    for _ in 0..MAX_ITER {
        let fp = as_params(&p);
        // normal equations J^T J and J^T r
        let mut jtj = [[0.0f64; 5]; 5];
        let mut jtr = [0.0f64; 5];
        for &(x, y) in pts {
            let row = model_jacobian(&fp, x);
            let r = model_eval(&fp, x) - y;
            for i in 0..5 {
                jtr[i] += row[i] * r;
                for j in i..5 {
                    jtj[i][j] += row[i] * row[j];
                }
            }
        }
        let mut improved = false;
        for _ in 0..30 {
            let mut a = [0.0f64; 25];
            let mut b = [0.0f64; 5];
            for i in 0..5 {
                for j in 0..5 {
                    a[i * 5 + j] = if j >= i { jtj[i][j] } else { jtj[j][i] };
                }
                a[i * 5 + i] += lambda * jtj[i][i].max(1e-12);
                b[i] = -jtr[i];
            }
            if linalg::cholesky_solve(&mut a, &mut b, 5).is_none() {
                lambda *= 10.0;
                continue;
            }
            let mut q = p;
            let mut finite = true;
            for i in 0..5 {
                q[i] += b[i];
                finite &= q[i].is_finite();
            }
            if !finite {
                lambda *= 10.0;
                continue;
            }
            clamp_params(&mut q);
            let c2 = ssr(&q, pts);
            if c2 < cost {
                let rel = (cost - c2) / cost.max(f64::MIN_POSITIVE);
                p = q;
                cost = c2;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if rel < FTOL {
                    return (p, cost, true);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            // no descent direction left at this damping range
            return (p, cost, true);
        }
    }
    (p, cost, false)
}

/// Column-scaled ridge solve of the normal equations for up to 3 columns.
fn linear_lsq(cols: &[&[f64]], y: &[f64]) -> Option<Vec<f64>> {
    let m = cols.len();
    let mut norms = Vec::with_capacity(m);
    for c in cols {
        let nn = math::sqrt(c.iter().map(|v| v * v).sum::<f64>());
        norms.push(if nn > 0.0 { nn } else { 1.0 });
    }
    let mut a = vec![0.0; m * m];
    let mut b = vec![0.0; m];
    for i in 0..m {
        for j in 0..m {
            let dot: f64 = cols[i].iter().zip(cols[j]).map(|(x, z)| x * z).sum();
            a[i * m + j] = dot / (norms[i] * norms[j]);
        }
        let dot: f64 = cols[i].iter().zip(y).map(|(x, z)| x * z).sum();
        b[i] = dot / norms[i];
    }
    let mut ridge = 1e-12;
    for _ in 0..8 {
        let mut aa = a.clone();
        let mut bb = b.clone();
        for i in 0..m {
            aa[i * m + i] += ridge;
        }
        if linalg::cholesky_solve(&mut aa, &mut bb, m).is_some() {
            for i in 0..m {
                bb[i] /= norms[i];
            }
            return Some(bb);
        }
        ridge *= 100.0;
    }
    None
}

/// Exact solve for the conditionally linear parameters at a fixed `a`:
/// `y ≈ c·2^(a·x) + k·x + d` with `c = s·2^(a·o)` constrained to the box
/// image and `d ≥ 0`; then maps `c` back to `(s, o)`.
fn linear_polish(a: f64, pts: &[(f64, f64)]) -> Option<[f64; 5]> {
    let n = pts.len();
    let e: Vec<f64> = pts.iter().map(|&(x, _)| math::exp2(a * x)).collect();
    let xs: Vec<f64> = pts.iter().map(|&(x, _)| x).collect();
    let ones = vec![1.0; n];
    let y: Vec<f64> = pts.iter().map(|&(_, v)| v).collect();
    // largest representable c = s·2^(a·o) inside the box (a ≤ 0, o ≥ -5)
    let c_hi = if a < 0.0 { S_MAX * math::exp2(O_MIN * a) } else { S_MAX };

    let sol = linear_lsq(&[&e, &xs, &ones], &y)?;
    let (mut c, mut k, mut d) = (sol[0], sol[1], sol[2]);
    for _ in 0..3 {
        let mut changed = false;
        if !(S_MIN..=c_hi).contains(&c) {
            c = c.clamp(S_MIN, c_hi);
            let resid: Vec<f64> = y.iter().zip(&e).map(|(yi, ei)| yi - c * ei).collect();
            let kd = linear_lsq(&[&xs, &ones], &resid)?;
            k = kd[0];
            d = kd[1];
            changed = true;
        }
        if d < D_MIN {
            d = D_MIN;
            let resid: Vec<f64> = y.iter().map(|yi| yi - d).collect();
            let ck = linear_lsq(&[&e, &xs], &resid)?;
            c = ck[0];
            k = ck[1];
            changed = true;
        }
        if !changed {
            break;
        }
    }
    c = c.clamp(S_MIN, c_hi);
    d = d.max(D_MIN);
    let (s, o) = if c <= S_MAX {
        (c, 0.0)
    } else {
        // spread the excess into the force shift: c = s·2^(a·o)
        let o = (math::log2(c / S_MAX) / a).clamp(O_MIN, O_MAX);
        (S_MAX, o)
    };
    let mut p = [a, s, d, k, o];
    clamp_params(&mut p);
    Some(p)
}

fn golden_section(mut lo: f64, mut hi: f64, pts: &[(f64, f64)]) -> Option<[f64; 5]> {
    const GR: f64 = 0.618_033_988_749_894_9;
    let eval = |a: f64| linear_polish(a, pts).map(|p| (ssr(&p, pts), p));
    let mut b = hi - GR * (hi - lo);
    let mut c = lo + GR * (hi - lo);
    let (mut fb, _) = eval(b)?;
    let (mut fc, _) = eval(c)?;
    for _ in 0..60 {
        if fb < fc {
            hi = c;
            c = b;
            fc = fb;
            b = hi - GR * (hi - lo);
            fb = eval(b)?.0;
        } else {
            lo = b;
            b = c;
            fb = fc;
            c = lo + GR * (hi - lo);
            fc = eval(c)?.0;
        }
    }
    linear_polish((lo + hi) / 2.0, pts)
}

/// Fits the model to segment data.
///
/// Minimizes the sum of squared residuals over the parameter box and
/// reports `r2 = 1 − SS_res/SS_tot`. Deterministic: the multi-start
/// schedule is fixed. Zero-variance input returns the flat fallback with
/// `r2` flagged undefined.
pub fn fit_curve(input: &FitInput) -> Result<FitResult, FitError> {
    let pts = &input.points;
    if pts.len() < 6 {
        return Err(FitError::TooFewPoints(pts.len()));
    }
    if pts.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(FitError::NonFinite);
    }
    let y_mean = pts.iter().map(|&(_, y)| y).sum::<f64>() / pts.len() as f64;
    let ss_tot: f64 = pts.iter().map(|&(_, y)| (y - y_mean) * (y - y_mean)).sum();
    if ss_tot == 0.0 {
        return Ok(FitResult {
            params: FitParams { a: 0.0, s: S_MIN, d: y_mean, k: 0.0, o: 0.0, r2: None },
            converged: true,
            degenerate: true,
        });
    }

    // shared start values per the schedule
    let mut fs: Vec<f64> = pts.iter().map(|&(x, _)| x).collect();
    fs.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let q75 = fs[(3 * (fs.len() - 1)) / 4];
    let top: Vec<f64> =
        pts.iter().filter(|&&(x, _)| x >= q75).map(|&(_, y)| y).collect();
    let d0 = if top.is_empty() { y_mean } else { top.iter().sum::<f64>() / top.len() as f64 };
    let (x_min_idx, _) = pts
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.partial_cmp(&b.1 .0).unwrap())
        .expect("non-empty");
    let s0 = (pts[x_min_idx].1 - d0).clamp(S_MIN, S_MAX);
    let k0 = line_slope(pts);

    let mut best: Option<([f64; 5], f64, bool)> = None;
    for &(a0, blo, bhi) in &STARTS {
        let start = [a0, s0, d0.max(D_MIN), k0, 0.0];
        let start_cost = {
            let mut sc = start;
            clamp_params(&mut sc);
            ssr(&sc, pts)
        };
        let (mut p, mut cost, mut conv) = levenberg_marquardt(start, pts);
        for _ in 0..3 {
            match linear_polish(p[0], pts) {
                Some(q) if ssr(&q, pts) < cost => {
                    let (p2, c2, conv2) = levenberg_marquardt(q, pts);
                    p = p2;
                    cost = c2;
                    conv = conv2;
                }
                _ => break,
            }
        }
        if let Some(g) = golden_section(blo, bhi, pts) {
            let (p2, c2, conv2) = levenberg_marquardt(g, pts);
            if c2 < cost {
                p = p2;
                cost = c2;
                conv = conv2;
            }
        }
        debug_assert!(cost <= start_cost * (1.0 + 1e-12));
        match &best {
            Some((_, bc, _)) if *bc <= cost => {}
            _ => best = Some((p, cost, conv)),
        }
    }
    let (p, cost, converged) = best.expect("at least one start");
    let mut params = as_params(&p);
    params.r2 = Some(1.0 - cost / ss_tot);
    Ok(FitResult { params, converged, degenerate: false })
}

fn line_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(x, y) in pts {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Coefficient of determination of `p` against the points:
/// `1 − SS_res/SS_tot`. `None` when fewer than two points or the response
/// variance is zero.
pub fn goodness(points: &[(f64, f64)], p: &FitParams) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let mean = points.iter().map(|&(_, y)| y).sum::<f64>() / points.len() as f64;
    let ss_tot: f64 = points.iter().map(|&(_, y)| (y - mean) * (y - mean)).sum();
    if ss_tot == 0.0 {
        return None;
    }
    let ss_res: f64 = points
        .iter()
        .map(|&(x, y)| {
            let r = model_eval(p, x) - y;
            r * r
        })
        .sum();
    Some(1.0 - ss_res / ss_tot)
}
