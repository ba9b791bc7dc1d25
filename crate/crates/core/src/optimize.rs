//! Local bound by vertex enumeration, and search over polarizer angles for
//! the largest quantum violation.
//!
//! The inequality margin is linear in the census, and every census is a
//! nonnegative integer combination of single-strategy censuses, so the
//! largest local margin per pair is attained at one of the `2^3` strategies.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::inequality::{normalized_sides, wigner_counts, SettingTriple};
use crate::lhv::{enumerate_shared_strategies, SettingMenu, SharedStrategy, StrategyCensus};
use crate::quantum::{cos_sq, sin_sq};

pub const DEFAULT_GRID_STEP_DEG: f64 = 1.0;
pub const DEFAULT_REFINE_TOLERANCE_DEG: f64 = 1e-6;
pub const MAX_GRID_STEP_DEG: f64 = 5.0;
pub const MIN_REFINE_TOLERANCE_DEG: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VertexMargin {
    #[serde(serialize_with = "strategy_key")]
    pub strategy: SharedStrategy,
    pub lhs: u64,
    pub rhs: u64,
    pub margin: i64,
}

fn strategy_key<S: serde::Serializer>(s: &SharedStrategy, ser: S) -> std::result::Result<S::Ok, S::Error> {
    ser.serialize_str(&s.key())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundResult {
    /// Largest `rhs − lhs` per emitted pair over all local models.
    pub max_margin: f64,
    #[serde(serialize_with = "strategy_key")]
    pub attaining_strategy: SharedStrategy,
    pub vertices_examined: usize,
    pub vertices: Vec<VertexMargin>,
}

/// Evaluate the count-form inequality on a one-pair census for every shared
/// strategy over the menu `[a, b, c]`. Ties keep the first strategy in
/// enumeration order.
pub fn local_bound(triple: &SettingTriple) -> Result<BoundResult> {
    let menu = SettingMenu::new(vec![triple.a, triple.b, triple.c])?;
    let vertices = enumerate_shared_strategies(&menu)
        .into_iter()
        .map(|s| {
            let census = StrategyCensus::concentrated(menu.clone(), &s, 1)?;
            let r = wigner_counts(&census, triple)?;
            Ok(VertexMargin {
                strategy: s,
                lhs: r.lhs as u64,
                rhs: r.rhs as u64,
                margin: r.margin as i64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let best = vertices
        .iter()
        .reduce(|best, v| if v.margin > best.margin { v } else { best })
        .expect("at least one vertex");
    Ok(BoundResult {
        max_margin: best.margin as f64,
        attaining_strategy: best.strategy.clone(),
        vertices_examined: vertices.len(),
        vertices,
    })
}

/// Quantum margin `cos²θ₂ − cos²(θ₁+θ₂) − sin²θ₁` for the collinear
/// arrangement `(a,b) = θ₁`, `(b,c) = θ₂`, `(a,c) = θ₁ + θ₂`.
pub fn quantum_margin(theta1: f64, theta2: f64) -> Result<f64> {
    for t in [theta1, theta2] {
        if !(t > 0.0 && t < 90.0) {
            return Err(Error::AngleOutOfRange(t));
        }
    }
    Ok(margin_at(theta1, theta2))
}

fn margin_at(theta1: f64, theta2: f64) -> f64 {
    cos_sq(theta2) - cos_sq(theta1 + theta2) - sin_sq(theta1)
}

/// Maximize a unimodal `f` on `[lo, hi]` by golden-section search until the
/// bracket is narrower than `tol`. Returns the best point seen.
pub fn golden_section_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (lo, hi);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
    }
    [(x1, f1), (x2, f2), (lo, f(lo)), (hi, f(hi))]
        .into_iter()
        .fold((x1, f1), |best, p| if p.1 > best.1 { p } else { best })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Optimum {
    pub theta1_deg: f64,
    pub theta2_deg: f64,
    pub margin: f64,
}

fn check_search_params(grid_step: f64, refine_tolerance: f64) -> Result<()> {
    if !(grid_step > 0.0 && grid_step <= MAX_GRID_STEP_DEG) {
        return Err(Error::InvalidParameter(format!(
            "grid step must be in (0, {MAX_GRID_STEP_DEG}] degrees, got {grid_step}"
        )));
    }
    if !(refine_tolerance >= MIN_REFINE_TOLERANCE_DEG && refine_tolerance.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "refine tolerance must be at least {MIN_REFINE_TOLERANCE_DEG} degrees, got {refine_tolerance}"
        )));
    }
    Ok(())
}

/// Interior grid points `step, 2·step, …` strictly inside `(0°, 90°)`.
fn grid(step: f64) -> Vec<f64> {
    (1..)
        .map(|i| i as f64 * step)
        .take_while(|&t| t < 90.0 - 1e-9)
        .collect()
}

/// Coarse scan over `(θ₁, θ₂)` then coordinate-wise golden-section
/// refinement around the best grid point.
pub fn maximize_violation(grid_step: f64, refine_tolerance: f64) -> Result<Optimum> {
    check_search_params(grid_step, refine_tolerance)?;
    let points = grid(grid_step);
    let mut best = (points[0], points[0], f64::NEG_INFINITY);
    // Row-major scan with strict improvement keeps the lexicographically
    // smallest point among ties.
    for &t1 in &points {
        for &t2 in &points {
            let m = margin_at(t1, t2);
            if m > best.2 {
                best = (t1, t2, m);
            }
        }
    }

    let edge = refine_tolerance.min(grid_step / 2.0);
    let (lo, hi) = (edge, 90.0 - edge);
    let (mut x, mut y, mut m) = best;
    for _ in 0..500 {
        let (nx, _) = golden_section_max(
            |t| margin_at(t, y),
            (x - grid_step).max(lo),
            (x + grid_step).min(hi),
            refine_tolerance / 4.0,
        );
        let (ny, nm) = golden_section_max(
            |t| margin_at(nx, t),
            (y - grid_step).max(lo),
            (y + grid_step).min(hi),
            refine_tolerance / 4.0,
        );
        let moved = (nx - x).abs().max((ny - y).abs());
        if nm >= m {
            (x, y, m) = (nx, ny, nm);
        }
        if moved < refine_tolerance / 4.0 {
            break;
        }
    }
    Ok(Optimum {
        theta1_deg: x,
        theta2_deg: y,
        margin: m,
    })
}

/// One-parameter search with `θ₁ = θ₂ = θ`.
pub fn maximize_symmetric_violation(grid_step: f64, refine_tolerance: f64) -> Result<Optimum> {
    check_search_params(grid_step, refine_tolerance)?;
    let f = |t: f64| margin_at(t, t);
    let start = grid(grid_step)
        .into_iter()
        .fold((0.0, f64::NEG_INFINITY), |best, t| {
            let m = f(t);
            if m > best.1 {
                (t, m)
            } else {
                best
            }
        });
    let edge = refine_tolerance.min(grid_step / 2.0);
    let (t, m) = golden_section_max(
        f,
        (start.0 - grid_step).max(edge),
        (start.0 + grid_step).min(90.0 - edge),
        refine_tolerance / 4.0,
    );
    let (t, m) = if m >= start.1 { (t, m) } else { start };
    Ok(Optimum {
        theta1_deg: t,
        theta2_deg: t,
        margin: m,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub theta_deg: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub violated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

/// Normalized inequality along `(a,b) = (b,c) = θ`, `(a,c) = 2θ`, for
/// `θ = theta_min, theta_min + step, …` up to `theta_max` inclusive.
pub fn sweep_symmetric(theta_min: f64, theta_max: f64, step: f64) -> Result<SweepResult> {
    let valid = theta_min.is_finite()
        && theta_max.is_finite()
        && 0.0 <= theta_min
        && theta_min < theta_max
        && theta_max <= 90.0
        && step > 0.0
        && step.is_finite();
    if !valid {
        return Err(Error::InvalidParameter(format!(
            "sweep needs 0 <= min < max <= 90 and step > 0, got min {theta_min}, max {theta_max}, step {step}"
        )));
    }
    let rows = (0..)
        .map(|i| theta_min + i as f64 * step)
        .take_while(|&t| t <= theta_max + 1e-9)
        .map(|t| {
            let t = t.min(theta_max);
            let (lhs, rhs) = normalized_sides(t, t, 2.0 * t);
            let margin = rhs - lhs;
            SweepRow {
                theta_deg: t,
                lhs,
                rhs,
                margin,
                violated: margin > crate::inequality::VIOLATION_TOLERANCE,
            }
        })
        .collect();
    Ok(SweepResult { rows })
}

/// CSV with header `theta_deg,lhs,rhs,margin`.
pub fn write_sweep_csv<W: Write>(sweep: &SweepResult, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["theta_deg", "lhs", "rhs", "margin"])?;
    for r in &sweep.rows {
        w.write_record([
            r.theta_deg.to_string(),
            r.lhs.to_string(),
            r.rhs.to_string(),
            r.margin.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
