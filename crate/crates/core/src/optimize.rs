//! Bounded one-dimensional maximization: a coarse uniform scan picks a
//! bracket, golden-section search narrows it.
//!
//! The scan makes the result independent of any starting point and keeps
//! the refinement from being captured by a local optimum away from the best
//! scanned cell.

use crate::error::{Error, Result};

/// Number of cells in the coarse scan (the scan evaluates `SCAN_CELLS + 1`
/// points including both ends).
pub const SCAN_CELLS: usize = 1024;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarOptimum {
    pub argmax: f64,
    pub value: f64,
    /// Golden-section iterations after the scan.
    pub iterations: u32,
    /// Every scanned value was equal: the maximizer is not unique and
    /// `argmax` is the interval midpoint.
    pub flat: bool,
}

fn eval<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let v = f(x);
    if v.is_nan() {
        Err(Error::NanObjective(x))
    } else {
        Ok(v)
    }
}

/// Maximizes `objective` over `[lo, hi]`, refining to a bracket no wider
/// than `tol`.
///
/// Callers wanting an open interval pass inset bounds. `-inf` is an
/// acceptable objective value; NaN is not.
pub fn optimize_scalar<F>(objective: F, lo: f64, hi: f64, tol: f64) -> Result<ScalarOptimum>
where
    F: Fn(f64) -> f64,
{
    optimize_scalar_with_hint(objective, lo, hi, tol, None)
}

/// Like [`optimize_scalar`], with an extra candidate point evaluated next to
/// the scan. If the hint beats every scanned point the refinement brackets
/// the scan cell containing it.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn optimize_scalar_with_hint<F>(
    objective: F,
    lo: f64,
    hi: f64,
    tol: f64,
    hint: Option<f64>,
) -> Result<ScalarOptimum>
where
    F: Fn(f64) -> f64,
{
    if !(lo.is_finite() && hi.is_finite() && lo < hi) || !(tol > 0.0) {
        return Err(Error::InvalidInterval { lo, hi });
    }
    let step = (hi - lo) / SCAN_CELLS as f64;
    let grid = |i: usize| if i == SCAN_CELLS { hi } else { lo + step * i as f64 };

    let mut best_i = 0;
    let mut best_v = f64::NEG_INFINITY;
    let mut min_v = f64::INFINITY;
    for i in 0..=SCAN_CELLS {
        let v = eval(&objective, grid(i))?;
        if v > best_v || i == 0 {
            best_i = i;
            best_v = v;
        }
        min_v = min_v.min(v);
    }

    let flat = best_v == min_v || (best_v - min_v) <= 1e-14 * best_v.abs().max(1.0);
    if flat {
        let mid = 0.5 * (lo + hi);
        return Ok(ScalarOptimum {
            argmax: mid,
            value: eval(&objective, mid)?,
            iterations: 0,
            flat: true,
        });
    }

    let mut best_x = grid(best_i);
    let mut centre = best_i;
    if let Some(h) = hint.filter(|h| (lo..=hi).contains(h)) {
        let hv = eval(&objective, h)?;
        if hv > best_v {
            best_x = h;
            best_v = hv;
            centre = (((h - lo) / step) as usize).min(SCAN_CELLS);
        }
    }

    let mut a = grid(centre.saturating_sub(1));
    let mut b = grid((centre + 1).min(SCAN_CELLS));
    if centre < SCAN_CELLS && best_x > grid(centre) {
        // Hint strictly inside cell `centre`: bracket both neighbours of it.
        b = grid((centre + 2).min(SCAN_CELLS));
    }

    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(&objective, c)?;
    let mut fd = eval(&objective, d)?;
    let mut iterations = 0;
    while b - a > tol {
        iterations += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(&objective, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(&objective, d)?;
        }
        // Guard against a tolerance below the float spacing of the bracket.
        if iterations > 200 {
            break;
        }
    }

    let (gx, gv) = if fc >= fd { (c, fc) } else { (d, fd) };
    let (argmax, value) = if gv >= best_v { (gx, gv) } else { (best_x, best_v) };
    Ok(ScalarOptimum {
        argmax,
        value,
        iterations,
        flat: false,
    })
}
