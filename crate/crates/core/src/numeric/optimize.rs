//! Scalar root finding and derivative-free maximization.

use crate::error::{Error, Result};

/// Finds a root of `f` on `[a, b]` by bisection to interval width `x_tol`.
/// The endpoints must bracket a sign change.
pub fn bisect_root<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, x_tol: f64) -> Result<f64> {
    let mut lo = a;
    let mut hi = b;
    let flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() * fhi.signum() > 0.0 {
        return Err(Error::RootNotBracketed { a, b });
    }
    let mut flo = flo;
    while hi - lo > x_tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if flo.signum() * fm.signum() < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    Ok(0.5 * (lo + hi))
}

const INV_PHI: f64 = 0.618_033_988_749_894_9; // (√5 − 1)/2
const INV_PHI2: f64 = 0.381_966_011_250_105_1; // 1 − (√5 − 1)/2

/// Maximizes a unimodal `f` on `[a, b]` by golden-section search; returns
/// `(argmax, max)` once the bracketing interval is narrower than `x_tol`.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, x_tol: f64) -> (f64, f64) {
    let mut lo = a;
    let mut hi = b;
    let mut h = hi - lo;
    let mut c = lo + INV_PHI2 * h;
    let mut d = lo + INV_PHI * h;
    let mut fc = f(c);
    let mut fd = f(d);
    while h > x_tol {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            h = hi - lo;
            c = lo + INV_PHI2 * h;
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            h = hi - lo;
            d = lo + INV_PHI * h;
            fd = f(d);
        }
    }
    let x = 0.5 * (lo + hi);
    (x, f(x))
}

/// Refines a local maximum of `f(x, y)` by alternating golden-section line
/// searches within a window of half-width `window` around the current point,
/// clamped to `[lo, hi]` per coordinate.
pub fn coordinate_ascent_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    start: (f64, f64),
    window: f64,
    lo: f64,
    hi: f64,
    x_tol: f64,
) -> (f64, f64, f64) {
    let (mut x, mut y) = start;
    for _ in 0..64 {
        let (nx, _) = golden_section_max(
            |t| f(t, y),
            (x - window).max(lo),
            (x + window).min(hi),
            x_tol,
        );
        let (ny, _) = golden_section_max(
            |t| f(nx, t),
            (y - window).max(lo),
            (y + window).min(hi),
            x_tol,
        );
        let moved = (nx - x).abs().max((ny - y).abs());
        x = nx;
        y = ny;
        if moved < x_tol {
            break;
        }
    }
    (x, y, f(x, y))
}

/// Scans an `n × n` grid over `[lo, hi]²` and returns the strict local maxima
/// whose value is within `slack` (relatively) of the grid-global maximum,
/// as starting points for refinement.
pub fn grid_local_maxima<F: Fn(f64, f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    n: usize,
    slack: f64,
) -> Vec<(f64, f64)> {
    let step = (hi - lo) / (n - 1) as f64;
    let mut values = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            values[i * n + j] = f(lo + i as f64 * step, lo + j as f64 * step);
        }
    }
    let global = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = values[i * n + j];
            if v < global * (1.0 - slack) {
                continue;
            }
            let mut is_max = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni < 0 || nj < 0 || ni >= n as i64 || nj >= n as i64 {
                        continue;
                    }
                    if values[ni as usize * n + nj as usize] > v {
                        is_max = false;
                    }
                }
            }
            if is_max {
                out.push((lo + i as f64 * step, lo + j as f64 * step));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect_root(|x| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-11);
    }

    #[test]
    fn bisect_rejects_unbracketed() {
        assert!(matches!(
            bisect_root(|x| x * x + 1.0, -1.0, 1.0, 1e-9),
            Err(Error::RootNotBracketed { .. })
        ));
    }

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, v) = golden_section_max(|x| -(x - 0.3) * (x - 0.3), -1.0, 1.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-7);
        assert!(v.abs() < 1e-13);
    }

    #[test]
    fn coordinate_ascent_refines_2d_peak() {
        let f = |x: f64, y: f64| -((x - 0.7).powi(2) + 2.0 * (y + 0.2).powi(2));
        let (x, y, _) = coordinate_ascent_2d(f, (0.5, 0.0), 1.0, -2.0, 2.0, 1e-9);
        assert!((x - 0.7).abs() < 1e-6);
        assert!((y + 0.2).abs() < 1e-6);
    }

    #[test]
    fn grid_scan_sees_both_symmetric_peaks() {
        let f = |x: f64, y: f64| (-(x - 1.0).powi(2) - (y - 1.0).powi(2)).exp()
            + (-(x + 1.0).powi(2) - (y + 1.0).powi(2)).exp();
        let peaks = grid_local_maxima(f, -3.0, 3.0, 61, 1e-6);
        assert_eq!(peaks.len(), 2);
    }
}
