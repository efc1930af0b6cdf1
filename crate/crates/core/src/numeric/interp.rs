//! Monotone cubic interpolation and tabulated inverse-CDF sampling.

use crate::error::{Error, Result};
use crate::numeric::quad::panel_estimate;

/// Shape-preserving cubic Hermite interpolant (Fritsch–Carlson slope
/// limiting): monotone data produce a monotone interpolant.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// Builds the interpolant from strictly increasing abscissae.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(Error::InvalidKnots { reason: "need at least two knots" });
        }
        if xs.iter().any(|v| !v.is_finite()) || ys.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: "interpolation knots" });
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidKnots { reason: "abscissae must be strictly increasing" });
        }
        let n = xs.len();
        let mut secants = vec![0.0f64; n - 1];
        for i in 0..n - 1 {
            secants[i] = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        }
        let mut slopes = vec![0.0f64; n];
        slopes[0] = secants[0];
        slopes[n - 1] = secants[n - 2];
        for i in 1..n - 1 {
            if secants[i - 1] * secants[i] <= 0.0 {
                slopes[i] = 0.0;
            } else {
                slopes[i] = 0.5 * (secants[i - 1] + secants[i]);
            }
        }
        // Limit slopes so each cubic piece stays monotone.
        for i in 0..n - 1 {
            if secants[i] == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
            } else {
                let alpha = slopes[i] / secants[i];
                let beta = slopes[i + 1] / secants[i];
                if alpha > 3.0 {
                    slopes[i] = 3.0 * secants[i];
                }
                if beta > 3.0 {
                    slopes[i + 1] = 3.0 * secants[i];
                }
            }
        }
        Ok(Self { xs, ys, slopes })
    }

    /// Evaluates the interpolant; arguments outside the knot range clamp to
    /// the boundary values.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = match self.xs.partition_point(|&v| v <= x) {
            0 => 0,
            k => k - 1,
        };
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1]
    }
}

/// Number of uniform panels used for the cumulative tabulation.
const FINE_PANELS: usize = 8192;

/// Largest knot count tried before giving up on the accuracy target.
const MAX_KNOTS: usize = 16384;

/// Accuracy target for the interpolated quantile map, measured in CDF units.
const CDF_TOL: f64 = 1e-6;

/// Tabulated quantile function of a continuous distribution on `[lo, hi]`:
/// maps a uniform variate u ∈ [0, 1] to a sample x with CDF(x) = u.
///
/// Construction integrates the density into a fine cumulative table, places
/// initial knots at equally spaced CDF levels, and interpolates x(u) with a
/// monotone cubic. Intervals whose midpoint misses the exact CDF by more
/// than 1e-6 get a knot inserted at the failing midpoint, which concentrates
/// refinement in near-flat tails where uniform levels are far apart in x.
#[derive(Debug, Clone)]
pub struct InverseCdf {
    quantile: MonotoneCubic,
    grid_x: Vec<f64>,
    grid_cdf: Vec<f64>,
}

impl InverseCdf {
    pub fn build<F: Fn(f64) -> f64>(density: F, lo: f64, hi: f64, initial_knots: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidKnots { reason: "invalid support interval" });
        }
        let step = (hi - lo) / FINE_PANELS as f64;
        let mut grid_x = Vec::with_capacity(FINE_PANELS + 1);
        let mut grid_cdf = Vec::with_capacity(FINE_PANELS + 1);
        grid_x.push(lo);
        grid_cdf.push(0.0);
        let mut acc = 0.0;
        for i in 0..FINE_PANELS {
            let a = lo + i as f64 * step;
            let b = lo + (i + 1) as f64 * step;
            acc += panel_estimate(&density, a, b);
            grid_x.push(b);
            grid_cdf.push(acc);
        }
        let total = acc;
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::NonFinite { context: "density normalization" });
        }
        for c in grid_cdf.iter_mut() {
            *c /= total;
        }
        // Enforce exact monotone non-decreasing CDF despite rounding.
        for i in 1..grid_cdf.len() {
            if grid_cdf[i] < grid_cdf[i - 1] {
                grid_cdf[i] = grid_cdf[i - 1];
            }
        }
        let last = grid_cdf.len() - 1;
        grid_cdf[last] = 1.0;

        let helper = Tabulated { density: &density, grid_x: &grid_x, grid_cdf: &grid_cdf, total };
        let initial = initial_knots.clamp(16, MAX_KNOTS);
        let mut knots: Vec<(f64, f64)> = Vec::with_capacity(initial);
        for j in 0..initial {
            let u = j as f64 / (initial - 1) as f64;
            let x = helper.quantile(u, lo, hi);
            if let Some(&(_, prev)) = knots.last()
                && x <= prev
            {
                continue; // collapse duplicate knots in flat stretches
            }
            knots.push((u, x));
        }
        loop {
            let us: Vec<f64> = knots.iter().map(|k| k.0).collect();
            let xs: Vec<f64> = knots.iter().map(|k| k.1).collect();
            let quantile = MonotoneCubic::new(us.clone(), xs)?;
            let mut insertions: Vec<(usize, (f64, f64))> = Vec::new();
            for (i, w) in us.windows(2).enumerate() {
                let um = 0.5 * (w[0] + w[1]);
                let x = quantile.eval(um);
                if (helper.cdf(x) - um).abs() < CDF_TOL {
                    continue;
                }
                let xm = helper.quantile(um, lo, hi);
                if xm > knots[i].1 && xm < knots[i + 1].1 {
                    insertions.push((i + 1, (um, xm)));
                }
            }
            if insertions.is_empty() {
                // Either every interval passed, or the failing ones cannot be
                // subdivided further; re-check which case applies.
                let clean = us.windows(2).all(|w| {
                    let um = 0.5 * (w[0] + w[1]);
                    (helper.cdf(quantile.eval(um)) - um).abs() < CDF_TOL
                });
                if !clean {
                    return Err(Error::InvalidKnots {
                        reason: "quantile table failed its accuracy target",
                    });
                }
                return Ok(Self { quantile, grid_x, grid_cdf });
            }
            if knots.len() + insertions.len() > MAX_KNOTS {
                return Err(Error::InvalidKnots {
                    reason: "quantile table failed its accuracy target",
                });
            }
            // Insert from the back so earlier indices stay valid.
            for (at, knot) in insertions.into_iter().rev() {
                knots.insert(at, knot);
            }
        }
    }

    /// Maps a uniform variate to a sample of the tabulated distribution.
    pub fn sample(&self, u: f64) -> f64 {
        self.quantile.eval(u.clamp(0.0, 1.0))
    }

    /// Evaluates the tabulated CDF (piecewise-linear between fine-grid nodes);
    /// exposed for accuracy checks.
    pub fn cdf(&self, x: f64) -> f64 {
        linear_cdf(&self.grid_x, &self.grid_cdf, x)
    }
}

fn linear_cdf(grid_x: &[f64], grid_cdf: &[f64], x: f64) -> f64 {
    let n = grid_x.len();
    if x <= grid_x[0] {
        return 0.0;
    }
    if x >= grid_x[n - 1] {
        return 1.0;
    }
    let i = grid_x.partition_point(|&v| v <= x) - 1;
    let t = (x - grid_x[i]) / (grid_x[i + 1] - grid_x[i]);
    grid_cdf[i] + t * (grid_cdf[i + 1] - grid_cdf[i])
}

/// Cumulative table with exact in-panel refinement against the density.
struct Tabulated<'a, F: Fn(f64) -> f64> {
    density: &'a F,
    grid_x: &'a [f64],
    grid_cdf: &'a [f64],
    total: f64,
}

impl<F: Fn(f64) -> f64> Tabulated<'_, F> {
    /// CDF with sub-panel correction by one further panel integral.
    fn cdf(&self, x: f64) -> f64 {
        let n = self.grid_x.len();
        if x <= self.grid_x[0] {
            return 0.0;
        }
        if x >= self.grid_x[n - 1] {
            return 1.0;
        }
        let i = self.grid_x.partition_point(|&v| v <= x) - 1;
        self.grid_cdf[i] + panel_estimate(self.density, self.grid_x[i], x) / self.total
    }

    /// Inverts the CDF by bisection on the fine grid plus in-panel bisection.
    fn quantile(&self, u: f64, lo: f64, hi: f64) -> f64 {
        if u <= 0.0 {
            return lo;
        }
        if u >= 1.0 {
            return hi;
        }
        let idx = self.grid_cdf.partition_point(|&c| c < u);
        let i = idx.saturating_sub(1).min(self.grid_x.len() - 2);
        let mut a = self.grid_x[i];
        let mut b = self.grid_x[i + 1];
        for _ in 0..52 {
            let mid = 0.5 * (a + b);
            if self.cdf(mid) < u {
                a = mid;
            } else {
                b = mid;
            }
            if b - a < 1e-13 * (1.0 + mid.abs()) {
                break;
            }
        }
        0.5 * (a + b)
    }
}
