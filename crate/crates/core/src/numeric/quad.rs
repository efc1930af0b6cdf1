//! Adaptive quadrature built on a 15-point Gauss–Kronrod panel rule.
//!
//! The panel rule evaluates a 7-point Gauss estimate embedded in a 15-point
//! Kronrod estimate; the difference between the two serves as the local error
//! estimate. Panels whose error dominates are bisected until the summed error
//! meets the requested tolerance.

use crate::error::{Error, Result};

/// Kronrod abscissae on [0, 1] (symmetric about the panel center).
const XGK: [f64; 8] = [
    0.991_455_371_120_813,
    0.949_107_912_342_759,
    0.864_864_423_359_769,
    0.741_531_185_599_394,
    0.586_087_235_467_691,
    0.405_845_151_377_397,
    0.207_784_955_007_898,
    0.0,
];

/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022_935_322_010_529,
    0.063_092_092_629_979,
    0.104_790_010_322_250,
    0.140_653_259_715_525,
    0.169_004_726_639_267,
    0.190_350_578_064_785,
    0.204_432_940_075_298,
    0.209_482_141_084_728,
];

/// Gauss weights for the embedded 7-point rule (odd-index abscissae of `XGK`,
/// plus the center).
const WG: [f64; 4] = [
    0.129_484_966_168_870,
    0.279_705_391_489_277,
    0.381_830_050_505_119,
    0.417_959_183_673_469,
];

/// One 15-point panel: returns (integral estimate, error estimate).
fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        resk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    (resk * h, (resk - resg).abs() * h)
}

struct Region {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Maximum number of panels before giving up.
const MAX_REGIONS: usize = 4096;

/// Integrates `f` over `[a, b]` to relative tolerance `rel_tol` (with an
/// absolute floor of `rel_tol` itself for integrals near zero).
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    let (value, error) = panel(&f, a, b);
    let mut regions = vec![Region { a, b, value, error }];
    loop {
        let mut total = 0.0;
        let mut err_sum = 0.0;
        let mut worst = 0usize;
        let mut worst_err = -1.0;
        for (i, r) in regions.iter().enumerate() {
            total += r.value;
            err_sum += r.error;
            if r.error > worst_err {
                worst_err = r.error;
                worst = i;
            }
        }
        if !total.is_finite() {
            return Err(Error::QuadratureNoConvergence { estimate: total });
        }
        if err_sum <= rel_tol * total.abs().max(1.0) {
            return Ok(total);
        }
        if regions.len() >= MAX_REGIONS {
            return Err(Error::QuadratureNoConvergence { estimate: total });
        }
        let Region { a, b, .. } = regions.swap_remove(worst);
        let mid = 0.5 * (a + b);
        let (v1, e1) = panel(&f, a, mid);
        let (v2, e2) = panel(&f, mid, b);
        regions.push(Region { a, b: mid, value: v1, error: e1 });
        regions.push(Region { a: mid, b, value: v2, error: e2 });
    }
}

/// Integrates `f(x, y)` over `[ax, bx] × [ay, by]` by nesting two adaptive
/// passes; the inner pass runs at a tenfold tighter tolerance so that inner
/// errors do not dominate the outer estimate.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    ax: f64,
    bx: f64,
    ay: f64,
    by: f64,
    rel_tol: f64,
) -> Result<f64> {
    let inner_tol = rel_tol * 0.1;
    let outer = integrate(
        |x| integrate(|y| f(x, y), ay, by, inner_tol).unwrap_or(f64::NAN),
        ax,
        bx,
        rel_tol,
    )?;
    if outer.is_finite() {
        Ok(outer)
    } else {
        Err(Error::QuadratureNoConvergence { estimate: outer })
    }
}

/// Non-adaptive single-panel estimate; used for cumulative tabulation where
/// the panels are already fine.
pub fn panel_estimate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    panel(f, a, b).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let v = integrate(|x| x * x, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn gaussian_mass() {
        let sigma = 0.7;
        let g = move |x: f64| (-x * x / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * PI).sqrt());
        let v = integrate(g, -10.0, 10.0, 1e-10).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn oscillatory() {
        let v = integrate(|x: f64| x.sin(), 0.0, PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
    }

    #[test]
    fn odd_integrand_near_zero_total() {
        let v = integrate(|x: f64| x.powi(3), -3.0, 3.0, 1e-10).unwrap();
        assert!(v.abs() < 1e-10);
    }

    #[test]
    fn two_dimensional_product() {
        let g = |x: f64, y: f64| {
            let gx = (-x * x / 2.0).exp() / (2.0 * PI).sqrt();
            let gy = (-(y - 1.0) * (y - 1.0) / 2.0).exp() / (2.0 * PI).sqrt();
            gx * gy
        };
        let v = integrate_2d(g, -9.0, 9.0, -8.0, 10.0, 1e-9).unwrap();
        assert!((v - 1.0).abs() < 1e-8);
    }

    #[test]
    fn panel_estimate_close_on_smooth() {
        let v = panel_estimate(&|x: f64| x.exp(), 0.0, 0.1);
        assert!((v - (0.1f64.exp() - 1.0)).abs() < 1e-14);
    }
}
