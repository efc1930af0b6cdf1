//! Signed mixtures of Gaussian profiles in one or two measurement values.
//!
//! A finite-resolution outcome density decomposes exactly into a finite sum
//! of shifted normalized Gaussians with signed weights; negative weights are
//! the fingerprint of nonclassical statistics. The mixture also provides
//! exact cumulative masses over bins, which drive the goodness-of-fit checks
//! for the samplers.

use statrs::function::erf::erf;

use crate::error::{Error, Result};

/// One signed component: `weight` × N(center_a, σ²) in the photon-a value
/// and, when `center_b` is present, × N(center_b, σ²) in the photon-b value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianComponent {
    pub weight: f64,
    pub center_a: f64,
    pub center_b: Option<f64>,
    pub sigma: f64,
}

/// A signed, finite mixture of Gaussian components sharing a common width.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedGaussianMixture {
    components: Vec<GaussianComponent>,
}

fn normal_pdf(x: f64, center: f64, sigma: f64) -> f64 {
    let z = (x - center) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

fn normal_cdf(x: f64, center: f64, sigma: f64) -> f64 {
    0.5 * (1.0 + erf((x - center) / (sigma * std::f64::consts::SQRT_2)))
}

impl SignedGaussianMixture {
    pub fn new(components: Vec<GaussianComponent>) -> Result<Self> {
        for c in &components {
            let finite = c.weight.is_finite()
                && c.center_a.is_finite()
                && c.center_b.is_none_or(f64::is_finite);
            if !finite {
                return Err(Error::NonFinite { context: "mixture component" });
            }
            if !(c.sigma.is_finite() && c.sigma > 0.0) {
                return Err(Error::InvalidResolution { value: c.sigma });
            }
        }
        Ok(Self { components })
    }

    pub fn components(&self) -> &[GaussianComponent] {
        &self.components
    }

    pub fn is_two_dimensional(&self) -> bool {
        self.components.iter().any(|c| c.center_b.is_some())
    }

    /// Net signed weight; equals the total probability mass the mixture
    /// represents.
    pub fn total_weight(&self) -> f64 {
        self.components.iter().map(|c| c.weight).sum()
    }

    /// Most negative component weight (0 if none are negative).
    pub fn most_negative_weight(&self) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight)
            .fold(0.0f64, f64::min)
    }

    /// Density at a single photon-a value (one-dimensional mixtures only;
    /// components carrying a photon-b center are ignored by contract).
    pub fn density1d(&self, s: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * normal_pdf(s, c.center_a, c.sigma))
            .sum()
    }

    /// Joint density at a pair of measurement values.
    pub fn density2d(&self, sa: f64, sb: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let center_b = c.center_b.unwrap_or(0.0);
                c.weight * normal_pdf(sa, c.center_a, c.sigma) * normal_pdf(sb, center_b, c.sigma)
            })
            .sum()
    }

    /// Signed cumulative mass on (−∞, s].
    pub fn cdf1d(&self, s: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * normal_cdf(s, c.center_a, c.sigma))
            .sum()
    }

    /// Exact signed mass on the interval [lo, hi].
    pub fn bin_mass1d(&self, lo: f64, hi: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * (normal_cdf(hi, c.center_a, c.sigma) - normal_cdf(lo, c.center_a, c.sigma)))
            .sum()
    }

    /// Exact signed mass on the rectangle [a_lo, a_hi] × [b_lo, b_hi].
    pub fn bin_mass2d(&self, a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let center_b = c.center_b.unwrap_or(0.0);
                let mass_a = normal_cdf(a_hi, c.center_a, c.sigma) - normal_cdf(a_lo, c.center_a, c.sigma);
                let mass_b = normal_cdf(b_hi, center_b, c.sigma) - normal_cdf(b_lo, center_b, c.sigma);
                c.weight * mass_a * mass_b
            })
            .sum()
    }
}
