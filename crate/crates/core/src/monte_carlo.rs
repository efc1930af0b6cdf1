//! Reproducible Monte Carlo simulation of the sequential measurements.
//!
//! Sampling follows the physical measurement chain: draw the fuzzy
//! first-component value from its marginal density, collapse the state with
//! the matching measurement operator, draw the next stage from the collapsed
//! state, and finish with the precise second-component signs. Records are
//! generated in fixed-size chunks, each from its own counter-mode RNG
//! stream, so results are bit-identical for a given seed regardless of how
//! many threads execute the chunks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::numeric::interp::InverseCdf;
use crate::operator::{
    apply_measurement, apply_to_photon_a, apply_to_photon_b, measurement_operator,
    stokes_operator, tensor_state, MeasurementKernel, PairKet, PolarizationKet,
};
use crate::pair::{bell_point_value, bell_state};
use crate::single::{s2_eigenstate, split_amplitudes};

/// Records per RNG stream; the chunk layout, not the thread schedule,
/// determines which uniforms feed which record.
const CHUNK: usize = 4096;
/// Number of quantile-table knots requested before adaptive refinement.
const INITIAL_KNOTS: usize = 2048;
/// Post-measurement norms below this leave no defined collapsed state.
const DEGENERATE_DENSITY: f64 = 1e-300;
/// Uniform draws are kept this far from 0 and 1 before entering the normal
/// quantile, bounding the conditional draw at about ±8.2 widths.
const UNIFORM_FLOOR: f64 = 1.1e-16;

/// One simulated run of the measurement sequence. Photon-b fields are
/// `None` for single-photon records and always present for pair records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleRecord {
    pub s1ma: f64,
    pub s1mb: Option<f64>,
    pub sigma_a: i8,
    pub sigma_b: Option<i8>,
}

/// Point estimate with its standard error and sample count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorResult {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

pub(crate) fn validate_pair_records(records: &[SampleRecord]) -> Result<()> {
    if records.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: records.len() });
    }
    if records.iter().any(|r| r.s1mb.is_none() || r.sigma_b.is_none()) {
        return Err(Error::WrongRecordKind { expected: "pair" });
    }
    Ok(())
}

pub(crate) fn validate_single_records(records: &[SampleRecord]) -> Result<()> {
    if records.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: records.len() });
    }
    if records.iter().any(|r| r.s1mb.is_some() || r.sigma_b.is_some()) {
        return Err(Error::WrongRecordKind { expected: "single-photon" });
    }
    Ok(())
}

fn chunk_rng(seed: u64, chunk_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk_index as u64);
    rng
}

fn run_chunked<F>(n: usize, seed: u64, body: F) -> Result<Vec<SampleRecord>>
where
    F: Fn(&mut ChaCha8Rng) -> Result<SampleRecord> + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let nested: Vec<Vec<SampleRecord>> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = chunk_rng(seed, ci);
            let count = CHUNK.min(n - ci * CHUNK);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                out.push(body(&mut rng)?);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// Simulates `n` single-photon runs: a fuzzy first-component value drawn by
/// inverse-CDF from its exact two-Gaussian marginal, state collapse under
/// the matching measurement operator, then a precise second-component sign
/// drawn from the collapsed state.
pub fn sample_single(
    state: &PolarizationKet,
    kernel: &MeasurementKernel,
    seed: u64,
    n: usize,
) -> Result<Vec<SampleRecord>> {
    let (c_plus, c_minus) = split_amplitudes(state);
    let (w_plus, w_minus) = (c_plus.norm_sqr(), c_minus.norm_sqr());
    let sigma = kernel.resolution();
    let half_width = kernel.sampling_halfwidth();
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let marginal = move |s: f64| {
        let zp = (s - 1.0) / sigma;
        let zm = (s + 1.0) / sigma;
        norm * (w_plus * (-0.5 * zp * zp).exp() + w_minus * (-0.5 * zm * zm).exp())
    };
    let quantile = InverseCdf::build(marginal, -half_width, half_width, INITIAL_KNOTS)?;
    let target = stokes_operator(1)?;
    let plus_eigen = s2_eigenstate(1)?;
    run_chunked(n, seed, |rng| {
        let u1: f64 = rng.random();
        let s1m = quantile.sample(u1);
        let (_, post) = apply_measurement(state, kernel, &target, s1m)?;
        let p_plus = plus_eigen.inner(&post).norm_sqr();
        let u2: f64 = rng.random();
        let sigma_a = if u2 < p_plus { 1 } else { -1 };
        Ok(SampleRecord { s1ma: s1m, s1mb: None, sigma_a, sigma_b: None })
    })
}

fn collapse_pair(image: PairKet) -> Result<PairKet> {
    let density = image.norm_sqr();
    if density < DEGENERATE_DENSITY {
        return Err(Error::DegenerateOutcome { density });
    }
    let scale = 1.0 / density.sqrt();
    PairKet::from_raw(image.amps().map(|a| a * scale))
}

/// Simulates `n` runs of the full pair sequence on the entangled state:
/// photon a's fuzzy value from its marginal (inverse CDF), collapse; photon
/// b's fuzzy value from the exact conditional two-Gaussian mixture (component
/// pick plus normal quantile), collapse; then the joint second-component
/// signs from the fully collapsed state.
pub fn sample_pair(kernel: &MeasurementKernel, seed: u64, n: usize) -> Result<Vec<SampleRecord>> {
    let state = bell_state();
    let sigma = kernel.resolution();
    let half_width = kernel.sampling_halfwidth();
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    let marginal = move |s: f64| {
        let zp = (s - 1.0) / sigma;
        let zm = (s + 1.0) / sigma;
        0.5 * norm * ((-0.5 * zp * zp).exp() + (-0.5 * zm * zm).exp())
    };
    let quantile = InverseCdf::build(marginal, -half_width, half_width, INITIAL_KNOTS)?;
    let target = stokes_operator(1)?;
    let standard_normal = Normal::new(0.0, 1.0).expect("unit normal is valid");
    let channels: Vec<(i8, i8, PairKet)> = [(1i8, 1i8), (1, -1), (-1, 1), (-1, -1)]
        .iter()
        .map(|&(qa, qb)| {
            let bra = tensor_state(&s2_eigenstate(qa)?, &s2_eigenstate(qb)?);
            Ok((qa, qb, bra))
        })
        .collect::<Result<Vec<_>>>()?;
    run_chunked(n, seed, |rng| {
        let u1: f64 = rng.random();
        let s1ma = quantile.sample(u1);
        let op_a = measurement_operator(kernel, &target, s1ma)?;
        let phi1 = collapse_pair(apply_to_photon_a(&op_a, &state))?;
        // Photon b's conditional density is exactly
        // w₊·N(+1, δs²) + w₋·N(−1, δs²) with w₊ set by the collapsed
        // state's photon-b first-component expectation.
        let amps = phi1.amps();
        let b_component_mean =
            2.0 * (amps[0].conj() * amps[1] + amps[2].conj() * amps[3]).re;
        let w_plus = 0.5 * (1.0 + b_component_mean);
        let u2: f64 = rng.random();
        let center = if u2 < w_plus { 1.0 } else { -1.0 };
        let u3 = rng.random::<f64>().clamp(UNIFORM_FLOOR, 1.0 - UNIFORM_FLOOR);
        let s1mb = center + sigma * standard_normal.inverse_cdf(u3);
        let op_b = measurement_operator(kernel, &target, s1mb)?;
        let phi2 = collapse_pair(apply_to_photon_b(&op_b, &phi1))?;
        let u4: f64 = rng.random();
        let mut cumulative = 0.0;
        let mut chosen = (channels[3].0, channels[3].1);
        for (qa, qb, bra) in &channels {
            cumulative += bra.inner(&phi2).norm_sqr();
            if u4 < cumulative {
                chosen = (*qa, *qb);
                break;
            }
        }
        Ok(SampleRecord {
            s1ma,
            s1mb: Some(s1mb),
            sigma_a: chosen.0,
            sigma_b: Some(chosen.1),
        })
    })
}

/// Mean and standard error of the per-event Bell combination over pair
/// records.
pub fn estimate_k(records: &[SampleRecord]) -> Result<EstimatorResult> {
    validate_pair_records(records)?;
    let n = records.len();
    let values: Vec<f64> = records
        .iter()
        .map(|r| {
            bell_point_value(
                r.s1ma,
                r.s1mb.expect("validated pair record"),
                r.sigma_a as f64,
                r.sigma_b.expect("validated pair record") as f64,
            )
        })
        .collect();
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
    Ok(EstimatorResult { mean, std_error: (var / n as f64).sqrt(), n })
}

/// Sample estimate of the squared-value/sign correlation
/// C = −2·(mean(s1m²) − δs²)·mean(σ) over single-photon records, with a
/// first-order (delta-method) standard error propagated from the joint
/// sampling covariance of the two means.
pub fn estimate_correlation_s1sq_s2(
    records: &[SampleRecord],
    kernel: &MeasurementKernel,
) -> Result<EstimatorResult> {
    validate_single_records(records)?;
    let n = records.len();
    let nf = n as f64;
    let squares: Vec<f64> = records.iter().map(|r| r.s1ma * r.s1ma).collect();
    let signs: Vec<f64> = records.iter().map(|r| r.sigma_a as f64).collect();
    let mean_sq = squares.iter().sum::<f64>() / nf;
    let mean_sign = signs.iter().sum::<f64>() / nf;
    let var = kernel.resolution() * kernel.resolution();
    let centered = mean_sq - var;
    let mean = -2.0 * centered * mean_sign;
    let mut s_aa = 0.0;
    let mut s_bb = 0.0;
    let mut s_ab = 0.0;
    for (a, b) in squares.iter().zip(signs.iter()) {
        let da = a - mean_sq;
        let db = b - mean_sign;
        s_aa += da * da;
        s_bb += db * db;
        s_ab += da * db;
    }
    let denom = (n - 1) as f64;
    s_aa /= denom;
    s_bb /= denom;
    s_ab /= denom;
    let grad_var = 4.0
        * (mean_sign * mean_sign * s_aa
            + centered * centered * s_bb
            + 2.0 * mean_sign * centered * s_ab);
    Ok(EstimatorResult { mean, std_error: (grad_var.max(0.0) / nf).sqrt(), n })
}

/// Formats a float with 17 significant digits in scientific notation, enough
/// to round-trip the exact binary value.
pub fn format_float17(value: f64) -> String {
    format!("{value:.16e}")
}

/// Serializes records as CSV with header `s1ma,s1mb,sigma_a,sigma_b`.
/// Continuous values carry 17 significant digits; photon-b cells are empty
/// for single-photon records.
pub fn records_to_csv(records: &[SampleRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str("s1ma,s1mb,sigma_a,sigma_b\n");
    for r in records {
        out.push_str(&format_float17(r.s1ma));
        out.push(',');
        if let Some(sb) = r.s1mb {
            out.push_str(&format_float17(sb));
        }
        out.push(',');
        out.push_str(&r.sigma_a.to_string());
        out.push(',');
        if let Some(qb) = r.sigma_b {
            out.push_str(&qb.to_string());
        }
        out.push('\n');
    }
    out
}

/// Survival probability of a chi-squared statistic with `dof` degrees of
/// freedom.
pub fn chi_square_survival(statistic: f64, dof: f64) -> Result<f64> {
    if !(dof.is_finite() && dof > 0.0 && statistic.is_finite() && statistic >= 0.0) {
        return Err(Error::NonFinite { context: "chi-square arguments" });
    }
    let dist = ChiSquared::new(dof).map_err(|_| Error::NonFinite { context: "chi-square dof" })?;
    Ok(dist.sf(statistic))
}
