//! Sequential polarization measurements on an entangled photon pair: the
//! maximally entangled input state, exact outcome densities for two fuzzy
//! first-component readings followed by precise second-component signs,
//! signed decompositions, and the Bell combination whose expectation exceeds
//! the local bound 2 once the measurement resolution is coarse enough.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mixture::{GaussianComponent, SignedGaussianMixture};
use crate::monte_carlo::SampleRecord;
use crate::numeric::optimize::{bisect_root, coordinate_ascent_2d, grid_local_maxima};
use crate::numeric::quad::integrate_2d;
use crate::operator::{
    apply_to_photon_a, apply_to_photon_b, measurement_operator, stokes_operator, tensor_op,
    tensor_state, HermitianOp2, MeasurementKernel, Op4, PairKet,
};
use crate::single::s2_eigenstate;
use crate::table::QuasiProbabilityTable;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

fn check_sign(sign: i8) -> Result<f64> {
    match sign {
        1 => Ok(1.0),
        -1 => Ok(-1.0),
        _ => Err(Error::InvalidComponentSign { value: sign }),
    }
}

/// The entangled input state (|R;L⟩ + e^(iπ/4)|L;R⟩)/√2: one photon right
/// circular and the other left, superposed with a π/4 relative phase that
/// points the correlated observables midway between the first two Stokes
/// axes on photon a.
pub fn bell_state() -> PairKet {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    PairKet::new(
        Complex64::ZERO,
        Complex64::new(h, 0.0),
        Complex64::new(0.5, 0.5),
        Complex64::ZERO,
    )
    .expect("amplitudes are normalized by construction")
}

/// Per-event Bell combination value
/// k = s1ma·s1mb + σa·s1mb − s1ma·σb + σa·σb for one joint outcome record.
pub fn bell_point_value(s1ma: f64, s1mb: f64, sigma_a: f64, sigma_b: f64) -> f64 {
    s1ma * s1mb + sigma_a * s1mb - s1ma * sigma_b + sigma_a * sigma_b
}

fn correlated_operators() -> Result<(Op4, Op4)> {
    let s1 = stokes_operator(1)?;
    let s2 = stokes_operator(2)?;
    let o1 = tensor_op(&s1.add(&s2).scale(std::f64::consts::FRAC_1_SQRT_2), &s1);
    let o2 = tensor_op(&s1.sub(&s2).scale(std::f64::consts::FRAC_1_SQRT_2), &s2).scale(-1.0);
    Ok((o1, o2))
}

/// L2 residuals ‖Ô|ψ⟩ − |ψ⟩‖ of the two product observables that the
/// entangled state satisfies with eigenvalue +1: photon a measured along the
/// diagonal (sum) direction correlates with photon b's first component, and
/// along the antidiagonal (difference) direction anti-correlates with photon
/// b's second component.
pub fn verify_eigenstate_relations(state: &PairKet) -> Result<(f64, f64)> {
    let (o1, o2) = correlated_operators()?;
    let residual = |op: &Op4| -> f64 {
        let image = op.apply(state);
        let amps_i = image.amps();
        let amps_s = state.amps();
        amps_i
            .iter()
            .zip(amps_s.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    Ok((residual(&o1), residual(&o2)))
}

/// Closed-form joint outcome density for the entangled state: fuzzy
/// first-component values `s1ma`, `s1mb` on the two photons followed by
/// precise second-component signs `sigma_a`, `sigma_b`. Evaluated in a form
/// whose exponents are never positive, so it underflows gracefully instead
/// of overflowing at sharp resolutions.
pub fn joint_density_pair(
    kernel: &MeasurementKernel,
    s1ma: f64,
    s1mb: f64,
    sigma_a: i8,
    sigma_b: i8,
) -> Result<f64> {
    let sa = check_sign(sigma_a)?;
    let sb = check_sign(sigma_b)?;
    if !(s1ma.is_finite() && s1mb.is_finite()) {
        return Err(Error::NonFinite { context: "measurement value" });
    }
    let var = kernel.resolution() * kernel.resolution();
    let beta = 1.0 / (2.0 * var);
    let s_arg = beta * (s1ma * sb + s1mb * sa);
    let d_arg = beta * (s1mb * sa - s1ma * sb);
    let base = -beta * (s1ma * s1ma + s1mb * s1mb + 2.0);
    let (s_abs, d_abs) = (s_arg.abs(), d_arg.abs());
    let cosh_tail = 1.0 + (-2.0 * s_abs).exp();
    let sinh_tail = 1.0 - (-2.0 * d_abs).exp();
    let cross = d_arg.signum()
        * 0.5
        * sinh_tail
        * cosh_tail
        * (base + s_abs + d_abs).exp();
    let parity = sa * sb;
    let cosh_sq = (SQRT_2 + parity) * 0.25 * cosh_tail * cosh_tail * (base + 2.0 * s_abs).exp();
    let sinh_sq = (SQRT_2 - parity) * 0.25 * sinh_tail * sinh_tail * (base + 2.0 * d_abs).exp();
    let prefactor = SQRT_2 / (16.0 * std::f64::consts::PI * var);
    Ok(prefactor * (cross + cosh_sq + sinh_sq))
}

/// The same joint density evaluated by explicit operator algebra on an
/// arbitrary pair state: apply both fuzzy measurement operators, then project
/// on the product of second-component eigenstates.
pub fn joint_density_pair_matrix(
    state: &PairKet,
    kernel: &MeasurementKernel,
    s1ma: f64,
    s1mb: f64,
    sigma_a: i8,
    sigma_b: i8,
) -> Result<f64> {
    let target = stokes_operator(1)?;
    let op_a = measurement_operator(kernel, &target, s1ma)?;
    let op_b = measurement_operator(kernel, &target, s1mb)?;
    let after = apply_to_photon_b(&op_b, &apply_to_photon_a(&op_a, state));
    let bra = tensor_state(&s2_eigenstate(sigma_a)?, &s2_eigenstate(sigma_b)?);
    Ok(bra.inner(&after).norm_sqr())
}

/// Signed-Gaussian decompositions of the pair outcome density, one
/// two-dimensional mixture per joint sign channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PairDecomposition {
    pub pp: SignedGaussianMixture,
    pub pm: SignedGaussianMixture,
    pub mp: SignedGaussianMixture,
    pub mm: SignedGaussianMixture,
}

impl PairDecomposition {
    pub fn channel(&self, sigma_a: i8, sigma_b: i8) -> Result<&SignedGaussianMixture> {
        match (sigma_a, sigma_b) {
            (1, 1) => Ok(&self.pp),
            (1, -1) => Ok(&self.pm),
            (-1, 1) => Ok(&self.mp),
            (-1, -1) => Ok(&self.mm),
            (a, b) => Err(Error::InvalidComponentSign { value: if a.abs() == 1 { b } else { a } }),
        }
    }
}

fn channel_weight(da: i8, db: i8, sigma_a: f64, sigma_b: f64, factor: f64) -> f64 {
    match (da, db) {
        (0, 0) => sigma_a * sigma_b * factor * factor / (4.0 * SQRT_2),
        (-1, 0) => sigma_b * factor / (8.0 * SQRT_2),
        (1, 0) => -sigma_b * factor / (8.0 * SQRT_2),
        (0, -1) => -sigma_a * factor / (8.0 * SQRT_2),
        (0, 1) => sigma_a * factor / (8.0 * SQRT_2),
        _ => (2.0 + (da * db) as f64 * SQRT_2) / 32.0,
    }
}

/// Exact decomposition of each sign channel into the nine Gaussians of width
/// δs centered on the first-component value grid {−1, 0, +1}²: four corner
/// weights shared by all channels, four edge weights suppressed by one power
/// of the coherence factor, and a center weight suppressed by two powers.
/// Edge and center weights are negative in half the channels.
pub fn gaussian_decomposition_pair(kernel: &MeasurementKernel) -> Result<PairDecomposition> {
    let factor = kernel.decoherence_factor();
    let sigma = kernel.resolution();
    let build = |sigma_a: f64, sigma_b: f64| -> Result<SignedGaussianMixture> {
        let mut components = Vec::with_capacity(9);
        for da in [-1i8, 0, 1] {
            for db in [-1i8, 0, 1] {
                let weight = channel_weight(da, db, sigma_a, sigma_b, factor);
                if weight.abs() < 1e-300 {
                    continue;
                }
                components.push(GaussianComponent {
                    weight,
                    center_a: da as f64,
                    center_b: Some(db as f64),
                    sigma,
                });
            }
        }
        SignedGaussianMixture::new(components)
    };
    Ok(PairDecomposition {
        pp: build(1.0, 1.0)?,
        pm: build(1.0, -1.0)?,
        mp: build(-1.0, 1.0)?,
        mm: build(-1.0, -1.0)?,
    })
}

/// Resolution-independent 36-entry signed table for the entangled state,
/// indexed by both photons' first-component grid value and second-component
/// sign. Obtained from the channel decompositions by stripping the Gaussian
/// envelopes and their coherence suppression factors.
pub fn quasi_table_pair() -> Result<QuasiProbabilityTable> {
    QuasiProbabilityTable::pair(|s1a, s2a, s1b, s2b| match (s1a, s1b) {
        (0, 0) => (s2a * s2b) as f64 * SQRT_2 / 8.0,
        (0, _) => (s2a * s1b) as f64 * SQRT_2 / 16.0,
        (_, 0) => -(s1a * s2b) as f64 * SQRT_2 / 16.0,
        _ => (2.0 + (s1a * s1b) as f64 * SQRT_2) / 32.0,
    })
}

/// Exact signed distribution of the per-event Bell combination under the
/// 36-entry table: each entry contributes its weight at the integer value
/// k = s1a·s1b + s2a·s1b − s1a·s2b + s2a·s2b. The mean is 2√2, above the
/// bound 2 that any non-negative table over these values must satisfy, at
/// the cost of signed weights on intermediate values.
pub fn k_distribution(table: &QuasiProbabilityTable) -> Result<BTreeMap<i32, f64>> {
    if !table.is_pair() {
        return Err(Error::WrongTableKind { expected: "pair" });
    }
    let mut dist = BTreeMap::new();
    for e in table.entries() {
        let s1b = e.s1b.expect("pair table entries carry photon-b indices");
        let s2b = e.s2b.expect("pair table entries carry photon-b indices");
        let k = (e.s1a * s1b + e.s2a * s1b - e.s1a * s2b + e.s2a * s2b) as i32;
        *dist.entry(k).or_insert(0.0) += e.probability;
    }
    Ok(dist)
}

/// The Bell combination ⟨K⟩ = c11 + c21 − c12 + c22 together with its four
/// component correlations: c11 pairs the two fuzzy values, c21 and c12 pair
/// one fuzzy value with the other photon's precise sign, and c22 pairs the
/// two precise signs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellCombination {
    pub value: f64,
    pub c11: f64,
    pub c21: f64,
    pub c12: f64,
    pub c22: f64,
}

impl BellCombination {
    pub fn from_components(c11: f64, c21: f64, c12: f64, c22: f64) -> Self {
        Self { value: c11 + c21 - c12 + c22, c11, c21, c12, c22 }
    }
}

/// How to evaluate the Bell combination.
#[derive(Debug, Clone, Copy)]
pub enum KSource<'a> {
    /// Algebraic closed forms in the coherence suppression factor.
    ClosedForm,
    /// Independent two-dimensional quadrature of the outcome densities.
    Analytic,
    /// Empirical means over recorded pair samples.
    Samples(&'a [SampleRecord]),
}

fn closed_form_components(kernel: &MeasurementKernel) -> BellCombination {
    let f = kernel.decoherence_factor();
    BellCombination::from_components(
        1.0 / SQRT_2,
        f / SQRT_2,
        -f / SQRT_2,
        f * f / SQRT_2,
    )
}

/// Closed-form value ⟨K⟩ = (1 + e^(−1/(2δs²)))²/√2: it crosses the local
/// bound 2 as the resolution coarsens and approaches 2√2 in the
/// infinitely-fuzzy limit.
pub fn k_expectation_closed_form(resolution: f64) -> Result<f64> {
    let kernel = MeasurementKernel::new(resolution)?;
    Ok(closed_form_components(&kernel).value)
}

/// Evaluates the Bell combination and its component correlations from the
/// requested source.
pub fn k_expectation(kernel: &MeasurementKernel, source: KSource<'_>) -> Result<BellCombination> {
    match source {
        KSource::ClosedForm => Ok(closed_form_components(kernel)),
        KSource::Analytic => {
            let w = kernel.support_halfwidth();
            let signs = [(-1i8, -1i8), (-1, 1), (1, -1), (1, 1)];
            let moment = |wa: fn(f64, f64) -> f64, use_signs: (bool, bool)| -> Result<f64> {
                integrate_2d(
                    |sa, sb| {
                        signs
                            .iter()
                            .map(|&(qa, qb)| {
                                let p = joint_density_pair(kernel, sa, sb, qa, qb)
                                    .expect("valid signs");
                                let fa = if use_signs.0 { qa as f64 } else { sa };
                                let fb = if use_signs.1 { qb as f64 } else { sb };
                                wa(fa, fb) * p
                            })
                            .sum()
                    },
                    -w,
                    w,
                    -w,
                    w,
                    1e-9,
                )
            };
            let product = |a: f64, b: f64| a * b;
            let c11 = moment(product, (false, false))?;
            let c21 = moment(product, (true, false))?;
            let c12 = moment(product, (false, true))?;
            let c22 = moment(product, (true, true))?;
            Ok(BellCombination::from_components(c11, c21, c12, c22))
        }
        KSource::Samples(records) => {
            crate::monte_carlo::validate_pair_records(records)?;
            let n = records.len() as f64;
            let (mut c11, mut c21, mut c12, mut c22) = (0.0, 0.0, 0.0, 0.0);
            for r in records {
                let sb = r.s1mb.expect("validated pair record");
                let qb = r.sigma_b.expect("validated pair record") as f64;
                let qa = r.sigma_a as f64;
                c11 += r.s1ma * sb;
                c21 += qa * sb;
                c12 += r.s1ma * qb;
                c22 += qa * qb;
            }
            Ok(BellCombination::from_components(c11 / n, c21 / n, c12 / n, c22 / n))
        }
    }
}

/// Resolution at which the closed-form Bell combination crosses the local
/// bound 2, found by bisection on [0.5, 3] to 1e-9.
pub fn k_threshold() -> Result<f64> {
    bisect_root(
        |ds| k_expectation_closed_form(ds).expect("positive resolution") - 2.0,
        0.5,
        3.0,
        1e-9,
    )
}

/// The same threshold inverted algebraically:
/// δs* = (−2·ln(2^(3/4) − 1))^(−1/2).
pub fn k_threshold_closed_form() -> f64 {
    (-2.0 * (2.0f64.powf(0.75) - 1.0).ln()).powf(-0.5)
}

/// One local maximum of a sign channel's outcome density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub s1ma: f64,
    pub s1mb: f64,
    pub density: f64,
}

/// Global maxima of one sign channel's outcome density (all of them when the
/// maximum is degenerate), plus the per-event Bell combination value at the
/// first reported peak.
#[derive(Debug, Clone, PartialEq)]
pub struct PeakReport {
    pub maxima: Vec<Peak>,
    pub k_point: f64,
}

/// Locates the global maxima of the (sigma_a, sigma_b) channel density over
/// the fuzzy-value plane by a coarse grid scan followed by coordinate-ascent
/// refinement. Degenerate maxima (exact ties under the channel's symmetry)
/// are all reported, sorted by density and then by position; `k_point` is
/// evaluated at the first peak.
pub fn peak_locations(
    kernel: &MeasurementKernel,
    sigma_a: i8,
    sigma_b: i8,
) -> Result<PeakReport> {
    let sa = check_sign(sigma_a)?;
    let sb = check_sign(sigma_b)?;
    let bound = 1.0 + 3.0 * kernel.resolution();
    let f = |x: f64, y: f64| {
        joint_density_pair(kernel, x, y, sigma_a, sigma_b).expect("signs validated")
    };
    let n = 121usize;
    let step = 2.0 * bound / (n - 1) as f64;
    let starts = grid_local_maxima(f, -bound, bound, n, 0.5);
    let mut refined: Vec<Peak> = Vec::new();
    for start in starts {
        let (x, y, v) = coordinate_ascent_2d(f, start, 2.0 * step, -bound, bound, 1e-9);
        let duplicate = refined
            .iter()
            .any(|p| (p.s1ma - x).abs() < 1e-5 && (p.s1mb - y).abs() < 1e-5);
        if !duplicate {
            refined.push(Peak { s1ma: x, s1mb: y, density: v });
        }
    }
    let best = refined
        .iter()
        .map(|p| p.density)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut maxima: Vec<Peak> = refined
        .into_iter()
        .filter(|p| p.density >= best * (1.0 - 1e-9))
        .collect();
    maxima.sort_by(|a, b| {
        b.density
            .partial_cmp(&a.density)
            .unwrap()
            .then(a.s1ma.partial_cmp(&b.s1ma).unwrap())
            .then(a.s1mb.partial_cmp(&b.s1mb).unwrap())
    });
    let first = maxima.first().expect("grid scan always yields at least one maximum");
    let k_point = bell_point_value(first.s1ma, first.s1mb, sa, sb);
    Ok(PeakReport { maxima, k_point })
}

/// The entangled state's density matrix written as a four-term sum of
/// product operators: ¼(identity + √2·[diagonal ⊗ first] − √2·[antidiagonal
/// ⊗ second] − [third ⊗ third]), where "diagonal"/"antidiagonal" are the
/// normalized sum and difference of photon a's first two Stokes operators.
pub fn density_matrix_decomposition() -> Result<Op4> {
    let s1 = stokes_operator(1)?;
    let s2 = stokes_operator(2)?;
    let s3 = stokes_operator(3)?;
    let id = HermitianOp2::identity();
    let quarter_scale = 0.25;
    let cross_scale = 1.0 / (4.0 * SQRT_2);
    let term_id = tensor_op(&id, &id).scale(quarter_scale);
    let term_diag = tensor_op(&s1.add(&s2), &s1).scale(cross_scale);
    let term_anti = tensor_op(&s1.sub(&s2), &s2).scale(-cross_scale);
    let term_third = tensor_op(&s3, &s3).scale(-quarter_scale);
    Ok(term_id.add(&term_diag).add(&term_anti).add(&term_third))
}

/// Largest entrywise deviation between the four-term product decomposition
/// and the projector onto the entangled state.
pub fn density_matrix_decomposition_residual() -> Result<f64> {
    let decomposed = density_matrix_decomposition()?;
    let projector = Op4::outer(&bell_state());
    Ok(decomposed.max_abs_diff(&projector))
}

/// Eigenvalues of the decomposed density matrix, sorted descending; for a
/// pure state they are {1, 0, 0, 0}.
pub fn density_matrix_decomposition_eigenvalues() -> Result<[f64; 4]> {
    density_matrix_decomposition()?.hermitian_eigenvalues()
}
