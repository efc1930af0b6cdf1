//! Sequential polarization measurement on one photon: a finite-resolution
//! reading of the first Stokes component followed by a precise reading of the
//! second, the exact signed-Gaussian decomposition of the resulting joint
//! statistics, and the anomalous squared-value/sign correlation.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mixture::{GaussianComponent, SignedGaussianMixture};
use crate::monte_carlo::SampleRecord;
use crate::numeric::optimize::golden_section_max;
use crate::numeric::quad::integrate;
use crate::operator::{
    measurement_operator, sandwich_product, stokes_operator, HermitianOp2, MeasurementKernel,
    PolarizationKet,
};

/// Weights below this magnitude are dropped from decompositions as exact
/// zeros that picked up rounding noise.
const WEIGHT_FLOOR: f64 = 1e-16;

fn check_sign(sign: i8) -> Result<f64> {
    match sign {
        1 => Ok(1.0),
        -1 => Ok(-1.0),
        _ => Err(Error::InvalidComponentSign { value: sign }),
    }
}

/// Eigenstate of the second Stokes component with eigenvalue `sign`:
/// (|R⟩ + sign·i·|L⟩)/√2.
pub fn s2_eigenstate(sign: i8) -> Result<PolarizationKet> {
    let s = check_sign(sign)?;
    let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    PolarizationKet::new(h, Complex64::new(0.0, s) * h)
}

/// The reference input state used by the closed forms: the +1 eigenstate of
/// the second Stokes component.
pub fn reference_state() -> PolarizationKet {
    s2_eigenstate(1).expect("+1 is a valid sign")
}

/// Symmetric/antisymmetric amplitude split c± = (amp_R ± amp_L)/√2, i.e. the
/// components of the state along the ±1 eigenstates of the first Stokes
/// component.
pub(crate) fn split_amplitudes(state: &PolarizationKet) -> (Complex64, Complex64) {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    (
        (state.amp_r() + state.amp_l()) * h,
        (state.amp_r() - state.amp_l()) * h,
    )
}

/// Conditional (non-normalized) state describing the joint event “fuzzy
/// first-component value `s1m`, then precise second-component sign
/// `s2_sign`”: the measurement operator applied to the second-component
/// eigenstate. Its overlap with any input state gives the joint amplitude.
pub fn pom_state(kernel: &MeasurementKernel, s1m: f64, s2_sign: i8) -> Result<PolarizationKet> {
    let eigen = s2_eigenstate(s2_sign)?;
    let target = stokes_operator(1)?;
    let op = measurement_operator(kernel, &target, s1m)?;
    Ok(op.apply(&eigen))
}

/// Joint probability density of reading `s1m` in the finite-resolution
/// first-component measurement and then `s2_sign` in the precise
/// second-component measurement, evaluated by the operator path
/// |⟨s2_sign| P̂(s1m) |state⟩|².
pub fn joint_density(
    state: &PolarizationKet,
    kernel: &MeasurementKernel,
    s1m: f64,
    s2_sign: i8,
) -> Result<f64> {
    let pom = pom_state(kernel, s1m, s2_sign)?;
    Ok(pom.inner(state).norm_sqr())
}

/// Closed-form joint density for the reference state: a shared Gaussian
/// envelope times cosh² (matching sign, `s2_sign = +1`) or sinh²
/// (flipped sign) of s1m/(2δs²).
pub fn joint_density_closed_form(
    kernel: &MeasurementKernel,
    s1m: f64,
    s2_sign: i8,
) -> Result<f64> {
    let sign = check_sign(s2_sign)?;
    let var = kernel.resolution() * kernel.resolution();
    let envelope = (2.0 * std::f64::consts::PI * var).sqrt().recip()
        * (-(s1m * s1m + 1.0) / (2.0 * var)).exp();
    let x = s1m / (2.0 * var);
    let shape = if sign > 0.0 { x.cosh().powi(2) } else { x.sinh().powi(2) };
    Ok(envelope * shape)
}

/// Signed-Gaussian decompositions of the joint density, one mixture per
/// second-component sign.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleDecomposition {
    pub plus: SignedGaussianMixture,
    pub minus: SignedGaussianMixture,
}

impl SingleDecomposition {
    pub fn channel(&self, s2_sign: i8) -> Result<&SignedGaussianMixture> {
        match s2_sign {
            1 => Ok(&self.plus),
            -1 => Ok(&self.minus),
            _ => Err(Error::InvalidComponentSign { value: s2_sign }),
        }
    }
}

/// Exact decomposition of the joint density into at most three Gaussians of
/// width δs per channel: ½|c₊|² at +1, ½|c₋|² at −1, and a signed
/// interference term at 0 scaled by the coherence suppression factor. The
/// center-0 weight is negative in one of the two channels whenever the state
/// carries second-component coherence — the nonclassical signature.
pub fn gaussian_decomposition(
    state: &PolarizationKet,
    kernel: &MeasurementKernel,
) -> Result<SingleDecomposition> {
    let (c_plus, c_minus) = split_amplitudes(state);
    let interference = (c_plus * c_minus.conj()).im;
    let suppressed = kernel.decoherence_factor() * interference;
    let sigma = kernel.resolution();
    let build = |sign: f64| -> Result<SignedGaussianMixture> {
        let mut components = Vec::with_capacity(3);
        let raw = [
            (0.5 * c_plus.norm_sqr(), 1.0),
            (0.5 * c_minus.norm_sqr(), -1.0),
            (sign * suppressed, 0.0),
        ];
        for (weight, center) in raw {
            if weight.abs() < WEIGHT_FLOOR {
                continue;
            }
            components.push(GaussianComponent { weight, center_a: center, center_b: None, sigma });
        }
        SignedGaussianMixture::new(components)
    };
    Ok(SingleDecomposition { plus: build(1.0)?, minus: build(-1.0)? })
}

/// Resolution-independent 6-entry signed table obtained by stripping the
/// Gaussian envelopes (and their coherence suppression) from the
/// decomposition: entries (±1, σ) carry ½|c±|², entries (0, σ) carry
/// σ·Im(c₊·conj(c₋)).
pub fn discrete_quasi_table(state: &PolarizationKet) -> Result<crate::table::QuasiProbabilityTable> {
    let (c_plus, c_minus) = split_amplitudes(state);
    let interference = (c_plus * c_minus.conj()).im;
    crate::table::QuasiProbabilityTable::single(|s1, s2| match s1 {
        1 => 0.5 * c_plus.norm_sqr(),
        -1 => 0.5 * c_minus.norm_sqr(),
        _ => s2 as f64 * interference,
    })
}

/// Input for the squared-value/sign correlation: either exact integration
/// for a given state or a set of recorded single-photon samples.
#[derive(Debug, Clone, Copy)]
pub enum CorrelationSource<'a> {
    Analytic(&'a PolarizationKet),
    Samples(&'a [SampleRecord]),
}

/// Correlation between the squared fuzzy first-component value and the
/// precise second-component sign, normalized as
/// C = −2·(⟨s1m²⟩ − δs²)·⟨σ⟩. Subtracting the kernel variance isolates the
/// intrinsic squared value (identically 1), so C equals −2·e^(−1/(2δs²))
/// times the input state's second-component expectation — negative for a
/// +1-polarized state even though s1m² carries no sign information.
pub fn correlation_s1sq_s2(kernel: &MeasurementKernel, source: CorrelationSource<'_>) -> Result<f64> {
    match source {
        CorrelationSource::Analytic(state) => {
            let w = kernel.support_halfwidth();
            let density =
                |s: f64, sign: i8| joint_density(state, kernel, s, sign).expect("valid sign");
            let m2 = integrate(|s| s * s * (density(s, 1) + density(s, -1)), -w, w, 1e-11)?;
            let m_sigma = integrate(|s| density(s, 1) - density(s, -1), -w, w, 1e-11)?;
            let var = kernel.resolution() * kernel.resolution();
            Ok(-2.0 * (m2 - var) * m_sigma)
        }
        CorrelationSource::Samples(records) => {
            Ok(crate::monte_carlo::estimate_correlation_s1sq_s2(records, kernel)?.mean)
        }
    }
}

/// The same correlation evaluated purely algebraically from operator
/// expectation values: e^(−1/(2δs²))·(⟨ŝ₁ŝ₂ŝ₁⟩ − ⟨ŝ₁²⟩⟨ŝ₂⟩). Because the
/// first Stokes operator inverts the second under conjugation, this is
/// −2·e^(−1/(2δs²))·⟨ŝ₂⟩ for every state.
pub fn correlation_s1sq_s2_operator(
    state: &PolarizationKet,
    kernel: &MeasurementKernel,
) -> Result<f64> {
    let s1 = stokes_operator(1)?;
    let s2 = stokes_operator(2)?;
    let twisted = sandwich_product(&s1, &s2).expectation(state)?;
    let s1_sq = sandwich_product(&s1, &HermitianOp2::identity()).expectation(state)?;
    let s2_mean = s2.expectation(state)?;
    Ok(kernel.decoherence_factor() * (twisted - s1_sq * s2_mean))
}

/// Location and height of the positive-side maximum of the flipped-sign
/// channel for the reference state. The channel vanishes identically at
/// s1m = 0 and peaks beyond the eigenvalue at +1, pushed outward by the
/// sinh² interference shape; the mirror peak sits at the negated location.
pub fn minus_channel_peak(kernel: &MeasurementKernel) -> Result<(f64, f64)> {
    let state = reference_state();
    let f = |s: f64| joint_density(&state, kernel, s, -1).expect("valid sign");
    let hi = 1.0 + 4.0 * kernel.resolution();
    Ok(golden_section_max(f, 0.0, hi, 1e-10))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{apply_measurement, tensor_state};

    fn kernel06() -> MeasurementKernel {
        MeasurementKernel::new(0.6).unwrap()
    }

    fn generic_state() -> PolarizationKet {
        PolarizationKet::from_raw(Complex64::new(0.5, 0.3), Complex64::new(-0.2, 0.44))
            .unwrap()
            .normalized()
            .unwrap()
    }

    #[test]
    fn s2_eigenstates_have_unit_component_expectation() {
        let s2 = stokes_operator(2).unwrap();
        for sign in [-1i8, 1] {
            let e = s2_eigenstate(sign).unwrap();
            assert!((s2.expectation(&e).unwrap() - sign as f64).abs() < 1e-14);
        }
        assert!(s2_eigenstate(0).is_err());
    }

    #[test]
    fn pom_norm_matches_first_stage_density() {
        // ‖P̂|σ⟩‖² equals the outcome density of the fuzzy stage run on the
        // eigenstate itself; frozen value for δs = 0.6, s1m = 1.
        let k = kernel06();
        let pom = pom_state(&k, 1.0, 1).unwrap();
        assert!((pom.norm_sqr() - 0.33373713283143636).abs() < 1e-15);
        let (density, _) = apply_measurement(&reference_state(), &k, &stokes_operator(1).unwrap(), 0.5)
            .unwrap();
        assert!((density - 0.24953347991989258).abs() < 1e-15);
    }

    #[test]
    fn joint_density_frozen_values() {
        let k = kernel06();
        let state = reference_state();
        assert!((joint_density(&state, &k, 1.0, 1).unwrap() - 0.1875392699830662).abs() < 1e-15);
        assert!((joint_density(&state, &k, 1.0, -1).unwrap() - 0.14619786284837027).abs() < 1e-15);
    }

    #[test]
    fn closed_form_matches_operator_path_on_grid() {
        for &ds in &[0.3, 0.6, 1.0, 2.0] {
            let k = MeasurementKernel::new(ds).unwrap();
            let state = reference_state();
            let mut s = -4.0;
            while s <= 4.0 {
                for sign in [-1i8, 1] {
                    let a = joint_density(&state, &k, s, sign).unwrap();
                    let b = joint_density_closed_form(&k, s, sign).unwrap();
                    assert!((a - b).abs() < 1e-12, "ds={ds} s={s} sign={sign}");
                }
                s += 0.05;
            }
        }
    }

    #[test]
    fn flipped_channel_vanishes_exactly_at_zero() {
        for &ds in &[0.3, 0.6, 1.0, 2.0] {
            let k = MeasurementKernel::new(ds).unwrap();
            let d = joint_density(&reference_state(), &k, 0.0, -1).unwrap();
            assert!(d.abs() < 1e-15, "ds={ds} d={d}");
        }
    }

    #[test]
    fn decomposition_reproduces_density_everywhere() {
        let k = kernel06();
        let state = generic_state();
        let dec = gaussian_decomposition(&state, &k).unwrap();
        let mut s = -3.0;
        while s <= 3.0 {
            for sign in [-1i8, 1] {
                let direct = joint_density(&state, &k, s, sign).unwrap();
                let mixed = dec.channel(sign).unwrap().density1d(s);
                assert!((direct - mixed).abs() < 1e-14, "s={s} sign={sign}");
            }
            s += 0.1;
        }
    }

    #[test]
    fn decomposition_weights_for_reference_state() {
        let k = kernel06();
        let dec = gaussian_decomposition(&reference_state(), &k).unwrap();
        let plus = dec.channel(1).unwrap();
        assert_eq!(plus.components().len(), 3);
        let weights: Vec<f64> = plus.components().iter().map(|c| c.weight).collect();
        assert!((weights[0] - 0.25).abs() < 1e-15);
        assert!((weights[1] - 0.25).abs() < 1e-15);
        assert!((weights[2] - 0.5 * k.decoherence_factor()).abs() < 1e-15);
        let minus = dec.channel(-1).unwrap();
        assert!((minus.most_negative_weight() + 0.5 * k.decoherence_factor()).abs() < 1e-15);
        // Channel masses sum to one.
        assert!((plus.total_weight() + minus.total_weight() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn quasi_table_reference_state_is_exact() {
        let t = discrete_quasi_table(&reference_state()).unwrap();
        assert!((t.get_single(1, 1).unwrap() - 0.25).abs() < 1e-15);
        assert!((t.get_single(1, -1).unwrap() - 0.25).abs() < 1e-15);
        assert!((t.get_single(-1, 1).unwrap() - 0.25).abs() < 1e-15);
        assert!((t.get_single(-1, -1).unwrap() - 0.25).abs() < 1e-15);
        assert!((t.get_single(0, 1).unwrap() - 0.5).abs() < 1e-15);
        assert!((t.get_single(0, -1).unwrap() + 0.5).abs() < 1e-15);
        assert!((t.sum() - 1.0).abs() < 1e-15);
        assert!((t.most_negative() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn quasi_table_sums_to_one_for_generic_state() {
        let t = discrete_quasi_table(&generic_state()).unwrap();
        assert!((t.sum() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn correlation_reference_state_frozen() {
        let k = kernel06();
        let c = correlation_s1sq_s2(&k, CorrelationSource::Analytic(&reference_state())).unwrap();
        assert!((c + 0.49870441755459244).abs() < 1e-9);
        let op = correlation_s1sq_s2_operator(&reference_state(), &k).unwrap();
        assert!((op + 0.49870441755459244).abs() < 1e-14);
    }

    #[test]
    fn correlation_paths_agree_for_generic_state() {
        let k = MeasurementKernel::new(1.3).unwrap();
        let state = generic_state();
        let quad = correlation_s1sq_s2(&k, CorrelationSource::Analytic(&state)).unwrap();
        let op = correlation_s1sq_s2_operator(&state, &k).unwrap();
        assert!((quad - op).abs() < 1e-9, "quad={quad} op={op}");
        // Both equal the direct closed form.
        let s2 = stokes_operator(2).unwrap();
        let expected = -2.0 * k.decoherence_factor() * s2.expectation(&state).unwrap();
        assert!((op - expected).abs() < 1e-14);
    }

    #[test]
    fn minus_channel_peak_frozen() {
        let (x, v) = minus_channel_peak(&kernel06()).unwrap();
        assert!((x - 1.0991063722551528).abs() < 1e-6);
        assert!(v > 0.0);
        // Mirror symmetry of the reference-state channel.
        let d = joint_density(&reference_state(), &kernel06(), -x, -1).unwrap();
        assert!((d - v).abs() < 1e-12);
    }

    #[test]
    fn tensor_state_of_eigenstates_has_unit_norm() {
        let a = s2_eigenstate(1).unwrap();
        let b = s2_eigenstate(-1).unwrap();
        assert!((tensor_state(&a, &b).norm_sqr() - 1.0).abs() < 1e-14);
    }
}
