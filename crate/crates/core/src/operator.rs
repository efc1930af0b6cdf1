//! Exact complex linear algebra for one- and two-photon polarization states:
//! Stokes operators, the finite-resolution Gaussian measurement operator, and
//! the generalized measurement postulate (outcome density plus state update).
//!
//! Basis convention: single-photon amplitudes are ordered (|R⟩, |L⟩) over the
//! circular basis; pair amplitudes are ordered (|R;R⟩, |R;L⟩, |L;R⟩, |L;L⟩)
//! with photon a as the left tensor factor.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex amplitude carrier used throughout.
pub type ComplexScalar = Complex64;

/// Squared-norm window within which a state is accepted as normalized.
const NORM_ACCEPT: f64 = 1e-12;
/// Squared-norm window within which a state is silently renormalized;
/// larger deviations are rejected as caller bugs.
const NORM_RENORM: f64 = 1e-6;
/// Hermiticity tolerance for validated operators.
const HERMITIAN_TOL: f64 = 1e-14;
/// Involution tolerance for measurement targets (T² = 1).
const INVOLUTION_TOL: f64 = 1e-12;
/// Outcome densities below this are degenerate: no post-state is defined.
const DEGENERATE_DENSITY: f64 = 1e-300;

fn check_finite(values: &[Complex64], context: &'static str) -> Result<()> {
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite { context });
    }
    Ok(())
}

fn normalize_policy(norm_sqr: f64, amps: &mut [Complex64]) -> Result<()> {
    if (norm_sqr - 1.0).abs() <= NORM_ACCEPT {
        return Ok(());
    }
    if (norm_sqr - 1.0).abs() < NORM_RENORM {
        let scale = 1.0 / norm_sqr.sqrt();
        for a in amps.iter_mut() {
            *a *= scale;
        }
        return Ok(());
    }
    Err(Error::NormOutOfRange { norm_sqr })
}

/// Single-photon polarization state: amplitudes over (|R⟩, |L⟩).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationKet {
    amps: [Complex64; 2],
}

impl PolarizationKet {
    /// Builds a normalized state. Squared norms within 1e-12 of 1 are taken
    /// as-is, within 1e-6 they are renormalized, anything further off is
    /// rejected.
    pub fn new(amp_r: Complex64, amp_l: Complex64) -> Result<Self> {
        let mut amps = [amp_r, amp_l];
        check_finite(&amps, "polarization amplitudes")?;
        let n = amps[0].norm_sqr() + amps[1].norm_sqr();
        normalize_policy(n, &mut amps)?;
        Ok(Self { amps })
    }

    /// Builds a state without the unit-norm requirement (finiteness is still
    /// enforced). Measurement-outcome states are non-normalized by nature.
    pub fn from_raw(amp_r: Complex64, amp_l: Complex64) -> Result<Self> {
        let amps = [amp_r, amp_l];
        check_finite(&amps, "polarization amplitudes")?;
        Ok(Self { amps })
    }

    pub(crate) fn raw_unchecked(amp_r: Complex64, amp_l: Complex64) -> Self {
        Self { amps: [amp_r, amp_l] }
    }

    pub fn amp_r(&self) -> Complex64 {
        self.amps[0]
    }

    pub fn amp_l(&self) -> Complex64 {
        self.amps[1]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps[0].norm_sqr() + self.amps[1].norm_sqr()
    }

    /// Hermitian inner product ⟨self|other⟩ (antilinear in `self`).
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps[0].conj() * other.amps[0] + self.amps[1].conj() * other.amps[1]
    }

    /// Returns the state scaled to unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n < DEGENERATE_DENSITY {
            return Err(Error::DegenerateOutcome { density: n });
        }
        let s = 1.0 / n.sqrt();
        Ok(Self { amps: [self.amps[0] * s, self.amps[1] * s] })
    }
}

/// Two-photon polarization state: amplitudes over
/// (|R;R⟩, |R;L⟩, |L;R⟩, |L;L⟩), photon a left.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairKet {
    amps: [Complex64; 4],
}

impl PairKet {
    /// Builds a normalized pair state under the same norm policy as
    /// [`PolarizationKet::new`].
    pub fn new(
        amp_rr: Complex64,
        amp_rl: Complex64,
        amp_lr: Complex64,
        amp_ll: Complex64,
    ) -> Result<Self> {
        let mut amps = [amp_rr, amp_rl, amp_lr, amp_ll];
        check_finite(&amps, "pair amplitudes")?;
        let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        normalize_policy(n, &mut amps)?;
        Ok(Self { amps })
    }

    /// Builds a pair state without the unit-norm requirement.
    pub fn from_raw(amps: [Complex64; 4]) -> Result<Self> {
        check_finite(&amps, "pair amplitudes")?;
        Ok(Self { amps })
    }

    pub(crate) fn raw_unchecked(amps: [Complex64; 4]) -> Self {
        Self { amps }
    }

    pub fn amp_rr(&self) -> Complex64 {
        self.amps[0]
    }

    pub fn amp_rl(&self) -> Complex64 {
        self.amps[1]
    }

    pub fn amp_lr(&self) -> Complex64 {
        self.amps[2]
    }

    pub fn amp_ll(&self) -> Complex64 {
        self.amps[3]
    }

    pub fn amps(&self) -> [Complex64; 4] {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Hermitian inner product ⟨self|other⟩ (antilinear in `self`).
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n < DEGENERATE_DENSITY {
            return Err(Error::DegenerateOutcome { density: n });
        }
        let s = 1.0 / n.sqrt();
        Ok(Self { amps: self.amps.map(|a| a * s) })
    }
}

fn mat2_mul(a: &[[Complex64; 2]; 2], b: &[[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
    let mut out = [[Complex64::ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

/// Validated Hermitian 2×2 operator over the (|R⟩, |L⟩) basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianOp2 {
    m: [[Complex64; 2]; 2],
}

impl HermitianOp2 {
    /// Builds the operator, rejecting non-finite entries and matrices whose
    /// Hermiticity deviation exceeds 1e-14.
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        check_finite(&[m[0][0], m[0][1], m[1][0], m[1][1]], "operator entries")?;
        let dev = hermiticity_deviation2(&m);
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation: dev });
        }
        Ok(Self { m })
    }

    pub(crate) fn raw_unchecked(m: [[Complex64; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.m[i][j]
    }

    pub fn identity() -> Self {
        Self {
            m: [[Complex64::ONE, Complex64::ZERO], [Complex64::ZERO, Complex64::ONE]],
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut m = self.m;
        for (row, rhs_row) in m.iter_mut().zip(&rhs.m) {
            for (cell, r) in row.iter_mut().zip(rhs_row) {
                *cell += r;
            }
        }
        Self { m }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut m = self.m;
        for (row, rhs_row) in m.iter_mut().zip(&rhs.m) {
            for (cell, r) in row.iter_mut().zip(rhs_row) {
                *cell -= r;
            }
        }
        Self { m }
    }

    /// Scales by a real factor (which preserves Hermiticity).
    pub fn scale(&self, factor: f64) -> Self {
        Self { m: self.m.map(|row| row.map(|e| e * factor)) }
    }

    /// Applies the operator to a state, returning the (generally
    /// non-normalized) image vector.
    pub fn apply(&self, ket: &PolarizationKet) -> PolarizationKet {
        let r = self.m[0][0] * ket.amp_r() + self.m[0][1] * ket.amp_l();
        let l = self.m[1][0] * ket.amp_r() + self.m[1][1] * ket.amp_l();
        PolarizationKet::raw_unchecked(r, l)
    }

    /// Real expectation value ⟨ψ|M|ψ⟩; a non-negligible imaginary part is an
    /// internal consistency error.
    pub fn expectation(&self, state: &PolarizationKet) -> Result<f64> {
        let v = state.inner(&self.apply(state));
        if v.im.abs() >= 1e-12 {
            return Err(Error::NotHermitian { deviation: v.im.abs() });
        }
        Ok(v.re)
    }

    /// Deviation of T² from the identity; zero (within tolerance) for valid
    /// measurement targets.
    pub fn involution_deviation(&self) -> f64 {
        let sq = mat2_mul(&self.m, &self.m);
        let mut dev = 0.0f64;
        for (i, row) in sq.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                let expect = if i == j { Complex64::ONE } else { Complex64::ZERO };
                dev = dev.max((cell - expect).norm());
            }
        }
        dev
    }
}

fn hermiticity_deviation2(m: &[[Complex64; 2]; 2]) -> f64 {
    let mut dev = 0.0f64;
    for (i, row) in m.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            dev = dev.max((cell - m[j][i].conj()).norm());
        }
    }
    dev
}

/// Sandwich product a·b·a of two Hermitian operators, which is Hermitian
/// again; used for operator-path correlation identities.
pub fn sandwich_product(outer: &HermitianOp2, inner: &HermitianOp2) -> HermitianOp2 {
    let m = mat2_mul(&outer.m, &mat2_mul(&inner.m, &outer.m));
    HermitianOp2::raw_unchecked(m)
}

/// General complex 4×4 operator over the pair basis. Finiteness is the only
/// structural requirement; Hermiticity holds whenever both tensor factors are
/// Hermitian and is checked where consumed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Op4 {
    m: [[Complex64; 4]; 4],
}

impl Op4 {
    pub fn new(m: [[Complex64; 4]; 4]) -> Result<Self> {
        for row in &m {
            check_finite(row, "operator entries")?;
        }
        Ok(Self { m })
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.m[i][j]
    }

    pub fn identity() -> Self {
        let mut m = [[Complex64::ZERO; 4]; 4];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = Complex64::ONE;
        }
        Self { m }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut m = self.m;
        for (row, rhs_row) in m.iter_mut().zip(&rhs.m) {
            for (cell, r) in row.iter_mut().zip(rhs_row) {
                *cell += r;
            }
        }
        Self { m }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut m = self.m;
        for (row, rhs_row) in m.iter_mut().zip(&rhs.m) {
            for (cell, r) in row.iter_mut().zip(rhs_row) {
                *cell -= r;
            }
        }
        Self { m }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { m: self.m.map(|row| row.map(|e| e * factor)) }
    }

    pub fn trace(&self) -> Complex64 {
        (0..4).map(|i| self.m[i][i]).sum()
    }

    /// Largest entrywise absolute difference from `rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        let mut dev = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                dev = dev.max((self.m[i][j] - rhs.m[i][j]).norm());
            }
        }
        dev
    }

    /// Projector |ψ⟩⟨ψ| onto a pair state.
    pub fn outer(state: &PairKet) -> Self {
        let a = state.amps();
        let mut m = [[Complex64::ZERO; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                m[i][j] = a[i] * a[j].conj();
            }
        }
        Self { m }
    }

    pub fn apply(&self, ket: &PairKet) -> PairKet {
        let a = ket.amps();
        let mut out = [Complex64::ZERO; 4];
        for (out_i, row) in out.iter_mut().zip(&self.m) {
            for (aj, mij) in a.iter().zip(row) {
                *out_i += mij * aj;
            }
        }
        PairKet::raw_unchecked(out)
    }

    /// Real expectation value ⟨ψ|M|ψ⟩; a non-negligible imaginary part is an
    /// internal consistency error.
    pub fn expectation(&self, state: &PairKet) -> Result<f64> {
        let v = state.inner(&self.apply(state));
        if v.im.abs() >= 1e-12 {
            return Err(Error::NotHermitian { deviation: v.im.abs() });
        }
        Ok(v.re)
    }

    /// Eigenvalues of a Hermitian 4×4 operator, sorted descending.
    pub fn hermitian_eigenvalues(&self) -> Result<[f64; 4]> {
        let mut dev = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                dev = dev.max((self.m[i][j] - self.m[j][i].conj()).norm());
            }
        }
        if dev > 1e-12 {
            return Err(Error::NotHermitian { deviation: dev });
        }
        let na = nalgebra::Matrix4::from_fn(|i, j| self.m[i][j]);
        let eig = na.symmetric_eigen();
        let mut vals = [0.0f64; 4];
        for (slot, v) in vals.iter_mut().zip(eig.eigenvalues.iter()) {
            *slot = *v;
        }
        vals.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
        Ok(vals)
    }
}

/// Gaussian measurement kernel: the resolution δs of a finite-resolution
/// measurement returning a continuous value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementKernel {
    resolution: f64,
}

impl MeasurementKernel {
    pub fn new(resolution: f64) -> Result<Self> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::InvalidResolution { value: resolution });
        }
        Ok(Self { resolution })
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    /// Coherence suppression factor exp(−1/(2δs²)) between the two target
    /// eigenstates after one finite-resolution measurement.
    pub fn decoherence_factor(&self) -> f64 {
        (-1.0 / (2.0 * self.resolution * self.resolution)).exp()
    }

    /// Gaussian amplitude profile (2πδs²)^(−1/4)·exp(−x²/(4δs²)); the
    /// eigenvalue-λ amplitude of the measurement operator is this profile at
    /// x = s_m − λ.
    pub fn amplitude_profile(&self, x: f64) -> f64 {
        let var = self.resolution * self.resolution;
        (2.0 * std::f64::consts::PI * var).powf(-0.25) * (-x * x / (4.0 * var)).exp()
    }

    /// Half-width of the integration window outside which all outcome
    /// densities are negligible at working precision.
    pub fn support_halfwidth(&self) -> f64 {
        4.0 + 6.0 * self.resolution
    }

    /// Half-width of the sampling support (wider tail margin so that the
    /// truncated CDF mass is far below the quantile-table accuracy target).
    pub fn sampling_halfwidth(&self) -> f64 {
        1.0 + 8.0 * self.resolution
    }
}

/// The three single-photon Stokes operators over (|R⟩, |L⟩):
/// index 1 → x/y linear intensity difference (off-diagonal ones),
/// index 2 → diagonal linear intensity difference (off-diagonal ∓i),
/// index 3 → circular intensity difference (diag(+1, −1)).
pub fn stokes_operator(index: u8) -> Result<HermitianOp2> {
    let i = Complex64::I;
    let one = Complex64::ONE;
    let zero = Complex64::ZERO;
    let m = match index {
        1 => [[zero, one], [one, zero]],
        2 => [[zero, -i], [i, zero]],
        3 => [[one, zero], [zero, -one]],
        _ => return Err(Error::InvalidStokesIndex { index }),
    };
    Ok(HermitianOp2::raw_unchecked(m))
}

/// Finite-resolution measurement operator
/// (2πδs²)^(−1/4)·exp(−(s_m − T)²/(4δs²)) for an involutory Hermitian target
/// T, evaluated spectrally: the eigenprojectors (1 ± T)/2 are weighted by the
/// Gaussian amplitude profile at s_m ∓ 1. Exact for T² = 1, no series
/// truncation involved.
pub fn measurement_operator(
    kernel: &MeasurementKernel,
    target: &HermitianOp2,
    s_m: f64,
) -> Result<HermitianOp2> {
    if !s_m.is_finite() {
        return Err(Error::NonFinite { context: "measurement value" });
    }
    let dev = target.involution_deviation();
    if dev > INVOLUTION_TOL {
        return Err(Error::NotInvolutory { deviation: dev });
    }
    let f_plus = kernel.amplitude_profile(s_m - 1.0);
    let f_minus = kernel.amplitude_profile(s_m + 1.0);
    let half_sum = 0.5 * (f_plus + f_minus);
    let half_diff = 0.5 * (f_plus - f_minus);
    let identity = HermitianOp2::identity();
    let mut m = [[Complex64::ZERO; 2]; 2];
    for (i, row) in m.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = identity.entry(i, j) * half_sum + target.entry(i, j) * half_diff;
        }
    }
    Ok(HermitianOp2::raw_unchecked(m))
}

/// Generalized measurement postulate: returns the outcome density
/// ⟨ψ|P̂²|ψ⟩ = ‖P̂ψ‖² and the collapsed state P̂ψ/‖P̂ψ‖ for outcome `s_m` of
/// the finite-resolution measurement of `target` on `state`.
pub fn apply_measurement(
    state: &PolarizationKet,
    kernel: &MeasurementKernel,
    target: &HermitianOp2,
    s_m: f64,
) -> Result<(f64, PolarizationKet)> {
    let op = measurement_operator(kernel, target, s_m)?;
    let image = op.apply(state);
    let density = image.norm_sqr();
    if density < DEGENERATE_DENSITY {
        return Err(Error::DegenerateOutcome { density });
    }
    let scale = 1.0 / density.sqrt();
    let post = PolarizationKet::raw_unchecked(image.amp_r() * scale, image.amp_l() * scale);
    Ok((density, post))
}

/// Kronecker product with photon a as the left factor.
pub fn tensor_op(a: &HermitianOp2, b: &HermitianOp2) -> Op4 {
    let mut m = [[Complex64::ZERO; 4]; 4];
    for ia in 0..2 {
        for ja in 0..2 {
            for ib in 0..2 {
                for jb in 0..2 {
                    m[2 * ia + ib][2 * ja + jb] = a.entry(ia, ja) * b.entry(ib, jb);
                }
            }
        }
    }
    Op4 { m }
}

/// Product state of two single-photon states, photon a left.
pub fn tensor_state(a: &PolarizationKet, b: &PolarizationKet) -> PairKet {
    PairKet::raw_unchecked([
        a.amp_r() * b.amp_r(),
        a.amp_r() * b.amp_l(),
        a.amp_l() * b.amp_r(),
        a.amp_l() * b.amp_l(),
    ])
}

/// Applies a single-photon operator to photon a of a pair state.
pub fn apply_to_photon_a(op: &HermitianOp2, psi: &PairKet) -> PairKet {
    let a = psi.amps();
    PairKet::raw_unchecked([
        op.entry(0, 0) * a[0] + op.entry(0, 1) * a[2],
        op.entry(0, 0) * a[1] + op.entry(0, 1) * a[3],
        op.entry(1, 0) * a[0] + op.entry(1, 1) * a[2],
        op.entry(1, 0) * a[1] + op.entry(1, 1) * a[3],
    ])
}

/// Applies a single-photon operator to photon b of a pair state.
pub fn apply_to_photon_b(op: &HermitianOp2, psi: &PairKet) -> PairKet {
    let a = psi.amps();
    PairKet::raw_unchecked([
        op.entry(0, 0) * a[0] + op.entry(0, 1) * a[1],
        op.entry(1, 0) * a[0] + op.entry(1, 1) * a[1],
        op.entry(0, 0) * a[2] + op.entry(0, 1) * a[3],
        op.entry(1, 0) * a[2] + op.entry(1, 1) * a[3],
    ])
}
