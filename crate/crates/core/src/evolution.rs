//! Reduced center-of-mass dynamics under a thermal internal state.
//!
//! Each internal level E_i evolves the center of mass with its own mass
//! M_i = m + E_i/c^2; the reduced density matrix is the Boltzmann-weighted
//! sum of those branches. In the fixed base-mass eigenbasis every branch is
//! a pure phase map, so the whole evolution is an elementwise kernel
//!   rho_mn(t) = rho_mn(0) * K_mn(t),
//! with the kernel depending on the backend:
//!
//! * exact (phase):    K = sum_i w_i exp(-i (a_m - a_n) theta (M_i/m)^{1/3})
//! * exact (reproject): each branch re-expanded in its own mass-M_i basis,
//!   quantifying the basis-change error the phase route ignores;
//! * first order:      K = sum_i w_i exp(-i (a_m - a_n) theta (1 + E_i/(3 m c^2)))
//! * cumulant:         K = exp(-i (a_m - a_n) theta (1 + Ebar/(3 m c^2))) e^{-delta/2}
//!
//! where a_n are the Airy zeros and theta = t / tau_g. The cumulant damping
//! exponent delta = <dE^2> t^2 g^2 (a_m - a_n)^2 / (9 hbar^2 c^4 k^2) equals
//! the variance of the first-order phase; the Gaussian (second-cumulant)
//! attenuation of the thermal average is e^{-delta/2}. delta itself is
//! reported per pair in [`CumulantStats`].

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::basis::EigenBasis;
use crate::error::CoreError;
use crate::operators::{airy_tail_cutoff, integrate, OperatorKind, OperatorMatrix};
use crate::thermal::ThermalState;
use crate::Result;

/// Minimum norm a projected packet must capture in the truncated basis.
pub const MIN_CAPTURED_NORM: f64 = 0.999;

/// Pure center-of-mass state, unit norm.
#[derive(Debug, Clone)]
pub struct CmState {
    pub coefficients: Vec<Complex64>,
}

impl CmState {
    /// Normalize a raw coefficient vector.
    pub fn from_coefficients(raw: Vec<Complex64>) -> Result<CmState> {
        if raw.is_empty() {
            return Err(CoreError::domain("state needs at least one coefficient"));
        }
        if raw.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(CoreError::domain("state coefficients must be finite"));
        }
        let norm2: f64 = raw.iter().map(|c| c.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(CoreError::domain("state coefficients must not all vanish"));
        }
        let s = norm2.sqrt();
        Ok(CmState {
            coefficients: raw.into_iter().map(|c| c / s).collect(),
        })
    }

    /// Equal-weight real superposition of the first two states, padded to `n`.
    pub fn equal_pair(n: usize) -> Result<CmState> {
        if n < 2 {
            return Err(CoreError::domain("equal_pair needs a basis of at least 2"));
        }
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        c[0] = Complex64::new(1.0, 0.0);
        c[1] = Complex64::new(1.0, 0.0);
        CmState::from_coefficients(c)
    }

    /// Project the minimum-uncertainty packet
    /// G(z) = (2 pi sigma^2)^{-1/4} exp(-(z - z0)^2/(4 sigma^2))
    /// onto the basis. Returns the renormalized state and the captured norm
    /// (which must reach [`MIN_CAPTURED_NORM`]).
    pub fn gaussian_packet(
        basis: &EigenBasis,
        z0: f64,
        sigma: f64,
        quad_tol: f64,
    ) -> Result<(CmState, f64)> {
        if !(z0 > 0.0 && z0.is_finite()) {
            return Err(CoreError::domain(format!("packet center must be > 0, got {z0}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(CoreError::domain(format!("packet width must be > 0, got {sigma}")));
        }
        let k = basis.scales.k;
        let u0 = k * z0;
        let su = k * sigma;
        let cut = airy_tail_cutoff(basis.alpha(basis.size()));
        let pref = (2.0 * std::f64::consts::PI * sigma * sigma).powf(-0.25) / k.sqrt();

        let n = basis.size();
        let mut coeffs = Vec::with_capacity(n);
        for idx in 1..=n {
            let alpha = basis.alpha(idx);
            let aip = basis.aip_at_zeros[idx - 1].abs();
            let f = |u: f64| {
                let ai = crate::airy::airy_ai(u - alpha).expect("within support window");
                ai / aip * (-(u - u0) * (u - u0) / (4.0 * su * su)).exp()
            };
            let v = integrate(f, 0.0, cut, quad_tol)?.value;
            coeffs.push(Complex64::new(pref * v, 0.0));
        }
        let captured: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if captured < MIN_CAPTURED_NORM {
            return Err(CoreError::NormCaptureTooLow {
                captured,
                required: MIN_CAPTURED_NORM,
            });
        }
        Ok((CmState::from_coefficients(coeffs)?, captured))
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

/// Center-of-mass density matrix in the eigenbasis.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &CmState) -> DensityMatrix {
        let n = state.len();
        let mut m = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                m[(a, b)] = state.coefficients[a] * state.coefficients[b].conj();
            }
        }
        DensityMatrix { entries: m }
    }

    /// Convex mixture of pure states; weights are renormalized.
    pub fn mixture(parts: &[(f64, CmState)]) -> Result<DensityMatrix> {
        if parts.is_empty() {
            return Err(CoreError::domain("mixture needs at least one component"));
        }
        let n = parts[0].1.len();
        let total: f64 = parts.iter().map(|(w, _)| *w).sum();
        if !(total > 0.0) || parts.iter().any(|(w, _)| *w < 0.0) {
            return Err(CoreError::domain("mixture weights must be non-negative, not all zero"));
        }
        let mut m = DMatrix::zeros(n, n);
        for (w, s) in parts {
            if s.len() != n {
                return Err(CoreError::DimensionMismatch { expected: n, got: s.len() });
            }
            let p = DensityMatrix::from_pure(s);
            m += p.entries * Complex64::new(w / total, 0.0);
        }
        Ok(DensityMatrix { entries: m })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.entries[(i, i)]).sum()
    }

    /// max |rho - rho^dagger| entrywise.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            worst = worst.max(self.entries[(a, a)].im.abs());
            for b in (a + 1)..n {
                worst = worst.max((self.entries[(a, b)] - self.entries[(b, a)].conj()).norm());
            }
        }
        worst
    }

    /// Tr rho^2 (real for Hermitian rho).
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Hermiticity within 1e-12, unit trace within 1e-10, and positive
    /// semidefiniteness up to -1e-10 (checked via a shifted Cholesky).
    pub fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_deviation();
        if herm > 1e-12 {
            return Err(CoreError::domain(format!(
                "density matrix not Hermitian: deviation {herm:e}"
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(CoreError::domain(format!("density matrix trace {tr} != 1")));
        }
        let n = self.dim();
        let mut shifted = self.entries.clone();
        for i in 0..n {
            shifted[(i, i)] += Complex64::new(1e-10, 0.0);
        }
        // Hermitize exactly so rounding does not confuse the factorization
        let h = (shifted.clone() + shifted.adjoint()) * Complex64::new(0.5, 0.0);
        if h.cholesky().is_none() {
            return Err(CoreError::domain(
                "density matrix has an eigenvalue below -1e-10".to_string(),
            ));
        }
        Ok(())
    }
}

/// Exact-backend variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactMode {
    /// Phases of the mass-shifted spectra applied in the fixed base basis.
    Phase,
    /// Re-expansion of each branch in its own mass-shifted eigenbasis.
    Reproject,
}

/// Which propagation produced a result series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    ExactPhase,
    ExactReproject,
    FirstOrder,
    Cumulant,
}

impl BackendKind {
    pub fn label(&self) -> &'static str {
        match self {
            BackendKind::ExactPhase => "exact_phase",
            BackendKind::ExactReproject => "exact_reproject",
            BackendKind::FirstOrder => "first_order",
            BackendKind::Cumulant => "cumulant",
        }
    }
}

/// Off-diagonal magnitude/phase history of one tracked pair (1-based m < n).
#[derive(Debug, Clone)]
pub struct PairSeries {
    pub pair: (usize, usize),
    pub initial_magnitude: f64,
    /// |rho_mn(t)| / |rho_mn(0)|.
    pub visibility: Vec<f64>,
    /// arg rho_mn(t).
    pub phase: Vec<f64>,
}

/// Time series of observables for one backend.
#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub backend: BackendKind,
    pub times: Vec<f64>,
    /// <z>(t), meters.
    pub z_expect: Vec<f64>,
    /// Tr rho^2 per time.
    pub purity: Vec<f64>,
    /// Tracked pairs with |rho_mn(0)| > 1e-12; others land in
    /// `undefined_pairs` rather than reporting zeros.
    pub visibility: Vec<PairSeries>,
    pub undefined_pairs: Vec<(usize, usize)>,
    /// max |Tr rho(t) - 1| over the series (basis-change diagnostic for the
    /// reproject backend, rounding-level otherwise).
    pub max_trace_deviation: f64,
    pub warnings: Vec<String>,
}

/// Mean/variance of the internal energy and the damping exponents of the
/// tracked pairs under the cumulant backend.
#[derive(Debug, Clone)]
pub struct CumulantStats {
    /// Ebar, J.
    pub mean_energy: f64,
    /// <dE^2>, J^2.
    pub variance: f64,
    /// Per tracked pair: delta_mn(t) = coefficient * t^2.
    pub delta: Vec<PairDelta>,
}

/// delta_mn(t) for one pair.
#[derive(Debug, Clone)]
pub struct PairDelta {
    pub pair: (usize, usize),
    /// delta / t^2, 1/s^2.
    pub coefficient: f64,
    /// delta at each time of the series.
    pub series: Vec<f64>,
}

/// Damping exponent delta_mn(t) = <dE^2> t^2 g^2 (a_m - a_n)^2 / (9 hbar^2 c^4 k^2),
/// the variance of the first-order inter-level phase.
pub fn delta_coefficient(basis: &EigenBasis, variance: f64, m: usize, n: usize) -> f64 {
    let p = &basis.params;
    let gap = basis.alpha(m) - basis.alpha(n);
    let k = basis.scales.k;
    variance * p.gravity * p.gravity * gap * gap
        / (9.0 * p.hbar * p.hbar * p.c.powi(4) * k * k)
}

fn validate_inputs(
    rho0: &DensityMatrix,
    basis: &EigenBasis,
    thermal: &ThermalState,
    times: &[f64],
) -> Result<()> {
    if rho0.dim() != basis.size() {
        return Err(CoreError::DimensionMismatch {
            expected: basis.size(),
            got: rho0.dim(),
        });
    }
    rho0.validate()?;
    if times.is_empty() {
        return Err(CoreError::domain("time grid must not be empty"));
    }
    if !(times[0] >= 0.0) {
        return Err(CoreError::domain("times must be >= 0"));
    }
    for w in times.windows(2) {
        if !(w[1] > w[0]) {
            return Err(CoreError::domain("times must be strictly ascending"));
        }
    }
    if thermal.weights.is_empty() {
        return Err(CoreError::domain("thermal state has no levels"));
    }
    Ok(())
}

fn check_position_matrix(z: &OperatorMatrix, n: usize) -> Result<()> {
    if z.kind != OperatorKind::Position {
        return Err(CoreError::domain("observable matrix must be the position operator"));
    }
    if z.dim() != n {
        return Err(CoreError::DimensionMismatch { expected: n, got: z.dim() });
    }
    Ok(())
}

/// Tr(rho z), meters. The imaginary part must cancel to rounding level.
pub fn position_expectation(rho: &DensityMatrix, z: &OperatorMatrix) -> Result<f64> {
    check_position_matrix(z, rho.dim())?;
    let n = rho.dim();
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..n {
        for b in 0..n {
            acc += rho.entries[(a, b)] * z.entries[(b, a)];
        }
    }
    if acc.im.abs() > 1e-10 * (1.0 + acc.re.abs()) {
        return Err(CoreError::domain(format!(
            "position expectation picked up an imaginary part {:e}",
            acc.im
        )));
    }
    Ok(acc.re)
}

/// Shared observable extraction over a kernel-evolved series.
struct SeriesAccumulator<'a> {
    z: &'a OperatorMatrix,
    tracked: Vec<(usize, usize)>,
    undefined: Vec<(usize, usize)>,
    initial_mags: Vec<f64>,
    z_expect: Vec<f64>,
    purity: Vec<f64>,
    visibility: Vec<Vec<f64>>,
    phase: Vec<Vec<f64>>,
    max_trace_dev: f64,
}

impl<'a> SeriesAccumulator<'a> {
    fn new(
        rho0: &DensityMatrix,
        z: &'a OperatorMatrix,
        tracked_pairs: &[(usize, usize)],
        n_times: usize,
    ) -> Result<Self> {
        let n = rho0.dim();
        let mut tracked = Vec::new();
        let mut undefined = Vec::new();
        let mut initial_mags = Vec::new();
        for &(m, l) in tracked_pairs {
            if m == 0 || l == 0 || m > n || l > n || m == l {
                return Err(CoreError::domain(format!(
                    "tracked pair ({m},{l}) invalid for basis size {n}"
                )));
            }
            let mag = rho0.entries[(m - 1, l - 1)].norm();
            if mag > 1e-12 {
                tracked.push((m, l));
                initial_mags.push(mag);
            } else {
                undefined.push((m, l));
            }
        }
        let n_pairs = tracked.len();
        Ok(SeriesAccumulator {
            z,
            tracked,
            undefined,
            initial_mags,
            z_expect: Vec::with_capacity(n_times),
            purity: Vec::with_capacity(n_times),
            visibility: vec![Vec::with_capacity(n_times); n_pairs],
            phase: vec![Vec::with_capacity(n_times); n_pairs],
            max_trace_dev: 0.0,
        })
    }

    fn push(&mut self, rho_t: &DensityMatrix) -> Result<()> {
        self.z_expect.push(position_expectation(rho_t, self.z)?);
        self.purity.push(rho_t.purity());
        let tr = rho_t.trace();
        self.max_trace_dev = self
            .max_trace_dev
            .max(((tr.re - 1.0).powi(2) + tr.im.powi(2)).sqrt());
        for (p, &(m, l)) in self.tracked.iter().enumerate() {
            let v = rho_t.entries[(m - 1, l - 1)];
            self.visibility[p].push(v.norm() / self.initial_mags[p]);
            self.phase[p].push(v.arg());
        }
        Ok(())
    }

    fn finish(
        self,
        backend: BackendKind,
        times: Vec<f64>,
        warnings: Vec<String>,
    ) -> EvolutionResult {
        let visibility = self
            .tracked
            .iter()
            .zip(self.initial_mags.iter())
            .zip(self.visibility.into_iter().zip(self.phase.into_iter()))
            .map(|((pair, mag), (vis, ph))| PairSeries {
                pair: *pair,
                initial_magnitude: *mag,
                visibility: vis,
                phase: ph,
            })
            .collect();
        EvolutionResult {
            backend,
            times,
            z_expect: self.z_expect,
            purity: self.purity,
            visibility,
            undefined_pairs: self.undefined,
            max_trace_deviation: self.max_trace_dev,
            warnings,
        }
    }
}

/// Phase-factor evolution: rho_mn(t) = rho_mn(0) K_mn(t) with
/// K_mn = sum_i w_i e^{-i (a_m - a_n) theta_i(t)}; `theta_of(t)` yields the
/// per-level dimensionless phase rates theta_i(t).
fn evolve_kernel<Theta>(
    rho0: &DensityMatrix,
    basis: &EigenBasis,
    thermal: &ThermalState,
    times: &[f64],
    z: &OperatorMatrix,
    tracked_pairs: &[(usize, usize)],
    backend: BackendKind,
    warnings: Vec<String>,
    theta_of: Theta,
) -> Result<EvolutionResult>
where
    Theta: Fn(f64) -> Vec<f64>,
{
    let n = basis.size();
    let mut acc = SeriesAccumulator::new(rho0, z, tracked_pairs, times.len())?;
    let mut rho_t = DensityMatrix { entries: DMatrix::zeros(n, n) };
    for &t in times {
        let thetas = theta_of(t);
        debug_assert_eq!(thetas.len(), thermal.weights.len());
        for a in 0..n {
            for b in 0..n {
                let gap = basis.alpha(a + 1) - basis.alpha(b + 1);
                let mut kernel = Complex64::new(0.0, 0.0);
                for (w, theta) in thermal.weights.iter().zip(&thetas) {
                    kernel += Complex64::from_polar(*w, -gap * theta);
                }
                rho_t.entries[(a, b)] = rho0.entries[(a, b)] * kernel;
            }
        }
        acc.push(&rho_t)?;
    }
    Ok(acc.finish(backend, times.to_vec(), warnings))
}

/// Exact thermal-sum evolution (see [`ExactMode`] for the two treatments of
/// the mass-dependent eigenbasis). `quad_tol` is used only by the
/// reproject mode for its overlap integrals.
pub fn evolve_exact(
    rho0: &DensityMatrix,
    basis: &EigenBasis,
    thermal: &ThermalState,
    times: &[f64],
    mode: ExactMode,
    z: &OperatorMatrix,
    tracked_pairs: &[(usize, usize)],
    quad_tol: f64,
) -> Result<EvolutionResult> {
    validate_inputs(rho0, basis, thermal, times)?;
    check_position_matrix(z, basis.size())?;
    let p = &basis.params;
    let tau = basis.scales.time_unit;
    // cube-root mass ratios (M_i/m)^{1/3}; the shifted mass must be positive
    let mut ratios = Vec::with_capacity(thermal.weights.len());
    for &ei in &thermal.spectrum.levels {
        let shifted = crate::basis::mass_shifted_params(p, ei)?;
        ratios.push((shifted.mass / p.mass).cbrt());
    }
    match mode {
        ExactMode::Phase => evolve_kernel(
            rho0,
            basis,
            thermal,
            times,
            z,
            tracked_pairs,
            BackendKind::ExactPhase,
            Vec::new(),
            |t| ratios.iter().map(|r| t / tau * r).collect(),
        ),
        ExactMode::Reproject => evolve_reproject(rho0, basis, thermal, times, z, tracked_pairs, quad_tol, &ratios),
    }
}

/// Re-expansion backend: branch i evolves through P_i(t) = S_i^T D_i(t) S_i
/// where S_i is the quadrature overlap between the mass-M_i eigenfunctions
/// and the base ones. Truncation makes P_i slightly non-unitary; the trace
/// drift is reported through `max_trace_deviation`.
#[allow(clippy::too_many_arguments)]
fn evolve_reproject(
    rho0: &DensityMatrix,
    basis: &EigenBasis,
    thermal: &ThermalState,
    times: &[f64],
    z: &OperatorMatrix,
    tracked_pairs: &[(usize, usize)],
    quad_tol: f64,
    ratios: &[f64],
) -> Result<EvolutionResult> {
    let n = basis.size();
    let tau = basis.scales.time_unit;

    // overlap S_i for each internal level: S_ab = sqrt(r) Int Ai(r u - a_a) Ai(u - a_b) du
    //                                             / (|Ai'(-a_a)| |Ai'(-a_b)|),  r = k_i/k
    let mut overlaps: Vec<DMatrix<f64>> = Vec::with_capacity(ratios.len());
    for &ratio in ratios {
        let r = ratio * ratio; // k_i/k = (M_i/m)^{2/3}
        let cut = airy_tail_cutoff(basis.alpha(n)) * (1.0 / r).max(1.0);
        let mut s = DMatrix::zeros(n, n);
        for a in 1..=n {
            for b in 1..=n {
                let alpha_a = basis.alpha(a);
                let alpha_b = basis.alpha(b);
                let norm = r.sqrt()
                    / (basis.aip_at_zeros[a - 1].abs() * basis.aip_at_zeros[b - 1].abs());
                let f = |u: f64| {
                    let ai_a = crate::airy::airy_ai(r * u - alpha_a).expect("within support");
                    let ai_b = crate::airy::airy_ai(u - alpha_b).expect("within support");
                    norm * ai_a * ai_b
                };
                s[(a - 1, b - 1)] = integrate(f, 0.0, cut, quad_tol)?.value;
            }
        }
        overlaps.push(s);
    }

    let mut acc = SeriesAccumulator::new(rho0, z, tracked_pairs, times.len())?;
    for &t in times {
        let mut rho_t: DMatrix<Complex64> = DMatrix::zeros(n, n);
        for (i, (w, s)) in thermal.weights.iter().zip(&overlaps).enumerate() {
            if *w == 0.0 {
                continue;
            }
            // P = S^T D S with D_aa = e^{-i a_a theta_i}
            let theta = t / tau * ratios[i];
            let mut p_mat: DMatrix<Complex64> = DMatrix::zeros(n, n);
            for c in 0..n {
                for b in 0..n {
                    let mut sum = Complex64::new(0.0, 0.0);
                    for a in 0..n {
                        let phase = Complex64::from_polar(1.0, -basis.alpha(a + 1) * theta);
                        sum += Complex64::new(s[(a, c)], 0.0)
                            * phase
                            * Complex64::new(s[(a, b)], 0.0);
                    }
                    p_mat[(c, b)] = sum;
                }
            }
            let branch = &p_mat * &rho0.entries * p_mat.adjoint();
            rho_t += branch * Complex64::new(*w, 0.0);
        }
        acc.push(&DensityMatrix { entries: rho_t })?;
    }
    Ok(acc.finish(BackendKind::ExactReproject, times.to_vec(), Vec::new()))
}

/// First-order-in-E_i/(m c^2) phases: theta_i = (t/tau)(1 + E_i/(3 m c^2)).
/// If max E_i/mc^2 >= 0.1 the result carries a validity warning.
pub fn evolve_first_order(
    rho0: &DensityMatrix,
    basis: &EigenBasis,
    thermal: &ThermalState,
    times: &[f64],
    z: &OperatorMatrix,
    tracked_pairs: &[(usize, usize)],
) -> Result<EvolutionResult> {
    validate_inputs(rho0, basis, thermal, times)?;
    check_position_matrix(z, basis.size())?;
    let p = &basis.params;
    let tau = basis.scales.time_unit;
    let mc2 = p.mc2();
    let mut warnings = Vec::new();
    let max_ratio = thermal
        .spectrum
        .levels
        .iter()
        .map(|e| e / mc2)
        .fold(0.0f64, f64::max);
    if max_ratio >= 0.1 {
        warnings.push(format!(
            "first-order expansion outside its validity window: max E_i/mc^2 = {max_ratio:.3}"
        ));
    }
    let factors: Vec<f64> = thermal
        .spectrum
        .levels
        .iter()
        .map(|e| 1.0 + e / (3.0 * mc2))
        .collect();
    evolve_kernel(
        rho0,
        basis,
        thermal,
        times,
        z,
        tracked_pairs,
        BackendKind::FirstOrder,
        warnings,
        |t| factors.iter().map(|f| t / tau * f).collect(),
    )
}

/// Second-cumulant evolution: mean phase at Ebar plus Gaussian damping
/// e^{-delta_mn/2} with delta_mn the phase variance (see module docs).
pub fn evolve_cumulant(
    rho0: &DensityMatrix,
    basis: &EigenBasis,
    thermal: &ThermalState,
    times: &[f64],
    z: &OperatorMatrix,
    tracked_pairs: &[(usize, usize)],
) -> Result<(EvolutionResult, CumulantStats)> {
    validate_inputs(rho0, basis, thermal, times)?;
    check_position_matrix(z, basis.size())?;
    let p = &basis.params;
    let tau = basis.scales.time_unit;
    let mc2 = p.mc2();
    let n = basis.size();
    let mut warnings = Vec::new();
    let max_ratio = thermal
        .spectrum
        .levels
        .iter()
        .map(|e| e / mc2)
        .fold(0.0f64, f64::max);
    if max_ratio >= 0.1 {
        warnings.push(format!(
            "first-order expansion outside its validity window: max E_i/mc^2 = {max_ratio:.3}"
        ));
    }

    let mean_factor = 1.0 + thermal.mean_energy / (3.0 * mc2);
    // delta/t^2 for every pair, from the variance of the phase rate
    let var_rate = |gap: f64| -> f64 {
        let r = gap * thermal.variance.sqrt() / (3.0 * mc2 * tau);
        r * r
    };

    let mut acc = SeriesAccumulator::new(rho0, z, tracked_pairs, times.len())?;
    let mut rho_t = DensityMatrix { entries: DMatrix::zeros(n, n) };
    for &t in times {
        let theta = t / tau * mean_factor;
        for a in 0..n {
            for b in 0..n {
                let gap = basis.alpha(a + 1) - basis.alpha(b + 1);
                let delta = var_rate(gap) * t * t;
                let kernel = Complex64::from_polar((-0.5 * delta).exp(), -gap * theta);
                rho_t.entries[(a, b)] = rho0.entries[(a, b)] * kernel;
            }
        }
        acc.push(&rho_t)?;
    }

    let delta = tracked_pairs
        .iter()
        .map(|&(m, l)| PairDelta {
            pair: (m, l),
            coefficient: delta_coefficient(basis, thermal.variance, m, l),
            series: times
                .iter()
                .map(|&t| delta_coefficient(basis, thermal.variance, m, l) * t * t)
                .collect(),
        })
        .collect();

    let result = acc.finish(BackendKind::Cumulant, times.to_vec(), warnings);
    Ok((
        result,
        CumulantStats {
            mean_energy: thermal.mean_energy,
            variance: thermal.variance,
            delta,
        },
    ))
}

/// One detected revival of the sliding-window contrast.
#[derive(Debug, Clone, Copy)]
pub struct Revival {
    /// Window-center time, s.
    pub time: f64,
    pub contrast: f64,
}

/// Outcome of collapse/revival detection on a position series.
#[derive(Debug, Clone)]
pub struct RevivalReport {
    pub initial_contrast: f64,
    /// Window-center time where the contrast first fell below 0.2x initial.
    pub collapse_time: Option<f64>,
    /// Post-collapse local maxima of the contrast, largest first
    /// (ties: earliest).
    pub revivals: Vec<Revival>,
    pub diagnostic: Option<String>,
}

/// Collapse threshold relative to the initial contrast.
const COLLAPSE_FRACTION: f64 = 0.2;

/// Sliding-window contrast analysis of <z>(t). `window` is the width (s)
/// over which max - min is measured; it must fit at least three times into
/// the series span.
pub fn detect_revival(series: &EvolutionResult, window: f64) -> Result<RevivalReport> {
    let times = &series.times;
    if times.len() < 8 {
        return Err(CoreError::domain("revival detection needs a longer series"));
    }
    let span = times[times.len() - 1] - times[0];
    if !(window > 0.0) || window > span / 3.0 {
        return Err(CoreError::domain(format!(
            "window {window:e} must be positive and at most a third of the span {span:e}"
        )));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let w_idx = (window / dt).round().max(1.0) as usize;
    let z = &series.z_expect;
    let n_windows = z.len().saturating_sub(w_idx);
    let mut contrast = Vec::with_capacity(n_windows);
    for i in 0..n_windows {
        let seg = &z[i..i + w_idx];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in seg {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        contrast.push(hi - lo);
    }
    let c0 = contrast[0];
    if c0 <= 0.0 {
        return Ok(RevivalReport {
            initial_contrast: c0,
            collapse_time: None,
            revivals: Vec::new(),
            diagnostic: Some("series has no initial oscillation contrast".into()),
        });
    }
    let collapse_idx = contrast.iter().position(|&c| c < COLLAPSE_FRACTION * c0);
    let Some(ci) = collapse_idx else {
        return Ok(RevivalReport {
            initial_contrast: c0,
            collapse_time: None,
            revivals: Vec::new(),
            diagnostic: Some(format!(
                "contrast never dropped below {COLLAPSE_FRACTION} of its initial value"
            )),
        });
    };
    let center = |i: usize| times[0] + (i as f64) * dt + window / 2.0;

    let mut revivals = Vec::new();
    for i in (ci + 1)..n_windows.saturating_sub(1) {
        if contrast[i] > contrast[i - 1] && contrast[i] >= contrast[i + 1] {
            revivals.push(Revival { time: center(i), contrast: contrast[i] });
        }
    }
    revivals.sort_by(|a, b| {
        b.contrast
            .partial_cmp(&a.contrast)
            .unwrap()
            .then(a.time.partial_cmp(&b.time).unwrap())
    });
    Ok(RevivalReport {
        initial_contrast: c0,
        collapse_time: Some(center(ci)),
        revivals,
        diagnostic: None,
    })
}
