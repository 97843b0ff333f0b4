//! Physical parameters and the truncated bouncer eigenbasis.
//!
//! A particle of mass m above a mirror at z = 0 in uniform gravity g has
//! eigenfunctions psi_n(z) = N_n Ai(k z - alpha_n) with
//! k = (2 m^2 g / hbar^2)^{1/3}, energies E_n = m g alpha_n / k and
//! normalization N_n = sqrt(k) / |Ai'(-alpha_n)|.
//!
//! All internal computation is carried in the natural bouncer scales
//! (length 1/k, energy m g / k, time hbar k / (m g)); SI values appear only
//! at the interfaces.

use crate::airy::{self, AiryZeroTable};
use crate::error::CoreError;
use crate::Result;

/// Physical inputs. All strictly positive and finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BouncerParams {
    /// Rest mass, kg.
    pub mass: f64,
    /// Gravitational acceleration, m/s^2.
    pub gravity: f64,
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Speed of light, m/s.
    pub c: f64,
}

impl BouncerParams {
    pub fn new(mass: f64, gravity: f64, hbar: f64, c: f64) -> Result<Self> {
        for (name, v) in [("mass", mass), ("gravity", gravity), ("hbar", hbar), ("c", c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CoreError::domain(format!(
                    "parameter {name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(BouncerParams { mass, gravity, hbar, c })
    }

    /// Natural bouncer units m = g = hbar = 1 with c chosen so that
    /// mc^2 = 10^6 energy units (mass-energy effects stay perturbative).
    pub fn bouncer_units() -> Self {
        Self::bouncer_units_with_mc2(1.0e6)
    }

    /// Bouncer units with mc^2 pinned to a chosen multiple of the energy
    /// unit eps_g = m g / k = 2^{-1/3}.
    pub fn bouncer_units_with_mc2(mc2_over_eps: f64) -> Self {
        BouncerParams {
            mass: 1.0,
            gravity: 1.0,
            hbar: 1.0,
            c: (mc2_over_eps * 2.0f64.powf(-1.0 / 3.0)).sqrt(),
        }
    }

    pub fn scales(&self) -> DerivedScales {
        DerivedScales::from_params(self)
    }

    /// Rest energy m c^2, J.
    pub fn mc2(&self) -> f64 {
        self.mass * self.c * self.c
    }
}

/// Scales derived from the parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedScales {
    /// Inverse length k = (2 m^2 g / hbar^2)^{1/3}, 1/m.
    pub k: f64,
    /// Gravitational length 1/k, m.
    pub length_unit: f64,
    /// Energy unit m g / k, J.
    pub energy_unit: f64,
    /// Time unit hbar / energy_unit, s.
    pub time_unit: f64,
}

impl DerivedScales {
    pub fn from_params(p: &BouncerParams) -> Self {
        let k = (2.0 * p.mass * p.mass * p.gravity / (p.hbar * p.hbar)).cbrt();
        let energy_unit = p.mass * p.gravity / k;
        DerivedScales {
            k,
            length_unit: 1.0 / k,
            energy_unit,
            time_unit: p.hbar / energy_unit,
        }
    }
}

/// Truncated eigenbasis of the bouncing particle.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub params: BouncerParams,
    pub scales: DerivedScales,
    pub zero_table: AiryZeroTable,
    /// Energies E_n = eps_g * alpha_n, J, strictly increasing.
    pub energies: Vec<f64>,
    /// Normalizations N_n = sqrt(k)/|Ai'(-alpha_n)| > 0, m^{-1/2}.
    pub norms: Vec<f64>,
    /// Ai'(-alpha_n) with its sign (alternates with n).
    pub aip_at_zeros: Vec<f64>,
}

/// Maximum supported basis size.
pub const MAX_BASIS_SIZE: usize = 200;

/// Build the first `size` eigenstates. `zero_tol` is the Airy-zero
/// refinement tolerance (see [`airy::airy_zeros`]).
pub fn build_basis(params: &BouncerParams, size: usize, zero_tol: f64) -> Result<EigenBasis> {
    if size == 0 || size > MAX_BASIS_SIZE {
        return Err(CoreError::domain(format!(
            "basis size must lie in 1..={MAX_BASIS_SIZE}, got {size}"
        )));
    }
    let scales = params.scales();
    let zero_table = airy::airy_zeros(size, zero_tol)?;
    let mut energies = Vec::with_capacity(size);
    let mut norms = Vec::with_capacity(size);
    let mut aip_at_zeros = Vec::with_capacity(size);
    for &alpha in &zero_table.zeros {
        let aip = airy::airy_ai_prime(-alpha)?;
        energies.push(scales.energy_unit * alpha);
        norms.push(scales.k.sqrt() / aip.abs());
        aip_at_zeros.push(aip);
    }
    Ok(EigenBasis {
        params: *params,
        scales,
        zero_table,
        energies,
        norms,
        aip_at_zeros,
    })
}

impl EigenBasis {
    pub fn size(&self) -> usize {
        self.zero_table.zeros.len()
    }

    /// alpha_n (1-based).
    pub fn alpha(&self, n: usize) -> f64 {
        self.zero_table.zeros[n - 1]
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n == 0 || n > self.size() {
            return Err(CoreError::domain(format!(
                "state index {n} outside 1..={}",
                self.size()
            )));
        }
        Ok(())
    }

    /// psi_n(z) = N_n Ai(k z - alpha_n) for z >= 0 (1-based n), m^{-1/2}.
    pub fn eval_eigenfunction(&self, n: usize, z: f64) -> Result<f64> {
        self.check_index(n)?;
        if !(z >= 0.0) {
            return Err(CoreError::domain(format!(
                "position must satisfy z >= 0 (mirror boundary), got {z}"
            )));
        }
        let u = self.scales.k * z;
        Ok(self.norms[n - 1] * airy::airy_ai(u - self.alpha(n))?)
    }

    /// Dimensionless eigenfunction in u = k z: Ai(u - alpha_n)/|Ai'(-alpha_n)|,
    /// normalized as int_0^inf phi_n^2 du = 1.
    pub fn eval_scaled(&self, n: usize, u: f64) -> Result<f64> {
        self.check_index(n)?;
        Ok(airy::airy_ai(u - self.alpha(n))? / self.aip_at_zeros[n - 1].abs())
    }
}

/// Parameters with the mass shifted by one internal level: M = m + E_i/c^2.
pub fn mass_shifted_params(params: &BouncerParams, internal_energy: f64) -> Result<BouncerParams> {
    let shifted = params.mass + internal_energy / (params.c * params.c);
    if !(shifted.is_finite() && shifted > 0.0) {
        return Err(CoreError::domain(format!(
            "shifted mass m + E_i/c^2 = {shifted} must be positive"
        )));
    }
    Ok(BouncerParams {
        mass: shifted,
        ..*params
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn derived_scales_recompute() {
        let p = BouncerParams::new(1.0, 1.0, 1.0, 1e6).unwrap();
        let s = p.scales();
        assert_relative_eq!(s.k, 2f64.powf(1.0 / 3.0), max_relative = 1e-14);
        assert_relative_eq!(s.k * s.length_unit, 1.0, max_relative = 1e-15);
        assert_relative_eq!(
            s.k,
            (2.0 * p.mass * p.mass * p.gravity / (p.hbar * p.hbar)).powf(1.0 / 3.0),
            max_relative = 1e-14
        );
    }

    #[test]
    fn neutron_scale_reference() {
        // m = 1.67e-27 kg, g = 9.81, hbar = 1.0545718e-34:
        // high-precision arithmetic gives l_g = 5.879496291327511e-6 m
        let p = BouncerParams::new(1.67e-27, 9.81, 1.0545718e-34, 2.99792458e8).unwrap();
        let s = p.scales();
        assert_relative_eq!(s.length_unit, 5.879_496_291_327_511e-6, max_relative = 1e-12);
    }

    #[test]
    fn energies_are_zero_table() {
        let p = BouncerParams::bouncer_units();
        let b = build_basis(&p, 3, 1e-12).unwrap();
        let eps = b.scales.energy_unit;
        let expect = [2.338_107_410_459_767, 4.087_949_444_130_970_3, 5.520_559_828_095_551];
        for (e, a) in b.energies.iter().zip(expect) {
            assert_relative_eq!(e / eps, a, max_relative = 1e-12);
        }
        for w in b.energies.windows(2) {
            assert!(w[1] > w[0]);
        }
    }

    #[test]
    fn si_vs_scaled_consistency() {
        // E_n in SI divided by eps_g equals alpha_n
        let p = BouncerParams::new(1.67e-27, 9.81, 1.0545718e-34, 2.99792458e8).unwrap();
        let b = build_basis(&p, 10, 1e-12).unwrap();
        for n in 1..=10 {
            assert_relative_eq!(
                b.energies[n - 1] / b.scales.energy_unit,
                b.alpha(n),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn boundary_condition() {
        let p = BouncerParams::bouncer_units();
        let b = build_basis(&p, 12, 1e-12).unwrap();
        for n in 1..=12 {
            let v = b.eval_eigenfunction(n, 0.0).unwrap();
            assert!(v.abs() < 1e-11 * b.norms[n - 1], "psi_{n}(0) = {v}");
        }
    }

    #[test]
    fn ground_state_positive_inside() {
        let p = BouncerParams::bouncer_units();
        let b = build_basis(&p, 1, 1e-12).unwrap();
        let turning = b.alpha(1) / b.scales.k;
        for i in 1..100 {
            let z = turning * i as f64 / 100.0;
            assert!(b.eval_eigenfunction(1, z).unwrap() > 0.0);
        }
    }

    #[test]
    fn negative_position_rejected() {
        let p = BouncerParams::bouncer_units();
        let b = build_basis(&p, 1, 1e-12).unwrap();
        assert!(b.eval_eigenfunction(1, -0.1).is_err());
    }

    #[test]
    fn mass_shift_identity_and_doubling() {
        let p = BouncerParams::bouncer_units();
        let same = mass_shifted_params(&p, 0.0).unwrap();
        assert_eq!(p, same);

        let doubled = mass_shifted_params(&p, p.mc2()).unwrap();
        assert_relative_eq!(doubled.mass, 2.0 * p.mass, max_relative = 1e-15);
        let ratio = doubled.scales().k / p.scales().k;
        assert_relative_eq!(ratio, 2f64.powf(2.0 / 3.0), max_relative = 1e-14);
    }

    #[test]
    fn mass_shift_rejects_nonpositive() {
        let p = BouncerParams::bouncer_units();
        assert!(mass_shifted_params(&p, -1.5 * p.mc2()).is_err());
    }

    #[test]
    fn energy_mass_scaling_law() {
        // E_n(M)/E_n(m) = (M/m)^{1/3} across five decades of E_i/c^2
        let p = BouncerParams::bouncer_units();
        let b = build_basis(&p, 5, 1e-12).unwrap();
        for exp in 0..5 {
            let ei = p.mc2() * 10f64.powi(-(exp as i32) - 2);
            let shifted = mass_shifted_params(&p, ei).unwrap();
            let bs = build_basis(&shifted, 5, 1e-12).unwrap();
            let expect = (shifted.mass / p.mass).powf(1.0 / 3.0);
            for n in 0..5 {
                assert_relative_eq!(bs.energies[n] / b.energies[n], expect, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn small_shift_energy_derivative() {
        // dE/dM = E/(3M): relative energy shift = (E_i/mc^2)/3 + O(x^2)
        let p = BouncerParams::bouncer_units();
        let b = build_basis(&p, 3, 1e-12).unwrap();
        let x = 1e-6;
        let shifted = mass_shifted_params(&p, x * p.mc2()).unwrap();
        let bs = build_basis(&shifted, 3, 1e-12).unwrap();
        for n in 0..3 {
            let rel = bs.energies[n] / b.energies[n] - 1.0;
            assert_relative_eq!(rel, x / 3.0, max_relative = 1e-5);
        }
    }

    #[test]
    fn rejects_bad_params_and_size() {
        assert!(BouncerParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(BouncerParams::new(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(BouncerParams::new(1.0, 1.0, f64::NAN, 1.0).is_err());
        let p = BouncerParams::bouncer_units();
        assert!(build_basis(&p, 0, 1e-12).is_err());
        assert!(build_basis(&p, 201, 1e-12).is_err());
    }
}
