//! Internal-level spectra and their thermal statistics.
//!
//! The internal Hamiltonian never couples to anything that changes its
//! populations here; a thermal state enters only through its Boltzmann
//! weights and the first two cumulants of the energy distribution, which
//! drive the mean phase shift and the dephasing of the reduced dynamics.

use crate::error::CoreError;
use crate::Result;

/// Internal energy levels, lowest exactly zero (the ground-state mass
/// energy is absorbed into the rest mass).
#[derive(Debug, Clone, PartialEq)]
pub struct InternalSpectrum {
    /// Level energies, J, non-decreasing, levels[0] == 0.
    pub levels: Vec<f64>,
    /// Optional degeneracies g_i >= 1 (default all 1).
    pub degeneracies: Option<Vec<u32>>,
}

impl InternalSpectrum {
    pub fn new(levels: Vec<f64>, degeneracies: Option<Vec<u32>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(CoreError::domain("internal spectrum needs at least one level"));
        }
        if levels[0] != 0.0 {
            return Err(CoreError::domain(format!(
                "lowest internal level must be exactly 0, got {}",
                levels[0]
            )));
        }
        for w in levels.windows(2) {
            if !(w[1] >= w[0]) {
                return Err(CoreError::domain("internal levels must be non-decreasing"));
            }
        }
        if !levels.iter().all(|e| e.is_finite()) {
            return Err(CoreError::domain("internal levels must be finite"));
        }
        if let Some(g) = &degeneracies {
            if g.len() != levels.len() {
                return Err(CoreError::DimensionMismatch {
                    expected: levels.len(),
                    got: g.len(),
                });
            }
            if g.iter().any(|&gi| gi == 0) {
                return Err(CoreError::domain("degeneracies must be >= 1"));
            }
        }
        Ok(InternalSpectrum { levels, degeneracies })
    }

    /// Single level at zero: a structureless particle.
    pub fn trivial() -> Self {
        InternalSpectrum { levels: vec![0.0], degeneracies: None }
    }

    /// Two levels {0, gap}.
    pub fn two_level(gap: f64) -> Result<Self> {
        if !(gap.is_finite() && gap > 0.0) {
            return Err(CoreError::domain(format!("two-level gap must be positive, got {gap}")));
        }
        Self::new(vec![0.0, gap], None)
    }

    /// Uniform ladder E_i = (i-1) * spacing, i = 1..=count.
    pub fn ladder(spacing: f64, count: usize) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(CoreError::domain(format!(
                "ladder spacing must be positive, got {spacing}"
            )));
        }
        if count < 2 {
            return Err(CoreError::domain("ladder needs at least 2 levels"));
        }
        Self::new((0..count).map(|i| i as f64 * spacing).collect(), None)
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    fn degeneracy(&self, i: usize) -> f64 {
        self.degeneracies.as_ref().map_or(1.0, |g| g[i] as f64)
    }
}

/// Boltzmann-weighted state of the internal levels.
#[derive(Debug, Clone)]
pub struct ThermalState {
    pub spectrum: InternalSpectrum,
    /// Temperature, K (or energy-unit/k_B in scaled runs).
    pub temperature: f64,
    /// 1/(k_B T), 1/J; infinite at T = 0.
    pub beta: f64,
    /// Normalized weights w_i, sum exactly renormalized to 1.
    pub weights: Vec<f64>,
    /// Partition function sum g_i e^{-beta E_i} (after the min-energy shift).
    pub partition_function: f64,
    /// Mean internal energy, J.
    pub mean_energy: f64,
    /// Energy variance <(E - Ebar)^2>, J^2.
    pub variance: f64,
}

/// Build the thermal state at temperature `temperature` >= 0 with Boltzmann
/// constant `boltzmann` (SI value, or 1 in scaled-unit runs where the
/// temperature is quoted in energy units).
pub fn thermal_state(
    spectrum: &InternalSpectrum,
    temperature: f64,
    boltzmann: f64,
) -> Result<ThermalState> {
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(CoreError::domain(format!(
            "temperature must be finite and >= 0, got {temperature}"
        )));
    }
    if !(boltzmann > 0.0) || !boltzmann.is_finite() {
        return Err(CoreError::domain(format!(
            "boltzmann constant must be positive, got {boltzmann}"
        )));
    }
    let emin = spectrum.levels[0]; // == 0 by construction, kept for clarity

    let (beta, mut weights): (f64, Vec<f64>) = if temperature == 0.0 {
        // exact ground-manifold limit, no large-beta arithmetic
        let w: Vec<f64> = spectrum
            .levels
            .iter()
            .enumerate()
            .map(|(i, &e)| if e == emin { spectrum.degeneracy(i) } else { 0.0 })
            .collect();
        (f64::INFINITY, w)
    } else {
        let beta = 1.0 / (boltzmann * temperature);
        let w: Vec<f64> = spectrum
            .levels
            .iter()
            .enumerate()
            .map(|(i, &e)| spectrum.degeneracy(i) * (-beta * (e - emin)).exp())
            .collect();
        (beta, w)
    };

    let partition_function: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= partition_function;
    }

    let mean_energy: f64 = weights
        .iter()
        .zip(&spectrum.levels)
        .map(|(w, e)| w * e)
        .sum();
    let variance: f64 = weights
        .iter()
        .zip(&spectrum.levels)
        .map(|(w, e)| w * (e - mean_energy) * (e - mean_energy))
        .sum::<f64>()
        .max(0.0);

    Ok(ThermalState {
        spectrum: spectrum.clone(),
        temperature,
        beta,
        weights,
        partition_function,
        mean_energy,
        variance,
    })
}

/// Variance of the internal energy across a temperature grid, with the
/// fitted local power-law exponent d ln<dE^2> / d ln T (centered where both
/// neighbors exist, one-sided at the ends, absent where the variance
/// vanishes).
#[derive(Debug, Clone)]
pub struct VariancePoint {
    pub temperature: f64,
    pub variance: f64,
    pub local_exponent: Option<f64>,
}

pub fn variance_vs_temperature_profile(
    spectrum: &InternalSpectrum,
    temperatures: &[f64],
    boltzmann: f64,
) -> Result<Vec<VariancePoint>> {
    if temperatures.is_empty() {
        return Err(CoreError::domain("temperature grid must not be empty"));
    }
    for w in temperatures.windows(2) {
        if !(w[1] > w[0]) {
            return Err(CoreError::domain("temperature grid must be strictly ascending"));
        }
    }
    if temperatures[0] <= 0.0 {
        return Err(CoreError::domain("temperature grid must be positive"));
    }
    let vars: Vec<f64> = temperatures
        .iter()
        .map(|&t| thermal_state(spectrum, t, boltzmann).map(|s| s.variance))
        .collect::<Result<_>>()?;

    let ln = |x: f64| x.ln();
    let slope = |i: usize, j: usize| -> Option<f64> {
        if vars[i] > 0.0 && vars[j] > 0.0 {
            Some((ln(vars[j]) - ln(vars[i])) / (ln(temperatures[j]) - ln(temperatures[i])))
        } else {
            None
        }
    };

    let n = temperatures.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let local_exponent = if n == 1 {
            None
        } else if i == 0 {
            slope(0, 1)
        } else if i == n - 1 {
            slope(n - 2, n - 1)
        } else {
            slope(i - 1, i + 1)
        };
        out.push(VariancePoint {
            temperature: temperatures[i],
            variance: vars[i],
            local_exponent,
        });
    }
    Ok(out)
}
