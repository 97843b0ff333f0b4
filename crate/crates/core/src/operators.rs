//! Adaptive quadrature and operator matrix elements in the eigenbasis.
//!
//! Matrix elements are computed in the dimensionless variable u = k z where
//! the normalized eigenfunctions are phi_n(u) = Ai(u - alpha_n)/|Ai'(-alpha_n)|.
//! Integrands built from Ai products decay super-exponentially past the last
//! classical turning point, so integration over [0, alpha_N + 15] captures
//! the full line to far below any tolerance used here.
//!
//! Kinetic-energy elements use the operator identity
//! <m| P^2/2m |n> = E_n delta_mn - m g z_mn (H0 minus the potential), which
//! avoids numerical differentiation entirely.

use nalgebra::DMatrix;

use crate::airy::airy_ai;
use crate::basis::EigenBasis;
use crate::error::CoreError;
use crate::Result;

// 7/15-point Gauss-Legendre nodes and weights on [-1, 1]; the embedded
// difference |G15 - G7| serves as the panel error estimate.
const GL7_NODES: [f64; 7] = [
    -0.9491079123427585,
    -0.7415311855993945,
    -0.4058451513773972,
    0.0,
    0.4058451513773972,
    0.7415311855993945,
    0.9491079123427585,
];
const GL7_WEIGHTS: [f64; 7] = [
    0.12948496616887065,
    0.2797053914892766,
    0.3818300505051183,
    0.41795918367346896,
    0.3818300505051183,
    0.2797053914892766,
    0.12948496616887065,
];
const GL15_NODES: [f64; 15] = [
    -0.9879925180204854,
    -0.937273392400706,
    -0.8482065834104272,
    -0.7244177313601701,
    -0.5709721726085388,
    -0.3941513470775634,
    -0.20119409399743451,
    0.0,
    0.20119409399743451,
    0.3941513470775634,
    0.5709721726085388,
    0.7244177313601701,
    0.8482065834104272,
    0.937273392400706,
    0.9879925180204854,
];
const GL15_WEIGHTS: [f64; 15] = [
    0.030753241996118647,
    0.07036604748810807,
    0.10715922046717177,
    0.1395706779261539,
    0.16626920581699378,
    0.18616100001556188,
    0.19843148532711125,
    0.2025782419255609,
    0.19843148532711125,
    0.18616100001556188,
    0.16626920581699378,
    0.1395706779261539,
    0.10715922046717177,
    0.07036604748810807,
    0.030753241996118647,
];

const MAX_DEPTH: usize = 44;

/// Value and accumulated error estimate of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut g7 = 0.0;
    for (x, w) in GL7_NODES.iter().zip(GL7_WEIGHTS) {
        g7 += w * f(mid + half * x);
    }
    let mut g15 = 0.0;
    for (x, w) in GL15_NODES.iter().zip(GL15_WEIGHTS) {
        g15 += w * f(mid + half * x);
    }
    (half * g15, half * (g15 - g7).abs())
}

/// Adaptive panel integration of `f` over [a, b] to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite() && b >= a) {
        return Err(CoreError::domain(format!("bad integration interval [{a}, {b}]")));
    }
    if !(tol >= 1e-13) {
        return Err(CoreError::domain(format!(
            "quadrature tolerance must be >= 1e-13, got {tol:e}"
        )));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error_estimate: 0.0, panels: 0 });
    }
    let mut result = QuadResult { value: 0.0, error_estimate: 0.0, panels: 0 };
    adapt(&f, a, b, tol, 0, &mut result);
    if result.error_estimate > tol {
        return Err(CoreError::QuadratureDidNotConverge {
            achieved: result.error_estimate,
            requested: tol,
        });
    }
    Ok(result)
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, budget: f64, depth: usize, acc: &mut QuadResult) {
    let (value, err) = panel(f, a, b);
    let mid = 0.5 * (a + b);
    if err <= budget || depth >= MAX_DEPTH || mid <= a || mid >= b {
        acc.value += value;
        acc.error_estimate += err;
        acc.panels += 1;
        return;
    }
    adapt(f, a, mid, 0.5 * budget, depth + 1, acc);
    adapt(f, mid, b, 0.5 * budget, depth + 1, acc);
}

/// Integration cutoff for Airy-product integrands: past the last turning
/// point alpha_max the product decays like e^{-(4/3) s^{3/2}}, so 15 units
/// beyond it the tail is ~1e-33 of the scale of the integrand.
pub fn airy_tail_cutoff(alpha_max: f64) -> f64 {
    alpha_max + 15.0
}

/// Which operator a matrix holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    /// z, entries in meters.
    Position,
    /// P^2/2m, entries in joules.
    Kinetic,
    /// -P^2/2m + m g z (the center-of-mass factor multiplying the
    /// internal-energy mass shift), entries in joules.
    PerturbationCm,
}

/// Real symmetric operator matrix in the truncated eigenbasis, SI units.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub kind: OperatorKind,
    pub entries: DMatrix<f64>,
}

impl OperatorMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// max |A_mn - A_nm| over the matrix.
    pub fn symmetry_deviation(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for m in 0..n {
            for l in (m + 1)..n {
                worst = worst.max((self.entries[(m, l)] - self.entries[(l, m)]).abs());
            }
        }
        worst
    }
}

/// Dimensionless overlap xi_mn = int phi_m phi_n u^p du for p = 0, 1, 2.
fn airy_overlap(basis: &EigenBasis, m: usize, n: usize, power: i32, tol: f64) -> Result<f64> {
    let am = basis.alpha(m);
    let an = basis.alpha(n);
    let cut = airy_tail_cutoff(basis.alpha(basis.size()));
    let norm = 1.0 / (basis.aip_at_zeros[m - 1].abs() * basis.aip_at_zeros[n - 1].abs());
    let f = |u: f64| {
        let a = airy_ai(u - am).expect("within support window");
        let b = airy_ai(u - an).expect("within support window");
        let w = match power {
            0 => 1.0,
            1 => u,
            _ => u * u,
        };
        a * b * w * norm
    };
    Ok(integrate(f, 0.0, cut, tol)?.value)
}

/// Gram matrix of the first N eigenfunctions (dimensionless; identity up to
/// quadrature error).
pub fn gram_matrix(basis: &EigenBasis, tol: f64) -> Result<DMatrix<f64>> {
    let n = basis.size();
    let mut g = DMatrix::zeros(n, n);
    for m in 1..=n {
        for l in m..=n {
            let v = airy_overlap(basis, m, l, 0, tol)?;
            g[(m - 1, l - 1)] = v;
            g[(l - 1, m - 1)] = v;
        }
    }
    Ok(g)
}

/// Dimensionless position matrix k z_mn (entries in units of 1/k).
pub fn position_matrix_scaled(basis: &EigenBasis, tol: f64) -> Result<DMatrix<f64>> {
    let n = basis.size();
    let mut z = DMatrix::zeros(n, n);
    for m in 1..=n {
        for l in m..=n {
            let v = airy_overlap(basis, m, l, 1, tol)?;
            z[(m - 1, l - 1)] = v;
            z[(l - 1, m - 1)] = v;
        }
    }
    Ok(z)
}

/// Position operator, meters.
pub fn position_matrix(basis: &EigenBasis, tol: f64) -> Result<OperatorMatrix> {
    let scaled = position_matrix_scaled(basis, tol)?;
    let entries = scaled / basis.scales.k;
    for i in 0..entries.nrows() {
        if entries[(i, i)] <= 0.0 {
            return Err(CoreError::domain(format!(
                "position diagonal entry {} came out non-positive",
                i + 1
            )));
        }
    }
    Ok(OperatorMatrix { kind: OperatorKind::Position, entries })
}

/// Kinetic energy P^2/2m via E_n delta_mn - m g z_mn, joules.
pub fn kinetic_matrix(basis: &EigenBasis, tol: f64) -> Result<OperatorMatrix> {
    let ztil = position_matrix_scaled(basis, tol)?;
    let n = basis.size();
    let eps = basis.scales.energy_unit;
    let mut t = DMatrix::zeros(n, n);
    for m in 0..n {
        for l in 0..n {
            let delta = if m == l { basis.alpha(l + 1) } else { 0.0 };
            t[(m, l)] = eps * (delta - ztil[(m, l)]);
        }
    }
    // ztil is symmetric by construction, so this is exact symmetrization
    let sym = 0.5 * (&t + t.transpose());
    Ok(OperatorMatrix { kind: OperatorKind::Kinetic, entries: sym })
}

/// Center-of-mass factor of the mass-shift coupling, V = -P^2/2m + m g z,
/// joules. Diagonal E_n/3, off-diagonal 2 m g z_mn.
pub fn perturbation_cm_matrix(basis: &EigenBasis, tol: f64) -> Result<OperatorMatrix> {
    let ztil = position_matrix_scaled(basis, tol)?;
    Ok(perturbation_cm_from_scaled(basis, &ztil))
}

/// Same as [`perturbation_cm_matrix`] but reusing a precomputed k z matrix.
pub fn perturbation_cm_from_scaled(basis: &EigenBasis, ztil: &DMatrix<f64>) -> OperatorMatrix {
    let n = basis.size();
    let eps = basis.scales.energy_unit;
    let mut v = DMatrix::zeros(n, n);
    for m in 0..n {
        for l in 0..n {
            let delta = if m == l { basis.alpha(l + 1) } else { 0.0 };
            v[(m, l)] = eps * (2.0 * ztil[(m, l)] - delta);
        }
    }
    let sym = 0.5 * (&v + v.transpose());
    OperatorMatrix { kind: OperatorKind::PerturbationCm, entries: sym }
}

/// Closed form for the position diagonal: z_nn = 2 alpha_n / (3k).
pub fn position_diagonal_closed_form(basis: &EigenBasis, n: usize) -> f64 {
    2.0 * basis.alpha(n) / (3.0 * basis.scales.k)
}

/// Closed form for the off-diagonal magnitude: |z_mn| = 2/(k (alpha_m - alpha_n)^2).
pub fn position_offdiag_magnitude_closed_form(basis: &EigenBasis, m: usize, n: usize) -> f64 {
    let d = basis.alpha(m) - basis.alpha(n);
    2.0 / (basis.scales.k * d * d)
}

/// <n| z^2 |n> by quadrature, m^2. Used for completeness checks.
pub fn position_squared_diagonal(basis: &EigenBasis, n: usize, tol: f64) -> Result<f64> {
    let v = airy_overlap(basis, n, n, 2, tol)?;
    Ok(v / (basis.scales.k * basis.scales.k))
}
