//! The Airy function Ai, its derivative, and the negative-axis zeros.
//!
//! Evaluation strategy:
//! * |x| <= 8: Maclaurin series in the two fundamental solutions of
//!   y'' = x y, combined with Ai(0) and Ai'(0). Terms and accumulation are
//!   carried in double-double arithmetic; the raw partial sums grow like
//!   e^{zeta} relative to the result near |x| ~ 8 and a plain f64 sum
//!   would lose ~13 digits there.
//! * |x| > 8: standard large-argument expansions, exponential on the
//!   positive side and oscillatory (phase zeta - pi/4) on the negative
//!   side, truncated at the smallest term.
//!
//! The supported window is |x| <= 200; beyond that Ai underflows (x > 0)
//! or the caller is better served by the asymptotic phase directly.
//!
//! Zeros alpha_n (Ai(-alpha_n) = 0) are found from the asymptotic seed
//! (3 pi (4n-1)/8)^{2/3} refined by bracketed Newton iteration.

use crate::dd::{dd_prod, Dd};
use crate::error::CoreError;
use crate::Result;

/// Largest |x| accepted by [`airy_ai`] / [`airy_ai_prime`].
pub const SUPPORT_LIMIT: f64 = 200.0;

/// Series/asymptotic switchover point.
const SERIES_LIMIT: f64 = 8.0;

/// Ai(0) = 3^{-2/3} / Gamma(2/3), split to ~32 digits.
const AI0: Dd = Dd {
    hi: 0.355_028_053_887_817_2,
    lo: 2.052_336_324_362_12e-17,
};
/// Ai'(0) = -3^{-1/3} / Gamma(1/3), split to ~32 digits.
const AIP0: Dd = Dd {
    hi: -0.258_819_403_792_806_8,
    lo: 2.522_243_111_610_832e-17,
};

const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Table of the first negative-axis zeros of Ai, with the achieved residual
/// tolerance of the refinement.
#[derive(Debug, Clone)]
pub struct AiryZeroTable {
    /// alpha_n > 0 with Ai(-alpha_n) = 0, strictly increasing.
    pub zeros: Vec<f64>,
    /// max_n |Ai(-alpha_n)| / |Ai'(-alpha_n)| over the table.
    pub achieved_tolerance: f64,
}

fn check_argument(x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(CoreError::domain(format!("airy argument must be finite, got {x}")));
    }
    if x.abs() > SUPPORT_LIMIT {
        return Err(CoreError::UnsupportedRange {
            what: "airy argument",
            value: x,
            limit: SUPPORT_LIMIT,
        });
    }
    Ok(())
}

/// Airy function of the first kind.
pub fn airy_ai(x: f64) -> Result<f64> {
    check_argument(x)?;
    if x.abs() <= SERIES_LIMIT {
        Ok(maclaurin(x).0)
    } else if x > 0.0 {
        Ok(asymptotic_positive(x).0)
    } else {
        Ok(asymptotic_negative(-x).0)
    }
}

/// Derivative Ai'(x).
pub fn airy_ai_prime(x: f64) -> Result<f64> {
    check_argument(x)?;
    if x.abs() <= SERIES_LIMIT {
        Ok(maclaurin(x).1)
    } else if x > 0.0 {
        Ok(asymptotic_positive(x).1)
    } else {
        Ok(asymptotic_negative(-x).1)
    }
}

/// Both Ai(x) and Ai'(x) in one call (shared work).
pub fn airy_ai_both(x: f64) -> Result<(f64, f64)> {
    check_argument(x)?;
    if x.abs() <= SERIES_LIMIT {
        Ok(maclaurin(x))
    } else if x > 0.0 {
        Ok(asymptotic_positive(x))
    } else {
        Ok(asymptotic_negative(-x))
    }
}

/// Maclaurin evaluation of (Ai, Ai') via the even/odd fundamental series
/// f, g of y'' = xy:
///   f = sum a_k x^{3k},      a_k = a_{k-1} / ((3k)(3k-1))
///   g = sum b_k x^{3k+1},    b_k = b_{k-1} / ((3k+1)(3k))
///   f' = sum a_k 3k x^{3k-1},  ratio x^3 / ((3k-1)(3k-3))
///   g' = sum b_k (3k+1) x^{3k},ratio x^3 / ((3k)(3k-2))
/// Ai = Ai(0) f + Ai'(0) g.
fn maclaurin(x: f64) -> (f64, f64) {
    let x3 = dd_prod(x, x).mul_f64(x);

    let mut f_term = Dd::ONE;
    let mut f_sum = Dd::ONE;
    let mut g_term = Dd::from_f64(x);
    let mut g_sum = g_term;
    // f' starts at k = 1 with x^2/2; g' starts at k = 0 with 1
    let mut fp_term = dd_prod(x, x).div_f64(2.0);
    let mut fp_sum = fp_term;
    let mut gp_term = Dd::ONE;
    let mut gp_sum = Dd::ONE;

    let mut k = 1.0f64;
    loop {
        f_term = f_term.mul(x3).div_f64((3.0 * k) * (3.0 * k - 1.0));
        f_sum = f_sum.add(f_term);
        g_term = g_term.mul(x3).div_f64((3.0 * k + 1.0) * (3.0 * k));
        g_sum = g_sum.add(g_term);
        if k > 1.0 {
            fp_term = fp_term.mul(x3).div_f64((3.0 * k - 1.0) * (3.0 * k - 3.0));
            fp_sum = fp_sum.add(fp_term);
        }
        gp_term = gp_term.mul(x3).div_f64((3.0 * k) * (3.0 * k - 2.0));
        gp_sum = gp_sum.add(gp_term);

        let scale = f_sum.abs_hi().max(g_sum.abs_hi()).max(1.0);
        if f_term.abs_hi().max(g_term.abs_hi()) < 1e-40 * scale || k > 200.0 {
            break;
        }
        k += 1.0;
    }

    let ai = AI0.mul(f_sum).add(AIP0.mul(g_sum));
    let aip = AI0.mul(fp_sum).add(AIP0.mul(gp_sum));
    (ai.to_f64(), aip.to_f64())
}

/// u_k, v_k coefficient pair of the large-argument expansions,
/// u_0 = v_0 = 1, u_k = u_{k-1} (6k-5)(6k-3)(6k-1) / (216 k (2k-1)),
/// v_k = u_k (6k+1)/(1-6k).
struct UvIter {
    k: f64,
    u: f64,
}

impl UvIter {
    fn new() -> Self {
        UvIter { k: 0.0, u: 1.0 }
    }
    fn next_pair(&mut self) -> (f64, f64) {
        self.k += 1.0;
        let k = self.k;
        self.u *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) / (216.0 * k * (2.0 * k - 1.0));
        let v = self.u * (6.0 * k + 1.0) / (1.0 - 6.0 * k);
        (self.u, v)
    }
}

/// Decaying expansion for x > SERIES_LIMIT:
///   Ai  =  e^{-zeta} / (2 sqrt(pi) x^{1/4}) * sum (-1)^k u_k zeta^{-k}
///   Ai' = -x^{1/4} e^{-zeta} / (2 sqrt(pi)) * sum (-1)^k v_k zeta^{-k}
fn asymptotic_positive(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let mut su = 1.0;
    let mut sv = 1.0;
    let mut sign = 1.0;
    let mut zk = 1.0;
    let mut uv = UvIter::new();
    let mut prev = f64::INFINITY;
    for _ in 1..=60 {
        let (u, v) = uv.next_pair();
        sign = -sign;
        zk *= zeta;
        let tu = u / zk;
        if tu.abs() >= prev {
            break; // smallest-term truncation
        }
        su += sign * tu;
        sv += sign * v / zk;
        prev = tu.abs();
        if tu.abs() < 1e-18 {
            break;
        }
    }
    let pre = (-zeta).exp() / (2.0 * SQRT_PI * x.powf(0.25));
    (pre * su, -x.powf(0.25) * (-zeta).exp() / (2.0 * SQRT_PI) * sv)
}

/// Oscillatory expansion for x < -SERIES_LIMIT, evaluated at y = -x > 0:
///   Ai(-y)  = (cos(chi) P + sin(chi) Q) / (sqrt(pi) y^{1/4})
///   Ai'(-y) = (sin(chi) R - cos(chi) S) * y^{1/4} / sqrt(pi)
/// with chi = zeta - pi/4 and
///   P = sum (-1)^k u_{2k} zeta^{-2k},   Q = sum (-1)^k u_{2k+1} zeta^{-2k-1},
///   R = sum (-1)^k v_{2k} zeta^{-2k},   S = sum (-1)^k v_{2k+1} zeta^{-2k-1}.
fn asymptotic_negative(y: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * y.powf(1.5);
    let mut p = 1.0;
    let mut q = 0.0;
    let mut r = 1.0;
    let mut s = 0.0;
    let mut uv = UvIter::new();
    let mut sign = 1.0; // sign of the pair (u_{2k}, u_{2k+1}) block: (-1)^k
    let mut zk = 1.0; // zeta^{2k}
    let mut prev = f64::INFINITY;
    for _ in 0..30 {
        // odd member u_{2k+1} with current sign
        let (u_odd, v_odd) = uv.next_pair();
        let t_odd = u_odd / (zk * zeta);
        if t_odd.abs() >= prev {
            break;
        }
        q += sign * t_odd;
        s += sign * v_odd / (zk * zeta);
        prev = t_odd.abs();

        // even member u_{2k+2} belongs to the next block with flipped sign
        let (u_even, v_even) = uv.next_pair();
        sign = -sign;
        zk *= zeta * zeta;
        let t_even = u_even / zk;
        if t_even.abs() >= prev {
            break;
        }
        p += sign * t_even;
        r += sign * v_even / zk;
        prev = t_even.abs();
        if t_even.abs() < 1e-18 {
            break;
        }
    }
    let chi = zeta - std::f64::consts::FRAC_PI_4;
    let (sin_chi, cos_chi) = chi.sin_cos();
    let y4 = y.powf(0.25);
    let ai = (cos_chi * p + sin_chi * q) / (SQRT_PI * y4);
    let aip = (sin_chi * r - cos_chi * s) * y4 / SQRT_PI;
    (ai, aip)
}

/// Asymptotic seed for the n-th zero (1-based): (3 pi (4n-1)/8)^{2/3}.
pub fn zero_seed(n: usize) -> f64 {
    let t = 3.0 * std::f64::consts::PI * (4.0 * n as f64 - 1.0) / 8.0;
    t.powf(2.0 / 3.0)
}

/// First `count` zeros of Ai on the negative axis, refined to `tol`.
///
/// Each zero is seeded from [`zero_seed`], bracketed, and polished by Newton
/// iteration with bisection fallback whenever a step leaves the bracket.
pub fn airy_zeros(count: usize, tol: f64) -> Result<AiryZeroTable> {
    if count == 0 {
        return Err(CoreError::domain("zero count must be >= 1"));
    }
    if !(1e-14..=1e-6).contains(&tol) {
        return Err(CoreError::domain(format!(
            "zero tolerance must lie in [1e-14, 1e-6], got {tol:e}"
        )));
    }
    // keep alpha_count comfortably inside the evaluation window
    if count > 500 {
        return Err(CoreError::UnsupportedRange {
            what: "zero count",
            value: count as f64,
            limit: 500.0,
        });
    }

    let mut zeros = Vec::with_capacity(count);
    let mut achieved: f64 = 0.0;
    for n in 1..=count {
        let seed = zero_seed(n);
        let gap = zero_seed(n + 1) - seed;
        let half = (0.4 * gap).min(0.35);
        let (alpha, residual) = refine_zero(n, seed, half, tol)?;
        achieved = achieved.max(residual);
        zeros.push(alpha);
    }
    Ok(AiryZeroTable {
        zeros,
        achieved_tolerance: achieved.max(f64::EPSILON),
    })
}

/// Newton-with-bracket refinement of one zero. Returns (alpha, |Ai/Ai'|).
fn refine_zero(n: usize, seed: f64, half_width: f64, tol: f64) -> Result<(f64, f64)> {
    let f = |alpha: f64| -> (f64, f64) {
        // F(alpha) = Ai(-alpha), F'(alpha) = -Ai'(-alpha); arguments stay
        // well inside the support window for n <= 500.
        let (ai, aip) = airy_ai_both(-alpha).expect("zero bracket within support window");
        (ai, -aip)
    };

    let mut lo = seed - half_width;
    let mut hi = seed + half_width;
    let (mut flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return Ok((lo, 0.0));
    }
    if flo * fhi > 0.0 {
        // seed quality makes this unreachable for n >= 1, but widen once
        lo = seed - 2.0 * half_width;
        hi = seed + 2.0 * half_width;
        let (flo2, _) = f(lo);
        let (fhi2, _) = f(hi);
        if flo2 * fhi2 > 0.0 {
            return Err(CoreError::ZeroRefinementFailed { index: n, iterations: 0 });
        }
        flo = flo2;
    }

    let mut x = seed;
    let max_iter = 50;
    for it in 0..max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok((x, 0.0));
        }
        // shrink bracket with the sign information
        if fx * flo < 0.0 {
            hi = x;
        } else {
            lo = x;
            flo = fx;
        }
        let step = fx / dfx;
        let mut next = x - step;
        if !(lo..=hi).contains(&next) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        let moved = (next - x).abs();
        x = next;
        if moved < 0.01 * tol || moved < 4.0 * f64::EPSILON * x {
            let (fx, dfx) = f(x);
            let residual = (fx / dfx).abs();
            if residual <= tol {
                return Ok((x, residual));
            }
        }
        if it == max_iter - 1 {
            return Err(CoreError::ZeroRefinementFailed { index: n, iterations: max_iter });
        }
    }
    unreachable!()
}
