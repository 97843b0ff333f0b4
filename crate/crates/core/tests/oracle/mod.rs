//! Independent reference implementations used by the integration and
//! acceptance suites. Everything here is written against the defining
//! formulas, separately from the library code paths it checks.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

// ---------------------------------------------------------------------------
// compensated two-word arithmetic (Dekker split products, no fused multiply)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct Tw {
    pub hi: f64,
    pub lo: f64,
}

impl Tw {
    pub fn from(x: f64) -> Tw {
        Tw { hi: x, lo: 0.0 }
    }
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }
}

fn renorm(hi: f64, lo: f64) -> Tw {
    let s = hi + lo;
    let e = lo - (s - hi);
    Tw { hi: s, lo: e }
}

pub fn tw_add(a: Tw, b: Tw) -> Tw {
    let s = a.hi + b.hi;
    let bb = s - a.hi;
    let err = (a.hi - (s - bb)) + (b.hi - bb);
    renorm(s, err + a.lo + b.lo)
}

fn split(a: f64) -> (f64, f64) {
    let c = 134_217_729.0 * a; // 2^27 + 1
    let h = c - (c - a);
    (h, a - h)
}

pub fn tw_mul_f(a: Tw, b: f64) -> Tw {
    let p = a.hi * b;
    let (ah, al) = split(a.hi);
    let (bh, bl) = split(b);
    let e = ((ah * bh - p) + ah * bl + al * bh) + al * bl;
    renorm(p, e + a.lo * b)
}

pub fn tw_mul(a: Tw, b: Tw) -> Tw {
    let p = tw_mul_f(a, b.hi);
    renorm(p.hi, p.lo + a.hi * b.lo)
}

pub fn tw_div_f(a: Tw, d: f64) -> Tw {
    let q1 = a.hi / d;
    let p = tw_mul_f(Tw::from(q1), d);
    let r = ((a.hi - p.hi) - p.lo) + a.lo;
    renorm(q1, r / d)
}

// Ai(0) and Ai'(0) to double-double precision:
// Ai(0) = 3^{-2/3}/Gamma(2/3), Ai'(0) = -3^{-1/3}/Gamma(1/3)
const AI0: Tw = Tw { hi: 0.355_028_053_887_817_2, lo: 2.052_336_324_362_12e-17 };
const AIP0: Tw = Tw { hi: -0.258_819_403_792_806_8, lo: 2.522_243_111_610_832e-17 };
const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Maclaurin-series reference for (Ai, Ai'), usable to ~|x| <= 10 where the
/// two-word precision still covers the e^{zeta}-scale cancellation.
pub fn series_ai_both(x: f64) -> (f64, f64) {
    let x_tw = Tw::from(x);
    let x2 = tw_mul(x_tw, x_tw);
    let x3 = tw_mul(x2, x_tw);

    // f  = sum a_k x^{3k},   a_0 = 1,       a_k = a_{k-1}/((3k)(3k-1))
    // g  = sum b_k x^{3k+1}, b_0 = 1,       b_k = b_{k-1}/((3k+1)(3k))
    // f' = sum a_k (3k) x^{3k-1}, leading term x^2/2
    // g' = sum b_k (3k+1) x^{3k}, leading term 1
    let mut af = Tw::from(1.0);
    let mut f = af;
    let mut bg = x_tw;
    let mut g = bg;
    let mut fp = tw_div_f(x2, 2.0);
    let mut fp_sum = fp;
    let mut gp = Tw::from(1.0);
    let mut gp_sum = gp;

    for k in 1..=250 {
        let kf = k as f64;
        af = tw_div_f(tw_mul(af, x3), (3.0 * kf) * (3.0 * kf - 1.0));
        f = tw_add(f, af);
        bg = tw_div_f(tw_mul(bg, x3), (3.0 * kf + 1.0) * (3.0 * kf));
        g = tw_add(g, bg);
        if k > 1 {
            fp = tw_div_f(tw_mul(fp, x3), (3.0 * kf - 1.0) * (3.0 * kf - 3.0));
            fp_sum = tw_add(fp_sum, fp);
        }
        gp = tw_div_f(tw_mul(gp, x3), (3.0 * kf) * (3.0 * kf - 2.0));
        gp_sum = tw_add(gp_sum, gp);
        let scale = f.hi.abs().max(g.hi.abs()).max(1.0);
        if af.hi.abs().max(bg.hi.abs()) < 1e-42 * scale {
            break;
        }
    }

    let ai = tw_add(tw_mul(AI0, f), tw_mul(AIP0, g)).value();
    let aip = tw_add(tw_mul(AI0, fp_sum), tw_mul(AIP0, gp_sum)).value();
    (ai, aip)
}

/// u_k and v_k = u_k (6k+1)/(1-6k) of the large-argument expansions.
fn uv(k: usize, u_prev: f64) -> (f64, f64) {
    let kf = k as f64;
    let u = u_prev * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
        / (216.0 * kf * (2.0 * kf - 1.0));
    (u, u * (6.0 * kf + 1.0) / (1.0 - 6.0 * kf))
}

/// Positive-side asymptotic reference, truncated at the smallest term.
/// Returns (Ai, Ai', achieved-floor-estimate-relative).
pub fn asymptotic_ai_positive(x: f64) -> (f64, f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let mut su = 1.0;
    let mut sv = 1.0;
    let mut u = 1.0;
    let mut zk = 1.0;
    let mut sign = 1.0;
    let mut smallest = f64::INFINITY;
    for k in 1..=50 {
        let (unew, v) = uv(k, u);
        u = unew;
        zk *= zeta;
        sign = -sign;
        let term = u / zk;
        if term.abs() >= smallest {
            break;
        }
        smallest = term.abs();
        su += sign * term;
        sv += sign * v / zk;
    }
    let pre = (-zeta).exp() / (2.0 * SQRT_PI * x.powf(0.25));
    let ai = pre * su;
    let aip = -x.powf(0.25) * (-zeta).exp() / (2.0 * SQRT_PI) * sv;
    (ai, aip, smallest)
}

/// Negative-side asymptotic reference at y = -x > 0, truncated at the
/// smallest term. Returns (Ai, Ai', floor-estimate relative to the envelope).
pub fn asymptotic_ai_negative(y: f64) -> (f64, f64, f64) {
    let zeta = 2.0 / 3.0 * y.powf(1.5);
    let chi = zeta - std::f64::consts::FRAC_PI_4;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut r = 1.0;
    let mut s_sum = 0.0;
    let mut u = 1.0;
    let mut zeta_pow = 1.0; // zeta^{2k}
    let mut sign = 1.0;
    let mut smallest = f64::INFINITY;
    for k in 0..25 {
        let (u_odd, v_odd) = uv(2 * k + 1, u);
        let t_odd = u_odd / (zeta_pow * zeta);
        if t_odd.abs() >= smallest {
            break;
        }
        smallest = t_odd.abs();
        q += sign * t_odd;
        s_sum += sign * v_odd / (zeta_pow * zeta);

        let (u_even, v_even) = uv(2 * k + 2, u_odd);
        u = u_even;
        zeta_pow *= zeta * zeta;
        sign = -sign;
        let t_even = u_even / zeta_pow;
        if t_even.abs() >= smallest {
            break;
        }
        smallest = t_even.abs();
        p += sign * t_even;
        r += sign * v_even / zeta_pow;
    }
    let (sin_chi, cos_chi) = chi.sin_cos();
    let y4 = y.powf(0.25);
    let ai = (cos_chi * p + sin_chi * q) / (SQRT_PI * y4);
    let aip = (sin_chi * r - cos_chi * s_sum) * y4 / SQRT_PI;
    (ai, aip, smallest)
}

/// Cross-oracle: series branch for |x| <= 8.5, asymptotic beyond.
pub fn oracle_ai(x: f64) -> f64 {
    if x.abs() <= 8.5 {
        series_ai_both(x).0
    } else if x > 0.0 {
        asymptotic_ai_positive(x).0
    } else {
        asymptotic_ai_negative(-x).0
    }
}

pub fn oracle_ai_prime(x: f64) -> f64 {
    if x.abs() <= 8.5 {
        series_ai_both(x).1
    } else if x > 0.0 {
        asymptotic_ai_positive(x).1
    } else {
        asymptotic_ai_negative(-x).1
    }
}

/// Oscillation envelope of Ai on the negative axis.
pub fn envelope(x: f64) -> f64 {
    if x < 0.0 {
        1.0 / (SQRT_PI * (-x).powf(0.25))
    } else {
        oracle_ai(x).abs().max(f64::MIN_POSITIVE)
    }
}

/// n-th zero of Ai by pure bisection on the oracle evaluation.
pub fn bisect_zero(n: usize) -> f64 {
    let seed = |m: usize| -> f64 {
        (3.0 * std::f64::consts::PI * (4.0 * m as f64 - 1.0) / 8.0).powf(2.0 / 3.0)
    };
    let gap = seed(n + 1) - seed(n);
    let mut lo = seed(n) - 0.45 * gap.min(1.0);
    let mut hi = seed(n) + 0.45 * gap.min(1.0);
    let f = |a: f64| oracle_ai(-a);
    let mut flo = f(lo);
    assert!(
        flo * f(hi) < 0.0,
        "bisection bracket failed for zero {n}: [{lo}, {hi}]"
    );
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if flo * fm < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Composite Simpson rule (independent coarse quadrature reference).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = 2 * panels;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let x = a + h * i as f64;
        s += f(x) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// Classical bouncing ball dropped from rest at z0: RK4 on (z, v) with an
/// elastic floor, returning the time between the first two floor contacts
/// (one full period). The crossing times are refined by bisecting the step.
pub fn classical_bounce_period(z0: f64, g: f64) -> f64 {
    #[derive(Clone, Copy)]
    struct S {
        z: f64,
        v: f64,
    }
    let deriv = |s: S| S { z: s.v, v: -g };
    let rk4 = |s: S, h: f64| -> S {
        let k1 = deriv(s);
        let k2 = deriv(S { z: s.z + 0.5 * h * k1.z, v: s.v + 0.5 * h * k1.v });
        let k3 = deriv(S { z: s.z + 0.5 * h * k2.z, v: s.v + 0.5 * h * k2.v });
        let k4 = deriv(S { z: s.z + h * k3.z, v: s.v + h * k3.v });
        S {
            z: s.z + h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z),
            v: s.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
        }
    };
    let t_scale = (2.0 * z0 / g).sqrt();
    let h = t_scale / 4096.0;
    let mut s = S { z: z0, v: 0.0 };
    let mut t = 0.0;
    let mut hits = Vec::new();
    while hits.len() < 2 && t < 10.0 * t_scale {
        let next = rk4(s, h);
        if next.z <= 0.0 && s.z > 0.0 {
            // bisect the partial step to locate the contact
            let (mut lo, mut hi) = (0.0, h);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if rk4(s, mid).z > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let tc = 0.5 * (lo + hi);
            hits.push(t + tc);
            let at_floor = rk4(s, tc);
            s = S { z: 0.0, v: -at_floor.v }; // elastic reflection
            t += tc;
        } else {
            s = next;
            t += h;
        }
    }
    assert_eq!(hits.len(), 2, "ball never completed a period");
    hits[1] - hits[0]
}

/// Reduced density matrix of the composite system by direct summation over
/// internal branches: each level E_i evolves the amplitudes with the full
/// mass-shifted spectrum E_n(M_i) = M_i g alpha_n / k_i,
/// k_i = (2 M_i^2 g / hbar^2)^{1/3}, computed from first principles.
pub struct BruteForce {
    pub alphas: Vec<f64>,
    pub mass: f64,
    pub gravity: f64,
    pub hbar: f64,
    pub c: f64,
}

impl BruteForce {
    pub fn reduced_density(
        &self,
        coeffs: &[Complex64],
        levels: &[f64],
        weights: &[f64],
        t: f64,
    ) -> DMatrix<Complex64> {
        let n = coeffs.len();
        let mut rho = DMatrix::zeros(n, n);
        for (&ei, &w) in levels.iter().zip(weights) {
            let mass_i = self.mass + ei / (self.c * self.c);
            let k_i = (2.0 * mass_i * mass_i * self.gravity / (self.hbar * self.hbar)).cbrt();
            let phi: Vec<Complex64> = self
                .alphas
                .iter()
                .zip(coeffs)
                .map(|(&a, &cn)| {
                    let energy = mass_i * self.gravity * a / k_i;
                    cn * Complex64::from_polar(1.0, -energy * t / self.hbar)
                })
                .collect();
            for a in 0..n {
                for b in 0..n {
                    rho[(a, b)] += Complex64::new(w, 0.0) * phi[a] * phi[b].conj();
                }
            }
        }
        rho
    }
}
