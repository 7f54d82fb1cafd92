//! Jacobi spherical functions φ_λ(t).
//!
//! Three evaluation paths:
//! - the hypergeometric series in -sinh²t near the origin,
//! - the Harish-Chandra expansion c(λ)Φ_λ + c(-λ)Φ_{-λ} with Φ_λ expanded
//!   in powers of e^{-2t}, for oscillatory λ away from the origin,
//! - the Abel integral φ_λ(t) = ∫₀ᵗ K(s,t) cos(λs) ds, evaluated in the log
//!   domain, for everything else (imaginary λ, very large λ at small t).

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::geometry::{ln_cosh, ln_sinh, SpaceParams};
use crate::quadrature::gl16;
use crate::special::cfunc::c_function;
use crate::special::gamma::log_gamma_unchecked;
use crate::special::hyper::{gauss_2f1, series_real};

const HC_MAX_TERMS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalFunctionQuery {
    pub sp: SpaceParams,
    pub lambda: C64,
    pub t: f64,
}

pub fn spherical_phi(q: &SphericalFunctionQuery) -> Result<C64> {
    phi(&q.sp, q.lambda, q.t)
}

/// φ_λ(t) = ₂F₁((ρ-iλ)/2, (ρ+iλ)/2; a+1; -sinh²t).
pub fn phi(sp: &SpaceParams, lambda: C64, t: f64) -> Result<C64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("spherical function needs finite t >= 0 (got {t})")));
    }
    if !lambda.re.is_finite() || !lambda.im.is_finite() {
        return Err(Error::Domain(format!("non-finite spectral parameter {lambda}")));
    }
    if t == 0.0 {
        return Ok(C64::new(1.0, 0.0));
    }
    // φ is even in λ: fix a representative so that ±λ give identical bits
    let lambda = if lambda.re < 0.0 || (lambda.re == 0.0 && lambda.im < 0.0) { -lambda } else { lambda };
    let real_valued = lambda.im == 0.0 || lambda.re == 0.0;
    let v = match choose_path(lambda, t) {
        Path::Series => series_phi(sp, lambda, t)?,
        Path::HarishChandra => {
            let c = c_function(sp, lambda)?;
            hc_phi_with_c(sp, lambda, c, t)?
        }
        Path::Abel => abel_phi(sp, lambda, t),
    };
    Ok(if real_valued { C64::new(v.re, 0.0) } else { v })
}

/// φ_λ(t) for real λ with c(λ) supplied by the caller (it depends on λ only,
/// so transforms compute it once per spectral node).
pub(crate) fn phi_real_with_c(sp: &SpaceParams, lambda: f64, c: Option<C64>, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(1.0);
    }
    let l = C64::new(lambda.abs(), 0.0);
    match (choose_path(l, t), c) {
        (Path::HarishChandra, Some(c)) => Ok(hc_phi_with_c(sp, l, c, t)?.re),
        _ => Ok(phi(sp, l, t)?.re),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Path {
    Series,
    HarishChandra,
    Abel,
}

fn choose_path(lambda: C64, t: f64) -> Path {
    let s = t.sinh();
    if s * s <= 3.0 && lambda.norm() * s <= 10.0 {
        return Path::Series;
    }
    let near = {
        let d_im = lambda.im - lambda.im.round();
        (lambda.re * lambda.re + d_im * d_im).sqrt()
    };
    if t >= 0.1 && lambda.im.abs() <= lambda.re.abs() && near * t >= 0.01 {
        Path::HarishChandra
    } else {
        Path::Abel
    }
}

fn series_phi(sp: &SpaceParams, lambda: C64, t: f64) -> Result<C64> {
    let i = C64::new(0.0, 1.0);
    let a = (sp.rho - i * lambda) * 0.5;
    let b = (sp.rho + i * lambda) * 0.5;
    let s = t.sinh();
    gauss_2f1(a, b, C64::new(sp.jacobi_a + 1.0, 0.0), -s * s)
}

/// Harish-Chandra series Φ_λ(t) = e^{(iλ-ρ)t} Σ Γ_k e^{-2kt}, Γ₀ = 1.
///
/// The coefficients follow from the radial Laplacian written in the
/// variable e^{-2t}: with μ_l = iλ - ρ - 2l,
/// 4k(k - iλ) Γ_k = -2(m₁+m₂) Σ_{l<k} μ_l Γ_l - 2m₂ Σ_{l<k} (-1)^{k+l} μ_l Γ_l.
pub fn harish_chandra_phi(sp: &SpaceParams, lambda: C64, t: f64) -> Result<C64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("the Harish-Chandra series needs t > 0 (got {t})")));
    }
    let il = C64::new(-lambda.im, lambda.re);
    Ok((il - sp.rho) .scale(t).exp() * hc_sum(sp, lambda, t)?)
}

fn hc_sum(sp: &SpaceParams, lambda: C64, t: f64) -> Result<C64> {
    let il = C64::new(-lambda.im, lambda.re);
    let c1 = 2.0 * (sp.m1 + sp.m2) as f64;
    let c2 = 2.0 * sp.m2 as f64;
    let q = (-2.0 * t).exp();
    let mut gamma_k = C64::new(1.0, 0.0);
    let mut a_sum = C64::new(0.0, 0.0);
    let mut b_sum = C64::new(0.0, 0.0);
    let mut sum = C64::new(1.0, 0.0);
    let mut qk = 1.0;
    let mut small = 0;
    for k in 1..HC_MAX_TERMS {
        let l = (k - 1) as f64;
        let mu = il - sp.rho - 2.0 * l;
        let sign_l = if (k - 1) % 2 == 0 { 1.0 } else { -1.0 };
        a_sum += mu * gamma_k;
        b_sum += mu * gamma_k * sign_l;
        let sign_k = -sign_l;
        let kf = k as f64;
        let den = (C64::new(kf, 0.0) - il) * (4.0 * kf);
        gamma_k = -(a_sum * c1 + b_sum * (c2 * sign_k)) / den;
        qk *= q;
        let term = gamma_k * qk;
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            small += 1;
            if small >= 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
        if qk == 0.0 {
            return Ok(sum);
        }
    }
    Err(Error::NonConvergence { what: "Harish-Chandra series", iterations: HC_MAX_TERMS })
}

fn hc_phi_with_c(sp: &SpaceParams, lambda: C64, c: C64, t: f64) -> Result<C64> {
    let il = C64::new(-lambda.im, lambda.re);
    let plus = c * (il - sp.rho).scale(t).exp() * hc_sum(sp, lambda, t)?;
    if lambda.im == 0.0 {
        // c(-λ)Φ_{-λ} is the conjugate for real λ
        return Ok(C64::new(2.0 * plus.re, 0.0));
    }
    let cm = c_function(sp, -lambda)?;
    let minus = cm * (-il - sp.rho).scale(t).exp() * hc_sum(sp, -lambda, t)?;
    Ok(plus + minus)
}

/// Terms exp(e_j) · z_j with |z_j| ≤ 1, combined without overflow.
struct LogSum {
    terms: Vec<(f64, C64)>,
}

impl LogSum {
    fn max_exp(&self) -> f64 {
        self.terms.iter().map(|x| x.0).fold(f64::NEG_INFINITY, f64::max)
    }

    fn value(&self) -> C64 {
        let m = self.max_exp();
        if !m.is_finite() {
            return C64::new(0.0, 0.0);
        }
        let s: C64 = self.terms.iter().map(|(e, z)| z * (e - m).exp()).sum();
        s * m.exp()
    }

    /// log of a sum known to be positive.
    fn ln_real(&self) -> f64 {
        let m = self.max_exp();
        let s: f64 = self.terms.iter().map(|(e, z)| z.re * (e - m).exp()).sum();
        m + s.ln()
    }
}

struct AbelKernel {
    a: f64,
    b: f64,
    ln_pref: f64,
}

impl AbelKernel {
    fn new(sp: &SpaceParams, t: f64) -> Self {
        let a = sp.jacobi_a;
        let b = sp.jacobi_b;
        let ln_c = (a + 1.5) * LN_2 + log_gamma_unchecked(C64::new(a + 1.0, 0.0)).re
            - 0.5 * PI.ln()
            - log_gamma_unchecked(C64::new(a + 0.5, 0.0)).re;
        let ln_pref = ln_c - 2.0 * a * ln_sinh(2.0 * t) + (a - b) * ln_cosh(t);
        AbelKernel { a, b, ln_pref }
    }

    /// log F(a+b, a-b; a+1/2; (cosh t - cosh s)/(2 cosh t)).
    fn ln_f(&self, t: f64, s: f64) -> f64 {
        let d = t - s;
        if d <= 0.0 {
            return 0.0;
        }
        let z = (ln_sinh(0.5 * (t + s)) + ln_sinh(0.5 * d) - ln_cosh(t)).exp();
        series_real(self.a + self.b, self.a - self.b, self.a + 0.5, z).ln()
    }
}

fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x * x / 6.0
    } else {
        x.sinh() / x
    }
}

/// Abel-integral terms for ∫₀ᵗ K(s,t) cos(λs) ds.
fn abel_terms(sp: &SpaceParams, lambda: C64, t: f64) -> LogSum {
    let ker = AbelKernel::new(sp, t);
    let a = ker.a;
    let eta = lambda.im.abs();
    let i = C64::new(0.0, 1.0);
    // cos(λs) e^{-η s}, bounded by 1 in modulus
    let cos_b = |s: f64| ((i * lambda * s).exp() + (-i * lambda * s).exp()) * (0.5 * (-eta * s).exp());
    let h_s = {
        let osc = lambda.re.abs();
        let mut h = 0.5f64;
        if osc > 0.0 {
            h = h.min(4.0 / osc);
        }
        h.min(0.5 * t)
    };
    let half = 0.5 * t;
    let n = ((half / h_s).ceil() as usize).max(1);
    let rule = gl16();
    let mut terms = Vec::with_capacity(2 * n * rule.nodes.len());

    // s ∈ [0, t/2]
    for p in 0..n {
        let lo = half * p as f64 / n as f64;
        let hi = half * (p + 1) as f64 / n as f64;
        for (s, w) in rule.mapped(lo, hi) {
            let lk = ker.ln_pref
                + (a - 0.5) * (LN_2 + ln_sinh(t + s) + ln_sinh(t - s))
                + ker.ln_f(t, s);
            terms.push((lk + w.ln() + eta * s, cos_b(s)));
        }
    }
    // s = t - u², u ∈ [0, √(t/2)], panels of equal length in s
    for p in 0..n {
        let lo = (half * p as f64 / n as f64).sqrt();
        let hi = (half * (p + 1) as f64 / n as f64).sqrt();
        for (u, w) in rule.mapped(lo, hi) {
            let u2 = u * u;
            let s = t - u2;
            let lk = ker.ln_pref
                + (a - 0.5) * (LN_2 + ln_sinh(t + s) + sinhc(u2).ln())
                + 2.0 * a * u.ln()
                + LN_2
                + ker.ln_f(t, s);
            terms.push((lk + w.ln() + eta * s, cos_b(s)));
        }
    }
    LogSum { terms }
}

fn abel_phi(sp: &SpaceParams, lambda: C64, t: f64) -> C64 {
    abel_terms(sp, lambda, t).value()
}

/// ln φ_{iη}(t) = ln φ_{-iη}(t) for real η. φ_{iη} is positive, and for
/// large ρt neither it nor the density J are representable on their own.
pub fn log_phi_imag(sp: &SpaceParams, eta: f64, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() || !eta.is_finite() {
        return Err(Error::Domain(format!("log_phi_imag needs finite eta and t >= 0 (got {eta}, {t})")));
    }
    if t == 0.0 {
        return Ok(0.0);
    }
    let lambda = C64::new(0.0, eta.abs());
    if choose_path(lambda, t) == Path::Series {
        return Ok(series_phi(sp, lambda, t)?.re.ln());
    }
    Ok(abel_terms(sp, lambda, t).ln_real())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_space, Family};
    use proptest::prelude::*;

    fn h3(l: f64, t: f64) -> f64 {
        (l * t).sin() / (l * t.sinh())
    }

    fn all_spaces() -> Vec<SpaceParams> {
        vec![
            SpaceParams::real(2).unwrap(),
            SpaceParams::real(3).unwrap(),
            SpaceParams::real(5).unwrap(),
            SpaceParams::complex(2).unwrap(),
            SpaceParams::complex(3).unwrap(),
            make_space(Family::QuatHyp, Some(2)).unwrap(),
            make_space(Family::OctPlane, None).unwrap(),
        ]
    }

    #[test]
    fn origin_and_examples() {
        let sp = SpaceParams::real(3).unwrap();
        let q = SphericalFunctionQuery { sp, lambda: C64::new(1.0, 0.0), t: 0.0 };
        assert_eq!(spherical_phi(&q).unwrap(), C64::new(1.0, 0.0));
        let v = phi(&sp, C64::new(1.0, 0.0), 1.0).unwrap();
        assert!((v.re - 1f64.sin() / 1f64.sinh()).abs() < 1e-14 && v.im == 0.0);
        let v = phi(&sp, C64::new(0.0, -0.5), 2.0).unwrap();
        assert!((v.re - 1f64.sinh() / (0.5 * 2f64.sinh())).abs() < 1e-13);
        assert!((v.re - 0.648_054).abs() < 1e-6);
    }

    #[test]
    fn three_space_closed_form_grid() {
        let sp = SpaceParams::real(3).unwrap();
        let mut worst = 0.0f64;
        for il in 1..=200 {
            let l = 0.1 * il as f64;
            for it in 0..=98 {
                let t = 0.1 + 0.05 * it as f64;
                let v = phi(&sp, C64::new(l, 0.0), t).unwrap().re;
                worst = worst.max((v - h3(l, t)).abs());
            }
        }
        assert!(worst < 1e-8, "max deviation {worst}");
    }

    #[test]
    fn each_path_on_three_space() {
        let sp = SpaceParams::real(3).unwrap();
        for &(l, t) in &[(0.3, 0.5), (7.0, 2.0), (250.0, 0.05), (40.0, 12.0), (0.001, 20.0)] {
            let lam = C64::new(l, 0.0);
            let want = h3(l, t);
            let s = series_phi(&sp, lam, t);
            if let Ok(s) = s {
                if t.sinh() * l < 30.0 {
                    assert!((s.re - want).abs() < 1e-10, "series {l} {t}");
                }
            }
            let a = abel_phi(&sp, lam, t);
            assert!((a.re - want).abs() < 1e-12, "abel {l} {t}: {} vs {want}", a.re);
            if t >= 0.1 {
                let c = c_function(&sp, lam).unwrap();
                let h = hc_phi_with_c(&sp, lam, c, t).unwrap();
                assert!((h.re - want).abs() < 1e-12, "hc {l} {t}: {} vs {want}", h.re);
            }
        }
    }

    #[test]
    fn hyperbolic_plane_abel_matches_series() {
        let sp = SpaceParams::real(2).unwrap();
        for &(l, t) in &[(0.5, 0.7), (2.0, 1.2), (6.0, 0.3)] {
            let lam = C64::new(l, 0.0);
            let s = series_phi(&sp, lam, t).unwrap();
            let a = abel_phi(&sp, lam, t);
            assert!((s - a).norm() < 1e-12, "{l} {t}: {s} {a}");
        }
    }

    #[test]
    fn paths_agree_on_overlap_all_families() {
        for sp in all_spaces() {
            for &(l, t) in &[(0.8, 1.4), (3.0, 1.1), (1.5, 2.0), (9.0, 1.0)] {
                let lam = C64::new(l, 0.0);
                let s = series_phi(&sp, lam, t).unwrap();
                let a = abel_phi(&sp, lam, t);
                let c = c_function(&sp, lam).unwrap();
                let h = hc_phi_with_c(&sp, lam, c, t).unwrap();
                assert!((s - a).norm() < 1e-11, "{} abel {l} {t}: {s} {a}", sp.label());
                assert!((s - h).norm() < 1e-10, "{} hc {l} {t}: {s} {h}", sp.label());
            }
            for &(eta, t) in &[(0.5, 0.8), (sp.rho, 1.0), (0.3 * sp.rho, 0.5)] {
                let lam = C64::new(0.0, eta);
                let s = series_phi(&sp, lam, t).unwrap().re;
                let a = abel_phi(&sp, lam, t).re;
                assert!((s - a).abs() < 1e-11 * s, "{} imag {eta} {t}: {s} {a}", sp.label());
            }
            let lam = C64::new(2.0, 0.7);
            let s = series_phi(&sp, lam, 0.9).unwrap();
            let a = abel_phi(&sp, lam, 0.9);
            let h = hc_phi_with_c(&sp, lam, c_function(&sp, lam).unwrap(), 0.9).unwrap();
            assert!((s - a).norm() < 1e-11 * (1.0 + s.norm()));
            assert!((s - h).norm() < 1e-10 * (1.0 + s.norm()));
        }
    }

    // reference values from mpmath.hyp2f1 at 40 digits
    #[test]
    fn frozen_values() {
        let cases = [
            (Family::QuatHyp, Some(2), (3.5, 0.0), 2.5, (-1.018_929_628_291_380_9e-5, 0.0)),
            (Family::OctPlane, None, (1.0, 0.5), 1.7, (1.712_120_765_802_063_6e-4, -1.900_261_077_292_049e-5)),
            (Family::ComplexHyp, Some(3), (20.0, 0.0), 4.0, (1.266_260_036_024_755_5e-7, 0.0)),
            (Family::RealHyp, Some(4), (0.2, 0.0), 8.0, (1.536_601_059_952_689_7e-4, 0.0)),
            (Family::RealHyp, Some(2), (0.0, 0.3), 6.0, (0.432_272_793_420_326_1, 0.0)),
            (Family::ComplexHyp, Some(2), (60.0, 0.0), 0.05, (0.225_756_981_124_475_06, 0.0)),
            (Family::OctPlane, None, (0.0, 5.0), 3.0, (9.603_471_267_608_291e-7, 0.0)),
        ];
        for (f, k, l, t, want) in cases {
            let sp = make_space(f, k).unwrap();
            let v = phi(&sp, C64::new(l.0, l.1), t).unwrap();
            let w = C64::new(want.0, want.1);
            assert!((v - w).norm() < 1e-10 * (1e-300 + w.norm()), "{} {l:?} {t}: {v} vs {w}", sp.label());
        }
    }

    #[test]
    fn trivial_index_is_one() {
        for sp in all_spaces() {
            for t in [0.5, 3.0, 17.0] {
                let v = phi(&sp, C64::new(0.0, sp.rho), t).unwrap().re;
                assert!((v - 1.0).abs() < 1e-10, "{} t={t}: {v}", sp.label());
                assert!(log_phi_imag(&sp, sp.rho, t).unwrap().abs() < 1e-10);
            }
        }
    }

    #[test]
    fn imaginary_index_positive_nonincreasing() {
        for sp in all_spaces() {
            for frac in [0.05, 0.3, 0.7, 1.0] {
                let eta = frac * sp.rho;
                let mut prev = 0.0;
                for it in 1..=120 {
                    let t = 0.25 * it as f64;
                    let lv = log_phi_imag(&sp, eta, t).unwrap();
                    assert!(lv.is_finite());
                    assert!(lv <= prev + 1e-12, "{} eta={eta} t={t}", sp.label());
                    prev = lv;
                }
            }
        }
    }

    #[test]
    fn large_radius_asymptotics() {
        // φ_{iη}(t) ~ c(-iη) e^{(η-ρ)t} for 0 < η < ρ
        let sp = SpaceParams::complex(2).unwrap();
        let eta = 0.5;
        let c = c_function(&sp, C64::new(0.0, -eta)).unwrap().re;
        let t = 40.0;
        let lv = log_phi_imag(&sp, eta, t).unwrap();
        assert!((lv - (c.ln() + (eta - sp.rho) * t)).abs() < 1e-8);
    }

    #[test]
    fn rejects_negative_radius() {
        let sp = SpaceParams::real(3).unwrap();
        assert!(phi(&sp, C64::new(1.0, 0.0), -0.1).is_err());
    }

    proptest! {
        #[test]
        fn even_in_lambda(re in -60.0..60.0f64, im in -3.0..3.0f64, t in 0.0..15.0f64) {
            for sp in [SpaceParams::real(2).unwrap(), SpaceParams::complex(2).unwrap()] {
                let l = C64::new(re, im);
                let a = phi(&sp, l, t).unwrap();
                let b = phi(&sp, -l, t).unwrap();
                prop_assert!((a - b).norm() < 1e-12);
            }
        }

        #[test]
        fn real_for_real_index(l in 0.0..300.0f64, t in 0.0..25.0f64) {
            let sp = make_space(Family::QuatHyp, Some(2)).unwrap();
            let v = phi(&sp, C64::new(l, 0.0), t).unwrap();
            prop_assert_eq!(v.im, 0.0);
            prop_assert!(v.re.abs() <= 1.0 + 1e-10);
        }
    }
}
