//! The oscillating symbol m_{α,β}(λ) = (λ²+ρ²)^{-β/2} e^{i(λ²+ρ²)^{α/2}},
//! its derivatives, the strip classes M(v, N, θ) and exponent bookkeeping.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::SpaceParams;
use crate::transform::Symbol;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSpec {
    pub alpha: f64,
    pub beta: C64,
    pub rho: f64,
}

impl MultiplierSpec {
    pub fn new(alpha: f64, beta: C64, rho: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("alpha must be positive (got {alpha})")));
        }
        if !(beta.re >= 0.0) || !beta.im.is_finite() {
            return Err(Error::Domain(format!("Re beta must be >= 0 (got {beta})")));
        }
        if !(rho > 0.0) {
            return Err(Error::Domain(format!("rho must be positive (got {rho})")));
        }
        Ok(MultiplierSpec { alpha, beta, rho })
    }

    pub fn on(sp: &SpaceParams, alpha: f64, beta: C64) -> Result<Self> {
        Self::new(alpha, beta, sp.rho)
    }

    /// m without the strip check. Principal branches; even in λ.
    pub(crate) fn eval_unchecked(&self, lambda: C64) -> C64 {
        let z = lambda * lambda + self.rho * self.rho;
        let lz = z.ln();
        let osc = (lz * (0.5 * self.alpha)).exp();
        (-self.beta * 0.5 * lz + C64::new(0.0, 1.0) * osc).exp()
    }

    /// d/dλ of (λ²+ρ²)^{α/2} at real λ, plus the Im β part of the phase.
    pub fn phase_rate_at(&self, lambda: f64) -> f64 {
        let z = lambda * lambda + self.rho * self.rho;
        self.alpha * lambda.abs() * z.powf(0.5 * self.alpha - 1.0) + self.beta.im.abs() * lambda.abs() / z
    }
}

pub fn eval_m(spec: &MultiplierSpec, lambda: C64) -> Result<C64> {
    if !(lambda.im.abs() < spec.rho) {
        return Err(Error::StripViolation { im: lambda.im.abs(), bound: spec.rho });
    }
    Ok(spec.eval_unchecked(lambda))
}

impl Symbol for MultiplierSpec {
    fn eval(&self, lambda: C64) -> C64 {
        self.eval_unchecked(lambda)
    }

    fn strip(&self) -> f64 {
        self.rho
    }

    // On the left half of the contour |e^{i(λ²+ρ²)^{α/2}}| grows like
    // e^{0.45 α |λ|^α}; the kernel factor e^{-t Im λ} beats it for α < 1
    // at any t > 0 and for α = 1 once t > 1.
    fn far_from(&self) -> Option<f64> {
        if self.alpha < 1.0 {
            Some(0.5)
        } else if self.alpha == 1.0 {
            Some(1.5)
        } else {
            None
        }
    }

    fn phase_rate(&self, lambda: f64) -> f64 {
        self.phase_rate_at(lambda)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derivative {
    pub value: C64,
    /// |value(r) - value(r/2)|.
    pub error: f64,
}

const CAUCHY_POINTS: usize = 64;

fn cauchy<F: Fn(C64) -> C64>(f: &F, k: usize, center: C64, r: f64) -> C64 {
    let mut s = C64::new(0.0, 0.0);
    for j in 0..CAUCHY_POINTS {
        let th = 2.0 * PI * j as f64 / CAUCHY_POINTS as f64;
        let e = C64::from_polar(1.0, th);
        s += f(center + e * r) * C64::from_polar(1.0, -(k as f64) * th);
    }
    let kfact: f64 = (1..=k).map(|i| i as f64).product();
    s * (kfact / (CAUCHY_POINTS as f64 * r.powi(k as i32)))
}

/// k-th derivative of a function analytic in |Im λ| < strip, by the
/// trapezoid rule on the circle of radius r.
pub fn cauchy_derivative<F: Fn(C64) -> C64>(f: F, strip: f64, k: usize, lambda: C64, r: f64) -> Result<Derivative> {
    if k > 10 {
        return Err(Error::Domain(format!("derivative order {k} exceeds 10")));
    }
    if !(r > 0.0) || r + lambda.im.abs() >= strip {
        return Err(Error::ContourExitsStrip { center: format!("{lambda}"), radius: r, bound: strip });
    }
    let a = cauchy(&f, k, lambda, r);
    let b = cauchy(&f, k, lambda, 0.5 * r);
    Ok(Derivative { value: a, error: (a - b).norm() })
}

/// ∂^k m at λ (real or inside the strip) with contour radius r.
pub fn derivative(spec: &MultiplierSpec, k: usize, lambda: C64, r: f64) -> Result<Derivative> {
    cauchy_derivative(|z| spec.eval_unchecked(z), spec.rho, k, lambda, r)
}

/// Radius adapted to the strip and to the local oscillation.
pub fn auto_radius(strip: f64, lambda: C64, rate: f64) -> f64 {
    (0.5 * (strip - lambda.im.abs())).min(1.0 / (1.0 + rate))
}

/// Closed-form first derivative m·(iαλ(λ²+ρ²)^{α/2-1} - βλ(λ²+ρ²)^{-1}).
pub fn first_derivative_exact(spec: &MultiplierSpec, lambda: C64) -> C64 {
    let z = lambda * lambda + spec.rho * spec.rho;
    let i = C64::new(0.0, 1.0);
    spec.eval_unchecked(lambda) * (i * spec.alpha * lambda * z.powf(0.5 * spec.alpha - 1.0) - spec.beta * lambda / z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripClassParams {
    pub v: f64,
    pub n: usize,
    pub theta: f64,
}

impl StripClassParams {
    pub fn new(v: f64, n: usize, theta: f64) -> Result<Self> {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Domain(format!("v must lie in (0,1) (got {v})")));
        }
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::Domain(format!("theta must lie in (0,1) (got {theta})")));
        }
        if n == 0 || n > 10 {
            return Err(Error::Domain(format!("N must lie in 1..=10 (got {n})")));
        }
        Ok(StripClassParams { v, n, theta })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassEntry {
    pub k: usize,
    pub theta: f64,
    pub sup_constant: f64,
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub pass: bool,
    pub entries: Vec<ClassEntry>,
}

impl ClassReport {
    pub fn first_failure(&self) -> Option<usize> {
        self.entries.iter().find(|e| !e.stable).map(|e| e.k)
    }
}

const IM_LEVELS: usize = 5;

fn log_grid(lambda_max: f64, per_decade: usize) -> Vec<f64> {
    let mut g = vec![0.0];
    let lo: f64 = 0.01;
    let decades = (lambda_max / lo).log10();
    let n = (decades * per_decade as f64).ceil() as usize;
    for i in 0..=n {
        g.push(lo * 10f64.powf(decades * i as f64 / n as f64));
    }
    g
}

/// Whether sup_{|Im λ| ≤ vρ} |∂^k m(λ)| ⟨λ⟩^{kθ} is finite for k ≤ N, judged
/// by stabilization: the sup over [0, Λ] may exceed the sup over [0, Λ/10]
/// by at most 10%, and a denser grid must agree within 5%.
pub fn class_membership(sym: &dyn Symbol, params: &StripClassParams, lambda_max: f64) -> Result<ClassReport> {
    let strip = sym.strip();
    if !(strip > 0.0) {
        return Err(Error::Domain("class membership needs a symbol analytic in a strip".into()));
    }
    let height = params.v * strip.min(1e6);
    let sup_on = |grid: &[f64], k: usize| -> Result<(f64, f64)> {
        let vals: Vec<Result<(f64, f64)>> = grid
            .par_iter()
            .map(|&x| {
                let mut v = 0.0f64;
                for lvl in 0..IM_LEVELS {
                    let y = height * lvl as f64 / (IM_LEVELS - 1) as f64;
                    let lam = C64::new(x, y);
                    let r = auto_radius(strip.min(1e6), lam, sym.phase_rate(x));
                    let d = cauchy_derivative(|z| sym.eval(z), strip, k, lam, r)?;
                    // a value below its own r-versus-r/2 discrepancy is rounding noise
                    let a = if d.value.norm() <= d.error { 0.0 } else { d.value.norm() };
                    v = v.max(a * (1.0 + x * x).sqrt().powf(k as f64 * params.theta));
                }
                Ok((x, v))
            })
            .collect();
        let mut all = 0.0f64;
        let mut tenth = 0.0f64;
        for r in vals {
            let (x, v) = r?;
            if !v.is_finite() {
                return Ok((f64::INFINITY, f64::INFINITY));
            }
            all = all.max(v);
            if x <= 0.1 * lambda_max {
                tenth = tenth.max(v);
            }
        }
        Ok((all, tenth))
    };
    let coarse = log_grid(lambda_max, 40);
    let fine = log_grid(lambda_max, 80);
    let mut entries = Vec::new();
    for k in 0..=params.n {
        let (all, tenth) = sup_on(&coarse, k)?;
        let (all_f, _) = sup_on(&fine, k)?;
        // tiny constants (e.g. derivatives of a constant symbol) are rounding
        let floor = 1e-9;
        let grows = all > 1.1 * tenth.max(floor);
        let refined = (all_f - all).abs() <= 0.05 * all.max(floor);
        let stable = all.is_finite() && !grows && refined;
        let sup_constant = if all < floor { 0.0 } else { all };
        entries.push(ClassEntry { k, theta: params.theta, sup_constant, stable });
    }
    Ok(ClassReport { pass: entries.iter().all(|e| e.stable), entries })
}

/// s(p) = 2 min(1/p, 1/p').
pub fn s_p(p: f64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("p must lie in (1, inf) (got {p})")));
    }
    Ok(2.0 * (1.0 / p).min(1.0 - 1.0 / p))
}

/// v_Γ(p) = s(p) η + |2/p - 1| with η = |η_Γ|/ρ.
pub fn v_gamma(p: f64, eta_ratio: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta_ratio) {
        return Err(Error::Domain(format!("eta_ratio must lie in [0,1] (got {eta_ratio})")));
    }
    Ok(s_p(p)? * eta_ratio + (2.0 / p - 1.0).abs())
}

/// η = sqrt(1 - λ₀/ρ²) from the bottom λ₀ of the L² spectrum.
pub fn eta_ratio_from_lambda0(lambda0: f64, rho: f64) -> Result<f64> {
    if !(lambda0 >= 0.0 && lambda0 <= rho * rho) {
        return Err(Error::Domain(format!("lambda0 must lie in [0, rho^2] (got {lambda0})")));
    }
    Ok((1.0 - lambda0 / (rho * rho)).sqrt())
}

/// N = ⌊(n+1)/(2θ)⌋ + 1.
pub fn smoothness_order(n: u32, theta: f64) -> Result<usize> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Domain(format!("theta must lie in (0,1) (got {theta})")));
    }
    Ok(((n as f64 + 1.0) / (2.0 * theta)).floor() as usize + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::FnSymbol;
    use proptest::prelude::*;

    fn spec(a: f64, b: f64, rho: f64) -> MultiplierSpec {
        MultiplierSpec::new(a, C64::new(b, 0.0), rho).unwrap()
    }

    #[test]
    fn examples() {
        let v = eval_m(&spec(1.0, 0.0, 1.0), C64::new(0.0, 0.0)).unwrap();
        assert!((v - C64::new(1f64.cos(), 1f64.sin())).norm() < 1e-15);
        let v = eval_m(&spec(0.5, 2.0, 1.0), C64::new(3.0, 0.0)).unwrap();
        assert!((v.norm() - 0.1).abs() < 1e-15);
        assert!(eval_m(&spec(0.5, 0.0, 1.0), C64::new(0.0, 1.0)).is_err());
        assert!(MultiplierSpec::new(0.0, C64::new(0.0, 0.0), 1.0).is_err());
        assert!(MultiplierSpec::new(1.0, C64::new(-0.1, 0.0), 1.0).is_err());
    }

    #[test]
    fn zeroth_derivative_is_value() {
        let s = spec(0.5, 1.0, 1.0);
        for l in [0.0, 2.0, 40.0] {
            let d = derivative(&s, 0, C64::new(l, 0.0), 0.4).unwrap();
            assert!((d.value - s.eval_unchecked(C64::new(l, 0.0))).norm() < 1e-12);
        }
        assert!(matches!(derivative(&s, 1, C64::new(0.0, 0.7), 0.4), Err(Error::ContourExitsStrip { .. })));
    }

    fn slope(s: &MultiplierSpec) -> f64 {
        let xs: Vec<f64> = (0..30).map(|i| 10.0 * 50f64.powf(i as f64 / 29.0)).collect();
        let pts: Vec<(f64, f64)> = xs
            .iter()
            .map(|&x| {
                let lam = C64::new(x, 0.0);
                let r = auto_radius(s.rho, lam, s.phase_rate_at(x));
                (x.ln(), derivative(s, 1, lam, r).unwrap().value.norm().ln())
            })
            .collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    }

    #[test]
    fn derivative_decay_slopes() {
        assert!((slope(&spec(0.5, 0.0, 1.0)) + 0.5).abs() < 0.05);
        assert!((slope(&spec(2.0, 0.0, 1.0)) - 1.0).abs() < 0.05);
    }

    #[test]
    fn cauchy_matches_closed_form() {
        for s in [spec(0.5, 0.0, 1.0), spec(1.0, 2.0, 1.0), spec(0.3, 0.7, 2.0)] {
            for x in [0.0, 0.5, 3.0, 20.0, 100.0] {
                let lam = C64::new(x, 0.0);
                let r = auto_radius(s.rho, lam, s.phase_rate_at(x));
                let d = derivative(&s, 1, lam, r).unwrap();
                let want = first_derivative_exact(&s, lam);
                assert!((d.value - want).norm() < 1e-8 * want.norm().max(1e-3), "{x}");
            }
        }
    }

    // higher derivatives against finite differences of the closed-form first derivative
    #[test]
    fn higher_derivatives_consistent() {
        let s = spec(0.5, 0.5, 1.0);
        for x in [1.0, 10.0, 80.0] {
            let h = 1e-3;
            let lam = C64::new(x, 0.0);
            let fd2 = (first_derivative_exact(&s, lam + h) - first_derivative_exact(&s, lam - h)) / (2.0 * h);
            let r = auto_radius(s.rho, lam, s.phase_rate_at(x));
            let d2 = derivative(&s, 2, lam, r).unwrap().value;
            assert!((d2 - fd2).norm() < 1e-5 * d2.norm().max(1e-6));
            let fd3 = (first_derivative_exact(&s, lam + h) - 2.0 * first_derivative_exact(&s, lam)
                + first_derivative_exact(&s, lam - h))
                / (h * h);
            let d3 = derivative(&s, 3, lam, r).unwrap().value;
            assert!((d3 - fd3).norm() < 1e-4 * d3.norm().max(1e-6));
        }
    }

    #[test]
    fn class_examples() {
        let p = StripClassParams::new(0.9, 6, 0.5).unwrap();
        let r = class_membership(&spec(0.5, 0.0, 1.0), &p, 1000.0).unwrap();
        assert!(r.pass, "{r:?}");
        let one = FnSymbol::analytic(|_| C64::new(1.0, 0.0), 1.0, None, 0.0);
        let r = class_membership(&one, &p, 1000.0).unwrap();
        assert!(r.pass);
        assert!((r.entries[0].sup_constant - 1.0).abs() < 1e-12);
        assert!(r.entries[1..].iter().all(|e| e.sup_constant == 0.0));
        let p2 = StripClassParams::new(0.9, 2, 0.5).unwrap();
        let r = class_membership(&spec(2.0, 1.0, 1.0), &p2, 1000.0).unwrap();
        assert!(!r.pass);
        assert!(!r.entries[2].stable);
    }

    #[test]
    fn exponent_bookkeeping() {
        assert_eq!(s_p(2.0).unwrap(), 1.0);
        assert_eq!(s_p(4.0).unwrap(), 0.5);
        assert!((s_p(4.0 / 3.0).unwrap() - s_p(4.0).unwrap()).abs() < 1e-15);
        assert!(s_p(1.0).is_err());
        assert_eq!(v_gamma(2.0, 0.3).unwrap(), 0.3);
        assert_eq!(v_gamma(4.0, 0.5).unwrap(), 0.75);
        assert!((v_gamma(1.0 + 1e-9, 0.2).unwrap() - 1.0).abs() < 1e-8);
        assert!((v_gamma(1e9, 0.2).unwrap() - 1.0).abs() < 1e-8);
        assert_eq!(smoothness_order(3, 0.5).unwrap(), 5);
        assert_eq!(smoothness_order(2, 0.5).unwrap(), 4);
        assert_eq!(smoothness_order(3, 0.9).unwrap(), 3);
        assert!((eta_ratio_from_lambda0(0.75, 1.0).unwrap() - 0.5).abs() < 1e-15);
    }

    // at eta_ratio = 1 the formula gives exactly 1 for every p
    #[test]
    fn v_gamma_boundary() {
        for p in [1.1, 1.5, 2.0, 3.0, 10.0] {
            assert!((v_gamma(p, 1.0).unwrap() - 1.0).abs() < 1e-15);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(6))]

        #[test]
        fn subcritical_alpha_in_class(a in 0.2..0.75f64, v in 0.05..0.95f64, b in 0.0..1.0f64) {
            let theta = 1.0 - a;
            let n = smoothness_order(3, theta).unwrap();
            let p = StripClassParams::new(v, n, theta).unwrap();
            let r = class_membership(&spec(a, b, 1.0), &p, 1000.0).unwrap();
            prop_assert!(r.pass, "{:?}", r);
        }

        #[test]
        fn supercritical_alpha_fails(a in 1.2..2.5f64, b in 0.0..1.0f64, theta in 0.05..0.95f64) {
            // smallest k with k(α-1) > Re β
            let k = (b / (a - 1.0)).floor() as usize + 1;
            prop_assume!(k <= 10);
            let p = StripClassParams::new(0.5, k, theta).unwrap();
            let r = class_membership(&spec(a, b, 1.0), &p, 1000.0).unwrap();
            prop_assert!(!r.pass);
            prop_assert!(!r.entries[k].stable);
        }
    }

    proptest! {
        #[test]
        fn modulus_law(x in -500.0..500.0f64, b in 0.0..3.0f64, bi in -2.0..2.0f64, a in 0.1..2.5f64) {
            let s = MultiplierSpec::new(a, C64::new(b, bi), 1.3).unwrap();
            let v = eval_m(&s, C64::new(x, 0.0)).unwrap();
            let want = (x * x + 1.69f64).powf(-b / 2.0);
            // Im β contributes the factor e^{-Im β · arg(z)/2}, arg z = 0 on the real axis
            prop_assert!((v.norm() - want).abs() < 1e-13 * want.max(1e-300) + 1e-300);
        }

        #[test]
        fn even(x in -50.0..50.0f64, y in -0.99..0.99f64) {
            let s = MultiplierSpec::new(0.7, C64::new(0.4, 0.3), 1.0).unwrap();
            let l = C64::new(x, y);
            prop_assert_eq!(eval_m(&s, l).unwrap(), eval_m(&s, -l).unwrap());
        }

        #[test]
        fn v_gamma_below_one(p in 1.01..50.0f64, r in 0.0..0.999f64) {
            prop_assert!(v_gamma(p, r).unwrap() < 1.0);
        }

        #[test]
        fn duality(p in 1.01..50.0f64) {
            let q = p / (p - 1.0);
            prop_assert!((s_p(p).unwrap() - s_p(q).unwrap()).abs() < 1e-12);
        }
    }
}
