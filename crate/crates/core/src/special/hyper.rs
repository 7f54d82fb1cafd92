use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const MAX_TERMS: usize = 20_000;

/// ₂F₁(a, b; c; x) for real x ≤ 0. Direct series for x ≥ -1/2, otherwise the
/// Pfaff transformation (1-x)^{-a} ₂F₁(a, c-b; c; x/(x-1)).
pub fn gauss_2f1(a: C64, b: C64, c: C64, x: f64) -> Result<C64> {
    if c.im == 0.0 && c.re <= 0.0 && c.re == c.re.round() {
        return Err(Error::Pole { what: "gauss_2f1 (c is a nonpositive integer)", at: format!("{c}") });
    }
    if !(x <= 0.0) {
        return Err(Error::Domain(format!("gauss_2f1 is implemented for real x <= 0 (got {x})")));
    }
    if x == 0.0 {
        return Ok(C64::new(1.0, 0.0));
    }
    if x >= -0.5 {
        series(a, b, c, x)
    } else {
        let z = x / (x - 1.0);
        let pre = (-a * (1.0 - x).ln()).exp();
        Ok(pre * series(a, c - b, c, z)?)
    }
}

/// Plain hypergeometric series at real |z| < 1.
pub(crate) fn series(a: C64, b: C64, c: C64, z: f64) -> Result<C64> {
    let mut sum = C64::new(1.0, 0.0);
    let mut term = C64::new(1.0, 0.0);
    let q = z.abs();
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let num = (a + kf) * (b + kf);
        let den = (c + kf) * (kf + 1.0);
        let ratio = num / den * z;
        term *= ratio;
        if term.re == 0.0 && term.im == 0.0 {
            return Ok(sum);
        }
        sum += term;
        let r = ratio.norm();
        // once terms shrink geometrically the tail is below |term| r/(1-r)
        let bound = r.max(q);
        if r < 1.0 && bound < 1.0 {
            let tail = term.norm() * bound / (1.0 - bound);
            if tail <= 1e-17 * sum.norm() || tail < 1e-300 {
                return Ok(sum);
            }
        }
    }
    Err(Error::NonConvergence { what: "hypergeometric series", iterations: MAX_TERMS })
}

/// Real-parameter series, used on the hot path of the Abel kernel.
pub(crate) fn series_real(a: f64, b: f64, c: f64, z: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 0..MAX_TERMS {
        let kf = k as f64;
        let ratio = (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        term *= ratio;
        sum += term;
        if term == 0.0 {
            break;
        }
        let r = ratio.abs();
        let bound = r.max(z.abs());
        if r < 1.0 && bound < 1.0 && term.abs() * bound / (1.0 - bound) <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn zero_argument() {
        let v = gauss_2f1(C64::new(1.3, 2.0), c(-4.5), c(0.7), 0.0).unwrap();
        assert_eq!(v, c(1.0));
    }

    #[test]
    fn log_identity() {
        let v = gauss_2f1(c(1.0), c(1.0), c(2.0), -1.0).unwrap();
        assert!((v.re - 2f64.ln()).abs() < 1e-14 && v.im.abs() < 1e-15);
        for x in [-0.25, -0.5, -0.75, -3.0, -40.0] {
            let v = gauss_2f1(c(1.0), c(1.0), c(2.0), x).unwrap();
            let want = -(1.0 - x).ln() / x;
            assert!((v.re - want).abs() < 1e-13 * want.abs());
        }
    }

    #[test]
    fn asinh_identity() {
        let v = gauss_2f1(c(0.5), c(0.5), c(1.5), -1.0).unwrap();
        assert!((v.re - 0.881_373_587_019_543).abs() < 1e-14);
        // direct series at -0.25 against the Pfaff branch at the same point
        let direct = series(c(0.5), c(0.5), c(1.5), -0.25).unwrap();
        let pfaff = (-c(0.5) * 1.25f64.ln()).exp() * series(c(0.5), c(1.0), c(1.5), 0.2).unwrap();
        assert!((direct - pfaff).norm() < 1e-15);
        assert!((direct.re - 0.5f64.asinh() / 0.5).abs() < 1e-15);
    }

    // reference values from mpmath.hyp2f1 at 30 digits
    #[test]
    fn frozen_complex_parameters() {
        let cases = [
            ((1.0, 3.0), (1.0, -3.0), (2.5, 0.0), -2.5, (-0.007_394_927_586_318_023, 0.0)),
            ((0.75, -1.5), (2.0, 0.5), (1.25, 0.0), -0.4, (0.420_246_529_997_352_1, 0.401_812_526_634_727_2)),
            ((5.5, 0.0), (5.5, 0.0), (8.0, 0.0), -0.5, (0.210_032_355_252_529_32, 0.0)),
        ];
        for (a, b, cc, x, want) in cases {
            let v = gauss_2f1(C64::new(a.0, a.1), C64::new(b.0, b.1), C64::new(cc.0, cc.1), x).unwrap();
            let w = C64::new(want.0, want.1);
            assert!((v - w).norm() < 1e-12 * (1.0 + w.norm()), "got {v} want {w}");
        }
    }

    #[test]
    fn polynomial_case_terminates() {
        // ₂F₁(-2, b; c; x) = 1 - 2bx/c + b(b+1)x²/(c(c+1))
        let (b, cc, x) = (1.5, 2.5, -0.3);
        let v = gauss_2f1(c(-2.0), c(b), c(cc), x).unwrap();
        let want = 1.0 - 2.0 * b * x / cc + b * (b + 1.0) * x * x / (cc * (cc + 1.0));
        assert!((v.re - want).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(gauss_2f1(c(1.0), c(1.0), c(-3.0), -0.2).is_err());
        assert!(gauss_2f1(c(1.0), c(1.0), c(1.0), 0.2).is_err());
    }

    proptest! {
        #[test]
        fn pfaff_branch_continuous(a in 0.1..4.0f64, b in 0.1..4.0f64, cc in 0.6..6.0f64) {
            let left = gauss_2f1(c(a), c(b), c(cc), -0.5 - 1e-12).unwrap();
            let right = gauss_2f1(c(a), c(b), c(cc), -0.5).unwrap();
            prop_assert!((left - right).norm() < 1e-10 * (1.0 + right.norm()));
        }
    }
}
