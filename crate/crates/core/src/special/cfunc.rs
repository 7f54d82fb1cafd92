use num_complex::Complex64 as C64;
use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::geometry::SpaceParams;
use crate::special::gamma::log_gamma_unchecked;

fn is_nonpositive_integer(z: C64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// Harish-Chandra c-function
/// c(λ) = 2^{ρ-iλ} Γ(a+1) Γ(iλ) / [Γ((ρ+iλ)/2) Γ((iλ+a-b+1)/2)].
pub fn c_function(sp: &SpaceParams, lambda: C64) -> Result<C64> {
    let i = C64::new(0.0, 1.0);
    let il = i * lambda;
    if is_nonpositive_integer(il) {
        return Err(Error::Pole { what: "c_function", at: format!("{lambda}") });
    }
    let d1 = (sp.rho + il) * 0.5;
    let d2 = (il + sp.jacobi_a - sp.jacobi_b + 1.0) * 0.5;
    if is_nonpositive_integer(d1) || is_nonpositive_integer(d2) {
        return Ok(C64::new(0.0, 0.0));
    }
    let l = (sp.rho - il) * LN_2 + log_gamma_unchecked(C64::new(sp.jacobi_a + 1.0, 0.0))
        + log_gamma_unchecked(il)
        - log_gamma_unchecked(d1)
        - log_gamma_unchecked(d2);
    Ok(l.exp())
}

/// 1/c(-λ), entire in the closed upper half-plane; zero at λ = 0.
pub fn inv_c_minus(sp: &SpaceParams, lambda: C64) -> C64 {
    let i = C64::new(0.0, 1.0);
    let z = -i * lambda;
    if is_nonpositive_integer(z) {
        return C64::new(0.0, 0.0);
    }
    let n1 = (sp.rho + z) * 0.5;
    let n2 = (z + sp.jacobi_a - sp.jacobi_b + 1.0) * 0.5;
    let l = log_gamma_unchecked(n1) + log_gamma_unchecked(n2)
        - (sp.rho - z) * LN_2
        - log_gamma_unchecked(C64::new(sp.jacobi_a + 1.0, 0.0))
        - log_gamma_unchecked(z);
    l.exp()
}

/// |c(λ)|^{-2} for real λ. The pole of Γ(iλ) at 0 is removed through
/// |Γ(iλ)|^{-2} = λ sinh(πλ)/π.
pub fn plancherel_density(sp: &SpaceParams, lambda: f64) -> f64 {
    let x = lambda.abs();
    if x == 0.0 {
        return 0.0;
    }
    log_plancherel_density(sp, x).exp()
}

pub(crate) fn log_plancherel_density(sp: &SpaceParams, x: f64) -> f64 {
    let g1 = log_gamma_unchecked(C64::new(sp.rho * 0.5, x * 0.5)).re;
    let g2 = log_gamma_unchecked(C64::new((sp.jacobi_a - sp.jacobi_b + 1.0) * 0.5, x * 0.5)).re;
    let ga = log_gamma_unchecked(C64::new(sp.jacobi_a + 1.0, 0.0)).re;
    let px = PI * x;
    let ln_sinh = if px > 1.0 {
        px - LN_2 + (-(-2.0 * px).exp()).ln_1p()
    } else {
        px.sinh().ln()
    };
    2.0 * g1 + 2.0 * g2 - 2.0 * sp.rho * LN_2 - 2.0 * ga + x.ln() + ln_sinh - PI.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_space, Family};
    use proptest::prelude::*;

    #[test]
    fn three_space_closed_form() {
        let sp = SpaceParams::real(3).unwrap();
        for l in [0.3, 1.0, 2.0, 7.5] {
            let c = c_function(&sp, C64::new(l, 0.0)).unwrap();
            let want = C64::new(0.0, -1.0 / l);
            assert!((c - want).norm() < 1e-13 * want.norm());
            assert!((plancherel_density(&sp, l) - l * l).abs() < 1e-12 * l * l);
        }
        let r = |l: f64| c_function(&sp, C64::new(l, 0.0)).unwrap().norm().powi(-2);
        assert!((r(2.0) / r(1.0) - 4.0).abs() < 1e-10);
        assert!((r(3.0) / r(1.0) - 9.0).abs() < 1e-10);
        assert!((plancherel_density(&sp, 3.0) / plancherel_density(&sp, 1.0) - 9.0).abs() < 1e-10);
    }

    #[test]
    fn pole_and_zero() {
        let sp = SpaceParams::real(3).unwrap();
        assert!(c_function(&sp, C64::new(0.0, 0.0)).is_err());
        assert_eq!(plancherel_density(&sp, 0.0), 0.0);
        assert_eq!(inv_c_minus(&sp, C64::new(0.0, 0.0)), C64::new(0.0, 0.0));
    }

    #[test]
    fn inverse_of_reflected_matches() {
        for sp in [SpaceParams::real(2).unwrap(), SpaceParams::complex(3).unwrap()] {
            for l in [C64::new(0.7, 0.0), C64::new(-3.0, 0.4), C64::new(12.0, 0.9)] {
                let direct = c_function(&sp, -l).unwrap().inv();
                assert!((inv_c_minus(&sp, l) - direct).norm() < 1e-12 * direct.norm());
            }
        }
    }

    // reference values from mpmath (same formula, 30 digits)
    #[test]
    fn frozen_densities() {
        let cases = [
            (Family::RealHyp, Some(2), 0.5, 1.440_659_519_977_514_6),
            (Family::RealHyp, Some(2), 10.0, 31.415_926_535_897_932),
            (Family::ComplexHyp, Some(2), 1.5, 0.337_346_857_480_200_6),
            (Family::QuatHyp, Some(2), 3.0, 0.014_378_748_982_919_721),
            (Family::OctPlane, None, 4.0, 6.722_684_369_142_805e-7),
        ];
        for (f, k, l, want) in cases {
            let sp = make_space(f, k).unwrap();
            let got = plancherel_density(&sp, l);
            assert!((got - want).abs() < 1e-12 * want, "{} λ={l}: {got} vs {want}", sp.label());
        }
    }

    #[test]
    fn density_growth_exponent() {
        let sp = SpaceParams::real(2).unwrap();
        let (a, b) = (50.0f64, 500.0f64);
        let slope = (plancherel_density(&sp, b) / plancherel_density(&sp, a)).ln() / (b / a).ln();
        assert!((slope - 1.0).abs() < 0.02);
    }

    #[test]
    fn density_growth_all_families() {
        for sp in [
            SpaceParams::real(3).unwrap(),
            SpaceParams::real(6).unwrap(),
            SpaceParams::complex(2).unwrap(),
            make_space(Family::QuatHyp, Some(2)).unwrap(),
            make_space(Family::OctPlane, None).unwrap(),
        ] {
            let (a, b) = (200.0f64, 2000.0f64);
            let slope = (log_plancherel_density(&sp, b) - log_plancherel_density(&sp, a)) / (b / a).ln();
            let n1 = sp.n as f64 - 1.0;
            assert!((slope - n1).abs() < 0.02 * n1, "{}: {slope}", sp.label());
        }
    }

    proptest! {
        #[test]
        fn modulus_even(l in 0.01..200.0f64) {
            for sp in [SpaceParams::real(3).unwrap(), SpaceParams::complex(2).unwrap()] {
                let a = c_function(&sp, C64::new(l, 0.0)).unwrap().norm();
                let b = c_function(&sp, C64::new(-l, 0.0)).unwrap().norm();
                prop_assert!((a - b).abs() < 1e-12 * a.max(1.0));
                prop_assert_eq!(plancherel_density(&sp, l), plancherel_density(&sp, -l));
                let d = plancherel_density(&sp, l);
                prop_assert!((d - a.powi(-2)).abs() < 1e-10 * d);
            }
        }
    }
}
