use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

// B_{2k} / (2k (2k-1)) for k = 1..8
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

fn is_pole(z: C64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// Principal log Γ(z): continuous on the right half-plane, equal to the
/// real log Γ on the positive axis. Left half-plane values come from the
/// reflection formula and agree with the principal branch modulo 2πi.
pub fn log_gamma(z: C64) -> Result<C64> {
    if is_pole(z) {
        return Err(Error::Pole { what: "log_gamma", at: format!("{z}") });
    }
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::Domain(format!("log_gamma of non-finite argument {z}")));
    }
    Ok(log_gamma_unchecked(z))
}

pub(crate) fn log_gamma_unchecked(z: C64) -> C64 {
    if z.re < 0.5 {
        // log Γ(z) = log π - log sin(πz) - log Γ(1 - z)
        C64::new(PI.ln(), 0.0) - ln_sin_pi(z) - log_gamma_right(C64::new(1.0, 0.0) - z)
    } else {
        log_gamma_right(z)
    }
}

fn log_gamma_right(mut z: C64) -> C64 {
    // shift up to |z| >= 9 with log Γ(z) = log Γ(z+n) - Σ log(z+k); the real
    // part of the sum is taken as one log of a product to limit rounding
    let mut prod = 1.0f64;
    let mut arg = 0.0f64;
    while z.norm() < 9.0 {
        prod *= z.norm();
        arg += z.im.atan2(z.re);
        z += 1.0;
    }
    let shift = C64::new(prod.ln(), arg);
    let w = z.inv();
    let w2 = w * w;
    let mut series = C64::new(0.0, 0.0);
    let mut p = w;
    for c in STIRLING {
        series += p * c;
        p *= w2;
    }
    (z - 0.5) * z.ln() - z + LN_SQRT_2PI + series - shift
}

/// log sin(πz) without overflow for large |Im z|.
fn ln_sin_pi(z: C64) -> C64 {
    if z.im < 0.0 {
        return ln_sin_pi(z.conj()).conj();
    }
    // sin πz = (i/2) e^{-iπz} (1 - e^{2πiz}), and |e^{2πiz}| <= 1 here
    let i = C64::new(0.0, 1.0);
    let e = (i * 2.0 * PI * z).exp();
    C64::new(0.5f64.ln(), PI / 2.0) - i * PI * z + (C64::new(1.0, 0.0) - e).ln()
}

pub fn gamma(z: C64) -> Result<C64> {
    Ok(log_gamma(z)?.exp())
}

/// Γ(x) for real x via the complex routine; exact sign for negative x.
pub fn gamma_real(x: f64) -> Result<f64> {
    let g = gamma(C64::new(x, 0.0))?;
    Ok(g.re)
}
