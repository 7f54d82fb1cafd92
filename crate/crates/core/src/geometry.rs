//! Rank-one symmetric spaces, the radial (Cartan) density and the
//! upper half-space models of H² and H³.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    RealHyp,
    ComplexHyp,
    QuatHyp,
    OctPlane,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::RealHyp => "RealHyp",
            Family::ComplexHyp => "ComplexHyp",
            Family::QuatHyp => "QuatHyp",
            Family::OctPlane => "OctPlane",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "realhyp" | "real" => Ok(Family::RealHyp),
            "complexhyp" | "complex" => Ok(Family::ComplexHyp),
            "quathyp" | "quaternionic" => Ok(Family::QuatHyp),
            "octplane" | "octonionic" => Ok(Family::OctPlane),
            other => Err(Error::InvalidSpace(format!("unknown family '{other}'"))),
        }
    }
}

/// Rank-one space data. The root α has unit length, so the radial variable
/// is geodesic distance from the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub family: Family,
    /// `k` as passed to [`make_space`]; 2 for the octonionic plane.
    pub k: u32,
    pub n: u32,
    pub m1: u32,
    pub m2: u32,
    pub rho: f64,
    pub jacobi_a: f64,
    pub jacobi_b: f64,
}

pub fn make_space(family: Family, k: Option<u32>) -> Result<SpaceParams> {
    let (k, m1, m2) = match (family, k) {
        (Family::OctPlane, None) | (Family::OctPlane, Some(2)) => (2, 8, 7),
        (Family::OctPlane, Some(k)) => {
            return Err(Error::InvalidSpace(format!(
                "the octonionic hyperbolic space exists only in dimension 2 (got k={k})"
            )))
        }
        (_, None) => {
            return Err(Error::InvalidSpace(format!("{family} needs a dimension k")))
        }
        (_, Some(k)) if k < 2 => {
            return Err(Error::InvalidSpace(format!("{family} needs k >= 2 (got {k})")))
        }
        (Family::RealHyp, Some(k)) => (k, k - 1, 0),
        (Family::ComplexHyp, Some(k)) => (k, 2 * k - 2, 1),
        (Family::QuatHyp, Some(k)) => (k, 4 * k - 4, 3),
    };
    let (m1f, m2f) = (m1 as f64, m2 as f64);
    Ok(SpaceParams {
        family,
        k,
        n: m1 + m2 + 1,
        m1,
        m2,
        rho: (m1f + 2.0 * m2f) / 2.0,
        jacobi_a: (m1f + m2f - 1.0) / 2.0,
        jacobi_b: (m2f - 1.0) / 2.0,
    })
}

impl SpaceParams {
    pub fn real(k: u32) -> Result<Self> {
        make_space(Family::RealHyp, Some(k))
    }

    pub fn complex(k: u32) -> Result<Self> {
        make_space(Family::ComplexHyp, Some(k))
    }

    /// Name in the usual notation, e.g. `H^3(R)`.
    pub fn label(&self) -> String {
        match self.family {
            Family::RealHyp => format!("H^{}(R)", self.k),
            Family::ComplexHyp => format!("H^{}(C)", self.k),
            Family::QuatHyp => format!("H^{}(H)", self.k),
            Family::OctPlane => "H^2(O)".to_string(),
        }
    }
}

/// J(t) = (2 sinh t)^{m1} (2 sinh 2t)^{m2}.
pub fn cartan_density(sp: &SpaceParams, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let lj = log_cartan_density(sp, t);
    lj.exp()
}

/// log J(t), finite for all t > 0 even when J itself overflows.
pub fn log_cartan_density(sp: &SpaceParams, t: f64) -> f64 {
    if t <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let a = if sp.m1 > 0 { sp.m1 as f64 * (std::f64::consts::LN_2 + ln_sinh(t)) } else { 0.0 };
    let b = if sp.m2 > 0 {
        sp.m2 as f64 * (std::f64::consts::LN_2 + ln_sinh(2.0 * t))
    } else {
        0.0
    };
    a + b
}

/// J(t) e^{-2ρt} = (1 - e^{-2t})^{m1} (1 - e^{-4t})^{m2}, which tends to 1.
pub fn normalized_density(sp: &SpaceParams, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let x = -(-2.0 * t).exp_m1();
    let y = -(-4.0 * t).exp_m1();
    x.powi(sp.m1 as i32) * y.powi(sp.m2 as i32)
}

pub(crate) fn ln_sinh(x: f64) -> f64 {
    if x > 1.0 {
        x - std::f64::consts::LN_2 + (-(-2.0 * x).exp()).ln_1p()
    } else {
        x.sinh().ln()
    }
}

pub(crate) fn ln_cosh(x: f64) -> f64 {
    let x = x.abs();
    x - std::f64::consts::LN_2 + (-2.0 * x).exp().ln_1p()
}

/// Point of the upper half-space model: horizontal part `(x, y)` and
/// height `h > 0`. H² points have `y = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelPoint {
    pub x: f64,
    pub y: f64,
    pub h: f64,
}

impl ModelPoint {
    pub fn h2(x: f64, h: f64) -> Result<Self> {
        Self::h3(x, 0.0, h)
    }

    pub fn h3(x: f64, y: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() || !x.is_finite() || !y.is_finite() {
            return Err(Error::Domain(format!("model point needs finite coordinates and height > 0 (got h={h})")));
        }
        Ok(ModelPoint { x, y, h })
    }

    /// The point j = (0, 0, 1).
    pub fn origin() -> Self {
        ModelPoint { x: 0.0, y: 0.0, h: 1.0 }
    }
}

/// cosh d = 1 + |x - y|² / (2 x_h y_h), evaluated as
/// d = 2 asinh(|x - y| / (2 sqrt(x_h y_h))) to keep small distances accurate.
pub fn hyperbolic_distance(p: &ModelPoint, q: &ModelPoint) -> Result<f64> {
    if !(p.h > 0.0) || !(q.h > 0.0) {
        return Err(Error::Domain("height coordinate must be positive".into()));
    }
    Ok(distance_unchecked(p, q))
}

pub(crate) fn distance_unchecked(p: &ModelPoint, q: &ModelPoint) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    let dh = p.h - q.h;
    let chord = (dx * dx + dy * dy + dh * dh).sqrt();
    2.0 * (chord / (2.0 * (p.h * q.h).sqrt())).asinh()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn real_hyperbolic_three_space() {
        let sp = make_space(Family::RealHyp, Some(3)).unwrap();
        assert_eq!((sp.m1, sp.m2, sp.n), (2, 0, 3));
        assert_eq!(sp.rho, 1.0);
        assert_eq!(sp.jacobi_a, 0.5);
        assert_eq!(sp.jacobi_b, -0.5);
    }

    #[test]
    fn hyperbolic_plane() {
        let sp = make_space(Family::RealHyp, Some(2)).unwrap();
        assert_eq!((sp.m1, sp.m2), (1, 0));
        assert_eq!(sp.rho, 0.5);
    }

    #[test]
    fn octonionic_plane() {
        let sp = make_space(Family::OctPlane, None).unwrap();
        assert_eq!((sp.n, sp.m1, sp.m2), (16, 8, 7));
        assert_eq!(sp.rho, 11.0);
        assert!(make_space(Family::OctPlane, Some(3)).is_err());
    }

    #[test]
    fn rejects_small_k() {
        assert!(make_space(Family::RealHyp, Some(1)).is_err());
        assert!(make_space(Family::ComplexHyp, Some(0)).is_err());
        assert!(make_space(Family::QuatHyp, None).is_err());
    }

    #[test]
    fn invariants_all_families() {
        let spaces = [
            make_space(Family::RealHyp, Some(5)).unwrap(),
            make_space(Family::ComplexHyp, Some(3)).unwrap(),
            make_space(Family::QuatHyp, Some(2)).unwrap(),
            make_space(Family::OctPlane, None).unwrap(),
        ];
        for sp in spaces {
            assert_eq!(sp.n, sp.m1 + sp.m2 + 1);
            assert_eq!(sp.rho, (sp.m1 as f64 + 2.0 * sp.m2 as f64) / 2.0);
            assert_eq!(sp.jacobi_a + sp.jacobi_b + 1.0, sp.rho);
        }
    }

    #[test]
    fn density_values() {
        let sp = SpaceParams::real(3).unwrap();
        assert_eq!(cartan_density(&sp, 0.0), 0.0);
        assert_relative_eq!(cartan_density(&sp, 1.0), 5.524391382167263, max_relative = 1e-14);
        let slope = log_cartan_density(&sp, 20.0) / 20.0;
        assert!((slope - 2.0).abs() < 0.07);
    }

    #[test]
    fn density_increasing() {
        for sp in [
            SpaceParams::real(2).unwrap(),
            SpaceParams::real(3).unwrap(),
            SpaceParams::complex(2).unwrap(),
            make_space(Family::QuatHyp, Some(2)).unwrap(),
            make_space(Family::OctPlane, None).unwrap(),
        ] {
            let mut prev = log_cartan_density(&sp, 0.01);
            for i in 2..=3000 {
                let v = log_cartan_density(&sp, i as f64 * 0.01);
                assert!(v > prev, "{} at t={}", sp.label(), i as f64 * 0.01);
                prev = v;
            }
        }
    }

    #[test]
    fn normalized_density_matches() {
        let sp = SpaceParams::complex(2).unwrap();
        for t in [0.1, 1.0, 3.0] {
            let a = normalized_density(&sp, t);
            let b = cartan_density(&sp, t) * (-2.0 * sp.rho * t).exp();
            assert_relative_eq!(a, b, max_relative = 1e-13);
        }
    }

    #[test]
    fn distance_examples() {
        let o = ModelPoint::h2(0.0, 1.0).unwrap();
        assert_eq!(hyperbolic_distance(&o, &o).unwrap(), 0.0);
        let p = ModelPoint::h2(0.0, 2.0).unwrap();
        assert_relative_eq!(hyperbolic_distance(&o, &p).unwrap(), 2f64.ln(), max_relative = 1e-14);
        let q = ModelPoint::h2(1.0, 1.0).unwrap();
        assert_relative_eq!(hyperbolic_distance(&o, &q).unwrap(), 1.5f64.acosh(), max_relative = 1e-14);
        assert!(ModelPoint::h2(0.0, 0.0).is_err());
        assert!(ModelPoint::h3(0.0, 0.0, -1.0).is_err());
    }

    fn point() -> impl Strategy<Value = ModelPoint> {
        (-5.0..5.0f64, -5.0..5.0f64, 0.01..10.0f64).prop_map(|(x, y, h)| ModelPoint { x, y, h })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn distance_symmetric(p in point(), q in point()) {
            let a = hyperbolic_distance(&p, &q).unwrap();
            let b = hyperbolic_distance(&q, &p).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!(a >= 0.0);
        }

        #[test]
        fn triangle_inequality(p in point(), q in point(), r in point()) {
            let pq = hyperbolic_distance(&p, &q).unwrap();
            let qr = hyperbolic_distance(&q, &r).unwrap();
            let pr = hyperbolic_distance(&p, &r).unwrap();
            prop_assert!(pr <= pq + qr + 1e-10);
        }

        #[test]
        fn distance_matches_arccosh(p in point(), q in point()) {
            let d2 = (p.x - q.x).powi(2) + (p.y - q.y).powi(2) + (p.h - q.h).powi(2);
            let c = 1.0 + d2 / (2.0 * p.h * q.h);
            let d = hyperbolic_distance(&p, &q).unwrap();
            prop_assert!((d.cosh() - c).abs() <= 1e-10 * c);
        }
    }
}
