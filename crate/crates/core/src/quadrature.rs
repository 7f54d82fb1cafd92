//! Gauss rules and panel integration.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::special::gamma::log_gamma_unchecked;

/// Nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Nodes and weights mapped to [a, b].
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (c + h * x, h * w))
    }
}

pub fn gauss_legendre(n: usize) -> GaussRule {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub fn gl16() -> &'static GaussRule {
    static R: OnceLock<GaussRule> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(16))
}

pub fn gl32() -> &'static GaussRule {
    static R: OnceLock<GaussRule> = OnceLock::new();
    R.get_or_init(|| gauss_legendre(32))
}

/// Gauss–Jacobi rule for the weight (1-x)^alpha (1+x)^beta on [-1, 1]
/// (Golub–Welsch).
pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<GaussRule> {
    if !(alpha > -1.0 && beta > -1.0) {
        return Err(Error::Domain(format!("Gauss-Jacobi needs alpha, beta > -1 (got {alpha}, {beta})")));
    }
    let ab = alpha + beta;
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + ab;
        let diag = if k == 0 {
            (beta - alpha) / (ab + 2.0)
        } else {
            (beta * beta - alpha * alpha) / (s * (s + 2.0))
        };
        j[(k, k)] = diag;
        if k + 1 < n {
            let k1 = kf + 1.0;
            let s1 = 2.0 * k1 + ab;
            let num = 4.0 * k1 * (k1 + alpha) * (k1 + beta) * (k1 + ab);
            let den = s1 * s1 * (s1 + 1.0) * (s1 - 1.0);
            let off = (num / den).sqrt();
            j[(k, k + 1)] = off;
            j[(k + 1, k)] = off;
        }
    }
    let eig = SymmetricEigen::new(j);
    let mu0 = ((ab + 1.0) * std::f64::consts::LN_2
        + log_gamma_unchecked(C64::new(alpha + 1.0, 0.0)).re
        + log_gamma_unchecked(C64::new(beta + 1.0, 0.0)).re
        - log_gamma_unchecked(C64::new(ab + 2.0, 0.0)).re)
        .exp();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    })
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
pub(crate) const XGK21: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
pub(crate) const WGK21: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
pub(crate) const WG10: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// The 21 Kronrod nodes on [-1,1] with Kronrod and embedded Gauss weights
/// (Gauss weight 0 on the Kronrod-only nodes).
pub(crate) fn kronrod21() -> &'static [(f64, f64, f64); 21] {
    static R: OnceLock<[(f64, f64, f64); 21]> = OnceLock::new();
    R.get_or_init(|| {
        let mut out = [(0.0, 0.0, 0.0); 21];
        let mut idx = 0;
        for j in 0..10 {
            let wg = if j % 2 == 1 { WG10[j / 2] } else { 0.0 };
            out[idx] = (-XGK21[j], WGK21[j], wg);
            out[idx + 1] = (XGK21[j], WGK21[j], wg);
            idx += 2;
        }
        out[20] = (0.0, WGK21[10], 0.0);
        out
    })
}

/// One Gauss–Kronrod 21 panel: (Kronrod value, |Kronrod - Gauss|).
pub fn gk21<F: FnMut(f64) -> C64>(mut f: F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = C64::new(0.0, 0.0);
    let mut g = C64::new(0.0, 0.0);
    for &(x, wk, wg) in kronrod21() {
        let v = f(c + h * x);
        k += v * wk;
        g += v * wg;
    }
    (k * h, ((k - g) * h).norm())
}

/// Globally adaptive Gauss–Kronrod integration on [a, b].
pub fn integrate_adaptive<F: FnMut(f64) -> C64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Result<(C64, f64)> {
    if a == b {
        return Ok((C64::new(0.0, 0.0), 0.0));
    }
    let mut panels: Vec<(f64, f64, C64, f64)> = Vec::new();
    let (v, e) = gk21(&mut f, a, b);
    panels.push((a, b, v, e));
    loop {
        let total: C64 = panels.iter().map(|p| p.2).sum();
        let err: f64 = panels.iter().map(|p| p.3).sum();
        if err <= abs_tol.max(rel_tol * total.norm()) {
            return Ok((total, err));
        }
        if panels.len() >= max_panels {
            return Err(Error::NonConvergence { what: "adaptive quadrature", iterations: max_panels });
        }
        let (i, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("nonempty");
        let (pa, pb, _, _) = panels.swap_remove(i);
        let m = 0.5 * (pa + pb);
        let (v1, e1) = gk21(&mut f, pa, m);
        let (v2, e2) = gk21(&mut f, m, pb);
        panels.push((pa, m, v1, e1));
        panels.push((m, pb, v2, e2));
    }
}

/// Real-valued convenience wrapper around [`integrate_adaptive`].
pub fn integrate_real<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> Result<(f64, f64)> {
    let (v, e) = integrate_adaptive(|x| C64::new(f(x), 0.0), a, b, abs_tol, rel_tol, 20_000)?;
    Ok((v.re, e))
}

/// Composite 16-point Gauss–Legendre over consecutive `edges`.
pub fn composite_gl16<F: FnMut(f64) -> C64>(mut f: F, edges: &[f64]) -> C64 {
    let rule = gl16();
    let mut s = C64::new(0.0, 0.0);
    for w in edges.windows(2) {
        for (x, wt) in rule.mapped(w[0], w[1]) {
            s += f(x) * wt;
        }
    }
    s
}

/// 6-point Lagrange interpolation on sorted nodes (nearest stencil).
pub fn lagrange6(nodes: &[f64], values: &[C64], x: f64) -> C64 {
    let n = nodes.len();
    debug_assert_eq!(n, values.len());
    if n == 0 {
        return C64::new(0.0, 0.0);
    }
    if n == 1 {
        return values[0];
    }
    let idx = nodes.partition_point(|&t| t < x);
    let width = 6.min(n);
    let lo = idx.saturating_sub(width / 2).min(n - width);
    let mut acc = C64::new(0.0, 0.0);
    for i in lo..lo + width {
        let mut l = 1.0;
        for j in lo..lo + width {
            if i != j {
                l *= (x - nodes[j]) / (nodes[i] - nodes[j]);
            }
        }
        acc += values[i] * l;
    }
    acc
}
