//! Discrete isometry groups of H² and H³ given by Möbius generators: orbit
//! enumeration over reduced words, Poincaré series, orbit-growth estimates of
//! the critical exponent, the quotient wave kernel and the σ-integral bound.

use std::io::Write;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance_unchecked, Family, ModelPoint, SpaceParams};
use crate::kernels::{linear_fit, wave_kernel, WaveKernelSpec};
use crate::quadrature::integrate_real;
use crate::transform::TransformOptions;

/// Element of SL(2,ℂ), acting on the upper half-space by Poincaré extension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mobius {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Mobius {
    pub fn identity() -> Self {
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        Mobius { a: o, b: z, c: z, d: o }
    }

    /// Normalized to determinant 1.
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det.norm() > 1e-300) || ![a, b, c, d].iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidGroup(format!("singular or non-finite matrix (det = {det})")));
        }
        let s = det.sqrt().inv();
        Ok(Mobius { a: a * s, b: b * s, c: c * s, d: d * s })
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let r = |x: f64| C64::new(x, 0.0);
        Self::new(r(a), r(b), r(c), r(d))
    }

    /// Loxodromic along the vertical axis with translation length ℓ.
    pub fn translation(ell: f64) -> Self {
        let e = (0.5 * ell).exp();
        Mobius { a: C64::new(e, 0.0), b: C64::new(0.0, 0.0), c: C64::new(0.0, 0.0), d: C64::new(1.0 / e, 0.0) }
    }

    pub fn inverse(&self) -> Self {
        Mobius { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn mul(&self, o: &Mobius) -> Self {
        Mobius {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn trace(&self) -> C64 {
        self.a + self.d
    }

    pub fn is_real(&self) -> bool {
        [self.a, self.b, self.c, self.d].iter().all(|z| z.im == 0.0)
    }

    /// (z, h) ↦ (((az+b) conj(cz+d) + a conj(c) h²) / D, h / D),
    /// D = |cz+d|² + |c|² h².
    pub fn act(&self, p: &ModelPoint) -> ModelPoint {
        let z = C64::new(p.x, p.y);
        let w = self.c * z + self.d;
        let h2 = p.h * p.h;
        let den = w.norm_sqr() + self.c.norm_sqr() * h2;
        let zn = ((self.a * z + self.b) * w.conj() + self.a * self.c.conj() * h2) / den;
        ModelPoint { x: zn.re, y: zn.im, h: p.h / den }
    }

    /// Translation length 2 acosh(|tr|/2) for loxodromic elements with real trace.
    pub fn translation_length(&self) -> f64 {
        let t = self.trace();
        // |λ| of the larger eigenvalue λ + 1/λ = tr
        let disc = (t * t - 4.0).sqrt();
        let l1 = ((t + disc) * 0.5).norm();
        let l2 = ((t - disc) * 0.5).norm();
        2.0 * l1.max(l2).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    Cyclic,
    Schottky,
    FreeFuchsian,
}

impl std::str::FromStr for GroupKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cyclic" => Ok(GroupKind::Cyclic),
            "schottky" => Ok(GroupKind::Schottky),
            "freefuchsian" | "free_fuchsian" | "lattice" => Ok(GroupKind::FreeFuchsian),
            _ => Err(Error::InvalidGroup(format!("unknown group kind '{s}'"))),
        }
    }
}

/// A free group on the given generators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupModel {
    pub kind: GroupKind,
    pub generators: Vec<Mobius>,
    pub model_dim: u32,
}

fn isometric_circle(g: &Mobius) -> Option<(C64, f64)> {
    if g.c.norm() == 0.0 {
        return None;
    }
    Some((-g.d / g.c, 1.0 / g.c.norm()))
}

impl GroupModel {
    /// Validates torsion-freeness of the generators and, for Schottky groups,
    /// disjointness of the isometric circles. Parabolic generators are only
    /// accepted for `FreeFuchsian`.
    pub fn new(kind: GroupKind, generators: Vec<Mobius>, model_dim: u32) -> Result<Self> {
        if !(model_dim == 2 || model_dim == 3) {
            return Err(Error::InvalidGroup(format!("model_dim must be 2 or 3 (got {model_dim})")));
        }
        if generators.is_empty() {
            return Err(Error::InvalidGroup("at least one generator is required".into()));
        }
        if kind == GroupKind::Cyclic && generators.len() != 1 {
            return Err(Error::InvalidGroup("a cyclic group has exactly one generator".into()));
        }
        for (i, g) in generators.iter().enumerate() {
            if model_dim == 2 && !g.is_real() {
                return Err(Error::InvalidGroup(format!("generator {i} is not real; H² needs PSL(2,R)")));
            }
            let t = g.trace();
            let elliptic = t.im.abs() < 1e-12 && t.re.abs() < 2.0 - 1e-12;
            if elliptic {
                return Err(Error::InvalidGroup(format!("generator {i} is elliptic (trace {t})")));
            }
            let parabolic = t.im.abs() < 1e-12 && (t.re.abs() - 2.0).abs() <= 1e-12;
            if parabolic && kind != GroupKind::FreeFuchsian {
                return Err(Error::InvalidGroup(format!("generator {i} is parabolic (|trace| = 2)")));
            }
        }
        if kind == GroupKind::Schottky {
            let mut circles = Vec::new();
            for (i, g) in generators.iter().enumerate() {
                for h in [*g, g.inverse()] {
                    circles.push(isometric_circle(&h).ok_or_else(|| {
                        Error::InvalidGroup(format!("generator {i} fixes ∞; isometric circles undefined"))
                    })?);
                }
            }
            for i in 0..circles.len() {
                for j in i + 1..circles.len() {
                    let (c1, r1) = circles[i];
                    let (c2, r2) = circles[j];
                    if (c1 - c2).norm() <= r1 + r2 {
                        return Err(Error::InvalidGroup(format!("isometric circles {i} and {j} intersect")));
                    }
                }
            }
        }
        Ok(GroupModel { kind, generators, model_dim })
    }

    /// ⟨γ⟩ with γ a translation of length ℓ along the vertical axis.
    pub fn cyclic(ell: f64, model_dim: u32) -> Result<Self> {
        if !(ell > 0.0) {
            return Err(Error::InvalidGroup(format!("translation length must be positive (got {ell})")));
        }
        Self::new(GroupKind::Cyclic, vec![Mobius::translation(ell)], model_dim)
    }

    /// Two Fuchsian generators with isometric circles of radius 0.1 centred
    /// at ±10 and ±5.
    pub fn schottky_example() -> Result<Self> {
        let g1 = Mobius::real(100.0, 999.9, 10.0, 100.0)?;
        let g2 = Mobius::real(50.0, 249.9, 10.0, 50.0)?;
        Self::new(GroupKind::Schottky, vec![g1, g2], 2)
    }

    /// Γ(2): free on z ↦ z+2 and z ↦ z/(2z+1), index 6 in PSL(2,ℤ).
    pub fn principal_congruence_two() -> Result<Self> {
        Self::new(GroupKind::FreeFuchsian, vec![Mobius::real(1.0, 2.0, 0.0, 1.0)?, Mobius::real(1.0, 0.0, 2.0, 1.0)?], 2)
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    /// 2ρ of the ambient real hyperbolic space.
    pub fn two_rho(&self) -> f64 {
        self.model_dim as f64 - 1.0
    }

    pub fn space(&self) -> SpaceParams {
        SpaceParams::real(self.model_dim).expect("dimension 2 or 3")
    }

    /// Letters 0..2r: generator i is 2i, its inverse 2i+1.
    fn letters(&self) -> Vec<Mobius> {
        self.generators.iter().flat_map(|g| [*g, g.inverse()]).collect()
    }

    /// Number of reduced words of length ≤ L.
    pub fn word_count(&self, max_len: u32) -> u128 {
        let r = self.rank() as u128;
        if r == 1 {
            return 1 + 2 * max_len as u128;
        }
        let q = 2 * r - 1;
        let mut total: u128 = 1;
        let mut shell: u128 = 2 * r;
        for _ in 0..max_len {
            total = total.saturating_add(shell);
            shell = shell.saturating_mul(q);
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitEntry {
    /// Word id: base-(2r+1) digits (letter+1), first letter least significant;
    /// for rank 1 the zigzag code of the exponent.
    pub id: u64,
    pub length: u32,
    pub distance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitEnumeration {
    pub x: ModelPoint,
    pub y: ModelPoint,
    pub max_len: u32,
    pub rank: usize,
    pub entries: Vec<OrbitEntry>,
    /// min distance over words of length exactly L: every point with a
    /// smaller distance has been enumerated (for ping-pong geometries).
    pub complete_radius: f64,
}

/// Default cap on the number of enumerated words.
pub const WORD_CAP: u128 = 10_000_000;

fn dfs(
    letters: &[Mobius],
    prefix: Mobius,
    last: usize,
    depth: u32,
    id: u64,
    radix: u64,
    scale: u64,
    max_len: u32,
    x: &ModelPoint,
    y: &ModelPoint,
    out: &mut Vec<OrbitEntry>,
) {
    if depth == max_len {
        return;
    }
    for (k, g) in letters.iter().enumerate() {
        if k == (last ^ 1) {
            continue;
        }
        let m = prefix.mul(g);
        let wid = id + (k as u64 + 1) * scale;
        out.push(OrbitEntry { id: wid, length: depth + 1, distance: distance_unchecked(x, &m.act(y)) });
        dfs(letters, m, k, depth + 1, wid, radix, scale.wrapping_mul(radix), max_len, x, y, out);
    }
}

/// All reduced words of length ≤ L with d(x, γy).
pub fn enumerate_orbit(g: &GroupModel, x: &ModelPoint, y: &ModelPoint, max_len: u32) -> Result<OrbitEnumeration> {
    enumerate_orbit_capped(g, x, y, max_len, WORD_CAP)
}

pub fn enumerate_orbit_capped(g: &GroupModel, x: &ModelPoint, y: &ModelPoint, max_len: u32, cap: u128) -> Result<OrbitEnumeration> {
    let count = g.word_count(max_len);
    if count > cap {
        return Err(Error::WordCountExplosion { count, cap });
    }
    for p in [x, y] {
        if !(p.h > 0.0) || (g.model_dim == 2 && p.y != 0.0) {
            return Err(Error::Domain(format!("point {p:?} is not in the model of dimension {}", g.model_dim)));
        }
    }
    let letters = g.letters();
    let r = g.rank();
    let mut entries = vec![OrbitEntry { id: 0, length: 0, distance: distance_unchecked(x, y) }];
    if r == 1 {
        let step = [letters[0], letters[1]];
        for (sgn, m) in step.iter().enumerate() {
            let mut acc = Mobius::identity();
            for k in 1..=max_len as u64 {
                acc = acc.mul(m);
                // zigzag: +k → 2k-1, -k → 2k
                let id = if sgn == 0 { 2 * k - 1 } else { 2 * k };
                entries.push(OrbitEntry { id, length: k as u32, distance: distance_unchecked(x, &acc.act(y)) });
            }
        }
    } else {
        let radix = 2 * r as u64 + 1;
        if (max_len as f64) * (radix as f64).log2() >= 63.0 {
            return Err(Error::WordCountExplosion { count, cap: 1u128 << 63 });
        }
        let branches: Vec<Vec<OrbitEntry>> = (0..letters.len())
            .into_par_iter()
            .map(|k| {
                let mut out = Vec::new();
                if max_len == 0 {
                    return out;
                }
                let m = letters[k];
                let wid = k as u64 + 1;
                out.push(OrbitEntry { id: wid, length: 1, distance: distance_unchecked(x, &m.act(y)) });
                dfs(&letters, m, k, 1, wid, radix, radix, max_len, x, y, &mut out);
                out
            })
            .collect();
        for b in branches {
            entries.extend(b);
        }
    }
    check_discrete(g, &letters, y)?;
    let complete_radius = entries
        .iter()
        .filter(|e| e.length == max_len && max_len > 0)
        .map(|e| e.distance)
        .fold(f64::INFINITY, f64::min);
    Ok(OrbitEnumeration { x: *x, y: *y, max_len, rank: r, entries, complete_radius })
}

/// Two distinct words of length ≤ 2 moving y to within 1e-9 of each other
/// indicate a relation or a non-discrete group.
fn check_discrete(g: &GroupModel, letters: &[Mobius], y: &ModelPoint) -> Result<()> {
    let mut words: Vec<(String, Mobius)> = vec![("e".into(), Mobius::identity())];
    let name = |k: usize| {
        let c = (b'a' + (k / 2) as u8) as char;
        if k % 2 == 1 { c.to_ascii_uppercase() } else { c }
    };
    for (k, m) in letters.iter().enumerate() {
        words.push((name(k).to_string(), *m));
        for (l, n) in letters.iter().enumerate() {
            if l != (k ^ 1) {
                words.push((format!("{}{}", name(k), name(l)), m.mul(n)));
            }
        }
    }
    let pts: Vec<ModelPoint> = words.iter().map(|(_, m)| m.act(y)).collect();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = distance_unchecked(&pts[i], &pts[j]);
            if d < 1e-9 {
                return Err(Error::NonDiscrete(format!(
                    "words {} and {} move the basepoint to the same point (d = {d:.1e}); model {}",
                    words[i].0,
                    words[j].0,
                    g.model_dim
                )));
            }
        }
    }
    Ok(())
}

/// Letters of a word id, e.g. "aB" for g₁ g₂⁻¹.
pub fn word_string(id: u64, rank: usize) -> String {
    if id == 0 {
        return "e".into();
    }
    if rank == 1 {
        let k = id.div_ceil(2);
        let c = if id % 2 == 1 { "a" } else { "A" };
        return if k == 1 { c.into() } else { format!("{c}^{k}") };
    }
    let radix = 2 * rank as u64 + 1;
    let mut s = String::new();
    let mut v = id;
    while v > 0 {
        let k = (v % radix - 1) as usize;
        let c = (b'a' + (k / 2) as u8) as char;
        s.push(if k % 2 == 1 { c.to_ascii_uppercase() } else { c });
        v /= radix;
    }
    s
}

pub fn write_orbit_csv<W: Write>(o: &OrbitEnumeration, w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["word", "length", "distance"])?;
    for e in &o.entries {
        wr.write_record([word_string(e.id, o.rank), e.length.to_string(), format!("{:.17e}", e.distance)])?;
    }
    wr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincarePartial {
    pub sum: f64,
    /// Contribution of the words of length exactly L.
    pub last_shell: f64,
}

/// Σ e^{-s d(x, γy)} over the enumerated words.
pub fn poincare_partial(orbit: &OrbitEnumeration, s: f64) -> Result<PoincarePartial> {
    if !(s > 0.0) {
        return Err(Error::Domain(format!("s must be positive (got {s})")));
    }
    let mut sum = 0.0;
    let mut last = 0.0;
    for e in &orbit.entries {
        let v = (-s * e.distance).exp();
        sum += v;
        if e.length == orbit.max_len {
            last += v;
        }
    }
    Ok(PoincarePartial { sum, last_shell: last })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CriticalExponent {
    pub delta_hat: f64,
    /// Half-width of the confidence interval.
    pub ci: f64,
    /// Fit window [R_c/2, R_c].
    pub window: (f64, f64),
    pub warning: Option<String>,
}

/// Orbit count N(R) = #{γ : d(x, γy) ≤ R}.
pub fn orbit_count(orbit: &OrbitEnumeration, r: f64) -> usize {
    orbit.entries.iter().filter(|e| e.distance <= r).count()
}

/// δ̂ = slope of ln N(R) on [R_c/2, R_c].
pub fn critical_exponent_estimate(orbit: &OrbitEnumeration) -> Result<CriticalExponent> {
    let rc = orbit.complete_radius;
    if !rc.is_finite() || rc <= 0.0 {
        return Err(Error::InsufficientData("no complete radius (empty last shell)".into()));
    }
    let mut d: Vec<f64> = orbit.entries.iter().map(|e| e.distance).collect();
    d.sort_by(|a, b| a.total_cmp(b));
    let count = |r: f64| d.partition_point(|&v| v <= r);
    let (lo, hi) = (0.5 * rc, rc);
    let m = 64;
    let rs: Vec<f64> = (0..=m).map(|i| lo + (hi - lo) * i as f64 / m as f64).collect();
    let ns: Vec<usize> = rs.iter().map(|&r| count(r)).collect();
    let mut distinct = ns.clone();
    distinct.dedup();
    if distinct.len() < 5 || ns[0] == 0 {
        return Err(Error::InsufficientData(format!(
            "only {} distinct orbit counts in [{lo:.2}, {hi:.2}]",
            distinct.len()
        )));
    }
    let ys: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let (slope, _, se) = linear_fit(&rs, &ys);
    // a step of N by one point at R_c/2 moves the slope by about 2/(R_c N)
    let ci = 2.0 * se + 2.0 / (rc * ns[0] as f64);
    let in_window = d.iter().filter(|&&v| v > lo && v <= hi).count();
    let from_last = orbit.entries.iter().filter(|e| e.length == orbit.max_len && e.distance > lo && e.distance <= hi).count();
    let warning = (in_window > 0 && 2 * from_last > in_window)
        .then(|| format!("{from_last} of {in_window} points in the fit window come from the last shell"));
    Ok(CriticalExponent { delta_hat: slope.max(0.0), ci, window: (lo, hi), warning })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GroupClassification {
    pub delta_hat: f64,
    pub ci: f64,
    pub two_rho: f64,
    /// None when the interval straddles 2ρ.
    pub delta_lt_2rho: Option<bool>,
    pub ct_flag: bool,
    pub divergence_note: Option<String>,
}

/// δ̂ against 2ρ; convergence type is recorded from the caller, never inferred.
pub fn classify(g: &GroupModel, est: &CriticalExponent, ct: Option<bool>, family: Family) -> GroupClassification {
    let two_rho = g.two_rho();
    let delta_lt_2rho = if est.delta_hat + est.ci < two_rho {
        Some(true)
    } else if est.delta_hat - est.ci >= two_rho {
        Some(false)
    } else {
        None
    };
    let divergence_note = matches!(family, Family::QuatHyp | Family::OctPlane)
        .then(|| "in quaternionic and octonionic spaces lattices are of divergence type".to_string());
    GroupClassification { delta_hat: est.delta_hat, ci: est.ci, two_rho, delta_lt_2rho, ct_flag: ct.unwrap_or(false), divergence_note }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuotientKernel {
    pub value: C64,
    /// Bound on the words beyond length L plus the numerical error of the sum.
    pub tail_bound: f64,
    /// Set when the bound relies on an asserted convergence type.
    pub conditional: bool,
    pub words: usize,
}

/// q̂_σ(x,y) = Σ_γ q_σ(d(x, γy)) over words of length ≤ L, with the tail
/// C_env ν (R_c+1)^{-3/2} e^{-2ρR_c} / (2ρ - δ_up): C_env is twice the sup of
/// |q_σ|(t+1)^{3/2}e^{2ρt} on [R_c, R_c+10] and ν the orbit density near R_c.
pub fn quotient_wave_kernel(
    g: &GroupModel,
    sigma: f64,
    x: &ModelPoint,
    y: &ModelPoint,
    max_len: u32,
    ct: bool,
    opts: &TransformOptions,
) -> Result<QuotientKernel> {
    let sp = g.space();
    let orbit = enumerate_orbit(g, x, y, max_len)?;
    let spec = WaveKernelSpec::new(sp, sigma, 1.0)?;
    let mut ds: Vec<f64> = orbit.entries.iter().map(|e| e.distance).collect();
    ds.sort_by(|a, b| a.total_cmp(b));
    ds.dedup_by(|a, b| (*a - *b).abs() <= 1e-13 * b.abs().max(1.0));
    let rc = orbit.complete_radius;
    let o = TransformOptions { t_max: opts.t_max.max(rc + 12.0).max(ds.last().copied().unwrap_or(0.0) + 1.0), ..*opts };
    let q = wave_kernel(&spec, &ds, &o)?;
    let lookup = |d: f64| {
        let i = ds.partition_point(|&v| v < d - 1e-13 * d.max(1.0));
        q.values()[i.min(ds.len() - 1)]
    };
    let value: C64 = orbit.entries.iter().map(|e| lookup(e.distance)).sum();
    // kernel quadrature error and rounding of the summation
    let numerical: f64 = orbit
        .entries
        .iter()
        .map(|e| {
            let i = ds.partition_point(|&v| v < e.distance - 1e-13 * e.distance.max(1.0)).min(ds.len() - 1);
            q.error[i] + 4.0 * f64::EPSILON * q.values()[i].norm()
        })
        .sum();
    let two_rho = g.two_rho();
    if max_len == 0 || !rc.is_finite() {
        return Ok(QuotientKernel { value, tail_bound: f64::INFINITY, conditional: false, words: orbit.entries.len() });
    }
    // growth rate of the orbit near R_c
    let delta_up = if g.rank() == 1 {
        0.0
    } else {
        let e = critical_exponent_estimate(&orbit)?;
        e.delta_hat + e.ci
    };
    if delta_up >= two_rho {
        if !ct {
            return Err(Error::TailUnbounded(format!(
                "orbit growth {delta_up:.3} ≥ 2ρ = {two_rho} without an asserted convergence type"
            )));
        }
        return Ok(QuotientKernel { value, tail_bound: f64::INFINITY, conditional: true, words: orbit.entries.len() });
    }
    let w = (0.25 * rc).max(1.0).min(rc);
    let cnt = orbit.entries.iter().filter(|e| e.distance > rc - w && e.distance <= rc).count() as f64;
    let nu = if delta_up > 0.0 { cnt * delta_up / (1.0 - (-delta_up * w).exp()) } else { cnt / w };
    let probe: Vec<f64> = (0..=20).map(|i| rc + 0.5 * i as f64).collect();
    let qp = wave_kernel(&spec, &probe, &o)?;
    let c_env = 2.0
        * probe
            .iter()
            .zip(qp.values())
            .map(|(&t, v)| v.norm() * (t + 1.0).powf(1.5) * (two_rho * t).exp())
            .fold(0.0, f64::max);
    let tail = c_env * nu * (rc + 1.0).powf(-1.5) * (-two_rho * rc).exp() / (two_rho - delta_up) + numerical;
    Ok(QuotientKernel { value, tail_bound: tail, conditional: false, words: orbit.entries.len() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormBound {
    /// c = Re β - (n-1)|1/2 - 1/p|.
    pub exponent: f64,
    pub finite: bool,
    /// ∫₀¹ σ^{c-1} dσ = 1/c.
    pub first: f64,
    /// ∫₁^∞ σ^{Re β - 1} e^{-k_p σ} dσ.
    pub second: f64,
    pub value: f64,
}

/// ∫₀¹ σ^{Re β-1} σ^{(1-n)(1/2-1/p)} dσ + ∫₁^∞ σ^{Re β-1} e^{-k_p σ} dσ.
pub fn theorem3_norm_bound(n: u32, p: f64, beta: C64, k_p: f64) -> Result<NormBound> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("p must lie in (1, inf) (got {p})")));
    }
    if !(k_p > 0.0) {
        return Err(Error::Domain(format!("k_p must be positive (got {k_p})")));
    }
    let c = beta.re - (n as f64 - 1.0) * (1.0 / p - 0.5).abs();
    let b = beta.re;
    let second = {
        // σ = 1 + u, panels up to where e^{-k u} (1+u)^{b-1} is negligible
        let u_end = (50.0 + (b - 1.0).max(0.0) * (1.0 + 50.0 / k_p).ln()) / k_p;
        integrate_real(|u: f64| (1.0 + u).powf(b - 1.0) * (-k_p * (1.0 + u)).exp(), 0.0, u_end, 1e-300, 1e-13)?.0
    };
    if !(c > 0.0) {
        return Ok(NormBound { exponent: c, finite: false, first: f64::INFINITY, second, value: f64::INFINITY });
    }
    let first = 1.0 / c;
    Ok(NormBound { exponent: c, finite: true, first, second, value: first + second })
}
