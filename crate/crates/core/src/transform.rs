//! Forward and inverse spherical transforms of radial functions.
//!
//! Normalization: Hf(λ) = ∫ f(t) φ_λ(t) J(t) dt with J the Cartan density,
//! and f(t) = C_X ∫₀^∞ Hf(λ) φ_λ(t) |c(λ)|⁻² dλ with C_X = 1/(2π) for every
//! rank-one space (J = (2 sinh t)^{2a+1} (2 cosh t)^{2b+1} in Jacobi
//! parameters). [`calibrate`] checks the constant numerically.
//!
//! The inverse transform has two routes.
//! - Direct: Gauss–Kronrod panels on the real axis up to a cut Λ, found by
//!   scanning |m(λ)| e^{-ελ²} |c(λ)|⁻².
//! - Contour: for symbols analytic in a strip and t away from the origin,
//!   κ(t) = C_X ∫_ℝ m(λ) Φ_λ(t) / c(-λ) dλ with Φ_λ the Harish-Chandra
//!   function, moved onto λ = μ + i(y₀ + |μ|/2). The integrand then decays
//!   exponentially in |μ| and the e^{-2ρt}-small kernel is obtained without
//!   cancellation.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{log_cartan_density, SpaceParams};
use crate::quadrature::{gl16, kronrod21, lagrange6};
use crate::special::cfunc::{c_function, inv_c_minus, log_plancherel_density, plancherel_density};
use crate::special::spherical::{harish_chandra_phi, phi_real_with_c};

/// Inversion constant C_X; the same for every rank-one space.
pub const INVERSION_CONSTANT: f64 = 1.0 / (2.0 * PI);

/// Sampled radial function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub t_nodes: Vec<f64>,
    pub values: Vec<C64>,
    pub t_max: f64,
}

/// Sampled even spectral symbol on λ ≥ 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralGrid {
    pub lambda_nodes: Vec<f64>,
    pub values: Vec<C64>,
    pub lambda_max: f64,
}

fn check_nodes(nodes: &[f64], what: &str) -> Result<()> {
    if nodes.is_empty() {
        return Err(Error::Domain(format!("{what}: no nodes")));
    }
    if nodes.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(Error::Domain(format!("{what}: nodes must be finite and nonnegative")));
    }
    if nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(format!("{what}: nodes must be strictly increasing")));
    }
    Ok(())
}

fn write_csv<W: Write>(w: W, head: &str, nodes: &[f64], values: &[C64]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record([head, "re", "im"])?;
    for (x, v) in nodes.iter().zip(values) {
        wr.write_record(&[format!("{x:.17e}"), format!("{:.17e}", v.re), format!("{:.17e}", v.im)])?;
    }
    wr.flush()?;
    Ok(())
}

fn read_csv<R: Read>(r: R) -> Result<(Vec<f64>, Vec<C64>)> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let get = |k: usize| -> Result<f64> {
            rec.get(k)
                .ok_or_else(|| Error::Domain(format!("row {}: missing column {k}", i + 2)))?
                .parse::<f64>()
                .map_err(|e| Error::Domain(format!("row {}: {e}", i + 2)))
        };
        nodes.push(get(0)?);
        values.push(C64::new(get(1)?, get(2)?));
    }
    Ok((nodes, values))
}

impl RadialGrid {
    pub fn new(t_nodes: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        check_nodes(&t_nodes, "RadialGrid")?;
        if t_nodes.len() != values.len() {
            return Err(Error::Domain("RadialGrid: nodes and values differ in length".into()));
        }
        let t_max = *t_nodes.last().expect("nonempty");
        Ok(RadialGrid { t_nodes, values, t_max })
    }

    pub fn from_fn<F: Fn(f64) -> C64>(t_nodes: Vec<f64>, f: F) -> Result<Self> {
        let values = t_nodes.iter().map(|&t| f(t)).collect();
        Self::new(t_nodes, values)
    }

    /// Uniform grid 0, h, 2h, ..., t_max.
    pub fn uniform(t_max: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| t_max * i as f64 / n as f64).collect()
    }

    /// Six-point Lagrange interpolation; zero outside [0, t_max].
    pub fn interpolate(&self, t: f64) -> C64 {
        if t < 0.0 || t > self.t_max {
            return C64::new(0.0, 0.0);
        }
        lagrange6(&self.t_nodes, &self.values, t)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_csv(w, "t", &self.t_nodes, &self.values)
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let (n, v) = read_csv(r)?;
        Self::new(n, v)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

impl SpectralGrid {
    pub fn new(lambda_nodes: Vec<f64>, values: Vec<C64>) -> Result<Self> {
        check_nodes(&lambda_nodes, "SpectralGrid")?;
        if lambda_nodes.len() != values.len() {
            return Err(Error::Domain("SpectralGrid: nodes and values differ in length".into()));
        }
        let lambda_max = *lambda_nodes.last().expect("nonempty");
        Ok(SpectralGrid { lambda_nodes, values, lambda_max })
    }

    /// Interpolated value at |λ|; zero beyond lambda_max.
    pub fn interpolate(&self, lambda: f64) -> C64 {
        let x = lambda.abs();
        if x > self.lambda_max {
            return C64::new(0.0, 0.0);
        }
        lagrange6(&self.lambda_nodes, &self.values, x)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        write_csv(w, "lambda", &self.lambda_nodes, &self.values)
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let (n, v) = read_csv(r)?;
        Self::new(n, v)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }
}

/// An even spectral symbol.
pub trait Symbol: Sync {
    /// m(λ). Only real λ are used unless [`Symbol::far_from`] is set.
    fn eval(&self, lambda: C64) -> C64;

    /// Half-width of a strip |Im λ| < strip in which m is analytic.
    fn strip(&self) -> f64 {
        0.0
    }

    /// Radii t ≥ far_from may use the contour route. Requires m analytic on
    /// {0 ≤ Im λ ≤ y₀ + |Re λ|/2} minus nothing, and |m(λ) Φ_λ(t)| decaying
    /// along that contour.
    fn far_from(&self) -> Option<f64> {
        None
    }

    /// |d arg m / dλ| at real λ, used to size quadrature panels.
    fn phase_rate(&self, _lambda: f64) -> f64 {
        0.0
    }

    /// Height y₀ of the contour at Re λ = 0 for radius t. The default sits
    /// just below the first singularity; entire symbols may go higher.
    fn contour_height(&self, _t: f64, rho: f64) -> f64 {
        0.95 * self.strip().min(rho)
    }
}

impl Symbol for SpectralGrid {
    fn eval(&self, lambda: C64) -> C64 {
        self.interpolate(lambda.re)
    }
}

/// A symbol given by a closure.
pub struct FnSymbol<F> {
    f: F,
    strip: f64,
    far_from: Option<f64>,
    rate: f64,
}

impl<F: Fn(C64) -> C64 + Sync> FnSymbol<F> {
    /// Known only on the real axis.
    pub fn real_axis(f: F) -> Self {
        FnSymbol { f, strip: 0.0, far_from: None, rate: 0.0 }
    }

    /// Analytic in the upper region swept by the contour route.
    pub fn analytic(f: F, strip: f64, far_from: Option<f64>, phase_rate: f64) -> Self {
        FnSymbol { f, strip, far_from, rate: phase_rate }
    }
}

impl<F: Fn(C64) -> C64 + Sync> Symbol for FnSymbol<F> {
    fn eval(&self, lambda: C64) -> C64 {
        (self.f)(lambda)
    }
    fn strip(&self) -> f64 {
        self.strip
    }
    fn far_from(&self) -> Option<f64> {
        self.far_from
    }
    fn phase_rate(&self, _lambda: f64) -> f64 {
        self.rate
    }
}

/// m(λ) = e^{-aλ²}.
#[derive(Debug, Clone, Copy)]
pub struct GaussianSymbol {
    pub a: f64,
}

impl Symbol for GaussianSymbol {
    fn eval(&self, lambda: C64) -> C64 {
        (-self.a * lambda * lambda).exp()
    }
    fn strip(&self) -> f64 {
        f64::INFINITY
    }
    fn far_from(&self) -> Option<f64> {
        Some(0.5)
    }
    // saddle point of e^{-aλ² + iλt}
    fn contour_height(&self, t: f64, rho: f64) -> f64 {
        (0.95 * rho).max(t / (2.0 * self.a))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformOptions {
    pub lambda_max: f64,
    pub t_max: f64,
    pub tol: f64,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions { lambda_max: 200.0, t_max: 30.0, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForwardResult {
    pub grid: SpectralGrid,
    /// Estimated contribution of t > t_max.
    pub tail: f64,
}

fn t_panels(lambda: f64, t_end: f64) -> Vec<f64> {
    let h = 0.5f64.min(3.0 / lambda.abs().max(1e-300));
    let n = ((t_end / h).ceil() as usize).max(1);
    // keep the half-integers as edges so that breakpoints there are respected
    let per_half = ((0.5 / h).ceil() as usize).max(1);
    let halves = (t_end / 0.5).ceil() as usize;
    if (halves as f64 * 0.5 - t_end).abs() < 1e-12 {
        let m = halves * per_half;
        (0..=m).map(|i| t_end * i as f64 / m as f64).collect()
    } else {
        (0..=n).map(|i| t_end * i as f64 / n as f64).collect()
    }
}

fn forward_one<F: Fn(f64) -> C64>(sp: &SpaceParams, f: &F, lambda: f64, t_end: f64) -> Result<C64> {
    Ok(forward_with_floor(sp, f, lambda, t_end)?.0)
}

/// Hf(λ) and the rounding floor Σ|f φ J w| · 1e-16 of its quadrature.
fn forward_with_floor<F: Fn(f64) -> C64>(sp: &SpaceParams, f: &F, lambda: f64, t_end: f64) -> Result<(C64, f64)> {
    let c = if lambda != 0.0 { Some(c_function(sp, C64::new(lambda.abs(), 0.0))?) } else { None };
    let rule = gl16();
    let edges = t_panels(lambda, t_end);
    let mut s = C64::new(0.0, 0.0);
    let mut mag = 0.0;
    for w in edges.windows(2) {
        for (t, wt) in rule.mapped(w[0], w[1]) {
            let ph = phi_real_with_c(sp, lambda, c, t)?;
            let v = f(t) * (ph * (log_cartan_density(sp, t)).exp() * wt);
            mag += v.norm();
            s += v;
        }
    }
    Ok((s, 1e-16 * mag))
}

fn check_lambdas(lambdas: &[f64]) -> Result<()> {
    check_nodes(lambdas, "spectral nodes")
}

/// Hf at the given λ for f given by a closure supported in [0, t_end].
/// Panel edges include the multiples of 1/2, so piecewise definitions with
/// breakpoints there are integrated exactly.
pub fn forward_transform_fn<F: Fn(f64) -> C64 + Sync>(
    sp: &SpaceParams,
    f: F,
    t_end: f64,
    lambdas: &[f64],
) -> Result<SpectralGrid> {
    check_lambdas(lambdas)?;
    if !(t_end > 0.0) {
        return Err(Error::Domain(format!("support end must be positive (got {t_end})")));
    }
    let values: Result<Vec<C64>> = lambdas.par_iter().map(|&l| forward_one(sp, &f, l, t_end)).collect();
    SpectralGrid::new(lambdas.to_vec(), values?)
}

/// Hf(λ) = ∫₀^{t_max} f(t) φ_λ(t) J(t) dt for a sampled f.
pub fn forward_transform(
    sp: &SpaceParams,
    f: &RadialGrid,
    lambdas: &[f64],
    opts: &TransformOptions,
) -> Result<ForwardResult> {
    check_lambdas(lambdas)?;
    let t_end = f.t_max.min(opts.t_max);
    if !(t_end > 0.0) {
        return Err(Error::Domain("radial grid must extend beyond t = 0".into()));
    }
    // tail beyond t_end: |f φ₀ J| at the end times a unit decay length
    let last = f.interpolate(t_end).norm();
    let phi0 = phi_real_with_c(sp, 0.0, None, t_end)?;
    let tail = last * phi0 * log_cartan_density(sp, t_end).exp();
    let grid = forward_transform_fn(sp, |t| f.interpolate(t), t_end, lambdas)?;
    let scale = grid.values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1.0);
    if tail > opts.tol * scale {
        return Err(Error::TailTooLarge { tail, tol: opts.tol * scale });
    }
    Ok(ForwardResult { grid, tail })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Route {
    Direct,
    Contour,
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    node: usize,
    wk: C64,
    wg: C64,
    panel: u32,
}

/// Quadrature nodes and weights for κ(t) = Σ_j m(λ_j) e^{-ελ_j²} W_j(t),
/// built once and applied to any symbol with compatible decay.
#[derive(Debug, Clone)]
pub struct InversionPlan {
    pub ts: Vec<f64>,
    pub routes: Vec<Route>,
    pub nodes: Vec<C64>,
    /// Cut of the direct route (0 if no point uses it).
    pub lambda_cut: f64,
    rows: Vec<Vec<Entry>>,
}

/// Bend of the contour λ = μ + i(y₀ + BEND·|μ|).
const BEND: f64 = 0.5;
const MAX_PANELS: usize = 20_000;

fn direct_cut(sp: &SpaceParams, sym: &dyn Symbol, eps: f64, opts: &TransformOptions) -> Result<f64> {
    let step = 0.25;
    let n = (opts.lambda_max / step).ceil() as usize;
    let env_at = |i: usize| {
        let l = (i as f64 * step).min(opts.lambda_max);
        if l == 0.0 {
            return 0.0;
        }
        let m = sym.eval(C64::new(l, 0.0)).norm();
        if m == 0.0 {
            return 0.0;
        }
        (m.ln() - eps * l * l + log_plancherel_density(sp, l)).exp()
    };
    // scan in chunks; stop once a whole chunk lies below the threshold
    const CHUNK: usize = 40;
    let mut env: Vec<f64> = Vec::with_capacity(n + 1);
    let mut start = 0;
    let mut finished_early = false;
    while start <= n {
        let end = (start + CHUNK).min(n + 1);
        let part: Vec<f64> = (start..end).into_par_iter().map(env_at).collect();
        env.extend(part);
        let total: f64 = env.iter().sum::<f64>() * step;
        let quiet = (start..end).all(|i| env[i] * (1.0 + i as f64 * step) <= 1e-3 * opts.tol * total);
        start = end;
        if quiet && total > 0.0 && start > CHUNK {
            finished_early = true;
            break;
        }
    }
    let total: f64 = env.iter().sum::<f64>() * step;
    if total == 0.0 {
        return Ok(step);
    }
    let thresh = opts.tol * total;
    let bad = |i: usize| env[i] * (1.0 + i as f64 * step) > thresh;
    let last = env.len() - 1;
    if !finished_early && bad(last) {
        let l = last as f64 * step;
        return Err(Error::TailTooLarge { tail: env[last] * (1.0 + l) / total, tol: opts.tol });
    }
    let last_bad = (0..=last).rev().find(|&i| bad(i)).unwrap_or(0);
    Ok(((last_bad + 1) as f64 * step).min(opts.lambda_max))
}

fn direct_edges(cut: f64, t: f64, sym: &dyn Symbol) -> Vec<f64> {
    let mut edges = vec![0.0];
    let mut l = 0.0;
    while l < cut {
        let w = 1.0f64.min(4.0 / (t + sym.phase_rate(l) + 1e-300));
        l = (l + w).min(cut);
        edges.push(l);
    }
    edges
}

/// Contour panels on one side μ ≥ 0 (mirrored by the caller).
fn contour_edges(
    sp: &SpaceParams,
    sym: &dyn Symbol,
    t: f64,
    y0: f64,
    gap: f64,
    eps: f64,
    sign: f64,
) -> Result<Vec<f64>> {
    let mut edges = vec![0.0];
    let mut mu = 0.0;
    let mut peak = 0.0f64;
    let mut quiet = 0;
    for _ in 0..MAX_PANELS {
        let osc = t + sym.phase_rate(mu) + 1.0;
        let w = (4.0 / osc).min(1.0).min(0.25 * (mu * mu + gap * gap).sqrt());
        mu += w;
        edges.push(mu);
        let lam = C64::new(sign * mu, y0 + BEND * mu);
        let g = (sym.eval(lam) * (-eps * lam * lam).exp() * inv_c_minus(sp, lam)).norm()
            * (-(lam.im + sp.rho) * t).exp();
        if !g.is_finite() {
            return Err(Error::NonConvergence { what: "contour integrand (overflow)", iterations: edges.len() });
        }
        peak = peak.max(g);
        if g <= 1e-18 * peak {
            quiet += 1;
            if quiet >= 2 {
                return Ok(edges);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::NonConvergence { what: "contour integrand decay", iterations: MAX_PANELS })
}

pub fn build_plan(
    sp: &SpaceParams,
    sym: &dyn Symbol,
    ts: &[f64],
    eps_min: f64,
    opts: &TransformOptions,
) -> Result<InversionPlan> {
    check_nodes(ts, "radial nodes")?;
    if !(eps_min >= 0.0) {
        return Err(Error::Domain(format!("regularizer must be >= 0 (got {eps_min})")));
    }
    let strip = sym.strip();
    let routes: Vec<Route> = ts
        .iter()
        .map(|&t| match sym.far_from() {
            Some(r) if t >= r && strip > 0.0 => Route::Contour,
            _ => Route::Direct,
        })
        .collect();

    let mut nodes: Vec<C64> = Vec::new();
    let mut rows: Vec<Vec<Entry>> = vec![Vec::new(); ts.len()];
    let rule = kronrod21();

    // direct route: panels shared by all its points
    let direct_ts: Vec<usize> = (0..ts.len()).filter(|&i| routes[i] == Route::Direct).collect();
    let mut lambda_cut = 0.0;
    if !direct_ts.is_empty() {
        let cut = direct_cut(sp, sym, eps_min, opts)?;
        lambda_cut = cut;
        let t_big = direct_ts.iter().map(|&i| ts[i]).fold(0.0, f64::max);
        let edges = direct_edges(cut, t_big, sym);
        let mut lam_w: Vec<(f64, f64, f64, u32)> = Vec::new();
        for (p, w) in edges.windows(2).enumerate() {
            let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            for &(x, wk, wg) in rule.iter() {
                lam_w.push((c + h * x, wk * h, wg * h, p as u32));
            }
        }
        let base = nodes.len();
        nodes.extend(lam_w.iter().map(|x| C64::new(x.0, 0.0)));
        let cs: Vec<Option<C64>> = lam_w
            .par_iter()
            .map(|x| c_function(sp, C64::new(x.0, 0.0)).ok())
            .collect();
        let dens: Vec<f64> = lam_w.iter().map(|x| plancherel_density(sp, x.0)).collect();
        let per_t: Result<Vec<Vec<Entry>>> = direct_ts
            .par_iter()
            .map(|&i| {
                let t = ts[i];
                lam_w
                    .iter()
                    .enumerate()
                    .map(|(j, &(l, wk, wg, p))| {
                        let f = INVERSION_CONSTANT * dens[j] * phi_real_with_c(sp, l, cs[j], t)?;
                        Ok(Entry { node: base + j, wk: C64::new(f * wk, 0.0), wg: C64::new(f * wg, 0.0), panel: p })
                    })
                    .collect()
            })
            .collect();
        for (k, row) in per_t?.into_iter().enumerate() {
            rows[direct_ts[k]] = row;
        }
    }

    // contour route: nodes depend on t
    let contour: Vec<usize> = (0..ts.len()).filter(|&i| routes[i] == Route::Contour).collect();
    let built: Result<Vec<(Vec<C64>, Vec<(C64, C64, u32)>)>> = contour
        .par_iter()
        .map(|&i| {
            let t = ts[i];
            let y0 = sym.contour_height(t, sp.rho);
            let gap = if strip.is_finite() { (strip - y0).max(1e-3) } else { f64::INFINITY };
            let mut lams = Vec::new();
            let mut ws = Vec::new();
            let mut panel = 0u32;
            for sign in [1.0, -1.0] {
                let edges = contour_edges(sp, sym, t, y0, gap, eps_min, sign)?;
                let dl = C64::new(1.0, BEND * sign);
                for w in edges.windows(2) {
                    let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
                    for &(x, wk, wg) in rule.iter() {
                        let mu = c + h * x;
                        let lam = C64::new(sign * mu, y0 + BEND * mu);
                        let f = inv_c_minus(sp, lam) * harish_chandra_phi(sp, lam, t)? * dl * INVERSION_CONSTANT;
                        lams.push(lam);
                        ws.push((f * (wk * h), f * (wg * h), panel));
                    }
                    panel += 1;
                }
            }
            Ok((lams, ws))
        })
        .collect();
    for (k, (lams, ws)) in built?.into_iter().enumerate() {
        let base = nodes.len();
        nodes.extend(lams);
        rows[contour[k]] =
            ws.into_iter().enumerate().map(|(j, (wk, wg, panel))| Entry { node: base + j, wk, wg, panel }).collect();
    }
    Ok(InversionPlan { ts: ts.to_vec(), routes, nodes, lambda_cut, rows })
}

impl InversionPlan {
    /// Symbol values e^{-ελ²} m(λ) at every node.
    pub fn sample<F: Fn(C64) -> C64 + Sync>(&self, m: F, eps: f64) -> Vec<C64> {
        self.nodes
            .par_iter()
            .map(|&l| {
                let v = m(l);
                if eps == 0.0 {
                    v
                } else {
                    v * (-eps * l * l).exp()
                }
            })
            .collect()
    }

    /// κ(t) and a quadrature error estimate at every t from node samples.
    pub fn apply_samples(&self, samples: &[C64]) -> (Vec<C64>, Vec<f64>) {
        self.rows
            .par_iter()
            .map(|row| {
                let mut total = C64::new(0.0, 0.0);
                let mut err = 0.0;
                let mut k = C64::new(0.0, 0.0);
                let mut g = C64::new(0.0, 0.0);
                let mut cur = u32::MAX;
                for e in row {
                    if e.panel != cur {
                        total += k;
                        err += (k - g).norm();
                        k = C64::new(0.0, 0.0);
                        g = C64::new(0.0, 0.0);
                        cur = e.panel;
                    }
                    let v = samples[e.node];
                    k += v * e.wk;
                    g += v * e.wg;
                }
                total += k;
                err += (k - g).norm();
                // rounding floor
                let mag: f64 = row.iter().map(|e| (samples[e.node] * e.wk).norm()).sum();
                (total, err + 1e-15 * mag)
            })
            .unzip()
    }

    pub fn apply<F: Fn(C64) -> C64 + Sync>(&self, m: F, eps: f64) -> (Vec<C64>, Vec<f64>) {
        self.apply_samples(&self.sample(m, eps))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InverseResult {
    /// κ at the requested regularizer.
    pub kernel: RadialGrid,
    /// Quadrature error estimate per node.
    pub error: Vec<f64>,
    /// κ at ε/2, when ε > 0.
    pub half_eps: Option<RadialGrid>,
    /// 2κ(ε/2) - κ(ε), when ε > 0.
    pub extrapolated: Option<RadialGrid>,
    pub routes: Vec<Route>,
    pub lambda_cut: f64,
}

impl InverseResult {
    /// Best available values: the extrapolation if present.
    pub fn best(&self) -> &RadialGrid {
        self.extrapolated.as_ref().unwrap_or(&self.kernel)
    }
}

/// κ(t) = C_X ∫₀^∞ m(λ) e^{-ελ²} φ_λ(t) |c(λ)|⁻² dλ.
pub fn inverse_transform(
    sp: &SpaceParams,
    m: &dyn Symbol,
    ts: &[f64],
    eps: f64,
    opts: &TransformOptions,
) -> Result<InverseResult> {
    let eps_min = if eps > 0.0 { 0.5 * eps } else { 0.0 };
    let plan = build_plan(sp, m, ts, eps_min, opts)?;
    let (v, e) = plan.apply(|l| m.eval(l), eps);
    let kernel = RadialGrid::new(ts.to_vec(), v)?;
    let (half_eps, extrapolated, error) = if eps > 0.0 {
        let (vh, eh) = plan.apply(|l| m.eval(l), 0.5 * eps);
        let ex: Vec<C64> = vh.iter().zip(&kernel.values).map(|(h, f)| 2.0 * h - f).collect();
        let err = e.iter().zip(&eh).map(|(a, b)| a + 2.0 * b).collect();
        (Some(RadialGrid::new(ts.to_vec(), vh)?), Some(RadialGrid::new(ts.to_vec(), ex)?), err)
    } else {
        (None, None, e)
    };
    Ok(InverseResult { kernel, error, half_eps, extrapolated, routes: plan.routes, lambda_cut: plan.lambda_cut })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Calibration {
    pub constant: f64,
    /// max |f - inverse(forward f)| / max |f| for f = e^{-t²}.
    pub roundtrip_rel_err: f64,
    /// Least-squares ratio f / inverse(forward f); 1 when the constant is right.
    pub measured_ratio: f64,
}

/// Round trip of e^{-t²} through both transforms.
pub fn calibrate(sp: &SpaceParams) -> Result<Calibration> {
    let f = |t: f64| C64::new((-t * t).exp(), 0.0);
    let ts: Vec<f64> = (0..=40).map(|i| 0.1 * i as f64).collect();
    let (rt, _) = roundtrip(sp, &f, 7.0, &ts, &TransformOptions::default())?;
    let (mut num, mut den, mut err, mut top) = (0.0, 0.0, 0.0f64, 0.0f64);
    for (t, v) in ts.iter().zip(&rt) {
        let want = f(*t).re;
        num += want * v.re;
        den += v.re * v.re;
        err = err.max((v - want).norm());
        top = top.max(want.abs());
    }
    Ok(Calibration { constant: INVERSION_CONSTANT, roundtrip_rel_err: err / top, measured_ratio: num / den })
}

/// inverse(forward(f)) at ts for f supported in [0, t_end], with the
/// forward transform evaluated on demand at the inversion nodes.
pub fn roundtrip<F: Fn(f64) -> C64 + Sync>(
    sp: &SpaceParams,
    f: &F,
    t_end: f64,
    ts: &[f64],
    opts: &TransformOptions,
) -> Result<(Vec<C64>, Vec<f64>)> {
    // φ_λ carries absolute errors near 1e-16 φ₀, so |Hf| below 1e-14 H|f|(0)
    // is rounding noise; the Plancherel density would amplify it
    let abs_f = |t: f64| C64::new(f(t).norm(), 0.0);
    let noise = 1e-14 * forward_with_floor(sp, &abs_f, 0.0, t_end)?.0.re;
    let denoised = |l: f64| -> Result<C64> {
        let (v, floor) = forward_with_floor(sp, f, l.abs(), t_end)?;
        Ok(if v.norm() <= (8.0 * floor).max(noise) { C64::new(0.0, 0.0) } else { v })
    };
    let probe = FnSymbol::real_axis(|l: C64| denoised(l.re).unwrap_or(C64::new(f64::NAN, 0.0)));
    let plan = build_plan(sp, &probe, ts, 0.0, opts)?;
    let samples: Vec<C64> = plan.nodes.par_iter().map(|l| denoised(l.re)).collect::<Result<_>>()?;
    Ok(plan.apply_samples(&samples))
}
