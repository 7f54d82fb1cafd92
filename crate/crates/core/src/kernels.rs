//! Radial kernels: κ_{α,β} (inverse transform of m_{α,β}), the damped wave
//! kernels q_{σ,α} (inverse transform of e^{(i-σ)(λ²+ρ²)^{α/2}}), the
//! local/far split, decay and L¹ diagnostics, and the subordination identity
//! κ_{α,β} = Γ(β/α)⁻¹ ∫₀^∞ σ^{β/α-1} q_{σ,α} dσ.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{log_cartan_density, SpaceParams};
use crate::multipliers::MultiplierSpec;
use crate::quadrature::{gauss_jacobi, gl16};
use crate::special::gamma::log_gamma;
use crate::transform::{build_plan, InversionPlan, RadialGrid, Route, Symbol, TransformOptions};

/// e^{(i-σ)(λ²+ρ²)^{α/2}}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveSymbol {
    pub sigma: f64,
    pub alpha: f64,
    pub rho: f64,
}

fn zeta(alpha: f64, rho: f64, lambda: C64) -> C64 {
    ((lambda * lambda + rho * rho).ln() * (0.5 * alpha)).exp()
}

impl Symbol for WaveSymbol {
    fn eval(&self, lambda: C64) -> C64 {
        (C64::new(-self.sigma, 1.0) * zeta(self.alpha, self.rho, lambda)).exp()
    }

    fn strip(&self) -> f64 {
        self.rho
    }

    // left half of the contour: |e^{(i-σ)ζ}| ≈ e^{(1/2 - σ)|μ|} against e^{-t|μ|/2}
    fn far_from(&self) -> Option<f64> {
        if self.alpha < 1.0 || (self.alpha == 1.0 && self.sigma >= 0.5) {
            Some(0.5)
        } else if self.alpha == 1.0 {
            Some(1.5)
        } else {
            None
        }
    }

    fn phase_rate(&self, lambda: f64) -> f64 {
        let z = lambda * lambda + self.rho * self.rho;
        self.alpha * lambda.abs() * z.powf(0.5 * self.alpha - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveKernelSpec {
    pub sp: SpaceParams,
    pub sigma: f64,
    pub alpha: f64,
}

impl WaveKernelSpec {
    pub fn new(sp: SpaceParams, sigma: f64, alpha: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!("sigma must be positive (got {sigma})")));
        }
        if !(alpha > 0.0) {
            return Err(Error::Domain(format!("alpha must be positive (got {alpha})")));
        }
        Ok(WaveKernelSpec { sp, sigma, alpha })
    }

    pub fn symbol(&self) -> WaveSymbol {
        WaveSymbol { sigma: self.sigma, alpha: self.alpha, rho: self.sp.rho }
    }
}

/// Kernel samples with diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelEstimate {
    /// Best estimate: the ε-extrapolation on direct-route points, the exact
    /// contour value elsewhere.
    pub kernel: RadialGrid,
    /// Quadrature error estimate.
    pub error: Vec<f64>,
    /// |κ(ε/2) - κ(ε)| on regularized points, 0 elsewhere.
    pub eps_spread: Vec<f64>,
    pub routes: Vec<Route>,
    /// Regularizer used per point (0 on contour points).
    pub eps: Vec<f64>,
}

impl KernelEstimate {
    pub fn values(&self) -> &[C64] {
        &self.kernel.values
    }
}

/// λ_max large enough for e^{-ελ²/2} to remove the symbol tail.
pub fn auto_lambda_max(eps: f64, opts: &TransformOptions) -> f64 {
    if eps > 0.0 {
        opts.lambda_max.max((90.0 / eps).sqrt())
    } else {
        opts.lambda_max
    }
}

/// Plans for the direct-route points (regularized) and the contour points
/// (exact), shared by every symbol applied afterwards.
struct SplitPlan {
    near: Option<InversionPlan>,
    far: Option<InversionPlan>,
    near_idx: Vec<usize>,
    far_idx: Vec<usize>,
    eps: f64,
}

fn split_plan(sp: &SpaceParams, sym: &dyn Symbol, ts: &[f64], eps: f64, opts: &TransformOptions) -> Result<SplitPlan> {
    let far_ok = |t: f64| matches!(sym.far_from(), Some(r) if t >= r && sym.strip() > 0.0);
    let near_idx: Vec<usize> = (0..ts.len()).filter(|&i| !far_ok(ts[i])).collect();
    let far_idx: Vec<usize> = (0..ts.len()).filter(|&i| far_ok(ts[i])).collect();
    let near = if near_idx.is_empty() {
        None
    } else {
        let nts: Vec<f64> = near_idx.iter().map(|&i| ts[i]).collect();
        let o = TransformOptions { lambda_max: auto_lambda_max(eps, opts), ..*opts };
        let eps_min = if eps > 0.0 { 0.5 * eps } else { 0.0 };
        Some(build_plan(sp, sym, &nts, eps_min, &o)?)
    };
    let far = if far_idx.is_empty() {
        None
    } else {
        let fts: Vec<f64> = far_idx.iter().map(|&i| ts[i]).collect();
        Some(build_plan(sp, sym, &fts, 0.0, opts)?)
    };
    Ok(SplitPlan { near, far, near_idx, far_idx, eps })
}

impl SplitPlan {
    fn nodes(&self) -> impl Iterator<Item = &C64> {
        self.near.iter().chain(self.far.iter()).flat_map(|p| p.nodes.iter())
    }

    fn run<F: Fn(C64) -> C64 + Sync>(&self, ts: &[f64], m: F) -> Result<KernelEstimate> {
        let n = ts.len();
        let mut vals = vec![C64::new(0.0, 0.0); n];
        let mut err = vec![0.0; n];
        let mut spread = vec![0.0; n];
        let mut routes = vec![Route::Contour; n];
        let mut eps = vec![0.0; n];
        if let Some(p) = &self.near {
            let samples = p.sample(&m, 0.0);
            let weighted = |e: f64| -> Vec<C64> {
                if e == 0.0 {
                    samples.clone()
                } else {
                    samples.iter().zip(&p.nodes).map(|(s, l)| s * (-e * l * l).exp()).collect()
                }
            };
            let (v1, e1) = p.apply_samples(&weighted(self.eps));
            let (best, e_best, sp) = if self.eps > 0.0 {
                let (v2, e2) = p.apply_samples(&weighted(0.5 * self.eps));
                let ex: Vec<C64> = v1.iter().zip(&v2).map(|(a, b)| 2.0 * b - a).collect();
                let eb: Vec<f64> = e1.iter().zip(&e2).map(|(a, b)| a + 2.0 * b).collect();
                let s: Vec<f64> = v1.iter().zip(&v2).map(|(a, b)| (a - b).norm()).collect();
                (ex, eb, s)
            } else {
                (v1, e1, vec![0.0; p.ts.len()])
            };
            for (k, &i) in self.near_idx.iter().enumerate() {
                vals[i] = best[k];
                err[i] = e_best[k];
                spread[i] = sp[k];
                routes[i] = p.routes[k];
                eps[i] = self.eps;
            }
        }
        if let Some(p) = &self.far {
            let (v, e) = p.apply(&m, 0.0);
            for (k, &i) in self.far_idx.iter().enumerate() {
                vals[i] = v[k];
                err[i] = e[k];
                routes[i] = p.routes[k];
            }
        }
        Ok(KernelEstimate { kernel: RadialGrid::new(ts.to_vec(), vals)?, error: err, eps_spread: spread, routes, eps })
    }
}

/// κ_{α,β}(t). Points below the contour radius use the regularizer ε with
/// Richardson extrapolation to ε → 0; the others are computed exactly on
/// the contour. ε = 0 requires |m| |c|⁻² to be integrable.
pub fn oscillating_kernel(
    sp: &SpaceParams,
    spec: &MultiplierSpec,
    ts: &[f64],
    eps: f64,
    opts: &TransformOptions,
) -> Result<KernelEstimate> {
    let plan = split_plan(sp, spec, ts, eps, opts)?;
    plan.run(ts, |l| spec.eval(l))
}

/// Same as [`oscillating_kernel`] for an arbitrary symbol.
pub fn kernel_of(sp: &SpaceParams, sym: &dyn Symbol, ts: &[f64], eps: f64, opts: &TransformOptions) -> Result<KernelEstimate> {
    let plan = split_plan(sp, sym, ts, eps, opts)?;
    plan.run(ts, |l| sym.eval(l))
}

/// λ_max at which e^{-σ(λ²+ρ²)^{α/2}} |c(λ)|⁻² has fallen below 1e-20.
fn wave_lambda_max(ws: &WaveSymbol, sp: &SpaceParams, opts: &TransformOptions) -> Result<f64> {
    let n1 = sp.n as f64 - 1.0;
    let mut l: f64 = 10.0;
    for _ in 0..200 {
        let decay = ws.sigma * (l * l + ws.rho * ws.rho).powf(0.5 * ws.alpha);
        if decay > 46.0 + n1 * l.ln() + 5.0 {
            return Ok(opts.lambda_max.max(l));
        }
        l *= 1.1;
    }
    Err(Error::NonConvergence { what: "wave symbol decay", iterations: 200 })
}

/// q_{σ,α}(t), no regularizer.
pub fn wave_kernel(spec: &WaveKernelSpec, ts: &[f64], opts: &TransformOptions) -> Result<KernelEstimate> {
    let ws = spec.symbol();
    let o = TransformOptions { lambda_max: wave_lambda_max(&ws, &spec.sp, opts)?, ..*opts };
    kernel_of(&spec.sp, &ws, ts, 0.0, &o)
}

/// Partition of unity on [1,2]: χ = 1 - I_{t-1}(k+1, k+1), the regularized
/// incomplete beta function, so χ is C^k and symmetric about 3/2.
pub fn cutoff(t: f64, order: u32) -> f64 {
    if t <= 1.0 {
        return 1.0;
    }
    if t >= 2.0 {
        return 0.0;
    }
    let x = t - 1.0;
    let a = order as i32 + 1;
    let n = 2 * a - 1;
    // I_x(a, a) = Σ_{j=a}^{2a-1} C(2a-1, j) x^j (1-x)^{2a-1-j}
    let mut s = 0.0;
    let mut binom = 1.0f64;
    for j in 0..=n {
        if j >= a {
            s += binom * x.powi(j) * (1.0 - x).powi(n - j);
        }
        binom = binom * (n - j) as f64 / (j + 1) as f64;
    }
    1.0 - s
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelSplit {
    pub kappa0: RadialGrid,
    pub kappa_inf: RadialGrid,
    pub cutoff_order: u32,
}

/// κ = κ⁰ + κ^∞ with κ⁰ = χκ supported in [0,2] and κ^∞ = κ - κ⁰ in [1,∞).
pub fn split_kernel(kappa: &RadialGrid, cutoff_order: u32) -> Result<KernelSplit> {
    if kappa.t_nodes[0] > 0.0 || kappa.t_max <= 2.0 {
        return Err(Error::GridTooCoarse(format!(
            "the grid must cover [0, t_max] with t_max > 2 (got [{}, {}])",
            kappa.t_nodes[0], kappa.t_max
        )));
    }
    let inside = kappa.t_nodes.iter().filter(|&&t| (1.0..=2.0).contains(&t)).count();
    if inside < 16 {
        return Err(Error::GridTooCoarse(format!("{inside} nodes in [1,2], need at least 16")));
    }
    let k0: Vec<C64> = kappa.t_nodes.iter().zip(&kappa.values).map(|(&t, v)| v * cutoff(t, cutoff_order)).collect();
    let ki: Vec<C64> = kappa.values.iter().zip(&k0).map(|(v, a)| v - a).collect();
    Ok(KernelSplit {
        kappa0: RadialGrid::new(kappa.t_nodes.clone(), k0)?,
        kappa_inf: RadialGrid::new(kappa.t_nodes.clone(), ki)?,
        cutoff_order,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayReport {
    pub sigma: f64,
    pub ts: Vec<f64>,
    /// |q_σ(t)| (t+1)^{3/2} e^{2ρt}.
    pub normalized: Vec<f64>,
    pub running_sup: Vec<f64>,
    pub sup: f64,
    /// First t after which the running sup grows by less than 5%.
    pub stabilized_at: Option<f64>,
    pub stable: bool,
    /// Largest t at which the quadrature error stays below 10% of |q_σ|.
    pub usable_until: f64,
    /// Ratio last/first of |q_σ|(t+1)^{3/2} e^{3ρt} (the e^{3ρt} control).
    pub control_growth: f64,
}

/// Normalized (q1) quantity over t_range with step ≤ 0.1.
pub fn decay_check_q1(sp: &SpaceParams, sigma: f64, t_range: (f64, f64), opts: &TransformOptions) -> Result<DecayReport> {
    let (a, b) = t_range;
    if !(a > 0.0 && b > a) {
        return Err(Error::Domain(format!("bad t range [{a}, {b}]")));
    }
    if sigma <= 1.0 && a < 2.0 {
        return Err(Error::Domain("for sigma <= 1 the decay law is stated for t > 2".into()));
    }
    let n = ((b - a) / 0.1).ceil() as usize;
    let ts: Vec<f64> = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect();
    let spec = WaveKernelSpec::new(*sp, sigma, 1.0)?;
    let q = wave_kernel(&spec, &ts, opts)?;
    let w = |t: f64, r: f64| (t + 1.0).powf(1.5) * (r * sp.rho * t).exp();
    let normalized: Vec<f64> = ts.iter().zip(q.values()).map(|(&t, v)| v.norm() * w(t, 2.0)).collect();
    let mut running_sup = Vec::with_capacity(ts.len());
    let mut m = 0.0f64;
    for v in &normalized {
        m = m.max(*v);
        running_sup.push(m);
    }
    let sup = m;
    let stabilized_at = (0..ts.len()).find(|&i| sup <= 1.05 * running_sup[i]).map(|i| ts[i]);
    let mut usable_until = a;
    for (i, &t) in ts.iter().enumerate() {
        if q.error[i] <= 0.1 * q.values()[i].norm() {
            usable_until = t;
        } else {
            break;
        }
    }
    let stable = sup.is_finite()
        && usable_until >= b - 1e-9
        && stabilized_at.is_some_and(|t| t <= a + 0.6 * (b - a));
    let c0 = q.values()[0].norm() * w(a, 3.0);
    let c1 = q.values()[n].norm() * w(b, 3.0);
    Ok(DecayReport { sigma, ts, normalized, running_sup, sup, stabilized_at, stable, usable_until, control_growth: c1 / c0 })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct L1Norm {
    pub sigma: f64,
    /// ∫₀^{t_max} |q_σ| J dt.
    pub partial: f64,
    /// Envelope tail C·2/√(t_max+1) with C fitted on [t_max/2, t_max].
    pub tail_estimate: f64,
    /// Twice the estimate.
    pub tail_bound: f64,
    pub norm: f64,
}

/// t-panels for |q_σ| J: width ≤ 1/4, refined to σ/2 around the wavefront t=1.
fn l1_edges(sigma: f64, t_max: f64) -> Vec<f64> {
    let lo = (1.0 - 6.0 * sigma).max(0.0);
    let hi = 1.0 + 6.0 * sigma;
    let mut e = vec![0.0];
    let mut t = 0.0;
    while t < t_max - 1e-12 {
        let fine = t + 1e-12 >= lo && t < hi;
        let mut w = if fine { (0.5 * sigma).min(0.25) } else { 0.25 };
        if !fine && t < lo && t + w > lo {
            w = lo - t;
        }
        t = (t + w).min(t_max);
        e.push(t);
    }
    e
}

/// ‖q_σ‖_{L¹(X)} for α = 1 with an envelope tail.
pub fn l1_norm(sp: &SpaceParams, sigma: f64, t_max: f64, opts: &TransformOptions) -> Result<L1Norm> {
    let spec = WaveKernelSpec::new(*sp, sigma, 1.0)?;
    let edges = l1_edges(sigma, t_max);
    let rule = gl16();
    let mut ts = Vec::new();
    let mut ws = Vec::new();
    for w in edges.windows(2) {
        for (t, wt) in rule.mapped(w[0], w[1]) {
            ts.push(t);
            ws.push(wt);
        }
    }
    let q = wave_kernel(&spec, &ts, opts)?;
    let partial: f64 = ts
        .iter()
        .zip(&ws)
        .zip(q.values())
        .map(|((&t, &w), v)| w * v.norm() * log_cartan_density(sp, t).exp())
        .sum();
    // envelope constant from the normalized quantity on the second half; it
    // must not still be growing there
    let norm_on = |lo: f64, hi: f64| {
        ts.iter()
            .zip(q.values())
            .filter(|(&t, _)| t >= lo && t < hi)
            .map(|(&t, v)| v.norm() * (t + 1.0).powf(1.5) * log_cartan_density(sp, t).exp())
            .fold(0.0, f64::max)
    };
    let (c1, c2) = (norm_on(0.5 * t_max, 0.75 * t_max), norm_on(0.75 * t_max, f64::INFINITY));
    if !(c2 <= 1.05 * c1) {
        return Err(Error::TailUnbounded(format!("normalized kernel still growing near t_max ({c1:.3e} -> {c2:.3e})")));
    }
    let c = c1.max(c2);
    let tail_estimate = 2.0 * c / (t_max + 1.0).sqrt();
    Ok(L1Norm { sigma, partial, tail_estimate, tail_bound: 2.0 * tail_estimate, norm: partial + tail_estimate })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingFit {
    pub sigmas: Vec<f64>,
    pub norms: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub slope_stderr: f64,
}

/// Least-squares line through (x, y); (slope, intercept, stderr of slope).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    let se = if xs.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { f64::NAN };
    (slope, icpt, se)
}

/// Slope of log ‖q_σ‖₁ against log σ.
pub fn l1_scaling_fit(sp: &SpaceParams, sigma_grid: &[f64], t_max: f64, opts: &TransformOptions) -> Result<ScalingFit> {
    if sigma_grid.len() < 3 {
        return Err(Error::InsufficientData("need at least 3 sigma values".into()));
    }
    let norms: Result<Vec<f64>> = sigma_grid.iter().map(|&s| l1_norm(sp, s, t_max, opts).map(|r| r.norm)).collect();
    let norms = norms?;
    let xs: Vec<f64> = sigma_grid.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|s| s.ln()).collect();
    let (slope, intercept, slope_stderr) = linear_fit(&xs, &ys);
    Ok(ScalingFit { sigmas: sigma_grid.to_vec(), norms, slope, intercept, slope_stderr })
}

/// Quadrature for Γ(γ)⁻¹ ∫₀^∞ σ^{γ-1} g(σ) dσ with g(σ) = e^{(i-σ)ζ}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SigmaQuadrature {
    /// Gauss–Jacobi nodes on the innermost interval [0, 2^{-K}].
    pub n_jacobi: usize,
    /// Width of the GL16 panels in u = ln σ on [1, ∞).
    pub upper_width: f64,
}

impl Default for SigmaQuadrature {
    fn default() -> Self {
        SigmaQuadrature { n_jacobi: 24, upper_width: 0.125 }
    }
}

/// Nodes σ_k and weights W_k (including σ^{γ-1} and 1/Γ(γ)) such that
/// Σ W_k e^{-σ_k ζ} ≈ ζ^{-γ} for Re ζ ∈ [zeta_min, ∞), |ζ| ≤ zeta_max.
pub fn sigma_rule(gamma: C64, zeta_min: f64, zeta_max: f64, q: &SigmaQuadrature) -> Result<Vec<(f64, C64)>> {
    if !(gamma.re > 0.01) {
        return Err(Error::EndpointSingularity { exponent: gamma.re - 1.0 });
    }
    let inv_gamma = (-log_gamma(gamma)?).exp();
    let pow = |s: f64| ((gamma - 1.0) * s.ln()).exp();
    let mut out = Vec::new();
    // geometric panels [2^{-k-1}, 2^{-k}] until σ ζ_max ≤ 2 on the last one
    let mut k_max = (zeta_max / 2.0).log2().ceil().max(0.0) as i32;
    if gamma.im != 0.0 {
        // σ^{i Im γ} oscillates in ln σ: keep geometric panels until the
        // remaining piece s^{Re γ} is negligible against ζ_max^{-Re γ}
        k_max += (46.0 / gamma.re).ceil().min(400.0) as i32;
    }
    let inner = 2f64.powi(-k_max);
    let gj = gauss_jacobi(q.n_jacobi, 0.0, gamma.re - 1.0)?;
    // ∫₀^s σ^{γ-1} g = s^γ 2^{-Re γ} ∫ (1+y)^{Re γ-1} (x^{i Im γ} g(sx)) dy, x = (1+y)/2
    let scale = ((gamma * inner.ln()).exp()) * 2f64.powf(-gamma.re);
    for (&y, &w) in gj.nodes.iter().zip(&gj.weights) {
        let x = 0.5 * (1.0 + y);
        let phase = C64::new(0.0, gamma.im * x.ln()).exp();
        out.push((inner * x, scale * w * phase * inv_gamma));
    }
    let rule = gl16();
    for k in (0..k_max).rev() {
        let (a, b) = (2f64.powi(-k - 1), 2f64.powi(-k));
        for (s, w) in rule.mapped(a, b) {
            out.push((s, pow(s) * w * inv_gamma));
        }
    }
    // [1, ∞) in u = ln σ
    let u_max = (60.0 / zeta_min.max(1e-6)).ln().max(0.5);
    let n_up = (u_max / q.upper_width).ceil() as usize;
    for p in 0..n_up {
        let (a, b) = (u_max * p as f64 / n_up as f64, u_max * (p + 1) as f64 / n_up as f64);
        for (u, w) in rule.mapped(a, b) {
            let s = u.exp();
            out.push((s, pow(s) * s * w * inv_gamma));
        }
    }
    Ok(out)
}

/// Γ(γ)⁻¹ Σ_k W_k σ_k^{..} e^{(i-σ_k)ζ} from a rule of [`sigma_rule`].
pub fn subordinated_symbol(rule: &[(f64, C64)], zeta: C64) -> C64 {
    let e = (C64::new(0.0, 1.0) * zeta).exp();
    let mut s = C64::new(0.0, 0.0);
    for &(sig, w) in rule {
        let x = sig * zeta;
        if x.re < 745.0 {
            s += w * (-x).exp();
        }
    }
    s * e
}

/// κ_{α,β}(t) assembled from the damped kernels q_{σ,α}:
/// Γ(β/α)⁻¹ Σ_k W_k q_{σ_k,α}(t). The kernels share the quadrature nodes of
/// [`oscillating_kernel`] with the same ε, so the two results differ only
/// through the σ-integral.
pub fn subordination_assemble(
    sp: &SpaceParams,
    alpha: f64,
    beta: C64,
    ts: &[f64],
    eps: f64,
    q: &SigmaQuadrature,
    opts: &TransformOptions,
) -> Result<KernelEstimate> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Domain(format!("subordination needs 0 < alpha <= 1 (got {alpha})")));
    }
    if !(beta.re > 0.0) {
        return Err(Error::Domain(format!("subordination needs Re beta > 0 (got {beta})")));
    }
    let spec = MultiplierSpec::new(alpha, beta, sp.rho)?;
    let plan = split_plan(sp, &spec, ts, eps, opts)?;
    let zetas: Vec<C64> = plan.nodes().map(|&l| zeta(alpha, sp.rho, l)).collect();
    let zmin = zetas.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let zmax = zetas.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !(zmin > 0.0) {
        return Err(Error::Domain("Re (λ²+ρ²)^{α/2} must stay positive on the nodes".into()));
    }
    let rule = sigma_rule(beta / alpha, zmin, zmax, q)?;
    plan.run(ts, |l| subordinated_symbol(&rule, zeta(alpha, sp.rho, l)))
}

/// max over λ of |Γ(γ)⁻¹ ∫ σ^{γ-1} e^{-σζ} dσ - ζ^{-γ}| / |ζ^{-γ}| with
/// ζ = (λ²+ρ²)^{α/2}(1-i), the σ-side of the subordination identity.
pub fn subordination_symbol_check(alpha: f64, beta: C64, rho: f64, lambdas: &[f64], q: &SigmaQuadrature) -> Result<f64> {
    let zs: Vec<C64> = lambdas.iter().map(|&l| zeta(alpha, rho, C64::new(l, 0.0)) * C64::new(1.0, -1.0)).collect();
    let zmin = zs.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let zmax = zs.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let g = beta / alpha;
    let rule = sigma_rule(g, zmin, zmax, q)?;
    let errs: Vec<f64> = zs
        .par_iter()
        .map(|&z| {
            let mut s = C64::new(0.0, 0.0);
            for &(sig, w) in &rule {
                s += w * (-sig * z).exp();
            }
            let want = (-g * z.ln()).exp();
            (s - want).norm() / want.norm()
        })
        .collect();
    Ok(errs.into_iter().fold(0.0, f64::max))
}
