//! Kunze–Stein bounds: shell integrals I_j of |κ^∞| against φ_{-iηρ}^{s(p)} J,
//! their decay in j, and the threshold logic of the L^p certificates.

use std::io::Write;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{log_cartan_density, SpaceParams};
use crate::kernels::{cutoff, kernel_of, linear_fit};
use crate::multipliers::{s_p, smoothness_order, v_gamma, MultiplierSpec};
use crate::quadrature::{gl16, gl32, GaussRule};
use crate::special::log_phi_imag;
use crate::transform::{RadialGrid, TransformOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellBound {
    pub j: usize,
    pub value: f64,
    pub quadrature_error: f64,
}

fn shell_rule(sp: &SpaceParams, kappa_inf: &RadialGrid, s: f64, eta: f64, j: usize, rule: &GaussRule) -> Result<f64> {
    let (a, b) = (j as f64, j as f64 + 1.0);
    let mut sum = 0.0;
    for (t, w) in rule.mapped(a, b) {
        let k = kappa_inf.interpolate(t).norm();
        if k == 0.0 {
            continue;
        }
        let lw = s * log_phi_imag(sp, eta, t)? + log_cartan_density(sp, t);
        sum += w * k * lw.exp();
    }
    Ok(sum)
}

/// I_j = ∫_j^{j+1} |κ^∞(t)| φ_{-i η ρ}(t)^{s(p)} J(t) dt.
pub fn shell_integral(sp: &SpaceParams, kappa_inf: &RadialGrid, p: f64, eta_ratio: f64, j: usize) -> Result<ShellBound> {
    let s = s_p(p)?;
    if !(0.0..=1.0).contains(&eta_ratio) {
        return Err(Error::Domain(format!("eta_ratio must lie in [0,1] (got {eta_ratio})")));
    }
    if j == 0 {
        return Err(Error::Domain("shells start at j = 1".into()));
    }
    if kappa_inf.t_max < j as f64 + 1.0 || kappa_inf.t_nodes[0] > j as f64 {
        return Err(Error::Domain(format!("kernel grid does not cover shell [{j}, {}]", j + 1)));
    }
    let eta = eta_ratio * sp.rho;
    let v32 = shell_rule(sp, kappa_inf, s, eta, j, gl32())?;
    let v16 = shell_rule(sp, kappa_inf, s, eta, j, gl16())?;
    Ok(ShellBound { j, value: v32, quadrature_error: (v32 - v16).abs() + 1e-14 * v32 })
}

/// Shells 1..=j_max in parallel, ordered by j.
pub fn shells(sp: &SpaceParams, kappa_inf: &RadialGrid, p: f64, eta_ratio: f64, j_max: usize) -> Result<Vec<ShellBound>> {
    (1..=j_max).into_par_iter().map(|j| shell_integral(sp, kappa_inf, p, eta_ratio, j)).collect()
}

pub fn write_shells_csv<W: Write>(shells: &[ShellBound], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["j", "I_j", "err"])?;
    for s in shells {
        wr.write_record([s.j.to_string(), format!("{:.17e}", s.value), format!("{:.3e}", s.quadrature_error)])?;
    }
    wr.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ShellDecayFit {
    /// Usable shells are j = 1..=usable (value above 10× its error).
    pub usable: usize,
    /// Slope of ln I_j against ln j.
    pub slope: f64,
    pub slope_stderr: f64,
    /// ln I = A + B ln j + C j.
    pub mixed: [f64; 3],
    pub rate_stderr: f64,
    /// C < 0 significantly: faster than any power.
    pub exponential: bool,
}

impl ShellDecayFit {
    /// At least as fast as j^{-n_order}.
    pub fn meets(&self, n_order: usize) -> bool {
        self.exponential || self.slope <= -(n_order as f64) + 0.01
    }

    fn ln_model(&self, j: f64) -> f64 {
        let [a, b, c] = self.mixed;
        a + b * j.ln() + c * j
    }
}

fn mixed_fit(xs: &[f64], ys: &[f64]) -> Option<([f64; 3], f64)> {
    let n = xs.len();
    if n < 4 {
        return None;
    }
    let a = nalgebra::DMatrix::from_fn(n, 3, |i, k| match k {
        0 => 1.0,
        1 => xs[i].ln(),
        _ => xs[i],
    });
    let y = nalgebra::DVector::from_column_slice(ys);
    let ata = a.transpose() * &a;
    let inv = ata.clone().try_inverse()?;
    let coef = &inv * a.transpose() * &y;
    let res = &y - &a * &coef;
    let s2 = res.norm_squared() / (n as f64 - 3.0);
    Some(([coef[0], coef[1], coef[2]], (s2 * inv[(2, 2)]).sqrt()))
}

/// Power-law slope and mixed power/exponential fit over the usable shells.
pub fn shell_decay_fit(shells: &[ShellBound]) -> Result<ShellDecayFit> {
    let usable = shells
        .iter()
        .position(|s| !(s.value > 10.0 * s.quadrature_error && s.value > 0.0 && s.value.is_finite()))
        .unwrap_or(shells.len());
    if usable < 10 {
        return Err(Error::InsufficientData(format!(
            "only {usable} shells above the quadrature noise floor, need 10"
        )));
    }
    let js: Vec<f64> = shells[..usable].iter().map(|s| s.j as f64).collect();
    let ys: Vec<f64> = shells[..usable].iter().map(|s| s.value.ln()).collect();
    let lx: Vec<f64> = js.iter().map(|j| j.ln()).collect();
    let (slope, _, slope_stderr) = linear_fit(&lx, &ys);
    let (mixed, rate_stderr) = mixed_fit(&js, &ys).unwrap_or(([f64::NAN; 3], f64::NAN));
    let c = mixed[2];
    let exponential = c < -1e-3 && c + 3.0 * rate_stderr < 0.0;
    Ok(ShellDecayFit { usable, slope, slope_stderr, mixed, rate_stderr, exponential })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KsTotal {
    pub i_total: f64,
    pub partial: f64,
    pub tail_bound: f64,
    pub converged: bool,
    pub shells: Vec<ShellBound>,
    pub fit: Option<ShellDecayFit>,
}

/// Tail Σ_{j > j0} of the fitted envelope; infinite if it does not converge.
fn envelope_tail(fit: &ShellDecayFit, j0: usize, slope: f64) -> f64 {
    let [_, b, c] = fit.mixed;
    if fit.exponential {
        // terms decrease once B/j + C < 0; sum until negligible
        let mut s = 0.0;
        let first = fit.ln_model(j0 as f64 + 1.0);
        let mut j = j0 + 1;
        loop {
            let l = fit.ln_model(j as f64);
            let term = l.exp();
            s += term;
            let decreasing = b / j as f64 + c < 0.0;
            if (decreasing && l < first - 46.0) || j > j0 + 10_000_000 {
                break;
            }
            j += 1;
        }
        s
    } else if slope < -1.0 {
        let ln_last = fit.ln_model(j0 as f64);
        // ∫_{j0}^∞ I_{j0} (x/j0)^{slope} dx
        ln_last.exp() * j0 as f64 / (-slope - 1.0)
    } else {
        f64::INFINITY
    }
}

/// Σ_{j ≤ j_max} I_j plus the fitted tail; converged iff tail < 1% of the sum.
pub fn ks_total(sp: &SpaceParams, kappa_inf: &RadialGrid, p: f64, eta_ratio: f64, j_max: usize) -> Result<KsTotal> {
    if j_max < 15 {
        return Err(Error::Domain(format!("j_max must be at least 15 (got {j_max})")));
    }
    let sh = shells(sp, kappa_inf, p, eta_ratio, j_max)?;
    Ok(ks_total_from_shells(sh))
}

pub fn ks_total_from_shells(sh: Vec<ShellBound>) -> KsTotal {
    let partial: f64 = sh.iter().map(|s| s.value).sum();
    if partial == 0.0 {
        return KsTotal { i_total: 0.0, partial: 0.0, tail_bound: 0.0, converged: true, shells: sh, fit: None };
    }
    let fit = match shell_decay_fit(&sh) {
        Ok(f) => f,
        Err(_) => {
            // every shell beyond the usable range is noise; bound it by its error
            let noise: f64 = sh.iter().map(|s| s.quadrature_error).sum();
            let usable = sh.iter().take_while(|s| s.value > 10.0 * s.quadrature_error).count();
            let converged = usable < sh.len() && noise < 0.01 * partial;
            return KsTotal { i_total: partial, partial, tail_bound: if converged { noise } else { f64::INFINITY }, converged, shells: sh, fit: None };
        }
    };
    let tail = if fit.usable < sh.len() {
        // shells died into noise: the remaining ones are bounded by their errors
        sh[fit.usable..].iter().map(|s| s.value.abs() + s.quadrature_error).sum::<f64>()
    } else {
        // local slope on the last third decides the power-law tail
        let k0 = 2 * fit.usable / 3;
        let lx: Vec<f64> = sh[k0..fit.usable].iter().map(|s| (s.j as f64).ln()).collect();
        let ly: Vec<f64> = sh[k0..fit.usable].iter().map(|s| s.value.ln()).collect();
        let (local, _, _) = linear_fit(&lx, &ly);
        let mut refit = fit.clone();
        if !fit.exponential {
            // anchor the power law at the last shell
            let jl = sh[fit.usable - 1].j as f64;
            refit.mixed = [sh[fit.usable - 1].value.ln() - local * jl.ln(), local, 0.0];
        }
        envelope_tail(&refit, sh.len(), local)
    };
    let converged = tail.is_finite() && tail < 0.01 * partial;
    KsTotal { i_total: partial + tail, partial, tail_bound: tail, converged, shells: sh, fit: Some(fit) }
}

/// κ^∞ = (1-χ)κ on [0, j_max+1] for one multiplier; shared by every (p, η).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FarKernel {
    pub spec: MultiplierSpec,
    pub kappa_inf: RadialGrid,
    pub j_max: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsOptions {
    pub j_max: usize,
    /// Grid points per unit in t.
    pub per_unit: usize,
    pub cutoff_order: u32,
    pub transform: TransformOptions,
}

impl Default for KsOptions {
    fn default() -> Self {
        KsOptions { j_max: 60, per_unit: 32, cutoff_order: 7, transform: TransformOptions::default() }
    }
}

impl FarKernel {
    pub fn build(sp: &SpaceParams, spec: &MultiplierSpec, opts: &KsOptions) -> Result<Self> {
        let t_end = opts.j_max as f64 + 1.0;
        let n = opts.j_max + 1;
        let nodes = RadialGrid::uniform(t_end, n * opts.per_unit);
        let first = nodes.iter().position(|&t| t >= 1.0).unwrap_or(nodes.len());
        let o = TransformOptions { t_max: opts.transform.t_max.max(t_end), ..opts.transform };
        let k = kernel_of(sp, spec, &nodes[first..], 1e-3, &o)?;
        let mut vals = vec![C64::new(0.0, 0.0); first];
        vals.extend(nodes[first..].iter().zip(k.values()).map(|(&t, v)| v * (1.0 - cutoff(t, opts.cutoff_order))));
        Ok(FarKernel { spec: *spec, kappa_inf: RadialGrid::new(nodes, vals)?, j_max: opts.j_max })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GroupFlags {
    pub delta_lt_2rho: bool,
    pub ct: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    BoundedCertified,
    L2Only,
    NotCovered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalCondition {
    pub threshold: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarIntegral {
    pub i_total: f64,
    pub shells: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundCertificate {
    pub p: f64,
    pub alpha: f64,
    pub beta: [f64; 2],
    pub eta_ratio: f64,
    pub space: String,
    pub local_condition: Option<LocalCondition>,
    pub far_integral: Option<FarIntegral>,
    /// Smallest integer ≥ (n-1)/2.
    pub b_prime: u32,
    pub verdict: Verdict,
    pub warnings: Vec<String>,
}

/// |1/p - 1/2|.
fn dist_half(p: f64) -> f64 {
    (1.0 / p - 0.5).abs()
}

fn base(sp: &SpaceParams, spec: &MultiplierSpec, p: f64, eta_ratio: f64) -> BoundCertificate {
    let mut warnings = Vec::new();
    if eta_ratio == 1.0 && v_gamma(p, 1.0).map(|v| v == 1.0).unwrap_or(false) {
        warnings.push("eta_ratio = 1 gives v = 1, the boundary of the strip".into());
    }
    BoundCertificate {
        p,
        alpha: spec.alpha,
        beta: [spec.beta.re, spec.beta.im],
        eta_ratio,
        space: sp.label(),
        local_condition: None,
        far_integral: None,
        b_prime: (sp.n as u32).saturating_sub(1).div_ceil(2),
        verdict: Verdict::NotCovered,
        warnings,
    }
}

fn p_is_two(p: f64) -> bool {
    (p - 2.0).abs() < 1e-15
}

/// Certificate from the threshold logic; for α < 1 the far integral is
/// computed on `kernel` (built on demand when `None`).
pub fn certify_with_kernel(
    sp: &SpaceParams,
    spec: &MultiplierSpec,
    p: f64,
    eta_ratio: f64,
    flags: GroupFlags,
    kernel: Option<&FarKernel>,
    opts: &KsOptions,
) -> BoundCertificate {
    let mut c = base(sp, spec, p, eta_ratio);
    if !(p > 1.0) || !p.is_finite() || !(0.0..=1.0).contains(&eta_ratio) {
        c.warnings.push("inputs outside p ∈ (1,∞), eta_ratio ∈ [0,1]".into());
        return c;
    }
    let n = sp.n as f64;
    let re = spec.beta.re;
    if p_is_two(p) {
        // spectral bound: |m| ≤ 1 on the real axis when Re β ≥ 0
        c.verdict = if re >= 0.0 { Verdict::BoundedCertified } else { Verdict::NotCovered };
        return c;
    }
    if spec.alpha > 1.0 {
        c.verdict = Verdict::L2Only;
        return c;
    }
    if spec.alpha == 1.0 {
        let threshold = (n - 1.0) * dist_half(p);
        let satisfied = re > threshold;
        c.local_condition = Some(LocalCondition { threshold, satisfied });
        c.verdict = if satisfied && (flags.delta_lt_2rho || flags.ct) { Verdict::BoundedCertified } else { Verdict::NotCovered };
        return c;
    }
    let threshold = spec.alpha * n * dist_half(p);
    let satisfied = re > threshold;
    c.local_condition = Some(LocalCondition { threshold, satisfied });
    if !satisfied {
        return c;
    }
    let built;
    let k = match kernel {
        Some(k) => k,
        None => match FarKernel::build(sp, spec, opts) {
            Ok(k) => {
                built = k;
                &built
            }
            Err(e) => {
                c.warnings.push(format!("far kernel: {e}"));
                return c;
            }
        },
    };
    match ks_total(sp, &k.kappa_inf, p, eta_ratio, k.j_max) {
        Ok(t) => {
            c.far_integral = Some(FarIntegral { i_total: t.i_total, shells: t.shells.len(), converged: t.converged });
            if t.converged {
                c.verdict = Verdict::BoundedCertified;
            }
        }
        Err(e) => c.warnings.push(format!("far integral: {e}")),
    }
    c
}

pub fn certify(sp: &SpaceParams, spec: &MultiplierSpec, p: f64, eta_ratio: f64, flags: GroupFlags, opts: &KsOptions) -> BoundCertificate {
    certify_with_kernel(sp, spec, p, eta_ratio, flags, None, opts)
}

/// N = smoothness_order(n, 1-α) in force for the shell decay.
pub fn shell_order(sp: &SpaceParams, alpha: f64) -> Result<usize> {
    smoothness_order(sp.n as u32, 1.0 - alpha)
}
