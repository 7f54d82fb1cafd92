use num_complex::Complex64 as C64;
use oscmult::groups::{
    classify, critical_exponent_estimate, enumerate_orbit, orbit_count, poincare_partial, quotient_wave_kernel, word_string,
    GroupKind, GroupModel, Mobius,
};
use oscmult::kernels::{decay_check_q1, l1_scaling_fit, oscillating_kernel, subordination_assemble, SigmaQuadrature};
use oscmult::kunze_stein::{certify_with_kernel, ks_total, shell_order, FarKernel, GroupFlags, KsOptions};
use oscmult::multipliers::MultiplierSpec;
use oscmult::transform::{forward_transform_fn, roundtrip, Route, TransformOptions};
use oscmult::{make_space, Family, ModelPoint, SpaceParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{nums, Run};
use crate::CliError;

/// Result of a command that ran to completion.
pub enum Status {
    Ok,
    Quality(String),
}

fn space(cfg: &RunConfig) -> Result<SpaceParams, CliError> {
    let s = cfg.space()?;
    let fam: Family = s.family.parse()?;
    Ok(make_space(fam, s.k)?)
}

fn topts(cfg: &RunConfig) -> TransformOptions {
    let n = cfg.numerics;
    TransformOptions { lambda_max: n.lambda_max, t_max: n.t_max, tol: n.tol }
}

fn multiplier(cfg: &RunConfig, sp: &SpaceParams) -> Result<MultiplierSpec, CliError> {
    let m = cfg.multiplier()?;
    Ok(MultiplierSpec::on(sp, m.alpha, C64::new(m.beta_re, m.beta_im))?)
}

fn t_grid(cfg: &mut RunConfig, start: f64, stop: f64, step: f64) -> Result<Vec<f64>, CliError> {
    let p = &mut cfg.params;
    let (a, b, h) = (*p.t_start.get_or_insert(start), *p.t_stop.get_or_insert(stop), *p.t_step.get_or_insert(step));
    if !(a >= 0.0 && b >= a && h > 0.0) {
        return Err(CliError::Usage(format!("[params] needs 0 <= t_start <= t_stop and t_step > 0 (got {a}, {b}, {h})")));
    }
    let n = ((b - a) / h + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| a + h * i as f64).collect())
}

fn test_function(name: &str) -> Result<fn(f64) -> C64, CliError> {
    let f: fn(f64) -> C64 = match name {
        "gauss" => |t| C64::new((-t * t).exp(), 0.0),
        "poly-gauss" => |t| C64::new((1.0 + t * t) * (-2.0 * t * t).exp(), 0.0),
        "cos-gauss" => |t| C64::new((2.0 * t).cos() * (-t * t).exp(), 0.0),
        "sech-gauss" => |t| C64::new((-0.5 * t * t).exp() / t.cosh(), 0.0),
        "complex-gauss" => |t| C64::new(1.0, 0.5 * t * t) * (-t * t).exp(),
        other => {
            return Err(CliError::Usage(format!(
                "unknown function '{other}' (gauss, poly-gauss, cos-gauss, sech-gauss, complex-gauss)"
            )))
        }
    };
    Ok(f)
}

fn rel_sup_err(f: fn(f64) -> C64, ts: &[f64], got: &[C64]) -> f64 {
    let top = ts.iter().map(|&t| f(t).norm()).fold(0.0, f64::max);
    ts.iter().zip(got).map(|(&t, v)| (v - f(t)).norm()).fold(0.0, f64::max) / top
}

pub fn transform(cfg: &mut RunConfig, run: &mut Run, seed: u64) -> Result<Status, CliError> {
    let sp = space(cfg)?;
    let o = topts(cfg);
    let name = cfg.params.function.get_or_insert_with(|| "gauss".into()).clone();
    let f = test_function(&name)?;
    let support = *cfg.params.support.get_or_insert(9.0);
    let ts = t_grid(cfg, 0.0, 4.0, 0.1)?;
    let n_random = *cfg.params.random_points.get_or_insert(8);
    let threshold = *cfg.params.max_rel_err.get_or_insert((100.0 * o.tol).max(1e-12));

    let lambdas: Vec<f64> = (0..=160).map(|i| 0.25 * i as f64).collect();
    let fwd = forward_transform_fn(&sp, f, support, &lambdas)?;
    let (rt, est) = roundtrip(&sp, &f, support, &ts, &o)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (ts[0], *ts.last().unwrap());
    let mut extra: Vec<f64> = (0..n_random).map(|_| rng.gen_range(a..=b.max(a + 1e-9))).collect();
    extra.sort_by(f64::total_cmp);
    extra.dedup();
    let random_err = if extra.is_empty() { 0.0 } else { rel_sup_err(f, &extra, &roundtrip(&sp, &f, support, &extra, &o)?.0) };
    let grid_err = rel_sup_err(f, &ts, &rt);

    run.table(
        "forward.csv",
        &[],
        &[("lambda", "spectral parameter"), ("re", "Hf(lambda), real part"), ("im", "Hf(lambda), imaginary part")],
        &lambdas.iter().zip(&fwd.values).map(|(l, v)| nums(&[*l, v.re, v.im])).collect::<Vec<_>>(),
    )?;
    run.table(
        "inverse.csv",
        &[],
        &[
            ("t", "geodesic distance from the origin"),
            ("f_re", "input, real part"),
            ("f_im", "input, imaginary part"),
            ("rt_re", "inverse of forward, real part"),
            ("rt_im", "inverse of forward, imaginary part"),
            ("abs_err", "|round trip - input|"),
            ("err_est", "quadrature error estimate of the inversion"),
        ],
        &ts.iter()
            .zip(&rt)
            .zip(&est)
            .map(|((&t, v), e)| {
                let w = f(t);
                nums(&[t, w.re, w.im, v.re, v.im, (v - w).norm(), *e])
            })
            .collect::<Vec<_>>(),
    )?;
    #[derive(Serialize)]
    struct Report {
        space: String,
        function: String,
        support: f64,
        roundtrip_rel_err: f64,
        random_points: usize,
        random_rel_err: f64,
        max_error_estimate: f64,
        threshold: f64,
        pass: bool,
    }
    let worst = grid_err.max(random_err);
    let r = Report {
        space: sp.label(),
        function: name,
        support,
        roundtrip_rel_err: grid_err,
        random_points: extra.len(),
        random_rel_err: random_err,
        max_error_estimate: est.iter().cloned().fold(0.0, f64::max),
        threshold,
        pass: worst <= threshold,
    };
    run.json("report.json", &r)?;
    Ok(if r.pass { Status::Ok } else { Status::Quality(format!("round-trip error {worst:.3e} exceeds {threshold:.3e}")) })
}

pub fn kernel(cfg: &mut RunConfig, run: &mut Run) -> Result<Status, CliError> {
    let sp = space(cfg)?;
    let spec = multiplier(cfg, &sp)?;
    let o = topts(cfg);
    let ts = t_grid(cfg, 0.25, 5.0, 0.25)?;
    let threshold = *cfg.params.max_rel_err.get_or_insert(1e-2);
    let k = oscillating_kernel(&sp, &spec, &ts, cfg.numerics.eps, &o)?;
    let rows: Vec<Vec<String>> = ts
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let v = k.values()[i];
            let route = if k.routes[i] == Route::Contour { 1.0 } else { 0.0 };
            nums(&[t, v.re, v.im, k.error[i], k.eps_spread[i], k.eps[i], route])
        })
        .collect();
    run.table(
        "kernel.csv",
        &["kernel of the multiplier as a radial function, normalized so that the inverse transform carries 1/(2 pi)"],
        &[
            ("t", "geodesic distance from the origin"),
            ("re", "kernel, real part"),
            ("im", "kernel, imaginary part"),
            ("err", "quadrature error estimate"),
            ("eps_spread", "|k(eps/2) - k(eps)|, 0 on contour points"),
            ("eps", "regularizer exp(-eps lambda^2) used, 0 on contour points"),
            ("contour", "1 if computed on the shifted contour"),
        ],
        &rows,
    )?;
    let scale = k.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
    let worst = k.error.iter().cloned().fold(0.0, f64::max) / scale.max(f64::MIN_POSITIVE);
    #[derive(Serialize)]
    struct Report {
        space: String,
        alpha: f64,
        beta: [f64; 2],
        points: usize,
        contour_points: usize,
        max_abs: f64,
        max_rel_error: f64,
        max_eps_spread: f64,
        threshold: f64,
        pass: bool,
    }
    let r = Report {
        space: sp.label(),
        alpha: spec.alpha,
        beta: [spec.beta.re, spec.beta.im],
        points: ts.len(),
        contour_points: k.routes.iter().filter(|r| **r == Route::Contour).count(),
        max_abs: scale,
        max_rel_error: worst,
        max_eps_spread: k.eps_spread.iter().cloned().fold(0.0, f64::max),
        threshold,
        pass: worst <= threshold,
    };
    run.json("report.json", &r)?;
    Ok(if r.pass { Status::Ok } else { Status::Quality(format!("kernel error {worst:.3e} exceeds {threshold:.3e} of the sup")) })
}

pub fn decay(cfg: &mut RunConfig, run: &mut Run) -> Result<Status, CliError> {
    let sp = space(cfg)?;
    let o = topts(cfg);
    let sigma = *cfg.params.sigma.get_or_insert(1.0);
    let a = *cfg.params.t_start.get_or_insert(2.0);
    let b = *cfg.params.t_stop.get_or_insert(8.0);
    let r = decay_check_q1(&sp, sigma, (a, b), &o)?;
    run.table(
        "decay.csv",
        &[],
        &[
            ("t", "geodesic distance from the origin"),
            ("normalized", "|q_sigma(t)| (t+1)^{3/2} e^{2 rho t}, dimensionless"),
            ("running_sup", "sup of normalized over [t_start, t]"),
        ],
        &(0..r.ts.len()).map(|i| nums(&[r.ts[i], r.normalized[i], r.running_sup[i]])).collect::<Vec<_>>(),
    )?;
    #[derive(Serialize)]
    struct Report {
        space: String,
        sigma: f64,
        t_range: [f64; 2],
        sup: f64,
        stabilized_at: Option<f64>,
        stable: bool,
        usable_until: f64,
        control_growth: f64,
    }
    run.json(
        "report.json",
        &Report {
            space: sp.label(),
            sigma,
            t_range: [a, b],
            sup: r.sup,
            stabilized_at: r.stabilized_at,
            stable: r.stable,
            usable_until: r.usable_until,
            control_growth: r.control_growth,
        },
    )?;
    Ok(if r.stable { Status::Ok } else { Status::Quality("running sup does not stabilize on the range".into()) })
}

pub fn l1scaling(cfg: &mut RunConfig, run: &mut Run) -> Result<Status, CliError> {
    let sp = space(cfg)?;
    let o = topts(cfg);
    let sigmas = cfg.params.sigmas.get_or_insert_with(|| (0..6).map(|i| 0.02 * 10f64.powf(i as f64 / 5.0)).collect()).clone();
    let fit = l1_scaling_fit(&sp, &sigmas, o.t_max, &o)?;
    run.table(
        "l1.csv",
        &[],
        &[("sigma", "damping parameter"), ("l1_norm", "integral of |q_sigma| against the radial density")],
        &sigmas.iter().zip(&fit.norms).map(|(s, n)| nums(&[*s, *n])).collect::<Vec<_>>(),
    )?;
    let target = (1.0 - sp.n as f64) / 2.0;
    let pass = (fit.slope - target).abs() <= 0.15;
    #[derive(Serialize)]
    struct Report {
        space: String,
        slope: f64,
        slope_stderr: f64,
        intercept: f64,
        target: f64,
        tolerance: f64,
        pass: bool,
    }
    run.json(
        "report.json",
        &Report {
            space: sp.label(),
            slope: fit.slope,
            slope_stderr: fit.slope_stderr,
            intercept: fit.intercept,
            target,
            tolerance: 0.15,
            pass,
        },
    )?;
    Ok(if pass { Status::Ok } else { Status::Quality(format!("slope {:.3} is not within 0.15 of {target}", fit.slope)) })
}

pub fn subordination(cfg: &mut RunConfig, run: &mut Run) -> Result<Status, CliError> {
    let sp = space(cfg)?;
    let spec = multiplier(cfg, &sp)?;
    let o = topts(cfg);
    let ts = t_grid(cfg, 0.5, 2.0, 0.5)?;
    let threshold = *cfg.params.max_rel_err.get_or_insert(1e-3);
    let eps = cfg.numerics.eps;
    let direct = oscillating_kernel(&sp, &spec, &ts, eps, &o)?;
    let sub = subordination_assemble(&sp, spec.alpha, spec.beta, &ts, eps, &SigmaQuadrature::default(), &o)?;
    let rows: Vec<Vec<f64>> = ts
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let (a, b) = (direct.values()[i], sub.values()[i]);
            vec![t, a.re, a.im, b.re, b.im, (a - b).norm() / a.norm()]
        })
        .collect();
    run.table(
        "subordination.csv",
        &[],
        &[
            ("t", "geodesic distance from the origin"),
            ("direct_re", "kernel by inversion, real part"),
            ("direct_im", "kernel by inversion, imaginary part"),
            ("sigma_re", "kernel assembled from damped wave kernels, real part"),
            ("sigma_im", "kernel assembled from damped wave kernels, imaginary part"),
            ("rel_diff", "relative difference"),
        ],
        &rows.iter().map(|r| nums(r)).collect::<Vec<_>>(),
    )?;
    let worst = rows.iter().map(|r| r[5]).fold(0.0, f64::max);
    #[derive(Serialize)]
    struct Report {
        space: String,
        alpha: f64,
        beta: [f64; 2],
        eps: f64,
        max_rel_diff: f64,
        threshold: f64,
        pass: bool,
    }
    let pass = worst <= threshold;
    run.json(
        "report.json",
        &Report { space: sp.label(), alpha: spec.alpha, beta: [spec.beta.re, spec.beta.im], eps, max_rel_diff: worst, threshold, pass },
    )?;
    Ok(if pass { Status::Ok } else { Status::Quality(format!("relative difference {worst:.3e} exceeds {threshold:.3e}")) })
}

fn ks_options(cfg: &mut RunConfig) -> KsOptions {
    let j_max = *cfg.params.j_max.get_or_insert(60);
    KsOptions { j_max, transform: topts(cfg), ..KsOptions::default() }
}

pub fn ksbound(cfg: &mut RunConfig, run: &mut Run) -> Result<Status, CliError> {
    let sp = space(cfg)?;
    let spec = multiplier(cfg, &sp)?;
    let p = *cfg.params.p.get_or_insert(2.0);
    let eta = *cfg.params.eta_ratio.get_or_insert(0.5);
    let ko = ks_options(cfg);
    let k = FarKernel::build(&sp, &spec, &ko)?;
    let t = ks_total(&sp, &k.kappa_inf, p, eta, k.j_max)?;
    run.table(
        "shells.csv",
        &["shell j covers geodesic distances [j, j+1]"],
        &[
            ("j", "shell index"),
            ("I_j", "integral of |far kernel| times the weighted spherical function over the shell"),
            ("err", "quadrature error estimate"),
        ],
        &t.shells.iter().map(|s| nums(&[s.j as f64, s.value, s.quadrature_error])).collect::<Vec<_>>(),
    )?;
    let order = if spec.alpha < 1.0 { Some(shell_order(&sp, spec.alpha)?) } else { None };
    #[derive(Serialize)]
    struct Report<'a> {
        space: String,
        p: f64,
        eta_ratio: f64,
        i_total: f64,
        partial: f64,
        tail_bound: f64,
        converged: bool,
        fit: Option<&'a oscmult::kunze_stein::ShellDecayFit>,
        order: Option<usize>,
        meets_order: Option<bool>,
    }
    let meets = match (&t.fit, order) {
        (Some(f), Some(n)) => Some(f.meets(n)),
        _ => None,
    };
    run.json(
        "report.json",
        &Report {
            space: sp.label(),
            p,
            eta_ratio: eta,
            i_total: t.i_total,
            partial: t.partial,
            tail_bound: t.tail_bound,
            converged: t.converged,
            fit: t.fit.as_ref(),
            order,
            meets_order: meets,
        },
    )?;
    Ok(if t.converged { Status::Ok } else { Status::Quality("shell sum not converged".into()) })
}

pub fn certify(cfg: &mut RunConfig, run: &mut Run) -> Result<Status, CliError> {
    let sp = space(cfg)?;
    let spec = multiplier(cfg, &sp)?;
    let p = *cfg.params.p.get_or_insert(2.0);
    let eta = *cfg.params.eta_ratio.get_or_insert(0.5);
    let flags = GroupFlags {
        delta_lt_2rho: *cfg.params.delta_lt_2rho.get_or_insert(false),
        ct: *cfg.params.ct.get_or_insert(false),
    };
    let ko = ks_options(cfg);
    let c = certify_with_kernel(&sp, &spec, p, eta, flags, None, &ko);
    run.json("certificate.json", &c)?;
    Ok(Status::Ok)
}

fn mobius(v: &[f64]) -> Result<Mobius, CliError> {
    Ok(match v.len() {
        4 => Mobius::real(v[0], v[1], v[2], v[3])?,
        8 => Mobius::new(C64::new(v[0], v[1]), C64::new(v[2], v[3]), C64::new(v[4], v[5]), C64::new(v[6], v[7]))?,
        n => return Err(CliError::Usage(format!("[group] generators need 4 or 8 entries (got {n})"))),
    })
}

fn group_model(cfg: &RunConfig) -> Result<GroupModel, CliError> {
    let g = cfg.group()?;
    let kind: GroupKind = g.kind.parse()?;
    if let Some(p) = &g.preset {
        return Ok(match p.as_str() {
            "schottky-example" => GroupModel::schottky_example()?,
            "gamma2" => GroupModel::principal_congruence_two()?,
            other => return Err(CliError::Usage(format!("unknown preset '{other}' (schottky-example, gamma2)"))),
        });
    }
    if let Some(gens) = &g.generators {
        let gens: Result<Vec<Mobius>, CliError> = gens.iter().map(|v| mobius(v)).collect();
        return Ok(GroupModel::new(kind, gens?, g.dim)?);
    }
    match (kind, g.translation) {
        (GroupKind::Cyclic, Some(l)) => Ok(GroupModel::cyclic(l, g.dim)?),
        _ => Err(CliError::Usage("[group] needs preset, generators, or translation (cyclic)".into())),
    }
}

fn point(v: [f64; 3], dim: u32) -> Result<ModelPoint, CliError> {
    if dim == 2 && v[1] != 0.0 {
        return Err(CliError::Usage("points in the H^2 model need a zero second coordinate".into()));
    }
    Ok(ModelPoint::h3(v[0], v[1], v[2])?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GroupMode {
    Poincare,
    Delta,
    Quotient,
}

pub fn group(cfg: &mut RunConfig, run: &mut Run, mode: GroupMode) -> Result<Status, CliError> {
    let g = group_model(cfg)?;
    let dim = g.model_dim;
    let max_len = cfg.group()?.max_len;
    let ct = cfg.group()?.ct;
    let x = point(*cfg.params.x.get_or_insert([0.0, 0.0, 1.0]), dim)?;
    let y = point(*cfg.params.y.get_or_insert([0.0, 0.0, 1.0]), dim)?;
    let orbit_table = |run: &mut Run, o: &oscmult::groups::OrbitEnumeration| {
        let mut entries = o.entries.clone();
        entries.sort_by_key(|e| (e.length, e.id));
        let rows: Vec<Vec<String>> = entries
            .iter()
            .map(|e| vec![word_string(e.id, o.rank), e.length.to_string(), format!("{:?}", e.distance)])
            .collect();
        run.table(
            "orbit.csv",
            &["generators a, b, ... with inverses A, B, ...; the empty word is e"],
            &[("word", "reduced word"), ("length", "word length"), ("distance", "hyperbolic distance d(x, word y)")],
            &rows,
        )
    };
    match mode {
        GroupMode::Poincare => {
            let o = enumerate_orbit(&g, &x, &y, max_len)?;
            orbit_table(run, &o)?;
            let s = cfg.params.s.get_or_insert_with(|| vec![0.5, 1.0, 2.0]).clone();
            let rows: Result<Vec<Vec<String>>, CliError> = s
                .iter()
                .map(|&s| {
                    let p = poincare_partial(&o, s)?;
                    Ok(nums(&[s, p.sum, p.last_shell]))
                })
                .collect();
            run.table(
                "poincare.csv",
                &[],
                &[
                    ("s", "exponent"),
                    ("sum", "sum of exp(-s d(x, word y)) over words of length <= L"),
                    ("last_shell", "contribution of words of length exactly L"),
                ],
                &rows?,
            )?;
            Ok(Status::Ok)
        }
        GroupMode::Delta => {
            let o = enumerate_orbit(&g, &x, &y, max_len)?;
            let est = critical_exponent_estimate(&o)?;
            let rc = o.complete_radius;
            let rows: Vec<Vec<String>> = (1..=64)
                .map(|i| {
                    let r = rc * i as f64 / 64.0;
                    nums(&[r, orbit_count(&o, r) as f64])
                })
                .collect();
            run.table(
                "counts.csv",
                &[],
                &[("R", "hyperbolic radius"), ("N", "number of orbit points within R")],
                &rows,
            )?;
            let family = g.space().family;
            let cls = classify(&g, &est, ct, family);
            #[derive(Serialize)]
            struct Report<'a> {
                words: usize,
                complete_radius: f64,
                estimate: &'a oscmult::groups::CriticalExponent,
                classification: &'a oscmult::groups::GroupClassification,
            }
            run.json("report.json", &Report { words: o.entries.len(), complete_radius: rc, estimate: &est, classification: &cls })?;
            Ok(match &est.warning {
                Some(w) => Status::Quality(w.clone()),
                None => Status::Ok,
            })
        }
        GroupMode::Quotient => {
            let sigma = *cfg.params.sigma.get_or_insert(1.0);
            let o = topts(cfg);
            let q = quotient_wave_kernel(&g, sigma, &x, &y, max_len, ct.unwrap_or(false), &o)?;
            run.json("report.json", &q)?;
            Ok(if q.tail_bound.is_finite() { Status::Ok } else { Status::Quality("tail bound is not finite".into()) })
        }
    }
}
