//! Verification suites: each check yields one [`ResidualReport`].

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use stargen::evolve::{integrate_gauss, probability_of, propagate_observable, propagate_stargen, EvolutionSpec};
use stargen::linalg::{CMat, CVec};
use stargen::models::{self, ModelId, ModelKind};
use stargen::special::{airy_pair, hyp1f1, laguerre, laguerre_contour_adaptive};
use stargen::spectral::hyperbolic_density;
use stargen::{
    factor_sa, star_exp_quadratic, star_exp_semiclassical, star_exp_series, star_exp_symplectic, star_poly,
    star_poly_right, symplectic_scale, FactorMethod, GaussSymbol, PhaseConfig, PhaseGrid, PolySymbol, QuadraticForm,
    C64,
};

use crate::commands::default_grid;
use crate::output::GridMeta;
use crate::settings::RunConfig;
use crate::CliError;

pub const SUITES: [&str; 7] =
    ["stargenvalue", "normalization", "orthogonality", "theorem", "semiclassical", "evolution", "special-fn"];

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub suite: String,
    pub check: String,
    pub max_abs: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridMeta>,
}

struct Ctx<'a> {
    rc: &'a RunConfig,
    suite: &'static str,
    model: ModelId,
    max_n: Option<u32>,
    reports: Vec<ResidualReport>,
}

impl Ctx<'_> {
    fn push(&mut self, check: String, max_abs: f64, default_tol: f64, grid: Option<&PhaseGrid>) {
        let tolerance = self.rc.tolerance_or(default_tol);
        self.reports.push(ResidualReport {
            suite: self.suite.to_string(),
            check,
            max_abs,
            tolerance,
            // NaN never passes
            pass: max_abs < tolerance,
            grid: grid.map(GridMeta::of),
        });
    }

    fn grid(&self) -> Result<PhaseGrid, CliError> {
        self.rc.phase_grid(default_grid(self.model.kind))
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm()).fold(0.0, |a, b| if b.is_nan() || a.is_nan() { f64::NAN } else { a.max(b) })
}

/// Runs `suite` (or every suite for `"all"`). The model of the run is used
/// where the suite applies to it; other suites fall back to the 1-D
/// oscillator.
pub fn run(rc: &RunConfig, suite: &str, max_n: Option<u32>) -> Result<Vec<ResidualReport>, CliError> {
    let names: Vec<&'static str> = if suite == "all" {
        SUITES.to_vec()
    } else {
        match SUITES.iter().find(|s| **s == suite) {
            Some(s) => vec![*s],
            None => {
                return Err(CliError::Usage(format!("unknown suite {suite:?} (expected {} or all)", SUITES.join(", "))))
            }
        }
    };
    let all = suite == "all";
    let mut reports = Vec::new();
    for name in names {
        let applies = suite_applies(name, rc.model.kind);
        if !applies && !all {
            return Err(CliError::Usage(format!("suite {name} does not apply to model {}", rc.model.kind)));
        }
        let model = if applies {
            rc.model
        } else {
            let c = rc.model.config;
            ModelId::new(ModelKind::Ho1d, c.hbar, c.mass, c.omega)?
        };
        let mut ctx = Ctx { rc, suite: name, model, max_n, reports: Vec::new() };
        match name {
            "stargenvalue" => stargenvalue(&mut ctx)?,
            "normalization" => normalization(&mut ctx)?,
            "orthogonality" => orthogonality(&mut ctx)?,
            "theorem" => theorem(&mut ctx)?,
            "semiclassical" => semiclassical(&mut ctx)?,
            "evolution" => evolution(&mut ctx)?,
            "special-fn" => special_fn(&mut ctx)?,
            _ => unreachable!("suite names come from SUITES"),
        }
        reports.extend(ctx.reports);
    }
    Ok(reports)
}

fn suite_applies(suite: &str, kind: ModelKind) -> bool {
    match suite {
        "normalization" | "orthogonality" => kind != ModelKind::Linear,
        "theorem" | "semiclassical" | "special-fn" => kind == ModelKind::Ho1d,
        _ => true,
    }
}

fn gauss_residual(g: &GaussSymbol, f: &GaussSymbol, e: f64, grid: &PhaseGrid) -> Result<f64, CliError> {
    let r = g.with_prefactor(g.prefactor.sub(&f.prefactor.scale(c(e, 0.0))));
    Ok(max_abs(&grid.eval_gauss(&r)?))
}

fn stargenvalue(ctx: &mut Ctx) -> Result<(), CliError> {
    let model = ctx.model;
    let cfg = model.config;
    let h = model.hamiltonian();
    let grid = ctx.grid()?;
    let quantum = cfg.hbar * cfg.omega;
    match model.kind {
        ModelKind::Ho1d => {
            let n_max = ctx.max_n.unwrap_or(5);
            for n in 0..=n_max {
                for m in 0..=n_max {
                    let f = models::ho1d_wigner(cfg, n, m)?;
                    let (en, em) = (quantum * (n as f64 + 0.5), quantum * (m as f64 + 0.5));
                    let left = gauss_residual(&star_poly(&h, &f)?, &f, en, &grid)?;
                    let right = gauss_residual(&star_poly_right(&f, &h)?, &f, em, &grid)?;
                    ctx.push(format!("H*F[{n},{m}] - E_n F, F*H - E_m F"), left.max(right), 1e-9, Some(&grid));
                }
            }
        }
        ModelKind::Ho2d => {
            let l3 = models::l3(cfg);
            for r in 0..=ctx.max_n.unwrap_or(3) {
                let set = models::index_set(r);
                for &sp in &set {
                    for &s in &set {
                        let f = models::ho2d_wigner(cfg, r, sp, s)?;
                        let e = quantum * (r as f64 + 1.0);
                        let worst = [
                            gauss_residual(&star_poly(&h, &f)?, &f, e, &grid)?,
                            gauss_residual(&star_poly_right(&f, &h)?, &f, e, &grid)?,
                            gauss_residual(&star_poly(&l3, &f)?, &f, cfg.hbar * sp as f64, &grid)?,
                            gauss_residual(&star_poly_right(&f, &l3)?, &f, cfg.hbar * s as f64, &grid)?,
                        ]
                        .into_iter()
                        .fold(0.0, f64::max);
                        ctx.push(format!("H, L3 residuals of F[{r},{sp},{s}]"), worst, 1e-8, Some(&grid));
                    }
                }
            }
        }
        ModelKind::Linear => {
            let pts = grid.points();
            for (ep, e) in [(0.0, 0.0), (1.0, 0.0), (2.0, 1.0)] {
                let d = models::linear_stargen(cfg, ep, e)?;
                let left = star_poly(&h, &d)?.sub(&d.scale(c(ep, 0.0)));
                let right = star_poly_right(&d, &h)?.sub(&d.scale(c(e, 0.0)));
                let mut worst: f64 = 0.0;
                for z in &pts {
                    worst = worst.max(left.eval(z)?.norm()).max(right.eval(z)?.norm());
                }
                ctx.push(format!("H*D(E'={ep},E={e}) - E' D, D*H - E D"), worst, 1e-8, Some(&grid));
            }
        }
    }
    Ok(())
}

/// Diagonal states of an oscillator model with their energies.
fn diagonal_states(model: &ModelId, max_n: u32) -> Result<Vec<(String, GaussSymbol, f64)>, CliError> {
    let cfg = model.config;
    let quantum = cfg.hbar * cfg.omega;
    let mut out = Vec::new();
    match model.kind {
        ModelKind::Ho1d => {
            for n in 0..=max_n {
                out.push((format!("F[{n},{n}]"), models::ho1d_wigner(cfg, n, n)?, quantum * (n as f64 + 0.5)));
            }
        }
        ModelKind::Ho2d => {
            for r in 0..=max_n {
                for s in models::index_set(r) {
                    out.push((
                        format!("F[{r},{s},{s}]"),
                        models::ho2d_wigner(cfg, r, s, s)?,
                        quantum * (r as f64 + 1.0),
                    ));
                }
            }
        }
        ModelKind::Linear => return Err(CliError::Usage("the linear potential has no normalizable states".into())),
    }
    Ok(out)
}

fn normalization(ctx: &mut Ctx) -> Result<(), CliError> {
    let model = ctx.model;
    let default_max = if model.kind == ModelKind::Ho2d { 2 } else { 5 };
    let h = model.hamiltonian();
    for (label, f, e) in diagonal_states(&model, ctx.max_n.unwrap_or(default_max))? {
        let norm = integrate_gauss(&f)?;
        ctx.push(format!("integral of {label} = 1"), (norm - 1.0).norm(), 1e-6, None);
        let mean = integrate_gauss(&f.mul_poly(&h.poly))?;
        ctx.push(format!("integral of H {label} = E"), (mean - e).norm(), 1e-6, None);
    }
    Ok(())
}

fn orthogonality(ctx: &mut Ctx) -> Result<(), CliError> {
    let model = ctx.model;
    let cfg = model.config;
    let weight = (2.0 * PI * cfg.hbar).powi(cfg.dim_n as i32);
    let family: Vec<(String, GaussSymbol)> = match model.kind {
        ModelKind::Ho1d => {
            let k = ctx.max_n.unwrap_or(3);
            let mut v = Vec::new();
            for n in 0..=k {
                for m in 0..=k {
                    v.push((format!("F[{n},{m}]"), models::ho1d_wigner(cfg, n, m)?));
                }
            }
            v
        }
        ModelKind::Ho2d => {
            let mut v = Vec::new();
            for r in 0..=ctx.max_n.unwrap_or(1) {
                for sp in models::index_set(r) {
                    for s in models::index_set(r) {
                        v.push((format!("F[{r},{sp},{s}]"), models::ho2d_wigner(cfg, r, sp, s)?));
                    }
                }
            }
            v
        }
        ModelKind::Linear => return Err(CliError::Usage("orthogonality needs an oscillator model".into())),
    };
    let mut worst: f64 = 0.0;
    for (i, (_, f)) in family.iter().enumerate() {
        for (j, (_, g)) in family.iter().enumerate() {
            let v = integrate_gauss(&f.mul(&g.conj()))? * weight;
            let want = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - want).norm());
        }
    }
    let label = format!("(2 pi hbar)^N integral of F conj(G) = delta over {} functions", family.len());
    ctx.push(label, worst, 1e-6, None);
    Ok(())
}

fn form_1d(cfg: PhaseConfig, a: [f64; 3], b: [f64; 2], k: f64) -> Result<QuadraticForm, CliError> {
    let m = CMat::from_row_slice(2, 2, &[c(a[0], 0.0), c(a[1], 0.0), c(a[1], 0.0), c(a[2], 0.0)]);
    Ok(QuadraticForm::new(cfg, m, CVec::from_vec(vec![c(b[0], 0.0), c(b[1], 0.0)]))?.with_constant(c(k, 0.0)))
}

fn theorem(ctx: &mut Ctx) -> Result<(), CliError> {
    let cfg = ctx.model.config;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut forms = vec![("oscillator".to_string(), ctx.model.quadratic_form())];
    while forms.len() < 21 {
        let a: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        if (a[0] * a[2] - a[1] * a[1]).abs() < 0.1 {
            continue;
        }
        let b = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let label = format!("random form {}", forms.len());
        forms.push((label, form_1d(cfg, a, b, rng.gen_range(-1.0..1.0))?));
    }
    for (label, qf) in forms {
        let beta = C64::from_polar(rng.gen_range(0.05..0.2), rng.gen_range(0.0..2.0 * PI));
        let closed = star_exp_quadratic(&qf, beta)?;
        let series = star_exp_series(&qf.to_symbol(), beta, 20)?;
        let mut worst: f64 = 0.0;
        for i in 0..5 {
            for j in 0..5 {
                let z = [-1.0 + 0.5 * i as f64, -1.0 + 0.5 * j as f64];
                let (x, y) = (closed.eval(&z)?, series.eval(&z)?);
                worst = worst.max((x - y).norm() / x.norm());
            }
        }
        ctx.push(format!("{label}: closed form vs 20-term series (relative)"), worst, 1e-8, None);
    }
    Ok(())
}

fn semiclassical(ctx: &mut Ctx) -> Result<(), CliError> {
    let k = 0.3;
    let hbars = [0.2, 0.1, 0.05, 0.025];
    let mut logs = Vec::new();
    for hb in hbars {
        let cfg = PhaseConfig::unit(1).with_hbar(hb);
        let qf = form_1d(cfg, [0.5, 0.0, 0.5], [0.0, 0.0], 0.0)?;
        let scale = symplectic_scale(&qf, &factor_sa(&qf, FactorMethod::Diagonalization)?)?;
        let exact = star_exp_symplectic(&qf, &scale, c(0.0, k))?;
        let approx = star_exp_semiclassical(&qf.to_symbol(), k)?;
        let mut d: f64 = 0.0;
        for i in 0..11 {
            for j in 0..11 {
                let z = [-2.0 + 0.4 * i as f64, -2.0 + 0.4 * j as f64];
                d = d.max((exact.eval(&z)? - approx.eval(&z)?).norm());
            }
        }
        logs.push((hb.ln(), d.ln()));
    }
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / logs.len() as f64;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / logs.len() as f64;
    let slope = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / logs.iter().map(|(x, _)| (x - mx).powi(2)).sum::<f64>();
    ctx.push(format!("oscillator O(hbar^2) error slope {slope:.4} vs 4"), (slope - 4.0).abs(), 0.2, None);

    let h = ModelId::unit(ModelKind::Linear).hamiltonian();
    let mut worst: f64 = 0.0;
    for kk in [0.1, 0.5, 1.0, 2.0] {
        let sc = star_exp_semiclassical(&h, kk)?;
        worst = worst.max(sc.prefactor.max_diff(&PolySymbol::constant(h.config, c(1.0, kk.powi(3) / 24.0))));
    }
    ctx.push("linear potential prefactor = 1 + i k^3/24".into(), worst, 1e-14, None);
    Ok(())
}

fn evolution(ctx: &mut Ctx) -> Result<(), CliError> {
    let model = ctx.model;
    let cfg = model.config;
    let h = model.hamiltonian();
    let mut defect: f64 = 0.0;
    for t in [-10.0, -3.3, 0.1, 1.0, 5.0, 7.7, 10.0] {
        defect = defect.max(EvolutionSpec::from_symbol(&h, t)?.symplectic_defect());
    }
    ctx.push("flow symplectic for |t| <= 10".into(), defect, 1e-10, None);

    let q = PolySymbol::q(cfg, 0);
    let p = PolySymbol::p(cfg, 0);
    let mut coef: f64 = 0.0;
    for t in [0.1, 1.0, 5.0] {
        let got = propagate_observable(&q, &EvolutionSpec::from_symbol(&h, t)?)?;
        let want = match model.kind {
            ModelKind::Linear => q.add(&p.scale_re(t / cfg.mass)).add_const(c(-t * t / (2.0 * cfg.mass), 0.0)),
            _ => {
                let w = cfg.omega;
                q.scale_re((w * t).cos()).add(&p.scale_re((w * t).sin() / (cfg.mass * w)))
            }
        };
        coef = coef.max(got.max_diff(&want));
    }
    ctx.push("q(t) coefficients".into(), coef, 1e-14, None);

    if model.kind == ModelKind::Linear {
        return Ok(());
    }
    // a displaced, squeezed state (displaced along q1 only)
    let n = cfg.nvars();
    let dim = cfg.dim_n;
    let lq = (cfg.hbar / (cfg.mass * cfg.omega)).sqrt();
    let lp = (cfg.hbar * cfg.mass * cfg.omega).sqrt();
    let sq = 2.0;
    let mut m = CMat::zeros(n, n);
    for i in 0..dim {
        m[(i, i)] = c(-sq / (lp * lp), 0.0);
        m[(dim + i, dim + i)] = c(-1.0 / (sq * lq * lq), 0.0);
    }
    let q0 = 0.8 * lq;
    let mut v = CVec::zeros(n);
    v[dim] = c(2.0 * q0 / (sq * lq * lq), 0.0);
    let k = -q0 * q0 / (sq * lq * lq) - (PI * cfg.hbar).ln() * dim as f64;
    let fw = GaussSymbol::pure(cfg, m, v, c(k, 0.0))?;
    let measure = models::energy_measure(&model, 6)?;
    let base: Vec<f64> =
        measure.atoms.iter().map(|a| probability_of(&fw, &measure, a.eigenvalue)).collect::<Result<_, _>>()?;
    let mut drift: f64 = 0.0;
    for t in [0.1, 1.0, 5.0] {
        let moved = propagate_stargen(&measure, &EvolutionSpec::from_symbol(&h, t)?);
        for (atom, p0) in measure.atoms.iter().zip(&base) {
            drift = drift.max((probability_of(&fw, &moved, atom.eigenvalue)? - p0).abs());
        }
    }
    ctx.push("P(H = E_n) constant in t".into(), drift, 1e-8, None);
    Ok(())
}

fn special_fn(ctx: &mut Ctx) -> Result<(), CliError> {
    let mut worst: f64 = 0.0;
    for n in 0..=8 {
        for alpha in 0..=8 {
            for x in [0.1, 1.0, 4.0, 10.0] {
                worst = worst.max((laguerre_contour_adaptive(n, alpha, x)? - laguerre(n, alpha, x)).abs());
            }
        }
    }
    ctx.push("Laguerre contour vs recurrence, n, alpha <= 8".into(), worst, 1e-10, None);

    let (ai0, aip0) = airy_pair(0.0);
    let at_zero = (ai0 - 0.355_028_053_887_817_2).abs().max((aip0 + 0.258_819_403_792_806_8).abs());
    ctx.push("Ai(0), Ai'(0)".into(), at_zero, 1e-14, None);
    let h = 1e-4;
    let mut ode: f64 = 0.0;
    for x in [-8.0, -5.5, -2.0, -0.3, 0.7, 3.0, 8.0] {
        let d = (airy_pair(x + h).1 - airy_pair(x - h).1) / (2.0 * h);
        ode = ode.max((d - x * airy_pair(x).0).abs());
    }
    ctx.push("Ai'' = x Ai (central difference)".into(), ode, 1e-7, None);

    // Kummer: 1F1(a; b; z) = e^z 1F1(b − a; b; −z)
    let mut kummer: f64 = 0.0;
    for (a, b, z) in [
        (c(0.5, 0.3), c(1.0, 0.0), c(0.0, -2.0)),
        (c(1.0, -1.5), c(2.0, 0.0), c(0.0, 7.0)),
        (c(0.5, 2.0), c(1.0, 0.0), c(0.0, -20.0)),
        (c(1.5, 0.0), c(3.0, 0.0), c(1.2, 0.4)),
    ] {
        let lhs = hyp1f1(a, b, z)?;
        let rhs = z.exp() * hyp1f1(b - a, b, -z)?;
        kummer = kummer.max((lhs - rhs).norm() / lhs.norm());
    }
    ctx.push("1F1 Kummer transformation (relative)".into(), kummer, 1e-10, None);

    // hyperbolic density against trapezoid quadrature of its k-integral
    let mut dens: f64 = 0.0;
    for x in [-2.0, -0.4, 0.0, 0.9, 3.1] {
        for a in [-1.0, 0.0, 1.0] {
            let closed = hyperbolic_density(c(x, 0.0), a, 0.5, 1.0, 1)?;
            let (step, half) = (0.01, 9000);
            let mut acc = c(0.0, 0.0);
            for j in -half..=half {
                let k = j as f64 * step;
                let w = if j == -half || j == half { 0.5 } else { 1.0 };
                acc += C64::from_polar(w / (0.5 * k).cosh(), 2.0 * x * (0.5 * k).tanh() - k * a);
            }
            let num = acc * step / (2.0 * PI);
            dens = dens.max((closed - num).norm() / num.norm());
        }
    }
    ctx.push("Gamma 1F1 density vs k-integral (relative)".into(), dens, 1e-5, None);
    Ok(())
}
