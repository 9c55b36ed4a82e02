//! One function per subcommand, each returning a [`Report`].

use fgig::asymptotics::{convergence_curve, limit_measure, root_limit_check, scaling_exponents};
use fgig::characterization::{verify_fixed_point, verify_iterated};
use fgig::convolution::{free_convolve_detailed, ConvolutionGrid};
use fgig::entropy::{classical_entropy, classical_gig, gibbs_bound, maximality_scan, Perturbation, Potential};
use fgig::levy::{fsd_report, levy_triplet, reconstruct_cumulant, LevyTriplet};
use fgig::measures::{
    build_fgig, build_fgig_with, build_free_poisson, fgig_density_with, kolmogorov_distance, mode_with, moment,
    FreePoissonParams,
};
use fgig::params::{
    from_support, quartic_factored, solve_support, spectral_roots_from_support, support_residuals,
    support_to_spread, validate, NaturalParams, ParamForm, SupportForm,
};
use fgig::transforms::{fgig_cauchy, fid_certificate, free_cumulants, r_free_poisson, FgigRTransform, FidGrid};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::args::{GridSpec, ParamArgs, ShapeArgs};
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Report, Table};

/// Parameter residual tolerance.
const RESIDUAL_TOL: f64 = 1e-12;
const RECONSTRUCTION_TOL: f64 = 1e-6;
const INVERSION_TOL: f64 = 1e-9;
const CONVOLUTION_TOL: f64 = 1e-4;
const R_ADDITIVITY_TOL: f64 = 1e-10;
const SERIES_TOL: f64 = 1e-6;
const FIXED_POINT_TOL: f64 = 1e-3;
const ITERATED_TOL: f64 = 2e-3;
const KEY_TOL: f64 = 1e-9;
const LIMIT_DISTANCE_TOL: f64 = 0.05;
const ROOT_LIMIT_TOL: f64 = 0.01;
const GIBBS_TOL: f64 = 1e-6;

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn verdicts(items: &[(&str, bool)]) -> Map<String, Value> {
    items.iter().map(|(k, v)| (k.to_string(), Value::Bool(*v))).collect()
}

/// Both parameter forms of the requested law.
struct Resolved {
    natural: NaturalParams,
    support: SupportForm,
    input: Value,
}

fn resolve(args: &ParamArgs) -> CliResult<Resolved> {
    match (args.alpha, args.beta, args.a, args.b) {
        (Some(alpha), Some(beta), None, None) => {
            let natural = NaturalParams::new(alpha, beta, args.lambda)?;
            let support = solve_support(&natural)?;
            Ok(Resolved { natural, support, input: json!({"alpha": alpha, "beta": beta, "lambda": args.lambda}) })
        }
        (None, None, Some(a), Some(b)) => {
            let support = SupportForm::new(a, b, args.lambda)?;
            let natural = from_support(&support)?;
            Ok(Resolved { natural, support, input: json!({"a": a, "b": b, "lambda": args.lambda}) })
        }
        _ => Err(CliError::Validation("give either --alpha and --beta, or --a and --b (with --lambda)".into())),
    }
}

fn natural_value(p: &NaturalParams) -> Value {
    json!({"alpha": p.alpha, "beta": p.beta, "lambda": p.lambda})
}

pub fn params(args: &ParamArgs) -> CliResult<Report> {
    let r = resolve(args)?;
    let (p, s) = (r.natural, r.support);
    let spread = support_to_spread(&s)?;
    let roots = spectral_roots_from_support(&s)?;
    let (eq1, eq2) = support_residuals(&p, &s);
    let alpha2 = p.alpha * p.alpha;
    // 4βηδ² = α², i.e. f(0) = α², and f(α) = (λα)²
    let f0 = (quartic_factored(&p, &roots, 0.0) - alpha2).abs() / alpha2;
    let fa = (quartic_factored(&p, &roots, p.alpha) - (p.lambda * p.alpha).powi(2)).abs() / alpha2;
    let checks = validate(&ParamForm::Support(s));
    let mode = mode_with(&p, &s);

    let mut table = Table::new(&["alpha", "beta", "lambda", "a", "b", "diff_sq", "sum_sq", "gamma", "delta", "eta", "mode"]);
    table.push(
        [p.alpha, p.beta, p.lambda, s.a, s.b, spread.diff_sq, spread.sum_sq, roots.gamma, roots.delta, roots.eta, mode]
            .into_iter()
            .map(Cell::from)
            .collect(),
    );
    Ok(Report {
        command: "params",
        input: r.input,
        tolerances: json!({"residual": RESIDUAL_TOL, "root_identity": RESIDUAL_TOL}),
        verdicts: verdicts(&[
            ("valid", checks.valid),
            ("residuals", eq1 <= RESIDUAL_TOL && eq2 <= RESIDUAL_TOL),
            ("root_identities", f0 <= RESIDUAL_TOL && fa <= RESIDUAL_TOL),
            ("root_signs", roots.gamma < 0.0 && roots.delta < 0.0 && roots.eta >= p.alpha),
        ]),
        result: json!({
            "natural": natural_value(&p),
            "support": to_value(&s),
            "spread": to_value(&spread),
            "roots": to_value(&roots),
            "residuals": {"eq1": eq1, "eq2": eq2, "f_at_0": f0, "f_at_alpha": fa},
            "validation": to_value(&checks),
            "mode": mode,
        }),
        table,
    })
}

pub fn density(args: &ParamArgs, grid: Option<GridSpec>, nodes: usize) -> CliResult<Report> {
    let r = resolve(args)?;
    let (p, s) = (r.natural, r.support);
    let m = build_fgig_with(&p, &s, nodes)?;
    let spec = grid.unwrap_or(GridSpec { lo: s.a, hi: s.b, count: 401 });
    let xs = spec.linear();
    let dens: Vec<f64> = xs.iter().map(|&x| fgig_density_with(&p, &s, x)).collect();
    let cdf: Vec<f64> = xs.iter().map(|&x| m.cdf(x)).collect();
    let mode = mode_with(&p, &s);
    let mass = m.mass();
    let peak = dens.iter().fold(0.0f64, |a, b| a.max(*b));
    let slack = 1e-12 * peak;
    let unimodal = xs.windows(2).zip(dens.windows(2)).all(|(x, d)| {
        if x[1] <= mode {
            d[1] >= d[0] - slack
        } else if x[0] >= mode {
            d[1] <= d[0] + slack
        } else {
            true
        }
    });

    let mut table = Table::new(&["x", "density", "cdf"]);
    for i in 0..xs.len() {
        table.push(vec![xs[i].into(), dens[i].into(), cdf[i].into()]);
    }
    Ok(Report {
        command: "density",
        input: r.input,
        tolerances: json!({"mass": 1e-10, "monotone_slack": 1e-12}),
        verdicts: verdicts(&[("mass", (mass - 1.0).abs() <= 1e-10), ("unimodal_on_grid", unimodal)]),
        result: json!({
            "natural": natural_value(&p),
            "support": to_value(&s),
            "mode": mode,
            "mass": mass,
            "mean": moment(&m, 1)?,
            "grid": {"lo": spec.lo, "hi": spec.hi, "count": spec.count},
            "x": xs,
            "density": dens,
            "cdf": cdf,
            "measure": to_value(&m.record()),
        }),
        table,
    })
}

fn complex(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn transform(args: &ParamArgs, grid: Option<GridSpec>, imag: f64, order: usize) -> CliResult<Report> {
    if !(imag > 0.0 && imag.is_finite()) {
        return Err(CliError::Validation(format!("--imag must be positive (got {imag})")));
    }
    let r = resolve(args)?;
    let (p, s) = (r.natural, r.support);
    let w = s.b - s.a;
    let spec = grid.unwrap_or(GridSpec { lo: s.a - 0.5 * w, hi: s.b + 0.5 * w, count: 41 });
    let rt = FgigRTransform::new(&p)?;
    let mut table = Table::new(&["x", "re_r", "im_r", "re_g", "im_g", "inversion_residual"]);
    let mut worst: f64 = 0.0;
    for x in spec.linear() {
        let rv = rt.eval(Complex64::new(x, -imag))?;
        let z = Complex64::new(x, imag);
        let g = fgig_cauchy(&p, &s, z);
        // G(z) lies in the lower half-plane, where r(G(z)) + 1/G(z) = z
        let back = rt.eval(g)? + 1.0 / g;
        let res = (back - z).norm() / z.norm().max(1.0);
        worst = worst.max(res);
        table.push(vec![x.into(), rv.re.into(), rv.im.into(), g.re.into(), g.im.into(), res.into()]);
    }
    let kappa = free_cumulants(&p, order.max(2))?;
    let m = build_fgig_with(&p, &s, 256)?;
    let mean = moment(&m, 1)?;
    let var = moment(&m, 2)? - mean * mean;
    let cumulant_dev = ((kappa[0] - mean).abs() / mean).max((kappa[1] - var).abs() / var);
    let fid = fid_certificate(&p, &FidGrid::default())?;
    Ok(Report {
        command: "transform",
        input: json!({"params": r.input, "imag": imag, "order": order}),
        tolerances: json!({"inversion": INVERSION_TOL, "cumulant_moment": 1e-10, "fid": fid.tolerance}),
        verdicts: verdicts(&[
            ("inversion", worst <= INVERSION_TOL),
            ("cumulants_match_moments", cumulant_dev <= 1e-10),
            ("fid", fid.passed),
        ]),
        result: json!({
            "natural": natural_value(&p),
            "support": to_value(&s),
            "cumulants": &kappa[..order],
            "mean": mean,
            "variance": var,
            "cumulant_moment_deviation": cumulant_dev,
            "max_inversion_residual": worst,
            "fid": to_value(&fid),
            "r_at_zero": complex(rt.eval(Complex64::new(0.0, 0.0))?),
        }),
        table,
    })
}

/// `x`, `τ(x)` and `k(x) = x τ(x)` on the grid.
fn levy_table(t: &LevyTriplet, grid: Option<GridSpec>) -> Table {
    let end = t.support_end;
    let spec = grid.unwrap_or(GridSpec { lo: end / 400.0, hi: end, count: 400 });
    let mut table = Table::new(&["x", "levy_density", "k"]);
    for x in spec.linear() {
        let tau = t.levy_density(x);
        table.push(vec![x.into(), tau.into(), (x.abs() * tau).into()]);
    }
    table
}

pub fn levy(args: &ParamArgs, grid: Option<GridSpec>) -> CliResult<Report> {
    let r = resolve(args)?;
    let p = r.natural;
    let t = levy_triplet(&p)?;
    let rt = FgigRTransform::new(&p)?;
    let mut points = Vec::new();
    let mut worst: f64 = 0.0;
    for rho in [0.1, 0.5, 1.0, 2.0, 5.0] {
        for theta in [-0.2, -0.9, -std::f64::consts::FRAC_PI_2, -2.3, -2.9] {
            let z = Complex64::from_polar(rho, theta);
            let direct = z * rt.eval(z)?;
            let rebuilt = reconstruct_cumulant(&t, z)?;
            let res = (direct - rebuilt).norm();
            worst = worst.max(res);
            points.push(json!({"z": complex(z), "direct": complex(direct), "reconstructed": complex(rebuilt), "residual": res}));
        }
    }
    Ok(Report {
        command: "levy",
        input: r.input,
        tolerances: json!({"reconstruction": RECONSTRUCTION_TOL}),
        verdicts: verdicts(&[("reconstruction", worst <= RECONSTRUCTION_TOL), ("free_regular", t.drift >= 0.0)]),
        result: json!({
            "triplet": to_value(&t),
            "max_reconstruction_residual": worst,
            "points": points,
        }),
        table: levy_table(&t, grid),
    })
}

pub fn fsd(args: &ParamArgs, grid: Option<GridSpec>) -> CliResult<Report> {
    let r = resolve(args)?;
    let p = r.natural;
    let rep = fsd_report(&p)?;
    let t = levy_triplet(&p)?;
    Ok(Report {
        command: "fsd",
        input: r.input,
        tolerances: json!({"threshold_localization": 1e-9}),
        verdicts: verdicts(&[("grid_agrees", rep.agrees)]),
        result: json!({
            "verdict": if rep.fsd { "fsd" } else { "not_fsd" },
            "report": to_value(&rep),
        }),
        table: levy_table(&t, grid),
    })
}

pub fn convolve(args: &ParamArgs, points: usize) -> CliResult<Report> {
    let r = resolve(args)?;
    let p = r.natural;
    if !(p.lambda > 0.0) {
        return Err(CliError::Validation(format!("convolve needs lambda > 0 (got {})", p.lambda)));
    }
    if points < 16 {
        return Err(CliError::Validation("--points must be at least 16".into()));
    }
    let start = NaturalParams::new(p.alpha, p.beta, -p.lambda)?;
    let fp = FreePoissonParams::new(1.0 / p.alpha, p.lambda)?;
    let x = build_fgig(&start, 256)?;
    let y = build_free_poisson(&fp, 256)?;
    let target = build_fgig_with(&p, &r.support, 256)?;
    let grid = ConvolutionGrid { points, ..ConvolutionGrid::default() };
    let conv = free_convolve_detailed(&x, &y, &grid)?;
    let distance = kolmogorov_distance(&conv.measure, &target);

    let rs = FgigRTransform::new(&start)?;
    let rp = FgigRTransform::new(&p)?;
    let mut r_residual: f64 = 0.0;
    for z in [Complex64::new(0.1, -0.1), Complex64::new(-1.0, -0.5), Complex64::new(0.5, -2.0), Complex64::new(3.0, -0.01)] {
        let lhs = rp.eval(z)?;
        let rhs = rs.eval(z)? + r_free_poisson(&fp, z)?;
        r_residual = r_residual.max((lhs - rhs).norm() / lhs.norm().max(1.0));
    }
    let mean = moment(&conv.measure, 1)?;
    let expected_mean = moment(&x, 1)? + moment(&y, 1)?;

    let mut table = Table::new(&["x", "density", "target_density"]);
    for (xv, d) in conv.grid.iter().zip(&conv.density) {
        table.push(vec![(*xv).into(), (*d).into(), fgig_density_with(&p, &r.support, *xv).into()]);
    }
    Ok(Report {
        command: "convolve",
        input: json!({"params": r.input, "points": points}),
        tolerances: json!({"kolmogorov": CONVOLUTION_TOL, "r_additivity": R_ADDITIVITY_TOL, "mass": 1e-6}),
        verdicts: verdicts(&[
            ("kolmogorov", distance <= CONVOLUTION_TOL),
            ("r_additivity", r_residual <= R_ADDITIVITY_TOL),
            ("mass", (conv.raw_mass - 1.0).abs() <= 1e-6),
        ]),
        result: json!({
            "start": natural_value(&start),
            "free_poisson": {"jump": fp.jump, "rate": fp.rate},
            "target": natural_value(&p),
            "kolmogorov_distance": distance,
            "r_additivity_residual": r_residual,
            "raw_mass": conv.raw_mass,
            "mean": mean,
            "expected_mean": expected_mean,
        }),
        table,
    })
}

pub fn fixpoint(args: &ShapeArgs) -> CliResult<Report> {
    let rep = verify_fixed_point(args.alpha, args.lambda)?;
    let iterated = args.beta.map(|b| verify_iterated(args.alpha, b, args.lambda)).transpose()?;
    let mut table = Table::new(&["order", "series", "oracle", "relative_deviation"]);
    for (k, (s, o)) in rep.series.coeffs.iter().zip(&rep.oracle.coeffs).enumerate() {
        table.push(vec![k.into(), (*s).into(), (*o).into(), ((s - o).abs() / o.abs()).into()]);
    }
    let mut v = vec![
        ("series_vs_oracle", rep.max_rel_dev <= SERIES_TOL),
        ("fixed_point", rep.fixed_point_distance <= FIXED_POINT_TOL),
        ("key_equation", rep.key_residual <= KEY_TOL),
        ("coefficient_bounds", rep.bounds_hold()),
    ];
    if let Some(it) = &iterated {
        v.push(("iterated", it.final_distance <= ITERATED_TOL));
    }
    Ok(Report {
        command: "fixpoint",
        input: json!({"alpha": args.alpha, "lambda": args.lambda, "beta": args.beta}),
        tolerances: json!({
            "series_vs_oracle": SERIES_TOL,
            "fixed_point": FIXED_POINT_TOL,
            "key_equation": KEY_TOL,
            "iterated": ITERATED_TOL,
        }),
        verdicts: verdicts(&v),
        result: json!({"characterization": to_value(&rep), "iterated": to_value(&iterated)}),
        table,
    })
}

pub fn limits(args: &ShapeArgs, betas: &GridSpec) -> CliResult<Report> {
    let mut bs = betas.geometric().map_err(CliError::Validation)?;
    bs.sort_by(|a, b| b.total_cmp(a));
    bs.dedup();
    let limit = limit_measure(args.alpha, args.lambda)?;
    let curve = convergence_curve(args.alpha, args.lambda, &bs)?;
    let exps = scaling_exponents(args.alpha, args.lambda, &bs)?;
    let smallest = *bs.last().expect("non-empty grid");
    let roots = root_limit_check(args.alpha, args.lambda, smallest)?;
    let last = curve.last().expect("one point per beta");
    let roots_ok = [roots.delta_error, roots.eta_error].iter().flatten().all(|e| *e <= ROOT_LIMIT_TOL);

    let mut table = Table::new(&["beta", "a", "b", "delta", "eta", "distance"]);
    for c in &curve {
        table.push(vec![c.beta.into(), c.a.into(), c.b.into(), c.delta.into(), c.eta.into(), c.distance.into()]);
    }
    Ok(Report {
        command: "limits",
        input: json!({"alpha": args.alpha, "lambda": args.lambda, "betas": bs}),
        tolerances: json!({"distance": LIMIT_DISTANCE_TOL, "exponent": 0.05, "root_limit": ROOT_LIMIT_TOL}),
        verdicts: verdicts(&[
            ("converged", last.distance <= LIMIT_DISTANCE_TOL),
            ("exponents", exps.matches),
            ("root_limits", roots_ok),
        ]),
        result: json!({
            "regime": to_value(&limit.regime),
            "limit": to_value(&limit.limit.record()),
            "curve": to_value(&curve),
            "exponents": to_value(&exps),
            "roots": to_value(&roots),
        }),
        table,
    })
}

/// Dilations by ±10% and 10% moves of each parameter (0.2 for `λ`).
fn default_perturbations(p: &NaturalParams) -> CliResult<Vec<Perturbation>> {
    let mut out = vec![Perturbation::Scale(0.9), Perturbation::Scale(1.1)];
    for (da, db, dl) in [(0.1, 0.0, 0.0), (-0.1, 0.0, 0.0), (0.0, 0.1, 0.0), (0.0, -0.1, 0.0)] {
        out.push(Perturbation::Params(NaturalParams::new(
            p.alpha * (1.0 + da),
            p.beta * (1.0 + db),
            p.lambda + dl,
        )?));
    }
    for dl in [0.2, -0.2] {
        out.push(Perturbation::Params(NaturalParams::new(p.alpha, p.beta, p.lambda + dl)?));
    }
    Ok(out)
}

fn describe(pert: &Perturbation) -> String {
    match pert {
        Perturbation::Scale(c) => format!("scale {c}"),
        Perturbation::Params(q) => format!("params {} {} {}", q.alpha, q.beta, q.lambda),
    }
}

pub fn entropy(args: &ParamArgs) -> CliResult<Report> {
    let r = resolve(args)?;
    let p = r.natural;
    let perts = default_perturbations(&p)?;
    let scan = maximality_scan(&p, &perts)?;
    let v = Potential::of(&p);
    let bound = gibbs_bound(p.alpha, p.beta, p.lambda)?;
    let gig = classical_gig(p.alpha, p.beta, p.lambda)?;
    let h = classical_entropy(&gig, &v)?;

    let mut table = Table::new(&["perturbation", "distance", "value", "margin"]);
    for e in &scan.entries {
        table.push(vec![describe(&e.perturbation).into(), e.distance.into(), e.value.into(), e.margin.into()]);
    }
    Ok(Report {
        command: "entropy",
        input: r.input,
        tolerances: json!({"gibbs": GIBBS_TOL, "maximality_min_distance": 0.05}),
        verdicts: verdicts(&[("maximal", scan.maximal), ("gibbs_attained", (h - bound).abs() <= GIBBS_TOL)]),
        result: json!({
            "free_entropy": scan.value,
            "maximality": to_value(&scan),
            "gibbs_bound": bound,
            "classical_entropy": h,
            "gibbs_gap": bound - h,
        }),
        table,
    })
}
