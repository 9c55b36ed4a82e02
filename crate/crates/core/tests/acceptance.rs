//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use fgig::asymptotics::{convergence_curve, root_limit_check, scaling_exponents};
use fgig::characterization::{oracle_coefficients, series_coefficients, solve_c, verify_fixed_point};
use fgig::convolution::{free_convolve, ConvolutionGrid};
use fgig::entropy::{bessel_k, classical_entropy, classical_gig, gibbs_bound, maximality_scan, Perturbation, Potential};
use fgig::levy::{fsd_discriminant, fsd_report, fsd_threshold, levy_triplet, reconstruct_cumulant};
use fgig::measures::{
    build_fgig, build_free_poisson, fgig_density_with, kolmogorov_distance, mode, mode_quadratic, FreePoissonParams,
};
use fgig::params::{
    from_support, quartic_factored, solve_support, spectral_roots, support_residuals, NaturalParams, SpreadForm,
    SupportForm,
};
use fgig::transforms::{fid_certificate, r_fgig, r_free_poisson, FidGrid};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn rng(criterion: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_0000 + criterion)
}

fn log_uniform(r: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (r.gen_range(lo.ln()..hi.ln())).exp()
}

fn random_triple(r: &mut ChaCha8Rng, lambda: (f64, f64)) -> NaturalParams {
    let alpha = log_uniform(r, 0.1, 10.0);
    let beta = log_uniform(r, 0.1, 10.0);
    NaturalParams::new(alpha, beta, r.gen_range(lambda.0..=lambda.1)).unwrap()
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn parameter_consistency() -> Outcome {
    let mut r = rng(1);
    let (mut round, mut resid): (f64, f64) = (0.0, 0.0);
    let mut n = 0;
    while n < 100 {
        let lambda = r.gen_range(-5.0..=5.0);
        let a = log_uniform(&mut r, 0.05, 5.0);
        let b = a * log_uniform(&mut r, 1.01, 50.0);
        let Ok(s) = SupportForm::new(a, b, lambda) else { continue };
        n += 1;
        let p = from_support(&s).map_err(|e| e.to_string())?;
        let back = solve_support(&p).map_err(|e| format!("{p:?}: {e}"))?;
        round = round.max((back.a - a).abs() / a).max((back.b - b).abs() / b);
        let (e1, e2) = support_residuals(&p, &back);
        resid = resid.max(e1).max(e2);
    }
    let p = from_support(&SupportForm::new(1.0, 4.0, 0.0).unwrap()).unwrap();
    let s = solve_support(&NaturalParams::new(2.0, 8.0, 0.0).unwrap()).unwrap();
    let fixture = (p.alpha - 2.0).abs().max((p.beta - 8.0).abs()).max((s.a - 1.0).abs()).max((s.b - 4.0).abs());
    ensure(
        round <= 1e-10 && resid <= 1e-12 && fixture <= 1e-14,
        format!("round trip {round:.2e}, residual {resid:.2e}, fixture {fixture:.2e}"),
    )
}

fn root_identities() -> Outcome {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let mut p = random_triple(&mut r, (-5.0, 5.0));
        if i % 10 == 0 {
            p.lambda = 0.0;
        }
        let roots = spectral_roots(&p).map_err(|e| e.to_string())?;
        let a2 = p.alpha * p.alpha;
        let id = (4.0 * p.beta * roots.eta * roots.delta * roots.delta - a2).abs() / a2;
        let f0 = (quartic_factored(&p, &roots, 0.0) - a2).abs() / a2;
        let target = (p.lambda * p.alpha).powi(2);
        let fa = (quartic_factored(&p, &roots, p.alpha) - target).abs() / a2.max(target);
        worst = worst.max(id).max(f0).max(fa);
        let eta_gap = (roots.eta - p.alpha) / p.alpha;
        let eta_ok = if p.lambda == 0.0 { eta_gap.abs() <= 1e-12 } else { eta_gap > 0.0 };
        if !(roots.gamma < 0.0 && roots.delta < 0.0 && eta_ok) {
            return Err(format!("{p:?}: roots {roots:?}"));
        }
    }
    ensure(worst <= 1e-12, format!("largest relative identity error {worst:.2e}"))
}

fn fid_certificates() -> Outcome {
    let mut r = rng(3);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..20 {
        // spread λ evenly over [−5, 5] with random jitter
        let mut p = random_triple(&mut r, (-0.25, 0.25));
        p.lambda += -5.0 + 10.0 * i as f64 / 19.0;
        let rep = fid_certificate(&p, &FidGrid::default()).map_err(|e| e.to_string())?;
        worst = worst.max(rep.max_im);
        if !rep.passed {
            return Err(format!("{p:?}: max Im r {:.2e}", rep.max_im));
        }
    }
    ensure(worst <= 1e-9, format!("max Im r {worst:.2e} over 20 triples"))
}

fn levy_khintchine() -> Outcome {
    let mut r = rng(4);
    let (mut worst, mut limits): (f64, f64) = (0.0, 0.0);
    for _ in 0..10 {
        let p = random_triple(&mut r, (-3.0, 3.0));
        let t = levy_triplet(&p).map_err(|e| format!("{p:?}: {e}"))?;
        limits = limits.max(t.drift.abs()).max(t.semicircular.abs());
        for _ in 0..50 {
            let z = Complex64::from_polar(log_uniform(&mut r, 0.01, 10.0), -r.gen_range(0.0..PI));
            let direct = z * r_fgig(&p, z).map_err(|e| e.to_string())?;
            let rebuilt = reconstruct_cumulant(&t, z).map_err(|e| e.to_string())?;
            worst = worst.max((direct - rebuilt).norm());
        }
    }
    ensure(
        worst <= 1e-6 && limits <= 1e-6,
        format!("reconstruction {worst:.2e}, drift/semicircular {limits:.2e}"),
    )
}

fn fsd_threshold_location() -> Outcome {
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let a = log_uniform(&mut r, 0.1, 10.0);
        let b = a * log_uniform(&mut r, 1.05, 20.0);
        let d = |l: f64| fsd_discriminant(&SpreadForm { diff_sq: a, sum_sq: b, lambda: l });
        // D > 0 at λ = 0 and D < 0 as λ → −B/A
        let (mut lo, mut hi) = (-b / a * (1.0 - 1e-12), 0.0);
        if !(d(lo) < 0.0 && d(hi) > 0.0) {
            return Err(format!("no sign change for A {a}, B {b}"));
        }
        while hi - lo > 1e-13 * b / a {
            let mid = 0.5 * (lo + hi);
            if d(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        worst = worst.max((0.5 * (lo + hi) - fsd_threshold(a, b)).abs());
    }
    let special = (fsd_threshold(3.0, 4.0) + 4.0 * 3f64.sqrt() / 9.0).abs();
    let mut disagreements = 0;
    let mut fsd_count = 0;
    for _ in 0..20 {
        let p = random_triple(&mut r, (-5.0, 0.5));
        let rep = fsd_report(&p).map_err(|e| e.to_string())?;
        disagreements += usize::from(!rep.agrees);
        fsd_count += usize::from(rep.fsd);
    }
    ensure(
        worst <= 1e-9 && special <= 1e-12 && disagreements == 0,
        format!(
            "bisection vs closed form {worst:.2e}, B = 4A/3 case {special:.2e}, grid disagreements {disagreements}/20 ({fsd_count} fsd)"
        ),
    )
}

fn unimodality() -> Outcome {
    let mut r = rng(6);
    let (mut resid, mut violations): (f64, usize) = (0.0, 0);
    for _ in 0..20 {
        let p = random_triple(&mut r, (-5.0, 5.0));
        let s = solve_support(&p).map_err(|e| e.to_string())?;
        let m = mode(&p).map_err(|e| e.to_string())?;
        let (c2, c1, c0) = mode_quadratic(&p, &s);
        let scale = (c2 * m * m).abs() + (c1 * m).abs() + c0.abs();
        resid = resid.max(((c2 * m + c1) * m + c0).abs() / scale);
        let n = 10_000;
        let xs: Vec<f64> = (1..n).map(|i| s.a + (s.b - s.a) * i as f64 / n as f64).collect();
        let f: Vec<f64> = xs.iter().map(|&x| fgig_density_with(&p, &s, x)).collect();
        let peak = f.iter().fold(0.0f64, |a, b| a.max(*b));
        for i in 1..xs.len() {
            let slack = 1e-12 * peak;
            let bad = (xs[i] <= m && f[i] < f[i - 1] - slack) || (xs[i - 1] >= m && f[i] > f[i - 1] + slack);
            violations += usize::from(bad);
        }
    }
    let fixture = (mode(&NaturalParams::new(2.0, 8.0, 0.0).unwrap()).unwrap() - (153f64.sqrt() - 11.0)).abs();
    ensure(
        resid <= 1e-10 && violations == 0 && fixture <= 1e-10,
        format!("mode residual {resid:.2e}, monotonicity violations {violations}, fixture {fixture:.2e}"),
    )
}

fn convolution_identity() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for (al, be, la) in [(2.0, 8.0, 1.0), (1.0, 1.0, 2.0)] {
        let start = NaturalParams::new(al, be, -la).unwrap();
        let target = NaturalParams::new(al, be, la).unwrap();
        let fp = FreePoissonParams::new(1.0 / al, la).unwrap();
        let x = build_fgig(&start, 256).map_err(|e| e.to_string())?;
        let y = build_free_poisson(&fp, 256).map_err(|e| e.to_string())?;
        let conv = free_convolve(&x, &y, &ConvolutionGrid::default()).map_err(|e| e.to_string())?;
        let k = kolmogorov_distance(&conv, &build_fgig(&target, 256).map_err(|e| e.to_string())?);
        let mut radd: f64 = 0.0;
        let mut r = rng(7);
        for _ in 0..50 {
            let z = Complex64::from_polar(log_uniform(&mut r, 0.01, 10.0), -r.gen_range(0.0..PI));
            let lhs = r_fgig(&target, z).map_err(|e| e.to_string())?;
            let rhs = r_fgig(&start, z).map_err(|e| e.to_string())? + r_free_poisson(&fp, z).map_err(|e| e.to_string())?;
            radd = radd.max((lhs - rhs).norm() / lhs.norm().max(1.0));
        }
        ok &= k <= 1e-4 && radd <= 1e-10;
        details.push(format!("({al},{be},{la}): K {k:.2e}, R-additivity {radd:.2e}"));
    }
    ensure(ok, details.join("; "))
}

fn characterization() -> Outcome {
    let mut r = rng(8);
    let mut details = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..5 {
        let alpha = log_uniform(&mut r, 0.3, 5.0);
        let lambda = log_uniform(&mut r, 0.2, 5.0);
        let c = solve_c(alpha, lambda).map_err(|e| e.to_string())?;
        let s = series_coefficients(alpha, lambda, 8).map_err(|e| e.to_string())?;
        let o = oracle_coefficients(alpha, lambda, c, 8).map_err(|e| e.to_string())?;
        let dev = s.coeffs.iter().zip(&o.coeffs).take(9).map(|(a, b)| (a - b).abs() / b.abs()).fold(0.0, f64::max);
        let rep = verify_fixed_point(alpha, lambda).map_err(|e| e.to_string())?;
        if !rep.bounds_hold() {
            return Err(format!("({alpha}, {lambda}): coefficient bounds fail: {rep:?}"));
        }
        details.0 = details.0.max(dev).max(rep.max_rel_dev);
        details.1 = details.1.max(rep.fixed_point_distance);
        details.2 = details.2.max(rep.key_residual);
    }
    let (dev, dist, key) = details;
    ensure(
        dev <= 1e-6 && dist <= 1e-3 && key <= 1e-9,
        format!("series vs oracle {dev:.2e}, fixed point {dist:.2e}, key residual {key:.2e}"),
    )
}

fn limits() -> Outcome {
    let decades = |from: i32, to: i32| (from..=to).map(|k| 10f64.powi(-k)).collect::<Vec<f64>>();
    let mut out = Vec::new();
    let mut ok = true;
    for lambda in [2.0, 0.5, -2.0] {
        let curve = convergence_curve(1.0, lambda, &decades(1, 4)).map_err(|e| e.to_string())?;
        let d = curve.last().unwrap().distance;
        ok &= d <= 0.05;
        out.push(format!("λ={lambda}: d(1e-4) {d:.3}"));
    }
    let mut worst_exp: f64 = 0.0;
    for lambda in [2.0, 1.0, 0.5, -1.0, -2.5] {
        let e = scaling_exponents(1.0, lambda, &decades(4, 9)).map_err(|e| e.to_string())?;
        ok &= e.matches;
        worst_exp = worst_exp.max((e.p_a - e.expected.0).abs()).max((e.p_b - e.expected.1).abs());
    }
    out.push(format!("exponent error {worst_exp:.3}"));
    let mut worst_root: f64 = 0.0;
    for lambda in [2.0, 0.5, -0.3, -3.0] {
        let c = root_limit_check(1.5, lambda, 1e-6).map_err(|e| e.to_string())?;
        for e in [c.delta_error, c.eta_error].into_iter().flatten() {
            worst_root = worst_root.max(e);
        }
    }
    ok &= worst_root <= 0.01;
    out.push(format!("root limits {worst_root:.2e}"));
    ensure(ok, out.join(", "))
}

fn entropy() -> Outcome {
    let mut gibbs: f64 = 0.0;
    for (al, be, la) in [(2.0, 8.0, 1.0), (0.5, 0.3, -2.0), (1.0, 1.0, 0.5)] {
        let v = Potential::new(al, be, la).map_err(|e| e.to_string())?;
        let q = classical_gig(al, be, la).map_err(|e| e.to_string())?;
        let h = classical_entropy(&q, &v).map_err(|e| e.to_string())?;
        gibbs = gibbs.max((h - gibbs_bound(al, be, la).map_err(|e| e.to_string())?).abs());
    }
    let mut bessel: f64 = 0.0;
    for i in 0..=50 {
        let w = 0.05 + 0.5 * i as f64;
        let k12 = (PI / (2.0 * w)).sqrt() * (-w).exp();
        let k32 = k12 * (1.0 + 1.0 / w);
        let k52 = k12 * (1.0 + 3.0 / w + 3.0 / (w * w));
        for (nu, k) in [(0.5, k12), (1.5, k32), (2.5, k52)] {
            bessel = bessel.max((bessel_k(nu, w).map_err(|e| e.to_string())? / k - 1.0).abs());
        }
    }
    let p = NaturalParams::new(2.0, 8.0, 1.0).unwrap();
    let mut perts = vec![Perturbation::Scale(0.9), Perturbation::Scale(1.1), Perturbation::Scale(1.02)];
    for (a, b, l) in [(2.2, 8.0, 1.0), (1.8, 8.0, 1.0), (2.0, 8.8, 1.0), (2.0, 7.2, 1.0), (2.0, 8.0, 1.2), (2.0, 8.0, 0.8)] {
        perts.push(Perturbation::Params(NaturalParams::new(a, b, l).unwrap()));
    }
    let scan = maximality_scan(&p, &perts).map_err(|e| e.to_string())?;
    let min_margin = scan.entries.iter().map(|e| e.margin).fold(f64::INFINITY, f64::min);
    ensure(
        gibbs <= 1e-6 && bessel <= 1e-10 && min_margin > 0.0,
        format!("Gibbs gap {gibbs:.2e}, Bessel {bessel:.2e}, smallest margin {min_margin:.2e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("parameter consistency", parameter_consistency),
        ("root identities", root_identities),
        ("FID certificate", fid_certificates),
        ("Levy-Khintchine reconstruction", levy_khintchine),
        ("FSD threshold", fsd_threshold_location),
        ("unimodality", unimodality),
        ("convolution identity", convolution_identity),
        ("characterization", characterization),
        ("limits", limits),
        ("entropy", entropy),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("PASS {:>2} {name}: {d} [{secs:.1} s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {d} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
