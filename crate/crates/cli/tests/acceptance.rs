//! Acceptance suite. Each criterion prints one PASS/FAIL line with its measured
//! values. Criteria listed in `KNOWN_BLOCKED` are expected to fail at the
//! stated tolerance; the run fails if any other criterion fails, or if a
//! blocked criterion starts passing.

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use edgewall::battery::{el_check, strip2d_battery};
use edgewall_core::asymptotics::{bifurcation_scan, non_increasing, run_sweep, SweepOptions};
use edgewall_core::cutoff::{CutoffKind, CutoffSpec};
use edgewall_core::energy::{derive_regime, regime_grid, EnergyModel, PhysicalParams, RegimeMesh};
use edgewall_core::grid::Grid1D;
use edgewall_core::limit::{minimize_f0, WallProfile};
use edgewall_core::minimize::MinimizeOptions;
use edgewall_core::nonlocal::{assemble_stray_matrix, cell_pair_log_integral, gagliardo_energy, half_laplacian};
use edgewall_core::quad::{integrate, integrate_composite};

/// Criteria that cannot be met at the stated tolerance, with the sub-checks
/// responsible.
const KNOWN_BLOCKED: &[(&str, &[&str])] = &[("7", &["b"]), ("8", &["crossing"])];

/// `n₀(β = 1/4, λ = π)` from the bisection and golden-section oracles.
const N0_QUARTER: f64 = 0.5651977173836394;

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(name: &'static str, pass: bool, detail: impl Into<String>) -> Check {
    Check {
        name,
        pass,
        detail: detail.into(),
    }
}

struct Outcome {
    id: &'static str,
    title: &'static str,
    checks: Vec<Check>,
    elapsed: Duration,
}

fn timed(limit: Duration, elapsed: Duration) -> Check {
    check("runtime", elapsed < limit, format!("{:.2}s < {}s", elapsed.as_secs_f64(), limit.as_secs()))
}

// ---------------------------------------------------------------- oracles

/// Golden-section minimization of `F₀` on `[0, 1]`, comparing values through
/// their factored difference.
fn golden_f0(beta: f64, lambda: f64) -> f64 {
    let s = |n: f64| ((1.0 + n) / 2.0).sqrt();
    // F0(c) - F0(d)
    let diff = |c: f64, d: f64| (d - c) * (2.0 * beta.sqrt() / (2.0 * (s(c) + s(d))) * 2.0 - lambda * (c + d) / (2.0 * PI));
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    while b - a > 1e-14 {
        if diff(c, d) < 0.0 {
            b = d;
            d = c;
            c = b - r * (b - a);
        } else {
            a = c;
            c = d;
            d = a + r * (b - a);
        }
    }
    0.5 * (a + b)
}

fn interp(x: &[f64], u: &[f64], y: f64) -> f64 {
    if y <= x[0] || y >= x[x.len() - 1] {
        return 0.0;
    }
    let k = x.partition_point(|&p| p <= y) - 1;
    u[k] + (y - x[k]) / (x[k + 1] - x[k]) * (u[k + 1] - u[k])
}

/// `(1/4π)∬(u(x) - u(y))²/(x - y)²` of the zero-extended interpolant, by
/// quadrature in the offset `s` with the inner integral exact.
fn gagliardo_oracle(x: &[f64], u: &[f64], panels: usize) -> f64 {
    let (l, r) = (x[0], x[x.len() - 1]);
    let len = r - l;
    let inner = |s: f64| -> f64 {
        let mut br: Vec<f64> = x
            .iter()
            .copied()
            .chain(x.iter().map(|p| p - s))
            .filter(|&p| p >= l && p <= r - s)
            .chain([l, r - s])
            .collect();
        br.sort_by(|a, b| a.total_cmp(b));
        br.dedup();
        let g = |y: f64| interp(x, u, y + s) - interp(x, u, y);
        br.windows(2)
            .map(|w| {
                let (p, q) = (w[0], w[1]);
                let (ga, gm, gb) = (g(p), g(0.5 * (p + q)), g(q));
                (q - p) * (ga * ga + 4.0 * gm * gm + gb * gb) / 6.0
            })
            .sum::<f64>()
            / (s * s)
    };
    let pair = integrate_composite(4, 0.0, len, panels, inner);
    let edge: f64 = x
        .windows(2)
        .map(|w| {
            integrate(8, w[0], w[1], |y| {
                let v = interp(x, u, y);
                v * v * (1.0 / (y - l) + 1.0 / (r - y))
            })
        })
        .sum();
    (2.0 * pair + 2.0 * edge) / (4.0 * PI)
}

/// `(1/2π)∬ ln|x - y|⁻¹ u'(x) u'(y)` of the piecewise-linear interpolant.
fn log_kernel_form(x: &[f64], u: &[f64]) -> f64 {
    let n = x.len() - 1;
    let slope: Vec<f64> = (0..n).map(|k| (u[k + 1] - u[k]) / (x[k + 1] - x[k])).collect();
    let mut acc = 0.0;
    for k in 0..n {
        for l in 0..n {
            acc -= slope[k] * slope[l] * cell_pair_log_integral(x[k], x[k + 1], x[l], x[l + 1]);
        }
    }
    acc / (2.0 * PI)
}

/// Principal value of the bounded-interval half-Laplacian by symmetric
/// windows and Richardson extrapolation.
fn pv_oracle(u: impl Fn(f64) -> f64, b: f64, x: f64) -> f64 {
    let f = |y: f64| (u(x) - u(y)) / ((x - y) * (x - y));
    let windowed = |e: f64| integrate_composite(8, 0.0, x - e, 2000, f) + integrate_composite(8, x + e, b, 2000, f);
    let e = 1e-3;
    let (i1, i2, i3) = (windowed(e), windowed(e / 2.0), windowed(e / 4.0));
    let (r1, r2) = (2.0 * i2 - i1, 2.0 * i3 - i2);
    (4.0 * r2 - r1) / 3.0 / PI + b * u(x) / (PI * x * (b - x))
}

fn bump(c: f64, w: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        let t = (x - c) / w;
        if t.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - t * t)).exp()
        }
    }
}

// ---------------------------------------------------------------- criteria

fn criterion_1() -> Vec<Check> {
    let start = Instant::now();
    let mut out = Vec::new();
    let mut worst: f64 = 0.0;
    let mut mono = true;
    for (lambda, betas) in [(PI, vec![1.0, 1.5, 4.0]), (2.0, vec![0.5, 1.0, 9.0])] {
        for beta in betas {
            let r = minimize_f0(beta, lambda).unwrap();
            let target = lambda / (4.0 * PI);
            mono &= r.n0 == 1.0 && (r.f0_min - target).abs() <= 2.0 * f64::EPSILON * target;
        }
    }
    out.push(check("monodomain above beta_c", mono, "n0 = 1, F0 = lambda/4pi to 2 ulp"));
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let lambda = rng.gen_range(0.5..4.0);
        let beta = rng.gen_range(0.02..0.98) * lambda * lambda / (PI * PI);
        let r = minimize_f0(beta, lambda).unwrap();
        worst = worst.max((r.n0 - golden_f0(beta, lambda)).abs());
    }
    out.push(check("golden-section agreement", worst <= 1e-10, format!("max |dn0| = {worst:.2e} <= 1e-10")));
    let n0 = minimize_f0(0.25, PI).unwrap().n0;
    let oracle = golden_f0(0.25, PI);
    out.push(check(
        "n0(pi, 0.25)",
        (n0 - N0_QUARTER).abs() <= 1e-4 && (oracle - N0_QUARTER).abs() <= 1e-10,
        format!("n0 = {n0:.10}, frozen oracle {N0_QUARTER}"),
    ));
    out.push(timed(Duration::from_secs(1), start.elapsed()));
    out
}

fn criterion_2() -> Vec<Check> {
    let start = Instant::now();
    let mut out = Vec::new();
    let mut worst_res: f64 = 0.0;
    let mut worst_form: f64 = 0.0;
    let mut worst_energy: f64 = 0.0;
    for &(theta0, beta) in &[(PI / 2.0, 1.0), (0.3, 0.25), (1.2, 4.0), (PI / 2.0, 0.05), (0.97, 0.25)] {
        let w = WallProfile::new(theta0, beta).unwrap();
        let s = f64::sqrt(beta);
        let x0 = (theta0 / 4.0).tan().ln() / s;
        for i in 0..100 {
            let x = i as f64 * 0.1 / s;
            let z = (s * (x0 - x)).exp();
            let closed = 4.0 * z.atan();
            worst_form = worst_form.max((w.value(x) - closed).abs());
            worst_res = worst_res.max((w.derivative(x) + 2.0 * s * (w.value(x) / 2.0).sin()).abs());
        }
        let len = 60.0 / s;
        let e = integrate_composite(16, 0.0, len, 600, |x| {
            let d = w.derivative(x);
            0.5 * d * d + beta * (1.0 - w.value(x).cos())
        });
        let exact = 8.0 * s * (theta0 / 4.0).sin().powi(2);
        worst_energy = worst_energy.max((e - exact).abs());
    }
    out.push(check(
        "ODE residual",
        worst_res < 1e-10 && worst_form < 1e-12,
        format!("max residual {worst_res:.2e} < 1e-10 at 100 points"),
    ));
    out.push(check("energy identity", worst_energy < 1e-8, format!("max |E - 8 sqrt(beta) sin^2(theta0/4)| = {worst_energy:.2e}")));
    let special = WallProfile::new(PI / 2.0, 1.0).unwrap().energy();
    out.push(check(
        "theta0 = pi/2, beta = 1",
        (special - (4.0 - 2.0 * 2f64.sqrt())).abs() < 1e-14,
        format!("{special} = 4 - 2 sqrt 2"),
    ));
    out.push(timed(Duration::from_secs(1), start.elapsed()));
    out
}

fn criterion_3() -> Vec<Check> {
    let start = Instant::now();
    let mut out = Vec::new();
    let grid = Grid1D::uniform(0.0, 1.0, 257).unwrap();
    let k = assemble_stray_matrix(&grid).unwrap();
    let x = grid.nodes();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_k, mut worst_id): (f64, f64) = (0.0, 0.0);
    for _ in 0..5 {
        let w = rng.gen_range(0.1..0.4);
        let c = rng.gen_range(w + 0.02..1.0 - w - 0.02);
        let f = bump(c, w);
        let u: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let e = gagliardo_energy(&k, &u).unwrap();
        let oracle = gagliardo_oracle(x, &u, 4096);
        let log_form = log_kernel_form(x, &u);
        worst_k = worst_k.max((e - oracle).abs() / oracle);
        worst_id = worst_id.max((log_form - oracle).abs() / oracle);
    }
    out.push(check("assembly vs Gagliardo quadrature", worst_k < 1e-3, format!("max rel {worst_k:.2e} < 1e-3 on 5 bumps, N = 257")));

    let f = |t: f64| (PI * t / 2.0).sin().powi(2) * (2.0 - t) * t;
    let g2 = Grid1D::uniform(0.0, 2.0, 401).unwrap();
    let u2: Vec<f64> = g2.nodes().iter().map(|&t| f(t)).collect();
    let mut worst_h: f64 = 0.0;
    for i in [40, 100, 137, 200, 270, 333, 360] {
        let v = half_laplacian(&g2, &u2, i).unwrap();
        let o = pv_oracle(f, 2.0, g2.nodes()[i]);
        worst_h = worst_h.max((v - o).abs() / o.abs().max(1.0));
    }
    out.push(check("half-Laplacian vs PV quadrature", worst_h < 1e-3, format!("max rel {worst_h:.2e} < 1e-3")));
    out.push(check(
        "log-kernel identity",
        worst_id < 1e-5,
        format!("(1/2pi) log form vs (1/4pi) Gagliardo: max rel {worst_id:.2e}"),
    ));
    out.push(timed(Duration::from_secs(30), start.elapsed()));
    out
}

fn criterion_4() -> Vec<Check> {
    let start = Instant::now();
    let rows = el_check(
        1.0,
        4.0,
        1025,
        CutoffKind::Smoothstep,
        &[0.05, 0.2, 1.0],
        &[0.5, 1.0, 1.5],
        &MinimizeOptions::default(),
    )
    .unwrap();
    let worst = rows.iter().map(|r| r.el_residual_sup).fold(0.0, f64::max);
    let failed: Vec<String> = rows
        .iter()
        .filter(|r| !r.pass)
        .map(|r| format!("(h={}, delta={}, {})", r.h, r.delta, r.start))
        .collect();
    let cases = rows.iter().map(|r| (r.h.to_bits(), r.delta.to_bits())).collect::<std::collections::BTreeSet<_>>().len();
    vec![
        check(
            "structure of minimizers",
            failed.is_empty() && cases == 9,
            format!(
                "{} minimizers over {cases} (h, delta) cases, worst EL residual {worst:.2e} < 1e-3, failing: {:?}",
                rows.len(),
                failed
            ),
        ),
        timed(Duration::from_secs(600), start.elapsed()),
    ]
}

fn gradient_error(model: &EnergyModel, theta: &[f64], rng: &mut ChaCha8Rng) -> f64 {
    let (_, g) = model.evaluate_with_gradient(theta).unwrap();
    let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let h = 1e-5;
    let n = theta.len();
    let mut worst: f64 = 0.0;
    let mut idx: Vec<usize> = (0..40).map(|_| rng.gen_range(0..n)).collect();
    idx.extend([0, 1, n / 2, n - 2, n - 1]);
    for i in idx {
        let mut p = theta.to_vec();
        p[i] += h;
        let ep = model.evaluate(&p).unwrap().total;
        p[i] -= 2.0 * h;
        let em = model.evaluate(&p).unwrap().total;
        worst = worst.max(((ep - em) / (2.0 * h) - g[i]).abs() / scale);
    }
    let dir: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let shift = |s: f64| -> Vec<f64> { theta.iter().zip(&dir).map(|(t, d)| t + s * d).collect() };
    let fd = (model.evaluate(&shift(h)).unwrap().total - model.evaluate(&shift(-h)).unwrap().total) / (2.0 * h);
    let an: f64 = g.iter().zip(&dir).map(|(a, b)| a * b).sum();
    let norm: f64 = g.iter().map(|v| v.abs()).sum::<f64>();
    worst.max((fd - an).abs() / norm)
}

fn random_profile(x: &[f64], len: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let c: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
    x.iter()
        .map(|&t| {
            let s = t / len;
            c[0] + c[1] * (PI * s).cos() + c[2] * (3.0 * PI * s).sin() + c[3] * (-(t / 2.0)).exp() + c[4] * (-((len - t) / 2.0)).exp()
        })
        .collect()
}

fn criterion_5() -> Vec<Check> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let params = PhysicalParams::new(1.0, 4.0, 0.5, 0.2).unwrap();
    let cutoff = CutoffSpec::new(CutoffKind::Smoothstep, 0.5).unwrap();
    let grid = Grid1D::uniform(0.0, 4.0, 201).unwrap();
    let k = assemble_stray_matrix(&grid).unwrap();
    let phys = EnergyModel::physical(&params, &cutoff, &k).unwrap();
    let regime = derive_regime(1e-3, PI, 0.25, 1.0).unwrap();
    let rgrid = regime_grid(&regime, &RegimeMesh::default()).unwrap();
    let rk = assemble_stray_matrix(&rgrid).unwrap();
    let resc = EnergyModel::rescaled(&regime, CutoffKind::Smoothstep, &rk).unwrap();
    let (mut wp, mut wr): (f64, f64) = (0.0, 0.0);
    for _ in 0..5 {
        let t = random_profile(grid.nodes(), 4.0, &mut rng);
        wp = wp.max(gradient_error(&phys, &t, &mut rng));
        let t = random_profile(rgrid.nodes(), rgrid.right(), &mut rng);
        wr = wr.max(gradient_error(&resc, &t, &mut rng));
    }
    vec![
        check("physical energy", wp < 1e-5, format!("max rel error {wp:.2e} < 1e-5 on 5 profiles")),
        check("rescaled energy", wr < 1e-5, format!("max rel error {wr:.2e} < 1e-5 on 5 profiles")),
        timed(Duration::from_secs(60), start.elapsed()),
    ]
}

fn criterion_6() -> Vec<Check> {
    let start = Instant::now();
    let params = PhysicalParams::new(2.0, 4.0, 0.5, 0.3).unwrap();
    let cutoff = CutoffSpec::new(CutoffKind::Smoothstep, 0.5).unwrap();
    let rows = strip2d_battery(&params, &cutoff, 16, 81, 25, 5, 2024).unwrap();
    let by = |kind: &'static str| rows.iter().filter(move |r| r.kind == kind);
    let random_min = by("random").map(|r| r.gap).fold(f64::INFINITY, f64::min);
    let mod_min = by("modulated").map(|r| r.gap).fold(f64::INFINITY, f64::min);
    let cons = by("consistency").next().unwrap();
    let rel = (cons.e_full - cons.e_avg).abs() / cons.e_avg.abs();
    vec![
        check(
            "averaging gap on random fields",
            by("random").count() == 25 && by("random").all(|r| r.pass),
            format!("min gap {random_min:.3e} >= -1e-8 over 25 fields"),
        ),
        check(
            "strict gap on modulated fields",
            by("modulated").count() == 5 && by("modulated").all(|r| r.pass),
            format!("min gap {mod_min:.3e} > 1e-6 over 5 fields"),
        ),
        check("E2d = a E1d", rel <= 1e-3, format!("rel {rel:.2e} <= 1e-3")),
        timed(Duration::from_secs(300), start.elapsed()),
    ]
}

fn criterion_7() -> Vec<Check> {
    let start = Instant::now();
    let opts = SweepOptions::default();
    let eps = [1e-2, 1e-3, 1e-4, 1e-6];
    let sweep = run_sweep(&eps, PI, 0.25, &opts).unwrap();
    let complete = sweep.failures.is_empty() && sweep.points.len() == eps.len();
    let bracketed = complete && sweep.points.iter().all(|p| p.converged && p.bracketed());
    let errors = sweep.trace_errors();
    let gaps = sweep.l2_gaps();
    let strong = run_sweep(&eps, PI, 4.0, &opts).unwrap();
    let mono = strong.failures.is_empty()
        && strong.points.len() == eps.len()
        && strong.points.iter().all(|p| p.n_eps == 1.0 && p.theta_sup == 0.0);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ");
    vec![
        check(
            "a",
            bracketed,
            format!(
                "lower <= min F <= upper at all {} points: [{}]",
                sweep.points.len(),
                sweep
                    .points
                    .iter()
                    .map(|p| format!("{:.4} <= {:.4} <= {:.4}", p.bounds.lower_total, p.min_energy, p.bounds.upper_test))
                    .collect::<Vec<_>>()
                    .join("; ")
            ),
        ),
        check("b", complete && non_increasing(&errors, 0.0), format!("|n_eps - n0| = [{}] must be non-increasing", fmt(&errors))),
        check("c", complete && non_increasing(&gaps, 0.0), format!("blow-up L2 gap = [{}] must be non-increasing", fmt(&gaps))),
        check("d", mono, "beta = 4: n_eps = 1 and theta = 0 at every point"),
        timed(Duration::from_secs(1800), start.elapsed()),
    ]
}

fn criterion_8() -> Vec<Check> {
    let start = Instant::now();
    let betas: Vec<f64> = (0..11).map(|i| 0.25 + 0.125 * i as f64).collect();
    let scan = bifurcation_scan(&betas, PI, Some(1e-4), &SweepOptions::default()).unwrap();
    let solved = scan.rows.iter().all(|r| r.error.is_none());
    let traces = scan
        .rows
        .iter()
        .map(|r| format!("{}:{}", r.beta, r.n_eps.map(|n| format!("{n:.4}")).unwrap_or("-".into())))
        .collect::<Vec<_>>()
        .join(" ");
    let inside = scan.crossing.is_some_and(|c| (0.75..=1.25).contains(&c));
    vec![
        check(
            "crossing",
            solved && inside,
            format!("departure at beta = {:?} (bracket {:?}) must lie in [0.75, 1.25]; n_eps by beta: {traces}", scan.crossing, scan.bracket),
        ),
        timed(Duration::from_secs(1800), start.elapsed()),
    ]
}

fn run_cli(config: &Path, out: &Path) -> bool {
    std::process::Command::new(env!("CARGO_BIN_EXE_edgewall"))
        .arg("--config")
        .arg(config)
        .arg("--output-dir")
        .arg(out)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn criterion_9() -> Vec<Check> {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let configs = [
        ("minimize", "command = \"minimize\"\n[physical]\nb = 4.0\ndelta = 0.5\nh = 0.05\nnodes = 257\n", "profile.csv"),
        (
            "converge",
            "command = \"converge\"\n[regime]\nlambda = 3.141592653589793\nbeta = 0.25\neps_list = [1e-2, 1e-3, 1e-4]\n",
            "sweep.csv",
        ),
        (
            "bifurcation",
            "command = \"bifurcation\"\n[regime]\nlambda = 3.141592653589793\nbeta_list = [0.25, 0.5, 1.0, 2.0]\n",
            "bifurcation.csv",
        ),
        (
            "strip2d-check",
            "command = \"strip2d-check\"\n[physical]\na = 2.0\nb = 4.0\ndelta = 0.5\nh = 0.3\n[strip2d]\nrandom_fields = 3\nmodulated_fields = 2\n",
            "strip2d.csv",
        ),
    ];
    let mut identical = Vec::new();
    for (name, text, csv) in configs {
        let cfg = dir.path().join(format!("{name}.toml"));
        std::fs::write(&cfg, text).unwrap();
        let (a, b) = (dir.path().join(format!("{name}_1")), dir.path().join(format!("{name}_2")));
        let ok = run_cli(&cfg, &a) && run_cli(&cfg, &b);
        let same = ok && std::fs::read(a.join(csv)).ok().zip(std::fs::read(b.join(csv)).ok()).is_some_and(|(x, y)| x == y && !x.is_empty());
        identical.push((name, same));
    }
    vec![
        check(
            "byte-identical CSV",
            identical.iter().all(|(_, s)| *s),
            identical.iter().map(|(n, s)| format!("{n}: {s}")).collect::<Vec<_>>().join(", "),
        ),
        timed(Duration::from_secs(600), start.elapsed()),
    ]
}

fn main() -> ExitCode {
    let criteria: [(&str, &str, fn() -> Vec<Check>); 9] = [
        ("1", "limit model exactness", criterion_1),
        ("2", "wall profile exactness", criterion_2),
        ("3", "nonlocal operator fidelity", criterion_3),
        ("4", "minimizer structure", criterion_4),
        ("5", "gradient correctness", criterion_5),
        ("6", "dimensional reduction", criterion_6),
        ("7", "asymptotic regime", criterion_7),
        ("8", "bifurcation location", criterion_8),
        ("9", "determinism", criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut outcomes = Vec::new();
    for (id, title, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|a| a == id) {
            continue;
        }
        let start = Instant::now();
        let checks = f();
        let o = Outcome {
            id,
            title,
            checks,
            elapsed: start.elapsed(),
        };
        let pass = o.checks.iter().all(|c| c.pass);
        let parts: Vec<String> = o
            .checks
            .iter()
            .map(|c| format!("[{} {}] {}", c.name, if c.pass { "ok" } else { "FAIL" }, c.detail))
            .collect();
        println!(
            "criterion {} ({}): {} in {:.1}s | {}",
            o.id,
            o.title,
            if pass { "PASS" } else { "FAIL" },
            o.elapsed.as_secs_f64(),
            parts.join(" ")
        );
        outcomes.push(o);
    }

    let mut unexpected = Vec::new();
    for o in &outcomes {
        let failing: Vec<&str> = o.checks.iter().filter(|c| !c.pass).map(|c| c.name).collect();
        match KNOWN_BLOCKED.iter().find(|(id, _)| *id == o.id) {
            Some((_, blocked)) => {
                if failing.is_empty() {
                    unexpected.push(format!("criterion {} is listed as blocked but passed", o.id));
                }
                for f in failing.iter().filter(|f| !blocked.contains(f)) {
                    unexpected.push(format!("criterion {} check '{f}' failed", o.id));
                }
            }
            None => {
                for f in &failing {
                    unexpected.push(format!("criterion {} check '{f}' failed", o.id));
                }
            }
        }
    }
    let blocked: Vec<&str> = outcomes
        .iter()
        .filter(|o| KNOWN_BLOCKED.iter().any(|(id, _)| *id == o.id) && o.checks.iter().any(|c| !c.pass))
        .map(|o| o.id)
        .collect();
    println!(
        "acceptance: {} of {} criteria pass; known blocked: {:?}",
        outcomes.iter().filter(|o| o.checks.iter().all(|c| c.pass)).count(),
        outcomes.len(),
        blocked
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        for u in &unexpected {
            println!("unexpected: {u}");
        }
        ExitCode::FAILURE
    }
}
