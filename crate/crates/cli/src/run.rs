//! Command runners.

use std::time::Instant;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

use edgewall_core::asymptotics::{bifurcation_scan, run_sweep, sweep_point, SweepOptions};
use edgewall_core::cutoff::CutoffSpec;
use edgewall_core::energy::{derive_regime, regime_grid, EnergyModel};
use edgewall_core::grid::Grid1D;
use edgewall_core::minimize::{extract_edge_trace, minimize_theta, MinimizeReport};
use edgewall_core::nonlocal::assemble_stray_matrix;
use edgewall_core::Error;

use crate::battery::{el_check, strip2d_battery};
use crate::config::{Command, Format, RunConfig};
use crate::output::{
    num, opt, render_curves, Curve, Emitter, Table, BIFURCATION_EPS_COLUMNS, BIFURCATION_HEADER, BOUNDS_HEADER,
    EL_CHECK_HEADER, PROFILE_HEADER, STRIP2D_HEADER, SWEEP_HEADER,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NONCONVERGENCE: i32 = 3;
pub const EXIT_RESOLUTION: i32 = 4;

/// What a finished command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub files: Vec<String>,
    /// False when a solve did not converge or a verification check failed.
    pub ok: bool,
    pub summary: String,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.ok {
            EXIT_OK
        } else {
            EXIT_NONCONVERGENCE
        }
    }
}

/// Exit code for an error raised by a run.
pub fn exit_code_for(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<crate::config::ConfigError>().is_some() {
        return EXIT_CONFIG;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Resolution(_)) => EXIT_RESOLUTION,
        Some(Error::Optimization { .. }) => EXIT_NONCONVERGENCE,
        Some(Error::Parameter(_) | Error::Regime(_) | Error::Domain(_) | Error::Branch { .. }) => EXIT_CONFIG,
        _ => EXIT_FAILURE,
    }
}

fn sweep_options(cfg: &RunConfig) -> Result<SweepOptions> {
    Ok(SweepOptions {
        b: cfg.regime.b,
        cutoff: cfg.cutoff.kind,
        mesh: cfg.solver.mesh(),
        minimize: cfg.solver.minimize_options()?,
        k_trunc: cfg.regime.k_trunc.value(),
    })
}

/// Runs the configured command and writes its files into `cfg.output_dir`.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    let start = Instant::now();
    let mut out = Emitter::new(&cfg.output_dir)?;
    let (ok, summary, result) = match cfg.command {
        Command::Minimize => run_minimize(cfg, &mut out)?,
        Command::Converge => run_converge(cfg, &mut out)?,
        Command::Bounds => run_bounds(cfg, &mut out)?,
        Command::Bifurcation => run_bifurcation(cfg, &mut out)?,
        Command::Strip2dCheck => run_strip2d(cfg, &mut out)?,
        Command::ElCheck => run_el_check(cfg, &mut out)?,
    };
    if cfg.wants(Format::Json) {
        out.json(
            "result.json",
            &json!({ "command": cfg.command.as_str(), "config": cfg, "ok": ok, "result": result }),
        )?;
    }
    let mut files = out.files.clone();
    files.push("manifest.json".into());
    let manifest = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "command": cfg.command.as_str(),
        "config": cfg,
        "threads": rayon::current_num_threads(),
        "files": files,
        "ok": ok,
        "wall_clock_seconds": start.elapsed().as_secs_f64(),
    });
    out.json("manifest.json", &manifest)?;
    Ok(RunOutcome {
        files: out.files,
        ok,
        summary,
    })
}

type Produced = (bool, String, serde_json::Value);

fn to_value<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    serde_json::to_value(v).context("serializing results")
}

fn profile_table(report: &MinimizeReport) -> Table {
    let best = report.best();
    let mut t = Table::new(PROFILE_HEADER);
    let (m1, m2) = (best.profile.m1(), best.profile.m2());
    for (i, (&x, &th)) in best.profile.grid.nodes().iter().zip(&best.profile.theta).enumerate() {
        t.push(vec![num(x), num(th), num(m1[i]), num(m2[i])]);
    }
    t
}

fn profile_curves(report: &MinimizeReport) -> Vec<Curve> {
    report
        .results
        .iter()
        .map(|r| {
            let pts = r.profile.grid.nodes().iter().copied().zip(r.profile.theta.iter().copied()).collect();
            Curve::new(&format!("theta_{}", r.start_used), "x", "theta", pts)
        })
        .collect()
}

fn run_minimize(cfg: &RunConfig, out: &mut Emitter) -> Result<Produced> {
    let opts = cfg.solver.minimize_options()?;
    let (report, extra) = if cfg.physical.b.is_some() {
        let params = cfg.physical_params()?;
        let cutoff = CutoffSpec::new(cfg.cutoff.kind, params.delta)?;
        let grid = Grid1D::uniform(0.0, params.b, cfg.physical.nodes)?;
        let k = assemble_stray_matrix(&grid)?;
        let model = EnergyModel::physical(&params, &cutoff, &k)?;
        (minimize_theta(&model, &opts)?, json!({ "energy": "physical", "params": params }))
    } else {
        let regime = derive_regime(cfg.regime.epsilon.unwrap(), cfg.lambda()?, cfg.beta()?, cfg.regime.b)?;
        let grid = regime_grid(&regime, &cfg.solver.mesh())?;
        let k = assemble_stray_matrix(&grid)?;
        let model = EnergyModel::rescaled(&regime, cfg.cutoff.kind, &k)?;
        let report = minimize_theta(&model, &opts)?;
        let trace = extract_edge_trace(report.best(), &regime)?;
        (report, json!({ "energy": "rescaled", "regime": regime, "edge_trace": trace }))
    };
    if cfg.wants(Format::Csv) {
        out.table("profile.csv", &profile_table(&report))?;
    }
    if cfg.wants(Format::SvgData) {
        out.write("curves.dat", &render_curves(&profile_curves(&report)))?;
    }
    let best = report.best();
    let ok = report.results.iter().all(|r| r.converged);
    let summary = format!(
        "minimize: {} distinct result(s), lowest energy {} from start {}, converged = {ok}",
        report.results.len(),
        num(best.energy.total),
        best.start_used
    );
    Ok((ok, summary, json!({ "setup": extra, "report": to_value(&report)? })))
}

fn run_converge(cfg: &RunConfig, out: &mut Emitter) -> Result<Produced> {
    let sweep = run_sweep(&cfg.eps_values(), cfg.lambda()?, cfg.beta()?, &sweep_options(cfg)?)?;
    if cfg.wants(Format::Csv) {
        let mut t = Table::new(SWEEP_HEADER);
        for p in &sweep.points {
            let r = &p.regime;
            t.push(vec![
                num(p.epsilon),
                num(r.l_eps),
                num(r.delta_eps),
                num(r.h_eps),
                num(p.min_energy),
                num(p.target_2f0),
                num(p.n_eps),
                num(p.n0),
                num(p.profile_l2_gap),
                num(p.bounds.lower_mm),
                num(p.bounds.lower_dual),
                num(p.bounds.upper_test),
            ]);
        }
        out.table("sweep.csv", &t)?;
    }
    if cfg.wants(Format::SvgData) {
        let lg = |f: &dyn Fn(&edgewall_core::asymptotics::SweepPoint) -> f64| -> Vec<(f64, f64)> {
            sweep.points.iter().map(|p| (p.epsilon.log10(), f(p))).collect()
        };
        let curves = vec![
            Curve::new("min_F", "log10 epsilon", "min F", lg(&|p| p.min_energy)),
            Curve::new("target_2F0", "log10 epsilon", "2 F0(n0)", lg(&|p| p.target_2f0)),
            Curve::new("lower_total", "log10 epsilon", "lower bound", lg(&|p| p.bounds.lower_total)),
            Curve::new("upper_test", "log10 epsilon", "upper bound", lg(&|p| p.bounds.upper_test)),
            Curve::new("n_eps", "log10 epsilon", "edge trace", lg(&|p| p.n_eps)),
            Curve::new("l2_gap", "log10 epsilon", "blow-up L2 gap", lg(&|p| p.profile_l2_gap)),
        ];
        out.write("curves.dat", &render_curves(&curves))?;
    }
    let ok = sweep.failures.is_empty() && sweep.points.iter().all(|p| p.converged);
    let summary = format!(
        "converge: {} point(s), {} failure(s), {} bracketed",
        sweep.points.len(),
        sweep.failures.len(),
        sweep.points.iter().filter(|p| p.bracketed()).count()
    );
    Ok((ok, summary, to_value(&sweep)?))
}

fn run_bounds(cfg: &RunConfig, out: &mut Emitter) -> Result<Produced> {
    let opts = sweep_options(cfg)?;
    let (lambda, beta) = (cfg.lambda()?, cfg.beta()?);
    let points = cfg
        .eps_values()
        .iter()
        .map(|&e| sweep_point(e, lambda, beta, &opts))
        .collect::<edgewall_core::Result<Vec<_>>>()?;
    if cfg.wants(Format::Csv) {
        let mut t = Table::new(BOUNDS_HEADER);
        for p in &points {
            let b = &p.bounds;
            t.push(vec![
                num(p.epsilon),
                num(p.min_energy),
                num(b.lower_mm),
                num(b.lower_dual),
                num(b.lower_total),
                num(b.upper_test),
                num(b.bracket_width),
                num(b.n_eps),
                num(b.k_trunc),
                num(b.r),
                num(b.big_r),
                p.bracketed().to_string(),
            ]);
        }
        out.table("bounds.csv", &t)?;
    }
    if cfg.wants(Format::SvgData) {
        let lg = |f: &dyn Fn(&edgewall_core::asymptotics::SweepPoint) -> f64| -> Vec<(f64, f64)> {
            points.iter().map(|p| (p.epsilon.log10(), f(p))).collect()
        };
        let curves = vec![
            Curve::new("lower_total", "log10 epsilon", "lower bound", lg(&|p| p.bounds.lower_total)),
            Curve::new("min_F", "log10 epsilon", "min F", lg(&|p| p.min_energy)),
            Curve::new("upper_test", "log10 epsilon", "upper bound", lg(&|p| p.bounds.upper_test)),
        ];
        out.write("curves.dat", &render_curves(&curves))?;
    }
    let ok = points.iter().all(|p| p.converged && p.bracketed());
    let summary = format!(
        "bounds: {} point(s), {} bracketed",
        points.len(),
        points.iter().filter(|p| p.bracketed()).count()
    );
    let reports: Vec<_> = points.iter().map(|p| json!({ "epsilon": p.epsilon, "min_F": p.min_energy, "bounds": p.bounds })).collect();
    Ok((ok, summary, json!(reports)))
}

fn run_bifurcation(cfg: &RunConfig, out: &mut Emitter) -> Result<Produced> {
    let betas = cfg.regime.beta_list.clone().unwrap_or_default();
    let scan = bifurcation_scan(&betas, cfg.lambda()?, cfg.regime.epsilon, &sweep_options(cfg)?)?;
    let with_eps = scan.epsilon.is_some();
    if cfg.wants(Format::Csv) {
        let header = if with_eps {
            format!("{BIFURCATION_HEADER}{BIFURCATION_EPS_COLUMNS}")
        } else {
            BIFURCATION_HEADER.to_string()
        };
        let mut t = Table::new(header);
        for r in &scan.rows {
            let mut row = vec![num(r.beta), num(r.n0), num(r.theta0_deg), num(r.f0_min), r.regime.as_str().into()];
            if with_eps {
                row.push(opt(r.n_eps));
                row.push(opt(r.min_energy));
            }
            t.push(row);
        }
        out.table("bifurcation.csv", &t)?;
    }
    if cfg.wants(Format::SvgData) {
        let mut curves = vec![Curve::new(
            "n0",
            "beta",
            "n0",
            scan.rows.iter().map(|r| (r.beta, r.n0)).collect(),
        )];
        if with_eps {
            curves.push(Curve::new(
                "n_eps",
                "beta",
                "n_eps",
                scan.rows.iter().filter_map(|r| r.n_eps.map(|n| (r.beta, n))).collect(),
            ));
        }
        out.write("curves.dat", &render_curves(&curves))?;
    }
    let ok = scan.rows.iter().all(|r| r.error.is_none());
    let summary = match scan.crossing {
        Some(c) => format!("bifurcation: beta_c = {}, finite-epsilon crossing near {}", num(scan.beta_c), num(c)),
        None => format!("bifurcation: beta_c = {}", num(scan.beta_c)),
    };
    Ok((ok, summary, to_value(&scan)?))
}

fn run_strip2d(cfg: &RunConfig, out: &mut Emitter) -> Result<Produced> {
    let params = cfg.physical_params()?;
    let cutoff = CutoffSpec::new(cfg.cutoff.kind, params.delta)?;
    let s = &cfg.strip2d;
    let rows = strip2d_battery(&params, &cutoff, s.cells_x1, s.nodes_x2, s.random_fields, s.modulated_fields, s.seed)?;
    if cfg.wants(Format::Csv) {
        let mut t = Table::new(STRIP2D_HEADER);
        for r in &rows {
            t.push(vec![
                r.field.clone(),
                r.kind.clone(),
                num(r.e_full),
                num(r.e_avg),
                num(r.gap),
                r.criterion.clone(),
                if r.pass { "pass" } else { "fail" }.into(),
            ]);
        }
        out.table("strip2d.csv", &t)?;
    }
    if cfg.wants(Format::SvgData) {
        let pts = rows.iter().enumerate().map(|(i, r)| (i as f64, r.gap)).collect();
        out.write("curves.dat", &render_curves(&[Curve::new("gap", "field index", "e_full - e_avg", pts)]))?;
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    let ok = passed == rows.len();
    Ok((ok, format!("strip2d-check: {passed}/{} checks pass", rows.len()), to_value(&rows)?))
}

fn run_el_check(cfg: &RunConfig, out: &mut Emitter) -> Result<Produced> {
    let opts = cfg.solver.minimize_options()?;
    let rows = el_check(
        cfg.physical.a,
        cfg.physical.b.unwrap_or(4.0),
        cfg.physical.nodes,
        cfg.cutoff.kind,
        &cfg.el_check.h_list,
        &cfg.el_check.delta_list,
        &opts,
    )?;
    if cfg.wants(Format::Csv) {
        let mut t = Table::new(EL_CHECK_HEADER);
        for r in &rows {
            t.push(vec![
                num(r.h),
                num(r.delta),
                r.start.clone(),
                r.converged.to_string(),
                num(r.energy),
                num(r.el_residual_sup),
                num(r.m2_min),
                num(r.theta_min),
                num(r.theta_max),
                r.distinct.to_string(),
                num(r.mirror_gap),
                num(r.symmetrized_excess),
                if r.pass { "pass" } else { "fail" }.into(),
            ]);
        }
        out.table("el_check.csv", &t)?;
    }
    if cfg.wants(Format::SvgData) {
        let pts = rows.iter().enumerate().map(|(i, r)| (i as f64, r.el_residual_sup)).collect();
        out.write("curves.dat", &render_curves(&[Curve::new("el_residual_sup", "case index", "residual", pts)]))?;
    }
    let passed = rows.iter().filter(|r| r.pass).count();
    let ok = passed == rows.len();
    Ok((ok, format!("el-check: {passed}/{} minimizers pass", rows.len()), to_value(&rows)?))
}
