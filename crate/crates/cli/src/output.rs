//! Result files: CSV tables with fixed headers, JSON records, plot-data blocks
//! and the run manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;

pub const PROFILE_HEADER: &str = "x,theta,m1,m2";
pub const SWEEP_HEADER: &str =
    "epsilon,L_eps,delta_eps,h_eps,min_F,target_2F0,n_eps,n0,l2_gap,lower_mm,lower_dual,upper_test";
pub const BIFURCATION_HEADER: &str = "beta,n0,theta0_deg,f0_min,regime";
pub const BIFURCATION_EPS_COLUMNS: &str = ",n_eps,min_F";
pub const BOUNDS_HEADER: &str =
    "epsilon,min_F,lower_mm,lower_dual,lower_total,upper_test,bracket_width,n_eps,k_trunc,r,R,bracketed";
pub const STRIP2D_HEADER: &str = "field,kind,e_full,e_avg,gap,criterion,status";
pub const EL_CHECK_HEADER: &str =
    "h,delta,start,converged,energy,el_residual_sup,m2_min,theta_min,theta_max,distinct,mirror_gap,symmetrized_excess,status";

/// Shortest round-trip form, in scientific notation outside `[1e-4, 1e15)`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !a.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Empty for a missing value.
pub fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// A CSV table with a fixed header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: String,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: impl Into<String>) -> Self {
        Self {
            header: header.into(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(&self.header);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }
}

/// One named `(x, y)` curve of a plot-data file.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub name: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

impl Curve {
    pub fn new(name: &str, x_label: &str, y_label: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            points,
        }
    }
}

pub fn render_curves(curves: &[Curve]) -> String {
    let mut out = String::new();
    for c in curves {
        let _ = writeln!(out, "# curve: {}", c.name);
        let _ = writeln!(out, "# x: {}", c.x_label);
        let _ = writeln!(out, "# y: {}", c.y_label);
        for (x, y) in &c.points {
            let _ = writeln!(out, "{} {}", num(*x), num(*y));
        }
        out.push('\n');
    }
    out
}

/// Collects written files under one output directory.
#[derive(Debug)]
pub struct Emitter {
    dir: PathBuf,
    pub files: Vec<String>,
}

impl Emitter {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
        self.files.push(name.to_string());
        Ok(())
    }

    pub fn table(&mut self, name: &str, t: &Table) -> Result<()> {
        self.write(name, &t.render())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value).context("serializing results")?;
        s.push('\n');
        self.write(name, &s)
    }
}
