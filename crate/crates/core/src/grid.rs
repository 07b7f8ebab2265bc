//! Meshes, trapezoidal quadrature and the angle/vector representation of
//! in-plane magnetization profiles.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Nonuniform 1D mesh with trapezoidal weights. Both endpoints are nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Geometric refinement toward both endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeRefine {
    pub edge_scale: f64,
    pub ratio: f64,
}

/// Mesh for the rescaled edge-wall problem: a uniformly resolved cutoff band at
/// each edge, a uniform wall layer, and geometric coarsening toward the middle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerMesh {
    pub cutoff_width: f64,
    pub cells_in_cutoff: usize,
    pub layer_spacing: f64,
    pub layer_extent: f64,
    pub growth: f64,
}

impl Grid1D {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 3 {
            return param(format!("grid needs at least 3 nodes, got {}", nodes.len()));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return param("grid nodes must be finite");
        }
        if let Some(k) = nodes.windows(2).position(|w| w[1] <= w[0]) {
            return param(format!("grid nodes not strictly increasing at index {k}"));
        }
        let n = nodes.len();
        let mut weights = vec![0.0; n];
        for k in 0..n - 1 {
            let h = nodes[k + 1] - nodes[k];
            weights[k] += 0.5 * h;
            weights[k + 1] += 0.5 * h;
        }
        Ok(Self { nodes, weights })
    }

    pub fn uniform(left: f64, right: f64, n: usize) -> Result<Self> {
        build_grid(left, right, n, None)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn left(&self) -> f64 {
        self.nodes[0]
    }

    pub fn right(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn domain_length(&self) -> f64 {
        self.right() - self.left()
    }

    pub fn num_cells(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Length of cell `k`, i.e. `x[k+1] - x[k]`.
    pub fn cell_len(&self, k: usize) -> f64 {
        self.nodes[k + 1] - self.nodes[k]
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.num_cells()).map(|k| self.cell_len(k)).fold(f64::INFINITY, f64::min)
    }

    pub fn max_spacing(&self) -> f64 {
        (0..self.num_cells()).map(|k| self.cell_len(k)).fold(0.0, f64::max)
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Index `k` of the cell `[x_k, x_{k+1}]` containing `x`, or `None` outside.
    pub fn locate(&self, x: f64) -> Option<usize> {
        if x < self.left() || x > self.right() {
            return None;
        }
        let k = self.nodes.partition_point(|&p| p <= x);
        Some(k.saturating_sub(1).min(self.num_cells() - 1))
    }

    /// Piecewise-linear interpolation of nodal `values` at `x`.
    pub fn interpolate(&self, values: &[f64], x: f64) -> Result<f64> {
        let k = self
            .locate(x)
            .ok_or_else(|| Error::Parameter(format!("x = {x} outside grid")))?;
        let t = (x - self.nodes[k]) / self.cell_len(k);
        Ok(values[k] + t * (values[k + 1] - values[k]))
    }

    /// Mirror node `i` about the midpoint, when the grid is reflection symmetric.
    pub fn mirror(&self, i: usize) -> usize {
        self.len() - 1 - i
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let (l, r) = (self.left(), self.right());
        let n = self.len();
        (0..n).all(|i| ((self.nodes[i] - l) - (r - self.nodes[n - 1 - i])).abs() <= tol * (r - l))
    }

    /// Same mesh scaled about the left endpoint.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0) {
            return param("scale factor must be positive");
        }
        let l = self.left();
        Self::from_nodes(self.nodes.iter().map(|x| l + factor * (x - l)).collect())
    }
}

fn mirrored(half: &[f64], left: f64, right: f64) -> Vec<f64> {
    // `half` holds offsets from the left edge up to and including the midpoint.
    let len = right - left;
    let mut nodes: Vec<f64> = half.iter().map(|d| left + d).collect();
    let mid = *half.last().unwrap();
    for d in half.iter().rev().skip(1) {
        nodes.push(right - d);
        debug_assert!(len - d > mid);
    }
    nodes
}

/// Append cells of spacing `h` from `pos` to `target`, adjusting the spacing so
/// the last node lands exactly on `target`.
fn fill_uniform(offsets: &mut Vec<f64>, target: f64, h: f64) {
    let pos = *offsets.last().unwrap();
    let span = target - pos;
    if span <= 0.0 {
        return;
    }
    let n = (span / h).round().max(1.0) as usize;
    let step = span / n as f64;
    for k in 1..n {
        offsets.push(pos + k as f64 * step);
    }
    offsets.push(target);
}

/// Geometric growth from spacing `h0` by `ratio` while the spacing stays below
/// `h_max` and the position stays below `limit`. Returns the last spacing used.
fn grow(offsets: &mut Vec<f64>, mut h: f64, ratio: f64, h_max: f64, limit: f64) -> f64 {
    loop {
        let pos = *offsets.last().unwrap();
        if h >= h_max || pos + h >= limit {
            return h;
        }
        offsets.push(pos + h);
        h *= ratio;
    }
}

fn close_half(offsets: &mut Vec<f64>, half: f64, h: f64) {
    // Drop a trailing node that would leave a sliver before the midpoint.
    while offsets.len() > 1 && half - offsets.last().unwrap() < 0.5 * h.min(half) {
        let last = *offsets.last().unwrap();
        if last == 0.0 {
            break;
        }
        offsets.pop();
    }
    fill_uniform(offsets, half, h);
}

pub fn build_grid(left: f64, right: f64, n_uniform: usize, edge_refine: Option<EdgeRefine>) -> Result<Grid1D> {
    if !(right > left) || !left.is_finite() || !right.is_finite() {
        return param(format!("invalid interval [{left}, {right}]"));
    }
    if n_uniform < 3 {
        return param(format!("n_uniform must be >= 3, got {n_uniform}"));
    }
    let len = right - left;
    let h_uniform = len / (n_uniform - 1) as f64;
    let Some(refine) = edge_refine else {
        let mut nodes: Vec<f64> = (0..n_uniform).map(|k| left + k as f64 * h_uniform).collect();
        nodes[n_uniform - 1] = right;
        return Grid1D::from_nodes(nodes);
    };
    if !(refine.edge_scale > 0.0 && refine.edge_scale < len / 4.0) {
        return param(format!(
            "edge_scale must lie in (0, {}), got {}",
            len / 4.0,
            refine.edge_scale
        ));
    }
    if !(refine.ratio > 1.0) {
        return param(format!("refinement ratio must exceed 1, got {}", refine.ratio));
    }
    let half = 0.5 * len;
    let h0 = 0.25 * refine.edge_scale;
    let mut offsets = vec![0.0];
    let h = grow(&mut offsets, h0, refine.ratio, h_uniform, half);
    close_half(&mut offsets, half, h.min(h_uniform).max(h0));
    Grid1D::from_nodes(mirrored(&offsets, left, right))
}

/// Symmetric mesh on `[0, width]` for the rescaled edge-wall energy.
pub fn build_layer_grid(width: f64, mesh: &LayerMesh) -> Result<Grid1D> {
    let half = 0.5 * width;
    if !(width > 0.0) || !(mesh.cutoff_width > 0.0) || mesh.cutoff_width >= half {
        return param(format!(
            "cutoff width {} must lie in (0, {half})",
            mesh.cutoff_width
        ));
    }
    if mesh.cells_in_cutoff == 0 || !(mesh.layer_spacing > 0.0) || !(mesh.growth > 1.0) {
        return param("layer mesh needs cells_in_cutoff >= 1, layer_spacing > 0 and growth > 1");
    }
    let hc = mesh.cutoff_width / mesh.cells_in_cutoff as f64;
    let mut offsets = vec![0.0];
    fill_uniform_exact(&mut offsets, mesh.cutoff_width, mesh.cells_in_cutoff);
    // Transition from the cutoff spacing to the layer spacing.
    let layer_end = mesh.layer_extent.min(half);
    let mut h = if hc < mesh.layer_spacing {
        grow(&mut offsets, hc * 1.2, 1.2, mesh.layer_spacing, layer_end)
    } else {
        hc
    };
    h = h.min(mesh.layer_spacing).max(hc.min(mesh.layer_spacing));
    let pos = *offsets.last().unwrap();
    if layer_end > pos + h {
        fill_uniform(&mut offsets, layer_end, mesh.layer_spacing.max(h));
        h = mesh.layer_spacing.max(h);
    }
    if half > *offsets.last().unwrap() {
        let h = grow(&mut offsets, h * mesh.growth, mesh.growth, f64::INFINITY, half);
        let last_gap = {
            let n = offsets.len();
            if n >= 2 {
                offsets[n - 1] - offsets[n - 2]
            } else {
                h
            }
        };
        close_half(&mut offsets, half, last_gap.max(mesh.layer_spacing).min(h));
    }
    Grid1D::from_nodes(mirrored(&offsets, 0.0, width))
}

fn fill_uniform_exact(offsets: &mut Vec<f64>, target: f64, cells: usize) {
    let pos = *offsets.last().unwrap();
    let step = (target - pos) / cells as f64;
    for k in 1..cells {
        offsets.push(pos + k as f64 * step);
    }
    offsets.push(target);
}

/// Angle representation `m = (-sin θ, cos θ)` sampled at grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleProfile {
    pub grid: Grid1D,
    pub theta: Vec<f64>,
}

impl AngleProfile {
    pub fn new(grid: Grid1D, theta: Vec<f64>) -> Result<Self> {
        if theta.len() != grid.len() {
            return param(format!(
                "profile has {} values for a grid of {} nodes",
                theta.len(),
                grid.len()
            ));
        }
        if let Some(i) = theta.iter().position(|t| !t.is_finite()) {
            return param(format!("theta not finite at node {i}"));
        }
        Ok(Self { grid, theta })
    }

    pub fn constant(grid: Grid1D, value: f64) -> Self {
        let theta = vec![value; grid.len()];
        Self { grid, theta }
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        let theta = grid.nodes().iter().map(|&x| f(x)).collect();
        Self::new(grid, theta)
    }

    pub fn m2(&self) -> Vec<f64> {
        self.theta.iter().map(|t| t.cos()).collect()
    }

    pub fn m1(&self) -> Vec<f64> {
        self.theta.iter().map(|t| -t.sin()).collect()
    }
}

/// Components of a unit vector field at grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnetizationProfile {
    pub grid: Grid1D,
    pub m1: Vec<f64>,
    pub m2: Vec<f64>,
}

impl MagnetizationProfile {
    pub fn new(grid: Grid1D, m1: Vec<f64>, m2: Vec<f64>) -> Result<Self> {
        if m1.len() != grid.len() || m2.len() != grid.len() {
            return param("component lengths must match the grid");
        }
        for (i, (a, b)) in m1.iter().zip(&m2).enumerate() {
            if ((a * a + b * b) - 1.0).abs() > 1e-12 {
                return param(format!("|m| != 1 at node {i}"));
            }
        }
        Ok(Self { grid, m1, m2 })
    }
}

pub fn theta_to_m(p: &AngleProfile) -> MagnetizationProfile {
    MagnetizationProfile {
        grid: p.grid.clone(),
        m1: p.m1(),
        m2: p.m2(),
    }
}

/// Inverse of [`theta_to_m`] on the branch `m2 >= 0`, where `θ = -arcsin m1`.
pub fn m_to_theta(p: &MagnetizationProfile) -> Result<AngleProfile> {
    if let Some(node) = p.m2.iter().position(|&v| v < 0.0) {
        return Err(Error::Branch { node, m2: p.m2[node] });
    }
    let theta = p.m1.iter().map(|&v| -v.clamp(-1.0, 1.0).asin()).collect();
    AngleProfile::new(p.grid.clone(), theta)
}
