//! Quadrature on the unit disk.
//!
//! * [`DiskGrid`]: midpoint cells in `(s = r^2, theta)`, so the weights sum
//!   to `pi rmax^2` exactly, with graded splitting around singular points.
//! * [`CauchyEngine`]: the transform
//!   `v(z) = (1/pi) int phi(w) (1-|w|^2)^m / ((z-w)(1-conj(w) z)^m) dA(w)`
//!   for data given as a sum of compactly supported pieces. Points inside a
//!   piece use chords centred at `z`, which removes the `1/(z-w)`
//!   singularity exactly and keeps the result smooth in `z`.
//! * Forelli-Rudin integrals, local means and discrete norms.

use std::f64::consts::{PI, TAU};
use std::io::{BufRead, Write};
use std::num::NonZeroUsize;
use std::sync::Arc;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;

use crate::error::{ensure, Error, Result};
use crate::geometry::{CoveringNet, PseudoDisk};
use crate::weights::WeightEval;
use crate::C64;

/// Gauss-Legendre nodes and weights mapped to `[0, 1]`.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        let n = NonZeroUsize::new(n.max(1)).unwrap();
        let gl = GaussLegendre::new(n);
        let (nodes, weights) = gl.as_node_weight_pairs().iter().map(|&(x, w)| ((x + 1.0) / 2.0, w / 2.0)).unzip();
        GaussRule { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `int_a^b f`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = b - a;
        let mut s = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(a + h * x);
        }
        s * h
    }
}

/// Pairwise summation; the result depends only on the order of `xs`.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

pub fn pairwise_sum_c(xs: &[C64]) -> C64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum_c(l) + pairwise_sum_c(r)
}

/// Adaptive bisection with a 10/20-point Gauss-Legendre error estimate.
/// Accepts an interval once the two rules agree to
/// `max(rel_tol * |total estimate|, abs_tol) * (b - a) / (b0 - a0)`.
pub fn adaptive_integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> f64 {
    thread_local! {
        static RULES: (GaussRule, GaussRule) = (GaussRule::new(10), GaussRule::new(20));
    }
    RULES.with(|(lo, hi)| {
        let whole = b - a;
        if whole == 0.0 {
            return 0.0;
        }
        let global = hi.integrate(a, b, &mut f).abs();
        let mut stack = vec![(a, b, 0u32)];
        let mut parts = Vec::new();
        while let Some((x0, x1, depth)) = stack.pop() {
            let coarse = lo.integrate(x0, x1, &mut f);
            let fine = hi.integrate(x0, x1, &mut f);
            let share = ((x1 - x0) / whole).abs();
            let tol = (rel_tol * global).max(abs_tol) * share;
            let err = (fine - coarse).abs();
            // non-finite estimates are accepted as they stand rather than refined forever
            if !(err > tol) || depth >= 50 || parts.len() + stack.len() > 200_000 {
                parts.push((x0, fine));
            } else {
                let mid = 0.5 * (x0 + x1);
                stack.push((mid, x1, depth + 1));
                stack.push((x0, mid, depth + 1));
            }
        }
        parts.sort_by(|p, q| p.0.total_cmp(&q.0));
        let vals: Vec<f64> = parts.into_iter().map(|p| p.1).collect();
        pairwise_sum(&vals)
    })
}

/// Four-point complex difference quotient for `dbar = (d/dx + i d/dy) / 2`.
pub fn dbar_fd(u: impl Fn(C64) -> C64, z: C64, h: f64) -> C64 {
    let i = C64::new(0.0, 1.0);
    let dx = u(z + h) - u(z - h);
    let dy = u(z + i * h) - u(z - i * h);
    (dx + i * dy) / (4.0 * h)
}

/// Standard five-point Laplacian divided by 4 (i.e. `d dbar`).
pub fn lap_fd(u: impl Fn(C64) -> f64, z: C64, h: f64) -> f64 {
    let i = C64::new(0.0, 1.0);
    (u(z + h) + u(z - h) + u(z + i * h) + u(z - i * h) - 4.0 * u(z)) / (4.0 * h * h)
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    s0: f64,
    s1: f64,
    t0: f64,
    t1: f64,
}

impl Cell {
    fn mid(&self) -> C64 {
        C64::from_polar((0.5 * (self.s0 + self.s1)).sqrt(), 0.5 * (self.t0 + self.t1))
    }

    fn weight(&self) -> f64 {
        0.5 * (self.s1 - self.s0) * (self.t1 - self.t0)
    }

    fn radial_extent(&self) -> f64 {
        self.s1.sqrt() - self.s0.sqrt()
    }

    fn angular_extent(&self) -> f64 {
        self.s1.sqrt() * (self.t1 - self.t0)
    }
}

/// Quadrature nodes and area weights on `{|z| < rmax}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskGrid {
    pub nodes: Vec<C64>,
    pub weights: Vec<f64>,
    pub rmax: f64,
    pub n_radial: usize,
    pub depth: usize,
    pub singular: Vec<C64>,
}

pub const DEFAULT_REFINE_DEPTH: usize = 8;

impl DiskGrid {
    /// Midpoint grid with `n_radial` cells in `r^2` and `8 n_radial` in angle,
    /// refined around each singular point.
    pub fn build(rmax: f64, n_radial: usize, singular: &[C64]) -> Result<Self> {
        Self::build_refined(rmax, n_radial, singular, DEFAULT_REFINE_DEPTH)
    }

    pub fn build_refined(rmax: f64, n_radial: usize, singular: &[C64], depth: usize) -> Result<Self> {
        ensure!(n_radial >= 4, Error::Parameter(format!("n_radial = {n_radial} < 4")));
        ensure!(rmax > 0.0 && rmax <= 1.0, Error::Parameter(format!("rmax = {rmax} not in (0,1]")));
        for p in singular {
            ensure!(p.re.is_finite() && p.im.is_finite(), Error::NonFinite(format!("{p}")));
        }
        let n_theta = 8 * n_radial;
        let ds = rmax * rmax / n_radial as f64;
        let dt = TAU / n_theta as f64;
        let mut nodes = Vec::with_capacity(n_radial * n_theta);
        let mut weights = Vec::with_capacity(n_radial * n_theta);
        for i in 0..n_radial {
            for j in 0..n_theta {
                let cell = Cell {
                    s0: ds * i as f64,
                    s1: if i + 1 == n_radial { rmax * rmax } else { ds * (i + 1) as f64 },
                    t0: dt * j as f64,
                    t1: dt * (j + 1) as f64,
                };
                emit(cell, singular, depth, &mut nodes, &mut weights);
            }
        }
        Ok(DiskGrid { nodes, weights, rmax, n_radial, depth, singular: singular.to_vec() })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn covers(&self, z: C64) -> bool {
        z.norm() <= self.rmax
    }

    /// Samples `f` at every node, in node order.
    pub fn sample<T: Send>(&self, f: impl Fn(C64) -> T + Sync) -> Vec<T> {
        self.nodes.par_iter().map(|&z| f(z)).collect()
    }

    /// `sum w_i v_i` for node-aligned samples.
    pub fn sum(&self, values: &[f64]) -> f64 {
        let terms: Vec<f64> = values.iter().zip(&self.weights).map(|(v, w)| v * w).collect();
        pairwise_sum(&terms)
    }

    pub fn integrate(&self, f: impl Fn(C64) -> f64 + Sync) -> f64 {
        let terms: Vec<f64> = self.nodes.par_iter().zip(&self.weights).map(|(&z, &w)| w * f(z)).collect();
        pairwise_sum(&terms)
    }

    pub fn integrate_c(&self, f: impl Fn(C64) -> C64 + Sync) -> C64 {
        let terms: Vec<C64> = self.nodes.par_iter().zip(&self.weights).map(|(&z, &w)| f(z) * w).collect();
        pairwise_sum_c(&terms)
    }

    /// Text dump: a `#` header, optional `# singular re im` lines, then
    /// `re im weight` per node.
    pub fn dump(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "# diskgrid rmax={} n_radial={} depth={}", self.rmax, self.n_radial, self.depth)?;
        for p in &self.singular {
            writeln!(out, "# singular {} {}", p.re, p.im)?;
        }
        for (z, w) in self.nodes.iter().zip(&self.weights) {
            writeln!(out, "{} {} {}", z.re, z.im, w)?;
        }
        Ok(())
    }

    pub fn restore(input: impl BufRead) -> Result<Self> {
        let mut grid = DiskGrid {
            nodes: Vec::new(),
            weights: Vec::new(),
            rmax: f64::NAN,
            n_radial: 0,
            depth: 0,
            singular: Vec::new(),
        };
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("{s}: {e}")));
        for line in input.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# diskgrid") {
                for kv in rest.split_whitespace() {
                    let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(kv.into()))?;
                    match k {
                        "rmax" => grid.rmax = num(v)?,
                        "n_radial" => grid.n_radial = v.parse().map_err(|_| Error::Parse(kv.into()))?,
                        "depth" => grid.depth = v.parse().map_err(|_| Error::Parse(kv.into()))?,
                        _ => return Err(Error::Parse(format!("unknown grid key {k}"))),
                    }
                }
            } else if let Some(rest) = line.strip_prefix("# singular") {
                let v: Vec<&str> = rest.split_whitespace().collect();
                ensure!(v.len() == 2, Error::Parse(line.into()));
                grid.singular.push(C64::new(num(v[0])?, num(v[1])?));
            } else if line.starts_with('#') {
                continue;
            } else {
                let v: Vec<&str> = line.split_whitespace().collect();
                ensure!(v.len() == 3, Error::Parse(format!("expected 're im weight': {line}")));
                let (re, im, w) = (num(v[0])?, num(v[1])?, num(v[2])?);
                ensure!(re.is_finite() && im.is_finite() && w.is_finite(), Error::NonFinite(line.into()));
                ensure!(w > 0.0, Error::Parse(format!("non-positive weight: {line}")));
                grid.nodes.push(C64::new(re, im));
                grid.weights.push(w);
            }
        }
        ensure!(grid.rmax.is_finite(), Error::Parse("missing '# diskgrid' header".into()));
        Ok(grid)
    }
}

fn emit(cell: Cell, singular: &[C64], depth: usize, nodes: &mut Vec<C64>, weights: &mut Vec<f64>) {
    let radial = cell.radial_extent();
    let angular = cell.angular_extent();
    let diam = radial.max(angular);
    let mid = cell.mid();
    let near = depth > 0 && singular.iter().any(|&p| (p - mid).norm() < 1.5 * diam);
    if !near {
        nodes.push(mid);
        weights.push(cell.weight());
        return;
    }
    let split_s = radial >= 0.5 * angular;
    let split_t = angular >= 0.5 * radial;
    let sm = 0.5 * (cell.s0 + cell.s1);
    let tm = 0.5 * (cell.t0 + cell.t1);
    let s_parts: &[(f64, f64)] =
        &if split_s { [(cell.s0, sm), (sm, cell.s1)] } else { [(cell.s0, cell.s1), (f64::NAN, f64::NAN)] };
    let t_parts: &[(f64, f64)] =
        &if split_t { [(cell.t0, tm), (tm, cell.t1)] } else { [(cell.t0, cell.t1), (f64::NAN, f64::NAN)] };
    for &(s0, s1) in s_parts.iter().filter(|p| !p.0.is_nan()) {
        for &(t0, t1) in t_parts.iter().filter(|p| !p.0.is_nan()) {
            emit(Cell { s0, s1, t0, t1 }, singular, depth - 1, nodes, weights);
        }
    }
}

/// `(int |f e^{k_Z}|^p dA)^{1/p}` from node-aligned samples.
pub fn lp_norm(samples: &[C64], weight: &WeightEval<f64>, p: f64, grid: &DiskGrid) -> Result<f64> {
    ensure!(p > 0.0, Error::Parameter(format!("p = {p} must be positive")));
    ensure!(samples.len() == grid.len(), Error::Parameter("samples not aligned with grid".into()));
    ensure!(samples.iter().all(|v| v.re.is_finite() && v.im.is_finite()), Error::NonFinite("sampled function".into()));
    let vals: Vec<f64> = samples
        .par_iter()
        .zip(&grid.nodes)
        .map(|(f, &z)| {
            let a = f.norm();
            if a == 0.0 {
                0.0
            } else {
                (p * (a.ln() + weight.k(z))).exp()
            }
        })
        .collect();
    Ok(grid.sum(&vals).powf(1.0 / p))
}

/// `lp_norm` for a function given as a closure.
pub fn lp_norm_fn(f: impl Fn(C64) -> C64 + Sync, weight: &WeightEval<f64>, p: f64, grid: &DiskGrid) -> Result<f64> {
    let samples = grid.sample(f);
    lp_norm(&samples, weight, p, grid)
}

/// Complex density `phi` on the plane.
pub type Density = Arc<dyn Fn(C64) -> C64 + Send + Sync>;

/// A compactly supported summand of the data: `density` vanishes outside
/// the Euclidean disk `(center, radius)` and is smooth except across the
/// `breaks` circles.
#[derive(Clone)]
pub struct Piece {
    pub center: C64,
    pub radius: f64,
    pub breaks: Vec<(C64, f64)>,
    pub density: Density,
}

impl std::fmt::Debug for Piece {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Piece")
            .field("center", &self.center)
            .field("radius", &self.radius)
            .field("breaks", &self.breaks)
            .finish()
    }
}

impl Piece {
    pub fn new(center: C64, radius: f64, density: Density) -> Self {
        Piece { center, radius, breaks: Vec::new(), density }
    }

    /// Piece supported in a pseudo-hyperbolic disk.
    pub fn on_pseudo_disk(disk: &PseudoDisk<f64>, density: Density) -> Self {
        let (c, r) = disk.euclidean_params();
        Piece::new(c, r, density)
    }

    pub fn with_breaks(mut self, breaks: Vec<(C64, f64)>) -> Self {
        self.breaks = breaks;
        self
    }

    pub fn eval(&self, w: C64) -> C64 {
        if (w - self.center).norm() >= self.radius {
            C64::new(0.0, 0.0)
        } else {
            (self.density)(w)
        }
    }
}

/// Node counts for [`CauchyEngine`].
#[derive(Clone, Copy, Debug)]
pub struct CauchyRule {
    /// Gauss points per chord segment.
    pub n_rho: usize,
    /// Angles for chords (trapezoid inside a piece, Gauss on the cone outside).
    pub n_theta: usize,
    /// Radial Gauss points of the fixed rule used away from a piece.
    pub n_far_radial: usize,
    /// Angles of the fixed rule.
    pub n_far_angular: usize,
    /// Chords are used while `|z - center| < near * radius`.
    pub near: f64,
}

impl Default for CauchyRule {
    fn default() -> Self {
        CauchyRule { n_rho: 20, n_theta: 64, n_far_radial: 24, n_far_angular: 48, near: 1.5 }
    }
}

impl CauchyRule {
    /// Doubles every node count.
    pub fn refined(&self) -> Self {
        CauchyRule {
            n_rho: 2 * self.n_rho,
            n_theta: 2 * self.n_theta,
            n_far_radial: 2 * self.n_far_radial,
            n_far_angular: 2 * self.n_far_angular,
            near: self.near,
        }
    }
}

struct FarRule {
    nodes: Vec<C64>,
    /// `weight * phi(w) * (1 - |w|^2)^m / pi`.
    coef: Vec<C64>,
}

/// Evaluates the modified Cauchy transform of a sum of pieces.
pub struct CauchyEngine {
    m: i32,
    rule: CauchyRule,
    pieces: Vec<Piece>,
    far: Vec<FarRule>,
    rho_rule: GaussRule,
    theta_rule: GaussRule,
}

#[inline]
fn solver_weight(m: i32, z: C64, w: C64) -> C64 {
    if m == 0 {
        return C64::new(1.0, 0.0);
    }
    let num = 1.0 - w.norm_sqr();
    (C64::new(num, 0.0) / (1.0 - w.conj() * z)).powi(m)
}

/// Parameters `t` where the ray `z + t e^{i theta}` meets the circle `(c, r)`.
#[inline]
fn ray_circle(z: C64, dir: C64, c: C64, r: f64) -> Option<(f64, f64)> {
    let d = z - c;
    let b = (dir.conj() * d).re;
    let q = d.norm_sqr() - r * r;
    let disc = b * b - q;
    if disc <= 0.0 {
        return None;
    }
    let s = disc.sqrt();
    Some((-b - s, -b + s))
}

impl CauchyEngine {
    pub fn new(pieces: Vec<Piece>, m: i32, rule: CauchyRule) -> Result<Self> {
        ensure!(m >= 0, Error::Parameter(format!("kernel power m = {m} must be >= 0")));
        for p in &pieces {
            ensure!(
                p.radius > 0.0 && p.center.norm() + p.radius <= 1.0,
                Error::Coverage(format!("piece at {} radius {} leaves the disk", p.center, p.radius))
            );
        }
        let radial = GaussRule::new(rule.n_far_radial);
        let far = pieces
            .par_iter()
            .map(|p| {
                let mut nodes = Vec::with_capacity(rule.n_far_radial * rule.n_far_angular);
                let mut coef = Vec::with_capacity(nodes.capacity());
                let dt = TAU / rule.n_far_angular as f64;
                for (&x, &wx) in radial.nodes.iter().zip(&radial.weights) {
                    let rho = p.radius * x;
                    for k in 0..rule.n_far_angular {
                        let w = p.center + C64::from_polar(rho, dt * k as f64);
                        let area = wx * p.radius * rho * dt;
                        let val = (p.density)(w) * (1.0 - w.norm_sqr()).powi(m) * (area / PI);
                        nodes.push(w);
                        coef.push(val);
                    }
                }
                FarRule { nodes, coef }
            })
            .collect();
        Ok(CauchyEngine {
            m,
            rule,
            pieces,
            far,
            rho_rule: GaussRule::new(rule.n_rho),
            theta_rule: GaussRule::new((rule.n_theta / 2).max(8)),
        })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    /// Contribution of piece `j` at `z`.
    pub fn piece_value(&self, j: usize, z: C64) -> C64 {
        let p = &self.pieces[j];
        let d = (z - p.center).norm();
        if d >= self.rule.near * p.radius {
            let far = &self.far[j];
            let mut acc = C64::new(0.0, 0.0);
            for (&w, &c) in far.nodes.iter().zip(&far.coef) {
                acc += c / (z - w) * self.far_factor(z, w);
            }
            return acc;
        }
        // split the directions at rays tangent to the support or break circles,
        // where the chord integral has square-root edges
        let mut cuts: Vec<f64> = Vec::new();
        for (c, r) in std::iter::once((p.center, p.radius)).chain(p.breaks.iter().copied()) {
            let dc = (c - z).norm();
            if dc > r {
                let half = (r / dc).asin();
                let axis = (c - z).arg();
                cuts.push(axis - half);
                cuts.push(axis + half);
            }
        }
        if cuts.is_empty() {
            // periodic trapezoid in theta
            let n = self.rule.n_theta;
            let dt = TAU / n as f64;
            return (0..n).map(|k| self.chord(p, z, dt * k as f64) * dt).sum();
        }
        let (lo, hi) = if d < p.radius { (cuts[0], cuts[0] + TAU) } else { (cuts[0], cuts[1]) };
        let mut inside: Vec<f64> =
            cuts.iter().map(|&t| lo + (t - lo).rem_euclid(TAU)).filter(|&t| t > lo && t < hi).collect();
        inside.push(lo);
        inside.push(hi);
        inside.sort_by(f64::total_cmp);
        let mut acc = C64::new(0.0, 0.0);
        for seg in inside.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            if b - a <= 0.0 {
                continue;
            }
            // theta = a + (b - a)(1 - cos(pi x)) / 2 clusters nodes at both edges
            for (&x, &w) in self.theta_rule.nodes.iter().zip(&self.theta_rule.weights) {
                let theta = a + (b - a) * 0.5 * (1.0 - (PI * x).cos());
                acc += self.chord(p, z, theta) * (w * (b - a) * 0.5 * PI * (PI * x).sin());
            }
        }
        acc
    }

    #[inline]
    fn far_factor(&self, z: C64, w: C64) -> C64 {
        if self.m == 0 {
            C64::new(1.0, 0.0)
        } else {
            (1.0 / (1.0 - w.conj() * z)).powi(self.m)
        }
    }

    /// `-(1/pi) e^{-i theta} int phi(z + t e^{i theta}) W_m dt` over the part
    /// of the ray inside the support.
    fn chord(&self, p: &Piece, z: C64, theta: f64) -> C64 {
        let dir = C64::from_polar(1.0, theta);
        let Some((t0, t1)) = ray_circle(z, dir, p.center, p.radius) else {
            return C64::new(0.0, 0.0);
        };
        let lo = t0.max(0.0);
        if t1 <= lo {
            return C64::new(0.0, 0.0);
        }
        let mut cuts = vec![lo, t1];
        for &(c, r) in &p.breaks {
            if let Some((a, b)) = ray_circle(z, dir, c, r) {
                for t in [a, b] {
                    if t > lo && t < t1 {
                        cuts.push(t);
                    }
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        let mut acc = C64::new(0.0, 0.0);
        for seg in cuts.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let h = b - a;
            if h <= 0.0 {
                continue;
            }
            for (&x, &w) in self.rho_rule.nodes.iter().zip(&self.rho_rule.weights) {
                let wpt = z + dir * (a + h * x);
                acc += (p.density)(wpt) * solver_weight(self.m, z, wpt) * (w * h);
            }
        }
        -acc * dir.conj() / PI
    }

    /// `sum_j coef(j) * piece_value(j, z)`, skipping zero coefficients.
    pub fn eval_combined(&self, z: C64, coef: impl Fn(usize) -> C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..self.pieces.len() {
            let c = coef(j);
            if c != C64::new(0.0, 0.0) {
                acc += c * self.piece_value(j, z);
            }
        }
        acc
    }

    pub fn eval(&self, z: C64) -> C64 {
        (0..self.pieces.len()).map(|j| self.piece_value(j, z)).sum()
    }
}

/// One-off transform of a single piece at `z`.
pub fn cauchy_transform(piece: &Piece, m: i32, z: C64) -> Result<C64> {
    ensure!(z.norm() < 1.0, Error::Coverage(format!("evaluation point {z} outside the disk")));
    let engine = CauchyEngine::new(vec![piece.clone()], m, CauchyRule::default())?;
    Ok(engine.eval(z))
}

/// Which Forelli-Rudin integrand to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrVariant {
    /// `(1-|w|^2)^beta / |1 - conj(w) z|^{M+2}`
    Plain,
    /// `(1-|w|^2)^beta / (|z-w| |1 - conj(w) z|^{M+1})`
    Singular,
}

/// `int_{|w|<rmax} (1-|w|^2)^beta / (|z-w|^s |1 - conj(w) t|^power) dA(w)`
/// for real `0 <= t < rmax` and `s` in `{0, 1}`, computed in polar
/// coordinates centred at `t`.
pub fn radial_kernel_integral(t: f64, beta: f64, power: f64, singular: bool, rmax: f64, tol: f64) -> f64 {
    debug_assert!(t >= 0.0 && t < rmax);
    let r2 = rmax * rmax;
    let inner = |theta: f64| {
        let (s, c) = theta.sin_cos();
        // |t + rho e^{i theta}| = rmax at rho_max and rho_min < 0
        let root = (r2 - t * t * s * s).sqrt();
        let rho_max = -t * c + root;
        let rho_min = -t * c - root;
        // u = rho_max - rho keeps 1 - |w|^2 exact near the circle
        let g = |u: f64| {
            let rho = rho_max - u;
            let one_minus = u * (rho - rho_min) + (1.0 - r2);
            let w = C64::new(t + rho * c, rho * s);
            let den = (1.0 - w.conj() * t).norm().powf(power);
            let jac = if singular { 1.0 } else { rho };
            jac * one_minus.powf(beta) / den
        };
        // u = rho_max x^gamma absorbs the u^beta endpoint behaviour
        let gamma = if beta <= -0.75 {
            8.0
        } else if beta < 1.0 {
            2.0 / (1.0 + beta)
        } else {
            1.0
        };
        let h = |x: f64| {
            if x <= 0.0 {
                return 0.0;
            }
            let xg = x.powf(gamma - 1.0);
            g(rho_max * xg * x) * rho_max * gamma * xg
        };
        adaptive_integrate(h, 0.0, 1.0, tol, 0.0)
    };
    // symmetric in theta -> -theta
    2.0 * adaptive_integrate(inner, 0.0, PI, tol, 0.0)
}

pub fn forelli_rudin_integral(t: f64, beta: f64, m: f64, variant: FrVariant) -> f64 {
    match variant {
        FrVariant::Plain => radial_kernel_integral(t, beta, m + 2.0, false, 1.0, 1e-10),
        FrVariant::Singular => radial_kernel_integral(t, beta, m + 1.0, true, 1.0, 1e-10),
    }
}

/// Least-squares slope of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub const FR_RADII: [f64; 4] = [0.9, 0.95, 0.99, 0.995];

/// Fitted exponent of the Forelli-Rudin integral against `1 - |z|^2`,
/// expected to be `beta - M`.
pub fn forelli_rudin_check(beta: f64, m: f64, variant: FrVariant) -> Result<f64> {
    ensure!(beta > -1.0 && beta < m, Error::Parameter(format!("need -1 < beta < M, got beta = {beta}, M = {m}")));
    let vals: Vec<(f64, f64)> =
        FR_RADII.par_iter().map(|&t| ((1.0 - t * t).ln(), forelli_rudin_integral(t, beta, m, variant).ln())).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = vals.into_iter().unzip();
    Ok(fit_slope(&xs, &ys))
}

/// Parameters of the local means `m_q(f, z)` over `D(z, R)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalMeanSpec {
    pub q: f64,
    pub r: f64,
}

impl LocalMeanSpec {
    pub fn new(q: f64, r: f64) -> Result<Self> {
        ensure!(q >= 1.0, Error::Parameter(format!("q = {q} < 1")));
        ensure!(r > 0.0 && r < 1.0, Error::Parameter(format!("R = {r} not in (0,1)")));
        Ok(LocalMeanSpec { q, r })
    }
}

/// Polar rule on a Euclidean disk, `(node, area weight)` pairs.
pub fn disk_rule(center: C64, radius: f64, n_radial: usize, n_angular: usize) -> Vec<(C64, f64)> {
    let g = GaussRule::new(n_radial);
    let dt = TAU / n_angular as f64;
    let mut out = Vec::with_capacity(n_radial * n_angular);
    for (&x, &w) in g.nodes.iter().zip(&g.weights) {
        let rho = radius * x;
        for k in 0..n_angular {
            out.push((center + C64::from_polar(rho, dt * (k as f64 + 0.5)), w * radius * rho * dt));
        }
    }
    out
}

/// `m_q(f, z) = ((1/|D_z|) int_{D_z} |f|^q dA)^{1/q}` with `D_z = D(z, R)`,
/// computed by a polar rule on the Euclidean disk.
pub fn local_mean(f: &(impl Fn(C64) -> C64 + ?Sized), spec: LocalMeanSpec, z: C64) -> Result<f64> {
    ensure!(z.norm() < 1.0, Error::Coverage(format!("{z} outside the disk")));
    let disk = PseudoDisk::new(z, spec.r)?;
    let (c, rad) = disk.euclidean_params();
    let rule = disk_rule(c, rad, 16, 32);
    let area: f64 = rule.iter().map(|p| p.1).sum();
    let terms: Vec<f64> = rule.iter().map(|&(w, a)| a * f(w).norm().powf(spec.q)).collect();
    Ok((pairwise_sum(&terms) / area).powf(1.0 / spec.q))
}

/// `sum_k (1 - |z_k|^2)^2 m_q(f, z_k)^p` over the net centers. The net must
/// be built with `eta = R / 2`.
pub fn discrete_norm(
    f: &(impl Fn(C64) -> C64 + Sync + ?Sized),
    spec: LocalMeanSpec,
    p: f64,
    net: &CoveringNet<f64>,
) -> Result<f64> {
    ensure!(p > 0.0, Error::Parameter(format!("p = {p} must be positive")));
    ensure!(
        (net.eta - spec.r / 2.0).abs() <= 1e-12 * spec.r,
        Error::Parameter(format!("net eta = {} does not match R/2 = {}", net.eta, spec.r / 2.0))
    );
    let centers = net.centers.values();
    let terms = centers
        .par_iter()
        .map(|&z| Ok((1.0 - z.norm_sqr()).powi(2) * local_mean(f, spec, z)?.powf(p)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&terms))
}

/// `int m_q(f)^p dA` on a grid.
pub fn continuous_local_norm(
    f: &(impl Fn(C64) -> C64 + Sync + ?Sized),
    spec: LocalMeanSpec,
    p: f64,
    grid: &DiskGrid,
) -> Result<f64> {
    let vals = grid.nodes.par_iter().map(|&z| Ok(local_mean(f, spec, z)?.powf(p))).collect::<Result<Vec<f64>>>()?;
    Ok(grid.sum(&vals))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_net, PointSet};

    fn smooth_bump(c: C64, r: f64) -> impl Fn(C64) -> C64 + Send + Sync + Clone {
        move |w: C64| {
            let x = (w - c).norm_sqr() / (r * r);
            if x >= 1.0 {
                C64::new(0.0, 0.0)
            } else {
                C64::new((1.0 - x).powi(4), 0.0)
            }
        }
    }

    #[test]
    fn grid_area() {
        let g = DiskGrid::build(0.5, 16, &[]).unwrap();
        let a = g.integrate(|_| 1.0);
        assert!((a - PI / 4.0).abs() < 1e-8 * PI / 4.0);
        let refined = DiskGrid::build(0.9, 16, &[C64::new(0.3, 0.1), C64::new(0.0, 0.0)]).unwrap();
        assert!(refined.len() > 16 * 128);
        let a = refined.integrate(|_| 1.0);
        assert!((a - PI * 0.81).abs() < 1e-12);
        assert!(refined.nodes.iter().all(|z| z.norm() < 0.9));
    }

    #[test]
    fn grid_rejects_small_n() {
        assert!(DiskGrid::build(0.5, 3, &[]).is_err());
        assert!(DiskGrid::build(1.2, 8, &[]).is_err());
    }

    #[test]
    fn full_disk_weight_integral() {
        let g = DiskGrid::build(1.0, 64, &[]).unwrap();
        let v = g.integrate(|w| 1.0 - w.norm_sqr());
        assert!((v - PI / 2.0).abs() < 1e-12);
        let v = g.integrate(|w| (1.0 - w.norm_sqr()).powi(3));
        assert!((v - PI / 4.0).abs() < 1e-3);
    }

    #[test]
    fn singular_integral_converges_under_refinement() {
        let p = C64::new(0.3, 0.0);
        // exact: int_{|w|<1} dA / |w - p| via a radial oracle
        let exact = 2.0
            * adaptive_integrate(
                |theta| {
                    let (s, c) = theta.sin_cos();
                    -0.3 * c + (1.0 - 0.09 * s * s).sqrt()
                },
                0.0,
                PI,
                1e-13,
                0.0,
            );
        let mut prev = f64::NAN;
        let mut changes = Vec::new();
        let mut errs = Vec::new();
        for depth in 1..=5 {
            let g = DiskGrid::build_refined(1.0, 32, &[p], depth).unwrap();
            let v = g.integrate(|w| 1.0 / (w - p).norm());
            if prev.is_finite() {
                changes.push(((v - prev) / v).abs());
            }
            errs.push(((v - exact) / exact).abs());
            prev = v;
        }
        assert!(changes.windows(2).all(|c| c[1] <= c[0] * 1.01), "{changes:?}");
        assert!(*changes.last().unwrap() < 1e-3, "{changes:?}");
        assert!(*errs.last().unwrap() < 5e-3, "{errs:?}");
    }

    #[test]
    fn grid_dump_round_trip() {
        let g = DiskGrid::build_refined(0.7, 6, &[C64::new(0.2, -0.3)], 3).unwrap();
        let mut buf = Vec::new();
        g.dump(&mut buf).unwrap();
        let back = DiskGrid::restore(&buf[..]).unwrap();
        assert_eq!(back, g);
        assert!(DiskGrid::restore(&b"0.1 0.2 0.3\n"[..]).is_err());
        assert!(DiskGrid::restore(&b"# diskgrid rmax=0.5 n_radial=4 depth=0\n0.1 nan 0.3\n"[..]).is_err());
    }

    #[test]
    fn lp_norm_examples() {
        let g = DiskGrid::build(1.0, 64, &[]).unwrap();
        let empty = WeightEval::new(&PointSet::<f64>::empty());
        for p in [1.0, 2.0, 3.5] {
            let v = lp_norm_fn(|_| C64::new(1.0, 0.0), &empty, p, &g).unwrap();
            assert!((v - PI.powf(1.0 / p)).abs() < 1e-12);
        }
        let origin = WeightEval::new(&PointSet::from_complex(&[C64::new(0.0, 0.0)]).unwrap());
        let v = lp_norm_fn(|_| C64::new(1.0, 0.0), &origin, 2.0, &g).unwrap();
        // radial oracle: int e^{|z|^2} dA = pi (e - 1)
        let oracle = (2.0 * PI * adaptive_integrate(|r| r * (r * r).exp(), 0.0, 1.0, 1e-14, 0.0)).sqrt();
        assert!((oracle - (PI * (1f64.exp() - 1.0)).sqrt()).abs() < 1e-12);
        assert!((v - oracle).abs() < 1e-5 * oracle, "{v} {oracle}");
        for n in 0..=8 {
            let v = lp_norm_fn(|z| z.powi(n), &empty, 2.0, &g).unwrap();
            let exact = (PI / (n as f64 + 1.0)).sqrt();
            assert!((v - exact).abs() < 1e-3 * exact, "n = {n}: {v} vs {exact}");
        }
        assert!(lp_norm(&vec![C64::new(f64::NAN, 0.0); g.len()], &empty, 2.0, &g).is_err());
    }

    #[test]
    fn lp_norm_monotone_in_weight() {
        let g = DiskGrid::build(0.95, 24, &[]).unwrap();
        let pts = [C64::new(0.5, 0.1), C64::new(-0.3, 0.6), C64::new(0.0, -0.8)];
        let small = WeightEval::new(&PointSet::from_complex(&pts[..1]).unwrap());
        let big = WeightEval::new(&PointSet::from_complex(&pts).unwrap());
        let f = |z: C64| z * z - 0.3;
        assert!(lp_norm_fn(f, &small, 1.5, &g).unwrap() <= lp_norm_fn(f, &big, 1.5, &g).unwrap());
    }

    #[test]
    fn cauchy_transform_of_disk_indicator() {
        let rho = 0.5;
        let piece = Piece::new(C64::new(0.0, 0.0), rho, Arc::new(|_| C64::new(1.0, 0.0)));
        for z in [C64::new(0.2, 0.0), C64::new(-0.1, 0.3), C64::new(0.0, 0.0)] {
            let v = cauchy_transform(&piece, 0, z).unwrap();
            assert!((v - z.conj()).norm() < 1e-12, "{z}: {v}");
        }
        // outside: rho^2 / z
        let z = C64::new(0.7, 0.2);
        let v = cauchy_transform(&piece, 0, z).unwrap();
        assert!((v - rho * rho / z).norm() < 1e-5, "{v}");
        let z = C64::new(0.2, -0.85);
        let v = cauchy_transform(&piece, 0, z).unwrap();
        assert!((v - rho * rho / z).norm() < 1e-10, "{v}");
        // brute-force grid oracle at z = 0.2
        let z = C64::new(0.2, 0.0);
        let g = DiskGrid::build_refined(rho, 128, &[z], 10).unwrap();
        let brute = g.integrate_c(|w| 1.0 / (z - w)) / PI;
        assert!((brute - z.conj()).norm() < 2e-3, "{brute}");
    }

    #[test]
    fn cauchy_transform_zero_data() {
        let piece = Piece::new(C64::new(0.1, 0.0), 0.3, Arc::new(|_| C64::new(0.0, 0.0)));
        assert_eq!(cauchy_transform(&piece, 2, C64::new(0.2, 0.1)).unwrap(), C64::new(0.0, 0.0));
        assert!(cauchy_transform(&piece, 2, C64::new(1.2, 0.1)).is_err());
    }

    #[test]
    fn cauchy_transform_solves_dbar() {
        let c = C64::new(0.2, -0.1);
        let r = 0.4;
        let phi = smooth_bump(c, r);
        for m in [0, 2] {
            let piece = Piece::new(c, r, Arc::new(phi.clone()));
            let engine = CauchyEngine::new(vec![piece], m, CauchyRule::default()).unwrap();
            let mut worst: f64 = 0.0;
            for z in [
                C64::new(0.2, -0.1),
                C64::new(0.35, 0.05),
                C64::new(0.0, -0.3),
                C64::new(0.5, -0.1),
                C64::new(-0.2, 0.3),
            ] {
                let d = dbar_fd(|w| engine.eval(w), z, 1e-3);
                let err = (d - phi(z)).norm();
                worst = worst.max(err);
            }
            assert!(worst < 2e-3, "m = {m}: {worst}");
        }
    }

    #[test]
    fn chord_and_far_rules_agree() {
        let c = C64::new(0.1, 0.2);
        let r = 0.3;
        let piece = Piece::new(c, r, Arc::new(smooth_bump(c, r)));
        let engine = CauchyEngine::new(vec![piece], 2, CauchyRule::default()).unwrap();
        // right at the switch radius
        let z = c + C64::new(r * 1.5, 0.0);
        let near = engine.piece_value(0, z - 1e-9);
        let far = engine.piece_value(0, z + 1e-9);
        assert!((near - far).norm() < 1e-8 * near.norm(), "{near} {far}");
        // across the support circle
        let z = c + C64::new(0.0, r);
        let a = engine.piece_value(0, z - C64::new(0.0, 1e-9));
        let b = engine.piece_value(0, z + C64::new(0.0, 1e-9));
        assert!((a - b).norm() < 1e-8 * a.norm(), "{a} {b}");
    }

    #[test]
    fn forelli_rudin_slopes() {
        for (beta, m) in [(0.0, 1.0), (-0.5, 1.0), (0.0, 2.0)] {
            let s = forelli_rudin_check(beta, m, FrVariant::Plain).unwrap();
            assert!((s - (beta - m)).abs() < 0.05, "plain {beta} {m}: {s}");
        }
        assert!(forelli_rudin_check(1.0, 1.0, FrVariant::Plain).is_err());
        assert!(forelli_rudin_check(-1.0, 1.0, FrVariant::Plain).is_err());
    }

    #[test]
    fn forelli_rudin_integral_at_origin() {
        // z = 0: int (1-|w|^2)^beta dA = pi / (beta + 1)
        let v = forelli_rudin_integral(0.0, 0.5, 1.0, FrVariant::Plain);
        assert!((v - PI / 1.5).abs() < 1e-8);
        // singular, beta = 0, z = 0: int dA/|w| = 2 pi
        let v = forelli_rudin_integral(0.0, 0.0, 1.0, FrVariant::Singular);
        assert!((v - TAU).abs() < 1e-8);
    }

    #[test]
    fn local_mean_examples() {
        let spec = LocalMeanSpec::new(2.0, 0.3).unwrap();
        let c = local_mean(&|_| C64::new(-3.0, 4.0), spec, C64::new(0.5, 0.2)).unwrap();
        assert!((c - 5.0).abs() < 1e-12);
        let f = |w: C64| (w * 3.0).exp() - 1.0;
        let z = C64::new(-0.2, 0.6);
        let mut prev = 0.0;
        for q in [1.0, 1.5, 2.0, 4.0] {
            let v = local_mean(&f, LocalMeanSpec::new(q, 0.4).unwrap(), z).unwrap();
            assert!(v >= prev - 1e-14);
            prev = v;
        }
        assert!(LocalMeanSpec::new(0.5, 0.3).is_err());
    }

    #[test]
    fn discrete_norm_examples() {
        let spec = LocalMeanSpec::new(1.0, 0.4).unwrap();
        let net = build_net(0.2, 0.05).unwrap();
        assert_eq!(net.centers.len(), 1);
        let f = |w: C64| w + 2.0;
        let v = discrete_norm(&f, spec, 0.5, &net).unwrap();
        let direct = local_mean(&f, spec, C64::new(0.0, 0.0)).unwrap().powf(0.5);
        assert!((v - direct).abs() < 1e-14);
        assert_eq!(discrete_norm(&|_| C64::new(0.0, 0.0), spec, 0.5, &net).unwrap(), 0.0);
        let wrong = build_net(0.3, 0.5).unwrap();
        assert!(discrete_norm(&f, spec, 0.5, &wrong).is_err());
    }

    #[test]
    fn discrete_and_continuous_norms_comparable() {
        let f = smooth_bump(C64::new(0.3, 0.2), 0.45);
        let grid = DiskGrid::build(0.95, 24, &[]).unwrap();
        let mut ratios = Vec::new();
        for r in [0.2, 0.3, 0.4] {
            let spec = LocalMeanSpec::new(2.0, r).unwrap();
            let net = build_net(r / 2.0, 0.95).unwrap();
            let d = discrete_norm(&f, spec, 1.0, &net).unwrap();
            let c = continuous_local_norm(&f, spec, 1.0, &grid).unwrap();
            // the equivalence constants scale like R^-2
            ratios.push(d / c * r * r);
        }
        let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ratios.iter().cloned().fold(0.0, f64::max);
        assert!(lo > 0.0 && hi / lo < 1.5, "{ratios:?}");
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        let v = adaptive_integrate(|x: f64| x.powf(-0.5), 0.0, 1.0, 1e-12, 0.0);
        assert!((v - 2.0).abs() < 1e-8, "{v}");
    }

    #[test]
    fn pairwise_sum_is_order_stable() {
        let xs: Vec<f64> = (0..1000).map(|k| (k as f64).sin()).collect();
        assert_eq!(pairwise_sum(&xs), pairwise_sum(&xs.clone()));
    }
}
