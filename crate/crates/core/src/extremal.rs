//! The extremal problem `max |f(0)|` over the unit ball of `A^p` with a
//! prescribed zero set, and the family `g_a` of zero-free functions with a
//! local lower bound and a global growth bound.
//!
//! Two search families are used:
//! * `f = B_W * g` with the Blaschke product `B_W` and a polynomial `g`,
//!   solved in closed form for `p = 2`;
//! * `f = Psi_W * exp(q)` with a polynomial `q`, which keeps the zero set
//!   exact and makes `log ||f||_p^p` a convex function of the coefficients
//!   of `q`. It is minimized by damped Newton iterations.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{ensure, Error, Result};
use crate::geometry::{moebius, separation_constant, PointSet};
use crate::quad::{pairwise_sum, DiskGrid};
use crate::weights::WeightEval;
use crate::C64;

/// Which zero-carrying factor a model uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroFactor {
    /// `Psi_W = prod E_a`.
    Psi,
    /// `B_W = prod (conj(a)/|a|) M_a`.
    Blaschke,
}

/// `f = P_W * g * exp(q)` where `P_W` is `Psi_W` or `B_W`, `g` and `q` are
/// polynomials (coefficients in increasing degree).
#[derive(Clone, Debug)]
pub struct AnalyticModel {
    zeros: PointSet<f64>,
    factor: ZeroFactor,
    poly: Vec<C64>,
    expcoeffs: Vec<C64>,
    weight: WeightEval<f64>,
}

fn horner(coeffs: &[C64], z: C64) -> C64 {
    coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

impl AnalyticModel {
    pub fn new(zeros: PointSet<f64>, factor: ZeroFactor, poly: Vec<C64>, expcoeffs: Vec<C64>) -> Result<Self> {
        ensure!(!poly.is_empty(), Error::Parameter("empty polynomial factor".into()));
        let bad = poly.iter().chain(&expcoeffs).any(|c| !c.re.is_finite() || !c.im.is_finite());
        ensure!(!bad, Error::NonFinite("model coefficients".into()));
        if factor == ZeroFactor::Blaschke {
            ensure!(
                !zeros.contains(C64::new(0.0, 0.0)),
                Error::Parameter("Blaschke factor needs zeros away from the origin".into())
            );
        }
        let weight = WeightEval::new(&zeros);
        Ok(AnalyticModel { zeros, factor, poly, expcoeffs, weight })
    }

    /// `f = Psi_W exp(q)`.
    pub fn psi_exp(zeros: PointSet<f64>, expcoeffs: Vec<C64>) -> Result<Self> {
        Self::new(zeros, ZeroFactor::Psi, vec![C64::new(1.0, 0.0)], expcoeffs)
    }

    pub fn constant(c: f64) -> Self {
        Self::psi_exp(PointSet::empty(), vec![C64::new(c.ln(), 0.0)]).expect("finite constant")
    }

    pub fn zeros(&self) -> &PointSet<f64> {
        &self.zeros
    }

    pub fn factor(&self) -> ZeroFactor {
        self.factor
    }

    pub fn poly(&self) -> &[C64] {
        &self.poly
    }

    pub fn expcoeffs(&self) -> &[C64] {
        &self.expcoeffs
    }

    fn log_abs_factor(&self, z: C64) -> f64 {
        match self.factor {
            ZeroFactor::Psi => self.weight.log_abs_psi(z),
            ZeroFactor::Blaschke => self.zeros.iter().map(|(a, m)| m as f64 * moebius(a, z).norm().ln()).sum(),
        }
    }

    fn factor_value(&self, z: C64) -> C64 {
        match self.factor {
            ZeroFactor::Psi => self.weight.psi(z),
            ZeroFactor::Blaschke => {
                self.zeros.iter().map(|(a, m)| (a.conj() / a.norm() * moebius(a, z)).powi(m as i32)).product()
            }
        }
    }

    /// `log |f(z)|`, `-inf` on the zero set.
    pub fn log_abs(&self, z: C64) -> f64 {
        self.log_abs_factor(z) + horner(&self.poly, z).norm().ln() + horner(&self.expcoeffs, z).re
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.factor_value(z) * horner(&self.poly, z) * horner(&self.expcoeffs, z).exp()
    }

    /// The same function multiplied by a positive constant.
    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        if out.expcoeffs.is_empty() {
            out.expcoeffs.push(C64::new(0.0, 0.0));
        }
        out.expcoeffs[0] += c.ln();
        out
    }

    /// `||f||_p` on the grid.
    pub fn lp_norm(&self, p: f64, grid: &DiskGrid) -> f64 {
        let vals: Vec<f64> = grid.sample(|z| (p * self.log_abs(z)).exp());
        grid.sum(&vals).powf(1.0 / p)
    }

    pub fn normalized(&self, p: f64, grid: &DiskGrid) -> Result<Self> {
        let n = self.lp_norm(p, grid);
        ensure!(n.is_finite() && n > 0.0, Error::Numeric(format!("cannot normalize, norm = {n}")));
        Ok(self.scaled(1.0 / n))
    }
}

/// Removes the zeros in `drop` by dividing by their factor; the other parts
/// are unchanged and no renormalization happens.
pub fn divide_out_zeros(f: &AnalyticModel, drop: &PointSet<f64>) -> Result<AnalyticModel> {
    let zeros = f.zeros.difference(drop)?;
    AnalyticModel::new(zeros, f.factor, f.poly.clone(), f.expcoeffs.clone())
}

/// Result of an extremal solve.
#[derive(Clone, Debug)]
pub struct ExtremalSolution {
    pub model: AnalyticModel,
    /// `|f*(0)|`.
    pub value: f64,
    /// `||f*||_p` on the solver grid.
    pub norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Condition number of the Gram matrix (closed-form solver only).
    pub condition: Option<f64>,
    /// Roots of the polynomial factor inside the check radius (closed-form
    /// solver only); nonzero values are a warning.
    pub extra_roots: usize,
}

pub const GRAM_CONDITION_LIMIT: f64 = 1e12;
/// Radius of the circle used to count roots of the polynomial factor.
pub const ROOT_CHECK_RADIUS: f64 = 0.999;

/// Number of zeros of a polynomial inside `|z| < r` by the argument principle.
pub fn roots_inside(coeffs: &[C64], r: f64) -> usize {
    let n = 4096;
    let vals: Vec<C64> = (0..=n).map(|k| horner(coeffs, C64::from_polar(r, TAU * k as f64 / n as f64))).collect();
    let winding: f64 = vals.windows(2).map(|w| (w[1] / w[0]).arg()).sum();
    (winding / TAU).round().max(0.0) as usize
}

/// Closed-form solution of `max |f(0)|` subject to `||f||_2 <= 1` over
/// `f = B_W g`, `deg g <= degree`.
pub fn solve_extremal_p2(w_set: &PointSet<f64>, degree: usize, grid: &DiskGrid) -> Result<ExtremalSolution> {
    ensure!(!w_set.contains(C64::new(0.0, 0.0)), Error::Parameter("0 must not be a prescribed zero".into()));
    let blaschke = AnalyticModel::new(w_set.clone(), ZeroFactor::Blaschke, vec![C64::new(1.0, 0.0)], vec![])?;
    let n = degree + 1;
    // Gram matrix G_jk = sum omega |B|^2 z^k conj(z^j)
    let b2: Vec<f64> = grid.sample(|z| (2.0 * blaschke.log_abs(z)).exp());
    let parts: Vec<DMatrix<C64>> = grid
        .nodes
        .par_chunks(4096)
        .zip(grid.weights.par_chunks(4096))
        .zip(b2.par_chunks(4096))
        .map(|((zs, ws), bs)| {
            let mut m = DMatrix::<C64>::zeros(n, n);
            let mut pows = vec![C64::new(0.0, 0.0); n];
            for ((&z, &w), &b) in zs.iter().zip(ws).zip(bs) {
                let mut zk = C64::new(1.0, 0.0);
                for p in pows.iter_mut() {
                    *p = zk;
                    zk *= z;
                }
                let s = w * b;
                for j in 0..n {
                    for k in 0..n {
                        m[(j, k)] += pows[k] * pows[j].conj() * s;
                    }
                }
            }
            m
        })
        .collect();
    let gram = parts.into_iter().fold(DMatrix::<C64>::zeros(n, n), |a, b| a + b);

    let eig = gram.clone().symmetric_eigen();
    let (lo, hi) = eig.eigenvalues.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let condition = hi / lo;
    ensure!(
        lo > 0.0 && condition <= GRAM_CONDITION_LIMIT,
        Error::Numeric(format!("Gram matrix ill-conditioned (condition {condition:.3e})"))
    );
    let chol = gram.cholesky().ok_or_else(|| Error::Numeric("Gram matrix not positive definite".into()))?;
    let mut e0 = DVector::<C64>::zeros(n);
    e0[0] = C64::new(1.0, 0.0);
    let x = chol.solve(&e0);
    // f(0) = B(0) c_0 is maximized by c = G^{-1} e_0 / sqrt(e_0^* G^{-1} e_0)
    let s = x[0].re.sqrt();
    let b0 = blaschke.factor_value(C64::new(0.0, 0.0));
    let poly: Vec<C64> = x.iter().map(|c| c / s * b0.conj() / b0.norm()).collect();
    let model = AnalyticModel::new(w_set.clone(), ZeroFactor::Blaschke, poly, vec![])?;
    let extra_roots = roots_inside(model.poly(), ROOT_CHECK_RADIUS);
    Ok(ExtremalSolution {
        value: model.eval(C64::new(0.0, 0.0)).norm(),
        norm: model.lp_norm(2.0, grid),
        model,
        iterations: 1,
        converged: true,
        condition: Some(condition),
        extra_roots,
    })
}

pub const NEWTON_MAX_ITER: usize = 200;
pub const NEWTON_GRAD_TOL: f64 = 1e-12;

/// Maximizes `|f(0)|` subject to `||f||_p = 1` over `f = Psi_W exp(q)`,
/// `deg q <= degree`, starting from `q = 0`.
pub fn solve_extremal_general(
    w_set: &PointSet<f64>,
    p: f64,
    degree: usize,
    grid: &DiskGrid,
) -> Result<ExtremalSolution> {
    solve_extremal_general_from(w_set, p, &vec![C64::new(0.0, 0.0); degree + 1], grid)
}

/// Same as [`solve_extremal_general`] with an initial guess for `q`; its
/// length fixes the degree. The constant term only sets the scale and is
/// recomputed at the end.
pub fn solve_extremal_general_from(
    w_set: &PointSet<f64>,
    p: f64,
    init: &[C64],
    grid: &DiskGrid,
) -> Result<ExtremalSolution> {
    ensure!(p > 0.0, Error::Parameter(format!("p = {p} must be positive")));
    ensure!(!init.is_empty(), Error::Parameter("empty initial coefficients".into()));
    ensure!(!w_set.contains(C64::new(0.0, 0.0)), Error::Parameter("0 must not be a prescribed zero".into()));
    let degree = init.len() - 1;
    let dim = 2 * degree;
    let base_model = AnalyticModel::psi_exp(w_set.clone(), vec![])?;

    // log(omega |Psi|^p) and the features (Re z^k, -Im z^k)
    let nodes: Vec<(f64, Vec<f64>)> = grid
        .nodes
        .par_iter()
        .zip(&grid.weights)
        .map(|(&z, &w)| {
            let mut feat = Vec::with_capacity(dim);
            let mut zk = C64::new(1.0, 0.0);
            for _ in 0..degree {
                zk *= z;
                feat.push(zk.re);
                feat.push(-zk.im);
            }
            (w.ln() + p * base_model.log_abs(z), feat)
        })
        .filter(|(b, _)| b.is_finite())
        .collect();

    // log-sum-exp with gradient and Hessian in x
    let eval = |x: &DVector<f64>, derivs: bool| -> (f64, DVector<f64>, DMatrix<f64>) {
        let s: Vec<f64> =
            nodes.iter().map(|(b, f)| b + p * f.iter().zip(x.iter()).map(|(a, c)| a * c).sum::<f64>()).collect();
        let smax = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = s.iter().map(|v| (v - smax).exp()).collect();
        let total = pairwise_sum(&e);
        let value = smax + total.ln();
        let mut g = DVector::zeros(dim);
        let mut h = DMatrix::zeros(dim, dim);
        if derivs {
            for ((_, f), &ei) in nodes.iter().zip(&e) {
                let pi = ei / total;
                for a in 0..dim {
                    g[a] += pi * f[a];
                    for b in 0..=a {
                        h[(a, b)] += pi * f[a] * f[b];
                    }
                }
            }
            for a in 0..dim {
                for b in 0..a {
                    h[(b, a)] = h[(a, b)];
                }
            }
            h -= &g * g.transpose();
            h *= p * p;
            g *= p;
        }
        (value, g, h)
    };

    let mut x = DVector::<f64>::zeros(dim);
    for k in 1..=degree {
        x[2 * k - 2] = init[k].re;
        x[2 * k - 1] = init[k].im;
    }
    let mut iterations = 0;
    let mut converged = dim == 0;
    let (mut value, mut grad, mut hess) = eval(&x, true);
    while !converged && iterations < NEWTON_MAX_ITER {
        iterations += 1;
        let step = match hess.clone().cholesky() {
            Some(ch) => ch.solve(&(-&grad)),
            None => {
                let reg = &hess + DMatrix::identity(dim, dim) * (1e-10 * (1.0 + hess.norm()));
                reg.lu().solve(&(-&grad)).unwrap_or_else(|| -&grad)
            }
        };
        let slope = grad.dot(&step);
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-12 {
            let cand = &x + &step * t;
            let (v, _, _) = eval(&cand, false);
            if v <= value + 1e-4 * t * slope {
                x = cand;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        let (v, g, h) = eval(&x, true);
        value = v;
        grad = g;
        hess = h;
        if grad.amax() < NEWTON_GRAD_TOL || !accepted {
            converged = grad.amax() < 1e-9;
            break;
        }
    }

    // q_0 real, chosen so that sum omega |f|^p = 1
    let mut q = vec![C64::new(-value / p, 0.0)];
    for k in 1..=degree {
        q.push(C64::new(x[2 * k - 2], x[2 * k - 1]));
    }
    let model = AnalyticModel::psi_exp(w_set.clone(), q)?;
    ensure!(
        converged,
        Error::Numeric(format!(
            "extremal optimizer did not converge in {iterations} iterations (gradient {:.3e})",
            grad.amax()
        ))
    );
    Ok(ExtremalSolution {
        value: model.log_abs(C64::new(0.0, 0.0)).exp(),
        norm: model.lp_norm(p, grid),
        model,
        iterations,
        converged,
        condition: None,
        extra_roots: 0,
    })
}

/// `|int |f|^p u dA - u(0)|` for `u` in `1, Re z, Im z, ..., Re z^kmax, Im z^kmax`.
pub fn harm_eval_check(f: &AnalyticModel, p: f64, kmax: usize, grid: &DiskGrid) -> Vec<f64> {
    let fp: Vec<f64> = grid.sample(|z| (p * f.log_abs(z)).exp());
    let mut out = Vec::with_capacity(2 * kmax + 1);
    out.push((grid.sum(&fp) - 1.0).abs());
    for k in 1..=kmax {
        let zk: Vec<C64> = grid.nodes.iter().map(|z| z.powu(k as u32)).collect();
        let re: Vec<f64> = fp.iter().zip(&zk).map(|(a, z)| a * z.re).collect();
        let im: Vec<f64> = fp.iter().zip(&zk).map(|(a, z)| a * z.im).collect();
        out.push(grid.sum(&re).abs());
        out.push(grid.sum(&im).abs());
    }
    out
}

/// Suprema of `|f|^p (1-|z|^2)` and `|f / Psi_Z|^p e^{p k_Z} (1-|z|^2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthReport {
    pub c: f64,
    pub c_prime: f64,
    /// Relative change of each supremum between the two radii.
    pub c_change: f64,
    pub c_prime_change: f64,
    pub stable: bool,
}

pub const GROWTH_RADII: (f64, f64) = (0.99, 0.995);
pub const GROWTH_STABILITY: f64 = 0.05;

/// Samples `|z| = 0` and `1 - |z| = (1 - rmax) 2^{k/4}`, 256 angles each.
pub fn boundary_refined_samples(rmax: f64) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0)];
    let mut k = 0;
    loop {
        let d = (1.0 - rmax) * 2f64.powf(k as f64 / 4.0);
        if d >= 1.0 {
            return out;
        }
        let r = 1.0 - d;
        out.extend((0..256).map(|j| C64::from_polar(r, TAU * (j as f64 + 0.5) / 256.0)));
        k += 1;
    }
}

pub fn growth_check(f: &AnalyticModel, z_set: &PointSet<f64>, p: f64) -> GrowthReport {
    let weight = WeightEval::new(z_set);
    let sups = |rmax: f64| {
        boundary_refined_samples(rmax)
            .par_iter()
            .map(|&z| {
                let lf = f.log_abs(z);
                let l1 = (1.0 - z.norm_sqr()).ln();
                let c = (p * lf + l1).exp();
                let cp = (p * (lf - weight.log_sigma(z)) + l1).exp();
                (c, if cp.is_nan() { 0.0 } else { cp })
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)))
    };
    let (c0, cp0) = sups(GROWTH_RADII.0);
    let (c, c_prime) = sups(GROWTH_RADII.1);
    let c_change = (c / c0 - 1.0).abs();
    let c_prime_change = (c_prime / cp0 - 1.0).abs();
    GrowthReport {
        c,
        c_prime,
        c_change,
        c_prime_change,
        stable: c.is_finite()
            && c_prime.is_finite()
            && c_change <= GROWTH_STABILITY
            && c_prime_change <= GROWTH_STABILITY,
    }
}

/// One member `g_a(z) = exp(P(M_a(z)))` of the family.
#[derive(Clone, Debug)]
pub struct GaEntry {
    pub center: C64,
    /// Zero-free model of `g_a o M_a`, i.e. `exp(P)`.
    pub model: AnalyticModel,
    /// Points of `M_a(Z)` removed before solving.
    pub dropped: usize,
    /// `min |g_a e^{k_Z}|` on `D(a, eta)`.
    pub delta: f64,
    /// `sup |g_a e^{k_Z}|^p (1 - |M_a z|^2)^{1-eps}` over the sample.
    pub c: f64,
    /// Largest error of the harmonic fit.
    pub fit_residual: f64,
}

impl GaEntry {
    pub fn log_abs(&self, z: C64) -> f64 {
        self.model.log_abs(moebius(self.center, z))
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.model.eval(moebius(self.center, z))
    }
}

#[derive(Clone, Debug)]
pub struct GaFamily {
    pub eta: f64,
    pub lambda: f64,
    pub eps: f64,
    pub p: f64,
    /// One slot per center; `Err` holds the reason a center failed.
    pub entries: Vec<std::result::Result<GaEntry, String>>,
}

impl GaFamily {
    pub fn centers(&self) -> usize {
        self.entries.len()
    }

    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| e.is_err()).count()
    }

    /// Smallest `delta` and largest `C` over the successful centers.
    pub fn constants(&self) -> (f64, f64) {
        self.entries.iter().flatten().fold((f64::INFINITY, 0.0), |(d, c), e| (d.min(e.delta), c.max(e.c)))
    }
}

/// Settings for [`build_ga_family`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaSettings {
    pub p: f64,
    pub eta: f64,
    pub r_drop: f64,
    pub degree: usize,
    pub lambda: f64,
    /// Degree of the polynomial whose real part fits the harmonic correction.
    pub harmonic_degree: usize,
    /// Radial cells of the solver grid.
    pub n_radial: usize,
}

impl GaSettings {
    pub fn new(p: f64, eta: f64, r_drop: f64) -> Self {
        GaSettings { p, eta, r_drop, degree: 8, lambda: 0.9, harmonic_degree: 10, n_radial: 32 }
    }
}

/// Least-squares `h` with `Re h ~ u` on the samples; returns coefficients
/// and the largest residual.
pub fn fit_harmonic(samples: &[(C64, f64)], degree: usize) -> Result<(Vec<C64>, f64)> {
    // unknowns: Re h_0, then (Re h_k, Im h_k) for k >= 1
    let cols = 2 * degree + 1;
    let rows = samples.len();
    ensure!(rows >= cols, Error::TooFewPoints { need: cols, got: rows });
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut b = DVector::<f64>::zeros(rows);
    for (i, &(w, u)) in samples.iter().enumerate() {
        a[(i, 0)] = 1.0;
        let mut wk = C64::new(1.0, 0.0);
        for k in 1..=degree {
            wk *= w;
            a[(i, 2 * k - 1)] = wk.re;
            a[(i, 2 * k)] = -wk.im;
        }
        b[i] = u;
    }
    let x = a.clone().svd(true, true).solve(&b, 1e-13).map_err(|e| Error::Numeric(format!("harmonic fit: {e}")))?;
    let resid = (&a * &x - &b).amax();
    let mut h = vec![C64::new(x[0], 0.0)];
    for k in 1..=degree {
        h.push(C64::new(x[2 * k - 1], x[2 * k]));
    }
    Ok((h, resid))
}

fn fit_samples(rmax: f64) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0)];
    let n_r = 24;
    for i in 1..=n_r {
        // denser towards the edge
        let x = i as f64 / n_r as f64;
        let r = rmax * (1.0 - (1.0 - x).powi(2));
        out.extend((0..64).map(|j| C64::from_polar(r, TAU * (j as f64 + 0.5 * (i % 2) as f64) / 64.0)));
    }
    out
}

fn build_one(
    z_set: &PointSet<f64>,
    weight: &WeightEval<f64>,
    a: C64,
    s: &GaSettings,
    grid: &DiskGrid,
) -> Result<GaEntry> {
    // Z_a = M_a(Z), without the point near the origin
    let shifted = z_set.moebius_image(a);
    let kept = shifted.filter(|z| z.norm() >= s.r_drop);
    let dropped = shifted.len() - kept.len();
    let sol = solve_extremal_general(&kept, s.p / s.lambda, s.degree, grid)?;
    let g0 = divide_out_zeros(&sol.model, &kept)?;

    // Re h ~ k_{Z_a} - k_Z o M_a, harmonic in the disk
    let shifted_weight = WeightEval::new(&shifted);
    let samples: Vec<(C64, f64)> =
        fit_samples(0.99).into_iter().map(|w| (w, shifted_weight.k(w) - weight.k(moebius(a, w)))).collect();
    let (h, fit_residual) = fit_harmonic(&samples, s.harmonic_degree)?;
    let n = g0.expcoeffs().len().max(h.len());
    let combined: Vec<C64> = (0..n)
        .map(|k| g0.expcoeffs().get(k).copied().unwrap_or_default() + h.get(k).copied().unwrap_or_default())
        .collect();
    let model = AnalyticModel::psi_exp(PointSet::empty(), combined)?;

    // |g_a e^{k_Z}| at z = M_a(w) is |exp(P(w))| e^{k_Z(M_a w)}
    let log_ge = |w: C64| model.log_abs(w) + weight.k(moebius(a, w));
    let mut delta = f64::INFINITY;
    for i in 0..=8 {
        let r = s.eta * i as f64 / 8.0;
        for j in 0..32 {
            delta = delta.min(log_ge(C64::from_polar(r, TAU * j as f64 / 32.0)).exp());
        }
    }
    let c = boundary_refined_samples(GROWTH_RADII.1)
        .iter()
        .map(|&w| (s.p * log_ge(w) + s.lambda * (1.0 - w.norm_sqr()).ln()).exp())
        .fold(0.0, f64::max);
    ensure!(
        delta > 0.0 && c.is_finite(),
        Error::Numeric(format!("degenerate bounds at center {a}: delta = {delta}, C = {c}"))
    );
    Ok(GaEntry { center: a, model, dropped, delta, c, fit_residual })
}

/// Builds `g_a` for every center: shift `Z` by `M_a`, drop the point in
/// `D(0, r_drop)`, solve the extremal problem for `p / lambda`, divide out
/// `Psi`, correct by a fitted harmonic function and compose back with `M_a`.
/// Failures are recorded per center.
pub fn build_ga_family(z_set: &PointSet<f64>, centers: &[C64], settings: &GaSettings) -> Result<GaFamily> {
    let s = *settings;
    ensure!(s.p > 0.0, Error::Parameter(format!("p = {} must be positive", s.p)));
    ensure!(s.lambda > 0.0 && s.lambda < 1.0, Error::Parameter(format!("lambda = {} not in (0,1)", s.lambda)));
    ensure!(s.eta > 0.0 && s.eta < 1.0, Error::Parameter(format!("eta = {} not in (0,1)", s.eta)));
    if z_set.total() >= 2 {
        let sep = separation_constant(z_set)?;
        ensure!(
            s.r_drop > 0.0 && s.r_drop <= sep / 2.0,
            Error::Parameter(format!(
                "r_drop = {} must lie in (0, {}] so at most one point is dropped",
                s.r_drop,
                sep / 2.0
            ))
        );
    } else {
        ensure!(s.r_drop > 0.0 && s.r_drop < 1.0, Error::Parameter(format!("r_drop = {} not in (0,1)", s.r_drop)));
    }
    let grid = DiskGrid::build(1.0, s.n_radial, &[])?;
    let weight = WeightEval::new(z_set);
    let entries =
        centers.par_iter().map(|&a| build_one(z_set, &weight, a, &s, &grid).map_err(|e| e.to_string())).collect();
    Ok(GaFamily { eta: s.eta, lambda: s.lambda, eps: 1.0 - s.lambda, p: s.p, entries })
}
