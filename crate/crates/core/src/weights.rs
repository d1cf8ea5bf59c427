//! The weight `k_Z`, the products `Psi_Z` and `sigma_Z`, and related
//! quantities for a finite point set `Z`.
//!
//! Products are accumulated as sums of logarithms so that sets with
//! thousands of points neither overflow nor underflow.

use num_complex::Complex;

use crate::error::{ensure, Error, Result};
use crate::geometry::{moebius, one_minus_psi_sq, p_lambda_inverse, psi, separation_constant, Point, PointSet};
use crate::scalar::Real;

/// Cached evaluator for the weight quantities of a fixed point set.
#[derive(Clone, Debug)]
pub struct WeightEval<T> {
    /// `(a, 1 - |a|^2, multiplicity)`.
    terms: Vec<(Complex<T>, T, T)>,
}

impl<T: Real> WeightEval<T> {
    pub fn new(z: &PointSet<T>) -> Self {
        let terms = z.iter().map(|(a, m)| (a, T::one() - a.norm_sqr(), T::from_u32(m).unwrap())).collect();
        WeightEval { terms }
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `k_Z(z) = (|z|^2 / 2) sum (1 - |a|^2)^2 / |1 - conj(a) z|^2`.
    pub fn k(&self, z: Complex<T>) -> T {
        let one = Complex::new(T::one(), T::zero());
        let s = self.terms.iter().fold(T::zero(), |acc, &(a, w, m)| acc + m * w * w / (one - a.conj() * z).norm_sqr());
        z.norm_sqr() * s / T::lit(2.0)
    }

    /// Complex logarithm of `Psi_Z(z)` (any branch). The real part is
    /// `-inf` when `z` lies in `Z`.
    pub fn log_psi(&self, z: Complex<T>) -> Complex<T> {
        self.terms.iter().fold(Complex::new(T::zero(), T::zero()), |acc, &(a, _, m)| acc + log_e_a(a, z) * m)
    }

    /// `Psi_Z(z)`; exactly zero on `Z`.
    pub fn psi(&self, z: Complex<T>) -> Complex<T> {
        if self.terms.iter().any(|&(a, _, _)| a == z) {
            return Complex::new(T::zero(), T::zero());
        }
        self.log_psi(z).exp()
    }

    pub fn log_abs_psi(&self, z: Complex<T>) -> T {
        if self.terms.iter().any(|&(a, _, _)| a == z) {
            return T::neg_infinity();
        }
        self.log_psi(z).re
    }

    /// `log sigma_Z(z) = sum [log psi(a,z) + (1 - psi(a,z)^2) / 2]`.
    pub fn log_sigma(&self, z: Complex<T>) -> T {
        let half = T::lit(0.5);
        let mut acc = T::zero();
        for &(a, _, m) in &self.terms {
            let d = psi(a, z);
            if d == T::zero() {
                return T::neg_infinity();
            }
            acc = acc + m * (d.ln() + half * one_minus_psi_sq(a, z));
        }
        acc
    }

    pub fn sigma(&self, z: Complex<T>) -> T {
        self.log_sigma(z).exp()
    }

    /// `lap k_Z = (1/2) sum (1 - |a|^2)^2 / |1 - conj(a) z|^4` with `lap = d dbar`.
    pub fn lap_k(&self, z: Complex<T>) -> T {
        let one = Complex::new(T::one(), T::zero());
        let s = self.terms.iter().fold(T::zero(), |acc, &(a, w, m)| {
            let d = (one - a.conj() * z).norm_sqr();
            acc + m * w * w / (d * d)
        });
        s / T::lit(2.0)
    }

    /// `(1 - |z|^2)^2 lap k_Z(z)`, which equals `(1/2) sum (1 - psi(a,z)^2)^2`.
    pub fn invariant_lap_k(&self, z: Complex<T>) -> T {
        let s = self.terms.iter().fold(T::zero(), |acc, &(a, _, m)| {
            let t = one_minus_psi_sq(a, z);
            acc + m * t * t
        });
        s / T::lit(2.0)
    }

    /// `sum (1 - psi(a,z)^2)^2`, the quantity bounded in the sigma estimate.
    pub fn psi_square_sum(&self, z: Complex<T>) -> T {
        self.invariant_lap_k(z) * T::lit(2.0)
    }

    /// Relative mismatch of `|Psi_Z| = sigma_Z e^{k_Z}` at `z`.
    pub fn psi_identity_residual(&self, z: Complex<T>) -> Result<T> {
        ensure!(!self.terms.iter().any(|&(a, _, _)| a == z), Error::OnZeroSet);
        let lhs = self.log_abs_psi(z);
        let rhs = self.log_sigma(z) + self.k(z);
        Ok(((lhs - rhs).exp() - T::one()).abs())
    }
}

/// `log E_a(z)` on some branch.
#[inline]
pub fn log_e_a<T: Real>(a: Complex<T>, z: Complex<T>) -> Complex<T> {
    let half = T::lit(0.5);
    let r = a.norm();
    if r == T::zero() {
        return z.ln() + half;
    }
    let m = moebius(a, z);
    let unit = a.conj() / r;
    (unit * m).ln() + (Complex::new(T::one(), T::zero()) - a.conj() * m) - (T::one() - r * r) * half
}

/// The normalized factor `E_a(z)`; `E_0(z) = z e^{1/2}`.
pub fn e_a<T: Real>(a: Complex<T>, z: Complex<T>) -> Complex<T> {
    let half = T::lit(0.5);
    let r = a.norm();
    if r == T::zero() {
        return z * half.exp();
    }
    let m = moebius(a, z);
    let expo = Complex::new(T::one(), T::zero()) - a.conj() * m - (T::one() - r * r) * half;
    a.conj() / r * m * expo.exp()
}

pub fn k_z<T: Real>(z_set: &PointSet<T>, z: Complex<T>) -> T {
    WeightEval::new(z_set).k(z)
}

pub fn log_abs_psi<T: Real>(z_set: &PointSet<T>, z: Complex<T>) -> T {
    WeightEval::new(z_set).log_abs_psi(z)
}

pub fn sigma_z<T: Real>(z_set: &PointSet<T>, z: Complex<T>) -> T {
    WeightEval::new(z_set).sigma(z)
}

pub fn lap_kz<T: Real>(z_set: &PointSet<T>, z: Complex<T>) -> T {
    WeightEval::new(z_set).lap_k(z)
}

pub fn check_psi_identity<T: Real>(z_set: &PointSet<T>, z: Complex<T>) -> Result<T> {
    WeightEval::new(z_set).psi_identity_residual(z)
}

/// Constant `C` with `log(1/x) - (1 - x) <= C (1 - x)^2` for `x >= eta^2`,
/// namely `sum_k (1 - eta^2)^k / (k + 2)`.
pub fn sigma_bound_constant<T: Real>(eta: T) -> T {
    let y = T::one() - eta * eta;
    if y < T::lit(1e-4) {
        // series form, the closed form cancels badly here
        let mut s = T::zero();
        let mut yk = T::one();
        for k in 0..12 {
            s = s + yk / T::from_i32(k + 2).unwrap();
            yk = yk * y;
        }
        return s;
    }
    (-(T::one() - y).ln() - y) / (y * y)
}

/// Lower bound `exp(-C S / 2)` for `sigma_Z` on the region where every
/// point of `Z` is at distance at least `eta`, with `S` the largest value of
/// `sum (1 - psi^2)^2` over `samples`.
pub fn sigma_lower_bound<T: Real>(z_set: &PointSet<T>, eta: T, samples: &[Complex<T>]) -> Result<T> {
    ensure!(eta > T::zero() && eta < T::one(), Error::Parameter(format!("eta = {eta} not in (0,1)")));
    if z_set.is_empty() {
        return Ok(T::one());
    }
    let w = WeightEval::new(z_set);
    let mut s = T::zero();
    for &z in samples {
        for (a, _) in z_set.iter() {
            ensure!(psi(a, z) >= eta, Error::Parameter(format!("sample within distance {eta} of the point set")));
        }
        s = s.max(w.psi_square_sum(z));
    }
    Ok((-sigma_bound_constant(eta) * s / T::lit(2.0)).exp())
}

/// `(1 - |a|^2 |z|^2) / |1 - conj(a) z|^2`, the real part of
/// `(1 + conj(a) z) / (1 - conj(a) z)`; harmonic in `z`, equal to 1 at 0.
#[inline]
fn harmonic_kernel<T: Real>(a: Complex<T>, z: Complex<T>) -> T {
    (T::one() - a.norm_sqr() * z.norm_sqr()) / (Complex::new(T::one(), T::zero()) - a.conj() * z).norm_sqr()
}

/// The defect `k_Z - lambda k_{Z'} - u` for `Z = p_lambda(Z')`, where
/// `u` is the explicit harmonic sum
/// `sum_{b in Z'} (1 - |b|^2) [H_{p_lambda(b)} - H_b]`.
#[derive(Clone, Debug)]
pub struct PerturbationDefect<T> {
    lambda: T,
    weight: WeightEval<T>,
    preimage_weight: WeightEval<T>,
    /// `(b, p_lambda(b), (1 - |b|^2) * multiplicity)`.
    pairs: Vec<(Complex<T>, Complex<T>, T)>,
}

impl<T: Real> PerturbationDefect<T> {
    pub fn new(z_set: &PointSet<T>, lambda: T) -> Result<Self> {
        ensure!(lambda > T::zero() && lambda < T::one(), Error::Parameter(format!("lambda = {lambda} not in (0,1)")));
        ensure!(
            !z_set.contains(Complex::new(T::zero(), T::zero())),
            Error::Parameter("the origin must not belong to the point set".into())
        );
        if !z_set.is_empty() {
            let with_origin =
                z_set.union(&PointSet::new(vec![Point::from_complex_unchecked(Complex::new(T::zero(), T::zero()))]));
            ensure!(
                separation_constant(&with_origin)? > T::zero(),
                Error::Separation("point set together with the origin is not separated".into())
            );
        }
        let mut pre = Vec::with_capacity(z_set.len());
        let mut pairs = Vec::with_capacity(z_set.len());
        for (a, m) in z_set.iter() {
            let b = p_lambda_inverse(a, lambda)?;
            pre.push(Point::from_complex_unchecked(b));
            pairs.push((b, a, (T::one() - b.norm_sqr()) * T::from_u32(m).unwrap()));
        }
        let pre = PointSet::with_multiplicities(pre, z_set.multiplicities().to_vec())?;
        Ok(PerturbationDefect { lambda, weight: WeightEval::new(z_set), preimage_weight: WeightEval::new(&pre), pairs })
    }

    /// The harmonic sum `u(z)`; `u(0) = 0`.
    pub fn harmonic_part(&self, z: Complex<T>) -> T {
        self.pairs.iter().fold(T::zero(), |acc, &(b, pb, w)| acc + w * (harmonic_kernel(pb, z) - harmonic_kernel(b, z)))
    }

    pub fn eval(&self, z: Complex<T>) -> T {
        self.weight.k(z) - self.lambda * self.preimage_weight.k(z) - self.harmonic_part(z)
    }
}

pub fn perturbation_defect<T: Real>(z_set: &PointSet<T>, lambda: T, z: Complex<T>) -> Result<T> {
    Ok(PerturbationDefect::new(z_set, lambda)?.eval(z))
}
