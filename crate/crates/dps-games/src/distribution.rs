//! Univariate distributions on a positive bounded support.
//!
//! The limiting (continuum-of-classes) game is parametrized by a cost distribution and
//! an arrival-rate distribution. Three representations are supported: finite point-mass
//! lists, uniform densities, and arbitrary densities supplied as a closure plus support.
//! Expectations go through the adaptive Gauss-Legendre integrator at absolute tolerance
//! `1e-10`; sampling inverts the CDF (closed-form where possible, bisection for general
//! densities).

use crate::error::{Error, Result};
use crate::numeric::integrate;
use rand::Rng;
use std::fmt;
use std::sync::Arc;

/// Absolute tolerance for every expectation computed by quadrature.
pub const QUADRATURE_TOL: f64 = 1e-10;

/// A distribution over a positive closed interval (or finite positive point set).
#[derive(Clone)]
pub enum Distribution {
    /// Finite support: `(value, weight)` pairs; weights normalized on construction.
    PointMasses(Vec<(f64, f64)>),
    /// Continuous uniform on `[lo, hi]`.
    Uniform { lo: f64, hi: f64 },
    /// General density on `[lo, hi]`. `mass` is the quadrature of `pdf` over the
    /// support, stored so a slightly unnormalized density is handled exactly.
    Density {
        lo: f64,
        hi: f64,
        pdf: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
        mass: f64,
    },
}

impl fmt::Debug for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::PointMasses(pairs) => f.debug_tuple("PointMasses").field(pairs).finish(),
            Distribution::Uniform { lo, hi } => {
                f.debug_struct("Uniform").field("lo", lo).field("hi", hi).finish()
            }
            Distribution::Density { lo, hi, mass, .. } => f
                .debug_struct("Density")
                .field("lo", lo)
                .field("hi", hi)
                .field("mass", mass)
                .finish(),
        }
    }
}

impl Distribution {
    /// Point mass at a single positive value.
    pub fn point(value: f64) -> Result<Self> {
        Distribution::point_masses(vec![(value, 1.0)])
    }

    /// Finite mixture of point masses; weights must be positive and are normalized.
    pub fn point_masses(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidParameter("point-mass list is empty".into()));
        }
        let total: f64 = pairs.iter().map(|(_, w)| w).sum();
        if !pairs.iter().all(|(v, w)| v.is_finite() && *v > 0.0 && w.is_finite() && *w > 0.0) {
            return Err(Error::InvalidParameter("point masses need positive finite values and weights".into()));
        }
        let normalized = pairs.into_iter().map(|(v, w)| (v, w / total)).collect();
        Ok(Distribution::PointMasses(normalized))
    }

    /// Continuous uniform on `[lo, hi]` with `0 < lo < hi`.
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
            return Err(Error::InvalidParameter(format!("uniform support [{lo}, {hi}] must satisfy 0 < lo < hi")));
        }
        Ok(Distribution::Uniform { lo, hi })
    }

    /// General density on `[lo, hi]`; integrated once to capture its total mass.
    pub fn density<F>(lo: f64, hi: f64, pdf: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
            return Err(Error::InvalidParameter(format!("density support [{lo}, {hi}] must satisfy 0 < lo < hi")));
        }
        let mass = integrate(&pdf, lo, hi, QUADRATURE_TOL)?;
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidParameter(format!("density integrates to {mass}, need positive finite mass")));
        }
        Ok(Distribution::Density { lo, hi, pdf: Arc::new(pdf), mass })
    }

    /// Smallest and largest support points.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Distribution::PointMasses(pairs) => {
                let lo = pairs.iter().map(|(v, _)| *v).fold(f64::INFINITY, f64::min);
                let hi = pairs.iter().map(|(v, _)| *v).fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
            Distribution::Uniform { lo, hi } => (*lo, *hi),
            Distribution::Density { lo, hi, .. } => (*lo, *hi),
        }
    }

    /// Expectation `E[f(X)]`.
    pub fn expectation<F: Fn(f64) -> f64>(&self, f: F) -> Result<f64> {
        match self {
            Distribution::PointMasses(pairs) => Ok(pairs.iter().map(|(v, w)| w * f(*v)).sum()),
            Distribution::Uniform { lo, hi } => {
                Ok(integrate(&f, *lo, *hi, QUADRATURE_TOL)? / (hi - lo))
            }
            Distribution::Density { lo, hi, pdf, mass } => {
                Ok(integrate(|x| f(x) * pdf(x), *lo, *hi, QUADRATURE_TOL)? / mass)
            }
        }
    }

    /// Mean of the distribution.
    pub fn mean(&self) -> Result<f64> {
        self.expectation(|x| x)
    }

    /// Draw one sample.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        match self {
            Distribution::PointMasses(pairs) => {
                let mut acc = 0.0;
                for (v, w) in pairs {
                    acc += w;
                    if u <= acc {
                        return *v;
                    }
                }
                pairs.last().unwrap().0
            }
            Distribution::Uniform { lo, hi } => lo + (hi - lo) * u,
            Distribution::Density { lo, hi, pdf, mass } => {
                // Inverse-CDF by bisection; each CDF evaluation is one quadrature.
                let target = u * mass;
                let (mut a, mut b) = (*lo, *hi);
                for _ in 0..80 {
                    let mid = 0.5 * (a + b);
                    let cdf = integrate(pdf.as_ref(), *lo, mid, QUADRATURE_TOL).unwrap_or(target);
                    if cdf < target {
                        a = mid;
                    } else {
                        b = mid;
                    }
                    if b - a < 1e-12 * (*hi - *lo) {
                        break;
                    }
                }
                0.5 * (a + b)
            }
        }
    }
}
