//! Gaussian distributions over coefficients and the unit-information prior.
//!
//! The default prior carries the information of a single dyadic observation:
//! centred at zero with covariance D(ΔᵀΔ)⁻¹, where Δ stacks the change
//! statistics of every dyad (edges column removed) and D is the number of
//! dyads. The edges coefficient gets an effectively flat, independent prior
//! with a very large variance, so overall tie density is never penalized and
//! never testable.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::net::Network;
use crate::stats::{BoundModel, ModelSpec};

/// Cholesky factorization that also rejects numerically singular matrices.
/// `Cholesky::new` replaces a vanishing trailing pivot with machine-noise
/// scale instead of failing, so singularity shows up as a pivot many orders
/// of magnitude below the rest rather than as `None`.
pub(crate) fn checked_cholesky(m: DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    let chol = Cholesky::new(m)?;
    let diag = chol.l().diagonal();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for &d in diag.iter() {
        if !d.is_finite() || d <= 0.0 {
            return None;
        }
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if lo < 1e-7 * hi {
        return None;
    }
    Some(chol)
}

/// A multivariate Gaussian over named coordinates, validated to be symmetric
/// positive definite on construction.
#[derive(Debug, Clone)]
pub struct Gaussian {
    names: Vec<String>,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl Gaussian {
    /// Build and validate. The covariance must be symmetric within 1e-12
    /// (relative to its largest entry) and admit a Cholesky factorization.
    pub fn new(names: Vec<String>, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let k = mean.len();
        if names.len() != k || cov.nrows() != k || cov.ncols() != k {
            return Err(Error::Invalid(format!(
                "inconsistent Gaussian dimensions: {} names, {} mean, {}x{} covariance",
                names.len(),
                k,
                cov.nrows(),
                cov.ncols()
            )));
        }
        let scale = cov.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
        for i in 0..k {
            for j in (i + 1)..k {
                if (cov[(i, j)] - cov[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::NotPositiveDefinite);
                }
            }
        }
        // Symmetrize exactly before factoring.
        let mut sym = cov.clone();
        for i in 0..k {
            for j in (i + 1)..k {
                let v = 0.5 * (sym[(i, j)] + sym[(j, i)]);
                sym[(i, j)] = v;
                sym[(j, i)] = v;
            }
        }
        let chol = checked_cholesky(sym.clone()).ok_or(Error::NotPositiveDefinite)?;
        Ok(Gaussian {
            names,
            mean,
            cov: sym,
            chol,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn sd(&self, i: usize) -> f64 {
        self.cov[(i, i)].sqrt()
    }

    pub fn correlation(&self) -> DMatrix<f64> {
        let k = self.dim();
        DMatrix::from_fn(k, k, |i, j| self.cov[(i, j)] / (self.sd(i) * self.sd(j)))
    }

    /// Marginal over a subset of coordinates, in the given order.
    pub fn marginal(&self, indices: &[usize]) -> Result<Gaussian> {
        let names = indices.iter().map(|&i| self.names[i].clone()).collect();
        let mean = DVector::from_iterator(indices.len(), indices.iter().map(|&i| self.mean[i]));
        let cov = DMatrix::from_fn(indices.len(), indices.len(), |r, c| {
            self.cov[(indices[r], indices[c])]
        });
        Gaussian::new(names, mean, cov)
    }

    /// The distribution of m·x: N(m·μ, m·Σ·mᵀ).
    pub fn transformed(&self, m: &DMatrix<f64>, names: Vec<String>) -> Result<Gaussian> {
        let mean = m * &self.mean;
        let cov = m * &self.cov * m.transpose();
        Gaussian::new(names, mean, cov).map_err(|_| Error::DegenerateTransform)
    }

    /// Condition the trailing coordinates on the first `q` being exactly 0:
    /// the Gaussian of x_{q..} | x_{0..q} = 0.
    pub fn conditioned_on_leading_zeros(&self, q: usize) -> Result<Gaussian> {
        let k = self.dim();
        debug_assert!(q <= k);
        let s11 = self.cov.view((0, 0), (q, q)).into_owned();
        let s12 = self.cov.view((0, q), (q, k - q)).into_owned();
        let s21 = s12.transpose();
        let s22 = self.cov.view((q, q), (k - q, k - q)).into_owned();
        let mu1 = self.mean.rows(0, q).into_owned();
        let mu2 = self.mean.rows(q, k - q).into_owned();
        let chol11 = Cholesky::new(s11).ok_or(Error::DegenerateConditioned)?;
        // Σ21 Σ11⁻¹ (0 − μ1) and Σ21 Σ11⁻¹ Σ12 via solves.
        let w = chol11.solve(&(-mu1));
        let mean = mu2 + &s21 * w;
        let v = chol11.solve(&s12);
        let cov = s22 - &s21 * v;
        let names = self.names[q..].to_vec();
        Gaussian::new(names, mean, cov).map_err(|_| Error::DegenerateConditioned)
    }

    /// Log density at a point.
    pub fn log_pdf(&self, x: &DVector<f64>) -> f64 {
        let k = self.dim() as f64;
        let diff = x - &self.mean;
        let solved = self.chol.solve(&diff);
        let quad = diff.dot(&solved);
        let log_det: f64 = self.chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
        -0.5 * (k * (2.0 * std::f64::consts::PI).ln() + log_det + quad)
    }

    pub fn pdf(&self, x: &DVector<f64>) -> f64 {
        self.log_pdf(x).exp()
    }

    /// One draw: μ + L z.
    pub fn sample(&self, rng: &mut impl Rng) -> DVector<f64> {
        let z = DVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|_| StandardNormal.sample(rng)),
        );
        &self.mean + self.chol.l() * z
    }

    /// An antithetic pair (μ + Lz, μ − Lz): the two draws are exchangeable
    /// and negatively correlated, halving Monte Carlo variance for symmetric
    /// integrands.
    pub fn sample_antithetic_pair(&self, rng: &mut impl Rng) -> (DVector<f64>, DVector<f64>) {
        let z = DVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|_| StandardNormal.sample(rng)),
        );
        let shift = self.chol.l() * z;
        (&self.mean + &shift, &self.mean - &shift)
    }
}

/// Settings for [`unit_information_prior_with`].
#[derive(Debug, Clone, Copy)]
pub struct PriorConfig {
    /// Variance of the effectively flat edges prior.
    pub edges_variance: f64,
    /// Maximum allowed condition number of ΔᵀΔ before the design is declared
    /// collinear.
    pub condition_limit: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        PriorConfig {
            edges_variance: 1e4,
            condition_limit: 1e10,
        }
    }
}

/// The unit-information prior for a model on an observed network, with
/// default settings. Mean zero; covariance block-diagonal: a very large
/// variance for the edges coefficient, D(ΔᵀΔ)⁻¹ for the rest.
pub fn unit_information_prior(net: &Network, model: &ModelSpec) -> Result<Gaussian> {
    unit_information_prior_with(net, model, PriorConfig::default())
}

/// As [`unit_information_prior`] with explicit settings.
pub fn unit_information_prior_with(
    net: &Network,
    model: &ModelSpec,
    config: PriorConfig,
) -> Result<Gaussian> {
    let bound = BoundModel::bind(model, net)?;
    let design = bound.change_stat_matrix(net.adjacency());
    let k = bound.k();
    let e = bound.edges_index();
    let d_count = net.dyad_count() as f64;

    let rest: Vec<usize> = (0..k).filter(|&t| t != e).collect();
    let mut cov = DMatrix::zeros(k, k);
    cov[(e, e)] = config.edges_variance;

    if !rest.is_empty() {
        let delta = DMatrix::from_fn(design.matrix.nrows(), rest.len(), |r, c| {
            design.matrix[(r, rest[c])]
        });
        let xtx = delta.transpose() * &delta;

        // Condition check via symmetric eigendecomposition; on failure name
        // the columns loading on the smallest eigenvalue.
        let eig = xtx.clone().symmetric_eigen();
        let max_ev = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let (min_idx, min_ev) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |acc, (i, &v)| {
                if v < acc.1 {
                    (i, v)
                } else {
                    acc
                }
            });
        let condition = if min_ev <= 0.0 {
            f64::INFINITY
        } else {
            max_ev / min_ev
        };
        if !(condition < config.condition_limit) {
            let v = eig.eigenvectors.column(min_idx);
            let peak = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
            let columns = rest
                .iter()
                .zip(v.iter())
                .filter(|(_, x)| x.abs() > 0.2 * peak)
                .map(|(&t, _)| bound.names()[t].clone())
                .collect();
            return Err(Error::CollinearStatistics {
                columns,
                condition,
                limit: config.condition_limit,
            });
        }

        let inv = Cholesky::new(xtx)
            .ok_or(Error::NotPositiveDefinite)?
            .inverse();
        for (r, &tr) in rest.iter().enumerate() {
            for (c, &tc) in rest.iter().enumerate() {
                cov[(tr, tc)] = d_count * inv[(r, c)];
            }
        }
    }

    Gaussian::new(bound.names().to_vec(), DVector::zeros(k), cov)
}
