//! Ridge regression with an incrementally maintained inverse Gram matrix.

use nalgebra::{DMatrix, DVector};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Sherman–Morrison drift is bounded by refactorizing `gram_inv` directly
/// every this many absorbs.
pub const DEFAULT_REFACTOR_EVERY: usize = 512;

/// Regularized least-squares state: `V = XᵀX + λI`, `V⁻¹` and `b = Xᵀr`.
#[derive(Debug, Clone)]
pub struct RidgeState {
    dim: usize,
    lambda: f64,
    gram: DMatrix<f64>,
    gram_inv: DMatrix<f64>,
    response: DVector<f64>,
    count: usize,
    refactor_every: usize,
}

impl RidgeState {
    pub fn new(dim: usize, lambda: f64) -> Result<Self> {
        Self::with_refactor_interval(dim, lambda, DEFAULT_REFACTOR_EVERY)
    }

    pub fn with_refactor_interval(dim: usize, lambda: f64, refactor_every: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("ridge dimension must be at least 1"));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::config(format!(
                "ridge regularization must be positive and finite, got {lambda}"
            )));
        }
        if refactor_every == 0 {
            return Err(Error::config("refactorization interval must be at least 1"));
        }
        Ok(Self {
            dim,
            lambda,
            gram: DMatrix::identity(dim, dim) * lambda,
            gram_inv: DMatrix::identity(dim, dim) / lambda,
            response: DVector::zeros(dim),
            count: 0,
            refactor_every,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Number of absorbed samples.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn gram_inv(&self) -> &DMatrix<f64> {
        &self.gram_inv
    }

    pub fn response(&self) -> &DVector<f64> {
        &self.response
    }

    /// Adds one observation `(x, r)`.
    pub fn absorb(&mut self, x: &[f64], r: f64) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::contract(format!(
                "ridge expects {}-dimensional contexts, got {}",
                self.dim,
                x.len()
            )));
        }
        self.count += 1;
        if x.iter().all(|&v| v == 0.0) {
            return Ok(());
        }
        let x = DVector::from_column_slice(x);
        self.gram.ger(1.0, &x, &x, 1.0);
        self.response.axpy(r, &x, 1.0);

        if self.count % self.refactor_every == 0 {
            self.refactorize()?;
        } else {
            // V⁻¹ ← V⁻¹ − (V⁻¹x)(V⁻¹x)ᵀ / (1 + xᵀV⁻¹x)
            let u = &self.gram_inv * &x;
            let denom = 1.0 + x.dot(&u);
            self.gram_inv.ger(-1.0 / denom, &u, &u, 1.0);
        }
        Ok(())
    }

    /// Recomputes `V⁻¹` from `V` by a Cholesky factorization.
    pub fn refactorize(&mut self) -> Result<()> {
        let chol = self
            .gram
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Numerical("Gram matrix lost positive definiteness".into()))?;
        self.gram_inv = chol.inverse();
        Ok(())
    }

    /// Ridge solution `V⁻¹b`.
    pub fn estimate(&self) -> Vec<f64> {
        (&self.gram_inv * &self.response).as_slice().to_vec()
    }

    /// `xᵀ V⁻¹ x`, the squared Mahalanobis norm used by confidence bonuses.
    pub fn mahalanobis_sq(&self, x: &[f64]) -> f64 {
        let x = DVector::from_column_slice(x);
        x.dot(&(&self.gram_inv * &x))
    }
}

/// Ridge estimate plus isotropic Gaussian perturbation.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedEstimate {
    pub mu: Vec<f64>,
    pub base: Vec<f64>,
    pub noise_scale: f64,
}

/// Perturbation magnitude `ρ / (d·√t̃)`, zero when no samples back the estimate.
pub fn noise_scale(rho: f64, dim: usize, t_tilde: usize) -> f64 {
    if t_tilde == 0 {
        0.0
    } else {
        rho / (dim as f64 * (t_tilde as f64).sqrt())
    }
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho <= 1.0 {
        Ok(())
    } else {
        Err(Error::config(format!("rho must lie in (0, 1], got {rho}")))
    }
}

/// Builds the estimate used at a round whose split point is `t_tilde`.
///
/// With `t_tilde = 0` the estimate is the zero vector and no randomness is
/// consumed. Otherwise a fresh standard Gaussian vector is drawn from `rng`.
pub fn perturbed_estimate(
    state: &RidgeState,
    t_tilde: usize,
    rho: f64,
    rng: &mut dyn RngCore,
) -> Result<PerturbedEstimate> {
    check_rho(rho)?;
    let d = state.dim();
    if t_tilde == 0 {
        return Ok(PerturbedEstimate {
            mu: vec![0.0; d],
            base: vec![0.0; d],
            noise_scale: 0.0,
        });
    }
    let base = state.estimate();
    let scale = noise_scale(rho, d, t_tilde);
    let mu = base
        .iter()
        .map(|b| {
            let g: f64 = StandardNormal.sample(rng);
            b + scale * g
        })
        .collect();
    Ok(PerturbedEstimate {
        mu,
        base,
        noise_scale: scale,
    })
}
