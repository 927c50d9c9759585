"""Linear discriminant analysis with shrinkage of the pooled covariance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .spectra_io import LabeledDataset, class_mean_spectra


class SingularCovarianceError(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class LdaModel:
    class_means: np.ndarray
    chol: np.ndarray          # lower Cholesky factor of the regularized covariance
    log_priors: np.ndarray
    shrinkage: float
    class_names: tuple
    coef: np.ndarray          # (bands, n_classes): Sigma^-1 mu_c
    intercept: np.ndarray     # -0.5 mu_c' Sigma^-1 mu_c + log pi_c

    @property
    def covariance(self) -> np.ndarray:
        return self.chol @ self.chol.T


def pooled_covariance(ds: LabeledDataset) -> np.ndarray:
    """Within-class scatter divided by n - C."""
    if ds.n_samples <= ds.n_classes:
        raise SingularCovarianceError("need more samples than classes for a pooled covariance")
    centered = ds.spectra - class_mean_spectra(ds)[ds.labels]
    return centered.T @ centered / (ds.n_samples - ds.n_classes)


def fit_lda(ds: LabeledDataset, shrinkage: float = 0.1) -> LdaModel:
    """Fit on ``ds``; covariance is ``(1-s) S + s * mean(diag S) * I``."""
    if ds.n_classes < 2:
        raise ValueError("LDA needs at least 2 classes")
    if not 0.0 <= shrinkage <= 1.0:
        raise ValueError(f"shrinkage must be in [0, 1], got {shrinkage}")
    means = class_mean_spectra(ds)
    cov = pooled_covariance(ds)
    target = np.trace(cov) / cov.shape[0]
    reg = (1.0 - shrinkage) * cov + shrinkage * target * np.eye(cov.shape[0])
    hint = "; increase --lda-shrinkage"
    try:
        c, lower = cho_factor(reg, lower=True)
    except np.linalg.LinAlgError:
        raise SingularCovarianceError(f"regularized covariance is not positive definite{hint}") from None
    # rank-deficient matrices can slip through with round-off-sized pivots
    pivots = np.diag(c) ** 2
    scale = max(float(np.max(np.diag(reg))), np.finfo(float).tiny)
    if pivots.min() <= reg.shape[0] * np.finfo(float).eps * scale:
        raise SingularCovarianceError(f"regularized covariance is numerically singular{hint}")
    chol = np.tril(c)
    coef = cho_solve((c, lower), means.T)
    log_priors = np.log(ds.class_counts() / ds.n_samples)
    intercept = -0.5 * np.einsum("cb,bc->c", means, coef) + log_priors
    return LdaModel(means, chol, log_priors, float(shrinkage), ds.class_names, coef, intercept)


def discriminants(model: LdaModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != model.class_means.shape[1]:
        raise ValueError(
            f"input has {x.shape[1]} bands; model expects {model.class_means.shape[1]}"
        )
    return x @ model.coef + model.intercept


def predict_lda(model: LdaModel, x) -> np.ndarray:
    """Argmax discriminant per row; ties go to the lower class index."""
    return np.argmax(discriminants(model, x), axis=1)
