"""Frechet (Wasserstein-2, Gaussian) distance between feature populations.

Two populations are summarized by mean and unbiased covariance; the
distance is

    ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a^{1/2} S_b S_a^{1/2})^{1/2})

The inner root is taken of the symmetrized product S_a^{1/2} S_b
S_a^{1/2} rather than the non-symmetric S_a S_b: the trace is the same
and the symmetric form keeps the square root well-posed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericalError
from .feature_store import FeatureSet
from .linalg import as_matrix, sym_sqrt

__all__ = ["GaussianStats", "fit_gaussian", "frechet_distance", "fid_between_sets"]


@dataclass(frozen=True)
class GaussianStats:
    """Mean vector, covariance matrix, and sample count of one population."""

    mean: np.ndarray
    cov: np.ndarray
    n: int

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])


def fit_gaussian(features) -> GaussianStats:
    """Column means and unbiased (n-1) covariance, symmetrized."""
    z = as_matrix(features)
    if z.shape[0] < 2:
        raise DataError(f"need >= 2 rows to fit a Gaussian, got {z.shape[0]}")
    if not np.all(np.isfinite(z)):
        raise DataError("features contain non-finite values")
    mean = z.mean(axis=0)
    centered = z - mean
    cov = (centered.T @ centered) / (z.shape[0] - 1)
    cov = (cov + cov.T) / 2.0
    return GaussianStats(mean=mean, cov=cov, n=z.shape[0])


def frechet_distance(a: GaussianStats, b: GaussianStats) -> float:
    if a.dim != b.dim:
        raise DataError(f"dimension mismatch: {a.dim} vs {b.dim}")
    diff = a.mean - b.mean
    root_a = sym_sqrt(a.cov)
    inner = root_a @ b.cov @ root_a
    inner = (inner + inner.T) / 2.0
    cross = sym_sqrt(inner)
    total = float(diff @ diff + np.trace(a.cov) + np.trace(b.cov) - 2.0 * np.trace(cross))
    if total < 0.0:
        if total < -1e-8:
            raise NumericalError(f"Frechet distance came out at {total:.3e} < -1e-8")
        total = 0.0
    return total


def fid_between_sets(fs_a: FeatureSet, fs_b: FeatureSet, layer_id: str) -> float:
    """Frechet distance between one layer's populations in two feature sets."""
    for name, fs in (("first", fs_a), ("second", fs_b)):
        if layer_id not in fs.layers:
            raise DataError(
                f"layer {layer_id!r} missing from {name} set; "
                f"available: {fs.layer_ids}"
            )
    da, db = fs_a.layer_dim(layer_id), fs_b.layer_dim(layer_id)
    if da != db:
        raise DataError(f"layer {layer_id!r} dims differ: {da} vs {db}")
    return frechet_distance(
        fit_gaussian(fs_a.layers[layer_id]), fit_gaussian(fs_b.layers[layer_id])
    )
