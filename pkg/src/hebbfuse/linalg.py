"""Dense matrix kernels used throughout the toolkit.

Matrices are plain 2-D float64 numpy arrays (row-major). Everything here
is a pure function; nothing mutates its arguments. The numerically
delicate pieces live in this module so the rest of the code can stay
naive: row-stable softmax, the cross-entropy gradient with respect to
logits, and the symmetric square root needed by the Frechet distance.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

__all__ = [
    "SymEigen",
    "softmax_rows",
    "ce_grad_wrt_logits",
    "summed_cross_entropy",
    "sym_eigen",
    "sym_sqrt",
]


def as_matrix(a) -> np.ndarray:
    """Coerce to a 2-D float64 array without copying when possible."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={m.ndim}")
    return m


def softmax_rows(logits) -> np.ndarray:
    """Row-wise softmax with per-row max subtraction.

    Total on finite input: entries of magnitude 1e3 (and far beyond) do
    not overflow because each row is shifted by its maximum first.
    """
    z = as_matrix(logits)
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def ce_grad_wrt_logits(labels_onehot, logits) -> np.ndarray:
    """Gradient of summed cross-entropy w.r.t. the logits.

    The loss is sum_i CE(y_i, softmax(logits_i)), summed (not averaged)
    over samples; its gradient is softmax(logits) - Y. Row sums are zero
    because both terms sum to one per row.
    """
    y = as_matrix(labels_onehot)
    z = as_matrix(logits)
    if y.shape != z.shape:
        raise ValueError(f"shape mismatch: labels {y.shape} vs logits {z.shape}")
    return softmax_rows(z) - y


def summed_cross_entropy(labels_onehot, logits) -> float:
    """sum_i CE(y_i, softmax(logits_i)), stable via log-sum-exp."""
    y = as_matrix(labels_onehot)
    z = as_matrix(logits)
    if y.shape != z.shape:
        raise ValueError(f"shape mismatch: labels {y.shape} vs logits {z.shape}")
    zmax = z.max(axis=1, keepdims=True)
    lse = zmax[:, 0] + np.log(np.exp(z - zmax).sum(axis=1))
    return float(np.sum(lse - (y * z).sum(axis=1)))


@dataclass(frozen=True)
class SymEigen:
    """Eigendecomposition of a symmetric matrix.

    eigenvalues ascend; eigenvectors are orthonormal columns, so the
    input reconstructs as Q diag(w) Q^T.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        q = self.eigenvectors
        return (q * self.eigenvalues) @ q.T


def _check_symmetric(a: np.ndarray, tol: float = 1e-8) -> None:
    scale = max(1.0, float(np.abs(a).max()) if a.size else 1.0)
    if not np.all(np.abs(a - a.T) <= tol * scale):
        raise NumericalError("matrix is not symmetric within tolerance")


def sym_eigen(a) -> SymEigen:
    """Symmetric eigendecomposition (LAPACK dsyevd via numpy).

    Raises NumericalError if the input is not symmetric within 1e-8
    relative tolerance.
    """
    m = as_matrix(a)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"expected square matrix, got {m.shape}")
    _check_symmetric(m)
    w, q = np.linalg.eigh(m)
    return SymEigen(eigenvalues=w, eigenvectors=q)


def sym_sqrt(a, clamp_tol: float | None = None) -> np.ndarray:
    """Square root of a symmetric PSD matrix.

    Eigenvalues in [-clamp_tol, 0) are treated as round-off and clamped
    to zero; anything below -clamp_tol signals a genuinely non-PSD input
    (i.e. an upstream covariance bug) and raises NumericalError. The
    default clamp_tol is 1e-10 times the largest eigenvalue magnitude.
    """
    dec = sym_eigen(a)
    w = dec.eigenvalues.copy()
    if clamp_tol is None:
        clamp_tol = 1e-10 * float(np.abs(w).max()) if w.size else 0.0
    if np.any(w < -clamp_tol):
        raise NumericalError(
            f"eigenvalue {w.min():.3e} below -clamp_tol ({-clamp_tol:.3e}); "
            "input is not PSD"
        )
    np.clip(w, 0.0, None, out=w)
    q = dec.eigenvectors
    s = (q * np.sqrt(w)) @ q.T
    return (s + s.T) / 2.0
