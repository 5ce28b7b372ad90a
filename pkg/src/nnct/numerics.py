"""Small numerical kernels: symmetric generalized inverse and the tail
probabilities used by the tests.

The quadratic-form tests work on 2x2 and 4x4 symmetric covariance matrices
that are rank-deficient by construction, so the inverse used throughout is a
spectral pseudo-inverse with a configurable relative eigenvalue cutoff.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import special

from .errors import InvalidInputError

# Eigenvalues below DEFAULT_REL_CUTOFF times the largest eigenvalue are
# treated as zero when inverting.
DEFAULT_REL_CUTOFF = 1e-8

_SYMMETRY_ATOL = 1e-12


def _check_symmetric(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidInputError(f"expected a square matrix, got shape {m.shape}")
    scale = max(1.0, float(np.max(np.abs(m))) if m.size else 0.0)
    if not np.allclose(m, m.T, rtol=0.0, atol=_SYMMETRY_ATOL * scale):
        raise InvalidInputError("matrix is not symmetric")
    return m


def generalized_inverse(m: np.ndarray, rel_cutoff: float = DEFAULT_REL_CUTOFF) -> np.ndarray:
    """Spectral pseudo-inverse of a symmetric matrix.

    Eigenvalues above ``rel_cutoff`` times the largest eigenvalue are
    inverted; the rest (including any negative roundoff eigenvalues) are
    zeroed.  On the retained eigenspace the result satisfies the
    Moore-Penrose identities ``m g m = m`` and ``g m g = g``.
    """
    m = _check_symmetric(m)
    m = 0.5 * (m + m.T)
    w, v = np.linalg.eigh(m)
    wmax = float(w[-1]) if w.size else 0.0
    if wmax <= 0.0:
        return np.zeros_like(m)
    keep = w > rel_cutoff * wmax
    inv_w = np.where(keep, 1.0, np.nan)
    inv_w[keep] = 1.0 / w[keep]
    inv_w[~keep] = 0.0
    return (v * inv_w) @ v.T


def chi2_sf(x: float, df: int) -> float:
    """Upper-tail probability of the chi-square distribution.

    ``df = 2`` uses the closed form exp(-x/2); other degrees of freedom go
    through the regularized upper incomplete gamma function.
    """
    if not math.isfinite(x) or x < 0.0:
        raise InvalidInputError(f"chi-square statistic must be >= 0, got {x!r}")
    df = int(df)
    if df < 1:
        raise InvalidInputError(f"degrees of freedom must be >= 1, got {df}")
    if df == 2:
        return math.exp(-0.5 * x)
    return float(special.gammaincc(0.5 * df, 0.5 * x))


def normal_sf(z: float) -> float:
    """Standard normal upper-tail probability 1 - Phi(z)."""
    return float(special.ndtr(-z))
