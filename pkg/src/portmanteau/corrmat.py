"""Toeplitz (cross-)correlation matrices, their block assembly and log-determinants.

The single-kind matrix of order m is (m+1) x (m+1) with entry (r, c) equal to
rho_ij(c - r); the block matrix stacks the four kinds as
[[R11, R12], [R12', R22]] and is 2(m+1)-dimensional.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, toeplitz
from scipy.linalg.lapack import dpotrf

from .errors import LagTooLarge, NotPositiveDefinite
from .residuals import ResidualSeries, cross_corr_sequence

_KINDS = {(1, 1): "R11", (1, 2): "R12", (2, 1): "R21", (2, 2): "R22"}


@dataclass(frozen=True)
class CrossCorrMatrix:
    """Dense correlation matrix of one kind, or the assembled block matrix."""

    m: int
    kind: str  # "R11" | "R12" | "R21" | "R22" | "block"
    entries: np.ndarray
    standardized: bool = False


def _check_order(n: int, m: int) -> None:
    if not 1 <= m < n / 2:
        raise LagTooLarge(f"lag order m = {m} must satisfy 1 <= m < n/2 with n = {n}")


def _toeplitz_entries(series: ResidualSeries, i: int, j: int, m: int, standardized: bool) -> np.ndarray:
    pos = cross_corr_sequence(series, i, j, m)  # rho_ij(0..m)
    neg = cross_corr_sequence(series, j, i, m)  # rho_ij(-k) = rho_ji(k)
    if standardized:
        # The scaling is defined for k != 0 only; lag 0 keeps its raw value so
        # autocorrelation matrices keep a unit diagonal.
        factors = np.sqrt((series.n + 2.0) / (series.n - np.arange(1, m + 1)))
        pos = pos.copy()
        neg = neg.copy()
        pos[1:] *= factors
        neg[1:] *= factors
    # toeplitz(c, r): entry (a, b) = c[a-b] below the diagonal, r[b-a] above.
    return toeplitz(neg, pos)


def build_toeplitz(
    series: ResidualSeries, i: int, j: int, m: int, standardized: bool = False
) -> CrossCorrMatrix:
    """The (m+1) x (m+1) Toeplitz matrix with entry (r, c) = rho_ij(c - r)."""
    _check_order(series.n, m)
    entries = _toeplitz_entries(series, i, j, m, standardized)
    return CrossCorrMatrix(m=m, kind=_KINDS[(i, j)], entries=entries, standardized=standardized)


def build_block(series: ResidualSeries, m: int) -> CrossCorrMatrix:
    """The 2(m+1)-dimensional block matrix [[R11, R12], [R12', R22]].

    Entries are the raw (unstandardized) correlations; the lag-0
    cross-correlation rho_12(0) sits on the diagonal of the off-diagonal
    blocks.
    """
    _check_order(series.n, m)
    r11 = _toeplitz_entries(series, 1, 1, m, False)
    r12 = _toeplitz_entries(series, 1, 2, m, False)
    r22 = _toeplitz_entries(series, 2, 2, m, False)
    entries = np.block([[r11, r12], [r12.T, r22]])
    return CrossCorrMatrix(m=m, kind="block", entries=entries, standardized=False)


def _as_array(matrix) -> np.ndarray:
    if isinstance(matrix, CrossCorrMatrix):
        return matrix.entries
    return np.asarray(matrix, dtype=float)


def logdet_pd(matrix) -> float:
    """Log-determinant of a symmetric positive definite matrix via Cholesky.

    Raises :class:`NotPositiveDefinite` carrying the 1-based order of the first
    non-positive leading minor when the factorization breaks down.
    """
    a = _as_array(matrix)
    c, info = dpotrf(a, lower=1)
    if info > 0:
        raise NotPositiveDefinite(info)
    if info < 0:
        raise ValueError(f"invalid argument {-info} to dpotrf")
    return float(2.0 * np.sum(np.log(np.diag(c))))


def schur_logdet(block) -> float:
    """Block log-determinant log|R11| + log|R22 - R12' R11^-1 R12|.

    Validation route for :func:`logdet_pd` on block matrices; both must agree
    whenever the block matrix is positive definite.
    """
    a = _as_array(block)
    d = a.shape[0] // 2
    r11 = a[:d, :d]
    r12 = a[:d, d:]
    r22 = a[d:, d:]
    try:
        factor = cho_factor(r11, lower=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - scipy raises its own type
        raise NotPositiveDefinite(0) from exc
    complement = r22 - r12.T @ cho_solve(factor, r12)
    logdet_r11 = float(2.0 * np.sum(np.log(np.diag(factor[0]))))
    return logdet_r11 + logdet_pd(complement)


def weighted_cross_sum(series: ResidualSeries, m: int) -> float:
    """sum over k = -m..m of (m+1-|k|) rho_12(k)^2.

    Equals tr(R12' R12) exactly; exposed for the trace-identity checks.
    """
    pos = cross_corr_sequence(series, 1, 2, m)
    neg = cross_corr_sequence(series, 2, 1, m)
    weights = m + 1.0 - np.arange(m + 1)
    return float(weights @ (pos * pos) + weights[1:] @ (neg[1:] * neg[1:]))
