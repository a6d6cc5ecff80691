"""Minimal generalized eigenpairs of (M^T M, D^2) with semi-definite D.

The constrained problem "minimize ||M v|| subject to v^T D^2 v = 1" turns
into the generalized eigenvalue problem M^T M v = lambda D^2 v.  When the
column of the constant term is present its weight is zero, which puts an
infinite eigenvalue into the pencil.  Instead of enumerating it, the zero
weight direction is eliminated analytically: the stationarity row with
zero weight forces the residual M v to have zero mean, so the constant
coefficient equals -mean(M_minus v_hat) and the remaining coefficients
solve a positive-definite problem on the mean-centered columns.  That
reduced problem is solved through an SVD of (C M_minus) D_minus^{-1}
rather than by forming the normal matrix, which avoids squaring the
condition number.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GevpProblem",
    "GevpSolution",
    "DegenerateProblemError",
    "DegenerateEigenvectorError",
    "lambda_zero_tolerance",
    "solve_min",
    "solve_all_finite",
    "min_generalized_eigenvalue",
    "solve_appendix_c",
    "normalize_eigenvector",
]

logger = logging.getLogger(__name__)

# Trial coefficients below this magnitude mean the minimizer is supported
# by the inner terms alone, violating the uniqueness hypothesis.
TRIAL_COEFF_MIN = 1e-10


class DegenerateProblemError(ValueError):
    """The evaluation matrix carries no usable information (all zero)."""


class DegenerateEigenvectorError(RuntimeError):
    """An accepted minimizer has a vanishing trial coefficient."""


@dataclass(frozen=True)
class GevpProblem:
    """Data of one minimization step.

    ``matrix`` holds the evaluation columns (inner terms first, trial term
    last); ``weights`` is the diagonal of D in the same order.  The only
    zero weight permitted is the one of the constant term, located at
    ``const_index`` (``None`` when no constant column is present).
    """

    matrix: np.ndarray
    weights: np.ndarray
    const_index: int | None = None

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if matrix.ndim != 2 or matrix.shape[1] != weights.shape[0]:
            raise ValueError("matrix and weight dimensions do not match")
        if np.any(weights < 0):
            raise ValueError("weights must be non-negative")
        zero = np.flatnonzero(weights == 0.0)
        if zero.size > 1 or (zero.size == 1 and zero[0] != self.const_index):
            raise ValueError(
                "the only zero weight permitted is the constant-term weight"
            )
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "weights", weights)


@dataclass(frozen=True)
class GevpSolution:
    """Minimal finite generalized eigenpair plus diagnostics.

    ``lambda_min`` is the squared minimal evaluation norm, snapped to 0.0
    when below the exact-zero tolerance (then ``exact`` is set).  The
    eigenvector satisfies v^T D^2 v = 1 with a positive trial coefficient;
    ``finite_spectrum`` lists all finite generalized eigenvalues ascending.
    """

    lambda_min: float
    vector: np.ndarray
    exact: bool
    finite_spectrum: tuple[float, ...]

    @property
    def sqrt_lambda_min(self) -> float:
        return math.sqrt(self.lambda_min)


def lambda_zero_tolerance(matrix: np.ndarray) -> float:
    """Threshold separating exactly-vanishing eigenvalues from round-off."""
    fro2 = float(np.sum(np.asarray(matrix, dtype=float) ** 2))
    return 1e-10 * (1.0 + fro2)


def _finite_eigenpairs(problem: GevpProblem) -> tuple[np.ndarray, np.ndarray]:
    """All finite generalized eigenpairs, eigenvalues ascending.

    Returns (lam, V) where V[:, i] is the eigenvector of lam[i], already
    normalized to v^T D^2 v = 1 (sign arbitrary).
    """
    M = problem.matrix
    d = problem.weights
    m, ncols = M.shape
    if not np.any(M):
        raise DegenerateProblemError("all evaluation columns are zero")

    ci = problem.const_index
    if ci is not None and d[ci] == 0.0:
        keep = [j for j in range(ncols) if j != ci]
        M_minus = M[:, keep]
        d_minus = d[keep]
        centered = M_minus - M_minus.mean(axis=0, keepdims=True)
        B = centered / d_minus
        _, svals, vt = np.linalg.svd(B, full_matrices=True)
        k = len(keep)
        lam = np.zeros(k)
        lam[: svals.size] = svals**2
        V = np.zeros((ncols, k))
        for i in range(k):
            v_hat = vt[i] / d_minus
            v0 = -float(np.mean(M_minus @ v_hat))
            full = np.empty(ncols)
            full[keep] = v_hat
            full[ci] = v0
            V[:, i] = full
    else:
        B = M / d
        _, svals, vt = np.linalg.svd(B, full_matrices=True)
        lam = np.zeros(ncols)
        lam[: svals.size] = svals**2
        V = (vt / d).T

    order = np.argsort(lam)
    return lam[order], V[:, order]


def solve_all_finite(problem: GevpProblem) -> tuple[np.ndarray, np.ndarray]:
    """Finite generalized eigenvalues (ascending) and their eigenvectors."""
    return _finite_eigenpairs(problem)


def min_generalized_eigenvalue(problem: GevpProblem) -> float:
    """Minimal finite generalized eigenvalue only (no trial-term handling)."""
    lam, _ = _finite_eigenpairs(problem)
    return float(lam[0])


def normalize_eigenvector(v: np.ndarray, d: np.ndarray, trial_index: int) -> np.ndarray:
    """Scale v to v^T D^2 v = 1 with a positive trial coefficient.

    When v^T D^2 v is exactly zero (possible only for exactly-vanishing
    polynomials supported by zero-semi-norm terms) the vector is scaled to
    unit Euclidean norm instead; callers detect this case by checking the
    D-norm of the result.
    """
    v = np.asarray(v, dtype=float).copy()
    d = np.asarray(d, dtype=float)
    dnorm = math.sqrt(float(np.sum((d * v) ** 2)))
    if dnorm > 0.0:
        v /= dnorm
    else:
        v /= float(np.linalg.norm(v))
    pivot = v[trial_index]
    if pivot < 0.0 or (pivot == 0.0 and v[np.argmax(np.abs(v))] < 0.0):
        v = -v
    return v


def solve_min(problem: GevpProblem, eps: float | None = None) -> GevpSolution:
    """Minimal finite generalized eigenpair of (M^T M, D^2).

    The trial term occupies the last column.  Among eigenvalues tied with
    the minimum (within the exact-zero tolerance) the eigenvector with the
    largest trial coefficient is returned and a degeneracy warning is
    logged, since uniqueness is only guaranteed for an accepted minimizer.
    When ``eps`` is given and the minimizer would be accepted
    (sqrt(lambda) <= eps) with a vanishing trial coefficient, a
    :class:`DegenerateEigenvectorError` is raised.
    """
    lam, V = _finite_eigenpairs(problem)
    tol = lambda_zero_tolerance(problem.matrix)
    trial_index = problem.matrix.shape[1] - 1

    tied = np.flatnonzero(lam <= lam[0] + tol)
    pick = tied[np.argmax(np.abs(V[trial_index, tied]))]
    if tied.size > 1 and lam[0] > tol:
        logger.warning(
            "minimal generalized eigenvalue has multiplicity %d; "
            "returning the eigenvector with the largest trial coefficient",
            tied.size,
        )

    lam_min = float(max(lam[pick], 0.0))
    exact = lam_min <= tol
    if exact:
        lam_min = 0.0
    vector = normalize_eigenvector(V[:, pick], problem.weights, trial_index)

    if (
        eps is not None
        and math.sqrt(lam_min) <= eps
        and abs(vector[trial_index]) < TRIAL_COEFF_MIN
    ):
        raise DegenerateEigenvectorError(
            "accepted minimizer has a vanishing trial coefficient; the "
            "minimum is attained by a polynomial supported by the inner terms"
        )

    spectrum = tuple(0.0 if v <= tol else float(v) for v in lam)
    return GevpSolution(
        lambda_min=lam_min, vector=vector, exact=exact, finite_spectrum=spectrum
    )


def solve_appendix_c(M_minus: np.ndarray, d_minus: np.ndarray) -> GevpSolution:
    """Alternate SVD route that skips the mean-centering step.

    Takes the non-constant evaluation columns (trial last) and their
    strictly positive weights, computes the SVD of M_minus D_minus^{-1},
    recovers the constant coefficient from the mean of the residual
    column, and evaluates lambda through
    v0^2 m - 2 v0 1^T M_minus v_hat + sigma_min^2.  Because the smallest
    singular value is taken before the constant is optimized, the result
    can exceed the true minimum on columns whose means are far from zero;
    :func:`solve_min` is the authoritative path.
    """
    M_minus = np.asarray(M_minus, dtype=float)
    d_minus = np.asarray(d_minus, dtype=float)
    if np.any(d_minus <= 0.0):
        raise ValueError("weights must be strictly positive")
    m, k = M_minus.shape
    B = M_minus / d_minus
    _, svals, vt = np.linalg.svd(B, full_matrices=True)
    sigma2 = np.zeros(k)
    sigma2[: svals.size] = svals**2
    order = np.argsort(sigma2)
    sigma_min2 = float(sigma2[order[0]])
    v_hat = vt[order[0]] / d_minus

    residual = M_minus @ v_hat
    v0 = float(np.mean(residual))
    lam = v0 * v0 * m - 2.0 * v0 * float(np.sum(residual)) + sigma_min2
    lam = max(lam, 0.0)

    vector = np.concatenate(([-v0], v_hat))
    if vector[-1] < 0.0:
        vector = -vector

    full = np.column_stack([np.ones(m), M_minus])
    tol = lambda_zero_tolerance(full)
    exact = lam <= tol
    if exact:
        lam = 0.0
    spectrum = tuple(0.0 if v <= tol else float(v) for v in np.sort(sigma2))
    return GevpSolution(lambda_min=lam, vector=vector, exact=exact, finite_spectrum=spectrum)
