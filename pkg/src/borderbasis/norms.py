"""Coefficient norm and the data-driven gradient-weighted semi-norm.

The gradient-weighted semi-norm of a term is the Euclidean norm of its
gradient evaluated at the point set, divided by the Euclidean degree of
the term; the constant term gets semi-norm zero.  A polynomial's
semi-norm is the coefficient norm weighted by the term semi-norms.
Because the weights evaluate gradients at the data, the semi-norm scales
with the point set instead of being a fixed property of the coefficients.
"""

from __future__ import annotations

import math
from typing import Union

import numpy as np

from .polyring import (
    DimensionMismatchError,
    PointSet,
    Polynomial,
    Term,
    grad_eval,
)

__all__ = [
    "ZeroSeminormError",
    "euclidean_degree",
    "coeff_norm",
    "gw_seminorm_term",
    "SeminormCache",
    "gw_seminorm_poly",
    "gw_normalize",
    "seminorm_zero_tolerance",
]


class ZeroSeminormError(ValueError):
    """Normalization was requested for a polynomial with zero semi-norm.

    By the zero-semi-norm characterization this means the constant-free
    part of the polynomial vanishes exactly on the point set.
    """


def euclidean_degree(t: Term) -> float:
    """sqrt of the sum of squared partial degrees; 0.0 for the constant term.

    Callers dividing by this value must branch on the constant term first.
    """
    return math.sqrt(sum(e * e for e in t.exponents))


def coeff_norm(f: Polynomial) -> float:
    """Euclidean norm of the coefficient vector."""
    return math.sqrt(sum(c * c for _, c in f.items()))


def gw_seminorm_term(t: Term, X: PointSet) -> float:
    """Gradient-weighted semi-norm of a term: ||grad t(X)|| / D(t), 0 for t = 1."""
    if t.nvars != X.nvars:
        raise DimensionMismatchError(f"{t.nvars}-variable term on points in R^{X.nvars}")
    if t.is_one:
        return 0.0
    return float(np.linalg.norm(grad_eval(t, X))) / euclidean_degree(t)


class SeminormCache:
    """Memoized term semi-norms for one fixed point set.

    Values are pure functions of the exponent vector, so the memo never
    needs invalidation; build a fresh cache for a different point set.
    Concurrent reads are safe; population races at worst recompute the
    same value.
    """

    __slots__ = ("X", "_memo")

    def __init__(self, X: PointSet):
        self.X = X
        self._memo: dict[tuple[int, ...], float] = {}

    def term_seminorm(self, t: Term) -> float:
        key = t.exponents
        value = self._memo.get(key)
        if value is None:
            value = gw_seminorm_term(t, self.X)
            self._memo[key] = value
        return value

    def __call__(self, t: Term) -> float:
        return self.term_seminorm(t)


def gw_seminorm_poly(
    f: Polynomial, X: PointSet, cache: SeminormCache | None = None
) -> float:
    """Gradient-weighted semi-norm of a polynomial.

    Zero iff every supported term has zero semi-norm; in particular any
    constant polynomial has semi-norm zero.
    """
    if f.nvars != X.nvars:
        raise DimensionMismatchError(f"{f.nvars}-variable polynomial on points in R^{X.nvars}")
    lookup = cache.term_seminorm if cache is not None else (lambda t: gw_seminorm_term(t, X))
    total = 0.0
    for term, coeff in f.items():
        w = lookup(term)
        total += coeff * coeff * w * w
    return math.sqrt(total)


def seminorm_zero_tolerance(X: PointSet, degree: int) -> float:
    """Scale-aware threshold below which a semi-norm value counts as zero."""
    spread = max(1.0, float(np.max(np.abs(X.points))))
    return 1e-12 * math.sqrt(X.npoints) * spread ** max(degree - 1, 0)


def gw_normalize(
    f: Polynomial, X: PointSet, cache: SeminormCache | None = None
) -> Polynomial:
    """Scale f to gradient-weighted semi-norm one.

    Raises :class:`ZeroSeminormError` when the semi-norm is (numerically)
    zero, which signals an exactly vanishing constant-free part.
    """
    value = gw_seminorm_poly(f, X, cache)
    try:
        deg = f.degree
    except Exception:
        deg = 0
    if value <= seminorm_zero_tolerance(X, deg):
        raise ZeroSeminormError(
            "polynomial has zero gradient-weighted semi-norm and cannot be normalized"
        )
    return f * (1.0 / value)
