"""Sparse multivariate polynomial arithmetic over finite point sets.

Terms are exponent vectors, polynomials are sparse term-to-coefficient
maps, and point sets are fixed lists of sample points in R^n.  The module
also provides degree-compatible term orderings (degrevlex, deglex), the
order-ideal / border combinatorics used by border basis algorithms, and
S-polynomial / normal-remainder reduction for prebasis diagnostics.

All types are immutable after construction; operations are pure functions
and safe to use from multiple threads.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union

import numpy as np

__all__ = [
    "Term",
    "TermOrdering",
    "Polynomial",
    "PointSet",
    "DimensionMismatchError",
    "ZeroPolynomialError",
    "MissingBorderPolynomialError",
    "eval_poly",
    "eval_matrix",
    "grad_eval",
    "compare",
    "border",
    "is_order_ideal",
    "is_connected_to_1",
    "trial_terms",
    "are_neighbors",
    "term_lcm",
    "s_polynomial",
    "normal_remainder",
    "format_polynomial",
    "default_variable_names",
]

# Coefficients below this fraction of the largest coefficient magnitude are
# dropped after arithmetic so supports stay sparse.
COEFF_DROP_REL = 1e-14


class DimensionMismatchError(ValueError):
    """Operands refer to different numbers of indeterminates."""


class ZeroPolynomialError(ValueError):
    """The degree of the zero polynomial was requested."""


class MissingBorderPolynomialError(KeyError):
    """Reduction needs a border polynomial that the prebasis lacks."""


@dataclass(frozen=True)
class Term:
    """A product of indeterminates, stored as its exponent vector."""

    exponents: tuple[int, ...]

    def __post_init__(self) -> None:
        exps = tuple(int(e) for e in self.exponents)
        if any(e < 0 for e in exps):
            raise ValueError(f"negative exponent in {exps}")
        object.__setattr__(self, "exponents", exps)

    @classmethod
    def one(cls, nvars: int) -> "Term":
        return cls((0,) * nvars)

    @classmethod
    def variable(cls, index: int, nvars: int) -> "Term":
        if not 0 <= index < nvars:
            raise ValueError(f"variable index {index} out of range for {nvars} variables")
        return cls(tuple(1 if k == index else 0 for k in range(nvars)))

    @property
    def nvars(self) -> int:
        return len(self.exponents)

    @property
    def total_degree(self) -> int:
        return sum(self.exponents)

    def partial_degree(self, k: int) -> int:
        return self.exponents[k]

    @property
    def is_one(self) -> bool:
        return all(e == 0 for e in self.exponents)

    def __mul__(self, other: "Term") -> "Term":
        _check_same_nvars(self, other)
        return Term(tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def divides(self, other: "Term") -> bool:
        _check_same_nvars(self, other)
        return all(a <= b for a, b in zip(self.exponents, other.exponents))

    def __floordiv__(self, other: "Term") -> "Term":
        if not other.divides(self):
            raise ValueError(f"{other} does not divide {self}")
        return Term(tuple(a - b for a, b in zip(self.exponents, other.exponents)))

    def __repr__(self) -> str:
        return f"Term{self.exponents}"


def term_lcm(s: Term, t: Term) -> Term:
    _check_same_nvars(s, t)
    return Term(tuple(max(a, b) for a, b in zip(s.exponents, t.exponents)))


def _check_same_nvars(a, b) -> None:
    if a.nvars != b.nvars:
        raise DimensionMismatchError(f"{a.nvars} variables vs {b.nvars}")


@dataclass(frozen=True)
class TermOrdering:
    """A degree-compatible total order on terms.

    ``precedence`` lists variable indices from greatest to least; the
    default is declaration order, so with two variables named (x, y) the
    order satisfies y < x.
    """

    kind: str = "degrevlex"
    precedence: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("degrevlex", "deglex"):
            raise ValueError(f"unknown ordering kind {self.kind!r}")
        if self.precedence is not None:
            prec = tuple(int(i) for i in self.precedence)
            if sorted(prec) != list(range(len(prec))):
                raise ValueError(f"precedence {prec} is not a permutation")
            object.__setattr__(self, "precedence", prec)

    def _permuted(self, t: Term) -> tuple[int, ...]:
        if self.precedence is None:
            return t.exponents
        if len(self.precedence) != t.nvars:
            raise DimensionMismatchError(
                f"ordering over {len(self.precedence)} variables vs term with {t.nvars}"
            )
        return tuple(t.exponents[i] for i in self.precedence)

    def sort_key(self, t: Term):
        """Key such that sorting ascending lists terms smallest first."""
        exps = self._permuted(t)
        if self.kind == "degrevlex":
            return (t.total_degree, tuple(-e for e in reversed(exps)))
        return (t.total_degree, exps)

    def compare(self, s: Term, t: Term) -> int:
        """Return -1, 0 or 1 as s is smaller than, equal to or greater than t."""
        _check_same_nvars(s, t)
        ks, kt = self.sort_key(s), self.sort_key(t)
        return (ks > kt) - (ks < kt)

    def sorted(self, terms: Iterable[Term], reverse: bool = False) -> list[Term]:
        return sorted(terms, key=self.sort_key, reverse=reverse)


def compare(s: Term, t: Term, ordering: TermOrdering) -> int:
    """Module-level alias of :meth:`TermOrdering.compare`."""
    return ordering.compare(s, t)


CoeffsLike = Union[Mapping[Term, float], Iterable[tuple[Term, float]]]


class Polynomial:
    """An immutable sparse polynomial with real coefficients.

    Near-zero coefficients (relative magnitude below ``COEFF_DROP_REL``)
    are dropped at construction, so the stored support never contains
    numerical zeros.
    """

    __slots__ = ("_nvars", "_coeffs")

    def __init__(self, nvars: int, coeffs: CoeffsLike = ()):
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        merged: dict[Term, float] = {}
        for term, value in items:
            if term.nvars != nvars:
                raise DimensionMismatchError(
                    f"term over {term.nvars} variables in polynomial over {nvars}"
                )
            merged[term] = merged.get(term, 0.0) + float(value)
        if merged:
            cutoff = COEFF_DROP_REL * max(abs(c) for c in merged.values())
            merged = {t: c for t, c in merged.items() if abs(c) > cutoff}
        object.__setattr__(self, "_nvars", int(nvars))
        object.__setattr__(self, "_coeffs", merged)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("Polynomial is immutable")

    @classmethod
    def zero(cls, nvars: int) -> "Polynomial":
        return cls(nvars)

    @classmethod
    def constant(cls, nvars: int, value: float) -> "Polynomial":
        return cls(nvars, {Term.one(nvars): value})

    @classmethod
    def from_term(cls, term: Term, coeff: float = 1.0) -> "Polynomial":
        return cls(term.nvars, {term: coeff})

    @property
    def nvars(self) -> int:
        return self._nvars

    @property
    def is_zero(self) -> bool:
        return not self._coeffs

    @property
    def support(self) -> tuple[Term, ...]:
        return tuple(self._coeffs.keys())

    @property
    def degree(self) -> int:
        if not self._coeffs:
            raise ZeroPolynomialError("the zero polynomial has no degree")
        return max(t.total_degree for t in self._coeffs)

    def coefficient(self, term: Term) -> float:
        return self._coeffs.get(term, 0.0)

    def items(self) -> Iterator[tuple[Term, float]]:
        return iter(self._coeffs.items())

    def __add__(self, other: "Polynomial") -> "Polynomial":
        _check_same_nvars(self, other)
        out = dict(self._coeffs)
        for term, value in other._coeffs.items():
            out[term] = out.get(term, 0.0) + value
        return Polynomial(self._nvars, out)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self._nvars, {t: -c for t, c in self._coeffs.items()})

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            _check_same_nvars(self, other)
            out: dict[Term, float] = {}
            for s, a in self._coeffs.items():
                for t, b in other._coeffs.items():
                    st = s * t
                    out[st] = out.get(st, 0.0) + a * b
            return Polynomial(self._nvars, out)
        if isinstance(other, Term):
            return Polynomial(self._nvars, {t * other: c for t, c in self._coeffs.items()})
        return Polynomial(self._nvars, {t: c * float(other) for t, c in self._coeffs.items()})

    def __rmul__(self, other) -> "Polynomial":
        return self.__mul__(other)

    def __truediv__(self, scalar: float) -> "Polynomial":
        return self * (1.0 / float(scalar))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Polynomial)
            and self._nvars == other._nvars
            and self._coeffs == other._coeffs
        )

    def __hash__(self) -> int:
        return hash((self._nvars, frozenset(self._coeffs.items())))

    def __repr__(self) -> str:
        return f"Polynomial({self._nvars}, {self._coeffs!r})"


class PointSet:
    """An ordered list of m points in R^n, immutable once constructed.

    Exact duplicate points are permitted but trigger a warning: duplicated
    evaluation rows make evaluation columns dependent, which downstream
    algorithms handle through exactly-vanishing eigenpairs.
    """

    __slots__ = ("_points",)

    def __init__(self, points):
        arr = np.array(points, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"expected an m-by-n array of points, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("points must be finite")
        if arr.shape[0] > 1 and len(np.unique(arr, axis=0)) < arr.shape[0]:
            warnings.warn("point set contains duplicate points", stacklevel=2)
        arr.flags.writeable = False
        object.__setattr__(self, "_points", arr)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("PointSet is immutable")

    @property
    def points(self) -> np.ndarray:
        return self._points

    @property
    def npoints(self) -> int:
        return self._points.shape[0]

    @property
    def nvars(self) -> int:
        return self._points.shape[1]

    def scaled(self, alpha: float) -> "PointSet":
        return PointSet(self._points * float(alpha))

    def __repr__(self) -> str:
        return f"PointSet({self.npoints} points in R^{self.nvars})"


# ---------------------------------------------------------------------------
# Evaluation


def _check_point_dims(obj, X: PointSet) -> None:
    if obj.nvars != X.nvars:
        raise DimensionMismatchError(
            f"{obj.nvars}-variable object evaluated on points in R^{X.nvars}"
        )


def _term_column(t: Term, X: PointSet) -> np.ndarray:
    exps = np.asarray(t.exponents)
    active = exps > 0
    if not active.any():
        return np.ones(X.npoints)
    return np.prod(X.points[:, active] ** exps[active], axis=1)


def eval_poly(f: Union[Polynomial, Term], X: PointSet) -> np.ndarray:
    """Evaluation vector (f(p_1), ..., f(p_m)); linear in f."""
    if isinstance(f, Term):
        _check_point_dims(f, X)
        return _term_column(f, X)
    _check_point_dims(f, X)
    out = np.zeros(X.npoints)
    for term, coeff in f.items():
        out += coeff * _term_column(term, X)
    return out


def eval_matrix(terms: Sequence[Term], X: PointSet) -> np.ndarray:
    """m-by-len(terms) matrix whose i-th column is the evaluation of terms[i]."""
    if not terms:
        return np.zeros((X.npoints, 0))
    for t in terms:
        _check_point_dims(t, X)
    return np.column_stack([_term_column(t, X) for t in terms])


def _term_grad_columns(t: Term, X: PointSet) -> np.ndarray:
    # m-by-n matrix of partial derivatives of the term at every point.
    out = np.zeros((X.npoints, X.nvars))
    for k, e in enumerate(t.exponents):
        if e == 0:
            continue
        lowered = Term(tuple(x - 1 if i == k else x for i, x in enumerate(t.exponents)))
        out[:, k] = e * _term_column(lowered, X)
    return out


def grad_eval(f: Union[Polynomial, Term], X: PointSet) -> np.ndarray:
    """Stacked gradient evaluation (grad f(p_1), ..., grad f(p_m)), length m*n.

    Partial derivatives are computed exactly from the exponent vectors.
    """
    _check_point_dims(f, X)
    if isinstance(f, Term):
        return _term_grad_columns(f, X).reshape(-1)
    out = np.zeros((X.npoints, X.nvars))
    for term, coeff in f.items():
        out += coeff * _term_grad_columns(term, X)
    return out.reshape(-1)


# ---------------------------------------------------------------------------
# Order ideal and border combinatorics


def border(terms: Sequence[Term], ordering: TermOrdering | None = None) -> list[Term]:
    """Border of a term set: indeterminate multiples not already members.

    The result is sorted ascending by ``ordering`` (default degrevlex).
    """
    if not terms:
        return []
    nvars = terms[0].nvars
    ordering = ordering or TermOrdering()
    members = set(terms)
    out = set()
    for t in terms:
        for k in range(nvars):
            prod = t * Term.variable(k, nvars)
            if prod not in members:
                out.add(prod)
    return ordering.sorted(out)


def is_order_ideal(terms: Sequence[Term]) -> bool:
    """True iff the set is closed under divisors.

    Divisor closure is equivalent to closure under dividing out a single
    indeterminate, which keeps the check linear in the set size.
    """
    members = set(terms)
    if not members:
        return True
    for t in members:
        for k, e in enumerate(t.exponents):
            if e == 0:
                continue
            parent = Term(tuple(x - 1 if i == k else x for i, x in enumerate(t.exponents)))
            if parent not in members:
                return False
    return True


def is_connected_to_1(terms: Sequence[Term]) -> bool:
    """True iff 1 is a member and every other member is an indeterminate
    multiple of some member."""
    members = set(terms)
    if not members:
        return False
    nvars = next(iter(members)).nvars
    if Term.one(nvars) not in members:
        return False
    for t in members:
        if t.is_one:
            continue
        found = False
        for k, e in enumerate(t.exponents):
            if e == 0:
                continue
            parent = Term(tuple(x - 1 if i == k else x for i, x in enumerate(t.exponents)))
            if parent in members:
                found = True
                break
        if not found:
            return False
    return True


def trial_terms(terms: Sequence[Term], degree: int, ordering: TermOrdering | None = None) -> list[Term]:
    """Degree-d border terms of the set, ascending in the ordering."""
    if degree < 1:
        raise ValueError("trial terms start at degree 1")
    return [b for b in border(terms, ordering) if b.total_degree == degree]


def are_neighbors(bi: Term, bj: Term) -> bool:
    """Next-door (one is an indeterminate multiple of the other) or
    across-the-street (both have a common indeterminate multiple) pairs."""
    _check_same_nvars(bi, bj)
    if bi == bj:
        return False
    diff = [a - b for a, b in zip(bi.exponents, bj.exponents)]
    pos = sum(1 for d in diff if d > 0)
    neg = sum(1 for d in diff if d < 0)
    total = sum(diff)
    # Next-door: difference is a single +-1 in one coordinate.
    if (pos, neg) in ((1, 0), (0, 1)) and total in (1, -1) and max(abs(d) for d in diff) == 1:
        return True
    # Across-the-street: x_k * bi == x_l * bj for some k != l.
    if pos == 1 and neg == 1 and max(abs(d) for d in diff) == 1:
        return True
    return False


# ---------------------------------------------------------------------------
# S-polynomials and normal remainders


def s_polynomial(gi: Polynomial, gj: Polynomial, bi: Term, bj: Term) -> Polynomial:
    """S-polynomial of two neighboring prebasis elements.

    S(g_i, g_j) = (lcm/(c_i b_i)) g_i - (lcm/(c_j b_j)) g_j, where c_i, c_j
    are the (positive) coefficients of the border terms; the border-term
    multiples cancel by construction.
    """
    if not are_neighbors(bi, bj):
        raise ValueError(f"{bi} and {bj} are not neighboring border terms")
    ci = gi.coefficient(bi)
    cj = gj.coefficient(bj)
    if ci == 0.0 or cj == 0.0:
        raise ValueError("border coefficient is zero")
    lcm = term_lcm(bi, bj)
    left = (gi * (lcm // bi)) * (1.0 / ci)
    right = (gj * (lcm // bj)) * (1.0 / cj)
    return left - right


def normal_remainder(
    f: Polynomial,
    inner_terms: Sequence[Term],
    prebasis: Union[Mapping[Term, Polynomial], Iterable[tuple[Term, Polynomial]]],
) -> Polynomial:
    """Eliminate every border term of f against the prebasis.

    Subtracts the scalar multiple of the border polynomial g_b that cancels
    each border term; the result is supported by the inner terms.  Raises
    :class:`MissingBorderPolynomialError` when f contains a term that is
    neither inner nor covered by the prebasis.
    """
    table = dict(prebasis.items() if isinstance(prebasis, Mapping) else prebasis)
    inner = set(inner_terms)
    result = f
    for term in list(result.support):
        if term in inner:
            continue
        coeff = result.coefficient(term)
        if coeff == 0.0:
            continue
        if term not in table:
            raise MissingBorderPolynomialError(term)
        g = table[term]
        result = result - g * (coeff / g.coefficient(term))
    return result


# ---------------------------------------------------------------------------
# Text rendering


def default_variable_names(nvars: int) -> tuple[str, ...]:
    if nvars <= 3:
        return ("x", "y", "z")[:nvars]
    return tuple(f"x{i + 1}" for i in range(nvars))


def _format_term(t: Term, names: Sequence[str]) -> str:
    parts = []
    for name, e in zip(names, t.exponents):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_polynomial(
    f: Polynomial,
    ordering: TermOrdering | None = None,
    names: Sequence[str] | None = None,
    digits: int = 4,
) -> str:
    """Render terms in descending order with fixed significant digits."""
    if f.is_zero:
        return "0"
    ordering = ordering or TermOrdering()
    names = names or default_variable_names(f.nvars)
    pieces = []
    for term in ordering.sorted(f.support, reverse=True):
        coeff = f.coefficient(term)
        mag = f"{abs(coeff):.{digits}g}"
        body = _format_term(term, names)
        chunk = mag if not body else (f"{mag}*{body}" if mag != "1" else body)
        if not pieces:
            pieces.append(chunk if coeff >= 0 else f"-{chunk}")
        else:
            pieces.append(f"+ {chunk}" if coeff >= 0 else f"- {chunk}")
    return " ".join(pieces)
