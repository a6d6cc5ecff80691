"""Approximate border basis computation on point sets.

``abm`` walks border terms degree by degree in an ascending term order.
Each trial term either yields an approximately vanishing polynomial (when
the minimal constrained evaluation norm is within the tolerance) or joins
the list of inner terms.  With gradient-weighted normalization the
constraint matrix is the diagonal of term semi-norms; with coefficient
normalization it is the identity, recovering the classical algorithm.

``avi_gwn`` is the degree-wise batch variant: all trial terms of a degree
enter one simultaneous eigenproblem, the near-kernel eigenvectors are put
into a threshold-stabilized reduced row echelon form, and pivot columns in
the trial block yield basis polynomials while pivot-free trial columns
become inner terms.

``verify_basis`` and ``prebasis_delta`` check the defining properties of
the output and measure how far a prebasis is from an exact basis.
"""

from __future__ import annotations

import enum
import json
import logging
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import gevp
from .norms import (
    SeminormCache,
    coeff_norm,
    gw_seminorm_poly,
    seminorm_zero_tolerance,
)
from .polyring import (
    PointSet,
    Polynomial,
    Term,
    TermOrdering,
    are_neighbors,
    border,
    eval_matrix,
    eval_poly,
    is_connected_to_1,
    is_order_ideal,
    normal_remainder,
    s_polynomial,
    trial_terms,
)

__all__ = [
    "Normalization",
    "BasisPolynomial",
    "StepRecord",
    "BasisResult",
    "VerificationReport",
    "IncompleteBorderError",
    "abm",
    "avi_gwn",
    "verify_basis",
    "prebasis_delta",
    "result_to_dict",
    "result_from_dict",
    "dump_result",
    "load_result",
]

logger = logging.getLogger(__name__)


class Normalization(enum.Enum):
    """Which unit-norm constraint the minimization uses."""

    GRADIENT_WEIGHTED = "gradient_weighted"
    COEFFICIENT = "coefficient"

    @classmethod
    def parse(cls, value: "Normalization | str") -> "Normalization":
        if isinstance(value, cls):
            return value
        text = str(value).lower()
        aliases = {
            "gw": cls.GRADIENT_WEIGHTED,
            "grad": cls.GRADIENT_WEIGHTED,
            "gradient_weighted": cls.GRADIENT_WEIGHTED,
            "gradient-weighted": cls.GRADIENT_WEIGHTED,
            "coeff": cls.COEFFICIENT,
            "coefficient": cls.COEFFICIENT,
        }
        if text not in aliases:
            raise ValueError(f"unknown normalization {value!r}")
        return aliases[text]


class IncompleteBorderError(ValueError):
    """The prebasis does not cover every border term."""


@dataclass(frozen=True)
class BasisPolynomial:
    """One border polynomial together with its bookkeeping.

    ``extent_of_vanishing`` is the Euclidean norm of the evaluation vector
    on the input points.  ``exact`` marks polynomials whose minimal
    eigenvalue fell below the exact-zero tolerance.  ``normalized`` is
    False only in the corner case of an exactly vanishing polynomial with
    zero semi-norm, which is stored with unit coefficient norm instead.
    """

    poly: Polynomial
    border_term: Term
    extent_of_vanishing: float
    exact: bool
    normalized: bool = True


@dataclass(frozen=True)
class StepRecord:
    """Per-trial diagnostics: what was tested and how it was decided."""

    degree: int
    trial: Term | None
    lambda_min: float
    sqrt_lambda_min: float
    finite_spectrum: tuple[float, ...]
    decision: str


@dataclass(frozen=True)
class BasisResult:
    """Inner terms plus border polynomials produced by one run."""

    nvars: int
    inner_terms: tuple[Term, ...]
    polynomials: tuple[BasisPolynomial, ...]
    eps: float
    normalization: Normalization
    ordering: TermOrdering
    diagnostics: tuple[StepRecord, ...] = field(default=(), repr=False)

    @property
    def border_terms(self) -> tuple[Term, ...]:
        return tuple(g.border_term for g in self.polynomials)

    @property
    def order_ideal(self) -> bool:
        return is_order_ideal(self.inner_terms)


def _weights_for(
    cols: list[Term], normalization: Normalization, cache: SeminormCache
) -> np.ndarray:
    if normalization is Normalization.COEFFICIENT:
        return np.ones(len(cols))
    return np.array([cache.term_seminorm(t) for t in cols])


def _poly_seminorm(
    f: Polynomial, normalization: Normalization, X: PointSet, cache: SeminormCache
) -> float:
    if normalization is Normalization.COEFFICIENT:
        return coeff_norm(f)
    return gw_seminorm_poly(f, X, cache)


def _make_basis_polynomial(
    cols: list[Term],
    solution: gevp.GevpSolution,
    X: PointSet,
    normalization: Normalization,
    cache: SeminormCache,
) -> BasisPolynomial:
    poly = Polynomial(X.nvars, zip(cols, solution.vector))
    extent = float(np.linalg.norm(eval_poly(poly, X)))
    seminorm = _poly_seminorm(poly, normalization, X, cache)
    normalized = True
    if solution.exact and seminorm <= seminorm_zero_tolerance(X, cols[-1].total_degree):
        # Zero semi-norm exact polynomial: store with unit coefficient norm.
        poly = poly * (1.0 / coeff_norm(poly))
        extent = float(np.linalg.norm(eval_poly(poly, X)))
        normalized = False
    return BasisPolynomial(
        poly=poly,
        border_term=cols[-1],
        extent_of_vanishing=extent,
        exact=solution.exact,
        normalized=normalized,
    )


def abm(
    X: PointSet,
    eps: float,
    ordering: TermOrdering | None = None,
    normalization: Normalization | str = Normalization.GRADIENT_WEIGHTED,
    check_invariants: bool = False,
) -> BasisResult:
    """Compute an approximate border basis by trial terms in ascending order.

    Starting from the inner-term list [1], the degree-d border terms are
    tested smallest first.  For each trial b the minimal eigenpair of the
    evaluation/normalization pencil over the current inner terms plus b is
    computed; if sqrt(lambda_min) <= eps the normalized eigenvector becomes
    a border polynomial, otherwise b becomes an inner term.  The loop ends
    at the first degree without border terms.  Termination is guaranteed:
    once the inner terms span all distinct evaluation vectors every further
    eigenvalue is exactly zero.

    ``check_invariants`` re-checks the loop invariants after every
    iteration (connected-to-1, inner terms not eps-vanishing, normalized
    and vanishing border polynomials); intended for tests.
    """
    if eps < 0:
        raise ValueError("eps must be non-negative")
    normalization = Normalization.parse(normalization)
    ordering = ordering or TermOrdering()
    cache = SeminormCache(X)
    nvars = X.nvars

    inner: list[Term] = [Term.one(nvars)]
    polys: list[BasisPolynomial] = []
    records: list[StepRecord] = []

    degree = 1
    trials = trial_terms(inner, degree, ordering)
    while trials:
        for b in trials:
            cols = inner + [b]
            matrix = eval_matrix(cols, X)
            weights = _weights_for(cols, normalization, cache)
            problem = gevp.GevpProblem(matrix, weights, const_index=0)
            try:
                solution = gevp.solve_min(problem, eps=eps)
            except (gevp.DegenerateProblemError, gevp.DegenerateEigenvectorError) as exc:
                raise RuntimeError(
                    f"solver degeneracy at degree {degree}, trial term {b}: {exc}"
                ) from exc

            accepted = solution.sqrt_lambda_min <= eps
            records.append(
                StepRecord(
                    degree=degree,
                    trial=b,
                    lambda_min=solution.lambda_min,
                    sqrt_lambda_min=solution.sqrt_lambda_min,
                    finite_spectrum=solution.finite_spectrum,
                    decision="basis" if accepted else "inner",
                )
            )
            if accepted:
                polys.append(
                    _make_basis_polynomial(cols, solution, X, normalization, cache)
                )
            else:
                inner.append(b)
            if check_invariants:
                _check_loop_invariants(X, eps, inner, polys, normalization, cache)
        degree += 1
        trials = trial_terms(inner, degree, ordering)

    return BasisResult(
        nvars=nvars,
        inner_terms=tuple(inner),
        polynomials=tuple(polys),
        eps=float(eps),
        normalization=normalization,
        ordering=ordering,
        diagnostics=tuple(records),
    )


def _check_loop_invariants(X, eps, inner, polys, normalization, cache) -> None:
    assert is_connected_to_1(inner), "inner terms lost connectivity to 1"
    if len(inner) > 1:
        cols = list(inner)
        matrix = eval_matrix(cols, X)
        weights = _weights_for(cols, normalization, cache)
        lam = gevp.min_generalized_eigenvalue(
            gevp.GevpProblem(matrix, weights, const_index=0)
        )
        # Small slack against round-off: the true inner-only minimum can sit
        # exactly at the last rejection threshold.
        assert lam > eps * eps * (1 - 1e-9) - 1e-12, (
            "a normalized polynomial supported by the inner terms is eps-vanishing"
        )
    seen = set()
    for g in polys:
        assert g.border_term not in seen, "duplicate border term"
        seen.add(g.border_term)
        assert g.poly.coefficient(g.border_term) > 0, "border coefficient not positive"
        if g.normalized:
            s = _poly_seminorm(g.poly, normalization, X, cache)
            assert abs(s - 1.0) <= 1e-8, f"stored polynomial has norm {s}"
            assert g.extent_of_vanishing <= eps + 1e-12 or g.exact


# ---------------------------------------------------------------------------
# Degree-wise batch variant


def _rref_threshold(rows: np.ndarray, tau: float) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form where pivot candidates below tau count as zero.

    Pivot rows are chosen by largest absolute value in the column; pivots
    are scaled to one and eliminated above and below.  Returns the surviving
    rows and the pivot column indices.
    """
    A = np.array(rows, dtype=float)
    nrows, ncols = A.shape
    row = 0
    pivots: list[int] = []
    for col in range(ncols):
        if row == nrows:
            break
        sub = np.abs(A[row:, col])
        best = int(np.argmax(sub)) + row
        if abs(A[best, col]) < tau:
            continue
        A[[row, best]] = A[[best, row]]
        A[row] /= A[row, col]
        for r in range(nrows):
            if r != row and A[r, col] != 0.0:
                A[r] -= A[r, col] * A[row]
        pivots.append(col)
        row += 1
    return A[:row], pivots


def avi_gwn(
    X: PointSet,
    eps: float,
    tau: float,
    ordering: TermOrdering | None = None,
) -> BasisResult:
    """Degree-wise batch computation with gradient-weighted normalization.

    At each degree all trial terms are tested at once: the eigenvectors of
    the evaluation/semi-norm pencil with eigenvalue at most eps^2 are
    collected, their transpose is brought into tau-thresholded reduced row
    echelon form, and the rows are renormalized to unit semi-norm.  Pivot
    columns inside the trial block yield border polynomials; pivot-free
    trial columns extend the inner terms in reverse order.  Unlike ``abm``
    the output polynomials need not be eps-vanishing individually.
    """
    if not (eps > tau > 0):
        raise ValueError("requires eps > tau > 0")
    if float(np.max(np.abs(X.points))) > 1.0 + 1e-12:
        warnings.warn(
            "points outside [-1, 1]^n; consider rescaling before this algorithm",
            stacklevel=2,
        )
    ordering = ordering or TermOrdering()
    cache = SeminormCache(X)
    nvars = X.nvars

    inner: list[Term] = [Term.one(nvars)]
    polys: list[BasisPolynomial] = []
    records: list[StepRecord] = []

    degree = 0
    while True:
        degree += 1
        trials = list(reversed(trial_terms(inner, degree, ordering)))
        if not trials:
            break
        cols = trials + list(inner)
        n_trial = len(trials)
        matrix = eval_matrix(cols, X)
        weights = _weights_for(cols, Normalization.GRADIENT_WEIGHTED, cache)
        const_index = cols.index(Term.one(nvars))
        problem = gevp.GevpProblem(matrix, weights, const_index=const_index)
        lam, vecs = gevp.solve_all_finite(problem)
        tol = gevp.lambda_zero_tolerance(matrix)
        lam = np.where(lam <= tol, 0.0, lam)
        keep = lam <= eps * eps

        new_polys: list[BasisPolynomial] = []
        if np.any(keep):
            C, pivots = _rref_threshold(vecs[:, keep].T, tau)
            trial_pivots = [p for p in pivots if p < n_trial]
            for p in trial_pivots:
                i = pivots.index(p)
                coeffs = C[i]
                poly = Polynomial(nvars, zip(cols, coeffs))
                seminorm = gw_seminorm_poly(poly, X, cache)
                if seminorm > 0.0:
                    poly = poly * (1.0 / seminorm)
                extent = float(np.linalg.norm(eval_poly(poly, X)))
                new_polys.append(
                    BasisPolynomial(
                        poly=poly,
                        border_term=cols[p],
                        extent_of_vanishing=extent,
                        exact=extent * extent <= tol,
                        normalized=seminorm > 0.0,
                    )
                )
            pivot_set = set(trial_pivots)
        else:
            pivot_set = set()

        for j in range(n_trial - 1, -1, -1):
            if j not in pivot_set:
                inner.insert(0, cols[j])
        polys.extend(new_polys)
        records.append(
            StepRecord(
                degree=degree,
                trial=None,
                lambda_min=float(lam.min()),
                sqrt_lambda_min=math.sqrt(max(float(lam.min()), 0.0)),
                finite_spectrum=tuple(float(v) for v in lam),
                decision=f"{len(new_polys)} basis, {n_trial - len(new_polys)} inner",
            )
        )

    return BasisResult(
        nvars=nvars,
        inner_terms=tuple(inner),
        polynomials=tuple(polys),
        eps=float(eps),
        normalization=Normalization.GRADIENT_WEIGHTED,
        ordering=ordering,
        diagnostics=tuple(records),
    )


# ---------------------------------------------------------------------------
# Verification and prebasis diagnostics


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of the defining-property checks for a basis result.

    ``order_ideal`` is informational: the ascending-trial algorithm can
    legitimately return inner terms that are connected to 1 without being
    an order ideal.  ``passed`` covers every other check.
    """

    connected_to_1: bool
    order_ideal: bool
    members_ok: bool
    inner_non_vanishing: bool
    border_correspondence: bool
    violations: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return self.connected_to_1 and self.members_ok and self.inner_non_vanishing and self.border_correspondence


def verify_basis(X: PointSet, eps: float, result: BasisResult) -> VerificationReport:
    """Check the defining properties of a computed basis.

    (a) inner terms connected to 1; (b) order-ideal flag (informational);
    (c) normalized members have unit norm and extent within eps, exact
    members evaluate to numerical zero; (d) no normalized polynomial
    supported by the inner terms alone is eps-vanishing, certified through
    the minimal eigenvalue of the inner-term problem; (e) border terms of
    the polynomials are exactly the border of the inner terms.
    """
    cache = SeminormCache(X)
    violations: list[str] = []

    connected = is_connected_to_1(result.inner_terms)
    if not connected:
        violations.append("inner terms are not connected to 1")
    ideal = is_order_ideal(result.inner_terms)

    members_ok = True
    for g in result.polynomials:
        extent = float(np.linalg.norm(eval_poly(g.poly, X)))
        matrix = eval_matrix(list(result.inner_terms) + [g.border_term], X)
        exact_tol = math.sqrt(gevp.lambda_zero_tolerance(matrix))
        if g.normalized:
            s = _poly_seminorm(g.poly, result.normalization, X, cache)
            if abs(s - 1.0) > 1e-8:
                members_ok = False
                violations.append(f"{g.border_term}: stored norm {s:.3e} != 1")
            if extent > eps and extent > exact_tol:
                members_ok = False
                violations.append(
                    f"{g.border_term}: extent of vanishing {extent:.6e} exceeds eps {eps:.6e}"
                )
        if g.exact and extent > exact_tol:
            members_ok = False
            violations.append(
                f"{g.border_term}: marked exact but evaluates to {extent:.3e}"
            )

    inner_ok = True
    if len(result.inner_terms) > 1:
        cols = list(result.inner_terms)
        matrix = eval_matrix(cols, X)
        weights = _weights_for(cols, result.normalization, cache)
        lam = gevp.min_generalized_eigenvalue(
            gevp.GevpProblem(matrix, weights, const_index=cols.index(Term.one(X.nvars)))
        )
        if lam <= eps * eps:
            inner_ok = False
            violations.append(
                f"a normalized polynomial supported by the inner terms has "
                f"evaluation norm {math.sqrt(max(lam, 0.0)):.6e} <= eps"
            )

    expected = set(border(result.inner_terms, result.ordering))
    got = list(result.border_terms)
    correspondence = len(got) == len(set(got)) and set(got) == expected
    if not correspondence:
        missing = expected - set(got)
        extra = set(got) - expected
        if missing:
            violations.append(f"border terms without polynomials: {sorted(missing, key=str)}")
        if extra:
            violations.append(f"polynomials with non-border terms: {sorted(extra, key=str)}")
        if len(got) != len(set(got)):
            violations.append("duplicate border terms among polynomials")

    return VerificationReport(
        connected_to_1=connected,
        order_ideal=ideal,
        members_ok=members_ok,
        inner_non_vanishing=inner_ok,
        border_correspondence=correspondence,
        violations=tuple(violations),
    )


def prebasis_delta(result: BasisResult, X: PointSet | None = None) -> float:
    """Largest coefficient norm among normal remainders of S-polynomials.

    Each polynomial is rescaled to unit border coefficient, S-polynomials
    of all neighboring border-term pairs are reduced against the prebasis,
    and the maximum remainder coefficient norm is returned (0.0 when there
    are no neighboring pairs).  This measures how much the prebasis fails
    to be an exact basis; the point set does not enter.
    """
    if not is_order_ideal(result.inner_terms):
        raise ValueError("prebasis delta requires the inner terms to be an order ideal")
    expected = set(border(result.inner_terms, result.ordering))
    table: dict[Term, Polynomial] = {}
    for g in result.polynomials:
        table[g.border_term] = g.poly * (1.0 / g.poly.coefficient(g.border_term))
    if set(table) != expected:
        raise IncompleteBorderError(
            f"prebasis covers {len(table)} of {len(expected)} border terms"
        )

    terms = sorted(table, key=result.ordering.sort_key)
    delta = 0.0
    for i in range(len(terms)):
        for j in range(i + 1, len(terms)):
            bi, bj = terms[i], terms[j]
            if not are_neighbors(bi, bj):
                continue
            spoly = s_polynomial(table[bi], table[bj], bi, bj)
            remainder = normal_remainder(spoly, result.inner_terms, table)
            delta = max(delta, coeff_norm(remainder))
    return delta


# ---------------------------------------------------------------------------
# Serialization


def result_to_dict(result: BasisResult) -> dict:
    """JSON-ready dictionary with full-precision coefficients."""
    return {
        "nvars": result.nvars,
        "eps": result.eps,
        "normalization": result.normalization.value,
        "ordering": {
            "kind": result.ordering.kind,
            "precedence": list(result.ordering.precedence)
            if result.ordering.precedence is not None
            else None,
        },
        "inner_terms": [list(t.exponents) for t in result.inner_terms],
        "order_ideal": result.order_ideal,
        "polynomials": [
            {
                "border_term": list(g.border_term.exponents),
                "coefficients": [
                    {"term": list(t.exponents), "value": c} for t, c in g.poly.items()
                ],
                "extent_of_vanishing": g.extent_of_vanishing,
                "exact": g.exact,
                "normalized": g.normalized,
            }
            for g in result.polynomials
        ],
        "diagnostics": [
            {
                "degree": r.degree,
                "trial": list(r.trial.exponents) if r.trial is not None else None,
                "lambda_min": r.lambda_min,
                "sqrt_lambda_min": r.sqrt_lambda_min,
                "finite_spectrum": list(r.finite_spectrum),
                "decision": r.decision,
            }
            for r in result.diagnostics
        ],
    }


def result_from_dict(data: dict) -> BasisResult:
    nvars = int(data["nvars"])
    ordering = TermOrdering(
        kind=data["ordering"]["kind"],
        precedence=tuple(data["ordering"]["precedence"])
        if data["ordering"]["precedence"] is not None
        else None,
    )
    polys = []
    for entry in data["polynomials"]:
        poly = Polynomial(
            nvars,
            {Term(tuple(e["term"])): e["value"] for e in entry["coefficients"]},
        )
        polys.append(
            BasisPolynomial(
                poly=poly,
                border_term=Term(tuple(entry["border_term"])),
                extent_of_vanishing=float(entry["extent_of_vanishing"]),
                exact=bool(entry["exact"]),
                normalized=bool(entry["normalized"]),
            )
        )
    records = tuple(
        StepRecord(
            degree=int(r["degree"]),
            trial=Term(tuple(r["trial"])) if r["trial"] is not None else None,
            lambda_min=float(r["lambda_min"]),
            sqrt_lambda_min=float(r["sqrt_lambda_min"]),
            finite_spectrum=tuple(float(v) for v in r["finite_spectrum"]),
            decision=str(r["decision"]),
        )
        for r in data.get("diagnostics", [])
    )
    return BasisResult(
        nvars=nvars,
        inner_terms=tuple(Term(tuple(e)) for e in data["inner_terms"]),
        polynomials=tuple(polys),
        eps=float(data["eps"]),
        normalization=Normalization.parse(data["normalization"]),
        ordering=ordering,
        diagnostics=records,
    )


def dump_result(result: BasisResult, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(result_to_dict(result), fh, indent=2)


def load_result(path) -> BasisResult:
    with open(path, "r", encoding="utf-8") as fh:
        return result_from_dict(json.load(fh))
