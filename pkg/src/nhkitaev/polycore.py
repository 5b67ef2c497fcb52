"""Complex scalar helpers and polynomial root machinery.

Polynomials are stored with coefficients in ascending degree, ``c[0] + c[1] x + ...``.
Roots come from companion-matrix eigenvalues followed by Newton polishing
against the original coefficients.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DegeneratePolynomialError, PreconditionError

TRIM_RTOL = 1e-14
POLISH_RTOL = 1e-12
_MAX_POLISH = 30


def as_complex(z) -> complex:
    """Convert ``z`` to a finite Python complex, rejecting NaN and Inf."""
    w = complex(z)
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise PreconditionError(f"non-finite complex value {w!r}")
    return w


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Complex polynomial with ascending coefficients.

    Trailing coefficients below ``TRIM_RTOL * max|c|`` are dropped on
    construction, so ``degree`` reflects the numerically meaningful degree.
    The zero polynomial is stored as a single zero coefficient.
    """

    coeffs: np.ndarray

    def __init__(self, coeffs, trim: bool = True):
        c = np.atleast_1d(np.asarray(coeffs, dtype=complex)).copy()
        if c.ndim != 1 or c.size == 0:
            raise PreconditionError("coefficients must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(c)):
            raise PreconditionError("coefficients must be finite")
        if trim:
            c = _trim(c)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def is_zero(self, atol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.coeffs) <= atol))

    def __call__(self, x):
        # Horner, works for scalars and arrays
        x = np.asarray(x, dtype=complex)
        acc = np.zeros_like(x)
        for c in self.coeffs[::-1]:
            acc = acc * x + c
        return acc if acc.ndim else complex(acc)

    def derivative(self) -> "Polynomial":
        if self.degree == 0:
            return Polynomial([0.0])
        k = np.arange(1, self.coeffs.size)
        return Polynomial(self.coeffs[1:] * k, trim=False)

    def reciprocal(self, n: int | None = None) -> "Polynomial":
        """Conjugate reciprocal ``x**n * conj(p(1/conj(x)))``, with ``n`` defaulting to the degree."""
        n = self.degree if n is None else n
        if n < self.degree:
            raise PreconditionError("reciprocal order below polynomial degree")
        c = np.zeros(n + 1, dtype=complex)
        c[: self.coeffs.size] = self.coeffs
        return Polynomial(np.conj(c[::-1]), trim=False)

    def scaled(self, factor) -> "Polynomial":
        return Polynomial(self.coeffs * complex(factor), trim=False)

    def __repr__(self):
        return f"Polynomial({np.array2string(self.coeffs, precision=6)})"


def _trim(c: np.ndarray) -> np.ndarray:
    top = np.max(np.abs(c))
    if top == 0.0:
        return np.zeros(1, dtype=complex)
    k = c.size - 1
    while k > 0 and abs(c[k]) < TRIM_RTOL * top:
        k -= 1
    return c[: k + 1]


def polish_bound(p: Polynomial, x: complex) -> float:
    return POLISH_RTOL * p.scale * max(1.0, abs(x)) ** p.degree


def roots(p: Polynomial) -> np.ndarray:
    """All ``p.degree`` roots of ``p`` (with multiplicity).

    Roots are eigenvalues of the companion matrix of the monic-normalised
    polynomial, each refined by Newton steps that are only accepted while
    they lower the residual.

    Raises
    ------
    DegeneratePolynomialError
        If ``p`` has degree 0 (including the zero polynomial).
    """
    if not isinstance(p, Polynomial):
        p = Polynomial(p)
    n = p.degree
    if n < 1:
        raise DegeneratePolynomialError(f"cannot take roots of degree-{n} polynomial {p!r}")
    c = p.coeffs
    if n == 1:
        return np.array([-c[0] / c[1]], dtype=complex)
    comp = np.zeros((n, n), dtype=complex)
    comp[1:, :-1] = np.eye(n - 1)
    comp[:, -1] = -c[:-1] / c[-1]
    z = np.linalg.eigvals(comp)
    return np.array([_polish(p, zi) for zi in z], dtype=complex)


def _polish(p: Polynomial, x: complex) -> complex:
    dp = p.derivative()
    best, res = complex(x), abs(p(x))
    for _ in range(_MAX_POLISH):
        if res <= 0.25 * polish_bound(p, best):
            break
        d = dp(best)
        if d == 0:
            break
        trial = best - p(best) / d
        r = abs(p(trial))
        if not r < res:
            break
        best, res = trial, r
    return best


def arccos_c(z) -> complex:
    """Principal-branch complex arccosine (real part in ``[0, pi]``)."""
    return cmath.acos(as_complex(z))


def sqrt_pair(z) -> tuple[complex, complex]:
    """Both square roots ``(w, -w)`` of ``z`` with ``w`` the principal root."""
    w = cmath.sqrt(as_complex(z))
    return w, -w


def match_multisets(a, b) -> float:
    """Largest distance in an optimal one-to-one matching of two equal-size complex sets."""
    from scipy.optimize import linear_sum_assignment

    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        raise PreconditionError("multisets differ in size")
    if a.size == 0:
        return 0.0
    cost = np.abs(a[:, None] - b[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())
