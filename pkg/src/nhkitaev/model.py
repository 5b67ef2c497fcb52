"""Chain parameters, the bulk quartic and the periodic dispersion."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import PreconditionError, SingularInputError
from .polycore import Polynomial, as_complex, roots

# bulk_quartic treats |D2| below this (relative to the couplings) as zero
DEGENERACY_RTOL = 1e-14


@dataclass(frozen=True)
class ModelParams:
    """The five complex couplings of the open chain.

    ``m`` is the onsite term, ``t1``/``t2`` the right/left hopping and
    ``d1``/``d2`` the two pairing amplitudes. No hermiticity is assumed.
    """

    m: complex
    t1: complex
    t2: complex
    d1: complex
    d2: complex

    def __post_init__(self):
        for name in ("m", "t1", "t2", "d1", "d2"):
            object.__setattr__(self, name, as_complex(getattr(self, name)))

    def as_tuple(self):
        return (self.m, self.t1, self.t2, self.d1, self.d2)

    @property
    def scale(self) -> float:
        return max(1e-300, max(abs(v) for v in self.as_tuple()))


@dataclass(frozen=True)
class DerivedQuantities:
    t_s: complex
    t_d: complex
    D2: complex


def derived(p: ModelParams) -> DerivedQuantities:
    return DerivedQuantities(
        t_s=p.t1 + p.t2,
        t_d=p.t1 - p.t2,
        D2=p.d1 * p.d2 - p.t1 * p.t2,
    )


@dataclass(frozen=True, eq=False)
class BulkQuartic:
    """Bulk polynomial in ``x`` plus a flag for the ``D2 = 0`` degeneracy.

    When ``degenerate`` is set the quartic and constant coefficients vanish
    and ``poly`` has lower degree; callers should use the closed-form
    ``d1*d2 = 0`` path instead of root finding.
    """

    poly: Polynomial
    degenerate: bool


def bulk_quartic_coeffs(p: ModelParams, lam) -> np.ndarray:
    """Ascending coefficients ``(c0, c1, c2, c3, c4)`` of the bulk quartic at ``lam``."""
    lam = complex(lam)
    q = derived(p)
    return np.array(
        [
            q.D2,
            lam * q.t_d - p.m * q.t_s,
            lam * lam - p.m * p.m - 2 * p.d1 * p.d2 - p.t1 * p.t1 - p.t2 * p.t2,
            -(lam * q.t_d + p.m * q.t_s),
            q.D2,
        ],
        dtype=complex,
    )


def bulk_quartic(p: ModelParams, lam) -> BulkQuartic:
    c = bulk_quartic_coeffs(p, lam)
    degenerate = abs(c[4]) <= DEGENERACY_RTOL * p.scale**2
    if degenerate:
        c = c.copy()
        c[0] = c[4] = 0.0
        return BulkQuartic(Polynomial(c), True)
    return BulkQuartic(Polynomial(c, trim=False), False)


@dataclass(frozen=True)
class BulkPair:
    x: complex
    a: complex
    flagged: bool = False


@dataclass(frozen=True)
class BulkSolution:
    """Four ``(x, a)`` pairs at ``lam``, sorted by ``|x|`` descending."""

    pairs: tuple
    lam: complex

    @property
    def xs(self) -> np.ndarray:
        return np.array([pr.x for pr in self.pairs])

    @property
    def as_(self) -> np.ndarray:
        return np.array([pr.a for pr in self.pairs])


def recover_a(p: ModelParams, lam, x) -> tuple[complex, bool]:
    """Solve one of the two linear bulk equations for ``a`` given a root ``x``.

    The better-conditioned of the two equations is used; the flag is set when
    both denominators vanish to working precision.
    """
    lam, x = complex(lam), complex(x)
    den1 = p.d1 * (x * x - 1.0)
    num1 = -(p.t2 + (p.m - lam) * x + p.t1 * x * x)
    den2 = p.t1 + (p.m + lam) * x + p.t2 * x * x
    num2 = p.d2 * (1.0 - x * x)
    scale = p.scale * max(1.0, abs(x)) ** 2 + abs(lam) * max(1.0, abs(x))
    if max(abs(den1), abs(den2)) <= 1e-13 * scale:
        return complex("nan"), True
    if abs(den1) >= abs(den2):
        return num1 / den1, False
    return num2 / den2, False


def bulk_residuals(p: ModelParams, lam, x, a) -> tuple[complex, complex]:
    """Residuals of the two bulk equations for the pair ``(x, a)``."""
    lam, x, a = complex(lam), complex(x), complex(a)
    r1 = p.t2 - a * p.d1 + (p.m - lam) * x + (p.t1 + a * p.d1) * x * x
    r2 = p.d2 - a * p.t1 - (p.m + lam) * a * x - (p.d2 + a * p.t2) * x * x
    return r1, r2


def bulk_solve(p: ModelParams, lam) -> BulkSolution:
    bq = bulk_quartic(p, lam)
    if bq.degenerate:
        raise SingularInputError("d1*d2 - t1*t2 = 0: bulk equation is not quartic")
    xs = roots(bq.poly)
    xs = xs[np.argsort(-np.abs(xs), kind="stable")]
    pairs = []
    for x in xs:
        a, flag = recover_a(p, lam, x)
        pairs.append(BulkPair(complex(x), a, flag))
    return BulkSolution(tuple(pairs), complex(lam))


def periodic_lambda(p: ModelParams, k: float) -> tuple[complex, complex]:
    """Both bands ``(lambda_+(k), lambda_-(k))`` of the periodic chain."""
    q = derived(p)
    s, c = math.sin(k), math.cos(k)
    root = cmath.sqrt(4 * p.d1 * p.d2 * s * s + (p.m + q.t_s * c) ** 2)
    shift = 1j * q.t_d * s
    return shift + root, shift - root


def periodic_lambda_array(p: ModelParams, k) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ``periodic_lambda`` over an array of momenta."""
    q = derived(p)
    k = np.asarray(k, dtype=float)
    s, c = np.sin(k), np.cos(k)
    root = np.sqrt((4 * p.d1 * p.d2 * s * s + (p.m + q.t_s * c) ** 2).astype(complex))
    shift = 1j * q.t_d * s
    return shift + root, shift - root


def phase_rotate(p: ModelParams, phi: float) -> ModelParams:
    """Multiply every coupling by ``exp(i phi)``; the spectrum rotates rigidly.

    Only the product ``d1*d2`` enters the spectrum, so splitting its phase
    ``exp(2 i phi)`` evenly over ``d1`` and ``d2`` is a free choice.
    """
    if not math.isfinite(phi):
        raise PreconditionError("phase must be finite")
    u = cmath.exp(1j * phi)
    return ModelParams(p.m * u, p.t1 * u, p.t2 * u, p.d1 * u, p.d2 * u)
