"""Zero modes of the infinite open chain.

At ``lambda = 0`` the bulk equations have closed-form solutions. A zero mode
exists when both roots of one branch (sharing the same ``a``) lie inside the
unit circle, which is equivalent to comparing the imaginary parts of two
complex arccosines.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import asdict, dataclass

import numpy as np

from .exceptions import PreconditionError, SingularInputError
from .model import ModelParams, derived
from .polycore import arccos_c

BOUNDARY_TOL = 1e-10


@dataclass(frozen=True)
class ZeroModeSolution:
    """The four ``x`` roots and two ``a`` values of the bulk equations at zero energy.

    Naming follows ``x_{num, den}``: the first sign picks the square root in
    the numerator, the second the one in the denominator, and ``a_m``/``a_p``
    go with the ``-``/``+`` denominator branch.
    """

    x_mm: complex
    x_pm: complex
    x_mp: complex
    x_pp: complex
    a_m: complex
    a_p: complex
    y1: complex
    y2: complex

    @property
    def xs(self) -> np.ndarray:
        return np.array([self.x_mm, self.x_pm, self.x_mp, self.x_pp])

    def branch(self, side: str) -> tuple[complex, complex, complex]:
        """``(x_minus, x_plus, a)`` of the ``minus_branch`` or ``plus_branch``."""
        if side == "minus_branch":
            return self.x_mm, self.x_pm, self.a_m
        if side == "plus_branch":
            return self.x_mp, self.x_pp, self.a_p
        raise PreconditionError(f"unknown branch {side!r}")


def zero_mode_roots(p: ModelParams) -> ZeroModeSolution:
    if p.d1 == 0:
        raise PreconditionError("d1 = 0: no a-normalisation; use the d1*d2 = 0 analysis")
    q = derived(p)
    if q.D2 == 0:
        raise SingularInputError("d1*d2 - t1*t2 = 0")
    r_num = cmath.sqrt(4 * p.d1 * p.d2 + p.m * p.m - 4 * p.t1 * p.t2)
    r_den = cmath.sqrt(4 * p.d1 * p.d2 + q.t_d * q.t_d)
    den_m, den_p = q.t_s - r_den, q.t_s + r_den
    if den_m == 0 or den_p == 0:
        raise SingularInputError("vanishing denominator in zero-energy roots")
    norm = cmath.sqrt(-4 * q.D2)
    return ZeroModeSolution(
        x_mm=(-p.m - r_num) / den_m,
        x_pm=(-p.m + r_num) / den_m,
        x_mp=(-p.m - r_num) / den_p,
        x_pp=(-p.m + r_num) / den_p,
        a_m=(-q.t_d - r_den) / (2 * p.d1),
        a_p=(-q.t_d + r_den) / (2 * p.d1),
        y1=-p.m / norm,
        y2=q.t_s / norm,
    )


@dataclass(frozen=True)
class ZeroModeVerdict:
    exists: bool
    side: str
    lhs: float
    rhs: float
    boundary: bool = False

    def to_json(self) -> dict:
        return asdict(self)


def criterion_sides(p: ModelParams) -> tuple[float, float]:
    """The two ``|Im arccos(.)|`` values compared by the zero-mode criterion."""
    q = derived(p)
    if abs(q.D2) <= 1e-14 * p.scale**2:
        raise SingularInputError("t1*t2 - d1*d2 = 0: zero-mode criterion is singular")
    root = 2 * cmath.sqrt(-q.D2)
    lhs = abs(arccos_c(-p.m / root).imag)
    rhs = abs(arccos_c(q.t_s / root).imag)
    return lhs, rhs


def _decaying_side(p: ModelParams) -> str:
    """Which denominator branch has both numerator roots inside the unit circle.

    Only moduli are used, so the result is insensitive to the square-root
    branches chosen in the closed forms.
    """
    q = derived(p)
    r_num = cmath.sqrt(4 * p.d1 * p.d2 + p.m * p.m - 4 * p.t1 * p.t2)
    r_den = cmath.sqrt(4 * p.d1 * p.d2 + q.t_d * q.t_d)
    num = max(abs(-p.m - r_num), abs(-p.m + r_num))
    for side, den in (("minus_branch", q.t_s - r_den), ("plus_branch", q.t_s + r_den)):
        if num < abs(den):
            return side
    return "none"


def has_zero_mode(p: ModelParams, boundary_tol: float = BOUNDARY_TOL) -> ZeroModeVerdict:
    """Zero-mode existence for the infinite open chain.

    When the two sides agree within ``boundary_tol`` the chain sits on the
    gapless boundary of the zero-mode region; the verdict then has
    ``boundary=True`` and ``exists=False``.
    """
    lhs, rhs = criterion_sides(p)
    if abs(lhs - rhs) < boundary_tol:
        return ZeroModeVerdict(False, "none", lhs, rhs, boundary=True)
    exists = lhs < rhs
    side = _decaying_side(p) if exists else "none"
    return ZeroModeVerdict(exists, side, lhs, rhs)


def hermitian_zero_mode_condition(m: float, t: float, phi_t: float, d: float, phi_d: float = 0.0) -> bool:
    """Zero-mode condition for ``t1 = t e^{i phi_t} = conj(t2)``, ``d1 = d e^{i phi_d} = conj(d2)``."""
    return m * m < 4 * t * t * math.cos(phi_t) ** 2 and d * d > t * t * math.sin(phi_t) ** 2


def hermitian_params(m: float, t: float, phi_t: float, d: float, phi_d: float) -> ModelParams:
    return ModelParams(
        m,
        t * cmath.exp(1j * phi_t),
        t * cmath.exp(-1j * phi_t),
        d * cmath.exp(1j * phi_d),
        d * cmath.exp(-1j * phi_d),
    )


def zero_mode_state(p: ModelParams, L: int) -> np.ndarray:
    """Unit-norm zero-mode vector of length ``2L`` built from the decaying branch.

    The two plane-wave solutions of the branch share one ``a`` and are
    subtracted, which cancels the left boundary equations identically.
    """
    verdict = has_zero_mode(p)
    if not verdict.exists:
        raise PreconditionError("no zero mode for these parameters")
    if int(L) != L or L < 1:
        raise PreconditionError("chain length must be a positive integer")
    sol = zero_mode_roots(p)
    xa, xb, a = sol.branch(verdict.side)
    n = np.arange(1, int(L) + 1)
    diff = xa**n - xb**n
    psi = np.empty(2 * int(L), dtype=complex)
    psi[0::2] = diff
    psi[1::2] = a * diff
    return psi / np.linalg.norm(psi)


def left_boundary_residual(p: ModelParams) -> tuple[complex, complex]:
    """Left boundary equations for the zero-mode combination (components at site 0)."""
    verdict = has_zero_mode(p)
    xa, xb, a = zero_mode_roots(p).branch(verdict.side)
    psi_m1 = xa**0 - xb**0
    psi_0 = a * xa**0 - a * xb**0
    return -p.t2 * psi_m1 + p.d1 * psi_0, -p.d2 * psi_m1 + p.t1 * psi_0
