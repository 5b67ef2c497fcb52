"""Finite open chains: BdG matrix, diagonalisation and exact finite-size results."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .exceptions import NumericalFailure, PreconditionError, SingularInputError, StructureError
from .model import ModelParams, bulk_solve, derived
from .polycore import as_complex

# pairing_residual / max|lambda| above this marks the spectrum as suspect
PAIRING_RTOL = 1e-3
# localisation verdict thresholds
FIT_QUALITY_MIN = 0.9
DECAY_RATE_MIN = math.log(1.05)
BOUNDARY_FRACTION = 0.1


def assemble_bdg(p: ModelParams, L: int) -> np.ndarray:
    """Dense ``2L x 2L`` BdG matrix in the ``(c1^+, c1, c2^+, c2, ...)`` ordering."""
    if int(L) != L or L < 1:
        raise PreconditionError(f"chain length must be a positive integer, got {L!r}")
    L = int(L)
    h = np.zeros((2 * L, 2 * L), dtype=complex)
    idx = np.arange(L)
    h[2 * idx, 2 * idx] = p.m
    h[2 * idx + 1, 2 * idx + 1] = -p.m
    j = np.arange(L - 1)
    r, c = 2 * j, 2 * j + 2
    # site j -> site j+1
    h[r, c] = p.t1
    h[r, c + 1] = p.d1
    h[r + 1, c] = -p.d2
    h[r + 1, c + 1] = -p.t2
    # site j+1 -> site j
    h[c, r] = p.t2
    h[c, r + 1] = -p.d1
    h[c + 1, r] = p.d2
    h[c + 1, r + 1] = -p.t1
    return h


@dataclass
class EigenDecomposition:
    values: np.ndarray
    vectors: np.ndarray | None
    pairing_residual: float
    precision_flag: str
    pairing_rtol: float = PAIRING_RTOL

    @property
    def trusted(self) -> bool:
        return self.precision_flag == "trusted"


def pairing_residual(values) -> float:
    """Worst mismatch of a greedy one-to-one matching of ``values`` against ``-values``.

    Pairs are taken in order of increasing distance, so a spectrum that is
    exactly particle-hole symmetric gives zero.
    """
    w = np.asarray(values, dtype=complex).ravel()
    n = w.size
    if n == 0:
        return 0.0
    dist = np.abs(w[:, None] + w[None, :])
    order = np.argsort(dist, axis=None, kind="stable")
    used_r = np.zeros(n, dtype=bool)
    used_c = np.zeros(n, dtype=bool)
    worst, matched = 0.0, 0
    for flat in order:
        i, jj = divmod(int(flat), n)
        if used_r[i] or used_c[jj]:
            continue
        used_r[i] = used_c[jj] = True
        worst = max(worst, float(dist[i, jj]))
        matched += 1
        if matched == n:
            break
    return worst


def eigensolve(mat: np.ndarray, want_vectors: bool = False, pairing_rtol: float = PAIRING_RTOL) -> EigenDecomposition:
    """Eigenvalues (and optionally right eigenvectors) of a BdG matrix.

    The spectrum is flagged ``suspect`` when the particle-hole pairing
    residual exceeds ``pairing_rtol * max|lambda|``.
    """
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 2:
        raise PreconditionError("eigensolve needs a square matrix of size >= 2")
    try:
        if want_vectors:
            values, vectors = scipy.linalg.eig(mat, check_finite=True)
        else:
            values, vectors = scipy.linalg.eigvals(mat, check_finite=True), None
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError) as exc:
        raise NumericalFailure(f"dense eigensolver failed: {exc}", {"size": mat.shape[0]}) from exc
    if not np.all(np.isfinite(values)):
        raise NumericalFailure("dense eigensolver returned non-finite eigenvalues", {"size": mat.shape[0]})
    res = pairing_residual(values)
    top = float(np.max(np.abs(values)))
    flag = "suspect" if res > pairing_rtol * max(top, np.finfo(float).tiny) else "trusted"
    if vectors is not None:
        vectors = vectors / np.linalg.norm(vectors, axis=0)
    return EigenDecomposition(values, vectors, res, flag, pairing_rtol)


def spectrum_closed_form_d1d2_zero(p: ModelParams, L: int) -> np.ndarray:
    """Exact open-chain spectrum when one of the pairings vanishes.

    The result does not depend on the non-zero pairing. Values are ordered
    as all ``+m`` branch values (``j = 1..L``) followed by the ``-m`` branch.
    """
    if p.d1 * p.d2 != 0:
        raise PreconditionError("closed form requires d1*d2 = 0")
    if int(L) != L or L < 1:
        raise PreconditionError("chain length must be a positive integer")
    L = int(L)
    band = 2 * cmath.sqrt(p.t1) * cmath.sqrt(p.t2) * np.cos(np.arange(1, L + 1) * np.pi / (L + 1))
    return np.concatenate([p.m + band, -p.m + band])


def sine_ratio(L: int, x) -> complex:
    """``x**(1-L) + x**(3-L) + ... + x**(L-1)``, i.e. ``sin(L a)/sin(a)`` for ``x = exp(i a)``."""
    x = as_complex(x)
    if x == 0:
        raise PreconditionError("sine ratio undefined at x = 0")
    if L < 1:
        raise PreconditionError("sine ratio needs L >= 1")
    x2 = x * x
    term = x ** (1 - L)
    total = 0j
    for _ in range(L):
        total += term
        term *= x2
    return total


def _sine_ratios(Lmax: int, x: complex) -> np.ndarray:
    """``sr(j, x)`` for ``j = 0..Lmax`` via ``sr(j+1) = (x + 1/x) sr(j) - sr(j-1)``."""
    out = np.zeros(Lmax + 1, dtype=complex)
    u = x + 1.0 / x
    if Lmax >= 1:
        out[1] = 1.0
    for j in range(1, Lmax):
        out[j + 1] = u * out[j] - out[j - 1]
    return out


def _reciprocal_pairs(xs, rtol=1e-6):
    best = None
    for a, b, c, d in ((0, 1, 2, 3), (0, 2, 1, 3), (0, 3, 1, 2)):
        err = abs(xs[a] * xs[b] - 1) + abs(xs[c] * xs[d] - 1)
        if best is None or err < best[0]:
            best = (err, xs[a], xs[c])
    if best[0] > rtol:
        raise StructureError(f"bulk roots do not split into reciprocal pairs (mismatch {best[0]:.3e})")
    return best[1], best[2]


def _equal_hopping(p: ModelParams):
    t = p.t1
    if abs(p.t1 - p.t2) > 1e-12 * p.scale:
        raise PreconditionError("determinant equation requires t1 = t2")
    return t


def _deteqn_terms(p: ModelParams, L: int, x: complex, y: complex):
    t = _equal_hopping(p)
    dd = p.d1 * p.d2
    srx = _sine_ratios(L + 1, x)
    sry = _sine_ratios(L + 1, y)
    head = (dd - t * t) * srx[L + 1] * sry[L + 1]
    j = np.arange(1, L + 1)
    tail = 4 * dd * (L + 1 - j) * srx[1 : L + 1] * sry[1 : L + 1]
    return head, tail


def deteqn_lhs(p: ModelParams, L: int, x, y) -> complex:
    """Left-hand side of the finite ``t1 = t2`` determinant equation, summed term by term."""
    head, tail = _deteqn_terms(p, L, complex(x), complex(y))
    return complex(head + tail.sum())


def deteqn_residual(p: ModelParams, L: int, lam) -> tuple[complex, complex]:
    """Residuals of the cosine relation and of the determinant equation at ``lam``.

    ``x = exp(i alpha)`` and ``y = exp(i beta)`` are read off the bulk roots,
    which come in reciprocal pairs when ``t1 = t2``. The determinant residual
    is normalised by the sum of the moduli of its terms.
    """
    t = _equal_hopping(p)
    q = derived(p)
    if abs(q.D2) <= 1e-14 * p.scale**2:
        raise SingularInputError("d1*d2 - t^2 = 0")
    sol = bulk_solve(p, lam)
    x, y = _reciprocal_pairs(sol.xs)
    cos_res = (x + 1 / x) + (y + 1 / y) - 2 * p.m * t / q.D2
    head, tail = _deteqn_terms(p, L, x, y)
    total = head + tail.sum()
    norm = abs(head) + np.abs(tail).sum()
    return complex(cos_res), complex(total / norm) if norm > 0 else complex(total)


@dataclass(frozen=True)
class SummedForm:
    value: complex | None
    removable_singularity: bool


def deteqn_summed_form(p: ModelParams, L: int, alpha, beta, tol: float = 1e-8) -> SummedForm:
    """Closed form of the ``j``-sum in the determinant equation.

    ``alpha`` and ``beta`` may be complex. Returns ``value=None`` with the
    ``removable_singularity`` flag when ``cos(alpha)`` and ``cos(beta)``
    coincide within ``tol``; the term-by-term sum must be used there.
    """
    t = _equal_hopping(p)
    ca, cb = cmath.cos(alpha), cmath.cos(beta)
    if abs(ca - cb) <= tol * max(1.0, abs(ca), abs(cb)):
        return SummedForm(None, True)
    x, y = cmath.exp(1j * alpha), cmath.exp(1j * beta)
    sx, sy = _sine_ratios(L + 2, x), _sine_ratios(L + 2, y)
    dd = p.d1 * p.d2
    value = (dd - t * t) * sx[L + 1] * sy[L + 1] + dd / (ca - cb) ** 2 * (
        2 - 2 * sx[L + 1] * sy[L + 1] + sx[L + 2] * sy[L] + sx[L] * sy[L + 2]
    )
    return SummedForm(complex(value), False)


def refine_eigenvalue(p: ModelParams, L: int, lam0, tol: float = 1e-13, maxiter: int = 50) -> complex:
    """Secant refinement of the ``t1 = t2`` determinant equation starting at ``lam0``."""

    def f(lam):
        return deteqn_residual(p, L, lam)[1]

    scale = max(1.0, abs(lam0))
    a, b = complex(lam0), complex(lam0) + 1e-7 * scale
    fa, fb = f(a), f(b)
    for _ in range(maxiter):
        if fb == fa:
            break
        c = b - fb * (b - a) / (fb - fa)
        a, fa = b, fb
        b, fb = c, f(c)
        if abs(b - a) <= tol * scale:
            break
    return b


@dataclass(frozen=True)
class LocalizationReport:
    decay_fit_rate: float
    fit_quality: float
    boundary_mass_left: float
    boundary_mass_right: float
    verdict: str


def site_amplitudes(vec, L: int) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).ravel()
    if v.size != 2 * L:
        raise PreconditionError(f"eigenvector length {v.size} != 2L = {2 * L}")
    return np.maximum(np.abs(v[0::2]), np.abs(v[1::2]))


def localization(
    vec,
    L: int,
    fit_quality_min: float = FIT_QUALITY_MIN,
    rate_min: float = DECAY_RATE_MIN,
    boundary_fraction: float = BOUNDARY_FRACTION,
) -> LocalizationReport:
    """Log-linear fit of the per-site amplitude profile of an eigenvector.

    The site amplitude is the larger modulus of the two components on a
    site. ``decay_fit_rate`` is the fitted slope of ``log|psi|`` per site
    (negative means weight piles up on the left), ``fit_quality`` the R^2
    of the fit.
    """
    amp = site_amplitudes(vec, L)
    if not np.any(amp > 0):
        raise PreconditionError("cannot profile a zero vector")
    v = np.asarray(vec, dtype=complex).ravel()
    weight = np.abs(v[0::2]) ** 2 + np.abs(v[1::2]) ** 2
    weight = weight / weight.sum()
    nb = max(1, int(round(boundary_fraction * L)))
    if 2 * nb > L:
        nb = L // 2
    left = float(weight[:nb].sum()) if nb else 0.0
    right = float(weight[L - nb :].sum()) if nb else 0.0

    floor = np.finfo(float).tiny
    y = np.log(np.maximum(amp, floor))
    n = np.arange(1, L + 1, dtype=float)
    if L < 2:
        return LocalizationReport(0.0, 1.0, left, right, "extended")
    slope, icept = np.polyfit(n, y, 1)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum((y - (slope * n + icept)) ** 2))
    if ss_tot <= 1e-24 * max(1.0, float(np.sum(y * y))):
        quality = 1.0
    else:
        quality = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    verdict = "extended"
    if quality > fit_quality_min and abs(slope) > rate_min:
        verdict = "skin_left" if slope < 0 else "skin_right"
    return LocalizationReport(float(slope), quality, left, right, verdict)
