"""Infinite-chain eigenvalue curves from the parametrised root quartet.

At an infinite-size eigenvalue two of the four bulk roots share a modulus,
so the roots can be written ``{s/k, k e^{ia}, k e^{-ia}, 1/(s k)}``. With
``u = k + 1/k``, ``w = k - 1/k``, ``v = s + 1/s`` and ``c = cos a``, Vieta's
relations for the bulk quartic reduce to

    u (v + 2c)  = 2 m t_s / D2
    -w (v - 2c) = 2 lam t_d / D2
    u^2 + 2 c v = (lam^2 - m^2 - t_s^2) / D2

For each ``a`` the first and third lines give ``v`` and ``lam^2`` in terms
of ``u``; squaring the second leaves a quartic in ``u``. Every candidate is
checked against the Vieta residuals, so spurious roots of the elimination
are dropped rather than trusted.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import KitaevError, PreconditionError, SingularInputError
from .model import BulkSolution, ModelParams, bulk_quartic, derived
from .polycore import Polynomial, match_multisets, roots

MODULUS_RTOL = 1e-6
VIETA_RTOL = 1e-8
_ZERO_RTOL = 1e-12
_DEDUP_RTOL = 1e-9

BRANCHES = ("physical", "pair_dominant", "pair_subdominant")


class NotOnCurveError(KitaevError):
    """No two bulk roots share a modulus: ``lam`` is not an infinite-size eigenvalue."""


@dataclass(frozen=True)
class SpectrumPoint:
    alpha: float
    lam: complex
    kappa: complex
    s: complex
    branch: str
    vieta_residual: float = 0.0

    @property
    def quartet(self) -> np.ndarray:
        k, s, a = self.kappa, self.s, self.alpha
        return np.array([s / k, k * np.exp(1j * a), k * np.exp(-1j * a), 1 / (s * k)])

    def quartet_error(self, p: ModelParams) -> float:
        """Multiset distance between the quartet and the roots of the bulk quartic at ``lam``."""
        return match_multisets(self.quartet, roots(bulk_quartic(p, self.lam).poly))


@dataclass
class SpectrumCurve:
    points: dict
    alpha_grid_size: int
    gaps: list = field(default_factory=list)

    def branch(self, name: str) -> list[SpectrumPoint]:
        return self.points.get(name, [])

    def lambdas(self, name: str = "physical") -> np.ndarray:
        return np.array([pt.lam for pt in self.branch(name)], dtype=complex)

    def to_csv(self, path, branch: str | None = None, header_lines=()) -> None:
        names = BRANCHES + ("ambiguous",) if branch is None else (branch,)
        with open(path, "w", newline="") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            wr = csv.writer(fh)
            wr.writerow(["alpha", "re_lambda", "im_lambda", "branch", "abs_kappa", "abs_s"])
            for name in names:
                for pt in self.branch(name):
                    wr.writerow(
                        [
                            f"{pt.alpha:.17g}",
                            f"{pt.lam.real:.17g}",
                            f"{pt.lam.imag:.17g}",
                            pt.branch,
                            f"{abs(pt.kappa):.17g}",
                            f"{abs(pt.s):.17g}",
                        ]
                    )


def branch_label(kappa: complex, s: complex, rtol: float = MODULUS_RTOL) -> str:
    """Modulus-ordering label for a quartet normalised to ``|s| >= 1``."""
    k2, a_s = abs(kappa) ** 2, abs(s)
    if a_s > 1 + rtol and (abs(k2 - a_s) <= rtol * a_s or abs(k2 - 1 / a_s) <= rtol / a_s):
        return "ambiguous"
    if k2 > a_s:
        return "pair_dominant"
    if k2 < 1 / a_s:
        return "pair_subdominant"
    return "physical"


def classify_branch(sol: BulkSolution, rtol: float = MODULUS_RTOL) -> str:
    """Branch of a bulk solution from which adjacent root moduli coincide.

    Raises
    ------
    NotOnCurveError
        If no two moduli agree within ``rtol``.
    """
    r = np.sort(np.abs(sol.xs))[::-1]
    if r.size != 4:
        raise PreconditionError("classify_branch needs four bulk roots")
    eq = [abs(r[i] - r[i + 1]) <= rtol * max(r[i], 1e-300) for i in range(3)]
    if sum(eq) > 1:
        return "ambiguous"
    if eq[1]:
        return "physical"
    if eq[0]:
        return "pair_dominant"
    if eq[2]:
        return "pair_subdominant"
    raise NotOnCurveError(f"no equal-modulus root pair at lambda={sol.lam!r}")


def _vieta_residual(p: ModelParams, alpha: float, lam: complex, kappa: complex, s: complex) -> float:
    q = derived(p)
    c = math.cos(alpha)
    u, w, v = kappa + 1 / kappa, kappa - 1 / kappa, s + 1 / s
    D2 = q.D2
    terms = (
        (u * (v + 2 * c) * D2, 2 * p.m * q.t_s),
        (-w * (v - 2 * c) * D2, 2 * lam * q.t_d),
        ((u * u + 2 * c * v) * D2, lam * lam - p.m * p.m - q.t_s * q.t_s),
    )
    worst = 0.0
    for lhs, rhs in terms:
        # scale by the individual contributions so cancellation does not hide errors
        ref = max(abs(lhs), abs(rhs), abs(D2) * (1 + abs(u) ** 2 + abs(v) + abs(w * v)), 1e-300)
        worst = max(worst, abs(lhs - rhs) / ref)
    return worst


def _s_from_v(v: complex) -> complex:
    disc = np.sqrt(complex(v * v - 4))
    s = (v + disc) / 2
    if abs(s) < 1:
        s = (v - disc) / 2
    return complex(s)


def _kappas(u: complex) -> tuple[complex, complex]:
    disc = np.sqrt(complex(u * u - 4))
    k1 = (u + disc) / 2
    return complex(k1), complex(1 / k1) if k1 != 0 else complex((u - disc) / 2)


def _u_quartic(p: ModelParams, c: float) -> np.ndarray:
    q = derived(p)
    D2, td2 = q.D2, q.t_d * q.t_d
    R1 = 2 * p.m * q.t_s / D2
    e = p.m * p.m + q.t_s * q.t_s
    return np.array(
        [
            -4 * R1 * R1,
            32 * c * R1 - 8 * c * R1 * td2 / D2,
            R1 * R1 - 64 * c * c + 16 * c * c * td2 / D2 - 4 * td2 * e / (D2 * D2),
            -8 * c * R1,
            16 * c * c - 4 * td2 / D2,
        ],
        dtype=complex,
    )


def _candidates(p: ModelParams, alpha: float) -> list[tuple[complex, complex, complex]]:
    """Raw ``(lam, kappa, s)`` candidates at one ``alpha``; may include spurious ones."""
    q = derived(p)
    D2 = q.D2
    sc = p.scale
    c = math.cos(alpha)
    if abs(c) < 1e-15:
        c = 0.0
    R1 = 2 * p.m * q.t_s / D2
    e = p.m * p.m + q.t_s * q.t_s
    td_zero = abs(q.t_d) <= _ZERO_RTOL * sc
    r1_zero = abs(p.m * q.t_s) <= _ZERO_RTOL * sc * sc
    out = []
    if td_zero:
        # second Vieta line factorises: kappa = +/-1 or v = 2c
        for u in (2.0, -2.0):
            v = R1 / u - 2 * c
            r = np.sqrt(complex(D2 * (u * u + 2 * c * v) + e))
            for lam in (r, -r):
                out.append((complex(lam), complex(u / 2), _s_from_v(v)))
        if c != 0.0:
            u = R1 / (4 * c)
            r = np.sqrt(complex(D2 * (u * u + 4 * c * c) + e))
            s = complex(np.exp(1j * alpha))
            for kappa in _kappas(u):
                if kappa != 0:
                    for lam in (r, -r):
                        out.append((complex(lam), kappa, s))
        coeffs = np.zeros(1)
    else:
        coeffs = _u_quartic(p, c)
    if np.max(np.abs(coeffs)) > 0:
        poly = Polynomial(coeffs)
        if poly.degree >= 1:
            for u in roots(poly):
                if abs(u) <= 1e-9:
                    continue
                v = R1 / u - 2 * c
                s = _s_from_v(v)
                for kappa in _kappas(u):
                    if kappa == 0:
                        continue
                    w = kappa - 1 / kappa
                    lam = -D2 * w * (v - 2 * c) / (2 * q.t_d)
                    out.append((complex(lam), kappa, s))
    if r1_zero:
        # kappa = +/- i, where u = 0 and the first Vieta line is void
        for kappa in (1j, -1j):
            w = kappa - 1 / kappa
            if c != 0.0:
                lams = roots(Polynomial([-w * (e + 4 * c * c * D2), 4 * c * q.t_d, w]))
                for lam in lams:
                    v = (lam * lam - e) / (2 * c * D2)
                    out.append((complex(lam), kappa, _s_from_v(v)))
            else:
                r = np.sqrt(complex(e))
                for lam in (r, -r):
                    v = -2 * lam * q.t_d / (D2 * w)
                    out.append((complex(lam), kappa, _s_from_v(v)))
    return out


def _polish(p: ModelParams, alpha: float, lam, kappa, s, steps: int = 3):
    """Newton steps on the three Vieta equations, kept only while the residual drops."""
    q = derived(p)
    D2, c = q.D2, math.cos(alpha)
    e = p.m * p.m + q.t_s * q.t_s
    best = (lam, kappa, s)
    res = _vieta_residual(p, alpha, *best)
    for _ in range(steps):
        if res <= 1e-15:
            break
        lam, kappa, s = best
        u, w, v = kappa + 1 / kappa, kappa - 1 / kappa, s + 1 / s
        uk, wk, vs = 1 - 1 / kappa**2, 1 + 1 / kappa**2, 1 - 1 / s**2
        F = np.array(
            [
                D2 * u * (v + 2 * c) - 2 * p.m * q.t_s,
                -D2 * w * (v - 2 * c) - 2 * lam * q.t_d,
                D2 * (u * u + 2 * c * v) - lam * lam + e,
            ]
        )
        J = np.array(
            [
                [0, D2 * uk * (v + 2 * c), D2 * u * vs],
                [-2 * q.t_d, -D2 * wk * (v - 2 * c), -D2 * w * vs],
                [-2 * lam, 2 * D2 * u * uk, 2 * c * D2 * vs],
            ],
            dtype=complex,
        )
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        if not np.all(np.isfinite(step)):
            break
        trial = (best[0] + step[0], best[1] + step[1], best[2] + step[2])
        if trial[1] == 0 or trial[2] == 0:
            break
        r = _vieta_residual(p, alpha, *trial)
        if not r < res:
            break
        best, res = trial, r
    lam, kappa, s = best
    if abs(s) < 1:
        # same quartet with s -> 1/s
        s = 1 / s
    return complex(lam), complex(kappa), complex(s), res


class _GridGap(Exception):
    pass


def vieta_solutions(p: ModelParams, alpha: float, rtol: float = MODULUS_RTOL) -> list[SpectrumPoint]:
    """All validated solutions of the Vieta system at one angle ``alpha``.

    Raises
    ------
    SingularInputError
        If ``d1*d2 = t1*t2``, where the bulk equation is not quartic.
    """
    q = derived(p)
    if abs(q.D2) <= 1e-14 * p.scale**2:
        raise SingularInputError("d1*d2 - t1*t2 = 0: Vieta parametrisation undefined")
    alpha = float(alpha) % (2 * math.pi)
    c = math.cos(alpha)
    if (
        abs(c) < 1e-15
        and abs(q.t_d) <= _ZERO_RTOL * p.scale
        and abs(p.m * q.t_s) <= _ZERO_RTOL * p.scale**2
    ):
        raise _GridGap("Vieta system is underdetermined at this alpha")
    pts: list[SpectrumPoint] = []
    lam_scale = max(1.0, p.scale)
    for lam, kappa, s in _candidates(p, alpha):
        if not (np.isfinite(lam) and np.isfinite(kappa) and np.isfinite(s)):
            continue
        lam, kappa, s, res = _polish(p, alpha, lam, kappa, s)
        if res > VIETA_RTOL:
            continue
        dup = False
        for pt in pts:
            if (
                abs(pt.lam - lam) <= _DEDUP_RTOL * lam_scale
                and abs(pt.kappa - kappa) <= _DEDUP_RTOL * max(1.0, abs(kappa))
                and abs(pt.s - s) <= _DEDUP_RTOL * max(1.0, abs(s))
            ):
                dup = True
                break
        if not dup:
            pts.append(SpectrumPoint(alpha, lam, kappa, s, branch_label(kappa, s, rtol), res))
    return pts


def spectrum_curve(p: ModelParams, n_alpha: int, rtol: float = MODULUS_RTOL) -> SpectrumCurve:
    """Sweep ``alpha_j = 2 pi j / n_alpha`` and bucket the solutions by branch.

    Angles where the system is underdetermined or a solve fails are
    recorded in ``gaps`` as ``(alpha, reason)`` and the sweep continues.
    """
    if int(n_alpha) != n_alpha or n_alpha < 8:
        raise PreconditionError("n_alpha must be an integer >= 8")
    q = derived(p)
    if abs(q.D2) <= 1e-14 * p.scale**2:
        raise SingularInputError("d1*d2 - t1*t2 = 0: Vieta parametrisation undefined")
    buckets: dict = {name: [] for name in BRANCHES + ("ambiguous",)}
    gaps = []
    for j in range(int(n_alpha)):
        alpha = 2 * math.pi * j / n_alpha
        try:
            pts = vieta_solutions(p, alpha, rtol)
        except (_GridGap, np.linalg.LinAlgError, ArithmeticError) as exc:
            gaps.append((alpha, str(exc)))
            continue
        for pt in pts:
            buckets[pt.branch].append(pt)
    return SpectrumCurve(buckets, int(n_alpha), gaps)


def distance_to_curve(lams, curve_lams) -> np.ndarray:
    """Distance from each of ``lams`` to the nearest point of a sampled curve."""
    lams = np.asarray(lams, dtype=complex).ravel()
    cl = np.asarray(curve_lams, dtype=complex).ravel()
    if cl.size == 0:
        return np.full(lams.shape, np.inf)
    out = np.empty(lams.size)
    for i in range(0, lams.size, 256):
        blk = lams[i : i + 256]
        out[i : i + 256] = np.min(np.abs(blk[:, None] - cl[None, :]), axis=1)
    return out
