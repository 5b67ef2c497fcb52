"""Unit-circle root counting and skin-effect classification.

The counting engine is the Bistritz tabular recursion for complex
polynomials. A polynomial ``P`` of degree ``n`` with ``P(1) = 1`` seeds

    T_n = P + P#,   T_{n-1} = (P - P#) / (z - 1),

where ``P#`` is the conjugate reciprocal, and then

    T_{k-2} = ((d_k + conj(d_k) z) T_{k-1} - T_k) / z,   d_k = T_k(0) / T_{k-1}(0).

Every ``T_k`` is self-reciprocal, so ``T_k(1)`` is real and the sign changes
of ``T_n(1), ..., T_0(1)`` count the zeros outside the unit circle. When some
``T_{s-1}`` vanishes identically the remaining sequence is rebuilt from the
derivative of ``T_s``; the number of sign changes in that tail then gives the
number of zeros on the circle.

An eigenvalue on the periodic curve belongs to a state without skin effect
when at least two bulk roots sit on the unit circle.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import PreconditionError, SingularInputError, UnsupportedStructureError
from .model import ModelParams, bulk_quartic_coeffs, derived, periodic_lambda
from .polycore import Polynomial, roots

SINGULAR_RTOL = 1e-10
SIGN_ATOL = 1e-12
NONESSENTIAL_RTOL = 1e-9
UNIT_ROOT_RTOL = 1e-12
PHASE_TOL = 1e-9
UNIT_CIRCLE_TOL = 1e-6
SPECIAL_RTOL = 1e-9
_ROTATIONS = (0.0, 0.61803398874989, 1.2360679774997896, 2.718281828459045, 0.3141592653589793)


class _NonEssential(Exception):
    pass


@dataclass
class BistritzOutcome:
    """Root counts of a polynomial with respect to the unit circle.

    ``alpha_n``, ``beta_n`` and ``gamma_n`` count zeros inside, on and outside
    the circle. Roots at ``x = 1`` factored out before the recursion are
    included in ``beta_n`` and reported in ``unit_roots``.
    """

    n: int
    nu_n: int
    nu_s: int | None
    singular_level: int | None
    alpha_n: int
    beta_n: int
    gamma_n: int
    sequence_a: tuple = ()
    sequence_b: tuple = ()
    t_polys: list = field(default_factory=list, repr=False)
    unit_roots: int = 0
    rotation: float = 0.0
    ambiguous: bool = False


def _conj_reciprocal(c: np.ndarray) -> np.ndarray:
    return np.conj(c[::-1])


def _deflate_unit_root(c: np.ndarray) -> np.ndarray:
    # synthetic division by (z - 1), ascending coefficients
    n = c.size - 1
    q = np.zeros(n, dtype=complex)
    acc = 0j
    for k in range(n, 0, -1):
        acc = c[k] + acc
        q[k - 1] = acc
    return q


def _div_z_minus_1(c: np.ndarray) -> np.ndarray:
    return _deflate_unit_root(c)


def _at_one(c: np.ndarray) -> complex:
    return complex(np.sum(c))


def _is_zero(c: np.ndarray, ref_scale: float, rtol: float) -> bool:
    return bool(np.max(np.abs(c)) <= rtol * ref_scale)


def _derivative_tail(t: np.ndarray) -> np.ndarray:
    """Replacement for an identically vanishing ``T_{s-1}``, built from ``T_s``.

    ``Q = (T_s')# + i g T_s`` with real ``g`` chosen so ``Q(1)`` is real
    satisfies ``Q + Q# = s T_s``. ``Q`` has as many zeros inside the circle
    as ``T_s`` and none on it, so the recursion can continue with
    ``(Q - Q#) / (s (z - 1))``.
    """
    s = t.size - 1
    dt = t[1:] * np.arange(1, s + 1)
    rec = np.zeros(s + 1, dtype=complex)
    rec[:s] = np.conj(dt[::-1])
    t1 = _at_one(t).real
    g = _at_one(dt).imag / t1
    q = rec + 1j * g * t
    diff = q - _conj_reciprocal(q)
    return _div_z_minus_1(diff) / s


def _sign_changes(values, scales):
    ambiguous = False
    signs = []
    for v, sc in zip(values, scales):
        if abs(v) <= SIGN_ATOL * max(sc, 1e-300):
            ambiguous = True
            continue
        signs.append(v > 0)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b), ambiguous


def _itf(c: np.ndarray):
    """Run the tabular recursion on ascending coefficients with ``P(1) = 1``."""
    n = c.size - 1
    rec = _conj_reciprocal(c)
    tn = c + rec
    tn1 = _div_z_minus_1(c - rec)
    polys = {n: tn, n - 1: tn1}
    primed = set()
    level = None
    k = n
    # rounding error is set by the largest row seen so far, not the current one
    ref = 0.0
    while k >= 1:
        tk, tk1 = polys[k], polys[k - 1]
        scale_k = float(np.max(np.abs(tk)))
        ref = max(ref, scale_k)
        if _is_zero(tk1, ref, SINGULAR_RTOL):
            if level is not None:
                raise UnsupportedStructureError(
                    "second essential singularity in Bistritz recursion",
                    {"first_level": level, "second_level": k},
                )
            if abs(tk[0]) <= SINGULAR_RTOL * scale_k:
                raise UnsupportedStructureError(
                    "T_s(0) = 0 together with T_{s-1} = 0",
                    {"level": k, "T_s(0)": complex(tk[0])},
                )
            level = k
            tk1 = _derivative_tail(tk)
            polys[k - 1] = tk1
            primed.add(k - 1)
        if k == 1:
            break
        if abs(tk1[0]) <= NONESSENTIAL_RTOL * float(np.max(np.abs(tk1))):
            raise _NonEssential(k - 1)
        delta = tk[0] / tk1[0]
        num = np.zeros(k + 1, dtype=complex)
        num[: k] += delta * tk1
        num[1:] += np.conj(delta) * tk1
        num -= tk
        nxt = num[1:k]
        polys[k - 2] = nxt
        if k - 2 < (level if level is not None else -1):
            primed.add(k - 2)
        k -= 1
    order = [polys[j] for j in range(n, -1, -1)]
    return order, level, primed


def _prepare(P) -> tuple[np.ndarray, int]:
    if not isinstance(P, Polynomial):
        P = Polynomial(P)
    c = np.array(P.coeffs, dtype=complex)
    if c.size - 1 < 1:
        raise PreconditionError("Bistritz test needs degree >= 1")
    ones = 0
    while c.size > 1 and abs(_at_one(c)) <= UNIT_ROOT_RTOL * float(np.sum(np.abs(c))):
        c = _deflate_unit_root(c)
        ones += 1
    return c, ones


def bistritz(P, rotation: float | None = None) -> BistritzOutcome:
    """Count zeros of ``P`` inside, on and outside the unit circle.

    Roots at ``x = 1`` are divided out first and the rest is rescaled to
    ``P(1) = 1``. If the recursion hits a nonessential singularity (a
    vanishing ``T_k(0)`` without ``T_k`` vanishing) the polynomial is rotated
    by a fixed angle, which leaves all counts unchanged, and rerun.

    Raises
    ------
    UnsupportedStructureError
        For singular patterns beyond a single essential singularity.
    """
    c0, ones = _prepare(P)
    n_total = c0.size - 1 + ones
    if c0.size == 1:
        return BistritzOutcome(n_total, 0, None, None, 0, ones, 0, unit_roots=ones)
    angles = _ROTATIONS if rotation is None else (rotation,)
    last = None
    for theta in angles:
        c = c0 * np.exp(1j * theta * np.arange(c0.size)) if theta else c0.copy()
        p1 = _at_one(c)
        if abs(p1) <= UNIT_ROOT_RTOL * float(np.sum(np.abs(c))):
            continue
        c = c / p1
        try:
            polys, level, primed = _itf(c)
        except _NonEssential as exc:
            last = exc
            continue
        return _count(polys, level, ones, theta)
    raise UnsupportedStructureError(
        "nonessential singularity persisted under all trial rotations",
        {"level": None if last is None else last.args[0]},
    )


def _count(polys, level, ones, theta) -> BistritzOutcome:
    n = len(polys) - 1
    vals = [float(_at_one(t).real) for t in polys]
    scales = [float(np.max(np.abs(t))) for t in polys]
    nu_n, amb = _sign_changes(vals, scales)
    alpha = n - nu_n
    if level is None:
        beta, gamma, nu_s, seq_b = 0, nu_n, None, ()
    else:
        start = n - level
        nu_s, amb_b = _sign_changes(vals[start:], scales[start:])
        amb = amb or amb_b
        beta = 2 * nu_s - level
        gamma = n - alpha - beta
        seq_b = tuple(vals[start:])
    return BistritzOutcome(
        n=n + ones,
        nu_n=nu_n,
        nu_s=nu_s,
        singular_level=level,
        alpha_n=alpha,
        beta_n=beta + ones,
        gamma_n=gamma,
        sequence_a=tuple(vals),
        sequence_b=seq_b,
        t_polys=[Polynomial(t, trim=False) for t in polys],
        unit_roots=ones,
        rotation=theta,
        ambiguous=amb,
    )


def bistritz_polys(P) -> list[Polynomial]:
    """``T_n, ..., T_0`` of the unrotated recursion on ``P / P(1)`` (no singular handling)."""
    c, ones = _prepare(P)
    if ones:
        raise PreconditionError("P(1) = 0; factor out x = 1 first")
    c = c / _at_one(c)
    polys, _, _ = _itf(c)
    return [Polynomial(t, trim=False) for t in polys]


def brute_force_counts(P, tol: float = UNIT_CIRCLE_TOL) -> tuple[int, int, int]:
    """Inside/on/outside counts from explicit roots; ``tol`` is the on-circle shell."""
    r = np.abs(roots(P if isinstance(P, Polynomial) else Polynomial(P)))
    on = int(np.sum(np.abs(r - 1) <= tol))
    inside = int(np.sum(r < 1 - tol))
    return inside, on, r.size - inside - on


# --- closed-form T polynomials for the bulk quartic ---


@dataclass(frozen=True)
class SkinContext:
    """Bulk quartic at ``lam`` rescaled so that ``P(1) = 1``."""

    N2: complex
    P: Polynomial
    lam: complex
    k: float | None = None


def skin_context(p: ModelParams, lam, k: float | None = None) -> SkinContext:
    q = derived(p)
    lam = complex(lam)
    n2 = lam * lam - (p.m + q.t_s) ** 2
    if n2 == 0:
        raise SingularInputError("N2 = lambda^2 - (m + t_s)^2 vanishes; x = 1 is a bulk root")
    return SkinContext(n2, Polynomial(bulk_quartic_coeffs(p, lam) / n2, trim=False), lam, k)


def t_polynomials_complex(ctx: SkinContext, p: ModelParams) -> list[Polynomial]:
    """Closed forms of ``T_4 .. T_1`` for the rescaled bulk quartic.

    ``T_2`` and ``T_1`` carry denominators that vanish exactly when ``T_3``
    does; the lower rows are then rebuilt by the recursion itself, so only
    ``[T_4, T_3]`` is returned.
    """
    q = derived(p)
    lam, N2, D2 = ctx.lam, ctx.N2, q.D2
    nn = (N2 * N2.conjugate()).real
    cN = N2.conjugate()
    re_dn = (D2 * cN).real
    im_dn = (D2 * cN).imag
    im_ltn = (lam * q.t_d * cN).imag
    re_ltn = (lam * q.t_d * cN).real
    re_mtn = (p.m * q.t_s * cN).real
    im_mtn = (p.m * q.t_s * cN).imag
    re_ltd = (lam * q.t_d * D2.conjugate()).real
    im_mtd = (p.m * q.t_s * D2.conjugate()).imag
    im_nd = (N2 * D2.conjugate()).imag

    def poly(*c):
        return Polynomial(np.array(c, dtype=complex), trim=False)

    t4 = poly(
        2 * re_dn / nn,
        2 * (1j * im_ltn - re_mtn) / nn,
        2 * (-2 * re_dn + 2 * re_mtn) / nn + 2,
        2 * (-1j * im_ltn - re_mtn) / nn,
        2 * re_dn / nn,
    )
    a, b, cc = -1j * im_dn, 1j * im_mtn, -re_ltn
    t3 = poly(2 * a / nn, 2 * (a + b + cc) / nn, 2 * (-a - b + cc) / nn, 2 * (-a) / nn)
    if im_dn == 0:
        return [t4, t3]
    den2 = 1j * im_dn
    t2 = poly(
        2 * (re_ltd - 1j * im_mtd) / den2,
        2 * (2j * im_mtd) / den2 - 2,
        2 * (-re_ltd - 1j * im_mtd) / den2,
    )
    qq = re_ltd**2 + im_mtd**2
    first = re_ltn - im_nd**2 * re_ltd / qq
    second = im_mtn + 4 * im_nd + im_nd**2 * im_mtd / qq - 4 * im_nd * re_ltd**2 / qq
    t1 = poly((2 * first - 2j * second) / nn, (2 * first + 2j * second) / nn)
    return [t4, t3, t2, t1]


def t_polynomials_real(ctx: SkinContext, p: ModelParams) -> list[Polynomial]:
    """``T_4 .. T_1`` in the simplified form valid for real couplings (complex ``lam``).

    As in the complex case only ``[T_4, T_3]`` is returned when the lower
    closed forms are undefined (``Im N2 = 0`` or ``t_d Re lam = 0``).
    """
    q = derived(p)
    lam, N2, D2 = ctx.lam, ctx.N2, q.D2.real
    m, ts, td = p.m.real, q.t_s.real, q.t_d.real
    nn = (N2 * N2.conjugate()).real
    reN, imN = N2.real, N2.imag
    im_lN = (lam * N2.conjugate()).imag
    re_lN = (lam * N2.conjugate()).real

    def poly(*c):
        return Polynomial(np.array(c, dtype=complex), trim=False)

    t4 = poly(
        2 * D2 * reN / nn,
        2 * (-m * ts * reN + 1j * td * im_lN) / nn,
        2 * (-2 * D2 * reN + 2 * m * ts * reN) / nn + 2,
        2 * (-m * ts * reN - 1j * td * im_lN) / nn,
        2 * D2 * reN / nn,
    )
    a, b, cc = 1j * D2 * imN, -1j * m * ts * imN, -td * re_lN
    t3 = poly(2 * a / nn, 2 * (a + b + cc) / nn, 2 * (-a - b + cc) / nn, 2 * (-a) / nn)
    if imN == 0 or td * lam.real == 0:
        return [t4, t3]
    g = -2 * td * lam.real / (1j * imN)
    t2 = poly(g, -2, -g)
    first = -D2 * imN**2 / (td * lam.real) + td * re_lN
    t1 = poly((2 * first + 2j * m * ts * imN) / nn, (2 * first - 2j * m * ts * imN) / nn)
    return [t4, t3, t2, t1]


def t0_constant(T2: Polynomial, T1: Polynomial) -> float:
    """Last element of the sign sequence from ``T_2`` and ``T_1``.

    Raises
    ------
    SingularInputError
        If ``T_1(0) = 0`` (the recursion is singular one level deeper).
    """
    t10 = complex(T1.coeffs[0])
    if t10 == 0:
        raise SingularInputError("T_1(0) = 0")
    val = 2 * (complex(T2.coeffs[0]) / t10).real * complex(T1(1.0)) - complex(T2(1.0))
    return val.real


# --- no-skin conditions ---


def _is_zero_scalar(z, scale) -> bool:
    return abs(z) <= 1e-12 * scale


def _is_real(z, tol=PHASE_TOL) -> bool:
    return abs(z.imag) <= tol * abs(z)


def _is_imag(z, tol=PHASE_TOL) -> bool:
    return abs(z.real) <= tol * abs(z)


@dataclass(frozen=True)
class KRange:
    """Set of momenta described by the sign of ``A sin^2 k + (B + C cos k)^2``.

    ``sign = 0`` means every ``k``; otherwise the set where the expression
    has the given sign.
    """

    A: float = 0.0
    B: float = 0.0
    C: float = 0.0
    sign: int = 0

    @property
    def everywhere(self) -> bool:
        return self.sign == 0

    def value(self, k: float) -> float:
        return self.A * math.sin(k) ** 2 + (self.B + self.C * math.cos(k)) ** 2

    def contains(self, k: float) -> bool:
        if self.sign == 0:
            return True
        v = self.value(k)
        return v < 0 if self.sign < 0 else v > 0

    def intervals(self) -> list[tuple[float, float]]:
        """Open intervals of ``[0, 2 pi)`` making up the set."""
        if self.sign == 0:
            return [(0.0, 2 * math.pi)]
        # quadratic in c = cos k
        a2, a1, a0 = self.C**2 - self.A, 2 * self.B * self.C, self.B**2 + self.A
        cuts = [-1.0, 1.0]
        if abs(a2) > 1e-15:
            disc = a1 * a1 - 4 * a2 * a0
            if disc >= 0:
                sq = math.sqrt(disc)
                cuts += [(-a1 - sq) / (2 * a2), (-a1 + sq) / (2 * a2)]
        elif abs(a1) > 1e-15:
            cuts.append(-a0 / a1)
        cuts = sorted({min(1.0, max(-1.0, x)) for x in cuts})
        c_int = []
        for lo, hi in zip(cuts, cuts[1:]):
            if hi - lo < 1e-15:
                continue
            mid = 0.5 * (lo + hi)
            v = a2 * mid * mid + a1 * mid + a0
            if (v < 0) if self.sign < 0 else (v > 0):
                c_int.append((lo, hi))
        out = []
        for lo, hi in c_int:
            k_lo, k_hi = math.acos(hi), math.acos(lo)
            out.append((k_lo, k_hi))
            out.append((2 * math.pi - k_hi, 2 * math.pi - k_lo))
        out.sort()
        merged = []
        for iv in out:
            if merged and iv[0] <= merged[-1][1] + 1e-12:
                merged[-1] = (merged[-1][0], max(merged[-1][1], iv[1]))
            else:
                merged.append(iv)
        return merged

    def describe(self) -> str:
        if self.sign == 0:
            return "all k"
        rel = "<" if self.sign < 0 else ">"
        return f"{self.A:+.17g} sin(k)^2 + ({self.B:+.17g} {self.C:+.17g} cos(k))^2 {rel} 0"


@dataclass(frozen=True)
class NoSkinCondition:
    label: str
    k_range: KRange


def is_real_params(p: ModelParams, tol: float = 1e-12) -> bool:
    return all(abs(v.imag) <= tol * p.scale for v in p.as_tuple())


def no_skin_conditions(p: ModelParams) -> list[NoSkinCondition]:
    """Sufficient conditions for absence of the skin effect that hold for ``p``.

    Covers the vanishing-coupling families (``m = 0``, ``t1 = t2``,
    ``t1 = -t2``), the real-coupling ``d1 d2 < 0`` window and the three
    phase-locked families for complex couplings. An empty list means no
    sufficient condition applies; it does not prove the skin effect.
    """
    q = derived(p)
    sc = p.scale
    dd = p.d1 * p.d2
    out = []
    if _is_zero_scalar(p.m, sc):
        out.append(NoSkinCondition("m_zero", KRange()))
    if _is_zero_scalar(q.t_d, sc):
        out.append(NoSkinCondition("t1_eq_t2", KRange()))
    if _is_zero_scalar(q.t_s, sc):
        out.append(NoSkinCondition("t1_eq_minus_t2", KRange()))
    if is_real_params(p) and dd.real < 0 and not _is_zero_scalar(dd, sc * sc):
        out.append(
            NoSkinCondition("real_d1d2_negative", KRange(4 * dd.real, p.m.real, q.t_s.real, sign=-1))
        )
    if not _is_zero_scalar(q.t_s, sc) and not _is_zero_scalar(dd, sc * sc):
        rot = cmath.exp(-1j * cmath.phase(q.t_s))
        m_r, td_r, dd_r = p.m * rot, q.t_d * rot, dd * rot * rot
        m_ok = _is_zero_scalar(m_r, sc) or _is_real(m_r)
        if m_ok and _is_real(dd_r):
            mt, ats, add = m_r.real, abs(q.t_s), abs(dd)
            td_imag = _is_zero_scalar(td_r, sc) or _is_imag(td_r)
            td_real = _is_zero_scalar(td_r, sc) or _is_real(td_r)
            if td_imag and dd_r.real > 0:
                out.append(NoSkinCondition("phase_locked_imag_td_positive_dd", KRange()))
            if td_imag and dd_r.real < 0:
                out.append(NoSkinCondition("phase_locked_imag_td_negative_dd", KRange(-4 * add, mt, ats, sign=+1)))
            if td_real and dd_r.real < 0:
                out.append(NoSkinCondition("phase_locked_real_td_negative_dd", KRange(-4 * add, mt, ats, sign=-1)))
    return out


# --- per-eigenvalue classification ---


@dataclass
class SkinVerdict:
    k: float
    lam: complex
    on_circle_count: int | None
    skin: bool | None
    matched_condition: str | None = None
    direct_count: int | None = None
    special: bool = False
    singular_level: int | None = None
    ambiguous: bool = False

    @property
    def consistent(self) -> bool:
        return self.direct_count is None or self.on_circle_count == self.direct_count


def _special_point(p: ModelParams, lam: complex) -> bool:
    q = derived(p)
    tol = SPECIAL_RTOL * max(1.0, p.scale)
    return any(abs(lam - (-p.m + s * q.t_s)) <= tol for s in (1, -1))


def classify_skin(p: ModelParams, k: float, branch_sign: int = 1, conditions=None) -> SkinVerdict:
    """Skin-effect verdict for the eigenvalue ``lambda_{+/-}(k)`` of the periodic curve."""
    if branch_sign not in (1, -1):
        raise PreconditionError("branch_sign must be +1 or -1")
    q = derived(p)
    if abs(q.D2) <= 1e-14 * p.scale**2:
        raise SingularInputError("d1*d2 - t1*t2 = 0: bulk equation is not quartic")
    lp, lm = periodic_lambda(p, k)
    lam = lp if branch_sign == 1 else lm
    conds = no_skin_conditions(p) if conditions is None else conditions
    matched = next((c.label for c in conds if c.k_range.contains(k)), None)
    if _special_point(p, lam):
        return SkinVerdict(k, lam, None, None, matched, special=True)
    poly = Polynomial(bulk_quartic_coeffs(p, lam), trim=False)
    out = bistritz(poly)
    _, direct, _ = brute_force_counts(poly)
    count = out.beta_n
    return SkinVerdict(
        k,
        lam,
        count,
        count < 2,
        matched,
        direct_count=direct,
        singular_level=out.singular_level,
        ambiguous=out.ambiguous,
    )


def skin_sweep(p: ModelParams, n_k: int, offset: float = 0.5) -> list[SkinVerdict]:
    """Classify both bands on the grid ``k_j = 2 pi (j + offset) / n_k``."""
    conds = no_skin_conditions(p)
    out = []
    for j in range(n_k):
        k = 2 * math.pi * (j + offset) / n_k
        for sign in (1, -1):
            out.append(classify_skin(p, k, sign, conds))
    return out


def spot_check_isolated(p: ModelParams, lam, tol: float = UNIT_CIRCLE_TOL) -> bool:
    """Whether ``lam`` is an eigenvalue whose state escapes the skin effect.

    Requires at least two bulk roots on the unit circle and a Bistritz run
    that is singular at an even level (``T_1`` or ``T_3`` vanishing).
    """
    poly = Polynomial(bulk_quartic_coeffs(p, lam), trim=False)
    _, on, _ = brute_force_counts(poly, tol)
    if on < 2:
        return False
    try:
        out = bistritz(poly)
    except UnsupportedStructureError:
        return False
    return out.singular_level is not None and out.singular_level % 2 == 0 and out.beta_n >= 2
