import cmath
import math

import numpy as np
import pytest
import scipy.linalg

from nhkitaev.exceptions import NumericalFailure, PreconditionError, StructureError
from nhkitaev.finite import (
    assemble_bdg,
    deteqn_lhs,
    deteqn_residual,
    deteqn_summed_form,
    eigensolve,
    localization,
    pairing_residual,
    refine_eigenvalue,
    sine_ratio,
    spectrum_closed_form_d1d2_zero,
)
from nhkitaev.model import ModelParams

from conftest import P_COMPLEX_HOP, P_REAL_MIXED, P_MASSLESS, P_REAL_SKIN, random_d1d2_zero, random_params
from oracles import bdg_loops, multiset_distance

EQ_HOP = ModelParams(0.5, 1, 1, 0.75, 0.75)


def test_assemble_l1_is_diag():
    p = ModelParams(0.3 + 1j, 1, 2, 3, 4)
    assert np.array_equal(assemble_bdg(p, 1), np.diag([p.m, -p.m]))


def test_assemble_l2_blocks():
    p = ModelParams(1, 2, 3, 4, 5)
    h = assemble_bdg(p, 2)
    expected = np.array(
        [
            [1, 0, 2, 4],
            [0, -1, -5, -3],
            [3, -4, 1, 0],
            [5, -2, 0, -1],
        ],
        dtype=complex,
    )
    assert np.array_equal(h, expected)


def test_assemble_matches_loop_oracle(rng):
    for L in (1, 2, 3, 7, 20):
        p = random_params(rng)
        assert np.array_equal(assemble_bdg(p, L), bdg_loops(p, L))


def test_assemble_hermitian_limit():
    t, d = 1.3 * cmath.exp(0.4j), 0.7 * cmath.exp(-1.1j)
    p = ModelParams(0.8, t, t.conjugate(), d, d.conjugate())
    h = assemble_bdg(p, 9)
    assert np.allclose(h, h.conj().T)


def test_assemble_rejects_bad_length():
    with pytest.raises(PreconditionError):
        assemble_bdg(P_REAL_MIXED, 0)


def test_eigensolve_l1():
    dec = eigensolve(assemble_bdg(ModelParams(0.7, 1, 1, 1, 1), 1))
    assert sorted(dec.values.real) == pytest.approx([-0.7, 0.7])
    assert dec.trusted


def test_eigensolve_small_closed_form_case():
    dec = eigensolve(assemble_bdg(ModelParams(0, 1, 1, 1, 0), 3))
    expected = [math.sqrt(2), 0, -math.sqrt(2)] * 2
    assert multiset_distance(dec.values, expected) < 1e-7
    assert len(dec.values) == 6


def test_eigensolve_vectors_are_eigenvectors():
    h = assemble_bdg(P_REAL_MIXED, 12)
    dec = eigensolve(h, want_vectors=True)
    for j in range(dec.values.size):
        v = dec.vectors[:, j]
        assert np.linalg.norm(v) == pytest.approx(1)
        assert np.linalg.norm(h @ v - dec.values[j] * v) < 1e-10 * np.abs(dec.values).max()


def test_eigensolve_failure_is_explicit(monkeypatch):
    def boom(*a, **k):
        raise np.linalg.LinAlgError("no convergence")

    monkeypatch.setattr(scipy.linalg, "eigvals", boom)
    with pytest.raises(NumericalFailure) as err:
        eigensolve(assemble_bdg(P_REAL_MIXED, 3))
    assert err.value.diagnostics["size"] == 6


def test_eigensolve_rejects_non_square():
    with pytest.raises(PreconditionError):
        eigensolve(np.zeros((2, 3)))


def test_pairing_residual_basic():
    assert pairing_residual([1, -1, 2j, -2j]) == 0
    assert pairing_residual([1, -1.1]) == pytest.approx(0.1)
    assert pairing_residual([0.0]) == 0


@pytest.mark.parametrize(
    "p, lengths",
    [(P_COMPLEX_HOP, (10, 50, 100)), (P_REAL_MIXED, (10, 50, 100)), (P_MASSLESS, (10, 50, 100)), (P_REAL_SKIN, (10, 30, 50))],
    ids=["complex-hop", "real-mixed", "massless", "real-skin"],
)
def test_particle_hole_pairing_trusted_regime(p, lengths):
    for L in lengths:
        dec = eigensolve(assemble_bdg(p, L))
        assert dec.pairing_residual < 1e-6 * np.abs(dec.values).max()
        assert dec.trusted


def test_real_skin_set_loses_pairing_at_l100():
    # every state of this chain is skin-localised; double precision gives out well before L = 100
    dec = eigensolve(assemble_bdg(P_REAL_SKIN, 100))
    assert dec.pairing_residual > 1e-3 * np.abs(dec.values).max()
    assert dec.precision_flag == "suspect"


def test_closed_form_examples():
    assert multiset_distance(
        spectrum_closed_form_d1d2_zero(ModelParams(0, 1, 1, 0, 0), 3), [math.sqrt(2), 0, -math.sqrt(2)] * 2
    ) < 1e-15
    vals = spectrum_closed_form_d1d2_zero(ModelParams(0.4, 0, 1, 1, 0), 5)
    assert multiset_distance(vals, [0.4] * 5 + [-0.4] * 5) < 1e-15
    vals = spectrum_closed_form_d1d2_zero(ModelParams(1, 4, 1, 0, 2), 1)
    assert multiset_distance(vals, [1, -1]) < 1e-15
    with pytest.raises(PreconditionError):
        spectrum_closed_form_d1d2_zero(P_REAL_MIXED, 3)


def test_closed_form_matches_eigensolve(rng):
    for _ in range(20):
        p = random_d1d2_zero(rng)
        L = int(rng.integers(1, 51))
        vals = eigensolve(assemble_bdg(p, L)).values
        scale = max(1.0, np.abs(vals).max())
        assert multiset_distance(vals, spectrum_closed_form_d1d2_zero(p, L)) < 1e-8 * scale


def test_sine_ratio_examples():
    for x in (0.3, 2j, cmath.exp(0.7j)):
        assert sine_ratio(1, x) == 1
    a = 0.9
    assert sine_ratio(2, cmath.exp(1j * a)) == pytest.approx(2 * math.cos(a))
    assert sine_ratio(5, cmath.exp(1j * math.pi / 3)) == pytest.approx(-1)
    with pytest.raises(PreconditionError):
        sine_ratio(3, 0)


def test_sine_ratio_chebyshev():
    from scipy.special import eval_chebyu

    for a in np.linspace(0.05, 3.1, 40):
        x = cmath.exp(1j * a)
        for L in range(1, 51):
            assert sine_ratio(L, x) == pytest.approx(eval_chebyu(L - 1, math.cos(a)), abs=1e-9)


def test_deteqn_residual_at_eigenvalues():
    L = 8
    vals = eigensolve(assemble_bdg(EQ_HOP, L)).values
    for lam in vals:
        cos_res, det_res = deteqn_residual(EQ_HOP, L, lam)
        assert abs(cos_res) < 1e-7
        assert abs(det_res) < 1e-7


def test_deteqn_residual_between_eigenvalues():
    L = 8
    vals = np.sort(eigensolve(assemble_bdg(EQ_HOP, L)).values.real)
    mid = 0.5 * (vals[-1] + vals[-2])
    assert abs(deteqn_residual(EQ_HOP, L, mid)[1]) > 1e-3


def test_deteqn_requires_equal_hopping():
    with pytest.raises(PreconditionError):
        deteqn_residual(P_REAL_MIXED, 5, 1.0)


def test_deteqn_structural_error_when_roots_unpaired(monkeypatch):
    import nhkitaev.finite as fin

    class Fake:
        xs = np.array([3.0, 2.0, 0.7, 0.1])

    monkeypatch.setattr(fin, "bulk_solve", lambda p, lam: Fake())
    with pytest.raises(StructureError):
        deteqn_residual(EQ_HOP, 5, 1.0)


def test_equal_hopping_eigenvalues_and_refinement(rng):
    for _ in range(5):
        m, t, d1, d2 = rng.normal(size=4) + 1j * rng.normal(size=4)
        p = ModelParams(m, t, t, d1, d2)
        L = int(rng.integers(2, 21))
        vals = eigensolve(assemble_bdg(p, L)).values
        for lam in vals:
            assert abs(deteqn_residual(p, L, lam)[1]) < 1e-6
            assert abs(refine_eigenvalue(p, L, lam) - lam) < 1e-6 * max(1, abs(lam))


def test_summed_form_matches_term_sum(rng):
    for _ in range(50):
        p = ModelParams(*(rng.normal(size=2) + 1j * rng.normal(size=2)), 0, 0, 0)
        t = complex(rng.normal(), rng.normal())
        p = ModelParams(p.m, t, t, complex(*rng.normal(size=2)), complex(*rng.normal(size=2)))
        a, b = complex(*rng.uniform(0, 3, 2)), complex(*rng.uniform(0, 3, 2))
        for L in (1, 10):
            ref = deteqn_lhs(p, L, cmath.exp(1j * a), cmath.exp(1j * b))
            got = deteqn_summed_form(p, L, a, b)
            assert not got.removable_singularity
            assert abs(got.value - ref) <= 1e-9 * max(1.0, abs(ref))


def test_summed_form_flags_coincident_cosines():
    got = deteqn_summed_form(EQ_HOP, 6, 0.4, -0.4)
    assert got.removable_singularity and got.value is None


def test_localization_constant_vector():
    rep = localization(np.ones(40), 20)
    assert rep.verdict == "extended"
    assert abs(rep.decay_fit_rate) < 1e-12
    assert rep.boundary_mass_left + rep.boundary_mass_right <= 1


def test_localization_exponential_profile():
    L = 60
    n = np.arange(1, L + 1)
    v = np.zeros(2 * L)
    v[0::2] = 0.8**n
    v[1::2] = 0.5 * 0.8**n
    rep = localization(v, L)
    assert rep.verdict == "skin_left"
    assert rep.decay_fit_rate == pytest.approx(math.log(0.8))
    assert rep.fit_quality == pytest.approx(1)
    rep = localization(np.concatenate([v[::-1][1::2], v[::-1][0::2]]).reshape(2, L).T.ravel(), L)
    assert rep.verdict == "skin_right"


def test_localization_rejects_bad_vectors():
    with pytest.raises(PreconditionError):
        localization(np.zeros(10), 5)
    with pytest.raises(PreconditionError):
        localization(np.ones(9), 5)


def test_localization_real_mixed_states():
    L = 100
    dec = eigensolve(assemble_bdg(P_REAL_MIXED, L), want_vectors=True)
    i = np.argmin(np.abs(dec.values - 3.0182))
    assert abs(dec.values[i] - 3.0182) < 1e-3
    rep = localization(dec.vectors[:, i], L)
    assert rep.verdict.startswith("skin")
    assert rep.fit_quality > 0.95
    i = np.argmin(np.abs(dec.values - 4.3949j))
    assert abs(dec.values[i] - 4.3949j) < 1e-3
    assert localization(dec.vectors[:, i], L).verdict == "extended"
