import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tcsign import fock, nssd


@pytest.fixture(scope="module")
def synthesized():
    return {d: nssd.max_success_probability(d)[1] for d in (2, 3, 4, 5)}


def test_v11_values():
    assert nssd.v11_of(1) == pytest.approx(1.0)
    assert nssd.v11_of(2) == pytest.approx(1 - math.sqrt(2), abs=1e-12)
    assert nssd.v11_of(3) == pytest.approx(2 - math.sqrt(3), abs=1e-12)


def test_u_sk_phases():
    assert [nssd.u_sk(m) for m in range(6)] == [1, 1, -1, -1, 1, 1]
    m = np.arange(12)
    assert np.allclose(nssd.u_sk(m), np.exp(1j * np.pi * m * (m - 1) / 2))


def test_beta_coefficients_d2():
    b = nssd.beta_coefficients(2, 0.5)
    assert b[0] == 0.5
    assert b[1] == pytest.approx(0.5 * math.sqrt(2))


def test_d2_reproduces_klm_coefficients():
    alphas = nssd.alphas_from_betas(nssd.v11_of(2), nssd.beta_coefficients(2, 0.5), 6)
    assert np.allclose(alphas, [fock.klm_nss_alpha(n) for n in range(7)], atol=1e-12)


@pytest.mark.parametrize("d", range(2, 8))
def test_self_kerr_matching(d):
    a = nssd.normalized_alphas(d, d)
    assert np.allclose(a, nssd.u_sk(np.arange(d + 1)), atol=1e-9)


def test_higher_fock_states_suppressed():
    a = np.abs(nssd.normalized_alphas(5, 12))
    assert np.all(np.diff(a[6:]) < 0)


@pytest.mark.parametrize("d", range(2, 6))
def test_double_sum_equivalence(d):
    single = nssd.normalized_alphas(d, 10)
    for n in range(11):
        assert nssd.nssd_double_sum(d, n) == pytest.approx(single[n], abs=1e-9)


def test_lambdas_d2_and_d3():
    assert np.allclose(nssd.solve_lambdas(2), [math.sqrt(2)])
    lam = nssd.solve_lambdas(3)
    b = nssd.beta_coefficients(3, 1.0)
    assert lam.sum() == pytest.approx(b[1])
    assert lam[0] * lam[1] == pytest.approx(b[2] / 2)
    assert abs(lam[0]) >= abs(lam[1])


@pytest.mark.parametrize("d", range(2, 8))
def test_lambdas_independent_of_alpha0_and_sorted(d):
    lam = nssd.solve_lambdas(d, 1.0)
    assert np.allclose(lam, nssd.solve_lambdas(d, 0.013))
    mags = np.abs(lam)
    assert np.all(np.diff(mags) <= 1e-12)
    e = nssd.elementary_symmetric(lam)
    b = nssd.beta_coefficients(d, 1.0)
    for k in range(d):
        assert math.factorial(k) * e[k] == pytest.approx(b[k], abs=1e-8)


@given(st.permutations([0.3 + 1j, -2.0, 0.5j, 1.1]))
def test_root_multiset_is_order_independent(roots):
    a = nssd._sort_roots(roots)
    b = nssd._sort_roots([0.3 + 1j, -2.0, 0.5j, 1.1])
    assert np.array_equal(a, b)


def test_vmat_d2_layout():
    lam = nssd.solve_lambdas(2)
    v = nssd.assemble_vmat(2, 0.5, 0.7, lam)
    assert np.allclose(v, [[nssd.v11_of(2), 0.7], [0.5 * lam[0] / 0.7, 0.5]])


def test_vmat_requires_positive_x():
    with pytest.raises(ValueError):
        nssd.assemble_vmat(3, 0.1, 0.0, nssd.solve_lambdas(3))


@pytest.mark.parametrize("d", [3, 4, 5])
def test_vmat_general_layout(d):
    lam = nssd.solve_lambdas(d)
    x, a0 = 0.4, 0.01
    v = nssd.assemble_vmat(d, a0, x, lam)
    assert v[0, 0] == nssd.v11_of(d)
    assert np.allclose(v[0, 1:], x)
    assert v[d - 1, d - 1] == pytest.approx(a0 / x ** (d - 2))
    assert v[d - 1, 0] == pytest.approx(a0 * lam[0] / x ** (d - 1))


def test_spec_invariants_and_success_probabilities(synthesized):
    for d, spec in synthesized.items():
        spec.check()
        assert spec.betas[0] == spec.alpha0
        assert np.linalg.norm(spec.vmat, 2) <= 1 + 1e-10
        assert 0.5 <= spec.p_d / (25 * 10.0 ** -d) <= 2.0
        nssd.check_self_kerr(spec)


def test_p2_is_quarter(synthesized):
    assert synthesized[2].p_d == pytest.approx(0.25, rel=1e-5)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_dilated_interferometer_reproduces_alphas(synthesized, d):
    spec = synthesized[d]
    heralded = nssd.heralded_alphas(spec, d + 2)
    analytic = spec.alpha_coefficients(d + 2)
    assert np.allclose(heralded, analytic, atol=1e-8)


def test_d2_dilation_matches_klm_up_to_phase(synthesized):
    heralded = nssd.heralded_alphas(synthesized[2], 4)
    klm = np.array([fock.klm_nss_alpha(n) for n in range(5)])
    phase = heralded[0] / klm[0]
    assert abs(abs(phase) - 1) < 1e-6
    assert np.allclose(heralded, phase * klm, atol=1e-6)


def test_record_export(synthesized):
    rec = synthesized[3].to_record()
    keys = [line.split(":")[0] for line in rec.splitlines()]
    assert keys == ["d", "alpha0", "p_d", "v11", "x", "lambdas", "betas", "vmat"]
    assert len(rec.splitlines()[-1].split()) == 1 + 9


def test_feasibility_is_monotone_in_alpha0():
    lam = nssd.solve_lambdas(3)
    x = nssd.max_success_probability(3)[1].x
    norms = [np.linalg.norm(nssd.assemble_vmat(3, a, x, lam), 2) for a in (1e-4, 1e-3, 1e-2)]
    assert all(n <= 1 + 1e-10 for n in norms)


def test_synthesis_domain():
    with pytest.raises(ValueError):
        nssd.max_success_probability(8)
    with pytest.raises(ValueError):
        nssd.max_success_probability(1)
