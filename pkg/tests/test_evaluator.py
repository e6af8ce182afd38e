import math

import mpmath as mp
import numpy as np
import pytest

from dirichlet_xray.errors import NoFunctionalEquation, PoleAtOne, PoleInsideCircle, SpecParseError
from dirichlet_xray.evaluator import (
    DH_KAPPA,
    EMParams,
    davenport_heilbronn,
    derivative,
    dirichlet_l,
    evaluate,
    functional_equation_residual,
    hurwitz,
    hurwitz_zeta,
    parse_handle,
    reflection,
    riemann_zeta,
    root_number,
    truncated_general,
)
from dirichlet_xray.series import character_spec, character_table, partial_sum, zeta_spec

mp.mp.dps = 30


def chi5():
    return next(c for c in character_table(5) if c(2) == 1j)


def mp_dh(s):
    kap = (mp.sqrt(10 - 2 * mp.sqrt(5)) - 2) / (mp.sqrt(5) - 1)
    chi = [0, 1, 1j, -1j, -1]

    def L(c):
        return sum(c[r] * mp.zeta(s, mp.mpf(r) / 5) for r in range(1, 5)) * mp.power(5, -s)

    return complex((1 - 1j * kap) / 2 * L(chi) + (1 + 1j * kap) / 2 * L([mp.conj(x) for x in chi]))


def test_hurwitz_values():
    assert abs(hurwitz_zeta(2, 1).value - 1.6449340668482264) < 1e-9
    assert abs(hurwitz_zeta(0, 1).value + 0.5) < 1e-12
    assert abs(hurwitz_zeta(2, 0.5).value - math.pi**2 / 2) < 1e-6
    with pytest.raises(PoleAtOne):
        hurwitz_zeta(1, 0.3)


@pytest.mark.parametrize("s", [-3.5 + 7j, 0.3 + 150j, 0.5 + 600j, 2.0, 1.5 - 40j])
@pytest.mark.parametrize("a", [1.0, 0.2])
def test_hurwitz_error_bound_covers_mpmath(s, a):
    r = hurwitz_zeta(s, a)
    ref = complex(mp.zeta(mp.mpc(complex(s).real, complex(s).imag), a))
    assert abs(r.value - ref) <= r.error_bound


def test_zeta_values(zeta):
    assert abs(evaluate(zeta, 2).value - 1.6449340668) < 1e-9
    assert abs(evaluate(zeta, 40 + 5j).value - 1) <= 2 * 2.0**-40
    with pytest.raises(PoleAtOne):
        zeta(1 + 0j)
    # left half-plane via the functional equation
    for s in (-5 + 300j, -2.5 + 3j, -7.3 - 20j):
        ref = complex(mp.zeta(mp.mpc(s.real, s.imag)))
        assert abs(zeta(s) - ref) <= 1e-11 * abs(ref)


def test_dh_against_mpmath(dh):
    for s in (0.3 + 40j, 0.8 + 85.7j, 2 + 10j, -1 + 50j):
        ref = mp_dh(mp.mpc(s.real, s.imag))
        assert abs(dh(s) - ref) <= 1e-11 * max(1, abs(ref))


def test_dh_construction_constants():
    assert DH_KAPPA == pytest.approx(0.284079043840412, abs=1e-14)
    h = davenport_heilbronn()
    assert abs(h.fe.epsilon - 1) < 1e-14
    # root number of chi mod 5 has modulus one
    assert abs(abs(root_number(chi5())) - 1) < 1e-14


def test_dh_fe_magnitudes(dh):
    s = 0.3 + 40j
    lhs = abs(dh(s))
    rhs = abs(dh.M(s)) * abs(dh(reflection(s)))
    assert abs(lhs - rhs) <= 1e-8 * lhs


def test_reflection():
    assert reflection(0.86953 + 85j) == pytest.approx(0.13047 + 85j, abs=1e-15)
    assert reflection(0.5 + 14j) == 0.5 + 14j
    assert reflection(2 + 0j) == -1 + 0j


def test_fe_residuals(zeta, dh):
    assert functional_equation_residual(zeta, 0.3 + 14j) < 1e-8
    assert functional_equation_residual(dirichlet_l(chi5()), 0.4 + 30j) < 1e-8
    rng = np.random.default_rng(7)
    for s in rng.uniform(0.01, 0.99, 20) + 1j * rng.uniform(5, 100, 20):
        assert functional_equation_residual(dh, s) < 1e-7
    with pytest.raises(NoFunctionalEquation):
        functional_equation_residual(truncated_general(zeta_spec(), 10), 0.5 + 3j)


def test_l_functions_against_mpmath():
    for chi in character_table(5)[1:]:
        h = dirichlet_l(chi)
        for s in (0.5 + 20j, 1.5 - 3j, -2 + 8j):
            ref = complex(mp.dirichlet(mp.mpc(s.real, s.imag), [complex(v) for v in chi.values]))
            assert abs(h(s) - ref) <= 1e-11 * max(1, abs(ref))
    # principal character: zeta times (1 - 5^-s), pole at 1
    h0 = dirichlet_l(character_table(5)[0])
    assert h0.pole_at_one and h0.fe is None
    s = 0.5 + 20j
    assert abs(h0(s) - complex(mp.zeta(mp.mpc(0.5, 20))) * (1 - 5 ** (-s))) < 1e-11


def test_derivatives(zeta):
    d = derivative(zeta, 2)
    assert abs(d.value + 0.93754825431584) < 1e-6
    assert abs(derivative(hurwitz(1.0), 2).value - d.value) < 1e-9
    assert abs(derivative(zeta, 2, method="analytic").value + 0.9375482543158437) < 1e-12
    const = truncated_general(zeta_spec(), 1)
    assert abs(derivative(const, 0.3 + 2j).value) < 1e-12
    assert derivative(const, 0.3 + 2j, method="analytic").value == 0
    with pytest.raises(PoleInsideCircle):
        derivative(zeta, 1 + 1e-3j)
    # Cauchy vs central finite differences at 20 points
    rng = np.random.default_rng(3)
    for s in rng.uniform(0.05, 0.95, 20) + 1j * rng.uniform(5, 100, 20):
        h = 1e-5
        fd = (zeta(s + h) - zeta(s - h)) / (2 * h)
        c = derivative(zeta, s).value
        assert abs(c - fd) <= 1e-6 * abs(c)
        assert abs(zeta.value_and_derivative(s)[1] - c) <= 1e-8 * abs(c)


def test_second_derivative_mpmath(zeta):
    s = 0.5 + 30j
    ref = complex(mp.zeta(mp.mpc(0.5, 30), 1, 2))
    assert abs(derivative(zeta, s, order=2).value - ref) < 1e-6 * abs(ref)


def test_schwarz_symmetry(zeta):
    for s in (0.3 + 17j, 2 + 5j, -3 + 44j):
        assert abs(zeta(s.conjugate()) - zeta(s).conjugate()) <= 1e-12 * abs(zeta(s))


def test_series_consistency(zeta):
    for s in (3 + 0j, 3.5 + 40j, 4 - 7j):
        assert abs(zeta(s) - partial_sum(zeta_spec(), s, 10**6)) <= 1e-11
    L = dirichlet_l(chi5())
    assert abs(L(3 + 2j) - partial_sum(character_spec(chi5()), 3 + 2j, 10**6)) <= 1e-11


def test_em_stability(dh):
    rng = np.random.default_rng(11)
    s = rng.uniform(-1, 2, 50) + 1j * rng.uniform(-300, 300, 50)
    v, err, _ = dh.evaluate_many(s)
    w = dh.with_params(EMParams().refined())(s)
    assert np.all(np.abs(v - w) <= err)


def test_right_half_plane_limit(zeta, dh):
    for sigma in (20.0, 25.0, 40.0):
        for t in (-100.0, 0.0, 37.0, 100.0):
            s = complex(sigma, t)
            assert abs(zeta(s) - 1) <= 2 * 2.0**-sigma
            assert abs(dh(s) - 1) <= 2 * 2.0**-sigma


def test_truncated_general_flags():
    h = truncated_general(character_spec(chi5()).with_sigma_c(10**4), 100)
    assert h.evaluate(0.2 + 1j).truncation_only
    assert not h.evaluate(2 + 1j).truncation_only
    assert abs(h(2 + 1j) - partial_sum(character_spec(chi5()), 2 + 1j, 100)) < 1e-15


def test_parse_handle():
    assert parse_handle("zeta").descriptor == "zeta"
    assert parse_handle("dh").kind == "dh"
    assert abs(parse_handle("hurwitz:0.5")(2) - math.pi**2 / 2) < 1e-9
    a = parse_handle("L:5:2=i")
    assert abs(a(0.5 + 20j) - dirichlet_l(chi5())(0.5 + 20j)) < 1e-14
    for bad in ("nope", "hurwitz:x", "L:5:2=7"):
        with pytest.raises((SpecParseError, ValueError)):
            parse_handle(bad)
