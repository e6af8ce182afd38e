import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirichlet_xray.errors import FactorizationBoundError, SpecParseError, VanishingFactor
from dirichlet_xray.series import (
    ExplicitPrimeExponents,
    LogRule,
    PrimeCoefficientMap,
    SeriesSpec,
    abscissa_of_convergence,
    character_spec,
    character_table,
    coefficient,
    coefficients_upto,
    euler_partial_product,
    exponent,
    exponents_upto,
    factorize,
    parse_spec,
    partial_sum,
    primes_up_to,
    zeta_spec,
)


def chi5():
    return next(c for c in character_table(5) if c(2) == 1j)


def test_character_coefficients():
    spec = character_spec(chi5())
    assert coefficient(spec, 3) == -1j
    assert coefficient(spec, 10) == 0
    assert coefficient(zeta_spec(), 12) == 1


def test_exponents():
    assert exponent(zeta_spec(), 12) == pytest.approx(math.log(12), abs=1e-15)
    assert exponent(zeta_spec(), 12) == pytest.approx(2 * exponent(zeta_spec(), 2) + exponent(zeta_spec(), 3), abs=1e-15)
    assert exponent(zeta_spec(), 1) == 0
    spec = SeriesSpec(exponents=ExplicitPrimeExponents({2: 1.0, 3: 1.7}))
    assert exponent(spec, 6) == pytest.approx(2.7, abs=1e-15)
    lam = exponents_upto(spec, 12)
    assert lam[12] == pytest.approx(2 * 1.0 + 1.7)
    assert lam[5] == pytest.approx(math.log(5))


def test_negative_exponent_rejected():
    with pytest.raises(ValueError):
        ExplicitPrimeExponents({2: -1.0})


def test_factorization():
    assert factorize(360) == [(2, 3), (3, 2), (5, 1)]
    assert factorize(1) == []
    with pytest.raises(FactorizationBoundError):
        factorize(10**6 + 3, bound=1000)
    assert list(primes_up_to(30)) == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def test_partial_sums():
    # oracle: direct 10-term sum
    assert partial_sum(zeta_spec(), 2, 10) == pytest.approx(sum(1 / n**2 for n in range(1, 11)), abs=1e-15)
    assert abs(partial_sum(zeta_spec(), 2, 10) - 1.549768) < 1e-6
    assert partial_sum(character_spec(chi5()), 0.3 + 2j, 1) == 1
    v = partial_sum(zeta_spec(), 40 + 5j, 10**4)
    assert abs(v - 1) <= 2 * 2.0**-40


def test_euler_products():
    assert euler_partial_product(zeta_spec(), 2, 3) == pytest.approx(1.5, abs=1e-15)
    assert euler_partial_product(zeta_spec(), 2, 1) == 1
    # Euler product at s=3 vs the series value (mpmath)
    assert abs(euler_partial_product(zeta_spec(), 3, 10**4) - 1.2020569031595942) < 1e-8


def test_vanishing_factor():
    spec = SeriesSpec(PrimeCoefficientMap({2: 2.0}))
    # 1 - 2 * 2^-s vanishes at s = 1
    with pytest.raises(VanishingFactor) as info:
        euler_partial_product(spec, 1.0, 10)
    assert info.value.p == 2


def test_character_tables():
    t5 = character_table(5)
    assert len(t5) == 4 and sum(c(2) == 1j for c in t5) == 1
    t1 = character_table(1)
    assert len(t1) == 1 and all(t1[0](n) == 1 for n in range(1, 20))
    t4 = character_table(4)
    assert len(t4) == 2
    assert [c(3) for c in t4 if not c.is_principal] == [-1]
    t8 = character_table(8)
    assert len(t8) == 4
    with pytest.raises(ValueError):
        character_table(15)


@pytest.mark.parametrize("q", [3, 4, 5, 7, 8, 9, 11])
def test_character_axioms(q):
    phi = sum(math.gcd(a, q) == 1 for a in range(1, q))
    for chi in character_table(q):
        assert chi(1) == 1
        for m in range(1, 2 * q):
            assert (chi(m) == 0) == (math.gcd(m, q) > 1)
            if chi(m) != 0:
                assert abs(chi(m) ** phi - 1) < 1e-12
            for n in range(1, 2 * q):
                assert abs(chi(m * n) - chi(m) * chi(n)) < 1e-12


def test_primitivity():
    flags = [c.is_primitive() for c in character_table(5)]
    assert flags == [False, True, True, True]
    # the non-principal characters mod 8: 8.1 is induced from mod 4
    assert [c.is_primitive() for c in character_table(8)] == [False, False, True, True]


def test_abscissa():
    assert abs(abscissa_of_convergence(zeta_spec(), 10**5).estimate - 1.0) <= 0.01
    assert abscissa_of_convergence(character_spec(chi5()), 10**5).estimate <= 0.02
    ident = SeriesSpec(PrimeCoefficientMap(default=lambda p: float(p)), name="n")
    est = abscissa_of_convergence(ident, 10**5)
    assert abs(est.estimate - 2.0) <= 0.01
    # the plain windowed ratio is biased by the constant in n^2/2
    assert est.raw < 1.95


def test_parse_spec():
    spec = parse_spec("kind=character\nmodulus=5\ncharacter_index=1\n# comment\n2=0,1\n")
    assert spec.coefficients.at_prime(2) == 1j
    spec = parse_spec("kind=custom\ndefault=1\nlambda.2=1.0\nlambda.3=1.7\n")
    assert exponent(spec, 6) == pytest.approx(2.7)
    for bad in ("kind=zeta\n4=1,0\n", "nonsense", "kind=weird\n", "kind=character\nmodulus=5\ncharacter_index=9\n"):
        with pytest.raises(SpecParseError):
            parse_spec(bad)


_idx = st.integers(min_value=1, max_value=3000)


@settings(max_examples=300, deadline=None)
@given(_idx, _idx)
def test_total_multiplicativity(j, k):
    for spec in (zeta_spec(), character_spec(chi5()), SeriesSpec(PrimeCoefficientMap({3: 0.5 + 0.5j}, default=-1.0))):
        assert abs(coefficient(spec, j * k) - coefficient(spec, j) * coefficient(spec, k)) <= 1e-14


@settings(max_examples=300, deadline=None)
@given(_idx, _idx)
def test_exponent_additivity(j, k):
    for spec in (zeta_spec(), SeriesSpec(exponents=ExplicitPrimeExponents({2: 0.9, 7: 3.1}))):
        assert abs(exponent(spec, j * k) - exponent(spec, j) - exponent(spec, k)) <= 1e-12


def test_vectorized_tables_match_scalar():
    spec = SeriesSpec(PrimeCoefficientMap({3: 0.5 + 0.5j}, default=character_table(7)[2]), ExplicitPrimeExponents({2: 0.9}))
    a = coefficients_upto(spec, 500)
    lam = exponents_upto(spec, 500)
    for n in range(1, 501):
        assert abs(a[n] - coefficient(spec, n)) < 1e-14
        assert abs(lam[n] - exponent(spec, n)) < 1e-12
    assert np.all(np.diff(exponents_upto(zeta_spec(), 100)[1:]) > 0)
    assert isinstance(zeta_spec().exponents, LogRule)
