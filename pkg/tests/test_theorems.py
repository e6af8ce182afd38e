import math

import numpy as np
import pytest

from dirichlet_xray.errors import CollapsedToIdentity, NoRootOnSegment
from dirichlet_xray.series import character_spec, character_table, partial_sum, zeta_spec
from dirichlet_xray.theorems import (
    TheoremReport,
    euler_product_residual,
    factor_identity_residual,
    involution_probes,
    ratio_product_trace,
    segment_derivative_zero,
    sieve_step_check,
    solve_conjugate_point,
)


def chi5():
    return next(c for c in character_table(5) if c(2) == 1j)


def test_euler_residual_trend():
    r3 = euler_product_residual(zeta_spec(), 3, 10**3)
    r4 = euler_product_residual(zeta_spec(), 3, 10**4)
    assert r4.residual < r3.residual
    # the omitted primes dominate: sum_{p > P} p^-3 is about 7e-8 at P = 1000
    assert r3.residual <= r3.tail_estimate
    assert r4.residual <= r4.tail_estimate
    assert euler_product_residual(character_spec(chi5()), 2 + 7j, 10**4).residual < 1e-6


def test_euler_residual_decreasing_l():
    spec = character_spec(chi5())
    for s in (3 + 0j, 2 + 7j):
        a = euler_product_residual(spec, s, 100).residual
        b = euler_product_residual(spec, s, 1000).residual
        assert b < a


def test_sieve_steps():
    assert sieve_step_check(zeta_spec(), 3, 0, 10**4).residual == 0
    for k in (1, 2, 3):
        for N in (10**3, 10**4):
            assert sieve_step_check(zeta_spec(), 3, k, N).excess <= 0
    # residual shrinks with N
    assert sieve_step_check(zeta_spec(), 3, 1, 10**4).residual < sieve_step_check(zeta_spec(), 3, 1, 10**3).residual
    # brute-force oracle for k = 1
    odd = sum(n**-3.0 for n in range(1, 1001, 2))
    full = partial_sum(zeta_spec(), 3, 1000)
    assert abs((1 - 2**-3) * full - odd) == pytest.approx(sieve_step_check(zeta_spec(), 3, 1, 1000).residual, rel=1e-6)
    assert sieve_step_check(character_spec(chi5()), 2.5 + 3j, 2, 10**4).excess <= 0


def test_factor_identity_random():
    rng = np.random.default_rng(5)
    primes = [2, 3, 5, 7, 11, 13, 101, 997]
    for _ in range(100):
        p = int(rng.choice(primes))
        a = complex(np.exp(2j * np.pi * rng.uniform()))
        assert factor_identity_residual(a, math.log(p), rng.uniform(0.5, 1.0), rng.uniform(-100, 100)) <= 1e-12
    assert factor_identity_residual(1.0, math.log(2), 0.75, 10) <= 1e-12


def test_ratio_trace_identity():
    for spec in (zeta_spec(), character_spec(chi5())):
        tr = ratio_product_trace(spec, 0.5, 23.7, [10, 100, 1000, 10000])
        assert all(abs(v - 1) <= 1e-15 for v in tr.values)
        assert tr.envelope == [0.0] * 4


def test_ratio_trace_exploratory(tmp_path):
    tr = ratio_product_trace(zeta_spec(), 0.75, 20, [100, 1000, 10000])
    assert tr.prime_cutoffs == [100, 1000, 10000]
    assert tr.envelope[0] == pytest.approx(0.5 * sum(math.log(p) for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97)))
    # direct product oracle
    direct = 1 + 0j
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97):
        direct *= (1 - p ** -(0.25 + 20j)) / (1 - p ** -(0.75 + 20j))
    assert abs(tr.values[0] - direct) <= 1e-12 * abs(direct)
    path = tr.write_csv(tmp_path / "trace.csv")
    assert path.read_text().startswith("cutoff,sigma,t,re_P,im_P,abs_P,envelope,log_gap")


def test_report_line():
    r = TheoremReport("demo", {"x": 1}, 1e-9, 1e-8)
    assert r.passed and r.line().endswith("PASS")
    r = TheoremReport("demo", {"x": 1}, 1e-7, 1e-8)
    assert not r.passed and "tol=1.00000000000E-08" in r.line()


def test_conjugate_point(dh, dh_scan):
    _, off, _ = dh_scan
    p = off[0]
    w = solve_conjugate_point(dh, p.right.location)
    assert abs(w - p.left.location) <= 1e-8
    with pytest.raises(CollapsedToIdentity):
        solve_conjugate_point(dh, p.right.location, seed=p.right.location + 1e-3)


def test_involution(dh, dh_scan):
    _, off, _ = dh_scan
    for p in off:
        probes = involution_probes(dh, p.right.location)
        assert len(probes) == 20
        assert max(q.involution_error for q in probes) <= 1e-7
        assert max(q.derivative_product_error for q in probes) <= 1e-5
        assert all(q.contraction_consistent for q in probes)


def test_segment_derivative_zero_finding(dh, dh_scan):
    """The derivative zero nearest each pair sits a few 1e-3 above or below the segment."""
    _, off, _ = dh_scan
    for p in off:
        try:
            exp = segment_derivative_zero(dh, p)
        except NoRootOnSegment as exc:
            exp = exc.experiment
        _, d = dh.value_and_derivative(exp.s_tau0)
        assert abs(d) <= 1e-6
        assert exp.re_s < 0.5
        assert exp.segment_min_deriv > 0
    with pytest.raises(ValueError):
        segment_derivative_zero(dh, type(p)(p.left, p.left, 0.0))
