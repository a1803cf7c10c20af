import math
from fractions import Fraction

import pytest

from rumorqsd.asymptotics import (
    deterministic_curve,
    dk_boundary_exact,
    dk_boundary_factored,
    dk_boundary_gauss,
    dk_boundary_rational,
    final_proportion,
    mt_boundary,
    mt_boundary_exact,
    mt_boundary_gauss,
    mt_boundary_rational,
)
from rumorqsd.chain import DomainError, State, build_chain, build_state_space
from rumorqsd.solver import qsd_dp, qsd_weights_exact


def test_mt_examples():
    assert mt_boundary_rational(4, 2) == Fraction(3, 4)
    assert float(mt_boundary_exact(4, 2)) == pytest.approx(0.75, rel=1e-14)
    for n in (3, 17, 150):
        assert float(mt_boundary_exact(n, n - 1)) == pytest.approx(1.0, rel=1e-13)


@pytest.mark.parametrize("n", [2, 5, 13, 30])
def test_mt_rational_equals_dp(n):
    spec = build_chain("mt", n, "modified")
    w = qsd_weights_exact(spec, build_state_space(spec))
    for x in range(n):
        assert w[State(x, n + 1 - x)] == mt_boundary_rational(n, x)


def test_mt_n200_matches_dp():
    spec = build_chain("mt", 200, "modified")
    res = qsd_dp(spec, build_state_space(spec))
    for x in range(200):
        assert float(res.weight((x, 201 - x)) / mt_boundary_exact(200, x)) == pytest.approx(1.0, rel=1e-9)


def test_mt_gauss():
    assert mt_boundary_gauss(200, 200) == 1.0
    assert mt_boundary_gauss(200, 180) == pytest.approx(math.exp(-1.0), rel=1e-14)


def test_mt_gauss_trend():
    # at xbar = 1 - c/sqrt(N) the normalized exact weight approaches the Gaussian
    errs = []
    for n in (50, 100, 200):
        x = round(n - math.sqrt(n))
        errs.append(mt_boundary(n, x).relerr)
    assert errs[0] > errs[1] > errs[2]


def test_mt_vanishes_off_peak():
    c = 1.0
    for n in (100, 400, 1600):
        x = n // 2
        assert mt_boundary_exact(n, x).log() < -n * 0.25 / 2 + c * math.log(n)


@pytest.mark.parametrize("n, x, value", [(2, 1, 4), (2, 0, 8)])
def test_dk_examples(n, x, value):
    assert dk_boundary_rational(n, x) == value
    assert float(dk_boundary_exact(n, x)) == pytest.approx(value, rel=1e-13)


@pytest.mark.parametrize("n", [2, 6, 20, 30])
def test_dk_printed_form_is_twice_dp(n):
    spec = build_chain("dk", n, "modified")
    w = qsd_weights_exact(spec, build_state_space(spec))
    for x in range(n):
        assert dk_boundary_rational(n, x) == 2 * w[State(x, n + 1 - x)]


def test_dk_identity():
    for n, x in ((n, x) for n in range(2, 301) for x in range(n)):
        a, b = dk_boundary_exact(n, x), dk_boundary_factored(n, x)
        assert abs(float(a / b) - 1.0) < 1e-12


def test_dk_float_matches_rational():
    for x in range(25):
        assert float(dk_boundary_exact(25, x) / dk_boundary_exact(25, 0)) == pytest.approx(
            float(dk_boundary_rational(25, x) / dk_boundary_rational(25, 0)), rel=1e-12
        )


def test_dk_gauss_peak_location():
    n = 400
    vals = [dk_boundary_gauss(n, x) for x in range(n)]
    assert max(range(n), key=vals.__getitem__) == n - 1


@pytest.mark.parametrize("call", [lambda: mt_boundary_exact(5, 5), lambda: mt_boundary_exact(5, -1), lambda: dk_boundary_exact(1, 0), lambda: deterministic_curve(0.0)])
def test_domain_errors(call):
    with pytest.raises(DomainError):
        call()


def test_curve_and_root():
    assert deterministic_curve(1.0) == 0.0
    r = final_proportion()
    assert 0.2031 <= r <= 0.2032
    assert abs(deterministic_curve(r)) < 1e-10
    # the fixed point of f lies elsewhere
    assert abs(deterministic_curve(r) - r) > 0.2
