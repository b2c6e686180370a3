"""Expression engine: parsing, evaluation, exact differentiation."""

import math

import numpy as np
import pytest

from deltaforms.errors import DomainError, ExpressionError
from deltaforms.expr import Const, Var, coords, exp, parse, sin

from conftest import rand_coeff


def test_parse_and_evaluate():
    f = parse("sin(t)*x^2 + y/z")
    p = [0.5, 2.0, 3.0, 1.5]
    assert f(p) == pytest.approx(math.sin(0.5) * 4 + 2.0, abs=1e-14)


def test_parse_aliases_and_numbers():
    assert parse("x0 + 2*x3")([1, 0, 0, 3]) == 7.0
    assert parse("u1 + u2")([0.25, 0.5]) == 0.75
    assert parse("1.5e-2 * x")([0, 2, 0, 0]) == pytest.approx(0.03)
    assert parse("-x^2")([0, 3, 0, 0]) == -9.0  # unary minus binds outside the power


def test_parse_negative_exponent():
    f = parse("z^(-2)")
    assert f([0, 0, 0, 2.0]) == 0.25


@pytest.mark.parametrize(
    "bad",
    ["sin 3", "x +", "foo", "x^y", "x^1.5", "2 *", "(x", "x)*2", "exp", "x^(1"],
)
def test_parse_errors(bad):
    with pytest.raises(ExpressionError):
        parse(bad)


def test_pole_raises_domain_error():
    f = parse("1/z")
    with pytest.raises(DomainError):
        f([0, 0, 0, 0.0])


def test_constant_fold_identities():
    t, x, y, z = coords()
    assert isinstance(x * 0, Const)
    assert (x * 1) is x
    assert (x + 0) is x
    assert (x - 0) is x
    assert isinstance(x**0, Const) and (x**0).value == 1.0
    assert (x**1) is x
    assert isinstance(sin(Const(0.0)), Const)
    with pytest.raises(ExpressionError):
        x / Const(0.0)


def test_diff_against_finite_differences():
    rng = np.random.default_rng(11)
    h = 1e-6
    for _ in range(60):
        f = rand_coeff(rng) * rand_coeff(rng) + rand_coeff(rng)
        p = rng.uniform(-1.0, 1.0, 4)
        for i in range(4):
            exact = f.diff(i)(p)
            pp, pm = p.copy(), p.copy()
            pp[i] += h
            pm[i] -= h
            approx = (f(pp) - f(pm)) / (2 * h)
            assert exact == pytest.approx(approx, abs=5e-6, rel=5e-6)


def test_mixed_partials_commute():
    rng = np.random.default_rng(12)
    for _ in range(40):
        f = rand_coeff(rng) * rand_coeff(rng)
        i, j = rng.integers(0, 4, 2)
        dij = f.diff(int(i)).diff(int(j))
        dji = f.diff(int(j)).diff(int(i))
        for _ in range(10):
            p = rng.uniform(-1.2, 1.2, 4)
            assert dij(p) == pytest.approx(dji(p), abs=1e-10, rel=1e-10)


def test_quotient_and_chain_rules():
    t, x, y, z = coords()
    f = sin(x * x) / (1 + z * z)
    p = [0.0, 0.7, 0.0, 0.3]
    num = 2 * 0.7 * math.cos(0.49) / (1 + 0.09)
    assert f.diff(1)(p) == pytest.approx(num, rel=1e-12)
    g = exp(-(z**2))
    assert g.diff(3)([0, 0, 0, 0.5]) == pytest.approx(-1.0 * math.exp(-0.25), rel=1e-12)


def test_eval_many_matches_scalar_eval():
    rng = np.random.default_rng(13)
    f = rand_coeff(rng) + rand_coeff(rng) * rand_coeff(rng)
    pts = rng.uniform(-1, 1, size=(37, 4))
    batch = f.eval_many(pts)
    for k in range(pts.shape[0]):
        assert batch[k] == pytest.approx(f(pts[k]), rel=1e-13, abs=1e-13)


def test_subs_composition():
    t, x, y, z = coords()
    f = x * x + z
    g = f.subs([t, t + 1, y, Const(2.0)])
    assert g([3.0, 0, 0, 0]) == pytest.approx(18.0)


def test_nvars():
    assert parse("t").nvars() == 1
    assert parse("z").nvars() == 4
    assert Const(2.0).nvars() == 0


def test_var_validation():
    with pytest.raises(ExpressionError):
        Var(-1)
