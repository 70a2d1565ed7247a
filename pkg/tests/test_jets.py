import numpy as np
import pytest

from tfgp import jets


X = np.linspace(0.5, 2.0, 7)


def test_product_and_reciprocal():
    K = 4
    x = jets.variable(X, K)
    sq = jets.mul(x, x)
    assert np.allclose(sq[0], X**2) and np.allclose(sq[1], 2 * X) and np.allclose(sq[2], 2)
    assert np.allclose(sq[3:], 0)
    r = jets.recip(x)
    for j in range(K + 1):
        fact = np.prod(np.arange(1, j + 1)) * (-1) ** j
        assert np.allclose(r[j], fact * X ** (-1 - j))


def test_power_of_linear():
    j = jets.power_of_linear(1.0, 2.0, X, 0.5, 2)
    assert np.allclose(j[0], np.sqrt(1 + 2 * X))
    assert np.allclose(j[1], (1 + 2 * X) ** -0.5)
    assert np.allclose(j[2], -(1 + 2 * X) ** -1.5)


def test_add_scale_truncate_deriv():
    a = jets.variable(X, 3)
    b = jets.constant(2.0, 1, len(X))
    s = jets.add(a, b)
    assert jets.order(s) == 1 and np.allclose(s[0], X + 2)
    assert np.allclose(jets.scale(a, 3)[1], 3)
    assert jets.order(jets.truncate(a, 2)) == 2
    assert np.allclose(jets.deriv(a)[0], 1)


def test_extend_by_ode_exponential():
    # f'' = f with f = exp(x)
    known = np.stack([np.exp(X), np.exp(X)])
    f = jets.extend_by_ode(known, lambda g: g, 6)
    for j in range(7):
        assert np.allclose(f[j], np.exp(X))


def test_mul_caps_order():
    a = jets.variable(X, 5)
    b = jets.variable(X, 2)
    assert jets.order(jets.mul(a, b)) == 2
    assert jets.order(jets.mul(a, a, K=1)) == 1
    with pytest.raises(ValueError):
        jets.mul(a, b[:, :3])
