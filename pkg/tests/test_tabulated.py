import numpy as np
import pytest

from tfgp.tabulated import TabulatedFunction, Tail, fit_exp_tail, fit_power_tail


def _table(f, f1, f2, x, **kw):
    return TabulatedFunction(x, f(x), f1(x), f2(x), **kw)


def test_quintic_hermite_accuracy():
    x = np.linspace(0, 3, 31)
    t = _table(np.sin, np.cos, lambda s: -np.sin(s), x)
    q = np.linspace(0, 3, 1001)
    assert np.max(np.abs(t(q) - np.sin(q))) < 1e-7
    assert np.max(np.abs(t.derivative(q) - np.cos(q))) < 1e-5
    assert np.max(np.abs(t.evaluate(q, 2) + np.sin(q))) < 1e-3


def test_power_tail_beyond_grid():
    x = np.linspace(1, 5, 41)
    f = lambda s: 2 * s**-1.5
    tail = fit_power_tail(x, f(x), -1.5, "right")
    t = TabulatedFunction(x, f(x), -3 * x**-2.5, 7.5 * x**-3.5, right=tail)
    assert tail.coeff == pytest.approx(2.0)
    assert float(t(20.0)) == pytest.approx(f(20.0))
    assert float(t.derivative(20.0)) == pytest.approx(-3 * 20.0**-2.5)
    assert t.stitch_error()[1] < 1e-14


def test_exp_tail_on_left():
    k, p = 2.0 / 3.0, -0.25
    g = lambda s: np.abs(s) ** p * np.exp(-k * np.abs(s) ** 1.5)
    x = np.linspace(-8, -2, 61)
    tail = fit_exp_tail(x, g(x), p, k)
    assert tail.coeff == pytest.approx(1.0)
    q = -10.0
    assert float(tail.evaluate(q, "left")) == pytest.approx(float(g(q)))
    # d/dx on the left flips the sign of the |x| derivative
    num = (g(q + 1e-6) - g(q - 1e-6)) / 2e-6
    assert float(tail.evaluate(q, "left", 1)) == pytest.approx(num, rel=1e-6)


def test_rescaled():
    x = np.linspace(0, 2, 21)
    t = _table(np.exp, np.exp, np.exp, x)
    s = t.rescaled(3.0, 2.0)
    q = np.linspace(0, 1, 11)
    assert np.allclose(s(q), 3 * np.exp(2 * q), rtol=1e-8)
    assert np.allclose(s.derivative(q), 6 * np.exp(2 * q), rtol=1e-6)


def test_zero_tail_and_unknown_kind():
    x = np.linspace(0, 1, 5)
    t = TabulatedFunction(x, np.zeros(5), np.zeros(5), np.zeros(5))
    assert float(t(3.0)) == 0.0
    with pytest.raises(ValueError):
        Tail("bogus").evaluate(2.0, "right")
