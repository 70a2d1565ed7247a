from fractions import Fraction

import numpy as np
import pytest

from oracles import hastings_mcleod_shooting, painleve_tail_series
from tfgp.model import reference_params
from tfgp.painleve import (
    airy_leading,
    correction_left_exponent,
    correction_residual,
    correction_right_exponent,
    hastings_mcleod,
    hm_series,
    mu_n,
    p2_residual,
    painleve_correction,
    w0,
)

# frozen from the shooting oracle in oracles.py (DOP853, bisection on the Airy amplitude)
GAMMA0_AT_0 = 0.6540293315064158


def test_series_first_terms():
    s = hm_series(2)
    assert s[0] == 1
    assert s[1] == Fraction(-1, 2)
    assert s[2] == Fraction(-73, 8)
    assert hm_series(0).coeffs == (Fraction(1),)
    assert all(isinstance(a, Fraction) for a in hm_series(5).coeffs)


def test_series_recursion_identity():
    # plug the series into 4 g'' + y g - g^3 symbolically: coefficient of
    # y^(1/2 - 3(n+1)) must vanish exactly
    a = hm_series(6).coeffs
    for n in range(6):
        cube = sum(a[i] * a[j] * a[n + 1 - i - j]
                   for i in range(n + 2) for j in range(n + 2 - i))
        e = Fraction(1, 2) - 3 * n
        curv = 4 * a[n] * e * (e - 1)
        assert curv + a[n + 1] - cube == 0


def test_series_rejects_negative():
    with pytest.raises(ValueError):
        hm_series(-1)


def test_shooting_oracle_value():
    val, spread = hastings_mcleod_shooting()
    assert spread < 1e-12
    assert val == pytest.approx(GAMMA0_AT_0, abs=1e-10)


def test_gamma0_at_origin(gamma0):
    assert abs(float(gamma0(0.0)) - GAMMA0_AT_0) < 1e-7


def test_gamma0_right_series(gamma0):
    y = 16.0
    assert abs(float(gamma0(y)) - (4 - 0.5 * y**-2.5 - 73 / 8 * y**-5.5)) <= 1e-6


def test_gamma0_left_decay(gamma0):
    ref = float(airy_leading(-10.0))
    assert abs(float(gamma0(-10.0)) / ref - 1) < 0.25


def test_gamma0_shape(gamma0):
    assert np.all(gamma0.values > 0)
    assert np.all(np.diff(gamma0.values) > 0)
    _, scaled = p2_residual(gamma0)
    assert np.max(np.abs(scaled)) <= 10 * 1e-11


def test_gamma0_tails_stitch(gamma0):
    left, right = gamma0.stitch_error()
    assert left < 1e-6 and right < 1e-6
    # beyond the grid the series and Airy tails take over smoothly
    assert float(gamma0(60.0)) == pytest.approx(np.sqrt(60.0), rel=1e-4)
    assert 0 < float(gamma0(-14.0)) < float(gamma0(-12.0))


def test_hastings_mcleod_preconditions():
    with pytest.raises(ValueError):
        hastings_mcleod(y_min=-5.0)
    with pytest.raises(ValueError):
        hastings_mcleod(n_points=100)


def test_w0_positive_with_tails(gamma0):
    W = w0(gamma0)
    assert W.values.min() > 0
    assert W.right.exponent == 1.0 and W.right.coeff == 2.0
    assert W.left.coeff == -1.0
    y = W.grid
    assert W.values[-1] / y[-1] == pytest.approx(2.0, rel=1e-3)
    assert W.values[0] / -y[0] == pytest.approx(1.0, rel=1e-3)


def test_gamma1_d1_coefficient(painleve_by_d):
    g1 = painleve_by_d(1)[1]
    assert 30.0**4.5 * float(g1(30.0)) == pytest.approx(7.5, rel=0.02)


def test_gamma1_d2_coefficient(painleve_by_d):
    g1 = painleve_by_d(2)[1]
    assert 30.0**1.5 * float(g1(30.0)) == pytest.approx(-0.5, rel=0.02)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_correction_residuals(painleve_by_d, d):
    gam = painleve_by_d(d)
    for n in range(1, 4):
        assert np.max(np.abs(correction_residual(n, d, gam, gam[n]))) <= 1e-9


@pytest.mark.parametrize("d", [1, 2, 3])
def test_right_tail_slopes(painleve_by_d, d):
    gam = painleve_by_d(d)
    # the y^-3 correction is fitted alongside: for d = 1, n = 3 it is 1101 times
    # the leading coefficient and a plain power fit would be off by 0.2
    for n in range(1, 4):
        y = gam[n].grid
        m = (y >= 20) & (y <= 34)
        A = np.stack([np.log(y[m]), np.ones(m.sum()), y[m] ** -3.0], axis=1)
        s = np.linalg.lstsq(A, np.log(np.abs(gam[n].values[m])), rcond=None)[0][0]
        assert abs(s - correction_right_exponent(n, d)) < 0.05


# right-tail series coefficients (leading, next) of gamma_1..gamma_3 from the
# sympy series oracle, frozen
SERIES_COEFFS = {
    1: ((0.0, 7.5), (0.0, -337.5), (0.0, 30712.5)),
    2: ((-0.5, 1.75), (1.875, -6.1875), (-43.0625, -2641.90625)),
    3: ((-1.0, -4.0), (1.5, 182.25), (-26.5, -15581.5)),
}


@pytest.mark.parametrize("d", [1, 2, 3])
def test_series_oracle_coefficients(d):
    _, coeffs = painleve_tail_series(d, 3, 2)
    for n in range(3):
        assert tuple(float(c) for c in coeffs[n]) == pytest.approx(SERIES_COEFFS[d][n], abs=1e-12)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_corrections_match_tail_series(painleve_by_d, d):
    gam = painleve_by_d(d)
    fs, _ = painleve_tail_series(d, 3, 6)
    # the right end pins only the leading balance, which leaves an error layer
    # a few units wide there; the series is asymptotic, so stay above y = 24
    y = np.array([24.0, 28.0, 32.0, 34.0])
    for n in range(1, 4):
        assert gam[n](y) == pytest.approx(fs[n - 1](y), rel=1e-4)


def test_d1_leading_coefficient_vanishes(painleve_by_d):
    # with g_n0 = 0 the scaled y^(2n-1/2) gamma_n decays like g_n1 y^-3
    gam = painleve_by_d(1)
    y = np.array([25.0, 30.0, 35.0])
    for n in range(1, 4):
        scaled = y ** (2 * n - 0.5) * gam[n](y)
        assert np.all(np.diff(np.abs(scaled)) < 0)
        assert scaled * y**3 == pytest.approx(SERIES_COEFFS[1][n - 1][1], rel=0.1)


def test_gamma1_left_is_tiny(painleve_by_d):
    # decays faster than any power; its size at y = -8 follows the left tail
    # |y|^(5/2) gamma_0 / 10 (see ledger: not 1e-6 there)
    for d in (1, 2, 3):
        g0, g1 = painleve_by_d(d)[:2]
        y = -12.0
        assert float(g1(y)) == pytest.approx(abs(y) ** 2.5 * float(g0(y)) / 10, rel=0.25)
        assert abs(float(g1(-8.0))) < 5e-3
    assert correction_left_exponent(1) == 2.25


@pytest.mark.xfail(reason="mathematically false at y = -8: gamma_1(-8) is about 3e-3 (ledger)", strict=True)
def test_gamma1_at_minus8_literal(painleve_by_d):
    assert abs(float(painleve_by_d(1)[1](-8.0))) < 1e-6


def test_correction_needs_history(gamma0):
    with pytest.raises(ValueError):
        painleve_correction(2, 1, [gamma0])


def test_mu0_right_asymptotics(gamma0):
    p = reference_params(1)
    m0 = mu_n(p, 0, gamma0)
    y2 = 200.0
    assert float(m0(y2)) == pytest.approx(np.sqrt(y2 / (2 * p.alpha2)), rel=1e-3)


def test_mu0_two_term_value(gamma0):
    p = reference_params(1)
    m0 = mu_n(p, 0, gamma0)
    y2 = 20.0
    y = y2 / p.R2 ** (2 / 3)
    amp = p.R2 ** (1 / 3) / np.sqrt(2 * p.alpha2)
    ref = amp * np.sqrt(y) * (1 - 0.5 * y**-3)
    assert abs(float(m0(y2)) - ref) < 1e-4
    assert abs(float(m0(y2)) - np.sqrt(10.0)) < 1e-3


def test_mu0_left_decay(gamma0):
    # mu_0 there is the rescaled gamma_0(-10), which the Airy form puts near 7e-6
    p = reference_params(1)
    amp = p.R2 ** (1 / 3) / np.sqrt(2 * p.alpha2)
    val = float(mu_n(p, 0, gamma0)(-10 * p.R2 ** (2 / 3)))
    assert val == pytest.approx(amp * float(airy_leading(-10.0)), rel=0.25)
    assert float(mu_n(p, 0, gamma0)(-16 * p.R2 ** (2 / 3))) < 1e-9


@pytest.mark.xfail(reason="inconsistent with the Airy decay: the value is about 7e-6 (ledger)", strict=True)
def test_mu0_left_decay_literal(gamma0):
    p = reference_params(1)
    assert float(mu_n(p, 0, gamma0)(-10 * p.R2 ** (2 / 3))) < 1e-9


def test_csv_dump(tmp_path, gamma0):
    path = tmp_path / "g.csv"
    gamma0.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "y,value,d1,d2"
    assert len(lines) == len(gamma0.grid) + 1
