"""Truncated Taylor jets on a grid.

A jet is an array of shape (K+1, n) whose row j holds the j-th derivative of a
function at every node. Products use the Leibniz rule and differentiation is a
row shift, so derivatives of algebraic combinations never go through a
difference stencil. This keeps rounding noise from being amplified by 1/h^2
at every level of a recursion.
"""

from math import comb

import numpy as np


def variable(x, K):
    out = np.zeros((K + 1, len(x)))
    out[0] = x
    if K >= 1:
        out[1] = 1.0
    return out


def constant(c, K, n):
    out = np.zeros((K + 1, n))
    out[0] = c
    return out


def order(a):
    return a.shape[0] - 1


def truncate(a, K):
    return a[: K + 1]


def deriv(a, k=1):
    return a[k:]


def mul(*jets, K=None):
    """Leibniz product, truncated to the lowest input order (or to K if smaller)."""
    cap = min(order(a) for a in jets) if K is None else min(K, *(order(a) for a in jets))
    out = jets[0][: cap + 1]
    for b in jets[1:]:
        c = np.zeros((cap + 1, out.shape[1]))
        for j in range(cap + 1):
            for i in range(j + 1):
                c[j] += comb(j, i) * out[i] * b[j - i]
        out = c
    return out


def add(*jets, K=None):
    cap = min(order(a) for a in jets) if K is None else min(K, *(order(a) for a in jets))
    return sum(a[: cap + 1] for a in jets)


def scale(a, c):
    return c * a


def recip(g):
    """Jet of 1/g."""
    K = order(g)
    h = np.zeros_like(g)
    h[0] = 1.0 / g[0]
    for j in range(1, K + 1):
        s = np.zeros(g.shape[1])
        for i in range(1, j + 1):
            s += comb(j, i) * g[i] * h[j - i]
        h[j] = -s * h[0]
    return h


def power_of_linear(a, b, x, e, K):
    """Jet of (a + b x)^e."""
    base = a + b * x
    out = np.zeros((K + 1, len(x)))
    coef = 1.0
    for j in range(K + 1):
        out[j] = coef * b**j * base ** (e - j)
        coef *= e - j
    return out


def extend_by_ode(known, rhs_of, K):
    """Fill rows 2..K of a jet from f'' = rhs(f).

    ``known`` holds rows 0 and 1. ``rhs_of(jet)`` must return the jet of the
    right-hand side to the order the input allows (one less row than given
    would be lost otherwise), i.e. rhs derivatives up to order(jet).
    """
    f = np.zeros((K + 1, known.shape[1]))
    f[:2] = known[:2]
    for j in range(0, K - 1):
        # rows 0..j+1 are final; rhs derivative j needs f up to order j
        r = rhs_of(f[: j + 1])
        f[j + 2] = r[j]
    return f
