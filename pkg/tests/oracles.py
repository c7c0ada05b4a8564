"""Reference computations written independently of the package internals.

Everything here uses plain numpy on the original variables t (no window
shift, no separable engine, no compiled kernel).
"""

import numpy as np
from numpy.polynomial.legendre import leggauss

#: I(0; 0) frozen from two independent high-accuracy runs (graded tensor
#: Gauss in t and a spherical patch plus smooth complement); they agree to 1e-13
J0_REFERENCE = 95.470224866599


def one_minus_cos(x):
    return 2.0 * np.sin(0.5 * x) ** 2


def w1_zero(t1, t2, t3):
    """w1(0, t) for t in (-pi, pi]^3 where the half angle is simply t/2."""
    return sum(one_minus_cos(0.5 * t) + one_minus_cos(t) for t in (t1, t2, t3))


def midpoint_integral(f, n):
    """Plain n^3 midpoint sum over the torus, slab by slab."""
    h = 2 * np.pi / n
    x = -np.pi + (np.arange(n) + 0.5) * h
    total = 0.0
    for a in x:
        total += f(a, x[:, None], x[None, :]).sum()
    return total * h**3


def graded_axis(order=12, ratio=0.25, finest=1e-12):
    """Gauss nodes on [-pi, pi] refined geometrically towards 0."""
    edges = [np.pi]
    while edges[-1] > finest:
        edges.append(edges[-1] * ratio)
    edges = np.array(sorted(set([0.0] + edges + [-e for e in edges])))
    x, w = leggauss(order)
    lo, hi = edges[:-1, None], edges[1:, None]
    return (0.5 * (lo + hi) + 0.5 * (hi - lo) * x).ravel(), (0.5 * (hi - lo) * w).ravel()


def threshold_oracle(z=0.0, order=12, ratio=0.25):
    """I(0; z) for z <= 0 by a graded tensor Gauss rule directly in t."""
    t, w = graded_axis(order, ratio)
    g = one_minus_cos(0.5 * t) + one_minus_cos(t)
    inner = g[:, None] + g[None, :] - z
    ww = w[:, None] * w[None, :]
    return sum(wi * np.sum(ww / (gi + inner)) for gi, wi in zip(g, w))


def richardson_midpoint(f, n=256):
    """Midpoint sums at n and 2n combined to cancel the h^2 term.

    w1(0, .) has a kink where a coordinate crosses pi, so plain midpoint sums
    converge only like h^2 there.
    """
    return (4.0 * midpoint_integral(f, 2 * n) - midpoint_integral(f, n)) / 3.0


def band_oracle(k, points=100_001):
    """Band edges by a dense scan over p and both half-angle branches per coordinate."""
    p = np.linspace(-np.pi, np.pi, points)
    lo = hi = float(sum(one_minus_cos(c) for c in k))
    for c in k:
        half = 0.5 * (c + p)
        both = np.concatenate([one_minus_cos(half), 2.0 - one_minus_cos(half)]) + np.tile(
            one_minus_cos(p), 2
        )
        lo += both.min()
        hi += both.max()
    return lo, hi


def bisect(f, a, b, xtol=1e-12):
    fa = f(a)
    while b - a > xtol:
        m = 0.5 * (a + b)
        fm = f(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def gauss_integral(f, order=32):
    """Tensor Gauss rule on the panels [-pi, 0] and [0, pi] of each axis."""
    x, w = leggauss(order)
    t = np.concatenate([0.5 * np.pi * (x - 1), 0.5 * np.pi * (x + 1)])
    wt = np.concatenate([0.5 * np.pi * w] * 2)
    ww = wt[:, None] * wt[None, :]
    return sum(wi * np.sum(ww * f(ti, t[:, None], t[None, :])) for ti, wi in zip(t, wt))


def eigenvalue_oracle(gamma, mu, order=32):
    """Negative root of gamma - z - mu^2 I(0; z), found by bisection."""

    def delta(z):
        return gamma - z - mu**2 * gauss_integral(lambda a, b, c: 1.0 / (w1_zero(a, b, c) - z), order)

    return bisect(delta, -100.0, -1e-3, 1e-11)


def gauss_panels(f, breaks, order=32):
    """Tensor Gauss rule with per-axis panel ends ``breaks`` (three sequences)."""
    x, w = leggauss(order)
    axes = []
    for b in breaks:
        b = np.asarray(b, dtype=float)
        lo, hi = b[:-1, None], b[1:, None]
        axes.append(((0.5 * (lo + hi) + 0.5 * (hi - lo) * x).ravel(), (0.5 * (hi - lo) * w).ravel()))
    (t1, w1_), (t2, w2), (t3, w3) = axes
    ww = w2[:, None] * w3[None, :]
    return sum(wi * np.sum(ww * f(ti, t2[:, None], t3[None, :])) for ti, wi in zip(t1, w1_))
