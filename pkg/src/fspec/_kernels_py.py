"""NumPy implementation of the separable torus sums (fallback backend)."""

import numpy as np


def separable_sum(a, wa, b, wb, c, wc, z, power=1):
    """Sum of wa_i wb_j wc_l / (a_i + b_j + c_l - z)**power over all i, j, l."""
    if power not in (1, 2):
        raise ValueError("power must be 1 or 2")
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    bc = (b[:, None] + (c[None, :] - z)).ravel()
    wbc = (np.asarray(wb, dtype=float)[:, None] * np.asarray(wc, dtype=float)[None, :]).ravel()
    total = 0.0
    for ai, wi in zip(np.asarray(a, dtype=float), np.asarray(wa, dtype=float)):
        d = ai + bc
        if power == 2:
            d = d * d
        total += wi * float(np.dot(wbc, 1.0 / d))
    return total
