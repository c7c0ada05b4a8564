"""Threshold behaviour: quadratic model of w1, determinant expansions, resonance.

Near t = 0 the channel energy at k = 0 behaves like (5/8)|t|^2.  Completing
the square in (k, t) gives w1(k, t) ~ (5/8)|t + k/5|^2 + (3/5)|k|^2, and
integrating the resulting denominator in spherical coordinates yields

    Delta_mu0(k; z) ~ C mu0^2 sqrt(6/5 |k|^2 - 2z),   C = 32 pi^2 / (5 sqrt 5),

with the mirror image (opposite sign) near (pi, 18).  The functions here
measure these statements numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .determinant import THRESHOLD_QUADRATIC, SpectralPoint, determinant_estimate
from .errors import AccuracyFailure, InvalidArgument
from .lattice import PI, PI_POINT, W1_MAX, ZERO, SpectralParams, as_point, w1
from .quadrature import (
    QuadratureResult,
    SingularityHint,
    integrate_ball,
    integrate_outside_patch,
    integrate_with_singularity,
    smooth_cutoff,
    torus_distance,
)
from .spectral import End, mu_zero, threshold_integral

#: 32 pi^2 / (5 sqrt 5), the expansion constant per unit mu0^2
EXPANSION_CONSTANT = 32.0 * math.pi**2 / (5.0 * math.sqrt(5.0))
K_FACTOR = math.sqrt(6.0 / 5.0)

DEFAULT_Z_PROBES = (-1e-3, -1e-4, -1e-5, -1e-6)
DEFAULT_K_RADII = (1e-3, 3e-3, 1e-2, 3e-2)
PATCH_RADIUS = 0.5


def fibonacci_sphere(n: int) -> np.ndarray:
    """n nearly uniform unit vectors (golden-angle spiral)."""
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    rho = np.sqrt(1.0 - z * z)
    phi = math.pi * (3.0 - math.sqrt(5.0)) * i
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)


@dataclass(frozen=True)
class QuadraticModel:
    limit: float
    c1: float
    c2: float
    radii: tuple
    sphere_max: tuple


def quadratic_form_limit(
    radius_list: Sequence[float], directions: int = 2000
) -> QuadraticModel:
    """Limit of max_{|t|=r} w1(0, t)/r^2 as r -> 0, plus bounds C1, C2.

    The sphere maxima are extrapolated linearly in r^2.  C1 and C2 are the
    smallest and largest sampled ratios over the ball of the largest radius.
    """
    radii = np.asarray(radius_list, dtype=float)
    if radii.size < 2 or np.any(radii <= 0) or np.any(radii > 1) or np.any(np.diff(radii) >= 0):
        raise InvalidArgument("need at least two decreasing radii in (0, 1]")
    dirs = fibonacci_sphere(directions)
    zero = np.zeros(3)
    maxima = np.array([np.max(w1(zero, r * dirs)) / (r * r) for r in radii])
    slope, limit = np.polyfit(radii**2, maxima, 1)
    shells = radii[0] * np.linspace(1.0, 1.0 / 64.0, 64)
    ratios = np.concatenate([w1(zero, r * dirs) / (r * r) for r in shells])
    return QuadraticModel(float(limit), float(ratios.min()), float(ratios.max()),
                          tuple(radii.tolist()), tuple(maxima.tolist()))


@dataclass(frozen=True)
class ExpansionFit:
    """Measured threshold expansion against the reference constants.

    The reference prefactor carries the sign of the end: positive at the
    lower threshold, negative at the upper one.
    """

    end: End
    fitted_exponent: float
    fitted_prefactor: float
    reference_prefactor: float
    k_prefactor: float
    k_reference: float
    remainder_constant: float
    fit_residual: float
    sample_window: tuple

    @property
    def prefactor_error(self) -> float:
        return abs(self.fitted_prefactor / self.reference_prefactor - 1.0)

    @property
    def k_prefactor_error(self) -> float:
        return abs(self.k_prefactor / self.k_reference - 1.0)


def _k_offsets(k_probes) -> np.ndarray:
    arr = np.asarray(k_probes, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None] * (np.ones(3) / math.sqrt(3.0))
    return arr


def expansion_fit(
    end: End = End.LOWER,
    z_probes: Sequence[float] = DEFAULT_Z_PROBES,
    k_probes=DEFAULT_K_RADII,
    tol: float = 0.05,
    *,
    quad_tol: float = 1e-10,
) -> ExpansionFit:
    """Fit Delta_mu0 near a threshold at gamma = 6.

    ``z_probes`` are offsets from the threshold energy (negative at the lower
    end, positive at the upper end, given either way as z - threshold).
    ``k_probes`` are radii along the diagonal or explicit 3-vectors, taken as
    offsets from 0 (lower) or pi (upper).  Three measurements are made:

    * the log-log slope of |Delta| against |z - threshold| at the threshold k;
    * the prefactor Delta / sqrt(2|z - threshold|), extrapolated linearly in
      sqrt|z - threshold|;
    * at the threshold energy, Delta / |k - k_threshold| extrapolated linearly
      in |k - k_threshold|.

    Raises AccuracyFailure when the log-log fit residual exceeds ``tol``.
    """
    end = End(end)
    sign = 1.0 if end is End.LOWER else -1.0
    base_k, base_z = (ZERO, 0.0) if end is End.LOWER else (PI_POINT, W1_MAX)
    offsets_z = np.abs(np.asarray(z_probes, dtype=float))
    if offsets_z.size < 2 or np.any(offsets_z == 0):
        raise InvalidArgument("need at least two nonzero z probes")
    mu0 = mu_zero()
    params = SpectralParams(6.0, mu0)
    reference = sign * EXPANSION_CONSTANT * mu0**2

    def delta(k, z):
        return determinant_estimate(SpectralPoint(k, z), params, quad_tol).value

    d_z = np.array([sign * delta(base_k, base_z - sign * s) for s in offsets_z])
    if np.any(d_z <= 0):
        raise AccuracyFailure("determinant has the wrong sign at a z probe", d_z)
    x, y = np.log(offsets_z), np.log(d_z)
    slope, icpt = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
    if resid > tol:
        raise AccuracyFailure(f"log-log fit residual {resid:.3g} exceeds {tol:g}", slope)
    ratio = d_z / np.sqrt(2.0 * offsets_z)
    _, prefactor = np.polyfit(np.sqrt(offsets_z), ratio, 1)
    remainder = float(np.max(np.abs(d_z - abs(reference) * np.sqrt(2.0 * offsets_z)) / offsets_z))

    offsets_k = _k_offsets(k_probes)
    norms = np.linalg.norm(offsets_k, axis=1)
    d_k = np.array([sign * delta(np.asarray(base_k) + off, base_z) for off in offsets_k])
    _, k_pref = np.polyfit(norms, d_k / norms, 1)

    window = tuple((tuple(base_k), float(base_z - sign * s)) for s in offsets_z) + tuple(
        (tuple(float(c) for c in as_point(np.asarray(base_k) + off)), float(base_z))
        for off in offsets_k
    )
    return ExpansionFit(
        end, float(slope), sign * float(prefactor), reference, sign * float(k_pref),
        reference * K_FACTOR, remainder, resid, window,
    )


@dataclass(frozen=True)
class ResonanceFunction:
    """Second component f1 of the threshold solution with first component f0.

    Lower end: f1(q) = -mu f0 / w1(0, q).  Upper end: f1(q) = -mu f0 / (w1(pi, q) - 18).
    """

    end: End
    mu: float
    f0: float = 1.0

    def __post_init__(self):
        if self.f0 == 0:
            raise InvalidArgument("f0 must be nonzero")

    @property
    def center(self):
        return ZERO if End(self.end) is End.LOWER else PI_POINT

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        if End(self.end) is End.LOWER:
            return -self.mu * self.f0 / w1(np.zeros(3), q)
        # 18 - w1(pi, q) = w1(0, q - pi) exactly, without the cancellation
        return self.mu * self.f0 / w1(np.zeros(3), q - PI)

    def on_axes(self, t1, t2, t3):
        return self(np.stack(np.broadcast_arrays(t1, t2, t3), axis=-1))


@dataclass(frozen=True)
class ResonanceNorms:
    l1_value: QuadratureResult
    deltas: tuple
    truncated_l2_values: tuple
    divergence_exponent: float


def _radial_breaks(r_min: float, rho: float) -> list:
    marks = [0.5 * rho, rho]
    r = 0.5 * rho
    while r / 2.0 > r_min:
        r /= 2.0
        marks.append(r)
    marks.append(r_min)
    return sorted(set(marks))


def resonance_norms(
    end: End = End.LOWER,
    delta_list: Sequence[float] = tuple(2.0**-j for j in range(3, 10)),
    tol: float = 1e-9,
    *,
    mu: Optional[float] = None,
    f0: float = 1.0,
) -> ResonanceNorms:
    """L1 norm of f1 and its L2 norm over the torus minus shrinking balls.

    The truncated L2 integral splits as a smooth outer part (independent of
    delta) plus a spherical shell delta < r < 0.5 weighted by the cutoff.
    The exponent is the least-squares slope of log L2 against log(1/delta).
    """
    deltas = np.asarray(delta_list, dtype=float)
    if deltas.size < 2 or np.any(deltas <= 0) or np.any(deltas > 1) or np.any(np.diff(deltas) >= 0):
        raise InvalidArgument("need at least two decreasing deltas in (0, 1]")
    mu = mu_zero() if mu is None else mu
    f1 = ResonanceFunction(End(end), mu, f0)
    center = np.asarray(f1.center)
    rho = PATCH_RADIUS
    if deltas[0] >= rho:
        raise InvalidArgument(f"deltas must stay below the patch radius {rho}")

    abs_f1 = lambda *t: np.abs(f1.on_axes(*t))
    scale = abs(mu * f0)
    hint = SingularityHint(tuple(center), THRESHOLD_QUADRATIC / scale)
    l1 = integrate_with_singularity(abs_f1, hint, rho, tol)

    sq = lambda *t: f1.on_axes(*t) ** 2
    # the truncated norms only feed a slope, so they run at a looser tolerance
    l2_tol = max(tol, 1e-6)
    outer = integrate_outside_patch(sq, center, rho, l2_tol)

    def shell_integrand(t1, t2, t3):
        r = torus_distance((t1, t2, t3), center)
        return sq(t1, t2, t3) * smooth_cutoff(r, rho)

    values = []
    for d in deltas:
        shell = integrate_ball(
            shell_integrand, tuple(center), rho, l2_tol, r_min=float(d),
            radial_breaks=_radial_breaks(float(d), rho),
        )
        values.append(outer.value + shell.value)
    slope, _ = np.polyfit(np.log(1.0 / deltas), np.log(values), 1)
    return ResonanceNorms(l1, tuple(deltas.tolist()), tuple(values), float(slope))
