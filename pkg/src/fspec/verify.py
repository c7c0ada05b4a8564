"""The verification suite behind ``fspec verify-all``.

Every check yields a :class:`Check` with status ``pass``, ``fail`` or
``error``.  ``error`` means the number could not be trusted: the computation
raised, or its propagated quadrature error estimate exceeds the tolerance
of the assertion.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

import numpy as np

from .asymptotics import End, expansion_fit, quadratic_form_limit, resonance_norms
from .config import RunConfig
from .determinant import SpectralPoint, determinant_estimate, lattice_integral
from .errors import SpectralError
from .lattice import PI_POINT, W1_MAX, ZERO, SpectralParams, band_edges, w1, wrap
from .quadrature import integrate_ball, integrate_torus
from .spectral import (
    Side,
    critical_couplings,
    find_eigenvalue,
    sweep_no_eigenvalues,
    threshold_integral,
    virtual_level_check,
)

PASS, FAIL, ERROR = "pass", "fail", "error"


@dataclass(frozen=True)
class Check:
    check_name: str
    status: str
    measured: object
    expected: object
    tolerance: Optional[float]
    detail: str = ""

    def to_dict(self) -> dict:
        out = {
            "check_name": self.check_name,
            "status": self.status,
            "measured": _jsonable(self.measured),
            "expected": _jsonable(self.expected),
            "tolerance": self.tolerance,
        }
        if self.detail:
            out["detail"] = self.detail
        return out


def _jsonable(x):
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    return x


def compare(name, measured, expected, tolerance, estimate=0.0, relative=False) -> Check:
    """Scalar or elementwise |measured - expected| <= tolerance."""
    m = np.atleast_1d(np.asarray(measured, dtype=float))
    e = np.atleast_1d(np.asarray(expected, dtype=float))
    dev = np.abs(m - e)
    if relative:
        dev = dev / np.abs(e)
    if estimate > tolerance:
        return Check(name, ERROR, measured, expected, tolerance,
                     f"quadrature error estimate {estimate:.3g} exceeds the tolerance")
    status = PASS if np.all(dev <= tolerance) else FAIL
    return Check(name, status, measured, expected, tolerance)


def predicate(name, ok: bool, measured, expected, detail: str = "") -> Check:
    return Check(name, PASS if ok else FAIL, measured, expected, None, detail)


def _guard(name: str, body: Callable[[], Iterable[Check]]) -> list[Check]:
    try:
        return list(body())
    except SpectralError as exc:
        return [Check(name, ERROR, None, None, None, f"{type(exc).__name__}: {exc}")]


def check_band_edges(cfg: RunConfig):
    yield compare("band_edges_zero", list(band_edges(ZERO)), [0.0, 9.375], 1e-9)
    yield compare("band_edges_pi", list(band_edges(PI_POINT)), [8.625, 18.0], 1e-9)


def check_quadrature(cfg: RunConfig):
    vol = integrate_torus(lambda a, b, c: np.ones(np.broadcast(a, b, c).shape), 1e-12)
    yield compare("torus_volume", vol.value, (2 * math.pi) ** 3, 1e-12, vol.error_estimate)
    for d in (0.1, 0.5):
        ball = integrate_ball(lambda a, b, c: 1.0 / (a * a + b * b + c * c), ZERO, d, 1e-12)
        yield compare(f"ball_inverse_square_{d:g}", ball.value, 4 * math.pi * d, 1e-9,
                      ball.error_estimate)


def check_threshold_symmetry(cfg: RunConfig):
    sp = SpectralPoint(ZERO, 0.0)
    coarse = lattice_integral(sp, cfg.quad_tol)
    fine = lattice_integral(sp, cfg.quad_tol / 100)
    yield predicate("threshold_integral_positive", coarse.value > 0, coarse.value, "> 0")
    yield compare("threshold_integral_refinement", coarse.value, fine.value, 1e-7,
                  coarse.error_estimate / abs(coarse.value), relative=True)
    rng = np.random.default_rng(cfg.seed)
    sums, est = [], 0.0
    for _ in range(cfg.symmetry_samples):
        k = wrap(rng.uniform(-math.pi, math.pi, 3))
        a = lattice_integral(SpectralPoint(k, 0.0), cfg.quad_tol, method="direct")
        b = lattice_integral(SpectralPoint(k.shifted(), W1_MAX), cfg.quad_tol, method="direct")
        sums.append(a.value + b.value)
        est = max(est, a.error_estimate + b.error_estimate)
    worst = float(np.max(np.abs(sums)))
    yield compare("shift_identity_max_abs", worst, 0.0, 1e-7, est)


def check_virtual_levels(cfg: RunConfig):
    crit = critical_couplings(6.0, cfg.quad_tol)
    p0 = SpectralParams(6.0, crit.mu_zero)
    low = determinant_estimate(SpectralPoint(ZERO, 0.0), p0, cfg.quad_tol)
    up = determinant_estimate(SpectralPoint(PI_POINT, W1_MAX), p0, cfg.quad_tol)
    yield compare("virtual_level_lower_delta", low.value, 0.0, 1e-9)
    yield compare("virtual_level_upper_delta", up.value, 0.0, 1e-6, up.error_estimate)

    # gamma = 3 at mu_left: virtual level at 0, nothing above 18
    c3 = critical_couplings(3.0, cfg.quad_tol)
    p3 = SpectralParams(3.0, c3.mu_left)
    vl = virtual_level_check(End.LOWER, p3, cfg.virtual_tol, quad_tol=cfg.quad_tol)
    above = find_eigenvalue(PI_POINT, p3, Side.ABOVE, cfg.root_tol, quad_tol=cfg.quad_tol)
    yield predicate("corollary_i_lower_virtual_level", vl, vl, True)
    yield predicate("corollary_i_upper_no_eigenvalue", not above.found, above.eigenvalue, None)

    # gamma = 9 at mu_right: virtual level at 18 and, as stated, a negative eigenvalue
    c9 = critical_couplings(9.0, cfg.quad_tol)
    p9 = SpectralParams(9.0, c9.mu_right)
    vu = virtual_level_check(End.UPPER, p9, cfg.virtual_tol, quad_tol=cfg.quad_tol)
    below = find_eigenvalue(ZERO, p9, Side.BELOW, cfg.root_tol, quad_tol=cfg.quad_tol)
    yield predicate("corollary_iii_upper_virtual_level", vu, vu, True)
    yield predicate(
        "corollary_iii_lower_unique_negative_eigenvalue", below.found, below.eigenvalue, "present",
        "mu_right(9) < mu_left(9), where no negative eigenvalue exists",
    )


def _stated_below(gamma, factor):
    return gamma <= 0 or factor > 1


def _stated_above(gamma, factor):
    # as printed: gamma >= 12 never has an eigenvalue above 18
    return gamma < 12 and factor > 1


def check_regimes(cfg: RunConfig):
    crit0 = critical_couplings(6.0, cfg.quad_tol)
    groups = {"regimes_below_band": [], "regimes_above_band_gamma_lt_12": [],
              "regimes_above_band_gamma_ge_12": []}
    for gamma in cfg.regime_gammas:
        crit = critical_couplings(gamma, cfg.quad_tol)
        for factor in cfg.regime_factors:
            mu_l = factor * (crit.mu_left or crit0.mu_zero)
            rep = find_eigenvalue(ZERO, SpectralParams(gamma, mu_l), Side.BELOW, cfg.root_tol,
                                  quad_tol=cfg.quad_tol)
            groups["regimes_below_band"].append(
                (gamma, factor, rep.found, _stated_below(gamma, factor)))
            mu_r = factor * (crit.mu_right or crit0.mu_zero)
            rep = find_eigenvalue(PI_POINT, SpectralParams(gamma, mu_r), Side.ABOVE, cfg.root_tol,
                                  quad_tol=cfg.quad_tol)
            key = "regimes_above_band_gamma_lt_12" if gamma < 12 else "regimes_above_band_gamma_ge_12"
            groups[key].append((gamma, factor, rep.found, _stated_above(gamma, factor)))
    for name, rows in groups.items():
        if not rows:
            continue
        bad = [[g, f, found, stated] for g, f, found, stated in rows if found != stated]
        yield predicate(name, not bad, len(rows) - len(bad), len(rows),
                        f"mismatches (gamma, factor, found, stated): {bad}" if bad else "")


def check_sweep(cfg: RunConfig):
    crit = critical_couplings(6.0, cfg.quad_tol)
    mu = cfg.sweep_mu_factor * crit.mu_zero
    rep = sweep_no_eigenvalues(cfg.sweep_grid, cfg.sweep_z, cfg.quad_tol, mu=mu,
                               workers=cfg.workers)
    yield predicate("sweep_sign_violations", rep.ok, len(rep.violations), 0,
                    f"{rep.points} k-points, min margin {rep.min_margin:.6g}")


def check_expansion(cfg: RunConfig):
    for end in End:
        z = [abs(v) * (-1 if end is End.LOWER else 1) for v in cfg.z_probes]
        fit = expansion_fit(end, z, cfg.k_probes, quad_tol=min(cfg.quad_tol, 1e-10))
        yield compare(f"expansion_{end.value}_exponent", fit.fitted_exponent, 0.5, 0.005)
        yield compare(f"expansion_{end.value}_prefactor", fit.fitted_prefactor,
                      fit.reference_prefactor, 0.02, relative=True)
        yield compare(f"expansion_{end.value}_k_prefactor", fit.k_prefactor,
                      fit.k_reference, 0.02, relative=True)


def check_resonance(cfg: RunConfig):
    crit = critical_couplings(6.0, cfg.quad_tol)
    target = crit.mu_zero * threshold_integral(cfg.quad_tol)
    for end in End:
        res = resonance_norms(end, cfg.delta_list, cfg.quad_tol, mu=crit.mu_zero)
        yield compare(f"resonance_{end.value}_l1", res.l1_value.value, target, 1e-6,
                      res.l1_value.error_estimate)
        yield compare(f"resonance_{end.value}_l2_exponent", res.divergence_exponent, 1.0, 0.05)
        grows = bool(np.all(np.diff(res.truncated_l2_values) > 0))
        yield predicate(f"resonance_{end.value}_l2_increasing", grows, res.truncated_l2_values,
                        "increasing")


def check_quadratic_model(cfg: RunConfig):
    r = 1e-3
    ratio = float(w1((0.0, 0.0, 0.0), (r, 0.0, 0.0))) / r**2
    yield compare("quadratic_model_axis_ratio", ratio, 0.625, 1e-5)
    model = quadratic_form_limit([1e-1, 5e-2, 2e-2, 1e-2])
    yield compare("quadratic_model_limit", model.limit, 0.625, 1e-5)


SUITE = (
    ("band_edges", check_band_edges),
    ("quadrature", check_quadrature),
    ("threshold_symmetry", check_threshold_symmetry),
    ("virtual_levels", check_virtual_levels),
    ("regimes", check_regimes),
    ("sweep", check_sweep),
    ("expansion", check_expansion),
    ("resonance", check_resonance),
    ("quadratic_model", check_quadratic_model),
)


def run_suite(cfg: RunConfig, only: Optional[Iterable[str]] = None) -> list[Check]:
    wanted = set(only) if only else None
    checks: list[Check] = []
    for name, fn in SUITE:
        if wanted is None or name in wanted:
            checks.extend(_guard(name, lambda fn=fn: fn(cfg)))
    return checks


def report_json(checks: Iterable[Check]) -> str:
    """Deterministic JSON: sorted keys, fixed order of checks."""
    return json.dumps([c.to_dict() for c in checks], indent=2, sort_keys=True) + "\n"
