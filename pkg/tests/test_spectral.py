import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fspec.determinant import SpectralPoint, determinant_z_derivative, fredholm_determinant
from fspec.errors import InvalidArgument
from fspec.lattice import PI_POINT, ZERO, SpectralParams, band_edges
from fspec.spectral import (
    End,
    LowerRegime,
    Side,
    UpperRegime,
    classify_regime,
    critical_couplings,
    find_eigenvalue,
    mu_zero,
    sweep_no_eigenvalues,
    threshold_integral,
    virtual_level_check,
)
from oracles import J0_REFERENCE, eigenvalue_oracle

MU0 = math.sqrt(6.0 / J0_REFERENCE)


class TestCouplings:
    def test_threshold_integral(self):
        assert threshold_integral() == pytest.approx(J0_REFERENCE, abs=1e-7)

    def test_mu_zero(self):
        assert mu_zero() == pytest.approx(MU0, rel=1e-9)

    @pytest.mark.parametrize(
        "gamma, left, right",
        [(6.0, True, True), (0.0, False, True), (-1.0, False, True), (12.0, True, False), (13.0, True, False)],
    )
    def test_existence(self, gamma, left, right):
        c = critical_couplings(gamma)
        assert (c.mu_left is not None, c.mu_right is not None) == (left, right)

    def test_values(self):
        c = critical_couplings(3.0)
        assert c.mu_left == pytest.approx(math.sqrt(3.0 / J0_REFERENCE), rel=1e-9)
        assert c.mu_right == pytest.approx(math.sqrt(9.0 / J0_REFERENCE), rel=1e-9)
        assert critical_couplings(6.0).mu_left == pytest.approx(critical_couplings(6.0).mu_right)


class TestVirtualLevels:
    def test_mu0_both_ends(self):
        p = SpectralParams(6.0, MU0)
        assert virtual_level_check(End.LOWER, p)
        assert virtual_level_check(End.UPPER, p)

    def test_off_critical(self):
        assert not virtual_level_check(End.LOWER, SpectralParams(6.0, 1.1 * MU0))

    @pytest.mark.parametrize("end, gamma", [(End.LOWER, 0.0), (End.UPPER, 12.0)])
    def test_excluded_gamma(self, end, gamma):
        with pytest.raises(InvalidArgument):
            virtual_level_check(end, SpectralParams(gamma, 0.3))


class TestFindEigenvalue:
    def test_negative_gamma_against_oracle(self):
        rep = find_eigenvalue(ZERO, SpectralParams(-1.0, 1.0), Side.BELOW)
        assert rep.found
        assert rep.eigenvalue == pytest.approx(eigenvalue_oracle(-1.0, 1.0), abs=1e-7)
        assert rep.residual <= 1e-7
        lo, hi = rep.bracket
        assert lo <= rep.eigenvalue <= hi < 0

    def test_large_gamma_has_eigenvalue_above(self):
        # gamma >= 12 still produces an eigenvalue above the band
        rep = find_eigenvalue(PI_POINT, SpectralParams(13.0, 5.0), Side.ABOVE)
        assert rep.found and rep.eigenvalue > 18.0
        sp = SpectralPoint(PI_POINT, rep.eigenvalue)
        assert fredholm_determinant(sp, SpectralParams(13.0, 5.0), 1e-10) == pytest.approx(0.0, abs=1e-7)

    def test_no_eigenvalue_reports_certificate(self):
        rep = find_eigenvalue(ZERO, SpectralParams(6.0, 0.5 * MU0), Side.BELOW)
        assert not rep.found and rep.edge_value > 0
        rep = find_eigenvalue(PI_POINT, SpectralParams(6.0, 0.5 * MU0), Side.ABOVE)
        assert not rep.found and rep.edge_value < 0

    def test_zero_coupling_is_w0(self):
        rep = find_eigenvalue(ZERO, SpectralParams(-2.0, 0.0), Side.BELOW)
        assert rep.eigenvalue == pytest.approx(-2.0, abs=1e-9)

    def test_generic_k(self):
        k = (0.6, -1.2, 2.4)
        p = SpectralParams(-0.5, 0.8)
        rep = find_eigenvalue(k, p, Side.BELOW)
        assert rep.eigenvalue < band_edges(k).m
        assert abs(fredholm_determinant(SpectralPoint(k, rep.eigenvalue), p, 1e-10)) < 1e-7

    def test_bad_tolerance(self):
        with pytest.raises(InvalidArgument):
            find_eigenvalue(ZERO, SpectralParams(0.0, 1.0), Side.BELOW, tol=0)


class TestClassify:
    @pytest.mark.parametrize(
        "gamma, factor, lower, upper",
        [
            (6.0, 0.5, LowerRegime.NO_EIGEN, UpperRegime.NO_EIGEN),
            (6.0, 1.0, LowerRegime.VIRTUAL, UpperRegime.VIRTUAL),
            (6.0, 1.5, LowerRegime.UNIQUE, UpperRegime.UNIQUE),
            (-1.0, 0.5, LowerRegime.UNIQUE, UpperRegime.NO_EIGEN),
            (13.0, 0.5, LowerRegime.NO_EIGEN, UpperRegime.UNIQUE),
        ],
    )
    def test_table(self, gamma, factor, lower, upper):
        r = classify_regime(SpectralParams(gamma, factor * MU0))
        assert (r.lower, r.upper) == (lower, upper)

    def test_labels(self):
        assert LowerRegime.VIRTUAL.label == "virtual"
        assert UpperRegime.UNIQUE.label == "unique"

    def test_consistent_with_root_finder(self):
        rng = np.random.default_rng(5)
        checked = 0
        while checked < 50:
            gamma = float(rng.uniform(-2.0, 14.0))
            mu = float(rng.uniform(0.05, 0.6))
            crit = critical_couplings(gamma)
            near = [c for c in (crit.mu_left, crit.mu_right) if c is not None and abs(mu / c - 1) < 0.02]
            if near:
                continue
            p = SpectralParams(gamma, mu)
            r = classify_regime(p)
            below = find_eigenvalue(ZERO, p, Side.BELOW).found
            above = find_eigenvalue(PI_POINT, p, Side.ABOVE).found
            assert below == (r.lower is LowerRegime.UNIQUE)
            assert above == (r.upper is UpperRegime.UNIQUE)
            checked += 1


class TestStructure:
    @given(st.floats(-20.0, -0.01), st.floats(-2.0, 10.0), st.floats(0.05, 1.0))
    @settings(max_examples=25)
    def test_determinant_strictly_decreasing(self, z, gamma, mu):
        sp = SpectralPoint(ZERO, z)
        assert determinant_z_derivative(sp, SpectralParams(gamma, mu), 1e-8) < -1.0

    def test_eigenvalue_decreases_with_coupling(self):
        zs = [find_eigenvalue(ZERO, SpectralParams(3.0, f * critical_couplings(3.0).mu_left),
                              Side.BELOW).eigenvalue for f in (1.05, 1.2, 1.5, 2.0)]
        assert np.all(np.diff(zs) < 0)

    def test_quadratic_emergence_at_virtual_level(self):
        # |z0| grows like (mu - mu_left)^2 just past the critical coupling
        ml = critical_couplings(6.0).mu_left
        eps = np.array([1e-3, 2e-3, 4e-3])
        zs = np.array([find_eigenvalue(ZERO, SpectralParams(6.0, ml * (1 + e)), Side.BELOW,
                                       quad_tol=1e-11).eigenvalue for e in eps])
        slope = np.polyfit(np.log(eps), np.log(-zs), 1)[0]
        assert slope == pytest.approx(2.0, abs=0.1)


class TestSweep:
    def test_mu0_clean(self):
        rep = sweep_no_eigenvalues(5, (-1.0, -1e-2, 18.01, 23.0))
        assert rep.ok and rep.points == 64 and rep.samples == 4 and rep.min_margin > 0

    def test_strong_coupling_violates(self):
        rep = sweep_no_eigenvalues(3, (-1e-2, 18.01), mu=2 * MU0)
        assert not rep.ok
        assert any(v.k == (0.0, 0.0, 0.0) for v in rep.violations)

    def test_rejects_samples_in_band(self):
        with pytest.raises(InvalidArgument):
            sweep_no_eigenvalues(3, (5.0,))

    def test_single_point_grid(self):
        rep = sweep_no_eigenvalues(1, (-1.0,), workers=1)
        assert rep.points == 1 and rep.ok
