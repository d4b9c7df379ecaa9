import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import flat_band_count
from twistlab.geometry import FlatTorusGrid, OneCocycle, genus_surface, harmonic_twist
from twistlab.twisted_spectral import (MultiplierModel, NovikovShubinFit, anticommutator_check,
                                       assemble_twisted_laplacian, default_window, exact_flat_density, gauge_check,
                                       lambda0, metric_scaling_check, ns_fit, poincare_check, tauberian_check,
                                       theta_function, twisted_density, vanishing_and_semicontinuity)
from twistlab.validation import NotFittedError
from twistlab.vn_core import StepDensity


@given(st.integers(1, 3), st.floats(0, 2), st.floats(0.1, 2), st.floats(0.01, 500), st.data())
def test_exact_density_matches_band_volume(n, t, s, lam, data):
    j = data.draw(st.integers(0, n))
    theta = [t] + [0.0] * (n - 1)
    N = exact_flat_density(n, theta, j, s)
    assert N(lam) == pytest.approx(flat_band_count(n, theta, j, s, lam), rel=1e-12, abs=1e-15)


def test_circle_closed_forms():
    N = exact_flat_density(1, 0.0)
    assert N(math.pi ** 2) == pytest.approx(1.0, abs=1e-12)
    assert N(4.0) == pytest.approx(2.0 / math.pi)
    gapped = exact_flat_density(1, 1.0)
    assert gapped(0.999) == 0.0
    assert exact_flat_density(2, [0, 0])(1.0) == pytest.approx(1 / (4 * math.pi))


def test_unsupported_dimension():
    with pytest.raises(ValueError):
        exact_flat_density(4, 0.0)
    with pytest.raises(ValueError):
        MultiplierModel(4, 0.0)


@pytest.mark.parametrize("s", [0.5, 1.0, 2.0])
def test_circle_grid_bottom(s):
    cc = FlatTorusGrid(1, 512).cell_complex()
    L = assemble_twisted_laplacian(cc, harmonic_twist(cc, np.array([1.0])), 0, s)
    assert lambda0(L) == pytest.approx(s * s, rel=1e-2)
    assert lambda0(MultiplierModel(1, 1.0, 0, s)) == pytest.approx(s * s, abs=1e-12)


def test_separable_path_matches_direct_assembly():
    cc = FlatTorusGrid(2, 12).cell_complex()
    tw = harmonic_twist(cc, np.array([1.3, -0.4]))
    for j in range(3):
        L = assemble_twisted_laplacian(cc, tw, j)
        fast = twisted_density(L)
        slow = twisted_density(L, exact_separable=False)
        assert np.allclose(fast.eigenvalues, slow.eigenvalues, rtol=1e-10, atol=1e-9)


def test_zero_operator_density_is_dimension():
    N = StepDensity(np.zeros(3), 1.0)
    assert N(0.0) == 3.0
    assert N(-1e-9) == 0.0


def _weyl_midpoint_error(n, resolution):
    """Max relative error of the grid density against the closed form in the lower quarter.

    Samples sit halfway (in lambda^{n/2}) between consecutive distinct grid
    eigenvalues, away from the jumps themselves.
    """
    cc = FlatTorusGrid(n, resolution).cell_complex()
    N = twisted_density(assemble_twisted_laplacian(cc, OneCocycle.zero(cc), 0))
    exact = exact_flat_density(n, [0.0] * n)
    ev = N.eigenvalues[: N.eigenvalues.size // 4]
    distinct = np.unique(np.round(ev, 9))
    w = distinct ** (n / 2)
    mids = ((w[:-1] + w[1:]) / 2) ** (2 / n)
    return float(np.max(np.abs(N(mids) - exact(mids)) / exact(mids)))


def test_grid_density_matches_closed_form_circle():
    assert _weyl_midpoint_error(1, 256) <= 0.03


@pytest.mark.xfail(strict=True, reason="second-order grid dispersion exceeds 3% in the lower quarter of a 128^2 grid")
def test_grid_density_matches_closed_form_torus():
    assert _weyl_midpoint_error(2, 128) <= 0.03


@pytest.mark.parametrize("n", [1, 2, 3])
def test_ns_slope_is_half_dimension(n):
    fit = ns_fit(exact_flat_density(n, [0.0] * n), 0.0)
    assert fit.slope == pytest.approx(n / 2, abs=0.02)
    assert not fit.gap_flag


@pytest.mark.parametrize("norm", [0.5, 1.0])
def test_ns_gap_flag(norm):
    fit = ns_fit(exact_flat_density(2, [norm, 0.0]), 0.0)
    assert fit.gap_flag
    assert fit.gap == pytest.approx(norm ** 2)


def test_ns_grid_default_window_sees_gap():
    # below the first nonzero eigenvalue a compact grid has only its kernel
    cc = FlatTorusGrid(1, 64).cell_complex()
    N = twisted_density(assemble_twisted_laplacian(cc, OneCocycle.zero(cc), 0))
    fit = ns_fit(N, None, default_window(1 / 64))
    assert fit.gap_flag


@given(st.floats(0.2, 3), st.floats(0.1, 10))
def test_ns_estimator_recovers_power(p, coef):
    lam = np.geomspace(1e-6, 1e-2, 40)
    est = NovikovShubinFit().fit(lam, coef * lam ** p)
    assert est.slope_ == pytest.approx(p, abs=1e-9)
    assert est.predict(lam) == pytest.approx(coef * lam ** p, rel=1e-8)


def test_ns_estimator_api():
    est = NovikovShubinFit(b=0.5)
    assert est.get_params()["b"] == 0.5
    est.set_params(b=0.0)
    with pytest.raises(NotFittedError):
        est.predict([1.0])


def test_theta_single_jump():
    N = StepDensity([2.0], [0.75])
    assert theta_function(N, 1.5) == pytest.approx(0.75 * math.exp(-3.0))


def test_theta_rejects_nonpositive_time():
    with pytest.raises(ValueError):
        theta_function(exact_flat_density(1, 0.0), 0.0)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_tauberian_consistency(n):
    N = exact_flat_density(n, [0.0] * n)
    assert tauberian_check(N, 0.0, (1e-6, 1e-2), (1e2, 1e6)).passed


def test_tauberian_gapped():
    N = exact_flat_density(2, [1.0, 0.0])
    assert tauberian_check(N, 0.0, (1e-6, 1e-2), (1e2, 1e6)).passed


@given(st.lists(st.floats(-2, 2), min_size=2, max_size=2), st.lists(st.floats(-2, 2), min_size=2, max_size=2),
       st.integers(0, 2))
def test_anticommutator_exact(alpha, beta, j):
    rep = anticommutator_check(MultiplierModel(2, [0.0, 0.0], j), alpha, beta)
    assert rep.passed


def test_anticommutator_not_applicable_on_grids():
    cc = FlatTorusGrid(2, 8).cell_complex()
    rep = anticommutator_check(cc, [1, 0], [0, 1])
    assert "not applicable" in " ".join(c.note + c.name for c in rep.checks)


def test_gauge_identity_genus_two(rng):
    cc = genus_surface(2).cell_complex()
    tw = harmonic_twist(cc, np.array([0.83, -0.41, 0.57, 0.29]))
    assert gauge_check(cc, tw, 0.3 * rng.standard_normal(cc.n_vertices)).passed


@given(st.lists(st.floats(-3, 3), min_size=2, max_size=2))
def test_poincare_torus(theta):
    cc = FlatTorusGrid(2, 8).cell_complex()
    assert poincare_check(cc, harmonic_twist(cc, np.asarray(theta))).passed


def test_poincare_genus_two():
    cc = genus_surface(2).cell_complex()
    assert poincare_check(cc, harmonic_twist(cc, np.array([0.3, -0.2, 0.5, 0.1]))).passed


@given(st.floats(0.5, 2.0))
def test_metric_scaling(c):
    cc = FlatTorusGrid(2, 8).cell_complex()
    assert metric_scaling_check(cc, harmonic_twist(cc, np.array([0.7, 0.2])), c).passed


def test_multiplier_vanishing_on_class_grid():
    grid = [(a, b) for a in (-1.0, 0.0, 1.0) for b in (-1.0, 0.0, 1.0)]
    assert vanishing_and_semicontinuity(grid, MultiplierModel(2, (0.0, 0.0))).passed


def test_surface_scan_jumps_only_at_zero():
    from twistlab.complex_core import cohomology_ranks

    cc = genus_surface(2).cell_complex()
    direction = np.array([0.83, -0.41, 0.57, 0.29])
    scan = [t * direction for t in (-1.0, -0.5, -0.1, 0.0, 0.1, 0.5, 1.0)]
    rep = vanishing_and_semicontinuity(scan, lambda c: cohomology_ranks(cc.complex(harmonic_twist(cc, c))),
                                       reference=[3])
    assert rep.passed
    assert rep.data["jumps"] == [3]
