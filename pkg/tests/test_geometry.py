import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import twisted_circle_matrix
from twistlab.complex_core import cohomology_ranks, l2_betti, laplacian, validate_complex
from twistlab.geometry import (CellComplex, FlatTorusGrid, LocalSystem, OneCocycle, TriangulatedSurface, build_cover,
                               cover_group_complex, dual_complex, genus_surface, harmonic_twist, integer_cocycle,
                               seven_vertex_torus)
from twistlab.vn_core import HilbertianModule, VNAlgebra

classes = st.floats(-3, 3).filter(lambda x: abs(x) > 0.05)


def _betti(cc, twist=None, fiber=None):
    return cohomology_ranks(cc.complex(twist, fiber))


def test_circle_and_torus_betti():
    assert _betti(FlatTorusGrid(1, 16).cell_complex()) == pytest.approx([1, 1])
    assert _betti(FlatTorusGrid(2, 8).cell_complex()) == pytest.approx([1, 2, 1])


@given(classes)
def test_twisted_circle_is_acyclic(t):
    cc = FlatTorusGrid(1, 16).cell_complex()
    assert _betti(cc, harmonic_twist(cc, np.array([t]))) == pytest.approx([0, 0], abs=1e-9)


def test_surfaces_betti_and_euler():
    torus = seven_vertex_torus().cell_complex()
    assert _betti(torus) == pytest.approx([1, 2, 1])
    g2 = genus_surface(2).cell_complex()
    assert g2.euler_characteristic == -2
    assert _betti(g2) == pytest.approx([1, 4, 1])


@pytest.mark.parametrize("levels", [1, 2])
def test_refinement_keeps_euler_characteristic(levels):
    s = genus_surface(2)
    assert s.refine(levels).cell_complex().euler_characteristic == -2


def test_generic_twist_on_genus_two():
    cc = genus_surface(2).cell_complex()
    tw = harmonic_twist(cc, np.array([0.83, -0.41, 0.57, 0.29]))
    assert _betti(cc, tw) == pytest.approx([0, 2, 0], abs=1e-9)


def test_unitary_phase_twist_on_genus_two():
    cc = genus_surface(2).cell_complex()
    tw = harmonic_twist(cc, 1j * np.array([0.7, 0.3, -0.5, 1.1]))
    assert _betti(cc, tw) == pytest.approx([0, 2, 0], abs=1e-9)


@given(st.integers(8, 40), classes, st.floats(0.2, 3))
def test_twisted_circle_laplacian_matches_oracle(N, t, s):
    cc = FlatTorusGrid(1, N).cell_complex()
    L = laplacian(cc.complex(harmonic_twist(cc, np.array([t])), None, s), 0).blocks[0]
    L = L.toarray() if hasattr(L, "toarray") else L
    ref = twisted_circle_matrix(N, t, s)
    assert np.allclose(np.linalg.eigvalsh(L), np.linalg.eigvalsh(ref), rtol=1e-10, atol=1e-8)


@given(st.lists(st.floats(-2, 2), min_size=2, max_size=2))
def test_twisted_complex_squares_to_zero(theta):
    cc = FlatTorusGrid(2, 8).cell_complex()
    c = cc.complex(harmonic_twist(cc, np.asarray(theta)))
    assert validate_complex(c).passed


def test_non_closed_twist_rejected():
    cc = FlatTorusGrid(2, 8).cell_complex()
    vals = np.zeros(len(cc.edges))
    vals[0] = 1.0
    with pytest.raises(ValueError):
        OneCocycle(cc, vals)


def test_bad_inputs_rejected():
    with pytest.raises(ValueError):
        FlatTorusGrid(2, 4)
    cc = FlatTorusGrid(2, 8).cell_complex()
    with pytest.raises(ValueError):
        harmonic_twist(cc, np.array([1.0]))
    with pytest.raises(ValueError):
        OneCocycle(cc, np.zeros(3))


@given(st.lists(st.floats(-2, 2), min_size=4, max_size=4))
def test_harmonic_twist_periods(coords):
    cc = genus_surface(2).cell_complex()
    tw = harmonic_twist(cc, np.asarray(coords))
    assert np.allclose(tw.loop_periods(), coords, atol=1e-9)


def test_exact_twist_has_zero_periods(rng):
    cc = genus_surface(2).cell_complex()
    tw = OneCocycle.exact(cc, rng.standard_normal(cc.n_vertices))
    assert np.allclose(tw.loop_periods(), 0, atol=1e-12)
    assert tw.closedness_error() <= 1e-12


def test_cocycle_csv_round_trip(rng):
    cc = genus_surface(2).cell_complex()
    tw = harmonic_twist(cc, rng.standard_normal(4))
    back = OneCocycle.from_csv(cc, tw.to_csv())
    assert np.array_equal(back.values, tw.values)
    assert tw.to_csv().endswith("\n") and "\r" not in tw.to_csv()


def test_mesh_round_trips():
    s = genus_surface(2)
    back = TriangulatedSurface.from_json(s.to_json())
    assert back.cell_complex().n_cells == s.cell_complex().n_cells
    cc = s.cell_complex()
    cc2 = CellComplex.from_mesh_dict(cc.to_mesh_dict())
    assert _betti(cc2) == pytest.approx(_betti(cc))


def test_local_system_with_matrix_fiber():
    cc = FlatTorusGrid(2, 8).cell_complex()
    fiber = HilbertianModule(VNAlgebra.matrix(2), 1)
    ls = LocalSystem(fiber, harmonic_twist(cc, np.zeros(2)))
    assert ls.holonomy_defect() <= 1e-12
    assert [l2_betti(ls.complex(), k) for k in range(3)] == pytest.approx([1, 2, 1])


def test_circle_cover_equals_longer_circle():
    base = FlatTorusGrid(1, 16).cell_complex()
    cover = build_cover(base, 4, [1])
    assert cover.complex.n_cells == [64, 64]
    assert _betti(cover.complex) == pytest.approx([1, 1])


@pytest.mark.parametrize("k", [2, 3])
def test_genus_two_cover_betti(k):
    cc = genus_surface(2).cell_complex()
    cover = build_cover(cc, k, [1, 0, 0, 0])
    # a k-fold cover of a genus-2 surface has genus k + 1
    assert _betti(cover.complex) == pytest.approx([1, 2 * k + 2, 1])


@pytest.mark.parametrize("k", [2, 3])
def test_group_picture_matches_cover(k):
    cc = genus_surface(2).cell_complex()
    cover = build_cover(cc, k, [1, 0, 0, 0])
    tw = harmonic_twist(cc, np.array([0.83, -0.41, 0.57, 0.29]))
    direct = [b / k for b in _betti(cover.complex, cover.lift(tw))]
    group = [l2_betti(cover_group_complex(cover, tw), j) for j in range(3)]
    assert group == pytest.approx(direct, abs=1e-9)


def test_integer_cocycle_is_integral():
    cc = genus_surface(2).cell_complex()
    w = integer_cocycle(cc, [1, 0, 0, 0])
    assert np.array_equal(w, np.round(w))


def test_dual_complex_betti_reversed():
    cc = genus_surface(2).cell_complex()
    tw = harmonic_twist(cc, np.array([0.3, 0.1, -0.2, 0.4]))
    _, dual = dual_complex(cc, tw)
    primal = _betti(cc, tw)
    assert cohomology_ranks(dual) == pytest.approx(primal[::-1], abs=1e-9)
