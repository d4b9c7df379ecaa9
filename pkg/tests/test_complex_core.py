import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from oracles import betti_from_matrices, minus_projection_onto_summand, singular_counts
from twistlab.complex_core import (FiniteComplex, F_density, G_density, brute_force_F, cohomology_ranks, conjugate,
                                   density_split, elementary_complex, euler_identity, extended_cohomology,
                                   homotopy_dilation_check, inclusion_projection, l2_betti, laplacian,
                                   morse_partial_sums, mu_bounds, random_complex, validate_complex)
from twistlab.vn_core import AMap, HilbertianModule, VNAlgebra, dim_tau

seeds = st.integers(0, 2 ** 31 - 1)


def _random(seed, length=None):
    rng = np.random.default_rng(seed)
    alg = VNAlgebra.random(rng)
    return random_complex(alg, rng, length or int(rng.integers(2, 5))), rng


def _plain_complex(mats):
    """Complex over the trivial algebra from plain matrices d_k : C^{n_k} -> C^{n_{k+1}}."""
    alg = VNAlgebra.trivial()
    dims = [mats[0].shape[1]] + [m.shape[0] for m in mats]
    mods = [HilbertianModule(alg, n) for n in dims]
    diffs = [AMap(mods[k], mods[k + 1], [m.astype(complex)]) for k, m in enumerate(mats)]
    return FiniteComplex(mods, diffs), dims


def test_plain_complex_betti_matches_oracle():
    # cellular cochains of a circle with 3 vertices and 3 edges
    d0 = np.array([[-1, 1, 0], [0, -1, 1], [1, 0, -1]], dtype=float)
    c, dims = _plain_complex([d0])
    assert [l2_betti(c, k) for k in range(2)] == pytest.approx(betti_from_matrices([d0], dims))
    assert [l2_betti(c, k) for k in range(2)] == pytest.approx([1, 1])


def test_validate_rejects_nonzero_square():
    a = np.array([[1.0]])
    c, _ = _plain_complex([a, a])
    assert not validate_complex(c).passed


@given(seeds)
def test_random_complexes_are_valid(seed):
    c, _ = _random(seed)
    assert validate_complex(c).passed


@given(seeds)
def test_euler_and_partial_sums(seed):
    c, _ = _random(seed)
    assert euler_identity(c).passed
    assert morse_partial_sums(c).passed


@given(seeds)
def test_density_split_and_F_equals_G(seed):
    c, _ = _random(seed)
    for k in range(c.n + 1):
        assert density_split(c, k).report.passed


@given(seeds)
def test_rank_betti_equals_kernel_betti(seed):
    c, _ = _random(seed)
    assert cohomology_ranks(c) == pytest.approx([l2_betti(c, k) for k in range(c.n + 1)], abs=1e-9)


@given(seeds)
def test_laplacian_total_mass(seed):
    c, _ = _random(seed)
    for k in range(c.n + 1):
        N = F_density(c, k)
        assert N(1e300) <= dim_tau(c.modules[k]) + 1e-9


@given(st.lists(st.floats(0.1, 5.0), min_size=1, max_size=5), st.floats(0.01, 30))
def test_F_on_diagonal_maps_matches_singular_count(diag, lam):
    # a jump exactly at lam is decided by rounding, not by the algorithm
    assume(all(abs(x * x - lam) > 1e-9 * lam for x in diag))
    d = np.diag(diag)
    c, _ = _plain_complex([d])
    assert F_density(c, 0)(lam) == pytest.approx(singular_counts(d, lam))
    assert brute_force_F(c, 0, lam) == pytest.approx(singular_counts(d, lam))


@given(seeds, st.floats(0.01, 20))
def test_brute_force_F_is_lower_bound(seed, lam):
    rng = np.random.default_rng(seed)
    alg = VNAlgebra.random(rng, max_dim=2)
    c = random_complex(alg, rng, 3, max_multiplicity=2)
    for k in range(c.n):
        assert brute_force_F(c, k, lam) <= F_density(c, k)(lam) + 1e-9


def test_brute_force_refuses_large_blocks():
    c, _ = _plain_complex([np.eye(7)])
    with pytest.raises(ValueError):
        brute_force_F(c, 0, 1.0)


@given(seeds)
def test_homotopy_inclusion_projection(seed):
    c, rng = _random(seed)
    k = int(rng.integers(0, c.n))
    E = elementary_complex(HilbertianModule.random(c.algebra, rng), c.n, k)
    total, f, g = inclusion_projection(c, E)
    assert homotopy_dilation_check(c, total, f, g).passed


@given(seeds)
def test_homotopy_reverse_direction(seed):
    c, rng = _random(seed)
    k = int(rng.integers(0, c.n))
    E = elementary_complex(HilbertianModule.random(c.algebra, rng), c.n, k)
    total, f, g = inclusion_projection(c, E)
    T = [None] * (c.n + 2)
    T[k + 1] = minus_projection_onto_summand(c, E, total, k)
    rep = homotopy_dilation_check(total, c, g, f, T)
    assert rep.passed


@given(seeds)
def test_homotopy_conjugation(seed):
    c, rng = _random(seed)
    A = []
    for m in c.modules:
        blocks = [np.eye(r) + 0.3 * (rng.standard_normal((r, r)) + 1j * rng.standard_normal((r, r)))
                  for r in m.ranks]
        A.append(AMap(m, m, blocks))
    c2 = conjugate(c, A)
    inv = [AMap(a.target, a.source, [np.linalg.inv(b) for b in a.blocks]) for a in A]
    assert homotopy_dilation_check(c, c2, A, inv).passed
    assert homotopy_dilation_check(c2, c, inv, A).passed


def test_homotopy_rejects_non_chain_maps(rng):
    c = random_complex(VNAlgebra.trivial(), rng, 3)
    while all(d.norm() == 0 for d in (c.d(0), c.d(1))):
        c = random_complex(VNAlgebra.trivial(), rng, 3)
    f = [AMap.identity(m) * 2.0 for m in c.modules]
    f[0] = AMap.identity(c.modules[0])
    with pytest.raises(ValueError):
        homotopy_dilation_check(c, c, f, f)


@given(seeds)
def test_json_round_trip(seed):
    c, _ = _random(seed)
    back = FiniteComplex.from_json(c.to_json())
    for k in range(c.n):
        assert (back.d(k) - c.d(k)).norm() <= 1e-15
    assert back.dims() == pytest.approx(c.dims())


@given(seeds)
def test_extended_projective_part_is_betti(seed):
    c, _ = _random(seed)
    for i in range(1, c.n + 1):
        e = extended_cohomology(c, i)
        assert e.projective_dim == pytest.approx(l2_betti(c, i), abs=1e-9)
        assert mu_bounds(e, c.algebra.is_factor).lower == pytest.approx(e.projective_dim)


def test_F_equals_G_shift_on_plain_complex():
    d = np.array([[2.0, 0.0], [0.0, 0.5]])
    c, _ = _plain_complex([d])
    assert F_density(c, 0).jumps == G_density(c, 1).jumps


def test_laplacian_of_elementary_complex_is_identity():
    m = HilbertianModule(VNAlgebra.matrix(2), 1)
    E = elementary_complex(m, 2, 0)
    for k in (0, 1):
        assert (laplacian(E, k) - AMap.identity(m)).norm() <= 1e-15
