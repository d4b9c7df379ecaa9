import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import group_trace
from twistlab.vn_core import (AMap, HilbertianModule, PowerLawDensity, StepDensity, VNAlgebra, commutant_trace,
                              dilation_compare, dilation_equivalent, dim_tau, spectral_density, trace_tau)

seeds = st.integers(0, 2 ** 31 - 1)


def test_algebra_weights_must_sum_to_one():
    with pytest.raises(ValueError):
        VNAlgebra(((1, 0.5), (2, 0.4)))
    with pytest.raises(ValueError):
        VNAlgebra(((0, 1.0),))


def test_trace_of_identity_is_one():
    alg = VNAlgebra(((1, 0.25), (3, 0.75)))
    assert trace_tau(alg, alg.identity()) == pytest.approx(1.0)


def test_trace_rejects_wrong_shapes():
    alg = VNAlgebra.matrix(2)
    with pytest.raises(ValueError):
        trace_tau(alg, [np.eye(3)])


@given(st.integers(2, 7), seeds)
def test_group_trace_matches_identity_coefficient(n, seed):
    rng = np.random.default_rng(seed)
    c = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    alg = VNAlgebra.cyclic_group(n)
    assert abs(trace_tau(alg, alg.group_element(c)) - group_trace(c)) <= 1e-12


@given(seeds)
def test_trace_is_tracial(seed):
    rng = np.random.default_rng(seed)
    alg = VNAlgebra.random(rng)
    a, b = alg.random_element(rng), alg.random_element(rng)
    ab = [x @ y for x, y in zip(a, b)]
    ba = [y @ x for x, y in zip(a, b)]
    assert abs(trace_tau(alg, ab) - trace_tau(alg, ba)) <= 1e-10


def test_free_module_dimension_is_multiplicity():
    alg = VNAlgebra(((2, 0.5), (3, 0.5)))
    assert dim_tau(HilbertianModule(alg, 4)) == pytest.approx(4.0)


def test_projective_module_dimension():
    alg = VNAlgebra(((2, 0.5), (3, 0.5)))
    p = [np.diag([1, 0]).astype(complex), np.diag([1, 1, 0]).astype(complex)]
    m = HilbertianModule(alg, 1, p)
    assert dim_tau(m) == pytest.approx(0.5 * 1 / 2 + 0.5 * 2 / 3)


def test_projection_must_be_idempotent():
    alg = VNAlgebra.matrix(2)
    with pytest.raises(ValueError):
        HilbertianModule(alg, 1, [np.array([[1, 1], [0, 1]], dtype=complex)])


@given(seeds, st.integers(1, 4))
def test_amplify_multiplies_dimension(seed, n):
    rng = np.random.default_rng(seed)
    m = HilbertianModule.random(VNAlgebra.random(rng), rng)
    big = m.amplify(n)
    assert dim_tau(big) == pytest.approx(n * dim_tau(m))
    assert [b.shape[1] for b in big.basis] == list(big.ranks)


@given(seeds)
def test_direct_sum_is_additive(seed):
    rng = np.random.default_rng(seed)
    alg = VNAlgebra.random(rng)
    a, b = HilbertianModule.random(alg, rng), HilbertianModule.random(alg, rng)
    assert dim_tau(a.direct_sum(b)) == pytest.approx(dim_tau(a) + dim_tau(b))


@given(seeds)
def test_module_json_round_trip(seed):
    rng = np.random.default_rng(seed)
    m = HilbertianModule.random(VNAlgebra.random(rng), rng)
    back = HilbertianModule.from_json(m.to_json())
    assert back == m
    for p, q in zip(m.projection, back.projection):
        assert np.allclose(p, q, atol=1e-15)


@given(seeds)
def test_commutant_trace_of_identity_is_dimension(seed):
    rng = np.random.default_rng(seed)
    m = HilbertianModule.random(VNAlgebra.random(rng), rng)
    assert commutant_trace(AMap.identity(m)).real == pytest.approx(dim_tau(m))


@given(seeds)
def test_adjoint_and_composition(seed):
    rng = np.random.default_rng(seed)
    alg = VNAlgebra.random(rng)
    a, b, c = (HilbertianModule.random(alg, rng) for _ in range(3))
    f, g = AMap.random(a, b, rng), AMap.random(b, c, rng)
    lhs = (g @ f).adjoint
    rhs = f.adjoint @ g.adjoint
    assert (lhs - rhs).norm() <= 1e-10


def test_amap_json_round_trip(rng):
    alg = VNAlgebra.random(rng)
    a, b = HilbertianModule.random(alg, rng), HilbertianModule.random(alg, rng)
    f = AMap.random(a, b, rng)
    g = AMap.from_dict(json.loads(json.dumps(f.to_dict())))
    assert (f - g).norm() <= 1e-15


def test_maps_over_different_algebras_rejected():
    a = HilbertianModule(VNAlgebra.matrix(1), 1)
    b = HilbertianModule(VNAlgebra.matrix(2), 1)
    with pytest.raises(ValueError):
        AMap.zero(a, b)


@given(seeds)
def test_spectral_density_total_is_dimension(seed):
    rng = np.random.default_rng(seed)
    m = HilbertianModule.random(VNAlgebra.random(rng), rng)
    f = AMap.random(m, m, rng)
    N = spectral_density(f.adjoint @ f)
    assert N(1e300) == pytest.approx(dim_tau(m))
    assert N(-1.0) == 0.0


def test_spectral_density_trivial_algebra_counts_eigenvalues():
    m = HilbertianModule(VNAlgebra.trivial(), 4)
    f = AMap(m, m, [np.diag([0.0, 1.0, 1.0, 3.0]).astype(complex)])
    N = spectral_density(f)
    assert [N(x) for x in (-0.1, 0.0, 0.5, 1.0, 2.9, 3.0)] == [0, 1, 1, 3, 3, 4]


def test_spectral_density_rejects_non_self_adjoint():
    m = HilbertianModule(VNAlgebra.trivial(), 2)
    f = AMap(m, m, [np.array([[0, 1], [0, 0]], dtype=complex)])
    with pytest.raises(ValueError):
        spectral_density(f)


def test_step_density_right_continuous():
    N = StepDensity([1.0, 2.0], [0.5, 0.25])
    assert N(1.0) == 0.5
    assert N(np.nextafter(1.0, 0)) == 0.0
    assert N.gap() == 1.0


@given(st.floats(0.1, 10), st.floats(0.5, 3))
def test_dilation_equivalence_of_rescaled_power_law(c, p):
    F = PowerLawDensity(1.0, p)
    G = PowerLawDensity(c, p)
    assert dilation_equivalent(F, G, 1.0)


def test_dilation_detects_different_exponents():
    F = PowerLawDensity(1.0, 0.5)
    G = PowerLawDensity(1.0, 1.5)
    assert dilation_compare(G, F, 1.0).dominated
    assert not dilation_compare(F, G, 1.0).dominated


def test_dilation_gap_versus_no_gap():
    gapped = PowerLawDensity(1.0, 1.0, gap=0.1)
    open_ = PowerLawDensity(1.0, 1.0)
    assert dilation_compare(gapped, open_, 0.05).dominated
    assert not dilation_compare(open_, gapped, 0.05).dominated


def test_dilation_empty_range_rejected():
    with pytest.raises(ValueError):
        dilation_compare(PowerLawDensity(1, 1), PowerLawDensity(1, 1), 0.0)


def test_power_law_kernel_mass():
    N = PowerLawDensity(2.0, 1.0, jump0=0.5)
    assert N.kernel_mass() == 0.5
    assert N(4.0) == pytest.approx(8.5)
    assert math.isfinite(N.gap())
